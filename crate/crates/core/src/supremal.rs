//! Supremal controllable, normal, and controllable-and-normal sublanguages.
//!
//! Each operator first intersects the specification with the plant's
//! marked language, so `K ⊆ L_m(G)` is never required of the caller.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::Serialize;

use crate::alphabet::EventSet;
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::ops::{self, same_alphabet};
use crate::props::{self, ControlContext};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthesisResult {
    #[serde(skip)]
    pub language: Generator,
    pub iterations: usize,
    pub fixpoint_reached: bool,
}

const NONE: u32 = u32::MAX;

/// Reachable part of `k × l` with the pair structure kept, so that plant
/// moves can be inspected per product state.
struct Pairs {
    k: usize,
    plant: Vec<usize>,
    table: Vec<u32>,
    marked: Vec<bool>,
}

impl Pairs {
    fn build(spec: &Generator, plant: &Generator, limits: &Limits) -> Result<Pairs> {
        let k = spec.alphabet().len();
        let mut index: HashMap<(usize, usize), u32> = HashMap::new();
        let mut states = vec![(spec.initial(), plant.initial())];
        index.insert(states[0], 0);
        let mut table = Vec::new();
        let mut marked = Vec::new();
        let mut cursor = 0;
        while cursor < states.len() {
            let (p, q) = states[cursor];
            marked.push(spec.is_marked(p) && plant.is_marked(q));
            for e in 0..k {
                let t = match (spec.next(p, e), plant.next(q, e)) {
                    (Some(p2), Some(q2)) => match index.entry((p2, q2)) {
                        Entry::Occupied(o) => *o.get(),
                        Entry::Vacant(v) => {
                            let id = states.len() as u32;
                            v.insert(id);
                            states.push((p2, q2));
                            limits.check_states(states.len())?;
                            id
                        }
                    },
                    _ => NONE,
                };
                table.push(t);
            }
            cursor += 1;
        }
        Ok(Pairs {
            k,
            plant: states.iter().map(|s| s.1).collect(),
            table,
            marked,
        })
    }

    fn len(&self) -> usize {
        self.marked.len()
    }

    fn next(&self, s: usize, e: usize) -> Option<usize> {
        let t = self.table[s * self.k + e];
        (t != NONE).then_some(t as usize)
    }

    /// Restricts `alive` to states reachable from 0 and coreachable, both
    /// within `alive`. Returns whether anything changed.
    fn trim_alive(&self, alive: &mut [bool]) -> bool {
        let n = self.len();
        let mut reach = vec![false; n];
        if alive[0] {
            let mut stack = vec![0];
            reach[0] = true;
            while let Some(s) = stack.pop() {
                for e in 0..self.k {
                    if let Some(t) = self.next(s, e) {
                        if alive[t] && !reach[t] {
                            reach[t] = true;
                            stack.push(t);
                        }
                    }
                }
            }
        }
        let mut co: Vec<bool> = (0..n).map(|s| reach[s] && self.marked[s]).collect();
        let mut grew = true;
        while grew {
            grew = false;
            for s in 0..n {
                if reach[s] && !co[s] && (0..self.k).any(|e| self.next(s, e).is_some_and(|t| co[t])) {
                    co[s] = true;
                    grew = true;
                }
            }
        }
        let mut changed = false;
        for s in 0..n {
            if alive[s] && !co[s] {
                alive[s] = false;
                changed = true;
            }
        }
        changed
    }

    fn extract(&self, spec: &Generator, alive: &[bool]) -> Generator {
        if !alive[0] {
            return Generator::empty(spec.alphabet().clone());
        }
        let table = self
            .table
            .iter()
            .map(|&t| if t != NONE && alive[t as usize] { t } else { NONE })
            .collect();
        Generator::from_parts(spec.alphabet().clone(), 0, self.marked.clone(), table)
            .restrict_to(alive)
            .canonical()
    }
}

/// Supremal sublanguage of `K ∩ L_m(G)` whose closure is controllable with
/// respect to `cl(L_m(G))` and `a_u`.
pub fn sup_c(k: &Generator, l: &Generator, a_u: &EventSet, limits: &Limits) -> Result<SynthesisResult> {
    same_alphabet(k, l)?;
    k.alphabet().check_known(a_u)?;
    let plant = ops::trim(l);
    let unc: Vec<usize> = (0..k.alphabet().len())
        .filter(|e| a_u.contains(&k.alphabet().event(*e).name))
        .collect();
    let pairs = Pairs::build(k, &plant, limits)?;
    let mut alive = vec![true; pairs.len()];
    pairs.trim_alive(&mut alive);
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > limits.max_iterations {
            return Err(Error::IterationLimit {
                limit: limits.max_iterations,
            });
        }
        let mut changed = false;
        for s in 0..pairs.len() {
            if !alive[s] {
                continue;
            }
            let escapes = unc.iter().any(|&e| {
                plant.next(pairs.plant[s], e).is_some()
                    && !pairs.next(s, e).is_some_and(|t| alive[t])
            });
            if escapes {
                alive[s] = false;
                changed = true;
            }
        }
        changed |= pairs.trim_alive(&mut alive);
        if !changed {
            break;
        }
    }
    Ok(SynthesisResult {
        language: pairs.extract(k, &alive),
        iterations,
        fixpoint_reached: true,
    })
}

/// Supremal sublanguage `K'` of `K ∩ L_m(G)` with
/// `cl(K') = Q^-1 Q(cl(K')) ∩ cl(L_m(G))`.
///
/// Iterates `K_{n+1} = K_n ∩ (C_n \ Q^-1 Q(cl(L) \ C_n)·A*)` with
/// `C_n = cl(K_n)`; the subtracted set is every word whose observation
/// extends the observation of a plant word leaving `C_n`.
pub fn sup_n(k: &Generator, l: &Generator, a_o: &EventSet, limits: &Limits) -> Result<SynthesisResult> {
    same_alphabet(k, l)?;
    k.alphabet().check_known(a_o)?;
    let plant = ops::prefix_closure(l);
    let mut current = ops::trim(&ops::intersection(k, l, limits)?);
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > limits.max_iterations {
            return Err(Error::IterationLimit {
                limit: limits.max_iterations,
            });
        }
        if current.is_marked_empty() {
            break;
        }
        let closure = ops::prefix_closure(&current);
        let bad = ops::difference(&plant, &closure, limits)?;
        let tainted = ops::suffix_extension(&props::observation_closure(&bad, a_o, limits)?);
        let normal = ops::difference(&closure, &tainted, limits)?;
        let next = ops::trim(&ops::intersection(&current, &normal, limits)?);
        if next == current {
            break;
        }
        current = next;
    }
    Ok(SynthesisResult {
        language: current,
        iterations,
        fixpoint_reached: true,
    })
}

/// Supremal controllable and normal sublanguage: alternates [`sup_c`] and
/// [`sup_n`] until the language is stable, then re-checks both
/// properties on the result.
pub fn sup_cn(k: &Generator, l: &Generator, ctx: &ControlContext, limits: &Limits) -> Result<SynthesisResult> {
    same_alphabet(k, l)?;
    let mut current = ops::trim(&ops::intersection(k, l, limits)?);
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > limits.max_iterations {
            return Err(Error::IterationLimit {
                limit: limits.max_iterations,
            });
        }
        let c = sup_c(&current, l, &ctx.uncontrollable, limits)?.language;
        let next = sup_n(&c, l, &ctx.observable, limits)?.language;
        if next == current {
            break;
        }
        current = next;
    }
    let controllable = props::is_controllable(&current, l, &ctx.uncontrollable)?;
    let normal = props::is_normal(&current, l, &ctx.observable, limits)?;
    if !controllable.holds || !normal.holds {
        return Err(Error::Internal(format!(
            "supremal result fails its own check: controllable {:?}, normal {:?}",
            controllable.witness, normal.witness
        )));
    }
    Ok(SynthesisResult {
        language: current,
        iterations,
        fixpoint_reached: true,
    })
}
