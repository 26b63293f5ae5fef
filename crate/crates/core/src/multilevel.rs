//! The combined synthesis procedure for three-level coordination control:
//! coordinators are designed top-down, then local supervisors, a posteriori
//! supervisors and coordinators for nonblockingness are computed bottom-up.
//!
//! The eleven steps of [`run_combined_procedure`]:
//!
//! 1. extend `A_k` until `K = ∥_j P_{I_j+k}(K)`;
//! 2. build `G_k = ∥_i P_k(G_i)`;
//! 3. extend every `A_{k_j} ⊇ A_k` until `P_{I_j+k}(K) = ∥_{i∈I_j} P_{i+k_j}(K)`;
//! 4. build every group coordinator `G_{k_j}`;
//! 5. `supCN_{k_j} = supCN(P_{k_j}(K), L(G_{k_j}))`;
//! 6. `supCN_{i+k_j} = supCN(P_{i+k_j}(K), L(G_i) ∥ supCN_{k_j})`;
//! 7. a posteriori group supervisors `~supCN_{k_j}`;
//! 8. group coordinators for nonblockingness `C_{k_j}` and group
//!    closed loops `N_j`;
//! 9. the a posteriori high-level supervisor `~supCN_k`;
//! 10. the high-level coordinator for nonblockingness `C_k`;
//! 11. the final closed loop `∥_j N_j ∥ ~supCN_k ∥ C_k`.
//!
//! Every intermediate language is stored trimmed and canonical.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::alphabet::{merge_all, Alphabet, EventSet};
use crate::config::{Config, CoordinatorScope, Limits};
use crate::coordination::{
    finalize_group_alphabet, finalize_high_alphabet, shared_events, Hierarchy, MultilevelSpec,
};
use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::observer::extend_for_observer;
use crate::ops;
use crate::props::{self, ControlContext, Verdict};
use crate::supremal::sup_cn;

/// Version of the report layout; bumped on any incompatible change.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Coordinator for nonblockingness together with its (possibly extended)
/// alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonblockingCoordinator {
    pub alphabet: EventSet,
    pub coordinator: Generator,
    /// True when the operands were already nonconflicting and the
    /// coordinator is the neutral `A*`.
    pub neutral: bool,
}

fn neutral(alphabet: Alphabet) -> NonblockingCoordinator {
    NonblockingCoordinator {
        alphabet: alphabet.names(),
        coordinator: Generator::universal(alphabet),
        neutral: true,
    }
}

/// Extends `seed` by the events shared between operands and then until the
/// projection onto it is an observer of every operand. The per-operand
/// extensions are merged and the loop repeats until nothing changes.
fn observer_alphabet(operands: &[Generator], seed: &EventSet, limits: &Limits) -> Result<EventSet> {
    let alphabets: Vec<EventSet> = operands.iter().map(|g| g.alphabet().names()).collect();
    let mut b: EventSet = seed
        .union(&shared_events(&alphabets))
        .cloned()
        .collect();
    loop {
        let mut next = b.clone();
        for (g, a) in operands.iter().zip(&alphabets) {
            let local: EventSet = a.intersection(&b).cloned().collect();
            next.extend(extend_for_observer(g, &local, limits)?);
        }
        if next == b {
            return Ok(b);
        }
        b = next;
    }
}

fn coordinate(
    operands: &[Generator],
    seed: &EventSet,
    ctx: Option<&ControlContext>,
    limits: &Limits,
) -> Result<NonblockingCoordinator> {
    let global = merge_all(operands.iter().map(Generator::alphabet))?;
    let b = observer_alphabet(operands, seed, limits)?;
    let target = global.restrict(&b)?;
    let projected = operands
        .iter()
        .map(|g| {
            let local: EventSet = g.alphabet().names().intersection(&b).cloned().collect();
            let p = ops::project(g, &local, limits)?;
            ops::lift(&p, &target)
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = ops::intersection_all(&projected, limits)?;
    let coordinator = match ctx {
        None => ops::trim(&spec),
        Some(ctx) => {
            let closed: Vec<Generator> = projected.iter().map(ops::prefix_closure).collect();
            let plant = ops::intersection_all(&closed, limits)?;
            sup_cn(&spec, &plant, &ctx.restrict(&b), limits)?.language
        }
    };
    let mut all = operands.to_vec();
    all.push(coordinator.clone());
    let v = props::is_nonconflicting(&all, limits)?;
    if !v.holds {
        return Err(Error::Internal(format!(
            "coordinated system still blocks: {:?}",
            v.witness
        )));
    }
    Ok(NonblockingCoordinator {
        alphabet: b,
        coordinator,
        neutral: false,
    })
}

/// Coordinator that makes `∥_i L_i ∥ L_m(C_k)` nonblocking: the alphabet is
/// `a_k_seed` plus all shared events, extended until the projection is an
/// `L_i`-observer for every `i`; `L_m(C_k) = ∥_i P_k(L_i)`.
pub fn build_nonblocking_coordinator(
    plants: &[Generator],
    a_k_seed: &EventSet,
    limits: &Limits,
) -> Result<NonblockingCoordinator> {
    if plants.is_empty() {
        return Err(Error::Precondition("no plants".into()));
    }
    coordinate(plants, a_k_seed, None, limits)
}

/// Coordinator for nonblockingness of a set of supervised components:
/// `supCN(∥ P_B(L_i), ∥ cl(P_B(L_i)))` over the observer alphabet `B ⊇
/// seed`, or the neutral `seed*` when the components are nonconflicting.
pub fn supervised_nonblocking_coordinator(
    operands: &[Generator],
    seed: &Alphabet,
    ctx: &ControlContext,
    limits: &Limits,
) -> Result<(NonblockingCoordinator, Verdict)> {
    let v = props::is_nonconflicting(operands, limits)?;
    if v.holds {
        return Ok((neutral(seed.clone()), v));
    }
    Ok((coordinate(operands, &seed.names(), Some(ctx), limits)?, v))
}

/// Condition verdicts for one subsystem: `P_{k_j}(supCN_{i+k_j})` against
/// `L(G_{k_j})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowCondition {
    pub group: usize,
    pub subsystem: usize,
    pub controllable: Verdict,
    pub normal: Verdict,
}

/// Condition verdicts for one group: `P_k(∥_{i∈I_j} supCN_{i+k_j})`
/// against `L(G_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HighCondition {
    pub group: usize,
    pub controllable: Verdict,
    pub normal: Verdict,
}

/// Sufficient conditions under which the plain product of the local
/// supervisors is already the supremal three-level conditionally
/// controllable and normal sublanguage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub low: Vec<LowCondition>,
    pub high: Vec<HighCondition>,
    pub all_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupReport {
    pub group: usize,
    pub subsystems: Vec<usize>,
    pub coordinator_alphabet: EventSet,
    pub nonblocking_alphabet: EventSet,
    pub nonconflicting: Verdict,
    pub coordinator_neutral: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactSummary {
    pub name: String,
    pub states: usize,
    pub transitions: usize,
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: Config,
    pub specification_prefix_closed: bool,
    pub high_alphabet: EventSet,
    pub high_nonblocking_alphabet: EventSet,
    /// `L(G_k) ∥ L(G_{k_j}) = L(G_{k_j})` for every group. Only checked
    /// when group coordinators are built from all subsystems.
    pub coordinator_consistency: Option<bool>,
    pub decomposability: Verdict,
    pub groups: Vec<GroupReport>,
    pub conditions: ConditionReport,
    pub high_nonconflicting: Verdict,
    pub high_coordinator_neutral: bool,
    pub final_nonblocking: bool,
    pub final_within_specification: bool,
    pub artifacts: Vec<ArtifactSummary>,
}

/// Everything computed by [`run_combined_procedure`].
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub hierarchy: Hierarchy,
    /// `supCN_{k_j}`.
    pub group_supervisors: Vec<Generator>,
    /// `supCN_{i+k_j}`, per group in member order.
    pub local_supervisors: Vec<Vec<Generator>>,
    /// `~supCN_{k_j}`.
    pub apost_low: Vec<Generator>,
    /// `~supCN_{i+k_j} = supCN_{i+k_j} ∥ ~supCN_{k_j}`.
    pub restricted_local: Vec<Vec<Generator>>,
    /// `C_{k_j}`.
    pub group_nb: Vec<NonblockingCoordinator>,
    /// `N_j`.
    pub group_closed_loops: Vec<Generator>,
    /// `~supCN_k`.
    pub apost_high: Generator,
    /// `C_k`.
    pub high_nb: NonblockingCoordinator,
    pub closed_loop: Generator,
    pub report: Report,
    /// Wall-clock time per step, kept out of the report so that reports
    /// stay reproducible.
    pub step_durations: Vec<(usize, Duration)>,
}

impl PipelineArtifacts {
    /// Named artifacts in a fixed order. Subsystem and group numbers are
    /// 1-based.
    pub fn named(&self) -> Vec<(String, &Generator)> {
        let h = &self.hierarchy;
        let mut out = vec![("coordinator_k".to_string(), &h.high_coordinator)];
        for (j, group) in h.groups.iter().enumerate() {
            let j1 = j + 1;
            out.push((format!("coordinator_k{j1}"), &h.group_coordinators[j]));
            out.push((format!("supcn_k{j1}"), &self.group_supervisors[j]));
            for (pos, &i) in group.iter().enumerate() {
                out.push((format!("supcn_{}_k{j1}", i + 1), &self.local_supervisors[j][pos]));
            }
            out.push((format!("apost_k{j1}"), &self.apost_low[j]));
            out.push((format!("nbcoord_k{j1}"), &self.group_nb[j].coordinator));
            out.push((format!("group_{j1}"), &self.group_closed_loops[j]));
        }
        out.push(("apost_k".to_string(), &self.apost_high));
        out.push(("nbcoord_k".to_string(), &self.high_nb.coordinator));
        out.push(("final".to_string(), &self.closed_loop));
        out
    }

    /// `∥_j ∥_{i∈I_j} supCN_{i+k_j}`, the closed loop without a posteriori
    /// supervisors.
    pub fn plain_product(&self, limits: &Limits) -> Result<Generator> {
        ops::product_all(self.local_supervisors.iter().flatten(), limits)
    }
}

fn ctx_on(h: &Hierarchy, set: &EventSet) -> ControlContext {
    h.context.restrict(set)
}

/// Steps 5 and 6: `supCN_{k_j}` and `supCN_{i+k_j}` for every group.
pub fn compute_group_supervisors(
    h: &Hierarchy,
    limits: &Limits,
) -> Result<(Vec<Generator>, Vec<Vec<Generator>>)> {
    let per_group = (0..h.groups.len())
        .into_par_iter()
        .map(|j| {
            let a_kj = &h.group_alphabets[j];
            let pk = ops::project(&h.specification, a_kj, limits)?;
            let sup_kj = sup_cn(&pk, &h.group_coordinators[j], &ctx_on(h, a_kj), limits)
                .map_err(|e| e.at_step(5))?
                .language;
            let locals = h.groups[j]
                .iter()
                .map(|&i| {
                    let local = h.local_events(i, j);
                    let pik = ops::project(&h.specification, &local, limits)?;
                    let plant = ops::sync_product(&h.subsystems[i], &sup_kj, limits)?;
                    Ok(sup_cn(&pik, &plant, &ctx_on(h, &local), limits)?.language)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.at_step(6))?;
            Ok((sup_kj, locals))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_group.into_iter().unzip())
}

/// Step 7: `~supCN_{k_j} = ∩_{i∈I_j} supCN(P_{k_j}(supCN_{i+k_j}), L(G_{k_j}))`.
pub fn compute_aposteriori_low(
    h: &Hierarchy,
    j: usize,
    locals: &[Generator],
    limits: &Limits,
) -> Result<Generator> {
    let a_kj = &h.group_alphabets[j];
    let ctx = ctx_on(h, a_kj);
    let terms = locals
        .iter()
        .map(|s| {
            let p = ops::project(s, a_kj, limits)?;
            Ok(sup_cn(&p, &h.group_coordinators[j], &ctx, limits)?.language)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ops::trim(&ops::intersection_all(&terms, limits)?))
}

/// Step 9: `~supCN_k = ∩_j supCN(P_k(M_j), L(G_k))` for the group
/// supervisors `M_j`.
pub fn compute_aposteriori_high(h: &Hierarchy, group_languages: &[Generator], limits: &Limits) -> Result<Generator> {
    let ctx = ctx_on(h, &h.high_alphabet);
    let terms = group_languages
        .par_iter()
        .map(|m| {
            let p = ops::project(m, &h.high_alphabet, limits)?;
            Ok(sup_cn(&p, &h.high_coordinator, &ctx, limits)?.language)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ops::trim(&ops::intersection_all(&terms, limits)?))
}

/// Checks controllability and normality of every `P_{k_j}(supCN_{i+k_j})`
/// with respect to `L(G_{k_j})` and of every `P_k(∥_{i∈I_j} supCN_{i+k_j})`
/// with respect to `L(G_k)`.
pub fn check_distribution_conditions(
    h: &Hierarchy,
    locals: &[Vec<Generator>],
    limits: &Limits,
) -> Result<ConditionReport> {
    let mut low = Vec::new();
    let mut high = Vec::new();
    for (j, group) in h.groups.iter().enumerate() {
        let a_kj = &h.group_alphabets[j];
        for (pos, &i) in group.iter().enumerate() {
            let p = ops::project(&locals[j][pos], a_kj, limits)?;
            let g = &h.group_coordinators[j];
            low.push(LowCondition {
                group: j + 1,
                subsystem: i + 1,
                controllable: props::is_controllable(&p, g, &h.uncontrollable_in(a_kj))?,
                normal: props::is_normal(&p, g, &h.observable_in(a_kj), limits)?,
            });
        }
        let product = ops::product_all(&locals[j], limits)?;
        let p = ops::project(&product, &h.high_alphabet, limits)?;
        let g = &h.high_coordinator;
        high.push(HighCondition {
            group: j + 1,
            controllable: props::is_controllable(&p, g, &h.uncontrollable_in(&h.high_alphabet))?,
            normal: props::is_normal(&p, g, &h.observable_in(&h.high_alphabet), limits)?,
        });
    }
    let all_hold = low.iter().all(|c| c.controllable.holds && c.normal.holds)
        && high.iter().all(|c| c.controllable.holds && c.normal.holds);
    Ok(ConditionReport { low, high, all_hold })
}

/// Steps 1 to 4: finalized alphabets and coordinators.
pub fn build_hierarchy(spec: &MultilevelSpec, config: &Config) -> Result<Hierarchy> {
    spec.validate()?;
    let limits = &config.limits;
    let high_alphabet = finalize_high_alphabet(spec, limits).map_err(|e| e.at_step(1))?;
    let group_alphabets = (0..spec.groups.len())
        .into_par_iter()
        .map(|j| finalize_group_alphabet(spec, j, &high_alphabet, limits))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_step(3))?;
    Hierarchy::assemble(spec, high_alphabet, group_alphabets, config.coordinator_scope, limits)
        .map_err(|e| e.at_step(4))
}

/// Nonblocking, with the empty marked language counted as nonblocking: no
/// supervisor can remove the empty word, so an empty closed loop is the
/// degenerate but correct outcome.
pub fn nonblocking_or_empty(g: &Generator) -> bool {
    g.is_marked_empty() || g.is_nonblocking()
}

fn summary(name: &str, g: &Generator) -> ArtifactSummary {
    ArtifactSummary {
        name: format!("{name}.json"),
        states: g.num_states(),
        transitions: g.num_transitions(),
        empty: g.is_marked_empty(),
    }
}

fn internal(step: usize, message: String) -> Error {
    Error::Internal(message).at_step(step)
}

/// Runs all eleven steps. Any failure is reported with its step number.
pub fn run_combined_procedure(spec: &MultilevelSpec, config: &Config) -> Result<PipelineArtifacts> {
    let limits = &config.limits;
    let mut clock = Instant::now();
    let mut step_durations = Vec::new();
    let mut lap = |step: usize| {
        step_durations.push((step, clock.elapsed()));
        clock = Instant::now();
    };
    let h = build_hierarchy(spec, config)?;

    let decomposability = h.is_3level_cd(limits).map_err(|e| e.at_step(4))?;
    if !decomposability.holds {
        return Err(Error::Precondition(format!(
            "specification is not three-level conditionally decomposable ({}): {:?}",
            decomposability.clause.as_deref().unwrap_or("?"),
            decomposability.witness
        ))
        .at_step(4));
    }
    let coordinator_consistency = match config.coordinator_scope {
        CoordinatorScope::GroupOnly => None,
        CoordinatorScope::AllSubsystems => {
            for g in &h.group_coordinators {
                let both = ops::sync_product(&h.high_coordinator, g, limits).map_err(|e| e.at_step(4))?;
                if !ops::language_equal(&both, g).map_err(|e| e.at_step(4))? {
                    return Err(internal(4, "high-level coordinator restricts a group coordinator".into()));
                }
            }
            Some(true)
        }
    };

    lap(4);
    let (group_supervisors, local_supervisors) = compute_group_supervisors(&h, limits)?;
    for (j, locals) in local_supervisors.iter().enumerate() {
        for s in locals {
            let p = ops::project(s, &h.group_alphabets[j], limits).map_err(|e| e.at_step(6))?;
            if let Some(w) = ops::subset_witness(&p, &group_supervisors[j]) {
                return Err(internal(
                    6,
                    format!("local supervisor leaves its group supervisor in group {}: {w}", j + 1),
                ));
            }
        }
    }

    lap(6);
    let conditions = check_distribution_conditions(&h, &local_supervisors, limits).map_err(|e| e.at_step(7))?;
    if config.strict_conditions && !conditions.all_hold {
        return Err(Error::Precondition(
            "distribution conditions do not hold and strict mode forbids a posteriori supervisors".into(),
        )
        .at_step(7));
    }
    let apost_low = (0..h.groups.len())
        .into_par_iter()
        .map(|j| compute_aposteriori_low(&h, j, &local_supervisors[j], limits))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_step(7))?;

    lap(7);
    // Step 8, per group.
    let step8 = (0..h.groups.len())
        .into_par_iter()
        .map(|j| {
            let restricted = local_supervisors[j]
                .iter()
                .map(|s| Ok(ops::trim(&ops::sync_product(s, &apost_low[j], limits)?)))
                .collect::<Result<Vec<_>>>()?;
            let seed = h.alphabet.restrict(&h.group_alphabets[j])?;
            let (nb, verdict) = supervised_nonblocking_coordinator(&restricted, &seed, &h.context, limits)?;
            let mut parts = restricted.clone();
            parts.push(nb.coordinator.clone());
            let n_j = ops::product_all(&parts, limits)?;
            if !nonblocking_or_empty(&n_j) {
                return Err(Error::Internal(format!("group {} closed loop blocks", j + 1)));
            }
            Ok((restricted, nb, verdict, ops::trim(&n_j)))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_step(8))?;
    let mut restricted_local = Vec::new();
    let mut group_nb = Vec::new();
    let mut group_verdicts = Vec::new();
    let mut group_closed_loops = Vec::new();
    for (r, nb, v, n) in step8 {
        restricted_local.push(r);
        group_nb.push(nb);
        group_verdicts.push(v);
        group_closed_loops.push(n);
    }

    lap(8);
    let group_languages = restricted_local
        .iter()
        .map(|r| ops::product_all(r, limits))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_step(9))?;
    let apost_high = compute_aposteriori_high(&h, &group_languages, limits).map_err(|e| e.at_step(9))?;

    lap(9);
    let mut operands = group_closed_loops.clone();
    operands.push(apost_high.clone());
    let high_seed = h.alphabet.restrict(&h.high_alphabet).map_err(|e| e.at_step(10))?;
    let (high_nb, high_verdict) =
        supervised_nonblocking_coordinator(&operands, &high_seed, &h.context, limits).map_err(|e| e.at_step(10))?;

    lap(10);
    operands.push(high_nb.coordinator.clone());
    let product = ops::product_all(&operands, limits).map_err(|e| e.at_step(11))?;
    let final_nonblocking = nonblocking_or_empty(&product);
    if !final_nonblocking {
        return Err(internal(11, "final closed loop blocks".into()));
    }
    let closed_loop = ops::trim(&product);
    if let Some(w) = ops::subset_witness(&closed_loop, &h.specification) {
        return Err(internal(11, format!("final closed loop leaves the specification: {w}")));
    }

    lap(11);
    let groups = h
        .groups
        .iter()
        .enumerate()
        .map(|(j, members)| GroupReport {
            group: j + 1,
            subsystems: members.iter().map(|i| i + 1).collect(),
            coordinator_alphabet: h.group_alphabets[j].clone(),
            nonblocking_alphabet: group_nb[j].alphabet.clone(),
            nonconflicting: group_verdicts[j].clone(),
            coordinator_neutral: group_nb[j].neutral,
        })
        .collect();
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        config: *config,
        specification_prefix_closed: ops::is_prefix_closed(&h.specification),
        high_alphabet: h.high_alphabet.clone(),
        high_nonblocking_alphabet: high_nb.alphabet.clone(),
        coordinator_consistency,
        decomposability,
        groups,
        conditions,
        high_nonconflicting: high_verdict,
        high_coordinator_neutral: high_nb.neutral,
        final_nonblocking,
        final_within_specification: true,
        artifacts: Vec::new(),
    };
    let mut arts = PipelineArtifacts {
        hierarchy: h,
        group_supervisors,
        local_supervisors,
        apost_low,
        restricted_local,
        group_nb,
        group_closed_loops,
        apost_high,
        high_nb,
        closed_loop,
        report,
        step_durations,
    };
    arts.report.artifacts = arts.named().iter().map(|(n, g)| summary(n, g)).collect();
    Ok(arts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{event_set, Event, Word};

    fn w(s: &str) -> Word {
        Word(s.chars().map(|c| c.to_string()).collect())
    }

    fn alph(names: &str) -> Alphabet {
        Alphabet::from_names(names.chars().map(String::from)).unwrap()
    }

    fn closed(a: &Alphabet, words: &[&str]) -> Generator {
        Generator::closed_from_words(a.clone(), words.iter().map(|s| w(s))).unwrap()
    }

    fn marked(a: &Alphabet, words: &[&str]) -> Generator {
        Generator::from_words(a.clone(), words.iter().map(|s| w(s))).unwrap()
    }

    /// Two groups of two cyclic machines, linked inside each group by a
    /// shared event and across groups by `z`.
    fn cyclic_spec(closed_spec: bool) -> MultilevelSpec {
        let a = Alphabet::new(vec![
            Event::new("a"),
            Event::new("b"),
            Event::new("c"),
            Event::new("d"),
            Event::new("x"),
            Event::new("y"),
            Event::new("z"),
            Event::new("u").uncontrollable(),
        ])
        .unwrap();
        let cycle = |names: &str, word: &str| {
            let sub = a.restrict(&names.chars().map(String::from).collect()).unwrap();
            let n = word.len();
            let chars: Vec<String> = word.chars().map(String::from).collect();
            let transitions: Vec<(usize, &str, usize)> =
                (0..n).map(|q| (q, chars[q].as_str(), (q + 1) % n)).collect();
            Generator::new(sub, n, 0, 0..n, transitions).unwrap().canonical()
        };
        let subsystems = vec![
            cycle("axz", "axz"),
            cycle("bux", "xbu"),
            cycle("cyz", "cyz"),
            cycle("dy", "yd"),
        ];
        let lim = Limits::default();
        let plant = ops::product_all(&subsystems, &lim).unwrap();
        // Forbid two `a` in a row without an intermediate `b`.
        let spec_gen = {
            let names: Vec<String> = a.names().into_iter().collect();
            let mut t = Vec::new();
            for n in &names {
                let n = n.as_str();
                t.push((0, n, if n == "a" { 1 } else { 0 }));
                if n != "a" {
                    t.push((1, n, if n == "b" { 0 } else { 1 }));
                }
            }
            let marks: Vec<usize> = if closed_spec { vec![0, 1] } else { vec![0] };
            Generator::new(a.clone(), 2, 0, marks, t).unwrap()
        };
        let k = ops::intersection(&spec_gen, &plant, &lim).unwrap();
        MultilevelSpec::new(subsystems, vec![vec![0, 1], vec![2, 3]], k, None, None, true).unwrap()
    }

    #[test]
    fn nonblocking_coordinator_for_conflicting_pair() {
        let lim = Limits::default();
        let a = alph("a");
        let plants = [marked(&a, &["a"]), marked(&a, &[""])];
        let nb = build_nonblocking_coordinator(&plants, &EventSet::new(), &lim).unwrap();
        let mut all = plants.to_vec();
        all.push(nb.coordinator.clone());
        let product = ops::product_all(&all, &lim).unwrap();
        assert!(product.is_marked_empty());
        assert!(nonblocking_or_empty(&product));
    }

    #[test]
    fn nonblocking_coordinator_restores_nonblocking() {
        let lim = Limits::default();
        // Each plant may commit to its private event before the shared
        // `s`; marking requires both to finish.
        let p1 = marked(&alph("as"), &["as", "s"]);
        let p1 = ops::intersection(&p1, &marked(&alph("as"), &["as", "sa"]).mark_all(), &lim).unwrap();
        let p2 = marked(&alph("bs"), &["sb"]);
        let plants = [p1.clone(), p2.clone()];
        let nb = build_nonblocking_coordinator(&plants, &EventSet::new(), &lim).unwrap();
        let mut all = plants.to_vec();
        all.push(nb.coordinator);
        let product = ops::product_all(&all, &lim).unwrap();
        assert!(product.is_nonblocking());
        assert_eq!(ops::trim(&product), product);
    }

    #[test]
    fn nonconflicting_plants_get_a_neutral_coordinator() {
        let lim = Limits::default();
        let plants = [closed(&alph("as"), &["as"]), closed(&alph("bs"), &["sb"])];
        let nb = build_nonblocking_coordinator(&plants, &EventSet::new(), &lim).unwrap();
        let plain = ops::product_all(&plants, &lim).unwrap();
        let mut all = plants.to_vec();
        all.push(nb.coordinator);
        let with = ops::product_all(&all, &lim).unwrap();
        assert!(ops::language_equal(&plain, &with).unwrap());
        let single = build_nonblocking_coordinator(&plants[..1], &EventSet::new(), &lim).unwrap();
        assert_eq!(single.alphabet, EventSet::new());
    }

    #[test]
    fn prefix_closed_run() {
        let spec = cyclic_spec(true);
        let config = Config::default();
        let arts = run_combined_procedure(&spec, &config).unwrap();
        let lim = config.limits;
        let h = &arts.hierarchy;
        assert!(h.is_3level_cc(&arts.closed_loop, &lim).unwrap().holds);
        assert!(h.is_3level_cn(&arts.closed_loop, &lim).unwrap().holds);
        assert!(arts.report.groups.iter().all(|g| g.coordinator_neutral));
        assert!(arts.report.high_coordinator_neutral);
        assert!(ops::is_prefix_closed(&arts.closed_loop));
        assert!(!arts.closed_loop.is_marked_empty());
        for (j, locals) in arts.local_supervisors.iter().enumerate() {
            // Distributed and joint forms of the a posteriori supervisor.
            let joint = ops::product_all(locals, &lim).unwrap();
            let p = ops::project(&joint, &h.group_alphabets[j], &lim).unwrap();
            let ctx = h.context.restrict(&h.group_alphabets[j]);
            let direct = sup_cn(&p, &h.group_coordinators[j], &ctx, &lim).unwrap().language;
            assert!(ops::is_subset(&arts.apost_low[j], &direct).unwrap().is_none());
        }
    }

    #[test]
    fn plant_specification_is_left_alone() {
        let mut spec = cyclic_spec(true);
        let lim = Limits::default();
        spec.specification = ops::product_all(&spec.subsystems, &lim).unwrap();
        let arts = run_combined_procedure(&spec, &Config::default()).unwrap();
        assert!(ops::language_equal(&arts.closed_loop, &spec.specification).unwrap());
        assert!(arts.report.conditions.all_hold);
    }

    #[test]
    fn empty_specification_gives_empty_artifacts() {
        let mut spec = cyclic_spec(true);
        spec.specification = Generator::empty(spec.alphabet().unwrap());
        let arts = run_combined_procedure(&spec, &Config::default()).unwrap();
        assert!(arts.closed_loop.is_marked_empty());
        assert!(arts.local_supervisors.iter().flatten().all(Generator::is_marked_empty));
        assert!(arts.report.conditions.all_hold);
    }

    #[test]
    fn marked_specification_run_is_safe_and_nonblocking() {
        let spec = cyclic_spec(false);
        let arts = run_combined_procedure(&spec, &Config::default()).unwrap();
        let lim = Limits::default();
        assert!(ops::is_subset(&arts.closed_loop, &spec.specification).unwrap().is_none());
        assert!(arts.closed_loop.is_nonblocking());
        assert!(arts.report.final_nonblocking);
        let names: Vec<String> = arts.named().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.first().map(String::as_str), Some("coordinator_k"));
        assert_eq!(names.last().map(String::as_str), Some("final"));
        assert!(names.contains(&"supcn_3_k2".to_string()));
        let _ = lim;
    }

    #[test]
    fn strict_mode_rejects_unmet_conditions() {
        let spec = cyclic_spec(true);
        let lenient = run_combined_procedure(&spec, &Config::default()).unwrap();
        let strict = Config {
            strict_conditions: true,
            ..Config::default()
        };
        let result = run_combined_procedure(&spec, &strict);
        if lenient.report.conditions.all_hold {
            assert!(result.is_ok());
        } else {
            let err = result.unwrap_err();
            assert!(matches!(err, Error::Step { step: 7, ref source } if matches!(**source, Error::Precondition(_))));
        }
    }

    #[test]
    fn group_only_scope_skips_consistency() {
        let spec = cyclic_spec(true);
        let config = Config {
            coordinator_scope: CoordinatorScope::GroupOnly,
            ..Config::default()
        };
        let arts = run_combined_procedure(&spec, &config).unwrap();
        assert_eq!(arts.report.coordinator_consistency, None);
    }

    #[test]
    fn undecomposable_fixed_alphabets_are_a_precondition_failure() {
        let lim = Limits::default();
        // The order of the private events `a` and `b` is invisible to `c`.
        let g1 = closed(&alph("ac"), &["ac"]);
        let g2 = closed(&alph("bc"), &["bc"]);
        let k = closed(&alph("abc"), &["ab"]);
        let spec = MultilevelSpec::new(
            vec![g1, g2],
            vec![vec![0], vec![1]],
            k,
            Some(event_set(["c"])),
            Some(vec![event_set(["c"]), event_set(["c"])]),
            false,
        )
        .unwrap();
        let err = run_combined_procedure(&spec, &Config::default()).unwrap_err();
        assert!(matches!(err, Error::Step { step: 4, .. }));
        let _ = lim;
    }
}
