//! Language operations on generators: synchronous product, natural
//! projection and its inverse, trimming, closure, boolean operations and
//! comparison with shortest witnesses.
//!
//! Every generator returned here is in canonical form.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use crate::alphabet::{merge_all, Alphabet, EventSet, Word};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::generator::Generator;

const NONE: u32 = u32::MAX;

pub(crate) fn same_alphabet(g1: &Generator, g2: &Generator) -> Result<()> {
    if g1.alphabet() == g2.alphabet() {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch(format!(
            "{:?} vs {:?}",
            g1.alphabet().names(),
            g2.alphabet().names()
        )))
    }
}

/// Breadth-first exploration of a product-like state space. `key` values are
/// numbered in discovery order; `step` yields the successor key of a state
/// on each event of the result alphabet (or `None`).
fn explore<K, S>(
    alphabet: Alphabet,
    start: K,
    limits: &Limits,
    mut is_marked: impl FnMut(&K) -> bool,
    mut step: S,
) -> Result<Generator>
where
    K: std::hash::Hash + Eq + Clone,
    S: FnMut(&K, usize) -> Option<K>,
{
    let k = alphabet.len();
    let mut index: HashMap<K, u32> = HashMap::new();
    let mut states: Vec<K> = Vec::new();
    index.insert(start.clone(), 0);
    states.push(start);
    let mut marked = Vec::new();
    let mut table: Vec<u32> = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let key = states[cursor].clone();
        marked.push(is_marked(&key));
        for e in 0..k {
            let t = match step(&key, e) {
                None => NONE,
                Some(next) => match index.entry(next) {
                    Entry::Occupied(o) => *o.get(),
                    Entry::Vacant(v) => {
                        let id = states.len() as u32;
                        states.push(v.key().clone());
                        v.insert(id);
                        limits.check_states(states.len())?;
                        id
                    }
                },
            };
            table.push(t);
        }
        cursor += 1;
    }
    Ok(Generator::from_parts(alphabet, 0, marked, table).canonical())
}

/// Synchronous product `G1 ∥ G2` over the union alphabet. Shared events
/// synchronize, private events interleave.
pub fn sync_product(g1: &Generator, g2: &Generator, limits: &Limits) -> Result<Generator> {
    let alphabet = g1.alphabet().merge(g2.alphabet())?;
    let map1: Vec<Option<usize>> = alphabet
        .events()
        .iter()
        .map(|e| g1.alphabet().index_of(&e.name))
        .collect();
    let map2: Vec<Option<usize>> = alphabet
        .events()
        .iter()
        .map(|e| g2.alphabet().index_of(&e.name))
        .collect();
    explore(
        alphabet,
        (g1.initial(), g2.initial()),
        limits,
        |&(p, q)| g1.is_marked(p) && g2.is_marked(q),
        |&(p, q), e| {
            let p2 = match map1[e] {
                Some(i) => g1.next(p, i)?,
                None => p,
            };
            let q2 = match map2[e] {
                Some(i) => g2.next(q, i)?,
                None => q,
            };
            Some((p2, q2))
        },
    )
}

/// Product of a nonempty list of generators, folded left to right.
pub fn product_all<'a, I>(gs: I, limits: &Limits) -> Result<Generator>
where
    I: IntoIterator<Item = &'a Generator>,
{
    let mut it = gs.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::Precondition("product of an empty list".into()))?;
    it.try_fold(first.canonical(), |acc, g| sync_product(&acc, g, limits))
}

/// Natural projection onto `target`: erases the other events, then
/// determinizes by subset construction and minimizes.
pub fn project(g: &Generator, target: &EventSet, limits: &Limits) -> Result<Generator> {
    let sub = g.alphabet().restrict(target).map_err(|e| match e {
        Error::UnknownEvent(n) => {
            Error::AlphabetMismatch(format!("projection target event `{n}` not in alphabet"))
        }
        other => other,
    })?;
    if sub.len() == g.alphabet().len() {
        return Ok(g.canonical());
    }
    let visible: Vec<usize> = sub
        .events()
        .iter()
        .map(|e| g.alphabet().index_of(&e.name).expect("restricted"))
        .collect();
    let silent: Vec<usize> = (0..g.alphabet().len())
        .filter(|e| !target.contains(&g.alphabet().event(*e).name))
        .collect();

    let close = |seed: Vec<u32>| -> Vec<u32> {
        let mut seen = vec![false; g.num_states()];
        let mut stack = seed;
        let mut out = Vec::new();
        for &q in &stack {
            seen[q as usize] = true;
        }
        while let Some(q) = stack.pop() {
            out.push(q);
            for &e in &silent {
                if let Some(t) = g.next(q as usize, e) {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t as u32);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    };

    let start = close(vec![g.initial() as u32]);
    explore(
        sub,
        start,
        limits,
        |set: &Vec<u32>| set.iter().any(|&q| g.is_marked(q as usize)),
        |set, e| {
            let ev = visible[e];
            let mut seed: Vec<u32> = set
                .iter()
                .filter_map(|&q| g.next(q as usize, ev).map(|t| t as u32))
                .collect();
            if seed.is_empty() {
                return None;
            }
            seed.sort_unstable();
            seed.dedup();
            Some(close(seed))
        },
    )
}

/// Inverse projection: self-loops on every event of `super_alphabet` that is
/// not in `g`'s alphabet.
pub fn lift(g: &Generator, super_alphabet: &Alphabet) -> Result<Generator> {
    let merged = super_alphabet.merge(g.alphabet())?;
    if merged.len() != super_alphabet.len() {
        return Err(Error::AlphabetMismatch(format!(
            "lift target {:?} does not contain {:?}",
            super_alphabet.names(),
            g.alphabet().names()
        )));
    }
    let k = super_alphabet.len();
    let map: Vec<Option<usize>> = super_alphabet
        .events()
        .iter()
        .map(|e| g.alphabet().index_of(&e.name))
        .collect();
    let mut table = Vec::with_capacity(g.num_states() * k);
    for q in 0..g.num_states() {
        for m in &map {
            table.push(match m {
                Some(i) => g.next(q, *i).map_or(NONE, |t| t as u32),
                None => q as u32,
            });
        }
    }
    let marked = (0..g.num_states()).map(|q| g.is_marked(q)).collect();
    Ok(Generator::from_parts(super_alphabet.clone(), g.initial(), marked, table).canonical())
}

/// Reachable and coreachable part. `L(trim(G)) = cl(L_m(G))`.
pub fn trim(g: &Generator) -> Generator {
    let reach = g.reachable();
    let co = g.coreachable();
    let keep: Vec<bool> = reach.iter().zip(&co).map(|(r, c)| *r && *c).collect();
    g.restrict_to(&keep).canonical()
}

/// Generator whose marked language is `cl(L_m(G))`.
pub fn prefix_closure(g: &Generator) -> Generator {
    let t = trim(g);
    if t.is_marked_empty() {
        t
    } else {
        t.mark_all()
    }
}

pub fn is_prefix_closed(g: &Generator) -> bool {
    language_equal_unchecked(&prefix_closure(g), g)
}

/// `L_m = A* \ L_m(G)`, `L = A*`.
pub fn complement(g: &Generator) -> Generator {
    let k = g.alphabet().len();
    let n = g.num_states();
    let sink = n as u32;
    let mut table = Vec::with_capacity((n + 1) * k);
    for q in 0..n {
        for e in 0..k {
            table.push(g.next(q, e).map_or(sink, |t| t as u32));
        }
    }
    table.extend(std::iter::repeat_n(sink, k));
    let mut marked: Vec<bool> = (0..n).map(|q| !g.is_marked(q)).collect();
    marked.push(true);
    Generator::from_parts(g.alphabet().clone(), g.initial(), marked, table).canonical()
}

/// Same-alphabet intersection of both languages.
pub fn intersection(g1: &Generator, g2: &Generator, limits: &Limits) -> Result<Generator> {
    same_alphabet(g1, g2)?;
    sync_product(g1, g2, limits)
}

/// Same-alphabet union of both languages.
pub fn union(g1: &Generator, g2: &Generator, limits: &Limits) -> Result<Generator> {
    same_alphabet(g1, g2)?;
    explore(
        g1.alphabet().clone(),
        (Some(g1.initial()), Some(g2.initial())),
        limits,
        |&(p, q)| p.is_some_and(|p| g1.is_marked(p)) || q.is_some_and(|q| g2.is_marked(q)),
        |&(p, q), e| {
            let p2 = p.and_then(|p| g1.next(p, e));
            let q2 = q.and_then(|q| g2.next(q, e));
            (p2.is_some() || q2.is_some()).then_some((p2, q2))
        },
    )
}

/// `L_m = L_m(G1) \ L_m(G2)`, `L = L(G1)`.
pub fn difference(g1: &Generator, g2: &Generator, limits: &Limits) -> Result<Generator> {
    same_alphabet(g1, g2)?;
    explore(
        g1.alphabet().clone(),
        (g1.initial(), Some(g2.initial())),
        limits,
        |&(p, q)| g1.is_marked(p) && !q.is_some_and(|q| g2.is_marked(q)),
        |&(p, q), e| Some((g1.next(p, e)?, q.and_then(|q| g2.next(q, e)))),
    )
}

/// `L_m(G) · A*`: every word having a prefix in `L_m(G)`.
pub fn suffix_extension(g: &Generator) -> Generator {
    let k = g.alphabet().len();
    let n = g.num_states();
    let all = n as u32;
    if g.is_marked(g.initial()) {
        return Generator::universal(g.alphabet().clone());
    }
    let mut table = Vec::with_capacity((n + 1) * k);
    for q in 0..n {
        for e in 0..k {
            table.push(match g.next(q, e) {
                Some(t) if g.is_marked(t) => all,
                Some(t) => t as u32,
                None => NONE,
            });
        }
    }
    table.extend(std::iter::repeat_n(all, k));
    let mut marked = vec![false; n];
    marked.push(true);
    Generator::from_parts(g.alphabet().clone(), g.initial(), marked, table).canonical()
}

/// Decides `L_m(G1) ⊆ L_m(G2)`. On failure returns the shortest (then
/// lexicographically least) word of `L_m(G1) \ L_m(G2)`.
pub fn is_subset(g1: &Generator, g2: &Generator) -> Result<Option<Word>> {
    same_alphabet(g1, g2)?;
    Ok(subset_witness(g1, g2))
}

pub(crate) fn subset_witness(g1: &Generator, g2: &Generator) -> Option<Word> {
    let k = g1.alphabet().len();
    let mut index: HashMap<(usize, Option<usize>), usize> = HashMap::new();
    let mut parent: Vec<Option<(usize, usize)>> = Vec::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    let start = (g1.initial(), Some(g2.initial()));
    index.insert(start, 0);
    states.push(start);
    parent.push(None);
    queue.push_back(0);
    while let Some(id) = queue.pop_front() {
        let (p, q) = states[id];
        if g1.is_marked(p) && !q.is_some_and(|q| g2.is_marked(q)) {
            let mut events = Vec::new();
            let mut cur = id;
            while let Some((prev, e)) = parent[cur] {
                events.push(g1.alphabet().event(e).name.clone());
                cur = prev;
            }
            events.reverse();
            return Some(Word(events));
        }
        for e in 0..k {
            if let Some(p2) = g1.next(p, e) {
                let key = (p2, q.and_then(|q| g2.next(q, e)));
                if let Entry::Vacant(v) = index.entry(key) {
                    v.insert(states.len());
                    states.push(key);
                    parent.push(Some((id, e)));
                    queue.push_back(states.len() - 1);
                }
            }
        }
    }
    None
}

/// Decides `L_m(G1) = L_m(G2)` by comparing canonical trimmed forms.
pub fn language_equal(g1: &Generator, g2: &Generator) -> Result<bool> {
    same_alphabet(g1, g2)?;
    Ok(language_equal_unchecked(g1, g2))
}

pub(crate) fn language_equal_unchecked(g1: &Generator, g2: &Generator) -> bool {
    trim(g1) == trim(g2)
}

/// Same-alphabet intersection of a nonempty list.
pub fn intersection_all<'a, I>(gs: I, limits: &Limits) -> Result<Generator>
where
    I: IntoIterator<Item = &'a Generator>,
{
    let gs: Vec<&Generator> = gs.into_iter().collect();
    if let Some(first) = gs.first() {
        for g in &gs[1..] {
            same_alphabet(first, g)?;
        }
    }
    product_all(gs, limits)
}

/// Union alphabet of a list of generators.
pub fn union_alphabet<'a, I>(gs: I) -> Result<Alphabet>
where
    I: IntoIterator<Item = &'a Generator>,
{
    merge_all(gs.into_iter().map(Generator::alphabet))
}
