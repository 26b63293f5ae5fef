//! Independent checks and random instances.
//!
//! The supremal oracle works on explicit finite word sets with its own
//! closure, projection and membership code, so a bug in the automaton
//! operations cannot validate itself. The maximality check replays the
//! three-level definitions on one-word enlargements of a candidate.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Event, EventSet, Word};
use crate::config::Limits;
use crate::coordination::{Hierarchy, MultilevelSpec};
use crate::error::{Error, Result};
use crate::generator::{Generator, StateId};
use crate::ops;
use crate::props::{ControlContext, Verdict, Witness};

/// Result of a bounded check: a decision, or a bound that was hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome<T> {
    Decided { value: T },
    Inconclusive { reason: String },
}

impl<T> Outcome<T> {
    pub fn decided(self) -> Option<T> {
        match self {
            Outcome::Decided { value } => Some(value),
            Outcome::Inconclusive { .. } => None,
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Outcome::Inconclusive { .. })
    }
}

fn inconclusive<T>(reason: impl Into<String>) -> Outcome<T> {
    Outcome::Inconclusive { reason: reason.into() }
}

/// Deterministic random source for instances.
pub struct Sampler {
    rng: ChaCha8Rng,
}

/// How a random generator marks its states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marking {
    All,
    /// Each state independently with probability one half; at least one.
    Random,
    /// The initial state, and every other state with probability one half.
    RandomWithInitial,
}

fn event_name(i: usize) -> String {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    if i < letters.len() {
        (letters[i] as char).to_string()
    } else {
        format!("e{i}")
    }
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.gen_range(lo..=hi_inclusive)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    /// Events `a, b, c, ...` with random attributes.
    pub fn alphabet(&mut self, size: usize, uncontrollable: f64, unobservable: f64) -> Result<Alphabet> {
        let events = (0..size)
            .map(|i| {
                let mut e = Event::new(event_name(i));
                if self.chance(uncontrollable) {
                    e = e.uncontrollable();
                }
                if self.chance(unobservable) {
                    e = e.unobservable();
                }
                e
            })
            .collect();
        Alphabet::new(events)
    }

    /// Each event of `events` independently with probability `p`.
    pub fn subset(&mut self, events: &EventSet, p: f64) -> EventSet {
        events.iter().filter(|_| self.chance(p)).cloned().collect()
    }

    fn marks(&mut self, n: usize, marking: Marking) -> Vec<StateId> {
        match marking {
            Marking::All => (0..n).collect(),
            Marking::Random => {
                let mut m: Vec<StateId> = (0..n).filter(|_| self.chance(0.5)).collect();
                if m.is_empty() {
                    m.push(self.range(0, n - 1));
                }
                m
            }
            Marking::RandomWithInitial => std::iter::once(0).chain((1..n).filter(|_| self.chance(0.5))).collect(),
        }
    }

    /// Random generator with `1..=max_states` states; each `(state, event)`
    /// slot gets a transition with probability `density`.
    pub fn generator(&mut self, alphabet: &Alphabet, max_states: usize, density: f64, marking: Marking) -> Result<Generator> {
        let n = self.range(1, max_states.max(1));
        let names: Vec<String> = alphabet.names().into_iter().collect();
        let mut transitions = Vec::new();
        for q in 0..n {
            for e in &names {
                if self.chance(density) {
                    transitions.push((q, e.as_str(), self.range(0, n - 1)));
                }
            }
        }
        let marked = self.marks(n, marking);
        Ok(Generator::new(alphabet.clone(), n, 0, marked, transitions)?.canonical())
    }

    /// Random generator whose transitions only go to higher states, so its
    /// words are no longer than `max_states - 1`.
    pub fn acyclic_generator(&mut self, alphabet: &Alphabet, max_states: usize, density: f64, marking: Marking) -> Result<Generator> {
        let n = self.range(1, max_states.max(1));
        let names: Vec<String> = alphabet.names().into_iter().collect();
        let mut transitions = Vec::new();
        for q in 0..n.saturating_sub(1) {
            for e in &names {
                if self.chance(density) {
                    transitions.push((q, e.as_str(), self.range(q + 1, n - 1)));
                }
            }
        }
        let marked = self.marks(n, marking);
        Ok(Generator::new(alphabet.clone(), n, 0, marked, transitions)?.canonical())
    }

    /// Keeps each transition of `g` with probability `1 - prune`; with
    /// `Marking::Random` each marked state stays marked with probability
    /// one half. The result is trimmed, so its marked language is a subset
    /// of that of `g`.
    pub fn prune(&mut self, g: &Generator, prune: f64, marking: Marking) -> Result<Generator> {
        let a = g.alphabet();
        let transitions: Vec<(StateId, &str, StateId)> = g
            .transitions()
            .filter(|_| !self.chance(prune))
            .map(|(q, e, t)| (q, a.event(e).name.as_str(), t))
            .collect();
        let marked: Vec<StateId> = match marking {
            Marking::All => g.marked_states().collect(),
            Marking::Random => g.marked_states().filter(|_| self.chance(0.5)).collect(),
            Marking::RandomWithInitial => g
                .marked_states()
                .filter(|&q| q == g.initial() || self.chance(0.5))
                .collect(),
        };
        let pruned = Generator::new(a.clone(), g.num_states(), g.initial(), marked, transitions)?;
        Ok(ops::trim(&pruned))
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

fn default_density() -> f64 {
    0.5
}

fn default_shared() -> f64 {
    0.5
}

fn default_prune() -> f64 {
    0.2
}

/// Parameters of [`random_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n_subsystems: usize,
    pub m_groups: usize,
    pub max_states_per_subsystem: usize,
    pub alphabet_size: usize,
    pub fraction_uncontrollable: f64,
    pub fraction_unobservable: f64,
    pub prefix_closed: bool,
    #[serde(default)]
    pub seed: u64,
    /// Probability of a transition per `(state, event)` slot.
    #[serde(default = "default_density")]
    pub transition_density: f64,
    /// Probability that an event is given to a second subsystem.
    #[serde(default = "default_shared")]
    pub fraction_shared: f64,
    /// Probability of dropping a transition of the plant when deriving the
    /// specification.
    #[serde(default = "default_prune")]
    pub prune_fraction: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            n_subsystems: 4,
            m_groups: 2,
            max_states_per_subsystem: 3,
            alphabet_size: 6,
            fraction_uncontrollable: 0.3,
            fraction_unobservable: 0.2,
            prefix_closed: true,
            seed: 0,
            transition_density: default_density(),
            fraction_shared: default_shared(),
            prune_fraction: default_prune(),
        }
    }
}

impl InstanceParams {
    pub fn with_seed(&self, seed: u64) -> Self {
        InstanceParams { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_subsystems", self.n_subsystems),
            ("m_groups", self.m_groups),
            ("max_states_per_subsystem", self.max_states_per_subsystem),
            ("alphabet_size", self.alphabet_size),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Precondition(format!("{name} must be at least 1")));
        }
        if self.m_groups > self.n_subsystems {
            return Err(Error::Precondition("more groups than subsystems".into()));
        }
        let fractions = [
            ("fraction_uncontrollable", self.fraction_uncontrollable),
            ("fraction_unobservable", self.fraction_unobservable),
            ("transition_density", self.transition_density),
            ("fraction_shared", self.fraction_shared),
            ("prune_fraction", self.prune_fraction),
        ];
        if let Some((name, _)) = fractions.iter().find(|(_, v)| !(0.0..=1.0).contains(v)) {
            return Err(Error::Precondition(format!("{name} must lie in [0, 1]")));
        }
        Ok(())
    }
}

/// Random subsystems, a random grouping, and a specification obtained by
/// pruning the plant product (and closing it when `prefix_closed`).
/// Coordinator alphabets are left to the automatic extension.
pub fn random_instance(p: &InstanceParams) -> Result<MultilevelSpec> {
    p.validate()?;
    let mut s = Sampler::new(p.seed);
    let alphabet = s.alphabet(p.alphabet_size, p.fraction_uncontrollable, p.fraction_unobservable)?;
    let names: Vec<String> = alphabet.names().into_iter().collect();
    let n = p.n_subsystems;
    let mut owned: Vec<EventSet> = vec![EventSet::new(); n];
    for (idx, e) in names.iter().enumerate() {
        let first = if idx < n { idx } else { s.range(0, n - 1) };
        owned[first].insert(e.clone());
        if n > 1 && s.chance(p.fraction_shared) {
            owned[s.range(0, n - 1)].insert(e.clone());
        }
    }
    for set in owned.iter_mut().filter(|set| set.is_empty()) {
        set.insert(names[s.range(0, names.len() - 1)].clone());
    }
    let marking = if p.prefix_closed { Marking::All } else { Marking::RandomWithInitial };
    let subsystems = owned
        .iter()
        .map(|set| {
            let sub = alphabet.restrict(set)?;
            s.generator(&sub, p.max_states_per_subsystem, p.transition_density, marking)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..n).collect();
    s.shuffle(&mut order);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); p.m_groups];
    for (pos, &i) in order.iter().enumerate() {
        let j = if pos < p.m_groups { pos } else { s.range(0, p.m_groups - 1) };
        groups[j].push(i);
    }
    groups.iter_mut().for_each(|g| g.sort_unstable());
    groups.sort();

    let plant = ops::trim(&ops::product_all(&subsystems, &Limits::default())?);
    let mut k = s.prune(&plant, p.prune_fraction, if p.prefix_closed { Marking::All } else { Marking::Random })?;
    if p.prefix_closed {
        k = ops::prefix_closure(&k);
    }
    MultilevelSpec::new(subsystems, groups, k.canonical(), None, None, true)
}

/// Parameters of [`random_triple`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleParams {
    pub max_states: usize,
    pub alphabet_size: usize,
    pub fraction_uncontrollable: f64,
    pub fraction_unobservable: f64,
    pub transition_density: f64,
}

impl Default for TripleParams {
    fn default() -> Self {
        TripleParams {
            max_states: 5,
            alphabet_size: 3,
            fraction_uncontrollable: 0.4,
            fraction_unobservable: 0.3,
            transition_density: 0.5,
        }
    }
}

/// A random `(K, L, ctx)` with a finite plant. `K` is either a pruning of
/// the plant or an unrelated random generator; both may be prefix-closed
/// or not.
pub fn random_triple(seed: u64, p: &TripleParams) -> Result<(Generator, Generator, ControlContext)> {
    let mut s = Sampler::new(seed);
    let a = s.alphabet(p.alphabet_size, p.fraction_uncontrollable, p.fraction_unobservable)?;
    let marking = if s.chance(0.5) { Marking::All } else { Marking::Random };
    let l = s.acyclic_generator(&a, p.max_states, p.transition_density, marking)?;
    let k_marking = if s.chance(0.5) { Marking::All } else { Marking::Random };
    let k = if s.chance(0.6) {
        s.prune(&l, 0.3, k_marking)?
    } else {
        s.generator(&a, p.max_states, p.transition_density, k_marking)?
    };
    Ok((k, l, ControlContext::from_alphabet(&a)))
}

/// Bounds of the explicit word-set oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBounds {
    pub max_len: usize,
    pub max_words: usize,
}

impl Default for WordBounds {
    fn default() -> Self {
        WordBounds { max_len: 4, max_words: 16 }
    }
}

type Letters = Vec<usize>;

/// States from which a marked state is reachable, computed by a backward
/// fixpoint over the raw transition function.
fn live_states(g: &Generator) -> Vec<bool> {
    let n = g.num_states();
    let k = g.alphabet().len();
    let mut live: Vec<bool> = (0..n).map(|q| g.is_marked(q)).collect();
    let mut grew = true;
    while grew {
        grew = false;
        for q in 0..n {
            if !live[q] && (0..k).any(|e| g.next(q, e).is_some_and(|t| live[t])) {
                live[q] = true;
                grew = true;
            }
        }
    }
    live
}

/// All words of `cl(L_m(g))` up to `max_len`, with their marking. `None`
/// when the closure has a word longer than `max_len`.
fn closure_words(g: &Generator, max_len: usize) -> Option<BTreeMap<Letters, bool>> {
    let live = live_states(g);
    let mut out = BTreeMap::new();
    if !live[g.initial()] {
        return Some(out);
    }
    let mut stack = vec![(Vec::new(), g.initial())];
    while let Some((w, q)) = stack.pop() {
        if w.len() > max_len {
            return None;
        }
        for e in 0..g.alphabet().len() {
            if let Some(t) = g.next(q, e) {
                if live[t] {
                    let mut w2 = w.clone();
                    w2.push(e);
                    stack.push((w2, t));
                }
            }
        }
        out.insert(w, g.is_marked(q));
    }
    Some(out)
}

fn marked_run(g: &Generator, w: &[usize]) -> bool {
    let mut q = g.initial();
    for &e in w {
        match g.next(q, e) {
            Some(t) => q = t,
            None => return false,
        }
    }
    g.is_marked(q)
}

fn to_word(a: &Alphabet, w: &[usize]) -> Word {
    Word(w.iter().map(|&e| a.event(e).name.clone()).collect())
}

/// Supremal controllable and normal sublanguage by exhaustive enumeration:
/// every subset `S` of the finite set `K ∩ L_m(L)` is tested for
/// `cl(S)·A_u ∩ cl(L) ⊆ cl(S)` and `Q^-1 Q(cl(S)) ∩ cl(L) ⊆ cl(S)` on
/// explicit words; the union of the passing subsets is returned.
///
/// Inconclusive when `cl(L_m(L))` has a word longer than `max_len` or the
/// candidate set exceeds `max_words`.
pub fn brute_force_sup_cn(k: &Generator, l: &Generator, ctx: &ControlContext, bounds: &WordBounds) -> Result<Outcome<Generator>> {
    if k.alphabet() != l.alphabet() {
        return Err(Error::AlphabetMismatch("oracle operands differ in alphabet".into()));
    }
    let a = l.alphabet();
    let Some(plant) = closure_words(l, bounds.max_len) else {
        return Ok(inconclusive(format!("plant has words longer than {}", bounds.max_len)));
    };
    let candidates: Vec<Letters> = plant
        .iter()
        .filter(|(w, m)| **m && marked_run(k, w))
        .map(|(w, _)| w.clone())
        .collect();
    if candidates.len() > bounds.max_words {
        return Ok(inconclusive(format!(
            "{} candidate words exceed the bound of {}",
            candidates.len(),
            bounds.max_words
        )));
    }

    let uncontrollable: Vec<usize> = (0..a.len()).filter(|e| ctx.uncontrollable.contains(&a.event(*e).name)).collect();
    let observe = |w: &[usize]| -> Letters {
        w.iter().copied().filter(|e| ctx.observable.contains(&a.event(*e).name)).collect()
    };

    let mut prefixes: Vec<Letters> = Vec::new();
    let mut index: HashMap<Letters, usize> = HashMap::new();
    for w in &candidates {
        for len in 0..=w.len() {
            let p = w[..len].to_vec();
            if !index.contains_key(&p) {
                index.insert(p.clone(), prefixes.len());
                prefixes.push(p);
            }
        }
    }
    if prefixes.len() > 128 {
        return Ok(inconclusive("too many prefixes"));
    }
    let bit = |p: &Letters| index.get(p).map(|&i| 1u128 << i);
    let word_masks: Vec<u128> = candidates
        .iter()
        .map(|w| (0..=w.len()).fold(0u128, |m, len| m | bit(&w[..len].to_vec()).unwrap_or(0)))
        .collect();

    // For every prefix: the prefixes it forces into the closure, or `None`
    // when it forces a word outside every candidate closure.
    let mut by_observation: HashMap<Letters, Vec<&Letters>> = HashMap::new();
    for w in plant.keys() {
        by_observation.entry(observe(w)).or_default().push(w);
    }
    let needs: Vec<Option<u128>> = prefixes
        .iter()
        .map(|p| {
            let mut forced: Vec<Letters> = uncontrollable
                .iter()
                .map(|&u| {
                    let mut pu = p.clone();
                    pu.push(u);
                    pu
                })
                .filter(|pu| plant.contains_key(pu))
                .collect();
            forced.extend(by_observation[&observe(p)].iter().map(|t| (*t).clone()));
            forced.iter().try_fold(0u128, |m, f| bit(f).map(|b| m | b))
        })
        .collect();

    let mut union = 0u32;
    for subset in 0u32..(1u32 << candidates.len()) {
        let closure = (0..candidates.len())
            .filter(|i| subset & (1 << i) != 0)
            .fold(0u128, |m, i| m | word_masks[i]);
        let ok = (0..prefixes.len())
            .filter(|i| closure & (1u128 << i) != 0)
            .all(|i| needs[i].is_some_and(|n| n & !closure == 0));
        if ok {
            union |= subset;
        }
    }
    let words = (0..candidates.len())
        .filter(|i| union & (1 << i) != 0)
        .map(|i| to_word(a, &candidates[i]));
    Ok(Outcome::Decided {
        value: Generator::from_words(a.clone(), words)?,
    })
}

/// Marked words of `g` up to `max_len`, enumerated without automaton
/// operations. `None` when `g` marks a longer word.
pub fn finite_marked_words(g: &Generator, max_len: usize) -> Option<BTreeSet<Word>> {
    let words = closure_words(g, max_len)?;
    Some(
        words
            .into_iter()
            .filter(|(_, m)| *m)
            .map(|(w, _)| to_word(g.alphabet(), &w))
            .collect(),
    )
}

/// Outcome of [`verify_3level_supremal`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SupremalVerdict {
    /// Member, and no single word of `K` can be added.
    Supremal { candidates: usize },
    /// Not a three-level conditionally controllable and normal
    /// sublanguage of `K`.
    NotAMember { verdict: Verdict },
    /// `M ∪ cl({word})` is a larger member; `word` is the first such word in
    /// depth-first lexicographic order.
    Enlargeable { word: Word },
    Inconclusive { reason: String },
}

impl SupremalVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SupremalVerdict::Supremal { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, SupremalVerdict::Inconclusive { .. })
    }
}

/// Bounds of the maximality search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalityBounds {
    /// Longest candidate word; `None` means the longest simple path of the
    /// trimmed specification automaton.
    pub max_len: Option<usize>,
    /// Most candidate words tried before giving up.
    pub max_candidates: usize,
    /// Most search nodes visited while enumerating candidates or simple
    /// paths.
    pub max_nodes: usize,
}

impl Default for MaximalityBounds {
    fn default() -> Self {
        MaximalityBounds {
            max_len: None,
            max_candidates: 200_000,
            max_nodes: 20_000_000,
        }
    }
}

/// Number of transitions on the longest path without repeated states, or
/// `None` when the search exceeds `budget` nodes.
pub fn longest_simple_path(g: &Generator, budget: usize) -> Option<usize> {
    let t = ops::trim(g);
    if t.is_marked_empty() {
        return Some(0);
    }
    let mut on_path = vec![false; t.num_states()];
    let mut visited = 0usize;
    fn walk(t: &Generator, q: StateId, on_path: &mut [bool], visited: &mut usize, budget: usize) -> Option<usize> {
        *visited += 1;
        if *visited > budget {
            return None;
        }
        on_path[q] = true;
        let mut best = 0;
        let succ: Vec<StateId> = t.successors(q).map(|(_, s)| s).collect();
        for s in succ {
            if !on_path[s] {
                best = best.max(1 + walk(t, s, on_path, visited, budget)?);
            }
        }
        on_path[q] = false;
        Some(best)
    }
    walk(&t, t.initial(), &mut on_path, &mut visited, budget)
}

/// Decides whether `m` is the supremal three-level conditionally
/// controllable and conditionally normal sublanguage of the prefix-closed
/// specification: membership by the definitions, then one-word
/// maximality over every word of `K \ M` up to the length bound. The
/// family of such sublanguages is closed under union, so a member that
/// no word can enlarge is the supremum among enlargements by one word.
pub fn verify_3level_supremal(
    m: &Generator,
    h: &Hierarchy,
    bounds: &MaximalityBounds,
    limits: &Limits,
) -> Result<SupremalVerdict> {
    let k = ops::trim(&h.specification);
    if let Some(w) = ops::is_subset(m, &k)? {
        return Ok(SupremalVerdict::NotAMember {
            verdict: Verdict::fail(Witness::Word { word: w }).in_clause("specification"),
        });
    }
    let membership = h.is_3level_ccn(m, limits)?;
    if !membership.holds {
        return Ok(SupremalVerdict::NotAMember { verdict: membership });
    }
    let max_len = match bounds.max_len {
        Some(n) => n,
        None => match longest_simple_path(&k, bounds.max_nodes) {
            Some(n) => n,
            None => {
                return Ok(SupremalVerdict::Inconclusive {
                    reason: "longest simple path search exceeded its node budget".into(),
                })
            }
        },
    };
    // Membership depends on a language only through its projections onto
    // the group and local alphabets, so words with equal projections are
    // interchangeable candidates.
    let views: Vec<Vec<bool>> = h
        .groups
        .iter()
        .enumerate()
        .flat_map(|(j, g)| {
            std::iter::once(h.group_alphabets[j].clone()).chain(g.iter().map(move |&i| h.local_events(i, j)))
        })
        .map(|set| k.alphabet().events().iter().map(|e| set.contains(&e.name)).collect())
        .collect();
    let mut tried: HashSet<Vec<Letters>> = HashSet::new();
    let mut candidates = 0usize;
    let mut nodes = 0usize;
    let mut found = None;
    let mut stack: Vec<(Letters, StateId, Option<StateId>)> = vec![(Vec::new(), k.initial(), Some(m.initial()))];
    while let Some((w, q, r)) = stack.pop() {
        nodes += 1;
        if nodes > bounds.max_nodes {
            return Ok(SupremalVerdict::Inconclusive {
                reason: format!("more than {} search nodes up to length {max_len}", bounds.max_nodes),
            });
        }
        let in_m = r.is_some_and(|r| m.is_marked(r));
        let key = || -> Vec<Letters> {
            views
                .iter()
                .map(|v| w.iter().copied().filter(|&e| v[e]).collect())
                .collect()
        };
        if k.is_marked(q) && !in_m && tried.insert(key()) {
            candidates += 1;
            if candidates > bounds.max_candidates {
                return Ok(SupremalVerdict::Inconclusive {
                    reason: format!("more than {} candidate words up to length {max_len}", bounds.max_candidates),
                });
            }
            let word = to_word(k.alphabet(), &w);
            let added = Generator::closed_from_words(k.alphabet().clone(), [word.clone()])?;
            let enlarged = ops::union(m, &added, limits)?;
            if h.is_3level_ccn(&enlarged, limits)?.holds {
                found = Some(word);
                break;
            }
        }
        if w.len() < max_len {
            let succ: Vec<(usize, StateId)> = k.successors(q).collect();
            for (e, q2) in succ.into_iter().rev() {
                let mut w2 = w.clone();
                w2.push(e);
                stack.push((w2, q2, r.and_then(|r| m.next(r, e))));
            }
        }
    }
    Ok(match found {
        Some(word) => SupremalVerdict::Enlargeable { word },
        None => SupremalVerdict::Supremal { candidates },
    })
}

/// Result of running the synthesis procedure on one random instance and
/// checking its output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceCheck {
    pub seed: u64,
    pub prefix_closed: bool,
    pub specification_states: usize,
    pub final_states: usize,
    pub final_empty: bool,
    pub final_equals_specification: bool,
    pub conditions_hold: bool,
    /// Coordinators for nonblockingness that had to restrict anything.
    pub active_nonblocking_coordinators: usize,
    pub within_specification: bool,
    pub nonblocking: bool,
    /// Maximality verdict; prefix-closed instances only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supremal: Option<SupremalVerdict>,
    /// Plain product of local supervisors equals the final closed loop;
    /// checked on prefix-closed instances whose distribution conditions
    /// hold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plain_product_equal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl InstanceCheck {
    pub fn inconclusive(&self) -> bool {
        self.supremal.as_ref().is_some_and(SupremalVerdict::is_inconclusive)
    }

    /// No violated check and no error; inconclusive maximality counts as
    /// not failed.
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.within_specification
            && self.nonblocking
            && self.plain_product_equal != Some(false)
            && self
                .supremal
                .as_ref()
                .is_none_or(|v| v.holds() || v.is_inconclusive())
    }
}

/// Generates the instance for `p.seed`, runs the synthesis procedure and
/// checks safety, nonblockingness and, for prefix-closed instances,
/// maximality and agreement with the plain product when the distribution
/// conditions hold.
pub fn check_instance(p: &InstanceParams, config: &crate::config::Config, bounds: &MaximalityBounds) -> InstanceCheck {
    let mut out = InstanceCheck {
        seed: p.seed,
        prefix_closed: p.prefix_closed,
        specification_states: 0,
        final_states: 0,
        final_empty: false,
        final_equals_specification: false,
        conditions_hold: false,
        active_nonblocking_coordinators: 0,
        within_specification: false,
        nonblocking: false,
        supremal: None,
        plain_product_equal: None,
        error: None,
    };
    if let Err(e) = fill_check(p, config, bounds, &mut out) {
        out.error = Some(e.to_string());
    }
    out
}

fn fill_check(p: &InstanceParams, config: &crate::config::Config, bounds: &MaximalityBounds, out: &mut InstanceCheck) -> Result<()> {
    let limits = &config.limits;
    let spec = random_instance(p)?;
    out.specification_states = spec.specification.num_states();
    let arts = crate::multilevel::run_combined_procedure(&spec, config)?;
    let m = &arts.closed_loop;
    out.final_states = m.num_states();
    out.final_empty = m.is_marked_empty();
    out.conditions_hold = arts.report.conditions.all_hold;
    out.active_nonblocking_coordinators =
        arts.group_nb.iter().chain([&arts.high_nb]).filter(|c| !c.neutral).count();
    out.final_equals_specification = ops::language_equal(m, &spec.specification)?;
    // Replayed here rather than read from the report.
    out.within_specification = ops::is_subset(m, &spec.specification)?.is_none();
    out.nonblocking = crate::multilevel::nonblocking_or_empty(m);
    if p.prefix_closed {
        out.supremal = Some(verify_3level_supremal(m, &arts.hierarchy, bounds, limits)?);
        if out.conditions_hold {
            let plain = arts.plain_product(limits)?;
            out.plain_product_equal = Some(ops::language_equal(&plain, m)?);
        }
    }
    Ok(())
}

/// Replays a controllability or normality witness against the raw
/// languages using only membership queries. Returns whether the witness
/// really exhibits a violation.
pub fn replay_witness(k: &Generator, l: &Generator, ctx: &ControlContext, witness: &Witness) -> Result<bool> {
    use crate::generator::Acceptance::Rejected;
    let in_closure = |g: &Generator, w: &Word| -> Result<bool> {
        if g.accepts(w)? == Rejected {
            return Ok(false);
        }
        let t = ops::trim(g);
        Ok(t.accepts(w)? != Rejected)
    };
    Ok(match witness {
        Witness::Escape { prefix, event } => {
            let mut pe = prefix.clone();
            pe.push(event.clone());
            ctx.uncontrollable.contains(event)
                && in_closure(k, prefix)?
                && in_closure(l, &pe)?
                && !in_closure(k, &pe)?
        }
        Witness::Normality { word, twin } => {
            word.project(&ctx.observable) == twin.project(&ctx.observable)
                && in_closure(l, word)?
                && in_closure(k, twin)?
                && !in_closure(k, word)?
        }
        Witness::Word { word } => in_closure(k, word)? != in_closure(l, word)?,
        Witness::Confusion { disabled, enabled, event } => {
            let mut d = disabled.clone();
            d.push(event.clone());
            let mut en = enabled.clone();
            en.push(event.clone());
            disabled.project(&ctx.observable) == enabled.project(&ctx.observable)
                && in_closure(k, disabled)?
                && in_closure(l, &d)?
                && !in_closure(k, &d)?
                && in_closure(k, &en)?
        }
        Witness::Continuation { .. } => false,
    })
}
