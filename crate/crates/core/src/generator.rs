//! Deterministic generators: finite automata with marked states.
//!
//! A generator carries two languages, the generated language `L(G)` (labels
//! of all paths from the initial state) and the marked language `L_m(G)`
//! (paths ending in a marked state). Every operation in this crate tracks
//! both. Prefix-closed behaviour is expressed by marking every state.
//!
//! States are dense indices `0..n`. The transition function is stored as a
//! row-major table indexed by `(state, event index)`, where event indices
//! follow the sorted order of the alphabet. Construction enforces
//! determinism by design of the storage: a slot holds at most one successor.

use std::collections::{HashMap, VecDeque};

use crate::alphabet::{Alphabet, Word};
use crate::error::{Error, Result};

pub type StateId = usize;

const NONE: u32 = u32::MAX;

/// Classification of a word against a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Acceptance {
    InMarked,
    InGeneratedOnly,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    alphabet: Alphabet,
    initial: u32,
    marked: Vec<bool>,
    table: Vec<u32>,
}

impl Generator {
    /// Builds a generator from explicit parts. Transitions name their event;
    /// a second transition for the same `(state, event)` pair is an error.
    pub fn new<'a, M, T>(
        alphabet: Alphabet,
        num_states: usize,
        initial: StateId,
        marked: M,
        transitions: T,
    ) -> Result<Self>
    where
        M: IntoIterator<Item = StateId>,
        T: IntoIterator<Item = (StateId, &'a str, StateId)>,
    {
        if num_states == 0 {
            return Err(Error::InvalidAutomaton("generator has no states".into()));
        }
        if num_states >= NONE as usize {
            return Err(Error::InvalidAutomaton("too many states".into()));
        }
        if initial >= num_states {
            return Err(Error::InvalidAutomaton(format!(
                "initial state {initial} out of range"
            )));
        }
        let k = alphabet.len();
        let mut g = Generator {
            alphabet,
            initial: initial as u32,
            marked: vec![false; num_states],
            table: vec![NONE; num_states * k],
        };
        for q in marked {
            if q >= num_states {
                return Err(Error::InvalidAutomaton(format!(
                    "marked state {q} out of range"
                )));
            }
            g.marked[q] = true;
        }
        for (from, event, to) in transitions {
            if from >= num_states || to >= num_states {
                return Err(Error::InvalidAutomaton(format!(
                    "transition ({from}, {event}, {to}) references an unknown state"
                )));
            }
            let e = g
                .alphabet
                .index_of(event)
                .ok_or_else(|| Error::UnknownEvent(event.to_string()))?;
            let slot = &mut g.table[from * k + e];
            if *slot != NONE {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate transition on ({from}, {event})"
                )));
            }
            *slot = to as u32;
        }
        Ok(g)
    }

    /// Internal constructor from a finished table.
    pub(crate) fn from_parts(
        alphabet: Alphabet,
        initial: usize,
        marked: Vec<bool>,
        table: Vec<u32>,
    ) -> Self {
        debug_assert_eq!(table.len(), marked.len() * alphabet.len());
        debug_assert!(initial < marked.len());
        Generator {
            alphabet,
            initial: initial as u32,
            marked,
            table,
        }
    }

    /// The empty language: one unmarked state, no transitions.
    pub fn empty(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        Generator::from_parts(alphabet, 0, vec![false], vec![NONE; k])
    }

    /// The language `A*`: one marked state with a self-loop on every event.
    pub fn universal(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        Generator::from_parts(alphabet, 0, vec![true], vec![0; k])
    }

    /// A prefix tree marking exactly the given words.
    pub fn from_words<I>(alphabet: Alphabet, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = Word>,
    {
        let k = alphabet.len();
        let mut marked = vec![false];
        let mut table = vec![NONE; k];
        for w in words {
            let mut q = 0usize;
            for name in w.iter() {
                let e = alphabet
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownEvent(name.to_string()))?;
                let t = table[q * k + e];
                q = if t == NONE {
                    let fresh = marked.len();
                    marked.push(false);
                    table.extend(std::iter::repeat_n(NONE, k));
                    table[q * k + e] = fresh as u32;
                    fresh
                } else {
                    t as usize
                };
            }
            marked[q] = true;
        }
        Ok(Generator::from_parts(alphabet, 0, marked, table).canonical())
    }

    /// The prefix closure of the given words, every state marked.
    pub fn closed_from_words<I>(alphabet: Alphabet, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = Word>,
    {
        Ok(Generator::from_words(alphabet, words)?.mark_all())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.marked.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial as usize
    }

    pub fn is_marked(&self, q: StateId) -> bool {
        self.marked[q]
    }

    pub fn marked_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.marked
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(|(q, _)| q)
    }

    /// Successor of `q` on the event with alphabet index `e`.
    #[inline]
    pub fn next(&self, q: StateId, e: usize) -> Option<StateId> {
        let t = self.table[q * self.alphabet.len() + e];
        (t != NONE).then_some(t as usize)
    }

    pub fn next_by_name(&self, q: StateId, event: &str) -> Option<StateId> {
        self.alphabet.index_of(event).and_then(|e| self.next(q, e))
    }

    /// Outgoing transitions of `q` as `(event index, target)`, in event order.
    pub fn successors(&self, q: StateId) -> impl Iterator<Item = (usize, StateId)> + '_ {
        let k = self.alphabet.len();
        self.table[q * k..(q + 1) * k]
            .iter()
            .enumerate()
            .filter(|(_, t)| **t != NONE)
            .map(|(e, t)| (e, *t as usize))
    }

    /// All transitions `(from, event index, to)`, sorted by source then event.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, usize, StateId)> + '_ {
        (0..self.num_states()).flat_map(move |q| self.successors(q).map(move |(e, t)| (q, e, t)))
    }

    pub fn num_transitions(&self) -> usize {
        self.table.iter().filter(|t| **t != NONE).count()
    }

    /// Follows a word of event indices from the initial state.
    pub fn run(&self, word: &[usize]) -> Option<StateId> {
        word.iter()
            .try_fold(self.initial(), |q, &e| self.next(q, e))
    }

    /// Classifies `w` against `L_m(G)` and `L(G)`.
    pub fn accepts(&self, w: &Word) -> Result<Acceptance> {
        let mut q = self.initial();
        let mut alive = true;
        for name in w.iter() {
            let e = self
                .alphabet
                .index_of(name)
                .ok_or_else(|| Error::UnknownEvent(name.to_string()))?;
            if alive {
                match self.next(q, e) {
                    Some(t) => q = t,
                    None => alive = false,
                }
            }
        }
        Ok(match (alive, alive && self.marked[q]) {
            (false, _) => Acceptance::Rejected,
            (true, true) => Acceptance::InMarked,
            (true, false) => Acceptance::InGeneratedOnly,
        })
    }

    pub fn with_initial(&self, q: StateId) -> Generator {
        let mut g = self.clone();
        g.initial = q as u32;
        g
    }

    pub fn mark_all(mut self) -> Generator {
        self.marked.iter_mut().for_each(|m| *m = true);
        self
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial()]);
        seen[self.initial()] = true;
        while let Some(q) = queue.pop_front() {
            for (_, t) in self.successors(q) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// States from which some marked state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (q, _, t) in self.transitions() {
            preds[t].push(q as u32);
        }
        let mut seen = self.marked.clone();
        let mut stack: Vec<usize> = self.marked_states().collect();
        while let Some(q) = stack.pop() {
            for &p in &preds[q] {
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    stack.push(p as usize);
                }
            }
        }
        seen
    }

    /// True when no marked state is reachable, i.e. `L_m(G) = ∅`.
    pub fn is_marked_empty(&self) -> bool {
        let reach = self.reachable();
        !self.marked.iter().zip(reach).any(|(m, r)| *m && r)
    }

    /// True when every reachable state is coreachable (`cl(L_m) = L`).
    pub fn is_nonblocking(&self) -> bool {
        let co = self.coreachable();
        self.reachable().iter().zip(co).all(|(r, c)| !r || c)
    }

    /// Keeps only the states flagged in `keep`; transitions into dropped
    /// states vanish. Returns the empty generator if the initial state goes.
    pub(crate) fn restrict_to(&self, keep: &[bool]) -> Generator {
        if !keep[self.initial()] {
            return Generator::empty(self.alphabet.clone());
        }
        let mut map = vec![NONE; self.num_states()];
        let mut count = 0u32;
        for (q, k) in keep.iter().enumerate() {
            if *k {
                map[q] = count;
                count += 1;
            }
        }
        let k = self.alphabet.len();
        let mut marked = Vec::with_capacity(count as usize);
        let mut table = Vec::with_capacity(count as usize * k);
        for q in (0..self.num_states()).filter(|q| keep[*q]) {
            marked.push(self.marked[q]);
            for e in 0..k {
                let t = self.table[q * k + e];
                table.push(if t == NONE { NONE } else { map[t as usize] });
            }
        }
        Generator::from_parts(
            self.alphabet.clone(),
            map[self.initial()] as usize,
            marked,
            table,
        )
    }

    /// Minimal deterministic generator for the pair `(L(G), L_m(G))`, with
    /// states renumbered in breadth-first order over sorted event names.
    /// Two generators over the same alphabet are language-equal in both
    /// languages iff their canonical forms are equal.
    pub fn canonical(&self) -> Generator {
        let g = self.restrict_to(&self.reachable());
        let n = g.num_states();
        let k = g.alphabet.len();

        // Moore partition refinement on the partial transition function:
        // a missing transition is its own class.
        let mut class: Vec<u32> = g.marked.iter().map(|m| *m as u32).collect();
        let mut count = {
            let mut ids = HashMap::new();
            for c in class.iter_mut() {
                let len = ids.len() as u32;
                *c = *ids.entry(*c).or_insert(len);
            }
            ids.len()
        };
        loop {
            let mut ids: HashMap<Vec<u32>, u32> = HashMap::with_capacity(count * 2);
            let mut next = vec![0u32; n];
            let mut sig = Vec::with_capacity(k + 1);
            for q in 0..n {
                sig.clear();
                sig.push(class[q]);
                for e in 0..k {
                    let t = g.table[q * k + e];
                    sig.push(if t == NONE { NONE } else { class[t as usize] });
                }
                let len = ids.len() as u32;
                next[q] = match ids.get(&sig) {
                    Some(&c) => c,
                    None => {
                        ids.insert(sig.clone(), len);
                        len
                    }
                };
            }
            let refined = ids.len();
            class = next;
            if refined == count {
                break;
            }
            count = refined;
        }

        // Breadth-first renumbering of the quotient.
        let mut rep = vec![usize::MAX; count];
        for (q, &c) in class.iter().enumerate().take(n) {
            let c = c as usize;
            if rep[c] == usize::MAX {
                rep[c] = q;
            }
        }
        let mut order = vec![NONE; count];
        let mut queue = VecDeque::new();
        let start = class[g.initial()] as usize;
        order[start] = 0;
        queue.push_back(start);
        let mut seq = Vec::with_capacity(count);
        while let Some(c) = queue.pop_front() {
            seq.push(c);
            let q = rep[c];
            for e in 0..k {
                let t = g.table[q * k + e];
                if t != NONE {
                    let tc = class[t as usize] as usize;
                    if order[tc] == NONE {
                        order[tc] = (queue.len() + seq.len()) as u32;
                        queue.push_back(tc);
                    }
                }
            }
        }
        let mut marked = Vec::with_capacity(seq.len());
        let mut table = Vec::with_capacity(seq.len() * k);
        for &c in &seq {
            let q = rep[c];
            marked.push(g.marked[q]);
            for e in 0..k {
                let t = g.table[q * k + e];
                table.push(if t == NONE {
                    NONE
                } else {
                    order[class[t as usize] as usize]
                });
            }
        }
        Generator::from_parts(g.alphabet, 0, marked, table)
    }

    /// Shortest (then lexicographically least) word of `L_m(G)`.
    pub fn shortest_marked_word(&self) -> Option<Word> {
        self.shortest_word_to(|q| self.marked[q])
    }

    /// Shortest (then lexicographically least) word leading from the initial
    /// state to a state satisfying `target`.
    pub fn shortest_word_to(&self, target: impl Fn(StateId) -> bool) -> Option<Word> {
        let n = self.num_states();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.initial()]);
        seen[self.initial()] = true;
        while let Some(q) = queue.pop_front() {
            if target(q) {
                return Some(self.trace(&parent, q));
            }
            for (e, t) in self.successors(q) {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, e));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    fn trace(&self, parent: &[Option<(usize, usize)>], mut q: usize) -> Word {
        let mut events = Vec::new();
        while let Some((p, e)) = parent[q] {
            events.push(self.alphabet.event(e).name.clone());
            q = p;
        }
        events.reverse();
        Word(events)
    }

    /// Converts a word of names into alphabet indices.
    pub fn word_indices(&self, w: &Word) -> Result<Vec<usize>> {
        w.iter()
            .map(|n| {
                self.alphabet
                    .index_of(n)
                    .ok_or_else(|| Error::UnknownEvent(n.to_string()))
            })
            .collect()
    }
}
