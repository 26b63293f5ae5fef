//! Decision procedures for the language properties used by synthesis:
//! controllability, observability, normality and nonconflict. Every
//! negative verdict carries a shortest witness.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, EventSet, Word};
use crate::config::{Limits, NormalityMode};
use crate::error::{Error, Result};
use crate::generator::{Generator, StateId};
use crate::ops::{self, prefix_closure, same_alphabet};

/// The event partition a synthesis or check runs under. `A_c` is the
/// complement of `uncontrollable`; `Q` projects onto `observable`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlContext {
    pub alphabet: Alphabet,
    pub uncontrollable: EventSet,
    pub observable: EventSet,
}

impl ControlContext {
    pub fn new(alphabet: Alphabet, uncontrollable: EventSet, observable: EventSet) -> Result<Self> {
        alphabet.check_known(&uncontrollable)?;
        alphabet.check_known(&observable)?;
        Ok(ControlContext {
            alphabet,
            uncontrollable,
            observable,
        })
    }

    /// Partition read off the event attributes of `alphabet`.
    pub fn from_alphabet(alphabet: &Alphabet) -> Self {
        ControlContext {
            alphabet: alphabet.clone(),
            uncontrollable: alphabet.uncontrollable(),
            observable: alphabet.observable(),
        }
    }

    /// The context on the sub-alphabet `events ∩ A`.
    pub fn restrict(&self, events: &EventSet) -> Self {
        let keep = |s: &EventSet| s.intersection(events).cloned().collect();
        ControlContext {
            alphabet: self.alphabet.intersect(events),
            uncontrollable: keep(&self.uncontrollable),
            observable: keep(&self.observable),
        }
    }

    pub fn controllable(&self) -> EventSet {
        self.alphabet
            .names()
            .into_iter()
            .filter(|e| !self.uncontrollable.contains(e))
            .collect()
    }
}

/// Counterexample attached to a failed check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// A word in one language and not in the other (inclusion failures,
    /// blocking words).
    Word { word: Word },
    /// `prefix ∈ cl(K)` and `prefix·event ∈ cl(L) \ cl(K)` for an
    /// uncontrollable `event`.
    Escape { prefix: Word, event: String },
    /// Observationally equal words where `event` must be disabled after
    /// `disabled` but stays possible in `cl(K)` after `enabled`.
    Confusion {
        disabled: Word,
        enabled: Word,
        event: String,
    },
    /// `word ∈ Q^-1 Q(·) ∩ cl(L)` is missing from `cl(K)`; `twin` is a word
    /// of the closure with the same observation.
    Normality { word: Word, twin: Word },
    /// After `prefix`, the projected continuation `extension` is possible
    /// in the projection but has no marked completion.
    Continuation { prefix: Word, extension: Word },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Which part of a compound condition failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<String>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            holds: true,
            witness: None,
            clause: None,
        }
    }

    pub fn fail(witness: Witness) -> Self {
        Verdict {
            holds: false,
            witness: Some(witness),
            clause: None,
        }
    }

    pub fn in_clause(mut self, clause: impl Into<String>) -> Self {
        if !self.holds {
            self.clause = Some(clause.into());
        }
        self
    }
}

/// Breadth-first search with parent links over hashable keys.
struct Search<K, M> {
    index: HashMap<K, usize>,
    keys: Vec<K>,
    parent: Vec<Option<(usize, usize, M)>>,
    queue: VecDeque<usize>,
}

impl<K: Hash + Eq + Clone, M: Copy> Search<K, M> {
    fn new(start: K) -> Self {
        let mut s = Search {
            index: HashMap::new(),
            keys: Vec::new(),
            parent: Vec::new(),
            queue: VecDeque::new(),
        };
        s.index.insert(start.clone(), 0);
        s.keys.push(start);
        s.parent.push(None);
        s.queue.push_back(0);
        s
    }

    fn pop(&mut self) -> Option<(usize, K)> {
        let id = self.queue.pop_front()?;
        Some((id, self.keys[id].clone()))
    }

    fn visit(&mut self, key: K, from: usize, event: usize, tag: M) {
        if let Entry::Vacant(v) = self.index.entry(key) {
            let id = self.keys.len();
            self.keys.push(v.key().clone());
            v.insert(id);
            self.parent.push(Some((from, event, tag)));
            self.queue.push_back(id);
        }
    }

    /// The labelled path to `id`, as (event, tag) pairs.
    fn path(&self, mut id: usize) -> Vec<(usize, M)> {
        let mut out = Vec::new();
        while let Some((prev, e, tag)) = self.parent[id] {
            out.push((e, tag));
            id = prev;
        }
        out.reverse();
        out
    }
}

fn names(alphabet: &Alphabet, events: impl IntoIterator<Item = usize>) -> Word {
    Word(
        events
            .into_iter()
            .map(|e| alphabet.event(e).name.clone())
            .collect(),
    )
}

fn flags(alphabet: &Alphabet, set: &EventSet) -> Result<Vec<bool>> {
    alphabet.check_known(set)?;
    Ok(alphabet
        .events()
        .iter()
        .map(|e| set.contains(&e.name))
        .collect())
}

/// `cl(K)·A_u ∩ cl(L) ⊆ cl(K)`.
pub fn is_controllable(k: &Generator, l: &Generator, a_u: &EventSet) -> Result<Verdict> {
    same_alphabet(k, l)?;
    let unc = flags(k.alphabet(), a_u)?;
    let kc = prefix_closure(k);
    let lc = prefix_closure(l);
    if kc.is_marked_empty() || lc.is_marked_empty() {
        return Ok(Verdict::pass());
    }
    let mut search: Search<(StateId, StateId), ()> = Search::new((kc.initial(), lc.initial()));
    while let Some((id, (p, q))) = search.pop() {
        for (e, q2) in lc.successors(q) {
            match kc.next(p, e) {
                Some(p2) => search.visit((p2, q2), id, e, ()),
                None if unc[e] => {
                    let prefix = names(k.alphabet(), search.path(id).into_iter().map(|x| x.0));
                    return Ok(Verdict::fail(Witness::Escape {
                        prefix,
                        event: k.alphabet().event(e).name.clone(),
                    }));
                }
                None => {}
            }
        }
    }
    Ok(Verdict::pass())
}

#[derive(Clone, Copy)]
enum Mover {
    Both,
    First,
    Second,
}

/// For all `s ∈ cl(K)` and controllable `σ` with `sσ ∈ cl(L) \ cl(K)`, no
/// `s'` observationally equal to `s` has `s'σ ∈ cl(K)`.
pub fn is_observable(k: &Generator, l: &Generator, ctx: &ControlContext) -> Result<Verdict> {
    same_alphabet(k, l)?;
    let alphabet = k.alphabet();
    let unc = flags(alphabet, &ctx.uncontrollable)?;
    let obs = flags(alphabet, &ctx.observable)?;
    let kc = prefix_closure(k);
    let lc = prefix_closure(l);
    if kc.is_marked_empty() || lc.is_marked_empty() {
        return Ok(Verdict::pass());
    }
    // (state of s in cl(K), state of s in cl(L), state of s' in cl(K))
    let start = (kc.initial(), lc.initial(), kc.initial());
    let mut search: Search<(StateId, StateId, StateId), Mover> = Search::new(start);
    while let Some((id, (x, y, z))) = search.pop() {
        for e in 0..alphabet.len() {
            let x2 = kc.next(x, e);
            let y2 = lc.next(y, e);
            let z2 = kc.next(z, e);
            if !unc[e] && x2.is_none() && y2.is_some() && z2.is_some() {
                let path = search.path(id);
                let pick = |first: bool| {
                    names(
                        alphabet,
                        path.iter().filter_map(|&(ev, m)| match m {
                            Mover::Both => Some(ev),
                            Mover::First if first => Some(ev),
                            Mover::Second if !first => Some(ev),
                            _ => None,
                        }),
                    )
                };
                return Ok(Verdict::fail(Witness::Confusion {
                    disabled: pick(true),
                    enabled: pick(false),
                    event: alphabet.event(e).name.clone(),
                }));
            }
            if obs[e] {
                if let (Some(x2), Some(y2), Some(z2)) = (x2, y2, z2) {
                    search.visit((x2, y2, z2), id, e, Mover::Both);
                }
            } else {
                if let (Some(x2), Some(y2)) = (x2, y2) {
                    search.visit((x2, y2, z), id, e, Mover::First);
                }
                if let Some(z2) = z2 {
                    search.visit((x, y, z2), id, e, Mover::Second);
                }
            }
        }
    }
    Ok(Verdict::pass())
}

/// `Q^-1 Q(M)` over the alphabet of `m`.
pub(crate) fn observation_closure(
    m: &Generator,
    a_o: &EventSet,
    limits: &Limits,
) -> Result<Generator> {
    ops::lift(&ops::project(m, a_o, limits)?, m.alphabet())
}

/// Shortest word of `target` with the same observation as `w`.
fn observational_twin(
    w: &Word,
    target: &Generator,
    a_o: &EventSet,
    limits: &Limits,
) -> Result<Option<Word>> {
    let sub = target.alphabet().restrict(a_o)?;
    let chain = Generator::from_words(sub, [w.project(a_o)])?;
    let lifted = ops::lift(&chain, target.alphabet())?;
    Ok(ops::intersection(&lifted, target, limits)?.shortest_marked_word())
}

/// Standard normality `cl(K) = Q^-1 Q(cl(K)) ∩ cl(L)`.
pub fn is_normal(k: &Generator, l: &Generator, a_o: &EventSet, limits: &Limits) -> Result<Verdict> {
    is_normal_with(k, l, a_o, NormalityMode::Standard, limits)
}

/// Normality in the chosen form; `Literal` observes `K` itself instead of
/// its closure.
pub fn is_normal_with(
    k: &Generator,
    l: &Generator,
    a_o: &EventSet,
    mode: NormalityMode,
    limits: &Limits,
) -> Result<Verdict> {
    same_alphabet(k, l)?;
    k.alphabet().check_known(a_o)?;
    let kc = prefix_closure(k);
    let lc = prefix_closure(l);
    let observed = match mode {
        NormalityMode::Standard => kc.clone(),
        NormalityMode::Literal => ops::trim(k),
    };
    let rhs = ops::intersection(&observation_closure(&observed, a_o, limits)?, &lc, limits)?;
    if let Some(word) = ops::subset_witness(&kc, &rhs) {
        return Ok(Verdict::fail(Witness::Word { word }));
    }
    if let Some(word) = ops::subset_witness(&rhs, &kc) {
        let twin = observational_twin(&word, &observed, a_o, limits)?
            .ok_or_else(|| Error::Internal("normality witness without a twin".into()))?;
        return Ok(Verdict::fail(Witness::Normality { word, twin }));
    }
    Ok(Verdict::pass())
}

/// `cl(∥ L_m(G_i)) = ∥ cl(L_m(G_i))`. Witness: a word of the right side
/// that cannot be extended to a marked word of the product.
pub fn is_nonconflicting(gs: &[Generator], limits: &Limits) -> Result<Verdict> {
    let trims: Vec<Generator> = gs.iter().map(ops::trim).collect();
    if trims.is_empty() || trims.iter().any(Generator::is_marked_empty) {
        return Ok(Verdict::pass());
    }
    let product = ops::product_all(&trims, limits)?;
    let co = product.coreachable();
    Ok(match product.shortest_word_to(|q| !co[q]) {
        Some(word) => Verdict::fail(Witness::Word { word }),
        None => Verdict::pass(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{event_set, Event};

    fn w(s: &str) -> Word {
        Word(s.chars().map(|c| c.to_string()).collect())
    }

    fn closed(alphabet: &Alphabet, words: &[&str]) -> Generator {
        Generator::closed_from_words(alphabet.clone(), words.iter().map(|s| w(s))).unwrap()
    }

    fn marked(alphabet: &Alphabet, words: &[&str]) -> Generator {
        Generator::from_words(alphabet.clone(), words.iter().map(|s| w(s))).unwrap()
    }

    fn au() -> Alphabet {
        Alphabet::new(vec![Event::new("a"), Event::new("u").uncontrollable()]).unwrap()
    }

    #[test]
    fn controllability_escape() {
        let a = au();
        let k = closed(&a, &["a"]);
        let l = closed(&a, &["au"]);
        let v = is_controllable(&k, &l, &event_set(["u"])).unwrap();
        assert_eq!(
            v.witness,
            Some(Witness::Escape {
                prefix: w("a"),
                event: "u".into()
            })
        );
        assert!(is_controllable(&l, &l, &event_set(["u"])).unwrap().holds);
        assert!(is_controllable(&k, &l, &EventSet::new()).unwrap().holds);
    }

    #[test]
    fn observability_confusion() {
        let a = Alphabet::new(vec![Event::new("a"), Event::new("b").uncontrollable()]).unwrap();
        let ctx = ControlContext::new(a.clone(), event_set(["b"]), EventSet::new()).unwrap();
        let l = closed(&a, &["a", "ba"]);
        // `b ∉ cl(K)`, so nothing is required after it.
        assert!(is_observable(&closed(&a, &["a"]), &l, &ctx).unwrap().holds);
        let k = closed(&a, &["a", "b"]);
        let v = is_observable(&k, &l, &ctx).unwrap();
        assert_eq!(
            v.witness,
            Some(Witness::Confusion {
                disabled: w("b"),
                enabled: w(""),
                event: "a".into()
            })
        );
        assert!(is_observable(&l, &l, &ctx).unwrap().holds);
        let full = ControlContext::from_alphabet(&a);
        let kc = closed(&a, &["ab"]);
        let lc = closed(&a, &["ab", "aa"]);
        assert!(is_controllable(&kc, &lc, &full.uncontrollable).unwrap().holds);
        assert!(is_observable(&kc, &lc, &full).unwrap().holds);
    }

    #[test]
    fn normality_cases() {
        let a = Alphabet::from_names(["a", "b"]).unwrap();
        let lim = Limits::default();
        let k = closed(&a, &["a"]);
        let l = closed(&a, &["a", "b"]);
        let v = is_normal(&k, &l, &EventSet::new(), &lim).unwrap();
        assert_eq!(
            v.witness,
            Some(Witness::Normality {
                word: w("b"),
                twin: w("")
            })
        );
        assert!(is_normal(&k, &l, &a.names(), &lim).unwrap().holds);
        assert!(is_normal(&l, &l, &EventSet::new(), &lim).unwrap().holds);
    }

    #[test]
    fn literal_normality_differs_on_marked_languages() {
        let a = Alphabet::from_names(["a", "b"]).unwrap();
        let lim = Limits::default();
        let k = marked(&a, &["ab"]);
        let l = closed(&a, &["ab"]);
        let obs = event_set(["b"]);
        assert!(is_normal(&k, &l, &obs, &lim).unwrap().holds);
        let lit = is_normal_with(&k, &l, &obs, NormalityMode::Literal, &lim).unwrap();
        assert_eq!(lit.witness, Some(Witness::Word { word: w("") }));
    }

    #[test]
    fn nonconflict_cases() {
        let a = Alphabet::from_names(["a"]).unwrap();
        let lim = Limits::default();
        let v = is_nonconflicting(&[marked(&a, &["a"]), marked(&a, &[""])], &lim).unwrap();
        assert_eq!(v.witness, Some(Witness::Word { word: w("") }));
        let ab = Alphabet::from_names(["a", "b"]).unwrap();
        let g = marked(&ab, &["ab"]);
        assert!(is_nonconflicting(&[g.clone(), g], &lim).unwrap().holds);
        let c1 = closed(&ab, &["ab"]);
        let c2 = closed(&ab, &["ba"]);
        assert!(is_nonconflicting(&[c1, c2], &lim).unwrap().holds);
        let empty = Generator::empty(a.clone());
        assert!(is_nonconflicting(&[empty, marked(&a, &["a"])], &lim).unwrap().holds);
    }

    #[test]
    fn mismatched_alphabets_are_rejected() {
        let k = closed(&Alphabet::from_names(["a"]).unwrap(), &["a"]);
        let l = closed(&Alphabet::from_names(["a", "b"]).unwrap(), &["a"]);
        assert!(matches!(
            is_controllable(&k, &l, &EventSet::new()),
            Err(Error::AlphabetMismatch(_))
        ));
    }
}
