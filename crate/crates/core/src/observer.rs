//! The marked-language observer property of a natural projection and a
//! greedy alphabet extension that establishes it.

use std::collections::HashMap;

use crate::alphabet::{EventSet, Word};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::generator::{Generator, StateId};
use crate::ops;
use crate::props::{Verdict, Witness};

/// `P: A* → B*` is an `L_m(G)`-observer: for every `s ∈ cl(L_m(G))` and
/// every `t` with `P(s)t ∈ P(L_m(G))` there is `u` with `su ∈ L_m(G)` and
/// `P(su) = P(s)t`.
///
/// Decided on the reachable pairs (state of `s` in `trim(G)`, state of
/// `P(s)` in the projected automaton): the continuations of the second
/// must be included in the projected continuations of the first.
pub fn is_observer(l: &Generator, target: &EventSet, limits: &Limits) -> Result<Verdict> {
    if let Some(e) = target.iter().find(|e| !l.alphabet().contains(e)) {
        return Err(Error::AlphabetMismatch(format!(
            "observer target event `{e}` not in alphabet"
        )));
    }
    let t = ops::trim(l);
    if t.is_marked_empty() {
        return Ok(Verdict::pass());
    }
    let d = ops::project(&t, target, limits)?;
    let alphabet = t.alphabet();
    let visible: Vec<Option<usize>> = alphabet
        .events()
        .iter()
        .map(|e| d.alphabet().index_of(&e.name))
        .collect();

    let mut projected: HashMap<StateId, Generator> = HashMap::new();
    let mut seen = HashMap::from([((t.initial(), d.initial()), None)]);
    let mut order = vec![(t.initial(), d.initial())];
    let mut cursor = 0;
    while cursor < order.len() {
        let (x, y) = order[cursor];
        cursor += 1;
        if let std::collections::hash_map::Entry::Vacant(slot) = projected.entry(x) {
            slot.insert(ops::project(&t.with_initial(x), target, limits)?);
        }
        if let Some(extension) = ops::subset_witness(&d.with_initial(y), &projected[&x]) {
            let mut prefix = Vec::new();
            let mut key = (x, y);
            while let Some(Some((prev, e))) = seen.get(&key) {
                prefix.push(alphabet.event(*e).name.clone());
                key = *prev;
            }
            prefix.reverse();
            return Ok(Verdict::fail(Witness::Continuation {
                prefix: Word(prefix),
                extension,
            }));
        }
        for (e, x2) in t.successors(x) {
            let y2 = match visible[e] {
                Some(i) => d
                    .next(y, i)
                    .ok_or_else(|| Error::Internal("projection lost a transition".into()))?,
                None => y,
            };
            if let std::collections::hash_map::Entry::Vacant(v) = seen.entry((x2, y2)) {
                v.insert(Some(((x, y), e)));
                order.push((x2, y2));
            }
        }
    }
    Ok(Verdict::pass())
}

/// Grows `seed` until the projection onto it is an `L_m(G)`-observer. Each
/// round adds the lexicographically smallest missing event of the failing
/// prefix, or else the smallest missing event that labels a transition of
/// `trim(G)`, or else the smallest missing event of the alphabet. The
/// result is deterministic and never minimal by guarantee.
pub fn extend_for_observer(l: &Generator, seed: &EventSet, limits: &Limits) -> Result<EventSet> {
    let mut b = seed.clone();
    loop {
        let verdict = is_observer(l, &b, limits)?;
        let prefix = match verdict.witness {
            None => return Ok(b),
            Some(Witness::Continuation { prefix, .. }) => prefix,
            Some(other) => return Err(Error::Internal(format!("unexpected witness {other:?}"))),
        };
        let t = ops::trim(l);
        let used: EventSet = t
            .transitions()
            .map(|(_, e, _)| t.alphabet().event(e).name.clone())
            .collect();
        let pick = prefix
            .iter()
            .filter(|e| !b.contains(*e))
            .min()
            .map(str::to_string)
            .or_else(|| used.iter().find(|e| !b.contains(*e)).cloned())
            .or_else(|| l.alphabet().names().into_iter().find(|e| !b.contains(e)));
        match pick {
            Some(e) => {
                b.insert(e);
            }
            None => return Err(Error::Internal("full alphabet is not an observer".into())),
        }
    }
}
