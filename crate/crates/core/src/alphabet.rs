//! Events, alphabets and words.
//!
//! An [`Alphabet`] keeps its events sorted by name. That order is the
//! determinism anchor for every construction in the crate: transition
//! tables are indexed by it, breadth-first renumbering visits events in it,
//! and all alphabet-extension heuristics break ties by it.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of event names. Ordered, so iteration is lexicographic.
pub type EventSet = BTreeSet<String>;

/// Builds an [`EventSet`] from anything yielding string-like names.
pub fn event_set<I, S>(names: I) -> EventSet
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    pub controllable: bool,
    pub observable: bool,
}

impl Event {
    /// A controllable, observable event.
    pub fn new(name: impl Into<String>) -> Self {
        Event {
            name: name.into(),
            controllable: true,
            observable: true,
        }
    }

    pub fn uncontrollable(mut self) -> Self {
        self.controllable = false;
        self
    }

    pub fn unobservable(mut self) -> Self {
        self.observable = false;
        self
    }

    fn same_attributes(&self, other: &Event) -> bool {
        self.controllable == other.controllable && self.observable == other.observable
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Alphabet {
    events: Vec<Event>,
}

impl Alphabet {
    /// Sorts the events by name; rejects empty and duplicate names.
    pub fn new(mut events: Vec<Event>) -> Result<Self> {
        events.sort_by(|a, b| a.name.cmp(&b.name));
        for e in &events {
            if e.name.is_empty() {
                return Err(Error::InvalidAutomaton("empty event name".into()));
            }
        }
        for w in events.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate event `{}`",
                    w[0].name
                )));
            }
        }
        Ok(Alphabet { events })
    }

    /// Controllable, observable events with the given names.
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Alphabet::new(names.into_iter().map(Event::new).collect())
    }

    pub fn empty() -> Self {
        Alphabet::default()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, index: usize) -> &Event {
        &self.events[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.events
            .binary_search_by(|e| e.name.as_str().cmp(name))
            .ok()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    pub fn get(&self, name: &str) -> Option<&Event> {
        self.index_of(name).map(|i| &self.events[i])
    }

    pub fn names(&self) -> EventSet {
        self.events.iter().map(|e| e.name.clone()).collect()
    }

    pub fn uncontrollable(&self) -> EventSet {
        self.events
            .iter()
            .filter(|e| !e.controllable)
            .map(|e| e.name.clone())
            .collect()
    }

    pub fn observable(&self) -> EventSet {
        self.events
            .iter()
            .filter(|e| e.observable)
            .map(|e| e.name.clone())
            .collect()
    }

    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.events.iter().all(|e| other.contains(&e.name))
    }

    /// Union of two alphabets. Shared names must carry identical attributes.
    pub fn merge(&self, other: &Alphabet) -> Result<Alphabet> {
        let mut events = self.events.clone();
        for e in &other.events {
            match self.get(&e.name) {
                Some(mine) if !mine.same_attributes(e) => {
                    return Err(Error::AttributeInconsistency(e.name.clone()))
                }
                Some(_) => {}
                None => events.push(e.clone()),
            }
        }
        Alphabet::new(events)
    }

    /// The sub-alphabet with exactly the named events.
    pub fn restrict(&self, names: &EventSet) -> Result<Alphabet> {
        let mut events = Vec::with_capacity(names.len());
        for n in names {
            match self.get(n) {
                Some(e) => events.push(e.clone()),
                None => return Err(Error::UnknownEvent(n.clone())),
            }
        }
        Ok(Alphabet { events })
    }

    /// Like [`restrict`](Self::restrict) but silently drops unknown names.
    pub fn intersect(&self, names: &EventSet) -> Alphabet {
        Alphabet {
            events: self
                .events
                .iter()
                .filter(|e| names.contains(&e.name))
                .cloned()
                .collect(),
        }
    }

    pub fn check_known(&self, names: &EventSet) -> Result<()> {
        match names.iter().find(|n| !self.contains(n)) {
            Some(n) => Err(Error::UnknownEvent(n.clone())),
            None => Ok(()),
        }
    }
}

/// Merges any number of alphabets, checking attribute consistency.
pub fn merge_all<'a, I>(alphabets: I) -> Result<Alphabet>
where
    I: IntoIterator<Item = &'a Alphabet>,
{
    alphabets
        .into_iter()
        .try_fold(Alphabet::empty(), |acc, a| acc.merge(a))
}

/// A finite sequence of event names; the empty word is `ε`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<String>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Word(names.into_iter().map(Into::into).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Natural projection onto `target`.
    pub fn project(&self, target: &EventSet) -> Word {
        Word(self.0.iter().filter(|e| target.contains(*e)).cloned().collect())
    }

    pub fn push(&mut self, event: impl Into<String>) {
        self.0.push(event.into());
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        write!(f, "{}", self.0.join(" "))
    }
}
