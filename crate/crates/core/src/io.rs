//! JSON file formats and the textual transition-table dump.
//!
//! Automaton files look like
//!
//! ```json
//! {"events":[{"name":"a","controllable":true,"observable":true}],
//!  "states":["s0","s1"],"initial":"s0","marked":["s1"],
//!  "transitions":[["s0","a","s1"]]}
//! ```
//!
//! Written files are canonical: states are named `s0..` in the generator's
//! order, events are sorted and transitions are sorted by source and event.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Event, EventSet};
use crate::coordination::MultilevelSpec;
use crate::error::{Error, Result};
use crate::generator::Generator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub events: Vec<Event>,
    pub states: Vec<String>,
    pub initial: Option<String>,
    #[serde(default)]
    pub marked: Vec<String>,
    #[serde(default)]
    pub transitions: Vec<(String, String, String)>,
}

impl AutomatonFile {
    pub fn from_generator(g: &Generator) -> Self {
        let name = |q: usize| format!("s{q}");
        AutomatonFile {
            events: g.alphabet().events().to_vec(),
            states: (0..g.num_states()).map(name).collect(),
            initial: Some(name(g.initial())),
            marked: g.marked_states().map(name).collect(),
            transitions: g
                .transitions()
                .map(|(q, e, t)| (name(q), g.alphabet().event(e).name.clone(), name(t)))
                .collect(),
        }
    }

    pub fn to_generator(&self) -> Result<Generator> {
        let alphabet = Alphabet::new(self.events.clone())?;
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if ids.insert(s.as_str(), i).is_some() {
                return Err(Error::InvalidAutomaton(format!("duplicate state `{s}`")));
            }
        }
        let lookup = |s: &str| {
            ids.get(s)
                .copied()
                .ok_or_else(|| Error::InvalidAutomaton(format!("unknown state `{s}`")))
        };
        let initial = match &self.initial {
            Some(s) => lookup(s)?,
            None => return Err(Error::InvalidAutomaton("missing initial state".into())),
        };
        let marked = self
            .marked
            .iter()
            .map(|s| lookup(s))
            .collect::<Result<Vec<_>>>()?;
        let transitions = self
            .transitions
            .iter()
            .map(|(a, e, b)| Ok((lookup(a)?, e.as_str(), lookup(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Generator::new(alphabet, self.states.len(), initial, marked, transitions)
    }
}

fn json_error(path: &str, e: serde_json::Error) -> Error {
    Error::Json {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_generator(text: &str, origin: &str) -> Result<Generator> {
    let file: AutomatonFile = serde_json::from_str(text).map_err(|e| json_error(origin, e))?;
    file.to_generator()
}

pub fn generator_to_json(g: &Generator) -> String {
    let mut s = serde_json::to_string_pretty(&AutomatonFile::from_generator(g))
        .expect("automaton serialization cannot fail");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_generator(path: &Path) -> Result<Generator> {
    parse_generator(&read_text(path)?, &path.display().to_string())
}

pub fn write_generator(path: &Path, g: &Generator) -> Result<()> {
    write_text(path, &generator_to_json(g))
}

/// Deserializes any JSON document, mapping errors to [`Error::Json`].
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| json_error(origin, e))
}

/// Project file: automaton paths relative to the project file, 1-based
/// groups, and optional coordinator alphabets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub subsystems: Vec<String>,
    pub groups: Vec<Vec<usize>>,
    pub specification: String,
    #[serde(default)]
    pub high_alphabet: Option<EventSet>,
    #[serde(default)]
    pub group_alphabets: Option<Vec<EventSet>>,
    #[serde(default = "default_auto_extend")]
    pub auto_extend: bool,
}

fn default_auto_extend() -> bool {
    true
}

/// Loads a project file and every automaton it names.
pub fn read_project(path: &Path) -> Result<MultilevelSpec> {
    let file: ProjectFile = parse_json(&read_text(path)?, &path.display().to_string())?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let subsystems = file
        .subsystems
        .iter()
        .map(|p| read_generator(&base.join(p)))
        .collect::<Result<Vec<_>>>()?;
    let groups = file
        .groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&i| {
                    i.checked_sub(1)
                        .ok_or_else(|| Error::Precondition("group indices are 1-based".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let specification = read_generator(&base.join(&file.specification))?;
    MultilevelSpec::new(
        subsystems,
        groups,
        specification,
        file.high_alphabet,
        file.group_alphabets,
        file.auto_extend,
    )
}

/// Compact transition table, one row per state.
pub fn transition_table(g: &Generator) -> String {
    let mut out = String::new();
    let names: Vec<&str> = g
        .alphabet()
        .events()
        .iter()
        .map(|e| e.name.as_str())
        .collect();
    let width = names.iter().map(|n| n.len()).max().unwrap_or(1).max(4);
    let _ = write!(out, "{:8}", "state");
    for n in &names {
        let _ = write!(out, " {n:>width$}");
    }
    out.push('\n');
    for q in 0..g.num_states() {
        let flag = match (q == g.initial(), g.is_marked(q)) {
            (true, true) => "->*",
            (true, false) => "->",
            (false, true) => "*",
            (false, false) => "",
        };
        let _ = write!(out, "{:8}", format!("{flag}s{q}"));
        for e in 0..names.len() {
            let cell = g.next(q, e).map_or("-".to_string(), |t| format!("s{t}"));
            let _ = write!(out, " {cell:>width$}");
        }
        out.push('\n');
    }
    out
}
