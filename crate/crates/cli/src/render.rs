use std::fmt::Write as _;

use coordsynth::io::transition_table;
use coordsynth::multilevel::PipelineArtifacts;
use coordsynth::{EventSet, Verdict};

fn events(set: &EventSet) -> String {
    let v: Vec<&str> = set.iter().map(String::as_str).collect();
    format!("{{{}}}", v.join(", "))
}

fn verdict(v: &Verdict) -> String {
    match (&v.witness, &v.clause) {
        (None, _) if v.holds => "yes".into(),
        (w, c) => format!(
            "no{}{}",
            c.as_ref().map(|c| format!(" [{c}]")).unwrap_or_default(),
            w.as_ref().map(|w| format!(" {w:?}")).unwrap_or_default()
        ),
    }
}

/// Human-readable report with a transition table per artifact.
pub fn report_text(arts: &PipelineArtifacts) -> String {
    let r = &arts.report;
    let mut out = String::new();
    let _ = writeln!(out, "report schema {}", r.schema_version);
    let _ = writeln!(out, "high coordinator alphabet: {}", events(&r.high_alphabet));
    let _ = writeln!(out, "decomposable: {}", verdict(&r.decomposability));
    if let Some(c) = r.coordinator_consistency {
        let _ = writeln!(out, "coordinator consistency: {c}");
    }
    for g in &r.groups {
        let _ = writeln!(
            out,
            "group {} {:?}: coordinator {}, nonblocking {}, nonconflicting {}, neutral {}",
            g.group,
            g.subsystems,
            events(&g.coordinator_alphabet),
            events(&g.nonblocking_alphabet),
            verdict(&g.nonconflicting),
            g.coordinator_neutral
        );
    }
    for c in &r.conditions.low {
        let _ = writeln!(
            out,
            "condition group {} subsystem {}: controllable {}, normal {}",
            c.group,
            c.subsystem,
            verdict(&c.controllable),
            verdict(&c.normal)
        );
    }
    for c in &r.conditions.high {
        let _ = writeln!(
            out,
            "condition group {} at the top: controllable {}, normal {}",
            c.group,
            verdict(&c.controllable),
            verdict(&c.normal)
        );
    }
    let _ = writeln!(out, "all conditions hold: {}", r.conditions.all_hold);
    let _ = writeln!(out, "high nonconflicting: {}", verdict(&r.high_nonconflicting));
    let _ = writeln!(
        out,
        "final: nonblocking {}, within specification {}",
        r.final_nonblocking, r.final_within_specification
    );
    for (name, g) in arts.named() {
        let _ = writeln!(out, "\n{name} ({} states)", g.num_states());
        out.push_str(&transition_table(g));
    }
    out
}
