use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::{IntoParallelIterator, ParallelIterator};
use serde::Serialize;
use serde_json::json;

use coordsynth::coordination::{build_coordinator, extend_for_cd, shared_events};
use coordsynth::io;
use coordsynth::multilevel::{build_hierarchy, build_nonblocking_coordinator, nonblocking_or_empty, run_combined_procedure};
use coordsynth::observer::is_observer;
use coordsynth::oracle::{check_instance, verify_3level_supremal, InstanceCheck, InstanceParams, MaximalityBounds, SupremalVerdict};
use coordsynth::supremal::{sup_c, sup_cn, sup_n};
use coordsynth::{ops, props};
use coordsynth::{Config, ControlContext, CoordinatorScope, EventSet, Generator, Limits, NormalityMode, Verdict};

use crate::render;
use crate::{
    CheckArgs, Cli, Command, CoordinatorArgs, Failure, FuzzArgs, GlobalArgs, NormalityArg, Operator, Property,
    ReportFormat, SupcnArgs, SynthesizeArgs, VerifyArgs, VerifyMode, EXIT_FALSE, EXIT_RESOURCE,
};

type Outcome = Result<u8, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    let limits = limits(&cli.global)?;
    match &cli.command {
        Command::Product { files, out } => {
            let gs = files.iter().map(|f| load(f)).collect::<Result<Vec<_>, _>>()?;
            let g = ops::product_all(&gs, &limits)?.canonical();
            emit(out.as_deref(), &io::generator_to_json(&g))?;
            Ok(0)
        }
        Command::Project { file, events, out } => {
            let g = load(file)?;
            let target: EventSet = events.iter().cloned().collect();
            let p = ops::project(&g, &target, &limits)?;
            emit(out.as_deref(), &io::generator_to_json(&p))?;
            Ok(0)
        }
        Command::Check(args) => check(args, &limits),
        Command::Supcn(args) => supcn(args, &limits),
        Command::Coordinator(args) => coordinator(args, &limits),
        Command::Synthesize(args) => synthesize(args, limits),
        Command::Verify(args) => verify(args, limits),
        Command::Fuzz(args) => fuzz(args, limits),
    }
}

fn limits(g: &GlobalArgs) -> Result<Limits, Failure> {
    let mut limits = Limits::default();
    if let Some(n) = g.max_states {
        limits.max_states = n;
    }
    if let Some(n) = g.max_iterations {
        limits.max_iterations = n;
    }
    if limits.max_states == 0 || limits.max_iterations == 0 {
        return Err(Failure::Usage("ceilings must be positive".into()));
    }
    Ok(limits)
}

fn load(path: &str) -> Result<Generator, Failure> {
    Ok(io::read_generator(Path::new(path))?)
}

fn emit(out: Option<&str>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => Ok(io::write_text(Path::new(path), text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn set(list: &Option<Vec<String>>) -> Option<EventSet> {
    list.as_ref().map(|v| v.iter().filter(|e| !e.is_empty()).cloned().collect())
}

fn context(g: &Generator, au: &Option<Vec<String>>, ao: &Option<Vec<String>>) -> Result<ControlContext, Failure> {
    let base = ControlContext::from_alphabet(g.alphabet());
    Ok(ControlContext::new(
        g.alphabet().clone(),
        set(au).unwrap_or(base.uncontrollable),
        set(ao).unwrap_or(base.observable),
    )?)
}

fn check(args: &CheckArgs, limits: &Limits) -> Outcome {
    let l = load(&args.l)?;
    let need_k = || -> Result<Generator, Failure> {
        match &args.k {
            Some(k) => load(k),
            None => Err(Failure::Usage("this property needs --k".into())),
        }
    };
    let ctx = context(&l, &args.au, &args.ao)?;
    let verdict: Verdict = match args.property {
        Property::Controllable => props::is_controllable(&need_k()?, &l, &ctx.uncontrollable)?,
        Property::Observable => props::is_observable(&need_k()?, &l, &ctx)?,
        Property::Normal => {
            let mode = match args.normality {
                NormalityArg::Standard => NormalityMode::Standard,
                NormalityArg::Literal => NormalityMode::Literal,
            };
            props::is_normal_with(&need_k()?, &l, &ctx.observable, mode, limits)?
        }
        Property::Nonconflicting => props::is_nonconflicting(&[need_k()?, l.clone()], limits)?,
        Property::Observer => {
            let target = set(&args.target).ok_or_else(|| Failure::Usage("observer needs --target".into()))?;
            is_observer(&l, &target, limits)?
        }
    };
    let name = format!("{:?}", args.property).to_lowercase();
    print!("{}", pretty(&json!({ "property": name, "verdict": verdict })));
    Ok(if verdict.holds { 0 } else { EXIT_FALSE })
}

fn supcn(args: &SupcnArgs, limits: &Limits) -> Outcome {
    let k = load(&args.k)?;
    let l = load(&args.l)?;
    let ctx = context(&l, &args.au, &args.ao)?;
    let r = match args.operator {
        Operator::Cn => sup_cn(&k, &l, &ctx, limits)?,
        Operator::C => sup_c(&k, &l, &ctx.uncontrollable, limits)?,
        Operator::N => sup_n(&k, &l, &ctx.observable, limits)?,
    };
    emit(args.out.as_deref(), &io::generator_to_json(&r.language))?;
    Ok(0)
}

fn coordinator(args: &CoordinatorArgs, limits: &Limits) -> Outcome {
    let plants = args.plants.iter().map(|f| load(f)).collect::<Result<Vec<_>, _>>()?;
    let seed: EventSet = args.events.iter().filter(|e| !e.is_empty()).cloned().collect();
    let (alphabet, coordinator) = if args.nonblocking {
        let nb = build_nonblocking_coordinator(&plants, &seed, limits)?;
        (nb.alphabet, nb.coordinator)
    } else {
        let alphabets: Vec<EventSet> = plants.iter().map(|g| g.alphabet().names()).collect();
        let mut a_k: EventSet = seed.union(&shared_events(&alphabets)).cloned().collect();
        if let Some(spec) = &args.spec {
            a_k = extend_for_cd(&load(spec)?, &alphabets, &a_k, limits)?;
        }
        let global = ops::union_alphabet(&plants)?;
        (a_k.clone(), build_coordinator(&plants, &global.restrict(&a_k)?, limits)?)
    };
    let automaton = io::AutomatonFile::from_generator(&coordinator);
    emit(
        args.out.as_deref(),
        &pretty(&json!({ "alphabet": alphabet, "coordinator": automaton })),
    )?;
    Ok(0)
}

fn config(limits: Limits) -> Config {
    Config {
        limits,
        ..Config::default()
    }
}

fn synthesize(args: &SynthesizeArgs, limits: Limits) -> Outcome {
    let spec = io::read_project(Path::new(&args.project))?;
    let mut config = config(limits);
    config.strict_conditions = args.strict_conditions;
    if args.group_only_coordinators {
        config.coordinator_scope = CoordinatorScope::GroupOnly;
    }
    let started = Instant::now();
    let arts = run_combined_procedure(&spec, &config)?;
    let total = started.elapsed();
    let dir = PathBuf::from(&args.out);
    std::fs::create_dir_all(&dir).map_err(|e| coordsynth::Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    for (name, g) in arts.named() {
        io::write_generator(&dir.join(format!("{name}.json")), g)?;
    }
    io::write_text(&dir.join("report.json"), &pretty(&arts.report))?;
    let steps: Vec<_> = arts
        .step_durations
        .iter()
        .map(|(step, d)| json!({ "through_step": step, "seconds": d.as_secs_f64() }))
        .collect();
    io::write_text(
        &dir.join("timings.json"),
        &pretty(&json!({ "steps": steps, "total_seconds": total.as_secs_f64() })),
    )?;
    match args.report {
        ReportFormat::Json => print!("{}", pretty(&arts.report)),
        ReportFormat::Text => print!("{}", render::report_text(&arts)),
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifyReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    within_specification: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nonblocking: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditionally_controllable: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditionally_normal: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    supremal: Option<SupremalVerdict>,
}

fn verify(args: &VerifyArgs, limits: Limits) -> Outcome {
    let spec = io::read_project(Path::new(&args.project))?;
    let config = config(limits);
    let h = build_hierarchy(&spec, &config)?;
    let m = io::read_generator(&Path::new(&args.result).join("final.json"))?;
    let mut report = VerifyReport {
        within_specification: None,
        nonblocking: None,
        conditionally_controllable: None,
        conditionally_normal: None,
        supremal: None,
    };
    let mut holds = true;
    if matches!(args.mode, VerifyMode::Properties | VerifyMode::All) {
        let inside = ops::is_subset(&m, &spec.specification)?.is_none();
        let nonblocking = nonblocking_or_empty(&m);
        let cc = h.is_3level_cc(&m, &limits)?;
        let cn = h.is_3level_cn(&m, &limits)?;
        holds &= inside && nonblocking && cc.holds && cn.holds;
        report.within_specification = Some(inside);
        report.nonblocking = Some(nonblocking);
        report.conditionally_controllable = Some(cc);
        report.conditionally_normal = Some(cn);
    }
    let mut inconclusive = false;
    if matches!(args.mode, VerifyMode::Supremal | VerifyMode::All) {
        if !ops::is_prefix_closed(&spec.specification) {
            if args.mode == VerifyMode::Supremal {
                return Err(coordsynth::Error::Precondition(
                    "maximality is only defined for a prefix-closed specification".into(),
                )
                .into());
            }
        } else {
            let bounds = MaximalityBounds {
                max_len: args.max_len,
                ..MaximalityBounds::default()
            };
            let v = verify_3level_supremal(&m, &h, &bounds, &limits)?;
            holds &= v.holds();
            inconclusive = v.is_inconclusive();
            report.supremal = Some(v);
        }
    }
    print!("{}", pretty(&report));
    Ok(if inconclusive {
        EXIT_RESOURCE
    } else if holds {
        0
    } else {
        EXIT_FALSE
    })
}

fn seed_range(text: &str) -> Result<std::ops::Range<u64>, Failure> {
    let bad = || Failure::Usage(format!("seed range `{text}` is not `a..b` or `a..=b`"));
    let (lo, hi, inclusive) = if let Some((a, b)) = text.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = text.split_once("..") {
        (a, b, false)
    } else {
        return Err(bad());
    };
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    let hi = if inclusive { hi.checked_add(1).ok_or_else(bad)? } else { hi };
    if hi < lo {
        return Err(bad());
    }
    Ok(lo..hi)
}

#[derive(Serialize)]
struct FuzzSummary {
    instances: usize,
    passed: usize,
    failed: usize,
    inconclusive: usize,
    failures: Vec<u64>,
    inconclusive_seeds: Vec<u64>,
}

fn fuzz(args: &FuzzArgs, limits: Limits) -> Outcome {
    let range = seed_range(&args.seeds)?;
    let params: InstanceParams = io::parse_json(&io::read_text(Path::new(&args.params))?, &args.params)?;
    params.validate()?;
    let config = config(limits);
    let bounds = MaximalityBounds::default();
    let records: Vec<InstanceCheck> = range
        .into_par_iter()
        .map(|seed| check_instance(&params.with_seed(seed), &config, &bounds))
        .collect();
    let failures: Vec<u64> = records.iter().filter(|r| !r.passed()).map(|r| r.seed).collect();
    let inconclusive_seeds: Vec<u64> = records.iter().filter(|r| r.inconclusive()).map(|r| r.seed).collect();
    let summary = FuzzSummary {
        instances: records.len(),
        passed: records.len() - failures.len() - inconclusive_seeds.len(),
        failed: failures.len(),
        inconclusive: inconclusive_seeds.len(),
        failures,
        inconclusive_seeds,
    };
    if let Some(out) = &args.out {
        io::write_text(Path::new(out), &pretty(&json!({ "summary": summary, "records": records })))?;
    }
    print!("{}", pretty(&summary));
    Ok(if summary.failed > 0 {
        EXIT_FALSE
    } else if summary.inconclusive > 0 {
        EXIT_RESOURCE
    } else {
        0
    })
}
