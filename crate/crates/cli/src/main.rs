//! `ergoclass` command line: thin shells over the library operations.
//!
//! Exit codes: 0 when the command completed (verdicts are in the output),
//! 1 for usage errors and invalid models, 2 for numerical failures.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ergoclass::chain::{Generator, SharedGenerator, TargetSet};
use ergoclass::classifier::{classify, ClassifyConfig, VerdictRule};
use ergoclass::moments::{exp_moment_scan, ladder_sweeps, parse_schedule, MomentSweep};
use ergoclass::simulator::{estimate_moments, SimConfig, DEFAULT_MAX_JUMPS};
use ergoclass::single_birth::{
    build_tableau, ergodicity_explicit, recurrence_explicit, strong_explicit, uniform_catastrophe_bound,
};
use ergoclass::witness::{
    gen_nonalgebraic_witness, gen_nonergodic_witness, gen_nonexp_witness, gen_nonstrong_witness, moment_source,
    verify_witness, NonExpOptions, NonExpOutcome, WitnessKind, WitnessSequence, DEFAULT_WITNESS_TOL,
};
use ergoclass::zoo::{builtin, catalog, ModelSpec};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ergoclass", version, about = "Ergodicity classification of countable-state Markov chains")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Built-in model name, or @FILE with a model specification.
    #[arg(long)]
    model: String,
    /// Model parameters as JSON, or @FILE.
    #[arg(long)]
    params: Option<String>,
    /// Shorthand for params.gamma.
    #[arg(long)]
    gamma: Option<f64>,
    /// Shorthand for params.family (catastrophe models).
    #[arg(long)]
    family: Option<String>,
    /// Target set H as a comma list.
    #[arg(long = "H", default_value = "0")]
    h: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full hierarchy report from truncation sweeps.
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long = "L", default_value_t = 3)]
        l: usize,
        #[arg(long = "lambda-grid")]
        lambda_grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Skip the exponential scan.
        #[arg(long)]
        skip_exponential: bool,
    },
    /// Moment ladder sweeps for orders 1..=L.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long = "L", default_value_t = 2)]
        l: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Exponential-moment sweeps over a rate grid.
    Expmoment {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long = "lambda-grid")]
        lambda_grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Explicit single-birth criteria.
    Sbp {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Tableau depth.
        #[arg(long = "K", default_value_t = 65536)]
        k: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Generate or check witness sequences.
    Witness {
        #[command(subcommand)]
        cmd: WitnessCmd,
    },
    /// Monte Carlo return-time moments.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Polynomial orders 1..=L.
        #[arg(long = "L", default_value_t = 2)]
        l: usize,
        #[arg(long = "lambda-grid")]
        lambda_grid: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_JUMPS)]
        max_jumps: u64,
    },
    /// Built-in model catalog.
    Zoo {
        #[command(subcommand)]
        cmd: ZooCmd,
    },
}

#[derive(Subcommand)]
enum WitnessCmd {
    Gen {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// non_ergodic | non_strong | non_algebraic | non_exponential
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long)]
        schedule: Option<String>,
        /// Finite moment order for non_algebraic witnesses.
        #[arg(long, default_value_t = 1)]
        ell: usize,
        /// First target value for non_exponential witnesses.
        #[arg(long, default_value_t = 1)]
        first: usize,
        /// Level budget 2^max_exponent for non_exponential witnesses.
        #[arg(long, default_value_t = 20)]
        max_exponent: u32,
    },
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Witness file.
        #[arg(long)]
        witness: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WITNESS_TOL)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum ZooCmd {
    List {
        #[command(flatten)]
        output: OutputArgs,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn numerical(e: impl ToString) -> Failure {
    Failure::Numerical(e.to_string())
}

fn read_arg(s: &str) -> Outcome<String> {
    match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}"))),
        None => Ok(s.to_string()),
    }
}

fn load_model(m: &ModelArgs) -> Outcome<(SharedGenerator, TargetSet)> {
    let gen = if m.model.starts_with('@') {
        ModelSpec::from_json(&read_arg(&m.model)?).and_then(|s| s.build()).map_err(usage)?
    } else {
        let mut params = match &m.params {
            Some(p) => serde_json::from_str::<Value>(&read_arg(p)?).map_err(|e| usage(format!("--params: {e}")))?,
            None => json!({}),
        };
        let obj = params.as_object_mut().ok_or_else(|| usage("--params must be a JSON object"))?;
        if let Some(g) = m.gamma {
            obj.insert("gamma".into(), json!(g));
        }
        if let Some(f) = &m.family {
            obj.insert("family".into(), json!(f));
        }
        builtin(&m.model, &params).map_err(usage)?
    };
    let members = m
        .h
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| usage(format!("--H: bad state {t:?}"))))
        .collect::<Outcome<Vec<_>>>()?;
    let h = TargetSet::new(members).map_err(usage)?;
    Ok((gen, h))
}

fn parse_grid(s: &Option<String>) -> Outcome<Option<Vec<f64>>> {
    s.as_ref()
        .map(|g| {
            g.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("--lambda-grid: bad rate {t:?}"))))
                .collect()
        })
        .transpose()
}

fn schedule_or_default(s: &Option<String>) -> Outcome<Vec<usize>> {
    match s {
        Some(s) => parse_schedule(s).map_err(usage),
        None => Ok(ClassifyConfig::default().schedule),
    }
}

fn rule(tol: Option<f64>) -> VerdictRule {
    tol.map_or_else(VerdictRule::default, |t| VerdictRule::default().with_tol(t))
}

fn schedule_for(gen: &dyn Generator, s: &Option<String>) -> Outcome<Vec<usize>> {
    let cfg = ClassifyConfig::default().with_schedule(schedule_or_default(s)?);
    Ok(ergoclass::classifier::resolve_schedule(gen, &cfg))
}

/// Rendered output: pretty JSON, or CSV rows under a header.
struct Rendered {
    json: Value,
    csv: Vec<Vec<String>>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output serializes")
}

fn emit(r: Rendered, out: &OutputArgs) -> Outcome<()> {
    let text = match out.format {
        Format::Json => serde_json::to_string_pretty(&r.json).expect("json") + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &r.csv {
                w.write_record(row).map_err(numerical)?;
            }
            String::from_utf8(w.into_inner().map_err(numerical)?).expect("utf8")
        }
    };
    match &out.out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn row<I: IntoIterator<Item = T>, T: ToString>(items: I) -> Vec<String> {
    items.into_iter().map(|x| x.to_string()).collect()
}

fn sweep_rows(sweeps: &[MomentSweep], csv: &mut Vec<Vec<String>>) {
    for s in sweeps {
        let label = match s.kind {
            ergoclass::moments::SweepKind::Ordinary => "1".to_string(),
            ergoclass::moments::SweepKind::Ladder { order } => order.to_string(),
            ergoclass::moments::SweepKind::Exponential { lambda } => lambda.to_string(),
        };
        for l in &s.levels {
            csv.push(row([label.clone(), l.level.to_string(), l.x_h.to_string(), l.m_n.to_string()]));
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.cmd {
        Command::Classify { model, output, schedule, l, lambda_grid, tol, skip_exponential } => {
            let (gen, h) = load_model(&model)?;
            let config = ClassifyConfig {
                schedule: schedule_or_default(&schedule)?,
                lambda_grid: parse_grid(&lambda_grid)?,
                rule: rule(tol),
                skip_exponential,
                ..ClassifyConfig::default()
            };
            let report = classify(gen.as_ref(), &h, l, &config).map_err(numerical)?;
            let mut csv = vec![row(["tier", "status", "verdict", "grade", "source", "note"])];
            for (name, t) in report.tiers() {
                csv.push(row([
                    name,
                    format!("{:?}", t.status),
                    t.verdict.state.to_string(),
                    format!("{:?}", t.grade),
                    t.source.clone(),
                    t.note.clone().unwrap_or_default(),
                ]));
            }
            emit(Rendered { json: to_value(&report), csv }, &output)
        }
        Command::Moments { model, output, schedule, l, tol } => {
            let (gen, h) = load_model(&model)?;
            if l == 0 {
                return Err(usage("--L must be at least 1"));
            }
            let levels = schedule_for(gen.as_ref(), &schedule)?;
            let sweeps = ladder_sweeps(gen.as_ref(), &h, l, &levels);
            let r = rule(tol);
            let verdicts: Vec<Value> = sweeps
                .iter()
                .enumerate()
                .map(|(k, s)| json!({"order": k + 1, "x_h": s.h_verdict(&r), "m_n": s.m_verdict(&r)}))
                .collect();
            let json = json!({
                "schema": 1, "model": gen.name(), "target": h.members(), "schedule": levels,
                "sweeps": sweeps, "verdicts": verdicts,
            });
            let mut csv = vec![row(["order", "level", "x_h", "m_n"])];
            sweep_rows(&sweeps, &mut csv);
            emit(Rendered { json, csv }, &output)
        }
        Command::Expmoment { model, output, schedule, lambda_grid, tol } => {
            let (gen, h) = load_model(&model)?;
            let levels = schedule_for(gen.as_ref(), &schedule)?;
            let grid = parse_grid(&lambda_grid)?;
            let curve = exp_moment_scan(gen.as_ref(), &h, grid.as_deref(), &levels, &rule(tol)).map_err(numerical)?;
            let json = json!({
                "schema": 1, "model": gen.name(), "target": h.members(), "schedule": levels,
                "converged_lambda": curve.converged_lambda(), "curve": curve,
            });
            let mut csv = vec![row(["lambda", "level", "x_h", "m_n"])];
            let sweeps: Vec<MomentSweep> = curve.points.iter().map(|p| p.sweep.clone()).collect();
            sweep_rows(&sweeps, &mut csv);
            emit(Rendered { json, csv }, &output)
        }
        Command::Sbp { model, output, k, tol } => {
            let (gen, _) = load_model(&model)?;
            let sb = gen.single_birth().ok_or_else(|| usage(format!("{} is not a single-birth model", gen.name())))?;
            let r = rule(tol);
            let t = build_tableau(sb, k).map_err(numerical)?;
            let recurrence = recurrence_explicit(&t, &r).map_err(numerical)?;
            let ergodicity = ergodicity_explicit(&t, &r).map_err(numerical)?;
            let (strong, strong_note) = match strong_explicit(&t, &ergodicity, &r) {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let mut csv = vec![row(["quantity", "level", "value"])];
            for (name, samples) in [("recurrence", &recurrence.samples), ("d_sup", &ergodicity.samples)] {
                for (n, v) in samples {
                    csv.push(row([name.to_string(), n.to_string(), v.to_string()]));
                }
            }
            if let Some(s) = &strong {
                for (n, v) in &s.samples {
                    csv.push(row(["strong".to_string(), n.to_string(), v.to_string()]));
                }
            }
            let json = json!({
                "schema": 1, "model": gen.name(), "depth": t.depth(), "mode": t.mode(),
                "cross_check": t.cross_check, "recurrence": recurrence, "ergodicity": ergodicity,
                "d_hat": ergodicity.estimate, "strong": strong, "strong_note": strong_note,
                "uniform_catastrophe_bound": uniform_catastrophe_bound(sb, k),
            });
            emit(Rendered { json, csv }, &output)
        }
        Command::Witness { cmd: WitnessCmd::Gen { model, output, kind, count, schedule, ell, first, max_exponent } } => {
            let (gen, h) = load_model(&model)?;
            let kind: WitnessKind = kind.parse().map_err(usage)?;
            let levels = schedule.as_ref().map(|s| parse_schedule(s).map_err(usage)).transpose()?;
            let g = gen.as_ref();
            let (seq, extra) = match kind {
                WitnessKind::NonErgodic => (gen_nonergodic_witness(g, &h, count, levels.as_deref()), Value::Null),
                WitnessKind::NonStrong => (gen_nonstrong_witness(g, &h, count, levels.as_deref()), Value::Null),
                WitnessKind::NonAlgebraic => {
                    (gen_nonalgebraic_witness(g, &h, ell, count, levels.as_deref()), Value::Null)
                }
                WitnessKind::NonExponential => {
                    let opts = NonExpOptions { first, max_exponent, ..NonExpOptions::default() };
                    match gen_nonexp_witness(g, &h, count, &opts).map_err(numerical)? {
                        NonExpOutcome::Witness { sequence, info, skipped, stopped } => (
                            Ok(sequence),
                            json!({"outcome": "witness", "info": info, "skipped": skipped, "stopped": stopped}),
                        ),
                        no => {
                            let json = json!({"schema": 1, "model": g.name(), "generation": no});
                            return emit(Rendered { json, csv: vec![row(["outcome"]), row(["no_witness"])] }, &output);
                        }
                    }
                }
            };
            let seq = seq.map_err(numerical)?;
            let mut json = to_value(&seq);
            let obj = json.as_object_mut().expect("object");
            obj.insert("schema".into(), json!(1));
            obj.insert("model".into(), json!(g.name()));
            if !extra.is_null() {
                obj.insert("generation".into(), extra);
            }
            let mut csv = vec![row(["term", "lambda", "state", "value"])];
            for (k, t) in seq.terms.iter().enumerate() {
                let lambda = seq.lambdas.get(k).map_or(String::new(), |l| l.to_string());
                for (s, v) in &t.support {
                    csv.push(row([k.to_string(), lambda.clone(), s.to_string(), v.to_string()]));
                }
            }
            emit(Rendered { json, csv }, &output)
        }
        Command::Witness { cmd: WitnessCmd::Check { model, output, witness, tol } } => {
            let (gen, h) = load_model(&model)?;
            let text = std::fs::read_to_string(&witness).map_err(|e| usage(format!("{}: {e}", witness.display())))?;
            let w = WitnessSequence::from_json(&text).map_err(usage)?;
            let table = match (w.kind, w.ell) {
                (WitnessKind::NonAlgebraic, Some(ell)) if ell > 0 => {
                    let top = w.terms.iter().filter_map(|t| t.last_state()).max().unwrap_or(0);
                    Some(moment_source(gen.as_ref(), &h, ell, top + 1).map_err(numerical)?)
                }
                _ => None,
            };
            let report = verify_witness(gen.as_ref(), &h, &w, tol, table.as_deref()).map_err(usage)?;
            let mut csv = vec![row(["term", "max_violation", "worst_state", "checked_states", "statistic", "lambda"])];
            for t in &report.terms {
                csv.push(row([
                    t.index.to_string(),
                    t.max_violation.to_string(),
                    t.worst_state.map_or(String::new(), |s| s.to_string()),
                    t.checked_states.to_string(),
                    t.statistic.to_string(),
                    t.lambda.map_or(String::new(), |l| l.to_string()),
                ]));
            }
            emit(Rendered { json: to_value(&report), csv }, &output)
        }
        Command::Simulate { model, output, start, samples, l, lambda_grid, seed, max_jumps } => {
            let (gen, h) = load_model(&model)?;
            let orders: Vec<usize> = (1..=l).collect();
            let lambdas = parse_grid(&lambda_grid)?.unwrap_or_default();
            let cfg = SimConfig { max_jumps, ..SimConfig::default() };
            let est = estimate_moments(gen.as_ref(), &h, start, &orders, &lambdas, samples, seed, &cfg).map_err(|e| {
                match e {
                    ergoclass::simulator::SimError::AllCensored(_) => numerical(e),
                    _ => usage(e),
                }
            })?;
            let mut csv = vec![row(["quantity", "parameter", "mean", "se", "note"])];
            for m in &est.polynomial {
                let note = if m.heavy_tail { "heavy_tail" } else { "" };
                csv.push(row(["moment".to_string(), m.order.to_string(), m.mean.to_string(), m.se.to_string(), note.into()]));
            }
            for e in &est.exponential {
                csv.push(row([
                    "exp_moment".to_string(),
                    e.lambda.to_string(),
                    e.mean.map_or(String::new(), |m| m.to_string()),
                    e.se.map_or(String::new(), |s| s.to_string()),
                    e.refused.clone().unwrap_or_default(),
                ]));
            }
            let mut json = to_value(&est);
            json.as_object_mut().expect("object").insert("model".into(), json!(gen.name()));
            emit(Rendered { json, csv }, &output)
        }
        Command::Zoo { cmd: ZooCmd::List { output } } => {
            let entries = catalog();
            let mut csv = vec![row(["id", "model", "params", "recurrent", "ergodic", "exponential", "strong"])];
            let show = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
            for e in &entries {
                csv.push(row([
                    e.id.clone(),
                    e.model.clone(),
                    e.params.to_string(),
                    show(e.asserted.recurrent),
                    show(e.asserted.ergodic),
                    show(e.asserted.exponential),
                    show(e.asserted.strong),
                ]));
            }
            emit(Rendered { json: json!({"schema": 1, "models": entries}), csv }, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
