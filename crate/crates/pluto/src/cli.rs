//! Command-line front end.

use crate::bilinear::{self, BilinearAlgorithm};
use crate::decode::{self, PeelConfig, SearchMode};
use crate::error::{invalid, Error, Result};
use crate::exec::{self, StragglerBehavior, StragglerSpec, WorkerPoolConfig};
use crate::fieldlin::{ScalarKind, DEFAULT_PRIME};
use crate::matroid::{self, Characteristic};
use crate::pluto::{self, PlutoCode};
use crate::scheme::{self, TaskSet};
use crate::sim::{self, Decoder};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "pluto", version, about = "Parity-checked fast matrix multiplication codes")]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `rational` or `fp:<p>`; rational decisions run over the default large prime.
    #[arg(long, global = true, default_value = "rational")]
    pub field: String,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bilinear algorithms.
    #[command(subcommand)]
    Alg(AlgCmd),
    /// Prime Pluto codes.
    #[command(subcommand)]
    Pluto(PlutoCmd),
    /// Composite task sets.
    #[command(subcommand)]
    Scheme(SchemeCmd),
    /// Erasure decoding.
    #[command(subcommand)]
    Decode(DecodeCmd),
    /// Corank-nullity polynomials.
    #[command(subcommand)]
    Matroid(MatroidCmd),
    /// Recovery-count distributions and thresholds.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Simulated manager/worker runs.
    #[command(subcommand)]
    Exec(ExecCmd),
}

#[derive(Subcommand, Debug)]
pub enum AlgCmd {
    List,
    Verify {
        #[arg(long)]
        name: String,
    },
    Export {
        #[arg(long)]
        name: String,
    },
    Import {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CodeSel {
    /// strassen, laderman or charon.
    #[arg(long, default_value = "strassen")]
    pub base: String,
    #[arg(long, default_value_t = 1)]
    pub checks: usize,
    /// Searched groups after the fixed Laderman groups.
    #[arg(long, default_value_t = 0)]
    pub extra: usize,
}

#[derive(Subcommand, Debug)]
pub enum PlutoCmd {
    Build(CodeSel),
    Verify {
        #[command(flatten)]
        sel: CodeSel,
        #[arg(long, default_value_t = 3)]
        max_erasures: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum SchemeCmd {
    Build {
        #[arg(long)]
        label: String,
    },
    Describe {
        #[arg(long)]
        label: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Oracle,
    Peel,
    PeelLocal,
}

impl DecoderArg {
    fn decoder(self) -> Decoder {
        match self {
            DecoderArg::Oracle => Decoder::Oracle,
            DecoderArg::Peel => Decoder::Peel(PeelConfig::default()),
            DecoderArg::PeelLocal => Decoder::Peel(PeelConfig::local()),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum DecodeCmd {
    /// Decodability of one erasure pattern (0-based task ids).
    Test {
        #[arg(long)]
        scheme: String,
        #[arg(long, value_delimiter = ',')]
        missing: Vec<usize>,
    },
    StoppingSets {
        #[arg(long)]
        scheme: String,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        /// Sample this many random erasure orders instead of exhaustive search.
        #[arg(long)]
        sampled: Option<usize>,
        #[arg(long, value_enum, default_value_t = DecoderArg::Peel)]
        decoder: DecoderArg,
    },
    /// Union-theorem sweeps on the 7·7 core with the β group.
    Theorems,
}

#[derive(Subcommand, Debug)]
pub enum MatroidCmd {
    Poly {
        #[arg(long, default_value = "strassen")]
        alg: String,
        /// generic, 2, 3 or another prime.
        #[arg(long = "char", default_value = "generic")]
        characteristic: String,
        #[arg(long)]
        augment: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum SimCmd {
    Exact {
        #[arg(long)]
        scheme: String,
        #[arg(long, value_enum, default_value_t = DecoderArg::Oracle)]
        decoder: DecoderArg,
        #[arg(long, default_value_t = sim::DEFAULT_BUDGET)]
        budget: u64,
    },
    Mc {
        #[arg(long)]
        scheme: String,
        #[arg(long, default_value_t = sim::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = DecoderArg::Oracle)]
        decoder: DecoderArg,
    },
    Thresholds,
}

#[derive(Subcommand, Debug)]
pub enum ExecCmd {
    Demo {
        #[arg(long, default_value = "9x9+53")]
        scheme: String,
        #[arg(long, default_value_t = 32)]
        block: usize,
        /// A count of random stragglers, or comma-separated 0-based task ids.
        #[arg(long, default_value = "4")]
        stragglers: String,
        #[arg(long, default_value_t = false)]
        respond_last: bool,
    },
}

struct Ctx {
    format: Format,
    out: Option<PathBuf>,
    seed: u64,
    field: ScalarKind,
    threads: usize,
}

impl Ctx {
    fn emit(&self, value: &Value, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(value)? + "\n",
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let e = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
                w.write_record(header).map_err(e)?;
                for r in rows {
                    w.write_record(r).map_err(e)?;
                }
                String::from_utf8(w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?).unwrap()
            }
        };
        match &self.out {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }

    fn scheme(&self, label: &str) -> Result<TaskSet> {
        let mut ts = scheme::named_strategy(label)?;
        if let ScalarKind::Prime(p) = self.field {
            if ts.modulus.is_some_and(|m| m != p) {
                return Err(Error::UnsupportedField(format!("{label} is defined modulo {}", ts.modulus.unwrap())));
            }
            ts.modulus = Some(p);
        }
        Ok(ts)
    }
}

fn kv_rows(v: &Value) -> Vec<Vec<String>> {
    match v {
        Value::Object(m) => m
            .iter()
            .map(|(k, x)| vec![k.clone(), if let Value::String(s) = x { s.clone() } else { x.to_string() }])
            .collect(),
        other => vec![vec!["value".into(), other.to_string()]],
    }
}

fn build_code(sel: &CodeSel) -> Result<PlutoCode> {
    match sel.base.as_str() {
        "strassen" => {
            if sel.extra > 0 {
                return invalid("extra groups are searched only for laderman");
            }
            pluto::pluto_222(sel.checks)
        }
        "laderman" => pluto::pluto_333(sel.checks, sel.extra),
        "charon" => pluto::charon_code(),
        other => Err(Error::UnknownName(other.into())),
    }
}

fn algorithm(name: &str) -> Result<BilinearAlgorithm> {
    bilinear::builtin(name)
}

/// Parses arguments and runs one command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let field = ScalarKind::parse(&cli.field)?;
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if cli.threads.is_some() {
        // Ignored when a global pool already exists (repeated calls in one process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let ctx = Ctx { format: cli.format, out: cli.out.clone(), seed: cli.seed, field, threads };
    match cli.command {
        Command::Alg(c) => alg(&ctx, c),
        Command::Pluto(c) => pluto_cmd(&ctx, c),
        Command::Scheme(c) => scheme_cmd(&ctx, c),
        Command::Decode(c) => decode_cmd(&ctx, c),
        Command::Matroid(c) => matroid_cmd(&ctx, c),
        Command::Sim(c) => sim_cmd(&ctx, c),
        Command::Exec(c) => exec_cmd(&ctx, c),
    }
}

fn alg(ctx: &Ctx, c: AlgCmd) -> Result<()> {
    match c {
        AlgCmd::List => {
            let rows: Vec<Vec<String>> = bilinear::BUILTIN_NAMES.iter().map(|n| vec![n.to_string()]).collect();
            ctx.emit(&json!(bilinear::BUILTIN_NAMES), &["name"], rows)
        }
        AlgCmd::Verify { name } => {
            let a = algorithm(&name)?;
            let (status, violations) = match bilinear::verify_brent(&a) {
                Ok(()) => ("pass", 0),
                Err(v) => ("fail", v.len()),
            };
            let v = json!({"name": a.name, "dims": [a.dims.l, a.dims.m, a.dims.n], "rank": a.r(), "status": status, "violations": violations});
            if ctx.format == Format::Json {
                ctx.emit(&v, &[], vec![])
            } else {
                ctx.emit(&v, &["name", "status"], vec![vec![a.name.clone(), status.into()]])
            }?;
            if status == "fail" {
                return Err(Error::InvalidInput(format!("{name} fails Brent verification")));
            }
            Ok(())
        }
        AlgCmd::Export { name } => {
            let doc = bilinear::export_algorithm(&algorithm(&name)?);
            let v = serde_json::to_value(&doc)?;
            ctx.emit(&v, &["key", "value"], kv_rows(&v))
        }
        AlgCmd::Import { file } => {
            let text = std::fs::read_to_string(&file)?;
            let a = bilinear::import_algorithm_json(&text)?;
            let ok = bilinear::verify_brent(&a).is_ok();
            let v = json!({"name": a.name, "dims": [a.dims.l, a.dims.m, a.dims.n], "rank": a.r(), "brent": ok});
            ctx.emit(&v, &["key", "value"], kv_rows(&v))
        }
    }
}

fn pluto_cmd(ctx: &Ctx, c: PlutoCmd) -> Result<()> {
    match c {
        PlutoCmd::Build(sel) => {
            let doc = pluto::export_pluto(&build_code(&sel)?);
            let v = serde_json::to_value(&doc)?;
            ctx.emit(&v, &["key", "value"], kv_rows(&v))
        }
        PlutoCmd::Verify { sel, max_erasures } => {
            let code = build_code(&sel)?;
            let correctable = decode::correctable_counts(&code.oracle(), max_erasures);
            let rows = correctable
                .iter()
                .map(|(e, ok, t)| vec![e.to_string(), ok.to_string(), t.to_string(), format!("{:.6}", *ok as f64 / *t as f64)])
                .collect();
            let v = if sel.base == "charon" {
                json!({"n": code.n(), "correctable": correctable})
            } else {
                serde_json::to_value(pluto::verify_claims(&code, max_erasures))?
            };
            ctx.emit(&v, &["erasures", "correctable", "total", "fraction"], rows)
        }
    }
}

fn describe(ts: &TaskSet) -> Value {
    let axis = ts.lines.iter().filter(|l| l.kind == scheme::LineKind::Axis).count();
    json!({
        "label": ts.label,
        "dims": [ts.dims.l, ts.dims.m, ts.dims.n],
        "tasks": ts.n(),
        "core": ts.core.len(),
        "levels": ts.levels.len(),
        "axis_lines": axis,
        "beta_lines": ts.lines.len() - axis,
        "naive": ts.dims.l * ts.dims.m * ts.dims.n,
        "wealthy": ts.n() <= ts.dims.l * ts.dims.m * ts.dims.n,
    })
}

fn scheme_cmd(ctx: &Ctx, c: SchemeCmd) -> Result<()> {
    match c {
        SchemeCmd::Build { label } => {
            let ts = ctx.scheme(&label)?;
            let v = serde_json::to_value(scheme::export_scheme(&ts))?;
            let rows = (0..ts.n()).map(|t| vec![t.to_string(), ts.task_name(t), ts.is_core()[t].to_string()]).collect();
            ctx.emit(&v, &["id", "task", "core"], rows)
        }
        SchemeCmd::Describe { label } => {
            let v = describe(&ctx.scheme(&label)?);
            ctx.emit(&v, &["key", "value"], kv_rows(&v))
        }
    }
}

fn decode_cmd(ctx: &Ctx, c: DecodeCmd) -> Result<()> {
    match c {
        DecodeCmd::Test { scheme: label, missing } => {
            let ts = ctx.scheme(&label)?;
            if missing.iter().any(|&m| m >= ts.n()) {
                return invalid("task id out of range");
            }
            let mut avail = vec![true; ts.n()];
            missing.iter().for_each(|&m| avail[m] = false);
            let oracle = ts.oracle().decodable(&avail);
            let state = decode::peel(&ts, &avail, PeelConfig::default());
            let v = json!({
                "scheme": ts.label,
                "missing": missing.iter().map(|&m| ts.task_name(m)).collect::<Vec<_>>(),
                "oracle": oracle,
                "peel_complete": state.complete,
                "inferred": state.inferred.iter().map(|&m| ts.task_name(m)).collect::<Vec<_>>(),
                "events": state.events,
            });
            ctx.emit(&v, &["key", "value"], kv_rows(&v))
        }
        DecodeCmd::StoppingSets { scheme: label, max_size, sampled, decoder } => {
            let ts = ctx.scheme(&label)?;
            let cfg = match decoder.decoder() {
                Decoder::Peel(c) => c,
                Decoder::Oracle => return invalid("stopping sets are defined for the peeling decoder"),
            };
            let mode = match sampled {
                Some(trials) => SearchMode::Sampled { trials, seed: ctx.seed },
                None => SearchMode::Exhaustive,
            };
            let r = decode::min_stopping_set(&ts, max_size, cfg, mode);
            let rows = r
                .sets
                .iter()
                .map(|s| vec![s.len().to_string(), s.iter().map(|&t| ts.task_name(t)).collect::<Vec<_>>().join(" ")])
                .collect();
            let mut v = serde_json::to_value(&r)?;
            v["names"] = json!(r.sets.iter().map(|s| s.iter().map(|&t| ts.task_name(t)).collect::<Vec<_>>()).collect::<Vec<_>>());
            ctx.emit(&v, &["size", "tasks"], rows)
        }
        DecodeCmd::Theorems => {
            let r = decode::verify_union_theorems();
            let v = serde_json::to_value(&r)?;
            let rows = vec![
                vec!["pair_systems".into(), r.pair_systems.0.to_string(), r.pair_systems.1.to_string()],
                vec!["square_systems".into(), r.square_systems.0.to_string(), r.square_systems.1.to_string()],
                vec!["reciprocal_sums".into(), r.reciprocal_sums.0.to_string(), r.reciprocal_sums.1.to_string()],
            ];
            ctx.emit(&v, &["check", "passed", "total"], rows)
        }
    }
}

fn matroid_cmd(ctx: &Ctx, c: MatroidCmd) -> Result<()> {
    let MatroidCmd::Poly { alg, characteristic, augment } = c;
    let ch = Characteristic::parse(&characteristic)?;
    let gm = matroid::decode_matroid_matrix(&algorithm(&alg)?, augment).with_characteristic(ch);
    let t = matroid::corank_nullity(&gm)?;
    let rows = t.triples().iter().map(|(i, j, c)| vec![i.to_string(), j.to_string(), c.to_string()]).collect();
    let v = json!({"alg": alg, "characteristic": ch.to_string(), "polynomial": t.to_string(), "terms": t.triples(), "t11": t.eval(1, 1)});
    ctx.emit(&v, &["i", "j", "coefficient"], rows)
}

fn dist_rows(d: &sim::RecoveryDistribution) -> Vec<Vec<String>> {
    d.cdf
        .iter()
        .enumerate()
        .map(|(k, c)| vec![k.to_string(), format!("{c:.6}"), d.mode.name().into(), d.label.clone(), d.decoder.name().into()])
        .collect()
}

const DIST_HEADER: [&str; 5] = ["k", "cdf", "mode", "scheme_label", "decoder"];

fn sim_cmd(ctx: &Ctx, c: SimCmd) -> Result<()> {
    match c {
        SimCmd::Exact { scheme: label, decoder, budget } => {
            let ts = ctx.scheme(&label)?;
            let d = sim::exact_distribution(&ts, decoder.decoder(), budget)?;
            let mut v = serde_json::to_value(d.summary())?;
            v["fractions"] = json!(d.fractions.as_ref().map(|f| f.iter().map(|(a, b)| format!("{a}/{b}")).collect::<Vec<_>>()));
            ctx.emit(&v, &DIST_HEADER, dist_rows(&d))
        }
        SimCmd::Mc { scheme: label, samples, decoder } => {
            let ts = ctx.scheme(&label)?;
            let d = sim::monte_carlo(&ts, samples, ctx.seed, decoder.decoder());
            ctx.emit(&serde_json::to_value(d.summary())?, &DIST_HEADER, dist_rows(&d))
        }
        SimCmd::Thresholds => {
            let rows = sim::thresholds_table(&sim::table_one_inputs());
            let mut buf = Vec::new();
            sim::write_thresholds_csv(&rows, &mut buf)?;
            match ctx.format {
                Format::Json => ctx.emit(&serde_json::to_value(&rows)?, &[], vec![]),
                Format::Csv => {
                    let text = String::from_utf8(buf).unwrap();
                    match &ctx.out {
                        Some(p) => std::fs::write(p, text)?,
                        None => print!("{text}"),
                    }
                    Ok(())
                }
            }
        }
    }
}

fn exec_cmd(ctx: &Ctx, c: ExecCmd) -> Result<()> {
    let ExecCmd::Demo { scheme: label, block, stragglers, respond_last } = c;
    let ts = scheme::named_strategy(&label)?;
    let spec = if stragglers.contains(',') || stragglers.is_empty() {
        StragglerSpec::Explicit(
            stragglers
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.trim().parse().map_err(|_| Error::InvalidInput(format!("bad straggler id {s}"))))
                .collect::<Result<_>>()?,
        )
    } else {
        StragglerSpec::Random(stragglers.parse().map_err(|_| Error::InvalidInput(format!("bad straggler count {stragglers}")))?)
    };
    let cfg = WorkerPoolConfig {
        seed: ctx.seed,
        stragglers: spec,
        behavior: if respond_last { StragglerBehavior::RespondLast } else { StragglerBehavior::NeverRespond },
        threads: ctx.threads,
        peel: PeelConfig::default(),
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.seed);
    let d = ts.dims;
    let transcript = match ctx.field {
        ScalarKind::Prime(p) => {
            let a = exec::random_fp_grid(d.l, d.m, p, &mut rng);
            let b = exec::random_fp_grid(d.m, d.n, p, &mut rng);
            exec::run_job(&ts, &a, &b, &cfg)?.transcript
        }
        _ => {
            let a = exec::random_grid(d.l, d.m, block, &mut rng);
            let b = exec::random_grid(d.m, d.n, block, &mut rng);
            exec::run_job(&ts, &a, &b, &cfg)?.transcript
        }
    };
    let judge = sim::Judge::new(&ts, Decoder::Peel(cfg.peel));
    let sim_count = judge.recovery_count(&transcript.plan.sim_order()).filter(|&k| k <= transcript.plan.stream.len());
    let mut v = serde_json::to_value(&transcript)?;
    v["sim_recovery_count"] = json!(sim_count);
    let rows = transcript
        .events
        .iter()
        .map(|e| vec![e.arrivals.to_string(), format!("{:?}", e.event.rule), e.names.join(" ")])
        .collect();
    ctx.emit(&v, &["arrivals", "rule", "tasks"], rows)?;
    if !transcript.completed {
        eprintln!("stalled after {} arrivals", transcript.consumed.len());
    }
    let _ = DEFAULT_PRIME;
    Ok(())
}
