//! Command-line front end. Reports go to the given writer as JSON (or CSV
//! where asked); code documents are written with `--out`.

use crate::approx::{approx_distance, build_approx, pigeonhole_collision_check};
use crate::combinatorics::{check_n_bounds, count_types, TypeSpace};
use crate::dist::Dist;
use crate::error::{invalid, Error, Result};
use crate::feedback::{
    build_feedback_code, eval_feedback_exact, eval_feedback_mc, feedback_counting_converse, retry_until_pass, target_test,
    DEFAULT_TABLE_BUDGET,
};
use crate::idcode::{
    build_multishot_achievable, eval_noiseless, eval_noiseless_mc, eval_perm_exact, eval_perm_mc, lift_set_system, BuildOptions,
    EvalOptions, NoiselessIdCode, DEFAULT_MATRIX_CAP,
};
use crate::io::{self, Count, Document};
use crate::rational::{format_ratio, parse_ratio, Prob};
use crate::rng::RootSeed;
use crate::setsystem::{
    exceeds_lemma6_threshold, greedy_gilbert, greedy_packing, johnson_bound_m, lemma6_inequality, prop2_bound_value, verify_profile,
    GilbertParams, GreedyOutcome, SetSystem,
};
use crate::transforms::{perm_to_noiseless, soft_converse_pipeline, GammaPreset};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "permid", version, about = "Identification codes over permutation channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Oneshot,
    Multishot,
    Fixed,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Root seed; falls back to PERMID_SEED.
    #[arg(long, env = "PERMID_SEED")]
    pub seed: Option<u64>,
}

impl SeedArg {
    fn require(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| invalid!("this subcommand draws randomness: pass --seed or set PERMID_SEED"))
    }
}

fn ratio_arg(s: &str) -> std::result::Result<Prob, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the types of length-n q-ary vectors and check the bounds on N.
    Types {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        /// List at most this many types.
        #[arg(long, default_value_t = 10_000)]
        list_limit: usize,
    },
    /// Greedy constant-weight set system with bounded intersections.
    Setsystem {
        #[arg(long = "N")]
        ground: usize,
        /// With --lambda: set size ⌊εN⌋ and cap ⌊λεN⌋.
        #[arg(long, value_parser = ratio_arg)]
        epsilon: Option<Prob>,
        #[arg(long, value_parser = ratio_arg)]
        lambda: Option<Prob>,
        /// Explicit set size (instead of --epsilon/--lambda).
        #[arg(long)]
        set_size: Option<usize>,
        /// Explicit intersection cap.
        #[arg(long)]
        cap: Option<usize>,
        /// Number of sets to aim for.
        #[arg(long = "M")]
        target: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        max_attempts: u64,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a code with λ1 = 0 over l uses of the channel.
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, value_parser = ratio_arg, required_unless_present = "lift")]
        epsilon: Option<Prob>,
        /// Upper limit on the number of messages.
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        log_base: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_attempts: u64,
        /// Lift this set system over [N^l] instead of drawing one.
        #[arg(long)]
        lift: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error probabilities of a code file.
    Eval {
        #[arg(long)]
        code: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_MATRIX_CAP)]
        matrix_cap: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Reduce a permutation-channel code to a constant-weight set system.
    Transform {
        #[arg(long)]
        code: PathBuf,
        #[arg(long, value_parser = ratio_arg, required_unless_present = "mu")]
        gamma: Option<Prob>,
        /// With --preset: γ derived from μ.
        #[arg(long, value_parser = ratio_arg)]
        mu: Option<Prob>,
        #[arg(long, value_enum, default_value = "oneshot")]
        preset: Preset,
        #[arg(long, value_parser = ratio_arg, default_value = "1/2")]
        alpha: Prob,
        /// Write the final set system here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximations at resolution K and the pigeonhole check.
    Approx {
        #[arg(long = "K")]
        atoms: u64,
        /// Code file whose encoders are approximated.
        #[arg(long, conflicts_with = "target")]
        code: Option<PathBuf>,
        /// Comma-separated "p/q" target distribution.
        #[arg(long, required_unless_present = "code")]
        target: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-phase feedback scheme.
    Feedback {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        l: usize,
        #[arg(long = "M")]
        m: usize,
        /// Report whether λ2 ≤ 2/N.
        #[arg(long)]
        target_test: bool,
        /// Stop the target test at the first failing pair.
        #[arg(long, requires = "target_test")]
        early_exit: bool,
        /// Redraw Φ until the target test passes, at most this many times.
        #[arg(long)]
        retry: Option<u64>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_MATRIX_CAP)]
        matrix_cap: usize,
        #[arg(long, default_value_t = DEFAULT_TABLE_BUDGET)]
        budget: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound evaluations and sweeps.
    Bounds {
        #[command(subcommand)]
        which: BoundCommand,
    },
}

/// Lists take the form `a,b,c` or `a..b` (inclusive) or `a..b:step`.
#[derive(Debug, Subcommand)]
pub enum BoundCommand {
    /// (1−α)·h2⁻¹(log2(M)/N) over a grid.
    Prop2 {
        #[arg(long = "N")]
        ground: String,
        #[arg(long = "M")]
        m: String,
        #[arg(long, value_parser = ratio_arg, default_value = "1/2")]
        alpha: Prob,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Check δ > (1−α)ε² on a set system file.
    Lemma6 {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_parser = ratio_arg, default_value = "1/2")]
        alpha: Prob,
    },
    /// Johnson bound over a grid.
    Johnson {
        #[arg(long = "N")]
        ground: String,
        #[arg(long)]
        d: String,
        #[arg(long)]
        w: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Bounds on the number of types over a grid.
    Types {
        #[arg(long)]
        n: String,
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// M < 2^(q^(nl)), the counting limit with feedback.
    Counting {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        l: u32,
        #[arg(long = "M")]
        m: String,
    },
}

fn parse_list(s: &str) -> Result<Vec<u64>> {
    let bad = || invalid!("cannot parse list {s:?}");
    if let Some((a, rest)) = s.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, st)) => (b, st.parse::<u64>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let (a, b) = (a.parse::<u64>().map_err(|_| bad())?, b.parse::<u64>().map_err(|_| bad())?);
        if step == 0 || a > b {
            return Err(bad());
        }
        return Ok((a..=b).step_by(step as usize).collect());
    }
    s.split(',').map(|t| t.trim().parse::<u64>().map_err(|_| bad())).collect()
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| invalid!("cannot read {}: {e}", path.display()))
}

fn load(path: &PathBuf) -> Result<(Document, Option<u64>)> {
    io::parse_document(&read(path)?)
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| invalid!("cannot write {}: {e}", path.display()))
}

fn write_err(e: std::io::Error) -> Result<()> {
    // a closed pipe downstream is not an error of ours
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        Ok(())
    } else {
        Err(invalid!("write failed: {e}"))
    }
}

fn emit(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable")).or_else(write_err)
}

fn emit_text(out: &mut dyn Write, s: &str) -> Result<()> {
    out.write_all(s.as_bytes()).or_else(write_err)
}

fn rows_out(out: &mut dyn Write, kind: &str, rows: Vec<Value>, format: Format) -> Result<()> {
    match format {
        Format::Json => emit(out, &json!({ "schema": io::SCHEMA, "kind": kind, "rows": rows })),
        Format::Csv => emit_text(out, &io::sweep_csv(&rows)),
    }
}

fn ratio(p: &Prob) -> Value {
    json!(format_ratio(p))
}

/// Runs one command line, writing its report to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => return emit_text(out, &e.to_string()),
        Err(e) => return Err(Error::InvalidParameter(e.to_string())),
    };
    dispatch(cli.command, out)
}

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Types { n, q, list_limit } => types(n, q, list_limit, out),
        Command::Setsystem {
            ground,
            epsilon,
            lambda,
            set_size,
            cap,
            target,
            max_attempts,
            seed,
            out: path,
        } => {
            let root = seed.require()?;
            let mut rng = RootSeed(root).stream("setsystem");
            let outcome = match (epsilon, lambda, set_size, cap) {
                (Some(e), Some(l), None, None) => greedy_gilbert(ground, &GilbertParams::new(e, l), target, max_attempts, &mut rng)?,
                (None, None, Some(s), Some(c)) => {
                    let t = target.ok_or_else(|| invalid!("--set-size/--cap need --M"))?;
                    greedy_packing(ground, s, c, t, max_attempts, &mut rng)?
                }
                _ => return Err(invalid!("give either --epsilon and --lambda, or --set-size and --cap")),
            };
            setsystem_report(&outcome, root, path, out)
        }
        Command::Build {
            n,
            q,
            l,
            epsilon,
            m,
            log_base,
            max_attempts,
            lift,
            seed,
            out: path,
        } => build(n, q, l, epsilon, m, log_base, max_attempts, lift, seed, path, out),
        Command::Eval {
            code,
            mode,
            trials,
            format,
            matrix_cap,
            seed,
        } => eval(code, mode, trials, format, matrix_cap, seed, out),
        Command::Transform {
            code,
            gamma,
            mu,
            preset,
            alpha,
            out: path,
        } => transform(code, gamma, mu, preset, alpha, path, out),
        Command::Approx {
            atoms,
            code,
            target,
            out: path,
        } => approx(atoms, code, target, path, out),
        Command::Feedback {
            n,
            q,
            l,
            m,
            target_test: test,
            early_exit,
            retry,
            mode,
            trials,
            matrix_cap,
            budget,
            seed,
            out: path,
        } => {
            let root = seed.require()?;
            let stream = RootSeed(root).stream("feedback");
            if let Some(max_draws) = retry {
                let r = retry_until_pass(n, q, l, m, &stream, max_draws, budget)?;
                if let Some(p) = path {
                    write_file(&p, &io::render_document(&Document::Feedback(r.code.clone()), Some(root)))?;
                }
                let mut v = io::collision_report_json(&r.report);
                v["kind"] = json!("feedback-retry");
                v["draws"] = json!(r.draws);
                v["passed"] = json!(r.passed);
                return emit(out, &v);
            }
            let code = build_feedback_code(n, q, l, m, &stream, budget)?;
            if let Some(p) = &path {
                write_file(p, &io::render_document(&Document::Feedback(code.clone()), Some(root)))?;
            }
            if test {
                let mut v = io::collision_report_json(&target_test(&code, early_exit)?);
                v["kind"] = json!("feedback-target-test");
                return emit(out, &v);
            }
            feedback_eval(&code, mode, trials, matrix_cap, root, out)
        }
        Command::Bounds { which } => bounds(which, out),
    }
}

fn types(n: usize, q: usize, list_limit: usize, out: &mut dyn Write) -> Result<()> {
    let count = count_types(n, q)?;
    let b = check_n_bounds(n, q)?;
    if !b.all_hold() {
        return Err(Error::BoundViolation(format!("bounds on N fail at n = {n}, q = {q}: {b:?}")));
    }
    let mut v = json!({
        "schema": io::SCHEMA,
        "kind": "types",
        "n": n,
        "q": q,
        "N": Count(count.clone()),
        "bounds": b,
    });
    if count <= BigUint::from(list_limit) {
        let space = TypeSpace::new(n, q)?;
        v["types"] = Value::Array(
            (0..space.len())
                .map(|t| {
                    json!({
                        "index": t,
                        "counts": space.type_at(t).counts(),
                        "class_size": Count(space.class_size(t).clone()),
                    })
                })
                .collect(),
        );
    }
    emit(out, &v)
}

fn setsystem_report(outcome: &GreedyOutcome, root: u64, path: Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    let p = verify_profile(&outcome.system)?;
    if p.delta > outcome.cap && p.m > 1 {
        return Err(Error::BoundViolation(format!("Δ = {} exceeds the cap {}", p.delta, outcome.cap)));
    }
    let mut v = json!({
        "schema": io::SCHEMA,
        "kind": "setsystem-report",
        "seed": root,
        "set_size": outcome.set_size,
        "cap": outcome.cap,
        "target": outcome.target,
        "attempts": outcome.attempts,
        "exhausted": outcome.exhausted,
        "profile": p,
        "ratio": ratio(&p.normalized()),
    });
    match path {
        Some(path) => write_file(&path, &io::render_document(&Document::SetSystem(outcome.system.clone()), Some(root)))?,
        None => v["sets"] = json!(outcome.system.sets()),
    }
    emit(out, &v)
}

#[allow(clippy::too_many_arguments)]
fn build(
    n: usize,
    q: usize,
    l: usize,
    epsilon: Option<Prob>,
    m: Option<usize>,
    log_base: f64,
    max_attempts: u64,
    lift: Option<PathBuf>,
    seed: SeedArg,
    path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<()> {
    let (code, mut v, root) = if let Some(file) = lift {
        let (doc, seed) = load(&file)?;
        let Document::SetSystem(sys) = doc else {
            return Err(invalid!("--lift needs a setsystem file"));
        };
        let code = lift_set_system(n, q, l, &sys)?;
        let v = json!({ "schema": io::SCHEMA, "kind": "build-report", "source": "lift", "M": code.m() });
        (code, v, seed)
    } else {
        let root = seed.require()?;
        let eps = epsilon.expect("required by clap");
        let opts = BuildOptions {
            requested_m: m,
            max_attempts,
            log_base,
        };
        let mut rng = RootSeed(root).stream("build");
        let (code, rep) = build_multishot_achievable(n, q, l, &eps, &mut rng, opts)?;
        let p = &rep.params;
        let v = json!({
            "schema": io::SCHEMA,
            "kind": "build-report",
            "source": "greedy",
            "seed": root,
            "n": n, "q": q, "l": l,
            "N": p.ground,
            "epsilon": ratio(&p.epsilon),
            "epsilon_prime": p.epsilon_prime,
            "lambda2_param": p.lambda2_param,
            "log_base": p.log_base,
            "set_size": p.set_size,
            "cap": p.cap,
            "target": rep.target,
            "M": rep.m,
            "attempts": rep.attempts,
            "exhausted": rep.exhausted,
            "lambda2_bound": ratio(&rep.lambda2_bound),
        });
        (code, v, Some(root))
    };
    let r = eval_perm_exact(&code, EvalOptions { matrix_cap: 0 });
    if !r.lambda1.is_zero() {
        return Err(Error::BoundViolation(format!("built code has λ1 = {}", format_ratio(&r.lambda1))));
    }
    if let Some(bound) = v.get("lambda2_bound").and_then(Value::as_str) {
        if r.lambda2 > parse_ratio(bound)? {
            return Err(Error::BoundViolation(format!("λ2 = {} exceeds {bound}", format_ratio(&r.lambda2))));
        }
    }
    v["lambda1"] = ratio(&r.lambda1);
    v["lambda2"] = ratio(&r.lambda2);
    if let Some(p) = path {
        write_file(&p, &io::render_document(&Document::Perm(code), root))?;
    }
    emit(out, &v)
}

fn as_noiseless(doc: &Document) -> Result<Option<NoiselessIdCode>> {
    Ok(match doc {
        Document::Noiseless(c) => Some(c.clone()),
        Document::SetSystem(s) => Some(NoiselessIdCode::from_supports(s.ground(), s.sets(), s.sets().to_vec())?),
        _ => None,
    })
}

fn eval(
    path: PathBuf,
    mode: Mode,
    trials: u64,
    format: Format,
    matrix_cap: usize,
    seed: SeedArg,
    out: &mut dyn Write,
) -> Result<()> {
    let (doc, file_seed) = load(&path)?;
    let opts = EvalOptions { matrix_cap };
    if let Document::Feedback(code) = &doc {
        let root = match mode {
            Mode::Mc => seed.seed.or(file_seed).ok_or_else(|| invalid!("Monte Carlo needs --seed"))?,
            Mode::Exact => 0,
        };
        return feedback_eval(code, mode, trials, matrix_cap, root, out);
    }
    match mode {
        Mode::Exact => {
            let r = match (&doc, as_noiseless(&doc)?) {
                (Document::Perm(c), _) => eval_perm_exact(c, opts),
                (_, Some(c)) => eval_noiseless(&c, opts),
                _ => return Err(invalid!("cannot evaluate a {} document", doc.kind())),
            };
            match format {
                Format::Json => emit(out, &io::exact_report_json(&r)),
                Format::Csv => emit_text(out, &io::exact_report_csv(&r)?),
            }
        }
        Mode::Mc => {
            let root = seed.require()?;
            let stream = RootSeed(root).stream("eval-mc");
            let r = match (&doc, as_noiseless(&doc)?) {
                (Document::Perm(c), _) => eval_perm_mc(c, trials, &stream, opts)?,
                (_, Some(c)) => eval_noiseless_mc(&c, trials, &stream, opts)?,
                _ => return Err(invalid!("cannot evaluate a {} document", doc.kind())),
            };
            match format {
                Format::Json => {
                    let mut v = io::mc_report_json(&r);
                    v["seed"] = json!(root);
                    emit(out, &v)
                }
                Format::Csv => emit_text(out, &io::mc_report_csv(&r)?),
            }
        }
    }
}

fn feedback_eval(
    code: &crate::feedback::FeedbackCode,
    mode: Mode,
    trials: u64,
    matrix_cap: usize,
    root: u64,
    out: &mut dyn Write,
) -> Result<()> {
    match mode {
        Mode::Exact => {
            let r = eval_feedback_exact(code, matrix_cap);
            let mut v = io::collision_report_json(&r);
            if let Some(c) = &r.counts {
                v["collisions"] = json!(c);
            }
            emit(out, &v)
        }
        Mode::Mc => {
            let r = eval_feedback_mc(code, trials, &RootSeed(root).stream("feedback-mc"), matrix_cap)?;
            if !r.lambda1.is_zero() {
                return Err(Error::BoundViolation("feedback code missed its own message".into()));
            }
            let mut v = io::mc_report_json(&r);
            v["seed"] = json!(root);
            emit(out, &v)
        }
    }
}

fn transform(
    path: PathBuf,
    gamma: Option<Prob>,
    mu: Option<Prob>,
    preset: Preset,
    alpha: Prob,
    system_out: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<()> {
    let (doc, _) = load(&path)?;
    let Document::Perm(code) = doc else {
        return Err(invalid!("transform needs a perm code"));
    };
    let gamma = match (gamma, mu) {
        (Some(g), _) => g,
        (None, Some(mu)) => {
            let p = match preset {
                Preset::Oneshot => GammaPreset::OneShot,
                Preset::Multishot => GammaPreset::MultiShot { blocks: code.blocks() },
                Preset::Fixed => GammaPreset::MultiShotFixed,
            };
            p.gamma(&mu, code.q())?
        }
        (None, None) => return Err(invalid!("give --gamma or --mu")),
    };
    let r = soft_converse_pipeline(&code, &gamma, &alpha)?;
    if let Some((bound, false)) = r.prop2 {
        return Err(Error::BoundViolation(format!(
            "Δ/Γ = {} is below the lower bound {bound}",
            format_ratio(&r.ratio())
        )));
    }
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            json!({
                "name": s.name,
                "M": s.m,
                "lambda1": ratio(&s.report.lambda1),
                "lambda2": ratio(&s.report.lambda2),
            })
        })
        .collect();
    let v = json!({
        "schema": io::SCHEMA,
        "kind": "pipeline-report",
        "gamma": ratio(&r.gamma),
        "kappa": r.kappa,
        "bins": r.bins,
        "loose_factor": r.loose_factor,
        "internal_factor": r.internal_factor,
        "vacuous_entries": r.vacuous_entries,
        "undecided_entries": r.undecided_entries,
        "steps": steps,
        "kept": r.kept,
        "profile": r.profile,
        "ratio": ratio(&r.ratio()),
        "distinct_sets": r.final_system.is_some(),
        "prop2": r.prop2.map(|(b, h)| json!({ "bound": b, "holds": h, "alpha": ratio(&alpha) })),
    });
    if let (Some(p), Some(sys)) = (system_out, &r.final_system) {
        write_file(&p, &io::render_document(&Document::SetSystem(sys.clone()), None))?;
    }
    emit(out, &v)
}

fn approx(atoms: u64, code: Option<PathBuf>, target: Option<String>, path: Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    if let Some(t) = target {
        let probs = t.split(',').map(parse_ratio).collect::<Result<Vec<_>>>()?;
        let target = Dist::new(probs)?;
        let map = build_approx(&target, atoms)?;
        let d = approx_distance(&map, &target)?;
        if let Some(p) = path {
            write_file(&p, &io::render_document(&Document::ApproxMap(map.clone()), None))?;
        }
        return emit(
            out,
            &json!({
                "schema": io::SCHEMA,
                "kind": "approx-report",
                "N": map.ground(),
                "K": atoms,
                "counts": map.counts(),
                "distance": ratio(&d),
                "bound": ratio(&Prob::new(map.ground().into(), atoms.into())),
            }),
        );
    }
    let (doc, _) = load(&code.expect("required by clap"))?;
    let nl = match (&doc, as_noiseless(&doc)?) {
        (Document::Perm(c), _) => perm_to_noiseless(c)?,
        (_, Some(c)) => c,
        _ => return Err(invalid!("cannot approximate a {} document", doc.kind())),
    };
    let r = pigeonhole_collision_check(&nl, atoms)?;
    let collisions: Vec<Value> = r
        .collisions
        .iter()
        .map(|c| json!({ "first": c.first, "second": c.second, "floor": ratio(&c.floor) }))
        .collect();
    emit(
        out,
        &json!({
            "schema": io::SCHEMA,
            "kind": "pigeonhole-report",
            "N": nl.ground(),
            "M": nl.m(),
            "K": atoms,
            "resolution_types": Count(r.resolution_types.clone()),
            "guaranteed": r.guaranteed,
            "distances": r.distances.iter().map(ratio).collect::<Vec<_>>(),
            "collisions": collisions,
            "best_floor": r.best_floor().map(ratio),
            "lambda": ratio(&r.lambda),
        }),
    )
}

fn bounds(which: BoundCommand, out: &mut dyn Write) -> Result<()> {
    match which {
        BoundCommand::Prop2 { ground, m, alpha, format } => {
            let mut rows = Vec::new();
            for n in parse_list(&ground)? {
                for mm in parse_list(&m)? {
                    let big = BigUint::from(mm);
                    let applicable = exceeds_lemma6_threshold(n as usize, &big, &alpha);
                    let bound = prop2_bound_value(n as usize, &big, &alpha).ok();
                    rows.push(json!({
                        "N": n, "M": mm, "alpha": format_ratio(&alpha),
                        "applicable": applicable, "bound": bound,
                    }));
                }
            }
            rows_out(out, "prop2-sweep", rows, format)
        }
        BoundCommand::Lemma6 { system, alpha } => {
            let (doc, _) = load(&system)?;
            let Document::SetSystem(sys) = doc else {
                return Err(invalid!("lemma6 needs a setsystem file"));
            };
            lemma6_report(&sys, &alpha, out)
        }
        BoundCommand::Johnson { ground, d, w, format } => {
            let mut rows = Vec::new();
            for n in parse_list(&ground)? {
                for dd in parse_list(&d)? {
                    for ww in parse_list(&w)? {
                        let b = johnson_bound_m(n, dd, ww);
                        rows.push(json!({
                            "N": n, "d": dd, "w": ww,
                            "applicable": b.is_ok(), "bound": b.ok(),
                        }));
                    }
                }
            }
            rows_out(out, "johnson-sweep", rows, format)
        }
        BoundCommand::Types { n, q, format } => {
            let mut rows = Vec::new();
            for nn in parse_list(&n)? {
                for qq in parse_list(&q)? {
                    let b = check_n_bounds(nn as usize, qq as usize)?;
                    if !b.all_hold() {
                        return Err(Error::BoundViolation(format!("bounds on N fail at n = {nn}, q = {qq}")));
                    }
                    rows.push(json!({
                        "n": nn, "q": qq, "N": count_types(nn as usize, qq as usize)?.to_string(),
                        "lower": b.lower, "upper": b.upper, "coarse": b.coarse,
                    }));
                }
            }
            rows_out(out, "types-sweep", rows, format)
        }
        BoundCommand::Counting { n, q, l, m } => {
            let big: BigUint = m.parse().map_err(|_| invalid!("M must be a nonnegative integer"))?;
            emit(
                out,
                &json!({
                    "schema": io::SCHEMA,
                    "kind": "counting-report",
                    "n": n, "q": q, "l": l, "M": m,
                    "holds": feedback_counting_converse(n, q, l, &big),
                }),
            )
        }
    }
}

fn lemma6_report(sys: &SetSystem, alpha: &Prob, out: &mut dyn Write) -> Result<()> {
    let p = verify_profile(sys)?;
    let applicable = exceeds_lemma6_threshold(p.ground, &BigUint::from(p.m), alpha);
    let holds = lemma6_inequality(&p, alpha);
    if applicable && !holds {
        return Err(Error::BoundViolation(format!("δ ≤ (1−α)ε² for a system of {} sets", p.m)));
    }
    emit(
        out,
        &json!({
            "schema": io::SCHEMA,
            "kind": "lemma6-report",
            "profile": p,
            "alpha": ratio(alpha),
            "applicable": applicable,
            "holds": holds,
        }),
    )
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BoundViolation(_) => 3,
        Error::InvalidParameter(_) => 2,
        _ => 1,
    }
}

/// Machine-readable error document.
pub fn error_json(e: &Error) -> String {
    json!({
        "schema": io::SCHEMA,
        "error": { "kind": e.kind(), "message": e.to_string() },
    })
    .to_string()
}
