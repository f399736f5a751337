use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use corrmap::constructions::{infeasibility_witness, theorem1_trial, theorem2_trial, ConstructionError, DEFAULT_ALICE_SETTINGS};
use corrmap::mapping::{
    analytic_c_max, corollary1_partner, corollary3_partner, feasible, format_sig, map_m, map_n, region_csv,
    region_scan, MU_MAX,
};
use corrmap::states::{state_from_json, state_to_json, werner, DensityMatrix};
use corrmap::witnesses::{chsh_horodecki, f3_steering, negativity, werner_steerable_oracle, WitnessReport, F3_THRESHOLD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SIG_DIGITS: usize = 12;
const ENSEMBLE_SIZE: usize = 4;
const VERIFY_SAMPLES: usize = 50;

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "corrmap", version, about = "Maps between Bell nonlocality, steering and entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// qudit-qubit map toward the hidden-state description
    #[value(name = "M", alias = "m")]
    M,
    /// qubit-qudit map toward the separable description
    #[value(name = "N", alias = "n")]
    N,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every applicable witness on a state file.
    Analyze {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mix a state with its corollary partner.
    Map {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = MU_MAX)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Map even when (mu, c) lies outside the feasible region.
        #[arg(long)]
        force: bool,
    },
    /// Export the feasible-region boundary as CSV.
    Region {
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized construction-verification suite.
    Verify {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        theorem: u8,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// `dx2` for theorem 1, `2xd` for theorem 2, with d in {2, 3, 4}.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long, default_value_t = MU_MAX)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        /// Run even when (mu, c) lies outside the feasible region.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold scan over the Werner family.
    DemoWerner {
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

type CmdResult = Result<(), Failure>;

fn sig(x: f64) -> String {
    format_sig(x, SIG_DIGITS)
}

/// `x` rounded to the output precision, as a JSON number.
fn num(x: f64) -> Value {
    sig(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null)
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n.as_f64().map_or(Value::Number(n), num),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

/// Write to `path` via a temp file in the same directory, or to stdout.
fn emit(path: Option<&Path>, text: &str) -> CmdResult {
    let Some(path) = path else {
        print!("{text}");
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| Failure::input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn load_state(path: &Path) -> Result<DensityMatrix, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    state_from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn check_unit(name: &str, x: f64) -> CmdResult {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Failure::input(format!("--{name} = {x} must lie in [0, 1]")))
    }
}

fn c_max_text(mu: f64) -> String {
    analytic_c_max(mu).map_or_else(|_| "none (mu > 1/sqrt(3))".into(), sig)
}

fn infeasible_message(mu: f64, c: f64) -> String {
    format!(
        "infeasible parameters: mu = {}, c = {} exceeds analytic_c_max(mu) = {}",
        sig(mu),
        sig(c),
        c_max_text(mu)
    )
}

fn cmd_analyze(state: &Path, out: Option<&Path>) -> CmdResult {
    let rho = load_state(state)?;
    let report = WitnessReport::analyze(&rho).map_err(|e| Failure::input(e.to_string()))?;
    let value = serde_json::to_value(report).expect("report serializes");
    emit(out, &pretty(&round_json(value)))
}

fn cmd_map(state: &Path, mode: Mode, mu: f64, c: f64, out: Option<&Path>, force: bool) -> CmdResult {
    check_unit("mu", mu)?;
    check_unit("c", c)?;
    let rho = load_state(state)?;
    let (da, db) = rho.dims();
    match mode {
        Mode::M if db != 2 => return Err(Failure::input(format!("mode M needs a qubit on B, got {da}x{db}"))),
        Mode::N if da != 2 => return Err(Failure::input(format!("mode N needs a qubit on A, got {da}x{db}"))),
        _ => {}
    }
    let ok = feasible(mu, c);
    if !ok && !force {
        return Err(Failure { code: EXIT_INFEASIBLE, message: infeasible_message(mu, c) });
    }
    let mapped = match mode {
        Mode::M => corollary1_partner(&rho, c).and_then(|p| map_m(&rho, &p, mu)),
        Mode::N => corollary3_partner(&rho, c).and_then(|p| map_n(&rho, &p, mu)),
    }
    .map_err(|e| Failure::input(e.to_string()))?;
    let verdict = if ok {
        format!("feasible: mu = {}, c = {}, analytic_c_max = {}", sig(mu), sig(c), c_max_text(mu))
    } else {
        format!("forced: {}", infeasible_message(mu, c))
    };
    let text: Value = serde_json::from_str(&state_to_json(&mapped)).expect("state JSON round-trips");
    emit(out, &pretty(&round_json(text)))?;
    if out.is_some() {
        println!("{verdict}");
    } else {
        eprintln!("{verdict}");
    }
    Ok(())
}

fn cmd_region(grid: usize, tol: f64, out: Option<&Path>) -> CmdResult {
    if grid < 2 {
        return Err(Failure::input(format!("--grid = {grid} must be at least 2")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Failure::input(format!("--tol = {tol} must be positive")));
    }
    let points = region_scan(grid, tol).map_err(|e| Failure::input(e.to_string()))?;
    emit(out, &region_csv(&points))
}

fn parse_dims(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::input(format!("--dims \"{text}\" is not of the form AxB"));
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    theorem: u8,
    trials: usize,
    seed: u64,
    tol: f64,
    dims: Option<&str>,
    mu: f64,
    c: f64,
    force: bool,
    out: Option<&Path>,
) -> CmdResult {
    check_unit("mu", mu)?;
    check_unit("c", c)?;
    if trials == 0 {
        return Err(Failure::input("--trials must be at least 1"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Failure::input(format!("--tol = {tol} must be positive")));
    }
    let (da, db) = match dims {
        Some(t) => parse_dims(t)?,
        None if theorem == 1 => (3, 2),
        None => (2, 3),
    };
    let d = if theorem == 1 { (db == 2).then_some(da) } else { (da == 2).then_some(db) };
    let d = d.filter(|d| (2..=4).contains(d)).ok_or_else(|| {
        let shape = if theorem == 1 { "dx2" } else { "2xd" };
        Failure::input(format!("theorem {theorem} needs dims {shape} with d in {{2, 3, 4}}, got {da}x{db}"))
    })?;
    if !feasible(mu, c) {
        if !force {
            return Err(Failure { code: EXIT_INFEASIBLE, message: infeasible_message(mu, c) });
        }
        let witness_dim = if theorem == 1 { d } else { 2 };
        if let Some(w) = infeasibility_witness(witness_dim, mu, c).map_err(|e| Failure::input(e.to_string()))? {
            let report = json!({
                "theorem": theorem,
                "dims": [da, db],
                "mu": mu,
                "c": c,
                "trials": 0,
                "pass": false,
                "witness": { "vertex": w.vertex, "norm_sq": w.norm_sq },
            });
            emit(out, &pretty(&round_json(report)))?;
            return Err(Failure {
                code: EXIT_VERIFY,
                message: format!(
                    "unphysical hidden state at response vertex {:?}: |r|^2 = {}",
                    w.vertex,
                    sig(w.norm_sq)
                ),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for trial in 0..trials {
        let v = if theorem == 1 {
            theorem1_trial(&mut rng, d, ENSEMBLE_SIZE, mu, c, DEFAULT_ALICE_SETTINGS, tol)
        } else {
            theorem2_trial(&mut rng, d, ENSEMBLE_SIZE, mu, c, VERIFY_SAMPLES, tol)
        };
        match v {
            Ok(v) => worst = worst.max(v.max_residual),
            Err(e @ (ConstructionError::UnphysicalHiddenState { .. } | ConstructionError::UnphysicalAliceState { .. })) => {
                return Err(Failure { code: EXIT_VERIFY, message: format!("trial {trial}: {e}") });
            }
            Err(e) => return Err(Failure::input(format!("trial {trial}: {e}"))),
        }
    }
    let pass = worst <= tol;
    let report = json!({
        "theorem": theorem,
        "dims": [da, db],
        "mu": mu,
        "c": c,
        "trials": trials,
        "max_residual": worst,
        "tol": tol,
        "pass": pass,
    });
    emit(out, &pretty(&round_json(report)))?;
    if pass {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY, message: format!("max residual {} exceeds tol {}", sig(worst), sig(tol)) })
    }
}

fn bool_text(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn cmd_demo_werner(steps: usize, out: Option<&Path>) -> CmdResult {
    if steps < 2 {
        return Err(Failure::input(format!("--steps = {steps} must be at least 2")));
    }
    let err = |e: &dyn std::fmt::Display| Failure::input(e.to_string());
    let mut csv = String::from(
        "p,negativity_sigma,f3_tau,chsh_tau,steerable_rho_oracle,entangled_sigma_implies_steerable_tau,\
         steerable_rho_implies_nonlocal_tau\n",
    );
    let mut violations = 0;
    for i in 0..steps {
        let p = i as f64 / (steps - 1) as f64;
        let tau = werner(p).map_err(|e| err(&e))?;
        let sigma = corollary3_partner(&tau, 0.0).and_then(|p| map_n(&tau, &p, MU_MAX)).map_err(|e| err(&e))?;
        let neg = negativity(&sigma).map_err(|e| err(&e))?;
        let f3 = f3_steering(&tau).map_err(|e| err(&e))?;
        let chsh = chsh_horodecki(&tau).map_err(|e| err(&e))?;
        let oracle = werner_steerable_oracle(p * MU_MAX).map_err(|e| err(&e))?;
        let first = neg <= 0.0 || f3 > F3_THRESHOLD;
        let second = !oracle || chsh > 2.0;
        violations += usize::from(!first) + usize::from(!second);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            sig(p),
            sig(neg),
            sig(f3),
            sig(chsh),
            bool_text(oracle),
            bool_text(first),
            bool_text(second)
        );
    }
    emit(out, &csv)?;
    if violations > 0 {
        return Err(Failure { code: EXIT_VERIFY, message: format!("{violations} implication violations") });
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Analyze { state, out } => cmd_analyze(&state, out.as_deref()),
        Command::Map { state, mode, mu, c, out, force } => cmd_map(&state, mode, mu, c, out.as_deref(), force),
        Command::Region { grid, tol, out } => cmd_region(grid, tol, out.as_deref()),
        Command::Verify { theorem, trials, seed, tol, dims, mu, c, force, out } => {
            cmd_verify(theorem, trials, seed, tol, dims.as_deref(), mu, c, force, out.as_deref())
        }
        Command::DemoWerner { steps, out } => cmd_demo_werner(steps, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
