//! The `jacfrac` command line: thin wrappers over the library with file I/O,
//! exit codes and policy warnings.
//!
//! Exit codes: 0 success (warnings allowed), 2 input error, 3 precondition
//! error, 4 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::abel::{
    derivative_stability, estimate_decay, residual, solve, zm_condition, DecayReport, QBound,
};
use crate::error::{Error, Result};
use crate::fracops::{apply_signed, FracOrder, Side};
use crate::io::{fmt_f64, read_coeffs, read_grid, write_coeffs, write_matrix, Format};
use crate::jacobi::{basis_is_admissible, basis_range, JacobiBasis};
use crate::opmatrix::{assemble, stability_cap, STABILITY_CAP_ENV};
use crate::quadrature::{analyze, analyze_grid, CoeffVector};
use crate::selfcheck::{run_selfcheck, Fault};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "jacfrac", version, about = "Jacobi-spectral fractional calculus and Abel equation solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expand sampled data or a builtin function in the Jacobi basis
    Transform(Opts),
    /// Export the signed operational matrix (negative --alpha: derivative)
    Matrix(Opts),
    /// Fractional integral of a coefficient file
    Fracint(Opts),
    /// Fractional derivative of a coefficient file
    Fracder(Opts),
    /// Solve the Abel equation I^alpha psi = f for coefficient data f
    Abel(Opts),
    /// Decay, integrability and basis-window diagnostics of coefficient data
    Diagnose(Opts),
    /// Run the built-in consistency suites
    Selfcheck(SelfcheckOpts),
}

#[derive(Debug, Args)]
struct Opts {
    /// Left interval endpoint
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    a: f64,
    /// Right interval endpoint
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    b: f64,
    /// Weight exponent at a
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    /// Weight exponent at b
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
    /// Fractional order
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Operator side
    #[arg(long, default_value = "left", value_parser = ["left", "right"])]
    side: String,
    /// Truncation degree N
    #[arg(long)]
    n: Option<usize>,
    /// Input file (CSV samples for transform, coefficient file otherwise)
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Builtin function: one, power:MU, runge, exp
    #[arg(long)]
    builtin: Option<String>,
    /// Exponents q for the integrability test (diagnose)
    #[arg(long = "q", value_delimiter = ',', allow_hyphen_values = true)]
    q: Vec<f64>,
}

#[derive(Debug, Args)]
struct SelfcheckOpts {
    /// Deliberately corrupt one ingredient to confirm the suites catch it
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

/// Maps a library error to the documented exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) | Error::Interpolation(_) | Error::BasisMismatch(_) => {
            EXIT_INPUT
        }
        Error::Domain(_)
        | Error::Index(_)
        | Error::InvalidBasis(_)
        | Error::OrderRange(_)
        | Error::Precondition(_)
        | Error::Resource { .. } => EXIT_PRECONDITION,
        Error::Pole(_) | Error::NonConvergence(_) | Error::Evaluation(_) | Error::DegenerateFit(_) => {
            EXIT_NUMERICAL
        }
    }
}

/// Runs the command line with explicit output streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let (cap, overridden) = stability_cap();
    if overridden {
        let _ = writeln!(
            stderr,
            "warning: {STABILITY_CAP_ENV}={cap} overrides the stability cap; unverified accuracy"
        );
    }
    let result = match cli.command {
        Command::Transform(o) => cmd_transform(&o, stderr),
        Command::Matrix(o) => cmd_matrix(&o, stderr),
        Command::Fracint(o) => cmd_apply(&o, false, stderr),
        Command::Fracder(o) => cmd_apply(&o, true, stderr),
        Command::Abel(o) => cmd_abel(&o, stderr),
        Command::Diagnose(o) => cmd_diagnose(&o),
        Command::Selfcheck(o) => cmd_selfcheck(&o),
    };
    match result {
        Ok(Outcome { text, path, code }) => {
            if let Some(p) = path {
                if let Err(e) = std::fs::write(&p, &text) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", p.display());
                    return EXIT_INPUT;
                }
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

struct Outcome {
    text: String,
    path: Option<PathBuf>,
    code: i32,
}

impl Outcome {
    fn ok(text: String, o: &Opts) -> Self {
        Outcome { text, path: o.out.clone(), code: EXIT_OK }
    }
}

fn format_of(o: &Opts) -> Format {
    o.format.parse().expect("clap restricts the values")
}

fn side_of(o: &Opts) -> Side {
    o.side.parse().expect("clap restricts the values")
}

fn flag_basis(o: &Opts) -> Result<JacobiBasis> {
    JacobiBasis::new(o.a, o.b, o.beta, o.gamma)
}

fn read_input(o: &Opts) -> Result<String> {
    let path = o
        .input
        .as_ref()
        .ok_or_else(|| Error::Parse { line: 0, message: "--in is required".into() })?;
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn input_coeffs(o: &Opts) -> Result<CoeffVector> {
    let text = read_input(o)?;
    let fallback = flag_basis(o).ok();
    read_coeffs(&text, fallback.as_ref())
}

fn require_n(o: &Opts) -> Result<usize> {
    o.n.ok_or_else(|| Error::Parse { line: 0, message: "--n is required".into() })
}

fn require_alpha(o: &Opts) -> Result<f64> {
    o.alpha.ok_or_else(|| Error::Parse { line: 0, message: "--alpha is required".into() })
}

fn check_cap(n: usize) -> Result<()> {
    let (cap, _) = stability_cap();
    if n > cap {
        return Err(Error::Precondition(format!(
            "truncation {n} exceeds the stability cap {cap}; set {STABILITY_CAP_ENV} to override"
        )));
    }
    Ok(())
}

fn warn_admissibility(basis: &JacobiBasis, stderr: &mut dyn Write) {
    if !basis_is_admissible(basis) {
        let _ = writeln!(
            stderr,
            "warning: basis (beta={}, gamma={}) is outside Lemma 1 admissibility window",
            fmt_f64(basis.beta()),
            fmt_f64(basis.gamma())
        );
    }
}

/// The builtin test functions, in interval coordinates x ∈ [a, b].
pub fn builtin_function(name: &str, basis: &JacobiBasis) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    let (a, b) = (basis.a(), basis.b());
    match name {
        "one" => Ok(Box::new(|_| 1.0)),
        "exp" => Ok(Box::new(f64::exp)),
        "runge" => Ok(Box::new(move |x| {
            let t = (2.0 * x - a - b) / (b - a);
            1.0 / (1.0 + 25.0 * t * t)
        })),
        other => {
            let mu = other
                .strip_prefix("power:")
                .and_then(|m| m.parse::<f64>().ok())
                .filter(|m| m.is_finite() && *m >= 0.0)
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("unknown builtin '{other}' (one, power:MU with MU >= 0, runge, exp)"),
                })?;
            Ok(Box::new(move |x| (x - a).max(0.0).powf(mu)))
        }
    }
}

fn cmd_transform(o: &Opts, _stderr: &mut dyn Write) -> Result<Outcome> {
    let basis = flag_basis(o)?;
    let n = require_n(o)?;
    if n < 1 {
        return Err(Error::Precondition("transform needs N >= 1".into()));
    }
    let c = match (&o.builtin, &o.input) {
        (Some(name), None) => {
            let f = builtin_function(name, &basis)?;
            analyze(f, &basis, n)?
        }
        (None, Some(_)) => {
            let grid = read_grid(&read_input(o)?)?;
            analyze_grid(&grid, &basis, n)?
        }
        _ => {
            return Err(Error::Parse {
                line: 0,
                message: "give exactly one of --builtin and --in".into(),
            })
        }
    };
    Ok(Outcome::ok(write_coeffs(&c, format_of(o)), o))
}

fn cmd_matrix(o: &Opts, _stderr: &mut dyn Write) -> Result<Outcome> {
    let basis = flag_basis(o)?;
    let n = require_n(o)?;
    let alpha = require_alpha(o)?;
    check_cap(n)?;
    let m = assemble(&basis, alpha, side_of(o), n)?;
    Ok(Outcome::ok(write_matrix(&m, format_of(o)), o))
}

fn cmd_apply(o: &Opts, derivative: bool, stderr: &mut dyn Write) -> Result<Outcome> {
    let psi = input_coeffs(o)?;
    let alpha = require_alpha(o)?;
    let n_out = o.n.unwrap_or(psi.len() - 1);
    let signed = if derivative {
        FracOrder::derivative(alpha)?.signed()
    } else if alpha == 0.0 {
        0.0
    } else {
        FracOrder::integral(alpha)?.signed()
    };
    if signed != 0.0 {
        check_cap(n_out.max(psi.len() - 1))?;
    }
    warn_admissibility(psi.basis(), stderr);
    let out = apply_signed(&psi, signed, side_of(o), n_out)?;
    Ok(Outcome::ok(write_coeffs(&out, format_of(o)), o))
}

fn qbound_json(q: QBound) -> Value {
    match q {
        QBound::None => Value::Null,
        QBound::Below(v) => json!(v),
        QBound::Unbounded => json!("inf"),
    }
}

fn decay_json(r: &Result<DecayReport>) -> Value {
    match r {
        Ok(d) => json!({
            "lambda_hat": d.lambda_hat,
            "s": d.s,
            "q_bound": qbound_json(d.q_bound),
            "regime": d.regime.to_string(),
            "fit_range": [d.fit_range.start(), d.fit_range.end()],
            "fit_residual": d.fit_residual,
            "skipped": d.skipped,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn cmd_abel(o: &Opts, stderr: &mut dyn Write) -> Result<Outcome> {
    let f = input_coeffs(o)?;
    let alpha = require_alpha(o)?;
    let n = o.n.unwrap_or(f.len() - 1);
    check_cap(n.max(f.len() - 1))?;
    warn_admissibility(f.basis(), stderr);
    let psi = solve(&f, alpha, n)?;
    let decay = estimate_decay(&psi, None);
    let res = residual(&f, &psi, alpha)?;
    let report = json!({
        "alpha": alpha,
        "N": n,
        "decay": decay_json(&decay),
        "residual": {
            "coefficient_norm": res.coefficient_norm,
            "pointwise_sup": res.pointwise_sup,
            "value": res.value(),
        },
    });
    let text = match format_of(o) {
        Format::Json => {
            let mut doc: Value = serde_json::from_str(&write_coeffs(&psi, Format::Json))
                .expect("own output parses");
            doc["report"] = report;
            serde_json::to_string(&doc).expect("serializable") + "\n"
        }
        Format::Csv => {
            let mut t = write_coeffs(&psi, Format::Csv);
            t.push_str(&format!("# report {}\n", serde_json::to_string(&report).expect("serializable")));
            t
        }
    };
    Ok(Outcome::ok(text, o))
}

fn cmd_diagnose(o: &Opts) -> Result<Outcome> {
    let c = input_coeffs(o)?;
    let basis = *c.basis();
    let range = basis_range(basis.beta(), basis.gamma())?;
    let finite_or_inf = |v: f64| if v.is_finite() { json!(v) } else { json!("inf") };
    let qs = if o.q.is_empty() { vec![2.0, 3.0, 4.0] } else { o.q.clone() };
    let decay = estimate_decay(&c, None);
    let lambda = decay.as_ref().ok().map(|d| d.lambda_hat);
    let zm = qs
        .iter()
        .map(|&q| {
            let z = zm_condition(&c, q, lambda)?;
            Ok(json!({
                "q": q,
                "omega_q": z.omega_q,
                "exponent": z.exponent,
                "convergent": z.convergent,
            }))
        })
        .collect::<Result<Vec<Value>>>()?;
    let mut doc = json!({
        "basis": { "a": basis.a(), "b": basis.b(), "beta": basis.beta(), "gamma": basis.gamma() },
        "basis_range": { "lower": finite_or_inf(range.lower), "upper": finite_or_inf(range.upper) },
        "lemma1_admissible": basis_is_admissible(&basis),
        "decay": decay_json(&decay),
        "zm_condition": zm,
    });
    if let Some(alpha) = o.alpha {
        check_cap(c.len() - 1)?;
        let s = derivative_stability(&c, alpha)?;
        doc["derivative_stability"] = json!({ "norms": s.norms, "growth": s.growth });
    }
    let text = match format_of(o) {
        Format::Json => serde_json::to_string(&doc).expect("serializable") + "\n",
        Format::Csv => flatten_csv(&doc),
    };
    Ok(Outcome::ok(text, o))
}

/// `key,value` rows of a JSON document, nested keys joined by dots.
fn flatten_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), x, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix},{s}\n")),
            other => out.push_str(&format!("{prefix},{other}\n")),
        }
    }
    let mut out = String::from("key,value\n");
    walk("", v, &mut out);
    out
}

fn cmd_selfcheck(o: &SelfcheckOpts) -> Result<Outcome> {
    let fault = match o.inject_fault.as_deref() {
        None => None,
        Some("delta-sign") => Some(Fault::DeltaSign),
        Some(other) => {
            return Err(Error::Parse { line: 0, message: format!("unknown fault '{other}'") })
        }
    };
    let report = run_selfcheck(fault);
    let mut text = String::new();
    for s in &report {
        text.push_str(&format!(
            "{} {} {}\n",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.detail
        ));
    }
    let code = if report.iter().all(|s| s.passed) { EXIT_OK } else { EXIT_NUMERICAL };
    Ok(Outcome { text, path: None, code })
}
