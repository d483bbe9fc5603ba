use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use stokes_poisson::io as sio;
use stokes_poisson::monodromy::{compute_stokes, pushforward_bracket, IntegratorConfig, PushforwardOptions};
use stokes_poisson::stokes_bracket::{braid_apply, bracket_table, casimirs, casimirs_n4_explicit, KAPPA};
use stokes_poisson::verify::{checks_to_json, run_suite, Suite, VerifyOptions};
use stokes_poisson::{flows, Error, C64};

/// Stokes matrices, their Poisson bracket and the monodromy map.
#[derive(Parser, Debug)]
#[command(name = "stokes-poisson", version, about)]
struct Cli {
    /// Write JSON here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stokes matrix of d/dz - U - V/z from a {"v", "u", "psi"?} document.
    Stokes {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Bracket table {s_p, s_q} of a {"s"} document.
    Bracket {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        kappa: KappaArg,
    },
    /// Finite-difference pushforward of the so(n) bracket at a {"v", "u"} document.
    Pushforward {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        solver: SolverArgs,
        /// Relative finite-difference step.
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[command(flatten)]
        kappa: KappaArg,
    },
    /// Apply a braid word to a Stokes matrix.
    Braid {
        /// {"s", "word"} document, or a {"s"} document when --word is given.
        #[command(flatten)]
        input: InputArg,
        /// Signed 1-based generators, e.g. "1 -2 3".
        #[arg(long, allow_hyphen_values = true)]
        word: Option<String>,
    },
    /// Characteristic-polynomial coefficients of S^-1 S^T.
    Casimirs {
        #[command(flatten)]
        input: InputArg,
    },
    /// Transport V along a deformation path and report conserved quantities.
    Flow {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run the randomised verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Random inputs per algebraic check.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Random inputs per numerical check.
        #[arg(long, default_value_t = 3)]
        numeric_samples: usize,
        #[command(flatten)]
        kappa: KappaArg,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args, Debug)]
struct InputArg {
    /// JSON input file; "-" or absent reads standard input.
    #[arg(long, short)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KappaArg {
    /// Bracket constant: "ipi", "2ipi" or "RE,IM".
    #[arg(long, default_value = "ipi")]
    kappa: String,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Matching radius for the asymptotic initial data.
    #[arg(long)]
    radius: Option<f64>,
    /// Order of the asymptotic series.
    #[arg(long)]
    order: Option<usize>,
}

impl SolverArgs {
    fn config(&self) -> Result<IntegratorConfig, Error> {
        let mut cfg = IntegratorConfig::default();
        if let Some(x) = self.rel_tol {
            cfg.rel_tol = x;
        }
        if let Some(x) = self.abs_tol {
            cfg.abs_tol = x;
        }
        if let Some(x) = self.radius {
            cfg.matching_radius = Some(x);
        }
        if let Some(x) = self.order {
            cfg.asymptotic_order = x;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_kappa(text: &str) -> Result<C64, Error> {
    match text.trim() {
        "ipi" => return Ok(KAPPA),
        "2ipi" => return Ok(KAPPA * 2.0),
        _ => {}
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().ok().filter(|x| x.is_finite());
    match parts.as_slice() {
        [re, im] => match (num(re), num(im)) {
            (Some(a), Some(b)) => Ok(C64::new(a, b)),
            _ => Err(Error::Invalid(format!("kappa {text:?}: parts must be finite numbers"))),
        },
        _ => Err(Error::Invalid(format!("kappa {text:?}: expected ipi, 2ipi or RE,IM"))),
    }
}

fn read_input(arg: &InputArg) -> Result<String, Error> {
    let read_err = |e: io::Error| Error::Invalid(format!("cannot read input: {e}"));
    match &arg.input {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p).map_err(read_err),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(read_err)?;
            Ok(s)
        }
    }
}

fn write_output(path: &Option<PathBuf>, doc: &Value) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Error::Invalid(e.to_string()))?;
    text.push('\n');
    let write_err = |e: io::Error| Error::Invalid(format!("cannot write output: {e}"));
    match path {
        Some(p) => fs::write(p, text).map_err(write_err),
        None => io::stdout().write_all(text.as_bytes()).map_err(write_err),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("STOKES_POISSON_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // A second initialisation only fails if a pool already exists.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Returns the JSON document and whether the command succeeded.
fn run(cli: &Cli) -> Result<(Value, bool), Error> {
    match &cli.command {
        Command::Stokes { input, solver } => {
            let doc = sio::parse_skew_document(&read_input(input)?)?;
            let r = compute_stokes(&doc.v, &doc.u, &solver.config()?)?;
            Ok((sio::stokes_result_to_json(&r), true))
        }
        Command::Bracket { input, kappa } => {
            let s = sio::parse_stokes_document(&read_input(input)?)?;
            let k = parse_kappa(&kappa.kappa)?;
            Ok((sio::bracket_table_to_json(&bracket_table(&s, k), k), true))
        }
        Command::Pushforward { input, solver, step, kappa } => {
            let doc = sio::parse_skew_document(&read_input(input)?)?;
            let cfg = solver.config()?;
            let k = parse_kappa(&kappa.kappa)?;
            let t = pushforward_bracket(&doc.v, &doc.u, &cfg, PushforwardOptions { step: *step })?;
            let s = compute_stokes(&doc.v, &doc.u, &cfg)?.s;
            let reference = bracket_table(&s, k);
            let mut out = sio::bracket_table_to_json(&t, k);
            out["stokes"] = sio::stokes_matrix_to_json(&s);
            out["relative_error"] = json!(t.relative_distance(&reference, 1e-3));
            Ok((out, true))
        }
        Command::Braid { input, word } => {
            let text = read_input(input)?;
            let (s, w) = match word {
                Some(wtext) => {
                    let s = sio::parse_stokes_document(&text)?;
                    let w = sio::parse_braid_word(wtext)?;
                    w.check(s.n())?;
                    (s, w)
                }
                None => sio::parse_braid_document(&text)?,
            };
            let t = braid_apply(&s, &w)?;
            Ok((sio::versioned(json!({ "s": sio::stokes_matrix_to_json(&t) })), true))
        }
        Command::Casimirs { input } => {
            let s = sio::parse_stokes_document(&read_input(input)?)?;
            let cs: Vec<Value> = casimirs(&s)?.into_iter().map(sio::complex_to_json).collect();
            let mut out = json!({ "coefficients": cs });
            if s.n() == 4 {
                let (c1, c2) = casimirs_n4_explicit(&s)?;
                out["c1"] = sio::complex_to_json(c1);
                out["c2"] = sio::complex_to_json(c2);
            }
            Ok((sio::versioned(out), true))
        }
        Command::Flow { input, solver } => {
            let doc = sio::parse_flow_document(&read_input(input)?)?;
            let r = flows::conservation_report(&doc.v, &doc.path, &solver.config()?)?;
            Ok((sio::conservation_report_to_json(&r), true))
        }
        Command::Verify { suite, seed, samples, numeric_samples, kappa, solver } => {
            let opts = VerifyOptions {
                seed: *seed,
                samples: *samples,
                numeric_samples: *numeric_samples,
                kappa: parse_kappa(&kappa.kappa)?,
                cfg: solver.config()?,
            };
            let checks = run_suite(suite.parse::<Suite>()?, &opts)?;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                eprintln!("[{tag}] {:<60} {:.3e} < {:.0e}", c.name, c.residual, c.threshold);
                if let Some(note) = &c.note {
                    eprintln!("       {note}");
                }
            }
            let passed = checks.iter().all(|c| c.passed);
            Ok((checks_to_json(&checks), passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli).and_then(|(doc, ok)| write_output(&cli.output, &doc).map(|_| ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
