//! Command-line surface: generation, verification, invariants, equivalence,
//! row completion, family sampling and classification runs.
//!
//! Exit codes: 0 success / positive answer, 1 negative mathematical result
//! (not Hadamard, inequivalent, no solutions, no completion), 2 usage or
//! input error.

use clap::{Parser, Subcommand, ValueEnum};
use hadamard_lab::catalogue::{
    self, dita_d6, fourier, load_affine_family, m6_discrete, m6_discrete_parameter,
    m6_family_with_eps, tao_s6, AffineFamilyData, DEFAULT_SINGULAR_EPS,
};
use hadamard_lab::classify::{
    classify_real_diagonal, parse_diag_pattern, solve, DiagSlot, SolveOptions, SymmetricAnsatz,
};
use hadamard_lab::completion::{complete_row, CompletionPair};
use hadamard_lab::equivalence::{
    are_equivalent, lambda_separation, lambda_set, EquivalenceOptions,
};
use hadamard_lab::io::{matrix_to_phases_json, matrix_to_rect_json, raw_from_str};
use hadamard_lab::{CHMatrix, Error, Tolerances, UnitComplex};
use std::f64::consts::{PI, TAU};
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

// tolerate a closed stdout (e.g. piping into `head`)
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("stdout: {e}");
        }
    }};
}

#[derive(Parser)]
#[command(
    name = "hadamard-lab",
    version,
    about = "Construct, verify, classify and compare 6x6 complex Hadamard matrices",
    after_help = "Matrix arguments accept a file path or '-' for stdin, in either JSON form:\n\
                  {\"n\":6,\"phases_turns\":[[..],..]} or {\"n\":6,\"entries\":[[{\"re\":..,\"im\":..},..],..]}.\n\
                  HADAMARD_LAB_THREADS sets the worker count (default: available parallelism)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Unimodularity tolerance
    #[arg(long, global = true)]
    tol_entry: Option<f64>,
    /// Orthogonality (Gram) tolerance
    #[arg(long, global = true)]
    tol_gram: Option<f64>,
    /// Invariant-set bucketing tolerance
    #[arg(long, global = true)]
    tol_lambda: Option<f64>,
    /// Entrywise match tolerance of the equivalence search
    #[arg(long, global = true)]
    tol_equiv: Option<f64>,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Phases,
    Rect,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a catalogue matrix (f6, s6, d6, c6, m6, fourier --n N)
    Gen {
        /// Catalogue name; omit when --from is used
        name: Option<String>,
        /// Order for the fourier constructor
        #[arg(long)]
        n: Option<usize>,
        /// Family parameter, e.g. --param t=1.25 (radians) for m6
        #[arg(long = "param")]
        params: Vec<String>,
        /// Entrywise conjugate of the result
        #[arg(long)]
        conjugate: bool,
        /// Transpose of the result
        #[arg(long)]
        transpose: bool,
        /// Re-emit an existing matrix instead of generating one
        #[arg(long)]
        from: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Flat CSV dump: one "re,im" line per entry, row-major
        #[arg(long)]
        csv: bool,
    },
    /// Check unimodularity and row orthogonality; exit 1 if not Hadamard
    Verify { matrix: String },
    /// Sorted invariant-set phases, in turns
    Lambda { matrix: String },
    /// Decide equivalence; certificate on exit 0, evidence or "exhausted" on exit 1
    Equiv {
        a: String,
        b: String,
        /// Allow the factorial search up to this order (max 8)
        #[arg(long, default_value_t = 6)]
        max_order: usize,
    },
    /// Complete a six-entry zero-sum row from four phases given in turns
    Complete { t1: f64, t2: f64, t3: f64, t4: f64 },
    /// Sample a parametric family: `family m6 --t <radians>` or
    /// `family affine --data file.json --params a,b,..`
    Family {
        name: String,
        /// Parameter of the one-parameter family, radians
        #[arg(long)]
        t: Option<f64>,
        /// Rejection radius around the singular points x = ±i
        #[arg(long, default_value_t = DEFAULT_SINGULAR_EPS)]
        eps_sing: f64,
        /// Affine family description file
        #[arg(long)]
        data: Option<PathBuf>,
        /// Affine family parameters, comma separated, radians
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        params: Vec<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        csv: bool,
    },
    /// Solve the orthogonality system for a dephased symmetric ansatz
    Classify {
        /// Diagonal pattern, e.g. 1,-1,-1,-1,*,*  (tokens: 1, -1, free, *)
        /// where * expands to both ±1 subcases
        #[arg(long)]
        pattern: Option<String>,
        /// Run the full real-diagonal battery (16 pattern runs)
        #[arg(long)]
        real_diagonal: bool,
        /// Use the tied-second-row shape (1,-1,x,x,-x,-x) with diagonal
        /// (1,-1,1,1,free,free); --pattern is ignored
        #[arg(long)]
        tie_second_row: bool,
        #[arg(long, default_value_t = 2000)]
        seeds: usize,
        /// RNG seed; all randomness is derived from it
        #[arg(long, default_value_t = 42)]
        rng: u64,
        /// Convergence threshold on the residual 2-norm
        #[arg(long, default_value_t = 1e-9)]
        tol_solution: f64,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the three family endpoint checks and report pass/fail for each
    Endpoints {
        /// Offset from the singular parameter 3π/2 for the limit check
        #[arg(long, default_value_t = 1e-5)]
        delta: f64,
    },
}

fn main() -> ExitCode {
    if let Ok(value) = std::env::var("HADAMARD_LAB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        // mathematically negative answers on well-formed input
        Error::NoCompletion { .. } => 1,
        _ => 2,
    }
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Error> {
    let d = Tolerances::default();
    Tolerances {
        entry: cli.tol_entry.unwrap_or(d.entry),
        gram: cli.tol_gram.unwrap_or(d.gram),
        lambda: cli.tol_lambda.unwrap_or(d.lambda),
        equiv: cli.tol_equiv.unwrap_or(d.equiv),
    }
    .validated()
}

fn read_input(arg: &str) -> Result<String, Error> {
    if arg == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::InvalidInput(format!("{arg}: {e}")))
    }
}

fn read_matrix(arg: &str, tol: &Tolerances) -> Result<CHMatrix, Error> {
    hadamard_lab::io::matrix_from_str(&read_input(arg)?, tol)
}

fn emit_matrix(m: &CHMatrix, format: Format, csv: bool) {
    if csv {
        for i in 0..m.n() {
            for j in 0..m.n() {
                let z = m.entry(i, j);
                outln!("{},{}", z.re, z.im);
            }
        }
        return;
    }
    let json = match format {
        Format::Phases => matrix_to_phases_json(m),
        Format::Rect => matrix_to_rect_json(m),
    };
    outln!("{}", serde_json::to_string_pretty(&json).expect("serializable"));
}

fn parse_param(params: &[String], key: &str) -> Result<Option<f64>, Error> {
    for p in params {
        match p.split_once('=') {
            Some((k, v)) if k.trim() == key => {
                let value: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad parameter value '{v}'")))?;
                return Ok(Some(value));
            }
            Some(_) => continue,
            None => {
                return Err(Error::InvalidInput(format!(
                    "parameter '{p}' is not of the form key=value"
                )))
            }
        }
    }
    Ok(None)
}

fn catalogue_matrix(name: &str, n: Option<usize>, params: &[String]) -> Result<CHMatrix, Error> {
    if name != "m6" && !params.is_empty() {
        return Err(Error::InvalidInput(format!(
            "'{name}' takes no --param"
        )));
    }
    match name {
        "s6" => Ok(tao_s6()),
        "d6" => Ok(dita_d6()),
        "c6" => Ok(catalogue::bjorck_c6()),
        "m6" => match parse_param(params, "t")? {
            Some(t) => catalogue::m6_family(t),
            None => Ok(m6_discrete()),
        },
        "fourier" => {
            let order = n.ok_or_else(|| Error::InvalidInput("fourier needs --n".into()))?;
            Ok(fourier(order))
        }
        other => {
            if let Some(rest) = other.strip_prefix('f') {
                if let Ok(order) = rest.parse::<usize>() {
                    if order >= 1 {
                        return Ok(fourier(order));
                    }
                }
            }
            Err(Error::InvalidInput(format!(
                "unknown catalogue name '{other}' (try f6, s6, d6, c6, m6, fourier --n N)"
            )))
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let tol = tolerances(&cli)?;
    match &cli.command {
        Command::Gen {
            name,
            n,
            params,
            conjugate,
            transpose,
            from,
            format,
            csv,
        } => {
            let mut m = match (from, name) {
                (Some(path), _) => read_matrix(path, &tol)?,
                (None, Some(name)) => catalogue_matrix(name, *n, params)?,
                (None, None) => {
                    return Err(Error::InvalidInput(
                        "gen needs a catalogue name or --from".into(),
                    ))
                }
            };
            if *conjugate {
                m = m.conjugate();
            }
            if *transpose {
                m = m.transpose();
            }
            emit_matrix(&m, *format, *csv);
            Ok(0)
        }

        Command::Verify { matrix } => {
            let raw = raw_from_str(&read_input(matrix)?)?;
            let gram = raw.gram_residual();
            let unimod = raw.max_unimodularity_error();
            let hadamard = gram <= tol.gram && unimod <= tol.entry;
            outln!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "n": raw.n,
                    "hadamard": hadamard,
                    "gram_residual": gram,
                    "max_unimodularity_error": unimod,
                    "tol_gram": tol.gram,
                    "tol_entry": tol.entry,
                }))
                .expect("serializable")
            );
            Ok(if hadamard { 0 } else { 1 })
        }

        Command::Lambda { matrix } => {
            let m = read_matrix(matrix, &tol)?;
            let l = lambda_set(&m, &tol);
            let turns: Vec<f64> = l.phases().iter().map(|p| p / TAU).collect();
            outln!("{}", serde_json::to_string_pretty(&turns).expect("serializable"));
            Ok(0)
        }

        Command::Equiv { a, b, max_order } => {
            let ma = read_matrix(a, &tol)?;
            let mb = read_matrix(b, &tol)?;
            let la = lambda_set(&ma, &tol);
            let lb = lambda_set(&mb, &tol);
            if let Some(evidence) = lambda_separation(&la, &lb, &tol) {
                outln!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "status": "inequivalent",
                        "lambda_evidence": evidence,
                    }))
                    .expect("serializable")
                );
                return Ok(1);
            }
            let opts = EquivalenceOptions::with_max_order(*max_order);
            match are_equivalent(&ma, &mb, &tol, &opts)? {
                Some(cert) => {
                    outln!(
                        "{}",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "status": "equivalent",
                            "certificate": {
                                "p1": cert.p1,
                                "d1_turns": cert.d1.iter().map(|p| p / TAU).collect::<Vec<_>>(),
                                "p2": cert.p2,
                                "d2_turns": cert.d2.iter().map(|p| p / TAU).collect::<Vec<_>>(),
                            },
                        }))
                        .expect("serializable")
                    );
                    Ok(0)
                }
                None => {
                    outln!(
                        "{}",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "status": "exhausted",
                        }))
                        .expect("serializable")
                    );
                    Ok(1)
                }
            }
        }

        Command::Complete { t1, t2, t3, t4 } => {
            let inputs = [
                UnitComplex::from_turns(*t1),
                UnitComplex::from_turns(*t2),
                UnitComplex::from_turns(*t3),
                UnitComplex::from_turns(*t4),
            ];
            match complete_row(inputs, &tol) {
                Ok(rc) => {
                    let pair = match rc.pair {
                        CompletionPair::Determined(p, m) => serde_json::json!({
                            "kind": "determined",
                            "values_turns": [p.turns(), m.turns()],
                        }),
                        CompletionPair::Degenerate => serde_json::json!({
                            "kind": "degenerate",
                        }),
                    };
                    outln!(
                        "{}",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "sigma": {"re": rc.sigma.re, "im": rc.sigma.im},
                            "pair": pair,
                        }))
                        .expect("serializable")
                    );
                    Ok(0)
                }
                Err(Error::NoCompletion { sigma_abs }) => {
                    outln!(
                        "{}",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "status": "no_completion",
                            "sigma_abs": sigma_abs,
                        }))
                        .expect("serializable")
                    );
                    Ok(1)
                }
                Err(e) => Err(e),
            }
        }

        Command::Family {
            name,
            t,
            eps_sing,
            data,
            params,
            format,
            csv,
        } => {
            let m = match name.as_str() {
                "m6" => {
                    let t = t.ok_or_else(|| Error::InvalidInput("family m6 needs --t".into()))?;
                    m6_family_with_eps(t, *eps_sing)?
                }
                "affine" => {
                    let path = data
                        .as_ref()
                        .ok_or_else(|| Error::InvalidInput("family affine needs --data".into()))?;
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
                    let data: AffineFamilyData = serde_json::from_str(&text)?;
                    load_affine_family(&data, &tol)?.construct(params)?
                }
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown family '{other}' (try m6 or affine)"
                    )))
                }
            };
            emit_matrix(&m, *format, *csv);
            Ok(0)
        }

        Command::Classify {
            pattern,
            real_diagonal,
            tie_second_row,
            seeds,
            rng,
            tol_solution,
            out,
        } => {
            let make_opts = |seed: u64| SolveOptions {
                seeds: *seeds,
                rng_seed: seed,
                tol_solution: *tol_solution,
                tolerances: tol,
                ..SolveOptions::default()
            };
            let reports = if *real_diagonal {
                classify_real_diagonal(*seeds, *rng, &tol).runs
            } else if *tie_second_row {
                vec![solve(&SymmetricAnsatz::m6_second_row(), &make_opts(*rng))]
            } else {
                let pattern = pattern
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("classify needs --pattern, --real-diagonal or --tie-second-row".into()))?;
                let mut runs = Vec::new();
                for (idx, concrete) in expand_pattern(pattern)?.into_iter().enumerate() {
                    let ansatz = SymmetricAnsatz::from_diag_pattern(&concrete)?;
                    runs.push(solve(
                        &ansatz,
                        &make_opts(rng.wrapping_add(idx as u64)),
                    ));
                }
                runs
            };

            let json = if reports.len() == 1 {
                reports[0].to_json()
            } else {
                serde_json::json!({
                    "runs": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
                })
            };
            let text = serde_json::to_string_pretty(&json).expect("serializable");
            match out {
                Some(path) => {
                    std::fs::write(path, text.as_bytes())
                        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
                    for r in &reports {
                        let names: Vec<&str> = r
                            .classes
                            .iter()
                            .map(|c| c.matched_catalogue.as_deref().unwrap_or("unmatched"))
                            .collect();
                        outln!(
                            "pattern {}: {}/{} converged, classes {:?}, best residual {:.3e}",
                            r.pattern, r.converged, r.seeds_run, names, r.best_residual
                        );
                    }
                }
                None => outln!("{text}"),
            }
            let converged: usize = reports.iter().map(|r| r.converged).sum();
            Ok(if converged > 0 { 0 } else { 1 })
        }

        Command::Endpoints { delta } => {
            let opts = EquivalenceOptions::default();
            let mut all_ok = true;
            let mut report = |label: &str, ok: bool, detail: String| {
                outln!("{}: {} ({detail})", label, if ok { "pass" } else { "FAIL" });
                all_ok &= ok;
            };

            let f6 = fourier(6);
            let at_one = m6_family_with_eps(0.0, DEFAULT_SINGULAR_EPS)?;
            let cert = are_equivalent(&at_one, &f6, &tol, &opts)?;
            let ok = cert
                .as_ref()
                .map(|c| c.apply(&f6).max_entry_distance(&at_one) <= tol.equiv)
                .unwrap_or(false);
            report("endpoint t=0 equivalent to F6", ok, "verified certificate".into());

            // entrywise limit tolerance scales linearly with delta
            let limit_tol = 10.0 * delta;
            let display = dita_d6();
            let swapped = display.permuted_symmetrically(&[0, 1, 2, 3, 5, 4]);
            let above = m6_family_with_eps(1.5 * PI + delta, delta / 2.0)?;
            let below = m6_family_with_eps(1.5 * PI - delta, delta / 2.0)?;
            let d_above = above.max_entry_distance(&display);
            let d_below = below.max_entry_distance(&swapped);
            report(
                "endpoint t->3π/2 limit matches displayed matrix",
                d_above <= limit_tol && d_below <= limit_tol,
                format!(
                    "from above {:.2e}, from below (rows/cols 5,6 swapped) {:.2e}, tolerance {:.1e}",
                    d_above, d_below, limit_tol
                ),
            );
            let lim_equiv = are_equivalent(&swapped, &display, &tol, &opts)?.is_some();
            report(
                "one-sided limit matrices equivalent to D6 representative",
                lim_equiv,
                "verified certificate".into(),
            );

            let t0 = m6_discrete_parameter();
            let d0 = m6_family_with_eps(t0, DEFAULT_SINGULAR_EPS)?.max_entry_distance(&m6_discrete());
            report(
                "endpoint t=arccos((1-√13)/3) matches discrete matrix",
                d0 <= 1e-10,
                format!("entrywise {:.2e}", d0),
            );

            Ok(if all_ok { 0 } else { 1 })
        }
    }
}

/// Expand `*` slots of a diagonal pattern into all ±1 subcases.
fn expand_pattern(s: &str) -> Result<Vec<[DiagSlot; 6]>, Error> {
    let starred: Vec<bool> = s.split(',').map(|t| t.trim() == "*").collect();
    if starred.len() != 6 {
        return Err(Error::InvalidInput(format!(
            "diagonal pattern needs 6 slots, got {}",
            starred.len()
        )));
    }
    let star_count = starred.iter().filter(|&&b| b).count();
    let mut out = Vec::new();
    for bits in 0..(1u32 << star_count) {
        let mut concrete = String::new();
        let mut star_idx = 0;
        for (k, token) in s.split(',').enumerate() {
            if k > 0 {
                concrete.push(',');
            }
            if token.trim() == "*" {
                concrete.push_str(if bits >> star_idx & 1 == 0 { "1" } else { "-1" });
                star_idx += 1;
            } else {
                concrete.push_str(token.trim());
            }
        }
        out.push(parse_diag_pattern(&concrete)?);
    }
    Ok(out)
}
