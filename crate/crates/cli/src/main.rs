//! `pisot`: command-line driver for the pisot-spectra library.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::Serialize;

use pisot_spectra::empirical::{self, Sampling};
use pisot_spectra::pisot::{FieldElement, MinimalPolynomial, PisotNumber, RingElement};
use pisot_spectra::real;
use pisot_spectra::spectrum::{self, Lattice, Window};
use pisot_spectra::transform::{self, Scale};
use pisot_spectra::Error;

#[derive(Parser, Debug)]
#[command(name = "pisot", version, about = "Fourier coefficients of Bernoulli convolutions at Pisot parameters")]
struct Cli {
    /// Working precision in bits (at least 64).
    #[arg(long, global = true, env = "PISOT_PRECISION", default_value_t = real::DEFAULT_PRECISION)]
    precision: u32,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write results to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct PolyArg {
    /// Recurrence coefficients d1,...,dm of x^m - d1 x^(m-1) - ... - dm.
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify a Pisot polynomial and print its record.
    ///
    /// JSON: {"d":[..], "theta":"..", "conjugates":[["re","im"],..], "rho":"..", "delta_max":"..", "precision_bits":N}
    Check(PolyArg),
    /// mu_hat(t), or the series mu_hat(r n) for n = 1..N.
    ///
    /// JSON (single t): {"t":"..", "value":"..", "error_bound":x, "truncation_index":k, "contains_zero":b}.
    /// CSV (series): n,t,value,error_bound,contains_zero.
    Eval {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long = "N")]
        n: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Double-precision evaluation for the series.
        #[arg(long)]
        fast: bool,
    },
    /// Digit trace K_j = <y theta^j>, delta_j = y theta^j - K_j.
    ///
    /// JSON: {"y":"..", "N":n, "K":[".."], "delta":[".."], "threshold":x, "exceed_set":[j]}
    Trace {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        y: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Check the integer recurrence on a digit trace.
    ///
    /// JSON: {"N":n, "delta":x, "violations":[j]}
    Recur {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        y: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        delta: f64,
    },
    /// Phi(z) = prod_{j in Z} |cos(pi z theta^j)|, or phi_Lambda(z) with --lambda.
    ///
    /// JSON: {"z":"..", "value":"..", "error":x, "degenerate_zero":b, "contains_zero":b}
    Phi {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 1e-20)]
        tol: f64,
    },
    /// Predicted limit prod Phi(z_i) * tail(r A).
    ///
    /// JSON: {"z":[[..]], "A":a, "r":"..", "predicted":"..", "error":"..", "id":".."}
    Limit {
        #[command(flatten)]
        poly: PolyArg,
        /// z_0;z_1;... with each z_i as comma-separated coefficients.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long = "A", default_value_t = 0, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 1e-20)]
        tol: f64,
    },
    /// Enumerate distinct predicted limits in a window.
    ///
    /// JSON: array of limit records, descending by predicted value.
    Enumerate {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        r: String,
        #[arg(long = "H")]
        height: i64,
        #[arg(long = "M")]
        m_max: usize,
        #[arg(long = "A-max")]
        a_max: i64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 1e-20)]
        tol: f64,
        #[arg(long, default_value = "ring")]
        lattice: Lattice,
    },
    /// n_k = <(2r)^-1 (z_0 theta^((M+1)k) + ... + z_M theta^k)> + A.
    ///
    /// Output: the integer n_k.
    Synthesize {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        r: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long = "A", default_value_t = 0, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        k: u64,
    },
    /// Sample |mu_hat(r n)|, cluster the values and match them to predictions.
    ///
    /// JSON: {"seed":s, "r":"..", "N":n, "eta":x, "clusters":[{"center","min","max","count","witnesses"}], "matches":[..], "max_gap":x, ...}
    Sample {
        #[command(flatten)]
        poly: PolyArg,
        /// Field element, decimal, or `random` for a seeded draw in (1/2, 3/2).
        #[arg(long)]
        r: String,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "n-min")]
        n_min: Option<u64>,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = empirical::DEFAULT_GAP)]
        gap: f64,
        /// Match against the window H,M,A_max (e.g. 2,2,3).
        #[arg(long = "match")]
        window: Option<String>,
        #[arg(long, default_value = "ring")]
        lattice: Lattice,
        #[arg(long = "match-tol", default_value_t = 1e-2)]
        match_tol: f64,
    },
    /// Spread of |mu_hat(r n)| over N/2 <= n <= N.
    ///
    /// JSON: {"lower":x, "upper":x, "count":n, "max_gap":x}
    Fill {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        r: String,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
    },
    /// Range of mu_hat(t) over a grid of [T/2, T].
    ///
    /// JSON: {"lower":x, "upper":x, "count":n, "max_gap":x}
    Jset {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long = "T")]
        t: f64,
        #[arg(long = "grid-step")]
        grid_step: Option<f64>,
    },
    /// Star discrepancy of {alpha x_i}: x_i = i, or x_i = theta^i with --poly.
    ///
    /// JSON: {"alpha":"..", "n":n, "sequence":"..", "discrepancy":x}
    Discrepancy {
        /// Decimal alpha, or `random` for a seeded draw in (0, 1).
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        poly: Option<String>,
    },
    /// Sample mu_hat(r n) e^(2 pi i gamma n) and cluster in the plane.
    ///
    /// JSON: {"seed":s, "r":"..", "gamma":"..", "mode":"..", "clusters":[..], "dominant_radius":x, "coverage":x, ...}
    Translate {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        r: String,
        /// Field element, decimal, or `random`.
        #[arg(long)]
        gamma: String,
        #[arg(long = "N")]
        n: Option<u64>,
        #[arg(long = "n-min")]
        n_min: Option<u64>,
        /// Sample along n_k built from z_0;...;z_M instead of a range.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long = "A", default_value_t = 0, allow_hyphen_values = true)]
        a: i64,
        #[arg(long = "k-min", default_value_t = 1)]
        k_min: u64,
        #[arg(long = "k-max")]
        k_max: Option<u64>,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = empirical::DEFAULT_GAP)]
        gap: f64,
    },
    /// Maxima of |mu_hat(n)| over dyadic blocks up to N.
    ///
    /// JSON: [{"k":k, "start":a, "end":b, "max":x, "argmax":n}]. CSV: k,start,end,max,argmax.
    Decay {
        /// Any real theta > 1 (need not be Pisot).
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        poly: Option<String>,
        #[arg(long = "N")]
        n: u64,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Out = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_precision() { 3 } else { 2 })
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.precision < 64 {
        return Err(Failure::Usage(format!("--precision must be at least 64, got {}", cli.precision)));
    }
    let text = dispatch(cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn json_only(cli: &Cli, name: &str) -> Result<(), Failure> {
    if cli.format == Format::Csv {
        return Err(Failure::Usage(format!("`{name}` has no CSV output")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<(), Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--{name} must be positive, got {x}")))
    }
}

fn pisot(poly: &PolyArg, prec: u32) -> Result<PisotNumber, Failure> {
    Ok(PisotNumber::new(MinimalPolynomial::parse(&poly.poly)?, prec)?)
}

fn z_list(s: &str, degree: usize) -> Result<Vec<FieldElement>, Failure> {
    Ok(s.split(';').map(|z| FieldElement::parse(z, degree)).collect::<Result<Vec<_>, _>>()?)
}

fn field(s: &str, degree: usize) -> Result<FieldElement, Failure> {
    Ok(FieldElement::parse(s, degree)?)
}

/// `random` draws from the seeded generator shifted by `offset`; anything
/// else parses as a field element or decimal.
fn scale_arg(s: &str, p: &PisotNumber, rng: &mut ChaCha8Rng, offset: f64) -> Result<(Scale, bool), Failure> {
    if s == "random" {
        let bits = p.precision_bits();
        let u = empirical::random_unit_float(rng, bits);
        return Ok((Scale::Real(Float::with_val(bits, u + offset)), true));
    }
    Ok((Scale::parse(s, p.degree(), p.precision_bits())?, false))
}

#[derive(Serialize)]
struct PhiOut {
    z: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<String>,
    value: String,
    error: f64,
    degenerate_zero: bool,
    contains_zero: bool,
}

#[derive(Serialize)]
struct RecurOut {
    #[serde(rename = "N")]
    n: usize,
    delta: f64,
    violations: Vec<usize>,
}

#[derive(Serialize)]
struct DiscrepancyOut {
    alpha: String,
    n: usize,
    sequence: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    discrepancy: f64,
}

fn dispatch(cli: &Cli) -> Out {
    let prec = cli.precision;
    let digits = real::decimal_digits(prec);
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match &cli.command {
        Command::Check(poly) => {
            json_only(cli, "check")?;
            let p = pisot(poly, prec)?;
            Ok(json(&p.to_record()))
        }
        Command::Eval { poly, t, r, n, tol, fast } => {
            let p = pisot(poly, prec)?;
            match (t, r, n) {
                (Some(t), None, None) => {
                    json_only(cli, "eval --t")?;
                    let tol = tol.unwrap_or(1e-20);
                    positive("tol", tol)?;
                    let t = real::parse_float(t, p.precision_bits())?;
                    let res = transform::mu_hat(p.theta(), &t, tol)?;
                    Ok(json(&res.to_record(&t)))
                }
                (None, Some(r), Some(n)) => {
                    let tol = tol.unwrap_or(if *fast { transform::FAST_TOL } else { 1e-20 });
                    positive("tol", tol)?;
                    let r = Scale::parse(r, p.degree(), prec)?;
                    let items = transform::coefficient_series(&p, &r, *n, tol, *fast)?;
                    let digits = if *fast { 17 } else { digits };
                    match cli.format {
                        Format::Csv => {
                            let mut buf = Vec::new();
                            transform::write_series_csv(&items, digits, &mut buf)?;
                            Ok(String::from_utf8(buf).expect("ascii"))
                        }
                        Format::Json => {
                            let rows: Vec<_> = items
                                .iter()
                                .map(|it| {
                                    serde_json::json!({
                                        "n": it.n,
                                        "t": real::format_float(&it.t, digits),
                                        "value": real::format_float(&it.value, digits),
                                        "error_bound": it.error_bound,
                                        "contains_zero": it.contains_zero,
                                    })
                                })
                                .collect();
                            Ok(json(&rows))
                        }
                    }
                }
                _ => Err(Failure::Usage("give either --t, or --r with --N".into())),
            }
        }
        Command::Trace { poly, y, n, threshold } => {
            let p = pisot(poly, prec)?;
            let y = real::parse_float(y, p.precision_bits())?;
            let tr = transform::digit_trace(&p, &y, *n, *threshold)?;
            let rec = tr.to_record(digits);
            match cli.format {
                Format::Json => Ok(json(&rec)),
                Format::Csv => {
                    let mut s = String::from("j,K,delta\n");
                    for (j, (k, d)) in rec.k.iter().zip(&rec.delta).enumerate() {
                        s.push_str(&format!("{},{k},{d}\n", j + 1));
                    }
                    Ok(s)
                }
            }
        }
        Command::Recur { poly, y, n, delta } => {
            json_only(cli, "recur")?;
            let p = pisot(poly, prec)?;
            let y = real::parse_float(y, p.precision_bits())?;
            let tr = transform::digit_trace(&p, &y, *n, None)?;
            let violations = transform::check_recurrence(&tr, &p, *delta)?;
            Ok(json(&RecurOut { n: *n, delta: *delta, violations }))
        }
        Command::Phi { poly, z, lambda, tol } => {
            json_only(cli, "phi")?;
            positive("tol", *tol)?;
            let p = pisot(poly, prec)?;
            let v = match lambda {
                Some(l) => {
                    let l = RingElement::parse(l, p.degree())?;
                    let q = RingElement::parse(z, p.degree())?;
                    spectrum::phi_lambda(&p, &l, &q, *tol)?
                }
                None => spectrum::phi_field(&p, &field(z, p.degree())?, *tol)?,
            };
            Ok(json(&PhiOut {
                z: field(z, p.degree())?.to_string(),
                lambda: lambda.clone(),
                value: real::format_float(&v.value, digits),
                error: v.error_bound,
                degenerate_zero: v.degenerate_zero,
                contains_zero: v.contains_zero,
            }))
        }
        Command::Limit { poly, z, a, r, tol } => {
            json_only(cli, "limit")?;
            positive("tol", *tol)?;
            let p = pisot(poly, prec)?;
            let c = spectrum::limit_value(&p, &z_list(z, p.degree())?, *a, &field(r, p.degree())?, *tol)?;
            Ok(json(&c.to_record(digits)))
        }
        Command::Enumerate { poly, r, height, m_max, a_max, eta, tol, lattice } => {
            json_only(cli, "enumerate")?;
            positive("tol", *tol)?;
            positive("eta", *eta)?;
            let p = pisot(poly, prec)?;
            let window = Window::new(*height, *m_max, *a_max).with_lattice(*lattice);
            let cands = spectrum::enumerate_spectrum(&p, &field(r, p.degree())?, &window, *tol, *eta)?;
            let recs: Vec<_> = cands.iter().map(|c| c.to_record(digits)).collect();
            Ok(json(&recs))
        }
        Command::Synthesize { poly, r, z, a, k } => {
            json_only(cli, "synthesize")?;
            let p = pisot(poly, prec)?;
            let n = spectrum::synthesize_sequence(&p, &z_list(z, p.degree())?, *a, &field(r, p.degree())?, *k)?;
            Ok(format!("{n}\n"))
        }
        Command::Sample { poly, r, n, n_min, eta, gap, window, lattice, match_tol } => {
            let p = pisot(poly, prec)?;
            let (scale, drawn) = scale_arg(r, &p, &mut rng, 0.5)?;
            let mut rep = empirical::sample_and_cluster(&p, &scale, *n, *eta, *gap, n_min.unwrap_or(n / 2))?;
            if drawn {
                rep.seed = Some(cli.seed);
            }
            if let Some(w) = window {
                let Scale::Field(rf) = &scale else {
                    return Err(Failure::Usage("--match needs r in Q(theta)".into()));
                };
                let parts: Vec<i64> = w
                    .split(',')
                    .map(|s| s.trim().parse::<i64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| Failure::Usage(format!("--match {w:?}: {e}")))?;
                let [h, m, am] = parts[..] else {
                    return Err(Failure::Usage(format!("--match takes H,M,A_max, got {w:?}")));
                };
                let win = Window::new(h, m as usize, am).with_lattice(*lattice);
                let cands = spectrum::enumerate_spectrum(&p, rf, &win, 1e-20, eta / 2.0)?;
                empirical::match_clusters(&mut rep, &cands, *match_tol);
            }
            match cli.format {
                Format::Json => Ok(json(&rep)),
                Format::Csv => {
                    let mut s = String::from("center,min,max,count\n");
                    for c in &rep.clusters {
                        s.push_str(&format!("{},{},{},{}\n", c.center, c.min, c.max, c.count));
                    }
                    Ok(s)
                }
            }
        }
        Command::Fill { poly, r, n, eta } => {
            json_only(cli, "fill")?;
            let p = pisot(poly, prec)?;
            let (scale, _) = scale_arg(r, &p, &mut rng, 0.5)?;
            Ok(json(&empirical::interval_fill_test(&p, &scale, *n, *eta)?))
        }
        Command::Jset { poly, t, grid_step } => {
            json_only(cli, "jset")?;
            let p = pisot(poly, prec)?;
            Ok(json(&empirical::estimate_j(p.theta(), *t, *grid_step)?))
        }
        Command::Discrepancy { alpha, n, poly } => {
            json_only(cli, "discrepancy")?;
            let (alpha, seed) = if alpha == "random" {
                (empirical::random_unit_float(&mut rng, prec), Some(cli.seed))
            } else {
                (real::parse_float(alpha, prec)?, None)
            };
            let (d, sequence) = match poly {
                Some(poly) => {
                    let p = pisot(&PolyArg { poly: poly.clone() }, prec)?;
                    (empirical::discrepancy_lacunary(&alpha, p.theta(), *n), "theta^i".to_string())
                }
                None => {
                    let x: Vec<f64> = (1..=*n).map(|i| i as f64).collect();
                    (empirical::discrepancy(alpha.to_f64(), &x), "i".to_string())
                }
            };
            Ok(json(&DiscrepancyOut { alpha: real::format_float(&alpha, 17), n: *n, sequence, seed, discrepancy: d }))
        }
        Command::Translate { poly, r, gamma, n, n_min, z, a, k_min, k_max, eta, gap } => {
            json_only(cli, "translate")?;
            let p = pisot(poly, prec)?;
            let r = Scale::parse(r, p.degree(), prec)?;
            let (g, drawn) = scale_arg(gamma, &p, &mut rng, 0.0)?;
            let sampling = match (z, n) {
                (Some(z), None) => {
                    let k_max = k_max.ok_or_else(|| Failure::Usage("--z needs --k-max".into()))?;
                    Sampling::Sequence { z: z_list(z, p.degree())?, a: *a, k_min: *k_min, k_max }
                }
                (None, Some(n)) => Sampling::Range { n_max: *n, n_min: n_min.unwrap_or(n / 2) },
                _ => return Err(Failure::Usage("give either --N or --z".into())),
            };
            let mut rep = empirical::translated_sample(&p, &r, &g, &sampling, *eta, *gap)?;
            if drawn {
                rep.seed = Some(cli.seed);
            }
            Ok(json(&rep))
        }
        Command::Decay { theta, poly, n } => {
            let theta = match (theta, poly) {
                (Some(t), None) => real::parse_float(t, prec)?,
                (None, Some(poly)) => pisot(&PolyArg { poly: poly.clone() }, prec)?.theta().clone(),
                _ => return Err(Failure::Usage("give exactly one of --theta and --poly".into())),
            };
            let blocks = empirical::decay_check(&theta, *n)?;
            match cli.format {
                Format::Json => Ok(json(&blocks)),
                Format::Csv => {
                    let mut s = String::from("k,start,end,max,argmax\n");
                    for b in &blocks {
                        s.push_str(&format!("{},{},{},{},{}\n", b.k, b.start, b.end, b.max, b.argmax));
                    }
                    Ok(s)
                }
            }
        }
    }
}
