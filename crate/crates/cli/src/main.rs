//! `deltaforms` command-line front end. Every subcommand prints one JSON
//! document on standard output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deltaforms::arith::{cross_prime_commutator, fermat_quotient, parse_rational};
use deltaforms::deltajet::{lemma_logder_check, lemma_xlaphi_check, psi_fourier, psi_serretate, Varphi};
use deltaforms::forms::{
    build_f2e0, build_f2e_k, covariance_check, delta_fourier_expand, fsharp_exact, fsharp_expansion,
};
use deltaforms::json::{
    jet_to_json, qexpansion_from_json, qexpansion_to_json, series1_from_json, series1_to_json,
    AnyJetSeries,
};
use deltaforms::modular::{ap_point_count, eisenstein};
use deltaforms::multiprime::{
    basis_independence_check, build_fe0, build_fe_k, continuation_check, Continuation, FamilyMember,
};
use deltaforms::qseries::delta0;
use deltaforms::{CurveFixture, Error, Gamma, PadicTrunc};
use num_rational::BigRational;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "deltaforms", version, about = "Arithmetic jet series, δ-expansions and their checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Also write the JSON payload to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Compare the payload with this file; a mismatch exits with status 1.
    #[arg(long, global = true)]
    golden: Option<PathBuf>,
}

#[derive(Args)]
struct Truncation {
    /// Weighted truncation bound.
    #[arg(long = "N", default_value_t = 30)]
    n: i64,
}

#[derive(Args)]
struct Digits {
    /// p-adic digits kept.
    #[arg(long = "M", default_value_t = 8)]
    m: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Fourier,
    Serretate,
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaName {
    Xlaphi,
    Logder,
}

#[derive(Subcommand)]
enum Command {
    /// The series Ψ_p on the Fourier (q) or Serre–Tate (t) side.
    Psi {
        #[arg(long)]
        p: u64,
        #[arg(long, value_enum, default_value = "serretate")]
        side: Side,
        #[command(flatten)]
        trunc: Truncation,
        #[command(flatten)]
        digits: Digits,
    },
    /// The multi-prime expansion f^e_0.
    Fe0 {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// The expansion f^e_k built from the k-th prime (1-based).
    FeK {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// The multi-prime expansion f^{2e}_0 of a curve's newform.
    F2e0 {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// The expansion f^{2e}_k built from the k-th prime (1-based).
    F2eK {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// The δ-expansion f♯ of a curve's newform at one prime.
    Fsharp {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        trunc: Truncation,
        #[command(flatten)]
        digits: Digits,
        /// Keep exact rational coefficients instead of reducing mod p^M.
        #[arg(long)]
        exact: bool,
    },
    /// The normalized Eisenstein series E_k.
    Eisenstein {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// δ_p^n of a q-expansion read from a file.
    DeltaExpand {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[command(flatten)]
        digits: Digits,
    },
    /// (a(q^p) - a^p)/p for a one-variable series read from a file.
    Delta0 {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        digits: Digits,
    },
    /// Isogeny covariance of a jet series read from a file.
    CheckCovariance {
        #[arg(long)]
        input: PathBuf,
        /// An integer, or a rational when the input has p-adic coefficients.
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        nu: i64,
    },
    /// Whether per-prime expansions continue to one series.
    CheckContinuation {
        /// `FILE` for a p-adic member, `FILE@p` for an exact member integral at p.
        #[arg(long = "input", required = true)]
        inputs: Vec<String>,
        /// Height bound for rational reconstruction.
        #[arg(long)]
        height: Option<String>,
    },
    /// δ_{p1}δ_{p2}a - δ_{p2}δ_{p1}a against the commutator polynomial.
    CheckCommutator {
        #[arg(long)]
        p1: u64,
        #[arg(long)]
        p2: u64,
        #[arg(long, allow_hyphen_values = true)]
        value: String,
    },
    /// One of the congruences for iterated p-derivations.
    CheckLemma {
        #[arg(long, value_enum)]
        name: LemmaName,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// The integer a in λ = 1 + p^n a (logder).
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        a: i64,
        /// The constant c in φ(z)/z - c: `symbolic` or an integer (xlaphi).
        #[arg(long, default_value = "symbolic", allow_hyphen_values = true)]
        varphi: String,
    },
    /// Rank of the Frobenius images of f^e_0.
    CheckBasis {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u32>,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// a_p of a curve by counting points.
    Ap {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        p: u64,
    },
}

/// Why a job stopped short of a payload.
enum Failure {
    Usage(String),
    Math(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Math(e)
    }
}

/// A payload and whether the check it reports passed.
struct Outcome {
    payload: Value,
    pass: bool,
}

impl Outcome {
    fn ok(payload: Value) -> Self {
        Outcome { payload, pass: true }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Math(Error::Parse(format!("{}: {e}", path.display()))))
}

fn load_curve(path: &Path) -> Result<CurveFixture, Failure> {
    if !path.exists() {
        return Err(Failure::Usage(format!("no curve file {}", path.display())));
    }
    Ok(CurveFixture::load(path)?)
}

fn member_index(k: usize, primes: &[u64]) -> Result<usize, Failure> {
    if k == 0 || k > primes.len() {
        return Err(Failure::Usage(format!("--k must lie in 1..={}", primes.len())));
    }
    Ok(k - 1)
}

/// Newform coefficients a_1..a_{N-1} and a_p for each requested prime.
fn newform_data(curve: &CurveFixture, primes: &[u64], n: i64) -> Result<(Vec<i64>, Vec<i64>), Failure> {
    if n < 2 {
        return Err(Failure::Usage("--N must be at least 2".into()));
    }
    let top = primes.iter().copied().max().unwrap_or(0) as usize;
    let an = curve.coefficients((n as usize).max(top + 1))?;
    let ap = primes.iter().map(|&p| an[p as usize - 1]).collect();
    Ok((an, ap))
}

fn parse_gamma(s: &str, input: &AnyJetSeries) -> Result<Gamma, Failure> {
    if let Ok(g) = s.parse::<i64>() {
        return Ok(Gamma::Int(g));
    }
    let q = parse_rational(s).map_err(|e| Failure::Usage(format!("--gamma: {e}")))?;
    match input {
        AnyJetSeries::Padic(f) => Ok(Gamma::Padic(PadicTrunc::from_rational(&q, f.ctx())?)),
        AnyJetSeries::Rational(_) => Err(Failure::Usage(
            "a non-integer γ needs an input with p-adic coefficients".into(),
        )),
    }
}

fn parse_member(arg: &str) -> Result<FamilyMember, Failure> {
    let (path, prime) = match arg.rsplit_once('@') {
        Some((path, p)) => {
            let p = p.parse::<u64>().map_err(|_| Failure::Usage(format!("bad prime in {arg}")))?;
            (path, Some(p))
        }
        None => (arg, None),
    };
    match (AnyJetSeries::from_json(&read_json(Path::new(path))?)?, prime) {
        (AnyJetSeries::Rational(series), Some(prime)) => Ok(FamilyMember::Exact { prime, series }),
        (AnyJetSeries::Rational(_), None) => Err(Failure::Usage(format!(
            "{path} has exact coefficients; name its prime as {path}@p"
        ))),
        (AnyJetSeries::Padic(s), None) => Ok(FamilyMember::Padic(s)),
        (AnyJetSeries::Padic(_), Some(_)) => Err(Failure::Usage(format!(
            "{path} has p-adic coefficients and carries its own prime"
        ))),
    }
}

fn run(command: &Command) -> Result<Outcome, Failure> {
    let out = match command {
        Command::Psi { p, side, trunc, digits } => match side {
            Side::Serretate => Outcome::ok(jet_to_json(&psi_serretate(*p, trunc.n)?)?),
            Side::Fourier => Outcome::ok(jet_to_json(&psi_fourier(*p, digits.m)?)?),
        },
        Command::Fe0 { primes, trunc } => Outcome::ok(jet_to_json(&build_fe0(primes, trunc.n)?)?),
        Command::FeK { primes, k, trunc } => {
            let k = member_index(*k, primes)?;
            Outcome::ok(jet_to_json(&build_fe_k(primes, k, trunc.n)?)?)
        }
        Command::F2e0 { curve, primes, trunc } => {
            let (an, ap) = newform_data(&load_curve(curve)?, primes, trunc.n)?;
            Outcome::ok(jet_to_json(&build_f2e0(&an, primes, &ap, trunc.n)?)?)
        }
        Command::F2eK { curve, primes, k, trunc } => {
            let k = member_index(*k, primes)?;
            let (an, ap) = newform_data(&load_curve(curve)?, primes, trunc.n)?;
            Outcome::ok(jet_to_json(&build_f2e_k(&an, primes, &ap, k, trunc.n)?)?)
        }
        Command::Fsharp { curve, p, trunc, digits, exact } => {
            let (an, ap) = newform_data(&load_curve(curve)?, &[*p], trunc.n)?;
            if *exact {
                Outcome::ok(jet_to_json(&fsharp_exact(&an, ap[0], *p, trunc.n)?)?)
            } else {
                Outcome::ok(jet_to_json(&fsharp_expansion(&an, ap[0], *p, digits.m, trunc.n)?)?)
            }
        }
        Command::Eisenstein { k, trunc } => Outcome::ok(qexpansion_to_json(&eisenstein(*k, trunc.n)?)),
        Command::DeltaExpand { input, p, n, digits } => {
            let f = qexpansion_from_json(&read_json(input)?)?;
            Outcome::ok(jet_to_json(&delta_fourier_expand(&f, *n, *p, digits.m)?)?)
        }
        Command::Delta0 { input, p, digits } => {
            let a = series1_from_json::<BigRational>(&read_json(input)?)?;
            Outcome::ok(series1_to_json(&delta0(&a, *p, digits.m)?))
        }
        Command::CheckCovariance { input, gamma, nu } => {
            let f = AnyJetSeries::from_json(&read_json(input)?)?;
            let g = parse_gamma(gamma, &f)?;
            let report = match &f {
                AnyJetSeries::Rational(f) => covariance_check(f, &g, *nu)?,
                AnyJetSeries::Padic(f) => covariance_check(f, &g, *nu)?,
            };
            Outcome { pass: report.pass, payload: json!(report) }
        }
        Command::CheckContinuation { inputs, height } => {
            let family = inputs.iter().map(|s| parse_member(s)).collect::<Result<Vec<_>, _>>()?;
            let height = match height {
                Some(h) => Some(
                    parse_rational(h)
                        .ok()
                        .filter(|q| q.is_integer() && q.numer() > &0.into())
                        .ok_or_else(|| Failure::Usage(format!("--height {h} is not a positive integer")))?
                        .to_integer(),
                ),
                None => None,
            };
            match continuation_check(&family, height.as_ref())? {
                Continuation::Continued(f) => Outcome::ok(json!({"continued": true, "series": jet_to_json(&f)?})),
                Continuation::Obstructed(o) => Outcome {
                    pass: false,
                    payload: json!({"continued": false, "obstruction": o}),
                },
            }
        }
        Command::CheckCommutator { p1, p2, value } => {
            let a = parse_rational(value)
                .ok()
                .filter(|q| q.is_integer())
                .ok_or_else(|| Failure::Usage(format!("--value {value} is not an integer")))?
                .to_integer();
            let d1 = fermat_quotient(&a, *p1)?;
            let d2 = fermat_quotient(&a, *p2)?;
            let lhs = fermat_quotient(&d2, *p1)? - fermat_quotient(&d1, *p2)?;
            let rhs = cross_prime_commutator(&a, &d1, &d2, *p1, *p2)?;
            Outcome {
                pass: lhs == rhs,
                payload: json!({
                    "value": a.to_string(),
                    "p1": p1,
                    "p2": p2,
                    "lhs": lhs.to_string(),
                    "rhs": rhs.to_string(),
                    "pass": lhs == rhs,
                }),
            }
        }
        Command::CheckLemma { name, p, n, a, varphi } => {
            let report = match name {
                LemmaName::Xlaphi => {
                    let c = match varphi.as_str() {
                        "symbolic" => Varphi::Symbolic,
                        s => Varphi::Int(s.parse().map_err(|_| {
                            Failure::Usage(format!("--varphi must be `symbolic` or an integer, not {s}"))
                        })?),
                    };
                    lemma_xlaphi_check(*p, *n, c)?
                }
                LemmaName::Logder => lemma_logder_check(*p, *n, *a)?,
            };
            Outcome { pass: report.pass, payload: json!(report) }
        }
        Command::CheckBasis { primes, orders, trunc } => {
            let report = basis_independence_check(primes, orders, trunc.n)?;
            Outcome { pass: report.pass, payload: json!(report) }
        }
        Command::Ap { curve, p } => {
            let fx = load_curve(curve)?;
            let ap = ap_point_count(&fx.curve, *p)?;
            Outcome::ok(json!({"curve": fx.curve.label, "p": p, "a_p": ap}))
        }
    };
    Ok(out)
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, mut status) = match run(&cli.command) {
        Ok(o) => (render(&o.payload), if o.pass { 0 } else { 1 }),
        Err(Failure::Usage(msg)) => (render(&json!({"error": "usage", "message": msg})), 2),
        Err(Failure::Math(e)) => (render(&json!({"error": e.code(), "message": e.to_string()})), 1),
    };
    print!("{text}");
    if let Some(path) = &cli.out {
        if let Err(e) = fs::write(path, &text) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if let Some(path) = &cli.golden {
        match fs::read_to_string(path) {
            Ok(expected) if expected.trim_end() == text.trim_end() => {}
            Ok(_) => {
                eprintln!("output differs from {}", path.display());
                status = 1;
            }
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::from(status)
}
