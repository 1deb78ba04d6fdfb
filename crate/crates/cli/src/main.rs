//! `logvvmf`: JSON-in, JSON-out access to the library.
//!
//! Exit codes: 0 success, 1 a check failed, 2 the input was rejected.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logvvmf::analysis::{bol_check, growth_probe, BolInput};
use logvvmf::fixtures::{cusp_delta, eisenstein};
use logvvmf::repspace::{find_intertwiner_any, sigma_rep, sym_power_rep};
use logvvmf::vvmf::{classify_boundary, functional_equation_residual, make_c, ClassifyOptions};
use logvvmf::wire::{ClassificationWire, FormWire, GrowthFitWire, MatrixWire, RepresentationWire, SeriesWire};
use logvvmf::{AnyMatrix, AnyRepresentation, Error, GaussRat, Matrix, Poly, UnimodularMatrix, VvmfForm, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "logvvmf", version, about = "Logarithmic vector-valued modular forms for SL2(Z)")]
struct Cli {
    /// Print an aligned key/value table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a representation or a form.
    #[command(subcommand)]
    Gen(Gen),
    /// Verify an identity on JSON read from standard input.
    #[command(subcommand)]
    Check(Check),
    /// Natural-boundary verdict for a form on standard input.
    Classify {
        /// Also verify the functional equation numerically at S and T.
        #[arg(long)]
        verify_funceq: bool,
    },
    /// Log-log growth slope of one component along g(tau0 + N).
    Probe(ProbeArgs),
    /// Intertwiner between `{"rho": ..., "rho2": ...}` on standard input.
    Intertwine {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// The symmetric power S^{p-1}(nu) as an exact representation.
    SymPower {
        #[arg(long)]
        p: usize,
    },
    /// The representation sigma on (tau^{p-1}, ..., tau, 1).
    Sigma {
        #[arg(long)]
        p: usize,
    },
    /// The form C = (tau^{p-1}, ..., 1) of weight 1 - p.
    #[command(name = "C")]
    C {
        #[arg(long)]
        p: usize,
    },
    /// Normalized Eisenstein series of weight 4 or 6.
    Eisenstein {
        #[arg(long)]
        weight: i64,
        #[arg(long, default_value_t = 60)]
        terms: usize,
    },
    /// The discriminant of weight 12.
    Cusp {
        #[arg(long, default_value_t = 60)]
        terms: usize,
    },
}

#[derive(Subcommand, Debug)]
enum Check {
    /// `S^4 = I` and `(ST)^3 = S^2` for a representation.
    Relations {
        #[arg(long)]
        tol: Option<f64>,
    },
    /// `F|_k g = rho(g) F`; symbolic for polynomial forms when no `--tau` is given.
    Funceq {
        #[arg(long, value_parser = parse_gamma)]
        gamma: UnimodularMatrix,
        #[arg(long, value_parser = parse_tau)]
        tau: Vec<C64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Bol's identity for `{"poly": [...]}` or `{"series": ...}`.
    Bol {
        #[arg(long, value_parser = parse_gamma)]
        gamma: UnimodularMatrix,
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = parse_tau)]
        tau: Vec<C64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// `F(tau + 1) = rho(T) F(tau)`.
    Translation {
        #[arg(long, value_parser = parse_tau)]
        tau: Vec<C64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long, value_parser = parse_gamma, default_value = "0,-1,1,0")]
    gamma: UnimodularMatrix,
    #[arg(long, value_parser = parse_tau, default_value = "0.3+1.5i")]
    tau: C64,
    #[arg(long, default_value_t = 200)]
    nmax: u64,
    /// Zero-based component index.
    #[arg(long, default_value_t = 0)]
    component: usize,
}

fn parse_gamma(s: &str) -> Result<UnimodularMatrix, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, c, d] = parts.as_slice() else {
        return Err(format!("expected four integers a,b,c,d, got `{s}`"));
    };
    let int = |x: &str| x.parse::<num_bigint::BigInt>().map_err(|e| format!("`{x}`: {e}"));
    UnimodularMatrix::new(int(a)?, int(b)?, int(c)?, int(d)?).map_err(|e| e.to_string())
}

/// Accepts `x+yi`, `x-yi`, `yi`, or a real `x`.
fn parse_tau(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse `{s}` as x+yi");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(C64::new(re.parse::<f64>().map_err(|_| bad())?, im))
}

enum Failure {
    Check(Value),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<Value, Failure>;

fn read_stdin() -> Result<String, Failure> {
    let mut s = String::new();
    std::io::stdin()
        .read_to_string(&mut s)
        .map_err(|e| Failure::Input(format!("cannot read standard input: {e}")))?;
    Ok(s)
}

fn parse_json<T: DeserializeOwned>(s: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(s);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Failure::Input(format!("invalid value for `{path}`: {}", e.inner()))
    })
}

fn read_form() -> Result<VvmfForm, Failure> {
    Ok(logvvmf::wire::form_from_json(&read_stdin()?)?)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("wire types serialize")
}

fn form_value(f: &VvmfForm) -> Value {
    to_value(&FormWire::from(f))
}

fn gen(g: Gen) -> Outcome {
    let positive = |p: usize| {
        if p == 0 {
            Err(Failure::Input("invalid value for `--p`: must be at least 1".into()))
        } else {
            Ok(p)
        }
    };
    Ok(match g {
        Gen::SymPower { p } => to_value(&RepresentationWire::from(&AnyRepresentation::Exact(sym_power_rep(positive(p)?)))),
        Gen::Sigma { p } => to_value(&RepresentationWire::from(&AnyRepresentation::Exact(sigma_rep(positive(p)?)))),
        Gen::C { p } => form_value(&make_c(positive(p)?)),
        Gen::Eisenstein { weight, terms } => form_value(&eisenstein(weight, terms)?),
        Gen::Cusp { terms } => form_value(&cusp_delta(terms)?.form()),
    })
}

fn verdict(pass: bool, body: Value) -> Outcome {
    if pass {
        Ok(body)
    } else {
        Err(Failure::Check(body))
    }
}

/// Relation residuals straight from the matrices, so violating input is reported rather than rejected.
fn relation_residuals(w: RepresentationWire, tol: Option<f64>) -> Outcome {
    let s = w.s.into_matrix("S")?;
    let t = w.t.into_matrix("T")?;
    for (name, m) in [("S", &s), ("T", &t)] {
        if m.rows() != w.p || m.cols() != w.p {
            return Err(Failure::Input(format!("invalid value for `{name}`: expected {0}x{0}", w.p)));
        }
    }
    let (r4, r3, exact) = match (&s, &t) {
        (AnyMatrix::Exact(s), AnyMatrix::Exact(t)) => {
            let st = s * t;
            let d4 = &s.pow(4) - &Matrix::<GaussRat>::identity(w.p);
            let d3 = &st.pow(3) - &s.pow(2);
            (d4.max_abs(), d3.max_abs(), true)
        }
        _ => {
            let (s, t) = (s.to_c64(), t.to_c64());
            let st = &s * &t;
            (s.pow(4).distance(&Matrix::identity(w.p)), st.pow(3).distance(&s.pow(2)), false)
        }
    };
    let tol = tol.unwrap_or(if exact { 0.0 } else { 1e-9 });
    let pass = r4 <= tol && r3 <= tol;
    verdict(pass, json!({"pass": pass, "s4_residual": r4, "st3_residual": r3, "exact": exact, "tol": tol}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum BolWire {
    /// Ascending coefficients as `a/b+c/di` strings.
    Poly(Vec<String>),
    Series(SeriesWire),
}

fn default_taus(taus: Vec<C64>) -> Vec<C64> {
    if taus.is_empty() {
        vec![C64::new(0.0, 1.0), C64::new(0.0, 2.0), C64::new(0.4, 1.3)]
    } else {
        taus
    }
}

fn check(c: Check) -> Outcome {
    match c {
        Check::Relations { tol } => relation_residuals(parse_json(&read_stdin()?)?, tol),
        Check::Funceq { gamma, tau, tol } => {
            let form = read_form()?;
            let symbolic = tau.is_empty() && form.is_exact() && matches!(form.body(), logvvmf::Body::Poly(_));
            let taus = if symbolic { tau } else { default_taus(tau) };
            let r = functional_equation_residual(&form, &gamma, &taus)?;
            let pass = if symbolic { r == 0.0 } else { r <= tol };
            verdict(pass, json!({"pass": pass, "residual": r, "symbolic": symbolic, "gamma": gamma, "tau": taus, "tol": tol}))
        }
        Check::Bol { gamma, m, tau, tol } => {
            let input = match parse_json::<BolWire>(&read_stdin()?)? {
                BolWire::Poly(cs) => BolInput::Poly(Poly::new(
                    cs.iter()
                        .enumerate()
                        .map(|(j, s)| {
                            s.parse::<GaussRat>()
                                .map_err(|_| Failure::Input(format!("invalid value for `poly[{j}]`: cannot parse `{s}`")))
                        })
                        .collect::<Result<_, _>>()?,
                )),
                BolWire::Series(s) => BolInput::Series(s.into_series("series")?),
            };
            let symbolic = matches!(input, BolInput::Poly(_));
            let taus = default_taus(tau);
            let r = bol_check(&input, &gamma, m, &taus)?;
            let pass = if symbolic { r == 0.0 } else { r <= tol };
            verdict(pass, json!({"pass": pass, "residual": r, "symbolic": symbolic, "gamma": gamma, "m": m, "tau": taus, "tol": tol}))
        }
        Check::Translation { tau, tol } => {
            let form = read_form()?;
            let taus = default_taus(tau);
            let t = form.rep().evaluate_c64(&UnimodularMatrix::t());
            let mut worst: f64 = 0.0;
            for &z in &taus {
                let (shifted, _) = form.evaluate(z + 1.0)?;
                let (here, _) = form.evaluate(z)?;
                let rhs = t.mul_vec(&here);
                worst = shifted.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(worst, f64::max);
            }
            let pass = worst <= tol;
            verdict(pass, json!({"pass": pass, "residual": worst, "tau": taus, "tol": tol}))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntertwineWire {
    rho: RepresentationWire,
    rho2: RepresentationWire,
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen(g) => gen(g),
        Command::Check(c) => check(c),
        Command::Classify { verify_funceq } => {
            let form = read_form()?;
            let c = classify_boundary(&form, &ClassifyOptions { verify_funceq })?;
            Ok(to_value(&ClassificationWire::from(&c)))
        }
        Command::Probe(args) => {
            let form = read_form()?;
            let fit = growth_probe(&form, args.component, &args.gamma, args.tau, args.nmax)?;
            Ok(to_value(&GrowthFitWire::from(&fit)))
        }
        Command::Intertwine { seed } => {
            let w: IntertwineWire = parse_json(&read_stdin()?)?;
            let rho = AnyRepresentation::try_from(w.rho).map_err(|e| Failure::Input(format!("rho: {e}")))?;
            let rho2 = AnyRepresentation::try_from(w.rho2).map_err(|e| Failure::Input(format!("rho2: {e}")))?;
            let a = find_intertwiner_any(&rho, &rho2, seed)?;
            let found = a.is_some();
            verdict(found, json!({"found": found, "A": a.as_ref().map(MatrixWire::from), "seed": seed}))
        }
    }
}

fn print_table(v: &Value) {
    match v {
        Value::Object(map) => {
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (k, x) in map {
                let shown = match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                println!("{k:<width$}  {shown}");
            }
        }
        other => println!("{}", serde_json::to_string_pretty(other).expect("values serialize")),
    }
}

fn emit(v: &Value, pretty: bool) {
    if pretty {
        print_table(v);
    } else {
        println!("{v}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.pretty;
    match run(cli) {
        Ok(v) => {
            emit(&v, pretty);
            ExitCode::SUCCESS
        }
        Err(Failure::Check(v)) => {
            emit(&v, pretty);
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
