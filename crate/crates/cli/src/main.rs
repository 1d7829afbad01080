mod reproduce;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heegner::hauptmodul::qexp;
use heegner::halfint::{self, basis, check_transformations};
use heegner::jacobi::{phi, rows_for};
use heegner::numeric::BigComplex;
use heegner::quadforms::{default_beta, gamma0_classes};
use heegner::traces::{self, ProductReport, Status, TraceReport, RECOGNITION_TOLERANCE};
use heegner::Error;
use serde::Serialize;
use std::io::Write;
use std::process::ExitCode;

const PRODUCT_TOLERANCE: f64 = 1e-25;

#[derive(Parser)]
#[command(name = "heegner", version, about = "Traces of singular moduli on Fricke groups of prime level")]
struct Cli {
    #[command(flatten)]
    cfg: RunConfig,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone, Debug)]
struct RunConfig {
    /// Working precision in bits
    #[arg(long, global = true, default_value_t = 256, value_parser = clap::value_parser!(u32).range(64..))]
    bits: u32,
    /// q-expansion truncation (per-command default when omitted)
    #[arg(long, global = true, value_parser = clap::value_parser!(i64).range(8..))]
    qtrunc: Option<i64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Shorthand for --format json
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Residual threshold above which a report is a breach
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// q-expansion of the Hauptmodul j_p*
    Qexp {
        #[arg(long)]
        p: i64,
    },
    /// Γ₀(p) classes of Heegner forms of discriminant −d
    Classes {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        d: i64,
        #[arg(long)]
        beta: Option<i64>,
    },
    /// Weight 1/2 basis forms f_{d,p} for admissible d up to --d
    Basis {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        d: i64,
    },
    /// Weak Jacobi form φ_{D,p}
    Phi {
        #[arg(long)]
        p: i64,
        #[arg(long = "D")]
        big_d: i64,
    },
    /// Modular trace t^(p)(d)
    Trace {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        d: i64,
    },
    /// Twisted trace t^(p)(D,d)/√D
    TwistedTrace {
        #[arg(long)]
        p: i64,
        #[arg(long = "D")]
        big_d: i64,
        #[arg(long)]
        d: i64,
        #[arg(long)]
        beta: Option<i64>,
    },
    /// Twisted trace of the m-th Faber polynomial
    FaberTrace {
        #[arg(long)]
        p: i64,
        #[arg(long = "D")]
        big_d: i64,
        #[arg(long)]
        d: i64,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Numeric checks of the product identities and transformation laws
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Recompute every worked example and print a pass/fail table
    ReproducePaper {
        #[arg(long)]
        p: Option<i64>,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// Borcherds product for H_d(j_p*)
    Product {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        d: i64,
        #[arg(long)]
        beta: Option<i64>,
    },
    /// Twisted product for H_{D,d,p}(j_p*)
    TwistedProduct {
        #[arg(long)]
        p: i64,
        #[arg(long = "D")]
        big_d: i64,
        #[arg(long)]
        d: i64,
    },
    /// Weight 1/2 transformation laws of f_{d,p} at a test point
    Transformations {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        d: i64,
        /// Test point as "x+yi"
        #[arg(long, default_value = "0+3i")]
        tau: String,
    },
}

enum Failure {
    Usage(String),
    Breach,
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BadBeta { .. }
            | Error::BadDiscriminant(_)
            | Error::UnsupportedPrime(_)
            | Error::BadD(..)
            | Error::BadL(..)
            | Error::NotAdmissible(..)
            | Error::NotFundamental(_)
            | Error::NotCoprime(..)
            | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = cli.cfg;
    if cfg.json {
        cfg.format = Format::Json;
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli.cmd, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Breach) => ExitCode::from(1),
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: &Command, cfg: &RunConfig) -> Outcome {
    let bits = cfg.bits as usize;
    let mut out = std::io::stdout().lock();
    match *cmd {
        Command::Qexp { p } => {
            let h = qexp(p, cfg.qtrunc.unwrap_or(halfint::DEFAULT_TRUNC))?;
            let rows: Vec<(i64, String)> = h.series().terms().map(|(k, c)| (k, c.to_string())).collect();
            emit_series(&mut out, cfg.format, &format!("j_{p}*"), &rows)
        }
        Command::Classes { p, d, beta } => {
            let beta = match beta {
                Some(b) => b,
                None => default_beta(d, p).ok_or_else(|| Failure::Usage(format!("-{d} is not a square modulo {}", 4 * p)))?,
            };
            let classes = gamma0_classes(d, p, beta)?;
            match cfg.format {
                Format::Json => json_line(&mut out, &classes)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["a", "b", "c", "stab_gamma", "stab_gamma0", "stab_fricke"])?;
                    for c in &classes {
                        let f = c.form;
                        w.write_record(
                            [f.a, f.b, f.c, c.stab_gamma.into(), c.stab_gamma0.into(), c.stab_fricke.into()].map(|x| x.to_string()),
                        )?;
                    }
                    w.flush()?;
                }
                Format::Text => {
                    writeln!(out, "Q_{{{d},{p},{beta}}}/Gamma0({p}): {} classes", classes.len())?;
                    for c in &classes {
                        writeln!(out, "{}  |Gamma0_Q| = {}  |Gamma0*_Q| = {}", c.form, c.stab_gamma0, c.stab_fricke)?;
                    }
                }
            }
            Ok(())
        }
        Command::Basis { p, d } => {
            let forms = basis(p, d, cfg.qtrunc.unwrap_or(halfint::DEFAULT_TRUNC))?;
            match cfg.format {
                Format::Json => {
                    let v: Vec<_> = forms
                        .iter()
                        .map(|f| {
                            let coeffs: Vec<(i64, String)> = f.series.terms().map(|(k, c)| (k, c.to_string())).collect();
                            serde_json::json!({ "label": f.label, "p": f.p, "d": f.d, "trunc": f.series.trunc(), "coefficients": coeffs })
                        })
                        .collect();
                    json_line(&mut out, &v)?;
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["label", "n", "coefficient"])?;
                    for f in &forms {
                        for (k, c) in f.series.terms() {
                            w.write_record([f.label.clone(), k.to_string(), c.to_string()])?;
                        }
                    }
                    w.flush()?;
                }
                Format::Text => {
                    for f in &forms {
                        writeln!(out, "{} = {}", f.label, series_text(&f.series))?;
                    }
                }
            }
            Ok(())
        }
        Command::Phi { p, big_d } => {
            let f = phi(big_d, p, cfg.qtrunc.unwrap_or_else(|| rows_for(big_d.max(4 * p), p)))?;
            match cfg.format {
                Format::Json => json_line(&mut out, &f)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["n", "r", "coefficient"])?;
                    for (n, r, c) in f.base.cells() {
                        w.write_record([n.to_string(), r.to_string(), c.to_string()])?;
                    }
                    w.flush()?;
                }
                Format::Text => {
                    writeln!(out, "phi_{{{big_d},{p}}}: weight 2, index {p}, discriminants >= {}", f.min_disc)?;
                    for (n, r, c) in f.base.cells() {
                        writeln!(out, "q^{n} zeta^{r}: {c}")?;
                    }
                }
            }
            Ok(())
        }
        Command::Trace { p, d } => trace_out(&mut out, cfg, traces::trace(p, d, bits)?),
        Command::TwistedTrace { p, big_d, d, beta } => {
            trace_out(&mut out, cfg, traces::twisted_trace_with_beta(p, big_d, d, beta, bits)?)
        }
        Command::FaberTrace { p, big_d, d, m } => trace_out(&mut out, cfg, traces::twisted_faber_trace(p, big_d, d, m, bits)?),
        Command::Verify { ref what } => {
            let tol = cfg.tolerance.unwrap_or(PRODUCT_TOLERANCE);
            match *what {
                Verify::Product { p, d, beta } => {
                    let q = cfg.qtrunc.unwrap_or(12) as usize;
                    product_out(&mut out, cfg, traces::verify_borcherds_product(p, d, beta, bits, q, tol)?)
                }
                Verify::TwistedProduct { p, big_d, d } => {
                    let q = cfg.qtrunc.unwrap_or(8) as usize;
                    product_out(&mut out, cfg, traces::verify_twisted_product(p, big_d, d, bits, q, tol)?)
                }
                Verify::Transformations { p, d, ref tau } => {
                    let f = halfint::form(p, d, cfg.qtrunc.unwrap_or(halfint::DEFAULT_TRUNC))?;
                    let t = BigComplex::parse(tau, bits).ok_or_else(|| Failure::Usage(format!("cannot parse tau {tau:?}")))?;
                    let r = check_transformations(&f, &t, bits)?;
                    let tol = cfg.tolerance.unwrap_or(1e-30);
                    let ok = r.max_residual < tol;
                    match cfg.format {
                        Format::Json => {
                            let status = if ok { Status::Ok } else { Status::Breach };
                            json_line(&mut out, &serde_json::json!({ "report": r, "status": status }))?
                        }
                        Format::Csv => {
                            let mut w = csv::Writer::from_writer(&mut out);
                            w.write_record(["label", "law", "residual"])?;
                            for (m, x) in &r.inversion {
                                w.write_record([f.label.clone(), format!("inversion_{m}"), format!("{x:.3e}")])?;
                            }
                            if let Some(x) = r.extra {
                                w.write_record([f.label.clone(), "extra".into(), format!("{x:.3e}")])?;
                            }
                            w.write_record([f.label.clone(), "translation".into(), format!("{:.3e}", r.translation)])?;
                            w.flush()?;
                        }
                        Format::Text => writeln!(
                            out,
                            "{}: max residual {:.3e} using {} terms: {}",
                            f.label,
                            r.max_residual,
                            r.terms_used,
                            if ok { "ok" } else { "breach" }
                        )?,
                    }
                    if ok {
                        Ok(())
                    } else {
                        Err(Failure::Breach)
                    }
                }
            }
        }
        Command::ReproducePaper { p } => {
            let rows = reproduce::run(p, bits);
            reproduce::emit(&mut out, cfg.format, &rows)?;
            if rows.iter().all(|r| r.status == Status::Ok) {
                Ok(())
            } else {
                Err(Failure::Breach)
            }
        }
    }
}

fn series_text(s: &heegner::ExactSeries) -> String {
    let mut t = String::new();
    for (k, c) in s.terms() {
        let neg = c < heegner::Rational::from_integer(0.into());
        let mag = if neg { -c } else { c };
        t += match (t.is_empty(), neg) {
            (true, false) => "",
            (true, true) => "-",
            (false, false) => " + ",
            (false, true) => " - ",
        };
        let e = if s.scale() == 1 { k.to_string() } else { format!("{k}/{}", s.scale()) };
        t += &format!("{mag}*q^{e}");
    }
    let e = if s.scale() == 1 { s.trunc().to_string() } else { format!("{}/{}", s.trunc(), s.scale()) };
    t + &format!(" + O(q^{e})")
}

fn json_line<T: Serialize>(out: &mut impl Write, v: &T) -> Outcome {
    let s = serde_json::to_string(v).map_err(|e| Failure::Compute(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn emit_series(out: &mut impl Write, format: Format, name: &str, rows: &[(i64, String)]) -> Outcome {
    match format {
        Format::Json => json_line(out, &serde_json::json!({ "name": name, "coefficients": rows }))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["n", "coefficient"])?;
            for (n, c) in rows {
                w.write_record([n.to_string(), c.clone()])?;
            }
            w.flush()?;
        }
        Format::Text => {
            for (n, c) in rows {
                writeln!(out, "q^{n}: {c}")?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceRow<'a> {
    kind: &'a str,
    p: i64,
    d: i64,
    #[serde(rename = "D")]
    big_d: Option<i64>,
    m: Option<u32>,
    beta: Option<i64>,
    bits: usize,
    numeric: &'a str,
    recognized: &'a str,
    crosscheck: &'a str,
    residual: &'a str,
    status: Status,
}

fn trace_out(out: &mut impl Write, cfg: &RunConfig, mut r: TraceReport) -> Outcome {
    if r.residual_f64 > cfg.tolerance.unwrap_or(RECOGNITION_TOLERANCE) {
        r.status = Status::Breach;
    }
    match cfg.format {
        Format::Json => json_line(out, &r)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let i = &r.inputs;
            w.serialize(TraceRow {
                kind: i.kind,
                p: i.p,
                d: i.d,
                big_d: i.big_d,
                m: i.m,
                beta: i.beta,
                bits: i.bits,
                numeric: &r.numeric,
                recognized: &r.recognized,
                crosscheck: &r.crosscheck,
                residual: &r.residual,
                status: r.status,
            })?;
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "{}", describe(&r.inputs))?;
            writeln!(out, "numeric:    {}", r.numeric)?;
            writeln!(out, "recognized: {}", r.value)?;
            writeln!(out, "crosscheck: {}", r.crosscheck)?;
            writeln!(out, "residual:   {}", r.residual)?;
            writeln!(out, "status:     {}", status_str(r.status))?;
        }
    }
    match r.status {
        Status::Ok => Ok(()),
        Status::Breach => Err(Failure::Breach),
    }
}

#[derive(Serialize)]
struct ProductRow<'a> {
    kind: &'a str,
    p: i64,
    d: i64,
    #[serde(rename = "D")]
    big_d: Option<i64>,
    beta: Option<i64>,
    bits: usize,
    qtrunc: Option<usize>,
    log_q: &'a str,
    expected_log_q: &'a str,
    exponents: String,
    residual: &'a str,
    status: Status,
}

fn product_out(out: &mut impl Write, cfg: &RunConfig, r: ProductReport) -> Outcome {
    match cfg.format {
        Format::Json => json_line(out, &r)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let i = &r.inputs;
            w.serialize(ProductRow {
                kind: i.kind,
                p: i.p,
                d: i.d,
                big_d: i.big_d,
                beta: i.beta,
                bits: i.bits,
                qtrunc: i.qtrunc,
                log_q: &r.crosscheck.log_q,
                expected_log_q: &r.crosscheck.expected_log_q,
                exponents: r.crosscheck.exponents.join(";"),
                residual: &r.residual,
                status: r.status,
            })?;
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "{}", describe(&r.inputs))?;
            writeln!(out, "log q:     {} (expected {})", r.crosscheck.log_q, r.crosscheck.expected_log_q)?;
            writeln!(out, "exponents: {}", r.crosscheck.exponents.join(", "))?;
            for (k, (a, b)) in r.numeric.iter().zip(&r.recognized).enumerate() {
                writeln!(out, "q^{}: {a} vs {b}", k + 1)?;
            }
            writeln!(out, "residual:  {}", r.residual)?;
            writeln!(out, "status:    {}", status_str(r.status))?;
        }
    }
    match r.status {
        Status::Ok => Ok(()),
        Status::Breach => Err(Failure::Breach),
    }
}

fn describe(i: &traces::Inputs) -> String {
    let mut s = format!("{} p={} d={}", i.kind, i.p, i.d);
    if let Some(x) = i.big_d {
        s += &format!(" D={x}");
    }
    if let Some(x) = i.m {
        s += &format!(" m={x}");
    }
    if let Some(x) = i.beta {
        s += &format!(" beta={x}");
    }
    s + &format!(" bits={}", i.bits)
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Breach => "breach",
    }
}
