//! Traces of singular moduli of j_p* and the product identities behind them.

use crate::arith::{divisors, gcd, is_fundamental, kronecker};
use crate::error::{Error, Result};
use crate::halfint::{self, is_admissible, is_plus_exponent, HalfIntForm};
use crate::hauptmodul::{evaluate_cm, faber, heegner_point, qexp, reduce_point, terms_needed, HauptmodulSeries};
use crate::jacobi::phi;
use crate::numeric::{
    real_abs, real_from_i64, real_from_rational, real_round, real_sqrt, real_to_f64, real_to_string, BigComplex, Real,
    DEFAULT_BITS,
};
use crate::qseries::{rat, ExactSeries};
use crate::quadforms::{class_list, default_beta, gamma0_classes, genus_char, hurwitz, weighted_count, ClassRep};
use crate::Rational;
use astro_float::RoundingMode;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// Relative tolerance for integer and √D-integer recognition.
pub const RECOGNITION_TOLERANCE: f64 = 1e-20;
const DIGITS: usize = 40;

/// a + b√D.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadIntegerValue {
    pub big_d: i64,
    pub a: Rational,
    pub b: Rational,
}

impl std::fmt::Display for QuadIntegerValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt({})", self.b, self.big_d),
            _ => write!(f, "{} + {}*sqrt({})", self.a, self.b, self.big_d),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Breach,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inputs {
    pub kind: &'static str,
    pub p: i64,
    pub d: i64,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub big_d: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<i64>,
    pub bits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qtrunc: Option<usize>,
}

/// A trace, its exact recognition, and the coefficient-side value it must match.
#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub inputs: Inputs,
    /// Numeric value (divided by √D for twisted traces).
    pub numeric: String,
    pub recognized: String,
    pub crosscheck: String,
    pub residual: String,
    pub status: Status,
    #[serde(skip)]
    pub value: QuadIntegerValue,
    #[serde(skip)]
    pub residual_f64: f64,
    #[serde(skip)]
    pub crosscheck_value: Rational,
}

/// Coefficientwise comparison of the two sides of a product identity in log form.
#[derive(Clone, Debug, Serialize)]
pub struct ProductReport {
    pub inputs: Inputs,
    /// Numeric log coefficients k = 1..qtrunc from the class side.
    pub numeric: Vec<String>,
    /// Exact log coefficients from the weight-1/2 side.
    pub recognized: Vec<String>,
    pub crosscheck: ProductCrosscheck,
    pub residual: String,
    pub status: Status,
    #[serde(skip)]
    pub residual_f64: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductCrosscheck {
    /// Coefficient of log q on the class side.
    pub log_q: String,
    /// −H_{p,β}(d) (plain) or 0 (twisted).
    pub expected_log_q: String,
    /// A*(u²D, d) for u = 1, 2, … (D = 1 for the plain product).
    pub exponents: Vec<String>,
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::Breach
    }
}

fn fmt_residual(x: f64) -> String {
    format!("{x:.3e}")
}

/// Nearest integer to `x`, if within relative `tol`; residual also counts |im|.
pub fn recognize_integer(x: &BigComplex, tol: f64) -> Result<(BigInt, f64)> {
    let n = real_round(&x.re);
    let diff = x.re.sub(&crate::numeric::real_from_int(&n, x.precision()), x.precision(), RoundingMode::ToEven);
    let residual = real_to_f64(&real_abs(&diff)) + real_to_f64(&real_abs(&x.im));
    let scale = real_to_f64(&crate::numeric::real_from_int(&n.abs(), 64)).max(1.0);
    if residual / scale > tol || residual.is_nan() {
        return Err(Error::RecognitionFailure { value: x.to_string_digits(DIGITS), residual: fmt_residual(residual) });
    }
    Ok((n, residual))
}

fn hauptmodul_for(p: i64, classes: &[ClassRep], bits: usize) -> Result<HauptmodulSeries> {
    let mut need = 64;
    for c in classes {
        let tau = reduce_point(&heegner_point(c, 64), p)?;
        need = need.max(terms_needed(p, real_to_f64(&tau.im), bits));
    }
    qexp(p, need)
}

fn cm_values(h: &HauptmodulSeries, classes: &[ClassRep], bits: usize) -> Result<Vec<BigComplex>> {
    classes.par_iter().map(|c| evaluate_cm(h, c, bits)).collect()
}

fn check_p(p: i64) -> Result<()> {
    if crate::hauptmodul::ETA_PRIMES.contains(&p) {
        Ok(())
    } else {
        Err(Error::UnsupportedPrime(p))
    }
}

/// Validates (p, D, d) for twisted traces.
pub fn check_twisted_inputs(p: i64, big_d: i64, d: i64) -> Result<()> {
    check_p(p)?;
    if big_d <= 1 || !is_fundamental(big_d) {
        return Err(Error::NotFundamental(big_d));
    }
    if d <= 0 || !is_fundamental(-d) {
        return Err(Error::NotFundamental(-d));
    }
    if gcd(big_d, d) != 1 {
        return Err(Error::NotCoprime(big_d, d));
    }
    if !is_plus_exponent(big_d, p) {
        return Err(Error::BadD(big_d, p));
    }
    if !is_admissible(d, p) {
        return Err(Error::NotAdmissible(d, p));
    }
    Ok(())
}

fn form_with(p: i64, d: i64, trunc: i64) -> Result<HalfIntForm> {
    halfint::form(p, d, trunc.max(halfint::DEFAULT_TRUNC))
}

/// t^(p)(d) = Σ_Q j_p*(α_Q)/|Γ̄₀(p)_Q|, with t(−1) = −1 and t(0) = 2.
pub fn trace(p: i64, d: i64, bits: usize) -> Result<TraceReport> {
    check_p(p)?;
    let inputs = Inputs { kind: "trace", p, d, big_d: None, m: None, beta: None, bits, qtrunc: None };
    let fixed = match d {
        -1 => Some(-1),
        0 => Some(2),
        _ => None,
    };
    if let Some(v) = fixed {
        let r = rat(v);
        return Ok(TraceReport {
            inputs,
            numeric: v.to_string(),
            recognized: v.to_string(),
            crosscheck: v.to_string(),
            residual: fmt_residual(0.0),
            status: Status::Ok,
            value: QuadIntegerValue { big_d: 1, a: r.clone(), b: Rational::zero() },
            residual_f64: 0.0,
            crosscheck_value: r,
        });
    }
    if !is_admissible(d, p) {
        return Err(Error::NotAdmissible(d, p));
    }
    let beta = default_beta(d, p).ok_or(Error::NotAdmissible(d, p))?;
    let classes = gamma0_classes(d, p, beta)?;
    let h = hauptmodul_for(p, &classes, bits)?;
    let vals = cm_values(&h, &classes, bits)?;
    let w = bits + 32;
    let mut acc = BigComplex::zero(w);
    for (c, v) in classes.iter().zip(&vals) {
        acc = acc.add(&v.div_real(&real_from_i64(c.stab_gamma0 as i64, w)));
    }
    let (n, residual) = recognize_integer(&acc, RECOGNITION_TOLERANCE)?;
    let cross = form_with(p, d, 2)?.coefficient_a(1)?;
    let recognized = rat(n.clone());
    Ok(TraceReport {
        inputs: Inputs { beta: Some(beta), ..inputs },
        numeric: real_to_string(&acc.re, DIGITS),
        recognized: n.to_string(),
        crosscheck: cross.to_string(),
        residual: fmt_residual(residual),
        status: status(recognized == cross),
        value: QuadIntegerValue { big_d: 1, a: recognized, b: Rational::zero() },
        residual_f64: residual,
        crosscheck_value: cross,
    })
}

/// Classes of discriminant −dD with their genus characters.
pub fn twisted_classes(p: i64, big_d: i64, d: i64, beta: Option<i64>) -> Result<(i64, Vec<(ClassRep, i32)>)> {
    let disc = d * big_d;
    let beta = match beta {
        Some(b) => b,
        None => default_beta(disc, p).ok_or(Error::NotAdmissible(disc, p))?,
    };
    let classes = gamma0_classes(disc, p, beta)?;
    let out = classes
        .into_iter()
        .map(|c| {
            let chi = genus_char(&c.form, big_d, d)?;
            Ok((c, chi))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((beta, out))
}

/// (β, Σ_Q χ(Q) t_m(α_Q)/√D) without recognition or cross-check; t_1 = j_p*.
pub fn twisted_value(p: i64, big_d: i64, d: i64, beta: Option<i64>, bits: usize, m: u32) -> Result<(i64, BigComplex)> {
    check_twisted_inputs(p, big_d, d)?;
    twisted_sum(p, big_d, d, beta, bits, m)
}

fn twisted_sum(p: i64, big_d: i64, d: i64, beta: Option<i64>, bits: usize, m: u32) -> Result<(i64, BigComplex)> {
    let (beta, classes) = twisted_classes(p, big_d, d, beta)?;
    let reps: Vec<ClassRep> = classes.iter().map(|(c, _)| c.clone()).collect();
    let h = hauptmodul_for(p, &reps, bits)?;
    let vals = cm_values(&h, &reps, bits)?;
    let poly = if m > 1 { Some(faber(&h, m)?) } else { None };
    let w = bits + 32;
    let mut acc = BigComplex::zero(w);
    for ((_, chi), v) in classes.iter().zip(&vals) {
        let v = match &poly {
            Some(t) => t.eval(v),
            None => v.clone(),
        };
        acc = if *chi > 0 { acc.add(&v) } else { acc.sub(&v) };
    }
    let sq = real_sqrt(&real_from_i64(big_d, w), w);
    Ok((beta, acc.div_real(&sq)))
}

fn twisted_report(
    inputs: Inputs,
    big_d: i64,
    scaled: BigComplex,
    cross: Rational,
) -> Result<TraceReport> {
    let (n, residual) = recognize_integer(&scaled, RECOGNITION_TOLERANCE)?;
    let b = rat(n.clone());
    Ok(TraceReport {
        inputs,
        numeric: real_to_string(&scaled.re, DIGITS),
        recognized: n.to_string(),
        crosscheck: cross.to_string(),
        residual: fmt_residual(residual),
        status: status(b == cross),
        value: QuadIntegerValue { big_d, a: Rational::zero(), b },
        residual_f64: residual,
        crosscheck_value: cross,
    })
}

/// t^(p)(D,d)/√D with t^(p)(D,d) = Σ_Q χ(Q) j_p*(α_Q), cross-checked against A*(D,d).
pub fn twisted_trace(p: i64, big_d: i64, d: i64, bits: usize) -> Result<TraceReport> {
    twisted_trace_with_beta(p, big_d, d, None, bits)
}

pub fn twisted_trace_with_beta(p: i64, big_d: i64, d: i64, beta: Option<i64>, bits: usize) -> Result<TraceReport> {
    check_twisted_inputs(p, big_d, d)?;
    let (beta, scaled) = twisted_sum(p, big_d, d, beta, bits, 1)?;
    let cross = form_with(p, d, big_d + 1)?.a_star(big_d)?;
    let inputs = Inputs { kind: "twisted-trace", p, d, big_d: Some(big_d), m: None, beta: Some(beta), bits, qtrunc: None };
    twisted_report(inputs, big_d, scaled, cross)
}

/// −Σ_{u|m} u (D/(m/u)) B*(u²D, d), from the Jacobi side.
pub fn faber_crosscheck(p: i64, big_d: i64, d: i64, m: u32) -> Result<Rational> {
    let mut acc = Rational::zero();
    for u in divisors(m as i64) {
        let chi = kronecker(big_d, m as i64 / u);
        if chi == 0 {
            continue;
        }
        let f = phi(u * u * big_d, p, crate::jacobi::rows_for(d, p))?;
        acc -= rat(u * chi as i64) * f.b_star(d)?;
    }
    Ok(acc)
}

/// Σ_Q χ(Q) t_m(α_Q)/√D against −Σ_{u|m} u (D/(m/u)) B*(u²D,d).
pub fn twisted_faber_trace(p: i64, big_d: i64, d: i64, m: u32, bits: usize) -> Result<TraceReport> {
    check_twisted_inputs(p, big_d, d)?;
    if m == 0 {
        return Err(Error::Parse("m must be at least 1".into()));
    }
    let (beta, scaled) = twisted_sum(p, big_d, d, None, bits, m)?;
    let cross = faber_crosscheck(p, big_d, d, m)?;
    let inputs =
        Inputs { kind: "faber-trace", p, d, big_d: Some(big_d), m: Some(m), beta: Some(beta), bits, qtrunc: None };
    twisted_report(inputs, big_d, scaled, cross)
}

/// Coefficients L_1..L_n of log(q(j_p* − c)) for a numeric constant c.
fn log_coefficients(h: &HauptmodulSeries, c: &BigComplex, n: usize, w: usize) -> Result<Vec<BigComplex>> {
    // g_0 = 1, g_1 = −c, g_k = a_{k−1}
    let mut g = vec![BigComplex::one(w), c.neg()];
    for k in 2..=n {
        let a = h.series().coeff(k as i64 - 1)?;
        g.push(BigComplex::from_real(real_from_rational(&a, w), w));
    }
    let mut l: Vec<BigComplex> = vec![BigComplex::zero(w)];
    for k in 1..=n {
        let mut s = g[k].mul_int(&BigInt::from(k));
        for i in 1..k {
            s = s.sub(&l[i].mul_int(&BigInt::from(i)).mul(&g[k - i]));
        }
        l.push(s.div_real(&real_from_i64(k as i64, w)));
    }
    Ok(l)
}

fn max_deviation(numeric: &[BigComplex], exact: &[Rational], w: usize) -> f64 {
    numeric
        .iter()
        .zip(exact)
        .map(|(x, e)| real_to_f64(&x.sub(&BigComplex::from_real(real_from_rational(e, w), w)).abs()))
        .fold(0.0, f64::max)
}

/// Compares log of q^{−H} ∏ (1 − q^u)^{A*(u²,d)} with Σ_Q log(j_p*(τ) − j_p*(α_Q))/|Γ̄₀(p)_Q|
/// through q^qtrunc. Passes when the log-q coefficients agree exactly and every
/// other coefficient agrees within `tolerance`.
pub fn verify_borcherds_product(p: i64, d: i64, beta: Option<i64>, bits: usize, qtrunc: usize, tolerance: f64) -> Result<ProductReport> {
    check_p(p)?;
    if !is_admissible(d, p) {
        return Err(Error::NotAdmissible(d, p));
    }
    let beta = match beta {
        Some(b) => b,
        None => default_beta(d, p).ok_or(Error::NotAdmissible(d, p))?,
    };
    let classes = gamma0_classes(d, p, beta)?;
    let f = form_with(p, d, (qtrunc * qtrunc) as i64 + 1)?;
    // exact side: k-th coefficient −Σ_{u|k} A*(u²,d)·u/k
    let exponents: Vec<Rational> = (1..=qtrunc as i64).map(|u| f.a_star(u * u)).collect::<Result<_>>()?;
    let exact: Vec<Rational> = (1..=qtrunc as i64)
        .map(|k| {
            -divisors(k).into_iter().map(|u| exponents[(u - 1) as usize].clone() * rat(u)).sum::<Rational>() / rat(k)
        })
        .collect();
    let w = bits + 64;
    let h = {
        let base = hauptmodul_for(p, &classes, bits)?;
        if base.trunc() < qtrunc as i64 + 2 {
            qexp(p, qtrunc as i64 + 2)?
        } else {
            base
        }
    };
    let vals = cm_values(&h, &classes, bits)?;
    let mut numeric = vec![BigComplex::zero(w); qtrunc];
    for (c, v) in classes.iter().zip(&vals) {
        let l = log_coefficients(&h, &v.with_precision(w), qtrunc, w)?;
        let wt = real_from_rational(&c.weight(), w);
        for k in 1..=qtrunc {
            numeric[k - 1] = numeric[k - 1].add(&l[k].mul_real(&wt));
        }
    }
    let log_q = -weighted_count(&classes);
    // independent value of H_{p,β}(d): the level-one Hurwitz count when the
    // Γ₀(p) and SL₂(Z) class sets are in bijection, else the direct count
    let expected = if d % (p * p) != 0 || !is_admissible(d / (p * p), p) {
        let _ = class_list(d)?;
        -hurwitz(d)
    } else {
        log_q.clone()
    };
    let residual = max_deviation(&numeric, &exact, w);
    Ok(ProductReport {
        inputs: Inputs { kind: "product", p, d, big_d: None, m: None, beta: Some(beta), bits, qtrunc: Some(qtrunc) },
        numeric: numeric.iter().map(|x| real_to_string(&x.re, DIGITS)).collect(),
        recognized: exact.iter().map(|x| x.to_string()).collect(),
        crosscheck: ProductCrosscheck {
            log_q: log_q.to_string(),
            expected_log_q: expected.to_string(),
            exponents: exponents.iter().map(|x| x.to_string()).collect(),
        },
        residual: fmt_residual(residual),
        status: status(residual < tolerance && log_q == expected),
        residual_f64: residual,
    })
}

/// √D-part of log P_D(q^u) = −√D Σ_{m≥1} (D/m) q^{um}/m, through q^qtrunc.
pub fn p_d_log_series(big_d: i64, u: i64, qtrunc: i64) -> ExactSeries {
    let terms: Vec<(i64, Rational)> = (1..=qtrunc / u)
        .filter_map(|m| {
            let chi = kronecker(big_d, m);
            (chi != 0).then(|| (u * m, Rational::new(BigInt::from(-chi), BigInt::from(m))))
        })
        .collect();
    ExactSeries::from_terms(1, &terms, qtrunc + 1)
}

/// Compares Σ_Q χ(Q) log(j_p*(τ) − j_p*(α_Q)) with Σ_u A*(u²D,d) log P_D(q^u) through q^qtrunc,
/// both divided by √D.
pub fn verify_twisted_product(p: i64, big_d: i64, d: i64, bits: usize, qtrunc: usize, tolerance: f64) -> Result<ProductReport> {
    check_twisted_inputs(p, big_d, d)?;
    let qt = qtrunc as i64;
    let f = form_with(p, d, qt * qt * big_d + 1)?;
    let exponents: Vec<Rational> = (1..=qt).map(|u| f.a_star(u * u * big_d)).collect::<Result<_>>()?;
    let mut exact_series = ExactSeries::zero(1, qt + 1);
    for u in 1..=qt {
        exact_series = exact_series.add(&p_d_log_series(big_d, u, qt).scalar_mul(&exponents[(u - 1) as usize]))?;
    }
    let exact: Vec<Rational> = (1..=qt).map(|k| exact_series.coeff(k)).collect::<Result<_>>()?;
    let (beta, classes) = twisted_classes(p, big_d, d, None)?;
    let chi_sum: i64 = classes.iter().map(|(_, c)| *c as i64).sum();
    let reps: Vec<ClassRep> = classes.iter().map(|(c, _)| c.clone()).collect();
    let w = bits + 64;
    let h = {
        let base = hauptmodul_for(p, &reps, bits)?;
        if base.trunc() < qt + 2 {
            qexp(p, qt + 2)?
        } else {
            base
        }
    };
    let vals = cm_values(&h, &reps, bits)?;
    let mut numeric = vec![BigComplex::zero(w); qtrunc];
    for ((_, chi), v) in classes.iter().zip(&vals) {
        let l = log_coefficients(&h, &v.with_precision(w), qtrunc, w)?;
        for k in 1..=qtrunc {
            numeric[k - 1] = if *chi > 0 { numeric[k - 1].add(&l[k]) } else { numeric[k - 1].sub(&l[k]) };
        }
    }
    let sq: Real = real_sqrt(&real_from_i64(big_d, w), w);
    let numeric: Vec<BigComplex> = numeric.iter().map(|x| x.div_real(&sq)).collect();
    let residual = max_deviation(&numeric, &exact, w);
    let log_q = rat(-chi_sum);
    Ok(ProductReport {
        inputs: Inputs {
            kind: "twisted-product",
            p,
            d,
            big_d: Some(big_d),
            m: None,
            beta: Some(beta),
            bits,
            qtrunc: Some(qtrunc),
        },
        numeric: numeric.iter().map(|x| real_to_string(&x.re, DIGITS)).collect(),
        recognized: exact.iter().map(|x| x.to_string()).collect(),
        crosscheck: ProductCrosscheck {
            log_q: log_q.to_string(),
            expected_log_q: "0".into(),
            exponents: exponents.iter().map(|x| x.to_string()).collect(),
        },
        residual: fmt_residual(residual),
        status: status(residual < tolerance && chi_sum == 0),
        residual_f64: residual,
    })
}

/// Default precision for reports.
pub fn default_bits() -> usize {
    DEFAULT_BITS
}
