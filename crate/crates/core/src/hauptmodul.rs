//! The Hauptmodul j_p* of Γ₀(p)*, its Faber polynomials, and CM evaluation.

use crate::error::{Error, Result};
use crate::numeric::{real_cmp, real_from_int, real_from_rational, real_pow2, real_round, real_sqrt, BigComplex, Real};
use crate::qseries::{delta, eisenstein, eta_quotient, rat, ExactSeries};
use crate::quadforms::ClassRep;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cmp::Ordering;

/// Primes p with (p − 1) | 24, where j_p* is an η-quotient.
pub const ETA_PRIMES: [i64; 5] = [2, 3, 5, 7, 13];
/// Hard ceiling on the number of q-terms used for one evaluation.
pub const MAX_TERMS: i64 = 10_000;

/// q⁻¹ + 0 + a₁q + … with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HauptmodulSeries {
    p: i64,
    series: ExactSeries,
}

impl HauptmodulSeries {
    /// Wraps an externally computed expansion (for primes without an η-quotient formula).
    pub fn from_external(p: i64, series: ExactSeries) -> Result<Self> {
        let ok = series.scale() == 1
            && series.is_integral()
            && series.valuation() == -1
            && series.trunc() >= 1
            && series.coeff(-1)? == rat(1)
            && series.coeff(0)?.is_zero();
        if !ok {
            return Err(Error::Parse("a Hauptmodul expansion must be q^-1 + 0 + O(q) with integer coefficients".into()));
        }
        Ok(HauptmodulSeries { p, series })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn series(&self) -> &ExactSeries {
        &self.series
    }

    pub fn trunc(&self) -> i64 {
        self.series.trunc()
    }

    pub fn coeff(&self, n: i64) -> Result<BigInt> {
        self.series.int_coeff(n)
    }

    /// Sum of the expansion at τ, without any point reduction.
    ///
    /// Errors with `InsufficientTruncation` when the tail has not dropped
    /// below 2^(−bits−20) before the known coefficients run out.
    pub fn evaluate(&self, tau: &BigComplex, bits: usize) -> Result<BigComplex> {
        sum_series(&self.series, tau, bits)
    }
}

/// Σ c_n qⁿ at τ for an integral series in integer powers of q.
pub fn sum_series(series: &ExactSeries, tau: &BigComplex, bits: usize) -> Result<BigComplex> {
    if !tau.im.is_positive() {
        return Err(Error::NotUpperHalfPlane);
    }
    let w = bits + 32;
    let tau = tau.with_precision(w);
    let q = tau.q_of();
    let thr = real_pow2(-(bits as i32) - 20, 64);
    let v = series.valuation();
    let mut qn = if v < 0 { q.recip().powi((-v) as u64) } else { q.powi(v as u64) };
    let mut acc = BigComplex::zero(w);
    let mut small_run = 0;
    let mut n = v;
    while n < series.trunc() {
        let c = series.coeff(n)?;
        if !c.is_zero() {
            let term = qn.mul_real(&real_from_rational(&c, w));
            let tiny = real_cmp(&term.abs(), &thr) == Ordering::Less;
            acc = acc.add(&term);
            small_run = if tiny { small_run + 1 } else { 0 };
            if small_run >= 4 {
                return Ok(acc.with_precision(bits));
            }
        }
        qn = qn.mul(&q);
        n += 1;
    }
    Err(Error::InsufficientTruncation { needed: 2 * series.trunc().max(16), available: series.trunc() })
}

/// Exact expansion of j_p* = (η(τ)/η(pτ))^e + e + p^{e/2}(η(pτ)/η(τ))^e, e = 24/(p−1),
/// known for exponents below `trunc`.
pub fn qexp(p: i64, trunc: i64) -> Result<HauptmodulSeries> {
    if !ETA_PRIMES.contains(&p) {
        return Err(Error::UnsupportedPrime(p));
    }
    let e = 24 / (p - 1);
    let t = trunc.max(2);
    let a = eta_quotient(p as u32, e, t);
    let b = eta_quotient(p as u32, -e, t).scalar_mul(&rat(BigInt::from(p).pow((e / 2) as u32)));
    let c = ExactSeries::monomial(1, 0, rat(e), t);
    let s = a.add(&b)?.add(&c)?;
    HauptmodulSeries::from_external(p, s)
}

/// Polynomial in t with t_m(series) = q^{−m} + O(q); `coeffs[k]` multiplies t^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaberPoly {
    pub m: u32,
    pub coeffs: Vec<BigInt>,
}

impl FaberPoly {
    pub fn eval_series(&self, t: &ExactSeries) -> Result<ExactSeries> {
        let mut acc = ExactSeries::monomial(1, 0, rat(self.coeffs[self.m as usize].clone()), t.trunc());
        for k in (0..self.m as usize).rev() {
            acc = acc.mul(t)?.add(&ExactSeries::monomial(1, 0, rat(self.coeffs[k].clone()), t.trunc() + 1))?;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &BigComplex) -> BigComplex {
        let mut acc = BigComplex::from_int(&self.coeffs[self.m as usize], x.precision());
        for k in (0..self.m as usize).rev() {
            acc = acc.mul(x).add(&BigComplex::from_int(&self.coeffs[k], x.precision()));
        }
        acc
    }
}

fn faber_of(t: &ExactSeries, m: u32) -> Result<FaberPoly> {
    let m_i = m as i64;
    if t.trunc() < m_i + 2 {
        return Err(Error::InsufficientTruncation { needed: m_i + 2, available: t.trunc() });
    }
    let mut powers = vec![ExactSeries::one(t.trunc() + m_i)];
    for _ in 0..m {
        let next = powers.last().unwrap().mul(t)?;
        powers.push(next);
    }
    let mut coeffs = vec![BigInt::zero(); m as usize + 1];
    coeffs[m as usize] = BigInt::one();
    let mut cur = powers[m as usize].clone();
    for e in (-(m_i - 1))..=0 {
        let c = cur.coeff(e)?;
        if c.is_zero() {
            continue;
        }
        if !c.is_integer() {
            return Err(Error::Parse("non-integral Faber coefficient".into()));
        }
        let k = (-e) as usize;
        coeffs[k] -= c.to_integer();
        let sub = if k == 0 { ExactSeries::monomial(1, 0, c.clone(), cur.trunc()) } else { powers[k].scalar_mul(&c) };
        cur = cur.sub(&sub)?;
    }
    Ok(FaberPoly { m, coeffs })
}

/// t_m for the Hauptmodul.
pub fn faber(h: &HauptmodulSeries, m: u32) -> Result<FaberPoly> {
    faber_of(&h.series, m)
}

/// j = E₄³/Δ, known below q^trunc.
pub fn classical_j(trunc: i64) -> ExactSeries {
    let e4 = eisenstein(4, trunc + 2).expect("weight 4");
    let num = e4.mul(&e4).unwrap().mul(&e4).unwrap();
    num.div(&delta(trunc + 2)).unwrap().truncate(trunc).unwrap()
}

/// J = j − 744.
pub fn classical_jj(trunc: i64) -> ExactSeries {
    classical_j(trunc).sub(&ExactSeries::monomial(1, 0, rat(744), trunc)).unwrap()
}

/// J_m, the Faber polynomial of J.
pub fn classical_faber(m: u32) -> FaberPoly {
    faber_of(&classical_jj(m as i64 + 4), m).expect("enough terms")
}

/// Rough number of terms after which |c_n qⁿ| < 2^(−bits−20) at height y.
pub fn terms_needed(p: i64, im_tau: f64, bits: usize) -> i64 {
    let target = (bits as f64 + 20.0) * std::f64::consts::LN_2;
    let mut n = 1i64;
    loop {
        let nf = n as f64;
        // |c_n| ≲ exp(4π√(n/p)) for the Hauptmodul of level p
        let log_term = 4.0 * std::f64::consts::PI * (nf / p as f64).sqrt() - 2.0 * std::f64::consts::PI * im_tau * nf;
        if log_term < -target && nf > 8.0 {
            return ((nf * 1.15) as i64 + 16).min(MAX_TERMS);
        }
        n += 1;
        if n > MAX_TERMS {
            return MAX_TERMS;
        }
    }
}

/// Ascend through Γ₀(p)* to a point of locally maximal imaginary part.
pub fn reduce_point(alpha: &BigComplex, p: i64) -> Result<BigComplex> {
    if !alpha.im.is_positive() {
        return Err(Error::NotUpperHalfPlane);
    }
    let w = alpha.precision();
    let pc = BigComplex::from_i64(p, w);
    let one = BigComplex::one(w);
    let mut tau = alpha.clone();
    let rel = real_pow2(-100, 64);
    for _ in 0..10_000 {
        let shift = real_round(&tau.re);
        tau = tau.sub(&BigComplex::from_int(&shift, w));
        let candidates = [
            pc.mul(&tau).recip().neg(),
            tau.div(&pc.mul(&tau).add(&one)),
            tau.div(&pc.mul(&tau).neg().add(&one)),
        ];
        let best = candidates.into_iter().max_by(|a, b| real_cmp(&a.im, &b.im)).unwrap();
        let gain = best.im.sub(&tau.im, w, astro_float::RoundingMode::ToEven);
        let bar = tau.im.mul(&rel, w, astro_float::RoundingMode::ToEven);
        if real_cmp(&gain, &bar) == Ordering::Greater {
            tau = best;
        } else {
            return Ok(tau);
        }
    }
    Err(Error::ConvergenceFailure(10_000))
}

/// α_Q = (−b + i√d)/(2a) at `bits` precision.
pub fn heegner_point(rep: &ClassRep, bits: usize) -> BigComplex {
    let (mb, d, two_a) = rep.heegner;
    let re = BigRational::new(mb.into(), two_a.into());
    let sq: Real = real_sqrt(&real_from_int(&BigInt::from(d), bits + 16), bits + 16);
    let im = sq.div(&real_from_int(&BigInt::from(two_a), bits + 16), bits, astro_float::RoundingMode::ToEven);
    BigComplex::new(real_from_rational(&re, bits), im, bits)
}

/// j_p*(α_Q): ascend, then sum the expansion, extending `h` as needed up to `MAX_TERMS`.
pub fn evaluate_cm(h: &HauptmodulSeries, rep: &ClassRep, bits: usize) -> Result<BigComplex> {
    let alpha = heegner_point(rep, bits + 32);
    let tau = reduce_point(&alpha, h.p)?;
    match h.evaluate(&tau, bits) {
        Ok(v) => Ok(v),
        Err(Error::InsufficientTruncation { .. }) => {
            let mut n = h.trunc().max(64);
            loop {
                n = (2 * n).min(MAX_TERMS);
                let bigger = qexp(h.p, n)?;
                match bigger.evaluate(&tau, bits) {
                    Ok(v) => return Ok(v),
                    Err(Error::InsufficientTruncation { .. }) if n < MAX_TERMS => continue,
                    Err(Error::InsufficientTruncation { .. }) => return Err(Error::ConvergenceFailure(MAX_TERMS)),
                    Err(e) => return Err(e),
                }
            }
        }
        Err(e) => Err(e),
    }
}

/// |j_p*(τ) − j_p*(W_p τ)|, an a-posteriori certificate for an evaluation.
pub fn fricke_residual(h: &HauptmodulSeries, tau: &BigComplex, bits: usize) -> Result<Real> {
    let w = tau.precision();
    let wt = BigComplex::from_i64(h.p, w).mul(tau).recip().neg();
    let a = h.evaluate(tau, bits)?;
    let b = h.evaluate(&wt, bits)?;
    Ok(a.sub(&b).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{real_to_f64, DEFAULT_BITS};
    use crate::qseries::eta_product;
    use crate::quadforms::gamma0_classes;

    fn ints(s: &ExactSeries, from: i64, to: i64) -> Vec<i64> {
        (from..to).map(|k| i64::try_from(s.int_coeff(k).unwrap()).unwrap()).collect()
    }

    #[test]
    fn eta_quotient_expansions() {
        let h2 = qexp(2, 10).unwrap();
        assert_eq!(ints(h2.series(), -1, 3), vec![1, 0, 4372, 96256]);
        let h3 = qexp(3, 10).unwrap();
        assert_eq!(ints(h3.series(), -1, 2), vec![1, 0, 783]);
        for p in ETA_PRIMES {
            let h = qexp(p, 30).unwrap();
            assert!(h.series().is_integral());
            assert_eq!(h.coeff(0).unwrap(), BigInt::zero());
        }
        assert_eq!(qexp(11, 10), Err(Error::UnsupportedPrime(11)));
    }

    #[test]
    fn hauptmodul_against_direct_quotient() {
        // (η(τ)/η(2τ))^24 + 24 + 4096 (η(2τ)/η(τ))^24 with the second quotient
        // computed as an independent η-product rather than a reciprocal.
        let n = 40;
        let a = eta_product(&[(1, 24), (2, -24)], n);
        let b = eta_product(&[(2, 24), (1, -24)], n).scalar_mul_int(4096);
        let direct = a.add(&b).unwrap().add(&ExactSeries::monomial(1, 0, rat(24), n)).unwrap();
        assert_eq!(&direct, qexp(2, n).unwrap().series());
    }

    #[test]
    fn faber_polynomials() {
        let h = qexp(2, 30).unwrap();
        let t1 = faber(&h, 1).unwrap();
        assert_eq!(t1.coeffs, vec![BigInt::zero(), BigInt::one()]);
        let t2 = faber(&h, 2).unwrap();
        assert_eq!(t2.coeffs, vec![BigInt::from(-8744), BigInt::zero(), BigInt::one()]);
        for m in 1..6 {
            let tm = faber(&h, m).unwrap();
            let s = tm.eval_series(h.series()).unwrap();
            assert_eq!(s.valuation(), -(m as i64));
            for e in (-(m as i64) + 1)..=0 {
                assert!(s.coeff(e).unwrap().is_zero());
            }
        }
        assert!(matches!(faber(&qexp(2, 3).unwrap(), 4), Err(Error::InsufficientTruncation { .. })));
    }

    #[test]
    fn classical_j_and_faber() {
        let j = classical_j(3);
        assert_eq!(ints(&j, -1, 2), vec![1, 744, 196884]);
        assert_eq!(classical_faber(1).coeffs, vec![BigInt::zero(), BigInt::one()]);
        assert_eq!(classical_faber(2).coeffs, vec![BigInt::from(-393768), BigInt::zero(), BigInt::one()]);
    }

    #[test]
    fn expansion_formula_exact() {
        // t_p(τ) = J(pτ) + J(τ) − t(τ)
        for p in [2i64, 3] {
            let n = 40;
            let h = qexp(p, n).unwrap();
            let tp = faber(&h, p as u32).unwrap().eval_series(h.series()).unwrap();
            let jj = classical_jj(n);
            let rhs = jj.dilate(p as u32).add(&jj).unwrap().sub(h.series()).unwrap();
            let t = tp.trunc().min(rhs.trunc());
            assert_eq!(tp.truncate(t).unwrap(), rhs.truncate(t).unwrap(), "p = {p}");
        }
    }

    #[test]
    fn expansion_formula_numeric() {
        let bits = DEFAULT_BITS;
        let tau = BigComplex::parse("0+1.3i", bits + 32).unwrap();
        for p in [2i64, 3] {
            let h = qexp(p, 400).unwrap();
            let t = h.evaluate(&tau, bits).unwrap();
            let tp = faber(&h, p as u32).unwrap().eval(&t);
            let jj = HauptmodulSeries { p: 1, series: classical_jj(400) };
            let ptau = tau.mul(&BigComplex::from_i64(p, bits + 32));
            let rhs = jj.evaluate(&ptau, bits).unwrap().add(&jj.evaluate(&tau, bits).unwrap()).sub(&t);
            let r = real_to_f64(&tp.sub(&rhs).abs());
            assert!(r < 1e-20, "p = {p}: residual {r}");
        }
    }

    #[test]
    fn fricke_invariance() {
        let bits = DEFAULT_BITS;
        let tau = BigComplex::parse("0.1+0.8i", bits + 32).unwrap();
        for p in [2i64, 3] {
            let h = qexp(p, 600).unwrap();
            let r = real_to_f64(&fricke_residual(&h, &tau, bits).unwrap());
            assert!(r < 1e-20, "p = {p}: {r}");
        }
    }

    #[test]
    fn point_reduction() {
        let p = 2;
        let a = BigComplex::parse("0+0.5i", 256).unwrap();
        let r = reduce_point(&a, p).unwrap();
        // W₂ maps i/2 to i
        assert!((real_to_f64(&r.im) - 1.0).abs() < 1e-30);
        let b = BigComplex::parse("0.2+1.5i", 256).unwrap();
        let rb = reduce_point(&b, 2).unwrap();
        assert!((real_to_f64(&rb.im) - 1.5).abs() < 1e-30);
        let cl = gamma0_classes(39, 3, 3).unwrap();
        let rep = cl.iter().max_by_key(|c| c.form.a).unwrap();
        let alpha = heegner_point(rep, 256);
        let red = reduce_point(&alpha, 3).unwrap();
        assert!(real_to_f64(&red.im) > real_to_f64(&alpha.im));
        assert!(reduce_point(&BigComplex::parse("1-1i", 64).unwrap(), 2).is_err());
    }

    #[test]
    fn reduction_preserves_value() {
        let bits = 200;
        let h = qexp(3, 2000).unwrap();
        for (d, beta) in [(39, 3), (23, 1), (11, 1)] {
            for rep in gamma0_classes(d, 3, beta).unwrap() {
                let alpha = heegner_point(&rep, bits + 32);
                let direct = h.evaluate(&alpha, bits).unwrap();
                let reduced = evaluate_cm(&h, &rep, bits).unwrap();
                let r = real_to_f64(&direct.sub(&reduced).abs());
                assert!(r < 1e-40, "{} residual {r}", rep.form);
            }
        }
    }

    #[test]
    fn classes_of_16_sum_to_a_real_value() {
        let bits = 256;
        let h = qexp(2, 200).unwrap();
        let mut acc = BigComplex::zero(bits);
        for rep in gamma0_classes(16, 2, 0).unwrap() {
            let v = evaluate_cm(&h, &rep, bits).unwrap();
            acc = acc.add(&v.div_real(&crate::numeric::real_from_i64(rep.stab_gamma0 as i64, bits)));
        }
        assert!(real_to_f64(&acc.im).abs() < 1e-60);
    }

    #[test]
    fn terms_estimate_is_monotone() {
        assert!(terms_needed(2, 0.5, 256) > terms_needed(2, 1.0, 256));
        assert!(terms_needed(2, 1.0, 512) > terms_needed(2, 1.0, 256));
    }
}
