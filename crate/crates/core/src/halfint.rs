//! Weakly holomorphic forms of weight 1/2 in the plus space of level 4p.
//!
//! f_{d,p} = q^{-d} + Σ_{D>0} A(D,d) q^D, built from Rankin–Cohen brackets of θ
//! with Eisenstein series in 4pτ, divided by Δ(4pτ).

use crate::arith::{is_square_mod, kronecker, s_exp};
use crate::error::{Error, Result};
use crate::hauptmodul::classical_jj;
use crate::linalg::{solve, Matrix};
use crate::numeric::{real_cmp, real_from_rational, real_pow2, real_to_f64, BigComplex, Real};
use crate::qseries::{delta, eisenstein, rankin_cohen, rat, theta, ExactSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Smallest truncation accepted by `build_generators`.
pub const MIN_GENERATOR_TRUNC: i64 = 130;
/// Default truncation for basis forms.
pub const DEFAULT_TRUNC: i64 = 140;

/// Which spanning family the basis solve runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// θ, u, v (and w for p = 3), times powers of J(4pτ).
    Generators,
    /// θ and [θ, E₄^a E₆^b(4pτ)]_n / Δ(4pτ)^m for m ≤ `max_m`, times powers of J(4pτ),
    /// with plus-support imposed as linear constraints.
    Brackets { max_m: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfIntForm {
    pub p: i64,
    pub d: i64,
    pub series: ExactSeries,
    pub label: String,
    pub family: Family,
}

/// True when n ≡ x² (mod 4p) for some x.
pub fn is_plus_exponent(n: i64, p: i64) -> bool {
    is_square_mod(n, 4 * p)
}

/// d ≥ 1 with −d a square modulo 4p.
pub fn is_admissible(d: i64, p: i64) -> bool {
    d > 0 && is_plus_exponent(-d, p)
}

pub fn admissible_up_to(p: i64, d_max: i64) -> Vec<i64> {
    (1..=d_max).filter(|&d| is_admissible(d, p)).collect()
}

fn inverse_delta_power(m: i64, power: u32, trunc: i64) -> ExactSeries {
    let d = delta(trunc / m + 2 * power as i64 + 4).dilate(m as u32);
    let mut inv = d.inverse().unwrap();
    for _ in 1..power {
        inv = inv.mul(&d.inverse().unwrap()).unwrap();
    }
    inv
}

/// [θ, g(4pτ)]_n / Δ(4pτ)^m for a weight-k form g given at level 1.
fn bracket_quotient(th: &ExactSeries, g: &ExactSeries, k: u32, n: u32, m: u32, p: i64, trunc: i64) -> Result<ExactSeries> {
    let big = 4 * p;
    let gd = g.dilate(big as u32).truncate(th.trunc())?;
    let br = rankin_cohen(th, &BigRational::new(1.into(), 2.into()), &gd, &rat(k as i64), n)?;
    let q = br.mul(&inverse_delta_power(big, m, th.trunc()))?;
    q.truncate(trunc)
}

/// The generators u, v for p = 2 and u, v, w for p = 3.
pub fn build_generators(p: i64, trunc: i64) -> Result<Vec<ExactSeries>> {
    if trunc < MIN_GENERATOR_TRUNC {
        return Err(Error::InsufficientTruncation { needed: MIN_GENERATOR_TRUNC, available: trunc });
    }
    // (weight, order, multiple of θ added, divisor)
    let recipe: &[(u32, u32, i64, i64)] = match p {
        2 => &[(10, 1, 1056, -20), (8, 2, -11520, 72)],
        3 => &[(10, 1, 1584, -20), (8, 2, -25920, 72), (6, 3, 272160, -112)],
        _ => return Err(Error::UnsupportedPrime(p)),
    };
    let work = trunc + 8 * p + 2;
    let th = theta(work);
    recipe
        .iter()
        .map(|&(k, n, add, div)| {
            let g = eisenstein(k, work / (4 * p) + 2)?;
            let b = bracket_quotient(&th, &g, k, n, 1, p, trunc)?;
            let s = b.add(&th.truncate(trunc)?.scalar_mul_int(add))?;
            Ok(s.scalar_mul(&BigRational::new(1.into(), div.into())))
        })
        .collect()
}

/// E₄^a E₆^b with 4a + 6b = k.
fn eisenstein_monomials(k: u32, trunc: i64) -> Vec<ExactSeries> {
    let e4 = eisenstein(4, trunc).unwrap();
    let e6 = eisenstein(6, trunc).unwrap();
    let mut out = Vec::new();
    for b in 0..=(k / 6) {
        let rest = k - 6 * b;
        if rest % 4 != 0 {
            continue;
        }
        let mut s = ExactSeries::one(trunc);
        for _ in 0..rest / 4 {
            s = s.mul(&e4).unwrap();
        }
        for _ in 0..b {
            s = s.mul(&e6).unwrap();
        }
        out.push(s);
    }
    out
}

fn bracket_family(p: i64, max_m: u32, trunc: i64) -> Result<Vec<ExactSeries>> {
    let big = 4 * p;
    let work = trunc + 4 * big * max_m as i64 + 2;
    let th = theta(work);
    let mut out = Vec::new();
    for m in 1..=max_m {
        for n in 0..=(6 * m) {
            let k = 12 * m as i64 - 2 * n as i64;
            if k < 4 {
                continue;
            }
            for g in eisenstein_monomials(k as u32, work / big + 2) {
                let s = bracket_quotient(&th, &g, k as u32, n, m, p, trunc)?;
                if !s.is_zero() {
                    out.push(s);
                }
            }
        }
    }
    Ok(out)
}

fn pole_order(s: &ExactSeries) -> i64 {
    -s.valuation().min(0)
}

/// All admissible d ≤ `d_max`, each as f_{d,p} known below q^trunc.
pub fn basis(p: i64, d_max: i64, trunc: i64) -> Result<Vec<HalfIntForm>> {
    let fam = match p {
        2 | 3 => Family::Generators,
        _ => return Err(Error::UnsupportedPrime(p)),
    };
    basis_with(p, d_max, trunc, fam)
}

/// As `basis`, over an explicitly chosen spanning family.
pub fn basis_with(p: i64, d_max: i64, trunc: i64, family: Family) -> Result<Vec<HalfIntForm>> {
    let ds = admissible_up_to(p, d_max);
    let Some(&top) = ds.last() else { return Ok(Vec::new()) };
    let big = 4 * p;
    let gen_trunc = trunc.max(MIN_GENERATOR_TRUNC);
    let k_max = top / big + 1;
    let work = gen_trunc + big * k_max + 4;
    let th = theta(work);
    let mut seeds = vec![th.clone()];
    match family {
        Family::Generators => seeds.extend(build_generators(p, work)?),
        Family::Brackets { max_m } => seeds.extend(bracket_family(p, max_m, work)?),
    }
    let jj = classical_jj(work / big + k_max + 4).dilate(big as u32);
    let gap = (top - seeds.iter().map(pole_order).max().unwrap()).max(0);
    let powers = (gap + big - 1) / big + 1;
    let mut span = Vec::new();
    for s in &seeds {
        let mut cur = s.clone();
        for _ in 0..powers {
            span.push(cur.clone());
            cur = cur.mul(&jj)?;
        }
    }
    let top = span.iter().map(pole_order).max().unwrap();
    // rows: exponents −top..=0, plus non-square exponents in a positive window for the general family
    let mut exps: Vec<i64> = (-top..=0).collect();
    let general = matches!(family, Family::Brackets { .. });
    if general {
        let hi = (top + 8 * big).min(trunc - 1);
        exps.extend((1..=hi).filter(|&e| !is_plus_exponent(e, p)));
    } else {
        exps.retain(|&e| is_plus_exponent(e, p));
    }
    let rows: Vec<Vec<BigRational>> =
        exps.iter().map(|&e| span.iter().map(|s| s.coeff(e).unwrap_or_else(|_| BigRational::zero())).collect()).collect();
    let a = Matrix::from_rows(rows);
    let mut b = Matrix::zeros(exps.len(), ds.len());
    for (j, &d) in ds.iter().enumerate() {
        let i = exps.iter().position(|&e| e == -d).unwrap();
        b.set(i, j, BigRational::one());
    }
    let x = solve(&a, &b, !general)?;
    let mut out = Vec::with_capacity(ds.len());
    for (j, &d) in ds.iter().enumerate() {
        let mut f = ExactSeries::zero(1, trunc);
        for (i, s) in span.iter().enumerate() {
            let c = x.get(i, j);
            if !c.is_zero() {
                f = f.add(&s.scalar_mul(c))?;
            }
        }
        let f = f.truncate(trunc)?;
        if f.trunc() < trunc {
            return Err(Error::InsufficientTruncation { needed: trunc, available: f.trunc() });
        }
        let form = HalfIntForm { p, d, series: f, label: format!("f_{{{d},{p}}}"), family };
        form.check_shape()?;
        out.push(form);
    }
    Ok(out)
}

/// f_{d,p} alone.
pub fn form(p: i64, d: i64, trunc: i64) -> Result<HalfIntForm> {
    if !is_admissible(d, p) {
        return Err(Error::NotAdmissible(d, p));
    }
    basis(p, d, trunc)?.into_iter().find(|f| f.d == d).ok_or(Error::NotAdmissible(d, p))
}

impl HalfIntForm {
    pub fn trunc(&self) -> i64 {
        self.series.trunc()
    }

    /// Plus-support over the stored window and the q^{-d} + O(q) shape.
    pub fn check_shape(&self) -> Result<()> {
        for (n, _) in self.series.terms() {
            if !is_plus_exponent(n, self.p) {
                return Err(Error::PlusSupportViolation(n));
            }
        }
        let lead_ok = self.series.coeff(-self.d)? == rat(1);
        let gap_ok = ((-self.d + 1)..=0).all(|e| self.series.coeff(e).map(|c| c.is_zero()).unwrap_or(false));
        if !lead_ok || !gap_ok || self.series.valuation() != -self.d {
            return Err(Error::SingularSystem(format!("{} does not have principal part q^-{}", self.label, self.d)));
        }
        Ok(())
    }

    /// Rebuilt with a longer expansion.
    pub fn extended(&self, trunc: i64) -> Result<HalfIntForm> {
        basis_with(self.p, self.d, trunc, self.family)?
            .into_iter()
            .find(|f| f.d == self.d)
            .ok_or(Error::NotAdmissible(self.d, self.p))
    }

    /// A(D,d), the coefficient of q^D.
    pub fn coefficient_a(&self, big_d: i64) -> Result<BigRational> {
        self.series.coeff(big_d)
    }

    /// A*(D,d) = 2^{s(D,p)} A(D,d).
    pub fn a_star(&self, big_d: i64) -> Result<BigRational> {
        Ok(self.coefficient_a(big_d)? * rat(1i64 << s_exp(big_d, self.p)))
    }
}

/// h_β for β mod 2p, each a series in q^{1/4p}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorComponents {
    pub p: i64,
    pub components: Vec<ExactSeries>,
}

/// s(β,p) = 1 iff β ≡ 0 or p (mod 2p).
pub fn s_beta(beta: i64, p: i64) -> u32 {
    let b = beta.rem_euclid(2 * p);
    u32::from(b == 0 || b == p)
}

fn component_weight(beta: i64, p: i64) -> BigRational {
    if s_beta(beta, p) == 1 {
        BigRational::one()
    } else {
        BigRational::new(1.into(), 2.into())
    }
}

pub fn vector_components(f: &HalfIntForm) -> VectorComponents {
    let p = f.p;
    let big = 4 * p;
    let components = (0..2 * p)
        .map(|beta| {
            let w = component_weight(beta, p);
            let r = (beta * beta).rem_euclid(big);
            let terms: Vec<(i64, BigRational)> =
                f.series.terms().filter(|(n, _)| n.rem_euclid(big) == r).map(|(n, c)| (n, c * &w)).collect();
            ExactSeries::from_terms(big as u32, &terms, f.trunc())
        })
        .collect();
    VectorComponents { p, components }
}

impl VectorComponents {
    pub fn get(&self, beta: i64) -> &ExactSeries {
        &self.components[beta.rem_euclid(2 * self.p) as usize]
    }

    /// Σ_β h_β(4pτ), which recovers f.
    pub fn reassemble(&self) -> ExactSeries {
        let mut acc = ExactSeries::zero(1, self.components[0].trunc());
        for h in &self.components {
            let terms: Vec<(i64, BigRational)> = h.terms().collect();
            acc = acc.add(&ExactSeries::from_terms(1, &terms, h.trunc())).unwrap();
        }
        acc
    }
}

/// Residuals of the vector-valued transformation laws at one point.
#[derive(Clone, Debug, Serialize)]
pub struct TransformationReport {
    pub p: i64,
    pub d: i64,
    /// (j, residual) for the inversion law twisted by ζ_{4p}^{β²j}, j coprime to 4p.
    pub inversion: Vec<(i64, f64)>,
    /// h₀ + h₂ under τ ↦ −1/τ (p = 2 only).
    pub extra: Option<f64>,
    pub translation: f64,
    pub max_residual: f64,
    pub terms_used: i64,
}

/// H[r] = Σ_{n ≡ r (4p)} c(n) x^n for x = e^{2πiτ/4p}; `None` if the tail is not yet small.
fn residue_sums(f: &ExactSeries, big: i64, tau: &BigComplex, w: usize, thr: &Real) -> Option<Vec<BigComplex>> {
    let x = tau.div_real(&crate::numeric::real_from_i64(big, w)).q_of();
    let start = f.valuation();
    let mut xn = if start < 0 { x.recip().powi((-start) as u64) } else { x.powi(start as u64) };
    let mut acc = vec![BigComplex::zero(w); big as usize];
    let mut small = 0;
    for n in start..f.trunc() {
        let c = f.coeff(n).ok()?;
        if !c.is_zero() {
            let term = xn.mul_real(&real_from_rational(&c, w));
            let tiny = n > 0 && real_cmp(&term.abs(), thr) == Ordering::Less;
            let r = n.rem_euclid(big) as usize;
            acc[r] = acc[r].add(&term);
            small = if tiny { small + 1 } else { 0 };
            if small >= 4 {
                return Some(acc);
            }
        }
        xn = xn.mul(&x);
    }
    None
}

/// Rough truncation for the check at `tau`, from |c(n)| ≈ exp(π√(nd)/p).
fn initial_trunc(f: &HalfIntForm, im_min: f64, bits: usize) -> i64 {
    let target = (bits as f64 / 2.0 + 24.0) * std::f64::consts::LN_2;
    let big = 4.0 * f.p as f64;
    let d = f.d.max(1) as f64;
    let mut n = 16f64;
    while std::f64::consts::PI * (n * d).sqrt() / f.p as f64 - 2.0 * std::f64::consts::PI * im_min * n / big > -target {
        n += 16.0;
    }
    (n as i64).max(DEFAULT_TRUNC)
}

/// Numerically checks, at τ₀ and −1/τ₀,
/// Σ_β ζ_{4p}^{β²j} h_β(−1/τ) = (4p/j)·ε_j⁻¹·√τ·Σ_β ζ_{4p}^{−β²j⁻¹} h_β(τ), ε_j = √((−1/j)),
/// for every j coprime to 4p, plus h₀ + h₂ at −1/τ for p = 2 and the translation law.
/// Extends the expansion of `f` as needed.
pub fn check_transformations(f: &HalfIntForm, tau0: &BigComplex, bits: usize) -> Result<TransformationReport> {
    if !tau0.im.is_positive() {
        return Err(Error::NotUpperHalfPlane);
    }
    let p = f.p;
    let big = 4 * p;
    let w = bits + 64;
    let tau = tau0.with_precision(w);
    let inv = tau.recip().neg();
    let thr = real_pow2(-((bits / 2) as i32) - 20, 64);
    let im_min = real_to_f64(&tau.im).min(real_to_f64(&inv.im));
    let mut g = if f.trunc() >= initial_trunc(f, im_min, bits) { f.clone() } else { f.extended(initial_trunc(f, im_min, bits))? };
    let (h_tau, h_inv) = loop {
        let a = residue_sums(&g.series, big, &tau, w, &thr);
        let b = residue_sums(&g.series, big, &inv, w, &thr);
        if let (Some(a), Some(b)) = (a, b) {
            break (a, b);
        }
        if g.trunc() >= 8000 {
            return Err(Error::ConvergenceFailure(g.trunc()));
        }
        g = g.extended(g.trunc() * 3 / 2)?;
    };
    let h = |sums: &[BigComplex], beta: i64| -> BigComplex {
        let r = (beta * beta).rem_euclid(big) as usize;
        if s_beta(beta, p) == 1 {
            sums[r].clone()
        } else {
            sums[r].div_real(&crate::numeric::real_from_i64(2, w))
        }
    };
    let sqrt_tau = tau.sqrt();
    let mut inversion = Vec::new();
    let mut max_res = 0f64;
    for j in 1..big {
        if crate::arith::gcd(j, big) != 1 {
            continue;
        }
        let jinv = (1..big).find(|&x| (x * j) % big == 1).unwrap();
        let mut lhs = BigComplex::zero(w);
        let mut rhs = BigComplex::zero(w);
        for beta in 0..2 * p {
            lhs = lhs.add(&BigComplex::root_of_unity(beta * beta * j, big, w).mul(&h(&h_inv, beta)));
            rhs = rhs.add(&BigComplex::root_of_unity(-beta * beta * jinv, big, w).mul(&h(&h_tau, beta)));
        }
        let eps = BigComplex::from_i64(kronecker(-1, j) as i64, w).sqrt();
        let factor = BigComplex::from_i64(kronecker(big, j) as i64, w).div(&eps).mul(&sqrt_tau);
        let r = real_to_f64(&lhs.sub(&factor.mul(&rhs)).abs());
        max_res = max_res.max(r);
        inversion.push((j, r));
    }
    let extra = if p == 2 {
        let lhs = h(&h_inv, 0).add(&h(&h_inv, 2));
        let rhs = BigComplex::root_of_unity(-1, 8, w).mul(&sqrt_tau).mul(&h(&h_tau, 0).add(&h(&h_tau, 2)));
        let r = real_to_f64(&lhs.sub(&rhs).abs());
        max_res = max_res.max(r);
        Some(r)
    } else {
        None
    };
    // h_β(τ+1) = ζ_{4p}^{β²} h_β(τ)
    let shifted = residue_sums(&g.series, big, &tau.add(&BigComplex::one(w)), w, &thr)
        .ok_or(Error::ConvergenceFailure(g.trunc()))?;
    let mut translation = 0f64;
    for beta in 0..2 * p {
        let lhs = h(&shifted, beta);
        let rhs = BigComplex::root_of_unity(beta * beta, big, w).mul(&h(&h_tau, beta));
        translation = translation.max(real_to_f64(&lhs.sub(&rhs).abs()));
    }
    max_res = max_res.max(translation);
    Ok(TransformationReport { p, d: f.d, inversion, extra, translation, max_residual: max_res, terms_used: g.trunc() })
}

/// All A(D,d) as an integer when the coefficient is integral.
pub fn integer_coefficient(f: &HalfIntForm, big_d: i64) -> Result<Option<BigInt>> {
    let c = f.coefficient_a(big_d)?;
    Ok(c.is_integer().then(|| c.to_integer()))
}
