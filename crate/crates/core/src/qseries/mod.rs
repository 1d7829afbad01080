//! Exact truncated Laurent/Puiseux series in q^{1/s} over the rationals.

mod generators;
mod json;
pub(crate) mod poly;

pub use generators::{
    bernoulli, delta, eisenstein, eta_product, eta_quotient, generator, theta, BernoulliCache, Generator,
};

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Σ c_k q^{k/s} for start ≤ k < trunc, stored as integer numerators over one
/// common denominator. Exponents at or above `trunc` are unknown.
///
/// The representation is canonical (leading and trailing zeros stripped,
/// denominator positive and coprime to the numerators), so `==` is exact
/// coefficient equality including the truncation point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactSeries {
    scale: u32,
    start: i64,
    trunc: i64,
    num: Vec<BigInt>,
    den: BigInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn arith(a: &ExactSeries, b: &ExactSeries, op: ArithOp) -> Result<ExactSeries> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
    }
}

pub(crate) fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl ExactSeries {
    fn build(scale: u32, mut start: i64, trunc: i64, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        assert!(scale > 0, "scale must be positive");
        assert!(!den.is_zero(), "zero denominator");
        let keep = (trunc - start).max(0) as usize;
        num.truncate(keep);
        match num.iter().position(|c| !c.is_zero()) {
            None => return Self::zero(scale, trunc),
            Some(i) => {
                num.drain(..i);
                start += i as i64;
            }
        }
        while num.last().is_some_and(|c| c.is_zero()) {
            num.pop();
        }
        let mut g = den.abs();
        for c in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if den.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for c in num.iter_mut() {
                *c /= &g;
            }
            den /= &g;
        }
        ExactSeries { scale, start, trunc, num, den }
    }

    /// The series known to vanish below q^{trunc/scale}.
    pub fn zero(scale: u32, trunc: i64) -> Self {
        ExactSeries { scale, start: trunc, trunc, num: Vec::new(), den: BigInt::one() }
    }

    pub fn one(trunc: i64) -> Self {
        Self::monomial(1, 0, rat(1), trunc)
    }

    /// c·q^{k/scale}.
    pub fn monomial(scale: u32, k: i64, c: BigRational, trunc: i64) -> Self {
        Self::build(scale, k, trunc, vec![c.numer().clone()], c.denom().clone())
    }

    /// Integer coefficients for exponents start/scale, (start+1)/scale, ….
    pub fn from_integers(scale: u32, start: i64, coeffs: Vec<BigInt>, trunc: i64) -> Self {
        Self::build(scale, start, trunc, coeffs, BigInt::one())
    }

    pub fn from_i64s(scale: u32, start: i64, coeffs: &[i64], trunc: i64) -> Self {
        Self::from_integers(scale, start, coeffs.iter().map(|&c| BigInt::from(c)).collect(), trunc)
    }

    pub fn from_rationals(scale: u32, start: i64, coeffs: &[BigRational], trunc: i64) -> Self {
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Self::build(scale, start, trunc, num, den)
    }

    /// Sparse constructor: (exponent numerator, coefficient) pairs.
    pub fn from_terms(scale: u32, terms: &[(i64, BigRational)], trunc: i64) -> Self {
        if terms.is_empty() {
            return Self::zero(scale, trunc);
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap().min(trunc);
        let hi = terms.iter().map(|t| t.0).max().unwrap().max(lo);
        let mut dense = vec![rat(0); (hi - lo + 1) as usize];
        for (k, c) in terms {
            dense[(k - lo) as usize] += c;
        }
        Self::from_rationals(scale, lo, &dense, trunc)
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Exponent numerator of the first nonzero coefficient (equals `trunc` for the zero series).
    pub fn valuation(&self) -> i64 {
        self.start
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Coefficient of q^{k/scale}.
    pub fn coeff(&self, k: i64) -> Result<BigRational> {
        if k >= self.trunc {
            return Err(Error::BeyondTruncation { requested: k, trunc: self.trunc, scale: self.scale });
        }
        Ok(self.raw(k).map(|c| BigRational::new(c.clone(), self.den.clone())).unwrap_or_else(|| rat(0)))
    }

    /// Coefficient of q^n for an integral exponent n.
    pub fn coeff_q(&self, n: i64) -> Result<BigRational> {
        self.coeff(n * self.scale as i64)
    }

    /// Coefficient of q^e for a rational exponent; zero off the lattice (1/scale)Z.
    pub fn coeff_at(&self, e: &BigRational) -> Result<BigRational> {
        let k = e * rat(self.scale);
        if !k.is_integer() {
            return Ok(rat(0));
        }
        let k: i64 = k.to_integer().try_into().map_err(|_| Error::Parse("exponent overflow".into()))?;
        self.coeff(k)
    }

    /// Integer coefficient of q^{k/scale}; panics if the series is not integral.
    pub fn int_coeff(&self, k: i64) -> Result<BigInt> {
        assert!(self.is_integral(), "int_coeff on a series with denominators");
        if k >= self.trunc {
            return Err(Error::BeyondTruncation { requested: k, trunc: self.trunc, scale: self.scale });
        }
        Ok(self.raw(k).cloned().unwrap_or_default())
    }

    fn raw(&self, k: i64) -> Option<&BigInt> {
        if k < self.start {
            return None;
        }
        self.num.get((k - self.start) as usize)
    }

    /// Known nonzero terms as (exponent numerator, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (i64, BigRational)> + '_ {
        self.num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.start + i as i64, BigRational::new(c.clone(), self.den.clone())))
    }

    /// Dense rational coefficients from `from` up to (excluding) `trunc`.
    pub fn dense_from(&self, from: i64) -> Vec<BigRational> {
        (from..self.trunc).map(|k| self.coeff(k).expect("below trunc")).collect()
    }

    /// Numerators over the common denominator, densely from `from` to `trunc`.
    fn numerators_from(&self, from: i64) -> Vec<BigInt> {
        assert!(from <= self.start || self.is_zero());
        let mut out = vec![BigInt::zero(); (self.trunc - from).max(0) as usize];
        for (i, c) in self.num.iter().enumerate() {
            let idx = (self.start + i as i64 - from) as usize;
            if idx < out.len() {
                out[idx] = c.clone();
            }
        }
        out
    }

    pub fn truncate(&self, trunc: i64) -> Result<Self> {
        let t = trunc.min(self.trunc);
        let s = self.clone();
        Ok(Self::build(s.scale, s.start, t, s.num, s.den))
    }

    /// Same series viewed in powers of q^{1/new_scale}; `scale` must divide `new_scale`.
    pub fn rescale(&self, new_scale: u32) -> Result<Self> {
        if new_scale % self.scale != 0 {
            return Err(Error::ScaleMismatch(self.scale, new_scale));
        }
        let f = (new_scale / self.scale) as i64;
        Ok(self.spread(f, new_scale))
    }

    fn spread(&self, f: i64, new_scale: u32) -> Self {
        if f == 1 && new_scale == self.scale {
            return self.clone();
        }
        let mut num = vec![BigInt::zero(); if self.num.is_empty() { 0 } else { (self.num.len() - 1) * f as usize + 1 }];
        for (i, c) in self.num.iter().enumerate() {
            num[i * f as usize] = c.clone();
        }
        Self::build(new_scale, self.start * f, self.trunc * f, num, self.den.clone())
    }

    fn common(a: &Self, b: &Self) -> Result<(Self, Self)> {
        if a.scale == b.scale {
            return Ok((a.clone(), b.clone()));
        }
        let s = (a.scale as u64).lcm(&(b.scale as u64)) as u32;
        Ok((a.rescale(s)?, b.rescale(s)?))
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.num.iter_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, subtract: bool) -> Result<Self> {
        let (a, b) = Self::common(self, other)?;
        let trunc = a.trunc.min(b.trunc);
        let start = a.start.min(b.start).min(trunc);
        let den = a.den.lcm(&b.den);
        let fa = &den / &a.den;
        let fb = &den / &b.den;
        let mut num = vec![BigInt::zero(); (trunc - start).max(0) as usize];
        for (i, c) in a.num.iter().enumerate() {
            let idx = (a.start + i as i64 - start) as usize;
            if idx < num.len() {
                num[idx] += c * &fa;
            }
        }
        for (i, c) in b.num.iter().enumerate() {
            let idx = (b.start + i as i64 - start) as usize;
            if idx < num.len() {
                if subtract {
                    num[idx] -= c * &fb;
                } else {
                    num[idx] += c * &fb;
                }
            }
        }
        Ok(Self::build(a.scale, start, trunc, num, den))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = Self::common(self, other)?;
        let trunc = (a.trunc + b.start).min(b.trunc + a.start);
        if a.is_zero() || b.is_zero() {
            return Ok(Self::zero(a.scale, trunc));
        }
        let start = a.start + b.start;
        if trunc <= start {
            return Err(Error::EmptyTruncation);
        }
        let num = poly::mul_trunc(&a.num, &b.num, (trunc - start) as usize);
        Ok(Self::build(a.scale, start, trunc, num, &a.den * &b.den))
    }

    pub fn scalar_mul(&self, c: &BigRational) -> Self {
        let num = self.num.iter().map(|x| x * c.numer()).collect();
        Self::build(self.scale, self.start, self.trunc, num, &self.den * c.denom())
    }

    pub fn scalar_mul_int(&self, c: i64) -> Self {
        self.scalar_mul(&rat(c))
    }

    /// Multiply by q^{k/scale}.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.start += k;
        out.trunc += k;
        out
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZeroSeries);
        }
        let r = (self.trunc - self.start) as usize;
        let lead = self.num[0].clone();
        let body: Vec<BigInt> = self.numerators_from(self.start);
        // 1/(body/den) = den / body, with body's inverse found by Newton iteration.
        let (inv_num, inv_den) = if lead.abs().is_one() {
            (unit_inverse(&body, r), BigInt::one())
        } else {
            // body(x) = c·B'(x/c)... substitute x = c·y so the leading term becomes 1.
            let mut pw = BigInt::one();
            let mut sub = Vec::with_capacity(r);
            for (k, b) in body.iter().enumerate() {
                if k == 0 {
                    sub.push(BigInt::one());
                } else {
                    sub.push(b * &pw);
                    pw *= &lead;
                }
            }
            // sub_k = b_k c^{k-1}; its inverse g' gives 1/body coefficient g'_k / c^{k+1}.
            let g = unit_inverse(&sub, r);
            let total = lead.pow(r as u32);
            let mut out = Vec::with_capacity(r);
            let mut scale = lead.pow((r - 1) as u32);
            for gk in g.iter() {
                out.push(gk * &scale);
                if !scale.is_one() {
                    scale /= &lead;
                }
            }
            (out, total)
        };
        let num: Vec<BigInt> = inv_num.into_iter().map(|c| c * &self.den).collect();
        Ok(Self::build(self.scale, -self.start, -self.start + r as i64, num, inv_den))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inverse()?)
    }

    /// τ ↦ mτ: exponent e ↦ m·e.
    pub fn dilate(&self, m: u32) -> Self {
        assert!(m >= 1, "dilation factor must be positive");
        self.spread(m as i64, self.scale)
    }

    /// Σ c(n) q^n ↦ Σ c(mn) q^n.
    pub fn hecke_u(&self, m: u32) -> Self {
        assert!(m >= 1, "U_m needs m >= 1");
        let m = m as i64;
        let trunc = ceil_div(self.trunc, m);
        let start = ceil_div(self.start, m).min(trunc);
        let num = (start..trunc).map(|n| self.raw(n * m).cloned().unwrap_or_default()).collect();
        Self::build(self.scale, start, trunc, num, self.den.clone())
    }

    /// (q d/dq)^n.
    pub fn d_operator(&self, n: u32) -> Self {
        let num = self
            .num
            .iter()
            .enumerate()
            .map(|(i, c)| c * BigInt::from(self.start + i as i64).pow(n))
            .collect();
        let den = &self.den * BigInt::from(self.scale).pow(n);
        Self::build(self.scale, self.start, self.trunc, num, den)
    }

    fn unit_parts(&self) -> Result<Vec<BigRational>> {
        if self.is_zero() {
            return Err(Error::NonUnitLeadingTerm);
        }
        if self.num[0] != self.den {
            return Err(Error::NonUnitLeadingTerm);
        }
        Ok(self.dense_from(self.start))
    }

    /// Formal logarithm of a series with constant term 1.
    pub fn log(&self) -> Result<Self> {
        if self.start != 0 {
            return Err(Error::NonUnitLeadingTerm);
        }
        let f = self.unit_parts()?;
        let n = f.len();
        // k·L_k = k·f_k − Σ_{j=1}^{k−1} j·L_j·f_{k−j}
        let mut l = vec![rat(0); n];
        for k in 1..n {
            let mut acc = rat(k as i64) * &f[k];
            for j in 1..k {
                if !l[j].is_zero() && !f[k - j].is_zero() {
                    acc -= rat(j as i64) * &l[j] * &f[k - j];
                }
            }
            l[k] = acc / rat(k as i64);
        }
        Ok(Self::from_rationals(self.scale, 0, &l, self.trunc))
    }

    /// Formal exponential of a series with positive valuation.
    pub fn exp(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(Self::monomial(self.scale, 0, rat(1), self.trunc));
        }
        if self.start <= 0 {
            return Err(Error::ExpNeedsPositiveValuation);
        }
        let n = self.trunc as usize;
        let f: Vec<BigRational> = (0..self.trunc).map(|k| self.coeff(k).unwrap()).collect();
        // k·g_k = Σ_{j=1}^{k} j·f_j·g_{k−j}
        let mut g = vec![rat(0); n];
        g[0] = rat(1);
        for k in 1..n {
            let mut acc = rat(0);
            for j in 1..=k {
                if !f[j].is_zero() && !g[k - j].is_zero() {
                    acc += rat(j as i64) * &f[j] * &g[k - j];
                }
            }
            g[k] = acc / rat(k as i64);
        }
        Ok(Self::from_rationals(self.scale, 0, &g, self.trunc))
    }

    /// f^α for f = q^{v/s}(1 + …); needs α·v to be an integer.
    pub fn pow(&self, alpha: &BigRational) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NonUnitLeadingTerm);
        }
        let shift = alpha * rat(self.start);
        if !shift.is_integer() {
            return Err(Error::FractionalMonomialPower);
        }
        let shift: i64 = shift.to_integer().try_into().map_err(|_| Error::FractionalMonomialPower)?;
        let f = self.unit_parts()?;
        let n = f.len();
        // F·Dg = α·g·DF, solved for g_k.
        let mut g = vec![rat(0); n];
        g[0] = rat(1);
        for k in 1..n {
            let mut acc = rat(0);
            for j in 1..=k {
                if !f[j].is_zero() && !g[k - j].is_zero() {
                    acc += (alpha * rat(j as i64) - rat((k - j) as i64)) * &f[j] * &g[k - j];
                }
            }
            g[k] = acc / rat(k as i64);
        }
        Ok(Self::from_rationals(self.scale, shift, &g, shift + n as i64))
    }
}

fn ceil_div(a: i64, m: i64) -> i64 {
    -((-a).div_euclid(m))
}

/// Inverse of an integer series with leading coefficient ±1, to `r` terms.
fn unit_inverse(f: &[BigInt], r: usize) -> Vec<BigInt> {
    let mut g = vec![f[0].clone()]; // ±1 is its own inverse
    let mut k = 1;
    while k < r {
        let k2 = (2 * k).min(r);
        // g ← g·(2 − f·g) mod x^{k2}
        let fg = poly::mul_trunc(&f[..k2.min(f.len())], &g, k2);
        let mut corr: Vec<BigInt> = fg.into_iter().map(|c| -c).collect();
        corr.resize(k2, BigInt::zero());
        corr[0] += 2;
        g = poly::mul_trunc(&g, &corr, k2);
        g.resize(k2, BigInt::zero());
        k = k2;
    }
    g.truncate(r);
    g
}

/// Binomial coefficient with rational upper argument, as a falling factorial over s!.
pub fn binomial_rational(top: &BigRational, s: u32) -> BigRational {
    let mut acc = rat(1);
    for i in 0..s {
        acc = acc * (top - rat(i as i64)) / rat((i + 1) as i64);
    }
    acc
}

/// n-th Rankin–Cohen bracket of f (weight k) and g (weight l), with D = q d/dq.
pub fn rankin_cohen(f: &ExactSeries, k: &BigRational, g: &ExactSeries, l: &BigRational, n: u32) -> Result<ExactSeries> {
    let nn = rat(n as i64);
    let mut acc: Option<ExactSeries> = None;
    for r in 0..=n {
        let s = n - r;
        let mut c = binomial_rational(&(&nn + k - rat(1)), s) * binomial_rational(&(&nn + l - rat(1)), r);
        if r % 2 == 1 {
            c = -c;
        }
        if c.is_zero() {
            continue;
        }
        let term = f.d_operator(r).mul(&g.d_operator(s))?.scalar_mul(&c);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    match acc {
        Some(a) => Ok(a),
        None => f.mul(g).map(|p| p.scalar_mul(&rat(0))),
    }
}
