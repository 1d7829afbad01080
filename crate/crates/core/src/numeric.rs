//! Arbitrary precision real and complex numbers for evaluation at CM points.

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::{BigInt, Sign as BigSign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cell::RefCell;
use std::cmp::Ordering;

pub const DEFAULT_BITS: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants"));
}

fn with_cc<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub type Real = BigFloat;

pub fn real_from_i64(n: i64, p: usize) -> Real {
    BigFloat::from_i64(n, p)
}

pub fn real_from_int(n: &BigInt, p: usize) -> Real {
    if n.is_zero() {
        return BigFloat::from_i64(0, p);
    }
    let (sign, digits) = n.to_u64_digits();
    let words: Vec<Word> = digits.into_iter().map(|d| d as Word).collect();
    let s = if sign == BigSign::Minus { Sign::Neg } else { Sign::Pos };
    let e = (words.len() * Word::BITS as usize) as i32;
    let mut x = BigFloat::from_words(&words, s, e);
    x.set_precision(p, RM).expect("precision");
    x
}

pub fn real_from_rational(q: &BigRational, p: usize) -> Real {
    real_from_int(q.numer(), p + 8).div(&real_from_int(q.denom(), p + 8), p, RM)
}

pub fn real_pi(p: usize) -> Real {
    with_cc(|cc| cc.pi(p, RM))
}

pub fn real_sqrt(x: &Real, p: usize) -> Real {
    x.sqrt(p, RM)
}

pub fn real_abs(x: &Real) -> Real {
    x.abs()
}

pub fn real_cmp(a: &Real, b: &Real) -> Ordering {
    match a.cmp(b) {
        Some(c) if c < 0 => Ordering::Less,
        Some(0) => Ordering::Equal,
        _ => Ordering::Greater,
    }
}

/// 2^k as a real.
pub fn real_pow2(k: i32, p: usize) -> Real {
    let mut x = BigFloat::from_i64(1, p);
    x.set_exponent(k + 1);
    x
}

/// Nearest integer (ties away from zero are irrelevant for our use).
pub fn real_round(x: &Real) -> BigInt {
    let half = BigFloat::from_f64(0.5, 64);
    let shifted = if x.is_negative() { x.sub(&half, x.precision().unwrap_or(64) + 64, RM) } else { x.add(&half, x.precision().unwrap_or(64) + 64, RM) };
    real_trunc(&shifted)
}

/// Integer part, rounding toward zero.
pub fn real_trunc(x: &Real) -> BigInt {
    let Some((words, _, sign, e, _)) = x.as_raw_parts() else { return BigInt::zero() };
    if e <= 0 {
        return BigInt::zero();
    }
    let mut m = BigInt::zero();
    for w in words.iter().rev() {
        m = (m << Word::BITS) + BigInt::from(*w);
    }
    let shift = e as i64 - (words.len() as i64) * Word::BITS as i64;
    let v = if shift >= 0 { m << shift as usize } else { m >> (-shift) as usize };
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// Decimal rendering with `digits` significant digits, e.g. "-2.048e3" style "−2.04800…e+03".
pub fn real_to_string(x: &Real, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let p = x.precision().unwrap_or(DEFAULT_BITS).max(64) + 32;
    let e2 = x.exponent().unwrap_or(0) as f64;
    let mut e10 = (e2 * std::f64::consts::LOG10_2).floor() as i64;
    for _ in 0..3 {
        let scaled = scale10(x, digits as i64 - 1 - e10, p);
        let n = real_round(&scaled);
        let s = n.abs().to_string();
        if s.len() > digits {
            e10 += 1;
            continue;
        }
        if s.len() < digits {
            e10 -= 1;
            continue;
        }
        let sign = if n.is_negative() { "-" } else { "" };
        let (head, tail) = s.split_at(1);
        return if tail.is_empty() { format!("{sign}{head}e{e10}") } else { format!("{sign}{head}.{tail}e{e10}") };
    }
    format!("{}", real_to_f64(x))
}

fn scale10(x: &Real, k: i64, p: usize) -> Real {
    let t = real_from_int(&BigInt::from(10).pow(k.unsigned_abs() as u32), p);
    if k >= 0 {
        x.mul(&t, p, RM)
    } else {
        x.div(&t, p, RM)
    }
}

pub fn real_to_f64(x: &Real) -> f64 {
    let Some((words, _, sign, e, _)) = x.as_raw_parts() else { return f64::NAN };
    let top = words.last().copied().unwrap_or(0) as f64;
    let mant = top / 2f64.powi(Word::BITS as i32);
    let v = mant * 2f64.powi(e);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// Complex number with both parts at a recorded binary precision.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: Real,
    pub im: Real,
    prec: usize,
}

impl BigComplex {
    pub fn new(re: Real, im: Real, prec: usize) -> Self {
        BigComplex { re, im, prec }
    }

    pub fn zero(p: usize) -> Self {
        Self::from_i64(0, p)
    }

    pub fn one(p: usize) -> Self {
        Self::from_i64(1, p)
    }

    pub fn from_i64(n: i64, p: usize) -> Self {
        BigComplex { re: real_from_i64(n, p), im: real_from_i64(0, p), prec: p }
    }

    pub fn from_int(n: &BigInt, p: usize) -> Self {
        BigComplex { re: real_from_int(n, p), im: real_from_i64(0, p), prec: p }
    }

    pub fn from_rationals(re: &BigRational, im: &BigRational, p: usize) -> Self {
        BigComplex { re: real_from_rational(re, p), im: real_from_rational(im, p), prec: p }
    }

    pub fn from_real(re: Real, p: usize) -> Self {
        BigComplex { re, im: real_from_i64(0, p), prec: p }
    }

    /// Parses "x+yi", "x-yi", "yi" or "x" with decimal x, y.
    pub fn parse(s: &str, p: usize) -> Option<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let parse_real = |u: &str| -> Option<Real> {
            if u.is_empty() || u == "+" {
                return Some(real_from_i64(1, p));
            }
            if u == "-" {
                return Some(real_from_i64(-1, p));
            }
            u.parse::<f64>().ok()?;
            let x = with_cc(|cc| BigFloat::parse(u, astro_float::Radix::Dec, p, RM, cc));
            (!x.is_nan()).then_some(x)
        };
        if let Some(body) = t.strip_suffix('i') {
            let split = body.char_indices().skip(1).filter(|(i, c)| (*c == '+' || *c == '-') && !body[..*i].ends_with(['e', 'E'])).map(|(i, _)| i).last();
            match split {
                Some(i) => Some(BigComplex::new(parse_real(&body[..i])?, parse_real(&body[i..])?, p)),
                None => Some(BigComplex::new(real_from_i64(0, p), parse_real(body)?, p)),
            }
        } else {
            Some(BigComplex::from_real(parse_real(&t)?, p))
        }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn with_precision(&self, p: usize) -> Self {
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        re.set_precision(p, RM).expect("precision");
        im.set_precision(p, RM).expect("precision");
        BigComplex { re, im, prec: p }
    }

    fn p2(&self, o: &Self) -> usize {
        self.prec.min(o.prec)
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.p2(o);
        BigComplex { re: self.re.add(&o.re, p, RM), im: self.im.add(&o.im, p, RM), prec: p }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.p2(o);
        BigComplex { re: self.re.sub(&o.re, p, RM), im: self.im.sub(&o.im, p, RM), prec: p }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.p2(o);
        let w = p + 16;
        let re = self.re.mul(&o.re, w, RM).sub(&self.im.mul(&o.im, w, RM), p, RM);
        let im = self.re.mul(&o.im, w, RM).add(&self.im.mul(&o.re, w, RM), p, RM);
        BigComplex { re, im, prec: p }
    }

    pub fn mul_real(&self, r: &Real) -> Self {
        let p = self.prec;
        BigComplex { re: self.re.mul(r, p, RM), im: self.im.mul(r, p, RM), prec: p }
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        self.mul_real(&real_from_int(n, self.prec + 8))
    }

    pub fn div_real(&self, r: &Real) -> Self {
        let p = self.prec;
        BigComplex { re: self.re.div(r, p, RM), im: self.im.div(r, p, RM), prec: p }
    }

    pub fn norm_sqr(&self) -> Real {
        let w = self.prec + 16;
        self.re.mul(&self.re, w, RM).add(&self.im.mul(&self.im, w, RM), self.prec, RM)
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt(self.prec, RM)
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: self.im.neg(), prec: self.prec }
    }

    pub fn neg(&self) -> Self {
        BigComplex { re: self.re.neg(), im: self.im.neg(), prec: self.prec }
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        self.conj().div_real(&n)
    }

    pub fn div(&self, o: &Self) -> Self {
        let p = self.p2(o);
        self.with_precision(p).mul(&o.recip())
    }

    /// Principal square root (branch cut on the negative real axis).
    pub fn sqrt(&self) -> Self {
        let p = self.prec;
        let w = p + 16;
        if self.re.is_zero() && self.im.is_zero() {
            return Self::zero(p);
        }
        let r = self.abs();
        let two = real_from_i64(2, w);
        if !self.re.is_negative() {
            let s = r.add(&self.re, w, RM).div(&two, w, RM).sqrt(w, RM);
            let im = self.im.div(&s.mul(&two, w, RM), p, RM);
            BigComplex { re: s.clone().with_prec(p), im, prec: p }
        } else {
            let t = r.sub(&self.re, w, RM).div(&two, w, RM).sqrt(w, RM);
            let re = self.im.abs().div(&t.mul(&two, w, RM), p, RM);
            let im = if self.im.is_negative() { t.neg() } else { t };
            BigComplex { re, im: im.with_prec(p), prec: p }
        }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec;
        let w = p + 16;
        with_cc(|cc| {
            let m = self.re.exp(w, RM, cc);
            let c = self.im.cos(w, RM, cc);
            let s = self.im.sin(w, RM, cc);
            BigComplex { re: m.mul(&c, p, RM), im: m.mul(&s, p, RM), prec: p }
        })
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let p = self.prec;
        let w = p + 16;
        with_cc(|cc| {
            let re = self.norm_sqr().ln(w, RM, cc).div(&real_from_i64(2, w), p, RM);
            let im = atan2(&self.im, &self.re, w, cc).with_prec(p);
            BigComplex { re, im, prec: p }
        })
    }

    pub fn powi(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.prec);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// e(τ) = exp(2πiτ).
    pub fn q_of(&self) -> Self {
        let p = self.prec;
        let two_pi = real_pi(p + 16).mul(&real_from_i64(2, p + 16), p + 16, RM);
        let z = BigComplex { re: self.im.mul(&two_pi, p + 16, RM).neg(), im: self.re.mul(&two_pi, p + 16, RM), prec: p + 16 };
        z.exp().with_precision(p)
    }

    /// exp(2πi·k/n).
    pub fn root_of_unity(k: i64, n: i64, p: usize) -> Self {
        let x = BigRational::new(k.rem_euclid(n).into(), n.into());
        BigComplex::from_rationals(&x, &BigRational::zero(), p + 16).q_of().with_precision(p)
    }

    pub fn to_string_digits(&self, digits: usize) -> String {
        let re = real_to_string(&self.re, digits);
        if self.im.is_zero() {
            return re;
        }
        let im = real_to_string(&self.im.abs(), digits);
        let sign = if self.im.is_negative() { "-" } else { "+" };
        format!("{re}{sign}{im}i")
    }
}

trait WithPrec {
    fn with_prec(self, p: usize) -> Self;
}

impl WithPrec for Real {
    fn with_prec(mut self, p: usize) -> Self {
        self.set_precision(p, RM).expect("precision");
        self
    }
}

fn atan2(y: &Real, x: &Real, w: usize, cc: &mut Consts) -> Real {
    let pi = cc.pi(w, RM);
    if x.is_zero() {
        if y.is_zero() {
            return real_from_i64(0, w);
        }
        let half = pi.div(&real_from_i64(2, w), w, RM);
        return if y.is_negative() { half.neg() } else { half };
    }
    let base = y.div(x, w, RM).atan(w, RM, cc);
    if x.is_positive() {
        base
    } else if y.is_negative() {
        base.sub(&pi, w, RM)
    } else {
        base.add(&pi, w, RM)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &BigComplex, b: &BigComplex, tol_bits: i32) -> bool {
        let d = a.sub(b).abs();
        real_cmp(&d, &real_pow2(-tol_bits, 64)) == Ordering::Less
    }

    #[test]
    fn integer_round_trips() {
        for s in ["0", "1", "-1", "123456789012345678901234567890", "-98765432109876543210987654321098765"] {
            let n: BigInt = s.parse().unwrap();
            assert_eq!(real_round(&real_from_int(&n, 256)), n);
            assert_eq!(real_trunc(&real_from_int(&n, 256)), n);
        }
        let x = real_from_rational(&BigRational::new(7.into(), 2.into()), 128);
        assert_eq!(real_trunc(&x), BigInt::from(3));
        assert_eq!(real_round(&x.neg()), BigInt::from(-4));
    }

    #[test]
    fn decimal_rendering() {
        let pi = real_pi(256);
        assert_eq!(real_to_string(&pi, 30), "3.14159265358979323846264338328e0");
        assert_eq!(real_to_string(&real_from_i64(-204800, 256), 6), "-2.04800e5");
        assert_eq!(real_to_string(&real_from_rational(&BigRational::new(1.into(), 1000.into()), 128), 3), "1.00e-3");
        assert!((real_to_f64(&pi) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn field_identities() {
        let p = 256;
        let z = BigComplex::parse("0.3+1.7i", p).unwrap();
        let w = BigComplex::parse("-2.5-0.25i", p).unwrap();
        assert!(close(&z.mul(&w).div(&w), &z, 240));
        let s = z.sqrt();
        assert!(close(&s.mul(&s), &z, 240));
        assert!(close(&z.ln().exp(), &z, 240));
        let m1 = BigComplex::from_i64(-1, p).sqrt();
        assert!(close(&m1, &BigComplex::parse("i", p).unwrap(), 250));
        // principal branch: sqrt(−4 − 0i·ε) stays in the right half plane or on the imaginary axis
        let s2 = BigComplex::parse("-4-1e-30i", p).unwrap().sqrt();
        assert!(s2.im.is_negative());
        let i = BigComplex::parse("0+1i", p).unwrap();
        let q = i.q_of();
        let expect = real_from_i64(-2, p).mul(&real_pi(p), p, RM);
        let expect = with_cc(|cc| expect.exp(p, RM, cc));
        assert!(close(&q, &BigComplex::from_real(expect, p), 250));
        let z8 = BigComplex::root_of_unity(1, 8, p).powi(8);
        assert!(close(&z8, &BigComplex::one(p), 245));
    }

    #[test]
    fn parse_forms() {
        let p = 128;
        let a = BigComplex::parse("0+3i", p).unwrap();
        assert_eq!(real_to_f64(&a.im), 3.0);
        let b = BigComplex::parse("2", p).unwrap();
        assert_eq!(real_to_f64(&b.re), 2.0);
        let c = BigComplex::parse("-1e-2-2i", p).unwrap();
        assert_eq!(real_to_f64(&c.im), -2.0);
        assert!(BigComplex::parse("abc", p).is_none());
    }
}
