//! Weak Jacobi forms of index p, the forms φ_{D,p}, and Hecke operators on them.

use crate::arith::{divisors, gcd, is_square, kronecker, s_exp, sigma_table};
use crate::error::{Error, Result};
use crate::halfint::{is_plus_exponent, HalfIntForm};
use crate::linalg::{solve, Matrix};
use crate::qseries::{delta, eisenstein, rat, ExactSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

type Row = BTreeMap<i64, BigRational>;

/// Σ c(n,r) qⁿ ζ^r with every row n_min ≤ n < trunc known exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiSeries {
    index: i64,
    weight: i64,
    n_min: i64,
    rows: Vec<Row>,
}

fn add_into(row: &mut Row, r: i64, c: BigRational) {
    if c.is_zero() {
        return;
    }
    let e = row.entry(r).or_insert_with(BigRational::zero);
    *e += c;
    if e.is_zero() {
        row.remove(&r);
    }
}

impl JacobiSeries {
    pub fn zero(index: i64, weight: i64, n_min: i64, trunc: i64) -> Self {
        JacobiSeries { index, weight, n_min, rows: vec![Row::new(); (trunc - n_min).max(0) as usize] }
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn trunc(&self) -> i64 {
        self.n_min + self.rows.len() as i64
    }

    pub fn row(&self, n: i64) -> Result<&Row> {
        if n < self.n_min || n >= self.trunc() {
            return Err(Error::WindowMiss(n));
        }
        Ok(&self.rows[(n - self.n_min) as usize])
    }

    pub fn coeff(&self, n: i64, r: i64) -> Result<BigRational> {
        Ok(self.row(n)?.get(&r).cloned().unwrap_or_else(BigRational::zero))
    }

    /// Nonzero cells in (n, r) order.
    pub fn cells(&self) -> impl Iterator<Item = (i64, i64, &BigRational)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(i, row)| row.iter().map(move |(r, c)| (self.n_min + i as i64, *r, c)))
    }

    pub fn truncate(&self, trunc: i64) -> Self {
        let mut out = self.clone();
        out.rows.truncate((trunc - self.n_min).max(0) as usize);
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.index, o.index, "index mismatch");
        let n_min = self.n_min.min(o.n_min);
        let trunc = self.trunc().min(o.trunc());
        let mut out = JacobiSeries::zero(self.index, self.weight, n_min, trunc);
        for src in [self, o] {
            for (n, r, c) in src.cells() {
                if n < trunc {
                    add_into(&mut out.rows[(n - n_min) as usize], r, c.clone());
                }
            }
        }
        out
    }

    pub fn scalar_mul(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            if c.is_zero() {
                row.clear();
            }
            for v in row.values_mut() {
                *v *= c;
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scalar_mul(&rat(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n_min = self.n_min + o.n_min;
        let trunc = (self.trunc() + o.n_min).min(o.trunc() + self.n_min);
        let mut out = JacobiSeries::zero(self.index + o.index, self.weight + o.weight, n_min, trunc);
        for (i, ra) in self.rows.iter().enumerate() {
            for (j, rb) in o.rows.iter().enumerate() {
                let n = n_min + (i + j) as i64;
                if n >= trunc {
                    break;
                }
                let row = &mut out.rows[i + j];
                for (r1, c1) in ra {
                    for (r2, c2) in rb {
                        add_into(row, r1 + r2, c1 * c2);
                    }
                }
            }
        }
        out
    }

    /// Product with an elliptic modular form of weight `k` given as a q-series.
    pub fn mul_modular(&self, f: &ExactSeries, k: i64) -> Result<Self> {
        if f.scale() != 1 {
            return Err(Error::ScaleMismatch(f.scale(), 1));
        }
        if f.is_zero() {
            return Ok(JacobiSeries::zero(self.index, self.weight + k, self.n_min, self.trunc()));
        }
        let v = f.valuation();
        let n_min = self.n_min + v;
        let trunc = (self.trunc() + v).min(f.trunc() + self.n_min);
        let mut out = JacobiSeries::zero(self.index, self.weight + k, n_min, trunc);
        for e in v..f.trunc() {
            let c = f.coeff(e)?;
            if c.is_zero() {
                continue;
            }
            for (i, row) in self.rows.iter().enumerate() {
                let n = self.n_min + i as i64 + e;
                if n >= trunc {
                    break;
                }
                let dst = &mut out.rows[(n - n_min) as usize];
                for (r, x) in row {
                    add_into(dst, *r, x * &c);
                }
            }
        }
        Ok(out)
    }

    /// Applies D_q^a D_ζ^b termwise (D_q = q d/dq, D_ζ = ζ d/dζ).
    pub fn derivative(&self, a: u32, b: u32) -> Self {
        let mut out = self.clone();
        for (i, row) in out.rows.iter_mut().enumerate() {
            let n = self.n_min + i as i64;
            let f = rat(BigInt::from(n).pow(a));
            for (r, v) in row.iter_mut() {
                *v *= &f * rat(BigInt::from(*r).pow(b));
            }
            row.retain(|_, v| !v.is_zero());
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    index: i64,
    weight: i64,
    n_min: i64,
    trunc: i64,
    cells: Vec<(i64, i64, String)>,
}

impl Serialize for JacobiSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cells = self.cells().map(|(n, r, c)| (n, r, format!("{}/{}", c.numer(), c.denom()))).collect();
        Wire { index: self.index, weight: self.weight, n_min: self.n_min, trunc: self.trunc(), cells }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for JacobiSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        if w.trunc < w.n_min {
            return Err(D::Error::custom("trunc below n_min"));
        }
        let mut out = JacobiSeries::zero(w.index, w.weight, w.n_min, w.trunc);
        for (n, r, c) in w.cells {
            let c: BigRational = c.parse().map_err(|_| D::Error::custom(format!("bad rational {c}")))?;
            if n < w.n_min || n >= w.trunc {
                return Err(D::Error::custom(format!("cell row {n} outside window")));
            }
            add_into(&mut out.rows[(n - w.n_min) as usize], r, c);
        }
        Ok(out)
    }
}

/// Multiplies in place by (1 + s qᵏ ζ^e) for k ≥ 1.
fn times_factor(rows: &mut [Row], k: usize, e: i64, s: i64) {
    for n in (k..rows.len()).rev() {
        let src: Vec<(i64, BigRational)> = rows[n - k].iter().map(|(r, c)| (r + e, c * rat(s))).collect();
        for (r, c) in src {
            add_into(&mut rows[n], r, c);
        }
    }
}

/// Divides in place by (1 + s qᵏ) for k ≥ 1.
fn divide_factor(rows: &mut [Row], k: usize, s: i64) {
    for n in k..rows.len() {
        let src: Vec<(i64, BigRational)> = rows[n - k].iter().map(|(r, c)| (*r, c * rat(-s))).collect();
        for (r, c) in src {
            add_into(&mut rows[n], r, c);
        }
    }
}

fn row_from(pairs: &[(i64, i64)]) -> Row {
    let mut row = Row::new();
    for &(r, c) in pairs {
        add_into(&mut row, r, rat(c));
    }
    row
}

/// The generators a (weight −2) and b (weight 0) of index 1, rows 0 ≤ n < trunc.
///
/// a = (ζ − 2 + ζ⁻¹) ∏ (1 − qⁿζ)²(1 − qⁿζ⁻¹)²/(1 − qⁿ)⁴, the squared odd theta
/// function over η⁶; b = 4 Σ_{i=2,3,4} θ_i(τ,z)²/θ_i(τ,0)².
pub fn weak_generators(trunc: i64) -> (JacobiSeries, JacobiSeries) {
    let t = trunc.max(1) as usize;
    let mut a = vec![Row::new(); t];
    a[0] = row_from(&[(1, 1), (0, -2), (-1, 1)]);
    let mut b = vec![Row::new(); t];
    b[0] = row_from(&[(1, 1), (0, 2), (-1, 1)]);
    for k in 1..t {
        for _ in 0..2 {
            times_factor(&mut a, k, 1, -1);
            times_factor(&mut a, k, -1, -1);
            times_factor(&mut b, k, 1, 1);
            times_factor(&mut b, k, -1, 1);
        }
        for _ in 0..4 {
            divide_factor(&mut a, k, -1);
            divide_factor(&mut b, k, 1);
        }
    }
    // θ₃ and θ₄ parts in Q = q^{1/2}; only even powers of Q survive their sum
    let mut h = vec![Row::new(); 2 * t];
    h[0] = row_from(&[(0, 1)]);
    for k in (1..2 * t).step_by(2) {
        for _ in 0..2 {
            times_factor(&mut h, k, 1, 1);
            times_factor(&mut h, k, -1, 1);
        }
        for _ in 0..4 {
            divide_factor(&mut h, k, 1);
        }
    }
    for n in 0..t {
        for (r, c) in &h[2 * n] {
            add_into(&mut b[n], *r, c * rat(8));
        }
    }
    (
        JacobiSeries { index: 1, weight: -2, n_min: 0, rows: a },
        JacobiSeries { index: 1, weight: 0, n_min: 0, rows: b },
    )
}

/// φ_{D,p}: weight 2, index p, B(D,−D) = 1 and no other negative-discriminant coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiForm {
    pub big_d: i64,
    pub p: i64,
    pub base: JacobiSeries,
    /// Coefficients with discriminant below this vanish identically.
    pub min_disc: i64,
}

/// Δ-power used in the spanning set for φ_{D,p}.
pub fn delta_power(big_d: i64, p: i64) -> i64 {
    (big_d + 4 * p + 4 * p - 1) / (4 * p) + 1
}

fn is_square_class(big_d: i64, p: i64) -> bool {
    is_plus_exponent(big_d, p)
}

/// Rows needed so that every discriminant up to `d_max` has a cell with |r| ≤ p.
pub fn rows_for(d_max: i64, p: i64) -> i64 {
    ((d_max + p * p) / (4 * p) + 2).max(2)
}

/// φ_{D,p} with rows n < `trunc`.
pub fn phi(big_d: i64, p: i64, trunc: i64) -> Result<PhiForm> {
    if !(1..=3).contains(&p) {
        return Err(Error::UnsupportedPrime(p));
    }
    if big_d < 1 || !is_square_class(big_d, p) {
        return Err(Error::BadD(big_d, p));
    }
    let e = delta_power(big_d, p);
    let (a, b) = weak_generators(trunc + e + 1);
    let mut ab = Vec::new();
    for i in 0..=p {
        let mut m = JacobiSeries { index: 0, weight: 0, n_min: 0, rows: vec![row_from(&[(0, 1)]); 1] }
            .with_rows(trunc + e + 1);
        for _ in 0..i {
            m = m.mul(&a);
        }
        for _ in 0..(p - i) {
            m = m.mul(&b);
        }
        ab.push(m);
    }
    let qt = trunc + 2 * e + 2;
    let inv_delta_e = {
        let dl = delta(qt + e + 2).inverse()?;
        let mut x = ExactSeries::one(qt);
        for _ in 0..e {
            x = x.mul(&dl)?;
        }
        x
    };
    let e4 = eisenstein(4, qt)?;
    let e6 = eisenstein(6, qt)?;
    let mut span = Vec::new();
    for (i, m) in ab.iter().enumerate() {
        let k = 2 + 2 * i as i64 + 12 * e;
        for beta in 0..=(k / 6) {
            let rest = k - 6 * beta;
            if rest % 4 != 0 {
                continue;
            }
            let mut f = inv_delta_e.clone();
            for _ in 0..rest / 4 {
                f = f.mul(&e4)?;
            }
            for _ in 0..beta {
                f = f.mul(&e6)?;
            }
            span.push(m.mul_modular(&f, k - 12 * e)?.truncate(trunc));
        }
    }
    // constraints: every cell with n ≤ 0 and negative discriminant
    let mut keys = std::collections::BTreeSet::new();
    for s in &span {
        for (n, r, _) in s.cells() {
            if n <= 0 && 4 * p * n - r * r < 0 {
                keys.insert((n, r));
            }
        }
    }
    let keys: Vec<(i64, i64)> = keys.into_iter().collect();
    let rows: Vec<Vec<BigRational>> =
        keys.iter().map(|&(n, r)| span.iter().map(|s| s.coeff(n, r).unwrap()).collect()).collect();
    let mut rhs = Matrix::zeros(keys.len(), 1);
    for (i, &(n, r)) in keys.iter().enumerate() {
        if 4 * p * n - r * r == -big_d {
            rhs.set(i, 0, BigRational::one());
        }
    }
    if !keys.iter().any(|&(n, r)| 4 * p * n - r * r == -big_d) {
        return Err(Error::SingularSystem(format!("no cell of discriminant -{big_d} in the span")));
    }
    let x = solve(&Matrix::from_rows(rows), &rhs, true)?;
    let mut base = JacobiSeries::zero(p, 2, -e, trunc);
    for (i, s) in span.iter().enumerate() {
        let c = x.get(i, 0);
        if !c.is_zero() {
            base = base.add(&s.scalar_mul(c));
        }
    }
    Ok(PhiForm { big_d, p, base, min_disc: -(p * p + 4 * p * e) })
}

impl JacobiSeries {
    fn with_rows(mut self, trunc: i64) -> Self {
        self.rows.resize((trunc - self.n_min).max(0) as usize, Row::new());
        self
    }
}

/// φ_{D,p} for several D at once.
pub fn phi_many(ds: &[i64], p: i64, trunc: i64) -> Result<Vec<PhiForm>> {
    ds.par_iter().map(|&d| phi(d, p, trunc)).collect()
}

impl PhiForm {
    /// All window cells (n, r) with 4pn − r² = d.
    fn cells_of(&self, d: i64) -> Vec<(i64, i64)> {
        let big = 4 * self.p;
        let s = &self.base;
        let mut out = Vec::new();
        let r_lim = ((big * (s.trunc() - 1) - d).max(0) as f64).sqrt() as i64 + 1;
        for r in -r_lim..=r_lim {
            let t = d + r * r;
            if t.rem_euclid(big) == 0 {
                let n = t / big;
                if n >= s.n_min() && n < s.trunc() {
                    out.push((n, r));
                }
            }
        }
        out
    }

    /// B(D,d): the common coefficient of the cells of discriminant d.
    pub fn coefficient_b(&self, d: i64) -> Result<BigRational> {
        if d < self.min_disc {
            return Ok(BigRational::zero());
        }
        let cells = self.cells_of(d);
        let Some(&(n0, r0)) = cells.first() else { return Err(Error::WindowMiss(d)) };
        let v = self.base.coeff(n0, r0)?;
        for &(n, r) in &cells[1..] {
            if self.base.coeff(n, r)? != v {
                return Err(Error::InconsistentDiscriminantDependence(d));
            }
        }
        Ok(v)
    }

    /// B*(D,d) = 2^{s(D,p)} B(D,d).
    pub fn b_star(&self, d: i64) -> Result<BigRational> {
        Ok(self.coefficient_b(d)? * rat(1i64 << s_exp(self.big_d, self.p)))
    }

    /// Whether every window cell depends on its discriminant only.
    pub fn check_discriminant_dependence(&self) -> Result<()> {
        let mut seen: BTreeMap<i64, BigRational> = BTreeMap::new();
        let big = 4 * self.p;
        // cells absent from a row are zero; walk the full r-range of each row
        for n in self.base.n_min()..self.base.trunc() {
            let r_lim = ((big * n - self.min_disc).max(0) as f64).sqrt() as i64 + 1;
            for r in -r_lim..=r_lim {
                let d = big * n - r * r;
                let c = self.base.coeff(n, r)?;
                match seen.get(&d) {
                    Some(v) if *v != c => return Err(Error::InconsistentDiscriminantDependence(d)),
                    Some(_) => {}
                    None => {
                        seen.insert(d, c);
                    }
                }
            }
        }
        Ok(())
    }
}

/// V_p on an index-1 form of weight k: c'(n,r) = Σ_{u | (n,r,p)} u^{k−1} c(np/u², r/u).
pub fn hecke_v(phi1: &JacobiSeries, p: i64) -> Result<JacobiSeries> {
    if phi1.index() != 1 {
        return Err(Error::BadL(phi1.index(), p));
    }
    let k = phi1.weight();
    // rows below n_min vanish; the p·c(n/p, r/p) term reaches down to p·n_min
    let n_min = (phi1.n_min() * p).min(phi1.n_min().div_euclid(p));
    let trunc = (phi1.trunc() + p - 1) / p;
    let empty = Row::new();
    let row = |m: i64| if m < phi1.n_min() { Ok(&empty) } else { phi1.row(m) };
    let mut out = JacobiSeries::zero(p, k, n_min, trunc);
    for n in n_min..trunc {
        let span = |row: &Row| row.keys().map(|r| r.abs()).max().unwrap_or(0);
        let mut r_lim = span(row(n * p)?);
        if n % p == 0 {
            r_lim = r_lim.max(p * span(row(n / p)?));
        }
        let dst = (n - n_min) as usize;
        for r in -r_lim..=r_lim {
            let mut c = row(n * p)?.get(&r).cloned().unwrap_or_else(BigRational::zero);
            if n % p == 0 && r % p == 0 {
                let extra = row(n / p)?.get(&(r / p)).cloned().unwrap_or_else(BigRational::zero);
                c += extra * rat(BigInt::from(p).pow((k - 1) as u32));
            }
            add_into(&mut out.rows[dst], r, c);
        }
    }
    Ok(out)
}

/// T_l on φ_{D,p} for l coprime to p: Σ_{ν | l} (D/(l/ν)) ν φ_{ν²D,p}.
pub fn hecke_t(phi_d: &PhiForm, l: i64) -> Result<JacobiSeries> {
    if l < 1 || gcd(l, phi_d.p) != 1 {
        return Err(Error::BadL(l, phi_d.p));
    }
    let trunc = phi_d.base.trunc();
    let mut acc: Option<JacobiSeries> = None;
    for nu in divisors(l) {
        let chi = kronecker(phi_d.big_d, l / nu);
        if chi == 0 {
            continue;
        }
        let f = if nu == 1 { phi_d.clone() } else { phi(nu * nu * phi_d.big_d, phi_d.p, trunc)? };
        let term = f.base.scalar_mul(&rat(chi as i64 * nu));
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.unwrap_or_else(|| JacobiSeries::zero(phi_d.p, 2, phi_d.base.n_min(), trunc)))
}

/// Constant term of f·g with g = Σ_d B(D,d) q^d: Σ_n A(n) B(D,−n).
pub fn pairing(f: &HalfIntForm, phi_d: &PhiForm) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for (n, c) in f.series.terms() {
        if -n < phi_d.min_disc {
            continue;
        }
        acc += c * phi_d.coefficient_b(-n)?;
    }
    Ok(acc)
}

/// The value B(D,0) must take: −2 for square D, else 0.
pub fn expected_b0(big_d: i64) -> BigRational {
    if is_square(big_d) {
        rat(-2)
    } else {
        BigRational::zero()
    }
}

/// E₂ = 1 − 24 Σ σ(n) qⁿ.
pub fn e2(trunc: i64) -> ExactSeries {
    let s = sigma_table(1, trunc.max(1) as usize);
    let coeffs: Vec<BigInt> = (0..trunc.max(1) as usize)
        .map(|n| if n == 0 { BigInt::one() } else { &s[n] * BigInt::from(-24) })
        .collect();
    ExactSeries::from_integers(1, 0, coeffs, trunc)
}

/// Sign of the leading denominator, used to detect non-integral output.
pub fn is_integral(s: &JacobiSeries) -> bool {
    s.cells().all(|(_, _, c)| c.is_integer() && !c.denom().is_negative())
}
