//! Positive definite binary quadratic forms and their Γ₀(p) classes.

use crate::arith::{gcd, isqrt};
use crate::error::{Error, Result};
use crate::Rational;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub use crate::arith::kronecker;

/// a·X² + b·XY + c·Y².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bqf {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

/// Integer matrix [[a, b], [c, d]] of determinant one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gl2z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Gl2z {
    pub const IDENTITY: Gl2z = Gl2z { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Gl2z = Gl2z { a: 0, b: -1, c: 1, d: 0 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Option<Self> {
        (a * d - b * c == 1).then_some(Gl2z { a, b, c, d })
    }

    pub fn translation(k: i64) -> Self {
        Gl2z { a: 1, b: k, c: 0, d: 1 }
    }

    pub fn mul(&self, o: &Gl2z) -> Gl2z {
        Gl2z {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Gl2z {
        Gl2z { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }
}

impl Bqf {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Bqf { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn is_positive_definite(&self) -> bool {
        self.disc() < 0 && self.a > 0
    }

    /// (Q∘γ)(x, y) = Q(γ·(x, y)).
    pub fn act(&self, g: &Gl2z) -> Bqf {
        Bqf {
            a: self.eval(g.a, g.c),
            b: 2 * self.a * g.a * g.b + self.b * (g.a * g.d + g.b * g.c) + 2 * self.c * g.c * g.d,
            c: self.eval(g.b, g.d),
        }
    }

    pub fn is_reduced(&self) -> bool {
        let Bqf { a, b, c } = *self;
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// Exact Heegner data (−b, d, 2a) with α_Q = (−b + i√d)/(2a).
    pub fn heegner_triple(&self) -> (i64, i64, i64) {
        (-self.b, -self.disc(), 2 * self.a)
    }
}

impl std::fmt::Display for Bqf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

/// Gauss reduction: returns the reduced form R and γ with R = Q∘γ.
pub fn reduce(q: &Bqf) -> Result<(Bqf, Gl2z)> {
    if !q.is_positive_definite() {
        return Err(Error::NotPositiveDefinite(q.a, q.b, q.c));
    }
    let mut f = *q;
    let mut g = Gl2z::IDENTITY;
    loop {
        // b into (−a, a]
        let k = (f.a - f.b).div_euclid(2 * f.a);
        if k != 0 {
            let t = Gl2z::translation(k);
            f = f.act(&t);
            g = g.mul(&t);
        }
        if f.a > f.c || (f.a == f.c && f.b < 0) {
            f = f.act(&Gl2z::S);
            g = g.mul(&Gl2z::S);
            continue;
        }
        break;
    }
    debug_assert!(f.is_reduced());
    Ok((f, g))
}

/// All γ with R∘γ = R (found by search; entries of automorphs of reduced forms are small).
pub fn automorphs(r: &Bqf) -> Vec<Gl2z> {
    let mut out = Vec::new();
    for a in -2..=2 {
        for b in -2..=2 {
            for c in -2..=2 {
                for d in -2..=2 {
                    if let Some(g) = Gl2z::new(a, b, c, d) {
                        if r.act(&g) == *r {
                            out.push(g);
                        }
                    }
                }
            }
        }
    }
    out
}

fn check_disc(d: i64) -> Result<()> {
    if d <= 0 || !matches!((-d).rem_euclid(4), 0 | 1) {
        return Err(Error::BadDiscriminant(d));
    }
    Ok(())
}

/// Reduced forms of discriminant −d with weights 1/|Γ̄_Q|.
pub fn class_list(d: i64) -> Result<Vec<(Bqf, Rational)>> {
    check_disc(d)?;
    let mut out = Vec::new();
    let amax = isqrt(d / 3) + 1;
    for a in 1..=amax {
        for b in -a..=a {
            if (b * b + d) % (4 * a) != 0 {
                continue;
            }
            let f = Bqf::new(a, b, (b * b + d) / (4 * a));
            if f.is_reduced() {
                let order = automorphs(&f).len() as i64 / 2;
                out.push((f, Rational::new(BigInt::from(1), BigInt::from(order))));
            }
        }
    }
    out.sort_by_key(|x| x.0);
    Ok(out)
}

/// Hurwitz–Kronecker class number; zero when −d is not a discriminant.
pub fn hurwitz(d: i64) -> Rational {
    match class_list(d) {
        Ok(list) => list.into_iter().map(|x| x.1).sum(),
        Err(_) => Rational::from_integer(0.into()),
    }
}

/// Whether Q2 = Q1∘γ for some γ ∈ Γ₀(p); returns such a γ.
pub fn gamma0_equivalent(q1: &Bqf, q2: &Bqf, p: i64) -> Result<Option<Gl2z>> {
    if q1.disc() != q2.disc() {
        return Err(Error::DiscriminantMismatch);
    }
    let (r1, g1) = reduce(q1)?;
    let (r2, g2) = reduce(q2)?;
    if r1 != r2 {
        return Ok(None);
    }
    let g2i = g2.inverse();
    Ok(automorphs(&r1).into_iter().map(|s| g1.mul(&s).mul(&g2i)).find(|g| g.c.rem_euclid(p) == 0))
}

/// Q∘W_p scaled back to an integral form, with W_p represented by [[0, −1], [p, 0]].
pub fn atkin_lehner(q: &Bqf, p: i64) -> Result<Bqf> {
    if q.a.rem_euclid(p) != 0 || q.disc() >= 0 {
        return Err(Error::NotGamma0Form(q.a, q.b, q.c, p));
    }
    Ok(Bqf::new(p * q.c, -q.b, q.a / p))
}

/// A Γ₀(p) class of forms [a, b, c] with p | a, b ≡ β (mod 2p).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRep {
    pub form: Bqf,
    /// |Γ̄_Q|
    pub stab_gamma: u32,
    /// |Γ̄₀(p)_Q|
    pub stab_gamma0: u32,
    /// |Γ̄₀(p)*_Q|
    pub stab_fricke: u32,
    /// (−b, d, 2a)
    pub heegner: (i64, i64, i64),
}

impl ClassRep {
    pub fn weight(&self) -> Rational {
        Rational::new(BigInt::from(1), BigInt::from(self.stab_gamma0))
    }
}

fn stabilizers(q: &Bqf, p: i64) -> Result<ClassRep> {
    let (r, g) = reduce(q)?;
    let gi = g.inverse();
    let aut = automorphs(&r);
    let in_gamma0 = aut.iter().filter(|s| g.mul(s).mul(&gi).c.rem_euclid(p) == 0).count() as u32;
    let stab_gamma0 = in_gamma0 / 2;
    let w = atkin_lehner(q, p)?;
    let fixed = gamma0_equivalent(q, &w, p)?.is_some();
    Ok(ClassRep {
        form: *q,
        stab_gamma: aut.len() as u32 / 2,
        stab_gamma0,
        stab_fricke: if fixed { 2 * stab_gamma0 } else { stab_gamma0 },
        heegner: q.heegner_triple(),
    })
}

fn scan(d: i64, p: i64, beta: i64, amax: i64) -> Result<Vec<Bqf>> {
    let mut reps: Vec<Bqf> = Vec::new();
    let m = 2 * p;
    let mut big_a = p;
    while big_a <= amax {
        let first = -big_a + 1 + (beta - (-big_a + 1)).rem_euclid(m);
        let mut big_b = first;
        while big_b <= big_a {
            let num = big_b * big_b + d;
            if num % (4 * big_a) == 0 {
                let f = Bqf::new(big_a, big_b, num / (4 * big_a));
                let mut known = false;
                for r in &reps {
                    if gamma0_equivalent(r, &f, p)?.is_some() {
                        known = true;
                        break;
                    }
                }
                if !known {
                    reps.push(f);
                }
            }
            big_b += m;
        }
        big_a += p;
    }
    Ok(reps)
}

/// Representatives of Q_{d,p,β}/Γ₀(p), sorted lexicographically.
///
/// Every class contains R∘g with R reduced and g one of the coset
/// representatives [[1,0],[k,1]] (0 ≤ k < p) or S of Γ₀(p)\Γ. Translating
/// keeps a fixed, so scanning p | a up to the largest such leading
/// coefficient with −a < b ≤ a finds every class.
pub fn gamma0_classes(d: i64, p: i64, beta: i64) -> Result<Vec<ClassRep>> {
    check_disc(d)?;
    if (beta * beta + d).rem_euclid(4 * p) != 0 {
        return Err(Error::BadBeta { d, beta, modulus: 4 * p });
    }
    let mut amax = p;
    for (r, _) in class_list(d)? {
        amax = amax.max(r.c);
        for k in 0..p {
            amax = amax.max(r.eval(1, k));
        }
    }
    let reps = scan(d, p, beta, amax)?;
    let mut out = reps.iter().map(|q| stabilizers(q, p)).collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|c| c.form);
    Ok(out)
}

/// The smallest β ≥ 0 with β² ≡ −d (mod 4p), if any.
pub fn default_beta(d: i64, p: i64) -> Option<i64> {
    (0..2 * p).find(|b| (b * b + d).rem_euclid(4 * p) == 0)
}

/// H_{p,β}(d) = Σ 1/|Γ̄₀(p)_Q|.
pub fn weighted_count(classes: &[ClassRep]) -> Rational {
    classes.iter().map(|c| c.weight()).sum()
}

/// Genus character χ_{D,−d}(Q) via the first represented value coprime to 2Dd.
pub fn genus_char(q: &Bqf, big_d: i64, d: i64) -> Result<i32> {
    if q.disc() != -d * big_d {
        return Err(Error::DiscriminantMismatch);
    }
    let modulus = 2 * big_d * d;
    let mut candidates = vec![q.a, q.c, q.a + q.b + q.c];
    for x in -12i64..=12 {
        for y in 0i64..=12 {
            if gcd(x, y) == 1 {
                candidates.push(q.eval(x, y));
            }
        }
    }
    candidates
        .into_iter()
        .find(|&r| r > 0 && gcd(r, modulus) == 1)
        .map(|r| kronecker(big_d, r))
        .ok_or(Error::NoCoprimeValue)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(a: i64, b: i64, c: i64) -> Bqf {
        Bqf::new(a, b, c)
    }

    /// Independent class enumeration: images of the reduced forms under coset
    /// representatives of Γ₀(p)\Γ, filtered to the (p, β) conditions.
    fn coset_oracle(d: i64, p: i64, beta: i64) -> Vec<Bqf> {
        let mut cosets: Vec<Gl2z> = (0..p).map(|k| Gl2z::new(1, 0, k, 1).unwrap()).collect();
        cosets.push(Gl2z::S);
        let mut out: Vec<Bqf> = Vec::new();
        for (r, _) in class_list(d).unwrap() {
            for g in &cosets {
                for sign in [1, -1] {
                    let h = Gl2z { a: sign * g.a, b: sign * g.b, c: sign * g.c, d: sign * g.d };
                    let q = r.act(&h);
                    if q.a % p == 0 && (q.b - beta).rem_euclid(2 * p) == 0
                        && !out.iter().any(|o| gamma0_equivalent(o, &q, p).unwrap().is_some())
                    {
                        out.push(q);
                    }
                }
            }
        }
        out
    }

    fn brute_reduce_witness(q: &Bqf, target: &Bqf) -> bool {
        for a in -3..=3 {
            for b in -3..=3 {
                for c in -3..=3 {
                    for d in -3..=3 {
                        if let Some(g) = Gl2z::new(a, b, c, d) {
                            if q.act(&g) == *target {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&f(1, 0, 4)).unwrap(), (f(1, 0, 4), Gl2z::IDENTITY));
        let (r, g) = reduce(&f(4, -4, 2)).unwrap();
        assert_eq!(r, f(2, 0, 2));
        assert_eq!(f(4, -4, 2).act(&g), r);
        assert!(brute_reduce_witness(&f(4, -4, 2), &f(2, 0, 2)));
        assert_eq!(reduce(&f(4, 0, 1)).unwrap().0, f(1, 0, 4));
        assert!(reduce(&f(1, 3, 1)).is_err());
    }

    #[test]
    fn class_lists_and_hurwitz() {
        let third = Rational::new(1.into(), 3.into());
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(class_list(3).unwrap(), vec![(f(1, 1, 1), third.clone())]);
        assert_eq!(class_list(16).unwrap(), vec![(f(1, 0, 4), Rational::from_integer(1.into())), (f(2, 0, 2), half.clone())]);
        assert_eq!(class_list(7).unwrap().len(), 1);
        assert_eq!(hurwitz(3), third);
        assert_eq!(hurwitz(4), half);
        assert_eq!(hurwitz(16), Rational::new(3.into(), 2.into()));
        assert_eq!(hurwitz(23), Rational::from_integer(3.into()));
        assert_eq!(hurwitz(5), Rational::from_integer(0.into()));
        assert!(class_list(5).is_err());
    }

    #[test]
    fn class_set_16_2_0() {
        let cl = gamma0_classes(16, 2, 0).unwrap();
        assert_eq!(cl.len(), 3);
        let expected = [(f(4, -4, 2), 2), (f(2, 0, 2), 1), (f(4, 0, 1), 1)];
        for (q, stab) in expected {
            let hit = cl.iter().find(|c| gamma0_equivalent(&c.form, &q, 2).unwrap().is_some()).expect("class present");
            assert_eq!(hit.stab_gamma0, stab, "{q}");
        }
        assert_eq!(weighted_count(&cl), Rational::new(5.into(), 2.into()));
    }

    #[test]
    fn class_set_39_3_3() {
        let cl = gamma0_classes(39, 3, 3).unwrap();
        assert_eq!(cl.len(), 4);
        for q in [f(12, 3, 1), f(3, 3, 4), f(6, 3, 2), f(15, 9, 2)] {
            assert!(cl.iter().any(|c| gamma0_equivalent(&c.form, &q, 3).unwrap().is_some()), "{q}");
        }
    }

    #[test]
    fn scan_agrees_with_coset_oracle() {
        for p in [2i64, 3, 5, 7, 13] {
            for d in 3..150 {
                if check_disc(d).is_err() {
                    continue;
                }
                for beta in 0..2 * p {
                    if (beta * beta + d).rem_euclid(4 * p) != 0 {
                        continue;
                    }
                    let got = gamma0_classes(d, p, beta).unwrap();
                    let want = coset_oracle(d, p, beta);
                    assert_eq!(got.len(), want.len(), "d={d} p={p} beta={beta}");
                    for w in &want {
                        assert!(got.iter().any(|g| gamma0_equivalent(&g.form, w, p).unwrap().is_some()));
                    }
                }
            }
        }
    }

    #[test]
    fn class_with_large_leading_coefficient() {
        // [34,0,1] is not Γ₀(2)-equivalent to any form with a < 34
        let got = gamma0_classes(136, 2, 0).unwrap();
        assert_eq!(got.len(), 4);
        assert!(got.iter().any(|c| c.form == f(34, 0, 1)));
    }

    #[test]
    fn equivalence_examples() {
        assert!(gamma0_equivalent(&f(4, -4, 2), &f(4, -4, 2), 2).unwrap().is_some());
        assert!(gamma0_equivalent(&f(4, -4, 2), &f(2, 0, 2), 2).unwrap().is_none());
        assert!(gamma0_equivalent(&f(2, 0, 2), &f(4, 0, 1), 2).unwrap().is_none());
        assert!(gamma0_equivalent(&f(4, 0, 1), &f(1, 0, 4), 1).unwrap().is_some());
        assert!(gamma0_equivalent(&f(4, 0, 1), &f(1, 0, 4), 2).unwrap().is_none());
        assert_eq!(gamma0_equivalent(&f(1, 0, 4), &f(1, 1, 1), 2), Err(Error::DiscriminantMismatch));
        let w = gamma0_equivalent(&f(4, 4, 2), &f(4, -4, 2), 2).unwrap().unwrap();
        assert_eq!(f(4, 4, 2).act(&w), f(4, -4, 2));
        assert_eq!(w.c % 2, 0);
    }

    #[test]
    fn atkin_lehner_examples() {
        let q1 = f(4, -4, 2);
        assert!(gamma0_equivalent(&q1, &atkin_lehner(&q1, 2).unwrap(), 2).unwrap().is_some());
        let w2 = atkin_lehner(&f(2, 0, 2), 2).unwrap();
        assert!(gamma0_equivalent(&w2, &f(4, 0, 1), 2).unwrap().is_some());
        let ww = atkin_lehner(&atkin_lehner(&f(6, 3, 2), 3).unwrap(), 3).unwrap();
        assert!(gamma0_equivalent(&ww, &f(6, 3, 2), 3).unwrap().is_some());
        assert!(atkin_lehner(&f(3, 1, 1), 2).is_err());
        let cl = gamma0_classes(16, 2, 0).unwrap();
        let fr: Vec<u32> = cl.iter().map(|c| c.stab_fricke).collect();
        let g0: Vec<u32> = cl.iter().map(|c| c.stab_gamma0).collect();
        // Q1 is fixed by W_2, Q2 and Q3 are swapped
        for (c, (x, y)) in cl.iter().zip(fr.iter().zip(&g0)) {
            let fixed = gamma0_equivalent(&c.form, &atkin_lehner(&c.form, 2).unwrap(), 2).unwrap().is_some();
            assert_eq!(*x == 2 * y, fixed);
        }
    }

    #[test]
    fn genus_character_examples() {
        assert_eq!(genus_char(&f(18, 2, 1), 17, 4).unwrap(), 1);
        assert_eq!(genus_char(&f(6, -2, 3), 17, 4).unwrap(), -1);
        let s: i32 = gamma0_classes(39, 3, 3).unwrap().iter().map(|c| genus_char(&c.form, 13, 3).unwrap()).sum();
        assert_eq!(s, 0);
        assert_eq!(genus_char(&f(1, 1, 1), 13, 3), Err(Error::DiscriminantMismatch));
    }

    #[test]
    fn bijection_with_full_level_when_p_squared_does_not_divide() {
        for (d, p) in [(7, 2), (15, 2), (23, 2), (8, 3), (11, 3), (20, 3), (39, 3), (35, 7)] {
            let beta = default_beta(d, p).unwrap();
            assert_eq!(gamma0_classes(d, p, beta).unwrap().len(), class_list(d).unwrap().len(), "d={d} p={p}");
        }
    }
}
