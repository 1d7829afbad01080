use super::{rat, ExactSeries};
use crate::arith::sigma_table;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::sync::OnceLock;

/// Bernoulli numbers B_0..=B_kmax (B_1 = −1/2 convention; only even k are used).
#[derive(Debug, Clone)]
pub struct BernoulliCache {
    table: Vec<BigRational>,
}

impl BernoulliCache {
    pub fn build(k_max: usize) -> Self {
        let k_max = k_max.max(4);
        let mut table: Vec<BigRational> = Vec::with_capacity(k_max + 1);
        table.push(rat(1));
        for m in 1..=k_max {
            let mut acc = rat(0);
            let mut binom = BigInt::one();
            for (j, b) in table.iter().enumerate() {
                acc += BigRational::from_integer(binom.clone()) * b;
                binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
            }
            table.push(-acc / rat(m as i64 + 1));
        }
        let cache = BernoulliCache { table };
        assert_eq!(cache.get(2), BigRational::new(1.into(), 6.into()), "B_2 self-check");
        assert_eq!(cache.get(4), BigRational::new((-1).into(), 30.into()), "B_4 self-check");
        cache
    }

    pub fn k_max(&self) -> usize {
        self.table.len() - 1
    }

    pub fn get(&self, k: usize) -> BigRational {
        self.table[k].clone()
    }

    /// Shared read-only table up to k = 128.
    pub fn global() -> &'static BernoulliCache {
        static CACHE: OnceLock<BernoulliCache> = OnceLock::new();
        CACHE.get_or_init(|| BernoulliCache::build(128))
    }
}

pub fn bernoulli(k: usize) -> BigRational {
    let g = BernoulliCache::global();
    if k <= g.k_max() {
        g.get(k)
    } else {
        BernoulliCache::build(k).get(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Theta,
    Eisenstein(u32),
    Delta,
    EtaQuotient { p: u32, e: i64 },
}

/// Standard generator known for all exponents below q^trunc.
pub fn generator(name: Generator, trunc: i64) -> Result<ExactSeries> {
    match name {
        Generator::Theta => Ok(theta(trunc)),
        Generator::Eisenstein(k) => eisenstein(k, trunc),
        Generator::Delta => Ok(delta(trunc)),
        Generator::EtaQuotient { p, e } => Ok(eta_quotient(p, e, trunc)),
    }
}

/// θ = Σ_{n∈Z} q^{n²}.
pub fn theta(trunc: i64) -> ExactSeries {
    let len = trunc.max(0) as usize;
    let mut c = vec![BigInt::zero(); len];
    if len > 0 {
        c[0] = BigInt::one();
    }
    let mut n = 1usize;
    while n * n < len {
        c[n * n] = BigInt::from(2);
        n += 1;
    }
    ExactSeries::from_integers(1, 0, c, trunc)
}

/// E_k = 1 − (2k/B_k) Σ σ_{k−1}(n) qⁿ.
pub fn eisenstein(k: u32, trunc: i64) -> Result<ExactSeries> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::UnsupportedWeight(k as i64));
    }
    let factor = -rat(2 * k as i64) / bernoulli(k as usize);
    let len = trunc.max(1) as usize;
    let sig = sigma_table(k - 1, len);
    let mut c: Vec<BigRational> = sig.into_iter().map(|s| &factor * BigRational::from_integer(s)).collect();
    c[0] = rat(1);
    Ok(ExactSeries::from_rationals(1, 0, &c, trunc))
}

/// Δ = q ∏(1 − qⁿ)²⁴.
pub fn delta(trunc: i64) -> ExactSeries {
    eta_product(&[(1, 24)], trunc)
}

/// (η(τ)/η(pτ))^e.
pub fn eta_quotient(p: u32, e: i64, trunc: i64) -> ExactSeries {
    eta_product(&[(1, e), (p, -e)], trunc)
}

/// ∏ η(mτ)^{e_m} for (m, e_m) pairs, known below q^trunc.
///
/// The product part satisfies n·P_n = −Σ_k w_k P_{n−k} with
/// w_k = Σ_{m | k} e_m·m·σ(k/m), and P stays integral.
pub fn eta_product(factors: &[(u32, i64)], trunc: i64) -> ExactSeries {
    let lead = factors.iter().map(|&(m, e)| BigRational::new(BigInt::from(m as i64 * e), BigInt::from(24))).fold(rat(0), |a, b| a + b);
    let scale: u32 = lead.denom().try_into().expect("small scale");
    let lead_num: i64 = (lead.numer()).try_into().expect("small exponent");
    // need lead + k < trunc, i.e. k < trunc − lead
    let bound = rat(trunc) - &lead;
    let terms = if bound <= rat(0) { 0 } else { bound.ceil().to_integer().try_into().unwrap_or(0usize) };
    let mut w = vec![BigInt::zero(); terms.max(1)];
    let sigma: Vec<i64> = (0..terms.max(1)).map(|n| if n == 0 { 0 } else { crate::arith::sigma1(n as i64) }).collect();
    for &(m, e) in factors {
        let m = m as usize;
        let mut k = m;
        while k < terms {
            w[k] += BigInt::from(e * m as i64 * sigma[k / m]);
            k += m;
        }
    }
    let mut pcoef: Vec<BigInt> = Vec::with_capacity(terms);
    if terms > 0 {
        pcoef.push(BigInt::one());
    }
    for n in 1..terms {
        let mut acc = BigInt::zero();
        for k in 1..=n {
            if !w[k].is_zero() {
                acc += &w[k] * &pcoef[n - k];
            }
        }
        pcoef.push(-acc / BigInt::from(n));
    }
    let series = ExactSeries::from_integers(1, 0, pcoef, terms as i64);
    let spread = series.rescale(scale).expect("scale divides");
    let shifted = spread.shift(lead_num);
    shifted.truncate(trunc * scale as i64).expect("truncate")
}
