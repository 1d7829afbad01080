//! Truncated products of integer polynomials.
//!
//! Long products are packed into a single big integer (Kronecker
//! substitution) so that the bignum multiplier does the convolution.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;

const SCHOOLBOOK_CUTOFF: usize = 24;

/// Coefficients 0..len of a(x)·b(x).
pub fn mul_trunc(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let a = &a[..a.len().min(len)];
    let b = &b[..b.len().min(len)];
    if a.is_empty() || b.is_empty() || len == 0 {
        return Vec::new();
    }
    if a.len().min(b.len()) < SCHOOLBOOK_CUTOFF {
        schoolbook(a, b, len)
    } else {
        kronecker(a, b, len)
    }
}

pub fn schoolbook(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let out_len = (a.len() + b.len() - 1).min(len);
    let mut out = vec![BigInt::zero(); out_len];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() || i >= out_len {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(out_len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn max_bits(v: &[BigInt]) -> u64 {
    v.iter().map(|x| x.bits()).max().unwrap_or(0)
}

fn pack(v: &[BigInt], slot: u64) -> BigInt {
    let total_words = ((v.len() as u64 * slot) / 32 + 2) as usize;
    let mut pos = vec![0u32; total_words];
    let mut neg = vec![0u32; total_words];
    for (i, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let buf = if x.sign() == Sign::Minus { &mut neg } else { &mut pos };
        let base = i as u64 * slot;
        for (j, d) in x.magnitude().to_u32_digits().into_iter().enumerate() {
            let off = base + 32 * j as u64;
            let w = (off / 32) as usize;
            let s = (off % 32) as u32;
            buf[w] |= d << s;
            if s != 0 {
                buf[w + 1] |= d >> (32 - s);
            }
        }
    }
    BigInt::from_biguint(Sign::Plus, BigUint::new(pos)) - BigInt::from_biguint(Sign::Plus, BigUint::new(neg))
}

fn extract(words: &[u32], start: u64, nbits: u64) -> BigUint {
    let n = nbits.div_ceil(32) as usize;
    let mut out = Vec::with_capacity(n);
    let w0 = (start / 32) as usize;
    let s = (start % 32) as u32;
    for k in 0..n {
        let lo = words.get(w0 + k).copied().unwrap_or(0);
        let hi = words.get(w0 + k + 1).copied().unwrap_or(0);
        let word = if s == 0 { lo } else { (lo >> s) | (hi << (32 - s)) };
        out.push(word);
    }
    let rem = (nbits % 32) as u32;
    if rem != 0 {
        if let Some(last) = out.last_mut() {
            *last &= (1u32 << rem) - 1;
        }
    }
    BigUint::new(out)
}

fn kronecker(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let terms = a.len().min(b.len()) as u64;
    let slot = max_bits(a) + max_bits(b) + (64 - terms.leading_zeros() as u64) + 2;
    let prod = pack(a, slot) * pack(b, slot);
    let out_len = (a.len() + b.len() - 1).min(len);
    let negative = prod.sign() == Sign::Minus;
    let words = prod.magnitude().to_u32_digits();
    let full = BigUint::from(1u8) << slot;
    let half = BigUint::from(1u8) << (slot - 1);
    let mut carry = false;
    let mut out = Vec::with_capacity(out_len);
    for k in 0..out_len {
        let mut t = extract(&words, k as u64 * slot, slot);
        if carry {
            t += 1u8;
        }
        let digit = if t >= half {
            carry = true;
            -BigInt::from_biguint(Sign::Plus, &full - t)
        } else {
            carry = false;
            BigInt::from_biguint(Sign::Plus, t)
        };
        out.push(if negative { -digit } else { digit });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big_vec(v: &[i64], shift: u32) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x) << shift).collect()
    }

    proptest! {
        #[test]
        fn packed_product_matches_schoolbook(
            a in proptest::collection::vec(-1_000_000i64..1_000_000, 1..90),
            b in proptest::collection::vec(-1_000_000i64..1_000_000, 1..90),
            shift in 0u32..200,
            cut in 1usize..200,
        ) {
            let a = big_vec(&a, shift);
            let b = big_vec(&b, shift / 3);
            prop_assert_eq!(kronecker(&a, &b, cut), schoolbook(&a, &b, cut));
        }
    }

    #[test]
    fn all_negative_and_zero_runs() {
        let a: Vec<BigInt> = (0..40).map(|i| BigInt::from(if i % 3 == 0 { 0 } else { -i })).collect();
        let b: Vec<BigInt> = (0..50).map(|i| BigInt::from(-(i * i) - 1)).collect();
        assert_eq!(kronecker(&a, &b, 500), schoolbook(&a, &b, 500));
    }
}
