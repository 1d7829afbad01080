//! Small elementary number theory helpers on machine integers.

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

pub fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn is_square(n: i64) -> bool {
    n >= 0 && isqrt(n).pow(2) == n
}

/// Positive divisors of `n > 0` in increasing order.
pub fn divisors(n: i64) -> Vec<i64> {
    assert!(n > 0, "divisors of non-positive {n}");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut k = 1;
    while k * k <= n {
        if n % k == 0 {
            small.push(k);
            if k * k != n {
                large.push(n / k);
            }
        }
        k += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn is_squarefree(n: i64) -> bool {
    let n = n.abs();
    if n == 0 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Fundamental discriminant test (either sign; 1 is not counted as fundamental).
pub fn is_fundamental(disc: i64) -> bool {
    if disc == 0 || disc == 1 {
        return false;
    }
    match disc.rem_euclid(4) {
        1 => is_squarefree(disc),
        0 => {
            let m = disc / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
        }
        _ => false,
    }
}

/// Kronecker symbol (a/n), the completely multiplicative extension of Legendre's symbol.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut a = a as i128;
    let mut n = n as i128;
    let mut k = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -1;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            k = -k;
        }
        n >>= v;
    }
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                k = -k;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        a %= n;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Whether `n` is congruent to a square modulo `m`.
pub fn is_square_mod(n: i64, m: i64) -> bool {
    let r = n.rem_euclid(m);
    (0..m).any(|x| (x * x).rem_euclid(m) == r)
}

/// s(D, p) from the doubling convention: 1 if p | D, else 0.
pub fn s_exp(big_d: i64, p: i64) -> u32 {
    u32::from(big_d.rem_euclid(p) == 0)
}

/// σ_k(n) for 1 <= n < len, exactly; index 0 is left at zero.
pub fn sigma_table(k: u32, len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for d in 1..len {
        let dk = BigInt::from(d).pow(k);
        let mut m = d;
        while m < len {
            out[m] += &dk;
            m += d;
        }
    }
    out
}

pub fn sigma1(n: i64) -> i64 {
    divisors(n).iter().sum()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_euler(a: i64, p: i64) -> i32 {
        let a = a.rem_euclid(p);
        if a == 0 {
            return 0;
        }
        let mut r = 1i64;
        let mut b = a;
        let mut e = (p - 1) / 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        if r == 1 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_matches_euler_on_odd_primes() {
        for p in [3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            for a in -60..60 {
                assert_eq!(kronecker(a, p), legendre_euler(a, p), "({a}/{p})");
            }
        }
    }

    #[test]
    fn kronecker_special_values() {
        assert_eq!(kronecker(13, 1), 1);
        assert_eq!(kronecker(8, 3), -1);
        assert_eq!(kronecker(17, 2), 1);
        assert_eq!(kronecker(13, 2), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-1, -1), -1);
        assert_eq!(kronecker(12, 2), 0);
    }

    #[test]
    fn kronecker_is_multiplicative_in_n() {
        for a in [-23, -8, -3, 5, 8, 12, 13, 17, 21] {
            for m in 1..30 {
                for n in 1..30 {
                    assert_eq!(kronecker(a, m * n), kronecker(a, m) * kronecker(a, n));
                }
            }
        }
    }

    #[test]
    fn fundamental_discriminants() {
        let pos: Vec<i64> = (2..30).filter(|&d| is_fundamental(d)).collect();
        assert_eq!(pos, vec![5, 8, 12, 13, 17, 21, 24, 28, 29]);
        let neg: Vec<i64> = (1..30).filter(|&d| is_fundamental(-d)).collect();
        assert_eq!(neg, vec![3, 4, 7, 8, 11, 15, 19, 20, 23, 24]);
    }

    #[test]
    fn divisor_helpers() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(sigma1(12), 28);
        let s3 = sigma_table(3, 6);
        assert_eq!(s3[4], BigInt::from(73));
        assert_eq!(binomial(10, 3), BigInt::from(120));
    }
}
