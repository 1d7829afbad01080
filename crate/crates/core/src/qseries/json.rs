use super::ExactSeries;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Wire {
    scale: u32,
    valuation: i64,
    trunc: i64,
    coeffs: Vec<[String; 2]>,
}

impl Serialize for ExactSeries {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let coeffs = (0..self.num.len())
            .map(|i| {
                let c = BigRational::new(self.num[i].clone(), self.den.clone());
                [c.numer().to_string(), c.denom().to_string()]
            })
            .collect();
        Wire { scale: self.scale, valuation: self.start, trunc: self.trunc, coeffs }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        if w.scale == 0 {
            return Err(D::Error::custom("scale must be positive"));
        }
        let mut coeffs = Vec::with_capacity(w.coeffs.len());
        for [n, m] in &w.coeffs {
            let n: BigInt = n.parse().map_err(D::Error::custom)?;
            let m: BigInt = m.parse().map_err(D::Error::custom)?;
            if m == BigInt::from(0) {
                return Err(D::Error::custom("zero denominator"));
            }
            coeffs.push(BigRational::new(n, m));
        }
        Ok(ExactSeries::from_rationals(w.scale, w.valuation, &coeffs, w.trunc))
    }
}
