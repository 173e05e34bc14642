//! Exact rational helpers for the closed-form equilibrium path.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// The rational with the smallest denominator that rounds to exactly `x`,
/// found from the continued-fraction convergents of `x`.
///
/// `0.75` gives `3/4` and `4.0 / 3.0` gives `4/3`. Returns `None` for
/// non-finite input.
pub fn simplest_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let exact = BigRational::from_float(x)?;
    let negative = x < 0.0;
    let target = if negative { -exact.clone() } else { exact.clone() };

    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rest = target;
    loop {
        let a = rest.floor().to_integer();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let candidate = BigRational::new(h.clone(), k.clone());
        let candidate = if negative { -candidate } else { candidate };
        if candidate.to_f64() == Some(x) {
            return Some(candidate);
        }
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return Some(exact);
        }
        rest = frac.recip();
    }
}

pub fn int(value: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}
