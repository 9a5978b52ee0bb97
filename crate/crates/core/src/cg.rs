//! Clebsch-Gordan coefficients in the Condon-Shortley convention.
//!
//! Computed by the closed-form Racah sum with exact big-integer/rational
//! intermediates; the only floating-point step is the final square root.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::half::Half;
use crate::scalar::{fr, Real};

/// ⟨J,M | j1,m1; j2,m2⟩.
///
/// Returns 0 when M ≠ m1+m2 or the triangle inequality fails. Invalid
/// quantum numbers (|m| > j, j+m not integral, j < 0) are an error.
pub fn clebsch_gordan<T: Real>(
    j1: Half,
    m1: Half,
    j2: Half,
    m2: Half,
    j: Half,
    m: Half,
) -> Result<T> {
    validate_jm(j1, m1)?;
    validate_jm(j2, m2)?;
    if j.doubled() < 0 {
        return Err(Error::argument(format!("J = {j} must be ≥ 0")));
    }
    if (j + m).doubled() % 2 != 0 {
        return Err(Error::argument(format!(
            "J = {j}, M = {m} differ by a non-integer"
        )));
    }

    if m1 + m2 != m || m.doubled().abs() > j.doubled() {
        return Ok(T::zero());
    }
    if j < (j1 - j2).abs() || j > j1 + j2 {
        return Ok(T::zero());
    }
    // Couplings need j1 + j2 + J integral; otherwise the coefficient vanishes.
    let Some(t_sum) = j1.try_int_sum(j2 + j) else {
        return Ok(T::zero());
    };

    let t1 = int_of(j1 + j2 - j);
    let t2 = int_of(j1 - j2 + j);
    let t3 = int_of(j2 + j - j1);

    // Radicand: (2J+1) Δ(j1 j2 J) (J+M)!(J-M)!(j1-m1)!(j1+m1)!(j2-m2)!(j2+m2)!
    let mut radicand = BigRational::from_integer(BigInt::from(j.doubled() + 1));
    radicand *= ratio(fact(t1) * fact(t2) * fact(t3), fact(t_sum + 1));
    for arg in [
        int_of(j + m),
        int_of(j - m),
        int_of(j1 - m1),
        int_of(j1 + m1),
        int_of(j2 - m2),
        int_of(j2 + m2),
    ] {
        radicand *= BigRational::from_integer(fact(arg));
    }

    // Alternating Racah sum over all k with non-negative factorial arguments.
    let a1 = int_of(j1 + j2 - j); // j1+j2-J-k
    let a2 = int_of(j1 - m1); // j1-m1-k
    let a3 = int_of(j2 + m2); // j2+m2-k
    let b1 = int_of(j - j2 + m1); // J-j2+m1+k
    let b2 = int_of(j - j1 - m2); // J-j1-m2+k
    let k_min = 0.max(-b1).max(-b2);
    let k_max = a1.min(a2).min(a3);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom =
            fact(k) * fact(a1 - k) * fact(a2 - k) * fact(a3 - k) * fact(b1 + k) * fact(b2 + k);
        let term = ratio(BigInt::from(1), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let sign = if sum.is_negative() { -1.0 } else { 1.0 };
    let magnitude_sq = radicand * (&sum * &sum);
    let value = sign
        * magnitude_sq
            .to_f64()
            .ok_or_else(|| Error::argument("Clebsch-Gordan radicand overflow"))?
            .sqrt();
    Ok(fr(value))
}

fn validate_jm(j: Half, m: Half) -> Result<()> {
    if j.doubled() < 0 {
        return Err(Error::argument(format!("j = {j} must be ≥ 0")));
    }
    if m.doubled().abs() > j.doubled() {
        return Err(Error::argument(format!("|m| = |{m}| exceeds j = {j}")));
    }
    if (j + m).doubled() % 2 != 0 {
        return Err(Error::argument(format!(
            "j = {j}, m = {m} differ by a non-integer"
        )));
    }
    Ok(())
}

fn int_of(h: Half) -> i64 {
    debug_assert!(h.is_integer(), "expected integral combination, got {h}");
    h.doubled() / 2
}

fn fact(n: i64) -> BigInt {
    debug_assert!(n >= 0, "factorial of negative {n}");
    let mut acc = BigInt::from(1);
    for i in 2..=n {
        acc *= i;
    }
    acc
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}
