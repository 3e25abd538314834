//! Exact rational helpers and certified bounds on a few transcendental constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational used for every cost, reward, payment and utility.
pub type Rational = BigRational;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn from_usize(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n`-th harmonic number, exactly.
pub fn harmonic(n: usize) -> Rational {
    let mut h = Rational::zero();
    for i in 1..=n {
        h += Rational::new(BigInt::one(), BigInt::from(i));
    }
    h
}

/// Closest `f64` to `r`; used only for reporting and for logarithmic bounds.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Lower and upper rational bounds on `exp(-x)` for `0 <= x <= 20`.
///
/// Partial sums of the alternating series bracket the limit once the terms
/// start decreasing, so two consecutive sums taken far enough out give a
/// certified interval.
pub fn exp_neg_bounds(x: &Rational) -> (Rational, Rational) {
    assert!(!x.is_negative(), "exp_neg_bounds expects x >= 0");
    let mut term = Rational::one();
    let mut sum = Rational::one();
    let mut k = 1u32;
    let last = loop {
        term = -term * x / Rational::from_integer(BigInt::from(k));
        let next = &sum + &term;
        if k > 60 && term.abs() < rat(1, 1_000_000_000_000) {
            break next;
        }
        sum = next;
        k += 1;
    };
    if last < sum {
        (last, sum)
    } else {
        (sum, last)
    }
}

/// Rational strictly above `1 - 1/e`.
pub fn one_minus_inv_e_upper() -> Rational {
    let (lo, _) = exp_neg_bounds(&Rational::one());
    Rational::one() - lo
}

/// Rational strictly below `1 - 1/e`.
pub fn one_minus_inv_e_lower() -> Rational {
    let (_, hi) = exp_neg_bounds(&Rational::one());
    Rational::one() - hi
}

/// `x^k` for a non-negative integer exponent.
pub fn pow(x: &Rational, k: usize) -> Rational {
    let mut out = Rational::one();
    for _ in 0..k {
        out *= x;
    }
    out
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Binomial coefficient as a big integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_bounds_bracket_float_value() {
        for (n, d) in [(0, 1), (1, 8), (1, 1), (2, 1), (5, 1), (13, 2)] {
            let x = rat(n, d);
            let (lo, hi) = exp_neg_bounds(&x);
            let f = libm::exp(-to_f64(&x));
            assert!(lo <= hi);
            assert!(to_f64(&lo) <= f * (1.0 + 1e-12));
            assert!(to_f64(&hi) >= f * (1.0 - 1e-12));
            assert!(&hi - &lo < rat(1, 1_000_000_000));
        }
    }

    #[test]
    fn e_constant_bounds() {
        let lo = one_minus_inv_e_lower();
        let hi = one_minus_inv_e_upper();
        assert!(lo < hi);
        assert!(lo > rat(632, 1000) && hi < rat(633, 1000));
    }

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(20, 10), BigInt::from(184_756));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial(7, 0), BigInt::one());
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0), Rational::zero());
        assert_eq!(harmonic(4), rat(25, 12));
    }
}
