//! Small exact-arithmetic helpers shared across modules.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Smallest `e` with `2^e >= x`; 0 for `x <= 1`.
pub fn ceil_log2(x: &BigUint) -> u64 {
    if x <= &BigUint::one() {
        return 0;
    }
    let m = x - 1u32;
    m.bits()
}

pub fn ceil_log2_usize(x: usize) -> u32 {
    ceil_log2(&BigUint::from(x)) as u32
}

/// `2^e` as a big rational.
pub fn pow2_ratio(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::from(BigUint::one() << e as usize))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(BigUint::one() << (-e) as usize))
    }
}

/// Smallest `L >= 0` with `x >= 2^-L`, i.e. `ceil(log2(1/x))`, for `x` in (0, 1].
pub fn ceil_log2_inverse(x: &BigRational) -> u64 {
    assert!(x.is_positive() && x <= &BigRational::one());
    // 2^L * x >= 1  <=>  L >= log2(1/x)
    let mut lo = 0u64;
    // An upper bound: 1/x <= denom/numer <= denom, so L <= bits(denom).
    let mut hi = x.denom().magnitude().bits() + 1;
    let holds = |l: u64| (x * pow2_ratio(l as i64)) >= BigRational::one();
    if holds(lo) {
        return 0;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `ceil` of a nonnegative rational as a big unsigned integer.
pub fn ceil_to_biguint(x: &BigRational) -> BigUint {
    assert!(!x.is_negative());
    let ceiled = x.ceil();
    ceiled.to_integer().magnitude().clone()
}

/// `x^k` for rational `x` and small integer `k`.
pub fn ratio_pow(x: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// `log2(x)` of a positive rational, in double precision.
pub fn ratio_log2_f64(x: &BigRational) -> f64 {
    assert!(x.is_positive());
    log2_biguint(x.numer().magnitude()) - log2_biguint(x.denom().magnitude())
}

fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().log2();
    }
    // Keep the top 53 bits as a mantissa, account for the shift.
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

/// Upper bound on `x^(1/n)` in double precision, for `x` in (0, 1].
///
/// The exact root is irrational in general; comparisons that have to be exact
/// are made via n-th powers instead.  This value is only used to render bound
/// columns, nudged up a few ulps so it never falls below the true root.
pub fn nth_root_upper_f64(x: &BigRational, n: u32) -> f64 {
    assert!(x.is_positive());
    let root = (ratio_log2_f64(x) / n as f64).exp2();
    let mut up = root * (1.0 + 8.0 * f64::EPSILON);
    if up <= root {
        up = f64::from_bits(root.to_bits() + 4);
    }
    up.min(1.0f64.max(root))
}

/// Ratio `a/b` in double precision, saturating through big integers.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Deterministic elementary-step counter.
///
/// One unit is one DP cell update, one list scan item, or one coefficient
/// comparison, as fixed by each algorithm's documentation.  Counts are exact;
/// the accumulator is wide enough that it cannot saturate within any feasible
/// run, and it converts losslessly to a big integer for records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepCounter {
    count: u128,
}

impl StepCounter {
    pub fn new() -> Self {
        StepCounter { count: 0 }
    }

    #[inline]
    pub fn bump(&mut self, units: u64) {
        self.count += units as u128;
    }

    pub fn absorb(&mut self, other: &StepCounter) {
        self.count += other.count;
    }

    pub fn count(&self) -> u128 {
        self.count
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from(self.count)
    }
}

/// Parses "p/q" or a bare integer into an exact nonnegative rational.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigUint = num.trim().parse().ok()?;
        let d: BigUint = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(BigInt::from(n), BigInt::from(d)))
    } else {
        let n: BigUint = s.parse().ok()?;
        Some(BigRational::from_integer(BigInt::from(n)))
    }
}

/// Renders a rational as "p/q" (or "p" when integral).
pub fn ratio_to_string(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(&BigUint::from(1u32)), 0);
        assert_eq!(ceil_log2(&BigUint::from(2u32)), 1);
        assert_eq!(ceil_log2(&BigUint::from(3u32)), 2);
        assert_eq!(ceil_log2(&BigUint::from(1024u32)), 10);
        assert_eq!(ceil_log2(&BigUint::from(1025u32)), 11);
    }

    #[test]
    fn ceil_log2_inverse_values() {
        assert_eq!(ceil_log2_inverse(&BigRational::one()), 0);
        assert_eq!(ceil_log2_inverse(&r(1, 2)), 1);
        assert_eq!(ceil_log2_inverse(&r(1, 3)), 2);
        assert_eq!(ceil_log2_inverse(&r(1, 4)), 2);
        assert_eq!(ceil_log2_inverse(&r(3, 8)), 2);
        assert_eq!(ceil_log2_inverse(&r(1, 1024)), 10);
    }

    #[test]
    fn nth_root_upper_is_an_upper_bound() {
        // (upper bound)^n >= x, checked through exact squaring of the f64.
        for (num, den, n) in [(1i64, 16i64, 4u32), (3, 1024, 5), (1, 2, 1), (1, 1 << 20, 10)] {
            let x = r(num, den);
            let up = nth_root_upper_f64(&x, n);
            let up_ratio = BigRational::from_f64(up).unwrap();
            assert!(ratio_pow(&up_ratio, n) >= x, "{num}/{den} root {n}");
        }
    }

    #[test]
    fn parse_and_render_ratios() {
        assert_eq!(parse_ratio("3/4"), Some(r(3, 4)));
        assert_eq!(parse_ratio("7"), Some(r(7, 1)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(ratio_to_string(&r(3, 4)), "3/4");
        assert_eq!(ratio_to_string(&r(8, 4)), "2");
    }
}
