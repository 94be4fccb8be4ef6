//! Injective, length-bounded compression driven by the exact cumulative
//! distribution of a family.
//!
//! A support point `y` with mass `D(y)` owns the half-open dyadic interval
//! `[F(pred(y)), F(pred(y)) + D(y))` of the cumulative distribution.  Points
//! lighter than `2^-|y|` are stored literally; heavier points are stored as
//! the longest common prefix `a` of the binary expansions of the interval
//! endpoints, padded to a fixed, self-delimiting layout:
//!
//! ```text
//! literal:   0 ‖ y                                  (1 + |y| bits)
//! interval:  1 ‖ bin(|a|) ‖ a ‖ 0^(⌈log2 1/D(y)⌉−|a|)
//! ```
//!
//! `bin(|a|)` is a fixed-width field of `c · ⌈log2 n⌉` bits, with `c` chosen
//! per family so the field can hold the support bit length.  Distinct support
//! points own disjoint intervals, so their prefixes differ and the code is
//! injective.  The decoder inverts the cumulative distribution at the
//! midpoint `0.a1` of the prefix interval.
//!
//! The real-valued `log2(1/D)` is not an integer in general; the padding and
//! the length bound use its ceiling throughout.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bits::BitString;
use crate::dist::{DistError, PerturbationFamily};
use crate::num_util::{ceil_log2_inverse, ceil_log2_usize, pow2_ratio};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("string is not in the family's support")]
    NotInSupport,
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("support of size {size} exceeds the exhaustive-check limit 2^{limit_log2}")]
    SupportTooLarge { size: String, limit_log2: u32 },
    #[error("corrupt code word: {0}")]
    Corrupt(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeCase {
    Literal,
    Interval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeWord {
    pub case: CodeCase,
    pub bits: BitString,
}

impl CodeWord {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Fixed layout parameters of a family's code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecParams {
    /// Multiplier `c` in the `c · ⌈log2 n⌉` length-field width.
    pub c: usize,
    /// ⌈log2 n⌉, floored at 1 so the field never vanishes.
    pub log2_n: usize,
    /// Width of the `bin(|a|)` field: `c · log2_n`.
    pub len_field_width: usize,
}

impl CodecParams {
    pub fn for_family(fam: &PerturbationFamily) -> Self {
        let ell = fam.support_len_bits();
        // The prefix can be as long as the support bit length.
        let need = (ceil_log2_usize(ell + 1) as usize).max(1);
        let log2_n = (ceil_log2_usize(fam.n()) as usize).max(1);
        let c = need.div_ceil(log2_n);
        CodecParams { c, log2_n, len_field_width: c * log2_n }
    }
}

/// The dyadic interval `[F(pred(y)), F(pred(y)) + D(y))` owned by `y`.
pub fn interval_bounds(
    fam: &PerturbationFamily,
    y: &BitString,
) -> Result<(BigRational, BigRational), CodecError> {
    let mass = fam.point_mass(y)?;
    if mass.is_zero() {
        return Err(CodecError::NotInSupport);
    }
    let low = match y.pred() {
        Some(prev) => fam.cumulative(&prev)?,
        None => BigRational::zero(),
    };
    let high = &low + &mass;
    Ok((low, high))
}

pub fn compress(fam: &PerturbationFamily, y: &BitString) -> Result<CodeWord, CodecError> {
    let mass = fam.point_mass(y)?;
    if mass.is_zero() {
        return Err(CodecError::NotInSupport);
    }
    let ell = y.len();
    if mass < pow2_ratio(-(ell as i64)) {
        let mut bits = BitString::new();
        bits.push(false);
        bits.extend(y);
        return Ok(CodeWord { case: CodeCase::Literal, bits });
    }

    let (low, high) = interval_bounds(fam, y)?;
    let code_len = ceil_log2_inverse(&mass) as usize;
    let prefix = common_prefix(&low, &high, code_len);
    debug_assert!(prefix.len() <= code_len);

    let params = CodecParams::for_family(fam);
    let mut bits = BitString::new();
    bits.push(true);
    bits.extend(&BitString::from_u64(prefix.len() as u64, params.len_field_width));
    bits.extend(&prefix);
    for _ in prefix.len()..code_len {
        bits.push(false);
    }
    Ok(CodeWord { case: CodeCase::Interval, bits })
}

/// Longest common prefix of the binary expansions of `low` (taken in its
/// terminating form) and `high` (taken in its non-terminating form, so a
/// dyadic upper endpoint reads `0.…0111…`).  These conventions make the
/// prefix describe exactly the numbers interior to `[low, high)`.
fn common_prefix(low: &BigRational, high: &BigRational, max_len: usize) -> BitString {
    debug_assert!(low < high);
    let mut prefix = BitString::new();
    let mut low_scaled = low.clone();
    let mut high_scaled = high.clone();
    for _ in 0..max_len {
        low_scaled = &low_scaled * BigRational::from_integer(2.into());
        high_scaled = &high_scaled * BigRational::from_integer(2.into());
        let low_bit = low_scaled.floor().to_integer().is_odd();
        let high_bit = if high_scaled.is_integer() {
            (high_scaled.to_integer() - num_bigint::BigInt::one()).is_odd()
        } else {
            high_scaled.floor().to_integer().is_odd()
        };
        if low_bit != high_bit {
            break;
        }
        prefix.push(low_bit);
    }
    prefix
}

pub fn decode(fam: &PerturbationFamily, code: &CodeWord) -> Result<BitString, CodecError> {
    if code.bits.is_empty() {
        return Err(CodecError::Corrupt("empty code word"));
    }
    let tagged_interval = code.bits.bit(0);
    match code.case {
        CodeCase::Literal => {
            if tagged_interval {
                return Err(CodecError::Corrupt("literal code must start with 0"));
            }
            let y = code.bits.slice(1, code.bits.len() - 1);
            if fam.point_mass(&y)?.is_zero() {
                return Err(CodecError::NotInSupport);
            }
            Ok(y)
        }
        CodeCase::Interval => {
            if !tagged_interval {
                return Err(CodecError::Corrupt("interval code must start with 1"));
            }
            let params = CodecParams::for_family(fam);
            let width = params.len_field_width;
            if code.bits.len() < 1 + width {
                return Err(CodecError::Corrupt("interval code shorter than its length field"));
            }
            let prefix_len = code.bits.slice(1, width).to_u64() as usize;
            if code.bits.len() < 1 + width + prefix_len {
                return Err(CodecError::Corrupt("interval code shorter than its prefix"));
            }
            let prefix = code.bits.slice(1 + width, prefix_len);
            // Interior point 0.a1: strictly inside the owner's interval.
            let numer = (prefix.to_biguint() << 1u32) + 1u32;
            let mid = BigRational::new(numer.into(), (num_bigint::BigUint::one() << (prefix_len + 1)).into());
            let y = fam.inverse_cdf(&mid);
            // The padding must be zeros of exactly the documented length.
            let expected = compress(fam, &y)?;
            if &expected != code {
                return Err(CodecError::Corrupt("code word does not match any support point"));
            }
            Ok(y)
        }
    }
}

/// Outcome of the exhaustive injectivity check.
#[derive(Debug, Clone)]
pub struct InjectivityReport {
    pub checked: u64,
    pub collision: Option<(BitString, BitString)>,
}

impl InjectivityReport {
    pub fn ok(&self) -> bool {
        self.collision.is_none()
    }
}

/// Compresses every support point and reports the first pair of distinct
/// points with identical code words, if any.  Refuses supports above 2^20.
pub fn verify_injective(fam: &PerturbationFamily) -> Result<InjectivityReport, CodecError> {
    let limit_log2 = 20u32;
    check_support_limit(fam, limit_log2)?;
    let mut seen: std::collections::HashMap<Vec<bool>, BitString> = std::collections::HashMap::new();
    let mut checked = 0u64;
    for y in fam.support_iter()? {
        let code = compress(fam, &y)?;
        checked += 1;
        if let Some(other) = seen.insert(code.bits.bits().to_vec(), y.clone()) {
            return Ok(InjectivityReport { checked, collision: Some((other, y)) });
        }
    }
    Ok(InjectivityReport { checked, collision: None })
}

/// Outcome of the exhaustive length-formula check.
#[derive(Debug, Clone)]
pub struct LengthReport {
    pub checked: u64,
    pub first_violation: Option<BitString>,
    /// Longest code word seen, with its owner.
    pub max_code_len: usize,
    pub longest_point: Option<BitString>,
}

impl LengthReport {
    pub fn ok(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks the case-selection rule, the exact length formula, and the
/// prefix-mass invariant `D(y) ≤ 2^-|a|` for one point's code word.
pub fn code_shape_ok(
    fam: &PerturbationFamily,
    y: &BitString,
    code: &CodeWord,
) -> Result<bool, CodecError> {
    let mass = fam.point_mass(y)?;
    if mass.is_zero() {
        return Err(CodecError::NotInSupport);
    }
    let ell = fam.support_len_bits();
    let literal_threshold = pow2_ratio(-(ell as i64));
    Ok(match code.case {
        CodeCase::Literal => mass < literal_threshold && code.len() == 1 + ell,
        CodeCase::Interval => {
            let params = CodecParams::for_family(fam);
            let code_len = ceil_log2_inverse(&mass) as usize;
            let prefix_len = code.bits.slice(1, params.len_field_width).to_u64() as usize;
            mass >= literal_threshold
                && code.len() == 1 + params.len_field_width + code_len
                && mass <= pow2_ratio(-(prefix_len as i64))
        }
    })
}

/// Asserts, for every support point, the case selection rule and the exact
/// length formulas: `1 + |y|` for literals, `1 + c·⌈log2 n⌉ + ⌈log2 1/D(y)⌉`
/// for intervals, and the prefix-mass invariant `D(y) ≤ 2^-|a|`.
pub fn verify_lengths(fam: &PerturbationFamily) -> Result<LengthReport, CodecError> {
    check_support_limit(fam, 20)?;
    let mut report = LengthReport {
        checked: 0,
        first_violation: None,
        max_code_len: 0,
        longest_point: None,
    };
    for y in fam.support_iter()? {
        let code = compress(fam, &y)?;
        report.checked += 1;
        if code.len() > report.max_code_len {
            report.max_code_len = code.len();
            report.longest_point = Some(y.clone());
        }
        if !code_shape_ok(fam, &y, &code)? && report.first_violation.is_none() {
            report.first_violation = Some(y.clone());
        }
    }
    Ok(report)
}

fn check_support_limit(fam: &PerturbationFamily, limit_log2: u32) -> Result<(), CodecError> {
    let size = fam.support_size();
    if size > (num_bigint::BigUint::one() << limit_log2) {
        return Err(CodecError::SupportTooLarge { size: size.to_string(), limit_log2 });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{CoefficientDistribution, Phi};
    use num_bigint::{BigInt, BigUint};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn uniform_table(n: usize, width: usize, count: u64) -> PerturbationFamily {
        let entries = (0..count)
            .map(|v| (BitString::from_u64(v, width), r(1, count as i64)))
            .collect();
        PerturbationFamily::explicit_table(n, Phi::one(), entries).unwrap()
    }

    #[test]
    fn light_points_go_to_the_literal_branch() {
        let entries = vec![(bs("0101"), r(1, 32)), (bs("0000"), r(31, 32))];
        let fam = PerturbationFamily::explicit_table(4, Phi::one(), entries).unwrap();
        let code = compress(&fam, &bs("0101")).unwrap();
        assert_eq!(code.case, CodeCase::Literal);
        assert_eq!(code.bits, bs("00101"));
        assert_eq!(code.len(), 5);
        assert_eq!(decode(&fam, &code).unwrap(), bs("0101"));
    }

    #[test]
    fn single_point_family_has_empty_prefix() {
        let fam = PerturbationFamily::explicit_table(
            4,
            Phi::one(),
            vec![(bs("1010"), BigRational::one())],
        )
        .unwrap();
        let params = CodecParams::for_family(&fam);
        let code = compress(&fam, &bs("1010")).unwrap();
        assert_eq!(code.case, CodeCase::Interval);
        // log2(1/1) = 0, so the code is the tag plus the (zero) length field.
        assert_eq!(code.len(), 1 + params.len_field_width);
        assert_eq!(decode(&fam, &code).unwrap(), bs("1010"));
    }

    #[test]
    fn boundary_mass_goes_to_the_interval_branch() {
        // D(y) = 2^-|y| exactly: the literal rule is strict.
        let entries = vec![(bs("0"), r(1, 2)), (bs("1"), r(1, 2))];
        let fam = PerturbationFamily::explicit_table(1, Phi::pow2_neg(1), entries).unwrap();
        let zero = compress(&fam, &bs("0")).unwrap();
        let one = compress(&fam, &bs("1")).unwrap();
        assert_eq!(zero.case, CodeCase::Interval);
        assert_eq!(one.case, CodeCase::Interval);
        // Intervals [0, 1/2) and [1/2, 1) yield prefixes "0" and "1".
        let params = CodecParams::for_family(&fam);
        let w = params.len_field_width;
        assert_eq!(zero.bits.slice(1 + w, 1), bs("0"));
        assert_eq!(one.bits.slice(1 + w, 1), bs("1"));
    }

    #[test]
    fn uniform_four_strings_of_length_eight() {
        let fam = uniform_table(8, 8, 4);
        let params = CodecParams::for_family(&fam);
        // Exact rational enumeration of the four prefix intervals gives
        // prefixes 00, 01, 10, 11.
        let mut seen = Vec::new();
        for y in fam.support_iter().unwrap() {
            let code = compress(&fam, &y).unwrap();
            assert_eq!(code.case, CodeCase::Interval);
            let alen = code.bits.slice(1, params.len_field_width).to_u64() as usize;
            assert!(alen <= 2);
            assert!(code.len() <= 1 + params.len_field_width + 2);
            seen.push(code.bits.slice(1 + params.len_field_width, alen).to_string());
        }
        assert_eq!(seen, vec!["00", "01", "10", "11"]);
    }

    #[test]
    fn uniform_power_of_two_interval_lengths() {
        // Uniform over 2^k strings: every interval code has length
        // 1 + c·⌈log2 n⌉ + k.
        for k in [1u32, 3, 5] {
            let fam = uniform_table(8, 8, 1 << k);
            let params = CodecParams::for_family(&fam);
            for y in fam.support_iter().unwrap() {
                let code = compress(&fam, &y).unwrap();
                assert_eq!(code.case, CodeCase::Interval);
                assert_eq!(code.len(), 1 + params.len_field_width + k as usize, "at {y}");
            }
        }
    }

    #[test]
    fn injectivity_exhaustive_on_uniform_256() {
        let fam = uniform_table(8, 8, 256);
        let report = verify_injective(&fam).unwrap();
        assert!(report.ok());
        assert_eq!(report.checked, 256);
    }

    #[test]
    fn injectivity_trivial_on_single_point() {
        let fam = PerturbationFamily::explicit_table(
            2,
            Phi::one(),
            vec![(bs("11"), BigRational::one())],
        )
        .unwrap();
        let report = verify_injective(&fam).unwrap();
        assert!(report.ok());
        assert_eq!(report.checked, 1);
    }

    #[test]
    fn lengths_hold_on_mixed_table() {
        let entries = vec![
            (bs("000"), r(1, 3)),
            (bs("011"), r(1, 12)),
            (bs("100"), r(13, 24)),
            (bs("111"), r(1, 24)),
        ];
        let fam = PerturbationFamily::explicit_table(3, Phi::one(), entries).unwrap();
        let report = verify_lengths(&fam).unwrap();
        assert!(report.ok(), "violation at {:?}", report.first_violation);
    }

    #[test]
    fn intervals_tile_the_unit_interval() {
        let fam = product_family();
        let mut expected_low = BigRational::zero();
        for y in fam.support_iter().unwrap() {
            let (low, high) = interval_bounds(&fam, &y).unwrap();
            assert_eq!(low, expected_low, "interval gap before {y}");
            assert!(high > low);
            expected_low = high;
        }
        assert_eq!(expected_low, BigRational::one());
    }

    fn product_family() -> PerturbationFamily {
        let coeffs = vec![
            CoefficientDistribution::uniform_window(3, 1, 2).unwrap(),
            CoefficientDistribution::table(3, vec![(0, r(1, 3)), (5, r(2, 3))]).unwrap(),
        ];
        PerturbationFamily::coefficient_product(2, Phi::one(), 3, coeffs).unwrap()
    }

    #[test]
    fn round_trip_on_products_and_graph_flips() {
        let mut fams = vec![product_family()];
        fams.push(
            PerturbationFamily::graph_flip(
                4,
                Phi::from_parts(BigUint::from(729u32), 12).unwrap(),
                bs("110100"),
                1u64 << 62,
            )
            .unwrap(),
        );
        for fam in &fams {
            for y in fam.support_iter().unwrap() {
                let code = compress(fam, &y).unwrap();
                assert_eq!(decode(fam, &code).unwrap(), y, "round trip at {y}");
            }
            assert!(verify_injective(fam).unwrap().ok());
            assert!(verify_lengths(fam).unwrap().ok());
        }
    }

    #[test]
    fn compress_rejects_points_off_support() {
        let fam = product_family();
        assert_eq!(compress(&fam, &bs("000001")), Err(CodecError::NotInSupport));
    }

    #[test]
    fn decode_rejects_corrupt_words() {
        let fam = uniform_table(4, 4, 4);
        let mut code = compress(&fam, &bs("0001")).unwrap();
        // Flip the tag bit.
        let mut bits: Vec<bool> = code.bits.bits().to_vec();
        bits[0] = !bits[0];
        code.bits = BitString::from_bits(bits);
        assert!(decode(&fam, &code).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_tables_round_trip(weights in proptest::collection::vec(1u32..32, 2..10)) {
            let width = 5usize;
            let total: u32 = weights.iter().sum();
            let entries: Vec<(BitString, BigRational)> = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    (BitString::from_u64((i * 3) as u64, width), r(w as i64, total as i64))
                })
                .collect();
            let fam = PerturbationFamily::explicit_table(width, Phi::one(), entries).unwrap();
            prop_assert!(verify_injective(&fam).unwrap().ok());
            prop_assert!(verify_lengths(&fam).unwrap().ok());
            for y in fam.support_iter().unwrap() {
                let code = compress(&fam, &y).unwrap();
                prop_assert_eq!(decode(&fam, &code).unwrap(), y);
            }
        }
    }
}
