//! Bit-true two's-complement fixed point.
//!
//! Each operation forms the exact wide result in `i128` and then requantizes
//! it into the target format with round-to-nearest-even, saturating (or
//! wrapping, if configured) on overflow. Results are therefore identical on
//! every platform.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::ScalarProfile;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("invalid fixed-point format `{0}`: expected Q<int>.<frac>, e.g. Q3.12")]
    Syntax(String),
    #[error("total_bits must be in 1..=64, got {0}")]
    TotalBits(u32),
    #[error("frac_bits ({frac}) must not exceed total_bits - 1 ({max})")]
    FracBits { frac: u32, max: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowMode {
    #[default]
    Saturate,
    Wrap,
}

/// A signed Q-format: one sign bit, `total_bits - 1 - frac_bits` integer
/// bits and `frac_bits` fraction bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPointFormat {
    total_bits: u32,
    frac_bits: u32,
    overflow: OverflowMode,
}

/// A raw fixed-point word. Its meaning depends on the format it was produced
/// under; the value is `raw * 2^-frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fixed {
    pub raw: i64,
}

/// A fixed-point result together with whether it had to be clamped (or
/// wrapped) to fit the format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantized {
    pub value: Fixed,
    pub saturated: bool,
}

impl FixedPointFormat {
    pub fn new(total_bits: u32, frac_bits: u32) -> Result<Self, FormatError> {
        if !(1..=64).contains(&total_bits) {
            return Err(FormatError::TotalBits(total_bits));
        }
        if frac_bits > total_bits - 1 {
            return Err(FormatError::FracBits {
                frac: frac_bits,
                max: total_bits - 1,
            });
        }
        Ok(Self {
            total_bits,
            frac_bits,
            overflow: OverflowMode::Saturate,
        })
    }

    /// `Q<int_bits>.<frac_bits>`: total width is `1 + int_bits + frac_bits`.
    pub fn q(int_bits: u32, frac_bits: u32) -> Result<Self, FormatError> {
        Self::new(1 + int_bits + frac_bits, frac_bits)
    }

    pub fn with_overflow(mut self, overflow: OverflowMode) -> Self {
        self.overflow = overflow;
        self
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn int_bits(&self) -> u32 {
        self.total_bits - 1 - self.frac_bits
    }

    pub fn overflow(&self) -> OverflowMode {
        self.overflow
    }

    pub fn raw_max(&self) -> i128 {
        (1i128 << (self.total_bits - 1)) - 1
    }

    pub fn raw_min(&self) -> i128 {
        -(1i128 << (self.total_bits - 1))
    }

    /// Weight of one least-significant bit, `2^-frac_bits`.
    pub fn ulp(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn max_value(&self) -> f64 {
        self.to_f64(Fixed {
            raw: self.raw_max() as i64,
        })
    }

    pub fn min_value(&self) -> f64 {
        self.to_f64(Fixed {
            raw: self.raw_min() as i64,
        })
    }

    pub fn to_f64(&self, v: Fixed) -> f64 {
        v.raw as f64 * self.ulp()
    }

    /// Nearest representable value to `x`, ties to even. Out-of-range inputs
    /// saturate (or wrap). NaN maps to zero and is flagged.
    pub fn quantize(&self, x: f64) -> Quantized {
        if x.is_nan() {
            return Quantized {
                value: Fixed { raw: 0 },
                saturated: true,
            };
        }
        let scaled = (x * (self.frac_bits as f64).exp2()).round_ties_even();
        // 2^(total_bits-1) is exactly representable in binary64; raw_max is
        // not for wide formats, so compare against the power of two.
        let limit = ((self.total_bits - 1) as f64).exp2();
        if scaled >= limit || scaled < -limit {
            if self.overflow == OverflowMode::Wrap && scaled.is_finite() && scaled.abs() < 1e38 {
                return self.fit(scaled as i128);
            }
            let raw = if scaled > 0.0 {
                self.raw_max()
            } else {
                self.raw_min()
            };
            return Quantized {
                value: Fixed { raw: raw as i64 },
                saturated: true,
            };
        }
        Quantized {
            value: Fixed { raw: scaled as i64 },
            saturated: false,
        }
    }

    pub fn add(&self, a: Fixed, b: Fixed) -> Quantized {
        self.fit(a.raw as i128 + b.raw as i128)
    }

    pub fn sub(&self, a: Fixed, b: Fixed) -> Quantized {
        self.fit(a.raw as i128 - b.raw as i128)
    }

    pub fn mul(&self, a: Fixed, b: Fixed) -> Quantized {
        let wide = a.raw as i128 * b.raw as i128;
        self.fit(shr_round_even(wide, self.frac_bits))
    }

    pub fn square(&self, a: Fixed) -> Quantized {
        self.mul(a, a)
    }

    pub fn double(&self, a: Fixed) -> Quantized {
        self.fit((a.raw as i128) << 1)
    }

    pub fn halve(&self, a: Fixed) -> Quantized {
        self.fit(shr_round_even(a.raw as i128, 1))
    }

    /// Bring an exact raw value at this format's scale into range.
    fn fit(&self, raw: i128) -> Quantized {
        if raw >= self.raw_min() && raw <= self.raw_max() {
            return Quantized {
                value: Fixed { raw: raw as i64 },
                saturated: false,
            };
        }
        let raw = match self.overflow {
            OverflowMode::Saturate => raw.clamp(self.raw_min(), self.raw_max()),
            OverflowMode::Wrap => {
                let shift = 128 - self.total_bits;
                (raw << shift) >> shift
            }
        };
        Quantized {
            value: Fixed { raw: raw as i64 },
            saturated: true,
        }
    }
}

/// `x / 2^shift`, rounded to nearest with ties to even.
fn shr_round_even(x: i128, shift: u32) -> i128 {
    if shift == 0 {
        return x;
    }
    let floor = x >> shift;
    let rem = x - (floor << shift);
    let half = 1i128 << (shift - 1);
    if rem > half || (rem == half && floor & 1 == 1) {
        floor + 1
    } else {
        floor
    }
}

impl fmt::Display for FixedPointFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}.{}", self.int_bits(), self.frac_bits)
    }
}

impl FromStr for FixedPointFormat {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || FormatError::Syntax(s.to_string());
        let body = s
            .strip_prefix('Q')
            .or_else(|| s.strip_prefix('q'))
            .ok_or_else(syntax)?;
        let (int, frac) = body.split_once('.').ok_or_else(syntax)?;
        let int: u32 = int.parse().map_err(|_| syntax())?;
        let frac: u32 = frac.parse().map_err(|_| syntax())?;
        let total = int
            .checked_add(frac)
            .and_then(|v| v.checked_add(1))
            .ok_or_else(syntax)?;
        Self::new(total, frac)
    }
}

/// Fixed-point profile: values are raw words in one format; every operation
/// that overflowed bumps the saturation counter.
#[derive(Debug)]
pub struct FixedProfile {
    format: FixedPointFormat,
    saturations: Cell<u64>,
}

impl FixedProfile {
    pub fn new(format: FixedPointFormat) -> Self {
        Self {
            format,
            saturations: Cell::new(0),
        }
    }

    pub fn format(&self) -> FixedPointFormat {
        self.format
    }

    pub fn saturation_count(&self) -> u64 {
        self.saturations.get()
    }

    pub fn reset_saturations(&self) {
        self.saturations.set(0);
    }

    /// Quantize an input value, counting a saturation if it was out of range.
    pub fn quantize(&self, x: f64) -> Fixed {
        self.track(self.format.quantize(x))
    }

    pub fn to_f64(&self, v: Fixed) -> f64 {
        self.format.to_f64(v)
    }

    fn track(&self, q: Quantized) -> Fixed {
        if q.saturated {
            self.saturations.set(self.saturations.get() + 1);
        }
        q.value
    }
}

impl ScalarProfile for FixedProfile {
    type Value = Fixed;

    fn zero(&self) -> Fixed {
        Fixed { raw: 0 }
    }
    fn one(&self) -> Fixed {
        self.quantize(1.0)
    }
    fn add(&self, a: &Fixed, b: &Fixed) -> Fixed {
        self.track(self.format.add(*a, *b))
    }
    fn sub(&self, a: &Fixed, b: &Fixed) -> Fixed {
        self.track(self.format.sub(*a, *b))
    }
    fn mul(&self, a: &Fixed, b: &Fixed) -> Fixed {
        self.track(self.format.mul(*a, *b))
    }
    fn square(&self, a: &Fixed) -> Fixed {
        self.track(self.format.square(*a))
    }
    fn double(&self, a: &Fixed) -> Fixed {
        self.track(self.format.double(*a))
    }
    fn halve(&self, a: &Fixed) -> Fixed {
        self.track(self.format.halve(*a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(total: u32, frac: u32) -> FixedPointFormat {
        FixedPointFormat::new(total, frac).unwrap()
    }

    #[test]
    fn quantize_exact_value() {
        let r = q(16, 8).quantize(0.75);
        assert_eq!(r.value.raw, 192);
        assert!(!r.saturated);
        assert_eq!(q(16, 8).to_f64(r.value), 0.75);
    }

    #[test]
    fn quantize_zero() {
        for (t, f) in [(16, 8), (8, 4), (24, 20), (1, 0), (64, 63)] {
            let r = q(t, f).quantize(0.0);
            assert_eq!(r.value.raw, 0);
            assert!(!r.saturated);
        }
    }

    #[test]
    fn quantize_saturates_high_and_low() {
        let fmt = q(16, 8);
        // 10.0 lies inside [-128, 127.99609375] and is exact.
        let inside = fmt.quantize(10.0);
        assert!(!inside.saturated);
        assert_eq!(fmt.to_f64(inside.value), 10.0);
        let hi = fmt.quantize(1000.0);
        assert!(hi.saturated);
        assert_eq!(fmt.to_f64(hi.value), 127.99609375);
        let lo = fmt.quantize(-1000.0);
        assert!(lo.saturated);
        assert_eq!(fmt.to_f64(lo.value), -128.0);
    }

    #[test]
    fn quantize_saturates_in_narrow_format() {
        // Q{16,8} holds 10.0; a Q{8,4} word tops out at 7.9375.
        let fmt = q(8, 4);
        let r = fmt.quantize(10.0);
        assert!(r.saturated);
        assert_eq!(fmt.to_f64(r.value), 7.9375);
        assert_eq!(fmt.max_value(), 7.9375);
        assert_eq!(fmt.min_value(), -8.0);
    }

    #[test]
    fn quantize_ties_to_even() {
        let fmt = q(8, 0);
        assert_eq!(fmt.quantize(2.5).value.raw, 2);
        assert_eq!(fmt.quantize(3.5).value.raw, 4);
        assert_eq!(fmt.quantize(-2.5).value.raw, -2);
        assert_eq!(fmt.quantize(-3.5).value.raw, -4);
    }

    #[test]
    fn square_exact() {
        let fmt = q(16, 8);
        let a = fmt.quantize(1.5).value;
        let r = fmt.square(a);
        assert_eq!(fmt.to_f64(r.value), 2.25);
        assert!(!r.saturated);
    }

    #[test]
    fn square_in_q3_4_fits() {
        // Wide-multiply-then-requantize by hand: 2.5 = 40/16, 40*40 = 1600 at
        // 2^-8 scale, >> 4 = 100 at 2^-4 scale = 6.25, inside [-8, 7.9375].
        let fmt = q(8, 4);
        let a = fmt.quantize(2.5).value;
        assert_eq!(a.raw, 40);
        let wide = a.raw as i128 * a.raw as i128;
        assert_eq!(wide, 1600);
        let r = fmt.square(a);
        assert_eq!(r.value.raw, 100);
        assert_eq!(fmt.to_f64(r.value), 6.25);
        assert!(!r.saturated);
    }

    #[test]
    fn square_overflow_saturates() {
        let fmt = q(8, 4);
        let r = fmt.square(fmt.quantize(3.0).value);
        assert!(r.saturated);
        assert_eq!(fmt.to_f64(r.value), 7.9375);
    }

    #[test]
    fn wrap_mode_wraps() {
        let fmt = q(8, 4).with_overflow(OverflowMode::Wrap);
        let a = fmt.quantize(7.0).value;
        let r = fmt.add(a, a);
        assert!(r.saturated);
        // 14.0 = raw 224, wraps to 224 - 256 = -32 = -2.0
        assert_eq!(fmt.to_f64(r.value), -2.0);
        let big = fmt.quantize(9.0);
        assert!(big.saturated);
        assert_eq!(fmt.to_f64(big.value), 9.0 - 16.0);
    }

    #[test]
    fn mul_rounds_ties_to_even() {
        let fmt = q(16, 2);
        // 0.25 * 0.5 = 0.125 -> tie between 0 and 0.25, even is 0
        let a = fmt.quantize(0.25).value;
        let b = fmt.quantize(0.5).value;
        assert_eq!(fmt.mul(a, b).value.raw, 0);
        // 0.75 * 0.5 = 0.375 -> tie between 0.25 and 0.5, even is 0.5
        let c = fmt.quantize(0.75).value;
        assert_eq!(fmt.to_f64(fmt.mul(c, b).value), 0.5);
        // negative tie
        let d = fmt.quantize(-0.75).value;
        assert_eq!(fmt.to_f64(fmt.mul(d, b).value), -0.5);
    }

    #[test]
    fn halve_rounds_ties_to_even() {
        let fmt = q(8, 0);
        assert_eq!(fmt.halve(Fixed { raw: 3 }).value.raw, 2);
        assert_eq!(fmt.halve(Fixed { raw: 5 }).value.raw, 2);
        assert_eq!(fmt.halve(Fixed { raw: -3 }).value.raw, -2);
    }

    #[test]
    fn parse_and_display() {
        let f: FixedPointFormat = "Q3.12".parse().unwrap();
        assert_eq!(f.total_bits(), 16);
        assert_eq!(f.frac_bits(), 12);
        assert_eq!(f.to_string(), "Q3.12");
        assert!("Q3".parse::<FixedPointFormat>().is_err());
        assert!("3.12".parse::<FixedPointFormat>().is_err());
        assert!("Q40.40".parse::<FixedPointFormat>().is_err());
        assert!(FixedPointFormat::new(8, 8).is_err());
        assert!(FixedPointFormat::new(0, 0).is_err());
    }

    #[test]
    fn profile_counts_saturations() {
        let p = FixedProfile::new(q(8, 4));
        let a = p.quantize(3.0);
        assert_eq!(p.saturation_count(), 0);
        let _ = p.square(&a);
        let _ = p.quantize(100.0);
        assert_eq!(p.saturation_count(), 2);
        p.reset_saturations();
        assert_eq!(p.saturation_count(), 0);
    }

    proptest! {
        #[test]
        fn quantize_error_within_half_ulp(frac in 0u32..20, t in 0.0f64..=1.0) {
            let fmt = FixedPointFormat::q(3, frac).unwrap();
            let x = fmt.min_value() + t * (fmt.max_value() - fmt.min_value());
            let r = fmt.quantize(x);
            prop_assert!(!r.saturated);
            prop_assert!((fmt.to_f64(r.value) - x).abs() <= fmt.ulp() / 2.0);
        }

        #[test]
        fn quantize_is_identity_on_representable(frac in 0u32..20, raw in -(1i64 << 22)..(1i64 << 22)) {
            let fmt = FixedPointFormat::q(3, frac).unwrap();
            let raw = raw.clamp(fmt.raw_min() as i64, fmt.raw_max() as i64);
            let x = fmt.to_f64(Fixed { raw });
            let r = fmt.quantize(x);
            prop_assert_eq!(r.value.raw, raw);
            prop_assert!(!r.saturated);
        }

        #[test]
        fn add_zero_is_identity(raw in -32768i64..32768) {
            let fmt = q(16, 12);
            let a = Fixed { raw };
            let r = fmt.add(a, Fixed { raw: 0 });
            prop_assert_eq!(r.value, a);
            prop_assert!(!r.saturated);
        }

        #[test]
        fn square_matches_rounded_exact_product(raw in -32768i64..32768) {
            // Independent route: exact square in f64 (fits in 53 bits), then
            // round-half-even of the scaled value.
            let fmt = q(16, 12);
            let exact = (raw * raw) as f64 / 4096.0;
            let expected = exact.round_ties_even().clamp(-32768.0, 32767.0);
            prop_assert_eq!(fmt.square(Fixed { raw }).value.raw as f64, expected);
        }
    }
}
