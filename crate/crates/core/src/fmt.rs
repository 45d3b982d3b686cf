//! `%g`-style number formatting for JSON and CSV output.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Significant digits used for machine-readable output.
pub const FULL_DIGITS: usize = 17;

/// Format `x` with `digits` significant digits, like C's `%.{digits}g`.
///
/// Non-finite values become `NaN`, `inf` or `-inf`.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A float serialized as a raw JSON number with a fixed digit count.
#[derive(Debug, Clone, Copy)]
pub struct Sig<const D: usize>(pub f64);

pub type Sig17 = Sig<FULL_DIGITS>;

impl<const D: usize> Serialize for Sig<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_sig(self.0, D)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// `serialize_with` helper for 17-digit floats.
pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Sig::<FULL_DIGITS>(*x).serialize(s)
}
