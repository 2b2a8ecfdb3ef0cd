//! Stable number formatting: 17 significant digits for JSON, `%g`-style
//! 6 digits for CSV.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `d.dddddddddddddddde±x`, enough digits to round-trip any `f64`.
pub fn json_number(v: f64) -> Option<Box<RawValue>> {
    if !v.is_finite() {
        return None;
    }
    // Avoid "-0.0000000000000000e0" so output does not depend on the sign of zero.
    let v = if v == 0.0 { 0.0 } else { v };
    Some(RawValue::from_string(format!("{v:.16e}")).expect("formatted float is valid JSON"))
}

pub fn f64_17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    json_number(*v).serialize(s)
}

pub fn opt_f64_17<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    v.and_then(json_number).serialize(s)
}

pub fn f64_17_array<S: Serializer>(v: &[f64; 3], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(3))?;
    for x in v {
        seq.serialize_element(&json_number(*x))?;
    }
    seq.end()
}

/// C's `%.{digits}g`: shortest of fixed or exponent form, trailing zeros removed.
pub fn fmt_g(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
