//! Number formatting shared by every result file.

use ogb_core::policies::Tuning;

/// `x` rounded to 12 significant digits. Non-finite values pass through.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("scientific notation parses")
}

/// Shortest decimal text of `sig12(x)`.
pub fn num(x: f64) -> String {
    format!("{}", sig12(x))
}

/// Serde adapter writing floats at 12 significant digits.
pub mod sig {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::sig12(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }
}

/// Parses `auto`, `auto*k`, `k*auto` or a plain number.
pub fn parse_tuning(s: &str) -> Result<Tuning, String> {
    let s = s.trim();
    if s == "auto" {
        return Ok(Tuning::Auto);
    }
    let factor = s
        .strip_prefix("auto*")
        .or_else(|| s.strip_suffix("*auto"));
    if let Some(k) = factor {
        let k: f64 = k.trim().parse().map_err(|_| format!("bad multiplier in '{s}'"))?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(format!("multiplier in '{s}' must be positive"));
        }
        return Ok(Tuning::Scaled(k));
    }
    let v: f64 = s.parse().map_err(|_| format!("expected auto, auto*k or a number, got '{s}'"))?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(format!("'{s}' must be a finite non-negative number"));
    }
    Ok(Tuning::Fixed(v))
}

/// Inverse of [`parse_tuning`].
pub fn tuning_str(t: Tuning) -> String {
    match t {
        Tuning::Auto => "auto".into(),
        Tuning::Scaled(k) => format!("auto*{k}"),
        Tuning::Fixed(v) => format!("{v}"),
    }
}

/// Non-negative integer, also accepting integral scientific notation (`1e5`).
pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("expected a count, got '{s}'"))?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("expected a non-negative integer, got '{s}'"));
    }
    Ok(v as usize)
}
