//! Physical quantities with explicit unit suffixes.
//!
//! Configuration values are either bare numbers (already SI) or strings of
//! the form `"<number> <unit>"`, e.g. `"11 cm^2/s"`, `"795 nm"`, `"1.2 MHz"`.
//! Rates are plain inverse seconds: `"1 MHz"` is `1e6 s⁻¹`, with no factor 2π.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Wavenumber,
    Rate,
    Diffusivity,
    Speed,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Length => "length (m)",
            Dimension::Wavenumber => "wavenumber (1/m)",
            Dimension::Rate => "rate (1/s)",
            Dimension::Diffusivity => "diffusivity (m^2/s)",
            Dimension::Speed => "speed (m/s)",
        };
        f.write_str(s)
    }
}

const UNITS: &[(&str, Dimension, f64)] = &[
    ("m", Dimension::Length, 1.0),
    ("cm", Dimension::Length, 1e-2),
    ("mm", Dimension::Length, 1e-3),
    ("um", Dimension::Length, 1e-6),
    ("μm", Dimension::Length, 1e-6),
    ("µm", Dimension::Length, 1e-6),
    ("nm", Dimension::Length, 1e-9),
    ("km", Dimension::Length, 1e3),
    ("1/m", Dimension::Wavenumber, 1.0),
    ("m^-1", Dimension::Wavenumber, 1.0),
    ("1/cm", Dimension::Wavenumber, 1e2),
    ("cm^-1", Dimension::Wavenumber, 1e2),
    ("1/mm", Dimension::Wavenumber, 1e3),
    ("mm^-1", Dimension::Wavenumber, 1e3),
    ("1/um", Dimension::Wavenumber, 1e6),
    ("um^-1", Dimension::Wavenumber, 1e6),
    ("1/s", Dimension::Rate, 1.0),
    ("s^-1", Dimension::Rate, 1.0),
    ("Hz", Dimension::Rate, 1.0),
    ("kHz", Dimension::Rate, 1e3),
    ("MHz", Dimension::Rate, 1e6),
    ("GHz", Dimension::Rate, 1e9),
    ("m^2/s", Dimension::Diffusivity, 1.0),
    ("cm^2/s", Dimension::Diffusivity, 1e-4),
    ("mm^2/s", Dimension::Diffusivity, 1e-6),
    ("m/s", Dimension::Speed, 1.0),
    ("km/s", Dimension::Speed, 1e3),
    ("cm/s", Dimension::Speed, 1e-2),
];

/// Parses `"<number> <unit>"` (or a bare number, taken as SI) into an SI value
/// of the expected dimension. `key` is used in error messages.
pub fn parse_quantity(key: &str, text: &str, expected: Dimension) -> Result<f64> {
    let text = text.trim();
    let split = text.find(|c: char| c.is_whitespace()).unwrap_or(text.len());
    let (number, unit) = text.split_at(split);
    let value: f64 = number
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse number in {text:?}")))?;
    if !value.is_finite() {
        return Err(Error::config(key, "value must be finite"));
    }
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(value);
    }
    let (_, dim, scale) = UNITS
        .iter()
        .find(|(name, _, _)| *name == unit)
        .ok_or_else(|| Error::config(key, format!("unknown unit {unit:?}")))?;
    if *dim != expected {
        return Err(Error::config(
            key,
            format!("unit {unit:?} is a {dim}, expected a {expected}"),
        ));
    }
    Ok(value * scale)
}

/// Reads a quantity from a TOML value: numbers are SI, strings carry units.
pub fn quantity_from_toml(key: &str, value: &toml::Value, expected: Dimension) -> Result<f64> {
    match value {
        toml::Value::Float(v) => Ok(*v),
        toml::Value::Integer(v) => Ok(*v as f64),
        toml::Value::String(s) => parse_quantity(key, s, expected),
        other => Err(Error::config(
            key,
            format!(
                "expected a number or unit string, found {}",
                other.type_str()
            ),
        )),
    }
}
