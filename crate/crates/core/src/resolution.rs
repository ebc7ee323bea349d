//! Exact rational resolution parameter and values scaled by its denominator.
//!
//! Every potential in this crate is carried as an integer number of units of
//! `1/c`, where `γ = b/c` is the active resolution in lowest terms. Nothing in
//! the potential arithmetic is ever rounded.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted denominator. Keeps `c · n²` comfortably inside `i128`.
pub const MAX_DENOMINATOR: u64 = 1_000_000_000_000_000_000;

/// Resolution parameter `γ = b/c` with `0 ≤ b ≤ c` and `gcd(b, c) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Resolution {
    num: u64,
    den: u64,
}

impl Resolution {
    pub const ZERO: Resolution = Resolution { num: 0, den: 1 };
    pub const ONE: Resolution = Resolution { num: 1, den: 1 };

    /// Builds `num/den`, reducing to lowest terms.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidResolution(format!("{num}/{den}: zero denominator")));
        }
        if num > den {
            return Err(Error::InvalidResolution(format!("{num}/{den} is greater than 1")));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        if den > MAX_DENOMINATOR {
            return Err(Error::InvalidResolution(format!(
                "denominator {den} exceeds {MAX_DENOMINATOR}"
            )));
        }
        Ok(Self { num, den })
    }

    /// Numerator `b`.
    pub fn numer(&self) -> u64 {
        self.num
    }

    /// Denominator `c`; one potential unit is `1/c`.
    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_ratio(&self) -> Ratio<i64> {
        Ratio::new_raw(self.num as i64, self.den as i64)
    }

    /// Converts an exact rational in `[0, 1]`.
    pub fn from_ratio(r: Ratio<i64>) -> Result<Self> {
        if *r.numer() < 0 || *r.denom() <= 0 {
            return Err(Error::InvalidResolution(format!("{r} is outside [0, 1]")));
        }
        Self::new(*r.numer() as u64, *r.denom() as u64)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The same value scaled to `units / self.denom()`.
    pub fn scaled(&self, units: i128) -> ScaledValue {
        ScaledValue::new(units, self.den)
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Resolution {
    type Err = Error;

    /// Accepts `"b/c"`, an integer (`"0"`, `"1"`) or a plain decimal (`"0.25"`).
    /// Decimals are read as an exact fraction over a power of ten.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidResolution(format!("cannot parse {s:?} as b/c or decimal"));
        if let Some((num, den)) = s.split_once('/') {
            let num: u64 = num.trim().parse().map_err(|_| bad())?;
            let den: u64 = den.trim().parse().map_err(|_| bad())?;
            return Self::new(num, den);
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) || frac_part.len() > 18 {
            return Err(bad());
        }
        let den = 10u64.pow(frac_part.len() as u32);
        let int_value: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
        let frac_value: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
        let num = int_value
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_value))
            .ok_or_else(bad)?;
        Self::new(num, den)
    }
}

impl TryFrom<String> for Resolution {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Resolution> for String {
    fn from(r: Resolution) -> String {
        r.to_string()
    }
}

/// An exact value `units / denom`, as produced by the potential functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScaledValue {
    pub units: i128,
    pub denom: u64,
}

impl ScaledValue {
    pub fn new(units: i128, denom: u64) -> Self {
        Self { units, denom }
    }

    /// Lowest-terms fraction.
    pub fn to_ratio(&self) -> Ratio<i128> {
        Ratio::new(self.units, self.denom as i128)
    }

    pub fn to_f64(&self) -> f64 {
        self.units as f64 / self.denom as f64
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_ratio();
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Formats a rational as `"num/den"` even when the denominator is one.
pub fn fraction_string<T>(r: &Ratio<T>) -> String
where
    T: Clone + Integer + fmt::Display,
{
    format!("{}/{}", r.numer(), r.denom())
}
