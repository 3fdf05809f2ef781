//! Argument parsing: exact rationals, number lists and grid family strings.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use zerostab_core::grid::Geometric;
use zerostab_core::{Error, Grid, GridFamily, GridMap, Rational};

/// Parses `3`, `-1/2`, `0.125`, `2.5e-3` or `1/3e2` into an exact rational.
/// Decimal input is read digit by digit, so `0.1` is exactly `1/10`.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    match text.split_once('/') {
        Some((num, den)) => {
            let num = parse_decimal(num)?;
            let den = parse_decimal(den)?;
            if den.is_zero() {
                return Err(format!("zero denominator in '{text}'"));
            }
            Ok(num / den)
        }
        None => parse_decimal(text),
    }
}

fn parse_decimal(text: &str) -> Result<Rational, String> {
    let bad = || format!("'{text}' is not a number");
    let text = text.trim();
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = [int_part, frac_part].concat();
    let mut value = Rational::from_integer(all.parse::<BigInt>().map_err(|_| bad())?);
    let shift = exp - frac_part.len() as i32;
    value *= Rational::from_integer(BigInt::from(10)).pow(shift);
    Ok(if negative { -value } else { value })
}

/// Comma-separated list of exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalList(pub Vec<Rational>);

impl RationalList {
    pub fn all_one(&self) -> bool {
        self.0.iter().all(One::is_one)
    }
}

impl FromStr for RationalList {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let items = text
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(items))
    }
}

impl fmt::Display for RationalList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Comma-separated list of floats.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("'{s}' is not a number"))
            })
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

/// Grid families addressable from the command line: every [`GridMap`]
/// (`identity`, `exp:c=`, `power:a=`, `sigmoid:s=,a=,m=`) plus constant-ratio
/// grids `geom:r=`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    Map(GridMap),
    Geometric(f64),
}

impl FamilySpec {
    /// The smooth map, if this family has one.
    pub fn map(&self) -> Option<&GridMap> {
        match self {
            FamilySpec::Map(m) => Some(m),
            FamilySpec::Geometric(_) => None,
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self, Error> {
        let trimmed = text.trim();
        if let Some(params) = trimmed.strip_prefix("geom") {
            let value = params.strip_prefix(":r=").ok_or_else(|| {
                Error::InvalidMap(format!("expected geom:r=<ratio>, got '{text}'"))
            })?;
            let r: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidMap(format!("'{value}' is not a number")))?;
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidMap(
                    "geom: ratio must be positive and finite".into(),
                ));
            }
            return Ok(FamilySpec::Geometric(r));
        }
        trimmed.parse().map(FamilySpec::Map)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Map(m) => m.fmt(f),
            FamilySpec::Geometric(r) => write!(f, "geom:r={r}"),
        }
    }
}

impl GridFamily for FamilySpec {
    fn grid(&self, n: usize) -> zerostab_core::Result<Grid> {
        match self {
            FamilySpec::Map(m) => m.grid(n),
            FamilySpec::Geometric(r) => Geometric { ratio: *r }.grid(n),
        }
    }
}

/// Test integrands `f` with a closed-form antiderivative `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrand {
    /// `e^t`.
    Exp,
    /// `(d + 1) t^d`, antiderivative `t^{d+1}`.
    Poly(u32),
    /// `cos(2 pi t)`.
    Cos,
}

impl Integrand {
    pub fn f(&self, t: f64) -> f64 {
        match *self {
            Integrand::Exp => t.exp(),
            Integrand::Poly(d) => (d + 1) as f64 * t.powi(d as i32),
            Integrand::Cos => (std::f64::consts::TAU * t).cos(),
        }
    }

    pub fn antiderivative(&self, t: f64) -> f64 {
        match *self {
            Integrand::Exp => t.exp(),
            Integrand::Poly(d) => t.powi(d as i32 + 1),
            Integrand::Cos => (std::f64::consts::TAU * t).sin() / std::f64::consts::TAU,
        }
    }
}

impl FromStr for Integrand {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        match text.trim() {
            "exp" => Ok(Integrand::Exp),
            "cos" => Ok(Integrand::Cos),
            other => other
                .strip_prefix("poly:d=")
                .and_then(|d| d.parse().ok())
                .map(Integrand::Poly)
                .ok_or_else(|| {
                    format!("unknown integrand '{other}'; expected exp, cos or poly:d=<degree>")
                }),
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::Exp => f.write_str("exp"),
            Integrand::Poly(d) => write!(f, "poly:d={d}"),
            Integrand::Cos => f.write_str("cos"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use zerostab_core::Scalar;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-2").unwrap(), q(-2, 1));
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("2.5e-3").unwrap(), q(1, 400));
        assert_eq!(parse_rational("1E2/3").unwrap(), q(100, 3));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("+7.").unwrap(), q(7, 1));
        for bad in ["", "1/0", "abc", "1..2", "-", "1e", "0x10"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn lists() {
        let l: RationalList = "1, 3/2,2".parse().unwrap();
        assert_eq!(l.0, vec![q(1, 1), q(3, 2), q(2, 1)]);
        assert_eq!(l.to_string(), "1,3/2,2");
        assert!(!l.all_one());
        assert!("1,1".parse::<RationalList>().unwrap().all_one());
        assert_eq!("1,-1".parse::<FloatList>().unwrap().0, vec![1.0, -1.0]);
    }

    #[test]
    fn families() {
        assert_eq!(
            "geom:r=2.5".parse::<FamilySpec>().unwrap(),
            FamilySpec::Geometric(2.5)
        );
        assert_eq!(
            "exp:c=2".parse::<FamilySpec>().unwrap(),
            FamilySpec::Map(GridMap::ExpRamp { c: 2.0 })
        );
        assert!("geom:r=-1".parse::<FamilySpec>().is_err());
        assert!("geom".parse::<FamilySpec>().is_err());
        assert!("wavy:c=1".parse::<FamilySpec>().is_err());
        let f: FamilySpec = "geom:r=2".parse().unwrap();
        assert_eq!(f.to_string(), "geom:r=2");
        assert!(f.grid(10).unwrap().ratios().iter().all(|&r| r == 2.0));
    }

    #[test]
    fn integrands() {
        for spec in ["exp", "cos", "poly:d=3"] {
            let i: Integrand = spec.parse().unwrap();
            assert_eq!(i.to_string(), spec);
            let h = 1e-6;
            let d = (i.antiderivative(0.3 + h) - i.antiderivative(0.3 - h)) / (2.0 * h);
            assert!((d - i.f(0.3)).abs() < 1e-8, "{spec}");
        }
        assert!("poly".parse::<Integrand>().is_err());
    }
}
