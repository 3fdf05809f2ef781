use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

// Float math is inherent on recent toolchains even without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Grid deformation map `Phi` with density `phi = Phi'`.
pub trait Deformation {
    /// `Phi(tau)`, strictly increasing with `Phi(0) = 0`, `Phi(1) = 1`.
    fn map(&self, tau: f64) -> f64;

    /// `phi(tau) = Phi'(tau)`.
    fn density(&self, tau: f64) -> f64;

    /// Analytic `phi'(tau)` when the family has one.
    fn density_slope(&self, _tau: f64) -> Option<f64> {
        None
    }

    /// Analytic `phi'(tau) / phi(tau)` when available.
    fn log_density_slope(&self, tau: f64) -> Option<f64> {
        self.density_slope(tau).map(|d| d / self.density(tau))
    }
}

/// Builtin deformation families.
///
/// CLI syntax is `family:param=value,...`:
///
/// | family     | map                                   | `phi'/phi`            |
/// |------------|---------------------------------------|-----------------------|
/// | `identity` | `tau`                                 | `0`                   |
/// | `exp:c=`   | `(e^{c tau} - 1) / (e^c - 1)`         | `c`                   |
/// | `power:a=` | `tau^a`                               | `(a - 1) / tau`       |
/// | `sigmoid:s=,a=,m=` | normalized `tau + (s-1) softplus(a (tau - m)) / a` | bounded |
///
/// `power` with `a != 1` has unbounded `phi'/phi` at `tau = 0` and serves as
/// the singular case. `sigmoid` blends the density from 1 to `s` around
/// `tau = m` with steepness `a`; defaults are `s=4, a=12, m=0.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridMap {
    Identity,
    ExpRamp { c: f64 },
    Power { a: f64 },
    Sigmoid { s: f64, a: f64, m: f64 },
}

impl GridMap {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidMap(msg.to_string()));
        match *self {
            GridMap::Identity => Ok(()),
            GridMap::ExpRamp { c } if !c.is_finite() => bad("exp: c must be finite"),
            GridMap::ExpRamp { .. } => Ok(()),
            GridMap::Power { a } if !(a > 0.0) || !a.is_finite() => {
                bad("power: a must be positive")
            }
            GridMap::Power { .. } => Ok(()),
            GridMap::Sigmoid { s, a, m } => {
                if !(s > 0.0) || !s.is_finite() {
                    bad("sigmoid: s must be positive")
                } else if !(a > 0.0) || !a.is_finite() {
                    bad("sigmoid: a must be positive")
                } else if !m.is_finite() {
                    bad("sigmoid: m must be finite")
                } else {
                    Ok(())
                }
            }
        }
    }

    fn sigmoid_norm(s: f64, a: f64, m: f64) -> f64 {
        1.0 + (s - 1.0) * (softplus(a * (1.0 - m)) - softplus(-a * m)) / a
    }
}

const EXP_IDENTITY_CUTOFF: f64 = 1e-12;

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl Deformation for GridMap {
    fn map(&self, tau: f64) -> f64 {
        match *self {
            GridMap::Identity => tau,
            GridMap::ExpRamp { c } if c.abs() < EXP_IDENTITY_CUTOFF => tau,
            GridMap::ExpRamp { c } => (c * tau).exp_m1() / c.exp_m1(),
            GridMap::Power { a } => tau.powf(a),
            GridMap::Sigmoid { s, a, m } => {
                let raw = tau + (s - 1.0) * (softplus(a * (tau - m)) - softplus(-a * m)) / a;
                raw / Self::sigmoid_norm(s, a, m)
            }
        }
    }

    fn density(&self, tau: f64) -> f64 {
        match *self {
            GridMap::Identity => 1.0,
            GridMap::ExpRamp { c } if c.abs() < EXP_IDENTITY_CUTOFF => 1.0,
            GridMap::ExpRamp { c } => c * (c * tau).exp() / c.exp_m1(),
            GridMap::Power { a } => a * tau.powf(a - 1.0),
            GridMap::Sigmoid { s, a, m } => {
                (1.0 + (s - 1.0) * logistic(a * (tau - m))) / Self::sigmoid_norm(s, a, m)
            }
        }
    }

    fn density_slope(&self, tau: f64) -> Option<f64> {
        Some(match *self {
            GridMap::Identity => 0.0,
            GridMap::ExpRamp { c } if c.abs() < EXP_IDENTITY_CUTOFF => 0.0,
            GridMap::ExpRamp { c } => c * self.density(tau),
            GridMap::Power { a } => a * (a - 1.0) * tau.powf(a - 2.0),
            GridMap::Sigmoid { s, a, m } => {
                let sg = logistic(a * (tau - m));
                (s - 1.0) * a * sg * (1.0 - sg) / Self::sigmoid_norm(s, a, m)
            }
        })
    }

    fn log_density_slope(&self, tau: f64) -> Option<f64> {
        Some(match *self {
            GridMap::Identity => 0.0,
            GridMap::ExpRamp { c } if c.abs() < EXP_IDENTITY_CUTOFF => 0.0,
            GridMap::ExpRamp { c } => c,
            GridMap::Power { a: 1.0 } => 0.0,
            GridMap::Power { a } => (a - 1.0) / tau,
            GridMap::Sigmoid { s, a, m } => {
                let sg = logistic(a * (tau - m));
                (s - 1.0) * a * sg * (1.0 - sg) / (1.0 + (s - 1.0) * sg)
            }
        })
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GridMap::Identity => write!(f, "identity"),
            GridMap::ExpRamp { c } => write!(f, "exp:c={c}"),
            GridMap::Power { a } => write!(f, "power:a={a}"),
            GridMap::Sigmoid { s, a, m } => write!(f, "sigmoid:s={s},a={a},m={m}"),
        }
    }
}

impl FromStr for GridMap {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (family, params) = match text.split_once(':') {
            Some((f, p)) => (f.trim(), p.trim()),
            None => (text.trim(), ""),
        };
        let mut values: alloc::vec::Vec<(String, f64)> = alloc::vec::Vec::new();
        for item in params.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidMap(format!("expected key=value, got '{item}'")))?;
            let parsed: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidMap(format!("'{value}' is not a number")))?;
            values.push((key.trim().to_string(), parsed));
        }
        let take = |key: &str, default: Option<f64>| -> Result<f64> {
            values
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| Error::InvalidMap(format!("{family}: missing parameter '{key}'")))
        };
        let allowed: &[&str] = match family {
            "identity" | "uniform" => &[],
            "exp" => &["c"],
            "power" => &["a"],
            "sigmoid" => &["s", "a", "m"],
            other => return Err(Error::InvalidMap(format!("unknown family '{other}'"))),
        };
        if let Some((k, _)) = values.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidMap(format!(
                "{family}: unknown parameter '{k}'"
            )));
        }
        let map = match family {
            "identity" | "uniform" => GridMap::Identity,
            "exp" => GridMap::ExpRamp {
                c: take("c", None)?,
            },
            "power" => GridMap::Power {
                a: take("a", None)?,
            },
            _ => GridMap::Sigmoid {
                s: take("s", Some(4.0))?,
                a: take("a", Some(12.0))?,
                m: take("m", Some(0.5))?,
            },
        };
        map.validate()?;
        Ok(map)
    }
}

/// Deformation given by closures, without an analytic density slope.
pub struct FnMap<F, G> {
    map: F,
    density: G,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> FnMap<F, G> {
    pub fn new(map: F, density: G) -> Self {
        Self { map, density }
    }
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> Deformation for FnMap<F, G> {
    fn map(&self, tau: f64) -> f64 {
        (self.map)(tau)
    }

    fn density(&self, tau: f64) -> f64 {
        (self.density)(tau)
    }
}

/// Sampled `||phi'/phi||_inf`, which is also `||d mu / dt||_inf` for the step
/// size modulation function `mu(t) = phi(tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    /// `max |phi'/phi|` over the samples; infinite for singular maps.
    pub sup: f64,
    /// Sample `tau` where the maximum is attained.
    pub tau: f64,
    /// `t = Phi(tau)` at the maximum, i.e. where `|mu'(t)|` peaks.
    pub t: f64,
}

impl Regularity {
    pub fn is_finite(&self) -> bool {
        self.sup.is_finite()
    }
}

/// `max |phi'/phi|` over `sampling + 1` equispaced points of `[0, 1]`.
///
/// Uses the analytic slope when the map provides one, otherwise second-order
/// finite differences of `phi` with spacing `1 / sampling`.
pub fn regularity<M: Deformation + ?Sized>(map: &M, sampling: usize) -> Result<Regularity> {
    if sampling < 2 {
        return Err(Error::InvalidArgument(
            "regularity needs at least 2 sample intervals",
        ));
    }
    let d = 1.0 / sampling as f64;
    let tau_at = |i: usize| if i == sampling { 1.0 } else { i as f64 * d };
    let mut best = Regularity {
        sup: 0.0,
        tau: 0.0,
        t: 0.0,
    };
    for i in 0..=sampling {
        let tau = tau_at(i);
        let phi = map.density(tau);
        if !(phi > 0.0) {
            return Err(Error::NonPositiveDensity { tau });
        }
        let slope = match map.log_density_slope(tau) {
            Some(s) => s,
            None => {
                let dphi = if i == 0 {
                    (-3.0 * phi + 4.0 * map.density(tau_at(1)) - map.density(tau_at(2))) / (2.0 * d)
                } else if i == sampling {
                    (3.0 * phi - 4.0 * map.density(tau_at(i - 1)) + map.density(tau_at(i - 2)))
                        / (2.0 * d)
                } else {
                    (map.density(tau_at(i + 1)) - map.density(tau_at(i - 1))) / (2.0 * d)
                };
                dphi / phi
            }
        };
        let value = if slope.is_nan() {
            f64::INFINITY
        } else {
            slope.abs()
        };
        if value > best.sup || (i == 0 && value >= best.sup) {
            best = Regularity {
                sup: value,
                tau,
                t: map.map(tau),
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let m: GridMap = "exp:c=2".parse().unwrap();
        assert_eq!(m, GridMap::ExpRamp { c: 2.0 });
        assert_eq!(m.to_string(), "exp:c=2");
        let s: GridMap = "sigmoid:s=3".parse().unwrap();
        assert_eq!(
            s,
            GridMap::Sigmoid {
                s: 3.0,
                a: 12.0,
                m: 0.5
            }
        );
        assert_eq!("identity".parse::<GridMap>().unwrap(), GridMap::Identity);
        assert!("exp".parse::<GridMap>().is_err());
        assert!("exp:c=x".parse::<GridMap>().is_err());
        assert!("exp:d=1".parse::<GridMap>().is_err());
        assert!("power:a=-1".parse::<GridMap>().is_err());
        assert!("spline:c=1".parse::<GridMap>().is_err());
    }

    #[test]
    fn end_points() {
        for map in [
            GridMap::Identity,
            GridMap::ExpRamp { c: 2.0 },
            GridMap::ExpRamp { c: -3.0 },
            GridMap::Power { a: 0.5 },
            GridMap::Sigmoid {
                s: 4.0,
                a: 12.0,
                m: 0.5,
            },
        ] {
            assert!(map.map(0.0).abs() <= 1e-14, "{map}");
            assert!((map.map(1.0) - 1.0).abs() <= 1e-14, "{map}");
        }
    }

    #[test]
    fn regularity_of_builtin_families() {
        assert_eq!(regularity(&GridMap::Identity, 100).unwrap().sup, 0.0);
        let r = regularity(&GridMap::ExpRamp { c: 2.0 }, 100).unwrap();
        assert!((r.sup - 2.0).abs() < 1e-10);
        let p = regularity(&GridMap::Power { a: 0.5 }, 100).unwrap();
        assert!(p.sup.is_infinite());
        assert!(matches!(
            regularity(&GridMap::Power { a: 2.0 }, 100),
            Err(Error::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn finite_difference_path() {
        let c = 1.5f64;
        let map = FnMap::new(
            move |tau: f64| (c * tau).exp_m1() / c.exp_m1(),
            move |tau: f64| c * (c * tau).exp() / c.exp_m1(),
        );
        let r = regularity(&map, 1000).unwrap();
        assert!((r.sup - c).abs() < 1e-5, "{}", r.sup);
    }
}
