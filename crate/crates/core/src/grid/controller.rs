use alloc::vec::Vec;

use num_traits::Float;

use super::Grid;
use crate::error::{Error, Result};

/// Digital-filter step size controller
/// `r_{n-1} = (eps / l_{n-1})^{b1/p} (eps / l_{n-2})^{b2/p} r_{n-2}^{-a1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// Local error tolerance `eps`.
    pub epsilon: f64,
    /// Method order `p`.
    pub order: u32,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    /// Steps taken at the initial step size before the filter engages.
    pub startup_steps: usize,
    pub max_steps: usize,
}

impl ControllerConfig {
    /// Elementary (deadbeat) controller, `(b1, b2, a1) = (1, 0, 0)`.
    pub fn deadbeat(epsilon: f64, order: u32) -> Self {
        Self::with_filter(epsilon, order, 1.0, 0.0, 0.0)
    }

    /// H211b low-pass filter with `b = 4`, `(b1, b2, a1) = (1/4, 1/4, 1/4)`.
    pub fn h211b(epsilon: f64, order: u32) -> Self {
        Self::with_filter(epsilon, order, 0.25, 0.25, 0.25)
    }

    pub fn with_filter(epsilon: f64, order: u32, b1: f64, b2: f64, a1: f64) -> Self {
        Self {
            epsilon,
            order,
            b1,
            b2,
            a1,
            startup_steps: 2,
            max_steps: 10_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidController("epsilon must be positive"));
        }
        if self.order == 0 {
            return Err(Error::InvalidController("order must be at least 1"));
        }
        if ![self.b1, self.b2, self.a1].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidController("filter parameters must be finite"));
        }
        if self.startup_steps == 0 {
            return Err(Error::InvalidController("need at least one startup step"));
        }
        Ok(())
    }
}

const MIN_STEP: f64 = 1e-12;

/// Generates a grid on `[0, t_end]` by running the controller against the
/// local error model `l_n = h_n^p * err(t_n)`, then rescales it onto `[0, 1]`.
///
/// Ordering per step: the ratio for the next step is predicted from the
/// errors of the steps already committed, the step is committed, and its
/// local error is measured at its left end point. The first `startup_steps`
/// steps use `h_0 = (eps / err(0))^{1/p}` with the filter history seeded to
/// `r = 1`. Once the sum of the steps passes `t_end` all steps are scaled by
/// a common factor so that they end exactly at `t_end`; this keeps every
/// step ratio intact.
pub fn controller_grid<F>(cfg: &ControllerConfig, error_model: F, t_end: f64) -> Result<Grid>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument("t_end must be positive"));
    }
    let p = f64::from(cfg.order);
    let eval = |t: f64| -> Result<f64> {
        let e = error_model(t);
        if e > 0.0 && e.is_finite() {
            Ok(e)
        } else {
            Err(Error::InvalidErrorModel { t })
        }
    };

    let h0 = (cfg.epsilon / eval(0.0)?).powf(1.0 / p);
    let mut steps: Vec<f64> = Vec::new();
    let mut t = 0.0;
    let mut last_error = cfg.epsilon;
    let mut prev_error = cfg.epsilon;
    let mut last_ratio = 1.0;

    while t < t_end {
        if steps.len() >= cfg.max_steps {
            return Err(Error::TooManySteps(cfg.max_steps));
        }
        let h = if steps.len() < cfg.startup_steps {
            h0
        } else {
            let ratio = (cfg.epsilon / last_error).powf(cfg.b1 / p)
                * (cfg.epsilon / prev_error).powf(cfg.b2 / p)
                * last_ratio.powf(-cfg.a1);
            let h = ratio * steps[steps.len() - 1];
            last_ratio = ratio;
            h
        };
        if !(h >= MIN_STEP) || !h.is_finite() {
            return Err(Error::StepUnderflow { t });
        }
        let local = h.powf(p) * eval(t)?;
        prev_error = last_error;
        last_error = local;
        steps.push(h);
        t += h;
    }
    Grid::from_steps(&steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_model_gives_uniform_steps() {
        for cfg in [
            ControllerConfig::deadbeat(1e-6, 2),
            ControllerConfig::h211b(1e-6, 2),
        ] {
            let g = controller_grid(&cfg, |_| 3.0, 2.0).unwrap();
            assert!(g.ratios().iter().all(|r| (r - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn invalid_inputs() {
        let cfg = ControllerConfig::deadbeat(0.0, 2);
        assert!(controller_grid(&cfg, |_| 1.0, 1.0).is_err());
        let cfg = ControllerConfig::deadbeat(1e-3, 2);
        assert!(matches!(
            controller_grid(&cfg, |t| 1.0 - t, 2.0),
            Err(Error::InvalidErrorModel { .. })
        ));
        // error jumps so far that the next step collapses
        let cfg = ControllerConfig::deadbeat(1e-3, 1);
        assert!(matches!(
            controller_grid(&cfg, |t| if t < 0.3 { 1.0 } else { 1e20 }, 1.0),
            Err(Error::StepUnderflow { .. })
        ));
    }
}
