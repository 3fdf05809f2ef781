//! Direct recursion experiments.
//!
//! [`run_homogeneous`] advances `sum_j alpha_{j,n} y_{n+j} = 0` and, next to
//! it, the deflated recursion `sum_j gamma_{j,n} u_{n+j} = 0` for the scaled
//! differences `u_n = N (y_{n+1} - y_n)`. Boundedness of `u` across `N` is the
//! empirical counterpart of a uniformly bounded `R_N(phi)^{-1}`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFamily};
use crate::method::{bdf_variable_row, deflate_row, MethodSpec};

/// Summary of one homogeneous run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub n: usize,
    pub sup_y: f64,
    pub sup_u: f64,
    /// `exp` of the least-squares slope of `ln |u_n|` over the second half of
    /// the run (per-step geometric factor); 0 when `u` vanishes there.
    pub growth_rate: f64,
    /// `max |y_j|` over the start values.
    pub initial_norm: f64,
    /// `max |u_j|` over the `k - 1` start differences.
    pub u_initial_norm: f64,
    /// `sup_u / u_initial_norm`, or `sup_y / initial_norm` when there are no
    /// start differences.
    pub amplification: f64,
}

/// Full solution of a homogeneous run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `y_0..y_N` from the direct recursion.
    pub y: Vec<f64>,
    /// `u_0..u_{N-1}` from the deflated recursion, seeded by the start values.
    pub u: Vec<f64>,
}

impl Trajectory {
    /// Integrates `u` with `y_{n+1} = y_n + u_n / N` from `y_0`.
    pub fn integrate_u(&self) -> Vec<f64> {
        let n = self.u.len() as f64;
        let mut y = Vec::with_capacity(self.u.len() + 1);
        y.push(self.y[0]);
        for (i, u) in self.u.iter().enumerate() {
            y.push(y[i] + u / n);
        }
        y
    }
}

fn row_ratios(grid: &Grid, k: usize, n: usize) -> &[f64] {
    &grid.ratios()[n..n + k - 1]
}

/// Runs both recursions; `init` holds `y_0..y_{k-1}` at `t_0..t_{k-1}`.
pub fn trajectory(spec: &MethodSpec, grid: &Grid, init: &[f64]) -> Result<Trajectory> {
    let k = spec.steps();
    let big_n = grid.len();
    if big_n < k + 1 {
        return Err(Error::GridTooShort {
            n: big_n,
            min: k + 1,
        });
    }
    if init.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: init.len(),
        });
    }
    let scale = big_n as f64;
    let mut y = vec![0.0; big_n + 1];
    y[..k].copy_from_slice(init);
    let mut u = vec![0.0; big_n];
    for m in 0..k - 1 {
        u[m] = scale * (y[m + 1] - y[m]);
    }
    for n in 0..=big_n - k {
        let row = bdf_variable_row(spec, row_ratios(grid, k, n))?;
        let lead = row.alpha[k];
        if lead == 0.0 {
            return Err(Error::VanishingLeading(n));
        }
        let acc: f64 = (0..k).map(|j| row.alpha[j] * y[n + j]).sum();
        y[n + k] = -acc / lead;

        let gamma = deflate_row(&row)?.gamma;
        let acc: f64 = (0..k - 1).map(|j| gamma[j] * u[n + j]).sum();
        u[n + k - 1] = -acc / gamma[k - 1];
    }
    Ok(Trajectory { y, u })
}

fn sup(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn growth_rate(u: &[f64]) -> f64 {
    let start = u.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = u[start..]
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > 1e-300)
        .map(|(i, x)| ((start + i) as f64, Float::ln(x.abs())))
        .unzip();
    ls_slope(&xs, &ys).map_or(0.0, Float::exp)
}

pub fn run_homogeneous(spec: &MethodSpec, grid: &Grid, init: &[f64]) -> Result<RunResult> {
    let traj = trajectory(spec, grid, init)?;
    let k = spec.steps();
    let sup_y = sup(&traj.y);
    let sup_u = sup(&traj.u);
    let initial_norm = sup(init);
    let u_initial_norm = sup(&traj.u[..k - 1]);
    let amplification = if u_initial_norm > 0.0 {
        sup_u / u_initial_norm
    } else if initial_norm > 0.0 {
        sup_y / initial_norm
    } else {
        0.0
    };
    Ok(RunResult {
        n: grid.len(),
        sup_y,
        sup_u,
        growth_rate: growth_rate(&traj.u),
        initial_norm,
        u_initial_norm,
        amplification,
    })
}

/// Start vectors used by sweeps: alternating `+-delta` and seeded uniform
/// random vectors in `[-delta, delta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitPolicy {
    pub alternating: bool,
    pub random: usize,
    pub seed: u64,
    pub delta: f64,
}

impl InitPolicy {
    pub const DEFAULT_SEED: u64 = 0x5eed_0001;

    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn inits(&self, k: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.random + 1);
        if self.alternating {
            out.push(
                (0..k)
                    .map(|i| if i % 2 == 0 { self.delta } else { -self.delta })
                    .collect(),
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random {
            out.push(
                (0..k)
                    .map(|_| self.delta * rng.gen_range(-1.0..=1.0))
                    .collect(),
            );
        }
        out
    }
}

impl Default for InitPolicy {
    fn default() -> Self {
        Self {
            alternating: true,
            random: 10,
            seed: Self::DEFAULT_SEED,
            delta: 1.0,
        }
    }
}

/// Worst case over all start vectors at one `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    /// Run with the largest amplification.
    pub worst: RunResult,
}

pub fn sweep_point(spec: &MethodSpec, grid: &Grid, inits: &[Vec<f64>]) -> Result<SweepPoint> {
    let mut worst: Option<RunResult> = None;
    for init in inits {
        let run = run_homogeneous(spec, grid, init)?;
        if worst
            .as_ref()
            .is_none_or(|w| run.amplification > w.amplification)
        {
            worst = Some(run);
        }
    }
    let worst = worst.ok_or(Error::InvalidArgument("no start vectors"))?;
    Ok(SweepPoint {
        n: grid.len(),
        worst,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVerdict {
    Stable,
    Unstable,
}

impl SweepVerdict {
    pub fn name(self) -> &'static str {
        match self {
            SweepVerdict::Stable => "STABLE",
            SweepVerdict::Unstable => "UNSTABLE",
        }
    }
}

/// Ratio of successive amplifications tolerated before growth is declared.
pub const GROWTH_TOLERANCE: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub verdict: SweepVerdict,
    /// Largest ratio of successive amplifications.
    pub max_ratio: f64,
}

/// STABLE iff no amplification exceeds its predecessor by more than
/// [`GROWTH_TOLERANCE`]. A heuristic: boundedness cannot be decided from
/// finitely many `N`.
pub fn sweep_verdict(points: &[SweepPoint]) -> (SweepVerdict, f64) {
    let max_ratio = points
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].worst.amplification, w[1].worst.amplification);
            if a > 0.0 {
                b / a
            } else if b > 0.0 {
                f64::INFINITY
            } else {
                1.0
            }
        })
        .fold(0.0, f64::max);
    let verdict = if max_ratio <= GROWTH_TOLERANCE {
        SweepVerdict::Stable
    } else {
        SweepVerdict::Unstable
    };
    (verdict, max_ratio)
}

/// Checks a list of step counts: at least 4, strictly increasing.
pub fn validate_sweep(ns: &[usize]) -> Result<()> {
    if ns.len() < 4 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSweep(ns.len()));
    }
    Ok(())
}

/// `n_min * 2^i` for `i = 0..=doublings`.
pub fn doubling_sequence(n_min: usize, doublings: usize) -> Vec<usize> {
    (0..=doublings).map(|i| n_min << i).collect()
}

pub fn boundedness_sweep<F: GridFamily + ?Sized>(
    spec: &MethodSpec,
    family: &F,
    ns: &[usize],
    policy: &InitPolicy,
) -> Result<SweepResult> {
    validate_sweep(ns)?;
    let inits = policy.inits(spec.steps());
    let points = ns
        .iter()
        .map(|&n| sweep_point(spec, &family.grid(n)?, &inits))
        .collect::<Result<Vec<_>>>()?;
    let (verdict, max_ratio) = sweep_verdict(&points);
    Ok(SweepResult {
        points,
        verdict,
        max_ratio,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub ns: Vec<usize>,
    /// `|y_N - F(1)|` per run.
    pub errors: Vec<f64>,
    /// Negative log-log slope of error against `N`, fitted over the nonzero
    /// errors; `None` with fewer than two.
    pub fitted_order: Option<f64>,
}

/// Integrates `y' = f(t)` on `grid` with exact start values `F(t_0..t_{k-1})`
/// and returns `|y_N - F(1)|`.
pub fn quadrature_error<F, G>(
    spec: &MethodSpec,
    grid: &Grid,
    f: F,
    antiderivative: G,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let k = spec.steps();
    let big_n = grid.len();
    if big_n < k + 1 {
        return Err(Error::GridTooShort {
            n: big_n,
            min: k + 1,
        });
    }
    let t = grid.times();
    let h = grid.steps();
    let mut y: Vec<f64> = t[..k].iter().map(|&s| antiderivative(s)).collect();
    y.reserve(big_n + 1 - k);
    for n in 0..=big_n - k {
        let row = bdf_variable_row(spec, row_ratios(grid, k, n))?;
        let lead = row.alpha[k];
        if lead == 0.0 {
            return Err(Error::VanishingLeading(n));
        }
        let rhs: f64 = (0..=k).map(|j| row.beta[j] * f(t[n + j])).sum::<f64>() * h[n + k - 1];
        let hist: f64 = (0..k).map(|j| row.alpha[j] * y[n + j]).sum();
        y.push((rhs - hist) / lead);
    }
    Ok((y[big_n] - antiderivative(1.0)).abs())
}

pub fn quadrature_convergence<M, F, G>(
    spec: &MethodSpec,
    family: &M,
    f: F,
    antiderivative: G,
    ns: &[usize],
) -> Result<ConvergenceResult>
where
    M: GridFamily + ?Sized,
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let errors = ns
        .iter()
        .map(|&n| quadrature_error(spec, &family.grid(n)?, &f, &antiderivative))
        .collect::<Result<Vec<f64>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(&errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(&n, &e)| (Float::ln(n as f64), Float::ln(e)))
        .unzip();
    Ok(ConvergenceResult {
        ns: ns.to_vec(),
        errors,
        fitted_order: ls_slope(&xs, &ys).map(|s| -s),
    })
}
