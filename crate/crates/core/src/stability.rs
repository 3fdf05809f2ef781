//! Stability certificates for strongly stable multistep methods.
//!
//! On a smooth grid the extraneous operator splits as
//! `R_N(phi) = T_0 + sum_j V_j T_j + O(|v|^2)`, with lower-triangular Toeplitz
//! `T_j` and diagonal increment matrices `V_j`. If
//! `w * sum_j ||T_j T_0^{-1}|| < 1` for `w >= ||V||`, then
//! `||R_N(phi)^{-1}|| <= C0 / (1 - w * sum_j S_j)` and the scheme is zero
//! stable. Since `||V|| ~ ||phi'/phi|| / N`, this yields a step count `N*`
//! beyond which stability is certified.
//!
//! For BDF2 the deflated row is exactly quadratic in `v`, so the quadratic
//! condition `w S_1 + w^2 S_2 < 1` is used there.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::method::{bdf_variable_row, deflate_row, MethodSpec};
use crate::operators::row_log_norm;
use crate::poly::{max_residual, roots, SeriesQuotient};

/// Step-ratio interval `(0.836, 1.127)` known for BDF3 from Grigorieff's
/// analysis; reported next to the ramp-up interval for comparison.
pub const BDF3_GRIGORIEFF_INTERVAL: (f64, f64) = (0.836, 1.127);

/// Extraneous roots of `rho_R(z) = sum_j gamma_j z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraneousRoots {
    pub roots: Vec<Complex64>,
    /// Largest modulus (0 when there are no roots).
    pub q: f64,
    /// `max |rho_R(root)|`.
    pub residual: f64,
    /// `false` when another root coincides with a dominant one.
    pub dominant_simple: bool,
}

impl ExtraneousRoots {
    pub fn strongly_stable(&self) -> bool {
        self.q < 1.0
    }
}

/// Constant-step deflated row in the method's normalization.
fn constant_gamma(spec: &MethodSpec) -> Result<Vec<f64>> {
    let row = bdf_variable_row::<f64>(spec, &vec![1.0; spec.steps() - 1])?;
    Ok(deflate_row(&row)?.gamma)
}

pub fn extraneous_root_radius(spec: &MethodSpec) -> Result<ExtraneousRoots> {
    let gamma = constant_gamma(spec)?;
    let found = roots(&gamma)?;
    let q = found.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let residual = max_residual(&gamma, &found);
    let dominant_simple = found
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() >= q * (1.0 - 1e-9))
        .all(|(i, z)| {
            found
                .iter()
                .enumerate()
                .all(|(j, w)| i == j || (z - w).norm() > 1e-6)
        });
    Ok(ExtraneousRoots {
        roots: found,
        q,
        residual,
        dominant_simple,
    })
}

/// Limit of `||R_{k,N}(1)^{-1}||_inf` and its geometric upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct C0Estimate {
    pub c0: f64,
    /// `K = max_n |u_n| q^{-n}` over the computed terms.
    pub k_constant: f64,
    /// `K q / ((1 - q) alpha_k)`; equals `c0` when `q = 0`.
    pub geometric_bound: f64,
    pub q: f64,
    /// Number of `u_n` terms summed.
    pub terms: usize,
    /// `true` when the sequence decayed below `1e-16` before `n_probe` terms.
    pub converged: bool,
    pub dominant_simple: bool,
}

/// `C0 = ||u||_1 / alpha_k`.
///
/// `u` solves `rho_R(E) u = 0` with `u_1 = 1` and zero history, i.e. it is the
/// first column of the unit-diagonal inverse `(R_{k,N}(1) / alpha_k)^{-1}`.
/// The inverse is lower-triangular Toeplitz, so its widest row sum is
/// `sum |u_n|` in the limit. Summation stops once the last `k - 1` terms are
/// below `1e-16` (the tail is geometric with ratio `q`) or after `n_probe`
/// terms.
pub fn c0_constant(spec: &MethodSpec, n_probe: usize) -> Result<C0Estimate> {
    let roots = extraneous_root_radius(spec)?;
    if !roots.strongly_stable() {
        return Err(Error::NotStronglyStable(roots.q));
    }
    let gamma = constant_gamma(spec)?;
    let k = gamma.len();
    let lead = gamma[k - 1];
    let q = roots.q;

    let mut u: Vec<f64> = Vec::with_capacity(64);
    u.push(1.0);
    let mut converged = k == 1;
    while !converged && u.len() < n_probe.max(1) {
        let n = u.len();
        let mut acc = 0.0;
        for j in 0..k - 1 {
            // u index n - (k - 1) + j
            if let Some(idx) = (n + j).checked_sub(k - 1) {
                acc += gamma[j] * u[idx];
            }
        }
        u.push(-acc / lead);
        if u.len() >= k && u[u.len() - (k - 1)..].iter().all(|x| x.abs() < 1e-16) {
            converged = true;
        }
    }
    let sum: f64 = u.iter().map(|x| x.abs()).sum();
    let c0 = sum / lead;

    let (k_constant, geometric_bound) = if q == 0.0 {
        (1.0, c0)
    } else {
        let ln_q = Float::ln(q);
        let kc = u
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, x)| Float::exp(Float::ln(x.abs()) - (i + 1) as f64 * ln_q))
            .fold(0.0, f64::max);
        (kc, kc * q / ((1.0 - q) * lead))
    };
    Ok(C0Estimate {
        c0,
        k_constant,
        geometric_bound,
        q,
        terms: u.len(),
        converged,
        dominant_simple: roots.dominant_simple,
    })
}

/// Toeplitz stencils of the splitting `R = T_0 + sum_j V_j T_j (+ V^2 Q)`.
///
/// Stencils are stored lowest column first, diagonal last (the same layout as
/// matrix bands). `T_j` is the derivative of the deflated row with respect to
/// `v_j`, where `v_1` is the increment of the newest step ratio in the row
/// stencil, `v_2` the next older one, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSet {
    pub t: Vec<Vec<f64>>,
    /// BDF2 only: the `V^2` stencil (half the second derivative).
    pub quadratic: Option<Vec<f64>>,
}

impl PerturbationSet {
    pub fn t0(&self) -> &[f64] {
        &self.t[0]
    }

    /// `sum_{j >= 1} T_j`, the first-order term when all `v_j` are equal.
    pub fn linear_sum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.t[0].len()];
        for tj in &self.t[1..] {
            for (o, x) in out.iter_mut().zip(tj) {
                *o += x;
            }
        }
        out
    }

    /// Stencil of `T_0 + v sum_j T_j (+ v^2 Q)`.
    pub fn ramp_stencil(&self, v: f64) -> Vec<f64> {
        let lin = self.linear_sum();
        let mut out: Vec<f64> = self.t[0].iter().zip(&lin).map(|(a, b)| a + v * b).collect();
        if let Some(quad) = &self.quadratic {
            for (o, x) in out.iter_mut().zip(quad) {
                *o += v * v * x;
            }
        }
        out
    }
}

/// Deflated variable-step row at increments `v` (`v[0]` is `v_1`).
fn deflated_at(spec: &MethodSpec, v: &[f64]) -> Result<Vec<f64>> {
    let k = spec.steps();
    let ratios: Vec<f64> = (0..k - 1).map(|i| 1.0 + v[k - 2 - i]).collect();
    Ok(deflate_row(&bdf_variable_row(spec, &ratios)?)?.gamma)
}

/// Central differences with two Richardson levels; fails if the last two
/// extrapolants disagree by more than `1e-7`.
fn richardson<F>(mut estimate: F, h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let d0 = estimate(h)?;
    let d1 = estimate(h / 2.0)?;
    let d2 = estimate(h / 4.0)?;
    let r1: Vec<f64> = d1
        .iter()
        .zip(&d0)
        .map(|(a, b)| (4.0 * a - b) / 3.0)
        .collect();
    let r2: Vec<f64> = d2
        .iter()
        .zip(&d1)
        .map(|(a, b)| (4.0 * a - b) / 3.0)
        .collect();
    let gap = r1
        .iter()
        .zip(&r2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(gap <= 1e-7) {
        return Err(Error::DifferentiationFailed);
    }
    Ok(r2)
}

pub fn perturbation_matrices(spec: &MethodSpec) -> Result<PerturbationSet> {
    let k = spec.steps();
    let zero = vec![0.0; k - 1];
    let t0 = deflated_at(spec, &zero)?;
    let mut t = vec![t0.clone()];
    for j in 0..k - 1 {
        let tj = richardson(
            |h| {
                let mut plus = zero.clone();
                let mut minus = zero.clone();
                plus[j] = h;
                minus[j] = -h;
                let a = deflated_at(spec, &plus)?;
                let b = deflated_at(spec, &minus)?;
                Ok(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect())
            },
            1e-3,
        )?;
        t.push(tj);
    }
    let quadratic = if k == 2 {
        let second = richardson(
            |h| {
                let a = deflated_at(spec, &[h])?;
                let b = deflated_at(spec, &[-h])?;
                Ok(a.iter()
                    .zip(&b)
                    .zip(&t0)
                    .map(|((x, y), z)| (x - 2.0 * z + y) / (h * h))
                    .collect())
            },
            1e-2,
        )?;
        Some(second.into_iter().map(|x| x / 2.0).collect())
    } else {
        None
    };
    Ok(PerturbationSet { t, quadratic })
}

/// Symbol coefficients `sum_m stencil[b - m] z^m` (diagonal first).
fn symbol(stencil: &[f64]) -> Vec<f64> {
    stencil.iter().rev().copied().collect()
}

/// `||T_num T_den^{-1}||_inf` for semi-infinite lower-triangular Toeplitz
/// matrices: the l1 norm of the Taylor coefficients of the symbol quotient.
///
/// The coefficients decay like `q^m` (`q` = largest root modulus of the
/// denominator symbol's reversal); summation stops once the last window of
/// terms, extended geometrically, contributes less than `1e-15`.
pub fn toeplitz_product_norm(num: &[f64], den: &[f64], q: f64) -> Result<f64> {
    let n_sym = symbol(num);
    let d_sym = symbol(den);
    let window = d_sym.len().max(n_sym.len()).max(1);
    let tail_factor = if q < 1.0 {
        1.0 / (1.0 - q)
    } else {
        f64::INFINITY
    };
    let mut series = SeriesQuotient::new(&n_sym, &d_sym)?;
    let mut sum = 0.0;
    for m in 0..2_000_000usize {
        let c = series.next().unwrap_or(0.0);
        sum += c.abs();
        if m + 1 >= window {
            let terms = series.terms();
            let recent: f64 = terms[terms.len() - window..].iter().map(|x| x.abs()).sum();
            if recent * tail_factor < 1e-15 || recent == 0.0 && m + 1 >= 2 * window {
                return Ok(sum);
            }
        }
    }
    Err(Error::NotStronglyStable(q))
}

/// Ramp-up specialization: all increments equal to one `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct RampUp {
    /// Largest `v` with `m_inf[T_0 + v sum T_j] > 0` (`inf` if unbounded).
    pub v_max: f64,
    /// Lower end of the regime where no off-diagonal entry changes sign, so
    /// that `m_inf` is a single smooth expression on `(v_min, v_max)`
    /// (at least `-1`).
    pub v_min: f64,
    /// Smallest `v` with `m_inf > 0` (at least `-1`); never above `v_min`.
    pub v_min_dominance: f64,
    /// `ceil(regularity / v_max)`.
    pub n_star: usize,
    /// Constant step ratios `(1 + v_min, 1 + v_max)`.
    pub interval: (f64, f64),
}

/// `m_inf` of the ramp-up stencil at increment `v`.
pub fn ramp_up_log_norm(pert: &PerturbationSet, v: f64) -> f64 {
    row_log_norm(&pert.ramp_stencil(v))
}

/// Largest root in `(-1, 0)` of any off-diagonal ramp-up entry
/// `a + b v + c v^2`, or `-1`.
fn sign_change_below_zero(pert: &PerturbationSet) -> f64 {
    let lin = pert.linear_sum();
    let t0 = pert.t0();
    let off = t0.len() - 1;
    let mut best: f64 = -1.0;
    for i in 0..off {
        let (a, b) = (t0[i], lin[i]);
        let c = pert.quadratic.as_ref().map_or(0.0, |q| q[i]);
        let mut consider = |v: f64| {
            if v > -1.0 && v < 0.0 && v > best {
                best = v;
            }
        };
        if c == 0.0 {
            if b != 0.0 {
                consider(-a / b);
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let sq = Float::sqrt(disc);
                consider((-b + sq) / (2.0 * c));
                consider((-b - sq) / (2.0 * c));
            }
        }
    }
    best
}

/// Admissible ramp-up increments; `None` when `T_0` is not diagonally
/// dominant. `v -> m_inf[T_0 + v sum T_j]` is concave, so its positive set is
/// an interval whose ends are found by bisection.
pub fn ramp_up(pert: &PerturbationSet, regularity: f64) -> Option<RampUp> {
    let m = |v: f64| ramp_up_log_norm(pert, v);
    if !(m(0.0) > 0.0) {
        return None;
    }
    let v_max = {
        let mut hi = 1.0;
        while m(hi) > 0.0 && hi < 1e6 {
            hi *= 2.0;
        }
        if m(hi) > 0.0 {
            f64::INFINITY
        } else {
            bisect(|v| m(v) > 0.0, 0.0, hi)
        }
    };
    let v_min_dominance = if m(-1.0) > 0.0 {
        -1.0
    } else {
        -bisect(|v| m(-v) > 0.0, 0.0, 1.0)
    };
    let v_min = sign_change_below_zero(pert).max(v_min_dominance);
    Some(RampUp {
        v_max,
        v_min,
        v_min_dominance,
        n_star: step_threshold(regularity, v_max),
        interval: (1.0 + v_min, 1.0 + v_max),
    })
}

/// Boundary of `{x : inside(x)}` between `lo` (inside) and `hi` (outside).
fn bisect<F: Fn(f64) -> bool>(inside: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ceil(regularity / w)`, treating quotients within `1e-9` (relative) of an
/// integer as that integer so rounding noise cannot add a step.
pub fn step_threshold(regularity: f64, w: f64) -> usize {
    if regularity == 0.0 {
        return 0;
    }
    let x = regularity / w;
    let nearest = Float::round(x);
    let snapped = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest
    } else {
        Float::ceil(x)
    };
    snapped as usize
}

/// Overall outcome of [`stability_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Zero regularity: constant steps, stable for every `N`.
    StableAllN,
    /// Stable for every `N > n_star`.
    StableAboveNStar,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::StableAllN => "STABLE_ALL_N",
            Verdict::StableAboveNStar => "STABLE_ABOVE_N_STAR",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub k: usize,
    pub roots: ExtraneousRoots,
    pub c0: C0Estimate,
    /// `m_inf` of each stencil `T_0, T_1, ...`.
    pub m_inf: Vec<f64>,
    /// `S_j = ||T_j T_0^{-1}||_inf` for `j = 1..k-1`.
    pub s_norms: Vec<f64>,
    /// BDF2: `||Q T_0^{-1}||_inf` for the `V^2` term.
    pub s_quadratic: Option<f64>,
    /// Root of `w sum_j S_j = 1`.
    pub w_max_linear: f64,
    /// BDF2: root of `w S_1 + w^2 S_Q = 1`.
    pub w_max_quadratic: Option<f64>,
    /// The authoritative bound: quadratic when present, else linear.
    pub w_max: f64,
    pub regularity: f64,
    pub n_star: usize,
    /// `w` at which [`StabilityReport::c_phi_bound`] is evaluated (`w_max / 2`).
    pub c_phi_reference_w: f64,
    /// Bound on `||R_N(phi)^{-1}||_inf` for grids with `||V|| <= c_phi_reference_w`.
    pub c_phi_bound: f64,
    pub ramp_up: Option<RampUp>,
    /// BDF3: the comparison interval [`BDF3_GRIGORIEFF_INTERVAL`].
    pub reference_interval: Option<(f64, f64)>,
    pub verdict: Verdict,
}

impl StabilityReport {
    /// `C0 / (1 - w sum S_j)` (or `C0 / (1 - w S_1 - w^2 S_Q)`); `None` if
    /// `w >= w_max`.
    pub fn c_phi_at(&self, w: f64) -> Option<f64> {
        c_phi(self.c0.c0, &self.s_norms, self.s_quadratic, w)
    }
}

fn c_phi(c0: f64, s: &[f64], sq: Option<f64>, w: f64) -> Option<f64> {
    let lin: f64 = s.iter().sum();
    let denom = 1.0 - w * lin - w * w * sq.unwrap_or(0.0);
    (denom > 0.0).then(|| c0 / denom)
}

fn solve_w(lin: f64, quad: f64) -> f64 {
    if lin <= 0.0 && quad <= 0.0 {
        return f64::INFINITY;
    }
    let g = |w: f64| w * lin + w * w * quad < 1.0;
    let mut hi = if lin > 0.0 { 1.0 / lin } else { 1.0 };
    while g(hi) {
        hi *= 2.0;
    }
    bisect(g, 0.0, hi)
}

/// Computes the full certificate for a map with `||phi'/phi||_inf = regularity`.
pub fn stability_threshold(
    spec: &MethodSpec,
    pert: &PerturbationSet,
    regularity: f64,
) -> Result<StabilityReport> {
    if !(regularity >= 0.0) {
        return Err(Error::InvalidArgument("regularity must be nonnegative"));
    }
    if !regularity.is_finite() {
        return Err(Error::SingularRegularity);
    }
    let c0 = c0_constant(spec, 10_000_000)?;
    let roots = extraneous_root_radius(spec)?;
    let q = roots.q;
    let t0 = pert.t0();
    let m_inf = pert.t.iter().map(|s| row_log_norm(s)).collect();
    let s_norms = pert.t[1..]
        .iter()
        .map(|tj| toeplitz_product_norm(tj, t0, q))
        .collect::<Result<Vec<f64>>>()?;
    let s_quadratic = pert
        .quadratic
        .as_ref()
        .map(|qd| toeplitz_product_norm(qd, t0, q))
        .transpose()?;
    let lin: f64 = s_norms.iter().sum();
    let w_max_linear = solve_w(lin, 0.0);
    let w_max_quadratic = s_quadratic.map(|sq| solve_w(s_norms[0], sq));
    let w_max = w_max_quadratic.unwrap_or(w_max_linear);
    let n_star = step_threshold(regularity, w_max);
    let c_phi_reference_w = if w_max.is_finite() { w_max / 2.0 } else { 0.0 };
    let c_phi_bound =
        c_phi(c0.c0, &s_norms, s_quadratic, c_phi_reference_w).unwrap_or(f64::INFINITY);
    let ramp = ramp_up(pert, regularity);
    let verdict = if regularity == 0.0 {
        Verdict::StableAllN
    } else {
        Verdict::StableAboveNStar
    };
    Ok(StabilityReport {
        k: spec.steps(),
        roots,
        c0,
        m_inf,
        s_norms,
        s_quadratic,
        w_max_linear,
        w_max_quadratic,
        w_max,
        regularity,
        n_star,
        c_phi_reference_w,
        c_phi_bound,
        ramp_up: ramp,
        reference_interval: (spec.steps() == 3).then_some(BDF3_GRIGORIEFF_INTERVAL),
        verdict,
    })
}

/// BDF2 diagonal-dominance window for constant ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bdf2Window {
    pub lower: f64,
    pub upper: f64,
}

/// `(0, 1 + sqrt 2)`: where `m_inf[R_2] = (1 + 2r - r^2) / 2 > 0`.
pub fn bdf2_exact_ratio_bound() -> Bdf2Window {
    Bdf2Window {
        lower: 0.0,
        upper: 1.0 + core::f64::consts::SQRT_2,
    }
}

/// One-step extraneous amplification `r^2 / (1 + 2r)` at constant ratio `r`.
pub fn bdf2_amplification(r: f64) -> f64 {
    r * r / (1.0 + 2.0 * r)
}

/// `m_inf[R_2]` at constant ratio `r`.
pub fn bdf2_log_norm(r: f64) -> f64 {
    (1.0 + 2.0 * r - r * r) / 2.0
}

/// `N* = ||phi'/phi|| / sqrt 2` for BDF2 (unrounded).
pub fn bdf2_min_steps(regularity: f64) -> f64 {
    regularity / core::f64::consts::SQRT_2
}
