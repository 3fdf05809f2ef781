//! Real polynomials: evaluation, roots and power-series quotients.
//!
//! Coefficients are stored in ascending order, `p(z) = sum_i c_i z^i`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};

/// Horner evaluation at a complex point.
pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::zero(), |acc, &c| acc * z + c)
}

/// `(p(z), p'(z))` by Horner.
fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn degree(coeffs: &[f64]) -> Result<usize> {
    let n = coeffs
        .len()
        .checked_sub(1)
        .ok_or(Error::InvalidArgument("empty polynomial"))?;
    if coeffs[n] == 0.0 {
        return Err(Error::VanishingLeading(n));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("non-finite polynomial coefficient"));
    }
    Ok(n)
}

/// All complex roots, sorted by decreasing modulus then argument.
///
/// Eigenvalues of the companion matrix by the Francis double-shift QR
/// iteration, each polished by Newton steps. If QR fails to converge the
/// Aberth iteration is tried before giving up.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = degree(coeffs)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut found = match companion_roots(coeffs) {
        Some(r) => r,
        None => aberth(coeffs)?,
    };
    for z in found.iter_mut() {
        *z = polish(coeffs, *z);
    }
    sort_roots(&mut found);
    Ok(found)
}

fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(
                a.arg()
                    .partial_cmp(&b.arg())
                    .unwrap_or(core::cmp::Ordering::Equal),
            )
    });
}

/// Newton steps, kept only while the residual improves.
fn polish(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    let mut res = eval(coeffs, z).norm();
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(coeffs, z);
        if dp.is_zero() || res == 0.0 {
            break;
        }
        let next = z - p / dp;
        let next_res = eval(coeffs, next).norm();
        if !(next_res < res) {
            break;
        }
        z = next;
        res = next_res;
    }
    z
}

/// Largest residual `|p(z)|` over the given points.
pub fn max_residual(coeffs: &[f64], roots: &[Complex64]) -> f64 {
    roots
        .iter()
        .map(|&z| eval(coeffs, z).norm())
        .fold(0.0, f64::max)
}

/// Companion-matrix eigenvalues; `None` when QR does not converge.
fn companion_roots(coeffs: &[f64]) -> Option<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    // 1-based upper Hessenberg storage.
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for j in 1..=n {
        a[1][j] = -coeffs[n - j] / lead;
    }
    for i in 2..=n {
        a[i][i - 1] = 1.0;
    }
    let (wr, wi) = hqr(&mut a, n)?;
    Some(
        wr.into_iter()
            .zip(wi)
            .skip(1)
            .map(|(re, im)| Complex64::new(re, im))
            .collect(),
    )
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of a 1-based upper Hessenberg matrix (EISPACK `hqr`).
#[allow(clippy::many_single_char_names, clippy::needless_range_loop)]
fn hqr(a: &mut [Vec<f64>], n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize;
    let mut t = 0.0;
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
            } else {
                y = a[nu - 1][nu - 1];
                w = a[nu][nu - 1] * a[nu - 1][nu];
                if l == nu - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nu - 1] = x + z;
                        wr[nu] = x + z;
                        if z != 0.0 {
                            wr[nu] = x - w / z;
                        }
                        wi[nu - 1] = 0.0;
                        wi[nu] = 0.0;
                    } else {
                        wr[nu - 1] = x + p;
                        wr[nu] = x + p;
                        wi[nu - 1] = -z;
                        wi[nu] = z;
                    }
                    nn -= 2;
                } else {
                    if its == 60 {
                        return None;
                    }
                    if its == 10 || its == 20 || its == 40 {
                        t += x;
                        for i in 1..=nu {
                            a[i][i] -= x;
                        }
                        let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nu - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nu {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nu - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nu - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nu < k + 3 { nu } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nu - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 1 || l as isize >= nn - 1 {
                break;
            }
        }
    }
    Some((wr, wi))
}

/// Simultaneous Aberth iteration.
///
/// Starts on a circle of radius given by the Cauchy bound; on stagnation the
/// starting angle is rotated (deterministically) and the iteration restarted.
pub fn aberth(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = degree(coeffs)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
    let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
    for attempt in 0..4 {
        let offset = 0.4 + 0.7 * attempt as f64;
        let mut z: Vec<Complex64> = (0..n)
            .map(|i| {
                let theta = 2.0 * core::f64::consts::PI * i as f64 / n as f64 + offset;
                Complex64::from_polar(0.5 * radius, theta)
            })
            .collect();
        for _ in 0..500 {
            let mut largest_step: f64 = 0.0;
            for i in 0..n {
                let (p, dp) = eval_with_derivative(coeffs, z[i]);
                if p.is_zero() {
                    continue;
                }
                let ratio = p / dp;
                let repulsion: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                    .sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if step.is_finite() {
                    z[i] -= step;
                    largest_step = largest_step.max(step.norm() / z[i].norm().max(1.0));
                }
            }
            if largest_step < 1e-15 {
                break;
            }
        }
        if max_residual(coeffs, &z) <= 1e-13 * scale.max(1.0) * Float::powi(radius, n as i32) {
            for zi in z.iter_mut() {
                *zi = polish(coeffs, *zi);
            }
            sort_roots(&mut z);
            return Ok(z);
        }
    }
    Err(Error::RootsDidNotConverge)
}

/// Taylor coefficients of `num(z) / den(z)` about `z = 0`.
///
/// Yields terms one at a time so callers decide where to stop; `den[0]` must
/// be nonzero.
pub struct SeriesQuotient<'a> {
    num: &'a [f64],
    den: &'a [f64],
    terms: Vec<f64>,
}

impl<'a> SeriesQuotient<'a> {
    pub fn new(num: &'a [f64], den: &'a [f64]) -> Result<Self> {
        match den.first() {
            Some(d) if *d != 0.0 => Ok(Self {
                num,
                den,
                terms: Vec::new(),
            }),
            _ => Err(Error::ZeroDiagonal(0)),
        }
    }

    /// Terms produced so far.
    pub fn terms(&self) -> &[f64] {
        &self.terms
    }
}

impl Iterator for SeriesQuotient<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let m = self.terms.len();
        let mut acc = self.num.get(m).copied().unwrap_or(0.0);
        for i in 1..self.den.len().min(m + 1) {
            acc -= self.den[i] * self.terms[m - i];
        }
        let c = acc / self.den[0];
        self.terms.push(c);
        Some(c)
    }
}
