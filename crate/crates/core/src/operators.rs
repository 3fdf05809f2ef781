//! Banded lower-triangular operators.
//!
//! The homogeneous variable-step recursion over the unknowns `y_1..y_N` is the
//! system `H^{-1} A y = H^{-1} Y_0` with
//!
//! - `A`: row `i` holds the coefficient row whose newest node is `t_{i+1}`,
//! - `H = diag(h_0..h_{N-1})`,
//! - `R`: the deflated rows, so that `H^{-1} A = phi~^{-1} R D` with
//!   `phi~ = N H` and `D = N * bidiag(-1, 1)`.
//!
//! Rows that reach back past `t_0` are truncated; the missing columns belong
//! to the initial data on the right-hand side. Step ratios that involve steps
//! before `t_0` are taken as 1.
//!
//! Everything is stored band-by-row, never densely, and all norms are
//! infinity norms.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::method::{bdf_variable_row, deflate_row, MethodSpec};
use crate::scalar::Scalar;

/// Lower-triangular matrix with `bandwidth` nonzero subdiagonals.
///
/// Row `i` stores the entries for columns `i - bandwidth ..= i`, lowest column
/// first; positions left of column 0 are kept as zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedLowerMatrix<T = f64> {
    n: usize,
    bandwidth: usize,
    data: Vec<T>,
    stencil: Option<Vec<T>>,
}

impl<T: Scalar> BandedLowerMatrix<T> {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![T::zero(); n * (bandwidth + 1)],
            stencil: None,
        }
    }

    /// Lower-triangular Toeplitz matrix; the stencil's last entry is the diagonal.
    pub fn toeplitz(stencil: &[T], n: usize) -> Result<Self> {
        if stencil.is_empty() {
            return Err(Error::InvalidArgument("empty stencil"));
        }
        let b = stencil.len() - 1;
        let mut m = Self::zeros(n, b);
        for i in 0..n {
            let skip = b.saturating_sub(i);
            m.band_mut(i)[skip..].clone_from_slice(&stencil[skip..]);
        }
        m.stencil = Some(stencil.to_vec());
        Ok(m)
    }

    /// Builds the matrix row by row from full-length bands (`bandwidth + 1`
    /// entries, lowest column first). Entries left of column 0 are dropped.
    pub fn from_bands<F>(n: usize, bandwidth: usize, mut band: F) -> Result<Self>
    where
        F: FnMut(usize) -> Result<Vec<T>>,
    {
        let mut m = Self::zeros(n, bandwidth);
        for i in 0..n {
            let row = band(i)?;
            if row.len() != bandwidth + 1 {
                return Err(Error::DimensionMismatch {
                    expected: bandwidth + 1,
                    got: row.len(),
                });
            }
            let skip = bandwidth.saturating_sub(i);
            m.band_mut(i)[skip..].clone_from_slice(&row[skip..]);
        }
        m.detect_toeplitz();
        Ok(m)
    }

    /// Sets the Toeplitz flag when every row equals the first full row.
    fn detect_toeplitz(&mut self) {
        let b = self.bandwidth;
        if self.n <= b {
            return;
        }
        let stencil = self.band(b).to_vec();
        let same = (0..self.n).all(|i| {
            let skip = b.saturating_sub(i);
            self.band(i)[skip..] == stencil[skip..]
        });
        if same {
            self.stencil = Some(stencil);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn is_toeplitz(&self) -> bool {
        self.stencil.is_some()
    }

    pub fn stencil(&self) -> Option<&[T]> {
        self.stencil.as_deref()
    }

    pub fn band(&self, i: usize) -> &[T] {
        let w = self.bandwidth + 1;
        &self.data[i * w..(i + 1) * w]
    }

    fn band_mut(&mut self, i: usize) -> &mut [T] {
        let w = self.bandwidth + 1;
        &mut self.data[i * w..(i + 1) * w]
    }

    pub fn diagonal(&self, i: usize) -> &T {
        &self.band(i)[self.bandwidth]
    }

    /// Entry `(i, c)`; zero outside the band.
    pub fn get(&self, i: usize, c: usize) -> T {
        if c > i || i - c > self.bandwidth {
            T::zero()
        } else {
            self.band(i)[self.bandwidth - (i - c)].clone()
        }
    }

    /// Overwrites entry `(i, c)` inside the band. Clears the Toeplitz flag.
    pub fn set(&mut self, i: usize, c: usize, value: T) -> Result<()> {
        if c > i || i - c > self.bandwidth || i >= self.n {
            return Err(Error::InvalidArgument("entry outside the band"));
        }
        let b = self.bandwidth;
        self.band_mut(i)[b - (i - c)] = value;
        self.stencil = None;
        Ok(())
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let b = self.bandwidth;
        Ok((0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(b);
                (lo..=i).fold(T::zero(), |acc, c| {
                    acc + self.band(i)[b - (i - c)].clone() * x[c].clone()
                })
            })
            .collect())
    }

    /// Nonzero entries as `(row, column, value)`, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        let b = self.bandwidth;
        (0..self.n).flat_map(move |i| {
            let lo = i.saturating_sub(b);
            (lo..=i).filter_map(move |c| {
                let v = &self.band(i)[b - (i - c)];
                (!v.is_zero()).then_some((i, c, v))
            })
        })
    }

    pub fn to_f64(&self) -> BandedLowerMatrix<f64> {
        BandedLowerMatrix {
            n: self.n,
            bandwidth: self.bandwidth,
            data: self.data.iter().map(Scalar::to_f64_lossy).collect(),
            stencil: self
                .stencil
                .as_ref()
                .map(|s| s.iter().map(Scalar::to_f64_lossy).collect()),
        }
    }
}

/// Diagonal matrix, used for `H`, `phi~` and `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix<T = f64> {
    pub entries: Vec<T>,
}

impl<T: Scalar> DiagonalMatrix<T> {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn inf_norm(&self) -> T {
        self.entries
            .iter()
            .map(|x| x.abs())
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }
}

fn check_grid(spec: &MethodSpec, grid: &Grid) -> Result<()> {
    let k = spec.steps();
    if grid.len() < k + 1 {
        return Err(Error::GridTooShort {
            n: grid.len(),
            min: k + 1,
        });
    }
    Ok(())
}

/// Ratios of the row whose newest node is `t_{i+1}` (oldest to newest).
fn row_ratios(grid: &Grid, k: usize, i: usize) -> Vec<f64> {
    let r = grid.ratios();
    // stencil t_n..t_{n+k} with n = i + 1 - k; ratio m is h_{n+m+1} / h_{n+m}
    (0..k - 1)
        .map(|m| {
            let first = i as isize + 1 - k as isize + m as isize;
            if first >= 0 {
                r[first as usize]
            } else {
                1.0
            }
        })
        .collect()
}

/// Method matrix `A_N(phi)` (bandwidth `k`).
pub fn assemble_a(spec: &MethodSpec, grid: &Grid) -> Result<BandedLowerMatrix> {
    check_grid(spec, grid)?;
    let k = spec.steps();
    BandedLowerMatrix::from_bands(grid.len(), k, |i| {
        Ok(bdf_variable_row(spec, &row_ratios(grid, k, i))?.alpha)
    })
}

/// Extraneous operator `R_N(phi)`: deflated rows of `A_N(phi)` (bandwidth `k - 1`).
pub fn assemble_r(spec: &MethodSpec, grid: &Grid) -> Result<BandedLowerMatrix> {
    check_grid(spec, grid)?;
    let k = spec.steps();
    BandedLowerMatrix::from_bands(grid.len(), k - 1, |i| {
        let row = bdf_variable_row(spec, &row_ratios(grid, k, i))?;
        Ok(deflate_row(&row)?.gamma)
    })
}

/// Simple integrator `D_N = N * bidiag(-1, 1)`.
pub fn assemble_d<T: Scalar>(n: usize) -> Result<BandedLowerMatrix<T>> {
    if n == 0 {
        return Err(Error::GridTooShort { n, min: 1 });
    }
    let scale = T::from_usize(n).ok_or(Error::InvalidArgument("dimension too large"))?;
    BandedLowerMatrix::toeplitz(&[-scale.clone(), scale], n)
}

/// `H_N = diag(h_0..h_{N-1})`.
pub fn assemble_h(grid: &Grid) -> DiagonalMatrix {
    DiagonalMatrix {
        entries: grid.steps().to_vec(),
    }
}

/// `phi~ = N H_N` from the realized steps.
pub fn realized_density(grid: &Grid) -> DiagonalMatrix {
    let n = grid.len() as f64;
    DiagonalMatrix {
        entries: grid.steps().iter().map(|h| n * h).collect(),
    }
}

/// `|| H^{-1} A - phi~^{-1} R D ||_inf`.
///
/// Since `H phi~^{-1} = I / N` and `D / N` is the backward difference, this
/// is evaluated as `|| H^{-1} (A - R nabla) ||_inf`, which avoids scaling
/// every entry by `N` and dividing it out again.
pub fn factorization_residual(spec: &MethodSpec, grid: &Grid) -> Result<f64> {
    let a = assemble_a(spec, grid)?;
    let r = assemble_r(spec, grid)?;
    let h = grid.steps();
    let k = spec.steps();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let lo = i.saturating_sub(k);
        let mut row_sum = 0.0;
        for c in lo..=i {
            // (R nabla)_{i,c} = R_{i,c} - R_{i,c+1}
            let mut rd = r.get(i, c);
            if c < i {
                rd -= r.get(i, c + 1);
            }
            row_sum += (a.get(i, c) - rd).abs();
        }
        worst = worst.max(row_sum / h[i]);
    }
    Ok(worst)
}

/// Forward substitution, `O(N * bandwidth)`.
pub fn forward_solve<T: Scalar>(m: &BandedLowerMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    if rhs.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: rhs.len(),
        });
    }
    let mut x = rhs.to_vec();
    solve_in_place(m, &mut x, 0)?;
    Ok(x)
}

/// Solves in place, assuming `x[..start]` is zero (unit-vector columns).
fn solve_in_place<T: Scalar>(m: &BandedLowerMatrix<T>, x: &mut [T], start: usize) -> Result<()> {
    let b = m.bandwidth();
    for i in start..m.dim() {
        let band = m.band(i);
        let lo = i.saturating_sub(b).max(start);
        let mut acc = x[i].clone();
        for c in lo..i {
            acc = acc - band[b - (i - c)].clone() * x[c].clone();
        }
        let diag = &band[b];
        if diag.is_zero() {
            return Err(Error::ZeroDiagonal(i));
        }
        x[i] = acc / diag.clone();
    }
    Ok(())
}

/// `max_i sum_c |M_{i,c}|`.
pub fn inf_norm<T: Scalar>(m: &BandedLowerMatrix<T>) -> T {
    (0..m.dim())
        .map(|i| m.band(i).iter().fold(T::zero(), |acc, v| acc + v.abs()))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// `|| M^{-1} ||_inf`, computed exactly.
///
/// Toeplitz matrices use one solve: the inverse is Toeplitz with first
/// column `x = M^{-1} e_0`, its widest row is the last one, so the norm is
/// `sum |x_i|`. Otherwise every column `M^{-1} e_j` is solved and `|x_i|` is
/// accumulated into row `i` (absolute-column accumulation), `O(N^2 b)` time
/// and `O(N)` memory.
pub fn inverse_inf_norm<T: Scalar>(m: &BandedLowerMatrix<T>) -> Result<T> {
    let n = m.dim();
    if n == 0 {
        return Ok(T::zero());
    }
    if m.is_toeplitz() {
        let mut x = vec![T::zero(); n];
        x[0] = T::one();
        solve_in_place(m, &mut x, 0)?;
        return Ok(x.iter().fold(T::zero(), |acc, v| acc + v.abs()));
    }
    let mut row_sums = vec![T::zero(); n];
    let mut x = vec![T::zero(); n];
    for j in 0..n {
        for v in x[j..].iter_mut() {
            *v = T::zero();
        }
        x[j] = T::one();
        solve_in_place(m, &mut x, j)?;
        for (s, v) in row_sums[j..].iter_mut().zip(&x[j..]) {
            *s = s.clone() + v.abs();
        }
    }
    Ok(row_sums
        .into_iter()
        .fold(T::zero(), |a, b| if b > a { b } else { a }))
}

/// `|| M^{-1} ||_inf` row by row: row `i` of the inverse solves
/// `M^T y = e_i` on the leading `(i+1) x (i+1)` block by back substitution.
/// Same cost as the column route; kept as an independent cross-check.
pub fn inverse_inf_norm_rowwise<T: Scalar>(m: &BandedLowerMatrix<T>) -> Result<T> {
    let n = m.dim();
    let b = m.bandwidth();
    let mut best = T::zero();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        for c in (0..=i).rev() {
            // (M^T y)_c = sum_{r=c}^{min(c+b, i)} M_{r,c} y_r
            let mut acc = if c == i { T::one() } else { T::zero() };
            let hi = (c + b).min(i);
            for r in c + 1..=hi {
                acc = acc - m.get(r, c) * y[r].clone();
            }
            let diag = m.diagonal(c);
            if diag.is_zero() {
                return Err(Error::ZeroDiagonal(c));
            }
            y[c] = acc / diag.clone();
        }
        let s = y[..=i].iter().fold(T::zero(), |acc, v| acc + v.abs());
        if s > best {
            best = s;
        }
    }
    Ok(best)
}

/// Lower logarithmic max norm `m_inf[M] = min_i (M_ii - sum_{c != i} |M_ic|)`.
///
/// When positive, `|| M^{-1} ||_inf <= 1 / m_inf[M]`.
pub fn lower_log_norm_inf<T: Scalar>(m: &BandedLowerMatrix<T>) -> Option<T> {
    (0..m.dim())
        .map(|i| row_log_norm(m.band(i)))
        .fold(None, |acc: Option<T>, v| match acc {
            Some(a) if a <= v => Some(a),
            _ => Some(v),
        })
}

/// `diag - sum |off-diagonal|` for one band (diagonal last).
pub fn row_log_norm<T: Scalar>(band: &[T]) -> T {
    let (diag, off) = band.split_last().expect("band has a diagonal");
    off.iter().fold(diag.clone(), |acc, v| acc - v.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;
    use crate::scalar::Rational;

    #[test]
    fn bdf2_uniform_matrix_is_toeplitz() {
        let spec = MethodSpec::bdf(2).unwrap();
        let a = assemble_a(&spec, &Grid::uniform(5).unwrap()).unwrap();
        assert!(a.is_toeplitz());
        let s = a.stencil().unwrap();
        for (x, y) in s.iter().zip([0.5, -2.0, 1.5]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(a.get(0, 0), a.get(4, 4));
        assert_eq!(a.get(1, 0), -2.0);
        assert_eq!(a.get(4, 1), 0.0);
    }

    #[test]
    fn bdf1_is_bidiagonal() {
        let spec = MethodSpec::bdf(1).unwrap();
        let g = Grid::from_map(&GridMap::ExpRamp { c: 2.0 }, 20).unwrap();
        let a = assemble_a(&spec, &g).unwrap();
        assert_eq!(a.bandwidth(), 1);
        for i in 1..20 {
            assert_eq!(a.band(i), &[-1.0, 1.0]);
        }
        assert_eq!(a.band(0), &[0.0, 1.0]);
        assert!(factorization_residual(&spec, &g).unwrap() < 1e-13 * 20.0);
    }

    #[test]
    fn r_rows_at_constant_ratio() {
        let spec = MethodSpec::bdf(2).unwrap();
        let ratio = 1.3;
        let g = Grid::geometric(ratio, 12).unwrap();
        let r = assemble_r(&spec, &g).unwrap();
        for i in 2..12 {
            let band = r.band(i);
            assert!((band[0] + ratio * ratio / 2.0).abs() < 1e-14);
            assert!((band[1] - (1.0 + 2.0 * ratio) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn d_matrix() {
        let d = assemble_d::<Rational>(3).unwrap();
        assert_eq!(d.band(0), &[Rational::from_int(0), Rational::from_int(3)]);
        assert_eq!(d.band(2), &[Rational::from_int(-3), Rational::from_int(3)]);
        for n in [1, 10, 1000] {
            let d = assemble_d::<Rational>(n).unwrap();
            assert_eq!(inverse_inf_norm(&d).unwrap(), Rational::from_int(1));
        }
    }

    #[test]
    fn h_on_uniform_grid() {
        let h = assemble_h(&Grid::uniform(8).unwrap());
        assert!(h.entries.iter().all(|&x| x == 0.125));
    }

    #[test]
    fn zero_diagonal_is_reported() {
        let m = BandedLowerMatrix::toeplitz(&[1.0, 0.0], 3).unwrap();
        assert_eq!(
            forward_solve(&m, &[1.0, 1.0, 1.0]),
            Err(Error::ZeroDiagonal(0))
        );
        assert_eq!(inverse_inf_norm(&m), Err(Error::ZeroDiagonal(0)));
    }

    #[test]
    fn identity_solve() {
        let m = BandedLowerMatrix::toeplitz(&[0.0, 1.0], 4).unwrap();
        let rhs = [1.0, -2.0, 3.5, 0.25];
        assert_eq!(forward_solve(&m, &rhs).unwrap(), rhs.to_vec());
    }

    #[test]
    fn log_norms_of_extraneous_operators() {
        let r2 = BandedLowerMatrix::toeplitz(&[-0.5, 1.5], 10).unwrap();
        assert_eq!(lower_log_norm_inf(&r2), Some(1.0));
        assert!(row_log_norm(&[-0.25, 13.0 / 12.0, -23.0 / 12.0, 25.0 / 12.0]) < 0.0);
    }

    #[test]
    fn triplets_skip_zeros() {
        let m = BandedLowerMatrix::toeplitz(&[-1.0, 0.0, 2.0], 3).unwrap();
        let t: Vec<_> = m.triplets().map(|(i, c, v)| (i, c, *v)).collect();
        assert_eq!(t, vec![(0, 0, 2.0), (1, 1, 2.0), (2, 0, -1.0), (2, 2, 2.0)]);
    }
}
