//! Dense and banded linear algebra helpers shared by the spectral modules.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Eigen-decomposition of a symmetric matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column j is the unit eigenvector of `values[j]`.
    pub vectors: DMatrix<f64>,
}

pub fn sym_eigen(m: &DMatrix<f64>) -> SymEigen {
    let n = m.nrows();
    if n == 0 {
        return SymEigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    SymEigen { values, vectors }
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// ½(M + Mᵀ).
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Real 2n×2n form [[Re, −Im], [Im, Re]] of a complex n×n matrix.
pub fn realify(m: &DMatrix<C64>) -> DMatrix<f64> {
    let n = m.nrows();
    let c = m.ncols();
    let mut out = DMatrix::zeros(2 * n, 2 * c);
    for i in 0..n {
        for j in 0..c {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, c + j)] = -z.im;
            out[(n + i, j)] = z.im;
            out[(n + i, c + j)] = z.re;
        }
    }
    out
}

/// Multiplication by i on R²ⁿ = Cⁿ in the `realify` coordinates.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(n + i, i)] = 1.0;
        j[(i, n + i)] = -1.0;
    }
    j
}

/// Orthonormal basis of the column span, dropping directions whose
/// singular value falls below `tol` times the largest one.
pub fn orthonormal_columns(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > tol * smax)
        .collect();
    let mut out = DMatrix::zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Orthonormal basis of the null space of `m` (columns), using an
/// absolute singular-value threshold.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let gram = m.transpose() * m;
    let eig = sym_eigen(&gram);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.values[i] <= tol * tol).collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &eig.vectors.column(i));
    }
    out
}

/// Intersection of the column spans of two matrices with orthonormal
/// columns. Returns an orthonormal basis.
pub fn intersect_spans(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let d = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(d, 0);
    }
    let mut stacked = DMatrix::zeros(d, a.ncols() + b.ncols());
    stacked.view_mut((0, 0), (d, a.ncols())).copy_from(a);
    stacked
        .view_mut((0, a.ncols()), (d, b.ncols()))
        .copy_from(&(-b));
    let ns = null_space(&stacked, tol);
    let coeffs = ns.rows(0, a.ncols()).into_owned();
    orthonormal_columns(&(a * coeffs), 1e-8)
}

/// Solution of the dense linear system, failing on singular matrices.
pub fn solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::numerical("singular linear system"))
}

/// Symmetric pseudo-inverse applied to a vector, ignoring eigenvalues with
/// |λ| ≤ tol·max|λ|.
pub fn pinv_apply(m: &DMatrix<f64>, v: &DVector<f64>, tol: f64) -> DVector<f64> {
    let eig = sym_eigen(m);
    let lmax = eig.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut out = DVector::zeros(m.nrows());
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam.abs() > tol * lmax {
            let col = eig.vectors.column(j);
            out += col * (col.dot(v) / lam);
        }
    }
    out
}

/// Eigenpair of a dense symmetric matrix nearest to `shift`, by inverse
/// iteration with a Rayleigh-quotient stopping test.
pub fn shift_invert_nearest(
    m: &DMatrix<f64>,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, DVector<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    let mut shifted = symmetrize(m);
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let lu = shifted.lu();
    let mut x = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919 % 101) as f64 / 101.0));
    x /= x.norm();
    let mut lambda = f64::NAN;
    for _ in 0..max_iter {
        let mut y = lu
            .solve(&x)
            .ok_or_else(|| Error::numerical("shift coincides with an eigenvalue"))?;
        let ny = y.norm();
        if !ny.is_finite() || ny == 0.0 {
            return Err(Error::numerical("inverse iteration broke down"));
        }
        y /= ny;
        let my = m * &y;
        let next = y.dot(&my);
        let resid = (&my - &y * next).norm();
        x = y;
        lambda = next;
        if resid <= tol * (1.0 + next.abs()) {
            return Ok((lambda, x));
        }
    }
    Err(Error::numerical(alloc::format!(
        "inverse iteration did not converge (last Rayleigh quotient {lambda})"
    )))
}

/// Matrix exponential by scaling and squaring of a Taylor polynomial.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.abs().row_sum().max();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * scale;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut out = term.clone();
    for k in 1..=18 {
        term = &term * &a / k as f64;
        out += &term;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}

/// Symmetric banded matrix stored by lower diagonals: `band[k][i]` is
/// entry (i + k, i).
#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    pub n: usize,
    pub band: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        SymBanded {
            n,
            band: (0..=half_bandwidth).map(|k| vec![0.0; n.saturating_sub(k)]).collect(),
        }
    }

    pub fn half_bandwidth(&self) -> usize {
        self.band.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k > self.half_bandwidth() {
            0.0
        } else {
            self.band[k][c]
        }
    }

    /// Adds `v` to entries (i, j) and (j, i) together.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        assert!(k <= self.half_bandwidth(), "entry outside the band");
        self.band[k][c] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.band[0][i] * x[i];
        }
        for k in 1..self.band.len() {
            for c in 0..self.n - k {
                let v = self.band[k][c];
                y[c + k] += v * x[c];
                y[c] += v * x[c + k];
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// self − s·other, both with the same layout.
    pub fn axpy(&self, s: f64, other: &SymBanded) -> SymBanded {
        let hb = self.half_bandwidth().max(other.half_bandwidth());
        let mut out = SymBanded::zeros(self.n, hb);
        for k in 0..=hb {
            for c in 0..self.n.saturating_sub(k) {
                let a = if k < self.band.len() { self.band[k][c] } else { 0.0 };
                let b = if k < other.band.len() { other.band[k][c] } else { 0.0 };
                out.band[k][c] = a - s * b;
            }
        }
        out
    }
}

/// Banded Cholesky factor L (lower, same band layout) of an SPD matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    l: SymBanded,
}

impl BandedCholesky {
    pub fn factor(a: &SymBanded) -> Result<Self> {
        let n = a.n;
        let hb = a.half_bandwidth();
        let mut l = a.clone();
        for j in 0..n {
            let mut d = l.band[0][j];
            let k0 = j.saturating_sub(hb);
            for k in k0..j {
                let v = l.band[j - k][k];
                d -= v * v;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::numerical("banded matrix is not positive definite"));
            }
            let dj = d.sqrt();
            l.band[0][j] = dj;
            for i in j + 1..(j + hb + 1).min(n) {
                let mut s = l.band[i - j][j];
                let k0 = i.saturating_sub(hb);
                for k in k0..j {
                    s -= l.band[i - k][k] * l.band[j - k][k];
                }
                l.band[i - j][j] = s / dj;
            }
        }
        Ok(BandedCholesky { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.n;
        let hb = self.l.half_bandwidth();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(hb)..i {
                s -= self.l.band[i - k][k] * y[k];
            }
            y[i] = s / self.l.band[0][i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + hb + 1).min(n) {
                s -= self.l.band[k - i][i] * y[k];
            }
            y[i] = s / self.l.band[0][i];
        }
        y
    }
}

/// Smallest eigenvalue of the pencil S x = λ M x with S positive
/// semidefinite and M positive definite, both banded. Inverse iteration on
/// S − σM for a shift σ below the spectrum.
pub fn banded_pencil_smallest(
    s: &SymBanded,
    m: &SymBanded,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    let n = s.n;
    let chol = BandedCholesky::factor(&s.axpy(shift, m))?;
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * (((i * 2654435761) % 1000) as f64 / 1000.0))
        .collect();
    let mut lambda = f64::NAN;
    for _ in 0..max_iter {
        let mx = m.mul_vec(&x);
        let mut y = chol.solve(&mx);
        let my = m.mul_vec(&y);
        let norm = dot(&y, &my).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::numerical("pencil inverse iteration broke down"));
        }
        for v in y.iter_mut() {
            *v /= norm;
        }
        let sy = s.mul_vec(&y);
        let my = m.mul_vec(&y);
        let next = dot(&y, &sy);
        let resid: f64 = sy
            .iter()
            .zip(my.iter())
            .map(|(a, b)| (a - next * b) * (a - next * b))
            .sum::<f64>()
            .sqrt();
        let converged = lambda.is_finite() && (next - lambda).abs() <= tol * next.abs().max(1e-300);
        x = y;
        lambda = next;
        if converged && resid <= 1e3 * tol.sqrt() * (1.0 + next.abs()) {
            return Ok((lambda, x));
        }
    }
    Err(Error::numerical(alloc::format!(
        "pencil inverse iteration did not converge (last value {lambda})"
    )))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e` (Sturm sequence count).
pub fn tridiag_count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 { f64::EPSILON * (1.0 + e[i - 1].abs()) } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by bisection on
/// the Sturm count.
pub fn tridiag_smallest(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tridiag_count_below(d, e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gauss-Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..n.div_ceil(2) {
        let mut z = (pi * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// (P_n(x), P_n'(x)).
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = if (1.0 - x * x).abs() < 1e-300 {
        let nf = n as f64;
        0.5 * nf * (nf + 1.0) * if x > 0.0 { 1.0 } else if n % 2 == 0 { -1.0 } else { 1.0 }
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, d)
}

/// Least-squares line fit y ≈ a + b·x. Returns (a, b, rms residual).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(u, v)| (v - a - b * u) * (v - a - b * u))
        .sum::<f64>()
        / n)
        .sqrt();
    (a, b, rms)
}
