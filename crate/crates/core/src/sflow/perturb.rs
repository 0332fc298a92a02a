use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::linalg::{fit_line, max_abs, max_asymmetry, pinv_apply, sym_eigen};
use crate::{Error, Result};

fn check_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid(format!("{name} is not square")));
    }
    if max_asymmetry(m) > 1e-10 * (1.0 + max_abs(m)) {
        return Err(Error::invalid(format!("{name} is not symmetric")));
    }
    Ok(())
}

/// The second-order coefficient λ of the small eigenvalue λ(t) = λt² + O(t³)
/// of K₀ + tC, where ker K₀ = span v₀ and ⟨Cv₀, v₀⟩ = 0:
/// λ = −⟨c, K₀⁺c⟩ with c = Cv₀.
pub fn small_eig_quadratic(k0: &DMatrix<f64>, c: &DMatrix<f64>, tol: f64) -> Result<f64> {
    check_symmetric(k0, "K0")?;
    check_symmetric(c, "C")?;
    if c.nrows() != k0.nrows() {
        return Err(Error::invalid("K0 and C differ in size"));
    }
    let eig = sym_eigen(k0);
    let scale = eig.values.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
    let kernel: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i].abs() <= tol * scale)
        .collect();
    if kernel.len() != 1 {
        return Err(Error::precondition(format!(
            "K0 has a {}-dimensional kernel, expected 1",
            kernel.len()
        )));
    }
    let v0: DVector<f64> = eig.vectors.column(kernel[0]).into_owned();
    let cv = c * &v0;
    let first = v0.dot(&cv);
    if first.abs() > tol.sqrt() * (1.0 + max_abs(c)) {
        return Err(Error::precondition(format!("⟨C v0, v0⟩ = {first:e} does not vanish")));
    }
    let x = pinv_apply(k0, &cv, tol);
    Ok(-cv.dot(&x))
}

/// Fits λ(t)/t² ≈ a + b·t for the eigenvalue of K₀ + tC nearest zero.
/// Returns (a, rms residual of the fit relative to |a|).
pub fn fit_small_eigenvalue(k0: &DMatrix<f64>, c: &DMatrix<f64>, ts: &[f64]) -> Result<(f64, f64)> {
    if ts.len() < 3 || ts.iter().any(|&t| t == 0.0 || !t.is_finite()) {
        return Err(Error::invalid("need at least three nonzero parameters"));
    }
    let y: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let e = sym_eigen(&(k0 + c * t)).values;
            let l = e.iter().copied().fold(f64::INFINITY, |m, x| if x.abs() < m.abs() { x } else { m });
            l / (t * t)
        })
        .collect();
    let (a, _, rms) = fit_line(ts, &y);
    Ok((a, rms / a.abs().max(f64::MIN_POSITIVE)))
}

/// A finite model K(s) = K₀ + sC₁ + s²C₂ whose three small eigenvalues
/// split from a three-dimensional kernel of K₀.
#[derive(Debug, Clone, PartialEq)]
pub struct KuranishiModel {
    pub k0: DMatrix<f64>,
    pub c1: DMatrix<f64>,
    pub c2: DMatrix<f64>,
}

impl KuranishiModel {
    pub fn new(k0: DMatrix<f64>, c1: DMatrix<f64>, c2: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&k0, "K0")?;
        check_symmetric(&c1, "C1")?;
        check_symmetric(&c2, "C2")?;
        if c1.nrows() != k0.nrows() || c2.nrows() != k0.nrows() || k0.nrows() < 3 {
            return Err(Error::invalid("model blocks differ in size or are too small"));
        }
        Ok(KuranishiModel { k0, c1, c2 })
    }

    pub fn operator(&self, s: f64) -> DMatrix<f64> {
        &self.k0 + &self.c1 * s + &self.c2 * (s * s)
    }
}

/// Power laws λᵢ(s) ≈ cᵢ·s^{pᵢ} of the three small eigenvalues, ordered
/// as (smallest in modulus, positive, negative).
#[derive(Debug, Clone, PartialEq)]
pub struct KuranishiFit {
    pub exponents: [f64; 3],
    pub coefficients: [f64; 3],
    /// max |λ/(c s^p) − 1| over the samples, per branch.
    pub residuals: [f64; 3],
    /// Sampled branch values, one entry per s.
    pub branches: [Vec<f64>; 3],
}

pub fn kuranishi_triple(model: &KuranishiModel, s_values: &[f64]) -> Result<KuranishiFit> {
    if s_values.len() < 3 || s_values.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("need at least three positive s values"));
    }
    let mut branches: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut spectra = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let mut e = sym_eigen(&model.operator(s)).values;
        e.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        spectra.push(e);
    }
    let scale = spectra.iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
    if spectra.iter().all(|e| e[..3].iter().all(|x| x.abs() <= 1e-13 * scale)) {
        // uncoupled: the kernel persists
        for e in &spectra {
            for b in 0..3 {
                branches[b].push(e[b]);
            }
        }
        return Ok(KuranishiFit {
            exponents: [f64::INFINITY; 3],
            coefficients: [0.0; 3],
            residuals: [0.0; 3],
            branches,
        });
    }
    for (e, &s) in spectra.iter().zip(s_values) {
        let small = &e[..3];
        let (pos, neg): (Vec<f64>, Vec<f64>) = small[1..].iter().partition(|&&x| x > 0.0);
        if pos.len() != 1 || neg.len() != 1 {
            return Err(Error::Fit(format!(
                "at s = {s} the two larger small eigenvalues do not have opposite signs"
            )));
        }
        branches[0].push(small[0]);
        branches[1].push(pos[0]);
        branches[2].push(neg[0]);
    }
    let mut out = KuranishiFit {
        exponents: [0.0; 3],
        coefficients: [0.0; 3],
        residuals: [0.0; 3],
        branches: [Vec::new(), Vec::new(), Vec::new()],
    };
    let ls: Vec<f64> = s_values.iter().map(|s| s.ln()).collect();
    for (b, vals) in branches.iter().enumerate() {
        let sign = vals[0].signum();
        if vals.iter().any(|v| v.signum() != sign || *v == 0.0) {
            return Err(Error::Fit(format!("branch {b} changes sign over the samples")));
        }
        let lv: Vec<f64> = vals.iter().map(|v| v.abs().ln()).collect();
        let (icpt, p, _) = fit_line(&ls, &lv);
        let c = sign * icpt.exp();
        let r = s_values
            .iter()
            .zip(vals)
            .map(|(s, v)| (v / (c * s.powf(p)) - 1.0).abs())
            .fold(0.0, f64::max);
        if r > 0.05 {
            return Err(Error::Fit(format!(
                "branch {b} deviates from a power law by {:.1}%; the model is too coarse",
                100.0 * r
            )));
        }
        out.exponents[b] = p;
        out.coefficients[b] = c;
        out.residuals[b] = r;
    }
    out.branches = branches;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn coupled_kernel_example() {
        let k0 = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -2.0, 0.0]);
        let c = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        assert!((small_eig_quadratic(&k0, &c, 1e-12).unwrap() + 0.5).abs() < 1e-14);
    }
}
