use alloc::format;
use nalgebra::DMatrix;

use crate::linalg::{max_abs, max_asymmetry, sym_eigenvalues};
use crate::{Error, Result};

/// The reference operator K_(t,φ) and the value of ∫⟨D′φ̃, φ̃⟩_Re that
/// fixes the global sign.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiReference {
    pub op: DMatrix<f64>,
    pub dprime_integral: f64,
}

fn negative_count(m: &DMatrix<f64>, which: &str) -> Result<i64> {
    if m.nrows() != m.ncols() || max_asymmetry(m) > 1e-10 * (1.0 + max_abs(m)) {
        return Err(Error::invalid(format!("{which} is not a symmetric matrix")));
    }
    let e = sym_eigenvalues(m);
    let scale = e.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    if e.iter().any(|x| x.abs() <= 1e-12 * scale) {
        return Err(Error::precondition(format!("{which} is singular")));
    }
    Ok(e.iter().filter(|&&x| x < 0.0).count() as i64)
}

/// Spectral flow of the straight segment from `a` to `b`. In finite
/// dimensions this is the drop in the number of negative eigenvalues, so
/// any path with these endpoints gives the same value.
pub fn endpoint_flow(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<i64> {
    if a.shape() != b.shape() {
        return Err(Error::invalid("interpolation endpoints differ in size"));
    }
    Ok(negative_count(a, "start operator")? - negative_count(b, "end operator")?)
}

fn parity_sign(sf: i64) -> i64 {
    if sf.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// χʲ = Σᵢ (−1)^{SF(βᵢ, βⱼ)} anchored at the critical point `anchor`.
pub fn chi_relative(critical: &[DMatrix<f64>], anchor: usize) -> Result<i64> {
    if critical.is_empty() {
        return Ok(0);
    }
    let base = critical
        .get(anchor)
        .ok_or_else(|| Error::invalid(format!("anchor {anchor} out of range")))?;
    let mut sum = 0;
    for k in critical {
        sum += parity_sign(endpoint_flow(k, base)?);
    }
    Ok(sum)
}

/// χ = Σⱼ sign(βⱼ) with sign(βⱼ) = −sign(∫⟨D′φ̃,φ̃⟩_Re)·(−1)^{SF(βⱼ, φ)}.
pub fn chi_count(critical: &[DMatrix<f64>], reference: &ChiReference) -> Result<i64> {
    if critical.is_empty() {
        return Ok(0);
    }
    let i = reference.dprime_integral;
    if !(i != 0.0 && i.is_finite()) {
        return Err(Error::precondition("the reference integral must be finite and nonzero"));
    }
    let global = if i > 0.0 { -1 } else { 1 };
    let mut sum = 0;
    for k in critical {
        sum += global * parity_sign(endpoint_flow(k, &reference.op)?);
    }
    Ok(sum)
}
