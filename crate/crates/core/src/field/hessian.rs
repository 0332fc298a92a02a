use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use super::functional::LinearOp;
use super::{FieldState, Grid3, PerturbationData, Spectral};
use crate::fourier::mode_index;
use crate::linalg::{max_asymmetry, sym_eigenvalues, symmetrize};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealKind {
    Const,
    Cos,
    Sin,
}

/// One element of the real orthonormal basis of the truncated space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    /// Component `comp` of the 1-form.
    Form { comp: usize, mode: [i64; 3], kind: RealKind },
    /// Spinor component `comp` (0 = z, 1 = w), real or imaginary multiple of
    /// the mode function.
    Spinor { comp: usize, mode: [i64; 3], imag: bool },
    /// The gauge (function) component.
    Function { mode: [i64; 3], kind: RealKind },
}

impl BasisLabel {
    pub fn is_spinor(&self) -> bool {
        matches!(self, BasisLabel::Spinor { .. })
    }
}

/// The extended Hessian K on a truncated real basis.
#[derive(Debug, Clone)]
pub struct Hessian {
    /// Entries ⟨e_i, K e_j⟩ as assembled, without symmetrization.
    pub matrix: DMatrix<f64>,
    pub labels: Vec<BasisLabel>,
    pub asymmetry: f64,
}

impl Hessian {
    pub fn symmetric(&self) -> DMatrix<f64> {
        symmetrize(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.symmetric())
    }

    /// The principal submatrix on the labels selected by `keep`.
    pub fn block(&self, keep: impl Fn(&BasisLabel) -> bool) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.labels.len()).filter(|&i| keep(&self.labels[i])).collect();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }
}

fn real_modes(c: i64) -> Vec<([i64; 3], RealKind)> {
    let mut out = vec![([0, 0, 0], RealKind::Const)];
    for m0 in -c..=c {
        for m1 in -c..=c {
            for m2 in -c..=c {
                let m = [m0, m1, m2];
                let first = m.iter().copied().find(|&x| x != 0);
                if first.is_some_and(|x| x > 0) {
                    out.push((m, RealKind::Cos));
                    out.push((m, RealKind::Sin));
                }
            }
        }
    }
    out
}

fn spinor_modes(c: i64, spin: [u8; 3]) -> Vec<[i64; 3]> {
    let r = |a: usize| if spin[a] == 1 { -c - 1..=c } else { -c..=c };
    let mut out = Vec::new();
    for m0 in r(0) {
        for m1 in r(1) {
            for m2 in r(2) {
                out.push([m0, m1, m2]);
            }
        }
    }
    out
}

/// Basis labels in assembly order: the three form components, the two
/// spinor components, then the function component.
pub fn basis_labels(grid: &Grid3, cutoff: usize) -> Result<Vec<BasisLabel>> {
    let c = cutoff as i64;
    for j in 0..3 {
        if 2 * (cutoff + 1) > grid.n[j] {
            return Err(Error::invalid(format!(
                "cutoff {cutoff} exceeds the band limit {} of axis {j}",
                grid.n[j] / 2 - 1
            )));
        }
    }
    let rm = real_modes(c);
    let mut labels = Vec::new();
    for comp in 0..3 {
        labels.extend(rm.iter().map(|&(mode, kind)| BasisLabel::Form { comp, mode, kind }));
    }
    let sm = spinor_modes(c, grid.spin);
    for comp in 0..2 {
        for &mode in &sm {
            labels.push(BasisLabel::Spinor { comp, mode, imag: false });
            labels.push(BasisLabel::Spinor { comp, mode, imag: true });
        }
    }
    labels.extend(rm.iter().map(|&(mode, kind)| BasisLabel::Function { mode, kind }));
    Ok(labels)
}

fn real_mode_values(grid: &Grid3, mode: [i64; 3], kind: RealKind) -> Vec<f64> {
    let v = grid.volume();
    let tau = 2.0 * core::f64::consts::PI;
    (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            let ph: f64 = (0..3).map(|a| tau * mode[a] as f64 * p[a] / grid.lengths[a]).sum();
            match kind {
                RealKind::Const => 1.0 / v.sqrt(),
                RealKind::Cos => (2.0 / v).sqrt() * ph.cos(),
                RealKind::Sin => (2.0 / v).sqrt() * ph.sin(),
            }
        })
        .collect()
}

fn spinor_mode_values(grid: &Grid3, mode: [i64; 3], imag: bool) -> Vec<C64> {
    let s = 1.0 / grid.volume().sqrt();
    let tau = 2.0 * core::f64::consts::PI;
    (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            let ph: f64 = (0..3).map(|a| tau * mode[a] as f64 * p[a] / grid.lengths[a]).sum();
            let u = C64::new(ph.cos(), ph.sin()) * s;
            if imag {
                u * C64::new(0.0, 1.0)
            } else {
                u
            }
        })
        .collect()
}

fn coeff_index(grid: &Grid3, mode: [i64; 3]) -> usize {
    grid.index([0, 1, 2].map(|a| mode_index(mode[a], grid.n[a])))
}

fn read_real(grid: &Grid3, c: &[C64], mode: [i64; 3], kind: RealKind) -> f64 {
    let v = grid.volume();
    let g = c[coeff_index(grid, mode)];
    match kind {
        RealKind::Const => v.sqrt() * g.re,
        RealKind::Cos => (2.0 * v).sqrt() * g.re,
        RealKind::Sin => -(2.0 * v).sqrt() * g.im,
    }
}

/// Assembles ⟨e_i, K e_j⟩ for the extended Hessian at `state` on all modes
/// with |m_j| ≤ cutoff (spinor modes on twisted axes run over
/// −cutoff−1..=cutoff so that the half-integer momenta are symmetric).
pub fn hessian_assemble(state: &FieldState, pert: &PerturbationData, cutoff: usize) -> Result<Hessian> {
    let grid = &state.grid;
    let labels = basis_labels(grid, cutoff)?;
    let op = LinearOp::new(state, pert)?;
    let sp = Spectral::new(grid);
    let n = labels.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (j, lab) in labels.iter().enumerate() {
        let mut dir = FieldState::zero(grid);
        let mut h = vec![0.0; grid.len()];
        match *lab {
            BasisLabel::Form { comp, mode, kind } => dir.a[comp] = real_mode_values(grid, mode, kind),
            BasisLabel::Spinor { comp, mode, imag } => {
                let v = spinor_mode_values(grid, mode, imag);
                if comp == 0 {
                    dir.z = v;
                } else {
                    dir.w = v;
                }
            }
            BasisLabel::Function { mode, kind } => h = real_mode_values(grid, mode, kind),
        }
        let (out, kh) = op.apply_extended(&dir, Some(&h))?;
        let ca = [0, 1, 2].map(|c| sp.coeffs_real(&out.a[c]));
        let cz = sp.coeffs_spinor(&out.z);
        let cw = sp.coeffs_spinor(&out.w);
        let ch = sp.coeffs_real(&kh);
        let sv = grid.volume().sqrt();
        for (i, row) in labels.iter().enumerate() {
            matrix[(i, j)] = match *row {
                BasisLabel::Form { comp, mode, kind } => read_real(grid, &ca[comp], mode, kind),
                BasisLabel::Spinor { comp, mode, imag } => {
                    let g = if comp == 0 { &cz } else { &cw }[coeff_index(grid, mode)];
                    sv * if imag { g.im } else { g.re }
                }
                BasisLabel::Function { mode, kind } => read_real(grid, &ch, mode, kind),
            };
        }
    }
    let asymmetry = max_asymmetry(&matrix);
    Ok(Hessian { matrix, labels, asymmetry })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_size() {
        let g = Grid3::torus3([6, 6, 6], [1, 0, 0]).unwrap();
        let l = basis_labels(&g, 1).unwrap();
        assert_eq!(l.len(), 27 * 3 + 4 * 9 * 4 + 27);
        assert!(basis_labels(&g, 3).is_err());
    }
}
