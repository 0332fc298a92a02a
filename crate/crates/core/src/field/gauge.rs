use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use super::{FieldState, Spectral};
use crate::clifford::{quaternion_j, Spinor2};
use crate::fourier::{mode_index, signed_mode};
use crate::{Error, Result};

/// A gauge transformation u: Y → S¹.
#[derive(Debug, Clone, PartialEq)]
pub enum GaugeElement {
    /// u = exp(i h) for a real function h given by grid values.
    Exp(Vec<f64>),
    /// u = exp(i Σ n_j 2π x_j / ℓ_j).
    Winding([i64; 3]),
}

/// (a, χ) ↦ (a − u⁻¹du/i, uχ).
pub fn gauge_apply(g: &GaugeElement, state: &FieldState) -> Result<FieldState> {
    state.validate()?;
    let grid = &state.grid;
    let sp = Spectral::new(grid);
    let mut out = state.clone();
    match g {
        GaugeElement::Exp(h) => {
            if h.len() != grid.len() {
                return Err(Error::GridMismatch("gauge function does not match the grid".into()));
            }
            let ch = sp.coeffs_real(h);
            let grad = sp.gradient_coeffs(&ch);
            for j in 0..3 {
                let dh = sp.values_real(&grad[j]);
                for (x, d) in out.a[j].iter_mut().zip(dh) {
                    *x -= d;
                }
            }
            let hv = sp.values_real(&ch);
            for i in 0..grid.len() {
                let u = C64::new(hv[i].cos(), hv[i].sin());
                out.z[i] *= u;
                out.w[i] *= u;
            }
        }
        GaugeElement::Winding(n) => {
            for j in 0..3 {
                if n[j] != 0 && !grid.is_closed_direction(j) {
                    return Err(Error::invalid(format!("axis {j} is not closed; no winding gauge")));
                }
                let shift = n[j] as f64 * 2.0 * core::f64::consts::PI / grid.lengths[j];
                for x in out.a[j].iter_mut() {
                    *x -= shift;
                }
            }
            out.z = shift_modes(&sp, &state.z, *n);
            out.w = shift_modes(&sp, &state.w, *n);
        }
    }
    Ok(out)
}

/// Multiplication by exp(i n·x) as a shift of spinor modes; modes pushed
/// outside the band are dropped.
fn shift_modes(sp: &Spectral, v: &[C64], n: [i64; 3]) -> Vec<C64> {
    let g = &sp.grid;
    let c = sp.coeffs_spinor(v);
    let tw = sp.twisted();
    let mut out = vec![C64::new(0.0, 0.0); c.len()];
    for (idx, val) in c.iter().enumerate() {
        let m = g.multi_index(idx);
        let mut t = [0usize; 3];
        let mut keep = true;
        for a in 0..3 {
            let s = signed_mode(m[a], g.n[a]) + n[a];
            let half = (g.n[a] / 2) as i64;
            let lo = if tw[a] { -half } else { -half + 1 };
            if s < lo || s > half - 1 {
                keep = false;
            }
            t[a] = mode_index(s, g.n[a]);
        }
        if keep {
            out[g.index(t)] = *val;
        }
    }
    sp.values(&out)
}

/// The involution (a, ψ) ↦ (−a, Jψ). On the stored periodic part this is
/// χ ↦ e^{−2iθ}Jχ, with θ the twist phase.
pub fn sigma_involution(state: &FieldState) -> Result<FieldState> {
    state.validate()?;
    let g = &state.grid;
    let mut out = state.clone();
    for c in out.a.iter_mut() {
        for x in c.iter_mut() {
            *x = -*x;
        }
    }
    for i in 0..g.len() {
        let p = g.point(i);
        let theta: f64 = (0..3)
            .map(|j| g.spin[j] as f64 * core::f64::consts::PI * p[j] / g.lengths[j])
            .sum();
        let ph = C64::new((2.0 * theta).cos(), -(2.0 * theta).sin());
        let s = quaternion_j(Spinor2::new(state.z[i], state.w[i]));
        out.z[i] = s.z * ph;
        out.w[i] = s.w * ph;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::Grid3;
    use super::*;

    #[test]
    fn winding_shifts_connection() {
        let g = Grid3::torus3([4, 4, 4], [0, 0, 0]).unwrap();
        let s = FieldState::zero(&g);
        let t = gauge_apply(&GaugeElement::Winding([1, 0, 0]), &s).unwrap();
        assert!(t.a[0].iter().all(|x| (x + 1.0).abs() < 1e-15));
        let id = gauge_apply(&GaugeElement::Exp(vec![0.0; g.len()]), &s).unwrap();
        assert_eq!(id, s);
    }
}
