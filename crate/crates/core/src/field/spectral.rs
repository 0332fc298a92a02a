use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;

use super::{FieldState, Grid3};
use crate::fourier::{mode_index, signed_mode, Dft3};
use crate::Result;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Transform tables and band bookkeeping for one grid.
#[derive(Debug, Clone)]
pub(crate) struct Spectral {
    pub grid: Grid3,
    pub fine: [usize; 3],
    dft: Dft3,
    dft_fine: Dft3,
}

impl Spectral {
    pub fn new(grid: &Grid3) -> Self {
        let fine = grid.padded();
        Spectral {
            grid: grid.clone(),
            fine,
            dft: Dft3::new(grid.n),
            dft_fine: Dft3::new(fine),
        }
    }

    pub fn twisted(&self) -> [bool; 3] {
        self.grid.spin.map(|k| k == 1)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn fine_len(&self) -> usize {
        self.fine.iter().product()
    }

    fn split(&self, idx: usize, dims: [usize; 3]) -> [usize; 3] {
        let k = idx % dims[2];
        let j = (idx / dims[2]) % dims[1];
        let i = idx / (dims[1] * dims[2]);
        [i, j, k]
    }

    fn in_band(&self, idx: usize, twisted: [bool; 3]) -> bool {
        let m = self.split(idx, self.grid.n);
        (0..3).all(|a| twisted[a] || m[a] != self.grid.n[a] / 2)
    }

    fn band_filter(&self, c: &mut [C64], twisted: [bool; 3]) {
        for (idx, v) in c.iter_mut().enumerate() {
            if !self.in_band(idx, twisted) {
                *v = ZERO;
            }
        }
    }

    pub fn coeffs_real(&self, u: &[f64]) -> Vec<C64> {
        let mut c = self.dft.forward_real(u);
        self.band_filter(&mut c, [false; 3]);
        c
    }

    pub fn coeffs_spinor(&self, u: &[C64]) -> Vec<C64> {
        let mut c = self.dft.forward(u);
        self.band_filter(&mut c, self.twisted());
        c
    }

    pub fn values(&self, c: &[C64]) -> Vec<C64> {
        self.dft.inverse(c)
    }

    pub fn values_real(&self, c: &[C64]) -> Vec<f64> {
        self.dft.inverse(c).into_iter().map(|z| z.re).collect()
    }

    pub fn project_real(&self, u: &[f64]) -> Vec<f64> {
        self.values_real(&self.coeffs_real(u))
    }

    pub fn project_spinor(&self, u: &[C64]) -> Vec<C64> {
        self.values(&self.coeffs_spinor(u))
    }

    pub fn project_state(&self, s: &FieldState) -> Result<FieldState> {
        s.check_grid(&self.grid)?;
        Ok(FieldState {
            grid: self.grid.clone(),
            a: [0, 1, 2].map(|j| self.project_real(&s.a[j])),
            z: self.project_spinor(&s.z),
            w: self.project_spinor(&s.w),
        })
    }

    /// Wavenumbers of array index `idx` (N layout), with half-integer
    /// offsets along the twisted axes.
    pub fn kappa(&self, idx: usize, twisted: bool) -> [f64; 3] {
        let m = self.split(idx, self.grid.n);
        let tau = 2.0 * core::f64::consts::PI;
        [0, 1, 2].map(|a| {
            let mut k = signed_mode(m[a], self.grid.n[a]) as f64;
            if twisted && self.grid.spin[a] == 1 {
                k += 0.5;
            }
            tau * k / self.grid.lengths[a]
        })
    }

    pub fn deriv(&self, c: &[C64], axis: usize, twisted: bool) -> Vec<C64> {
        c.iter()
            .enumerate()
            .map(|(idx, v)| v * I * self.kappa(idx, twisted)[axis])
            .collect()
    }

    /// Values on the collocation grid of the band-limited function with
    /// coefficients `c` (N layout).
    pub fn to_fine(&self, c: &[C64]) -> Vec<C64> {
        let mut padded = vec![ZERO; self.fine_len()];
        let n = self.grid.n;
        for (idx, v) in c.iter().enumerate() {
            if *v == ZERO {
                continue;
            }
            let m = self.split(idx, n);
            let f = [0, 1, 2].map(|a| mode_index(signed_mode(m[a], n[a]), self.fine[a]));
            padded[(f[0] * self.fine[1] + f[1]) * self.fine[2] + f[2]] = *v;
        }
        self.dft_fine.inverse(&padded)
    }

    pub fn to_fine_real(&self, c: &[C64]) -> Vec<f64> {
        self.to_fine(c).into_iter().map(|z| z.re).collect()
    }

    /// Band-limited coefficients (N layout) of values on the collocation
    /// grid; modes outside the band are discarded.
    pub fn from_fine(&self, v: &[C64], twisted: [bool; 3]) -> Vec<C64> {
        let full = self.dft_fine.forward(v);
        let n = self.grid.n;
        let mut out = vec![ZERO; self.len()];
        for (fidx, val) in full.iter().enumerate() {
            let f = self.split(fidx, self.fine);
            let m = [0, 1, 2].map(|a| signed_mode(f[a], self.fine[a]));
            let mut keep = true;
            for a in 0..3 {
                let half = (n[a] / 2) as i64;
                let lo = if twisted[a] { -half } else { -half + 1 };
                if m[a] < lo || m[a] > half - 1 {
                    keep = false;
                }
            }
            if keep {
                let t = [0, 1, 2].map(|a| mode_index(m[a], n[a]));
                out[(t[0] * n[1] + t[1]) * n[2] + t[2]] = *val;
            }
        }
        out
    }

    pub fn from_fine_real(&self, v: &[f64]) -> Vec<C64> {
        let c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.from_fine(&c, [false; 3])
    }

    pub fn from_fine_spinor(&self, v: &[C64]) -> Vec<C64> {
        self.from_fine(v, self.twisted())
    }

    pub fn divergence(&self, m: &[Vec<f64>; 3]) -> Vec<f64> {
        let mut acc = vec![ZERO; self.len()];
        for (j, comp) in m.iter().enumerate() {
            let d = self.deriv(&self.coeffs_real(comp), j, false);
            for (x, y) in acc.iter_mut().zip(d) {
                *x += y;
            }
        }
        self.values_real(&acc)
    }

    pub fn gradient_coeffs(&self, c: &[C64]) -> [Vec<C64>; 3] {
        [0, 1, 2].map(|j| self.deriv(c, j, false))
    }

    /// Coefficients of ∗da from the coefficients of a.
    pub fn curl_coeffs(&self, ca: &[Vec<C64>; 3]) -> [Vec<C64>; 3] {
        let d = |comp: usize, axis: usize| self.deriv(&ca[comp], axis, false);
        let sub = |x: Vec<C64>, y: Vec<C64>| -> Vec<C64> { x.iter().zip(y).map(|(p, q)| p - q).collect() };
        [
            sub(d(2, 1), d(1, 2)),
            sub(d(0, 2), d(2, 0)),
            sub(d(1, 0), d(0, 1)),
        ]
    }

    /// Coefficients of the untwisted-connection Dirac operator Σ c(eʲ)∂ⱼ.
    pub fn dirac0_coeffs(&self, cz: &[C64], cw: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let dz = [0, 1, 2].map(|j| self.deriv(cz, j, true));
        let dw = [0, 1, 2].map(|j| self.deriv(cw, j, true));
        let n = self.len();
        let mut oz = vec![ZERO; n];
        let mut ow = vec![ZERO; n];
        for i in 0..n {
            oz[i] = I * dz[0][i] - dw[1][i] + I * dw[2][i];
            ow[i] = -I * dw[0][i] + dz[1][i] + I * dz[2][i];
        }
        (oz, ow)
    }

    /// ∫ conj(u)·v over the domain from N-layout coefficients.
    pub fn parseval(&self, cu: &[C64], cv: &[C64]) -> C64 {
        let s: C64 = cu.iter().zip(cv).map(|(u, v)| u.conj() * v).sum();
        s * self.grid.volume()
    }

    pub fn fine_cell_volume(&self) -> f64 {
        self.grid.volume() / self.fine_len() as f64
    }
}
