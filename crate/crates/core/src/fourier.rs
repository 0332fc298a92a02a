//! Separable discrete Fourier transforms on small periodic grids.
//!
//! Grids here have at most a few dozen points per axis, so a direct
//! O(n²)-per-line transform with a precomputed root table is adequate.
//! Arrays are stored with the last axis fastest: index (i·n₁ + j)·n₂ + k.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct Dft {
    n: usize,
    /// roots[k] = exp(−2πik/n)
    roots: Vec<C64>,
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let roots = (0..n)
            .map(|k| {
                let th = -2.0 * core::f64::consts::PI * k as f64 / n as f64;
                C64::new(th.cos(), th.sin())
            })
            .collect();
        Dft { n, roots }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// X_m = (1/n) Σ_j x_j e^{−2πijm/n}, so that x_j = Σ_m X_m e^{2πijm/n}.
    pub fn forward(&self, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        let scale = 1.0 / n as f64;
        for (m, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = C64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate().take(n) {
                acc += xj * self.roots[(j * m) % n];
            }
            *o = acc * scale;
        }
    }

    pub fn inverse(&self, c: &[C64], out: &mut [C64]) {
        let n = self.n;
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = C64::new(0.0, 0.0);
            for (m, cm) in c.iter().enumerate().take(n) {
                acc += cm * self.roots[(j * m) % n].conj();
            }
            *o = acc;
        }
    }
}

/// Three-dimensional transform built from per-axis transforms.
#[derive(Debug, Clone)]
pub struct Dft3 {
    dims: [usize; 3],
    axes: [Dft; 3],
}

impl Dft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        Dft3 {
            dims,
            axes: [Dft::new(dims[0]), Dft::new(dims[1]), Dft::new(dims[2])],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &[C64]) -> Vec<C64> {
        let mut buf = data.to_vec();
        for axis in 0..3 {
            self.apply_axis(&mut buf, axis, false);
        }
        buf
    }

    pub fn inverse(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut buf = coeffs.to_vec();
        for axis in 0..3 {
            self.apply_axis(&mut buf, axis, true);
        }
        buf
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<C64> {
        let c: Vec<C64> = data.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.forward(&c)
    }

    fn apply_axis(&self, buf: &mut [C64], axis: usize, inverse: bool) {
        let [n0, n1, n2] = self.dims;
        let n = self.dims[axis];
        let stride = match axis {
            0 => n1 * n2,
            1 => n2,
            _ => 1,
        };
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut out = vec![C64::new(0.0, 0.0); n];
        let (outer_a, outer_b) = match axis {
            0 => (n1, n2),
            1 => (n0, n2),
            _ => (n0, n1),
        };
        for a in 0..outer_a {
            for b in 0..outer_b {
                let base = match axis {
                    0 => a * n2 + b,
                    1 => a * n1 * n2 + b,
                    _ => (a * n1 + b) * n2,
                };
                for (t, l) in line.iter_mut().enumerate() {
                    *l = buf[base + t * stride];
                }
                if inverse {
                    self.axes[axis].inverse(&line, &mut out);
                } else {
                    self.axes[axis].forward(&line, &mut out);
                }
                for (t, o) in out.iter().enumerate() {
                    buf[base + t * stride] = *o;
                }
            }
        }
    }
}

/// Signed mode number of array index `j` on an axis of length `n`. For
/// even `n` the index n/2 maps to −n/2.
pub fn signed_mode(j: usize, n: usize) -> i64 {
    if j <= (n - 1) / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Array index of the signed mode `m` on an axis of length `n`.
pub fn mode_index(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_3d() {
        let dims = [4, 6, 5];
        let t = Dft3::new(dims);
        let data: Vec<C64> = (0..t.len())
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let back = t.inverse(&t.forward(&data));
        for (a, b) in data.iter().zip(back.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_on_its_index() {
        let n = 8;
        let d = Dft::new(n);
        let x: Vec<C64> = (0..n)
            .map(|j| {
                let th = 2.0 * core::f64::consts::PI * (-3.0) * j as f64 / n as f64;
                C64::new(th.cos(), th.sin())
            })
            .collect();
        let mut c = vec![C64::new(0.0, 0.0); n];
        d.forward(&x, &mut c);
        assert!((c[mode_index(-3, n)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(signed_mode(mode_index(-4, n), n), -4);
    }
}
