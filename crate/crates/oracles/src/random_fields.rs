//! Seeded random band-limited fields built from explicit mode sums.

use num_complex::Complex64 as C64;
use rand::Rng;
use std::f64::consts::PI;

use swlab_core::field::{FieldState, Grid3};

fn mode_sum<R: Rng>(grid: &Grid3, rng: &mut R, band: i64, amp: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    for m0 in -band..=band {
        for m1 in -band..=band {
            for m2 in -band..=band {
                let m = [m0, m1, m2];
                let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
                for (idx, v) in out.iter_mut().enumerate() {
                    let p = grid.point(idx);
                    let ph: f64 = (0..3).map(|a| 2.0 * PI * m[a] as f64 * p[a] / grid.lengths[a]).sum();
                    *v += c * C64::new(ph.cos(), ph.sin());
                }
            }
        }
    }
    out
}

/// Real field with modes |m_j| ≤ band.
pub fn real_field<R: Rng>(grid: &Grid3, rng: &mut R, band: i64, amp: f64) -> Vec<f64> {
    mode_sum(grid, rng, band, amp).into_iter().map(|c| c.re).collect()
}

/// A state whose form and spinor parts use modes |m_j| ≤ band.
pub fn random_state<R: Rng>(grid: &Grid3, rng: &mut R, band: i64, amp: f64) -> FieldState {
    let mut s = FieldState::zero(grid);
    for j in 0..3 {
        s.a[j] = real_field(grid, rng, band, amp);
    }
    s.z = mode_sum(grid, rng, band, amp);
    s.w = mode_sum(grid, rng, band, amp);
    s
}

/// A co-closed real 1-form: the curl of a random field.
pub fn coclosed_form<R: Rng>(grid: &Grid3, rng: &mut R, band: i64, amp: f64) -> [Vec<f64>; 3] {
    let mut out = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for m0 in -band..=band {
        for m1 in -band..=band {
            for m2 in -band..=band {
                let k = [0, 1, 2].map(|a| 2.0 * PI * [m0, m1, m2][a] as f64 / grid.lengths[a]);
                let c: [C64; 3] = [0, 1, 2].map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp);
                // i k × c is divergence free
                let cross = [
                    k[1] * c[2] - k[2] * c[1],
                    k[2] * c[0] - k[0] * c[2],
                    k[0] * c[1] - k[1] * c[0],
                ];
                for idx in 0..grid.len() {
                    let p = grid.point(idx);
                    let ph: f64 = (0..3).map(|a| k[a] * p[a]).sum();
                    let e = C64::new(ph.cos(), ph.sin()) * C64::new(0.0, 1.0);
                    for j in 0..3 {
                        out[j][idx] += (cross[j] * e).re;
                    }
                }
            }
        }
    }
    out
}
