//! Direct trigonometric evaluation of band-limited fields and a midpoint
//! rule for the perturbed functional on a twice refined grid.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use swlab_core::field::{transverse_axes, FieldState, Grid3, PerturbationData};

/// A trigonometric polynomial Σ c_m e^{i κ(m)·x} with κ_j = 2π(m_j + s_j)/ℓ_j.
pub struct Trig {
    terms: Vec<([f64; 3], C64)>,
}

impl Trig {
    /// Interpolates grid values with the band convention of the fields:
    /// untwisted axes drop the Nyquist mode, twisted axes keep all modes
    /// and carry the shift ½.
    pub fn interpolate(grid: &Grid3, values: &[C64], twisted: [bool; 3]) -> Trig {
        let n = grid.n;
        let ranges: Vec<Vec<i64>> = (0..3)
            .map(|a| {
                let h = (n[a] / 2) as i64;
                if twisted[a] {
                    (-h..h).collect()
                } else {
                    (-h + 1..h).collect()
                }
            })
            .collect();
        let total = grid.len() as f64;
        let mut terms = Vec::new();
        for &m0 in &ranges[0] {
            for &m1 in &ranges[1] {
                for &m2 in &ranges[2] {
                    let m = [m0, m1, m2];
                    let mut acc = C64::new(0.0, 0.0);
                    for (idx, v) in values.iter().enumerate() {
                        let p = grid.point(idx);
                        let ph: f64 = (0..3).map(|a| 2.0 * PI * m[a] as f64 * p[a] / grid.lengths[a]).sum();
                        acc += v * C64::new(ph.cos(), -ph.sin());
                    }
                    let k = [0, 1, 2].map(|a| {
                        let s = if twisted[a] { 0.5 } else { 0.0 };
                        2.0 * PI * (m[a] as f64 + s) / grid.lengths[a]
                    });
                    terms.push((k, acc / total));
                }
            }
        }
        Trig { terms }
    }

    pub fn interpolate_real(grid: &Grid3, values: &[f64]) -> Trig {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Trig::interpolate(grid, &v, [false; 3])
    }

    /// Value of e^{−iθ}·(the function) where θ is the shift phase; for
    /// untwisted data this is the plain value.
    pub fn value(&self, x: [f64; 3], shift: [f64; 3]) -> C64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let ph: f64 = (0..3).map(|a| (k[a] - shift[a]) * x[a]).sum();
                c * C64::new(ph.cos(), ph.sin())
            })
            .sum()
    }

    /// e^{−iθ}∂_axis of the function.
    pub fn deriv(&self, x: [f64; 3], shift: [f64; 3], axis: usize) -> C64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let ph: f64 = (0..3).map(|a| (k[a] - shift[a]) * x[a]).sum();
                c * C64::new(0.0, k[axis]) * C64::new(ph.cos(), ph.sin())
            })
            .sum()
    }
}

fn clifford(j: usize) -> [[C64; 2]; 2] {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match j {
        0 => [[i, o], [o, -i]],
        1 => [[o, -one], [one, o]],
        _ => [[o, i], [i, o]],
    }
}

fn apply(m: &[[C64; 2]; 2], v: [C64; 2]) -> [C64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// The perturbed functional by the midpoint rule on the 2N grid, with all
/// fields evaluated from their trigonometric interpolants.
pub fn midpoint_csd(state: &FieldState, pert: &PerturbationData) -> f64 {
    let g = &state.grid;
    let tw = g.spin.map(|k| k == 1);
    let a: Vec<Trig> = (0..3).map(|j| Trig::interpolate_real(g, &state.a[j])).collect();
    let m: Vec<Trig> = (0..3).map(|j| Trig::interpolate_real(g, &pert.mu[j])).collect();
    let f = Trig::interpolate_real(g, &pert.f);
    let z = Trig::interpolate(g, &state.z, tw);
    let w = Trig::interpolate(g, &state.w, tw);
    let shift = [0, 1, 2].map(|j| if tw[j] { PI / g.lengths[j] } else { 0.0 });
    let none = [0.0; 3];
    let fine = g.n.map(|n| 2 * n);
    let h = [0, 1, 2].map(|j| g.lengths[j] / fine[j] as f64);
    let dv = h[0] * h[1] * h[2];
    let mut total = 0.0;
    for i0 in 0..fine[0] {
        for i1 in 0..fine[1] {
            for i2 in 0..fine[2] {
                let x = [
                    (i0 as f64 + 0.5) * h[0],
                    (i1 as f64 + 0.5) * h[1],
                    (i2 as f64 + 0.5) * h[2],
                ];
                let av = [0, 1, 2].map(|j| a[j].value(x, none).re);
                let da = |j: usize, k: usize| a[j].deriv(x, none, k).re;
                let curl = [da(2, 1) - da(1, 2), da(0, 2) - da(2, 0), da(1, 0) - da(0, 1)];
                let cs = 0.5 * (0..3).map(|j| av[j] * curl[j]).sum::<f64>();
                let chi = [z.value(x, shift), w.value(x, shift)];
                // D_A ψ expressed on the periodic part: Σ c(eʲ)(∂_j χ + i a_j χ)
                let mut dpsi = [C64::new(0.0, 0.0); 2];
                for j in 0..3 {
                    let dj = [
                        z.deriv(x, shift, j) + C64::new(0.0, av[j]) * chi[0],
                        w.deriv(x, shift, j) + C64::new(0.0, av[j]) * chi[1],
                    ];
                    let c = apply(&clifford(j), dj);
                    dpsi[0] += c[0];
                    dpsi[1] += c[1];
                }
                let dirac = 0.5 * (chi[0] * dpsi[0].conj() + chi[1] * dpsi[1].conj()).re;
                let mod2 = chi[0].norm_sqr() + chi[1].norm_sqr();
                let pot = 0.5 * f.value(x, none).re * mod2;
                let mu = (0..3).map(|j| av[j] * m[j].value(x, none).re).sum::<f64>();
                total += (cs + dirac + pot + mu) * dv;
            }
        }
    }
    for l in &pert.loops {
        let [t1, t2] = transverse_axes(l.axis);
        let area = g.spacing(t1) * g.spacing(t2);
        let nf = fine[l.axis];
        let hs = g.lengths[l.axis] / nf as f64;
        let (mut p, mut q) = (0.0, 0.0);
        for y1 in 0..g.n[t1] {
            for y2 in 0..g.n[t2] {
                let e = l.eta[y1 * g.n[t2] + y2];
                if e == 0.0 {
                    continue;
                }
                let mut theta = 0.0;
                let mut along = 0.0;
                for s in 0..nf {
                    let mut x = [0.0; 3];
                    x[l.axis] = (s as f64 + 0.5) * hs;
                    x[t1] = y1 as f64 * g.spacing(t1);
                    x[t2] = y2 as f64 * g.spacing(t2);
                    theta += a[l.axis].value(x, none).re * hs;
                    along += (z.value(x, shift).norm_sqr() + w.value(x, shift).norm_sqr()) * hs;
                }
                p += e * theta.cos() * area;
                q += e * along * area;
            }
        }
        total += l.v * p + l.w * q;
    }
    total
}
