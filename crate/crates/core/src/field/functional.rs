use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use super::{transverse_axes, FieldState, PerturbationData, Spectral, ThickenedLoop};
use crate::clifford::{clifford_mul_imag, tau, ImCoeff3, Spinor2};
use crate::fourier::Dft;
use crate::{Error, Result};

/// Band-limited data of a state in coefficient and collocation form.
struct Prepared {
    sp: Spectral,
    ca: [Vec<C64>; 3],
    cz: Vec<C64>,
    cw: Vec<C64>,
    /// values of the band-limited fields on the N grid
    a: [Vec<f64>; 3],
    z: Vec<C64>,
    w: Vec<C64>,
    /// values on the collocation grid
    fa: [Vec<f64>; 3],
    fz: Vec<C64>,
    fw: Vec<C64>,
}

impl Prepared {
    fn new(state: &FieldState) -> Result<Self> {
        state.validate()?;
        let sp = Spectral::new(&state.grid);
        let ca = [0, 1, 2].map(|j| sp.coeffs_real(&state.a[j]));
        let cz = sp.coeffs_spinor(&state.z);
        let cw = sp.coeffs_spinor(&state.w);
        let a = [0, 1, 2].map(|j| sp.values_real(&ca[j]));
        let z = sp.values(&cz);
        let w = sp.values(&cw);
        let fa = [0, 1, 2].map(|j| sp.to_fine_real(&ca[j]));
        let fz = sp.to_fine(&cz);
        let fw = sp.to_fine(&cw);
        Ok(Prepared { sp, ca, cz, cw, a, z, w, fa, fz, fw })
    }

    fn fine_spinor(&self, i: usize) -> Spinor2 {
        Spinor2::new(self.fz[i], self.fw[i])
    }

    fn fine_a(&self, i: usize) -> ImCoeff3 {
        ImCoeff3([self.fa[0][i], self.fa[1][i], self.fa[2][i]])
    }
}

fn check_pert(state: &FieldState, pert: &PerturbationData) -> Result<()> {
    let n = state.grid.len();
    if pert.f.len() != n || pert.mu.iter().any(|m| m.len() != n) {
        return Err(Error::GridMismatch("perturbation and state grids differ".into()));
    }
    for l in &pert.loops {
        l.validate(&state.grid)?;
    }
    Ok(())
}

/// The individual terms of the perturbed functional.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CsdTerms {
    /// −½∫A∧dA
    pub chern_simons: f64,
    /// ½∫⟨ψ, D_Aψ⟩_Re
    pub dirac: f64,
    /// ½∫f|ψ|²
    pub potential: f64,
    /// −∫A∧∗μ
    pub mu: f64,
    /// Σ (v p + w q)
    pub holonomy: f64,
}

impl CsdTerms {
    pub fn total(&self) -> f64 {
        self.chern_simons + self.dirac + self.potential + self.mu + self.holonomy
    }
}

pub fn csd_terms(state: &FieldState, pert: &PerturbationData) -> Result<CsdTerms> {
    check_pert(state, pert)?;
    let p = Prepared::new(state)?;
    let sp = &p.sp;
    let curl = sp.curl_coeffs(&p.ca);
    let chern_simons = 0.5
        * (0..3)
            .map(|j| sp.parseval(&p.ca[j], &curl[j]).re)
            .sum::<f64>();
    let (dz, dw) = sp.dirac0_coeffs(&p.cz, &p.cw);
    let mut dirac = 0.5 * (sp.parseval(&p.cz, &dz).re + sp.parseval(&p.cw, &dw).re);

    let ff = sp.to_fine_real(&sp.coeffs_real(&pert.f));
    let dv = sp.fine_cell_volume();
    let mut cubic = 0.0;
    let mut potential = 0.0;
    for i in 0..sp.fine_len() {
        let psi = p.fine_spinor(i);
        let r = tau(psi, psi).0;
        let a = p.fine_a(i).0;
        cubic += a[0] * r[0] + a[1] * r[1] + a[2] * r[2];
        potential += ff[i] * psi.norm_sqr();
    }
    // ½∫⟨ψ, i a·c ψ⟩_Re = −∫ a·r(ψ, ψ)
    dirac -= cubic * dv;
    potential *= 0.5 * dv;

    let mu = (0..3)
        .map(|j| sp.parseval(&p.ca[j], &sp.coeffs_real(&pert.mu[j])).re)
        .sum::<f64>();
    let mut holonomy = 0.0;
    for l in &pert.loops {
        let (pv, qv) = pq_prepared(l, &p)?;
        holonomy += l.v * pv + l.w * qv;
    }
    Ok(CsdTerms {
        chern_simons,
        dirac,
        potential,
        mu,
        holonomy,
    })
}

pub fn csd(state: &FieldState, pert: &PerturbationData) -> Result<f64> {
    Ok(csd_terms(state, pert)?.total())
}

/// Unit complex holonomies exp(i∮a) of the circles through the transverse
/// grid points, composed from exact edge integrals of the band-limited
/// connection.
pub fn loop_holonomies(l: &ThickenedLoop, state: &FieldState) -> Result<Vec<C64>> {
    let p = Prepared::new(state)?;
    l.validate(&state.grid)?;
    Ok(holonomies_prepared(l, &p))
}

fn holonomies_prepared(l: &ThickenedLoop, p: &Prepared) -> Vec<C64> {
    let g = &p.sp.grid;
    let ax = l.axis;
    let [t1, t2] = transverse_axes(ax);
    let n = g.n[ax];
    let len = g.lengths[ax];
    let h = g.spacing(ax);
    let dft = Dft::new(n);
    let mut out = Vec::with_capacity(g.n[t1] * g.n[t2]);
    let mut line = vec![C64::new(0.0, 0.0); n];
    let mut coef = vec![C64::new(0.0, 0.0); n];
    for i1 in 0..g.n[t1] {
        for i2 in 0..g.n[t2] {
            for (s, v) in line.iter_mut().enumerate() {
                let mut idx = [0usize; 3];
                idx[ax] = s;
                idx[t1] = i1;
                idx[t2] = i2;
                *v = C64::new(p.a[ax][g.index(idx)], 0.0);
            }
            dft.forward(&line, &mut coef);
            let mut u = C64::new(1.0, 0.0);
            for s in 0..n {
                let x0 = s as f64 * h;
                let x1 = x0 + h;
                let mut edge = coef[0].re * h;
                for (j, c) in coef.iter().enumerate().skip(1) {
                    let m = crate::fourier::signed_mode(j, n);
                    if 2 * m.unsigned_abs() as usize == n {
                        continue;
                    }
                    let k = 2.0 * core::f64::consts::PI * m as f64 / len;
                    let e1 = C64::new((k * x1).cos(), (k * x1).sin());
                    let e0 = C64::new((k * x0).cos(), (k * x0).sin());
                    edge += (c * (e1 - e0) / C64::new(0.0, k)).re;
                }
                u *= C64::new(edge.cos(), edge.sin());
            }
            out.push(u / u.norm());
        }
    }
    out
}

fn pq_prepared(l: &ThickenedLoop, p: &Prepared) -> Result<(f64, f64)> {
    let g = &p.sp.grid;
    let [t1, t2] = transverse_axes(l.axis);
    let area = g.spacing(t1) * g.spacing(t2);
    let hol = holonomies_prepared(l, p);
    let pv: f64 = hol.iter().zip(&l.eta).map(|(u, e)| u.re * e).sum::<f64>() * area;
    let mut qv = 0.0;
    for idx in 0..g.len() {
        let m = g.multi_index(idx);
        let e = l.eta[m[t1] * g.n[t2] + m[t2]];
        if e != 0.0 {
            qv += e * (p.z[idx].norm_sqr() + p.w[idx].norm_sqr());
        }
    }
    qv *= g.cell_volume();
    Ok((pv, qv))
}

/// p = ∫cos θ_y η(y) dy and q = ∫|ψ|² η(y) dy dt.
pub fn holonomy_pq(l: &ThickenedLoop, state: &FieldState) -> Result<(f64, f64)> {
    let p = Prepared::new(state)?;
    l.validate(&state.grid)?;
    pq_prepared(l, &p)
}

/// The perturbed Seiberg-Witten map s′ = (∗da − r(ψ,ψ) + m + dp-part,
/// D_Aψ + fψ + dq-part), in real coefficients of the imaginary form part.
pub fn sw_gradient(state: &FieldState, pert: &PerturbationData) -> Result<FieldState> {
    check_pert(state, pert)?;
    let p = Prepared::new(state)?;
    let sp = &p.sp;
    let g = &sp.grid;
    let nf = sp.fine_len();
    let ff = sp.to_fine_real(&sp.coeffs_real(&pert.f));

    let mut fr = [vec![0.0; nf], vec![0.0; nf], vec![0.0; nf]];
    let mut fsz = vec![C64::new(0.0, 0.0); nf];
    let mut fsw = vec![C64::new(0.0, 0.0); nf];
    for i in 0..nf {
        let psi = p.fine_spinor(i);
        let r = tau(psi, psi).0;
        for j in 0..3 {
            fr[j][i] = r[j];
        }
        let s = clifford_mul_imag(p.fine_a(i), psi) + psi * ff[i];
        fsz[i] = s.z;
        fsw[i] = s.w;
    }
    let curl = sp.curl_coeffs(&p.ca);
    let mut out = FieldState::zero(g);
    for j in 0..3 {
        let cr = sp.from_fine_real(&fr[j]);
        let cm = sp.coeffs_real(&pert.mu[j]);
        let c: Vec<C64> = (0..g.len()).map(|i| curl[j][i] - cr[i] + cm[i]).collect();
        out.a[j] = sp.values_real(&c);
    }
    let (dz, dw) = sp.dirac0_coeffs(&p.cz, &p.cw);
    let nz = sp.from_fine_spinor(&fsz);
    let nw = sp.from_fine_spinor(&fsw);
    let cz: Vec<C64> = dz.iter().zip(&nz).map(|(x, y)| x + y).collect();
    let cw: Vec<C64> = dw.iter().zip(&nw).map(|(x, y)| x + y).collect();
    out.z = sp.values(&cz);
    out.w = sp.values(&cw);

    for l in &pert.loops {
        let hol = holonomies_prepared(l, &p);
        let [t1, t2] = transverse_axes(l.axis);
        let mut ga = vec![0.0; g.len()];
        let mut gz = vec![C64::new(0.0, 0.0); g.len()];
        let mut gw = vec![C64::new(0.0, 0.0); g.len()];
        for idx in 0..g.len() {
            let m = g.multi_index(idx);
            let y = m[t1] * g.n[t2] + m[t2];
            let e = l.eta[y];
            ga[idx] = -l.v * e * hol[y].im;
            gz[idx] = p.z[idx] * (2.0 * l.w * e);
            gw[idx] = p.w[idx] * (2.0 * l.w * e);
        }
        let ga = sp.project_real(&ga);
        for (o, x) in out.a[l.axis].iter_mut().zip(ga) {
            *o += x;
        }
        for (o, x) in out.z.iter_mut().zip(sp.project_spinor(&gz)) {
            *o += x;
        }
        for (o, x) in out.w.iter_mut().zip(sp.project_spinor(&gw)) {
            *o += x;
        }
    }
    Ok(out)
}

/// Derivative of [`sw_gradient`] at `state` in the direction `dir`.
pub fn linearized_gradient(state: &FieldState, pert: &PerturbationData, dir: &FieldState) -> Result<FieldState> {
    LinearOp::new(state, pert)?.apply(dir)
}

/// The linearization of the perturbed gradient at a fixed configuration,
/// with the configuration data transformed once.
pub(crate) struct LinearOp {
    p: Prepared,
    ff: Vec<f64>,
    loops: Vec<(ThickenedLoop, Vec<C64>)>,
}

impl LinearOp {
    pub fn new(state: &FieldState, pert: &PerturbationData) -> Result<Self> {
        check_pert(state, pert)?;
        let p = Prepared::new(state)?;
        let ff = p.sp.to_fine_real(&p.sp.coeffs_real(&pert.f));
        let loops = pert
            .loops
            .iter()
            .map(|l| (l.clone(), holonomies_prepared(l, &p)))
            .collect();
        Ok(LinearOp { p, ff, loops })
    }

    pub fn apply(&self, dir: &FieldState) -> Result<FieldState> {
        Ok(self.apply_extended(dir, None)?.0)
    }

    /// The extended operator K(b, φ, h) = (L(b, φ) − ∇h, L_χ(b, φ) + ihχ,
    /// div b + ⟨iχ, φ⟩_Re); with `h = None` only L is applied.
    pub fn apply_extended(&self, dir: &FieldState, h: Option<&[f64]>) -> Result<(FieldState, Vec<f64>)> {
        let p = &self.p;
        let sp = &p.sp;
        let g = &sp.grid;
        dir.check_grid(g)?;
        let d = Prepared::new(dir)?;
        let nf = sp.fine_len();
        let fh = match h {
            Some(h) => {
                if h.len() != g.len() {
                    return Err(Error::GridMismatch("gauge component does not match the grid".into()));
                }
                Some(sp.coeffs_real(h))
            }
            None => None,
        };
        let fh_fine = fh.as_ref().map(|c| sp.to_fine_real(c));

        let mut fr = [vec![0.0; nf], vec![0.0; nf], vec![0.0; nf]];
        let mut fsz = vec![C64::new(0.0, 0.0); nf];
        let mut fsw = vec![C64::new(0.0, 0.0); nf];
        let mut fk = vec![0.0; if h.is_some() { nf } else { 0 }];
        for i in 0..nf {
            let psi = p.fine_spinor(i);
            let phi = d.fine_spinor(i);
            let r = tau(psi, phi).0;
            for j in 0..3 {
                fr[j][i] = 2.0 * r[j];
            }
            let mut s = clifford_mul_imag(p.fine_a(i), phi) + clifford_mul_imag(d.fine_a(i), psi) + phi * self.ff[i];
            if let Some(hf) = &fh_fine {
                s = s + psi.times_i() * hf[i];
                fk[i] = psi.times_i().dot_re(&phi);
            }
            fsz[i] = s.z;
            fsw[i] = s.w;
        }
        let curl = sp.curl_coeffs(&d.ca);
        let grad_h = fh.as_ref().map(|c| sp.gradient_coeffs(c));
        let mut out = FieldState::zero(g);
        for j in 0..3 {
            let cr = sp.from_fine_real(&fr[j]);
            let mut c: Vec<C64> = (0..g.len()).map(|i| curl[j][i] - cr[i]).collect();
            if let Some(gh) = &grad_h {
                for (x, y) in c.iter_mut().zip(&gh[j]) {
                    *x -= y;
                }
            }
            out.a[j] = sp.values_real(&c);
        }
        let (dz, dw) = sp.dirac0_coeffs(&d.cz, &d.cw);
        let nz = sp.from_fine_spinor(&fsz);
        let nw = sp.from_fine_spinor(&fsw);
        out.z = sp.values(&dz.iter().zip(&nz).map(|(x, y)| x + y).collect::<Vec<_>>());
        out.w = sp.values(&dw.iter().zip(&nw).map(|(x, y)| x + y).collect::<Vec<_>>());

        for (l, hol) in &self.loops {
            let dtheta = loop_integrals(l, &d);
            let mut ga = vec![0.0; g.len()];
            let mut gz = vec![C64::new(0.0, 0.0); g.len()];
            let mut gw = vec![C64::new(0.0, 0.0); g.len()];
            let [t1, t2] = transverse_axes(l.axis);
            for idx in 0..g.len() {
                let m = g.multi_index(idx);
                let y = m[t1] * g.n[t2] + m[t2];
                let e = l.eta[y];
                ga[idx] = -l.v * e * hol[y].re * dtheta[y];
                gz[idx] = d.z[idx] * (2.0 * l.w * e);
                gw[idx] = d.w[idx] * (2.0 * l.w * e);
            }
            let ga = sp.project_real(&ga);
            for (o, x) in out.a[l.axis].iter_mut().zip(ga) {
                *o += x;
            }
            for (o, x) in out.z.iter_mut().zip(sp.project_spinor(&gz)) {
                *o += x;
            }
            for (o, x) in out.w.iter_mut().zip(sp.project_spinor(&gw)) {
                *o += x;
            }
        }

        let mut kh = Vec::new();
        if h.is_some() {
            let ck = sp.from_fine_real(&fk);
            let div: Vec<C64> = (0..3)
                .map(|j| sp.deriv(&d.ca[j], j, false))
                .fold(vec![C64::new(0.0, 0.0); g.len()], |acc, v| {
                    acc.iter().zip(&v).map(|(x, y)| x + y).collect()
                });
            let c: Vec<C64> = div.iter().zip(&ck).map(|(x, y)| x + y).collect();
            kh = sp.values_real(&c);
        }
        Ok((out, kh))
    }
}

/// ∮ b_axis along each transverse grid circle.
fn loop_integrals(l: &ThickenedLoop, d: &Prepared) -> Vec<f64> {
    let g = &d.sp.grid;
    let [t1, t2] = transverse_axes(l.axis);
    let h = g.spacing(l.axis);
    let mut out = vec![0.0; g.n[t1] * g.n[t2]];
    for idx in 0..g.len() {
        let m = g.multi_index(idx);
        out[m[t1] * g.n[t2] + m[t2]] += d.a[l.axis][idx] * h;
    }
    out
}
