//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are
//! always printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swlab_core::linalg::{fit_line, realify, sym_eigenvalues};
use swlab_oracles::neck_exact::{coupled_end_limit, coupled_end_solution};
use swlab_oracles::random_fields::{coclosed_form, random_state, real_field};
use swlab_oracles::torus_fd::{dirac_abs_fd, richardson_order};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn random_sym(d: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| r.gen_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

fn random_orthogonal(d: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| r.gen_range(-1.0..1.0)).qr().q()
}

fn random_hermitian(n: usize, r: &mut ChaCha8Rng) -> DMatrix<C64> {
    let m = DMatrix::from_fn(n, n, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    (&m + m.adjoint()).map(|z| z * 0.5)
}

fn random_quaternionic(n: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = random_hermitian(n, r);
    let m = DMatrix::from_fn(n, n, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    let b = (&m - m.transpose()).map(|z| z * 0.5);
    let mut h = DMatrix::<C64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a);
    h.view_mut((0, n), (n, n)).copy_from(&(-b.map(|z| z.conj())));
    h.view_mut((n, 0), (n, n)).copy_from(&b);
    h.view_mut((n, n), (n, n)).copy_from(&a.map(|z| z.conj()));
    realify(&h)
}

fn torus_exactness() -> Outcome {
    use swlab_core::torus::*;
    let start = Instant::now();
    let mut wrong = 0;
    for s in SpinStructure::all() {
        for i in 0..=40i64 {
            for j in 0..=40i64 {
                let a = HarmonicPoint::new(i as f64 / 40.0, j as f64 / 40.0);
                let bad = (i - 20 * s.k as i64) % 40 == 0 && (j - 20 * s.l as i64) % 40 == 0;
                let dim = dirac_spectrum(s, a, 2).unwrap().kernel_dim;
                wrong += (dim != if bad { 2 } else { 0 }) as usize;
            }
        }
    }
    let mut worst_order = f64::INFINITY;
    for s in SpinStructure::all() {
        let a = HarmonicPoint::new(0.137, -0.291);
        let mut exact: Vec<f64> = dirac_spectrum(s, a, 4).unwrap().eigenvalues.iter().map(|l| l.abs()).collect();
        exact.sort_by(f64::total_cmp);
        let exact: Vec<f64> = exact.into_iter().step_by(2).take(20).collect();
        let fd: Vec<Vec<f64>> = [32, 64, 128].iter().map(|&n| dirac_abs_fd(s.k, s.l, a.alpha, a.beta, n, 20)).collect();
        for q in 0..20 {
            worst_order = worst_order.min(richardson_order(fd[0][q], fd[1][q], fd[2][q]));
            let e = [1, 2].map(|m| (fd[m][q] - exact[q]).abs());
            worst_order = worst_order.min((e[0] / e[1]).log2());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        wrong == 0 && worst_order >= 1.9 && secs <= 60.0,
        format!("{wrong} kernel mismatches on 4×41×41 points, min order {worst_order:.3}, {secs:.1} s"),
    )
}

fn clifford_identities() -> Outcome {
    use swlab_core::clifford::*;
    let p = mat_mul(&mat_mul(&clifford_matrix(0), &clifford_matrix(1)), &clifford_matrix(2));
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let volume = p == [[one, zero], [zero, one]];
    let mut r = rng(2);
    let sp = |r: &mut ChaCha8Rng| {
        Spinor2::from_parts(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    };
    let (mut e_norm, mut e_dual) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (psi, phi) = (sp(&mut r), sp(&mut r));
        let n2 = psi.norm_sqr();
        e_norm = e_norm.max((tau(psi, psi).norm_sqr() - 0.25 * n2 * n2).abs());
        let c: [f64; 3] = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let e = Covector3(c.map(|x| x / n));
        let lhs = clifford_mul(e, psi).times_i().dot_re(&phi);
        let rhs = -2.0 * e.dot(&Covector3(tau(psi, phi).0));
        e_dual = e_dual.max((lhs - rhs).abs());
    }
    ensure(
        volume && e_norm <= 1e-12 && e_dual <= 1e-12,
        format!("c1c2c3 = Id: {volume}, max errors {e_norm:.1e} and {e_dual:.1e} over 10⁴ samples"),
    )
}

fn gap_constants_check() -> Outcome {
    use swlab_core::torus::*;
    let mut worst = 0.0f64;
    for s in SpinStructure::all() {
        for r in [0.05, 0.1, 0.2, 0.4] {
            let c = gap_constants(s, r).unwrap();
            let m = sampled_gap_constants(s, r, 256, 3).unwrap();
            worst = worst.max(rel(c.c, r * r)).max(rel(c.delta, r.min(1.0)));
            worst = worst.max(rel(c.c, m.c)).max(rel(c.delta, m.delta));
        }
    }
    ensure(worst <= 1e-6, format!("max relative error {worst:.1e} over 4 spin structures × 4 radii"))
}

fn field_consistency() -> Outcome {
    use swlab_core::field::*;
    let start = Instant::now();
    let g = Grid3::torus3([8; 3], [0, 1, 0]).unwrap();
    let mut r = rng(4);
    let s = random_state(&g, &mut r, 2, 0.2);
    let mut p = PerturbationData::zero(&g);
    p.f = real_field(&g, &mut r, 1, 0.2);
    p.mu = coclosed_form(&g, &mut r, 1, 0.1);
    p.loops.push(ThickenedLoop::bump(&g, 0, [2.0, 3.5], 1.7, 0.8, 0.3).unwrap());
    let grad = sw_gradient(&s, &p).unwrap();
    let mut e_grad = 0.0f64;
    for _ in 0..3 {
        let dir = random_state(&g, &mut r, 3, 0.2);
        let eps = 1e-4;
        let fd = (csd(&s.add_scaled(eps, &dir), &p).unwrap() - csd(&s.add_scaled(-eps, &dir), &p).unwrap()) / (2.0 * eps);
        e_grad = e_grad.max(rel(grad.dot(&dir), fd));
    }
    let asym = hessian_assemble(&s, &p, 1).unwrap().asymmetry;

    // band-limited state so that e^{ih}χ stays resolved on the grid
    let s1 = random_state(&g, &mut r, 1, 0.3);
    let mut h = real_field(&g, &mut r, 1, 1e-3);
    h.iter_mut().for_each(|x| *x += 0.7);
    let t = gauge_apply(&GaugeElement::Exp(h), &s1).unwrap();
    let (c0, c1) = (csd(&s1, &p).unwrap(), csd(&t, &p).unwrap());
    let e_gauge = (c0 - c1).abs() / c0.abs().max(1.0);

    let lp = ThickenedLoop::bump(&g, 1, [2.5, 1.0], 2.0, 1.0, 0.0).unwrap();
    let lq = ThickenedLoop { v: 0.0, w: 1.0, ..lp.clone() };
    let base = sw_gradient(&s, &PerturbationData::zero(&g)).unwrap();
    let mut e_pq = 0.0f64;
    for (which, l) in [(0, lp), (1, lq)] {
        let mut q = PerturbationData::zero(&g);
        q.loops.push(l.clone());
        let part = sw_gradient(&s, &q).unwrap().add_scaled(-1.0, &base);
        let dir = random_state(&g, &mut r, 3, 0.3);
        let eps = 1e-5;
        let val = |x: &FieldState| {
            let (p, q) = holonomy_pq(&l, x).unwrap();
            if which == 0 {
                p
            } else {
                q
            }
        };
        let fd = (val(&s.add_scaled(eps, &dir)) - val(&s.add_scaled(-eps, &dir))) / (2.0 * eps);
        e_pq = e_pq.max(rel(part.dot(&dir), fd));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        e_grad <= 1e-6 && asym <= 1e-10 && e_gauge <= 1e-10 && e_pq <= 1e-6 && secs <= 120.0,
        format!(
            "gradient {e_grad:.1e}, Hessian asymmetry {asym:.1e}, gauge {e_gauge:.1e}, dp/dq {e_pq:.1e}, {secs:.1} s"
        ),
    )
}

fn perturbation_asymptotics() -> Outcome {
    use swlab_core::sflow::*;
    let mut r = rng(5);
    let ts: Vec<f64> = (0..10).map(|k| 1e-3 * 10f64.powf(k as f64 / 9.0)).collect();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = 6;
        let mut diag: Vec<f64> = (0..d).map(|_| r.gen_range(0.5..3.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        diag[0] = 0.0;
        let q = random_orthogonal(d, &mut r);
        let k0 = &q * DMatrix::from_diagonal(&DVector::from_vec(diag)) * q.transpose();
        let v0 = q.column(0).into_owned();
        let mut c = random_sym(d, &mut r);
        let first = v0.dot(&(&c * &v0));
        c -= &v0 * v0.transpose() * first;
        // −⟨c, K₀⁺c⟩ from the pseudo-inverse
        let cv = &c * &v0;
        let oracle = -cv.dot(&(k0.clone().pseudo_inverse(1e-10).unwrap() * &cv));
        let (fit, _) = fit_small_eigenvalue(&k0, &c, &ts).unwrap();
        worst = worst.max(rel(fit, oracle));
    }

    let s: Vec<f64> = (0..8).map(|k| 1e-3 * 10f64.powf(k as f64 / 7.0)).collect();
    let d = 7;
    let mut k0 = DMatrix::zeros(d, d);
    for (i, m) in [1.5, -2.0, 2.5, -1.2].iter().enumerate() {
        k0[(3 + i, 3 + i)] = *m;
    }
    let mut c1 = DMatrix::zeros(d, d);
    c1[(1, 2)] = 1.0;
    c1[(2, 1)] = 1.0;
    for i in 0..3 {
        for j in 3..d {
            let x = r.gen_range(-0.3..0.3);
            c1[(i, j)] = x;
            c1[(j, i)] = x;
        }
    }
    let mut c2 = random_sym(d, &mut r) * 0.2;
    c2[(0, 0)] = 2.0;
    let q3 = random_orthogonal(d, &mut r);
    let conj = |m: &DMatrix<f64>| &q3 * m * q3.transpose();
    let fit = kuranishi_triple(&KuranishiModel::new(conj(&k0), conj(&c1), conj(&c2)).unwrap(), &s).unwrap();
    let e = fit.exponents;
    let exps = (e[0] - 2.0).abs() <= 0.05 && (e[1] - 1.0).abs() <= 0.05 && (e[2] - 1.0).abs() <= 0.05;
    let opposite = fit.coefficients[1] * fit.coefficients[2] < 0.0;
    ensure(
        worst <= 0.01 && exps && opposite,
        format!(
            "quadratic coefficient max rel error {worst:.1e} on 100 instances; exponents ({:.3}, {:.3}, {:.3}), linear pair {:.3}, {:.3}",
            e[0], e[1], e[2], fit.coefficients[1], fit.coefficients[2]
        ),
    )
}

fn crossing_jumps() -> Outcome {
    use swlab_core::sflow::*;
    let groups = |rep: &FlowReport| {
        let mut out: Vec<(f64, usize, i64)> = Vec::new();
        for c in &rep.crossings {
            match out.last_mut() {
                Some((t, n, s)) if (c.t - *t).abs() < 1e-6 => {
                    *n += 1;
                    *s += c.direction as i64;
                }
                _ => out.push((c.t, 1, c.direction as i64)),
            }
        }
        out.into_iter().map(|(_, n, s)| (n, s)).collect::<Vec<_>>()
    };
    let mut r = rng(6);
    let mut jumps_q = Vec::new();
    let mut jumps_c = Vec::new();
    for _ in 0..3 {
        let (h0, h1) = (random_quaternionic(2, &mut r), random_quaternionic(2, &mut r));
        let id = DMatrix::<f64>::identity(8, 8);
        let p = OperatorPath::from_fn(-1.0, 1.0, 800, |t| &h0 * 0.3 + (&id + &h1 * 0.3) * t).unwrap();
        let rep = spectral_flow(&track(&p, 100.0).unwrap(), 0.0, 0.0).unwrap();
        jumps_q.extend(groups(&rep).into_iter().map(|(_, s)| s));
        let (g0, g1) = (realify(&random_hermitian(3, &mut r)), realify(&random_hermitian(3, &mut r)));
        let p = OperatorPath::from_fn(-1.0, 1.0, 800, |t| &g0 + &g1 * (3.0 * t)).unwrap();
        let rep = spectral_flow(&track(&p, 100.0).unwrap(), 0.0, 0.0).unwrap();
        // a complex crossing moves one complex, i.e. two real, dimensions
        jumps_c.extend(groups(&rep).into_iter().map(|(_, s)| s / 2));
    }
    let f = |t: f64| DMatrix::from_row_slice(2, 2, &[t, 0.3, 0.3, 1.0]);
    let p = OperatorPath::from_fn(-0.41, 0.59, 1000, f).unwrap();
    let v = DVector::from_vec(vec![1.0, -0.3]).normalize();
    let got = crossing_derivative(&p, 0.09, &v).unwrap();
    let small = |t: f64| sym_eigenvalues(&f(t))[0];
    let slope = (small(0.09 + 1e-5) - small(0.09 - 1e-5)) / 2e-5;
    let e_slope = rel(got, slope);
    let ok = !jumps_q.is_empty()
        && !jumps_c.is_empty()
        && jumps_q.iter().all(|s| s.abs() == 4)
        && jumps_c.iter().all(|s| s.abs() == 1)
        && e_slope <= 0.01;
    ensure(
        ok,
        format!("quaternionic jumps {jumps_q:?}, complex jumps {jumps_c:?}, derivative rel error {e_slope:.1e}"),
    )
}

fn neck_scaling() -> Outcome {
    use swlab_core::neck::*;
    let start = Instant::now();
    let ls = [10.0, 20.0, 40.0, 80.0, 160.0];
    let lam: Vec<f64> = ls.iter().map(|&l| lambda_l(&NeckFixture::Transversal.glued(l, 0.2).unwrap()).unwrap().lambda()).collect();
    let (slope, _) = loglog_slope(&ls, &lam).unwrap();
    let mu = 1.0;
    let free_min = [1.0, 5.0, 10.0, 20.0, 40.0]
        .iter()
        .map(|&l| lambda_l(&NeckFixture::KernelFree { mu }.glued(l, 0.1).unwrap()).unwrap().lambda())
        .fold(f64::INFINITY, f64::min);
    let nl = [4.0, 8.0, 12.0, 16.0, 20.0];
    let logs: Vec<f64> = nl
        .iter()
        .map(|&l| {
            let x = lambda_l(&NeckFixture::NonTransversal { amp: 0.1, delta: 0.2 }.glued(l, 0.05).unwrap()).unwrap().lambda();
            (x * (2.0 * l + 3.0).powi(2)).ln()
        })
        .collect();
    let (_, rate, rms) = fit_line(&nl, &logs);
    let secs = start.elapsed().as_secs_f64();
    ensure(
        (-2.3..=-1.7).contains(&slope) && free_min >= mu * mu / 2.0 && rms < 0.05 && secs <= 180.0,
        format!(
            "transversal slope {slope:.3}, kernel-free min λ {free_min:.4}, exponential fit rate {rate:.4} rms {rms:.1e}, {secs:.1} s"
        ),
    )
}

fn laplace_exclusion() -> Outcome {
    use swlab_core::neck::*;
    let model = LaplaceModel { body_length: 1.0, potential: vec![1.0, 1.0], h: 0.05 };
    let rep = delta_l_experiment(&model, &[20.0, 40.0, 80.0, 160.0, 320.0]).unwrap();
    let l4: Vec<String> = rep.rows.iter().map(|r| format!("{:.4e}", r.lambda * r.l.powi(4))).collect();
    ensure(
        rep.l4_increasing && rep.squared_l4_increasing,
        format!("λ·L⁴ = {l4:?}, slope {:.3}", rep.slope),
    )
}

fn splitting_identity() -> Outcome {
    use swlab_core::neck::*;
    let suite = toy_suite();
    let mut held = 0;
    let mut lines = Vec::new();
    for p in &suite {
        let r = split_identity(&toy_fixture(p).unwrap()).unwrap();
        held += r.holds() as usize;
        lines.push(format!("{} {}={}+{}+{}", r.name, r.glued_flow, r.body_flows[0], r.body_flows[1], r.maslov));
    }
    ensure(suite.len() >= 10 && held == suite.len(), format!("{held}/{} hold: {}", suite.len(), lines.join(", ")))
}

fn dimension_formula() -> Outcome {
    use swlab_core::neck::*;
    let j2 = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let mut i0 = DMatrix::zeros(6, 6);
    for b in 0..3 {
        i0.view_mut((2 * b, 2 * b), (2, 2)).copy_from(&j2);
    }
    let mut r = rng(10);
    let unitary = |r: &mut ChaCha8Rng| {
        let m = DMatrix::from_fn(6, 6, |_, _| r.gen_range(-1.0..1.0));
        let skew = &m - m.transpose();
        ((&skew - &i0 * &skew * &i0) * 0.5).exp()
    };
    let mut fixtures = 0;
    let mut bad = 0;
    for kernel_blocks in [1usize, 2, 3] {
        for _ in 0..4 {
            let mut a = DMatrix::zeros(6, 6);
            for b in kernel_blocks..3 {
                let mu = r.gen_range(0.5..2.0);
                a[(2 * b, 2 * b)] = mu;
                a[(2 * b + 1, 2 * b + 1)] = -mu;
            }
            let u = unitary(&mut r);
            let op = validate_compatible(&i0, &(&u * a * u.transpose())).unwrap();
            let v = DMatrix::from_fn(6, 6, |_, _| r.gen_range(-0.5..0.5));
            let wall = unitary(&mut r) * DMatrix::from_fn(6, 3, |row, c| if row == 2 * c { 1.0 } else { 0.0 });
            let end = EndData::new(op, Perturbation::zero(), (&v + v.transpose()) * 0.5, 1.0, Some(wall)).unwrap();
            let el = end_lagrangian(&end).unwrap();
            fixtures += 1;
            bad += (2 * el.ambient.ncols() != 2 * kernel_blocks) as usize;
        }
    }
    // limiting values of the coupled end against variation of parameters
    let (mu, delta, amp) = (1.3, 0.6, 0.8);
    let mut i4 = DMatrix::zeros(4, 4);
    i4.view_mut((0, 0), (2, 2)).copy_from(&j2);
    i4.view_mut((2, 2), (2, 2)).copy_from(&j2);
    let op = validate_compatible(&i4, &DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, mu, -mu]))).unwrap();
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 2)] = amp;
    m[(2, 0)] = amp;
    let pert = Perturbation::exponential(0.0, delta, amp, vec![(m, delta)]).unwrap();
    let end = EndData::new(op, pert, DMatrix::zeros(4, 4), 1.0, None).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let c = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let psi: Vec<(f64, DVector<f64>)> = (0..121)
            .map(|k| {
                let t = 30.0 * k as f64 / 120.0;
                (t, DVector::from_row_slice(&coupled_end_solution(mu, delta, amp, c, t)))
            })
            .collect();
        let lv = limiting_value(&end, &psi).unwrap();
        worst = worst.max((&lv.value - DVector::from_row_slice(&coupled_end_limit(mu, delta, amp, c))).amax());
    }
    ensure(
        bad == 0 && worst <= 1e-6,
        format!("dim l = ½ dim ker A in {}/{fixtures} fixtures, limiting value error {worst:.1e}", fixtures - bad),
    )
}

fn determinism() -> Outcome {
    use swlab::{run, Experiment, ExperimentConfig, RunRequest};
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checked = Vec::new();
    for e in Experiment::ALL {
        let mut config = ExperimentConfig::default();
        match e {
            Experiment::Intersect => {
                config.parameters = serde_json::from_str(
                    r#"{"curve1": [[-1, 0], [1, 0]], "curve2": [[0, -1], [0.2, 0.7], [0, 1]], "refine": 2}"#,
                )
                .unwrap()
            }
            Experiment::MasSf => config.parameters = serde_json::from_str(r#"{"names": ["static", "left-twist"]}"#).unwrap(),
            _ => {}
        }
        let mut bodies = Vec::new();
        for (k, threads) in [1usize, 3].into_iter().enumerate() {
            let prefix = dir.path().join(format!("{}-{k}", e.name()));
            let req = RunRequest { experiment: e, config: config.clone(), seed: Some(17), out: Some(prefix.clone()), threads: Some(threads) };
            let m = run(req).map_err(|err| format!("{}: {err}", e.name()))?;
            let mut files = Vec::new();
            for d in &m.outputs {
                let bytes = std::fs::read(&d.path).map_err(|err| err.to_string())?;
                if swlab::output::sha256_hex(&bytes) != d.sha256 {
                    return Err(format!("{}: digest of {} does not match", e.name(), d.path));
                }
                files.push(bytes);
            }
            bodies.push(files);
        }
        if bodies[0] != bodies[1] {
            return Err(format!("{} differs between reruns", e.name()));
        }
        checked.push(e.name());
    }
    Ok(format!("byte-identical CSV and JSON across reruns (1 and 3 threads) for {}", checked.join(", ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("bad lattice and finite-difference spectra on T²", torus_exactness),
        ("Clifford and τ identities", clifford_identities),
        ("gap constants c(r), δ(r)", gap_constants_check),
        ("gradient, Hessian, gauge and dp/dq consistency", field_consistency),
        ("small-eigenvalue asymptotics", perturbation_asymptotics),
        ("quaternionic and complex crossing jumps", crossing_jumps),
        ("neck eigenvalue scaling", neck_scaling),
        ("Δ_L exclusion of fast decay", laplace_exclusion),
        ("spectral flow splitting identity", splitting_identity),
        ("Lagrangian dimension and limiting values", dimension_formula),
        ("determinism of experiment outputs", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += outcome.is_err() as usize;
        println!("{tag} criterion {:>2}: {name}: {detail} [{secs:.1} s]", k + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
