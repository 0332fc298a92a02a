use nalgebra::{dmatrix, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swlab_core::neck::*;
use swlab_core::Error;
use swlab_oracles::neck_exact::*;

fn j2() -> DMatrix<f64> {
    dmatrix![0.0, -1.0; 1.0, 0.0]
}

fn blockdiag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        m.view_mut((o, o), b.shape()).copy_from(b);
        o += b.nrows();
    }
    m
}

fn unit(d: usize, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(d, idx.len(), |r, c| if r == idx[c] { 1.0 } else { 0.0 })
}

fn i4() -> DMatrix<f64> {
    blockdiag(&[j2(), j2()])
}

fn dichotomy(mu: f64) -> DMatrix<f64> {
    dmatrix![mu, 0.0; 0.0, -mu]
}

fn plain_end(op: &CompatibleOperator, wall: DMatrix<f64>) -> EndData {
    let d = op.dim();
    EndData::new(op.clone(), Perturbation::zero(), DMatrix::zeros(d, d), 1.0, Some(wall)).unwrap()
}

/// Kernel e₁, e₂; dichotomy on e₃, e₄. Walls make the limiting lines
/// span(e₁) on the left and span(e₂) on the right.
fn transversal(l: f64, h: f64) -> GluedOperator {
    let op = validate_compatible(&i4(), &blockdiag(&[DMatrix::zeros(2, 2), dichotomy(1.0)])).unwrap();
    let left = plain_end(&op, unit(4, &[0, 3]));
    let right = plain_end(&op.reversed(), unit(4, &[1, 2]));
    GluedOperator::new(left, right, l, h).unwrap()
}

fn kernel_free(l: f64, mu: f64, h: f64) -> GluedOperator {
    let op = validate_compatible(&i4(), &blockdiag(&[dichotomy(mu), dichotomy(mu)])).unwrap();
    let left = plain_end(&op, unit(4, &[1, 3]));
    let right = plain_end(&op.reversed(), unit(4, &[0, 2]));
    GluedOperator::new(left, right, l, h).unwrap()
}

const AMP: f64 = 0.1;
const DELTA: f64 = 0.2;

/// The left perturbation amp·e^{−δt} on the kernel block rotates the
/// limiting line to angle amp/δ, which the right wall matches.
fn non_transversal(l: f64, h: f64) -> GluedOperator {
    let op = validate_compatible(&i4(), &blockdiag(&[DMatrix::zeros(2, 2), dichotomy(1.0)])).unwrap();
    let q = blockdiag(&[DMatrix::identity(2, 2), DMatrix::zeros(2, 2)]);
    let p = Perturbation::exponential(0.0, DELTA, AMP, vec![(q * AMP, DELTA)]).unwrap();
    let left = EndData::new(op.clone(), p, DMatrix::zeros(4, 4), 1.0, Some(unit(4, &[0, 3]))).unwrap();
    let th = AMP / DELTA;
    let mut w = unit(4, &[0, 2]);
    w[(0, 0)] = th.cos();
    w[(1, 0)] = th.sin();
    let right = plain_end(&op.reversed(), w);
    GluedOperator::new(left, right, l, h).unwrap()
}

fn relations_defect(i: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    let d = i.nrows();
    let eye = DMatrix::<f64>::identity(d, d);
    [(i * i + &eye).amax(), (i + i.transpose()).amax(), (a - a.transpose()).amax(), (i * a + a * i).amax()]
        .into_iter()
        .fold(0.0, f64::max)
}

#[test]
fn kernel_only_model_is_compatible_with_standard_form() {
    let op = validate_compatible(&j2(), &DMatrix::zeros(2, 2)).unwrap();
    assert_eq!(op.kernel().ncols(), 2);
    let w = op.kernel_form();
    assert!((w[(0, 1)].abs() - 1.0).abs() < 1e-12 && (w + w.transpose()).amax() < 1e-12);
}

#[test]
fn paired_dichotomy_satisfies_all_relations() {
    let (i, a) = (i4(), blockdiag(&[dichotomy(0.7), dichotomy(0.7)]));
    assert!(relations_defect(&i, &a) < 1e-14);
    let op = validate_compatible(&i, &a).unwrap();
    assert_eq!(op.kernel().ncols(), 0);
    // I carries E₊ onto E₋
    let (p, m) = (op.spectral_space(true), op.spectral_space(false));
    let image = op.i() * &p;
    assert!((&image - &m * (m.transpose() * &image)).amax() < 1e-12);
}

#[test]
fn violated_relations_are_reported() {
    let bad_i = dmatrix![0.0, 1.0; 1.0, 0.0];
    assert!(matches!(validate_compatible(&bad_i, &DMatrix::zeros(2, 2)), Err(Error::InvalidInput(_))));
    let commuting = DMatrix::<f64>::identity(2, 2);
    assert!(validate_compatible(&j2(), &commuting).is_err());
    assert!(validate_compatible(&DMatrix::zeros(3, 3), &DMatrix::zeros(3, 3)).is_err());
}

#[test]
fn assembled_forms_are_exactly_symmetric() {
    let sys = assemble_glued(&non_transversal(3.0, 0.2)).unwrap();
    for i in 0..sys.dofs {
        for j in 0..sys.dofs {
            assert_eq!(sys.stiffness.get(i, j), sys.stiffness.get(j, i));
            assert_eq!(sys.mass.get(i, j), sys.mass.get(j, i));
        }
    }
}

#[test]
fn coarse_mesh_is_rejected() {
    let op = validate_compatible(&i4(), &blockdiag(&[dichotomy(5.0), dichotomy(5.0)])).unwrap();
    let left = plain_end(&op, unit(4, &[1, 3]));
    let right = plain_end(&op.reversed(), unit(4, &[0, 2]));
    assert!(GluedOperator::new(left, right, 4.0, 0.2).is_err());
}

#[test]
fn constants_span_the_kernel_without_potential() {
    let op = validate_compatible(&j2(), &DMatrix::zeros(2, 2)).unwrap();
    let end = |o: &CompatibleOperator| EndData::new(o.clone(), Perturbation::zero(), DMatrix::zeros(2, 2), 0.0, Some(unit(2, &[0]))).unwrap();
    let g = GluedOperator::new(end(&op), end(&op.reversed()), 3.0, 0.1).unwrap();
    let r = lambda_l(&g).unwrap();
    assert!(r.lambda() < 1e-12, "{:?}", r.richardson);
    let f = &r.eigenfunction;
    let first = &f[0].1;
    assert!(f.iter().all(|(_, v)| (v - first).amax() < 1e-8 * first.amax()));
}

#[test]
fn transversal_lambda_matches_exact_quarter_wave() {
    for l in [10.0, 20.0, 40.0] {
        let r = lambda_l(&transversal(l, 0.2)).unwrap();
        // the kernel block is J d/dτ on length 2L + 3 between e₁ and e₂
        let pieces = [(2.0 * l + 3.0, [[0.0, 0.0], [0.0, 0.0]])];
        let oracle = transfer_eigenvalues(&pieces, [1.0, 0.0], [0.0, 1.0], 0.5)
            .into_iter()
            .map(|x| x * x)
            .fold(f64::INFINITY, f64::min);
        assert!((r.lambda() - oracle).abs() < 1e-8 * oracle, "L={l}: {} vs {oracle}", r.lambda());
        assert!(r.richardson.order >= 1.9, "{:?}", r.richardson);
    }
}

#[test]
fn transversal_lambda_decays_like_inverse_square() {
    let ls = [10.0, 20.0, 40.0, 80.0, 160.0];
    let lam: Vec<f64> = ls.iter().map(|&l| lambda_l(&transversal(l, 0.2)).unwrap().lambda()).collect();
    assert!(lam.windows(2).all(|w| w[1] <= w[0]));
    let (slope, _) = loglog_slope(&ls, &lam).unwrap();
    assert!((-2.3..=-1.7).contains(&slope), "{slope}");
}

#[test]
fn kernel_free_lambda_matches_dichotomy_shooting() {
    let mu = 1.0;
    for l in [1.0, 5.0, 20.0] {
        let r = lambda_l(&kernel_free(l, mu, 0.05)).unwrap();
        // two decoupled blocks of J d/dτ + JA on the neck, 0 on the stubs
        let ja = [[0.0, mu], [mu, 0.0]];
        let pieces = [(1.0, [[0.0; 2]; 2]), (2.0 * l + 1.0, ja), (1.0, [[0.0; 2]; 2])];
        let oracle = transfer_eigenvalues(&pieces, [0.0, 1.0], [1.0, 0.0], 2.0)
            .into_iter()
            .map(|x| x * x)
            .fold(f64::INFINITY, f64::min);
        assert!((r.lambda() - oracle).abs() < 1e-6 * oracle, "L={l}: {} vs {oracle}", r.lambda());
        assert!(r.lambda() >= mu * mu / 2.0);
        assert!(r.richardson.order >= 1.9, "{:?}", r.richardson);
    }
}

#[test]
fn non_transversal_lambda_matches_rotating_closed_form() {
    for l in [4.0, 10.0, 16.0] {
        let r = lambda_l(&non_transversal(l, 0.05)).unwrap();
        let oracle = rotating_neck_lambda(AMP, DELTA, l);
        assert!((r.lambda() - oracle).abs() < 1e-4 * oracle, "L={l}: {} vs {oracle}", r.lambda());
    }
}

#[test]
fn non_transversal_lambda_decays_exponentially() {
    let ls = [4.0, 8.0, 12.0, 16.0, 20.0];
    let mut logs = Vec::new();
    for &l in &ls {
        let lam = lambda_l(&non_transversal(l, 0.05)).unwrap().lambda();
        let ell: f64 = 2.0 * l + 3.0;
        logs.push((lam * ell * ell).ln());
    }
    let (_, slope, rms) = swlab_core::linalg::fit_line(&ls, &logs);
    assert!(rms < 0.05, "{rms}");
    assert!((slope + 2.0 * DELTA).abs() < 0.02, "{slope}");
}

#[test]
fn glued_spectrum_is_symmetric_without_perturbation() {
    let spec = glued_spectrum(&transversal(5.0, 0.1), 1.0).unwrap();
    let mut neg: Vec<f64> = spec.iter().map(|x| -x).collect();
    neg.sort_by(|a, b| a.total_cmp(b));
    assert_eq!(spec.len(), neg.len());
    for (a, b) in spec.iter().zip(&neg) {
        assert!((a - b).abs() < 1e-8, "{spec:?}");
    }
}

fn samples(f: impl Fn(f64) -> DVector<f64>, t_max: f64, n: usize) -> Vec<(f64, DVector<f64>)> {
    (0..n).map(|k| {
        let t = t_max * k as f64 / (n - 1) as f64;
        (t, f(t))
    }).collect()
}

fn coupled_end(mu: f64, delta: f64, a: f64) -> EndData {
    let op = validate_compatible(&i4(), &blockdiag(&[DMatrix::zeros(2, 2), dichotomy(mu)])).unwrap();
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 2)] = a;
    m[(2, 0)] = a;
    let p = Perturbation::exponential(0.0, delta, a.abs(), vec![(m, delta)]).unwrap();
    EndData::new(op, p, DMatrix::zeros(4, 4), 1.0, None).unwrap()
}

#[test]
fn limiting_value_of_constant_and_decaying_solutions() {
    let end = coupled_end(1.0, 0.5, 0.0);
    let x0 = DVector::from_vec(vec![0.3, -1.2, 0.0, 0.0]);
    let lv = limiting_value(&end, &samples(|_| x0.clone(), 10.0, 41)).unwrap();
    assert!((&lv.value - &x0).amax() < 1e-14);
    assert!(lv.delta1.is_infinite());
    let decaying = samples(|t| DVector::from_vec(vec![0.0, 0.0, (-t).exp(), 0.0]), 20.0, 81);
    let lv = limiting_value(&end, &decaying).unwrap();
    assert!(lv.value.amax() < 1e-14);
    assert!((lv.delta1 - 1.0).abs() < 1e-6);
}

#[test]
fn limiting_value_matches_variation_of_parameters() {
    let (mu, delta, a) = (1.3, 0.6, 0.8);
    let end = coupled_end(mu, delta, a);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let psi = samples(|t| DVector::from_row_slice(&coupled_end_solution(mu, delta, a, c, t)), 30.0, 121);
        let lv = limiting_value(&end, &psi).unwrap();
        let exact = DVector::from_row_slice(&coupled_end_limit(mu, delta, a, c));
        assert!((&lv.value - &exact).amax() < 1e-6, "{} vs {}", lv.value, exact);
        assert!(lv.delta1 > 0.0);
    }
}

#[test]
fn growing_tail_is_not_settling() {
    let end = coupled_end(1.0, 0.5, 0.0);
    let growing = samples(|t| DVector::from_vec(vec![t.exp(), 0.0, 0.0, 0.0]), 5.0, 41);
    assert!(matches!(limiting_value(&end, &growing), Err(Error::Fit(_))));
}

#[test]
fn reflecting_stub_selects_its_wall() {
    let op = validate_compatible(&j2(), &DMatrix::zeros(2, 2)).unwrap();
    let end = EndData::new(op, Perturbation::zero(), DMatrix::zeros(2, 2), 1.0, Some(unit(2, &[0]))).unwrap();
    let el = end_lagrangian(&end).unwrap();
    let l = el.lagrangian.unwrap();
    assert!((l.basis()[(1, 0)]).abs() < 1e-12 && (l.basis()[(0, 0)].abs() - 1.0).abs() < 1e-12);
    assert_eq!((el.dim_bounded, el.dim_l2), (1, 0));
}

#[test]
fn perturbed_end_rotates_its_line() {
    let g = non_transversal(1.0, 0.2);
    let el = end_lagrangian(&g.left).unwrap();
    let th = AMP / DELTA;
    let v = el.ambient.column(0);
    assert!((v[0] * th.sin() - v[1] * th.cos()).abs() < 1e-8, "{v}");
    assert!(v[2].abs() < 1e-12 && v[3].abs() < 1e-12);
}

#[test]
fn open_end_has_no_lagrangian() {
    assert!(matches!(end_lagrangian(&coupled_end(1.0, 0.5, 0.2)), Err(Error::Precondition(_))));
}

/// Orthogonal matrix commuting with the complex structure i0.
fn unitary(rng: &mut ChaCha8Rng, i0: &DMatrix<f64>) -> DMatrix<f64> {
    let d = i0.nrows();
    let r = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let skew = &r - r.transpose();
    let g = (&skew - i0 * &skew * i0) * 0.5;
    g.exp()
}

#[test]
fn lagrangian_dimension_is_half_the_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let i0 = blockdiag(&[j2(), j2(), j2()]);
    for kernel_blocks in [1usize, 2, 3] {
        for _ in 0..4 {
            let mut blocks = Vec::new();
            for b in 0..3 {
                let mu = rng.gen_range(0.5..2.0);
                blocks.push(if b < kernel_blocks { DMatrix::zeros(2, 2) } else { dichotomy(mu) });
            }
            let u = unitary(&mut rng, &i0);
            let a = &u * blockdiag(&blocks) * u.transpose();
            let op = validate_compatible(&i0, &a).unwrap();
            let v = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-0.5..0.5));
            let stub = (&v + v.transpose()) * 0.5;
            let wall = unitary(&mut rng, &i0) * unit(6, &[0, 2, 4]);
            let end = EndData::new(op, Perturbation::zero(), stub, 1.0, Some(wall)).unwrap();
            let el = end_lagrangian(&end).unwrap();
            assert_eq!(2 * el.ambient.ncols(), 2 * kernel_blocks);
            let l = el.lagrangian.unwrap();
            assert!(l.isotropy_defect() < 1e-10);
            assert_eq!(el.dim_bounded - el.dim_l2, kernel_blocks);
        }
    }
}

fn body_model(h: f64) -> LaplaceModel {
    LaplaceModel { body_length: 1.0, potential: vec![1.0, 1.0], h }
}

#[test]
fn laplace_model_matches_transcendental_equation() {
    for l in [2.0, 20.0, 80.0] {
        let r = delta_l_eigenvalue(&body_model(0.05), l).unwrap();
        let exact = schrodinger_step_lowest(1.0, 1.0, 2.0 * l + 3.0);
        assert!((r.extrapolated - exact).abs() < 1e-6 * exact, "L={l}: {} vs {exact}", r.extrapolated);
        assert!(r.order >= 1.9, "{r:?}");
    }
}

#[test]
fn laplace_experiment_excludes_fast_decay() {
    let ls = [20.0, 40.0, 80.0, 160.0, 320.0];
    let rep = delta_l_experiment(&body_model(0.05), &ls).unwrap();
    assert!(rep.l4_increasing && rep.squared_l4_increasing);
    assert!((rep.slope + 2.0).abs() < 0.1, "{}", rep.slope);
    assert!((rep.slope_squared - 2.0 * rep.slope).abs() < 1e-12);
}

#[test]
fn laplace_without_potential_is_degenerate() {
    let m = LaplaceModel { body_length: 1.0, potential: vec![0.0, 0.0], h: 0.05 };
    assert!(matches!(delta_l_experiment(&m, &[1.0, 2.0]), Err(Error::Precondition(_))));
    assert!(delta_l_eigenvalue(&m, 3.0).unwrap().extrapolated.abs() < 1e-12);
}

#[test]
fn aps_spectrum_matches_transcendental_equation() {
    let mu = 0.7;
    let p = ApsProblem { sigma: j2(), d0: dichotomy(mu), length: 1.0, l1: DMatrix::zeros(2, 0), l2: DMatrix::zeros(2, 0), h: 0.01 };
    let got = aps_boundary_eigs(&p, 8.5).unwrap();
    let exact = aps_closed_form(mu, 1.0, 3);
    let shot = transfer_eigenvalues(&[(1.0, [[0.0, mu], [mu, 0.0]])], [0.0, 1.0], [1.0, 0.0], 8.5);
    assert_eq!(got.len(), exact.len());
    assert_eq!(shot.len(), exact.len());
    for ((g, e), s) in got.iter().zip(&exact).zip(&shot) {
        assert!((e - s).abs() < 1e-10);
        assert!((g - e).abs() < 1e-5 * e.abs(), "{got:?} vs {exact:?}");
    }
}

#[test]
fn equal_lagrangians_give_a_zero_mode() {
    let p = ApsProblem { sigma: j2(), d0: DMatrix::zeros(2, 2), length: 1.0, l1: unit(2, &[0]), l2: unit(2, &[0]), h: 0.05 };
    let spec = aps_boundary_eigs(&p, 1.0).unwrap();
    assert!(spec.iter().any(|x| x.abs() < 1e-10), "{spec:?}");
}

#[test]
fn aps_rank_defect_is_rejected() {
    let p = ApsProblem { sigma: j2(), d0: DMatrix::zeros(2, 2), length: 1.0, l1: DMatrix::zeros(2, 0), l2: unit(2, &[0]), h: 0.05 };
    let err = aps_boundary_eigs(&p, 1.0).unwrap_err();
    assert!(format!("{err}").contains("rank defect"));
}

#[test]
fn splitting_identity_holds_on_the_toy_suite() {
    let suite = toy_suite();
    assert!(suite.len() >= 10);
    let mut nontrivial = 0;
    for p in &suite {
        let r = split_identity(&toy_fixture(p).unwrap()).unwrap();
        assert!(r.holds(), "{}: {} vs {:?} + {}", r.name, r.glued_flow, r.body_flows, r.maslov);
        if r.maslov != 0 && r.body_flows != [0, 0] {
            nontrivial += 1;
        }
    }
    assert!(nontrivial >= 4);
}

#[test]
fn twisting_moves_flow_between_bodies_and_maslov() {
    let base = toy_suite().into_iter().find(|p| p.name == "left-twist").unwrap();
    let mut plain = base.clone();
    plain.windings = [0, 0];
    let twisted = split_identity(&toy_fixture(&base).unwrap()).unwrap();
    let straight = split_identity(&toy_fixture(&plain).unwrap()).unwrap();
    assert_eq!(twisted.glued_flow, straight.glued_flow);
    assert_ne!(twisted.maslov, straight.maslov);
    assert!(twisted.holds() && straight.holds());
}

#[test]
fn library_fixtures_match_the_hand_built_necks() {
    assert_eq!(NeckFixture::Transversal.glued(7.0, 0.2).unwrap(), transversal(7.0, 0.2));
    assert_eq!(NeckFixture::KernelFree { mu: 1.5 }.glued(3.0, 0.1).unwrap(), kernel_free(3.0, 1.5, 0.1));
    let nt = NeckFixture::NonTransversal { amp: AMP, delta: DELTA }.glued(5.0, 0.05).unwrap();
    assert_eq!(nt, non_transversal(5.0, 0.05));
    assert!(NeckFixture::KernelFree { mu: 0.0 }.glued(3.0, 0.1).is_err());
}
