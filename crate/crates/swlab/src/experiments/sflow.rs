use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use swlab_core::linalg::{realify, sym_eigenvalues};
use swlab_core::sflow::*;

use super::to_value;
use crate::config::Fields;
use crate::error::{CliResult, InModule};
use crate::output::{ExperimentOutput, Table};

const MODULE: &str = "spectral_flow";

fn random_hermitian(n: usize, r: &mut ChaCha8Rng) -> DMatrix<C64> {
    let m = DMatrix::from_fn(n, n, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    (&m + m.adjoint()).map(|z| z * 0.5)
}

/// Realified quaternionic hermitian [[A, −B̄], [B, Ā]], A hermitian, B
/// antisymmetric.
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

fn random_sym(d: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| r.gen_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

fn negative_count(m: &DMatrix<f64>) -> i64 {
    sym_eigenvalues(m).iter().filter(|&&x| x < 0.0).count() as i64
}

#[derive(Serialize)]
struct FlowParams {
    /// "real", "complex" or "quaternionic" symmetry of the random family.
    family: String,
    rank: usize,
    coupling: f64,
    t0: f64,
    t1: f64,
    samples: usize,
    window: f64,
    eps1: f64,
    eps2: f64,
}

/// SF of K(t) = c·H₀ + (1 + c·H₁)·t with H₀, H₁ drawn from the seed.
pub fn flow(mut f: Fields, seed: u64) -> CliResult<ExperimentOutput> {
    let family = f.opt("family", "quaternionic".to_string());
    f.check(
        "family",
        ["real", "complex", "quaternionic"].contains(&family.as_str()),
        "expected \"real\", \"complex\" or \"quaternionic\"",
    );
    let rank = f.opt("rank", 2usize);
    f.check("rank", (1..=32).contains(&rank), "rank must lie in 1..=32");
    let coupling = f.opt("coupling", 0.3f64);
    f.check("coupling", coupling.is_finite(), "must be finite");
    let t0 = f.opt("t0", -1.0f64);
    let t1 = f.opt("t1", 1.0f64);
    f.check("t1", t0.is_finite() && t1.is_finite() && t1 > t0, "need finite t0 < t1");
    let samples = f.opt("samples", 800usize);
    f.check("samples", samples >= 2, "need at least two samples");
    let window = f.opt("window", 100.0f64);
    f.check("window", window > 0.0, "must be positive");
    let eps1 = f.opt("eps1", 0.0f64);
    let eps2 = f.opt("eps2", 0.0f64);
    f.finish("flow")?;
    let p = FlowParams { family, rank, coupling, t0, t1, samples, window, eps1, eps2 };

    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let (h0, h1) = match p.family.as_str() {
        "real" => (random_sym(p.rank, &mut r), random_sym(p.rank, &mut r)),
        "complex" => (realify(&random_hermitian(p.rank, &mut r)), realify(&random_hermitian(p.rank, &mut r))),
        _ => (random_quaternionic(p.rank, &mut r), random_quaternionic(p.rank, &mut r)),
    };
    let id = DMatrix::<f64>::identity(h0.nrows(), h0.nrows());
    let k = |t: f64| &h0 * p.coupling + (&id + &h1 * p.coupling) * t;
    let path = OperatorPath::from_fn(p.t0, p.t1, p.samples, k).in_module(MODULE)?;
    let tr = track(&path, p.window).in_module(MODULE)?;
    let rep = spectral_flow(&tr, p.eps1, p.eps2).in_module(MODULE)?;
    let mut table = Table::new(&["t", "slope", "direction", "branch"]);
    for c in &rep.crossings {
        table.push(vec![c.t.into(), c.slope.into(), (c.direction as i64).into(), c.branch.into()]);
    }
    let shifted = |t: f64, e: f64| k(t) - &id * e;
    let count_change = negative_count(&shifted(p.t0, p.eps1)) - negative_count(&shifted(p.t1, p.eps2));
    Ok(ExperimentOutput {
        table,
        summary: json!({
            "dimension": h0.nrows(),
            "flow": rep.flow,
            "crossings": rep.crossings.len(),
            "endpoint_count_change": count_change,
        }),
        parameters: to_value(&p),
    })
}

#[derive(Serialize)]
struct ChiParams {
    /// Spectra of diagonal critical Hessians; random ones when empty.
    spectra: Vec<Vec<f64>>,
    count: usize,
    dim: usize,
    anchor: usize,
    /// Sign of ∫⟨D′φ̃, φ̃⟩ for the reference count; omitted when zero.
    reference_integral: f64,
}

pub fn chi(mut f: Fields, seed: u64) -> CliResult<ExperimentOutput> {
    let spectra: Vec<Vec<f64>> = f.opt("spectra", Vec::new());
    let given = !spectra.is_empty();
    f.check(
        "spectra",
        spectra.iter().all(|s| !s.is_empty() && s.len() == spectra[0].len() && s.iter().all(|x| x.is_finite())),
        "spectra must be nonempty, finite and of one length",
    );
    let count = f.opt("count", 5usize);
    let dim = f.opt("dim", 6usize);
    f.check("count", given || count >= 1, "need at least one critical point");
    f.check("dim", given || (1..=64).contains(&dim), "dim must lie in 1..=64");
    let anchor = f.opt("anchor", 0usize);
    let n = if given { spectra.len() } else { count };
    f.check("anchor", anchor < n.max(1), "anchor out of range");
    let reference_integral = f.opt("reference_integral", 0.0f64);
    f.check("reference_integral", reference_integral.is_finite(), "must be finite");
    f.finish("chi")?;
    let p = ChiParams { spectra, count: n, dim: if given { 0 } else { dim }, anchor, reference_integral };

    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let critical: Vec<DMatrix<f64>> = if given {
        p.spectra.iter().map(|s| DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(s))).collect()
    } else {
        (0..p.count).map(|_| random_sym(p.dim, &mut r)).collect()
    };
    let base = &critical[p.anchor];
    let mut table = Table::new(&["index", "negative_count", "flow_to_anchor", "sign"]);
    for (k, m) in critical.iter().enumerate() {
        let sf = endpoint_flow(m, base).in_module(MODULE)?;
        let sign = if sf.rem_euclid(2) == 0 { 1i64 } else { -1 };
        table.push(vec![k.into(), negative_count(m).into(), sf.into(), sign.into()]);
    }
    let relative = chi_relative(&critical, p.anchor).in_module(MODULE)?;
    let mut summary = json!({ "chi_relative": relative });
    if p.reference_integral != 0.0 {
        let d = critical[0].nrows();
        let reference = ChiReference { op: random_sym(d, &mut r), dprime_integral: p.reference_integral };
        summary["chi"] = json!(chi_count(&critical, &reference).in_module(MODULE)?);
    }
    Ok(ExperimentOutput { table, summary, parameters: to_value(&p) })
}

#[derive(Serialize)]
struct IntersectParams {
    curve1: Vec<[f64; 2]>,
    curve2: Vec<[f64; 2]>,
    /// Period in x when the curves live on a cylinder.
    period: Option<f64>,
    refine: usize,
}

pub fn intersect(mut f: Fields) -> CliResult<ExperimentOutput> {
    let curve1: Option<Vec<[f64; 2]>> = f.req("curve1");
    let curve2: Option<Vec<[f64; 2]>> = f.req("curve2");
    for (key, c) in [("curve1", &curve1), ("curve2", &curve2)] {
        if let Some(c) = c {
            f.check(key, c.len() >= 2, "a polyline needs at least two vertices");
        }
    }
    let period: Option<f64> = if f.has("period") { f.req("period") } else { None };
    let refine = f.opt("refine", 1usize);
    f.check("refine", refine >= 1, "must be at least 1");
    f.finish("intersect")?;
    let p = IntersectParams { curve1: curve1.unwrap_or_default(), curve2: curve2.unwrap_or_default(), period, refine };
    let build = |pts: &Vec<[f64; 2]>| match p.period {
        Some(per) => Polyline::on_cylinder(pts.clone(), per),
        None => Polyline::new(pts.clone()),
    };
    let (c1, c2) = (build(&p.curve1).in_module(MODULE)?, build(&p.curve2).in_module(MODULE)?);
    let mut table = Table::new(&["refine", "intersection_number"]);
    let mut values = Vec::new();
    for k in 1..=p.refine {
        let v = intersection_number(&c1.refined(k), &c2.refined(k)).in_module(MODULE)?;
        values.push(v);
        table.push(vec![k.into(), v.into()]);
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({
            "intersection_number": values[0],
            "refinement_invariant": values.iter().all(|v| *v == values[0]),
        }),
        parameters: to_value(&p),
    })
}
