use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use swlab_core::torus::*;

use super::to_value;
use crate::config::Fields;
use crate::error::{CliResult, InModule};
use crate::output::{ExperimentOutput, Table};

const MODULE: &str = "torus_spectra";

fn spin_field(f: &mut Fields) -> [u8; 2] {
    let spin = f.opt("spin", [0u8, 0]);
    f.check("spin", spin.iter().all(|x| *x <= 1), "entries must be 0 or 1");
    spin
}

fn spin_of(s: [u8; 2]) -> CliResult<SpinStructure> {
    SpinStructure::new(s[0], s[1]).in_module(MODULE)
}

#[derive(Serialize)]
struct BadpointsParams {
    spin: [u8; 2],
    n: usize,
    cutoff: usize,
    /// "centred": the cell centred on the bad point; "unit": [0, 1]².
    cell: String,
}

pub fn badpoints(mut f: Fields) -> CliResult<ExperimentOutput> {
    let spin = spin_field(&mut f);
    let n = f.opt("n", 41usize);
    f.check("n", n >= 2, "need at least two points per side");
    let cutoff = f.opt("cutoff", 2usize);
    f.check("cutoff", cutoff >= 1, "mode cutoff must be at least 1");
    let cell = f.opt("cell", "centred".to_string());
    f.check("cell", cell == "centred" || cell == "unit", "expected \"centred\" or \"unit\"");
    f.finish("badpoints")?;
    let p = BadpointsParams { spin, n, cutoff, cell };
    let s = spin_of(p.spin)?;

    let origin = if p.cell == "unit" { HarmonicPoint::default() } else { bad_point(s) };
    let half = if p.cell == "unit" { 0.0 } else { (n - 1) as f64 / 2.0 };
    let points: Vec<HarmonicPoint> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            HarmonicPoint::new(
                origin.alpha + (i as f64 - half) / (n - 1) as f64,
                origin.beta + (j as f64 - half) / (n - 1) as f64,
            )
        })
        .collect();
    let spectra: Vec<SpectrumReport> = points
        .par_iter()
        .map(|a| dirac_spectrum(s, *a, p.cutoff))
        .collect::<Result<_, _>>()
        .in_module(MODULE)?;

    let mut table = Table::new(&["alpha", "beta", "gap", "kernel_dim", "on_lattice"]);
    let (mut kernel_points, mut mismatches) = (0usize, 0usize);
    let mut smallest_off_lattice = f64::INFINITY;
    for (a, sp) in points.iter().zip(&spectra) {
        let on = bad_distance(s, *a) < 1e-12;
        let gap = sp.smallest_abs();
        kernel_points += (sp.kernel_dim > 0) as usize;
        mismatches += ((sp.kernel_dim == 2) != on || (sp.kernel_dim != 0 && sp.kernel_dim != 2)) as usize;
        if !on {
            smallest_off_lattice = smallest_off_lattice.min(gap);
        }
        table.push(vec![a.alpha.into(), a.beta.into(), gap.into(), sp.kernel_dim.into(), on.into()]);
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({
            "points": points.len(),
            "kernel_points": kernel_points,
            "lattice_mismatches": mismatches,
            "smallest_gap_off_lattice": smallest_off_lattice,
        }),
        parameters: to_value(&p),
    })
}

#[derive(Serialize)]
struct SpectrumParams {
    spin: [u8; 2],
    alpha: f64,
    beta: f64,
    cutoff: usize,
    /// "dirac" for D_a, "model" for the block operator B_a.
    operator: String,
    /// "fourier-dense" or "closed-form" (Dirac only).
    method: String,
}

pub fn spectrum(mut f: Fields) -> CliResult<ExperimentOutput> {
    let spin = spin_field(&mut f);
    let alpha = f.opt("alpha", 0.0f64);
    let beta = f.opt("beta", 0.0f64);
    f.check("alpha", alpha.is_finite(), "must be finite");
    f.check("beta", beta.is_finite(), "must be finite");
    let cutoff = f.opt("cutoff", 4usize);
    f.check("cutoff", cutoff >= 1, "mode cutoff must be at least 1");
    let operator = f.opt("operator", "dirac".to_string());
    f.check("operator", operator == "dirac" || operator == "model", "expected \"dirac\" or \"model\"");
    let method = f.opt("method", "fourier-dense".to_string());
    f.check(
        "method",
        method == "fourier-dense" || (method == "closed-form" && operator == "dirac"),
        "expected \"fourier-dense\", or \"closed-form\" for the Dirac operator",
    );
    f.finish("spectrum")?;
    let p = SpectrumParams { spin, alpha, beta, cutoff, operator, method };
    let s = spin_of(p.spin)?;
    let a = HarmonicPoint::new(p.alpha, p.beta);
    let report = match (p.operator.as_str(), p.method.as_str()) {
        ("model", _) => b_operator_spectrum(s, a, p.cutoff),
        (_, "closed-form") => dirac_spectrum_closed_form(s, a, p.cutoff),
        _ => dirac_spectrum(s, a, p.cutoff),
    }
    .in_module(MODULE)?;
    let mut table = Table::new(&["index", "eigenvalue"]);
    for (k, l) in report.eigenvalues.iter().enumerate() {
        table.push(vec![k.into(), (*l).into()]);
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({
            "spin": p.spin,
            "a": [p.alpha, p.beta],
            "cutoff": p.cutoff,
            "eigenvalues": report.eigenvalues,
            "kernel_dim": report.kernel_dim,
            "smallest_abs": report.smallest_abs(),
        }),
        parameters: to_value(&p),
    })
}

#[derive(Serialize)]
struct GapsParams {
    spin: [u8; 2],
    radii: Vec<f64>,
    samples: usize,
    cutoff: usize,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn gaps(mut f: Fields) -> CliResult<ExperimentOutput> {
    let spin = spin_field(&mut f);
    let radii = f.opt("radii", vec![0.05, 0.1, 0.2, 0.4]);
    f.check("radii", !radii.is_empty() && radii.iter().all(|r| *r > 0.0 && *r < 0.5), "need radii in (0, 0.5)");
    let samples = f.opt("samples", 256usize);
    f.check("samples", samples >= 2, "need at least two sample points");
    let cutoff = f.opt("cutoff", 3usize);
    f.check("cutoff", cutoff >= 1, "mode cutoff must be at least 1");
    f.finish("gaps")?;
    let p = GapsParams { spin, radii, samples, cutoff };
    let s = spin_of(p.spin)?;
    let rows: Vec<(f64, GapConstants, GapConstants)> = p
        .radii
        .par_iter()
        .map(|&r| Ok((r, gap_constants(s, r)?, sampled_gap_constants(s, r, p.samples, p.cutoff)?)))
        .collect::<swlab_core::Result<_>>()
        .in_module(MODULE)?;
    let mut table = Table::new(&[
        "r", "c_closed", "c_sampled", "delta_closed", "delta_sampled", "delta0_closed", "delta0_sampled", "max_rel_error",
    ]);
    let mut worst = 0.0f64;
    for (r, c, m) in &rows {
        let e = rel(c.c, m.c).max(rel(c.delta, m.delta)).max(rel(c.delta0, m.delta0));
        worst = worst.max(e);
        table.push(vec![
            (*r).into(),
            c.c.into(),
            m.c.into(),
            c.delta.into(),
            m.delta.into(),
            c.delta0.into(),
            m.delta0.into(),
            e.into(),
        ]);
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({ "max_rel_error": worst, "form_block_gap": form_block_gap(p.cutoff) }),
        parameters: to_value(&p),
    })
}
