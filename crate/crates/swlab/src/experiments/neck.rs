use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use swlab_core::linalg::fit_line;
use swlab_core::neck::*;

use super::to_value;
use crate::config::Fields;
use crate::error::{CliResult, InModule};
use crate::output::{ExperimentOutput, Table};

const MODULE: &str = "neck_lab";

#[derive(Serialize)]
struct SweepParams {
    /// "transversal", "kernel-free" or "non-transversal".
    fixture: String,
    lengths: Vec<f64>,
    h: f64,
    mu: f64,
    amp: f64,
    delta: f64,
}

pub fn neck_sweep(mut f: Fields) -> CliResult<ExperimentOutput> {
    let fixture = f.opt("fixture", "transversal".to_string());
    let (lengths, h): (Vec<f64>, f64) = match fixture.as_str() {
        "transversal" => (vec![10.0, 20.0, 40.0, 80.0, 160.0], 0.2),
        "kernel-free" => (vec![1.0, 5.0, 20.0], 0.05),
        "non-transversal" => (vec![4.0, 8.0, 12.0, 16.0, 20.0], 0.05),
        _ => {
            f.issue("fixture", "expected \"transversal\", \"kernel-free\" or \"non-transversal\"".into());
            (vec![1.0], 0.1)
        }
    };
    let lengths = f.opt("lengths", lengths);
    f.check(
        "lengths",
        lengths.len() >= 2 && lengths.iter().all(|l| *l > 0.0 && l.is_finite()),
        "need at least two positive half-lengths",
    );
    let h = f.opt("h", h);
    f.check("h", h > 0.0 && h.is_finite(), "must be positive");
    let mu = f.opt("mu", 1.0f64);
    let amp = f.opt("amp", 0.1f64);
    let delta = f.opt("delta", 0.2f64);
    f.finish("neck-sweep")?;
    let p = SweepParams { fixture, lengths, h, mu, amp, delta };
    let fx = match p.fixture.as_str() {
        "transversal" => NeckFixture::Transversal,
        "kernel-free" => NeckFixture::KernelFree { mu: p.mu },
        _ => NeckFixture::NonTransversal { amp: p.amp, delta: p.delta },
    };
    let reports: Vec<LambdaReport> = p
        .lengths
        .par_iter()
        .map(|&l| lambda_l(&fx.glued(l, p.h)?))
        .collect::<swlab_core::Result<_>>()
        .in_module(MODULE)?;

    let mut table = Table::new(&["L", "h", "lambda_L", "richardson_order"]);
    for r in &reports {
        table.push(vec![r.half_length.into(), p.h.into(), r.lambda().into(), r.richardson.order.into()]);
    }
    let lam: Vec<f64> = reports.iter().map(|r| r.lambda()).collect();
    let mut summary = json!({
        "fixture": fx.name(),
        "min_lambda": lam.iter().copied().fold(f64::INFINITY, f64::min),
        "min_richardson_order": reports.iter().map(|r| r.richardson.order).fold(f64::INFINITY, f64::min),
    });
    if lam.iter().all(|l| *l > 0.0) {
        let (slope, rms) = loglog_slope(&p.lengths, &lam).in_module(MODULE)?;
        summary["loglog_slope"] = json!(slope);
        summary["loglog_rms"] = json!(rms);
        // exponential fit of λ·ℓ², ℓ = 2L + 3 the glued length
        let logs: Vec<f64> = p.lengths.iter().zip(&lam).map(|(l, x)| (x * (2.0 * l + 3.0).powi(2)).ln()).collect();
        let (_, rate, rms) = fit_line(&p.lengths, &logs);
        summary["exponential_rate"] = json!(rate);
        summary["exponential_rms"] = json!(rms);
    }
    Ok(ExperimentOutput { table, summary, parameters: to_value(&p) })
}

#[derive(Serialize)]
struct DeltaParams {
    body_length: f64,
    potential: Vec<f64>,
    h: f64,
    lengths: Vec<f64>,
}

pub fn delta_l(mut f: Fields) -> CliResult<ExperimentOutput> {
    let body_length = f.opt("body_length", 1.0f64);
    let potential = f.opt("potential", vec![1.0, 1.0]);
    let h = f.opt("h", 0.05f64);
    let lengths = f.opt("lengths", vec![20.0, 40.0, 80.0, 160.0, 320.0]);
    f.finish("delta-L")?;
    let p = DeltaParams { body_length, potential, h, lengths };
    let model = LaplaceModel { body_length: p.body_length, potential: p.potential.clone(), h: p.h };
    let rep = delta_l_experiment(&model, &p.lengths).in_module(MODULE)?;
    let mut table = Table::new(&["L", "h", "lambda_L", "lambda_squared", "richardson_order"]);
    for r in &rep.rows {
        table.push(vec![r.l.into(), p.h.into(), r.lambda.into(), r.lambda_squared.into(), r.richardson.order.into()]);
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({
            "slope": rep.slope,
            "slope_squared": rep.slope_squared,
            "l4_increasing": rep.l4_increasing,
            "squared_l4_increasing": rep.squared_l4_increasing,
        }),
        parameters: to_value(&p),
    })
}

/// Config form of one toy fixture; omitted fields take the suite defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ToyConfig {
    name: String,
    d0_turn: f64,
    d0_scale: [f64; 2],
    shift: [f64; 2],
    coupling: [f64; 2],
    windings: [i32; 2],
    half_length: f64,
    samples: usize,
    h: f64,
    window: f64,
    body_eps: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        let base = toy_suite().into_iter().next().expect("the toy suite is nonempty");
        let mut c = ToyConfig::from(&base);
        c.name = "custom".into();
        c
    }
}

impl From<&ToyParams> for ToyConfig {
    fn from(p: &ToyParams) -> Self {
        ToyConfig {
            name: p.name.clone(),
            d0_turn: p.d0_turn,
            d0_scale: p.d0_scale,
            shift: p.shift,
            coupling: p.coupling,
            windings: p.windings,
            half_length: p.half_length,
            samples: p.samples,
            h: p.h,
            window: p.window,
            body_eps: p.body_eps,
        }
    }
}

impl From<&ToyConfig> for ToyParams {
    fn from(c: &ToyConfig) -> Self {
        ToyParams {
            name: c.name.clone(),
            d0_turn: c.d0_turn,
            d0_scale: c.d0_scale,
            shift: c.shift,
            coupling: c.coupling,
            windings: c.windings,
            half_length: c.half_length,
            samples: c.samples,
            h: c.h,
            window: c.window,
            body_eps: c.body_eps,
        }
    }
}

#[derive(Serialize)]
struct MasParams {
    fixtures: Vec<ToyConfig>,
}

pub fn mas_sf(mut f: Fields) -> CliResult<ExperimentOutput> {
    let suite: Vec<ToyConfig> = toy_suite().iter().map(ToyConfig::from).collect();
    let fixtures: Vec<ToyConfig> = if f.has("fixtures") {
        f.req("fixtures").unwrap_or_default()
    } else {
        let names: Vec<String> = f.opt("names", Vec::new());
        for n in &names {
            f.check("names", suite.iter().any(|s| &s.name == n), "unknown suite fixture");
        }
        suite.into_iter().filter(|s| names.is_empty() || names.contains(&s.name)).collect()
    };
    f.check("fixtures", !f.has("fixtures") || !fixtures.is_empty(), "need at least one fixture");
    f.finish("mas-sf")?;
    let p = MasParams { fixtures };
    let reports: Vec<SplitReport> = p
        .fixtures
        .par_iter()
        .map(|c| split_identity(&toy_fixture(&ToyParams::from(c))?))
        .collect::<swlab_core::Result<_>>()
        .in_module(MODULE)?;
    let mut table = Table::new(&["name", "glued_flow", "body_flow_1", "body_flow_2", "maslov", "holds"]);
    for r in &reports {
        table.push(vec![
            r.name.clone().into(),
            r.glued_flow.into(),
            r.body_flows[0].into(),
            r.body_flows[1].into(),
            r.maslov.into(),
            r.holds().into(),
        ]);
    }
    let nontrivial = reports.iter().filter(|r| r.maslov != 0 && r.body_flows != [0, 0]).count();
    Ok(ExperimentOutput {
        table,
        summary: json!({
            "fixtures": reports.len(),
            "holding": reports.iter().filter(|r| r.holds()).count(),
            "nontrivial": nontrivial,
        }),
        parameters: to_value(&p),
    })
}
