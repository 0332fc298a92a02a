use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use swlab_core::field::*;

use super::to_value;
use crate::config::Fields;
use crate::error::{CliResult, InModule};
use crate::output::{ExperimentOutput, Table};

const MODULE: &str = "field_calculus";

#[derive(Serialize)]
struct DescentParams {
    n: usize,
    spin: [u8; 3],
    /// Scale of the random initial values before band limiting.
    amplitude: f64,
    steps: usize,
    dt: f64,
    /// "residual" descends ½‖∇CSD‖², "csd" descends CSD itself.
    objective: String,
    tolerance: f64,
}

pub fn csd_descent(mut f: Fields, seed: u64) -> CliResult<ExperimentOutput> {
    let n = f.opt("n", 8usize);
    f.check("n", (2..=32).contains(&n), "modes per axis must lie in 2..=32");
    let spin = f.opt("spin", [0u8; 3]);
    f.check("spin", spin.iter().all(|x| *x <= 1), "entries must be 0 or 1");
    let amplitude = f.opt("amplitude", 0.3f64);
    f.check("amplitude", amplitude.is_finite() && amplitude >= 0.0, "must be finite and nonnegative");
    let steps = f.opt("steps", 100usize);
    let dt = f.opt("dt", 0.05f64);
    f.check("dt", dt > 0.0 && dt.is_finite(), "must be positive");
    let objective = f.opt("objective", "residual".to_string());
    f.check("objective", objective == "residual" || objective == "csd", "expected \"residual\" or \"csd\"");
    let tolerance = f.opt("tolerance", 1e-10f64);
    f.check("tolerance", tolerance >= 0.0, "must be nonnegative");
    f.finish("csd-descent")?;
    let p = DescentParams { n, spin, amplitude, steps, dt, objective, tolerance };

    let grid = Grid3::torus3([p.n; 3], p.spin).in_module(MODULE)?;
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut init = FieldState::zero(&grid);
    for a in init.a.iter_mut() {
        a.iter_mut().for_each(|v| *v = p.amplitude * r.gen_range(-1.0..1.0));
    }
    for v in init.z.iter_mut().chain(init.w.iter_mut()) {
        *v = C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * p.amplitude;
    }
    let init = init.band_limited().in_module(MODULE)?;
    let pert = PerturbationData::zero(&grid);
    let objective = if p.objective == "csd" { FlowObjective::Csd } else { FlowObjective::Residual };
    let mut settings = FlowSettings::new(p.steps, p.dt, objective);
    settings.tolerance = p.tolerance;
    let traj = gradient_flow(&init, &pert, settings).in_module(MODULE)?;

    let mut table = Table::new(&["step", "csd", "residual", "dt"]);
    for s in &traj.history {
        table.push(vec![s.step.into(), s.csd.into(), s.residual.into(), s.dt.into()]);
    }
    let first = traj.history.first().map_or(f64::NAN, |s| s.residual);
    Ok(ExperimentOutput {
        table,
        summary: json!({
            "steps_taken": traj.history.len().saturating_sub(1),
            "initial_residual": first,
            "final_residual": traj.final_residual(),
            "final_csd": traj.history.last().map_or(f64::NAN, |s| s.csd),
            "stalled": traj.stalled,
        }),
        parameters: to_value(&p),
    })
}
