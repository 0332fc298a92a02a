use alloc::format;
use alloc::vec::Vec;

use super::functional::LinearOp;
use super::{csd, sw_gradient, FieldState, PerturbationData};
use crate::{Error, Result};

/// The quantity that the descent decreases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowObjective {
    /// x ← x − dt·s′(x) with backtracking on CSD.
    Csd,
    /// x ← x − dt·Ds′(x)ᵀs′(x) with backtracking on ½‖s′‖². CSD is
    /// unbounded in both directions, so descent on CSD alone leaves every
    /// neighbourhood of an indefinite critical point; this objective
    /// converges to a zero of s′ instead.
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSettings {
    pub steps: usize,
    pub dt: f64,
    pub objective: FlowObjective,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Backtracking gives up below this step.
    pub min_dt: f64,
    /// Stop once ‖s′‖ falls below this.
    pub tolerance: f64,
}

impl FlowSettings {
    pub fn new(steps: usize, dt: f64, objective: FlowObjective) -> Self {
        FlowSettings {
            steps,
            dt,
            objective,
            armijo: 1e-4,
            min_dt: 1e-14,
            tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub step: usize,
    pub csd: f64,
    pub residual: f64,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub history: Vec<TrajectoryStep>,
    pub final_state: FieldState,
    /// Whether backtracking failed to find an admissible step.
    pub stalled: bool,
}

impl Trajectory {
    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |s| s.residual)
    }
}

fn finite_or_abort(x: f64, what: &str, step: usize) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::numerical(format!("{what} became non-finite at step {step}")))
    }
}

fn trial_point(
    x: &FieldState,
    dir: &FieldState,
    dt: f64,
    pert: &PerturbationData,
) -> Result<Option<(FieldState, FieldState, f64, f64)>> {
    let y = x.add_scaled(-dt, dir);
    if !y.max_abs().is_finite() {
        return Ok(None);
    }
    let gy = sw_gradient(&y, pert)?;
    let fy = csd(&y, pert)?;
    let ry = gy.norm();
    if fy.is_finite() && ry.is_finite() {
        Ok(Some((y, gy, fy, ry)))
    } else {
        Ok(None)
    }
}

pub fn gradient_flow(init: &FieldState, pert: &PerturbationData, settings: FlowSettings) -> Result<Trajectory> {
    if !(settings.dt > 0.0) {
        return Err(Error::Domain {
            name: "dt",
            value: settings.dt,
            domain: "dt > 0",
        });
    }
    let mut x = init.band_limited()?;
    let mut g = sw_gradient(&x, pert)?;
    let mut f = csd(&x, pert)?;
    let mut r = g.norm();
    let mut history = Vec::with_capacity(settings.steps + 1);
    history.push(TrajectoryStep {
        step: 0,
        csd: f,
        residual: r,
        dt: 0.0,
    });
    let mut dt = settings.dt;
    let mut stalled = false;
    for step in 1..=settings.steps {
        if r <= settings.tolerance || r == 0.0 {
            break;
        }
        let dir = match settings.objective {
            FlowObjective::Csd => g.clone(),
            FlowObjective::Residual => LinearOp::new(&x, pert)?.apply(&g)?,
        };
        let slope = match settings.objective {
            FlowObjective::Csd => r * r,
            FlowObjective::Residual => dir.dot(&dir),
        };
        finite_or_abort(slope, "descent direction", step)?;
        if slope == 0.0 {
            break;
        }
        let current = match settings.objective {
            FlowObjective::Csd => f,
            FlowObjective::Residual => 0.5 * r * r,
        };
        let mut accepted = None;
        while dt >= settings.min_dt {
            // trial points that overflow count as rejected steps
            if let Some(trial) = trial_point(&x, &dir, dt, pert)? {
                let (_, _, fy, ry) = &trial;
                let value = match settings.objective {
                    FlowObjective::Csd => *fy,
                    FlowObjective::Residual => 0.5 * ry * ry,
                };
                let decrease_ok = value <= current - settings.armijo * dt * slope;
                let csd_ok = settings.objective == FlowObjective::Residual || *fy <= f;
                if decrease_ok && csd_ok {
                    accepted = Some(trial);
                    break;
                }
            }
            dt *= 0.5;
        }
        let Some((y, gy, fy, ry)) = accepted else {
            stalled = true;
            break;
        };
        x = y;
        g = gy;
        f = fy;
        r = ry;
        history.push(TrajectoryStep {
            step,
            csd: f,
            residual: r,
            dt,
        });
        dt = (dt * 1.5).min(settings.dt);
    }
    Ok(Trajectory {
        history,
        final_state: x,
        stalled,
    })
}
