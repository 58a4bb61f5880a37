//! Zero trajectories while one boundary angle is swept.
//!
//! Sweeps over `beta` follow the left-launched eigenfunction `phi_n`, whose
//! value at `x = 0` does not depend on `beta`; sweeps over `alpha` follow the
//! right-launched `psi_n`. Each grid angle is solved independently and zeros
//! are linked between neighbouring angles by nearest neighbour with a
//! displacement guard. Zeros may only appear or disappear through an
//! endpoint; anything else is reported as a linking failure.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::oscillation;
use crate::potential::Potential;
use crate::shooting::DEFAULT_CELLS;
use crate::spectrum::{BoundaryParams, Solver};

pub const DEFAULT_GRID_POINTS: usize = 64;
pub const MIN_GRID_POINTS: usize = 8;
pub const TRANSITION_WIDTH: f64 = 1e-8;

/// Points inserted into each grid interval that contains an event.
const EVENT_REFINEMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Vary {
    Beta,
    Alpha,
}

impl std::str::FromStr for Vary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(Vary::Beta),
            "alpha" => Ok(Vary::Alpha),
            other => Err(Error::InvalidPlan(format!("cannot vary `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub q: Potential,
    pub n: usize,
    pub vary: Vary,
    pub fixed_angle: f64,
    pub grid: Vec<f64>,
    pub cells: usize,
}

impl SweepPlan {
    /// Uniform grid over `[0, 0.95 pi]` for `beta` or `[0.05 pi, pi]` for `alpha`.
    pub fn uniform(q: Potential, n: usize, vary: Vary, fixed_angle: f64, points: usize) -> Result<Self> {
        let (lo, hi) = match vary {
            Vary::Beta => (0.0, 0.95 * PI),
            Vary::Alpha => (0.05 * PI, PI),
        };
        Self::over(q, n, vary, fixed_angle, lo, hi, points)
    }

    pub fn over(
        q: Potential,
        n: usize,
        vary: Vary,
        fixed_angle: f64,
        lo: f64,
        hi: f64,
        points: usize,
    ) -> Result<Self> {
        if points < MIN_GRID_POINTS {
            return Err(Error::InvalidPlan(format!(
                "{points} grid points; at least {MIN_GRID_POINTS} required"
            )));
        }
        let step = (hi - lo) / (points - 1) as f64;
        let mut grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
        grid[points - 1] = hi;
        let plan = SweepPlan { q, n, vary, fixed_angle, grid, cells: DEFAULT_CELLS };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < MIN_GRID_POINTS {
            return Err(Error::InvalidPlan(format!(
                "{} grid points; at least {MIN_GRID_POINTS} required",
                self.grid.len()
            )));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPlan("grid must be strictly increasing".into()));
        }
        for &a in &self.grid {
            self.boundary(a).map_err(|e| Error::InvalidPlan(e.to_string()))?;
        }
        Ok(())
    }

    pub fn boundary(&self, angle: f64) -> Result<BoundaryParams> {
        match self.vary {
            Vary::Beta => BoundaryParams::new(self.fixed_angle, angle),
            Vary::Alpha => BoundaryParams::new(angle, self.fixed_angle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    EnteredAtLeft,
    ExitedAtRight,
    EnteredAtRight,
    ExitedAtLeft,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::EnteredAtLeft => "entered_at_left",
            EventKind::ExitedAtRight => "exited_at_right",
            EventKind::EnteredAtRight => "entered_at_right",
            EventKind::ExitedAtLeft => "exited_at_left",
        }
    }

    pub fn at_right(&self) -> bool {
        matches!(self, EventKind::ExitedAtRight | EventKind::EnteredAtRight)
    }
}

/// Endpoint event bracketed between two consecutive sweep angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepEvent {
    pub kind: EventKind,
    pub angle_lo: f64,
    pub angle_hi: f64,
    /// Identity of the zero trajectory the event belongs to.
    pub trajectory: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroTrajectory {
    pub identity: usize,
    /// `(angle, x)` samples.
    pub points: Vec<(f64, f64)>,
    pub events: Vec<SweepEvent>,
}

impl ZeroTrajectory {
    /// x never decreases along the sweep (up to `tol`).
    pub fn non_decreasing(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1 - tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub vary: Vary,
    pub n: usize,
    pub angles: Vec<f64>,
    pub mu: Vec<f64>,
    /// Zeros in `[0, pi]` at each angle, ascending.
    pub zeros: Vec<Vec<f64>>,
    pub trajectories: Vec<ZeroTrajectory>,
    pub events: Vec<SweepEvent>,
    /// Decreasing in `beta`, increasing in `alpha`, strictly.
    pub mu_monotone: bool,
}

impl SweepResult {
    pub fn interior_counts(&self) -> Vec<usize> {
        self.zeros
            .iter()
            .map(|z| z.iter().filter(|&&x| x > 0.0 && x < PI).count())
            .collect()
    }
}

/// Eigenvalue and tracked zeros at one angle.
fn solve_angle(solver: &Solver, plan: &SweepPlan, angle: f64) -> Result<(f64, Vec<f64>)> {
    let bc = plan.boundary(angle)?;
    let mu = solver.eigenvalue(plan.n, bc)?;
    let zeros = match plan.vary {
        Vary::Beta => {
            let phi = solver.propagate(mu, bc.left())?;
            oscillation::find_zeros(&phi, bc.beta() == 0.0)?
        }
        Vary::Alpha => {
            let psi = solver.propagate(mu, bc.right())?;
            oscillation::find_zeros(&psi, bc.alpha() == PI)?
        }
    };
    Ok((mu, zeros.into_iter().map(|z| z.x).collect()))
}

fn solve_all(
    solver: &Solver,
    plan: &SweepPlan,
    angles: &[f64],
    exec: Execution,
) -> Result<Vec<(f64, Vec<f64>)>> {
    exec::map(exec, angles, |&a| solve_angle(solver, plan, a)).into_iter().collect()
}

pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    run_sweep_with(plan, Execution::available())
}

pub fn run_sweep_with(plan: &SweepPlan, exec: Execution) -> Result<SweepResult> {
    plan.validate()?;
    let solver = Solver::new(plan.q.clone(), plan.cells)?;
    let mut angles = plan.grid.clone();
    let mut solved = solve_all(&solver, plan, &angles, exec)?;
    let (mut trajectories, mut events) = link(&angles, &solved)?;

    if !events.is_empty() {
        let mut extra = Vec::new();
        for ev in &events {
            let step = (ev.angle_hi - ev.angle_lo) / EVENT_REFINEMENT as f64;
            for i in 1..EVENT_REFINEMENT {
                extra.push(ev.angle_lo + step * i as f64);
            }
        }
        extra.sort_by(f64::total_cmp);
        extra.dedup();
        let extra_solved = solve_all(&solver, plan, &extra, exec)?;
        let mut merged: Vec<(f64, (f64, Vec<f64>))> = angles
            .into_iter()
            .zip(solved)
            .chain(extra.into_iter().zip(extra_solved))
            .collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        merged.dedup_by(|a, b| a.0 == b.0);
        (angles, solved) = merged.into_iter().unzip();
        (trajectories, events) = link(&angles, &solved)?;
    }

    let mu: Vec<f64> = solved.iter().map(|s| s.0).collect();
    let mu_monotone = mu.windows(2).all(|w| match plan.vary {
        Vary::Beta => w[1] < w[0],
        Vary::Alpha => w[1] > w[0],
    });
    Ok(SweepResult {
        vary: plan.vary,
        n: plan.n,
        angles,
        mu,
        zeros: solved.into_iter().map(|s| s.1).collect(),
        trajectories,
        events,
        mu_monotone,
    })
}

fn link(angles: &[f64], solved: &[(f64, Vec<f64>)]) -> Result<(Vec<ZeroTrajectory>, Vec<SweepEvent>)> {
    let mut trajectories: Vec<ZeroTrajectory> = Vec::new();
    let mut events = Vec::new();
    // trajectory id for each zero at the previous angle
    let mut live: Vec<usize> = Vec::new();

    for &x in &solved[0].1 {
        live.push(trajectories.len());
        trajectories.push(ZeroTrajectory {
            identity: trajectories.len(),
            points: vec![(angles[0], x)],
            events: Vec::new(),
        });
    }

    for step in 1..angles.len() {
        let (a_prev, a) = (angles[step - 1], angles[step]);
        let prev = &solved[step - 1].1;
        let cur = &solved[step].1;
        let guard = if prev.len() < 2 {
            0.5 * PI
        } else {
            0.5 * prev.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
        };

        let mut claimed: Vec<Option<usize>> = vec![None; prev.len()];
        let mut owner: Vec<Option<usize>> = vec![None; cur.len()];
        for (ci, &x) in cur.iter().enumerate() {
            let nearest = prev
                .iter()
                .enumerate()
                .min_by(|p, q| (p.1 - x).abs().total_cmp(&(q.1 - x).abs()));
            if let Some((pi, &px)) = nearest {
                if (px - x).abs() <= guard {
                    if claimed[pi].is_some() {
                        let worst = (px - x).abs().max((px - cur[claimed[pi].unwrap()]).abs());
                        let refine = ((worst / guard).ceil() as usize).max(2) * 2;
                        return Err(Error::LinkAmbiguity { angle: a, refine });
                    }
                    claimed[pi] = Some(ci);
                    owner[ci] = Some(live[pi]);
                }
            }
        }

        let mut next_live = vec![usize::MAX; cur.len()];
        for (ci, &x) in cur.iter().enumerate() {
            match owner[ci] {
                Some(id) => {
                    trajectories[id].points.push((a, x));
                    next_live[ci] = id;
                }
                None => {
                    let kind = if ci == 0 && x <= guard {
                        EventKind::EnteredAtLeft
                    } else if ci == cur.len() - 1 && PI - x <= guard {
                        EventKind::EnteredAtRight
                    } else {
                        return Err(Error::LinkAmbiguity { angle: a, refine: 4 });
                    };
                    let id = trajectories.len();
                    let ev = SweepEvent { kind, angle_lo: a_prev, angle_hi: a, trajectory: id };
                    trajectories.push(ZeroTrajectory {
                        identity: id,
                        points: vec![(a, x)],
                        events: vec![ev],
                    });
                    events.push(ev);
                    next_live[ci] = id;
                }
            }
        }
        for (pi, &px) in prev.iter().enumerate() {
            if claimed[pi].is_some() {
                continue;
            }
            let kind = if pi == prev.len() - 1 && PI - px <= guard {
                EventKind::ExitedAtRight
            } else if pi == 0 && px <= guard {
                EventKind::ExitedAtLeft
            } else {
                return Err(Error::LinkAmbiguity { angle: a, refine: 4 });
            };
            let id = live[pi];
            let ev = SweepEvent { kind, angle_lo: a_prev, angle_hi: a, trajectory: id };
            trajectories[id].events.push(ev);
            events.push(ev);
        }
        live = next_live;
    }
    Ok((trajectories, events))
}

/// Refined angle bracket of an endpoint event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionBracket {
    pub kind: EventKind,
    pub angle_lo: f64,
    pub angle_hi: f64,
    /// Endpoint value function (`phi_n(pi)` for right-end events, `psi_n(0)`
    /// for left-end events) at both ends of the bracket.
    pub endpoint_value_lo: f64,
    pub endpoint_value_hi: f64,
}

/// Bisect an event bracket down to [`TRANSITION_WIDTH`].
///
/// The predicate is whether the number of zeros in `[0, pi]` still equals
/// its value at the lower end of the bracket; endpoint zeros are decided by
/// the boundary angles, so the bracket collapses onto the pinning angle.
pub fn detect_transition(plan: &SweepPlan, event: &SweepEvent) -> Result<TransitionBracket> {
    let solver = Solver::new(plan.q.clone(), plan.cells)?;
    let count = |a: f64| -> Result<usize> { Ok(solve_angle(&solver, plan, a)?.1.len()) };
    let mut lo = event.angle_lo;
    let mut hi = event.angle_hi;
    let c_lo = count(lo)?;
    if count(hi)? == c_lo {
        return Err(Error::EventNotFound(event.kind.name().into()));
    }
    while hi - lo > TRANSITION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid)? == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let endpoint_value = |a: f64| -> Result<f64> {
        let bc = plan.boundary(a)?;
        let mu = solver.eigenvalue(plan.n, bc)?;
        Ok(if event.kind.at_right() {
            solver.propagate(mu, bc.left())?.terminal().y
        } else {
            solver.propagate(mu, bc.right())?.terminal().y
        })
    };
    Ok(TransitionBracket {
        kind: event.kind,
        angle_lo: lo,
        angle_hi: hi,
        endpoint_value_lo: endpoint_value(lo)?,
        endpoint_value_hi: endpoint_value(hi)?,
    })
}
