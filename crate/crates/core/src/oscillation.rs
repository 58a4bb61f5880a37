//! Eigenfunction zeros, their mu-velocities and the integral identities.
//!
//! For a solution launched with mu-independent data, integrating
//! `d/dx (y' ydot - ydot' y) = y^2` from the launch endpoint to a zero gives
//! the zero velocity in closed form:
//!
//! * left launch (`phi`): `dx/dmu = -(1/phi'(x)^2) int_0^x phi^2 <= 0`
//! * right launch (`psi`): `dx/dmu = +(1/psi'(x)^2) int_x^pi psi^2 >= 0`

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::shooting::{reduced_angle, Side, SolutionTrajectory, State};
use crate::spectrum::{BoundaryParams, Eigenpair, Solver};

/// Numerically located zeros this close to a pinned endpoint are replaced by it.
pub const ENDPOINT_MERGE: f64 = 1e-9;

const SLOPE_FLOOR: f64 = 1e-10;

/// Absolute step tolerance for in-cell root polishing (below one ulp of pi).
const POLISH_TOL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaSide {
    Phi,
    Psi,
}

impl From<Side> for FormulaSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => FormulaSide::Phi,
            Side::Right => FormulaSide::Psi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroRecord {
    pub x: f64,
    /// Ascending from `x = 0` on the phi side, descending from `x = pi` on the psi side.
    pub k: usize,
    pub slope: f64,
    pub velocity: Option<f64>,
    pub side: FormulaSide,
}

/// Zeros of `y` on `[0, pi]`.
///
/// The launch endpoint is a zero exactly when its boundary angle pins it
/// (`alpha = pi` or `beta = 0`); `far_pinned` states the same for the other
/// endpoint, which is only meaningful for eigenfunctions.
pub fn find_zeros(traj: &SolutionTrajectory, far_pinned: bool) -> Result<Vec<ZeroRecord>> {
    let grid = traj.grid();
    let mesh = grid.mesh();
    let side = traj.side();
    let (launch_x, far_x) = match side {
        Side::Left => (0.0, PI),
        Side::Right => (PI, 0.0),
    };
    let mut xs: Vec<(f64, f64)> = Vec::new();

    for cell in 0..grid.cells() {
        let start = traj.entry_point(cell);
        let st = traj.states()[start];
        let x0 = mesh[start];
        let x1 = match side {
            Side::Left => mesh[cell + 1],
            Side::Right => mesh[cell],
        };
        for x in cell_zeros(traj, cell, &st, x0, x1) {
            let (z, _) = traj.eval_scaled(x);
            let amp = st.y.abs().max(st.dy.abs());
            if z.dy.abs() < SLOPE_FLOOR * amp {
                return Err(Error::SlopeUnderflow { x, slope: z.dy });
            }
            xs.push((x, z.dy));
        }
    }

    if traj.launch().pinned() {
        let (_, dy) = traj.launch().initial_values();
        xs.retain(|(x, _)| (x - launch_x).abs() > ENDPOINT_MERGE);
        xs.push((launch_x, dy));
    }
    if far_pinned {
        xs.retain(|(x, _)| (x - far_x).abs() > ENDPOINT_MERGE);
        let (st, _) = traj.eval_scaled(far_x);
        xs.push((far_x, st.dy));
    }
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let len = xs.len();
    Ok(xs
        .into_iter()
        .enumerate()
        .map(|(i, (x, slope_scaled))| {
            let (_, l) = traj.eval_scaled(x);
            ZeroRecord {
                x,
                k: match side {
                    Side::Left => i,
                    Side::Right => len - 1 - i,
                },
                slope: slope_scaled * l.exp(),
                velocity: None,
                side: side.into(),
            }
        })
        .collect())
}

/// Zeros inside one cell, excluding the entry point, polished on the closed form.
fn cell_zeros(traj: &SolutionTrajectory, cell: usize, st: &State, x0: f64, x1: f64) -> Vec<f64> {
    let width = (x1 - x0).abs();
    let dir = (x1 - x0).signum();
    let k = traj.mu() - traj.grid().averages()[cell];
    // forward frame: y(s) = y0 C(s) + p0 S(s), s = |x - x0|
    let p0 = dir * st.dy;
    let f = |s: f64| -> (f64, f64) {
        let v = traj.cell_transfer(cell, x0 + dir * s).apply(st);
        (v.y, dir * v.dy)
    };
    let mut roots = Vec::new();
    let w = if k > 0.0 { k.sqrt() } else { 0.0 };
    if w * width > std::f64::consts::FRAC_PI_2 {
        // y = R sin(w s + phase0); zeros at w s + phase0 = j pi
        let phase0 = reduced_angle(w * st.y, p0);
        let half = 0.5 * PI / w;
        let mut j = 1.0;
        loop {
            let s = (j * PI - phase0) / w;
            if s > width {
                break;
            }
            if s > 0.0 {
                let lo = (s - half).max(0.0);
                let hi = (s + half).min(width);
                if let Some(r) = polish(&f, lo, hi, s) {
                    roots.push(r);
                }
            }
            j += 1.0;
        }
    } else {
        let y0 = st.y;
        let (y1, _) = f(width);
        if y0 != 0.0 && (y1 == 0.0 || (y1 > 0.0) != (y0 > 0.0)) {
            if let Some(r) = polish(&f, 0.0, width, 0.5 * width) {
                roots.push(r);
            }
        }
    }
    roots.into_iter().map(|s| x0 + dir * s).collect()
}

/// Safeguarded Newton on `[lo, hi]`; requires a sign change unless the
/// guess already sits on a zero.
fn polish(f: &impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64, guess: f64) -> Option<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 && lo > 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return None;
    }
    let neg_at_lo = flo < 0.0;
    let mut s = guess.clamp(lo, hi);
    for _ in 0..200 {
        let (v, dv) = f(s);
        if v == 0.0 {
            return Some(s);
        }
        if (v < 0.0) == neg_at_lo {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - v / dv;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - s).abs() <= POLISH_TOL || hi - lo <= POLISH_TOL {
            return Some(next);
        }
        s = next;
    }
    Some(s)
}

/// Number of zeros of the `n`-th eigenfunction strictly inside `(0, pi)`.
pub fn count_interior_zeros(q: &Potential, n: usize, bc: BoundaryParams) -> Result<usize> {
    count_interior_zeros_with(&Solver::with_default_cells(q.clone())?, n, bc)
}

pub fn count_interior_zeros_with(solver: &Solver, n: usize, bc: BoundaryParams) -> Result<usize> {
    let pair = solver.find_eigenvalue(n, bc)?;
    let found = pair.interior_zero_count();
    if found != n {
        return Err(Error::CountMismatch { expected: n, found });
    }
    Ok(found)
}

/// Launch-side integral of `y^2` over the squared slope, signed by the launch side.
fn velocity_on(traj: &SolutionTrajectory, x: f64) -> f64 {
    let (st, _) = traj.eval_scaled(x);
    let (integral, _) = traj.integral_scaled(x);
    if integral == 0.0 {
        return 0.0;
    }
    let v = integral / (st.dy * st.dy);
    match traj.side() {
        Side::Left => -v,
        Side::Right => v,
    }
}

fn with_velocities(traj: &SolutionTrajectory, zeros: Vec<ZeroRecord>) -> Vec<ZeroRecord> {
    zeros
        .into_iter()
        .map(|z| ZeroRecord { velocity: Some(velocity_on(traj, z.x)), ..z })
        .collect()
}

/// All zeros of `phi_n` with their velocities.
pub fn phi_velocities(pair: &Eigenpair) -> Result<Vec<ZeroRecord>> {
    Ok(with_velocities(&pair.phi, pair.phi_zeros()?))
}

/// All zeros of `psi_n` with their velocities.
pub fn psi_velocities(pair: &Eigenpair) -> Result<Vec<ZeroRecord>> {
    Ok(with_velocities(&pair.psi, pair.psi_zeros()?))
}

/// `dx_k/dmu = -(1/phi_n'(x_k)^2) int_0^{x_k} phi_n^2`, zeros counted from `x = 0`.
pub fn zero_velocity_phi(pair: &Eigenpair, k: usize) -> Result<f64> {
    let zeros = pair.phi_zeros()?;
    let z = zeros.get(k).ok_or(Error::IndexOutOfRange { k, len: zeros.len() })?;
    Ok(velocity_on(&pair.phi, z.x))
}

/// `dx_k/dmu = (1/psi_n'(x_k)^2) int_{x_k}^pi psi_n^2`, zeros counted from `x = pi`.
pub fn zero_velocity_psi(pair: &Eigenpair, k: usize) -> Result<f64> {
    let zeros = pair.psi_zeros()?;
    let len = zeros.len();
    let z = zeros.iter().find(|z| z.k == k).ok_or(Error::IndexOutOfRange { k, len })?;
    Ok(velocity_on(&pair.psi, z.x))
}

/// `c_n` with `phi_n = c_n psi_n`, read off where `|psi_n|` peaks on the mesh.
pub fn proportionality_constant(phi: &SolutionTrajectory, psi: &SolutionTrajectory) -> Result<f64> {
    let mesh = psi.mesh();
    let (mut best, mut best_i) = (f64::NEG_INFINITY, 0);
    for (i, st) in psi.states().iter().enumerate() {
        let mag = st.y.abs().ln() + psi.log_scales()[i];
        if mag > best {
            best = mag;
            best_i = i;
        }
    }
    let psi_v = psi.state_at(best_i).y;
    let phi_v = phi.state_at(best_i).y;
    let scale = (0..mesh.len()).map(|i| phi.state_at(i).y.abs()).fold(0.0, f64::max);
    if !(psi_v.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateRatio { x: mesh[best_i] });
    }
    let c = phi_v / psi_v;
    if c == 0.0 || !c.is_finite() {
        return Err(Error::DegenerateRatio { x: mesh[best_i] });
    }
    Ok(c)
}

/// `max |phi_n - c_n psi_n| / max |phi_n|` over the mesh.
pub fn proportionality_residual(phi: &SolutionTrajectory, psi: &SolutionTrajectory, c: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..phi.mesh().len() {
        let a = phi.state_at(i).y;
        let b = psi.state_at(i).y;
        worst = worst.max((a - c * b).abs());
        scale = scale.max(a.abs());
    }
    worst / scale
}

/// Both sides of the integrated identity at `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// Boundary terms `[y' ydot - ydot' y]` between the launch endpoint and `a`.
    pub lhs: f64,
    /// `int y^2` between the launch endpoint and `a`.
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual() / self.rhs.abs().max(1.0)
    }
}

fn wronskian(st: &State) -> f64 {
    st.dy * st.y_mu - st.dy_mu * st.y
}

pub fn identity_terms(traj: &SolutionTrajectory, a: f64) -> IdentityCheck {
    let a = a.clamp(0.0, PI);
    let (st, l) = traj.eval_scaled(a);
    let (integral, _) = traj.integral_scaled(a);
    let launch = {
        let (y, dy) = traj.launch().initial_values();
        State { y, dy, y_mu: 0.0, dy_mu: 0.0 }
    };
    let w_launch = wronskian(&launch) * (-2.0 * l).exp();
    let lhs = match traj.side() {
        Side::Left => wronskian(&st) - w_launch,
        Side::Right => w_launch - wronskian(&st),
    };
    let back = (2.0 * l).exp();
    IdentityCheck { lhs: lhs * back, rhs: integral * back }
}

/// `|LHS - RHS|` of the integrated `y^2` identity at `a`.
pub fn identity_residual(traj: &SolutionTrajectory, a: f64) -> f64 {
    identity_terms(traj, a).residual()
}
