//! Shooting from either endpoint with a piecewise-constant potential.
//!
//! Each cell of the mesh carries the exact average of `q`. Inside a cell the
//! equation `-y'' + qbar y = mu y` has constant coefficients, so the state is
//! advanced with the closed-form transfer matrix (trigonometric, hyperbolic or
//! linear depending on the sign of `mu - qbar`). The mu-derivatives
//! `(ydot, ydot')` are obtained by differentiating that transfer matrix in
//! `mu`, which is the exact solution of the forced variational system of the
//! cell problem. The same closed forms give dense output, `int y^2` per cell
//! and the Pruefer phase increment.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::Potential;

pub const DEFAULT_CELLS: usize = 4096;
pub const MIN_CELLS: usize = 16;

/// Extra cells placed geometrically (ratio 2) inside the first uniform cell
/// when the potential is singular at the origin.
const SINGULAR_REFINEMENT: usize = 32;

const RESCALE_HIGH: f64 = 1e150;
const RESCALE_LOW: f64 = 1e-150;

/// Below this `|k t^2|` the transfer coefficients are summed as power series.
const SERIES_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Launch data at one endpoint: `y = sin(angle)`, `y' = -cos(angle)`.
///
/// Left launches take the angle in `(0, pi]`, right launches in `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointConditions {
    side: Side,
    angle: f64,
}

impl EndpointConditions {
    pub fn left(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= PI) {
            return Err(Error::DomainMismatch(format!("alpha = {alpha} is outside (0, pi]")));
        }
        Ok(EndpointConditions { side: Side::Left, angle: alpha })
    }

    pub fn right(beta: f64) -> Result<Self> {
        if !(0.0..PI).contains(&beta) {
            return Err(Error::DomainMismatch(format!("beta = {beta} is outside [0, pi)")));
        }
        Ok(EndpointConditions { side: Side::Right, angle: beta })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Endpoint value is exactly zero (Dirichlet launch).
    pub fn pinned(&self) -> bool {
        match self.side {
            Side::Left => self.angle == PI,
            Side::Right => self.angle == 0.0,
        }
    }

    /// `(y, y')` at the launch endpoint.
    pub fn initial_values(&self) -> (f64, f64) {
        let (s, c) = exact_sin_cos(self.angle);
        (s, -c)
    }

    pub fn launch_x(&self) -> f64 {
        match self.side {
            Side::Left => 0.0,
            Side::Right => PI,
        }
    }
}

/// `sin_cos` that is exact at the angles the boundary logic relies on.
pub(crate) fn exact_sin_cos(angle: f64) -> (f64, f64) {
    if angle == 0.0 {
        (0.0, 1.0)
    } else if angle == PI {
        (0.0, -1.0)
    } else if angle == FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        angle.sin_cos()
    }
}

/// Mesh plus the per-cell averages of `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    mesh: Vec<f64>,
    averages: Vec<f64>,
}

impl CellGrid {
    pub fn new(q: &Potential, cells: usize) -> Result<Self> {
        if cells < MIN_CELLS {
            return Err(Error::MeshTooCoarse { cells });
        }
        let h = PI / cells as f64;
        let mut mesh = Vec::with_capacity(cells + SINGULAR_REFINEMENT + 1);
        mesh.push(0.0);
        if q.singular_at_origin() {
            for j in (1..=SINGULAR_REFINEMENT).rev() {
                mesh.push(h * 0.5f64.powi(j as i32));
            }
        }
        for i in 1..cells {
            mesh.push(PI * i as f64 / cells as f64);
        }
        mesh.push(PI);
        let averages = mesh
            .windows(2)
            .map(|w| q.integral(w[0], w[1]) / (w[1] - w[0]))
            .collect();
        Ok(CellGrid { mesh, averages })
    }

    pub fn cells(&self) -> usize {
        self.averages.len()
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn averages(&self) -> &[f64] {
        &self.averages
    }

    pub fn min_average(&self) -> f64 {
        self.averages.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.mesh[cell + 1] - self.mesh[cell]
    }

    /// Cell containing `x`; points outside `[0, pi]` map to the boundary cells.
    pub fn cell_of(&self, x: f64) -> usize {
        let i = self.mesh.partition_point(|&m| m <= x);
        i.clamp(1, self.cells()) - 1
    }
}

/// `(y, y', ydot, ydot')` where the dot is `d/dmu`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct State {
    pub y: f64,
    pub dy: f64,
    pub y_mu: f64,
    pub dy_mu: f64,
}

impl State {
    fn max_abs(&self) -> f64 {
        self.y.abs().max(self.dy.abs()).max(self.y_mu.abs()).max(self.dy_mu.abs())
    }

    fn scaled(&self, f: f64) -> State {
        State { y: self.y * f, dy: self.dy * f, y_mu: self.y_mu * f, dy_mu: self.dy_mu * f }
    }

    fn is_finite(&self) -> bool {
        self.y.is_finite() && self.dy.is_finite() && self.y_mu.is_finite() && self.dy_mu.is_finite()
    }
}

/// Transfer coefficients of `y'' = -k y` over a signed step `t`:
/// `y(t) = c y0 + s y0'`, plus their `k`-derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Transfer {
    k: f64,
    t: f64,
    c: f64,
    s: f64,
    c_k: f64,
    s_k: f64,
}

impl Transfer {
    pub(crate) fn new(k: f64, t: f64) -> Self {
        let z = k * t * t;
        let (c, s, s_k) = if z.abs() < SERIES_LIMIT {
            // c = sum (-z)^j/(2j)!, s = t sum (-z)^j/(2j+1)!,
            // s_k = t^3 sum_{j>=1} j (-1)^j z^(j-1)/(2j+1)!
            let mut c = 1.0;
            let mut s = 1.0;
            let mut s_k = 0.0;
            let mut term_c = 1.0;
            let mut term_s = 1.0;
            let mut zp = 1.0; // (-z)^(j-1)
            for j in 1..14 {
                let jf = j as f64;
                term_c *= -z / ((2.0 * jf - 1.0) * (2.0 * jf));
                term_s *= -z / ((2.0 * jf) * (2.0 * jf + 1.0));
                c += term_c;
                s += term_s;
                s_k -= jf * zp * inv_odd_factorial(j);
                zp *= -z;
            }
            (c, t * s, t * t * t * s_k)
        } else if k > 0.0 {
            let w = k.sqrt();
            let (sn, cs) = (w * t).sin_cos();
            let s = sn / w;
            (cs, s, (t * cs - s) / (2.0 * k))
        } else {
            let w = (-k).sqrt();
            let c = (w * t).cosh();
            let s = (w * t).sinh() / w;
            (c, s, (t * c - s) / (2.0 * k))
        };
        Transfer { k, t, c, s, c_k: -0.5 * t * s, s_k }
    }

    /// Only `(c, s)`; used by the phase sweep.
    fn values(k: f64, t: f64) -> (f64, f64) {
        let z = k * t * t;
        if z.abs() < SERIES_LIMIT {
            let mut c = 1.0;
            let mut s = 1.0;
            let mut term_c = 1.0;
            let mut term_s = 1.0;
            for j in 1..14 {
                let jf = j as f64;
                term_c *= -z / ((2.0 * jf - 1.0) * (2.0 * jf));
                term_s *= -z / ((2.0 * jf) * (2.0 * jf + 1.0));
                c += term_c;
                s += term_s;
            }
            (c, t * s)
        } else if k > 0.0 {
            let w = k.sqrt();
            let (sn, cs) = (w * t).sin_cos();
            (cs, sn / w)
        } else {
            let w = (-k).sqrt();
            ((w * t).cosh(), (w * t).sinh() / w)
        }
    }

    pub(crate) fn apply(&self, st: &State) -> State {
        let Transfer { k, c, s, c_k, s_k, .. } = *self;
        State {
            y: c * st.y + s * st.dy,
            dy: -k * s * st.y + c * st.dy,
            y_mu: c * st.y_mu + s * st.dy_mu + c_k * st.y + s_k * st.dy,
            dy_mu: -k * s * st.y_mu + c * st.dy_mu + (-s - k * s_k) * st.y + c_k * st.dy,
        }
    }

    /// `|int y^2|` between the start of the step and `t`, with `y = c y0 + s y0'`.
    pub(crate) fn square_integral(&self, y0: f64, dy0: f64) -> f64 {
        let Transfer { k, t, c, s, .. } = *self;
        let int_cc = 0.5 * (t + c * s);
        let int_cs = 0.5 * s * s;
        let z = k * t * t;
        let int_ss = if z.abs() < SERIES_LIMIT {
            // (t - c s)/(2k) = 2 t^3 sum_{j>=1} (-4z)^(j-1)/(2j+1)!
            let mut sum = 0.0;
            let mut term = 1.0 / 6.0;
            for j in 1..20 {
                sum += term;
                let jf = j as f64;
                term *= -4.0 * z / ((2.0 * jf + 2.0) * (2.0 * jf + 3.0));
            }
            2.0 * t * t * t * sum
        } else {
            (t - c * s) / (2.0 * k)
        };
        (y0 * y0 * int_cc + 2.0 * y0 * dy0 * int_cs + dy0 * dy0 * int_ss).abs()
    }
}

/// `1/(2j+1)!`
fn inv_odd_factorial(j: usize) -> f64 {
    const INV_ODD_FACT: [f64; 14] = {
        let mut out = [0.0; 14];
        let mut f = 1.0;
        let mut i = 1;
        out[0] = 1.0;
        while i < 14 {
            f *= ((2 * i) * (2 * i + 1)) as f64;
            out[i] = 1.0 / f;
            i += 1;
        }
        out
    };
    INV_ODD_FACT[j]
}

/// Sampled solution with the variational components.
///
/// States are stored at every breakpoint in `x` orientation. When the
/// overflow guard fires, states downstream of the rescale are divided by a
/// common factor; `log_scale[i]` holds the natural log of the factor that
/// restores true magnitudes at breakpoint `i`. `integral[i]` is
/// `int y^2` from the launch endpoint to breakpoint `i`, expressed in the
/// same scale as `states[i]`.
#[derive(Debug, Clone)]
pub struct SolutionTrajectory {
    mu: f64,
    launch: EndpointConditions,
    grid: Arc<CellGrid>,
    states: Vec<State>,
    log_scale: Vec<f64>,
    integral: Vec<f64>,
}

impl SolutionTrajectory {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn launch(&self) -> EndpointConditions {
        self.launch
    }

    pub fn side(&self) -> Side {
        self.launch.side
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn mesh(&self) -> &[f64] {
        self.grid.mesh()
    }

    /// Stored (possibly rescaled) states, one per breakpoint.
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn log_scales(&self) -> &[f64] {
        &self.log_scale
    }

    pub fn rescaled(&self) -> bool {
        self.log_scale.iter().any(|&l| l != 0.0)
    }

    /// True state at breakpoint `i`.
    pub fn state_at(&self, i: usize) -> State {
        self.states[i].scaled(self.log_scale[i].exp())
    }

    /// Breakpoint from which cell `cell` is entered.
    pub(crate) fn entry_point(&self, cell: usize) -> usize {
        match self.launch.side {
            Side::Left => cell,
            Side::Right => cell + 1,
        }
    }

    /// Closed-form transfer from the entry breakpoint of `cell` to `x`.
    pub(crate) fn cell_transfer(&self, cell: usize, x: f64) -> Transfer {
        let start = self.entry_point(cell);
        Transfer::new(self.mu - self.grid.averages[cell], x - self.grid.mesh[start])
    }

    /// Dense evaluation in the scale of the enclosing cell's entry point.
    /// Points slightly outside `[0, pi]` are extrapolated with the boundary cell.
    pub fn eval_scaled(&self, x: f64) -> (State, f64) {
        let cell = self.grid.cell_of(x);
        let start = self.entry_point(cell);
        let st = self.cell_transfer(cell, x).apply(&self.states[start]);
        (st, self.log_scale[start])
    }

    pub fn eval(&self, x: f64) -> State {
        let (st, l) = self.eval_scaled(x);
        st.scaled(l.exp())
    }

    /// `int y^2` from the launch endpoint to `x`, in the scale returned by
    /// [`eval_scaled`](Self::eval_scaled) at the same `x`.
    pub fn integral_scaled(&self, x: f64) -> (f64, f64) {
        let cell = self.grid.cell_of(x);
        let start = self.entry_point(cell);
        let st = &self.states[start];
        let partial = self.cell_transfer(cell, x).square_integral(st.y, st.dy);
        (self.integral[start] + partial, self.log_scale[start])
    }

    pub fn integral_to(&self, x: f64) -> f64 {
        let (v, l) = self.integral_scaled(x);
        v * (2.0 * l).exp()
    }

    /// Terminal state at the far endpoint (true scale).
    pub fn terminal(&self) -> State {
        match self.launch.side {
            Side::Left => self.state_at(self.states.len() - 1),
            Side::Right => self.state_at(0),
        }
    }
}

/// Propagate on a freshly built grid.
pub fn propagate(
    q: &Potential,
    mu: f64,
    ic: EndpointConditions,
    cells: usize,
) -> Result<SolutionTrajectory> {
    let grid = Arc::new(CellGrid::new(q, cells)?);
    propagate_on(&grid, mu, ic)
}

pub fn propagate_on(
    grid: &Arc<CellGrid>,
    mu: f64,
    ic: EndpointConditions,
) -> Result<SolutionTrajectory> {
    if !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mu = {mu} is not finite")));
    }
    let n = grid.mesh.len();
    let mut states = vec![State::default(); n];
    let mut log_scale = vec![0.0; n];
    let mut integral = vec![0.0; n];
    let (y0, dy0) = ic.initial_values();
    let launch = match ic.side {
        Side::Left => 0,
        Side::Right => n - 1,
    };
    states[launch] = State { y: y0, dy: dy0, y_mu: 0.0, dy_mu: 0.0 };

    let cells = grid.cells();
    for step in 0..cells {
        let (cell, from, to) = match ic.side {
            Side::Left => (step, step, step + 1),
            Side::Right => (cells - 1 - step, cells - step, cells - 1 - step),
        };
        let tr = Transfer::new(mu - grid.averages[cell], grid.mesh[to] - grid.mesh[from]);
        let cur = states[from];
        let mut next = tr.apply(&cur);
        let mut acc = integral[from] + tr.square_integral(cur.y, cur.dy);
        let mut log = log_scale[from];
        if !next.is_finite() || !acc.is_finite() {
            return Err(Error::NonFinite { cell });
        }
        let m = next.max_abs();
        if m > RESCALE_HIGH || (m < RESCALE_LOW && m > 0.0) {
            next = next.scaled(1.0 / m);
            acc /= m * m;
            log += m.ln();
        }
        states[to] = next;
        integral[to] = acc;
        log_scale[to] = log;
    }
    Ok(SolutionTrajectory { mu, launch: ic, grid: Arc::clone(grid), states, log_scale, integral })
}

/// Continuous Pruefer phase at the far endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRecord {
    pub mu: f64,
    /// Angle of `(y', y)` lifted continuously along the interval. Increasing
    /// in `mu` for left launches, decreasing for right launches.
    pub theta_terminal: f64,
    pub side: Side,
}

pub fn phase_at_far_end(
    q: &Potential,
    mu: f64,
    ic: EndpointConditions,
    cells: usize,
) -> Result<PhaseRecord> {
    let grid = CellGrid::new(q, cells)?;
    phase_on(&grid, mu, ic)
}

pub fn phase_on(grid: &CellGrid, mu: f64, ic: EndpointConditions) -> Result<PhaseRecord> {
    let forward = forward_phase(grid, mu, ic)?;
    let theta_terminal = match ic.side {
        Side::Left => forward,
        Side::Right => PI - forward,
    };
    Ok(PhaseRecord { mu, theta_terminal, side: ic.side })
}

/// Angle of `(p, y)` reduced to `[0, pi)`.
pub(crate) fn reduced_angle(y: f64, p: f64) -> f64 {
    let mut r = y.atan2(p);
    if r < 0.0 {
        r += PI;
    }
    if r >= PI {
        r -= PI;
    }
    r
}

/// Phase in the launch-forward frame: for right launches the interval is
/// mirrored (`s = pi - x`, `dy/ds = -y'`), so the phase starts at `beta` and
/// increases with `mu`.
pub(crate) fn forward_phase(grid: &CellGrid, mu: f64, ic: EndpointConditions) -> Result<f64> {
    if !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mu = {mu} is not finite")));
    }
    let (y0, dy0) = ic.initial_values();
    let (mut y, mut p) = match ic.side {
        Side::Left => (y0, dy0),
        Side::Right => (y0, -dy0),
    };
    let cells = grid.cells();
    let mut turns: i64 = 0;
    for step in 0..cells {
        let cell = match ic.side {
            Side::Left => step,
            Side::Right => cells - 1 - step,
        };
        let k = mu - grid.averages[cell];
        let t = grid.width(cell);
        let (c, s) = Transfer::values(k, t);
        let mut y1 = c * y + s * p;
        let mut p1 = -k * s * y + c * p;
        if !(y1.is_finite() && p1.is_finite()) {
            return Err(Error::NonFinite { cell });
        }
        let w = if k > 0.0 { k.sqrt() } else { 0.0 };
        if w * t > FRAC_PI_2 {
            // uniform rotation by w t in the (w y, y') plane
            let rs = reduced_angle(w * y, p);
            let re = reduced_angle(w * y1, p1);
            turns += ((rs + w * t - re) / PI).round() as i64;
        } else if y != 0.0 && (y1 == 0.0 || (y1 > 0.0) != (y > 0.0)) {
            turns += 1;
        }
        let m = y1.abs().max(p1.abs());
        if m > RESCALE_HIGH || (m < RESCALE_LOW && m > 0.0) {
            y1 /= m;
            p1 /= m;
        }
        y = y1;
        p = p1;
    }
    Ok(turns as f64 * PI + reduced_angle(y, p))
}
