//! Eigenvalues of `L(q, alpha, beta)` and the eigenvalues function `mu(gamma, delta)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::oscillation::{self, ZeroRecord};
use crate::potential::Potential;
use crate::shooting::{
    self, exact_sin_cos, CellGrid, EndpointConditions, SolutionTrajectory, DEFAULT_CELLS,
};

/// Smallest `gamma` accepted by the eigenvalues-function chart.
pub const GAMMA_FLOOR: f64 = 1e-8;

const BRACKET_REL_TOL: f64 = 1e-12;
const NEWTON_REL_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 5;
const MAX_EXPANSIONS: usize = 8;

/// Separated boundary angles, `alpha in (0, pi]`, `beta in [0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParams {
    alpha: f64,
    beta: f64,
}

impl BoundaryParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= PI) {
            return Err(Error::DomainMismatch(format!("alpha = {alpha} is outside (0, pi]")));
        }
        if !(0.0..PI).contains(&beta) {
            return Err(Error::DomainMismatch(format!("beta = {beta} is outside [0, pi)")));
        }
        Ok(BoundaryParams { alpha, beta })
    }

    /// Dirichlet at both ends.
    pub fn dirichlet() -> Self {
        BoundaryParams { alpha: PI, beta: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn left(&self) -> EndpointConditions {
        EndpointConditions::left(self.alpha).expect("validated alpha")
    }

    pub fn right(&self) -> EndpointConditions {
        EndpointConditions::right(self.beta).expect("validated beta")
    }
}

/// Point of the unrolled chart `gamma = alpha + pi n`, `delta = beta - pi m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvfCoordinates {
    gamma: f64,
    delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub boundary: BoundaryParams,
    pub n: usize,
    pub m: usize,
}

impl EvfCoordinates {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= GAMMA_FLOOR) {
            return Err(Error::DomainMismatch(format!(
                "gamma = {gamma} is outside [{GAMMA_FLOOR}, inf)"
            )));
        }
        if !(delta.is_finite() && delta < PI) {
            return Err(Error::DomainMismatch(format!("delta = {delta} is outside (-inf, pi)")));
        }
        Ok(EvfCoordinates { gamma, delta })
    }

    pub fn from_parts(bc: BoundaryParams, n: usize, m: usize) -> Result<Self> {
        Self::new(bc.alpha + PI * n as f64, bc.beta - PI * m as f64)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Unique `(alpha, n, beta, m)` with `alpha in (0, pi]`, `beta in [0, pi)`.
    pub fn decompose(&self) -> ChartPoint {
        let mut n = ((self.gamma / PI).ceil() - 1.0).max(0.0) as usize;
        let mut alpha = self.gamma - PI * n as f64;
        if alpha <= 0.0 {
            n -= 1;
            alpha = self.gamma - PI * n as f64;
        }
        if alpha > PI {
            n += 1;
            alpha = self.gamma - PI * n as f64;
        }
        let mut m = (-self.delta / PI).ceil().max(0.0) as usize;
        let mut beta = self.delta + PI * m as f64;
        if beta < 0.0 {
            m += 1;
            beta = self.delta + PI * m as f64;
        }
        if beta >= PI {
            m -= 1;
            beta = self.delta + PI * m as f64;
        }
        ChartPoint { boundary: BoundaryParams { alpha, beta }, n, m }
    }
}

/// Value of the characteristic function `Psi(mu) = psi(0) cos(alpha) + psi'(0) sin(alpha)`
/// and its mu-derivative. Both carry the same scale `exp(log_scale)` when the
/// overflow guard rescaled the right-launched solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characteristic {
    pub value: f64,
    pub derivative: f64,
    pub log_scale: f64,
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub n: usize,
    pub mu: f64,
    pub boundary: BoundaryParams,
    /// `phi_n = c_n psi_n`
    pub c_n: f64,
    /// Zeros of `phi_n` in `[0, pi]`, ascending.
    pub zeros: Vec<f64>,
    /// Final bisection bracket around `mu`.
    pub bracket: (f64, f64),
    /// Left-launched eigenfunction.
    pub phi: SolutionTrajectory,
    /// Right-launched eigenfunction.
    pub psi: SolutionTrajectory,
}

impl Eigenpair {
    pub fn interior_zero_count(&self) -> usize {
        self.zeros.iter().filter(|&&x| x > 0.0 && x < PI).count()
    }

    /// Zeros of `phi_n` with slopes, ordinals ascending from `x = 0`.
    pub fn phi_zeros(&self) -> Result<Vec<ZeroRecord>> {
        oscillation::find_zeros(&self.phi, self.boundary.beta == 0.0)
    }

    /// Zeros of `psi_n` with slopes, ordinals descending from `x = pi`.
    pub fn psi_zeros(&self) -> Result<Vec<ZeroRecord>> {
        oscillation::find_zeros(&self.psi, self.boundary.alpha == PI)
    }
}

/// Eigenvalue solver bound to one potential and one mesh.
#[derive(Debug, Clone)]
pub struct Solver {
    q: Potential,
    grid: Arc<CellGrid>,
}

impl Solver {
    pub fn new(q: Potential, cells: usize) -> Result<Self> {
        let grid = Arc::new(CellGrid::new(&q, cells)?);
        Ok(Solver { q, grid })
    }

    pub fn with_default_cells(q: Potential) -> Result<Self> {
        Self::new(q, DEFAULT_CELLS)
    }

    pub fn potential(&self) -> &Potential {
        &self.q
    }

    pub fn grid(&self) -> &Arc<CellGrid> {
        &self.grid
    }

    pub fn propagate(&self, mu: f64, ic: EndpointConditions) -> Result<SolutionTrajectory> {
        shooting::propagate_on(&self.grid, mu, ic)
    }

    pub fn characteristic(&self, mu: f64, bc: BoundaryParams) -> Result<Characteristic> {
        let psi = self.propagate(mu, bc.right())?;
        let (st, log_scale) = psi.eval_scaled(0.0);
        let (sa, ca) = exact_sin_cos(bc.alpha);
        Ok(Characteristic {
            value: st.y * ca + st.dy * sa,
            derivative: st.y_mu * ca + st.dy_mu * sa,
            log_scale,
        })
    }

    fn phase(&self, mu: f64, ic: EndpointConditions) -> Result<f64> {
        Ok(shooting::phase_on(&self.grid, mu, ic)?.theta_terminal)
    }

    /// Bracket and locate `mu_n`, returning the value and final bisection bracket.
    pub fn eigenvalue_bracketed(&self, n: usize, bc: BoundaryParams) -> Result<(f64, (f64, f64))> {
        let left = bc.left();
        // left-launched phase at pi equals (n+1) pi - beta exactly at mu_n
        let target = (n as f64 + 1.0) * PI - bc.beta;
        let mut lo = self.grid.min_average() - 1.0;
        let mut hi = (n as f64 + 2.0).powi(2) + self.q.l1_norm() + 1.0;
        let mut expansions = 0;
        loop {
            let below = self.phase(lo, left)? < target;
            let above = self.phase(hi, left)? >= target;
            if below && above {
                break;
            }
            if expansions == MAX_EXPANSIONS {
                return Err(Error::BracketFailure { n, lo, hi });
            }
            let width = hi - lo;
            if !below {
                lo -= width;
            }
            if !above {
                hi += width;
            }
            expansions += 1;
        }
        while hi - lo > BRACKET_REL_TOL * (0.5 * (lo + hi)).abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.phase(mid, left)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }

        let mut mu = 0.5 * (lo + hi);
        for _ in 0..NEWTON_MAX_ITER {
            let ch = self.characteristic(mu, bc)?;
            if ch.derivative == 0.0 || !ch.derivative.is_finite() {
                break;
            }
            let step = ch.value / ch.derivative;
            let next = mu - step;
            if !(next >= lo && next <= hi) {
                break;
            }
            mu = next;
            if step.abs() <= NEWTON_REL_TOL * mu.abs().max(1.0) {
                break;
            }
        }
        Ok((mu, (lo, hi)))
    }

    pub fn eigenvalue(&self, n: usize, bc: BoundaryParams) -> Result<f64> {
        Ok(self.eigenvalue_bracketed(n, bc)?.0)
    }

    pub fn find_eigenvalue(&self, n: usize, bc: BoundaryParams) -> Result<Eigenpair> {
        let (mu, bracket) = self.eigenvalue_bracketed(n, bc)?;
        let phi = self.propagate(mu, bc.left())?;
        let psi = self.propagate(mu, bc.right())?;
        let c_n = oscillation::proportionality_constant(&phi, &psi)?;
        let zeros = oscillation::find_zeros(&phi, bc.beta == 0.0)?
            .into_iter()
            .map(|z| z.x)
            .collect();
        Ok(Eigenpair { n, mu, boundary: bc, c_n, zeros, bracket, phi, psi })
    }

    pub fn evf(&self, coords: EvfCoordinates) -> Result<f64> {
        let p = coords.decompose();
        self.eigenvalue(p.n + p.m, p.boundary)
    }

    /// `M[i][j] = mu(gamma_i, delta_j)`, checked for strict monotonicity.
    pub fn evf_grid(
        &self,
        gammas: &[f64],
        deltas: &[f64],
        exec: Execution,
    ) -> Result<Vec<Vec<f64>>> {
        for (name, g) in [("gamma", gammas), ("delta", deltas)] {
            if g.is_empty() || g.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidParameter(format!(
                    "{name} grid must be non-empty and strictly increasing"
                )));
            }
        }
        let mut coords = Vec::with_capacity(gammas.len() * deltas.len());
        for &g in gammas {
            for &d in deltas {
                coords.push(EvfCoordinates::new(g, d)?);
            }
        }
        let flat = exec::map(exec, &coords, |c| self.evf(*c));
        let mut out = vec![vec![0.0; deltas.len()]; gammas.len()];
        for (idx, v) in flat.into_iter().enumerate() {
            out[idx / deltas.len()][idx % deltas.len()] = v?;
        }
        for i in 0..gammas.len() {
            for j in 0..deltas.len() {
                if i > 0 && !(out[i][j] > out[i - 1][j]) {
                    return Err(Error::MonotonicityViolation { i, j, axis: "gamma" });
                }
                if j > 0 && !(out[i][j] < out[i][j - 1]) {
                    return Err(Error::MonotonicityViolation { i, j, axis: "delta" });
                }
            }
        }
        Ok(out)
    }
}

pub fn characteristic(q: &Potential, mu: f64, bc: BoundaryParams) -> Result<Characteristic> {
    Solver::with_default_cells(q.clone())?.characteristic(mu, bc)
}

pub fn find_eigenvalue(q: &Potential, n: usize, bc: BoundaryParams) -> Result<Eigenpair> {
    Solver::with_default_cells(q.clone())?.find_eigenvalue(n, bc)
}

pub fn evf(q: &Potential, coords: EvfCoordinates) -> Result<f64> {
    Solver::with_default_cells(q.clone())?.evf(coords)
}

pub fn evf_grid(q: &Potential, gammas: &[f64], deltas: &[f64]) -> Result<Vec<Vec<f64>>> {
    Solver::with_default_cells(q.clone())?.evf_grid(gammas, deltas, Execution::available())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn solver(q: Potential) -> Solver {
        Solver::new(q, 1024).unwrap()
    }

    #[test]
    fn boundary_ranges() {
        assert!(BoundaryParams::new(0.0, 0.0).is_err());
        assert!(BoundaryParams::new(PI, PI).is_err());
        assert!(BoundaryParams::new(PI, 0.0).is_ok());
    }

    #[test]
    fn chart_decomposition() {
        let p = EvfCoordinates::new(2.0 * PI, 0.0).unwrap().decompose();
        assert_eq!((p.n, p.m), (1, 0));
        assert_eq!(p.boundary.alpha(), PI);
        let p = EvfCoordinates::new(PI, -PI).unwrap().decompose();
        assert_eq!((p.n, p.m), (0, 1));
        assert_eq!(p.boundary.beta(), 0.0);
        let p = EvfCoordinates::new(FRAC_PI_2, FRAC_PI_2).unwrap().decompose();
        assert_eq!((p.n, p.m), (0, 0));
        let p = EvfCoordinates::new(7.0, -5.0).unwrap().decompose();
        assert!(p.boundary.alpha() > 0.0 && p.boundary.alpha() <= PI);
        assert!(p.boundary.beta() >= 0.0 && p.boundary.beta() < PI);
        assert!((p.boundary.alpha() + PI * p.n as f64 - 7.0).abs() < 1e-14);
        assert!((p.boundary.beta() - PI * p.m as f64 + 5.0).abs() < 1e-14);
        assert!(EvfCoordinates::new(1e-9, 0.0).is_err());
        assert!(EvfCoordinates::new(1.0, PI).is_err());
    }

    #[test]
    fn characteristic_closed_forms() {
        let s = solver(Potential::zero());
        let v = s.characteristic(1.0, BoundaryParams::dirichlet()).unwrap();
        assert!(v.value.abs() < 1e-12);
        let v = s.characteristic(2.25, BoundaryParams::new(PI, FRAC_PI_2).unwrap()).unwrap();
        assert!(v.value.abs() < 1e-12);
        let v = s.characteristic(2.0, BoundaryParams::dirichlet()).unwrap();
        let exact = -(2f64.sqrt() * PI).sin() / 2f64.sqrt();
        assert!((v.value - exact).abs() < 1e-9);
    }

    #[test]
    fn free_spectra() {
        let s = solver(Potential::zero());
        for n in 0..8 {
            let mu = s.eigenvalue(n, BoundaryParams::dirichlet()).unwrap();
            let e = ((n + 1) * (n + 1)) as f64;
            assert!((mu - e).abs() <= 1e-9 * e, "{n}: {mu}");
            let mu = s.eigenvalue(n, BoundaryParams::new(FRAC_PI_2, FRAC_PI_2).unwrap()).unwrap();
            assert!((mu - (n * n) as f64).abs() <= 1e-9 * (n * n).max(1) as f64, "{n}: {mu}");
        }
        let s = solver(Potential::constant(5.0).unwrap());
        for n in 0..5 {
            let mu = s.eigenvalue(n, BoundaryParams::dirichlet()).unwrap();
            let e = ((n + 1) * (n + 1)) as f64 + 5.0;
            assert!((mu - e).abs() <= 1e-9 * e);
        }
    }

    #[test]
    fn ordering_and_newton_stays_in_bracket() {
        for q in [
            Potential::cosine(1.0, 2.0).unwrap(),
            Potential::step(10.0, 1.0, 2.0).unwrap(),
            Potential::power(1.0, -0.5).unwrap(),
        ] {
            let s = solver(q);
            let bc = BoundaryParams::new(0.8, 2.1).unwrap();
            let mut last = f64::NEG_INFINITY;
            for n in 0..=10 {
                let (mu, (lo, hi)) = s.eigenvalue_bracketed(n, bc).unwrap();
                assert!(mu > last);
                assert!(lo <= mu && mu <= hi);
                let a = s.characteristic(lo, bc).unwrap().value;
                let b = s.characteristic(hi, bc).unwrap().value;
                assert!(a * b <= 0.0 || a.abs().min(b.abs()) < 1e-12);
                last = mu;
            }
        }
    }

    #[test]
    fn evf_examples() {
        let s = solver(Potential::zero());
        let v = s.evf(EvfCoordinates::new(2.0 * PI, 0.0).unwrap()).unwrap();
        assert!((v - 4.0).abs() < 1e-9);
        let v = s.evf(EvfCoordinates::new(PI, -PI).unwrap()).unwrap();
        assert!((v - 4.0).abs() < 1e-9);
        let v = s.evf(EvfCoordinates::new(FRAC_PI_2, FRAC_PI_2).unwrap()).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn evf_grid_monotone() {
        let s = solver(Potential::zero());
        let m = s
            .evf_grid(&[FRAC_PI_2, PI, 1.5 * PI], &[0.0], Execution::Sequential)
            .unwrap();
        assert!(m[0][0] < m[1][0] && m[1][0] < m[2][0]);
        let m = s.evf_grid(&[PI], &[-PI, -FRAC_PI_2, 0.0], Execution::Parallel).unwrap();
        assert!((m[0][0] - 4.0).abs() < 1e-9);
        assert!((m[0][1] - 2.25).abs() < 1e-9);
        assert!((m[0][2] - 1.0).abs() < 1e-9);
        assert!(s.evf_grid(&[PI, 1.0], &[0.0], Execution::Sequential).is_err());
    }
}
