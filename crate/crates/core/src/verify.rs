//! Invariant batteries over a test matrix of potentials and boundary angles.
//!
//! Each battery produces one [`CaseResult`] per case with the measured
//! residual and the tolerance it was held to.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::oscillation;
use crate::potential::{Potential, PotentialKind};
use crate::shooting::{EndpointConditions, Side, SolutionTrajectory};
use crate::spectrum::{BoundaryParams, Eigenpair, Solver};

pub const VELOCITY_STEP: f64 = 1e-6;
pub const VELOCITY_TOL: f64 = 1e-4;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const IDENTITY_TOL_CONSTANT: f64 = 1e-12;
pub const SEAM_OFFSET: f64 = 1e-4;
pub const SEAM_TOL: f64 = 1e-3;
pub const IDENTITY_PROBES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Battery {
    /// `n` interior zeros, endpoint zeros exactly where the data pin them.
    Theorem1,
    /// Analytic zero velocities against re-solved zeros, with sign checks.
    Velocities,
    /// Integrated `y^2` identity at interior probes and at every zero.
    Identities,
    /// Strict monotonicity of `mu(gamma, delta)` on a 16 x 16 grid.
    EvfMonotonicity,
    /// `mu_n(pi, pi - 1e-4)` against `mu_(n-1)(pi, 0)`, relative.
    Seam,
}

impl std::str::FromStr for Battery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" => Ok(Battery::Theorem1),
            "velocities" => Ok(Battery::Velocities),
            "identities" => Ok(Battery::Identities),
            "evf-monotonicity" => Ok(Battery::EvfMonotonicity),
            "seam" => Ok(Battery::Seam),
            other => Err(Error::InvalidParameter(format!("unknown battery `{other}`"))),
        }
    }
}

impl Battery {
    pub fn name(&self) -> &'static str {
        match self {
            Battery::Theorem1 => "theorem1",
            Battery::Velocities => "velocities",
            Battery::Identities => "identities",
            Battery::EvfMonotonicity => "evf-monotonicity",
            Battery::Seam => "seam",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub case: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub battery: Battery,
    pub cases: Vec<CaseResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.cases.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// Potentials x boundary angles x eigenvalue indices.
#[derive(Debug, Clone)]
pub struct TestMatrix {
    pub potentials: Vec<Potential>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub indices: Vec<usize>,
    pub cells: usize,
}

impl TestMatrix {
    /// zero, constant 5, cos 2x, step 10 on [1, 2], x^(-1/2).
    pub fn standard_potentials() -> Vec<Potential> {
        vec![
            Potential::zero(),
            Potential::constant(5.0).expect("finite"),
            Potential::cosine(1.0, 2.0).expect("finite"),
            Potential::step(10.0, 1.0, 2.0).expect("inside [0, pi]"),
            Potential::power(1.0, -0.5).expect("integrable"),
        ]
    }

    pub fn standard_alphas() -> Vec<f64> {
        vec![FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI]
    }

    pub fn standard_betas() -> Vec<f64> {
        vec![0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4]
    }

    /// 5 potentials x 4 alphas x 4 betas x n = 0..=8 (720 eigenpairs).
    pub fn full(cells: usize) -> Self {
        Self::for_potentials(Self::standard_potentials(), cells)
    }

    /// 4 alphas x 4 betas x n = 0..=8 (144 eigenpairs per potential).
    pub fn for_potentials(potentials: Vec<Potential>, cells: usize) -> Self {
        TestMatrix {
            potentials,
            alphas: Self::standard_alphas(),
            betas: Self::standard_betas(),
            indices: (0..=8).collect(),
            cells,
        }
    }

    fn cases(&self) -> Vec<(usize, BoundaryParams, usize)> {
        let mut out = Vec::new();
        for p in 0..self.potentials.len() {
            for &a in &self.alphas {
                for &b in &self.betas {
                    let bc = BoundaryParams::new(a, b).expect("matrix angles are in range");
                    for &n in &self.indices {
                        out.push((p, bc, n));
                    }
                }
            }
        }
        out
    }

    fn solvers(&self) -> Result<Vec<Solver>> {
        self.potentials.iter().map(|q| Solver::new(q.clone(), self.cells)).collect()
    }
}

fn label(q: &Potential, bc: BoundaryParams, n: usize) -> String {
    format!("{} alpha={:.6} beta={:.6} n={}", q.label(), bc.alpha(), bc.beta(), n)
}

fn is_constant(q: &Potential) -> bool {
    matches!(q.kind(), PotentialKind::Zero | PotentialKind::Constant { .. })
}

pub fn run(battery: Battery, matrix: &TestMatrix, exec: Execution) -> Result<Report> {
    let cases = match battery {
        Battery::Theorem1 => per_pair(matrix, exec, theorem1_case)?,
        Battery::Velocities => per_pair(matrix, exec, velocity_case)?,
        Battery::Identities => per_pair(matrix, exec, identity_case)?,
        Battery::EvfMonotonicity => evf_monotonicity(matrix, exec)?,
        Battery::Seam => seam(matrix, exec)?,
    };
    Ok(Report { battery, cases })
}

fn per_pair(
    matrix: &TestMatrix,
    exec: Execution,
    check: fn(&Solver, &Eigenpair) -> Result<CaseResult>,
) -> Result<Vec<CaseResult>> {
    let solvers = matrix.solvers()?;
    let cases = matrix.cases();
    exec::map(exec, &cases, |&(p, bc, n)| {
        let pair = solvers[p].find_eigenvalue(n, bc)?;
        check(&solvers[p], &pair)
    })
    .into_iter()
    .collect()
}

fn theorem1_case(solver: &Solver, pair: &Eigenpair) -> Result<CaseResult> {
    let q = solver.potential();
    let bc = pair.boundary;
    let n = pair.n;
    let phi = pair.phi_zeros()?;
    let psi = pair.psi_zeros()?;
    let interior = pair.interior_zero_count();
    let at0 = phi.iter().any(|z| z.x == 0.0);
    let at_pi = phi.iter().any(|z| z.x == PI);
    let expected_total = n + usize::from(bc.alpha() == PI) + usize::from(bc.beta() == 0.0);
    let passed = interior == n
        && at0 == (bc.alpha() == PI)
        && at_pi == (bc.beta() == 0.0)
        && phi.len() == expected_total
        && psi.len() == expected_total;
    Ok(CaseResult {
        case: label(q, bc, n),
        passed,
        residual: (interior as f64 - n as f64).abs() + (phi.len() as f64 - expected_total as f64).abs(),
        tolerance: 0.0,
    })
}

/// Zero of `traj` nearest `guess` by Newton on the dense closed form,
/// extrapolating past the endpoints when the zero has moved outside.
pub fn locate_zero(traj: &SolutionTrajectory, guess: f64) -> f64 {
    let mut x = guess;
    for _ in 0..50 {
        let (st, _) = traj.eval_scaled(x);
        if st.y == 0.0 {
            break;
        }
        let dx = st.y / st.dy;
        x -= dx;
        if dx.abs() <= 1e-15 {
            break;
        }
    }
    x
}

/// Derivative of a zero location in `mu` from re-solved trajectories:
/// central for interior zeros, second-order one-sided toward the interior
/// for endpoint zeros, which leave `[0, pi]` under one sign of the step.
pub fn fd_velocity(solver: &Solver, mu: f64, ic: EndpointConditions, x: f64, h: f64) -> Result<f64> {
    let at = |d: f64| -> Result<f64> { Ok(locate_zero(&solver.propagate(mu + d, ic)?, x)) };
    if x > 0.0 && x < PI {
        return Ok((at(h)? - at(-h)?) / (2.0 * h));
    }
    let s = if (0.0..=PI).contains(&at(h)?) { 1.0 } else { -1.0 };
    Ok(s * (-3.0 * x + 4.0 * at(s * h)? - at(2.0 * s * h)?) / (2.0 * h))
}

/// Largest relative deviation between analytic zero velocities and finite
/// differences of re-solved zero positions, plus a sign check. Zeros pinned
/// at their launch endpoint are held to an absolute zero velocity.
pub fn velocity_errors(solver: &Solver, pair: &Eigenpair, h: f64) -> Result<(f64, bool)> {
    let bc = pair.boundary;
    let mut worst = 0.0f64;
    let mut signs_ok = true;
    let sides = [
        (oscillation::phi_velocities(pair)?, bc.left()),
        (oscillation::psi_velocities(pair)?, bc.right()),
    ];
    for (zeros, launch) in sides {
        let left = launch.side() == Side::Left;
        for z in zeros {
            let v = z.velocity.expect("velocity populated");
            let fd = fd_velocity(solver, pair.mu, launch, z.x, h)?;
            let pinned_launch = launch.pinned() && z.x == launch.launch_x();
            if pinned_launch {
                signs_ok &= v == 0.0;
                worst = worst.max(fd.abs());
            } else {
                signs_ok &= if left { v < 0.0 } else { v > 0.0 };
                worst = worst.max((v - fd).abs() / v.abs());
            }
        }
    }
    Ok((worst, signs_ok))
}

fn velocity_case(solver: &Solver, pair: &Eigenpair) -> Result<CaseResult> {
    let q = solver.potential();
    let (worst, signs_ok) = velocity_errors(solver, pair, VELOCITY_STEP)?;
    Ok(CaseResult {
        case: label(q, pair.boundary, pair.n),
        passed: signs_ok && worst <= VELOCITY_TOL,
        residual: worst,
        tolerance: VELOCITY_TOL,
    })
}

/// Largest relative residual of the integrated `y^2` identity at
/// [`IDENTITY_PROBES`] interior points, on both launch sides, together with
/// the zero form `slope * ydot = +-int y^2` at every zero.
pub fn identity_worst(pair: &Eigenpair) -> Result<f64> {
    let mut worst = 0.0f64;
    for traj in [&pair.phi, &pair.psi] {
        for j in 1..=IDENTITY_PROBES {
            let a = PI * j as f64 / (IDENTITY_PROBES + 1) as f64;
            worst = worst.max(oscillation::identity_terms(traj, a).relative_residual());
        }
    }
    for z in pair.phi_zeros()? {
        let st = pair.phi.eval(z.x);
        let rhs = pair.phi.integral_to(z.x);
        worst = worst.max((st.dy * st.y_mu - rhs).abs() / rhs.max(1.0));
    }
    for z in pair.psi_zeros()? {
        let st = pair.psi.eval(z.x);
        let rhs = pair.psi.integral_to(z.x);
        worst = worst.max((-st.dy * st.y_mu - rhs).abs() / rhs.max(1.0));
    }
    Ok(worst)
}

fn identity_case(solver: &Solver, pair: &Eigenpair) -> Result<CaseResult> {
    let q = solver.potential();
    let worst = identity_worst(pair)?;
    let tolerance = if is_constant(q) { IDENTITY_TOL_CONSTANT } else { IDENTITY_TOL };
    Ok(CaseResult {
        case: label(q, pair.boundary, pair.n),
        passed: worst <= tolerance,
        residual: worst,
        tolerance,
    })
}

/// 16 x 16 chart grid used by the monotonicity battery.
pub fn evf_test_grid() -> (Vec<f64>, Vec<f64>) {
    let gammas = (0..16).map(|i| 0.25 + i as f64 * (4.0 * PI - 0.25) / 15.0).collect();
    let deltas = (0..16).map(|j| -3.0 * PI + j as f64 * (3.8 * PI) / 15.0).collect();
    (gammas, deltas)
}

fn evf_monotonicity(matrix: &TestMatrix, exec: Execution) -> Result<Vec<CaseResult>> {
    let (gammas, deltas) = evf_test_grid();
    let mut out = Vec::new();
    for solver in matrix.solvers()? {
        let case = format!("{} 16x16", solver.potential().label());
        match solver.evf_grid(&gammas, &deltas, exec) {
            Ok(m) => {
                // smallest relative step along either axis
                let mut gap = f64::INFINITY;
                for i in 0..m.len() {
                    for j in 0..m[i].len() {
                        if i > 0 {
                            gap = gap.min((m[i][j] - m[i - 1][j]) / m[i][j].abs().max(1.0));
                        }
                        if j > 0 {
                            gap = gap.min((m[i][j - 1] - m[i][j]) / m[i][j].abs().max(1.0));
                        }
                    }
                }
                out.push(CaseResult { case, passed: true, residual: gap, tolerance: 0.0 });
            }
            Err(Error::MonotonicityViolation { .. }) => {
                out.push(CaseResult { case, passed: false, residual: f64::NAN, tolerance: 0.0 });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `mu_n(q, pi, pi - eps)` against `mu_{n-1}(q, pi, 0)`, relative difference.
pub fn seam_gap(solver: &Solver, n: usize, eps: f64) -> Result<(f64, f64)> {
    let near = solver.eigenvalue(n, BoundaryParams::new(PI, PI - eps)?)?;
    let below = solver.eigenvalue(n - 1, BoundaryParams::dirichlet())?;
    Ok((near, below))
}

fn seam(matrix: &TestMatrix, exec: Execution) -> Result<Vec<CaseResult>> {
    let solvers = matrix.solvers()?;
    let mut cases = Vec::new();
    for p in 0..solvers.len() {
        for n in 1..=5 {
            cases.push((p, n));
        }
    }
    exec::map(exec, &cases, |&(p, n)| {
        let (near, below) = seam_gap(&solvers[p], n, SEAM_OFFSET)?;
        let rel = (near - below).abs() / below.abs().max(1.0);
        Ok(CaseResult {
            case: format!(
                "{} n={} mu_n(pi,pi-1e-4)={near:.10} mu_(n-1)(pi,0)={below:.10}",
                matrix.potentials[p].label(),
                n
            ),
            passed: rel <= SEAM_TOL,
            residual: rel,
            tolerance: SEAM_TOL,
        })
    })
    .into_iter()
    .collect()
}
