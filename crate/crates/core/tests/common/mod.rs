//! Independent reference computations used by the integration tests.
//!
//! None of these reuse the library's propagator: the matrix oracle works on a
//! finite-difference discretisation, the phase oracle integrates the scalar
//! angle equation with RK4, and the transcendental oracle bisects closed forms.
#![allow(dead_code)]

use std::f64::consts::PI;

use slzero::{EndpointConditions, Potential, Result, SolutionTrajectory, Solver};

/// Cell averages of `q` on the dual cells of a uniform interior grid, so
/// integrable singularities at the endpoints stay finite.
fn fd_diagonal(q: &Potential, points: usize) -> (Vec<f64>, f64) {
    let h = PI / (points + 1) as f64;
    let diag = (1..=points)
        .map(|i| {
            let x = i as f64 * h;
            let a = (x - 0.5 * h).max(0.0);
            let b = (x + 0.5 * h).min(PI);
            2.0 / (h * h) + q.integral(a, b) / (b - a)
        })
        .collect();
    (diag, h)
}

/// Number of eigenvalues below `lambda` of the symmetric tridiagonal matrix
/// with diagonal `d` and constant off-diagonal `e` (Sturm sequence).
fn sturm_count(d: &[f64], e: f64, lambda: f64) -> usize {
    let mut count = 0;
    let mut r = 1.0;
    for (i, &di) in d.iter().enumerate() {
        let prev = if i == 0 { 0.0 } else { e * e / r };
        r = di - lambda - prev;
        if r == 0.0 {
            r = f64::EPSILON * (di.abs() + 1.0);
        }
        if r < 0.0 {
            count += 1;
        }
    }
    count
}

/// Dirichlet eigenvalue `mu_n` of `-y'' + q y = mu y` on `points` interior
/// nodes, by bisection on the Sturm count.
pub fn fd_dirichlet_eigenvalue(q: &Potential, n: usize, points: usize) -> f64 {
    let (d, h) = fd_diagonal(q, points);
    let e = -1.0 / (h * h);
    let lo0 = d.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 / (h * h);
    let mut lo = lo0.min(-1e3);
    let mut hi = (n as f64 + 2.0).powi(2) + q.l1_norm() + 10.0;
    while sturm_count(&d, e, hi) <= n {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&d, e, mid) > n {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector for the eigenvalue near `shift`, by inverse iteration with a
/// tridiagonal (Thomas) solve.
pub fn fd_dirichlet_eigenvector(q: &Potential, shift: f64, points: usize) -> Vec<f64> {
    let (d, h) = fd_diagonal(q, points);
    let e = -1.0 / (h * h);
    let sigma = shift + 1e-7 * shift.abs().max(1.0);
    let mut v = vec![1.0; points];
    for _ in 0..6 {
        // forward elimination
        let mut c = vec![0.0; points];
        let mut r = vec![0.0; points];
        let mut denom = d[0] - sigma;
        c[0] = e / denom;
        r[0] = v[0] / denom;
        for i in 1..points {
            denom = d[i] - sigma - e * c[i - 1];
            c[i] = e / denom;
            r[i] = (v[i] - e * r[i - 1]) / denom;
        }
        for i in (0..points - 1).rev() {
            r[i] -= c[i] * r[i + 1];
        }
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = r.into_iter().map(|x| x / norm).collect();
    }
    v
}

pub fn sign_changes(v: &[f64]) -> usize {
    let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let signs: Vec<bool> = v.iter().filter(|x| x.abs() > 1e-9 * scale).map(|&x| x > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Pruefer angle `theta` with `y = r sin theta`, `y' = r cos theta`,
/// integrated from 0 to pi with classical RK4 on `steps` steps.
pub fn rk4_phase(q: impl Fn(f64) -> f64, mu: f64, theta0: f64, steps: usize) -> f64 {
    let f = |x: f64, th: f64| {
        let (s, c) = th.sin_cos();
        c * c + (mu - q(x)) * s * s
    };
    let h = PI / steps as f64;
    let mut th = theta0;
    for i in 0..steps {
        let x = i as f64 * h;
        let k1 = f(x, th);
        let k2 = f(x + 0.5 * h, th + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h, th + 0.5 * h * k2);
        let k4 = f(x + h, th + h * k3);
        th += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    th
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `mu_n(0, pi, beta)`: `s = sqrt(mu)` solves
/// `sin(s pi) cos(beta) + s cos(s pi) sin(beta) = 0`, i.e.
/// `tan(s pi) = -s tan(beta)`. Covers the nonnegative part of the spectrum,
/// which is all of it for `n >= 1` and for `beta <= pi - atan(pi)` at `n = 0`.
pub fn free_dirichlet_left(n: usize, beta: f64) -> f64 {
    if beta == 0.0 {
        return ((n + 1) * (n + 1)) as f64;
    }
    let (sb, cb) = beta.sin_cos();
    let f = |s: f64| (s * PI).sin() * cb + s * (s * PI).cos() * sb;
    let lo = if n == 0 { 1e-9 } else { n as f64 + 1e-12 };
    let s = bisect(f, lo, n as f64 + 1.0);
    s * s
}

/// `mu_n(0, alpha, 0)`, by the reflection `x -> pi - x`.
pub fn free_dirichlet_right(n: usize, alpha: f64) -> f64 {
    free_dirichlet_left(n, PI - alpha)
}

/// Zero of the dense closed form of `traj` nearest `guess`, by Newton. The
/// closed form extends past the endpoints, so zeros pushed out of `[0, pi]`
/// by a perturbation are still followed.
pub fn newton_zero(traj: &SolutionTrajectory, guess: f64) -> f64 {
    let mut x = guess;
    for _ in 0..60 {
        let (st, _) = traj.eval_scaled(x);
        let dx = st.y / st.dy;
        x -= dx;
        if dx.abs() <= 1e-15 {
            break;
        }
    }
    x
}

/// Derivative of a zero location in `mu` from re-solved trajectories.
///
/// Interior zeros use a central difference. A zero sitting on an endpoint
/// leaves `[0, pi]` under one sign of the perturbation, where `q` may not
/// even be defined, so it gets a second-order one-sided stencil toward the
/// side that keeps it inside.
pub fn fd_zero_velocity(solver: &Solver, mu: f64, ic: EndpointConditions, x: f64, h: f64) -> Result<f64> {
    let at = |d: f64| -> Result<f64> { Ok(newton_zero(&solver.propagate(mu + d, ic)?, x)) };
    if x > 0.0 && x < PI {
        return Ok((at(h)? - at(-h)?) / (2.0 * h));
    }
    let s = if (0.0..=PI).contains(&at(h)?) { 1.0 } else { -1.0 };
    Ok(s * (-3.0 * x + 4.0 * at(s * h)? - at(2.0 * s * h)?) / (2.0 * h))
}

/// Relative error between a vector and a reference, in the max norm.
pub fn rel_max(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den
}
