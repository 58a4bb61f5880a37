mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use slzero::oscillation::{self, identity_residual};
use slzero::shooting::phase_at_far_end;
use slzero::sweep::{self, EventKind};
use slzero::verify::{self, Battery, TestMatrix};
use slzero::{BoundaryParams, EndpointConditions, EvfCoordinates, Execution, Potential, Solver, SweepPlan, Vary};

fn cos2x() -> Potential {
    Potential::cosine(1.0, 2.0).unwrap()
}

#[test]
fn variational_matches_mu_difference() {
    let q = cos2x();
    let ic = EndpointConditions::left(PI).unwrap();
    let h = 1e-5;
    let at = |mu: f64| slzero::shooting::propagate(&q, mu, ic, 2048).unwrap().terminal();
    let st = at(1.0);
    let fd = (at(1.0 + h).y - at(1.0 - h).y) / (2.0 * h);
    assert!((st.y_mu - fd).abs() / fd.abs() < 1e-6, "{} vs {}", st.y_mu, fd);
}

#[test]
fn phase_matches_rk4_angle_equation() {
    let ic = EndpointConditions::left(PI).unwrap();
    for (mu, turns) in [(1.0, 1.0), (4.0, 2.0)] {
        let rec = phase_at_far_end(&Potential::zero(), mu, ic, 256).unwrap();
        let oracle = common::rk4_phase(|_| 0.0, mu, 0.0, 20000);
        assert!((oracle - turns * PI).abs() < 1e-10);
        assert!((rec.theta_terminal - oracle).abs() < 1e-9, "{} vs {}", rec.theta_terminal, oracle);
    }
    // nonconstant potential and a non-Dirichlet start
    let q = cos2x();
    for (alpha, mu) in [(FRAC_PI_3, 5.5), (0.75 * PI, 20.0)] {
        let ic = EndpointConditions::left(alpha).unwrap();
        let rec = phase_at_far_end(&q, mu, ic, 4096).unwrap();
        let oracle = common::rk4_phase(|x| (2.0 * x).cos(), mu, PI - alpha, 20000);
        assert!((rec.theta_terminal - oracle).abs() < 1e-5, "{} vs {}", rec.theta_terminal, oracle);
    }
}

#[test]
fn cos2x_ground_state_matches_matrix() {
    let mu = Solver::new(cos2x(), 4096).unwrap().eigenvalue(0, BoundaryParams::dirichlet()).unwrap();
    let fd = common::fd_dirichlet_eigenvalue(&cos2x(), 0, 20000);
    assert!((mu - fd).abs() / fd.abs() < 1e-5, "{mu} vs {fd}");
}

#[test]
fn cos2x_third_eigenfunction_zero_count_matches_matrix_vector() {
    let solver = Solver::new(cos2x(), 4096).unwrap();
    let pair = solver.find_eigenvalue(3, BoundaryParams::dirichlet()).unwrap();
    let zeros = pair.phi_zeros().unwrap();
    assert_eq!(zeros.len(), 5);
    assert_eq!(zeros[0].x, 0.0);
    assert_eq!(zeros[4].x, PI);
    let fd_mu = common::fd_dirichlet_eigenvalue(&cos2x(), 3, 20000);
    let v = common::fd_dirichlet_eigenvector(&cos2x(), fd_mu, 20000);
    assert_eq!(common::sign_changes(&v), 3);
    assert_eq!(pair.interior_zero_count(), 3);
}

#[test]
fn singular_potential_grid_matches_matrix() {
    let q = Potential::power(1.0, -0.5).unwrap();
    let solver = Solver::new(q.clone(), 4096).unwrap();
    // every chart point lands on Dirichlet data: mu_0, mu_1 / mu_1, mu_2
    let gammas = [PI, 2.0 * PI];
    let deltas = [-PI, 0.0];
    let m = solver.evf_grid(&gammas, &deltas, Execution::Sequential).unwrap();
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            assert!(v.is_finite());
            let fd = common::fd_dirichlet_eigenvalue(&q, i + 1 - j, 20000);
            assert!((v - fd).abs() / fd < 1e-4, "({i},{j}) {v} vs {fd}");
        }
    }
    assert!(m[1][0] > m[0][0] && m[1][1] > m[0][1]);
    assert!(m[0][0] > m[0][1] && m[1][0] > m[1][1]);
}

#[test]
fn evf_row_middle_entry_transcendental() {
    let solver = Solver::new(Potential::zero(), 1024).unwrap();
    let row: Vec<f64> = [-PI, -FRAC_PI_2, 0.0]
        .iter()
        .map(|&d| solver.evf(EvfCoordinates::new(PI, d).unwrap()).unwrap())
        .collect();
    let middle = common::free_dirichlet_left(1, FRAC_PI_2);
    assert!((row[0] - 4.0).abs() < 1e-10);
    assert!((row[1] - middle).abs() < 1e-10, "{} vs {}", row[1], middle);
    assert!((row[2] - 1.0).abs() < 1e-10);
}

#[test]
fn robin_eigenvalues_match_transcendental() {
    let solver = Solver::new(Potential::zero(), 1024).unwrap();
    for beta in [0.3, FRAC_PI_4, 1.2, 2.5] {
        for n in 0..5 {
            if n == 0 && beta > PI - PI.atan() {
                continue;
            }
            let mu = solver.eigenvalue(n, BoundaryParams::new(PI, beta).unwrap()).unwrap();
            let oracle = common::free_dirichlet_left(n, beta);
            assert!((mu - oracle).abs() <= 1e-10 * oracle.max(1.0), "n={n} beta={beta}: {mu} vs {oracle}");
        }
    }
}

#[test]
fn phi_velocity_matches_re_solve() {
    let solver = Solver::new(cos2x(), 4096).unwrap();
    let pair = solver.find_eigenvalue(2, BoundaryParams::dirichlet()).unwrap();
    let v = oscillation::zero_velocity_phi(&pair, 1).unwrap();
    let x = pair.phi_zeros().unwrap()[1].x;
    let fd = common::fd_zero_velocity(&solver, pair.mu, pair.boundary.left(), x, 1e-6).unwrap();
    assert!(v < 0.0);
    assert!((v - fd).abs() / v.abs() < 1e-4, "{v} vs {fd}");
}

#[test]
fn psi_velocities_match_re_solve() {
    let solver = Solver::new(cos2x(), 4096).unwrap();
    let bc = BoundaryParams::new(FRAC_PI_2, FRAC_PI_3).unwrap();
    let pair = solver.find_eigenvalue(2, bc).unwrap();
    let zeros = pair.psi_zeros().unwrap();
    assert_eq!(zeros.len(), 2);
    for z in zeros {
        let v = oscillation::zero_velocity_psi(&pair, z.k).unwrap();
        let fd = common::fd_zero_velocity(&solver, pair.mu, bc.right(), z.x, 1e-6).unwrap();
        assert!(v > 0.0);
        assert!((v - fd).abs() / v < 1e-4, "k={} {v} vs {fd}", z.k);
    }
}

#[test]
fn psi_velocity_at_origin_mirrors_phi() {
    let solver = Solver::new(Potential::zero(), 1024).unwrap();
    let pair = solver.find_eigenvalue(0, BoundaryParams::dirichlet()).unwrap();
    let zeros = pair.psi_zeros().unwrap();
    let at0 = zeros.iter().find(|z| z.x == 0.0).unwrap();
    let v = oscillation::zero_velocity_psi(&pair, at0.k).unwrap();
    assert!((v - FRAC_PI_2).abs() < 1e-10, "{v}");
}

#[test]
fn identity_residual_converges_under_refinement() {
    let q = cos2x();
    let ic = EndpointConditions::left(PI).unwrap();
    let r = identity_residual(&slzero::shooting::propagate(&q, 7.0, ic, 4096).unwrap(), FRAC_PI_2);
    assert!(r < 1e-8, "{r}");
    // the eigenvalue itself converges at second order in the cell width
    let fine = Solver::new(q.clone(), 8192).unwrap().eigenvalue(4, BoundaryParams::dirichlet()).unwrap();
    let e1 = Solver::new(q.clone(), 256).unwrap().eigenvalue(4, BoundaryParams::dirichlet()).unwrap() - fine;
    let e2 = Solver::new(q, 512).unwrap().eigenvalue(4, BoundaryParams::dirichlet()).unwrap() - fine;
    let ratio = e1 / e2;
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn free_beta_sweep_follows_transcendental_path() {
    let plan = SweepPlan::uniform(Potential::zero(), 1, Vary::Beta, PI, 64).unwrap().with_cells(1024);
    let res = sweep::run_sweep(&plan).unwrap();
    assert!(res.mu_monotone);
    for (i, &beta) in res.angles.iter().enumerate() {
        let oracle = common::free_dirichlet_left(1, beta);
        assert!((res.mu[i] - oracle).abs() < 1e-9 * oracle, "beta={beta}");
        // phi = sin(s x): zeros at j pi / s
        let s = oracle.sqrt();
        let interior: Vec<f64> = res.zeros[i].iter().cloned().filter(|&x| x > 0.0 && x < PI).collect();
        assert_eq!(interior.len(), 1);
        assert!((interior[0] - PI / s).abs() < 1e-9);
    }
    assert!((res.mu[0] - 4.0).abs() < 1e-12);
    let exits: Vec<_> = res.events.iter().filter(|e| e.kind == EventKind::ExitedAtRight).collect();
    assert_eq!(exits.len(), 1);
    assert_eq!(exits[0].angle_lo, 0.0);
    let br = sweep::detect_transition(&plan, exits[0]).unwrap();
    assert!(br.angle_lo == 0.0 && br.angle_hi <= 1e-8);
}

#[test]
fn free_alpha_sweep_follows_transcendental_path() {
    let plan = SweepPlan::uniform(Potential::zero(), 2, Vary::Alpha, 0.0, 64).unwrap().with_cells(1024);
    let res = sweep::run_sweep(&plan).unwrap();
    assert!(res.mu_monotone);
    for (i, &alpha) in res.angles.iter().enumerate() {
        let oracle = common::free_dirichlet_right(2, alpha);
        assert!((res.mu[i] - oracle).abs() < 1e-9 * oracle, "alpha={alpha}");
        // psi = sin(s (pi - x)): zeros at pi - j pi / s
        let s = oracle.sqrt();
        let interior: Vec<f64> = res.zeros[i].iter().cloned().filter(|&x| x > 0.0 && x < PI).collect();
        assert_eq!(interior.len(), 2);
        assert!((interior[0] - (PI - 2.0 * PI / s)).abs() < 1e-9);
        assert!((interior[1] - (PI - PI / s)).abs() < 1e-9);
    }
    assert_eq!(res.zeros.last().unwrap()[0], 0.0);
    let entries: Vec<_> = res.events.iter().filter(|e| e.kind == EventKind::EnteredAtLeft).collect();
    assert_eq!(entries.len(), 1);
    let br = sweep::detect_transition(&plan, entries[0]).unwrap();
    assert!(br.angle_hi == PI && PI - br.angle_lo <= 1e-8);
}

#[test]
fn cos2x_right_exit_happens_in_first_step() {
    let plan = SweepPlan::uniform(cos2x(), 2, Vary::Beta, PI, 64).unwrap();
    let first_step = plan.grid[1];
    let res = sweep::run_sweep(&plan).unwrap();
    let exits: Vec<_> = res.events.iter().filter(|e| e.kind == EventKind::ExitedAtRight).collect();
    assert_eq!(exits.len(), 1);
    let ev = exits[0];
    assert_eq!(ev.angle_lo, 0.0);
    assert!(ev.angle_hi > 0.0 && ev.angle_hi <= first_step);
    let br = sweep::detect_transition(&plan, ev).unwrap();
    assert!(br.angle_lo >= 0.0 && br.angle_hi < first_step && br.angle_hi - br.angle_lo <= 1e-8);
    assert!(br.endpoint_value_hi != 0.0);
}

#[test]
fn velocity_battery_on_cos2x() {
    let m = TestMatrix::for_potentials(vec![cos2x()], 4096);
    let r = verify::run(Battery::Velocities, &m, Execution::Parallel).unwrap();
    assert_eq!(r.cases.len(), 144);
    assert!(r.all_passed(), "{} failures", r.failures());
    assert!(r.max_residual() < 1e-4);
}

#[test]
fn singular_alpha_sweep_keeps_count() {
    let plan = SweepPlan::uniform(Potential::power(1.0, -0.5).unwrap(), 3, Vary::Alpha, 0.0, 64).unwrap();
    let res = sweep::run_sweep(&plan).unwrap();
    assert!(res.interior_counts().iter().all(|&c| c == 3));
    assert!(res.mu_monotone);
}

#[test]
fn interior_count_examples() {
    let bc = BoundaryParams::new(FRAC_PI_3, PI / 5.0).unwrap();
    assert_eq!(oscillation::count_interior_zeros(&Potential::power(1.0, -0.5).unwrap(), 4, bc).unwrap(), 4);
    let nn = BoundaryParams::new(FRAC_PI_2, FRAC_PI_2).unwrap();
    assert_eq!(oscillation::count_interior_zeros(&Potential::step(10.0, 1.0, 2.0).unwrap(), 0, nn).unwrap(), 0);
}

#[test]
fn seam_gap_is_first_order_in_offset() {
    let solver = Solver::new(cos2x(), 4096).unwrap();
    for n in 1..=5 {
        let (a, below) = verify::seam_gap(&solver, n, 1e-3).unwrap();
        let (b, _) = verify::seam_gap(&solver, n, 1e-4).unwrap();
        let ratio = (a - below) / (b - below);
        assert!((ratio - 10.0).abs() < 0.05, "n={n} ratio {ratio}");
    }
    // q = 0: the gap itself follows the transcendental oracle
    let free = Solver::new(Potential::zero(), 4096).unwrap();
    let (near, below) = verify::seam_gap(&free, 5, 1e-4).unwrap();
    assert!((below - 25.0).abs() < 1e-9);
    assert!((near - common::free_dirichlet_left(5, PI - 1e-4)).abs() < 1e-10);
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let solver = Solver::new(Potential::step(10.0, 1.0, 2.0).unwrap(), 1024).unwrap();
    let (g, d) = verify::evf_test_grid();
    let s = solver.evf_grid(&g, &d, Execution::Sequential).unwrap();
    let p = solver.evf_grid(&g, &d, Execution::Parallel).unwrap();
    assert_eq!(s, p);
}
