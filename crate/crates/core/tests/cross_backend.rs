mod common;

use common::*;
use cvqsim::circuit::{parse, run, Backend, FinalState};
use cvqsim::fock::FockGate;
use cvqsim::gridstate::GridState;
use cvqsim::SimRng;
use num_complex::Complex64 as C64;

#[test]
fn displaced_squeezed_fock_d40_matches_gaussian() {
    let c = parse("Vacuum() | q[0]\nDgate(0.5) | q[0]\nSgate(0.5) | q[0]").unwrap();
    let mut rng = SimRng::seed_from(0);
    let FinalState::Gaussian { state, .. } = run(&c, &Backend::Gaussian { hbar: hbar() }, &mut rng).unwrap().1 else {
        unreachable!()
    };
    let FinalState::Fock(f) = run(&c, &Backend::Fock { cutoff: 40, hbar: hbar() }, &mut rng).unwrap().1 else {
        unreachable!()
    };
    let on_grid = grid_stats(&f.to_grid(grid()).unwrap());
    let (sx, sp) = state.std_devs(0).unwrap();
    let g = Stats { mean_x: state.mean()[0], mean_p: state.mean()[1], std_x: sx, std_p: sp };
    assert!(g.max_diff(&on_grid) < 1e-4, "{g:?} vs {on_grid:?}");
    // Displacement first, then squeeze: the x mean shrinks by e^{-r}.
    assert!((g.mean_x - (-0.5f64).exp()).abs() < 1e-12);
}

#[test]
fn fourier_gate_is_quarter_rotation_everywhere() {
    let a = parse("Dgate(0.4, 0.3) | q[0]\nSgate(0.2, 1.0) | q[0]\nFourier | q[0]").unwrap();
    let b = parse("Dgate(0.4, 0.3) | q[0]\nSgate(0.2, 1.0) | q[0]\nRgate(pi/2) | q[0]").unwrap();
    let (ta, tb) = (run_triangle(&a), run_triangle(&b));
    assert!(grid_stats(&ta.grid).max_diff(&grid_stats(&tb.grid)) < 1e-12);
    assert!(ta.gaussian_stats().max_diff(&tb.gaussian_stats()) < 1e-12);
    assert!(ta.discrepancies().0 < 1e-8);
}

#[test]
fn empty_circuit_gives_vacuum() {
    let c = cvqsim::circuit::Circuit::new(1).unwrap();
    let t = run_triangle(&c);
    let vac = GridState::vacuum(grid(), 1).unwrap();
    assert!((t.grid.fidelity(&vac).unwrap() - 1.0).abs() < 1e-12);
    assert!((t.fock_on_grid.fidelity(&vac).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn mixer_agrees_between_gaussian_and_fock() {
    let c = parse("Dgate(0.6) | q[0]\nSgate(0.2) | q[1]\nBSgate(0.7, 0.4) | q[0], q[1]\nBSgate(0.3, -1.1) | q[1], q[0]").unwrap();
    let mut rng = SimRng::seed_from(0);
    let FinalState::Gaussian { state, .. } = run(&c, &Backend::Gaussian { hbar: hbar() }, &mut rng).unwrap().1 else {
        unreachable!()
    };
    let FinalState::Fock(f) = run(&c, &Backend::Fock { cutoff: 16, hbar: hbar() }, &mut rng).unwrap().1 else {
        unreachable!()
    };
    for m in 0..2 {
        let mo = f.moments(m).unwrap();
        let (sx, sp) = state.std_devs(m).unwrap();
        let d = [
            mo.mean_x - state.mean()[2 * m],
            mo.mean_p - state.mean()[2 * m + 1],
            mo.std_x - sx,
            mo.std_p - sp,
        ];
        assert!(d.iter().all(|v| v.abs() < 1e-6), "mode {m}: {d:?}");
    }
}

#[test]
fn fock_displacement_convention_matches_grid_shift() {
    // alpha = (dx + i dp) / sqrt(2 hbar)
    let (dx, dp) = (0.8, -0.5);
    let f = cvqsim::fock::FockState::vacuum(1, 40, hbar())
        .unwrap()
        .apply_gate(0, FockGate::Displace(C64::new(dx, dp) / 2.0))
        .unwrap();
    let g = GridState::vacuum(grid(), 1).unwrap().displace(0, dx, dp).unwrap();
    assert!((f.to_grid(grid()).unwrap().fidelity(&g).unwrap() - 1.0).abs() < 1e-10);
}
