use std::f64::consts::PI;

use cvqsim::algorithms::grover::{grover_iterate, initial_state, GroverProblem, WindowOracle};
use cvqsim::circuit::{execute, parse, Backend, Circuit, GateKind};
use cvqsim::fock::{gate_matrix, interior_unitarity_error, FockGate};
use cvqsim::gaussian::GaussianState;
use cvqsim::gridstate::{GridState, ProjectionWindow};
use cvqsim::{Grid, HBar, SimRng};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn hbar() -> HBar {
    HBar::new(2.0).unwrap()
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        -10.0..10.0f64,
        (-1e6..1e6f64),
        (-1.0..1.0f64, -300..300i32).prop_map(|(m, e)| m * 10f64.powi(e)),
    ]
}

fn one_mode_gate() -> impl Strategy<Value = GateKind> {
    prop_oneof![
        finite().prop_map(GateKind::Xgate),
        finite().prop_map(GateKind::Zgate),
        (finite(), finite()).prop_map(|(r, phi)| GateKind::Dgate { r, phi }),
        (finite(), finite()).prop_map(|(r, phi)| GateKind::Sgate { r, phi }),
        finite().prop_map(GateKind::Rgate),
        Just(GateKind::Fourier),
        (finite(), finite()).prop_map(|(x0, w)| GateKind::Invert { x0, width: w.abs() }),
    ]
}

fn circuit() -> impl Strategy<Value = Circuit> {
    (1..4usize, prop::collection::vec((one_mode_gate(), 0..4usize, any::<bool>()), 0..12), any::<bool>()).prop_map(
        |(modes, gates, measure)| {
            let mut c = Circuit::new(modes).unwrap();
            c.push(GateKind::Squeezed { r: 0.5, phi: 0.25 }, &[0]).unwrap();
            for (g, t, mix) in gates {
                if mix && modes > 1 {
                    c.push(GateKind::BSgate { theta: 0.3, phi: -1.5 }, &[t % modes, (t + 1) % modes]).unwrap();
                } else {
                    c.push(g, &[t % modes]).unwrap();
                }
            }
            if measure {
                c.push(GateKind::MeasureX, &[modes - 1]).unwrap();
            }
            c
        },
    )
}

fn small_gaussian_ops() -> impl Strategy<Value = Vec<(u8, f64, f64)>> {
    prop::collection::vec((0..3u8, -0.8..0.8f64, -PI..PI), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_print_round_trip(c in circuit()) {
        prop_assert_eq!(parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn displacement_inverse(dx in -3.0..3.0f64, dp in -3.0..3.0f64) {
        let g = Grid::self_dual(256, hbar()).unwrap();
        let s = GridState::gaussian(g, 0.4, -0.2, 1.3).unwrap();
        let back = s.displace(0, dx, dp).unwrap().displace(0, -dx, -dp).unwrap();
        prop_assert!(back.fidelity(&s).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn gaussian_gates_keep_physical(ops in small_gaussian_ops()) {
        let mut s = GaussianState::vacuum(1, hbar()).unwrap();
        for (k, a, b) in ops {
            s = match k {
                0 => s.apply_displacement_xp(0, a, b).unwrap(),
                1 => s.apply_squeeze(0, a, b).unwrap(),
                _ => s.apply_rotation(0, b).unwrap(),
            };
        }
        prop_assert!(s.uncertainty_min_eigenvalue() > -1e-9);
        prop_assert!(s.is_pure(1e-9));
        let (sx, sp) = s.std_devs(0).unwrap();
        prop_assert!(sx * sp >= 1.0 - 1e-9);
    }

    #[test]
    fn projection_idempotent(center in -6.0..6.0f64, width in 0.6..8.0f64, x0 in -2.0..2.0f64) {
        let g = Grid::self_dual(128, hbar()).unwrap();
        let s = GridState::gaussian(g, x0, 0.7, 0.8).unwrap();
        let w = ProjectionWindow::new(center, width, 0);
        let (once, weight) = s.project(&w).unwrap();
        let (twice, _) = once.project(&w).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&weight));
        for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn grover_iteration_unitary(log_n in 2u32..8, target_frac in 0.0..1.0f64) {
        let n = 1usize << log_n;
        let p = GroverProblem::new(n, ((n as f64) * target_frac) as usize % n, hbar()).unwrap();
        let s = initial_state(&p, None).unwrap();
        let next = grover_iterate(&s, &WindowOracle::for_problem(&p), &p.start_window()).unwrap();
        prop_assert!((next.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fock_gates_unitary_on_interior(re in -0.8..0.8f64, im in -0.8..0.8f64, theta in -PI..PI) {
        for g in [FockGate::Phase(theta), FockGate::Displace(C64::new(re, im)), FockGate::Squeeze(C64::new(re, im) * 0.5)] {
            let u = gate_matrix(g, 30).unwrap();
            prop_assert!(interior_unitarity_error(&u) < 1e-6);
        }
    }

    #[test]
    fn executor_deterministic(seed in any::<u64>(), v in -2.0..2.0f64) {
        let c = parse(&format!("Squeezed(1) | q[0]\nXgate({v:?}) | q[1]\nBSgate(0.4) | q[0], q[1]\nMeasureX | q[0]\nMeasureX | q[1]")).unwrap();
        let b = Backend::Gaussian { hbar: hbar() };
        let a1 = execute(&c, &b, &mut SimRng::seed_from(seed)).unwrap();
        let a2 = execute(&c, &b, &mut SimRng::seed_from(seed)).unwrap();
        prop_assert_eq!(serde_json::to_string(&a1).unwrap(), serde_json::to_string(&a2).unwrap());
    }
}
