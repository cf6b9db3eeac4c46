use std::io::Write;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{Output, VerifyArgs, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::algorithms::dj::{dj_run, DJOracle, Verdict, DEFAULT_SQUEEZE};
use crate::algorithms::grover::{grover_search, GroverProblem, WindowOracle};
use crate::circuit::parse;
use crate::error::{CvError, CvResult};
use crate::fock::{interior_commutator_error, ladder_ops, quadrature_ops, FockGate, FockState};
use crate::gridstate::{commutator_residual, GridState, ProjectionWindow};
use crate::numerics::{delta_identity_check, p_to_x_transform, x_to_p_transform, Grid, HBar};
use crate::rng::SimRng;
use crate::wigner::{default_axis, wigner_from_fock, wigner_from_grid};

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    passed: bool,
    checks: Vec<Check>,
}

type CheckFn = fn(HBar, bool) -> CvResult<(bool, String)>;

fn bound(name: &str, value: f64, limit: f64) -> (bool, String) {
    (value < limit, format!("{name} = {value:.3e} (limit {limit:.0e})"))
}

fn fock_commutator(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let (x, p) = quadrature_ops(40, h)?;
    Ok(bound("interior |[x,p] - i hbar|", interior_commutator_error(&x, &p, C64::new(0.0, h.value())), 1e-12))
}

fn grid_commutator(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let grid = Grid::new(512, 20.0 * h.value().sqrt(), h)?;
    let vac = GridState::vacuum(grid, 1)?;
    Ok(bound("interior residual", commutator_residual(&grid, &vac)?, 1e-6))
}

fn fourier_pair(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let grid = Grid::self_dual(256, h)?;
    let psi: Vec<C64> = grid.xs().iter().map(|&x| C64::from_polar((-(x - 1.0).powi(2) / 3.0).exp(), 0.4 * x)).collect();
    let back = p_to_x_transform(&x_to_p_transform(&psi, &grid)?, &grid)?;
    let err = psi.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(bound("round trip", err, 1e-12))
}

fn delta_identity(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let err = [256, 1024]
        .iter()
        .map(|&n| Grid::self_dual(n, h).map(|g| delta_identity_check(&g)))
        .collect::<CvResult<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(bound("delta identity error", err, 1e-10))
}

fn projection(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let grid = Grid::self_dual(256, h)?;
    let s = GridState::gaussian(grid, 0.7, -0.3, 1.3)?;
    let w = ProjectionWindow::new(0.5, 2.0, 0);
    let (once, _) = s.project(&w)?;
    let (twice, _) = once.project(&w)?;
    let err = once.amplitudes().iter().zip(twice.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(bound("|PP psi - P psi|", err, 1e-12))
}

fn ladder(_: HBar, _: bool) -> CvResult<(bool, String)> {
    let ops = ladder_ops(10)?;
    let col = ops.a_dag.column(3);
    let ok = (0..10).all(|i| col[i] == if i == 4 { C64::new(2.0, 0.0) } else { C64::new(0.0, 0.0) });
    Ok((ok, "a^dag |3> = 2 |4>".into()))
}

fn coherent_eigen(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let alpha = C64::new(1.0, -0.8);
    let s = FockState::coherent(alpha, 40, h)?;
    let a = ladder_ops(40)?.a;
    let v = nalgebra::DVector::from_column_slice(s.amplitudes());
    let r = &a * &v - &v * alpha;
    let err = r.iter().take(39).map(|z| z.norm()).fold(0.0, f64::max);
    Ok(bound("interior |a psi - alpha psi|", err, 1e-6))
}

fn wigner_vacuum(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let grid = Grid::self_dual(512, h)?;
    let axis = default_axis(h, 5.0, 101);
    let w = wigner_from_grid(&GridState::vacuum(grid, 1)?, &axis, &axis)?;
    let peak_err = (w.max() - 1.0 / (std::f64::consts::PI * h.value())).abs();
    let norm_err = (w.normalization() - 1.0).abs();
    Ok((peak_err < 1e-6 && norm_err < 1e-4, format!("peak error {peak_err:.2e}, normalization error {norm_err:.2e}")))
}

fn wigner_negativity(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let grid = Grid::self_dual(512, h)?;
    let s = FockState::number_state(1, 20, h)?;
    let axis = default_axis(h, 4.0, 81);
    let w = wigner_from_fock(&s, grid, &axis, &axis)?;
    let err = (w.min() + 1.0 / (std::f64::consts::PI * h.value())).abs();
    Ok(bound("|min W + 1/(pi hbar)|", err, 1e-4))
}

fn hbar_consistency(h: HBar, inject: bool) -> CvResult<(bool, String)> {
    let grid_hbar = if inject { HBar::new(h.value() + 1.0)? } else { h };
    let s = FockState::vacuum(1, 12, h)?.apply_gate(0, FockGate::Displace(C64::new(0.5, 0.0)))?;
    match s.to_grid(Grid::self_dual(256, grid_hbar)?) {
        Ok(_) => Ok((true, "Fock and grid agree on hbar".into())),
        Err(e @ CvError::HbarMismatch { .. }) => Ok((false, e.to_string())),
        Err(e) => Err(e),
    }
}

fn grover(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let p = GroverProblem::new(64, 12, h)?;
    let t = grover_search(&p, &WindowOracle::for_problem(&p), None, None)?;
    Ok((t.success_prob_final > 0.5, format!("N=64 success {:.4}", t.success_prob_final)))
}

fn deutsch_jozsa(h: HBar, _: bool) -> CvResult<(bool, String)> {
    let mut rng = SimRng::seed_from(0);
    let c = dj_run(&DJOracle::constant(), DEFAULT_SQUEEZE, h, &mut rng, 100)?;
    let b = dj_run(&DJOracle::balanced(), DEFAULT_SQUEEZE, h, &mut rng, 100)?;
    Ok((
        c.verdict == Verdict::Constant && b.verdict == Verdict::Balanced,
        format!("mean |x|: constant {:.3}, balanced {:.3}", c.mean_abs_outcome, b.mean_abs_outcome),
    ))
}

fn parser_round_trip(_: HBar, _: bool) -> CvResult<(bool, String)> {
    let src = "Squeezed(2) | q[0]\nSqueezed(2) | q[1]\nXgate(3) | q[0]\nXgate(pi/2) | q[1]\n\
               Rgate(pi/2) | q[0]\nRgate(pi/2) | q[1]\nXgate(1) | q[1]\nRgate(-pi/2) | q[0]\nMeasureX | q[0]\n";
    let c = parse(src)?;
    let ok = parse(&c.to_string())? == c && c.ops().len() == 9;
    Ok((ok, "two-mode listing parses and reprints".into()))
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("fock-commutator", fock_commutator),
    ("grid-commutator", grid_commutator),
    ("fourier-pair", fourier_pair),
    ("delta-identity", delta_identity),
    ("projection-idempotence", projection),
    ("ladder-algebra", ladder),
    ("coherent-eigenrelation", coherent_eigen),
    ("wigner-vacuum", wigner_vacuum),
    ("wigner-negativity", wigner_negativity),
    ("hbar-consistency", hbar_consistency),
    ("grover-success", grover),
    ("deutsch-jozsa", deutsch_jozsa),
    ("parser-round-trip", parser_round_trip),
];

pub(super) fn cmd_verify(a: &VerifyArgs, hbar: HBar, out: &Output, stdout: &mut dyn Write) -> CvResult<i32> {
    let inject = match a.inject.as_deref() {
        None => false,
        Some("hbar-mismatch") => true,
        Some(other) => return Err(CvError::Config(format!("unknown injection '{other}'"))),
    };
    let checks: Vec<Check> = CHECKS
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = f(hbar, inject).unwrap_or_else(|e| (false, e.to_string()));
            Check { name, passed, detail }
        })
        .collect();
    let report = Report { passed: checks.iter().all(|c| c.passed), checks };
    if a.json {
        out.json(stdout, &report)?;
    } else {
        let mut text = String::new();
        for c in &report.checks {
            text.push_str(&format!("{:<4} {:<24} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        if failed.is_empty() {
            text.push_str("all checks passed\n");
        } else {
            text.push_str(&format!("failed: {}\n", failed.join(", ")));
        }
        out.write(stdout, text.as_bytes())?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
