//! Deutsch-Jozsa on squeezed Gaussian states.
//!
//! Mode 0 is squeezed in x, turned by `Rgate(pi/2)` so the oracle acts on the
//! broad quadrature, then turned back and measured in x. A constant oracle
//! (an x shift in the turned frame) leaves the measured x untouched; a
//! balanced one (a p kick in the turned frame) moves it away from zero.
//! Mode 1 is prepared as in the reference listing and plays no part in the
//! decision.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::{run, Backend, Circuit, GateKind};
use crate::error::{CvError, CvResult};
use crate::numerics::HBar;
use crate::par::{self, Exec};
use crate::rng::SimRng;

/// Decision threshold on the mean `|outcome|`, for `hbar = 2` and
/// `squeeze_r = 2`. It is the geometric mean of the mean `|outcome|` of
/// the two reference oracles, as printed by `examples/dj_calibration.rs`.
pub const DJ_THRESHOLD: f64 = 0.5684;

pub const DEFAULT_SQUEEZE: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Constant,
    Balanced,
}

/// Single-mode Gaussian ops applied to the query mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DJOracle {
    ops: Vec<GateKind>,
    family: Option<Verdict>,
}

impl DJOracle {
    pub fn new(ops: Vec<GateKind>) -> CvResult<Self> {
        let mut probe = Circuit::new(1)?;
        for op in &ops {
            if op.is_preparation() || *op == GateKind::MeasureX || op.arity() != 1 {
                return Err(CvError::Capability(format!("{} cannot appear in an oracle", op.name())));
            }
            probe.push(op.clone(), &[0])?;
        }
        probe.classify().gaussian.map_err(CvError::Capability)?;
        Ok(Self { ops, family: None })
    }

    /// An oracle from a one-mode circuit file body.
    pub fn from_circuit(c: &Circuit) -> CvResult<Self> {
        if c.mode_count() != 1 {
            return Err(CvError::Capability(format!(
                "oracle circuits act on one mode, got {}",
                c.mode_count()
            )));
        }
        Self::new(c.ops().iter().map(|o| o.kind.clone()).collect())
    }

    /// Reference constant oracle: identity.
    pub fn constant() -> Self {
        Self { ops: vec![], family: Some(Verdict::Constant) }
    }

    /// Constant oracle shifting x by `v`, as in the reference listing's `Xgate(1)`.
    pub fn constant_shift(v: f64) -> Self {
        Self { ops: vec![GateKind::Xgate(v)], family: Some(Verdict::Constant) }
    }

    /// Reference balanced oracle: a momentum kick `Zgate(3)`.
    pub fn balanced() -> Self {
        Self { ops: vec![GateKind::Zgate(3.0)], family: Some(Verdict::Balanced) }
    }

    pub fn balanced_kick(v: f64) -> Self {
        Self { ops: vec![GateKind::Zgate(v)], family: Some(Verdict::Balanced) }
    }

    pub fn ops(&self) -> &[GateKind] {
        &self.ops
    }

    /// The family label, for test harnesses; [`dj_run`] never reads it.
    pub fn family(&self) -> Option<Verdict> {
        self.family
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DJResult {
    pub mean_abs_outcome: f64,
    pub verdict: Verdict,
    pub shots: usize,
}

pub fn dj_circuit(oracle: &DJOracle, squeeze_r: f64) -> CvResult<Circuit> {
    let mut c = Circuit::new(2)?;
    c.push(GateKind::Squeezed { r: squeeze_r, phi: 0.0 }, &[0])?;
    c.push(GateKind::Squeezed { r: squeeze_r, phi: 0.0 }, &[1])?;
    c.push(GateKind::Xgate(FRAC_PI_2), &[1])?;
    c.push(GateKind::Rgate(FRAC_PI_2), &[0])?;
    c.push(GateKind::Rgate(FRAC_PI_2), &[1])?;
    for op in &oracle.ops {
        c.push(op.clone(), &[0])?;
    }
    c.push(GateKind::Rgate(-FRAC_PI_2), &[0])?;
    c.push(GateKind::MeasureX, &[0])?;
    Ok(c)
}

/// MeasureX outcomes of `shots` runs; shot `i` uses stream `i` of a child of `rng`.
pub fn dj_outcomes(
    oracle: &DJOracle,
    squeeze_r: f64,
    hbar: HBar,
    rng: &mut SimRng,
    shots: usize,
    exec: Exec,
) -> CvResult<Vec<f64>> {
    if shots == 0 {
        return Err(CvError::Config("shots must be at least 1".into()));
    }
    if !(squeeze_r.is_finite() && squeeze_r > 0.0) {
        return Err(CvError::Domain(format!("squeeze {squeeze_r} must be positive")));
    }
    let circuit = dj_circuit(oracle, squeeze_r)?;
    let backend = Backend::Gaussian { hbar };
    let child = rng.split();
    par::map_range(exec, shots, |i| {
        let mut shot_rng = child.stream(i as u64);
        let (outcomes, _) = run(&circuit, &backend, &mut shot_rng)?;
        Ok(outcomes[0].value)
    })
    .into_iter()
    .collect()
}

pub fn dj_run_with_threshold(
    oracle: &DJOracle,
    squeeze_r: f64,
    hbar: HBar,
    rng: &mut SimRng,
    shots: usize,
    threshold: f64,
) -> CvResult<DJResult> {
    let xs = dj_outcomes(oracle, squeeze_r, hbar, rng, shots, Exec::default())?;
    let mean_abs_outcome = xs.iter().map(|x| x.abs()).sum::<f64>() / shots as f64;
    let verdict = if mean_abs_outcome < threshold { Verdict::Constant } else { Verdict::Balanced };
    Ok(DJResult { mean_abs_outcome, verdict, shots })
}

pub fn dj_run(oracle: &DJOracle, squeeze_r: f64, hbar: HBar, rng: &mut SimRng, shots: usize) -> CvResult<DJResult> {
    dj_run_with_threshold(oracle, squeeze_r, hbar, rng, shots, DJ_THRESHOLD)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> HBar {
        HBar::new(2.0).unwrap()
    }

    #[test]
    fn reference_oracles_decide() {
        let mut rng = SimRng::seed_from(11);
        for oracle in [DJOracle::constant(), DJOracle::constant_shift(1.0)] {
            let r = dj_run(&oracle, DEFAULT_SQUEEZE, h(), &mut rng, 100).unwrap();
            assert_eq!(r.verdict, Verdict::Constant, "{r:?}");
        }
        let r = dj_run(&DJOracle::balanced(), DEFAULT_SQUEEZE, h(), &mut rng, 100).unwrap();
        assert_eq!(r.verdict, Verdict::Balanced);
        assert!((r.mean_abs_outcome - 3.0).abs() < 0.1);
    }

    #[test]
    fn constant_outcome_matches_squeezed_width() {
        // Mean |N(0, s^2)| = s sqrt(2/pi) with s = sqrt(hbar/2) e^{-r}.
        let mut rng = SimRng::seed_from(5);
        let xs = dj_outcomes(&DJOracle::constant(), 2.0, h(), &mut rng, 20_000, Exec::default()).unwrap();
        let mean = xs.iter().map(|x| x.abs()).sum::<f64>() / xs.len() as f64;
        let expect = (-2.0f64).exp() * (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean - expect).abs() < 0.005 * 3.0, "{mean} vs {expect}");
    }

    #[test]
    fn seq_and_par_shots_agree() {
        let a = dj_outcomes(&DJOracle::balanced(), 2.0, h(), &mut SimRng::seed_from(2), 64, Exec::Seq).unwrap();
        let b = dj_outcomes(&DJOracle::balanced(), 2.0, h(), &mut SimRng::seed_from(2), 64, Exec::Par).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_gaussian_oracle_rejected() {
        let err = DJOracle::new(vec![GateKind::Invert { x0: 0.0, width: 1.0 }]).unwrap_err();
        assert!(matches!(err, CvError::Capability(_)));
        assert!(DJOracle::new(vec![GateKind::MeasureX]).is_err());
    }

    #[test]
    fn circuit_shape() {
        let c = dj_circuit(&DJOracle::constant_shift(1.0), 2.0).unwrap();
        assert_eq!(c.mode_count(), 2);
        assert_eq!(c.ops().len(), 8);
        assert!(c.classify().gaussian_compatible());
    }
}
