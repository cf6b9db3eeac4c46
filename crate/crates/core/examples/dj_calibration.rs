//! Calibrates the Deutsch-Jozsa decision threshold.
//!
//! Runs both reference oracle families at hbar = 2, squeeze r = 2 over many
//! seeds and prints the geometric mean of their mean |outcome|.

use cvqsim::algorithms::dj::{dj_outcomes, DJOracle, DEFAULT_SQUEEZE, DJ_THRESHOLD};
use cvqsim::par::Exec;
use cvqsim::{HBar, SimRng};

fn mean_abs(oracle: &DJOracle, seeds: u64, shots: usize) -> (f64, f64, f64) {
    let hbar = HBar::new(2.0).unwrap();
    let means: Vec<f64> = (0..seeds)
        .map(|s| {
            let xs = dj_outcomes(oracle, DEFAULT_SQUEEZE, hbar, &mut SimRng::seed_from(s), shots, Exec::default())
                .unwrap();
            xs.iter().map(|x| x.abs()).sum::<f64>() / shots as f64
        })
        .collect();
    let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (means.iter().sum::<f64>() / seeds as f64, lo, hi)
}

fn main() {
    let (seeds, shots) = (200, 100);
    let constant = [DJOracle::constant(), DJOracle::constant_shift(1.0)];
    let mut c_mean = 0.0;
    let mut c_max: f64 = 0.0;
    for o in &constant {
        let (m, _, hi) = mean_abs(o, seeds, shots);
        println!("constant {:?}: mean {m:.4}, max over seeds {hi:.4}", o.ops());
        c_mean += m / constant.len() as f64;
        c_max = c_max.max(hi);
    }
    let (b_mean, b_min, _) = mean_abs(&DJOracle::balanced(), seeds, shots);
    println!("balanced: mean {b_mean:.4}, min over seeds {b_min:.4}");
    let tau = (c_mean * b_mean).sqrt();
    println!("threshold (geometric midpoint): {tau:.4}");
    println!("frozen constant: {DJ_THRESHOLD}");
    println!("margins: {:.1}x above constant max, {:.1}x below balanced min", tau / c_max, b_min / tau);
}
