//! Brute-force discrete Grover on a plain state vector.
//!
//! Prints the success probability after the default iteration count and the
//! first peak, for the bin counts used in the acceptance tests. These are the
//! reference numbers the grid simulation is checked against.

fn trace(n: usize, iterations: usize) -> Vec<f64> {
    let target = n / 3;
    let mut a = vec![1.0 / (n as f64).sqrt(); n];
    let mut out = vec![a[target] * a[target]];
    for _ in 0..iterations {
        a[target] = -a[target];
        let mean = a.iter().sum::<f64>() / n as f64;
        a.iter_mut().for_each(|v| *v = 2.0 * mean - *v);
        out.push(a[target] * a[target]);
    }
    out
}

fn main() {
    println!("N,default_iterations,success_at_default,first_peak,success_at_peak");
    for n in [16usize, 64, 256] {
        let k = (std::f64::consts::FRAC_PI_4 * (n as f64).sqrt()).floor() as usize;
        let t = trace(n, 2 * k + 2);
        let peak = (1..t.len()).find(|&i| t[i + 1] < t[i]).unwrap();
        println!("{n},{k},{:.6},{peak},{:.6}", t[k], t[peak]);
    }
}
