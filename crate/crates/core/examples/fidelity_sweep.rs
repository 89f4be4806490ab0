//! Sweep random small-error channels and measure how far the entanglement
//! fidelity sits from `1 - (epsilon_J + theta_J^2)`, relative to the cube of
//! the generator's Frobenius norm.
//!
//! cargo run --release --example fidelity_sweep

use errgen::channels::random_small;
use errgen::generators::{extract_error_generator, Convention};
use errgen::metrics::{entanglement_fidelity, j_amplitude, j_probability};
use errgen::superop::ProcessMatrix;

fn main() -> errgen::Result<()> {
    println!("qubits,scale,seeds,max_ratio,max_abs_gap");
    let mut overall: f64 = 0.0;
    for n in [1usize, 2] {
        let id = ProcessMatrix::identity(n)?;
        for scale in [1e-3, 3e-3, 1e-2, 3e-2, 1e-1] {
            let seeds = if n == 1 { 400 } else { 100 };
            let (mut worst, mut gap_max) = (0.0f64, 0.0f64);
            for seed in 0..seeds {
                let g = random_small(seed, scale, n)?.process;
                let l = extract_error_generator(&g, &id, Convention::Logarithm)?;
                let eps = j_probability(&l)?;
                let theta = j_amplitude(&l)?;
                let f = entanglement_fidelity(&g, &id)?.value;
                let gap = (f - (1.0 - eps - theta * theta)).abs();
                let norm = l.matrix().norm();
                worst = worst.max(gap / norm.powi(3));
                gap_max = gap_max.max(gap);
            }
            overall = overall.max(worst);
            println!("{n},{scale},{seeds},{worst:.4e},{gap_max:.4e}");
        }
    }
    println!("overall max ratio {overall:.4e}");
    Ok(())
}
