//! Draws words from the inhomogeneous measure and follows the running local
//! exponent, which keeps oscillating across epochs.

use multinomial_olsen::measure::{MeasureSpec, ProbabilityVector, WordSampler};
use multinomial_olsen::olsen::tau_n;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = MeasureSpec::with_factorial_schedule(
        ProbabilityVector::new(vec![0.1, 0.2, 0.3, 0.4])?,
        ProbabilityVector::uniform(4)?,
    )?;

    let mut sampler = WordSampler::new(&spec, 7);
    for trial in 0..3 {
        let x = sampler.sample(5039);
        let traj = spec.exponent_trajectory(&x)?;
        let at = |n: usize| traj[n - 1];
        println!(
            "sample {trial}: exponent at 119 {:.4}, 719 {:.4}, 5039 {:.4}",
            at(119),
            at(719),
            at(5039)
        );
    }

    for q in [-2.0, 0.5, 2.0] {
        let row: Vec<String> = [119u64, 719, 5039]
            .iter()
            .map(|&n| format!("{:.5}", tau_n(&spec, q, n)))
            .collect();
        println!("tau_n({q:>4}) at 119/719/5039: {}", row.join("  "));
    }
    Ok(())
}
