//! Lower and upper free-energy curves and the two multifractal spectra.

use multinomial_olsen::measure::ProbabilityVector;
use multinomial_olsen::numeric::linspace;
use multinomial_olsen::olsen::{spectrum, OlsenError, OlsenPair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pair = OlsenPair::from_probs(
        ProbabilityVector::new(vec![0.1, 0.2, 0.3, 0.4])?,
        ProbabilityVector::new(vec![0.15, 0.15, 0.3, 0.4])?,
    );

    println!("{:>5} {:>9} {:>9}", "q", "b(q)", "B(q)");
    for q in linspace(-3.0, 3.0, 7) {
        println!(
            "{q:>5.1} {:>9.5} {:>9.5}",
            pair.lower_value(q),
            pair.upper_value(q)
        );
    }

    let (lo, hi) = pair.spectrum_window();
    println!("\nalpha window ({lo:.4}, {hi:.4})");
    println!("{:>8} {:>9} {:>9}", "alpha", "dim", "Dim");
    for alpha in linspace(lo, hi, 9).into_iter().skip(1).take(7) {
        match spectrum(&pair, alpha) {
            Ok(p) => println!("{:>8.4} {:>9.5} {:>9.5}", p.alpha, p.dim, p.dim_packing),
            // the curves cross at q = 0 and q = 1, where the derivative jumps
            Err(OlsenError::OnCrossing { q }) => println!("{alpha:>8.4}   at the kink q = {q:.3}"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}
