//! Counts real zeros of exponential sums with their multiplicities.

use multinomial_olsen::dirichlet::{count_all_zeros, DirichletPolynomial, JamesonBound};

fn show(label: &str, f: &DirichletPolynomial) -> Result<(), Box<dyn std::error::Error>> {
    let report = count_all_zeros(f)?;
    let bound = match f.jameson_bound() {
        JamesonBound::AtMost(k) => format!("at most {k}"),
        JamesonBound::Inapplicable => "no bound".into(),
    };
    println!("{label}: total order {} ({bound})", report.total_order);
    for z in &report.zeros {
        println!("    x = {:+.10}  order {}", z.location, z.order);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // (x - 1)(x - 2) in the variable 2^-x, written out
    let f = DirichletPolynomial::new([(1.0, -2.0 * 2f64.ln()), (-3.0, -(2f64.ln())), (2.0, 0.0)]);
    show("two simple zeros", &f)?;

    let g = f.mul(&f);
    show("its square", &g)?;

    // sum p^x - sum q^x vanishes at 0 and 1 for any two probability vectors
    let h = DirichletPolynomial::power_sum_difference(&[0.2, 0.3, 0.5], &[0.1, 0.4, 0.5]);
    show("power sums of two triples", &h)?;
    Ok(())
}
