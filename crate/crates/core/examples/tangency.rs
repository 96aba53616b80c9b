//! Solves for two distinct length-four vectors whose power sums touch at 0
//! and 1, then certifies the pair numerically.

use multinomial_olsen::tangency::{
    build_measure_pair, certify_tangency, solve_uv_traced, BaseQuadruple,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = BaseQuadruple::preset("paper-110")?;
    let (t, w) = (1e-3, 1e-3);

    let trace = solve_uv_traced(t, w, &base)?;
    println!("Newton residuals:");
    for r in &trace.residuals {
        println!("    {r:.3e}");
    }

    let (a, b) = build_measure_pair(t, w, &base)?;
    println!("first  {:?}", a.entries());
    println!("second {:?}", b.entries());

    let cert = certify_tangency(&a, &b)?;
    println!("residuals  {:?}", cert.residuals);
    println!("curvatures {:?}", cert.curvatures);
    println!(
        "sign on {} grid points: {}",
        cert.grid_points, cert.grid_sign
    );
    for z in &cert.zero_report.zeros {
        println!("zero at {:+.3e} of order {}", z.location, z.order);
    }
    Ok(())
}
