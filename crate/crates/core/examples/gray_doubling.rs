//! Gray-coded images of a tangent measure pair on [0, 1]: interval masses and
//! the adjacent-interval ratio that stays bounded.

use multinomial_olsen::gray::{
    doubling_estimate, gray, gray_alt, CadicInterval, CodeKind, PushforwardMeasure,
};
use multinomial_olsen::measure::MeasureSpec;
use multinomial_olsen::space::{words_of_level, Alphabet, Word};
use multinomial_olsen::tangency::{build_measure_pair, BaseQuadruple};

fn show(w: &Word) -> String {
    w.digits().iter().map(|d| d.to_string()).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let al = Alphabet::new(3)?;
    println!("word  gray  alt");
    for w in words_of_level(2, al) {
        println!(
            "{:>4}  {:>4}  {:>3}",
            show(&w),
            show(&gray(&w, al)),
            show(&gray_alt(&w, al))
        );
    }

    let (a, b) = build_measure_pair(1e-3, 1e-3, &BaseQuadruple::preset("paper-110")?)?;
    let spec = MeasureSpec::with_factorial_schedule(a, b)?;

    let pf = PushforwardMeasure::new(spec.clone(), CodeKind::Standard)?;
    let iv = CadicInterval::new(pf.alphabet(), 3, 17)?;
    println!(
        "\nmass of [{}, {}] = {:.6e}",
        iv.lo(),
        iv.hi(),
        pf.mass(&iv)?
    );

    for code in [CodeKind::Standard, CodeKind::Identity] {
        let pf = PushforwardMeasure::new(spec.clone(), code)?;
        let report = doubling_estimate(&pf, 8);
        println!("\n{code:?} (bound {:.4})", report.odds_bound);
        for l in &report.levels {
            println!("  level {}: ratio {:.4}", l.level, l.ratio);
        }
    }
    Ok(())
}
