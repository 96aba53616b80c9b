//! Words over a two-alphabet space, their enumeration and the epoch metric.

use multinomial_olsen::space::{
    enumerate_index, word_from_index, Alphabet, EpochSchedule, MixedSpaceSpec, Word,
};

fn digits(w: &Word) -> String {
    w.digits().iter().map(|d| d.to_string()).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = MixedSpaceSpec::new(
        Alphabet::new(2)?,
        Alphabet::new(3)?,
        EpochSchedule::Factorial,
    );

    let mask: String = space
        .schedule
        .first_alphabet_mask(30)
        .iter()
        .map(|&first| if first { '2' } else { '3' })
        .collect();
    println!("alphabet sizes at positions 1..30: {mask}");

    for n in [1u64, 6, 24, 120, 720, 5040] {
        println!(
            "N_{n:<5} = {:>5}   log scale {:.4}",
            space.count_n(n),
            space.log_scale(n)
        );
    }

    let x = Word::parse("0120101")?;
    let y = Word::parse("0120011")?;
    space.check_word(&x)?;
    space.check_word(&y)?;
    println!(
        "d({}, {}) = {:.6} (common prefix {})",
        digits(&x),
        digits(&y),
        space.distance(&x, &y),
        x.common_prefix_len(&y)
    );

    let al = Alphabet::new(3)?;
    let w = Word::parse("2101")?;
    let i = enumerate_index(&w, al)?;
    println!(
        "{} has index {i} among ternary words of length 4",
        digits(&w)
    );
    assert_eq!(word_from_index(i, 4, al)?, w);
    Ok(())
}
