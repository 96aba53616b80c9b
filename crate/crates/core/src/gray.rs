//! Generalized Gray codes, `c`-adic intervals, and the image of `μ` on
//! `[0, 1]`.
//!
//! Words of length `n` over `{0, …, c-1}` are enumerated by their base-`c`
//! value `ι(w)`, and `γ` sends the cylinder `[w]` to
//! `[ι(w) c^{-n}, (ι(w) + 1) c^{-n}]`. Pushing `μ` forward through `γ`
//! directly is not doubling; composing with a Gray code first is, because
//! index-adjacent words then differ in a single digit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::MeasureSpec;
use crate::space::{enumerate_index, level_count, word_from_index, Alphabet, SpaceError, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrayError {
    #[error("pushforward needs equal alphabets, got c1 = {c1}, c2 = {c2}")]
    UnequalBases { c1: u32, c2: u32 },

    #[error("interval base {interval} does not match the measure base {measure}")]
    BaseMismatch { interval: u32, measure: u32 },

    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// `g`: keeps the first digit, then writes successive differences mod `c`.
pub fn gray(w: &Word, alphabet: Alphabet) -> Word {
    let c = alphabet.size();
    let mut prev = 0u32;
    let digits = w
        .digits()
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let e = e as u32;
            let k = if i == 0 { e } else { (e + c - prev) % c };
            prev = e;
            k as u8
        })
        .collect();
    Word::from_digits(digits)
}

/// Inverse of [`gray`]: running sums mod `c`.
pub fn gray_inverse(w: &Word, alphabet: Alphabet) -> Word {
    let c = alphabet.size();
    let mut prev = 0u32;
    let digits = w
        .digits()
        .iter()
        .map(|&k| {
            prev = (k as u32 + prev) % c;
            prev as u8
        })
        .collect();
    Word::from_digits(digits)
}

/// Parity of `c·i + j` given the parity of `i`.
fn next_parity(parity: bool, c: u32, digit: u32) -> bool {
    ((c % 2 == 1) && parity) ^ (digit % 2 == 1)
}

/// `g̃`: a digit `j` appended to a prefix of odd index is reflected to
/// `c - 1 - j`.
pub fn gray_alt(w: &Word, alphabet: Alphabet) -> Word {
    let c = alphabet.size();
    let mut odd = false;
    let digits = w
        .digits()
        .iter()
        .map(|&j| {
            let j = j as u32;
            let k = if odd { c - 1 - j } else { j };
            odd = next_parity(odd, c, j);
            k as u8
        })
        .collect();
    Word::from_digits(digits)
}

/// Inverse of [`gray_alt`].
pub fn gray_alt_inverse(w: &Word, alphabet: Alphabet) -> Word {
    let c = alphabet.size();
    let mut odd = false;
    let digits = w
        .digits()
        .iter()
        .map(|&k| {
            let k = k as u32;
            let j = if odd { c - 1 - k } else { k };
            odd = next_parity(odd, c, j);
            j as u8
        })
        .collect();
    Word::from_digits(digits)
}

/// Which coding is applied before `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    #[default]
    Standard,
    Alternative,
    /// No coding; the plain base-`c` enumeration.
    Identity,
}

impl CodeKind {
    pub fn encode(self, w: &Word, alphabet: Alphabet) -> Word {
        match self {
            CodeKind::Standard => gray(w, alphabet),
            CodeKind::Alternative => gray_alt(w, alphabet),
            CodeKind::Identity => w.clone(),
        }
    }

    pub fn decode(self, w: &Word, alphabet: Alphabet) -> Word {
        match self {
            CodeKind::Standard => gray_inverse(w, alphabet),
            CodeKind::Alternative => gray_alt_inverse(w, alphabet),
            CodeKind::Identity => w.clone(),
        }
    }

    /// Coded digit for `digit` appended to a prefix whose last original
    /// digit is `prev` (ignored at the root) and whose index parity is `odd`.
    fn step(self, c: u32, root: bool, prev: u32, odd: bool, digit: u32) -> u32 {
        match self {
            CodeKind::Standard if root => digit,
            CodeKind::Standard => (digit + c - prev) % c,
            CodeKind::Alternative if odd => c - 1 - digit,
            CodeKind::Alternative | CodeKind::Identity => digit,
        }
    }
}

/// `[index · c^{-level}, (index + 1) · c^{-level}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CadicInterval {
    pub base: u32,
    pub level: usize,
    pub index: u64,
}

impl CadicInterval {
    pub fn new(alphabet: Alphabet, level: usize, index: u64) -> Result<Self, SpaceError> {
        let count = level_count(level, alphabet)?;
        if index >= count {
            return Err(SpaceError::IndexOutOfRange {
                index,
                level,
                size: alphabet.size(),
            });
        }
        Ok(Self {
            base: alphabet.size(),
            level,
            index,
        })
    }

    /// `c^level`, the common denominator of both endpoints.
    pub fn denominator(&self) -> u64 {
        (self.base as u64).pow(self.level as u32)
    }

    /// Exact endpoints as `(numerator, numerator + 1)` over [`Self::denominator`].
    pub fn numerators(&self) -> (u64, u64) {
        (self.index, self.index + 1)
    }

    pub fn lo(&self) -> f64 {
        self.index as f64 / self.denominator() as f64
    }

    pub fn hi(&self) -> f64 {
        (self.index + 1) as f64 / self.denominator() as f64
    }

    /// Same level and sharing an endpoint.
    pub fn abuts(&self, other: &Self) -> bool {
        self.base == other.base
            && self.level == other.level
            && self.index.abs_diff(other.index) == 1
    }

    /// The word `w` with `γ([w])` equal to this interval.
    pub fn word(&self) -> Word {
        let alphabet = Alphabet::new(self.base as usize).expect("valid base");
        word_from_index(self.index, self.level, alphabet).expect("index checked on construction")
    }
}

/// `γ([w])`.
pub fn gamma_interval(w: &Word, alphabet: Alphabet) -> Result<CadicInterval, SpaceError> {
    let index = enumerate_index(w, alphabet)?;
    CadicInterval::new(alphabet, w.len(), index)
}

/// `ν(I) = μ(code(w))` where `γ([w]) = I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardMeasure {
    source: MeasureSpec,
    code: CodeKind,
}

impl PushforwardMeasure {
    pub fn new(source: MeasureSpec, code: CodeKind) -> Result<Self, GrayError> {
        let sp = source.space();
        if !sp.is_homogeneous() {
            return Err(GrayError::UnequalBases {
                c1: sp.alphabet_1.size(),
                c2: sp.alphabet_2.size(),
            });
        }
        Ok(Self { source, code })
    }

    pub fn source(&self) -> &MeasureSpec {
        &self.source
    }

    pub fn code(&self) -> CodeKind {
        self.code
    }

    pub fn alphabet(&self) -> Alphabet {
        self.source.space().alphabet_1
    }

    pub fn log_mass(&self, interval: &CadicInterval) -> Result<f64, GrayError> {
        if interval.base != self.alphabet().size() {
            return Err(GrayError::BaseMismatch {
                interval: interval.base,
                measure: self.alphabet().size(),
            });
        }
        let w = interval.word();
        let coded = self.code.encode(&w, self.alphabet());
        Ok(self
            .source
            .log_cylinder_mass(&coded)
            .expect("coded word stays in the alphabet"))
    }

    pub fn mass(&self, interval: &CadicInterval) -> Result<f64, GrayError> {
        self.log_mass(interval).map(f64::exp)
    }

    /// `ln ν` of every level-`level` interval, in index order.
    pub fn level_log_masses(&self, level: usize) -> Result<Vec<f64>, GrayError> {
        let count = level_count(level, self.alphabet())?;
        let mut out = Vec::with_capacity(count as usize);
        self.walk(level, &mut |depth, lm| {
            if depth == level {
                out.push(lm);
            }
        });
        Ok(out)
    }

    /// Depth-first traversal in index order, calling `visit(depth, ln ν)`
    /// for every interval of depth `1..=max_level`.
    fn walk(&self, max_level: usize, visit: &mut impl FnMut(usize, f64)) {
        let c = self.alphabet().size();
        for first in 0..c {
            self.walk_from(first, max_level, visit);
        }
    }

    fn walk_from(&self, first: u32, max_level: usize, visit: &mut impl FnMut(usize, f64)) {
        if max_level == 0 {
            return;
        }
        let c = self.alphabet().size();
        let logp: Vec<Vec<f64>> = (1..=max_level as u64)
            .map(|j| {
                self.source
                    .probs_at(j)
                    .entries()
                    .iter()
                    .map(|p| p.ln())
                    .collect()
            })
            .collect();
        let k0 = self.code.step(c, true, 0, false, first);
        let lm0 = logp[0][k0 as usize];
        let odd0 = next_parity(false, c, first);
        self.recurse(&logp, c, 1, first, odd0, lm0, max_level, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        logp: &[Vec<f64>],
        c: u32,
        depth: usize,
        prev: u32,
        odd: bool,
        lm: f64,
        max_level: usize,
        visit: &mut impl FnMut(usize, f64),
    ) {
        visit(depth, lm);
        if depth == max_level {
            return;
        }
        for j in 0..c {
            let k = self.code.step(c, false, prev, odd, j);
            let child = lm + logp[depth][k as usize];
            self.recurse(
                logp,
                c,
                depth + 1,
                j,
                next_parity(odd, c, j),
                child,
                max_level,
                visit,
            );
        }
    }
}

/// `ν(I)` for an interval, through `pf`.
pub fn pushforward_mass(
    pf: &PushforwardMeasure,
    interval: &CadicInterval,
) -> Result<f64, GrayError> {
    pf.mass(interval)
}

/// Largest ratio between masses of adjacent same-level intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelRatio {
    pub level: usize,
    pub ratio: f64,
    /// Maximum of `ratio` over levels `1..=level`.
    pub running_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub levels: Vec<LevelRatio>,
    /// `max over the two vectors of max p_i / min p_i`.
    pub odds_bound: f64,
}

impl DoublingReport {
    pub fn supremum(&self) -> f64 {
        self.levels.last().map_or(1.0, |l| l.running_max)
    }
}

/// Per-subtree summary: for each level, first and last `ln ν` in index
/// order and the largest internal `|Δ ln ν|`.
#[derive(Clone)]
struct Strip {
    first: Vec<f64>,
    last: Vec<f64>,
    max_gap: Vec<f64>,
}

/// Exhaustive adjacent-interval ratio for every level up to `max_level`.
/// The top-level subtrees are swept in parallel.
pub fn doubling_estimate(pf: &PushforwardMeasure, max_level: usize) -> DoublingReport {
    let c = pf.alphabet().size();
    let strips: Vec<Strip> = (0..c)
        .into_par_iter()
        .map(|first| {
            let mut s = Strip {
                first: vec![f64::NAN; max_level + 1],
                last: vec![f64::NAN; max_level + 1],
                max_gap: vec![0.0; max_level + 1],
            };
            pf.walk_from(first, max_level, &mut |depth, lm| {
                if s.first[depth].is_nan() {
                    s.first[depth] = lm;
                } else {
                    let gap = (lm - s.last[depth]).abs();
                    if gap > s.max_gap[depth] {
                        s.max_gap[depth] = gap;
                    }
                }
                s.last[depth] = lm;
            });
            s
        })
        .collect();

    let mut levels = Vec::with_capacity(max_level);
    let mut running = 1.0f64;
    for depth in 1..=max_level {
        let mut gap = strips.iter().map(|s| s.max_gap[depth]).fold(0.0, f64::max);
        for pair in strips.windows(2) {
            gap = gap.max((pair[1].first[depth] - pair[0].last[depth]).abs());
        }
        let ratio = gap.exp();
        running = running.max(ratio);
        levels.push(LevelRatio {
            level: depth,
            ratio,
            running_max: running,
        });
    }

    let odds = |p: &crate::measure::ProbabilityVector| p.max() / p.min();
    let src = pf.source();
    DoublingReport {
        levels,
        odds_bound: odds(src.probs_a()).max(odds(src.probs_b())),
    }
}
