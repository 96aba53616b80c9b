//! Symbolic and mixed symbolic spaces.
//!
//! Positions are 1-based, as in the usual notation `w = ε_1 ε_2 … ε_n`.
//! Position `j` draws its letter from the first alphabet when
//! `T_{2k-1} <= j < T_{2k}` for some `k`, and from the second alphabet when
//! `T_{2k} <= j < T_{2k+1}`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("alphabet size must be in 2..=256, got {0}")]
    AlphabetSize(usize),

    #[error("digit {digit} at position {position} is out of range for alphabet of size {size}")]
    DigitOutOfRange {
        position: usize,
        digit: u8,
        size: u32,
    },

    #[error("epoch schedule must start with T_1 = 1, got {0}")]
    ScheduleStart(u64),

    #[error("epoch schedule must be strictly increasing (T_{index} = {value} after {previous})")]
    ScheduleNotIncreasing {
        index: usize,
        value: u64,
        previous: u64,
    },

    #[error("epoch schedule is empty")]
    ScheduleEmpty,

    #[error("index of a level-{level} word over {size} letters overflows u64")]
    IndexOverflow { level: usize, size: u32 },

    #[error("index {index} is out of range for level {level} over {size} letters")]
    IndexOutOfRange { index: u64, level: usize, size: u32 },

    #[error("cannot parse word {0:?}")]
    Parse(String),
}

/// The alphabet `{0, 1, …, c-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self, SpaceError> {
        if !(2..=256).contains(&size) {
            return Err(SpaceError::AlphabetSize(size));
        }
        Ok(Self { size: size as u32 })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn ln_size(&self) -> f64 {
        f64::from(self.size).ln()
    }

    pub fn contains(&self, digit: u8) -> bool {
        u32::from(digit) < self.size
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = SpaceError;

    fn try_from(size: usize) -> Result<Self, Self::Error> {
        Alphabet::new(size)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.size as usize
    }
}

/// A finite word `ε_1 … ε_n`. The empty word is allowed.
///
/// A word does not carry its alphabet; operations that need one take it as
/// an argument and validate the digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    digits: Vec<u8>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_digits(digits: Vec<u8>) -> Self {
        Self { digits }
    }

    /// Builds a word and checks every digit against `alphabet`.
    pub fn over(alphabet: Alphabet, digits: Vec<u8>) -> Result<Self, SpaceError> {
        let w = Self { digits };
        w.check(alphabet)?;
        Ok(w)
    }

    /// Parses `"102"` (one decimal digit per letter) or `"1,0,12"`
    /// (comma-separated, for alphabets larger than 10).
    pub fn parse(s: &str) -> Result<Self, SpaceError> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let digits = if s.contains(',') {
            s.split(',')
                .map(|t| t.trim().parse::<u8>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| SpaceError::Parse(s.to_string()))?
        } else {
            s.chars()
                .map(|ch| ch.to_digit(10).map(|d| d as u8))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| SpaceError::Parse(s.to_string()))?
        };
        Ok(Self { digits })
    }

    pub fn check(&self, alphabet: Alphabet) -> Result<(), SpaceError> {
        for (i, &d) in self.digits.iter().enumerate() {
            if !alphabet.contains(d) {
                return Err(SpaceError::DigitOutOfRange {
                    position: i + 1,
                    digit: d,
                    size: alphabet.size,
                });
            }
        }
        Ok(())
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn push(&mut self, digit: u8) {
        self.digits.push(digit);
    }

    /// `w · j`
    pub fn child(&self, digit: u8) -> Word {
        let mut digits = Vec::with_capacity(self.digits.len() + 1);
        digits.extend_from_slice(&self.digits);
        digits.push(digit);
        Word { digits }
    }

    /// The first `n` letters.
    pub fn prefix(&self, n: usize) -> Word {
        Word {
            digits: self.digits[..n.min(self.digits.len())].to_vec(),
        }
    }

    /// `|w ∧ v|`, the length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.digits
            .iter()
            .zip(&other.digits)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// `self ≺ other` (non-strict).
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.digits.starts_with(&self.digits)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.digits.iter().any(|&d| d > 9);
        for (i, d) in self.digits.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// `ι(w) = Σ_{j=0}^{n-1} ε_{n-j} c^j`, the base-`c` value of `w`.
pub fn enumerate_index(w: &Word, alphabet: Alphabet) -> Result<u64, SpaceError> {
    w.check(alphabet)?;
    let c = u64::from(alphabet.size);
    w.digits.iter().try_fold(0u64, |acc, &d| {
        acc.checked_mul(c)
            .and_then(|v| v.checked_add(u64::from(d)))
            .ok_or(SpaceError::IndexOverflow {
                level: w.len(),
                size: alphabet.size,
            })
    })
}

/// Inverse of [`enumerate_index`] at a fixed level.
pub fn word_from_index(index: u64, level: usize, alphabet: Alphabet) -> Result<Word, SpaceError> {
    let c = u64::from(alphabet.size);
    let count = level_count(level, alphabet)?;
    if index >= count {
        return Err(SpaceError::IndexOutOfRange {
            index,
            level,
            size: alphabet.size,
        });
    }
    let mut digits = vec![0u8; level];
    let mut rest = index;
    for slot in digits.iter_mut().rev() {
        *slot = (rest % c) as u8;
        rest /= c;
    }
    Ok(Word { digits })
}

/// `c^level`, the number of level-`level` words.
pub fn level_count(level: usize, alphabet: Alphabet) -> Result<u64, SpaceError> {
    u64::from(alphabet.size)
        .checked_pow(level as u32)
        .filter(|_| level <= u32::MAX as usize)
        .ok_or(SpaceError::IndexOverflow {
            level,
            size: alphabet.size,
        })
}

/// All words of a given level in `ι` order.
pub fn words_of_level(level: usize, alphabet: Alphabet) -> impl Iterator<Item = Word> {
    let count = level_count(level, alphabet).expect("level too deep to enumerate");
    (0..count).map(move |i| word_from_index(i, level, alphabet).expect("index in range"))
}

/// The epoch sequence `(T_k)`: `T_1 = 1` and strictly increasing.
///
/// The asymptotic requirement `T_{k+1}/T_k → ∞` cannot be checked on a
/// finite list. The factorial schedule `T_k = k!` satisfies it.
/// An explicit list is extended by letting its last epoch run forever.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub enum EpochSchedule {
    #[default]
    Factorial,
    Explicit(Vec<u64>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ScheduleRepr {
    Factorial,
    Explicit { values: Vec<u64> },
}

impl TryFrom<ScheduleRepr> for EpochSchedule {
    type Error = SpaceError;

    fn try_from(r: ScheduleRepr) -> Result<Self, Self::Error> {
        match r {
            ScheduleRepr::Factorial => Ok(EpochSchedule::Factorial),
            ScheduleRepr::Explicit { values } => EpochSchedule::explicit(values),
        }
    }
}

impl From<EpochSchedule> for ScheduleRepr {
    fn from(s: EpochSchedule) -> Self {
        match s {
            EpochSchedule::Factorial => ScheduleRepr::Factorial,
            EpochSchedule::Explicit(values) => ScheduleRepr::Explicit { values },
        }
    }
}

impl EpochSchedule {
    pub fn factorial() -> Self {
        EpochSchedule::Factorial
    }

    pub fn explicit(values: Vec<u64>) -> Result<Self, SpaceError> {
        match values.first() {
            None => return Err(SpaceError::ScheduleEmpty),
            Some(&v) if v != 1 => return Err(SpaceError::ScheduleStart(v)),
            _ => {}
        }
        for (i, pair) in values.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(SpaceError::ScheduleNotIncreasing {
                    index: i + 2,
                    value: pair[1],
                    previous: pair[0],
                });
            }
        }
        Ok(EpochSchedule::Explicit(values))
    }

    /// `T_k` for `k >= 1`; `None` past the end of an explicit list or when
    /// `k!` overflows.
    pub fn value(&self, k: usize) -> Option<u64> {
        if k == 0 {
            return None;
        }
        match self {
            EpochSchedule::Factorial => (2..=k as u64).try_fold(1u64, |acc, i| acc.checked_mul(i)),
            EpochSchedule::Explicit(v) => v.get(k - 1).copied(),
        }
    }

    /// The epoch `k` with `T_k <= position < T_{k+1}`.
    pub fn epoch_of(&self, position: u64) -> usize {
        debug_assert!(position >= 1, "positions are 1-based");
        let mut k = 1;
        while let Some(next) = self.value(k + 1) {
            if next > position {
                break;
            }
            k += 1;
        }
        k
    }

    /// Whether `position` falls in an odd epoch (first alphabet).
    pub fn is_first_alphabet(&self, position: u64) -> bool {
        self.epoch_of(position) % 2 == 1
    }

    /// `N_n = #{ j <= n : position j uses the first alphabet }`.
    pub fn count_first(&self, n: u64) -> u64 {
        let mut total = 0;
        let mut k = 1;
        while let Some(start) = self.value(k) {
            if start > n {
                break;
            }
            let end = self.value(k + 1).map_or(n, |t| (t - 1).min(n));
            if k % 2 == 1 {
                total += end - start + 1;
            }
            k += 1;
        }
        total
    }

    /// Per-position flags for positions `1..=depth`.
    pub fn first_alphabet_mask(&self, depth: usize) -> Vec<bool> {
        let mut mask = Vec::with_capacity(depth);
        let mut k = 1;
        let mut next = self.value(2);
        for j in 1..=depth as u64 {
            while let Some(t) = next {
                if t > j {
                    break;
                }
                k += 1;
                next = self.value(k + 1);
            }
            mask.push(k % 2 == 1);
        }
        mask
    }
}

/// A mixed symbolic space `{A_1, A_2, (T_k)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedSpaceSpec {
    pub alphabet_1: Alphabet,
    pub alphabet_2: Alphabet,
    #[serde(default)]
    pub schedule: EpochSchedule,
}

impl MixedSpaceSpec {
    pub fn new(alphabet_1: Alphabet, alphabet_2: Alphabet, schedule: EpochSchedule) -> Self {
        Self {
            alphabet_1,
            alphabet_2,
            schedule,
        }
    }

    /// The ordinary symbolic space over `c` letters (both alphabets equal).
    pub fn uniform(c: usize) -> Result<Self, SpaceError> {
        let a = Alphabet::new(c)?;
        Ok(Self::new(a, a, EpochSchedule::Factorial))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.alphabet_1 == self.alphabet_2
    }

    pub fn alphabet_at(&self, position: u64) -> Alphabet {
        if self.schedule.is_first_alphabet(position) {
            self.alphabet_1
        } else {
            self.alphabet_2
        }
    }

    pub fn count_n(&self, n: u64) -> u64 {
        self.schedule.count_first(n)
    }

    pub fn check_word(&self, w: &Word) -> Result<(), SpaceError> {
        let mask = self.schedule.first_alphabet_mask(w.len());
        for (i, (&d, first)) in w.digits().iter().zip(mask).enumerate() {
            let alphabet = if first {
                self.alphabet_1
            } else {
                self.alphabet_2
            };
            if !alphabet.contains(d) {
                return Err(SpaceError::DigitOutOfRange {
                    position: i + 1,
                    digit: d,
                    size: alphabet.size(),
                });
            }
        }
        Ok(())
    }

    /// `N_n ln c_1 + (n - N_n) ln c_2`, i.e. `-ln` of the diameter of a
    /// level-`n` cylinder.
    pub fn log_scale(&self, n: u64) -> f64 {
        let first = self.count_n(n);
        first as f64 * self.alphabet_1.ln_size() + (n - first) as f64 * self.alphabet_2.ln_size()
    }

    /// `-ln d(w, v)`; `+∞` when one word is a prefix of the other.
    pub fn neg_log_distance(&self, w: &Word, v: &Word) -> f64 {
        if w.is_prefix_of(v) || v.is_prefix_of(w) {
            return f64::INFINITY;
        }
        self.log_scale(w.common_prefix_len(v) as u64)
    }

    /// `d(w, v) = c_1^{-N_n} c_2^{-(n - N_n)}` with `n = |w ∧ v|`.
    ///
    /// Finite words stand in for infinite ones, so a word and any of its
    /// extensions are at distance 0. For depths beyond a few hundred the
    /// value underflows; use [`Self::neg_log_distance`] there.
    pub fn distance(&self, w: &Word, v: &Word) -> f64 {
        (-self.neg_log_distance(w, v)).exp()
    }
}

/// `|w ∧ v|`-based distance on the ordinary space over `alphabet`.
pub fn distance(w: &Word, v: &Word, alphabet: Alphabet) -> f64 {
    if w.is_prefix_of(v) || v.is_prefix_of(w) {
        return 0.0;
    }
    f64::from(alphabet.size()).powi(-(w.common_prefix_len(v) as i32))
}
