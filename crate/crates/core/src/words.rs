//! Outcome words and their type classes (histograms).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Upper bound on the number of type classes any single enumeration visits.
pub const CLASS_CAP: u128 = 5_000_000;

/// A sequence of 0-based outcome indices together with its histogram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutcomeWord {
    indices: Vec<usize>,
    counts: Vec<usize>,
}

impl OutcomeWord {
    /// `outcomes` is the size of the projection system the word refers to.
    pub fn new(indices: Vec<usize>, outcomes: usize) -> Result<Self> {
        let mut counts = vec![0; outcomes];
        for &i in &indices {
            if i >= outcomes {
                return Err(Error::InvalidOutcome { index: i, outcomes });
            }
            counts[i] += 1;
        }
        Ok(OutcomeWord { indices, counts })
    }

    pub fn empty(outcomes: usize) -> Self {
        OutcomeWord {
            indices: Vec::new(),
            counts: vec![0; outcomes],
        }
    }

    /// Parses `"0,1,1"`; whitespace is ignored and the empty string is the
    /// empty word.
    pub fn parse(s: &str, outcomes: usize) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(OutcomeWord::empty(outcomes));
        }
        let indices = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parameter(format!("bad outcome index {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        OutcomeWord::new(indices, outcomes)
    }

    /// Binary word with `k` zeros followed by `n - k` ones.
    pub fn binary(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::Parameter(format!("k = {k} exceeds n = {n}")));
        }
        let mut idx = vec![0; k];
        idx.resize(n, 1);
        OutcomeWord::new(idx, 2)
    }

    /// Representative word of a histogram, in sorted order.
    pub fn from_counts(counts: &[usize]) -> Self {
        let indices = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
            .collect();
        OutcomeWord {
            indices,
            counts: counts.to_vec(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn outcomes(&self) -> usize {
        self.counts.len()
    }

    /// The word with one more letter appended.
    pub fn extended(&self, next: usize) -> Result<Self> {
        let mut idx = self.indices.clone();
        idx.push(next);
        OutcomeWord::new(idx, self.outcomes())
    }
}

impl std::fmt::Display for OutcomeWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

fn binom_u128(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of histograms of length-`n` words over `m` outcomes,
/// `C(n+m-1, m-1)`; `None` on overflow.
pub fn class_count(n: usize, m: usize) -> Option<u128> {
    if m == 0 {
        return Some(u128::from(n == 0));
    }
    binom_u128((n + m - 1) as u128, (m - 1) as u128)
}

pub(crate) fn check_class_count(n: usize, m: usize) -> Result<()> {
    match class_count(n, m) {
        Some(c) if c <= CLASS_CAP => Ok(()),
        Some(c) => Err(Error::TooManyClasses { count: c, cap: CLASS_CAP }),
        None => Err(Error::TooManyClasses {
            count: u128::MAX,
            cap: CLASS_CAP,
        }),
    }
}

/// All histograms of length-`n` words over `m` outcomes, in reverse
/// lexicographic order starting from `(n, 0, …, 0)`.
pub fn compositions(n: usize, m: usize) -> Compositions {
    let first = if m == 0 {
        None
    } else {
        let mut v = vec![0; m];
        v[0] = n;
        Some(v)
    };
    Compositions { next: first }
}

pub struct Compositions {
    next: Option<Vec<usize>>,
}

impl Iterator for Compositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let m = cur.len();
        // Move one unit from the rightmost nonzero entry before the last
        // position to its right neighbour, collecting the tail there.
        let mut succ = cur.clone();
        let tail = succ[m - 1];
        succ[m - 1] = 0;
        if let Some(j) = (0..m - 1).rev().find(|&j| succ[j] > 0) {
            succ[j] -= 1;
            succ[j + 1] = tail + 1;
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// `ln(n! / Π c_i!)`.
pub fn ln_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    ln_factorial(n) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

pub fn ln_factorial(n: usize) -> f64 {
    statrs::function::factorial::ln_factorial(n as u64)
}

/// Numerically stable `ln Σ exp(x_i)`; `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
