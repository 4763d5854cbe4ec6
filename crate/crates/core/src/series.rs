//! Adaptive truncation of eigenfunction series.
//!
//! A series `sum t_n` is cut at index `N` once the look-ahead terms are small
//! against the partial sum `S_N = t_0 + .. + t_N`. The look-ahead is two terms
//! wide so that a single accidental near-zero term does not stop the sum.

use crate::error::{Error, Result};

/// How the two look-ahead terms are compared with the partial sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoppingRule {
    /// `|t_{N+1}| <= eps |S_N|` and `|t_{N+1} + t_{N+2}| <= eps |S_N|`.
    #[default]
    TermAndPair,
    /// Only `|t_{N+1} + t_{N+2}| <= eps |S_N|`.
    PairOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub eps: f64,
    pub rule: StoppingRule,
    /// Smallest admissible last index `N`.
    pub min_index: usize,
    /// Hard cap on the number of terms before giving up.
    pub max_terms: usize,
}

pub const DEFAULT_MIN_INDEX: usize = 2;
pub const DEFAULT_MAX_TERMS: usize = 2000;

impl Truncation {
    pub fn new(eps: f64) -> Self {
        Truncation { eps, rule: StoppingRule::default(), min_index: DEFAULT_MIN_INDEX, max_terms: DEFAULT_MAX_TERMS }
    }

    pub fn with_rule(mut self, rule: StoppingRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn should_stop(&self, partial_sum: f64, next1: f64, next2: f64) -> bool {
        adaptive_truncation(partial_sum, next1, next2, self.eps, self.rule)
    }

    /// Sums `terms` until the rule fires and returns `(S_N, N)`. Terms past
    /// the end of the slice count as zero, so a finite coefficient vector
    /// always terminates.
    pub fn sum(&self, terms: &[f64], context: &'static str) -> Result<(f64, usize)> {
        let at = |i: usize| terms.get(i).copied().unwrap_or(0.0);
        self.sum_with(at, context)
    }

    /// As [`Truncation::sum`] with terms produced on demand.
    pub fn sum_with(&self, mut term: impl FnMut(usize) -> f64, context: &'static str) -> Result<(f64, usize)> {
        let mut acc = KahanSum::default();
        for i in 0..=self.min_index {
            acc.add(term(i));
        }
        let mut n = self.min_index;
        let mut next1 = term(n + 1);
        let mut next2 = term(n + 2);
        loop {
            if self.should_stop(acc.value(), next1, next2) {
                return Ok((acc.value(), n));
            }
            if n + 3 > self.max_terms {
                return Err(Error::Convergence { max_terms: self.max_terms, context });
            }
            acc.add(next1);
            n += 1;
            next1 = next2;
            next2 = term(n + 2);
        }
    }
}

/// Stop decision for one step of the adaptive rule.
pub fn adaptive_truncation(partial_sum: f64, next1: f64, next2: f64, eps: f64, rule: StoppingRule) -> bool {
    let bound = eps * partial_sum.abs();
    let pair_ok = (next1 + next2).abs() <= bound;
    match rule {
        StoppingRule::TermAndPair => next1.abs() <= bound && pair_ok,
        StoppingRule::PairOnly => pair_ok,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}
