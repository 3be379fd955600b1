//! Enumeration of magnitude balls `{γ : ‖γ‖ ≤ R}`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::potential::Magnitude;
use crate::word::{Alphabet, Letter, ReducedWord};

/// Slack applied to `‖γ‖ ≤ R`, absorbing rounding in weight sums.
pub const RADIUS_SLACK: f64 = 1e-9;

#[inline]
pub(crate) fn within(norm: f64, radius: f64) -> bool {
    norm <= radius + RADIUS_SLACK * radius.abs().max(1.0)
}

fn check(magnitude: &Magnitude) -> Result<()> {
    for (l, &w) in magnitude.potential().weights().iter().enumerate() {
        if w <= 0.0 {
            return Err(Error::NonPositiveWeight {
                letter: Alphabet::letter_name(l as Letter).to_string(),
                weight: w,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Entry {
    norm: f64,
    word: ReducedWord,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .norm
            .total_cmp(&self.norm)
            .then_with(|| other.word.cmp(&self.word))
    }
}

/// Ball elements in nondecreasing magnitude order (ties broken
/// lexicographically), each exactly once.
pub struct BallIter {
    heap: BinaryHeap<Entry>,
    radius: f64,
    magnitude: Magnitude,
}

impl Iterator for BallIter {
    type Item = (ReducedWord, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let Entry { norm, word } = self.heap.pop()?;
        let alphabet = *self.magnitude.alphabet();
        let weights = self.magnitude.potential().weights();
        for l in alphabet.successors(word.last()) {
            let n = norm + weights[l as usize];
            if within(n, self.radius) {
                self.heap.push(Entry {
                    norm: n,
                    word: word.extended(l).expect("successor"),
                });
            }
        }
        Some((word, norm))
    }
}

/// Streams `{γ : ‖γ‖ ≤ radius}` sorted by magnitude.
pub fn ball(radius: f64, magnitude: &Magnitude) -> Result<BallIter> {
    check(magnitude)?;
    let mut heap = BinaryHeap::new();
    if within(0.0, radius) {
        heap.push(Entry {
            norm: 0.0,
            word: ReducedWord::identity(),
        });
    }
    Ok(BallIter {
        heap,
        radius,
        magnitude: magnitude.clone(),
    })
}

/// Depth-first traversal of the ball, calling `visit(letters, norm)` for
/// every element. Memory is proportional to the longest word.
pub fn for_each_in_ball(radius: f64, magnitude: &Magnitude, mut visit: impl FnMut(&[Letter], f64)) -> Result<()> {
    check(magnitude)?;
    if !within(0.0, radius) {
        return Ok(());
    }
    visit(&[], 0.0);
    for first in magnitude.alphabet().letters() {
        for_each_in_partition(radius, magnitude, first, &mut visit);
    }
    Ok(())
}

/// Depth-first traversal of the ball elements starting with `first`.
/// The `2k` partitions together with the identity cover the ball, which is
/// how callers split enumeration across threads.
pub fn for_each_in_partition(radius: f64, magnitude: &Magnitude, first: Letter, visit: &mut impl FnMut(&[Letter], f64)) {
    let weights = magnitude.potential().weights();
    let alphabet = *magnitude.alphabet();
    let n0 = weights[first as usize];
    if !within(n0, radius) {
        return;
    }
    let mut stack: Vec<Letter> = vec![first];
    let mut norms: Vec<f64> = vec![n0];
    visit(&stack, n0);
    descend(&alphabet, weights, radius, &mut stack, &mut norms, visit);
}

fn descend(
    alphabet: &Alphabet,
    weights: &[f64],
    radius: f64,
    stack: &mut Vec<Letter>,
    norms: &mut Vec<f64>,
    visit: &mut impl FnMut(&[Letter], f64),
) {
    let last = *stack.last().expect("nonempty");
    let base = *norms.last().expect("nonempty");
    for l in alphabet.successors(Some(last)) {
        let n = base + weights[l as usize];
        if !within(n, radius) {
            continue;
        }
        stack.push(l);
        norms.push(n);
        visit(stack, n);
        descend(alphabet, weights, radius, stack, norms, visit);
        stack.pop();
        norms.pop();
    }
}

/// Number of ball elements.
pub fn ball_size(radius: f64, magnitude: &Magnitude) -> Result<usize> {
    let mut n = 0usize;
    for_each_in_ball(radius, magnitude, |_, _| n += 1)?;
    Ok(n)
}
