//! Seeded random words and boundary points for the defect suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::word::{inv, Alphabet, BoundaryPoint, Letter, ReducedWord};

/// Uniform reduced word of the given length.
pub fn random_word(rng: &mut impl Rng, alphabet: &Alphabet, len: usize) -> ReducedWord {
    let n = alphabet.size() as Letter;
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = rng.gen_range(0..n);
        if letters.last() != Some(&inv(l)) {
            letters.push(l);
        }
    }
    ReducedWord::from_letters(letters).expect("reduced by construction")
}

/// An eventually periodic point with head length `< max_head` and cycle
/// length in `1..=max_cycle`.
pub fn random_point(rng: &mut impl Rng, alphabet: &Alphabet, max_head: usize, max_cycle: usize) -> BoundaryPoint {
    loop {
        let (h, c) = (rng.gen_range(0..max_head.max(1)), rng.gen_range(1..=max_cycle.max(1)));
        let head = random_word(rng, alphabet, h);
        let cycle = random_word(rng, alphabet, c);
        if let Ok(p) = BoundaryPoint::new(head, cycle) {
            return p;
        }
    }
}

/// `(g, x, y)` with `|g| < 8`, `x ≠ y`.
pub fn random_triples(alphabet: &Alphabet, n: usize, seed: u64) -> Vec<(ReducedWord, BoundaryPoint, BoundaryPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.gen_range(0..8);
        let g = random_word(&mut rng, alphabet, len);
        let x = random_point(&mut rng, alphabet, 6, 3);
        let y = random_point(&mut rng, alphabet, 6, 3);
        if x != y {
            out.push((g, x, y));
        }
    }
    out
}

/// `(g₁, g₂, x)` for cocycle-identity checks.
pub fn random_cocycle_triples(alphabet: &Alphabet, n: usize, seed: u64) -> Vec<(ReducedWord, ReducedWord, BoundaryPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (l1, l2) = (rng.gen_range(0..8), rng.gen_range(0..8));
            let g1 = random_word(&mut rng, alphabet, l1);
            let g2 = random_word(&mut rng, alphabet, l2);
            (g1, g2, random_point(&mut rng, alphabet, 6, 3))
        })
        .collect()
}
