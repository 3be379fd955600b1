//! Reduced words in the free group `F_k` and eventually periodic points of
//! its boundary.
//!
//! Letters are small integers. Generator `i` is letter `2i`, its inverse is
//! letter `2i + 1`, so inversion is `l ^ 1` independently of the rank.
//! Words print with lowercase letters for generators and uppercase letters
//! for their inverses (`aB` is `a·b⁻¹`); the identity prints as `e`.

use std::fmt;

use crate::error::{Error, Result};

pub type Letter = u8;

/// Inverse of a letter.
#[inline]
pub fn inv(l: Letter) -> Letter {
    l ^ 1
}

/// The `2k` letters of `F_k` together with their pairing into inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    rank: usize,
}

impl Alphabet {
    pub fn new(rank: usize) -> Result<Self> {
        if !(2..=26).contains(&rank) {
            return Err(Error::InvalidRank(rank));
        }
        Ok(Self { rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of letters, `2k`.
    pub fn size(&self) -> usize {
        2 * self.rank
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.size() as Letter
    }

    /// Letters that may follow `last` in a reduced word.
    pub fn successors(&self, last: Option<Letter>) -> impl Iterator<Item = Letter> {
        let forbidden = last.map(inv);
        self.letters().filter(move |&l| Some(l) != forbidden)
    }

    /// Number of cylinders one level below a cylinder ending in `last`.
    pub fn branching(&self, last: Option<Letter>) -> usize {
        match last {
            None => self.size(),
            Some(_) => self.size() - 1,
        }
    }

    pub fn contains(&self, word: &ReducedWord) -> bool {
        word.letters().iter().all(|&l| (l as usize) < self.size())
    }

    pub fn letter_name(l: Letter) -> char {
        let base = l / 2;
        if l % 2 == 0 {
            (b'a' + base) as char
        } else {
            (b'A' + base) as char
        }
    }

    pub fn parse_letter(&self, c: char) -> Option<Letter> {
        let l = match c {
            'a'..='z' => 2 * (c as u8 - b'a'),
            'A'..='Z' => 2 * (c as u8 - b'A') + 1,
            _ => return None,
        };
        ((l as usize) < self.size()).then_some(l)
    }

    /// Parses a word, freely reducing it. `e` and the empty string denote the
    /// identity.
    pub fn parse_word(&self, s: &str) -> Result<ReducedWord> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(ReducedWord::identity());
        }
        let letters = s
            .chars()
            .map(|c| self.parse_letter(c).ok_or_else(|| Error::InvalidWord(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReducedWord::reduce(letters))
    }

    /// Parses `head(cycle)` or `(cycle)` into a boundary point.
    pub fn parse_point(&self, s: &str) -> Result<BoundaryPoint> {
        let s = s.trim();
        let bad = || Error::InvalidWord(s.to_string());
        let open = s.find('(').ok_or_else(bad)?;
        let close = s.rfind(')').ok_or_else(bad)?;
        if close != s.len() - 1 || close <= open + 1 {
            return Err(bad());
        }
        let head = self.parse_word(&s[..open])?;
        let cycle = self.parse_word(&s[open + 1..close])?;
        BoundaryPoint::new(head, cycle)
    }
}

/// A freely reduced word, i.e. a group element and simultaneously a vertex
/// of the Cayley tree. The identity is the base vertex `o`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    /// Checked constructor: fails if an adjacent pair cancels.
    pub fn from_letters(letters: Vec<Letter>) -> Result<Self> {
        if letters.windows(2).any(|p| p[1] == inv(p[0])) {
            return Err(Error::NotReduced(format!("{letters:?}")));
        }
        Ok(Self(letters))
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&inv(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn letter(l: Letter) -> Self {
        Self(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Length of the cancellation in the product `self · other`.
    pub fn cancellation(&self, other: &ReducedWord) -> usize {
        self.0
            .iter()
            .rev()
            .zip(other.0.iter())
            .take_while(|(&a, &b)| b == inv(a))
            .count()
    }

    pub fn multiply(&self, other: &ReducedWord) -> ReducedWord {
        let j = self.cancellation(other);
        let mut out = Vec::with_capacity(self.len() + other.len() - 2 * j);
        out.extend_from_slice(&self.0[..self.len() - j]);
        out.extend_from_slice(&other.0[j..]);
        ReducedWord(out)
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord(self.0.iter().rev().map(|&l| inv(l)).collect())
    }

    /// `self^n` for `n ≥ 0`.
    pub fn pow(&self, n: usize) -> ReducedWord {
        (0..n).fold(ReducedWord::identity(), |acc, _| acc.multiply(self))
    }

    pub fn prefix(&self, n: usize) -> ReducedWord {
        ReducedWord(self.0[..n.min(self.len())].to_vec())
    }

    pub fn suffix_from(&self, n: usize) -> ReducedWord {
        ReducedWord(self.0[n.min(self.len())..].to_vec())
    }

    pub fn starts_with(&self, prefix: &ReducedWord) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Appends a letter; returns `None` if the letter would cancel.
    pub fn extended(&self, l: Letter) -> Option<ReducedWord> {
        if self.last() == Some(inv(l)) {
            return None;
        }
        let mut v = self.0.clone();
        v.push(l);
        Some(ReducedWord(v))
    }

    /// The word with its last letter removed.
    pub fn parent(&self) -> Option<ReducedWord> {
        (!self.is_empty()).then(|| ReducedWord(self.0[..self.len() - 1].to_vec()))
    }

    pub fn common_prefix_len(&self, other: &ReducedWord) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &l in &self.0 {
            write!(f, "{}", Alphabet::letter_name(l))?;
        }
        Ok(())
    }
}

/// An eventually periodic boundary point `head · cycle · cycle · …`.
///
/// Values are always kept in canonical form: the head is as short as
/// possible and the cycle is primitive, so two values are equal exactly when
/// they denote the same point of `∂F_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryPoint {
    head: ReducedWord,
    cycle: ReducedWord,
}

impl BoundaryPoint {
    pub fn new(head: ReducedWord, cycle: ReducedWord) -> Result<Self> {
        let c = cycle.letters();
        if c.is_empty() {
            return Err(Error::NotReduced("empty cycle".into()));
        }
        if c.len() > 1 && c.windows(2).any(|p| p[1] == inv(p[0])) {
            return Err(Error::NotReduced(format!("cycle {cycle}")));
        }
        if c[0] == inv(c[c.len() - 1]) {
            return Err(Error::NotReduced(format!("cycle seam of {cycle}")));
        }
        if head.last() == Some(inv(c[0])) {
            return Err(Error::NotReduced(format!("seam between {head} and {cycle}")));
        }
        let mut p = Self { head, cycle };
        p.canonicalize();
        Ok(p)
    }

    /// The point `cycle^∞`.
    pub fn periodic(cycle: ReducedWord) -> Result<Self> {
        Self::new(ReducedWord::identity(), cycle)
    }

    fn canonicalize(&mut self) {
        // primitive period
        let c = self.cycle.0.clone();
        let n = c.len();
        if let Some(p) = (1..n).find(|&p| n % p == 0 && (0..n).all(|i| c[i] == c[i % p])) {
            self.cycle.0.truncate(p);
        }
        // shortest head: absorb matching tail letters of the head into the cycle
        while let (Some(h), Some(t)) = (self.head.last(), self.cycle.last()) {
            if h != t {
                break;
            }
            self.head.0.pop();
            self.cycle.0.rotate_right(1);
        }
    }

    pub fn head(&self) -> &ReducedWord {
        &self.head
    }

    pub fn cycle(&self) -> &ReducedWord {
        &self.cycle
    }

    /// Letter at position `n` (0-based) of the infinite word.
    #[inline]
    pub fn letter_at(&self, n: usize) -> Letter {
        let h = self.head.len();
        if n < h {
            self.head.0[n]
        } else {
            self.cycle.0[(n - h) % self.cycle.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> ReducedWord {
        ReducedWord((0..n).map(|i| self.letter_at(i)).collect())
    }

    pub fn starts_with(&self, w: &ReducedWord) -> bool {
        w.letters().iter().enumerate().all(|(i, &l)| self.letter_at(i) == l)
    }

    /// The point obtained by deleting the first `j` letters.
    pub fn shifted(&self, j: usize) -> BoundaryPoint {
        let h = self.head.len();
        if j <= h {
            let mut p = Self {
                head: self.head.suffix_from(j),
                cycle: self.cycle.clone(),
            };
            p.canonicalize();
            p
        } else {
            let mut cycle = self.cycle.0.clone();
            let n = cycle.len();
            cycle.rotate_left((j - h) % n);
            Self {
                head: ReducedWord::identity(),
                cycle: ReducedWord(cycle),
            }
        }
    }

    /// Image `g · x` under the left action of the group.
    pub fn act(&self, g: &ReducedWord) -> BoundaryPoint {
        let gl = g.letters();
        let j = gl
            .iter()
            .rev()
            .enumerate()
            .take_while(|&(i, &a)| self.letter_at(i) == inv(a))
            .count();
        let rest = self.shifted(j);
        let mut head = gl[..gl.len() - j].to_vec();
        head.extend_from_slice(rest.head.letters());
        let mut p = Self {
            head: ReducedWord(head),
            cycle: rest.cycle,
        };
        p.canonicalize();
        p
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.head.is_empty() {
            write!(f, "{}", self.head)?;
        }
        write!(f, "({})", self.cycle)
    }
}

/// A point of the compactification `F_k ⊔ ∂F_k`.
#[derive(Debug, Clone, Copy)]
pub enum Point<'a> {
    Vertex(&'a ReducedWord),
    Boundary(&'a BoundaryPoint),
}

impl<'a> From<&'a ReducedWord> for Point<'a> {
    fn from(w: &'a ReducedWord) -> Self {
        Point::Vertex(w)
    }
}

impl<'a> From<&'a BoundaryPoint> for Point<'a> {
    fn from(x: &'a BoundaryPoint) -> Self {
        Point::Boundary(x)
    }
}

impl Point<'_> {
    fn letter(&self, n: usize) -> Option<Letter> {
        match self {
            Point::Vertex(w) => w.letters().get(n).copied(),
            Point::Boundary(x) => Some(x.letter_at(n)),
        }
    }

    /// Number of letters after which two boundary points that still agree
    /// must coincide.
    fn agreement_bound(&self) -> usize {
        match self {
            Point::Vertex(w) => w.len(),
            Point::Boundary(x) => x.head.len() + x.cycle.len(),
        }
    }
}

/// Length of the longest common prefix, or `Infinite` for equal points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PrefixLen {
    Finite(usize),
    Infinite,
}

impl PrefixLen {
    /// The prefix metric `2^{-n}`.
    pub fn distance(self) -> f64 {
        match self {
            PrefixLen::Finite(n) => 0.5f64.powi(n as i32),
            PrefixLen::Infinite => 0.0,
        }
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            PrefixLen::Finite(n) => Some(n),
            PrefixLen::Infinite => None,
        }
    }
}

pub fn common_prefix_len<'a, 'b>(u: impl Into<Point<'a>>, v: impl Into<Point<'b>>) -> PrefixLen {
    let (u, v) = (u.into(), v.into());
    match (u, v) {
        (Point::Vertex(a), Point::Vertex(b)) if a == b => return PrefixLen::Infinite,
        (Point::Boundary(x), Point::Boundary(y)) if x == y => return PrefixLen::Infinite,
        _ => {}
    }
    // Distinct eventually periodic words differ before
    // max(head) + |cycle_1| + |cycle_2| letters.
    let bound = u.agreement_bound() + v.agreement_bound() + 1;
    let mut n = 0;
    while n <= bound {
        match (u.letter(n), v.letter(n)) {
            (Some(a), Some(b)) if a == b => n += 1,
            _ => return PrefixLen::Finite(n),
        }
    }
    unreachable!("distinct points agree beyond the periodicity bound")
}

/// Distance in the prefix ultrametric.
pub fn distance<'a, 'b>(u: impl Into<Point<'a>>, v: impl Into<Point<'b>>) -> f64 {
    common_prefix_len(u, v).distance()
}

/// Branch vertex of the geodesic between two distinct points: their longest
/// common prefix, which is the vertex of that geodesic closest to `o`.
pub fn confluence<'a, 'b>(x: impl Into<Point<'a>>, y: impl Into<Point<'b>>) -> Result<ReducedWord> {
    let (x, y) = (x.into(), y.into());
    match common_prefix_len(x, y) {
        PrefixLen::Infinite => Err(Error::EqualPoints),
        PrefixLen::Finite(n) => Ok(ReducedWord(
            (0..n).map(|i| x.letter(i).expect("within prefix")).collect(),
        )),
    }
}
