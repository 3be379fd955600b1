//! Cylinder sets: the finite unions of cylinders `C_w = {x : x starts with w}`
//! on which every boundary computation in this crate is carried out exactly.

use std::collections::BTreeMap;
use std::fmt;

use crate::word::{Alphabet, BoundaryPoint, ReducedWord};

/// `C_w`; the empty stem denotes all of `M = ∂F_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder {
    stem: ReducedWord,
}

impl Cylinder {
    pub fn new(stem: ReducedWord) -> Self {
        Self { stem }
    }

    pub fn whole() -> Self {
        Self::new(ReducedWord::identity())
    }

    pub fn stem(&self) -> &ReducedWord {
        &self.stem
    }

    pub fn depth(&self) -> usize {
        self.stem.len()
    }

    pub fn contains_point(&self, x: &BoundaryPoint) -> bool {
        x.starts_with(&self.stem)
    }

    /// `self ⊇ other`.
    pub fn contains(&self, other: &Cylinder) -> bool {
        other.stem.starts_with(&self.stem)
    }

    pub fn intersects(&self, other: &Cylinder) -> bool {
        self.contains(other) || other.contains(self)
    }

    pub fn children(&self, alphabet: &Alphabet) -> Vec<Cylinder> {
        children(alphabet, &self.stem).into_iter().map(Cylinder::new).collect()
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C[{}]", self.stem)
    }
}

fn children(alphabet: &Alphabet, stem: &ReducedWord) -> Vec<ReducedWord> {
    alphabet
        .successors(stem.last())
        .map(|l| stem.extended(l).expect("successor letters never cancel"))
        .collect()
}

/// All reduced words of length exactly `depth`, in lexicographic order.
pub fn words_of_length(alphabet: &Alphabet, depth: usize) -> Vec<ReducedWord> {
    let mut level = vec![ReducedWord::identity()];
    for _ in 0..depth {
        level = level.iter().flat_map(|w| children(alphabet, w)).collect();
    }
    level
}

/// A finite union of cylinders in canonical form: an antichain (no stem is a
/// prefix of another), with every complete sibling family merged into its
/// parent, sorted lexicographically. Equal sets have equal representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CylinderSet {
    alphabet: Alphabet,
    stems: Vec<ReducedWord>,
}

impl CylinderSet {
    pub fn empty(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            stems: Vec::new(),
        }
    }

    pub fn whole(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            stems: vec![ReducedWord::identity()],
        }
    }

    pub fn single(alphabet: Alphabet, stem: ReducedWord) -> Self {
        Self::from_stems(alphabet, vec![stem])
    }

    pub fn from_stems(alphabet: Alphabet, stems: Vec<ReducedWord>) -> Self {
        Self {
            alphabet,
            stems: canonical_stems(&alphabet, stems),
        }
    }

    pub fn from_cylinders(alphabet: Alphabet, cylinders: impl IntoIterator<Item = Cylinder>) -> Self {
        Self::from_stems(alphabet, cylinders.into_iter().map(|c| c.stem).collect())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn stems(&self) -> &[ReducedWord] {
        &self.stems
    }

    pub fn cylinders(&self) -> impl Iterator<Item = Cylinder> + '_ {
        self.stems.iter().cloned().map(Cylinder::new)
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }

    pub fn is_whole(&self) -> bool {
        self.stems.len() == 1 && self.stems[0].is_empty()
    }

    /// Re-runs canonicalization; a no-op on values built through this API.
    pub fn canonical(&self) -> Self {
        Self::from_stems(self.alphabet, self.stems.clone())
    }

    pub fn contains_point(&self, x: &BoundaryPoint) -> bool {
        self.stems.iter().any(|s| x.starts_with(s))
    }

    /// Whether some stem of the set is a prefix of `w` (so `C_w ⊆ self`).
    pub fn covers_stem(&self, w: &ReducedWord) -> bool {
        (0..=w.len()).any(|n| self.stems.binary_search(&w.prefix(n)).is_ok())
    }

    /// Whether `C_w` meets the set.
    pub fn meets_stem(&self, w: &ReducedWord) -> bool {
        if self.covers_stem(w) {
            return true;
        }
        // stems below w form a contiguous lexicographic range starting at w
        let i = self.stems.partition_point(|s| s < w);
        self.stems.get(i).is_some_and(|s| s.starts_with(w))
    }

    pub fn union(&self, other: &CylinderSet) -> CylinderSet {
        let mut stems = self.stems.clone();
        stems.extend_from_slice(&other.stems);
        Self::from_stems(self.alphabet, stems)
    }

    pub fn union_all<'a>(alphabet: Alphabet, sets: impl IntoIterator<Item = &'a CylinderSet>) -> CylinderSet {
        let stems = sets.into_iter().flat_map(|s| s.stems.iter().cloned()).collect();
        Self::from_stems(alphabet, stems)
    }

    pub fn intersection(&self, other: &CylinderSet) -> CylinderSet {
        let mut out = Vec::new();
        for a in &self.stems {
            if other.covers_stem(a) {
                out.push(a.clone());
                continue;
            }
            let i = other.stems.partition_point(|s| s < a);
            out.extend(other.stems[i..].iter().take_while(|s| s.starts_with(a)).cloned());
        }
        Self::from_stems(self.alphabet, out)
    }

    pub fn is_subset(&self, other: &CylinderSet) -> bool {
        self.stems.iter().all(|s| other.covers_stem(s))
    }

    pub fn is_disjoint(&self, other: &CylinderSet) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        !small.stems.iter().any(|s| large.meets_stem(s))
    }

    /// Exact complement in `M`, by sibling expansion along every stem.
    pub fn complement(&self) -> CylinderSet {
        let mut out = Vec::new();
        complement_within(&self.alphabet, &ReducedWord::identity(), &self.stems, &mut out);
        Self::from_stems(self.alphabet, out)
    }

    pub fn difference(&self, other: &CylinderSet) -> CylinderSet {
        self.intersection(&other.complement())
    }

    /// Exact image `g · self` under the left action on `M`.
    pub fn act(&self, g: &ReducedWord) -> CylinderSet {
        let mut out = Vec::new();
        for s in &self.stems {
            act_on_stem(&self.alphabet, g, s, &mut out);
        }
        Self::from_stems(self.alphabet, out)
    }

    /// Expresses the set as depth-`d` stems (stems deeper than `d` are kept
    /// as they are).
    pub fn refine_to_depth(&self, d: usize) -> Vec<ReducedWord> {
        let mut out = Vec::new();
        for s in &self.stems {
            let mut level = vec![s.clone()];
            while level[0].len() < d {
                level = level.iter().flat_map(|w| children(&self.alphabet, w)).collect();
            }
            out.extend(level);
        }
        out.sort();
        out
    }

    /// Diameter in the prefix metric: `2^{-L}` where `L` is the length of the
    /// common prefix of all points of the set; 0 for the empty set.
    pub fn diameter(&self) -> f64 {
        match self.stems.as_slice() {
            [] => 0.0,
            [only] => 0.5f64.powi(only.len() as i32),
            [first, .., last] => 0.5f64.powi(first.common_prefix_len(last) as i32),
        }
    }

    /// Sum of `f(stem)` over the stems, for additive set functions.
    pub fn measure_with(&self, f: impl Fn(&ReducedWord) -> f64) -> f64 {
        self.stems.iter().map(f).sum()
    }
}

impl fmt::Display for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.stems.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

fn canonical_stems(alphabet: &Alphabet, mut stems: Vec<ReducedWord>) -> Vec<ReducedWord> {
    stems.sort();
    stems.dedup();
    // antichain: in lexicographic order a stem's descendants directly follow it
    let mut antichain: Vec<ReducedWord> = Vec::with_capacity(stems.len());
    for s in stems {
        if let Some(last) = antichain.last() {
            if s.starts_with(last) {
                continue;
            }
        }
        antichain.push(s);
    }
    if antichain.first().is_some_and(|s| s.is_empty()) {
        return antichain;
    }
    // merge complete sibling families, deepest level first
    let mut by_depth: BTreeMap<usize, Vec<ReducedWord>> = BTreeMap::new();
    for s in antichain {
        by_depth.entry(s.len()).or_default().push(s);
    }
    let mut out = Vec::new();
    while let Some((depth, mut level)) = by_depth.pop_last() {
        if depth == 0 {
            out.extend(level);
            continue;
        }
        level.sort();
        let mut i = 0;
        while i < level.len() {
            let parent = level[i].prefix(depth - 1);
            let mut j = i + 1;
            while j < level.len() && level[j].starts_with(&parent) {
                j += 1;
            }
            if j - i == alphabet.branching(parent.last()) {
                by_depth.entry(depth - 1).or_default().push(parent);
            } else {
                out.extend_from_slice(&level[i..j]);
            }
            i = j;
        }
    }
    out.sort();
    out
}

/// Stems `stems` are sorted and all lie below `prefix`.
fn complement_within(alphabet: &Alphabet, prefix: &ReducedWord, stems: &[ReducedWord], out: &mut Vec<ReducedWord>) {
    if stems.is_empty() {
        out.push(prefix.clone());
        return;
    }
    if stems[0] == *prefix {
        return;
    }
    for child in children(alphabet, prefix) {
        let lo = stems.partition_point(|s| s < &child);
        let hi = lo + stems[lo..].iter().take_while(|s| s.starts_with(&child)).count();
        complement_within(alphabet, &child, &stems[lo..hi], out);
    }
}

fn act_on_stem(alphabet: &Alphabet, g: &ReducedWord, w: &ReducedWord, out: &mut Vec<ReducedWord>) {
    let j = g.cancellation(w);
    if j < w.len() {
        out.push(g.multiply(w));
    } else {
        // the whole stem cancels: refine until cancellation stops inside it
        for child in children(alphabet, w) {
            act_on_stem(alphabet, g, &child, out);
        }
    }
}
