//! Weighted potentials on the Cayley tree and the cocycles they induce.
//!
//! A potential assigns a positive weight `w(s)` to every letter and sets
//! `ψ(p, q)` to the weighted length of `p⁻¹q`. It is left-invariant and
//! exactly additive along tree geodesics, so the induced cocycle
//!
//! ```text
//! σ_ψ(g, x) = lim_{p→x} ψ(g⁻¹o, p) − ψ(o, p)
//! ```
//!
//! has the closed form `‖g‖ − ψ(c, o) − ψ(o, c)` with `c` the longest common
//! prefix of `g⁻¹` and `x`. The dual cocycle `σ̄_ψ` is the primal cocycle of
//! the reversed weights `w̄(s) = w(s⁻¹)`.

use crate::cylinder::{words_of_length, Cylinder};
use crate::error::{Error, Result};
use crate::word::{inv, Alphabet, BoundaryPoint, Letter, ReducedWord};

/// Comparison tolerance for quantities that are exact in this model.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPotential {
    alphabet: Alphabet,
    weights: Vec<f64>,
}

impl WeightedPotential {
    pub fn new(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != alphabet.size() {
            return Err(Error::WrongLength {
                expected: alphabet.size(),
                got: weights.len(),
            });
        }
        for (l, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight {
                    letter: Alphabet::letter_name(l as Letter).to_string(),
                    weight: w,
                });
            }
        }
        Ok(Self { alphabet, weights })
    }

    /// Word-length potential.
    pub fn unit(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            weights: vec![1.0; alphabet.size()],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, l: Letter) -> f64 {
        self.weights[l as usize]
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_weight(&self) -> f64 {
        self.weights.iter().sum::<f64>() / self.weights.len() as f64
    }

    /// Weighted length of a letter sequence.
    pub fn word_weight(&self, letters: &[Letter]) -> f64 {
        letters.iter().map(|&l| self.weights[l as usize]).sum()
    }

    /// `ψ(p, q)`.
    pub fn eval(&self, p: &ReducedWord, q: &ReducedWord) -> f64 {
        self.word_weight(p.inverse().multiply(q).letters())
    }

    /// `ψ̄(p, q) = ψ(q, p)`, realized by `w̄(s) = w(s⁻¹)`.
    pub fn dual(&self) -> Self {
        Self {
            alphabet: self.alphabet,
            weights: self.alphabet.letters().map(|l| self.weights[inv(l) as usize]).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.alphabet
            .letters()
            .all(|l| self.weights[l as usize] == self.weights[inv(l) as usize])
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.alphabet, self.weights.iter().map(|w| w * factor).collect())
    }

    /// `t·self + (1 − t)·other`.
    pub fn convex_combination(&self, other: &Self, t: f64) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(Error::InvalidParameter("potentials over different alphabets".into()));
        }
        Self::new(
            self.alphabet,
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect(),
        )
    }

    /// Restriction to the free factor on the first `rank` generators.
    pub fn restrict(&self, rank: usize) -> Result<Self> {
        let alphabet = Alphabet::new(rank)?;
        if rank > self.alphabet.rank() {
            return Err(Error::InvalidParameter(format!(
                "cannot restrict rank {} to {rank}",
                self.alphabet.rank()
            )));
        }
        Self::new(alphabet, self.weights[..alphabet.size()].to_vec())
    }

    pub fn magnitude(&self) -> Magnitude {
        Magnitude {
            potential: self.clone(),
        }
    }
}

/// `‖γ‖_σ = ψ(o, γo)`, the weighted length of `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Magnitude {
    potential: WeightedPotential,
}

impl Magnitude {
    pub fn of(&self, g: &ReducedWord) -> f64 {
        self.potential.word_weight(g.letters())
    }

    pub fn potential(&self) -> &WeightedPotential {
        &self.potential
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.potential.alphabet
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Primal,
    Dual,
}

/// `σ_ψ` or `σ̄_ψ` of a weighted potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle {
    source: WeightedPotential,
    direction: Direction,
    effective: WeightedPotential,
}

impl Cocycle {
    pub fn primal(p: &WeightedPotential) -> Self {
        Self {
            source: p.clone(),
            direction: Direction::Primal,
            effective: p.clone(),
        }
    }

    pub fn dual(p: &WeightedPotential) -> Self {
        Self {
            source: p.clone(),
            direction: Direction::Dual,
            effective: p.dual(),
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn source(&self) -> &WeightedPotential {
        &self.source
    }

    /// The potential whose primal cocycle this is.
    pub fn effective_potential(&self) -> &WeightedPotential {
        &self.effective
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.effective.alphabet
    }

    /// `‖g‖_σ` for this cocycle.
    pub fn magnitude(&self, g: &ReducedWord) -> f64 {
        self.effective.word_weight(g.letters())
    }

    /// `ψ(c, o) + ψ(o, c)` for the effective weights.
    fn round_trip(&self, c: &[Letter]) -> f64 {
        c.iter()
            .map(|&l| self.effective.weight(l) + self.effective.weight(inv(l)))
            .sum()
    }

    /// `σ(g, x)` in closed form.
    pub fn sigma(&self, g: &ReducedWord, x: &BoundaryPoint) -> f64 {
        let ginv = g.inverse();
        let j = ginv
            .letters()
            .iter()
            .enumerate()
            .take_while(|&(i, &l)| x.letter_at(i) == l)
            .count();
        self.magnitude(g) - self.round_trip(&ginv.letters()[..j])
    }

    /// The value of `σ(g, ·)` on `C_w` if it is constant there.
    ///
    /// Constancy holds as soon as the stem separates from `g⁻¹` (or contains
    /// all of it), which is guaranteed for `|w| ≥ |g| + 1`.
    pub fn sigma_on_cylinder(&self, g: &ReducedWord, w: &Cylinder) -> Option<f64> {
        let ginv = g.inverse();
        let j = ginv.common_prefix_len(w.stem());
        if j < w.depth() || j == ginv.len() {
            Some(self.magnitude(g) - self.round_trip(&ginv.letters()[..j]))
        } else {
            None
        }
    }
}

/// `max |σ(g1 g2, x) − σ(g1, g2 x) − σ(g2, x)|` over the sample.
pub fn cocycle_identity_defect(c: &Cocycle, sample: &[(ReducedWord, ReducedWord, BoundaryPoint)]) -> f64 {
    sample
        .iter()
        .map(|(g1, g2, x)| {
            let lhs = c.sigma(&g1.multiply(g2), x);
            let rhs = c.sigma(g1, &x.act(g2)) + c.sigma(g2, x);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// The smallest `C` with `|σ(γ, x) − ‖γ‖| ≤ C` whenever `‖γ‖ ≤ radius` and
/// `x` lies outside the open ball `B_ε(γ⁻¹)`, `ε = 2^{-m}`; computed by
/// enumerating all depth-`(m+1)` cylinders.
pub fn expansion_constant(c: &Cocycle, m: usize, radius: f64) -> Result<f64> {
    let alphabet = *c.alphabet();
    let cylinders = words_of_length(&alphabet, m + 1);
    let mut worst: f64 = 0.0;
    for (g, norm) in crate::ball::ball(radius, &c.effective.magnitude())? {
        let ginv = g.inverse();
        for stem in &cylinders {
            if ginv.common_prefix_len(stem) > m {
                continue; // inside B_ε(γ⁻¹)
            }
            let value = c
                .sigma_on_cylinder(&g, &Cylinder::new(stem.clone()))
                .expect("separated from g⁻¹ within the stem");
            worst = worst.max((value - norm).abs());
        }
    }
    Ok(worst)
}

/// `|σ(α, x) − (‖α γ_d‖ − ‖γ_d‖)|` with `γ_d` the depth-`d` prefix of `x`.
pub fn nice_magnitude_defect(c: &Cocycle, alpha: &ReducedWord, x: &BoundaryPoint, depth: usize) -> Result<f64> {
    if depth < alpha.len() + 1 {
        return Err(Error::DepthTooShallow {
            depth,
            required: alpha.len() + 1,
        });
    }
    let gd = x.prefix(depth);
    let approx = c.magnitude(&alpha.multiply(&gd)) - c.magnitude(&gd);
    Ok((c.sigma(alpha, x) - approx).abs())
}

/// A potential built from a magnitude table, `ψ(p, q) = ‖p⁻¹q‖`.
#[derive(Debug, Clone)]
pub struct MagnitudePotential {
    magnitude: Magnitude,
}

pub fn cocycle_to_potential(m: &Magnitude) -> MagnitudePotential {
    MagnitudePotential { magnitude: m.clone() }
}

impl MagnitudePotential {
    pub fn psi(&self, p: &ReducedWord, q: &ReducedWord) -> f64 {
        self.magnitude.of(&p.inverse().multiply(q))
    }

    /// `ψ(g⁻¹o, p) − ψ(o, p)` at `p` the depth-`d` prefix of `x`.
    pub fn sigma_at_depth(&self, g: &ReducedWord, x: &BoundaryPoint, depth: usize) -> f64 {
        let p = x.prefix(depth);
        self.psi(&g.inverse(), &p) - self.psi(&ReducedWord::identity(), &p)
    }

    /// Largest defect `|ψ(p,q) − ψ(p,u) − ψ(u,q)|` over vertices `u` on the
    /// geodesic from `p` to `q`.
    pub fn additivity_defect(&self, p: &ReducedWord, q: &ReducedWord) -> f64 {
        let path = p.inverse().multiply(q);
        (0..=path.len())
            .map(|i| {
                let u = p.multiply(&path.prefix(i));
                (self.psi(p, q) - self.psi(p, &u) - self.psi(&u, q)).abs()
            })
            .fold(0.0, f64::max)
    }
}
