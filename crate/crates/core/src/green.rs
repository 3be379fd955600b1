//! Nearest-neighbour random walks, first-passage probabilities and the
//! Green metric.
//!
//! On the tree `F(x, y)` factorizes along the geodesic (every path from `x`
//! to `y` passes through each intermediate vertex), so the `2k` numbers
//! `F_s = F(e, s)` determine the Green metric `−log F(x, y)` as a weighted
//! potential.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cylinder::Cylinder;
use crate::error::{Error, Result};
use crate::potential::WeightedPotential;
use crate::word::{inv, Alphabet, Letter, ReducedWord};

/// Tolerance on `Σ λ(s) = 1`.
const SUM_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 1_000_000;

/// Step distribution of a nearest-neighbour walk with full support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkSpec {
    #[serde(skip)]
    alphabet: Alphabet,
    probabilities: Vec<f64>,
}

impl WalkSpec {
    pub fn new(alphabet: Alphabet, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != alphabet.size() {
            return Err(Error::WrongLength {
                expected: alphabet.size(),
                got: probabilities.len(),
            });
        }
        if let Some((l, p)) = probabilities.iter().enumerate().find(|(_, p)| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidWalk(format!(
                "step probability of `{}` must be positive, got {p}",
                Alphabet::letter_name(l as Letter)
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidWalk(format!("step probabilities sum to {total}, not 1")));
        }
        Ok(Self { alphabet, probabilities })
    }

    /// `λ ≡ 1/2k`.
    pub fn isotropic(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        Self {
            alphabet,
            probabilities: vec![1.0 / n as f64; n],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, l: Letter) -> f64 {
        self.probabilities[l as usize]
    }

    /// The reflected walk `λ̄(s) = λ(s⁻¹)`.
    pub fn dual(&self) -> Self {
        let probabilities = self.alphabet.letters().map(|l| self.probability(inv(l))).collect();
        Self {
            alphabet: self.alphabet,
            probabilities,
        }
    }
}

/// `F_s`: probability that the walk from `e` ever visits `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstPassage {
    #[serde(skip)]
    alphabet: Alphabet,
    values: Vec<f64>,
    pub iterations: usize,
}

impl FirstPassage {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, l: Letter) -> f64 {
        self.values[l as usize]
    }

    /// `F(e, g)`, the product of `F_s` along the word.
    pub fn hit(&self, g: &ReducedWord) -> f64 {
        g.letters().iter().map(|&l| self.get(l)).product()
    }

    /// Residual of `F_s = λ(s) + Σ_{t≠s} λ(t) F_{t⁻¹} F_s`.
    pub fn residual(&self, walk: &WalkSpec) -> f64 {
        let next = jacobi_step(walk, &self.values);
        next.iter().zip(&self.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn jacobi_step(walk: &WalkSpec, f: &[f64]) -> Vec<f64> {
    let lambda = walk.probabilities();
    let n = f.len();
    (0..n)
        .map(|s| {
            let back: f64 = (0..n).filter(|&t| t != s).map(|t| lambda[t] * f[inv(t as Letter) as usize]).sum();
            lambda[s] + back * f[s]
        })
        .collect()
}

/// Minimal nonnegative solution of the first-passage system, by Jacobi
/// iteration from `0` (monotone increasing). Stops once the sup-change,
/// inflated by the observed contraction rate, is below `tol`.
pub fn solve_first_passage(walk: &WalkSpec, tol: f64) -> Result<FirstPassage> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let mut f = vec![0.0; walk.alphabet().size()];
    let mut prev_change = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let next = jacobi_step(walk, &f);
        let change = next.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        f = next;
        let rate = if prev_change.is_finite() && prev_change > 0.0 {
            (change / prev_change).min(0.999_999)
        } else {
            0.0
        };
        prev_change = change;
        if change / (1.0 - rate) < tol {
            if f.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
                return Err(Error::InvalidWalk(format!("first-passage values {f:?} outside (0, 1)")));
            }
            return Ok(FirstPassage {
                alphabet: *walk.alphabet(),
                values: f,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence(MAX_ITERATIONS))
}

/// Weights `−log F_s`: the Green metric `−log F(p, q)` of the walk.
pub fn green_potential(fp: &FirstPassage) -> Result<WeightedPotential> {
    WeightedPotential::new(*fp.alphabet(), fp.values().iter().map(|f| -f.ln()).collect())
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    fn bernoulli(successes: u64, samples: u64) -> Self {
        let p = successes as f64 / samples as f64;
        Self {
            mean: p,
            stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }

    /// Whether `value` lies within `k` standard errors. A zero standard
    /// error needs an exact match.
    pub fn agrees(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr + 1e-15
    }

    /// `−log` of the estimate, with a delta-method standard error.
    pub fn neg_log(&self) -> Estimate {
        Estimate {
            mean: -self.mean.ln(),
            stderr: self.stderr / self.mean,
            samples: self.samples,
        }
    }
}

/// Simulation parameters. Paths stop after `cap` steps, or once they are
/// `kill_distance` edges further from the target (or from the root, for
/// escape directions) than at the start; the returning mass cut off this
/// way is a relative bias of order `(max F)^{kill_distance}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub paths: u64,
    pub cap: u64,
    pub kill_distance: usize,
    pub seed: u64,
}

/// Paths per RNG stream; fixes the path-to-stream assignment regardless of
/// how many threads run.
pub const CHUNK: u64 = 4096;

impl MonteCarlo {
    pub fn new(paths: u64, seed: u64) -> Self {
        Self {
            paths,
            cap: 10_000,
            kill_distance: 64,
            seed,
        }
    }

    /// Counts successes over all paths; chunk `c` draws from stream `c` of
    /// the seeded generator, and the integer counts are summed.
    fn count(&self, trial: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> u64 {
        let chunks = self.paths.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(c);
                let n = CHUNK.min(self.paths - c * CHUNK);
                (0..n).filter(|_| trial(&mut rng)).count() as u64
            })
            .sum()
    }
}

struct Walker<'a> {
    steps: &'a WeightedIndex<f64>,
    position: Vec<Letter>,
}

impl Walker<'_> {
    fn step(&mut self, rng: &mut impl Rng) -> Step {
        let l = self.steps.sample(rng) as Letter;
        if self.position.last() == Some(&inv(l)) {
            self.position.pop();
            Step::Back
        } else {
            self.position.push(l);
            Step::Forward(l)
        }
    }
}

enum Step {
    Back,
    Forward(Letter),
}

/// Estimate of `F(e, target)` from simulated paths.
pub fn monte_carlo_hit(walk: &WalkSpec, target: &ReducedWord, mc: &MonteCarlo) -> Result<Estimate> {
    if mc.paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    if target.is_identity() {
        return Ok(Estimate {
            mean: 1.0,
            stderr: 0.0,
            samples: mc.paths,
        });
    }
    let steps = WeightedIndex::new(walk.probabilities()).map_err(|e| Error::InvalidWalk(e.to_string()))?;
    let goal = target.letters();
    let hits = mc.count(|rng| {
        let mut w = Walker {
            steps: &steps,
            position: Vec::new(),
        };
        // agree = common prefix length of position and target
        let mut agree = 0usize;
        for _ in 0..mc.cap {
            match w.step(rng) {
                Step::Back => {
                    if agree > w.position.len() {
                        agree -= 1;
                    }
                }
                Step::Forward(l) => {
                    let n = w.position.len();
                    if agree == n - 1 && n <= goal.len() && goal[n - 1] == l {
                        agree = n;
                    }
                }
            }
            if agree == goal.len() && w.position.len() == goal.len() {
                return true;
            }
            if w.position.len() + goal.len() - 2 * agree >= goal.len() + mc.kill_distance {
                return false;
            }
        }
        false
    });
    Ok(Estimate::bernoulli(hits, mc.paths))
}

/// Estimate of the harmonic (hitting) measure of a cylinder: the fraction
/// of paths whose position, once `kill_distance` letters beyond the stem
/// depth (or at the step cap), lies in the cylinder.
pub fn harmonic_cylinder_mass(walk: &WalkSpec, cyl: &Cylinder, mc: &MonteCarlo) -> Result<Estimate> {
    if mc.paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    if cyl.depth() == 0 {
        return Ok(Estimate {
            mean: 1.0,
            stderr: 0.0,
            samples: mc.paths,
        });
    }
    let steps = WeightedIndex::new(walk.probabilities()).map_err(|e| Error::InvalidWalk(e.to_string()))?;
    let stem = cyl.stem().letters();
    let escape = stem.len() + mc.kill_distance;
    let hits = mc.count(|rng| {
        let mut w = Walker {
            steps: &steps,
            position: Vec::new(),
        };
        for _ in 0..mc.cap {
            w.step(rng);
            if w.position.len() >= escape {
                break;
            }
        }
        w.position.starts_with(stem)
    });
    Ok(Estimate::bernoulli(hits, mc.paths))
}
