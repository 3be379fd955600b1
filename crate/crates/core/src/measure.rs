//! Patterson–Sullivan measures on the boundary.
//!
//! The exact measure is Markov: with `h` the Perron vector of `A(δ)ᵀ`,
//! `p(s → s') = e^{−δ w(s')} h_{s'} / (ρ h_s)` and
//! `m(s) ∝ e^{−δ w(s)} h_s`, so `μ(C_w) ∝ e^{−δ‖w‖} h_{last(w)}` and
//! `g_*μ` has density exactly `e^{−δσ(g⁻¹, ·)}`. The orbit-sum construction
//! is kept as an independent check.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::ball::for_each_in_partition;
use crate::cylinder::{words_of_length, Cylinder, CylinderSet};
use crate::error::{Error, Result};
use crate::growth::{critical_exponent_spectral, poincare_series_exact, MagnitudeSpectrum, TransferMatrix};
use crate::potential::{Cocycle, WeightedPotential};
use crate::word::{inv, Alphabet, Letter, ReducedWord};

/// A Markov probability measure on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryMeasure {
    #[serde(skip)]
    alphabet: Alphabet,
    pub delta: f64,
    pub initial: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
}

impl BoundaryMeasure {
    pub fn new(alphabet: Alphabet, delta: f64, initial: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let n = alphabet.size();
        if initial.len() != n || transition.len() != n || transition.iter().any(|r| r.len() != n) {
            return Err(Error::WrongLength {
                expected: n,
                got: initial.len(),
            });
        }
        for (s, row) in transition.iter().enumerate() {
            if row[inv(s as Letter) as usize] != 0.0 {
                return Err(Error::InvalidParameter(format!("transition row {s} allows backtracking")));
            }
        }
        Ok(Self {
            alphabet,
            delta,
            initial,
            transition,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// `m(s₁) Π p(sᵢ → sᵢ₊₁)`; the whole space for the empty stem.
    pub fn cylinder_mass(&self, stem: &ReducedWord) -> f64 {
        let w = stem.letters();
        match w.first() {
            None => 1.0,
            Some(&s) => w
                .windows(2)
                .fold(self.initial[s as usize], |acc, p| acc * self.transition[p[0] as usize][p[1] as usize]),
        }
    }

    pub fn mass(&self, set: &CylinderSet) -> f64 {
        set.measure_with(|w| self.cylinder_mass(w))
    }

    /// Largest deviation of a transition row sum from 1.
    pub fn row_sum_defect(&self) -> f64 {
        self.transition
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold((self.initial.iter().sum::<f64>() - 1.0).abs(), f64::max)
    }

    /// Largest mass of a depth-`d` cylinder (max-product over paths).
    pub fn max_cylinder_mass(&self, depth: usize) -> f64 {
        if depth == 0 {
            return 1.0;
        }
        let n = self.alphabet.size();
        let mut best = self.initial.clone();
        for _ in 1..depth {
            best = (0..n)
                .map(|t| (0..n).map(|s| best[s] * self.transition[s][t]).fold(0.0, f64::max))
                .collect();
        }
        best.into_iter().fold(0.0, f64::max)
    }

    pub fn max_transition(&self) -> f64 {
        self.transition.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Exact PS measure of a weighted potential.
pub fn markov_ps(p: &WeightedPotential, tol: f64) -> Result<BoundaryMeasure> {
    let delta = critical_exponent_spectral(p, tol)?;
    markov_at(p, delta)
}

fn markov_at(p: &WeightedPotential, delta: f64) -> Result<BoundaryMeasure> {
    let a = TransferMatrix::new(p, delta);
    let (rho, h) = a.transpose().perron()?;
    let n = p.alphabet().size();
    let e: Vec<f64> = p.weights().iter().map(|w| (-delta * w).exp()).collect();
    let transition = (0..n)
        .map(|s| {
            (0..n)
                .map(|t| if t as Letter == inv(s as Letter) { 0.0 } else { e[t] * h[t] / (rho * h[s]) })
                .collect()
        })
        .collect();
    let z: f64 = (0..n).map(|s| e[s] * h[s]).sum();
    let initial = (0..n).map(|s| e[s] * h[s] / z).collect();
    BoundaryMeasure::new(*p.alphabet(), delta, initial, transition)
}

/// `max_C |μ(gC)/μ(C)·e^{−δσ(g⁻¹, gC)} − 1|` over depth-`d` cylinders.
pub fn quasi_invariance_defect(mu: &BoundaryMeasure, c: &Cocycle, g: &ReducedWord, depth: usize) -> Result<f64> {
    if depth < g.len() + 1 {
        return Err(Error::DepthTooShallow {
            depth,
            required: g.len() + 1,
        });
    }
    let ginv = g.inverse();
    let mut worst: f64 = 0.0;
    for stem in words_of_length(&mu.alphabet, depth) {
        let image = g.multiply(&stem);
        let image_cyl = Cylinder::new(image.clone());
        let sigma = c.sigma_on_cylinder(&ginv, &image_cyl).ok_or(Error::DepthTooShallow {
            depth,
            required: g.len() + 1,
        })?;
        let ratio = mu.cylinder_mass(&image) / mu.cylinder_mass(&stem);
        worst = worst.max((ratio * (-mu.delta * sigma).exp() - 1.0).abs());
    }
    Ok(worst)
}

/// Truncated orbit-sum measure binned by depth-`d` cylinders.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalMeasure {
    pub depth: usize,
    pub s: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(serialize_with = "as_word_map")]
    pub masses: Vec<(ReducedWord, f64)>,
    /// Share of the orbit sum carried by elements shorter than `depth`.
    pub shallow_mass: f64,
    /// `1 − (truncated sum)/Q(s)`, the share lost to the truncation.
    pub tail_fraction: f64,
    pub elements: u64,
}

fn as_word_map<S: Serializer>(masses: &[(ReducedWord, f64)], ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_map(masses.iter().map(|(w, m)| (w.to_string(), m)))
}

impl EmpiricalMeasure {
    pub fn mass_of(&self, stem: &ReducedWord) -> Option<f64> {
        self.masses
            .binary_search_by(|(w, _)| w.cmp(stem))
            .ok()
            .map(|i| self.masses[i].1)
    }
}

/// Largest dense bin table for the orbit-sum construction.
const MAX_BINS: usize = 1 << 24;

/// `μ_s ∝ Σ_{‖g‖ ≤ R} e^{−s‖g‖} D_g`, each element binned by its depth-`d`
/// prefix; elements shorter than `d` go to a separate shallow bucket and
/// the deep masses are normalized among themselves.
pub fn patterson_construct(p: &WeightedPotential, s: f64, radius: f64, depth: usize) -> Result<EmpiricalMeasure> {
    let delta = critical_exponent_spectral(p, 1e-13)?;
    if s <= delta {
        return Err(Error::SubcriticalS { s, delta });
    }
    let alphabet = *p.alphabet();
    let n = alphabet.size();
    if depth == 0 {
        return Err(Error::InvalidParameter("cylinder depth must be at least 1".into()));
    }
    let bins = n.checked_pow(depth as u32).filter(|&b| b <= MAX_BINS).ok_or_else(|| {
        Error::InvalidParameter(format!("depth {depth} needs more than {MAX_BINS} bins"))
    })?;
    let magnitude = p.magnitude();
    let code = |w: &[Letter]| w[..depth].iter().fold(0usize, |acc, &l| acc * n + l as usize);

    let parts: Vec<(Vec<f64>, f64, u64)> = alphabet
        .letters()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|first| {
            let mut deep = vec![0.0; bins];
            let mut shallow = 0.0;
            let mut count = 0u64;
            for_each_in_partition(radius, &magnitude, first, &mut |w: &[Letter], norm: f64| {
                count += 1;
                let mass = (-s * norm).exp();
                if w.len() >= depth {
                    deep[code(w)] += mass;
                } else {
                    shallow += mass;
                }
            });
            (deep, shallow, count)
        })
        .collect();

    let mut deep = vec![0.0; bins];
    let mut shallow = 1.0; // the identity
    let mut elements = 1u64;
    for (d, sh, c) in &parts {
        for (acc, x) in deep.iter_mut().zip(d) {
            *acc += x;
        }
        shallow += sh;
        elements += c;
    }
    let deep_total: f64 = deep.iter().sum();
    let total = deep_total + shallow;
    let q = poincare_series_exact(p, s)?.expect("s above the critical exponent");
    let masses = words_of_length(&alphabet, depth)
        .into_iter()
        .map(|w| {
            let m = deep[code(w.letters())] / deep_total;
            (w, m)
        })
        .collect::<Vec<_>>();
    let mut masses = masses;
    masses.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(EmpiricalMeasure {
        depth,
        s,
        radius,
        masses,
        shallow_mass: shallow / total,
        tail_fraction: 1.0 - total / q,
        elements,
    })
}

/// Smallest radius on the grid `{min weight · j}` with truncation tail
/// below `rel_tail·Q(s)`, capped at `r_max`. Returns `(R, tail share)`.
pub fn auto_radius(p: &WeightedPotential, s: f64, rel_tail: f64, r_max: f64) -> Result<(f64, f64)> {
    let q = poincare_series_exact(p, s)?.ok_or_else(|| Error::SubcriticalS {
        s,
        delta: critical_exponent_spectral(p, 1e-13).unwrap_or(f64::NAN),
    })?;
    let spectrum = MagnitudeSpectrum::discounted(p, r_max, s);
    let step = p.min_weight();
    let mut r = step;
    loop {
        let tail = 1.0 - spectrum.partial_sum(0.0, r) / q;
        if tail < rel_tail || r >= r_max {
            return Ok((r.min(r_max), tail));
        }
        r += step;
    }
}

/// Anything that assigns masses to deep cylinders.
pub trait CylinderMasses {
    fn mass_of_stem(&self, stem: &ReducedWord) -> Option<f64>;
}

impl CylinderMasses for BoundaryMeasure {
    fn mass_of_stem(&self, stem: &ReducedWord) -> Option<f64> {
        Some(self.cylinder_mass(stem))
    }
}

impl CylinderMasses for EmpiricalMeasure {
    fn mass_of_stem(&self, stem: &ReducedWord) -> Option<f64> {
        self.mass_of(stem)
    }
}

/// Extremal ratios `a(C)/b(C)` over the depth-`d` cylinders.
pub fn coarse_uniqueness_ratio(a: &impl CylinderMasses, b: &BoundaryMeasure, depth: usize) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for w in words_of_length(b.alphabet(), depth) {
        let x = a.mass_of_stem(&w).ok_or(Error::DepthTooShallow { depth, required: depth })?;
        let r = x / b.cylinder_mass(&w);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}
