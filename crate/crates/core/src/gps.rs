//! Gromov products, the GPS identity `σ̄(g,x) + σ(g,y) = G(gx,gy) − G(x,y)`,
//! BMS measures, and the rigidity / convexity / entropy-gap experiments.

use serde::Serialize;

use crate::ball::for_each_in_ball;
use crate::cylinder::words_of_length;
use crate::error::{Error, Result};
use crate::growth::{critical_exponent_spectral, divergence_verdict_at, DivergenceReport};
use crate::measure::{markov_ps, BoundaryMeasure};
use crate::potential::{Cocycle, WeightedPotential};
use crate::stats::linear_fit;
use crate::word::{confluence, inv, BoundaryPoint, Letter, ReducedWord};

/// Tolerance used by the spectral solves of the experiment engines.
pub const SPECTRAL_TOL: f64 = 1e-13;

fn round_trip(p: &WeightedPotential, c: &[Letter]) -> f64 {
    c.iter().map(|&l| p.weight(l) + p.weight(inv(l))).sum()
}

/// `G_ψ(x, y) = ψ(c, o) + ψ(o, c)` at the confluence `c`.
pub fn gromov_potential(p: &WeightedPotential, x: &BoundaryPoint, y: &BoundaryPoint) -> Result<f64> {
    Ok(round_trip(p, confluence(x, y)?.letters()))
}

/// `‖α⁻¹‖ + ‖β‖ − ‖α⁻¹β‖` with `α, β` the depth-`d` prefixes; `None`
/// (unresolved) unless `d` exceeds the confluence length.
pub fn gromov_magnitude(p: &WeightedPotential, x: &BoundaryPoint, y: &BoundaryPoint, depth: usize) -> Result<Option<f64>> {
    let c = confluence(x, y)?;
    if depth <= c.len() {
        return Ok(None);
    }
    let (a, b) = (x.prefix(depth), y.prefix(depth));
    let norm = |g: &ReducedWord| p.word_weight(g.letters());
    Ok(Some(norm(&a.inverse()) + norm(&b) - norm(&a.inverse().multiply(&b))))
}

/// `max |σ̄(g,x) + σ(g,y) − (G(gx,gy) − G(x,y))|` over the sample.
pub fn gps_defect(p: &WeightedPotential, sample: &[(ReducedWord, BoundaryPoint, BoundaryPoint)]) -> Result<f64> {
    let (sigma, sigma_bar) = (Cocycle::primal(p), Cocycle::dual(p));
    let mut worst: f64 = 0.0;
    for (g, x, y) in sample {
        let lhs = sigma_bar.sigma(g, x) + sigma.sigma(g, y);
        let rhs = gromov_potential(p, &x.act(g), &y.act(g))? - gromov_potential(p, x, y)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// `ν = e^{δG} μ̄ ⊗ μ` on pairs of distinct boundary points.
#[derive(Debug, Clone)]
pub struct BmsMeasure {
    pub potential: WeightedPotential,
    pub mu_bar: BoundaryMeasure,
    pub mu: BoundaryMeasure,
    pub delta: f64,
}

impl BmsMeasure {
    pub fn new(p: &WeightedPotential) -> Result<Self> {
        let mu = markov_ps(p, SPECTRAL_TOL)?;
        let mu_bar = markov_ps(&p.dual(), SPECTRAL_TOL)?;
        Ok(Self {
            potential: p.clone(),
            delta: mu.delta,
            mu_bar,
            mu,
        })
    }

    /// `ν(C_a × C_b)` for disjoint cylinders, on which `G` is constant.
    pub fn rectangle(&self, a: &ReducedWord, b: &ReducedWord) -> Result<f64> {
        if a.starts_with(b) || b.starts_with(a) {
            return Err(Error::NonConstantG);
        }
        let c = &a.letters()[..a.common_prefix_len(b)];
        let g = round_trip(&self.potential, c);
        Ok((self.delta * g).exp() * self.mu_bar.cylinder_mass(a) * self.mu.cylinder_mass(b))
    }
}

/// `max |ν(gA × gB)/ν(A × B) − 1|` over ordered pairs of distinct depth-`d`
/// cylinders.
pub fn bms_invariance_defect(b: &BmsMeasure, g: &ReducedWord, depth: usize) -> Result<f64> {
    if depth < g.len() + 1 {
        return Err(Error::NonConstantG);
    }
    let stems = words_of_length(b.potential.alphabet(), depth);
    let images: Vec<ReducedWord> = stems.iter().map(|s| g.multiply(s)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..stems.len() {
        for j in 0..stems.len() {
            if i == j {
                continue;
            }
            let before = b.rectangle(&stems[i], &stems[j])?;
            let after = b.rectangle(&images[i], &images[j])?;
            worst = worst.max((after / before - 1.0).abs());
        }
    }
    Ok(worst)
}

/// `max_{‖γ‖ ≤ R} |‖γ‖_σ − ‖γ⁻¹‖_σ̄|`.
pub fn duality_gap(p: &WeightedPotential, radius: f64) -> Result<f64> {
    let dual = p.dual();
    let mut worst: f64 = 0.0;
    for_each_in_ball(radius, &p.magnitude(), |w, norm| {
        let back: f64 = w.iter().rev().map(|&l| dual.weight(inv(l))).sum();
        worst = worst.max((norm - back).abs());
    })?;
    Ok(worst)
}

/// `p` rescaled so that its critical exponent is 1.
pub fn normalize(p: &WeightedPotential) -> Result<WeightedPotential> {
    let delta = critical_exponent_spectral(p, SPECTRAL_TOL)?;
    p.scaled(delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Growth {
    Bounded,
    Linear,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub delta0: f64,
    pub delta1: f64,
    /// `(R, D(R))`.
    pub grid: Vec<(f64, f64)>,
    pub slope: f64,
    pub relative_residual: f64,
    pub verdict: Growth,
}

/// Absolute tolerance for "D(R) is constant".
const BOUNDED_TOL: f64 = 1e-9;
pub const LINEAR_SLOPE_FACTOR: f64 = 0.01;
pub const LINEAR_MAX_RESIDUAL: f64 = 0.10;

/// `D(R) = max_{‖γ‖₀ ≤ R} |δ₀‖γ‖₀ − δ₁‖γ‖₁|` on 9 radii from `R/3` to `R`.
pub fn rigidity_statistic(p0: &WeightedPotential, p1: &WeightedPotential, radius: f64) -> Result<RigidityReport> {
    if p0.alphabet() != p1.alphabet() {
        return Err(Error::InvalidParameter("potentials on different alphabets".into()));
    }
    let delta0 = critical_exponent_spectral(p0, SPECTRAL_TOL)?;
    let delta1 = critical_exponent_spectral(p1, SPECTRAL_TOL)?;
    let radii: Vec<f64> = (0..9).map(|i| radius / 3.0 + i as f64 * (radius - radius / 3.0) / 8.0).collect();
    let mut points: Vec<(f64, f64)> = Vec::new();
    for_each_in_ball(radius, &p0.magnitude(), |w, n0| {
        let n1 = p1.word_weight(w);
        points.push((n0, (delta0 * n0 - delta1 * n1).abs()));
    })?;
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut grid = Vec::with_capacity(radii.len());
    let (mut i, mut running) = (0usize, 0.0f64);
    for &r in &radii {
        while i < points.len() && crate::ball::within(points[i].0, r) {
            running = running.max(points[i].1);
            i += 1;
        }
        grid.push((r, running));
    }
    let xs: Vec<f64> = grid.iter().map(|g| g.0).collect();
    let ys: Vec<f64> = grid.iter().map(|g| g.1).collect();
    let fit = linear_fit(&xs, &ys).expect("distinct radii");
    let last = ys[ys.len() - 1];
    let bounded = ys[ys.len() / 2..].iter().all(|y| (y - last).abs() <= BOUNDED_TOL * last.max(1.0));
    let verdict = if bounded {
        Growth::Bounded
    } else if fit.slope > LINEAR_SLOPE_FACTOR * delta0.min(delta1) && fit.relative_residual < LINEAR_MAX_RESIDUAL {
        Growth::Linear
    } else {
        Growth::Undetermined
    };
    Ok(RigidityReport {
        delta0,
        delta1,
        grid,
        slope: fit.slope,
        relative_residual: fit.relative_residual,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strictness {
    Strict,
    Equal,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub lambda: f64,
    pub delta_lambda: f64,
    pub verdict: Strictness,
}

pub const STRICT_MARGIN: f64 = 1e-6;

/// Critical exponent of `λ ŵ₀ + (1−λ) ŵ₁` for the normalized weights `ŵᵢ`.
pub fn convexity_experiment(p0: &WeightedPotential, p1: &WeightedPotential, lambda: f64) -> Result<ConvexityReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("λ = {lambda} must lie in (0, 1)")));
    }
    let (n0, n1) = (normalize(p0)?, normalize(p1)?);
    let combined = n0.convex_combination(&n1, lambda)?;
    let delta_lambda = critical_exponent_spectral(&combined, SPECTRAL_TOL)?;
    Ok(ConvexityReport {
        lambda,
        delta_lambda,
        verdict: if delta_lambda < 1.0 - STRICT_MARGIN {
            Strictness::Strict
        } else {
            Strictness::Equal
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyGap {
    pub ambient_rank: usize,
    pub sub_rank: usize,
    pub delta_sub: f64,
    pub delta_ambient: f64,
    pub divergence: DivergenceReport,
}

/// Exponents of `p` and of its restriction to the free factor on the first
/// `sub_rank` generators, with the factor's divergence test.
pub fn entropy_gap_for(p: &WeightedPotential, sub_rank: usize) -> Result<EntropyGap> {
    let ambient_rank = p.alphabet().rank();
    if sub_rank >= ambient_rank || sub_rank < 2 {
        return Err(Error::InvalidParameter(format!(
            "free factor rank {sub_rank} must be at least 2 and below the ambient rank {ambient_rank}"
        )));
    }
    let sub = p.restrict(sub_rank)?;
    let delta_sub = critical_exponent_spectral(&sub, SPECTRAL_TOL)?;
    let delta_ambient = critical_exponent_spectral(p, SPECTRAL_TOL)?;
    Ok(EntropyGap {
        ambient_rank,
        sub_rank,
        delta_sub,
        delta_ambient,
        divergence: divergence_verdict_at(&sub, delta_sub),
    })
}

/// Word-length version: `F_{sub_k} ≤ F_{ambient_k}`.
pub fn entropy_gap_experiment(ambient_k: usize, sub_k: usize) -> Result<EntropyGap> {
    let alphabet = crate::word::Alphabet::new(ambient_k)?;
    entropy_gap_for(&WeightedPotential::unit(alphabet), sub_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::Divergence;
    use crate::sample::random_triples;
    use crate::word::Alphabet;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn pt(s: &str) -> BoundaryPoint {
        f2().parse_point(s).unwrap()
    }

    #[test]
    fn gromov_examples() {
        let unit = WeightedPotential::unit(f2());
        assert_eq!(gromov_potential(&unit, &pt("(a)"), &pt("(b)")).unwrap(), 0.0);
        let (x, y) = (pt("(ab)"), pt("a(Ba)"));
        assert_eq!(gromov_potential(&unit, &x, &y).unwrap(), 2.0);
        let asym = WeightedPotential::new(f2(), vec![1.0, 3.0, 2.0, 2.0]).unwrap();
        assert_eq!(gromov_potential(&asym, &x, &y).unwrap(), 4.0);
        for p in [&unit, &asym] {
            for (a, b) in [(pt("(a)"), pt("(b)")), (x.clone(), y.clone())] {
                let direct = gromov_potential(p, &a, &b).unwrap();
                let c = confluence(&a, &b).unwrap().len();
                assert_eq!(gromov_magnitude(p, &a, &b, c).unwrap(), None);
                assert_eq!(gromov_magnitude(p, &a, &b, c + 3).unwrap(), Some(direct));
            }
        }
        assert_eq!(gromov_potential(&unit, &x, &x), Err(Error::EqualPoints));
    }

    #[test]
    fn gps_identity_exact() {
        let sample = random_triples(&f2(), 2000, 5);
        for w in [vec![1.0; 4], vec![1.0, 3.0, 2.0, 2.0], vec![0.6, 2.2, 1.4, 0.9]] {
            let p = WeightedPotential::new(f2(), w).unwrap();
            assert!(gps_defect(&p, &sample).unwrap() < 1e-12);
        }
        let g_e: Vec<_> = sample.iter().map(|(_, x, y)| (ReducedWord::identity(), x.clone(), y.clone())).collect();
        assert_eq!(gps_defect(&WeightedPotential::unit(f2()), &g_e).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_weights_use_one_cocycle() {
        let p = WeightedPotential::new(f2(), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        let s = Cocycle::primal(&p);
        for (g, x, y) in random_triples(&f2(), 200, 9) {
            let lhs = s.sigma(&g, &x) + s.sigma(&g, &y);
            let rhs = gromov_potential(&p, &x.act(&g), &y.act(&g)).unwrap() - gromov_potential(&p, &x, &y).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn bms_invariance() {
        let unit = BmsMeasure::new(&WeightedPotential::unit(f2())).unwrap();
        let a = f2().parse_word("a").unwrap();
        let ab = f2().parse_word("ab").unwrap();
        assert_eq!(bms_invariance_defect(&unit, &ReducedWord::identity(), 2).unwrap(), 0.0);
        assert!(bms_invariance_defect(&unit, &a, 3).unwrap() < 1e-9);
        assert!(bms_invariance_defect(&unit, &ab, 3).unwrap() < 1e-9);
        assert_eq!(bms_invariance_defect(&unit, &ab, 2), Err(Error::NonConstantG));
        let q = BmsMeasure::new(&WeightedPotential::new(f2(), vec![1.0, 1.0, 2.0, 2.0]).unwrap()).unwrap();
        assert!(bms_invariance_defect(&q, &f2().parse_word("b").unwrap(), 4).unwrap() < 1e-9);
        let asym = BmsMeasure::new(&WeightedPotential::new(f2(), vec![1.0, 3.0, 2.0, 2.0]).unwrap()).unwrap();
        assert!(bms_invariance_defect(&asym, &ab, 3).unwrap() < 1e-9);
    }

    #[test]
    fn duality() {
        let asym = WeightedPotential::new(f2(), vec![1.0, 3.0, 2.0, 2.0]).unwrap();
        assert_eq!(duality_gap(&asym, 8.0).unwrap(), 0.0);
        assert_eq!(duality_gap(&asym, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rigidity_verdicts() {
        let unit = WeightedPotential::unit(f2());
        let q = WeightedPotential::new(f2(), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(rigidity_statistic(&unit, &unit, 12.0).unwrap().verdict, Growth::Bounded);
        let green = WeightedPotential::new(f2(), vec![3f64.ln(); 4]).unwrap();
        assert_eq!(rigidity_statistic(&unit, &green, 12.0).unwrap().verdict, Growth::Bounded);
        let r = rigidity_statistic(&unit, &q, 12.0).unwrap();
        assert_eq!(r.verdict, Growth::Linear, "{r:?}");
    }

    /// Scalar oracle for the combined weights: two classes `α` (a-letters)
    /// and `β` (b-letters) give `ρ = 1 ⇔ (1 − x)(1 − y) = 4xy`.
    #[test]
    fn convexity_strict_drop() {
        let unit = WeightedPotential::unit(f2());
        let q = WeightedPotential::new(f2(), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        let r = convexity_experiment(&unit, &q, 0.5).unwrap();
        assert_eq!(r.verdict, Strictness::Strict);
        let (d0, d1) = (3f64.ln(), critical_exponent_spectral(&q, 1e-13).unwrap());
        let (alpha, beta) = (0.5 * d0 + 0.5 * d1, 0.5 * d0 + 0.5 * 2.0 * d1);
        let f = |d: f64| {
            let (x, y) = ((-d * alpha).exp(), (-d * beta).exp());
            (1.0 - x) * (1.0 - y) - 4.0 * x * y
        };
        assert!(f(1.0) > 0.0, "ρ(1) < 1 means δ_λ < 1");
        let (mut lo, mut hi) = (0.1, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((r.delta_lambda - 0.5 * (lo + hi)).abs() < 1e-9);
        assert!(r.delta_lambda <= 1.0 - 1e-3);
        assert_eq!(convexity_experiment(&unit, &unit, 0.5).unwrap().verdict, Strictness::Equal);
        let near = convexity_experiment(&unit, &q, 1e-3).unwrap();
        assert!((near.delta_lambda - 1.0).abs() < 1e-3);
        assert!(convexity_experiment(&unit, &q, 1.0).is_err());
    }

    #[test]
    fn entropy_gaps() {
        let g = entropy_gap_experiment(3, 2).unwrap();
        assert!((g.delta_sub - 3f64.ln()).abs() < 1e-9 && (g.delta_ambient - 5f64.ln()).abs() < 1e-9);
        assert_eq!(g.divergence.verdict, Divergence::Divergent);
        assert!((g.divergence.slope - 4.0 / 3.0).abs() < 0.01 * 4.0 / 3.0);
        let g = entropy_gap_experiment(4, 2).unwrap();
        assert!((g.delta_ambient - 7f64.ln()).abs() < 1e-9);
        assert!(entropy_gap_experiment(2, 2).is_err());
    }
}
