//! Poincaré series and critical exponents.
//!
//! Two independent routes: the Perron root of the `2k × 2k` transfer matrix
//! `A(δ)[s', s] = e^{−δ w(s')}·[s' ≠ s⁻¹]` (the exponent is the unique `δ`
//! with `ρ(A(δ)) = 1`), and exact counting of ball elements by magnitude.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::ball::within;
use crate::error::{Error, Result};
use crate::potential::WeightedPotential;
use crate::stats::linear_fit;
use crate::word::{inv, Letter};

const POWER_TOL: f64 = 1e-14;
const POWER_MAX_ITER: usize = 1_000_000;

/// Nonnegative square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransferMatrix {
    /// `A(δ)` of a potential.
    pub fn new(p: &WeightedPotential, delta: f64) -> Self {
        let n = p.alphabet().size();
        let mut entries = vec![0.0; n * n];
        for row in 0..n {
            let factor = (-delta * p.weights()[row]).exp();
            for col in 0..n {
                if row as Letter != inv(col as Letter) {
                    entries[row * n + col] = factor;
                }
            }
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c];
            }
        }
        Self { n, entries }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.entries[r * self.n..(r + 1) * self.n]
                .iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    /// Perron root and a positive right eigenvector (unit `ℓ¹` norm), by
    /// power iteration stopped once the Collatz–Wielandt bounds
    /// `min (Av)_i/v_i ≤ ρ ≤ max (Av)_i/v_i` agree to `1e-14` relative.
    pub fn perron(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.n;
        let mut v = vec![1.0 / n as f64; n];
        let mut w = vec![0.0; n];
        for _ in 0..POWER_MAX_ITER {
            self.apply(&v, &mut w);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (a, b) in w.iter().zip(&v) {
                if *b <= 0.0 {
                    return Err(Error::PerronFailure("iterate lost positivity".into()));
                }
                lo = lo.min(a / b);
                hi = hi.max(a / b);
            }
            let norm: f64 = w.iter().sum();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::PerronFailure(format!("iterate norm {norm}")));
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm;
            }
            if hi - lo <= POWER_TOL * hi {
                return Ok((0.5 * (lo + hi), v));
            }
        }
        Err(Error::PerronFailure("power iteration did not converge".into()))
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.perron()?.0)
    }
}

/// `ρ(A(δ))`.
pub fn spectral_radius_at(p: &WeightedPotential, delta: f64) -> Result<f64> {
    TransferMatrix::new(p, delta).spectral_radius()
}

/// The critical exponent as the root of `ρ(A(δ)) = 1`, by bisection over
/// `[1e-6, 50 / min w]`.
pub fn critical_exponent_spectral(p: &WeightedPotential, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    critical_exponent_in(p, tol, 1e-6, 50.0 / p.min_weight())
}

pub fn critical_exponent_in(p: &WeightedPotential, tol: f64, lo: f64, hi: f64) -> Result<f64> {
    // Column sums give ρ(A(δ)) ≤ (2k−1)e^{−δ·min w} ≤ 1/e beyond `safe`, and
    // ρ is decreasing; evaluating further out only risks e^{−δw} underflow.
    let safe = (((2 * p.alphabet().rank() - 1) as f64).ln() + 1.0) / p.min_weight();
    let top = hi.min(safe).max(lo);
    let (rho_lo, rho_hi) = (spectral_radius_at(p, lo)?, spectral_radius_at(p, top)?);
    if !(rho_lo > 1.0 && rho_hi < 1.0) {
        return Err(Error::BracketFailure { lo, hi, rho_lo, rho_hi });
    }
    let (mut a, mut b) = (lo, top);
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let rho = spectral_radius_at(p, mid)?;
        if (rho - 1.0).abs() <= tol.min(1e-15) {
            return Ok(mid);
        }
        if rho > 1.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mid = 0.5 * (a + b);
    let rho = spectral_radius_at(p, mid)?;
    if (rho - 1.0).abs() <= tol.max(4.0 * f64::EPSILON) {
        Ok(mid)
    } else {
        Err(Error::PerronFailure(format!("bisection stalled at δ={mid}, ρ−1={}", rho - 1.0)))
    }
}

/// Exact number of ball elements per magnitude value, up to a radius.
///
/// Counting runs over (count vector of distinct weights, last letter), so
/// every magnitude is recomputed from integer counts in a fixed order and
/// equal magnitudes compare bit-exactly.
#[derive(Debug, Clone)]
pub struct MagnitudeSpectrum {
    radius: f64,
    /// (magnitude, number of elements) sorted by magnitude.
    levels: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl MagnitudeSpectrum {
    pub fn build(p: &WeightedPotential, radius: f64) -> Self {
        Self::build_with(p, radius, &vec![1.0; p.alphabet().size()])
    }

    /// Level masses `Σ e^{−s‖γ‖}` instead of counts; stays finite at radii
    /// where the counts overflow. Use with `partial_sum(0.0, r)`.
    pub fn discounted(p: &WeightedPotential, radius: f64, s: f64) -> Self {
        let factors: Vec<f64> = p.weights().iter().map(|w| (-s * w).exp()).collect();
        Self::build_with(p, radius, &factors)
    }

    fn build_with(p: &WeightedPotential, radius: f64, factors: &[f64]) -> Self {
        let mut classes: Vec<f64> = p.weights().to_vec();
        classes.sort_by(f64::total_cmp);
        classes.dedup();
        let class_of: Vec<usize> = p
            .weights()
            .iter()
            .map(|w| classes.iter().position(|c| c == w).expect("class"))
            .collect();
        let norm = |cv: &[u32]| -> f64 { cv.iter().zip(&classes).map(|(&c, w)| c as f64 * w).sum() };
        let size = p.alphabet().size();

        let mut by_norm: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let mut level: BTreeMap<Vec<u32>, Vec<f64>> = BTreeMap::new();
        for l in 0..size {
            let mut cv = vec![0u32; classes.len()];
            cv[class_of[l]] += 1;
            if within(norm(&cv), radius) {
                level.entry(cv).or_insert_with(|| vec![0.0; size])[l] += factors[l];
            }
        }
        while !level.is_empty() {
            let mut next: BTreeMap<Vec<u32>, Vec<f64>> = BTreeMap::new();
            for (cv, counts) in &level {
                *by_norm.entry(cv.clone()).or_insert(0.0) += counts.iter().sum::<f64>();
                for (t, &ct) in counts.iter().enumerate() {
                    if ct == 0.0 {
                        continue;
                    }
                    for l in 0..size {
                        if l as Letter == inv(t as Letter) {
                            continue;
                        }
                        let mut cv2 = cv.clone();
                        cv2[class_of[l]] += 1;
                        if within(norm(&cv2), radius) {
                            next.entry(cv2).or_insert_with(|| vec![0.0; size])[l] += ct * factors[l];
                        }
                    }
                }
            }
            level = next;
        }

        let mut levels: Vec<(f64, f64)> = vec![(0.0, 1.0)];
        levels.extend(by_norm.iter().map(|(cv, &c)| (norm(cv), c)));
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(levels.len());
        for (m, c) in levels {
            match merged.last_mut() {
                Some(last) if last.0 == m => last.1 += c,
                _ => merged.push((m, c)),
            }
        }
        let cumulative = merged
            .iter()
            .scan(0.0, |acc, &(_, c)| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        Self {
            radius,
            levels: merged,
            cumulative,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn levels(&self) -> &[(f64, f64)] {
        &self.levels
    }

    /// `N(r) = #{γ : ‖γ‖ ≤ r}` for `r ≤ radius`.
    pub fn count_within(&self, r: f64) -> f64 {
        let i = self.levels.partition_point(|&(m, _)| within(m, r));
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1]
        }
    }

    /// `Σ_{‖γ‖ ≤ r} e^{−s‖γ‖}`.
    pub fn partial_sum(&self, s: f64, r: f64) -> f64 {
        self.levels
            .iter()
            .take_while(|&&(m, _)| within(m, r))
            .map(|&(m, c)| c * (-s * m).exp())
            .sum()
    }
}

/// Exact `Q(s) = 1 + 1ᵀ(I − A(s))⁻¹ v`, `v_s = e^{−s w(s)}`, when `ρ(A(s)) < 1`.
pub fn poincare_series_exact(p: &WeightedPotential, s: f64) -> Result<Option<f64>> {
    let a = TransferMatrix::new(p, s);
    if a.spectral_radius()? >= 1.0 {
        return Ok(None);
    }
    let n = a.dim();
    let m = DMatrix::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 } - a.get(r, c));
    let v = DVector::from_iterator(n, p.weights().iter().map(|w| (-s * w).exp()));
    let x = m
        .lu()
        .solve(&v)
        .ok_or_else(|| Error::PerronFailure("singular I − A(s)".into()))?;
    Ok(Some(1.0 + x.sum()))
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincarePartial {
    pub s: f64,
    pub radius: f64,
    pub sum: f64,
    /// Exact value of the full series when it converges.
    pub total: Option<f64>,
    /// `total − sum` when the series converges.
    pub tail: Option<f64>,
}

/// Partial sum of the Poincaré series over `‖γ‖ ≤ radius`.
pub fn poincare_partial(p: &WeightedPotential, s: f64, radius: f64) -> Result<PoincarePartial> {
    let sum = MagnitudeSpectrum::build(p, radius).partial_sum(s, radius);
    let total = poincare_series_exact(p, s)?;
    Ok(PoincarePartial {
        s,
        radius,
        sum,
        total,
        tail: total.map(|t| (t - sum).max(0.0)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    /// Slope of `log N(r)` against `r`; `None` when undetermined.
    pub delta: Option<f64>,
    pub relative_residual: f64,
    /// `(r, N(r))` at each magnitude value in `[R/2, R]`.
    pub samples: Vec<(f64, f64)>,
}

/// `δ ≈ d log N(r) / dr`, least squares over the magnitudes in `[R/2, R]`.
pub fn critical_exponent_fit(p: &WeightedPotential, radius: f64) -> FitReport {
    fit_from_spectrum(&MagnitudeSpectrum::build(p, radius), radius)
}

pub fn fit_from_spectrum(spectrum: &MagnitudeSpectrum, radius: f64) -> FitReport {
    let samples: Vec<(f64, f64)> = spectrum
        .levels()
        .iter()
        .filter(|&&(m, _)| m >= 0.5 * radius && within(m, radius))
        .map(|&(m, _)| (m, spectrum.count_within(m)))
        .collect();
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    match linear_fit(&xs, &ys) {
        Some(fit) => FitReport {
            delta: Some(fit.slope),
            relative_residual: fit.relative_residual,
            samples,
        },
        None => FitReport {
            delta: None,
            relative_residual: f64::NAN,
            samples,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Divergence {
    Divergent,
    Convergent,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub s: f64,
    /// `(R, Σ_{‖γ‖≤R} e^{−s‖γ‖})`.
    pub grid: Vec<(f64, f64)>,
    pub slope: f64,
    pub relative_residual: f64,
    pub verdict: Divergence,
}

/// Heuristic thresholds for the finite-radius divergence test.
pub const DIVERGENCE_MAX_RESIDUAL: f64 = 0.10;
pub const CONVERGENCE_MAX_INCREMENT: f64 = 1e-2;

/// Partial sums at `s` over `R ∈ [10, 30]·(mean weight)`: linear growth
/// with small residual reads DIVERGENT; a vanishing relative increment reads
/// CONVERGENT.
pub fn divergence_verdict_at(p: &WeightedPotential, s: f64) -> DivergenceReport {
    let unit = p.mean_weight();
    let radii: Vec<f64> = (10..=30).map(|i| i as f64 * unit).collect();
    let spectrum = MagnitudeSpectrum::build(p, *radii.last().expect("grid"));
    let grid: Vec<(f64, f64)> = radii.iter().map(|&r| (r, spectrum.partial_sum(s, r))).collect();
    let xs: Vec<f64> = grid.iter().map(|g| g.0).collect();
    let ys: Vec<f64> = grid.iter().map(|g| g.1).collect();
    let fit = linear_fit(&xs, &ys).expect("grid has distinct radii");
    let (first, last) = (ys[0], ys[ys.len() - 1]);
    let increment = (last - first) / last;
    let verdict = if fit.slope > 0.0 && fit.relative_residual < DIVERGENCE_MAX_RESIDUAL && increment > 10.0 * CONVERGENCE_MAX_INCREMENT {
        Divergence::Divergent
    } else if increment < CONVERGENCE_MAX_INCREMENT {
        Divergence::Convergent
    } else {
        Divergence::Undetermined
    };
    DivergenceReport {
        s,
        grid,
        slope: fit.slope,
        relative_residual: fit.relative_residual,
        verdict,
    }
}

/// Divergence test at the critical exponent.
pub fn divergence_verdict(p: &WeightedPotential) -> Result<DivergenceReport> {
    let delta = critical_exponent_spectral(p, 1e-13)?;
    Ok(divergence_verdict_at(p, delta))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub delta_spectral: f64,
    pub delta_fit: Option<f64>,
    pub fit_residual: f64,
    /// `(R, N(R))` samples behind the fit.
    pub samples: Vec<(f64, f64)>,
    pub divergence: DivergenceReport,
}

pub fn exponent_report(p: &WeightedPotential, fit_radius: f64, tol: f64) -> Result<ExponentReport> {
    let delta_spectral = critical_exponent_spectral(p, tol)?;
    let fit = critical_exponent_fit(p, fit_radius);
    Ok(ExponentReport {
        delta_spectral,
        delta_fit: fit.delta,
        fit_residual: fit.relative_residual,
        samples: fit.samples,
        divergence: divergence_verdict_at(p, delta_spectral),
    })
}

/// `N(R)·e^{−δR}` at each radius; bounded for the counting estimate.
pub fn counting_constants(p: &WeightedPotential, delta: f64, radii: &[f64]) -> Vec<(f64, f64)> {
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let spectrum = MagnitudeSpectrum::build(p, rmax);
    radii
        .iter()
        .map(|&r| (r, spectrum.count_within(r) * (-delta * r).exp()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::ball_size;
    use crate::word::Alphabet;

    fn alpha(k: usize) -> Alphabet {
        Alphabet::new(k).unwrap()
    }

    #[test]
    fn unit_exponents_closed_form() {
        let d2 = critical_exponent_spectral(&WeightedPotential::unit(alpha(2)), 1e-13).unwrap();
        assert!((d2 - 3f64.ln()).abs() < 1e-9);
        let d3 = critical_exponent_spectral(&WeightedPotential::unit(alpha(3)), 1e-13).unwrap();
        assert!((d3 - 5f64.ln()).abs() < 1e-9);
    }

    /// Independent scalar route: `(1−x)²(1+x) = 4x³`, `x = e^{−δ}`.
    #[test]
    fn two_class_exponent_matches_scalar_root() {
        let f = |x: f64| (1.0 - x).powi(2) * (1.0 + x) - 4.0 * x.powi(3);
        let (mut lo, mut hi) = (1.0 / 3.0, 0.5); // δ ∈ (log 2, log 3)
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let x = 0.5 * (lo + hi);
        let expect = -x.ln();
        let p = WeightedPotential::new(alpha(2), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        let got = critical_exponent_spectral(&p, 1e-13).unwrap();
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
        assert!(got > 2f64.ln() && got < 3f64.ln());
    }

    #[test]
    fn bracket_failure_is_reported() {
        let p = WeightedPotential::unit(alpha(2));
        assert!(matches!(
            critical_exponent_in(&p, 1e-12, 2.0, 3.0),
            Err(Error::BracketFailure { .. })
        ));
    }

    #[test]
    fn exponent_independent_of_bracket() {
        let p = WeightedPotential::new(alpha(2), vec![0.6, 1.9, 1.2, 2.4]).unwrap();
        let a = critical_exponent_in(&p, 1e-13, 1e-3, 10.0).unwrap();
        let b = critical_exponent_in(&p, 1e-13, 0.1, 80.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn sphere_counts_no_backtracking() {
        let s = MagnitudeSpectrum::build(&WeightedPotential::unit(alpha(2)), 5.0);
        let counts: Vec<f64> = s.levels().iter().map(|l| l.1).collect();
        assert_eq!(counts, vec![1.0, 4.0, 12.0, 36.0, 108.0, 324.0]);
    }

    #[test]
    fn spectrum_matches_enumeration() {
        let p = WeightedPotential::new(alpha(2), vec![0.7, 1.3, 0.9, 2.1]).unwrap();
        let spectrum = MagnitudeSpectrum::build(&p, 6.0);
        for r in [0.0, 0.7, 1.5, 2.2, 4.0, 6.0] {
            assert_eq!(spectrum.count_within(r), ball_size(r, &p.magnitude()).unwrap() as f64, "r={r}");
        }
    }

    #[test]
    fn discounted_matches_partial_sum() {
        let p = WeightedPotential::new(alpha(2), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        let plain = MagnitudeSpectrum::build(&p, 9.0).partial_sum(0.8, 9.0);
        let disc = MagnitudeSpectrum::discounted(&p, 9.0, 0.8).partial_sum(0.0, 9.0);
        assert!((plain - disc).abs() < 1e-12 * plain);
    }

    #[test]
    fn fit_close_to_spectral() {
        let p = WeightedPotential::unit(alpha(2));
        let fit = critical_exponent_fit(&p, 12.0);
        assert!((fit.delta.unwrap() - 3f64.ln()).abs() < 0.01);
        let degenerate = critical_exponent_fit(&p, 0.5);
        assert!(degenerate.delta.is_none());
    }

    #[test]
    fn poincare_partial_examples() {
        let p = WeightedPotential::unit(alpha(2));
        let s = 3f64.ln();
        let q = poincare_partial(&p, s, 10.0).unwrap();
        assert!((q.sum - (1.0 + 40.0 / 3.0)).abs() < 1e-10);
        assert!(q.total.is_none());
        let s2 = 2.0 * s;
        let q10 = poincare_partial(&p, s2, 10.0).unwrap();
        let q20 = poincare_partial(&p, s2, 20.0).unwrap();
        assert!((q20.sum - q10.sum).abs() < 1e-4);
        // Q(2 log 3) = 1 + Σ 4·3^{n−1}·9^{−n} = 1 + (4/9)/(1 − 1/3) = 5/3
        assert!((q10.total.unwrap() - 5.0 / 3.0).abs() < 1e-12);
        assert!(q10.tail.unwrap() < 1e-4 && q10.tail.unwrap() > 0.0);
        assert_eq!(poincare_partial(&p, s, 0.0).unwrap().sum, 1.0);
    }

    #[test]
    fn verdicts() {
        let p = WeightedPotential::unit(alpha(2));
        let v = divergence_verdict(&p).unwrap();
        assert_eq!(v.verdict, Divergence::Divergent);
        assert!((v.slope - 4.0 / 3.0).abs() < 1e-6);
        let d = critical_exponent_spectral(&p, 1e-13).unwrap();
        assert_eq!(divergence_verdict_at(&p, d + 0.5).verdict, Divergence::Convergent);
        let q = WeightedPotential::new(alpha(2), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(divergence_verdict(&q).unwrap().verdict, Divergence::Divergent);
    }

    #[test]
    fn exponent_decreases_with_weights() {
        let base = vec![1.0, 1.3, 0.8, 2.0];
        let d0 = critical_exponent_spectral(&WeightedPotential::new(alpha(2), base.clone()).unwrap(), 1e-13).unwrap();
        for i in 0..4 {
            let mut w = base.clone();
            w[i] += 0.25;
            let d = critical_exponent_spectral(&WeightedPotential::new(alpha(2), w).unwrap(), 1e-13).unwrap();
            assert!(d < d0);
        }
    }
}
