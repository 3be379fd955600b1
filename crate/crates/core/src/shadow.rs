//! Shadows `S_ε(γ) = γ(M ∖ B_ε(γ⁻¹))` with `ε = 2^{-m}`, and the Shadow
//! Lemma experiments built on them.
//!
//! `B_ε(x) = {y : cp(x, y) ≥ m + 1}` is the cylinder on the first `m + 1`
//! letters of `x`, and empty when `x` is shorter than that (in particular
//! `B_ε(e) = ∅`). Every shadow is an exact [`CylinderSet`]; for
//! `|γ| ≥ m + 1` it is the single cylinder on the first `|γ| − m` letters
//! of `γ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::ball::{ball, for_each_in_ball};
use crate::cylinder::{words_of_length, CylinderSet};
use crate::error::{Error, Result};
use crate::measure::BoundaryMeasure;
use crate::potential::WeightedPotential;
use crate::word::{Alphabet, ReducedWord};

/// `B_ε(γ⁻¹)` in `M`.
pub fn ball_around_inverse(alphabet: Alphabet, g: &ReducedWord, m: usize) -> CylinderSet {
    if g.len() < m + 1 {
        CylinderSet::empty(alphabet)
    } else {
        CylinderSet::single(alphabet, g.inverse().prefix(m + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shadow {
    pub gamma: ReducedWord,
    pub m: usize,
    pub set: CylinderSet,
}

impl Shadow {
    pub fn eps(&self) -> f64 {
        0.5f64.powi(self.m as i32)
    }
}

pub fn shadow(alphabet: Alphabet, g: &ReducedWord, m: usize) -> Shadow {
    let set = ball_around_inverse(alphabet, g, m).complement().act(g);
    Shadow {
        gamma: g.clone(),
        m,
        set,
    }
}

/// One row of a shadow-mass table.
#[derive(Debug, Clone, Serialize)]
pub struct ShadowRow {
    pub gamma: String,
    pub length: usize,
    pub magnitude: f64,
    pub shadow_mass: f64,
    /// `μ(S_ε(γ))·e^{δ‖γ‖}`.
    pub normalized_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShadowLemmaStats {
    pub m: usize,
    pub radius: f64,
    pub min: f64,
    pub max: f64,
    /// Rows for every `γ ≠ e` in the ball, in lexicographic order of `γ`.
    #[serde(skip)]
    pub rows: Vec<ShadowRow>,
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("shadow parameter m must be at least 1 (ε < 1)".into()));
    }
    Ok(())
}

/// Extremal normalized shadow masses over `0 < ‖γ‖ ≤ R`.
pub fn shadow_lemma_stats(mu: &BoundaryMeasure, p: &WeightedPotential, m: usize, radius: f64) -> Result<ShadowLemmaStats> {
    check_m(m)?;
    let alphabet = *p.alphabet();
    let mut elements: Vec<(ReducedWord, f64)> = ball(radius, &p.magnitude())?.filter(|(g, _)| !g.is_identity()).collect();
    elements.sort_by(|a, b| a.0.cmp(&b.0));
    let rows: Vec<ShadowRow> = elements
        .par_iter()
        .map(|(g, norm)| {
            let mass = mu.mass(&shadow(alphabet, g, m).set);
            ShadowRow {
                gamma: g.to_string(),
                length: g.len(),
                magnitude: *norm,
                shadow_mass: mass,
                normalized_mass: mass * (mu.delta * norm).exp(),
            }
        })
        .collect();
    let min = rows.iter().map(|r| r.normalized_mass).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.normalized_mass).fold(0.0, f64::max);
    Ok(ShadowLemmaStats {
        m,
        radius,
        min,
        max,
        rows,
    })
}

/// `μ(S_ε(gⁿ))·e^{δ‖gⁿ‖}` for `n = 1..=n_max`.
pub fn ray_normalized_masses(mu: &BoundaryMeasure, p: &WeightedPotential, g: &ReducedWord, m: usize, n_max: usize) -> Vec<f64> {
    (1..=n_max)
        .map(|n| {
            let gn = g.pow(n);
            mu.mass(&shadow(*p.alphabet(), &gn, m).set) * (mu.delta * p.word_weight(gn.letters())).exp()
        })
        .collect()
}

/// Smallest `m' ≥ m` with `S_m(β) ⊆ S_{m'}(α)`; always exists because the
/// shadow of `α` is `M` once `m' ≥ |α|`.
pub fn nesting_parameter(alphabet: Alphabet, alpha: &ReducedWord, beta: &ReducedWord, m: usize) -> usize {
    let sb = shadow(alphabet, beta, m).set;
    (m..)
        .find(|&mp| sb.is_subset(&shadow(alphabet, alpha, mp).set))
        .expect("shadow of α is M for large m'")
}

#[derive(Debug, Clone, Serialize)]
pub struct NestingReport {
    pub m: usize,
    pub radius: f64,
    /// Worst nesting parameter over all intersecting pairs.
    pub m_prime: usize,
    pub pairs_checked: u64,
    pub intersecting_pairs: u64,
    /// Pairs attaining `m_prime`, as `(α, β)`; at most 20 listed.
    pub witnesses: Vec<(String, String)>,
}

/// Over all pairs `‖α‖ ≤ ‖β‖ ≤ R` whose `m`-shadows meet, the smallest `m'`
/// such that every `S_m(β) ⊆ S_{m'}(α)`.
pub fn nesting_check(p: &WeightedPotential, m: usize, radius: f64) -> Result<NestingReport> {
    let alphabet = *p.alphabet();
    let elements: Vec<(ReducedWord, f64)> = ball(radius, &p.magnitude())?.collect();
    let shadows: Vec<CylinderSet> = elements.iter().map(|(g, _)| shadow(alphabet, g, m).set).collect();
    let per_beta: Vec<(u64, u64, usize, Vec<(String, String)>)> = (0..elements.len())
        .into_par_iter()
        .map(|j| {
            let (beta, nb) = &elements[j];
            let (mut checked, mut meeting, mut worst) = (0u64, 0u64, m);
            let mut wit = Vec::new();
            for (i, (alpha, na)) in elements.iter().enumerate() {
                if na > nb {
                    break; // sorted by magnitude
                }
                checked += 1;
                if shadows[i].is_disjoint(&shadows[j]) {
                    continue;
                }
                meeting += 1;
                let mp = nesting_parameter(alphabet, alpha, beta, m);
                if mp > worst {
                    worst = mp;
                    wit.clear();
                }
                if mp == worst && wit.len() < 20 {
                    wit.push((alpha.to_string(), beta.to_string()));
                }
            }
            (checked, meeting, worst, wit)
        })
        .collect();
    let m_prime = per_beta.iter().map(|r| r.2).max().unwrap_or(m);
    Ok(NestingReport {
        m,
        radius,
        m_prime,
        pairs_checked: per_beta.iter().map(|r| r.0).sum(),
        intersecting_pairs: per_beta.iter().map(|r| r.1).sum(),
        witnesses: per_beta
            .into_iter()
            .filter(|r| r.2 == m_prime)
            .flat_map(|r| r.3)
            .take(20)
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VitaliCover {
    pub selected: Vec<String>,
    pub m_prime: usize,
    pub disjoint: bool,
    pub covered: bool,
}

/// Greedy disjoint subfamily in nondecreasing magnitude order, with the
/// smallest `m'` for which the enlarged shadows of the selection cover the
/// union of all `m`-shadows.
pub fn vitali_cover(p: &WeightedPotential, family: &[ReducedWord], m: usize) -> VitaliCover {
    let alphabet = *p.alphabet();
    let mut order: Vec<&ReducedWord> = family.iter().collect();
    order.sort_by(|a, b| {
        p.word_weight(a.letters())
            .total_cmp(&p.word_weight(b.letters()))
            .then_with(|| a.cmp(b))
    });
    order.dedup();
    let mut chosen: Vec<(&ReducedWord, CylinderSet)> = Vec::new();
    for g in &order {
        let s = shadow(alphabet, g, m).set;
        if chosen.iter().all(|(_, c)| c.is_disjoint(&s)) {
            chosen.push((g, s));
        }
    }
    let disjoint = chosen
        .iter()
        .enumerate()
        .all(|(i, (_, a))| chosen[i + 1..].iter().all(|(_, b)| a.is_disjoint(b)));
    let target = CylinderSet::union_all(alphabet, order.iter().map(|g| shadow(alphabet, g, m).set).collect::<Vec<_>>().iter());
    let bound = m + order.iter().map(|g| g.len()).max().unwrap_or(0);
    let mut m_prime = m;
    let mut covered = false;
    while m_prime <= bound {
        let cover = CylinderSet::union_all(alphabet, chosen.iter().map(|(g, _)| shadow(alphabet, g, m_prime).set).collect::<Vec<_>>().iter());
        if target.is_subset(&cover) {
            covered = true;
            break;
        }
        m_prime += 1;
    }
    VitaliCover {
        selected: chosen.iter().map(|(g, _)| g.to_string()).collect(),
        m_prime,
        disjoint,
        covered,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Coverage {
    pub n: f64,
    pub window: f64,
    pub elements: u64,
    pub mass: f64,
}

/// `μ(∪ S_ε(γ))` over `n ≤ ‖γ‖ ≤ n + window` with `keep(γ)`.
pub fn conical_coverage_filtered(
    mu: &BoundaryMeasure,
    p: &WeightedPotential,
    m: usize,
    n: f64,
    window: f64,
    keep: impl Fn(&[crate::word::Letter]) -> bool,
) -> Result<Coverage> {
    let alphabet = *p.alphabet();
    let mut stems = Vec::new();
    let mut elements = 0u64;
    for_each_in_ball(n + window, &p.magnitude(), |w, norm| {
        if norm + crate::ball::RADIUS_SLACK * n.abs().max(1.0) >= n && keep(w) {
            elements += 1;
            let g = ReducedWord::from_letters(w.to_vec()).expect("reduced");
            stems.extend_from_slice(shadow(alphabet, &g, m).set.stems());
        }
    })?;
    let union = CylinderSet::from_stems(alphabet, stems);
    Ok(Coverage {
        n,
        window,
        elements,
        mass: mu.mass(&union),
    })
}

/// Mass of the union of shadows over a magnitude annulus; the default
/// window is twice the largest weight.
pub fn conical_coverage(mu: &BoundaryMeasure, p: &WeightedPotential, m: usize, n: f64, window: Option<f64>) -> Result<Coverage> {
    conical_coverage_filtered(mu, p, m, n, window.unwrap_or(2.0 * p.max_weight()), |_| true)
}

/// Coverage by the orbit of the free factor on the first `sub_rank`
/// generators, together with the mass of the depth-`d` cylinders whose
/// stems lie in that factor (`d = ⌈n/max weight⌉ − m`, the shortest
/// shadow depth in the annulus), which shrinks to the mass of its limit set.
pub fn subgroup_conical_coverage(
    mu: &BoundaryMeasure,
    p: &WeightedPotential,
    sub_rank: usize,
    m: usize,
    n: f64,
    window: Option<f64>,
) -> Result<(Coverage, f64)> {
    if sub_rank >= p.alphabet().rank() || sub_rank < 2 {
        return Err(Error::InvalidParameter(format!(
            "free factor rank {sub_rank} must be in 2..{}",
            p.alphabet().rank()
        )));
    }
    let limit = (2 * sub_rank) as u8;
    let cov = conical_coverage_filtered(mu, p, m, n, window.unwrap_or(2.0 * p.max_weight()), |w| w.iter().all(|&l| l < limit))?;
    let depth = ((n / p.max_weight()).ceil() as usize).saturating_sub(m);
    let sub = Alphabet::new(sub_rank)?;
    let factor_mass: f64 = words_of_length(&sub, depth).iter().map(|w| mu.cylinder_mass(w)).sum();
    Ok((cov, factor_mass))
}

/// `(n, max diameter of S_ε(γ) over |γ| = n)` for `n = 0..=n_max`.
pub fn shadow_diameters(alphabet: Alphabet, m: usize, n_max: usize) -> Vec<(usize, f64)> {
    (0..=n_max)
        .map(|n| {
            let d = words_of_length(&alphabet, n)
                .iter()
                .map(|g| shadow(alphabet, g, m).set.diameter())
                .fold(0.0, f64::max);
            (n, d)
        })
        .collect()
}

/// `Σ_{|γ| = n} μ(S_ε(γ))`, bounded by the multiplicity of the shadow cover.
pub fn sphere_shadow_mass(mu: &BoundaryMeasure, m: usize, n: usize) -> f64 {
    let alphabet = *mu.alphabet();
    words_of_length(&alphabet, n)
        .iter()
        .map(|g| mu.mass(&shadow(alphabet, g, m).set))
        .sum()
}
