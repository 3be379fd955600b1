//! The experiment bodies behind each subcommand. Every function is pure:
//! it returns the report files as strings and leaves I/O to the caller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::config::{Diagnostic, ExperimentConfig};
use super::{CliError, OutputFile, WithOperation};
use crate::ball::within;
use crate::cylinder::{words_of_length, Cylinder};
use crate::gps::{
    bms_invariance_defect, convexity_experiment, duality_gap, entropy_gap_for, gps_defect, rigidity_statistic, BmsMeasure, Growth,
    Strictness,
};
use crate::green::{green_potential, harmonic_cylinder_mass, monte_carlo_hit, solve_first_passage, MonteCarlo};
use crate::growth::{critical_exponent_spectral, exponent_report, MagnitudeSpectrum};
use crate::measure::{auto_radius, coarse_uniqueness_ratio, markov_ps, patterson_construct, quasi_invariance_defect};
use crate::potential::{cocycle_identity_defect, Cocycle, WeightedPotential};
use crate::sample::{random_cocycle_triples, random_triples, random_word};
use crate::shadow::{conical_coverage, nesting_check, ray_normalized_masses, shadow_lemma_stats, subgroup_conical_coverage};
use crate::word::Alphabet;

/// Tolerance for quantities that are exact in this model.
pub const EXACT_DEFECT_TOL: f64 = 1e-9;
const MEASURE_TOL: f64 = 1e-13;

fn config_err(d: Vec<Diagnostic>) -> CliError {
    CliError::Config(d)
}

fn json_file(name: &str, value: &Value) -> OutputFile {
    let mut contents = serde_json::to_string_pretty(value).expect("reports serialize");
    contents.push('\n');
    OutputFile {
        name: name.to_string(),
        contents,
    }
}

fn csv_file(name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> OutputFile {
    let mut contents = String::from(header);
    contents.push('\n');
    for r in rows {
        contents.push_str(&r);
        contents.push('\n');
    }
    OutputFile {
        name: name.to_string(),
        contents,
    }
}

fn weights_json(p: &WeightedPotential) -> Value {
    let m: Map<String, Value> = p
        .alphabet()
        .letters()
        .map(|l| (Alphabet::letter_name(l).to_string(), json!(p.weight(l))))
        .collect();
    Value::Object(m)
}

fn require_seed(seed: Option<u64>, experiment: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| {
        config_err(vec![Diagnostic {
            path: "seed".into(),
            message: format!("`{experiment}` draws random samples and needs a seed (--seed or \"seed\")"),
        }])
    })
}

pub fn exponent(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>, CliError> {
    let e = &cfg.exponent;
    let p = cfg.potential(&e.potential, "exponent.potential").map_err(config_err)?;
    let rep = exponent_report(&p, e.fit_radius, e.tol).op("exponent report")?;
    let rmax = e.radii.iter().copied().fold(0.0, f64::max);
    let spectrum = MagnitudeSpectrum::build(&p, rmax);
    let rows = e.radii.iter().map(|&r| {
        format!(
            "{r},{},{},{}",
            spectrum.count_within(r),
            spectrum.partial_sum(rep.delta_spectral, r),
            rep.delta_spectral
        )
    });
    let report = json!({
        "experiment": "exponent",
        "inputs": {"potential": e.potential, "weights": weights_json(&p), "fit_radius": e.fit_radius, "tol": e.tol},
        "delta_spectral": rep.delta_spectral,
        "delta_fit": rep.delta_fit,
        "fit_residual": rep.fit_residual,
        "fit_gap": rep.delta_fit.map(|d| (d - rep.delta_spectral).abs()),
        "samples": rep.samples,
        "divergence": rep.divergence,
        "verdict": rep.divergence.verdict,
    });
    Ok(vec![
        json_file("report.json", &report),
        csv_file("growth.csv", "R,N(R),partial_sum,s", rows),
    ])
}

pub fn psmeasure(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.psmeasure;
    let p = cfg.potential(&c.potential, "psmeasure.potential").map_err(config_err)?;
    let mu = markov_ps(&p, MEASURE_TOL).op("markov_ps")?;
    let sigma = Cocycle::primal(&p);
    let mut qi = Vec::new();
    let mut qi_max: f64 = 0.0;
    for len in 0..=c.qi_max_len {
        for g in words_of_length(p.alphabet(), len) {
            let defect = quasi_invariance_defect(&mu, &sigma, &g, len + 2).op("quasi_invariance_defect")?;
            qi_max = qi_max.max(defect);
            qi.push(json!({"g": g.to_string(), "depth": len + 2, "defect": defect}));
        }
    }
    let mut schedule = Vec::new();
    for &off in &c.s_offsets {
        let s = mu.delta + off;
        let (radius, predicted_tail) = match c.radius {
            Some(r) => (r, None),
            None => {
                let (r, t) = auto_radius(&p, s, c.rel_tail, c.max_radius).op("auto_radius")?;
                (r, Some(t))
            }
        };
        let emp = patterson_construct(&p, s, radius, c.depth).op("patterson_construct")?;
        let (lo, hi) = coarse_uniqueness_ratio(&emp, &mu, c.depth).op("coarse_uniqueness_ratio")?;
        schedule.push(json!({
            "s_offset": off,
            "s": s,
            "R": radius,
            "tail_target_met": predicted_tail.map(|t| t < c.rel_tail),
            "empirical": emp,
            "ratio_min": lo,
            "ratio_max": hi,
        }));
    }
    let dual = markov_ps(&p.dual(), MEASURE_TOL).op("markov_ps (dual)")?;
    let atoms: Vec<Value> = (1..=8).map(|d| json!({"depth": d, "max_mass": mu.max_cylinder_mass(d)})).collect();
    let report = json!({
        "experiment": "psmeasure",
        "inputs": {"potential": c.potential, "weights": weights_json(&p), "depth": c.depth, "s_offsets": c.s_offsets},
        "delta": mu.delta,
        "row_sum_defect": mu.row_sum_defect(),
        "quasi_invariance_max_defect": qi_max,
        "quasi_invariance": qi,
        "schedule": schedule,
        "max_transition": mu.max_transition(),
        "max_cylinder_mass": atoms,
        "dual_measure": dual,
        "dual_equals_primal": dual == mu,
    });
    Ok(vec![
        json_file("measure.json", &serde_json::to_value(&mu).expect("serialize")),
        json_file("report.json", &report),
    ])
}

pub fn shadowlemma(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.shadowlemma;
    let p = cfg.potential(&c.potential, "shadowlemma.potential").map_err(config_err)?;
    let mu = markov_ps(&p, MEASURE_TOL).op("markov_ps")?;
    let stats = shadow_lemma_stats(&mu, &p, c.m, c.radius).op("shadow_lemma_stats")?;
    let inner: Vec<f64> = stats
        .rows
        .iter()
        .filter(|r| within(r.magnitude, c.radius - 2.0))
        .map(|r| r.normalized_mass)
        .collect();
    let inner_min = inner.iter().copied().fold(f64::INFINITY, f64::min);
    let inner_max = inner.iter().copied().fold(0.0, f64::max);
    let change = ((stats.min - inner_min).abs() / inner_min).max((stats.max - inner_max).abs() / inner_max);
    let ray = cfg.word(&c.ray, "shadowlemma.ray").map_err(|d| config_err(vec![d]))?;
    let ray_values = ray_normalized_masses(&mu, &p, &ray, c.m, c.ray_max);
    let nesting = match c.nesting_radius {
        Some(r) => Some(nesting_check(&p, c.m, r).op("nesting_check")?),
        None => None,
    };
    let rows = stats.rows.iter().map(|r| {
        format!("{},{},{},{},{}", r.gamma, r.length, r.magnitude, r.shadow_mass, r.normalized_mass)
    });
    let report = json!({
        "experiment": "shadowlemma",
        "inputs": {"potential": c.potential, "weights": weights_json(&p), "m": c.m, "R": c.radius},
        "delta": mu.delta,
        "band": {"min": stats.min, "max": stats.max},
        "band_at_R_minus_2": {"min": inner_min, "max": inner_max},
        "relative_change": change,
        "ray": {"word": c.ray, "normalized_masses": ray_values},
        "nesting": nesting,
    });
    Ok(vec![
        json_file("summary.json", &report),
        csv_file("shadows.csv", "gamma,length,magnitude,shadow_mass,normalized_mass", rows),
    ])
}

pub fn gpscheck(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.gpscheck;
    let seed = require_seed(seed, "gpscheck")?;
    let alphabet = cfg.alphabet().map_err(|d| config_err(vec![d]))?;
    let cocycle_sample = random_cocycle_triples(&alphabet, c.samples, seed);
    let gps_sample = random_triples(&alphabet, c.samples, seed.wrapping_add(1));
    let mut out = Vec::new();
    for (i, name) in c.potentials.iter().enumerate() {
        let p = cfg.potential(name, &format!("gpscheck.potentials[{i}]")).map_err(config_err)?;
        let cocycle = cocycle_identity_defect(&Cocycle::primal(&p), &cocycle_sample);
        let cocycle_dual = cocycle_identity_defect(&Cocycle::dual(&p), &cocycle_sample);
        let gps = gps_defect(&p, &gps_sample).op("gps_defect")?;
        let bms = BmsMeasure::new(&p).op("BMS measure")?;
        let mut bms_rows = Vec::new();
        let mut bms_max: f64 = 0.0;
        for (j, w) in c.bms_elements.iter().enumerate() {
            let g = cfg.word(w, &format!("gpscheck.bms_elements[{j}]")).map_err(|d| config_err(vec![d]))?;
            let depth = c.bms_depth.max(g.len() + 1);
            let defect = bms_invariance_defect(&bms, &g, depth).op("bms_invariance_defect")?;
            bms_max = bms_max.max(defect);
            bms_rows.push(json!({"g": w, "depth": depth, "defect": defect}));
        }
        let gap = duality_gap(&p, c.duality_radius).op("duality_gap")?;
        let worst = cocycle.max(cocycle_dual).max(gps).max(bms_max).max(gap);
        out.push(json!({
            "potential": name,
            "weights": weights_json(&p),
            "cocycle_identity_defect": cocycle,
            "dual_cocycle_identity_defect": cocycle_dual,
            "gps_defect": gps,
            "bms_invariance": bms_rows,
            "duality_gap": gap,
            "max_defect": worst,
            "exact": worst <= EXACT_DEFECT_TOL,
        }));
    }
    let report = json!({
        "experiment": "gpscheck",
        "inputs": {"samples": c.samples, "seed": seed, "duality_radius": c.duality_radius},
        "potentials": out,
    });
    Ok(vec![json_file("report.json", &report)])
}

pub fn green(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.green;
    let seed = require_seed(seed, "green")?;
    let name = match (&c.walk, cfg.walks.len()) {
        (Some(w), _) => w.clone(),
        (None, 1) => cfg.walks.keys().next().expect("one walk").clone(),
        _ => {
            return Err(config_err(vec![Diagnostic {
                path: "green.walk".into(),
                message: "name the walk to study".into(),
            }]))
        }
    };
    let walk = cfg.walk(&name, "green.walk").map_err(config_err)?;
    let fp = solve_first_passage(&walk, c.tol).op("solve_first_passage")?;
    let gp = green_potential(&fp).op("green_potential")?;
    let delta = critical_exponent_spectral(&gp, 1e-13).op("critical_exponent_spectral")?;
    let alphabet = *walk.alphabet();
    let mc = |paths: u64, tag: u64| MonteCarlo {
        paths,
        cap: c.cap,
        kill_distance: c.kill_distance,
        seed: seed ^ (tag << 40),
    };

    let mut letters = Vec::new();
    let mut rows = Vec::new();
    for l in alphabet.letters() {
        let target = crate::word::ReducedWord::letter(l);
        let est = monte_carlo_hit(&walk, &target, &mc(c.paths, l as u64 + 1)).op("monte_carlo_hit")?;
        let f = fp.get(l);
        rows.push(format!("{},{},{},{}", Alphabet::letter_name(l), f, est.mean, est.stderr));
        letters.push(json!({
            "letter": Alphabet::letter_name(l).to_string(),
            "F": f,
            "mc_estimate": est.mean,
            "stderr": est.stderr,
            "within_3_sigma": est.agrees(f, 3.0),
        }));
    }

    let ps = markov_ps(&gp, MEASURE_TOL).op("markov_ps")?;
    let mut harmonic = Vec::new();
    for (i, w) in c.cylinders.iter().enumerate() {
        let stem = cfg.word(w, &format!("green.cylinders[{i}]")).map_err(|d| config_err(vec![d]))?;
        let est = harmonic_cylinder_mass(&walk, &Cylinder::new(stem.clone()), &mc(c.paths, 100 + i as u64))
            .op("harmonic_cylinder_mass")?;
        let exact = ps.cylinder_mass(&stem);
        harmonic.push(json!({
            "cylinder": w,
            "estimate": est.mean,
            "stderr": est.stderr,
            "ps_mass": exact,
            "within_3_sigma": est.agrees(exact, 3.0),
        }));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xfeed << 40));
    let mut pairs = Vec::new();
    let (mut outside, mut unresolved) = (0usize, 0usize);
    for i in 0..c.pairs {
        let (lp, lq) = (rng.gen_range(0..=2), rng.gen_range(0..=2));
        let p = random_word(&mut rng, &alphabet, lp);
        let q = random_word(&mut rng, &alphabet, lq);
        let path = p.inverse().multiply(&q);
        let est = monte_carlo_hit(&walk, &path, &mc(c.pair_paths, 1000 + i as u64)).op("monte_carlo_hit")?;
        let exact = gp.eval(&p, &q);
        let (estimate, stderr, agrees) = if est.mean > 0.0 {
            let nl = est.neg_log();
            let ok = nl.agrees(exact, 3.0);
            if !ok {
                outside += 1;
            }
            (Some(nl.mean), Some(nl.stderr), Some(ok))
        } else {
            unresolved += 1;
            (None, None, None)
        };
        pairs.push(json!({"p": p.to_string(), "q": q.to_string(), "green_distance": exact,
            "mc_neg_log_F": estimate, "stderr": stderr, "within_3_sigma": agrees}));
    }

    let dual_fp = solve_first_passage(&walk.dual(), c.tol).op("solve_first_passage (dual walk)")?;
    let dual_gp = green_potential(&dual_fp).op("green_potential")?;
    let dual_gap = gp
        .dual()
        .weights()
        .iter()
        .zip(dual_gp.weights())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let report = json!({
        "experiment": "green",
        "inputs": {"walk": name, "steps": walk.probabilities(), "paths": c.paths, "cap": c.cap,
                   "kill_distance": c.kill_distance, "seed": seed},
        "first_passage": fp.values(),
        "iterations": fp.iterations,
        "fixed_point_residual": fp.residual(&walk),
        "green_weights": weights_json(&gp),
        "delta_green": delta,
        "letters": letters,
        "harmonic": harmonic,
        "multiplicativity": {"pairs": pairs, "outside_3_sigma": outside, "unresolved": unresolved},
        "dual_walk_weight_gap": dual_gap,
    });
    Ok(vec![
        json_file("report.json", &report),
        csv_file("first_passage.csv", "letter,F,mc_estimate,stderr", rows),
    ])
}

pub fn rigidity(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.rigidity;
    let mut out = Vec::new();
    for (i, [a, b]) in c.pairs.iter().enumerate() {
        let p0 = cfg.potential(a, &format!("rigidity.pairs[{i}][0]")).map_err(config_err)?;
        let p1 = cfg.potential(b, &format!("rigidity.pairs[{i}][1]")).map_err(config_err)?;
        let r = rigidity_statistic(&p0, &p1, c.radius).op("rigidity_statistic")?;
        out.push(json!({"p0": a, "p1": b, "statistic": r, "verdict": r.verdict}));
    }
    let report = json!({"experiment": "rigidity", "inputs": {"R": c.radius}, "pairs": out});
    Ok(vec![json_file("report.json", &report)])
}

pub fn convexity(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.convexity;
    let mut out = Vec::new();
    for (i, [a, b]) in c.pairs.iter().enumerate() {
        let p0 = cfg.potential(a, &format!("convexity.pairs[{i}][0]")).map_err(config_err)?;
        let p1 = cfg.potential(b, &format!("convexity.pairs[{i}][1]")).map_err(config_err)?;
        let mut grid = Vec::new();
        for &l in &c.lambdas {
            grid.push(convexity_experiment(&p0, &p1, l).op("convexity_experiment")?);
        }
        let max_delta = grid.iter().map(|g| g.delta_lambda).fold(f64::NEG_INFINITY, f64::max);
        let rig = rigidity_statistic(&p0, &p1, c.radius).op("rigidity_statistic")?;
        let consistent = match rig.verdict {
            Growth::Bounded => grid.iter().all(|g| g.verdict == Strictness::Equal),
            Growth::Linear => grid.iter().all(|g| g.verdict == Strictness::Strict),
            Growth::Undetermined => false,
        };
        out.push(json!({
            "p0": a,
            "p1": b,
            "grid": grid,
            "max_delta_lambda": max_delta,
            "never_above_one": max_delta <= 1.0 + EXACT_DEFECT_TOL,
            "rigidity_verdict": rig.verdict,
            "consistent_with_rigidity": consistent,
        }));
    }
    let report = json!({"experiment": "convexity", "inputs": {"lambdas": c.lambdas}, "pairs": out});
    Ok(vec![json_file("report.json", &report)])
}

pub fn gap(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.gap;
    let p = cfg.potential(&c.potential, "gap.potential").map_err(config_err)?;
    let g = entropy_gap_for(&p, c.sub_rank).op("entropy_gap")?;
    let report = json!({
        "experiment": "gap",
        "inputs": {"potential": c.potential, "weights": weights_json(&p), "sub_rank": c.sub_rank},
        "delta_sub": g.delta_sub,
        "delta_ambient": g.delta_ambient,
        "strict_gap": g.delta_sub < g.delta_ambient,
        "subgroup_divergence": g.divergence,
        "verdict": g.divergence.verdict,
    });
    Ok(vec![json_file("report.json", &report)])
}

pub fn conical(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.conical;
    let p = cfg.potential(&c.potential, "conical.potential").map_err(config_err)?;
    let mu = markov_ps(&p, MEASURE_TOL).op("markov_ps")?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut worst: f64 = 0.0;
    for &n in &c.depths {
        let cov = conical_coverage(&mu, &p, c.m, n, c.window).op("conical_coverage")?;
        worst = worst.max((cov.mass - 1.0).abs());
        let sub = match c.sub_rank {
            Some(k) => Some(subgroup_conical_coverage(&mu, &p, k, c.m, n, c.window).op("subgroup_conical_coverage")?),
            None => None,
        };
        rows.push(match &sub {
            Some((s, f)) => format!("{n},{},{},{},{},{},{}", cov.window, cov.elements, cov.mass, s.elements, s.mass, f),
            None => format!("{n},{},{},{},,,", cov.window, cov.elements, cov.mass),
        });
        entries.push(json!({"n": n, "coverage": cov, "subgroup": sub.map(|(s, f)| json!({"coverage": s, "factor_cylinder_mass": f}))}));
    }
    let report = json!({
        "experiment": "conical",
        "inputs": {"potential": c.potential, "weights": weights_json(&p), "m": c.m, "sub_rank": c.sub_rank},
        "max_deficit": worst,
        "full": worst <= EXACT_DEFECT_TOL,
        "depths": entries,
    });
    Ok(vec![
        json_file("report.json", &report),
        csv_file("coverage.csv", "n,window,elements,mass,sub_elements,sub_mass,factor_cylinder_mass", rows),
    ])
}

pub fn bms(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>, CliError> {
    let c = &cfg.bms;
    let p = cfg.potential(&c.potential, "bms.potential").map_err(config_err)?;
    let b = BmsMeasure::new(&p).op("BMS measure")?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, w) in c.elements.iter().enumerate() {
        let g = cfg.word(w, &format!("bms.elements[{i}]")).map_err(|d| config_err(vec![d]))?;
        let depth = c.depth.max(g.len() + 1);
        let defect = bms_invariance_defect(&b, &g, depth).op("bms_invariance_defect")?;
        worst = worst.max(defect);
        rows.push(json!({"g": w, "depth": depth, "defect": defect}));
    }
    let report = json!({
        "experiment": "bms",
        "inputs": {"potential": c.potential, "weights": weights_json(&p), "depth": c.depth},
        "delta": b.delta,
        "mu": b.mu,
        "mu_bar": b.mu_bar,
        "defects": rows,
        "max_defect": worst,
        "invariant": worst <= EXACT_DEFECT_TOL,
    });
    Ok(vec![json_file("report.json", &report)])
}
