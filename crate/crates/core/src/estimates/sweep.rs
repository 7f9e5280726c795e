//! Deterministic parallel parameter sweeps with log-log scaling-exponent
//! fits over dyadic grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimates::{
    empirical_constant_with, EmpiricalOpts, EstimateId, Extras, RatioReport, Strategy,
};
use crate::geometry::{DyadicParams, Sign};
use crate::rng::subseed;

pub const SWEEP_BUDGET: usize = 10_000;

/// A dyadic sweep: fixed base parameters, per-key value lists to sweep,
/// optionally crossed with all eight sign patterns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub id: EstimateId,
    pub strategy: Strategy,
    pub dims: (usize, usize, usize),
    pub seed: u64,
    pub base: DyadicParams,
    pub extras: Extras,
    /// Swept parameter -> values. Keys n0,n1,n2,l0,l1,l2 address the shell
    /// parameters; anything else addresses an extras key.
    pub ranges: BTreeMap<String, Vec<f64>>,
    pub sweep_signs: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub reports: Vec<RatioReport>,
    /// Least-squares slope of ln(empirical) against ln(parameter), averaged
    /// over groups with all other swept values fixed.
    pub fitted_exponents: BTreeMap<String, f64>,
    pub max_ratio: f64,
    pub min_sharp_ratio: f64,
    pub errors: Vec<String>,
}

fn apply_key(p: &mut DyadicParams, extras: &mut Extras, key: &str, v: f64) {
    match key {
        "n0" => p.n0 = v,
        "n1" => p.n1 = v,
        "n2" => p.n2 = v,
        "l0" => p.l0 = v,
        "l1" => p.l1 = v,
        "l2" => p.l2 = v,
        other => {
            extras.insert(other.into(), v);
        }
    }
}

fn all_sign_patterns() -> Vec<(Sign, Sign, Sign)> {
    let mut out = Vec::with_capacity(8);
    for s0 in Sign::ALL {
        for s1 in Sign::ALL {
            for s2 in Sign::ALL {
                out.push((s0, s1, s2));
            }
        }
    }
    out
}

/// Least-squares slope of y against x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// One sweep member: the resolved parameter assignment.
#[derive(Clone, Debug)]
struct Member {
    p: DyadicParams,
    extras: Extras,
    assignment: BTreeMap<String, f64>,
    signs_label: String,
}

fn enumerate_members(spec: &SweepSpec) -> Result<Vec<Member>> {
    let keys: Vec<&String> = spec.ranges.keys().collect();
    let mut combos: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new()];
    for k in &keys {
        let vals = &spec.ranges[*k];
        if vals.is_empty() {
            return Err(Error::InvalidParameter(format!("empty range for {k}")));
        }
        let mut next = Vec::with_capacity(combos.len() * vals.len());
        for c in &combos {
            for v in vals {
                let mut c2 = c.clone();
                c2.insert((*k).clone(), *v);
                next.push(c2);
            }
        }
        combos = next;
    }
    let signs = if spec.sweep_signs {
        all_sign_patterns()
    } else {
        vec![spec.base.signs]
    };
    let total = combos.len() * signs.len();
    if total > SWEEP_BUDGET {
        return Err(Error::BudgetExceeded {
            got: total,
            limit: SWEEP_BUDGET,
        });
    }
    let mut members = Vec::with_capacity(total);
    for c in &combos {
        for sg in &signs {
            let mut p = spec.base;
            p.signs = *sg;
            let mut extras = spec.extras.clone();
            for (k, v) in c {
                apply_key(&mut p, &mut extras, k, *v);
            }
            members.push(Member {
                p,
                extras,
                assignment: c.clone(),
                signs_label: format!(
                    "{}{}{}",
                    sg.0.symbol(),
                    sg.1.symbol(),
                    sg.2.symbol()
                ),
            });
        }
    }
    Ok(members)
}

/// Runs the sweep in parallel with deterministic per-member seeds; reports
/// come back in enumeration order regardless of thread count.
pub fn sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    sweep_with(spec, &EmpiricalOpts::default())
}

pub fn sweep_with(spec: &SweepSpec, opts: &EmpiricalOpts) -> Result<SweepOutcome> {
    let members = enumerate_members(spec)?;
    let results: Vec<(usize, std::result::Result<RatioReport, String>)> = members
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let seed = subseed(spec.seed, &format!("sweep/{}/{i}", spec.id));
            let r = empirical_constant_with(
                spec.id, &m.p, &m.extras, spec.strategy, spec.dims, seed, opts,
            )
            .map_err(|e| format!("member {i} ({:?}): {e}", m.assignment));
            (i, r)
        })
        .collect();

    let mut reports = Vec::new();
    let mut kept_members = Vec::new();
    let mut errors = Vec::new();
    for (i, r) in results {
        match r {
            Ok(rep) => {
                reports.push(rep);
                kept_members.push(members[i].clone());
            }
            Err(e) => errors.push(e),
        }
    }

    // Per-parameter slope fits: group by everything else.
    let mut fitted = BTreeMap::new();
    for key in spec.ranges.keys() {
        let distinct_vals: std::collections::BTreeSet<u64> =
            spec.ranges[key].iter().map(|x| x.to_bits()).collect();
        if distinct_vals.len() < 2 {
            continue;
        }
        let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for (m, rep) in kept_members.iter().zip(&reports) {
            if !(rep.empirical > 0.0) {
                continue;
            }
            let mut label = m.signs_label.clone();
            for (k, v) in &m.assignment {
                if k != key {
                    label.push_str(&format!("|{k}={v:e}"));
                }
            }
            groups
                .entry(label)
                .or_default()
                .push((m.assignment[key], rep.empirical));
        }
        let mut slopes = Vec::new();
        for pts in groups.values() {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let distinct: std::collections::BTreeSet<u64> =
                xs.iter().map(|x| x.to_bits()).collect();
            if distinct.len() >= 2 {
                let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
                slopes.push(loglog_slope(&xs, &ys));
            }
        }
        if !slopes.is_empty() {
            fitted.insert(key.clone(), slopes.iter().sum::<f64>() / slopes.len() as f64);
        }
    }

    let max_ratio = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let min_sharp_ratio = reports
        .iter()
        .map(|r| r.ratio)
        .fold(f64::INFINITY, f64::min);
    Ok(SweepOutcome {
        reports,
        fitted_exponents: fitted,
        max_ratio,
        min_sharp_ratio,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law_is_exact() {
        let xs: Vec<f64> = (1..=6).map(|k| 2f64.powi(-k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(0.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn budget_guard() {
        let base = DyadicParams::new(
            [1.0, 1.0, 1.0],
            [1.0, 0.25, 0.25],
            (Sign::Plus, Sign::Plus, Sign::Plus),
        )
        .unwrap();
        let mut ranges = BTreeMap::new();
        ranges.insert("l1".to_string(), (0..200).map(|k| 1.0 + k as f64).collect());
        ranges.insert("l2".to_string(), (0..200).map(|k| 1.0 + k as f64).collect());
        let spec = SweepSpec {
            id: EstimateId::KmA110,
            strategy: Strategy::VolumeRoute,
            dims: (16, 16, 16),
            seed: 1,
            base,
            extras: Extras::new(),
            ranges,
            sweep_signs: false,
        };
        assert!(matches!(
            sweep(&spec),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn single_point_sweep_yields_one_report_no_fit() {
        let base = DyadicParams::new(
            [1.0, 1.0, 1.0],
            [f64::INFINITY, 0.125, 0.125],
            (Sign::Plus, Sign::Plus, Sign::Plus),
        )
        .unwrap();
        let mut ranges = BTreeMap::new();
        ranges.insert("l1".to_string(), vec![0.125]);
        let spec = SweepSpec {
            id: EstimateId::KmA110,
            strategy: Strategy::VolumeRoute,
            dims: (16, 16, 16),
            seed: 7,
            base,
            extras: Extras::new(),
            ranges,
            sweep_signs: false,
        };
        let opts = EmpiricalOpts {
            sup_opts: crate::volume::SupSearchOpts {
                grid: 12,
                slices_search: 64,
                slices_final: 128,
                refine_iters: 8,
            },
            ..Default::default()
        };
        let out = sweep_with(&spec, &opts).unwrap();
        assert_eq!(out.reports.len(), 1);
        assert!(out.fitted_exponents.is_empty());
        assert!(out.errors.is_empty());
    }
}
