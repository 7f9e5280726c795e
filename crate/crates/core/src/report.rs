//! Report persistence: the fixed-column CSV schema and JSON summaries.
//!
//! Output files are byte-identical across reruns with the same seed and any
//! thread count, so the persisted runtime_ms column is normalized to 0;
//! wall-clock timings are reported on stderr by the CLI instead.

use std::collections::BTreeSet;

use crate::estimates::{RatioReport, SweepOutcome};

/// Extras columns present in a report set, in sorted order.
pub fn extras_columns(reports: &[RatioReport]) -> Vec<String> {
    let mut keys = BTreeSet::new();
    for r in reports {
        for k in r.extras.keys() {
            keys.insert(k.clone());
        }
    }
    keys.into_iter().collect()
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // Shortest round-trip representation; deterministic.
        format!("{v}")
    }
}

/// Fixed column order:
/// id, N0,N1,N2,L0,L1,L2,sign0,sign1,sign2, extras..., predicted,
/// empirical, ratio, strategy, dims, seed, runtime_ms.
pub fn csv_header(extras: &[String]) -> String {
    let mut cols = vec![
        "id".to_string(),
        "N0".into(),
        "N1".into(),
        "N2".into(),
        "L0".into(),
        "L1".into(),
        "L2".into(),
        "sign0".into(),
        "sign1".into(),
        "sign2".into(),
    ];
    cols.extend(extras.iter().cloned());
    cols.extend(
        ["predicted", "empirical", "ratio", "strategy", "dims", "seed", "runtime_ms"]
            .map(String::from),
    );
    cols.join(",")
}

pub fn csv_row(r: &RatioReport, extras: &[String]) -> String {
    let mut cols = vec![
        r.id.name().to_string(),
        fmt_f64(r.params.n0),
        fmt_f64(r.params.n1),
        fmt_f64(r.params.n2),
        fmt_f64(r.params.l0),
        fmt_f64(r.params.l1),
        fmt_f64(r.params.l2),
        r.params.signs.0.symbol().into(),
        r.params.signs.1.symbol().into(),
        r.params.signs.2.symbol().into(),
    ];
    for k in extras {
        cols.push(r.extras.get(k).map(|v| fmt_f64(*v)).unwrap_or_default());
    }
    cols.push(fmt_f64(r.predicted));
    cols.push(fmt_f64(r.empirical));
    cols.push(fmt_f64(r.ratio));
    cols.push(r.strategy.name().into());
    cols.push(format!("{}x{}x{}", r.dims.0, r.dims.1, r.dims.2));
    cols.push(r.seed.to_string());
    cols.push("0".into()); // deterministic output contract
    cols.join(",")
}

pub fn reports_to_csv(reports: &[RatioReport]) -> String {
    let extras = extras_columns(reports);
    let mut out = csv_header(&extras);
    out.push('\n');
    for r in reports {
        out.push_str(&csv_row(r, &extras));
        out.push('\n');
    }
    out
}

/// JSON value for a sweep summary with deterministic field order and the
/// runtime normalized out of the per-report records.
pub fn sweep_summary_json(out: &SweepOutcome, pass: bool) -> serde_json::Value {
    let mut reports = Vec::new();
    for r in &out.reports {
        let mut v = serde_json::to_value(r).expect("report serializes");
        v["runtime_ms"] = 0.into();
        reports.push(v);
    }
    serde_json::json!({
        "fitted_exponents": out.fitted_exponents,
        "max_ratio": out.max_ratio,
        "min_sharp_ratio": out.min_sharp_ratio,
        "n_reports": out.reports.len(),
        "errors": out.errors,
        "pass": pass,
        "reports": reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::{EstimateId, Extras, Strategy};
    use crate::geometry::{DyadicParams, Sign};

    #[test]
    fn csv_schema_is_stable() {
        let p = DyadicParams::new(
            [1.0, 2.0, 4.0],
            [f64::INFINITY, 0.25, 0.5],
            (Sign::Plus, Sign::Minus, Sign::Plus),
        )
        .unwrap();
        let mut extras = Extras::new();
        extras.insert("r".into(), 0.125);
        let rep = RatioReport {
            id: EstimateId::NullN2,
            params: p,
            extras,
            predicted: 0.125,
            empirical: 0.0625,
            ratio: 0.5,
            strategy: Strategy::Random,
            dims: (16, 32, 32),
            seed: 42,
            runtime_ms: 1234,
        };
        let csv = reports_to_csv(&[rep]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "id,N0,N1,N2,L0,L1,L2,sign0,sign1,sign2,r,predicted,empirical,ratio,strategy,dims,seed,runtime_ms"
        );
        assert_eq!(
            lines.next().unwrap(),
            "NULL_N2,1,2,4,inf,0.25,0.5,+,-,+,0.125,0.125,0.0625,0.5,random,16x32x32,42,0"
        );
    }
}
