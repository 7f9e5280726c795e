//! Flat key = value run configuration: diff-friendly, no schema engine.
//! CLI flags override file values.

use std::collections::BTreeMap;

use conelab::estimates::{EstimateId, Extras, Strategy, SweepSpec};
use conelab::geometry::{DyadicParams, Sign};

#[derive(Debug, Default, Clone)]
pub struct FlatConfig {
    pub entries: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<FlatConfig, String> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(FlatConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }
}

/// One numeric literal: plain float, `inf`, or dyadic `2^k` / `2^-k`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp
            .parse()
            .map_err(|_| format!("bad dyadic exponent in {s:?}"))?;
        return Ok(2f64.powi(e));
    }
    s.parse::<f64>().map_err(|_| format!("bad number {s:?}"))
}

/// Value list: comma-separated numbers, or a dyadic range `2^a..2^b`
/// stepping by factors of two (inclusive).
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..") {
        let a = parse_number(lo)?;
        let b = parse_number(hi)?;
        if !(a > 0.0 && b >= a) {
            return Err(format!("bad range {s:?}: need 0 < lo <= hi"));
        }
        let mut out = Vec::new();
        let mut v = a;
        while v <= b * (1.0 + 1e-12) {
            out.push(v);
            v *= 2.0;
        }
        return Ok(out);
    }
    s.split(',').map(parse_number).collect()
}

pub fn parse_signs(s: &str) -> Result<(Sign, Sign, Sign), String> {
    let sym = |c: char| match c {
        '+' => Ok(Sign::Plus),
        '-' => Ok(Sign::Minus),
        other => Err(format!("bad sign {other:?}")),
    };
    let chars: Vec<char> = s.trim().chars().collect();
    if chars.len() != 3 {
        return Err(format!("signs must be three of +/-, got {s:?}"));
    }
    Ok((sym(chars[0])?, sym(chars[1])?, sym(chars[2])?))
}

pub fn parse_dims(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.trim().split('x').collect();
    if parts.len() != 3 {
        return Err(format!("dims must be NTxN1xN2, got {s:?}"));
    }
    let p = |t: &str| t.parse::<usize>().map_err(|_| format!("bad dim {t:?}"));
    Ok((p(parts[0])?, p(parts[1])?, p(parts[2])?))
}

/// Optional pass expectations attached to a sweep.
#[derive(Debug, Clone, Default)]
pub struct Expectations {
    pub ratio_max: Option<f64>,
    pub min_sharp: Option<f64>,
    pub slopes: BTreeMap<String, f64>,
    pub slope_tol: f64,
}

/// Builds a SweepSpec (plus expectations) from a flat config file with CLI
/// overrides already applied to `cfg`.
pub fn sweep_spec_from(cfg: &FlatConfig) -> Result<(SweepSpec, Expectations), String> {
    let id: EstimateId = cfg
        .get("id")
        .ok_or("missing key: id")?
        .parse()
        .map_err(|e: String| e)?;
    let strategy: Strategy = cfg
        .get("strategy")
        .unwrap_or("volume_route")
        .parse()
        .map_err(|e: String| e)?;
    let dims = match cfg.get("dims") {
        Some(d) => parse_dims(d)?,
        None => (48, 48, 48),
    };
    let seed = match cfg.get("seed") {
        Some(s) => s.parse::<u64>().map_err(|_| format!("bad seed {s:?}"))?,
        None => 42,
    };
    let mut base = DyadicParams {
        n0: 1.0,
        n1: 1.0,
        n2: 1.0,
        l0: f64::INFINITY,
        l1: 0.125,
        l2: 0.125,
        signs: (Sign::Plus, Sign::Plus, Sign::Plus),
    };
    for (key, slot) in [("n0", 0), ("n1", 1), ("n2", 2), ("l0", 3), ("l1", 4), ("l2", 5)] {
        if let Some(v) = cfg.get(key) {
            let x = parse_number(v)?;
            match slot {
                0 => base.n0 = x,
                1 => base.n1 = x,
                2 => base.n2 = x,
                3 => base.l0 = x,
                4 => base.l1 = x,
                _ => base.l2 = x,
            }
        }
    }
    let mut sweep_signs = false;
    if let Some(s) = cfg.get("signs") {
        if s.trim() == "all" {
            sweep_signs = true;
        } else {
            base.signs = parse_signs(s)?;
        }
    }
    let mut extras = Extras::new();
    let mut ranges = BTreeMap::new();
    let mut expect = Expectations {
        slope_tol: 0.15,
        ..Default::default()
    };
    for (k, v) in &cfg.entries {
        if let Some(name) = k.strip_prefix("extra.") {
            extras.insert(name.to_string(), parse_number(v)?);
        } else if let Some(name) = k.strip_prefix("sweep.") {
            ranges.insert(name.to_string(), parse_values(v)?);
        } else if let Some(name) = k.strip_prefix("expect.slope.") {
            expect.slopes.insert(name.to_string(), parse_number(v)?);
        } else if k == "expect.ratio_max" {
            expect.ratio_max = Some(parse_number(v)?);
        } else if k == "expect.min_sharp" {
            expect.min_sharp = Some(parse_number(v)?);
        } else if k == "expect.slope_tol" {
            expect.slope_tol = parse_number(v)?;
        }
    }
    if ranges.is_empty() {
        // A degenerate single-point sweep over the base config.
        ranges.insert("l1".to_string(), vec![base.l1]);
    }
    Ok((
        SweepSpec {
            id,
            strategy,
            dims,
            seed,
            base,
            extras,
            ranges,
            sweep_signs,
        },
        expect,
    ))
}
