//! Right-hand-side constants of the verified estimates.

use crate::error::{Error, Result};
use crate::estimates::{EstimateId, Extras};
use crate::geometry::DyadicParams;

fn need(id: EstimateId, extras: &Extras, keys: &[&str]) -> Result<Vec<f64>> {
    let missing: Vec<String> = keys
        .iter()
        .filter(|k| !extras.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingExtras {
            id: id.name().into(),
            keys: missing,
        });
    }
    Ok(keys.iter().map(|k| extras[*k]).collect())
}

/// The predicted constant C for one estimate, given shell parameters and
/// the estimate's extra knobs (alpha, r, interval lengths, gamma).
pub fn predicted_constant(id: EstimateId, p: &DyadicParams, extras: &Extras) -> Result<f64> {
    p.validate()?;
    Ok(match id {
        EstimateId::KmA110 => {
            (p.n_min_012() * p.l_min_12()).sqrt() * (p.n_min_12() * p.l_max_12()).powf(0.25)
        }
        EstimateId::KmA112J1 => {
            (p.n_min_012() * p.l_min_0j(1)).sqrt() * (p.n_min_0j(1) * p.l_max_0j(1)).powf(0.25)
        }
        EstimateId::KmA112J2 => {
            (p.n_min_012() * p.l_min_0j(2)).sqrt() * (p.n_min_0j(2) * p.l_max_0j(2)).powf(0.25)
        }
        EstimateId::KmA116 => (p.n_min_012().powi(2) * p.l_min_012()).sqrt(),
        EstimateId::L42d => p.n1.powf(0.375) * p.l1.powf(0.375),
        EstimateId::AnisoZ1 => {
            let v = need(id, extras, &["alpha", "len_i"])?;
            let (alpha, len_i) = (v[0], v[1]);
            (len_i * p.n_min_12().sqrt() * (p.l1 * p.l2).powf(0.75) / alpha).sqrt()
        }
        EstimateId::NullN2 => {
            let v = need(id, extras, &["r"])?;
            (v[0] * p.l1 * p.l2).sqrt()
        }
        EstimateId::ConcN4 => {
            let v = need(id, extras, &["r", "len_i0"])?;
            (v[0] * p.l1 * p.l2).sqrt()
        }
        EstimateId::LowoutL1 => {
            (p.n0 * p.l_min_012() * (p.l_med_012() * p.l_max_012()).sqrt()).sqrt()
        }
        EstimateId::SectorC200 => {
            let v = need(id, extras, &["gamma"])?;
            (p.n0 * p.l1 * p.l2 / v[0]).sqrt()
        }
        EstimateId::SectorE20 => {
            let v = need(id, extras, &["gamma", "r"])?;
            (v[1] * p.l1 * p.l2 / (v[0] * v[0])).sqrt()
        }
        EstimateId::SectorE21 => {
            let v = need(id, extras, &["gamma", "r"])?;
            (p.n_min_12() * p.l1 * p.l2 / v[0]).sqrt()
        }
        EstimateId::SectorE22 => {
            let v = need(id, extras, &["gamma", "r"])?;
            (v[1] * p.n_min_12() * p.l_min_12()).sqrt()
        }
        EstimateId::SectorK50 => {
            let v = need(id, extras, &["gamma", "alpha", "delta"])?;
            (v[2] * p.l1 * p.l2 / (v[0] * v[1])).sqrt()
        }
        EstimateId::SectorK52 => {
            let v = need(id, extras, &["gamma", "alpha", "delta"])?;
            (v[2] * p.n_min_12() * v[0] * p.l_min_12() / v[1]).sqrt()
        }
        EstimateId::SectorJ200 => {
            let v = need(id, extras, &["gamma", "r", "len_i0"])?;
            (v[1] * v[2] * p.l_min_12()).sqrt()
        }
        EstimateId::SectorJ202 => {
            let v = need(id, extras, &["gamma", "r", "len_i0"])?;
            (v[2] * p.l1 * p.l2 / v[0]).sqrt()
        }
        EstimateId::SectorJ220 => {
            let v = need(id, extras, &["gamma", "r", "len_i0"])?;
            (v[1] * p.l1 * p.l2 / (v[0] * v[0])).sqrt()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Sign;

    fn p(n: [f64; 3], l: [f64; 3]) -> DyadicParams {
        DyadicParams::new(n, l, (Sign::Plus, Sign::Plus, Sign::Plus)).unwrap()
    }

    #[test]
    fn km_formulas() {
        let e = Extras::new();
        let c = predicted_constant(
            EstimateId::KmA110,
            &p([1.0, 1.0, 1.0], [f64::INFINITY, 0.01, 0.04]),
            &e,
        )
        .unwrap();
        assert!((c - 0.1 * 0.04f64.powf(0.25)).abs() < 1e-15);
        assert!((c - 0.044721).abs() < 1e-5);

        let c = predicted_constant(
            EstimateId::KmA116,
            &p([1.0, 1.0, 1.0], [0.01, 0.02, 0.04]),
            &e,
        )
        .unwrap();
        assert!((c - 0.1).abs() < 1e-15);
    }

    #[test]
    fn null_and_aniso_formulas() {
        let mut e = Extras::new();
        e.insert("r".into(), 0.1);
        let c = predicted_constant(
            EstimateId::NullN2,
            &p([1.0, 1.0, 1.0], [1.0, 0.01, 0.01]),
            &e,
        )
        .unwrap();
        assert!((c - 3.1623e-3).abs() < 1e-6);

        let mut e = Extras::new();
        e.insert("alpha".into(), 0.1);
        e.insert("len_i".into(), 0.5);
        let c = predicted_constant(
            EstimateId::AnisoZ1,
            &p([1.0, 2.0, 4.0], [1.0, 0.01, 0.04]),
            &e,
        )
        .unwrap();
        let expect = (0.5 * 2f64.sqrt() * (0.01f64 * 0.04).powf(0.75) / 0.1).sqrt();
        assert!((c - expect).abs() < 1e-15);

        // Missing extras are reported by key.
        let err = predicted_constant(EstimateId::AnisoZ1, &p([1.0; 3], [1.0; 3]), &Extras::new());
        match err {
            Err(Error::MissingExtras { keys, .. }) => {
                assert_eq!(keys, vec!["alpha".to_string(), "len_i".to_string()]);
            }
            other => panic!("expected MissingExtras, got {other:?}"),
        }
    }

    #[test]
    fn scaling_covariance() {
        // Replacing (N, L, lengths) -> (lam N, lam L, lam lengths) scales
        // every constant by lam^{3/2}, except the L4 constant (lam^{3/4}).
        let mut extras = Extras::new();
        for (k, v) in [
            ("alpha", 0.1),
            ("len_i", 0.5),
            ("r", 0.125),
            ("len_i0", 1.0),
            ("gamma", 0.0625),
            ("delta", 0.25),
        ] {
            extras.insert(k.into(), v);
        }
        let base = p([1.0, 2.0, 2.0], [0.25, 0.0625, 0.125]);
        for lam in [2.0f64, 4.0] {
            let scaled_p = p(
                [lam * base.n0, lam * base.n1, lam * base.n2],
                [lam * base.l0, lam * base.l1, lam * base.l2],
            );
            let mut scaled_e = extras.clone();
            for k in ["len_i", "r", "len_i0", "delta"] {
                *scaled_e.get_mut(k).unwrap() *= lam;
            }
            for id in EstimateId::ALL {
                let c0 = predicted_constant(id, &base, &extras).unwrap();
                let c1 = predicted_constant(id, &scaled_p, &scaled_e).unwrap();
                let deg: f64 = if id == EstimateId::L42d { 0.75 } else { 1.5 };
                let expect = c0 * lam.powf(deg);
                assert!(
                    ((c1 - expect) / expect).abs() < 1e-12,
                    "{id}: {c1} vs {expect}"
                );
            }
        }
    }
}
