//! The modified anisotropic L2 norm (N/r)^{1/2} sup_omega over strip
//! restrictions, detecting radial concentration of the spatial Fourier
//! support.

use crate::decomposition::omega_set;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm2, perp};
use crate::spectral::lattice::GridFunction;

/// (N/r)^{1/2} * max over omega in Omega(r/N) of the L2 norm of f
/// restricted to {|xi| in [N, 2N)} intersect T_r(omega).
pub fn anisotropic_norm(f: &GridFunction, n: f64, r: f64) -> Result<f64> {
    if !(n > 0.0 && r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "anisotropic norm needs N, r > 0; got N={n}, r={r}"
        )));
    }
    if r > n {
        return Err(Error::InvalidParameter(format!(
            "anisotropic norm needs r <= N; got r={r} > N={n}"
        )));
    }
    let set = omega_set(r / n)?;
    let cv = f.lattice.cell_volume();
    // Annulus-restricted support cells with their squared mass.
    let cells: Vec<([f64; 2], f64)> = f
        .support_indices()
        .into_iter()
        .filter_map(|idx| {
            let xi = f.lattice.center_of(idx).xi;
            let rho = norm2(xi);
            (n <= rho && rho < 2.0 * n).then(|| (xi, f.values[idx].norm_sqr() * cv))
        })
        .collect();
    let mut best = 0.0f64;
    for k in 0..set.len() {
        let wp = perp(set.direction(k));
        let mut s = 0.0;
        for (xi, m) in &cells {
            if dot(*xi, wp).abs() <= 0.5 * r {
                s += m;
            }
        }
        best = best.max(s);
    }
    Ok((n / r).sqrt() * best.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Interval, Region, Sign};
    use crate::spectral::lattice::{indicator_function, lattice_with_spacing, GridFunction};
    use crate::tolerances;

    fn annulus_lattice(n: f64, h: f64) -> crate::spectral::lattice::Lattice {
        let bb = Region::ConeAnnulus {
            sign: Sign::Plus,
            n,
            l: 1.0,
        }
        .bounding_box()
        .unwrap();
        let bb = crate::geometry::Box3::new(Interval::new(0.0, 1.0), bb.xi1, bb.xi2);
        lattice_with_spacing(&bb, (0.5, h, h)).unwrap()
    }

    #[test]
    fn zero_function_and_r_guard() {
        let lat = annulus_lattice(1.0, 0.05);
        let f = GridFunction::zero(lat);
        assert_eq!(anisotropic_norm(&f, 1.0, 0.25).unwrap(), 0.0);
        assert!(anisotropic_norm(&f, 1.0, 2.0).is_err());
    }

    #[test]
    fn single_strip_support_attains_sup() {
        // f supported in one strip intersected with the annulus: the sup is
        // attained there and the norm is (N/r)^{1/2} ||f||.
        let n = 1.0;
        let r = 0.25;
        let lat = annulus_lattice(n, 0.02);
        let support = Region::Intersect {
            items: vec![
                Region::ConeAnnulus {
                    sign: Sign::Plus,
                    n,
                    l: 10.0,
                },
                Region::SpatialStrip {
                    r: r * 0.8,
                    omega: [1.0, 0.0],
                },
                Region::Slab {
                    omega: [1.0, 0.0],
                    i: Interval::new(0.0, 3.0),
                },
            ],
        };
        let f = indicator_function(&support, &lat);
        assert!(f.support_count() > 0);
        let a = anisotropic_norm(&f, n, r).unwrap();
        let expect = (n / r).sqrt() * f.l2_norm();
        assert!((a / expect - 1.0).abs() < 1e-9, "a {a} expect {expect}");
    }

    #[test]
    fn circularly_symmetric_field_is_sandwiched() {
        let n = 1.0;
        let lat = annulus_lattice(n, 0.02);
        let ann = Region::ConeAnnulus {
            sign: Sign::Plus,
            n,
            l: 10.0,
        };
        let f = indicator_function(&ann, &lat);
        for r in [0.5, 0.25, 0.125] {
            let a = anisotropic_norm(&f, n, r).unwrap();
            let plain = f.l2_norm();
            let ratio = a / plain;
            assert!(
                ratio >= 1.0 / tolerances::ANISO_KAPPA && ratio <= tolerances::ANISO_KAPPA,
                "r={r}: ratio {ratio}"
            );
        }
    }
}
