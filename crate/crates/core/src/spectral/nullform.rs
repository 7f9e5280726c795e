//! The null form B_theta12: the bilinear product with the interaction angle
//! inserted as a convolution weight, evaluated directly over supports or
//! through the Whitney angular decomposition.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::decomposition::omega_set;
use crate::error::{Error, Result};
use crate::geometry::{angle, norm2, scale, Region, Sign};
use crate::spectral::convolve::{convolve_direct, sum_lattice};
use crate::spectral::lattice::GridFunction;
use crate::tolerances;

/// Which angular weight the null form inserts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullformWeight {
    /// theta12 itself.
    Theta,
    /// theta12 restricted to small interactions: theta12 <= 1/8, the
    /// concrete reading of "theta12 << 1".
    ThetaSmall,
}

const DIRECT_SUPPORT_CAP: usize = 100_000;

fn masked_norm(conv: &GridFunction, a0: Option<&Region>) -> f64 {
    let cv = conv.lattice.cell_volume();
    let total: f64 = (0..conv.values.len())
        .map(|i| {
            if !conv.support_mask[i] {
                return 0.0;
            }
            match a0 {
                Some(r) if !r.contains(conv.lattice.center_of(i)) => 0.0,
                _ => conv.values[i].norm_sqr(),
            }
        })
        .sum();
    (total * cv).sqrt()
}

fn window_of(a0: Option<&Region>) -> Option<crate::geometry::Box3> {
    match a0 {
        None => None,
        Some(r) => match r.bounds() {
            Ok(Some(b)) => Some(b),
            _ => None,
        },
    }
}

struct PolarCell {
    it: i64,
    i1: i64,
    i2: i64,
    v: Complex64,
    /// Polar angle of the signed spatial frequency; NaN for xi = 0 cells
    /// (they contribute nothing: a single cell of measure zero in the
    /// continuum limit of the angular weight).
    phi: f64,
}

fn polar_cells(f: &GridFunction, s: Sign) -> Vec<PolarCell> {
    f.support_indices()
        .into_iter()
        .map(|idx| {
            let (it, i1, i2) = f.lattice.unidx(idx);
            let xi = scale(f.lattice.center(it, i1, i2).xi, s.value());
            let phi = if norm2(xi) == 0.0 {
                f64::NAN
            } else {
                xi[1].atan2(xi[0])
            };
            PolarCell {
                it: it as i64,
                i1: i1 as i64,
                i2: i2 as i64,
                v: f.values[idx],
                phi,
            }
        })
        .collect()
}

/// theta12 between cells with precomputed polar angles: the wrapped angle
/// difference, exact for unit vectors and far cheaper than acos per pair.
#[inline]
fn wrap_angle(d: f64) -> f64 {
    let mut d = d.abs() % (2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI {
        d = 2.0 * std::f64::consts::PI - d;
    }
    d
}

/// The weighted convolution grid of the null form B_w(f1, f2), restricted
/// to an output window.
pub(crate) fn nullform_grid(
    f1: &GridFunction,
    f2: &GridFunction,
    s1: Sign,
    s2: Sign,
    a0: Option<&Region>,
    weight: NullformWeight,
) -> Result<GridFunction> {
    if !f1.lattice.spacing_matches(&f2.lattice) {
        return Err(Error::SpacingMismatch);
    }
    let window = window_of(a0);
    let full = sum_lattice(&f1.lattice, &f2.lattice);
    let cutoff = match weight {
        NullformWeight::Theta => f64::INFINITY,
        NullformWeight::ThetaSmall => tolerances::THETA12_CUTOFF,
    };
    // Output crop to the window, one guard cell per side.
    let (out_lat, offset) = crate::spectral::convolve::crop_for(&full, window.as_ref());
    if out_lat.len() == 0 {
        return Ok(GridFunction::zero(out_lat));
    }
    let s1cells = polar_cells(f1, s1);
    let s2cells = polar_cells(f2, s2);
    let cv = f1.lattice.cell_volume();
    let (nt, n1, n2) = (
        out_lat.dims.0 as i64,
        out_lat.dims.1 as i64,
        out_lat.dims.2 as i64,
    );
    let n_out = out_lat.len();
    let chunk = s1cells
        .len()
        .div_ceil(2 * rayon::current_num_threads().max(1))
        .max(1024);
    let partials: Vec<Vec<Complex64>> = s1cells
        .par_chunks(chunk)
        .map(|cells| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n_out];
            for a in cells {
                if a.phi.is_nan() {
                    continue;
                }
                for b in &s2cells {
                    let kt = a.it + b.it - offset.0;
                    if kt < 0 || kt >= nt {
                        continue;
                    }
                    let k1 = a.i1 + b.i1 - offset.1;
                    if k1 < 0 || k1 >= n1 {
                        continue;
                    }
                    let k2 = a.i2 + b.i2 - offset.2;
                    if k2 < 0 || k2 >= n2 {
                        continue;
                    }
                    if b.phi.is_nan() {
                        continue;
                    }
                    let th = wrap_angle(a.phi - b.phi);
                    if th > cutoff {
                        continue;
                    }
                    acc[((kt * n1 + k1) * n2 + k2) as usize] += a.v * b.v * th;
                }
            }
            acc
        })
        .collect();
    let mut out = GridFunction::zero(out_lat);
    for p in partials {
        for (o, v) in out.values.iter_mut().zip(p) {
            *o += v;
        }
    }
    for i in 0..n_out {
        out.values[i] *= cv;
        out.support_mask[i] = out.values[i] != Complex64::new(0.0, 0.0);
    }
    Ok(out)
}

/// L2 norm of chi_{A0} . B_w(f1, f2) by the direct quadratic sum over
/// supports. Guarded to supports of at most 10^5 cells each.
pub fn nullform_direct(
    f1: &GridFunction,
    f2: &GridFunction,
    s1: Sign,
    s2: Sign,
    a0: Option<&Region>,
    weight: NullformWeight,
) -> Result<f64> {
    for f in [f1, f2] {
        let c = f.support_count();
        if c > DIRECT_SUPPORT_CAP {
            return Err(Error::SupportTooLarge(c));
        }
    }
    let conv = nullform_grid(f1, f2, s1, s2, a0, weight)?;
    Ok(masked_norm(&conv, a0))
}

/// Whitney-pair admission bookkeeping: at each dyadic level, support cells
/// are assigned to their nearest direction; a pair of sectors is admitted
/// at the coarsest level where its representative angle reaches [3g, 12g],
/// so every interaction is counted at exactly one level. Pairs still
/// unresolved at gamma_min form the near-parallel remainder, weighted by
/// gamma_min (a deliberate lower-bias approximation).
pub fn nullform_sectored(
    f1: &GridFunction,
    f2: &GridFunction,
    s1: Sign,
    s2: Sign,
    a0: Option<&Region>,
    gamma_min: f64,
) -> Result<f64> {
    // The lattice must resolve gamma_min: the angular size of one spatial
    // cell at the innermost support radius has to stay below it.
    let ang_res = |f: &GridFunction| -> f64 {
        let h = f.lattice.spacing.1.max(f.lattice.spacing.2);
        let mut rho_min = f64::INFINITY;
        for idx in f.support_indices() {
            let rho = norm2(f.lattice.center_of(idx).xi);
            if rho > 0.0 {
                rho_min = rho_min.min(rho);
            }
        }
        if rho_min.is_finite() {
            h / rho_min
        } else {
            0.0
        }
    };
    let res = ang_res(f1).max(ang_res(f2));
    if gamma_min < res {
        return Err(Error::Resolution(format!(
            "gamma_min = {gamma_min} is below the lattice angular resolution {res}"
        )));
    }
    if !(gamma_min > 0.0 && gamma_min <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "gamma_min must lie in (0, 1/2], got {gamma_min}"
        )));
    }

    // Dyadic levels, coarse to fine.
    let mut levels = Vec::new();
    let mut g = 0.5;
    while g >= gamma_min * (1.0 - 1e-12) {
        levels.push(g);
        g *= 0.5;
    }

    let window = window_of(a0);
    let out_lat = sum_lattice(&f1.lattice, &f2.lattice);
    let mut acc = GridFunction::zero(out_lat);

    // Per-level sector assignment of the support cells of one input.
    let assign = |f: &GridFunction, s: Sign, set: &crate::decomposition::DirectionSet| {
        let mut by_sector: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for idx in f.support_indices() {
            let xi = f.lattice.center_of(idx).xi;
            if norm2(xi) == 0.0 {
                continue;
            }
            if let Ok(k) = set.nearest_index(scale(xi, s.value())) {
                by_sector.entry(k).or_default().push(idx);
            }
        }
        by_sector
    };

    let piece = |f: &GridFunction, cells: &[usize]| -> GridFunction {
        let mut p = GridFunction::zero(f.lattice);
        for &idx in cells {
            p.values[idx] = f.values[idx];
            p.support_mask[idx] = true;
        }
        p
    };

    let mut admitted: Vec<std::collections::BTreeSet<(usize, usize)>> = vec![Default::default(); levels.len()];
    let mut parent_maps: Vec<std::collections::BTreeMap<usize, usize>> = Vec::new();
    let mut sets = Vec::new();
    for &g in &levels {
        sets.push(omega_set(g)?);
    }
    // parent of sector k at level ell (>=1): nearest member one level up.
    for ell in 0..levels.len() {
        let mut map = std::collections::BTreeMap::new();
        if ell > 0 {
            for k in 0..sets[ell].len() {
                map.insert(k, sets[ell - 1].nearest_index(sets[ell].direction(k))?);
            }
        }
        parent_maps.push(map);
    }

    let has_admitted_ancestor = |admitted: &Vec<std::collections::BTreeSet<(usize, usize)>>,
                                 ell: usize,
                                 mut i: usize,
                                 mut j: usize|
     -> bool {
        for up in (0..ell).rev() {
            i = parent_maps[up + 1][&i];
            j = parent_maps[up + 1][&j];
            if admitted[up].contains(&(i, j)) {
                return true;
            }
        }
        false
    };

    let add_piece = |acc: &mut GridFunction, p1: &GridFunction, p2: &GridFunction, w: f64| -> Result<()> {
        let conv = convolve_direct(p1, p2, window.as_ref())?.scaled(w);
        // The windowed output lattice is a sub-grid of the full sum lattice.
        let off = (
            ((conv.lattice.extents.tau.lo - acc.lattice.extents.tau.lo) / acc.lattice.spacing.0)
                .round() as usize,
            ((conv.lattice.extents.xi1.lo - acc.lattice.extents.xi1.lo) / acc.lattice.spacing.1)
                .round() as usize,
            ((conv.lattice.extents.xi2.lo - acc.lattice.extents.xi2.lo) / acc.lattice.spacing.2)
                .round() as usize,
        );
        for it in 0..conv.lattice.dims.0 {
            for i1 in 0..conv.lattice.dims.1 {
                for i2 in 0..conv.lattice.dims.2 {
                    let v = conv.values[conv.lattice.idx(it, i1, i2)];
                    if v != Complex64::new(0.0, 0.0) {
                        let dst = acc.lattice.idx(it + off.0, i1 + off.1, i2 + off.2);
                        acc.values[dst] += v;
                        acc.support_mask[dst] = true;
                    }
                }
            }
        }
        Ok(())
    };

    for ell in 0..levels.len() {
        let g = levels[ell];
        let set = &sets[ell];
        let by1 = assign(f1, s1, set);
        let by2 = assign(f2, s2, set);
        let last = ell + 1 == levels.len();
        for (&i, cells1) in &by1 {
            for (&j, cells2) in &by2 {
                let th = angle(set.direction(i), set.direction(j))?;
                let whitney = 3.0 * g - 1e-12 <= th && th <= 12.0 * g + 1e-12;
                if has_admitted_ancestor(&admitted, ell, i, j) {
                    continue;
                }
                if whitney {
                    admitted[ell].insert((i, j));
                    let p1 = piece(f1, cells1);
                    let p2 = piece(f2, cells2);
                    add_piece(&mut acc, &p1, &p2, th)?;
                } else if last && th < 3.0 * gamma_min {
                    // Near-parallel remainder.
                    let p1 = piece(f1, cells1);
                    let p2 = piece(f2, cells2);
                    add_piece(&mut acc, &p1, &p2, gamma_min)?;
                }
            }
        }
    }

    Ok(masked_norm(&acc, a0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box3, Interval};
    use crate::spectral::convolve::restricted_product_norm;
    use crate::spectral::lattice::{indicator_function, lattice_with_spacing, GridFunction};

    fn shell_field(sign: Sign, n: f64, l: f64, h: f64) -> GridFunction {
        let region = Region::ConeAnnulus { sign, n, l };
        let bb = region.bounding_box().unwrap();
        let lat = lattice_with_spacing(&bb, (l / 2.0, h, h)).unwrap();
        indicator_function(&region, &lat)
    }

    #[test]
    fn parallel_same_sign_rays_vanish() {
        // Support on a single ray direction: theta12 = 0 on the whole
        // product, so the null form vanishes.
        let h = 0.0625;
        let bb = Box3::new(
            Interval::new(0.875, 2.125),
            Interval::new(0.875, 2.0),
            Interval::new(-0.15625, 0.15625),
        );
        let lat = lattice_with_spacing(&bb, (h, h, h)).unwrap();
        // Indicator of the on-axis cells only.
        let mut f = GridFunction::zero(lat);
        for it in 0..lat.dims.0 {
            for i1 in 0..lat.dims.1 {
                for i2 in 0..lat.dims.2 {
                    let c = lat.center(it, i1, i2);
                    if c.xi[1].abs() < 1e-9 && sector_like(&c) {
                        f.set(lat.idx(it, i1, i2), Complex64::new(1.0, 0.0));
                    }
                }
            }
        }
        assert!(f.support_count() > 0);
        let v = nullform_direct(&f, &f, Sign::Plus, Sign::Plus, None, NullformWeight::Theta)
            .unwrap();
        assert_eq!(v, 0.0);

        fn sector_like(c: &crate::geometry::FreqPoint) -> bool {
            let rho = crate::geometry::norm2(c.xi);
            (1.0..2.0).contains(&rho) && (c.tau - rho).abs() <= 0.1 && c.xi[0] > 0.0
        }
    }

    #[test]
    fn weight_bound_by_pi_for_nonneg_inputs() {
        let f1 = shell_field(Sign::Plus, 1.0, 0.125, 0.125);
        let f2 = shell_field(Sign::Minus, 1.0, 0.125, 0.125);
        let nf = nullform_direct(&f1, &f2, Sign::Plus, Sign::Minus, None, NullformWeight::Theta)
            .unwrap();
        let rpn = restricted_product_norm(&f1, &f2, None).unwrap();
        assert!(nf <= std::f64::consts::PI * rpn + 1e-12, "nf {nf} rpn {rpn}");
        assert!(nf > 0.0);
    }

    #[test]
    fn support_cap_errors() {
        let f = shell_field(Sign::Plus, 1.0, 0.125, 0.015);
        assert!(f.support_count() > DIRECT_SUPPORT_CAP);
        assert!(matches!(
            nullform_direct(&f, &f, Sign::Plus, Sign::Plus, None, NullformWeight::Theta),
            Err(Error::SupportTooLarge(_))
        ));
    }

    #[test]
    fn single_sector_pair_matches_angle_times_product() {
        // Two narrow sectors separated by theta*: both evaluation routes
        // should be close to theta* times the plain product norm.
        let theta_star = 9.0 * 2f64.powi(-5); // mid-dyadic placement
        let mk = |phi: f64| {
            let region = Region::ConeSector {
                sign: Sign::Plus,
                n: 1.0,
                l: 0.0625,
                gamma: 0.02,
                omega: crate::geometry::unit_from_angle(phi),
            };
            let bb = region.bounding_box().unwrap();
            let lat = lattice_with_spacing(&bb, (0.03125, 0.02, 0.02)).unwrap();
            indicator_function(&region, &lat)
        };
        let f1 = mk(0.0);
        let f2 = mk(theta_star);
        let rpn = restricted_product_norm(&f1, &f2, None).unwrap();
        let direct =
            nullform_direct(&f1, &f2, Sign::Plus, Sign::Plus, None, NullformWeight::Theta).unwrap();
        let sectored =
            nullform_sectored(&f1, &f2, Sign::Plus, Sign::Plus, None, 2f64.powi(-5)).unwrap();
        assert!((direct / (theta_star * rpn) - 1.0).abs() < 0.3, "direct {direct}");
        assert!(
            (sectored / (theta_star * rpn) - 1.0).abs() < 0.3,
            "sectored {sectored} vs {}",
            theta_star * rpn
        );
    }

    #[test]
    fn resolution_guard() {
        let f = shell_field(Sign::Plus, 1.0, 0.125, 0.125);
        assert!(matches!(
            nullform_sectored(&f, &f, Sign::Plus, Sign::Plus, None, 2f64.powi(-12)),
            Err(Error::Resolution(_))
        ));
    }
}
