//! Maximal gamma-separated direction sets, Whitney angular decomposition,
//! sector-overlap and null-plane counting, and the cone-in-null-slab
//! inclusion.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{angle, dot, norm2, unit_from_angle, FreqPoint, Sign, Vec2};
use crate::rng::CounterRng;


/// Dyadic gamma levels 2^-1 .. 2^-12, coarse to fine.
pub fn dyadic_gammas() -> Vec<f64> {
    (1..=12).map(|k| 2f64.powi(-k)).collect()
}

/// A maximal gamma-separated subset of the unit circle, realized as the
/// n = floor(2 pi / gamma) equally spaced directions. The uniform spacing
/// 2 pi / n is at least gamma (separation) and the half-spacing is at most
/// gamma (maximality), both exactly by construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionSet {
    pub gamma: f64,
    n: usize,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    #[inline]
    pub fn direction(&self, k: usize) -> Vec2 {
        unit_from_angle(self.spacing() * k as f64)
    }

    pub fn directions(&self) -> Vec<Vec2> {
        (0..self.n).map(|k| self.direction(k)).collect()
    }

    /// Index of the member nearest in angle to `v`.
    pub fn nearest_index(&self, v: Vec2) -> Result<usize> {
        if norm2(v) == 0.0 {
            return Err(Error::ZeroVector);
        }
        let phi = v[1].atan2(v[0]).rem_euclid(2.0 * PI);
        let k = (phi / self.spacing()).round() as usize;
        Ok(k % self.n)
    }

    /// Index of `omega` if it is a member (within 1e-9 componentwise; the
    /// euclidean gap is used because acos is ill-conditioned near 0).
    pub fn index_of(&self, omega: Vec2) -> Result<usize> {
        let k = self.nearest_index(omega)?;
        let d = self.direction(k);
        if (omega[0] - d[0]).abs() > 1e-9 || (omega[1] - d[1]).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "direction {omega:?} is not a member of Omega({})",
                self.gamma
            )));
        }
        Ok(k)
    }

    /// Members within angular distance `radius` of `v`, by index-window
    /// search around the nearest member plus exact angle verification.
    pub fn members_within(&self, v: Vec2, radius: f64) -> Result<Vec<usize>> {
        if norm2(v) == 0.0 {
            return Err(Error::ZeroVector);
        }
        if radius >= PI {
            return Ok((0..self.n).collect());
        }
        let center = self.nearest_index(v)? as isize;
        let w = (radius / self.spacing()).ceil() as isize + 1;
        let mut out = Vec::new();
        for off in -w..=w {
            let k = (center + off).rem_euclid(self.n as isize) as usize;
            // Closed boundary (theta <= radius) with an epsilon absorbing
            // the acos rounding at exact-boundary configurations.
            if angle(v, self.direction(k))? <= radius + 1e-12 && !out.contains(&k) {
                out.push(k);
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Omega(gamma) for gamma in (0, pi].
pub fn omega_set(gamma: f64) -> Result<DirectionSet> {
    if !(gamma > 0.0 && gamma <= PI) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be in (0, pi], got {gamma}"
        )));
    }
    let n = (2.0 * PI / gamma).floor() as usize;
    Ok(DirectionSet { gamma, n })
}

/// Number of omega in Omega(gamma) whose gamma-sector contains xi, i.e.
/// theta(xi, omega) <= gamma. Guaranteed in [1, 5]; with the uniform
/// realization it is in fact at most 3.
pub fn sector_cover_count(xi: Vec2, gamma: f64) -> Result<usize> {
    let set = omega_set(gamma)?;
    Ok(set.members_within(xi, gamma)?.len())
}

/// Number of members within k*gamma of a member omega; at most 2k + 1.
pub fn neighbor_count(omega: Vec2, k: usize, gamma: f64) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let set = omega_set(gamma)?;
    set.index_of(omega)?;
    Ok(set.members_within(omega, k as f64 * gamma)?.len())
}

/// A Whitney pair at level gamma: two directions with
/// 3 gamma <= theta(omega1, omega2) <= 12 gamma.
#[derive(Clone, Copy, Debug)]
pub struct WhitneyPair {
    pub gamma: f64,
    pub omega1: Vec2,
    pub omega2: Vec2,
}

/// Evaluates the dyadic Whitney angular sum
/// sum_gamma sum_{3g <= theta(w1,w2) <= 12g} chi(xi1 in sector)(xi2 in sector)
/// over gamma in [gamma_min, 1/2]. On its precondition domain the value is
/// in [1, B_w].
pub fn whitney_sum(xi1: Vec2, xi2: Vec2, gamma_min: f64) -> Result<f64> {
    if norm2(xi1) == 0.0 || norm2(xi2) == 0.0 {
        return Err(Error::ZeroVector);
    }
    validate_dyadic_gamma(gamma_min)?;
    let th = angle(xi1, xi2)?;
    if th < 24.0 * gamma_min {
        return Err(Error::InvalidParameter(format!(
            "whitney_sum needs theta(xi1, xi2) >= 24 gamma_min; got {th} < {}",
            24.0 * gamma_min
        )));
    }
    let mut total = 0.0;
    let mut gamma = 0.5;
    while gamma >= gamma_min * (1.0 - 1e-12) {
        let set = omega_set(gamma)?;
        let c1 = set.members_within(xi1, gamma)?;
        let c2 = set.members_within(xi2, gamma)?;
        for &i in &c1 {
            for &j in &c2 {
                let t = angle(set.direction(i), set.direction(j))?;
                if 3.0 * gamma <= t && t <= 12.0 * gamma {
                    total += 1.0;
                }
            }
        }
        gamma *= 0.5;
    }
    Ok(total)
}

fn validate_dyadic_gamma(gamma: f64) -> Result<()> {
    for k in 1..=12 {
        if (gamma - 2f64.powi(-k)).abs() < 1e-15 {
            return Ok(());
        }
    }
    Err(Error::InvalidParameter(format!(
        "gamma must be dyadic in [2^-12, 2^-1], got {gamma}"
    )))
}

/// Number of coarse pairs (omega1, omega2) in Omega(gamma)^2 with
/// theta(omega1, omega2) <= (k+2) gamma covering (xi1, xi2). At least 1
/// whenever theta(xi1, xi2) <= k gamma.
pub fn coarse_sector_cover(xi1: Vec2, xi2: Vec2, k: usize, gamma: f64) -> Result<usize> {
    if norm2(xi1) == 0.0 || norm2(xi2) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let th = angle(xi1, xi2)?;
    if th > k as f64 * gamma {
        return Err(Error::InvalidParameter(format!(
            "coarse_sector_cover needs theta <= k gamma; got {th} > {}",
            k as f64 * gamma
        )));
    }
    let set = omega_set(gamma)?;
    let c1 = set.members_within(xi1, gamma)?;
    let c2 = set.members_within(xi2, gamma)?;
    let mut count = 0;
    for &i in &c1 {
        for &j in &c2 {
            if angle(set.direction(i), set.direction(j))? <= (k as f64 + 2.0) * gamma + 1e-12 {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// #{omega in Omega(gamma) : |-tau + xi.omega| <= d} for |xi| ~ N.
/// Bounded by K (1 + sqrt(d / (N gamma^2))).
pub fn nullplane_count(x: FreqPoint, d: f64, gamma: f64, n: f64) -> Result<usize> {
    let rho = norm2(x.xi);
    if !(n <= rho && rho < 2.0 * n) {
        return Err(Error::InvalidParameter(format!(
            "nullplane_count needs |xi| in [N, 2N); |xi| = {rho}, N = {n}"
        )));
    }
    let set = omega_set(gamma)?;
    // xi.omega = rho cos(phi - phi_xi); need cos in [c - w, c + w].
    let c = x.tau / rho;
    let w = d / rho;
    if c - w > 1.0 || c + w < -1.0 {
        return Ok(0);
    }
    // Pre-image arcs: phi_xi +- [acos(min(1, c+w)) , acos(max(-1, c-w))].
    let a_lo = (c + w).clamp(-1.0, 1.0).acos();
    let a_hi = (c - w).clamp(-1.0, 1.0).acos();
    let phi_xi = x.xi[1].atan2(x.xi[0]);
    let spacing = set.spacing();
    let mut out = std::collections::BTreeSet::new();
    for sign in [1.0, -1.0] {
        let lo = phi_xi + sign * a_lo;
        let hi = phi_xi + sign * a_hi;
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let k_lo = ((lo / spacing).floor() as isize) - 1;
        let k_hi = ((hi / spacing).ceil() as isize) + 1;
        for k in k_lo..=k_hi {
            let idx = k.rem_euclid(set.len() as isize) as usize;
            let omega = set.direction(idx);
            if (-x.tau + dot(x.xi, omega)).abs() <= d {
                out.insert(idx);
            }
        }
    }
    Ok(out.len())
}

/// Samples the cone sector Kdot^s_{N,L,gamma}(omega) and checks containment
/// in the null slab of half-width c_width = c * max(L, N gamma^2). The
/// sample set always includes the корner points of the parameter domain, so
/// an undersized slab (e.g. the certified constant halved) is detected
/// deterministically.
pub fn cone_nullslab_inclusion(
    sign: Sign,
    n: f64,
    l: f64,
    gamma: f64,
    omega: Vec2,
    n_samples: usize,
    seed: u64,
    c: f64,
) -> Result<bool> {
    if !(n > 0.0 && l > 0.0 && gamma > 0.0 && gamma <= PI) {
        return Err(Error::InvalidParameter("bad sector parameters".into()));
    }
    let width = c * l.max(n * gamma * gamma);
    let phi0 = omega[1].atan2(omega[0]);
    let rng = CounterRng::new(seed);
    // A sector point: xi = s * rho * u(phi0 + phi), tau = s*rho + h.
    let point = |rho: f64, phi: f64, h: f64| -> FreqPoint {
        let u = unit_from_angle(phi0 + phi);
        FreqPoint::new(sign.value() * rho + h, [sign.value() * rho * u[0], sign.value() * rho * u[1]])
    };
    let in_slab = |x: &FreqPoint| (-x.tau + dot(x.xi, omega)).abs() <= width;

    // |-tau + xi.omega| = |h + s rho (1 - cos phi)| is maximized at the
    // corners, so check them first.
    let top = 2.0 * n * (1.0 - 1e-12);
    for &rho in &[n, top] {
        for &phi in &[-gamma, gamma, 0.0] {
            for &h in &[-l, l] {
                if !in_slab(&point(rho, phi, h)) {
                    return Ok(false);
                }
            }
        }
    }
    for i in 0..n_samples {
        let k = 3 * i as u64;
        let rho = rng.f64_in(k, n, 2.0 * n);
        let phi = rng.f64_in(k + 1, -gamma, gamma);
        let h = rng.f64_in(k + 2, -l, l);
        if !in_slab(&point(rho, phi, h)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances;

    #[test]
    fn omega_set_sizes() {
        assert_eq!(omega_set(PI).unwrap().len(), 2);
        assert_eq!(omega_set(PI / 2.0).unwrap().len(), 4);
        assert_eq!(omega_set(0.1).unwrap().len(), 62);
        assert!(omega_set(0.0).is_err());
        assert!(omega_set(4.0).is_err());
        let two = omega_set(PI).unwrap().directions();
        assert!((two[0][0] - 1.0).abs() < 1e-15 && (two[1][0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn direction_set_invariants_all_dyadic_levels() {
        for gamma in dyadic_gammas() {
            let set = omega_set(gamma).unwrap();
            // Equal spacing: adjacent separation >= gamma proves pairwise
            // separation; half-spacing <= gamma proves maximality.
            assert!(set.spacing() >= gamma - 1e-15);
            assert!(set.spacing() / 2.0 <= gamma + 1e-15);
            let a01 = angle(set.direction(0), set.direction(1)).unwrap();
            assert!((a01 - set.spacing()).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_cover_examples_and_bounds() {
        assert_eq!(sector_cover_count([1.0, 0.0], PI / 2.0).unwrap(), 3);
        let rng = CounterRng::new(17);
        let gammas = dyadic_gammas();
        for i in 0..20_000u64 {
            let phi = rng.f64_in(2 * i, 0.0, 2.0 * PI);
            let g = gammas[(rng.u64_at(2 * i + 1) % gammas.len() as u64) as usize];
            let c = sector_cover_count(unit_from_angle(phi), g).unwrap();
            assert!((1..=5).contains(&c), "count {c} at gamma {g}");
        }
    }

    #[test]
    fn neighbor_count_examples_and_bounds() {
        assert_eq!(neighbor_count([1.0, 0.0], 1, PI / 2.0).unwrap(), 3);
        // Saturation: k gamma >= pi returns the whole set.
        let set = omega_set(0.5).unwrap();
        let c = neighbor_count([1.0, 0.0], 7, 0.5).unwrap();
        assert_eq!(c, set.len());
        assert!(2 * 7 + 1 >= set.len());
        // Non-member errors.
        assert!(neighbor_count(unit_from_angle(0.1), 1, PI / 2.0).is_err());
        for gamma in dyadic_gammas() {
            let set = omega_set(gamma).unwrap();
            let step = (set.len() / 7).max(1);
            for idx in (0..set.len()).step_by(step) {
                for k in [1usize, 2, 5, 16] {
                    let c = neighbor_count(set.direction(idx), k, gamma).unwrap();
                    assert!(c <= 2 * k + 1, "count {c} > {} at gamma {gamma}", 2 * k + 1);
                }
            }
        }
    }

    #[test]
    fn whitney_sum_examples() {
        let v = whitney_sum([1.0, 0.0], [0.0, 1.0], 2f64.powi(-8)).unwrap();
        assert!(v >= 1.0);
        assert!(v <= tolerances::WHITNEY_BW);
        assert!(whitney_sum([1.0, 0.0], [1.0, 0.0], 2f64.powi(-8)).is_err());
        assert!(whitney_sum([1.0, 0.0], [0.0, 1.0], 0.3).is_err());
    }

    #[test]
    fn coarse_cover_examples() {
        assert!(coarse_sector_cover([1.0, 0.0], [1.0, 0.0], 1, 0.25).unwrap() >= 1);
        let c = coarse_sector_cover([1.0, 0.0], [1.0, 0.1], 2, PI / 4.0).unwrap();
        // Enumeration oracle: count directly over all pairs, with the same
        // epsilon-closed boundary convention as the library.
        let set = omega_set(PI / 4.0).unwrap();
        let eps = 1e-12;
        let mut direct = 0;
        for i in 0..set.len() {
            for j in 0..set.len() {
                let wi = set.direction(i);
                let wj = set.direction(j);
                if angle([1.0, 0.0], wi).unwrap() <= PI / 4.0 + eps
                    && angle([1.0, 0.1], wj).unwrap() <= PI / 4.0 + eps
                    && angle(wi, wj).unwrap() <= 4.0 * PI / 4.0 + eps
                {
                    direct += 1;
                }
            }
        }
        assert_eq!(c, direct);
        assert!(coarse_sector_cover([1.0, 0.0], [0.0, 1.0], 1, 0.25).is_err());
    }

    #[test]
    fn nullplane_count_cases() {
        // Plane misses the circle entirely.
        let x = FreqPoint::new(10.0, [1.5, 0.0]);
        assert_eq!(nullplane_count(x, 0.01, 0.1, 1.0).unwrap(), 0);

        // tau = 0, d >= 2N counts every direction.
        let x = FreqPoint::new(0.0, [1.5, 0.0]);
        let set = omega_set(0.25).unwrap();
        assert_eq!(nullplane_count(x, 3.0, 0.25, 1.0).unwrap(), set.len());

        // Spec example with enumeration oracle and the lemma bound.
        let x = FreqPoint::new(1.0, [1.0, 0.0]);
        let c = nullplane_count(x, 0.01, 0.05, 1.0).unwrap();
        let set = omega_set(0.05).unwrap();
        let direct = set
            .directions()
            .iter()
            .filter(|w| (-x.tau + dot(x.xi, **w)).abs() <= 0.01)
            .count();
        assert_eq!(c, direct);
        let bound = 8.0 * (1.0 + (0.01f64 / (1.0 * 0.05 * 0.05)).sqrt());
        assert!((c as f64) <= bound);

        // Out-of-annulus input errors.
        assert!(nullplane_count(FreqPoint::new(0.0, [3.0, 0.0]), 0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn cone_nullslab_certified_constant_and_counterexample() {
        // gamma -> 0 with L fixed: width c*L suffices.
        assert!(cone_nullslab_inclusion(
            Sign::Plus,
            1.0,
            0.01,
            1e-6,
            [1.0, 0.0],
            10_000,
            42,
            tolerances::CONE_PLANE_C
        )
        .unwrap());
        // Spec example: N=1, L=0.001, gamma=0.1.
        assert!(cone_nullslab_inclusion(
            Sign::Plus,
            1.0,
            0.001,
            0.1,
            unit_from_angle(0.4),
            100_000,
            42,
            tolerances::CONE_PLANE_C
        )
        .unwrap());
        assert!(cone_nullslab_inclusion(
            Sign::Minus,
            2.0,
            0.04,
            0.2,
            unit_from_angle(-1.0),
            100_000,
            43,
            tolerances::CONE_PLANE_C
        )
        .unwrap());
        // Deliberately shrunken slab (half the certified constant) fails:
        // at L = N gamma^2 the supremum is 2 max(L, N gamma^2).
        assert!(!cone_nullslab_inclusion(
            Sign::Plus,
            1.0,
            0.01,
            0.1,
            [1.0, 0.0],
            100_000,
            42,
            tolerances::CONE_PLANE_C / 2.0
        )
        .unwrap());
    }
}
