//! Frequency-space points, region grammar, membership predicates, angles
//! and hyperbolic weights.
//!
//! Membership conventions are normalized once and used everywhere:
//! `|xi| <~ N` means `|xi| <= 2N`, `|xi| ~ N` means `N <= |xi| < 2N`, and a
//! hyperbolic thickness `O(L)` means `|tau -+ |xi|| <= L`. Strips of width
//! `r` have half-width `r/2` about the center line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm2(a: Vec2) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn scale(a: Vec2, s: f64) -> Vec2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn add2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Counterclockwise normal of `a`.
#[inline]
pub fn perp(a: Vec2) -> Vec2 {
    [-a[1], a[0]]
}

#[inline]
pub fn unit_from_angle(phi: f64) -> Vec2 {
    [phi.cos(), phi.sin()]
}

#[inline]
pub fn angle_of(a: Vec2) -> f64 {
    a[1].atan2(a[0])
}

#[inline]
pub fn rotate2(a: Vec2, phi: f64) -> Vec2 {
    let (s, c) = phi.sin_cos();
    [c * a[0] - s * a[1], s * a[0] + c * a[1]]
}

/// Angle between nonzero vectors, in [0, pi]. The cosine is clamped before
/// `acos` so near-parallel inputs cannot produce NaN.
pub fn angle(a: Vec2, b: Vec2) -> Result<f64> {
    let na = norm2(a);
    let nb = norm2(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let c = (dot(a, b) / (na * nb)).clamp(-1.0, 1.0);
    Ok(c.acos())
}

/// One of the two cone sheets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    #[inline]
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i8::deserialize(d)?;
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!(
                "sign must be 1 or -1, got {other}"
            ))),
        }
    }
}

/// A point X = (tau, xi) in 2+1-dimensional frequency space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqPoint {
    pub tau: f64,
    pub xi: Vec2,
}

impl FreqPoint {
    pub fn new(tau: f64, xi: Vec2) -> Self {
        FreqPoint { tau, xi }
    }

    #[inline]
    pub fn neg(self) -> Self {
        FreqPoint {
            tau: -self.tau,
            xi: [-self.xi[0], -self.xi[1]],
        }
    }

    #[inline]
    pub fn sub(self, o: Self) -> Self {
        FreqPoint {
            tau: self.tau - o.tau,
            xi: sub2(self.xi, o.xi),
        }
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        FreqPoint {
            tau: self.tau + o.tau,
            xi: add2(self.xi, o.xi),
        }
    }

    pub fn is_finite(self) -> bool {
        self.tau.is_finite() && self.xi[0].is_finite() && self.xi[1].is_finite()
    }
}

/// Hyperbolic weight h = -tau + sign * |xi|, the distance-like quantity to
/// the chosen cone sheet.
#[inline]
pub fn hyperbolic_weight(x: FreqPoint, s: Sign) -> f64 {
    -x.tau + s.value() * norm2(x.xi)
}

/// Angle theta_12 = theta(s1 xi1, s2 xi2) between the signed spatial
/// frequencies of two points.
pub fn theta12(x1: FreqPoint, x2: FreqPoint, s1: Sign, s2: Sign) -> Result<f64> {
    angle(scale(x1.xi, s1.value()), scale(x2.xi, s2.value()))
}

/// Closed interval [lo, hi]. Serialized as a two-element array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval { lo: v[0], hi: v[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn intersect(&self, o: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    pub fn translate(&self, d: f64) -> Interval {
        Interval {
            lo: self.lo + d,
            hi: self.hi + d,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
        }
    }
}

/// Axis-aligned box in (tau, xi1, xi2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub tau: Interval,
    pub xi1: Interval,
    pub xi2: Interval,
}

impl Box3 {
    pub fn new(tau: Interval, xi1: Interval, xi2: Interval) -> Self {
        Box3 { tau, xi1, xi2 }
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.tau.len() * self.xi1.len() * self.xi2.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty() || self.xi1.is_empty() || self.xi2.is_empty()
    }

    pub fn contains(&self, x: FreqPoint) -> bool {
        self.tau.contains(x.tau) && self.xi1.contains(x.xi[0]) && self.xi2.contains(x.xi[1])
    }

    pub fn intersect(&self, o: &Box3) -> Box3 {
        Box3 {
            tau: self.tau.intersect(&o.tau),
            xi1: self.xi1.intersect(&o.xi1),
            xi2: self.xi2.intersect(&o.xi2),
        }
    }

    pub fn translate(&self, x: FreqPoint) -> Box3 {
        Box3 {
            tau: self.tau.translate(x.tau),
            xi1: self.xi1.translate(x.xi[0]),
            xi2: self.xi2.translate(x.xi[1]),
        }
    }

    pub fn neg(&self) -> Box3 {
        Box3 {
            tau: self.tau.neg(),
            xi1: self.xi1.neg(),
            xi2: self.xi2.neg(),
        }
    }

    /// Minkowski sum, the reachable set of pairwise sums.
    pub fn minkowski_sum(&self, o: &Box3) -> Box3 {
        Box3 {
            tau: Interval::new(self.tau.lo + o.tau.lo, self.tau.hi + o.tau.hi),
            xi1: Interval::new(self.xi1.lo + o.xi1.lo, self.xi1.hi + o.xi1.hi),
            xi2: Interval::new(self.xi2.lo + o.xi2.lo, self.xi2.hi + o.xi2.hi),
        }
    }

    pub fn hull(&self, o: &Box3) -> Box3 {
        Box3 {
            tau: self.tau.hull(&o.tau),
            xi1: self.xi1.hull(&o.xi1),
            xi2: self.xi2.hull(&o.xi2),
        }
    }

    fn corners_xi(&self) -> [Vec2; 4] {
        [
            [self.xi1.lo, self.xi2.lo],
            [self.xi1.hi, self.xi2.lo],
            [self.xi1.hi, self.xi2.hi],
            [self.xi1.lo, self.xi2.hi],
        ]
    }
}

/// Measurable frequency sets from the region grammar: thickened cones and
/// their sector pieces, strips, slabs, balls and boxes, closed under
/// translation, reflection and finite intersection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    /// K^s_{N,L}: |xi| <= 2N and tau = s|xi| + O(L).
    ConeBall { sign: Sign, n: f64, l: f64 },
    /// Kdot^s_{N,L}: N <= |xi| < 2N and tau = s|xi| + O(L).
    ConeAnnulus { sign: Sign, n: f64, l: f64 },
    /// Kdot^s_{N,L,gamma}(omega): additionally theta(s xi, omega) <= gamma.
    ConeSector {
        sign: Sign,
        n: f64,
        l: f64,
        gamma: f64,
        omega: Vec2,
    },
    /// R x T_r(omega): |xi . omega_perp| <= r/2 (strip of total width r).
    SpatialStrip { r: f64, omega: Vec2 },
    /// {X : xi . omega in I}.
    Slab { omega: Vec2, i: Interval },
    /// H_d(omega): |-tau + xi . omega| <= d.
    NullSlab { d: f64, omega: Vec2 },
    /// R x B(center, radius).
    SpatialBall { center: Vec2, radius: f64 },
    Box {
        tau: Interval,
        xi1: Interval,
        xi2: Interval,
    },
    Translate {
        offset: FreqPoint,
        inner: std::boxed::Box<Region>,
    },
    /// {-X : X in inner}.
    Reflect { inner: std::boxed::Box<Region> },
    Intersect { items: Vec<Region> },
}

fn check_unit(omega: Vec2, what: &str) -> Result<()> {
    if (norm2(omega) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "{what}: omega must be a unit vector, |omega| = {}",
            norm2(omega)
        )));
    }
    Ok(())
}

fn check_pos(v: f64, what: &str) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{what} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

impl Region {
    /// Validates parameter invariants recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            Region::ConeBall { n, l, .. } | Region::ConeAnnulus { n, l, .. } => {
                check_pos(*n, "cone N")?;
                check_pos(*l, "cone L")
            }
            Region::ConeSector {
                n, l, gamma, omega, ..
            } => {
                check_pos(*n, "sector N")?;
                check_pos(*l, "sector L")?;
                if !(*gamma > 0.0 && *gamma <= std::f64::consts::PI) {
                    return Err(Error::InvalidParameter(format!(
                        "sector gamma must be in (0, pi], got {gamma}"
                    )));
                }
                check_unit(*omega, "cone_sector")
            }
            Region::SpatialStrip { r, omega } => {
                check_pos(*r, "strip r")?;
                check_unit(*omega, "spatial_strip")
            }
            Region::Slab { omega, i } => {
                check_unit(*omega, "slab")?;
                if i.is_empty() {
                    return Err(Error::InvalidParameter("slab interval is empty".into()));
                }
                Ok(())
            }
            Region::NullSlab { d, omega } => {
                check_pos(*d, "null slab d")?;
                check_unit(*omega, "null_slab")
            }
            Region::SpatialBall { radius, .. } => check_pos(*radius, "ball radius"),
            Region::Box { tau, xi1, xi2 } => {
                if tau.is_empty() || xi1.is_empty() || xi2.is_empty() {
                    return Err(Error::InvalidParameter("box has an empty interval".into()));
                }
                Ok(())
            }
            Region::Translate { offset, inner } => {
                if !offset.is_finite() {
                    return Err(Error::InvalidParameter("translate offset not finite".into()));
                }
                inner.validate()
            }
            Region::Reflect { inner } => inner.validate(),
            Region::Intersect { items } => {
                for r in items {
                    r.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Membership test under the normalized conventions.
    pub fn contains(&self, x: FreqPoint) -> bool {
        match self {
            Region::ConeBall { sign, n, l } => {
                let rho = norm2(x.xi);
                rho <= 2.0 * n && (x.tau - sign.value() * rho).abs() <= *l
            }
            Region::ConeAnnulus { sign, n, l } => {
                let rho = norm2(x.xi);
                *n <= rho && rho < 2.0 * n && (x.tau - sign.value() * rho).abs() <= *l
            }
            Region::ConeSector {
                sign,
                n,
                l,
                gamma,
                omega,
            } => {
                let rho = norm2(x.xi);
                if !(*n <= rho && rho < 2.0 * n && (x.tau - sign.value() * rho).abs() <= *l) {
                    return false;
                }
                // rho > 0 here, so the angle is well-defined.
                let c = (dot(scale(x.xi, sign.value()), *omega) / rho).clamp(-1.0, 1.0);
                c.acos() <= *gamma
            }
            Region::SpatialStrip { r, omega } => dot(x.xi, perp(*omega)).abs() <= 0.5 * r,
            Region::Slab { omega, i } => i.contains(dot(x.xi, *omega)),
            Region::NullSlab { d, omega } => (-x.tau + dot(x.xi, *omega)).abs() <= *d,
            Region::SpatialBall { center, radius } => norm2(sub2(x.xi, *center)) <= *radius,
            Region::Box { tau, xi1, xi2 } => {
                tau.contains(x.tau) && xi1.contains(x.xi[0]) && xi2.contains(x.xi[1])
            }
            Region::Translate { offset, inner } => inner.contains(x.sub(*offset)),
            Region::Reflect { inner } => inner.contains(x.neg()),
            Region::Intersect { items } => items.iter().all(|r| r.contains(x)),
        }
    }

    /// A bounding box, tight within a factor 2 per axis for the primitive
    /// cone regions. Errors if the region has no bounded factor on some axis.
    pub fn bounding_box(&self) -> Result<Box3> {
        match self.bounds()? {
            Some(b) => Ok(b),
            // Provably empty set: any box contains it; report a point box.
            None => Ok(Box3::new(
                Interval::new(0.0, 0.0),
                Interval::new(0.0, 0.0),
                Interval::new(0.0, 0.0),
            )),
        }
    }

    /// None means "provably empty".
    pub(crate) fn bounds(&self) -> Result<Option<Box3>> {
        let base = self.base_box()?;
        match base {
            Some(b) => Ok(self.refine(&b)),
            None => Err(Error::UnboundedRegion(self.unbounded_name())),
        }
    }

    fn unbounded_name(&self) -> String {
        match self {
            Region::SpatialStrip { .. } => "spatial_strip".into(),
            Region::Slab { .. } => "slab".into(),
            Region::NullSlab { .. } => "null_slab".into(),
            Region::SpatialBall { .. } => "spatial_ball (unbounded in tau)".into(),
            Region::Translate { inner, .. } | Region::Reflect { inner } => inner.unbounded_name(),
            Region::Intersect { .. } => "intersection with no bounded factor".into(),
            _ => "region".into(),
        }
    }

    /// Box from the bounded factors only; None if there is none.
    fn base_box(&self) -> Result<Option<Box3>> {
        Ok(match self {
            Region::ConeBall { sign, n, l } => {
                let rho = Interval::new(0.0, 2.0 * n);
                Some(cone_box(*sign, rho, *l))
            }
            Region::ConeAnnulus { sign, n, l } => {
                let rho = Interval::new(*n, 2.0 * n);
                Some(cone_box(*sign, rho, *l))
            }
            Region::ConeSector {
                sign,
                n,
                l,
                gamma,
                omega,
            } => {
                let rho = Interval::new(*n, 2.0 * n);
                let axis = scale(*omega, sign.value());
                let (x1, x2) = annular_sector_bounds(rho, angle_of(axis), *gamma);
                let t = cone_box(*sign, rho, *l).tau;
                Some(Box3::new(t, x1, x2))
            }
            Region::Box { tau, xi1, xi2 } => Some(Box3::new(*tau, *xi1, *xi2)),
            Region::SpatialStrip { .. }
            | Region::Slab { .. }
            | Region::NullSlab { .. }
            | Region::SpatialBall { .. } => None,
            Region::Translate { offset, inner } => {
                inner.base_box()?.map(|b| b.translate(*offset))
            }
            Region::Reflect { inner } => inner.base_box()?.map(|b| b.neg()),
            Region::Intersect { items } => {
                let mut acc: Option<Box3> = None;
                for r in items {
                    if let Some(b) = r.base_box()? {
                        acc = Some(match acc {
                            Some(a) => a.intersect(&b),
                            None => b,
                        });
                    }
                }
                acc
            }
        })
    }

    /// Shrinks `b` using every factor, including the unbounded ones.
    /// Returns None when the intersection is provably empty.
    fn refine(&self, b: &Box3) -> Option<Box3> {
        if b.is_empty() {
            return None;
        }
        match self {
            Region::ConeBall { .. } | Region::ConeAnnulus { .. } | Region::ConeSector { .. } => {
                let own = self.base_box().ok().flatten()?;
                let r = b.intersect(&own);
                (!r.is_empty()).then_some(r)
            }
            Region::Box { tau, xi1, xi2 } => {
                let r = b.intersect(&Box3::new(*tau, *xi1, *xi2));
                (!r.is_empty()).then_some(r)
            }
            Region::SpatialBall { center, radius } => {
                let r = b.intersect(&Box3::new(
                    b.tau,
                    Interval::new(center[0] - radius, center[0] + radius),
                    Interval::new(center[1] - radius, center[1] + radius),
                ));
                (!r.is_empty()).then_some(r)
            }
            Region::Slab { omega, i } => clip_box_by_band(b, *omega, *i),
            Region::SpatialStrip { r, omega } => {
                clip_box_by_band(b, perp(*omega), Interval::new(-0.5 * r, 0.5 * r))
            }
            Region::NullSlab { d, omega } => {
                // tau = xi.omega + O(d): bound xi.omega over the xi-rectangle.
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for c in b.corners_xi() {
                    let v = dot(c, *omega);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                let t = b.tau.intersect(&Interval::new(lo - d, hi + d));
                let r = Box3::new(t, b.xi1, b.xi2);
                (!r.is_empty()).then_some(r)
            }
            Region::Translate { offset, inner } => {
                let shifted = b.translate(offset.neg());
                inner.refine(&shifted).map(|r| r.translate(*offset))
            }
            Region::Reflect { inner } => inner.refine(&b.neg()).map(|r| r.neg()),
            Region::Intersect { items } => {
                let mut cur = *b;
                for r in items {
                    cur = r.refine(&cur)?;
                }
                Some(cur)
            }
        }
    }

    /// Region with all direction parameters, centers and offsets rotated by
    /// `phi` about the tau-axis. Boxes are not rotation-closed and error.
    pub fn rotated(&self, phi: f64) -> Result<Region> {
        Ok(match self {
            Region::ConeBall { .. } | Region::ConeAnnulus { .. } => self.clone(),
            Region::ConeSector {
                sign,
                n,
                l,
                gamma,
                omega,
            } => Region::ConeSector {
                sign: *sign,
                n: *n,
                l: *l,
                gamma: *gamma,
                omega: rotate2(*omega, phi),
            },
            Region::SpatialStrip { r, omega } => Region::SpatialStrip {
                r: *r,
                omega: rotate2(*omega, phi),
            },
            Region::Slab { omega, i } => Region::Slab {
                omega: rotate2(*omega, phi),
                i: *i,
            },
            Region::NullSlab { d, omega } => Region::NullSlab {
                d: *d,
                omega: rotate2(*omega, phi),
            },
            Region::SpatialBall { center, radius } => Region::SpatialBall {
                center: rotate2(*center, phi),
                radius: *radius,
            },
            Region::Box { .. } => {
                return Err(Error::InvalidParameter(
                    "axis-aligned box cannot be rotated".into(),
                ))
            }
            Region::Translate { offset, inner } => Region::Translate {
                offset: FreqPoint::new(offset.tau, rotate2(offset.xi, phi)),
                inner: std::boxed::Box::new(inner.rotated(phi)?),
            },
            Region::Reflect { inner } => Region::Reflect {
                inner: std::boxed::Box::new(inner.rotated(phi)?),
            },
            Region::Intersect { items } => Region::Intersect {
                items: items
                    .iter()
                    .map(|r| r.rotated(phi))
                    .collect::<Result<Vec<_>>>()?,
            },
        })
    }
}

fn cone_box(sign: Sign, rho: Interval, l: f64) -> Box3 {
    // tau = s*rho + O(L) over rho in [rho.lo, rho.hi].
    let a = sign.value() * rho.lo;
    let b = sign.value() * rho.hi;
    let tau = Interval::new(a.min(b) - l, a.max(b) + l);
    let x = Interval::new(-rho.hi, rho.hi);
    Box3::new(tau, x, x)
}

/// Bounding rectangle of the annular sector {rho in [lo,hi], |arg - phi0| <= gamma}.
fn annular_sector_bounds(rho: Interval, phi0: f64, gamma: f64) -> (Interval, Interval) {
    let mut x = Interval::new(f64::INFINITY, f64::NEG_INFINITY);
    let mut y = Interval::new(f64::INFINITY, f64::NEG_INFINITY);
    let mut take = |p: Vec2| {
        x.lo = x.lo.min(p[0]);
        x.hi = x.hi.max(p[0]);
        y.lo = y.lo.min(p[1]);
        y.hi = y.hi.max(p[1]);
    };
    for &r in &[rho.lo, rho.hi] {
        for &a in &[phi0 - gamma, phi0 + gamma] {
            take(scale(unit_from_angle(a), r));
        }
    }
    // Axis crossings of the outer arc.
    let two_pi = 2.0 * std::f64::consts::PI;
    for k in -4..=4 {
        let a = k as f64 * std::f64::consts::FRAC_PI_2;
        let mut da = a - phi0;
        da -= (da / two_pi).round() * two_pi;
        if da.abs() <= gamma {
            take(scale(unit_from_angle(a), rho.hi));
        }
    }
    (x, y)
}

/// Clips the xi-rectangle of `b` by the band {lo <= xi.dir <= hi} and
/// returns the bounding box of the clipped polygon.
fn clip_box_by_band(b: &Box3, dir: Vec2, band: Interval) -> Option<Box3> {
    let mut poly: Vec<Vec2> = b.corners_xi().to_vec();
    poly = clip_halfplane(&poly, dir, band.hi, true);
    poly = clip_halfplane(&poly, dir, band.lo, false);
    if poly.is_empty() {
        return None;
    }
    let mut x = Interval::new(f64::INFINITY, f64::NEG_INFINITY);
    let mut y = Interval::new(f64::INFINITY, f64::NEG_INFINITY);
    for p in &poly {
        x.lo = x.lo.min(p[0]);
        x.hi = x.hi.max(p[0]);
        y.lo = y.lo.min(p[1]);
        y.hi = y.hi.max(p[1]);
    }
    Some(Box3::new(b.tau, x, y))
}

/// Sutherland-Hodgman step: keep {p.dir <= c} if `upper`, else {p.dir >= c}.
fn clip_halfplane(poly: &[Vec2], dir: Vec2, c: f64, upper: bool) -> Vec<Vec2> {
    let inside = |p: Vec2| {
        if upper {
            dot(p, dir) <= c
        } else {
            dot(p, dir) >= c
        }
    };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let ia = inside(a);
        let ib = inside(b);
        if ia {
            out.push(a);
        }
        if ia != ib {
            let da = dot(a, dir) - c;
            let db = dot(b, dir) - c;
            let t = da / (da - db);
            out.push(add2(a, scale(sub2(b, a), t)));
        }
    }
    out
}

/// Output classification of a convolution interaction: the output spatial
/// scale `n0` is either much smaller than, or comparable to, max(n1, n2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputClass {
    LowOutput,
    HighOutput,
}

/// LowOutput iff n0 <= rho * max(n1, n2) with the dyadic-safe gap rho = 1/4.
pub fn classify_output(n0: f64, n1: f64, n2: f64) -> OutputClass {
    if n0 <= crate::tolerances::CLASSIFY_RHO * n1.max(n2) {
        OutputClass::LowOutput
    } else {
        OutputClass::HighOutput
    }
}

/// Dyadic frequency/weight parameters of one trilinear interaction.
/// `l0` may be `f64::INFINITY`, encoding "no output hyperbolic restriction".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicParams {
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    #[serde(with = "serde_maybe_inf")]
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub signs: (Sign, Sign, Sign),
}

mod serde_maybe_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum V {
            Num(f64),
            Str(String),
        }
        match V::deserialize(d)? {
            V::Num(x) => Ok(x),
            V::Str(s) if s == "inf" => Ok(f64::INFINITY),
            V::Str(s) => Err(serde::de::Error::custom(format!("bad l0 value {s:?}"))),
        }
    }
}

impl DyadicParams {
    pub fn new(n: [f64; 3], l: [f64; 3], signs: (Sign, Sign, Sign)) -> Result<Self> {
        let p = DyadicParams {
            n0: n[0],
            n1: n[1],
            n2: n[2],
            l0: l[0],
            l1: l[1],
            l2: l[2],
            signs,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.n0, "N0"),
            (self.n1, "N1"),
            (self.n2, "N2"),
            (self.l1, "L1"),
            (self.l2, "L2"),
        ] {
            check_pos(v, name)?;
        }
        if !(self.l0 > 0.0) {
            return Err(Error::InvalidParameter("L0 must be positive".into()));
        }
        Ok(())
    }

    pub fn n_min_012(&self) -> f64 {
        self.n0.min(self.n1).min(self.n2)
    }

    pub fn n_min_12(&self) -> f64 {
        self.n1.min(self.n2)
    }

    pub fn n_min_0j(&self, j: usize) -> f64 {
        self.n0.min(self.nj(j))
    }

    pub fn l_min_12(&self) -> f64 {
        self.l1.min(self.l2)
    }

    pub fn l_max_12(&self) -> f64 {
        self.l1.max(self.l2)
    }

    pub fn l_min_0j(&self, j: usize) -> f64 {
        self.l0.min(self.lj(j))
    }

    pub fn l_max_0j(&self, j: usize) -> f64 {
        self.l0.max(self.lj(j))
    }

    pub fn l_min_012(&self) -> f64 {
        self.l0.min(self.l1).min(self.l2)
    }

    pub fn l_med_012(&self) -> f64 {
        let mut v = [self.l0, self.l1, self.l2];
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[1]
    }

    pub fn l_max_012(&self) -> f64 {
        self.l0.max(self.l1).max(self.l2)
    }

    fn nj(&self, j: usize) -> f64 {
        match j {
            1 => self.n1,
            2 => self.n2,
            _ => panic!("leg index must be 1 or 2"),
        }
    }

    fn lj(&self, j: usize) -> f64 {
        match j {
            1 => self.l1,
            2 => self.l2,
            _ => panic!("leg index must be 1 or 2"),
        }
    }

    /// The annular leg region Kdot^{s_j}_{N_j, L_j} for j = 1, 2.
    pub fn leg_annulus(&self, j: usize) -> Region {
        let (sign, n, l) = match j {
            1 => (self.signs.1, self.n1, self.l1),
            2 => (self.signs.2, self.n2, self.l2),
            _ => panic!("leg index must be 1 or 2"),
        };
        Region::ConeAnnulus { sign, n, l }
    }

    /// The output region K^{s_0}_{N_0, L_0}; for infinite L0 the hyperbolic
    /// restriction drops and only the spatial ball |xi| <= 2 N0 remains.
    pub fn output_region(&self) -> Region {
        if self.l0.is_infinite() {
            Region::SpatialBall {
                center: [0.0, 0.0],
                radius: 2.0 * self.n0,
            }
        } else {
            Region::ConeBall {
                sign: self.signs.0,
                n: self.n0,
                l: self.l0,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_orthogonal_identical_antipodal() {
        assert!((angle([1.0, 0.0], [0.0, 1.0]).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(angle([1.0, 0.0], [1.0, 0.0]).unwrap(), 0.0);
        assert!((angle([1.0, 0.0], [-1.0, 0.0]).unwrap() - PI).abs() < 1e-15);
        assert!(angle([0.0, 0.0], [1.0, 0.0]).is_err());
    }

    #[test]
    fn theta12_examples() {
        let x = |t: f64, a, b| FreqPoint::new(t, [a, b]);
        let th = theta12(x(1.0, 1.0, 0.0), x(1.0, 0.0, 1.0), Sign::Plus, Sign::Plus).unwrap();
        assert!((th - PI / 2.0).abs() < 1e-15);
        let th = theta12(x(1.0, 1.0, 0.0), x(1.0, 1.0, 0.0), Sign::Plus, Sign::Minus).unwrap();
        assert!((th - PI).abs() < 1e-15);
        let th = theta12(x(1.0, 1.0, 0.0), x(1.0, 1.0, 1.0), Sign::Plus, Sign::Plus).unwrap();
        assert!((th - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_weight_examples() {
        let x = FreqPoint::new(5.0, [3.0, 4.0]);
        assert_eq!(hyperbolic_weight(x, Sign::Plus), 0.0);
        assert_eq!(hyperbolic_weight(x, Sign::Minus), -10.0);
        assert_eq!(hyperbolic_weight(FreqPoint::new(0.0, [1.0, 0.0]), Sign::Plus), 1.0);
    }

    #[test]
    fn hyperbolic_weight_product_identity() {
        let rng = crate::rng::CounterRng::new(11);
        for i in 0..10_000u64 {
            let x = FreqPoint::new(
                rng.f64_in(3 * i, -5.0, 5.0),
                [rng.f64_in(3 * i + 1, -5.0, 5.0), rng.f64_in(3 * i + 2, -5.0, 5.0)],
            );
            let lhs = hyperbolic_weight(x, Sign::Plus) * hyperbolic_weight(x, Sign::Minus);
            let rhs = x.tau * x.tau - dot(x.xi, x.xi);
            // Relative to the natural scale tau^2 + |xi|^2; the difference
            // itself cancels near the cone.
            let scale = (x.tau * x.tau + dot(x.xi, x.xi)).max(1e-300);
            assert!((lhs - rhs).abs() / scale < 1e-12);
        }
    }

    #[test]
    fn cone_membership_examples() {
        let r = Region::ConeBall {
            sign: Sign::Plus,
            n: 1.0,
            l: 0.1,
        };
        assert!(r.contains(FreqPoint::new(1.0, [0.95, 0.0])));
        assert!(!r.contains(FreqPoint::new(-1.0, [0.95, 0.0])));

        let t = Region::Translate {
            offset: FreqPoint::new(1.0, [0.0, 0.0]),
            inner: std::boxed::Box::new(Region::NullSlab {
                d: 0.1,
                omega: [1.0, 0.0],
            }),
        };
        assert!(t.contains(FreqPoint::new(1.05, [0.0, 0.0])));
    }

    #[test]
    fn annulus_membership_is_exact_on_parameters() {
        let rng = crate::rng::CounterRng::new(5);
        let reg = Region::ConeAnnulus {
            sign: Sign::Minus,
            n: 2.0,
            l: 0.25,
        };
        let mut hits = 0;
        for i in 0..20_000u64 {
            let x = FreqPoint::new(
                rng.f64_in(3 * i, -6.0, 6.0),
                [rng.f64_in(3 * i + 1, -5.0, 5.0), rng.f64_in(3 * i + 2, -5.0, 5.0)],
            );
            if reg.contains(x) {
                hits += 1;
                let rho = norm2(x.xi);
                assert!(hyperbolic_weight(x, Sign::Minus).abs() <= 0.25);
                assert!((2.0..4.0).contains(&rho));
            }
        }
        assert!(hits > 100);
    }

    #[test]
    fn bounding_box_annulus_example() {
        let r = Region::ConeAnnulus {
            sign: Sign::Plus,
            n: 1.0,
            l: 0.01,
        };
        let b = r.bounding_box().unwrap();
        assert!((b.tau.lo - 0.99).abs() < 1e-12 && (b.tau.hi - 2.01).abs() < 1e-12);
        assert_eq!((b.xi1.lo, b.xi1.hi), (-2.0, 2.0));
        assert_eq!((b.xi2.lo, b.xi2.hi), (-2.0, 2.0));
    }

    #[test]
    fn bounding_box_identity_and_slab_tightening() {
        let bx = Region::Box {
            tau: Interval::new(0.0, 1.0),
            xi1: Interval::new(-1.0, 2.0),
            xi2: Interval::new(0.5, 0.75),
        };
        let b = bx.bounding_box().unwrap();
        assert_eq!(b.tau, Interval::new(0.0, 1.0));
        assert_eq!(b.xi1, Interval::new(-1.0, 2.0));

        let r = Region::Intersect {
            items: vec![
                Region::ConeAnnulus {
                    sign: Sign::Plus,
                    n: 1.0,
                    l: 0.01,
                },
                Region::Slab {
                    omega: [1.0, 0.0],
                    i: Interval::new(0.5, 0.6),
                },
            ],
        };
        let b = r.bounding_box().unwrap();
        assert!((b.xi1.lo - 0.5).abs() < 1e-12 && (b.xi1.hi - 0.6).abs() < 1e-12);

        assert!(matches!(
            Region::Slab {
                omega: [1.0, 0.0],
                i: Interval::new(0.0, 1.0)
            }
            .bounding_box(),
            Err(Error::UnboundedRegion(_))
        ));
    }

    #[test]
    fn sector_bounding_box_contains_members() {
        let reg = Region::ConeSector {
            sign: Sign::Minus,
            n: 1.0,
            l: 0.05,
            gamma: 0.4,
            omega: unit_from_angle(1.1),
        };
        let b = reg.bounding_box().unwrap();
        let rng = crate::rng::CounterRng::new(9);
        for i in 0..20_000u64 {
            let rho = rng.f64_in(3 * i, 1.0, 2.0);
            let phi = 1.1 + rng.f64_in(3 * i + 1, -0.4, 0.4);
            // sign = -: xi = -rho * u(phi), tau = -rho + O(L)
            let xi = scale(unit_from_angle(phi), -rho);
            let x = FreqPoint::new(-rho + rng.f64_in(3 * i + 2, -0.05, 0.05), xi);
            assert!(reg.contains(x), "constructed point must be a member");
            assert!(b.contains(x), "bbox must contain member {x:?}");
        }
    }

    #[test]
    fn classify_output_examples() {
        assert_eq!(classify_output(0.1, 1.0, 1.0), OutputClass::LowOutput);
        assert_eq!(classify_output(1.0, 1.0, 0.1), OutputClass::HighOutput);
        assert_eq!(classify_output(1.0, 1.0, 1.0), OutputClass::HighOutput);
    }

    #[test]
    fn translate_reflect_identities_hold() {
        let rng = crate::rng::CounterRng::new(21);
        let base = Region::ConeSector {
            sign: Sign::Plus,
            n: 1.0,
            l: 0.2,
            gamma: 0.7,
            omega: unit_from_angle(0.3),
        };
        for i in 0..10_000u64 {
            let k = 6 * i;
            let x0 = FreqPoint::new(
                rng.f64_in(k, -2.0, 2.0),
                [rng.f64_in(k + 1, -2.0, 2.0), rng.f64_in(k + 2, -2.0, 2.0)],
            );
            let x = FreqPoint::new(
                rng.f64_in(k + 3, -4.0, 4.0),
                [rng.f64_in(k + 4, -4.0, 4.0), rng.f64_in(k + 5, -4.0, 4.0)],
            );
            let tr = Region::Translate {
                offset: x0,
                inner: std::boxed::Box::new(base.clone()),
            };
            assert_eq!(tr.contains(x), base.contains(x.sub(x0)));
            let rf = Region::Reflect {
                inner: std::boxed::Box::new(base.clone()),
            };
            assert_eq!(rf.contains(x), base.contains(x.neg()));
        }
    }

    #[test]
    fn contains_is_rotation_equivariant() {
        let rng = crate::rng::CounterRng::new(33);
        let regions = vec![
            Region::ConeSector {
                sign: Sign::Plus,
                n: 1.0,
                l: 0.1,
                gamma: 0.5,
                omega: unit_from_angle(0.2),
            },
            Region::SpatialStrip {
                r: 0.4,
                omega: unit_from_angle(-0.7),
            },
            Region::NullSlab {
                d: 0.3,
                omega: unit_from_angle(2.0),
            },
            Region::Intersect {
                items: vec![
                    Region::ConeAnnulus {
                        sign: Sign::Minus,
                        n: 1.0,
                        l: 0.2,
                    },
                    Region::Slab {
                        omega: unit_from_angle(1.3),
                        i: Interval::new(-0.5, 0.5),
                    },
                ],
            },
        ];
        for (ri, reg) in regions.iter().enumerate() {
            for i in 0..2_000u64 {
                let k = 4 * (i + 10_000 * ri as u64);
                let phi = rng.f64_in(k, 0.0, 6.28);
                let x = FreqPoint::new(
                    rng.f64_in(k + 1, -3.0, 3.0),
                    [rng.f64_in(k + 2, -3.0, 3.0), rng.f64_in(k + 3, -3.0, 3.0)],
                );
                let rot = reg.rotated(phi).unwrap();
                let xr = FreqPoint::new(x.tau, rotate2(x.xi, phi));
                assert_eq!(reg.contains(x), rot.contains(xr));
            }
        }
    }

    #[test]
    fn region_json_round_trip() {
        let r = Region::Intersect {
            items: vec![
                Region::ConeSector {
                    sign: Sign::Minus,
                    n: 2.0,
                    l: 0.125,
                    gamma: 0.25,
                    omega: [0.6, 0.8],
                },
                Region::Translate {
                    offset: FreqPoint::new(1.5, [-0.25, 0.75]),
                    inner: std::boxed::Box::new(Region::Reflect {
                        inner: std::boxed::Box::new(Region::NullSlab {
                            d: 0.01,
                            omega: [0.0, 1.0],
                        }),
                    }),
                },
            ],
        };
        let s = serde_json::to_string(&r).unwrap();
        let back: Region = serde_json::from_str(&s).unwrap();
        assert_eq!(r, back);
        assert!(s.contains("\"type\":\"intersect\"") && s.contains("\"items\""));
    }

    #[test]
    fn dyadic_accessors() {
        let p = DyadicParams::new(
            [1.0, 2.0, 4.0],
            [f64::INFINITY, 0.25, 0.0625],
            (Sign::Plus, Sign::Plus, Sign::Minus),
        )
        .unwrap();
        assert_eq!(p.n_min_012(), 1.0);
        assert_eq!(p.n_min_12(), 2.0);
        assert_eq!(p.l_min_12(), 0.0625);
        assert_eq!(p.l_max_12(), 0.25);
        assert_eq!(p.l_min_012(), 0.0625);
        assert_eq!(p.l_med_012(), 0.25);
        assert!(p.l_max_012().is_infinite());
        let s = serde_json::to_string(&p).unwrap();
        let back: DyadicParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }
}
