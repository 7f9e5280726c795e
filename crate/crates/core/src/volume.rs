//! Volumes of region intersections: Monte Carlo, stratified tau-slice
//! integration and exact 2D circle/annulus areas. These are the quantities
//! the volume route turns into squared bilinear constants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{norm2, Box3, DyadicParams, FreqPoint, Interval, Region, Sign};
use crate::rng::CounterRng;
use crate::tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    MonteCarlo,
    SliceExact,
    SliceMc,
}

/// A volume with its sampling uncertainty. `stderr` is zero exactly when the
/// method is deterministic slice integration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub method: VolumeMethod,
}

impl VolumeEstimate {
    pub fn exact(value: f64, slices: usize) -> Self {
        VolumeEstimate {
            value,
            stderr: 0.0,
            n_samples: slices,
            seed: 0,
            method: VolumeMethod::SliceExact,
        }
    }

    fn zero(method: VolumeMethod, seed: u64) -> Self {
        VolumeEstimate {
            value: 0.0,
            stderr: 0.0,
            n_samples: 0,
            seed,
            method,
        }
    }
}

/// Two thickened circles S^1_delta(r) and xi0 + S^1_Delta(R) at center
/// distance `dist`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CircleConfig {
    pub r: f64,
    pub delta: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub dist: f64,
}

impl CircleConfig {
    /// Lemma hypotheses "delta << r", "Delta << R" in the enforced form
    /// delta <= r/10 and Delta <= R/10. The exact-area oracle itself does
    /// not need them.
    pub fn satisfies_lemma_hypotheses(&self) -> bool {
        self.delta > 0.0
            && self.big_delta > 0.0
            && self.delta <= self.r / 10.0
            && self.big_delta <= self.big_r / 10.0
            && self.dist > 0.0
    }
}

/// Area of the intersection of two disks with radii `a`, `b` and center
/// distance `d` (the circular lens), by the standard segment formula.
pub fn lens_area(a: f64, b: f64, d: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    if d >= a + b {
        return 0.0;
    }
    if d <= (a - b).abs() {
        let s = a.min(b);
        return PI * s * s;
    }
    let ca = ((d * d + a * a - b * b) / (2.0 * d * a)).clamp(-1.0, 1.0);
    let cb = ((d * d + b * b - a * a) / (2.0 * d * b)).clamp(-1.0, 1.0);
    let t = (-d + a + b) * (d + a - b) * (d - a + b) * (d + a + b);
    a * a * ca.acos() + b * b * cb.acos() - 0.5 * t.max(0.0).sqrt()
}

/// Exact area of {xi : |xi| in [lo1, hi1]} intersected with
/// {xi : |xi - xi0| in [lo2, hi2]}, |xi0| = d, by inclusion-exclusion over
/// the four disk pairs. Degenerate or inverted radial intervals give 0.
pub fn annular_band_intersection_area(i1: (f64, f64), i2: (f64, f64), d: f64) -> f64 {
    let (lo1, hi1) = (i1.0.max(0.0), i1.1.max(0.0));
    let (lo2, hi2) = (i2.0.max(0.0), i2.1.max(0.0));
    if hi1 <= lo1 || hi2 <= lo2 {
        return 0.0;
    }
    let a = lens_area(hi1, hi2, d) - lens_area(hi1, lo2, d) - lens_area(lo1, hi2, d)
        + lens_area(lo1, lo2, d);
    a.max(0.0)
}

/// Exact area of S^1_delta(r) and a translated S^1_Delta(R) at center
/// distance `dist` (the quantity bounded by the thickened-circle lemma).
pub fn annuli_intersection_area(c: &CircleConfig) -> f64 {
    annular_band_intersection_area(
        (c.r - c.delta, c.r + c.delta),
        (c.big_r - c.big_delta, c.big_r + c.big_delta),
        c.dist,
    )
}

/// The thickened-circle bound [r R delta Delta min(delta, Delta) / dist]^{1/2}.
/// Errors if the lemma hypotheses are violated.
pub fn circle_lemma_bound(c: &CircleConfig) -> Result<f64> {
    if !c.satisfies_lemma_hypotheses() {
        return Err(Error::InvalidParameter(format!(
            "thickened-circle hypotheses need delta <= r/10, Delta <= R/10, dist > 0; \
             got r={}, delta={}, R={}, Delta={}, dist={}",
            c.r, c.delta, c.big_r, c.big_delta, c.dist
        )));
    }
    Ok((c.r * c.big_r * c.delta * c.big_delta * c.delta.min(c.big_delta) / c.dist).sqrt())
}

/// Area of the disk of radius `radius` left of the vertical line x = t.
fn disk_left_area(radius: f64, t: f64) -> f64 {
    if radius <= 0.0 {
        return 0.0;
    }
    let t = t.clamp(-radius, radius);
    radius * radius * (-t / radius).clamp(-1.0, 1.0).acos()
        + t * (radius * radius - t * t).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct StripCircleArea {
    pub exact: f64,
    pub bound20: f64,
    pub bound22: f64,
}

/// Exact area of S^1_delta(r) in the vertical strip a < x < b, with the two
/// strip bounds delta * sqrt(r (b-a)) and (b-a) * sqrt(r delta).
///
/// Precondition: 0 < delta <= r/10 and a < b.
pub fn strip_circle_area(r: f64, delta: f64, a: f64, b: f64) -> StripCircleArea {
    debug_assert!(delta > 0.0 && delta <= r / 10.0 && a < b);
    let outer = r + delta;
    let inner = (r - delta).max(0.0);
    let exact = (disk_left_area(outer, b) - disk_left_area(outer, a))
        - (disk_left_area(inner, b) - disk_left_area(inner, a));
    StripCircleArea {
        exact: exact.max(0.0),
        bound20: delta * (r * (b - a)).sqrt(),
        bound22: (b - a) * (r * delta).sqrt(),
    }
}

/// Unbiased Monte Carlo volume of `region` inside `bounds`. Membership
/// outside the box counts as zero; the estimate is vol(box) * hits / n with真
/// binomial standard error. Deterministic for a fixed seed regardless of the
/// number of threads: every sample is a pure function of (seed, index).
pub fn mc_volume(region: &Region, bounds: &Box3, n: usize, seed: u64) -> Result<VolumeEstimate> {
    if n < 1000 {
        return Err(Error::SampleBudget(n));
    }
    let vol = bounds.volume();
    if !(vol > 0.0) || !vol.is_finite() {
        return Err(Error::DegenerateBox(format!(
            "box volume {vol} (tau {:?}, xi1 {:?}, xi2 {:?})",
            bounds.tau, bounds.xi1, bounds.xi2
        )));
    }
    let rng = CounterRng::new(seed);
    const CHUNK: usize = 1 << 14;
    let chunks = n.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            let mut local = 0u64;
            for i in lo..hi {
                let k = 3 * i as u64;
                let x = FreqPoint::new(
                    rng.f64_in(k, bounds.tau.lo, bounds.tau.hi),
                    [
                        rng.f64_in(k + 1, bounds.xi1.lo, bounds.xi1.hi),
                        rng.f64_in(k + 2, bounds.xi2.lo, bounds.xi2.hi),
                    ],
                );
                if region.contains(x) {
                    local += 1;
                }
            }
            local
        })
        .sum();
    let p = hits as f64 / n as f64;
    Ok(VolumeEstimate {
        value: vol * p,
        stderr: vol * (p * (1.0 - p) / n as f64).sqrt(),
        n_samples: n,
        seed,
        method: VolumeMethod::MonteCarlo,
    })
}

/// 2D Monte Carlo area of a predicate inside a rectangle; oracle for the
/// exact circle-area formulas.
pub fn mc_area_2d<F>(pred: F, x: Interval, y: Interval, n: usize, seed: u64) -> (f64, f64)
where
    F: Fn([f64; 2]) -> bool + Sync,
{
    let area = x.len() * y.len();
    let rng = CounterRng::new(seed);
    const CHUNK: usize = 1 << 14;
    let chunks = n.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            let mut local = 0u64;
            for i in lo..hi {
                let k = 2 * i as u64;
                if pred([rng.f64_in(k, x.lo, x.hi), rng.f64_in(k + 1, y.lo, y.hi)]) {
                    local += 1;
                }
            }
            local
        })
        .sum();
    let p = hits as f64 / n as f64;
    (area * p, area * (p * (1.0 - p) / n as f64).sqrt())
}

/// A cone shell in slice form: radial band [rho_lo, rho_hi) around the sheet
/// tau = s * |xi| with hyperbolic thickness l (possibly infinite).
#[derive(Clone, Copy, Debug)]
pub struct ConeShell {
    pub sign: Sign,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub l: f64,
}

impl ConeShell {
    pub fn annulus(sign: Sign, n: f64, l: f64) -> Self {
        ConeShell {
            sign,
            rho_lo: n,
            rho_hi: 2.0 * n,
            l,
        }
    }

    pub fn ball(sign: Sign, n: f64, l: f64) -> Self {
        ConeShell {
            sign,
            rho_lo: 0.0,
            rho_hi: 2.0 * n,
            l,
        }
    }

    /// Radial interval of the tau-slice, or None if the slice is empty.
    #[inline]
    pub fn radial_interval(&self, tau: f64) -> Option<(f64, f64)> {
        let mut lo = self.rho_lo;
        let mut hi = self.rho_hi;
        if self.l.is_finite() {
            let c = self.sign.value() * tau;
            lo = lo.max(c - self.l);
            hi = hi.min(c + self.l);
        }
        (hi > lo).then_some((lo, hi))
    }

    /// tau-range where slices can be nonempty; None when l is infinite.
    pub fn tau_range(&self) -> Option<Interval> {
        if self.l.is_finite() {
            let a = self.sign.value() * self.rho_lo;
            let b = self.sign.value() * self.rho_hi;
            Some(Interval::new(a.min(b) - self.l, a.max(b) + self.l))
        } else {
            None
        }
    }
}

/// Whether the translated factor enters as X0 - B or X0 + B.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslateMode {
    Difference,
    Sum,
}

/// Slice-exact volume of A intersect (X0 -+ B) for two cone shells, by
/// Fubini over tau: each slice is an intersection of two annular bands and
/// has a closed-form area. At most one of the shells may be infinitely
/// thick.
pub fn pair_shell_volume(
    a: &ConeShell,
    b: &ConeShell,
    x0: FreqPoint,
    mode: TranslateMode,
    slices: usize,
) -> f64 {
    let dist = norm2(x0.xi);
    // tau must lie in A's range and map into B's range.
    let b_range_in_a = b.tau_range().map(|rb| match mode {
        // tau_B = tau0 - tau in rb  =>  tau in tau0 - rb
        TranslateMode::Difference => Interval::new(x0.tau - rb.hi, x0.tau - rb.lo),
        // tau_B = tau - tau0 in rb  =>  tau in tau0 + rb
        TranslateMode::Sum => rb.translate(x0.tau),
    });
    let domain = match (a.tau_range(), b_range_in_a) {
        (Some(ra), Some(rb)) => ra.intersect(&rb),
        (Some(ra), None) => ra,
        (None, Some(rb)) => rb,
        (None, None) => panic!("pair_shell_volume: both shells infinitely thick"),
    };
    if domain.is_empty() {
        return 0.0;
    }
    let h = domain.len() / slices as f64;
    let mut acc = 0.0;
    for i in 0..slices {
        let tau = domain.lo + (i as f64 + 0.5) * h;
        let tb = match mode {
            TranslateMode::Difference => x0.tau - tau,
            TranslateMode::Sum => tau - x0.tau,
        };
        if let (Some(ia), Some(ib)) = (a.radial_interval(tau), b.radial_interval(tb)) {
            acc += annular_band_intersection_area(ia, ib, dist);
        }
    }
    acc * h
}

/// How to evaluate the E-set volume.
#[derive(Clone, Copy, Debug)]
pub enum ESetMethod {
    SliceExact { slices: usize },
    MonteCarlo { n: usize, seed: u64 },
    /// tau-grid with per-slice 2D Monte Carlo areas.
    SliceMc { slices: usize, n_per_slice: usize, seed: u64 },
}

impl ESetMethod {
    pub fn slice_exact() -> Self {
        ESetMethod::SliceExact {
            slices: tolerances::SLICE_COUNT,
        }
    }
}

/// Volume of E = Kdot^{s1}_{N1,L1} intersect [X0 - Kdot^{s2}_{N2,L2}].
pub fn e_set_volume(p: &DyadicParams, x0: FreqPoint, method: ESetMethod) -> Result<VolumeEstimate> {
    p.validate()?;
    let a = ConeShell::annulus(p.signs.1, p.n1, p.l1);
    let b = ConeShell::annulus(p.signs.2, p.n2, p.l2);
    match method {
        ESetMethod::SliceExact { slices } => {
            let v = pair_shell_volume(&a, &b, x0, TranslateMode::Difference, slices);
            Ok(VolumeEstimate::exact(v, slices))
        }
        ESetMethod::MonteCarlo { n, seed } => {
            let region = Region::Intersect {
                items: vec![
                    p.leg_annulus(1),
                    Region::Translate {
                        offset: x0,
                        inner: Box::new(Region::Reflect {
                            inner: Box::new(p.leg_annulus(2)),
                        }),
                    },
                ],
            };
            match region.bounds()? {
                None => Ok(VolumeEstimate::zero(VolumeMethod::MonteCarlo, seed)),
                Some(bb) if !(bb.volume() > 0.0) => {
                    Ok(VolumeEstimate::zero(VolumeMethod::MonteCarlo, seed))
                }
                Some(bb) => mc_volume(&region, &bb, n, seed),
            }
        }
        ESetMethod::SliceMc {
            slices,
            n_per_slice,
            seed,
        } => {
            let dist = norm2(x0.xi);
            let domain = match (a.tau_range(), b.tau_range()) {
                (Some(ra), Some(rb)) => {
                    ra.intersect(&Interval::new(x0.tau - rb.hi, x0.tau - rb.lo))
                }
                _ => unreachable!("legs always have finite L"),
            };
            if domain.is_empty() {
                return Ok(VolumeEstimate::zero(VolumeMethod::SliceMc, seed));
            }
            let h = domain.len() / slices as f64;
            let rng_base = CounterRng::new(seed);
            let mut acc = 0.0;
            let mut var = 0.0;
            for i in 0..slices {
                let tau = domain.lo + (i as f64 + 0.5) * h;
                let tb = x0.tau - tau;
                if let (Some(ia), Some(ib)) = (a.radial_interval(tau), b.radial_interval(tb)) {
                    let ext = ia.1 + ib.1; // generous rectangle around both bands
                    let rect = Interval::new(-ext, ext);
                    let (area, se) = mc_area_2d(
                        |xi| {
                            let rho = norm2(xi);
                            let rho2 = norm2([xi[0] - dist, xi[1]]);
                            ia.0 <= rho && rho < ia.1 && ib.0 <= rho2 && rho2 < ib.1
                        },
                        rect,
                        rect,
                        n_per_slice,
                        rng_base.u64_at(i as u64),
                    );
                    acc += area;
                    var += se * se;
                }
            }
            Ok(VolumeEstimate {
                value: acc * h,
                stderr: var.sqrt() * h,
                n_samples: slices * n_per_slice,
                seed,
                method: VolumeMethod::SliceMc,
            })
        }
    }
}

/// The three sup terms of the volume reduction: which set the translate
/// ranges over, and which pair gets intersected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupSelector {
    /// sup over X in A0 of |A1 intersect (X - A2)|
    OutputTranslate,
    /// sup over X in A2 of |A0 intersect (X + A1)|
    Leg2Translate,
    /// sup over X in A1 of |A0 intersect (X + A2)|
    Leg1Translate,
}

impl SupSelector {
    pub const ALL: [SupSelector; 3] = [
        SupSelector::OutputTranslate,
        SupSelector::Leg2Translate,
        SupSelector::Leg1Translate,
    ];
}

#[derive(Clone, Copy, Debug)]
pub struct SupSearchOpts {
    pub grid: usize,
    pub slices_search: usize,
    pub slices_final: usize,
    pub refine_iters: usize,
}

impl Default for SupSearchOpts {
    fn default() -> Self {
        SupSearchOpts {
            grid: tolerances::SUP_GRID,
            slices_search: tolerances::SLICE_COUNT_SEARCH,
            slices_final: tolerances::SLICE_COUNT,
            refine_iters: 24,
        }
    }
}

struct SupProblem {
    shell_a: ConeShell,
    shell_b: ConeShell,
    mode: TranslateMode,
    /// Shell the translate X ranges over.
    domain: ConeShell,
}

fn sup_problem(p: &DyadicParams, selector: SupSelector) -> SupProblem {
    let leg1 = ConeShell::annulus(p.signs.1, p.n1, p.l1);
    let leg2 = ConeShell::annulus(p.signs.2, p.n2, p.l2);
    // The volume route works in the annulus reduction (all three regions
    // Kdot): the ball form admits the degenerate concentric translate
    // |xi0| -> 0, where opposite-sign shells align along the whole annulus
    // and the sup certificate is lossy by an unbounded factor.
    let out = ConeShell::annulus(p.signs.0, p.n0, p.l0);
    match selector {
        SupSelector::OutputTranslate => SupProblem {
            shell_a: leg1,
            shell_b: leg2,
            mode: TranslateMode::Difference,
            domain: out,
        },
        SupSelector::Leg2Translate => SupProblem {
            shell_a: out,
            shell_b: leg1,
            mode: TranslateMode::Sum,
            domain: leg2,
        },
        SupSelector::Leg1Translate => SupProblem {
            shell_a: out,
            shell_b: leg2,
            mode: TranslateMode::Sum,
            domain: leg1,
        },
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Approximates one sup term of the volume reduction by grid search over
/// X0 = (tau0, (rho0, 0)) -- rotation symmetry of the shells reduces the
/// translate to two coordinates -- followed by coordinate-wise golden-section
/// refinement around the grid maximum.
pub fn sup_pair_volume(p: &DyadicParams, selector: SupSelector, opts: &SupSearchOpts) -> f64 {
    let prob = sup_problem(p, selector);
    sup_shell_volume(&prob.shell_a, &prob.shell_b, &prob.domain, prob.mode, opts)
}

/// Sup over translates X0 in the domain shell of the slice-exact volume of
/// shell_a intersected with (X0 -+ shell_b).
pub fn sup_shell_volume(
    shell_a: &ConeShell,
    shell_b: &ConeShell,
    domain: &ConeShell,
    mode: TranslateMode,
    opts: &SupSearchOpts,
) -> f64 {
    let prob = SupProblem {
        shell_a: *shell_a,
        shell_b: *shell_b,
        mode,
        domain: *domain,
    };
    let dom = &prob.domain;

    // Radial grid over the domain shell; reachability caps rho0 by the sum
    // of the pair's outer radii.
    let rho_cap = prob.shell_a.rho_hi + prob.shell_b.rho_hi;
    let rho = Interval::new(dom.rho_lo, dom.rho_hi.min(rho_cap));
    if rho.is_empty() {
        return 0.0;
    }

    // For a finite-thickness domain, parametrize tau0 = s*rho0 + h0 with
    // h0 in [-L, L] so every grid point lies in the domain set exactly.
    // For an infinite domain (no hyperbolic restriction on X), tau0 ranges
    // over the reachable interval of the pair.
    let finite_dom = dom.l.is_finite();
    let h_range = if finite_dom {
        Interval::new(-dom.l, dom.l)
    } else {
        let ra = prob.shell_a.tau_range();
        let rb = prob.shell_b.tau_range();
        match (ra, rb, prob.mode) {
            (Some(ra), Some(rb), TranslateMode::Difference) => {
                // tau0 = tau_A + tau_B
                Interval::new(ra.lo + rb.lo, ra.hi + rb.hi)
            }
            (Some(ra), Some(rb), TranslateMode::Sum) => {
                // tau_A = tau0 + tau_B => tau0 in ra - rb
                Interval::new(ra.lo - rb.hi, ra.hi - rb.lo)
            }
            _ => panic!("sup search needs finite legs"),
        }
    };

    let eval = |rho0: f64, h0: f64, slices: usize| -> f64 {
        let tau0 = if finite_dom {
            dom.sign.value() * rho0 + h0
        } else {
            h0
        };
        pair_shell_volume(
            &prob.shell_a,
            &prob.shell_b,
            FreqPoint::new(tau0, [rho0, 0.0]),
            prob.mode,
            slices,
        )
    };

    let g = opts.grid;
    let cells: Vec<(usize, usize)> = (0..=g)
        .flat_map(|i| (0..=g).map(move |j| (i, j)))
        .collect();
    let at = |k: usize, iv: &Interval| iv.lo + iv.len() * k as f64 / g as f64;
    let best = cells
        .par_iter()
        .map(|&(i, j)| {
            let v = eval(at(i, &rho), at(j, &h_range), opts.slices_search);
            (v, i, j)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, 0usize, 0usize), |acc, x| {
            if x.0 > acc.0 {
                x
            } else {
                acc
            }
        });

    if best.0 <= 0.0 {
        return 0.0;
    }

    // Coordinate-wise golden-section refinement within one grid cell of the
    // maximizer; ridge maxima are caught by alternating the coordinates.
    let drho = rho.len() / g as f64;
    let dh = h_range.len() / g as f64;
    let mut rho0 = at(best.1, &rho);
    let mut h0 = at(best.2, &h_range);
    for _ in 0..3 {
        let (r_new, _) = golden_max(
            |x| eval(x, h0, opts.slices_search),
            (rho0 - drho).max(rho.lo),
            (rho0 + drho).min(rho.hi),
            opts.refine_iters,
        );
        rho0 = r_new;
        let (h_new, _) = golden_max(
            |x| eval(rho0, x, opts.slices_search),
            (h0 - dh).max(h_range.lo),
            (h0 + dh).min(h_range.hi),
            opts.refine_iters,
        );
        h0 = h_new;
    }
    eval(rho0, h0, opts.slices_final).max(best.0)
}

/// Square root of the smallest of the three sup terms: an upper-bound
/// certificate for the bilinear constant, up to the absolute constant of
/// the reduction.
pub fn bilinear_constant_volume(p: &DyadicParams, opts: &SupSearchOpts) -> f64 {
    SupSelector::ALL
        .iter()
        .map(|s| sup_pair_volume(p, *s, opts))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Volume of A1 intersect (X - A2) intersect (Xlat + A0), the integrand of
/// the tiling refinement. `a0 = None` is the full-space sentinel, reducing
/// to the plain pair volume. A supplied A0 must be a tiling-capable variant
/// (cone ball or null slab).
pub fn triple_intersection_volume(
    p: &DyadicParams,
    x: FreqPoint,
    x_lat: FreqPoint,
    a0: Option<&Region>,
    n: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    p.validate()?;
    let mut items = vec![
        p.leg_annulus(1),
        Region::Translate {
            offset: x,
            inner: Box::new(Region::Reflect {
                inner: Box::new(p.leg_annulus(2)),
            }),
        },
    ];
    if let Some(r) = a0 {
        match r {
            Region::ConeBall { .. } | Region::NullSlab { .. } => {}
            other => {
                return Err(Error::NonTilingRegion(format!(
                    "expected cone_ball or null_slab, got {other:?}"
                )))
            }
        }
        items.push(Region::Translate {
            offset: x_lat,
            inner: Box::new(r.clone()),
        });
    }
    let region = Region::Intersect { items };
    match region.bounds()? {
        None => Ok(VolumeEstimate::zero(VolumeMethod::MonteCarlo, seed)),
        Some(bb) if !(bb.volume() > 0.0) => Ok(VolumeEstimate::zero(VolumeMethod::MonteCarlo, seed)),
        Some(bb) => mc_volume(&region, &bb, n, seed),
    }
}

/// The lattice steps under which translates of a tiling region cover
/// frequency space: the side lengths of its bounding box (cone balls), or
/// the thickness along the null normal (null slabs).
pub fn tiling_steps(a0: &Region) -> Result<FreqPoint> {
    match a0 {
        Region::ConeBall { .. } => {
            let b = a0.bounding_box()?;
            Ok(FreqPoint::new(b.tau.len(), [b.xi1.len(), b.xi2.len()]))
        }
        Region::NullSlab { d, omega } => {
            // Step along the plane normal (-1, omega)/sqrt(2) by the full
            // thickness 2d; the in-plane directions are free.
            let s = 2.0 * d / std::f64::consts::SQRT_2;
            Ok(FreqPoint::new(-s, [s * omega[0], s * omega[1]]))
        }
        other => Err(Error::NonTilingRegion(format!(
            "expected cone_ball or null_slab, got {other:?}"
        ))),
    }
}

/// Grid-plus-refine search for sup over translates X0 of
/// |A intersect (X0 - B)| by Monte Carlo, for region pairs without rotation
/// symmetry (sector and strip shapes). X0 ranges over the Minkowski sum of
/// the bounding boxes, optionally filtered by a domain region.
pub fn sup_intersection_volume_mc(
    a: &Region,
    b: &Region,
    domain_filter: Option<&Region>,
    grid: [usize; 3],
    n_search: usize,
    n_final: usize,
    seed: u64,
) -> Result<(f64, FreqPoint)> {
    let ba = a
        .bounds()?
        .ok_or_else(|| Error::InvalidParameter("empty first region".into()))?;
    let bb = b
        .bounds()?
        .ok_or_else(|| Error::InvalidParameter("empty second region".into()))?;
    let sum = ba.minkowski_sum(&bb);

    let eval = |x0: FreqPoint, n: usize, s: u64| -> Result<f64> {
        if let Some(f) = domain_filter {
            if !f.contains(x0) {
                return Ok(0.0);
            }
        }
        let inner = ba.intersect(&bb.neg().translate(x0));
        if inner.is_empty() || !(inner.volume() > 0.0) {
            return Ok(0.0);
        }
        let region = Region::Intersect {
            items: vec![
                a.clone(),
                Region::Translate {
                    offset: x0,
                    inner: Box::new(Region::Reflect {
                        inner: Box::new(b.clone()),
                    }),
                },
            ],
        };
        Ok(mc_volume(&region, &inner, n, s)?.value)
    };

    let cells: Vec<[usize; 3]> = (0..=grid[0])
        .flat_map(|i| {
            (0..=grid[1]).flat_map(move |j| (0..=grid[2]).map(move |k| [i, j, k]))
        })
        .collect();
    let coord = |k: usize, g: usize, iv: &Interval| iv.lo + iv.len() * k as f64 / g as f64;
    let evals: Vec<(f64, FreqPoint)> = cells
        .par_iter()
        .map(|&[i, j, k]| {
            let x0 = FreqPoint::new(
                coord(i, grid[0], &sum.tau),
                [coord(j, grid[1], &sum.xi1), coord(k, grid[2], &sum.xi2)],
            );
            let idx = (i * (grid[1] + 1) + j) * (grid[2] + 1) + k;
            let v = eval(x0, n_search, seed.wrapping_add(idx as u64)).unwrap_or(0.0);
            (v, x0)
        })
        .collect();
    let (mut best_v, mut best_x) = (0.0f64, FreqPoint::new(sum.tau.mid(), [0.0, 0.0]));
    for (v, x) in &evals {
        if *v > best_v {
            best_v = *v;
            best_x = *x;
        }
    }
    if best_v == 0.0 {
        return Ok((0.0, best_x));
    }
    let v_final = eval(best_x, n_final, seed ^ 0xfeed_beef)?;
    Ok((v_final.max(best_v), best_x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Sign;

    #[test]
    fn lens_area_basics() {
        // Disjoint, nested, and equal-circle half-overlap sanity.
        assert_eq!(lens_area(1.0, 1.0, 3.0), 0.0);
        assert!((lens_area(2.0, 1.0, 0.5) - PI).abs() < 1e-12);
        // d = 0 same radius: full disk.
        assert!((lens_area(1.5, 1.5, 0.0) - PI * 2.25).abs() < 1e-12);
        // Symmetric crossing at d = r: known closed form 2r^2(pi/3 - sqrt(3)/4).
        let expect = 2.0 * (PI / 3.0 - 3f64.sqrt() / 4.0);
        assert!((lens_area(1.0, 1.0, 1.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn annuli_area_trivial_cases() {
        let far = CircleConfig {
            r: 1.0,
            delta: 0.01,
            big_r: 1.0,
            big_delta: 0.01,
            dist: 3.0,
        };
        assert_eq!(annuli_intersection_area(&far), 0.0);
        // Concentric identical bands: full ring area.
        let ring = annular_band_intersection_area((0.9, 1.1), (0.9, 1.1), 0.0);
        assert!((ring - PI * (1.1f64.powi(2) - 0.81)).abs() < 1e-12);
    }

    #[test]
    fn circle_lemma_bound_examples() {
        let c = CircleConfig {
            r: 1.0,
            delta: 0.01,
            big_r: 1.0,
            big_delta: 0.01,
            dist: 1.0,
        };
        assert!((circle_lemma_bound(&c).unwrap() - 1.0e-3).abs() < 1e-15);
        let c2 = CircleConfig {
            big_delta: 0.04,
            ..c
        };
        assert!((circle_lemma_bound(&c2).unwrap() - 2.0e-3).abs() < 1e-15);
        // Doubling dist halves the squared bound.
        let c3 = CircleConfig { dist: 2.0, ..c };
        let b1 = circle_lemma_bound(&c).unwrap();
        let b3 = circle_lemma_bound(&c3).unwrap();
        assert!((b3 / b1 - 0.5f64.sqrt()).abs() < 1e-12);
        // Hypothesis violation errors.
        let bad = CircleConfig { delta: 0.5, ..c };
        assert!(circle_lemma_bound(&bad).is_err());
    }

    #[test]
    fn strip_circle_examples() {
        let full = strip_circle_area(1.0, 0.01, -1.01, 1.01);
        assert!((full.exact - PI * (1.01f64.powi(2) - 0.99f64.powi(2))).abs() < 1e-12);

        let tan = strip_circle_area(1.0, 0.01, 0.99, 1.01);
        assert!((tan.bound22 - 0.02 * (0.01f64).sqrt()).abs() < 1e-15);
        assert!(tan.exact <= tolerances::MODULE_TOLERANCE * tan.bound22);

        let outside = strip_circle_area(1.0, 0.01, 2.0, 3.0);
        assert_eq!(outside.exact, 0.0);
    }

    #[test]
    fn mc_volume_full_box_and_guards() {
        let bx = Box3::new(
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
        );
        let region = Region::Box {
            tau: Interval::new(0.0, 1.0),
            xi1: Interval::new(0.0, 1.0),
            xi2: Interval::new(0.0, 1.0),
        };
        let est = mc_volume(&region, &bx, 100_000, 42).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.stderr, 0.0);

        assert!(matches!(
            mc_volume(&region, &bx, 10, 42),
            Err(Error::SampleBudget(10))
        ));
        let degenerate = Box3::new(
            Interval::new(0.0, 0.0),
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
        );
        assert!(matches!(
            mc_volume(&region, &degenerate, 10_000, 42),
            Err(Error::DegenerateBox(_))
        ));
    }

    #[test]
    fn mc_volume_thread_invariant_value() {
        // The estimator is a pure function of (seed, index); forcing a
        // single-thread pool must reproduce the default-pool value exactly.
        let region = Region::ConeAnnulus {
            sign: Sign::Plus,
            n: 1.0,
            l: 0.25,
        };
        let bb = region.bounding_box().unwrap();
        let a = mc_volume(&region, &bb, 200_000, 7).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| mc_volume(&region, &bb, 200_000, 7).unwrap());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn e_set_far_separated_is_zero() {
        let p = DyadicParams::new(
            [1.0, 1.0, 1.0],
            [f64::INFINITY, 0.5, 0.5],
            (Sign::Plus, Sign::Plus, Sign::Plus),
        )
        .unwrap();
        let far = FreqPoint::new(100.0, [0.0, 0.0]);
        let v = e_set_volume(&p, far, ESetMethod::slice_exact()).unwrap();
        assert_eq!(v.value, 0.0);
        let v = e_set_volume(
            &p,
            far,
            ESetMethod::MonteCarlo {
                n: 10_000,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn sup_dominates_pointwise_sample() {
        let p = DyadicParams::new(
            [1.0, 1.0, 1.0],
            [f64::INFINITY, 0.125, 0.125],
            (Sign::Plus, Sign::Plus, Sign::Plus),
        )
        .unwrap();
        let opts = SupSearchOpts {
            grid: 24,
            slices_search: 128,
            slices_final: 512,
            refine_iters: 12,
        };
        let sup = sup_pair_volume(&p, SupSelector::OutputTranslate, &opts);
        let x0 = FreqPoint::new(3.0, [1.5, 0.0]);
        let point = e_set_volume(&p, x0, ESetMethod::slice_exact()).unwrap().value;
        assert!(sup >= point * 0.999, "sup {sup} < sample {point}");
        assert!(sup > 0.0);
    }

    #[test]
    fn tiny_l_gives_negligible_volume() {
        let p = DyadicParams::new(
            [1.0, 1.0, 1.0],
            [f64::INFINITY, 1e-300, 0.125],
            (Sign::Plus, Sign::Plus, Sign::Plus),
        )
        .unwrap();
        let opts = SupSearchOpts {
            grid: 16,
            slices_search: 64,
            slices_final: 128,
            refine_iters: 8,
        };
        let sup = sup_pair_volume(&p, SupSelector::OutputTranslate, &opts);
        assert!(sup < 1e-30, "sup {sup}");
    }

    #[test]
    fn bilinear_constant_min_property_and_monotonicity() {
        let opts = SupSearchOpts {
            grid: 16,
            slices_search: 96,
            slices_final: 256,
            refine_iters: 8,
        };
        let mk = |l1: f64, l2: f64| {
            DyadicParams::new(
                [1.0, 1.0, 1.0],
                [f64::INFINITY, l1, l2],
                (Sign::Plus, Sign::Plus, Sign::Minus),
            )
            .unwrap()
        };
        let p = mk(0.0625, 0.125);
        let c = bilinear_constant_volume(&p, &opts);
        for sel in SupSelector::ALL {
            assert!(c * c <= sup_pair_volume(&p, sel, &opts) * (1.0 + 1e-9));
        }
        // Enlarging every L weakly increases the constant.
        let c_big = bilinear_constant_volume(&mk(0.125, 0.25), &opts);
        assert!(c_big >= c * 0.999, "c {c} vs c_big {c_big}");
    }

    #[test]
    fn triple_intersection_contract() {
        let p = DyadicParams::new(
            [1.0, 1.0, 1.0],
            [0.25, 0.125, 0.125],
            (Sign::Plus, Sign::Plus, Sign::Minus),
        )
        .unwrap();
        let x = FreqPoint::new(0.1, [2.5, 0.0]);
        // Full-space sentinel reduces to the pair volume.
        let sent = triple_intersection_volume(&p, x, FreqPoint::new(0.0, [0.0, 0.0]), None, 50_000, 9)
            .unwrap();
        let pair = e_set_volume(&p, x, ESetMethod::MonteCarlo { n: 50_000, seed: 9 }).unwrap();
        assert_eq!(sent.value.to_bits(), pair.value.to_bits());

        // Far lattice translate kills the volume.
        let a0 = p.output_region();
        let far = triple_intersection_volume(&p, x, FreqPoint::new(500.0, [0.0, 0.0]), Some(&a0), 50_000, 9)
            .unwrap();
        assert_eq!(far.value, 0.0);

        // Set inclusion: third factor can only shrink the volume.
        let at = triple_intersection_volume(&p, x, FreqPoint::new(0.0, [0.0, 0.0]), Some(&a0), 50_000, 9)
            .unwrap();
        let tol = 3.0 * (at.stderr.powi(2) + pair.stderr.powi(2)).sqrt();
        assert!(at.value <= pair.value + tol);

        // Non-tiling variant errors.
        let bad = Region::SpatialStrip {
            r: 1.0,
            omega: [1.0, 0.0],
        };
        assert!(matches!(
            triple_intersection_volume(&p, x, x, Some(&bad), 10_000, 1),
            Err(Error::NonTilingRegion(_))
        ));
    }
}
