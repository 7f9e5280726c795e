//! Lattice convolution: the frequency-side product. A direct Riemann sum
//! over supports and a fast-transform path that must agree with it to 1e-10
//! relative.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{Box3, Interval, Region};
use crate::spectral::lattice::{GridFunction, Lattice};

/// Output lattice of a full convolution: dims n+m-1 per axis, centers at
/// all pairwise sums of input centers.
pub fn sum_lattice(a: &Lattice, b: &Lattice) -> Lattice {
    let h = a.spacing;
    let dims = (
        a.dims.0 + b.dims.0 - 1,
        a.dims.1 + b.dims.1 - 1,
        a.dims.2 + b.dims.2 - 1,
    );
    let lo = (
        a.extents.tau.lo + b.extents.tau.lo + 0.5 * h.0,
        a.extents.xi1.lo + b.extents.xi1.lo + 0.5 * h.1,
        a.extents.xi2.lo + b.extents.xi2.lo + 0.5 * h.2,
    );
    Lattice {
        extents: Box3::new(
            Interval::new(lo.0, lo.0 + dims.0 as f64 * h.0),
            Interval::new(lo.1, lo.1 + dims.1 as f64 * h.1),
            Interval::new(lo.2, lo.2 + dims.2 as f64 * h.2),
        ),
        spacing: h,
        dims,
    }
}

/// Index window of `lat` whose cell centers can fall inside `window`,
/// expanded by one cell for boundary safety.
fn crop_ranges(lat: &Lattice, window: &Box3) -> [(usize, usize); 3] {
    let rng = |lo: f64, h: f64, n: usize, w: Interval| -> (usize, usize) {
        let a = ((w.lo - lo) / h - 1.5).floor().max(0.0) as usize;
        let b = (((w.hi - lo) / h + 0.5).ceil() as isize).clamp(0, n as isize) as usize;
        (a.min(n), b.max(a.min(n)))
    };
    [
        rng(lat.extents.tau.lo, lat.spacing.0, lat.dims.0, window.tau),
        rng(lat.extents.xi1.lo, lat.spacing.1, lat.dims.1, window.xi1),
        rng(lat.extents.xi2.lo, lat.spacing.2, lat.dims.2, window.xi2),
    ]
}

fn cropped_lattice(full: &Lattice, ranges: [(usize, usize); 3]) -> Lattice {
    let h = full.spacing;
    let dims = (
        ranges[0].1 - ranges[0].0,
        ranges[1].1 - ranges[1].0,
        ranges[2].1 - ranges[2].0,
    );
    let lo = (
        full.extents.tau.lo + ranges[0].0 as f64 * h.0,
        full.extents.xi1.lo + ranges[1].0 as f64 * h.1,
        full.extents.xi2.lo + ranges[2].0 as f64 * h.2,
    );
    Lattice {
        extents: Box3::new(
            Interval::new(lo.0, lo.0 + dims.0 as f64 * h.0),
            Interval::new(lo.1, lo.1 + dims.1 as f64 * h.1),
            Interval::new(lo.2, lo.2 + dims.2 as f64 * h.2),
        ),
        spacing: h,
        dims,
    }
}

/// Cropped output lattice for a window plus the index offset of the crop
/// within the full sum lattice.
pub(crate) fn crop_for(full: &Lattice, window: Option<&Box3>) -> (Lattice, (i64, i64, i64)) {
    let ranges = match window {
        Some(w) => crop_ranges(full, w),
        None => [(0, full.dims.0), (0, full.dims.1), (0, full.dims.2)],
    };
    (
        cropped_lattice(full, ranges),
        (ranges[0].0 as i64, ranges[1].0 as i64, ranges[2].0 as i64),
    )
}

fn check_spacing(a: &GridFunction, b: &GridFunction) -> Result<()> {
    if !a.lattice.spacing_matches(&b.lattice) {
        return Err(Error::SpacingMismatch);
    }
    Ok(())
}

struct SupportCell {
    it: i64,
    i1: i64,
    i2: i64,
    v: Complex64,
}

fn support_cells(f: &GridFunction) -> Vec<SupportCell> {
    f.support_indices()
        .into_iter()
        .map(|idx| {
            let (it, i1, i2) = f.lattice.unidx(idx);
            SupportCell {
                it: it as i64,
                i1: i1 as i64,
                i2: i2 as i64,
                v: f.values[idx],
            }
        })
        .collect()
}

/// Direct Riemann-sum convolution restricted to an output window. The
/// weight closure receives the two input cell indices and scales each
/// product term; plain convolution passes 1.
fn accumulate_direct<W>(
    f1: &GridFunction,
    f2: &GridFunction,
    out_lat: &Lattice,
    offset: (i64, i64, i64),
    weight: W,
) -> GridFunction
where
    W: Fn(&SupportCell, &SupportCell) -> f64 + Sync,
{
    let s1 = support_cells(f1);
    let s2 = support_cells(f2);
    let cv = f1.lattice.cell_volume();
    let (nt, n1, n2) = (out_lat.dims.0 as i64, out_lat.dims.1 as i64, out_lat.dims.2 as i64);
    let n_out = out_lat.len();

    // Deterministic parallel accumulation: fixed chunks of the first
    // support produce partial dense arrays, summed in chunk order.
    let chunk = s1.len().div_ceil(2 * rayon::current_num_threads().max(1)).max(1024);
    let partials: Vec<Vec<Complex64>> = s1
        .par_chunks(chunk)
        .map(|cells| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n_out];
            for a in cells {
                for b in &s2 {
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
                    let w = weight(a, b);
                    if w != 0.0 {
                        acc[((kt * n1 + k1) * n2 + k2) as usize] += a.v * b.v * w;
                    }
                }
            }
            acc
        })
        .collect();

    let mut out = GridFunction::zero(*out_lat);
    for p in partials {
        for (o, v) in out.values.iter_mut().zip(p) {
            *o += v;
        }
    }
    for v in &mut out.values {
        *v *= cv;
    }
    for i in 0..n_out {
        out.support_mask[i] = out.values[i] != Complex64::new(0.0, 0.0);
    }
    out
}

/// Direct-sum convolution on the full (or window-cropped) sum lattice.
pub fn convolve_direct(
    f1: &GridFunction,
    f2: &GridFunction,
    window: Option<&Box3>,
) -> Result<GridFunction> {
    check_spacing(f1, f2)?;
    let full = sum_lattice(&f1.lattice, &f2.lattice);
    let ranges = match window {
        Some(w) => crop_ranges(&full, w),
        None => [(0, full.dims.0), (0, full.dims.1), (0, full.dims.2)],
    };
    let out_lat = cropped_lattice(&full, ranges);
    if out_lat.len() == 0 {
        return Ok(GridFunction::zero(cropped_lattice(
            &full,
            [(0, 0), (0, 0), (0, 0)],
        )));
    }
    let offset = (
        ranges[0].0 as i64,
        ranges[1].0 as i64,
        ranges[2].0 as i64,
    );
    Ok(accumulate_direct(f1, f2, &out_lat, offset, |_, _| 1.0))
}

/// Smallest 5-smooth size >= n (fast for mixed-radix FFT).
fn next_fast_size(n: usize) -> usize {
    let mut m = n;
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// In-place FFT along the last axis of a dims = (a, b, c) array.
fn fft_last_axis(data: &mut [Complex64], c: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(c)
    } else {
        planner.plan_fft_forward(c)
    };
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(c).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

/// Rotates axes (a, b, c) -> (c, a, b): new[(z, x, y)] = old[(x, y, z)].
fn rotate_axes(data: &[Complex64], dims: (usize, usize, usize)) -> Vec<Complex64> {
    let (a, b, c) = dims;
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(a * b).enumerate().for_each(|(z, plane)| {
        for x in 0..a {
            for y in 0..b {
                plane[x * b + y] = data[(x * b + y) * c + z];
            }
        }
    });
    out
}

fn fft3(data: &mut Vec<Complex64>, dims: (usize, usize, usize), inverse: bool) {
    let (a, b, c) = dims;
    fft_last_axis(data, c, inverse);
    *data = rotate_axes(data, (a, b, c)); // dims now (c, a, b)
    fft_last_axis(data, b, inverse);
    *data = rotate_axes(data, (c, a, b)); // dims now (b, c, a)
    fft_last_axis(data, a, inverse);
    *data = rotate_axes(data, (b, c, a)); // dims back to (a, b, c)
}

/// Fast-transform convolution on the full sum lattice.
pub fn convolve_fft(f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    check_spacing(f1, f2)?;
    let out_lat = sum_lattice(&f1.lattice, &f2.lattice);
    let pad = (
        next_fast_size(out_lat.dims.0),
        next_fast_size(out_lat.dims.1),
        next_fast_size(out_lat.dims.2),
    );
    let m = pad.0 * pad.1 * pad.2;
    let embed = |f: &GridFunction| -> Vec<Complex64> {
        let mut a = vec![Complex64::new(0.0, 0.0); m];
        let (nt, n1, n2) = f.lattice.dims;
        for it in 0..nt {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    a[(it * pad.1 + i1) * pad.2 + i2] = f.values[f.lattice.idx(it, i1, i2)];
                }
            }
        }
        a
    };
    let mut fa = embed(f1);
    let mut fb = embed(f2);
    fft3(&mut fa, pad, false);
    fft3(&mut fb, pad, false);
    fa.par_iter_mut().zip(fb.par_iter()).for_each(|(x, y)| *x *= *y);
    drop(fb);
    fft3(&mut fa, pad, true);
    let scale = f1.lattice.cell_volume() / m as f64;
    let mut out = GridFunction::zero(out_lat);
    let (nt, n1, n2) = out_lat.dims;
    for it in 0..nt {
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let v = fa[(it * pad.1 + i1) * pad.2 + i2] * scale;
                out.values[out_lat.idx(it, i1, i2)] = v;
            }
        }
    }
    for i in 0..out.values.len() {
        out.support_mask[i] = out.values[i] != Complex64::new(0.0, 0.0);
    }
    Ok(out)
}

/// Discrete convolution (u1hat * u2hat) on the sum lattice. Picks the
/// direct path for small supports and the fast transform otherwise; the
/// two agree to 1e-10 relative.
pub fn convolve(f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    let work = f1.support_count() as u128 * f2.support_count() as u128;
    if work <= 2_000_000 {
        convolve_direct(f1, f2, None)
    } else {
        convolve_fft(f1, f2)
    }
}

/// Window-aware convolution used by output-restricted norms: the direct
/// path accumulates only inside the window to bound memory.
pub fn convolve_windowed(
    f1: &GridFunction,
    f2: &GridFunction,
    window: Option<&Box3>,
) -> Result<GridFunction> {
    let work = f1.support_count() as u128 * f2.support_count() as u128;
    if work <= 20_000_000 {
        convolve_direct(f1, f2, window)
    } else {
        let full = convolve_fft(f1, f2)?;
        match window {
            None => Ok(full),
            Some(w) => {
                let ranges = crop_ranges(&full.lattice, w);
                let lat = cropped_lattice(&full.lattice, ranges);
                let mut out = GridFunction::zero(lat);
                for it in 0..lat.dims.0 {
                    for i1 in 0..lat.dims.1 {
                        for i2 in 0..lat.dims.2 {
                            let src = full.lattice.idx(
                                it + ranges[0].0,
                                i1 + ranges[1].0,
                                i2 + ranges[2].0,
                            );
                            let dst = lat.idx(it, i1, i2);
                            out.values[dst] = full.values[src];
                            out.support_mask[dst] = full.support_mask[src];
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

/// L2 norm of chi_{A0} (f1hat * f2hat): the discrete left side of the
/// bilinear estimate. `None` means no output restriction.
pub fn restricted_product_norm(
    f1: &GridFunction,
    f2: &GridFunction,
    a0: Option<&Region>,
) -> Result<f64> {
    let window = match a0 {
        None => None,
        Some(r) => match r.bounds() {
            Ok(Some(b)) => Some(b),
            Ok(None) => return Ok(0.0),
            Err(_) => None, // unbounded restriction: evaluate on the full sum lattice
        },
    };
    let conv = convolve_windowed(f1, f2, window.as_ref())?;
    let cv = conv.lattice.cell_volume();
    let total: f64 = match a0 {
        None => conv.values.iter().map(|v| v.norm_sqr()).sum(),
        Some(r) => (0..conv.values.len())
            .into_par_iter()
            .map(|i| {
                if conv.support_mask[i] && r.contains(conv.lattice.center_of(i)) {
                    conv.values[i].norm_sqr()
                } else {
                    0.0
                }
            })
            .sum(),
    };
    Ok((total * cv).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box3, Interval};
    use crate::spectral::lattice::{lattice_with_spacing, make_lattice, GridFunction};

    fn box3(t: (f64, f64), x: (f64, f64), y: (f64, f64)) -> Box3 {
        Box3::new(
            Interval::new(t.0, t.1),
            Interval::new(x.0, x.1),
            Interval::new(y.0, y.1),
        )
    }

    #[test]
    fn delta_convolution_shifts() {
        let lat = make_lattice(&box3((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (8, 8, 8)).unwrap();
        let mut f = GridFunction::zero(lat);
        f.set(lat.idx(2, 3, 4), Complex64::new(1.0, 0.0));
        f.set(lat.idx(5, 1, 7), Complex64::new(0.0, -2.0));
        // delta at cell (1,1,1) with mass 1 (value 1/cellvol).
        let mut d = GridFunction::zero(lat);
        d.set(lat.idx(1, 1, 1), Complex64::new(1.0 / lat.cell_volume(), 0.0));
        let conv = convolve_direct(&f, &d, None).unwrap();
        // f's cell (2,3,4) should appear at out index (2+1, 3+1, 4+1).
        let v = conv.values[conv.lattice.idx(3, 4, 5)];
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let v = conv.values[conv.lattice.idx(6, 2, 8)];
        assert!((v - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        // Norm preserved by the unit-mass delta.
        assert!((conv.l2_norm() - f.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn unit_boxes_give_tent() {
        // Two indicator boxes over [0,1]^3: the convolution peaks at the
        // center with value = overlap volume at zero shift = 1.
        let lat = make_lattice(&box3((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (16, 16, 16)).unwrap();
        let full = Region::Box {
            tau: Interval::new(-1.0, 2.0),
            xi1: Interval::new(-1.0, 2.0),
            xi2: Interval::new(-1.0, 2.0),
        };
        let f = super::super::lattice::indicator_function(&full, &lat);
        let conv = convolve(&f, &f).unwrap();
        let mid = conv.lattice.idx(15, 15, 15);
        assert!((conv.values[mid].re - 1.0).abs() < 1e-10);
        assert!(conv.values[mid].im.abs() < 1e-14);
    }

    #[test]
    fn disjoint_supports_far_apart_give_zero_in_window() {
        let lat1 = lattice_with_spacing(&box3((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (0.125, 0.125, 0.125)).unwrap();
        let lat2 = lattice_with_spacing(&box3((10.0, 11.0), (0.0, 1.0), (0.0, 1.0)), (0.125, 0.125, 0.125)).unwrap();
        let mut f1 = GridFunction::zero(lat1);
        f1.set(0, Complex64::new(1.0, 0.0));
        let mut f2 = GridFunction::zero(lat2);
        f2.set(0, Complex64::new(1.0, 0.0));
        // Window far away from the sum support (which sits near tau ~ 10).
        let w = box3((0.0, 1.0), (0.0, 2.0), (0.0, 2.0));
        let conv = convolve_direct(&f1, &f2, Some(&w)).unwrap();
        assert!(conv.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn fft_matches_direct_to_1e10() {
        let lat1 = lattice_with_spacing(&box3((0.5, 1.6), (-1.0, 0.4), (0.0, 1.2)), (0.1, 0.1, 0.1)).unwrap();
        let lat2 = lattice_with_spacing(&box3((-0.3, 0.9), (0.2, 1.0), (-0.8, 0.1)), (0.1, 0.1, 0.1)).unwrap();
        let rng = crate::rng::CounterRng::new(77);
        let mut f1 = GridFunction::zero(lat1);
        for i in 0..lat1.len() {
            let (a, b) = rng.gaussian_pair_at(i as u64);
            f1.set(i, Complex64::new(a, b));
        }
        let mut f2 = GridFunction::zero(lat2);
        for i in 0..lat2.len() {
            let (a, b) = rng.gaussian_pair_at((i + lat1.len()) as u64);
            f2.set(i, Complex64::new(a, b));
        }
        let d = convolve_direct(&f1, &f2, None).unwrap();
        let f = convolve_fft(&f1, &f2).unwrap();
        assert_eq!(d.lattice, f.lattice);
        let scale = d.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let max_err = d
            .values
            .iter()
            .zip(&f.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_err <= 1e-10 * scale, "err {max_err} scale {scale}");
    }

    #[test]
    fn translation_covariance_on_lattice() {
        // Shifting f1 by one cell shifts the convolution by one cell.
        let lat = make_lattice(&box3((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (8, 8, 8)).unwrap();
        let rng = crate::rng::CounterRng::new(5);
        let mut f1 = GridFunction::zero(lat);
        let mut f1s = GridFunction::zero(lat);
        for it in 0..7 {
            for i1 in 0..8 {
                for i2 in 0..8 {
                    let (a, b) = rng.gaussian_pair_at(lat.idx(it, i1, i2) as u64);
                    f1.set(lat.idx(it, i1, i2), Complex64::new(a, b));
                    f1s.set(lat.idx(it + 1, i1, i2), Complex64::new(a, b));
                }
            }
        }
        let mut f2 = GridFunction::zero(lat);
        for i in 0..lat.len() {
            let (a, b) = rng.gaussian_pair_at((i + 4096) as u64);
            f2.set(i, Complex64::new(a, b));
        }
        let c = convolve_direct(&f1, &f2, None).unwrap();
        let cs = convolve_direct(&f1s, &f2, None).unwrap();
        for it in 0..c.lattice.dims.0 - 1 {
            for i1 in 0..c.lattice.dims.1 {
                for i2 in 0..c.lattice.dims.2 {
                    let a = c.values[c.lattice.idx(it, i1, i2)];
                    let b = cs.values[cs.lattice.idx(it + 1, i1, i2)];
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spacing_mismatch_errors() {
        let lat1 = make_lattice(&box3((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (8, 8, 8)).unwrap();
        let lat2 = make_lattice(&box3((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (16, 8, 8)).unwrap();
        let f1 = GridFunction::zero(lat1);
        let f2 = GridFunction::zero(lat2);
        assert!(matches!(convolve(&f1, &f2), Err(Error::SpacingMismatch)));
    }

    #[test]
    fn plancherel_consistency_full_space() {
        let lat = make_lattice(&box3((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (8, 8, 8)).unwrap();
        let rng = crate::rng::CounterRng::new(15);
        let mut f1 = GridFunction::zero(lat);
        let mut f2 = GridFunction::zero(lat);
        for i in 0..lat.len() {
            let (a, b) = rng.gaussian_pair_at(i as u64);
            f1.set(i, Complex64::new(a, b));
            let (c, d) = rng.gaussian_pair_at((i + 9999) as u64);
            f2.set(i, Complex64::new(c, d));
        }
        let n1 = restricted_product_norm(&f1, &f2, None).unwrap();
        let n2 = convolve(&f1, &f2).unwrap().l2_norm();
        assert_eq!(n1.to_bits(), n2.to_bits());
    }
}
