//! Discrete frequency lattice and complex grid functions on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Box3, FreqPoint, Interval, Region};

/// A regular grid of cell centers tiling a box in (tau, xi1, xi2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub extents: Box3,
    pub spacing: (f64, f64, f64),
    pub dims: (usize, usize, usize),
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing.0 * self.spacing.1 * self.spacing.2
    }

    #[inline]
    pub fn idx(&self, it: usize, i1: usize, i2: usize) -> usize {
        (it * self.dims.1 + i1) * self.dims.2 + i2
    }

    #[inline]
    pub fn unidx(&self, idx: usize) -> (usize, usize, usize) {
        let i2 = idx % self.dims.2;
        let r = idx / self.dims.2;
        (r / self.dims.1, r % self.dims.1, i2)
    }

    #[inline]
    pub fn center(&self, it: usize, i1: usize, i2: usize) -> FreqPoint {
        FreqPoint::new(
            self.extents.tau.lo + (it as f64 + 0.5) * self.spacing.0,
            [
                self.extents.xi1.lo + (i1 as f64 + 0.5) * self.spacing.1,
                self.extents.xi2.lo + (i2 as f64 + 0.5) * self.spacing.2,
            ],
        )
    }

    pub fn center_of(&self, idx: usize) -> FreqPoint {
        let (it, i1, i2) = self.unidx(idx);
        self.center(it, i1, i2)
    }

    /// Lattice with the same spacing whose centers are the negated centers.
    pub fn reflected(&self) -> Lattice {
        Lattice {
            extents: self.extents.neg(),
            spacing: self.spacing,
            dims: self.dims,
        }
    }

    pub fn spacing_matches(&self, o: &Lattice) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        close(self.spacing.0, o.spacing.0)
            && close(self.spacing.1, o.spacing.1)
            && close(self.spacing.2, o.spacing.2)
    }
}

/// Lattice whose cell centers tile `bounds` with the given dims.
pub fn make_lattice(bounds: &Box3, target_dims: (usize, usize, usize)) -> Result<Lattice> {
    for d in [target_dims.0, target_dims.1, target_dims.2] {
        if !(8..=1024).contains(&d) {
            return Err(Error::InvalidParameter(format!(
                "lattice dims must be in [8, 1024], got {d}"
            )));
        }
    }
    for (len, name) in [
        (bounds.tau.len(), "tau"),
        (bounds.xi1.len(), "xi1"),
        (bounds.xi2.len(), "xi2"),
    ] {
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::DegenerateBox(format!("{name} extent {len}")));
        }
    }
    Ok(Lattice {
        extents: *bounds,
        spacing: (
            bounds.tau.len() / target_dims.0 as f64,
            bounds.xi1.len() / target_dims.1 as f64,
            bounds.xi2.len() / target_dims.2 as f64,
        ),
        dims: target_dims,
    })
}

/// Lattice covering `bounds` with prescribed spacing; the extents snap
/// outward to whole cells so that two lattices built with the same spacing
/// can be convolved.
pub fn lattice_with_spacing(bounds: &Box3, spacing: (f64, f64, f64)) -> Result<Lattice> {
    for h in [spacing.0, spacing.1, spacing.2] {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing {h}")));
        }
    }
    let snap = |iv: Interval, h: f64| -> Result<(Interval, usize)> {
        let n = ((iv.len() / h) - 1e-9).ceil().max(1.0) as usize;
        if n > 4096 {
            return Err(Error::InvalidParameter(format!(
                "spacing {h} gives {n} cells over extent {}",
                iv.len()
            )));
        }
        Ok((Interval::new(iv.lo, iv.lo + n as f64 * h), n))
    };
    let (t, nt) = snap(bounds.tau, spacing.0)?;
    let (x1, n1) = snap(bounds.xi1, spacing.1)?;
    let (x2, n2) = snap(bounds.xi2, spacing.2)?;
    Ok(Lattice {
        extents: Box3::new(t, x1, x2),
        spacing,
        dims: (nt, n1, n2),
    })
}

/// Complex-valued function on a lattice with an explicit support mask.
/// Values are identically zero off the mask.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub lattice: Lattice,
    pub values: Vec<Complex64>,
    pub support_mask: Vec<bool>,
}

impl GridFunction {
    pub fn zero(lattice: Lattice) -> Self {
        let n = lattice.len();
        GridFunction {
            lattice,
            values: vec![Complex64::new(0.0, 0.0); n],
            support_mask: vec![false; n],
        }
    }

    pub fn set(&mut self, idx: usize, v: Complex64) {
        self.values[idx] = v;
        self.support_mask[idx] = v != Complex64::new(0.0, 0.0);
    }

    pub fn support_count(&self) -> usize {
        self.support_mask.iter().filter(|m| **m).count()
    }

    pub fn support_indices(&self) -> Vec<usize> {
        self.support_mask
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.then_some(i))
            .collect()
    }

    /// sqrt(sum |v|^2 * cellvol): the Plancherel-normalized L2 norm, so the
    /// frequency-side and space-side norms agree by definition.
    pub fn l2_norm(&self) -> f64 {
        let cv = self.lattice.cell_volume();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cv).sqrt()
    }

    /// Pointwise restriction to a region (by cell-center membership).
    pub fn restricted(&self, region: &Region) -> GridFunction {
        let mut out = self.clone();
        for idx in 0..out.values.len() {
            if out.support_mask[idx] && !region.contains(out.lattice.center_of(idx)) {
                out.values[idx] = Complex64::new(0.0, 0.0);
                out.support_mask[idx] = false;
            }
        }
        out
    }

    /// The function x -> conj(f(-x)), the convolution adjoint kernel.
    pub fn reflect_conj(&self) -> GridFunction {
        let lat = self.lattice.reflected();
        let (nt, n1, n2) = self.lattice.dims;
        let mut out = GridFunction::zero(lat);
        for it in 0..nt {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let src = self.lattice.idx(it, i1, i2);
                    if self.support_mask[src] {
                        let dst = lat.idx(nt - 1 - it, n1 - 1 - i1, n2 - 1 - i2);
                        out.values[dst] = self.values[src].conj();
                        out.support_mask[dst] = true;
                    }
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> GridFunction {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }
}

/// Indicator of a region: 1 at cell centers inside, 0 elsewhere.
pub fn indicator_function(region: &Region, lattice: &Lattice) -> GridFunction {
    let mut out = GridFunction::zero(*lattice);
    for idx in 0..out.values.len() {
        if region.contains(lattice.center_of(idx)) {
            out.values[idx] = Complex64::new(1.0, 0.0);
            out.support_mask[idx] = true;
        }
    }
    out
}

/// Sidecar metadata for the flat binary export.
#[derive(Serialize, Deserialize)]
struct Sidecar {
    dtype: String,
    lattice: Lattice,
    provenance: String,
}

/// Writes `values` as little-endian f64 (re, im) pairs plus a JSON sidecar
/// with the lattice spec, for caching sweep inputs.
pub fn export_grid(f: &GridFunction, path: &std::path::Path, provenance: &str) -> std::io::Result<()> {
    let mut bytes = Vec::with_capacity(f.values.len() * 16);
    for v in &f.values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    let sidecar = Sidecar {
        dtype: "complex128le".into(),
        lattice: f.lattice,
        provenance: provenance.into(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    std::fs::write(path.with_extension("json"), json)
}

pub fn import_grid(path: &std::path::Path) -> std::io::Result<GridFunction> {
    let sidecar: Sidecar = serde_json::from_slice(&std::fs::read(path.with_extension("json"))?)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    let bytes = std::fs::read(path)?;
    if bytes.len() != sidecar.lattice.len() * 16 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!(
                "expected {} bytes, found {}",
                sidecar.lattice.len() * 16,
                bytes.len()
            ),
        ));
    }
    let mut g = GridFunction::zero(sidecar.lattice);
    for (i, chunk) in bytes.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        g.set(i, Complex64::new(re, im));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Region, Sign};

    fn unit_box() -> Box3 {
        Box3::new(
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
        )
    }

    #[test]
    fn make_lattice_examples() {
        let lat = make_lattice(&unit_box(), (8, 8, 8)).unwrap();
        assert_eq!(lat.spacing, (0.125, 0.125, 0.125));

        let anis = Box3::new(
            Interval::new(0.0, 2.0),
            Interval::new(-2.0, 2.0),
            Interval::new(-2.0, 2.0),
        );
        let lat = make_lattice(&anis, (16, 32, 32)).unwrap();
        assert_eq!(lat.spacing, (0.125, 0.125, 0.125));

        let degenerate = Box3::new(
            Interval::new(0.0, 0.0),
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
        );
        assert!(make_lattice(&degenerate, (8, 8, 8)).is_err());
        assert!(make_lattice(&unit_box(), (4, 8, 8)).is_err());
    }

    #[test]
    fn indicator_full_and_disjoint() {
        let lat = make_lattice(&unit_box(), (8, 8, 8)).unwrap();
        let full = Region::Box {
            tau: Interval::new(-1.0, 2.0),
            xi1: Interval::new(-1.0, 2.0),
            xi2: Interval::new(-1.0, 2.0),
        };
        let f = indicator_function(&full, &lat);
        assert_eq!(f.support_count(), 512);
        let away = Region::ConeAnnulus {
            sign: Sign::Plus,
            n: 50.0,
            l: 1.0,
        };
        assert_eq!(indicator_function(&away, &lat).support_count(), 0);
    }

    #[test]
    fn l2_norm_basics() {
        let lat = make_lattice(&unit_box(), (8, 8, 8)).unwrap();
        let mut f = GridFunction::zero(lat);
        assert_eq!(f.l2_norm(), 0.0);
        f.set(0, Complex64::new(1.0, 0.0));
        let cv = lat.cell_volume();
        assert!((f.l2_norm() - cv.sqrt()).abs() < 1e-15);
        let g = f.scaled(-3.0);
        assert!((g.l2_norm() - 3.0 * cv.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reflect_conj_negates_centers() {
        let b = Box3::new(
            Interval::new(0.0, 1.0),
            Interval::new(-0.5, 1.5),
            Interval::new(2.0, 3.0),
        );
        let lat = make_lattice(&b, (8, 8, 8)).unwrap();
        let mut f = GridFunction::zero(lat);
        f.set(lat.idx(1, 2, 3), Complex64::new(2.0, 5.0));
        let r = f.reflect_conj();
        let c = lat.center(1, 2, 3);
        let rc = r.lattice.center(8 - 2, 8 - 3, 8 - 4);
        assert!((c.tau + rc.tau).abs() < 1e-12);
        assert!((c.xi[0] + rc.xi[0]).abs() < 1e-12);
        assert_eq!(
            r.values[r.lattice.idx(6, 5, 4)],
            Complex64::new(2.0, -5.0)
        );
    }

    #[test]
    fn export_import_round_trip() {
        let lat = make_lattice(&unit_box(), (8, 8, 8)).unwrap();
        let mut f = GridFunction::zero(lat);
        f.set(7, Complex64::new(0.25, -1.5));
        f.set(100, Complex64::new(1e-300, 3.7));
        let dir = std::env::temp_dir().join("conelab_grid_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("grid.c128");
        export_grid(&f, &path, "test").unwrap();
        let g = import_grid(&path).unwrap();
        assert_eq!(f.values, g.values);
        assert_eq!(f.support_mask, g.support_mask);
        assert_eq!(f.lattice, g.lattice);
    }
}
