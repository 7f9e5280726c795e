//! Test-function synthesis: plain shell indicators, Knapp caps at the
//! critical flatness angle, and null-ray tube packets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Region, Sign, Vec2};
use crate::spectral::lattice::{indicator_function, GridFunction, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketKind {
    /// Indicator of the full shell Kdot^s_{N,L}.
    Indicator,
    /// Angular sector of width gamma0 = sqrt(L/N), the widest sector that
    /// is essentially flat at thickness L.
    KnappCap,
    /// Thin tube about the null ray R+ . omega: a sector of angular width
    /// r/N. Width r >= N degenerates to the full shell.
    NullRay,
}

/// One leg's packet: kind, shell parameters, axis direction, and an
/// optional width override (the tube width for null rays, or a replacement
/// cap angle for Knapp caps).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PacketSpec {
    pub kind: PacketKind,
    pub sign: Sign,
    pub n: f64,
    pub l: f64,
    pub omega: Vec2,
    pub width: Option<f64>,
}

impl PacketSpec {
    /// The Fourier support region of the packet.
    pub fn region(&self) -> Result<Region> {
        if !(self.n > 0.0 && self.l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "packet needs N, L > 0; got N={}, L={}",
                self.n, self.l
            )));
        }
        Ok(match self.kind {
            PacketKind::Indicator => Region::ConeAnnulus {
                sign: self.sign,
                n: self.n,
                l: self.l,
            },
            PacketKind::KnappCap => {
                let gamma = self.width.unwrap_or((self.l / self.n).sqrt());
                Region::ConeSector {
                    sign: self.sign,
                    n: self.n,
                    l: self.l,
                    gamma: gamma.min(std::f64::consts::PI),
                    omega: self.omega,
                }
            }
            PacketKind::NullRay => {
                let r = self.width.ok_or_else(|| {
                    Error::InvalidParameter("null_ray packet needs a tube width".into())
                })?;
                if r >= self.n {
                    Region::ConeAnnulus {
                        sign: self.sign,
                        n: self.n,
                        l: self.l,
                    }
                } else {
                    Region::ConeSector {
                        sign: self.sign,
                        n: self.n,
                        l: self.l,
                        gamma: r / self.n,
                        omega: self.omega,
                    }
                }
            }
        })
    }
}

/// Synthesizes the packet as an indicator on the lattice.
///
/// Rejects packets whose hyperbolic thickness would span fewer than 4 tau
/// cells (discretization would fake better constants) and packets whose
/// support is clipped by the lattice box (silent norm loss).
pub fn knapp_packet(spec: &PacketSpec, lat: &Lattice) -> Result<GridFunction> {
    let region = spec.region()?;
    if 2.0 * spec.l < 4.0 * lat.spacing.0 {
        return Err(Error::Resolution(format!(
            "packet thickness 2L = {} spans fewer than 4 tau cells (h_tau = {})",
            2.0 * spec.l,
            lat.spacing.0
        )));
    }
    let bb = region.bounding_box()?;
    let eps = 1e-9;
    let inside = |inner: crate::geometry::Interval, outer: crate::geometry::Interval| {
        inner.lo >= outer.lo - eps && inner.hi <= outer.hi + eps
    };
    if !(inside(bb.tau, lat.extents.tau)
        && inside(bb.xi1, lat.extents.xi1)
        && inside(bb.xi2, lat.extents.xi2))
    {
        return Err(Error::PacketClipped(format!(
            "support box {bb:?} is not contained in lattice extents {:?}",
            lat.extents
        )));
    }
    Ok(indicator_function(&region, lat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box3, Interval};
    use crate::spectral::lattice::make_lattice;

    #[test]
    fn knapp_cap_width_is_critical_angle() {
        let spec = PacketSpec {
            kind: PacketKind::KnappCap,
            sign: Sign::Plus,
            n: 1.0,
            l: 0.01,
            omega: [1.0, 0.0],
            width: None,
        };
        match spec.region().unwrap() {
            Region::ConeSector { gamma, .. } => assert!((gamma - 0.1).abs() < 1e-15),
            other => panic!("expected sector, got {other:?}"),
        }
    }

    #[test]
    fn null_ray_full_width_degenerates_to_indicator() {
        let spec = PacketSpec {
            kind: PacketKind::NullRay,
            sign: Sign::Minus,
            n: 1.0,
            l: 0.05,
            omega: [0.0, 1.0],
            width: Some(1.0),
        };
        assert!(matches!(
            spec.region().unwrap(),
            Region::ConeAnnulus { .. }
        ));
        let missing = PacketSpec {
            width: None,
            ..spec
        };
        assert!(missing.region().is_err());
    }

    #[test]
    fn packet_norm_is_indicator_normalized() {
        let region = PacketSpec {
            kind: PacketKind::KnappCap,
            sign: Sign::Plus,
            n: 1.0,
            l: 0.05,
            omega: [1.0, 0.0],
            width: None,
        };
        let bb = region.region().unwrap().bounding_box().unwrap();
        let lat = make_lattice(&bb, (64, 16, 16)).unwrap();
        let f = knapp_packet(&region, &lat).unwrap();
        let expect = (f.support_count() as f64 * lat.cell_volume()).sqrt();
        assert!(f.support_count() > 0);
        assert!((f.l2_norm() - expect).abs() < 1e-12);
    }

    #[test]
    fn clipped_and_underresolved_packets_are_rejected() {
        let spec = PacketSpec {
            kind: PacketKind::Indicator,
            sign: Sign::Plus,
            n: 1.0,
            l: 0.05,
            omega: [1.0, 0.0],
            width: None,
        };
        // Box too small in xi: clipped.
        let small = Box3::new(
            Interval::new(0.9, 2.1),
            Interval::new(-1.0, 1.0),
            Interval::new(-2.0, 2.0),
        );
        let lat = make_lattice(&small, (64, 32, 32)).unwrap();
        assert!(matches!(
            knapp_packet(&spec, &lat),
            Err(Error::PacketClipped(_))
        ));
        // Coarse tau spacing: fewer than 4 cells across 2L.
        let bb = spec.region().unwrap().bounding_box().unwrap();
        let coarse = make_lattice(&bb, (8, 32, 32)).unwrap();
        assert!(matches!(
            knapp_packet(&spec, &coarse),
            Err(Error::Resolution(_))
        ));
    }
}
