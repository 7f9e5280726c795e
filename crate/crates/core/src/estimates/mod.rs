//! Catalog of predicted constants, empirical-constant searches, pointwise
//! lemma checks, and dyadic sweeps with scaling-exponent fits.

mod checks;
pub mod configs;
mod empirical;
mod power_iter;
mod predicted;
mod sweep;

pub use checks::{
    angle_lemma_check, curvature_check, gradient_flow_identity, AngleLemmaRecord, Conic,
    CurvatureRecord, GradFlowRecord,
};
pub use empirical::{empirical_constant, empirical_constant_with, knapp_directions, EmpiricalOpts};
pub use power_iter::power_iteration_bilinear;
pub use predicted::predicted_constant;
pub use sweep::{loglog_slope, sweep, sweep_with, SweepOutcome, SweepSpec};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::geometry::DyadicParams;

/// Closed enumeration of the verified estimates; each maps to exactly one
/// predicted-constant formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimateId {
    #[serde(rename = "KM_A110")]
    KmA110,
    #[serde(rename = "KM_A112_J1")]
    KmA112J1,
    #[serde(rename = "KM_A112_J2")]
    KmA112J2,
    #[serde(rename = "KM_A116")]
    KmA116,
    #[serde(rename = "L4_2D")]
    L42d,
    #[serde(rename = "ANISO_Z1")]
    AnisoZ1,
    #[serde(rename = "NULL_N2")]
    NullN2,
    #[serde(rename = "CONC_N4")]
    ConcN4,
    #[serde(rename = "LOWOUT_L1")]
    LowoutL1,
    #[serde(rename = "SECTOR_C200")]
    SectorC200,
    #[serde(rename = "SECTOR_E20")]
    SectorE20,
    #[serde(rename = "SECTOR_E21")]
    SectorE21,
    #[serde(rename = "SECTOR_E22")]
    SectorE22,
    #[serde(rename = "SECTOR_K50")]
    SectorK50,
    #[serde(rename = "SECTOR_K52")]
    SectorK52,
    #[serde(rename = "SECTOR_J200")]
    SectorJ200,
    #[serde(rename = "SECTOR_J202")]
    SectorJ202,
    #[serde(rename = "SECTOR_J220")]
    SectorJ220,
}

impl EstimateId {
    pub const ALL: [EstimateId; 18] = [
        EstimateId::KmA110,
        EstimateId::KmA112J1,
        EstimateId::KmA112J2,
        EstimateId::KmA116,
        EstimateId::L42d,
        EstimateId::AnisoZ1,
        EstimateId::NullN2,
        EstimateId::ConcN4,
        EstimateId::LowoutL1,
        EstimateId::SectorC200,
        EstimateId::SectorE20,
        EstimateId::SectorE21,
        EstimateId::SectorE22,
        EstimateId::SectorK50,
        EstimateId::SectorK52,
        EstimateId::SectorJ200,
        EstimateId::SectorJ202,
        EstimateId::SectorJ220,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimateId::KmA110 => "KM_A110",
            EstimateId::KmA112J1 => "KM_A112_J1",
            EstimateId::KmA112J2 => "KM_A112_J2",
            EstimateId::KmA116 => "KM_A116",
            EstimateId::L42d => "L4_2D",
            EstimateId::AnisoZ1 => "ANISO_Z1",
            EstimateId::NullN2 => "NULL_N2",
            EstimateId::ConcN4 => "CONC_N4",
            EstimateId::LowoutL1 => "LOWOUT_L1",
            EstimateId::SectorC200 => "SECTOR_C200",
            EstimateId::SectorE20 => "SECTOR_E20",
            EstimateId::SectorE21 => "SECTOR_E21",
            EstimateId::SectorE22 => "SECTOR_E22",
            EstimateId::SectorK50 => "SECTOR_K50",
            EstimateId::SectorK52 => "SECTOR_K52",
            EstimateId::SectorJ200 => "SECTOR_J200",
            EstimateId::SectorJ202 => "SECTOR_J202",
            EstimateId::SectorJ220 => "SECTOR_J220",
        }
    }

    /// Ids whose hypotheses pin sector geometry exactly; these are verified
    /// by the volume route only.
    pub fn is_sector(&self) -> bool {
        matches!(
            self,
            EstimateId::SectorC200
                | EstimateId::SectorE20
                | EstimateId::SectorE21
                | EstimateId::SectorE22
                | EstimateId::SectorK50
                | EstimateId::SectorK52
                | EstimateId::SectorJ200
                | EstimateId::SectorJ202
                | EstimateId::SectorJ220
        )
    }
}

impl std::fmt::Display for EstimateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimateId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EstimateId::ALL
            .iter()
            .find(|id| id.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown estimate id {s:?}"))
    }
}

/// Free parameters of an estimate beyond the dyadic shell data.
pub type Extras = BTreeMap<String, f64>;

/// How the inputs of an empirical run are synthesized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Knapp,
    NullRay,
    PowerIter,
    VolumeRoute,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Knapp => "knapp",
            Strategy::NullRay => "null_ray",
            Strategy::PowerIter => "power_iter",
            Strategy::VolumeRoute => "volume_route",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Strategy::Random),
            "knapp" => Ok(Strategy::Knapp),
            "null_ray" => Ok(Strategy::NullRay),
            "power_iter" => Ok(Strategy::PowerIter),
            "volume_route" => Ok(Strategy::VolumeRoute),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

/// One estimate-verification record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioReport {
    pub id: EstimateId,
    pub params: DyadicParams,
    pub extras: Extras,
    pub predicted: f64,
    pub empirical: f64,
    pub ratio: f64,
    pub strategy: Strategy,
    pub dims: (usize, usize, usize),
    pub seed: u64,
    pub runtime_ms: u64,
}
