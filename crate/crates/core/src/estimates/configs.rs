//! Seeded configuration families for the certification and acceptance
//! runs: deterministic parameter draws per estimate, sized so every run
//! resolves on its lattice, plus the fixed sharpness-witness configs.

use crate::estimates::{EstimateId, Extras};
use crate::geometry::{DyadicParams, Sign};
use crate::rng::{subseed, CounterRng};

pub type Config = (DyadicParams, Extras, (usize, usize, usize));

fn sign_pattern(k: u64) -> (Sign, Sign, Sign) {
    let b = |i: u64| {
        if (k >> i) & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    };
    (b(0), b(1), b(2))
}

fn pick(rng: &CounterRng, k: u64, set: &[f64]) -> f64 {
    set[(rng.u64_at(k) % set.len() as u64) as usize]
}

/// tau dims resolving the thinnest shell: the leg boxes span about
/// n + 2l in tau and need at least 4 cells across 2 l_min.
fn tau_dims(n_max: f64, l_min: f64) -> usize {
    let ext = n_max + 2.0 * 0.5;
    let need = (2.0 * ext / l_min).ceil() as usize + 4;
    need.div_ceil(8) * 8usize.max(1)
}

/// Deterministic certification configs for one estimate. The same family
/// (id, count, seed) always produces the same list.
pub fn certification_configs(id: EstimateId, count: usize, seed: u64) -> Vec<Config> {
    let rng = CounterRng::new(subseed(seed, &format!("configs/{id}")));
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let k = 16 * i as u64;
        let signs = sign_pattern(rng.u64_at(k));
        let ls = [0.0625, 0.125, 0.25];
        let (p, extras) = match id {
            EstimateId::KmA110 | EstimateId::KmA112J1 | EstimateId::KmA112J2 => {
                let n0 = pick(&rng, k + 1, &[0.5, 1.0, 2.0, 4.0]);
                let l0 = if id == EstimateId::KmA110 {
                    f64::INFINITY
                } else {
                    pick(&rng, k + 5, &ls)
                };
                (
                    DyadicParams {
                        n0,
                        n1: 1.0,
                        n2: 1.0,
                        l0,
                        l1: pick(&rng, k + 2, &ls),
                        l2: pick(&rng, k + 3, &ls),
                        signs,
                    },
                    Extras::new(),
                )
            }
            EstimateId::KmA116 => (
                DyadicParams {
                    n0: pick(&rng, k + 1, &[0.5, 1.0, 2.0]),
                    n1: 1.0,
                    n2: 1.0,
                    l0: pick(&rng, k + 2, &ls),
                    l1: pick(&rng, k + 3, &ls),
                    l2: pick(&rng, k + 4, &ls),
                    signs,
                },
                Extras::new(),
            ),
            EstimateId::L42d => {
                let n1 = pick(&rng, k + 1, &[0.5, 1.0]);
                let l1 = pick(&rng, k + 2, &[0.0625, 0.09375, 0.125, 0.1875, 0.25, 0.375]);
                (
                    DyadicParams {
                        n0: 2.0 * n1,
                        n1,
                        n2: n1,
                        l0: f64::INFINITY,
                        l1,
                        l2: l1,
                        signs,
                    },
                    Extras::new(),
                )
            }
            EstimateId::NullN2 => {
                let mut e = Extras::new();
                e.insert("r".into(), pick(&rng, k + 4, &[0.125, 0.25, 0.5]));
                (
                    DyadicParams {
                        n0: 4.0,
                        n1: 1.0,
                        n2: 1.0,
                        l0: f64::INFINITY,
                        l1: pick(&rng, k + 2, &ls),
                        l2: pick(&rng, k + 3, &ls),
                        signs,
                    },
                    e,
                )
            }
            EstimateId::AnisoZ1 => {
                let mut e = Extras::new();
                e.insert("alpha".into(), pick(&rng, k + 4, &[0.0625, 0.125, 0.25]));
                e.insert("len_i".into(), pick(&rng, k + 5, &[0.25, 0.5, 1.0]));
                (
                    DyadicParams {
                        n0: 4.0,
                        n1: 1.0,
                        n2: 1.0,
                        l0: f64::INFINITY,
                        l1: pick(&rng, k + 2, &ls),
                        l2: pick(&rng, k + 3, &ls),
                        signs,
                    },
                    e,
                )
            }
            EstimateId::ConcN4 => {
                let mut e = Extras::new();
                let r = pick(&rng, k + 4, &[0.0625, 0.125]);
                e.insert("r".into(), r);
                e.insert("len_i0".into(), r * pick(&rng, k + 5, &[8.0, 12.0]));
                (
                    DyadicParams {
                        n0: 4.0,
                        n1: 1.0,
                        n2: 1.0,
                        l0: f64::INFINITY,
                        l1: pick(&rng, k + 2, &[0.0625, 0.125]),
                        l2: pick(&rng, k + 3, &[0.0625, 0.125]),
                        signs,
                    },
                    e,
                )
            }
            EstimateId::LowoutL1 => (
                DyadicParams {
                    n0: pick(&rng, k + 1, &[0.125, 0.25]),
                    n1: 1.0,
                    n2: 1.0,
                    l0: pick(&rng, k + 2, &ls),
                    l1: pick(&rng, k + 3, &ls),
                    l2: pick(&rng, k + 4, &ls),
                    signs,
                },
                Extras::new(),
            ),
            sector => {
                // Volume-route-only shapes.
                let gamma = pick(&rng, k + 4, &[0.0625, 0.125, 0.25]);
                let mut e = Extras::new();
                e.insert("gamma".into(), gamma);
                match sector {
                    EstimateId::SectorK50 | EstimateId::SectorK52 => {
                        e.insert("alpha".into(), pick(&rng, k + 5, &[0.125, 0.25]));
                        e.insert("delta".into(), pick(&rng, k + 6, &[0.25, 0.5]));
                    }
                    EstimateId::SectorE20 | EstimateId::SectorE21 | EstimateId::SectorE22 => {
                        e.insert("r".into(), pick(&rng, k + 5, &[0.125, 0.25]));
                    }
                    EstimateId::SectorJ200 | EstimateId::SectorJ202 | EstimateId::SectorJ220 => {
                        e.insert("r".into(), pick(&rng, k + 5, &[0.125, 0.25]));
                        e.insert("len_i0".into(), pick(&rng, k + 6, &[0.25, 0.5]));
                    }
                    _ => {}
                }
                (
                    DyadicParams {
                        n0: pick(&rng, k + 1, &[0.5, 1.0]),
                        n1: 1.0,
                        n2: 1.0,
                        l0: f64::INFINITY,
                        l1: pick(&rng, k + 2, &ls),
                        l2: pick(&rng, k + 3, &ls),
                        signs,
                    },
                    e,
                )
            }
        };
        let n_max = p.n0.min(8.0).max(p.n1).max(p.n2);
        let dims = (
            tau_dims(n_max, p.l_min_12()).clamp(16, 128),
            48,
            48,
        );
        out.push((p, extras, dims));
    }
    out
}

/// The sharpness witnesses: the Knapp pair for the fundamental bilinear
/// estimate and the null-ray pair for the nonconcentration low-output
/// estimate.
pub fn sharpness_witness(id: EstimateId) -> Config {
    match id {
        EstimateId::KmA110 => (
            DyadicParams {
                n0: 2.0,
                n1: 1.0,
                n2: 1.0,
                l0: f64::INFINITY,
                l1: 0.0625,
                l2: 0.0625,
                signs: (Sign::Plus, Sign::Plus, Sign::Plus),
            },
            Extras::new(),
            (48, 64, 64),
        ),
        EstimateId::LowoutL1 => (
            DyadicParams {
                n0: 0.25,
                n1: 1.0,
                n2: 1.0,
                l0: 0.125,
                l1: 0.125,
                l2: 0.125,
                signs: (Sign::Plus, Sign::Plus, Sign::Minus),
            },
            Extras::new(),
            (48, 96, 96),
        ),
        other => panic!("no sharpness witness defined for {other}"),
    }
}
