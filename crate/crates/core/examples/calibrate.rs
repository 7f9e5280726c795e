//! Certification runs that measure the empirical constants before they are
//! frozen into `tolerances.rs`. Every run is seeded; rerunning reproduces
//! the printed values exactly.

use std::collections::BTreeMap;
use std::time::Instant;

use conelab::estimates::configs::{certification_configs, sharpness_witness};
use conelab::estimates::{
    empirical_constant_with, sweep_with, EmpiricalOpts, EstimateId, Extras, Strategy, SweepSpec,
};
use conelab::geometry::{DyadicParams, Interval, Region, Sign};
use conelab::rng::subseed;
use conelab::spectral::{indicator_function, lattice_with_spacing, anisotropic_norm};
use conelab::verify;
use conelab::volume::SupSearchOpts;

const SEED: u64 = 42;

fn main() {
    let which: Vec<String> = std::env::args().skip(1).collect();
    let run = |name: &str| which.is_empty() || which.iter().any(|w| w == name);

    if run("lemmas") {
        let t = Instant::now();
        let s = verify::verify_whitney(100_000, SEED);
        println!("[lemmas] whitney B_w measured max = {} ({} trials, {:.1}s)", s.value, s.trials, t.elapsed().as_secs_f64());

        let t = Instant::now();
        let stats = verify::angle_lemma_stats(1_000_000, SEED);
        println!(
            "[lemmas] angle-lemma min ratio = {:.6} second-part count = {} in-range = {} ({:.1}s)",
            stats.min_ratio, stats.second_part_count, stats.second_part_in_range, t.elapsed().as_secs_f64()
        );

        let s = verify::verify_circle_intersection(200, 8.0, SEED);
        println!("[lemmas] circle-intersection max ratio = {:.4} pass = {}", s.value, s.pass);
        let s = verify::verify_strip_circle(200, 8.0, SEED);
        println!("[lemmas] strip-circle max ratio = {:.4} pass = {}", s.value, s.pass);
        let s = verify::verify_nullplane(10_000, 8.0, SEED);
        println!("[lemmas] nullplane max ratio = {:.4} pass = {}", s.value, s.pass);
    }

    if run("volroute") {
        // Criterion-6 style sweep: ratio over random dyadic configs.
        let t = Instant::now();
        let rng = conelab::rng::CounterRng::new(subseed(SEED, "volroute"));
        let sup_opts = SupSearchOpts {
            grid: 48,
            slices_search: 256,
            slices_final: 1024,
            refine_iters: 16,
        };
        let ns = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        let lset: Vec<f64> = (2..=8).map(|k| 2f64.powi(-k)).collect();
        let mut max_ratio: f64 = 0.0;
        let mut worst = None;
        use rayon::prelude::*;
        let configs: Vec<DyadicParams> = (0..216u64)
            .map(|i| {
                let k = 8 * i;
                let sp = |b: u64| if b % 2 == 0 { Sign::Plus } else { Sign::Minus };
                DyadicParams {
                    n0: ns[(rng.u64_at(k) % 6) as usize],
                    n1: ns[(rng.u64_at(k + 1) % 6) as usize],
                    n2: ns[(rng.u64_at(k + 2) % 6) as usize],
                    l0: f64::INFINITY,
                    l1: lset[(rng.u64_at(k + 3) % 7) as usize],
                    l2: lset[(rng.u64_at(k + 4) % 7) as usize],
                    signs: (sp(rng.u64_at(k + 5)), sp(rng.u64_at(k + 6)), sp(rng.u64_at(k + 7))),
                }
            })
            .collect();
        let ratios: Vec<f64> = configs
            .par_iter()
            .map(|p| {
                let c = conelab::volume::bilinear_constant_volume(p, &sup_opts);
                let pred = conelab::estimates::predicted_constant(
                    EstimateId::KmA110,
                    p,
                    &Extras::new(),
                )
                .unwrap();
                (c * c) / (pred * pred)
            })
            .collect();
        for (p, r) in configs.iter().zip(&ratios) {
            if *r > max_ratio {
                max_ratio = *r;
                worst = Some(*p);
            }
        }
        println!(
            "[volroute] criterion-6 ratio sweep: max supvol/pred^2 = {:.3} over {} configs ({:.1}s)\n  worst at {:?}",
            max_ratio,
            configs.len(),
            t.elapsed().as_secs_f64(),
            worst
        );

        // Slope fits in the HLH regime.
        let t = Instant::now();
        let base = DyadicParams {
            n0: 4.0,
            n1: 1.0,
            n2: 4.0,
            l0: f64::INFINITY,
            l1: 2f64.powi(-8),
            l2: 2f64.powi(-2),
            signs: (Sign::Plus, Sign::Plus, Sign::Plus),
        };
        let mut ranges = BTreeMap::new();
        ranges.insert(
            "l1".to_string(),
            (4..=8).map(|k| 2f64.powi(-k)).collect::<Vec<_>>(),
        );
        let spec = SweepSpec {
            id: EstimateId::KmA110,
            strategy: Strategy::VolumeRoute,
            dims: (0, 0, 0),
            seed: SEED,
            base,
            extras: Extras::new(),
            ranges,
            sweep_signs: false,
        };
        let opts = EmpiricalOpts {
            sup_opts,
            ..Default::default()
        };
        let out = sweep_with(&spec, &opts).unwrap();
        println!(
            "[volroute] L_min slope of C^2 = {:.4} ({:.1}s)",
            2.0 * out.fitted_exponents["l1"],
            t.elapsed().as_secs_f64()
        );
        let mut ranges = BTreeMap::new();
        ranges.insert(
            "l2".to_string(),
            (2..=6).map(|k| 2f64.powi(-k)).collect::<Vec<_>>(),
        );
        let spec = SweepSpec {
            ranges,
            ..spec
        };
        let out = sweep_with(&spec, &opts).unwrap();
        println!(
            "[volroute] L_max slope of C^2 = {:.4}",
            2.0 * out.fitted_exponents["l2"]
        );
    }

    if run("kappa") {
        // Criterion-7 certification: per-id max ratios over the seeded
        // config families, random + knapp strategies.
        let ids = [
            EstimateId::KmA110,
            EstimateId::KmA116,
            EstimateId::L42d,
            EstimateId::NullN2,
            EstimateId::AnisoZ1,
            EstimateId::LowoutL1,
            EstimateId::ConcN4,
        ];
        for id in ids {
            for strategy in [Strategy::Random, Strategy::Knapp] {
                let t = Instant::now();
                let configs = certification_configs(id, 50, SEED);
                use rayon::prelude::*;
                let results: Vec<Result<f64, String>> = configs
                    .par_iter()
                    .enumerate()
                    .map(|(i, (p, e, dims))| {
                        empirical_constant_with(
                            id,
                            p,
                            e,
                            strategy,
                            *dims,
                            subseed(SEED, &format!("cert/{id}/{strategy}/{i}")),
                            &EmpiricalOpts::default(),
                        )
                        .map(|r| r.ratio)
                        .map_err(|err| format!("{err}"))
                    })
                    .collect();
                let mut max_ratio: f64 = 0.0;
                let mut min_ratio = f64::INFINITY;
                let mut errs = 0;
                for r in &results {
                    match r {
                        Ok(v) => {
                            max_ratio = max_ratio.max(*v);
                            min_ratio = min_ratio.min(*v);
                        }
                        Err(e) => {
                            errs += 1;
                            if errs <= 2 {
                                println!("    error: {e}");
                            }
                        }
                    }
                }
                println!(
                    "[kappa] {id} {strategy}: max ratio {:.4} min {:.4} errors {errs} ({:.1}s)",
                    max_ratio,
                    min_ratio,
                    t.elapsed().as_secs_f64()
                );
            }
        }
    }

    if run("sharp") {
        for (id, strategy) in [
            (EstimateId::KmA110, Strategy::Knapp),
            (EstimateId::LowoutL1, Strategy::NullRay),
        ] {
            let (p, e, dims) = sharpness_witness(id);
            let t = Instant::now();
            let rep = empirical_constant_with(
                id,
                &p,
                &e,
                strategy,
                dims,
                SEED,
                &EmpiricalOpts::default(),
            )
            .unwrap();
            println!(
                "[sharp] {id} {strategy}: ratio = {:.4} (empirical {:.5}, predicted {:.5}) ({:.1}s)",
                rep.ratio,
                rep.empirical,
                rep.predicted,
                t.elapsed().as_secs_f64()
            );
        }
    }

    if run("aniso") {
        // Anisotropic norm sandwich over indicator and random fields.
        let n = 1.0;
        let ann = Region::ConeAnnulus {
            sign: Sign::Plus,
            n,
            l: 10.0,
        };
        let bb = conelab::geometry::Box3::new(
            Interval::new(0.0, 1.0),
            Interval::new(-2.0, 2.0),
            Interval::new(-2.0, 2.0),
        );
        let lat = lattice_with_spacing(&bb, (0.5, 0.02, 0.02)).unwrap();
        let f = indicator_function(&ann, &lat);
        let mut worst: f64 = 1.0;
        for r in [0.5, 0.25, 0.125, 0.0625] {
            let a = anisotropic_norm(&f, n, r).unwrap();
            let ratio = a / f.l2_norm();
            worst = worst.max(ratio).max(1.0 / ratio);
            println!("[aniso] circular field r = {r}: ratio = {ratio:.4}");
        }
        println!("[aniso] worst two-sided = {worst:.4}");
    }
}
