use conelab::estimates::{curvature_check, Conic};
use conelab::geometry::Interval;
use std::f64::consts::PI;

fn main() {
    let cases: [(f64, f64, Conic, Interval); 5] = [
        (1.5, 0.0, Conic::Ellipse, Interval::new(0.3, 2.8)),
        (2.0, 1.0, Conic::Ellipse, Interval::new(1.25, PI - 0.2)),
        (1.05, 1.0, Conic::Ellipse, Interval::new(1.9, PI - 0.05)),
        (1.0, 1.25, Conic::Hyperbola, Interval::new(0.05, 1.2)),
        (0.9, 1.0, Conic::Hyperbola, Interval::new(0.05, 1.52)),
    ];
    for (a, c, conic, range) in cases {
        match curvature_check(a, c, conic, range, 100) {
            Ok(r) => {
                let tol = conelab::tolerances::CURVATURE_KAPPA_TOL;
                println!(
                    "a={a} c={c} {conic:?}: kappa [{:.4}, {:.4}] n1={:.4} alpha={:.4} err={:.2e} pass={} | lower-needs {:.3} <= {:.3}; upper-needs {:.3} <= {:.3}",
                    r.kappa_min, r.kappa_max, r.n1_proxy, r.alpha_proxy, r.max_rel_err, r.pass,
                    r.alpha_proxy / r.n1_proxy, r.kappa_min * tol,
                    r.kappa_max, tol / r.n1_proxy,
                );
            }
            Err(e) => println!("a={a} c={c} {conic:?}: error {e}"),
        }
    }
}
