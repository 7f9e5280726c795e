//! Pointwise analytic verifications: the hyperbolic-weight angle lemma,
//! conic curvature bounds, and the gradient-flow positivity identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle, dot, norm2, scale, sub2, FreqPoint, Interval, Sign, Vec2};
use crate::tolerances;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AngleLemmaRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub second_part_applicable: bool,
    pub second_part_ratio: Option<f64>,
}

/// Checks max(|h0|,|h1|,|h2|) >= c min(|xi1|,|xi2|) theta12^2 on one triple
/// X0 = X1 + X2, plus the two-sided refinement when |h1|, |h2| << |h0| and
/// the output sign realizes |h0| = ||tau0| - |xi0||.
pub fn angle_lemma_check(
    x1: FreqPoint,
    x2: FreqPoint,
    s0: Sign,
    s1: Sign,
    s2: Sign,
) -> Result<AngleLemmaRecord> {
    let x0 = x1.add(x2);
    let (r0, r1, r2) = (norm2(x0.xi), norm2(x1.xi), norm2(x2.xi));
    if r0 == 0.0 || r1 == 0.0 || r2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let h0 = -x0.tau + s0.value() * r0;
    let h1 = -x1.tau + s1.value() * r1;
    let h2 = -x2.tau + s2.value() * r2;
    let lhs = h0.abs().max(h1.abs()).max(h2.abs());
    let theta = angle(scale(x1.xi, s1.value()), scale(x2.xi, s2.value()))?;
    let rhs = r1.min(r2) * theta * theta;
    let ratio = if rhs == 0.0 { f64::INFINITY } else { lhs / rhs };

    // Second part: the output sign must minimize |h0| (so that
    // |h0| = ||tau0| - |xi0||) and the leg weights must be dominated.
    let min_h0 = (x0.tau.abs() - r0).abs();
    let scale0 = x0.tau.abs().max(r0).max(1e-300);
    let sign_ok = (h0.abs() - min_h0).abs() <= 1e-9 * scale0;
    let dominated = h1.abs() <= tolerances::MUCH_LESS_FACTOR * h0.abs()
        && h2.abs() <= tolerances::MUCH_LESS_FACTOR * h0.abs();
    let applicable = sign_ok && dominated && h0 != 0.0;
    let second = if applicable {
        let cmp = if s1 == s2 {
            r1.min(r2) * theta * theta
        } else {
            r1 * r2 * theta * theta / r0
        };
        Some(if cmp == 0.0 {
            f64::INFINITY
        } else {
            h0.abs() / cmp
        })
    } else {
        None
    };
    Ok(AngleLemmaRecord {
        lhs,
        rhs,
        ratio,
        second_part_applicable: applicable,
        second_part_ratio: second,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conic {
    Ellipse,
    Hyperbola,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CurvatureRecord {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub n1_proxy: f64,
    pub alpha_proxy: f64,
    pub max_rel_err: f64,
    pub pass: bool,
}

/// Focal-chord parametrization r(theta) = b^2 / (a -+ c cos theta) of the
/// tau-slice conic with foci 0 and (2c, 0), with analytic curvature
/// kappa = |r^2 + 2 r'^2 - r r''| / (r^2 + r'^2)^{3/2}
/// cross-checked against finite-difference curvature of the parametrized
/// curve, plus the two-sided bound alpha/N1 <~ kappa <~ 1/N1.
pub fn curvature_check(
    a_axis: f64,
    c_focus: f64,
    conic: Conic,
    theta_range: Interval,
    samples: usize,
) -> Result<CurvatureRecord> {
    if !(a_axis > 0.0 && c_focus >= 0.0) {
        return Err(Error::InvalidParameter("conic axes must be positive".into()));
    }
    let b2 = match conic {
        Conic::Ellipse => {
            if c_focus >= a_axis {
                return Err(Error::InvalidParameter(format!(
                    "ellipse needs c < a; got c = {c_focus}, a = {a_axis}"
                )));
            }
            a_axis * a_axis - c_focus * c_focus
        }
        Conic::Hyperbola => {
            if c_focus <= a_axis {
                return Err(Error::InvalidParameter(format!(
                    "hyperbola needs c > a; got c = {c_focus}, a = {a_axis}"
                )));
            }
            c_focus * c_focus - a_axis * a_axis
        }
    };
    // Denominator D(theta) and its sign convention per branch.
    let d_of = |theta: f64| match conic {
        Conic::Ellipse => a_axis - c_focus * theta.cos(),
        Conic::Hyperbola => a_axis + c_focus * theta.cos(),
    };
    let d_dot = |theta: f64| match conic {
        Conic::Ellipse => c_focus * theta.sin(),
        Conic::Hyperbola => -c_focus * theta.sin(),
    };
    let r_of = |theta: f64| b2 / d_of(theta);
    let kappa_analytic = |theta: f64| -> f64 {
        let d = d_of(theta);
        let dd = d_dot(theta);
        let r = b2 / d;
        let rd = -b2 * dd / (d * d);
        // r'' from the closed form; the combination r^2 + 2r'^2 - r r''
        // collapses to a b^4 / D^3.
        let num = a_axis * b2 * b2 / (d * d * d);
        num.abs() / (r * r + rd * rd).powf(1.5)
    };
    let kappa_numeric = |theta: f64| -> f64 {
        // Parametric curvature |x'y'' - y'x''| / (x'^2 + y'^2)^{3/2} by
        // fourth-order central differences of (r cos, r sin); second-order
        // stencils at this tolerance are roundoff-limited. The step adapts
        // to the local feature scale r / r' of the focal parametrization.
        let rr = r_of(theta);
        let rd = -b2 * d_dot(theta) / (d_of(theta) * d_of(theta));
        let h = 1e-3 / (1.0 + rd.abs() / rr);
        let pt = |t: f64| -> Vec2 {
            let r = r_of(t);
            [r * t.cos(), r * t.sin()]
        };
        let pm2 = pt(theta - 2.0 * h);
        let pm = pt(theta - h);
        let p0 = pt(theta);
        let pp = pt(theta + h);
        let pp2 = pt(theta + 2.0 * h);
        let d1 = std::array::from_fn::<f64, 2, _>(|i| {
            (-pp2[i] + 8.0 * pp[i] - 8.0 * pm[i] + pm2[i]) / (12.0 * h)
        });
        let d2 = std::array::from_fn::<f64, 2, _>(|i| {
            (-pp2[i] + 16.0 * pp[i] - 30.0 * p0[i] + 16.0 * pm[i] - pm2[i]) / (12.0 * h * h)
        });
        (d1[0] * d2[1] - d1[1] * d2[0]).abs() / (d1[0] * d1[0] + d1[1] * d1[1]).powf(1.5)
    };
    // theta12 at the slice point: angle between the leg directions
    // xi and +-(xi0 - xi), with the sign fixed by the conic type.
    let xi0 = [2.0 * c_focus, 0.0];
    let theta12_at = |theta: f64| -> f64 {
        let r = r_of(theta);
        let xi = [r * theta.cos(), r * theta.sin()];
        let leg2 = sub2(xi0, xi);
        let s = match conic {
            Conic::Ellipse => 1.0,
            Conic::Hyperbola => -1.0,
        };
        angle(xi, scale(leg2, s)).unwrap_or(0.0)
    };

    if theta_range.is_empty() || samples < 2 {
        return Err(Error::InvalidParameter("bad theta range or sample count".into()));
    }
    let mut kmin = f64::INFINITY;
    let mut kmax: f64 = 0.0;
    let mut n1: f64 = 0.0;
    let mut alpha = f64::INFINITY;
    let mut max_rel = 0.0f64;
    let mut kappas = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = theta_range.lo + theta_range.len() * (i as f64 + 0.5) / samples as f64;
        if d_of(t) <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "theta = {t} is outside the conic branch"
            )));
        }
        let ka = kappa_analytic(t);
        let kn = kappa_numeric(t);
        max_rel = max_rel.max((ka - kn).abs() / ka.abs().max(kn.abs()).max(1e-300));
        kmin = kmin.min(ka);
        kmax = kmax.max(ka);
        n1 = n1.max(r_of(t));
        alpha = alpha.min(theta12_at(t));
        kappas.push(ka);
    }
    let tol = tolerances::CURVATURE_KAPPA_TOL;
    let pass = kappas
        .iter()
        .all(|k| alpha / n1 <= k * tol && *k <= tol / n1)
        && max_rel <= tolerances::EXACT_IDENTITY_REL_ERR;
    Ok(CurvatureRecord {
        kappa_min: kmin,
        kappa_max: kmax,
        n1_proxy: n1,
        alpha_proxy: alpha,
        max_rel_err: max_rel,
        pass,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GradFlowRecord {
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

/// The gradient-flow quantity grad(|grad f|^2) . grad f for
/// f(xi) = |xi| + s |xi - xi0|, whose closed form (in coordinates with
/// xi0 on the positive axis, |xi0| = q) is
///     2 q^2 (xi_2)^2 (|xi0 - xi| + s |xi|) / (|xi|^3 |xi0 - xi|^3),
/// compared against a fourth-order finite-difference evaluation. Positivity
/// on the half-plane |xi| < |xi0 - xi| drives the monotonicity of theta12
/// along the flow.
pub fn gradient_flow_identity(xi: Vec2, xi0: Vec2, s: Sign) -> Result<GradFlowRecord> {
    let q = norm2(xi0);
    if q == 0.0 || norm2(xi) == 0.0 || norm2(sub2(xi0, xi)) == 0.0 {
        return Err(Error::ZeroVector);
    }
    // Rotate into the frame with xi0 = (q, 0).
    let u = [xi0[0] / q, xi0[1] / q];
    let rot = |v: Vec2| -> Vec2 { [v[0] * u[0] + v[1] * u[1], -v[0] * u[1] + v[1] * u[0]] };
    let p = rot(xi);
    let dn = norm2(p);
    let df = norm2(sub2([q, 0.0], p));
    let dmin = dn.min(df);
    if dmin < 1e-3 * q {
        return Err(Error::InvalidParameter(format!(
            "point within {dmin} of a focus (singularity guard is 1e-3 |xi0| = {})",
            1e-3 * q
        )));
    }
    let sv = s.value();
    let analytic = 2.0 * q * q * p[1] * p[1] * (df + sv * dn) / (dn.powi(3) * df.powi(3));

    // |grad f|^2 with the exact gradient; only the outer derivative is
    // taken numerically (the identity under test is the outer one).
    let g = |y: Vec2| -> f64 {
        let a = norm2(y);
        let bvec = sub2(y, [q, 0.0]);
        let b = norm2(bvec);
        let gf = [y[0] / a + sv * bvec[0] / b, y[1] / a + sv * bvec[1] / b];
        dot(gf, gf)
    };
    let grad_f = {
        let a = dn;
        let bvec = sub2(p, [q, 0.0]);
        let b = norm2(bvec);
        [p[0] / a + sv * bvec[0] / b, p[1] / a + sv * bvec[1] / b]
    };
    let h = 1e-3 * dmin;
    // Fourth-order central difference per axis.
    let d4 = |axis: usize| -> f64 {
        let mut e = [0.0, 0.0];
        e[axis] = 1.0;
        let at = |k: f64| g([p[0] + k * h * e[0], p[1] + k * h * e[1]]);
        (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
    };
    let numeric = d4(0) * grad_f[0] + d4(1) * grad_f[1];
    let scale_ref = analytic.abs().max(numeric.abs());
    let rel_err = if scale_ref > 1e-9 {
        (analytic - numeric).abs() / scale_ref
    } else {
        (analytic - numeric).abs()
    };
    Ok(GradFlowRecord {
        analytic,
        numeric,
        rel_err,
    })
}
