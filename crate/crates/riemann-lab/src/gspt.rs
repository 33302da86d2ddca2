//! Dafermos-regularized fast system, invariant regions, blow-up fields and viscous profiles.

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::delta;
use crate::error::{Error, Result};
use crate::model::{flux, jacobian, lambda_0, Params, State};
use crate::ode::{integrate, Control, OdeOptions};

/// (rho, u, w1, w2, xi, eps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastPoint {
    pub rho: f64,
    pub u: f64,
    pub w1: f64,
    pub w2: f64,
    pub xi: f64,
    pub eps: f64,
}

pub fn fast_field(pt: FastPoint, p: &Params) -> Result<[f64; 6]> {
    if !(pt.rho > 0.0) {
        return Err(Error::DegenerateFlux { rho: pt.rho, a: p.a });
    }
    let FastPoint { rho, u, w1, w2, xi, eps } = pt;
    Ok([u * rho * p.phi(rho) - xi * rho - w1, (u * w1 - w2) / rho, -eps * rho, -eps * rho * u, eps, 0.0])
}

/// Right-hand side of U' = V, V' = (DF(U) - xi) V, xi' = eps in (rho, m, v1, v2, xi).
pub fn uv_field(rho: f64, m: f64, v: [f64; 2], xi: f64, eps: f64, p: &Params) -> Result<[f64; 5]> {
    let j = jacobian(State::new(rho, m / rho), p)?;
    let vv = Vector2::new(v[0], v[1]);
    let dv = (j - Matrix2::identity() * xi) * vv;
    Ok([v[0], v[1], dv[0], dv[1], eps])
}

/// W = -V + F(U) - xi U.
pub fn w_from_v(rho: f64, m: f64, v: [f64; 2], xi: f64, p: &Params) -> Result<[f64; 2]> {
    let f = flux(State::new(rho, m / rho), p)?;
    Ok([-v[0] + f[0] - xi * rho, -v[1] + f[1] - xi * m])
}

pub fn w_state(s: State, xi: f64, p: &Params) -> Result<[f64; 2]> {
    let f = flux(s, p)?;
    Ok([f[0] - xi * s.rho, f[1] - xi * s.m()])
}

/// Planar field U' = F(U) - sU - W_anchor in (rho, u) coordinates.
pub fn planar_field(x: State, anchor: State, s: f64, p: &Params) -> Result<[f64; 2]> {
    let [w1, w2] = w_state(anchor, s, p)?;
    let f = fast_field(FastPoint { rho: x.rho, u: x.u, w1, w2, xi: s, eps: 0.0 }, p)?;
    Ok([f[0], f[1]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Negatively invariant: flow leaves or is tangent.
    Left,
    /// Positively invariant: flow enters or is tangent.
    Right,
}

/// The half-plane u > u_anchor on the anchor's side of rho_bar is split by the contact branch
/// through the anchor into a lower-density and a higher-density wedge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wedge {
    LowRho,
    HighRho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeCheck {
    pub wedge: Wedge,
    pub violations: usize,
    pub tangent: usize,
    /// Most negative normalized margin (positive means the required direction).
    pub worst_margin: f64,
    pub worst_state: State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub side: Side,
    pub anchor: State,
    pub s: f64,
    pub n_samples: usize,
    /// Wedge with no violations, high-density wedge preferred.
    pub region: Wedge,
    pub checks: Vec<WedgeCheck>,
}

pub const TANGENCY_TOL: f64 = 1e-9;

pub fn check_invariant_region(
    side: Side,
    anchor: State,
    s: f64,
    p: &Params,
    n_samples: usize,
) -> Result<InvariantReport> {
    if anchor.u == 0.0 {
        return Err(Error::FullDegeneracy);
    }
    let n_curve = n_samples / 2;
    let n_line = n_samples - n_curve;
    let vertical = p.on_critical(anchor.rho);
    let c = if vertical { 0.0 } else { lambda_0(anchor, p) };
    // curve samples with the gradient of the level-set function pointing towards higher rho
    let mut curve: Vec<(State, [f64; 2])> = Vec::with_capacity(n_curve);
    if vertical {
        for k in 1..=n_curve {
            let u = anchor.u + anchor.u.abs().max(1.0) * 10.0 * k as f64 / n_curve as f64;
            curve.push((State::new(p.rho_bar, u), [1.0, 0.0]));
        }
    } else {
        let (lo, hi) = curve_branch_above(anchor, c, p);
        for k in 1..=n_curve {
            let t = k as f64 / (n_curve as f64 + 1.0);
            let rho = (lo.ln() + t * (hi.ln() - lo.ln())).exp();
            let phi = p.phi(rho);
            let u = c / phi;
            let dphi = -p.a * p.q(rho) / rho;
            // g = u phi(rho) - c; orient so the normal points to higher rho
            let grad = [u * dphi, phi];
            let sgn = grad[0].signum();
            curve.push((State::new(rho, u), [sgn * grad[0], sgn * grad[1]]));
        }
    }
    let split = anchor.rho;
    let side_max = if vertical || anchor.rho > p.rho_bar { 20.0 * p.rho_bar.max(anchor.rho) } else { p.rho_bar };
    let side_min = if vertical || anchor.rho < p.rho_bar { 0.0 } else { p.rho_bar };
    let mut checks = Vec::new();
    for wedge in [Wedge::HighRho, Wedge::LowRho] {
        let mut chk = WedgeCheck { wedge, violations: 0, tangent: 0, worst_margin: f64::INFINITY, worst_state: anchor };
        let mut record = |x: State, normal_out: [f64; 2]| -> Result<()> {
            let f = planar_field(x, anchor, s, p)?;
            let nf = (f[0] * f[0] + f[1] * f[1]).sqrt();
            let nn = (normal_out[0].powi(2) + normal_out[1].powi(2)).sqrt();
            let flux_out = if nf == 0.0 { 0.0 } else { (f[0] * normal_out[0] + f[1] * normal_out[1]) / (nf * nn) };
            let margin = match side {
                Side::Left => flux_out,
                Side::Right => -flux_out,
            };
            if margin.abs() <= TANGENCY_TOL {
                chk.tangent += 1;
            } else if margin < 0.0 {
                chk.violations += 1;
            }
            if margin < chk.worst_margin {
                chk.worst_margin = margin;
                chk.worst_state = x;
            }
            Ok(())
        };
        for &(x, g) in &curve {
            // the high-density wedge lies on the +g side, so its outward normal is -g
            let out = match wedge {
                Wedge::HighRho => [-g[0], -g[1]],
                Wedge::LowRho => g,
            };
            record(x, out)?;
        }
        let (a, b) = match wedge {
            Wedge::HighRho => (split, side_max),
            Wedge::LowRho => (side_min, split),
        };
        for k in 1..=n_line {
            let rho = a + (b - a) * k as f64 / (n_line as f64 + 1.0);
            if rho > 0.0 {
                record(State::new(rho, anchor.u), [0.0, -1.0])?;
            }
        }
        checks.push(chk);
    }
    match checks.iter().find(|c| c.violations == 0) {
        Some(ok) => Ok(InvariantReport { side, anchor, s, n_samples, region: ok.wedge, checks }),
        None => {
            let w = &checks[0];
            Err(Error::InvariantRegionViolation { state: w.worst_state, normal: w.worst_margin })
        }
    }
}

/// Density interval of the anchor's contact branch on which u > u_anchor.
fn curve_branch_above(anchor: State, c: f64, p: &Params) -> (f64, f64) {
    let up = anchor.rho * (1.0 + 1e-6);
    let u_up = c / p.phi(up);
    let towards_higher = u_up > anchor.u;
    let end = if anchor.rho < p.rho_bar {
        if towards_higher {
            p.rho_bar * (1.0 - 1e-6)
        } else {
            anchor.rho * 1e-4
        }
    } else if towards_higher {
        anchor.rho * 1e4
    } else {
        p.rho_bar * (1.0 + 1e-6)
    };
    if towards_higher {
        (anchor.rho, end)
    } else {
        (end, anchor.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupPoint {
    pub r: f64,
    pub rho_bar0: f64,
    pub u_bar0: f64,
    pub eps_bar: f64,
    pub w1: f64,
    pub w2: f64,
    pub xi: f64,
}

impl BlowupPoint {
    pub fn sphere_error(&self) -> f64 {
        (self.rho_bar0.powi(2) + self.u_bar0.powi(2) + self.eps_bar.powi(2) - 1.0).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Raw,
    Desingularized,
    TimeRescaled,
}

/// Derivative ordered as (r, rho_bar0, u_bar0, eps_bar, w1, w2, xi).
/// Raw is the blown-up system; the other stages are its leading order in r after
/// multiplying by r rho_bar0 / eps_bar, and TimeRescaled also divides by -(xi w1 - w2).
pub fn blowup_field_neg_a(bp: BlowupPoint, p: &Params, stage: Stage) -> Result<[f64; 7]> {
    if p.a >= 0.0 {
        return Err(Error::InvalidParams(format!("a = {} is not negative", p.a)));
    }
    let BlowupPoint { r, rho_bar0: rb0, u_bar0: ub, eps_bar: eb, w1, w2, xi } = bp;
    match stage {
        Stage::Raw => {
            if !(r > 0.0 && rb0 > 0.0 && eb > 0.0) {
                return Err(Error::Desingularization(r.min(rb0).min(eb)));
            }
            let u = r * ub + xi;
            let g = u * w1 - w2;
            let phi = 1.0 - (p.a * (rb0 / (eb * p.rho_bar)).ln()).exp();
            let dr = g * eb * ub / rb0 - r * eb * ub + r * rb0 * rb0 * u * phi - xi * r * rb0 * rb0 - r * eb * rb0 * w1;
            let drb = rb0 * u * phi - xi * rb0 - eb * w1 - g * eb * ub / r + eb * rb0 * ub - rb0.powi(3) * u * phi
                + xi * rb0.powi(3)
                + eb * rb0 * rb0 * w1;
            let dub = g * eb / (r * rb0) - eb - g * eb * ub * ub / (r * rb0) + eb * ub * ub + xi * rb0 * rb0 * ub
                - rb0 * rb0 * ub * u * phi
                + eb * rb0 * ub * w1;
            let deb = -g * eb * eb * ub / (r * rb0) + eb * eb * ub - eb * rb0 * rb0 * u * phi
                + xi * eb * rb0 * rb0
                + eb * eb * rb0 * w1;
            Ok([dr, drb, dub, deb, -r * rb0, -r * rb0 * u, r * eb])
        }
        Stage::Desingularized | Stage::TimeRescaled => {
            let g = xi * w1 - w2;
            let scale = if stage == Stage::TimeRescaled {
                if !(g < 0.0) {
                    return Err(Error::Desingularization(g));
                }
                -1.0 / g
            } else {
                1.0
            };
            Ok([
                scale * g * ub * r,
                -scale * g * ub * rb0,
                scale * g * (1.0 - ub * ub),
                -scale * g * eb * ub,
                0.0,
                0.0,
                0.0,
            ])
        }
    }
}

/// Positive-a counterpart with unit blow-up weights; the time rescaling divides by -w2.
pub fn blowup_field_pos_a(bp: BlowupPoint, p: &Params, stage: Stage) -> Result<[f64; 7]> {
    if p.a <= 0.0 {
        return Err(Error::InvalidParams(format!("a = {} is not positive", p.a)));
    }
    let BlowupPoint { r, rho_bar0: rb0, u_bar0: ub, eps_bar: eb, w1, w2, xi } = bp;
    match stage {
        Stage::Raw => {
            if !(r > 0.0 && rb0 > 0.0 && eb > 0.0) {
                return Err(Error::Desingularization(r.min(rb0).min(eb)));
            }
            let h = r * ub * w1 - w2;
            let phi = 1.0 - (p.a * (rb0 / (eb * p.rho_bar)).ln()).exp();
            let dr = ub * h * eb / rb0 + rb0 * rb0 * ub * r * r * phi - xi * r * rb0 * rb0 - rb0 * r * eb * w1;
            let drb = -ub * h * eb / r - rb0.powi(3) * ub * r * phi
                + xi * rb0.powi(3)
                + rb0 * rb0 * eb * w1
                + rb0 * ub * r * phi
                - xi * rb0
                - eb * w1;
            let dub = -ub * ub * h * eb / (rb0 * r) - rb0 * rb0 * ub * ub * r * phi
                + xi * rb0 * rb0 * ub
                + rb0 * ub * eb * w1
                + h * eb / (rb0 * r);
            let deb = -ub * h * eb * eb / (rb0 * r) - rb0 * rb0 * ub * r * eb * phi
                + xi * eb * rb0 * rb0
                + rb0 * eb * eb * w1;
            Ok([dr, drb, dub, deb, -r * rb0, -r * r * ub * rb0, r * eb])
        }
        Stage::Desingularized | Stage::TimeRescaled => {
            let h = -w2;
            let scale = if stage == Stage::TimeRescaled {
                if !(w2 < 0.0) {
                    return Err(Error::Desingularization(w2));
                }
                -1.0 / w2
            } else {
                1.0
            };
            Ok([
                scale * ub * h * r,
                -scale * ub * h * rb0,
                scale * h * (1.0 - ub * ub),
                -scale * ub * h * eb,
                0.0,
                0.0,
                0.0,
            ])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPoint {
    NegAPlus1,
    NegAMinus1,
    PosAPlus1,
    PosAMinus1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub which: FixedPoint,
    pub point: BlowupPoint,
    /// Diagonal of the numerical Jacobian, one entry per direction tag.
    pub eigenvalues: Vec<f64>,
    pub directions: Vec<String>,
    /// Real parts of the full spectrum, ascending.
    pub spectrum: Vec<f64>,
    pub expected: Vec<f64>,
    pub max_error: f64,
}

pub const SPECTRUM_TOL: f64 = 1e-6;

pub fn fixed_point_spectrum(which: FixedPoint, p: &Params) -> Result<SpectrumReport> {
    let (ub, neg) = match which {
        FixedPoint::NegAPlus1 => (1.0, true),
        FixedPoint::NegAMinus1 => (-1.0, true),
        FixedPoint::PosAPlus1 => (1.0, false),
        FixedPoint::PosAMinus1 => (-1.0, false),
    };
    // each chart belongs to one sign of a; the leading-order field does not depend on |a|
    let chart = Params { rho_bar: p.rho_bar, a: if neg { -p.a.abs() } else { p.a.abs() } };
    let p = &chart;
    // slow variables only enter through the (negative) divisor
    let point = BlowupPoint { r: 0.0, rho_bar0: 0.0, u_bar0: ub, eps_bar: 0.0, w1: 0.0, w2: 1.0, xi: 0.0 };
    let point = if neg { point } else { BlowupPoint { w2: -1.0, ..point } };
    let field = |x: [f64; 4]| -> Result<[f64; 4]> {
        let bp = BlowupPoint { r: x[3], rho_bar0: x[0], u_bar0: x[1], eps_bar: x[2], ..point };
        let d = if neg {
            blowup_field_neg_a(bp, p, Stage::TimeRescaled)?
        } else {
            blowup_field_pos_a(bp, p, Stage::TimeRescaled)?
        };
        Ok([d[1], d[2], d[3], d[0]])
    };
    let x0 = [0.0, ub, 0.0, 0.0];
    let h = 1e-6;
    let mut jac = DMatrix::<f64>::zeros(4, 4);
    for j in 0..4 {
        let mut xp = x0;
        let mut xm = x0;
        xp[j] += h;
        xm[j] -= h;
        let fp = field(xp)?;
        let fm = field(xm)?;
        for i in 0..4 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let dims = if neg { 4 } else { 3 };
    let sub = jac.view((0, 0), (dims, dims)).into_owned();
    let mut spectrum: Vec<f64> = sub.complex_eigenvalues().iter().map(|z| z.re).collect();
    spectrum.sort_by(f64::total_cmp);
    let tags = ["rho_bar0", "u_bar0", "eps_bar", "r"];
    let eigenvalues: Vec<f64> = (0..dims).map(|i| sub[(i, i)]).collect();
    let expected: Vec<f64> = if neg { vec![ub, 2.0 * ub, ub, -ub] } else { vec![-ub, -2.0 * ub, -ub] };
    let mut exp_sorted = expected.clone();
    exp_sorted.sort_by(f64::total_cmp);
    let max_error = spectrum.iter().zip(&exp_sorted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let report = SpectrumReport {
        which,
        point,
        eigenvalues,
        directions: tags[..dims].iter().map(|s| s.to_string()).collect(),
        spectrum: spectrum.clone(),
        expected,
        max_error,
    };
    if max_error > SPECTRUM_TOL {
        return Err(Error::SpectrumMismatch { expected: exp_sorted, found: spectrum });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroclinicOrbit {
    /// (tau, rho_bar0, u_bar0, eps_bar) samples.
    pub samples: Vec<[f64; 4]>,
    pub start_u: f64,
    pub end_u: f64,
    /// Largest deviation from the unit sphere seen before each projection.
    pub max_sphere_error: f64,
    pub projections: usize,
    pub monotone: bool,
    /// Distance of the closest sample to the equatorial point (1, 0, 0).
    pub equator_distance: f64,
}

/// Integrates the time-rescaled sphere flow at r = 0 from the unstable pole to the stable one.
pub fn heteroclinic_on_sphere(p: &Params) -> Result<HeteroclinicOrbit> {
    let neg = p.a < 0.0;
    let (start, target) = if neg { (1.0, -1.0) } else { (-1.0, 1.0) };
    let base = BlowupPoint { r: 0.0, rho_bar0: 0.0, u_bar0: start, eps_bar: 0.0, w1: 0.0, w2: 1.0, xi: 0.0 };
    let base = if neg { base } else { BlowupPoint { w2: -1.0, ..base } };
    let d0: f64 = 1e-6;
    let y0 = [d0, start * (1.0 - d0 * d0).sqrt(), 0.0];
    let f = |y: &[f64; 3]| -> Result<[f64; 3]> {
        let bp = BlowupPoint { rho_bar0: y[0], u_bar0: y[1], eps_bar: y[2], ..base };
        let d = if neg {
            blowup_field_neg_a(bp, p, Stage::TimeRescaled)?
        } else {
            blowup_field_pos_a(bp, p, Stage::TimeRescaled)?
        };
        Ok([d[1], d[2], d[3]])
    };
    let mut samples = vec![[0.0, y0[0], y0[1], y0[2]]];
    let mut max_err = 0.0f64;
    let mut projections = 0usize;
    let mut monotone = true;
    let mut last_u = y0[1];
    let mut reached = false;
    let opts = OdeOptions { h_max: 0.05, ..OdeOptions::default() };
    integrate(f, 0.0, y0, 200.0, &opts, |t, y| {
        let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        max_err = max_err.max((n - 1.0).abs());
        if n != 1.0 {
            for v in y.iter_mut() {
                *v /= n;
            }
            projections += 1;
        }
        if (y[1] - last_u) * (target - start) < 0.0 {
            monotone = false;
        }
        last_u = y[1];
        samples.push([t, y[0], y[1], y[2]]);
        let dist = (y[0] * y[0] + (y[1] - target).powi(2) + y[2] * y[2]).sqrt();
        if dist < 1e-6 {
            reached = true;
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if !reached {
        return Err(Error::HeteroclinicNotFound(format!("orbit ended at u_bar0 = {last_u}")));
    }
    let equator_distance = samples
        .iter()
        .map(|s| ((s[1] - 1.0).powi(2) + s[2].powi(2) + s[3].powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    Ok(HeteroclinicOrbit {
        start_u: samples[0][2],
        end_u: last_u,
        samples,
        max_sphere_error: max_err,
        projections,
        monotone,
        equator_distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViscousProfile {
    pub eps: f64,
    pub xi: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub peak_rho: f64,
    pub peak_xi: f64,
    /// Integral of rho minus the piecewise-constant background split at the peak.
    pub excess_mass: f64,
    /// Largest |U - U_L| (resp. U_R) over the outer quarter of the domain on each side.
    pub plateau_error_left: f64,
    pub plateau_error_right: f64,
    /// Largest value of xi w1 - w2 along the profile.
    pub max_inner_sign: f64,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub n_nodes: usize,
    /// Continuation ratio between consecutive eps values.
    pub ratio: f64,
    pub eps_start: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { n_nodes: 3001, ratio: 0.7, eps_start: 0.1, newton_tol: 1e-11, max_newton: 100 }
    }
}

/// Viscous profile of the overcompressive pair (l, r) at `eps`, by eps-continuation from `eps_start`.
pub fn viscous_profile(l: State, r: State, p: &Params, eps: f64) -> Result<ViscousProfile> {
    let fam = viscous_family(l, r, p, &[eps], &ProfileOptions::default())?;
    Ok(fam.into_iter().next().expect("one profile"))
}

/// Profiles at every requested eps (descending order is used internally), warm-started along the path.
pub fn viscous_family(
    l: State,
    r: State,
    p: &Params,
    eps_list: &[f64],
    opts: &ProfileOptions,
) -> Result<Vec<ViscousProfile>> {
    if eps_list.iter().any(|&e| !(e > 0.0 && e <= 0.1)) {
        return Err(Error::Config("eps must lie in (0, 0.1]".into()));
    }
    let d =
        delta::delta_shock(l, r, p).map_err(|e| Error::ProfileNotFound(format!("pair is not a delta shock: {e}")))?;
    let mut targets: Vec<f64> = eps_list.to_vec();
    targets.sort_by(|a, b| b.total_cmp(a));
    let e_min = *targets.last().expect("nonempty");
    let record = |eps: f64, prof: ViscousProfile, out: &mut Vec<ViscousProfile>| {
        if targets.iter().any(|&t| (t - eps).abs() <= 1e-12 * t) {
            out.push(prof);
        }
    };
    let mut out = Vec::new();
    let eps0 = opts.eps_start.max(targets[0]);
    let xi = profile_grid(d.speed, eps0, opts.n_nodes);
    let (mut rho, mut m) = initial_guess(&xi, l, r, &d, eps0);
    let iters = newton_solve(&xi, &mut rho, &mut m, l, r, p, eps0, opts)?;
    let prof = diagnostics(&xi, &rho, &m, l, r, p, eps0, iters)?;
    let mut peak = prof.peak_xi;
    record(eps0, prof, &mut out);
    let mut state = (xi, rho, m, eps0);
    let mut ratio = opts.ratio;
    while state.3 > e_min * (1.0 + 1e-12) {
        let cur = state.3;
        let next = cur * ratio;
        // snap onto requested values
        let eps = targets.iter().copied().find(|&t| t < cur * (1.0 - 1e-12) && t >= next).unwrap_or(next.max(e_min));
        let xi = profile_grid(peak, eps, opts.n_nodes);
        let (mut rho, mut m) = warm_start(&xi, &state.0, &state.1, &state.2);
        match newton_solve(&xi, &mut rho, &mut m, l, r, p, eps, opts) {
            Ok(iters) => {
                let prof = diagnostics(&xi, &rho, &m, l, r, p, eps, iters)?;
                peak = prof.peak_xi;
                record(eps, prof, &mut out);
                state = (xi, rho, m, eps);
                ratio = (ratio / 0.95).min(opts.ratio);
            }
            Err(e) => {
                ratio = ratio.sqrt();
                if ratio > 0.995 {
                    return Err(e);
                }
            }
        }
    }
    out.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    // return in the caller's order
    let mut ordered = Vec::new();
    for e in eps_list {
        let k = out.iter().position(|pr| (pr.eps - e).abs() <= 1e-12 * e).expect("computed");
        ordered.push(out[k].clone());
    }
    Ok(ordered)
}

/// sinh-stretched grid with spacing about eps/30 at `center`.
fn profile_grid(center: f64, eps: f64, n: usize) -> Vec<f64> {
    let half = 1.0 + 60.0 * eps;
    let target = eps / 30.0;
    let uniform = 2.0 * half / (n - 1) as f64;
    let beta = if uniform <= target {
        1e-8
    } else {
        // solve half * beta / sinh(beta) * 2/(n-1) = target
        let ratio = target / uniform;
        let mut lo: f64 = 1e-8;
        let mut hi = 50.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid / mid.sinh() > ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (0..n)
        .map(|i| {
            let eta = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            center + half * (beta * eta).sinh() / beta.sinh()
        })
        .collect()
}

fn initial_guess(xi: &[f64], l: State, r: State, d: &delta::DeltaShock, eps: f64) -> (Vec<f64>, Vec<f64>) {
    let sigma = 2.0 * eps;
    let amp = d.weight_rate / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let mut rho = Vec::with_capacity(xi.len());
    let mut m = Vec::with_capacity(xi.len());
    for &x in xi {
        let z = (x - d.speed) / eps;
        let hth = 0.5 * (1.0 + z.tanh());
        let bump = amp * (-0.5 * ((x - d.speed) / sigma).powi(2)).exp();
        let base = l.rho * (1.0 - hth) + r.rho * hth;
        let ub = l.u * (1.0 - hth) + r.u * hth;
        rho.push(base + bump);
        m.push(base * ub + bump * d.speed);
    }
    (rho, m)
}

/// Linear interpolation of the previous profile onto the new grid.
fn warm_start(xi: &[f64], xo: &[f64], ro: &[f64], mo: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let interp = |v: &[f64], x: f64| -> f64 {
        if x <= xo[0] {
            return v[0];
        }
        if x >= xo[xo.len() - 1] {
            return v[v.len() - 1];
        }
        let j = xo.partition_point(|&t| t <= x).max(1);
        let w = (x - xo[j - 1]) / (xo[j] - xo[j - 1]);
        v[j - 1] * (1.0 - w) + v[j] * w
    };
    (xi.iter().map(|&x| interp(ro, x)).collect(), xi.iter().map(|&x| interp(mo, x)).collect())
}

fn residual(xi: &[f64], rho: &[f64], m: &[f64], p: &Params, eps: f64) -> Result<Vec<[f64; 2]>> {
    let n = xi.len();
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        f.push(flux(State::new(rho[i], m[i] / rho[i]), p)?);
    }
    let mut res = vec![[0.0; 2]; n];
    for i in 1..n - 1 {
        let hm = xi[i] - xi[i - 1];
        let hp = xi[i + 1] - xi[i];
        let hb = 0.5 * (hm + hp);
        let u = [rho, m];
        for c in 0..2 {
            let d2 = ((u[c][i + 1] - u[c][i]) / hp - (u[c][i] - u[c][i - 1]) / hm) / hb;
            let df = (f[i + 1][c] - f[i - 1][c]) / (2.0 * hb);
            let du = (u[c][i + 1] - u[c][i - 1]) / (2.0 * hb);
            res[i][c] = eps * d2 - df + xi[i] * du;
        }
    }
    Ok(res)
}

#[allow(clippy::too_many_arguments)]
fn newton_solve(
    xi: &[f64],
    rho: &mut [f64],
    m: &mut [f64],
    l: State,
    r: State,
    p: &Params,
    eps: f64,
    opts: &ProfileOptions,
) -> Result<usize> {
    let n = xi.len();
    rho[0] = l.rho;
    m[0] = l.m();
    rho[n - 1] = r.rho;
    m[n - 1] = r.m();
    let norm = |res: &[[f64; 2]]| res.iter().map(|v| v[0].abs().max(v[1].abs())).fold(0.0, f64::max);
    let mut res = residual(xi, rho, m, p, eps)?;
    let mut rn = norm(&res);
    for it in 1..=opts.max_newton {
        // block tridiagonal Jacobian in the interior unknowns 1..n-2
        let mut a_blk = vec![Matrix2::zeros(); n];
        let mut b_blk = vec![Matrix2::zeros(); n];
        let mut c_blk = vec![Matrix2::zeros(); n];
        let mut jac = Vec::with_capacity(n);
        for i in 0..n {
            jac.push(jacobian(State::new(rho[i], m[i] / rho[i]), p)?);
        }
        let id = Matrix2::identity();
        for i in 1..n - 1 {
            let hm = xi[i] - xi[i - 1];
            let hp = xi[i + 1] - xi[i];
            let hb = 0.5 * (hm + hp);
            a_blk[i] = id * (eps / (hm * hb)) + (jac[i - 1] - id * xi[i]) / (2.0 * hb);
            b_blk[i] = -id * (eps * (1.0 / hp + 1.0 / hm) / hb);
            c_blk[i] = id * (eps / (hp * hb)) - (jac[i + 1] - id * xi[i]) / (2.0 * hb);
        }
        let rhs: Vec<Vector2<f64>> = res.iter().map(|v| Vector2::new(-v[0], -v[1])).collect();
        let delta = block_thomas(&a_blk, &b_blk, &c_blk, &rhs, 1, n - 2)?;
        // damping keeps the density positive and the residual decreasing
        let mut lam = 1.0f64;
        for i in 1..n - 1 {
            if delta[i][0] < 0.0 {
                lam = lam.min(0.5 * rho[i] / -delta[i][0]);
            }
        }
        let max_step = delta.iter().zip(rho.iter()).map(|(d, &rv)| d[0].abs() / rv.max(1.0)).fold(0.0, f64::max);
        loop {
            let tr: Vec<f64> = (0..n).map(|i| rho[i] + lam * delta[i][0]).collect();
            let tm: Vec<f64> = (0..n).map(|i| m[i] + lam * delta[i][1]).collect();
            if let Ok(tres) = residual(xi, &tr, &tm, p, eps) {
                let tn = norm(&tres);
                if tn.is_finite() && (tn < rn || lam < 1e-3) {
                    rho.copy_from_slice(&tr);
                    m.copy_from_slice(&tm);
                    res = tres;
                    rn = tn;
                    break;
                }
            }
            lam *= 0.5;
            if lam < 1e-6 {
                return Err(Error::ProfileNotFound(format!("line search failed at eps = {eps}, residual {rn:e}")));
            }
        }
        if max_step * lam < opts.newton_tol || max_step < 1e3 * opts.newton_tol {
            return Ok(it);
        }
    }
    Err(Error::ProfileNotFound(format!("Newton did not converge at eps = {eps}, residual {rn:e}")))
}

fn block_thomas(
    a: &[Matrix2<f64>],
    b: &[Matrix2<f64>],
    c: &[Matrix2<f64>],
    d: &[Vector2<f64>],
    lo: usize,
    hi: usize,
) -> Result<Vec<Vector2<f64>>> {
    let n = a.len();
    let mut cp = vec![Matrix2::zeros(); n];
    let mut dp = vec![Vector2::zeros(); n];
    for i in lo..=hi {
        let (den, rhs) = if i == lo { (b[i], d[i]) } else { (b[i] - a[i] * cp[i - 1], d[i] - a[i] * dp[i - 1]) };
        let inv = den.try_inverse().ok_or_else(|| Error::ProfileNotFound(format!("singular block at node {i}")))?;
        cp[i] = inv * c[i];
        dp[i] = inv * rhs;
    }
    let mut x = vec![Vector2::zeros(); n];
    x[hi] = dp[hi];
    for i in (lo..hi).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

#[allow(clippy::too_many_arguments)]
fn diagnostics(
    xi: &[f64],
    rho: &[f64],
    m: &[f64],
    l: State,
    r: State,
    p: &Params,
    eps: f64,
    iters: usize,
) -> Result<ViscousProfile> {
    let n = xi.len();
    let (ip, &peak_rho) = rho.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
    let peak_xi = xi[ip];
    let mut excess = 0.0;
    for i in 0..n - 1 {
        let xm = 0.5 * (xi[i] + xi[i + 1]);
        let bg = if xm < peak_xi { l.rho } else { r.rho };
        excess += (0.5 * (rho[i] + rho[i + 1]) - bg) * (xi[i + 1] - xi[i]);
    }
    let mut w1 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    let mut max_sign = f64::NEG_INFINITY;
    for i in 0..n {
        let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
        let h = xi[b] - xi[a];
        let v = [eps * (rho[b] - rho[a]) / h, eps * (m[b] - m[a]) / h];
        let w = w_from_v(rho[i], m[i], v, xi[i], p)?;
        max_sign = max_sign.max(xi[i] * w[0] - w[1]);
        w1.push(w[0]);
        w2.push(w[1]);
    }
    let quarter = n / 4;
    let plateau_error_left = (0..quarter).map(|i| (rho[i] - l.rho).abs().max((m[i] - l.m()).abs())).fold(0.0, f64::max);
    let plateau_error_right =
        (n - quarter..n).map(|i| (rho[i] - r.rho).abs().max((m[i] - r.m()).abs())).fold(0.0, f64::max);
    Ok(ViscousProfile {
        eps,
        xi: xi.to_vec(),
        u: rho.iter().zip(m).map(|(r, m)| m / r).collect(),
        rho: rho.to_vec(),
        w1,
        w2,
        peak_rho,
        peak_xi,
        excess_mass: excess,
        plateau_error_left,
        plateau_error_right,
        max_inner_sign: max_sign,
        newton_iterations: iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64) -> Params {
        Params::new(5.0, a).unwrap()
    }

    #[test]
    fn slow_manifold_is_stationary() {
        let pp = p(-1.5);
        let s = State::new(3.0, 3.0);
        let xi = -2.0;
        let [w1, w2] = w_state(s, xi, &pp).unwrap();
        let d = fast_field(FastPoint { rho: 3.0, u: 3.0, w1, w2, xi, eps: 0.0 }, &pp).unwrap();
        assert!(d[0].abs() < 1e-13 && d[1].abs() < 1e-13);
        assert!(fast_field(FastPoint { rho: 0.0, u: 3.0, w1, w2, xi, eps: 0.0 }, &pp).is_err());
    }

    #[test]
    fn desingularized_limit_of_raw() {
        let pp = p(-1.5);
        let (rb, eb) = (0.6f64, 0.3f64);
        let ub = (1.0 - rb * rb - eb * eb).sqrt();
        for r in [1e-6, 1e-7] {
            let bp = BlowupPoint { r, rho_bar0: rb, u_bar0: ub, eps_bar: eb, w1: 0.7, w2: 2.0, xi: -1.2 };
            let raw = blowup_field_neg_a(bp, &pp, Stage::Raw).unwrap();
            let des = blowup_field_neg_a(bp, &pp, Stage::Desingularized).unwrap();
            let k = r * rb / eb;
            for i in 1..4 {
                assert!((raw[i] * k - des[i]).abs() < 100.0 * r, "{i}: {} vs {}", raw[i] * k, des[i]);
            }
            assert!((raw[0] * k - des[0]).abs() < 100.0 * r * r);
        }
    }

    #[test]
    fn desingularized_limit_of_raw_pos_a() {
        let pp = p(0.5);
        let (rb, eb) = (0.6f64, 0.3f64);
        let ub = -(1.0 - rb * rb - eb * eb).sqrt();
        let r = 1e-7;
        let bp = BlowupPoint { r, rho_bar0: rb, u_bar0: ub, eps_bar: eb, w1: 0.7, w2: -2.0, xi: -1.2 };
        let raw = blowup_field_pos_a(bp, &pp, Stage::Raw).unwrap();
        let des = blowup_field_pos_a(bp, &pp, Stage::Desingularized).unwrap();
        let k = r * rb / eb;
        for i in 1..4 {
            assert!((raw[i] * k - des[i]).abs() < 100.0 * r);
        }
    }

    #[test]
    fn fixed_points_and_equator_flow() {
        let pp = p(-1.5);
        for ub in [1.0, -1.0] {
            let bp = BlowupPoint { r: 0.0, rho_bar0: 0.0, u_bar0: ub, eps_bar: 0.0, w1: 0.0, w2: 1.0, xi: 0.0 };
            let d = blowup_field_neg_a(bp, &pp, Stage::TimeRescaled).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-15));
        }
        let ub = 0.3f64;
        let bp = BlowupPoint {
            r: 0.0,
            rho_bar0: (1.0 - ub * ub).sqrt(),
            u_bar0: ub,
            eps_bar: 0.0,
            w1: 0.0,
            w2: 1.0,
            xi: 0.0,
        };
        let d = blowup_field_neg_a(bp, &pp, Stage::TimeRescaled).unwrap();
        assert!((d[2] + (1.0 - ub * ub)).abs() < 1e-15);
        let bad = BlowupPoint { w2: -1.0, ..bp };
        assert!(matches!(blowup_field_neg_a(bad, &pp, Stage::TimeRescaled), Err(Error::Desingularization(_))));
    }

    #[test]
    fn spectra() {
        let r = fixed_point_spectrum(FixedPoint::NegAPlus1, &p(-1.5)).unwrap();
        assert_eq!(r.eigenvalues.len(), 4);
        assert!((r.eigenvalues[3] + 1.0).abs() < 1e-8);
        let r = fixed_point_spectrum(FixedPoint::PosAMinus1, &p(0.5)).unwrap();
        assert!(r.max_error < 1e-8);
        assert!(fixed_point_spectrum(FixedPoint::PosAPlus1, &p(-0.5)).is_ok());
    }

    #[test]
    fn orbit_negative_a() {
        let o = heteroclinic_on_sphere(&p(-1.5)).unwrap();
        assert!(o.monotone && o.end_u < -0.999);
        assert!(o.max_sphere_error < 1e-8);
        assert!(o.equator_distance < 1e-2);
    }

    #[test]
    fn grid_is_refined_near_center() {
        let g = profile_grid(-4.6, 1e-3, 3001);
        let k = g.partition_point(|&x| x < -4.6);
        assert!(g[k] - g[k - 1] < 1e-3 / 25.0);
        assert!((g[0] - (-4.6 - 1.06)).abs() < 1e-12);
    }
}
