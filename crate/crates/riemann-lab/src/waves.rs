//! Hugoniot loci, a-shocks, a-rarefactions and contact branches through a left state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{flux, lambda_0, lambda_a, Params, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockA {
    pub left: State,
    pub right: State,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RarefactionA {
    pub left: State,
    pub right: State,
    pub xi_lo: f64,
    pub xi_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact0 {
    pub left: State,
    pub right: State,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactA {
    pub left: State,
    pub right: State,
    pub speed: f64,
}

/// Side of the left state, along u = u_L, on which a wave type lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Any a-family wave joining two states on the same line u = const.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AWave {
    Shock(ShockA),
    Rarefaction(RarefactionA),
    Contact(ContactA),
}

/// (s[rho] - [f1], s[rho u] - [f2]) with [.] = left - right.
pub fn rh_residual(l: State, r: State, s: f64, p: &Params) -> Result<[f64; 2]> {
    let fl = flux(l, p)?;
    let fr = flux(r, p)?;
    Ok([s * (l.rho - r.rho) - (fl[0] - fr[0]), s * (l.m() - r.m()) - (fl[1] - fr[1])])
}

pub fn shock_speed_a(rho_l: f64, rho_r: f64, u: f64, p: &Params) -> Result<f64> {
    if rho_l == rho_r {
        return Err(Error::CoincidentStates { rho: rho_l });
    }
    let gl = p.rho_q(rho_l)?;
    let gr = p.rho_q(rho_r)?;
    Ok(u * (1.0 - (gl - gr) / (rho_l - rho_r)))
}

/// Side on which admissible a-shocks lie; rarefactions lie on the other side.
pub fn shock_side(a: f64, u: f64) -> Result<Side> {
    if u == 0.0 {
        return Err(Error::FullDegeneracy);
    }
    if (a + 1.0).abs() <= 1e-12 {
        return Err(Error::NoRarefaction);
    }
    // lambda_a increases with rho iff u a (a+1) < 0; shocks need lambda_a(r) < lambda_a(l)
    Ok(if u * a * (a + 1.0) < 0.0 { Side::Left } else { Side::Right })
}

pub fn rarefaction_side(a: f64, u: f64) -> Result<Side> {
    Ok(match shock_side(a, u)? {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    })
}

pub fn lax_admissible_a(l: State, r: State, p: &Params) -> Result<bool> {
    if l.u != r.u {
        return Err(Error::OffCurve { u_l: l.u, u_r: r.u });
    }
    if l.u == 0.0 {
        return Err(Error::FullDegeneracy);
    }
    if l.rho == r.rho {
        return Ok(false);
    }
    let s = shock_speed_a(l.rho, r.rho, l.u, p)?;
    Ok(lambda_a(r, p) < s && s < lambda_a(l, p))
}

pub fn rarefaction_state(u_l: f64, xi: f64, p: &Params) -> Result<State> {
    if p.a_is_minus_one() {
        return Err(Error::NoRarefaction);
    }
    let arg = (u_l - xi) / ((p.a + 1.0) * u_l);
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::OutsideFan { u_l, xi });
    }
    Ok(State::new(p.rho_bar * (arg.ln() / p.a).exp(), u_l))
}

/// Classifies the a-wave from `l` to `r` (same velocity) as shock, rarefaction or a-contact.
pub fn a_wave(l: State, r: State, p: &Params) -> Result<AWave> {
    if l.u != r.u {
        return Err(Error::OffCurve { u_l: l.u, u_r: r.u });
    }
    if l.u == 0.0 {
        return Err(Error::FullDegeneracy);
    }
    if l.rho == r.rho {
        return Err(Error::CoincidentStates { rho: l.rho });
    }
    if p.a_is_minus_one() {
        return Ok(AWave::Contact(ContactA { left: l, right: r, speed: l.u }));
    }
    let (ll, lr) = (lambda_a(l, p), lambda_a(r, p));
    if lr > ll {
        return Ok(AWave::Rarefaction(RarefactionA { left: l, right: r, xi_lo: ll, xi_hi: lr }));
    }
    let s = shock_speed_a(l.rho, r.rho, l.u, p)?;
    if lr < s && s < ll {
        Ok(AWave::Shock(ShockA { left: l, right: r, speed: s }))
    } else {
        Err(Error::NoIntersection(format!("a-wave from rho = {} to {} is neither Lax shock nor fan", l.rho, r.rho)))
    }
}

impl AWave {
    pub fn left(&self) -> State {
        match self {
            AWave::Shock(w) => w.left,
            AWave::Rarefaction(w) => w.left,
            AWave::Contact(w) => w.left,
        }
    }

    pub fn right(&self) -> State {
        match self {
            AWave::Shock(w) => w.right,
            AWave::Rarefaction(w) => w.right,
            AWave::Contact(w) => w.right,
        }
    }

    /// Slowest and fastest speed carried by the wave.
    pub fn speed_range(&self) -> (f64, f64) {
        match self {
            AWave::Shock(w) => (w.speed, w.speed),
            AWave::Rarefaction(w) => (w.xi_lo, w.xi_hi),
            AWave::Contact(w) => (w.speed, w.speed),
        }
    }
}

/// Velocity on the 0-contact through `l` at density `rho`.
pub fn contact0_curve(l: State, rho: f64, p: &Params) -> Result<f64> {
    if p.on_critical(l.rho) {
        return Err(Error::VerticalBranch);
    }
    if p.on_critical(rho) {
        return Err(Error::Pole { rho_bar: p.rho_bar });
    }
    Ok(lambda_0(l, p) / p.phi(rho))
}

/// Closed-form evaluator u = c / (1 - (rho/rho_bar)^a) on a density interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactBranch {
    /// lambda_0 carried by the branch.
    pub level: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
}

impl ContactBranch {
    pub fn eval(&self, rho: f64, p: &Params) -> f64 {
        self.level / p.phi(rho)
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho > self.rho_lo && rho < self.rho_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactBranches {
    pub main: ContactBranch,
    pub mirror: ContactBranch,
    /// 0-contact whose velocity tends to u_L where (rho/rho_bar)^a -> 0.
    pub limit: ContactBranch,
    pub asymptote: f64,
}

pub fn contact0_branches(l: State, p: &Params) -> Result<ContactBranches> {
    if p.on_critical(l.rho) {
        return Err(Error::VerticalBranch);
    }
    let level = lambda_0(l, p);
    let below = ContactBranch { level, rho_lo: 0.0, rho_hi: p.rho_bar };
    let above = ContactBranch { level, rho_lo: p.rho_bar, rho_hi: f64::INFINITY };
    let (main, mirror) = if l.rho < p.rho_bar { (below, above) } else { (above, below) };
    // the limit branch lives where phi > 0: above rho_bar for a < 0, below for a > 0
    let limit = if p.a < 0.0 { ContactBranch { level: l.u, ..above } } else { ContactBranch { level: l.u, ..below } };
    Ok(ContactBranches { main, mirror, limit, asymptote: level })
}

pub fn contact0_vertical(l: State, u_r: f64, p: &Params) -> Result<Contact0> {
    if !p.on_critical(l.rho) {
        return Err(Error::NotOnCriticalLine { rho: l.rho, rho_bar: p.rho_bar });
    }
    Ok(Contact0 { left: l, right: State::new(l.rho, u_r), speed: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64) -> Params {
        Params::new(5.0, a).unwrap()
    }

    #[test]
    fn rh_zero_jump() {
        let s = State::new(3.0, 2.0);
        assert_eq!(rh_residual(s, s, 1.7, &p(-1.5)).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn a_shock_satisfies_rh() {
        let pp = p(-1.5);
        let (l, r) = (State::new(3.0, -4.0), State::new(1.0, -4.0));
        let s = shock_speed_a(3.0, 1.0, -4.0, &pp).unwrap();
        let res = rh_residual(l, r, s, &pp).unwrap();
        assert!(res[0].abs() < 1e-10 && res[1].abs() < 1e-10);
        // independent algebraic form: u (1 - (rho_l^(a+1) - rho^(a+1)) / ((rho_l - rho) rho_bar^a))
        let oracle = -4.0 * (1.0 - (3f64.powf(-0.5) - 1.0) / (2.0 * 5f64.powf(-1.5)));
        assert!((s - oracle).abs() < 1e-12);
    }

    #[test]
    fn delta_pair_violates_rh() {
        let res = rh_residual(State::new(3.0, 3.0), State::new(9.0, -9.0), -4.61, &p(-1.5)).unwrap();
        assert!(res[0].abs() > 1.0 && res[1].abs() > 1.0);
    }

    #[test]
    fn shock_speed_special_values() {
        assert_eq!(shock_speed_a(2.0, 7.0, 3.25, &p(-1.0)).unwrap(), 3.25);
        assert_eq!(shock_speed_a(2.0, 7.0, 0.0, &p(-1.5)).unwrap(), 0.0);
        assert!(shock_speed_a(2.0, 2.0, 1.0, &p(-1.5)).is_err());
    }

    #[test]
    fn lax_examples() {
        assert!(lax_admissible_a(State::new(3.0, -4.0), State::new(1.0, -4.0), &p(-1.5)).unwrap());
        assert!(!lax_admissible_a(State::new(3.0, -4.0), State::new(8.0, -4.0), &p(-1.5)).unwrap());
        assert!(lax_admissible_a(State::new(3.0, 4.0), State::new(8.0, 4.0), &p(0.5)).unwrap());
        assert!(lax_admissible_a(State::new(3.0, 4.0), State::new(8.0, 3.0), &p(0.5)).is_err());
    }

    #[test]
    fn fan_edges() {
        let pp = p(-1.5);
        let l = State::new(3.0, -4.0);
        let s = rarefaction_state(-4.0, lambda_a(l, &pp), &pp).unwrap();
        assert!((s.rho - 3.0).abs() < 1e-12);
        assert!(rarefaction_state(-4.0, 1.0, &p(-1.0)).is_err());
        // (u - xi)/((a+1)u) must be positive
        assert!(rarefaction_state(-4.0, -4.0, &pp).is_err());
    }

    #[test]
    fn contact_curve_limits() {
        let pp = p(-1.5);
        let l = State::new(3.0, -4.0);
        assert!((contact0_curve(l, 3.0, &pp).unwrap() + 4.0).abs() < 1e-12);
        assert!(contact0_curve(l, 1e-9, &pp).unwrap().abs() < 1e-9);
        let pp = p(0.5);
        assert!(contact0_curve(l, 1e12, &pp).unwrap().abs() < 1e-4);
        assert!(contact0_curve(State::new(5.0, 1.0), 2.0, &pp).is_err());
        assert!(contact0_curve(l, 5.0, &pp).is_err());
    }

    #[test]
    fn branches() {
        let pp = p(-1.5);
        let l = State::new(3.0, -4.0);
        let b = contact0_branches(l, &pp).unwrap();
        assert!((b.main.eval(3.0, &pp) + 4.0).abs() < 1e-12);
        assert!(b.mirror.rho_lo == 5.0 && b.mirror.rho_hi.is_infinite());
        assert_eq!(b.asymptote, lambda_0(l, &pp));
        // the limit branch tends to u_L where (rho/rho_bar)^a vanishes
        assert!((b.limit.eval(1e9, &pp) + 4.0).abs() < 1e-9);
        let pa = p(0.5);
        let b = contact0_branches(l, &pa).unwrap();
        assert!((b.main.eval(1e-12, &pa) - b.asymptote).abs() < 1e-5);
    }

    #[test]
    fn vertical_contact() {
        let pp = p(-1.5);
        let c = contact0_vertical(State::new(5.0, 3.0), -9.0, &pp).unwrap();
        assert_eq!(c.speed, 0.0);
        assert_eq!(c.right, State::new(5.0, -9.0));
        assert!(contact0_vertical(State::new(4.0, 3.0), -9.0, &pp).is_err());
    }
}
