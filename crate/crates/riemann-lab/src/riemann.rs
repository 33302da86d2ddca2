//! Case and region classification, wave-sequence construction and self-similar evaluation.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delta::{self, DeltaShock};
use crate::error::{Error, Result};
use crate::model::{eigenvalues, lambda_0, lambda_a, Params, State};
use crate::roots;
use crate::waves::{self, a_wave, AWave, Contact0, ContactA, RarefactionA, ShockA, Side};

/// Slack allowed when comparing wave speeds and curve residuals.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CaseId(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionKind {
    #[serde(rename = "I_a")]
    Ia,
    #[serde(rename = "I_0")]
    I0,
    #[serde(rename = "II_a")]
    IIa,
    #[serde(rename = "II_0")]
    II0,
    #[serde(rename = "III_a")]
    IIIa,
    #[serde(rename = "III_0")]
    III0,
    IV,
    #[serde(rename = "IV_delta")]
    IVDelta,
    V,
    VI,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VSequence {
    C0VC0,
    C0VRaC0,
    RaVC0,
    C0VSaC0,
    SaVC0,
    CaVC0,
    C0VCaC0,
    C0VRa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegionLabel {
    pub kind: RegionKind,
    pub v_sequence: Option<VSequence>,
}

impl RegionLabel {
    fn plain(kind: RegionKind) -> Self {
        RegionLabel { kind, v_sequence: None }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionKind::Ia => "I_a",
            RegionKind::I0 => "I_0",
            RegionKind::IIa => "II_a",
            RegionKind::II0 => "II_0",
            RegionKind::IIIa => "III_a",
            RegionKind::III0 => "III_0",
            RegionKind::IV => "IV",
            RegionKind::IVDelta => "IV_delta",
            RegionKind::V => "V",
            RegionKind::VI => "VI",
        };
        f.write_str(s)
    }
}

impl fmt::Display for VSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.v_sequence {
            Some(v) => write!(f, "{}_{}", self.kind, v),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumSegment {
    pub xi_lo: f64,
    pub xi_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Wave {
    ShockA(ShockA),
    RarefactionA(RarefactionA),
    Contact0(Contact0),
    ContactA(ContactA),
    Delta(DeltaShock),
    Vacuum(VacuumSegment),
}

impl Wave {
    /// Slowest speed carried by the wave (fan left edge).
    pub fn speed_lo(&self) -> f64 {
        match self {
            Wave::ShockA(w) => w.speed,
            Wave::RarefactionA(w) => w.xi_lo,
            Wave::Contact0(w) => w.speed,
            Wave::ContactA(w) => w.speed,
            Wave::Delta(w) => w.speed,
            Wave::Vacuum(w) => w.xi_lo,
        }
    }

    pub fn speed_hi(&self) -> f64 {
        match self {
            Wave::RarefactionA(w) => w.xi_hi,
            Wave::Vacuum(w) => w.xi_hi,
            _ => self.speed_lo(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Wave::ShockA(_) => "S_a",
            Wave::RarefactionA(_) => "R_a",
            Wave::Contact0(_) => "C_0",
            Wave::ContactA(_) => "C_a",
            Wave::Delta(_) => "S_delta",
            Wave::Vacuum(_) => "V",
        }
    }

    fn from_a(w: AWave) -> Wave {
        match w {
            AWave::Shock(s) => Wave::ShockA(s),
            AWave::Rarefaction(r) => Wave::RarefactionA(r),
            AWave::Contact(c) => Wave::ContactA(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSequence {
    pub left: State,
    pub right: State,
    pub waves: Vec<Wave>,
    /// States between consecutive waves; vacuum appears as rho = 0.
    pub intermediate_states: Vec<State>,
}

impl WaveSequence {
    fn new(left: State, right: State) -> Self {
        WaveSequence { left, right, waves: Vec::new(), intermediate_states: Vec::new() }
    }

    fn push(&mut self, w: Wave, after: Option<State>) {
        self.waves.push(w);
        if let Some(s) = after {
            self.intermediate_states.push(s);
        }
    }

    /// True when fan-left-edge speeds never decrease, up to `tol`.
    pub fn speeds_ordered(&self, tol: f64) -> bool {
        self.waves.windows(2).all(|w| w[0].speed_hi() <= w[1].speed_lo() + tol)
    }

    pub fn delta(&self) -> Option<&DeltaShock> {
        self.waves.iter().find_map(|w| match w {
            Wave::Delta(d) => Some(d),
            _ => None,
        })
    }
}

/// Value of the self-similar solution at one xi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SelfSimilarValue {
    State(State),
    Vacuum,
    /// Location of the Dirac mass; density is unbounded there.
    Delta {
        u_delta: f64,
    },
}

impl SelfSimilarValue {
    pub fn state(&self) -> Option<State> {
        match self {
            SelfSimilarValue::State(s) => Some(*s),
            _ => None,
        }
    }

    /// Density with vacuum mapped to 0 and the delta to `None`.
    pub fn rho(&self) -> Option<f64> {
        match self {
            SelfSimilarValue::State(s) => Some(s.rho),
            SelfSimilarValue::Vacuum => Some(0.0),
            SelfSimilarValue::Delta { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub case: CaseId,
    pub label: RegionLabel,
    pub waves: WaveSequence,
}

pub fn classify_case(l: State, p: &Params) -> Result<CaseId> {
    if l.u == 0.0 {
        return Err(Error::FullDegeneracy);
    }
    let base = if p.a_is_minus_one() {
        7
    } else if p.a < -1.0 {
        1
    } else if p.a < 0.0 {
        13
    } else {
        19
    };
    let sign = if l.u < 0.0 { 0 } else { 3 };
    let side = if p.on_critical(l.rho) {
        1
    } else if l.rho < p.rho_bar {
        0
    } else {
        2
    };
    Ok(CaseId(base + sign + side))
}

/// One representative left state per case: rho_bar = 5, a in {-1.5, -1, -0.5, 0.5},
/// u_L = -4 or 4, rho_L = 3, 5 or 8.
pub fn case_menu() -> Vec<(CaseId, Params, State)> {
    let mut out = Vec::with_capacity(24);
    for a in [-1.5, -1.0, -0.5, 0.5] {
        let p = Params { rho_bar: 5.0, a };
        for u in [-4.0, 4.0] {
            for rho in [3.0, 5.0, 8.0] {
                let l = State::new(rho, u);
                let case = classify_case(l, &p).expect("menu states have u != 0");
                out.push((case, p, l));
            }
        }
    }
    out
}

pub fn classify_region(l: State, r: State, p: &Params) -> Result<RegionLabel> {
    Ok(solve(l, r, p)?.label)
}

pub fn solve_riemann(l: State, r: State, p: &Params) -> Result<WaveSequence> {
    Ok(solve(l, r, p)?.waves)
}

/// Classification and construction in one pass.
type Construction = fn(State, State, &Params) -> Result<(RegionLabel, WaveSequence)>;

pub fn solve(l: State, r: State, p: &Params) -> Result<Solution> {
    let case = classify_case(l, p)?;
    if !(l.rho > 0.0) {
        return Err(Error::DegenerateFlux { rho: l.rho, a: p.a });
    }
    let a_first = p.a * l.u > 0.0;
    if l == r {
        let kind = match (a_first, p.a_is_minus_one()) {
            (true, true) => RegionKind::IIIa,
            (true, false) => RegionKind::Ia,
            (false, true) => RegionKind::III0,
            (false, false) => RegionKind::I0,
        };
        return Ok(Solution { case, label: RegionLabel::plain(kind), waves: WaveSequence::new(l, r) });
    }
    if r.rho == 0.0 {
        let (label, waves) = vacuum(l, r, p)?;
        return Ok(Solution { case, label, waves });
    }
    if r.u == 0.0 || !(r.rho > 0.0) {
        return Err(Error::FullDegeneracy);
    }
    let same_half = r.u.signum() == l.u.signum();
    let mut attempts: Vec<Construction> = Vec::new();
    if same_half {
        attempts.push(classical);
    } else if a_first {
        attempts.push(region_vi);
    }
    attempts.extend_from_slice(&[pure_delta, vacuum, composite_delta]);
    let mut last = None;
    for f in attempts {
        match f(l, r, p) {
            Ok((label, waves)) => return Ok(Solution { case, label, waves }),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::NoIntersection(format!(
        "no construction joins {l:?} to {r:?}; last failure: {}",
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn push_a(ws: &mut WaveSequence, from: State, to: State, p: &Params) -> Result<(f64, f64)> {
    if (from.rho - to.rho).abs() <= 1e-12 * from.rho.max(to.rho) {
        return Ok((f64::NAN, f64::NAN));
    }
    let w = a_wave(from, to, p)?;
    let range = w.speed_range();
    ws.push(Wave::from_a(w), None);
    Ok(range)
}

fn seal(mut ws: WaveSequence) -> WaveSequence {
    // intermediate states are the right states of all but the last wave
    ws.intermediate_states = ws.waves[..ws.waves.len().saturating_sub(1)].iter().map(right_state).collect();
    ws
}

fn right_state(w: &Wave) -> State {
    match w {
        Wave::ShockA(w) => w.right,
        Wave::RarefactionA(w) => w.right,
        Wave::Contact0(w) => w.right,
        Wave::ContactA(w) => w.right,
        Wave::Delta(w) => w.right,
        Wave::Vacuum(_) => State::new(0.0, 0.0),
    }
}

fn kind_of(w: Option<&Wave>, a_first: bool) -> RegionKind {
    match (w, a_first) {
        (Some(Wave::ShockA(_)), true) => RegionKind::Ia,
        (Some(Wave::ShockA(_)), false) => RegionKind::I0,
        (Some(Wave::RarefactionA(_)), true) => RegionKind::IIa,
        (Some(Wave::RarefactionA(_)), false) => RegionKind::II0,
        (Some(Wave::ContactA(_)), true) => RegionKind::IIIa,
        (Some(Wave::ContactA(_)), false) => RegionKind::III0,
        (_, true) => RegionKind::Ia,
        (_, false) => RegionKind::I0,
    }
}

/// Density on the line u = `u` whose lambda_0 equals `level`, on the side of rho_bar given by `above`.
fn rho_on_line(level: f64, u: f64, above: bool, p: &Params) -> Result<f64> {
    let q = 1.0 - level / u;
    if !(q > 0.0) {
        return Err(Error::NoIntersection(format!("contact level {level} unreachable at u = {u}")));
    }
    let rho = p.rho_bar * (q.ln() / p.a).exp();
    if p.on_critical(rho) {
        return Ok(p.rho_bar);
    }
    if (rho > p.rho_bar) != above {
        return Err(Error::NoIntersection(format!("intermediate density {rho} on the wrong branch")));
    }
    Ok(rho)
}

/// Two-wave classical solutions (regions I-III).
fn classical(l: State, r: State, p: &Params) -> Result<(RegionLabel, WaveSequence)> {
    let a_first = p.a * l.u > 0.0;
    let mut ws = WaveSequence::new(l, r);
    if a_first {
        // a-wave along u = u_L, then a 0-contact into r
        let rho_m =
            if p.on_critical(r.rho) { p.rho_bar } else { rho_on_line(lambda_0(r, p), l.u, r.rho > p.rho_bar, p)? };
        let m = State::new(rho_m, l.u);
        let (_, hi) = push_a(&mut ws, l, m, p)?;
        let c_speed = if p.on_critical(r.rho) { 0.0 } else { lambda_0(r, p) };
        if !(hi <= c_speed + TIE_TOL) && !hi.is_nan() {
            return Err(Error::NoIntersection("a-wave outruns the contact".into()));
        }
        if m != r {
            ws.push(Wave::Contact0(Contact0 { left: m, right: r, speed: c_speed }), None);
        }
    } else {
        // 0-contact along the curve of l, then an a-wave along u = u_R
        let (rho_m, c_speed) = if p.on_critical(l.rho) {
            (p.rho_bar, 0.0)
        } else {
            (rho_on_line(lambda_0(l, p), r.u, l.rho > p.rho_bar, p)?, lambda_0(l, p))
        };
        let m = State::new(rho_m, r.u);
        if m != l {
            ws.push(Wave::Contact0(Contact0 { left: l, right: m, speed: c_speed }), None);
        }
        let (lo, _) = push_a(&mut ws, m, r, p)?;
        if !(lo + TIE_TOL >= c_speed) && !lo.is_nan() {
            return Err(Error::NoIntersection("a-wave slower than the contact".into()));
        }
    }
    let a = ws.waves.iter().find(|w| !matches!(w, Wave::Contact0(_)));
    let kind = kind_of(a, a_first);
    Ok((RegionLabel::plain(kind), seal(ws)))
}

/// a-wave to rho_bar, vertical contact across u = 0, a-wave to r.
fn region_vi(l: State, r: State, p: &Params) -> Result<(RegionLabel, WaveSequence)> {
    let mut ws = WaveSequence::new(l, r);
    let p1 = State::new(p.rho_bar, l.u);
    let p2 = State::new(p.rho_bar, r.u);
    if !p.on_critical(l.rho) {
        let (_, hi) = push_a(&mut ws, l, p1, p)?;
        if hi > TIE_TOL {
            return Err(Error::NoIntersection("first leg of VI moves right".into()));
        }
    }
    let start = if p.on_critical(l.rho) { l } else { p1 };
    ws.push(Wave::Contact0(Contact0 { left: start, right: p2, speed: 0.0 }), None);
    if !p.on_critical(r.rho) {
        let (lo, _) = push_a(&mut ws, p2, r, p)?;
        if lo < -TIE_TOL {
            return Err(Error::NoIntersection("last leg of VI moves left".into()));
        }
    } else if let Some(Wave::Contact0(c)) = ws.waves.last_mut() {
        c.right = r;
    }
    Ok((RegionLabel::plain(RegionKind::VI), seal(ws)))
}

fn pure_delta(l: State, r: State, p: &Params) -> Result<(RegionLabel, WaveSequence)> {
    let d = delta::delta_shock(l, r, p)?;
    let mut ws = WaveSequence::new(l, r);
    ws.push(Wave::Delta(d), None);
    Ok((RegionLabel::plain(RegionKind::IV), seal(ws)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    C0,
    Ra,
    Sa,
    Ca,
}

/// Name of the a-wave met when moving along u = `u` towards larger (`up`) or smaller density.
fn a_tag(u: f64, up: bool, p: &Params) -> Tag {
    if p.a_is_minus_one() {
        return Tag::Ca;
    }
    let shock = waves::shock_side(p.a, u).expect("u != 0");
    match (shock, up) {
        (Side::Right, true) | (Side::Left, false) => Tag::Sa,
        _ => Tag::Ra,
    }
}

fn vacuum_state(x: State, p: &Params) -> State {
    State::new(0.0, if p.a > 0.0 { lambda_0(x, p) } else { 0.0 })
}

/// Solutions containing a vacuum segment (region V).
fn vacuum(l: State, r: State, p: &Params) -> Result<(RegionLabel, WaveSequence)> {
    let mut ws = WaveSequence::new(l, r);
    let a_first = p.a * l.u > 0.0;
    // entry into vacuum
    let (entry, xi_in) = if p.a > 0.0 && a_first {
        let v = State::new(0.0, l.u);
        let fan = RarefactionA { left: l, right: v, xi_lo: lambda_a(l, p), xi_hi: l.u };
        ws.push(Wave::RarefactionA(fan), None);
        (Tag::Ra, l.u)
    } else {
        let tag = if l.rho < p.rho_bar && !p.on_critical(l.rho) { Tag::C0 } else { a_tag(l.u, false, p) };
        let s = lambda_0(l, p);
        ws.push(Wave::Contact0(Contact0 { left: l, right: vacuum_state(l, p), speed: s }), None);
        (tag, s)
    };
    // exit from vacuum
    let (exit, trailing, xi_out) = if r.rho == 0.0 {
        (Tag::C0, false, xi_in)
    } else if p.a > 0.0 && p.a * r.u < 0.0 {
        let v = State::new(0.0, r.u);
        let fan = RarefactionA { left: v, right: r, xi_lo: r.u, xi_hi: lambda_a(r, p) };
        (Tag::Ra, false, fan.xi_lo)
    } else {
        let s = lambda_0(r, p);
        if r.rho < p.rho_bar && !p.on_critical(r.rho) {
            (Tag::C0, false, s)
        } else {
            (a_tag(r.u, true, p), true, s)
        }
    };
    if xi_out < xi_in - TIE_TOL {
        return Err(Error::NoIntersection(format!("vacuum closes: {xi_in} > {xi_out}")));
    }
    let seq = match (entry, exit, trailing) {
        (Tag::C0, Tag::C0, _) => VSequence::C0VC0,
        (Tag::C0, Tag::Ra, true) => VSequence::C0VRaC0,
        (Tag::C0, Tag::Sa, true) => VSequence::C0VSaC0,
        (Tag::C0, Tag::Ca, true) => VSequence::C0VCaC0,
        (Tag::C0, Tag::Ra, false) => VSequence::C0VRa,
        (Tag::Ra, Tag::C0, _) => VSequence::RaVC0,
        (Tag::Sa, Tag::C0, _) => VSequence::SaVC0,
        (Tag::Ca, Tag::C0, _) => VSequence::CaVC0,
        other => {
            return Err(Error::NoIntersection(format!("unnamed vacuum pattern {other:?}")));
        }
    };
    ws.push(Wave::Vacuum(VacuumSegment { xi_lo: xi_in, xi_hi: xi_out.max(xi_in) }), None);
    if r.rho > 0.0 {
        if exit == Tag::Ra && !trailing {
            let v = State::new(0.0, r.u);
            ws.push(Wave::RarefactionA(RarefactionA { left: v, right: r, xi_lo: r.u, xi_hi: lambda_a(r, p) }), None);
        } else {
            ws.push(Wave::Contact0(Contact0 { left: vacuum_state(r, p), right: r, speed: lambda_0(r, p) }), None);
        }
    }
    Ok((RegionLabel { kind: RegionKind::V, v_sequence: Some(seq) }, seal(ws)))
}

/// Delta shock attached to the edge of an a-rarefaction (region IV_delta).
fn composite_delta(l: State, r: State, p: &Params) -> Result<(RegionLabel, WaveSequence)> {
    if p.a_is_minus_one() {
        return Err(Error::NoRarefaction);
    }
    let mut found: Vec<WaveSequence> = Vec::new();
    // delta from l into m on u = u_R, then a fan from m to r
    if p.a * r.u < 0.0 {
        let up = waves::rarefaction_side(p.a, r.u)? == Side::Right;
        let (lo, hi) = if up { (r.rho * 1e-8, r.rho) } else { (r.rho, r.rho * 1e8) };
        for branch in 0..2 {
            let h = |rho: f64| -> f64 {
                let m = State::new(rho, r.u);
                speed_branch(l, m, branch, p).map(|s| s - lambda_a(m, p)).unwrap_or(f64::NAN)
            };
            for rho in roots::all_roots(h, lo, hi, 240, true, 1e-13) {
                let m = State::new(rho, r.u);
                if let Some(ws) = attach_fan_after(l, m, r, branch, p) {
                    found.push(ws);
                }
            }
        }
    }
    // fan from l to m on u = u_L, then a delta from m into r
    if p.a * l.u > 0.0 {
        let up = waves::rarefaction_side(p.a, l.u)? == Side::Right;
        let (lo, hi) = if up { (l.rho, l.rho * 1e8) } else { (l.rho * 1e-8, l.rho) };
        for branch in 0..2 {
            let h = |rho: f64| -> f64 {
                let m = State::new(rho, l.u);
                speed_branch(m, r, branch, p).map(|s| s - lambda_a(m, p)).unwrap_or(f64::NAN)
            };
            for rho in roots::all_roots(h, lo, hi, 240, true, 1e-13) {
                let m = State::new(rho, l.u);
                if let Some(ws) = attach_fan_before(l, m, r, branch, p) {
                    found.push(ws);
                }
            }
        }
    }
    match found.len() {
        0 => Err(Error::NoIntersection("no delta-rarefaction composite".into())),
        _ => Ok((RegionLabel::plain(RegionKind::IVDelta), found.swap_remove(0))),
    }
}

/// Candidate delta speed on one continuous root branch; a > 0 has a single branch.
fn speed_branch(l: State, r: State, branch: usize, p: &Params) -> Option<f64> {
    if p.a > 0.0 {
        return if branch == 0 { delta::delta_speed_pos_a(l, r, p).ok() } else { None };
    }
    let s = delta::delta_speed_branches(l, r, p).ok()?[branch];
    s.is_finite().then_some(s)
}

fn attach_fan_after(l: State, m: State, r: State, branch: usize, p: &Params) -> Option<WaveSequence> {
    let s = speed_branch(l, m, branch, p)?;
    let (la_l, l0_l) = eigenvalues(l, p).ok()?;
    if !(s < la_l.min(l0_l)) || !(lambda_0(m, p) < s) {
        return None;
    }
    let rate = delta::weight_rate(l, m, s, p).ok()?;
    let fan = match a_wave(m, r, p).ok()? {
        AWave::Rarefaction(f) => f,
        _ => return None,
    };
    let mut ws = WaveSequence::new(l, r);
    let u_delta = if p.a < 0.0 { s } else { 0.0 };
    ws.push(Wave::Delta(DeltaShock { left: l, right: m, speed: s, weight_rate: rate, u_delta }), None);
    ws.push(Wave::RarefactionA(RarefactionA { xi_lo: s, ..fan }), None);
    Some(seal(ws))
}

fn attach_fan_before(l: State, m: State, r: State, branch: usize, p: &Params) -> Option<WaveSequence> {
    let s = speed_branch(m, r, branch, p)?;
    let (la_r, l0_r) = eigenvalues(r, p).ok()?;
    if !(la_r.max(l0_r) < s) || !(s < lambda_0(m, p)) {
        return None;
    }
    let rate = delta::weight_rate(m, r, s, p).ok()?;
    let fan = match a_wave(l, m, p).ok()? {
        AWave::Rarefaction(f) => f,
        _ => return None,
    };
    let mut ws = WaveSequence::new(l, r);
    let u_delta = if p.a < 0.0 { s } else { 0.0 };
    ws.push(Wave::RarefactionA(RarefactionA { xi_hi: s, ..fan }), None);
    ws.push(Wave::Delta(DeltaShock { left: m, right: r, speed: s, weight_rate: rate, u_delta }), None);
    Some(seal(ws))
}

pub fn evaluate_selfsimilar(ws: &WaveSequence, xi: f64, p: &Params) -> SelfSimilarValue {
    let mut current = ws.left;
    for w in &ws.waves {
        if xi < w.speed_lo() {
            return value_of(current);
        }
        match w {
            Wave::RarefactionA(f) if xi <= f.xi_hi => return fan_value(f, xi, p),
            Wave::Vacuum(v) if xi <= v.xi_hi => return SelfSimilarValue::Vacuum,
            Wave::Delta(d) if xi == d.speed => return SelfSimilarValue::Delta { u_delta: d.u_delta },
            _ => {}
        }
        current = right_state(w);
    }
    value_of(current)
}

fn value_of(s: State) -> SelfSimilarValue {
    if s.rho == 0.0 {
        SelfSimilarValue::Vacuum
    } else {
        SelfSimilarValue::State(s)
    }
}

fn fan_value(f: &RarefactionA, xi: f64, p: &Params) -> SelfSimilarValue {
    match waves::rarefaction_state(f.left.u, xi, p) {
        Ok(s) => value_of(s),
        Err(_) => {
            // fan edges touching vacuum
            if f.left.rho == 0.0 || f.right.rho == 0.0 {
                SelfSimilarValue::Vacuum
            } else {
                value_of(if xi <= f.xi_lo { f.left } else { f.right })
            }
        }
    }
}

/// (rho, u) window of a region raster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub rho_min: f64,
    pub rho_max: f64,
    pub u_min: f64,
    pub u_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Region(RegionLabel),
    /// Center on u = 0 or otherwise outside the classifier's domain.
    Degenerate,
    /// No construction found.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, row j = u index from u_min upwards, column i = rho index.
    pub cells: Vec<Cell>,
}

impl RegionGrid {
    pub fn center(&self, i: usize, j: usize) -> State {
        let w = &self.window;
        State::new(
            w.rho_min + (i as f64 + 0.5) * (w.rho_max - w.rho_min) / self.nx as f64,
            w.u_min + (j as f64 + 0.5) * (w.u_max - w.u_min) / self.ny as f64,
        )
    }

    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[j * self.nx + i]
    }
}

pub fn classify_cell(l: State, r: State, p: &Params) -> Cell {
    if r.u == 0.0 {
        return Cell::Degenerate;
    }
    match classify_region(l, r, p) {
        Ok(label) => Cell::Region(label),
        Err(Error::FullDegeneracy) => Cell::Degenerate,
        Err(_) => Cell::Unresolved,
    }
}

pub fn rasterize_regions(l: State, p: &Params, window: Window, nx: usize, ny: usize) -> Result<RegionGrid> {
    classify_case(l, p)?;
    let mut grid = RegionGrid { window, nx, ny, cells: Vec::new() };
    grid.cells = (0..nx * ny).into_par_iter().map(|k| classify_cell(l, grid.center(k % nx, k / nx), p)).collect();
    Ok(grid)
}
