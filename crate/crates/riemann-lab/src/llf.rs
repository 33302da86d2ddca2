//! Lax-Friedrichs finite-volume solver for Riemann initial data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eigenvalues, Params, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_cells: usize,
}

impl Grid {
    pub fn new(x_lo: f64, x_hi: f64, n_cells: usize) -> Result<Self> {
        if !(x_hi > x_lo) || n_cells < 3 {
            return Err(Error::Config(format!("bad grid [{x_lo}, {x_hi}] with {n_cells} cells")));
        }
        Ok(Grid { x_lo, x_hi, n_cells })
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvField {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

impl FvField {
    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn momentum(&self) -> f64 {
        self.m.iter().sum::<f64>() * self.grid.dx()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GlobalLf,
    Rusanov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    pub cfl_used: f64,
    pub max_abs_eig: f64,
    /// dt times (left interface flux - right interface flux) for mass and momentum.
    pub boundary_flux: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Renorm {
    pub period: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub t_end: f64,
    pub cfl: f64,
    pub scheme: Scheme,
    pub renorm: Option<Renorm>,
    /// Snapshots at equally spaced times in (0, t_end]; the initial field is always kept.
    pub snapshots: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { t_end: 10.0, cfl: 0.45, scheme: Scheme::GlobalLf, renorm: None, snapshots: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<FvField>,
    pub reports: Vec<StepReport>,
    /// Set when the boundary cells moved away from their initial values.
    pub boundary_contaminated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub xi: f64,
    pub rho: f64,
    /// Absent below the vacuum floor.
    pub u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaDiagnostics {
    pub peak_xi: f64,
    pub peak_rho: Vec<f64>,
    pub times: Vec<f64>,
    pub mass_excess: Vec<f64>,
    pub linear_fit_slope: f64,
}

pub fn vacuum_floor(p: &Params) -> f64 {
    1e-12 * p.rho_bar
}

pub fn init_riemann(g: Grid, l: State, r: State) -> FvField {
    let n = g.n_cells;
    let mut rho = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for i in 0..n {
        let s = if g.center(i) < 0.0 { l } else { r };
        rho.push(s.rho);
        m.push(s.m());
    }
    FvField { grid: g, rho, m, t: 0.0 }
}

/// Physical flux of one cell in conserved variables; cells below the floor carry none.
fn cell_flux(rho: f64, m: f64, p: &Params) -> [f64; 2] {
    if rho < vacuum_floor(p) {
        return [0.0, 0.0];
    }
    let u = m / rho;
    let f1 = m * (1.0 - p.q(rho));
    [f1, u * f1]
}

fn cell_speed(rho: f64, m: f64, p: &Params) -> f64 {
    if rho < vacuum_floor(p) {
        return 0.0;
    }
    match eigenvalues(State::new(rho, m / rho), p) {
        Ok((la, l0)) => la.abs().max(l0.abs()),
        Err(_) => 0.0,
    }
}

pub fn max_wave_speed(f: &FvField, p: &Params) -> f64 {
    f.rho.iter().zip(&f.m).map(|(&r, &m)| cell_speed(r, m, p)).fold(0.0, f64::max)
}

/// One explicit step; `dt_cap` shortens the step to land on output times.
pub fn step_capped(f: &FvField, p: &Params, cfl: f64, scheme: Scheme, dt_cap: f64) -> Result<(FvField, StepReport)> {
    if !(cfl > 0.0 && cfl <= 0.5) {
        return Err(Error::Config(format!("cfl = {cfl} outside (0, 1/2]")));
    }
    let n = f.rho.len();
    let dx = f.grid.dx();
    let speeds: Vec<f64> = f.rho.iter().zip(&f.m).map(|(&r, &m)| cell_speed(r, m, p)).collect();
    let lam = speeds.iter().copied().fold(0.0, f64::max);
    if !(lam > 0.0) || !lam.is_finite() {
        return if lam == 0.0 { Err(Error::StagnantField) } else { Err(Error::BlowupDetected { t: f.t }) };
    }
    let dt = (cfl * dx / lam).min(dt_cap);
    let flux: Vec<[f64; 2]> = f.rho.iter().zip(&f.m).map(|(&r, &m)| cell_flux(r, m, p)).collect();
    // interface i sits between cells i-1 and i; ghosts copy the edge cells
    let idx = |i: isize| i.clamp(0, n as isize - 1) as usize;
    let mut fr = vec![[0.0; 2]; n + 1];
    for (k, out) in fr.iter_mut().enumerate() {
        let (a, b) = (idx(k as isize - 1), idx(k as isize));
        let visc = match scheme {
            Scheme::GlobalLf => dx / dt,
            Scheme::Rusanov => speeds[a].max(speeds[b]),
        };
        let ha = [f.rho[a], f.m[a]];
        let hb = [f.rho[b], f.m[b]];
        for c in 0..2 {
            out[c] = 0.5 * (flux[a][c] + flux[b][c]) - 0.5 * visc * (hb[c] - ha[c]);
        }
    }
    let r = dt / dx;
    let mut rho = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for i in 0..n {
        rho.push(f.rho[i] - r * (fr[i + 1][0] - fr[i][0]));
        m.push(f.m[i] - r * (fr[i + 1][1] - fr[i][1]));
    }
    if rho.iter().chain(&m).any(|v| !v.is_finite()) {
        return Err(Error::BlowupDetected { t: f.t + dt });
    }
    let report = StepReport {
        dt,
        cfl_used: lam * dt / dx,
        max_abs_eig: lam,
        boundary_flux: [dt * (fr[0][0] - fr[n][0]), dt * (fr[0][1] - fr[n][1])],
    };
    Ok((FvField { grid: f.grid, rho, m, t: f.t + dt }, report))
}

pub fn step(f: &FvField, p: &Params, cfl: f64, scheme: Scheme) -> Result<(FvField, StepReport)> {
    step_capped(f, p, cfl, scheme, f64::INFINITY)
}

/// Replaces values within `tol` of their neighbor average by that average.
pub fn renormalize(f: &mut FvField, tol: f64) {
    for v in [&mut f.rho, &mut f.m] {
        let old = v.clone();
        for i in 1..old.len().saturating_sub(1) {
            let avg = 0.5 * (old[i - 1] + old[i + 1]);
            if (old[i] - avg).abs() < tol {
                v[i] = avg;
            }
        }
    }
}

pub fn run(g: Grid, l: State, r: State, p: &Params, opts: &RunOptions) -> Result<Trajectory> {
    if !(opts.t_end > 0.0) {
        return Err(Error::Config(format!("t_end = {} must be positive", opts.t_end)));
    }
    let n_out = opts.snapshots.max(1);
    let mut f = init_riemann(g, l, r);
    let edges = (f.rho[0], f.m[0], f.rho[g.n_cells - 1], f.m[g.n_cells - 1]);
    let mut snapshots = vec![f.clone()];
    let mut reports = Vec::new();
    let mut steps = 0usize;
    for k in 1..=n_out {
        let target = opts.t_end * k as f64 / n_out as f64;
        while f.t < target * (1.0 - 1e-14) {
            let (next, rep) = step_capped(&f, p, opts.cfl, opts.scheme, target - f.t)?;
            f = next;
            steps += 1;
            if let Some(rn) = opts.renorm {
                if rn.period > 0 && steps.is_multiple_of(rn.period) {
                    renormalize(&mut f, rn.tol);
                }
            }
            reports.push(rep);
        }
        snapshots.push(f.clone());
    }
    let n = g.n_cells - 1;
    let moved = |a: f64, b: f64| (a - b).abs() > 1e-8 * (1.0 + b.abs());
    let boundary_contaminated =
        moved(f.rho[0], edges.0) || moved(f.m[0], edges.1) || moved(f.rho[n], edges.2) || moved(f.m[n], edges.3);
    Ok(Trajectory { snapshots, reports, boundary_contaminated })
}

pub fn selfsimilar_extract(f: &FvField, p: &Params) -> Result<Vec<Sample>> {
    if !(f.t > 0.0) {
        return Err(Error::NotSelfSimilarYet);
    }
    let floor = vacuum_floor(p);
    Ok((0..f.rho.len())
        .map(|i| {
            let rho = f.rho[i];
            let u = (rho >= floor).then(|| f.m[i] / rho);
            Sample { xi: f.grid.center(i) / f.t, rho, u }
        })
        .collect())
}

/// Peak tracking and excess mass about the moving spike, relative to the two initial plateaus.
pub fn delta_diagnostics(traj: &Trajectory) -> Result<DeltaDiagnostics> {
    let snaps: Vec<&FvField> = traj.snapshots.iter().filter(|s| s.t > 0.0).collect();
    if snaps.len() < 3 {
        return Err(Error::Config("delta diagnostics need at least 3 snapshots".into()));
    }
    let first = &traj.snapshots[0];
    let n = first.rho.len();
    let (rho_l, rho_r) = (first.rho[0], first.rho[n - 1]);
    let g = first.grid;
    let dx = g.dx();
    let background = rho_l.abs().max(rho_r.abs());
    let half_w = 0.1 * (g.x_hi - g.x_lo);
    let mut times = Vec::new();
    let mut peaks = Vec::new();
    let mut excess = Vec::new();
    let mut peak_x = 0.0;
    for s in &snaps {
        let (ip, &pk) = s.rho.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        let xp = g.center(ip);
        let (lo, hi) = ((xp - half_w).max(g.x_lo), (xp + half_w).min(g.x_hi));
        let mut ex = 0.0;
        for i in 0..n {
            let x = g.center(i);
            if x >= lo && x <= hi {
                ex += (s.rho[i] - if x < xp { rho_l } else { rho_r }) * dx;
            }
        }
        times.push(s.t);
        peaks.push(pk);
        excess.push(ex);
        peak_x = xp;
    }
    let last = *peaks.last().expect("nonempty");
    let mid = peaks[peaks.len() / 2];
    if !(last > 2.0 * background && last > 1.2 * mid) {
        return Err(Error::NoSingularityDetected);
    }
    let k0 = times.len() / 2;
    let slope = ls_slope(&times[k0..], &excess[k0..]);
    Ok(DeltaDiagnostics {
        peak_xi: peak_x / snaps.last().expect("nonempty").t,
        peak_rho: peaks,
        times,
        mass_excess: excess,
        linear_fit_slope: slope,
    })
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Params {
        Params::new(5.0, -1.5).unwrap()
    }

    #[test]
    fn init_split_and_mass() {
        let g = Grid::new(-100.0, 100.0, 1000).unwrap();
        let f = init_riemann(g, State::new(3.0, 3.0), State::new(9.0, -9.0));
        assert_eq!(f.rho.iter().filter(|&&r| r == 3.0).count(), 500);
        assert!((f.mass() - (3.0 * 100.0 + 9.0 * 100.0)).abs() < 1e-9);
    }

    #[test]
    fn constant_field_is_steady() {
        let g = Grid::new(-1.0, 1.0, 50).unwrap();
        let s = State::new(3.0, -4.0);
        let f = init_riemann(g, s, s);
        for scheme in [Scheme::GlobalLf, Scheme::Rusanov] {
            let (h, rep) = step(&f, &p(), 0.45, scheme).unwrap();
            assert!(h.rho.iter().all(|&r| (r - 3.0).abs() < 1e-14));
            assert!(rep.cfl_used <= 0.5);
        }
    }

    #[test]
    fn max_speed_at_rho_bar() {
        let g = Grid::new(-1.0, 1.0, 10).unwrap();
        let s = State::new(5.0, 4.0);
        assert!((max_wave_speed(&init_riemann(g, s, s), &p()) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_field_is_stagnant() {
        let g = Grid::new(-1.0, 1.0, 10).unwrap();
        let s = State::new(0.0, 0.0);
        let pa = Params::new(5.0, 0.5).unwrap();
        assert_eq!(max_wave_speed(&init_riemann(g, s, s), &pa), 0.0);
        assert!(matches!(step(&init_riemann(g, s, s), &pa, 0.45, Scheme::GlobalLf), Err(Error::StagnantField)));
    }

    #[test]
    fn rejects_large_cfl() {
        let g = Grid::new(-1.0, 1.0, 10).unwrap();
        let s = State::new(3.0, 1.0);
        assert!(step(&init_riemann(g, s, s), &p(), 0.9, Scheme::GlobalLf).is_err());
    }

    #[test]
    fn extract_needs_time() {
        let g = Grid::new(-1.0, 1.0, 10).unwrap();
        let s = State::new(3.0, 1.0);
        assert!(matches!(selfsimilar_extract(&init_riemann(g, s, s), &p()), Err(Error::NotSelfSimilarYet)));
    }

    #[test]
    fn renormalize_flattens_small_noise() {
        let g = Grid::new(-1.0, 1.0, 5).unwrap();
        let mut f = FvField { grid: g, rho: vec![1.0, 1.0 + 1e-9, 1.0, 2.0, 1.0], m: vec![0.0; 5], t: 1.0 };
        renormalize(&mut f, 1e-7);
        assert_eq!(f.rho[1], 1.0);
        assert_eq!(f.rho[3], 2.0);
    }
}
