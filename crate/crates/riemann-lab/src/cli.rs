//! Command implementations behind the `riemann-lab` binary.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::delta::delta_shock;
use crate::error::{Error, Result};
use crate::gspt::{self, FixedPoint, ProfileOptions, Side};
use crate::io::{fmt_f64, fmt_opt, Finding, ResultBundle, Table};
use crate::llf::{self, Grid, RunOptions};
use crate::model::{Params, State};
use crate::riemann::{self, Cell, RegionGrid, Wave, Window};
use crate::waves::{contact0_branches, shock_side, ContactBranch, Side as WaveSide};

fn timed(
    name: &str,
    cmd: Command,
    cfg: &RunConfig,
    body: impl FnOnce(&mut ResultBundle) -> Result<()>,
) -> Result<ResultBundle> {
    cfg.validate(cmd)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let t0 = Instant::now();
    let mut b = ResultBundle::new(name, cfg);
    body(&mut b)?;
    b.started_unix_s = started;
    b.elapsed_s = t0.elapsed().as_secs_f64();
    Ok(b)
}

fn state_cells(s: State) -> [String; 2] {
    [fmt_f64(s.rho), fmt_f64(s.u)]
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<ResultBundle> {
    timed("classify", Command::Classify, cfg, |b| {
        let (l, r) = (cfg.require_left()?, cfg.require_right()?);
        let sol = riemann::solve(l, r, &cfg.params)?;
        let mut waves = Table::new(&["index", "tag", "speed_lo", "speed_hi", "rho_after", "u_after"]);
        let mut text = format!("case {}\nregion {}\n", sol.case.0, sol.label);
        for (k, w) in sol.waves.waves.iter().enumerate() {
            let after = sol.waves.intermediate_states.get(k).copied().unwrap_or(sol.waves.right);
            let [ra, ua] = state_cells(after);
            waves.push(vec![k.to_string(), w.tag().into(), fmt_f64(w.speed_lo()), fmt_f64(w.speed_hi()), ra, ua]);
            let extra = match w {
                Wave::Delta(d) => format!(" weight_rate {:.6} u_delta {:.6}", d.weight_rate, d.u_delta),
                _ => String::new(),
            };
            if w.speed_lo() == w.speed_hi() {
                text += &format!("{:8} speed {:.6}{extra}\n", w.tag(), w.speed_lo());
            } else {
                text += &format!("{:8} speeds [{:.6}, {:.6}]{extra}\n", w.tag(), w.speed_lo(), w.speed_hi());
            }
            if k + 1 < sol.waves.waves.len() {
                text += &format!("         -> ({:.6}, {:.6})\n", after.rho, after.u);
            }
        }
        if sol.waves.waves.is_empty() {
            text += "no waves (left and right states coincide)\n";
        }
        b.summary = text;
        b.tables.insert("waves".into(), waves);
        b.add_json("solution", &sol);
        Ok(())
    })
}

fn cell_label(c: Cell) -> String {
    match c {
        Cell::Region(l) => l.to_string(),
        Cell::Degenerate => "degenerate".into(),
        Cell::Unresolved => "unresolved".into(),
    }
}

fn region_tables(grid: &RegionGrid) -> (Table, Table) {
    let mut labels: Vec<String> = grid.cells.iter().map(|&c| cell_label(c)).collect();
    labels.sort();
    labels.dedup();
    let mut cells = Table::new(&["i", "j", "rho", "u", "label", "code"]);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let s = grid.center(i, j);
            let lab = cell_label(grid.get(i, j));
            let code = labels.binary_search(&lab).expect("label listed");
            cells.push(vec![i.to_string(), j.to_string(), fmt_f64(s.rho), fmt_f64(s.u), lab, code.to_string()]);
        }
    }
    let mut legend = Table::new(&["code", "label", "count"]);
    for (k, lab) in labels.iter().enumerate() {
        let n = grid.cells.iter().filter(|&&c| cell_label(c) == *lab).count();
        legend.push(vec![k.to_string(), lab.clone(), n.to_string()]);
    }
    (cells, legend)
}

/// (rho, u) vertices of one curve.
pub type Polyline = Vec<(f64, f64)>;

fn sample_branch(br: &ContactBranch, p: &Params, w: &Window, n: usize) -> Polyline {
    let lo = br.rho_lo.max(w.rho_min);
    let hi = br.rho_hi.min(w.rho_max);
    if !(hi > lo) {
        return Vec::new();
    }
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .filter(|&rho| br.contains(rho) && rho > 0.0)
        .map(|rho| (rho, br.eval(rho, p)))
        .filter(|&(_, u)| u >= w.u_min && u <= w.u_max)
        .collect()
}

/// Wave curves through `l` clipped to the window, one polyline per curve name.
pub fn overlay_curves(l: State, p: &Params, w: &Window) -> Result<Vec<(String, Polyline)>> {
    let mut out = Vec::new();
    let horiz = |a: f64, b: f64| vec![(a.max(w.rho_min), l.u), (b.min(w.rho_max), l.u)];
    if p.a_is_minus_one() {
        out.push(("C_a".to_string(), horiz(w.rho_min, w.rho_max)));
    } else {
        let (left, right) = (horiz(w.rho_min, l.rho), horiz(l.rho, w.rho_max));
        let (s, r) = match shock_side(p.a, l.u)? {
            WaveSide::Left => (left, right),
            WaveSide::Right => (right, left),
        };
        out.push(("S_a".to_string(), s));
        out.push(("R_a".to_string(), r));
    }
    if p.on_critical(l.rho) {
        out.push(("C_0".to_string(), vec![(l.rho, w.u_min), (l.rho, w.u_max)]));
        return Ok(out);
    }
    let br = contact0_branches(l, p)?;
    out.push(("C_0".to_string(), sample_branch(&br.main, p, w, 600)));
    out.push(("C_0m".to_string(), sample_branch(&br.mirror, p, w, 600)));
    out.push(("C_0l".to_string(), sample_branch(&br.limit, p, w, 600)));
    if br.asymptote >= w.u_min && br.asymptote <= w.u_max {
        out.push(("asymptote".to_string(), vec![(w.rho_min, br.asymptote), (w.rho_max, br.asymptote)]));
    }
    Ok(out)
}

fn regions_plot(curves: &[(String, Polyline)], w: &Window) -> String {
    let mut s = String::from(
        "set datafile separator ','\nset key outside right\nset xlabel 'rho'\nset ylabel 'u'\n\
         set terminal pngcairo size 900,900\nset output 'regions.png'\n",
    );
    s += &format!("set xrange [{}:{}]\nset yrange [{}:{}]\n", w.rho_min, w.rho_max, w.u_min, w.u_max);
    s += "plot 'regions.csv' skip 1 using 3:4:6 with points pt 5 ps 0.3 lc palette notitle";
    for (name, _) in curves {
        s += &format!(", \\\n     'curve_{name}.csv' skip 1 using 1:2 with lines lw 2 title '{name}'");
    }
    s.push('\n');
    s
}

pub fn cmd_regions(cfg: &RunConfig) -> Result<ResultBundle> {
    timed("regions", Command::Regions, cfg, |b| {
        let l = cfg.require_left()?;
        let rc = &cfg.regions;
        let grid = riemann::rasterize_regions(l, &cfg.params, rc.window, rc.nx, rc.ny)?;
        let (cells, legend) = region_tables(&grid);
        let curves = overlay_curves(l, &cfg.params, &rc.window)?;
        for (name, pts) in &curves {
            let mut t = Table::new(&["rho", "u"]);
            for &(x, y) in pts {
                t.push_f64(&[x, y]);
            }
            b.tables.insert(format!("curve_{name}"), t);
        }
        let case = riemann::classify_case(l, &cfg.params)?;
        b.summary = format!("case {}\n", case.0);
        for row in &legend.rows {
            b.summary += &format!("{:>14} {}\n", row[1], row[2]);
        }
        b.plot = Some(regions_plot(&curves, &rc.window));
        b.tables.insert("regions".into(), cells);
        b.tables.insert("legend".into(), legend);
        Ok(())
    })
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<ResultBundle> {
    timed("simulate", Command::Simulate, cfg, |b| {
        let (l, r) = (cfg.require_left()?, cfg.require_right()?);
        let p = &cfg.params;
        let sc = &cfg.simulate;
        let grid = Grid::new(sc.x_lo, sc.x_hi, sc.n_cells)?;
        let opts =
            RunOptions { t_end: sc.t_end, cfl: sc.cfl, scheme: sc.scheme, renorm: sc.renorm, snapshots: sc.snapshots };
        let traj = llf::run(grid, l, r, p, &opts)?;
        let exact = riemann::solve_riemann(l, r, p).ok();
        for (k, snap) in traj.snapshots.iter().enumerate().skip(1) {
            let mut t = Table::new(&["x", "xi", "rho", "u", "rho_exact", "u_exact"]);
            for s in llf::selfsimilar_extract(snap, p)? {
                let x = s.xi * snap.t;
                let (re, ue) = match &exact {
                    Some(ws) => match riemann::evaluate_selfsimilar(ws, s.xi, p) {
                        riemann::SelfSimilarValue::State(st) => (Some(st.rho), Some(st.u)),
                        riemann::SelfSimilarValue::Vacuum => (Some(0.0), None),
                        riemann::SelfSimilarValue::Delta { u_delta } => (None, Some(u_delta)),
                    },
                    None => (None, None),
                };
                t.push(vec![fmt_f64(x), fmt_f64(s.xi), fmt_f64(s.rho), fmt_opt(s.u), fmt_opt(re), fmt_opt(ue)]);
            }
            b.tables.insert(format!("snapshot_{k:03}"), t);
        }
        let mut steps =
            Table::new(&["step", "dt", "cfl_used", "max_abs_eig", "boundary_flux_mass", "boundary_flux_momentum"]);
        for (k, rep) in traj.reports.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(
                [rep.dt, rep.cfl_used, rep.max_abs_eig, rep.boundary_flux[0], rep.boundary_flux[1]].map(fmt_f64),
            );
            steps.push(row);
        }
        b.tables.insert("steps".into(), steps);
        let last = traj.snapshots.last().expect("snapshots");
        b.summary = format!(
            "{} steps to t = {}\nmass {:.12} momentum {:.12}\n",
            traj.reports.len(),
            last.t,
            last.mass(),
            last.momentum()
        );
        if traj.boundary_contaminated {
            b.findings.push(Finding {
                kind: "boundary".into(),
                message: "waves reached the domain boundary".into(),
                exit_code: 0,
            });
            b.summary += "warning: waves reached the domain boundary\n";
        }
        if let Some(d) = exact.as_ref().and_then(|ws| ws.delta()).copied() {
            match llf::delta_diagnostics(&traj) {
                Ok(diag) => {
                    let mut t = Table::new(&["t", "peak_rho", "mass_excess"]);
                    for k in 0..diag.times.len() {
                        t.push_f64(&[diag.times[k], diag.peak_rho[k], diag.mass_excess[k]]);
                    }
                    b.tables.insert("delta".into(), t);
                    b.summary += &format!(
                        "delta peak xi {:.6} (exact {:.6}), mass slope {:.6} (weight rate {:.6})\n",
                        diag.peak_xi, d.speed, diag.linear_fit_slope, d.weight_rate
                    );
                    b.add_json(
                        "delta",
                        &serde_json::json!({ "diagnostics": diag, "exact_speed": d.speed, "weight_rate": d.weight_rate }),
                    );
                }
                Err(e) => b.findings.push(Finding::from_error("delta", &e)),
            }
        }
        let n = traj.snapshots.len() - 1;
        b.plot = Some(format!(
            "set datafile separator ','\nset terminal pngcairo size 900,600\nset output 'snapshot.png'\n\
             set xlabel 'x/t'\nset ylabel 'rho'\n\
             plot 'snapshot_{n:03}.csv' skip 1 using 2:3 with lines title 'LLF', \\\n     \
             'snapshot_{n:03}.csv' skip 1 using 2:5 with lines dt 2 title 'exact'\n"
        ));
        Ok(())
    })
}

pub fn cmd_gspt(cfg: &RunConfig) -> Result<ResultBundle> {
    timed("gspt", Command::Gspt, cfg, |b| {
        let (l, r) = (cfg.require_left()?, cfg.require_right()?);
        let p = &cfg.params;
        let gc = &cfg.gspt;
        let mut text = String::new();

        let mut spectra = Table::new(&["fixed_point", "direction", "diagonal", "expected"]);
        for which in [FixedPoint::NegAPlus1, FixedPoint::NegAMinus1, FixedPoint::PosAPlus1, FixedPoint::PosAMinus1] {
            match gspt::fixed_point_spectrum(which, p) {
                Ok(rep) => {
                    for (k, dir) in rep.directions.iter().enumerate() {
                        spectra.push(vec![
                            format!("{which:?}"),
                            dir.clone(),
                            fmt_f64(rep.eigenvalues[k]),
                            fmt_f64(rep.expected[k]),
                        ]);
                    }
                    text += &format!("spectrum {which:?}: {:?} (error {:.1e})\n", rep.eigenvalues, rep.max_error);
                }
                Err(e) => {
                    text += &format!("spectrum {which:?}: {e}\n");
                    b.findings.push(Finding::from_error("spectrum", &e));
                }
            }
        }
        b.tables.insert("spectra".into(), spectra);

        let delta = delta_shock(l, r, p);
        match &delta {
            Ok(d) => {
                let mut inv = Table::new(&[
                    "side",
                    "anchor_rho",
                    "anchor_u",
                    "s",
                    "wedge",
                    "violations",
                    "tangent",
                    "worst_margin",
                ]);
                for (side, anchor) in [(Side::Left, l), (Side::Right, r)] {
                    match gspt::check_invariant_region(side, anchor, d.speed, p, gc.n_samples) {
                        Ok(rep) => {
                            for c in &rep.checks {
                                let [ar, au] = state_cells(anchor);
                                inv.push(vec![
                                    format!("{side:?}"),
                                    ar,
                                    au,
                                    fmt_f64(d.speed),
                                    format!("{:?}", c.wedge),
                                    c.violations.to_string(),
                                    c.tangent.to_string(),
                                    fmt_f64(c.worst_margin),
                                ]);
                            }
                            text += &format!(
                                "invariant {side:?} at ({}, {}): {:?} wedge\n",
                                anchor.rho, anchor.u, rep.region
                            );
                        }
                        Err(e) => {
                            text += &format!("invariant {side:?}: {e}\n");
                            b.findings.push(Finding::from_error("invariant_region", &e));
                        }
                    }
                }
                b.tables.insert("invariant_regions".into(), inv);
            }
            Err(e) => {
                text += &format!("pair is not a delta shock: {e}\n");
                b.findings.push(Finding::from_error("delta", e));
            }
        }

        match gspt::heteroclinic_on_sphere(p) {
            Ok(orbit) => {
                let mut t = Table::new(&["tau", "rho_bar0", "u_bar0", "eps_bar"]);
                for s in &orbit.samples {
                    t.push_f64(s);
                }
                b.tables.insert("orbit".into(), t);
                text += &format!(
                    "orbit u_bar0 {:.6} -> {:.6}, monotone {}, sphere error {:.1e}\n",
                    orbit.start_u, orbit.end_u, orbit.monotone, orbit.max_sphere_error
                );
            }
            Err(e) => b.findings.push(Finding::from_error("heteroclinic", &e)),
        }

        if delta.is_ok() {
            match gspt::viscous_family(l, r, p, &gc.eps, &ProfileOptions::default()) {
                Ok(fam) => {
                    let mut summary = Table::new(&[
                        "eps",
                        "peak_rho",
                        "peak_xi",
                        "excess_mass",
                        "plateau_error_left",
                        "plateau_error_right",
                        "max_inner_sign",
                    ]);
                    for (k, pr) in fam.iter().enumerate() {
                        summary.push_f64(&[
                            pr.eps,
                            pr.peak_rho,
                            pr.peak_xi,
                            pr.excess_mass,
                            pr.plateau_error_left,
                            pr.plateau_error_right,
                            pr.max_inner_sign,
                        ]);
                        let mut t = Table::new(&["xi", "rho", "u", "w1", "w2"]);
                        for i in 0..pr.xi.len() {
                            t.push_f64(&[pr.xi[i], pr.rho[i], pr.u[i], pr.w1[i], pr.w2[i]]);
                        }
                        b.tables.insert(format!("profile_{k}"), t);
                        text += &format!("profile eps {:e}: peak {:.4} at {:.6}\n", pr.eps, pr.peak_rho, pr.peak_xi);
                    }
                    b.tables.insert("profiles".into(), summary);
                }
                Err(e) => b.findings.push(Finding::from_error("profile", &e)),
            }
        }
        b.summary = text;
        b.plot = Some(
            "set datafile separator ','\nset terminal pngcairo size 900,600\nset output 'orbit.png'\n\
             set xlabel 'tau'\nplot 'orbit.csv' skip 1 using 1:2 with lines title 'rho_bar0', \\\n     \
             'orbit.csv' skip 1 using 1:3 with lines title 'u_bar0'\n\
             set output 'profiles.png'\nset xlabel 'xi'\nset ylabel 'rho'\nset logscale y\n\
             plot for [k=0:9] sprintf('profile_%d.csv', k) skip 1 using 1:2 with lines title sprintf('profile %d', k)\n"
                .to_string(),
        );
        Ok(())
    })
}

/// Case number, parameters, left state and per-label cell counts.
type CaseCensus = (u8, Params, State, Vec<(String, usize)>);

pub fn cmd_sweep(cfg: &RunConfig) -> Result<ResultBundle> {
    timed("sweep", Command::Sweep, cfg, |b| {
        let rc = &cfg.regions;
        let results: Vec<Result<CaseCensus>> = riemann::case_menu()
            .into_par_iter()
            .map(|(case, p, l)| {
                let g = riemann::rasterize_regions(l, &p, rc.window, rc.nx, rc.ny)?;
                let (_, legend) = region_tables(&g);
                let counts = legend.rows.iter().map(|r| (r[1].clone(), r[2].parse().expect("count"))).collect();
                Ok((case.0, p, l, counts))
            })
            .collect();
        let mut t = Table::new(&["case", "a", "rho_l", "u_l", "label", "count"]);
        for res in results {
            let (case, p, l, counts) = res?;
            b.summary += &format!("case {case:2} a = {:4} L = ({}, {}):", p.a, l.rho, l.u);
            for (lab, n) in counts {
                b.summary += &format!(" {lab}={n}");
                t.push(vec![case.to_string(), fmt_f64(p.a), fmt_f64(l.rho), fmt_f64(l.u), lab, n.to_string()]);
            }
            b.summary.push('\n');
        }
        b.tables.insert("sweep".into(), t);
        Ok(())
    })
}

pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<ResultBundle> {
    match cmd {
        Command::Classify => cmd_classify(cfg),
        Command::Regions => cmd_regions(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Gspt => cmd_gspt(cfg),
        Command::Sweep => cmd_sweep(cfg),
    }
}

/// Caps rayon's global pool from `RIEMANN_LAB_THREADS`.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RIEMANN_LAB_THREADS") {
        let n: usize = v.parse().map_err(|_| Error::Config(format!("RIEMANN_LAB_THREADS={v} is not a count")))?;
        if n == 0 {
            return Err(Error::Config("RIEMANN_LAB_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}
