//! Acceptance run: one PASS/FAIL line per criterion, with measured runtime.

use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riemann_lab::delta::{
    candidate_speeds, delta_shock, delta_speed_neg_a, delta_speed_pos_a, kappa, overcompression_check,
    quadratic_residual,
};
use riemann_lab::gspt::{
    check_invariant_region, fixed_point_spectrum, heteroclinic_on_sphere, viscous_family, FixedPoint, ProfileOptions,
    Side, SPECTRUM_TOL,
};
use riemann_lab::llf::{delta_diagnostics, init_riemann, run, step, Grid, RunOptions, Scheme};
use riemann_lab::model::{eigenstructure, is_strictly_hyperbolic, jacobian};
use riemann_lab::riemann::{
    classify_case, classify_region, evaluate_selfsimilar, rasterize_regions, solve_riemann, CaseId, Cell, RegionKind,
    SelfSimilarValue, Window,
};
use riemann_lab::waves::{
    a_wave, contact0_branches, lax_admissible_a, shock_side, shock_speed_a, AWave, Side as WaveSide,
};
use riemann_lab::{Params, State};

/// Criteria that are expected to fail at desk scale; see the README.
const KNOWN_FAILING: &[u32] = &[10];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn menu_params() -> Vec<Params> {
    [-1.5, -1.0, -0.5, 0.5].iter().map(|&a| Params::new(5.0, a).unwrap()).collect()
}

fn canonical() -> (Params, State, State) {
    (Params::new(5.0, -1.5).unwrap(), State::new(3.0, 3.0), State::new(9.0, -9.0))
}

fn eigen_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ps = menu_params();
    let (mut n, mut worst, mut worst_gnl) = (0, 0.0f64, 0.0f64);
    while n < 1000 {
        let p = ps[n % ps.len()];
        let s = State::new(rng.random_range(0.05..15.0), rng.random_range(-10.0..10.0));
        if !is_strictly_hyperbolic(s, &p) {
            continue;
        }
        let e = eigenstructure(s, &p).unwrap();
        let j: Matrix2<f64> = jacobian(s, &p).unwrap();
        let mut num: Vec<f64> = j.complex_eigenvalues().iter().map(|z| z.re).collect();
        num.sort_by(f64::total_cmp);
        let mut closed = [e.lambda_a, e.lambda_0];
        closed.sort_by(f64::total_cmp);
        let scale = closed[0].abs().max(closed[1].abs());
        for k in 0..2 {
            worst = worst.max((num[k] - closed[k]).abs() / scale);
        }
        // gnl_0 vanishes identically; measure it against the size of its two cancelling products
        let grad = Vector2::new(-s.u * p.a * p.q(s.rho) / s.rho, 1.0 - p.q(s.rho));
        worst_gnl = worst_gnl.max(e.gnl_0.abs() / (grad.norm() * e.r_0.norm()));
        n += 1;
    }
    outcome(worst < 1e-10 && worst_gnl < 1e-14, format!("max rel err {worst:.2e}, max rel |gnl_0| {worst_gnl:.1e}"))
}

/// Expected shock and rarefaction sides for u > 0 and u < 0, in the order a < -1, -1 < a < 0, 0 < a.
fn tables() -> Outcome {
    use WaveSide::{Left, Right};
    let shocks = [[Right, Left, Right], [Left, Right, Left]];
    let rarefactions = [[Left, Right, Left], [Right, Left, Right]];
    let mut matched = 0;
    for (row, u) in [4.0, -4.0].into_iter().enumerate() {
        for (col, a) in [-1.5, -0.5, 0.5].into_iter().enumerate() {
            let p = Params::new(5.0, a).unwrap();
            let l = State::new(3.0, u);
            // sweep both sides of the left state and record which one carries admissible shocks
            let probe = |rho: f64| -> (bool, bool) {
                let r = State::new(rho, u);
                let lax = lax_admissible_a(l, r, &p).unwrap();
                let rare = matches!(a_wave(l, r, &p).unwrap(), AWave::Rarefaction(_));
                (lax, rare)
            };
            let below: Vec<_> = (1..20).map(|k| probe(3.0 * k as f64 / 20.0)).collect();
            let above: Vec<_> = (1..20).map(|k| probe(3.0 + 10.0 * k as f64 / 20.0)).collect();
            let side_of = |pick: fn(&(bool, bool)) -> bool| {
                let lo = below.iter().all(pick) && !above.iter().any(pick);
                let hi = above.iter().all(pick) && !below.iter().any(pick);
                match (lo, hi) {
                    (true, false) => Some(Left),
                    (false, true) => Some(Right),
                    _ => None,
                }
            };
            let s_side = side_of(|c| c.0);
            let r_side = side_of(|c| c.1);
            matched += (s_side == Some(shocks[row][col]) && shock_side(a, u).ok() == s_side) as usize;
            matched += (r_side == Some(rarefactions[row][col])) as usize;
        }
    }
    outcome(matched == 12, format!("{matched}/12 side assignments"))
}

fn delta_speeds() -> Outcome {
    let (p, l, r) = canonical();
    let roots = delta_speed_neg_a(l, r, &p).unwrap();
    let admissible: Vec<f64> =
        roots.iter().copied().filter(|&s| overcompression_check(l, r, s, &p).unwrap().admissible).collect();
    let resid = admissible.first().map(|&s| quadratic_residual(l, r, s, &p).unwrap().abs()).unwrap_or(f64::INFINITY);
    // high-precision oracles
    let root_ok = admissible.len() == 1 && (admissible[0] - -4.607695154586736).abs() < 1e-12;
    let spurious_ok = roots.iter().any(|&s| (s - -16.574648779824275).abs() < 1e-11);
    let rate_ok = (delta_shock(l, r, &p).unwrap().weight_rate - 9.447892678945653).abs() < 1e-11;
    let pp = Params::new(5.0, 0.5).unwrap();
    let (lp, rp) = (State::new(8.0, -4.0), State::new(10.0, 5.0));
    let sp = delta_speed_pos_a(lp, rp, &pp).unwrap();
    let (k1, k2) = kappa(lp, rp, sp, &pp).unwrap();
    let pos_ok = (sp - -0.84932651698357).abs() < 1e-12
        && (-k1 - 27.489179134842868).abs() < 1e-10
        && k2 == 0.0
        && delta_shock(lp, rp, &pp).is_ok();
    outcome(
        roots.len() == 2 && root_ok && spurious_ok && resid < 1e-8 && rate_ok && pos_ok,
        format!(
            "{} real roots, {} admissible, residual {resid:.1e}, s_+ = {sp:.12}, kappa_2 = {k2}",
            roots.len(),
            admissible.len()
        ),
    )
}

fn region_map() -> Outcome {
    let p = Params::new(5.0, -1.5).unwrap();
    let l = State::new(3.0, 4.0);
    let window = Window { rho_min: 0.0, rho_max: 15.0, u_min: -10.0, u_max: 10.0 };
    let g = rasterize_regions(l, &p, window, 300, 400).unwrap();
    let mirror = contact0_branches(l, &p).unwrap().mirror;
    let (mut n_iv, mut iv_bad, mut n_cls, mut cls_fail) = (0usize, 0usize, 0usize, 0usize);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let Cell::Region(lab) = g.get(i, j) else { continue };
            let r = g.center(i, j);
            let admissible = candidate_speeds(l, r, &p)
                .map(|ss| ss.iter().any(|&s| overcompression_check(l, r, s, &p).map(|c| c.admissible).unwrap_or(false)))
                .unwrap_or(false);
            match lab.kind {
                RegionKind::IV => {
                    n_iv += 1;
                    let below_mirror = mirror.contains(r.rho) && r.u < mirror.eval(r.rho, &p);
                    if !(admissible && below_mirror) {
                        iv_bad += 1;
                    }
                }
                RegionKind::Ia | RegionKind::I0 | RegionKind::IIa | RegionKind::II0 => {
                    n_cls += 1;
                    cls_fail += !admissible as usize;
                }
                _ => {}
            }
        }
    }
    let frac = cls_fail as f64 / n_cls.max(1) as f64;
    outcome(
        n_iv > 0 && iv_bad == 0 && frac >= 0.99,
        format!("{n_iv} IV cells ({iv_bad} off), I/II failing overcompression {:.2}%", 100.0 * frac),
    )
}

/// L1 density error against the exact solution and the interpolated mid-level crossing.
fn llf_error(n: usize, l: State, r: State, p: &Params, t: f64) -> (f64, f64, f64) {
    let g = Grid::new(-100.0, 100.0, n).unwrap();
    let opts = RunOptions { t_end: t, cfl: 0.45, scheme: Scheme::GlobalLf, renorm: None, snapshots: 1 };
    let f = run(g, l, r, p, &opts).unwrap().snapshots.pop().unwrap();
    let ws = solve_riemann(l, r, p).unwrap();
    let mid = 0.5 * (l.rho + r.rho);
    let (mut err, mut xs) = (0.0, f64::NAN);
    for i in 0..n {
        let x = g.center(i);
        let exact = match evaluate_selfsimilar(&ws, x / t, p) {
            SelfSimilarValue::State(s) => s.rho,
            _ => f64::NAN,
        };
        err += (f.rho[i] - exact).abs() * g.dx();
        if i > 0 && (f.rho[i - 1] - mid) * (f.rho[i] - mid) <= 0.0 && f.rho[i - 1] != f.rho[i] {
            let x0 = g.center(i - 1);
            xs = x0 + (mid - f.rho[i - 1]) / (f.rho[i] - f.rho[i - 1]) * (x - x0);
        }
    }
    (err, xs, g.dx())
}

fn llf_classical() -> Outcome {
    let p = Params::new(5.0, -1.5).unwrap();
    let (l, r) = (State::new(3.0, -4.0), State::new(1.0, -4.0));
    let case_ok =
        classify_case(l, &p).unwrap() == CaseId(1) && classify_region(l, r, &p).unwrap().kind == RegionKind::Ia;
    let t = 5.0;
    let s = shock_speed_a(l.rho, r.rho, l.u, &p).unwrap();
    let (e1, _, _) = llf_error(1000, l, r, &p, t);
    let start = Instant::now();
    let (e2, xs, dx) = llf_error(2000, l, r, &p, t);
    let run_time = start.elapsed();
    let (e4, _, _) = llf_error(4000, l, r, &p, t);
    let cells = (xs - s * t).abs() / dx;
    let (q1, q2) = (e1 / e2, e2 / e4);
    outcome(
        case_ok && cells <= 2.0 && q1 >= 1.5 && q2 >= 1.5 && run_time < Duration::from_secs(30),
        format!("shock off by {cells:.2} cells, L1 ratios {q1:.2} and {q2:.2}"),
    )
}

fn llf_delta() -> Outcome {
    let (p, l, r) = canonical();
    let d = delta_shock(l, r, &p).unwrap();
    let g = Grid::new(-100.0, 100.0, 2000).unwrap();
    let opts = RunOptions { t_end: 12.0, cfl: 0.45, scheme: Scheme::GlobalLf, renorm: None, snapshots: 24 };
    let traj = run(g, l, r, &p, &opts).unwrap();
    let dd = delta_diagnostics(&traj).unwrap();
    let pos = (dd.peak_xi - d.speed).abs() / d.speed.abs();
    let slope = (dd.linear_fit_slope - d.weight_rate).abs() / d.weight_rate;
    outcome(
        pos <= 0.05 && slope <= 0.15 && !traj.boundary_contaminated,
        format!(
            "peak xi {:.4} vs {:.4}, mass slope {:.3} vs {:.3}",
            dd.peak_xi, d.speed, dd.linear_fit_slope, d.weight_rate
        ),
    )
}

fn spectra() -> Outcome {
    let pn = Params::new(5.0, -1.5).unwrap();
    let pp = Params::new(5.0, 0.5).unwrap();
    let mut worst = 0.0f64;
    let mut ok = true;
    for (which, p) in [
        (FixedPoint::NegAPlus1, pn),
        (FixedPoint::NegAMinus1, pn),
        (FixedPoint::PosAPlus1, pp),
        (FixedPoint::PosAMinus1, pp),
    ] {
        match fixed_point_spectrum(which, &p) {
            Ok(rep) => worst = worst.max(rep.max_error),
            Err(_) => ok = false,
        }
    }
    outcome(ok && worst <= SPECTRUM_TOL, format!("max spectrum error {worst:.1e}"))
}

fn invariant_regions() -> Outcome {
    let (p, l, r) = canonical();
    let s_can = delta_shock(l, r, &p).unwrap().speed;
    let s_5 = delta_shock(State::new(5.0, 3.0), r, &p).unwrap().speed;
    let s_7 = delta_shock(State::new(7.0, 3.0), State::new(5.0, -3.0), &p).unwrap().speed;
    let checks = [
        (Side::Left, l, s_can),
        (Side::Right, r, s_can),
        (Side::Left, State::new(5.0, 3.0), s_5),
        (Side::Left, State::new(7.0, 3.0), s_7),
        (Side::Right, State::new(5.0, -3.0), s_7),
    ];
    let mut passed = 0;
    for (side, anchor, s) in checks {
        passed += check_invariant_region(side, anchor, s, &p, 512).is_ok() as usize;
    }
    outcome(passed == checks.len(), format!("{passed}/{} configurations with an invariant wedge", checks.len()))
}

fn heteroclinic() -> Outcome {
    let mut ok = true;
    let mut text = Vec::new();
    for (a, from, to) in [(-1.5, 1.0, -1.0), (0.5, -1.0, 1.0)] {
        let p = Params::new(5.0, a).unwrap();
        match heteroclinic_on_sphere(&p) {
            Ok(o) => {
                let ends = (o.start_u - from).abs() < 1e-6 && (o.end_u - to).abs() < 1e-5;
                ok &= ends && o.monotone && o.max_sphere_error < 1e-8;
                text.push(format!(
                    "a={a}: {:+.6} -> {:+.6}, sphere err {:.1e}",
                    o.start_u, o.end_u, o.max_sphere_error
                ));
            }
            Err(e) => {
                ok = false;
                text.push(format!("a={a}: {e}"));
            }
        }
    }
    outcome(ok, text.join("; "))
}

fn viscous_scaling() -> Outcome {
    let (p, l, r) = canonical();
    let fam = match viscous_family(l, r, &p, &[1e-2, 3e-3, 1e-3], &ProfileOptions::default()) {
        Ok(f) => f,
        Err(e) => return outcome(false, e.to_string()),
    };
    let factors: Vec<f64> = fam.windows(2).map(|w| w[1].peak_rho / w[0].peak_rho).collect();
    let plateau = fam.iter().map(|f| f.plateau_error_left.max(f.plateau_error_right)).fold(0.0, f64::max);
    let sign = fam.iter().map(|f| f.max_inner_sign).fold(f64::NEG_INFINITY, f64::max);
    let factors_ok = factors.iter().all(|&f| (2.5..=4.0).contains(&f));
    outcome(
        factors_ok && plateau < 1e-6 && sign < 0.0,
        format!(
            "peak factors {:?}, plateau err {plateau:.1e}, max inner sign {sign:.2}",
            factors.iter().map(|f| (f * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    )
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ps = menu_params();
    let mut worst = 0.0f64;
    let mut steps = 0;
    for k in 0..10 {
        let p = ps[k % ps.len()];
        let l = State::new(rng.random_range(0.5..12.0), rng.random_range(-8.0..8.0));
        let r = State::new(rng.random_range(0.5..12.0), rng.random_range(-8.0..8.0));
        let scheme = if k % 2 == 0 { Scheme::GlobalLf } else { Scheme::Rusanov };
        let mut f = init_riemann(Grid::new(-50.0, 50.0, 500).unwrap(), l, r);
        for _ in 0..200 {
            let (next, rep) = step(&f, &p, 0.45, scheme).unwrap();
            let dm = next.mass() - f.mass();
            let dq = next.momentum() - f.momentum();
            let scale_m = f.rho.iter().map(|v| v.abs()).sum::<f64>() * f.grid.dx();
            let scale_q = f.m.iter().map(|v| v.abs()).sum::<f64>() * f.grid.dx();
            worst = worst.max((dm - rep.boundary_flux[0]).abs() / scale_m);
            worst = worst.max((dq - rep.boundary_flux[1]).abs() / scale_q.max(f64::MIN_POSITIVE));
            f = next;
            steps += 1;
        }
    }
    outcome(worst < 1e-10, format!("{steps} steps, max rel imbalance {worst:.1e}"))
}

/// Number, name, runtime budget and check.
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        (1, "eigenstructure oracle", Duration::from_secs(1), eigen_oracle),
        (2, "shock and rarefaction sides", Duration::from_secs(1), tables),
        (3, "delta speed and admissibility", Duration::from_secs(1), delta_speeds),
        (4, "region map", Duration::from_secs(60), region_map),
        (5, "classical LLF validation", Duration::from_secs(90), llf_classical),
        (6, "delta LLF validation", Duration::from_secs(60), llf_delta),
        (7, "blow-up spectra", Duration::from_secs(1), spectra),
        (8, "invariant regions", Duration::from_secs(5), invariant_regions),
        (9, "heteroclinic orbit", Duration::from_secs(5), heteroclinic),
        (10, "viscous profile scaling", Duration::from_secs(120), viscous_scaling),
        (11, "conservation", Duration::from_secs(10), conservation),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= budget;
        let tag = if pass { "PASS" } else { "FAIL" };
        // written to the raw handle so the lines show up without --nocapture
        let _ = writeln!(
            std::io::stderr().lock(),
            "criterion {id:>2} {tag} [{:.1} ms / {} s] {name}: {}",
            1e3 * elapsed.as_secs_f64(),
            budget.as_secs(),
            o.detail
        );
        if pass == KNOWN_FAILING.contains(&id) {
            unexpected.push(id);
        }
    }
    assert!(unexpected.is_empty(), "criteria with unexpected outcome: {unexpected:?}");
}
