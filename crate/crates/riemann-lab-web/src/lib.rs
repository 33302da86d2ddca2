//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Every operation returns a JSON string; the `*_json` functions hold the logic so they can be
//! tested natively.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use riemann_lab::delta::delta_shock;
use riemann_lab::llf::{run, Grid, RunOptions, Scheme};
use riemann_lab::riemann::{
    classify_case, evaluate_selfsimilar, rasterize_regions, solve, Cell, SelfSimilarValue, Window,
};
use riemann_lab::{Params, State};

fn params(rho_bar: f64, a: f64) -> Result<Params, String> {
    Params::new(rho_bar, a).map_err(|e| e.to_string())
}

pub fn classify_json(rho_bar: f64, a: f64, rho_l: f64, u_l: f64, rho_r: f64, u_r: f64) -> Result<String, String> {
    let p = params(rho_bar, a)?;
    let (l, r) = (State::new(rho_l, u_l), State::new(rho_r, u_r));
    let case = classify_case(l, &p).map_err(|e| e.to_string())?;
    let sol = solve(l, r, &p).map_err(|e| e.to_string())?;
    let waves: Vec<Value> = sol
        .waves
        .waves
        .iter()
        .map(|w| json!({ "tag": w.tag(), "speed_lo": w.speed_lo(), "speed_hi": w.speed_hi() }))
        .collect();
    let delta = delta_shock(l, r, &p).ok().map(|d| json!({ "speed": d.speed, "weight_rate": d.weight_rate }));
    Ok(json!({
        "case": case.0,
        "region": sol.label.to_string(),
        "waves": waves,
        "intermediate": sol.waves.intermediate_states.iter().map(|s| [s.rho, s.u]).collect::<Vec<_>>(),
        "delta": delta,
    })
    .to_string())
}

#[allow(clippy::too_many_arguments)]
/// Region raster as a legend of label names plus one legend index per cell (-1 for no label).
pub fn regions_json(
    rho_bar: f64,
    a: f64,
    rho_l: f64,
    u_l: f64,
    rho_max: f64,
    u_abs: f64,
    nx: usize,
    ny: usize,
) -> Result<String, String> {
    let p = params(rho_bar, a)?;
    let window = Window { rho_min: 0.0, rho_max, u_min: -u_abs, u_max: u_abs };
    let g = rasterize_regions(State::new(rho_l, u_l), &p, window, nx, ny).map_err(|e| e.to_string())?;
    let mut legend: Vec<String> = Vec::new();
    let cells: Vec<i32> = g
        .cells
        .iter()
        .map(|c| match c {
            Cell::Region(lab) => {
                let name = lab.to_string();
                let k = legend.iter().position(|n| *n == name).unwrap_or_else(|| {
                    legend.push(name);
                    legend.len() - 1
                });
                k as i32
            }
            _ => -1,
        })
        .collect();
    Ok(json!({ "nx": nx, "ny": ny, "window": [0.0, rho_max, -u_abs, u_abs], "legend": legend, "cells": cells })
        .to_string())
}

#[allow(clippy::too_many_arguments)]
/// Finite-volume density at `t_end` next to the exact self-similar density.
pub fn simulate_json(
    rho_bar: f64,
    a: f64,
    rho_l: f64,
    u_l: f64,
    rho_r: f64,
    u_r: f64,
    cells: usize,
    t_end: f64,
) -> Result<String, String> {
    let p = params(rho_bar, a)?;
    let (l, r) = (State::new(rho_l, u_l), State::new(rho_r, u_r));
    let g = Grid::new(-50.0, 50.0, cells).map_err(|e| e.to_string())?;
    let opts = RunOptions { t_end, cfl: 0.45, scheme: Scheme::GlobalLf, renorm: None, snapshots: 1 };
    let traj = run(g, l, r, &p, &opts).map_err(|e| e.to_string())?;
    let f = traj.snapshots.last().expect("final snapshot");
    let exact = solve(l, r, &p).ok().map(|sol| {
        (0..cells)
            .map(|i| match evaluate_selfsimilar(&sol.waves, g.center(i) / t_end, &p) {
                SelfSimilarValue::State(s) => Some(s.rho),
                _ => None,
            })
            .collect::<Vec<_>>()
    });
    let x: Vec<f64> = (0..cells).map(|i| g.center(i)).collect();
    Ok(json!({ "x": x, "rho": f.rho, "exact": exact, "steps": traj.reports.len() }).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify(rho_bar: f64, a: f64, rho_l: f64, u_l: f64, rho_r: f64, u_r: f64) -> Result<String, JsError> {
    js(classify_json(rho_bar, a, rho_l, u_l, rho_r, u_r))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn regions(
    rho_bar: f64,
    a: f64,
    rho_l: f64,
    u_l: f64,
    rho_max: f64,
    u_abs: f64,
    nx: usize,
    ny: usize,
) -> Result<String, JsError> {
    js(regions_json(rho_bar, a, rho_l, u_l, rho_max, u_abs, nx, ny))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    rho_bar: f64,
    a: f64,
    rho_l: f64,
    u_l: f64,
    rho_r: f64,
    u_r: f64,
    cells: usize,
    t_end: f64,
) -> Result<String, JsError> {
    js(simulate_json(rho_bar, a, rho_l, u_l, rho_r, u_r, cells, t_end))
}
