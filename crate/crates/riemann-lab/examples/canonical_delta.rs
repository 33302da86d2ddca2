//! Delta shock of the canonical pair, its viscous profiles and a finite-volume check.

use riemann_lab::delta::delta_shock;
use riemann_lab::gspt::{viscous_family, ProfileOptions};
use riemann_lab::llf::{delta_diagnostics, run, Grid, RunOptions, Scheme};
use riemann_lab::riemann::classify_region;
use riemann_lab::{Params, State};

fn main() -> riemann_lab::Result<()> {
    let p = Params::new(5.0, -1.5)?;
    let (l, r) = (State::new(3.0, 3.0), State::new(9.0, -9.0));
    println!("region: {:?}", classify_region(l, r, &p)?);
    let d = delta_shock(l, r, &p)?;
    println!("delta speed {:.12}, weight rate {:.12}", d.speed, d.weight_rate);

    let opts = RunOptions { t_end: 12.0, cfl: 0.45, scheme: Scheme::GlobalLf, renorm: None, snapshots: 24 };
    let traj = run(Grid::new(-100.0, 100.0, 2000)?, l, r, &p, &opts)?;
    let dd = delta_diagnostics(&traj)?;
    println!("finite volume: peak at x/t = {:.4}, mass slope {:.4}", dd.peak_xi, dd.linear_fit_slope);

    for prof in viscous_family(l, r, &p, &[1e-2, 3e-3, 1e-3], &ProfileOptions::default())? {
        println!(
            "eps {:.0e}: peak rho {:.2} at xi = {:.4}, excess mass {:.4}",
            prof.eps, prof.peak_rho, prof.peak_xi, prof.excess_mass
        );
    }
    Ok(())
}
