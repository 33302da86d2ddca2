//! Delta-shock speeds, weight growth and overcompressibility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eigenvalues, flux, Params, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaShock {
    pub left: State,
    pub right: State,
    pub speed: f64,
    /// d(zeta)/dt, constant in time.
    pub weight_rate: f64,
    pub u_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvercompressionCheck {
    pub lower: f64,
    pub upper: f64,
    pub speed: f64,
    pub admissible: bool,
}

/// Jumps [rho], [rho u], [f1], [f2] taken as left minus right.
pub fn jumps(l: State, r: State, p: &Params) -> Result<[f64; 4]> {
    let fl = flux(l, p)?;
    let fr = flux(r, p)?;
    Ok([l.rho - r.rho, l.m() - r.m(), fl[0] - fr[0], fl[1] - fr[1]])
}

/// (kappa1, kappa2) = (s[rho] - [f1], s[rho u] - [f2]).
pub fn kappa(l: State, r: State, s: f64, p: &Params) -> Result<(f64, f64)> {
    let [dr, dm, df1, df2] = jumps(l, r, p)?;
    Ok((s * dr - df1, s * dm - df2))
}

/// Real roots of s^2[rho] - s([rho u] + [f1]) + [f2] = 0, ascending.
pub fn delta_speed_neg_a(l: State, r: State, p: &Params) -> Result<Vec<f64>> {
    if p.a >= 0.0 {
        return Err(Error::InvalidParams(format!("a = {} is not negative", p.a)));
    }
    if l == r {
        return Err(Error::CoincidentStates { rho: l.rho });
    }
    let [dr, dm, df1, df2] = jumps(l, r, p)?;
    let (qa, qb, qc) = (dr, -(dm + df1), df2);
    if qa == 0.0 {
        if qb == 0.0 {
            return Err(Error::DegenerateQuadratic);
        }
        return Ok(vec![-qc / qb]);
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(Error::NoDeltaSpeed { disc });
    }
    // sign-matched form avoids cancellation
    let sq = disc.sqrt();
    let qq = -0.5 * (qb + if qb >= 0.0 { sq } else { -sq });
    let mut roots = if qq == 0.0 { vec![0.0, 0.0] } else { vec![qq / qa, qc / qq] };
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Both quadratic roots as continuous branches [c/q, q/a]; the second is infinite when [rho] = 0.
pub fn delta_speed_branches(l: State, r: State, p: &Params) -> Result<[f64; 2]> {
    let [dr, dm, df1, df2] = jumps(l, r, p)?;
    let (qb, qc) = (-(dm + df1), df2);
    let disc = qb * qb - 4.0 * dr * qc;
    if disc < 0.0 {
        return Err(Error::NoDeltaSpeed { disc });
    }
    let sq = disc.sqrt();
    let qq = -0.5 * (qb + if qb >= 0.0 { sq } else { -sq });
    if qq == 0.0 {
        return Err(Error::DegenerateQuadratic);
    }
    Ok([qc / qq, qq / dr])
}

/// Residual of the quadratic speed relation scaled by its coefficients.
pub fn quadratic_residual(l: State, r: State, s: f64, p: &Params) -> Result<f64> {
    let [dr, dm, df1, df2] = jumps(l, r, p)?;
    let scale = dr.abs() * s * s + (dm + df1).abs() * s.abs() + df2.abs();
    let res = s * s * dr - s * (dm + df1) + df2;
    Ok(if scale > 0.0 { res / scale } else { res })
}

pub fn delta_speed_pos_a(l: State, r: State, p: &Params) -> Result<f64> {
    let [_, dm, _, df2] = jumps(l, r, p)?;
    if dm == 0.0 {
        return Err(Error::NotInDeltaRegime);
    }
    Ok(df2 / dm)
}

pub fn weight_rate(l: State, r: State, s: f64, p: &Params) -> Result<f64> {
    let (k1, _) = kappa(l, r, s, p)?;
    let rate = -k1;
    if rate > 0.0 {
        Ok(rate)
    } else {
        Err(Error::NonGrowingDelta { rate })
    }
}

pub fn overcompression_check(l: State, r: State, s: f64, p: &Params) -> Result<OvercompressionCheck> {
    if l.u == 0.0 || r.u == 0.0 {
        return Err(Error::FullDegeneracy);
    }
    let (la_l, l0_l) = eigenvalues(l, p)?;
    let (la_r, l0_r) = eigenvalues(r, p)?;
    let lower = la_r.max(l0_r);
    let upper = la_l.min(l0_l);
    Ok(OvercompressionCheck { lower, upper, speed: s, admissible: lower < s && s < upper })
}

/// Candidate delta speeds: both quadratic roots for a < 0, s_+ for a > 0.
pub fn candidate_speeds(l: State, r: State, p: &Params) -> Result<Vec<f64>> {
    if p.a < 0.0 {
        delta_speed_neg_a(l, r, p)
    } else {
        Ok(vec![delta_speed_pos_a(l, r, p)?])
    }
}

/// Admissible constant-speed delta shock joining `l` to `r`.
pub fn delta_shock(l: State, r: State, p: &Params) -> Result<DeltaShock> {
    let roots = candidate_speeds(l, r, p)?;
    let mut ok = Vec::new();
    for &s in &roots {
        if overcompression_check(l, r, s, p)?.admissible {
            ok.push(s);
        }
    }
    if ok.len() != 1 {
        return Err(Error::AmbiguousRootFinding { roots, admissible: ok.len() });
    }
    let s = ok[0];
    let rate = weight_rate(l, r, s, p)?;
    Ok(DeltaShock { left: l, right: r, speed: s, weight_rate: rate, u_delta: if p.a < 0.0 { s } else { 0.0 } })
}

/// Maximal absolute residuals of the four reduced shadow-wave equations over t = 1..10,
/// with zeta(t) = weight_rate t split evenly between the two inner cells.
pub fn shadow_wave_residual(
    l: State,
    r: State,
    d: &DeltaShock,
    p: &Params,
    exponents: (f64, f64, f64, f64),
) -> Result<[f64; 4]> {
    let (k, beta, gamma, delta) = exponents;
    let (k1, k2) = kappa(l, r, d.speed, p)?;
    let s = d.speed;
    let mut out = [0.0f64; 4];
    let neg = k == 1.0 && beta == 1.0 && gamma == 0.0 && delta == 0.0;
    let pos = k == 1.0 && beta == 1.0 && gamma == -p.a && delta == -p.a;
    if !(neg && p.a < 0.0) && !(pos && p.a > 0.0) {
        return Err(Error::UnsupportedAnsatz(exponents));
    }
    for i in 1..=10 {
        let t = i as f64;
        let zeta = d.weight_rate * t;
        let res = if neg {
            let eta = d.u_delta;
            [-k1 - d.weight_rate, s * zeta - zeta * eta, -k2 - d.weight_rate * eta, s * zeta * eta - zeta * eta * eta]
        } else {
            let half = 0.5 * zeta;
            let eta = -s * (p.rho_bar / half).powf(p.a);
            let inner = 2.0 * half * eta * (half / p.rho_bar).powf(p.a);
            [-k1 - d.weight_rate, -s * zeta - inner, k2, 0.0]
        };
        for (o, v) in out.iter_mut().zip(res) {
            *o = o.max(v.abs());
        }
    }
    Ok(out)
}
