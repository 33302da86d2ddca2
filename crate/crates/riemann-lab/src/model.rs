//! Fluxes, Jacobian and eigenstructure of
//!
//! ```text
//! rho_t + (rho u phi)_x = 0,   (rho u)_t + (rho u^2 phi)_x = 0,   phi = 1 - (rho/rho_bar)^a
//! ```

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for the degeneracy loci.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub rho_bar: f64,
    pub a: f64,
}

impl Params {
    pub fn new(rho_bar: f64, a: f64) -> Result<Self> {
        let p = Params { rho_bar, a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_bar > 0.0 && self.rho_bar.is_finite()) {
            return Err(Error::InvalidParams(format!("rho_bar = {} must be positive", self.rho_bar)));
        }
        if self.a == 0.0 || !self.a.is_finite() {
            return Err(Error::InvalidParams(format!("a = {} must be nonzero", self.a)));
        }
        Ok(())
    }

    /// (rho/rho_bar)^a for rho > 0.
    pub fn q(&self, rho: f64) -> f64 {
        (self.a * (rho / self.rho_bar).ln()).exp()
    }

    /// rho (rho/rho_bar)^a = rho^(a+1)/rho_bar^a, finite at rho = 0 when a > -1.
    pub fn rho_q(&self, rho: f64) -> Result<f64> {
        if rho > 0.0 {
            return Ok(self.rho_bar * ((self.a + 1.0) * (rho / self.rho_bar).ln()).exp());
        }
        if self.a > -1.0 {
            Ok(0.0)
        } else {
            Err(Error::DegenerateFlux { rho, a: self.a })
        }
    }

    /// Mobility factor 1 - (rho/rho_bar)^a.
    pub fn phi(&self, rho: f64) -> f64 {
        1.0 - self.q(rho)
    }

    /// Density where lambda_a vanishes (a > -1 only).
    pub fn rho_lambda_a_zero(&self) -> Option<f64> {
        (self.a > -1.0).then(|| self.rho_bar * (1.0 / (self.a + 1.0)).powf(1.0 / self.a))
    }

    pub fn a_is_minus_one(&self) -> bool {
        (self.a + 1.0).abs() <= 1e-12
    }

    /// Tolerance band used to decide membership of rho = rho_bar.
    pub fn on_critical(&self, rho: f64) -> bool {
        (rho - self.rho_bar).abs() <= 1e-9 * self.rho_bar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub rho: f64,
    pub u: f64,
}

impl State {
    pub const fn new(rho: f64, u: f64) -> Self {
        State { rho, u }
    }

    pub fn m(&self) -> f64 {
        self.rho * self.u
    }

    pub fn to_conserved(&self) -> ConservedState {
        ConservedState { rho: self.rho, m: self.rho * self.u }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedState {
    pub rho: f64,
    pub m: f64,
}

impl ConservedState {
    pub fn to_primitive(&self) -> State {
        let u = if self.rho > 0.0 { self.m / self.rho } else { 0.0 };
        State { rho: self.rho, u }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenstructure {
    pub lambda_a: f64,
    pub lambda_0: f64,
    /// Eigenvectors in primitive (rho, u) coordinates.
    pub r_a: Vector2<f64>,
    pub r_0: Vector2<f64>,
    pub gnl_a: f64,
    pub gnl_0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Locus {
    Lambda0Zero,
    LambdaAZero,
    EqualEigenvalues,
    FullDegeneracy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub strictly_hyperbolic: bool,
    pub loci: Vec<Locus>,
}

/// (f1, f2) = (rho u phi, rho u^2 phi).
pub fn flux(s: State, p: &Params) -> Result<[f64; 2]> {
    let rq = p.rho_q(s.rho)?;
    let f1 = s.u * (s.rho - rq);
    if !f1.is_finite() {
        return Err(Error::DegenerateFlux { rho: s.rho, a: p.a });
    }
    Ok([f1, s.u * f1])
}

/// Jacobian of the flux with respect to the conserved variables (rho, m).
pub fn jacobian(s: State, p: &Params) -> Result<Matrix2<f64>> {
    if !(s.rho > 0.0) {
        return Err(Error::DegenerateFlux { rho: s.rho, a: p.a });
    }
    let q = p.q(s.rho);
    let (rho, u, a) = (s.rho, s.u, p.a);
    let m = rho * u;
    let dq = a * q / rho;
    Ok(Matrix2::new(-m * dq, 1.0 - q, -u * u * (1.0 - q) - u * m * dq, 2.0 * u * (1.0 - q)))
}

/// (lambda_a, lambda_0).
pub fn eigenvalues(s: State, p: &Params) -> Result<(f64, f64)> {
    if s.rho > 0.0 {
        let q = p.q(s.rho);
        return Ok((s.u * (1.0 - (p.a + 1.0) * q), s.u * (1.0 - q)));
    }
    if p.a > 0.0 && s.rho == 0.0 {
        return Ok((s.u, s.u));
    }
    Err(Error::DegenerateFlux { rho: s.rho, a: p.a })
}

pub fn lambda_a(s: State, p: &Params) -> f64 {
    s.u * (1.0 - (p.a + 1.0) * p.q(s.rho))
}

pub fn lambda_0(s: State, p: &Params) -> f64 {
    s.u * (1.0 - p.q(s.rho))
}

pub fn eigenstructure(s: State, p: &Params) -> Result<Eigenstructure> {
    if !(s.rho > 0.0) {
        return Err(Error::DegenerateFlux { rho: s.rho, a: p.a });
    }
    let (la, l0) = eigenvalues(s, p)?;
    let (rho, u, a) = (s.rho, s.u, p.a);
    let q = p.q(rho);
    let r_a = Vector2::new(1.0, 0.0);
    let r_0 = Vector2::new(rho * (1.0 - q), a * u * q);
    // gradients in (rho, u)
    let grad_a = Vector2::new(-u * (a + 1.0) * a * q / rho, 1.0 - (a + 1.0) * q);
    let grad_0 = Vector2::new(-u * a * q / rho, 1.0 - q);
    Ok(Eigenstructure { lambda_a: la, lambda_0: l0, r_a, r_0, gnl_a: grad_a.dot(&r_a), gnl_0: grad_0.dot(&r_0) })
}

pub fn classify_degeneracy(s: State, p: &Params, tol: f64) -> DegeneracyReport {
    let mut loci = Vec::new();
    if s.rho > 0.0 {
        let q = p.q(s.rho);
        if (1.0 - q).abs() <= tol {
            loci.push(Locus::Lambda0Zero);
        }
        if p.a > -1.0 && (1.0 - (p.a + 1.0) * q).abs() <= tol {
            loci.push(Locus::LambdaAZero);
        }
    }
    if p.a > 0.0 && s.rho / p.rho_bar <= tol {
        loci.push(Locus::EqualEigenvalues);
    }
    if s.u.abs() <= tol {
        loci.push(Locus::FullDegeneracy);
    }
    DegeneracyReport { strictly_hyperbolic: loci.is_empty(), loci }
}

pub fn is_strictly_hyperbolic(s: State, p: &Params) -> bool {
    s.rho > 0.0 && classify_degeneracy(s, p, DEGENERACY_TOL).strictly_hyperbolic
}
