//! Executable operator identities: the fundamental identity, Janssen's
//! representation, the Bessel-norm duality between `L` and its adjoint, and the
//! derivative identity for `d/dx (S_{L,g,h} f)`.
//!
//! With `d(L) = |L| / L` and `Vol(L) = L / |L|` all of them hold exactly on `Z_L`
//! (the derivative identity up to spectral differentiation error).

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{GaborError, Result};
use crate::gabor::{self, GaborOperator, Provenance};
use crate::lattice::PhaseLattice;
use crate::linalg::{self, CMatrix};
use crate::signal::{spectral_derivative, Signal};

/// Either side of an identity.
#[derive(Debug, Clone)]
pub enum Side {
    Scalar(Complex64),
    Vector(Vec<Complex64>),
    Matrix(CMatrix),
}

impl Side {
    fn norm(&self) -> f64 {
        match self {
            Side::Scalar(z) => z.norm(),
            Side::Vector(v) => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            Side::Matrix(m) => linalg::fro_norm(m),
        }
    }

    fn distance(&self, other: &Side) -> f64 {
        match (self, other) {
            (Side::Scalar(a), Side::Scalar(b)) => (a - b).norm(),
            (Side::Vector(a), Side::Vector(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
            }
            (Side::Matrix(a), Side::Matrix(b)) => linalg::fro_norm(&(a - b)),
            _ => f64::INFINITY,
        }
    }

    fn summary(&self) -> Value {
        match self {
            Side::Scalar(z) => json!({ "re": z.re, "im": z.im }),
            Side::Vector(v) => json!({ "len": v.len(), "norm": self.norm() }),
            Side::Matrix(m) => json!({ "rows": m.nrows(), "cols": m.ncols(), "fro_norm": self.norm() }),
        }
    }
}

/// Result of evaluating both sides of an identity.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub lhs: Side,
    pub rhs: Side,
    /// `||lhs - rhs|| / max(||lhs||, ||rhs||, 1e-300)`.
    pub residual: f64,
    pub context: Value,
}

impl IdentityReport {
    pub fn new(lhs: Side, rhs: Side, context: Value) -> Self {
        let residual = lhs.distance(&rhs) / lhs.norm().max(rhs.norm()).max(1e-300);
        Self { lhs, rhs, residual, context }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lhs": self.lhs.summary(),
            "rhs": self.rhs.summary(),
            "residual": self.residual,
            "context": self.context,
        })
    }
}

fn same_grid(signals: &[&Signal]) -> Result<()> {
    let first = signals[0].grid();
    if signals.iter().any(|s| s.grid() != first) {
        return Err(GaborError::IncompatibleGrid("identity inputs live on different grids".into()));
    }
    Ok(())
}

fn lattice_context(lattice: &PhaseLattice) -> Value {
    json!({ "L": lattice.modulus(), "generators": lattice.generators(), "card": lattice.card() })
}

/// `sum_L <f, pi(l) g><pi(l) gamma, h> = d(L) sum_{L°} <gamma, pi(m) g><pi(m) f, h>`.
pub fn fundamental_identity_check(
    f: &Signal,
    g: &Signal,
    h: &Signal,
    gamma: &Signal,
    lattice: &PhaseLattice,
) -> Result<IdentityReport> {
    same_grid(&[f, g, h, gamma])?;
    let adj = lattice.adjoint();
    let d = lattice.geometry().density_f64();
    let a1 = gabor::analysis(g, lattice, f)?;
    let a2 = gabor::analysis(gamma, lattice, h)?;
    let lhs: Complex64 = a1.iter().zip(&a2).map(|(x, y)| x * y.conj()).sum();
    let b1 = gabor::analysis(g, &adj, gamma)?;
    let b2 = gabor::analysis(f, &adj, h)?;
    let rhs: Complex64 = b1.iter().zip(&b2).map(|(x, y)| x * y.conj()).sum::<Complex64>() * d;
    Ok(IdentityReport::new(Side::Scalar(lhs), Side::Scalar(rhs), lattice_context(lattice)))
}

/// `d(L) sum_{m in L°} <h, pi(m) g> pi(m)`.
pub fn janssen_operator(g: &Signal, h: &Signal, lattice: &PhaseLattice) -> Result<GaborOperator> {
    same_grid(&[g, h])?;
    let l = g.len();
    let adj = lattice.adjoint();
    let d = lattice.geometry().density_f64();
    let coeffs = gabor::analysis(g, &adj, h)?;
    let phases = gabor::PhaseTable::new(l);
    let mut mat = CMatrix::zeros(l, l);
    for (&[a, b], c) in adj.points().iter().zip(&coeffs) {
        let c = c * d;
        for y in 0..l {
            mat[((y + a) % l, y)] += c * phases.at(b * y);
        }
    }
    Ok(GaborOperator::from_matrix(mat, *g.grid(), Provenance::Janssen, g == h)
        .with_lattice(lattice)
        .with_window_hash(g.content_hash()))
}

/// Direct-sum vs Janssen assembly of `S_{L,g,h}`.
pub fn janssen_check(g: &Signal, h: &Signal, lattice: &PhaseLattice) -> Result<IdentityReport> {
    let direct = gabor::frame_operator(g, h, lattice)?;
    let janssen = janssen_operator(g, h, lattice)?;
    Ok(IdentityReport::new(
        Side::Matrix(direct.into_matrix()),
        Side::Matrix(janssen.into_matrix()),
        lattice_context(lattice),
    ))
}

/// `||C_{L°,g}||` against `Vol(L)^{1/2} ||C_{L,g}||`.
pub fn cnorm_ratio_check(g: &Signal, lattice: &PhaseLattice) -> Result<IdentityReport> {
    if g.is_zero() {
        return Err(GaborError::DegenerateInput("window is zero".into()));
    }
    let adj = lattice.adjoint();
    let lhs = gabor::bessel_norm(g, &adj)?;
    let vol = lattice.geometry().volume_f64();
    let rhs = vol.sqrt() * gabor::bessel_norm(g, lattice)?;
    let mut ctx = lattice_context(lattice);
    ctx["volume"] = json!(vol);
    Ok(IdentityReport::new(
        Side::Scalar(Complex64::new(lhs, 0.0)),
        Side::Scalar(Complex64::new(rhs, 0.0)),
        ctx,
    ))
}

/// Coefficient sequences appearing in the derivative identity.
#[derive(Debug, Clone)]
pub struct DerivativeData {
    /// `<h', pi(m) g> + <h, pi(m) g'>` on the adjoint lattice, in its point order.
    pub dj: Vec<Complex64>,
    /// `<f', pi(l) g> + <f, pi(l) g'>` on the lattice, in its point order.
    pub clambda: Vec<Complex64>,
}

/// `(<h', pi(m) g> + <h, pi(m) g'>)_{m in adjoint}`.
pub fn dj_vector(g: &Signal, h: &Signal, adjoint: &PhaseLattice) -> Result<Vec<Complex64>> {
    same_grid(&[g, h])?;
    let dg = spectral_derivative(g)?;
    let dh = spectral_derivative(h)?;
    let first = gabor::analysis(g, adjoint, &dh)?;
    let second = gabor::analysis(&dg, adjoint, h)?;
    Ok(first.iter().zip(&second).map(|(a, b)| a + b).collect())
}

pub fn derivative_data(
    f: &Signal,
    g: &Signal,
    h: &Signal,
    lattice: &PhaseLattice,
) -> Result<DerivativeData> {
    let dj = dj_vector(g, h, &lattice.adjoint())?;
    let clambda = dj_vector(g, f, lattice)?;
    Ok(DerivativeData { dj, clambda })
}

/// `(S f)'` against `S(f') + d(L) C*_{L°,f} d_j`.
pub fn derivative_identity_residual(
    f: &Signal,
    g: &Signal,
    h: &Signal,
    lattice: &PhaseLattice,
) -> Result<IdentityReport> {
    same_grid(&[f, g, h])?;
    let adj = lattice.adjoint();
    let d = lattice.geometry().density_f64();
    let sf = gabor::apply_frame_operator(g, h, lattice, f)?;
    let lhs = spectral_derivative(&sf)?;
    let sdf = gabor::apply_frame_operator(g, h, lattice, &spectral_derivative(f)?)?;
    let dj: Vec<Complex64> = dj_vector(g, h, &adj)?.into_iter().map(|z| z * d).collect();
    let corr = gabor::synthesis(f, &adj, &dj)?;
    let rhs = &sdf + &corr;
    let w = f.grid().weight().sqrt();
    let scale = |s: &Signal| s.values().iter().map(|z| z * w).collect::<Vec<_>>();
    let mut ctx = lattice_context(lattice);
    ctx["T"] = json!(f.grid().extent());
    Ok(IdentityReport::new(Side::Vector(scale(&lhs)), Side::Vector(scale(&rhs)), ctx))
}
