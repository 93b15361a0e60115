//! Functional calculus of Hermitian frame operators: canonical dual windows,
//! tight windows and pseudo-inverse duals of frame sequences.
//!
//! The eigendecomposition is the primary calculus. `contour_apply` evaluates
//! the Cauchy integral `F(S) v = (1/2 pi i) \oint F(z) (z - S)^{-1} v dz` with the
//! trapezoidal rule on a circle and serves as an independent cross-check.
//!
//! For frames the circle has center `c = (A + B) / 2` and radius
//! `r = max(sqrt(B^2 - A^2) / 2, A / 4)`: it encloses `[A, B]` and stays in the
//! half-plane `Re z > A / 2`, so `z^{-1/2}` with its principal branch is
//! analytic on and inside it. Circles make the periodic trapezoid rule converge
//! geometrically in the node count.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GaborError, Result};
use crate::gabor::{self, FrameBounds, GaborOperator, Provenance};
use crate::lattice::PhaseLattice;
use crate::linalg::{self, CMatrix};
use crate::signal::Signal;

/// Relative threshold below which an eigenvalue counts as zero.
pub const FRAME_TOL: f64 = 1e-10;

/// Eigenpairs of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    /// SHA-256 of the operator matrix.
    pub source: String,
}

impl SpectralDecomposition {
    pub fn lower(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn upper(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn bounds(&self) -> FrameBounds {
        FrameBounds { lower: self.lower(), upper: self.upper() }
    }

    /// `U diag(values) U*`.
    pub fn compose(&self, values: &[Complex64]) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, v) in values.iter().enumerate() {
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= v);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `U diag(values) U* v`.
    pub fn apply(&self, values: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        let x = DVector::from_column_slice(v);
        let mut coeff = self.eigenvectors.adjoint() * x;
        for (c, s) in coeff.iter_mut().zip(values) {
            *c *= s;
        }
        (&self.eigenvectors * coeff).iter().copied().collect()
    }

    pub fn reconstruction_residual(&self, s: &GaborOperator) -> f64 {
        let vals: Vec<Complex64> = self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)).collect();
        let rec = self.compose(&vals);
        linalg::fro_norm(&(rec - s.matrix())) / linalg::fro_norm(s.matrix()).max(1e-300)
    }
}

pub fn matrix_hash(m: &CMatrix) -> String {
    let mut hasher = Sha256::new();
    hasher.update((m.nrows() as u64).to_le_bytes());
    hasher.update((m.ncols() as u64).to_le_bytes());
    for z in m.iter() {
        hasher.update(z.re.to_le_bytes());
        hasher.update(z.im.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

pub fn hermitian_eig(s: &GaborOperator) -> Result<SpectralDecomposition> {
    if !s.hermitian() {
        return Err(GaborError::InvalidOperator("eigendecomposition needs a Hermitian operator".into()));
    }
    let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(s.matrix());
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, source: matrix_hash(s.matrix()) })
}

/// Functions that can be applied to a Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HoloFunctionSpec {
    Inverse,
    /// Principal branch, cut along `(-inf, 0]`.
    InverseSqrt,
    Identity,
    /// `0` on `[0, eps/2)`, `1/z` on `[eps, inf)`.
    PseudoInverse { eps: f64 },
    /// `p(z) / q(z)` with real coefficients in ascending powers.
    Rational { num: Vec<f64>, den: Vec<f64> },
}

fn poly(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

impl HoloFunctionSpec {
    /// Value at a point of the complex plane (the analytic branch used on contours).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            HoloFunctionSpec::Inverse | HoloFunctionSpec::PseudoInverse { .. } => 1.0 / z,
            HoloFunctionSpec::InverseSqrt => 1.0 / z.sqrt(),
            HoloFunctionSpec::Identity => z,
            HoloFunctionSpec::Rational { num, den } => poly(num, z) / poly(den, z),
        }
    }

    /// Value on a real eigenvalue, with the domain checked against `scale = max |eigenvalue|`.
    pub fn eval_spectral(&self, lambda: f64, scale: f64) -> Result<Complex64> {
        let tol = FRAME_TOL * scale;
        let out_of_domain =
            |what: &str| Err(GaborError::SpectrumDomain(format!("eigenvalue {lambda:e} outside the domain of {what}")));
        match self {
            HoloFunctionSpec::Inverse => {
                if lambda.abs() <= tol {
                    return out_of_domain("z^-1");
                }
                Ok(Complex64::new(1.0 / lambda, 0.0))
            }
            HoloFunctionSpec::InverseSqrt => {
                if lambda <= tol {
                    return out_of_domain("z^-1/2");
                }
                Ok(Complex64::new(1.0 / lambda.sqrt(), 0.0))
            }
            HoloFunctionSpec::Identity => Ok(Complex64::new(lambda, 0.0)),
            HoloFunctionSpec::PseudoInverse { eps } => {
                if *eps <= 0.0 {
                    return Err(GaborError::SpectrumDomain("pseudo-inverse needs eps > 0".into()));
                }
                if lambda.abs() < eps / 2.0 {
                    Ok(Complex64::new(0.0, 0.0))
                } else if lambda >= *eps * (1.0 - 1e-12) {
                    Ok(Complex64::new(1.0 / lambda, 0.0))
                } else {
                    out_of_domain("the thresholded inverse")
                }
            }
            HoloFunctionSpec::Rational { num, den } => {
                let z = Complex64::new(lambda, 0.0);
                let q = poly(den, z);
                let qscale = den.iter().enumerate().map(|(i, c)| c.abs() * lambda.abs().powi(i as i32)).sum::<f64>();
                if q.norm() <= 1e-12 * qscale.max(f64::MIN_POSITIVE) {
                    return out_of_domain("the rational function");
                }
                Ok(poly(num, z) / q)
            }
        }
    }
}

fn spectral_values(d: &SpectralDecomposition, f: &HoloFunctionSpec) -> Result<Vec<Complex64>> {
    let scale = d.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    d.eigenvalues.iter().map(|&l| f.eval_spectral(l, scale)).collect()
}

/// `F(S)` as a dense operator.
pub fn spectral_function_operator(
    s: &GaborOperator,
    d: &SpectralDecomposition,
    f: &HoloFunctionSpec,
) -> Result<GaborOperator> {
    let vals = spectral_values(d, f)?;
    let hermitian = vals.iter().all(|v| v.im == 0.0);
    Ok(GaborOperator::from_matrix(d.compose(&vals), *s.grid(), Provenance::Derived, hermitian))
}

/// `U F(Lambda) U* v`.
pub fn apply_spectral_function(s: &GaborOperator, f: &HoloFunctionSpec, v: &Signal) -> Result<Signal> {
    let d = hermitian_eig(s)?;
    apply_with(&d, f, v)
}

pub fn apply_with(d: &SpectralDecomposition, f: &HoloFunctionSpec, v: &Signal) -> Result<Signal> {
    let vals = spectral_values(d, f)?;
    v.with_values(d.apply(&vals, v.values()))
}

/// Circle used by [`contour_apply`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub center: f64,
    pub radius: f64,
}

impl Contour {
    /// Circle around `[a, b]` inside `Re z > a / 2` (requires `a > 0`).
    pub fn around(a: f64, b: f64) -> Self {
        let radius = ((b * b - a * a).max(0.0).sqrt() / 2.0).max(a / 4.0);
        Self { center: (a + b) / 2.0, radius }
    }

    /// Circle around `[eps, b]` whose leftmost point is `3 eps / 4`.
    pub fn around_upper_cluster(eps: f64, b: f64) -> Self {
        Self { center: (eps + b) / 2.0, radius: (b - eps) / 2.0 + eps / 4.0 }
    }

    pub fn node(&self, j: usize, nodes: usize) -> (Complex64, Complex64) {
        let theta = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
        let e = Complex64::from_polar(1.0, theta);
        (self.center + self.radius * e, self.radius * e)
    }

    pub fn encloses(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

fn rational_poles(den: &[f64]) -> Vec<Complex64> {
    let mut coeffs = den.to_vec();
    while coeffs.last().is_some_and(|c| *c == 0.0) {
        coeffs.pop();
    }
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let companion = DMatrix::<f64>::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -coeffs[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Trapezoidal quadrature of the Cauchy integral for `F(S) v` with `nodes` points.
pub fn contour_apply(s: &GaborOperator, f: &HoloFunctionSpec, v: &Signal, nodes: usize) -> Result<Signal> {
    let d = hermitian_eig(s)?;
    contour_apply_with(s, &d, f, v, nodes)
}

pub fn contour_apply_with(
    s: &GaborOperator,
    d: &SpectralDecomposition,
    f: &HoloFunctionSpec,
    v: &Signal,
    nodes: usize,
) -> Result<Signal> {
    if nodes == 0 {
        return Err(GaborError::IllPosedContour("at least one node is needed".into()));
    }
    // domain check on the spectrum first
    spectral_values(d, f)?;
    let (a, b) = (d.lower(), d.upper());
    let contour = match f {
        HoloFunctionSpec::PseudoInverse { eps } => Contour::around_upper_cluster(*eps, b),
        _ => {
            if a <= FRAME_TOL * b.abs() {
                return Err(GaborError::IllPosedContour(format!(
                    "spectrum reaches {a:e}; the contour must stay in Re z > A/2"
                )));
            }
            Contour::around(a, b)
        }
    };
    if let HoloFunctionSpec::Rational { den, .. } = f {
        if let Some(p) = rational_poles(den).into_iter().find(|p| (p - contour.center).norm() <= contour.radius * (1.0 + 1e-8)) {
            return Err(GaborError::IllPosedContour(format!("pole {p} lies inside the contour")));
        }
    }
    let min_dist = d
        .eigenvalues
        .iter()
        .map(|&l| ((l - contour.center).abs() - contour.radius).abs())
        .fold(f64::INFINITY, f64::min);
    if min_dist < 1e-8 * b.abs().max(f64::MIN_POSITIVE) {
        return Err(GaborError::IllPosedContour(format!("contour passes within {min_dist:e} of the spectrum")));
    }

    let l = s.dim();
    let rhs = DVector::from_column_slice(v.values());
    let terms: Vec<DVector<Complex64>> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let (z, dz) = contour.node(j, nodes);
            let shifted = CMatrix::identity(l, l) * z - s.matrix();
            let x = shifted.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(l));
            x * (f.eval(z) * dz)
        })
        .collect();
    let mut acc = DVector::<Complex64>::zeros(l);
    for t in &terms {
        acc += t;
    }
    acc /= Complex64::new(nodes as f64, 0.0);
    v.with_values(acc.iter().copied().collect())
}

fn frame_decomposition(g: &Signal, lattice: &PhaseLattice) -> Result<(GaborOperator, SpectralDecomposition)> {
    if g.len() > gabor::DENSE_LIMIT {
        return Err(GaborError::InvalidGrid(format!(
            "dense spectral calculus is limited to L <= {}",
            gabor::DENSE_LIMIT
        )));
    }
    let s = gabor::frame_operator(g, g, lattice)?;
    let d = hermitian_eig(&s)?;
    Ok((s, d))
}

fn ensure_frame(d: &SpectralDecomposition) -> Result<()> {
    let fb = d.bounds();
    if !fb.is_frame() {
        return Err(GaborError::NotAFrame { lower: fb.lower, tol: fb.frame_tolerance() });
    }
    Ok(())
}

/// `S^{-1} g`.
pub fn canonical_dual(g: &Signal, lattice: &PhaseLattice) -> Result<Signal> {
    let (_, d) = frame_decomposition(g, lattice)?;
    canonical_dual_with(&d, g)
}

pub fn canonical_dual_with(d: &SpectralDecomposition, g: &Signal) -> Result<Signal> {
    ensure_frame(d)?;
    apply_with(d, &HoloFunctionSpec::Inverse, g)
}

/// `S^{-1/2} g`.
pub fn tight_window(g: &Signal, lattice: &PhaseLattice) -> Result<Signal> {
    let (_, d) = frame_decomposition(g, lattice)?;
    tight_window_with(&d, g)
}

pub fn tight_window_with(d: &SpectralDecomposition, g: &Signal) -> Result<Signal> {
    ensure_frame(d)?;
    apply_with(d, &HoloFunctionSpec::InverseSqrt, g)
}

/// Threshold for the pseudo-inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsChoice {
    Auto,
    Value(f64),
}

/// Chooses `eps` at the largest ratio gap of the sorted spectrum whose lower end lies below `B/2`.
/// The cluster below the gap must be numerically zero.
pub fn auto_eps(eigenvalues: &[f64]) -> Result<f64> {
    let b = eigenvalues.iter().copied().fold(0.0, f64::max);
    let ambiguous = |message: String| GaborError::AmbiguousGap { message, spectrum: eigenvalues.to_vec() };
    if b <= 0.0 {
        return Err(ambiguous("operator has no positive spectrum".into()));
    }
    let tol = FRAME_TOL * b;
    let mut best: Option<(f64, usize)> = None;
    for i in 0..eigenvalues.len() - 1 {
        if eigenvalues[i] >= b / 2.0 {
            break;
        }
        // multiplicative gap, so a numerically-zero cluster stands out against any positive one
        let floor = f64::EPSILON * b;
        let gap = eigenvalues[i + 1].max(floor) / eigenvalues[i].max(floor);
        if best.is_none_or(|(g, _)| gap > g) {
            best = Some((gap, i));
        }
    }
    match best {
        None => Ok(eigenvalues[0]),
        Some((_, i)) => {
            if eigenvalues[i].abs() > tol {
                return Err(ambiguous(format!(
                    "cluster below the largest gap reaches {:e}, above the zero tolerance {tol:e}",
                    eigenvalues[i]
                )));
            }
            let eps = eigenvalues[i + 1];
            if eps < 10.0 * tol {
                return Err(ambiguous(format!("gap edge {eps:e} is within 10x of the tolerance {tol:e}")));
            }
            Ok(eps)
        }
    }
}

/// Pseudo-inverse dual together with the data needed to verify it.
#[derive(Debug, Clone)]
pub struct PseudoDual {
    pub gamma: Signal,
    pub eps: f64,
    /// Dimension of the range `H'` of the frame operator.
    pub rank: usize,
    pub decomposition: SpectralDecomposition,
    pub operator: GaborOperator,
}

impl PseudoDual {
    /// Orthogonal projector onto the span of eigenvectors with eigenvalue `>= eps`.
    pub fn range_projector(&self) -> CMatrix {
        let vals: Vec<Complex64> = self
            .decomposition
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(if l >= self.eps * (1.0 - 1e-12) { 1.0 } else { 0.0 }, 0.0))
            .collect();
        self.decomposition.compose(&vals)
    }

    /// `S^dagger`.
    pub fn pseudo_inverse(&self) -> Result<CMatrix> {
        let vals = spectral_values(&self.decomposition, &HoloFunctionSpec::PseudoInverse { eps: self.eps })?;
        Ok(self.decomposition.compose(&vals))
    }
}

pub fn pseudoinverse_dual(g: &Signal, lattice: &PhaseLattice, eps: EpsChoice) -> Result<Signal> {
    Ok(pseudoinverse_dual_detailed(g, lattice, eps)?.gamma)
}

pub fn pseudoinverse_dual_detailed(g: &Signal, lattice: &PhaseLattice, eps: EpsChoice) -> Result<PseudoDual> {
    let (s, d) = frame_decomposition(g, lattice)?;
    let eps = match eps {
        EpsChoice::Auto => auto_eps(&d.eigenvalues)?,
        EpsChoice::Value(e) => {
            if e <= 0.0 || d.eigenvalues.iter().any(|&l| l >= e / 2.0 && l < e * (1.0 - 1e-12)) {
                return Err(GaborError::AmbiguousGap {
                    message: format!("spectrum meets the excluded band [{:e}, {e:e})", e / 2.0),
                    spectrum: d.eigenvalues.clone(),
                });
            }
            e
        }
    };
    let gamma = apply_with(&d, &HoloFunctionSpec::PseudoInverse { eps }, g)?;
    let rank = d.eigenvalues.iter().filter(|&&l| l >= eps * (1.0 - 1e-12)).count();
    Ok(PseudoDual { gamma, eps, rank, decomposition: d, operator: s })
}

/// Worst relative error of `sum_l <f, pi(l) gamma> pi(l) g` against `target f`
/// (`f` itself when `target` is `None`) over the probe signals.
pub fn duality_residual(
    g: &Signal,
    gamma: &Signal,
    lattice: &PhaseLattice,
    probes: &[Signal],
    target: Option<&CMatrix>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in probes {
        let rec = gabor::apply_frame_operator(gamma, g, lattice, f)?;
        let want = match target {
            Some(p) => f.with_values(linalg::mat_vec(p, f.values()))?,
            None => f.clone(),
        };
        worst = worst.max((&rec - &want).norm() / f.norm().max(1e-300));
    }
    Ok(worst)
}

/// `||S_{L,g} - Id|| / ||Id||` in the Frobenius norm.
pub fn parseval_residual(g: &Signal, lattice: &PhaseLattice) -> Result<f64> {
    let s = gabor::frame_operator(g, g, lattice)?;
    let l = g.len();
    Ok(linalg::relative_residual(s.matrix(), &CMatrix::identity(l, l)))
}
