//! Localization norms of windows: gradient, weighted, Bessel-restricted and
//! modulation-space norms, and the uncertainty product.
//!
//! Positions are centered torus coordinates: `x` is the signed distance to a
//! chosen center, wrapped into `[-T/2, T/2)`. Frequencies are the symmetric DFT
//! frequencies `k / T`. On abstract grids every entry that needs physical units
//! is `NaN` (serialized as `null`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::gabor;
use crate::lattice::PhaseLattice;
use crate::signal::{signed_index, spectral_derivative, Grid, Signal};

/// Weight `m(x, omega) >= 1` on phase space.
#[derive(Clone)]
pub enum WeightSymbol {
    /// `1 + |omega|`
    M1,
    /// `1 + |x|`
    M2,
    /// `sqrt(1 + |x|^2 + |omega|^2)`
    M3,
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl WeightSymbol {
    pub fn unit() -> Self {
        WeightSymbol::Custom(Arc::new(|_, _| 1.0))
    }

    pub fn eval(&self, x: f64, omega: f64) -> f64 {
        match self {
            WeightSymbol::M1 => 1.0 + omega.abs(),
            WeightSymbol::M2 => 1.0 + x.abs(),
            WeightSymbol::M3 => (1.0 + x * x + omega * omega).sqrt(),
            WeightSymbol::Custom(f) => f(x, omega),
        }
    }
}

impl fmt::Debug for WeightSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSymbol::M1 => write!(f, "M1"),
            WeightSymbol::M2 => write!(f, "M2"),
            WeightSymbol::M3 => write!(f, "M3"),
            WeightSymbol::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    /// `||f'||`
    pub grad: f64,
    /// `||f^'||`, the gradient of the Fourier transform
    pub grad_fourier: f64,
    /// `||(1 + |x|) f||`
    pub weighted: f64,
    /// `||C_{L,f}||`
    pub bessel: f64,
    pub h1_lattice: f64,
    pub fath1_lattice: f64,
    pub l2w_lattice: f64,
    pub uncertainty: f64,
}

/// Fourier transform `f^(k/T) = (T/L) sum_n f[n] e^{-2 pi i (k/T)(x_n - c)}` on the
/// dual grid (`L` points, period `L/T`), bins in DFT order with symmetric `k`.
pub fn physical_fourier(f: &Signal, center: f64) -> Result<Signal> {
    let grid = f.grid();
    let t = grid.period().ok_or(GaborError::DerivativeUndefined)?;
    let l = f.len();
    let mut buf = f.values().to_vec();
    FftPlanner::new().plan_fft_forward(l).process(&mut buf);
    let w = grid.weight();
    for (k, z) in buf.iter_mut().enumerate() {
        let freq = signed_index(k, l) as f64 / t;
        *z *= Complex64::from_polar(w, 2.0 * PI * freq * center);
    }
    Signal::new(Grid::physical(l, l as f64 / t)?, buf)
}

/// `||omega f^||` with symmetric frequencies.
pub fn frequency_moment(f: &Signal) -> Result<f64> {
    let fh = physical_fourier(f, 0.0)?;
    let t = f.grid().extent();
    let l = f.len();
    let s: f64 = fh
        .values()
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let om = signed_index(k, l) as f64 / t;
            om * om * z.norm_sqr()
        })
        .sum();
    Ok((s / t).sqrt())
}

/// `||(x - c) f||` in centered torus coordinates.
pub fn position_moment(f: &Signal, center: f64) -> f64 {
    let grid = f.grid();
    let s: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(n, z)| {
            let x = grid.torus_offset(n, center);
            x * x * z.norm_sqr()
        })
        .sum();
    (grid.weight() * s).sqrt()
}

/// `||(1 + |x - c|) f||`.
pub fn weighted_norm(f: &Signal, center: f64) -> f64 {
    let grid = f.grid();
    let s: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(n, z)| {
            let m = 1.0 + grid.torus_offset(n, center).abs();
            m * m * z.norm_sqr()
        })
        .sum();
    (grid.weight() * s).sqrt()
}

/// `||d/d omega f^||` computed on the dual grid by spectral differentiation.
pub fn fourier_gradient(f: &Signal, center: f64) -> Result<f64> {
    let fh = physical_fourier(f, center)?;
    Ok(spectral_derivative(&fh)?.norm())
}

pub fn norm_report(f: &Signal, lattice: &PhaseLattice, center: f64) -> Result<NormReport> {
    let l2 = f.norm();
    let bessel = gabor::bessel_norm(f, lattice)?;
    if !f.grid().is_physical() {
        let nan = f64::NAN;
        return Ok(NormReport {
            l2,
            grad: nan,
            grad_fourier: nan,
            weighted: nan,
            bessel,
            h1_lattice: nan,
            fath1_lattice: nan,
            l2w_lattice: nan,
            uncertainty: nan,
        });
    }
    let grad = spectral_derivative(f)?.norm();
    let grad_fourier = fourier_gradient(f, center)?;
    let weighted = weighted_norm(f, center);
    let uncertainty = position_moment(f, center).powi(2) * frequency_moment(f)?.powi(2);
    Ok(NormReport {
        l2,
        grad,
        grad_fourier,
        weighted,
        bessel,
        h1_lattice: grad + bessel,
        fath1_lattice: grad + grad_fourier + bessel,
        l2w_lattice: weighted + bessel,
        uncertainty,
    })
}

/// `( (1/L) sum_{z in Z_L^2} |<f, pi(z) phi>|^2 m(z)^2 )^{1/2}` with `phi` normalized.
///
/// `phi` is assumed to share the center of `f`, so `pi(a, b) phi` sits at
/// offset `x = a T / L` (symmetric `a`) and frequency `omega = b / T`.
pub fn modulation_norm(f: &Signal, m: &WeightSymbol, phi: &Signal) -> Result<f64> {
    if f.grid() != phi.grid() {
        return Err(GaborError::IncompatibleGrid("signal and test window grids differ".into()));
    }
    if !f.grid().is_physical() {
        return Err(GaborError::DerivativeUndefined);
    }
    let pn = phi.norm();
    if pn == 0.0 {
        return Err(GaborError::DegenerateInput("test window is zero".into()));
    }
    let grid = f.grid();
    let (l, t, w) = (grid.len(), grid.extent(), grid.weight());
    let fft = FftPlanner::new().plan_fft_forward(l);
    let (fv, pv) = (f.values(), phi.values());
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    let mut total = 0.0;
    for a in 0..l {
        for (y, slot) in buf.iter_mut().enumerate() {
            *slot = fv[(y + a) % l] * pv[y].conj();
        }
        fft.process(&mut buf);
        let x = signed_index(a, l) as f64 * t / l as f64;
        for (b, z) in buf.iter().enumerate() {
            let om = signed_index(b, l) as f64 / t;
            let mv = m.eval(x, om);
            total += (z * (w / pn)).norm_sqr() * mv * mv;
        }
    }
    Ok((total / l as f64).sqrt())
}
