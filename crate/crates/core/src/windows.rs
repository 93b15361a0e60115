//! Named window families on a physical grid, unit norm, centered at `T/2`.
//!
//! On an abstract grid the profiles are drawn with the balanced scale
//! `T = sqrt(L)`, so a Gaussian has comparable spread in time and frequency.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::counterexample;
use crate::error::{GaborError, Result};
use crate::signal::{Grid, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    Gaussian,
    /// First Hermite function `x e^{-pi x^2}`.
    Hermite1,
    /// Quadratic B-spline, support width 3.
    Bspline2,
    /// Hat function, support width 2.
    Triangle,
    Delta,
    /// Window synthesized from the discontinuous Zak symbol of the divergence study.
    CounterexampleWindow,
}

impl WindowKind {
    pub const ALL: [WindowKind; 6] = [
        WindowKind::Gaussian,
        WindowKind::Hermite1,
        WindowKind::Bspline2,
        WindowKind::Triangle,
        WindowKind::Delta,
        WindowKind::CounterexampleWindow,
    ];

    /// The four smooth-or-H1 families used in duality and refinement sweeps.
    pub const FAMILIES: [WindowKind; 4] =
        [WindowKind::Gaussian, WindowKind::Hermite1, WindowKind::Bspline2, WindowKind::Triangle];

    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Gaussian => "gaussian",
            WindowKind::Hermite1 => "hermite1",
            WindowKind::Bspline2 => "bspline2",
            WindowKind::Triangle => "triangle",
            WindowKind::Delta => "delta",
            WindowKind::CounterexampleWindow => "counterexample-window",
        }
    }

    /// Profile as a function of the signed offset from the center.
    fn profile(self, u: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            WindowKind::Gaussian => (-PI * u * u).exp(),
            WindowKind::Hermite1 => u * (-PI * u * u).exp(),
            WindowKind::Bspline2 => {
                let a = u.abs();
                if a <= 0.5 {
                    0.75 - a * a
                } else if a <= 1.5 {
                    0.5 * (a - 1.5) * (a - 1.5)
                } else {
                    0.0
                }
            }
            WindowKind::Triangle => (1.0 - u.abs()).max(0.0),
            WindowKind::Delta | WindowKind::CounterexampleWindow => unreachable!(),
        }
    }

    pub fn build(self, grid: Grid) -> Result<Signal> {
        let l = grid.len();
        let raw = match self {
            WindowKind::Delta => Signal::delta(grid, l / 2),
            WindowKind::CounterexampleWindow => counterexample_window(grid)?,
            _ => {
                let scale = if grid.is_physical() { 1.0 } else { 1.0 / (l as f64).sqrt() };
                let c = grid.extent() / 2.0;
                let values = (0..l)
                    .map(|n| Complex64::new(self.profile(grid.torus_offset(n, c) * scale), 0.0))
                    .collect();
                Signal::new(grid, values)?
            }
        };
        let norm = raw.norm();
        if norm == 0.0 {
            return Err(GaborError::InvalidGrid(format!(
                "{} window vanishes on a grid of {l} samples",
                self.name()
            )));
        }
        Ok(raw.scaled(Complex64::new(1.0 / norm, 0.0)))
    }
}

/// Requires an integer period `T` dividing `L`; the symbol is sampled on an
/// `(L/T) x T` grid and the window is moved from the origin to the center.
fn counterexample_window(grid: Grid) -> Result<Signal> {
    let l = grid.len();
    let t = grid.extent();
    let cols = t.round() as usize;
    if (t - cols as f64).abs() > 1e-9 || cols == 0 || !l.is_multiple_of(cols) {
        return Err(GaborError::InvalidGrid(format!(
            "counterexample-window needs an integer period dividing L (L = {l}, T = {t})"
        )));
    }
    let g = counterexample::window_from_symbol(&counterexample::sample_f(l / cols, cols))?;
    let shifted = g.translate((l / 2) as i64);
    Signal::new(grid, shifted.into_values())
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WindowKind {
    type Err = GaborError;

    fn from_str(s: &str) -> Result<Self> {
        WindowKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GaborError::Parse(format!("unknown window '{s}'")))
    }
}
