//! Finite Zak transform on `Z_L` with `L = N * M`.
//!
//! `Zf(n, k) = M^{-1/2} sum_{m<M} f[(n - m N) mod L] e^{2 pi i m k / M}` for
//! `0 <= n < N`, `0 <= k < M`. The transform is quasi-periodic,
//! `Zf(n + N, k) = e^{2 pi i k / M} Zf(n, k)` and `Zf(n, k + M) = Zf(n, k)`,
//! and for `lambda = (aN, bM)` it turns `pi(lambda)` into multiplication by
//! `chi(n, k) = e^{2 pi i b n / N} e^{-2 pi i a k / M}`.
//!
//! On the critical lattice `NZ x MZ` the frame operator becomes multiplication
//! by `L w |Zg|^2`, where `w` is the grid weight.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{GaborError, Result};
use crate::gabor::{GaborOperator, Provenance};
use crate::lattice::{PhaseLattice, PhasePoint};
use crate::linalg::CMatrix;
use crate::signal::{Grid, Signal};

/// Zak transform values on the fundamental domain `{0..N} x {0..M}`, row-major in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZakImage {
    grid: Grid,
    n: usize,
    m: usize,
    values: Vec<Complex64>,
}

impl ZakImage {
    pub fn new(grid: Grid, n: usize, values: Vec<Complex64>) -> Result<Self> {
        let m = factor(grid.len(), n)?;
        if values.len() != grid.len() {
            return Err(GaborError::InvalidFactorization(format!(
                "expected {} Zak samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, n, m, values })
    }

    pub fn zeros(grid: Grid, n: usize) -> Result<Self> {
        Self::new(grid, n, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Time factor `N`.
    pub fn time_factor(&self) -> usize {
        self.n
    }

    /// Frequency factor `M = L / N`.
    pub fn freq_factor(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.values[n * self.m + k]
    }

    /// Value at arbitrary integer indices through the quasi-periodic extension.
    pub fn extended(&self, n: i64, k: i64) -> Complex64 {
        let (nn, mm) = (self.n as i64, self.m as i64);
        let q = n.div_euclid(nn);
        let r = n.rem_euclid(nn) as usize;
        let kr = k.rem_euclid(mm);
        let phase = 2.0 * PI * ((q.rem_euclid(mm) * kr) % mm) as f64 / mm as f64;
        Complex64::from_polar(1.0, phase) * self.get(r, kr as usize)
    }

    /// Norm with the same weighting as the signal it came from.
    pub fn norm(&self) -> f64 {
        (self.grid.weight() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Rows `n,k,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,k,re,im")?;
        for n in 0..self.n {
            for k in 0..self.m {
                let z = self.get(n, k);
                writeln!(w, "{n},{k},{:e},{:e}", z.re, z.im)?;
            }
        }
        Ok(())
    }

    /// Magnitude heatmap, `N` rows by `M` columns.
    pub fn write_pgm<W: Write>(&self, w: W) -> Result<()> {
        let mags: Vec<f64> = self.values.iter().map(|z| z.norm()).collect();
        crate::io::write_pgm(w, self.n, self.m, &mags)
    }
}

fn factor(l: usize, n: usize) -> Result<usize> {
    if n == 0 || !l.is_multiple_of(n) {
        return Err(GaborError::InvalidFactorization(format!("{n} does not divide {l}")));
    }
    Ok(l / n)
}

pub fn zak_forward(f: &Signal, n: usize) -> Result<ZakImage> {
    let l = f.len();
    let m = factor(l, n)?;
    let inv = FftPlanner::new().plan_fft_inverse(m);
    let s = 1.0 / (m as f64).sqrt();
    let fv = f.values();
    let mut values = vec![Complex64::new(0.0, 0.0); l];
    for (row, out) in values.chunks_mut(m).enumerate() {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = fv[(row + l - (j * n) % l) % l];
        }
        inv.process(out);
        out.iter_mut().for_each(|z| *z *= s);
    }
    Ok(ZakImage { grid: *f.grid(), n, m, values })
}

pub fn zak_inverse(z: &ZakImage) -> Signal {
    let (n, m) = (z.n, z.m);
    let l = n * m;
    let fwd = FftPlanner::new().plan_fft_forward(m);
    let s = 1.0 / (m as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); l];
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for row in 0..n {
        buf.copy_from_slice(&z.values[row * m..(row + 1) * m]);
        fwd.process(&mut buf);
        for (j, v) in buf.iter().enumerate() {
            out[(row + l - (j * n) % l) % l] = v * s;
        }
    }
    Signal::new(z.grid, out).expect("length N*M")
}

/// Largest deviation between the direct defining sum at indices in
/// `[0, 2N) x [0, 2M)` and the quasi-periodic extension of the stored values.
pub fn quasi_periodicity_residual(f: &Signal, n: usize) -> Result<f64> {
    let z = zak_forward(f, n)?;
    let (l, m) = (f.len(), z.m);
    let fv = f.values();
    let s = 1.0 / (m as f64).sqrt();
    let mut worst: f64 = 0.0;
    for nn in 0..2 * n {
        for k in 0..2 * m {
            let direct: Complex64 = (0..m)
                .map(|j| {
                    let idx = (nn + l * 2 - (j * n) % l) % l;
                    fv[idx] * Complex64::from_polar(1.0, 2.0 * PI * ((j * k) % m) as f64 / m as f64)
                })
                .sum::<Complex64>()
                * s;
            worst = worst.max((direct - z.extended(nn as i64, k as i64)).norm());
        }
    }
    Ok(worst)
}

/// Character `chi_lambda` for `lambda = (aN, bM)`.
pub fn shift_character(n: usize, m: usize, lambda: PhasePoint) -> Result<Vec<Complex64>> {
    let l = n * m;
    let (x, y) = (lambda[0] % l, lambda[1] % l);
    if x % n != 0 || y % m != 0 {
        return Err(GaborError::InvalidShift(format!(
            "({}, {}) is not in {n}Z x {m}Z",
            lambda[0], lambda[1]
        )));
    }
    let (a, b) = (x / n, y / m);
    let mut chi = Vec::with_capacity(l);
    for nn in 0..n {
        for k in 0..m {
            let t = 2.0 * PI * ((b * nn) % n) as f64 / n as f64;
            let f = 2.0 * PI * ((a * k) % m) as f64 / m as f64;
            chi.push(Complex64::from_polar(1.0, t - f));
        }
    }
    Ok(chi)
}

/// `||Z[pi(lambda) f] - chi_lambda Zf||` in the weighted norm.
pub fn shift_diagonalization_residual(f: &Signal, n: usize, lambda: PhasePoint) -> Result<f64> {
    let m = factor(f.len(), n)?;
    let chi = shift_character(n, m, lambda)?;
    let lhs = zak_forward(&crate::gabor::tf_shift(lambda, f), n)?;
    let rhs = zak_forward(f, n)?;
    let diff: f64 = lhs
        .values
        .iter()
        .zip(&rhs.values)
        .zip(&chi)
        .map(|((a, b), c)| (a - c * b).norm_sqr())
        .sum();
    Ok((f.grid().weight() * diff).sqrt())
}

fn critical_factor(lattice: &PhaseLattice, l: usize) -> Result<usize> {
    match lattice.separable_steps() {
        Some((a, b)) if lattice.modulus() == l && a * b == l => Ok(a),
        _ => Err(GaborError::UnsupportedLattice(
            "Zak diagonalization needs a critical separable lattice NZ x MZ with NM = L".into(),
        )),
    }
}

/// `||C_{L,g}||` for the critical lattice `NZ x MZ`, read off as `sqrt(L w) max |Zg|`.
pub fn bessel_bound_from_zak(g: &Signal, lattice: &PhaseLattice) -> Result<f64> {
    let n = critical_factor(lattice, g.len())?;
    let z = zak_forward(g, n)?;
    Ok((g.len() as f64 * g.grid().weight()).sqrt() * z.max_abs())
}

/// Zak-domain symbol `L w |Zg|^2` of the frame operator on a critical lattice.
pub fn frame_symbol(g: &Signal, lattice: &PhaseLattice) -> Result<ZakImage> {
    let n = critical_factor(lattice, g.len())?;
    let z = zak_forward(g, n)?;
    let c = g.len() as f64 * g.grid().weight();
    let values = z.values.iter().map(|v| Complex64::new(c * v.norm_sqr(), 0.0)).collect();
    Ok(ZakImage { values, ..z })
}

/// `S_{L,g} f` computed as `Z^{-1}(L w |Zg|^2 Zf)`.
pub fn apply_frame_operator_zak(g: &Signal, lattice: &PhaseLattice, f: &Signal) -> Result<Signal> {
    let sym = frame_symbol(g, lattice)?;
    let zf = zak_forward(f, sym.n)?;
    let values = zf.values.iter().zip(&sym.values).map(|(a, s)| a * s).collect();
    Ok(zak_inverse(&ZakImage { values, ..zf }))
}

/// Dense frame operator assembled column by column in the Zak domain.
pub fn frame_operator_zak(g: &Signal, lattice: &PhaseLattice) -> Result<GaborOperator> {
    let sym = frame_symbol(g, lattice)?;
    let l = g.len();
    let grid = *g.grid();
    let mut mat = CMatrix::zeros(l, l);
    for j in 0..l {
        let zf = zak_forward(&Signal::delta(grid, j), sym.n)?;
        let values = zf.values.iter().zip(&sym.values).map(|(a, s)| a * s).collect();
        let col = zak_inverse(&ZakImage { values, ..zf });
        for (i, v) in col.values().iter().enumerate() {
            mat[(i, j)] = *v;
        }
    }
    Ok(GaborOperator::from_matrix(mat, grid, Provenance::ZakDiagonal, true)
        .with_lattice(lattice)
        .with_window_hash(g.content_hash()))
}
