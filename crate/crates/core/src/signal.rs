//! Sample grids, complex signals, the unitary DFT and spectral differentiation.
//!
//! A [`Grid`] is either *abstract* (the cyclic group `Z_L` with unit weights) or
//! *physical* (the torus `R / TZ` sampled at `x_n = n T / L`). Inner products
//! carry the Riemann weight `T / L` on physical grids and weight 1 otherwise,
//! so that finite-group identities are exact in abstract mode while physical
//! mode approximates integrals over the real line.

use std::f64::consts::PI;
use std::io::{BufRead, Read, Write};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};

/// Uniform sampling grid on `Z_L` or on the torus of length `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    len: usize,
    period: Option<f64>,
    dim: usize,
}

impl Grid {
    /// `period = None` selects abstract mode (weight 1, `T` treated as `L`).
    pub fn new(len: usize, period: Option<f64>) -> Result<Self> {
        if len < 2 {
            return Err(GaborError::InvalidGrid(format!("L = {len} < 2")));
        }
        if let Some(t) = period {
            if !(t.is_finite() && t > 0.0) {
                return Err(GaborError::InvalidGrid(format!("T = {t} must be positive")));
            }
        }
        Ok(Self { len, period, dim: 1 })
    }

    pub fn abstract_group(len: usize) -> Result<Self> {
        Self::new(len, None)
    }

    pub fn physical(len: usize, period: f64) -> Result<Self> {
        Self::new(len, Some(period))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn is_physical(&self) -> bool {
        self.period.is_some()
    }

    /// Period length; `L` in abstract mode.
    pub fn extent(&self) -> f64 {
        self.period.unwrap_or(self.len as f64)
    }

    pub fn spacing(&self) -> f64 {
        self.extent() / self.len as f64
    }

    /// Quadrature weight of a single sample in inner products.
    pub fn weight(&self) -> f64 {
        self.spacing()
    }

    pub fn point(&self, n: usize) -> f64 {
        n as f64 * self.spacing()
    }

    /// Signed distance from `center` to sample `n` on the torus, in `[-T/2, T/2)`.
    pub fn torus_offset(&self, n: usize, center: f64) -> f64 {
        let t = self.extent();
        let d = self.point(n) - center;
        d - t * ((d + 0.5 * t) / t).floor()
    }

    /// Symmetric integer representative of `k` in `{-ceil(L/2)+1, ..., floor(L/2)}`.
    pub fn signed_index(&self, k: usize) -> i64 {
        signed_index(k % self.len, self.len)
    }

    /// Physical frequency of DFT bin `k` (cycles per unit length).
    pub fn frequency(&self, k: usize) -> f64 {
        self.signed_index(k) as f64 / self.extent()
    }

    fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(GaborError::IncompatibleGrid(format!("{self:?} vs {other:?}")))
        }
    }
}

pub(crate) fn signed_index(k: usize, len: usize) -> i64 {
    if k > len / 2 {
        k as i64 - len as i64
    } else {
        k as i64
    }
}

/// Complex samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GaborError::IncompatibleGrid(format!(
                "{} samples for a grid of length {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Unit impulse at sample `n` (unit sample value, not unit norm).
    pub fn delta(grid: Grid, n: usize) -> Self {
        let mut s = Self::zeros(grid);
        s.values[n % grid.len()] = Complex64::new(1.0, 0.0);
        s
    }

    /// `values[n] = rule(x_n)`; the rule must already be periodized or supported in `[0, T)`.
    pub fn sample<F>(grid: Grid, rule: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let values = (0..grid.len()).map(|n| rule(grid.point(n))).collect();
        Self { grid, values }
    }

    /// Real-valued convenience wrapper around [`Signal::sample`].
    pub fn sample_real<F>(grid: Grid, rule: F) -> Self
    where
        F: Fn(f64) -> f64,
    {
        Self::sample(grid, |x| Complex64::new(rule(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid, values)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.weight() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// `<self, other>`: linear in the first slot, conjugate-linear in the second.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Signal) -> Complex64 {
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.grid.weight()
    }

    pub fn scaled(&self, c: Complex64) -> Signal {
        Signal { grid: self.grid, values: self.values.iter().map(|z| z * c).collect() }
    }

    /// Weighted distance `||self - other||`.
    pub fn distance(&self, other: &Signal) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok((self - other).norm())
    }

    /// Circular translation by whole samples: `out[n] = self[n - shift]`.
    pub fn translate(&self, shift: i64) -> Signal {
        let l = self.len() as i64;
        let values = (0..l)
            .map(|n| self.values[(n - shift).rem_euclid(l) as usize])
            .collect();
        Signal { grid: self.grid, values }
    }

    pub fn conj(&self) -> Signal {
        Signal { grid: self.grid, values: self.values.iter().map(|z| z.conj()).collect() }
    }

    /// Pointwise map over sample index and value.
    pub fn map_indexed<F>(&self, f: F) -> Signal
    where
        F: Fn(usize, Complex64) -> Complex64,
    {
        let values = self.values.iter().enumerate().map(|(n, &z)| f(n, z)).collect();
        Signal { grid: self.grid, values }
    }

    /// Writes `index,re,im` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,re,im")?;
        for (n, z) in self.values.iter().enumerate() {
            writeln!(w, "{n},{:e},{:e}", z.re, z.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(grid: Grid, r: R) -> Result<Signal> {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut seen = 0usize;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(GaborError::Parse(format!("line {}: expected 3 columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| GaborError::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let n: usize = parts[0]
                .parse()
                .map_err(|e| GaborError::Parse(format!("line {}: {e}", lineno + 1)))?;
            if n >= grid.len() {
                return Err(GaborError::Parse(format!("index {n} out of range")));
            }
            values[n] = Complex64::new(parse(parts[1])?, parse(parts[2])?);
            seen += 1;
        }
        if seen != grid.len() {
            return Err(GaborError::Parse(format!("expected {} rows, found {seen}", grid.len())));
        }
        Signal::new(grid, values)
    }

    /// Little-endian f64 pairs `(re, im)` per sample.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        for z in &self.values {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(grid: Grid, mut r: R) -> Result<Signal> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 16 * grid.len() {
            return Err(GaborError::Parse(format!(
                "binary payload has {} bytes, expected {}",
                bytes.len(),
                16 * grid.len()
            )));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Signal::new(grid, values)
    }

    /// Hex SHA-256 of the binary payload together with the grid sidecar.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&self.grid).unwrap_or_default());
        for z in &self.values {
            hasher.update(z.re.to_le_bytes());
            hasher.update(z.im.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

impl Sub for &Signal {
    type Output = Signal;
    fn sub(self, rhs: &Signal) -> Signal {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in subtraction");
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
        Signal { grid: self.grid, values }
    }
}

impl Add for &Signal {
    type Output = Signal;
    fn add(self, rhs: &Signal) -> Signal {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in addition");
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect();
        Signal { grid: self.grid, values }
    }
}

impl Mul<Complex64> for &Signal {
    type Output = Signal;
    fn mul(self, rhs: Complex64) -> Signal {
        self.scaled(rhs)
    }
}

/// Unitary DFT `F f[k] = L^{-1/2} sum_n f[n] e^{-2 pi i n k / L}`; `inverse` selects the adjoint.
pub fn fourier_transform(f: &Signal, inverse: bool) -> Signal {
    let l = f.len();
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(l) } else { planner.plan_fft_forward(l) };
    let mut buf = f.values.clone();
    fft.process(&mut buf);
    let s = 1.0 / (l as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= s);
    Signal { grid: f.grid, values: buf }
}

/// Applies the Fourier multiplier `mult(k)` (bin index) to `f`.
pub(crate) fn fourier_multiplier<F>(f: &Signal, mult: F) -> Signal
where
    F: Fn(usize) -> Complex64,
{
    let l = f.len();
    let mut planner = FftPlanner::new();
    let mut buf = f.values.clone();
    planner.plan_fft_forward(l).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= mult(k) / l as f64;
    }
    planner.plan_fft_inverse(l).process(&mut buf);
    Signal { grid: f.grid, values: buf }
}

/// Derivative as the Fourier multiplier `2 pi i xi_k` with symmetric frequencies;
/// the Nyquist bin of even-length grids is zeroed.
pub fn spectral_derivative(f: &Signal) -> Result<Signal> {
    if !f.grid.is_physical() {
        return Err(GaborError::DerivativeUndefined);
    }
    let l = f.len();
    let grid = f.grid;
    Ok(fourier_multiplier(f, |k| {
        if l.is_multiple_of(2) && k == l / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, 2.0 * PI * grid.frequency(k))
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_construction() {
        let g = Grid::new(16, None).unwrap();
        assert!(!g.is_physical());
        assert_eq!(g.weight(), 1.0);
        let g = Grid::new(512, Some(16.0)).unwrap();
        assert_eq!(g.spacing(), 0.03125);
        assert!(matches!(Grid::new(1, None), Err(GaborError::InvalidGrid(_))));
        assert!(matches!(Grid::new(8, Some(-1.0)), Err(GaborError::InvalidGrid(_))));
    }

    #[test]
    fn sampling_examples() {
        let grid = Grid::physical(512, 16.0).unwrap();
        let g = Signal::sample_real(grid, |x| 2f64.powf(0.25) * (-PI * (x - 8.0).powi(2)).exp());
        let argmax = (0..512)
            .max_by(|&a, &b| g.values()[a].norm().total_cmp(&g.values()[b].norm()))
            .unwrap();
        assert_eq!(argmax, 256);

        let one = Signal::sample_real(grid, |_| 1.0);
        assert!(one.values().iter().all(|z| *z == c(1.0, 0.0)));

        let d = Signal::sample_real(grid, |x| if x == 0.0 { 1.0 } else { 0.0 });
        assert_eq!(d, Signal::delta(grid, 0));
    }

    #[test]
    fn inner_product_conventions() {
        let grid = Grid::abstract_group(16).unwrap();
        let d0 = Signal::delta(grid, 0);
        let d1 = Signal::delta(grid, 1);
        assert_eq!(d0.inner(&d0).unwrap(), c(1.0, 0.0));
        assert_eq!(d0.inner(&d1).unwrap(), c(0.0, 0.0));
        let f = d0.scaled(c(0.0, 2.0));
        // conjugate-linear in the second slot
        assert_eq!(d0.inner(&f).unwrap(), c(0.0, -2.0));
        let other = Grid::abstract_group(8).unwrap();
        assert!(matches!(
            d0.inner(&Signal::zeros(other)),
            Err(GaborError::IncompatibleGrid(_))
        ));
    }

    #[test]
    fn dft_of_delta_is_flat() {
        let grid = Grid::abstract_group(16).unwrap();
        let f = fourier_transform(&Signal::delta(grid, 0), false);
        for z in f.values() {
            assert!((z - c(0.25, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn derivative_of_constant_and_exponential() {
        let grid = Grid::physical(64, 4.0).unwrap();
        let one = Signal::sample_real(grid, |_| 1.0);
        assert!(spectral_derivative(&one).unwrap().max_abs() < 1e-12);

        let e = Signal::sample(grid, |x| Complex64::from_polar(1.0, 2.0 * PI * x / 4.0));
        let de = spectral_derivative(&e).unwrap();
        let expected = e.scaled(c(0.0, 2.0 * PI / 4.0));
        assert!((&de - &expected).max_abs() < 1e-12);

        let abs = Grid::abstract_group(8).unwrap();
        assert!(matches!(
            spectral_derivative(&Signal::zeros(abs)),
            Err(GaborError::DerivativeUndefined)
        ));
    }

    #[test]
    fn torus_offsets_wrap() {
        let grid = Grid::physical(16, 16.0).unwrap();
        assert!(close(grid.torus_offset(0, 8.0), -8.0, 1e-15));
        assert!(close(grid.torus_offset(15, 8.0), 7.0, 1e-15));
        assert!(close(grid.torus_offset(15, 0.0), -1.0, 1e-15));
        assert_eq!(grid.signed_index(8), 8);
        assert_eq!(grid.signed_index(9), -7);
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let grid = Grid::physical(8, 2.0).unwrap();
        let f = Signal::sample(grid, |x| c(x.sin(), x.cos() / 3.0));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = Signal::read_csv(grid, buf.as_slice()).unwrap();
        assert!((&back - &f).max_abs() < 1e-15);

        let mut bin = Vec::new();
        f.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 128);
        assert_eq!(Signal::read_binary(grid, bin.as_slice()).unwrap(), f);
    }
}
