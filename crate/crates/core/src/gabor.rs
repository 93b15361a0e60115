//! Time-frequency shifts, analysis/synthesis operators and frame operators on `C^L`.
//!
//! Conventions: `pi(a, b) = T_a M_b`, so `(pi(a,b) f)[x] = e^{2 pi i b (x-a) / L} f[x-a]`.
//! Analysis coefficients `c_l = <f, pi(l) g>` are laid out in the lattice's
//! lexicographic point order. All inner products carry the grid weight, so
//! `S f = sum_l <f, pi(l) g> pi(l) h` is the same operator in both grid modes
//! up to that weight. In finite dimensions every window is a Bessel vector;
//! the quantitative content is the norm `||C_{L,g}||`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::lattice::{LatticeSpec, PhaseLattice, PhasePoint};
use crate::linalg::{self, CMatrix};
use crate::signal::{Grid, Signal};

/// Dense matrices are materialized up to this length; beyond it norms and
/// bounds are computed matrix-free.
pub const DENSE_LIMIT: usize = 2048;

/// Relative accuracy of the matrix-free extremal eigenvalue estimates.
pub const ITERATIVE_TOL: f64 = 1e-9;

/// Roots of unity `e^{2 pi i m / L}` indexed by `m mod L`.
#[derive(Debug, Clone)]
pub(crate) struct PhaseTable {
    table: Vec<Complex64>,
}

impl PhaseTable {
    pub(crate) fn new(l: usize) -> Self {
        let table = (0..l)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / l as f64))
            .collect();
        Self { table }
    }

    #[inline]
    pub(crate) fn at(&self, m: usize) -> Complex64 {
        self.table[m % self.table.len()]
    }
}

struct DftPair {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl DftPair {
    fn new(l: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { fwd: planner.plan_fft_forward(l), inv: planner.plan_fft_inverse(l) }
    }
}

fn check_grid(a: &Signal, b: &Signal) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(GaborError::IncompatibleGrid(format!("{:?} vs {:?}", a.grid(), b.grid())));
    }
    Ok(())
}

fn check_lattice(lattice: &PhaseLattice, grid: &Grid) -> Result<()> {
    if lattice.modulus() != grid.len() {
        return Err(GaborError::IncompatibleGrid(format!(
            "lattice modulus {} vs signal length {}",
            lattice.modulus(),
            grid.len()
        )));
    }
    Ok(())
}

/// `pi(z) f` for `z = (a, b)` in `Z_L x Z_L`.
pub fn tf_shift(z: PhasePoint, f: &Signal) -> Signal {
    let l = f.len();
    let phases = PhaseTable::new(l);
    tf_shift_with(&phases, z, f)
}

fn tf_shift_with(phases: &PhaseTable, z: PhasePoint, f: &Signal) -> Signal {
    let l = f.len();
    let (a, b) = (z[0] % l, z[1] % l);
    let src = f.values();
    let values = (0..l)
        .map(|x| {
            let y = (x + l - a) % l;
            phases.at(b * y) * src[y]
        })
        .collect();
    f.with_values(values).expect("same length")
}

/// Matrix of `pi(z)` acting on sample vectors.
pub fn tf_shift_matrix(l: usize, z: PhasePoint) -> CMatrix {
    let phases = PhaseTable::new(l);
    let (a, b) = (z[0] % l, z[1] % l);
    let mut m = CMatrix::zeros(l, l);
    for y in 0..l {
        m[((y + a) % l, y)] = phases.at(b * y);
    }
    m
}

/// `C_{L,g} f = (<f, pi(l) g>)_l` in lattice point order.
pub fn analysis(g: &Signal, lattice: &PhaseLattice, f: &Signal) -> Result<Vec<Complex64>> {
    check_grid(g, f)?;
    check_lattice(lattice, g.grid())?;
    let l = g.len();
    let w = g.grid().weight();
    let dft = DftPair::new(l);
    let (fv, gv) = (f.values(), g.values());
    let mut out = Vec::with_capacity(lattice.card());
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for (a, bs) in lattice.by_time_shift() {
        // <f, pi(a,b) g> = w * sum_y f[y+a] conj(g[y]) e^{-2 pi i b y / L}
        for (y, slot) in buf.iter_mut().enumerate() {
            *slot = fv[(y + a) % l] * gv[y].conj();
        }
        dft.fwd.process(&mut buf);
        out.extend(bs.iter().map(|&b| buf[b] * w));
    }
    Ok(out)
}

/// `C*_{L,g} c = sum_l c_l pi(l) g`.
pub fn synthesis(g: &Signal, lattice: &PhaseLattice, coeffs: &[Complex64]) -> Result<Signal> {
    check_lattice(lattice, g.grid())?;
    if coeffs.len() != lattice.card() {
        return Err(GaborError::InvalidCoefficients { expected: lattice.card(), got: coeffs.len() });
    }
    let l = g.len();
    let dft = DftPair::new(l);
    let gv = g.values();
    let mut out = vec![Complex64::new(0.0, 0.0); l];
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    let mut offset = 0;
    for (a, bs) in lattice.by_time_shift() {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (i, &b) in bs.iter().enumerate() {
            buf[b] += coeffs[offset + i];
        }
        offset += bs.len();
        // v[y] = sum_b c_{a,b} e^{2 pi i b y / L}
        dft.inv.process(&mut buf);
        for y in 0..l {
            out[(y + a) % l] += buf[y] * gv[y];
        }
    }
    g.with_values(out)
}

/// `S_{L,g,h} f = C*_{L,h} C_{L,g} f` without forming a matrix.
pub fn apply_frame_operator(
    g: &Signal,
    h: &Signal,
    lattice: &PhaseLattice,
    f: &Signal,
) -> Result<Signal> {
    check_grid(g, h)?;
    let c = analysis(g, lattice, f)?;
    synthesis(h, lattice, &c)
}

/// Materialized `C_{L,g}` as a `|L| x L` matrix; row `l` is the functional `f -> <f, pi(l) g>`.
#[derive(Debug, Clone)]
pub struct AnalysisMap {
    lattice: PhaseLattice,
    window: Signal,
    matrix: CMatrix,
}

impl AnalysisMap {
    pub fn new(g: &Signal, lattice: &PhaseLattice) -> Result<Self> {
        check_lattice(lattice, g.grid())?;
        let l = g.len();
        let w = g.grid().weight();
        let phases = PhaseTable::new(l);
        let mut matrix = CMatrix::zeros(lattice.card(), l);
        for (row, &p) in lattice.points().iter().enumerate() {
            let shifted = tf_shift_with(&phases, p, g);
            for (col, z) in shifted.values().iter().enumerate() {
                matrix[(row, col)] = z.conj() * w;
            }
        }
        Ok(Self { lattice: lattice.clone(), window: g.clone(), matrix })
    }

    pub fn lattice(&self) -> &PhaseLattice {
        &self.lattice
    }

    pub fn window(&self) -> &Signal {
        &self.window
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, f: &Signal) -> Result<Vec<Complex64>> {
        check_grid(&self.window, f)?;
        Ok(linalg::mat_vec(&self.matrix, f.values()))
    }

    /// Operator norm from the weighted signal space into `l^2(L)`.
    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix) / self.window.grid().weight().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DirectSum,
    Janssen,
    ZakDiagonal,
    Derived,
}

/// Metadata carried alongside an operator matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub provenance: Provenance,
    pub hermitian: bool,
    pub lattice: Option<LatticeSpec>,
    pub window_hash: Option<String>,
    pub grid: Grid,
}

/// Dense operator on `C^L`, usually a (cross) frame operator.
#[derive(Debug, Clone)]
pub struct GaborOperator {
    matrix: CMatrix,
    meta: OperatorMeta,
}

impl GaborOperator {
    pub fn from_matrix(matrix: CMatrix, grid: Grid, provenance: Provenance, hermitian: bool) -> Self {
        Self {
            matrix,
            meta: OperatorMeta { provenance, hermitian, lattice: None, window_hash: None, grid },
        }
    }

    pub fn with_lattice(mut self, lattice: &PhaseLattice) -> Self {
        self.meta.lattice = Some(lattice.to_spec(false));
        self
    }

    pub fn with_window_hash(mut self, hash: String) -> Self {
        self.meta.window_hash = Some(hash);
        self
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn hermitian(&self) -> bool {
        self.meta.hermitian
    }

    pub fn provenance(&self) -> Provenance {
        self.meta.provenance
    }

    pub fn meta(&self) -> &OperatorMeta {
        &self.meta
    }

    pub fn grid(&self) -> &Grid {
        &self.meta.grid
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        if f.grid() != &self.meta.grid {
            return Err(GaborError::IncompatibleGrid("operator and signal grids differ".into()));
        }
        f.with_values(linalg::mat_vec(&self.matrix, f.values()))
    }

    pub fn adjoint(&self) -> GaborOperator {
        let mut meta = self.meta.clone();
        meta.provenance = Provenance::Derived;
        GaborOperator { matrix: self.matrix.adjoint(), meta }
    }

    /// Operator norm on the (weighted) signal space.
    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }

    /// `||S pi(z) - pi(z) S|| / ||S||` in the Frobenius norm.
    pub fn commutator_residual(&self, z: PhasePoint) -> f64 {
        let p = tf_shift_matrix(self.dim(), z);
        let lhs = &self.matrix * &p;
        let rhs = &p * &self.matrix;
        linalg::fro_norm(&(lhs - rhs)) / linalg::fro_norm(&self.matrix).max(1e-300)
    }

    /// Column-major little-endian `(re, im)` f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        for z in self.matrix.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn metadata_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.meta).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("rows".into(), self.matrix.nrows().into());
            map.insert("cols".into(), self.matrix.ncols().into());
            map.insert("layout".into(), "column-major f64le re,im".into());
        }
        v
    }
}

/// `S_{L,g,h} = sum_l pi(l) h (pi(l) g)^*`, the direct lattice sum.
///
/// Entries are `S[x,y] = w sum_{(a,b)} e^{2 pi i b (x-y)/L} h[x-a] conj(g[y-a])`;
/// the frequency sum is done once per distinct time shift `a`.
pub fn frame_operator(g: &Signal, h: &Signal, lattice: &PhaseLattice) -> Result<GaborOperator> {
    check_grid(g, h)?;
    check_lattice(lattice, g.grid())?;
    let l = g.len();
    let w = g.grid().weight();
    let phases = PhaseTable::new(l);
    let (gv, hv) = (g.values(), h.values());
    let mut data = vec![Complex64::new(0.0, 0.0); l * l];
    for (a, bs) in lattice.by_time_shift() {
        let kernel: Vec<Complex64> =
            (0..l).map(|d| bs.iter().map(|&b| phases.at(b * d)).sum::<Complex64>() * w).collect();
        for y in 0..l {
            let gy = gv[(y + l - a) % l].conj();
            if gy == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = &mut data[y * l..(y + 1) * l];
            for (x, slot) in col.iter_mut().enumerate() {
                let hx = hv[(x + l - a) % l];
                *slot += kernel[(x + l - y) % l] * hx * gy;
            }
        }
    }
    let hermitian = g == h;
    let op = GaborOperator::from_matrix(CMatrix::from_vec(l, l, data), *g.grid(), Provenance::DirectSum, hermitian)
        .with_lattice(lattice)
        .with_window_hash(g.content_hash());
    Ok(op)
}

/// Optimal frame bounds, i.e. the extremal eigenvalues of `S_{L,g}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    /// Lower bound strictly above `1e-10 * B`.
    pub fn is_frame(&self) -> bool {
        self.upper > 0.0 && self.lower > self.frame_tolerance()
    }

    pub fn frame_tolerance(&self) -> f64 {
        1e-10 * self.upper
    }

    pub fn is_parseval(&self) -> bool {
        (self.lower - 1.0).abs().max((self.upper - 1.0).abs()) <= 1e-8
    }

    pub fn condition_number(&self) -> f64 {
        self.upper / self.lower
    }
}

pub fn frame_bounds(s: &GaborOperator) -> Result<FrameBounds> {
    if !s.hermitian() || !linalg::is_hermitian(s.matrix(), 1e-12) {
        return Err(GaborError::InvalidOperator("frame bounds need a Hermitian operator".into()));
    }
    let ev = linalg::hermitian_eigenvalues(s.matrix());
    Ok(FrameBounds { lower: ev[0], upper: ev[ev.len() - 1] })
}

/// Frame bounds of `(g, lattice)` without materializing `S` (Lanczos).
pub fn frame_bounds_matrix_free(g: &Signal, lattice: &PhaseLattice) -> Result<FrameBounds> {
    check_lattice(lattice, g.grid())?;
    let (lower, upper) = lanczos_bounds(g, lattice)?;
    Ok(FrameBounds { lower, upper })
}

fn lanczos_bounds(g: &Signal, lattice: &PhaseLattice) -> Result<(f64, f64)> {
    let grid = *g.grid();
    let apply = |v: &[Complex64]| {
        let f = Signal::new(grid, v.to_vec()).expect("length");
        apply_frame_operator(g, g, lattice, &f).expect("shapes").into_values()
    };
    Ok(linalg::lanczos_extremes(apply, grid.len(), 400, ITERATIVE_TOL))
}

/// `||C_{L,g}|| = sqrt(lambda_max(S_{L,g}))`.
pub fn bessel_norm(g: &Signal, lattice: &PhaseLattice) -> Result<f64> {
    check_lattice(lattice, g.grid())?;
    if g.is_zero() {
        return Ok(0.0);
    }
    let top = if g.len() <= DENSE_LIMIT {
        let s = frame_operator(g, g, lattice)?;
        let ev = linalg::hermitian_eigenvalues(s.matrix());
        ev[ev.len() - 1]
    } else {
        lanczos_bounds(g, lattice)?.1
    };
    Ok(top.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(grid: Grid, rng: &mut ChaCha8Rng) -> Signal {
        let v = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Signal::new(grid, v).unwrap()
    }

    /// Literal rank-one sum over lattice points, used as an oracle.
    fn brute_frame_operator(g: &Signal, h: &Signal, lat: &PhaseLattice) -> CMatrix {
        let l = g.len();
        let w = g.grid().weight();
        let mut m = CMatrix::zeros(l, l);
        for &p in lat.points() {
            let pg = tf_shift(p, g);
            let ph = tf_shift(p, h);
            for x in 0..l {
                for y in 0..l {
                    m[(x, y)] += ph.values()[x] * pg.values()[y].conj() * w;
                }
            }
        }
        m
    }

    #[test]
    fn shift_identity_and_delta() {
        let grid = Grid::abstract_group(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_signal(grid, &mut rng);
        assert_eq!(tf_shift([0, 0], &f), f);
        let d = tf_shift([5, 3], &Signal::delta(grid, 0));
        assert_eq!(d, Signal::delta(grid, 5));
    }

    #[test]
    fn commutation_phase_brute_force() {
        let l = 8;
        let phases = PhaseTable::new(l);
        for z1 in 0..l {
            for z2 in 0..l {
                for l1 in 0..l {
                    for l2 in 0..l {
                        let pz = tf_shift_matrix(l, [z1, z2]);
                        let pl = tf_shift_matrix(l, [l1, l2]);
                        let lhs = &pz * &pl;
                        let m = (z2 * l1 + (l - z1) * l2) % l;
                        let rhs = (&pl * &pz) * phases.at(m);
                        assert!(linalg::fro_norm(&(lhs - rhs)) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn analysis_matches_direct_inner_products() {
        let grid = Grid::physical(24, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (f, g) = (random_signal(grid, &mut rng), random_signal(grid, &mut rng));
        let lat = PhaseLattice::build(24, &[[4, 6], [0, 8]]).unwrap();
        let c = analysis(&g, &lat, &f).unwrap();
        for (i, &p) in lat.points().iter().enumerate() {
            let direct = f.inner(&tf_shift(p, &g)).unwrap();
            assert!((c[i] - direct).norm() < 1e-12);
        }
        let map = AnalysisMap::new(&g, &lat).unwrap();
        let c2 = map.apply(&f).unwrap();
        assert!(c.iter().zip(&c2).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn analysis_of_delta_on_critical_lattice() {
        let grid = Grid::abstract_group(16).unwrap();
        let lat = PhaseLattice::separable(16, 4, 4).unwrap();
        let d = Signal::delta(grid, 0);
        let c = analysis(&d, &lat, &d).unwrap();
        for (i, p) in lat.points().iter().enumerate() {
            let expected = if p[0] == 0 { 1.0 } else { 0.0 };
            assert!((c[i] - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
        assert_eq!(c.iter().filter(|z| z.norm() > 0.5).count(), 4);
        assert!(analysis(&d, &lat, &Signal::zeros(grid)).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn synthesis_is_adjoint_of_analysis() {
        let grid = Grid::physical(32, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (f, g) = (random_signal(grid, &mut rng), random_signal(grid, &mut rng));
        let lat = PhaseLattice::separable(32, 4, 2).unwrap();
        let c: Vec<Complex64> = (0..lat.card())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let lhs = synthesis(&g, &lat, &c).unwrap().inner(&f).unwrap();
        let cf = analysis(&g, &lat, &f).unwrap();
        let rhs: Complex64 = c.iter().zip(&cf).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));

        let idx = lat.index_of([0, 0]).unwrap();
        let mut e0 = vec![Complex64::new(0.0, 0.0); lat.card()];
        e0[idx] = Complex64::new(1.0, 0.0);
        assert!((&synthesis(&g, &lat, &e0).unwrap() - &g).max_abs() < 1e-14);
        assert!(synthesis(&g, &lat, &vec![Complex64::new(0.0, 0.0); lat.card()]).unwrap().is_zero());
        assert!(matches!(
            synthesis(&g, &lat, &c[1..]),
            Err(GaborError::InvalidCoefficients { .. })
        ));
    }

    #[test]
    fn frame_operator_matches_rank_one_sum() {
        let grid = Grid::physical(24, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (g, h) = (random_signal(grid, &mut rng), random_signal(grid, &mut rng));
        for lat in [
            PhaseLattice::separable(24, 3, 4).unwrap(),
            PhaseLattice::build(24, &[[2, 3], [0, 12]]).unwrap(),
        ] {
            let s = frame_operator(&g, &h, &lat).unwrap();
            assert!(!s.hermitian());
            let brute = brute_frame_operator(&g, &h, &lat);
            assert!(linalg::relative_residual(s.matrix(), &brute) < 1e-13);
        }
    }

    #[test]
    fn full_lattice_is_tight() {
        let grid = Grid::abstract_group(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_signal(grid, &mut rng);
        let g = g.scaled(Complex64::new(1.0 / g.norm(), 0.0));
        let s = frame_operator(&g, &g, &PhaseLattice::full(16).unwrap()).unwrap();
        let id = CMatrix::identity(16, 16) * Complex64::new(16.0, 0.0);
        assert!(linalg::fro_norm(&(s.matrix() - id)) < 1e-10);
        let fb = frame_bounds(&s).unwrap();
        assert!((fb.lower - 16.0).abs() < 1e-10 && (fb.upper - 16.0).abs() < 1e-10);
        assert!(!fb.is_parseval());
        let bn = bessel_norm(&g, &PhaseLattice::full(16).unwrap()).unwrap();
        assert!((bn - 4.0).abs() < 1e-10);
    }

    #[test]
    fn rank_two_delta_example() {
        let grid = Grid::abstract_group(16).unwrap();
        let d = Signal::delta(grid, 0);
        let lat = PhaseLattice::separable(16, 8, 8).unwrap();
        let s = frame_operator(&d, &d, &lat).unwrap();
        let mut expected = CMatrix::zeros(16, 16);
        expected[(0, 0)] = Complex64::new(2.0, 0.0);
        expected[(8, 8)] = Complex64::new(2.0, 0.0);
        assert!(linalg::fro_norm(&(s.matrix() - expected)) < 1e-14);
        let fb = frame_bounds(&s).unwrap();
        assert!(fb.lower.abs() < 1e-14);
        assert!((fb.upper - 2.0).abs() < 1e-14);
        assert!(!fb.is_frame());

        let zero = frame_operator(&d, &Signal::zeros(grid), &lat).unwrap();
        assert_eq!(linalg::fro_norm(zero.matrix()), 0.0);
        assert!(matches!(frame_bounds(&zero), Err(GaborError::InvalidOperator(_))));
    }

    #[test]
    fn frame_operator_structure() {
        let grid = Grid::physical(32, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (g, h) = (random_signal(grid, &mut rng), random_signal(grid, &mut rng));
        let lat = PhaseLattice::separable(32, 4, 4).unwrap();
        let s = frame_operator(&g, &g, &lat).unwrap();
        assert!(linalg::is_hermitian(s.matrix(), 1e-12));
        for &p in lat.points() {
            assert!(s.commutator_residual(p) < 1e-10);
        }
        let sgh = frame_operator(&g, &h, &lat).unwrap();
        let shg = frame_operator(&h, &g, &lat).unwrap();
        assert!(linalg::relative_residual(&sgh.matrix().adjoint(), shg.matrix()) < 1e-12);
        let bound = bessel_norm(&g, &lat).unwrap() * bessel_norm(&h, &lat).unwrap();
        assert!(sgh.norm() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn bessel_norm_properties() {
        let grid = Grid::physical(48, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lat = PhaseLattice::separable(48, 6, 4).unwrap();
        assert_eq!(bessel_norm(&Signal::zeros(grid), &lat).unwrap(), 0.0);
        for _ in 0..5 {
            let g = random_signal(grid, &mut rng);
            let bn = bessel_norm(&g, &lat).unwrap();
            assert!(g.norm() <= bn * (1.0 + 1e-12));
            let map = AnalysisMap::new(&g, &lat).unwrap();
            assert!((map.norm() - bn).abs() < 1e-10 * bn);
            let fb = frame_bounds_matrix_free(&g, &lat).unwrap();
            assert!((fb.upper.sqrt() - bn).abs() < 1e-8 * bn);
        }
    }
}
