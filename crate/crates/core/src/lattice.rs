//! Subgroups of the discrete phase space `Z_L x Z_L`.
//!
//! Lattices are stored as explicit, lexicographically sorted point sets. The
//! adjoint lattice is the commutant: all `mu` with `mu_2 l_1 - mu_1 l_2 = 0 (mod L)`
//! for every `l` in the lattice, i.e. the phase-space points whose time-frequency
//! shifts commute with every shift of the lattice. Continuum lattices with
//! irrational generators are not representable; pick `L`, `a`, `b` that match
//! the target density instead.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};

/// A point `(time shift, frequency shift)` of `Z_L x Z_L`.
pub type PhasePoint = [usize; 2];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseLattice {
    modulus: usize,
    generators: Vec<PhasePoint>,
    points: Vec<PhasePoint>,
}

/// Volume and density of a lattice, as exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeGeometry {
    pub volume: Ratio<u64>,
    pub density: Ratio<u64>,
}

impl LatticeGeometry {
    pub fn volume_f64(&self) -> f64 {
        *self.volume.numer() as f64 / *self.volume.denom() as f64
    }

    pub fn density_f64(&self) -> f64 {
        *self.density.numer() as f64 / *self.density.denom() as f64
    }
}

/// JSON shape of a lattice: `{L, generators, points?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeSpec {
    #[serde(rename = "L")]
    pub modulus: usize,
    pub generators: Vec<PhasePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PhasePoint>>,
}

impl PhaseLattice {
    /// Subgroup generated by `generators` (entries are reduced mod `L`).
    pub fn build(modulus: usize, generators: &[PhasePoint]) -> Result<Self> {
        if modulus == 0 {
            return Err(GaborError::InvalidLattice("modulus must be positive".into()));
        }
        if generators.is_empty() {
            return Err(GaborError::InvalidLattice("empty generator list".into()));
        }
        let gens: Vec<PhasePoint> =
            generators.iter().map(|g| [g[0] % modulus, g[1] % modulus]).collect();
        let points = closure(modulus, &gens);
        Ok(Self { modulus, generators: gens, points })
    }

    /// `aZ x bZ` inside `Z_L x Z_L`.
    pub fn separable(modulus: usize, a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 || !modulus.is_multiple_of(a) || !modulus.is_multiple_of(b) {
            return Err(GaborError::InvalidLattice(format!(
                "separable steps ({a}, {b}) must divide L = {modulus}"
            )));
        }
        Self::build(modulus, &[[a, 0], [0, b]])
    }

    /// The whole phase space `Z_L x Z_L`.
    pub fn full(modulus: usize) -> Result<Self> {
        Self::build(modulus, &[[1, 0], [0, 1]])
    }

    /// Parses the `a,b` shorthand for a separable lattice.
    pub fn parse_separable(modulus: usize, text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(GaborError::Parse(format!("lattice shorthand `{text}` is not `a,b`")));
        }
        let a = parts[0]
            .parse::<usize>()
            .map_err(|e| GaborError::Parse(format!("lattice step `{}`: {e}", parts[0])))?;
        let b = parts[1]
            .parse::<usize>()
            .map_err(|e| GaborError::Parse(format!("lattice step `{}`: {e}", parts[1])))?;
        Self::separable(modulus, a, b)
    }

    pub fn from_spec(spec: &LatticeSpec) -> Result<Self> {
        let lattice = Self::build(spec.modulus, &spec.generators)?;
        if let Some(points) = &spec.points {
            let mut sorted: Vec<PhasePoint> =
                points.iter().map(|p| [p[0] % spec.modulus, p[1] % spec.modulus]).collect();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted != lattice.points {
                return Err(GaborError::InvalidLattice(
                    "listed points differ from the subgroup spanned by the generators".into(),
                ));
            }
        }
        Ok(lattice)
    }

    pub fn to_spec(&self, include_points: bool) -> LatticeSpec {
        LatticeSpec {
            modulus: self.modulus,
            generators: self.generators.clone(),
            points: include_points.then(|| self.points.clone()),
        }
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn generators(&self) -> &[PhasePoint] {
        &self.generators
    }

    /// Lexicographically sorted points; this fixes coefficient-vector layout.
    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn card(&self) -> usize {
        self.points.len()
    }

    pub fn contains(&self, p: PhasePoint) -> bool {
        self.points
            .binary_search(&[p[0] % self.modulus, p[1] % self.modulus])
            .is_ok()
    }

    /// Position of `p` in [`PhaseLattice::points`].
    pub fn index_of(&self, p: PhasePoint) -> Option<usize> {
        self.points.binary_search(&[p[0] % self.modulus, p[1] % self.modulus]).ok()
    }

    /// Commutant subgroup: every `mu` whose shift commutes with all shifts in `self`.
    pub fn adjoint(&self) -> PhaseLattice {
        let l = self.modulus;
        let mut points = Vec::new();
        for m1 in 0..l {
            for m2 in 0..l {
                let commutes = self.generators.iter().all(|g| {
                    let s = (m2 * g[0] + (l - m1) * g[1]) % l;
                    s == 0
                });
                if commutes {
                    points.push([m1, m2]);
                }
            }
        }
        // points already sorted; reuse the minimal separable-looking generating set
        let generators = small_generating_set(l, &points);
        PhaseLattice { modulus: l, generators, points }
    }

    /// Steps `(a, b)` if the lattice is exactly `aZ x bZ`.
    pub fn separable_steps(&self) -> Option<(usize, usize)> {
        let l = self.modulus;
        let a = self
            .points
            .iter()
            .filter(|p| p[1] == 0 && p[0] != 0)
            .map(|p| p[0])
            .min()
            .unwrap_or(l);
        let b = self
            .points
            .iter()
            .filter(|p| p[0] == 0 && p[1] != 0)
            .map(|p| p[1])
            .min()
            .unwrap_or(l);
        ((l / a) * (l / b) == self.card()).then_some((a, b))
    }

    pub fn geometry(&self) -> LatticeGeometry {
        let l = self.modulus as u64;
        let card = self.card() as u64;
        LatticeGeometry { volume: Ratio::new(l, card), density: Ratio::new(card, l) }
    }

    /// Groups the points by time shift: `(a, [b...])` with `a` ascending.
    pub fn by_time_shift(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
        for p in &self.points {
            match out.last_mut() {
                Some((a, bs)) if *a == p[0] => bs.push(p[1]),
                _ => out.push((p[0], vec![p[1]])),
            }
        }
        out
    }
}

fn closure(l: usize, gens: &[PhasePoint]) -> Vec<PhasePoint> {
    let mut seen = vec![false; l * l];
    let mut stack = vec![[0usize, 0usize]];
    seen[0] = true;
    let mut points = Vec::new();
    while let Some(p) = stack.pop() {
        points.push(p);
        for g in gens {
            let q = [(p[0] + g[0]) % l, (p[1] + g[1]) % l];
            let idx = q[0] * l + q[1];
            if !seen[idx] {
                seen[idx] = true;
                stack.push(q);
            }
        }
    }
    points.sort_unstable();
    points
}

/// Greedy generating set: add points until their span covers `points`.
fn small_generating_set(l: usize, points: &[PhasePoint]) -> Vec<PhasePoint> {
    let mut gens: Vec<PhasePoint> = Vec::new();
    let mut span: BTreeSet<PhasePoint> = BTreeSet::from([[0, 0]]);
    for &p in points {
        if span.len() == points.len() {
            break;
        }
        if !span.contains(&p) {
            gens.push(p);
            span = closure(l, &gens).into_iter().collect();
        }
    }
    if gens.is_empty() {
        gens.push([0, 0]);
    }
    gens
}

/// True iff `points` contains 0 and is closed under addition mod `L`.
pub fn is_subgroup(l: usize, points: &[PhasePoint]) -> bool {
    if l == 0 {
        return false;
    }
    let set: BTreeSet<PhasePoint> = points.iter().map(|p| [p[0] % l, p[1] % l]).collect();
    if !set.contains(&[0, 0]) {
        return false;
    }
    set.iter().all(|p| {
        set.iter().all(|q| set.contains(&[(p[0] + q[0]) % l, (p[1] + q[1]) % l]))
    })
}
