//! Norms of a window, its canonical dual and its tight window along a ladder
//! of grid sizes with fixed period and fixed physical lattice.

use gaborkit_core::gabor;
use gaborkit_core::spaces::{self, NormReport};
use gaborkit_core::spectral::{self, EpsChoice};
use gaborkit_core::windows::WindowKind;
use gaborkit_core::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{build_window, Parameters};
use crate::error::CliError;
use crate::report::{Check, ReportBuilder};
use crate::run::probes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameMode {
    Frame,
    FrameSequence,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefineEntry {
    #[serde(rename = "L")]
    pub l: usize,
    pub steps: (usize, usize),
    pub mode: FrameMode,
    pub lower: f64,
    pub upper: f64,
    /// Spectral threshold used in frame-sequence mode.
    pub eps: Option<f64>,
    /// Reconstruction residual (frame) or duality onto the range projection (frame sequence).
    pub duality_residual: f64,
    pub window: NormReport,
    pub dual: NormReport,
    pub tight: NormReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefineStudy {
    pub family: String,
    pub density: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub ladder: Vec<usize>,
    pub entries: Vec<RefineEntry>,
    /// `fath1_lattice(dual at 2L) / fath1_lattice(dual at L)` per ladder step.
    pub fath1_ratios: Vec<f64>,
    pub h1_ratios: Vec<f64>,
    /// Largest `fath1` ratio.
    pub statistic: f64,
}

impl RefineStudy {
    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        self.fath1_ratios.iter().chain(&self.h1_ratios).all(|r| (lo..=hi).contains(r))
    }

    pub fn worst_duality(&self) -> f64 {
        self.entries.iter().map(|e| e.duality_residual).fold(0.0, f64::max)
    }
}

fn ratios(entries: &[RefineEntry], pick: impl Fn(&NormReport) -> f64) -> Vec<f64> {
    entries.windows(2).map(|w| pick(&w[1].dual) / pick(&w[0].dual)).collect()
}

fn entry(p: &Parameters, family: &str, l: usize) -> Result<RefineEntry, CliError> {
    let grid = p.grid_for(l)?;
    if !grid.is_physical() {
        return Err(CliError::Usage("refine-study needs a physical grid (fixed T)".into()));
    }
    let lat = p.lattice_for(&grid)?;
    let steps = lat.separable_steps().expect("separable by construction");
    let g = build_window(family, grid)?;
    let s = gabor::frame_operator(&g, &g, &lat)?;
    let d = spectral::hermitian_eig(&s)?;
    let center = p.center_for(&grid);
    let fb = d.bounds();
    let probe = probes(grid, p.seed);
    let (mode, eps, gamma, gt, res) = if fb.is_frame() {
        let gamma = spectral::canonical_dual_with(&d, &g)?;
        let gt = spectral::tight_window_with(&d, &g)?;
        let res = spectral::duality_residual(&g, &gamma, &lat, &probe, None)?;
        (FrameMode::Frame, None, gamma, gt, res)
    } else {
        let pd = spectral::pseudoinverse_dual_detailed(&g, &lat, EpsChoice::Auto)?;
        let vals: Vec<Complex64> = pd
            .decomposition
            .eigenvalues
            .iter()
            .map(|&x| Complex64::new(if x >= pd.eps { x.powf(-0.5) } else { 0.0 }, 0.0))
            .collect();
        let gt = g.with_values(pd.decomposition.apply(&vals, g.values()))?;
        let res = spectral::duality_residual(&g, &pd.gamma, &lat, &probe, Some(&pd.range_projector()))?;
        (FrameMode::FrameSequence, Some(pd.eps), pd.gamma, gt, res)
    };
    Ok(RefineEntry {
        l,
        steps,
        mode,
        lower: fb.lower,
        upper: fb.upper,
        eps,
        duality_residual: res,
        window: spaces::norm_report(&g, &lat, center)?,
        dual: spaces::norm_report(&gamma, &lat, center)?,
        tight: spaces::norm_report(&gt, &lat, center)?,
    })
}

/// Runs the ladder for one window family (name or file is not allowed here:
/// the window must be rebuilt at every `L`).
pub fn refine_study(p: &Parameters, family: &str) -> Result<RefineStudy, CliError> {
    if family.parse::<WindowKind>().is_err() {
        return Err(CliError::Usage(format!(
            "config error at 'parameters.window': refine-study needs a window family name, got '{family}'"
        )));
    }
    let entries = p.ladder.iter().map(|&l| entry(p, family, l)).collect::<Result<Vec<_>, _>>()?;
    let fath1_ratios = ratios(&entries, |r| r.fath1_lattice);
    let h1_ratios = ratios(&entries, |r| r.h1_lattice);
    let statistic = fath1_ratios.iter().copied().fold(f64::NAN, f64::max);
    Ok(RefineStudy {
        family: family.to_string(),
        density: p.density,
        period: p.t,
        ladder: p.ladder.clone(),
        entries,
        fath1_ratios,
        h1_ratios,
        statistic,
    })
}

pub(crate) fn refine_report(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let families: Vec<String> = match &p.window {
        Some(w) => vec![w.clone()],
        None => WindowKind::FAMILIES.iter().map(|k| k.name().to_string()).collect(),
    };
    let studies = families.par_iter().map(|f| refine_study(p, f)).collect::<Result<Vec<_>, _>>()?;
    let tol = &p.tolerances;
    let mut csv = String::from("family,L,mode,lower,upper,fath1_window,fath1_dual,fath1_tight,h1_dual,duality_residual\n");
    for st in &studies {
        for e in &st.entries {
            csv.push_str(&format!(
                "{},{},{:?},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                st.family,
                e.l,
                e.mode,
                e.lower,
                e.upper,
                e.window.fath1_lattice,
                e.dual.fath1_lattice,
                e.tight.fath1_lattice,
                e.dual.h1_lattice,
                e.duality_residual
            ));
        }
        let lo = st.fath1_ratios.iter().chain(&st.h1_ratios).copied().fold(f64::INFINITY, f64::min);
        let hi = st.fath1_ratios.iter().chain(&st.h1_ratios).copied().fold(f64::NEG_INFINITY, f64::max);
        if !st.fath1_ratios.is_empty() {
            b.check(Check::at_least(format!("{}: smallest norm ratio of the dual", st.family), lo, tol.refine_min));
            b.check(Check::at_most(format!("{}: largest norm ratio of the dual", st.family), hi, tol.refine_max));
        }
        let frame = st.entries.iter().all(|e| e.mode == FrameMode::Frame);
        let limit = if frame { tol.duality } else { tol.pseudo };
        b.check(Check::at_most(format!("{}: worst duality residual", st.family), st.worst_duality(), limit));
    }
    b.result("studies", &studies);
    b.artifact("refine.csv", csv.into_bytes());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_ladder_is_stable() {
        let mut p = Parameters::default();
        p.ladder = vec![64, 128, 256];
        let st = refine_study(&p, "gaussian").unwrap();
        assert!(st.ratios_within(0.5, 2.0), "{:?}", st.fath1_ratios);
        assert!(st.entries.iter().all(|e| e.mode == FrameMode::Frame));
        assert!(st.worst_duality() < 1e-10);
    }

    #[test]
    fn delta_at_low_density_is_a_frame_sequence() {
        let mut p = Parameters::default();
        p.density = 0.25;
        p.ladder = vec![128, 256];
        let st = refine_study(&p, "delta").unwrap();
        assert!(st.entries.iter().all(|e| e.mode == FrameMode::FrameSequence));
        assert!(st.worst_duality() <= 1e-9, "{}", st.worst_duality());
    }

    #[test]
    fn file_windows_are_rejected() {
        assert!(matches!(refine_study(&Parameters::default(), "/tmp/w.csv"), Err(CliError::Usage(_))));
    }
}
