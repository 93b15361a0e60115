//! Dispatch of experiment commands to the core library.

use gaborkit_core::counterexample;
use gaborkit_core::gabor::{self, GaborOperator};
use gaborkit_core::identities;
use gaborkit_core::lattice::PhaseLattice;
use gaborkit_core::linalg;
use gaborkit_core::signal::{Grid, Signal};
use gaborkit_core::spaces::{self, WeightSymbol};
use gaborkit_core::spectral::{self, EpsChoice, HoloFunctionSpec, SpectralDecomposition};
use gaborkit_core::zak;
use gaborkit_core::{Complex64, GaborError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, EpsParam, ExperimentConfig, Parameters, Which};
use crate::error::CliError;
use crate::refine;
use crate::report::{Check, Relation, Report, ReportBuilder};

const PROBES: usize = 3;

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, CliError> {
    config.validate()?;
    let mut b = ReportBuilder::default();
    match config.command {
        Command::FrameBounds => frame_bounds(&config.parameters, &mut b)?,
        Command::Dual => dual(&config.parameters, &mut b)?,
        Command::Tight => tight(&config.parameters, &mut b)?,
        Command::Psdual => psdual(&config.parameters, &mut b)?,
        Command::Zak => zak_cmd(&config.parameters, &mut b)?,
        Command::Identity => identity(&config.parameters, &mut b)?,
        Command::Norms => norms(&config.parameters, &mut b)?,
        Command::Counterexample => counterexample_cmd(&config.parameters, &mut b)?,
        Command::RefineStudy => refine::refine_report(&config.parameters, &mut b)?,
    }
    Ok(b.finish(config))
}

pub(crate) fn random_signal(grid: Grid, rng: &mut ChaCha8Rng) -> Signal {
    let v = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Signal::new(grid, v).expect("length matches grid")
}

pub(crate) fn probes(grid: Grid, seed: u64) -> Vec<Signal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..PROBES).map(|_| random_signal(grid, &mut rng)).collect()
}

pub(crate) fn lattice_json(lat: &PhaseLattice) -> Value {
    let geo = lat.geometry();
    json!({
        "L": lat.modulus(),
        "steps": lat.separable_steps(),
        "generators": lat.generators(),
        "card": lat.card(),
        "density": geo.density_f64(),
        "volume": geo.volume_f64(),
    })
}

fn window_json(name: &str, g: &Signal) -> Value {
    json!({ "name": name, "grid": g.grid(), "hash": g.content_hash(), "norm": g.norm() })
}

fn csv_bytes(s: &Signal) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    Ok(buf)
}

fn frame_setup(p: &Parameters) -> Result<(Signal, PhaseLattice, GaborOperator, SpectralDecomposition), CliError> {
    let grid = p.grid()?;
    let lat = p.lattice_for(&grid)?;
    let g = p.window_for(grid)?;
    let s = gabor::frame_operator(&g, &g, &lat)?.with_lattice(&lat).with_window_hash(g.content_hash());
    let d = spectral::hermitian_eig(&s)?;
    Ok((g, lat, s, d))
}

/// Records the frame bounds and a positivity check; returns whether `S` is invertible.
fn record_bounds(b: &mut ReportBuilder, d: &SpectralDecomposition) -> bool {
    let fb = d.bounds();
    b.result("frame_bounds", json!({
        "lower": fb.lower,
        "upper": fb.upper,
        "condition_number": fb.condition_number(),
        "is_frame": fb.is_frame(),
        "is_parseval": fb.is_parseval(),
    }));
    b.check(Check::new("lower frame bound", fb.lower, Relation::Above, fb.frame_tolerance()));
    fb.is_frame()
}

fn frame_bounds(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let (g, lat, s, d) = frame_setup(p)?;
    let fb = d.bounds();
    b.result("window", window_json(p.window_name(), &g))
        .result("lattice", lattice_json(&lat))
        .result("operator", s.metadata_json())
        .result("lower", fb.lower)
        .result("upper", fb.upper)
        .result("condition_number", fb.condition_number())
        .result("is_frame", fb.is_frame())
        .result("is_parseval", fb.is_parseval());
    let herm = linalg::relative_residual(s.matrix(), &s.matrix().adjoint());
    b.check(Check::at_most("hermitian residual of S", herm, 1e-12));
    if let Ok(symbol) = zak::frame_symbol(&g, &lat) {
        let vals: Vec<f64> = symbol.values().iter().map(|z| z.re).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let err = (lo - fb.lower).abs().max((hi - fb.upper).abs()) / fb.upper.max(1e-300);
        b.result("zak_bounds", json!({ "lower": lo, "upper": hi }));
        b.check(Check::at_most("zak symbol bounds vs eigenvalues", err, p.tolerances.zak_operator));
    }
    let mut spectrum = String::from("index,eigenvalue\n");
    for (i, v) in d.eigenvalues.iter().enumerate() {
        spectrum.push_str(&format!("{i},{v:e}\n"));
    }
    let mut bin = Vec::new();
    s.write_binary(&mut bin)?;
    b.artifact("spectrum.csv", spectrum.into_bytes())
        .artifact("frame_operator.bin", bin)
        .artifact("frame_operator.json", serde_json::to_vec_pretty(&s.metadata_json()).expect("json"));
    Ok(())
}

fn dual(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let (g, lat, s, d) = frame_setup(p)?;
    b.result("window", window_json(p.window_name(), &g)).result("lattice", lattice_json(&lat));
    if !record_bounds(b, &d) {
        return Ok(());
    }
    let gamma = spectral::canonical_dual_with(&d, &g)?;
    let res = spectral::duality_residual(&g, &gamma, &lat, &probes(*g.grid(), p.seed), None)?;
    b.result("dual", window_json("canonical-dual", &gamma));
    b.check(Check::at_most("reconstruction residual", res, p.tolerances.duality));
    if let Some(nodes) = p.contour_nodes {
        let c = spectral::contour_apply_with(&s, &d, &HoloFunctionSpec::Inverse, &g, nodes)?;
        let err = c.distance(&gamma)? / gamma.norm();
        b.check(Check::at_most(format!("contour ({nodes} nodes) vs eigendecomposition"), err, p.tolerances.contour));
    }
    b.artifact("window.csv", csv_bytes(&g)?).artifact("dual.csv", csv_bytes(&gamma)?);
    Ok(())
}

fn tight(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let (g, lat, s, d) = frame_setup(p)?;
    b.result("window", window_json(p.window_name(), &g)).result("lattice", lattice_json(&lat));
    if !record_bounds(b, &d) {
        return Ok(());
    }
    let gt = spectral::tight_window_with(&d, &g)?;
    let res = spectral::parseval_residual(&gt, &lat)?;
    b.result("tight", window_json("tight", &gt));
    b.check(Check::at_most("parseval residual", res, p.tolerances.parseval));
    if let Some(nodes) = p.contour_nodes {
        let c = spectral::contour_apply_with(&s, &d, &HoloFunctionSpec::InverseSqrt, &g, nodes)?;
        let err = c.distance(&gt)? / gt.norm();
        b.check(Check::at_most(format!("contour ({nodes} nodes) vs eigendecomposition"), err, p.tolerances.contour));
    }
    b.artifact("window.csv", csv_bytes(&g)?).artifact("tight.csv", csv_bytes(&gt)?);
    Ok(())
}

fn psdual(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let grid = p.grid()?;
    let lat = p.lattice_for(&grid)?;
    let g = p.window_for(grid)?;
    let choice = match p.eps {
        EpsParam::Value(v) => EpsChoice::Value(v),
        EpsParam::Named(_) => EpsChoice::Auto,
    };
    let pd = spectral::pseudoinverse_dual_detailed(&g, &lat, choice)?;
    let s = pd.operator.matrix();
    let pinv = pd.pseudo_inverse()?;
    let sss = linalg::relative_residual(&(s * &pinv * s), s);
    let proj = pd.range_projector();
    let dres = spectral::duality_residual(&g, &pd.gamma, &lat, &probes(grid, p.seed), Some(&proj))?;
    b.result("window", window_json(p.window_name(), &g))
        .result("lattice", lattice_json(&lat))
        .result("eps", pd.eps)
        .result("rank", pd.rank)
        .result("dimension", grid.len())
        .result("upper", pd.decomposition.upper())
        .result("dual", window_json("pseudo-inverse-dual", &pd.gamma));
    b.check(Check::at_most("S S^+ S = S residual", sss, p.tolerances.pseudo))
        .check(Check::at_most("duality onto range projection", dres, p.tolerances.pseudo));
    if let Some(nodes) = p.contour_nodes {
        let f = HoloFunctionSpec::PseudoInverse { eps: pd.eps };
        let c = spectral::contour_apply_with(&pd.operator, &pd.decomposition, &f, &g, nodes)?;
        let err = c.distance(&pd.gamma)? / pd.gamma.norm().max(1e-300);
        b.check(Check::at_most(format!("contour ({nodes} nodes) vs eigendecomposition"), err, p.tolerances.contour));
    }
    b.artifact("window.csv", csv_bytes(&g)?).artifact("dual.csv", csv_bytes(&pd.gamma)?);
    Ok(())
}

fn default_zak_factor(l: usize) -> usize {
    (1..=l).filter(|d| l.is_multiple_of(*d) && d * d <= l).max().unwrap_or(1)
}

fn zak_cmd(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let grid = p.grid()?;
    let l = grid.len();
    let lat = p.lattice_for(&grid).ok();
    let n = p
        .n
        .or_else(|| lat.as_ref().and_then(|x| x.separable_steps()).filter(|(a, b)| a * b == l).map(|s| s.0))
        .unwrap_or_else(|| default_zak_factor(l));
    if n == 0 || l % n != 0 {
        return Err(CliError::Usage(format!("config error at 'parameters.N': {n} does not divide L = {l}")));
    }
    let m = l / n;
    let g = p.window_for(grid)?;
    let tol = p.tolerances.zak;
    let z = zak::zak_forward(&g, n)?;
    let gn = g.norm().max(1e-300);
    let unitarity = (z.norm() - g.norm()).abs() / gn;
    let round_trip = zak::zak_inverse(&z).distance(&g)? / gn;
    let quasi = zak::quasi_periodicity_residual(&g, n)? / gn;
    let mut shift = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let r = zak::shift_diagonalization_residual(&g, n, [i * n, j * m])?;
            shift = shift.max(r / gn);
        }
    }
    b.result("window", window_json(p.window_name(), &g))
        .result("N", n)
        .result("M", m)
        .result("max_abs", z.max_abs())
        .result("bessel_bound", (l as f64 * grid.weight()).sqrt() * z.max_abs());
    b.check(Check::at_most("unitarity", unitarity, tol))
        .check(Check::at_most("inverse round trip", round_trip, tol))
        .check(Check::at_most("quasi-periodicity", quasi, tol))
        .check(Check::at_most(format!("shift diagonalization over {}Z x {}Z", n, m), shift, tol));
    if let Some(lat) = lat.filter(|x| x.separable_steps() == Some((n, m))) {
        let dense = gabor::frame_operator(&g, &g, &lat)?;
        let diag = zak::frame_operator_zak(&g, &lat)?;
        let err = linalg::relative_residual(diag.matrix(), dense.matrix());
        b.check(Check::at_most("zak frame operator vs dense", err, p.tolerances.zak_operator));
    }
    let mut csv = Vec::new();
    z.write_csv(&mut csv)?;
    let mut pgm = Vec::new();
    z.write_pgm(&mut pgm)?;
    b.artifact("zak.csv", csv).artifact("zak.pgm", pgm);
    Ok(())
}

/// Every separable lattice `aZ x bZ` with `a, b` dividing `l`.
pub fn divisor_lattices(l: usize) -> Result<Vec<PhaseLattice>, GaborError> {
    let divs: Vec<usize> = (1..=l).filter(|d| l.is_multiple_of(*d)).collect();
    let mut out = Vec::new();
    for &a in &divs {
        for &c in &divs {
            out.push(PhaseLattice::separable(l, a, c)?);
        }
    }
    Ok(out)
}

/// One seeded sweep over lattices; rows are `(a, b, trial, residual)`.
pub fn identity_sweep(
    which: Which,
    grid: Grid,
    lattices: &[PhaseLattice],
    trials: usize,
    seed: u64,
) -> Result<Vec<(usize, usize, usize, f64)>, GaborError> {
    let rows: Result<Vec<Vec<_>>, GaborError> = lattices
        .par_iter()
        .enumerate()
        .map(|(idx, lat)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(idx as u64));
            let (a, c) = lat.separable_steps().unwrap_or((0, 0));
            (0..trials)
                .map(|t| {
                    let res = match which {
                        Which::Fi => {
                            let v: Vec<Signal> = (0..4).map(|_| random_signal(grid, &mut rng)).collect();
                            identities::fundamental_identity_check(&v[0], &v[1], &v[2], &v[3], lat)?.residual
                        }
                        Which::Janssen => {
                            let (g, h) = (random_signal(grid, &mut rng), random_signal(grid, &mut rng));
                            identities::janssen_check(&g, &h, lat)?.residual
                        }
                        Which::Cnorm => identities::cnorm_ratio_check(&random_signal(grid, &mut rng), lat)?.residual,
                        Which::Dsf => unreachable!("derivative identity is not swept"),
                    };
                    Ok((a, c, t, res))
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

fn identity(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let grid = p.grid()?;
    let tol = &p.tolerances;
    if p.which == Which::Dsf {
        if !grid.is_physical() {
            return Err(CliError::Usage("the derivative identity needs a physical grid".into()));
        }
        let lat = p.lattice_for(&grid)?;
        let g = p.window_for(grid)?;
        let rep = identities::derivative_identity_residual(&g, &g, &g, &lat)?;
        b.result("window", window_json(p.window_name(), &g)).result("identity", rep.to_json());
        b.check(Check::at_most("derivative identity residual", rep.residual, tol.derivative));
        return Ok(());
    }
    let lattices = match &p.lattice {
        Some(_) => vec![p.lattice_for(&grid)?],
        None => divisor_lattices(grid.len())?,
    };
    let rows = identity_sweep(p.which, grid, &lattices, p.trials, p.seed)?;
    let worst = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let mut csv = String::from("a,b,trial,residual\n");
    for (a, c, t, r) in &rows {
        csv.push_str(&format!("{a},{c},{t},{r:e}\n"));
    }
    let (name, limit) = match p.which {
        Which::Fi => ("fundamental identity", tol.identity),
        Which::Janssen => ("janssen representation", tol.identity),
        _ => ("bessel norm duality", tol.cnorm),
    };
    b.result("lattices", lattices.len()).result("trials", p.trials).result("worst_residual", worst).result(
        "table",
        rows.iter().map(|r| json!({ "a": r.0, "b": r.1, "trial": r.2, "residual": r.3 })).collect::<Vec<_>>(),
    );
    b.check(Check::at_most(format!("{name}: worst relative residual"), worst, limit));
    b.artifact("residuals.csv", csv.into_bytes());
    Ok(())
}

fn norms(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let grid = p.grid()?;
    let lat = p.lattice_for(&grid)?;
    let g = p.window_for(grid)?;
    let center = p.center_for(&grid);
    let rep = spaces::norm_report(&g, &lat, center)?;
    b.result("window", window_json(p.window_name(), &g))
        .result("lattice", lattice_json(&lat))
        .result("center", center)
        .result("norms", rep);
    if grid.is_physical() {
        let phi = Signal::new(
            grid,
            (0..grid.len())
                .map(|n| {
                    let u = grid.torus_offset(n, center);
                    Complex64::new((-std::f64::consts::PI * u * u).exp(), 0.0)
                })
                .collect(),
        )?;
        let mut mods = serde_json::Map::new();
        for (key, m) in [("m1", WeightSymbol::M1), ("m2", WeightSymbol::M2), ("m3", WeightSymbol::M3)] {
            mods.insert(key.into(), json!(spaces::modulation_norm(&g, &m, &phi)?));
        }
        b.result("modulation_norms", Value::Object(mods));
    }
    b.check(Check::at_most("l2 / bessel norm", rep.l2 / rep.bessel.max(1e-300), 1.0 + 1e-12));
    Ok(())
}

fn counterexample_cmd(p: &Parameters, b: &mut ReportBuilder) -> Result<(), CliError> {
    let tol = &p.tolerances;
    let rep = counterexample::divergence_report(p.m, p.k, p.budget, &p.radii)?;
    let control = counterexample::build_smooth_control(p.m)?;
    let c2 = control.mul(&control)?;
    let cc = counterexample::torus_fourier_coeffs(&c2, p.k)?;
    let n_last = p.radii.iter().copied().filter(|&n| n <= p.k).max().unwrap_or(0);
    let control_err = counterexample::square_partial_sum_supnorm(&cc, &c2, n_last)?;

    b.result("divergence", rep.to_json()).result("smooth_control", json!({ "n": n_last, "sup_error": control_err }));
    for c in &rep.operator_checks {
        b.check(Check::at_most(format!("operator-norm identity ({})", c.label), c.residual, tol.operator_norm));
    }
    for &(n, v) in &rep.supnorm_table {
        b.check(Check::at_least(format!("square partial sum sup error, n = {n}"), v, tol.supnorm_min));
    }
    b.check(Check::at_most(format!("smooth control sup error, n = {n_last}"), control_err, tol.control_max));
    let threshold = rep.f2_max + 1.0;
    let min_growth = rep.growth_ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let mut div = Check::at_least(
        format!("greedy growth ratio s_N/s_(N/2), or max s_N > {threshold:.4}"),
        if rep.growth_ratios.is_empty() { f64::NAN } else { min_growth },
        tol.growth_min,
    );
    div.passed = div.passed || rep.greedy.max() > threshold;
    b.result("greedy_threshold", threshold);
    b.check(div);

    let f = counterexample::build_f(p.m)?;
    let mut pgm = Vec::new();
    f.write_pgm(&mut pgm)?;
    let mut sup = String::from("n,sup_error\n");
    for (n, v) in &rep.supnorm_table {
        sup.push_str(&format!("{n},{v:e}\n"));
    }
    let mut greedy = String::from("N,s_N\n");
    let stride = (rep.greedy.sums.len() / 4096).max(1);
    for (i, s) in rep.greedy.sums.iter().enumerate() {
        let count = i + 1;
        if count % stride == 0 || count.is_power_of_two() || count == rep.greedy.sums.len() {
            greedy.push_str(&format!("{count},{s:e}\n"));
        }
    }
    let mut l1 = String::from("K,l1_re,l1_im\n");
    for (r, re, im) in &rep.l1_curve {
        l1.push_str(&format!("{r},{re:e},{im:e}\n"));
    }
    b.artifact("symbol.pgm", pgm)
        .artifact("supnorm.csv", sup.into_bytes())
        .artifact("greedy.csv", greedy.into_bytes())
        .artifact("l1.csv", l1.into_bytes());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> ExperimentConfig {
        ExperimentConfig::new(command)
    }

    #[test]
    fn frame_bounds_gaussian_density_four() {
        let r = run_experiment(&cfg(Command::FrameBounds)).unwrap();
        assert!(r.passed(), "{}", r.to_pretty());
        let lo = r.document["results"]["lower"].as_f64().unwrap();
        let hi = r.document["results"]["upper"].as_f64().unwrap();
        assert!(0.0 < lo && lo <= hi);
        assert!(r.document["results"]["condition_number"].as_f64().unwrap() >= 1.0);
    }

    #[test]
    fn identity_fi_sweep_at_sixteen() {
        let mut c = cfg(Command::Identity);
        c.parameters.l = 16;
        c.parameters.abstract_grid = true;
        let r = run_experiment(&c).unwrap();
        assert!(r.passed(), "{}", r.to_pretty());
        assert_eq!(r.document["results"]["lattices"], json!(25));
    }

    #[test]
    fn dual_tight_psdual_pass() {
        for command in [Command::Dual, Command::Tight] {
            let mut c = cfg(command);
            c.parameters.contour_nodes = Some(64);
            let r = run_experiment(&c).unwrap();
            assert!(r.passed(), "{}", r.to_pretty());
        }
        let mut c = cfg(Command::Psdual);
        c.parameters.l = 16;
        c.parameters.abstract_grid = true;
        c.parameters.lattice = Some("8,8".into());
        c.parameters.window = Some("delta".into());
        let r = run_experiment(&c).unwrap();
        assert!(r.passed(), "{}", r.to_pretty());
        assert_eq!(r.document["results"]["rank"], json!(2));
    }

    #[test]
    fn non_frame_fails_check() {
        let mut c = cfg(Command::Dual);
        c.parameters.l = 16;
        c.parameters.abstract_grid = true;
        c.parameters.lattice = Some("8,8".into());
        c.parameters.window = Some("delta".into());
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn zak_checks_on_critical_lattice() {
        let mut c = cfg(Command::Zak);
        c.parameters.l = 64;
        c.parameters.t = 8.0;
        c.parameters.lattice = Some("8,8".into());
        let r = run_experiment(&c).unwrap();
        assert!(r.passed(), "{}", r.to_pretty());
        assert_eq!(r.checks.len(), 5);
    }

    #[test]
    fn malformed_lattice_is_usage_error() {
        let mut c = cfg(Command::FrameBounds);
        c.parameters.lattice = Some("5,x".into());
        assert_eq!(run_experiment(&c).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn runs_are_deterministic() {
        let mut c = cfg(Command::Identity);
        c.parameters.l = 12;
        c.parameters.which = Which::Janssen;
        c.parameters.seed = 5;
        let a = run_experiment(&c).unwrap().to_pretty();
        let b = run_experiment(&c).unwrap().to_pretty();
        assert_eq!(a, b);
    }
}
