//! Acceptance suite: thirteen criteria, one PASS/FAIL line each.
//! Runs without the libtest harness so every line is printed; exits non-zero
//! if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use gaborkit::config::Parameters;
use gaborkit::{divisor_lattices, identity_sweep, refine_study, Which};
use gaborkit_core::counterexample;
use gaborkit_core::gabor;
use gaborkit_core::identities;
use gaborkit_core::lattice::PhaseLattice;
use gaborkit_core::linalg;
use gaborkit_core::signal::{Grid, Signal};
use gaborkit_core::spaces;
use gaborkit_core::spectral::{self, EpsChoice, HoloFunctionSpec};
use gaborkit_core::windows::WindowKind;
use gaborkit_core::zak;
use gaborkit_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Residuals below this are double-precision roundoff; ordering among them is noise.
const ROUNDOFF_FLOOR: f64 = 1e-12;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn random_signal(grid: Grid, rng: &mut ChaCha8Rng) -> Signal {
    let v = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Signal::new(grid, v).unwrap()
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// `r_next <= r_prev`, or both at the roundoff floor.
fn non_increasing(seq: &[f64]) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] || w[1] <= ROUNDOFF_FLOOR)
}

fn fmt_seq(seq: &[f64]) -> String {
    seq.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(", ")
}

fn sweep(which: Which) -> Result<f64, String> {
    let mut w: f64 = 0.0;
    for l in [12usize, 16, 24, 32] {
        let grid = Grid::abstract_group(l).unwrap();
        let lats = divisor_lattices(l).map_err(|e| e.to_string())?;
        let rows = identity_sweep(which, grid, &lats, 100, 2024 + l as u64).map_err(|e| e.to_string())?;
        w = w.max(worst(rows.iter().map(|r| r.3)));
    }
    Ok(w)
}

fn c1_fundamental_identity() -> Outcome {
    match sweep(Which::Fi) {
        Ok(w) => outcome(w <= 1e-10, format!("worst relative residual {w:.2e} (<= 1e-10), L in {{12,16,24,32}}, all divisor lattices, 100 quadruples each")),
        Err(e) => outcome(false, e),
    }
}

fn c2_janssen() -> Outcome {
    match sweep(Which::Janssen) {
        Ok(w) => outcome(w <= 1e-10, format!("worst relative matrix residual {w:.2e} (<= 1e-10) over the same sweep")),
        Err(e) => outcome(false, e),
    }
}

fn c3_bessel_duality() -> Outcome {
    match sweep(Which::Cnorm) {
        Ok(w) => outcome(w <= 1e-8, format!("worst relative residual {w:.2e} (<= 1e-8) over the same sweep")),
        Err(e) => outcome(false, e),
    }
}

fn c4_adjoint_duality() -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for l in [16usize, 24] {
        for lat in divisor_lattices(l).unwrap() {
            count += 1;
            let adj = lat.adjoint();
            let back = adj.adjoint();
            let same = back.card() == lat.card() && lat.points().iter().all(|p| back.contains(*p));
            if !same || lat.card() * adj.card() != l * l {
                bad.push(format!("{:?}", lat.separable_steps()));
            }
        }
    }
    outcome(bad.is_empty(), format!("{count} lattices in Z_16 and Z_24, exact; failures: {bad:?}"))
}

fn gaussian(grid: Grid, c: f64) -> Signal {
    Signal::sample_real(grid, |x| 2f64.powf(0.25) * (-PI * (x - c) * (x - c)).exp())
}

fn c5_derivative_identity() -> Outcome {
    let mut res = Vec::new();
    for l in [256usize, 512, 1024] {
        let grid = Grid::physical(l, 16.0).unwrap();
        let g = gaussian(grid, 8.0);
        let lat = PhaseLattice::separable(l, l / 32, 8).unwrap();
        res.push(identities::derivative_identity_residual(&g, &g, &g, &lat).unwrap().residual);
    }
    let ok = res[1] <= 1e-6 && non_increasing(&res);
    outcome(ok, format!(
        "residuals at L = 256, 512, 1024: {} (L=512 <= 1e-6; non-increasing up to the {ROUNDOFF_FLOOR:.0e} roundoff floor)",
        fmt_seq(&res)
    ))
}

fn c6_product_bound() -> Outcome {
    let (l, t) = (128, 16.0);
    let grid = Grid::physical(l, t).unwrap();
    let lat = PhaseLattice::separable(l, 4, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h1 = |s: &Signal| spaces::norm_report(s, &lat, t / 2.0).unwrap().h1_lattice;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let mut smooth = || {
            let c = rng.gen_range(4.0..12.0);
            let s = rng.gen_range(0.5..2.0);
            let om = rng.gen_range(-2.0..2.0);
            let ph = rng.gen_range(0.0..2.0 * PI);
            Signal::sample(grid, move |x| Complex64::from_polar((-PI * ((x - c) / s).powi(2)).exp(), 2.0 * PI * om * x + ph))
        };
        let (f, g, h) = (smooth(), smooth(), smooth());
        let sf = gabor::apply_frame_operator(&g, &h, &lat, &f).unwrap();
        worst_ratio = worst_ratio.max(h1(&sf) / (h1(&g) * h1(&h) * h1(&f)));
    }
    outcome(worst_ratio <= 1.0 + 1e-6, format!("worst h1(Sf) / (h1(g) h1(h) h1(f)) = {worst_ratio:.4} (<= 1 + 1e-6), 100 triples"))
}

fn c7_duality_tightness() -> Outcome {
    let mut worst_dual: f64 = 0.0;
    let mut worst_tight: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for l in [128usize, 256] {
        let grid = Grid::physical(l, 16.0).unwrap();
        let lat = PhaseLattice::separable(l, l / 32, 8).unwrap();
        let probes: Vec<Signal> = (0..3).map(|_| random_signal(grid, &mut rng)).collect();
        for kind in WindowKind::FAMILIES {
            let g = kind.build(grid).unwrap();
            let gamma = spectral::canonical_dual(&g, &lat).unwrap();
            worst_dual = worst_dual.max(spectral::duality_residual(&g, &gamma, &lat, &probes, None).unwrap());
            let gt = spectral::tight_window(&g, &lat).unwrap();
            worst_tight = worst_tight.max(spectral::parseval_residual(&gt, &lat).unwrap());
        }
    }
    outcome(
        worst_dual <= 1e-10 && worst_tight <= 1e-10,
        format!("reconstruction {worst_dual:.2e} (<= 1e-10), Parseval {worst_tight:.2e} (<= 1e-10); 4 families, density 4, L in {{128, 256}}"),
    )
}

fn c8_contour() -> Outcome {
    let grid = Grid::physical(128, 16.0).unwrap();
    let lat = PhaseLattice::separable(128, 4, 8).unwrap();
    let g = WindowKind::Gaussian.build(grid).unwrap();
    let s = gabor::frame_operator(&g, &g, &lat).unwrap();
    let eig = spectral::apply_spectral_function(&s, &HoloFunctionSpec::Inverse, &g).unwrap();
    let errs: Vec<f64> = [32usize, 128, 512]
        .iter()
        .map(|&n| {
            let c = spectral::contour_apply(&s, &HoloFunctionSpec::Inverse, &g, n).unwrap();
            c.distance(&eig).unwrap() / eig.norm()
        })
        .collect();
    let ok = errs[2] <= 1e-8 && non_increasing(&errs);
    outcome(ok, format!(
        "errors at 32, 128, 512 nodes: {} (512 nodes <= 1e-8; decreasing up to the {ROUNDOFF_FLOOR:.0e} roundoff floor)",
        fmt_seq(&errs)
    ))
}

fn c9_frame_sequence() -> Outcome {
    let grid = Grid::abstract_group(16).unwrap();
    let lat = PhaseLattice::separable(16, 8, 8).unwrap();
    let g = Signal::delta(grid, 0);
    let gamma = spectral::pseudoinverse_dual(&g, &lat, EpsChoice::Auto).unwrap();
    let want = g.scaled(Complex64::new(0.5, 0.0));
    let hand = (&gamma - &want).max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_sss: f64 = 0.0;
    let mut cases = 0;
    for (l, a, b) in [(24usize, 4usize, 12usize), (32, 8, 8), (32, 4, 16), (36, 6, 12)] {
        let grid = Grid::abstract_group(l).unwrap();
        let lat = PhaseLattice::separable(l, a, b).unwrap();
        for _ in 0..5 {
            let g = random_signal(grid, &mut rng);
            let pd = spectral::pseudoinverse_dual_detailed(&g, &lat, EpsChoice::Auto).unwrap();
            let s = pd.operator.matrix();
            let pinv = pd.pseudo_inverse().unwrap();
            worst_sss = worst_sss.max(linalg::relative_residual(&(s * &pinv * s), s));
            cases += 1;
        }
    }
    outcome(
        hand <= 1e-12 && worst_sss <= 1e-9,
        format!("hand example |gamma - delta_0/2|_max = {hand:.2e} (<= 1e-12); S S^+ S = S worst {worst_sss:.2e} (<= 1e-9) on {cases} random frame sequences"),
    )
}

fn c10_zak() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut unit, mut quasi, mut shift, mut diag) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (l, t) in [(16usize, 4.0), (36, 6.0), (64, 8.0)] {
        let grid = Grid::physical(l, t).unwrap();
        for n in (1..=l).filter(|d| l % d == 0) {
            for _ in 0..3 {
                let f = random_signal(grid, &mut rng);
                let z = zak::zak_forward(&f, n).unwrap();
                unit = unit.max((z.norm() - f.norm()).abs() / f.norm());
                unit = unit.max(zak::zak_inverse(&z).distance(&f).unwrap() / f.norm());
                quasi = quasi.max(zak::quasi_periodicity_residual(&f, n).unwrap() / f.norm());
            }
        }
    }
    let grid = Grid::physical(16, 4.0).unwrap();
    for n in (1..=16).filter(|d| 16 % d == 0) {
        let m = 16 / n;
        let f = random_signal(grid, &mut rng);
        for i in 0..m {
            for j in 0..n {
                let r = zak::shift_diagonalization_residual(&f, n, [i * n, j * m]).unwrap();
                shift = shift.max(r / f.norm());
            }
        }
    }
    for (l, n) in [(16usize, 4usize), (16, 2), (36, 6), (64, 8), (64, 16)] {
        let grid = Grid::physical(l, (l as f64).sqrt()).unwrap();
        let lat = PhaseLattice::separable(l, n, l / n).unwrap();
        for _ in 0..3 {
            let g = random_signal(grid, &mut rng);
            let dense = gabor::frame_operator(&g, &g, &lat).unwrap();
            let viaz = zak::frame_operator_zak(&g, &lat).unwrap();
            diag = diag.max(linalg::relative_residual(viaz.matrix(), dense.matrix()));
        }
    }
    outcome(
        unit <= 1e-12 && quasi <= 1e-12 && shift <= 1e-12 && diag <= 1e-10,
        format!("unitarity {unit:.2e}, quasi-periodicity {quasi:.2e}, shift diagonalization (exhaustive, L=16) {shift:.2e} (all <= 1e-12); Zak frame operator vs dense {diag:.2e} (<= 1e-10)"),
    )
}

fn c11_nonuniform() -> Outcome {
    let (m, k) = (1024, 256);
    let f = counterexample::build_f(m).unwrap();
    let f2 = f.mul(&f).unwrap();
    let c = counterexample::torus_fourier_coeffs(&f2, k).unwrap();
    let sups: Vec<f64> = [10usize, 20, 40, 80, 160]
        .iter()
        .map(|&n| counterexample::square_partial_sum_supnorm(&c, &f2, n).unwrap())
        .collect();
    let ctrl = counterexample::build_smooth_control(m).unwrap();
    let ctrl2 = ctrl.mul(&ctrl).unwrap();
    let cc = counterexample::torus_fourier_coeffs(&ctrl2, k).unwrap();
    let control = counterexample::square_partial_sum_supnorm(&cc, &ctrl2, 160).unwrap();
    outcome(
        sups.iter().all(|&s| s >= 0.5) && control < 0.05,
        format!("sup errors at n = 10..160: {} (each >= 0.5); smooth control at n = 160: {control:.2e} (< 0.05); M = 1024, K = 256", fmt_seq(&sups)),
    )
}

fn c12_divergence() -> Outcome {
    let rep = counterexample::divergence_report(4096, 1024, 1_000_000, &[]).unwrap();
    let threshold = rep.f2_max + 1.0;
    let want = [250_000usize, 500_000, 1_000_000];
    let growth: Vec<f64> = want.iter().map(|&n| rep.greedy.growth_ratio(n).unwrap_or(f64::NAN)).collect();
    let grows = growth.iter().all(|&g| g >= 1.05);
    let exceeds = rep.greedy.max() > threshold;
    let op = worst(rep.operator_checks.iter().map(|c| c.residual));
    outcome(
        (exceeds || grows) && op <= 1e-8,
        format!(
            "greedy max s_N = {:.4} vs ||F^2|| + 1 = {threshold:.4}; growth s_N/s_(N/2) at N = 2.5e5, 5e5, 1e6: {} (need >= 1.05); operator-norm identity {op:.2e} (<= 1e-8)",
            rep.greedy.max(),
            growth.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c13_refinement() -> Outcome {
    let mut p = Parameters::default();
    p.density = 4.0;
    p.ladder = vec![128, 256, 512, 1024];
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in WindowKind::FAMILIES {
        match refine_study(&p, kind.name()) {
            Ok(st) => {
                let inside = st.fath1_ratios.iter().all(|r| (0.5..=2.0).contains(r));
                ok &= inside;
                parts.push(format!("{} [{}]", kind.name(), st.fath1_ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", kind.name()));
            }
        }
    }
    outcome(ok, format!("fath1(dual) ratios per doubling, ladder 128..1024 (each in [0.5, 2]): {}", parts.join("; ")))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 13] = [
        ("C1 fundamental identity", c1_fundamental_identity, Duration::from_secs(60)),
        ("C2 Janssen representation", c2_janssen, Duration::from_secs(60)),
        ("C3 Bessel-norm duality", c3_bessel_duality, Duration::MAX),
        ("C4 adjoint-lattice duality", c4_adjoint_duality, Duration::MAX),
        ("C5 derivative identity", c5_derivative_identity, Duration::from_secs(120)),
        ("C6 product bound", c6_product_bound, Duration::MAX),
        ("C7 canonical dual and tight window", c7_duality_tightness, Duration::MAX),
        ("C8 contour calculus", c8_contour, Duration::MAX),
        ("C9 frame-sequence pseudo-inverse", c9_frame_sequence, Duration::MAX),
        ("C10 Zak suite", c10_zak, Duration::MAX),
        ("C11 non-uniform convergence", c11_nonuniform, Duration::from_secs(300)),
        ("C12 divergence certificate", c12_divergence, Duration::from_secs(1200)),
        ("C13 refinement stability", c13_refinement, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let passed = out.passed && in_time;
        if !passed {
            failed += 1;
        }
        let budget = if limit == Duration::MAX { String::new() } else { format!(" <= {} s", limit.as_secs()) };
        println!(
            "{} {name}: {} [{:.1} s{budget}]",
            if passed { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
