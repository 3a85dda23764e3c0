//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use switchdiff::functionals::{
    classify_recurrence, richardson_ratio, solve_hitting, tendency_analysis, Regime, DEFAULT_EPSILONS,
};
use switchdiff::model::{wright_fisher_model, WrightFisherParams};
use switchdiff::montecarlo::{estimate_invariant_histogram, estimate_transition_probability, SimConfig};
use switchdiff::spectral::{verify_symmetry_equations, InvariantDistribution, SpectralBasis};
use switchdiff::PhaseMatrix;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const PRINTED: [[f64; 4]; 4] = [
    [0.12410905, 0.08138740, 0.08920446, 0.1633878],
    [0.11006872, 0.07334748, 0.08181737, 0.1527569],
    [0.09668381, 0.06555764, 0.07453306, 0.1420720],
    [0.08394494, 0.05801744, 0.06735379, 0.1313385],
];

fn params(alpha: f64, beta: f64, k: f64, n: usize) -> WrightFisherParams {
    WrightFisherParams::new(alpha, beta, k, n).unwrap()
}

fn reference() -> WrightFisherParams {
    params(0.0, 0.0, 0.5, 4)
}

fn reference_matrix(m: usize) -> PhaseMatrix {
    SpectralBasis::wright_fisher(&reference(), m)
        .unwrap()
        .transition_probability(1.0, 0.5, (0.75, 1.0))
        .unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn interior(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

fn printed_matrix() -> Outcome {
    let m12 = reference_matrix(12);
    let m20 = reference_matrix(20);
    let printed = PhaseMatrix::from_rows(&PRINTED.map(|r| r.to_vec()));
    let vs_printed = m12.max_abs_diff(&printed);
    let self_conv = m12.max_abs_diff(&m20);
    check(
        vs_printed < 1e-3 && self_conv < 1e-8,
        format!("max |M12 - printed| = {vs_printed:.2e}, |M12 - M20| = {self_conv:.2e}"),
    )
}

fn three_eigenfunctions() -> Outcome {
    let d = reference_matrix(3).max_abs_diff(&reference_matrix(12));
    check(d < 1e-3, format!("max |M3 - M12| = {d:.2e}"))
}

fn monte_carlo() -> Outcome {
    let m = wright_fisher_model(reference()).unwrap();
    let cfg = SimConfig {
        step: 1e-3,
        horizon: 1.0,
        n_paths: 100_000,
        seed: 20_240_601,
        ..SimConfig::default()
    };
    let est = estimate_transition_probability(&m, 0.5, 1.0, (0.75, 1.0), &cfg).map_err(|e| e.to_string())?;
    let exact = reference_matrix(12);
    let mut worst_ratio: f64 = 0.0;
    let mut worst = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let d = (est.mean[(i, j)] - exact[(i, j)]).abs();
            let tol = (3.0 * est.std_error[(i, j)]).max(5e-3);
            if d / tol > worst_ratio {
                worst_ratio = d / tol;
                worst = d;
            }
        }
    }
    let e11 = (est.mean[(0, 0)] - PRINTED[0][0]).abs() / est.std_error[(0, 0)];
    check(
        worst_ratio <= 1.0,
        format!(
            "worst entry off by {worst:.2e} ({:.0}% of tolerance), entry (1,1) {:.2} SE from printed",
            100.0 * worst_ratio,
            e11
        ),
    )
}

fn thresholds() -> Outcome {
    let expect: [(f64, Regime, [Option<f64>; 3]); 4] = [
        (0.25, Regime::MaxForward, [None, None, None]),
        (0.75, Regime::Mixed, [None, None, Some(0.8095238)]),
        (1.25, Regime::Mixed, [None, Some(0.846), Some(0.556)]),
        (1.75, Regime::MaxBackward, [Some(0.789), Some(0.600), Some(0.394)]),
    ];
    let mut balance: f64 = 0.0;
    for (k, regime, x0) in expect {
        let p = params(0.5, 1.0, k, 5);
        let r = tendency_analysis(&p);
        if r.regime != regime {
            return Err(format!("k = {k}: regime {:?}, expected {regime:?}", r.regime));
        }
        for (i, want) in (2..=4).zip(x0) {
            let got = r.threshold(i).unwrap();
            match want {
                Some(v) => {
                    if (got - v).abs() > 1e-3 {
                        return Err(format!("k = {k}, phase {i}: x0 = {got}, expected {v}"));
                    }
                    let (l, m) = (p.lambda(i, got), p.mu(i, got));
                    balance = balance.max((l - m).abs());
                }
                None if got <= 1.0 => return Err(format!("k = {k}, phase {i}: unexpected threshold {got}")),
                None => {}
            }
        }
    }
    check(balance < 1e-12, format!("all regimes and thresholds match, max |lambda - mu| = {balance:.1e}"))
}

fn invariant() -> Outcome {
    let ys = interior(30);
    let (mut route, mut mass, mut stat, mut limit): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for p in [params(1.0, 1.0, 1.25, 2), params(1.0, 1.0, 1.25, 5), params(0.0, 0.5, 0.3, 3), params(2.0, 0.0, 0.9, 4)] {
        let inv = InvariantDistribution::new(&p).map_err(|e| e.to_string())?;
        route = route.max(inv.route_discrepancy(&ys).unwrap());
        mass = mass.max((inv.summary().total_mass - 1.0).abs());
        for &y in &ys {
            stat = stat.max(inv.stationarity_residual(y).unwrap());
        }
        let b = SpectralBasis::wright_fisher(&p, 12).map_err(|e| e.to_string())?;
        for &(x, y) in &[(0.2, 0.3), (0.5, 0.5), (0.9, 0.15), (0.35, 0.8)] {
            let k = b.transition_density(50.0, x, y).unwrap();
            let psi = inv.density(y).unwrap();
            for i in 0..p.n_phases {
                for (j, v) in psi.iter().enumerate() {
                    limit = limit.max((k[(i, j)] - v).abs());
                }
            }
        }
    }
    check(
        route < 1e-10 && mass < 1e-10 && stat < 1e-8 && limit < 1e-6,
        format!("routes {route:.1e}, mass {mass:.1e}, stationarity {stat:.1e}, t=50 rows {limit:.1e}"),
    )
}

fn symmetry() -> Outcome {
    let xs = interior(30);
    let (mut sym, mut adj): (f64, f64) = (0.0, 0.0);
    for n in 2..=5 {
        for (a, b, kf) in [(0.0, 0.0, 0.5), (1.0, 1.0, 0.3), (-0.5, 0.5, 0.8)] {
            let p = params(a, b, kf * (b + 1.0), n);
            let m = wright_fisher_model(p).unwrap();
            sym = sym.max(verify_symmetry_equations(&m, &xs).map_err(|e| e.to_string())?.max_residual());
            let basis = SpectralBasis::wright_fisher(&p, 8).map_err(|e| e.to_string())?;
            adj = adj.max(basis.self_adjointness_defect().unwrap());
        }
    }
    check(sym < 1e-8 && adj < 1e-8, format!("symmetry residual {sym:.1e}, self-adjointness {adj:.1e}"))
}

fn random_triples(seed: u64, count: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.random_range(0.1..1.0), rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)))
        .collect()
}

fn pde_residuals() -> Outcome {
    let b = SpectralBasis::wright_fisher(&reference(), 12).map_err(|e| e.to_string())?;
    let (mut back, mut fwd): (f64, f64) = (0.0, 0.0);
    for (t, x, y) in random_triples(7, 10) {
        back = back.max(b.backward_residual(t, x, y).unwrap());
        fwd = fwd.max(b.forward_residual(t, x, y).unwrap());
    }
    check(back < 1e-6 && fwd < 1e-6, format!("backward {back:.1e}, forward {fwd:.1e}"))
}

fn chapman_kolmogorov() -> Outcome {
    let b = SpectralBasis::wright_fisher(&reference(), 12).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for (t, x, y) in random_triples(13, 5) {
        let s = rng.random_range(0.1..1.0);
        worst = worst.max(b.chapman_kolmogorov_defect(s, t, x, y).unwrap());
    }
    check(worst < 1e-6, format!("max defect {worst:.1e}"))
}

fn legendre(n: usize, u: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, u);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * u * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn scalar_reduction() -> Outcome {
    let p = params(0.0, 0.0, 0.5, 1);
    let b = SpectralBasis::wright_fisher(&p, 10).map_err(|e| e.to_string())?;
    let omega = p.weight().eval(0.5)[(0, 0)];
    let (mut ev, mut ef): (f64, f64) = (0.0, 0.0);
    for n in 0..10 {
        let nf = n as f64;
        ev = ev.max((b.eigenvalue(n)[(0, 0)] + nf * (nf + 1.0)).abs());
        let scale = (2.0 * nf + 1.0).sqrt() / omega.sqrt();
        let sign = b.eigenfunction(n).eval(1.0)[(0, 0)].signum();
        for x in interior(20) {
            let want = sign * scale * legendre(n, 2.0 * x - 1.0);
            ef = ef.max((b.eigenfunction(n).eval(x)[(0, 0)] - want).abs());
        }
    }
    let m = wright_fisher_model(p).unwrap();
    let u = solve_hitting(&m, 0.25, 0.75, 401).unwrap().value_at(0.5).unwrap()[(0, 0)];
    let ratio = richardson_ratio(|g| solve_hitting(&m, 0.3, 0.9, g), 41).unwrap();
    check(
        ev < 1e-10 && ef < 1e-8 && (u - 0.5).abs() < 1e-4 && (3.5..=4.5).contains(&ratio),
        format!("eigenvalues {ev:.1e}, Legendre {ef:.1e}, U(1/2) = {u:.8}, Richardson ratio {ratio:.3}"),
    )
}

fn recurrence() -> Outcome {
    let mut lines = Vec::new();
    let mut verdicts = Vec::new();
    for alpha in [1.0, -0.5] {
        let m = wright_fisher_model(params(alpha, 1.0, 1.25, 2)).unwrap();
        let r = classify_recurrence(&m, &DEFAULT_EPSILONS).map_err(|e| e.to_string())?;
        lines.push(format!("    alpha = {alpha}: {}", r.verdict));
        lines.push("      eps        lower deficit  upper deficit  max exit time".to_string());
        for (i, e) in r.epsilons.iter().enumerate() {
            lines.push(format!(
                "      {e:<9.1e}  {:<13.4e}  {:<13.4e}  {:.4e}",
                r.lower.deficits[i],
                r.upper.deficits[i],
                r.lower.exit_max[i].max(r.upper.exit_max[i])
            ));
        }
        lines.push(format!(
            "      limits: lower {:.3e} ({}), upper {:.3e} ({})",
            r.lower.extrapolated_deficit, r.lower.fit, r.upper.extrapolated_deficit, r.upper.fit
        ));
        verdicts.push((r.recurrent, r.positive_recurrent));
    }
    let ok = verdicts[0] == (true, true) && !verdicts[1].0;
    check(ok, format!("alpha=1 {:?}, alpha=-0.5 {:?}\n{}", verdicts[0], verdicts[1], lines.join("\n")))
}

fn ergodic_histogram() -> Outcome {
    let p = params(1.0, 1.0, 1.25, 2);
    let m = wright_fisher_model(p).unwrap();
    let inv = InvariantDistribution::new(&p).unwrap();
    let bins = 20;
    let target = inv.bin_masses(bins).unwrap();
    let masses = inv.phase_masses();
    let cfg = SimConfig {
        step: 1e-3,
        horizon: 5000.0,
        n_paths: 1,
        seed: 77,
        ..SimConfig::default()
    };
    let mut hists = Vec::new();
    let (mut tv, mut pm): (f64, f64) = (0.0, 0.0);
    for i0 in [1, 2] {
        let h = estimate_invariant_histogram(&m, 0.3, i0, &cfg, 100.0, bins).map_err(|e| e.to_string())?;
        tv = tv.max(h.tv_distance(&target).unwrap());
        for (a, b) in h.phase_masses().iter().zip(&masses) {
            pm = pm.max((a - b).abs());
        }
        hists.push(h);
    }
    let between = hists[0].tv_distance(&hists[1].mass).unwrap();
    check(
        tv < 0.05 && between < 0.05 && pm < 0.02,
        format!("TV to binned density {tv:.4}, between starts {between:.4}, phase mass {pm:.4}"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("printed matrix reproduction", printed_matrix),
        ("three eigenfunctions suffice", three_eigenfunctions),
        ("Monte Carlo cross-validation", monte_carlo),
        ("threshold values", thresholds),
        ("invariant distribution", invariant),
        ("symmetric pair verification", symmetry),
        ("PDE residuals", pde_residuals),
        ("Chapman-Kolmogorov", chapman_kolmogorov),
        ("scalar reduction", scalar_reduction),
        ("recurrence trends", recurrence),
        ("ergodic histogram", ergodic_histogram),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name} [{secs:.1}s]: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
