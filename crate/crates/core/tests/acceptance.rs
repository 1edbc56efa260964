//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.
//!
//! Runs as a plain binary (`harness = false`) so the table is always printed.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use pleig_core::eigensolver::{second_eigenpair, EigenOptions, EigenReport};
use pleig_core::graph::{
    brute_force_rcc, build_epsilon_graph, cut_metrics, graph_second_eigenpair, threshold_cut, EdgeWeights, Graph,
};
use pleig_core::mesh::{Mesh, ScalarField};
use pleig_core::pde_solver::{
    first_eigenpair, solve_p_poisson, solve_p_poisson_dirichlet, BoundaryCondition, SolveReport, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pi_p(p: f64) -> f64 {
    2.0 * PI / (p * (PI / p).sin())
}

fn closed_form_1d(p: f64, length: f64) -> f64 {
    (p - 1.0) * (2.0 * pi_p(p) / length).powf(p)
}

/// Eigen runs shared by criteria 1 to 5.
struct SquareRuns {
    dirichlet: Mesh,
    neumann: Mesh,
    interval: Mesh,
}

fn run(mesh: &Mesh, p: f64, bc: BoundaryCondition) -> Result<EigenReport<'_>, String> {
    let cfg = SolverConfig::for_mesh(p, mesh);
    second_eigenpair(mesh, bc, &cfg, &EigenOptions::default()).map_err(|e| e.to_string())
}

fn criterion_1(report: &Result<EigenReport<'_>, String>, seconds: f64) -> Outcome {
    let target = 5.0 * PI * PI / 16.0;
    match report {
        Ok(r) => {
            let err = (r.lambda2 - target).abs();
            outcome(
                r.converged && err <= 0.002 && seconds <= 300.0,
                format!(
                    "lambda2 = {:.6}, |lambda2 - 5pi^2/16| = {err:.2e} (tol 2e-3), {} iterations, solve took {seconds:.1}s (limit 300s)",
                    r.lambda2, r.iterations
                ),
            )
        }
        Err(e) => outcome(false, e.clone()),
    }
}

fn criterion_2(reports: &[(f64, Result<EigenReport<'_>, String>)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, r) in reports {
        let exact = closed_form_1d(*p, 4.0);
        match r {
            Ok(r) => {
                let rel = (r.lambda2 / exact - 1.0).abs();
                pass &= r.converged && rel <= 0.01;
                parts.push(format!("p={p}: {:.6} vs {exact:.6} rel {rel:.1e}", r.lambda2));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("p={p}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; ") + " (tol 1e-2)")
}

fn criterion_3(report: &Result<EigenReport<'_>, String>) -> Outcome {
    let target = PI * PI / 16.0;
    match report {
        Ok(r) => {
            let rel = (r.lambda2 / target - 1.0).abs();
            let worst_mean = r.diagnostics.iter().map(|d| d.p_mean.abs()).fold(0.0, f64::max);
            outcome(
                r.converged && rel <= 0.01 && worst_mean <= 1e-10,
                format!(
                    "lambda2 = {:.6} vs pi^2/16 = {target:.6}, rel {rel:.1e} (tol 1e-2); max |p-mean| {worst_mean:.1e} (tol 1e-10)",
                    r.lambda2
                ),
            )
        }
        Err(e) => outcome(false, e.clone()),
    }
}

fn criterion_4(runs: &[(&str, &Result<EigenReport<'_>, String>)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, r) in runs {
        let Ok(r) = r else {
            pass = false;
            parts.push(format!("{name}: no report"));
            continue;
        };
        let min_rayleigh = r.diagnostics.iter().map(|d| d.rayleigh_margin).fold(f64::INFINITY, f64::min);
        let min_lower = r.diagnostics.iter().map(|d| d.lower_bound_margin).fold(f64::INFINITY, f64::min);
        let worst_identity = r
            .diagnostics
            .iter()
            .flat_map(|d| d.identity_errors)
            .fold(0.0, f64::max);
        let gap = r.diagnostics.last().map_or(f64::NAN, |d| d.lambda_gap) / r.lambda2;
        let ok = r.invariant_violations.is_empty()
            && min_rayleigh >= 0.0
            && min_lower >= 0.0
            && worst_identity <= 1e-10
            && gap <= 1e-3;
        pass &= ok;
        parts.push(format!(
            "{name}: bound margin {min_rayleigh:.1e}, lower margin {min_lower:.1e}, identity {worst_identity:.1e}, gap {gap:.1e}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_5(mesh: &Mesh, report: &Result<EigenReport<'_>, String>) -> Outcome {
    let Ok(r) = report else {
        return outcome(false, "no second eigenpair".into());
    };
    let cfg = SolverConfig::for_mesh(2.0, mesh);
    let first = match first_eigenpair(mesh, &cfg, &EigenOptions::default()) {
        Ok(f) => f,
        Err(e) => return outcome(false, e.to_string()),
    };
    let dot = r.u2.lumped_dot(&first.w1).unwrap();
    let scale = r.u2.norm_p(2.0) * first.w1.norm_p(2.0);
    let rel = dot.abs() / scale;
    outcome(rel <= 1e-6, format!("|<u2, w1>| / (|u2| |w1|) = {rel:.1e} (tol 1e-6), lambda1 = {:.6}", first.lambda1))
}

fn monotone(report: &SolveReport) -> bool {
    report.energy_history.windows(2).all(|w| w[1] <= w[0])
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut all_monotone = true;

    let m = Mesh::interval(0.0, 1.0, 128).unwrap();
    let one = ScalarField::from_fn(&m, |_, _| 1.0);
    match solve_p_poisson_dirichlet(&one, &SolverConfig::for_mesh(2.0, &m)) {
        Ok((u, rep)) => {
            let err = m
                .nodes()
                .iter()
                .zip(u.values())
                .map(|(x, v)| (v - 0.5 * x[0] * (1.0 - x[0])).abs())
                .fold(0.0, f64::max);
            pass &= rep.converged && err <= 1e-4;
            all_monotone &= monotone(&rep);
            parts.push(format!("p=2 max error {err:.1e} (tol 1e-4)"));
        }
        Err(e) => {
            pass = false;
            parts.push(e.to_string());
        }
    }
    match solve_p_poisson_dirichlet(&one, &SolverConfig::for_mesh(3.0, &m)) {
        Ok((u, rep)) => {
            let mid = u.values()[64];
            pass &= rep.converged && (mid - 0.23570).abs() <= 2e-3;
            all_monotone &= monotone(&rep);
            parts.push(format!("p=3 midpoint {mid:.5} vs 0.23570 (tol 2e-3)"));
        }
        Err(e) => {
            pass = false;
            parts.push(e.to_string());
        }
    }
    // further solves, only checked for monotone energy
    let sq = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 40, 40).unwrap();
    for &p in &[1.3, 1.5, 2.5, 4.0, 8.0] {
        let f = ScalarField::from_fn(&sq, |x, y| 1.0 + x - y * y);
        for (bc, f) in [
            (BoundaryCondition::Dirichlet, f.clone()),
            (BoundaryCondition::Neumann, ScalarField::from_fn(&sq, |x, y| (PI * x).cos() + (PI * y).cos())),
        ] {
            match solve_p_poisson(&f, None, bc, &SolverConfig::for_mesh(p, &sq)) {
                Ok((_, rep)) => all_monotone &= monotone(&rep),
                Err(e) => {
                    pass = false;
                    parts.push(format!("p={p} {}: {e}", bc.as_str()));
                }
            }
        }
    }
    pass &= all_monotone;
    parts.push(format!("energy histories non-increasing: {all_monotone}"));
    outcome(pass, parts.join("; "))
}

fn dense_fiedler(g: &Graph) -> f64 {
    let n = g.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for (i, j, w) in g.edges() {
        l[(i, j)] -= w;
        l[(j, i)] -= w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    let mut ev: Vec<f64> = l.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev[1]
}

fn random_connected_graph(rng: &mut ChaCha8Rng) -> Graph {
    loop {
        let n = rng.random_range(5..=12);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let g = build_epsilon_graph(&pts, 0.55, EdgeWeights::Gaussian { sigma: 0.4 }).unwrap();
        if g.is_connected() {
            return g;
        }
    }
}

fn bridged_cliques() -> Graph {
    let mut edges = Vec::new();
    for block in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((block + i, block + j, 1.0));
            }
        }
    }
    edges.push((3, 4, 1.0));
    Graph::from_edges(8, &edges).unwrap()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SolverConfig::for_graph(2.0);
    let opts = EigenOptions { outer_tol: 1e-12, max_outer: 2000 };
    let mut worst = 0.0f64;
    let mut pass = true;
    for _ in 0..10 {
        let g = random_connected_graph(&mut rng);
        let exact = dense_fiedler(&g);
        match graph_second_eigenpair(&g, &cfg, &opts) {
            Ok(r) => worst = worst.max((r.lambda2 / exact - 1.0).abs()),
            Err(e) => {
                pass = false;
                eprintln!("graph eigenpair failed: {e}");
            }
        }
    }
    pass &= worst <= 1e-4;

    let g = bridged_cliques();
    let (rcc_star, _) = brute_force_rcc(&g).unwrap();
    let cut_ok = match graph_second_eigenpair(&g, &cfg, &opts) {
        Ok(r) => {
            let c = threshold_cut(&r.f).unwrap();
            let m = cut_metrics(&g, &c).unwrap();
            (m.rcc - rcc_star).abs() <= 1e-12
        }
        Err(_) => false,
    };
    pass &= cut_ok;
    outcome(
        pass,
        format!("max relative Fiedler error {worst:.1e} over 10 graphs (tol 1e-4); bridged cliques RCC* = {rcc_star} matched: {cut_ok}"),
    )
}

fn planted_blobs(seed: u64) -> (Vec<[f64; 2]>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(500);
    let mut labels = Vec::with_capacity(500);
    for k in 0..500 {
        let left = k < 250;
        let x0 = if left { 0.0 } else { 1.1 };
        pts.push([x0 + rng.random::<f64>(), rng.random::<f64>()]);
        labels.push(left);
    }
    (pts, labels)
}

fn criterion_8() -> Outcome {
    let (pts, labels) = planted_blobs(2024);
    let g = build_epsilon_graph(&pts, 0.15, EdgeWeights::Unit).unwrap();
    let mut pass = g.is_connected();
    let mut parts = vec![format!("{} edges, connected: {}", g.edge_count(), g.is_connected())];
    for &p in &[1.25, 2.0] {
        let cfg = SolverConfig::for_graph(p);
        match graph_second_eigenpair(&g, &cfg, &EigenOptions { outer_tol: 1e-8, max_outer: 500 }) {
            Ok(r) => {
                let c = threshold_cut(&r.f).unwrap();
                let same = c.iter().zip(&labels).filter(|(a, b)| a == b).count();
                let agree = same.max(500 - same) as f64 / 500.0;
                pass &= agree >= 0.95;
                parts.push(format!("p={p}: agreement {:.1}% (min 95%)", 100.0 * agree));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("p={p}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let m = Mesh::interval(-2.0, 2.0, 2000).unwrap();
    let mut roots = Vec::new();
    let mut parts = Vec::new();
    for &p in &[5.0, 10.0, 30.0] {
        match run(&m, p, BoundaryCondition::Dirichlet) {
            Ok(r) => {
                let root = r.lambda2.powf(1.0 / p);
                parts.push(format!("p={p}: lambda2^(1/p) = {root:.5}"));
                roots.push(root);
            }
            Err(e) => parts.push(format!("p={p}: {e}")),
        }
    }
    let pass = roots.len() == 3 && roots.windows(2).all(|w| w[1] < w[0]) && roots.iter().all(|&r| r >= 0.98);
    outcome(pass, parts.join("; ") + " (decreasing, >= 0.98)")
}

fn main() {
    let start = Instant::now();
    let runs = SquareRuns {
        dirichlet: Mesh::rectangle(-2.0, 2.0, -2.0, 2.0, 200, 200).unwrap(),
        neumann: Mesh::rectangle(-2.0, 2.0, -2.0, 2.0, 128, 128).unwrap(),
        interval: Mesh::interval(-2.0, 2.0, 2000).unwrap(),
    };
    let square_start = Instant::now();
    let square = run(&runs.dirichlet, 2.0, BoundaryCondition::Dirichlet);
    let square_seconds = square_start.elapsed().as_secs_f64();
    let sweep: Vec<(f64, Result<EigenReport<'_>, String>)> = [1.5, 2.0, 3.0, 5.0]
        .iter()
        .map(|&p| (p, run(&runs.interval, p, BoundaryCondition::Dirichlet)))
        .collect();
    let neumann = run(&runs.neumann, 2.0, BoundaryCondition::Neumann);

    let mut invariant_runs: Vec<(String, &Result<EigenReport<'_>, String>)> =
        vec![("square".into(), &square), ("neumann".into(), &neumann)];
    for (p, r) in &sweep {
        invariant_runs.push((format!("1d p={p}"), r));
    }
    let named: Vec<(&str, &Result<EigenReport<'_>, String>)> =
        invariant_runs.iter().map(|(n, r)| (n.as_str(), *r)).collect();

    let results: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("1 dirichlet square p=2", Box::new(|| criterion_1(&square, square_seconds))),
        ("2 interval closed form", Box::new(|| criterion_2(&sweep))),
        ("3 neumann square p=2", Box::new(|| criterion_3(&neumann))),
        ("4 per-iteration invariants", Box::new(|| criterion_4(&named))),
        ("5 p=2 orthogonality", Box::new(|| criterion_5(&runs.dirichlet, &square))),
        ("6 p-Poisson oracles", Box::new(criterion_6)),
        ("7 graph Fiedler and RCC", Box::new(criterion_7)),
        ("8 planted clusters", Box::new(criterion_8)),
        ("9 large-p trend", Box::new(criterion_9)),
    ];
    let mut failures = 0;
    for (name, check) in results {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} criteria failed, total {:.1}s", failures, start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
