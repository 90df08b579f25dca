//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use faer::Mat;
use glct_core::graph::{cycle_graph, erdos_renyi, path_graph};
use glct_core::signal_ops::{convolve_with, translate_with};
use glct_core::spectral::{identity, max_abs_diff};
use glct_core::transforms::analytic_dft_matrix;
use glct_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_glct");
const PERF_N: usize = 2642;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> LctParams {
    let xi = rng.gen_range(-2.0..2.0);
    let sigma = rng.gen_range(0.25..4.0);
    let alpha = rng.gen_range(-PI..PI);
    LctParams::from_decomposed(xi, sigma, alpha).unwrap()
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> GraphSignal {
    GraphSignal::new(
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

fn undirected_fixture(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let p = rng.gen_range(0.1..0.5);
    erdos_renyi(n, p, Some((0.1, 2.0)), rng).unwrap()
}

fn glct_binary(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("GLCT_CACHE_DIR")
        .output()
        .expect("spawn glct")
}

/// Criteria 1 and 2 share one sweep: 4 sizes × 5 graphs × 20 parameter sets.
fn unitarity_and_inverse() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let (mut worst_defect, mut worst_inverse, mut cases) = (0.0f64, 0.0f64, 0);
    for n in [8, 16, 32, 64] {
        for _ in 0..5 {
            let ctx = SpectralContext::new(undirected_fixture(&mut rng, n));
            for _ in 0..20 {
                let p = random_params(&mut rng);
                let op = ctx.operator(&p, &GlctOptions::default()).unwrap();
                worst_defect = worst_defect.max(op.unitarity_defect() / n as f64);
                let s = random_signal(&mut rng, n);
                let back = op.apply_inverse(&op.apply(&s).unwrap()).unwrap();
                worst_inverse = worst_inverse.max(back.max_abs_diff(&s) / s.max_abs());
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let unit_ok = cases >= 400 && worst_defect <= 1e-9 && elapsed <= Duration::from_secs(60);
    (
        outcome(
            unit_ok,
            format!(
                "{cases} cases, max defect/N {worst_defect:.3e} (tol 1e-9), {:.1} s (limit 60 s)",
                elapsed.as_secs_f64()
            ),
        ),
        outcome(
            worst_inverse <= 1e-9,
            format!("max relative round-trip error {worst_inverse:.3e} (tol 1e-9)"),
        ),
    )
}

fn reductions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut graphs = vec![
        cycle_graph(8).unwrap(),
        cycle_graph(64).unwrap(),
        path_graph(16).unwrap(),
        path_graph(64).unwrap(),
    ];
    for n in [12, 40, 64] {
        graphs.push(undirected_fixture(&mut rng, n));
    }
    let opts = GlctOptions::default();
    let mut worst = 0.0f64;
    for g in &graphs {
        let n = g.n();
        let ctx = SpectralContext::new(g.clone());
        let id = ctx.operator(&LctParams::identity(), &opts).unwrap();
        worst = worst.max(max_abs_diff(&id.matrix, &identity(n)));
        let f = ctx.operator(&LctParams::fourier(), &opts).unwrap();
        worst = worst.max(max_abs_diff(&f.matrix, &gft_matrix(g).unwrap()));
        for _ in 0..5 {
            let alpha = rng.gen_range(-PI..PI);
            let r = ctx.operator(&LctParams::rotation(alpha), &opts).unwrap();
            worst = worst.max(max_abs_diff(
                &r.matrix,
                &gfrft_matrix(g, 2.0 * alpha / PI).unwrap(),
            ));
        }
    }
    outcome(
        worst <= 1e-10,
        format!(
            "{} graphs, max entry error {worst:.3e} (tol 1e-10)",
            graphs.len()
        ),
    )
}

/// Canonical row order of the analytic DFT: eigenvalue `e^{−j2πk/N}` sorted
/// by descending real part, then descending imaginary part.
fn canonical_dft(n: usize) -> Mat<Complex64> {
    let mut keys: Vec<(i64, i64, usize)> = (0..n)
        .map(|k| {
            let t = -2.0 * PI * k as f64 / n as f64;
            (
                (t.cos() * 1e9).round() as i64,
                (t.sin() * 1e9).round() as i64,
                k,
            )
        })
        .collect();
    keys.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    let w = analytic_dft_matrix(n);
    Mat::from_fn(n, n, |r, m| w[(keys[r].2, m)])
}

fn cycle_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_op, mut worst_dft) = (0.0f64, 0.0f64);
    for n in [4, 8, 16] {
        let g = cycle_graph(n).unwrap();
        worst_dft = worst_dft.max(max_abs_diff(&gft_matrix(&g).unwrap(), &canonical_dft(n)));
        let ctx = SpectralContext::new(g);
        for _ in 0..10 {
            let p = random_params(&mut rng);
            let opts = GlctOptions::default();
            let op = ctx.operator(&p, &opts).unwrap();
            worst_op = worst_op.max(max_abs_diff(
                &op.matrix,
                &dlct_reference(n, &p, &opts).unwrap(),
            ));
        }
    }
    outcome(
        worst_op <= 1e-8 && worst_dft <= 1e-10,
        format!("operator vs reference {worst_op:.3e} (tol 1e-8), GFT vs DFT {worst_dft:.3e} (tol 1e-10)"),
    )
}

fn convolution_and_translation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_conv, mut worst_trans) = (0.0f64, 0.0f64);
    for draw in 0..50 {
        let n = [8, 16, 32, 64][draw % 4];
        let g = undirected_fixture(&mut rng, n);
        let p = random_params(&mut rng);
        let op = glct_operator(&g, &p, &GlctOptions::default()).unwrap();
        let f = random_signal(&mut rng, n);
        let h = random_signal(&mut rng, n);
        let lhs = op.apply(&convolve_with(&op, &f, &h).unwrap()).unwrap();
        let rhs = op
            .apply(&f)
            .unwrap()
            .hadamard(&op.apply(&h).unwrap())
            .unwrap();
        worst_conv = worst_conv.max(lhs.max_abs_diff(&rhs));
        let i = rng.gen_range(0..n);
        let t = op.apply(&translate_with(&op, &f, i).unwrap()).unwrap();
        let want = op
            .apply(&f)
            .unwrap()
            .hadamard(&op.column(i).unwrap())
            .unwrap()
            .scale(Complex64::new((n as f64).sqrt(), 0.0));
        worst_trans = worst_trans.max(t.max_abs_diff(&want));
    }
    outcome(
        worst_conv <= 1e-9 && worst_trans <= 1e-9,
        format!("50 draws, convolution {worst_conv:.3e}, translation {worst_trans:.3e} (tol 1e-9)"),
    )
}

fn restricted_additivity(dir: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = GlctOptions::default();
    let mut worst = 0.0f64;
    for n in [8, 16, 32, 64] {
        let ctx = SpectralContext::new(undirected_fixture(&mut rng, n));
        for _ in 0..5 {
            let p1 = LctParams::rotation(rng.gen_range(-1.5..1.5));
            let p2 =
                LctParams::from_decomposed(rng.gen_range(-2.0..2.0), 1.0, rng.gen_range(-1.5..1.5))
                    .unwrap();
            let p3 = compose_params(&p2, &p1).unwrap();
            let lhs = &ctx.operator(&p2, &opts).unwrap().matrix
                * &ctx.operator(&p1, &opts).unwrap().matrix;
            worst = worst.max(max_abs_diff(
                &lhs,
                &ctx.operator(&p3, &opts).unwrap().matrix,
            ));
        }
    }
    // General composition through the CLI: the deviation is reported, not asserted.
    let graph = dir.join("compose.edges");
    std::fs::write(
        &graph,
        glct_core::io::write_edge_list(&path_graph(12).unwrap()),
    )
    .unwrap();
    let out = glct_binary(&[
        "compose",
        "--p1",
        "1,0,0.7,1",
        "--p2",
        "0.8,0.6,-0.2,1.1",
        "--graph",
        graph.to_str().unwrap(),
    ]);
    let reported = serde_json::from_slice::<serde_json::Value>(&out.stdout)
        .ok()
        .and_then(|v| v["deviation"].as_f64());
    outcome(
        worst <= 1e-9 && out.status.success() && reported.is_some(),
        format!(
            "max entry error {worst:.3e} (tol 1e-9); general-composition deviation reported by compose: {}",
            reported.map_or("missing".into(), |d| format!("{d:.3e}"))
        ),
    )
}

fn scaling_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut graphs = vec![cycle_graph(16).unwrap(), path_graph(32).unwrap()];
    graphs.push(undirected_fixture(&mut rng, 48));
    for g in &graphs {
        let ctx = SpectralContext::new(g.clone());
        for _ in 0..3 {
            let xi = rng.gen_range(-2.0..2.0);
            let alpha = rng.gen_range(-PI..PI);
            let ops: Vec<_> = [0.5, 1.0, 2.0, 10.0]
                .iter()
                .map(|&s| {
                    ctx.operator(
                        &LctParams::from_decomposed(xi, s, alpha).unwrap(),
                        &GlctOptions::default(),
                    )
                    .unwrap()
                })
                .collect();
            for a in &ops {
                for b in &ops {
                    worst = worst.max(max_abs_diff(&a.matrix, &b.matrix));
                }
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max pairwise entry difference {worst:.3e} (tol 1e-10)"),
    )
}

fn gfrft_additivity() -> Outcome {
    let g = path_graph(16).unwrap();
    let lhs = gfrft_matrix(&g, 0.3).unwrap() * gfrft_matrix(&g, 0.4).unwrap();
    let err = max_abs_diff(&lhs, &gfrft_matrix(&g, 0.7).unwrap());
    outcome(err <= 1e-9, format!("max entry error {err:.3e} (tol 1e-9)"))
}

fn peak_child_rss_bytes() -> u64 {
    // SAFETY: getrusage writes into the zeroed struct we pass.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let rc = unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage) };
    assert_eq!(rc, 0);
    usage.ru_maxrss as u64 * 1024
}

fn check_plot_dir(dir: &Path, runs: usize, n: usize) -> std::result::Result<f64, String> {
    let mut worst = 0.0f64;
    for k in 0..runs {
        let csv = std::fs::read_to_string(dir.join(format!("glct_{k:03}.csv")))
            .map_err(|e| e.to_string())?;
        let mut lines = csv.lines();
        let header = lines.next().ok_or("empty csv")?;
        let cols = header.split(',').count();
        if !header.starts_with("vertex_index,") || !header.ends_with("glct_re,glct_im") {
            return Err(format!("bad header {header:?}"));
        }
        let rows: Vec<&str> = lines.collect();
        if rows.len() != n {
            return Err(format!("{} rows, expected {n}", rows.len()));
        }
        for row in rows {
            let f: Vec<&str> = row.split(',').collect();
            if f.len() != cols
                || f.iter()
                    .any(|x| x.parse::<f64>().map_or(true, |v| !v.is_finite()))
            {
                return Err(format!("malformed row {row:?}"));
            }
        }
        let meta: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.join(format!("glct_{k:03}.json")))
                .map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let defect = meta["unitarity_defect"]
            .as_f64()
            .ok_or("missing unitarity_defect")?;
        if defect > 1e-9 * n as f64 {
            return Err(format!("unitarity_defect {defect:e} exceeds 1e-9*N"));
        }
        worst = worst.max(defect / n as f64);
    }
    Ok(worst)
}

fn desk_scale(dir: &Path) -> Outcome {
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    let graph = dir.join("planar.edges");
    let coords = dir.join("planar.coords");
    let signal = dir.join("rect.csv");
    let n = PERF_N.to_string();
    let gen = glct_binary(&[
        "gen",
        "graph:geometric",
        "--n",
        &n,
        "--k",
        "4",
        "--seed",
        "2642",
        "--out",
        &s(&graph),
        "--coords-out",
        &s(&coords),
    ]);
    let sig = glct_binary(&[
        "gen",
        "signal:bipolar-rect",
        "--n",
        &n,
        "--out",
        &s(&signal),
    ]);
    if !gen.status.success() || !sig.status.success() {
        return outcome(false, "fixture generation failed");
    }

    let out = dir.join("planar_hat.csv");
    let start = Instant::now();
    let run = glct_binary(&[
        "transform",
        "--graph",
        &s(&graph),
        "--signal",
        &s(&signal),
        "--params",
        "0.8,0.6,-0.2,1.1",
        "--out",
        &s(&out),
    ]);
    let elapsed = start.elapsed();
    let rss = peak_child_rss_bytes();
    let transformed_rows = std::fs::read_to_string(&out)
        .map(|t| t.lines().count())
        .unwrap_or(0);
    let perf_ok = run.status.success()
        && transformed_rows == PERF_N
        && elapsed <= Duration::from_secs(180)
        && rss <= 2 << 30;

    // Plot grids: α sweep and ξ sweep on the 16-cycle, (σ, α) grid on the
    // planar fixture, plus a single full-size export.
    let cycle = dir.join("cycle16.edges");
    let rect16 = dir.join("rect16.csv");
    glct_binary(&["gen", "graph:cycle", "--n", "16", "--out", &s(&cycle)]);
    glct_binary(&[
        "gen",
        "signal:bipolar-rect",
        "--n",
        "16",
        "--out",
        &s(&rect16),
    ]);
    let mut grid_errors = Vec::new();
    let mut worst_defect = 0.0f64;
    let grids: [(&str, &str, usize, Vec<&str>); 4] = [
        ("alpha", "cycle", 5, vec!["--sweep", "alpha"]),
        ("xi", "cycle", 5, vec!["--sweep", "xi"]),
        ("sigma-alpha", "planar", 6, vec!["--sweep", "sigma-alpha"]),
        ("full", "planar", 1, vec!["--params", "0,1,-1,0"]),
    ];
    for (name, fixture, runs, extra) in grids {
        let plot_dir = dir.join(format!("plot_{name}"));
        let (g, sg, rows) = if fixture == "cycle" {
            (&cycle, &rect16, 16)
        } else {
            (&graph, &signal, PERF_N)
        };
        if name == "sigma-alpha" {
            // The (σ, α) grid runs on a 400-vertex planar fixture to keep the suite short.
            let small = dir.join("planar400.edges");
            let small_coords = dir.join("planar400.coords");
            let small_sig = dir.join("rect400.csv");
            glct_binary(&[
                "gen",
                "graph:geometric",
                "--n",
                "400",
                "--seed",
                "5",
                "--out",
                &s(&small),
                "--coords-out",
                &s(&small_coords),
            ]);
            glct_binary(&[
                "gen",
                "signal:bipolar-rect",
                "--n",
                "400",
                "--out",
                &s(&small_sig),
            ]);
            let mut args = vec![
                "plot-data",
                "--graph",
                small.to_str().unwrap(),
                "--coords",
                small_coords.to_str().unwrap(),
                "--signal",
                small_sig.to_str().unwrap(),
                "--out",
                plot_dir.to_str().unwrap(),
            ];
            args.extend(&extra);
            let r = glct_binary(&args);
            match (r.status.success(), check_plot_dir(&plot_dir, runs, 400)) {
                (true, Ok(d)) => worst_defect = worst_defect.max(d),
                (_, Err(e)) => grid_errors.push(format!("{name}: {e}")),
                (false, _) => grid_errors.push(format!("{name}: exit {:?}", r.status.code())),
            }
            continue;
        }
        let mut args = vec![
            "plot-data",
            "--graph",
            g.to_str().unwrap(),
            "--signal",
            sg.to_str().unwrap(),
            "--out",
            plot_dir.to_str().unwrap(),
        ];
        if fixture == "planar" {
            args.extend(["--coords", coords.to_str().unwrap()]);
        }
        args.extend(&extra);
        let r = glct_binary(&args);
        match (r.status.success(), check_plot_dir(&plot_dir, runs, rows)) {
            (true, Ok(d)) => worst_defect = worst_defect.max(d),
            (_, Err(e)) => grid_errors.push(format!("{name}: {e}")),
            (false, _) => grid_errors.push(format!("{name}: exit {:?}", r.status.code())),
        }
    }
    outcome(
        perf_ok && grid_errors.is_empty(),
        format!(
            "N={PERF_N} transform {:.1} s (limit 180 s), peak child RSS {:.0} MiB (limit 2048 MiB); plot grids {} (max defect/N {worst_defect:.3e})",
            elapsed.as_secs_f64(),
            rss as f64 / (1 << 20) as f64,
            if grid_errors.is_empty() { "well-formed".to_owned() } else { grid_errors.join("; ") }
        ),
    )
}

fn determinism() -> Outcome {
    let a = glct_binary(&["verify", "--seed", "42"]);
    let b = glct_binary(&["verify", "--seed", "42"]);
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        same && a.status.success() && b.status.success(),
        format!(
            "reports {} ({} bytes), exit codes {:?}/{:?}",
            if same { "byte-identical" } else { "differ" },
            a.stdout.len(),
            a.status.code(),
            b.status.code()
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let (c1, c2) = unitarity_and_inverse();
    let results = [
        ("1 unitarity", c1),
        ("2 inverse identity", c2),
        ("3 reductions", reductions()),
        ("4 cycle oracle", cycle_oracle()),
        (
            "5 convolution and translation",
            convolution_and_translation(),
        ),
        ("6 restricted additivity", restricted_additivity(tmp.path())),
        ("7 scaling invariance", scaling_invariance()),
        ("8 GFrFT additivity", gfrft_additivity()),
        ("9 desk-scale performance", desk_scale(tmp.path())),
        ("10 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "criterion {name}: {} - {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
