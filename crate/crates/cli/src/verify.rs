//! Property suite behind `glct verify`.
//!
//! Each check reports the largest error seen over its fixtures against a
//! fixed tolerance. Reports only depend on the seed, the optional graph and
//! the options.

use std::f64::consts::PI;
use std::fmt::Write as _;

use glct_core::graph::{cycle_graph, erdos_renyi, geometric_knn, path_graph};
use glct_core::signal_ops::{convolve_with, translate_with};
use glct_core::spectral::{identity, max_abs_diff, CMat};
use glct_core::transforms::analytic_cycle_basis;
use glct_core::{
    compose_params, dlct_reference, Complex64, GlctOperator, GlctOptions, Graph, GraphSignal,
    LctParams, Result, ScalingMode, SpectralContext,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const CHECKS: &[&str] = &[
    "unitarity",
    "inverse",
    "identity-reduction",
    "gft-reduction",
    "gfrft-reduction",
    "convolution",
    "translation",
    "restricted-additivity",
    "scaling-invariance",
    "gfrft-additivity",
    "cycle-dft",
    "cycle-oracle",
];

const FAULT: f64 = 1e-3;

#[derive(Clone, Debug, Default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub graph: Option<Graph>,
    pub options: GlctOptions,
    /// Name of a check whose operators get corrupted.
    pub inject_fault: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub fixtures: Vec<String>,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render_text(&self) -> String {
        let mut s = format!("seed,{}\nfixtures,{}\n", self.seed, self.fixtures.join(" "));
        s.push_str("property,max_error,tolerance,cases,status\n");
        for c in &self.checks {
            writeln!(
                s,
                "{},{:.6e},{:.1e},{},{}",
                c.name,
                c.max_error,
                c.tolerance,
                c.cases,
                if c.passed() { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        writeln!(s, "overall,{}", if self.passed() { "PASS" } else { "FAIL" }).unwrap();
        s
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap() + "\n"
    }
}

struct Fixture {
    name: String,
    ctx: SpectralContext,
}

struct Suite<'a> {
    cfg: &'a VerifyConfig,
    fixtures: Vec<Fixture>,
    params: Vec<LctParams>,
    rng: ChaCha8Rng,
}

impl Suite<'_> {
    fn faulty(&self, check: &str) -> bool {
        self.cfg.inject_fault.as_deref() == Some(check)
    }

    fn taint(&self, check: &str, m: &mut CMat) {
        if self.faulty(check) {
            m[(0, 0)] += Complex64::new(FAULT, 0.0);
        }
    }

    fn operator(
        &self,
        check: &str,
        ctx: &SpectralContext,
        p: &LctParams,
        opts: &GlctOptions,
    ) -> Result<GlctOperator> {
        let mut op = ctx.operator(p, opts)?;
        self.taint(check, &mut op.matrix);
        Ok(op)
    }

    fn random_signal(&mut self, n: usize) -> GraphSignal {
        GraphSignal::new(
            (0..n)
                .map(|_| {
                    Complex64::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))
                })
                .collect(),
        )
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> LctParams {
    let xi = rng.gen_range(-2.0..2.0);
    let sigma = rng.gen_range(0.25..4.0);
    let alpha = rng.gen_range(-PI..PI);
    LctParams::from_decomposed(xi, sigma, alpha).expect("sigma is positive")
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<Report> {
    faer::set_global_parallelism(faer::Par::Seq);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut graphs: Vec<(String, Graph)> = Vec::new();
    match &cfg.graph {
        Some(g) => graphs.push((format!("input(n={})", g.n()), g.clone())),
        None => {
            graphs.push(("cycle(8)".into(), cycle_graph(8)?));
            graphs.push(("path(16)".into(), path_graph(16)?));
            graphs.push((
                "random(24)".into(),
                erdos_renyi(24, 0.2, Some((0.5, 1.5)), &mut rng)?,
            ));
            graphs.push(("geometric(32)".into(), geometric_knn(32, 4, &mut rng)?));
        }
    }
    let params = (0..5).map(|_| random_params(&mut rng)).collect();
    let mut suite = Suite {
        cfg,
        fixtures: graphs
            .into_iter()
            .map(|(name, g)| Fixture {
                name,
                ctx: SpectralContext::new(g),
            })
            .collect(),
        params,
        rng,
    };
    let checks = vec![
        unitarity(&suite)?,
        inverse(&mut suite)?,
        reduction(&suite, "identity-reduction")?,
        reduction(&suite, "gft-reduction")?,
        reduction(&suite, "gfrft-reduction")?,
        convolution(&mut suite)?,
        translation(&mut suite)?,
        restricted_additivity(&mut suite)?,
        scaling_invariance(&suite)?,
        gfrft_additivity(&suite)?,
        cycle_dft(&suite)?,
        cycle_oracle(&mut suite)?,
    ];
    debug_assert_eq!(checks.len(), CHECKS.len());
    Ok(Report {
        seed: cfg.seed,
        fixtures: suite.fixtures.iter().map(|f| f.name.clone()).collect(),
        checks,
    })
}

fn result(name: &'static str, max_error: f64, tolerance: f64, cases: usize) -> CheckResult {
    CheckResult {
        name,
        max_error,
        tolerance,
        cases,
    }
}

/// Worst `defect / N`, so the tolerance is the per-vertex bound.
fn unitarity(s: &Suite) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for f in &s.fixtures {
        for p in &s.params {
            let op = s.operator("unitarity", &f.ctx, p, &s.cfg.options)?;
            let defect = glct_core::unitarity_defect(&op.matrix) / f.ctx.n() as f64;
            worst = worst.max(defect);
            cases += 1;
        }
    }
    Ok(result("unitarity", worst, 1e-9, cases))
}

fn inverse(s: &mut Suite) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for fi in 0..s.fixtures.len() {
        for pi in 0..s.params.len() {
            let n = s.fixtures[fi].ctx.n();
            let signal = s.random_signal(n);
            let op = s.operator(
                "inverse",
                &s.fixtures[fi].ctx,
                &s.params[pi],
                &s.cfg.options,
            )?;
            let back = op.apply_inverse(&op.apply(&signal)?)?;
            worst = worst.max(back.max_abs_diff(&signal) / signal.max_abs());
            cases += 1;
        }
    }
    Ok(result("inverse", worst, 1e-9, cases))
}

fn reduction(s: &Suite, name: &'static str) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for f in &s.fixtures {
        let n = f.ctx.n();
        let pairs: Vec<(LctParams, CMat)> = match name {
            "identity-reduction" => vec![(LctParams::identity(), identity(n))],
            "gft-reduction" => vec![(LctParams::fourier(), f.ctx.gft_matrix()?)],
            _ => [0.2, 0.9, 1.7, -2.4]
                .iter()
                .map(|&a| Ok((LctParams::rotation(a), f.ctx.gfrft_matrix(2.0 * a / PI)?)))
                .collect::<Result<_>>()?,
        };
        for (p, want) in pairs {
            let op = s.operator(name, &f.ctx, &p, &s.cfg.options)?;
            worst = worst.max(max_abs_diff(&op.matrix, &want));
            cases += 1;
        }
    }
    Ok(result(name, worst, 1e-10, cases))
}

fn convolution(s: &mut Suite) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for fi in 0..s.fixtures.len() {
        for pi in 0..s.params.len() {
            let n = s.fixtures[fi].ctx.n();
            let (f, h) = (s.random_signal(n), s.random_signal(n));
            let clean = s.fixtures[fi].ctx.operator(&s.params[pi], &s.cfg.options)?;
            let used = s.operator(
                "convolution",
                &s.fixtures[fi].ctx,
                &s.params[pi],
                &s.cfg.options,
            )?;
            let conv = convolve_with(&used, &f, &h)?;
            let lhs = clean.apply(&conv)?;
            let rhs = clean.apply(&f)?.hadamard(&clean.apply(&h)?)?;
            worst = worst.max(lhs.max_abs_diff(&rhs));
            cases += 1;
        }
    }
    Ok(result("convolution", worst, 1e-9, cases))
}

fn translation(s: &mut Suite) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for fi in 0..s.fixtures.len() {
        for pi in 0..s.params.len() {
            let n = s.fixtures[fi].ctx.n();
            let f = s.random_signal(n);
            let i = s.rng.gen_range(0..n);
            let clean = s.fixtures[fi].ctx.operator(&s.params[pi], &s.cfg.options)?;
            let used = s.operator(
                "translation",
                &s.fixtures[fi].ctx,
                &s.params[pi],
                &s.cfg.options,
            )?;
            let t = translate_with(&used, &f, i)?;
            let want = clean
                .apply(&f)?
                .hadamard(&clean.column(i)?)?
                .scale(Complex64::new((n as f64).sqrt(), 0.0));
            worst = worst.max(clean.apply(&t)?.max_abs_diff(&want));
            cases += 1;
        }
    }
    Ok(result("translation", worst, 1e-9, cases))
}

/// `L(p₂)·L(p₁) = L(p₂∘p₁)` for a unit-σ rotation `p₁` and unit-σ `p₂`,
/// with angles small enough that the composed angle does not wrap.
fn restricted_additivity(s: &mut Suite) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for fi in 0..s.fixtures.len() {
        for _ in 0..3 {
            let a1 = s.rng.gen_range(-1.5..1.5);
            let a2 = s.rng.gen_range(-1.5..1.5);
            let xi2 = s.rng.gen_range(-1.0..1.0);
            let p1 = LctParams::rotation(a1);
            let p2 = LctParams::from_decomposed(xi2, 1.0, a2)?;
            let p3 = compose_params(&p2, &p1)?;
            let ctx = &s.fixtures[fi].ctx;
            let opts = &s.cfg.options;
            let lhs = &s.operator("restricted-additivity", ctx, &p2, opts)?.matrix
                * &ctx.operator(&p1, opts)?.matrix;
            worst = worst.max(max_abs_diff(&lhs, &ctx.operator(&p3, opts)?.matrix));
            cases += 1;
        }
    }
    Ok(result("restricted-additivity", worst, 1e-9, cases))
}

/// Always measured in the default scaling mode, where it holds by construction.
fn scaling_invariance(s: &Suite) -> Result<CheckResult> {
    let opts = GlctOptions {
        scaling_mode: ScalingMode::GftEigenbasis,
        ..s.cfg.options
    };
    let mut worst = 0.0f64;
    let mut cases = 0;
    for f in &s.fixtures {
        let (xi, alpha) = (0.6, 1.1);
        let base = f
            .ctx
            .operator(&LctParams::from_decomposed(xi, 1.0, alpha)?, &opts)?;
        for sigma in [0.5, 2.0, 10.0] {
            let p = LctParams::from_decomposed(xi, sigma, alpha)?;
            let op = s.operator("scaling-invariance", &f.ctx, &p, &opts)?;
            worst = worst.max(max_abs_diff(&op.matrix, &base.matrix));
            cases += 1;
        }
    }
    Ok(result("scaling-invariance", worst, 1e-10, cases))
}

fn gfrft_additivity(s: &Suite) -> Result<CheckResult> {
    let ctx = SpectralContext::new(path_graph(16)?);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (a, b) in [(0.3, 0.4), (0.1, 0.8), (0.5, 0.5)] {
        let mut fa = ctx.gfrft_matrix(a)?;
        s.taint("gfrft-additivity", &mut fa);
        let lhs = fa * ctx.gfrft_matrix(b)?;
        worst = worst.max(max_abs_diff(&lhs, &ctx.gfrft_matrix(a + b)?));
        cases += 1;
    }
    Ok(result("gfrft-additivity", worst, 1e-9, cases))
}

fn cycle_dft(s: &Suite) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for n in [4, 8, 16] {
        let mut f = glct_core::gft_matrix(&cycle_graph(n)?)?;
        s.taint("cycle-dft", &mut f);
        let reference = analytic_cycle_basis(n, 1.0)
            .eigenvectors
            .adjoint()
            .to_owned();
        worst = worst.max(max_abs_diff(&f, &reference));
    }
    Ok(result("cycle-dft", worst, 1e-10, 3))
}

fn cycle_oracle(s: &mut Suite) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [4, 8, 16] {
        let ctx = SpectralContext::new(cycle_graph(n)?);
        for _ in 0..4 {
            let p = random_params(&mut s.rng);
            let op = s.operator("cycle-oracle", &ctx, &p, &s.cfg.options)?;
            worst = worst.max(max_abs_diff(
                &op.matrix,
                &dlct_reference(n, &p, &s.cfg.options)?,
            ));
            cases += 1;
        }
    }
    Ok(result("cycle-oracle", worst, 1e-8, cases))
}
