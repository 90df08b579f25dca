use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use glct_core::graph::{cycle_graph, erdos_renyi, geometric_knn, path_graph};
use glct_core::spectral::max_abs_diff;
use glct_core::{
    compose_params, decompose_params, io, Complex64, Graph, GraphSignal, LctParams, OperatorCache,
    SpectralContext,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::verify::{run_verify, VerifyConfig};
use crate::{
    parse_params, CliError, CliResult, Command, ComposeArgs, Format, GenArgs, PlotArgs, Sweep,
    TransformArgs, VerifyArgs, EXIT_OK, EXIT_VERIFY_FAILED,
};

pub fn dispatch(cfg: &crate::RunConfig, stdout: &mut dyn Write) -> CliResult<i32> {
    match &cfg.command {
        Command::Transform(a) => transform(a, false, stdout),
        Command::Inverse(a) => transform(a, true, stdout),
        Command::Gen(a) => generate(a, stdout),
        Command::Verify(a) => verify(a, stdout),
        Command::Compose(a) => compose(a, stdout),
        Command::PlotData(a) => plot_data(a),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_graph(path: &Path) -> CliResult<Graph> {
    Ok(io::parse_graph(&read_text(path)?)?)
}

pub fn read_signal(path: &Path) -> CliResult<GraphSignal> {
    Ok(io::parse_signal(&read_text(path)?)?)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Fails early when the directory that would hold `path` is missing.
fn check_output(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(CliError::io(path, "output directory does not exist"))
        }
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, contents: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, contents),
        None => stdout
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn signal_json(s: &GraphSignal) -> String {
    let pairs: Vec<[f64; 2]> = s.values().iter().map(|v| [v.re, v.im]).collect();
    serde_json::to_string(&pairs).expect("finite values serialize") + "\n"
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn transform(a: &TransformArgs, inverse: bool, stdout: &mut dyn Write) -> CliResult<i32> {
    let params = parse_params(&a.params)?;
    let options = a.options.options();
    let sidecar = a
        .sidecar
        .clone()
        .or_else(|| a.out.as_ref().map(|o| with_suffix(o, ".json")));
    for p in a.out.iter().chain(&sidecar).chain(&a.export_operator) {
        check_output(p)?;
    }
    let graph = read_graph(&a.graph)?;
    let signal = read_signal(&a.signal)?;
    graph.check_signal(&signal)?;

    let start = Instant::now();
    let op = OperatorCache::global().operator(&graph, &params, &options)?;
    let result = if inverse {
        op.apply_inverse(&signal)?
    } else {
        op.apply(&signal)?
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let text = match a.format {
        Format::Csv => io::write_signal(&result),
        Format::Json => signal_json(&result),
    };
    emit(a.out.as_deref(), stdout, &text)?;
    if let Some(path) = &sidecar {
        let d = op.decomposed;
        let meta = json!({
            "direction": if inverse { "inverse" } else { "forward" },
            "n": graph.n(),
            "params": params.as_array(),
            "decomposed": { "xi": d.xi, "sigma": d.sigma, "alpha": d.alpha },
            "options": options,
            "unitarity_defect": op.unitarity_defect(),
            "runtime_ms": runtime_ms,
        });
        write_file(path, &(serde_json::to_string_pretty(&meta).unwrap() + "\n"))?;
    }
    if let Some(path) = &a.export_operator {
        let text =
            glct_core::export::operator_json(&op).map_err(|e| CliError::usage(e.to_string()))?;
        write_file(path, &text)?;
    }
    Ok(EXIT_OK)
}

fn parse_window(text: &str, n: usize) -> CliResult<(usize, usize)> {
    let bad = || {
        CliError::usage(format!(
            "window must be start:end with start <= end <= {n}, got {text:?}"
        ))
    };
    let (s, e) = text.split_once(':').ok_or_else(bad)?;
    let s: usize = s.trim().parse().map_err(|_| bad())?;
    let e: usize = e.trim().parse().map_err(|_| bad())?;
    if s > e || e > n {
        return Err(bad());
    }
    Ok((s, e))
}

/// `+1` on `[start, end)`, `-1` elsewhere.
pub fn bipolar_rect(n: usize, start: usize, end: usize) -> GraphSignal {
    GraphSignal::from_real(
        &(0..n)
            .map(|i| if (start..end).contains(&i) { 1.0 } else { -1.0 })
            .collect::<Vec<_>>(),
    )
}

fn generate(a: &GenArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let text = match a.kind.as_str() {
        "graph:cycle" => io::write_edge_list(&cycle_graph(a.n)?),
        "graph:path" => io::write_edge_list(&path_graph(a.n)?),
        "graph:random" => {
            if !(0.0..=1.0).contains(&a.edge_prob) {
                return Err(CliError::usage("edge probability must lie in [0, 1]"));
            }
            io::write_edge_list(&erdos_renyi(a.n, a.edge_prob, None, &mut rng)?)
        }
        "graph:geometric" => {
            let g = geometric_knn(a.n, a.k, &mut rng)?;
            if let Some(path) = &a.coords_out {
                check_output(path)?;
                write_file(path, &io::write_coords(g.coords().unwrap_or_default()))?;
            }
            io::write_edge_list(&g)
        }
        "signal:bipolar-rect" => {
            let (s, e) = match &a.window {
                Some(w) => parse_window(w, a.n)?,
                None => (0, a.n / 2),
            };
            io::write_signal(&bipolar_rect(a.n, s, e))
        }
        "signal:delta" => io::write_signal(&glct_core::delta(a.index, a.n)?),
        "signal:random" => {
            let values = (0..a.n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            io::write_signal(&GraphSignal::new(values))
        }
        other => return Err(CliError::usage(format!("unknown kind {other:?}"))),
    };
    emit(a.out.as_deref(), stdout, &text)?;
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let graph = a.graph.as_deref().map(read_graph).transpose()?;
    let report = run_verify(&VerifyConfig {
        seed: a.seed,
        graph,
        options: a.options.options(),
        inject_fault: a.inject_fault.clone(),
    })?;
    let text = match a.format {
        Format::Csv => report.render_text(),
        Format::Json => report.render_json(),
    };
    emit(a.out.as_deref(), stdout, &text)?;
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn compose(a: &ComposeArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let p1 = parse_params(&a.p1)?;
    let p2 = parse_params(&a.p2)?;
    if let Some(p) = &a.out {
        check_output(p)?;
    }
    let p3 = compose_params(&p2, &p1)?;
    let d = decompose_params(&p3)?;
    let deviation = match &a.graph {
        Some(path) => {
            let g = read_graph(path)?;
            let ctx = SpectralContext::new(g);
            let opts = a.options.options();
            let l1 = ctx.operator(&p1, &opts)?.matrix;
            let l2 = ctx.operator(&p2, &opts)?.matrix;
            let l3 = ctx.operator(&p3, &opts)?.matrix;
            Some(max_abs_diff(&(l2 * l1), &l3))
        }
        None => None,
    };
    let text = match a.format {
        Format::Json => {
            let v = json!({
                "p1": p1.as_array(),
                "p2": p2.as_array(),
                "composed": p3.as_array(),
                "decomposed": { "xi": d.xi, "sigma": d.sigma, "alpha": d.alpha },
                "deviation": deviation,
            });
            serde_json::to_string_pretty(&v).unwrap() + "\n"
        }
        Format::Csv => {
            let mut s = String::from("field,value\n");
            for (k, v) in ["a", "b", "c", "d"].iter().zip(p3.as_array()) {
                writeln!(s, "{k},{v:.16e}").unwrap();
            }
            for (k, v) in [("xi", d.xi), ("sigma", d.sigma), ("alpha", d.alpha)] {
                writeln!(s, "{k},{v:.16e}").unwrap();
            }
            if let Some(dev) = deviation {
                writeln!(s, "deviation,{dev:.16e}").unwrap();
            }
            s
        }
    };
    emit(a.out.as_deref(), stdout, &text)?;
    Ok(EXIT_OK)
}

/// Parameter grids for the plot presets.
pub fn sweep_params(sweep: Sweep) -> Vec<LctParams> {
    let grid: Vec<(f64, f64, f64)> = match sweep {
        Sweep::Alpha => [0.0, 0.125, 0.25, 0.375, 0.5]
            .iter()
            .map(|&t| (0.5, 1.0, t * PI))
            .collect(),
        Sweep::Xi => [-1.0, -0.5, 0.0, 0.5, 1.0]
            .iter()
            .map(|&xi| (xi, 1.0, PI / 4.0))
            .collect(),
        Sweep::SigmaAlpha => [0.5, 1.0, 2.0]
            .iter()
            .flat_map(|&s| [PI / 6.0, PI / 3.0].map(|a| (0.5, s, a)))
            .collect(),
    };
    grid.into_iter()
        .map(|(xi, s, a)| {
            LctParams::from_decomposed(xi, s, a).expect("preset parameters are valid")
        })
        .collect()
}

fn plot_data(a: &PlotArgs) -> CliResult<i32> {
    let mut sets = a
        .params
        .iter()
        .map(|p| parse_params(p))
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(s) = a.sweep {
        sets.extend(sweep_params(s));
    }
    if sets.is_empty() {
        return Err(CliError::usage("plot-data needs --params or --sweep"));
    }
    if !a.out.is_dir() {
        fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    }
    let graph = read_graph(&a.graph)?;
    let signal = read_signal(&a.signal)?;
    graph.check_signal(&signal)?;
    let coords = match &a.coords {
        Some(p) => {
            let c = io::parse_coords(&read_text(p)?)?;
            if c.len() != graph.n() {
                return Err(CliError::usage(format!(
                    "{} coordinates for {} vertices",
                    c.len(),
                    graph.n()
                )));
            }
            Some(c)
        }
        None => graph.coords().map(<[_]>::to_vec),
    };
    let n = graph.n();
    let options = a.options.options();
    let ctx = SpectralContext::new(graph);
    let mut index = Vec::new();
    for (k, params) in sets.iter().enumerate() {
        let op = ctx.operator(params, &options)?;
        let hat = op.apply(&signal)?;
        let defect = op.unitarity_defect();
        drop(op);
        let mut csv = String::from(if coords.is_some() {
            "vertex_index,x,y,signal_re,signal_im,glct_re,glct_im\n"
        } else {
            "vertex_index,signal_re,signal_im,glct_re,glct_im\n"
        });
        for i in 0..n {
            let (s, t) = (signal.values()[i], hat.values()[i]);
            match &coords {
                Some(c) => writeln!(
                    csv,
                    "{i},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    c[i].0, c[i].1, s.re, s.im, t.re, t.im
                ),
                None => writeln!(
                    csv,
                    "{i},{:.16e},{:.16e},{:.16e},{:.16e}",
                    s.re, s.im, t.re, t.im
                ),
            }
            .unwrap();
        }
        let stem = format!("glct_{k:03}");
        write_file(&a.out.join(format!("{stem}.csv")), &csv)?;
        let d = decompose_params(params)?;
        let meta = json!({
            "csv": format!("{stem}.csv"),
            "n": n,
            "params": params.as_array(),
            "decomposed": { "xi": d.xi, "sigma": d.sigma, "alpha": d.alpha },
            "options": options,
            "unitarity_defect": defect,
            "unitarity_tolerance": 1e-9 * n as f64,
        });
        write_file(
            &a.out.join(format!("{stem}.json")),
            &(serde_json::to_string_pretty(&meta).unwrap() + "\n"),
        )?;
        index.push(meta);
    }
    write_file(
        &a.out.join("index.json"),
        &(serde_json::to_string_pretty(&index).unwrap() + "\n"),
    )?;
    Ok(EXIT_OK)
}
