use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use chebyrace::arith::{half_primorial, ratio_rho_logradical, Modulus};
use chebyrace::dist::approx::density_gaussian;
use chebyrace::dist::{density_montecarlo, DensityResult, RaceModel};
use chebyrace::pipeline::{closed_form_model, density_nr_r, nr_r_model, scale_diagnostics, DEFAULT_ACCURACY};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use super::{emit_report, height_policy, parse_count, positive, zero_cache, Failure, INPUT};
use crate::output::{emit, round_floats, Format};
use crate::HeightArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityMethod {
    Fourier,
    Montecarlo,
    /// `Φ(B)` from the arithmetic approximation of the bias ratio.
    Gaussian,
    /// Gaussian estimate and lower bounds from the closed-form variance.
    Bounds,
    All,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(short = 'q', long)]
    q: u64,

    /// Target for the total error of the Fourier method.
    #[arg(long, default_value_t = DEFAULT_ACCURACY)]
    accuracy: f64,

    #[arg(long, value_enum, default_value = "fourier")]
    method: DensityMethod,

    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000, value_parser = parse_count)]
    samples: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[command(flatten)]
    heights: HeightArgs,
}

const GAUSSIAN_WARNING: &str = "asymptotic approximation without an error bound";

fn modulus(q: u64) -> Result<Modulus> {
    Modulus::new(q).map_err(|e| anyhow::Error::new(e).context(format!("no race modulo {q}")))
}

fn result_json(r: &DensityResult) -> Value {
    let mut v = serde_json::to_value(r).expect("serializable");
    let (lo, hi) = r.interval();
    v["total_error"] = json!(r.total_error());
    v["interval"] = json!([lo, hi]);
    v
}

fn model_json(m: &RaceModel) -> Value {
    json!({
        "mean": m.mean,
        "variance": m.total_variance(),
        "tail_variance": m.tail_variance(),
        "terms": m.amplitudes.len(),
        "zero_height": m.zero_height(),
        "diagnostics": m.diagnostics,
    })
}

pub fn run(args: &DensityArgs, format: Format, out: Option<&Path>) -> Result<()> {
    let q = modulus(args.q)?;
    let accuracy = positive("accuracy", args.accuracy)?;
    let policy = height_policy(&args.heights)?;
    let cache = zero_cache(&args.heights)?;
    let m = args.method;
    let all = m == DensityMethod::All;
    if (all || m == DensityMethod::Montecarlo) && args.samples == 0 {
        bail!(Failure {
            code: INPUT,
            message: "--samples must be positive".into(),
        });
    }

    let mut body = json!({
        "q": q.q,
        "omega": q.omega,
        "rho": q.rho,
        "ratio_rho_log_radical": ratio_rho_logradical(&q),
    });
    let mut model = None;
    if all || m == DensityMethod::Fourier {
        let (r, built) = density_nr_r(&q, accuracy, policy, &cache)?;
        body["fourier"] = result_json(&r);
        model = Some(built);
    }
    if all || m == DensityMethod::Montecarlo {
        if model.is_none() {
            model = Some(nr_r_model(&q, &cache, policy.initial)?);
        }
        let r = density_montecarlo(model.as_ref().expect("built above"), args.samples, args.seed);
        body["montecarlo"] = result_json(&r);
    }
    if all || m == DensityMethod::Gaussian {
        let mut g = serde_json::to_value(density_gaussian(&q)?)?;
        g["warning"] = json!(GAUSSIAN_WARNING);
        body["gaussian"] = g;
    }
    if all || m == DensityMethod::Bounds {
        let closed;
        let source = match &model {
            Some(built) => built,
            None => {
                closed = closed_form_model(&q)?;
                &closed
            }
        };
        let mut b = serde_json::to_value(scale_diagnostics(source)?)?;
        b["warning"] = json!("the gaussian field is an estimate; the *_lower fields are bounds");
        body["bounds"] = b;
    }
    if let Some(built) = &model {
        body["model"] = model_json(built);
    }
    emit_report("density", body, format, out)
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Rows for the products of the first 1..=kmax odd primes.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(0..=8))]
    kmax: u8,

    /// Rows beyond this k get estimates and bounds instead of the Fourier
    /// density.
    #[arg(long, default_value_t = 6)]
    scale_limit: u8,

    #[arg(long, default_value_t = DEFAULT_ACCURACY)]
    accuracy: f64,

    #[command(flatten)]
    heights: HeightArgs,
}

/// Published values: `ρ(q)/log q'` and the density.
const REFERENCE: [(f64, &str); 8] = [
    (1.82, "0.999063"),
    (1.47, "0.999907"),
    (1.71, "0.999928"),
    (2.26, "0.999877"),
    (3.33, "0.999950"),
    (5.14, "0.9999946"),
    (8.31, "0.999999928"),
    (13.81, "0.999999999954"),
];

pub const SKIPPED: &str = "skipped (scale)";

pub fn run_table(args: &TableArgs, format: Format, out: Option<&Path>) -> Result<()> {
    let accuracy = positive("accuracy", args.accuracy)?;
    let policy = height_policy(&args.heights)?;
    let cache = zero_cache(&args.heights)?;
    let mut rows = Vec::new();
    for k in 1..=args.kmax as usize {
        let q = half_primorial(k)?;
        let (ratio_ref, delta_text) = REFERENCE[k - 1];
        let delta_ref: f64 = delta_text.parse()?;
        let ratio = ratio_rho_logradical(&q);
        let mut row = json!({
            "k": k,
            "q": q.q,
            "omega": q.omega,
            "ratio": ratio,
            "ratio_reference": ratio_ref,
            "ratio_difference": (ratio - ratio_ref).abs(),
            "delta_reference": delta_text,
        });
        if k <= args.scale_limit as usize {
            let (r, _) = density_nr_r(&q, accuracy, policy, &cache)?;
            row["status"] = json!("computed");
            row["delta"] = json!(r.delta);
            row["error"] = json!(r.total_error());
            row["delta_difference"] = json!((r.delta - delta_ref).abs());
            row["zero_height"] = json!(r.zero_height);
        } else {
            let d = scale_diagnostics(&closed_form_model(&q)?)?;
            row["status"] = json!(SKIPPED);
            row["gaussian_estimate"] = json!(d.gaussian);
            row["lower_bound"] = json!(d.lower);
        }
        rows.push(round_floats(row));
    }
    match format {
        Format::Json => emit_report("table", json!({ "rows": rows }), format, out),
        Format::Text => emit(&render_table(&rows, false), out),
        Format::Csv => emit(&render_table(&rows, true), out),
    }
}

const COLUMNS: [&str; 9] = [
    "q",
    "omega",
    "ratio",
    "ratio_reference",
    "delta",
    "error",
    "delta_reference",
    "delta_difference",
    "status",
];

fn cell(row: &Value, col: &str) -> String {
    match (&row[col], col) {
        (Value::Null, "delta") => row["gaussian_estimate"]
            .as_f64()
            .map(|g| format!("~{g}"))
            .unwrap_or_default(),
        (Value::Null, _) => String::new(),
        (Value::String(s), _) => s.clone(),
        (v, _) => v.to_string(),
    }
}

fn render_table(rows: &[Value], csv: bool) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| COLUMNS.iter().map(|c| cell(r, c)).collect()).collect();
    let mut s = String::new();
    if csv {
        s.push_str(&COLUMNS.join(","));
        s.push('\n');
        for row in &cells {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        return s;
    }
    let widths: Vec<usize> = (0..COLUMNS.len())
        .map(|i| cells.iter().map(|r| r[i].len()).chain([COLUMNS[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |items: Vec<&str>| {
        let mut l = String::new();
        for (i, it) in items.iter().enumerate() {
            let _ = write!(l, "{:<w$}  ", it, w = widths[i]);
        }
        l.trim_end().to_string() + "\n"
    };
    s.push_str(&line(COLUMNS.to_vec()));
    for row in &cells {
        s.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    s
}
