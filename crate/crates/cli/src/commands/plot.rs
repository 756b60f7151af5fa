//! `latbench plot`: deterministic SVG figures rendered from the artifacts
//! of the other commands.

use std::fs;
use std::path::Path;

use crate::commands::{Ctx, Timings};
use crate::error::{CliError, Result};
use crate::formats::MetricsFile;
use crate::plotkit::{box_stats, Scale, Svg, HEIGHT, MARGIN, PALETTE, WIDTH};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Figure kind.
    #[arg(value_enum)]
    pub kind: Kind,
    /// Input artifacts; the expected format depends on the kind.
    #[arg(required = true)]
    pub inputs: Vec<String>,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "plot.svg")]
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    /// Three pairwise objective projections of an archive CSV.
    Pareto,
    /// Lateral-error box plot, one box per run log CSV.
    ErrorBoxplot,
    /// Normalized metric spider chart over metrics JSON files.
    Spider,
    /// Lateral error against path curvature from one run log CSV.
    ErrorVsCurvature,
    /// Wall-clock box plot over timing JSON files.
    RuntimeBoxplot,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    ctx.prepare()?;
    let mut timings = Timings::start();
    if args.inputs.is_empty() {
        return Err(CliError::config("no input files"));
    }
    let svg = match args.kind {
        Kind::Pareto => pareto(&args.inputs)?,
        Kind::ErrorBoxplot => error_boxplot(&args.inputs)?,
        Kind::Spider => spider(&args.inputs)?,
        Kind::ErrorVsCurvature => error_vs_curvature(&args.inputs)?,
        Kind::RuntimeBoxplot => runtime_boxplot(&args.inputs)?,
    };
    fs::write(ctx.path(&args.name), svg)?;
    timings.mark("render");
    timings.write(&ctx.path("timings.json"))?;
    println!("plot: wrote {}", ctx.path(&args.name).display());
    Ok(())
}

// ------------------------------------------------------------------ readers

/// Numeric rows of a headered CSV, skipping `#` comments. Returns the
/// header fields and the rows.
fn read_csv(path: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("input {path}: {e}")))?;
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if header.is_empty() {
            header = line.split(',').map(str::to_string).collect();
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| if f.is_empty() { f64::NAN } else { f.parse().unwrap_or(f64::NAN) })
            .collect();
        rows.push(row);
    }
    if header.is_empty() || rows.is_empty() {
        return Err(CliError::config(format!("input {path}: no data rows")));
    }
    Ok((header, rows))
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str, path: &str) -> Result<Vec<f64>> {
    let idx = header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::config(format!("input {path}: missing column {name}")))?;
    Ok(rows.iter().map(|r| r[idx]).collect())
}

fn stem(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

// ------------------------------------------------------------------ figures

fn panel_scale(data_x: &[f64], data_y: &[f64], px0: f64, px1: f64) -> Scale {
    let min = |d: &[f64]| d.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = |d: &[f64]| d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Scale {
        x0: min(data_x),
        x1: max(data_x),
        y0: min(data_y),
        y1: max(data_y),
        px0,
        px1,
        py0: HEIGHT - MARGIN,
        py1: MARGIN,
    }
}

fn draw_frame(svg: &mut Svg, s: &Scale, x_label: &str, y_label: &str) {
    svg.line(s.px0, s.py0, s.px1, s.py0, "black");
    svg.line(s.px0, s.py0, s.px0, s.py1, "black");
    svg.text(0.5 * (s.px0 + s.px1), s.py0 + 28.0, "middle", x_label);
    svg.text(s.px0, s.py1 - 8.0, "middle", y_label);
    svg.text(s.px0, s.py0 + 14.0, "middle", &format!("{:.3}", s.x0));
    svg.text(s.px1, s.py0 + 14.0, "end", &format!("{:.3}", s.x1));
    svg.text(s.px0 - 4.0, s.py0, "end", &format!("{:.3}", s.y0));
    svg.text(s.px0 - 4.0, s.py1 + 4.0, "end", &format!("{:.3}", s.y1));
}

/// Archive objectives as three pairwise scatter panels.
fn pareto(inputs: &[String]) -> Result<String> {
    let path = &inputs[0];
    let (header, rows) = read_csv(path)?;
    let iae = column(&header, &rows, "max_iae", path)?;
    let eps = column(&header, &rows, "max_m_epsilon", path)?;
    let zeta = column(&header, &rows, "max_m_zeta", path)?;
    let mut svg = Svg::new();
    svg.comment(&format!("pareto projections of {}", stem(path)));
    let panels: [(&str, &str, &[f64], &[f64]); 3] = [
        ("IAE", "M_eps", &iae, &eps),
        ("IAE", "M_zeta", &iae, &zeta),
        ("M_eps", "M_zeta", &eps, &zeta),
    ];
    let panel_w = (WIDTH - 2.0 * MARGIN) / 3.0;
    for (i, (xl, yl, xs, ys)) in panels.iter().enumerate() {
        let px0 = MARGIN + i as f64 * panel_w + 12.0;
        let px1 = MARGIN + (i + 1) as f64 * panel_w - 12.0;
        let s = panel_scale(xs, ys, px0, px1);
        draw_frame(&mut svg, &s, xl, yl);
        for (x, y) in xs.iter().zip(ys.iter()) {
            svg.circle(s.x(*x), s.y(*y), 2.5, PALETTE[0]);
        }
    }
    Ok(svg.finish())
}

fn boxes(svg: &mut Svg, labels: &[String], series: &[Vec<f64>], y_label: &str) {
    let all: Vec<f64> = series.iter().flatten().cloned().collect();
    let s = panel_scale(&[0.0, labels.len() as f64], &all, MARGIN, WIDTH - MARGIN);
    draw_frame(svg, &s, "", y_label);
    let slot = (s.px1 - s.px0) / labels.len() as f64;
    for (i, (label, data)) in labels.iter().zip(series).enumerate() {
        let b = box_stats(data);
        let cx = s.px0 + (i as f64 + 0.5) * slot;
        let half = 0.3 * slot;
        let color = PALETTE[i % PALETTE.len()];
        svg.line(cx, s.y(b.lower_whisker), cx, s.y(b.q1), color);
        svg.line(cx, s.y(b.q3), cx, s.y(b.upper_whisker), color);
        svg.rect(cx - half, s.y(b.q3), 2.0 * half, s.y(b.q1) - s.y(b.q3), "none", color);
        svg.line(cx - half, s.y(b.median), cx + half, s.y(b.median), color);
        svg.text(cx, s.py0 + 28.0, "middle", label);
    }
}

fn error_boxplot(inputs: &[String]) -> Result<String> {
    let mut labels = Vec::new();
    let mut series = Vec::new();
    for path in inputs {
        let (header, rows) = read_csv(path)?;
        let e_y = column(&header, &rows, "e_y", path)?;
        labels.push(stem(path));
        series.push(e_y.iter().map(|v| v.abs()).collect());
    }
    let mut svg = Svg::new();
    svg.comment("lateral error distribution per run");
    boxes(&mut svg, &labels, &series, "|e_y| [m]");
    Ok(svg.finish())
}

fn runtime_boxplot(inputs: &[String]) -> Result<String> {
    let mut labels = Vec::new();
    let mut series = Vec::new();
    for path in inputs {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("input {path}: {e}")))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("input {path}: {e}")))?;
        let stages = value["stages"]
            .as_array()
            .ok_or_else(|| CliError::config(format!("input {path}: missing stages")))?;
        let secs: Vec<f64> = stages
            .iter()
            .filter_map(|s| s["wall_seconds"].as_f64())
            .collect();
        if secs.is_empty() {
            return Err(CliError::config(format!("input {path}: no wall_seconds values")));
        }
        labels.push(stem(path));
        series.push(secs);
    }
    let mut svg = Svg::new();
    svg.comment("wall-clock time per stage");
    boxes(&mut svg, &labels, &series, "wall [s]");
    Ok(svg.finish())
}

/// One closed polygon per metrics file over the four normalized metrics.
fn spider(inputs: &[String]) -> Result<String> {
    let axes = ["IAE", "MLE", "M_eps", "M_zeta"];
    let mut labels = Vec::new();
    let mut values: Vec<[f64; 4]> = Vec::new();
    for path in inputs {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("input {path}: {e}")))?;
        let m: MetricsFile = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("input {path}: {e}")))?;
        labels.push(stem(path));
        values.push([m.iae, m.mle, m.m_epsilon.unwrap_or(0.0), m.m_zeta.unwrap_or(0.0)]);
    }
    // normalize each axis by the largest value across the inputs
    let mut scale = [0.0f64; 4];
    for v in &values {
        for (s, x) in scale.iter_mut().zip(v) {
            *s = s.max(*x);
        }
    }
    let cx = WIDTH / 2.0;
    let cy = HEIGHT / 2.0;
    let r = (HEIGHT / 2.0 - MARGIN).min(WIDTH / 2.0 - MARGIN);
    let spoke = |axis: usize, frac: f64| -> (f64, f64) {
        let angle = std::f64::consts::FRAC_PI_2 - axis as f64 * std::f64::consts::FRAC_PI_2;
        (cx + frac * r * angle.cos(), cy - frac * r * angle.sin())
    };
    let mut svg = Svg::new();
    svg.comment("normalized metric profile per run");
    for (axis, name) in axes.iter().enumerate() {
        let (x, y) = spoke(axis, 1.0);
        svg.line(cx, cy, x, y, "#cccccc");
        let (tx, ty) = spoke(axis, 1.12);
        svg.text(tx, ty, "middle", name);
    }
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let pts: Vec<(f64, f64)> = (0..4).map(|a| spoke(a, ring)).collect();
        svg.polygon(&pts, "#eeeeee");
    }
    for (i, (label, v)) in labels.iter().zip(&values).enumerate() {
        let pts: Vec<(f64, f64)> = (0..4)
            .map(|a| {
                let frac = if scale[a] > 0.0 { v[a] / scale[a] } else { 0.0 };
                spoke(a, frac)
            })
            .collect();
        let color = PALETTE[i % PALETTE.len()];
        svg.polygon(&pts, color);
        svg.text(MARGIN, MARGIN + 14.0 * i as f64, "start", label);
        svg.circle(MARGIN - 8.0, MARGIN + 14.0 * i as f64 - 4.0, 3.0, color);
    }
    Ok(svg.finish())
}

fn error_vs_curvature(inputs: &[String]) -> Result<String> {
    let path = &inputs[0];
    let (header, rows) = read_csv(path)?;
    let kappa: Vec<f64> = column(&header, &rows, "kappa_preview", path)?
        .iter()
        .map(|v| v.abs())
        .collect();
    let e_y: Vec<f64> = column(&header, &rows, "e_y", path)?.iter().map(|v| v.abs()).collect();
    let mut svg = Svg::new();
    svg.comment(&format!("error against curvature for {}", stem(path)));
    let s = panel_scale(&kappa, &e_y, MARGIN, WIDTH - MARGIN);
    draw_frame(&mut svg, &s, "|kappa| [1/m]", "|e_y| [m]");
    for (x, y) in kappa.iter().zip(&e_y) {
        svg.circle(s.x(*x), s.y(*y), 1.5, PALETTE[0]);
    }
    Ok(svg.finish())
}
