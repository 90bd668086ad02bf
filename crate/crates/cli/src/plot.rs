//! Deterministic SVG scatter plots of result CSVs.
//!
//! The y value of each row can be divided by a normaliser expression over
//! the row's numeric columns, e.g. `k * ln(n)^2`, which turns a scaling law
//! into a horizontal band.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use evalexpr::{
    build_operator_tree, ContextWithMutableFunctions, ContextWithMutableVariables,
    DefaultNumericTypes, EvalexprError, Function, HashMapContext, Value,
};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, Default)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    /// Expression the y value is divided by.
    pub normalize: Option<String>,
    pub log_log: bool,
    /// Column whose distinct values become separate series.
    pub group: Option<String>,
    /// Connect each series' points in x order.
    pub lines: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pt {
    x: f64,
    y: f64,
}

fn math_context() -> Result<HashMapContext<DefaultNumericTypes>> {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    let unary = |f: fn(f64) -> f64| {
        Function::new(move |arg: &Value<DefaultNumericTypes>| Ok(Value::Float(f(arg.as_number()?))))
    };
    ctx.set_function("ln".into(), unary(f64::ln))?;
    ctx.set_function("log".into(), unary(f64::ln))?;
    ctx.set_function("log2".into(), unary(f64::log2))?;
    ctx.set_function("log10".into(), unary(f64::log10))?;
    ctx.set_function("sqrt".into(), unary(f64::sqrt))?;
    Ok(ctx)
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| {
        let available: Vec<&str> = headers.iter().collect();
        anyhow!(
            "missing field `{name}` (available: {})",
            available.join(", ")
        )
    })
}

/// Extracts plottable series from CSV text, grouped by the group column.
fn series(csv_text: &str, spec: &PlotSpec) -> Result<BTreeMap<String, Vec<Pt>>> {
    let mut out: BTreeMap<String, Vec<Pt>> = BTreeMap::new();
    if csv_text.trim().is_empty() {
        return Ok(out);
    }
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let xi = column(&headers, &spec.x)?;
    let yi = column(&headers, &spec.y)?;
    let gi = spec
        .group
        .as_deref()
        .map(|g| column(&headers, g))
        .transpose()?;
    let norm = spec
        .normalize
        .as_deref()
        .map(|e| {
            build_operator_tree::<DefaultNumericTypes>(e)
                .with_context(|| format!("normalizer `{e}`"))
        })
        .transpose()?;
    if let Some(tree) = &norm {
        for var in tree.iter_read_variable_identifiers() {
            column(&headers, var)?;
        }
    }
    let mut skipped = 0usize;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let num = |i: usize| record.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        let (Some(x), Some(mut y)) = (num(xi), num(yi)) else {
            skipped += 1;
            continue;
        };
        if let Some(tree) = &norm {
            let mut ctx = math_context()?;
            for (i, name) in headers.iter().enumerate() {
                if let Some(value) = num(i) {
                    ctx.set_value(name.into(), Value::Float(value))?;
                }
            }
            let d = tree.eval_number_with_context(&ctx).map_err(
                |e: EvalexprError<DefaultNumericTypes>| {
                    anyhow!("normalizer on data row {}: {e}", line + 1)
                },
            )?;
            y /= d;
        }
        if spec.log_log && (x <= 0.0 || y <= 0.0) || !x.is_finite() || !y.is_finite() {
            skipped += 1;
            continue;
        }
        let key = gi
            .map(|g| record.get(g).unwrap_or("").to_string())
            .unwrap_or_default();
        out.entry(key).or_default().push(Pt { x, y });
    }
    if skipped > 0 {
        log::warn!("plot: skipped {skipped} rows without plottable values");
    }
    Ok(out)
}

/// Axis range in plot units (log10 when `log`).
fn range(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let t = |v: f64| if log { v.log10() } else { v };
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(t(v)), hi.max(t(v)))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if log { 0.5 } else { lo.abs().max(1.0) * 0.5 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.06;
    (lo - pad, hi + pad)
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac < 1.5 {
        1.0
    } else if frac < 3.5 {
        2.0
    } else if frac < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Tick positions in plot units with their labels.
fn ticks(lo: f64, hi: f64, log: bool) -> Vec<(f64, String)> {
    if log {
        let mut out = Vec::new();
        let (a, b) = (lo.floor() as i32, hi.ceil() as i32);
        let mults: &[f64] = if b - a <= 2 { &[1.0, 2.0, 5.0] } else { &[1.0] };
        for e in a..=b {
            for &m in mults {
                let u = (m * 10f64.powi(e)).log10();
                if u >= lo && u <= hi {
                    out.push((u, label(10f64.powf(u))));
                }
            }
        }
        return out;
    }
    let step = nice_step(hi - lo);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|i| (i as f64 * step, label(i as f64 * step)))
        .collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders an SVG; the same input always yields the same bytes.
pub fn render(csv_text: &str, spec: &PlotSpec) -> Result<String> {
    if spec.x.is_empty() || spec.y.is_empty() {
        bail!("plot needs both an x and a y field");
    }
    let data = series(csv_text, spec)?;
    let all = || data.values().flatten();
    let (x0, x1) = range(all().map(|p| p.x), spec.log_log);
    let (y0, y1) = range(all().map(|p| p.y), spec.log_log);
    let tx = |u: f64| LEFT + (u - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let ty = |u: f64| HEIGHT - BOTTOM - (u - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);
    let unit = |v: f64| if spec.log_log { v.log10() } else { v };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )?;
    writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )?;
    let (px0, px1, py0, py1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    writeln!(
        svg,
        r#"<rect x="{px0}" y="{py0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        px1 - px0,
        py1 - py0
    )?;
    for (u, text) in ticks(x0, x1, spec.log_log) {
        let x = tx(u);
        writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{py1}" x2="{x:.2}" y2="{:.2}" stroke="#ccc"/>"##,
            py0
        )?;
        writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            py1 + 16.0,
            escape(&text)
        )?;
    }
    for (u, text) in ticks(y0, y1, spec.log_log) {
        let y = ty(u);
        writeln!(
            svg,
            r##"<line x1="{px0}" y1="{y:.2}" x2="{px1}" y2="{y:.2}" stroke="#ccc"/>"##
        )?;
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            px0 - 6.0,
            y + 4.0,
            escape(&text)
        )?;
    }
    let y_label = match &spec.normalize {
        Some(e) => format!("{} / ({e})", spec.y),
        None => spec.y.clone(),
    };
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (px0 + px1) / 2.0,
        HEIGHT - 12.0,
        escape(&spec.x)
    )?;
    writeln!(
        svg,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (py0 + py1) / 2.0,
        escape(&y_label)
    )?;
    for (i, (name, pts)) in data.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if spec.lines && pts.len() > 1 {
            let mut sorted = pts.clone();
            sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
            let path: Vec<String> = sorted
                .iter()
                .map(|p| format!("{:.2},{:.2}", tx(unit(p.x)), ty(unit(p.y))))
                .collect();
            writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}"/>"#,
                path.join(" ")
            )?;
        }
        for p in pts {
            writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                tx(unit(p.x)),
                ty(unit(p.y))
            )?;
        }
        if spec.group.is_some() {
            let ly = TOP + 14.0 * (i as f64 + 1.0);
            writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px1 - 110.0,
                ly - 4.0
            )?;
            writeln!(
                svg,
                r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#,
                px1 - 102.0,
                escape(name)
            )?;
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
