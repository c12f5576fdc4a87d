//! CSV tables and line-plot SVGs.

use std::fmt::Write as _;
use std::io::Write;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl Cell {
    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Float(x) => x,
            Cell::Int(k) => k as f64,
        }
    }

    /// Floats carry 17 significant digits, enough to round-trip any `f64`.
    pub fn render(self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(k) => k.to_string(),
        }
    }
}

/// Which columns to draw. One polyline per (y column, group value).
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x: &'static str,
    pub ys: Vec<&'static str>,
    pub group: Option<&'static str>,
    /// Restrict to these group values when set.
    pub groups: Option<Vec<f64>>,
    pub log_x: bool,
    pub log_y: bool,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: Option<PlotSpec>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| *h == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.headers).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render())).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, CliError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Config(format!("{other:?}")),
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn collect_series(table: &Table, spec: &PlotSpec) -> Vec<Series> {
    let Some(xi) = table.column(spec.x) else {
        return Vec::new();
    };
    let gi = spec.group.and_then(|g| table.column(g));
    let mut group_values: Vec<f64> = Vec::new();
    if let Some(gi) = gi {
        for row in &table.rows {
            let g = row[gi].as_f64();
            if !group_values.contains(&g) {
                group_values.push(g);
            }
        }
        if let Some(keep) = &spec.groups {
            group_values.retain(|g| keep.contains(g));
        }
    } else {
        group_values.push(f64::NAN);
    }
    let mut series = Vec::new();
    for y in &spec.ys {
        let Some(yi) = table.column(y) else { continue };
        for &g in &group_values {
            let points = table
                .rows
                .iter()
                .filter(|r| gi.map_or(true, |gi| r[gi].as_f64() == g))
                .map(|r| (r[xi].as_f64(), r[yi].as_f64()))
                .filter(|(x, y)| {
                    x.is_finite() && y.is_finite() && (!spec.log_x || *x > 0.0) && (!spec.log_y || *y > 0.0)
                })
                .collect();
            let label = match (gi, spec.ys.len()) {
                (Some(_), 1) => format!("{} = {g}", spec.group.unwrap_or_default()),
                (Some(_), _) => format!("{y}, {} = {g}", spec.group.unwrap_or_default()),
                (None, _) => y.to_string(),
            };
            series.push(Series { label, points });
        }
    }
    series
}

fn bounds(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        let v = if log { v.log10() } else { v };
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Renders the table's plot as a standalone SVG document.
pub fn render_svg(table: &Table) -> Option<String> {
    let spec = table.plot.as_ref()?;
    let series = collect_series(table, spec);
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = bounds(all().map(|p| p.0), spec.log_x);
    let (y0, y1) = bounds(all().map(|p| p.1), spec.log_y);
    let px = |x: f64| {
        let x = if spec.log_x { x.log10() } else { x };
        MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN)
    };
    let py = |y: f64| {
        let y = if spec.log_y { y.log10() } else { y };
        HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN)
    };
    let axis_label = |name: &str, log: bool| if log { format!("{name} (log)") } else { name.to_string() };
    let tick = |v: f64, log: bool| if log { format!("{:.3e}", 10f64.powf(v)) } else { format!("{v:.4}") };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&spec.title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}">{}</text>"#, HEIGHT - MARGIN + 16.0, tick(x0, spec.log_x));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, tick(x1, spec.log_x));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, HEIGHT - MARGIN, tick(y0, spec.log_y));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, MARGIN + 10.0, tick(y1, spec.log_y));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 20.0, escape(&axis_label(spec.x, spec.log_x)));
    let ylabel = spec.ys.join(", ");
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&axis_label(&ylabel, spec.log_y))
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = MARGIN + 14.0 + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 6.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
