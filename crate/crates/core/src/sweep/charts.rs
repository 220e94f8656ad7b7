//! Static SVG charts of a result store.
use super::{read_summary, SummaryRow, SweepError};
use crate::model::default_network;
use crate::pricing::clipping_threshold_alpha;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Regime of a grid point, by conventional share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Field {
    /// Share at least 0.5.
    Conventional,
    /// Share between the two thresholds.
    Leakage,
    /// Share at most 0.05.
    Decarbonised,
}

impl Field {
    fn label(self) -> &'static str {
        match self {
            Field::Conventional => "conventional",
            Field::Leakage => "leakage",
            Field::Decarbonised => "decarbonised",
        }
    }
}

/// Field of every optimal row.
pub fn classify_fields(rows: &[SummaryRow]) -> Vec<(f64, f64, Field)> {
    rows.iter()
        .filter_map(|r| {
            let share = r.get("conventional_share").filter(|s| s.is_finite())?;
            let field = if share >= 0.5 {
                Field::Conventional
            } else if share <= 0.05 {
                Field::Decarbonised
            } else {
                Field::Leakage
            };
            Some((r.mu, r.alpha, field))
        })
        .collect()
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Green (t = 0) to red (t = 1).
fn traffic_light(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (r, g) = if t < 0.5 {
        (2.0 * t, 0.75)
    } else {
        (1.0, 0.75 * (2.0 - 2.0 * t))
    };
    format!("#{:02x}{:02x}{:02x}", (r * 220.0) as u8, (g * 255.0) as u8, 40)
}

/// Dark blue (t = 0) to yellow (t = 1).
fn heat(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let stops = [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let x = t * (stops.len() - 1) as f64;
    let i = (x.floor() as usize).min(stops.len() - 2);
    let f = x - i as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    let (a, b) = (stops[i], stops[i + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// About five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_owned() }
}

struct Series {
    label: String,
    color: String,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

fn header(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        esc(title)
    );
}

fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    y1 *= 1.05;
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - y / y1 * ph;

    let mut svg = String::new();
    header(&mut svg, title);
    let _ = writeln!(svg, r##"<g stroke="#ccc" stroke-width="0.5">"##);
    for t in ticks(0.0, y1) {
        let _ = writeln!(svg, r#"<line x1="{LEFT:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/>"#, sy(t), LEFT + pw, sy(t));
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
    );
    for t in ticks(0.0, y1) {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 5.0, sy(t) + 4.0, fmt_tick(t));
    }
    for t in ticks(x0, x1) {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(t), TOP + ph + 16.0, fmt_tick(t));
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0, esc(x_label));
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        esc(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let path: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let dash = if s.dashed { r#" stroke-dasharray="3 3""# } else { "" };
        if path.len() == 1 {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, sx(s.points[0].0), sy(s.points[0].1), s.color);
        } else if !path.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                path.join(" "),
                s.color
            );
        }
        let ly = TOP + 10.0 + 14.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="1.5"{dash}/>"#,
            lx + 20.0,
            s.color
        );
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, esc(&s.label));
    }
    svg.push_str("</svg>\n");
    svg
}

/// One curve per alpha of `value(row)` over mu; alphas at or above the
/// clipping threshold are dashed.
fn curves_over_mu(rows: &[SummaryRow], alphas: &[f64], threshold: f64, value: impl Fn(&SummaryRow) -> Option<f64>) -> Vec<Series> {
    let amax = alphas.last().copied().unwrap_or(0.0);
    alphas
        .iter()
        .map(|&a| {
            let mut points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.alpha == a && r.is_optimal())
                .filter_map(|r| value(r).filter(|v| v.is_finite()).map(|v| (r.mu, v)))
                .collect();
            points.sort_by(|p, q| p.0.total_cmp(&q.0));
            Series {
                label: format!("α = {}", fmt_tick(a)),
                color: traffic_light(if amax > 0.0 { a / amax } else { 0.0 }),
                dashed: a >= threshold,
                points,
            }
        })
        .collect()
}

fn heat_map(rows: &[SummaryRow], mus: &[f64], alphas: &[f64]) -> String {
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let cw = pw / mus.len() as f64;
    let ch = ph / alphas.len() as f64;
    let lcoe: Vec<f64> = rows.iter().filter_map(|r| r.get("total_lcoe")).filter(|v| v.is_finite()).collect();
    let lo = lcoe.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lcoe.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
    let col = |mu: f64| mus.iter().position(|m| *m == mu);
    let row = |a: f64| alphas.iter().position(|x| *x == a);

    let mut svg = String::new();
    header(&mut svg, "Total LCOE [mu/MWh]");
    for r in rows {
        let (Some(i), Some(j)) = (col(r.mu), row(r.alpha)) else { continue };
        let fill = match r.get("total_lcoe").filter(|v| v.is_finite()) {
            Some(v) if r.is_optimal() => heat(norm(v)),
            _ => "#999999".to_owned(),
        };
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            LEFT + i as f64 * cw,
            TOP + ph - (j + 1) as f64 * ch,
            cw + 0.05,
            ch + 0.05
        );
    }
    let _ = writeln!(svg, r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#);
    let label_every = |n: usize| n.div_ceil(8).max(1);
    for (i, m) in mus.iter().enumerate().step_by(label_every(mus.len())) {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + (i as f64 + 0.5) * cw, TOP + ph + 16.0, fmt_tick(*m));
    }
    for (j, a) in alphas.iter().enumerate().step_by(label_every(alphas.len())) {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 5.0, TOP + ph - (j as f64 + 0.5) * ch + 4.0, fmt_tick(*a));
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">base price μ̄ [mu/t]</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0);
    let _ = writeln!(svg, r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">α</text>"#, TOP + ph / 2.0);

    // colour bar
    let bx = LEFT + pw + 20.0;
    for k in 0..20 {
        let t = k as f64 / 19.0;
        let _ = writeln!(svg, r#"<rect x="{bx:.1}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#, TOP + ph - (k + 1) as f64 * ph / 20.0, ph / 20.0 + 0.05, heat(t));
    }
    if lo.is_finite() {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{:.1}</text>"#, bx + 18.0, TOP + ph, lo);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{:.1}</text>"#, bx + 18.0, TOP + 10.0, hi);
    }

    // field labels, only when all three regimes are present
    let fields = classify_fields(rows);
    let kinds = [Field::Conventional, Field::Leakage, Field::Decarbonised];
    if kinds.iter().all(|k| fields.iter().any(|f| f.2 == *k)) {
        for k in kinds {
            let cells: Vec<(usize, usize)> = fields
                .iter()
                .filter(|f| f.2 == k)
                .filter_map(|f| Some((col(f.0)?, row(f.1)?)))
                .collect();
            let n = cells.len() as f64;
            let cx = cells.iter().map(|c| c.0 as f64 + 0.5).sum::<f64>() / n;
            let cy = cells.iter().map(|c| c.1 as f64 + 0.5).sum::<f64>() / n;
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13" fill="white" stroke="black" stroke-width="0.4">{}</text>"#,
                LEFT + cx * cw,
                TOP + ph - cy * ch + 4.0,
                k.label()
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Renders the charts of the store at `store` into `store/charts`.
pub fn render_charts(store: &Path) -> Result<Vec<PathBuf>, SweepError> {
    let rows = read_summary(&store.join("summary.csv"))?;
    if rows.is_empty() {
        return Err(SweepError::EmptyStore(store.to_owned()));
    }
    let mut mus: Vec<f64> = rows.iter().map(|r| r.mu).collect();
    let mut alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    for v in [&mut mus, &mut alphas] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let network = default_network();
    let threshold = clipping_threshold_alpha(&network.regions)?.value().unwrap_or(f64::INFINITY);
    let dir = store.join("charts");
    fs::create_dir_all(&dir).map_err(|e| SweepError::Output(dir.clone(), e))?;

    let mut charts: Vec<(String, String)> = Vec::new();
    for c in &network.carriers {
        let name = &c.name;
        let cap = format!("cap_{name}_mw");
        charts.push((
            format!("capacity_{name}.svg"),
            line_chart(
                &format!("Installed {name} capacity"),
                "base price μ̄ [mu/t]",
                "capacity [GW]",
                &curves_over_mu(&rows, &alphas, threshold, |r| r.get(&cap).map(|v| v / 1e3)),
            ),
        ));
        let gen = format!("gen_{name}_mwh");
        charts.push((
            format!("generation_{name}.svg"),
            line_chart(
                &format!("Annual {name} generation"),
                "base price μ̄ [mu/t]",
                "generation [TWh/a]",
                &curves_over_mu(&rows, &alphas, threshold, |r| r.get(&gen).map(|v| v / 1e6)),
            ),
        ));
    }
    charts.push((
        "storage_exchange.svg".into(),
        line_chart(
            "Battery charge plus discharge",
            "base price μ̄ [mu/t]",
            "exchange [TWh/a]",
            &curves_over_mu(&rows, &alphas, threshold, |r| r.get("storage_exchange_mwh").map(|v| v / 1e6)),
        ),
    ));
    charts.push((
        "decarbonization.svg".into(),
        line_chart(
            "Share of conventional generation",
            "base price μ̄ [mu/t]",
            "conventional share",
            &curves_over_mu(&rows, &alphas, threshold, |r| r.get("conventional_share")),
        ),
    ));
    charts.push(("lcoe_map.svg".into(), heat_map(&rows, &mus, &alphas)));

    let mut written = Vec::with_capacity(charts.len());
    for (name, svg) in charts {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(|e| SweepError::Output(path.clone(), e))?;
        written.push(path);
    }
    Ok(written)
}
