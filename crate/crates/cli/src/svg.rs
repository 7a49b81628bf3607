//! Static SVG charts: scatter, grouped bars with whiskers, and lines with
//! shaded bands. Output depends only on the input data.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 58.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Roughly five round tick values covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (lo, hi) = padded(lo, hi);
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        let pad = (lo.abs() * 0.1).max(1.0);
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize + 1
    };
    let text = format!("{v:.decimals$}");
    if text.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        format!("{:.decimals$}", 0.0)
    } else {
        text
    }
}

struct Axis {
    ticks: Vec<f64>,
}

impl Axis {
    fn over(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        Axis {
            ticks: nice_ticks(lo, hi),
        }
    }

    fn lo(&self) -> f64 {
        self.ticks[0]
    }

    fn hi(&self) -> f64 {
        *self.ticks.last().expect("at least one tick")
    }

    fn step(&self) -> f64 {
        if self.ticks.len() > 1 {
            self.ticks[1] - self.ticks[0]
        } else {
            1.0
        }
    }
}

struct Canvas {
    body: String,
    x: Option<Axis>,
    y: Axis,
}

impl Canvas {
    fn plot_w() -> f64 {
        WIDTH - LEFT - RIGHT
    }

    fn plot_h() -> f64 {
        HEIGHT - TOP - BOTTOM
    }

    fn new(title: &str, x: Option<Axis>, y: Axis) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + Self::plot_w() / 2.0,
            escape(title)
        );
        Canvas { body, x, y }
    }

    fn sx(&self, v: f64) -> f64 {
        let x = self.x.as_ref().expect("numeric x axis");
        LEFT + (v - x.lo()) / (x.hi() - x.lo()) * Self::plot_w()
    }

    fn sy(&self, v: f64) -> f64 {
        TOP + (self.y.hi() - v) / (self.y.hi() - self.y.lo()) * Self::plot_h()
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (LEFT, LEFT + Self::plot_w(), TOP, TOP + Self::plot_h());
        let step = self.y.step();
        for &t in &self.y.ticks.clone() {
            let y = self.sy(t);
            let _ = writeln!(
                self.body,
                r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                y + 4.0,
                tick_label(t, step)
            );
        }
        if let Some(x) = &self.x {
            let step = x.step();
            for &t in &x.ticks.clone() {
                let px = self.sx(t);
                let _ = writeln!(
                    self.body,
                    r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    y1 + 18.0,
                    tick_label(t, step)
                );
            }
        }
        let _ = writeln!(
            self.body,
            r##"<path d="M{x0:.2},{y0:.2} L{x0:.2},{y1:.2} L{x1:.2},{y1:.2}" fill="none" stroke="#333"/>"##
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x0 + Self::plot_w() / 2.0,
            HEIGHT - 14.0,
            escape(x_label)
        );
        let cy = y0 + Self::plot_h() / 2.0;
        let _ = writeln!(
            self.body,
            r#"<text x="18" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{}</text>"#,
            escape(y_label)
        );
    }

    fn legend(&mut self, names: &[String]) {
        let x = WIDTH - RIGHT + 16.0;
        for (i, name) in names.iter().enumerate() {
            let y = TOP + 10.0 + 20.0 * i as f64;
            let _ = writeln!(
                self.body,
                r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
                y - 10.0,
                color(i)
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{:.2}" y="{y:.2}">{}</text>"#,
                x + 18.0,
                escape(name)
            );
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Points per series, with a dashed `y = x` reference.
pub fn scatter(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter().flat_map(|&(x, y)| [x, y]));
    // shared range so the identity line is the diagonal
    let x = Axis::over(all());
    let y = Axis::over(all());
    let mut c = Canvas::new(title, Some(x), y);
    c.axes(x_label, y_label);
    let (lo, hi) = (c.y.lo(), c.y.hi());
    let _ = writeln!(
        c.body,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 4"/>"##,
        c.sx(lo),
        c.sy(lo),
        c.sx(hi),
        c.sy(hi)
    );
    for (i, s) in series.iter().enumerate() {
        for &(px, py) in &s.points {
            let _ = writeln!(
                c.body,
                r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="4" fill="{}" fill-opacity="0.8"/>"#,
                c.sx(px),
                c.sy(py),
                color(i)
            );
        }
    }
    c.legend(&series.iter().map(|s| s.name.clone()).collect::<Vec<_>>());
    c.finish()
}

pub struct BarSeries {
    pub name: String,
    /// `(mean, sd)` per category.
    pub values: Vec<(f64, f64)>,
}

/// Grouped bars from zero with ±SD whiskers.
pub fn bars(title: &str, y_label: &str, categories: &[String], series: &[BarSeries]) -> String {
    let extent = series
        .iter()
        .flat_map(|s| s.values.iter().flat_map(|&(m, sd)| [m + sd, m - sd, m]))
        .chain([0.0]);
    let mut c = Canvas::new(title, None, Axis::over(extent));
    c.axes("", y_label);
    let group_w = Canvas::plot_w() / categories.len().max(1) as f64;
    let bar_w = group_w * 0.7 / series.len().max(1) as f64;
    let zero = c.sy(0.0);
    for (g, name) in categories.iter().enumerate() {
        let gx = LEFT + g as f64 * group_w;
        let _ = writeln!(
            c.body,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            gx + group_w / 2.0,
            TOP + Canvas::plot_h() + 18.0,
            escape(name)
        );
        for (i, s) in series.iter().enumerate() {
            let Some(&(mean, sd)) = s.values.get(g) else { continue };
            let x = gx + group_w * 0.15 + i as f64 * bar_w;
            let top = c.sy(mean).min(zero);
            let h = (c.sy(mean) - zero).abs();
            let _ = writeln!(
                c.body,
                r#"<rect class="bar" x="{x:.2}" y="{top:.2}" width="{:.2}" height="{h:.2}" fill="{}"/>"#,
                bar_w * 0.9,
                color(i)
            );
            let cx = x + bar_w * 0.45;
            let (hi, lo) = (c.sy(mean + sd), c.sy(mean - sd));
            let _ = writeln!(
                c.body,
                r##"<path class="whisker" d="M{cx:.2},{hi:.2} L{cx:.2},{lo:.2} M{:.2},{hi:.2} L{:.2},{hi:.2} M{:.2},{lo:.2} L{:.2},{lo:.2}" stroke="#222" fill="none"/>"##,
                cx - 5.0,
                cx + 5.0,
                cx - 5.0,
                cx + 5.0
            );
        }
    }
    c.legend(&series.iter().map(|s| s.name.clone()).collect::<Vec<_>>());
    c.finish()
}

pub struct BandSeries {
    pub name: String,
    /// `(x, mean, sd)` in x order.
    pub points: Vec<(f64, f64, f64)>,
}

/// One line per series over a shaded mean ± SD band.
pub fn lines(title: &str, x_label: &str, y_label: &str, series: &[BandSeries]) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(|&(_, m, sd)| [m + sd, m - sd]));
    let mut c = Canvas::new(title, Some(Axis::over(xs)), Axis::over(ys));
    c.axes(x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let upper = s
            .points
            .iter()
            .map(|&(x, m, sd)| format!("{:.2},{:.2}", c.sx(x), c.sy(m + sd)));
        let lower = s
            .points
            .iter()
            .rev()
            .map(|&(x, m, sd)| format!("{:.2},{:.2}", c.sx(x), c.sy(m - sd)));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            c.body,
            r#"<polygon class="band" points="{}" fill="{}" fill-opacity="0.18" stroke="none"/>"#,
            band.join(" "),
            color(i)
        );
        let line: Vec<String> = s
            .points
            .iter()
            .map(|&(x, m, _)| format!("{:.2},{:.2}", c.sx(x), c.sy(m)))
            .collect();
        let _ = writeln!(
            c.body,
            r#"<polyline class="series" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            line.join(" "),
            color(i)
        );
    }
    c.legend(&series.iter().map(|s| s.name.clone()).collect::<Vec<_>>());
    c.finish()
}
