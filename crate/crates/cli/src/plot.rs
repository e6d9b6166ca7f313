//! Static SVG convergence plots: metric against elapsed time on a log y-axis.

use std::fmt::Write as _;

use stotam::experiment::{MedianCurve, MedianPoint, Metric, RunTrace};
use stotam::Algorithm;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 84.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 64.0;

/// Everything drawn for one algorithm.
pub struct Series<'a> {
    pub algorithm: Algorithm,
    pub runs: Vec<&'a RunTrace>,
    pub median: &'a MedianCurve,
}

fn color(a: Algorithm) -> &'static str {
    match a {
        Algorithm::StoTam => "#1f5fa8",
        Algorithm::StoTiht => "#c8402a",
    }
}

fn dash(a: Algorithm) -> &'static str {
    match a {
        Algorithm::StoTam => "",
        Algorithm::StoTiht => " stroke-dasharray=\"7 4\"",
    }
}

fn label(a: Algorithm) -> &'static str {
    match a {
        Algorithm::StoTam => "StoTAM",
        Algorithm::StoTiht => "StoTIHT",
    }
}

fn metric_name(metric: Metric) -> &'static str {
    match metric {
        Metric::Loss => "loss",
        Metric::RelError => "relative error",
    }
}

fn median_value(metric: Metric, p: &MedianPoint) -> f64 {
    match metric {
        Metric::Loss => p.loss,
        Metric::RelError => p.rel_error,
    }
}

/// Maps data coordinates to pixels.
struct Frame {
    t_max: f64,
    lo: f64,
    hi: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT) * (t / self.t_max).clamp(0.0, 1.0)
    }

    /// `None` for values that cannot be placed on a log axis.
    fn y(&self, v: f64) -> Option<f64> {
        if !v.is_finite() {
            return None;
        }
        let e = if v > 0.0 {
            v.log10().clamp(self.lo, self.hi)
        } else {
            self.lo
        };
        Some(TOP + (HEIGHT - TOP - BOTTOM) * (self.hi - e) / (self.hi - self.lo))
    }
}

/// Step of roughly `span / 6` from the 1-2-5 sequence.
fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|f| f * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

fn path(points: impl Iterator<Item = (f64, Option<f64>)>) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    let mut last = String::new();
    for (x, y) in points {
        match y {
            Some(y) => {
                let xy = format!("{x:.1} {y:.1}");
                if pen_down && xy == last {
                    continue;
                }
                let _ = write!(d, "{}{xy}", if pen_down { " L" } else { " M" });
                last = xy;
                pen_down = true;
            }
            None => pen_down = false,
        }
    }
    d.trim_start().to_string()
}

/// Renders one figure; thin lines are trials, thick lines medians.
pub fn render(metric: Metric, series: &[Series<'_>]) -> String {
    let values = series.iter().flat_map(|s| {
        s.runs
            .iter()
            .flat_map(|r| r.records.iter().map(move |rec| metric.of(rec)))
            .chain(s.median.points.iter().map(move |p| median_value(metric, p)))
    });
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite() && *v > 0.0) {
        lo = lo.min(v.log10());
        hi = hi.max(v.log10());
    }
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 0.0);
    }
    let (lo, mut hi) = (lo.floor(), hi.ceil());
    if hi <= lo {
        hi = lo + 1.0;
    }
    let t_max = series
        .iter()
        .flat_map(|s| {
            s.runs
                .iter()
                .flat_map(|r| r.records.iter().map(|rec| rec.elapsed_s))
        })
        .filter(|t| t.is_finite())
        .fold(0.0, f64::max);
    let frame = Frame {
        t_max: if t_max > 0.0 { t_max } else { 1.0 },
        lo,
        hi,
    };

    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        s,
        "<defs><clipPath id=\"plot-area\"><rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\"/></clipPath></defs>",
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{} vs. elapsed time</text>",
        WIDTH / 2.0,
        metric_name(metric)
    );

    // y axis: one tick per decade, thinned to at most ten labels
    let decades = (hi - lo) as i64;
    let stride = (decades + 9) / 10;
    let _ = writeln!(s, "<g stroke=\"#ddd\" stroke-width=\"1\">");
    let mut labels = String::new();
    for e in (lo as i64..=hi as i64).filter(|e| (e - lo as i64) % stride == 0) {
        let y = frame.y(10f64.powi(e as i32)).unwrap_or(y1);
        let _ = writeln!(s, "<line x1=\"{x0}\" y1=\"{y:.1}\" x2=\"{x1}\" y2=\"{y:.1}\"/>");
        let _ = writeln!(
            labels,
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">1e{e}</text>",
            x0 - 6.0,
            y + 4.0
        );
    }
    let step = nice_step(frame.t_max);
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    let mut k = 0.0;
    while k * step <= frame.t_max * (1.0 + 1e-9) {
        let t = k * step;
        let x = frame.x(t);
        let _ = writeln!(s, "<line x1=\"{x:.1}\" y1=\"{y0}\" x2=\"{x:.1}\" y2=\"{y1}\"/>");
        let _ = writeln!(
            labels,
            "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\">{t:.decimals$}</text>",
            y1 + 18.0
        );
        k += 1.0;
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y1 - y0
    );
    s.push_str(&labels);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">elapsed time (s)</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        "<text x=\"22\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 22 {0})\">{1}</text>",
        (y0 + y1) / 2.0,
        metric_name(metric)
    );

    let _ = writeln!(s, "<g clip-path=\"url(#plot-area)\" fill=\"none\">");
    for ser in series {
        let a = ser.algorithm;
        for run in &ser.runs {
            let d = path(
                run.records
                    .iter()
                    .map(|r| (frame.x(r.elapsed_s), frame.y(metric.of(r)))),
            );
            if !d.is_empty() {
                let _ = writeln!(
                    s,
                    "<path d=\"{d}\" stroke=\"{}\" stroke-width=\"0.7\" stroke-opacity=\"0.35\"{}/>",
                    color(a),
                    dash(a)
                );
            }
        }
    }
    for ser in series {
        let a = ser.algorithm;
        let d = path(
            ser.median
                .points
                .iter()
                .map(|p| (frame.x(p.time), frame.y(median_value(metric, p)))),
        );
        if !d.is_empty() {
            let _ = writeln!(
                s,
                "<path d=\"{d}\" stroke=\"{}\" stroke-width=\"2.8\"{}/>",
                color(a),
                dash(a)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let (lx, ly) = (x1 - 236.0, y0 + 10.0);
    let rows = series.len() + 1;
    let _ = writeln!(
        s,
        "<g><rect x=\"{lx}\" y=\"{ly}\" width=\"226\" height=\"{}\" fill=\"white\" stroke=\"#888\"/>",
        10.0 + 20.0 * rows as f64
    );
    for (i, ser) in series.iter().enumerate() {
        let y = ly + 20.0 + 20.0 * i as f64;
        let a = ser.algorithm;
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"2.8\"{}/>",
            lx + 10.0,
            lx + 50.0,
            color(a),
            dash(a)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">{} median ({} trials)</text>",
            lx + 58.0,
            y + 4.0,
            label(a),
            ser.median.trials
        );
    }
    let y = ly + 20.0 + 20.0 * series.len() as f64;
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#555\" stroke-width=\"0.7\"/>",
        lx + 10.0,
        lx + 50.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\">individual trials</text>",
        lx + 58.0,
        y + 4.0
    );
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
