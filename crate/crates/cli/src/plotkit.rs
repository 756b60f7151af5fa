//! Minimal deterministic SVG emission plus the descriptive statistics the
//! plots need. Coordinates are written with fixed precision so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
pub const MARGIN: f64 = 56.0;

pub struct Svg {
    body: String,
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

impl Svg {
    pub fn new() -> Self {
        let mut body = String::new();
        let _ = write!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
             viewBox=\"0 0 {} {}\" font-family=\"monospace\" font-size=\"11\">\n",
            WIDTH, HEIGHT, WIDTH, HEIGHT
        );
        body.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        Self { body }
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = write!(
            self.body,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"/>\n",
            fmt(x1),
            fmt(y1),
            fmt(x2),
            fmt(y2),
            stroke
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = write!(
            self.body,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"{}\"/>\n",
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(h),
            fill,
            stroke
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = write!(
            self.body,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>\n",
            fmt(cx),
            fmt(cy),
            fmt(r),
            fill
        );
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], stroke: &str) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y))).collect();
        let _ = write!(
            self.body,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            pts.join(" "),
            stroke
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y))).collect();
        let _ = write!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\"/>\n",
            pts.join(" "),
            stroke
        );
    }

    pub fn text(&mut self, x: f64, y: f64, anchor: &str, content: &str) {
        let _ = write!(
            self.body,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{}\">{}</text>\n",
            fmt(x),
            fmt(y),
            anchor,
            escape(content)
        );
    }

    pub fn comment(&mut self, content: &str) {
        let _ = write!(self.body, "<!-- {} -->\n", escape(content));
    }

    pub fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Color cycle for multiple series.
pub const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

/// Linear interpolation percentile (inclusive, the common "type 7" rule):
/// rank `p (n-1)` between order statistics. `data` need not be sorted.
pub fn percentile(data: &[f64], p: f64) -> f64 {
    assert!(!data.is_empty());
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let t = rank - lo as f64;
    sorted[lo] * (1.0 - t) + sorted[hi] * t
}

/// Five-number box-plot summary with 1.5 IQR whiskers clamped to the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub lower_whisker: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub upper_whisker: f64,
}

pub fn box_stats(data: &[f64]) -> BoxStats {
    let q1 = percentile(data, 0.25);
    let median = percentile(data, 0.5);
    let q3 = percentile(data, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let lower_whisker = data
        .iter()
        .cloned()
        .filter(|v| *v >= lo_fence)
        .fold(f64::INFINITY, f64::min);
    let upper_whisker = data
        .iter()
        .cloned()
        .filter(|v| *v <= hi_fence)
        .fold(f64::NEG_INFINITY, f64::max);
    BoxStats { lower_whisker, q1, median, q3, upper_whisker }
}

/// Map data range to plot coordinates (y axis flipped).
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub px0: f64,
    pub px1: f64,
    pub py0: f64,
    pub py1: f64,
}

impl Scale {
    pub fn x(&self, v: f64) -> f64 {
        if self.x1 == self.x0 {
            return 0.5 * (self.px0 + self.px1);
        }
        self.px0 + (v - self.x0) / (self.x1 - self.x0) * (self.px1 - self.px0)
    }

    pub fn y(&self, v: f64) -> f64 {
        if self.y1 == self.y0 {
            return 0.5 * (self.py0 + self.py1);
        }
        self.py0 - (v - self.y0) / (self.y1 - self.y0) * (self.py0 - self.py1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn percentile_matches_hand_oracle() {
        // sorted [1, 2, 3, 4]: q1 = 1.75, median = 2.5, q3 = 3.25
        let data = [4.0, 1.0, 3.0, 2.0];
        assert_relative_eq!(percentile(&data, 0.25), 1.75, epsilon = 1e-12);
        assert_relative_eq!(percentile(&data, 0.5), 2.5, epsilon = 1e-12);
        assert_relative_eq!(percentile(&data, 0.75), 3.25, epsilon = 1e-12);
        assert_eq!(percentile(&data, 0.0), 1.0);
        assert_eq!(percentile(&data, 1.0), 4.0);
        assert_eq!(percentile(&[7.0], 0.5), 7.0);
    }

    #[test]
    fn box_stats_whiskers_clamp_to_data() {
        // an outlier beyond the 1.5 IQR fence is excluded from the whisker
        let data = [1.0, 2.0, 3.0, 4.0, 100.0];
        let b = box_stats(&data);
        assert_eq!(b.median, 3.0);
        assert_eq!(b.lower_whisker, 1.0);
        assert_eq!(b.upper_whisker, 4.0);
        assert!(b.q3 < 100.0);
    }

    #[test]
    fn svg_is_wellformed_and_deterministic() {
        let build = || {
            let mut svg = Svg::new();
            svg.polygon(&[(0.0, 0.0), (10.0, 0.0), (5.0, 8.0)], PALETTE[0]);
            svg.text(5.0, 20.0, "middle", "a<b&c");
            svg.finish()
        };
        let a = build();
        assert_eq!(a, build());
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert!(a.contains("&lt;"));
        assert_eq!(a.matches("<polygon").count(), 1);
    }
}
