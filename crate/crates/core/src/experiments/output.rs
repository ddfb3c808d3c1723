//! Sweep result tables and their CSV and SVG renderings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Engine;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "swept_value,engine,p_busy,p_j,p_loss,paoi,paoi_ci,jammer_avg_power,series";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub swept_value: f64,
    pub engine: Engine,
    /// Jammer activation probability (analytic) or time fraction (simulation).
    pub p_busy: f64,
    /// Per-activation jamming power.
    pub p_j: f64,
    pub p_loss: f64,
    pub paoi: Option<f64>,
    /// 99% half-width; simulation rows only.
    pub paoi_ci: Option<f64>,
    pub jammer_avg_power: f64,
    /// Empty when the sweep defines no series.
    pub series: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PBusy,
    PJ,
    PLoss,
    #[default]
    Paoi,
    JammerAvgPower,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::PBusy => "p_busy",
            Metric::PJ => "p_j",
            Metric::PLoss => "p_loss",
            Metric::Paoi => "paoi",
            Metric::JammerAvgPower => "jammer_avg_power",
        }
    }

    pub fn of(self, row: &ResultRow) -> Option<f64> {
        match self {
            Metric::PBusy => Some(row.p_busy),
            Metric::PJ => Some(row.p_j),
            Metric::PLoss => Some(row.p_loss),
            Metric::Paoi => row.paoi,
            Metric::JammerAvgPower => Some(row.jammer_avg_power),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub parameter: String,
    pub title: Option<String>,
    pub rows: Vec<ResultRow>,
}

/// Shortest decimal text carrying 9 significant digits, in the manner of
/// printf's `%.9g`.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..9).contains(&exp) {
        trim(&format!("{:.*}", (8 - exp) as usize, v))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_sig).unwrap_or_default()
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                format_sig(r.swept_value),
                r.engine.as_str(),
                format_sig(r.p_busy),
                format_sig(r.p_j),
                format_sig(r.p_loss),
                opt(r.paoi),
                opt(r.paoi_ci),
                format_sig(r.jammer_avg_power),
                r.series
            );
        }
        out
    }

    /// Parses the output of [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str, parameter: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == CSV_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    column: 1,
                    message: format!("expected header {CSV_HEADER:?}"),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let bad = |column: usize, message: String| Error::Parse {
                line: i + 1,
                column,
                message,
            };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(bad(1, format!("expected 9 columns, got {}", cols.len())));
            }
            let num = |c: usize| -> Result<f64> {
                cols[c]
                    .parse()
                    .map_err(|_| bad(c + 1, format!("not a number: {:?}", cols[c])))
            };
            let maybe = |c: usize| -> Result<Option<f64>> {
                if cols[c].is_empty() {
                    Ok(None)
                } else {
                    num(c).map(Some)
                }
            };
            let engine = match cols[1] {
                "analytic" => Engine::Analytic,
                "simulation" => Engine::Simulation,
                other => return Err(bad(2, format!("unknown engine {other:?}"))),
            };
            rows.push(ResultRow {
                swept_value: num(0)?,
                engine,
                p_busy: num(2)?,
                p_j: num(3)?,
                p_loss: num(4)?,
                paoi: maybe(5)?,
                paoi_ci: maybe(6)?,
                jammer_avg_power: num(7)?,
                series: cols[8].to_string(),
            });
        }
        Ok(ResultTable {
            parameter: parameter.to_string(),
            title: None,
            rows,
        })
    }

    /// Distinct (series, engine) pairs in row order.
    pub fn curves(&self) -> Vec<(String, Engine)> {
        let mut out: Vec<(String, Engine)> = Vec::new();
        for r in &self.rows {
            if !out.iter().any(|(s, e)| *s == r.series && *e == r.engine) {
                out.push((r.series.clone(), r.engine));
            }
        }
        out
    }

    /// Points of one curve, in grid order.
    pub fn curve(&self, series: &str, engine: Engine, metric: Metric) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.series == series && r.engine == engine)
            .filter_map(|r| metric.of(r).map(|y| (r.swept_value, y)))
            .collect()
    }

    /// Line chart with one polyline per series and engine.
    pub fn to_svg(&self, metric: Metric) -> String {
        const W: f64 = 720.0;
        const H: f64 = 440.0;
        const LEFT: f64 = 80.0;
        const RIGHT: f64 = 200.0;
        const TOP: f64 = 40.0;
        const BOTTOM: f64 = 60.0;
        const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

        let curves = self.curves();
        let points: Vec<Vec<(f64, f64)>> = curves.iter().map(|(s, e)| self.curve(s, *e, metric)).collect();
        let all = points.iter().flatten();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { 0.5 * y0.abs().max(1.0) };
        let (y0, y1) = (y0 - pad, y1 + pad);
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        if let Some(title) = &self.title {
            let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 20.0,
                format_tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                py + 4.0,
                format_tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 15.0,
            escape(&self.parameter)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            metric.label()
        );
        for (i, ((series, engine), pts)) in curves.iter().zip(&points).enumerate() {
            let color = COLORS[i % COLORS.len()];
            let dash = match engine {
                Engine::Analytic => "",
                Engine::Simulation => r#" stroke-dasharray="6 3""#,
            };
            let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let name = if series.is_empty() {
                engine.as_str().to_string()
            } else {
                format!("{series} ({})", engine.as_str())
            };
            let _ = writeln!(
                s,
                r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
                escape(&name),
                coords.join(" ")
            );
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = W - RIGHT + 15.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                lx + 25.0,
                lx + 30.0,
                ly + 4.0,
                escape(&name)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn write_svg(&self, path: impl AsRef<Path>, metric: Metric) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_svg(metric)).map_err(|e| Error::io(path, e))
    }
}

fn format_tick(v: f64) -> String {
    let r = (v * 1e4).round() / 1e4;
    format_sig(if r == 0.0 { 0.0 } else { r })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig(3.416_666_666_666_667), "3.41666667");
        assert_eq!(format_sig(0.1), "0.1");
        assert_eq!(format_sig(-5.0), "-5");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.923_076_923_076_923), "1.92307692");
        assert_eq!(format_sig(123_456_789_012.0), "1.23456789e11");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(0.000_012_345_678_91), "0.0000123456789");
        assert_eq!(format_sig(999_999_999.6), "1e9");
    }

    #[test]
    fn formatted_values_reparse_to_themselves() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 2.0_f64.sqrt() * 1e-9, 6.02214076e23, -0.52] {
            let once: f64 = format_sig(v).parse().unwrap();
            assert_eq!(format_sig(once), format_sig(v));
            assert!((once - v).abs() <= 1e-8 * v.abs());
        }
    }

    fn row(x: f64, engine: Engine, paoi: Option<f64>) -> ResultRow {
        ResultRow {
            swept_value: x,
            engine,
            p_busy: 0.52,
            p_j: 1.0 / 0.52,
            p_loss: 0.3,
            paoi,
            paoi_ci: (engine == Engine::Simulation).then_some(0.01),
            jammer_avg_power: 1.0,
            series: "decoy".into(),
        }
    }

    #[test]
    fn two_rows_three_lines() {
        let t = ResultTable {
            parameter: "traffic.q".into(),
            title: None,
            rows: vec![row(0.1, Engine::Analytic, Some(3.0)), row(0.1, Engine::Simulation, None)],
        };
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv.lines().next(), Some(CSV_HEADER));
        assert_eq!(csv.lines().nth(2), Some("0.1,simulation,0.52,1.92307692,0.3,,0.01,1,decoy"));
    }

    #[test]
    fn csv_round_trip() {
        let t = ResultTable {
            parameter: "traffic.q".into(),
            title: None,
            rows: vec![row(0.1, Engine::Analytic, Some(1.0 / 3.0)), row(0.2, Engine::Simulation, Some(3.5))],
        };
        let csv = t.to_csv();
        let back = ResultTable::from_csv(&csv, "traffic.q").unwrap();
        assert_eq!(back.to_csv(), csv);
        assert_eq!(back.rows[0].paoi, Some(0.333333333));
        assert_eq!(back.rows[1].paoi_ci, Some(0.01));
    }

    #[test]
    fn csv_errors_carry_line() {
        let text = format!("{CSV_HEADER}\n0.1,analytic,x,1,0.3,3,,1,\n");
        match ResultTable::from_csv(&text, "q") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(ResultTable::from_csv("a,b\n", "q").is_err());
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let mut rows = Vec::new();
        for (i, series) in ["decoy", "no_decoy"].iter().enumerate() {
            for x in [0.1, 0.2, 0.3] {
                let mut r = row(x, Engine::Analytic, Some(3.0 + x + i as f64));
                r.series = series.to_string();
                rows.push(r);
            }
        }
        let t = ResultTable {
            parameter: "traffic.q".into(),
            title: Some("a <title>".into()),
            rows,
        };
        let svg = t.to_svg(Metric::Paoi);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("traffic.q"));
        assert!(svg.contains("a &lt;title&gt;"));
        assert!(svg.contains(">paoi</text>"));
    }
}
