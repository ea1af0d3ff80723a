//! SVG indifference-curve plots for two-objective scenarios.
//!
//! Layout is fixed (panel size, margins, number formatting) so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;

use crate::ensemble::juror_value;
use crate::error::{Error, Result};
use crate::harness::Scenario;
use crate::model::{Juror, Jury, UtilityForm};

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const CURVE_SAMPLES: usize = 96;
const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Axis-aligned data window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// Bounding box of the options, widened by 10% of its extent on each
    /// side (by 1 when an extent is zero).
    pub fn around(points: &[(f64, f64)]) -> Self {
        let fold = |f: fn(&(f64, f64)) -> f64| {
            points
                .iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                })
        };
        let pad = |(lo, hi): (f64, f64)| {
            let ext = hi - lo;
            let p = if ext > 0.0 { 0.1 * ext } else { 1.0 };
            (lo - p, hi + p)
        };
        let (x_min, x_max) = pad(fold(|p| p.0));
        let (y_min, y_max) = pad(fold(|p| p.1));
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }
}

/// Liang-Barsky clip of segment p-q to `b`.
fn clip(b: &Bounds, p: (f64, f64), q: (f64, f64)) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (pk, qk) in [
        (-dx, p.0 - b.x_min),
        (dx, b.x_max - p.0),
        (-dy, p.1 - b.y_min),
        (dy, b.y_max - p.1),
    ] {
        if pk == 0.0 {
            if qk < 0.0 {
                return None;
            }
        } else {
            let r = qk / pk;
            if pk < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some(((p.0 + t0 * dx, p.1 + t0 * dy), (p.0 + t1 * dx, p.1 + t1 * dy)))
}

/// Level set `u(x, y) = level` of a two-objective juror, clipped to the
/// window and split into polylines.
pub fn level_curve(juror: &Juror, level: f64, window: &Bounds) -> Vec<Vec<(f64, f64)>> {
    let w = juror.weights.as_slice();
    let (w1, w2) = (w[0], w[1]);
    let raw: Vec<(f64, f64)> = match juror.form {
        _ if w2 == 0.0 => {
            let x = match juror.form {
                UtilityForm::Linear => level / w1,
                UtilityForm::CobbDouglas => level.powf(1.0 / w1),
            };
            vec![(x, window.y_min), (x, window.y_max)]
        }
        _ if w1 == 0.0 => {
            let y = match juror.form {
                UtilityForm::Linear => level / w2,
                UtilityForm::CobbDouglas => level.powf(1.0 / w2),
            };
            vec![(window.x_min, y), (window.x_max, y)]
        }
        UtilityForm::Linear => [window.x_min, window.x_max]
            .iter()
            .map(|&x| (x, (level - w1 * x) / w2))
            .collect(),
        UtilityForm::CobbDouglas => {
            let lo = window.x_min.max(1e-9);
            (0..=CURVE_SAMPLES)
                .map(|i| lo + (window.x_max - lo) * i as f64 / CURVE_SAMPLES as f64)
                .filter(|x| *x > 0.0 && level > 0.0)
                .map(|x| (x, (level / x.powf(w1)).powf(1.0 / w2)))
                .collect()
        }
    };
    let mut lines: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for seg in raw.windows(2) {
        match clip(window, seg[0], seg[1]) {
            Some((p, q)) => {
                if current.last() != Some(&p) {
                    if current.len() >= 2 {
                        lines.push(std::mem::take(&mut current));
                    }
                    current = vec![p];
                }
                current.push(q);
            }
            None => {
                if current.len() >= 2 {
                    lines.push(std::mem::take(&mut current));
                }
                current.clear();
            }
        }
    }
    if current.len() >= 2 {
        lines.push(current);
    }
    lines
}

struct Panel<'a> {
    title: &'a str,
    jury: &'a Jury,
    offset_x: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Renders the scenario's options and, per juror, level sets through
/// option `a`, option `b` and their midpoint level. When `transformed` is
/// given, a second panel shows the same curves for the modified jury.
pub fn emit_plot(scenario: &Scenario, a: &str, b: &str, transformed: Option<&Jury>) -> Result<String> {
    let problem = &scenario.problem;
    if problem.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            expected: 2,
            found: problem.dim(),
        });
    }
    let oa = problem.option(a)?;
    let ob = problem.option(b)?;
    let points: Vec<(f64, f64)> = problem
        .options
        .iter()
        .map(|o| (o.scores[0], o.scores[1]))
        .collect();
    let window = Bounds::around(&points);

    let mut panels = vec![Panel {
        title: "jury",
        jury: &scenario.jury,
        offset_x: 0.0,
    }];
    if let Some(j) = transformed {
        j.check_against(problem)?;
        panels.push(Panel {
            title: "after resolution",
            jury: j,
            offset_x: PANEL_W,
        });
    }
    let width = PANEL_W * panels.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = width,
        h = PANEL_H
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width}" height="{PANEL_H}" fill="white"/>"#
    );

    let mut names: Vec<&crate::model::OptionPoint> = problem.options.iter().collect();
    names.sort_by(|p, q| p.name.cmp(&q.name));

    for panel in &panels {
        let sx = |x: f64| {
            panel.offset_x
                + MARGIN
                + (x - window.x_min) / (window.x_max - window.x_min) * (PANEL_W - 2.0 * MARGIN)
        };
        let sy = |y: f64| {
            PANEL_H - MARGIN - (y - window.y_min) / (window.y_max - window.y_min) * (PANEL_H - 2.0 * MARGIN)
        };
        let _ = writeln!(svg, r#"<g class="panel" data-title="{}">"#, panel.title);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="20" text-anchor="middle" font-weight="bold">{}</text>"#,
            fmt(panel.offset_x + PANEL_W / 2.0),
            panel.title
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            fmt(panel.offset_x + MARGIN),
            fmt(MARGIN),
            fmt(PANEL_W - 2.0 * MARGIN),
            fmt(PANEL_H - 2.0 * MARGIN)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt(panel.offset_x + PANEL_W / 2.0),
            fmt(PANEL_H - 12.0),
            escape(&problem.objectives[0].name)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" transform="rotate(-90 {} {})" text-anchor="middle">{}</text>"#,
            fmt(panel.offset_x + 16.0),
            fmt(PANEL_H / 2.0),
            fmt(panel.offset_x + 16.0),
            fmt(PANEL_H / 2.0),
            escape(&problem.objectives[1].name)
        );
        for (k, juror) in panel.jury.jurors().iter().enumerate() {
            let colour = PALETTE[k % PALETTE.len()];
            let va = juror_value(juror, oa)?;
            let vb = juror_value(juror, ob)?;
            let _ = writeln!(
                svg,
                r#"<g class="juror" data-id="{}" stroke="{colour}" fill="none">"#,
                escape(&juror.id)
            );
            for level in [va, vb, 0.5 * (va + vb)] {
                for line in level_curve(juror, level, &window) {
                    let pts: Vec<String> = line
                        .iter()
                        .map(|&(x, y)| format!("{},{}", fmt(sx(x)), fmt(sy(y))))
                        .collect();
                    let _ = writeln!(
                        svg,
                        r#"<polyline class="level" data-level="{}" points="{}"/>"#,
                        fmt(level),
                        pts.join(" ")
                    );
                }
            }
            let _ = writeln!(svg, "</g>");
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{colour}">{} ({})</text>"#,
                fmt(panel.offset_x + MARGIN + 6.0),
                fmt(MARGIN + 16.0 + 14.0 * k as f64),
                escape(&juror.id),
                juror
                    .weights
                    .as_slice()
                    .iter()
                    .map(|w| fmt(*w))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        for o in &names {
            let (x, y) = (sx(o.scores[0]), sy(o.scores[1]));
            let _ = writeln!(
                svg,
                r#"<circle cx="{}" cy="{}" r="4" fill="black"/><text x="{}" y="{}">{}</text>"#,
                fmt(x),
                fmt(y),
                fmt(x + 6.0),
                fmt(y - 6.0),
                escape(&o.name)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::canonical_scenario;
    use crate::model::Juror;

    fn window() -> Bounds {
        Bounds {
            x_min: 0.0,
            x_max: 10.0,
            y_min: 0.0,
            y_max: 10.0,
        }
    }

    fn slope(line: &[(f64, f64)]) -> f64 {
        let (p, q) = (line[0], line[line.len() - 1]);
        (q.1 - p.1) / (q.0 - p.0)
    }

    #[test]
    fn canonical_curves_have_opposite_slope_orderings() {
        let s = canonical_scenario();
        let alpha = &s.jury.jurors()[0];
        let beta = &s.jury.jurors()[1];
        let a = level_curve(alpha, 5.0, &window());
        let b = level_curve(beta, 5.0, &window());
        assert!((slope(&a[0]) + 4.0).abs() < 1e-12);
        assert!((slope(&b[0]) + 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn equal_weights_give_slope_minus_one() {
        let j = Juror::linear("b*", vec![0.5, 0.5], 0.0).unwrap();
        let l = level_curve(&j, 5.0, &window());
        assert!((slope(&l[0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_juror_draws_vertical_lines() {
        let j = Juror::linear("e", vec![1.0, 0.0], 0.0).unwrap();
        let l = level_curve(&j, 3.0, &window());
        assert_eq!(l.len(), 1);
        assert!(l[0].iter().all(|p| p.0 == 3.0));
    }

    #[test]
    fn cobb_douglas_curve_stays_on_level() {
        let j = Juror::new("cd", vec![0.5, 0.5], UtilityForm::CobbDouglas, 0.0).unwrap();
        for line in level_curve(&j, 4.0, &window()) {
            // endpoints are clipped onto the window along a chord
            for &(x, y) in &line[1..line.len() - 1] {
                assert!(((x * y).sqrt() - 4.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn plot_is_deterministic_and_has_curves() {
        let s = canonical_scenario();
        let one = emit_plot(&s, "A", "B", None).unwrap();
        let two = emit_plot(&s, "A", "B", None).unwrap();
        assert_eq!(one, two);
        assert!(one.starts_with("<svg"));
        assert_eq!(one.matches("class=\"level\"").count(), 6);
        assert_eq!(one.matches("class=\"panel\"").count(), 1);
        let with_after = emit_plot(&s, "A", "B", Some(&s.jury)).unwrap();
        assert_eq!(with_after.matches("class=\"panel\"").count(), 2);
    }

    #[test]
    fn plot_needs_two_objectives() {
        use crate::model::{ChoiceProblem, Jury, Objective, OptionPoint, Tolerances};
        let p = ChoiceProblem::new(
            vec![Objective::new("x")],
            vec![OptionPoint::new("P", vec![1.0]), OptionPoint::new("Q", vec![2.0])],
        )
        .unwrap();
        let jury = Jury::new(vec![Juror::linear("j", vec![1.0], 0.0).unwrap()]).unwrap();
        let s = Scenario::new(p, jury, Tolerances::default(), "career".into(), None, None).unwrap();
        assert_eq!(
            emit_plot(&s, "P", "Q", None).unwrap_err(),
            Error::UnsupportedDimension {
                expected: 2,
                found: 1
            }
        );
    }
}
