//! Dependency-free SVG emission for production-preference scatters and
//! accuracy curves.
//!
//! Preference panels plot (SOV proportion, marking proportion) per agent:
//! empty circles are agents (pre- and post-communication in distinct
//! colors), solid circles are phase means with standard-deviation error
//! bars, and a solid diamond marks the initial language. One panel per
//! ambiguity class plus a post-communication difference panel.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::evaluation::{EvalRow, Phase, ReportClass, REPORT_CLASSES};
use crate::language::LanguageSpec;
use crate::{Error, Real, Result};

use super::{load_curve_csv, load_eval_csv, write_atomic, CurveRow, ExperimentConfig};

const COLOR_POST_SL: &str = "#d8739f";
const COLOR_POST_RL: &str = "#6a3d9a";
const COLOR_ALL: &str = "#ff8c00";
const COLOR_AMB: &str = "#4169e1";
const COLOR_NOT_AMB: &str = "#2e8b57";

struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Svg {
            width,
            height,
            body: String::new(),
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, color: &str, width: f64) {
        writeln!(
            self.body,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="{}"/>"#,
            x1, y1, x2, y2, color, width
        )
        .unwrap();
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, color: &str, filled: bool, class: &str) {
        let fill = if filled { color } else { "none" };
        writeln!(
            self.body,
            r#"<circle class="{}" cx="{:.1}" cy="{:.1}" r="{:.1}" stroke="{}" fill="{}"/>"#,
            class, cx, cy, r, color, fill
        )
        .unwrap();
    }

    fn diamond(&mut self, cx: f64, cy: f64, r: f64, color: &str) {
        writeln!(
            self.body,
            r#"<path class="initial" d="M {:.1} {:.1} L {:.1} {:.1} L {:.1} {:.1} L {:.1} {:.1} Z" fill="{}"/>"#,
            cx,
            cy - r,
            cx + r,
            cy,
            cx,
            cy + r,
            cx - r,
            cy,
            color
        )
        .unwrap();
    }

    fn polyline(&mut self, points: &[(f64, f64)], color: &str, class: &str) {
        let pts: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{:.1},{:.1}", x, y))
            .collect();
        writeln!(
            self.body,
            r#"<polyline class="{}" points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            class,
            pts.join(" "),
            color
        )
        .unwrap();
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        writeln!(
            self.body,
            r#"<text x="{:.1}" y="{:.1}" font-size="{}" font-family="sans-serif" text-anchor="{}">{}</text>"#,
            x, y, size, anchor, content
        )
        .unwrap();
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
             viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

/// Maps data coordinates onto a framed plot area.
struct Axes {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x_min) / (self.x_max - self.x_min) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + (self.y_max - y) / (self.y_max - self.y_min) * self.height
    }

    fn frame(&self, svg: &mut Svg, x_label: &str, y_label: &str, ticks: &[f64]) {
        let (l, t) = (self.left, self.top);
        let (r, b) = (l + self.width, t + self.height);
        svg.line(l, b, r, b, "#333", 1.0);
        svg.line(l, t, l, b, "#333", 1.0);
        for &v in ticks {
            let x = self.px(v);
            svg.line(x, b, x, b + 4.0, "#333", 1.0);
            svg.text(x, b + 16.0, 10.0, "middle", &format!("{}", v));
            let y = self.py(v);
            svg.line(l - 4.0, y, l, y, "#333", 1.0);
            svg.text(l - 7.0, y + 3.0, 10.0, "end", &format!("{}", v));
        }
        svg.text((l + r) / 2.0, b + 32.0, 11.0, "middle", x_label);
        svg.text(14.0, (t + b) / 2.0, 11.0, "middle", y_label);
    }
}

fn mean_std(xs: &[Real]) -> (Real, Real) {
    (
        crate::evaluation::stats::mean(xs),
        crate::evaluation::stats::std_dev(xs),
    )
}

fn phase_cloud(svg: &mut Svg, ax: &Axes, points: &[(Real, Real)], color: &str, class: &str) {
    for &(x, y) in points {
        svg.circle(ax.px(x), ax.py(y), 4.0, color, false, class);
    }
    if points.is_empty() {
        return;
    }
    let xs: Vec<Real> = points.iter().map(|p| p.0).collect();
    let ys: Vec<Real> = points.iter().map(|p| p.1).collect();
    let (mx, sx) = mean_std(&xs);
    let (my, sy) = mean_std(&ys);
    svg.line(ax.px(mx - sx), ax.py(my), ax.px(mx + sx), ax.py(my), color, 1.2);
    svg.line(ax.px(mx), ax.py(my - sy), ax.px(mx), ax.py(my + sy), color, 1.2);
    svg.circle(ax.px(mx), ax.py(my), 5.0, color, true, "mean");
}

fn preference_points(rows: &[EvalRow], class: ReportClass, phase: Phase) -> Vec<(Real, Real)> {
    rows.iter()
        .filter(|r| r.class_ == class && r.phase == phase && r.n_wellformed > 0)
        .map(|r| {
            (
                r.n_sov as Real / r.n_wellformed as Real,
                r.n_marked as Real / r.n_wellformed as Real,
            )
        })
        .collect()
}

fn preference_panel(rows: &[EvalRow], class: ReportClass, lang: &LanguageSpec) -> String {
    let mut svg = Svg::new(440.0, 440.0);
    let ax = Axes {
        x_min: 0.0,
        x_max: 1.0,
        y_min: 0.0,
        y_max: 1.0,
        left: 50.0,
        top: 24.0,
        width: 360.0,
        height: 360.0,
    };
    ax.frame(
        &mut svg,
        "SOV proportion",
        "marking proportion",
        &[0.0, 0.25, 0.5, 0.75, 1.0],
    );
    svg.text(230.0, 14.0, 12.0, "middle", &format!("production preferences ({})", class));
    phase_cloud(
        &mut svg,
        &ax,
        &preference_points(rows, class, Phase::PostSl),
        COLOR_POST_SL,
        "agent post_sl",
    );
    phase_cloud(
        &mut svg,
        &ax,
        &preference_points(rows, class, Phase::PostRl),
        COLOR_POST_RL,
        "agent post_rl",
    );
    svg.diamond(ax.px(lang.p_sov), ax.py(lang.overall_marking()), 6.0, "#111");
    svg.circle(320.0, 40.0, 4.0, COLOR_POST_SL, false, "legend");
    svg.text(330.0, 44.0, 10.0, "start", "before communication");
    svg.circle(320.0, 56.0, 4.0, COLOR_POST_RL, false, "legend");
    svg.text(330.0, 60.0, 10.0, "start", "after communication");
    svg.finish()
}

fn delta_panel(rows: &[EvalRow]) -> String {
    let mut svg = Svg::new(440.0, 440.0);
    let ax = Axes {
        x_min: -1.0,
        x_max: 1.0,
        y_min: -1.0,
        y_max: 1.0,
        left: 50.0,
        top: 24.0,
        width: 360.0,
        height: 360.0,
    };
    ax.frame(
        &mut svg,
        "SOV proportion difference (amb - not_amb)",
        "marking difference",
        &[-1.0, -0.5, 0.0, 0.5, 1.0],
    );
    svg.text(230.0, 14.0, 12.0, "middle", "post-communication differences");
    // zero guides
    svg.line(ax.px(0.0), ax.py(-1.0), ax.px(0.0), ax.py(1.0), "#ccc", 0.6);
    svg.line(ax.px(-1.0), ax.py(0.0), ax.px(1.0), ax.py(0.0), "#ccc", 0.6);

    let mut points = Vec::new();
    for row in rows
        .iter()
        .filter(|r| r.phase == Phase::PostRl && r.class_ == ReportClass::Amb && r.n_wellformed > 0)
    {
        let partner = rows.iter().find(|r| {
            r.phase == Phase::PostRl
                && r.class_ == ReportClass::NotAmb
                && r.pair_id == row.pair_id
                && r.agent == row.agent
                && r.n_wellformed > 0
        });
        if let Some(namb) = partner {
            let dx = row.n_sov as Real / row.n_wellformed as Real
                - namb.n_sov as Real / namb.n_wellformed as Real;
            let dy = row.n_marked as Real / row.n_wellformed as Real
                - namb.n_marked as Real / namb.n_wellformed as Real;
            points.push((dx, dy));
        }
    }
    phase_cloud(&mut svg, &ax, &points, COLOR_POST_RL, "agent delta");
    svg.diamond(ax.px(0.0), ax.py(0.0), 6.0, "#111");
    svg.finish()
}

/// Writes the four preference panels; returns their paths.
pub fn plot_preferences(
    rows: &[EvalRow],
    lang: &LanguageSpec,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Schema("no evaluation rows to plot".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for class in REPORT_CLASSES {
        let path = out_dir.join(format!("preferences_{}.svg", class));
        write_atomic(&path, preference_panel(rows, class, lang).as_bytes())?;
        written.push(path);
    }
    let path = out_dir.join("preferences_delta.svg");
    write_atomic(&path, delta_panel(rows).as_bytes())?;
    written.push(path);
    Ok(written)
}

/// Mean test-set reconstruction accuracy across pairs, one line per
/// ambiguity class, over communication turns.
pub fn plot_accuracy_curves(rows: &[CurveRow], out_dir: &Path) -> Result<PathBuf> {
    if rows.is_empty() {
        return Err(Error::Schema("no curve rows to plot".into()));
    }
    fs::create_dir_all(out_dir)?;
    let max_turn = rows.iter().map(|r| r.turn).max().unwrap() as f64;
    let mut svg = Svg::new(560.0, 360.0);
    let ax = Axes {
        x_min: 0.0,
        x_max: max_turn.max(1.0),
        y_min: 0.0,
        y_max: 1.0,
        left: 50.0,
        top: 24.0,
        width: 480.0,
        height: 280.0,
    };
    svg.text(290.0, 14.0, 12.0, "middle", "meaning reconstruction accuracy");
    ax.frame(&mut svg, "interaction turn", "accuracy", &[0.0, 0.5, 1.0]);
    for (i, t) in [0.25, 0.5, 0.75].iter().enumerate() {
        let _ = i;
        let x = ax.px(t * ax.x_max);
        svg.line(x, ax.top + ax.height, x, ax.top + ax.height + 4.0, "#333", 1.0);
        svg.text(
            x,
            ax.top + ax.height + 16.0,
            10.0,
            "middle",
            &format!("{}", (t * ax.x_max).round() as usize),
        );
    }

    let mut turns: Vec<usize> = rows.iter().map(|r| r.turn).collect();
    turns.sort_unstable();
    turns.dedup();
    let series = |pick: fn(&CurveRow) -> Real| -> Vec<(f64, f64)> {
        turns
            .iter()
            .map(|&t| {
                let vals: Vec<Real> = rows.iter().filter(|r| r.turn == t).map(pick).collect();
                (
                    ax.px(t as f64),
                    ax.py(crate::evaluation::stats::mean(&vals)),
                )
            })
            .collect()
    };
    svg.polyline(&series(|r| r.acc_all), COLOR_ALL, "curve-all");
    svg.polyline(&series(|r| r.acc_amb), COLOR_AMB, "curve-amb");
    svg.polyline(&series(|r| r.acc_not_amb), COLOR_NOT_AMB, "curve-not-amb");

    for (i, (label, color)) in [
        ("all", COLOR_ALL),
        ("ambiguous", COLOR_AMB),
        ("unambiguous", COLOR_NOT_AMB),
    ]
    .iter()
    .enumerate()
    {
        let y = 40.0 + 14.0 * i as f64;
        svg.line(410.0, y, 430.0, y, color, 2.0);
        svg.text(435.0, y + 3.0, 10.0, "start", label);
    }
    let path = out_dir.join("accuracy_curves.svg");
    write_atomic(&path, svg.finish().as_bytes())?;
    Ok(path)
}

/// Renders every plot for a completed run directory into `<out>/plots/`.
pub fn plot_run(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let cfg = ExperimentConfig::load(&out_dir.join("config.toml"))?;
    let lang = cfg.resolved_language();
    let rows = load_eval_csv(&out_dir.join("eval.csv"))?;
    let curve = load_curve_csv(&out_dir.join("curve.csv"))?;
    let plots = out_dir.join("plots");
    let mut written = plot_preferences(&rows, &lang, &plots)?;
    written.push(plot_accuracy_curves(&curve, &plots)?);
    Ok(written)
}
