//! Static SVG figures: trajectories, opinion traces, separation and the
//! bifurcation diagram. No plotting dependency; each figure is a few
//! polylines on a framed axis.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::BifurcationSweep;
use crate::error::Result;
use crate::fmt::sig_digits;
use crate::sim::{Scenario, TrajectoryLog};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
/// Polylines are thinned to at most this many vertices.
const MAX_POINTS: usize = 1500;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Trajectories,
    Opinions,
    Bifurcation,
    Separation,
}

impl PlotKind {
    pub fn token(self) -> &'static str {
        match self {
            PlotKind::Trajectories => "trajectories",
            PlotKind::Opinions => "opinions",
            PlotKind::Bifurcation => "bifurcation",
            PlotKind::Separation => "separation",
        }
    }

    /// `<run>_<kind>.svg`
    pub fn file_name(self, run: &str) -> String {
        format!("{run}_{}.svg", self.token())
    }
}

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Maps data coordinates into the plotting area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if !(lo.is_finite() && hi.is_finite()) {
                (0.0, 1.0)
            } else if hi - lo < 1e-9 {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.04 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        Self { x: widen(x), y: widen(y) }
    }

    /// Same scale on both axes, for maps.
    fn equal_aspect(x: (f64, f64), y: (f64, f64)) -> Self {
        let mut f = Self::new(x, y);
        let sx = (f.x.1 - f.x.0) / (WIDTH - 2.0 * MARGIN);
        let sy = (f.y.1 - f.y.0) / (HEIGHT - 2.0 * MARGIN);
        let s = sx.max(sy);
        let cx = 0.5 * (f.x.0 + f.x.1);
        let cy = 0.5 * (f.y.0 + f.y.1);
        let hx = 0.5 * s * (WIDTH - 2.0 * MARGIN);
        let hy = 0.5 * s * (HEIGHT - 2.0 * MARGIN);
        f.x = (cx - hx, cx + hx);
        f.y = (cy - hy, cy + hy);
        f
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn point(&self, x: f64, y: f64) -> String {
        format!("{:.2},{:.2}", self.px(x), self.py(y))
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str, frame: &Frame, xlabel: &str, ylabel: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(body, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
        let (l, r) = (MARGIN, WIDTH - MARGIN);
        let (t, b) = (MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(body, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
        for k in 0..=4 {
            let fx = frame.x.0 + (frame.x.1 - frame.x.0) * k as f64 / 4.0;
            let fy = frame.y.0 + (frame.y.1 - frame.y.0) * k as f64 / 4.0;
            let _ = writeln!(
                body,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
                frame.px(fx),
                b + 16.0,
                sig_digits(fx, 3)
            );
            let _ = writeln!(
                body,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                l - 4.0,
                frame.py(fy) + 4.0,
                sig_digits(fy, 3)
            );
        }
        let _ = writeln!(body, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
        let _ = writeln!(
            body,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{ylabel}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0
        );
        Self { body }
    }

    fn polyline(&mut self, frame: &Frame, pts: &[(f64, f64)], stroke: &str, dash: bool) {
        let step = pts.len().div_ceil(MAX_POINTS).max(1);
        let mut coords: Vec<String> = pts.iter().step_by(step).map(|&(x, y)| frame.point(x, y)).collect();
        if let Some(&(x, y)) = pts.last() {
            if !(pts.len() - 1).is_multiple_of(step) {
                coords.push(frame.point(x, y));
            }
        }
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.5"{dash} points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn legend(&mut self, row: usize, label: &str, fill: &str) {
        let y = MARGIN + 14.0 + 16.0 * row as f64;
        let x = WIDTH - MARGIN - 110.0;
        let _ = writeln!(self.body, r#"<rect x="{x}" y="{}" width="10" height="10" fill="{fill}"/>"#, y - 9.0);
        let _ = writeln!(self.body, r#"<text x="{}" y="{y}">{label}</text>"#, x + 14.0);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn airplane_ids(log: &TrajectoryLog) -> Vec<u32> {
    let mut ids: Vec<u32> = log.rows.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Paths in the plane. Circles mark starts, squares mark goals.
pub fn trajectories_svg(log: &TrajectoryLog, scenario: &Scenario) -> String {
    let xs = bounds(
        log.rows.iter().map(|r| r.position.x).chain(scenario.airplanes.iter().flat_map(|a| [a.start.x, a.goal.x])),
    );
    let ys = bounds(
        log.rows.iter().map(|r| r.position.y).chain(scenario.airplanes.iter().flat_map(|a| [a.start.y, a.goal.y])),
    );
    let frame = Frame::equal_aspect(xs, ys);
    let mut svg = Svg::new(&format!("{}: trajectories", scenario.name), &frame, "x", "y");
    for (i, a) in scenario.airplanes.iter().enumerate() {
        let c = colour(i);
        let pts: Vec<(f64, f64)> =
            std::iter::once((a.start.x, a.start.y)).chain(log.rows_for(a.id).map(|r| (r.position.x, r.position.y))).collect();
        svg.polyline(&frame, &pts, c, false);
        let _ = writeln!(
            svg.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{c}"/>"#,
            frame.px(a.start.x),
            frame.py(a.start.y)
        );
        let _ = writeln!(
            svg.body,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="none" stroke="{c}" stroke-width="2"/>"#,
            frame.px(a.goal.x) - 5.0,
            frame.py(a.goal.y) - 5.0
        );
        svg.legend(i, &format!("A{}", a.id), c);
    }
    svg.finish()
}

/// Opinion `z` of each airplane against time.
pub fn opinions_svg(log: &TrajectoryLog, name: &str) -> String {
    let ids = airplane_ids(log);
    let frame = Frame::new(bounds(log.rows.iter().map(|r| r.t)), bounds(log.rows.iter().map(|r| r.z).chain([0.0])));
    let mut svg = Svg::new(&format!("{name}: opinions"), &frame, "t", "z");
    svg.polyline(&frame, &[(frame.x.0, 0.0), (frame.x.1, 0.0)], "#999999", true);
    for (i, id) in ids.iter().enumerate() {
        let pts: Vec<(f64, f64)> = log.rows_for(*id).map(|r| (r.t, r.z)).collect();
        svg.polyline(&frame, &pts, colour(i), false);
        svg.legend(i, &format!("A{id}"), colour(i));
    }
    svg.finish()
}

/// Minimum pairwise separation against time, with the margin `r` dashed.
pub fn separation_svg(log: &TrajectoryLog, name: &str, r: f64) -> String {
    let n = airplane_ids(log).len().max(1);
    let pts: Vec<(f64, f64)> = log.steps(n).map(|st| (st[0].t, st[0].min_sep)).filter(|p| p.1.is_finite()).collect();
    let frame = Frame::new(bounds(pts.iter().map(|p| p.0)), bounds(pts.iter().map(|p| p.1).chain([0.0, r])));
    let mut svg = Svg::new(&format!("{name}: separation"), &frame, "t", "min separation");
    svg.polyline(&frame, &[(frame.x.0, r), (frame.x.1, r)], "#d62728", true);
    svg.polyline(&frame, &pts, colour(0), false);
    svg.finish()
}

/// `z₁` of every equilibrium against `u`; filled dots are stable.
pub fn bifurcation_svg(sweep: &BifurcationSweep) -> String {
    let pts: Vec<(f64, f64, bool)> =
        sweep.points.iter().flat_map(|p| p.equilibria.iter().map(move |e| (p.u, e.z1, e.stable))).collect();
    let frame = Frame::new(bounds(pts.iter().map(|p| p.0)), bounds(pts.iter().map(|p| p.1)));
    let mut svg = Svg::new("bifurcation of the reduced opinion dynamics", &frame, "u", "z1");
    for &(u, z, stable) in &pts {
        let fill = if stable { colour(0) } else { "none" };
        let _ = writeln!(
            svg.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{fill}" stroke="{}"/>"#,
            frame.px(u),
            frame.py(z),
            colour(0)
        );
    }
    if let Some(u) = sweep.critical_u {
        svg.polyline(&frame, &[(u, frame.y.0), (u, frame.y.1)], "#999999", true);
    }
    svg.legend(0, "stable", colour(0));
    svg.legend(1, "unstable", "#bbbbbb");
    svg.finish()
}

/// Writes the trajectory, opinion and separation figures of one run and
/// returns their paths.
pub fn write_run_plots(out_dir: &Path, log: &TrajectoryLog, scenario: &Scenario) -> Result<Vec<PathBuf>> {
    let name = &scenario.name;
    let figures = [
        (PlotKind::Trajectories, trajectories_svg(log, scenario)),
        (PlotKind::Opinions, opinions_svg(log, name)),
        (PlotKind::Separation, separation_svg(log, name, scenario.safety.r)),
    ];
    let mut paths = Vec::with_capacity(figures.len());
    for (kind, svg) in figures {
        let path = out_dir.join(kind.file_name(name));
        std::fs::write(&path, svg)?;
        paths.push(path);
    }
    Ok(paths)
}
