//! Standalone SVG 1.1 output: the critical-difference diagram and the
//! per-task mean ± CI bar panel. Coordinates are formatted with fixed
//! precision so output is byte-stable.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::ranking::{rank_order, CdResult};
use crate::report::{CellMark, SummaryRow};

/// Pixels per rank unit before the multiplier.
pub const BASE_PX_PER_RANK: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdStyle {
    /// Scales the 10 px per rank unit base.
    pub multiplier: f64,
    /// Decimals for the CD value in the ruler label.
    pub precision: usize,
    pub font_size: f64,
}

impl Default for CdStyle {
    fn default() -> Self {
        CdStyle {
            multiplier: 12.0,
            precision: 2,
            font_size: 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub model: String,
    pub rank: f64,
    pub x: f64,
    /// 0 or 1, alternating in rank order.
    pub stagger: usize,
    pub label_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliqueBar {
    pub members: Vec<String>,
    pub x1: f64,
    pub x2: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdRuler {
    pub x1: f64,
    pub x2: f64,
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdDiagramLayout {
    pub width: f64,
    pub height: f64,
    pub left: f64,
    pub px_per_rank: f64,
    pub axis_range: (f64, f64),
    pub axis_y: f64,
    pub ticks: Vec<(usize, f64)>,
    pub markers: Vec<Marker>,
    pub bars: Vec<CliqueBar>,
    pub ruler: CdRuler,
}

const MARGIN: f64 = 60.0;
const AXIS_Y: f64 = 56.0;
const BAR_GAP: f64 = 8.0;
const BAR_PAD: f64 = 4.0;
const LABEL_STEP: f64 = 16.0;

impl CdDiagramLayout {
    pub fn x_of(&self, rank: f64) -> f64 {
        self.left + (rank - self.axis_range.0) * self.px_per_rank
    }

    /// Inverse of [`x_of`](Self::x_of).
    pub fn rank_of(&self, x: f64) -> f64 {
        self.axis_range.0 + (x - self.left) / self.px_per_rank
    }
}

pub fn cd_layout(cd: &CdResult, style: &CdStyle) -> CdDiagramLayout {
    let k = cd.models.len().max(2);
    let ppr = BASE_PX_PER_RANK * style.multiplier;
    let axis_range = (1.0, k as f64);
    let left = MARGIN;
    let x_of = |r: f64| left + (r - axis_range.0) * ppr;

    let ticks = (1..=k).map(|i| (i, x_of(i as f64))).collect();

    let bars: Vec<CliqueBar> = cd
        .cliques
        .iter()
        .enumerate()
        .map(|(j, c)| CliqueBar {
            members: c.members.iter().map(|&i| cd.models[i].clone()).collect(),
            x1: x_of(c.lo_rank) - BAR_PAD,
            x2: x_of(c.hi_rank) + BAR_PAD,
            y: AXIS_Y + 2.0 * BAR_GAP + j as f64 * BAR_GAP,
        })
        .collect();

    let label_base = AXIS_Y + 2.0 * BAR_GAP + bars.len() as f64 * BAR_GAP + 2.0 * style.font_size;
    let markers = rank_order(&cd.mean_ranks)
        .into_iter()
        .enumerate()
        .map(|(pos, i)| {
            let stagger = pos % 2;
            Marker {
                model: cd.models[i].clone(),
                rank: cd.mean_ranks[i],
                x: x_of(cd.mean_ranks[i]),
                stagger,
                label_y: label_base + stagger as f64 * LABEL_STEP,
            }
        })
        .collect();

    let ruler = CdRuler {
        x1: x_of(1.0),
        x2: x_of(1.0) + cd.cd * ppr,
        y: 14.0,
        label: format!("CD_{} = {:.*}", cd.alpha, style.precision, cd.cd),
    };

    CdDiagramLayout {
        width: 2.0 * MARGIN + (k - 1) as f64 * ppr,
        height: label_base + LABEL_STEP + style.font_size,
        left,
        px_per_rank: ppr,
        axis_range,
        axis_y: AXIS_Y,
        ticks,
        markers,
        bars,
        ruler,
    }
}

pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

fn svg_open(out: &mut String, width: f64, height: f64) {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    )
    .unwrap();
}

/// Demšar-style diagram: rank axis (1 on the left), one marker and label
/// per model, a bar per clique and the CD ruler.
pub fn render_cd_svg(cd: &CdResult, style: &CdStyle) -> String {
    let l = cd_layout(cd, style);
    let fs = style.font_size;
    let mut out = String::new();
    svg_open(&mut out, l.width, l.height);
    writeln!(
        out,
        r#"<g font-family="sans-serif" font-size="{fs:.1}" stroke="black" fill="black">"#
    )
    .unwrap();

    writeln!(
        out,
        r#"<line class="cd-ruler" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke-width="1.5"/>"#,
        l.ruler.x1, l.ruler.y, l.ruler.x2, l.ruler.y
    )
    .unwrap();
    for x in [l.ruler.x1, l.ruler.x2] {
        writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            l.ruler.y - 4.0,
            l.ruler.y + 4.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text class="cd-label" x="{:.2}" y="{:.2}" stroke="none">{}</text>"#,
        l.ruler.x2 + 6.0,
        l.ruler.y + fs / 3.0,
        xml_escape(&l.ruler.label)
    )
    .unwrap();

    let (x_lo, x_hi) = (l.x_of(l.axis_range.0), l.x_of(l.axis_range.1));
    writeln!(
        out,
        r#"<line class="axis" x1="{x_lo:.2}" y1="{y:.2}" x2="{x_hi:.2}" y2="{y:.2}"/>"#,
        y = l.axis_y
    )
    .unwrap();
    for &(i, x) in &l.ticks {
        writeln!(
            out,
            r#"<line class="tick" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            l.axis_y - 5.0,
            l.axis_y
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="tick-label" x="{x:.2}" y="{:.2}" text-anchor="middle" stroke="none">{i}</text>"#,
            l.axis_y - 9.0
        )
        .unwrap();
    }

    for b in &l.bars {
        let members: Vec<String> = b.members.iter().map(|m| xml_escape(m)).collect();
        writeln!(
            out,
            r#"<line class="clique" data-members="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke-width="3"/>"#,
            members.join(" "),
            b.x1,
            b.y,
            b.x2,
            b.y
        )
        .unwrap();
    }

    for m in &l.markers {
        let name = xml_escape(&m.model);
        writeln!(
            out,
            r#"<line class="leader" x1="{x:.6}" y1="{:.2}" x2="{x:.6}" y2="{:.2}" stroke-width="0.5"/>"#,
            l.axis_y,
            m.label_y - fs,
            x = m.x
        )
        .unwrap();
        writeln!(
            out,
            r#"<circle class="marker" data-model="{name}" data-rank="{:.6}" cx="{:.6}" cy="{:.2}" r="3.5"/>"#,
            m.rank, m.x, l.axis_y
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="model-label" data-model="{name}" data-stagger="{}" x="{:.6}" y="{:.2}" text-anchor="middle" stroke="none">{name} ({:.2})</text>"#,
            m.stagger, m.x, m.label_y, m.rank
        )
        .unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    step * mag
}

/// Bars of `mean` with whiskers at `mean ± h` for the compatible models of
/// one task. The winner's bar carries class `winner`; a zero half-width
/// whisker collapses to a single tick.
pub fn render_cells_svg(rows: &[SummaryRow]) -> String {
    const BAR_W: f64 = 36.0;
    const GAP: f64 = 24.0;
    const PLOT_H: f64 = 200.0;
    const TOP: f64 = 30.0;
    const LEFT: f64 = 56.0;

    let present: Vec<(&SummaryRow, f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((r, r.mean?, r.halfwidth?)))
        .collect();
    let lo = present
        .iter()
        .map(|&(_, m, h)| m - h)
        .fold(f64::INFINITY, f64::min);
    let hi = present
        .iter()
        .map(|&(_, m, h)| m + h)
        .fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if present.is_empty() {
        (0.0, 1.0)
    } else if hi - lo <= 0.0 {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    };
    let step = nice_step(hi - lo);
    let (y_min, y_max) = ((lo / step).floor() * step - step, (hi / step).ceil() * step);
    let y_of = |v: f64| TOP + PLOT_H * (y_max - v) / (y_max - y_min);

    let width = LEFT + GAP + present.len().max(1) as f64 * (BAR_W + GAP);
    let height = TOP + PLOT_H + 40.0;
    let mut out = String::new();
    svg_open(&mut out, width, height);
    writeln!(out, r#"<g font-family="sans-serif" font-size="11">"#).unwrap();
    if let Some((r, _, _)) = present.first() {
        writeln!(
            out,
            r#"<text class="title" x="{:.2}" y="16" text-anchor="middle">{} {}</text>"#,
            width / 2.0,
            xml_escape(&r.task),
            r.direction.arrow()
        )
        .unwrap();
    }

    writeln!(
        out,
        r#"<line class="y-axis" x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="black"/>"#,
        TOP + PLOT_H
    )
    .unwrap();
    let n_ticks = ((y_max - y_min) / step).round() as usize;
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    for i in 0..=n_ticks {
        let v = y_min + i as f64 * step;
        let y = y_of(v);
        writeln!(
            out,
            r#"<line class="y-tick" x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 4.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.decimals$}</text>"#,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }

    let base = TOP + PLOT_H;
    for (j, &(r, m, h)) in present.iter().enumerate() {
        let x = LEFT + GAP + j as f64 * (BAR_W + GAP);
        let cx = x + BAR_W / 2.0;
        let top = y_of(m);
        let (class, fill) = match r.mark {
            CellMark::Winner => ("bar winner", "#8c6d1f"),
            CellMark::Tie => ("bar tie", "#d9b98a"),
            _ => ("bar", "#a0a0a0"),
        };
        writeln!(
            out,
            r#"<rect class="{class}" data-model="{}" x="{x:.2}" y="{top:.2}" width="{BAR_W:.2}" height="{:.2}" fill="{fill}"/>"#,
            xml_escape(&r.model),
            base - top
        )
        .unwrap();
        if h > 0.0 {
            let (y1, y2) = (y_of(m + h), y_of(m - h));
            writeln!(
                out,
                r#"<line class="whisker" data-model="{}" x1="{cx:.2}" y1="{y1:.2}" x2="{cx:.2}" y2="{y2:.2}" stroke="black"/>"#,
                xml_escape(&r.model)
            )
            .unwrap();
            for y in [y1, y2] {
                writeln!(
                    out,
                    r#"<line class="cap" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
                    cx - 6.0,
                    cx + 6.0
                )
                .unwrap();
            }
        } else {
            writeln!(
                out,
                r#"<line class="whisker-tick" data-model="{}" x1="{:.2}" y1="{top:.2}" x2="{:.2}" y2="{top:.2}" stroke="black"/>"#,
                xml_escape(&r.model),
                cx - 6.0,
                cx + 6.0
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text class="x-label" x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            base + 16.0,
            xml_escape(&r.model)
        )
        .unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MetricDirection;
    use crate::ranking::{find_cliques, CdResult, RankTable};

    fn cd_result(models: &[&str], mean_ranks: &[f64], cd: f64) -> CdResult {
        let k = models.len();
        CdResult {
            models: models.iter().map(|s| s.to_string()).collect(),
            mean_ranks: mean_ranks.to_vec(),
            chi2_friedman: 0.0,
            p_friedman: 1.0,
            k,
            n: 10,
            alpha: 0.05,
            cd,
            cliques: find_cliques(mean_ranks, cd),
            table: RankTable {
                tasks: vec![],
                models: models.iter().map(|s| s.to_string()).collect(),
                ranks: vec![],
            },
        }
    }

    fn attr(tag: &str, name: &str) -> Option<String> {
        let key = format!(" {name}=\"");
        let start = tag.find(&key)? + key.len();
        let end = tag[start..].find('"')? + start;
        Some(tag[start..end].to_owned())
    }

    fn elements<'a>(svg: &'a str, prefix: &str) -> Vec<&'a str> {
        svg.lines().filter(|l| l.starts_with(prefix)).collect()
    }

    #[test]
    fn four_encoder_diagram() {
        let cd = cd_result(
            &["GCN", "GAT", "SAGE", "GT"],
            &[2.40, 2.90, 2.10, 2.60],
            1.4834,
        );
        let svg = render_cd_svg(&cd, &CdStyle::default());
        assert!(svg.contains(">CD_0.05 = 1.48<"));
        let bars = elements(&svg, "<line class=\"clique\"");
        assert_eq!(bars.len(), 1);
        let l = cd_layout(&cd, &CdStyle::default());
        let x1: f64 = attr(bars[0], "x1").unwrap().parse().unwrap();
        let x2: f64 = attr(bars[0], "x2").unwrap().parse().unwrap();
        assert!((x1 - (l.x_of(2.10) - BAR_PAD)).abs() < 0.01);
        assert!((x2 - (l.x_of(2.90) + BAR_PAD)).abs() < 0.01);
        let markers = elements(&svg, "<circle class=\"marker\"");
        assert_eq!(markers.len(), 4);
        for m in markers {
            let name = attr(m, "data-model").unwrap();
            let i = cd.models.iter().position(|n| *n == name).unwrap();
            let cx: f64 = attr(m, "cx").unwrap().parse().unwrap();
            assert!((l.rank_of(cx) - cd.mean_ranks[i]).abs() < 1e-6);
        }
        let ticks = elements(&svg, "<text class=\"tick-label\"");
        assert_eq!(ticks.len(), 4);
        assert!((l.ruler.x2 - l.ruler.x1 - 1.4834 * l.px_per_rank).abs() < 1e-9);
    }

    #[test]
    fn no_cliques_no_bars() {
        let cd = cd_result(&["a", "b", "c"], &[1.0, 2.0, 3.0], 0.5);
        let svg = render_cd_svg(&cd, &CdStyle::default());
        assert!(elements(&svg, "<line class=\"clique\"").is_empty());
        assert_eq!(elements(&svg, "<circle class=\"marker\"").len(), 3);
    }

    #[test]
    fn equal_ranks_are_staggered() {
        let cd = cd_result(&["a", "b"], &[1.5, 1.5], 0.2);
        let l = cd_layout(&cd, &CdStyle::default());
        assert_eq!(l.markers[0].x, l.markers[1].x);
        assert_ne!(l.markers[0].label_y, l.markers[1].label_y);
        assert!(
            (l.markers[0].label_y - l.markers[1].label_y).abs() >= CdStyle::default().font_size
        );
    }

    #[test]
    fn names_are_escaped() {
        let cd = cd_result(&["a<b", "c&d"], &[1.2, 1.8], 1.0);
        let svg = render_cd_svg(&cd, &CdStyle::default());
        assert!(svg.contains("a&lt;b") && svg.contains("c&amp;d"));
        assert!(!svg.contains("a<b"));
    }

    #[test]
    fn multiplier_scales_axis() {
        let cd = cd_result(&["a", "b", "c"], &[1.0, 2.0, 3.0], 0.5);
        let style = CdStyle {
            multiplier: 3.0,
            ..CdStyle::default()
        };
        let l = cd_layout(&cd, &style);
        assert_eq!(l.px_per_rank, 30.0);
        assert_eq!(l.ticks[2].1 - l.ticks[0].1, 60.0);
    }

    fn row(model: &str, mean: f64, h: f64, mark: CellMark) -> SummaryRow {
        SummaryRow {
            task: "t".into(),
            model: model.into(),
            mean: Some(mean),
            halfwidth: Some(h),
            mark,
            direction: MetricDirection::HigherIsBetter,
            rendered: String::new(),
        }
    }

    #[test]
    fn cell_panel_structure() {
        let rows = vec![
            row("a", 0.86, 0.025, CellMark::Tie),
            row("b", 0.83, 0.017, CellMark::Plain),
            row("c", 0.88, 0.0, CellMark::Winner),
            row("d", 0.87, 0.023, CellMark::Tie),
            SummaryRow {
                mean: None,
                halfwidth: None,
                mark: CellMark::Incompatible,
                ..row("e", 0.0, 0.0, CellMark::Plain)
            },
        ];
        let svg = render_cells_svg(&rows);
        assert_eq!(elements(&svg, "<rect class=\"bar").len(), 4);
        assert_eq!(elements(&svg, "<line class=\"whisker\"").len(), 3);
        assert_eq!(elements(&svg, "<line class=\"whisker-tick\"").len(), 1);
        let winners = elements(&svg, "<rect class=\"bar winner\"");
        assert_eq!(winners.len(), 1);
        assert_eq!(attr(winners[0], "data-model").as_deref(), Some("c"));
        assert_eq!(svg, render_cells_svg(&rows));
    }

    #[test]
    fn cell_panel_constant_values() {
        let svg = render_cells_svg(&[row("a", 0.5, 0.0, CellMark::Winner)]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
