use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::format::format_p;
use super::{mark_cells, pairwise_table, BenchmarkReport, CellMark};
use crate::model::{MetricDirection, PairwiseMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatexTable {
    /// Task x model grid of `mean ± h`.
    Summary,
    /// One block per task with its `C(k, 2)` comparisons.
    Pairwise(PairwiseMethod),
}

/// Cell decoration. A macro name `foo` wraps the cell as `\foo{...}`;
/// without one, winners (and significant p-values) are bold and ties plain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatexOptions {
    #[serde(default)]
    pub winner_macro: Option<String>,
    #[serde(default)]
    pub tie_macro: Option<String>,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str(r"\textbackslash{}"),
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(ch);
            }
            '~' => out.push_str(r"\textasciitilde{}"),
            '^' => out.push_str(r"\textasciicircum{}"),
            _ => out.push(ch),
        }
    }
    out
}

fn strong(body: &str, opts: &LatexOptions) -> String {
    match &opts.winner_macro {
        Some(m) => format!("\\{m}{{{body}}}"),
        None => format!("\\textbf{{{body}}}"),
    }
}

fn weak(body: &str, opts: &LatexOptions) -> String {
    match &opts.tie_macro {
        Some(m) => format!("\\{m}{{{body}}}"),
        None => body.to_owned(),
    }
}

fn arrow(d: MetricDirection) -> &'static str {
    match d {
        MetricDirection::HigherIsBetter => r"$\uparrow$",
        MetricDirection::LowerIsBetter => r"$\downarrow$",
    }
}

pub fn to_latex(report: &BenchmarkReport, which: LatexTable, opts: &LatexOptions) -> String {
    match which {
        LatexTable::Summary => summary(report, opts),
        LatexTable::Pairwise(method) => pairwise(report, method, opts),
    }
}

fn summary(report: &BenchmarkReport, opts: &LatexOptions) -> String {
    let models = report.tensor.models();
    let mut out = String::new();
    writeln!(
        out,
        "\\begin{{tabular}}{{llll{}}}",
        "c".repeat(models.len())
    )
    .unwrap();
    out.push_str("\\toprule\n");
    out.push_str("Category & Task & Kind & Metric");
    for m in models {
        write!(out, " & {}", escape(m)).unwrap();
    }
    out.push_str(" \\\\\n\\midrule\n");
    for task in report.tensor.tasks() {
        let marks = mark_cells(report, &task.name).expect("task from the report's own tensor");
        write!(
            out,
            "{} & {} & {} & {}\\,{}",
            escape(&task.category),
            escape(&task.name),
            escape(task.task_type.as_str()),
            escape(&task.metric_name),
            arrow(task.direction)
        )
        .unwrap();
        for (model, mark) in models.iter().zip(&marks.marks) {
            let cell = match (mark, report.cell(&task.name, model)) {
                (CellMark::Incompatible, _) | (_, None) => r"\textit{n/a}".to_owned(),
                (mark, Some(c)) => {
                    let body = format!("${:.3}_{{\\pm {:.3}}}$", c.mean, c.halfwidth);
                    match mark {
                        CellMark::Winner => strong(&body, opts),
                        CellMark::Tie => weak(&body, opts),
                        _ => body,
                    }
                }
            };
            write!(out, " & {cell}").unwrap();
        }
        out.push_str(" \\\\\n");
    }
    out.push_str("\\bottomrule\n\\end{tabular}\n");
    out
}

fn pairwise(report: &BenchmarkReport, method: PairwiseMethod, opts: &LatexOptions) -> String {
    let rows = pairwise_table(report, method);
    let mut cols = String::from("llc");
    let mut header = String::from(r"Task & Comparison & $\Delta\mu$");
    if method.includes_t() {
        cols.push('c');
        header.push_str(r" & $p_{\text{Holm}}^{\,t}$");
    }
    if method.includes_wilcoxon() {
        cols.push('c');
        header.push_str(r" & $p_{\text{Holm}}^{\,W}$");
    }
    if method == PairwiseMethod::Both {
        cols.push('c');
        header.push_str(" & Agree");
    }

    let mut out = String::new();
    writeln!(out, "\\begin{{tabular}}{{{cols}}}").unwrap();
    out.push_str("\\toprule\n");
    writeln!(out, "{header} \\\\").unwrap();

    let p_cell = |p: Option<f64>, sig: Option<bool>| -> Option<String> {
        let (p, sig) = (p?, sig?);
        let text = format_p(p);
        Some(if sig {
            strong(&text, opts)
        } else {
            weak(&text, opts)
        })
    };

    for tp in &report.pairwise {
        let block: Vec<_> = rows.iter().filter(|r| r.task == tp.task).collect();
        if block.is_empty() {
            continue;
        }
        out.push_str("\\midrule\n");
        for (i, r) in block.iter().enumerate() {
            if i == 0 {
                write!(
                    out,
                    "\\multirow{{{}}}{{*}}{{\\textbf{{{}}}}}",
                    block.len(),
                    escape(&r.task)
                )
                .unwrap();
            }
            write!(
                out,
                " & {} \\textsc{{vs.}} {} & ${:+.3}$",
                escape(&r.model_a),
                escape(&r.model_b),
                r.delta_mu
            )
            .unwrap();
            for cell in [
                p_cell(r.p_holm_t, r.significant_t),
                p_cell(r.p_holm_w, r.significant_w),
            ]
            .into_iter()
            .flatten()
            {
                write!(out, " & {cell}").unwrap();
            }
            if let Some(agree) = r.agree {
                out.push_str(if agree {
                    r" & \checkmark"
                } else {
                    r" & $\times$"
                });
            }
            out.push_str(" \\\\\n");
        }
    }
    out.push_str("\\bottomrule\n\\end{tabular}\n");
    out
}
