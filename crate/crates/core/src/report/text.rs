use std::fmt::Write;

use super::format::{format_cell, format_delta, format_p};
use super::{mark_cells, pairwise_table, BenchmarkReport, CellMark};
use crate::model::PairwiseMethod;
use crate::ranking::CdResult;

fn pad_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Task x model grid. `*` marks the winner, `~` a CI overlap with it.
pub fn summary_text(report: &BenchmarkReport) -> String {
    let mut rows = vec![{
        let mut h = vec!["task".to_owned(), "metric".to_owned()];
        h.extend(report.tensor.models().iter().cloned());
        h
    }];
    for task in report.tensor.tasks() {
        let marks = mark_cells(report, &task.name).expect("task from the report's own tensor");
        let mut row = vec![
            task.name.clone(),
            format!("{} {}", task.metric_name, task.direction.arrow()),
        ];
        for (model, mark) in report.tensor.models().iter().zip(&marks.marks) {
            row.push(match report.cell(&task.name, model) {
                None => "n/a".to_owned(),
                Some(c) => {
                    let tag = match mark {
                        CellMark::Winner => "*",
                        CellMark::Tie => "~",
                        _ => "",
                    };
                    format!("{}{tag}", format_cell(c.mean, c.halfwidth))
                }
            });
        }
        rows.push(row);
    }
    pad_table(&rows)
}

pub fn pairwise_text(report: &BenchmarkReport, method: PairwiseMethod) -> String {
    let mut header = vec![
        "task".to_owned(),
        "comparison".to_owned(),
        "delta_mu".to_owned(),
    ];
    if method.includes_t() {
        header.push("p_holm_t".into());
    }
    if method.includes_wilcoxon() {
        header.push("p_holm_w".into());
    }
    if method == PairwiseMethod::Both {
        header.push("agree".into());
    }
    let mut rows = vec![header];
    for r in pairwise_table(report, method) {
        let mut row = vec![
            r.task.clone(),
            format!("{} vs {}", r.model_a, r.model_b),
            format_delta(r.delta_mu),
        ];
        for (p, sig) in [(r.p_holm_t, r.significant_t), (r.p_holm_w, r.significant_w)] {
            if let (Some(p), Some(sig)) = (p, sig) {
                row.push(format!("{}{}", format_p(p), if sig { "*" } else { "" }));
            }
        }
        if let Some(a) = r.agree {
            row.push(if a { "yes" } else { "no" }.into());
        }
        rows.push(row);
    }
    pad_table(&rows)
}

pub fn cd_text(cd: &CdResult) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "Friedman chi2({}) = {:.2} (p = {}), N = {} tasks, k = {} models",
        cd.k - 1,
        cd.chi2_friedman,
        format_p(cd.p_friedman),
        cd.n,
        cd.k
    )
    .unwrap();
    writeln!(out, "Nemenyi CD_{} = {:.2}", cd.alpha, cd.cd).unwrap();
    let mut order: Vec<usize> = (0..cd.models.len()).collect();
    order.sort_by(|&a, &b| cd.mean_ranks[a].total_cmp(&cd.mean_ranks[b]));
    let rows: Vec<Vec<String>> = order
        .iter()
        .map(|&i| {
            vec![
                format!("  {}", cd.models[i]),
                format!("{:.2}", cd.mean_ranks[i]),
            ]
        })
        .collect();
    out.push_str(&pad_table(&rows));
    for c in &cd.cliques {
        let names: Vec<&str> = c.members.iter().map(|&i| cd.models[i].as_str()).collect();
        writeln!(
            out,
            "clique [{:.2}, {:.2}]: {}",
            c.lo_rank,
            c.hi_rank,
            names.join(", ")
        )
        .unwrap();
    }
    out
}
