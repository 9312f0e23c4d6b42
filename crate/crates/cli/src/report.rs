use vne_core::simulator::SimSummary;

type Metric = (&'static str, fn(&SimSummary) -> String);

/// One column per summary, one row per metric, columns right-aligned.
pub fn render(rows: &[(String, SimSummary)]) -> String {
    let metrics: [Metric; 12] = [
        ("solver", |s| s.solver.clone()),
        ("seed", |s| s.seed.to_string()),
        ("horizon", |s| format!("{:.1}", s.horizon)),
        ("requests", |s| format!("{}/{}", s.accepted, s.requests)),
        ("avg revenue", |s| format!("{:.3}", s.long_term_avg_revenue)),
        ("avg cost", |s| format!("{:.3}", s.long_term_avg_cost)),
        ("acceptance", |s| format!("{:.4}", s.acceptance_ratio)),
        ("cpu acceptance", |s| {
            format!("{:.4}", s.cpu_acceptance_ratio)
        }),
        ("bw acceptance", |s| format!("{:.4}", s.bw_acceptance_ratio)),
        ("revenue/cost", |s| format!("{:.4}", s.revenue_cost_ratio)),
        ("avg fragmentation", |s| {
            format!("{:.4}", s.long_term_avg_snf)
        }),
        ("solve time ms", |s| {
            s.mean_solve_time_ms
                .map_or("-".into(), |t| format!("{t:.3}"))
        }),
    ];
    let mut table: Vec<Vec<String>> = vec![std::iter::once("metric".to_string())
        .chain(rows.iter().map(|(name, _)| name.clone()))
        .collect()];
    for (label, f) in metrics {
        table.push(
            std::iter::once(label.to_string())
                .chain(rows.iter().map(|(_, s)| f(s)))
                .collect(),
        );
    }
    let widths: Vec<usize> = (0..=rows.len())
        .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
