//! Static, self-contained HTML report with inline SVG bar charts.
//!
//! The bundle is a single `index.html` with no external assets and no
//! scripts; generation is a pure function of its inputs, so identical
//! inputs produce byte-identical output. Every number shown in the HTML
//! is also present, verbatim, in the accompanying JSON export.

use std::path::Path;

use crate::error::{Error, Result};
use crate::jsonfmt::{html_escape, json_escape, score_string};
use crate::kpi::KpiRecord;
use crate::readiness::{ReadinessReport, SensorCategory};
use crate::score::DtiScore;

/// Bar length in pixels at 100%.
pub const CHART_FULL_WIDTH: u32 = 300;

/// Everything the report shows.
pub struct ReportInputs<'a> {
    pub kpis: &'a [KpiRecord],
    /// (org_id, score) rows; any order, the report ranks them itself.
    pub dti: &'a [(String, DtiScore)],
    pub readiness: Option<&'a ReadinessReport>,
}

/// Renders the bundle into `out_dir`: `index.html` plus `report.json`
/// holding the same numbers.
pub fn render_report(inputs: &ReportInputs<'_>, out_dir: impl AsRef<Path>) -> Result<()> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let html_path = out_dir.join("index.html");
    std::fs::write(&html_path, render_html(inputs)).map_err(|e| Error::io(&html_path, e))?;
    let json_path = out_dir.join("report.json");
    std::fs::write(&json_path, render_json(inputs)).map_err(|e| Error::io(&json_path, e))?;
    Ok(())
}

/// Descending ranking; ties broken by org id so the order is total.
fn ranked(dti: &[(String, DtiScore)]) -> Vec<&(String, DtiScore)> {
    let mut rows: Vec<&(String, DtiScore)> = dti.iter().collect();
    rows.sort_by(|a, b| b.1.value.total_cmp(&a.1.value).then_with(|| a.0.cmp(&b.0)));
    rows
}

/// Bar width in pixels for a percentage, rounded to the nearest pixel.
pub fn bar_width(percentage: f64) -> u32 {
    (percentage / 100.0 * f64::from(CHART_FULL_WIDTH)).round() as u32
}

pub fn render_html(inputs: &ReportInputs<'_>) -> String {
    let mut html = String::new();
    html.push_str("<!doctype html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>Digital Transformation Report</title>\n<style>\n");
    html.push_str(
        "body{font-family:system-ui,sans-serif;margin:2rem auto;max-width:60rem;color:#222}\n\
         h1{border-bottom:2px solid #888}\n\
         h2{margin-top:2rem}\n\
         table{border-collapse:collapse;margin:1rem 0}\n\
         th,td{border:1px solid #bbb;padding:0.25rem 0.6rem;text-align:left}\n\
         th{background:#eee}\n\
         td.num{text-align:right;font-variant-numeric:tabular-nums}\n\
         .bar{fill:#4472a8}\n\
         .rail{fill:#e4e4e4}\n\
         .note{color:#555;font-style:italic}\n",
    );
    html.push_str("</style>\n</head>\n<body>\n<h1>Digital Transformation Report</h1>\n");

    render_dti_section(&mut html, inputs.dti);
    render_kpi_section(&mut html, inputs.kpis);
    if let Some(readiness) = inputs.readiness {
        render_readiness_section(&mut html, readiness);
    }
    html.push_str("</body>\n</html>\n");
    html
}

fn render_dti_section(html: &mut String, dti: &[(String, DtiScore)]) {
    html.push_str("<h2>Index ranking</h2>\n");
    if dti.is_empty() {
        html.push_str("<p class=\"note\">No index scores available.</p>\n");
        return;
    }
    html.push_str("<table>\n<tr><th>rank</th><th>organization</th><th>DTI</th></tr>\n");
    for (rank, (org, score)) in ranked(dti).iter().enumerate() {
        html.push_str(&format!(
            "<tr><td class=\"num\">{}</td><td>{}</td><td class=\"num\">{}</td></tr>\n",
            rank + 1,
            html_escape(org),
            score_string(score.value)
        ));
    }
    html.push_str("</table>\n");

    // per-dimension score table, dimension order from the score rows
    let dims: Vec<String> = dti[0].1.dimension_scores.keys().cloned().collect();
    html.push_str("<h2>Dimension scores</h2>\n<table>\n<tr><th>organization</th>");
    for dim in &dims {
        html.push_str(&format!("<th>{}</th>", html_escape(dim)));
    }
    html.push_str("</tr>\n");
    for (org, score) in ranked(dti) {
        html.push_str(&format!("<tr><td>{}</td>", html_escape(org)));
        for dim in &dims {
            let s = score.dimension_scores.get(dim).copied().unwrap_or(0.0);
            html.push_str(&format!("<td class=\"num\">{}</td>", score_string(s)));
        }
        html.push_str("</tr>\n");
    }
    html.push_str("</table>\n");
}

fn render_kpi_section(html: &mut String, kpis: &[KpiRecord]) {
    html.push_str("<h2>Key performance indicators</h2>\n");
    if kpis.is_empty() {
        html.push_str("<p class=\"note\">No KPIs configured.</p>\n");
        return;
    }
    // group headers in first-appearance order
    let mut groups: Vec<&str> = Vec::new();
    for kpi in kpis {
        if !groups.contains(&kpi.group.as_str()) {
            groups.push(&kpi.group);
        }
    }
    for group in groups {
        let title = if group.is_empty() { "General" } else { group };
        html.push_str(&format!("<h3>{}</h3>\n<table>\n", html_escape(title)));
        html.push_str("<tr><th>indicator</th><th>share</th><th>count</th><th>%</th></tr>\n");
        for kpi in kpis.iter().filter(|k| k.group == group) {
            let pct = kpi.percentage_string();
            let width = bar_width(kpi.percentage);
            html.push_str(&format!(
                "<tr><td>{}</td><td><svg width=\"{rail}\" height=\"14\" role=\"img\" aria-label=\"{pct} percent\">\
<rect class=\"rail\" width=\"{rail}\" height=\"14\"></rect>\
<rect class=\"bar\" width=\"{width}\" height=\"14\"></rect></svg></td>\
<td class=\"num\">{}/{}</td><td class=\"num\">{pct}</td></tr>\n",
                html_escape(&kpi.name),
                kpi.numerator,
                kpi.denominator,
                rail = CHART_FULL_WIDTH,
            ));
        }
        html.push_str("</table>\n");
    }
}

fn render_readiness_section(html: &mut String, readiness: &ReadinessReport) {
    html.push_str("<h2>Sensor readiness</h2>\n");
    html.push_str(&format!(
        "<p class=\"note\">{}</p>\n",
        html_escape(&readiness.caveat)
    ));
    html.push_str("<table>\n<tr><th>category</th><th>dataset mean</th><th></th></tr>\n");
    for category in SensorCategory::ALL {
        let mean = readiness.dataset_means.get(&category).copied().unwrap_or(0.0);
        let width = bar_width(mean);
        html.push_str(&format!(
            "<tr><td>{}</td><td class=\"num\">{}</td>\
<td><svg width=\"{rail}\" height=\"14\" role=\"img\" aria-label=\"score {val}\">\
<rect class=\"rail\" width=\"{rail}\" height=\"14\"></rect>\
<rect class=\"bar\" width=\"{width}\" height=\"14\"></rect></svg></td></tr>\n",
            html_escape(category.display_name()),
            score_string(mean),
            rail = CHART_FULL_WIDTH,
            val = score_string(mean),
        ));
    }
    html.push_str("</table>\n");

    let worst = readiness.gaps.iter().take(10).collect::<Vec<_>>();
    if !worst.is_empty() {
        html.push_str("<h3>Largest gaps</h3>\n<table>\n<tr><th>organization</th><th>category</th><th>score</th></tr>\n");
        for gap in worst {
            html.push_str(&format!(
                "<tr><td>{}</td><td>{}</td><td class=\"num\">{}</td></tr>\n",
                html_escape(&gap.org_id),
                html_escape(gap.category.display_name()),
                score_string(gap.score)
            ));
        }
        html.push_str("</table>\n");
    }
}

/// The JSON twin of the HTML report, written with the same number
/// formatting helpers so each HTML figure appears verbatim here.
pub fn render_json(inputs: &ReportInputs<'_>) -> String {
    let mut out = String::from("{\n");

    out.push_str("  \"dti_ranking\": [\n");
    let rows = ranked(inputs.dti);
    for (i, (org, score)) in rows.iter().enumerate() {
        let dims = score
            .dimension_scores
            .iter()
            .map(|(dim, s)| format!("\"{}\": {}", json_escape(dim), score_string(*s)))
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!(
            "    {{\"rank\": {}, \"org_id\": \"{}\", \"dti\": {}, \"dimension_scores\": {{{dims}}}}}",
            i + 1,
            json_escape(org),
            score_string(score.value)
        ));
        out.push_str(if i + 1 < rows.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");

    out.push_str("  \"kpis\": ");
    out.push_str(&indent_block(&crate::kpi::kpi_json_string(inputs.kpis), 2));
    out.push(',');
    out.push('\n');

    out.push_str("  \"readiness\": ");
    match inputs.readiness {
        Some(r) => out.push_str(&indent_block(
            &crate::readiness::readiness_json_string(r),
            2,
        )),
        None => out.push_str("null"),
    }
    out.push_str("\n}\n");
    out
}

/// Re-indents an embedded pretty JSON block (already newline-terminated).
fn indent_block(block: &str, spaces: usize) -> String {
    let pad = " ".repeat(spaces);
    block
        .trim_end()
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 0 {
                line.to_string()
            } else {
                format!("{pad}{line}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}
