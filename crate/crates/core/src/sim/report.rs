//! Serialization of Monte Carlo reports: a summary table, the per-run
//! dispersion samples, and a metadata document echoing the full
//! configuration. Floats use shortest round-trip formatting, so equal
//! reports serialize to identical bytes.

use crate::error::Result;
use crate::sim::runner::MonteCarloReport;

/// Aggregated coverage/rejection table as CSV text.
pub fn summary_csv(report: &MonteCarloReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario",
        "contrast",
        "a_h",
        "size",
        "method",
        "construction",
        "alpha",
        "statistic",
        "value",
        "mc_se",
        "runs_used",
        "runs_failed",
        "mean_point",
        "sd_point",
        "mean_se",
        "degenerate_replicates",
    ])?;
    for row in &report.rows {
        w.write_record([
            row.scenario.to_string(),
            row.contrast.to_string(),
            row.a_h.to_string(),
            row.size.clone(),
            row.method.to_string(),
            row.construction.to_string(),
            row.alpha.to_string(),
            row.statistic.to_string(),
            row.value.to_string(),
            row.mc_se.to_string(),
            row.runs_used.to_string(),
            row.runs_failed.to_string(),
            row.mean_point.to_string(),
            row.sd_point.to_string(),
            row.mean_se.to_string(),
            row.degenerate_replicates.to_string(),
        ])?;
    }
    let bytes = w.into_inner().expect("csv writer over Vec cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Per-run point estimates and standard errors as CSV text.
pub fn se_samples_csv(report: &MonteCarloReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["run", "method", "point", "se"])?;
    for s in &report.se_samples {
        w.write_record([
            s.run.to_string(),
            s.method.to_string(),
            s.point.to_string(),
            s.se.to_string(),
        ])?;
    }
    let bytes = w.into_inner().expect("csv writer over Vec cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Configuration echo and census targets, for provenance next to the
/// tables. `tool_version` names the producing binary or library version.
pub fn meta_json(report: &MonteCarloReport, tool_version: &str) -> serde_json::Value {
    serde_json::json!({
        "tool_version": tool_version,
        "scenario": report.scenario,
        "contrast": report.contrast.as_str(),
        "a_h": report.a_h,
        "size": report.size.to_string(),
        "seed": report.seed,
        "bootstrap_replicates": report.b,
        "runs_requested": report.runs_requested,
        "runs_used": report.runs_used,
        "runs_failed": report.runs_failed,
        "alphas": report.alphas,
        "auc_pop": report.auc_pop,
        "expected_auc_pop": report.expected_auc_pop,
        "d_pop": report.d_pop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicate::Method;
    use crate::sim::runner::{SeSample, SummaryRow};
    use crate::sim::scenario::{Contrast, SampleSize};

    fn toy_report() -> MonteCarloReport {
        MonteCarloReport {
            scenario: 1,
            contrast: Contrast::Ci,
            a_h: 2,
            size: SampleSize::N1,
            seed: 7,
            b: 100,
            runs_requested: 10,
            runs_used: 10,
            runs_failed: 0,
            alphas: vec![0.05],
            auc_pop: vec![0.795125],
            expected_auc_pop: vec![0.7951],
            d_pop: None,
            rows: vec![SummaryRow {
                scenario: 1,
                contrast: Contrast::Ci,
                a_h: 2,
                size: "n1".into(),
                method: Method::Jkn,
                construction: "normal",
                alpha: 0.05,
                statistic: "coverage",
                value: 0.9,
                mc_se: 0.09486832980505137,
                runs_used: 10,
                runs_failed: 0,
                mean_point: 0.81,
                sd_point: 0.02,
                mean_se: 0.021,
                degenerate_replicates: 0,
            }],
            se_samples: vec![SeSample {
                run: 0,
                method: Method::Jkn,
                point: 0.8,
                se: 0.02,
            }],
        }
    }

    #[test]
    fn summary_csv_round_trips_floats() {
        let text = summary_csv(&toy_report()).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("scenario,contrast,a_h"));
        let row = lines.next().unwrap();
        assert!(row.contains("jkn,normal,0.05,coverage,0.9,0.09486832980505137"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn se_samples_csv_has_one_row_per_sample() {
        let text = se_samples_csv(&toy_report()).unwrap();
        assert_eq!(text, "run,method,point,se\n0,jkn,0.8,0.02\n");
    }

    #[test]
    fn meta_json_echoes_configuration() {
        let value = meta_json(&toy_report(), "1.2.3");
        assert_eq!(value["tool_version"], "1.2.3");
        assert_eq!(value["seed"], 7);
        assert_eq!(value["contrast"], "ci");
        assert_eq!(value["d_pop"], serde_json::Value::Null);
        assert_eq!(value["auc_pop"][0], 0.795125);
    }
}
