//! Output rendering: every command produces JSON (machine-readable,
//! insertion-ordered keys), CSV (fixed column order), or an aligned table.
//!
//! Non-finite numbers become JSON `null` and empty CSV cells.

use serde_json::{json, Map, Value};

use richness::estimators::EstimatorReport;
use richness::montecarlo::Generator;
use richness::montecarlo::{ConfidenceRun, EstimatorStats, ReplicateSummary};
use richness::FrequencyData;

use crate::scenario::Scenario;
use crate::OutputFormat;

/// Bumped whenever a JSON key or CSV column changes meaning or order.
const SCHEMA_VERSION: u64 = 1;

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON output serializes");
    text.push('\n');
    text
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_number(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

fn csv_scalar(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => csv_escape(s),
        other => csv_escape(&other.to_string()),
    }
}

fn table_scalar(value: &Value) -> String {
    match value {
        Value::Null => "-".to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn table_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3}")
    } else {
        "-".to_string()
    }
}

fn generator_label(generator: &Generator) -> String {
    match generator {
        Generator::NormalNormalized { mu, sigma } => {
            format!("normal_normalized(mu={mu}, sigma={sigma})")
        }
        Generator::Uniform01 => "uniform01".to_string(),
        Generator::Exponential1 => "exponential1".to_string(),
        Generator::Gamma { shape } => format!("gamma(shape={shape})"),
    }
}

fn push(map: &mut Map<String, Value>, key: &str, value: Value) {
    map.insert(key.to_string(), value);
}

/// Flatten the single-sample report into one ordered key/value object:
/// sample statistics first, then the estimator family, then the posterior
/// concentration diagnostics.
pub fn flat_report(freq: &FrequencyData, report: &EstimatorReport) -> Value {
    let mut map = Map::new();
    push(&mut map, "schema_version", json!(SCHEMA_VERSION));
    push(&mut map, "sample_size", json!(report.sample_size));
    push(&mut map, "species_observed", json!(report.species_observed));
    push(&mut map, "singletons", json!(report.singletons));
    push(&mut map, "u", json!(freq.unseen_probability()));
    push(&mut map, "v", json!(freq.squared_prob_sum()));
    push(&mut map, "q", json!(freq.count_square_sum()));
    push(&mut map, "coverage", json!(freq.coverage()));
    push(&mut map, "esty_k", json!(report.esty_k));
    push(&mut map, "t_httg", json!(report.t_httg));
    push(&mut map, "t_esty", json!(report.t_esty));
    push(&mut map, "gamma2_chao_lee", json!(report.gamma2_chao_lee));
    push(&mut map, "t_chao_lee", json!(report.t_chao_lee));
    push(&mut map, "gamma2_one", json!(report.gamma2_one));
    push(&mut map, "t_one", json!(report.t_one));
    push(
        &mut map,
        "lambda_second",
        serde_json::to_value(report.lambda_second).expect("lambda serializes"),
    );
    push(&mut map, "t_two", json!(report.t_two));
    push(&mut map, "t_plus_one", json!(report.t_plus_one));
    let solution =
        serde_json::to_value(&report.lambda_solution).expect("lambda solution serializes");
    if let Value::Object(entries) = solution {
        for (key, value) in entries {
            map.insert(key, value);
        }
    }
    push(&mut map, "t_lambda_hat", json!(report.t_lambda_hat));
    push(
        &mut map,
        "t_lambda_hat_rounded",
        json!(report.t_lambda_hat_rounded),
    );
    match &report.t_jackknife {
        Some(jack) => {
            push(&mut map, "t_jackknife", json!(jack.value));
            push(&mut map, "jackknife_order", json!(jack.order));
        }
        None => {
            push(&mut map, "t_jackknife", Value::Null);
            push(&mut map, "jackknife_order", Value::Null);
        }
    }
    Value::Object(map)
}

/// Render a flat key/value object in the requested format.
pub fn flat_output(flat: &Value, format: OutputFormat) -> String {
    let entries = flat.as_object().expect("flat output is an object");
    match format {
        OutputFormat::Json => pretty(flat),
        OutputFormat::Csv => {
            let header: Vec<&str> = entries.keys().map(String::as_str).collect();
            let row: Vec<String> = entries.values().map(csv_scalar).collect();
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
        OutputFormat::Table => {
            let width = entries.keys().map(String::len).max().unwrap_or(0);
            let mut out = String::new();
            for (key, value) in entries {
                out.push_str(&format!("{key:<width$}  {}\n", table_scalar(value)));
            }
            out
        }
    }
}

/// The eight estimator columns in their fixed presentation order.
fn estimator_rows(row: &ReplicateSummary) -> [(&'static str, EstimatorStats); 8] {
    [
        ("t_httg", row.t_httg),
        ("t_esty", row.t_esty),
        ("t_chao_lee", row.t_chao_lee),
        ("t_one", row.t_one),
        ("t_two", row.t_two),
        ("t_plus_one", row.t_plus_one),
        ("t_lambda_hat", row.t_lambda_hat),
        ("t_jackknife", row.t_jackknife),
    ]
}

fn estimator_block(out: &mut String, rows: &[(&'static str, EstimatorStats)]) {
    out.push_str(&format!(
        "  {:<14} {:>12} {:>12} {:>12}\n",
        "estimator", "mean", "sd", "rmse"
    ));
    for (name, stats) in rows {
        out.push_str(&format!(
            "  {:<14} {:>12} {:>12} {:>12}\n",
            name,
            table_number(stats.mean),
            table_number(stats.sd),
            table_number(stats.rmse)
        ));
    }
}

/// Render the replicate-experiment summary, one row per sample size.
pub fn simulate_output(
    label: &str,
    scenario: &Scenario,
    true_gamma2: f64,
    rows: &[ReplicateSummary],
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "simulate",
            "scenario": label,
            "generator": scenario.generator,
            "true_t": scenario.t,
            "true_gamma2": true_gamma2,
            "seed": scenario.seed,
            "rows": rows,
        })),
        OutputFormat::Csv => {
            let mut out = String::from(
                "scenario,true_t,true_gamma2,n,replicates,used_replicates,\
                 degenerate_excluded,estimator,mean,sd,rmse\n",
            );
            for row in rows {
                for (name, stats) in estimator_rows(row) {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{}\n",
                        csv_escape(label),
                        row.true_t,
                        csv_number(true_gamma2),
                        row.sample_size,
                        row.replicates,
                        row.used_replicates,
                        row.degenerate_excluded,
                        name,
                        csv_number(stats.mean),
                        csv_number(stats.sd),
                        csv_number(stats.rmse)
                    ));
                }
            }
            out
        }
        OutputFormat::Table => {
            let mut out = format!(
                "scenario {label}  generator {}  true_t {}  true_gamma2 {:.6}  seed {}\n",
                generator_label(&scenario.generator),
                scenario.t,
                true_gamma2,
                scenario.seed
            );
            for row in rows {
                out.push_str(&format!(
                    "\nn {}  replicates {}  used {}  degenerate_excluded {}\n",
                    row.sample_size, row.replicates, row.used_replicates, row.degenerate_excluded
                ));
                estimator_block(&mut out, &estimator_rows(row));
            }
            out
        }
    }
}

/// Render the confidence-interval coverage experiment.
pub fn ci_output(
    label: &str,
    scenario: &Scenario,
    true_gamma2: f64,
    n: u64,
    run: &ConfidenceRun,
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "ci",
            "scenario": label,
            "generator": scenario.generator,
            "true_t": scenario.t,
            "true_gamma2": true_gamma2,
            "n": n,
            "seed": scenario.seed,
            "level": run.level,
            "bootstrap": run.bootstrap,
            "repeats": run.repeats,
            "evaluated": run.evaluated,
            "hits": run.hits,
            "hit_fraction": run.hit_fraction,
            "mean_width": run.mean_width,
            "unreliable": run.unreliable,
        })),
        OutputFormat::Csv => format!(
            "scenario,true_t,true_gamma2,n,level,bootstrap,repeats,evaluated,hits,\
             hit_fraction,mean_width,unreliable\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_escape(label),
            scenario.t,
            csv_number(true_gamma2),
            n,
            run.level,
            run.bootstrap,
            run.repeats,
            run.evaluated,
            run.hits,
            csv_number(run.hit_fraction),
            csv_number(run.mean_width),
            run.unreliable
        ),
        OutputFormat::Table => {
            let pairs: [(&str, String); 14] = [
                ("scenario", label.to_string()),
                ("generator", generator_label(&scenario.generator)),
                ("true_t", scenario.t.to_string()),
                ("true_gamma2", table_number(true_gamma2)),
                ("n", n.to_string()),
                ("seed", scenario.seed.to_string()),
                ("level", run.level.to_string()),
                ("bootstrap", run.bootstrap.to_string()),
                ("repeats", run.repeats.to_string()),
                ("evaluated", run.evaluated.to_string()),
                ("hits", run.hits.to_string()),
                ("hit_fraction", table_number(run.hit_fraction)),
                ("mean_width", table_number(run.mean_width)),
                ("unreliable", run.unreliable.to_string()),
            ];
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            pairs
                .iter()
                .map(|(key, value)| format!("{key:<width$}  {value}\n"))
                .collect()
        }
    }
}

/// Recompute the error column against an externally supplied truth.
/// Valid because the spread column is the population SD over the same
/// replicates, so error² = spread² + (mean − truth)².
fn rebase(stats: EstimatorStats, truth: f64) -> EstimatorStats {
    let bias = stats.mean - truth;
    EstimatorStats {
        rmse: (stats.sd * stats.sd + bias * bias).sqrt(),
        ..stats
    }
}

/// Render the corpus experiment: replicate draws from one text's letter
/// distribution, with errors measured against `true_t` (which may differ
/// from the distinct-letter count when the caller overrides it).
pub fn corpus_output(
    input: &str,
    distinct: u64,
    true_t: u64,
    true_gamma2: f64,
    seed: u64,
    summary: &ReplicateSummary,
    format: OutputFormat,
) -> String {
    let rows: Vec<(&'static str, EstimatorStats)> = estimator_rows(summary)
        .into_iter()
        .map(|(name, stats)| (name, rebase(stats, true_t as f64)))
        .collect();
    match format {
        OutputFormat::Json => {
            let row_values: Vec<Value> = rows
                .iter()
                .map(|(name, stats)| {
                    json!({
                        "estimator": name,
                        "mean": stats.mean,
                        "sd": stats.sd,
                        "rmse": stats.rmse,
                    })
                })
                .collect();
            pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "corpus",
                "input": input,
                "distinct_letters": distinct,
                "true_t": true_t,
                "true_gamma2": true_gamma2,
                "n": summary.sample_size,
                "replicates": summary.replicates,
                "used_replicates": summary.used_replicates,
                "degenerate_excluded": summary.degenerate_excluded,
                "seed": seed,
                "esty_k": summary.esty_k,
                "rows": row_values,
            }))
        }
        OutputFormat::Csv => {
            let mut out = String::from(
                "input,true_t,distinct_letters,n,replicates,used_replicates,\
                 estimator,mean,sd,rmse\n",
            );
            for (name, stats) in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    csv_escape(input),
                    true_t,
                    distinct,
                    summary.sample_size,
                    summary.replicates,
                    summary.used_replicates,
                    name,
                    csv_number(stats.mean),
                    csv_number(stats.sd),
                    csv_number(stats.rmse)
                ));
            }
            out
        }
        OutputFormat::Table => {
            let mut out = format!(
                "input {input}  distinct_letters {distinct}  true_t {true_t}  \
                 true_gamma2 {:.6}  seed {seed}\n\nn {}  replicates {}  used {}  \
                 degenerate_excluded {}\n",
                true_gamma2,
                summary.sample_size,
                summary.replicates,
                summary.used_replicates,
                summary.degenerate_excluded
            );
            estimator_block(&mut out, &rows);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_report_orders_keys_and_nulls_infinite_lambda() {
        let freq = FrequencyData::from_counts(&[2, 2, 1]).unwrap();
        let report = EstimatorReport::compute(&freq, 2.0).unwrap();
        let flat = flat_report(&freq, &report);
        let keys: Vec<&str> = flat
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        assert_eq!(keys[0], "schema_version");
        let hat = keys.iter().position(|&k| k == "t_lambda_hat").unwrap();
        let branch = keys.iter().position(|&k| k == "lambda_branch").unwrap();
        assert!(branch < hat);
        // This sample sits on the infinite branch: no finite concentration.
        assert_eq!(flat["lambda_hat"], Value::Null);
        assert_eq!(flat["lambda_branch"], json!("infinite"));
        assert_eq!(flat["t_lambda_hat_rounded"], json!(4));
    }

    #[test]
    fn csv_rendering_escapes_and_blanks() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_number(f64::NAN), "");
        assert_eq!(csv_scalar(&Value::Null), "");
        assert_eq!(csv_scalar(&json!(3.5)), "3.5");
    }

    #[test]
    fn rebase_matches_direct_error_computation() {
        // Two replicate values 10 and 14 against truth 9:
        // mean 12, sd 2, rmse over {1, 25} = sqrt(13).
        let stats = EstimatorStats {
            mean: 12.0,
            sd: 2.0,
            rmse: f64::NAN,
        };
        let rebased = rebase(stats, 9.0);
        assert!((rebased.rmse - 13.0_f64.sqrt()).abs() < 1e-12);
        assert_eq!(rebased.mean, 12.0);
        assert_eq!(rebased.sd, 2.0);
    }
}
