//! Run configurations and subcommand implementations for the `ofdi` binary.
//!
//! Every command is driven by a single JSON document with one block per
//! concern (probability curves, market, panel, estimation) plus a seed and a
//! replication count. Data goes to files under the output directory, the
//! human summary to standard output, diagnostics to standard error; reruns
//! with the same config are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::did::{
    aggregate_probability, estimate_did, event_study, ControlLevel, DidResult, DidSpec,
    EventStudyResult,
};
use crate::error::{Error, Result};
use crate::market::{policy_experiment, MarketConfig, PolicyOutcome};
use crate::model::{ofdi_probability, FirmTechnology, InputCosts, ModelParams, Preferences};
use crate::numerics::{derive_seed, CovarianceMode, ParetoDist};
use crate::panel::{export_csv, import_csv, simulate_panel, PanelConfig, PanelData};

/// Parameters of the investment-probability curves: P(δ) for a list of input
/// intensities on a δ grid. The probability does not depend on the demand
/// shifter or the Pareto scale, so those are fixed internally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveConfig {
    pub rho: f64,
    pub pareto_shape: f64,
    pub foreign_cost: f64,
    pub fixed_cost: f64,
    pub ofdi_fixed_cost: f64,
    pub etas: Vec<f64>,
    pub delta_min: f64,
    pub delta_max: f64,
    pub grid_points: usize,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            rho: 0.5,
            pareto_shape: 2.0,
            foreign_cost: 2.0,
            fixed_cost: 1.0,
            ofdi_fixed_cost: 1.0,
            etas: vec![1.0, 2.0, 10.0],
            delta_min: 0.0,
            delta_max: 6.0,
            grid_points: 601,
        }
    }
}

impl CurveConfig {
    pub fn model_params(&self, eta: f64, delta: f64) -> Result<ModelParams> {
        ModelParams::new(
            Preferences::new(self.rho, 1.0)?,
            ParetoDist::new(1.0, self.pareto_shape)?,
            InputCosts::new(delta, self.foreign_cost)?,
            FirmTechnology::new(eta, self.fixed_cost, self.ofdi_fixed_cost)?,
        )
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points.max(2);
        (0..n)
            .map(|i| {
                self.delta_min + (i as f64 * (self.delta_max - self.delta_min)) / (n as f64 - 1.0)
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.etas.is_empty() {
            return Err(Error::Config(
                "curve config needs at least one eta".to_string(),
            ));
        }
        if !(self.delta_min < self.delta_max) || self.grid_points < 2 {
            return Err(Error::Config(
                "curve grid must span an increasing range".to_string(),
            ));
        }
        self.model_params(self.etas[0], self.foreign_cost)?;
        Ok(())
    }
}

/// Monte Carlo validation study settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidateOptions {
    /// Also run the event study and its pre-policy test per replication.
    pub run_event_study: bool,
    /// Base year for the event study (first sample year when absent).
    pub base_year: Option<i32>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            run_event_study: true,
            base_year: None,
        }
    }
}

/// One JSON document per run; blocks are read by the commands that need them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed; overrides the panel block's seed when present.
    pub seed: Option<u64>,
    /// Replication count for the validation study.
    pub reps: Option<usize>,
    pub figure4: Option<CurveConfig>,
    pub market: Option<MarketConfig>,
    pub panel: Option<PanelConfig>,
    pub did: Option<DidSpec>,
    /// Covariance override for the aggregate-level estimator
    /// (defaults to Bartlett HAC).
    pub aggregate_covariance: Option<CovarianceMode>,
    /// Input panel for `estimate` / `event-study`.
    pub panel_csv: Option<PathBuf>,
    pub validate: Option<ValidateOptions>,
}

impl RunConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn resolved_panel(&self) -> Result<PanelConfig> {
        let mut cfg = self
            .panel
            .clone()
            .ok_or_else(|| Error::Config("this command needs a `panel` block".to_string()))?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn did_spec(&self) -> Result<DidSpec> {
        self.did
            .clone()
            .ok_or_else(|| Error::Config("this command needs a `did` block".to_string()))
    }
}

/// Written artifacts plus a human-readable summary.
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn ensure_dir(out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Emit the investment-probability curves as `figure4.csv`
/// (columns: eta, delta, probability).
pub fn cmd_figure4(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let curve = config.figure4.clone().unwrap_or_default();
    curve.validate()?;
    ensure_dir(out_dir)?;
    let path = out_dir.join("figure4.csv");
    let mut body = String::from("eta,delta,probability\n");
    let grid = curve.grid();
    for &eta in &curve.etas {
        for &delta in &grid {
            let p = ofdi_probability(&curve.model_params(eta, delta)?);
            body.push_str(&format!("{eta},{delta},{p}\n"));
        }
    }
    fs::write(&path, body)?;
    let summary = format!(
        "wrote {} probability rows ({} etas x {} grid points) to {}",
        curve.etas.len() * grid.len(),
        curve.etas.len(),
        grid.len(),
        path.display()
    );
    Ok(CommandOutput {
        files: vec![path],
        summary,
    })
}

/// Run the ban experiment on the configured market; writes `equilibrium.json`.
pub fn cmd_equilibrium(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let market = config
        .market
        .clone()
        .ok_or_else(|| Error::Config("this command needs a `market` block".to_string()))?;
    let outcome: PolicyOutcome = policy_experiment(&market)?;
    ensure_dir(out_dir)?;
    let path = out_dir.join("equilibrium.json");
    write_json(&path, &outcome)?;
    let summary = format!(
        "{:?}: cost {:.6} -> {:.6}, investment probability {:.6} -> {:.6} (delta {:.6})",
        outcome.regime,
        outcome.before.delta_star,
        outcome.after.delta_star,
        outcome.before.p_ofdi,
        outcome.after.p_ofdi,
        outcome.delta_p_ofdi
    );
    Ok(CommandOutput {
        files: vec![path],
        summary,
    })
}

/// Simulate a panel; writes `panel.csv` and `panel_meta.json`.
pub fn cmd_simulate(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let panel_cfg = config.resolved_panel()?;
    let panel = simulate_panel(&panel_cfg)?;
    ensure_dir(out_dir)?;
    let csv_path = out_dir.join("panel.csv");
    export_csv(&panel, &csv_path)?;
    let meta_path = out_dir.join("panel_meta.json");
    write_json(&meta_path, &panel.metadata)?;
    let meta = panel
        .metadata
        .as_ref()
        .expect("simulated panels carry metadata");
    let summary = format!(
        "simulated {} rows ({} treated / {} control firms, {} adopters) into {}",
        panel.rows.len(),
        meta.realized_n_treated,
        meta.realized_n_control,
        meta.realized_adopters,
        csv_path.display()
    );
    Ok(CommandOutput {
        files: vec![csv_path, meta_path],
        summary,
    })
}

fn load_input_panel(config: &RunConfig) -> Result<PanelData> {
    let path = config.panel_csv.as_ref().ok_or_else(|| {
        Error::Config("this command needs `panel_csv` pointing at a panel".to_string())
    })?;
    import_csv(path)
}

/// Labelled per-level firm estimates plus the aggregate run.
#[derive(Debug, Serialize)]
struct EstimateReport<'a> {
    firm_levels: Vec<LabelledResult>,
    aggregate_levels: Vec<LabelledResult>,
    aggregate_cells: &'a [crate::did::AggregateCell],
}

#[derive(Debug, Serialize)]
struct LabelledResult {
    control_level: String,
    result: DidResult,
}

/// Estimate the treatment effect on an input panel across all build-up
/// control levels, at the firm and the aggregate level. Writes
/// `estimates.json`, `table_firm.txt`, and `table_aggregate.txt`.
pub fn cmd_estimate(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let panel = load_input_panel(config)?;
    let base_spec = config.did_spec()?;
    ensure_dir(out_dir)?;

    let mut firm_levels = Vec::new();
    let mut aggregate_levels = Vec::new();
    for level in ControlLevel::ALL {
        let mut spec = base_spec.clone();
        spec.control_level = level;
        let result = estimate_did(&panel, &spec)?;
        firm_levels.push(LabelledResult {
            control_level: level.label().to_string(),
            result,
        });

        let mut agg_spec = spec.clone();
        agg_spec.pretrend = None;
        agg_spec.covariance = config
            .aggregate_covariance
            .unwrap_or(CovarianceMode::HacBartlett { bandwidth: None });
        let result = crate::did::estimate_aggregate(&panel, &agg_spec)?;
        aggregate_levels.push(LabelledResult {
            control_level: level.label().to_string(),
            result,
        });
    }

    let cells = aggregate_probability(&panel)?;
    let json_path = out_dir.join("estimates.json");
    write_json(
        &json_path,
        &EstimateReport {
            firm_levels,
            aggregate_levels,
            aggregate_cells: &cells,
        },
    )?;
    // Re-read for table rendering to keep one source of truth.
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json_path)?)?;

    let firm_table = render_table(&report["firm_levels"])?;
    let firm_path = out_dir.join("table_firm.txt");
    fs::write(&firm_path, &firm_table)?;
    let agg_table = render_table(&report["aggregate_levels"])?;
    let agg_path = out_dir.join("table_aggregate.txt");
    fs::write(&agg_path, &agg_table)?;

    let headline = &report["firm_levels"][0]["result"];
    let summary = format!(
        "treatment effect {:.4} (robust se {:.4}) on {} observations; tables in {}",
        headline["treatment_effect"].as_f64().unwrap_or(f64::NAN),
        headline["treatment_effect_se"].as_f64().unwrap_or(f64::NAN),
        headline["n_obs"],
        out_dir.display()
    );
    Ok(CommandOutput {
        files: vec![json_path, firm_path, agg_path],
        summary,
    })
}

fn stars(estimate: f64, se: f64) -> &'static str {
    if se <= 0.0 {
        return "";
    }
    let t = (estimate / se).abs();
    if t > 2.576 {
        "***"
    } else if t > 1.96 {
        "**"
    } else if t > 1.645 {
        "*"
    } else {
        ""
    }
}

/// Plain-text build-up table: one column per control level, coefficient rows
/// with robust standard errors in parentheses, partialled-out columns marked.
fn render_table(levels: &serde_json::Value) -> Result<String> {
    let levels = levels
        .as_array()
        .ok_or_else(|| Error::Config("malformed estimate report".to_string()))?;
    let mut row_names: Vec<String> = vec!["post".to_string(), "post_x_treated".to_string()];
    for level in levels {
        if let Some(controls) = level["result"]["controls"].as_array() {
            for c in controls {
                let name = c["name"].as_str().unwrap_or_default().to_string();
                if !row_names.contains(&name) {
                    row_names.push(name);
                }
            }
        }
    }

    let width = 20usize;
    let mut out = String::new();
    out.push_str(&format!("{:26}", ""));
    for (i, _) in levels.iter().enumerate() {
        out.push_str(&format!("{:>width$}", format!("[{}]", i + 1)));
    }
    out.push('\n');

    let cell = |level: &serde_json::Value, name: &str| -> String {
        let result = &level["result"];
        let dropped = result["dropped_columns"]
            .as_array()
            .map(|a| a.iter().any(|v| v.as_str() == Some(name)))
            .unwrap_or(false);
        if dropped {
            return "partialled out".to_string();
        }
        let (est, se) = if name == "post" {
            (
                result["post_effect"].as_f64(),
                result["post_effect_se"].as_f64(),
            )
        } else if name == "post_x_treated" {
            (
                Some(result["treatment_effect"].as_f64().unwrap_or(f64::NAN)),
                Some(result["treatment_effect_se"].as_f64().unwrap_or(f64::NAN)),
            )
        } else {
            let found = result["controls"]
                .as_array()
                .and_then(|a| a.iter().find(|c| c["name"].as_str() == Some(name)));
            (
                found.and_then(|c| c["estimate"].as_f64()),
                found.and_then(|c| c["std_error"].as_f64()),
            )
        };
        match (est, se) {
            (Some(e), Some(s)) => format!("{e:.4}{} ({s:.4})", stars(e, s)),
            _ => String::new(),
        }
    };

    for name in &row_names {
        out.push_str(&format!("{name:26}"));
        for level in levels {
            out.push_str(&format!("{:>width$}", cell(level, name)));
        }
        out.push('\n');
    }
    for (label, key) in [
        ("observations", "n_obs"),
        ("r_squared", "r_squared"),
        ("firms", "n_firms"),
    ] {
        out.push_str(&format!("{label:26}"));
        for level in levels {
            let v = &level["result"][key];
            let text = if key == "r_squared" {
                format!("{:.4}", v.as_f64().unwrap_or(f64::NAN))
            } else {
                format!("{v}")
            };
            out.push_str(&format!("{text:>width$}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Event-study estimates and the joint pre-policy test; writes
/// `event_study.csv` and `event_study.json`.
pub fn cmd_event_study(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let panel = load_input_panel(config)?;
    let spec = config.did_spec()?;
    let base_year = config.validate.as_ref().and_then(|v| v.base_year);
    let study: EventStudyResult = event_study(&panel, &spec, base_year)?;
    ensure_dir(out_dir)?;

    let csv_path = out_dir.join("event_study.csv");
    let mut body = String::from("year,estimate,std_error,ci_lower,ci_upper\n");
    for t in &study.terms {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            t.year,
            t.estimate,
            t.std_error,
            t.estimate - 1.96 * t.std_error,
            t.estimate + 1.96 * t.std_error
        ));
    }
    fs::write(&csv_path, body)?;
    let json_path = out_dir.join("event_study.json");
    write_json(&json_path, &study)?;

    let summary = match &study.pre_policy_wald {
        Some(w) => format!(
            "event study with base year {}: pre-policy joint test over {} terms: statistic {:.4}, p = {:.4}",
            study.base_year, w.df, w.statistic, w.p_value
        ),
        None => format!(
            "event study with base year {}: pre-policy joint test degenerate (no pre-policy outcome variation)",
            study.base_year
        ),
    };
    Ok(CommandOutput {
        files: vec![csv_path, json_path],
        summary,
    })
}

/// Monte Carlo summary of the full simulate → estimate pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub reps: usize,
    pub true_effect: f64,
    pub mean_estimate: f64,
    pub bias: f64,
    pub rmse: f64,
    pub sd_estimate: f64,
    pub mean_se: f64,
    /// Share of 95% confidence intervals covering the truth.
    pub coverage: f64,
    /// Share of replications where the effect is significant at 5%.
    pub significant_share: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pretrend: Option<PretrendSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PretrendSummary {
    pub evaluated: usize,
    pub degenerate: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// Share of individual pre-policy terms insignificant at 5%.
    pub insignificant_term_share: f64,
}

/// Run `reps` replications of simulate → estimate (and optionally the event
/// study), reporting bias, RMSE, CI coverage, and pre-trend test behavior.
/// Deterministic given the root seed; replication seeds are derived by a
/// counter scheme.
pub fn cmd_validate(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let reps = config.reps.unwrap_or(200);
    if reps == 0 {
        return Err(Error::Config(
            "validation needs at least one replication".to_string(),
        ));
    }
    let panel_cfg = config.resolved_panel()?;
    let spec = config.did_spec()?;
    let options = config.validate.clone().unwrap_or_default();
    let root_seed = config.seed.unwrap_or(panel_cfg.seed);

    let report = run_validation(&panel_cfg, &spec, &options, reps, root_seed)?;
    ensure_dir(out_dir)?;
    let path = out_dir.join("validate.json");
    write_json(&path, &report)?;
    let summary = format!(
        "{} replications: mean estimate {:.4} (truth {:.4}, bias {:+.4}), rmse {:.4}, coverage {:.3}",
        report.reps, report.mean_estimate, report.true_effect, report.bias, report.rmse, report.coverage
    );
    Ok(CommandOutput {
        files: vec![path],
        summary,
    })
}

/// The validation engine behind [`cmd_validate`], reusable from tests.
pub fn run_validation(
    panel_cfg: &PanelConfig,
    spec: &DidSpec,
    options: &ValidateOptions,
    reps: usize,
    root_seed: u64,
) -> Result<ValidationReport> {
    let mut estimates = Vec::with_capacity(reps);
    let mut ses = Vec::with_capacity(reps);
    let mut covered = 0usize;
    let mut significant = 0usize;
    let mut truth = f64::NAN;
    let mut wald_evaluated = 0usize;
    let mut wald_degenerate = 0usize;
    let mut wald_rejections = 0usize;
    let mut terms_total = 0usize;
    let mut terms_insignificant = 0usize;

    for rep in 0..reps {
        let mut cfg = panel_cfg.clone();
        cfg.seed = derive_seed(root_seed, rep as u64);
        let panel = simulate_panel(&cfg)?;
        if truth.is_nan() {
            truth = panel
                .metadata
                .as_ref()
                .and_then(|m| m.expected_post_gap)
                .ok_or_else(|| {
                    Error::Config("panel metadata lacks an expected effect".to_string())
                })?;
        }
        let result = estimate_did(&panel, spec)?;
        let est = result.treatment_effect;
        let se = result.treatment_effect_se;
        estimates.push(est);
        ses.push(se);
        if se > 0.0 && (est - truth).abs() <= 1.96 * se {
            covered += 1;
        }
        if se > 0.0 && (est / se).abs() > 1.96 {
            significant += 1;
        }

        if options.run_event_study {
            let study = event_study(&panel, spec, options.base_year)?;
            wald_evaluated += 1;
            match &study.pre_policy_wald {
                Some(w) => {
                    if w.p_value < 0.05 {
                        wald_rejections += 1;
                    }
                }
                None => wald_degenerate += 1,
            }
            for t in study
                .terms
                .iter()
                .filter(|t| study.pre_policy_years.contains(&t.year))
            {
                terms_total += 1;
                let t_stat = if t.std_error > 0.0 {
                    t.estimate / t.std_error
                } else {
                    0.0
                };
                if t_stat.abs() < 1.96 {
                    terms_insignificant += 1;
                }
            }
        }
    }

    let n = reps as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let sd = if reps > 1 {
        (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let rmse = (estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / n).sqrt();
    let pretrend = if options.run_event_study {
        Some(PretrendSummary {
            evaluated: wald_evaluated,
            degenerate: wald_degenerate,
            rejections: wald_rejections,
            rejection_rate: wald_rejections as f64 / wald_evaluated.max(1) as f64,
            insignificant_term_share: if terms_total > 0 {
                terms_insignificant as f64 / terms_total as f64
            } else {
                1.0
            },
        })
    } else {
        None
    };

    Ok(ValidationReport {
        reps,
        true_effect: truth,
        mean_estimate: mean,
        bias: mean - truth,
        rmse,
        sd_estimate: sd,
        mean_se: ses.iter().sum::<f64>() / n,
        coverage: covered as f64 / n,
        significant_share: significant as f64 / n,
        pretrend,
    })
}
