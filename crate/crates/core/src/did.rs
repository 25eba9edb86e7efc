//! Difference-in-differences estimation on firm-year panels.
//!
//! The firm-level estimator regresses the cumulative OFDI indicator on a
//! post-policy dummy and its interaction with treatment status under firm
//! fixed effects, with build-up control specifications running from no
//! covariates to a full second-degree polynomial of the covariate vector.
//! The event-study variant replaces the post dummy with year-by-treatment
//! interactions and jointly tests the pre-policy terms. The aggregate-level
//! estimator first collapses the panel to group-year relative frequencies and
//! then runs the same regression on 2×T cells with group fixed effects and
//! HAC standard errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fe_ols, wald_joint, CovarianceMode, Design, WaldTest};
use crate::panel::{PanelData, PanelRow};

/// Column name of the post-policy dummy.
pub const POST_COLUMN: &str = "post";
/// Column name of the treatment interaction (post × treated).
pub const TREATMENT_COLUMN: &str = "post_x_treated";

/// Build-up control specifications, from no covariates to the full
/// second-degree polynomial (levels, squares, pairwise interactions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlLevel {
    None,
    Size,
    SizeRoa,
    SizeRoaAge,
    FullPolynomial,
}

impl ControlLevel {
    /// All levels in build-up order.
    pub const ALL: [ControlLevel; 5] = [
        ControlLevel::None,
        ControlLevel::Size,
        ControlLevel::SizeRoa,
        ControlLevel::SizeRoaAge,
        ControlLevel::FullPolynomial,
    ];

    fn base_covariates(self) -> &'static [&'static str] {
        match self {
            ControlLevel::None => &[],
            ControlLevel::Size => &["size"],
            ControlLevel::SizeRoa => &["size", "roa"],
            ControlLevel::SizeRoaAge | ControlLevel::FullPolynomial => &["size", "roa", "age"],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ControlLevel::None => "none",
            ControlLevel::Size => "size",
            ControlLevel::SizeRoa => "size_roa",
            ControlLevel::SizeRoaAge => "size_roa_age",
            ControlLevel::FullPolynomial => "full_polynomial",
        }
    }
}

/// Pre-trend controls: per-firm baseline level and change of named
/// covariates over the two pre-policy years, interacted with a polynomial in
/// calendar time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrendControls {
    /// Covariate names among {size, roa, age}.
    pub covariates: Vec<String>,
    /// Polynomial degree in time.
    #[serde(default = "default_pretrend_degree")]
    pub degree: usize,
}

fn default_pretrend_degree() -> usize {
    4
}

/// Estimation specification shared by the firm-level and aggregate models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DidSpec {
    /// First post-policy year.
    pub post_year: i32,
    /// Whether the policy year itself counts as post (default true).
    #[serde(default = "default_true")]
    pub include_policy_year: bool,
    #[serde(default = "default_control_level")]
    pub control_level: ControlLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pretrend: Option<PretrendControls>,
    #[serde(default = "default_covariance")]
    pub covariance: CovarianceMode,
}

fn default_true() -> bool {
    true
}

fn default_control_level() -> ControlLevel {
    ControlLevel::None
}

fn default_covariance() -> CovarianceMode {
    CovarianceMode::ClusterByUnit
}

impl DidSpec {
    pub fn new(post_year: i32, control_level: ControlLevel) -> Self {
        DidSpec {
            post_year,
            include_policy_year: true,
            control_level,
            pretrend: None,
            covariance: CovarianceMode::ClusterByUnit,
        }
    }

    /// First year with dP = 1.
    fn post_start(&self) -> i32 {
        if self.include_policy_year {
            self.post_year
        } else {
            self.post_year + 1
        }
    }

    fn validate(&self, panel: &PanelData) -> Result<()> {
        let (lo, hi) = panel
            .year_range()
            .ok_or_else(|| Error::invalid("panel has no rows".to_string()))?;
        if self.post_year < lo || self.post_year > hi {
            return Err(Error::invalid(format!(
                "post year {} is outside the panel range [{lo}, {hi}]",
                self.post_year
            )));
        }
        if let Some(p) = &self.pretrend {
            if p.degree == 0 {
                return Err(Error::invalid(
                    "pretrend degree must be at least 1".to_string(),
                ));
            }
            for c in &p.covariates {
                if !matches!(c.as_str(), "size" | "roa" | "age") {
                    return Err(Error::UnknownColumn(c.clone()));
                }
            }
        }
        Ok(())
    }
}

/// A named coefficient with its robust standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCoefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
}

/// Firm-level or aggregate-level estimation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DidResult {
    /// Coefficient on post × treated.
    pub treatment_effect: f64,
    pub treatment_effect_se: f64,
    /// Coefficient on the post dummy; `None` when it was partialled out by
    /// rank detection.
    pub post_effect: Option<f64>,
    pub post_effect_se: Option<f64>,
    pub controls: Vec<NamedCoefficient>,
    pub r_squared: f64,
    pub n_obs: usize,
    pub n_firms: usize,
    /// Rows removed by listwise deletion of missing covariates.
    pub n_rows_dropped: usize,
    pub dropped_columns: Vec<String>,
}

/// One per-year interaction term of the event study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTerm {
    pub year: i32,
    pub estimate: f64,
    pub std_error: f64,
}

/// Event-study output: per-year interactions (base year omitted) plus the
/// joint pre-policy test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStudyResult {
    pub base_year: i32,
    pub terms: Vec<EventTerm>,
    /// Years whose interactions enter the joint pre-policy test.
    pub pre_policy_years: Vec<i32>,
    /// `None` when the test is degenerate (no pre-policy variation to test).
    pub pre_policy_wald: Option<WaldTest>,
    pub n_obs: usize,
    pub n_firms: usize,
    pub n_rows_dropped: usize,
    pub dropped_columns: Vec<String>,
}

/// A (group, year) cell of the relative-frequency table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCell {
    pub group: u8,
    pub year: i32,
    pub n_firms: usize,
    /// Share of firms with OFDI = 1; absent for empty cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_hat: Option<f64>,
}

/// The assembled firm-level design.
#[derive(Debug, Clone)]
pub struct DidDesign {
    pub outcome: Vec<f64>,
    pub design: Design,
    pub unit_ids: Vec<u64>,
    /// Distinct firm ids in unit-id order.
    pub firms: Vec<String>,
    /// Indices into the panel's rows, one per kept design row.
    pub row_indices: Vec<usize>,
    pub n_rows_dropped: usize,
}

/// Canonical row order: by firm id, then year. Makes every estimate
/// invariant to input row order and to order-preserving relabelings.
fn canonical_order(panel: &PanelData) -> Vec<usize> {
    let mut order: Vec<usize> = (0..panel.rows.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&panel.rows[a], &panel.rows[b]);
        ra.firm_id.cmp(&rb.firm_id).then(ra.year.cmp(&rb.year))
    });
    order
}

fn covariate_value(row: &PanelRow, name: &str) -> Option<f64> {
    match name {
        "size" => row.size,
        "roa" => row.roa,
        "age" => row.age.map(|a| a as f64),
        _ => None,
    }
}

/// Per-firm pre-policy baselines for the pretrend controls: mean level over
/// the two years before the policy and the change between them.
fn pretrend_baselines(
    panel: &PanelData,
    spec: &DidSpec,
    pretrend: &PretrendControls,
) -> std::collections::HashMap<String, Vec<(f64, f64)>> {
    let mut out: std::collections::HashMap<String, Vec<(f64, f64)>> = Default::default();
    let (y1, y2) = (spec.post_year - 2, spec.post_year - 1);
    let mut per_firm: std::collections::HashMap<&str, Vec<Option<(f64, f64)>>> = Default::default();
    for row in &panel.rows {
        if row.year != y1 && row.year != y2 {
            continue;
        }
        let entry = per_firm
            .entry(row.firm_id.as_str())
            .or_insert_with(|| vec![None; 2 * pretrend.covariates.len()]);
        for (ci, cov) in pretrend.covariates.iter().enumerate() {
            if let Some(v) = covariate_value(row, cov) {
                let slot = 2 * ci + if row.year == y1 { 0 } else { 1 };
                entry[slot] = Some((v, v));
            }
        }
    }
    for (firm, slots) in per_firm {
        let mut baselines = Vec::with_capacity(pretrend.covariates.len());
        let mut complete = true;
        for ci in 0..pretrend.covariates.len() {
            match (slots[2 * ci], slots[2 * ci + 1]) {
                (Some((a, _)), Some((b, _))) => baselines.push((0.5 * (a + b), b - a)),
                _ => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            out.insert(firm.to_string(), baselines);
        }
    }
    out
}

/// Construct the outcome, named design columns, and unit labels for the
/// firm-level regression. Rows missing any required covariate (or, with
/// pretrend controls, belonging to a firm without a complete baseline) are
/// dropped and counted.
pub fn build_design(panel: &PanelData, spec: &DidSpec) -> Result<DidDesign> {
    spec.validate(panel)?;
    let order = canonical_order(panel);
    let (min_year, _) = panel.year_range().expect("validated non-empty");
    let post_start = spec.post_start();

    let base_covs = spec.control_level.base_covariates();
    let full_poly = spec.control_level == ControlLevel::FullPolynomial;
    let baselines = spec
        .pretrend
        .as_ref()
        .map(|p| (p, pretrend_baselines(panel, spec, p)));

    // Column layout.
    let mut names: Vec<String> = vec![POST_COLUMN.to_string(), TREATMENT_COLUMN.to_string()];
    names.extend(base_covs.iter().map(|c| c.to_string()));
    if full_poly {
        for c in base_covs {
            names.push(format!("{c}_sq"));
        }
        for i in 0..base_covs.len() {
            for j in (i + 1)..base_covs.len() {
                names.push(format!("{}_x_{}", base_covs[i], base_covs[j]));
            }
        }
    }
    if let Some((p, _)) = &baselines {
        for cov in &p.covariates {
            for power in 1..=p.degree {
                names.push(format!("pre_{cov}_level_t{power}"));
            }
            for power in 1..=p.degree {
                names.push(format!("pre_{cov}_change_t{power}"));
            }
        }
    }

    let mut outcome = Vec::new();
    let mut firm_of_row: Vec<String> = Vec::new();
    let mut row_indices: Vec<usize> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut n_rows_dropped = 0usize;

    'rows: for &idx in &order {
        let row = &panel.rows[idx];
        let mut values: Vec<f64> = Vec::with_capacity(names.len());
        let post = (row.year >= post_start) as u8 as f64;
        values.push(post);
        values.push(post * row.group as f64);
        let mut base_values = Vec::with_capacity(base_covs.len());
        for cov in base_covs {
            match covariate_value(row, cov) {
                Some(v) => base_values.push(v),
                None => {
                    n_rows_dropped += 1;
                    continue 'rows;
                }
            }
        }
        values.extend(base_values.iter().copied());
        if full_poly {
            for v in &base_values {
                values.push(v * v);
            }
            for i in 0..base_values.len() {
                for j in (i + 1)..base_values.len() {
                    values.push(base_values[i] * base_values[j]);
                }
            }
        }
        if let Some((p, map)) = &baselines {
            let Some(firm_base) = map.get(&row.firm_id) else {
                n_rows_dropped += 1;
                continue 'rows;
            };
            let tau = (row.year - min_year + 1) as f64;
            for (level, change) in firm_base {
                let mut t_power = 1.0;
                let mut level_vals = Vec::with_capacity(p.degree);
                let mut change_vals = Vec::with_capacity(p.degree);
                for _ in 0..p.degree {
                    t_power *= tau;
                    level_vals.push(level * t_power);
                    change_vals.push(change * t_power);
                }
                values.extend(level_vals);
                values.extend(change_vals);
            }
        }
        debug_assert_eq!(values.len(), names.len());
        outcome.push(row.ofdi as f64);
        firm_of_row.push(row.firm_id.clone());
        row_indices.push(idx);
        for (j, v) in values.into_iter().enumerate() {
            columns[j].push(v);
        }
    }

    if outcome.is_empty() {
        return Err(Error::DegenerateRegression(
            "no rows left after dropping missing covariates".to_string(),
        ));
    }

    // Dense unit ids over the kept rows, in sorted firm order.
    let mut firms: Vec<String> = firm_of_row.clone();
    firms.sort();
    firms.dedup();
    let unit_ids: Vec<u64> = firm_of_row
        .iter()
        .map(|f| firms.binary_search(f).expect("firm present") as u64)
        .collect();

    let design = Design::from_columns(names.into_iter().zip(columns).collect())?;
    Ok(DidDesign {
        outcome,
        design,
        unit_ids,
        firms,
        row_indices,
        n_rows_dropped,
    })
}

/// Firm-level DID: within-firm least squares of the cumulative OFDI
/// indicator on the post dummy, the treatment interaction, and the chosen
/// controls, with the spec's robust covariance.
pub fn estimate_did(panel: &PanelData, spec: &DidSpec) -> Result<DidResult> {
    let built = build_design(panel, spec)?;
    let fit = fe_ols(
        &built.outcome,
        &built.design,
        &built.unit_ids,
        spec.covariance,
    )?;
    let treatment_effect = fit.coefficient(TREATMENT_COLUMN).ok_or_else(|| {
        Error::DegenerateRegression(
            "treatment interaction was dropped; the effect is not identified in this panel"
                .to_string(),
        )
    })?;
    let treatment_effect_se = fit.std_error(TREATMENT_COLUMN).unwrap_or(f64::NAN);

    let controls = fit
        .columns
        .iter()
        .filter(|c| c.as_str() != POST_COLUMN && c.as_str() != TREATMENT_COLUMN)
        .map(|c| NamedCoefficient {
            name: c.clone(),
            estimate: fit.coefficient(c).unwrap(),
            std_error: fit.std_error(c).unwrap(),
        })
        .collect();

    Ok(DidResult {
        treatment_effect,
        treatment_effect_se,
        post_effect: fit.coefficient(POST_COLUMN),
        post_effect_se: fit.std_error(POST_COLUMN),
        controls,
        r_squared: fit.r_squared,
        n_obs: fit.n_obs,
        n_firms: fit.n_units,
        n_rows_dropped: built.n_rows_dropped,
        dropped_columns: fit.dropped_columns,
    })
}

/// Event study: year × treatment interactions for every sample year except
/// the base year, plus the spec's controls, under firm fixed effects. The
/// pre-policy interactions are jointly tested; a degenerate (singular)
/// covariance sub-block yields `None` rather than an error, since a panel
/// with no pre-policy outcome variation cannot reject anything.
pub fn event_study(
    panel: &PanelData,
    spec: &DidSpec,
    base_year: Option<i32>,
) -> Result<EventStudyResult> {
    spec.validate(panel)?;
    let (min_year, max_year) = panel.year_range().expect("validated non-empty");
    let base = base_year.unwrap_or(min_year);
    if base < min_year || base > max_year {
        return Err(Error::invalid(format!(
            "base year {base} is outside the panel range [{min_year}, {max_year}]"
        )));
    }

    let mut years: Vec<i32> = panel.rows.iter().map(|r| r.year).collect();
    years.sort_unstable();
    years.dedup();

    // Reuse the covariate machinery of build_design, then swap the two DID
    // columns for the per-year interactions.
    let built = build_design(panel, spec)?;
    let kept_rows: Vec<&PanelRow> = built.row_indices.iter().map(|&i| &panel.rows[i]).collect();

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for &tau in years.iter().filter(|&&t| t != base) {
        let name = format!("y{tau}_x_treated");
        let col: Vec<f64> = kept_rows
            .iter()
            .map(|r| ((r.year == tau && r.group == 1) as u8) as f64)
            .collect();
        columns.push((name, col));
    }
    // Controls from the prebuilt design (everything after the two DID columns).
    let names = built.design.names().to_vec();
    let matrix = built.design.matrix();
    for (j, name) in names.iter().enumerate().skip(2) {
        columns.push((name.clone(), matrix.column(j).iter().copied().collect()));
    }

    let design = Design::from_columns(columns)?;
    let fit = fe_ols(&built.outcome, &design, &built.unit_ids, spec.covariance)?;

    let mut terms = Vec::new();
    for &tau in years.iter().filter(|&&t| t != base) {
        let name = format!("y{tau}_x_treated");
        if let (Some(est), Some(se)) = (fit.coefficient(&name), fit.std_error(&name)) {
            terms.push(EventTerm {
                year: tau,
                estimate: est,
                std_error: se,
            });
        }
    }

    let post_start = spec.post_start();
    let pre_policy_years: Vec<i32> = years
        .iter()
        .copied()
        .filter(|&t| t != base && t < post_start)
        .filter(|&t| fit.index_of(&format!("y{t}_x_treated")).is_some())
        .collect();
    let pre_columns: Vec<String> = pre_policy_years
        .iter()
        .map(|t| format!("y{t}_x_treated"))
        .collect();
    let pre_refs: Vec<&str> = pre_columns.iter().map(|s| s.as_str()).collect();
    let pre_policy_wald = if pre_refs.is_empty() {
        None
    } else {
        match wald_joint(&fit, &pre_refs) {
            Ok(w) => Some(w),
            Err(Error::SingularMatrix(_)) => None,
            Err(e) => return Err(e),
        }
    };

    Ok(EventStudyResult {
        base_year: base,
        terms,
        pre_policy_years,
        pre_policy_wald,
        n_obs: fit.n_obs,
        n_firms: fit.n_units,
        n_rows_dropped: built.n_rows_dropped,
        dropped_columns: fit.dropped_columns,
    })
}

/// Relative-frequency table of the outcome by (group, year). Cells with no
/// observed firms carry `n_firms = 0` and no estimate.
pub fn aggregate_probability(panel: &PanelData) -> Result<Vec<AggregateCell>> {
    let (min_year, max_year) = panel
        .year_range()
        .ok_or_else(|| Error::invalid("panel has no rows".to_string()))?;
    let mut cells = Vec::new();
    for group in 0u8..=1 {
        for year in min_year..=max_year {
            let mut n = 0usize;
            let mut sum = 0.0;
            for r in panel
                .rows
                .iter()
                .filter(|r| r.group == group && r.year == year)
            {
                n += 1;
                sum += r.ofdi as f64;
            }
            cells.push(AggregateCell {
                group,
                year,
                n_firms: n,
                p_hat: if n > 0 { Some(sum / n as f64) } else { None },
            });
        }
    }
    Ok(cells)
}

/// Aggregate-level DID: regress the group-year relative frequency on the
/// post dummy, the treatment interaction, and within-group covariate
/// averages, under group fixed effects. Rows are time-ordered within group
/// so a HAC covariance applies cleanly.
pub fn estimate_aggregate(panel: &PanelData, spec: &DidSpec) -> Result<DidResult> {
    spec.validate(panel)?;
    if spec.pretrend.is_some() {
        return Err(Error::invalid(
            "pretrend controls are a firm-level device; not defined for the aggregate model"
                .to_string(),
        ));
    }
    let post_start = spec.post_start();
    let base_covs = spec.control_level.base_covariates();
    let full_poly = spec.control_level == ControlLevel::FullPolynomial;

    // Firm-level control vector per row, averaged within (group, year).
    let mut poly_names: Vec<String> = base_covs.iter().map(|c| c.to_string()).collect();
    if full_poly {
        for c in base_covs {
            poly_names.push(format!("{c}_sq"));
        }
        for i in 0..base_covs.len() {
            for j in (i + 1)..base_covs.len() {
                poly_names.push(format!("{}_x_{}", base_covs[i], base_covs[j]));
            }
        }
    }

    let cells = aggregate_probability(panel)?;
    let mut outcome = Vec::new();
    let mut units = Vec::new();
    let mut post_col = Vec::new();
    let mut treat_col = Vec::new();
    let mut control_cols: Vec<Vec<f64>> = vec![Vec::new(); poly_names.len()];
    let mut n_cells_dropped = 0usize;

    for cell in &cells {
        let Some(p_hat) = cell.p_hat else { continue };
        // Within-cell averages of the firm-level control vector, over rows
        // with complete covariates.
        let mut sums = vec![0.0f64; poly_names.len()];
        let mut n_complete = 0usize;
        for r in panel
            .rows
            .iter()
            .filter(|r| r.group == cell.group && r.year == cell.year)
        {
            let mut base_values = Vec::with_capacity(base_covs.len());
            let mut ok = true;
            for cov in base_covs {
                match covariate_value(r, cov) {
                    Some(v) => base_values.push(v),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            n_complete += 1;
            let mut k = 0;
            for v in &base_values {
                sums[k] += v;
                k += 1;
            }
            if full_poly {
                for v in &base_values {
                    sums[k] += v * v;
                    k += 1;
                }
                for i in 0..base_values.len() {
                    for j in (i + 1)..base_values.len() {
                        sums[k] += base_values[i] * base_values[j];
                        k += 1;
                    }
                }
            }
        }
        if !poly_names.is_empty() && n_complete == 0 {
            n_cells_dropped += 1;
            continue;
        }
        outcome.push(p_hat);
        units.push(cell.group as u64);
        let post = (cell.year >= post_start) as u8 as f64;
        post_col.push(post);
        treat_col.push(post * cell.group as f64);
        for (k, col) in control_cols.iter_mut().enumerate() {
            col.push(sums[k] / n_complete.max(1) as f64);
        }
    }

    if outcome.is_empty() {
        return Err(Error::DegenerateRegression(
            "no populated group-year cells".to_string(),
        ));
    }

    let mut columns = vec![
        (POST_COLUMN.to_string(), post_col),
        (TREATMENT_COLUMN.to_string(), treat_col),
    ];
    for (name, col) in poly_names.into_iter().zip(control_cols) {
        columns.push((name, col));
    }
    let design = Design::from_columns(columns)?;
    let fit = fe_ols(&outcome, &design, &units, spec.covariance)?;
    let treatment_effect = fit.coefficient(TREATMENT_COLUMN).ok_or_else(|| {
        Error::DegenerateRegression(
            "treatment interaction was dropped; the effect is not identified in this panel"
                .to_string(),
        )
    })?;

    let controls = fit
        .columns
        .iter()
        .filter(|c| c.as_str() != POST_COLUMN && c.as_str() != TREATMENT_COLUMN)
        .map(|c| NamedCoefficient {
            name: c.clone(),
            estimate: fit.coefficient(c).unwrap(),
            std_error: fit.std_error(c).unwrap(),
        })
        .collect();

    Ok(DidResult {
        treatment_effect,
        treatment_effect_se: fit.std_error(TREATMENT_COLUMN).unwrap_or(f64::NAN),
        post_effect: fit.coefficient(POST_COLUMN),
        post_effect_se: fit.std_error(POST_COLUMN),
        controls,
        r_squared: fit.r_squared,
        n_obs: fit.n_obs,
        n_firms: panel.n_firms(),
        n_rows_dropped: n_cells_dropped,
        dropped_columns: fit.dropped_columns,
    })
}
