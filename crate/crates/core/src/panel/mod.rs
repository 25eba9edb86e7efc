//! Synthetic unbalanced firm-year panels with a known treatment structure.
//!
//! Two data-generating processes share one panel shape. The reduced-form mode
//! plants an exactly known treatment effect: treated firms acquire an
//! absorbing OFDI indicator through a per-year adoption hazard calibrated so
//! the expected post-period treated-minus-control mean gap equals the target
//! effect. The structural mode runs the input-market ban experiment and lets
//! each treated firm adopt when its productivity draw clears the post-ban
//! investment cutoff. Control firms never adopt, and nothing happens before
//! the policy year in either group.
//!
//! Covariates (size, ROA, age) are simulated independently of treatment
//! status as stationary firm-level processes matched to configurable moment
//! targets, with optional missingness so listwise-deletion behavior can be
//! exercised downstream.

mod io;

pub use io::{export_csv, import_csv, read_panel, write_panel, CSV_HEADER};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{policy_experiment, MarketConfig, Regime};
use crate::model::{entry_cutoff, ofdi_cutoff};
use crate::numerics::bisect;

/// Data-generating process for the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DgpMode {
    /// Known treatment effect: the per-year adoption hazard is calibrated so
    /// the expected post-period mean gap equals `true_effect` (or taken
    /// directly from `hazard` when given).
    ReducedForm {
        true_effect: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hazard: Option<f64>,
    },
    /// Theory-driven: the import ban moves the equilibrium input cost, and a
    /// treated firm adopts when its productivity exceeds the post-ban
    /// investment cutoff for its type.
    Structural { market: MarketConfig },
}

/// Moment targets for the simulated covariates. Defaults reproduce the
/// observed-sample summary statistics used as the calibration anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CovariateCalibration {
    pub size_mean: f64,
    pub size_sd: f64,
    /// AR(1) persistence of (log relative) size within firm.
    pub size_ar1: f64,
    pub roa_mean: f64,
    pub roa_sd: f64,
    pub roa_ar1: f64,
    pub age_mean: f64,
    pub age_sd: f64,
    /// Per-observation probability that ROA is missing.
    pub roa_missing_rate: f64,
    /// Per-firm probability that the founding year (hence age) is unknown.
    pub age_missing_rate: f64,
}

impl Default for CovariateCalibration {
    fn default() -> Self {
        CovariateCalibration {
            size_mean: -0.7191,
            size_sd: 1.2161,
            size_ar1: 0.8,
            roa_mean: 0.0394,
            roa_sd: 0.0358,
            roa_ar1: 0.5,
            age_mean: 30.3683,
            age_sd: 21.6620,
            roa_missing_rate: 0.0,
            age_missing_rate: 0.0,
        }
    }
}

impl CovariateCalibration {
    pub fn validate(&self) -> Result<()> {
        for (name, sd) in [
            ("size_sd", self.size_sd),
            ("roa_sd", self.roa_sd),
            ("age_sd", self.age_sd),
        ] {
            if !(sd > 0.0) || !sd.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {sd}")));
            }
        }
        for (name, phi) in [("size_ar1", self.size_ar1), ("roa_ar1", self.roa_ar1)] {
            if !(0.0..1.0).contains(&phi) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0,1), got {phi}"
                )));
            }
        }
        for (name, p) in [
            ("roa_missing_rate", self.roa_missing_rate),
            ("age_missing_rate", self.age_missing_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0,1], got {p}")));
            }
        }
        if !(self.age_mean > 1.0) {
            return Err(Error::invalid(format!(
                "age_mean must exceed 1, got {}",
                self.age_mean
            )));
        }
        Ok(())
    }
}

/// Full simulation configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelConfig {
    pub n_treated: usize,
    pub n_control: usize,
    pub start_year: i32,
    pub end_year: i32,
    /// First post-policy year (inclusive in the post period).
    pub policy_year: i32,
    pub dgp: DgpMode,
    #[serde(default)]
    pub covariates: CovariateCalibration,
    /// Per firm end, the probability that leading/trailing years are censored.
    #[serde(default)]
    pub attrition_rate: f64,
    pub seed: u64,
}

impl PanelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_treated == 0 || self.n_control == 0 {
            return Err(Error::invalid(
                "both groups need at least one firm".to_string(),
            ));
        }
        if self.start_year >= self.end_year {
            return Err(Error::invalid(format!(
                "year range [{}, {}] must be increasing",
                self.start_year, self.end_year
            )));
        }
        if !(self.policy_year > self.start_year && self.policy_year <= self.end_year) {
            return Err(Error::invalid(format!(
                "policy year {} must lie strictly inside [{}, {}]",
                self.policy_year, self.start_year, self.end_year
            )));
        }
        if !(0.0..=1.0).contains(&self.attrition_rate) {
            return Err(Error::invalid(format!(
                "attrition rate must lie in [0,1], got {}",
                self.attrition_rate
            )));
        }
        self.covariates.validate()?;
        match &self.dgp {
            DgpMode::ReducedForm {
                true_effect,
                hazard,
            } => {
                if !(0.0..=1.0).contains(true_effect) {
                    return Err(Error::Calibration(format!(
                        "target effect {true_effect} is outside [0,1]; no adoption hazard can reach it"
                    )));
                }
                if let Some(h) = hazard {
                    if !(0.0..=1.0).contains(h) {
                        return Err(Error::invalid(format!("hazard must lie in [0,1], got {h}")));
                    }
                }
            }
            DgpMode::Structural { market } => market.validate()?,
        }
        Ok(())
    }

    fn n_years(&self) -> usize {
        (self.end_year - self.start_year + 1) as usize
    }

    fn n_post_years(&self) -> usize {
        (self.end_year - self.policy_year + 1) as usize
    }
}

/// One firm-year observation. Missing covariates are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub firm_id: String,
    /// 1 for treated firms, 0 for controls.
    pub group: u8,
    pub year: i32,
    /// Cumulative OFDI indicator; absorbing within firm.
    pub ofdi: u8,
    /// Log revenue relative to the industry mean.
    pub size: Option<f64>,
    /// Return on assets.
    pub roa: Option<f64>,
    /// Years since founding.
    pub age: Option<u32>,
}

/// Configuration echo plus realized truth, carried alongside a simulated
/// panel (and written next to the CSV by the CLI).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelMetadata {
    /// The exact configuration that produced the panel.
    pub config: PanelConfig,
    /// Treated firms with at least one observed row.
    pub realized_n_treated: usize,
    /// Control firms with at least one observed row.
    pub realized_n_control: usize,
    /// Resolved per-year adoption hazard (reduced form only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adoption_hazard: Option<f64>,
    /// Expected post-period treated-minus-control mean gap under the DGP.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_post_gap: Option<f64>,
    /// Firms that ever adopt.
    pub realized_adopters: usize,
    /// Realized treated adoption share per post year (the ATT path).
    pub att_path: Vec<YearShare>,
    /// Ban-experiment regime (structural only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_star_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_star_after: Option<f64>,
    /// Theoretical adoption probability per treated firm (structural only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adoption_probability: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearShare {
    pub year: i32,
    pub share: f64,
}

/// A panel plus (for simulated data) the realized truth behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelData {
    pub rows: Vec<PanelRow>,
    /// Present for simulated panels; `None` after a CSV import.
    pub metadata: Option<PanelMetadata>,
}

impl PanelData {
    /// Observed year range across all rows.
    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = self.rows.iter().map(|r| r.year).min()?;
        let max = self.rows.iter().map(|r| r.year).max()?;
        Some((min, max))
    }

    pub fn n_firms(&self) -> usize {
        let mut ids: Vec<&str> = self.rows.iter().map(|r| r.firm_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Mean post-period outcome gap between treated and control rows.
    pub fn post_period_gap(&self, policy_year: i32) -> f64 {
        let mut sums = [0.0f64; 2];
        let mut counts = [0usize; 2];
        for r in &self.rows {
            if r.year >= policy_year {
                sums[r.group as usize] += r.ofdi as f64;
                counts[r.group as usize] += 1;
            }
        }
        let mean = |g: usize| {
            if counts[g] > 0 {
                sums[g] / counts[g] as f64
            } else {
                0.0
            }
        };
        mean(1) - mean(0)
    }

    /// Invariant checks shared by the simulator and the CSV importer:
    /// no duplicate (firm, year), one group per firm, contiguous spans,
    /// absorbing OFDI, and unit age increments where age is observed.
    pub fn validate(&self) -> Result<()> {
        io::validate_rows(&self.rows, None)
    }
}

/// Expected post-period mean gap implied by a per-year adoption hazard:
/// the adoption CDF 1−(1−h)^k averaged over post years k = 1..T.
pub fn expected_gap_for_hazard(hazard: f64, n_post_years: usize) -> f64 {
    let t = n_post_years as f64;
    let mut acc = 0.0;
    for k in 1..=n_post_years {
        acc += 1.0 - (1.0 - hazard).powi(k as i32);
    }
    acc / t
}

/// Solve for the hazard whose expected post-period mean gap is `target`.
pub fn calibrate_hazard(target: f64, n_post_years: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Calibration(format!(
            "target gap {target} is outside [0,1]; unreachable over {n_post_years} post years"
        )));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    if target == 1.0 {
        return Ok(1.0);
    }
    bisect(
        |h| expected_gap_for_hazard(h, n_post_years) - target,
        0.0,
        1.0,
        1e-14,
    )
}

/// Generate a panel. Deterministic given the config (seed included).
pub fn simulate_panel(config: &PanelConfig) -> Result<PanelData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let t_post = config.n_post_years();

    // Resolve the adoption mechanism up front.
    enum Adoption {
        Hazard(f64),
        Structural {
            regime: Regime,
            delta_before: f64,
            delta_after: f64,
            market: MarketConfig,
            p_adopt: f64,
        },
    }
    let mechanism = match &config.dgp {
        DgpMode::ReducedForm {
            true_effect,
            hazard,
        } => {
            let h = match hazard {
                Some(h) => *h,
                None => calibrate_hazard(*true_effect, t_post)?,
            };
            Adoption::Hazard(h)
        }
        DgpMode::Structural { market } => {
            let outcome = policy_experiment(market)?;
            // Theoretical adoption probability of a treated firm: drawn as an
            // active (pre-ban entrant) firm, it adopts when its productivity
            // clears the post-ban investment cutoff for its type.
            let mut p_adopt = 0.0;
            for c in &market.mixture.components {
                let pre = market.model_params(outcome.before.delta_star, &c.tech);
                let post = market.model_params(outcome.after.delta_star, &c.tech);
                let floor = entry_cutoff(&pre).max(market.pareto.scale);
                let p = match ofdi_cutoff(&post) {
                    Some(star) if star > floor => (floor / star).powf(market.pareto.shape),
                    Some(_) => 1.0,
                    None => 0.0,
                };
                p_adopt += c.weight * p;
            }
            Adoption::Structural {
                regime: outcome.regime,
                delta_before: outcome.before.delta_star,
                delta_after: outcome.after.delta_star,
                market: market.clone(),
                p_adopt,
            }
        }
    };

    let age_model = StartAgeModel::new(&config.covariates, config.n_years())?;
    let id_width = (config.n_treated.max(config.n_control))
        .to_string()
        .len()
        .max(3);

    let mut rows = Vec::new();
    let mut realized_adopters = 0usize;
    // Adoption counts per post year for the ATT path.
    let mut treated_adopted = vec![0usize; t_post];
    let mut treated_observed = vec![0usize; t_post];

    let n_firms = config.n_treated + config.n_control;
    for firm_index in 0..n_firms {
        let treated = firm_index < config.n_treated;
        let (prefix, ordinal) = if treated {
            ("T", firm_index + 1)
        } else {
            ("C", firm_index - config.n_treated + 1)
        };
        let firm_id = format!("{prefix}{ordinal:0id_width$}");

        // Unbalanced span: censor each end with the configured probability.
        let mut span_start = config.start_year;
        let mut span_end = config.end_year;
        let max_trim = ((config.n_years() as i32 - 4) / 2).clamp(0, 8);
        if max_trim > 0 {
            if rng.gen::<f64>() < config.attrition_rate {
                span_start += rng.gen_range(1..=max_trim);
            }
            if rng.gen::<f64>() < config.attrition_rate {
                span_end -= rng.gen_range(1..=max_trim);
            }
        }

        // Adoption year (independent of the observed span, so censoring does
        // not perturb the adoption stream).
        let adoption_year: Option<i32> = if treated {
            match &mechanism {
                Adoption::Hazard(h) => {
                    let mut year = None;
                    for k in 0..t_post {
                        if rng.gen::<f64>() < *h {
                            year = Some(config.policy_year + k as i32);
                            break;
                        }
                    }
                    year
                }
                Adoption::Structural {
                    market,
                    delta_before,
                    delta_after,
                    ..
                } => {
                    // Type, then productivity conditional on pre-ban activity.
                    let mut pick = rng.gen::<f64>();
                    let mut tech = market.mixture.components[0].tech;
                    for c in &market.mixture.components {
                        if pick < c.weight {
                            tech = c.tech;
                            break;
                        }
                        pick -= c.weight;
                    }
                    let pre = market.model_params(*delta_before, &tech);
                    let floor = entry_cutoff(&pre).max(market.pareto.scale);
                    let u = 1.0 - rng.gen::<f64>();
                    let lambda = floor * u.powf(-1.0 / market.pareto.shape);
                    let post = market.model_params(*delta_after, &tech);
                    let adopts = match ofdi_cutoff(&post) {
                        Some(star) => lambda > star,
                        None => false,
                    };
                    if adopts {
                        Some(config.policy_year + rng.gen_range(0..t_post) as i32)
                    } else {
                        None
                    }
                }
            }
        } else {
            None
        };
        if adoption_year.is_some() {
            realized_adopters += 1;
        }

        // Covariates.
        let start_age = age_model.draw(&mut rng);
        let age_known = rng.gen::<f64>() >= config.covariates.age_missing_rate;
        let cal = &config.covariates;
        let mut size = cal.size_mean + cal.size_sd * draw_normal(&mut rng);
        let mut roa = cal.roa_mean + cal.roa_sd * draw_normal(&mut rng);

        for year in span_start..=span_end {
            if year > span_start {
                size = cal.size_mean
                    + cal.size_ar1 * (size - cal.size_mean)
                    + cal.size_sd
                        * (1.0 - cal.size_ar1 * cal.size_ar1).sqrt()
                        * draw_normal(&mut rng);
                roa = cal.roa_mean
                    + cal.roa_ar1 * (roa - cal.roa_mean)
                    + cal.roa_sd * (1.0 - cal.roa_ar1 * cal.roa_ar1).sqrt() * draw_normal(&mut rng);
            }
            let roa_value = if rng.gen::<f64>() < cal.roa_missing_rate {
                None
            } else {
                Some(roa)
            };
            let ofdi = match adoption_year {
                Some(a) if year >= a => 1u8,
                _ => 0u8,
            };
            if treated && year >= config.policy_year {
                let k = (year - config.policy_year) as usize;
                treated_observed[k] += 1;
                treated_adopted[k] += ofdi as usize;
            }
            let age = start_age + (year - config.start_year);
            rows.push(PanelRow {
                firm_id: firm_id.clone(),
                group: treated as u8,
                year,
                ofdi,
                size: Some(size),
                roa: roa_value,
                age: if age_known { Some(age as u32) } else { None },
            });
        }
    }

    let att_path = (0..t_post)
        .map(|k| YearShare {
            year: config.policy_year + k as i32,
            share: if treated_observed[k] > 0 {
                treated_adopted[k] as f64 / treated_observed[k] as f64
            } else {
                0.0
            },
        })
        .collect();

    let realized = |flag: u8| {
        let mut ids: Vec<&str> = rows
            .iter()
            .filter(|r| r.group == flag)
            .map(|r| r.firm_id.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    };
    let base = PanelMetadata {
        config: config.clone(),
        realized_n_treated: realized(1),
        realized_n_control: realized(0),
        adoption_hazard: None,
        expected_post_gap: None,
        realized_adopters,
        att_path,
        regime: None,
        delta_star_before: None,
        delta_star_after: None,
        adoption_probability: None,
    };
    let metadata = match &mechanism {
        Adoption::Hazard(h) => PanelMetadata {
            adoption_hazard: Some(*h),
            expected_post_gap: Some(expected_gap_for_hazard(*h, t_post)),
            ..base
        },
        Adoption::Structural {
            regime,
            delta_before,
            delta_after,
            p_adopt,
            ..
        } => PanelMetadata {
            // Uniform adoption timing over T post years puts the average
            // adopted share at (T+1)/(2T) of the adoption probability.
            expected_post_gap: Some(p_adopt * (t_post as f64 + 1.0) / (2.0 * t_post as f64)),
            regime: Some(*regime),
            delta_star_before: Some(*delta_before),
            delta_star_after: Some(*delta_after),
            adoption_probability: Some(*p_adopt),
            ..base
        },
    };

    let panel = PanelData {
        rows,
        metadata: Some(metadata),
    };
    panel.validate()?;
    Ok(panel)
}

/// Start-of-sample age model: a gamma founding-age distribution whose
/// parameters are backed out so the pooled panel mean/sd of age hit the
/// calibration targets once the deterministic within-firm trend is added.
struct StartAgeModel {
    shape: f64,
    scale: f64,
}

impl StartAgeModel {
    fn new(cal: &CovariateCalibration, n_years: usize) -> Result<Self> {
        let t = n_years as f64;
        // Pooled mean = start mean + (T−1)/2; pooled variance adds the
        // variance of the uniform year offset, (T²−1)/12.
        let start_mean = cal.age_mean - (t - 1.0) / 2.0;
        let start_var = cal.age_sd * cal.age_sd - (t * t - 1.0) / 12.0;
        if start_mean < 1.0 {
            return Err(Error::Calibration(format!(
                "age_mean {} is too small for a {n_years}-year panel",
                cal.age_mean
            )));
        }
        if start_var <= 0.0 {
            return Err(Error::Calibration(format!(
                "age_sd {} is too small for a {n_years}-year panel",
                cal.age_sd
            )));
        }
        Ok(StartAgeModel {
            shape: start_mean * start_mean / start_var,
            scale: start_var / start_mean,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> i32 {
        let v = draw_gamma(rng, self.shape, self.scale);
        (v.round() as i32).max(1)
    }
}

/// Gamma draw by Marsaglia-Tsang squeeze, with the boost to shapes below one.
fn draw_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    if shape < 1.0 {
        let u: f64 = 1.0 - rng.gen::<f64>();
        return draw_gamma(rng, shape + 1.0, scale) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = draw_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = 1.0 - rng.gen::<f64>();
        if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
            return d * v * scale;
        }
    }
}

/// Standard normal draw by the polar method.
fn draw_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}
