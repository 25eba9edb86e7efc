//! The firm's problem: marginal cost, CES markup pricing, profit, entry and
//! vertical-OFDI cutoffs, the resulting entry/investment decision, and the
//! probability that an entrant invests abroad together with its comparative
//! statics in the domestic input cost.
//!
//! Firms are heterogeneous in a Pareto-distributed productivity endowment.
//! A firm sources intermediate inputs domestically at unit cost δ, or — after
//! paying a fixed investment cost — from a foreign subsidiary at unit cost δ̃.
//! Vertical investment is attractive only when δ exceeds δ̃, and then only for
//! firms productive enough to recoup the fixed cost, which produces the usual
//! sorting: exit, domestic production, foreign investment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ParetoDist;

/// CES demand-side primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preferences {
    /// CES preference parameter ρ ∈ (0, 1); prices carry the markup 1/ρ.
    pub rho: f64,
    /// Demand shifter (income over price index), > 0.
    pub demand_shifter: f64,
}

impl Preferences {
    pub fn new(rho: f64, demand_shifter: f64) -> Result<Self> {
        let p = Preferences {
            rho,
            demand_shifter,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!(
                "rho must lie in (0,1), got {}",
                self.rho
            )));
        }
        if !(self.demand_shifter > 0.0) || !self.demand_shifter.is_finite() {
            return Err(Error::invalid(format!(
                "demand shifter must be positive, got {}",
                self.demand_shifter
            )));
        }
        Ok(())
    }

    /// ρ/(1−ρ): the elasticity of gross profit with respect to productivity.
    pub(crate) fn profit_elasticity(&self) -> f64 {
        self.rho / (1.0 - self.rho)
    }

    /// ρ/(ρ−1), the (negative) cost exponent in demand and profit.
    pub(crate) fn cost_exponent(&self) -> f64 {
        self.rho / (self.rho - 1.0)
    }
}

/// Production-side firm characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmTechnology {
    /// Units of intermediate input used per worker, ≥ 0.
    pub input_intensity: f64,
    /// Fixed cost of production, > 0.
    pub fixed_cost: f64,
    /// Fixed cost of the vertical investment abroad, > 0.
    pub ofdi_fixed_cost: f64,
}

impl FirmTechnology {
    pub fn new(input_intensity: f64, fixed_cost: f64, ofdi_fixed_cost: f64) -> Result<Self> {
        let t = FirmTechnology {
            input_intensity,
            fixed_cost,
            ofdi_fixed_cost,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.input_intensity >= 0.0) || !self.input_intensity.is_finite() {
            return Err(Error::invalid(format!(
                "input intensity must be nonnegative, got {}",
                self.input_intensity
            )));
        }
        if !(self.fixed_cost > 0.0) || !self.fixed_cost.is_finite() {
            return Err(Error::invalid(format!(
                "fixed cost must be positive, got {}",
                self.fixed_cost
            )));
        }
        if !(self.ofdi_fixed_cost > 0.0) || !self.ofdi_fixed_cost.is_finite() {
            return Err(Error::invalid(format!(
                "OFDI fixed cost must be positive, got {}",
                self.ofdi_fixed_cost
            )));
        }
        Ok(())
    }
}

/// Unit costs of the intermediate input by sourcing location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputCosts {
    /// Domestic unit cost δ, ≥ 0.
    pub domestic: f64,
    /// Foreign-subsidiary unit cost δ̃, > 0.
    pub foreign: f64,
}

impl InputCosts {
    pub fn new(domestic: f64, foreign: f64) -> Result<Self> {
        let c = InputCosts { domestic, foreign };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.domestic >= 0.0) || !self.domestic.is_finite() {
            return Err(Error::invalid(format!(
                "domestic input cost must be nonnegative, got {}",
                self.domestic
            )));
        }
        if !(self.foreign > 0.0) || !self.foreign.is_finite() {
            return Err(Error::invalid(format!(
                "foreign input cost must be positive, got {}",
                self.foreign
            )));
        }
        Ok(())
    }
}

/// Where a firm sources its intermediate inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputSource {
    Domestic,
    ForeignSubsidiary,
}

/// Full parameterization of the firm's problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub prefs: Preferences,
    pub pareto: ParetoDist,
    pub costs: InputCosts,
    pub tech: FirmTechnology,
}

impl ModelParams {
    pub fn new(
        prefs: Preferences,
        pareto: ParetoDist,
        costs: InputCosts,
        tech: FirmTechnology,
    ) -> Result<Self> {
        let p = ModelParams {
            prefs,
            pareto,
            costs,
            tech,
        };
        p.validate()?;
        Ok(p)
    }

    /// Validates every component plus the shape restriction α > ρ/(1−ρ),
    /// which keeps aggregate input demand finite and the demand curve
    /// continuous at its kink.
    pub fn validate(&self) -> Result<()> {
        self.prefs.validate()?;
        self.pareto.validate()?;
        self.costs.validate()?;
        self.tech.validate()?;
        let bound = self.prefs.profit_elasticity();
        if self.pareto.shape <= bound {
            return Err(Error::invalid(format!(
                "Pareto shape {} must exceed rho/(1-rho) = {} for aggregates to converge",
                self.pareto.shape, bound
            )));
        }
        Ok(())
    }

    fn unit_cost(&self, source: InputSource) -> f64 {
        match source {
            InputSource::Domestic => self.costs.domestic,
            InputSource::ForeignSubsidiary => self.costs.foreign,
        }
    }

    /// 1 + η·(unit input cost) for the given sourcing choice.
    pub(crate) fn cost_index(&self, source: InputSource) -> f64 {
        1.0 + self.tech.input_intensity * self.unit_cost(source)
    }
}

/// Productivity cutoffs implied by the parameters.
///
/// Below the saturation cost the thresholds are ordered `entry < ofdi` and
/// firms sort into exit, domestic production, and investment. Past
/// saturation the investment threshold drops below the domestic entry
/// margin; entry then happens directly into investing, `entry` is the
/// zero-profit margin under foreign sourcing, and `ofdi ≤ entry` signals
/// that every entrant invests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs {
    /// Operative entry threshold: below it the firm stays out.
    pub entry: f64,
    /// Investment threshold. Absent when the domestic input is weakly
    /// cheaper (investing never pays).
    pub ofdi: Option<f64>,
}

/// A firm's resolved decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntryOutcome {
    NoEntry,
    DomesticOnly,
    VerticalOfdi,
}

/// Marginal cost (1 + η·cost)/λ for the chosen sourcing.
pub fn marginal_cost(
    tech: &FirmTechnology,
    costs: &InputCosts,
    productivity: f64,
    source: InputSource,
) -> Result<f64> {
    if !(productivity > 0.0) {
        return Err(Error::Domain(format!(
            "productivity must be positive, got {productivity}"
        )));
    }
    let unit = match source {
        InputSource::Domestic => costs.domestic,
        InputSource::ForeignSubsidiary => costs.foreign,
    };
    Ok((1.0 + tech.input_intensity * unit) / productivity)
}

/// Profit-maximizing price: the constant markup c/ρ.
pub fn optimal_price(marginal_cost: f64, prefs: &Preferences) -> Result<f64> {
    if !(marginal_cost > 0.0) {
        return Err(Error::Domain(format!(
            "marginal cost must be positive, got {marginal_cost}"
        )));
    }
    Ok(marginal_cost / prefs.rho)
}

/// Gross (pre-fixed-cost) profit at the optimal price:
/// (1−ρ)·ρ^(ρ/(1−ρ))·A·(1+η·cost)^(ρ/(ρ−1))·λ^(ρ/(1−ρ)).
fn gross_profit(params: &ModelParams, productivity: f64, source: InputSource) -> f64 {
    let rho = params.prefs.rho;
    let a = params.prefs.demand_shifter;
    (1.0 - rho)
        * rho.powf(params.prefs.profit_elasticity())
        * a
        * params.cost_index(source).powf(params.prefs.cost_exponent())
        * productivity.powf(params.prefs.profit_elasticity())
}

/// Profit net of fixed costs for the given sourcing choice.
pub fn profit(params: &ModelParams, productivity: f64, source: InputSource) -> Result<f64> {
    if !(productivity > 0.0) {
        return Err(Error::Domain(format!(
            "productivity must be positive, got {productivity}"
        )));
    }
    let fixed = match source {
        InputSource::Domestic => params.tech.fixed_cost,
        InputSource::ForeignSubsidiary => params.tech.fixed_cost + params.tech.ofdi_fixed_cost,
    };
    Ok(gross_profit(params, productivity, source) - fixed)
}

/// Zero-profit productivity for a given cost index and total fixed cost.
fn zero_profit_margin(params: &ModelParams, cost_index: f64, fixed_total: f64) -> f64 {
    let rho = params.prefs.rho;
    let inv = (1.0 - rho) / rho;
    (1.0 - rho).powf(-inv)
        * rho.recip()
        * params.prefs.demand_shifter.powf(-inv)
        * cost_index
        * fixed_total.powf(inv)
}

/// Entry cutoff: the productivity at which domestic-sourcing profit is zero.
pub fn entry_cutoff(params: &ModelParams) -> f64 {
    zero_profit_margin(
        params,
        params.cost_index(InputSource::Domestic),
        params.tech.fixed_cost,
    )
}

/// Investment cutoff: the productivity at which profits with and without the
/// foreign subsidiary coincide. `None` when δ ≤ δ̃ (investing never pays).
pub fn ofdi_cutoff(params: &ModelParams) -> Option<f64> {
    if params.costs.domestic <= params.costs.foreign || params.tech.input_intensity == 0.0 {
        return None;
    }
    let rho = params.prefs.rho;
    let inv = (1.0 - rho) / rho;
    let gap = params
        .cost_index(InputSource::ForeignSubsidiary)
        .powf(params.prefs.cost_exponent())
        - params
            .cost_index(InputSource::Domestic)
            .powf(params.prefs.cost_exponent());
    // δ > δ̃ makes the foreign cost index smaller, so the gap is positive.
    Some(
        (1.0 - rho).powf(-inv)
            * rho.recip()
            * params.prefs.demand_shifter.powf(-inv)
            * gap.powf(-inv)
            * params.tech.ofdi_fixed_cost.powf(inv),
    )
}

/// Both operative cutoffs at once.
pub fn cutoffs(params: &ModelParams) -> Cutoffs {
    let domestic_entry = entry_cutoff(params);
    match ofdi_cutoff(params) {
        Some(star) if star < domestic_entry => {
            // Saturated: marginal entrants are already investors, so the
            // entry margin is zero profit under foreign sourcing.
            let foreign_entry = zero_profit_margin(
                params,
                params.cost_index(InputSource::ForeignSubsidiary),
                params.tech.fixed_cost + params.tech.ofdi_fixed_cost,
            );
            Cutoffs {
                entry: foreign_entry,
                ofdi: Some(star),
            }
        }
        other => Cutoffs {
            entry: domestic_entry,
            ofdi: other,
        },
    }
}

impl Cutoffs {
    /// Classify a productivity draw against the cutoffs.
    pub fn classify(&self, productivity: f64) -> EntryOutcome {
        if productivity < self.entry {
            return EntryOutcome::NoEntry;
        }
        match self.ofdi {
            Some(threshold) if productivity > threshold || threshold <= self.entry => {
                EntryOutcome::VerticalOfdi
            }
            _ => EntryOutcome::DomesticOnly,
        }
    }
}

/// Entry/investment decision for a single firm.
pub fn decide(params: &ModelParams, productivity: f64) -> Result<EntryOutcome> {
    if !(productivity > 0.0) {
        return Err(Error::Domain(format!(
            "productivity must be positive, got {productivity}"
        )));
    }
    Ok(cutoffs(params).classify(productivity))
}

/// Probability that an entrant invests abroad, P(λ > λ* | λ ≥ λ̲).
///
/// Zero when δ ≤ δ̃ or η = 0; one once δ reaches the saturation threshold
/// where the investment cutoff falls to the entry cutoff; in between the
/// closed form [((1+ηδ̃)/(1+ηδ))^(ρ/(ρ−1)) − 1]^(α(1−ρ)/ρ)·(f/f_I)^(α(1−ρ)/ρ),
/// clamped to [0, 1] against floating-point overshoot.
pub fn ofdi_probability(params: &ModelParams) -> f64 {
    if params.costs.domestic <= params.costs.foreign || params.tech.input_intensity == 0.0 {
        return 0.0;
    }
    if let Ok(threshold) = saturation_threshold(params) {
        if params.costs.domestic >= threshold {
            return 1.0;
        }
    }
    let rho = params.prefs.rho;
    let alpha = params.pareto.shape;
    let exponent = alpha * (1.0 - rho) / rho;
    let ratio = params.cost_index(InputSource::ForeignSubsidiary)
        / params.cost_index(InputSource::Domestic);
    let bracket = ratio.powf(params.prefs.cost_exponent()) - 1.0;
    let odds = params.tech.fixed_cost / params.tech.ofdi_fixed_cost;
    (bracket * odds).powf(exponent).clamp(0.0, 1.0)
}

/// The domestic cost level at which every entrant invests abroad.
pub fn saturation_threshold(params: &ModelParams) -> Result<f64> {
    let eta = params.tech.input_intensity;
    if eta == 0.0 {
        return Err(Error::Domain(
            "saturation threshold is undefined when input intensity is zero".to_string(),
        ));
    }
    let rho = params.prefs.rho;
    let ratio =
        (1.0 + params.tech.ofdi_fixed_cost / params.tech.fixed_cost).powf((1.0 - rho) / rho);
    Ok((ratio * params.cost_index(InputSource::ForeignSubsidiary) - 1.0) / eta)
}

/// ∂P/∂δ: the marginal effect of the domestic input cost on the investment
/// probability. Zero when δ ≤ δ̃ and past saturation; strictly positive in
/// between.
pub fn marginal_effect_delta(params: &ModelParams) -> f64 {
    if params.costs.domestic <= params.costs.foreign || params.tech.input_intensity == 0.0 {
        return 0.0;
    }
    if let Ok(threshold) = saturation_threshold(params) {
        if params.costs.domestic >= threshold {
            return 0.0;
        }
    }
    let rho = params.prefs.rho;
    let alpha = params.pareto.shape;
    let eta = params.tech.input_intensity;
    let exponent = alpha * (1.0 - rho) / rho;
    let idx_foreign = params.cost_index(InputSource::ForeignSubsidiary);
    let idx_domestic = params.cost_index(InputSource::Domestic);
    let ratio = idx_foreign / idx_domestic;
    let bracket = ratio.powf(params.prefs.cost_exponent()) - 1.0;
    let odds = params.tech.fixed_cost / params.tech.ofdi_fixed_cost;
    alpha
        * odds.powf(exponent)
        * bracket.powf(exponent - 1.0)
        * ratio.powf(params.prefs.cost_exponent() - 1.0)
        * idx_foreign
        / (idx_domestic * idx_domestic)
        * eta
}

/// Jump in the investment probability as δ moves discretely from a level at
/// or below δ̃ to one above it: ΔP = P(δ_high) − P(δ_low) = P(δ_high).
pub fn discrete_jump(params: &ModelParams, delta_low: f64, delta_high: f64) -> Result<f64> {
    let foreign = params.costs.foreign;
    if delta_low > foreign {
        return Err(Error::Domain(format!(
            "low cost {delta_low} must not exceed the foreign cost {foreign}"
        )));
    }
    if delta_high <= foreign {
        return Err(Error::Domain(format!(
            "high cost {delta_high} must exceed the foreign cost {foreign}"
        )));
    }
    let mut shifted = *params;
    shifted.costs.domestic = delta_high;
    Ok(ofdi_probability(&shifted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// ρ=0.5, A=1, α=2, λ_m=1, η=1, δ=2, δ̃=1, f=f_I=1: entry at 12, OFDI at 24.
    fn reference_params() -> ModelParams {
        ModelParams::new(
            Preferences::new(0.5, 1.0).unwrap(),
            ParetoDist::new(1.0, 2.0).unwrap(),
            InputCosts::new(2.0, 1.0).unwrap(),
            FirmTechnology::new(1.0, 1.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    /// Probability-curve parameterization: α=2, ρ=0.5, δ̃=2, f=f_I=1.
    fn curve_params(eta: f64, delta: f64) -> ModelParams {
        ModelParams::new(
            Preferences::new(0.5, 1.0).unwrap(),
            ParetoDist::new(1.0, 2.0).unwrap(),
            InputCosts::new(delta, 2.0).unwrap(),
            FirmTechnology::new(eta, 1.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn random_valid_params(rng: &mut impl Rng) -> ModelParams {
        loop {
            let rho = rng.gen_range(0.2..0.8);
            let alpha_min = rho / (1.0 - rho);
            let params = ModelParams {
                prefs: Preferences {
                    rho,
                    demand_shifter: rng.gen_range(0.2..5.0),
                },
                pareto: ParetoDist {
                    scale: rng.gen_range(0.2..3.0),
                    shape: alpha_min + rng.gen_range(0.2..3.0),
                },
                costs: InputCosts {
                    domestic: rng.gen_range(0.0..4.0),
                    foreign: rng.gen_range(0.2..3.0),
                },
                tech: FirmTechnology {
                    input_intensity: rng.gen_range(0.1..4.0),
                    fixed_cost: rng.gen_range(0.2..3.0),
                    ofdi_fixed_cost: rng.gen_range(0.2..3.0),
                },
            };
            if params.validate().is_ok() {
                return params;
            }
        }
    }

    #[test]
    fn marginal_cost_direct_substitution() {
        let tech = FirmTechnology::new(1.0, 1.0, 1.0).unwrap();
        let costs = InputCosts::new(2.0, 1.0).unwrap();
        let c = marginal_cost(&tech, &costs, 1.0, InputSource::Domestic).unwrap();
        assert!((c - 3.0).abs() < 1e-15);

        let no_inputs = FirmTechnology::new(0.0, 1.0, 1.0).unwrap();
        let c = marginal_cost(&no_inputs, &costs, 3.0, InputSource::Domestic).unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-15);

        let heavy = FirmTechnology::new(2.0, 1.0, 1.0).unwrap();
        let c = marginal_cost(&heavy, &costs, 1.0, InputSource::ForeignSubsidiary).unwrap();
        assert!((c - 3.0).abs() < 1e-15);

        assert!(marginal_cost(&tech, &costs, 0.0, InputSource::Domestic).is_err());
    }

    #[test]
    fn price_is_markup_over_marginal_cost() {
        let prefs = Preferences::new(0.5, 1.0).unwrap();
        assert!((optimal_price(1.0, &prefs).unwrap() - 2.0).abs() < 1e-15);
        let prefs = Preferences::new(0.75, 1.0).unwrap();
        assert!((optimal_price(3.0, &prefs).unwrap() - 4.0).abs() < 1e-15);
        assert!(optimal_price(0.0, &prefs).is_err());
    }

    proptest::proptest! {
        #[test]
        fn markup_identity_holds_everywhere(
            rho in 0.01f64..0.99,
            cost in 1e-6f64..1e6,
        ) {
            let prefs = Preferences::new(rho, 1.0).unwrap();
            let price = optimal_price(cost, &prefs).unwrap();
            proptest::prop_assert!((price * rho - cost).abs() <= 1e-12 * cost);
        }
    }

    #[test]
    fn price_maximizes_profit_on_a_grid() {
        // Grid-search oracle: p ↦ (p − c)·A·p^(1/(ρ−1)) peaks at c/ρ.
        let prefs = Preferences::new(0.6, 2.5).unwrap();
        let c = 1.3;
        let objective = |p: f64| (p - c) * prefs.demand_shifter * p.powf(1.0 / (prefs.rho - 1.0));
        let p_star = optimal_price(c, &prefs).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut grid = c * 1.001;
        while grid < c * 10.0 {
            let v = objective(grid);
            if v > best.0 {
                best = (v, grid);
            }
            grid += c * 1e-4;
        }
        assert!(
            (best.1 - p_star).abs() < c * 2e-4,
            "grid argmax {} vs {}",
            best.1,
            p_star
        );
        assert!(objective(p_star) >= best.0 - 1e-12);
    }

    #[test]
    fn profit_worked_values() {
        let mut params = reference_params();
        // Gross profit at λ=1 is 1/12; net of the fixed cost: 1/12 − 1.
        let pi = profit(&params, 1.0, InputSource::Domestic).unwrap();
        assert!((pi - (1.0 / 12.0 - 1.0)).abs() < 1e-12, "pi = {pi}");
        // Zero exactly at the entry cutoff.
        let pi = profit(&params, 12.0, InputSource::Domestic).unwrap();
        assert!(pi.abs() < 1e-12);
        // Indifference at the OFDI cutoff: both profits equal 1 at λ=24.
        let pi0 = profit(&params, 24.0, InputSource::Domestic).unwrap();
        let pi1 = profit(&params, 24.0, InputSource::ForeignSubsidiary).unwrap();
        assert!((pi0 - 1.0).abs() < 1e-12);
        assert!((pi1 - 1.0).abs() < 1e-12);

        // Gross profit matches the price-optimization route.
        params.costs.domestic = 1.7;
        let lambda = 3.1;
        let c = marginal_cost(&params.tech, &params.costs, lambda, InputSource::Domestic).unwrap();
        let p = optimal_price(c, &params.prefs).unwrap();
        let direct = (p - c) * params.prefs.demand_shifter * p.powf(1.0 / (params.prefs.rho - 1.0));
        let via_formula =
            profit(&params, lambda, InputSource::Domestic).unwrap() + params.tech.fixed_cost;
        assert!((direct - via_formula).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn profit_limit_at_zero_productivity() {
        let params = reference_params();
        let pi0 = profit(&params, 1e-12, InputSource::Domestic).unwrap();
        let pi1 = profit(&params, 1e-12, InputSource::ForeignSubsidiary).unwrap();
        assert!((pi0 + params.tech.fixed_cost).abs() < 1e-9);
        assert!((pi1 + params.tech.fixed_cost + params.tech.ofdi_fixed_cost).abs() < 1e-9);
        assert!((pi1 - pi0 + params.tech.ofdi_fixed_cost).abs() < 1e-9);
    }

    #[test]
    fn entry_cutoff_worked_values() {
        let params = reference_params();
        assert!((entry_cutoff(&params) - 12.0).abs() < 1e-12);

        let mut higher_delta = params;
        higher_delta.costs.domestic = 3.0;
        assert!((entry_cutoff(&higher_delta) - 16.0).abs() < 1e-12);

        // At ρ = 0.5 the fixed-cost exponent is one, so scaling f by 4 scales λ̲ by 4.
        let mut scaled = params;
        scaled.tech.fixed_cost = 4.0;
        assert!((entry_cutoff(&scaled) - 48.0).abs() < 1e-12);
    }

    #[test]
    fn entry_cutoff_matches_bisection_on_profit() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let params = random_valid_params(&mut rng);
            let cut = entry_cutoff(&params);
            let root = crate::numerics::bisect(
                |l| profit(&params, l, InputSource::Domestic).unwrap(),
                cut * 1e-3,
                cut * 1e3,
                1e-12 * cut,
            )
            .unwrap();
            assert!(
                (root - cut).abs() < 1e-8 * cut,
                "cutoff {cut} vs root {root}"
            );
        }
    }

    #[test]
    fn ofdi_cutoff_worked_values() {
        // Bisection oracle on the indifference condition π₁(λ) = π₀(λ).
        let indifference_root = |params: &ModelParams| {
            crate::numerics::bisect(
                |l| {
                    profit(params, l, InputSource::ForeignSubsidiary).unwrap()
                        - profit(params, l, InputSource::Domestic).unwrap()
                },
                1e-6,
                1e6,
                1e-9,
            )
            .unwrap()
        };

        let params = reference_params();
        let cut = ofdi_cutoff(&params).unwrap();
        assert!((cut - 24.0).abs() < 1e-12);
        assert!((indifference_root(&params) - 24.0).abs() < 1e-7);

        let mut higher_delta = params;
        higher_delta.costs.domestic = 3.0;
        let cut = ofdi_cutoff(&higher_delta).unwrap();
        assert!((cut - 16.0).abs() < 1e-12, "cut = {cut}");
        assert!((indifference_root(&higher_delta) - 16.0).abs() < 1e-7);

        // Same spread against a higher foreign cost.
        let mut wide = params;
        wide.costs = InputCosts::new(3.0, 2.0).unwrap();
        let cut = ofdi_cutoff(&wide).unwrap();
        assert!((cut - 48.0).abs() < 1e-12, "cut = {cut}");
        assert!((indifference_root(&wide) - 48.0).abs() < 1e-6 * 48.0);

        let mut equal_costs = params;
        equal_costs.costs.domestic = 1.0;
        assert!(ofdi_cutoff(&equal_costs).is_none());
        equal_costs.costs.domestic = 0.5;
        assert!(ofdi_cutoff(&equal_costs).is_none());
    }

    #[test]
    fn cutoff_identities_over_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut n_ofdi = 0;
        for _ in 0..1000 {
            let params = random_valid_params(&mut rng);
            let entry = entry_cutoff(&params);
            let pi = profit(&params, entry, InputSource::Domestic).unwrap();
            assert!(
                pi.abs() <= 1e-9 * params.tech.fixed_cost,
                "entry identity: {pi}"
            );

            if let Some(star) = ofdi_cutoff(&params) {
                n_ofdi += 1;
                let pi0 = profit(&params, star, InputSource::Domestic).unwrap();
                let pi1 = profit(&params, star, InputSource::ForeignSubsidiary).unwrap();
                let tol = 1e-9 * (params.tech.fixed_cost + params.tech.ofdi_fixed_cost);
                assert!(
                    (pi1 - pi0).abs() <= tol,
                    "indifference identity: {}",
                    pi1 - pi0
                );

                // Sorting order below saturation.
                if let Ok(sat) = saturation_threshold(&params) {
                    if params.costs.domestic < sat {
                        assert!(star > entry, "star {star} entry {entry}");
                    }
                }
            }
        }
        assert!(
            n_ofdi > 100,
            "draws should exercise the OFDI branch, got {n_ofdi}"
        );
    }

    #[test]
    fn decisions_follow_the_sorting_pattern() {
        let params = reference_params();
        assert_eq!(decide(&params, 5.0).unwrap(), EntryOutcome::NoEntry);
        assert_eq!(decide(&params, 13.0).unwrap(), EntryOutcome::DomesticOnly);
        assert_eq!(decide(&params, 25.0).unwrap(), EntryOutcome::VerticalOfdi);
        assert!(decide(&params, -1.0).is_err());
    }

    #[test]
    fn past_saturation_entrants_invest_directly() {
        // δ above the saturation threshold (5 here): the investment cutoff
        // falls below the domestic entry margin and entry happens straight
        // into investing, with the zero-profit margin under foreign sourcing
        // (24 at these numbers) deciding entry.
        let params = curve_params(1.0, 5.5);
        let cut = cutoffs(&params);
        assert!((cut.entry - 24.0).abs() < 1e-12, "entry = {}", cut.entry);
        assert!(cut.ofdi.unwrap() < cut.entry);
        assert_eq!(decide(&params, 23.0).unwrap(), EntryOutcome::NoEntry);
        assert_eq!(decide(&params, 25.0).unwrap(), EntryOutcome::VerticalOfdi);
        assert!(profit(&params, 25.0, InputSource::ForeignSubsidiary).unwrap() > 0.0);
        assert!(profit(&params, 25.0, InputSource::Domestic).unwrap() < 0.0);
        assert_eq!(ofdi_probability(&params), 1.0);
    }

    #[test]
    fn decide_agrees_with_direct_profit_comparison() {
        // 10^6 random (params, λ) pairs against the brute-force rule
        // argmax{0, π₀(λ), π₁(λ)} with entry tie kept out of the market.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1_000_000 {
            let params = random_valid_params(&mut rng);
            let span = entry_cutoff(&params) * 4.0;
            let lambda = rng.gen_range(span * 1e-4..span);
            let outcome = decide(&params, lambda).unwrap();
            let pi0 = profit(&params, lambda, InputSource::Domestic).unwrap();
            let pi1 = profit(&params, lambda, InputSource::ForeignSubsidiary).unwrap();
            let expected = if pi0 < 0.0 && pi1 < 0.0 {
                EntryOutcome::NoEntry
            } else if pi1 > pi0 {
                EntryOutcome::VerticalOfdi
            } else {
                EntryOutcome::DomesticOnly
            };
            // Ties at the cutoffs are measure-zero; skip knife-edge draws where
            // the profit comparison sits inside floating-point noise.
            let scale = (pi0.abs() + pi1.abs()).max(1e-12);
            if (pi1 - pi0).abs() < 1e-11 * scale || pi0.max(pi1).abs() < 1e-11 * scale {
                continue;
            }
            assert_eq!(outcome, expected, "params {params:?}, lambda {lambda}");
        }
    }

    #[test]
    fn probability_worked_values() {
        assert!((ofdi_probability(&curve_params(1.0, 3.5)) - 0.25).abs() < 1e-12);
        assert_eq!(ofdi_probability(&curve_params(1.0, 2.0)), 0.0);
        assert!((ofdi_probability(&curve_params(2.0, 3.0)) - 0.16).abs() < 1e-12);
        // Closed form reduces to (η(δ−δ̃)/(1+ηδ̃))² at ρ=0.5, α=2.
        let direct = (2.0f64 * (3.0 - 2.0) / (1.0 + 2.0 * 2.0)).powi(2);
        assert!((ofdi_probability(&curve_params(2.0, 3.0)) - direct).abs() < 1e-12);
        // Zero intensity kills the channel.
        let mut eta0 = curve_params(1.0, 3.5);
        eta0.tech.input_intensity = 0.0;
        assert_eq!(ofdi_probability(&eta0), 0.0);
    }

    #[test]
    fn probability_is_monotone_and_saturates() {
        for &eta in &[1.0, 2.0, 10.0] {
            let sat = saturation_threshold(&curve_params(eta, 3.0)).unwrap();
            let mut last = -1.0;
            for i in 0..=1000 {
                let delta = 6.0 * i as f64 / 1000.0;
                let p = ofdi_probability(&curve_params(eta, delta));
                assert!((0.0..=1.0).contains(&p));
                assert!(p >= last - 1e-15, "eta {eta}, delta {delta}");
                if delta <= 2.0 {
                    assert_eq!(p, 0.0);
                }
                if delta >= sat {
                    assert_eq!(p, 1.0);
                }
                last = p;
            }
            // Continuity at the kink from above.
            let just_above = ofdi_probability(&curve_params(eta, 2.0 + 1e-9));
            assert!(just_above < 1e-12);
        }
    }

    #[test]
    fn probability_increases_with_input_intensity() {
        for i in 1..100 {
            let delta = 2.0 + 2.4 * i as f64 / 100.0;
            let lo = ofdi_probability(&curve_params(1.0, delta));
            let hi = ofdi_probability(&curve_params(2.0, delta));
            if hi < 1.0 {
                assert!(hi > lo, "delta {delta}: {hi} vs {lo}");
            }
        }
    }

    #[test]
    fn saturation_threshold_worked_values() {
        // Smallest δ on a fine grid where the closed form reaches one.
        let grid_first_saturated = |eta: f64| -> f64 {
            let mut i = 0;
            loop {
                let delta = i as f64 * 1e-4;
                if ofdi_probability(&curve_params(eta, delta)) >= 1.0 {
                    return delta;
                }
                i += 1;
            }
        };
        for &(eta, expected) in &[(1.0, 5.0), (2.0, 4.5), (10.0, 4.1)] {
            let threshold = saturation_threshold(&curve_params(eta, 3.0)).unwrap();
            assert!(
                (threshold - expected).abs() < 1e-12,
                "eta {eta}: {threshold}"
            );
            assert!((grid_first_saturated(eta) - expected).abs() < 1.1e-4);
        }
        let mut eta0 = curve_params(1.0, 3.0);
        eta0.tech.input_intensity = 0.0;
        assert!(saturation_threshold(&eta0).is_err());
    }

    #[test]
    fn marginal_effect_worked_values() {
        let me = marginal_effect_delta(&curve_params(1.0, 3.5));
        assert!((me - 1.0 / 3.0).abs() < 1e-12, "me = {me}");
        assert_eq!(marginal_effect_delta(&curve_params(1.0, 1.5)), 0.0);
        assert_eq!(marginal_effect_delta(&curve_params(1.0, 5.5)), 0.0);
    }

    #[test]
    fn marginal_effect_matches_finite_difference() {
        let h = 1e-6;
        for &(eta, delta) in &[(1.0, 3.5), (2.0, 3.0), (1.0, 2.5), (10.0, 3.9), (2.0, 4.4)] {
            let me = marginal_effect_delta(&curve_params(eta, delta));
            let fd = (ofdi_probability(&curve_params(eta, delta + h))
                - ofdi_probability(&curve_params(eta, delta - h)))
                / (2.0 * h);
            assert!(
                (me - fd).abs() <= 1e-6 * fd.abs().max(1e-9),
                "eta {eta}, delta {delta}: closed {me} vs fd {fd}"
            );
            assert!(me > 0.0);
        }
    }

    #[test]
    fn discrete_jump_worked_values() {
        let params = curve_params(1.0, 3.5);
        let jump = discrete_jump(&params, 1.5, 3.5).unwrap();
        assert!((jump - 0.25).abs() < 1e-12);

        // Continuity from above at the kink.
        let tiny = discrete_jump(&params, 2.0, 2.0 + 1e-12).unwrap();
        assert!(tiny < 1e-12);

        // More input-intensive firms jump further.
        let jump_heavy = discrete_jump(&curve_params(2.0, 3.5), 1.5, 3.5).unwrap();
        assert!((jump_heavy - 0.36).abs() < 1e-12);
        assert!(jump_heavy > jump);

        // Ordering violations.
        assert!(discrete_jump(&params, 2.5, 3.5).is_err());
        assert!(discrete_jump(&params, 1.5, 2.0).is_err());
    }

    #[test]
    fn rejects_shape_below_integrability_bound() {
        let res = ModelParams::new(
            Preferences::new(0.7, 1.0).unwrap(),
            // ρ/(1−ρ) = 2.333…; shape 2 violates the bound even though the
            // looser (1−ρ)/ρ condition would accept it.
            ParetoDist::new(1.0, 2.0).unwrap(),
            InputCosts::new(2.0, 1.0).unwrap(),
            FirmTechnology::new(1.0, 1.0, 1.0).unwrap(),
        );
        assert!(res.is_err());
    }
}
