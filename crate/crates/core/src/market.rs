//! The upstream intermediate-input market: per-firm input demand, kinked
//! aggregate demand averaged over a discrete mixture of firm types, an
//! isoelastic supply family whose scale drops when the raw-material import
//! ban is active, market clearing by bisection on excess demand, and the
//! classification of a ban experiment into one of three regimes depending on
//! where the equilibrium cost sits relative to the foreign sourcing cost.
//!
//! Demand is kinked at δ = δ̃: below it every entrant sources domestically;
//! above it the most productive entrants switch to their foreign subsidiaries
//! and domestic demand integrates only over the sourcing interval [λ̲, λ*].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    entry_cutoff, ofdi_cutoff, ofdi_probability, FirmTechnology, InputCosts, InputSource,
    ModelParams, Preferences,
};
use crate::numerics::{bisect, ParetoDist, DEFAULT_BISECT_TOL};

/// A weighted firm type in the demand mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmTypeComponent {
    pub tech: FirmTechnology,
    pub weight: f64,
}

/// Discrete distribution of firm technologies over which aggregate demand
/// and the market-level investment probability average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmTypeMixture {
    pub components: Vec<FirmTypeComponent>,
}

impl FirmTypeMixture {
    pub fn new(components: Vec<FirmTypeComponent>) -> Result<Self> {
        let m = FirmTypeMixture { components };
        m.validate()?;
        Ok(m)
    }

    /// A single firm type with unit weight.
    pub fn single(tech: FirmTechnology) -> Self {
        FirmTypeMixture {
            components: vec![FirmTypeComponent { tech, weight: 1.0 }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid(
                "mixture must have at least one component".to_string(),
            ));
        }
        let mut total = 0.0;
        for c in &self.components {
            c.tech.validate()?;
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(Error::invalid(format!(
                    "mixture weights must be positive, got {}",
                    c.weight
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "mixture weights must sum to 1, got {total}"
            )));
        }
        Ok(())
    }
}

/// Isoelastic supply family s·δ^γ. The import ban rotates the curve
/// counterclockwise by switching the scale from `scale_allowed` down to
/// `scale_banned`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupplyCurve {
    /// Scale with raw-material imports allowed, ≥ `scale_banned`.
    pub scale_allowed: f64,
    /// Scale under the import ban, > 0.
    pub scale_banned: f64,
    /// Price elasticity γ > 0.
    pub elasticity: f64,
}

impl SupplyCurve {
    pub fn new(scale_allowed: f64, scale_banned: f64, elasticity: f64) -> Result<Self> {
        let s = SupplyCurve {
            scale_allowed,
            scale_banned,
            elasticity,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_banned > 0.0) || !self.scale_banned.is_finite() {
            return Err(Error::invalid(format!(
                "banned supply scale must be positive, got {}",
                self.scale_banned
            )));
        }
        if !(self.scale_allowed >= self.scale_banned) || !self.scale_allowed.is_finite() {
            return Err(Error::invalid(format!(
                "allowed supply scale {} must be at least the banned scale {}",
                self.scale_allowed, self.scale_banned
            )));
        }
        if !(self.elasticity > 0.0) || !self.elasticity.is_finite() {
            return Err(Error::invalid(format!(
                "supply elasticity must be positive, got {}",
                self.elasticity
            )));
        }
        Ok(())
    }
}

/// Quantity supplied at unit cost `delta`; zero at zero in both policy states.
pub fn supply(delta: f64, curve: &SupplyCurve, ban_active: bool) -> f64 {
    let scale = if ban_active {
        curve.scale_banned
    } else {
        curve.scale_allowed
    };
    if delta <= 0.0 {
        0.0
    } else {
        scale * delta.powf(curve.elasticity)
    }
}

/// Full configuration of the intermediate-input market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub prefs: Preferences,
    pub pareto: ParetoDist,
    /// Foreign (subsidiary) unit cost δ̃.
    pub foreign_cost: f64,
    pub mixture: FirmTypeMixture,
    pub supply: SupplyCurve,
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        self.prefs.validate()?;
        self.pareto.validate()?;
        if !(self.foreign_cost > 0.0) || !self.foreign_cost.is_finite() {
            return Err(Error::invalid(format!(
                "foreign input cost must be positive, got {}",
                self.foreign_cost
            )));
        }
        self.mixture.validate()?;
        self.supply.validate()?;
        if self.pareto.shape <= self.prefs.profit_elasticity() {
            return Err(Error::invalid(format!(
                "Pareto shape {} must exceed rho/(1-rho) = {} for aggregate demand to converge",
                self.pareto.shape,
                self.prefs.profit_elasticity()
            )));
        }
        Ok(())
    }

    /// Assemble the single-firm parameterization at a domestic cost level.
    pub fn model_params(&self, delta: f64, tech: &FirmTechnology) -> ModelParams {
        ModelParams {
            prefs: self.prefs,
            pareto: self.pareto,
            costs: InputCosts {
                domestic: delta,
                foreign: self.foreign_cost,
            },
            tech: *tech,
        }
    }

    /// Mixture-weighted probability that an entrant invests abroad at `delta`.
    pub fn mixture_ofdi_probability(&self, delta: f64) -> f64 {
        self.components_weighted(|tech| ofdi_probability(&self.model_params(delta, tech)))
    }

    fn components_weighted<F: Fn(&FirmTechnology) -> f64>(&self, f: F) -> f64 {
        self.mixture
            .components
            .iter()
            .map(|c| c.weight * f(&c.tech))
            .sum()
    }
}

/// Market regimes of a ban experiment, by where the equilibrium cost sits
/// relative to the foreign cost before and after the ban.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Both equilibria at or below δ̃: the ban leaves investment at zero.
    Regime1,
    /// The ban pushes the cost from below δ̃ to above it.
    Regime2,
    /// Already above δ̃ before the ban.
    Regime3,
}

/// A market-clearing outcome for one policy state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Clearing unit cost δ*.
    pub delta_star: f64,
    /// Traded quantity at δ*.
    pub quantity: f64,
    /// Regime label; `None` for a single-policy solve.
    pub regime: Option<Regime>,
    /// Mixture-weighted investment probability at δ*.
    pub p_ofdi: f64,
}

/// Result of running the ban experiment on a market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub before: Equilibrium,
    pub after: Equilibrium,
    pub regime: Regime,
    /// Change in the mixture investment probability, floored at zero.
    pub delta_p_ofdi: f64,
}

/// A single firm's demand for intermediate inputs at its optimal scale:
/// ρ^(1/(1−ρ))·η·A·(1+η·cost)^(1/(ρ−1))·λ^(ρ/(1−ρ)).
pub fn firm_input_demand(
    prefs: &Preferences,
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
    let eta = tech.input_intensity;
    if eta == 0.0 {
        return Ok(0.0);
    }
    let rho = prefs.rho;
    let unit = match source {
        InputSource::Domestic => costs.domestic,
        InputSource::ForeignSubsidiary => costs.foreign,
    };
    Ok(rho.powf(1.0 / (1.0 - rho))
        * eta
        * prefs.demand_shifter
        * (1.0 + eta * unit).powf(1.0 / (rho - 1.0))
        * productivity.powf(prefs.profit_elasticity()))
}

/// Aggregate domestic input demand of one firm type when δ ≤ δ̃: every
/// entrant (λ ≥ λ̲) sources domestically. Pareto-aggregated in closed form
/// over a unit mass of potential entrants.
pub fn demand_m1(delta: f64, market: &MarketConfig, tech: &FirmTechnology) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!(
            "unit cost must be nonnegative, got {delta}"
        )));
    }
    if tech.input_intensity == 0.0 {
        return Ok(0.0);
    }
    let params = market.model_params(delta, tech);
    let entry = entry_cutoff(&params);
    let kernel = market.pareto.partial_moment(
        market.prefs.profit_elasticity(),
        entry.max(market.pareto.scale),
        f64::INFINITY,
    )?;
    Ok(per_entrant_prefactor(&params) * kernel)
}

/// Aggregate domestic input demand of one firm type when δ > δ̃: only firms
/// in the sourcing interval [λ̲, λ*] still buy domestically; the most
/// productive entrants have switched to their subsidiaries. Zero once the
/// interval is empty (full saturation).
pub fn demand_m2(delta: f64, market: &MarketConfig, tech: &FirmTechnology) -> Result<f64> {
    if delta <= market.foreign_cost {
        return Err(Error::Domain(format!(
            "kinked branch requires delta > foreign cost, got {delta} <= {}",
            market.foreign_cost
        )));
    }
    if tech.input_intensity == 0.0 {
        return Ok(0.0);
    }
    let params = market.model_params(delta, tech);
    let entry = entry_cutoff(&params).max(market.pareto.scale);
    let invest = match ofdi_cutoff(&params) {
        Some(v) => v,
        // Unreachable for δ > δ̃ with positive intensity; guard anyway.
        None => return Ok(0.0),
    };
    if invest <= entry {
        // Every entrant invests abroad; nobody sources domestically.
        return Ok(0.0);
    }
    let kernel = market
        .pareto
        .partial_moment(market.prefs.profit_elasticity(), entry, invest)?;
    Ok((per_entrant_prefactor(&params) * kernel).max(0.0))
}

/// ρ^(1/(1−ρ))·η·A·(1+ηδ)^(1/(ρ−1)): per-firm demand with the productivity
/// power factored out, for integration against the Pareto measure.
fn per_entrant_prefactor(params: &ModelParams) -> f64 {
    let rho = params.prefs.rho;
    rho.powf(1.0 / (1.0 - rho))
        * params.tech.input_intensity
        * params.prefs.demand_shifter
        * params
            .cost_index(InputSource::Domestic)
            .powf(1.0 / (rho - 1.0))
}

/// Mixture-weighted aggregate demand with the kink at δ = δ̃.
pub fn aggregate_demand(delta: f64, market: &MarketConfig) -> Result<f64> {
    let mut total = 0.0;
    for c in &market.mixture.components {
        let d = if delta <= market.foreign_cost {
            demand_m1(delta, market, &c.tech)?
        } else {
            demand_m2(delta, market, &c.tech)?
        };
        total += c.weight * d;
    }
    Ok(total)
}

/// Solve for the market-clearing cost under one policy state.
///
/// Excess demand is strictly decreasing (demand falls, supply rises), so the
/// crossing is unique. The initial bracket [1e−8, 10·δ̃] is expanded
/// geometrically (×10, at most 8 times) until it straddles the root; failure
/// to bracket is an error, never an extrapolation.
pub fn solve_equilibrium(market: &MarketConfig, ban_active: bool) -> Result<Equilibrium> {
    market.validate()?;
    let excess = |d: f64| match aggregate_demand(d, market) {
        Ok(dem) => dem - supply(d, &market.supply, ban_active),
        Err(_) => f64::NAN,
    };

    let lo = 1e-8;
    if !(aggregate_demand(lo, market)? > 0.0) {
        return Err(Error::invalid(
            "aggregate demand is zero near the origin; no market to clear".to_string(),
        ));
    }
    let mut hi = market.foreign_cost * 10.0;
    let mut expansions = 0;
    while excess(hi) > 0.0 {
        expansions += 1;
        if expansions > 8 {
            return Err(Error::NoSignChange { lo, hi });
        }
        hi *= 10.0;
    }

    let delta_star = bisect(excess, lo, hi, DEFAULT_BISECT_TOL)?;
    Ok(Equilibrium {
        delta_star,
        quantity: supply(delta_star, &market.supply, ban_active),
        regime: None,
        p_ofdi: market.mixture_ofdi_probability(delta_star),
    })
}

/// Run the ban experiment: solve with imports allowed, then banned, classify
/// the regime, and report the change in the investment probability.
pub fn policy_experiment(market: &MarketConfig) -> Result<PolicyOutcome> {
    let mut before = solve_equilibrium(market, false)?;
    let mut after = solve_equilibrium(market, true)?;
    let regime = if after.delta_star <= market.foreign_cost {
        Regime::Regime1
    } else if before.delta_star <= market.foreign_cost {
        Regime::Regime2
    } else {
        Regime::Regime3
    };
    before.regime = Some(regime);
    after.regime = Some(regime);
    let delta_p_ofdi = (after.p_ofdi - before.p_ofdi).max(0.0);
    Ok(PolicyOutcome {
        before,
        after,
        regime,
        delta_p_ofdi,
    })
}
