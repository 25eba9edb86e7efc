//! Shared oracle machinery for the integration suites: adaptive quadrature
//! (independent of every closed form it checks) and random valid parameter
//! generators.

use ofdi::market::{FirmTypeComponent, FirmTypeMixture, MarketConfig, SupplyCurve};
use ofdi::model::{FirmTechnology, InputCosts, ModelParams, Preferences};
use ofdi::numerics::ParetoDist;
use rand::Rng;

/// Adaptive Simpson quadrature with interval-halving error control.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, lm, m, left, 0.5 * tol, depth - 1)
            + recurse(f, m, rm, b, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    recurse(f, a, m, b, simpson(f, a, m, b), tol, 48)
}

/// Pareto density α λ_mᵅ λ^(−α−1).
pub fn pareto_density(dist: &ParetoDist, x: f64) -> f64 {
    if x < dist.scale {
        0.0
    } else {
        dist.shape * dist.scale.powf(dist.shape) * x.powf(-dist.shape - 1.0)
    }
}

/// ∫ over [lo, ∞) of `f` against the Pareto measure, via the substitution
/// λ = lo·eˢ with the upper limit chosen so the truncated tail is negligible
/// relative to `rel_tol`.
pub fn pareto_tail_integral<F: Fn(f64) -> f64>(
    dist: &ParetoDist,
    f: &F,
    lo: f64,
    decay: f64,
    rel_tol: f64,
) -> f64 {
    // The transformed integrand decays like e^(−decay·s); stop once the
    // remaining tail is far below the requested relative accuracy.
    let s_max = (27.6 / decay.max(1e-3)).max(30.0);
    let g = |s: f64| {
        let lambda = lo * s.exp();
        f(lambda) * pareto_density(dist, lambda) * lambda
    };
    adaptive_simpson(&g, 0.0, s_max, rel_tol * g(0.0).abs().max(1e-300))
}

/// A uniformly drawn valid model parameterization.
pub fn random_model_params<R: Rng>(rng: &mut R) -> ModelParams {
    loop {
        let rho = rng.gen_range(0.25..0.75);
        let shape = rho / (1.0 - rho) + rng.gen_range(0.2..3.0);
        let params = ModelParams {
            prefs: Preferences {
                rho,
                demand_shifter: rng.gen_range(0.3..4.0),
            },
            pareto: ParetoDist {
                scale: rng.gen_range(0.2..2.0),
                shape,
            },
            costs: InputCosts {
                domestic: rng.gen_range(0.0..4.0),
                foreign: rng.gen_range(0.3..3.0),
            },
            tech: FirmTechnology {
                input_intensity: rng.gen_range(0.1..4.0),
                fixed_cost: rng.gen_range(0.3..3.0),
                ofdi_fixed_cost: rng.gen_range(0.3..3.0),
            },
        };
        if params.validate().is_ok() {
            return params;
        }
    }
}

/// A random market whose pre-ban equilibrium sits near a chosen target cost,
/// with the ban shrinking supply by a random factor.
pub fn random_market<R: Rng>(rng: &mut R) -> Option<MarketConfig> {
    let rho = rng.gen_range(0.35..0.65);
    let shape = rho / (1.0 - rho) + rng.gen_range(0.3..2.5);
    let foreign_cost = rng.gen_range(1.0..3.0);
    let n_types = rng.gen_range(1..=3);
    let mut components = Vec::new();
    for _ in 0..n_types {
        components.push(FirmTypeComponent {
            tech: FirmTechnology {
                input_intensity: rng.gen_range(0.5..4.0),
                fixed_cost: rng.gen_range(0.5..2.0),
                ofdi_fixed_cost: rng.gen_range(0.5..2.0),
            },
            weight: 1.0,
        });
    }
    let total: f64 = components.iter().map(|c| c.weight).sum();
    for c in &mut components {
        c.weight /= total;
    }
    let mut market = MarketConfig {
        prefs: Preferences {
            rho,
            demand_shifter: rng.gen_range(0.5..2.0),
        },
        pareto: ParetoDist {
            scale: rng.gen_range(0.3..1.5),
            shape,
        },
        foreign_cost,
        mixture: FirmTypeMixture { components },
        supply: SupplyCurve {
            scale_allowed: 1.0,
            scale_banned: 1.0,
            elasticity: rng.gen_range(0.5..2.0),
        },
    };
    let target = rng.gen_range(0.3 * foreign_cost..2.0 * foreign_cost);
    let demand = ofdi::market::aggregate_demand(target, &market).ok()?;
    if demand <= 0.0 || demand.is_nan() {
        return None;
    }
    let s1 = demand / target.powf(market.supply.elasticity);
    market.supply.scale_allowed = s1;
    market.supply.scale_banned = s1 * rng.gen_range(0.3..1.0);
    market.validate().ok()?;
    Some(market)
}
