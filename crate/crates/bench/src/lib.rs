//! Fixtures shared by the benchmarks.

use tricho_core::grid::uniform_grid;
use tricho_core::{
    EvolutionOperator, ExampleRates, Generator, GeneratorSpec, GrowthRate, ProjectorFamily, RateSet,
};

/// The closed-form example with `u(t) = t + 1` and exponential rates `(1, 2, 0.5, 0.25)`.
pub fn nonuniform_example() -> (EvolutionOperator, ProjectorFamily, RateSet) {
    let rates = RateSet::exponential([1.0, 2.0, 0.5, 0.25]).expect("positive exponents");
    let family = ProjectorFamily::coordinate_split(1, 1, 1).expect("valid split");
    let ex = ExampleRates {
        u: GrowthRate::polynomial(1.0).expect("positive exponent"),
        h: rates.h.clone(),
        k: rates.k.clone(),
        mu: rates.mu.clone(),
        nu: rates.nu.clone(),
    };
    let op = EvolutionOperator::closed_form_example(&ex, &family).expect("example conditions hold");
    (op, family, rates)
}

/// The block-diagonal ODE flow with RK4 step `step`, cached on `[0, t_max]` at spacing 0.5.
pub fn block_flow(t_max: f64, step: f64) -> EvolutionOperator {
    let cache = uniform_grid(t_max, 0.5).expect("valid grid");
    EvolutionOperator::from_generator(GeneratorSpec::new(Generator::block_diagonal(), step), &cache)
        .expect("well-formed generator")
}

pub fn grid(t_max: f64) -> Vec<f64> {
    uniform_grid(t_max, 0.5).expect("valid grid")
}
