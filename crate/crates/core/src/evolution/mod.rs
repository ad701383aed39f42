//! Evolution operators `U(t, s)` on `Δ = {(t, s) : t ≥ s ≥ 0}`.
//!
//! An operator is a closed-form map, the flow of a linear ODE, or a
//! similarity transform of another operator. All of them satisfy
//! `U(t, t) = I` exactly and the cocycle law `U(t, t0) = U(t, s) U(s, t0)`
//! up to rounding (closed form) or integration error (ODE).

mod ode;

use std::fmt;
use std::sync::Arc;

pub use ode::{Generator, GeneratorSpec};

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::growth::GrowthRate;
use crate::linalg::{self, Mat};
use crate::projectors::ProjectorFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    OdeGenerated,
    Composed,
}

type Evaluator = dyn Fn(f64, f64) -> Result<Mat> + Send + Sync;

#[derive(Clone)]
pub struct EvolutionOperator {
    dim: usize,
    provenance: Provenance,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for EvolutionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvolutionOperator")
            .field("dim", &self.dim)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl EvolutionOperator {
    /// Wraps a closed-form evaluator. The evaluator is only called with `t > s ≥ 0`.
    pub fn closed_form(
        dim: usize,
        f: impl Fn(f64, f64) -> Result<Mat> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            provenance: Provenance::ClosedForm,
            eval: Arc::new(f),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::closed_form(dim, move |_, _| Ok(Mat::identity(dim, dim)))
    }

    /// The flow of `x' = A(t)x`, caching transition factors between
    /// consecutive `cache_times` so the cocycle law holds structurally on them.
    pub fn from_generator(spec: GeneratorSpec, cache_times: &[f64]) -> Result<Self> {
        let flow = Arc::new(ode::OdeFlow::new(spec, cache_times)?);
        let dim = flow.dim();
        Ok(Self {
            dim,
            provenance: Provenance::OdeGenerated,
            eval: Arc::new(move |t, s| Ok(flow.evaluate(t, s))),
        })
    }

    /// `Q U(t, s) Q⁻¹`: the same operator in coordinates changed by `q`.
    pub fn conjugate(&self, q: &Mat) -> Result<Self> {
        if q.nrows() != self.dim || q.ncols() != self.dim {
            return Err(Error::Structural("change of basis has the wrong shape".into()));
        }
        let q_inv = q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Argument("change of basis is singular".into()))?;
        let q = q.clone();
        let inner = self.clone();
        Ok(Self {
            dim: self.dim,
            provenance: Provenance::Composed,
            eval: Arc::new(move |t, s| Ok(&q * inner.evaluate(t, s)? * &q_inv)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether both handles share one evaluator.
    pub fn same_as(&self, other: &Self) -> bool {
        std::sync::Arc::ptr_eq(&self.eval, &other.eval)
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn evaluate(&self, t: f64, s: f64) -> Result<Mat> {
        if s.is_nan() || t.is_nan() || s < 0.0 || t < s {
            return Err(Error::Domain(format!(
                "(t, s) = ({t}, {s}) is outside Δ = {{t >= s >= 0}}"
            )));
        }
        if t == s {
            return Ok(Mat::identity(self.dim, self.dim));
        }
        let m = (self.eval)(t, s)?;
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::Structural(format!(
                "evaluator returned a {}x{} matrix, expected {}x{}",
                m.nrows(),
                m.ncols(),
                self.dim,
                self.dim
            )));
        }
        Ok(m)
    }

    /// The operator built from five growth rates `u, h, k, μ, ν` and a
    /// splitting `P1 + P2 + P3 = I`:
    ///
    /// ```text
    /// U(t,s) = u(s)/u(t) · ( h(s)/h(t) P1(s) + k(t)/k(s) P2(s) + μ(t)/μ(s) · ν(s)/ν(t) P3(s) )
    /// ```
    ///
    /// It is `(h, k, μ, ν)`-trichotomic with `N = u`, and not uniformly so
    /// whenever `u` is unbounded.
    pub fn closed_form_example(rates: &ExampleRates, family: &ProjectorFamily) -> Result<Self> {
        family.check_example_conditions()?;
        let rates = rates.clone();
        let family = family.clone();
        let dim = family.dim();
        Ok(Self::closed_form(dim, move |t, s| {
            let [p1, p2, p3] = family.at(s)?;
            let outer = rates.u.ratio(s, t)?;
            let c1 = rates.h.ratio(s, t)?;
            let c2 = rates.k.ratio(t, s)?;
            let c3 = rates.mu.ratio(t, s)? * rates.nu.ratio(s, t)?;
            Ok((p1 * c1 + p2 * c2 + p3 * c3) * outer)
        }))
    }
}

/// The five rates of the closed-form example operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRates {
    pub u: GrowthRate,
    pub h: GrowthRate,
    pub k: GrowthRate,
    pub mu: GrowthRate,
    pub nu: GrowthRate,
}

/// `(e1)`: `U(t, t) = I` at each of `times`.
pub fn check_identity(op: &EvolutionOperator, times: &[f64], tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("identity", tol);
    let eye = linalg::identity(op.dim());
    for &t in times {
        let u = op.evaluate(t, t)?;
        report.record("e1", linalg::spectral_norm(&(u - &eye)), Some((t, t)));
    }
    Ok(report.finish())
}

/// `(e2)`: worst `‖U(t,t0) − U(t,s)U(s,t0)‖ / max(1, ‖U(t,t0)‖)` over the triples.
pub fn check_cocycle(
    op: &EvolutionOperator,
    triples: &[(f64, f64, f64)],
    tol: f64,
) -> Result<CheckReport> {
    use rayon::prelude::*;

    for &(t, s, t0) in triples {
        if !(t >= s && s >= t0 && t0 >= 0.0) {
            return Err(Error::Argument(format!(
                "cocycle triple ({t}, {s}, {t0}) must satisfy t >= s >= t0 >= 0"
            )));
        }
    }
    let residuals = triples
        .par_iter()
        .map(|&(t, s, t0)| {
            let direct = op.evaluate(t, t0)?;
            let composed = op.evaluate(t, s)? * op.evaluate(s, t0)?;
            Ok(linalg::scaled_residual(&composed, &direct))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = CheckReport::new("cocycle", tol);
    if triples.is_empty() {
        report.record("e2", 0.0, None);
    }
    for (&(t, _, t0), r) in triples.iter().zip(residuals) {
        report.record("e2", r, Some((t, t0)));
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ordered_triples, uniform_grid};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn example(u: GrowthRate) -> EvolutionOperator {
        let rates = ExampleRates {
            u,
            h: GrowthRate::exponential(1.0).unwrap(),
            k: GrowthRate::exponential(2.0).unwrap(),
            mu: GrowthRate::exponential(0.5).unwrap(),
            nu: GrowthRate::exponential(0.25).unwrap(),
        };
        let family = ProjectorFamily::coordinate_split(1, 1, 1).unwrap();
        EvolutionOperator::closed_form_example(&rates, &family).unwrap()
    }

    #[test]
    fn identity_on_the_diagonal() {
        let op = example(GrowthRate::polynomial(1.0).unwrap());
        assert_eq!(op.evaluate(5.0, 5.0).unwrap(), Mat::identity(3, 3));
        assert_eq!(op.evaluate(0.0, 0.0).unwrap(), Mat::identity(3, 3));
    }

    #[test]
    fn outside_delta_is_a_domain_error() {
        let op = EvolutionOperator::identity(2);
        assert!(matches!(op.evaluate(1.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(op.evaluate(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn example_at_one_zero() {
        // u(t) = t + 1, so u(0)/u(1) = 1/2; the diagonal is
        // (e^{-1}/2, e^{2}/2, e^{0.5}e^{-0.25}/2).
        let op = example(GrowthRate::polynomial(1.0).unwrap());
        let m = op.evaluate(1.0, 0.0).unwrap();
        let expected = [0.18393972058572117, 3.694528049465325, 0.6420127083438707];
        for (i, e) in expected.iter().enumerate() {
            assert_relative_eq!(m[(i, i)], *e, max_relative = 1e-14);
        }
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn example_composes_exactly() {
        let op = example(GrowthRate::polynomial(1.0).unwrap());
        let direct = op.evaluate(2.0, 0.0).unwrap();
        let composed = op.evaluate(2.0, 1.0).unwrap() * op.evaluate(1.0, 0.0).unwrap();
        assert!(linalg::scaled_residual(&composed, &direct) <= 1e-12);

        let grid = [0.0, 1.0, 2.0, 4.0];
        let report = check_cocycle(&op, &ordered_triples(&grid), 1e-12).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn example_with_unit_inner_rates_is_scalar() {
        let one = GrowthRate::unit(100.0).unwrap();
        let rates = ExampleRates {
            u: GrowthRate::polynomial(1.0).unwrap(),
            h: one.clone(),
            k: one.clone(),
            mu: one.clone(),
            nu: one,
        };
        let family = ProjectorFamily::coordinate_split(1, 1, 1).unwrap();
        let op = EvolutionOperator::closed_form_example(&rates, &family).unwrap();
        let m = op.evaluate(3.0, 1.0).unwrap();
        let expected = Mat::identity(3, 3) * 0.5;
        assert!(linalg::spectral_norm(&(m - expected)) <= 1e-15);
    }

    #[test]
    fn example_with_unit_u_keeps_the_stable_coefficient() {
        let op = example(GrowthRate::unit(100.0).unwrap());
        let m = op.evaluate(1.0, 0.0).unwrap();
        assert_relative_eq!(m[(0, 0)], (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn example_rejects_non_orthogonal_family() {
        let p = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0]));
        let bad = ProjectorFamily::constant([p.clone(), p, Mat::identity(3, 3)]).unwrap();
        let rates = ExampleRates {
            u: GrowthRate::polynomial(1.0).unwrap(),
            h: GrowthRate::exponential(1.0).unwrap(),
            k: GrowthRate::exponential(1.0).unwrap(),
            mu: GrowthRate::exponential(1.0).unwrap(),
            nu: GrowthRate::exponential(1.0).unwrap(),
        };
        assert!(matches!(
            EvolutionOperator::closed_form_example(&rates, &bad),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn zero_generator_gives_identity() {
        let spec = GeneratorSpec::new(Generator::Constant(Mat::zeros(3, 3)), 0.1);
        let op = EvolutionOperator::from_generator(spec, &[0.0, 1.0]).unwrap();
        assert_eq!(op.evaluate(2.5, 0.3).unwrap(), Mat::identity(3, 3));
    }

    #[test]
    fn diagonal_generator_matches_exponentials() {
        let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 2.0, 0.25]));
        let spec = GeneratorSpec::new(Generator::Constant(a), 1e-3);
        let op = EvolutionOperator::from_generator(spec, &[0.0, 0.5, 1.0]).unwrap();
        let m = op.evaluate(1.0, 0.0).unwrap();
        let expected = [(-1.0f64).exp(), 2.0f64.exp(), 0.25f64.exp()];
        for (i, e) in expected.iter().enumerate() {
            assert!((m[(i, i)] - e).abs() <= 1e-8, "{} vs {}", m[(i, i)], e);
        }
    }

    #[test]
    fn rotation_by_pi_is_minus_identity() {
        let spec = GeneratorSpec::new(Generator::rotation(), 1e-3);
        let op = EvolutionOperator::from_generator(spec, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let m = op.evaluate(PI, 0.0).unwrap();
        assert!(linalg::spectral_norm(&(m + Mat::identity(2, 2))) <= 1e-6);

        let report = check_cocycle(&op, &[(PI, PI / 2.0, 0.0)], 1e-6).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn off_cache_queries_agree_with_direct_integration() {
        let spec = GeneratorSpec::new(Generator::block_diagonal(), 1e-3);
        let cached = EvolutionOperator::from_generator(spec.clone(), &uniform_grid(4.0, 0.5).unwrap())
            .unwrap();
        let bare = EvolutionOperator::from_generator(spec, &[]).unwrap();
        for &(t, s) in &[(3.3, 0.2), (2.0, 0.5), (3.75, 3.6), (4.2, 1.1)] {
            let a = cached.evaluate(t, s).unwrap();
            let b = bare.evaluate(t, s).unwrap();
            assert!(linalg::scaled_residual(&a, &b) <= 1e-9, "({t}, {s})");
        }
    }

    #[test]
    fn bad_step_and_malformed_triples() {
        let spec = GeneratorSpec::new(Generator::rotation(), 0.0);
        assert!(matches!(
            EvolutionOperator::from_generator(spec, &[0.0]),
            Err(Error::Argument(_))
        ));
        let op = EvolutionOperator::identity(2);
        assert!(check_cocycle(&op, &[(1.0, 2.0, 0.0)], 1e-12).is_err());
        let degenerate = check_cocycle(&op, &[(1.0, 1.0, 1.0)], 0.0).unwrap();
        assert_eq!(degenerate.worst(), 0.0);
    }

    #[test]
    fn identity_check() {
        let op = example(GrowthRate::polynomial(1.0).unwrap());
        let r = check_identity(&op, &[0.0, 3.0, 7.5], 0.0).unwrap();
        assert!(r.passed);
    }
}
