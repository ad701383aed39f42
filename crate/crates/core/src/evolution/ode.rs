//! Fixed-step RK4 flows of `x' = A(t)x`, with transition factors cached
//! between consecutive grid times.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Mat;

type GeneratorFn = dyn Fn(f64) -> Mat + Send + Sync;

/// Coefficient matrix `A(t)` of a linear system.
#[derive(Clone)]
pub enum Generator {
    Constant(Mat),
    TimeVarying {
        name: String,
        dim: usize,
        f: Arc<GeneratorFn>,
    },
}

impl Generator {
    pub fn time_varying(
        name: &str,
        dim: usize,
        f: impl Fn(f64) -> Mat + Send + Sync + 'static,
    ) -> Self {
        Generator::TimeVarying {
            name: name.to_string(),
            dim,
            f: Arc::new(f),
        }
    }

    /// `[[0, 1], [-1, 0]]`: the flow is rotation by `-(t - s)`.
    pub fn rotation() -> Self {
        Generator::Constant(Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]))
    }

    /// A 4×4 block-diagonal system split as 1 + 2 + 1: a contracting
    /// scalar, an expanding rotating 2×2 block and a slowly oscillating
    /// scalar. Coordinate projectors with blocks (1, 2, 1) are invariant.
    pub fn block_diagonal() -> Self {
        Self::time_varying("block-diagonal", 4, |t| {
            let mut a = Mat::zeros(4, 4);
            a[(0, 0)] = -1.0 - 0.5 * t.sin();
            a[(1, 1)] = 0.5;
            a[(1, 2)] = 1.0 + 0.2 * t.cos();
            a[(2, 1)] = -1.0;
            a[(2, 2)] = 0.5;
            a[(3, 3)] = 0.1 * t.cos();
            a
        })
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "rotation" => Some(Self::rotation()),
            "block-diagonal" => Some(Self::block_diagonal()),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Generator::Constant(a) => a.nrows(),
            Generator::TimeVarying { dim, .. } => *dim,
        }
    }

    pub fn at(&self, t: f64) -> Mat {
        match self {
            Generator::Constant(a) => a.clone(),
            Generator::TimeVarying { f, .. } => f(t),
        }
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Constant(a) => f.debug_tuple("Constant").field(a).finish(),
            Generator::TimeVarying { name, dim, .. } => f
                .debug_struct("TimeVarying")
                .field("name", name)
                .field("dim", dim)
                .finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub generator: Generator,
    pub step: f64,
}

impl GeneratorSpec {
    pub fn new(generator: Generator, step: f64) -> Self {
        Self { generator, step }
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }
}

pub(crate) struct OdeFlow {
    spec: GeneratorSpec,
    cache_times: Vec<f64>,
    /// `factors[i] = U(cache_times[i + 1], cache_times[i])`.
    factors: Vec<Mat>,
}

impl OdeFlow {
    pub(crate) fn new(spec: GeneratorSpec, cache_times: &[f64]) -> Result<Self> {
        if !(spec.step.is_finite() && spec.step > 0.0) {
            return Err(Error::Argument("integration step must be positive".into()));
        }
        let n = spec.dim();
        if n == 0 {
            return Err(Error::Argument("generator dimension must be positive".into()));
        }
        if cache_times.iter().any(|&t| !(t >= 0.0)) || cache_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Argument(
                "cache times must be nonnegative and strictly increasing".into(),
            ));
        }
        // Sample A on the cached window; it must be square, of the right size and finite.
        let end = cache_times.last().copied().unwrap_or(0.0);
        let samples = ((end / spec.step).ceil() as usize).clamp(1, 10_000);
        for i in 0..=samples {
            let t = end * i as f64 / samples as f64;
            let a = spec.generator.at(t);
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::Structural(format!(
                    "generator returned a {}x{} matrix at t={t}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::Argument(format!("generator is not finite at t={t}")));
            }
        }
        let mut flow = Self {
            spec,
            cache_times: cache_times.to_vec(),
            factors: Vec::new(),
        };
        flow.factors = flow
            .cache_times
            .windows(2)
            .map(|w| flow.integrate(w[1], w[0]))
            .collect();
        Ok(flow)
    }

    pub(crate) fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Solves `X' = A(τ)X`, `X(s) = I` up to `τ = t` with equal RK4 substeps
    /// no longer than the configured step.
    fn integrate(&self, t: f64, s: f64) -> Mat {
        let n = self.dim();
        let mut x = Mat::identity(n, n);
        if t <= s {
            return x;
        }
        let steps = ((t - s) / self.spec.step - 1e-9).ceil().max(1.0) as usize;
        let h = (t - s) / steps as f64;
        let a = |tau: f64| self.spec.generator.at(tau);
        for i in 0..steps {
            let tau = s + i as f64 * h;
            let k1 = a(tau) * &x;
            let k2 = a(tau + 0.5 * h) * (&x + &k1 * (0.5 * h));
            let k3 = a(tau + 0.5 * h) * (&x + &k2 * (0.5 * h));
            let k4 = a(tau + h) * (&x + &k3 * h);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        x
    }

    fn snap(&self, t: f64) -> Option<usize> {
        let eps = 1e-12 * t.abs().max(1.0);
        let i = self.cache_times.partition_point(|&c| c < t - eps);
        (i < self.cache_times.len() && (self.cache_times[i] - t).abs() <= eps).then_some(i)
    }

    pub(crate) fn evaluate(&self, t: f64, s: f64) -> Mat {
        let n = self.dim();
        if t == s {
            return Mat::identity(n, n);
        }
        // First cached time at or after s, last cached time at or before t.
        let first = self
            .snap(s)
            .unwrap_or_else(|| self.cache_times.partition_point(|&c| c < s));
        let last = match self.snap(t) {
            Some(i) => Some(i),
            None => self.cache_times.partition_point(|&c| c <= t).checked_sub(1),
        };
        match last {
            Some(last) if first < self.cache_times.len() && first <= last => {
                let g_first = self.cache_times[first];
                let g_last = self.cache_times[last];
                let mut u = if self.snap(s) == Some(first) {
                    Mat::identity(n, n)
                } else {
                    self.integrate(g_first, s)
                };
                for factor in &self.factors[first..last] {
                    u = factor * u;
                }
                if self.snap(t) != Some(last) {
                    u = self.integrate(t, g_last) * u;
                }
                u
            }
            _ => self.integrate(t, s),
        }
    }
}
