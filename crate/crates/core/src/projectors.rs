//! Projector families `P1, P2, P3`, their structural checks, and the
//! restricted inverses `V_j(t, s)` on `Range P_j(t)` for `j ∈ {2, 3}`.

use std::fmt;
use std::sync::Arc;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::evolution::EvolutionOperator;
use crate::linalg::{self, Mat, RANK_TOLERANCE};

type MemberFn = dyn Fn(f64) -> [Mat; 3] + Send + Sync;

#[derive(Clone)]
enum Members {
    Constant { mats: Arc<[Mat; 3]>, bases: Arc<[Mat; 3]> },
    Callback(Arc<MemberFn>),
}

/// Three time-dependent projectors on `R^n`.
#[derive(Clone)]
pub struct ProjectorFamily {
    dim: usize,
    members: Members,
}

impl fmt::Debug for ProjectorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.members {
            Members::Constant { .. } => "constant",
            Members::Callback(_) => "callback",
        };
        f.debug_struct("ProjectorFamily")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .finish()
    }
}

impl ProjectorFamily {
    pub fn constant(mats: [Mat; 3]) -> Result<Self> {
        let dim = mats[0].nrows();
        for (i, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Structural(format!(
                    "P{} is {}x{}, expected {dim}x{dim}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if dim == 0 {
            return Err(Error::Structural("projector dimension must be positive".into()));
        }
        let bases = [
            linalg::range_basis(&mats[0]),
            linalg::range_basis(&mats[1]),
            linalg::range_basis(&mats[2]),
        ];
        Ok(Self {
            dim,
            members: Members::Constant {
                mats: Arc::new(mats),
                bases: Arc::new(bases),
            },
        })
    }

    /// A family sampled through a callback. Members are never differentiated.
    pub fn callback(dim: usize, f: impl Fn(f64) -> [Mat; 3] + Send + Sync + 'static) -> Self {
        Self {
            dim,
            members: Members::Callback(Arc::new(f)),
        }
    }

    /// Diagonal coordinate projectors onto blocks of sizes `n1`, `n2`, `n3`.
    pub fn coordinate_split(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        let n = n1 + n2 + n3;
        Self::constant([
            linalg::coordinate_projector(n, 0..n1),
            linalg::coordinate_projector(n, n1..n1 + n2),
            linalg::coordinate_projector(n, n1 + n2..n),
        ])
    }

    /// `Q P_i(t) Q⁻¹` for each member.
    pub fn conjugate(&self, q: &Mat) -> Result<Self> {
        if q.nrows() != self.dim || q.ncols() != self.dim {
            return Err(Error::Structural("change of basis has the wrong shape".into()));
        }
        let q_inv = q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Argument("change of basis is singular".into()))?;
        match &self.members {
            Members::Constant { mats, .. } => Self::constant([
                q * &mats[0] * &q_inv,
                q * &mats[1] * &q_inv,
                q * &mats[2] * &q_inv,
            ]),
            Members::Callback(f) => {
                let f = f.clone();
                let q = q.clone();
                Ok(Self::callback(self.dim, move |t| {
                    let [a, b, c] = f(t);
                    [&q * a * &q_inv, &q * b * &q_inv, &q * c * &q_inv]
                }))
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether both handles share the same underlying members.
    pub fn same_as(&self, other: &Self) -> bool {
        match (&self.members, &other.members) {
            (Members::Constant { mats: a, .. }, Members::Constant { mats: b, .. }) => Arc::ptr_eq(a, b),
            (Members::Callback(a), Members::Callback(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.members, Members::Constant { .. })
    }

    pub fn at(&self, t: f64) -> Result<[Mat; 3]> {
        match &self.members {
            Members::Constant { mats, .. } => Ok((**mats).clone()),
            Members::Callback(f) => {
                let mats = f(t);
                for (i, m) in mats.iter().enumerate() {
                    if m.nrows() != self.dim || m.ncols() != self.dim {
                        return Err(Error::Structural(format!(
                            "P{}({t}) is {}x{}, expected {d}x{d}",
                            i + 1,
                            m.nrows(),
                            m.ncols(),
                            d = self.dim
                        )));
                    }
                }
                Ok(mats)
            }
        }
    }

    /// Member `index ∈ {1, 2, 3}` at time `t`.
    pub fn member(&self, index: usize, t: f64) -> Result<Mat> {
        let slot = member_slot(index)?;
        match &self.members {
            Members::Constant { mats, .. } => Ok(mats[slot].clone()),
            Members::Callback(_) => Ok(self.at(t)?[slot].clone()),
        }
    }

    /// Orthonormal basis of `Range P_index(t)`.
    pub fn range_basis(&self, index: usize, t: f64) -> Result<Mat> {
        let slot = member_slot(index)?;
        match &self.members {
            Members::Constant { bases, .. } => Ok(bases[slot].clone()),
            Members::Callback(_) => Ok(linalg::range_basis(&self.member(index, t)?)),
        }
    }

    pub fn norm_sum(&self, t: f64) -> Result<f64> {
        Ok(self.at(t)?.iter().map(linalg::spectral_norm).sum())
    }

    /// Conditions (i)–(ii) on the example operator's splitting: sum to `I`
    /// and `P_i(t) P_j(s) = δ_ij P_i(s)` for `t ≥ s`. Constant families only
    /// need the check at one time.
    pub(crate) fn check_example_conditions(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        let times: &[f64] = if self.is_constant() {
            &[0.0]
        } else {
            &[0.0, 0.5, 1.0, 2.0, 4.0]
        };
        let eye = linalg::identity(self.dim);
        for (a, &t) in times.iter().enumerate() {
            let pt = self.at(t)?;
            let sum = &pt[0] + &pt[1] + &pt[2];
            if linalg::spectral_norm(&(sum - &eye)) > TOL {
                return Err(Error::Precondition(format!(
                    "projectors do not sum to the identity at t={t}"
                )));
            }
            for &s in &times[..=a] {
                let ps = self.at(s)?;
                for i in 0..3 {
                    for j in 0..3 {
                        let expected = if i == j { ps[j].clone() } else { Mat::zeros(self.dim, self.dim) };
                        if linalg::spectral_norm(&(&pt[i] * &ps[j] - expected)) > TOL {
                            return Err(Error::Precondition(format!(
                                "P{}({t}) P{}({s}) violates the splitting conditions",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn member_slot(index: usize) -> Result<usize> {
    match index {
        1..=3 => Ok(index - 1),
        _ => Err(Error::Argument(format!("projector index must be 1, 2 or 3, got {index}"))),
    }
}

/// Idempotency and the two orthogonality conditions, worst case over `grid`.
pub fn check_orthogonal(family: &ProjectorFamily, grid: &[f64], tol: f64) -> Result<CheckReport> {
    if grid.is_empty() {
        return Err(Error::Argument("orthogonality grid is empty".into()));
    }
    let mut report = CheckReport::new("orthogonality", tol);
    let eye = linalg::identity(family.dim());
    for &t in grid {
        let p = family.at(t)?;
        for m in &p {
            report.record(
                "idempotency",
                linalg::spectral_norm(&(m * m - m)),
                Some((t, t)),
            );
        }
        report.record(
            "o1",
            linalg::spectral_norm(&(&p[0] + &p[1] + &p[2] - &eye)),
            Some((t, t)),
        );
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    report.record("o2", linalg::spectral_norm(&(&p[i] * &p[j])), Some((t, t)));
                }
            }
        }
    }
    Ok(report.finish())
}

/// Worst `‖U(t,s)P_i(s) − P_i(t)U(t,s)‖ / max(1, ‖U(t,s)‖)` per member.
pub fn check_invariance(
    family: &ProjectorFamily,
    op: &EvolutionOperator,
    pairs: &[(f64, f64)],
    tol: f64,
) -> Result<CheckReport> {
    use rayon::prelude::*;

    ensure_same_dim(family, op)?;
    let rows = pairs
        .par_iter()
        .map(|&(t, s)| {
            let u = op.evaluate(t, s)?;
            let ps = family.at(s)?;
            let pt = family.at(t)?;
            let scale = linalg::spectral_norm(&u).max(1.0);
            let r: Vec<f64> = (0..3)
                .map(|i| linalg::spectral_norm(&(&u * &ps[i] - &pt[i] * &u)) / scale)
                .collect();
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = CheckReport::new("invariance", tol);
    for (&(t, s), r) in pairs.iter().zip(rows) {
        for (i, v) in r.into_iter().enumerate() {
            report.record(&format!("P{}", i + 1), v, Some((t, s)));
        }
    }
    Ok(report.finish())
}

fn ensure_same_dim(family: &ProjectorFamily, op: &EvolutionOperator) -> Result<()> {
    if family.dim() != op.dim() {
        return Err(Error::Structural(format!(
            "projector family has dimension {} but the operator has dimension {}",
            family.dim(),
            op.dim()
        )));
    }
    Ok(())
}

/// `V_j(t, s) P_j(t)` given a precomputed `U(t, s)`.
///
/// With orthonormal bases `B_s` of `Range P_j(s)` and `B_t` of `Range P_j(t)`,
/// the restriction of `U(t, s)` is the square matrix `A = B_tᵀ U B_s`, and the
/// inverse is `B_s A⁻¹ B_tᵀ P_j(t)`.
pub(crate) fn restricted_inverse_with(
    u: &Mat,
    family: &ProjectorFamily,
    j: usize,
    t: f64,
    s: f64,
) -> Result<Mat> {
    if j != 2 && j != 3 {
        return Err(Error::Argument(format!("restricted inverses exist for j in {{2, 3}}, got {j}")));
    }
    let n = family.dim();
    let bs = family.range_basis(j, s)?;
    let bt = family.range_basis(j, t)?;
    let not_strong = |reason: String| Error::NotStronglyInvariant { index: j, t, s, reason };
    if bs.ncols() != bt.ncols() {
        return Err(not_strong(format!(
            "rank P(s) = {} differs from rank P(t) = {}",
            bs.ncols(),
            bt.ncols()
        )));
    }
    if bs.ncols() == 0 {
        return Ok(Mat::zeros(n, n));
    }
    let image = u * &bs;
    let a = bt.transpose() * &image;
    let leak = linalg::spectral_norm(&(&image - &bt * &a));
    if leak > 1e-8 * linalg::spectral_norm(&image).max(1.0) {
        return Err(not_strong(format!(
            "U(t,s) maps Range P(s) outside Range P(t) (residual {leak:e})"
        )));
    }
    let sv = linalg::singular_values(&a);
    let (lo, hi) = (sv.min(), sv.max());
    if !(hi > 0.0 && lo > RANK_TOLERANCE * hi) {
        return Err(not_strong(format!(
            "restriction is rank deficient (singular values {lo:e} .. {hi:e})"
        )));
    }
    let a_inv = a
        .try_inverse()
        .ok_or_else(|| not_strong("restriction is singular".into()))?;
    let pt = family.member(j, t)?;
    Ok(bs * a_inv * bt.transpose() * pt)
}

/// The map `V_j(t, s) P_j(t)`: the inverse of `U(t, s)` restricted to `Range P_j(s)`,
/// precomposed with `P_j(t)`.
pub fn compute_restricted_inverse(
    op: &EvolutionOperator,
    family: &ProjectorFamily,
    j: usize,
    t: f64,
    s: f64,
) -> Result<Mat> {
    ensure_same_dim(family, op)?;
    let u = op.evaluate(t, s)?;
    restricted_inverse_with(&u, family, j, t, s)
}

/// The inverse family `(t, s) ↦ V_j(t, s) P_j(t)` for one `j ∈ {2, 3}`.
#[derive(Debug, Clone)]
pub struct InverseFamily {
    j: usize,
    op: EvolutionOperator,
    family: ProjectorFamily,
}

impl InverseFamily {
    pub fn new(op: &EvolutionOperator, family: &ProjectorFamily, j: usize) -> Result<Self> {
        ensure_same_dim(family, op)?;
        if j != 2 && j != 3 {
            return Err(Error::Argument(format!("inverse family index must be 2 or 3, got {j}")));
        }
        Ok(Self {
            j,
            op: op.clone(),
            family: family.clone(),
        })
    }

    pub fn index(&self) -> usize {
        self.j
    }

    pub fn at(&self, t: f64, s: f64) -> Result<Mat> {
        compute_restricted_inverse(&self.op, &self.family, self.j, t, s)
    }
}

/// Residuals of `v2`–`v6` for an inverse family: `v2`, `v3`, `v5`, `v6` on
/// `pairs`, the inverse cocycle `v4` on `triples`.
pub fn check_inverse_properties(
    inv: &InverseFamily,
    pairs: &[(f64, f64)],
    triples: &[(f64, f64, f64)],
    tol: f64,
) -> Result<CheckReport> {
    use rayon::prelude::*;

    let j = inv.j;
    let family = &inv.family;
    let per_pair = pairs
        .par_iter()
        .map(|&(t, s)| {
            let u = inv.op.evaluate(t, s)?;
            let w = restricted_inverse_with(&u, family, j, t, s)?;
            let pt = family.member(j, t)?;
            let ps = family.member(j, s)?;
            let v2 = linalg::scaled_residual(&(&u * &w), &pt);
            let v3 = linalg::scaled_residual(&(&w * &u * &ps), &ps);
            let v5 = linalg::scaled_residual(&(&ps * &w), &w);
            let wtt = inv.at(t, t)?;
            let v6 = linalg::scaled_residual(&wtt, &pt)
                .max(linalg::scaled_residual(&(&pt * &wtt), &pt));
            Ok([v2, v3, v5, v6])
        })
        .collect::<Result<Vec<_>>>()?;
    let per_triple = triples
        .par_iter()
        .map(|&(t, s, t0)| {
            if !(t >= s && s >= t0) {
                return Err(Error::Argument(format!("triple ({t}, {s}, {t0}) is not ordered")));
            }
            let direct = inv.at(t, t0)?;
            let composed = inv.at(s, t0)? * inv.at(t, s)?;
            Ok(linalg::scaled_residual(&composed, &direct))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = CheckReport::new(&format!("inverse-properties-P{j}"), tol);
    for (&(t, s), r) in pairs.iter().zip(per_pair) {
        for (name, v) in ["v2", "v3", "v5", "v6"].iter().zip(r) {
            report.record(name, v, Some((t, s)));
        }
    }
    for (&(t, _, t0), r) in triples.iter().zip(per_triple) {
        report.record("v4", r, Some((t, t0)));
    }
    Ok(report.finish())
}

/// `P1` invariant and `P2`, `P3` strongly invariant on all grid pairs.
/// A failed strong-invariance test makes the report fail instead of erroring.
pub fn check_compatible(
    family: &ProjectorFamily,
    op: &EvolutionOperator,
    grid: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    if grid.is_empty() {
        return Err(Error::Argument("compatibility grid is empty".into()));
    }
    let pairs = crate::grid::delta_pairs(grid);
    let invariance = check_invariance(family, op, &pairs, tol)?;
    let mut report = CheckReport::new("compatibility", tol);
    for (member, label) in [("P1", "c1-invariance-P1"), ("P2", "c2-invariance-P2"), ("P3", "c2-invariance-P3")] {
        let worst = invariance
            .residuals
            .iter()
            .find(|r| r.condition == member)
            .cloned();
        if let Some(r) = worst {
            report.record(label, r.worst, r.at);
        }
    }
    for j in [2, 3] {
        let inv = InverseFamily::new(op, family, j)?;
        match check_inverse_properties(&inv, &pairs, &[], tol) {
            Ok(props) => {
                for name in ["v2", "v3"] {
                    if let Some(r) = props.residuals.iter().find(|r| r.condition == name) {
                        report.record(&format!("c2-{name}-P{j}"), r.worst, r.at);
                    }
                }
            }
            Err(e @ Error::NotStronglyInvariant { .. }) => report.fail(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    Ok(report.finish())
}
