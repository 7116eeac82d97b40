//! End-to-end maximization of `x^T Q x + q^T x` over the reachable values of
//! `x_{k+1} = A x_k + b`, `x_0` in a polytope.
//!
//! The affine system is first shifted to its fixed point, which leaves a linear
//! system, a modified linear term and a constant offset. The value sequence
//! `nu_k` is then scanned for a positive term, after which the spectral
//! stopping rank bounds the number of further terms to inspect. Each strict
//! improvement of the incumbent tightens that rank.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bounds::{build_spectral_data, corollary_one_holds, k_diag, EnvelopeSummary};
use crate::error::{Error, Result};
use crate::geometry::{translate, vertices, Polytope, VertexList};
use crate::linalg::{eig_decompose, spectral_radius_check};
use crate::par::{self, Execution};
use crate::qpcore::{
    classify, maximize_concave_qp, maximize_convex_vertices_with, step, ObjectiveClass, QpOptions, QuadraticObjective,
    SteppedObjective, TOL_PSD,
};

pub const DEFAULT_N: usize = 100;
/// `I - A` with a larger condition number is rejected by the affine reduction.
pub const MAX_SHIFT_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub q_mat: DMatrix<f64>,
    pub q_vec: DVector<f64>,
    pub x_in: Polytope,
    /// Number of ranks visited while looking for a positive term.
    pub n_cap: usize,
}

impl ProblemInstance {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        q_mat: DMatrix<f64>,
        q_vec: DVector<f64>,
        x_in: Polytope,
        n_cap: usize,
    ) -> Result<Self> {
        let inst = Self { a, b, q_mat, q_vec, x_in, n_cap };
        inst.validate()?;
        Ok(inst)
    }

    /// `b = 0`, `N = 100`.
    pub fn linear(a: DMatrix<f64>, q_mat: DMatrix<f64>, q_vec: DVector<f64>, x_in: Polytope) -> Result<Self> {
        let d = a.nrows();
        Self::new(a, DVector::zeros(d), q_mat, q_vec, x_in, DEFAULT_N)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_linear(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_square() {
            return Err(Error::NonSquare { rows: self.a.nrows(), cols: self.a.ncols() });
        }
        let d = self.a.nrows();
        if d == 0 {
            return Err(Error::InvalidInstance("dimension must be positive".into()));
        }
        if self.b.len() != d
            || self.q_mat.nrows() != d
            || self.q_mat.ncols() != d
            || self.q_vec.len() != d
            || self.x_in.dim() != d
        {
            return Err(Error::DimensionMismatch(format!(
                "A is {d}x{d}, b has length {}, Q is {}x{}, q has length {}, initial set has dimension {}",
                self.b.len(),
                self.q_mat.nrows(),
                self.q_mat.ncols(),
                self.q_vec.len(),
                self.x_in.dim()
            )));
        }
        let finite = self.a.iter().chain(self.b.iter()).chain(self.q_mat.iter()).chain(self.q_vec.iter());
        if finite.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("non-finite entries".into()));
        }
        if self.n_cap == 0 {
            return Err(Error::InvalidInstance("N must be positive".into()));
        }
        self.x_in.validate()
    }
}

/// The instance after the shift `y = x - b_tilde`, `b_tilde = (I - A)^{-1} b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedInstance {
    pub a: DMatrix<f64>,
    pub q_mat: DMatrix<f64>,
    /// `2 Q b_tilde + q`.
    pub q_vec_reduced: DVector<f64>,
    /// `X_in - b_tilde`.
    pub x_work: Polytope,
    /// `b_tilde^T Q b_tilde + q^T b_tilde`.
    pub offset: f64,
    pub b_tilde: DVector<f64>,
}

impl ReducedInstance {
    pub fn objective(&self) -> Result<QuadraticObjective> {
        QuadraticObjective::new(self.q_mat.clone(), self.q_vec_reduced.clone(), 0.0)
    }
}

pub fn reduce_affine(inst: &ProblemInstance) -> Result<ReducedInstance> {
    inst.validate()?;
    let d = inst.dim();
    let q_mat = (&inst.q_mat + inst.q_mat.transpose()) * 0.5;
    if inst.is_linear() {
        return Ok(ReducedInstance {
            a: inst.a.clone(),
            q_mat,
            q_vec_reduced: inst.q_vec.clone(),
            x_work: inst.x_in.clone(),
            offset: 0.0,
            b_tilde: DVector::zeros(d),
        });
    }
    let shift = DMatrix::identity(d, d) - &inst.a;
    let sv = shift.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    if !condition.is_finite() || condition > MAX_SHIFT_CONDITION {
        return Err(Error::SingularShift { condition });
    }
    let b_tilde = shift.lu().solve(&inst.b).ok_or(Error::SingularShift { condition })?;
    let qb = &q_mat * &b_tilde;
    Ok(ReducedInstance {
        a: inst.a.clone(),
        q_vec_reduced: 2.0 * &qb + &inst.q_vec,
        x_work: translate(&inst.x_in, b_tilde.as_slice())?,
        offset: b_tilde.dot(&qb) + inst.q_vec.dot(&b_tilde),
        b_tilde,
        q_mat,
    })
}

/// Maximizes one stepped objective over the working set.
struct Maximizer<'a> {
    class: ObjectiveClass,
    x_work: &'a Polytope,
    verts: Option<VertexList>,
    qp: QpOptions,
    exec: Execution,
}

impl<'a> Maximizer<'a> {
    fn new(class: ObjectiveClass, x_work: &'a Polytope, qp: QpOptions, exec: Execution) -> Result<Self> {
        let verts = match class {
            ObjectiveClass::ConvexPSD => Some(vertices(x_work)?),
            ObjectiveClass::StrictlyConcaveND => {
                if matches!(x_work, Polytope::VRep { .. }) {
                    return Err(Error::UnsupportedObjective("concave objectives need a box initial set".into()));
                }
                None
            }
            ObjectiveClass::Unsupported => {
                return Err(Error::UnsupportedObjective("Q is neither PSD nor negative definite".into()))
            }
        };
        Ok(Self { class, x_work, verts, qp, exec })
    }

    fn maximize(&self, f: &SteppedObjective) -> Result<(f64, DVector<f64>)> {
        match &self.verts {
            Some(v) => maximize_convex_vertices_with(f, v, self.exec),
            None => {
                debug_assert_eq!(self.class, ObjectiveClass::StrictlyConcaveND);
                maximize_concave_qp(f, self.x_work, &self.qp)
            }
        }
    }
}

/// `nu_k` and a maximizing initial point, both in reduced coordinates (no offset).
pub fn nu_at(red: &ReducedInstance, k: usize, class: ObjectiveClass, qp: &QpOptions) -> Result<(f64, DVector<f64>)> {
    let f = step(&red.objective()?, &red.a, k)?;
    Maximizer::new(class, &red.x_work, *qp, Execution::default())?.maximize(&f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// No positive term among the first `N + 1`.
    Failed,
    /// The first term reaches the spectral envelope.
    CorollaryOne,
    /// Solved by the stopping-rank loop (or a trivial case).
    KDiag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Optimal value including the affine offset; `None` when failed.
    pub nu_opt: Option<f64>,
    /// Maximizing initial state in original coordinates; `None` when failed or
    /// when the supremum is not attained.
    pub x_opt: Option<Vec<f64>>,
    pub k_opt: Option<usize>,
    /// First evaluated rank with a positive term.
    pub k_pos: Option<usize>,
    /// Whether the positivity screen certified `nu_0 > 0` up front.
    pub k_pos_certified: bool,
    /// `(rank, K)` at every computation of the stopping rank.
    #[serde(rename = "K_trace")]
    pub k_trace: Vec<(usize, usize)>,
    /// Number of evaluated terms.
    pub iterations: usize,
    #[serde(rename = "N")]
    pub n_cap: usize,
    /// Evaluated terms `nu_0, nu_1, ...` in reduced coordinates (offset excluded).
    pub nu_values: Vec<f64>,
    pub offset: f64,
    pub envelope: Option<EnvelopeSummary>,
}

impl SolveReport {
    pub fn initial_k(&self) -> Option<usize> {
        self.k_trace.first().map(|&(_, k)| k)
    }

    pub fn final_k(&self) -> Option<usize> {
        self.k_trace.last().map(|&(_, k)| k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Terms `<= positivity_margin` count as non-positive in the positivity scan.
    pub positivity_margin: f64,
    pub qp: QpOptions,
    pub exec: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { positivity_margin: 0.0, qp: QpOptions::default(), exec: Execution::default() }
    }
}

pub fn solve(inst: &ProblemInstance) -> Result<SolveReport> {
    solve_with(inst, &SolverOptions::default())
}

pub fn solve_with(inst: &ProblemInstance, opts: &SolverOptions) -> Result<SolveReport> {
    inst.validate()?;
    let dec = eig_decompose(&inst.a)?;
    if !spectral_radius_check(&dec) {
        return Err(Error::NotConvergent { rho: dec.rho });
    }
    let base = QuadraticObjective::new(inst.q_mat.clone(), inst.q_vec.clone(), 0.0)?;
    let class = classify(&base);
    if class == ObjectiveClass::Unsupported {
        return Err(Error::UnsupportedObjective(
            "Q must be positive semi-definite and nonzero, or negative definite".into(),
        ));
    }
    let red = reduce_affine(inst)?;
    let maximizer = Maximizer::new(class, &red.x_work, opts.qp, opts.exec)?;
    let k_pos_certified = k_pos_screen(&red);

    let mut report = SolveReport {
        status: SolveStatus::KDiag,
        nu_opt: Some(red.offset),
        x_opt: None,
        k_opt: Some(0),
        k_pos: None,
        k_pos_certified,
        k_trace: Vec::new(),
        iterations: 0,
        n_cap: inst.n_cap,
        nu_values: Vec::new(),
        offset: red.offset,
        envelope: None,
    };

    // Every term vanishes: a single initial point, or a homogeneous concave objective.
    let origin_only = red.x_work.is_origin();
    let homogeneous_concave = class == ObjectiveClass::StrictlyConcaveND && red.q_vec_reduced.iter().all(|&x| x == 0.0);
    if origin_only || homogeneous_concave {
        if contains_origin(&red.x_work) {
            report.x_opt = Some(red.b_tilde.iter().copied().collect());
        }
        return Ok(report);
    }

    let sd = build_spectral_data(&dec, &red.q_mat, &red.q_vec_reduced, &red.x_work)?;
    report.envelope = Some(sd.summary());

    let mut f = step(&red.objective()?, &red.a, 0)?;
    let evaluate = |f: &SteppedObjective, report: &mut SolveReport| -> Result<(f64, DVector<f64>)> {
        let (nu, y) = maximizer.maximize(f)?;
        report.iterations += 1;
        report.nu_values.push(nu);
        if report.k_pos.is_none() && nu > 0.0 {
            report.k_pos = Some(f.k);
        }
        Ok((nu, y))
    };

    let (mut nu, mut y) = evaluate(&f, &mut report)?;
    let finish = |report: &mut SolveReport, nu: f64, y: &DVector<f64>, k: usize| {
        report.nu_opt = Some(nu + red.offset);
        report.x_opt = Some((y + &red.b_tilde).iter().copied().collect());
        report.k_opt = Some(k);
    };
    if corollary_one_holds(&sd, nu) {
        report.status = SolveStatus::CorollaryOne;
        finish(&mut report, nu, &y, 0);
        return Ok(report);
    }

    let mut k = 0;
    while k < inst.n_cap && nu <= opts.positivity_margin {
        k += 1;
        f.advance();
        (nu, y) = evaluate(&f, &mut report)?;
    }
    if nu <= opts.positivity_margin {
        report.status = SolveStatus::Failed;
        report.nu_opt = None;
        report.k_opt = None;
        return Ok(report);
    }

    let mut big_k = k_diag(&sd, nu)?;
    report.k_trace.push((k, big_k));
    let (mut nu_opt, mut y_opt, mut k_opt) = (nu, y, k);
    while k < big_k {
        k += 1;
        f.advance();
        let (nu_k, y_k) = evaluate(&f, &mut report)?;
        if nu_opt < nu_k {
            (nu_opt, y_opt, k_opt) = (nu_k, y_k, k);
            big_k = k_diag(&sd, nu_k)?;
            report.k_trace.push((k, big_k));
        }
    }
    finish(&mut report, nu_opt, &y_opt, k_opt);
    Ok(report)
}

fn contains_origin(p: &Polytope) -> bool {
    match p {
        Polytope::Box { lower, upper } => lower.iter().zip(upper).all(|(&l, &u)| l <= 0.0 && 0.0 <= u),
        Polytope::VRep { points } => points.len() == 1 && points[0].iter().all(|&x| x == 0.0),
    }
}

/// Maximum of `nu_k + offset` over `k = 0..=horizon` by direct evaluation.
///
/// Returns `(value, k, x)` with `x` in original coordinates; ties go to the
/// smallest rank.
pub fn brute_force(inst: &ProblemInstance, horizon: usize) -> Result<(f64, usize, DVector<f64>)> {
    brute_force_with(inst, horizon, &QpOptions::default(), Execution::default())
}

pub fn brute_force_with(
    inst: &ProblemInstance,
    horizon: usize,
    qp: &QpOptions,
    exec: Execution,
) -> Result<(f64, usize, DVector<f64>)> {
    let base = QuadraticObjective::new(inst.q_mat.clone(), inst.q_vec.clone(), 0.0)?;
    let class = classify(&base);
    let red = reduce_affine(inst)?;
    // Each rank gets its own maximizer on one thread; the ranks run in parallel.
    let maximizer = Maximizer::new(class, &red.x_work, *qp, Execution::Sequential)?;
    let mut steps = Vec::with_capacity(horizon + 1);
    steps.push(step(&red.objective()?, &red.a, 0)?);
    for k in 1..=horizon {
        let next = steps[k - 1].step_next();
        steps.push(next);
    }
    let results = par::map_indexed(exec, steps.len(), |k| maximizer.maximize(&steps[k]));
    let mut best: Option<(f64, usize, DVector<f64>)> = None;
    for (k, res) in results.into_iter().enumerate() {
        let (nu, y) = res?;
        if best.as_ref().is_none_or(|(b, _, _)| *b < nu) {
            best = Some((nu, k, y));
        }
    }
    let (nu, k, y) = best.expect("horizon range is never empty");
    Ok((nu + red.offset, k, y + &red.b_tilde))
}

/// Sufficient conditions for `nu_0 > 0` that need no optimization:
///
/// * `q = 0` and `Q` positive definite;
/// * `q = 0`, `Q` PSD and singular, and the set has nonempty interior;
/// * `q != 0`, `Q` PSD and the origin interior to the set.
///
/// `false` means inconclusive.
pub fn k_pos_screen(red: &ReducedInstance) -> bool {
    if red.x_work.validate().is_err() || red.x_work.is_origin() {
        return false;
    }
    let (lo, hi) = crate::linalg::symmetric_eigen_range(&red.q_mat);
    let psd = lo >= -TOL_PSD && hi > TOL_PSD;
    if !psd {
        return false;
    }
    let q_zero = red.q_vec_reduced.iter().all(|&x| x == 0.0);
    if q_zero {
        lo > TOL_PSD || has_interior(&red.x_work)
    } else {
        origin_in_interior(&red.x_work)
    }
}

fn has_interior(p: &Polytope) -> bool {
    match p {
        Polytope::Box { lower, upper } => lower.iter().zip(upper).all(|(l, u)| l < u),
        Polytope::VRep { points } => {
            let d = p.dim();
            if points.len() <= d {
                return false;
            }
            let diffs = DMatrix::from_fn(d, points.len() - 1, |i, j| points[j + 1][i] - points[0][i]);
            diffs.rank(1e-12 * (1.0 + diffs.amax())) == d
        }
    }
}

/// Only boxes are decided; vertex sets report `false`.
fn origin_in_interior(p: &Polytope) -> bool {
    match p {
        Polytope::Box { lower, upper } => lower.iter().zip(upper).all(|(&l, &u)| l < 0.0 && 0.0 < u),
        Polytope::VRep { .. } => false,
    }
}
