//! Stepped quadratic objectives `f_k(x) = (A^k x)^T Q (A^k x) + q^T A^k x + c`
//! and their maximization over the initial set.
//!
//! Convex objectives are maximized by enumerating vertices. Strictly concave
//! objectives go through a log-barrier interior-point method.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Polytope, VertexList};
use crate::linalg::{matrix_power_step, symmetric_eigen_range};
use crate::par::{self, Execution};

pub const TOL_SYMMETRIC: f64 = 1e-9;
pub const TOL_PSD: f64 = 1e-9;
pub const TOL_ND: f64 = 1e-9;
/// Feasibility tolerance of QP solutions.
pub const FEAS_TOL: f64 = 1e-9;
/// Constraints with slack below this (relative) are treated as active when polishing.
const ACTIVE_TOL: f64 = 1e-4;

/// `x^T Q x + q^T x + c` with `Q` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    pub q_mat: DMatrix<f64>,
    pub q_vec: DVector<f64>,
    pub c: f64,
}

impl QuadraticObjective {
    /// Symmetrizes `q_mat`; rejects asymmetry above `TOL_SYMMETRIC * (1 + max|Q|)`.
    pub fn new(q_mat: DMatrix<f64>, q_vec: DVector<f64>, c: f64) -> Result<Self> {
        if !q_mat.is_square() {
            return Err(Error::NonSquare { rows: q_mat.nrows(), cols: q_mat.ncols() });
        }
        if q_vec.len() != q_mat.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "Q is {0}x{0} but q has length {1}",
                q_mat.nrows(),
                q_vec.len()
            )));
        }
        if q_mat.iter().chain(q_vec.iter()).any(|x| !x.is_finite()) || !c.is_finite() {
            return Err(Error::InvalidInstance("objective has non-finite entries".into()));
        }
        let asym = (&q_mat - q_mat.transpose()).abs().max();
        if asym > TOL_SYMMETRIC * (1.0 + q_mat.abs().max()) {
            return Err(Error::InvalidInstance(format!("Q is not symmetric (asymmetry {asym:e})")));
        }
        let q_mat = (&q_mat + q_mat.transpose()) * 0.5;
        Ok(Self { q_mat, q_vec, c })
    }

    pub fn dim(&self) -> usize {
        self.q_vec.len()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.q_mat * x)) + self.q_vec.dot(x) + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveClass {
    ConvexPSD,
    StrictlyConcaveND,
    Unsupported,
}

/// Convex when `lambda_min(Q) >= -TOL_PSD`, strictly concave when
/// `lambda_max(Q) <= -TOL_ND`. `Q = 0` and indefinite `Q` are unsupported.
pub fn classify(obj: &QuadraticObjective) -> ObjectiveClass {
    let (lo, hi) = symmetric_eigen_range(&obj.q_mat);
    if hi <= -TOL_ND {
        ObjectiveClass::StrictlyConcaveND
    } else if lo >= -TOL_PSD && hi > TOL_PSD {
        ObjectiveClass::ConvexPSD
    } else {
        ObjectiveClass::Unsupported
    }
}

/// `f_k` with the power `A^k` and the pulled-back form cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppedObjective {
    pub base: QuadraticObjective,
    pub a: DMatrix<f64>,
    pub k: usize,
    power: DMatrix<f64>,
    /// `(A^k)^T Q A^k`, symmetrized.
    form: DMatrix<f64>,
    /// `(A^k)^T q`.
    lin: DVector<f64>,
}

impl SteppedObjective {
    fn from_power(base: QuadraticObjective, a: DMatrix<f64>, k: usize, power: DMatrix<f64>) -> Self {
        let form = power.transpose() * &base.q_mat * &power;
        let form = (&form + form.transpose()) * 0.5;
        let lin = power.transpose() * &base.q_vec;
        Self { base, a, k, power, form, lin }
    }

    pub fn power(&self) -> &DMatrix<f64> {
        &self.power
    }

    pub fn form(&self) -> &DMatrix<f64> {
        &self.form
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.lin
    }

    /// `f_{k+1}`, reusing the cached power.
    pub fn step_next(&self) -> Self {
        let power = matrix_power_step(&self.power, &self.a);
        Self::from_power(self.base.clone(), self.a.clone(), self.k + 1, power)
    }

    /// Advances to `f_{k+1}` in place.
    pub fn advance(&mut self) {
        self.power = matrix_power_step(&self.power, &self.a);
        self.k += 1;
        let form = self.power.transpose() * &self.base.q_mat * &self.power;
        self.form = (&form + form.transpose()) * 0.5;
        self.lin = self.power.transpose() * &self.base.q_vec;
    }

    /// `x^T M_k x + r_k^T x + c` using the cached pullback.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.form * x)) + self.lin.dot(x) + self.base.c
    }

    /// `(P x)^T Q (P x) + q^T (P x) + c` evaluated literally.
    pub fn value_direct(&self, x: &DVector<f64>) -> f64 {
        self.base.value(&(&self.power * x))
    }
}

pub fn step(obj: &QuadraticObjective, a: &DMatrix<f64>, k: usize) -> Result<SteppedObjective> {
    if a.nrows() != obj.dim() || a.ncols() != obj.dim() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but the objective has dimension {}",
            a.nrows(),
            a.ncols(),
            obj.dim()
        )));
    }
    let mut power = DMatrix::identity(obj.dim(), obj.dim());
    for _ in 0..k {
        power = matrix_power_step(&power, a);
    }
    Ok(SteppedObjective::from_power(obj.clone(), a.clone(), k, power))
}

/// Maximum of a convex `f` over a vertex list; ties go to the first vertex.
pub fn maximize_convex_vertices(f: &SteppedObjective, v: &VertexList) -> Result<(f64, DVector<f64>)> {
    maximize_convex_vertices_with(f, v, Execution::default())
}

pub fn maximize_convex_vertices_with(
    f: &SteppedObjective,
    v: &VertexList,
    exec: Execution,
) -> Result<(f64, DVector<f64>)> {
    if v.is_empty() {
        return Err(Error::EmptyVertexList);
    }
    if v.dim() != f.base.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional vertices for a {}-dimensional objective",
            v.dim(),
            f.base.dim()
        )));
    }
    let (value, idx) = par::argmax(exec, v.len(), |i| f.value(&v.point(i))).ok_or(Error::EmptyVertexList)?;
    Ok((value, v.point(idx)))
}

/// Linear inequality constraints `G x <= h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspaces {
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
}

impl Halfspaces {
    pub fn new(g: DMatrix<f64>, h: DVector<f64>) -> Result<Self> {
        if g.nrows() != h.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} constraint rows but {} right-hand sides",
                g.nrows(),
                h.len()
            )));
        }
        Ok(Self { g, h })
    }

    pub fn from_box(lower: &[f64], upper: &[f64]) -> Self {
        let d = lower.len();
        let mut g = DMatrix::zeros(2 * d, d);
        let mut h = DVector::zeros(2 * d);
        for i in 0..d {
            g[(i, i)] = 1.0;
            h[i] = upper[i];
            g[(d + i, i)] = -1.0;
            h[d + i] = -lower[i];
        }
        Self { g, h }
    }

    pub fn dim(&self) -> usize {
        self.g.ncols()
    }

    pub fn slack(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h - &self.g * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpOptions {
    /// Initial barrier weight.
    pub mu_start: f64,
    /// Geometric decrease factor of the barrier weight.
    pub mu_factor: f64,
    /// Stop once `m * mu` (the duality measure) falls below this.
    pub gap_tol: f64,
    /// Newton centering stops when `decrement^2 / 2` falls below this.
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        Self { mu_start: 1.0, mu_factor: 10.0, gap_tol: 1e-10, newton_tol: 1e-12, max_newton: 200 }
    }
}

/// Minimizes `1/2 x^T H x + b^T x` over `G x <= h` from a strictly feasible
/// start with a sequence of log-barrier problems.
///
/// `stop_early(x)` lets the phase-I driver bail out as soon as it has what it
/// needs.
fn barrier_minimize(
    hess: &DMatrix<f64>,
    lin: &DVector<f64>,
    cons: &Halfspaces,
    mut x: DVector<f64>,
    opts: &QpOptions,
    stop_early: &dyn Fn(&DVector<f64>) -> bool,
) -> Result<DVector<f64>> {
    let m = cons.h.len() as f64;
    let n = x.len();
    let psi = |x: &DVector<f64>, mu: f64| -> f64 {
        let s = cons.slack(x);
        if s.iter().any(|&si| si <= 0.0) {
            return f64::INFINITY;
        }
        0.5 * x.dot(&(hess * x)) + lin.dot(x) - mu * s.iter().map(|si| si.ln()).sum::<f64>()
    };

    let mut mu = opts.mu_start;
    loop {
        for _ in 0..opts.max_newton {
            let s = cons.slack(&x);
            let inv_s = s.map(|si| 1.0 / si);
            let grad = hess * &x + lin + cons.g.transpose() * &inv_s * mu;
            let weighted = DMatrix::from_fn(cons.g.nrows(), n, |i, j| cons.g[(i, j)] * inv_s[i]);
            let h_full = hess + weighted.transpose() * &weighted * mu;
            let dx = match Cholesky::new(h_full.clone()) {
                Some(ch) => -ch.solve(&grad),
                None => {
                    let reg = 1e-12 * (1.0 + h_full.abs().max());
                    let ch = Cholesky::new(h_full + DMatrix::identity(n, n) * reg)
                        .ok_or_else(|| Error::QpNotConverged("barrier Hessian is not positive definite".into()))?;
                    -ch.solve(&grad)
                }
            };
            let decrement_sq = -grad.dot(&dx);
            if decrement_sq / 2.0 <= opts.newton_tol {
                break;
            }
            let gdx = &cons.g * &dx;
            let mut t: f64 = 1.0;
            for i in 0..gdx.len() {
                if gdx[i] > 0.0 {
                    t = t.min(0.99 * s[i] / gdx[i]);
                }
            }
            let base = psi(&x, mu);
            let slope = grad.dot(&dx);
            let mut accepted = false;
            for _ in 0..60 {
                let trial = &x + &dx * t;
                if psi(&trial, mu) <= base + 0.25 * t * slope {
                    x = trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // No descent possible at machine precision; the point is centered.
                break;
            }
            if stop_early(&x) {
                return Ok(x);
            }
        }
        if stop_early(&x) || m * mu < opts.gap_tol {
            return Ok(x);
        }
        mu /= opts.mu_factor;
    }
}

/// Re-solves with the nearly active constraints held as equalities.
///
/// The barrier stops a distance of order `sqrt(gap)` from the boundary when
/// the unconstrained optimum touches it; the equality-constrained solve lands
/// on it exactly. The candidate is kept only if it is feasible and no worse.
fn polish_active_set(hess: &DMatrix<f64>, lin: &DVector<f64>, cons: &Halfspaces, x: DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let s = cons.slack(&x);
    let active: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= ACTIVE_TOL * (1.0 + cons.h[i].abs())).collect();
    let m = active.len();
    let mut kkt = DMatrix::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(hess);
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-lin));
    for (row, &i) in active.iter().enumerate() {
        for j in 0..n {
            kkt[(n + row, j)] = cons.g[(i, j)];
            kkt[(j, n + row)] = cons.g[(i, j)];
        }
        rhs[n + row] = cons.h[i];
    }
    let Some(sol) = kkt.lu().solve(&rhs) else {
        return x;
    };
    let cand = sol.rows(0, n).into_owned();
    let feasible = cons
        .slack(&cand)
        .iter()
        .zip(cons.h.iter())
        .all(|(&si, &hi)| si.is_finite() && si >= -FEAS_TOL * (1.0 + hi.abs()));
    let phi = |y: &DVector<f64>| 0.5 * y.dot(&(hess * y)) + lin.dot(y);
    if feasible && phi(&cand) <= phi(&x) {
        cand
    } else {
        x
    }
}

/// A strictly feasible point of `G x <= h`, or `Infeasible` when the set has
/// empty interior.
fn strictly_feasible_point(cons: &Halfspaces, opts: &QpOptions) -> Result<DVector<f64>> {
    let n = cons.dim();
    let x0 = DVector::zeros(n);
    if cons.slack(&x0).iter().all(|&s| s > 0.0) {
        return Ok(x0);
    }
    // min s  s.t.  G x - s <= h,  -s <= 1
    let m = cons.g.nrows();
    let mut g = DMatrix::zeros(m + 1, n + 1);
    g.view_mut((0, 0), (m, n)).copy_from(&cons.g);
    for i in 0..m {
        g[(i, n)] = -1.0;
    }
    g[(m, n)] = -1.0;
    let mut h = DVector::zeros(m + 1);
    h.rows_mut(0, m).copy_from(&cons.h);
    h[m] = 1.0;
    let aug = Halfspaces { g, h };

    let worst = (&cons.g * &x0 - &cons.h).max();
    let mut start = DVector::zeros(n + 1);
    start[n] = worst.max(0.0) + 1.0;
    let mut lin = DVector::zeros(n + 1);
    lin[n] = 1.0;
    let hess = DMatrix::zeros(n + 1, n + 1);
    let z = barrier_minimize(&hess, &lin, &aug, start, opts, &|z| z[n] < 0.0)?;
    if z[n] < 0.0 {
        Ok(z.rows(0, n).into_owned())
    } else {
        Err(Error::Infeasible)
    }
}

/// Maximum of a strictly concave `f` over a polytope given as a box.
///
/// Vertex-represented sets are rejected: the barrier needs inequalities.
pub fn maximize_concave_qp(f: &SteppedObjective, p: &Polytope, opts: &QpOptions) -> Result<(f64, DVector<f64>)> {
    if classify(&f.base) != ObjectiveClass::StrictlyConcaveND {
        return Err(Error::NotConcave);
    }
    p.validate().map_err(|_| Error::Infeasible)?;
    let (lower, upper) = match p {
        Polytope::Box { lower, upper } => (lower, upper),
        Polytope::VRep { .. } => {
            return Err(Error::UnsupportedObjective(
                "concave objectives need a box (constraint) representation of the initial set".into(),
            ))
        }
    };
    if lower.len() != f.base.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional box for a {}-dimensional objective",
            lower.len(),
            f.base.dim()
        )));
    }

    // Coordinates with lower == upper are fixed and eliminated.
    let d = lower.len();
    let free: Vec<usize> = (0..d).filter(|&i| lower[i] < upper[i]).collect();
    let mut x = DVector::from_fn(d, |i, _| if lower[i] < upper[i] { 0.0 } else { lower[i] });
    if !free.is_empty() {
        let nf = free.len();
        let form = f.form();
        let m_free = DMatrix::from_fn(nf, nf, |i, j| form[(free[i], free[j])]);
        let cross = form * &x;
        let r_free = DVector::from_fn(nf, |i, _| f.linear()[free[i]] + 2.0 * cross[free[i]]);
        let lo: Vec<f64> = free.iter().map(|&i| lower[i]).collect();
        let hi: Vec<f64> = free.iter().map(|&i| upper[i]).collect();
        let cons = Halfspaces::from_box(&lo, &hi);
        let start = DVector::from_fn(nf, |i, _| 0.5 * (lo[i] + hi[i]));
        let (hess, lin) = (-2.0 * m_free, -r_free);
        let z = barrier_minimize(&hess, &lin, &cons, start, opts, &|_| false)?;
        let z = polish_active_set(&hess, &lin, &cons, z);
        for (slot, &i) in free.iter().enumerate() {
            x[i] = z[slot].clamp(lower[i], upper[i]);
        }
    }
    Ok((f.value(&x), x))
}

/// Maximum of a strictly concave `f` over `{x : G x <= h}` (bounded, with
/// nonempty interior).
pub fn maximize_concave_qp_halfspaces(
    f: &SteppedObjective,
    cons: &Halfspaces,
    opts: &QpOptions,
) -> Result<(f64, DVector<f64>)> {
    if classify(&f.base) != ObjectiveClass::StrictlyConcaveND {
        return Err(Error::NotConcave);
    }
    if cons.dim() != f.base.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional constraints for a {}-dimensional objective",
            cons.dim(),
            f.base.dim()
        )));
    }
    let start = strictly_feasible_point(cons, opts)?;
    let (hess, lin) = (-2.0 * f.form(), -f.linear());
    let x = barrier_minimize(&hess, &lin, cons, start, opts, &|_| false)?;
    let x = polish_active_set(&hess, &lin, cons, x);
    Ok((f.value(&x), x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vertices;
    use nalgebra::{dmatrix, dvector};

    fn obj(q: DMatrix<f64>, lin: DVector<f64>) -> QuadraticObjective {
        QuadraticObjective::new(q, lin, 0.0).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&obj(DMatrix::identity(2, 2), dvector![0.0, 0.0])), ObjectiveClass::ConvexPSD);
        let q = dmatrix![1.0, -0.5; -0.5, 0.25];
        assert_eq!(classify(&obj(q, dvector![-1.0, 0.5])), ObjectiveClass::ConvexPSD);
        let q = dmatrix![1.0, 0.0; 0.0, -1.0];
        assert_eq!(classify(&obj(q, dvector![0.0, 0.0])), ObjectiveClass::Unsupported);
        assert_eq!(classify(&obj(DMatrix::zeros(2, 2), dvector![1.0, 0.0])), ObjectiveClass::Unsupported);
        let q = dmatrix![-1.0, 0.0; 0.0, 0.0];
        assert_eq!(classify(&obj(q, dvector![0.0, 0.0])), ObjectiveClass::Unsupported);
        let q = dmatrix![-1.0, 0.0; 0.0, -2.0];
        assert_eq!(classify(&obj(q, dvector![0.0, 0.0])), ObjectiveClass::StrictlyConcaveND);
    }

    #[test]
    fn asymmetric_q_rejected() {
        let q = dmatrix![1.0, 1.0; 0.0, 1.0];
        assert!(QuadraticObjective::new(q, dvector![0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn step_examples() {
        let base = obj(dmatrix![1.0], dvector![-1.0]);
        let a = dmatrix![0.5];
        let f0 = step(&base, &a, 0).unwrap();
        assert_eq!(f0.value(&dvector![0.3]), base.value(&dvector![0.3]));
        let f2 = step(&base, &a, 2).unwrap();
        for x in [0.25, 0.4, 0.5, -3.0] {
            let expected = x * x / 16.0 - x / 4.0;
            assert!((f2.value(&dvector![x]) - expected).abs() < 1e-15);
        }
        let base = obj(DMatrix::identity(2, 2), dvector![0.0, 0.0]);
        let f3 = step(&base, &(DMatrix::identity(2, 2) * 0.5), 3).unwrap();
        assert_eq!(f3.value(&dvector![1.0, 1.0]), 0.03125);
    }

    #[test]
    fn step_next_matches_direct_step() {
        let base = obj(dmatrix![2.0, 0.3; 0.3, 1.0], dvector![0.5, -1.0]);
        let a = dmatrix![0.6, 0.2; -0.3, 0.7];
        let mut f = step(&base, &a, 0).unwrap();
        for k in 1..=30 {
            f = f.step_next();
            let g = step(&base, &a, k).unwrap();
            let x = dvector![0.7, -1.3];
            assert!((f.value(&x) - g.value(&x)).abs() <= 1e-9 * (1.0 + g.value(&x).abs()));
            assert!((f.value(&x) - f.value_direct(&x)).abs() <= 1e-9 * (1.0 + f.value(&x).abs()));
        }
    }

    #[test]
    fn convex_vertex_examples() {
        let square = Polytope::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let v = vertices(&square).unwrap();
        let a = DMatrix::identity(2, 2);
        let f = step(&obj(DMatrix::identity(2, 2), dvector![0.0, 0.0]), &a, 0).unwrap();
        let (val, x) = maximize_convex_vertices(&f, &v).unwrap();
        assert_eq!(val, 2.0);
        assert_eq!(x, dvector![-1.0, -1.0]);

        let q = dmatrix![1.0, -0.5; -0.5, 0.25];
        let f = step(&obj(q, dvector![-1.0, 0.5]), &a, 0).unwrap();
        let (val, x) = maximize_convex_vertices(&f, &v).unwrap();
        assert_eq!(val, 3.75);
        assert_eq!(x, dvector![-1.0, 1.0]);

        let single = vertices(&Polytope::new_vrep(vec![vec![3.0]]).unwrap()).unwrap();
        let f = step(&obj(dmatrix![1.0], dvector![0.0]), &dmatrix![1.0], 0).unwrap();
        assert_eq!(maximize_convex_vertices(&f, &single).unwrap(), (9.0, dvector![3.0]));
    }

    #[test]
    fn empty_vertex_list() {
        let f = step(&obj(dmatrix![1.0], dvector![0.0]), &dmatrix![1.0], 0).unwrap();
        assert_eq!(maximize_convex_vertices(&f, &VertexList::Explicit(vec![])).unwrap_err(), Error::EmptyVertexList);
    }

    fn concave(q: DMatrix<f64>, lin: DVector<f64>) -> SteppedObjective {
        let d = lin.len();
        step(&obj(q, lin), &DMatrix::identity(d, d), 0).unwrap()
    }

    #[test]
    fn concave_interior_optimum() {
        let f = concave(dmatrix![-1.0], dvector![1.0]);
        let p = Polytope::new_box(vec![0.0], vec![1.0]).unwrap();
        let (v, x) = maximize_concave_qp(&f, &p, &QpOptions::default()).unwrap();
        assert!((v - 0.25).abs() < 1e-9);
        assert!((x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn concave_boundary_optimum() {
        let f = concave(dmatrix![-1.0], dvector![0.0]);
        let p = Polytope::new_box(vec![1.0], vec![2.0]).unwrap();
        let (v, x) = maximize_concave_qp(&f, &p, &QpOptions::default()).unwrap();
        assert!((v + 1.0).abs() < 1e-8);
        assert!((x[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn concave_two_dimensional() {
        let f = concave(-DMatrix::identity(2, 2), dvector![2.0, 0.0]);
        let p = Polytope::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let (v, x) = maximize_concave_qp(&f, &p, &QpOptions::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        assert!((x - dvector![1.0, 0.0]).amax() < 1e-9);
    }

    #[test]
    fn concave_with_fixed_coordinate() {
        // x fixed at 0.5: maximize -(x^2 + y^2) + 2y over y in [-1, 3] -> y = 1.
        let f = concave(-DMatrix::identity(2, 2), dvector![0.0, 2.0]);
        let p = Polytope::new_box(vec![0.5, -1.0], vec![0.5, 3.0]).unwrap();
        let (v, x) = maximize_concave_qp(&f, &p, &QpOptions::default()).unwrap();
        assert!((v - (1.0 - 0.25)).abs() < 1e-8);
        assert_eq!(x[0], 0.5);
        assert!((x[1] - 1.0).abs() < 1e-6);

        let point = Polytope::new_box(vec![0.5, 2.0], vec![0.5, 2.0]).unwrap();
        let (v, x) = maximize_concave_qp(&f, &point, &QpOptions::default()).unwrap();
        assert_eq!(x, dvector![0.5, 2.0]);
        assert_eq!(v, -(0.25 + 4.0) + 4.0);
    }

    #[test]
    fn concave_rejects_convex_and_vrep() {
        let f = concave(DMatrix::identity(1, 1), dvector![0.0]);
        let p = Polytope::new_box(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(maximize_concave_qp(&f, &p, &QpOptions::default()).unwrap_err(), Error::NotConcave);
        let f = concave(-DMatrix::identity(1, 1), dvector![1.0]);
        let v = Polytope::new_vrep(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(maximize_concave_qp(&f, &v, &QpOptions::default()).is_err());
    }

    #[test]
    fn concave_halfspaces_triangle() {
        // Triangle x >= 0, y >= 0, x + y <= 1; maximize 2 - (x-1)^2 - (y-1)^2 -> (0.5, 0.5), value 1.5.
        let f = concave(-DMatrix::identity(2, 2), dvector![2.0, 2.0]);
        let cons = Halfspaces::new(dmatrix![-1.0, 0.0; 0.0, -1.0; 1.0, 1.0], dvector![0.0, 0.0, 1.0]).unwrap();
        let (v, x) = maximize_concave_qp_halfspaces(&f, &cons, &QpOptions::default()).unwrap();
        assert!((x - dvector![0.5, 0.5]).amax() < 1e-6);
        assert!((v - 1.5).abs() < 1e-8);
    }

    #[test]
    fn halfspaces_phase_one_from_infeasible_origin() {
        // Box [2, 3] x [-5, -4]: the origin is infeasible.
        let f = concave(-DMatrix::identity(2, 2), dvector![0.0, 0.0]);
        let cons = Halfspaces::from_box(&[2.0, -5.0], &[3.0, -4.0]);
        let (v, x) = maximize_concave_qp_halfspaces(&f, &cons, &QpOptions::default()).unwrap();
        assert!((x - dvector![2.0, -4.0]).amax() < 1e-6);
        assert!((v + 20.0).abs() < 1e-7);
    }

    #[test]
    fn halfspaces_infeasible() {
        let f = concave(-DMatrix::identity(1, 1), dvector![0.0]);
        let cons = Halfspaces::new(dmatrix![1.0; -1.0], dvector![0.0, -1.0]).unwrap();
        assert_eq!(maximize_concave_qp_halfspaces(&f, &cons, &QpOptions::default()).unwrap_err(), Error::Infeasible);
    }
}
