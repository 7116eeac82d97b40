#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{dmatrix, DMatrix, DVector};
use reachmax::benchgen::{random_instance, BenchSpec, ObjectiveKind, SetKind, SystemKind};
use reachmax::geometry::Polytope;
use reachmax::seqlab::{partial_sup, rank_profile, FiniteC0Sequence};
use reachmax::solver::ProblemInstance;

/// `sin(pi x)`, exactly zero at integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == r.round() {
        0.0
    } else {
        (r * PI).sin()
    }
}

/// `-4 |sin((0.4k + 0.5) pi)| / (0.04k + 1)`: negative everywhere.
pub fn x_seq(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let k = k as f64;
            -4.0 * sin_pi((4.0 * k + 5.0) / 10.0).abs() / (0.04 * k + 1.0)
        })
        .collect()
}

/// `-3 |sin(0.4 (k + 1) pi)| / (0.1k + 1)`: zero at k = 4, 9, 14, ...
pub fn y_seq(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let kf = k as f64;
            -3.0 * sin_pi(2.0 * (kf + 1.0) / 5.0).abs() / (0.1 * kf + 1.0)
        })
        .collect()
}

/// `(1.6k - 1.6) / (0.08k^2 + 0.5)`.
pub fn z_seq(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let k = k as f64;
            (1.6 * k - 1.6) / (0.08 * k * k + 0.5)
        })
        .collect()
}

/// `floor((1.2k - 2) / (0.04k^2 + 0.5))`, in integer arithmetic.
pub fn t_seq(n: usize) -> Vec<f64> {
    (0..n as i64).map(|k| (120 * k - 200).div_euclid(4 * k * k + 50) as f64).collect()
}

pub fn oscillator_matrix() -> DMatrix<f64> {
    dmatrix![1.0, 0.01; -0.01, 0.99]
}

pub fn unit_square() -> Polytope {
    Polytope::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
}

pub fn oscillator(q_mat: DMatrix<f64>, q_vec: DVector<f64>) -> ProblemInstance {
    ProblemInstance::linear(oscillator_matrix(), q_mat, q_vec, unit_square()).unwrap()
}

/// Every value is negative and the supremum 0 is only a limit.
pub fn decaying_negative() -> ProblemInstance {
    ProblemInstance::linear(
        dmatrix![0.5],
        dmatrix![1.0],
        DVector::from_element(1, -1.0),
        Polytope::new_box(vec![0.25], vec![0.5]).unwrap(),
    )
    .unwrap()
}

/// Corners of a box (all sign patterns) or the given points.
pub fn corner_points(p: &Polytope) -> Vec<DVector<f64>> {
    match p {
        Polytope::Box { lower, upper } => {
            let d = lower.len();
            (0..1usize << d)
                .map(|mask| DVector::from_fn(d, |i, _| if mask >> i & 1 == 1 { upper[i] } else { lower[i] }))
                .collect()
        }
        Polytope::VRep { points } => points.iter().map(|p| DVector::from_column_slice(p)).collect(),
    }
}

pub fn objective(inst: &ProblemInstance, x: &DVector<f64>) -> f64 {
    x.dot(&(&inst.q_mat * x)) + inst.q_vec.dot(x)
}

/// Maximum of `g` over a box by successively refined grids around the best
/// point. Sound for concave `g`.
pub fn refined_grid_max(lower: &[f64], upper: &[f64], g: impl Fn(&DVector<f64>) -> f64) -> (f64, DVector<f64>) {
    let d = lower.len();
    let per_axis: usize = if d <= 2 { 41 } else { 15 };
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    let mut best = (f64::NEG_INFINITY, DVector::zeros(d));
    loop {
        let step: Vec<f64> = (0..d).map(|i| (hi[i] - lo[i]) / (per_axis - 1) as f64).collect();
        let total = per_axis.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let x = DVector::from_fn(d, |i, _| {
                let j = rem % per_axis;
                rem /= per_axis;
                (lo[i] + j as f64 * step[i]).min(hi[i])
            });
            let v = g(&x);
            if v > best.0 {
                best = (v, x);
            }
        }
        for i in 0..d {
            lo[i] = (best.1[i] - 2.0 * step[i]).max(lower[i]);
            hi[i] = (best.1[i] + 2.0 * step[i]).min(upper[i]);
        }
        if step.iter().all(|&h| h < 1e-10) {
            return best;
        }
    }
}

/// Maximum of the objective along trajectories `x_{k+1} = A x_k + b` started
/// at every vertex, over `k <= horizon`. Sound for convex objectives only.
/// Returns `(value, k)` with ties to the smallest rank.
pub fn simulate_vertices(inst: &ProblemInstance, horizon: usize) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    let mut states = corner_points(&inst.x_in);
    for k in 0..=horizon {
        let v = states.iter().map(|x| objective(inst, x)).fold(f64::NEG_INFINITY, f64::max);
        if v > best.0 {
            best = (v, k);
        }
        for x in states.iter_mut() {
            *x = &inst.a * &*x + &inst.b;
        }
    }
    best
}

pub const SET_KINDS: [SetKind; 3] = [SetKind::Box, SetKind::VRep { count: 6 }, SetKind::VRep { count: 20 }];
pub const OBJECTIVES: [ObjectiveKind; 4] =
    [ObjectiveKind::CXH, ObjectiveKind::CXnH, ObjectiveKind::CAH, ObjectiveKind::CAnH];

/// A deterministic mix of generated instances: dimensions 1 to `max_dim`,
/// every objective kind, linear and affine systems.
pub fn mixed_instances(count: usize, max_dim: usize, seed: u64) -> Vec<(ProblemInstance, ObjectiveKind)> {
    (0..count)
        .map(|i| {
            let objective = OBJECTIVES[i % 4];
            let system = if (i / 4) % 2 == 0 { SystemKind::Linear } else { SystemKind::Affine };
            let set_kind = if objective.is_concave() { SetKind::Box } else { SET_KINDS[(i / 8) % 3] };
            let dim = 1 + (i / 24) % max_dim;
            let spec = BenchSpec::new(dim, system, objective, set_kind, count, seed).unwrap();
            (random_instance(&spec, i).unwrap(), objective)
        })
        .collect()
}

/// `sup_{n <= k <= m}` of the zero-padded sequence, by direct iteration.
pub fn naive_sup(u: &[f64], n: usize, m: Option<usize>) -> f64 {
    // Indices at or past the prefix all hold 0, so one of them is enough.
    let reach = n.max(u.len());
    let last = m.map_or(reach, |m| m.min(reach));
    let mut s = f64::NEG_INFINITY;
    for k in n..=last {
        s = s.max(u.get(k).copied().unwrap_or(0.0));
    }
    s
}

/// `a <= b` with `None` as infinity.
fn le(a: Option<usize>, b: Option<usize>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(a), Some(b)) => a <= b,
    }
}

macro_rules! ensure {
    ($cond:expr) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!("violated: {}", stringify!($cond)));
        }
    };
}

macro_rules! ensure_eq {
    ($a:expr, $b:expr) => {
        if $a != $b {
            return Err(format!("{} = {:?} but {} = {:?}", stringify!($a), $a, stringify!($b), $b));
        }
    };
}

/// Checks the rank profile of `u` against the rank definitions evaluated
/// naively on the zero-padded sequence.
pub fn check_profile(u: &[f64]) -> Result<(), String> {
    let n = u.len();
    let seq = FiniteC0Sequence::new(u.to_vec()).map_err(|e| e.to_string())?;
    let p = rank_profile(&seq);
    let sup = naive_sup(u, 0, None);
    ensure_eq!(p.sup_value, sup);

    // Ranks from their definitions, searched up to the first padding rank.
    let first = |pred: &dyn Fn(usize) -> bool| (0..=n).find(|&k| pred(k));
    let k_geq = first(&|k| u.get(k).copied().unwrap_or(0.0) >= 0.0);
    let k_gt = (0..n).find(|&k| u[k] > 0.0);
    let big_k_geq = first(&|k| naive_sup(u, 0, Some(k)) >= naive_sup(u, k + 1, None));
    let big_k_gt = first(&|k| naive_sup(u, 0, Some(k)) > naive_sup(u, k + 1, None));
    ensure_eq!(p.k_geq.padded(n), k_geq);
    ensure_eq!(p.k_gt.padded(n), k_gt);
    ensure_eq!(p.big_k_geq.padded(n), big_k_geq);
    ensure_eq!(p.big_k_gt.padded(n), big_k_gt);

    // Tail suprema are non-negative.
    for k in 0..=n + 1 {
        ensure!(naive_sup(u, k, None) >= 0.0);
    }
    // Pos and Delta are empty together; Delta> is empty iff the supremum is 0.
    ensure_eq!(k_geq.is_some(), big_k_geq.is_some());
    ensure_eq!(k_gt.is_some(), big_k_gt.is_some());
    ensure_eq!(big_k_gt.is_none(), sup == 0.0);

    // Order relations between the ranks.
    ensure!(le(k_geq, k_gt));
    ensure!(le(k_geq, big_k_geq));
    ensure!(le(k_gt, big_k_gt));
    ensure!(le(big_k_geq, big_k_gt));
    if k_gt.is_some() {
        ensure!(le(k_gt, big_k_geq));
    }

    // Argmax of the padded sequence: stored maximizers, plus every padding
    // rank when the supremum is 0.
    let mut argmax: Vec<usize> = (0..n).filter(|&k| u[k] == sup).collect();
    ensure_eq!(p.argmax_set, argmax);
    if sup == 0.0 {
        argmax.push(n);
    }
    for &k in &argmax {
        ensure!(naive_sup(u, 0, Some(k)) >= naive_sup(u, k + 1, None));
    }
    if let Some(kg) = big_k_geq {
        ensure_eq!(Some(kg), argmax.first().copied());
    }
    ensure_eq!(!argmax.is_empty(), big_k_geq.is_some());
    if let Some(kg) = big_k_gt {
        ensure!(sup > 0.0);
        ensure_eq!(Some(kg), argmax.last().copied());
    }

    // Past K>=, every prefix supremum already equals the supremum.
    if let (Some(kp), Some(kn), Some(kg)) = (k_gt, k_geq, big_k_geq) {
        for k in kg..=n + 1 {
            ensure_eq!(naive_sup(u, 0, Some(k)), sup);
            ensure_eq!(naive_sup(u, kp, Some(k)), sup);
            ensure_eq!(naive_sup(u, kn, Some(k)), sup);
            ensure_eq!(partial_sup(&seq, 0, Some(k)), sup);
        }
    }
    Ok(())
}
