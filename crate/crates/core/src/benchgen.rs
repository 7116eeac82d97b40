//! Seeded random instances and a batch runner producing table statistics.
//!
//! Instance `i` of a spec draws from a ChaCha8 stream selected by `i` under the
//! spec seed, so every instance is reproducible on its own and batches are
//! independent of scheduling.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::linalg::{eig_decompose, spectral_radius_check};
use crate::par::{self, Execution};
use crate::solver::{solve_with, ProblemInstance, SolveStatus, SolverOptions, DEFAULT_N};

pub const MAX_REJECTIONS: usize = 1000;
/// Added to `-M^T M` to make concave objectives strictly concave.
pub const CONCAVE_SHIFT: f64 = 1e-3;
pub const RHO_RANGE: (f64, f64) = (0.3, 0.97);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    Linear,
    Affine,
}

/// Convex/concave, homogeneous/non-homogeneous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    CXH,
    CXnH,
    CAH,
    CAnH,
}

impl ObjectiveKind {
    pub fn is_concave(self) -> bool {
        matches!(self, ObjectiveKind::CAH | ObjectiveKind::CAnH)
    }

    pub fn is_homogeneous(self) -> bool {
        matches!(self, ObjectiveKind::CXH | ObjectiveKind::CAH)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetKind {
    VRep { count: usize },
    Box,
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(SystemKind::Linear),
            "affine" => Ok(SystemKind::Affine),
            _ => Err(Error::InvalidSpec(format!("unknown system kind `{s}` (linear or affine)"))),
        }
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cxh" => Ok(ObjectiveKind::CXH),
            "cxnh" => Ok(ObjectiveKind::CXnH),
            "cah" => Ok(ObjectiveKind::CAH),
            "canh" => Ok(ObjectiveKind::CAnH),
            _ => Err(Error::InvalidSpec(format!("unknown objective kind `{s}` (cxh, cxnh, cah or canh)"))),
        }
    }
}

/// `box` or `vertices:<count>`.
impl FromStr for SetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "box" {
            return Ok(SetKind::Box);
        }
        if let Some(n) = lower.strip_prefix("vertices:") {
            let count = n.parse().map_err(|_| Error::InvalidSpec(format!("bad vertex count in `{s}`")))?;
            return Ok(SetKind::VRep { count });
        }
        Err(Error::InvalidSpec(format!("unknown set kind `{s}` (box or vertices:<count>)")))
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Linear => "linear",
            SystemKind::Affine => "affine",
        })
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetKind::Box => f.write_str("box"),
            SetKind::VRep { count } => write!(f, "vertices:{count}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub dim: usize,
    pub system_kind: SystemKind,
    pub objective_kind: ObjectiveKind,
    pub set_kind: SetKind,
    pub instance_count: usize,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n_cap: usize,
}

impl BenchSpec {
    pub fn new(
        dim: usize,
        system_kind: SystemKind,
        objective_kind: ObjectiveKind,
        set_kind: SetKind,
        instance_count: usize,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self { dim, system_kind, objective_kind, set_kind, instance_count, seed, n_cap: DEFAULT_N };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if self.instance_count == 0 {
            return Err(Error::InvalidSpec("instance count must be positive".into()));
        }
        if self.n_cap == 0 {
            return Err(Error::InvalidSpec("N must be positive".into()));
        }
        match self.set_kind {
            SetKind::VRep { count: 0 } => Err(Error::InvalidSpec("vertex count must be positive".into())),
            SetKind::VRep { .. } if self.objective_kind.is_concave() => {
                Err(Error::InvalidSpec("concave objectives (cah, canh) require a box initial set".into()))
            }
            _ => Ok(()),
        }
    }

    /// Number of vertices of the initial set.
    pub fn vertex_count(&self) -> u128 {
        match self.set_kind {
            SetKind::VRep { count } => count as u128,
            SetKind::Box => 1u128.checked_shl(self.dim as u32).unwrap_or(u128::MAX),
        }
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.random_range(lo..=hi))
}

fn uniform_mat(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    // Row-major draw order.
    let entries: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..=1.0)).collect();
    DMatrix::from_row_slice(d, d, &entries)
}

fn convergent_matrix(rng: &mut ChaCha8Rng, d: usize) -> Result<DMatrix<f64>> {
    for _ in 0..MAX_REJECTIONS {
        let a = uniform_mat(rng, d);
        let target = rng.random_range(RHO_RANGE.0..=RHO_RANGE.1);
        let Ok(dec) = eig_decompose(&a) else { continue };
        if dec.rho == 0.0 {
            continue;
        }
        let scaled = a * (target / dec.rho);
        match eig_decompose(&scaled) {
            Ok(dec) if spectral_radius_check(&dec) => return Ok(scaled),
            _ => continue,
        }
    }
    Err(Error::GenerationExhausted(MAX_REJECTIONS))
}

pub fn random_instance(spec: &BenchSpec, index: usize) -> Result<ProblemInstance> {
    spec.validate()?;
    let d = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);

    let a = convergent_matrix(&mut rng, d)?;
    let b = match spec.system_kind {
        SystemKind::Affine => uniform_vec(&mut rng, d, -1.0, 1.0),
        SystemKind::Linear => DVector::zeros(d),
    };
    let m = uniform_mat(&mut rng, d);
    let gram = m.transpose() * &m;
    let q_mat = if spec.objective_kind.is_concave() { -gram - DMatrix::identity(d, d) * CONCAVE_SHIFT } else { gram };
    let q_vec =
        if spec.objective_kind.is_homogeneous() { DVector::zeros(d) } else { uniform_vec(&mut rng, d, -1.0, 1.0) };
    let x_in = match spec.set_kind {
        SetKind::Box => {
            let center = uniform_vec(&mut rng, d, -1.0, 1.0);
            // 1 - U[0, 1) lies in (0, 1], scaled onto (0.1, 1].
            let radius = DVector::from_fn(d, |_, _| 0.1 + 0.9 * (1.0 - rng.random::<f64>()));
            Polytope::new_box((&center - &radius).as_slice().to_vec(), (&center + &radius).as_slice().to_vec())?
        }
        SetKind::VRep { count } => {
            let points = (0..count).map(|_| uniform_vec(&mut rng, d, -2.0, 2.0).as_slice().to_vec()).collect();
            Polytope::new_vrep(points)?
        }
    };
    ProblemInstance::new(a, b, q_mat, q_vec, x_in, spec.n_cap)
}

/// Outcome of one instance; `status` is the solve status or `Error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub status: String,
    pub nu_opt: Option<f64>,
    pub k_opt: Option<usize>,
    pub k_pos: Option<usize>,
    #[serde(rename = "K_init")]
    pub k_init: Option<usize>,
    #[serde(rename = "K_final")]
    pub k_final: Option<usize>,
    pub iterations: Option<usize>,
    pub time_s: Option<f64>,
    pub error: Option<String>,
}

impl InstanceRecord {
    pub fn solve_status(&self) -> Option<SolveStatus> {
        match self.status.as_str() {
            "Failed" => Some(SolveStatus::Failed),
            "CorollaryOne" => Some(SolveStatus::CorollaryOne),
            "KDiag" => Some(SolveStatus::KDiag),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub corollary_one: usize,
    pub k_diag: usize,
    pub failed: usize,
    /// Instances whose generation or solve raised an error.
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchStats {
    pub instance_count: usize,
    pub status_counts: StatusCounts,
    pub avg_time_s: Option<f64>,
    /// Memory columns are not measured.
    pub avg_mem_note: String,
    pub avg_kpos: Option<f64>,
    pub max_kpos: Option<usize>,
    /// Final stopping rank over `KDiag` instances.
    pub avg_iter: Option<f64>,
    pub max_iter: Option<usize>,
    /// Final stopping rank minus `k_opt` over `KDiag` instances.
    pub avg_gap: Option<f64>,
    pub max_gap: Option<usize>,
}

pub const MEMORY_NOTE: &str = "n/a";

fn mean_max(values: &[usize]) -> (Option<f64>, Option<usize>) {
    if values.is_empty() {
        return (None, None);
    }
    let sum: usize = values.iter().sum();
    (Some(sum as f64 / values.len() as f64), values.iter().copied().max())
}

pub fn aggregate(records: &[InstanceRecord]) -> BenchStats {
    let mut counts = StatusCounts::default();
    let mut kpos = Vec::new();
    let mut iters = Vec::new();
    let mut gaps = Vec::new();
    let mut times = Vec::new();
    for r in records {
        if let Some(t) = r.time_s {
            times.push(t);
        }
        match r.solve_status() {
            Some(SolveStatus::CorollaryOne) => counts.corollary_one += 1,
            Some(SolveStatus::KDiag) => {
                counts.k_diag += 1;
                // Trivial instances run no iterations and have no stopping rank.
                let k_final = r.k_final.unwrap_or(0);
                iters.push(k_final);
                gaps.push(k_final.saturating_sub(r.k_opt.unwrap_or(0)));
            }
            Some(SolveStatus::Failed) => counts.failed += 1,
            None => counts.errors += 1,
        }
        if let Some(k) = r.k_pos {
            kpos.push(k);
        }
    }
    let (avg_kpos, max_kpos) = mean_max(&kpos);
    let (avg_iter, max_iter) = mean_max(&iters);
    let (avg_gap, max_gap) = mean_max(&gaps);
    BenchStats {
        instance_count: records.len(),
        status_counts: counts,
        avg_time_s: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
        avg_mem_note: MEMORY_NOTE.into(),
        avg_kpos,
        max_kpos,
        avg_iter,
        max_iter,
        avg_gap,
        max_gap,
    }
}

pub fn run_instance(spec: &BenchSpec, index: usize) -> InstanceRecord {
    let start = Instant::now();
    let opts = SolverOptions { exec: Execution::Sequential, ..SolverOptions::default() };
    let outcome = random_instance(spec, index).and_then(|inst| solve_with(&inst, &opts));
    let time_s = Some(start.elapsed().as_secs_f64());
    match outcome {
        Ok(r) => InstanceRecord {
            index,
            status: format!("{:?}", r.status),
            k_init: r.initial_k(),
            k_final: r.final_k(),
            nu_opt: r.nu_opt,
            k_opt: r.k_opt,
            k_pos: r.k_pos,
            iterations: Some(r.iterations),
            time_s,
            error: None,
        },
        Err(e) => InstanceRecord {
            index,
            status: "Error".into(),
            nu_opt: None,
            k_opt: None,
            k_pos: None,
            k_init: None,
            k_final: None,
            iterations: None,
            time_s,
            error: Some(format!("{}: {e}", e.name())),
        },
    }
}

pub fn run_bench(spec: &BenchSpec) -> Result<(BenchStats, Vec<InstanceRecord>)> {
    run_bench_with(spec, Execution::default())
}

/// Instances run in parallel; per-instance errors become `Error` rows.
pub fn run_bench_with(spec: &BenchSpec, exec: Execution) -> Result<(BenchStats, Vec<InstanceRecord>)> {
    spec.validate()?;
    let records = par::map_indexed(exec, spec.instance_count, |i| run_instance(spec, i));
    Ok((aggregate(&records), records))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const AGGREGATE_HEADER: [&str; 19] = [
    "dim",
    "system",
    "objective",
    "vertices",
    "instances",
    "seed",
    "status_C",
    "status_K",
    "status_F",
    "errors",
    "avg_time_s",
    "avg_mem",
    "max_mem",
    "avg_kpos",
    "max_kpos",
    "avg_iter",
    "max_iter",
    "avg_gap",
    "max_gap",
];

/// The aggregate row in table column order. Time is left empty when `timing` is false.
pub fn aggregate_row(spec: &BenchSpec, stats: &BenchStats, timing: bool) -> Vec<String> {
    let c = &stats.status_counts;
    vec![
        spec.dim.to_string(),
        spec.system_kind.to_string(),
        spec.objective_kind.to_string(),
        spec.vertex_count().to_string(),
        stats.instance_count.to_string(),
        spec.seed.to_string(),
        c.corollary_one.to_string(),
        c.k_diag.to_string(),
        c.failed.to_string(),
        c.errors.to_string(),
        if timing { opt(stats.avg_time_s) } else { String::new() },
        stats.avg_mem_note.clone(),
        stats.avg_mem_note.clone(),
        opt(stats.avg_kpos),
        opt(stats.max_kpos),
        opt(stats.avg_iter),
        opt(stats.max_iter),
        opt(stats.avg_gap),
        opt(stats.max_gap),
    ]
}

pub fn write_aggregate_csv<W: Write>(out: W, spec: &BenchSpec, stats: &BenchStats, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    w.write_record(aggregate_row(spec, stats, timing))?;
    w.flush()?;
    Ok(())
}

pub fn write_instances_csv<W: Write>(out: W, records: &[InstanceRecord], timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        if timing {
            w.serialize(r)?;
        } else {
            w.serialize(InstanceRecord { time_s: None, ..r.clone() })?;
        }
    }
    w.flush()?;
    Ok(())
}
