//! Initial-set polytopes, their vertices, and the maximum of a convex quadratic
//! form over them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen_range, ComplexMatrix};
use crate::par::{self, Execution};

/// Default cap on the number of enumerated box corners.
pub const DEFAULT_VERTEX_CAP: usize = 1 << 22;
/// Tolerance (max-norm) under which two user-supplied vertices are merged.
pub const DEDUP_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of `Re(B)` in [`mu`].
pub const TOL_CONVEX_FORM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Polytope {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    #[serde(rename = "vertices")]
    VRep {
        points: Vec<Vec<f64>>,
    },
}

impl Polytope {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let p = Polytope::Box { lower, upper };
        p.validate()?;
        Ok(p)
    }

    pub fn new_vrep(points: Vec<Vec<f64>>) -> Result<Self> {
        let p = Polytope::VRep { points };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Polytope::Box { lower, upper } => {
                if lower.is_empty() {
                    return Err(Error::InvalidPolytope("box of dimension 0".into()));
                }
                if lower.len() != upper.len() {
                    return Err(Error::InvalidPolytope(format!(
                        "box bounds of lengths {} and {}",
                        lower.len(),
                        upper.len()
                    )));
                }
                if lower.iter().chain(upper).any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPolytope("non-finite box bound".into()));
                }
                if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
                    return Err(Error::InvalidPolytope(format!(
                        "empty box: lower[{i}] = {} > upper[{i}] = {}",
                        lower[i], upper[i]
                    )));
                }
            }
            Polytope::VRep { points } => {
                let first = points.first().ok_or_else(|| Error::InvalidPolytope("no vertices".into()))?;
                if first.is_empty() {
                    return Err(Error::InvalidPolytope("vertex of dimension 0".into()));
                }
                if points.iter().any(|p| p.len() != first.len()) {
                    return Err(Error::InvalidPolytope("vertices of mixed dimension".into()));
                }
                if points.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPolytope("non-finite vertex coordinate".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Polytope::Box { lower, .. } => lower.len(),
            Polytope::VRep { points } => points.first().map_or(0, Vec::len),
        }
    }

    /// `true` when the set is exactly `{0}`.
    pub fn is_origin(&self) -> bool {
        match self {
            Polytope::Box { lower, upper } => lower.iter().chain(upper).all(|&x| x == 0.0),
            Polytope::VRep { points } => points.iter().flatten().all(|&x| x == 0.0),
        }
    }
}

/// Vertices of a polytope, either stored or generated on demand from box bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum VertexList {
    Explicit(Vec<DVector<f64>>),
    /// Corner `i` takes `upper[j]` when bit `dim-1-j` of `i` is set, else `lower[j]`,
    /// which lists corners in lexicographic order.
    BoxCorners {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
}

impl VertexList {
    pub fn len(&self) -> usize {
        match self {
            VertexList::Explicit(v) => v.len(),
            VertexList::BoxCorners { lower, .. } => 1usize << lower.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            VertexList::Explicit(v) => v.first().map_or(0, |p| p.len()),
            VertexList::BoxCorners { lower, .. } => lower.len(),
        }
    }

    pub fn point(&self, i: usize) -> DVector<f64> {
        match self {
            VertexList::Explicit(v) => v[i].clone(),
            VertexList::BoxCorners { lower, upper } => {
                let d = lower.len();
                DVector::from_fn(d, |j, _| if (i >> (d - 1 - j)) & 1 == 1 { upper[j] } else { lower[j] })
            }
        }
    }

    /// Writes vertex `i` into `out` without allocating.
    pub fn point_into(&self, i: usize, out: &mut DVector<f64>) {
        match self {
            VertexList::Explicit(v) => out.copy_from(&v[i]),
            VertexList::BoxCorners { lower, upper } => {
                let d = lower.len();
                for j in 0..d {
                    out[j] = if (i >> (d - 1 - j)) & 1 == 1 { upper[j] } else { lower[j] };
                }
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = DVector<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn to_vec(&self) -> Vec<DVector<f64>> {
        self.iter().collect()
    }
}

/// Drops points within `DEDUP_TOL` (max-norm) of an earlier point, keeping the
/// first occurrence and the original order.
fn dedup_points(points: &[Vec<f64>]) -> Vec<DVector<f64>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
    let mut keep = vec![true; points.len()];
    for (pos, &i) in order.iter().enumerate() {
        if !keep[i] {
            continue;
        }
        for &j in &order[pos + 1..] {
            if points[j][0] - points[i][0] > DEDUP_TOL {
                break;
            }
            if !keep[j] {
                continue;
            }
            let close = points[i].iter().zip(&points[j]).all(|(a, b)| (a - b).abs() <= DEDUP_TOL);
            if close {
                // `i` precedes `j` in the sorted order; keep the one listed first.
                let (first, second) = if i < j { (i, j) } else { (j, i) };
                keep[second] = false;
                if first == j {
                    break;
                }
            }
        }
    }
    points.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| DVector::from_column_slice(p)).collect()
}

pub fn vertices(p: &Polytope) -> Result<VertexList> {
    vertices_with_cap(p, DEFAULT_VERTEX_CAP)
}

pub fn vertices_with_cap(p: &Polytope, cap: usize) -> Result<VertexList> {
    p.validate()?;
    match p {
        Polytope::Box { lower, upper } => {
            let d = lower.len();
            if d >= usize::BITS as usize - 1 || (1usize << d) > cap {
                return Err(Error::DimensionTooLarge { dim: d, cap });
            }
            Ok(VertexList::BoxCorners {
                lower: DVector::from_column_slice(lower),
                upper: DVector::from_column_slice(upper),
            })
        }
        Polytope::VRep { points } => Ok(VertexList::Explicit(dedup_points(points))),
    }
}

/// `P - t`.
pub fn translate(p: &Polytope, t: &[f64]) -> Result<Polytope> {
    if p.dim() != t.len() {
        return Err(Error::DimensionMismatch(format!(
            "translating a {}-dimensional set by a {}-vector",
            p.dim(),
            t.len()
        )));
    }
    let shift = |v: &[f64]| v.iter().zip(t).map(|(x, s)| x - s).collect::<Vec<_>>();
    Ok(match p {
        Polytope::Box { lower, upper } => Polytope::Box { lower: shift(lower), upper: shift(upper) },
        Polytope::VRep { points } => Polytope::VRep { points: points.iter().map(|v| shift(v)).collect() },
    })
}

/// `max_{x in P} x^T Re(B) x` over the vertices of `P`; requires `Re(B)` to be PSD.
pub fn mu(b: &ComplexMatrix, p: &Polytope) -> Result<f64> {
    mu_with(b, p, Execution::default())
}

pub fn mu_with(b: &ComplexMatrix, p: &Polytope, exec: Execution) -> Result<f64> {
    if b.nrows() != p.dim() || b.ncols() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} form on a {}-dimensional set",
            b.nrows(),
            b.ncols(),
            p.dim()
        )));
    }
    let re: DMatrix<f64> = b.map(|z| z.re);
    let re = (&re + re.transpose()) * 0.5;
    let (lo, _) = symmetric_eigen_range(&re);
    if lo < -TOL_CONVEX_FORM {
        return Err(Error::NotConvexForm { min_eigenvalue: lo });
    }
    let verts = vertices(p)?;
    let (best, _) = par::argmax(exec, verts.len(), |i| {
        let x = verts.point(i);
        x.dot(&(&re * &x))
    })
    .ok_or(Error::EmptyVertexList)?;
    Ok(best)
}
