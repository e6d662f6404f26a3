//! Exact rational convex polytopes in vertex representation: hulls,
//! Minkowski sums, volumes, mixed volumes, projections, Newton polytopes.

use crate::error::{Error, Result};
use crate::hull;
use crate::laurent::LaurentPolynomial;
use crate::rat::{QVec, Rat};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A compact convex rational polytope, stored as its irredundant vertex set
/// in lexicographic order. Equality of polytopes is equality of vertex lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<QVec>,
}

/// An exact linear map ℚ^source → ℚ^target given by its matrix (rows =
/// target coordinates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMapQ {
    pub matrix: Vec<QVec>,
    pub source_dim: usize,
    pub target_dim: usize,
}

impl LinearMapQ {
    pub fn new(matrix: Vec<Vec<Rat>>, source_dim: usize, target_dim: usize) -> Result<Self> {
        if matrix.len() != target_dim || matrix.iter().any(|r| r.len() != source_dim) {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be {target_dim}×{source_dim}"
            )));
        }
        Ok(LinearMapQ {
            matrix: matrix.into_iter().map(QVec).collect(),
            source_dim,
            target_dim,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut row = vec![Rat::zero(); dim];
            row[i] = Rat::from_integer(1.into());
            m.push(QVec(row));
        }
        LinearMapQ {
            matrix: m,
            source_dim: dim,
            target_dim: dim,
        }
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let target_dim = rows.len();
        let source_dim = rows[0].len();
        LinearMapQ {
            matrix: rows.iter().map(|r| QVec::from_ints(r)).collect(),
            source_dim,
            target_dim,
        }
    }

    pub fn apply(&self, v: &QVec) -> QVec {
        debug_assert_eq!(v.dim(), self.source_dim);
        QVec(self.matrix.iter().map(|row| row.dot(v)).collect())
    }

    /// Transpose, i.e. the dual map on the dual spaces.
    pub fn transpose(&self) -> LinearMapQ {
        let mut m = vec![vec![Rat::zero(); self.target_dim]; self.source_dim];
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, v) in row.0.iter().enumerate() {
                m[j][i] = v.clone();
            }
        }
        LinearMapQ {
            matrix: m.into_iter().map(QVec).collect(),
            source_dim: self.target_dim,
            target_dim: self.source_dim,
        }
    }
}

/// Irredundant hull of a nonempty point set; vertices sorted
/// lexicographically.
pub fn convex_hull(points: &[QVec], dim: usize) -> Result<Polytope> {
    if points.is_empty() {
        return Err(Error::EmptyInput("convex_hull of no points".into()));
    }
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, expected {dim}",
                p.dim()
            )));
        }
    }
    let vertices = hull::extreme_points(points);
    Ok(Polytope {
        ambient_dim: dim,
        vertices,
    })
}

impl Polytope {
    pub fn point(v: QVec) -> Polytope {
        Polytope {
            ambient_dim: v.dim(),
            vertices: vec![v],
        }
    }

    pub fn from_ints(dim: usize, pts: &[&[i64]]) -> Polytope {
        let v: Vec<QVec> = pts.iter().map(|p| QVec::from_ints(p)).collect();
        convex_hull(&v, dim).expect("valid integer points")
    }

    /// The unit simplex conv{0, e₁, …, e_n} in ℝⁿ.
    pub fn unit_simplex(n: usize) -> Polytope {
        let mut pts = vec![QVec::zero(n)];
        for i in 0..n {
            let mut v = vec![0i64; n];
            v[i] = 1;
            pts.push(QVec::from_ints(&v));
        }
        convex_hull(&pts, n).unwrap()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[QVec] {
        &self.vertices
    }

    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Affine dimension of the polytope.
    pub fn dim(&self) -> usize {
        hull::affine_rank(&self.vertices).0
    }

    /// Scales the polytope by a nonnegative integer factor (k-fold Minkowski
    /// sum with itself).
    pub fn dilate(&self, k: &Rat) -> Polytope {
        Polytope {
            ambient_dim: self.ambient_dim,
            vertices: {
                let mut v: Vec<QVec> = self.vertices.iter().map(|p| p.scale(k)).collect();
                v.sort_by(|a, b| a.lex_cmp(b));
                v.dedup();
                v
            },
        }
    }

    pub fn translate(&self, t: &QVec) -> Polytope {
        let mut v: Vec<QVec> = self.vertices.iter().map(|p| p.add(t)).collect();
        v.sort_by(|a, b| a.lex_cmp(b));
        Polytope {
            ambient_dim: self.ambient_dim,
            vertices: v,
        }
    }

    pub fn contains(&self, p: &QVec) -> bool {
        if p.dim() != self.ambient_dim {
            return false;
        }
        crate::lp::point_in_hull(&p.0, &self.vertices.iter().map(|v| v.0.clone()).collect::<Vec<_>>())
    }

    /// Supporting facets as (normal, offset) pairs with `normal·x ≤ offset`.
    /// For lower-dimensional polytopes this describes the polytope within its
    /// affine hull together with the hull equations.
    pub fn halfspaces(&self) -> Vec<(QVec, Rat)> {
        let d = self.ambient_dim;
        let (rank, _) = hull::affine_rank(&self.vertices);
        let mut out = Vec::new();
        if rank == d {
            for f in hull::facets(&self.vertices, d) {
                out.push((f.normal, f.offset));
            }
            return out;
        }
        // Affine hull equations: normal·x = c represented as two halfspaces.
        let p0 = &self.vertices[0];
        let rows: Vec<Vec<Rat>> = self.vertices[1..].iter().map(|p| p.sub(p0).0).collect();
        let rows = if rows.is_empty() { vec![vec![Rat::zero(); d]] } else { rows };
        for n in hull::nullspace(&rows, d) {
            let c = n.dot(p0);
            out.push((n.clone(), c.clone()));
            out.push((n.neg(), -c));
        }
        if rank == 0 {
            return out;
        }
        // Facets of the polytope inside its affine hull, lifted back: a facet
        // of the projection π_J(P) with normal m gives the halfspace
        // m∘π_J ≤ offset in the ambient space.
        let (_, pivots) = hull::affine_rank(&self.vertices);
        let projected: Vec<QVec> = self
            .vertices
            .iter()
            .map(|p| QVec(pivots.iter().map(|&c| p.0[c].clone()).collect()))
            .collect();
        for f in hull::facets(&projected, rank) {
            let mut n = vec![Rat::zero(); d];
            for (k, &c) in pivots.iter().enumerate() {
                n[c] = f.normal.0[k].clone();
            }
            out.push((QVec(n), f.offset));
        }
        out
    }

    /// Intersection with the halfspace `normal·x ≤ offset`.
    pub fn clip(&self, normal: &QVec, offset: &Rat) -> Option<Polytope> {
        let mut inside: Vec<QVec> = Vec::new();
        let mut outside: Vec<QVec> = Vec::new();
        let mut on_plane: Vec<QVec> = Vec::new();
        for v in &self.vertices {
            let val = normal.dot(v);
            if val < *offset {
                inside.push(v.clone());
            } else if val > *offset {
                outside.push(v.clone());
            } else {
                on_plane.push(v.clone());
            }
        }
        if inside.is_empty() && on_plane.is_empty() {
            return None;
        }
        let mut candidates = inside.clone();
        candidates.extend(on_plane);
        for a in &inside {
            let va = normal.dot(a);
            for b in &outside {
                let vb = normal.dot(b);
                // crossing point a + t (b−a), t = (offset − va)/(vb − va)
                let t = (offset - &va) / (&vb - &va);
                candidates.push(a.add(&b.sub(a).scale(&t)));
            }
        }
        Some(Polytope {
            ambient_dim: self.ambient_dim,
            vertices: hull::extreme_points(&candidates),
        })
    }

    pub fn volume(&self) -> Rat {
        hull::volume(&self.vertices)
    }

    pub fn centroid(&self) -> QVec {
        // average of vertices for points/degenerate, volume-weighted
        // simplex centroids otherwise
        let d = self.ambient_dim;
        let (rank, _) = hull::affine_rank(&self.vertices);
        if rank < d {
            let n = Rat::from_integer((self.vertices.len() as i64).into());
            let mut acc = QVec::zero(d);
            for v in &self.vertices {
                acc = acc.add(v);
            }
            return QVec(acc.0.into_iter().map(|x| x / &n).collect());
        }
        let mut vol = Rat::zero();
        let mut acc = QVec::zero(d);
        let dp1 = Rat::from_integer(((d + 1) as i64).into());
        for s in hull::triangulate(&self.vertices) {
            let verts: Vec<&QVec> = s.iter().map(|&i| &self.vertices[i]).collect();
            let mat: Vec<Vec<Rat>> = verts[1..].iter().map(|v| v.sub(verts[0]).0).collect();
            let v = hull::det(&mat).abs()
                / (2..=d as i64).map(|k| Rat::from_integer(k.into())).fold(
                    Rat::from_integer(1.into()),
                    |a, b| a * b,
                );
            if v.is_zero() {
                continue;
            }
            let mut c = QVec::zero(d);
            for p in &verts {
                c = c.add(p);
            }
            let c = QVec(c.0.into_iter().map(|x| x / &dp1).collect());
            acc = acc.add(&c.scale(&v));
            vol += v;
        }
        QVec(acc.0.into_iter().map(|x| x / &vol).collect())
    }

    /// Bounding box as (lower, upper) corner coordinate vectors.
    pub fn bounding_box(&self) -> (Vec<Rat>, Vec<Rat>) {
        let d = self.ambient_dim;
        let mut lo = self.vertices[0].0.clone();
        let mut hi = self.vertices[0].0.clone();
        for v in &self.vertices {
            for i in 0..d {
                if v.0[i] < lo[i] {
                    lo[i] = v.0[i].clone();
                }
                if v.0[i] > hi[i] {
                    hi[i] = v.0[i].clone();
                }
            }
        }
        (lo, hi)
    }
}

/// Minkowski sum: hull of all pairwise vertex sums.
pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Result<Polytope> {
    if p.ambient_dim != q.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "minkowski_sum: {} vs {}",
            p.ambient_dim, q.ambient_dim
        )));
    }
    let mut sums = Vec::with_capacity(p.vertices.len() * q.vertices.len());
    for a in &p.vertices {
        for b in &q.vertices {
            sums.push(a.add(b));
        }
    }
    convex_hull(&sums, p.ambient_dim)
}

pub fn minkowski_sum_many(ps: &[&Polytope]) -> Result<Polytope> {
    let mut it = ps.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::EmptyInput("minkowski_sum_many".into()))?;
    let mut acc = (*first).clone();
    for p in it {
        acc = minkowski_sum(&acc, p)?;
    }
    Ok(acc)
}

/// Lebesgue volume normalized so ℤⁿ has covolume 1.
pub fn volume(p: &Polytope) -> Rat {
    p.volume()
}

/// Mixed volume of `n` polytopes in ℝⁿ via the inclusion–exclusion sum
/// MV(Δ₁,…,Δₙ) = Σ_{∅≠S} (−1)^{n−|S|} vol(Σ_{i∈S} Δᵢ). Lower-dimensional
/// inputs are legal; degenerate subset sums contribute zero volume.
pub fn mixed_volume(ps: &[Polytope]) -> Result<Rat> {
    let n = ps.len();
    if n == 0 {
        return Err(Error::EmptyInput("mixed_volume".into()));
    }
    for p in ps {
        if p.ambient_dim != n {
            return Err(Error::CountMismatch(format!(
                "mixed_volume needs {n} polytopes in ℝ^{n}, got one in ℝ^{}",
                p.ambient_dim
            )));
        }
    }
    let masks: Vec<u32> = (1u32..(1 << n)).collect();
    let terms: Vec<Rat> = masks
        .par_iter()
        .map(|&mask| {
            let subset: Vec<&Polytope> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &ps[i]).collect();
            let sum = minkowski_sum_many(&subset).expect("dims checked");
            let vol = sum.volume();
            let k = mask.count_ones() as usize;
            if (n - k) % 2 == 0 {
                vol
            } else {
                -vol
            }
        })
        .collect();
    Ok(terms.into_iter().fold(Rat::zero(), |a, b| a + b))
}

/// Image polytope under an exact linear map.
pub fn project(p: &Polytope, map: &LinearMapQ) -> Result<Polytope> {
    if map.source_dim != p.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "project: map source {} vs polytope dim {}",
            map.source_dim, p.ambient_dim
        )));
    }
    let images: Vec<QVec> = p.vertices.iter().map(|v| map.apply(v)).collect();
    convex_hull(&images, map.target_dim)
}

/// Newton polytope: hull of the exponent vectors with nonzero coefficient.
pub fn newton_polytope(f: &LaurentPolynomial) -> Polytope {
    let pts: Vec<QVec> = f
        .terms()
        .keys()
        .map(|e| QVec(e.iter().map(|&k| Rat::from_integer(k.into())).collect()))
        .collect();
    convex_hull(&pts, f.n_vars()).expect("laurent polynomials are nonzero")
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dim: usize,
    pub vertices: Vec<Vec<serde_json::Value>>,
}

impl Polytope {
    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson {
            dim: self.ambient_dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| {
                    v.0.iter()
                        .map(|r| serde_json::Value::String(crate::rat::format_rat(r)))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolytopeJson) -> Result<Polytope> {
        let mut pts = Vec::new();
        for v in &j.vertices {
            let mut coords = Vec::new();
            for x in v {
                coords.push(crate::json_rat(x)?);
            }
            pts.push(QVec(coords));
        }
        convex_hull(&pts, j.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    fn qv(v: &[i64]) -> QVec {
        QVec::from_ints(v)
    }

    #[test]
    fn hull_removes_interior_point() {
        let p = convex_hull(
            &[
                qv(&[0, 0]),
                qv(&[1, 0]),
                qv(&[0, 1]),
                QVec(vec![rat(1, 2), rat(1, 4)]),
            ],
            2,
        )
        .unwrap();
        assert_eq!(p.vertices().len(), 3);
    }

    #[test]
    fn hull_single_point() {
        let p = convex_hull(&[qv(&[0, 0])], 2).unwrap();
        assert_eq!(p.vertices().len(), 1);
    }

    #[test]
    fn hull_collinear_midpoint_removed() {
        let p = convex_hull(&[qv(&[0]), qv(&[2]), qv(&[1])], 1).unwrap();
        assert_eq!(p.vertices(), &[qv(&[0]), qv(&[2])]);
    }

    #[test]
    fn minkowski_segments_to_square() {
        let s1 = Polytope::from_ints(2, &[&[0, 0], &[1, 0]]);
        let s2 = Polytope::from_ints(2, &[&[0, 0], &[0, 1]]);
        let sq = minkowski_sum(&s1, &s2).unwrap();
        assert_eq!(sq.vertices().len(), 4);
        assert_eq!(sq.volume(), rat_i(1));
    }

    #[test]
    fn minkowski_identity_element() {
        let p = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1]]);
        let origin = Polytope::point(QVec::zero(2));
        assert_eq!(minkowski_sum(&p, &origin).unwrap(), p);
    }

    #[test]
    fn minkowski_simplex_dilation() {
        let s = Polytope::unit_simplex(2);
        let d = minkowski_sum(&s, &s).unwrap();
        assert_eq!(d, Polytope::from_ints(2, &[&[0, 0], &[2, 0], &[0, 2]]));
    }

    #[test]
    fn volumes() {
        let mut cube = Vec::new();
        for i in 0..8 {
            cube.push(qv(&[i & 1, (i >> 1) & 1, (i >> 2) & 1]));
        }
        assert_eq!(convex_hull(&cube, 3).unwrap().volume(), rat_i(1));
        assert_eq!(Polytope::unit_simplex(3).volume(), rat(1, 6));
        let seg = Polytope::from_ints(2, &[&[0, 0], &[1, 1]]);
        assert_eq!(seg.volume(), rat_i(0));
    }

    #[test]
    fn mixed_volume_examples() {
        let s1 = Polytope::from_ints(2, &[&[0, 0], &[1, 0]]);
        let s2 = Polytope::from_ints(2, &[&[0, 0], &[0, 1]]);
        assert_eq!(mixed_volume(&[s1.clone(), s2]).unwrap(), rat_i(1));

        let simplex = Polytope::unit_simplex(2);
        assert_eq!(
            mixed_volume(&[simplex.clone(), simplex.clone()]).unwrap(),
            rat_i(1)
        );

        let square = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(mixed_volume(&[s1, square]).unwrap(), rat_i(1));
    }

    #[test]
    fn mixed_volume_diagonal_is_factorial_volume() {
        let p = Polytope::from_ints(3, &[&[0, 0, 0], &[2, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]);
        let mv = mixed_volume(&[p.clone(), p.clone(), p.clone()]).unwrap();
        assert_eq!(mv, p.volume() * rat_i(6));
    }

    #[test]
    fn projections() {
        let sq = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let to_x = LinearMapQ::from_int_rows(&[&[1, 0]]);
        let seg = project(&sq, &to_x).unwrap();
        assert_eq!(seg, Polytope::from_ints(1, &[&[0], &[1]]));

        let id = LinearMapQ::identity(2);
        assert_eq!(project(&sq, &id).unwrap(), sq);

        let sum = LinearMapQ::from_int_rows(&[&[1, 1]]);
        let simplex = Polytope::unit_simplex(2);
        assert_eq!(
            project(&simplex, &sum).unwrap(),
            Polytope::from_ints(1, &[&[0], &[1]])
        );
    }

    #[test]
    fn clip_square() {
        let sq = Polytope::from_ints(2, &[&[0, 0], &[2, 0], &[0, 2], &[2, 2]]);
        // x + y ≤ 2
        let half = sq
            .clip(&QVec::from_ints(&[1, 1]), &rat_i(2))
            .unwrap();
        assert_eq!(half.volume(), rat_i(2));
        // empty clip
        assert!(sq.clip(&QVec::from_ints(&[1, 0]), &rat_i(-1)).is_none());
    }

    #[test]
    fn json_roundtrip() {
        let p = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1]]);
        let j = serde_json::to_string(&p.to_json()).unwrap();
        let parsed: PolytopeJson = serde_json::from_str(&j).unwrap();
        assert_eq!(Polytope::from_json(&parsed).unwrap(), p);
    }
}
