//! Exact convex-hull machinery: facet enumeration by gift wrapping,
//! recursive pyramidal triangulation, volumes and affine integrals.
//!
//! All predicates are exact rational determinant/LP computations, so the
//! combinatorics are never corrupted by rounding. Sizes stay small (tens to
//! a few hundred points, dimension ≤ 7), which this implementation targets.

use crate::lp::point_in_hull;
use crate::rat::{QVec, Rat};
use num_traits::{One, Signed, Zero};
use std::collections::{HashMap, HashSet, VecDeque};

/// Row-reduces `m` in place, returning (rank, pivot column indices).
pub fn row_reduce(m: &mut Vec<Vec<Rat>>) -> (usize, Vec<usize>) {
    let rows = m.len();
    if rows == 0 {
        return (0, vec![]);
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].clone();
        for v in m[rank].iter_mut() {
            *v /= &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..cols {
                    let v = f.clone() * &m[rank][c];
                    m[r][c] -= v;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    (rank, pivots)
}

/// Basis of the right nullspace of `m` (vectors `v` with `m v = 0`).
pub fn nullspace(m: &[Vec<Rat>], cols: usize) -> Vec<QVec> {
    let mut red: Vec<Vec<Rat>> = m.to_vec();
    let (_, pivots) = row_reduce(&mut red);
    let pivot_set: HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -red[r][free].clone();
        }
        basis.push(QVec(v));
    }
    basis
}

pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut sign = Rat::one();
    let mut acc = Rat::one();
    for col in 0..n {
        let Some(pr) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rat::zero();
        };
        if pr != col {
            a.swap(col, pr);
            sign = -sign;
        }
        let p = a[col][col].clone();
        acc *= &p;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = a[r][col].clone() / &p;
                for c in col..n {
                    let v = f.clone() * &a[col][c];
                    a[r][c] -= v;
                }
            }
        }
    }
    acc * sign
}

/// Affine rank of the point set (0 for a single point) together with the
/// coordinate subset on which the affine hull projects isomorphically.
pub fn affine_rank(points: &[QVec]) -> (usize, Vec<usize>) {
    if points.len() <= 1 {
        return (0, vec![]);
    }
    let d = points[0].dim();
    let mut mat: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| p.sub(&points[0]).0)
        .collect();
    let (rank, pivots) = row_reduce(&mut mat);
    debug_assert!(rank <= d);
    (rank, pivots)
}

fn project_coords(p: &QVec, coords: &[usize]) -> QVec {
    QVec(coords.iter().map(|&c| p.0[c].clone()).collect())
}

/// Keeps only the extreme points, sorted lexicographically.
pub fn extreme_points(points: &[QVec]) -> Vec<QVec> {
    let mut uniq: Vec<QVec> = Vec::new();
    let mut seen = HashSet::new();
    for p in points {
        if seen.insert(p.clone()) {
            uniq.push(p.clone());
        }
    }
    if uniq.len() <= 1 {
        uniq.sort_by(|a, b| a.lex_cmp(b));
        return uniq;
    }
    let mut keep = Vec::new();
    for (i, p) in uniq.iter().enumerate() {
        let others: Vec<Vec<Rat>> = uniq
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| q.0.clone())
            .collect();
        if !point_in_hull(&p.0, &others) {
            keep.push(p.clone());
        }
    }
    keep.sort_by(|a, b| a.lex_cmp(b));
    keep
}

/// A facet of a full-dimensional point configuration: the supporting
/// hyperplane `normal·x ≤ offset` and the indices of all points on it.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: QVec,
    pub offset: Rat,
    pub support: Vec<usize>,
}

/// Facet enumeration by gift wrapping. Requires the points to be
/// full-dimensional (affine rank = ambient dimension = `d`), `d ≥ 1`.
pub fn facets(points: &[QVec], d: usize) -> Vec<Facet> {
    assert!(d >= 1);
    assert!(points.len() >= d + 1 || d == 1);
    if d == 1 {
        return facets_1d(points);
    }
    let mut out: Vec<Facet> = Vec::new();
    let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    let first = initial_facet(points, d);
    seen.insert(first.support.clone(), ());
    out.push(first);
    queue.push_back(0);

    while let Some(fi) = queue.pop_front() {
        let facet = out[fi].clone();
        for ridge in ridges_of(points, &facet, d) {
            let nf = pivot_facet(points, &facet, &ridge, d);
            if seen.insert(nf.support.clone(), ()).is_none() {
                out.push(nf);
                queue.push_back(out.len() - 1);
            }
        }
    }
    out
}

fn facets_1d(points: &[QVec]) -> Vec<Facet> {
    let lo = (0..points.len())
        .min_by(|&a, &b| points[a].0[0].cmp(&points[b].0[0]))
        .unwrap();
    let hi = (0..points.len())
        .max_by(|&a, &b| points[a].0[0].cmp(&points[b].0[0]))
        .unwrap();
    let mk = |idx: usize, sgn: i64| {
        let n = QVec(vec![Rat::from_integer(sgn.into())]);
        let b = n.dot(&points[idx]);
        Facet {
            normal: n,
            offset: b,
            support: vec![idx],
        }
    };
    if points[lo].0[0] == points[hi].0[0] {
        // degenerate single point; callers avoid this, keep it safe anyway
        return vec![mk(lo, -1)];
    }
    vec![mk(lo, -1), mk(hi, 1)]
}

/// Builds one facet by rotating a supporting hyperplane until its support is
/// (d−1)-dimensional.
fn initial_facet(points: &[QVec], d: usize) -> Facet {
    // Start from the supporting hyperplane minimizing the first coordinate.
    let mut normal = QVec(std::iter::once(-Rat::one()).chain((1..d).map(|_| Rat::zero())).map(|x| x).collect());
    loop {
        let (support, offset) = support_set(points, &normal);
        let sup_pts: Vec<QVec> = support.iter().map(|&i| points[i].clone()).collect();
        let (rank, _) = affine_rank(&sup_pts);
        if rank == d - 1 {
            return Facet {
                normal,
                offset,
                support,
            };
        }
        // Rotate around the current support flat to pick up more points.
        let s0 = &sup_pts[0];
        // w ⊥ direction space of the flat, independent from normal.
        let mut rows: Vec<Vec<Rat>> = sup_pts[1..].iter().map(|p| p.sub(s0).0).collect();
        if rows.is_empty() {
            rows.push(vec![Rat::zero(); d]);
        }
        let candidates = nullspace(&rows, d);
        let w = candidates
            .into_iter()
            .find(|w| {
                // independent from normal?
                let mut m = vec![normal.0.clone(), w.0.clone()];
                let (r, _) = row_reduce(&mut m);
                r == 2
            })
            .expect("support flat has codimension ≥ 2, complement contains a non-normal vector");

        let mut tau_max: Option<Rat> = None;
        let mut tau_min: Option<Rat> = None;
        for p in points {
            let alpha = normal.dot(p) - &offset; // ≤ 0, < 0 off the support
            let beta = w.dot(&p.sub(s0));
            if beta.is_positive() {
                let bound = -alpha.clone() / &beta;
                if tau_max.as_ref().map_or(true, |t| bound < *t) {
                    tau_max = Some(bound);
                }
            } else if beta.is_negative() {
                let bound = -alpha.clone() / &beta;
                if tau_min.as_ref().map_or(true, |t| bound > *t) {
                    tau_min = Some(bound);
                }
            }
        }
        let tau = tau_max.or(tau_min).expect("full-dimensional input");
        normal = QVec(
            normal
                .0
                .iter()
                .zip(&w.0)
                .map(|(n, w)| n + tau.clone() * w)
                .collect(),
        );
    }
}

fn support_set(points: &[QVec], normal: &QVec) -> (Vec<usize>, Rat) {
    let vals: Vec<Rat> = points.iter().map(|p| normal.dot(p)).collect();
    let best = vals.iter().max().unwrap().clone();
    let support: Vec<usize> = (0..points.len()).filter(|&i| vals[i] == best).collect();
    (support, best)
}

/// Ridges of a facet: the facets of the (d−1)-dimensional support polytope,
/// computed recursively in a coordinate chart of the facet hyperplane.
fn ridges_of(points: &[QVec], facet: &Facet, d: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![];
    }
    let sup_pts: Vec<QVec> = facet.support.iter().map(|&i| points[i].clone()).collect();
    let (rank, pivots) = affine_rank(&sup_pts);
    debug_assert_eq!(rank, d - 1, "facet support must be (d-1)-dimensional");
    let projected: Vec<QVec> = sup_pts.iter().map(|p| project_coords(p, &pivots)).collect();
    facets(&projected, d - 1)
        .into_iter()
        .map(|f| {
            let mut r: Vec<usize> = f.support.iter().map(|&j| facet.support[j]).collect();
            r.sort_unstable();
            r
        })
        .collect()
}

/// Rotates the supporting hyperplane of `facet` around a ridge to the
/// neighboring facet (standard gift-wrapping pivot, done in the exact 2-D
/// quotient by the ridge's direction space).
fn pivot_facet(points: &[QVec], facet: &Facet, ridge: &[usize], d: usize) -> Facet {
    let r0 = &points[ridge[0]];
    // r: orthogonal to the ridge directions and to the facet normal.
    let mut rows: Vec<Vec<Rat>> = ridge[1..]
        .iter()
        .map(|&i| points[i].sub(r0).0)
        .collect();
    rows.push(facet.normal.0.clone());
    let ns = nullspace(&rows, d);
    debug_assert_eq!(ns.len(), 1, "ridge pivot direction must be unique");
    let mut r = ns.into_iter().next().unwrap();
    // Orient r so that the facet's own off-ridge points lie at X > 0.
    let ridge_set: HashSet<usize> = ridge.iter().copied().collect();
    let q = facet
        .support
        .iter()
        .find(|i| !ridge_set.contains(i))
        .expect("ridge is a proper face of the facet");
    if r.dot(&points[*q].sub(r0)).is_positive() {
        r = r.neg();
    }

    // Quotient coordinates: X = −r·(p−r0), Y = −normal·(p−r0) ≥ 0. The
    // facet's own off-ridge points sit on the positive X axis; candidates are
    // the points strictly off the facet (Y > 0). Rotating the supporting
    // hyperplane away from the facet hits the candidate with the largest
    // half-plane angle first, compared exactly by cross products.
    let mut best: Option<(Rat, Rat, usize)> = None;
    for (i, p) in points.iter().enumerate() {
        let y = -(facet.normal.dot(p) - &facet.offset);
        if !y.is_positive() {
            continue;
        }
        let x = -r.dot(&p.sub(r0));
        match &best {
            None => best = Some((x, y, i)),
            Some((bx, by, _)) => {
                // larger angle ⇔ bx·y − by·x > 0
                if (bx.clone() * &y - by.clone() * &x).is_positive() {
                    best = Some((x, y, i));
                }
            }
        }
    }
    let (_, _, witness) = best.expect("full-dimensional configuration has a neighbor facet");

    // New hyperplane through the ridge flat and the witness point.
    let mut rows: Vec<Vec<Rat>> = ridge[1..]
        .iter()
        .map(|&i| points[i].sub(r0).0)
        .collect();
    rows.push(points[witness].sub(r0).0);
    let ns = nullspace(&rows, d);
    debug_assert_eq!(ns.len(), 1);
    let mut normal = ns.into_iter().next().unwrap();
    let offset = normal.dot(r0);
    // Orient outward: all points at normal·x ≤ offset.
    if points.iter().any(|p| normal.dot(p) > offset) {
        normal = normal.neg();
    }
    let (support, offset) = support_set(points, &normal);
    Facet {
        normal,
        offset,
        support,
    }
}

/// Recursive pyramidal triangulation from the lexicographically smallest
/// vertex over facet triangulations. Returns simplices as index lists into
/// `points`; each simplex has (affine rank + 1) vertices.
pub fn triangulate(points: &[QVec]) -> Vec<Vec<usize>> {
    let (rank, pivots) = affine_rank(points);
    if rank == 0 {
        return vec![vec![0]];
    }
    let projected: Vec<QVec> = points.iter().map(|p| project_coords(p, &pivots)).collect();
    triangulate_fulldim(&projected, rank)
}

fn triangulate_fulldim(points: &[QVec], d: usize) -> Vec<Vec<usize>> {
    if points.len() == d + 1 {
        return vec![(0..points.len()).collect()];
    }
    if d == 1 {
        let lo = (0..points.len())
            .min_by(|&a, &b| points[a].0[0].cmp(&points[b].0[0]))
            .unwrap();
        let hi = (0..points.len())
            .max_by(|&a, &b| points[a].0[0].cmp(&points[b].0[0]))
            .unwrap();
        return vec![vec![lo, hi]];
    }
    let v0 = (0..points.len())
        .min_by(|&a, &b| points[a].lex_cmp(&points[b]))
        .unwrap();
    let mut out = Vec::new();
    for f in facets(points, d) {
        // skip facets containing the apex
        if f.support.contains(&v0) {
            continue;
        }
        let sup_pts: Vec<QVec> = f.support.iter().map(|&i| points[i].clone()).collect();
        let sub = triangulate(&sup_pts);
        for simplex in sub {
            let mut s: Vec<usize> = simplex.into_iter().map(|j| f.support[j]).collect();
            s.push(v0);
            out.push(s);
        }
    }
    out
}

fn simplex_volume(verts: &[&QVec]) -> Rat {
    let d = verts.len() - 1;
    let mat: Vec<Vec<Rat>> = verts[1..].iter().map(|v| v.sub(verts[0]).0).collect();
    let mut dv = det(&mat).abs();
    let mut fact = Rat::one();
    for k in 2..=d {
        fact *= Rat::from_integer(k.into());
    }
    dv /= fact;
    dv
}

/// Lebesgue volume in the ambient dimension; 0 for lower-dimensional sets.
pub fn volume(points: &[QVec]) -> Rat {
    if points.is_empty() {
        return Rat::zero();
    }
    let d = points[0].dim();
    let (rank, _) = affine_rank(points);
    if rank < d {
        return Rat::zero();
    }
    triangulate(points)
        .iter()
        .map(|s| {
            let verts: Vec<&QVec> = s.iter().map(|&i| &points[i]).collect();
            simplex_volume(&verts)
        })
        .fold(Rat::zero(), |a, b| a + b)
}

/// Exact integral of the affine function `u ↦ slope·u + c` over the hull of
/// `points` (full-dimensional volume; 0 for degenerate hulls), together with
/// the volume. Integral of an affine function over a simplex is the volume
/// times the mean of the vertex values.
pub fn integral_affine(points: &[QVec], slope: &QVec, c: &Rat) -> (Rat, Rat) {
    if points.is_empty() {
        return (Rat::zero(), Rat::zero());
    }
    let d = points[0].dim();
    let (rank, _) = affine_rank(points);
    if rank < d {
        return (Rat::zero(), Rat::zero());
    }
    let mut total = Rat::zero();
    let mut vol = Rat::zero();
    let dp1 = Rat::from_integer(((d + 1) as i64).into());
    for s in triangulate(points) {
        let verts: Vec<&QVec> = s.iter().map(|&i| &points[i]).collect();
        let v = simplex_volume(&verts);
        if v.is_zero() {
            continue;
        }
        let mean = verts
            .iter()
            .map(|p| slope.dot(p) + c)
            .fold(Rat::zero(), |a, b| a + b)
            / &dp1;
        total += v.clone() * mean;
        vol += v;
    }
    (total, vol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    fn pts(v: &[&[i64]]) -> Vec<QVec> {
        v.iter().map(|p| QVec::from_ints(p)).collect()
    }

    #[test]
    fn square_facets() {
        let sq = pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let fs = facets(&sq, 2);
        assert_eq!(fs.len(), 4);
        for f in &fs {
            assert_eq!(f.support.len(), 2);
        }
    }

    #[test]
    fn cube_facets_and_volume() {
        let mut cube = Vec::new();
        for i in 0..8 {
            cube.push(QVec::from_ints(&[i & 1, (i >> 1) & 1, (i >> 2) & 1]));
        }
        let fs = facets(&cube, 3);
        assert_eq!(fs.len(), 6);
        assert_eq!(volume(&cube), rat_i(1));
    }

    #[test]
    fn simplex_volume_formula() {
        // unit n-simplex has volume 1/n!
        for n in 1..=4usize {
            let mut s = vec![QVec::zero(n)];
            for i in 0..n {
                let mut v = vec![0i64; n];
                v[i] = 1;
                s.push(QVec::from_ints(&v));
            }
            let mut fact = 1i64;
            for k in 2..=n as i64 {
                fact *= k;
            }
            assert_eq!(volume(&s), rat(1, fact));
        }
    }

    #[test]
    fn octahedron() {
        let oct = pts(&[
            &[1, 0, 0],
            &[-1, 0, 0],
            &[0, 1, 0],
            &[0, -1, 0],
            &[0, 0, 1],
            &[0, 0, -1],
        ]);
        let fs = facets(&oct, 3);
        assert_eq!(fs.len(), 8);
        assert_eq!(volume(&oct), rat(4, 3));
    }

    #[test]
    fn degenerate_and_interior_points() {
        // collinear point removed, interior point ignored by wrap
        let p = pts(&[&[0, 0], &[4, 0], &[0, 4], &[1, 1], &[2, 0]]);
        let ex = extreme_points(&p);
        assert_eq!(ex.len(), 3);
        assert_eq!(volume(&p), rat_i(8));
    }

    #[test]
    fn lower_dimensional_volume_zero() {
        let seg = pts(&[&[0, 0], &[2, 0]]);
        assert_eq!(volume(&seg), rat_i(0));
    }

    #[test]
    fn affine_integral_square() {
        // ∫ (x+y) over unit square = 1
        let sq = pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let (i, v) = integral_affine(&sq, &QVec::from_ints(&[1, 1]), &rat_i(0));
        assert_eq!(v, rat_i(1));
        assert_eq!(i, rat_i(1));
    }

    #[test]
    fn four_dim_cross_polytope() {
        let mut p = Vec::new();
        for i in 0..4usize {
            for s in [1i64, -1] {
                let mut v = vec![0i64; 4];
                v[i] = s;
                p.push(QVec::from_ints(&v));
            }
        }
        let fs = facets(&p, 4);
        assert_eq!(fs.len(), 16);
        // volume of the 4-dim cross polytope: 2^4 / 4! = 2/3
        assert_eq!(volume(&p), rat(2, 3));
    }

    #[test]
    fn random_volume_against_box_decomposition() {
        // hull of box corners plus interior points still has box volume
        let mut p = Vec::new();
        for x in 0..3i64 {
            for y in 0..2i64 {
                p.push(QVec::from_ints(&[x, y]));
            }
        }
        assert_eq!(volume(&p), rat_i(2));
    }

    /// Shoelace formula over angularly sorted hull vertices: an independent
    /// exact 2-D area oracle.
    fn shoelace(points: &[QVec]) -> Rat {
        let vs = extreme_points(points);
        if vs.len() < 3 {
            return Rat::zero();
        }
        // sort around the centroid by exact half-plane + cross-product order
        let n = Rat::from_integer((vs.len() as i64).into());
        let cx = vs.iter().map(|v| v.0[0].clone()).fold(Rat::zero(), |a, b| a + b) / &n;
        let cy = vs.iter().map(|v| v.0[1].clone()).fold(Rat::zero(), |a, b| a + b) / &n;
        let mut rel: Vec<(Rat, Rat)> = vs
            .iter()
            .map(|v| (v.0[0].clone() - &cx, v.0[1].clone() - &cy))
            .collect();
        rel.sort_by(|a, b| {
            let ha = (a.1.is_negative() || (a.1.is_zero() && a.0.is_negative())) as u8;
            let hb = (b.1.is_negative() || (b.1.is_zero() && b.0.is_negative())) as u8;
            if ha != hb {
                return ha.cmp(&hb);
            }
            let cross = b.0.clone() * &a.1 - b.1.clone() * &a.0;
            Rat::zero().cmp(&cross)
        });
        let mut two_a = Rat::zero();
        for i in 0..rel.len() {
            let (x1, y1) = &rel[i];
            let (x2, y2) = &rel[(i + 1) % rel.len()];
            two_a += x1.clone() * y2 - x2.clone() * y1;
        }
        (two_a / Rat::from_integer(2.into())).abs()
    }

    /// Brute-force facet finder: every supporting hyperplane spanned by a
    /// point subset, checked by sign tests. Exponential; test-only oracle.
    fn brute_facets(points: &[QVec], d: usize) -> HashSet<Vec<usize>> {
        use itertools::Itertools;
        let mut out = HashSet::new();
        for combo in (0..points.len()).combinations(d) {
            let base = &points[combo[0]];
            let rows: Vec<Vec<Rat>> = combo[1..]
                .iter()
                .map(|&i| points[i].sub(base).0)
                .collect();
            let ns = nullspace(&rows, d);
            if ns.len() != 1 {
                continue;
            }
            let n = &ns[0];
            let b = n.dot(base);
            let mut pos = false;
            let mut neg = false;
            for p in points {
                let v = n.dot(p) - &b;
                if v.is_positive() {
                    pos = true;
                } else if v.is_negative() {
                    neg = true;
                }
            }
            if pos && neg {
                continue;
            }
            let support: Vec<usize> = (0..points.len())
                .filter(|&i| points[i].dot(n) == b)
                .collect();
            let sup_pts: Vec<QVec> = support.iter().map(|&i| points[i].clone()).collect();
            if affine_rank(&sup_pts).0 == d - 1 {
                out.insert(support);
            }
        }
        out
    }

    #[test]
    fn randomized_cross_check_2d_3d() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20260809);
        for trial in 0..40 {
            let d = if trial % 2 == 0 { 2 } else { 3 };
            let k = rng.gen_range(d + 1..d + 7);
            let pts: Vec<QVec> = (0..k)
                .map(|_| {
                    QVec(
                        (0..d)
                            .map(|_| rat(rng.gen_range(-6..=6), rng.gen_range(1..=3)))
                            .collect(),
                    )
                })
                .collect();
            if affine_rank(&pts).0 < d {
                continue;
            }
            let ex = extreme_points(&pts);
            let mine: HashSet<Vec<usize>> = facets(&ex, d)
                .into_iter()
                .map(|f| {
                    let mut s = f.support;
                    s.sort_unstable();
                    s
                })
                .collect();
            assert_eq!(mine, brute_facets(&ex, d), "facet mismatch dim {d}, trial {trial}");
            if d == 2 {
                assert_eq!(volume(&pts), shoelace(&pts), "area mismatch trial {trial}");
            }
        }
    }
}
