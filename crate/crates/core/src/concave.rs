//! Piecewise-affine concave calculus: Legendre–Fenchel duals,
//! sup-convolutions, exact integrals and mixed integrals, direct images.
//!
//! A `PAConcave` is a min of finitely many affine pieces on a domain that is
//! either all of space or a rational polytope. Constants are rational; a
//! per-function `Scale` records an overall factor of log p, so that the
//! tropical roof functions at a finite place stay exact (the mixed integral
//! is 1-homogeneous, so a common scale factors out of every identity).

use crate::error::{Error, Result};
use crate::hull;
use crate::lp::{maximize_free, LpOutcome};
use crate::polytope::{convex_hull, minkowski_sum, project, LinearMapQ, Polytope};
use crate::rat::{rat_from_f64, rat_to_f64, QVec, Rat};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Overall factor in front of an otherwise rational function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    One,
    /// The function is `ln(p)` times its rational part.
    LogPrime(u64),
}

impl Scale {
    pub fn factor_f64(&self) -> f64 {
        match self {
            Scale::One => 1.0,
            Scale::LogPrime(p) => (*p as f64).ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffinePiece {
    pub slope: QVec,
    pub constant: Rat,
}

impl AffinePiece {
    pub fn new(slope: QVec, constant: Rat) -> Self {
        AffinePiece { slope, constant }
    }

    pub fn eval(&self, u: &QVec) -> Rat {
        self.slope.dot(u) + &self.constant
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PADomain {
    Whole,
    Poly(Polytope),
}

/// Min of affine pieces on its domain; always stored canonically (pieces
/// pruned to the ones active on a relatively open subset, reduced modulo the
/// affine hull of the domain, sorted). Equality is representation equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAConcave {
    dim: usize,
    domain: PADomain,
    pieces: Vec<AffinePiece>,
    scale: Scale,
}

impl PAConcave {
    pub fn new(dim: usize, domain: PADomain, pieces: Vec<AffinePiece>, scale: Scale) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptyInput("PAConcave needs at least one piece".into()));
        }
        for p in &pieces {
            if p.slope.dim() != dim {
                return Err(Error::DimensionMismatch(
                    "piece slope length must equal the ambient dimension".into(),
                ));
            }
        }
        if let PADomain::Poly(pl) = &domain {
            if pl.ambient_dim() != dim {
                return Err(Error::DimensionMismatch(
                    "domain dimension must equal the ambient dimension".into(),
                ));
            }
        }
        let mut f = PAConcave {
            dim,
            domain,
            pieces,
            scale,
        };
        f.canonicalize();
        Ok(f)
    }

    /// The zero function on Δ.
    pub fn indicator(delta: &Polytope) -> PAConcave {
        PAConcave {
            dim: delta.ambient_dim(),
            domain: PADomain::Poly(delta.clone()),
            pieces: vec![AffinePiece::new(QVec::zero(delta.ambient_dim()), Rat::zero())],
            scale: Scale::One,
        }
    }

    /// A single affine function on Δ.
    pub fn affine_on(delta: &Polytope, slope: QVec, constant: Rat) -> Result<PAConcave> {
        PAConcave::new(
            delta.ambient_dim(),
            PADomain::Poly(delta.clone()),
            vec![AffinePiece::new(slope, constant)],
            Scale::One,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &PADomain {
        &self.domain
    }

    pub fn domain_polytope(&self) -> Option<&Polytope> {
        match &self.domain {
            PADomain::Poly(p) => Some(p),
            PADomain::Whole => None,
        }
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn with_scale(mut self, scale: Scale) -> PAConcave {
        self.scale = scale;
        self
    }

    /// Value of the rational part (excluding the scale factor); `None` off
    /// the domain.
    pub fn eval_rat(&self, u: &QVec) -> Option<Rat> {
        if let PADomain::Poly(p) = &self.domain {
            if !p.contains(u) {
                return None;
            }
        }
        self.pieces.iter().map(|p| p.eval(u)).min()
    }

    pub fn eval_f64(&self, u: &QVec) -> Option<f64> {
        self.eval_rat(u)
            .map(|v| rat_to_f64(&v) * self.scale.factor_f64())
    }

    /// Largest |slope| coordinate; a Lipschitz bound for the rational part
    /// in the sup-norm.
    pub fn lipschitz_rat(&self) -> Rat {
        let mut best = Rat::zero();
        for p in &self.pieces {
            for s in &p.slope.0 {
                let a = s.abs();
                if a > best {
                    best = a;
                }
            }
        }
        best
    }

    fn canonicalize(&mut self) {
        // Reduce pieces modulo the affine hull of a polytope domain so that
        // functions differing only off the domain compare equal.
        if let PADomain::Poly(pl) = &self.domain {
            let verts = pl.vertices();
            let (rank, pivots) = hull::affine_rank(verts);
            if rank < self.dim {
                let base = &verts[0];
                // Affine chart: u ∈ aff(Δ) is determined by its pivot
                // coordinates; express each piece in chart form.
                // Build the affine parameterization u = base + B·(t − t_base)
                // where t = pivot coords. Solve by expressing direction
                // vectors.
                let dirs: Vec<QVec> = verts[1..].iter().map(|v| v.sub(base)).collect();
                self.pieces = self
                    .pieces
                    .iter()
                    .map(|p| reduce_piece(p, base, &dirs, &pivots, self.dim, rank))
                    .collect();
            }
        }
        self.pieces.sort();
        self.pieces.dedup();
        if self.pieces.len() > 1 {
            let keep = self.essential_pieces();
            if !keep.is_empty() {
                self.pieces = keep;
            }
        }
        self.pieces.sort();
    }

    /// Pieces that strictly achieve the minimum somewhere on the domain
    /// (exact LP test).
    fn essential_pieces(&self) -> Vec<AffinePiece> {
        let idx: Vec<usize> = (0..self.pieces.len()).collect();
        idx.iter()
            .filter(|&&i| self.piece_essential(i))
            .map(|&i| self.pieces[i].clone())
            .collect()
    }

    fn piece_essential(&self, i: usize) -> bool {
        let pi = &self.pieces[i];
        match &self.domain {
            PADomain::Whole => {
                // max t s.t. (A_j − A_i)(u) ≥ t for all j — variables (u, t)
                let d = self.dim;
                let mut cons = Vec::new();
                let mut rhs = Vec::new();
                for (j, pj) in self.pieces.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    // t − (s_j − s_i)·u ≤ c_j − c_i
                    let mut row: Vec<Rat> = pj
                        .slope
                        .sub(&pi.slope)
                        .0
                        .into_iter()
                        .map(|x| -x)
                        .collect();
                    row.push(Rat::one());
                    cons.push(row);
                    rhs.push(pj.constant.clone() - &pi.constant);
                }
                let mut obj = vec![Rat::zero(); d];
                obj.push(Rat::one());
                match maximize_free(&obj, &cons, &rhs) {
                    LpOutcome::Unbounded => true,
                    LpOutcome::Optimal { value, .. } => value.is_positive(),
                    LpOutcome::Infeasible => false,
                }
            }
            PADomain::Poly(pl) => {
                // u = Σ λ_k w_k with λ in the simplex; max t.
                let verts = pl.vertices();
                let k = verts.len();
                let mut cons = Vec::new();
                let mut rhs = Vec::new();
                for (j, pj) in self.pieces.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let dvals: Vec<Rat> = verts
                        .iter()
                        .map(|w| pj.eval(w) - pi.eval(w))
                        .collect();
                    // t − Σ λ_k d_k ≤ 0
                    let mut row: Vec<Rat> = dvals.into_iter().map(|x| -x).collect();
                    row.push(Rat::one());
                    cons.push(row);
                    rhs.push(Rat::zero());
                }
                // λ_k ≥ 0 → −λ_k ≤ 0
                for q in 0..k {
                    let mut row = vec![Rat::zero(); k + 1];
                    row[q] = -Rat::one();
                    cons.push(row);
                    rhs.push(Rat::zero());
                }
                // Σ λ = 1 (two inequalities)
                let mut row = vec![Rat::one(); k + 1];
                row[k] = Rat::zero();
                cons.push(row.clone());
                rhs.push(Rat::one());
                cons.push(row.into_iter().map(|x| -x).collect());
                rhs.push(-Rat::one());

                let mut obj = vec![Rat::zero(); k];
                obj.push(Rat::one());
                match maximize_free(&obj, &cons, &rhs) {
                    LpOutcome::Unbounded => true,
                    LpOutcome::Optimal { value, .. } => value.is_positive(),
                    LpOutcome::Infeasible => false,
                }
            }
        }
    }

    /// The subdivision vertices of the domain induced by the pieces (domain
    /// vertices plus all cell vertices where pieces exchange the minimum).
    /// Requires a polytope domain.
    pub fn kink_points(&self) -> Result<Vec<QVec>> {
        let pl = match &self.domain {
            PADomain::Poly(p) => p,
            PADomain::Whole => {
                return Err(Error::UnboundedDomain(
                    "kink points need a bounded domain".into(),
                ))
            }
        };
        let mut out: Vec<QVec> = Vec::new();
        for (i, _) in self.pieces.iter().enumerate() {
            let mut cell = Some(pl.clone());
            for (j, pj) in self.pieces.iter().enumerate() {
                if i == j {
                    continue;
                }
                let pi = &self.pieces[i];
                // A_i ≤ A_j ⇔ (s_i − s_j)·u ≤ c_j − c_i
                let n = pi.slope.sub(&pj.slope);
                let b = pj.constant.clone() - &pi.constant;
                cell = match cell {
                    Some(c) => c.clip(&n, &b),
                    None => None,
                };
                if cell.is_none() {
                    break;
                }
            }
            if let Some(c) = cell {
                out.extend(c.vertices().iter().cloned());
            }
        }
        out.sort_by(|a, b| a.lex_cmp(b));
        out.dedup();
        Ok(out)
    }
}

/// Expresses a piece in the canonical chart of a lower-dimensional domain:
/// slope supported on the pivot coordinates of the hull, equal values on the
/// domain.
fn reduce_piece(
    piece: &AffinePiece,
    base: &QVec,
    dirs: &[QVec],
    pivots: &[usize],
    dim: usize,
    rank: usize,
) -> AffinePiece {
    if rank == 0 {
        return AffinePiece::new(QVec::zero(dim), piece.eval(base));
    }
    // Solve slope' (supported on pivots) with slope'·d = slope·d for all
    // direction vectors d; the pivot-coordinate system is invertible by the
    // choice of pivots.
    let mut mat: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    for d in dirs {
        mat.push(pivots.iter().map(|&c| d.0[c].clone()).collect());
        rhs.push(piece.slope.dot(d));
    }
    // Gaussian solve of the (possibly overdetermined, consistent) system.
    let mut aug: Vec<Vec<Rat>> = mat
        .iter()
        .zip(&rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let (rnk, pcols) = hull::row_reduce(&mut aug);
    debug_assert_eq!(rnk, rank);
    let mut s = vec![Rat::zero(); rank];
    for (r, &pc) in pcols.iter().enumerate() {
        debug_assert!(pc < rank);
        s[pc] = aug[r][rank].clone();
    }
    let mut slope = vec![Rat::zero(); dim];
    for (k, &c) in pivots.iter().enumerate() {
        slope[c] = s[k].clone();
    }
    let slope = QVec(slope);
    let constant = piece.eval(base) - slope.dot(base);
    AffinePiece::new(slope, constant)
}

/// Upper concave envelope of lifted points (uᵢ, tᵢ) ⊂ ℝ^{d+1}: returns the
/// PA function whose graph is the upper boundary of the hull, on the hull of
/// the base points.
pub fn upper_envelope(lifted: &[(QVec, Rat)], dim: usize, scale: Scale) -> Result<PAConcave> {
    if lifted.is_empty() {
        return Err(Error::EmptyInput("upper_envelope".into()));
    }
    let base: Vec<QVec> = lifted.iter().map(|(u, _)| u.clone()).collect();
    let domain = convex_hull(&base, dim)?;
    let (base_rank, base_pivots) = hull::affine_rank(domain.vertices());

    // Work in the chart of the base affine hull.
    let chart = |u: &QVec| QVec(base_pivots.iter().map(|&c| u.0[c].clone()).collect());
    let lifted_chart: Vec<QVec> = lifted
        .iter()
        .map(|(u, t)| {
            let mut v = chart(u).0;
            v.push(t.clone());
            QVec(v)
        })
        .collect();

    let (lrank, _) = hull::affine_rank(&lifted_chart);
    let pieces_chart: Vec<(QVec, Rat)> = if lrank <= base_rank {
        // All lifted points on one affine graph: a single piece, found by
        // interpolation through affinely independent points.
        vec![interpolate_affine(&lifted_chart, base_rank)]
    } else {
        debug_assert_eq!(lrank, base_rank + 1);
        let mut out = Vec::new();
        for f in hull::facets(&lifted_chart, base_rank + 1) {
            let nt = f.normal.0[base_rank].clone();
            if !nt.is_positive() {
                continue;
            }
            // n_u·u + n_t·t = b on the facet → t = (b − n_u·u)/n_t
            let slope = QVec(
                f.normal.0[..base_rank]
                    .iter()
                    .map(|x| -(x.clone()) / &nt)
                    .collect(),
            );
            let c = f.offset.clone() / &nt;
            out.push((slope, c));
        }
        debug_assert!(!out.is_empty());
        out
    };

    // Lift the chart slopes back to ambient coordinates (zero off-pivot).
    let pieces: Vec<AffinePiece> = pieces_chart
        .into_iter()
        .map(|(s, c)| {
            let mut slope = vec![Rat::zero(); dim];
            for (k, &pc) in base_pivots.iter().enumerate() {
                slope[pc] = s.0[k].clone();
            }
            AffinePiece::new(QVec(slope), c)
        })
        .collect();
    PAConcave::new(dim, PADomain::Poly(domain), pieces, scale)
}

/// Affine interpolation through points (u, t) whose u-part spans a
/// `rank`-dimensional chart: returns (slope, const) in chart coordinates.
fn interpolate_affine(lifted_chart: &[QVec], rank: usize) -> (QVec, Rat) {
    // Solve s·u + c = t on affinely independent points.
    let p0 = &lifted_chart[0];
    let (u0, t0) = (QVec(p0.0[..rank].to_vec()), p0.0[rank].clone());
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    for p in &lifted_chart[1..] {
        let du: Vec<Rat> = (0..rank).map(|k| p.0[k].clone() - &u0.0[k]).collect();
        rows.push(du);
        rhs.push(p.0[rank].clone() - &t0);
    }
    if rows.is_empty() {
        return (QVec::zero(rank), t0);
    }
    let mut aug: Vec<Vec<Rat>> = rows
        .iter()
        .zip(&rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let (_, pcols) = hull::row_reduce(&mut aug);
    let mut s = vec![Rat::zero(); rank];
    for (r, &pc) in pcols.iter().enumerate() {
        if pc < rank {
            s[pc] = aug[r][rank].clone();
        }
    }
    let s = QVec(s);
    let c = t0 - s.dot(&u0);
    (s, c)
}

/// Concave Legendre–Fenchel conjugate f^∨(m) = inf_u (⟨m,u⟩ − f(u)).
///
/// A min-of-affines on all of space dualizes to the upper envelope of the
/// points (slope, −const) on the hull of the slopes; a function on a compact
/// polytope dualizes to the min over its subdivision vertices v of
/// ⟨·,v⟩ − f(v), defined on all of space. The two directions are mutually
/// inverse on canonical representatives.
pub fn legendre_dual(f: &PAConcave) -> Result<PAConcave> {
    match &f.domain {
        PADomain::Whole => {
            let lifted: Vec<(QVec, Rat)> = f
                .pieces
                .iter()
                .map(|p| (p.slope.clone(), -p.constant.clone()))
                .collect();
            upper_envelope(&lifted, f.dim, f.scale)
        }
        PADomain::Poly(_) => {
            let kinks = f.kink_points()?;
            let pieces: Vec<AffinePiece> = kinks
                .iter()
                .map(|v| {
                    let val = f.eval_rat(v).expect("kink points lie in the domain");
                    AffinePiece::new(v.clone(), -val)
                })
                .collect();
            PAConcave::new(f.dim, PADomain::Whole, pieces, f.scale)
        }
    }
}

/// Pointwise sum f + g on the intersection of the domains. Scales must agree.
pub fn add(f: &PAConcave, g: &PAConcave) -> Result<PAConcave> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch("add: ambient dimensions differ".into()));
    }
    if f.scale != g.scale {
        return Err(Error::Invalid("add: mismatched scales".into()));
    }
    let domain = match (&f.domain, &g.domain) {
        (PADomain::Whole, PADomain::Whole) => PADomain::Whole,
        (PADomain::Whole, PADomain::Poly(p)) | (PADomain::Poly(p), PADomain::Whole) => {
            PADomain::Poly(p.clone())
        }
        (PADomain::Poly(p), PADomain::Poly(q)) => {
            let mut cur = p.clone();
            for (n, b) in q.halfspaces() {
                cur = cur
                    .clip(&n, &b)
                    .ok_or_else(|| Error::EmptyInput("add: empty domain intersection".into()))?;
            }
            PADomain::Poly(cur)
        }
    };
    let mut pieces = Vec::with_capacity(f.pieces.len() * g.pieces.len());
    for a in &f.pieces {
        for b in &g.pieces {
            pieces.push(AffinePiece::new(
                a.slope.add(&b.slope),
                a.constant.clone() + &b.constant,
            ));
        }
    }
    PAConcave::new(f.dim, domain, pieces, f.scale)
}

/// Sup-convolution (f ⊞ g)(m) = sup{f(m₁)+g(m₂) : m₁+m₂ = m}. Computed
/// through the hypograph characterization: the lifted kink points of f and g
/// Minkowski-add, and f ⊞ g is the upper envelope of the sums. The domain is
/// the Minkowski sum of the domains.
pub fn sup_convolution(f: &PAConcave, g: &PAConcave) -> Result<PAConcave> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch(
            "sup_convolution: ambient dimensions differ".into(),
        ));
    }
    if f.scale != g.scale {
        return Err(Error::Invalid("sup_convolution: mismatched scales".into()));
    }
    let (kf, kg) = (f.kink_points()?, g.kink_points()?);
    let mut lifted = Vec::with_capacity(kf.len() * kg.len());
    for a in &kf {
        let fa = f.eval_rat(a).expect("kink in domain");
        for b in &kg {
            let gb = g.eval_rat(b).expect("kink in domain");
            lifted.push((a.add(b), fa.clone() + &gb));
        }
    }
    upper_envelope(&lifted, f.dim, f.scale)
}

pub fn sup_convolution_many(fs: &[&PAConcave]) -> Result<PAConcave> {
    let mut it = fs.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::EmptyInput("sup_convolution_many".into()))?;
    let mut acc = (*first).clone();
    for f in it {
        acc = sup_convolution(&acc, f)?;
    }
    Ok(acc)
}

/// Exact integral of the rational part over the polytope domain, by
/// recursively splitting the domain along piece-exchange hyperplanes until a
/// single piece is active, then integrating affine functions over exact
/// triangulations. Lower-dimensional domains integrate to zero.
pub fn integral_rat(f: &PAConcave) -> Result<Rat> {
    let pl = f
        .domain_polytope()
        .ok_or_else(|| Error::UnboundedDomain("integral needs a bounded domain".into()))?;
    let mut total = Rat::zero();
    let mut stack: Vec<(Polytope, Vec<usize>)> = vec![(pl.clone(), (0..f.pieces.len()).collect())];
    while let Some((region, active)) = stack.pop() {
        if active.len() == 1 {
            let p = &f.pieces[active[0]];
            let (int, _) = hull::integral_affine(region.vertices(), &p.slope, &p.constant);
            total += int;
            continue;
        }
        let (i, j) = (active[0], active[1]);
        let (pi, pj) = (&f.pieces[i], &f.pieces[j]);
        let n = pi.slope.sub(&pj.slope);
        let b = pj.constant.clone() - &pi.constant;
        // A_i ≤ A_j side: drop j; other side: drop i.
        if let Some(r1) = region.clip(&n, &b) {
            let rest: Vec<usize> = active.iter().copied().filter(|&k| k != j).collect();
            stack.push((r1, rest));
        }
        if let Some(r2) = region.clip(&n.neg(), &(-b)) {
            let rest: Vec<usize> = active.iter().copied().filter(|&k| k != i).collect();
            stack.push((r2, rest));
        }
    }
    Ok(total)
}

/// A computed quantity: exact rational, exact rational multiple of log p, or
/// a float with an error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Exact(String),
    ExactLog { rat: String, ln_prime: u64 },
    Approx { value: f64, err: f64 },
}

impl Value {
    pub fn exact(r: Rat) -> Value {
        Value::Exact(crate::rat::format_rat(&r))
    }

    pub fn exact_scaled(r: Rat, scale: Scale) -> Value {
        match scale {
            Scale::One => Value::exact(r),
            Scale::LogPrime(p) => Value::ExactLog {
                rat: crate::rat::format_rat(&r),
                ln_prime: p,
            },
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(s) => rat_to_f64(&crate::rat::parse_rat(s).expect("stored rational")),
            Value::ExactLog { rat, ln_prime } => {
                rat_to_f64(&crate::rat::parse_rat(rat).expect("stored rational"))
                    * (*ln_prime as f64).ln()
            }
            Value::Approx { value, .. } => *value,
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            Value::Approx { err, .. } => *err,
            _ => 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Value::Approx { .. })
    }
}

/// Integral including the scale factor.
pub fn integral(f: &PAConcave) -> Result<Value> {
    let r = integral_rat(f)?;
    Ok(Value::exact_scaled(r, f.scale))
}

/// Mixed integral of n+1 concave functions on ℝⁿ:
/// MI(θ₀,…,θₙ) = Σ_{∅≠S⊆{0..n}} (−1)^{n+1−|S|} ∫ ⊞_{i∈S} θᵢ.
/// Exact for PA inputs with a common scale; with mixed scales the log-prime
/// constants are replaced by tight rational approximations and the resulting
/// perturbation is reported as an error bound.
pub fn mixed_integral(fs: &[PAConcave]) -> Result<Value> {
    let n = match fs.len() {
        0 => return Err(Error::EmptyInput("mixed_integral".into())),
        l => l - 1,
    };
    for f in fs {
        if f.dim() != n {
            return Err(Error::CountMismatch(format!(
                "mixed_integral needs n+1 = {} functions on ℝ^{n}, got one on ℝ^{}",
                n + 1,
                f.dim()
            )));
        }
        if f.domain_polytope().is_none() {
            return Err(Error::UnboundedDomain(
                "mixed_integral needs bounded domains".into(),
            ));
        }
    }
    // Scale reconciliation.
    let mut scales: Vec<Scale> = fs.iter().map(|f| f.scale()).collect();
    scales.dedup();
    let nontrivial: Vec<Scale> = {
        let mut s: Vec<Scale> = fs
            .iter()
            .map(|f| f.scale())
            .filter(|s| !matches!(s, Scale::One))
            .collect();
        s.sort_by_key(|s| match s {
            Scale::One => 0,
            Scale::LogPrime(p) => *p,
        });
        s.dedup();
        s
    };
    let all_same = fs.iter().all(|f| f.scale() == fs[0].scale());
    if all_same {
        let r = mixed_integral_rat(fs)?;
        return Ok(Value::exact_scaled(r, fs[0].scale()));
    }
    if nontrivial.len() == 1 {
        // Zero functions are scale-agnostic: if every Scale::One slot is the
        // zero function, rescale it and stay exact.
        let target = nontrivial[0];
        let zero_ok = fs.iter().all(|f| {
            f.scale() == target || f.pieces().iter().all(|p| p.slope.is_zero() && p.constant.is_zero())
        });
        if zero_ok {
            let rescaled: Vec<PAConcave> = fs.iter().map(|f| f.clone().with_scale(target)).collect();
            let r = mixed_integral_rat(&rescaled)?;
            return Ok(Value::exact_scaled(r, target));
        }
    }
    // Mixed scales: approximate each log p by an exact rational to ~1e-30 and
    // propagate the perturbation linearly through the inclusion–exclusion.
    let approx: Vec<PAConcave> = fs.iter().map(descale).collect();
    let r = mixed_integral_rat(&approx)?;
    let mut err = 0.0f64;
    for f in fs {
        if let Scale::LogPrime(_) = f.scale() {
            let cmax = f
                .pieces()
                .iter()
                .map(|p| rat_to_f64(&p.constant).abs())
                .fold(0.0f64, f64::max);
            err += 1e-29 * (1.0 + cmax);
        }
    }
    // Inclusion–exclusion amplification: ≤ 2^{n+1} terms, each domain sum has
    // volume bounded by the sum of diameters; fold a crude factor in.
    let amplify = (1u64 << fs.len()) as f64 * 100.0;
    Ok(Value::Approx {
        value: rat_to_f64(&r),
        err: err * amplify,
    })
}

/// Replaces a LogPrime scale by a rational approximation of ln p accurate to
/// ~1e-30, producing a Scale::One function.
fn descale(f: &PAConcave) -> PAConcave {
    match f.scale() {
        Scale::One => f.clone(),
        Scale::LogPrime(p) => {
            let ln = crate::dd::Dd::ln_u64(p);
            let lr = rat_from_f64(ln.hi) + rat_from_f64(ln.lo);
            let pieces = f
                .pieces()
                .iter()
                .map(|pc| AffinePiece::new(pc.slope.scale(&lr), pc.constant.clone() * &lr))
                .collect();
            PAConcave::new(f.dim(), f.domain().clone(), pieces, Scale::One)
                .expect("rescaled pieces stay valid")
        }
    }
}

/// Exact mixed integral of the rational parts (common scale assumed).
pub fn mixed_integral_rat(fs: &[PAConcave]) -> Result<Rat> {
    let count = fs.len();
    let n = count - 1;
    let masks: Vec<u32> = (1u32..(1 << count)).collect();
    let terms: Vec<Result<Rat>> = masks
        .par_iter()
        .map(|&mask| {
            let subset: Vec<&PAConcave> = (0..count)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| &fs[i])
                .collect();
            let conv = sup_convolution_many(&subset)?;
            let int = integral_rat(&conv)?;
            let k = mask.count_ones() as usize;
            Ok(if (n + 1 - k) % 2 == 0 { int } else { -int })
        })
        .collect();
    let mut total = Rat::zero();
    for t in terms {
        total += t?;
    }
    Ok(total)
}

/// Direct image γ_* f (w ↦ max of f over the fiber), exact via projecting the
/// lifted kink points and reading the upper envelope.
pub fn direct_image(map: &LinearMapQ, f: &PAConcave) -> Result<PAConcave> {
    if map.source_dim != f.dim() {
        return Err(Error::DimensionMismatch(
            "direct_image: map source must match the function's space".into(),
        ));
    }
    let kinks = f.kink_points()?;
    let lifted: Vec<(QVec, Rat)> = kinks
        .iter()
        .map(|v| (map.apply(v), f.eval_rat(v).expect("kink in domain")))
        .collect();
    let env = upper_envelope(&lifted, map.target_dim, f.scale())?;
    // sanity: domain equals the projected domain
    debug_assert_eq!(
        env.domain_polytope().unwrap(),
        &project(f.domain_polytope().unwrap(), map).unwrap()
    );
    Ok(env)
}

/// Restriction of sup-convolution used by tests: the Minkowski sum of the
/// domains through the polytope module (cross-check for the envelope route).
pub fn domain_of_sup_convolution(f: &PAConcave, g: &PAConcave) -> Result<Polytope> {
    minkowski_sum(
        f.domain_polytope()
            .ok_or_else(|| Error::UnboundedDomain("sup-convolution domain".into()))?,
        g.domain_polytope()
            .ok_or_else(|| Error::UnboundedDomain("sup-convolution domain".into()))?,
    )
}

// ---------------------------------------------------------------------------
// JSON schema: {"domain": polytope, "pieces": [{"slope": […], "const": r}],
//              "scale_log": p?}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct PaJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<crate::polytope::PolytopeJson>,
    pub pieces: Vec<PieceJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_log: Option<u64>,
}

#[derive(Serialize, Deserialize)]
pub struct PieceJson {
    pub slope: Vec<serde_json::Value>,
    #[serde(rename = "const")]
    pub constant: serde_json::Value,
}

impl PAConcave {
    pub fn to_json(&self) -> PaJson {
        PaJson {
            domain: self.domain_polytope().map(|p| p.to_json()),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceJson {
                    slope: p
                        .slope
                        .0
                        .iter()
                        .map(|r| serde_json::Value::String(crate::rat::format_rat(r)))
                        .collect(),
                    constant: serde_json::Value::String(crate::rat::format_rat(&p.constant)),
                })
                .collect(),
            scale_log: match self.scale {
                Scale::One => None,
                Scale::LogPrime(p) => Some(p),
            },
        }
    }

    pub fn from_json(j: &PaJson, dim_hint: Option<usize>) -> Result<PAConcave> {
        let domain = match &j.domain {
            Some(pj) => PADomain::Poly(Polytope::from_json(pj)?),
            None => PADomain::Whole,
        };
        let dim = match (&domain, dim_hint) {
            (PADomain::Poly(p), _) => p.ambient_dim(),
            (PADomain::Whole, Some(d)) => d,
            (PADomain::Whole, None) => j
                .pieces
                .first()
                .map(|p| p.slope.len())
                .ok_or_else(|| Error::EmptyInput("concave function with no pieces".into()))?,
        };
        let mut pieces = Vec::new();
        for p in &j.pieces {
            let mut slope = Vec::new();
            for s in &p.slope {
                slope.push(crate::json_rat(s)?);
            }
            pieces.push(AffinePiece::new(QVec(slope), crate::json_rat(&p.constant)?));
        }
        let scale = match j.scale_log {
            Some(p) => Scale::LogPrime(p),
            None => Scale::One,
        };
        PAConcave::new(dim, domain, pieces, scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    fn seg01() -> Polytope {
        Polytope::from_ints(1, &[&[0], &[1]])
    }

    fn whole_min(pieces: &[(&[i64], i64)]) -> PAConcave {
        PAConcave::new(
            pieces[0].0.len(),
            PADomain::Whole,
            pieces
                .iter()
                .map(|(s, c)| AffinePiece::new(QVec::from_ints(s), rat_i(*c)))
                .collect(),
            Scale::One,
        )
        .unwrap()
    }

    #[test]
    fn indicator_is_zero_function() {
        let sq = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let i = PAConcave::indicator(&sq);
        assert_eq!(i.eval_rat(&QVec(vec![rat(1, 2), rat(1, 2)])), Some(rat_i(0)));
        assert_eq!(i.eval_rat(&QVec::from_ints(&[5, 5])), None);
    }

    #[test]
    fn dual_of_trivial_valuation_line() {
        // f = min(0, u) on ℝ → 0 on [0,1]
        let f = whole_min(&[(&[0], 0), (&[1], 0)]);
        let d = legendre_dual(&f).unwrap();
        assert_eq!(d.domain_polytope().unwrap(), &seg01());
        assert_eq!(d.eval_rat(&QVec(vec![rat(1, 3)])), Some(rat_i(0)));
        assert_eq!(d.pieces().len(), 1);
    }

    #[test]
    fn dual_envelope_by_hand() {
        // f = min(0, c + u) with c = 2 (stand-in for log 2 scale) → m ↦ −2m
        let f = whole_min(&[(&[0], 0), (&[1], 2)]);
        let d = legendre_dual(&f).unwrap();
        assert_eq!(d.domain_polytope().unwrap(), &seg01());
        assert_eq!(d.eval_rat(&QVec(vec![rat_i(1)])), Some(rat_i(-2)));
        assert_eq!(d.eval_rat(&QVec(vec![rat(1, 2)])), Some(rat_i(-1)));
    }

    #[test]
    fn dual_of_affine_is_point() {
        // f = ⟨(2,3),u⟩ + 5 → domain {(2,3)}, value −5
        let f = whole_min(&[(&[2, 3], 5)]);
        let d = legendre_dual(&f).unwrap();
        assert!(d.domain_polytope().unwrap().is_point());
        assert_eq!(d.eval_rat(&QVec::from_ints(&[2, 3])), Some(rat_i(-5)));
    }

    #[test]
    fn involution_on_whole_domain() {
        let f = whole_min(&[(&[0, 0], 0), (&[1, 0], 1), (&[0, 1], -2), (&[2, 1], 3)]);
        let dd = legendre_dual(&legendre_dual(&f).unwrap()).unwrap();
        assert_eq!(f, dd);
    }

    #[test]
    fn involution_on_bounded_domain() {
        // concave roof on [0,2]: min(u, 2−u) like shape with rational pieces
        let dom = Polytope::from_ints(1, &[&[0], &[2]]);
        let f = PAConcave::new(
            1,
            PADomain::Poly(dom),
            vec![
                AffinePiece::new(QVec::from_ints(&[1]), rat_i(0)),
                AffinePiece::new(QVec::from_ints(&[-1]), rat_i(2)),
            ],
            Scale::One,
        )
        .unwrap();
        let dd = legendre_dual(&legendre_dual(&f).unwrap()).unwrap();
        assert_eq!(f, dd);
    }

    #[test]
    fn sup_convolution_examples() {
        // (x on [0,1]) ⊞ (x on [0,1]) = x on [0,2]
        let f = PAConcave::affine_on(&seg01(), QVec::from_ints(&[1]), rat_i(0)).unwrap();
        let s = sup_convolution(&f, &f).unwrap();
        assert_eq!(
            s.domain_polytope().unwrap(),
            &Polytope::from_ints(1, &[&[0], &[2]])
        );
        assert_eq!(s.eval_rat(&QVec(vec![rat(3, 2)])), Some(rat(3, 2)));

        // f ⊞ indicator({0}) = f
        let origin = Polytope::point(QVec::zero(1));
        let e = PAConcave::indicator(&origin);
        assert_eq!(sup_convolution(&f, &e).unwrap(), f);

        // indicators convolve to the indicator of the Minkowski sum
        let d1 = Polytope::from_ints(2, &[&[0, 0], &[1, 0]]);
        let d2 = Polytope::from_ints(2, &[&[0, 0], &[0, 1]]);
        let c = sup_convolution(&PAConcave::indicator(&d1), &PAConcave::indicator(&d2)).unwrap();
        let sum = minkowski_sum(&d1, &d2).unwrap();
        assert_eq!(c, PAConcave::indicator(&sum));
    }

    #[test]
    fn integral_examples() {
        let sq = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(integral_rat(&PAConcave::indicator(&sq)).unwrap(), rat_i(0));

        let f = PAConcave::affine_on(&seg01(), QVec::from_ints(&[1]), rat_i(0)).unwrap();
        assert_eq!(integral_rat(&f).unwrap(), rat(1, 2));

        // min(u, 1−u) on [0,1] → 1/4
        let tent = PAConcave::new(
            1,
            PADomain::Poly(seg01()),
            vec![
                AffinePiece::new(QVec::from_ints(&[1]), rat_i(0)),
                AffinePiece::new(QVec::from_ints(&[-1]), rat_i(1)),
            ],
            Scale::One,
        )
        .unwrap();
        assert_eq!(integral_rat(&tent).unwrap(), rat(1, 4));
    }

    #[test]
    fn mixed_integral_examples() {
        let z = PAConcave::indicator(&seg01());
        match mixed_integral(&[z.clone(), z.clone()]).unwrap() {
            Value::Exact(s) => assert_eq!(s, "0"),
            v => panic!("expected exact, got {v:?}"),
        }

        let f = PAConcave::affine_on(&seg01(), QVec::from_ints(&[1]), rat_i(0)).unwrap();
        match mixed_integral(&[f.clone(), f.clone()]).unwrap() {
            Value::Exact(s) => assert_eq!(s, "1"),
            v => panic!("expected exact, got {v:?}"),
        }

        let tri = Polytope::unit_simplex(2);
        let i = PAConcave::indicator(&tri);
        match mixed_integral(&[i.clone(), i.clone(), i.clone()]).unwrap() {
            Value::Exact(s) => assert_eq!(s, "0"),
            v => panic!("expected exact, got {v:?}"),
        }
    }

    #[test]
    fn diagonal_identity_small() {
        // MI(θ,θ) = 2! ∫θ for a two-piece roof on [0,2]
        let dom = Polytope::from_ints(1, &[&[0], &[2]]);
        let theta = PAConcave::new(
            1,
            PADomain::Poly(dom),
            vec![
                AffinePiece::new(QVec::from_ints(&[1]), rat_i(1)),
                AffinePiece::new(QVec::from_ints(&[-1]), rat_i(3)),
            ],
            Scale::One,
        )
        .unwrap();
        let mi = mixed_integral_rat(&[theta.clone(), theta.clone()]).unwrap();
        let int = integral_rat(&theta).unwrap();
        assert_eq!(mi, int * rat_i(2));
    }

    #[test]
    fn direct_image_examples() {
        // γ=(u₁,u₂)↦u₁, f = u₁+u₂ on unit square → w ↦ w+1 on [0,1]
        let sq = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let f = PAConcave::affine_on(&sq, QVec::from_ints(&[1, 1]), rat_i(0)).unwrap();
        let g = direct_image(&LinearMapQ::from_int_rows(&[&[1, 0]]), &f).unwrap();
        assert_eq!(g.domain_polytope().unwrap(), &seg01());
        assert_eq!(g.eval_rat(&QVec(vec![rat(1, 2)])), Some(rat(3, 2)));

        // identity map: unchanged
        let id = LinearMapQ::identity(2);
        assert_eq!(direct_image(&id, &f).unwrap(), f);

        // indicator maps to indicator of the projection
        let tri = Polytope::unit_simplex(2);
        let ind = PAConcave::indicator(&tri);
        let img = direct_image(&LinearMapQ::from_int_rows(&[&[1, 1]]), &ind).unwrap();
        assert_eq!(img, PAConcave::indicator(&seg01()));
    }

    #[test]
    fn direct_image_brute_force_grid() {
        // grid brute-force over fibers for γ=(u₁,u₂)↦u₁
        let sq = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let f = PAConcave::new(
            2,
            PADomain::Poly(sq),
            vec![
                AffinePiece::new(QVec::from_ints(&[1, 1]), rat_i(0)),
                AffinePiece::new(QVec::from_ints(&[-1, 0]), rat_i(2)),
            ],
            Scale::One,
        )
        .unwrap();
        let g = direct_image(&LinearMapQ::from_int_rows(&[&[1, 0]]), &f).unwrap();
        for wi in 0..=10i64 {
            let w = rat(wi, 10);
            let mut best: Option<Rat> = None;
            for vi in 0..=10i64 {
                let v = rat(vi, 10);
                if let Some(val) = f.eval_rat(&QVec(vec![w.clone(), v])) {
                    best = Some(match best {
                        None => val,
                        Some(b) => b.max(val),
                    });
                }
            }
            assert_eq!(g.eval_rat(&QVec(vec![w])), best);
        }
    }

    #[test]
    fn scaled_mixed_integral_stays_exact() {
        // all slots sharing ln 2 scale: MI = (rational) × ln 2
        let roof = PAConcave::new(
            1,
            PADomain::Poly(seg01()),
            vec![AffinePiece::new(QVec::from_ints(&[1]), rat_i(0))],
            Scale::LogPrime(2),
        )
        .unwrap();
        match mixed_integral(&[roof.clone(), roof]).unwrap() {
            Value::ExactLog { rat, ln_prime } => {
                assert_eq!(rat, "1");
                assert_eq!(ln_prime, 2);
            }
            v => panic!("expected exact log value, got {v:?}"),
        }
    }

    #[test]
    fn point_domain_canonicalization() {
        let p = Polytope::point(QVec::from_ints(&[1, 1]));
        let f = PAConcave::new(
            2,
            PADomain::Poly(p.clone()),
            vec![AffinePiece::new(QVec::from_ints(&[3, -1]), rat_i(2))],
            Scale::One,
        )
        .unwrap();
        // canonical on a point: slope zero, constant = the value
        assert_eq!(f.pieces().len(), 1);
        assert!(f.pieces()[0].slope.is_zero());
        assert_eq!(f.pieces()[0].constant, rat_i(4));
        assert_eq!(f, PAConcave::new(
            2,
            PADomain::Poly(p),
            vec![AffinePiece::new(QVec::zero(2), rat_i(4))],
            Scale::One,
        ).unwrap());
    }
}
