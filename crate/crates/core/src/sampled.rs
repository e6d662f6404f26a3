//! Grid-sampled concave functions: the numerical stand-in for archimedean
//! Ronkin roofs.
//!
//! A `SampledConcave` stores node values of a concave function that is
//! defined (as a concave extension) on a whole neighborhood of its domain
//! polytope; the domain only governs integration. Discretization and
//! quadrature errors ride along as a per-node bound plus a Lipschitz
//! constant, and propagate linearly through sup-convolutions and mixed
//! integrals.

use crate::concave::PAConcave;
use crate::error::{Error, Result};
use crate::polytope::{minkowski_sum, Polytope};
use crate::rat::{rat_to_f64, QVec, Rat};
use num_traits::Zero;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Coordinates of node (0,…,0), exact.
    pub origin: Vec<Rat>,
    /// Per-axis step, exact and positive.
    pub step: Vec<Rat>,
    /// Node counts per axis.
    pub shape: Vec<usize>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform grid with exactly the given step, node 0 at lo, covering
    /// [lo, hi] (the last node may overshoot hi by < step). A fixed step
    /// keeps grids of different functions convolution-compatible.
    pub fn covering(lo: &[Rat], hi: &[Rat], step: &Rat) -> GridSpec {
        let dim = lo.len();
        let mut shape = Vec::with_capacity(dim);
        for i in 0..dim {
            let width = hi[i].clone() - &lo[i];
            if width.is_zero() {
                shape.push(1);
                continue;
            }
            let n = (rat_to_f64(&(width / step)).ceil() as usize).max(1);
            shape.push(n + 1);
        }
        GridSpec {
            origin: lo.to_vec(),
            step: vec![step.clone(); dim],
            shape,
        }
    }

    pub fn node_rat(&self, idx: &[usize]) -> QVec {
        QVec(
            idx.iter()
                .enumerate()
                .map(|(a, &i)| self.origin[a].clone() + self.step[a].clone() * Rat::from_integer((i as i64).into()))
                .collect(),
        )
    }

    pub fn node_f64(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, &i)| rat_to_f64(&self.origin[a]) + rat_to_f64(&self.step[a]) * i as f64)
            .collect()
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for (a, &i) in idx.iter().enumerate() {
            f = f * self.shape[a] + i;
        }
        f
    }

    /// flat index of `idx` with coordinate `axis` replaced by `val`.
    pub fn flat_with(&self, idx: &[usize], axis: usize, val: usize) -> usize {
        let mut f = 0;
        for (a, &i) in idx.iter().enumerate() {
            f = f * self.shape[a] + if a == axis { val } else { i };
        }
        f
    }

    pub fn unflat(&self, mut f: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = f % self.shape[a];
            f /= self.shape[a];
        }
        idx
    }

    pub fn max_step_f64(&self) -> f64 {
        self.step.iter().map(rat_to_f64).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledConcave {
    pub grid: GridSpec,
    /// Node values, row major; finite wherever the concave extension exists.
    pub values: Vec<f64>,
    /// Integration domain.
    pub domain: Option<Polytope>,
    /// Sup-norm Lipschitz bound of the sampled function.
    pub lipschitz: f64,
    /// Per-node |stored − true| bounds (same layout as `values`).
    pub errs: Vec<f64>,
}

impl SampledConcave {
    pub fn new(
        grid: GridSpec,
        values: Vec<f64>,
        domain: Polytope,
        lipschitz: f64,
        value_err: f64,
    ) -> Result<Self> {
        let errs = vec![value_err; values.len()];
        Self::with_errs(grid, values, domain, lipschitz, errs)
    }

    pub fn with_errs(
        grid: GridSpec,
        values: Vec<f64>,
        domain: Polytope,
        lipschitz: f64,
        errs: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != grid.len() || errs.len() != grid.len() {
            return Err(Error::CountMismatch(format!(
                "grid has {} nodes, {} values / {} errors given",
                grid.len(),
                values.len(),
                errs.len()
            )));
        }
        let s = SampledConcave {
            grid,
            values,
            domain: Some(domain),
            lipschitz,
            errs,
        };
        s.check_midpoint_concavity()?;
        Ok(s)
    }

    pub fn max_err(&self) -> f64 {
        self.errs.iter().fold(0.0, |a, b| a.max(*b))
    }

    pub fn domain(&self) -> &Polytope {
        self.domain.as_ref().expect("sampled concave carries a domain")
    }

    /// Discrete midpoint concavity on interior triples, within
    /// 4·Lip·h + 3·value_err.
    pub fn check_midpoint_concavity(&self) -> Result<()> {
        let tol0 = 4.0 * self.lipschitz * self.grid.max_step_f64() + 1e-12;
        let dim = self.grid.dim();
        for f in 0..self.grid.len() {
            let idx = self.grid.unflat(f);
            let v = self.values[f];
            if !v.is_finite() {
                continue;
            }
            for a in 0..dim {
                if idx[a] == 0 || idx[a] + 1 >= self.grid.shape[a] {
                    continue;
                }
                let mut l = idx.clone();
                l[a] -= 1;
                let mut r = idx.clone();
                r[a] += 1;
                let (fl_l, fl_r) = (self.grid.flat(&l), self.grid.flat(&r));
                let (vl, vr) = (self.values[fl_l], self.values[fl_r]);
                let tol = tol0 + self.errs[f] + 0.5 * (self.errs[fl_l] + self.errs[fl_r]) + 2.0 * self.max_err();
                if vl.is_finite() && vr.is_finite() && v < 0.5 * (vl + vr) - tol {
                    return Err(Error::Invalid(format!(
                        "midpoint concavity violated at node {idx:?} by {}",
                        0.5 * (vl + vr) - v
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact sampling of a PA function (its global min-of-affines extension)
    /// onto a grid.
    pub fn from_pa(f: &PAConcave, grid: GridSpec) -> Result<SampledConcave> {
        let domain = f
            .domain_polytope()
            .ok_or_else(|| Error::UnboundedDomain("sampling needs a bounded domain".into()))?
            .clone();
        let scale = f.scale().factor_f64();
        let values: Vec<f64> = (0..grid.len())
            .map(|fl| {
                let node = grid.node_rat(&grid.unflat(fl));
                let v = f
                    .pieces()
                    .iter()
                    .map(|p| p.eval(&node))
                    .min()
                    .expect("nonempty pieces");
                rat_to_f64(&v) * scale
            })
            .collect();
        let lip = rat_to_f64(&f.lipschitz_rat()) * scale.abs().max(1.0);
        SampledConcave::new(grid, values, domain, lip, 1e-12 * (1.0 + lip))
    }

    /// Max-plus (sup) convolution on matching grids. Grids must share steps;
    /// the output grid covers the Minkowski sum of the domains.
    pub fn sup_convolution(&self, other: &SampledConcave) -> Result<SampledConcave> {
        let dim = self.grid.dim();
        if other.grid.dim() != dim {
            return Err(Error::DimensionMismatch("sampled sup-convolution".into()));
        }
        if self.grid.step != other.grid.step {
            return Err(Error::Invalid(
                "sampled sup-convolution requires equal grid steps".into(),
            ));
        }
        let out_grid = GridSpec {
            origin: self
                .grid
                .origin
                .iter()
                .zip(&other.grid.origin)
                .map(|(a, b)| a + b)
                .collect(),
            step: self.grid.step.clone(),
            shape: self
                .grid
                .shape
                .iter()
                .zip(&other.grid.shape)
                .map(|(a, b)| a + b - 1)
                .collect(),
        };
        let h = self.grid.max_step_f64();
        let gap = 0.5 * h * self.lipschitz.min(other.lipschitz) * dim as f64;
        let (values, errs): (Vec<f64>, Vec<f64>) = if dim == 1 {
            (
                conv1d_concave(&self.values, &other.values),
                conv1d_errs(&self.values, &other.values, &self.errs, &other.errs, gap),
            )
        } else {
            let mut out = vec![f64::NEG_INFINITY; out_grid.len()];
            let mut oerr = vec![0.0f64; out_grid.len()];
            out.par_iter_mut()
                .zip(oerr.par_iter_mut())
                .enumerate()
                .for_each(|(fl, (slot, eslot))| {
                    let m = out_grid.unflat(fl);
                    let (v, e) = max_over_splits(self, other, &m);
                    *slot = v;
                    *eslot = e + gap;
                });
            (out, oerr)
        };
        let domain = minkowski_sum(self.domain(), other.domain())?;
        Ok(SampledConcave {
            grid: out_grid,
            values,
            domain: Some(domain),
            lipschitz: self.lipschitz + other.lipschitz,
            errs,
        })
    }

    /// Midpoint-style integral over the domain: each node weights its grid
    /// cell clipped exactly against the domain polytope. Returns the value
    /// and a rigorous error bound h/2·Lip·vol + value_err·vol.
    pub fn integral(&self) -> Result<(f64, f64)> {
        let dim = self.grid.dim();
        let domain = self.domain();
        if domain.dim() < dim {
            return Ok((0.0, 0.0));
        }
        let halves = domain.halfspaces();
        let two = Rat::from_integer(2.into());
        let half_step: Vec<Rat> = self.grid.step.iter().map(|s| s.clone() / &two).collect();

        let node_terms: Vec<(f64, f64)> = (0..self.grid.len())
            .into_par_iter()
            .map(|fl| {
                let idx = self.grid.unflat(fl);
                let node = self.grid.node_rat(&idx);
                // cell = node ± step/2 as a polytope, clipped by the domain
                let mut corners = Vec::with_capacity(1 << dim);
                for mask in 0..(1usize << dim) {
                    let mut c = node.0.clone();
                    for (a, coord) in c.iter_mut().enumerate() {
                        if mask >> a & 1 == 1 {
                            *coord += &half_step[a];
                        } else {
                            *coord -= &half_step[a];
                        }
                    }
                    corners.push(QVec(c));
                }
                // quick inside test: if every corner satisfies the halfspaces
                let fully_inside = corners.iter().all(|c| {
                    halves.iter().all(|(n, b)| n.dot(c) <= *b)
                });
                let vol = if fully_inside {
                    self.grid
                        .step
                        .iter()
                        .fold(Rat::from_integer(1.into()), |a, s| a * s)
                } else {
                    let mut cell = crate::polytope::convex_hull(&corners, dim).expect("box");
                    let mut alive = true;
                    for (n, b) in &halves {
                        match cell.clip(n, b) {
                            Some(c) => cell = c,
                            None => {
                                alive = false;
                                break;
                            }
                        }
                    }
                    if alive {
                        cell.volume()
                    } else {
                        Rat::zero()
                    }
                };
                if vol.is_zero() {
                    return (0.0, 0.0);
                }
                let v = self.values[fl];
                let w = rat_to_f64(&vol);
                if !v.is_finite() {
                    // no concave extension at this node; neighbor fallback
                    let fb = self.neighbor_fallback(&idx);
                    return (fb * w, w * (2.0 * self.lipschitz * self.grid.max_step_f64()));
                }
                (v * w, w * self.errs[fl])
            })
            .collect();

        let mut total = 0.0;
        let mut node_err = 0.0;
        for (t, e) in node_terms {
            total += t;
            node_err += e;
        }
        let vol = rat_to_f64(&domain.volume());
        let err = vol * 0.5 * self.grid.max_step_f64() * self.lipschitz * dim as f64 + node_err;
        Ok((total, err))
    }

    fn neighbor_fallback(&self, idx: &[usize]) -> f64 {
        let dim = self.grid.dim();
        let mut best = f64::NEG_INFINITY;
        for a in 0..dim {
            for d in [-1i64, 1] {
                let ni = idx[a] as i64 + d;
                if ni < 0 || ni as usize >= self.grid.shape[a] {
                    continue;
                }
                let mut n = idx.to_vec();
                n[a] = ni as usize;
                let v = self.values[self.grid.flat(&n)];
                if v.is_finite() {
                    best = best.max(v - self.lipschitz * rat_to_f64(&self.grid.step[a]));
                }
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }

    /// Discrete concave conjugate g(m) = min over nodes u of (⟨m,u⟩ − f(u)),
    /// evaluated on an automatically sized slope grid.
    pub fn dual(&self) -> SampledConcave {
        // slope range per axis from extreme finite differences, padded a step
        let dim = self.grid.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for fl in 0..self.grid.len() {
            let idx = self.grid.unflat(fl);
            let v = self.values[fl];
            if !v.is_finite() {
                continue;
            }
            for a in 0..dim {
                if idx[a] + 1 < self.grid.shape[a] {
                    let mut n = idx.clone();
                    n[a] += 1;
                    let w = self.values[self.grid.flat(&n)];
                    if w.is_finite() {
                        let d = (w - v) / rat_to_f64(&self.grid.step[a]);
                        lo[a] = lo[a].min(d);
                        hi[a] = hi[a].max(d);
                    }
                }
            }
        }
        for a in 0..dim {
            if !lo[a].is_finite() {
                lo[a] = 0.0;
                hi[a] = 0.0;
            }
        }
        let step = self
            .grid
            .step
            .iter()
            .fold(Rat::from_integer(1.into()), |m, s| if *s < m { s.clone() } else { m });
        // Pad by a full step so boundary slopes stay visible to the next
        // finite-difference pass (the conjugate's conjugate must see them).
        let lo_r: Vec<Rat> = lo
            .iter()
            .map(|&x| crate::rat::rat_from_f64(x) - &step)
            .collect();
        let hi_r: Vec<Rat> = hi
            .iter()
            .map(|&x| crate::rat::rat_from_f64(x) + &step)
            .collect();
        let dual_grid = GridSpec::covering(&lo_r, &hi_r, &step);
        self.dual_on(dual_grid)
    }

    pub fn dual_on(&self, dual_grid: GridSpec) -> SampledConcave {
        let nodes_f64: Vec<Vec<f64>> = (0..self.grid.len())
            .map(|fl| self.grid.node_f64(&self.grid.unflat(fl)))
            .collect();
        let values: Vec<f64> = (0..dual_grid.len())
            .into_par_iter()
            .map(|fl| {
                let m = dual_grid.node_f64(&dual_grid.unflat(fl));
                let mut best = f64::INFINITY;
                for (u, fv) in nodes_f64.iter().zip(&self.values) {
                    if !fv.is_finite() {
                        continue;
                    }
                    let dot: f64 = m.iter().zip(u).map(|(a, b)| a * b).sum();
                    best = best.min(dot - fv);
                }
                best
            })
            .collect();
        let values_len = values.len();
        // domain of the dual: box of the dual grid (callers refine)
        let dim = dual_grid.dim();
        let mut corners = Vec::new();
        for mask in 0..(1usize << dim) {
            let mut c = Vec::with_capacity(dim);
            for a in 0..dim {
                let mut x = dual_grid.origin[a].clone();
                if mask >> a & 1 == 1 {
                    x += dual_grid.step[a].clone()
                        * Rat::from_integer(((dual_grid.shape[a] - 1) as i64).into());
                }
                c.push(x);
            }
            corners.push(QVec(c));
        }
        let domain = crate::polytope::convex_hull(&corners, dim).expect("box");
        let lip = (0..self.grid.len())
            .filter(|&fl| self.values[fl].is_finite())
            .map(|fl| {
                self.grid
                    .node_f64(&self.grid.unflat(fl))
                    .iter()
                    .map(|x| x.abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let e = self.max_err() + 0.5 * self.grid.max_step_f64() * (self.lipschitz + lip);
        SampledConcave {
            grid: dual_grid,
            values,
            domain: Some(domain),
            lipschitz: lip,
            errs: vec![e; values_len],
        }
    }
}

fn max_over_splits(f: &SampledConcave, g: &SampledConcave, m: &[usize]) -> (f64, f64) {
    let dim = m.len();
    // iterate over f's indices i with 0 ≤ m−i < g.shape
    let mut lo = vec![0usize; dim];
    let mut hi = vec![0usize; dim];
    for a in 0..dim {
        let mi = m[a];
        lo[a] = mi.saturating_sub(g.grid.shape[a] - 1);
        hi[a] = mi.min(f.grid.shape[a] - 1);
        if lo[a] > hi[a] {
            return (f64::NEG_INFINITY, 0.0);
        }
    }
    let mut idx = lo.clone();
    let mut best = f64::NEG_INFINITY;
    let mut best_err = 0.0f64;
    loop {
        let fi = f.grid.flat(&idx);
        let gi_idx: Vec<usize> = (0..dim).map(|a| m[a] - idx[a]).collect();
        let gi = g.grid.flat(&gi_idx);
        let s = f.values[fi] + g.values[gi];
        let e = f.errs[fi] + g.errs[gi];
        if s.is_finite() {
            if s > best {
                best = s;
            }
            if e > best_err {
                best_err = e;
            }
        }
        // advance odometer
        let mut a = dim;
        loop {
            if a == 0 {
                return (best, best_err);
            }
            a -= 1;
            if idx[a] < hi[a] {
                idx[a] += 1;
                for b in a + 1..dim {
                    idx[b] = lo[b];
                }
                break;
            }
        }
    }
}

/// Error counterpart of the 1-D fast convolution: a sound per-node bound is
/// the max of err_f + err_g over the finite splits; with contiguous finite
/// runs this is bounded by max(err_f) + max(err_g), used here.
fn conv1d_errs(f: &[f64], g: &[f64], ef: &[f64], eg: &[f64], gap: f64) -> Vec<f64> {
    let me = ef
        .iter()
        .zip(f)
        .filter(|(_, v)| v.is_finite())
        .map(|(e, _)| *e)
        .fold(0.0f64, f64::max)
        + eg.iter()
            .zip(g)
            .filter(|(_, v)| v.is_finite())
            .map(|(e, _)| *e)
            .fold(0.0f64, f64::max);
    vec![me + gap; f.len() + g.len() - 1]
}

/// 1-D max-plus convolution of concave sequences in linear time: the
/// increment sequences are nonincreasing, so the convolution's increments are
/// their sorted merge.
fn conv1d_concave(f: &[f64], g: &[f64]) -> Vec<f64> {
    // locate finite runs (concave ⇒ contiguous)
    let fr = finite_run(f);
    let gr = finite_run(g);
    let out_len = f.len() + g.len() - 1;
    let mut out = vec![f64::NEG_INFINITY; out_len];
    let (Some((fs, fe)), Some((gs, ge))) = (fr, gr) else {
        return out;
    };
    let df: Vec<f64> = (fs..fe).map(|i| f[i + 1] - f[i]).collect();
    let dg: Vec<f64> = (gs..ge).map(|i| g[i + 1] - g[i]).collect();
    let mut cur = f[fs] + g[gs];
    let start = fs + gs;
    out[start] = cur;
    let (mut i, mut j) = (0usize, 0usize);
    let mut k = start + 1;
    while i < df.len() || j < dg.len() {
        let take_f = j >= dg.len() || (i < df.len() && df[i] >= dg[j]);
        cur += if take_f { df[i] } else { dg[j] };
        if take_f {
            i += 1;
        } else {
            j += 1;
        }
        out[k] = cur;
        k += 1;
    }
    out
}

fn finite_run(v: &[f64]) -> Option<(usize, usize)> {
    let s = v.iter().position(|x| x.is_finite())?;
    let e = v.len() - 1 - v.iter().rev().position(|x| x.is_finite()).unwrap();
    Some((s, e))
}

/// Mixed integral of sampled functions (common grid steps):
/// Σ_{∅≠S} (−1)^{n+1−|S|} ∫ ⊞_S fᵢ, with the error bounds of each term
/// accumulated.
pub fn mixed_integral_sampled(fs: &[&SampledConcave]) -> Result<(f64, f64)> {
    let count = fs.len();
    if count == 0 {
        return Err(Error::EmptyInput("mixed_integral_sampled".into()));
    }
    let n = count - 1;
    for f in fs {
        if f.grid.dim() != n {
            return Err(Error::CountMismatch(format!(
                "mixed integral of {count} sampled functions needs dimension {n}"
            )));
        }
    }
    let masks: Vec<u32> = (1u32..(1 << count)).collect();
    let terms: Vec<Result<(f64, f64)>> = masks
        .par_iter()
        .map(|&mask| {
            let subset: Vec<&SampledConcave> = (0..count)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| fs[i])
                .collect();
            let mut acc: SampledConcave = (*subset[0]).clone();
            for f in &subset[1..] {
                acc = acc.sup_convolution(f)?;
            }
            let (v, e) = acc.integral()?;
            let k = mask.count_ones() as usize;
            Ok(if (n + 1 - k) % 2 == 0 { (v, e) } else { (-v, e) })
        })
        .collect();
    let mut value = 0.0;
    let mut err = 0.0;
    for t in terms {
        let (v, e) = t?;
        value += v;
        err += e;
    }
    Ok((value, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concave::{mixed_integral_rat, AffinePiece, PADomain, Scale};
    use crate::rat::{rat, rat_i};

    fn seg(a: i64, b: i64) -> Polytope {
        Polytope::from_ints(1, &[&[a], &[b]])
    }

    fn pa_tent() -> PAConcave {
        PAConcave::new(
            1,
            PADomain::Poly(seg(0, 2)),
            vec![
                AffinePiece::new(QVec::from_ints(&[1]), rat_i(0)),
                AffinePiece::new(QVec::from_ints(&[-1]), rat_i(2)),
            ],
            Scale::One,
        )
        .unwrap()
    }

    fn grid1(lo: i64, hi: i64, step_den: i64) -> GridSpec {
        GridSpec::covering(&[rat_i(lo)], &[rat_i(hi)], &rat(1, step_den))
    }

    #[test]
    fn sampling_and_integral_match_exact() {
        let f = pa_tent();
        let s = SampledConcave::from_pa(&f, grid1(0, 2, 64)).unwrap();
        let (v, e) = s.integral().unwrap();
        let exact = crate::concave::integral_rat(&f).unwrap();
        let exact = rat_to_f64(&exact);
        assert!((v - exact).abs() <= e, "v={v} exact={exact} err={e}");
        assert!(e < 0.05);
    }

    #[test]
    fn sup_convolution_vs_exact() {
        let f = pa_tent();
        let sf = SampledConcave::from_pa(&f, grid1(0, 2, 64)).unwrap();
        let conv = sf.sup_convolution(&sf).unwrap();
        let exact_conv = crate::concave::sup_convolution(&f, &f).unwrap();
        // compare at grid nodes
        for fl in (0..conv.grid.len()).step_by(7) {
            let node = conv.grid.node_rat(&conv.grid.unflat(fl));
            let ex = exact_conv.eval_rat(&node);
            // global extension: evaluate min over pieces even off-domain
            let ex = match ex {
                Some(v) => rat_to_f64(&v),
                None => continue,
            };
            assert!(
                (conv.values[fl] - ex).abs() <= conv.errs[fl] + 1e-9,
                "node {fl}: {} vs {ex}",
                conv.values[fl]
            );
        }
    }

    #[test]
    fn mixed_integral_sampled_matches_exact() {
        let f = pa_tent();
        let g = PAConcave::affine_on(&seg(0, 1), QVec::from_ints(&[1]), rat_i(0)).unwrap();
        let sf = SampledConcave::from_pa(&f, grid1(0, 2, 64)).unwrap();
        let sg = SampledConcave::from_pa(&g, grid1(0, 1, 64)).unwrap();
        let (mi, err) = mixed_integral_sampled(&[&sf, &sg]).unwrap();
        let exact = rat_to_f64(&mixed_integral_rat(&[f, g]).unwrap());
        assert!((mi - exact).abs() <= err, "mi={mi} exact={exact} err={err}");
    }

    #[test]
    fn mixed_integral_sampled_2d() {
        let tri = Polytope::unit_simplex(2);
        let f = PAConcave::affine_on(&tri, QVec::from_ints(&[1, 0]), rat_i(0)).unwrap();
        let g = PAConcave::indicator(&tri);
        let h = PAConcave::affine_on(&tri, QVec::from_ints(&[0, 1]), rat_i(1)).unwrap();
        let grid = GridSpec::covering(&[rat_i(0), rat_i(0)], &[rat_i(1), rat_i(1)], &rat(1, 24));
        let sf = SampledConcave::from_pa(&f, grid.clone()).unwrap();
        let sg = SampledConcave::from_pa(&g, grid.clone()).unwrap();
        let sh = SampledConcave::from_pa(&h, grid).unwrap();
        let (mi, err) = mixed_integral_sampled(&[&sf, &sg, &sh]).unwrap();
        let exact = rat_to_f64(&mixed_integral_rat(&[f, g, h]).unwrap());
        assert!((mi - exact).abs() <= err, "mi={mi} exact={exact} err={err}");
        assert!((mi - exact).abs() < 0.08, "mi={mi} exact={exact}");
    }

    #[test]
    fn dual_twice_recovers_function() {
        let f = pa_tent();
        let s = SampledConcave::from_pa(&f, grid1(0, 2, 32)).unwrap();
        let dd = s.dual().dual();
        // compare on the middle of the original domain
        for x in [rat(1, 2), rat_i(1), rat(3, 2)] {
            let exact = rat_to_f64(&f.eval_rat(&QVec(vec![x.clone()])).unwrap());
            // locate nearest dual-dual node
            let xf = rat_to_f64(&x);
            let mut best = f64::INFINITY;
            let mut val = 0.0;
            for fl in 0..dd.grid.len() {
                let n = dd.grid.node_f64(&dd.grid.unflat(fl));
                if (n[0] - xf).abs() < best {
                    best = (n[0] - xf).abs();
                    val = dd.values[fl];
                }
            }
            assert!((val - exact).abs() < 0.1, "at {xf}: {val} vs {exact}");
        }
    }

    #[test]
    fn conv1d_matches_direct() {
        let f = vec![f64::NEG_INFINITY, 0.0, 1.0, 1.5, f64::NEG_INFINITY];
        let g = vec![0.0, 2.0, 3.0];
        let fast = conv1d_concave(&f, &g);
        for (k, fv) in fast.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for i in 0..f.len() {
                if k >= i && k - i < g.len() {
                    best = best.max(f[i] + g[k - i]);
                }
            }
            if best.is_finite() || fv.is_finite() {
                assert!((fv - best).abs() < 1e-12, "k={k}: {fv} vs {best}");
            }
        }
    }
}
