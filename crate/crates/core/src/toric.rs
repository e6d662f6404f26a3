//! Heights of toric cycles: global heights of toric divisors as sums of
//! mixed integrals over places, hypersurface heights with Ronkin roof slots,
//! the limit-height evaluator for torsion-translated complete intersections,
//! the pushforward reduction, and the torsion-translate sampling experiment.

use crate::concave::{mixed_integral, PAConcave, Value};
use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};
use crate::heights::{height_tuple_cyclo, HeightBreakdown};
use crate::laurent::LaurentPolynomial;
use crate::polytope::{mixed_volume, project, LinearMapQ, Polytope};
use crate::quad::{sub_rng, QuadratureConfig};
use crate::rat::{rat_to_f64, Rat};
use crate::ronkin::{ronkin_roof, PlaceQ, RoofConfig, RoofFn};
use crate::sampled::{mixed_integral_sampled, GridSpec, SampledConcave};
use num_integer::Integer;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A semipositive toric divisor: its polytope and the finitely many places
/// with a non-canonical roof function. Unspecified places default to the
/// canonical metric (zero roof on Δ).
#[derive(Debug, Clone)]
pub struct ToricDivisorData {
    polytope: Polytope,
    roofs: BTreeMap<String, (PlaceQ, PAConcave)>,
}

impl ToricDivisorData {
    /// The canonical (Weil) metric on the divisor of Δ.
    pub fn canonical(polytope: Polytope) -> Self {
        ToricDivisorData {
            polytope,
            roofs: BTreeMap::new(),
        }
    }

    pub fn with_roof(mut self, place: PlaceQ, roof: PAConcave) -> Result<Self> {
        match roof.domain_polytope() {
            Some(d) if d == &self.polytope => {}
            _ => {
                return Err(Error::Invalid(
                    "roof domain must be exactly the divisor polytope".into(),
                ))
            }
        }
        self.roofs.insert(place.label(), (place, roof));
        Ok(self)
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceQ> + '_ {
        self.roofs.values().map(|(p, _)| *p)
    }

    pub fn roof_at(&self, place: PlaceQ) -> PAConcave {
        match self.roofs.get(&place.label()) {
            Some((_, r)) => r.clone(),
            None => PAConcave::indicator(&self.polytope),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaceContribution {
    pub place: String,
    pub value: f64,
    pub error: f64,
    /// Exact form when the place was evaluated in exact arithmetic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeightReport {
    pub contributions: Vec<PlaceContribution>,
    pub total: f64,
    pub total_error: f64,
}

impl HeightReport {
    fn from_contributions(contributions: Vec<PlaceContribution>) -> HeightReport {
        let total = contributions.iter().map(|c| c.value).sum();
        let total_error = contributions.iter().map(|c| c.error).sum();
        HeightReport {
            contributions,
            total,
            total_error,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub quad: QuadratureConfig,
    pub roof: RoofConfig,
}

impl EvalConfig {
    pub fn new(seed: u64) -> EvalConfig {
        EvalConfig {
            quad: QuadratureConfig::new(1 << 15, seed),
            roof: RoofConfig::default(),
        }
    }
}

/// Global height of the toric cycle: Σ_v MI of the n+1 roof functions at v
/// (all-canonical places contribute the mixed integral of indicators, which
/// vanishes). Exactly the m = 0 case of `gualdi_limit`.
pub fn toric_height(divisors: &[ToricDivisorData]) -> Result<HeightReport> {
    gualdi_limit(divisors, &[], &EvalConfig::new(0))
}

/// Height of the hypersurface cut out by f: the last slot's roofs are the
/// Ronkin roofs of f per place.
pub fn hypersurface_height(
    divisors: &[ToricDivisorData],
    f: &LaurentPolynomial,
    cfg: &EvalConfig,
) -> Result<HeightReport> {
    gualdi_limit(divisors, &[f], cfg)
}

/// The limit-height evaluator: Σ_v MI(θ_{0,v},…,θ_{n−m,v}, ρ_{1,v}^∨,…,
/// ρ_{m,v}^∨) with the Ronkin roofs of the f_i in the last m slots. With
/// m = 0 this is the toric height.
pub fn gualdi_limit(
    divisors: &[ToricDivisorData],
    fs: &[&LaurentPolynomial],
    cfg: &EvalConfig,
) -> Result<HeightReport> {
    if divisors.is_empty() {
        return Err(Error::EmptyInput("gualdi_limit needs at least one divisor".into()));
    }
    let n = divisors[0].polytope.ambient_dim();
    for d in divisors {
        if d.polytope.ambient_dim() != n {
            return Err(Error::DimensionMismatch(
                "divisor polytopes must share the ambient space".into(),
            ));
        }
    }
    for f in fs {
        if f.n_vars() != n {
            return Err(Error::DimensionMismatch(
                "polynomials must live on the divisor torus".into(),
            ));
        }
    }
    if divisors.len() + fs.len() != n + 1 {
        return Err(Error::CountMismatch(format!(
            "need (n−m+1) divisors + m polynomials = n+1 = {} slots in ℝ^{n}, got {} + {}",
            n + 1,
            divisors.len(),
            fs.len()
        )));
    }

    // Relevant places: divisor places, coefficient primes of the f's, and
    // the archimedean place when any Ronkin slot exists. All other places
    // have only indicator roofs and contribute zero exactly.
    let mut places: BTreeMap<String, PlaceQ> = BTreeMap::new();
    for d in divisors {
        for p in d.places() {
            places.insert(p.label(), p);
        }
    }
    if !fs.is_empty() {
        places.insert(PlaceQ::Archimedean.label(), PlaceQ::Archimedean);
        for f in fs {
            for p in f.coefficient_primes() {
                places.insert(PlaceQ::Prime(p).label(), PlaceQ::Prime(p));
            }
        }
    }

    let mut contributions = Vec::new();
    for (_, place) in places {
        let contribution = place_mixed_integral(divisors, fs, place, cfg)?;
        contributions.push(contribution);
    }
    Ok(HeightReport::from_contributions(contributions))
}

fn place_mixed_integral(
    divisors: &[ToricDivisorData],
    fs: &[&LaurentPolynomial],
    place: PlaceQ,
    cfg: &EvalConfig,
) -> Result<PlaceContribution> {
    let pa_divisor_slots: Vec<PAConcave> = divisors.iter().map(|d| d.roof_at(place)).collect();
    let roof_slots: Vec<RoofFn> = fs
        .iter()
        .map(|f| ronkin_roof(f, place, &cfg.quad, &cfg.roof))
        .collect::<Result<Vec<_>>>()?;

    let all_pa = roof_slots.iter().all(|r| matches!(r, RoofFn::Pa(_)));
    if all_pa {
        let mut slots = pa_divisor_slots;
        for r in roof_slots {
            let RoofFn::Pa(p) = r else { unreachable!() };
            slots.push(p);
        }
        let v = mixed_integral(&slots)?;
        return Ok(PlaceContribution {
            place: place.label(),
            value: v.to_f64(),
            error: v.err(),
            exact: if v.is_exact() { Some(v) } else { None },
        });
    }

    // Sampled pipeline at the archimedean place: sample the PA slots on
    // grids with the common roof step, then run the sampled mixed integral.
    let m_step = crate::rat::rat_from_f64(cfg.roof.m_step);
    let mut sampled: Vec<SampledConcave> = Vec::new();
    for f in &pa_divisor_slots {
        let dom = f
            .domain_polytope()
            .ok_or_else(|| Error::UnboundedDomain("divisor roof".into()))?;
        let (lo, hi) = dom.bounding_box();
        let grid = GridSpec::covering(&lo, &hi, &m_step);
        sampled.push(SampledConcave::from_pa(f, grid)?);
    }
    for r in roof_slots {
        match r {
            RoofFn::Pa(p) => {
                let dom = p.domain_polytope().unwrap();
                let (lo, hi) = dom.bounding_box();
                let grid = GridSpec::covering(&lo, &hi, &m_step);
                sampled.push(SampledConcave::from_pa(&p, grid)?);
            }
            RoofFn::Sampled(s) => sampled.push(s),
        }
    }
    let refs: Vec<&SampledConcave> = sampled.iter().collect();
    let (value, error) = mixed_integral_sampled(&refs)?;
    Ok(PlaceContribution {
        place: place.label(),
        value,
        error,
        exact: None,
    })
}

// ---------------------------------------------------------------------------
// Pushforward reduction check
// ---------------------------------------------------------------------------

/// A configuration for the reduction
/// MI_M(ι_{Δ₁},…,ι_{Δ_k}, g₁,…,g_{n−k+1}) = MV_L(Δ's)·MI_P(π_*g's),
/// with L a coordinate subspace and π the projection away from it.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    /// Coordinate indices spanning L; their count k equals the number of Δ's.
    pub subspace: Vec<usize>,
    /// The Δ's, given in the full ambient space with zero off-L coordinates.
    pub deltas: Vec<Polytope>,
    /// The g's.
    pub gs: Vec<PAConcave>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionReport {
    pub lhs: Value,
    pub mv_factor: Value,
    pub mi_factor: Value,
    pub equal: bool,
}

pub fn pushforward_reduction_check(inst: &ReductionInstance) -> Result<ReductionReport> {
    let k = inst.subspace.len();
    if inst.deltas.len() != k {
        return Err(Error::CountMismatch(
            "need one Δ per subspace dimension".into(),
        ));
    }
    let n = inst
        .deltas
        .first()
        .map(|d| d.ambient_dim())
        .or_else(|| inst.gs.first().map(|g| g.dim()))
        .ok_or_else(|| Error::EmptyInput("reduction instance".into()))?;
    if inst.gs.len() + k != n + 1 {
        return Err(Error::CountMismatch(format!(
            "slots must total n+1 = {}",
            n + 1
        )));
    }
    // Δ's must lie in the coordinate subspace.
    for d in &inst.deltas {
        for v in d.vertices() {
            for (i, c) in v.0.iter().enumerate() {
                if !inst.subspace.contains(&i) && !c.is_zero() {
                    return Err(Error::Invalid(
                        "Δ's must lie in the coordinate subspace L".into(),
                    ));
                }
            }
        }
    }

    // LHS: MI over the full space with indicator slots.
    let mut slots: Vec<PAConcave> = inst
        .deltas
        .iter()
        .map(PAConcave::indicator)
        .collect();
    slots.extend(inst.gs.iter().cloned());
    let lhs = mixed_integral(&slots)?;

    // MV_L of the Δ's in L-coordinates.
    let into_l = LinearMapQ::new(
        inst.subspace
            .iter()
            .map(|&i| {
                let mut row = vec![Rat::zero(); n];
                row[i] = Rat::from_integer(1.into());
                row
            })
            .collect(),
        n,
        k,
    )?;
    let deltas_l: Vec<Polytope> = inst
        .deltas
        .iter()
        .map(|d| project(d, &into_l))
        .collect::<Result<Vec<_>>>()?;
    let mv = mixed_volume(&deltas_l)?;

    // MI_P of the pushforwards along the projection away from L.
    let complement: Vec<usize> = (0..n).filter(|i| !inst.subspace.contains(i)).collect();
    let pi = LinearMapQ::new(
        complement
            .iter()
            .map(|&i| {
                let mut row = vec![Rat::zero(); n];
                row[i] = Rat::from_integer(1.into());
                row
            })
            .collect(),
        n,
        complement.len(),
    )?;
    let pushed: Vec<PAConcave> = inst
        .gs
        .iter()
        .map(|g| crate::concave::direct_image(&pi, g))
        .collect::<Result<Vec<_>>>()?;
    let mi_p = mixed_integral(&pushed)?;

    // rhs = mv · mi_p with exactness preserved.
    let (rhs_value, equal) = match (&lhs, &mi_p) {
        (Value::Exact(l), Value::Exact(r)) => {
            let rhs = mv.clone() * crate::rat::parse_rat(r)?;
            let l = crate::rat::parse_rat(l)?;
            (Value::exact(rhs.clone()), l == rhs)
        }
        (
            Value::ExactLog { rat: l, ln_prime: lp },
            Value::ExactLog { rat: r, ln_prime: rp },
        ) => {
            let rhs = mv.clone() * crate::rat::parse_rat(r)?;
            let l = crate::rat::parse_rat(l)?;
            (
                Value::ExactLog {
                    rat: crate::rat::format_rat(&rhs),
                    ln_prime: *rp,
                },
                lp == rp && l == rhs,
            )
        }
        _ => {
            let rhs = rat_to_f64(&mv) * mi_p.to_f64();
            let tol = lhs.err() + mi_p.err() * rat_to_f64(&mv).abs() + 1e-9;
            (
                Value::Approx {
                    value: rhs,
                    err: tol,
                },
                (lhs.to_f64() - rhs).abs() <= tol,
            )
        }
    };
    Ok(ReductionReport {
        lhs,
        mv_factor: Value::exact(mv),
        mi_factor: rhs_value,
        equal,
    })
}

// ---------------------------------------------------------------------------
// Torsion-translate experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorsionNReport {
    pub conductor: u64,
    pub attempted: usize,
    pub valid: usize,
    pub discarded_singular: usize,
    pub discarded_off_torus: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// |running mean − reference|.
    pub deviation: f64,
    pub heights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorsionReport {
    pub reference: f64,
    pub reference_error: f64,
    pub per_conductor: Vec<TorsionNReport>,
    pub deviations_non_increasing: bool,
}

/// Samples torsion translates of the linear system f_1 = … = f_m = 0 on ℙⁿ
/// (n = m): draws uniformly random primitive N-th-root translates, solves
/// the translated system by Cramer's rule over ℚ(ζ_N), discards degenerate
/// draws, and reports the Weil heights of the solution points against the
/// limit-formula value.
pub fn torsion_experiment(
    fs: &[&LaurentPolynomial],
    conductors: &[u64],
    samples: usize,
    seed: u64,
    precision: f64,
    cfg: &EvalConfig,
) -> Result<TorsionReport> {
    let m = fs.len();
    if m == 0 || conductors.is_empty() || samples == 0 {
        return Err(Error::EmptyInput("torsion_experiment".into()));
    }
    let n = fs[0].n_vars();
    if n != m {
        return Err(Error::CountMismatch(
            "the experiment needs m linear polynomials in n = m variables".into(),
        ));
    }
    // extract linear data: f_i = c_{i,0} + Σ_j c_{i,j} x_j
    let mut constants = vec![Rat::zero(); m];
    let mut coeffs = vec![vec![Rat::zero(); n]; m];
    for (i, f) in fs.iter().enumerate() {
        for (e, c) in f.terms() {
            let deg: i64 = e.iter().map(|&x| x.abs()).sum();
            if deg == 0 {
                constants[i] = c.clone();
            } else if deg == 1 && e.iter().all(|&x| x >= 0) {
                let j = e.iter().position(|&x| x == 1).unwrap();
                coeffs[i][j] = c.clone();
            } else {
                return Err(Error::Invalid(
                    "the experiment needs degree-1 polynomials in the torus coordinates".into(),
                ));
            }
        }
    }

    // reference value: the limit formula on ℙⁿ with canonical O(1)
    let simplex = Polytope::unit_simplex(n);
    let divisors: Vec<ToricDivisorData> = (0..n + 1 - m)
        .map(|_| ToricDivisorData::canonical(simplex.clone()))
        .collect();
    let reference_report = gualdi_limit(&divisors, fs, cfg)?;

    let mut per_conductor = Vec::new();
    for &big_n in conductors {
        let mut heights = Vec::with_capacity(samples);
        let mut attempted = 0usize;
        let mut singular = 0usize;
        let mut off_torus = 0usize;
        let mut rng = sub_rng(seed, &format!("torsion:{big_n}"), 0);
        let max_attempts = samples * 20;
        while heights.len() < samples && attempted < max_attempts {
            attempted += 1;
            // translate matrix: A_{ij} = c_{ij}·ζ^{−k_{ij}}, rhs_i = −c_{i0}
            let mut mat: Vec<Vec<Cyclotomic>> = Vec::with_capacity(m);
            for coeff_row in coeffs.iter().take(m) {
                let mut row = Vec::with_capacity(n);
                for c in coeff_row.iter().take(n) {
                    let k = draw_primitive_exponent(&mut rng, big_n);
                    let z = Cyclotomic::zeta_power(big_n, -(k as i64));
                    row.push(z.scale(c));
                }
                mat.push(row);
            }
            let det = cyclo_det(&mat)?;
            if det.is_zero() {
                singular += 1;
                continue;
            }
            // Cramer numerators
            let mut coords: Vec<Cyclotomic> = Vec::with_capacity(n + 1);
            let rhs: Vec<Cyclotomic> = constants
                .iter()
                .map(|c| Cyclotomic::from_rat(big_n, -c.clone()))
                .collect();
            let mut degenerate = false;
            for j in 0..n {
                let mut mj = mat.clone();
                for i in 0..m {
                    mj[i][j] = rhs[i].clone();
                }
                let dj = cyclo_det(&mj)?;
                if dj.is_zero() {
                    degenerate = true;
                    break;
                }
                coords.push(dj);
            }
            if degenerate {
                off_torus += 1;
                continue;
            }
            coords.push(det);
            let fast = big_n > 30;
            let h: HeightBreakdown = height_tuple_cyclo(&coords, big_n, precision, fast)?;
            heights.push(h.total);
        }
        if heights.is_empty() {
            return Err(Error::AllDrawsDegenerate);
        }
        let mean = heights.iter().sum::<f64>() / heights.len() as f64;
        let min = heights.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        per_conductor.push(TorsionNReport {
            conductor: big_n,
            attempted,
            valid: heights.len(),
            discarded_singular: singular,
            discarded_off_torus: off_torus,
            mean,
            min,
            max,
            deviation: (mean - reference_report.total).abs(),
            heights,
        });
    }
    let devs: Vec<f64> = per_conductor.iter().map(|r| r.deviation).collect();
    let non_increasing = devs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(TorsionReport {
        reference: reference_report.total,
        reference_error: reference_report.total_error,
        per_conductor,
        deviations_non_increasing: non_increasing,
    })
}

fn draw_primitive_exponent(rng: &mut rand_chacha::ChaCha8Rng, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    loop {
        let k = rng.gen_range(1..n);
        if k.gcd(&n) == 1 {
            return k;
        }
    }
}

/// Determinant over ℚ(ζ_N) by cofactor expansion (experiment matrices are
/// tiny and sparse).
pub fn cyclo_det(mat: &[Vec<Cyclotomic>]) -> Result<Cyclotomic> {
    let m = mat.len();
    if m == 0 || mat.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch("cyclo_det needs a square matrix".into()));
    }
    if m > 5 {
        return Err(Error::CapExceeded("cyclo_det supports m ≤ 5".into()));
    }
    fn rec(mat: &[Vec<Cyclotomic>], rows: &mut Vec<usize>, col: usize) -> Result<Cyclotomic> {
        let n = mat.len();
        let conductor = mat[0][0].conductor();
        if col == n {
            return Ok(Cyclotomic::one(conductor));
        }
        let mut acc = Cyclotomic::zero(conductor);
        for pos in 0..rows.len() {
            let r = rows[pos];
            if mat[r][col].is_zero() {
                continue;
            }
            rows.remove(pos);
            let sub = rec(mat, rows, col + 1)?;
            rows.insert(pos, r);
            let term = mat[r][col].mul(&sub)?;
            if pos % 2 == 0 {
                acc = acc.add(&term)?;
            } else {
                acc = acc.sub(&term)?;
            }
        }
        Ok(acc)
    }
    let mut rows: Vec<usize> = (0..m).collect();
    rec(mat, &mut rows, 0)
}

// ---------------------------------------------------------------------------
// JSON for divisors
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct DivisorJson {
    pub polytope: crate::polytope::PolytopeJson,
    #[serde(default)]
    pub roofs: Vec<DivisorRoofJson>,
}

#[derive(Serialize, Deserialize)]
pub struct DivisorRoofJson {
    /// "arch", "trivial", or "p:<prime>".
    pub place: String,
    pub roof: crate::concave::PaJson,
}

pub fn parse_place(s: &str) -> Result<PlaceQ> {
    match s {
        "arch" => Ok(PlaceQ::Archimedean),
        "trivial" => Ok(PlaceQ::Trivial),
        _ => {
            let p = s
                .strip_prefix("p:")
                .and_then(|x| x.parse::<u64>().ok())
                .ok_or_else(|| Error::Parse(format!("unknown place {s:?}")))?;
            Ok(PlaceQ::Prime(p))
        }
    }
}

impl ToricDivisorData {
    pub fn from_json(j: &DivisorJson) -> Result<Self> {
        let polytope = Polytope::from_json(&j.polytope)?;
        let mut d = ToricDivisorData::canonical(polytope);
        for r in &j.roofs {
            let place = parse_place(&r.place)?;
            let roof = PAConcave::from_json(&r.roof, None)?;
            d = d.with_roof(place, roof)?;
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concave::{AffinePiece, PADomain, Scale};
    use crate::rat::{rat, rat_i, QVec};

    fn seg01() -> Polytope {
        Polytope::from_ints(1, &[&[0], &[1]])
    }

    #[test]
    fn canonical_heights_vanish() {
        // ℙ²: three canonical O(1) divisors
        let s = Polytope::unit_simplex(2);
        let ds = vec![
            ToricDivisorData::canonical(s.clone()),
            ToricDivisorData::canonical(s.clone()),
            ToricDivisorData::canonical(s),
        ];
        let r = toric_height(&ds).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(r.total_error, 0.0);
    }

    #[test]
    fn diagonal_roof_height() {
        // ℙ¹ with roof θ(m) = m·log 2 at the archimedean place on both slots:
        // MI(θ,θ) = 2!·∫θ = log 2, exactly in the log-2 scale.
        let roof = PAConcave::new(
            1,
            PADomain::Poly(seg01()),
            vec![AffinePiece::new(QVec::from_ints(&[1]), rat_i(0))],
            Scale::LogPrime(2),
        )
        .unwrap();
        let d = ToricDivisorData::canonical(seg01())
            .with_roof(PlaceQ::Archimedean, roof)
            .unwrap();
        let r = toric_height(&[d.clone(), d]).unwrap();
        assert!((r.total - 2f64.ln()).abs() < 1e-12, "{r:?}");
        assert_eq!(r.total_error, 0.0);
        let c = &r.contributions[0];
        assert_eq!(c.place, "arch");
        assert_eq!(
            c.exact,
            Some(Value::ExactLog {
                rat: "1".into(),
                ln_prime: 2
            })
        );
    }

    #[test]
    fn place_locality() {
        // adding an explicit canonical place changes nothing
        let s = Polytope::unit_simplex(2);
        let base = vec![
            ToricDivisorData::canonical(s.clone()),
            ToricDivisorData::canonical(s.clone()),
            ToricDivisorData::canonical(s.clone()),
        ];
        let with_extra = vec![
            ToricDivisorData::canonical(s.clone())
                .with_roof(PlaceQ::Prime(7), PAConcave::indicator(&s))
                .unwrap(),
            ToricDivisorData::canonical(s.clone()),
            ToricDivisorData::canonical(s),
        ];
        let a = toric_height(&base).unwrap();
        let b = toric_height(&with_extra).unwrap();
        assert_eq!(a.total, b.total);
    }

    #[test]
    fn slot_symmetry_and_linearity() {
        let roof_a = PAConcave::new(
            1,
            PADomain::Poly(seg01()),
            vec![AffinePiece::new(QVec::from_ints(&[1]), rat_i(1))],
            Scale::One,
        )
        .unwrap();
        let roof_b = PAConcave::new(
            1,
            PADomain::Poly(seg01()),
            vec![
                AffinePiece::new(QVec::from_ints(&[0]), rat_i(2)),
                AffinePiece::new(QVec::from_ints(&[-1]), rat(5, 2)),
            ],
            Scale::One,
        )
        .unwrap();
        let da = ToricDivisorData::canonical(seg01())
            .with_roof(PlaceQ::Trivial, roof_a)
            .unwrap();
        let db = ToricDivisorData::canonical(seg01())
            .with_roof(PlaceQ::Trivial, roof_b)
            .unwrap();
        let ab = toric_height(&[da.clone(), db.clone()]).unwrap();
        let ba = toric_height(&[db, da]).unwrap();
        assert_eq!(ab.total, ba.total);
    }

    #[test]
    fn hypersurface_one_plus_2x() {
        // ℙ¹, canonical O(1), f = 1+2x → log 2 (p=2 contributes 0,
        // archimedean contributes log 2)
        let f = LaurentPolynomial::from_ints(1, &[(&[0], 1), (&[1], 2)]);
        let d = ToricDivisorData::canonical(seg01());
        let mut cfg = EvalConfig::new(11);
        cfg.quad.budget = 1 << 14;
        cfg.roof = RoofConfig {
            u_step: 0.02,
            m_step: 0.005,
            window_pad: 2.0,
        };
        let r = hypersurface_height(&[d], &f, &cfg).unwrap();
        assert!(
            (r.total - 2f64.ln()).abs() <= r.total_error.max(0.02),
            "total {} ± {}",
            r.total,
            r.total_error
        );
        // the p=2 contribution is exactly zero
        let p2 = r.contributions.iter().find(|c| c.place == "p:2").unwrap();
        assert_eq!(p2.value, 0.0);
    }

    #[test]
    fn hypersurface_torsion_zero() {
        // f = x − 1 vanishes at a torsion point: height 0
        let f = LaurentPolynomial::from_ints(1, &[(&[1], 1), (&[0], -1)]);
        let d = ToricDivisorData::canonical(seg01());
        let mut cfg = EvalConfig::new(13);
        cfg.quad.budget = 1 << 14;
        cfg.roof = RoofConfig {
            u_step: 0.02,
            m_step: 0.005,
            window_pad: 2.0,
        };
        let r = hypersurface_height(&[d], &f, &cfg).unwrap();
        assert!(r.total.abs() <= r.total_error.max(0.02), "{r:?}");
    }

    #[test]
    fn gualdi_m0_is_toric_height() {
        let s = Polytope::unit_simplex(2);
        let ds = vec![
            ToricDivisorData::canonical(s.clone()),
            ToricDivisorData::canonical(s.clone()),
            ToricDivisorData::canonical(s),
        ];
        let a = toric_height(&ds).unwrap();
        let b = gualdi_limit(&ds, &[], &EvalConfig::new(0)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn reduction_trivial_cases() {
        // Δ's spanning the full space, no g's... smallest legal: segment in
        // ℝ¹ with one g in ℝ⁰ is degenerate; use the documented square case.
        // ι_{[0,e₁]} with g = indicator of the unit square in ℝ²
        let seg = Polytope::from_ints(2, &[&[0, 0], &[1, 0]]);
        let sq = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let inst = ReductionInstance {
            subspace: vec![0],
            deltas: vec![seg],
            gs: vec![PAConcave::indicator(&sq), PAConcave::indicator(&sq)],
        };
        let rep = pushforward_reduction_check(&inst).unwrap();
        assert!(rep.equal, "{rep:?}");
        assert_eq!(rep.lhs, Value::Exact("0".into()));
    }

    #[test]
    fn reduction_nontrivial() {
        // ι_{[0,e₁]} with g₁, g₂ nontrivial PA on squares
        let seg = Polytope::from_ints(2, &[&[0, 0], &[2, 0]]);
        let sq = Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let g1 = PAConcave::new(
            2,
            PADomain::Poly(sq.clone()),
            vec![
                AffinePiece::new(QVec::from_ints(&[1, 1]), rat_i(0)),
                AffinePiece::new(QVec::from_ints(&[-1, 0]), rat_i(2)),
            ],
            Scale::One,
        )
        .unwrap();
        let g2 = PAConcave::new(
            2,
            PADomain::Poly(sq),
            vec![AffinePiece::new(QVec::from_ints(&[0, 1]), rat(1, 2))],
            Scale::One,
        )
        .unwrap();
        let inst = ReductionInstance {
            subspace: vec![0],
            deltas: vec![seg],
            gs: vec![g1, g2],
        };
        let rep = pushforward_reduction_check(&inst).unwrap();
        assert!(rep.equal, "{rep:?}");
    }

    #[test]
    fn cyclo_det_small() {
        let n = 5;
        let z = |k: i64| Cyclotomic::zeta_power(n, k);
        // det [[ζ, 1], [1, ζ⁻¹]] = 1 − 1 = 0
        let m = vec![
            vec![z(1), Cyclotomic::one(n)],
            vec![Cyclotomic::one(n), z(-1)],
        ];
        assert!(cyclo_det(&m).unwrap().is_zero());
        // det [[ζ, 0], [0, ζ]] = ζ²
        let m = vec![
            vec![z(1), Cyclotomic::zero(n)],
            vec![Cyclotomic::zero(n), z(1)],
        ];
        assert_eq!(cyclo_det(&m).unwrap(), z(2));
    }

    #[test]
    fn torsion_experiment_n1_flags_degeneracy() {
        // N = 1: no translation; x+y+1 twice is singular every draw
        let f = LaurentPolynomial::from_ints(2, &[(&[0, 0], 1), (&[1, 0], 1), (&[0, 1], 1)]);
        let mut cfg = EvalConfig::new(3);
        cfg.quad.budget = 1 << 12;
        cfg.roof = RoofConfig {
            u_step: 0.1,
            m_step: 0.05,
            window_pad: 2.0,
        };
        let r = torsion_experiment(&[&f, &f], &[1], 5, 7, 1e-8, &cfg);
        assert!(matches!(r, Err(Error::AllDrawsDegenerate)), "{r:?}");
    }

    #[test]
    fn torsion_experiment_small_n() {
        let f = LaurentPolynomial::from_ints(2, &[(&[0, 0], 1), (&[1, 0], 1), (&[0, 1], 1)]);
        let mut cfg = EvalConfig::new(3);
        cfg.quad.budget = 1 << 12;
        cfg.roof = RoofConfig {
            u_step: 0.1,
            m_step: 0.05,
            window_pad: 2.0,
        };
        let r = torsion_experiment(&[&f, &f], &[7], 10, 5, 1e-8, &cfg).unwrap();
        let rep = &r.per_conductor[0];
        assert_eq!(rep.valid, 10);
        // heights are finite and essentially nonnegative
        for h in &rep.heights {
            assert!(h.is_finite() && *h >= -1e-9, "h = {h}");
        }
        // determinism
        let r2 = torsion_experiment(&[&f, &f], &[7], 10, 5, 1e-8, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&r.per_conductor[0].heights).unwrap(),
            serde_json::to_string(&r2.per_conductor[0].heights).unwrap()
        );
    }
}
