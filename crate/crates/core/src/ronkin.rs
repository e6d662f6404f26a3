//! Ronkin functions of Laurent polynomials per place, and their roof
//! functions (concave conjugates on the Newton polytope).
//!
//! At a non-archimedean or trivial place the Ronkin function is the exact
//! tropical min-plus form; at the archimedean place it is the fiberwise mean
//! of −log|f| over the torus, estimated by randomized lattice quadrature on
//! a window and dualized discretely with certified error bounds.
//!
//! Sign conventions: trop(x) = −log|x|, so the fiber over u is
//! |x_i| = e^{−u_i}; the tropical Ronkin is min_t(v(c_t) + ⟨t,u⟩) with
//! v(c) = −log|c|_v.

use crate::concave::{legendre_dual, AffinePiece, PAConcave, PADomain, Scale};
use crate::error::{Error, Result};
use crate::laurent::LaurentPolynomial;
use crate::polytope::{newton_polytope, LinearMapQ};
use crate::quad::{qmc_mean, Estimate, QuadratureConfig};
use crate::rat::{rat_to_f64, QVec, Rat};
use crate::sampled::{GridSpec, SampledConcave};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A place of ℚ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlaceQ {
    Archimedean,
    Prime(u64),
    Trivial,
}

impl PlaceQ {
    pub fn label(&self) -> String {
        match self {
            PlaceQ::Archimedean => "arch".to_string(),
            PlaceQ::Prime(p) => format!("p:{p}"),
            PlaceQ::Trivial => "trivial".to_string(),
        }
    }
}

/// p-adic valuation of a nonzero rational.
pub fn vp(r: &Rat, p: u64) -> i64 {
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut n = r.numer().abs();
    while (&n % &p).is_zero() && !n.is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = r.denom().abs();
    while (&d % &p).is_zero() && !d.is_zero() {
        d /= &p;
        v -= 1;
    }
    v
}

/// Exact tropical Ronkin function at a non-archimedean or trivial place:
/// ρ(u) = min_t (v(c_t) + ⟨t,u⟩) on all of N_ℝ. At a prime p the function is
/// ln p times its rational part (`Scale::LogPrime`).
pub fn tropical_ronkin(f: &LaurentPolynomial, place: PlaceQ) -> Result<PAConcave> {
    let n = f.n_vars();
    match place {
        PlaceQ::Archimedean => Err(Error::ArchimedeanPlace),
        PlaceQ::Trivial => {
            let pieces = f
                .terms()
                .keys()
                .map(|e| AffinePiece::new(QVec::from_ints(&e.iter().map(|&x| x).collect::<Vec<_>>()), Rat::zero()))
                .collect();
            PAConcave::new(n, PADomain::Whole, pieces, Scale::One)
        }
        PlaceQ::Prime(p) => {
            let pieces = f
                .terms()
                .iter()
                .map(|(e, c)| {
                    AffinePiece::new(
                        QVec::from_ints(&e.iter().map(|&x| x).collect::<Vec<_>>()),
                        Rat::from_integer(vp(c, p).into()),
                    )
                })
                .collect();
            PAConcave::new(n, PADomain::Whole, pieces, Scale::LogPrime(p))
        }
    }
}

/// Randomized-QMC estimate of the archimedean Ronkin value
/// ρ_f(u) = ∫ −log|f| dσ_u over the torus fiber |x_i| = e^{−u_i}.
/// Monomials are exact (the integrand is constant).
pub fn arch_ronkin_value(f: &LaurentPolynomial, u: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    if u.len() != f.n_vars() {
        return Err(Error::DimensionMismatch(
            "tropical coordinate length must match the variable count".into(),
        ));
    }
    if let Some((e, c)) = only_term(f) {
        let mut v = -rat_to_f64(c).abs().ln();
        for (j, &ej) in e.iter().enumerate() {
            v += ej as f64 * u[j];
        }
        return Ok(Estimate {
            value: v,
            std_err: 0.0,
            samples: 0,
            rejected: 0,
        });
    }
    let n = f.n_vars();
    let tag = format!(
        "ronkin:{}",
        u.iter().map(|x| format!("{:x};", x.to_bits())).collect::<String>()
    );
    let two_pi = 2.0 * std::f64::consts::PI;
    qmc_mean(n, cfg, &tag, |x| {
        let phases: Vec<f64> = x.iter().map(|t| two_pi * t).collect();
        let a = f.eval_abs_on_fiber(u, &phases);
        if a == 0.0 {
            None
        } else {
            Some(-a.ln())
        }
    })
}

/// A roof function: exact PA at non-archimedean/trivial places, sampled at
/// the archimedean place.
#[derive(Debug, Clone)]
pub enum RoofFn {
    Pa(PAConcave),
    Sampled(SampledConcave),
}

impl RoofFn {
    pub fn max_err(&self) -> f64 {
        match self {
            RoofFn::Pa(_) => 0.0,
            RoofFn::Sampled(s) => s.max_err(),
        }
    }
}

/// Grid resolution for building archimedean roofs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoofConfig {
    /// Grid step in the tropical (u) window.
    pub u_step: f64,
    /// Grid step on the Newton polytope (m side).
    pub m_step: f64,
    /// Extra window padding beyond the coefficient spread.
    pub window_pad: f64,
}

impl Default for RoofConfig {
    fn default() -> Self {
        RoofConfig {
            u_step: 0.05,
            m_step: 0.02,
            window_pad: 2.0,
        }
    }
}

/// The roof function ρ_f^∨ on NP(f) at a place.
pub fn ronkin_roof(
    f: &LaurentPolynomial,
    place: PlaceQ,
    cfg: &QuadratureConfig,
    roof_cfg: &RoofConfig,
) -> Result<RoofFn> {
    match place {
        PlaceQ::Trivial | PlaceQ::Prime(_) => {
            let trop = tropical_ronkin(f, place)?;
            let roof = legendre_dual(&trop)?;
            debug_assert_eq!(roof.domain_polytope().unwrap(), &newton_polytope(f));
            Ok(RoofFn::Pa(roof))
        }
        PlaceQ::Archimedean => Ok(RoofFn::Sampled(arch_roof(f, cfg, roof_cfg)?)),
    }
}

fn only_term(f: &LaurentPolynomial) -> Option<(&Vec<i64>, &Rat)> {
    if f.terms().len() == 1 {
        f.terms().iter().next()
    } else {
        None
    }
}

/// The archimedean tropical approximation Ψ(u) = min_t(−log|c_t| + ⟨t,u⟩);
/// the Ronkin function stays within an explicit bounded distance of it.
pub fn arch_tropical_value(f: &LaurentPolynomial, u: &[f64]) -> f64 {
    ArchTrop::new(f).eval(u)
}

/// Archimedean tropical polytope data: pieces (t, −log|c_t|) in f64.
struct ArchTrop {
    exps: Vec<Vec<f64>>,
    neg_log_c: Vec<f64>,
}

impl ArchTrop {
    fn new(f: &LaurentPolynomial) -> ArchTrop {
        ArchTrop {
            exps: f
                .terms()
                .keys()
                .map(|e| e.iter().map(|&x| x as f64).collect())
                .collect(),
            neg_log_c: f
                .terms()
                .values()
                .map(|c| -rat_to_f64(c).abs().ln())
                .collect(),
        }
    }

    fn eval(&self, u: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(&self.neg_log_c)
            .map(|(t, c)| c + t.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Concave conjugate of the tropical function at m, by exact LP over a
    /// rationalization of the lifted coefficient points:
    /// trop^∨(m) = max { Σ λ_t log|c_t| : Σ λ_t t = m, λ in the simplex }.
    fn dual_at(&self, m: &[f64]) -> f64 {
        use crate::lp::{solve_standard, LpOutcome};
        let k = self.exps.len();
        let n = m.len();
        let mut a: Vec<Vec<Rat>> = Vec::with_capacity(n + 1);
        let mut b: Vec<Rat> = Vec::with_capacity(n + 1);
        for j in 0..n {
            a.push(
                self.exps
                    .iter()
                    .map(|t| crate::rat::rat_from_f64(t[j]))
                    .collect(),
            );
            b.push(crate::rat::rat_from_f64(m[j]));
        }
        a.push(vec![Rat::from_integer(1.into()); k]);
        b.push(Rat::from_integer(1.into()));
        // minimize Σ λ_t (−log c_t)  == maximize Σ λ_t log c_t
        let c: Vec<Rat> = self
            .neg_log_c
            .iter()
            .map(|&x| crate::rat::rat_from_f64(x))
            .collect();
        match solve_standard(&a, &b, &c) {
            LpOutcome::Optimal { value, .. } => -rat_to_f64(&value),
            _ => f64::NEG_INFINITY, // m outside NP(f)
        }
    }
}

/// Builds the archimedean roof as a SampledConcave on NP(f) with per-node
/// certified error bounds.
fn arch_roof(f: &LaurentPolynomial, cfg: &QuadratureConfig, rc: &RoofConfig) -> Result<SampledConcave> {
    let n = f.n_vars();
    let np = newton_polytope(f);
    let trop = ArchTrop::new(f);

    // Window radius: coefficient log-spread over the minimal slope gap (≥ 1
    // on a lattice), plus padding.
    let spread = {
        let logs: Vec<f64> = f
            .terms()
            .values()
            .map(|c| rat_to_f64(c).abs().ln())
            .collect();
        let mx = logs.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let mn = logs.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        mx - mn
    };
    let radius = spread + rc.window_pad;
    let r_rat = crate::rat::rat_from_f64(radius);
    let lo = vec![-r_rat.clone(); n];
    let hi = vec![r_rat; n];
    let u_grid = GridSpec::covering(&lo, &hi, &crate::rat::rat_from_f64(rc.u_step));

    // Ronkin values on the window (deterministic tags per node index).
    let rho: Vec<(f64, f64)> = (0..u_grid.len())
        .into_par_iter()
        .map(|fl| {
            let u = u_grid.node_f64(&u_grid.unflat(fl));
            let mut c = cfg.clone();
            c.target_std_err = None;
            let tag = format!("roof:{fl}");
            let two_pi = 2.0 * std::f64::consts::PI;
            let est = qmc_mean(n, &c, &tag, |x| {
                let phases: Vec<f64> = x.iter().map(|t| two_pi * t).collect();
                let a = f.eval_abs_on_fiber(&u, &phases);
                if a == 0.0 {
                    None
                } else {
                    Some(-a.ln())
                }
            })
            .expect("window quadrature");
            (est.value, 3.0 * est.std_err)
        })
        .collect();
    let qmc_err = rho.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    if let Some(t) = cfg.target_std_err {
        if qmc_err > 3.0 * t {
            return Err(Error::Quadrature(format!(
                "roof node standard error {:.3e} exceeds target {:.3e}",
                qmc_err / 3.0,
                t
            )));
        }
    }

    // Boundary node set of the window (for interior-minimizer certification).
    let boundary: Vec<usize> = (0..u_grid.len())
        .filter(|&fl| {
            let idx = u_grid.unflat(fl);
            idx.iter()
                .enumerate()
                .any(|(a, &i)| i == 0 || i + 1 == u_grid.shape[a])
        })
        .collect();

    // Roof grid over the Newton polytope bounding box.
    let (np_lo, np_hi) = np.bounding_box();
    let m_grid = GridSpec::covering(&np_lo, &np_hi, &crate::rat::rat_from_f64(rc.m_step));
    let u_nodes: Vec<Vec<f64>> = (0..u_grid.len())
        .map(|fl| u_grid.node_f64(&u_grid.unflat(fl)))
        .collect();
    let lip_rho = np
        .vertices()
        .iter()
        .flat_map(|v| v.0.iter())
        .map(|x| rat_to_f64(x).abs())
        .fold(0.0, f64::max);
    let eps_glob = total_degree_spread(f) * ((n as f64) + 1.0).ln();

    let results: Vec<(f64, f64)> = (0..m_grid.len())
        .into_par_iter()
        .map(|fl| {
            let m = m_grid.node_f64(&m_grid.unflat(fl));
            // discrete dual over the window
            let mut best = f64::INFINITY;
            let mut argmin = 0usize;
            for (i, (u, (r, _))) in u_nodes.iter().zip(&rho).enumerate() {
                let dot: f64 = m.iter().zip(u).map(|(a, b)| a * b).sum();
                let v = dot - r;
                if v < best {
                    best = v;
                    argmin = i;
                }
            }
            // Dual discretization gap from the supergradient brackets of ρ
            // around the scan argmin: the objective ⟨m,u⟩ − ρ(u) is convex,
            // so the continuum minimizer sits near the grid argmin and the
            // first-order defect is controlled by dist(m, [∂ρ]) plus the
            // bracket width there.
            let gap = dual_gap_bracket(&u_grid, &rho, argmin, &m, lip_rho);
            // certification: if the boundary values sit strictly above the
            // interior minimum, convexity keeps the true infimum inside the
            // window; otherwise fall back to the global tropical lower bound
            // inf(⟨m,u⟩ − ρ(u)) ≥ trop^∨(m) − eps_glob.
            let bmin = boundary
                .iter()
                .map(|&bfl| {
                    let u = &u_nodes[bfl];
                    let dot: f64 = m.iter().zip(u).map(|(a, b)| a * b).sum();
                    dot - rho[bfl].0
                })
                .fold(f64::INFINITY, f64::min);
            let certified = bmin - qmc_err - gap > best;
            let err = if certified {
                qmc_err + gap
            } else {
                let ol = trop.dual_at(&m) - eps_glob;
                (qmc_err + gap).max(best - ol)
            };
            (best, err)
        })
        .collect();

    let values: Vec<f64> = results.iter().map(|(v, _)| *v).collect();
    let errs: Vec<f64> = results.iter().map(|(_, e)| *e).collect();
    SampledConcave::with_errs(m_grid, values, np, radius * n as f64, errs)
}

/// Per-node dual gap from concavity: around the argmin node, supergradients
/// of ρ are bracketed per axis by forward/backward differences; the defect of
/// the grid infimum against the continuum infimum is at most
/// Σ_a (h_a/2)·(dist(m_a, bracket_a) + width_a), maximized over the cell
/// star of the argmin.
fn dual_gap_bracket(
    u_grid: &GridSpec,
    rho: &[(f64, f64)],
    argmin: usize,
    m: &[f64],
    lip_fallback: f64,
) -> f64 {
    let n = u_grid.dim();
    let idx = u_grid.unflat(argmin);
    let mut worst = 0.0f64;
    // examine the argmin node and its axis neighbors
    let mut nodes = vec![idx.clone()];
    for a in 0..n {
        for d in [-1i64, 1] {
            let ni = idx[a] as i64 + d;
            if ni >= 0 && (ni as usize) < u_grid.shape[a] {
                let mut v = idx.clone();
                v[a] = ni as usize;
                nodes.push(v);
            }
        }
    }
    for node in nodes {
        let mut gap = 0.0f64;
        for a in 0..n {
            let h = crate::rat::rat_to_f64(&u_grid.step[a]);
            let val = |i: usize| rho[u_grid.flat_with(&node, a, i)].0;
            let (dplus, dminus) = {
                let i = node[a];
                let fwd = if i + 1 < u_grid.shape[a] {
                    Some((val(i + 1) - val(i)) / h)
                } else {
                    None
                };
                let bwd = if i > 0 {
                    Some((val(i) - val(i - 1)) / h)
                } else {
                    None
                };
                (fwd, bwd)
            };
            // concavity: supergradient component ∈ [d⁺, d⁻]
            let (lo, hi) = match (dplus, dminus) {
                (Some(f), Some(b)) => (f.min(b), f.max(b)),
                (Some(f), None) => (f - lip_fallback, f + lip_fallback),
                (None, Some(b)) => (b - lip_fallback, b + lip_fallback),
                (None, None) => (-lip_fallback, lip_fallback),
            };
            let dist = if m[a] < lo {
                lo - m[a]
            } else if m[a] > hi {
                m[a] - hi
            } else {
                0.0
            };
            gap += 0.5 * h * (dist + (hi - lo));
        }
        worst = worst.max(gap);
    }
    worst
}

/// Total degree of f after translating exponents to the nonnegative orthant;
/// the `d` in the Mahler-measure bound |m(P) − log‖P‖| ≤ d log(n+1).
fn total_degree_spread(f: &LaurentPolynomial) -> f64 {
    let n = f.n_vars();
    let mut mins = vec![i64::MAX; n];
    for e in f.terms().keys() {
        for (j, &x) in e.iter().enumerate() {
            mins[j] = mins[j].min(x);
        }
    }
    f.terms()
        .keys()
        .map(|e| {
            e.iter()
                .zip(&mins)
                .map(|(&x, &m)| (x - m) as f64)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Report of the Ronkin pushforward law ρ_{K[γ]f} = ρ_f ∘ γ^∨ and
/// ρ^∨_{K[γ]f} = γ_* ρ_f^∨.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushforwardReport {
    pub place: PlaceQ,
    /// Exact function equality of the tropical Ronkin identity (non-arch).
    pub tropical_identity_exact: Option<bool>,
    /// Exact equality of roofs: roof(K[γ]f) = γ_* roof(f) (non-arch).
    pub roof_pushforward_exact: Option<bool>,
    /// Archimedean samples: (lhs, rhs, combined 3σ bound) per checked point.
    pub arch_samples: Vec<(f64, f64, f64)>,
    pub ok: bool,
}

/// Verifies the pushforward law for the lattice map γ (rows = target
/// coordinates of the exponent map).
pub fn pushforward_check(
    f: &LaurentPolynomial,
    gamma: &[Vec<i64>],
    place: PlaceQ,
    cfg: &QuadratureConfig,
    test_points: &[Vec<Rat>],
) -> Result<PushforwardReport> {
    let g = f.monomial_substitution(gamma)?;
    let m_target = gamma.len();
    let gamma_map = LinearMapQ::new(
        gamma
            .iter()
            .map(|r| r.iter().map(|&x| Rat::from_integer(x.into())).collect())
            .collect(),
        f.n_vars(),
        m_target,
    )?;

    match place {
        PlaceQ::Trivial | PlaceQ::Prime(_) => {
            let rho_f = tropical_ronkin(f, place)?;
            let rho_g = tropical_ronkin(&g, place)?;
            // ρ_f ∘ γ^∨ has pieces (γt, c): build and compare canonically.
            let composed = PAConcave::new(
                m_target,
                PADomain::Whole,
                rho_f
                    .pieces()
                    .iter()
                    .map(|p| AffinePiece::new(gamma_map.apply(&p.slope), p.constant.clone()))
                    .collect(),
                rho_f.scale(),
            )?;
            let tropical_ok = composed == rho_g;
            let roof_f = legendre_dual(&rho_f)?;
            let roof_g = legendre_dual(&rho_g)?;
            let pushed = crate::concave::direct_image(&gamma_map, &roof_f)?;
            let roof_ok = pushed == roof_g;
            Ok(PushforwardReport {
                place,
                tropical_identity_exact: Some(tropical_ok),
                roof_pushforward_exact: Some(roof_ok),
                arch_samples: vec![],
                ok: tropical_ok && roof_ok,
            })
        }
        PlaceQ::Archimedean => {
            let mut samples = Vec::new();
            let mut ok = true;
            let gt = gamma_map.transpose();
            for (k, up) in test_points.iter().enumerate() {
                if up.len() != m_target {
                    return Err(Error::DimensionMismatch(
                        "test point length must match the target rank".into(),
                    ));
                }
                let u_prime = QVec(up.clone());
                // lhs: ρ_g(u′); rhs: ρ_f(γ^∨ u′)
                let mut c1 = cfg.clone();
                c1.seed = cfg.seed.wrapping_add(k as u64);
                let lhs = arch_ronkin_value(&g, &u_prime.to_f64(), &c1)?;
                let pulled = gt.apply(&u_prime);
                let rhs = arch_ronkin_value(f, &pulled.to_f64(), &c1)?;
                let tol = 3.0 * (lhs.std_err + rhs.std_err) + 1e-9;
                let pass = (lhs.value - rhs.value).abs() <= tol;
                ok &= pass;
                samples.push((lhs.value, rhs.value, tol));
            }
            Ok(PushforwardReport {
                place,
                tropical_identity_exact: None,
                roof_pushforward_exact: None,
                arch_samples: samples,
                ok,
            })
        }
    }
}
