//! Monomial-norm asymptotics and the operator estimates behind Sobolev
//! regularity of the weighted projection on the unit ball.
//!
//! On `B^n` with weight `exp(1/ρ)` the monomial norms factor as
//! `d_γ² = πⁿ · γ!/(|γ|+n−1)! · I(|γ|+n−1)`, so every quantity here is an
//! explicit combination of factorials and boundary moments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{DomainKind, WeightSpec};
use crate::error::{Error, Result};
use crate::kernel::{inner_product, project_monomial, MonomialFunction, TruncatedKernel};
use crate::moments::{MomentSource, MomentTable};
use crate::numerics::{log_factorial, log_gamma, LogValue, MultiIndex};

/// The exponent of `|γ|+1` in the lower bound for `d_γ²`.
pub const NOMINAL_Q: f64 = 1.0 / 3.0;

fn require_ball_exp(t: &MomentTable) -> Result<()> {
    if *t.domain().kind() != DomainKind::Ball || *t.weight() != WeightSpec::Exponential {
        return Err(Error::Domain(format!(
            "monomial-norm checks need the exp-weighted ball, got {} with {}",
            t.domain().label(),
            t.weight().label()
        )));
    }
    Ok(())
}

fn check_pair(t: &MomentTable, alpha: &MultiIndex, beta: &MultiIndex) -> Result<()> {
    let n = t.domain().dim();
    for m in [alpha, beta] {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.dim(),
            });
        }
    }
    Ok(())
}

/// `d_γ² = ‖z^γ‖²`.
pub fn d_gamma2(t: &MomentTable, gamma: &MultiIndex) -> Result<LogValue> {
    require_ball_exp(t)?;
    t.d_gamma_sq(gamma)
}

/// `∫_0^{π/2} cos^{2γ1+1}θ sin^{2γ2+1}θ dθ = ½ γ1! γ2!/(|γ|+1)!`.
pub fn trig_moment(gamma: &MultiIndex) -> Result<LogValue> {
    if gamma.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: gamma.dim(),
        });
    }
    Ok(LogValue::from_log(
        0.5f64.ln() + gamma.log_factorial() - log_factorial(gamma.total() + 1),
    ))
}

/// `d_γ²` with its expected asymptotic shape divided out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedDGamma {
    pub gamma: MultiIndex,
    pub log_d2: f64,
    /// `log d_γ² + 2√(|γ|+1) + q log(|γ|+1) + log Γ(|γ|+2) − Σ log γ_i!`.
    pub normalized: f64,
    pub q_used: f64,
}

pub fn dse_band_ratio(t: &MomentTable, gamma: &MultiIndex, q: f64) -> Result<NormalizedDGamma> {
    let log_d2 = d_gamma2(t, gamma)?.logmag();
    let m = f64::from(gamma.total()) + 1.0;
    let normalized = log_d2 + 2.0 * m.sqrt() + q * m.ln() + log_gamma(m + 1.0)? - gamma.log_factorial();
    Ok(NormalizedDGamma {
        gamma: gamma.clone(),
        log_d2,
        normalized,
        q_used: q,
    })
}

/// Spread of the normalised `d_γ²` over all `γ` with `lo ≤ |γ| ≤ hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DseBand {
    pub lo: u32,
    pub hi: u32,
    pub q: f64,
    pub min: f64,
    pub max: f64,
    pub points: Vec<NormalizedDGamma>,
}

impl DseBand {
    /// `exp(max − min)`.
    pub fn width_factor(&self) -> f64 {
        (self.max - self.min).exp()
    }
}

pub fn dse_band(t: &MomentTable, lo: u32, hi: u32, q: f64) -> Result<DseBand> {
    if lo > hi {
        return Err(Error::Domain(format!("empty window [{lo}, {hi}]")));
    }
    let n = t.domain().dim();
    let gammas: Vec<MultiIndex> = (lo..=hi).flat_map(|m| MultiIndex::with_total(n, m)).collect();
    let points: Vec<NormalizedDGamma> = gammas
        .par_iter()
        .map(|g| dse_band_ratio(t, g, q))
        .collect::<Result<_>>()?;
    let min = points.iter().map(|p| p.normalized).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|p| p.normalized).fold(f64::NEG_INFINITY, f64::max);
    Ok(DseBand {
        lo,
        hi,
        q,
        min,
        max,
        points,
    })
}

/// `log(d_α d_{α+2β} / d_{α+β}²)`.
pub fn log_reverse_cs(t: &MomentTable, alpha: &MultiIndex, beta: &MultiIndex) -> Result<f64> {
    check_pair(t, alpha, beta)?;
    let ab = alpha + beta;
    let a2b = &ab + beta;
    let la = d_gamma2(t, alpha)?.logmag();
    let l2 = d_gamma2(t, &a2b)?.logmag();
    let l1 = d_gamma2(t, &ab)?.logmag();
    Ok(0.5 * (la + l2) - l1)
}

/// `d_α d_{α+2β} / d_{α+β}²`; at least one by Hölder.
pub fn reverse_cs(t: &MomentTable, alpha: &MultiIndex, beta: &MultiIndex) -> Result<f64> {
    log_reverse_cs(t, alpha, beta).map(f64::exp)
}

/// `−2(√(|α|+1) + √(|α+2β|+1) − 2√(|α+β|+1))`.
pub fn sqrt_expr_bound(alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
    let a = f64::from(alpha.total());
    let b = f64::from(beta.total());
    let s0 = (a + 1.0).sqrt();
    let s1 = (a + b + 1.0).sqrt();
    let s2 = (a + 2.0 * b + 1.0).sqrt();
    // s0 + s2 − 2 s1 rewritten without cancellation
    let d1 = b / (s1 + s0);
    let d2 = b / (s2 + s1);
    2.0 * (d1 - d2)
}

/// `log((α+β)!² / (α! (α+2β)!))`, never positive.
pub fn binom_part(alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
    alpha
        .exps()
        .iter()
        .zip(beta.exps())
        .map(|(&a, &b)| {
            // Σ_{j=1}^{b} log((a+j)/(a+b+j)), each term ≤ 0
            (1..=b)
                .map(|j| (f64::from(a + j) / f64::from(a + b + j)).ln())
                .sum::<f64>()
        })
        .sum::<f64>()
        + 0.0 // an empty float sum is −0.0
}

/// Coefficient of `z^{α+2β}` in `M_β z^α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MBetaCoefficient {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub binom_part: f64,
    /// `log(d_α² / d_{α+β}²)`.
    pub moment_part: f64,
    pub total: f64,
    /// `log(‖M_β z^α‖ / ‖z^α‖) = binom_part + log reverse_cs`.
    pub log_norm_ratio: f64,
}

pub fn m_beta_coeff(t: &MomentTable, alpha: &MultiIndex, beta: &MultiIndex) -> Result<MBetaCoefficient> {
    check_pair(t, alpha, beta)?;
    let binom = binom_part(alpha, beta);
    let ab = alpha + beta;
    let moment_part = d_gamma2(t, alpha)?.logmag() - d_gamma2(t, &ab)?.logmag();
    let lrcs = log_reverse_cs(t, alpha, beta)?;
    Ok(MBetaCoefficient {
        alpha: alpha.clone(),
        beta: beta.clone(),
        binom_part: binom,
        moment_part,
        total: binom + moment_part,
        log_norm_ratio: binom + lrcs,
    })
}

/// `M_β z^α` as a monomial function.
pub fn m_beta_apply(t: &MomentTable, alpha: &MultiIndex, beta: &MultiIndex) -> Result<MonomialFunction> {
    let c = m_beta_coeff(t, alpha, beta)?;
    let target = &(alpha + beta) + beta;
    MonomialFunction::new(
        target,
        MultiIndex::zeros(alpha.dim()),
        LogValue::from_log(c.total),
    )
}

/// The reverse Cauchy–Schwarz ratio split into the pieces of its proof:
/// `ratio = exp(½ sqrt_expr) · poly · factorial · degree · band`, each
/// factor unsquared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseCsFactors {
    pub ratio: f64,
    pub exp_half_sqrt: f64,
    /// `[(|α+β|+1)² / ((|α|+1)(|α+2β|+1))]^{q/2}`.
    pub poly: f64,
    /// `[α! (α+2β)! / (α+β)!²]^{1/2}`.
    pub factorial: f64,
    /// `[(|α+β|+1)!² / ((|α|+1)! (|α+2β|+1)!)]^{1/2}`.
    pub degree: f64,
    /// What remains: the second difference of the normalised band values.
    pub band: f64,
}

impl ReverseCsFactors {
    pub fn product(&self) -> f64 {
        self.exp_half_sqrt * self.poly * self.factorial * self.degree * self.band
    }
}

/// Decomposition on the two-dimensional ball.
pub fn reverse_cs_factors(t: &MomentTable, alpha: &MultiIndex, beta: &MultiIndex, q: f64) -> Result<ReverseCsFactors> {
    check_pair(t, alpha, beta)?;
    if t.domain().dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: t.domain().dim(),
        });
    }
    let ab = alpha + beta;
    let a2b = &ab + beta;
    let (m0, m1, m2) = (alpha.total(), ab.total(), a2b.total());
    let l = |m: u32| (f64::from(m) + 1.0).ln();
    let poly = 0.5 * q * (2.0 * l(m1) - l(m0) - l(m2));
    let factorial = -0.5 * binom_part(alpha, beta);
    let degree = 0.5 * (2.0 * log_factorial(m1 + 1) - log_factorial(m0 + 1) - log_factorial(m2 + 1));
    let n0 = dse_band_ratio(t, alpha, q)?.normalized;
    let n1 = dse_band_ratio(t, &ab, q)?.normalized;
    let n2 = dse_band_ratio(t, &a2b, q)?.normalized;
    let band = 0.5 * (n0 + n2) - n1;
    Ok(ReverseCsFactors {
        ratio: log_reverse_cs(t, alpha, beta)?.exp(),
        exp_half_sqrt: (0.5 * sqrt_expr_bound(alpha, beta)).exp(),
        poly: poly.exp(),
        factorial: factorial.exp(),
        degree: degree.exp(),
        band: band.exp(),
    })
}

/// One row of the reverse Cauchy–Schwarz sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyRow {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub ratio: f64,
    pub sqrt_expr: f64,
    pub binom_part: f64,
}

/// All `(α, β)` with `|α| ≤ max_alpha`, `|β| ≤ max_beta`, ordered by `β`
/// then `α`.
pub fn key_sweep(t: &MomentTable, max_alpha: u32, max_beta: u32) -> Result<Vec<KeyRow>> {
    require_ball_exp(t)?;
    let n = t.domain().dim();
    let alphas = MultiIndex::up_to_total(n, max_alpha);
    let pairs: Vec<(MultiIndex, MultiIndex)> = MultiIndex::up_to_total(n, max_beta)
        .into_iter()
        .flat_map(|b| alphas.iter().map(move |a| (a.clone(), b.clone())))
        .collect();
    pairs
        .par_iter()
        .map(|(a, b)| {
            Ok(KeyRow {
                ratio: reverse_cs(t, a, b)?,
                sqrt_expr: sqrt_expr_bound(a, b),
                binom_part: binom_part(a, b),
                alpha: a.clone(),
                beta: b.clone(),
            })
        })
        .collect()
}

/// `sup_{|α| ≤ max_alpha} ‖M_β z^α‖ / ‖z^α‖`.
pub fn m_beta_sup(t: &MomentTable, beta: &MultiIndex, max_alpha: u32) -> Result<f64> {
    let alphas = MultiIndex::up_to_total(t.domain().dim(), max_alpha);
    let logs: Vec<f64> = alphas
        .par_iter()
        .map(|a| m_beta_coeff(t, a, beta).map(|c| c.log_norm_ratio))
        .collect::<Result<_>>()?;
    Ok(logs.into_iter().fold(f64::NEG_INFINITY, f64::max).exp())
}

/// Both sides of `⟨z^{γ−β}, ∂^β z^γ⟩ = ⟨∂^β M_β z^{γ−β}, z^γ⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjointCheck {
    pub gamma: MultiIndex,
    pub beta: MultiIndex,
    pub lhs: LogValue,
    pub rhs: LogValue,
    pub rel_err: f64,
}

pub fn adjoint_check(t: &MomentTable, gamma: &MultiIndex, beta: &MultiIndex) -> Result<AdjointCheck> {
    check_pair(t, gamma, beta)?;
    let alpha = gamma
        .checked_sub(beta)
        .ok_or_else(|| Error::Domain(format!("β = {beta} exceeds γ = {gamma}")))?;
    let zeros = MultiIndex::zeros(gamma.dim());
    let z_gamma = MonomialFunction::holomorphic(gamma.clone());
    let z_alpha = MonomialFunction::holomorphic(alpha.clone());
    let d_z_gamma = z_gamma
        .derivative(beta, &zeros)
        .expect("β ≤ γ, derivative is nonzero");
    let lhs = inner_product(t, &z_alpha, &d_z_gamma)?;
    let m = m_beta_apply(t, &alpha, beta)?;
    let d_m = m.derivative(beta, &zeros).expect("M_β raises degrees by 2β");
    let rhs = inner_product(t, &d_m, &z_gamma)?;
    Ok(AdjointCheck {
        gamma: gamma.clone(),
        beta: beta.clone(),
        lhs,
        rhs,
        rel_err: LogValue::rel_diff(rhs, lhs),
    })
}

/// `‖f‖²_{k} = Σ_{|β|+|γ| ≤ k} ‖∂_z̄^β ∂_z^γ f‖²`.
pub fn sobolev_norm_sq(src: &dyn MomentSource, f: &MonomialFunction, k: u32) -> Result<LogValue> {
    if k > 4 {
        return Err(Error::Domain(format!("Sobolev order {k} above 4")));
    }
    let n = f.dim();
    let terms = MultiIndex::up_to_total(2 * n, k)
        .into_iter()
        .filter_map(|gb| {
            let gamma = MultiIndex::new(gb.exps()[..n].to_vec());
            let beta = MultiIndex::new(gb.exps()[n..].to_vec());
            f.derivative(&gamma, &beta)
        })
        .map(|g| g.norm_sq(src))
        .collect::<Result<Vec<_>>>()?;
    Ok(LogValue::sum(terms))
}

/// `‖B f‖_k / ‖f‖_k` for one monomial `z^a z̄^b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevRatio {
    pub a: MultiIndex,
    pub b: MultiIndex,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevSweep {
    pub k: u32,
    pub max_degree: u32,
    pub kernel_degree: Option<u32>,
    pub rows: Vec<SobolevRatio>,
    pub sup: f64,
    /// Supremum over `b ≠ 0`; holomorphic inputs give exactly one.
    pub sup_non_holomorphic: f64,
}

/// Ratios over every `z^a z̄^b` with `|a + b| ≤ max_degree`. With a kernel
/// the projection goes through its truncation.
pub fn sobolev_ratio_sweep(
    t: &MomentTable,
    k: u32,
    max_degree: u32,
    kernel: Option<&TruncatedKernel>,
) -> Result<SobolevSweep> {
    if k > 2 || max_degree > 40 {
        return Err(Error::Domain(format!(
            "sweep limited to k ≤ 2 and degree ≤ 40, got k = {k}, degree = {max_degree}"
        )));
    }
    let n = t.domain().dim();
    let indices = MultiIndex::up_to_total(2 * n, max_degree);
    let rows: Vec<SobolevRatio> = indices
        .par_iter()
        .map(|ab| {
            let a = MultiIndex::new(ab.exps()[..n].to_vec());
            let b = MultiIndex::new(ab.exps()[n..].to_vec());
            let f = MonomialFunction::new(a.clone(), b.clone(), LogValue::ONE)?;
            let bf = match kernel {
                Some(kern) => kern.project(t, &f)?,
                None => project_monomial(t, &f)?,
            };
            let ratio = match bf {
                None => 0.0,
                Some(bf) if f.is_holomorphic() && bf == f => 1.0,
                Some(bf) => {
                    let num = sobolev_norm_sq(t, &bf, k)?;
                    let den = sobolev_norm_sq(t, &f, k)?;
                    (0.5 * (num.logmag() - den.logmag())).exp()
                }
            };
            Ok(SobolevRatio { a, b, ratio })
        })
        .collect::<Result<_>>()?;
    let sup = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let sup_non_holomorphic = rows
        .iter()
        .filter(|r| r.b.total() > 0)
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    Ok(SobolevSweep {
        k,
        max_degree,
        kernel_degree: kernel.map(TruncatedKernel::degree),
        rows,
        sup,
        sup_non_holomorphic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::DomainSpec;
    use crate::moments::{boundary_moment_i, MomentMethod};
    use crate::quadrature::{integrate_1d, integrate_2d_radial, QuadratureSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn ball() -> &'static MomentTable {
        static T: OnceLock<MomentTable> = OnceLock::new();
        T.get_or_init(|| {
            MomentTable::new(DomainSpec::ball(2).unwrap(), WeightSpec::Exponential, QuadratureSpec::default()).unwrap()
        })
    }

    fn mi(v: [u32; 2]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn d_gamma2_factorisation() {
        let t = ball();
        let i1 = boundary_moment_i(1.0, &QuadratureSpec::default()).unwrap().value;
        let d0 = d_gamma2(t, &mi([0, 0])).unwrap();
        assert!(LogValue::rel_diff(d0, i1.scale_log(2.0 * PI.ln())) < 1e-13);
        assert!((d0.to_f64() - 0.382_975_584_998_471_91).abs() < 1e-12);
        assert_eq!(d_gamma2(t, &mi([1, 0])).unwrap(), d_gamma2(t, &mi([0, 1])).unwrap());
        for g in [[3, 5], [10, 0], [7, 7]] {
            let g = mi(g);
            let i = boundary_moment_i(f64::from(g.total()) + 1.0, &QuadratureSpec::default()).unwrap().value;
            let want = i * trig_moment(&g).unwrap() * LogValue::from_f64(2.0 * PI * PI);
            assert!(LogValue::rel_diff(d_gamma2(t, &g).unwrap(), want) < 1e-13);
        }
        let quad = MomentTable::new(DomainSpec::ball(2).unwrap(), WeightSpec::Exponential, QuadratureSpec::default())
            .unwrap()
            .with_method(MomentMethod::Quadrature);
        let g = mi([3, 5]);
        let direct = quad.generalized_moment(&g.to_reals(2.0)).unwrap();
        assert!(LogValue::rel_diff(d_gamma2(t, &g).unwrap(), direct) < 1e-8);
    }

    #[test]
    fn d_gamma2_rejects_other_domains() {
        let disc = MomentTable::new(DomainSpec::disc(), WeightSpec::Exponential, QuadratureSpec::default()).unwrap();
        assert!(d_gamma2(&disc, &MultiIndex::new(vec![1])).is_err());
        let flat = MomentTable::new(DomainSpec::ball(2).unwrap(), WeightSpec::Unweighted, QuadratureSpec::default()).unwrap();
        assert!(d_gamma2(&flat, &mi([1, 0])).is_err());
    }

    #[test]
    fn trig_moments() {
        assert!((trig_moment(&mi([0, 0])).unwrap().to_f64() - 0.5).abs() < 1e-15);
        assert!((24.0 * trig_moment(&mi([1, 2])).unwrap().to_f64() - 1.0).abs() < 1e-13);
        let spec = QuadratureSpec::default().with_rel_tol(1e-14).with_transform(false);
        let q = integrate_1d(
            |th: f64| LogValue::from_f64(th.cos().powi(9) * th.sin().powi(15)),
            0.0,
            PI / 2.0,
            &spec,
        )
        .unwrap();
        let want = trig_moment(&mi([4, 7])).unwrap();
        assert!(LogValue::rel_diff(q.value, want) < 1e-12);
        assert!(trig_moment(&MultiIndex::new(vec![1, 2, 3])).is_err());
    }

    #[test]
    fn dse_band_widths() {
        let t = ball();
        let b = dse_band(t, 100, 200, NOMINAL_Q).unwrap();
        assert!(b.width_factor() <= 2.0, "{}", b.width_factor());
        let fitted = dse_band(t, 100, 200, 0.75).unwrap();
        assert!(fitted.width_factor() <= 1.2, "{}", fitted.width_factor());
        assert!(dse_band_ratio(t, &mi([0, 0]), NOMINAL_Q).unwrap().normalized.is_finite());
    }

    #[test]
    fn reverse_cs_identity_and_lower_bound() {
        let t = ball();
        for a in [[0, 0], [5, 3], [40, 1]] {
            assert_eq!(reverse_cs(t, &mi(a), &mi([0, 0])).unwrap(), 1.0);
        }
        for row in key_sweep(t, 30, 3).unwrap() {
            assert!(row.ratio >= 1.0 - 1e-12, "{row:?}");
            assert!(row.ratio < 10.0 * (f64::from(row.beta.total())).exp());
        }
    }

    #[test]
    fn sqrt_expr_values() {
        let v = sqrt_expr_bound(&mi([0, 0]), &mi([1, 0]));
        let want = -2.0 * (1.0 + 3f64.sqrt() - 2.0 * 2f64.sqrt());
        assert!((v - want).abs() < 1e-15);
        assert!((v - 0.192_75).abs() < 1e-5);
        assert_eq!(sqrt_expr_bound(&mi([9, 4]), &mi([0, 0])), 0.0);
    }

    #[test]
    fn binom_part_examples() {
        assert!((binom_part(&mi([2, 0]), &mi([1, 0])) - 0.75f64.ln()).abs() < 1e-15);
        assert_eq!(binom_part(&mi([2, 5]), &mi([0, 0])), 0.0);
        // against the factorial definition
        let (a, b) = (mi([4, 2]), mi([2, 3]));
        let ab = &a + &b;
        let want = 2.0 * ab.log_factorial() - a.log_factorial() - (&ab + &b).log_factorial();
        assert!((binom_part(&a, &b) - want).abs() < 1e-12);
    }

    #[test]
    fn m_beta_identity_and_norm_ratio() {
        let t = ball();
        let c = m_beta_coeff(t, &mi([3, 4]), &mi([0, 0])).unwrap();
        assert_eq!(c.total, 0.0);
        assert_eq!(c.log_norm_ratio, 0.0);
        let (a, b) = (mi([2, 1]), mi([1, 1]));
        let c = m_beta_coeff(t, &a, &b).unwrap();
        let m = m_beta_apply(t, &a, &b).unwrap();
        let direct = 0.5 * (m.norm_sq(t).unwrap().logmag() - d_gamma2(t, &a).unwrap().logmag());
        assert!((direct - c.log_norm_ratio).abs() < 1e-12);
    }

    #[test]
    fn adjoint_identity() {
        let t = ball();
        let c = adjoint_check(t, &mi([3, 2]), &mi([1, 1])).unwrap();
        assert!(c.rel_err < 1e-8, "{c:?}");
        assert!(adjoint_check(t, &mi([1, 0]), &mi([0, 1])).is_err());
    }

    #[test]
    fn decomposition_reproduces_ratio() {
        let t = ball();
        for (a, b) in [([0, 0], [3, 0]), ([10, 20], [1, 2]), ([100, 0], [0, 1])] {
            let f = reverse_cs_factors(t, &mi(a), &mi(b), 0.75).unwrap();
            assert!((f.product() / f.ratio - 1.0).abs() < 1e-10, "{f:?}");
            for v in [f.poly, f.factorial, f.degree] {
                assert!((0.1..=10.0).contains(&v), "{f:?}");
            }
        }
    }

    #[test]
    fn sobolev_norm_term_enumeration() {
        let t = ball();
        let one = MonomialFunction::holomorphic(mi([0, 0]));
        let g0 = t.generalized_moment(&[0.0, 0.0]).unwrap();
        for k in 0..=4 {
            assert!(LogValue::rel_diff(sobolev_norm_sq(t, &one, k).unwrap(), g0) < 1e-15);
        }
        let z1 = MonomialFunction::holomorphic(mi([1, 0]));
        let want = d_gamma2(t, &mi([1, 0])).unwrap() + g0;
        assert!(LogValue::rel_diff(sobolev_norm_sq(t, &z1, 1).unwrap(), want) < 1e-15);
        assert!(sobolev_norm_sq(t, &z1, 5).is_err());
    }

    #[test]
    fn sobolev_norm_matches_quadrature() {
        // f = z1² z̄2, k = 2: |f|², |∂1 f|², |∂̄2 f|², |∂1² f|², |∂1∂̄2 f|²
        let t = ball();
        let f = MonomialFunction::new(mi([2, 0]), mi([0, 1]), LogValue::ONE).unwrap();
        let got = sobolev_norm_sq(t, &f, 2).unwrap();
        let d = DomainSpec::ball(2).unwrap();
        let spec = QuadratureSpec::default();
        let log_c = (4.0 * PI * PI).ln();
        let q = integrate_2d_radial(
            |r1, r2| {
                let (x, y) = (r1 * r1, r2 * r2);
                let poly = x * x * y + 4.0 * x * y + x * x + 4.0 * y + 4.0 * x;
                WeightSpec::Exponential
                    .log_at_rho(d.rho(&[r1, r2]))
                    .scale_log(log_c + (poly * r1 * r2).ln())
            },
            &d,
            &spec,
        )
        .unwrap();
        assert!(LogValue::rel_diff(got, q.value) < 1e-7);
    }

    #[test]
    fn sobolev_sweep_contraction_and_truncation() {
        let t = ball();
        let s0 = sobolev_ratio_sweep(t, 0, 12, None).unwrap();
        assert!(s0.sup <= 1.0 + 1e-9);
        for r in s0.rows.iter().filter(|r| r.b.total() == 0) {
            assert_eq!(r.ratio, 1.0);
        }
        let s1 = sobolev_ratio_sweep(t, 1, 12, None).unwrap();
        let k12 = TruncatedKernel::new(t, 12).unwrap();
        let k32 = TruncatedKernel::new(t, 32).unwrap();
        let a = sobolev_ratio_sweep(t, 1, 12, Some(&k12)).unwrap();
        let b = sobolev_ratio_sweep(t, 1, 12, Some(&k32)).unwrap();
        for ((x, y), z) in a.rows.iter().zip(&b.rows).zip(&s1.rows) {
            assert!((x.ratio - y.ratio).abs() <= 1e-9 * y.ratio.max(1e-300));
            assert!((x.ratio - z.ratio).abs() <= 1e-12 * z.ratio.max(1.0));
        }
        assert!(sobolev_ratio_sweep(t, 3, 10, None).is_err());
        assert!(sobolev_ratio_sweep(t, 1, 41, None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sqrt_expr_in_bounds(a1 in 0u32..500, a2 in 0u32..500, b1 in 0u32..6, b2 in 0u32..6) {
            let (a, b) = (mi([a1, a2]), mi([b1, b2]));
            let v = sqrt_expr_bound(&a, &b);
            prop_assert!(v >= 0.0);
            prop_assert!(v <= 2.0 * f64::from(b.total()));
        }

        #[test]
        fn binom_part_nonpositive(a1 in 0u32..500, a2 in 0u32..500, b1 in 0u32..6, b2 in 0u32..6) {
            prop_assert!(binom_part(&mi([a1, a2]), &mi([b1, b2])) <= 0.0);
        }

        #[test]
        fn reverse_cs_at_least_one(a1 in 0u32..120, a2 in 0u32..120, b1 in 0u32..4, b2 in 0u32..4) {
            let r = reverse_cs(ball(), &mi([a1, a2]), &mi([b1, b2])).unwrap();
            prop_assert!(r >= 1.0 - 1e-12);
        }
    }
}
