//! L^p behaviour of the projection on the test family `z^{km} z̄^m`.
//!
//! For a radial weight the projection of `z^{km} z̄^m` is
//! `Φ(2km)/Φ(2(k−1)m) · z^{(k−1)m}`, so
//!
//! ```text
//! ‖B f‖_p^p / ‖f‖_p^p = (Φ(2km)/Φ(2(k−1)m))^p · Φ(p(k−1)m)/Φ(p(k+1)m).
//! ```
//!
//! With `φ = log Φ ≈ −A√x` the log of this ratio grows like `c·√m` for
//! `p < 2` and a suitable `k`, and never exceeds zero for `p = 2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{DomainKind, DomainSpec, WeightSpec};
use crate::error::{Error, Result};
use crate::moments::{least_squares, Moment, MomentSource};
use crate::numerics::LogValue;

/// One evaluation of the log-ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupPoint {
    pub p: f64,
    pub k: u32,
    pub m: u64,
    pub log_ratio: f64,
    /// `(φ(2km), φ(2(k−1)m), φ(p(k+1)m), φ(p(k−1)m))`.
    pub components: [f64; 4],
    /// Largest quadrature error estimate among the four moments.
    pub max_rel_err: f64,
}

/// `Φ(x) = G((x, 0, …, 0))` for any moment source.
pub fn phi_of(src: &dyn MomentSource, x: f64) -> Result<Moment> {
    let mut s = vec![0.0; src.dim()];
    s[0] = x;
    src.moment(&s)
}

/// Smallest integer `k` with `p(k+1) < 2(k−1)`.
pub fn minimal_k(p: f64) -> Result<u32> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::Domain(format!(
            "a blowup exponent k exists only for 1 < p < 2, got p = {p}"
        )));
    }
    let mut k = 2u32;
    while p * f64::from(k + 1) >= 2.0 * f64::from(k - 1) {
        k += 1;
    }
    Ok(k)
}

fn check_args(p: f64, k: u32, m: u64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must be > 1, got {p}")));
    }
    if k < 2 {
        return Err(Error::Domain(format!("k must be >= 2, got {k}")));
    }
    if m < 1 {
        return Err(Error::Domain("m must be >= 1".into()));
    }
    Ok(())
}

/// Assembles the log-ratio from four moments.
pub fn blowup_ratio(src: &dyn MomentSource, p: f64, k: u32, m: u64) -> Result<BlowupPoint> {
    check_args(p, k, m)?;
    let (kf, mf) = (f64::from(k), m as f64);
    let args = [
        2.0 * kf * mf,
        2.0 * (kf - 1.0) * mf,
        p * (kf + 1.0) * mf,
        p * (kf - 1.0) * mf,
    ];
    let mut components = [0.0; 4];
    let mut max_rel_err = 0.0f64;
    for (c, &x) in components.iter_mut().zip(&args) {
        let mom = phi_of(src, x)?;
        *c = mom.value.logmag();
        max_rel_err = max_rel_err.max(mom.rel_err);
    }
    let log_ratio = p * (components[0] - components[1]) - (components[2] - components[3]);
    Ok(BlowupPoint {
        p,
        k,
        m,
        log_ratio,
        components,
        max_rel_err,
    })
}

/// Integer `m` values, 24 per decade, from `m_min` to `m_max`.
pub fn m_schedule(m_min: u64, m_max: u64) -> Vec<u64> {
    if m_min == 0 || m_max < m_min {
        return vec![];
    }
    let decades = (m_max as f64 / m_min as f64).log10();
    let n = (decades * 24.0).round() as usize + 1;
    let mut out: Vec<u64> = crate::numerics::log_spaced(m_min as f64, m_max as f64, n)
        .into_iter()
        .map(|x| x.round() as u64)
        .collect();
    out.dedup();
    out
}

/// A sweep over `m`, in increasing order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupSweep {
    pub points: Vec<BlowupPoint>,
    /// First `m` dropped because a moment's error estimate exceeded the cap.
    pub capped_at: Option<u64>,
}

/// Relative quadrature error above which the sweep stops.
pub const SWEEP_ERROR_CAP: f64 = 1e-6;

/// Evaluates [`blowup_ratio`] for every `m` (in parallel) and truncates the
/// sweep where the moments stop being trustworthy.
pub fn blowup_sweep(src: &dyn MomentSource, p: f64, k: u32, ms: &[u64]) -> Result<BlowupSweep> {
    let pts: Vec<BlowupPoint> = ms
        .par_iter()
        .map(|&m| blowup_ratio(src, p, k, m))
        .collect::<Result<_>>()?;
    let cut = pts.iter().position(|b| b.max_rel_err > SWEEP_ERROR_CAP);
    let capped_at = cut.map(|i| pts[i].m);
    let mut points = pts;
    if let Some(i) = cut {
        points.truncate(i);
    }
    Ok(BlowupSweep { points, capped_at })
}

/// `c(p, k) = 2√p(√(k+1) − √(k−1)) − 2√2·p(√k − √(k−1))`: the `√m`
/// coefficient of the log-ratio when `φ(x) = −2√x`.
pub fn predicted_c(p: f64, k: u32) -> f64 {
    let kf = f64::from(k);
    2.0 * p.sqrt() * ((kf + 1.0).sqrt() - (kf - 1.0).sqrt())
        - 2.0 * 2f64.sqrt() * p * (kf.sqrt() - (kf - 1.0).sqrt())
}

/// `A` in `φ(x) ≈ −A√x` for `Φ(x) = G((x, 0))` on the given domain.
///
/// On the ball (and disc) `Φ(x)` is proportional to `I(x/2 + O(1))`, and
/// on the ellipsoid `|z1|^{2a} + |z2|^{2b} < 1` to `I(x/(2a) + O(1))`;
/// with `log I(y) ≈ −2√y` this gives `A = 2/√(2a)`. Weights without the
/// exponential factor have polynomial moments, `A = 0`.
pub fn phi_sqrt_coefficient(d: &DomainSpec, w: &WeightSpec) -> f64 {
    if *w != WeightSpec::Exponential {
        return 0.0;
    }
    let a = match d.kind() {
        DomainKind::Disc | DomainKind::Ball => 1.0,
        DomainKind::Ellipsoid => f64::from(d.exponents()[0]),
    };
    2.0 / (2.0 * a).sqrt()
}

/// Least-squares slope of the log-ratio against `√m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `c(p, k)` as defined for `φ = −2√x`.
    pub c_raw: f64,
    /// `(A/2)·c(p, k)`, the slope expected for the actual `φ ≈ −A√x`.
    pub predicted: f64,
    /// `|slope − predicted| / |predicted|`.
    pub rel_gap: f64,
    /// `|slope − c_raw| / |c_raw|`.
    pub rel_gap_raw: f64,
}

pub fn fit_blowup_slope(points: &[BlowupPoint], phi_coefficient: f64) -> Result<SlopeFit> {
    let Some(first) = points.first() else {
        return Err(Error::IllConditioned("empty sweep".into()));
    };
    let (p, k) = (first.p, first.k);
    if points.iter().any(|b| b.p != p || b.k != k) {
        return Err(Error::InvalidConfig("sweep mixes different (p, k)".into()));
    }
    let x: Vec<f64> = points.iter().map(|b| (b.m as f64).sqrt()).collect();
    let y: Vec<f64> = points.iter().map(|b| b.log_ratio).collect();
    let (beta, residual, _) = least_squares(&[x, vec![1.0; y.len()]], &y)?;
    let c_raw = predicted_c(p, k);
    let predicted = 0.5 * phi_coefficient * c_raw;
    let gap = |target: f64| {
        if target == 0.0 {
            beta[0].abs()
        } else {
            ((beta[0] - target) / target).abs()
        }
    };
    Ok(SlopeFit {
        slope: beta[0],
        intercept: beta[1],
        residual,
        c_raw,
        predicted,
        rel_gap: gap(predicted),
        rel_gap_raw: gap(c_raw),
    })
}

/// `lim_{m→∞}` of the ratio for the unweighted disc, `Φ(x) = 2π/(x+2)`:
/// `((k−1)/k)^p · (k+1)/(k−1)`.
pub fn unweighted_limit(p: f64, k: u32) -> f64 {
    let kf = f64::from(k);
    ((kf - 1.0) / kf).powf(p) * (kf + 1.0) / (kf - 1.0)
}

/// Lower bound for the L^p norm of the projection, `p > 2`, by duality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityPoint {
    pub p: f64,
    pub p_conj: f64,
    pub k: u32,
    pub m: u64,
    /// `log(|⟨u, B g⟩| / (‖u‖_p ‖g‖_{p'}))`.
    pub log_bound: f64,
}

/// For `p > 2` pairs `g = z^{km} z̄^m ∈ L^{p'}` with the norming function
/// `u = z^j |z|^{j(p'−2)}`, `j = (k−1)m`, of `B g = c z^j`.
/// Since `|⟨B u, g⟩| = |⟨u, B g⟩|`, the quotient bounds `‖B‖_{L^p}` from
/// below. `k` is chosen for the conjugate exponent.
pub fn duality_point(src: &dyn MomentSource, p: f64, m: u64) -> Result<DualityPoint> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::Domain(format!("duality check needs p > 2, got {p}")));
    }
    let q = p / (p - 1.0);
    let k = minimal_k(q)?;
    check_args(q, k, m)?;
    let (kf, mf) = (f64::from(k), m as f64);
    let j = (kf - 1.0) * mf;
    let phi = |x: f64| phi_of(src, x).map(|m| m.value);
    // B g = c z^j with c = Φ(2km)/Φ(2j)
    let log_c = (phi(2.0 * kf * mf)? / phi(2.0 * j)?).logmag();
    // ⟨u, B g⟩ = c Φ(j p'), ‖u‖_p^p = Φ(j p'), ‖g‖_{p'}^{p'} = Φ(p'(k+1)m)
    let pairing = phi(j * q)?.scale_log(log_c);
    let u_norm_p: LogValue = phi(j * q)?;
    let g_norm_q: LogValue = phi(q * (kf + 1.0) * mf)?;
    let log_bound = pairing.logmag() - u_norm_p.logmag() / p - g_norm_q.logmag() / q;
    Ok(DualityPoint {
        p,
        p_conj: q,
        k,
        m,
        log_bound,
    })
}
