//! Weighted moments of the monomials `|z_1|^{s_1} ⋯ |z_n|^{s_n}`.
//!
//! Every quantity downstream (kernel coefficients, projections of
//! monomial test functions, L^p and Sobolev norms) is a ratio of
//! generalized moments
//!
//! ```text
//! G(s) = ∫_Ω |z_1|^{s_1} ⋯ |z_n|^{s_n} λ dV,
//! ```
//!
//! so they are computed once per exponent vector and cached. Balls and
//! the disc reduce to the one-dimensional radial profile
//! `J(c) = ∫_0^1 t^c h(t) dt` with `h(t) = λ` at `|z|² = t` via the
//! Dirichlet integral; other domains go through two-dimensional
//! quadrature.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{delta_n, DeltaOptions, DomainKind, DomainSpec, WeightSpec};
use crate::error::{Error, Result};
use crate::numerics::{log_beta, LogValue, MultiIndex};
use crate::quadrature::{integrate_1d, integrate_1d_try, integrate_2d_radial, integrate_2d_radial_range_try, QuadratureSpec};

/// A moment together with its estimated relative error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub value: LogValue,
    pub rel_err: f64,
}

impl Moment {
    fn exact(value: LogValue) -> Self {
        Moment {
            value,
            rel_err: 0.0,
        }
    }
}

/// How [`MomentTable`] evaluates `G(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentMethod {
    /// Closed reductions where available, quadrature otherwise.
    Auto,
    /// Always integrate over the radial image (dimension ≤ 2 only).
    Quadrature,
}

/// Anything that can produce `G(s)` for real exponent vectors.
pub trait MomentSource: Send + Sync {
    fn dim(&self) -> usize;
    fn moment(&self, s: &[f64]) -> Result<Moment>;
    fn label(&self) -> String;
}

fn cache_key(s: &[f64]) -> Vec<u64> {
    // + 0.0 folds -0.0 into 0.0
    s.iter().map(|&x| (x + 0.0).to_bits()).collect()
}

/// `c · ln t` with the convention `0 · ln 0 = 0`.
fn xlogy(c: f64, t: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * t.ln()
    }
}

fn check_exponents(s: &[f64]) -> Result<()> {
    if let Some(bad) = s.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Domain(format!("moment exponents must be finite and >= 0, got {bad}")));
    }
    Ok(())
}

/// `I(y) = ∫_0^1 R^y exp(-1/(1-R)) dR`.
pub fn boundary_moment_i(y: f64, spec: &QuadratureSpec) -> Result<Moment> {
    check_exponents(&[y])?;
    let i = integrate_1d(
        |t| {
            if t >= 1.0 {
                LogValue::ZERO
            } else {
                LogValue::from_log(xlogy(y, t) - 1.0 / (1.0 - t))
            }
        },
        0.0,
        1.0,
        spec,
    )?;
    Ok(Moment {
        value: i.value,
        rel_err: i.rel_err,
    })
}

fn radial_profile_uncached(w: &WeightSpec, c: f64, spec: &QuadratureSpec) -> Result<Moment> {
    match *w {
        WeightSpec::Exponential => boundary_moment_i(c, spec),
        WeightSpec::Polynomial(q) => Ok(Moment::exact(LogValue::from_log(log_beta(c + 1.0, q + 1.0)?))),
        WeightSpec::Unweighted => Ok(Moment::exact(LogValue::from_log(-(c + 1.0).ln()))),
    }
}

/// Moments of one weighted domain, cached by exponent vector.
///
/// Reads are concurrent; a missing entry is computed outside the lock and
/// inserted if still absent, so every caller observes the same bits.
#[derive(Debug)]
pub struct MomentTable {
    domain: DomainSpec,
    weight: WeightSpec,
    quad: QuadratureSpec,
    method: MomentMethod,
    moments: RwLock<HashMap<Vec<u64>, Moment>>,
    profiles: RwLock<HashMap<u64, Moment>>,
}

impl MomentTable {
    pub fn new(domain: DomainSpec, weight: WeightSpec, quad: QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        Ok(MomentTable {
            domain,
            weight,
            quad,
            method: MomentMethod::Auto,
            moments: RwLock::new(HashMap::new()),
            profiles: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_method(mut self, method: MomentMethod) -> Self {
        self.method = method;
        self
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn quad_spec(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn method(&self) -> MomentMethod {
        self.method
    }

    /// Quadrature settings for integrands carrying the weight: the
    /// boundary transform only helps if the weight vanishes there.
    fn weighted_spec(&self) -> QuadratureSpec {
        self.quad
            .with_transform(self.quad.boundary_transform && self.weight.decays_at_boundary())
    }

    /// `J(c) = ∫_0^1 t^c h(t) dt`, the radial profile of the weight on the
    /// unit ball.
    pub fn radial_profile(&self, c: f64) -> Result<Moment> {
        let key = (c + 0.0).to_bits();
        if let Some(m) = self.profiles.read().unwrap().get(&key) {
            return Ok(*m);
        }
        let m = radial_profile_uncached(&self.weight, c, &self.weighted_spec())?;
        Ok(*self.profiles.write().unwrap().entry(key).or_insert(m))
    }

    /// `G(s)` as a log-domain value.
    pub fn generalized_moment(&self, s: &[f64]) -> Result<LogValue> {
        self.moment(s).map(|m| m.value)
    }

    /// `G(s)` with its error estimate.
    pub fn moment(&self, s: &[f64]) -> Result<Moment> {
        if s.len() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                got: s.len(),
            });
        }
        check_exponents(s)?;
        let key = cache_key(s);
        if let Some(m) = self.moments.read().unwrap().get(&key) {
            return Ok(*m);
        }
        let m = self.compute(s)?;
        Ok(*self.moments.write().unwrap().entry(key).or_insert(m))
    }

    /// Evaluates many moments in parallel; results are in input order.
    pub fn moments_par(&self, ss: &[Vec<f64>]) -> Result<Vec<Moment>> {
        ss.par_iter().map(|s| self.moment(s)).collect()
    }

    fn compute(&self, s: &[f64]) -> Result<Moment> {
        let n = self.domain.dim();
        let closed = match self.domain.kind() {
            DomainKind::Disc | DomainKind::Ball => self.method == MomentMethod::Auto || n > 2,
            DomainKind::Ellipsoid => false,
        };
        if closed {
            self.dirichlet(s)
        } else {
            self.by_quadrature(s)
        }
    }

    /// `π^n Π Γ(s_i/2+1) / Γ(|s|/2+n) · J(|s|/2+n-1)`.
    fn dirichlet(&self, s: &[f64]) -> Result<Moment> {
        let n = s.len() as f64;
        let half: f64 = s.iter().sum::<f64>() / 2.0;
        // Π Γ(a_i) / Γ(Σ a_i) as a chain of Beta functions, which avoids
        // cancelling log-gammas of size ~x log x
        let mut log_c = n * PI.ln();
        let mut acc = s[0] / 2.0 + 1.0;
        for &si in &s[1..] {
            let ai = si / 2.0 + 1.0;
            log_c += log_beta(acc, ai)?;
            acc += ai;
        }
        let j = self.radial_profile(half + n - 1.0)?;
        Ok(Moment {
            value: j.value.scale_log(log_c),
            rel_err: j.rel_err,
        })
    }

    fn by_quadrature(&self, s: &[f64]) -> Result<Moment> {
        let d = &self.domain;
        let w = self.weight;
        let spec = self.weighted_spec();
        let i = match d.dim() {
            1 => integrate_1d(
                |r| {
                    w.log_at_rho(d.rho(&[r]))
                        .scale_log(std::f64::consts::TAU.ln() + xlogy(s[0] + 1.0, r))
                },
                0.0,
                1.0,
                &spec,
            )?,
            2 => {
                let log_c = (4.0 * PI * PI).ln();
                integrate_2d_radial(
                    |r1, r2| {
                        w.log_at_rho(d.rho(&[r1, r2]))
                            .scale_log(log_c + xlogy(s[0] + 1.0, r1) + xlogy(s[1] + 1.0, r2))
                    },
                    d,
                    &spec,
                )?
            }
            n => {
                return Err(Error::Domain(format!(
                    "no quadrature path for dimension {n}"
                )))
            }
        };
        Ok(Moment {
            value: i.value,
            rel_err: i.rel_err,
        })
    }

    /// `Φ(x) = G((x, 0, …, 0))`.
    pub fn phi(&self, x: f64) -> Result<LogValue> {
        let mut s = vec![0.0; self.domain.dim()];
        s[0] = x;
        self.generalized_moment(&s)
    }

    /// `d_γ² = G(2γ)`, the squared norm of `z^γ`.
    pub fn d_gamma_sq(&self, gamma: &MultiIndex) -> Result<LogValue> {
        self.generalized_moment(&gamma.to_reals(2.0))
    }

    fn require_dim2(&self) -> Result<()> {
        if self.domain.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.domain.dim(),
            });
        }
        Ok(())
    }

    /// `μ(r1)`: the weighted area of the slice over a point with `|z1| = r1`.
    /// Uses the closed one-dimensional form on the ball.
    pub fn mu_weight(&self, r1: f64) -> Result<Moment> {
        self.require_dim2()?;
        if !(r1 >= 0.0) {
            return Err(Error::Domain(format!("radius must be >= 0, got {r1}")));
        }
        if r1 >= 1.0 {
            return Ok(Moment::exact(LogValue::ZERO));
        }
        if *self.domain.kind() != DomainKind::Ball {
            return self.mu_weight_quadrature(r1);
        }
        // slice is the disc of radius² c; in u = |z2|², ρ = u - c
        let c = (1.0 - r1) * (1.0 + r1);
        match self.weight {
            WeightSpec::Exponential => {
                let i = integrate_1d(
                    |u| {
                        if u >= c {
                            LogValue::ZERO
                        } else {
                            LogValue::from_log(PI.ln() - 1.0 / (c - u))
                        }
                    },
                    0.0,
                    c,
                    &self.weighted_spec(),
                )?;
                Ok(Moment {
                    value: i.value,
                    rel_err: i.rel_err,
                })
            }
            WeightSpec::Polynomial(q) => Ok(Moment::exact(LogValue::from_log(
                PI.ln() + (q + 1.0) * c.ln() - (q + 1.0).ln(),
            ))),
            WeightSpec::Unweighted => Ok(Moment::exact(LogValue::from_log(PI.ln() + c.ln()))),
        }
    }

    /// `μ(r1) = 2π ∫_0^{slice(r1)} r2 λ(r1, r2) dr2` by quadrature on any
    /// two-dimensional domain.
    pub fn mu_weight_quadrature(&self, r1: f64) -> Result<Moment> {
        self.require_dim2()?;
        if r1 >= 1.0 {
            return Ok(Moment::exact(LogValue::ZERO));
        }
        let d = &self.domain;
        let w = self.weight;
        let s = d.slice_radius(r1)?;
        let i = integrate_1d(
            |r2| w.log_at_rho(d.rho(&[r1, r2])).scale_log(std::f64::consts::TAU.ln() + xlogy(1.0, r2)),
            0.0,
            s,
            &self.weighted_spec(),
        )?;
        Ok(Moment {
            value: i.value,
            rel_err: i.rel_err,
        })
    }

    /// `Φ_n(x)` split at `r1 = a` into the part over `r1 < a` and the part
    /// `Φ̃_n(x)` over `a < r1 < 1`.
    ///
    /// The integrand is `r1^(x+n+1) δ_n(r1, r2)`. Points within the
    /// finite-difference cutoff of the boundary contribute zero; there the
    /// weight is below `e^-1000`.
    pub fn phi_n_parts(&self, n: u32, x: f64, a: f64) -> Result<PhiNParts> {
        self.require_dim2()?;
        check_exponents(&[x])?;
        if !(0.0..1.0).contains(&a) {
            return Err(Error::Domain(format!("threshold must lie in [0, 1), got {a}")));
        }
        let d = &self.domain;
        let opts = DeltaOptions::default();
        let power = x + f64::from(n) + 1.0;
        let f = |r1: f64, r2: f64| -> Result<LogValue> {
            if r1 <= 0.0 || r2 <= 0.0 {
                return Ok(LogValue::ZERO);
            }
            match delta_n(d, n, &[r1, r2], &opts) {
                Ok(v) => Ok(v.scale_log(power * r1.ln())),
                Err(Error::Boundary { .. }) => Ok(LogValue::ZERO),
                Err(e) => Err(e),
            }
        };
        let spec = self.weighted_spec();
        let inner = if a > 0.0 {
            integrate_2d_radial_range_try(f, d, 0.0, a, &spec)?
        } else {
            crate::quadrature::Integral {
                value: LogValue::ZERO,
                rel_err: 0.0,
                panels: 0,
            }
        };
        let tilde = integrate_2d_radial_range_try(f, d, a, 1.0, &spec)?;
        // both estimates are relative to their own part
        let err_abs = LogValue::from_log(inner.value.logmag() + inner.rel_err.ln())
            + LogValue::from_log(tilde.value.logmag() + tilde.rel_err.ln());
        let total = inner.value + tilde.value;
        Ok(PhiNParts {
            n,
            x,
            a,
            inner: inner.value,
            tilde: tilde.value,
            rel_err: if total.is_zero() {
                0.0
            } else {
                (err_abs.logmag() - total.logmag()).exp()
            },
        })
    }

    /// `θ_n(x) = log Φ̃_n(x) − Σ_{j=2}^{n+1} log(x+j)`.
    pub fn theta_n(&self, n: u32, x: f64, a: f64) -> Result<f64> {
        Ok(self.phi_n_parts(n, x, a)?.theta())
    }

    /// `x² · Δ²θ_n(x)` with the centred step `h = 0.05·x`.
    pub fn theta_second_difference(&self, n: u32, x: f64, a: f64) -> Result<f64> {
        let h = 0.05 * x;
        let t: Vec<f64> = [x - h, x, x + h]
            .par_iter()
            .map(|&y| self.theta_n(n, y, a))
            .collect::<Result<_>>()?;
        Ok(x * x * (t[0] - 2.0 * t[1] + t[2]) / (h * h))
    }

    /// Cached `G(s)` entries, sorted by exponent bits for reproducible output.
    pub fn cached_moments(&self) -> Vec<(Vec<f64>, Moment)> {
        let mut out: Vec<(Vec<u64>, Moment)> = self
            .moments
            .read()
            .unwrap()
            .iter()
            .map(|(k, m)| (k.clone(), *m))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.into_iter()
            .map(|(k, m)| (k.into_iter().map(f64::from_bits).collect(), m))
            .collect()
    }

    /// Cached radial profile entries `(c, J(c))`.
    pub fn cached_profiles(&self) -> Vec<(f64, Moment)> {
        let mut out: Vec<(u64, Moment)> = self
            .profiles
            .read()
            .unwrap()
            .iter()
            .map(|(k, m)| (*k, *m))
            .collect();
        out.sort_by_key(|e| e.0);
        out.into_iter().map(|(k, m)| (f64::from_bits(k), m)).collect()
    }

    /// Pre-populates the caches, e.g. from a file written by an earlier run.
    pub fn seed(&self, moments: Vec<(Vec<f64>, Moment)>, profiles: Vec<(f64, Moment)>) {
        let mut mm = self.moments.write().unwrap();
        for (s, m) in moments {
            mm.insert(cache_key(&s), m);
        }
        let mut pp = self.profiles.write().unwrap();
        for (c, m) in profiles {
            pp.insert((c + 0.0).to_bits(), m);
        }
    }

    pub fn cache_len(&self) -> usize {
        self.moments.read().unwrap().len() + self.profiles.read().unwrap().len()
    }
}

impl MomentSource for MomentTable {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn moment(&self, s: &[f64]) -> Result<Moment> {
        MomentTable::moment(self, s)
    }

    fn label(&self) -> String {
        format!("{} / {}", self.domain, self.weight)
    }
}

/// `Φ_n(x)` split at a threshold `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiNParts {
    pub n: u32,
    pub x: f64,
    pub a: f64,
    /// Contribution of `r1 < a`.
    pub inner: LogValue,
    /// `Φ̃_n(x)`, the contribution of `a < r1 < 1`.
    pub tilde: LogValue,
    pub rel_err: f64,
}

impl PhiNParts {
    pub fn total(&self) -> LogValue {
        self.inner + self.tilde
    }

    /// `Φ_n/Φ̃_n − 1`, computed as `inner/tilde` without cancellation.
    pub fn ratio_minus_one(&self) -> f64 {
        (self.inner / self.tilde).to_f64()
    }

    /// `log |Φ_n/Φ̃_n − 1|`; stays finite after the ratio itself underflows.
    pub fn log_abs_ratio_minus_one(&self) -> f64 {
        (self.inner / self.tilde).logmag()
    }

    pub fn theta(&self) -> f64 {
        self.tilde.logmag() - (2..=self.n + 1).map(|j| (self.x + f64::from(j)).ln()).sum::<f64>()
    }
}

/// Smallest `C` with `|Φ_n/Φ̃_n − 1| ≤ C/(x+n+2)` on the given evaluations.
pub fn fit_tilde_constant(parts: &[PhiNParts]) -> f64 {
    parts
        .iter()
        .map(|p| (p.x + f64::from(p.n) + 2.0) * p.ratio_minus_one().abs())
        .fold(0.0, f64::max)
}

/// The disc carrying the slice weight `μ` of a two-dimensional domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuxMode {
    /// `Φ(x) = G((x, 0))` on the underlying domain.
    Reduction,
    /// `Φ(x) = 2π ∫_0^1 r^(x+1) μ(r) dr` with `μ` itself from quadrature.
    Quadrature,
}

/// Moments `Φ(x) = ∫_D |z|^x μ dA` of the disc with the slice weight.
#[derive(Debug)]
pub struct AuxDiscTable {
    omega: Arc<MomentTable>,
    mode: AuxMode,
    cache: RwLock<HashMap<u64, Moment>>,
}

impl AuxDiscTable {
    pub fn new(omega: Arc<MomentTable>, mode: AuxMode) -> Result<Self> {
        omega.require_dim2()?;
        Ok(AuxDiscTable {
            omega,
            mode,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn omega(&self) -> &MomentTable {
        &self.omega
    }

    pub fn mode(&self) -> AuxMode {
        self.mode
    }

    pub fn phi(&self, x: f64) -> Result<LogValue> {
        self.moment(&[x]).map(|m| m.value)
    }

    fn compute(&self, x: f64) -> Result<Moment> {
        match self.mode {
            AuxMode::Reduction => self.omega.moment(&[x, 0.0]),
            AuxMode::Quadrature => {
                let spec = self.omega.weighted_spec();
                let i = integrate_1d_try(
                    |r| {
                        if r <= 0.0 {
                            return Ok(LogValue::ZERO);
                        }
                        Ok(self
                            .omega
                            .mu_weight(r)?
                            .value
                            .scale_log(std::f64::consts::TAU.ln() + (x + 1.0) * r.ln()))
                    },
                    0.0,
                    1.0,
                    &spec,
                )?;
                Ok(Moment {
                    value: i.value,
                    rel_err: i.rel_err,
                })
            }
        }
    }
}

impl MomentSource for AuxDiscTable {
    fn dim(&self) -> usize {
        1
    }

    fn moment(&self, s: &[f64]) -> Result<Moment> {
        if s.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: s.len(),
            });
        }
        check_exponents(s)?;
        let key = (s[0] + 0.0).to_bits();
        if let Some(m) = self.cache.read().unwrap().get(&key) {
            return Ok(*m);
        }
        let m = self.compute(s[0])?;
        Ok(*self.cache.write().unwrap().entry(key).or_insert(m))
    }

    fn label(&self) -> String {
        format!("disc / slice weight of {}", self.omega.label())
    }
}

/// Least-squares fit of `log I(x) ≈ −a√x − q log x + C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// `a`, the coefficient of `−√x`.
    pub slope2sqrt: f64,
    /// `q`, the coefficient of `−log x`.
    pub poly_exponent: f64,
    pub constant: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Condition number of the column-normalised design matrix.
    pub condition: f64,
    pub points: usize,
}

const MAX_FIT_CONDITION: f64 = 1e6;

/// Solves `min ‖A β − y‖` with columns of `A` normalised first. Returns the
/// coefficients, the RMS residual and the condition number.
pub(crate) fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let rows = y.len();
    let cols = columns.len();
    if rows <= cols {
        return Err(Error::IllConditioned(format!(
            "{rows} points cannot determine {cols} coefficients"
        )));
    }
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) {
        return Err(Error::IllConditioned("degenerate design column".into()));
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| columns[j][i] / norms[j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = smax / smin;
    if !(condition < MAX_FIT_CONDITION) {
        return Err(Error::IllConditioned(format!(
            "design matrix condition number {condition:e}"
        )));
    }
    let beta = svd
        .solve(&b, f64::EPSILON * smax)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let resid = &a * &beta - &b;
    let rms = (resid.norm_squared() / rows as f64).sqrt();
    let coeffs = beta.iter().zip(&norms).map(|(c, n)| c / n).collect();
    Ok((coeffs, rms, condition))
}

/// Fits the large-`x` behaviour of `I(x)` on `grid`.
pub fn fit_kappa_exponent(grid: &[f64], spec: &QuadratureSpec) -> Result<AsymptoticFit> {
    if grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("fit grid must be positive".into()));
    }
    let logs: Vec<f64> = grid
        .par_iter()
        .map(|&x| boundary_moment_i(x, spec).map(|m| m.value.logmag()))
        .collect::<Result<_>>()?;
    let cols = vec![
        grid.iter().map(|x| x.sqrt()).collect::<Vec<_>>(),
        grid.iter().map(|x| x.ln()).collect(),
        vec![1.0; grid.len()],
    ];
    let (beta, residual, condition) = least_squares(&cols, &logs)?;
    Ok(AsymptoticFit {
        slope2sqrt: -beta[0],
        poly_exponent: -beta[1],
        constant: beta[2],
        residual,
        condition,
        points: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{log_factorial, log_spaced};
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn ball_exp() -> &'static MomentTable {
        static T: OnceLock<MomentTable> = OnceLock::new();
        T.get_or_init(|| MomentTable::new(DomainSpec::ball(2).unwrap(), WeightSpec::Exponential, spec()).unwrap())
    }

    /// `E_n(1)` from the series of `E_1` and the upward recurrence.
    fn expint_at_one(n: u32) -> f64 {
        let euler = 0.577_215_664_901_532_860_6;
        let mut s = 0.0;
        let mut fact = 1.0;
        for k in 1..40 {
            fact *= f64::from(k);
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign / (f64::from(k) * fact);
        }
        let mut e = -euler + s;
        for m in 1..n {
            e = ((-1f64).exp() - e) / f64::from(m);
        }
        e
    }

    #[test]
    fn boundary_moment_matches_exponential_integrals() {
        let e2 = expint_at_one(2);
        let e3 = expint_at_one(3);
        assert!((e2 - 0.148_495_506_775_922_05).abs() < 1e-15);
        let i0 = boundary_moment_i(0.0, &spec()).unwrap().value.to_f64();
        let i1 = boundary_moment_i(1.0, &spec()).unwrap().value.to_f64();
        assert!(((i0 - e2) / e2).abs() < 1e-10);
        assert!(((i1 - (e2 - e3)) / (e2 - e3)).abs() < 1e-10);
    }

    #[test]
    fn boundary_moment_reference_table() {
        // high-precision reference, breakpoints placed around the peak
        let table = [
            (2.0, -4.188_167_643_777_814_738),
            (10.0, -8.337_379_406_575_273_848),
            (100.0, -23.479_429_027_154_335_55),
            (1000.0, -68.383_185_593_454_381_55),
            (1e4, -206.844_434_388_334_248_8),
            (80001.0, -574.087_119_301_215_212_7),
            (1e5, -641.020_702_650_158_853_5),
        ];
        for (y, want) in table {
            let got = boundary_moment_i(y, &spec()).unwrap().value.logmag();
            assert!((got - want).abs() < 1e-9, "y = {y}: {got} vs {want}");
        }
        let l = boundary_moment_i(1e4, &spec()).unwrap().value.logmag();
        assert!((l + 200.0).abs() / 100.0 <= 0.15);
    }

    #[test]
    fn ball_moments_reproduce_monomial_norm_chain() {
        let t = ball_exp();
        let g0 = t.generalized_moment(&[0.0, 0.0]).unwrap().to_f64();
        assert!((g0 - 0.382_975_584_998_471_91).abs() / g0 < 1e-10);
        for g in [[0u32, 0], [1, 0], [3, 5], [7, 2], [20, 11]] {
            let total = g[0] + g[1];
            let i = boundary_moment_i(f64::from(total) + 1.0, &spec()).unwrap().value;
            let want = i.scale_log(
                (2.0 * PI * PI).ln() + 0.5f64.ln() + log_factorial(g[0]) + log_factorial(g[1])
                    - log_factorial(total + 1),
            );
            let got = t.d_gamma_sq(&MultiIndex::new(g.to_vec())).unwrap();
            assert!(LogValue::rel_diff(got, want) < 1e-13, "{g:?}");
        }
    }

    #[test]
    fn closed_path_matches_two_dimensional_quadrature() {
        let q = MomentTable::new(DomainSpec::ball(2).unwrap(), WeightSpec::Exponential, spec())
            .unwrap()
            .with_method(MomentMethod::Quadrature);
        for s in [[4.0, 6.0], [6.0, 10.0], [0.0, 0.0]] {
            let a = ball_exp().generalized_moment(&s).unwrap();
            let b = q.generalized_moment(&s).unwrap();
            assert!(LogValue::rel_diff(b, a) < 1e-8, "{s:?}");
        }
    }

    #[test]
    fn ellipsoid_moments() {
        // reference values from the one-dimensional reduction
        // π²/(ab) · B(A, B) · I(A + B − 1), A = (s1+2)/(2a), B = (s2+2)/(2b)
        let t = MomentTable::new(DomainSpec::ellipsoid(2, 1).unwrap(), WeightSpec::Exponential, spec()).unwrap();
        let g0 = t.generalized_moment(&[0.0, 0.0]).unwrap().to_f64();
        let g46 = t.generalized_moment(&[4.0, 6.0]).unwrap().to_f64();
        assert!((g0 - 0.692_860_803_924_138_403_3).abs() / g0 < 1e-8);
        assert!((g46 - 1.414_182_802_624_479_161_9e-3).abs() / g46 < 1e-8);
    }

    #[test]
    fn unweighted_and_polynomial_closed_forms() {
        let disc = MomentTable::new(DomainSpec::disc(), WeightSpec::Unweighted, spec()).unwrap();
        assert!((disc.phi(2.0).unwrap().to_f64() - PI / 2.0).abs() < 1e-15);
        let ball3 = MomentTable::new(DomainSpec::ball(3).unwrap(), WeightSpec::Unweighted, spec()).unwrap();
        let v = ball3.generalized_moment(&[0.0; 3]).unwrap().to_f64();
        assert!((v - PI.powi(3) / 6.0).abs() < 1e-13);
        // ∫_D |z|^s (1-|z|²)^q dA = π B(s/2+1, q+1)
        let poly = MomentTable::new(DomainSpec::disc(), WeightSpec::Polynomial(2.0), spec()).unwrap();
        let quad = MomentTable::new(DomainSpec::disc(), WeightSpec::Polynomial(2.0), spec())
            .unwrap()
            .with_method(MomentMethod::Quadrature);
        for s in [0.0, 3.0, 10.0] {
            let want = PI * log_beta(s / 2.0 + 1.0, 3.0).unwrap().exp();
            assert!((poly.phi(s).unwrap().to_f64() - want).abs() / want < 1e-13);
            assert!((quad.phi(s).unwrap().to_f64() - want).abs() / want < 1e-10);
        }
    }

    #[test]
    fn phi_is_ball_reduction() {
        let t = ball_exp();
        for x in [0.0, 1.5, 7.0, 40.0] {
            let want = boundary_moment_i(x / 2.0 + 1.0, &spec())
                .unwrap()
                .value
                .scale_log(2.0 * PI.ln() - (x / 2.0 + 1.0).ln());
            assert!(LogValue::rel_diff(t.phi(x).unwrap(), want) < 1e-13);
        }
        let (p4, p5, p6) = (
            t.phi(4.0).unwrap().logmag(),
            t.phi(5.0).unwrap().logmag(),
            t.phi(6.0).unwrap().logmag(),
        );
        assert!(p5 <= (p4 + p6) / 2.0 + 1e-9);
    }

    #[test]
    fn slice_weight() {
        let t = ball_exp();
        let mu0 = t.mu_weight(0.0).unwrap().value.to_f64();
        assert!((mu0 - PI * expint_at_one(2)).abs() / mu0 < 1e-10);
        assert!((mu0 - 0.466_512_393_178_33).abs() < 1e-13);
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let r = f64::from(i) / 50.0;
            let mu = t.mu_weight(r).unwrap().value.to_f64();
            let generic = t.mu_weight_quadrature(r).unwrap().value.to_f64();
            assert!(mu < prev);
            assert!((mu - generic).abs() <= 1e-9 * mu, "r = {r}");
            prev = mu;
        }
        assert!(t.mu_weight(0.999).unwrap().value.to_f64() < 1e-200);
        assert_eq!(t.mu_weight(1.0).unwrap().value, LogValue::ZERO);
    }

    #[test]
    fn aux_disc_matches_reduction() {
        let omega = Arc::new(MomentTable::new(DomainSpec::ball(2).unwrap(), WeightSpec::Exponential, spec()).unwrap());
        let quad = AuxDiscTable::new(omega.clone(), AuxMode::Quadrature).unwrap();
        let red = AuxDiscTable::new(omega.clone(), AuxMode::Reduction).unwrap();
        for x in [0.0, 2.0, 10.0] {
            let a = quad.phi(x).unwrap();
            let b = red.phi(x).unwrap();
            assert!(LogValue::rel_diff(a, b) <= 1e-7, "x = {x}");
            assert_eq!(b, omega.phi(x).unwrap());
        }
    }

    #[test]
    fn integration_by_parts_identity() {
        let t = ball_exp();
        let a2 = 3f64.powf(-0.25);
        for n in [1u32, 2] {
            for x in [10.0, 100.0] {
                let parts = t.phi_n_parts(n, x, if n == 1 { 0.0 } else { a2 }).unwrap();
                let denom: f64 = (2..=n + 1).map(|j| (x + f64::from(j)).ln()).sum();
                let lhs = t.phi(x).unwrap();
                let rhs = parts.total().scale_log((4.0 * PI * PI).ln() - denom);
                assert!(LogValue::rel_diff(rhs, lhs) < 1e-6, "n={n} x={x}");
            }
        }
        let p1 = t.phi_n_parts(1, 10.0, 0.0).unwrap();
        assert!(p1.inner.is_zero());
        assert_eq!(p1.ratio_minus_one(), 0.0);
    }

    #[test]
    fn tilde_ratio_decays() {
        let t = ball_exp();
        let a2 = 3f64.powf(-0.25);
        let parts: Vec<PhiNParts> = [50.0, 100.0, 200.0]
            .iter()
            .map(|&x| t.phi_n_parts(2, x, a2).unwrap())
            .collect();
        for w in parts.windows(2) {
            assert!(w[1].ratio_minus_one().abs() < w[0].ratio_minus_one().abs());
            assert!(w[1].log_abs_ratio_minus_one() < w[0].log_abs_ratio_minus_one());
        }
        assert!(fit_tilde_constant(&parts).is_finite());
    }

    #[test]
    fn theta_convexity_bound() {
        let t = ball_exp();
        let a2 = 3f64.powf(-0.25);
        for (n, a) in [(1u32, 0.0), (2, a2)] {
            for x in [100.0, 1000.0] {
                let lhs = t.theta_second_difference(n, x, a).unwrap();
                let nf = f64::from(n);
                let rhs = 0.9 * x * x * nf / (x + nf + 1.0).powi(2);
                assert!(lhs >= rhs, "n={n} x={x}: {lhs} < {rhs}");
            }
        }
    }

    #[test]
    fn kappa_fit_recovers_square_root_rate() {
        let grid = log_spaced(1e2, 1e5, 40);
        let fit = fit_kappa_exponent(&grid, &spec()).unwrap();
        assert!((1.98..=2.02).contains(&fit.slope2sqrt), "{fit:?}");
        assert!(fit.residual < 1e-2);
    }

    #[test]
    fn narrow_fit_grid_is_rejected() {
        let grid = log_spaced(1e4, 1.001e4, 20);
        assert!(matches!(fit_kappa_exponent(&grid, &spec()), Err(Error::IllConditioned(_))));
        assert!(matches!(fit_kappa_exponent(&[1.0, 2.0, 3.0], &spec()), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn cache_is_coherent_and_exportable() {
        let t = MomentTable::new(DomainSpec::ball(2).unwrap(), WeightSpec::Exponential, spec()).unwrap();
        let a = t.generalized_moment(&[3.0, 1.0]).unwrap();
        let b = t.generalized_moment(&[3.0, 1.0]).unwrap();
        assert_eq!(a.logmag().to_bits(), b.logmag().to_bits());
        let fresh = MomentTable::new(DomainSpec::ball(2).unwrap(), WeightSpec::Exponential, spec()).unwrap();
        fresh.seed(t.cached_moments(), t.cached_profiles());
        assert_eq!(fresh.cache_len(), t.cache_len());
        assert_eq!(fresh.generalized_moment(&[3.0, 1.0]).unwrap(), a);
        let par = t.moments_par(&[vec![3.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(par[0].value, a);
    }

    #[test]
    fn argument_checks() {
        let t = ball_exp();
        assert!(matches!(t.generalized_moment(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(t.generalized_moment(&[-1.0, 0.0]), Err(Error::Domain(_))));
        let disc = MomentTable::new(DomainSpec::disc(), WeightSpec::Exponential, spec()).unwrap();
        assert!(disc.mu_weight(0.2).is_err());
        assert!(disc.phi_n_parts(1, 1.0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn phi_is_log_convex(u in 0.0f64..300.0, v in 0.0f64..300.0, s in 0.0f64..1.0) {
            let t = ball_exp();
            let mid = s * u + (1.0 - s) * v;
            let lhs = t.phi(mid).unwrap().logmag();
            let rhs = s * t.phi(u).unwrap().logmag() + (1.0 - s) * t.phi(v).unwrap().logmag();
            prop_assert!(lhs <= rhs + 1e-9);
        }

        #[test]
        fn moments_are_positive(s1 in 0.0f64..50.0, s2 in 0.0f64..50.0) {
            prop_assert_eq!(ball_exp().generalized_moment(&[s1, s2]).unwrap().sign(), 1);
        }
    }
}
