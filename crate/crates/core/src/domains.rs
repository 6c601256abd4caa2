//! Complete Reinhardt domains described by multi-radial defining functions.
//!
//! Every shipped domain has the form `rho(r) = Σ r_i^(2 a_i) - 1` with
//! positive integer exponents: the unit disc (`n = 1`), the unit ball
//! (`a_i = 1`), and two-dimensional complex ellipsoids
//! `|z1|^(2a) + |z2|^(2b) < 1`. That keeps every radial derivative analytic.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::LogValue;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    Disc,
    Ball,
    Ellipsoid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSpec {
    kind: DomainKind,
    exps: Vec<u32>,
}

impl DomainSpec {
    pub fn disc() -> Self {
        DomainSpec {
            kind: DomainKind::Disc,
            exps: vec![1],
        }
    }

    pub fn ball(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("ball dimension must be >= 1".into()));
        }
        if n == 1 {
            return Ok(Self::disc());
        }
        Ok(DomainSpec {
            kind: DomainKind::Ball,
            exps: vec![1; n],
        })
    }

    /// `|z1|^(2a) + |z2|^(2b) < 1`.
    pub fn ellipsoid(a: u32, b: u32) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidConfig(
                "ellipsoid exponents must be positive integers".into(),
            ));
        }
        if a == 1 && b == 1 {
            return Self::ball(2);
        }
        Ok(DomainSpec {
            kind: DomainKind::Ellipsoid,
            exps: vec![a, b],
        })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Exponents `a_i` in `rho = Σ r_i^(2 a_i) - 1`.
    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    fn check_dim(&self, r: &[f64]) -> Result<()> {
        if r.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: r.len(),
            });
        }
        Ok(())
    }

    /// Defining function at radii `r`; negative inside, zero on the boundary.
    pub fn rho(&self, r: &[f64]) -> f64 {
        debug_assert_eq!(r.len(), self.dim());
        let s: f64 = r
            .iter()
            .zip(&self.exps)
            .map(|(&ri, &a)| ri.powi(2 * a as i32))
            .sum();
        s - 1.0
    }

    pub fn is_interior(&self, r: &[f64]) -> bool {
        r.len() == self.dim() && r.iter().all(|&x| x >= 0.0) && self.rho(r) < 0.0
    }

    /// First radial partials `∂rho/∂r_i`.
    pub fn rho_grad(&self, r: &[f64]) -> Vec<f64> {
        r.iter()
            .zip(&self.exps)
            .map(|(&ri, &a)| {
                let e = 2 * a as i32;
                f64::from(e) * ri.powi(e - 1)
            })
            .collect()
    }

    /// Second radial partials; the Hessian is diagonal for these domains.
    pub fn rho_hess(&self, r: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut h = vec![vec![0.0; n]; n];
        for (i, (&ri, &a)) in r.iter().zip(&self.exps).enumerate() {
            let e = 2 * a as i32;
            h[i][i] = f64::from(e * (e - 1)) * ri.powi(e - 2);
        }
        h
    }

    /// `rho(y, r_2, ...) - rho(r_1, r_2, ...)` without cancellation.
    pub fn rho_shift_r1(&self, r: &[f64], y: f64) -> f64 {
        let e = 2 * self.exps[0] as i32;
        let x = r[0];
        // y^e - x^e = (y - x) Σ_{j<e} y^(e-1-j) x^j
        let sum: f64 = (0..e).map(|j| y.powi(e - 1 - j) * x.powi(j)).sum();
        (y - x) * sum
    }

    /// Largest admissible value of coordinate `i` with the others held fixed.
    pub fn coordinate_extent(&self, r: &[f64], i: usize) -> f64 {
        let rest: f64 = r
            .iter()
            .zip(&self.exps)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (&rj, &a))| rj.powi(2 * a as i32))
            .sum();
        let left = 1.0 - rest;
        if left <= 0.0 {
            return 0.0;
        }
        if self.exps[i] == 1 {
            left.sqrt()
        } else {
            left.powf(1.0 / f64::from(2 * self.exps[i]))
        }
    }

    /// Radius of the disc `S_{z1}`, the slice over `|z1| = r1` in the `z2`
    /// direction. Only defined for two-dimensional domains.
    pub fn slice_radius(&self, r1: f64) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.dim(),
            });
        }
        if !(0.0..=1.0).contains(&r1) {
            return Err(Error::Domain(format!(
                "r1 = {r1} is outside the projection [0, 1] of the radial image"
            )));
        }
        if self.exps == [1, 1] {
            return Ok(((1.0 - r1) * (1.0 + r1)).sqrt());
        }
        Ok(self.coordinate_extent(&[r1, 0.0], 1))
    }

    /// Short identifier used in configs, cache names and fingerprints.
    pub fn label(&self) -> String {
        match self.kind {
            DomainKind::Disc => "disc".into(),
            DomainKind::Ball => format!("ball:{}", self.dim()),
            DomainKind::Ellipsoid => format!("ellipsoid:{},{}", self.exps[0], self.exps[1]),
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The weight `λ` carried by a domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightSpec {
    /// `λ = exp(1/rho)`.
    Exponential,
    /// `λ = (-rho)^q`.
    Polynomial(f64),
    Unweighted,
}

impl WeightSpec {
    /// `log λ` as a function of the defining function value. Zero weight
    /// (sign 0) outside the domain.
    pub fn log_at_rho(&self, rho: f64) -> LogValue {
        if rho.is_nan() || rho >= 0.0 {
            return LogValue::ZERO;
        }
        match *self {
            WeightSpec::Exponential => LogValue::from_log(1.0 / rho),
            WeightSpec::Polynomial(q) => LogValue::from_log(q * (-rho).ln()),
            WeightSpec::Unweighted => LogValue::ONE,
        }
    }

    pub fn label(&self) -> String {
        match self {
            WeightSpec::Exponential => "exp".into(),
            WeightSpec::Polynomial(q) => format!("poly:{q}"),
            WeightSpec::Unweighted => "none".into(),
        }
    }

    pub fn decays_at_boundary(&self) -> bool {
        match *self {
            WeightSpec::Exponential => true,
            WeightSpec::Polynomial(q) => q > 0.0,
            WeightSpec::Unweighted => false,
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "exp" | "exponential" => Ok(WeightSpec::Exponential),
            "none" | "unweighted" => Ok(WeightSpec::Unweighted),
            _ => {
                let q = s
                    .strip_prefix("poly:")
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown weight '{s}'")))?;
                let q: f64 = q
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad polynomial exponent '{q}'")))?;
                if !(q >= 0.0 && q.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "polynomial exponent must be >= 0, got {q}"
                    )));
                }
                Ok(WeightSpec::Polynomial(q))
            }
        }
    }
}

/// `log λ(r)`. Fails with a boundary error unless `rho(r) < 0`.
pub fn log_weight(d: &DomainSpec, w: &WeightSpec, r: &[f64]) -> Result<f64> {
    d.check_dim(r)?;
    let rho = d.rho(r);
    if !(rho < 0.0) {
        return Err(Error::Boundary {
            point: r.to_vec(),
            rho,
        });
    }
    Ok(w.log_at_rho(rho).logmag())
}

/// Knobs for the radial derivatives `δ_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaOptions {
    pub max_order: u32,
    /// Finite differences refuse points with `|rho|` below this.
    pub boundary_cutoff: f64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            max_order: 4,
            boundary_cutoff: 1e-3,
        }
    }
}

fn check_delta_args(d: &DomainSpec, n: u32, r: &[f64], opts: &DeltaOptions) -> Result<f64> {
    d.check_dim(r)?;
    if d.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: d.dim(),
        });
    }
    if n == 0 || n > opts.max_order {
        return Err(Error::Domain(format!(
            "derivative order must be in 1..={}, got {n}",
            opts.max_order
        )));
    }
    if r[0] < 0.0 || r[1] < 0.0 {
        return Err(Error::Domain(format!("radii must be non-negative: {r:?}")));
    }
    let rho = d.rho(r);
    if !(rho < 0.0) {
        return Err(Error::Boundary {
            point: r.to_vec(),
            rho,
        });
    }
    Ok(rho)
}

/// `δ_n(r1, r2) = (-1)^n ∂^n/∂r1^n (r2 exp(1/rho))` as a log-domain value.
///
/// Orders 1 and 2 use the closed formulas; higher orders go through
/// [`delta_n_fd`].
pub fn delta_n(d: &DomainSpec, n: u32, r: &[f64], opts: &DeltaOptions) -> Result<LogValue> {
    let rho = check_delta_args(d, n, r, opts)?;
    let r2 = r[1];
    if r2 == 0.0 {
        return Ok(LogValue::ZERO);
    }
    let g = d.rho_grad(r)[0];
    let tail = r2.ln() + 1.0 / rho;
    match n {
        1 => Ok(LogValue::from_f64(g).scale_log(tail - 2.0 * (-rho).ln())),
        2 => {
            let gg = d.rho_hess(r)[0][0];
            let bracket = g * g + rho * (2.0 * g * g - gg * rho);
            Ok(LogValue::from_f64(bracket).scale_log(tail - 4.0 * (-rho).ln()))
        }
        _ => delta_n_fd(d, n, r, opts),
    }
}

/// Real-valued convenience wrapper around [`delta_n`].
pub fn delta_n_value(d: &DomainSpec, n: u32, r: &[f64]) -> Result<f64> {
    delta_n(d, n, r, &DeltaOptions::default()).map(LogValue::to_f64)
}

fn central_difference(n: u32, f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    match n {
        1 => (f(h) - f(-h)) / (2.0 * h),
        2 => (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h),
        3 => (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h),
        4 => {
            (f(2.0 * h) - 4.0 * f(h) + 6.0 * f(0.0) - 4.0 * f(-h) + f(-2.0 * h))
                / (h * h * h * h)
        }
        _ => unreachable!("order checked by caller"),
    }
}

/// Finite-difference `δ_n`, central stencils with one Richardson step.
///
/// The function is normalised by `exp(1/rho)` at the centre before
/// differencing, so the result never underflows. The step is
/// `min(h_n, dist/10, rho²/(20 |∂rho/∂r1|))`. The base `h_n` grows with the
/// order so that roundoff (`~ eps/h^n`) stays below the `O(h^4)` truncation
/// error after extrapolation; the last term keeps the exponent change across
/// the stencil small close to the boundary.
pub fn delta_n_fd(d: &DomainSpec, n: u32, r: &[f64], opts: &DeltaOptions) -> Result<LogValue> {
    let rho = check_delta_args(d, n, r, opts)?;
    if n > 4 {
        return Err(Error::Domain(format!(
            "finite-difference stencils are provided up to order 4, got {n}"
        )));
    }
    if rho.abs() < opts.boundary_cutoff {
        return Err(Error::Boundary {
            point: r.to_vec(),
            rho,
        });
    }
    let r2 = r[1];
    if r2 == 0.0 {
        return Ok(LogValue::ZERO);
    }
    let dist = d.coordinate_extent(r, 0) - r[0];
    let g = d.rho_grad(r)[0].abs();
    let base = match n {
        1 | 2 => 1e-3,
        3 => 4e-3,
        _ => 1e-2,
    };
    let mut h = f64::min(base, dist / 10.0);
    if g > 0.0 {
        h = h.min(0.05 * rho * rho / g);
    }
    let x = r[0];
    let f = |t: f64| {
        let y = x + t;
        let shift = d.rho_shift_r1(r, y);
        let rho_y = rho + shift;
        // 1/rho_y - 1/rho
        (-shift / (rho_y * rho)).exp()
    };
    let coarse = central_difference(n, &f, h);
    let fine = central_difference(n, &f, h / 2.0);
    let deriv = (4.0 * fine - coarse) / 3.0;
    let signed = if n % 2 == 0 { deriv } else { -deriv };
    Ok(LogValue::from_f64(signed).scale_log(r2.ln() + 1.0 / rho))
}

/// Result of scanning `δ_n` for positivity on a grid over the radial image.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityScan {
    pub order: u32,
    /// All grid points with `r1` above this value have `δ_n > 0`.
    pub threshold: f64,
    pub nonpositive_points: usize,
    /// Points skipped because the derivative could not be evaluated there.
    pub skipped_points: usize,
}

/// Finds an empirical `a_n < 1` with `δ_n > 0` on `{a_n < r1 < 1}`.
///
/// The grid is cell-centred: `r1_i = (i + 1/2)/grid` and
/// `r2_j = (j + 1/2)/grid · slice_radius(r1_i)`.
pub fn positivity_threshold(
    d: &DomainSpec,
    n: u32,
    grid: usize,
    opts: &DeltaOptions,
) -> Result<PositivityScan> {
    if d.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: d.dim(),
        });
    }
    if grid < 2 {
        return Err(Error::InvalidConfig("positivity grid needs >= 2 points".into()));
    }
    let rows: Vec<(f64, usize, usize)> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let r1 = (i as f64 + 0.5) / grid as f64;
            let s = d.slice_radius(r1).unwrap_or(0.0);
            let mut bad = 0;
            let mut skipped = 0;
            for j in 0..grid {
                let r2 = (j as f64 + 0.5) / grid as f64 * s;
                match delta_n(d, n, &[r1, r2], opts) {
                    Ok(v) if v.sign() > 0 => {}
                    Ok(_) => bad += 1,
                    Err(_) => skipped += 1,
                }
            }
            (r1, bad, skipped)
        })
        .collect();
    let threshold = rows
        .iter()
        .filter(|(_, bad, _)| *bad > 0)
        .map(|(r1, _, _)| *r1)
        .fold(0.0, f64::max);
    Ok(PositivityScan {
        order: n,
        threshold,
        nonpositive_points: rows.iter().map(|r| r.1).sum(),
        skipped_points: rows.iter().map(|r| r.2).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball() -> DomainSpec {
        DomainSpec::ball(2).unwrap()
    }

    #[test]
    fn log_weight_examples() {
        let b = ball();
        assert_eq!(log_weight(&b, &WeightSpec::Exponential, &[0.0, 0.0]).unwrap(), -1.0);
        let v = log_weight(&b, &WeightSpec::Exponential, &[0.6, 0.6]).unwrap();
        assert!((v + 1.0 / 0.28).abs() < 1e-12);
        assert!((v + 3.571_428_6).abs() < 1e-7);
        let p = log_weight(&b, &WeightSpec::Polynomial(1.0), &[0.0, 0.0]).unwrap();
        assert_eq!(p, 0.0);
        assert_eq!(log_weight(&b, &WeightSpec::Unweighted, &[0.3, 0.1]).unwrap(), 0.0);
    }

    #[test]
    fn log_weight_boundary_error() {
        let b = ball();
        assert!(matches!(
            log_weight(&b, &WeightSpec::Exponential, &[1.0, 0.0]),
            Err(Error::Boundary { .. })
        ));
        assert!(matches!(
            log_weight(&b, &WeightSpec::Exponential, &[0.9, 0.9]),
            Err(Error::Boundary { .. })
        ));
        assert!(matches!(
            log_weight(&b, &WeightSpec::Exponential, &[0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn slice_radius_examples() {
        let b = ball();
        assert_eq!(b.slice_radius(0.0).unwrap(), 1.0);
        assert_eq!(b.slice_radius(1.0).unwrap(), 0.0);
        let e = DomainSpec::ellipsoid(2, 1).unwrap();
        for t in [0.0, 0.3, 0.7, 0.99] {
            let s = e.slice_radius(t).unwrap();
            assert!((s - (1.0 - t.powi(4)).sqrt()).abs() < 1e-15);
        }
        assert!(b.slice_radius(1.2).is_err());
        assert!(DomainSpec::disc().slice_radius(0.2).is_err());
    }

    #[test]
    fn defining_function_sign_convention() {
        for d in [ball(), DomainSpec::ellipsoid(2, 3).unwrap(), DomainSpec::ball(3).unwrap()] {
            let n = d.dim();
            assert!(d.rho(&vec![0.0; n]) < 0.0);
            let mut r = vec![0.0; n];
            r[0] = 1.0;
            assert_eq!(d.rho(&r), 0.0);
        }
    }

    #[test]
    fn completeness_of_radial_image() {
        // componentwise smaller points of interior points stay interior
        let domains = [ball(), DomainSpec::ellipsoid(3, 1).unwrap(), DomainSpec::ball(4).unwrap()];
        let mut state = 0x2545_f491_4f6c_dd1d_u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for d in &domains {
            for _ in 0..2000 {
                let r: Vec<f64> = (0..d.dim()).map(|_| next()).collect();
                if !d.is_interior(&r) {
                    continue;
                }
                let smaller: Vec<f64> = r.iter().map(|x| x * next()).collect();
                assert!(d.is_interior(&smaller), "{d}: {r:?} -> {smaller:?}");
            }
        }
    }

    #[test]
    fn delta_one_examples() {
        let b = ball();
        let v = delta_n_value(&b, 1, &[0.6, 0.6]).unwrap();
        // 2·0.6 · 0.6/0.28² · exp(-1/0.28)
        let expect = 1.2 * 0.6 / (0.28f64 * 0.28) * (-1.0f64 / 0.28).exp();
        assert!((v - expect).abs() < 1e-14);
        assert!((v - 0.2582).abs() < 1e-4);
        assert_eq!(delta_n_value(&b, 1, &[0.0, 0.4]).unwrap(), 0.0);
    }

    // values from a symbolic differentiation of r2·exp(1/(r1²+r2²-1))
    const SYMBOLIC: [(u32, f64, f64, f64); 12] = [
        (1, 0.9, 0.3, 0.002_451_596_207_174_181_98),
        (2, 0.6, 0.6, 1.308_590_161_161_026_82),
        (2, 0.9, 0.3, 0.350_305_858_047_333_114),
        (2, 0.3, 0.5, -0.571_248_908_786_109_449),
        (2, 0.95, 0.2, 0.001_632_908_204_660_912_72),
        (3, 0.6, 0.6, -21.373_699_043_754_615_6),
        (3, 0.9, 0.3, 35.361_823_692_280_400_9),
        (3, 0.3, 0.5, 0.567_676_521_127_858_458),
        (3, 0.95, 0.2, 0.711_859_616_469_902_217),
        (4, 0.6, 0.6, 81.609_616_790_373_963_9),
        (4, 0.9, 0.3, 1702.205_353_744_949_63),
        (4, 0.3, 0.5, 0.502_063_924_121_160_965),
    ];

    #[test]
    fn delta_matches_symbolic_oracle() {
        let b = ball();
        for (n, r1, r2, expect) in SYMBOLIC {
            let v = delta_n_value(&b, n, &[r1, r2]).unwrap();
            let tol = if n <= 2 { 1e-12 } else { 1e-5 };
            assert!(((v - expect) / expect).abs() < tol, "n={n} ({r1},{r2}): {v} vs {expect}");
        }
    }

    #[test]
    fn closed_form_and_finite_differences_agree() {
        let b = ball();
        let e = DomainSpec::ellipsoid(2, 1).unwrap();
        let opts = DeltaOptions::default();
        for d in [&b, &e] {
            for i in 1..20 {
                for j in 1..20 {
                    let r1 = i as f64 / 20.0;
                    let s = d.slice_radius(r1).unwrap();
                    let r = [r1, j as f64 / 20.0 * s];
                    if d.rho(&r).abs() < 0.05 {
                        continue;
                    }
                    for n in 1..=2 {
                        let closed = delta_n(d, n, &r, &opts).unwrap();
                        let fd = delta_n_fd(d, n, &r, &opts).unwrap();
                        if closed.is_zero() {
                            continue;
                        }
                        let rel = LogValue::rel_diff(fd, closed);
                        assert!(rel <= 1e-5, "{d} n={n} r={r:?}: rel {rel}");
                    }
                }
            }
        }
    }

    #[test]
    fn delta_order_and_boundary_errors() {
        let b = ball();
        let opts = DeltaOptions::default();
        assert!(matches!(delta_n(&b, 0, &[0.3, 0.3], &opts), Err(Error::Domain(_))));
        assert!(matches!(delta_n(&b, 5, &[0.3, 0.3], &opts), Err(Error::Domain(_))));
        assert!(matches!(delta_n(&b, 1, &[0.8, 0.8], &opts), Err(Error::Boundary { .. })));
        // finite differences refuse points inside the cutoff layer
        let r1 = 0.9995f64;
        assert!(matches!(delta_n(&b, 3, &[r1, 0.0001], &opts), Err(Error::Boundary { .. })));
    }

    #[test]
    fn second_order_threshold_on_ball_is_three_to_minus_quarter() {
        // δ_2 > 0 for all r2 iff 6 r1^4 > 2, so a_2 = 3^(-1/4) ≈ 0.7598
        let b = ball();
        let scan = positivity_threshold(&b, 2, 400, &DeltaOptions::default()).unwrap();
        let exact = 3f64.powf(-0.25);
        assert!(scan.threshold < exact && exact - scan.threshold <= 1.0 / 400.0 + 1e-12);
        assert!(scan.nonpositive_points > 0);
        let first = positivity_threshold(&b, 1, 400, &DeltaOptions::default()).unwrap();
        assert_eq!(first.threshold, 0.0);
        assert_eq!(first.nonpositive_points, 0);
    }

    #[test]
    fn every_order_has_a_threshold_below_one() {
        let b = ball();
        for n in 1..=4 {
            let scan = positivity_threshold(&b, n, 400, &DeltaOptions::default()).unwrap();
            assert!(scan.threshold < 1.0, "n={n}: {scan:?}");
        }
    }

    #[test]
    fn weight_spec_parsing() {
        assert_eq!("exp".parse::<WeightSpec>().unwrap(), WeightSpec::Exponential);
        assert_eq!("poly:2".parse::<WeightSpec>().unwrap(), WeightSpec::Polynomial(2.0));
        assert_eq!("none".parse::<WeightSpec>().unwrap(), WeightSpec::Unweighted);
        assert!("poly:-1".parse::<WeightSpec>().is_err());
        assert!("gauss".parse::<WeightSpec>().is_err());
    }
}
