//! Adaptive Gauss–Kronrod integration of log-domain integrands.
//!
//! Integrands return a [`LogValue`], so `r^x exp(1/rho)` with `x ~ 1e5` is
//! handled without underflow: every 21-point panel is rescaled by its own
//! largest node value and panel sums are combined with a max shift and
//! compensated summation.
//!
//! With `boundary_transform` on, the upper half of the interval is
//! integrated in `v = 1/(hi - r)`, which spreads the boundary layer of
//! `exp(-1/(1-r))` over a long, smooth stretch. The transformed range is
//! truncated where the integrand has decayed by `e^-60` relative to its
//! largest sampled value; integrands that do not decay at `hi` fall back
//! to the plain variable.

use serde::{Deserialize, Serialize};

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::numerics::{neumaier, LogValue};

/// Tolerance and refinement limits for one integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub max_depth: u32,
    pub boundary_transform: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            max_depth: 60,
            boundary_transform: true,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::InvalidConfig(format!(
                "quad_rel_tol must be in (0, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if self.max_depth < 10 {
            return Err(Error::InvalidConfig(format!(
                "quad_max_depth must be >= 10, got {}",
                self.max_depth
            )));
        }
        Ok(())
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..self }
    }

    pub fn with_transform(self, on: bool) -> Self {
        QuadratureSpec {
            boundary_transform: on,
            ..self
        }
    }
}

/// A converged (or best-effort) integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: LogValue,
    /// Estimated relative error; zero for an exactly zero integral.
    pub rel_err: f64,
    pub panels: usize,
}

const MAX_PANELS: usize = 4000;
const SAMPLES: usize = 32;
const DECAY_MARGIN: f64 = 60.0;
const MAX_DOUBLINGS: i32 = 60;

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21)
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_551_799,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Clone, Copy, Debug)]
enum Map {
    Plain,
    /// `x = hi - 1/v`, `dx = dv / v²`.
    Inverted { hi: f64 },
}

impl Map {
    fn point(self, u: f64) -> (f64, f64) {
        match self {
            Map::Plain => (u, 0.0),
            Map::Inverted { hi } => (hi - 1.0 / u, -2.0 * u.ln()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    map: Map,
    depth: u32,
    value: LogValue,
    err_log: f64,
    abs_log: f64,
}

struct Integrator<'f, F> {
    f: &'f F,
}

impl<F> Integrator<'_, F>
where
    F: Fn(f64) -> Result<LogValue>,
{
    fn eval(&self, map: Map, u: f64) -> Result<LogValue> {
        let (x, log_jac) = map.point(u);
        Ok((self.f)(x)?.scale_log(log_jac))
    }

    fn panel(&self, a: f64, b: f64, map: Map, depth: u32) -> Result<Panel> {
        let centre = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut vals = [(LogValue::ZERO, LogValue::ZERO); 11];
        for (k, &x) in XGK.iter().enumerate() {
            if x == 0.0 {
                let v = self.eval(map, centre)?;
                vals[k] = (v, v);
            } else {
                vals[k] = (self.eval(map, centre - half * x)?, self.eval(map, centre + half * x)?);
            }
        }
        let shift = vals
            .iter()
            .flat_map(|(l, r)| [l.logmag(), r.logmag()])
            .fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Ok(Panel {
                a,
                b,
                map,
                depth,
                value: LogValue::ZERO,
                err_log: f64::NEG_INFINITY,
                abs_log: f64::NEG_INFINITY,
            });
        }
        let lin = |v: LogValue| {
            if v.is_zero() {
                0.0
            } else {
                f64::from(v.sign()) * (v.logmag() - shift).exp()
            }
        };
        let fv: Vec<(f64, f64)> = vals.iter().map(|&(l, r)| (lin(l), lin(r))).collect();
        let fc = fv[10].0;
        let resk = neumaier(
            (0..10)
                .map(|k| WGK[k] * (fv[k].0 + fv[k].1))
                .chain(std::iter::once(WGK[10] * fc)),
        );
        let resg = neumaier((0..5).map(|j| WG[j] * (fv[2 * j + 1].0 + fv[2 * j + 1].1)));
        let resabs = (0..10)
            .map(|k| WGK[k] * (fv[k].0.abs() + fv[k].1.abs()))
            .sum::<f64>()
            + WGK[10] * fc.abs();
        let mean = 0.5 * resk;
        let resasc = (0..10)
            .map(|k| WGK[k] * ((fv[k].0 - mean).abs() + (fv[k].1 - mean).abs()))
            .sum::<f64>()
            + WGK[10] * (fc - mean).abs();

        let mut err = ((resk - resg) * half).abs();
        let resasc = resasc * half.abs();
        let resabs = resabs * half.abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        Ok(Panel {
            a,
            b,
            map,
            depth,
            value: LogValue::from_f64(resk * half).scale_log(shift),
            err_log: err.ln() + shift,
            abs_log: resabs.ln() + shift,
        })
    }

    /// Evenly spaced samples on `(a, b)`; returns breakpoints around the
    /// largest one so the adaptive pass starts with the peak bracketed.
    fn breakpoints(&self, a: f64, b: f64, map: Map) -> Result<Vec<f64>> {
        let step = (b - a) / SAMPLES as f64;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for j in 1..SAMPLES {
            let v = self.eval(map, a + step * j as f64)?;
            if v.logmag() > best.0 {
                best = (v.logmag(), j);
            }
        }
        let mut pts = vec![a, b, a + 0.25 * (b - a), a + 0.5 * (b - a), a + 0.75 * (b - a)];
        if best.0 > f64::NEG_INFINITY {
            let j = best.1;
            pts.extend([j - 1, j, j + 1].iter().map(|&i| a + step * i as f64));
        }
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup();
        Ok(pts)
    }

    /// Upper end of the transformed range, or `None` if the integrand does
    /// not decay towards `hi`.
    fn decay_limit(&self, v0: f64, map: Map) -> Result<Option<f64>> {
        let mut best = f64::NEG_INFINITY;
        let mut prev = f64::INFINITY;
        for k in 1..=MAX_DOUBLINGS {
            let v = v0 * 2f64.powi(k);
            let g = self.eval(map, v)?.logmag();
            if g == f64::NEG_INFINITY {
                return Ok(Some(v));
            }
            let mass = g + v.ln();
            best = best.max(mass);
            if mass < best - DECAY_MARGIN && g < prev {
                return Ok(Some(v));
            }
            prev = g;
        }
        Ok(None)
    }
}

fn octaves(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut v = 2.0 * a;
    while v < b {
        pts.push(v);
        v *= 2.0;
    }
    pts.push(b);
    pts
}

fn totals(panels: &[Panel]) -> (LogValue, f64, f64) {
    let shift = panels
        .iter()
        .map(|p| p.abs_log.max(p.err_log))
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return (LogValue::ZERO, 0.0, 0.0);
    }
    let value = LogValue::sum(panels.iter().map(|p| p.value));
    let err = neumaier(panels.iter().map(|p| (p.err_log - shift).exp()));
    let abs = neumaier(panels.iter().map(|p| (p.abs_log - shift).exp()));
    // compare everything on the common scale
    let value_lin = if value.is_zero() {
        0.0
    } else {
        (value.logmag() - shift).exp()
    };
    (value, err / value_lin.max(f64::MIN_POSITIVE), err / abs.max(f64::MIN_POSITIVE))
}

/// Integrates `exp(f)` over `(lo, hi)` where `f` may fail.
pub fn integrate_1d_try<F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Result<LogValue>,
{
    spec.validate()?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Domain(format!("invalid integration range ({lo}, {hi})")));
    }
    if lo == hi {
        return Ok(Integral {
            value: LogValue::ZERO,
            rel_err: 0.0,
            panels: 0,
        });
    }
    let it = Integrator { f: &f };
    let mut segments: Vec<(f64, f64, Map)> = Vec::new();
    if spec.boundary_transform {
        let mid = lo + 0.5 * (hi - lo);
        let inv = Map::Inverted { hi };
        let v0 = 1.0 / (hi - mid);
        match it.decay_limit(v0, inv)? {
            Some(vmax) => {
                segments.push((lo, mid, Map::Plain));
                segments.push((v0, vmax, inv));
            }
            None => segments.push((lo, hi, Map::Plain)),
        }
    } else {
        segments.push((lo, hi, Map::Plain));
    }

    let mut panels = Vec::new();
    for &(a, b, map) in &segments {
        let pts = match map {
            Map::Plain => it.breakpoints(a, b, map)?,
            // the transformed range spans many octaves; start with one panel each
            Map::Inverted { .. } => octaves(a, b),
        };
        for w in pts.windows(2) {
            panels.push(it.panel(w[0], w[1], map, 0)?);
        }
    }

    loop {
        let (value, rel_err, rel_to_abs) = totals(&panels);
        if value.is_zero() && rel_to_abs == 0.0 {
            return Ok(Integral {
                value,
                rel_err: 0.0,
                panels: panels.len(),
            });
        }
        if rel_err <= spec.rel_tol || rel_to_abs <= 100.0 * f64::EPSILON {
            return Ok(Integral {
                value,
                rel_err,
                panels: panels.len(),
            });
        }
        let (idx, worst) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err_log.partial_cmp(&b.1.err_log).unwrap())
            .map(|(i, p)| (i, *p))
            .expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        let splittable = worst.depth < spec.max_depth
            && mid > worst.a
            && mid < worst.b
            && panels.len() < MAX_PANELS;
        if !splittable {
            let (x0, _) = worst.map.point(worst.a);
            let (x1, _) = worst.map.point(worst.b);
            return Err(Error::NonConvergence {
                value,
                rel_err,
                worst: (x0, x1),
                outer: None,
            });
        }
        let left = it.panel(worst.a, mid, worst.map, worst.depth + 1)?;
        let right = it.panel(mid, worst.b, worst.map, worst.depth + 1)?;
        panels[idx] = left;
        panels.push(right);
    }
}

/// Integrates `exp(f)` over `(lo, hi)` to relative tolerance `spec.rel_tol`.
pub fn integrate_1d<F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> LogValue,
{
    integrate_1d_try(|x| Ok(f(x)), lo, hi, spec)
}

/// Iterated integral over the radial image of a two-dimensional domain,
/// restricted to `r1_lo < r1 < r1_hi`: outer in `r1`, inner in `r2` over
/// `(0, slice_radius(r1))`. The inner tolerance is a tenth of the outer.
pub fn integrate_2d_radial_range_try<F>(
    f: F,
    d: &DomainSpec,
    r1_lo: f64,
    r1_hi: f64,
    spec: &QuadratureSpec,
) -> Result<Integral>
where
    F: Fn(f64, f64) -> Result<LogValue>,
{
    if d.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: d.dim(),
        });
    }
    if !(0.0 <= r1_lo && r1_lo <= r1_hi && r1_hi <= 1.0) {
        return Err(Error::Domain(format!("r1 range ({r1_lo}, {r1_hi}) outside [0, 1]")));
    }
    let inner_spec = spec.with_rel_tol(spec.rel_tol / 10.0);
    // the outer integrand only vanishes at the far end when that end is the boundary
    let outer_spec = spec.with_transform(spec.boundary_transform && r1_hi >= 1.0);
    let inner = |r1: f64| -> Result<LogValue> {
        let s = d.slice_radius(r1.clamp(0.0, 1.0))?;
        if s <= 0.0 {
            return Ok(LogValue::ZERO);
        }
        match integrate_1d_try(|r2| f(r1, r2), 0.0, s, &inner_spec) {
            Ok(i) => Ok(i.value),
            Err(Error::NonConvergence {
                value,
                rel_err,
                worst,
                ..
            }) => Err(Error::NonConvergence {
                value,
                rel_err,
                worst,
                outer: Some(r1),
            }),
            Err(e) => Err(e),
        }
    };
    integrate_1d_try(inner, r1_lo, r1_hi, &outer_spec)
}

/// Infallible-integrand form of [`integrate_2d_radial_range_try`].
pub fn integrate_2d_radial_range<F>(
    f: F,
    d: &DomainSpec,
    r1_lo: f64,
    r1_hi: f64,
    spec: &QuadratureSpec,
) -> Result<Integral>
where
    F: Fn(f64, f64) -> LogValue,
{
    integrate_2d_radial_range_try(|r1, r2| Ok(f(r1, r2)), d, r1_lo, r1_hi, spec)
}

/// [`integrate_2d_radial_range`] over the whole radial image.
pub fn integrate_2d_radial<F>(f: F, d: &DomainSpec, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64, f64) -> LogValue,
{
    integrate_2d_radial_range(f, d, 0.0, 1.0, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn plain() -> QuadratureSpec {
        QuadratureSpec::default().with_transform(false)
    }

    #[test]
    fn kronrod_rule_is_exact_for_polynomials() {
        // K21 integrates degree <= 31 exactly, G10 degree <= 19
        for deg in 0..=31 {
            let k: f64 = (0..10).map(|i| WGK[i] * 2.0 * if deg % 2 == 0 { XGK[i].powi(deg) } else { 0.0 }).sum::<f64>()
                + if deg == 0 { WGK[10] } else { 0.0 };
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((k - exact).abs() < 1e-15, "K21 degree {deg}");
            if deg <= 19 {
                let g: f64 = (0..5)
                    .map(|j| WG[j] * 2.0 * if deg % 2 == 0 { XGK[2 * j + 1].powi(deg) } else { 0.0 })
                    .sum();
                assert!((g - exact).abs() < 1e-15, "G10 degree {deg}");
            }
        }
    }

    #[test]
    fn unweighted_disc_moments() {
        // ∫_D |z|^x dA = 2π ∫_0^1 r^(x+1) dr = 2π/(x+2)
        for x in 0..=100 {
            let x = f64::from(x);
            let i = integrate_1d(
                |r| LogValue::from_log(std::f64::consts::TAU.ln() + (x + 1.0) * r.ln()),
                0.0,
                1.0,
                &plain(),
            )
            .unwrap();
            let exact = 2.0 * PI / (x + 2.0);
            assert!((i.value.to_f64() - exact).abs() / exact <= 1e-10, "x = {x}");
        }
        let area = integrate_1d(|r| LogValue::from_f64(2.0 * PI * r), 0.0, 1.0, &plain()).unwrap();
        assert!((area.value.to_f64() - PI).abs() < 1e-14);
    }

    #[test]
    fn transform_falls_back_for_non_decaying_integrands() {
        let spec = QuadratureSpec::default();
        let i = integrate_1d(|r| LogValue::from_f64(r * r), 0.0, 1.0, &spec).unwrap();
        assert!((i.value.to_f64() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn essential_singularity_with_and_without_transform() {
        // ∫_0^1 R exp(-1/(1-R)) dR = E_2(1) - E_3(1)
        let exact = 0.038_803_539_578_161_911_079_778_106_971_3;
        for spec in [QuadratureSpec::default(), plain()] {
            let i = integrate_1d(
                |r| {
                    if r >= 1.0 {
                        LogValue::ZERO
                    } else {
                        LogValue::from_log(r.ln() - 1.0 / (1.0 - r))
                    }
                },
                0.0,
                1.0,
                &spec,
            )
            .unwrap();
            assert!(((i.value.to_f64() - exact) / exact).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_integrand() {
        let i = integrate_1d(|_| LogValue::ZERO, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!(i.value.is_zero());
        let b = DomainSpec::ball(2).unwrap();
        let i = integrate_2d_radial(|_, _| LogValue::ZERO, &b, &QuadratureSpec::default()).unwrap();
        assert_eq!(i.value.sign(), 0);
    }

    #[test]
    fn signed_integrand_with_cancellation() {
        // ∫_0^π sin = 2, ∫_0^2π sin = 0
        let i = integrate_1d(|x| LogValue::from_f64(x.sin()), 0.0, PI, &plain()).unwrap();
        assert!((i.value.to_f64() - 2.0).abs() < 1e-13);
        let z = integrate_1d(|x| LogValue::from_f64(x.sin()), 0.0, 2.0 * PI, &plain()).unwrap();
        assert!(z.value.to_f64().abs() < 1e-13);
    }

    #[test]
    fn peak_far_below_double_range() {
        // ∫_0^1 r^y exp(-1/(1-r)) dr for y = 1e5: log ≈ -641.0207
        let y = 1e5;
        let i = integrate_1d(
            |r| {
                if r >= 1.0 {
                    LogValue::ZERO
                } else {
                    LogValue::from_log(y * r.ln() - 1.0 / (1.0 - r))
                }
            },
            0.0,
            1.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((i.value.logmag() + 641.020_702_650_158_85).abs() < 1e-9, "{:?}", i);
    }

    #[test]
    fn ball_volume_and_weighted_volume() {
        let b = DomainSpec::ball(2).unwrap();
        let spec = QuadratureSpec::default().with_transform(false);
        let vol = integrate_2d_radial(
            |r1, r2| LogValue::from_f64(4.0 * PI * PI * r1 * r2),
            &b,
            &spec,
        )
        .unwrap();
        assert!((vol.value.to_f64() - PI * PI / 2.0).abs() / (PI * PI / 2.0) < 1e-10);

        let weighted = integrate_2d_radial(
            |r1, r2| {
                let rho = r1 * r1 + r2 * r2 - 1.0;
                if rho >= 0.0 {
                    return LogValue::ZERO;
                }
                LogValue::from_log((4.0 * PI * PI * r1 * r2).ln() + 1.0 / rho)
            },
            &b,
            &QuadratureSpec::default(),
        )
        .unwrap();
        let expect = PI * PI * 0.038_803_539_578_161_911_08;
        assert!((weighted.value.to_f64() - expect).abs() / expect < 1e-9);
    }

    #[test]
    fn dominated_integrands_keep_order() {
        let spec = QuadratureSpec::default();
        let small = integrate_1d(|r| LogValue::from_log(3.0 * r.ln() - 1.0 / (1.0 - r)), 0.0, 1.0, &spec)
            .unwrap();
        let big = integrate_1d(|r| LogValue::from_log(2.0 * r.ln() - 1.0 / (1.0 - r)), 0.0, 1.0, &spec)
            .unwrap();
        assert!(small.value < big.value);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec { rel_tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(QuadratureSpec { rel_tol: 0.1, ..Default::default() }.validate().is_err());
        assert!(QuadratureSpec { max_depth: 5, ..Default::default() }.validate().is_err());
        assert!(integrate_1d(|_| LogValue::ONE, 1.0, 0.0, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn non_convergence_carries_estimate() {
        // 1/sqrt(x) singularity with a tiny depth budget
        let spec = QuadratureSpec {
            rel_tol: 1e-12,
            max_depth: 10,
            boundary_transform: false,
        };
        match integrate_1d(|x| LogValue::from_log(-0.5 * x.ln()), 0.0, 1.0, &spec) {
            Err(Error::NonConvergence { value, rel_err, worst, .. }) => {
                assert!((value.to_f64() - 2.0).abs() < 1e-2);
                assert!(rel_err > 1e-12);
                assert_eq!(worst.0, 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
