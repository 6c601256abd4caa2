//! Weighted Bergman kernels as truncated monomial series, and the
//! projection of monomial-type functions `z^a z̄^b`.
//!
//! On a Reinhardt domain the monomials are orthogonal, so
//! `B(z, w) = Σ_α c_α² (z w̄)^α` with `c_α² = 1/G(2α)`, and the projection
//! of `z^a z̄^b` is a single monomial (or zero). Everything here is exact
//! up to the moments, except the series truncation, which is reported.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{AuxDiscTable, AuxMode, MomentSource, MomentTable};
use crate::numerics::{log_falling, LogValue, MultiIndex};

/// `scale · z^a z̄^b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialFunction {
    pub a: MultiIndex,
    pub b: MultiIndex,
    pub scale: LogValue,
}

impl MonomialFunction {
    pub fn new(a: MultiIndex, b: MultiIndex, scale: LogValue) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        Ok(MonomialFunction { a, b, scale })
    }

    /// `z^a`.
    pub fn holomorphic(a: MultiIndex) -> Self {
        let b = MultiIndex::zeros(a.dim());
        MonomialFunction {
            a,
            b,
            scale: LogValue::ONE,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.b.total() == 0
    }

    /// `∂_z^γ ∂_z̄^β (scale z^a z̄^b)`, or `None` if it vanishes.
    pub fn derivative(&self, gamma: &MultiIndex, beta: &MultiIndex) -> Option<MonomialFunction> {
        let a = self.a.checked_sub(gamma)?;
        let b = self.b.checked_sub(beta)?;
        let log_coef: f64 = self
            .a
            .exps()
            .iter()
            .zip(gamma.exps())
            .chain(self.b.exps().iter().zip(beta.exps()))
            .map(|(&k, &j)| log_falling(k, j))
            .sum();
        Some(MonomialFunction {
            a,
            b,
            scale: self.scale.scale_log(log_coef),
        })
    }

    /// `Σ (a + b)`, the exponent vector of `|f|`.
    fn modulus_exponents(&self) -> MultiIndex {
        &self.a + &self.b
    }

    /// `‖f‖_p^p = |scale|^p · G(p(a+b))`.
    pub fn lp_norm_p(&self, src: &dyn MomentSource, p: f64) -> Result<LogValue> {
        let g = src.moment(&self.modulus_exponents().to_reals(p))?.value;
        Ok(self.scale.abs().powf(p) * g)
    }

    /// `‖f‖_2²`.
    pub fn norm_sq(&self, src: &dyn MomentSource) -> Result<LogValue> {
        self.lp_norm_p(src, 2.0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut v = Complex64::new(self.scale.to_f64(), 0.0);
        for (i, zi) in z.iter().enumerate() {
            v *= zi.powu(self.a.exps()[i]) * zi.conj().powu(self.b.exps()[i]);
        }
        v
    }
}

impl std::fmt::Display for MonomialFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} z^{} zbar^{}", self.scale, self.a, self.b)
    }
}

/// `⟨f, g⟩ = ∫ f ḡ λ dV` for monomial-type `f`, `g`. Rotation invariance
/// makes it vanish unless `a_f − b_f = a_g − b_g`.
pub fn inner_product(src: &dyn MomentSource, f: &MonomialFunction, g: &MonomialFunction) -> Result<LogValue> {
    let n = f.dim();
    if g.dim() != n || src.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if g.dim() != n { g.dim() } else { src.dim() },
        });
    }
    let same_charge = (0..n).all(|i| {
        i64::from(f.a.exps()[i]) - i64::from(f.b.exps()[i])
            == i64::from(g.a.exps()[i]) - i64::from(g.b.exps()[i])
    });
    if !same_charge {
        return Ok(LogValue::ZERO);
    }
    let s: Vec<f64> = (0..n)
        .map(|i| f64::from(f.a.exps()[i] + f.b.exps()[i] + g.a.exps()[i] + g.b.exps()[i]))
        .collect();
    Ok(f.scale * g.scale * src.moment(&s)?.value)
}

/// `B(z^a z̄^b) = G(2a)/G(2(a−b)) · z^(a−b)` when `a ≥ b`, zero otherwise.
pub fn project_monomial(src: &dyn MomentSource, f: &MonomialFunction) -> Result<Option<MonomialFunction>> {
    let Some(c) = f.a.checked_sub(&f.b) else {
        return Ok(None);
    };
    let num = src.moment(&f.a.to_reals(2.0))?.value;
    let den = src.moment(&c.to_reals(2.0))?.value;
    Ok(Some(MonomialFunction {
        b: MultiIndex::zeros(c.dim()),
        a: c,
        scale: f.scale * num / den,
    }))
}

/// The series `Σ_{|α| ≤ J} c_α² (z w̄)^α`.
#[derive(Clone, Debug)]
pub struct TruncatedKernel {
    dim: usize,
    degree: u32,
    source: String,
    /// `c_α²` in order of increasing total degree; shell `d` starts at
    /// `shells[d]`.
    coeffs: Vec<(MultiIndex, LogValue)>,
    shells: Vec<usize>,
}

/// A kernel value with its truncation diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    /// Geometric estimate of the omitted terms `|α| > J`.
    pub tail_bound: f64,
    pub degree: u32,
    /// Set when the tail bound exceeds 10% of the partial sum.
    pub warning: Option<String>,
}

impl TruncatedKernel {
    /// Builds the coefficients `c_α² = 1/G(2α)` for all `|α| ≤ degree`.
    pub fn new(src: &dyn MomentSource, degree: u32) -> Result<Self> {
        let dim = src.dim();
        let mut shells = Vec::with_capacity(degree as usize + 2);
        let mut indices = Vec::new();
        for d in 0..=degree {
            shells.push(indices.len());
            indices.extend(MultiIndex::with_total(dim, d));
        }
        shells.push(indices.len());
        let coeffs = indices
            .into_par_iter()
            .map(|alpha| {
                let g = src.moment(&alpha.to_reals(2.0))?.value;
                Ok((alpha, g.recip()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncatedKernel {
            dim,
            degree,
            source: src.label(),
            coeffs,
            shells,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source_label(&self) -> &str {
        &self.source
    }

    /// `c_α²`, if `|α| ≤ J`.
    pub fn coefficient(&self, alpha: &MultiIndex) -> Option<LogValue> {
        let d = alpha.total();
        if d > self.degree || alpha.dim() != self.dim {
            return None;
        }
        self.coeffs[self.shells[d as usize]..self.shells[d as usize + 1]]
            .iter()
            .find(|(a, _)| a == alpha)
            .map(|(_, c)| *c)
    }

    /// Coefficients with `α = (j, 0, …, 0)`, `j = 0..=J`.
    pub fn first_axis_coefficients(&self) -> Vec<LogValue> {
        (0..=self.degree)
            .map(|j| {
                let mut e = vec![0; self.dim];
                e[0] = j;
                self.coefficient(&MultiIndex::new(e)).expect("within degree")
            })
            .collect()
    }

    /// `B_J(z, w)` with a tail estimate from the ratio of the last two
    /// degree shells. `B_J(w, z)` is the exact conjugate of `B_J(z, w)`:
    /// every operation below commutes with conjugation in floating point.
    pub fn eval(&self, z: &[Complex64], w: &[Complex64]) -> Result<KernelValue> {
        for p in [z, w] {
            if p.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: p.len(),
                });
            }
        }
        let powers: Vec<Vec<Complex64>> = z
            .iter()
            .zip(w)
            .map(|(zi, wi)| {
                let u = zi * wi.conj();
                let mut v = Vec::with_capacity(self.degree as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=self.degree {
                    v.push(acc);
                    acc *= u;
                }
                v
            })
            .collect();
        let mut re = Compensated::default();
        let mut im = Compensated::default();
        let mut shell_abs = vec![0.0; self.degree as usize + 1];
        for (d, shell) in shell_abs.iter_mut().enumerate() {
            for (alpha, c) in &self.coeffs[self.shells[d]..self.shells[d + 1]] {
                let mut term = Complex64::new(c.to_f64(), 0.0);
                for (i, &e) in alpha.exps().iter().enumerate() {
                    term *= powers[i][e as usize];
                }
                *shell += term.norm();
                re.add(term.re);
                im.add(term.im);
            }
        }
        let value = Complex64::new(re.total(), im.total());
        let tail_bound = geometric_tail(&shell_abs);
        let warning = (tail_bound > 0.1 * value.norm()).then(|| {
            format!(
                "tail bound {tail_bound:e} exceeds 10% of the partial sum {:e} at degree {}",
                value.norm(),
                self.degree
            )
        });
        Ok(KernelValue {
            value,
            tail_bound,
            degree: self.degree,
            warning,
        })
    }

    /// Projection through the truncated kernel: like [`project_monomial`]
    /// but zero when `|a − b| > J`.
    pub fn project(&self, src: &dyn MomentSource, f: &MonomialFunction) -> Result<Option<MonomialFunction>> {
        let Some(c) = f.a.checked_sub(&f.b) else {
            return Ok(None);
        };
        let Some(coef) = self.coefficient(&c) else {
            return Ok(None);
        };
        let num = src.moment(&f.a.to_reals(2.0))?.value;
        Ok(Some(MonomialFunction {
            b: MultiIndex::zeros(c.dim()),
            a: c,
            scale: f.scale * num * coef,
        }))
    }
}

#[derive(Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `S_J · r/(1 − r)` with `r = S_J/S_{J−1}`; infinite if the shells do
/// not shrink.
fn geometric_tail(shells: &[f64]) -> f64 {
    let n = shells.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let (last, prev) = (shells[n - 1], shells[n - 2]);
    if last == 0.0 {
        return 0.0;
    }
    let r = last / prev;
    if r < 1.0 {
        last * r / (1.0 - r)
    } else {
        f64::INFINITY
    }
}

/// Both sides of the slice identity
/// `∫_{S_{w1}} B_Ω(z, w) λ(w) dA(w2) = μ(w1) B_D(z1, w1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_diff: f64,
    pub rel_err: f64,
    pub degree: u32,
}

/// Evaluates the slice identity on a two-dimensional domain.
///
/// Left side: the angular integral over `w2` keeps only `α = (j, 0)`, and
/// the remaining radial integral is the slice weight by generic quadrature.
/// Right side: the slice weight in its reduced form (closed on the ball)
/// times the disc kernel built from `k_disc`.
pub fn verify_slice_identity(
    k_omega: &TruncatedKernel,
    k_disc: &TruncatedKernel,
    omega: &MomentTable,
    z: &[Complex64],
    w1: Complex64,
) -> Result<SliceCheck> {
    if k_omega.dim() != 2 || k_disc.dim() != 1 {
        return Err(Error::InvalidConfig(
            "slice identity needs a two-dimensional kernel and a disc kernel".into(),
        ));
    }
    if k_omega.degree() != k_disc.degree() {
        return Err(Error::InvalidConfig(format!(
            "kernel degrees differ: {} vs {}",
            k_omega.degree(),
            k_disc.degree()
        )));
    }
    if z.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: z.len(),
        });
    }
    let rz = [z[0].norm(), z[1].norm()];
    if !omega.domain().is_interior(&rz) {
        return Err(Error::Boundary {
            point: rz.to_vec(),
            rho: omega.domain().rho(&rz),
        });
    }
    let r1 = w1.norm();
    if r1 >= 1.0 {
        return Err(Error::Boundary {
            point: vec![r1],
            rho: r1 * r1 - 1.0,
        });
    }
    let u = z[0] * w1.conj();
    let series = |coeffs: Vec<LogValue>| {
        let mut re = Compensated::default();
        let mut im = Compensated::default();
        let mut p = Complex64::new(1.0, 0.0);
        for c in coeffs {
            let t = p * c.to_f64();
            re.add(t.re);
            im.add(t.im);
            p *= u;
        }
        Complex64::new(re.total(), im.total())
    };
    let lhs = series(k_omega.first_axis_coefficients()) * omega.mu_weight_quadrature(r1)?.value.to_f64();
    let rhs = series(k_disc.first_axis_coefficients()) * omega.mu_weight(r1)?.value.to_f64();
    let abs_diff = (lhs - rhs).norm();
    let rel_err = if rhs.norm() == 0.0 {
        if abs_diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        abs_diff / rhs.norm()
    };
    Ok(SliceCheck {
        lhs,
        rhs,
        abs_diff,
        rel_err,
        degree: k_omega.degree(),
    })
}

/// Norm and projection of `F(z1, z2) = z1^a z̄1^b` against its disc
/// counterpart `f(z1)` under the slice weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftCheck {
    pub a: u32,
    pub b: u32,
    pub norm_sq_omega: LogValue,
    pub norm_sq_disc: LogValue,
    pub norm_rel_err: f64,
    /// Projection of the lift equals the lift of the projection, bit for bit.
    pub projection_exact: bool,
}

/// Compares `‖F‖_{Ω,λ}` with `‖f‖_{D,μ}` (the latter from `disc`, any
/// mode) and the two projections in coefficient form.
pub fn lift_check(omega: &std::sync::Arc<MomentTable>, disc: &AuxDiscTable, a: u32, b: u32) -> Result<LiftCheck> {
    let big = MonomialFunction::new(MultiIndex::new(vec![a, 0]), MultiIndex::new(vec![b, 0]), LogValue::ONE)?;
    let small = MonomialFunction::new(MultiIndex::new(vec![a]), MultiIndex::new(vec![b]), LogValue::ONE)?;
    let norm_sq_omega = big.norm_sq(omega.as_ref())?;
    let norm_sq_disc = small.norm_sq(disc)?;
    let reduced = AuxDiscTable::new(omega.clone(), AuxMode::Reduction)?;
    let projected_lift = project_monomial(omega.as_ref(), &big)?;
    let lifted_projection = project_monomial(&reduced, &small)?.map(|g| MonomialFunction {
        a: MultiIndex::new(vec![g.a.exps()[0], 0]),
        b: MultiIndex::new(vec![g.b.exps()[0], 0]),
        scale: g.scale,
    });
    Ok(LiftCheck {
        a,
        b,
        norm_sq_omega,
        norm_sq_disc,
        // ‖·‖ rather than ‖·‖²
        norm_rel_err: LogValue::rel_diff(norm_sq_disc.powf(0.5), norm_sq_omega.powf(0.5)),
        projection_exact: projected_lift == lifted_projection,
    })
}
