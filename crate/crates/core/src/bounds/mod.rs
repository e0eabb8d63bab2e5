//! Universal eigenvalue inequalities for the weighted Hodge Laplacian on
//! self-shrinkers.
//!
//! Every inequality here is driven by a right-hand side `D_i` per
//! eigenvalue: either the exact integral form
//! `4λ_i + 2m − ∫|x|²|φ_i|² − 4∫⟨Ric φ_i, φ_i⟩ + 4∫⟨Tφ_i, φ_i⟩` evaluated with
//! the eigenform, or its geometric relaxation `4λ_i + 2m + 4 + 4G` with
//! `G = max(p|H||h| − Φ(h, H) − |x|²/4)`.
//!
//! Indices `i` and `k` are 1-based throughout, as in the inequalities.

mod report;

use serde::Serialize;

pub use report::{
    evaluate_suite, reports_to_csv, reports_to_json, BoundReport, Inequality, Provenance, Tolerance,
};

use crate::complex::WeightedComplex;
use crate::error::{Error, Result};
use crate::manifold::{hessian_half_xsq, GeometryBackend};
use crate::spectrum::Spectrum;

/// Constant `C₀(m) = 1 + 4/m` in the power-law bound.
pub fn cheng_yang_constant(m: usize) -> f64 {
    1.0 + 4.0 / m as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsMode {
    ExactIntegral,
    GeometricMax,
}

impl RhsMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RhsMode::ExactIntegral => "exact-integral",
            RhsMode::GeometricMax => "geometric-max",
        }
    }
}

/// Pointwise curvature constants of a backend for one form degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometricConstants {
    pub m: usize,
    pub p: usize,
    /// `max_q (p|H||h| − Φ(h, H) − |x|²/4)`.
    pub g_max: f64,
    pub min_xsq: f64,
}

/// Right-hand sides `D_1, …, D_k` with the constants used to build them.
#[derive(Clone, Debug, Serialize)]
pub struct RhsCoefficients {
    pub values: Vec<f64>,
    pub mode: RhsMode,
    pub constants: GeometricConstants,
}

/// `Φ(h, H)`, the lower bound for the curvature term on `p`-forms in terms
/// of `|h|²` and `|H|²`.
pub fn phi(h_sq: f64, big_h_sq: f64, m: usize, p: usize) -> Result<f64> {
    let mf = m as f64;
    let pf = p as f64;
    let mut gap = mf * h_sq - big_h_sq;
    if gap < 0.0 {
        if gap < -1e-12 * (1.0 + mf * h_sq) {
            return Err(Error::GeometryInconsistency(gap));
        }
        gap = 0.0;
    }
    if p == 0 {
        return Ok(0.0);
    }
    let big_h = big_h_sq.max(0.0).sqrt();
    let inner = (mf - 1.0).sqrt() * (mf - 2.0) * big_h - 2.0 * gap.sqrt();
    let bracket = (mf - 5.0) / 4.0 * big_h_sq + h_sq - inner * inner / (4.0 * mf * mf);
    Ok(-(pf * pf * bracket + 0.5 * pf.sqrt() * (pf - 1.0) * (big_h_sq + h_sq)))
}

/// `G` and `min |x|²` over the sample points of a backend.
pub fn geometric_constants(backend: &GeometryBackend, p: usize) -> Result<GeometricConstants> {
    let m = backend.intrinsic_dim();
    if p > m {
        return Err(Error::Degree { degree: p, max: m });
    }
    let mut g_max = f64::NEG_INFINITY;
    let mut min_xsq = f64::INFINITY;
    for s in backend.sample_points() {
        let h_sq = s.h_norm_sq();
        let big_h_sq = s.mean_curvature_norm_sq();
        let value = p as f64 * (big_h_sq * h_sq).sqrt() - phi(h_sq, big_h_sq, m, p)? - s.xsq / 4.0;
        g_max = g_max.max(value);
        min_xsq = min_xsq.min(s.xsq);
    }
    Ok(GeometricConstants {
        m,
        p,
        g_max,
        min_xsq,
    })
}

/// `D_i = 4λ_i + 2m + 4 + 4G`.
pub fn rhs_geometric(lambda_i: f64, m: usize, _p: usize, g: f64) -> f64 {
    4.0 * lambda_i + 2.0 * m as f64 + 4.0 + 4.0 * g
}

/// Geometric-max right-hand side of the Levitin–Parnovski-type inequality,
/// `4λ_i + 2m + 4 + 4G` (the maximum carries the same factor 4 as the
/// integral it bounds).
pub fn lp_bound(lambda_i: f64, m: usize, p: usize, g: f64) -> f64 {
    rhs_geometric(lambda_i, m, p, g)
}

/// `D_i` for every index `1..=k` in geometric-max mode.
pub fn rhs_geometric_all(spectrum: &Spectrum, backend: &GeometryBackend, k: usize) -> Result<RhsCoefficients> {
    check_len(spectrum, k)?;
    let constants = geometric_constants(backend, spectrum.degree)?;
    let values = spectrum.eigenvalues[..k]
        .iter()
        .map(|&l| rhs_geometric(l, constants.m, constants.p, constants.g_max))
        .collect();
    Ok(RhsCoefficients {
        values,
        mode: RhsMode::GeometricMax,
        constants,
    })
}

/// Exact-integral `D_i` for the `i`-th (1-based) eigenpair.
///
/// Integrals use the eigenform when the spectrum carries eigenforms (the
/// complex must then be the one the spectrum was computed on); otherwise the
/// integrands must be constant over the backend, as on a centred sphere.
pub fn rhs_exact(
    spectrum: &Spectrum,
    backend: &GeometryBackend,
    complex: Option<&WeightedComplex>,
    i: usize,
) -> Result<f64> {
    let densities = ExactDensities::new(spectrum, backend, complex)?;
    densities.value(spectrum, i)
}

/// Exact-integral `D_i` for every index `1..=k`.
pub fn rhs_exact_all(
    spectrum: &Spectrum,
    backend: &GeometryBackend,
    complex: Option<&WeightedComplex>,
    k: usize,
) -> Result<RhsCoefficients> {
    check_len(spectrum, k)?;
    let densities = ExactDensities::new(spectrum, backend, complex)?;
    let values = (1..=k).map(|i| densities.value(spectrum, i)).collect::<Result<_>>()?;
    Ok(RhsCoefficients {
        values,
        mode: RhsMode::ExactIntegral,
        constants: geometric_constants(backend, spectrum.degree)?,
    })
}

/// Pointwise integrand of `−|x|² − 4⟨Ric φ,φ⟩/|φ|² + 4⟨Tφ,φ⟩/|φ|²`.
struct ExactDensities<'a> {
    m: usize,
    /// `−4 Ric + 4 T`, a constant multiple of `|φ|²` where available.
    curvature: f64,
    /// Either one `|x|²` per cell (with the mass diagonal) or a constant.
    xsq: XsqField<'a>,
}

enum XsqField<'a> {
    Cells { xsq: &'a [f64], mass: &'a [f64] },
    Constant(f64),
}

impl<'a> ExactDensities<'a> {
    fn new(spectrum: &Spectrum, backend: &GeometryBackend, complex: Option<&'a WeightedComplex>) -> Result<Self> {
        let m = backend.intrinsic_dim();
        let p = spectrum.degree;
        if p > m {
            return Err(Error::Degree { degree: p, max: m });
        }
        let curvature = if p == 0 {
            0.0
        } else {
            let c = backend.constant_sectional_curvature().ok_or_else(|| {
                Error::Capability(format!(
                    "the curvature term on {p}-forms needs a constant-curvature analytic backend; \
                     use the geometric-max right-hand side instead"
                ))
            })?;
            let ric = c * (p * (m - p)) as f64;
            let t = isotropic_hessian(backend)?;
            -4.0 * ric + 4.0 * p as f64 * t
        };
        let xsq = if spectrum.has_eigenforms() {
            let complex = complex.ok_or_else(|| {
                Error::Input("eigenform integrals need the complex the spectrum was computed on".into())
            })?;
            let xsq = complex.cell_xsq(p)?;
            let mass = complex.mass_diagonal(p)?;
            if spectrum.eigenforms[0].len() != mass.len() {
                return Err(Error::Shape(format!(
                    "eigenforms have {} coefficients but the complex has {} {p}-cells",
                    spectrum.eigenforms[0].len(),
                    mass.len()
                )));
            }
            XsqField::Cells { xsq, mass }
        } else {
            XsqField::Constant(constant_xsq(backend)?)
        };
        Ok(Self { m, curvature, xsq })
    }

    fn value(&self, spectrum: &Spectrum, i: usize) -> Result<f64> {
        if i == 0 || i > spectrum.len() {
            return Err(Error::Precondition(format!(
                "index {i} outside the computed spectrum 1..={}",
                spectrum.len()
            )));
        }
        let lambda = spectrum.eigenvalues[i - 1];
        let xsq_integral = match &self.xsq {
            XsqField::Constant(x) => *x,
            XsqField::Cells { xsq, mass } => {
                let phi = &spectrum.eigenforms[i - 1];
                let mut a = 0.0;
                let mut b = 0.0;
                for ((c, g), w) in phi.iter().zip(xsq.iter()).zip(mass.iter()) {
                    a += w * g * c * c;
                    b += w * c * c;
                }
                a / b
            }
        };
        Ok(4.0 * lambda + 2.0 * self.m as f64 - xsq_integral + self.curvature)
    }
}

fn constant_xsq(backend: &GeometryBackend) -> Result<f64> {
    let samples = backend.sample_points();
    let first = samples.first().map(|s| s.xsq).unwrap_or(0.0);
    if samples.iter().any(|s| (s.xsq - first).abs() > 1e-12 * first.max(1.0)) {
        return Err(Error::Capability(
            "|x|² varies over the backend, so the integrals need eigenforms".into(),
        ));
    }
    Ok(first)
}

/// The Hessian of `|x|²/2` as a multiple `t` of the identity, constant over
/// the backend.
fn isotropic_hessian(backend: &GeometryBackend) -> Result<f64> {
    let mut t0: Option<f64> = None;
    for s in backend.sample_points() {
        let t = hessian_half_xsq(s);
        let m = t.dim();
        let scalar = t.entries().trace() / m as f64;
        let off = (t.entries() - nalgebra::DMatrix::identity(m, m) * scalar).amax();
        let drift = t0.map_or(0.0, |v| (v - scalar).abs());
        if off > 1e-10 || drift > 1e-10 {
            return Err(Error::Capability(
                "the Hessian of |x|²/2 is not a constant multiple of the metric".into(),
            ));
        }
        t0.get_or_insert(scalar);
    }
    Ok(t0.unwrap_or(0.0))
}

fn check_len(spectrum: &Spectrum, k: usize) -> Result<()> {
    if k == 0 || k > spectrum.len() {
        Err(Error::Precondition(format!(
            "need {k} eigenvalues, the spectrum has {}",
            spectrum.len()
        )))
    } else {
        Ok(())
    }
}

fn check_pairs(lambdas: &[f64], d: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::Input("need at least one eigenvalue".into()));
    }
    if lambdas.len() != d.len() {
        return Err(Error::Shape(format!(
            "{} eigenvalues but {} right-hand sides",
            lambdas.len(),
            d.len()
        )));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Input("eigenvalues must be nondecreasing".into()));
    }
    Ok(())
}

/// Coefficients `(a, b, c)` of `aΛ² − bΛ + c ≤ 0`, equivalent to
/// `mΣ(Λ − λ_i)² ≤ Σ(Λ − λ_i)D_i`.
fn yang_quadratic(lambdas: &[f64], d: &[f64], m: usize) -> (f64, f64, f64) {
    let mf = m as f64;
    let a = mf * lambdas.len() as f64;
    let b: f64 = lambdas.iter().zip(d).map(|(l, di)| 2.0 * mf * l + di).sum();
    let c: f64 = lambdas.iter().zip(d).map(|(l, di)| mf * l * l + l * di).sum();
    (a, b, c)
}

fn yang_roots(lambdas: &[f64], d: &[f64], m: usize) -> Result<(f64, f64)> {
    check_pairs(lambdas, d)?;
    let (a, b, c) = yang_quadratic(lambdas, d, m);
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc < -1e-12 * b * b {
            return Err(Error::Infeasible(format!(
                "negative discriminant {disc:.3e}; the right-hand sides are inconsistent with the eigenvalues"
            )));
        }
        disc = 0.0;
    }
    let root = disc.sqrt();
    Ok(((b - root) / (2.0 * a), (b + root) / (2.0 * a)))
}

/// Largest root `Λ⁺` of `mΣ(Λ − λ_i)² = Σ(Λ − λ_i)D_i`, an upper bound for
/// `λ_{k+1}` with `k = lambdas.len()`.
pub fn yang_bound(lambdas: &[f64], d: &[f64], m: usize) -> Result<f64> {
    Ok(yang_roots(lambdas, d, m)?.1)
}

/// Root spacing `Λ⁺ − Λ⁻`, which bounds `λ_{k+1} − λ_k`.
pub fn yang_root_gap(lambdas: &[f64], d: &[f64], m: usize) -> Result<f64> {
    let (lo, hi) = yang_roots(lambdas, d, m)?;
    Ok(hi - lo)
}

/// `Σ_{i≤k}(λ_{k+1} − λ_i)D_i − mΣ_{i≤k}(λ_{k+1} − λ_i)²`.
pub fn yang_check(eigenvalues: &[f64], d: &[f64], m: usize, k: usize) -> Result<f64> {
    if k == 0 || eigenvalues.len() < k + 1 {
        return Err(Error::Precondition(format!(
            "yang check at k = {k} needs {} eigenvalues, have {}",
            k + 1,
            eigenvalues.len()
        )));
    }
    if d.len() < k {
        return Err(Error::Shape(format!("need {k} right-hand sides, have {}", d.len())));
    }
    let next = eigenvalues[k];
    Ok(eigenvalues[..k]
        .iter()
        .zip(d)
        .map(|(l, di)| (next - l) * di - m as f64 * (next - l).powi(2))
        .sum())
}

/// Bound on `λ_{k+1} − λ_k` in geometric-max mode:
/// `2[((2/m)·mean + 1 + 2/m + (2/m)G)² − (1 + 4/m)·var]^{1/2}`, the root
/// spacing of the quadratic with `D_i = 4λ_i + 2m + 4 + 4G`.
pub fn gap_bound(lambdas: &[f64], m: usize, g: f64) -> Result<f64> {
    if lambdas.is_empty() {
        return Err(Error::Input("need at least one eigenvalue".into()));
    }
    let mf = m as f64;
    let k = lambdas.len() as f64;
    let mean = lambdas.iter().sum::<f64>() / k;
    let var = lambdas.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / k;
    let lead = 2.0 / mf * mean + 1.0 + 2.0 / mf + 2.0 / mf * g;
    let mut radicand = lead * lead - (1.0 + 4.0 / mf) * var;
    if radicand < 0.0 {
        if radicand < -1e-12 * lead * lead.max(1.0) {
            return Err(Error::Infeasible(format!("negative radicand {radicand:.3e} in the gap bound")));
        }
        radicand = 0.0;
    }
    Ok(2.0 * radicand.sqrt())
}

/// `D_i − Σ_{l=1}^m (λ_{i+l} − λ_i)`.
pub fn lp_check(eigenvalues: &[f64], d_i: f64, m: usize, i: usize) -> Result<f64> {
    if i == 0 || eigenvalues.len() < i + m {
        return Err(Error::Precondition(format!(
            "index {i} needs eigenvalues up to {}, have {}",
            i + m,
            eigenvalues.len()
        )));
    }
    let base = eigenvalues[i - 1];
    let sum: f64 = eigenvalues[i..i + m].iter().map(|l| l - base).sum();
    Ok(d_i - sum)
}

/// `μ_{k+1} ≤ (1 + 4/m) k^{2/m} μ_1`.
pub fn cheng_yang_bound(mu_1: f64, m: usize, k: usize) -> Result<f64> {
    if !(mu_1 > 0.0) {
        return Err(Error::Input(format!("μ_1 must be positive, got {mu_1}")));
    }
    if k == 0 {
        return Err(Error::Input("k must be at least 1".into()));
    }
    Ok(cheng_yang_constant(m) * (k as f64).powf(2.0 / m as f64) * mu_1)
}

/// Slacks of the three classical Dirichlet inequalities, evaluated as plain
/// formulas on the given spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassicalSlacks {
    /// `(4/(mk))Σλ_i − (λ_{k+1} − λ_k)`.
    pub ppw: f64,
    /// `Σλ_i/(λ_{k+1} − λ_i) − mk/4`, `+∞` when a denominator vanishes.
    pub hile_protter: f64,
    /// `−Σ(λ_{k+1} − λ_i)(λ_{k+1} − (1 + 4/m)λ_i)`.
    pub yang: f64,
}

pub fn classical_checks(eigenvalues: &[f64], m: usize, k: usize) -> Result<ClassicalSlacks> {
    if k == 0 || eigenvalues.len() < k + 1 {
        return Err(Error::Precondition(format!(
            "classical checks at k = {k} need {} eigenvalues, have {}",
            k + 1,
            eigenvalues.len()
        )));
    }
    let mf = m as f64;
    let kf = k as f64;
    let head = &eigenvalues[..k];
    let next = eigenvalues[k];
    let ppw = 4.0 / (mf * kf) * head.iter().sum::<f64>() - (next - eigenvalues[k - 1]);
    let hile_protter = if head.iter().any(|&l| next - l == 0.0) {
        f64::INFINITY
    } else {
        head.iter().map(|l| l / (next - l)).sum::<f64>() - mf * kf / 4.0
    };
    let yang = -head
        .iter()
        .map(|l| (next - l) * (next - (1.0 + 4.0 / mf) * l))
        .sum::<f64>();
    Ok(ClassicalSlacks {
        ppw,
        hile_protter,
        yang,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::sphere_backend;
    use crate::spectrum::analytic_sphere_spectrum;

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.7, 0.3, 3, 0).unwrap(), 0.0);
        assert!((phi(1.0, 2.0, 2, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((phi(1.0, 3.0, 3, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(phi(0.0, 1.0, 2, 1), Err(Error::GeometryInconsistency(_))));
    }

    #[test]
    fn yang_equality_cases() {
        assert!((yang_bound(&[0.0], &[2.0], 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((yang_bound(&[0.0, 1.0, 1.0, 1.0], &[2.0, 6.0, 6.0, 6.0], 2).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(yang_bound(&[0.0], &[0.0], 5).unwrap(), 0.0);
    }

    #[test]
    fn yang_check_is_linear_in_rhs() {
        let l = [0.0, 1.0, 1.0, 1.0, 3.0];
        let d = [2.0, 6.0, 6.0, 6.0];
        let base = yang_check(&l, &d, 2, 4).unwrap();
        let bumped: Vec<f64> = d.iter().map(|x| x + 10.0).collect();
        let shifted = yang_check(&l, &bumped, 2, 4).unwrap();
        assert!((shifted - base - 10.0 * (3.0 + 2.0 + 2.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn gap_bound_values() {
        assert!((gap_bound(&[0.0], 2, -0.5).unwrap() - 3.0).abs() < 1e-15);
        for m in 1..6 {
            let mf = m as f64;
            assert!((gap_bound(&[0.0], m, 0.0).unwrap() - (2.0 + 4.0 / mf)).abs() < 1e-14);
        }
    }

    #[test]
    fn lp_values() {
        let s2 = [0.0, 1.0, 1.0, 1.0];
        assert!(lp_check(&s2, 2.0, 2, 1).unwrap().abs() < 1e-15);
        assert!(lp_check(&[0.0, 1.0], 1.0, 1, 1).unwrap().abs() < 1e-15);
        assert!(matches!(lp_check(&s2, 2.0, 2, 3), Err(Error::Precondition(_))));
        assert_eq!(lp_bound(0.0, 1, 1, 0.75), 9.0);
        assert_eq!(lp_bound(0.0, 2, 0, -0.5), 6.0);
    }

    #[test]
    fn cheng_yang_values() {
        assert_eq!(cheng_yang_bound(1.5, 2, 1).unwrap(), 4.5);
        assert!((cheng_yang_bound(1.5, 2, 4).unwrap() - 18.0).abs() < 1e-12);
        assert!(matches!(cheng_yang_bound(0.0, 2, 1), Err(Error::Input(_))));
    }

    #[test]
    fn classical_values() {
        assert_eq!(classical_checks(&[1.0, 2.0], 1, 1).unwrap().ppw, 3.0);
        assert_eq!(classical_checks(&[1.0, 5.0], 1, 1).unwrap().yang, 0.0);
        assert!((classical_checks(&[1.0, 2.0, 3.0], 2, 2).unwrap().hile_protter - 1.5).abs() < 1e-15);
        assert_eq!(classical_checks(&[1.0, 1.0], 2, 1).unwrap().hile_protter, f64::INFINITY);
    }

    #[test]
    fn exact_rhs_on_spheres() {
        let b = sphere_backend(2, 3, 2).unwrap();
        let s = analytic_sphere_spectrum(2, 0, 9).unwrap();
        assert!((rhs_exact(&s, &b, None, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!((rhs_exact(&s, &b, None, 5).unwrap() - 14.0).abs() < 1e-12);

        let c = sphere_backend(1, 2, 32).unwrap();
        let s1 = analytic_sphere_spectrum(1, 1, 5).unwrap();
        for i in 1..=5 {
            let d = rhs_exact(&s1, &c, None, i).unwrap();
            assert!((d - (4.0 * s1.eigenvalues[i - 1] + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_constants_on_spheres() {
        let b = sphere_backend(2, 3, 2).unwrap();
        let g1 = geometric_constants(&b, 1).unwrap().g_max;
        assert!((g1 - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((geometric_constants(&b, 0).unwrap().g_max + 0.5).abs() < 1e-12);
        let c = sphere_backend(1, 2, 16).unwrap();
        assert!((geometric_constants(&c, 1).unwrap().g_max - 0.75).abs() < 1e-12);
        assert!((rhs_geometric(0.0, 1, 1, 0.75) - 9.0).abs() < 1e-12);
    }
}
