//! Geometric backends for immersed submanifolds `x: M^m → R^n`.
//!
//! A backend is a list of sample points, each carrying the immersion value,
//! orthonormal tangent and normal frames, the second fundamental form in
//! those frames and a quadrature weight for the measure `e^{-|x|²/2} dvol`.
//! Backends that also carry a cell structure (triangulated surfaces,
//! polygons) can be turned into a discrete de Rham complex.

pub(crate) mod cells;
mod curvature;
pub mod mesh;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use cells::{CellStructure, CurveMetric};
pub use mesh::EmbeddedMesh;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    AnalyticSphere,
    AnalyticCircle,
    MeshSurface,
    MeshCurve,
}

impl BackendKind {
    pub fn is_analytic(self) -> bool {
        matches!(self, BackendKind::AnalyticSphere | BackendKind::AnalyticCircle)
    }
}

/// Geometry at one quadrature node.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub position: DVector<f64>,
    pub xsq: f64,
    pub tangent_frame: Vec<DVector<f64>>,
    pub normal_frame: Vec<DVector<f64>>,
    /// `second_fundamental[α][(i, j)] = h^α_{ij}`, one symmetric `m×m` block
    /// per normal direction.
    pub second_fundamental: Vec<DMatrix<f64>>,
    pub mean_curvature: DVector<f64>,
    pub quad_weight: f64,
}

impl SamplePoint {
    /// Assemble a sample point, deriving `|x|²` and `H = Σ_α tr(h^α) e_α`.
    pub fn new(
        position: DVector<f64>,
        tangent_frame: Vec<DVector<f64>>,
        normal_frame: Vec<DVector<f64>>,
        second_fundamental: Vec<DMatrix<f64>>,
        quad_weight: f64,
    ) -> Self {
        let mut mean_curvature = DVector::zeros(position.len());
        for (h, e) in second_fundamental.iter().zip(&normal_frame) {
            mean_curvature += e * h.trace();
        }
        Self {
            xsq: position.norm_squared(),
            position,
            tangent_frame,
            normal_frame,
            second_fundamental,
            mean_curvature,
            quad_weight,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.tangent_frame.len()
    }

    /// `|h|² = Σ_{α,i,j} (h^α_{ij})²`.
    pub fn h_norm_sq(&self) -> f64 {
        self.second_fundamental.iter().map(|h| h.norm_squared()).sum()
    }

    pub fn mean_curvature_norm_sq(&self) -> f64 {
        self.mean_curvature.norm_squared()
    }

    /// Normal part of an ambient vector via the normal frame.
    pub fn normal_part(&self, v: &DVector<f64>) -> DVector<f64> {
        self.normal_frame
            .iter()
            .fold(DVector::zeros(v.len()), |acc, e| acc + e * e.dot(v))
    }

    /// Normal part of an ambient vector as `v − Σ_i ⟨v, e_i⟩ e_i`.
    pub fn normal_part_via_tangents(&self, v: &DVector<f64>) -> DVector<f64> {
        self.tangent_frame
            .iter()
            .fold(v.clone(), |acc, e| acc - e * e.dot(v))
    }

    /// `Σ_α h^α_{ij} e_α` as an ambient vector.
    pub fn second_fundamental_vector(&self, i: usize, j: usize) -> DVector<f64> {
        self.second_fundamental
            .iter()
            .zip(&self.normal_frame)
            .fold(DVector::zeros(self.position.len()), |acc, (h, e)| {
                acc + e * h[(i, j)]
            })
    }

    /// Largest deviation of the combined frame from orthonormality.
    pub fn frame_orthonormality_error(&self) -> f64 {
        let frame: Vec<&DVector<f64>> = self
            .tangent_frame
            .iter()
            .chain(&self.normal_frame)
            .collect();
        let mut worst: f64 = 0.0;
        for (a, u) in frame.iter().enumerate() {
            for (b, v) in frame.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((u.dot(v) - target).abs());
            }
        }
        worst
    }
}

/// Symmetric `m×m` tensor with its Frobenius norm.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTwoTensor {
    entries: DMatrix<f64>,
}

impl SymmetricTwoTensor {
    /// Symmetrizes `(A + Aᵀ)/2`; the stored entries are exactly symmetric.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Shape(format!(
                "two-tensor must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(Self { entries: sym })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            entries: DMatrix::identity(m, m),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// `|T| = (Σ T_ij²)^{1/2}`.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// A sampled immersed submanifold.
#[derive(Clone, Debug)]
pub struct GeometryBackend {
    intrinsic_dim: usize,
    ambient_dim: usize,
    kind: BackendKind,
    sample_points: Vec<SamplePoint>,
    cells: Option<CellStructure>,
    radius: Option<f64>,
    curvature_estimated: bool,
}

impl GeometryBackend {
    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn sample_points(&self) -> &[SamplePoint] {
        &self.sample_points
    }

    pub fn cells(&self) -> Option<&CellStructure> {
        self.cells.as_ref()
    }

    /// Radius of an analytic round sphere or circle.
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    /// Set for mesh backends, whose curvature is estimated.
    pub fn curvature_estimated(&self) -> bool {
        self.curvature_estimated
    }

    /// Constant sectional curvature, when the backend is an analytic round
    /// sphere or circle (a circle is flat).
    pub fn constant_sectional_curvature(&self) -> Option<f64> {
        match (self.kind, self.radius) {
            (BackendKind::AnalyticCircle, Some(_)) => Some(0.0),
            (BackendKind::AnalyticSphere, Some(r)) => Some(1.0 / (r * r)),
            _ => None,
        }
    }

    /// `|x|²` used for the Gaussian weight at a cell point. Analytic
    /// backends evaluate on the exact manifold (radial projection); meshes
    /// use the point itself.
    pub fn cell_xsq(&self, point: &[f64]) -> f64 {
        match self.radius {
            Some(r) if self.kind.is_analytic() => r * r,
            _ => point.iter().map(|c| c * c).sum(),
        }
    }

    /// `∫ e^{-|x|²/2} dvol` approximated by the quadrature weights.
    pub fn weighted_volume(&self) -> f64 {
        self.sample_points.iter().map(|s| s.quad_weight).sum()
    }

    /// Apply an orthogonal map of the ambient space to every sample point
    /// and cell. Intended for rotations; the map is not checked.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        let mut out = self.clone();
        for s in out.sample_points.iter_mut() {
            s.position = q * &s.position;
            s.mean_curvature = q * &s.mean_curvature;
            for e in s.tangent_frame.iter_mut().chain(s.normal_frame.iter_mut()) {
                *e = q * &*e;
            }
        }
        out.cells = self.cells.as_ref().map(|c| c.transformed(q));
        out
    }
}

/// Round sphere `S^m(√m) ⊂ R^{m+1}`, the compact self-shrinker.
///
/// `resolution` is the node count for `m = 1`, the icosphere subdivision
/// level for `m = 2` and the number of polar nodes per angle for `m ≥ 3`.
pub fn sphere_backend(m: usize, ambient_n: usize, resolution: usize) -> Result<GeometryBackend> {
    if m == 0 {
        return Err(Error::Dimension("intrinsic dimension must be at least 1".into()));
    }
    if ambient_n != m + 1 {
        return Err(Error::Dimension(format!(
            "a round sphere S^{m} lives in R^{}, not R^{ambient_n}",
            m + 1
        )));
    }
    round_sphere(m, (m as f64).sqrt(), resolution)
}

/// Round sphere of arbitrary radius centred at the origin. Only the radius
/// `√m` gives a self-shrinker.
pub fn round_sphere(m: usize, radius: f64, resolution: usize) -> Result<GeometryBackend> {
    if m == 0 {
        return Err(Error::Dimension("intrinsic dimension must be at least 1".into()));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Geometry(format!("radius must be positive, got {radius}")));
    }
    let total = sphere_area(m) * radius.powi(m as i32) * (-radius * radius / 2.0).exp();
    match m {
        1 => {
            if resolution < 3 {
                return Err(Error::Dimension(format!(
                    "circle needs at least 3 nodes, got {resolution}"
                )));
            }
            let units: Vec<DVector<f64>> = (0..resolution)
                .map(|j| {
                    let t = 2.0 * std::f64::consts::PI * j as f64 / resolution as f64;
                    DVector::from_vec(vec![t.cos(), t.sin()])
                })
                .collect();
            let weights = vec![total / resolution as f64; resolution];
            let samples = sphere_samples(&units, radius, &weights);
            let vertices = units.iter().map(|u| [radius * u[0], radius * u[1]]).collect();
            Ok(GeometryBackend {
                intrinsic_dim: 1,
                ambient_dim: 2,
                kind: BackendKind::AnalyticCircle,
                sample_points: samples,
                cells: Some(CellStructure::Polygon {
                    vertices,
                    metric: CurveMetric::Arc { radius },
                }),
                radius: Some(radius),
                curvature_estimated: false,
            })
        }
        2 => {
            let EmbeddedMesh::Surface {
                vertices,
                triangles,
            } = EmbeddedMesh::icosphere(resolution, radius)
            else {
                unreachable!("icosphere is a surface")
            };
            let dual = cells::circumcentric_dual_areas(&vertices, &triangles);
            let dual_total: f64 = dual.iter().sum();
            let weights: Vec<f64> = dual.iter().map(|a| a / dual_total * total).collect();
            let units: Vec<DVector<f64>> = vertices
                .iter()
                .map(|v| DVector::from_column_slice(v) / radius)
                .collect();
            let samples = sphere_samples(&units, radius, &weights);
            Ok(GeometryBackend {
                intrinsic_dim: 2,
                ambient_dim: 3,
                kind: BackendKind::AnalyticSphere,
                sample_points: samples,
                cells: Some(CellStructure::Triangles {
                    vertices,
                    triangles,
                }),
                radius: Some(radius),
                curvature_estimated: false,
            })
        }
        _ => {
            if resolution < 2 {
                return Err(Error::Dimension(format!(
                    "product grid needs at least 2 nodes per angle, got {resolution}"
                )));
            }
            let (units, raw) = hyperspherical_grid(m, resolution);
            let raw_total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / raw_total * total).collect();
            Ok(GeometryBackend {
                intrinsic_dim: m,
                ambient_dim: m + 1,
                kind: BackendKind::AnalyticSphere,
                sample_points: sphere_samples(&units, radius, &weights),
                cells: None,
                radius: Some(radius),
                curvature_estimated: false,
            })
        }
    }
}

/// Backend for a closed triangle surface in R³ or closed polyline in R².
/// Curvature is estimated per vertex by local jet fitting over 2-ring
/// neighbourhoods.
pub fn mesh_backend(mesh: &EmbeddedMesh) -> Result<GeometryBackend> {
    mesh.validate()?;
    match mesh {
        EmbeddedMesh::Surface {
            vertices,
            triangles,
        } => {
            let dual = cells::circumcentric_dual_areas(vertices, triangles);
            if let Some(v) = dual.iter().position(|&a| !(a > 0.0)) {
                return Err(Error::Geometry(format!(
                    "vertex {v} has non-positive circumcentric dual area {:.3e}; \
                     the mesh must be (intrinsically) Delaunay",
                    dual[v]
                )));
            }
            let weights: Vec<f64> = dual
                .iter()
                .zip(vertices)
                .map(|(a, v)| a * gaussian(v.iter().map(|c| c * c).sum()))
                .collect();
            let samples = curvature::surface_samples(vertices, triangles, &weights)?;
            Ok(GeometryBackend {
                intrinsic_dim: 2,
                ambient_dim: 3,
                kind: BackendKind::MeshSurface,
                sample_points: samples,
                cells: Some(CellStructure::Triangles {
                    vertices: vertices.clone(),
                    triangles: triangles.clone(),
                }),
                radius: None,
                curvature_estimated: true,
            })
        }
        EmbeddedMesh::Curve { vertices } => {
            let dual = cells::polygon_dual_lengths(vertices, CurveMetric::Chordal);
            let weights: Vec<f64> = dual
                .iter()
                .zip(vertices)
                .map(|(l, v)| l * gaussian(v[0] * v[0] + v[1] * v[1]))
                .collect();
            let samples = curvature::curve_samples(vertices, &weights)?;
            Ok(GeometryBackend {
                intrinsic_dim: 1,
                ambient_dim: 2,
                kind: BackendKind::MeshCurve,
                sample_points: samples,
                cells: Some(CellStructure::Polygon {
                    vertices: vertices.clone(),
                    metric: CurveMetric::Chordal,
                }),
                radius: None,
                curvature_estimated: true,
            })
        }
    }
}

/// `max_q |H + x^⊥|` over the sample points; zero on a self-shrinker.
pub fn shrinker_residual(backend: &GeometryBackend) -> f64 {
    backend
        .sample_points
        .iter()
        .map(|s| (&s.mean_curvature + s.normal_part(&s.position)).norm())
        .fold(0.0, f64::max)
}

/// Hessian of `|x|²/2`: `T_ij = Σ_α h^α_ij ⟨e_α, x⟩ + δ_ij`.
pub fn hessian_half_xsq(point: &SamplePoint) -> SymmetricTwoTensor {
    let m = point.intrinsic_dim();
    let mut t = DMatrix::identity(m, m);
    for (h, e) in point.second_fundamental.iter().zip(&point.normal_frame) {
        t += h * e.dot(&point.position);
    }
    SymmetricTwoTensor { entries: t }
}

/// Same tensor as [`hessian_half_xsq`], computed from the ambient vectors
/// `Σ_α h^α_ij e_α` paired with `x^⊥ = x − Σ_i ⟨x, e_i⟩ e_i`.
pub fn hessian_half_xsq_ambient(point: &SamplePoint) -> SymmetricTwoTensor {
    let m = point.intrinsic_dim();
    let x_perp = point.normal_part_via_tangents(&point.position);
    let t = DMatrix::from_fn(m, m, |i, j| {
        point.second_fundamental_vector(i, j).dot(&x_perp) + if i == j { 1.0 } else { 0.0 }
    });
    SymmetricTwoTensor { entries: t }
}

/// `Σ_A |∇x^A|² = Σ_A Σ_i ⟨e_i, E_A⟩²`; equals `m` for an orthonormal frame.
pub fn frame_gradient_identity(point: &SamplePoint) -> f64 {
    point
        .tangent_frame
        .iter()
        .map(|e| e.iter().map(|c| c * c).sum::<f64>())
        .sum()
}

pub(crate) fn gaussian(xsq: f64) -> f64 {
    (-xsq / 2.0).exp()
}

/// Area of the unit sphere `S^m ⊂ R^{m+1}`.
pub fn sphere_area(m: usize) -> f64 {
    let half = (m + 1) as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half_integer(m + 1)
}

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half_integer(k: usize) -> f64 {
    let (mut x, mut g) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, std::f64::consts::PI.sqrt())
    };
    while x < k as f64 / 2.0 - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Orthonormal basis of the complement of a unit vector, from the columns of
/// the Householder reflection taking the last coordinate axis to `u`.
pub(crate) fn orthonormal_complement(u: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = u.len();
    let mut last = DVector::zeros(n);
    last[n - 1] = 1.0;
    let v = if u[n - 1] > 0.0 { u + &last } else { u - &last };
    let vv = v.norm_squared();
    (0..n - 1)
        .map(|c| {
            let mut col = DVector::zeros(n);
            col[c] = 1.0;
            &col - &v * (2.0 * v[c] / vv)
        })
        .collect()
}

fn sphere_samples(units: &[DVector<f64>], radius: f64, weights: &[f64]) -> Vec<SamplePoint> {
    let m = units[0].len() - 1;
    units
        .iter()
        .zip(weights)
        .map(|(u, &w)| {
            let tangents = orthonormal_complement(u);
            let h = DMatrix::identity(m, m) * (-1.0 / radius);
            SamplePoint::new(u * radius, tangents, vec![u.clone()], vec![h], w)
        })
        .collect()
}

/// Midpoint product grid in hyperspherical coordinates with unnormalized
/// volume weights `Π sin^{m-j} φ_j`.
fn hyperspherical_grid(m: usize, res: usize) -> (Vec<DVector<f64>>, Vec<f64>) {
    use std::f64::consts::PI;
    let polar: Vec<f64> = (0..res).map(|i| (i as f64 + 0.5) * PI / res as f64).collect();
    let azimuth: Vec<f64> = (0..2 * res).map(|i| i as f64 * PI / res as f64).collect();
    let mut units = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; m - 1];
    loop {
        for &phi_last in &azimuth {
            let mut u = DVector::zeros(m + 1);
            let mut sin_prod = 1.0;
            let mut w = 1.0;
            for (j, &i) in idx.iter().enumerate() {
                let phi = polar[i];
                u[j] = sin_prod * phi.cos();
                w *= phi.sin().powi((m - 1 - j) as i32);
                sin_prod *= phi.sin();
            }
            u[m - 1] = sin_prod * phi_last.cos();
            u[m] = sin_prod * phi_last.sin();
            let n = u.norm();
            units.push(u / n);
            weights.push(w);
        }
        // odometer over the polar angles
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return (units, weights);
            }
            idx[pos] += 1;
            if idx[pos] < res {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_area_values() {
        use std::f64::consts::PI;
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn complement_is_orthonormal() {
        for u in [
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
            DVector::from_vec(vec![0.0, 0.0, -1.0]),
            DVector::from_vec(vec![0.6, 0.0, 0.8]),
            DVector::from_vec(vec![0.5, -0.5, 0.5, -0.5]),
        ] {
            let basis = orthonormal_complement(&u);
            assert_eq!(basis.len(), u.len() - 1);
            for (a, x) in basis.iter().enumerate() {
                assert!(x.dot(&u).abs() < 1e-14);
                for (b, y) in basis.iter().enumerate() {
                    let t = if a == b { 1.0 } else { 0.0 };
                    assert!((x.dot(y) - t).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sphere_invariants_hold_pointwise() {
        for (m, res) in [(1, 16), (2, 2), (3, 4), (4, 3)] {
            let b = sphere_backend(m, m + 1, res).unwrap();
            for s in b.sample_points() {
                assert!((s.xsq - m as f64).abs() < 1e-12);
                assert!((s.mean_curvature_norm_sq() - m as f64).abs() < 1e-12);
                assert!((s.h_norm_sq() - 1.0).abs() < 1e-12);
                assert!(s.frame_orthonormality_error() < 1e-12);
                assert!((frame_gradient_identity(s) - m as f64).abs() < 1e-12);
                assert!(m as f64 * s.h_norm_sq() - s.mean_curvature_norm_sq() > -1e-12);
                assert!(s.quad_weight > 0.0);
            }
            assert!(shrinker_residual(&b) < 1e-12);
            let expected = sphere_area(m) * (m as f64).powf(m as f64 / 2.0) * (-(m as f64) / 2.0).exp();
            assert!((b.weighted_volume() - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn hessian_routes_agree() {
        for (m, res) in [(1, 16), (2, 2), (3, 3)] {
            let b = sphere_backend(m, m + 1, res).unwrap();
            for s in b.sample_points() {
                let a = hessian_half_xsq(s);
                let c = hessian_half_xsq_ambient(s);
                assert!((a.entries() - c.entries()).amax() < 1e-10);
                assert!(a.frobenius_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_radius_is_not_a_shrinker() {
        let b = round_sphere(2, 1.0, 2).unwrap();
        assert!((shrinker_residual(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_error_is_detected() {
        let b = sphere_backend(2, 3, 1).unwrap();
        let mut s = b.sample_points()[3].clone();
        s.tangent_frame[0] *= 1.0 + 1e-3;
        assert!((frame_gradient_identity(&s) - 2.0).abs() >= 1e-4);
    }

    #[test]
    fn wrong_dimensions_rejected() {
        assert!(matches!(sphere_backend(2, 4, 2), Err(Error::Dimension(_))));
        assert!(matches!(sphere_backend(0, 1, 2), Err(Error::Dimension(_))));
        assert!(matches!(sphere_backend(1, 2, 2), Err(Error::Dimension(_))));
    }
}
