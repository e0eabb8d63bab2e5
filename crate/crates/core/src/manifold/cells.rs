//! Cell structures and the primal/dual measurements used by the discrete
//! Hodge stars.

use nalgebra::DMatrix;

/// How edge lengths of a closed polygon are measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveMetric {
    /// Euclidean chord lengths.
    Chordal,
    /// Arc lengths on the circle of the given radius through the vertices.
    Arc { radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellStructure {
    Triangles {
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
    },
    /// Closed polygon; edge `j` joins vertex `j` to vertex `j + 1 mod N`.
    Polygon {
        vertices: Vec<[f64; 2]>,
        metric: CurveMetric,
    },
}

impl CellStructure {
    pub fn dim(&self) -> usize {
        match self {
            CellStructure::Triangles { .. } => 2,
            CellStructure::Polygon { .. } => 1,
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            CellStructure::Triangles { vertices, .. } => vertices.len(),
            CellStructure::Polygon { vertices, .. } => vertices.len(),
        }
    }

    pub(crate) fn transformed(&self, q: &DMatrix<f64>) -> Self {
        match self {
            CellStructure::Triangles {
                vertices,
                triangles,
            } => CellStructure::Triangles {
                vertices: vertices
                    .iter()
                    .map(|v| {
                        let w = q * nalgebra::DVector::from_column_slice(v);
                        [w[0], w[1], w[2]]
                    })
                    .collect(),
                triangles: triangles.clone(),
            },
            CellStructure::Polygon { vertices, metric } => CellStructure::Polygon {
                vertices: vertices
                    .iter()
                    .map(|v| {
                        let w = q * nalgebra::DVector::from_column_slice(v);
                        [w[0], w[1]]
                    })
                    .collect(),
                metric: *metric,
            },
        }
    }
}

pub(crate) fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Cotangent of the interior angle at `a` in triangle `abc`.
pub(crate) fn cot_at(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    let n = cross(&u, &v);
    dot(&u, &v) / dot(&n, &n).sqrt()
}

/// Circumcentre of a triangle in R³.
pub(crate) fn circumcenter(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> [f64; 3] {
    let u = sub(b, a);
    let v = sub(c, a);
    let n = cross(&u, &v);
    let nn = dot(&n, &n);
    let uu = dot(&u, &u);
    let vv = dot(&v, &v);
    let t1 = cross(&n, &u);
    let t2 = cross(&v, &n);
    let mut out = *a;
    for k in 0..3 {
        out[k] += (vv * t1[k] + uu * t2[k]) / (2.0 * nn);
    }
    out
}

/// Signed circumcentric (Voronoi) dual area at every vertex. The values sum
/// to the total surface area and are all positive on Delaunay meshes.
pub(crate) fn circumcentric_dual_areas(vertices: &[[f64; 3]], triangles: &[[usize; 3]]) -> Vec<f64> {
    let mut area = vec![0.0; vertices.len()];
    for t in triangles {
        for corner in 0..3 {
            let i = t[corner];
            let j = t[(corner + 1) % 3];
            let k = t[(corner + 2) % 3];
            let (pi, pj, pk) = (&vertices[i], &vertices[j], &vertices[k]);
            let eij = sub(pj, pi);
            let eik = sub(pk, pi);
            area[i] += (dot(&eij, &eij) * cot_at(pk, pi, pj) + dot(&eik, &eik) * cot_at(pj, pk, pi)) / 8.0;
        }
    }
    area
}

/// Length of polygon edge `j` (from vertex `j` to `j + 1`).
pub(crate) fn polygon_edge_lengths(vertices: &[[f64; 2]], metric: CurveMetric) -> Vec<f64> {
    let n = vertices.len();
    (0..n)
        .map(|j| {
            let a = vertices[j];
            let b = vertices[(j + 1) % n];
            match metric {
                CurveMetric::Chordal => ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt(),
                CurveMetric::Arc { radius } => {
                    let cross = a[0] * b[1] - a[1] * b[0];
                    let dot = a[0] * b[0] + a[1] * b[1];
                    radius * cross.atan2(dot).abs()
                }
            }
        })
        .collect()
}

/// Half the sum of the two adjacent edge lengths at every vertex.
pub(crate) fn polygon_dual_lengths(vertices: &[[f64; 2]], metric: CurveMetric) -> Vec<f64> {
    let edges = polygon_edge_lengths(vertices, metric);
    let n = vertices.len();
    (0..n).map(|j| 0.5 * (edges[j] + edges[(j + n - 1) % n])).collect()
}

/// Point used to evaluate the weight on polygon edge `j`.
pub(crate) fn polygon_edge_point(vertices: &[[f64; 2]], j: usize) -> [f64; 2] {
    let n = vertices.len();
    let a = vertices[j];
    let b = vertices[(j + 1) % n];
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
}
