//! Per-vertex curvature estimation by least-squares jet fitting.
//!
//! Around each vertex the mesh is written as a height function over the
//! tangent plane (or tangent line) of an averaged normal, a polynomial jet is
//! fitted to the 2-ring and the first and second fundamental forms are read
//! off its derivatives at the origin.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use super::cells::{cross, dot, sub};
use super::{orthonormal_complement, SamplePoint};
use crate::error::{Error, Result};

const SVD_EPS: f64 = 1e-13;

pub(crate) fn surface_samples(
    vertices: &[[f64; 3]],
    triangles: &[[usize; 3]],
    weights: &[f64],
) -> Result<Vec<SamplePoint>> {
    let n = vertices.len();
    let mut normals = vec![[0.0; 3]; n];
    let mut ring: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for t in triangles {
        let fnorm = cross(&sub(&vertices[t[1]], &vertices[t[0]]), &sub(&vertices[t[2]], &vertices[t[0]]));
        let len = dot(&fnorm, &fnorm).sqrt();
        for c in 0..3 {
            for k in 0..3 {
                normals[t[c]][k] += fnorm[k] / len;
            }
            ring[t[c]].insert(t[(c + 1) % 3]);
            ring[t[c]].insert(t[(c + 2) % 3]);
        }
    }

    (0..n)
        .map(|v| {
            let nv = DVector::from_column_slice(&normals[v]);
            let len = nv.norm();
            if !(len > 1e-14) {
                return Err(Error::Geometry(format!("vertex {v} has a degenerate normal")));
            }
            let normal = nv / len;
            let frame = orthonormal_complement(&normal);
            let mut neighbourhood: BTreeSet<usize> = ring[v].clone();
            for &w in &ring[v] {
                neighbourhood.extend(ring[w].iter().copied());
            }
            neighbourhood.remove(&v);

            let origin = DVector::from_column_slice(&vertices[v]);
            let local: Vec<[f64; 3]> = neighbourhood
                .iter()
                .map(|&w| {
                    let d = DVector::from_column_slice(&vertices[w]) - &origin;
                    [d.dot(&frame[0]), d.dot(&frame[1]), d.dot(&normal)]
                })
                .collect();
            let jet = fit_surface_jet(&local)
                .ok_or_else(|| Error::Geometry(format!("curvature fit failed at vertex {v}")))?;

            let grad = [jet.zu, jet.zv];
            let g = Matrix2::new(
                1.0 + grad[0] * grad[0],
                grad[0] * grad[1],
                grad[0] * grad[1],
                1.0 + grad[1] * grad[1],
            );
            let w = (1.0 + grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
            let g_inv_sqrt = inverse_sqrt(&g);
            let hess = Matrix2::new(jet.zuu, jet.zuv, jet.zuv, jet.zvv) / w;
            let h = g_inv_sqrt * hess * g_inv_sqrt;

            let jac0 = &frame[0] + &normal * grad[0];
            let jac1 = &frame[1] + &normal * grad[1];
            let e0 = &jac0 * g_inv_sqrt[(0, 0)] + &jac1 * g_inv_sqrt[(1, 0)];
            let e1 = &jac0 * g_inv_sqrt[(0, 1)] + &jac1 * g_inv_sqrt[(1, 1)];
            let fitted_normal = (&normal - &frame[0] * grad[0] - &frame[1] * grad[1]) / w;

            let h = DMatrix::from_fn(2, 2, |i, j| h[(i, j)]);
            Ok(SamplePoint::new(origin, vec![e0, e1], vec![fitted_normal], vec![h], weights[v]))
        })
        .collect()
}

pub(crate) fn curve_samples(vertices: &[[f64; 2]], weights: &[f64]) -> Result<Vec<SamplePoint>> {
    let n = vertices.len();
    let at = |j: isize| -> DVector<f64> {
        let idx = j.rem_euclid(n as isize) as usize;
        DVector::from_column_slice(&vertices[idx])
    };
    (0..n)
        .map(|v| {
            let origin = at(v as isize);
            let back = (&origin - at(v as isize - 1)).normalize();
            let ahead = (at(v as isize + 1) - &origin).normalize();
            let t = back + ahead;
            if !(t.norm() > 1e-14) {
                return Err(Error::Geometry(format!("vertex {v} has a cusp")));
            }
            let tangent = t.normalize();
            let normal = DVector::from_vec(vec![-tangent[1], tangent[0]]);

            let mut neighbourhood = BTreeSet::new();
            for off in [-2isize, -1, 1, 2] {
                let idx = (v as isize + off).rem_euclid(n as isize) as usize;
                if idx != v {
                    neighbourhood.insert(idx);
                }
            }
            let local: Vec<[f64; 2]> = neighbourhood
                .iter()
                .map(|&w| {
                    let d = at(w as isize) - &origin;
                    [d.dot(&tangent), d.dot(&normal)]
                })
                .collect();
            let (z1, z2) = fit_curve_jet(&local)
                .ok_or_else(|| Error::Geometry(format!("curvature fit failed at vertex {v}")))?;

            let g = 1.0 + z1 * z1;
            let w = g.sqrt();
            let h = z2 / (w * g);
            let e = (&tangent + &normal * z1) / w;
            let fitted_normal = (&normal - &tangent * z1) / w;
            Ok(SamplePoint::new(
                origin,
                vec![e],
                vec![fitted_normal],
                vec![DMatrix::from_element(1, 1, h)],
                weights[v],
            ))
        })
        .collect()
}

struct SurfaceJet {
    zu: f64,
    zv: f64,
    zuu: f64,
    zuv: f64,
    zvv: f64,
}

/// Cubic jet when the neighbourhood is large enough, otherwise a quadric.
fn fit_surface_jet(points: &[[f64; 3]]) -> Option<SurfaceJet> {
    let degree = if points.len() >= 12 {
        3
    } else if points.len() >= 5 {
        2
    } else {
        return None;
    };
    let scale = points.iter().map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).sum::<f64>() / points.len() as f64;
    if !(scale > 0.0) {
        return None;
    }
    let monomials: Vec<(i32, i32)> = (1..=degree)
        .flat_map(|d| (0..=d).rev().map(move |a| (a, d - a)))
        .collect();
    let a = DMatrix::from_fn(points.len(), monomials.len(), |r, c| {
        let (pu, pv) = monomials[c];
        (points[r][0] / scale).powi(pu) * (points[r][1] / scale).powi(pv)
    });
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p[2]));
    let coeffs = a.svd(true, true).solve(&b, SVD_EPS).ok()?;
    // coefficient order: u, v, u², uv, v², ...
    Some(SurfaceJet {
        zu: coeffs[0] / scale,
        zv: coeffs[1] / scale,
        zuu: 2.0 * coeffs[2] / (scale * scale),
        zuv: coeffs[3] / (scale * scale),
        zvv: 2.0 * coeffs[4] / (scale * scale),
    })
}

/// Returns `(z'(0), z''(0))` from a jet of degree up to four.
fn fit_curve_jet(points: &[[f64; 2]]) -> Option<(f64, f64)> {
    let degree = points.len().min(4);
    if degree < 2 {
        return None;
    }
    let scale = points.iter().map(|p| p[0].abs()).sum::<f64>() / points.len() as f64;
    if !(scale > 0.0) {
        return None;
    }
    let a = DMatrix::from_fn(points.len(), degree, |r, c| (points[r][0] / scale).powi(c as i32 + 1));
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p[1]));
    let coeffs = a.svd(true, true).solve(&b, SVD_EPS).ok()?;
    Some((coeffs[0] / scale, 2.0 * coeffs[1] / (scale * scale)))
}

fn inverse_sqrt(g: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = SymmetricEigen::new(*g);
    let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}
