//! Raw embedded meshes: closed triangle surfaces in R³ and closed polylines
//! in R², with strict OFF / OBJ / polyline readers.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A closed manifold triangle mesh in R³ or a closed polyline in R².
#[derive(Clone, Debug, PartialEq)]
pub enum EmbeddedMesh {
    Surface {
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
    },
    /// Consecutive vertices are joined and the last joins the first.
    Curve { vertices: Vec<[f64; 2]> },
}

impl EmbeddedMesh {
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            EmbeddedMesh::Surface { .. } => 2,
            EmbeddedMesh::Curve { .. } => 1,
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            EmbeddedMesh::Surface { vertices, .. } => vertices.len(),
            EmbeddedMesh::Curve { vertices } => vertices.len(),
        }
    }

    /// Icosahedron subdivided `level` times, vertices projected onto the
    /// sphere of the given radius. Has `10·4^level + 2` vertices.
    pub fn icosphere(level: usize, radius: f64) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<[f64; 3]> = vec![
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let mut triangles: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        let project = |p: [f64; 3]| {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            [p[0] / n, p[1] / n, p[2] / n]
        };
        for v in vertices.iter_mut() {
            *v = project(*v);
        }
        for _ in 0..level {
            let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
            let mut refined = Vec::with_capacity(triangles.len() * 4);
            for tri in &triangles {
                let mut mid = [0usize; 3];
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    mid[k] = *midpoints.entry(key).or_insert_with(|| {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        vertices.push(project([
                            pa[0] + pb[0],
                            pa[1] + pb[1],
                            pa[2] + pb[2],
                        ]));
                        vertices.len() - 1
                    });
                }
                refined.push([tri[0], mid[0], mid[2]]);
                refined.push([tri[1], mid[1], mid[0]]);
                refined.push([tri[2], mid[2], mid[1]]);
                refined.push([mid[0], mid[1], mid[2]]);
            }
            triangles = refined;
        }
        for v in vertices.iter_mut() {
            *v = [v[0] * radius, v[1] * radius, v[2] * radius];
        }
        EmbeddedMesh::Surface {
            vertices,
            triangles,
        }
    }

    /// Regular `n`-gon inscribed in the circle of the given radius.
    pub fn regular_polygon(n: usize, radius: f64) -> Self {
        let vertices = (0..n)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                [radius * theta.cos(), radius * theta.sin()]
            })
            .collect();
        EmbeddedMesh::Curve { vertices }
    }

    /// Apply a linear map to every vertex (rotations, reflections).
    pub fn transformed(&self, map: &nalgebra::DMatrix<f64>) -> Self {
        match self {
            EmbeddedMesh::Surface {
                vertices,
                triangles,
            } => EmbeddedMesh::Surface {
                vertices: vertices
                    .iter()
                    .map(|v| {
                        let y = map * nalgebra::DVector::from_column_slice(v);
                        [y[0], y[1], y[2]]
                    })
                    .collect(),
                triangles: triangles.clone(),
            },
            EmbeddedMesh::Curve { vertices } => EmbeddedMesh::Curve {
                vertices: vertices
                    .iter()
                    .map(|v| {
                        let y = map * nalgebra::DVector::from_column_slice(v);
                        [y[0], y[1]]
                    })
                    .collect(),
            },
        }
    }

    /// Check the closed-manifold and non-degeneracy preconditions.
    pub fn validate(&self) -> Result<()> {
        match self {
            EmbeddedMesh::Surface {
                vertices,
                triangles,
            } => validate_surface(vertices, triangles),
            EmbeddedMesh::Curve { vertices } => validate_curve(vertices),
        }
    }

    /// Read by extension: `.off`, `.obj`, anything else as a polyline.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("off") => parse_off(&text),
            Some("obj") => parse_obj(&text),
            _ => parse_polyline(&text),
        }
    }

    pub fn write_off<W: Write>(&self, mut out: W) -> Result<()> {
        let EmbeddedMesh::Surface {
            vertices,
            triangles,
        } = self
        else {
            return Err(Error::Input("OFF output needs a surface mesh".into()));
        };
        writeln!(out, "OFF")?;
        writeln!(out, "{} {} 0", vertices.len(), triangles.len())?;
        for v in vertices {
            writeln!(out, "{} {} {}", v[0], v[1], v[2])?;
        }
        for t in triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn write_obj<W: Write>(&self, mut out: W) -> Result<()> {
        let EmbeddedMesh::Surface {
            vertices,
            triangles,
        } = self
        else {
            return Err(Error::Input("OBJ output needs a surface mesh".into()));
        };
        for v in vertices {
            writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for t in triangles {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }

    pub fn write_polyline<W: Write>(&self, mut out: W) -> Result<()> {
        let EmbeddedMesh::Curve { vertices } = self else {
            return Err(Error::Input("polyline output needs a curve".into()));
        };
        for v in vertices {
            writeln!(out, "{} {}", v[0], v[1])?;
        }
        Ok(())
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    token.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("expected a number, found {token:?}"),
    })
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token.parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("expected a non-negative integer, found {token:?}"),
    })
}

pub fn parse_off(text: &str) -> Result<EmbeddedMesh> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty OFF file".into(),
    })?;
    let mut header_tokens: Vec<&str> = header.split_whitespace().collect();
    if header_tokens.first() != Some(&"OFF") {
        return Err(Error::Parse {
            line,
            message: "missing OFF header".into(),
        });
    }
    header_tokens.remove(0);
    let (count_line, counts) = if header_tokens.is_empty() {
        let (l, c) = lines.next().ok_or(Error::Parse {
            line,
            message: "missing element counts".into(),
        })?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, header_tokens)
    };
    if counts.len() < 2 {
        return Err(Error::Parse {
            line: count_line,
            message: "expected vertex and face counts".into(),
        });
    }
    let nv = parse_usize(counts[0], count_line)?;
    let nf = parse_usize(counts[1], count_line)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, row) = lines.next().ok_or(Error::Parse {
            line: count_line,
            message: "truncated vertex list".into(),
        })?;
        let t: Vec<&str> = row.split_whitespace().collect();
        if t.len() != 3 {
            return Err(Error::Parse {
                line: l,
                message: format!("expected 3 coordinates, found {}", t.len()),
            });
        }
        vertices.push([parse_f64(t[0], l)?, parse_f64(t[1], l)?, parse_f64(t[2], l)?]);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, row) = lines.next().ok_or(Error::Parse {
            line: count_line,
            message: "truncated face list".into(),
        })?;
        let t: Vec<&str> = row.split_whitespace().collect();
        let arity = parse_usize(t.first().copied().unwrap_or(""), l)?;
        if arity != 3 {
            return Err(Error::Parse {
                line: l,
                message: format!("only triangular faces are accepted, found a {arity}-gon"),
            });
        }
        if t.len() < 4 {
            return Err(Error::Parse {
                line: l,
                message: "face line lists fewer than 3 vertices".into(),
            });
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = parse_usize(t[k + 1], l)?;
            if tri[k] >= nv {
                return Err(Error::Parse {
                    line: l,
                    message: format!("vertex index {} out of range", tri[k]),
                });
            }
        }
        triangles.push(tri);
    }
    if let Some((l, _)) = lines.next() {
        return Err(Error::Parse {
            line: l,
            message: "unexpected trailing content".into(),
        });
    }
    Ok(EmbeddedMesh::Surface {
        vertices,
        triangles,
    })
}

pub fn parse_obj(text: &str) -> Result<EmbeddedMesh> {
    let mut vertices = Vec::new();
    let mut faces: Vec<(usize, Vec<i64>)> = Vec::new();
    for (l, row) in content_lines(text) {
        let mut t = row.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<&str> = t.collect();
                if c.len() < 3 || c.len() > 4 {
                    return Err(Error::Parse {
                        line: l,
                        message: "vertex needs 3 coordinates".into(),
                    });
                }
                vertices.push([parse_f64(c[0], l)?, parse_f64(c[1], l)?, parse_f64(c[2], l)?]);
            }
            Some("f") => {
                let idx = t
                    .map(|tok| {
                        let head = tok.split('/').next().unwrap_or("");
                        head.parse::<i64>().map_err(|_| Error::Parse {
                            line: l,
                            message: format!("bad face index {tok:?}"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                if idx.len() != 3 {
                    return Err(Error::Parse {
                        line: l,
                        message: format!(
                            "only triangular faces are accepted, found a {}-gon",
                            idx.len()
                        ),
                    });
                }
                faces.push((l, idx));
            }
            // normals, texture coordinates, groups and materials carry no geometry here
            Some("vn" | "vt" | "vp" | "g" | "o" | "s" | "usemtl" | "mtllib") => {}
            Some(other) => {
                return Err(Error::Parse {
                    line: l,
                    message: format!("unsupported OBJ statement {other:?}"),
                })
            }
            None => {}
        }
    }
    let nv = vertices.len() as i64;
    let triangles = faces
        .into_iter()
        .map(|(l, idx)| {
            let mut tri = [0usize; 3];
            for k in 0..3 {
                let i = idx[k];
                let resolved = if i > 0 { i - 1 } else { nv + i };
                if i == 0 || resolved < 0 || resolved >= nv {
                    return Err(Error::Parse {
                        line: l,
                        message: format!("vertex index {i} out of range"),
                    });
                }
                tri[k] = resolved as usize;
            }
            Ok(tri)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbeddedMesh::Surface {
        vertices,
        triangles,
    })
}

/// One `x y` pair per line; the curve closes implicitly.
pub fn parse_polyline(text: &str) -> Result<EmbeddedMesh> {
    let vertices = content_lines(text)
        .map(|(l, row)| {
            let t: Vec<&str> = row.split_whitespace().collect();
            if t.len() != 2 {
                return Err(Error::Parse {
                    line: l,
                    message: format!("expected an \"x y\" pair, found {} fields", t.len()),
                });
            }
            Ok([parse_f64(t[0], l)?, parse_f64(t[1], l)?])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbeddedMesh::Curve { vertices })
}

fn validate_surface(vertices: &[[f64; 3]], triangles: &[[usize; 3]]) -> Result<()> {
    if triangles.is_empty() {
        return Err(Error::Topology("surface has no triangles".into()));
    }
    let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut used = vec![false; vertices.len()];
    for (f, t) in triangles.iter().enumerate() {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::Geometry(format!("triangle {f} repeats a vertex")));
        }
        for k in 0..3 {
            used[t[k]] = true;
            let e = (t[k], t[(k + 1) % 3]);
            if directed.insert(e, f).is_some() {
                return Err(Error::Topology(format!(
                    "edge ({}, {}) is traversed twice in the same direction \
                     (non-manifold or inconsistently oriented)",
                    e.0, e.1
                )));
            }
        }
    }
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) {
            return Err(Error::Topology(format!(
                "edge ({a}, {b}) lies on the boundary; the surface must be closed"
            )));
        }
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return Err(Error::Topology(format!("vertex {v} belongs to no triangle")));
    }
    let areas: Vec<f64> = triangles
        .iter()
        .map(|t| triangle_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]))
        .collect();
    let mean = areas.iter().sum::<f64>() / areas.len() as f64;
    if let Some(f) = areas.iter().position(|&a| !(a > 1e-12 * mean)) {
        return Err(Error::Geometry(format!(
            "triangle {f} is degenerate (area {:.3e}, mean {mean:.3e})",
            areas[f]
        )));
    }
    Ok(())
}

fn validate_curve(vertices: &[[f64; 2]]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::Topology(format!(
            "a closed polyline needs at least 3 vertices, found {n}"
        )));
    }
    let lengths: Vec<f64> = (0..n)
        .map(|j| {
            let (a, b) = (vertices[j], vertices[(j + 1) % n]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .collect();
    let mean = lengths.iter().sum::<f64>() / n as f64;
    if let Some(e) = lengths.iter().position(|&l| !(l > 1e-12 * mean)) {
        return Err(Error::Geometry(format!(
            "polyline edge {e} is degenerate (length {:.3e})",
            lengths[e]
        )));
    }
    Ok(())
}

pub(crate) fn triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let cr = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        for level in 0..4 {
            let EmbeddedMesh::Surface {
                vertices,
                triangles,
            } = EmbeddedMesh::icosphere(level, 2f64.sqrt())
            else {
                unreachable!()
            };
            assert_eq!(vertices.len(), 10 * 4usize.pow(level as u32) + 2);
            assert_eq!(triangles.len(), 20 * 4usize.pow(level as u32));
            for v in &vertices {
                let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                assert!((r2 - 2.0).abs() < 1e-12);
            }
        }
        EmbeddedMesh::icosphere(2, 1.0).validate().unwrap();
    }

    #[test]
    fn off_round_trip() {
        let mesh = EmbeddedMesh::icosphere(1, 1.0);
        let mut buf = Vec::new();
        mesh.write_off(&mut buf).unwrap();
        let back = parse_off(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn obj_accepts_slashed_and_negative_indices() {
        let text = "# tetra\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n\
                    f 1/1/1 3/2/2 2/3/3\nf 1 2 4\nf -3 -2 -1\nf 1 4 3\n";
        let mesh = parse_obj(text).unwrap();
        mesh.validate().unwrap();
        let EmbeddedMesh::Surface { triangles, .. } = mesh else {
            unreachable!()
        };
        assert_eq!(triangles[2], [1, 2, 3]);
    }

    #[test]
    fn non_triangular_faces_rejected() {
        let off = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(parse_off(off), Err(Error::Parse { line: 7, .. })));
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(matches!(parse_obj(obj), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn open_surface_is_a_topology_error() {
        let EmbeddedMesh::Surface {
            vertices,
            mut triangles,
        } = EmbeddedMesh::icosphere(1, 1.0)
        else {
            unreachable!()
        };
        triangles.pop();
        let open = EmbeddedMesh::Surface {
            vertices,
            triangles,
        };
        assert!(matches!(open.validate(), Err(Error::Topology(_))));
    }

    #[test]
    fn polyline_parsing_and_validation() {
        let mesh = parse_polyline("1 0\n0 1\n-1 0\n0 -1\n").unwrap();
        mesh.validate().unwrap();
        assert!(parse_polyline("1 0 0\n").is_err());
        let short = parse_polyline("1 0\n0 1\n").unwrap();
        assert!(matches!(short.validate(), Err(Error::Topology(_))));
        let dup = parse_polyline("1 0\n1 0\n0 1\n").unwrap();
        assert!(matches!(dup.validate(), Err(Error::Geometry(_))));
    }
}
