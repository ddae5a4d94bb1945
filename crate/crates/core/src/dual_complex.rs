//! The tropical surface dual to a regular marked subdivision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::lattice::{lattice_volume, LatticePoint};
use crate::linalg::{dot, format_rational};
use crate::subdivision::{equal_term_point, Face, HeightVector, MarkedSubdivision, PointConfig};
use crate::Rational;

/// Value of `max_m (u_m + m . p)` and the indices attaining it.
pub fn tropical_eval(cfg: &PointConfig, u: &HeightVector, p: &[Rational]) -> (Rational, Vec<usize>) {
    let mut best: Option<Rational> = None;
    let mut arg = Vec::new();
    for i in 0..cfg.len() {
        let v = &u.0[i] + dot(&cfg.rational_point(i), p);
        match &best {
            Some(b) if &v < b => {}
            Some(b) if &v == b => arg.push(i),
            _ => {
                best = Some(v);
                arg = vec![i];
            }
        }
    }
    (best.expect("configuration is nonempty"), arg)
}

/// A vertex of S, dual to a maximal cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SVertex {
    pub cell: usize,
    #[serde(serialize_with = "ser_point")]
    pub point: Vec<Rational>,
}

/// An edge of S, dual to a 2-face of the subdivision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SEdge {
    pub face: usize,
    /// One or two vertex indices.
    pub endpoints: Vec<usize>,
    /// Direction of the unbounded end, when there is one.
    pub ray: Option<[i64; 3]>,
}

/// A 2-cell of S, dual to an edge of the subdivision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SFace {
    pub face: usize,
    /// Vertex indices in cyclic order (path order for unbounded cells).
    pub vertices: Vec<usize>,
    /// Generators of the recession cone.
    pub rays: Vec<[i64; 3]>,
    /// Rays leaving the first and the last vertex of an unbounded cell.
    pub end_rays: Option<([i64; 3], [i64; 3])>,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TropicalComplex {
    pub vertices: Vec<SVertex>,
    pub edges: Vec<SEdge>,
    pub faces2d: Vec<SFace>,
}

fn ser_point<S: serde::Serializer>(p: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(p.iter().map(format_rational))
}

impl TropicalComplex {
    pub fn vertex(&self, i: usize) -> &[Rational] {
        &self.vertices[i].point
    }

    /// The cell of S dual to the subdivision face with the given marked set.
    pub fn face_dual_to(&self, t: &MarkedSubdivision, marked: &[usize]) -> Option<&SFace> {
        self.faces2d.iter().find(|f| t.faces[f.face].marked == marked)
    }

    pub fn edge_dual_to(&self, t: &MarkedSubdivision, marked: &[usize]) -> Option<&SEdge> {
        self.edges.iter().find(|e| t.faces[e.face].marked == marked)
    }
}

/// Lattice length of a segment between two lattice points.
pub fn lattice_length(a: &LatticePoint, b: &LatticePoint) -> u64 {
    let g = (0..3).fold(0i64, |g, i| g.gcd(&(b[i] - a[i])));
    g as u64
}

pub fn build_complex(cfg: &PointConfig, u: &HeightVector, t: &MarkedSubdivision) -> TropicalComplex {
    let vertices: Vec<SVertex> = t
        .cells
        .iter()
        .enumerate()
        .map(|(ci, cell)| {
            let point = equal_term_point(cfg, u, &cell.marked).expect("maximal cell has a dual vertex");
            debug_assert_eq!(point, cell.dual_vertex);
            SVertex { cell: ci, point }
        })
        .collect();
    let mut edges = Vec::new();
    for (fi, f) in t.faces_of_dim(2) {
        let ray = if f.cells.len() == 1 {
            Some(t.hull_facets[f.hull_facets[0]].normal)
        } else {
            None
        };
        edges.push(SEdge {
            face: fi,
            endpoints: f.cells.clone(),
            ray,
        });
    }
    let mut faces2d = Vec::new();
    for (fi, f) in t.faces_of_dim(1) {
        faces2d.push(dual_two_cell(cfg, t, fi, f));
    }
    TropicalComplex {
        vertices,
        edges,
        faces2d,
    }
}

fn dual_two_cell(cfg: &PointConfig, t: &MarkedSubdivision, fi: usize, edge: &Face) -> SFace {
    let around: Vec<&Face> = t
        .faces_of_dim(2)
        .map(|(_, f)| f)
        .filter(|f| edge.marked.iter().all(|i| f.marked.contains(i)))
        .collect();
    let boundary: Vec<&Face> = around.iter().copied().filter(|f| f.cells.len() == 1).collect();
    let mut order = Vec::new();
    let mut used = vec![false; around.len()];
    let start = boundary.first().map(|f| f.cells[0]).unwrap_or(edge.cells[0]);
    let mut current = start;
    order.push(current);
    loop {
        let next = around
            .iter()
            .enumerate()
            .find(|(k, f)| !used[*k] && f.cells.len() == 2 && f.cells.contains(&current));
        match next {
            Some((k, f)) => {
                used[k] = true;
                let other = if f.cells[0] == current { f.cells[1] } else { f.cells[0] };
                if other == start {
                    break;
                }
                order.push(other);
                current = other;
            }
            None => break,
        }
    }
    let rays: Vec<[i64; 3]> = edge.hull_facets.iter().map(|&h| t.hull_facets[h].normal).collect();
    let end_rays = match boundary.as_slice() {
        [f0, f1] => Some((
            t.hull_facets[f0.hull_facets[0]].normal,
            t.hull_facets[f1.hull_facets[0]].normal,
        )),
        _ => None,
    };
    let ends = [edge.vertices[0], *edge.vertices.last().expect("edge has two vertices")];
    SFace {
        face: fi,
        vertices: order,
        rays,
        end_rays,
        weight: lattice_length(&cfg.point(ends[0]), &cfg.point(ends[1])),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cell {0} is not a simplex")]
pub struct NotSimplex(pub usize);

/// Multiplicity of the vertex of S dual to a simplex cell.
pub fn vertex_multiplicity(cfg: &PointConfig, t: &MarkedSubdivision, cell: usize) -> Result<BigInt, NotSimplex> {
    let c = &t.cells[cell];
    if c.vertices.len() != 4 || c.marked.len() != 4 {
        return Err(NotSimplex(cell));
    }
    Ok(lattice_volume(&cfg.subset(&c.vertices)))
}

/// Exact orthogonality of every cell of S to its dual face.
pub fn check_orthogonality(cfg: &PointConfig, t: &MarkedSubdivision, s: &TropicalComplex) -> bool {
    let diffs = |f: &Face| -> Vec<Vec<Rational>> {
        let p0 = cfg.rational_point(f.marked[0]);
        f.marked[1..]
            .iter()
            .map(|&i| {
                let p = cfg.rational_point(i);
                (0..3).map(|c| &p[c] - &p0[c]).collect()
            })
            .collect()
    };
    let as_rat = |r: &[i64; 3]| -> Vec<Rational> { r.iter().map(|&v| Rational::from_integer(v.into())).collect() };
    let edges_ok = s.edges.iter().all(|e| {
        let f = &t.faces[e.face];
        let mut dirs = Vec::new();
        if e.endpoints.len() == 2 {
            let (a, b) = (s.vertex(e.endpoints[0]), s.vertex(e.endpoints[1]));
            dirs.push((0..3).map(|c| &b[c] - &a[c]).collect::<Vec<_>>());
        }
        if let Some(r) = &e.ray {
            dirs.push(as_rat(r));
        }
        dirs.iter().all(|d| diffs(f).iter().all(|w| dot(d, w).is_zero()))
    });
    let faces_ok = s.faces2d.iter().all(|c| {
        let f = &t.faces[c.face];
        let v0 = s.vertex(c.vertices[0]);
        let mut dirs: Vec<Vec<Rational>> = c.vertices[1..]
            .iter()
            .map(|&i| (0..3).map(|k| &s.vertex(i)[k] - &v0[k]).collect())
            .collect();
        dirs.extend(c.rays.iter().map(as_rat));
        dirs.iter().all(|d| diffs(f).iter().all(|w| dot(d, w).is_zero()))
    });
    edges_ok && faces_ok
}

/// A point to flag in a rendered mesh.
#[derive(Clone, Debug)]
pub struct Marker {
    pub point: Vec<Rational>,
    pub label: String,
}

fn to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(0.0) / r.denom().to_f64().unwrap_or(1.0)
}

fn clip_ray(v: &[f64; 3], r: &[i64; 3], bound: f64) -> [f64; 3] {
    let mut t = f64::INFINITY;
    for i in 0..3 {
        if r[i] != 0 {
            let target = bound * (r[i].signum() as f64);
            t = t.min((target - v[i]) / r[i] as f64);
        }
    }
    let t = t.max(0.0);
    [0, 1, 2].map(|i| v[i] + t * r[i] as f64)
}

/// ASCII OFF mesh of the 2-cells of S, rays clipped to the box `[-bound, bound]^3`.
pub fn render_off(s: &TropicalComplex, markers: &[Marker], bound: f64) -> String {
    let mut verts: Vec<[f64; 3]> = s
        .vertices
        .iter()
        .map(|v| [to_f64(&v.point[0]), to_f64(&v.point[1]), to_f64(&v.point[2])])
        .collect();
    let mut polys: Vec<Vec<usize>> = Vec::new();
    for f in &s.faces2d {
        let mut poly = f.vertices.clone();
        if let Some((r0, r1)) = &f.end_rays {
            let first = verts[f.vertices[0]];
            let last = verts[*f.vertices.last().expect("nonempty")];
            verts.push(clip_ray(&last, r1, bound));
            poly.push(verts.len() - 1);
            verts.push(clip_ray(&first, r0, bound));
            poly.push(verts.len() - 1);
        }
        if poly.len() >= 3 {
            polys.push(poly);
        }
    }
    let mut out = String::from("OFF\n");
    for m in markers {
        out.push_str(&format!(
            "# singular {} {}\n",
            m.point.iter().map(format_rational).collect::<Vec<_>>().join(" "),
            m.label
        ));
    }
    let first_marker = verts.len();
    for m in markers {
        verts.push([to_f64(&m.point[0]), to_f64(&m.point[1]), to_f64(&m.point[2])]);
    }
    if !markers.is_empty() {
        out.push_str(&format!("# singular vertices start at {first_marker}\n"));
    }
    out.push_str(&format!("{} {} 0\n", verts.len(), polys.len()));
    for v in &verts {
        out.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
    }
    for p in &polys {
        out.push_str(&p.len().to_string());
        for i in p {
            out.push_str(&format!(" {i}"));
        }
        out.push('\n');
    }
    out
}
