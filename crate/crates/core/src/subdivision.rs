//! Regular marked subdivisions induced by heights.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::lattice::{
    affine_matrix, affine_rank, classify_circuit, convex_hull, lattice_volume, radon_partition, to_rational_point,
    CircuitType, GeometryError, LatticePoint, Polytope, RadonPartition,
};
use crate::linalg::{dot, parse_rational, primitive_integer, ParseRationalError};
use crate::{RatMatrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("configuration has no points")]
    Empty,
    #[error("points {0} and {1} coincide")]
    Duplicate(usize, usize),
    #[error("points span an affine space of dimension {0}, expected 3")]
    NotFullDimensional(usize),
    #[error("expected {expected} heights, found {found}")]
    HeightCount { expected: usize, found: usize },
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
}

/// Ordered lattice points together with the matrix `A` (ones over coordinates).
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfig {
    points: Vec<LatticePoint>,
    matrix_a: RatMatrix,
}

impl PointConfig {
    pub fn new(points: Vec<LatticePoint>) -> Result<Self, ConfigError> {
        if points.is_empty() {
            return Err(ConfigError::Empty);
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(ConfigError::Duplicate(i, j));
                }
            }
        }
        let matrix_a = affine_matrix(&points);
        let r = matrix_a.rank();
        if r < 4 {
            return Err(ConfigError::NotFullDimensional(r - 1));
        }
        Ok(PointConfig { points, matrix_a })
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> LatticePoint {
        self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn matrix_a(&self) -> &RatMatrix {
        &self.matrix_a
    }

    pub fn subset(&self, idx: &[usize]) -> Vec<LatticePoint> {
        idx.iter().map(|&i| self.points[i]).collect()
    }

    pub fn rational_point(&self, i: usize) -> Vec<Rational> {
        to_rational_point(&self.points[i])
    }
}

/// Human-readable label of a configuration index: `a, b, ..., z, m27, ...`.
pub fn label(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("m{}", i + 1)
    }
}

pub fn labels(idx: &[usize]) -> String {
    idx.iter().map(|&i| label(i)).collect::<Vec<_>>().join(",")
}

/// Heights `u_m`, one per configuration point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeightVector(pub Vec<Rational>);

impl HeightVector {
    pub fn parse(values: &[impl AsRef<str>]) -> Result<Self, ConfigError> {
        let u = values
            .iter()
            .map(|v| parse_rational(v.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HeightVector(u))
    }

    pub fn from_integers(values: &[i64]) -> Self {
        HeightVector(
            values
                .iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self, cfg: &PointConfig) -> Result<(), ConfigError> {
        if self.len() != cfg.len() {
            return Err(ConfigError::HeightCount {
                expected: cfg.len(),
                found: self.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &HeightVector) -> HeightVector {
        HeightVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// A maximal cell: its vertices, marked points and the dual vertex of the
/// tropical surface (the point where exactly the marked terms are maximal).
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub marked: Vec<usize>,
    pub dual_vertex: Vec<Rational>,
}

/// A proper face of dimension 1 or 2 of the subdivision.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub dim: usize,
    pub vertices: Vec<usize>,
    pub marked: Vec<usize>,
    /// Maximal cells containing the face.
    pub cells: Vec<usize>,
    /// Facets of the configuration's hull containing the face.
    pub hull_facets: Vec<usize>,
}

/// A facet of `conv(cfg)` with primitive integral outer normal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullFacet {
    pub normal: [i64; 3],
    pub incident: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkedSubdivision {
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub hull_facets: Vec<HullFacet>,
    pub dim_l_t: usize,
}

impl MarkedSubdivision {
    pub fn faces_of_dim(&self, d: usize) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(move |(_, f)| f.dim == d)
    }

    pub fn marked_union(&self) -> BTreeSet<usize> {
        self.cells.iter().flat_map(|c| c.marked.iter().copied()).collect()
    }
}

/// Facets of the configuration's hull.
pub fn hull_facets(cfg: &PointConfig) -> Vec<HullFacet> {
    let pts: Vec<Vec<Rational>> = (0..cfg.len()).map(|i| cfg.rational_point(i)).collect();
    let hull = convex_hull(&pts, 3).expect("configuration is nonempty");
    hull.facets
        .iter()
        .map(|f| HullFacet {
            normal: to_i64_point(&primitive_integer(&f.normal)),
            incident: f.incident.clone(),
        })
        .collect()
}

pub(crate) fn to_i64_point(v: &[BigInt]) -> [i64; 3] {
    [0, 1, 2].map(|i| v[i].to_i64().expect("coordinate fits in i64"))
}

/// Regular subdivision: projections of the upper facets of the lifted points.
pub fn regular_subdivision(cfg: &PointConfig, u: &HeightVector) -> MarkedSubdivision {
    assert_eq!(u.len(), cfg.len(), "one height per point");
    let lifted: Vec<Vec<Rational>> = (0..cfg.len())
        .map(|i| {
            let mut p = cfg.rational_point(i);
            p.push(u.0[i].clone());
            p
        })
        .collect();
    let hull = convex_hull(&lifted, 4).expect("configuration is nonempty");
    let mut marked_sets: Vec<(Vec<usize>, Option<Vec<Rational>>)> = Vec::new();
    if hull.dim < 4 {
        marked_sets.push(((0..cfg.len()).collect(), None));
    } else {
        for f in &hull.facets {
            if f.normal[3].is_positive() {
                let x: Vec<Rational> = (0..3).map(|i| &f.normal[i] / &f.normal[3]).collect();
                marked_sets.push((f.incident.clone(), Some(x)));
            }
        }
    }
    marked_sets.sort();
    let cells: Vec<Cell> = marked_sets
        .into_iter()
        .map(|(marked, x)| {
            let pts = cfg.subset(&marked);
            let poly = Polytope::hull_of(&pts).expect("cell is nonempty");
            let mut vertices: Vec<usize> = marked
                .iter()
                .copied()
                .filter(|&i| poly.vertices.contains(&cfg.point(i)))
                .collect();
            vertices.sort();
            let dual_vertex =
                x.unwrap_or_else(|| equal_term_point(cfg, u, &marked).expect("heights are affine on a single cell"));
            Cell {
                vertices,
                marked,
                dual_vertex,
            }
        })
        .collect();
    let hull_facets = hull_facets(cfg);
    let faces = collect_faces(cfg, &cells, &hull_facets);
    let mut t = MarkedSubdivision {
        cells,
        faces,
        hull_facets,
        dim_l_t: 0,
    };
    t.dim_l_t = secondary_codim(cfg, &t);
    t
}

/// The unique point where all terms indexed by `idx` agree, if any.
pub fn equal_term_point(cfg: &PointConfig, u: &HeightVector, idx: &[usize]) -> Option<Vec<Rational>> {
    let (rows, rhs) = equal_term_system(cfg, u, idx);
    if rows.is_empty() {
        return None;
    }
    RatMatrix::from_rows(3, rows)
        .solve_affine(&rhs)
        .unique()
        .map(|x| x.to_vec())
}

/// Rows and right-hand side of `u_i + m_i . x = u_j + m_j . x` for all
/// `j` in `idx` against the first index.
pub fn equal_term_system(cfg: &PointConfig, u: &HeightVector, idx: &[usize]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    if let Some((&i0, rest)) = idx.split_first() {
        let p0 = cfg.rational_point(i0);
        for &j in rest {
            let pj = cfg.rational_point(j);
            rows.push((0..3).map(|c| &pj[c] - &p0[c]).collect());
            rhs.push(&u.0[i0] - &u.0[j]);
        }
    }
    (rows, rhs)
}

fn collect_faces(cfg: &PointConfig, cells: &[Cell], hull_facets: &[HullFacet]) -> Vec<Face> {
    let mut faces: BTreeMap<Vec<usize>, Face> = BTreeMap::new();
    for (ci, cell) in cells.iter().enumerate() {
        let pts: Vec<Vec<Rational>> = cell.marked.iter().map(|&i| cfg.rational_point(i)).collect();
        let hull = convex_hull(&pts, 3).expect("cell is nonempty");
        if hull.dim < 3 {
            continue;
        }
        let to_global = |loc: &[usize]| -> Vec<usize> {
            let mut g: Vec<usize> = loc.iter().map(|&i| cell.marked[i]).collect();
            g.sort();
            g
        };
        let mut cell_faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        let two_faces: Vec<Vec<usize>> = hull.facets.iter().map(|f| to_global(&f.incident)).collect();
        for f in &two_faces {
            cell_faces.insert(f.clone());
        }
        for (a, fa) in two_faces.iter().enumerate() {
            for fb in &two_faces[a + 1..] {
                let inter: Vec<usize> = fa.iter().copied().filter(|i| fb.contains(i)).collect();
                if affine_rank(&cfg.subset(&inter)) == 2 {
                    cell_faces.insert(inter);
                }
            }
        }
        for marked in cell_faces {
            let entry = faces.entry(marked.clone()).or_insert_with(|| {
                let pts = cfg.subset(&marked);
                let dim = affine_rank(&pts) - 1;
                let poly = Polytope::hull_of(&pts).expect("face is nonempty");
                let vertices = marked
                    .iter()
                    .copied()
                    .filter(|&i| poly.vertices.contains(&cfg.point(i)))
                    .collect();
                let hull_facets_of = hull_facets
                    .iter()
                    .enumerate()
                    .filter(|(_, h)| marked.iter().all(|i| h.incident.contains(i)))
                    .map(|(k, _)| k)
                    .collect();
                Face {
                    dim,
                    vertices,
                    marked,
                    cells: Vec::new(),
                    hull_facets: hull_facets_of,
                }
            });
            entry.cells.push(ci);
        }
    }
    faces.into_values().collect()
}

/// Dimension of `L_T`: the span of the affine relations among the marked
/// points of every cell.
pub fn secondary_codim(cfg: &PointConfig, t: &MarkedSubdivision) -> usize {
    relation_space(cfg, t).len()
}

/// A basis of `L_T` as vectors in `Q^s`.
pub fn relation_space(cfg: &PointConfig, t: &MarkedSubdivision) -> Vec<Vec<Rational>> {
    let s = cfg.len();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for cell in &t.cells {
        let a = cfg.matrix_a().select_columns(&cell.marked);
        for k in a.kernel_basis() {
            let mut v = vec![Rational::zero(); s];
            for (j, &i) in cell.marked.iter().enumerate() {
                v[i] = k[j].clone();
            }
            rows.push(v);
        }
    }
    if rows.is_empty() {
        return rows;
    }
    let (r, pivots) = RatMatrix::from_rows(s, rows).rref();
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

/// Lattice points of `conv(cfg)`.
pub fn hull_lattice_points(cfg: &PointConfig) -> Vec<LatticePoint> {
    Polytope::hull_of(cfg.points()).expect("nonempty").lattice_points()
}

/// Every lattice point of the hull is a configuration point and is marked.
pub fn is_maximal_dimensional_type(cfg: &PointConfig, t: &MarkedSubdivision) -> bool {
    let marked = t.marked_union();
    hull_lattice_points(cfg).iter().all(|p| {
        cfg.points()
            .iter()
            .position(|q| q == p)
            .is_some_and(|i| marked.contains(&i))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedCircuit {
    pub indices: Vec<usize>,
    pub circuit_type: CircuitType,
    pub radon: RadonPartition,
    /// Maximal cells whose marked set contains the circuit.
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CircuitExtractionError {
    #[error("subdivision has codimension {0}, not 1")]
    NotCodimOne(usize),
    #[error("cell {cell} does not contain the circuit but is not a simplex with only its vertices marked")]
    NonSimplexCell { cell: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The unique circuit among the marked points of a codimension-one
/// subdivision.
pub fn extract_circuit(cfg: &PointConfig, t: &MarkedSubdivision) -> Result<ExtractedCircuit, CircuitExtractionError> {
    let space = relation_space(cfg, t);
    if space.len() != 1 {
        return Err(CircuitExtractionError::NotCodimOne(space.len()));
    }
    let indices: Vec<usize> = (0..cfg.len()).filter(|&i| !space[0][i].is_zero()).collect();
    let pts = cfg.subset(&indices);
    let radon = radon_partition(&pts)?;
    let circuit_type = classify_circuit(&pts)?;
    let mut cells = Vec::new();
    for (ci, cell) in t.cells.iter().enumerate() {
        if indices.iter().all(|i| cell.marked.contains(i)) {
            cells.push(ci);
        } else if cell.marked.len() != 4 || cell.vertices.len() != 4 {
            return Err(CircuitExtractionError::NonSimplexCell { cell: ci });
        }
    }
    Ok(ExtractedCircuit {
        indices,
        circuit_type,
        radon,
        cells,
    })
}

/// Normalized lattice volume of a cell.
pub fn cell_volume(cfg: &PointConfig, cell: &Cell) -> BigInt {
    lattice_volume(&cfg.subset(&cell.vertices))
}

/// Sum of lattice volumes of the maximal cells.
pub fn total_volume(cfg: &PointConfig, t: &MarkedSubdivision) -> BigInt {
    t.cells
        .iter()
        .map(|c| cell_volume(cfg, c))
        .fold(BigInt::zero(), |a, b| a + b)
}

/// Checks that every marked lift lies on the facet over its cell and every
/// other lift of a point in the cell lies strictly below.
pub fn check_liftings(cfg: &PointConfig, u: &HeightVector, t: &MarkedSubdivision) -> bool {
    t.cells.iter().all(|cell| {
        let x = &cell.dual_vertex;
        let value = |i: usize| &u.0[i] + dot(&cfg.rational_point(i), x);
        let top = value(cell.marked[0]);
        (0..cfg.len()).all(|i| {
            let v = value(i);
            if cell.marked.contains(&i) {
                v == top
            } else {
                v < top
            }
        })
    })
}
