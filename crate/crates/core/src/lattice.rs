//! Lattice polytopes: exact hulls, lattice-point enumeration, circuits,
//! unimodular maps and the reference catalogs.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::linalg::{dot, normalize_first_positive, primitive_integer, rank_of, rat, sub, Matrix, OrderedField};

pub type LatticePoint = [i64; 3];
pub type LatticePoint2 = [i64; 2];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("empty point set")]
    Empty,
    #[error("point has {found} coordinates, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("points are affinely independent")]
    Independent,
    #[error("proper subset {0:?} is already affinely dependent")]
    DependentSubset(Vec<usize>),
    #[error("expected a circuit of type {expected:?}, found {found:?}")]
    WrongCircuitType { expected: CircuitType, found: CircuitType },
    #[error("polytope is not full-dimensional")]
    NotFullDimensional,
}

// ---------------------------------------------------------------------------
// Hulls

/// Supporting inequality `normal . x <= offset`, tight on `incident`.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet<T> {
    pub normal: Vec<T>,
    pub offset: T,
    pub incident: Vec<usize>,
}

/// H-description of the convex hull of a finite point set.
///
/// For lower-dimensional input the facets are relative to the affine span,
/// which is recorded separately by `equations` (`e . x = c`). Facet normals
/// then lie in the direction space of the span.
#[derive(Clone, Debug)]
pub struct Hull<T> {
    pub ambient_dim: usize,
    pub dim: usize,
    pub equations: Vec<(Vec<T>, T)>,
    pub facets: Vec<Facet<T>>,
    pub num_points: usize,
}

impl<T: OrderedField> Hull<T> {
    pub fn contains(&self, x: &[T]) -> bool {
        self.equations.iter().all(|(e, c)| dot(e, x) == *c) && self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset)
    }

    /// Containment in the relative interior.
    pub fn contains_relint(&self, x: &[T]) -> bool {
        self.equations.iter().all(|(e, c)| dot(e, x) == *c) && self.facets.iter().all(|f| dot(&f.normal, x) < f.offset)
    }

    /// Indices of input points that are vertices of the hull.
    pub fn vertices(&self) -> Vec<usize> {
        if self.dim == 0 {
            return vec![0];
        }
        (0..self.num_points)
            .filter(|i| {
                let normals: Vec<Vec<T>> = self
                    .facets
                    .iter()
                    .filter(|f| f.incident.contains(i))
                    .map(|f| f.normal.clone())
                    .collect();
                rank_of(self.ambient_dim, &normals) == self.dim
            })
            .collect()
    }
}

/// Exact convex hull by exhaustive search over affinely spanning subsets.
pub fn convex_hull<T: OrderedField>(points: &[Vec<T>], ambient_dim: usize) -> Result<Hull<T>, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Empty);
    }
    if let Some(p) = points.iter().find(|p| p.len() != ambient_dim) {
        return Err(GeometryError::Dimension {
            expected: ambient_dim,
            found: p.len(),
        });
    }
    let p0 = &points[0];
    let mut dirs: Vec<Vec<T>> = Vec::new();
    for p in &points[1..] {
        let d = sub(p, p0);
        let mut trial = dirs.clone();
        trial.push(d.clone());
        if rank_of(ambient_dim, &trial) > dirs.len() {
            dirs.push(d);
        }
    }
    let k = dirs.len();
    let w = Matrix::from_rows(ambient_dim, dirs);
    let equations = w
        .kernel_basis()
        .into_iter()
        .map(|e| {
            let c = dot(&e, p0);
            (e, c)
        })
        .collect();

    let wt = w.transpose();
    let local: Vec<Vec<T>> = points
        .iter()
        .map(|p| {
            wt.solve_affine(&sub(p, p0))
                .unique()
                .expect("point lies in its own affine span")
                .to_vec()
        })
        .collect();

    let mut local_facets: Vec<(Vec<T>, T, Vec<usize>)> = Vec::new();
    if k == 1 {
        let (mut lo, mut hi) = (0, 0);
        for (i, a) in local.iter().enumerate() {
            if a[0] < local[lo][0] {
                lo = i;
            }
            if a[0] > local[hi][0] {
                hi = i;
            }
        }
        let at = |v: &T| -> Vec<usize> { (0..local.len()).filter(|&i| local[i][0] == *v).collect() };
        local_facets.push((vec![-T::one()], -local[lo][0].clone(), at(&local[lo][0])));
        local_facets.push((vec![T::one()], local[hi][0].clone(), at(&local[hi][0])));
    } else if k >= 2 {
        let mut seen: Vec<BTreeSet<usize>> = Vec::new();
        for combo in (0..points.len()).combinations(k) {
            if seen.iter().any(|s| combo.iter().all(|i| s.contains(i))) {
                continue;
            }
            let rows: Vec<Vec<T>> = combo[1..].iter().map(|&j| sub(&local[j], &local[combo[0]])).collect();
            let ker = Matrix::from_rows(k, rows).kernel_basis();
            if ker.len() != 1 {
                continue;
            }
            let n = ker.into_iter().next().unwrap();
            let off = dot(&n, &local[combo[0]]);
            let vals: Vec<T> = local.iter().map(|a| dot(&n, a) - off.clone()).collect();
            let (n, off) = if vals.iter().all(|v| *v <= T::zero()) {
                (n, off)
            } else if vals.iter().all(|v| *v >= T::zero()) {
                (n.into_iter().map(|x| -x).collect(), -off)
            } else {
                continue;
            };
            let incident: BTreeSet<usize> = (0..local.len()).filter(|&i| vals[i].is_zero()).collect();
            local_facets.push((n, off, incident.iter().copied().collect()));
            seen.push(incident);
        }
    }

    // Lift local normals back to ambient ones lying in the direction space.
    let gram = w.mul(&wt);
    let facets = local_facets
        .into_iter()
        .map(|(c, off, incident)| {
            let beta = gram
                .solve_affine(&c)
                .unique()
                .expect("gram matrix of independent directions is invertible")
                .to_vec();
            let normal = wt.mul_vec(&beta);
            let offset = off + dot(&normal, p0);
            Facet {
                normal,
                offset,
                incident,
            }
        })
        .collect();

    Ok(Hull {
        ambient_dim,
        dim: k,
        equations,
        facets,
        num_points: points.len(),
    })
}

pub fn to_rational_point<const D: usize>(p: &[i64; D]) -> Vec<BigRational> {
    p.iter().map(|&x| rat(x)).collect()
}

fn integer_hull<const D: usize>(points: &[[i64; D]]) -> Result<Hull<BigRational>, GeometryError> {
    let pts: Vec<Vec<BigRational>> = points.iter().map(to_rational_point).collect();
    convex_hull(&pts, D)
}

// ---------------------------------------------------------------------------
// Polytopes

/// A lattice polytope given by its irredundant vertex list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope<const D: usize> {
    pub vertices: Vec<[i64; D]>,
    pub dim: usize,
}

impl<const D: usize> Polytope<D> {
    pub fn hull_of(points: &[[i64; D]]) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::Empty);
        }
        let mut vertices: Vec<[i64; D]> = match integer_facets(points) {
            Some(facets) => (0..points.len())
                .filter(|&i| {
                    let normals: Vec<&[i128; 3]> = facets.iter().filter(|f| f.2.contains(&i)).map(|f| &f.0).collect();
                    spans_full(&normals, D)
                })
                .map(|i| points[i])
                .collect(),
            None => {
                let hull = integer_hull(points)?;
                let mut v: Vec<[i64; D]> = hull.vertices().into_iter().map(|i| points[i]).collect();
                v.sort();
                v.dedup();
                return Ok(Polytope {
                    vertices: v,
                    dim: hull.dim,
                });
            }
        };
        vertices.sort();
        vertices.dedup();
        Ok(Polytope { vertices, dim: D })
    }

    pub fn hull(&self) -> Hull<BigRational> {
        integer_hull(&self.vertices).expect("polytope has vertices")
    }

    fn constraints(&self) -> IntConstraints {
        match integer_facets(&self.vertices) {
            Some(facets) => IntConstraints {
                equations: Vec::new(),
                inequalities: facets.into_iter().map(|(n, c, _)| (n[..D].to_vec(), c)).collect(),
            },
            None => integer_constraints(&self.hull()),
        }
    }

    pub fn lattice_points(&self) -> Vec<[i64; D]> {
        lattice_points(self)
    }

    /// Lattice points in the relative interior.
    pub fn interior_lattice_points(&self) -> Vec<[i64; D]> {
        let cons = self.constraints();
        self.lattice_points()
            .into_iter()
            .filter(|p| cons.strictly_inside(p))
            .collect()
    }

    pub fn boundary_lattice_points(&self) -> Vec<[i64; D]> {
        let cons = self.constraints();
        self.lattice_points()
            .into_iter()
            .filter(|p| !cons.strictly_inside(p))
            .collect()
    }
}

type IntFacet = ([i128; 3], i128, Vec<usize>);

/// Facets of a full-dimensional polytope in dimension 2 or 3 computed with
/// machine integers. `None` for other dimensions or degenerate input.
fn integer_facets<const D: usize>(points: &[[i64; D]]) -> Option<Vec<IntFacet>> {
    if D != 2 && D != 3 {
        return None;
    }
    let p: Vec<[i128; 3]> = points
        .iter()
        .map(|q| {
            let mut v = [0i128; 3];
            for (i, x) in q.iter().enumerate() {
                v[i] = *x as i128;
            }
            v
        })
        .collect();
    let d = |a: &[i128; 3], b: &[i128; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let dotp = |a: &[i128; 3], b: &[i128; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut out: Vec<IntFacet> = Vec::new();
    let mut seen: Vec<BTreeSet<usize>> = Vec::new();
    for combo in (0..p.len()).combinations(D) {
        if seen.iter().any(|s| combo.iter().all(|i| s.contains(i))) {
            continue;
        }
        let n = if D == 2 {
            let e = d(&p[combo[1]], &p[combo[0]]);
            [-e[1], e[0], 0]
        } else {
            let (e, f) = (d(&p[combo[1]], &p[combo[0]]), d(&p[combo[2]], &p[combo[0]]));
            [
                e[1] * f[2] - e[2] * f[1],
                e[2] * f[0] - e[0] * f[2],
                e[0] * f[1] - e[1] * f[0],
            ]
        };
        if n == [0, 0, 0] {
            continue;
        }
        let g = n.iter().fold(0i128, |a, b| a.gcd(b));
        let n = n.map(|x| x / g);
        let c = dotp(&n, &p[combo[0]]);
        let vals: Vec<i128> = p.iter().map(|q| dotp(&n, q) - c).collect();
        let (n, c) = if vals.iter().all(|v| *v <= 0) {
            (n, c)
        } else if vals.iter().all(|v| *v >= 0) {
            (n.map(|x| -x), -c)
        } else {
            continue;
        };
        let incident: BTreeSet<usize> = (0..p.len()).filter(|&i| vals[i] == 0).collect();
        out.push((n, c, incident.iter().copied().collect()));
        seen.push(incident);
    }
    (out.len() > D).then_some(out)
}

fn spans_full(normals: &[&[i128; 3]], d: usize) -> bool {
    if d == 2 {
        normals
            .iter()
            .tuple_combinations()
            .any(|(a, b)| a[0] * b[1] - a[1] * b[0] != 0)
    } else {
        normals.iter().tuple_combinations().any(|(a, b, c)| {
            a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
                != 0
        })
    }
}

struct IntConstraints {
    equations: Vec<(Vec<i128>, i128)>,
    inequalities: Vec<(Vec<i128>, i128)>,
}

impl IntConstraints {
    fn strictly_inside<const D: usize>(&self, p: &[i64; D]) -> bool {
        let ev = |n: &[i128]| -> i128 { n.iter().zip(p).map(|(a, b)| a * *b as i128).sum() };
        self.equations.iter().all(|(n, c)| ev(n) == *c) && self.inequalities.iter().all(|(n, c)| ev(n) < *c)
    }
}

fn to_i128(x: &BigInt) -> i128 {
    x.to_i128().expect("constraint coefficient fits in i128")
}

fn integer_row(normal: &[BigRational], offset: &BigRational) -> (Vec<i128>, i128) {
    let mut v = normal.to_vec();
    v.push(offset.clone());
    let ints = primitive_integer(&v);
    let (n, c) = ints.split_at(ints.len() - 1);
    (n.iter().map(to_i128).collect(), to_i128(&c[0]))
}

fn integer_constraints(hull: &Hull<BigRational>) -> IntConstraints {
    IntConstraints {
        equations: hull.equations.iter().map(|(e, c)| integer_row(e, c)).collect(),
        inequalities: hull.facets.iter().map(|f| integer_row(&f.normal, &f.offset)).collect(),
    }
}

/// All lattice points of `p`: bounding-box scan over all but the last
/// coordinate, with the last coordinate's range read off the constraints.
pub fn lattice_points<const D: usize>(p: &Polytope<D>) -> Vec<[i64; D]> {
    let cons = p.constraints();
    let mut lo = [i64::MAX; D];
    let mut hi = [i64::MIN; D];
    for v in &p.vertices {
        for i in 0..D {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let mut out = Vec::new();
    let mut cur = lo;
    let last = D - 1;
    loop {
        let partial = |n: &[i128]| -> i128 { (0..last).map(|i| n[i] * cur[i] as i128).sum() };
        let (mut a, mut b) = (lo[last] as i128, hi[last] as i128);
        for (n, c) in &cons.inequalities {
            let rest = c - partial(n);
            match n[last].signum() {
                1 => b = b.min(Integer::div_floor(&rest, &n[last])),
                -1 => a = a.max(Integer::div_ceil(&rest, &n[last])),
                _ => {
                    if rest < 0 {
                        b = a - 1;
                    }
                }
            }
        }
        for (n, c) in &cons.equations {
            let rest = c - partial(n);
            if n[last] == 0 {
                if rest != 0 {
                    b = a - 1;
                }
            } else if rest % n[last] != 0 {
                b = a - 1;
            } else {
                let v = rest / n[last];
                a = a.max(v);
                b = b.min(v);
            }
        }
        let mut z = a;
        while z <= b {
            let mut q = cur;
            q[last] = z as i64;
            out.push(q);
            z += 1;
        }
        // advance the odometer over coordinates 0..last
        let mut i = 0;
        loop {
            if i == last {
                return out;
            }
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

/// Normalized lattice volume (`D!` times Euclidean volume) of the hull of
/// full-dimensional points; zero for degenerate input.
pub fn lattice_volume<const D: usize>(points: &[[i64; D]]) -> BigInt {
    let pts: Vec<Vec<BigRational>> = points.iter().map(to_rational_point).collect();
    let idx: Vec<usize> = (0..pts.len()).collect();
    let hull = convex_hull(&pts, D).expect("nonempty point set");
    if hull.dim < D {
        return BigInt::zero();
    }
    pulling_triangulation(&pts, &idx)
        .iter()
        .map(|s| simplex_volume(&pts, s))
        .fold(BigInt::zero(), |a, b| a + b)
}

fn simplex_volume(pts: &[Vec<BigRational>], s: &[usize]) -> BigInt {
    let d = pts[0].len();
    let rows: Vec<Vec<BigRational>> = s[1..].iter().map(|&i| sub(&pts[i], &pts[s[0]])).collect();
    Matrix::from_rows(d, rows).det().abs().to_integer()
}

/// Pulling triangulation of `conv(pts[idx])` from its first vertex.
fn pulling_triangulation(pts: &[Vec<BigRational>], idx: &[usize]) -> Vec<Vec<usize>> {
    let sub_pts: Vec<Vec<BigRational>> = idx.iter().map(|&i| pts[i].clone()).collect();
    let hull = convex_hull(&sub_pts, pts[0].len()).expect("nonempty face");
    let verts = hull.vertices();
    if hull.dim == 0 {
        return vec![vec![idx[verts[0]]]];
    }
    let v0 = verts[0];
    let mut out = Vec::new();
    for f in &hull.facets {
        if f.incident.contains(&v0) {
            continue;
        }
        let face: Vec<usize> = f.incident.iter().map(|&i| idx[i]).collect();
        for mut s in pulling_triangulation(pts, &face) {
            s.push(idx[v0]);
            out.push(s);
        }
    }
    out
}

/// Lattice distance of `p` from the affine hyperplane spanned by `plane`.
pub fn lattice_distance(plane: &[LatticePoint], p: &LatticePoint) -> Option<BigInt> {
    let base: Vec<Vec<BigRational>> = plane.iter().map(to_rational_point).collect();
    let dirs: Vec<Vec<BigRational>> = base[1..].iter().map(|q| sub(q, &base[0])).collect();
    let normals = Matrix::from_rows(3, dirs).kernel_basis();
    if normals.len() != 1 {
        return None;
    }
    let n = primitive_integer(&normals[0]);
    let n: Vec<BigRational> = n.into_iter().map(BigRational::from_integer).collect();
    let d = dot(&n, &sub(&to_rational_point(p), &base[0]));
    Some(d.abs().to_integer())
}

// ---------------------------------------------------------------------------
// Circuits

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CircuitType {
    A,
    B,
    C,
    D,
    E,
}

impl CircuitType {
    pub fn from_sizes(pos: usize, neg: usize) -> Option<Self> {
        match (pos.min(neg), pos.max(neg)) {
            (2, 3) => Some(CircuitType::A),
            (1, 4) => Some(CircuitType::B),
            (1, 3) => Some(CircuitType::C),
            (2, 2) => Some(CircuitType::D),
            (1, 2) => Some(CircuitType::E),
            _ => None,
        }
    }

    /// Dimension of the affine span of the circuit.
    pub fn dim(self) -> usize {
        match self {
            CircuitType::A | CircuitType::B => 3,
            CircuitType::C | CircuitType::D => 2,
            CircuitType::E => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadonPartition {
    pub coefficients: Vec<BigInt>,
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

impl RadonPartition {
    pub fn sizes(&self) -> (usize, usize) {
        (self.positive.len(), self.negative.len())
    }

    pub fn circuit_type(&self) -> Option<CircuitType> {
        CircuitType::from_sizes(self.positive.len(), self.negative.len())
    }
}

/// The affine dependence of a circuit, as a primitive integer vector whose
/// first coefficient is positive.
pub fn radon_partition<const D: usize>(points: &[[i64; D]]) -> Result<RadonPartition, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Empty);
    }
    let a = affine_matrix(points);
    let ker = a.kernel_basis();
    let support = |v: &[BigRational]| -> Vec<usize> { (0..v.len()).filter(|&i| !v[i].is_zero()).collect() };
    match ker.len() {
        0 => Err(GeometryError::Independent),
        1 => {
            let v = &ker[0];
            let s = support(v);
            if s.len() < points.len() {
                return Err(GeometryError::DependentSubset(s));
            }
            let mut coeffs = primitive_integer(v);
            normalize_first_positive(&mut coeffs);
            let positive = (0..coeffs.len()).filter(|&i| coeffs[i].is_positive()).collect();
            let negative = (0..coeffs.len()).filter(|&i| coeffs[i].is_negative()).collect();
            Ok(RadonPartition {
                coefficients: coeffs,
                positive,
                negative,
            })
        }
        _ => Err(GeometryError::DependentSubset(support(&ker[0]))),
    }
}

pub fn classify_circuit<const D: usize>(points: &[[i64; D]]) -> Result<CircuitType, GeometryError> {
    let r = radon_partition(points)?;
    Ok(r.circuit_type()
        .expect("circuits in dimension <= 3 have one of five shapes"))
}

/// The `(D+1) x n` matrix with a row of ones above the coordinates.
pub fn affine_matrix<const D: usize>(points: &[[i64; D]]) -> Matrix<BigRational> {
    let n = points.len();
    let mut rows = vec![vec![BigRational::one(); n]];
    for c in 0..D {
        rows.push(points.iter().map(|p| rat(p[c])).collect());
    }
    Matrix::from_rows(n, rows)
}

/// Affine rank (dimension of the affine span plus one).
pub fn affine_rank<const D: usize>(points: &[[i64; D]]) -> usize {
    if points.is_empty() {
        return 0;
    }
    affine_matrix(points).rank()
}

// ---------------------------------------------------------------------------
// Unimodular maps

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct UnimodularMap<const D: usize> {
    #[serde(with = "serde_arrays")]
    pub linear: [[i64; D]; D],
    #[serde(with = "serde_arrays_1d")]
    pub translation: [i64; D],
}

mod serde_arrays {
    use serde::ser::{SerializeSeq, Serializer};

    pub fn serialize<S: Serializer, const D: usize>(m: &[[i64; D]; D], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(D))?;
        for row in m {
            seq.serialize_element(&row[..])?;
        }
        seq.end()
    }
}

mod serde_arrays_1d {
    use serde::Serializer;

    pub fn serialize<S: Serializer, const D: usize>(v: &[i64; D], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("linear part has determinant {0}, not +-1")]
pub struct NotUnimodular(pub BigInt);

impl<const D: usize> UnimodularMap<D> {
    pub fn new(linear: [[i64; D]; D], translation: [i64; D]) -> Result<Self, NotUnimodular> {
        let m = UnimodularMap { linear, translation };
        let d = m.det();
        if d.abs() != BigInt::one() {
            return Err(NotUnimodular(d));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        let mut linear = [[0; D]; D];
        for (i, row) in linear.iter_mut().enumerate() {
            row[i] = 1;
        }
        UnimodularMap {
            linear,
            translation: [0; D],
        }
    }

    fn linear_matrix(&self) -> Matrix<BigRational> {
        Matrix::from_rows(D, self.linear.iter().map(to_rational_point).collect())
    }

    pub fn det(&self) -> BigInt {
        self.linear_matrix().det().to_integer()
    }

    pub fn apply(&self, p: &[i64; D]) -> [i64; D] {
        let mut out = self.translation;
        for (i, o) in out.iter_mut().enumerate() {
            for (j, pj) in p.iter().enumerate() {
                *o += self.linear[i][j] * pj;
            }
        }
        out
    }

    pub fn apply_all(&self, pts: &[[i64; D]]) -> Vec<[i64; D]> {
        pts.iter().map(|p| self.apply(p)).collect()
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &Self) -> Self {
        let mut linear = [[0; D]; D];
        for (i, row) in linear.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..D).map(|k| self.linear[i][k] * first.linear[k][j]).sum();
            }
        }
        UnimodularMap {
            linear,
            translation: self.apply(&first.translation),
        }
    }

    pub fn inverse(&self) -> Self {
        let m = self.linear_matrix();
        let mut linear = [[0; D]; D];
        for j in 0..D {
            let mut e = vec![BigRational::zero(); D];
            e[j] = BigRational::one();
            let col = m.solve_affine(&e).unique().expect("unimodular").to_vec();
            for i in 0..D {
                linear[i][j] = col[i].to_integer().to_i64().expect("integral inverse");
            }
        }
        let mut inv = UnimodularMap {
            linear,
            translation: [0; D],
        };
        let t = inv.apply(&self.translation);
        inv.translation = t.map(|x| -x);
        inv
    }

    /// Action on the dual space: `y -> M^{-T} y`. A tropical surface of a
    /// configuration moved by this map is the image of the original under
    /// this action.
    pub fn dual_apply(&self, y: &[BigRational]) -> Vec<BigRational> {
        let inv = self.inverse();
        (0..D)
            .map(|i| {
                (0..D)
                    .map(|j| rat(inv.linear[j][i]) * y[j].clone())
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }
}

/// The unique affine map with `map(src[i]) = dst[i]` for an affine basis
/// `src`, if it is integral and unimodular.
pub fn unimodular_from_basis<const D: usize>(src: &[[i64; D]], dst: &[[i64; D]]) -> Option<UnimodularMap<D>> {
    let x: Vec<Vec<BigRational>> = (1..=D).map(|j| to_rational_point(&sub_arr(&src[j], &src[0]))).collect();
    let y: Vec<Vec<BigRational>> = (1..=D).map(|j| to_rational_point(&sub_arr(&dst[j], &dst[0]))).collect();
    // Rows of X are source edges; solve X M^T = Y.
    let xm = Matrix::from_rows(D, x);
    if xm.rank() < D {
        return None;
    }
    let mut linear = [[0i64; D]; D];
    for i in 0..D {
        let rhs: Vec<BigRational> = y.iter().map(|r| r[i].clone()).collect();
        let row = xm.solve_affine(&rhs).unique()?.to_vec();
        for j in 0..D {
            if !row[j].is_integer() {
                return None;
            }
            linear[i][j] = row[j].to_integer().to_i64()?;
        }
    }
    let mut m = UnimodularMap {
        linear,
        translation: [0; D],
    };
    if m.det().abs() != BigInt::one() {
        return None;
    }
    let moved = m.apply(&src[0]);
    for i in 0..D {
        m.translation[i] = dst[0][i] - moved[i];
    }
    Some(m)
}

fn sub_arr<const D: usize>(a: &[i64; D], b: &[i64; D]) -> [i64; D] {
    let mut o = [0; D];
    for i in 0..D {
        o[i] = a[i] - b[i];
    }
    o
}

fn same_set<const D: usize>(a: &[[i64; D]], b: &[[i64; D]]) -> bool {
    let sa: BTreeSet<[i64; D]> = a.iter().copied().collect();
    let sb: BTreeSet<[i64; D]> = b.iter().copied().collect();
    sa == sb && sa.len() == a.len()
}

pub fn is_unimodular_simplex(src: &[LatticePoint]) -> bool {
    src.len() == 4 && lattice_volume(src) == BigInt::one()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CatalogTarget {
    Pentatope,
    Tetrahedron,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no catalog normal form matches")]
pub struct NoMatch;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized<const D: usize> {
    pub map: UnimodularMap<D>,
    pub points: Vec<[i64; D]>,
    pub entry: String,
}

/// Searches for a unimodular affine map bringing `points` onto a normal
/// form from the catalog. Already normalized input yields the identity.
pub fn normalize(points: &[LatticePoint], target: CatalogTarget) -> Result<Normalized<3>, NoMatch> {
    match target {
        CatalogTarget::Pentatope => normalize_pentatope(points),
        CatalogTarget::Tetrahedron => {
            let forms: Vec<(String, Vec<LatticePoint>)> = catalog_tetrahedra()
                .into_iter()
                .map(|t| (t.key.clone(), t.vertices().to_vec()))
                .collect();
            match_forms(points, &forms)
        }
        CatalogTarget::Triangle => Err(NoMatch),
    }
}

pub fn normalize_triangle(points: &[LatticePoint2]) -> Result<Normalized<2>, NoMatch> {
    let forms: Vec<(String, Vec<LatticePoint2>)> = catalog_triangles()
        .into_iter()
        .map(|t| (t.key.clone(), t.vertices.to_vec()))
        .collect();
    match_forms(points, &forms)
}

fn match_forms<const D: usize>(
    points: &[[i64; D]],
    forms: &[(String, Vec<[i64; D]>)],
) -> Result<Normalized<D>, NoMatch> {
    for (key, form) in forms {
        if same_set(points, form) {
            return Ok(Normalized {
                map: UnimodularMap::identity(),
                points: points.to_vec(),
                entry: key.clone(),
            });
        }
    }
    for (key, form) in forms {
        if form.len() != points.len() {
            continue;
        }
        for src in points.iter().copied().permutations(D + 1) {
            if let Some(m) = unimodular_from_basis(&src, &form[..D + 1]) {
                let moved = m.apply_all(points);
                if same_set(&moved, form) {
                    return Ok(Normalized {
                        map: m,
                        points: moved,
                        entry: key.clone(),
                    });
                }
            }
        }
    }
    Err(NoMatch)
}

fn pentatope_form(p: &[LatticePoint]) -> Option<(i64, i64)> {
    let base: BTreeSet<LatticePoint> = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]].into_iter().collect();
    let rest: Vec<&LatticePoint> = p.iter().filter(|q| !base.contains(*q)).collect();
    if p.len() != 5 || rest.len() != 1 {
        return None;
    }
    let q = rest[0];
    (q[0] == 1 && q[1].gcd(&q[2]) == 1).then_some((q[1], q[2]))
}

fn normalize_pentatope(points: &[LatticePoint]) -> Result<Normalized<3>, NoMatch> {
    let key = |(p, q): (i64, i64)| format!("a1/({p},{q})");
    if let Some(pq) = pentatope_form(points) {
        return Ok(Normalized {
            map: UnimodularMap::identity(),
            points: points.to_vec(),
            entry: key(pq),
        });
    }
    if points.len() != 5 {
        return Err(NoMatch);
    }
    let std: [LatticePoint; 4] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]];
    for src in points.iter().copied().permutations(4) {
        if let Some(m) = unimodular_from_basis(&src, &std) {
            let moved = m.apply_all(points);
            if let Some(pq) = pentatope_form(&moved) {
                return Ok(Normalized {
                    map: m,
                    points: moved,
                    entry: key(pq),
                });
            }
        }
    }
    Err(NoMatch)
}

// ---------------------------------------------------------------------------
// Catalogs

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TetrahedronEntry {
    pub key: String,
    pub apex: LatticePoint,
    pub volume: u32,
}

impl TetrahedronEntry {
    pub fn vertices(&self) -> [LatticePoint; 4] {
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], self.apex]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleEntry {
    pub key: String,
    pub vertices: [LatticePoint2; 3],
    /// Whether some choice of third coordinates lifts the triangle to the
    /// projection of a six-point polytope over a collinear circuit.
    pub has_lift: bool,
}

/// Which family of polytopes over a collinear circuit a case belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EFamily {
    /// No plane through the circuit line has all three points on one side.
    Surrounding,
    /// Some plane through the circuit line has all three points on one side.
    OneSided,
}

/// A parametric normal form for three points `m, m', m''` over the circuit
/// `(0,0,0), (0,0,1), (0,0,2)`.
#[derive(Clone, Debug, Serialize)]
pub struct ECaseRecord {
    pub key: String,
    pub family: EFamily,
    pub statement: String,
    #[serde(skip)]
    pub check: fn(&[LatticePoint; 3]) -> bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Catalog {
    pub pentatope: String,
    pub tetrahedra: Vec<TetrahedronEntry>,
    pub triangles: Vec<TriangleEntry>,
    pub e_cases: Vec<ECaseRecord>,
}

pub const TETRAHEDRON_APEXES: [(LatticePoint, u32); 8] = [
    ([3, 3, 4], 4),
    ([2, 2, 5], 5),
    ([2, 4, 7], 7),
    ([2, 6, 11], 11),
    ([2, 7, 13], 13),
    ([2, 9, 17], 17),
    ([2, 13, 19], 19),
    ([3, 7, 20], 20),
];

pub const TRIANGLES: [[LatticePoint2; 3]; 5] = [
    [[0, 1], [1, 0], [-1, -1]],
    [[0, 1], [2, 1], [-1, -1]],
    [[0, 1], [3, 1], [-1, -1]],
    [[0, 1], [3, 1], [-3, -2]],
    [[0, 1], [4, 1], [-2, -1]],
];

pub fn catalog_tetrahedra() -> Vec<TetrahedronEntry> {
    TETRAHEDRON_APEXES
        .iter()
        .map(|&(apex, volume)| TetrahedronEntry {
            key: format!("a2/vol{volume}"),
            apex,
            volume,
        })
        .collect()
}

pub fn catalog_triangles() -> Vec<TriangleEntry> {
    TRIANGLES
        .iter()
        .enumerate()
        .map(|(i, &vertices)| TriangleEntry {
            key: format!("T{}", i + 1),
            vertices,
            has_lift: i < 4,
        })
        .collect()
}

fn lifted(tri: usize, g: [i64; 3]) -> [LatticePoint; 3] {
    let t = TRIANGLES[tri];
    [0, 1, 2].map(|i| [t[i][0], t[i][1], g[i]])
}

fn e1_form(tri: usize, p: &[LatticePoint; 3]) -> Option<[i64; 3]> {
    let g = [p[0][2], p[1][2], p[2][2]];
    (lifted(tri, g) == *p).then_some(g)
}

fn e1a(p: &[LatticePoint; 3]) -> bool {
    e1_form(0, p).is_some()
}

fn e1b(p: &[LatticePoint; 3]) -> bool {
    e1_form(1, p).is_some_and(|g| (g[0] - g[1]).rem_euclid(2) != 0)
}

fn e1c(p: &[LatticePoint; 3]) -> bool {
    e1_form(2, p).is_some_and(|g| (g[0] - g[1]).rem_euclid(3) != 0 && (g[1] - g[2]).rem_euclid(2) != 0)
}

fn e1d(p: &[LatticePoint; 3]) -> bool {
    e1_form(3, p).is_some_and(|g| {
        let r = g.map(|x| x.rem_euclid(3));
        r[0] != r[1] && r[1] != r[2] && r[0] != r[2]
    })
}

fn e2a(p: &[LatticePoint; 3]) -> bool {
    let [m, m1, m2] = p;
    m[0] == -1 && m[1] == 0 && *m1 == [0, 1, m1[2]] && m2[1] == 1 && m2[0] >= 1 && (m2[2] - m1[2]).gcd(&m2[0]) == 1
}

fn e2b(p: &[LatticePoint; 3]) -> bool {
    let [m, m1, m2] = p;
    if m[1] != 1 || m1[1] != 1 || m2[1] != 1 {
        return false;
    }
    let (l, k) = (m1[0] - m[0], m1[2] - m[2]);
    m2[0] == m[0] + 2 * l && m2[2] == m[2] + 2 * k && l.gcd(&k) == 1
}

fn e2c(p: &[LatticePoint; 3]) -> bool {
    let [m, m1, m2] = p;
    if m[1] != 1 || m1[1] != 1 || m2[1] != 1 {
        return false;
    }
    let det = (m1[0] - m[0]) * (m2[2] - m[2]) - (m2[0] - m[0]) * (m1[2] - m[2]);
    det.abs() == 1
}

pub fn catalog_e_cases() -> Vec<ECaseRecord> {
    let rec = |key: &str, family, statement: &str, check| ECaseRecord {
        key: key.to_string(),
        family,
        statement: statement.to_string(),
        check,
    };
    use EFamily::*;
    vec![
        rec(
            "E1/a",
            Surrounding,
            "m=(0,1,g), m'=(1,0,g'), m''=(-1,-1,g''); g, g', g'' arbitrary",
            e1a,
        ),
        rec(
            "E1/b",
            Surrounding,
            "m=(0,1,g), m'=(2,1,g'), m''=(-1,-1,g''); g != g' mod 2",
            e1b,
        ),
        rec(
            "E1/c",
            Surrounding,
            "m=(0,1,g), m'=(3,1,g'), m''=(-1,-1,g''); g != g' mod 3, g' != g'' mod 2",
            e1c,
        ),
        rec(
            "E1/d",
            Surrounding,
            "m=(0,1,g), m'=(3,1,g'), m''=(-3,-2,g''); g, g', g'' pairwise distinct mod 3",
            e1d,
        ),
        rec(
            "E2/a",
            OneSided,
            "m=(-1,0,g), m'=(0,1,g'), m''=(a'',1,g''); a'' >= 1, gcd(g''-g', a'') = 1",
            e2a,
        ),
        rec(
            "E2/b",
            OneSided,
            "m=(a,1,g), m'=(a+l,1,g+k), m''=(a+2l,1,g+2k); gcd(l,k) = 1",
            e2b,
        ),
        rec(
            "E2/c",
            OneSided,
            "m=(a,1,g), m'=(a',1,g'), m''=(a'',1,g''); det((a'-a, a''-a), (g'-g, g''-g)) = +-1",
            e2c,
        ),
    ]
}

pub fn catalogs() -> Catalog {
    Catalog {
        pentatope: "(0,0,0), (1,0,0), (0,1,0), (0,0,1), (1,p,q) with gcd(p,q) = 1".to_string(),
        tetrahedra: catalog_tetrahedra(),
        triangles: catalog_triangles(),
        e_cases: catalog_e_cases(),
    }
}

/// The edge condition for lifting a lattice triangle with third
/// coordinates `g`: no relative interior lattice point of an edge may lift
/// to a lattice point, i.e. `gcd(k+1, dg) = 1` for an edge with `k`
/// interior lattice points.
pub fn triangle_lift_condition(tri: &[LatticePoint2; 3], g: [i64; 3]) -> bool {
    (0..3).all(|i| {
        let j = (i + 1) % 3;
        let steps = (tri[j][0] - tri[i][0]).gcd(&(tri[j][1] - tri[i][1]));
        steps.gcd(&(g[j] - g[i])) == 1
    })
}

/// The collinear circuit used by the catalogs.
pub const Z_CIRCUIT: [LatticePoint; 3] = [[0, 0, 0], [0, 0, 1], [0, 0, 2]];

/// Lattice points of the hull of the collinear circuit and three points.
pub fn e_polytope_lattice_points(m: &[LatticePoint; 3]) -> Vec<LatticePoint> {
    let mut pts = Z_CIRCUIT.to_vec();
    pts.extend_from_slice(m);
    Polytope::hull_of(&pts).expect("nonempty").lattice_points()
}

/// Third coordinate above the origin of the plane through `m, m', m''`,
/// when their projections to the first two coordinates surround it. The
/// hull with the collinear circuit meets the circuit line in
/// `[min(0, h), max(2, h)]`, so six lattice points require `-1 < h < 3`.
pub fn height_over_origin(m: &[LatticePoint; 3]) -> Option<BigRational> {
    let rows = vec![
        vec![rat(1), rat(1), rat(1)],
        m.iter().map(|p| rat(p[0])).collect(),
        m.iter().map(|p| rat(p[1])).collect(),
    ];
    let lambda = Matrix::from_rows(3, rows)
        .solve_affine(&[rat(1), rat(0), rat(0)])
        .unique()?
        .to_vec();
    if lambda.iter().any(|l| l.is_negative()) {
        return None;
    }
    Some(dot(&lambda, &m.iter().map(|p| rat(p[2])).collect::<Vec<_>>()))
}

// ---------------------------------------------------------------------------
// Pyramids over a type-C circuit

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PyramidVerdict {
    pub admissible: bool,
    pub distance: i64,
    pub extra_points: Vec<LatticePoint>,
}

/// Whether the pyramid over a type-C circuit with the given apex has no
/// lattice points besides its five defining points.
pub fn pyramid_height_admissible(base: &[LatticePoint], apex: &LatticePoint) -> Result<PyramidVerdict, GeometryError> {
    let t = classify_circuit(base)?;
    if t != CircuitType::C {
        return Err(GeometryError::WrongCircuitType {
            expected: CircuitType::C,
            found: t,
        });
    }
    let distance = lattice_distance(base, apex)
        .expect("a type-C circuit spans a plane")
        .to_i64()
        .expect("small distance");
    let mut pts = base.to_vec();
    pts.push(*apex);
    let poly = Polytope::hull_of(&pts)?;
    if poly.dim < 3 {
        return Err(GeometryError::NotFullDimensional);
    }
    let given: BTreeSet<LatticePoint> = pts.iter().copied().collect();
    let extra_points: Vec<LatticePoint> = poly
        .lattice_points()
        .into_iter()
        .filter(|p| !given.contains(p))
        .collect();
    Ok(PyramidVerdict {
        admissible: extra_points.is_empty(),
        distance,
        extra_points,
    })
}

/// The type-C circuit `(0,0,0), (0,1,2), (0,2,1)` with interior point `(0,1,1)`.
pub const STANDARD_C_BASE: [LatticePoint; 4] = [[0, 0, 0], [0, 1, 2], [0, 2, 1], [0, 1, 1]];
