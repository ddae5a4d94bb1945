//! Singular points of tropical surfaces: candidates, lift certificates and
//! case labels.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::dual_complex::tropical_eval;
use crate::lattice::{
    lattice_distance, lattice_volume, radon_partition, unimodular_from_basis, CircuitType, LatticePoint, UnimodularMap,
};
use crate::linalg::{dot, primitive_integer, rat, sub, AffineSolution};
use crate::matroid::{
    accepted_refinement, chains_case, defect, flag_of_subsets, gale_dual, loops, ChainsCase, ChainsTag, Flag, GaleDual,
    DEFAULT_ENUMERATION_BOUND,
};
use crate::oracle::{singular_locus, OraclePiece};
use crate::polyhedron::Polyhedron;
use crate::subdivision::{
    equal_term_point, equal_term_system, extract_circuit, is_maximal_dimensional_type, labels, regular_subdivision,
    HeightVector, MarkedSubdivision, PointConfig,
};
use crate::{RatMatrix, Rational};

/// The vector `(m . x)_m`.
pub fn lineality_vector(cfg: &PointConfig, x: &[Rational]) -> HeightVector {
    HeightVector((0..cfg.len()).map(|i| dot(&cfg.rational_point(i), x)).collect())
}

/// The equalities that produced a candidate, besides those of the circuit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Structure {
    Vertex,
    Pair([usize; 2]),
    Triple([usize; 3]),
    Pairs([usize; 2], [usize; 2]),
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Vertex => f.write_str("vertex"),
            Structure::Pair(p) => write!(f, "pair {}", labels(p)),
            Structure::Triple(t) => write!(f, "triple {}", labels(t)),
            Structure::Pairs(p, q) => write!(f, "pairs {} | {}", labels(p), labels(q)),
        }
    }
}

impl Structure {
    fn groups(&self) -> Vec<Vec<usize>> {
        match self {
            Structure::Vertex => Vec::new(),
            Structure::Pair(p) => vec![p.to_vec()],
            Structure::Triple(t) => vec![t.to_vec()],
            Structure::Pairs(p, q) => vec![p.to_vec(), q.to_vec()],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub point: Vec<Rational>,
    pub structure: Structure,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Candidates {
    pub points: Vec<Candidate>,
    /// Structures whose equations leave a positive-dimensional set inside
    /// the closed cell dual to the circuit.
    pub underdetermined: Vec<Structure>,
}

enum Solved {
    Unique(Vec<Rational>),
    Family,
    Empty,
}

fn structure_system(
    cfg: &PointConfig,
    u: &HeightVector,
    circuit: &[usize],
    s: &Structure,
) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let (mut rows, mut rhs) = equal_term_system(cfg, u, circuit);
    for g in s.groups() {
        let (r, b) = equal_term_system(cfg, u, &g);
        rows.extend(r);
        rhs.extend(b);
    }
    (rows, rhs)
}

fn solve_structure(cfg: &PointConfig, u: &HeightVector, circuit: &[usize], s: &Structure) -> Solved {
    let (rows, rhs) = structure_system(cfg, u, circuit, s);
    match RatMatrix::from_rows(3, rows).solve_affine(&rhs) {
        AffineSolution::Infeasible { .. } => Solved::Empty,
        AffineSolution::Feasible { particular, kernel } if kernel.is_empty() => Solved::Unique(particular),
        AffineSolution::Feasible { .. } => Solved::Family,
    }
}

/// `p` lies in the closed cell of the surface dual to `circuit`.
pub fn in_dual_cell(cfg: &PointConfig, u: &HeightVector, p: &[Rational], circuit: &[usize]) -> bool {
    let (_, arg) = tropical_eval(cfg, u, p);
    circuit.iter().all(|i| arg.contains(i))
}

fn dual_cell_polyhedron(cfg: &PointConfig, u: &HeightVector, circuit: &[usize], s: &Structure) -> Polyhedron {
    let mut poly = Polyhedron::new(3);
    let (rows, rhs) = structure_system(cfg, u, circuit, s);
    for (r, b) in rows.into_iter().zip(rhs) {
        poly.equal(r, b);
    }
    let c0 = circuit[0];
    let base = cfg.rational_point(c0);
    for m in (0..cfg.len()).filter(|m| !circuit.contains(m)) {
        poly.at_most(sub(&cfg.rational_point(m), &base), &u.0[c0] - &u.0[m]);
    }
    poly
}

fn pairs_of(idx: &[usize]) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for (k, &x) in idx.iter().enumerate() {
        for &y in &idx[k + 1..] {
            out.push([x, y]);
        }
    }
    out
}

fn structures_for(circuit_type: CircuitType, others: &[usize]) -> Vec<Structure> {
    match circuit_type {
        CircuitType::A | CircuitType::B => vec![Structure::Vertex],
        CircuitType::C | CircuitType::D => pairs_of(others).into_iter().map(Structure::Pair).collect(),
        CircuitType::E => {
            let mut out = Vec::new();
            for (k, &x) in others.iter().enumerate() {
                for [y, z] in pairs_of(&others[k + 1..]) {
                    out.push(Structure::Triple([x, y, z]));
                }
            }
            let pairs = pairs_of(others);
            for (k, p) in pairs.iter().enumerate() {
                for q in &pairs[k + 1..] {
                    if !p.iter().any(|x| q.contains(x)) {
                        out.push(Structure::Pairs(*p, *q));
                    }
                }
            }
            out
        }
    }
}

/// Solutions of the equal-height systems for every structure compatible
/// with the circuit's dimension, restricted to the closed dual cell.
pub fn candidate_points(
    cfg: &PointConfig,
    u: &HeightVector,
    circuit: &[usize],
    circuit_type: CircuitType,
) -> Candidates {
    let others: Vec<usize> = (0..cfg.len()).filter(|i| !circuit.contains(i)).collect();
    let mut out = Candidates::default();
    for s in structures_for(circuit_type, &others) {
        match solve_structure(cfg, u, circuit, &s) {
            Solved::Unique(p) => {
                if in_dual_cell(cfg, u, &p, circuit) {
                    out.points.push(Candidate { point: p, structure: s });
                }
            }
            Solved::Family => {
                if dual_cell_polyhedron(cfg, u, circuit, &s)
                    .describe()
                    .is_some_and(|piece| piece.dim > 0)
                {
                    out.underdetermined.push(s);
                }
            }
            Solved::Empty => {}
        }
    }
    out
}

/// Shifted heights and accepted flag for a singular point.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// `u + v(p)`.
    pub shifted: HeightVector,
    /// The accepted maximal flag.
    pub flag: Flag,
    pub case: ChainsCase,
    /// The coarser flag of `shifted` when it is not maximal itself.
    pub boundary_of: Option<Flag>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LiftVerdict {
    Accept(Certificate),
    Reject(String),
}

impl LiftVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, LiftVerdict::Accept(_))
    }
}

pub fn lift_check(cfg: &PointConfig, u: &HeightVector, p: &[Rational]) -> LiftVerdict {
    lift_check_with(cfg, &gale_dual(cfg), u, p)
}

pub fn lift_check_with(cfg: &PointConfig, b: &GaleDual, u: &HeightVector, p: &[Rational]) -> LiftVerdict {
    let shifted = u.add(&lineality_vector(cfg, p));
    let flag = flag_of_subsets(&shifted);
    match chains_case(cfg, b, &flag) {
        Ok(case) => LiftVerdict::Accept(Certificate {
            shifted,
            flag,
            case,
            boundary_of: None,
        }),
        Err(reject) => {
            if flag.len() < cfg.len() - 4 {
                if let Some((fine, case)) = accepted_refinement(cfg, b, &flag) {
                    return LiftVerdict::Accept(Certificate {
                        shifted,
                        flag: fine,
                        case,
                        boundary_of: Some(flag),
                    });
                }
                return LiftVerdict::Reject(format!("flag {} has no accepted refinement", flag.describe()));
            }
            LiftVerdict::Reject(format!("flag {}: {reject}", flag.describe()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CaseLabel {
    A1,
    A2(BigInt),
    B11Ratio,
    B11Formula,
    B11Unlisted,
    B12,
    B2,
    CBarycenter,
    CVirtualBarycenter,
    DTrapeze,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseLabel::A1 => f.write_str("a1"),
            CaseLabel::A2(m) => write!(f, "a2({m})"),
            CaseLabel::B11Ratio => f.write_str("b11(ratio)"),
            CaseLabel::B11Formula => f.write_str("b11(formula)"),
            CaseLabel::B11Unlisted => f.write_str("b11(unlisted)"),
            CaseLabel::B12 => f.write_str("b12"),
            CaseLabel::B2 => f.write_str("b2"),
            CaseLabel::CBarycenter => f.write_str("c-barycenter"),
            CaseLabel::CVirtualBarycenter => f.write_str("c-virtual-barycenter"),
            CaseLabel::DTrapeze => f.write_str("d-trapeze"),
        }
    }
}

/// The dual edge of a planar circuit and the pyramids over it.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMetric {
    /// Vertices of the edge, one per pyramid cell.
    pub endpoints: Vec<Vec<Rational>>,
    /// Lattice height of each pyramid apex over the circuit plane.
    pub apex_heights: Vec<BigInt>,
    pub apexes: Vec<usize>,
    /// Direction of the unbounded end, if the edge is a ray.
    pub ray: Option<Vec<Rational>>,
    pub ratio: Option<String>,
    /// Signed distance from the height-3 endpoint by the closed formula.
    pub distance: Option<Rational>,
    /// The point satisfies the identity named by its label.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarycenterMetric {
    pub pairs: Vec<[usize; 2]>,
    /// Vertices of the dual 2-cell, or virtual vertices outside it.
    pub vertices: Vec<Vec<Rational>>,
    /// Signed lattice areas of the projected triangles.
    pub weights: Vec<BigInt>,
    /// `sum w_i (V_i - p) = 0`.
    pub identity: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrapezeMetric {
    pub corners: Vec<Vec<Rational>>,
    /// `p` is the average of the corners.
    pub average: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    Vertex { multiplicity: BigInt },
    Edge(EdgeMetric),
    Barycenter(BarycenterMetric),
    Trapeze(TrapezeMetric),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularPoint {
    pub location: Vec<Rational>,
    pub label: CaseLabel,
    pub metric: Metric,
    pub certificate: Certificate,
    pub sources: Vec<Structure>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RefusalKind {
    Codimension,
    NotMaximalType,
    NotGeneric,
    Degenerate,
    PyramidHeight,
    Enumeration,
}

impl fmt::Display for RefusalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RefusalKind::Codimension => "codimension",
            RefusalKind::NotMaximalType => "not-maximal-type",
            RefusalKind::NotGeneric => "not-generic",
            RefusalKind::Degenerate => "degenerate",
            RefusalKind::PyramidHeight => "pyramid-height",
            RefusalKind::Enumeration => "enumeration",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refusal {
    pub kind: RefusalKind,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityReport {
    pub generic: bool,
    pub codim: usize,
    pub circuit: Option<(Vec<usize>, CircuitType)>,
    pub points: Vec<SingularPoint>,
    /// Brute-force pieces of the singular locus, filled when the locus may
    /// have positive dimension.
    pub families: Vec<OraclePiece>,
    /// Reasons the input is not generic.
    pub violations: Vec<String>,
    pub refusals: Vec<Refusal>,
}

impl SingularityReport {
    pub fn locations(&self) -> Vec<Vec<Rational>> {
        self.points.iter().map(|p| p.location.clone()).collect()
    }

    pub fn is_refused(&self) -> bool {
        !self.refusals.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassifyOptions {
    /// Report the brute-force locus instead of refusing when the secondary
    /// cone does not have codimension one.
    pub lift_codim_gate: bool,
    pub oracle_bound: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            lift_codim_gate: false,
            oracle_bound: DEFAULT_ENUMERATION_BOUND,
        }
    }
}

pub fn classify(cfg: &PointConfig, u: &HeightVector) -> SingularityReport {
    classify_with(cfg, u, &ClassifyOptions::default())
}

fn refuse(report: &mut SingularityReport, kind: RefusalKind, message: String) {
    report.refusals.push(Refusal { kind, message });
}

pub fn classify_with(cfg: &PointConfig, u: &HeightVector, opts: &ClassifyOptions) -> SingularityReport {
    let t = regular_subdivision(cfg, u);
    let mut report = SingularityReport {
        generic: false,
        codim: t.dim_l_t,
        circuit: None,
        points: Vec::new(),
        families: Vec::new(),
        violations: Vec::new(),
        refusals: Vec::new(),
    };
    let b = gale_dual(cfg);
    let lone = loops(&b);
    if !lone.is_empty() {
        refuse(
            &mut report,
            RefusalKind::Degenerate,
            format!(
                "points {} lie in no circuit, so the surface has no singular points",
                labels(&lone)
            ),
        );
        return report;
    }
    if t.dim_l_t != 1 {
        if !opts.lift_codim_gate || t.dim_l_t == 0 {
            refuse(
                &mut report,
                RefusalKind::Codimension,
                format!("secondary cone has codimension {}, not 1", t.dim_l_t),
            );
            return report;
        }
        match singular_locus(cfg, u, opts.oracle_bound) {
            Ok(pieces) => report.families = pieces,
            Err(e) => refuse(&mut report, RefusalKind::Enumeration, e.to_string()),
        }
        report.violations.push(format!(
            "secondary cone has codimension {}; the singular locus is not finite",
            t.dim_l_t
        ));
        return report;
    }
    if !is_maximal_dimensional_type(cfg, &t) {
        refuse(
            &mut report,
            RefusalKind::NotMaximalType,
            "some lattice point of the polytope is not marked".into(),
        );
        return report;
    }
    let circuit = match extract_circuit(cfg, &t) {
        Ok(c) => c,
        Err(e) => {
            refuse(&mut report, RefusalKind::Degenerate, e.to_string());
            return report;
        }
    };
    report.circuit = Some((circuit.indices.clone(), circuit.circuit_type));
    let cands = candidate_points(cfg, u, &circuit.indices, circuit.circuit_type);
    let mut accepted: BTreeMap<Vec<Rational>, (Certificate, Vec<Structure>)> = BTreeMap::new();
    for c in cands.points {
        if let Some(entry) = accepted.get_mut(&c.point) {
            entry.1.push(c.structure);
            continue;
        }
        if let LiftVerdict::Accept(cert) = lift_check_with(cfg, &b, u, &c.point) {
            accepted.insert(c.point, (cert, vec![c.structure]));
        }
    }
    for (location, (certificate, sources)) in accepted {
        match label_point(
            cfg,
            u,
            &t,
            &circuit.indices,
            circuit.circuit_type,
            &certificate,
            &location,
        ) {
            Ok((label, metric)) => report.points.push(SingularPoint {
                location,
                label,
                metric,
                certificate,
                sources,
            }),
            Err(r) => report.refusals.push(r),
        }
    }
    if !cands.underdetermined.is_empty() {
        let which: Vec<String> = cands.underdetermined.iter().map(|s| s.to_string()).collect();
        match singular_locus(cfg, u, opts.oracle_bound) {
            Ok(pieces) => {
                report.families = pieces.into_iter().filter(|p| p.piece.dim > 0).collect();
                if !report.families.is_empty() {
                    report
                        .violations
                        .push(format!("positive-dimensional singular locus from {}", which.join(", ")));
                }
            }
            Err(e) => refuse(
                &mut report,
                RefusalKind::Enumeration,
                format!("{} leave a family of solutions: {e}", which.join(", ")),
            ),
        }
    }
    for p in &report.points {
        let at = format_point(&p.location);
        if let Some(coarse) = &p.certificate.boundary_of {
            report
                .violations
                .push(format!("{at}: flag {} is not of top dimension", coarse.describe()));
        }
        let d = defect(cfg, &p.certificate.flag);
        if d.dim > 0 {
            let witness = d
                .witness
                .map(|w| w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                .unwrap_or_default();
            report.violations.push(format!(
                "{at}: weight class {} is defective (witness ({witness}))",
                p.certificate.flag.describe()
            ));
        }
    }
    report.generic = report.violations.is_empty() && report.refusals.is_empty();
    if !report.violations.is_empty() {
        let msg = report.violations.join("; ");
        refuse(&mut report, RefusalKind::NotGeneric, msg);
    }
    report
}

fn format_point(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(crate::linalg::format_rational).collect();
    format!("({})", parts.join(","))
}

struct PyramidCell {
    vertex: Vec<Rational>,
    apex: usize,
    height: BigInt,
}

fn pyramid_cells(cfg: &PointConfig, t: &MarkedSubdivision, circuit: &[usize]) -> Result<Vec<PyramidCell>, Refusal> {
    let plane = cfg.subset(circuit);
    let mut out = Vec::new();
    for cell in t.cells.iter().filter(|c| circuit.iter().all(|i| c.marked.contains(i))) {
        let extra: Vec<usize> = cell.marked.iter().copied().filter(|i| !circuit.contains(i)).collect();
        if extra.len() != 1 {
            return Err(Refusal {
                kind: RefusalKind::NotMaximalType,
                message: format!("cell over the circuit has extra points {}", labels(&extra)),
            });
        }
        let height = lattice_distance(&plane, &cfg.point(extra[0])).expect("circuit is planar");
        out.push(PyramidCell {
            vertex: cell.dual_vertex.clone(),
            apex: extra[0],
            height,
        });
    }
    Ok(out)
}

fn edge_direction(cfg: &PointConfig, u: &HeightVector, circuit: &[usize], from: &[Rational]) -> Vec<Rational> {
    let (rows, _) = equal_term_system(cfg, u, circuit);
    let ker = RatMatrix::from_rows(3, rows).kernel_basis();
    let n: Vec<Rational> = primitive_integer(&ker[0])
        .into_iter()
        .map(Rational::from_integer)
        .collect();
    let step: Vec<Rational> = from.iter().zip(&n).map(|(a, b)| a + b).collect();
    if in_dual_cell(cfg, u, &step, circuit) {
        n
    } else {
        n.iter().map(|x| -x).collect()
    }
}

fn midpoint(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| (x + y) / rat(2)).collect()
}

fn side(cfg: &PointConfig, circuit: &[usize], m: usize) -> Rational {
    let base = cfg.rational_point(circuit[0]);
    let dirs: Vec<Vec<Rational>> = circuit[1..]
        .iter()
        .map(|&i| sub(&cfg.rational_point(i), &base))
        .collect();
    let n = RatMatrix::from_rows(3, dirs).kernel_basis().remove(0);
    dot(&n, &sub(&cfg.rational_point(m), &base))
}

#[allow(clippy::too_many_arguments)]
fn label_point(
    cfg: &PointConfig,
    u: &HeightVector,
    t: &MarkedSubdivision,
    circuit: &[usize],
    circuit_type: CircuitType,
    cert: &Certificate,
    p: &[Rational],
) -> Result<(CaseLabel, Metric), Refusal> {
    let diffs = cert.flag.differences();
    let level = |l: Option<usize>| diffs[l.expect("case carries its level") - 1].clone();
    match cert.case.tag {
        ChainsTag::A => {
            let multiplicity = lattice_volume(&cfg.subset(circuit));
            let label = if circuit_type == CircuitType::A {
                CaseLabel::A1
            } else {
                CaseLabel::A2(multiplicity.clone())
            };
            Ok((label, Metric::Vertex { multiplicity }))
        }
        ChainsTag::B => {
            let pair = level(cert.case.j);
            let cells = pyramid_cells(cfg, t, circuit)?;
            let endpoints: Vec<Vec<Rational>> = cells.iter().map(|c| c.vertex.clone()).collect();
            let apex_heights: Vec<BigInt> = cells.iter().map(|c| c.height.clone()).collect();
            let apexes: Vec<usize> = cells.iter().map(|c| c.apex).collect();
            let ray = (cells.len() == 1).then(|| edge_direction(cfg, u, circuit, &endpoints[0]));
            let mut metric = EdgeMetric {
                endpoints,
                apex_heights,
                apexes,
                ray,
                ratio: None,
                distance: None,
                consistent: false,
            };
            if circuit_type == CircuitType::D {
                metric.consistent = cells.len() == 2 && midpoint(&cells[0].vertex, &cells[1].vertex) == p;
                return Ok((CaseLabel::B2, Metric::Edge(metric)));
            }
            let (one, three) = (BigInt::one(), BigInt::from(3));
            if let Some(c) = cells.iter().find(|c| c.height != one && c.height != three) {
                return Err(Refusal {
                    kind: RefusalKind::PyramidHeight,
                    message: format!(
                        "pyramid over the circuit with apex {} has height {}",
                        labels(&[c.apex]),
                        c.height
                    ),
                });
            }
            let pair_is_apexes = cells.len() == 2 && pair.contains(&cells[0].apex) && pair.contains(&cells[1].apex);
            if pair_is_apexes {
                let (a, b) = (&cells[0], &cells[1]);
                if a.height == b.height {
                    metric.ratio = Some("1:1".into());
                    metric.consistent = midpoint(&a.vertex, &b.vertex) == p;
                } else {
                    let (low, high) = if a.height == one { (a, b) } else { (b, a) };
                    metric.ratio = Some("3:1".into());
                    let q: Vec<Rational> = low
                        .vertex
                        .iter()
                        .zip(&high.vertex)
                        .map(|(l, h)| (l + h * rat(3)) / rat(4))
                        .collect();
                    metric.consistent = q == p;
                }
                return Ok((CaseLabel::B11Ratio, Metric::Edge(metric)));
            }
            let formula_pair = cells
                .iter()
                .find(|c| c.height == three && pair.contains(&c.apex))
                .and_then(|c| {
                    let other = *pair.iter().find(|&&x| x != c.apex)?;
                    let plane = cfg.subset(circuit);
                    let d = lattice_distance(&plane, &cfg.point(other))?;
                    let same_side = side(cfg, circuit, other).signum() == side(cfg, circuit, c.apex).signum();
                    (d == one && same_side).then_some((c, other))
                });
            let Some((apex3, e)) = formula_pair else {
                return Ok((
                    if cells.len() == 1 {
                        CaseLabel::B12
                    } else {
                        CaseLabel::B11Unlisted
                    },
                    Metric::Edge(metric),
                ));
            };
            if let Some((moved, lab, map)) = normalize_b11(cfg, circuit, e, apex3.apex) {
                if let Ok(dist) = eq_b114_distance(&moved, u, &lab) {
                    let pv = map.dual_apply(&apex3.vertex);
                    let pp = map.dual_apply(p);
                    metric.consistent = &pv[0] - &pp[0] == dist;
                    metric.distance = Some(dist);
                }
            }
            let label = if cells.len() == 1 {
                CaseLabel::B12
            } else {
                CaseLabel::B11Formula
            };
            Ok((label, Metric::Edge(metric)))
        }
        ChainsTag::C => {
            let triple = level(cert.case.j);
            let pairs = [[triple[0], triple[1]], [triple[1], triple[2]], [triple[2], triple[0]]];
            let a = cfg.rational_point(circuit[0]);
            let delta: Vec<Rational> = primitive_integer(&sub(&cfg.rational_point(circuit[1]), &a))
                .into_iter()
                .map(Rational::from_integer)
                .collect();
            let mut vertices = Vec::new();
            let mut weights = Vec::new();
            for [i, j] in pairs {
                let mut idx = circuit.to_vec();
                idx.extend([i, j]);
                let v = equal_term_point(cfg, u, &idx).expect("pair spans with the circuit line");
                vertices.push(v);
                let m = RatMatrix::from_rows(
                    3,
                    vec![
                        delta.clone(),
                        sub(&cfg.rational_point(i), &a),
                        sub(&cfg.rational_point(j), &a),
                    ],
                );
                weights.push(m.det().to_integer());
            }
            let total: BigInt = weights.iter().sum();
            if total.is_negative() {
                for w in weights.iter_mut() {
                    *w = -w.clone();
                }
            }
            let identity = (0..3).all(|c| {
                let s: Rational = vertices
                    .iter()
                    .zip(&weights)
                    .map(|(v, w)| (&v[c] - &p[c]) * Rational::from_integer(w.clone()))
                    .fold(Rational::zero(), |acc, x| acc + x);
                s.is_zero()
            });
            let label = if weights.iter().all(|w| w.is_positive()) {
                CaseLabel::CBarycenter
            } else {
                CaseLabel::CVirtualBarycenter
            };
            Ok((
                label,
                Metric::Barycenter(BarycenterMetric {
                    pairs: pairs.to_vec(),
                    vertices,
                    weights,
                    identity,
                }),
            ))
        }
        ChainsTag::D => {
            let lower = level(cert.case.i);
            let upper = level(cert.case.j);
            let mut corners = Vec::new();
            for &x in &lower {
                for &y in &upper {
                    let mut idx = circuit.to_vec();
                    idx.extend([x, y]);
                    if let Some(v) = equal_term_point(cfg, u, &idx) {
                        corners.push(v);
                    }
                }
            }
            let average = corners.len() == 4
                && (0..3).all(|c| {
                    let s = corners.iter().fold(Rational::zero(), |acc, v| acc + &v[c]);
                    s / rat(4) == p[c]
                });
            Ok((CaseLabel::DTrapeze, Metric::Trapeze(TrapezeMetric { corners, average })))
        }
    }
}

/// Indices of the six points entering the closed distance formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct B11Labeling {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub e: usize,
    pub f: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("labeling is not in normal form: {0}")]
pub struct NormalFormError(pub String);

/// Signed distance along the dual edge from the vertex of the height-3
/// pyramid to the singular point, for a configuration already in normal
/// form `a=(0,0,0)`, `b=(0,1,1)`, `c=(0,2,1)`, `d=(0,1,2)`, `f_x=3`, `e_x=1`.
pub fn eq_b114_distance(cfg: &PointConfig, u: &HeightVector, l: &B11Labeling) -> Result<Rational, NormalFormError> {
    let expect = |i: usize, p: LatticePoint, name: &str| {
        if cfg.point(i) == p {
            Ok(())
        } else {
            Err(NormalFormError(format!("{name} is {:?}, expected {p:?}", cfg.point(i))))
        }
    };
    expect(l.a, [0, 0, 0], "a")?;
    expect(l.b, [0, 1, 1], "b")?;
    expect(l.c, [0, 2, 1], "c")?;
    expect(l.d, [0, 1, 2], "d")?;
    let (e, f) = (cfg.point(l.e), cfg.point(l.f));
    if f[0] != 3 {
        return Err(NormalFormError(format!("f has x = {}, expected 3", f[0])));
    }
    if e[0] != 1 {
        return Err(NormalFormError(format!("e has x = {}, expected 1", e[0])));
    }
    let h = |i: usize| u.0[i].clone();
    let half = |x: i64| rat(x) / rat(2);
    let sixth = |x: i64| rat(x) / rat(6);
    Ok(h(l.a) / rat(3)
        - (h(l.e) / rat(2) - h(l.f) / rat(6))
        - (h(l.b) - h(l.c)) * (half(e[1]) - sixth(f[1]))
        - (h(l.b) - h(l.d)) * (half(e[2]) - sixth(f[2])))
}

fn unit_solution(n: &[BigInt]) -> Option<[i64; 3]> {
    use num_traits::ToPrimitive;
    let g12 = n[0].extended_gcd(&n[1]);
    let g = g12.gcd.extended_gcd(&n[2]);
    if !g.gcd.abs().is_one() {
        return None;
    }
    let s = g.gcd.signum();
    let w = [&g.x * &g12.x * &s, &g.x * &g12.y * &s, &g.y * &s];
    Some([w[0].to_i64()?, w[1].to_i64()?, w[2].to_i64()?])
}

/// A unimodular image of the configuration in which the type-C circuit,
/// the height-3 apex `f` and the adjacent point `e` are in normal form.
pub fn normalize_b11(
    cfg: &PointConfig,
    circuit: &[usize],
    e: usize,
    f: usize,
) -> Option<(PointConfig, B11Labeling, UnimodularMap<3>)> {
    let pts = cfg.subset(circuit);
    let radon = radon_partition(&pts).ok()?;
    let (single, triangle) = if radon.positive.len() == 1 {
        (radon.positive.clone(), radon.negative.clone())
    } else {
        (radon.negative.clone(), radon.positive.clone())
    };
    if single.len() != 1 || triangle.len() != 3 {
        return None;
    }
    let b = circuit[single[0]];
    let tri: Vec<usize> = triangle.iter().map(|&k| circuit[k]).collect();
    let base = cfg.rational_point(tri[0]);
    let dirs: Vec<Vec<Rational>> = tri[1..].iter().map(|&i| sub(&cfg.rational_point(i), &base)).collect();
    let normal = primitive_integer(&RatMatrix::from_rows(3, dirs).kernel_basis()[0]);
    let w = unit_solution(&normal)?;
    for k in 0..3 {
        let a = tri[k];
        let rest: Vec<usize> = tri.iter().copied().filter(|&x| x != a).collect();
        for (c, d) in [(rest[0], rest[1]), (rest[1], rest[0])] {
            let pa = cfg.point(a);
            let pf = cfg.point(f);
            let nf: BigInt = (0..3).map(|i| &normal[i] * BigInt::from(pf[i] - pa[i])).sum();
            let sigma = if nf.is_negative() { -1 } else { 1 };
            let src = [
                pa,
                cfg.point(b),
                cfg.point(c),
                [pa[0] + w[0], pa[1] + w[1], pa[2] + w[2]],
            ];
            let dst = [[0, 0, 0], [0, 1, 1], [0, 2, 1], [sigma, 0, 0]];
            let Some(map) = unimodular_from_basis(&src, &dst) else {
                continue;
            };
            let moved = map.apply_all(cfg.points());
            if moved[d] != [0, 1, 2] || moved[f][0] != 3 || moved[e][0] != 1 {
                continue;
            }
            let moved_cfg = PointConfig::new(moved).ok()?;
            return Some((moved_cfg, B11Labeling { a, b, c, d, e, f }, map));
        }
    }
    None
}

/// Outcome of a genericity test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericityDiagnosis {
    pub generic: bool,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("heights are not in the tropical discriminant")]
pub struct NotSingular;

pub fn is_generic(cfg: &PointConfig, u: &HeightVector) -> Result<GenericityDiagnosis, NotSingular> {
    let opts = ClassifyOptions {
        lift_codim_gate: true,
        ..Default::default()
    };
    let report = classify_with(cfg, u, &opts);
    if report.points.is_empty() && report.families.is_empty() {
        let any = cfg.len() <= opts.oracle_bound
            && singular_locus(cfg, u, opts.oracle_bound).is_ok_and(|pieces| !pieces.is_empty());
        if !any {
            return Err(NotSingular);
        }
        let violations = report
            .refusals
            .iter()
            .map(|r| format!("{}: {}", r.kind, r.message))
            .collect();
        return Ok(GenericityDiagnosis {
            generic: false,
            violations,
        });
    }
    Ok(GenericityDiagnosis {
        generic: report.generic,
        violations: report.violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frac;
    use rand::{Rng, SeedableRng};

    fn q(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    fn ex_thomas() -> (PointConfig, HeightVector) {
        let cfg = PointConfig::new(vec![
            [0, 0, 0],
            [0, 0, 1],
            [0, 0, 2],
            [-1, -1, 0],
            [0, 1, 0],
            [1, 0, 0],
            [2, 1, 1],
        ])
        .unwrap();
        (cfg, HeightVector::from_integers(&[0, 0, 0, -8, -5, -5, -5]))
    }

    fn worked(ue: Rational) -> (PointConfig, HeightVector) {
        let cfg = PointConfig::new(vec![
            [0, 0, 0],
            [0, 1, 1],
            [0, 1, 2],
            [0, 2, 1],
            [1, 1, 1],
            [3, 0, 2],
            [-1, 1, 0],
        ])
        .unwrap();
        let mut u = HeightVector::from_integers(&[0, 0, 0, 0, 0, -5, -2]);
        u.0[4] = ue;
        (cfg, u)
    }

    #[test]
    fn lineality_vectors() {
        let (cfg, _) = ex_thomas();
        assert_eq!(lineality_vector(&cfg, &q(&[0, 0, 0])).0, q(&[0; 7]));
        assert_eq!(lineality_vector(&cfg, &q(&[1, 1, 0])).0, q(&[0, 0, 0, -2, 1, 1, 3]));
        let (cfg, _) = worked(rat(-3));
        assert_eq!(lineality_vector(&cfg, &q(&[1, 0, 0])).0, q(&[0, 0, 0, 0, 1, 3, -1]));
    }

    #[test]
    fn ex_thomas_candidates_and_lifts() {
        let (cfg, u) = ex_thomas();
        let c = candidate_points(&cfg, &u, &[0, 1, 2], CircuitType::E);
        let found: Vec<(Vec<Rational>, Structure)> = c
            .points
            .iter()
            .map(|c| (c.point.clone(), c.structure.clone()))
            .collect();
        assert!(found.contains(&(q(&[0, 0, 0]), Structure::Triple([4, 5, 6]))));
        assert!(found.contains(&(q(&[-1, -1, 0]), Structure::Triple([3, 4, 5]))));
        match lift_check(&cfg, &u, &q(&[-1, -1, 0])) {
            LiftVerdict::Accept(cert) => {
                assert_eq!(cert.shifted.0, q(&[0, 0, 0, -6, -6, -6, -8]));
                assert_eq!(cert.flag.differences()[0], vec![6]);
            }
            LiftVerdict::Reject(r) => panic!("{r}"),
        }
    }

    #[test]
    fn ex_thomas_classification() {
        let (cfg, u) = ex_thomas();
        let r = classify(&cfg, &u);
        assert!(r.generic, "{:?}", r.refusals);
        assert_eq!(r.locations(), vec![q(&[-1, -1, 0]), q(&[0, 0, 0])]);
        assert_eq!(r.points[0].label, CaseLabel::CBarycenter);
        assert_eq!(r.points[1].label, CaseLabel::CVirtualBarycenter);
        for p in &r.points {
            let Metric::Barycenter(m) = &p.metric else { panic!() };
            assert!(m.identity);
        }
    }

    #[test]
    fn worked_example_points() {
        let (cfg, u) = worked(rat(-4));
        let r = classify(&cfg, &u);
        assert_eq!(r.locations(), vec![vec![frac(3, 4), rat(0), rat(0)]]);
        assert_eq!(r.points[0].label, CaseLabel::B11Ratio);
        let Metric::Edge(m) = &r.points[0].metric else { panic!() };
        assert!(m.consistent);
        assert_eq!(m.ratio.as_deref(), Some("3:1"));

        let (cfg, u) = worked(rat(-3));
        let r = classify(&cfg, &u);
        let formula = r.points.iter().find(|p| p.location == q(&[1, 0, 0])).unwrap();
        assert_eq!(formula.label, CaseLabel::B11Formula);
        let Metric::Edge(m) = &formula.metric else { panic!() };
        assert_eq!(m.distance, Some(frac(2, 3)));
        assert!(m.consistent);

        let (cfg, u) = worked(frac(-7, 2));
        let r = classify(&cfg, &u);
        assert_eq!(r.locations(), vec![vec![frac(3, 4), rat(0), rat(0)]]);
        assert!(!r.generic);
    }

    #[test]
    fn pair_fg_is_rejected_above_threshold() {
        let (cfg, u) = worked(rat(-3));
        assert!(!lift_check(&cfg, &u, &[frac(3, 4), rat(0), rat(0)]).is_accept());
        match lift_check(&cfg, &u, &q(&[1, 0, 0])) {
            LiftVerdict::Accept(c) => assert_eq!(c.shifted.0, q(&[0, 0, 0, 0, -2, -2, -3])),
            LiftVerdict::Reject(r) => panic!("{r}"),
        }
    }

    #[test]
    fn type_d_midpoint() {
        let cfg = PointConfig::new(vec![[0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1], [1, 0, 0], [-1, 0, 0]]).unwrap();
        let u = HeightVector::from_integers(&[0, 0, 0, 0, -2, -2]);
        let r = classify(&cfg, &u);
        assert_eq!(r.locations(), vec![q(&[0, 0, 0])]);
        assert_eq!(r.points[0].label, CaseLabel::B2);
        let Metric::Edge(m) = &r.points[0].metric else { panic!() };
        assert!(m.consistent);
        let mut ends = m.endpoints.clone();
        ends.sort();
        assert_eq!(ends, vec![q(&[-2, 0, 0]), q(&[2, 0, 0])]);
    }

    #[test]
    fn trapeze_toy() {
        let cfg = PointConfig::new(vec![
            [0, 0, 0],
            [0, 0, 1],
            [0, 0, 2],
            [1, 0, 0],
            [-1, 0, 0],
            [0, 1, 0],
            [0, -1, 0],
        ])
        .unwrap();
        let u = HeightVector::from_integers(&[0, 0, 0, -1, -1, -3, -3]);
        let c = candidate_points(&cfg, &u, &[0, 1, 2], CircuitType::E);
        let pts: Vec<Vec<Rational>> = c.points.iter().map(|c| c.point.clone()).collect();
        assert!(pts.contains(&q(&[0, 0, 0])));
        let r = classify(&cfg, &u);
        assert_eq!(r.locations(), vec![q(&[0, 0, 0])]);
        assert_eq!(r.points[0].label, CaseLabel::DTrapeze);
        let Metric::Trapeze(m) = &r.points[0].metric else {
            panic!()
        };
        assert!(m.average);
    }

    #[test]
    fn eq_formula_on_worked_labeling() {
        let (cfg, u) = worked(rat(-3));
        let lab = B11Labeling {
            a: 0,
            b: 1,
            c: 3,
            d: 2,
            e: 4,
            f: 5,
        };
        assert_eq!(eq_b114_distance(&cfg, &u, &lab), Ok(frac(2, 3)));
        let wrong = B11Labeling { c: 2, d: 3, ..lab };
        assert!(eq_b114_distance(&cfg, &u, &wrong).is_err());
        let zero = HeightVector::from_integers(&[0; 7]);
        let sym = PointConfig::new(vec![
            [0, 0, 0],
            [0, 1, 1],
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 0],
            [3, 0, 0],
            [-1, 1, 0],
        ])
        .unwrap();
        assert_eq!(eq_b114_distance(&sym, &zero, &lab), Ok(rat(0)));
    }

    #[test]
    fn eq_formula_matches_direct_solve() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let e = [1, rng.gen_range(-4..=4), rng.gen_range(-4..=4)];
            let f = [3, rng.gen_range(-4..=4), rng.gen_range(-4..=4)];
            let cfg = PointConfig::new(vec![[0, 0, 0], [0, 1, 1], [0, 1, 2], [0, 2, 1], e, f, [-1, 0, 0]]).unwrap();
            let r = |rng: &mut rand_chacha::ChaCha8Rng| frac(rng.gen_range(-30..=30), rng.gen_range(1..=6));
            let (ub, uc, ud) = (r(&mut rng), r(&mut rng), r(&mut rng));
            let ua = &ub * rat(3) - &uc - &ud;
            let u = HeightVector(vec![ua, ub, ud, uc, r(&mut rng), r(&mut rng), rat(0)]);
            let lab = B11Labeling {
                a: 0,
                b: 1,
                c: 3,
                d: 2,
                e: 4,
                f: 5,
            };
            let v = equal_term_point(&cfg, &u, &[0, 1, 2, 3, 5]).unwrap();
            let Solved::Unique(p) = solve_structure(&cfg, &u, &[0, 1, 2, 3], &Structure::Pair([4, 5])) else {
                panic!("pair system is not unique");
            };
            assert_eq!(eq_b114_distance(&cfg, &u, &lab).unwrap(), &v[0] - &p[0]);
        }
    }

    #[test]
    fn normalization_recovers_normal_form() {
        let (cfg, u) = worked(rat(-3));
        let map = UnimodularMap::new([[1, 2, 0], [0, 1, 0], [1, 1, 1]], [3, -1, 2]).unwrap();
        let moved = PointConfig::new(map.apply_all(cfg.points())).unwrap();
        let (normal, lab, back) = normalize_b11(&moved, &[0, 1, 2, 3], 4, 5).unwrap();
        assert_eq!(eq_b114_distance(&normal, &u, &lab), Ok(frac(2, 3)));
        let p = map.dual_apply(&q(&[1, 0, 0]));
        assert_eq!(back.dual_apply(&p)[0], rat(1));
    }

    #[test]
    fn defective_class_is_not_generic() {
        let cfg = PointConfig::new(vec![
            [0, 0, 0],
            [0, 0, 1],
            [0, 0, 2],
            [0, 1, 0],
            [0, -1, 0],
            [1, 0, 0],
            [1, 1, 0],
            [-1, 0, 0],
        ])
        .unwrap();
        let u = HeightVector::from_integers(&[3, 3, 3, 2, 2, 1, 1, 0]);
        let d = is_generic(&cfg, &u).unwrap();
        assert!(!d.generic);
    }

    #[test]
    fn not_singular_and_refusals() {
        let cfg = PointConfig::new(vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]).unwrap();
        let u = HeightVector::from_integers(&[0, 1, 2, 3, 0]);
        assert_eq!(is_generic(&cfg, &u), Err(NotSingular));
        let r = classify(&cfg, &u);
        assert_eq!(r.refusals[0].kind, RefusalKind::Codimension);
        let u = HeightVector::from_integers(&[0, 1, 2, 3, 6]);
        let r = classify(&cfg, &u);
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.points[0].label, CaseLabel::A1);
    }

    #[test]
    fn shift_translates_points() {
        let (cfg, u) = ex_thomas();
        let x = vec![frac(1, 2), frac(-2, 3), rat(2)];
        let shifted = u.add(&lineality_vector(&cfg, &x));
        let r = classify(&cfg, &shifted);
        let expected: Vec<Vec<Rational>> = classify(&cfg, &u)
            .locations()
            .iter()
            .map(|p| p.iter().zip(&x).map(|(a, b)| a - b).collect())
            .collect();
        assert_eq!(r.locations(), expected);
    }
}
