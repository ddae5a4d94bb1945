//! Gale duality, flats and flags of flats of the dual matroid.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::lattice::{affine_rank, classify_circuit, CircuitType, LatticePoint};
use crate::linalg::{primitive_integer, rank_of};
use crate::subdivision::{labels, HeightVector, PointConfig};
use crate::{RatMatrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatroidError {
    #[error("matrix has rank {rank}, expected {rows}")]
    Degenerate { rank: usize, rows: usize },
    #[error("configuration has {found} points, enumeration bound is {bound}")]
    BoundExceeded { found: usize, bound: usize },
}

/// A matrix whose rows span `ker A`; its columns `b_j` carry the dual matroid.
#[derive(Clone, Debug, PartialEq)]
pub struct GaleDual {
    pub b: RatMatrix,
    columns: Vec<Vec<Rational>>,
}

impl GaleDual {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[Rational] {
        &self.columns[j]
    }

    /// Rank of the columns indexed by `set`.
    pub fn rank(&self, set: &[usize]) -> usize {
        let rows: Vec<Vec<Rational>> = set.iter().map(|&j| self.columns[j].clone()).collect();
        rank_of(self.b.rows(), &rows)
    }

    pub fn full_rank(&self) -> usize {
        self.b.rows()
    }

    /// All indices whose column lies in the span of the columns of `set`.
    pub fn closure(&self, set: &[usize]) -> Vec<usize> {
        let r = self.rank(set);
        let mut out: Vec<usize> = (0..self.len())
            .filter(|j| {
                set.contains(j) || {
                    let mut s = set.to_vec();
                    s.push(*j);
                    self.rank(&s) == r
                }
            })
            .collect();
        out.sort();
        out
    }
}

pub fn gale_dual_of_matrix(a: &RatMatrix) -> Result<GaleDual, MatroidError> {
    let rank = a.rank();
    if rank != a.rows() {
        return Err(MatroidError::Degenerate { rank, rows: a.rows() });
    }
    let kernel = a.kernel_basis();
    let s = a.cols();
    let b = RatMatrix::from_rows(s, kernel);
    let columns = (0..s).map(|j| b.column(j)).collect();
    Ok(GaleDual { b, columns })
}

pub fn gale_dual(cfg: &PointConfig) -> GaleDual {
    gale_dual_of_matrix(cfg.matrix_a()).expect("configuration is full-dimensional")
}

/// No column outside `set` lies in the span of the columns in `set`.
pub fn is_flat(b: &GaleDual, set: &[usize]) -> bool {
    let r = b.rank(set);
    (0..b.len()).filter(|j| !set.contains(j)).all(|j| {
        let mut s = set.to_vec();
        s.push(j);
        b.rank(&s) > r
    })
}

/// A chain `F_1 < ... < F_{k+1} = {0..s}` of index sets, stored cumulatively.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Flag {
    pub levels: Vec<Vec<usize>>,
}

impl Flag {
    pub fn from_differences(diffs: &[Vec<usize>]) -> Flag {
        let mut acc = Vec::new();
        let mut levels = Vec::new();
        for d in diffs {
            acc.extend(d.iter().copied());
            let mut sorted = acc.clone();
            sorted.sort();
            levels.push(sorted);
        }
        Flag { levels }
    }

    /// The difference sets `F_l' = F_l \ F_{l-1}`.
    pub fn differences(&self) -> Vec<Vec<usize>> {
        let mut prev: Vec<usize> = Vec::new();
        self.levels
            .iter()
            .map(|l| {
                let d: Vec<usize> = l.iter().copied().filter(|i| !prev.contains(i)).collect();
                prev = l.clone();
                d
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn top(&self) -> Vec<usize> {
        self.differences().pop().unwrap_or_default()
    }

    /// `self` is obtained from `finer` by removing some levels.
    pub fn is_coarsening_of(&self, finer: &Flag) -> bool {
        self.levels.iter().all(|l| finer.levels.contains(l))
    }

    pub fn describe(&self) -> String {
        self.differences()
            .iter()
            .map(|d| format!("{{{}}}", labels(d)))
            .collect::<Vec<_>>()
            .join(" < ")
    }
}

/// Levels grouped by increasing height.
pub fn flag_of_subsets(u: &HeightVector) -> Flag {
    let mut values: Vec<&Rational> = u.0.iter().collect();
    values.sort();
    values.dedup();
    let diffs: Vec<Vec<usize>> = values
        .iter()
        .map(|v| (0..u.len()).filter(|&i| &u.0[i] == *v).collect())
        .collect();
    Flag::from_differences(&diffs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainsTag {
    A,
    B,
    C,
    D,
}

impl fmt::Display for ChainsTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChainsTag::A => "a",
            ChainsTag::B => "b",
            ChainsTag::C => "c",
            ChainsTag::D => "d",
        };
        f.write_str(s)
    }
}

/// An accepted maximal flag: its case, the 1-based positions of its
/// non-singleton lower difference sets and the circuit on top.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ChainsCase {
    pub tag: ChainsTag,
    pub j: Option<usize>,
    pub i: Option<usize>,
    pub circuit: Vec<usize>,
    pub circuit_type: CircuitType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    NotMaximal { levels: usize, expected: usize },
    Sizes(Vec<usize>),
    TopNotCircuit,
    WrongCircuitType { tag: ChainsTag, found: CircuitType },
    CaseBCoplanar { index: usize },
    CaseBPlane { index: usize },
    CaseCLine { index: usize },
    CaseCSpan { pair: (usize, usize) },
    CaseDLine { index: usize },
    CaseDPlane { index: usize },
    CaseDOffPlane { index: usize },
    NotFlat { level: usize },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::subdivision::label;
        match self {
            RejectReason::NotMaximal { levels, expected } => {
                write!(f, "flag has {levels} levels, a maximal flag has {expected}")
            }
            RejectReason::Sizes(s) => write!(f, "difference-set sizes {s:?} match no case"),
            RejectReason::TopNotCircuit => f.write_str("top difference set is not a circuit"),
            RejectReason::WrongCircuitType { tag, found } => {
                write!(f, "case-{tag} requires another circuit type, found {found:?}")
            }
            RejectReason::CaseBCoplanar { index } => {
                write!(
                    f,
                    "case-b coplanarity clause: {} is off the circuit plane",
                    label(*index)
                )
            }
            RejectReason::CaseBPlane { index } => {
                write!(f, "case-b plane clause: {} lies on the circuit plane", label(*index))
            }
            RejectReason::CaseCLine { index } => {
                write!(f, "case-c line clause: {} is off the circuit line", label(*index))
            }
            RejectReason::CaseCSpan { pair } => write!(
                f,
                "case-c spanning clause: {},{} do not span with the circuit",
                label(pair.0),
                label(pair.1)
            ),
            RejectReason::CaseDLine { index } => {
                write!(f, "case-d line clause: {} is off the circuit line", label(*index))
            }
            RejectReason::CaseDPlane { index } => {
                write!(
                    f,
                    "case-d plane clause: {} is off the plane of the upper pair",
                    label(*index)
                )
            }
            RejectReason::CaseDOffPlane { index } => {
                write!(
                    f,
                    "case-d off-plane clause: {} lies on the plane of the upper pair",
                    label(*index)
                )
            }
            RejectReason::NotFlat { level } => write!(f, "level {level} is not a flat"),
        }
    }
}

/// A rejected flag. `discrepancy` is set when a geometric clause fails even
/// though every level is a flat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reject {
    pub reason: RejectReason,
    pub discrepancy: bool,
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.reason)?;
        if self.discrepancy {
            f.write_str(" (all levels are flats)")?;
        }
        Ok(())
    }
}

fn rank_with(cfg: &PointConfig, base: &[usize], extra: &[usize]) -> usize {
    let pts: Vec<LatticePoint> = base.iter().chain(extra).map(|&i| cfg.point(i)).collect();
    affine_rank(&pts)
}

fn geometric_case(cfg: &PointConfig, diffs: &[Vec<usize>]) -> Result<ChainsCase, RejectReason> {
    let k = diffs.len();
    let top = &diffs[k - 1];
    let lower = &diffs[..k - 1];
    let big: Vec<usize> = (0..lower.len()).filter(|&l| lower[l].len() > 1).collect();
    let sizes: Vec<usize> = diffs.iter().map(|d| d.len()).collect();
    let tag = match (top.len(), big.as_slice()) {
        (5, []) => ChainsTag::A,
        (4, [j]) if lower[*j].len() == 2 => ChainsTag::B,
        (3, [j]) if lower[*j].len() == 3 => ChainsTag::C,
        (3, [i, j]) if lower[*i].len() == 2 && lower[*j].len() == 2 => ChainsTag::D,
        _ => return Err(RejectReason::Sizes(sizes)),
    };
    let circuit_type = classify_circuit(&cfg.subset(top)).map_err(|_| RejectReason::TopNotCircuit)?;
    let type_ok = match tag {
        ChainsTag::A => matches!(circuit_type, CircuitType::A | CircuitType::B),
        ChainsTag::B => matches!(circuit_type, CircuitType::C | CircuitType::D),
        ChainsTag::C | ChainsTag::D => circuit_type == CircuitType::E,
    };
    if !type_ok {
        return Err(RejectReason::WrongCircuitType {
            tag,
            found: circuit_type,
        });
    }
    let above = |j: usize| lower[j + 1..].iter().flatten().copied();
    match tag {
        ChainsTag::A => {}
        ChainsTag::B => {
            let j = big[0];
            if let Some(index) = above(j).find(|&r| rank_with(cfg, top, &[r]) != 3) {
                return Err(RejectReason::CaseBCoplanar { index });
            }
            if let Some(&index) = lower[j].iter().find(|&&r| rank_with(cfg, top, &[r]) != 4) {
                return Err(RejectReason::CaseBPlane { index });
            }
        }
        ChainsTag::C => {
            let j = big[0];
            if let Some(index) = above(j).find(|&r| rank_with(cfg, top, &[r]) != 2) {
                return Err(RejectReason::CaseCLine { index });
            }
            let t = &lower[j];
            for (x, y) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                if rank_with(cfg, top, &[x, y]) != 4 {
                    return Err(RejectReason::CaseCSpan { pair: (x, y) });
                }
            }
        }
        ChainsTag::D => {
            let (i, j) = (big[0], big[1]);
            if let Some(index) = above(j).find(|&r| rank_with(cfg, top, &[r]) != 2) {
                return Err(RejectReason::CaseDLine { index });
            }
            let plane: Vec<usize> = top.iter().chain(&lower[j]).copied().collect();
            if rank_with(cfg, &plane, &[]) != 3 {
                return Err(RejectReason::CaseDPlane { index: lower[j][0] });
            }
            if let Some(index) = lower[i + 1..j]
                .iter()
                .flatten()
                .copied()
                .find(|&r| rank_with(cfg, &plane, &[r]) != 3)
            {
                return Err(RejectReason::CaseDPlane { index });
            }
            if let Some(&index) = lower[i].iter().find(|&&r| rank_with(cfg, &plane, &[r]) != 4) {
                return Err(RejectReason::CaseDOffPlane { index });
            }
        }
    }
    let pos = |l: usize| Some(l + 1);
    let (i, j) = match tag {
        ChainsTag::A => (None, None),
        ChainsTag::B | ChainsTag::C => (None, pos(big[0])),
        ChainsTag::D => (pos(big[0]), pos(big[1])),
    };
    Ok(ChainsCase {
        tag,
        j,
        i,
        circuit: top.clone(),
        circuit_type,
    })
}

fn first_non_flat(b: &GaleDual, flag: &Flag) -> Option<usize> {
    (0..flag.len()).find(|&l| !is_flat(b, &flag.levels[l])).map(|l| l + 1)
}

/// Checks a maximal flag against the size, circuit and geometric clauses of
/// the chain classification, and checks that every level is a flat.
pub fn chains_case(cfg: &PointConfig, b: &GaleDual, flag: &Flag) -> Result<ChainsCase, Reject> {
    let expected = cfg.len() - 4;
    if flag.len() != expected {
        return Err(Reject {
            reason: RejectReason::NotMaximal {
                levels: flag.len(),
                expected,
            },
            discrepancy: false,
        });
    }
    let diffs = flag.differences();
    match geometric_case(cfg, &diffs) {
        Ok(case) => match first_non_flat(b, flag) {
            None => Ok(case),
            Some(level) => Err(Reject {
                reason: RejectReason::NotFlat { level },
                discrepancy: false,
            }),
        },
        Err(reason) => Err(Reject {
            reason,
            discrepancy: first_non_flat(b, flag).is_none(),
        }),
    }
}

/// Every level of the flag is a flat.
pub fn is_flag_of_flats(b: &GaleDual, flag: &Flag) -> bool {
    first_non_flat(b, flag).is_none()
}

fn extend_chains(
    b: &GaleDual,
    from: &[usize],
    to: &[usize],
    prefix: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    if from.len() == to.len() {
        out.push(prefix.clone());
        return;
    }
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for &k in to {
        if from.contains(&k) {
            continue;
        }
        let mut s = from.to_vec();
        s.push(k);
        let next = b.closure(&s);
        if next.len() > to.len() || !seen.insert(next.clone()) {
            continue;
        }
        prefix.push(next.clone());
        extend_chains(b, &next, to, prefix, out);
        prefix.pop();
    }
}

/// All maximal chains of flats between two flats, excluding `from`.
fn maximal_chains_between(b: &GaleDual, from: &[usize], to: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    extend_chains(b, from, to, &mut Vec::new(), &mut out);
    out
}

pub const DEFAULT_ENUMERATION_BOUND: usize = 10;

/// Indices whose Gale column vanishes, i.e. points lying in no circuit.
pub fn loops(b: &GaleDual) -> Vec<usize> {
    b.closure(&[])
}

/// All maximal chains of flats from the empty flat to the ground set, sorted.
/// Empty when the matroid has loops.
pub fn maximal_flags_of_flats(b: &GaleDual, bound: usize) -> Result<Vec<Flag>, MatroidError> {
    if b.len() > bound {
        return Err(MatroidError::BoundExceeded { found: b.len(), bound });
    }
    if !loops(b).is_empty() {
        return Ok(Vec::new());
    }
    let all: Vec<usize> = (0..b.len()).collect();
    let mut flags: Vec<Flag> = maximal_chains_between(b, &[], &all)
        .into_iter()
        .map(|levels| Flag { levels })
        .collect();
    flags.sort();
    flags.dedup();
    Ok(flags)
}

/// All maximal flags of flats accepted by [`chains_case`], in lexicographic order.
pub fn enumerate_flags_of_flats(cfg: &PointConfig, b: &GaleDual, bound: usize) -> Result<Vec<Flag>, MatroidError> {
    Ok(maximal_flags_of_flats(b, bound)?
        .into_iter()
        .filter(|f| chains_case(cfg, b, f).is_ok())
        .collect())
}

/// All flats, sorted.
pub fn enumerate_flats(b: &GaleDual) -> Vec<Vec<usize>> {
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stack = vec![b.closure(&[])];
    while let Some(f) = stack.pop() {
        if !found.insert(f.clone()) {
            continue;
        }
        for k in 0..b.len() {
            if !f.contains(&k) {
                let mut s = f.clone();
                s.push(k);
                stack.push(b.closure(&s));
            }
        }
    }
    found.into_iter().collect()
}

/// A maximal accepted flag refining `flag`, if one exists.
pub fn accepted_refinement(cfg: &PointConfig, b: &GaleDual, flag: &Flag) -> Option<(Flag, ChainsCase)> {
    if !is_flag_of_flats(b, flag) {
        return None;
    }
    let mut segments: Vec<Vec<Vec<Vec<usize>>>> = Vec::new();
    let mut prev = b.closure(&[]);
    for level in &flag.levels {
        if level.len() < prev.len() || !prev.iter().all(|i| level.contains(i)) {
            return None;
        }
        if *level == prev {
            segments.push(vec![Vec::new()]);
        } else {
            segments.push(maximal_chains_between(b, &prev, level));
        }
        prev = level.clone();
    }
    let mut choice = vec![0usize; segments.len()];
    loop {
        let levels: Vec<Vec<usize>> = segments
            .iter()
            .zip(&choice)
            .flat_map(|(seg, &c)| seg[c].iter().cloned())
            .collect();
        let candidate = Flag { levels };
        if let Ok(case) = chains_case(cfg, b, &candidate) {
            return Some((candidate, case));
        }
        let mut k = 0;
        loop {
            if k == choice.len() {
                return None;
            }
            choice[k] += 1;
            if choice[k] < segments[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Intersection of the span of a weight class with the lineality space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Defect {
    /// Dimension of the intersection modulo the all-ones vector.
    pub dim: usize,
    /// A primitive integral vector of the intersection, zero on the top set.
    pub witness: Option<Vec<BigInt>>,
}

/// Span of the weight class of `flag` (indicator vectors of all proper levels)
/// intersected with the row space of `A`, modulo the all-ones vector.
pub fn defect(cfg: &PointConfig, flag: &Flag) -> Defect {
    let s = cfg.len();
    let ind = |set: &[usize]| -> Vec<Rational> {
        (0..s)
            .map(|i| {
                if set.contains(&i) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    };
    let proper: Vec<&Vec<usize>> = flag.levels.iter().filter(|l| l.len() < s).collect();
    let mut class_gens: Vec<Vec<Rational>> = vec![vec![Rational::one(); s]];
    class_gens.extend(proper.iter().map(|l| ind(l)));
    let a_rows: Vec<Vec<Rational>> = cfg.matrix_a().row_vecs();
    let du = rank_of(s, &class_gens);
    let dw = rank_of(s, &a_rows);
    let mut both = class_gens.clone();
    both.extend(a_rows.iter().cloned());
    let dsum = rank_of(s, &both);
    let dim = du + dw - dsum - 1;
    if dim == 0 {
        return Defect { dim, witness: None };
    }
    // columns: class generators followed by negated rows of A
    let cols = class_gens.len() + a_rows.len();
    let mut m_rows = vec![vec![Rational::zero(); cols]; s];
    for (c, g) in class_gens.iter().enumerate() {
        for i in 0..s {
            m_rows[i][c] = g[i].clone();
        }
    }
    for (c, g) in a_rows.iter().enumerate() {
        for i in 0..s {
            m_rows[i][class_gens.len() + c] = -g[i].clone();
        }
    }
    let kernel = RatMatrix::from_rows(cols, m_rows).kernel_basis();
    let top = flag.top();
    let first = flag.levels.first().cloned().unwrap_or_default();
    for k in kernel {
        let mut w = vec![Rational::zero(); s];
        for (c, g) in class_gens.iter().enumerate() {
            for i in 0..s {
                w[i] += &k[c] * &g[i];
            }
        }
        if let Some(&t) = top.first() {
            let shift = w[t].clone();
            for x in w.iter_mut() {
                *x -= &shift;
            }
        }
        if w.iter().all(|x| x.is_zero()) {
            continue;
        }
        let mut v = primitive_integer(&w);
        let sign_at = first.iter().map(|&i| v[i].clone()).find(|x| !x.is_zero());
        let flip = match sign_at {
            Some(x) => x.is_negative(),
            None => v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()),
        };
        if flip {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
        return Defect { dim, witness: Some(v) };
    }
    Defect { dim, witness: None }
}

pub fn is_defective(cfg: &PointConfig, flag: &Flag) -> bool {
    defect(cfg, flag).dim > 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn ex_thomas() -> PointConfig {
        PointConfig::new(vec![
            [0, 0, 0],
            [0, 0, 1],
            [0, 0, 2],
            [-1, -1, 0],
            [0, 1, 0],
            [1, 0, 0],
            [2, 1, 1],
        ])
        .unwrap()
    }

    fn worked() -> PointConfig {
        PointConfig::new(vec![
            [0, 0, 0],
            [0, 1, 1],
            [0, 1, 2],
            [0, 2, 1],
            [1, 1, 1],
            [3, 0, 2],
            [-1, 1, 0],
        ])
        .unwrap()
    }

    fn defective_eight() -> PointConfig {
        PointConfig::new(vec![
            [0, 0, 0],
            [0, 0, 1],
            [0, 0, 2],
            [0, 1, 0],
            [0, -1, 0],
            [1, 0, 0],
            [1, 1, 0],
            [-1, 0, 0],
        ])
        .unwrap()
    }

    fn flag(diffs: &[&[usize]]) -> Flag {
        Flag::from_differences(&diffs.iter().map(|d| d.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn gale_dual_spans_kernel() {
        let cfg = ex_thomas();
        let b = gale_dual(&cfg);
        assert_eq!(b.b.rows(), 3);
        assert_eq!(b.b.cols(), 7);
        assert!(cfg.matrix_a().mul(&b.b.transpose()).is_zero());
        let simplex = PointConfig::new(vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]).unwrap();
        let b = gale_dual(&simplex);
        assert_eq!(b.b.rows(), 1);
        let row = b.b.row(0);
        let ratio = &row[0] / rat(2);
        let expected: Vec<Rational> = [2, -1, -1, -1, 1].iter().map(|&c| rat(c) * &ratio).collect();
        assert_eq!(row, expected.as_slice());
    }

    #[test]
    fn degenerate_matrix_is_rejected() {
        let a = RatMatrix::from_rows(3, vec![vec![rat(1), rat(1), rat(1)], vec![rat(2), rat(2), rat(2)]]);
        assert_eq!(
            gale_dual_of_matrix(&a),
            Err(MatroidError::Degenerate { rank: 1, rows: 2 })
        );
    }

    #[test]
    fn flats_of_ex_thomas() {
        let b = gale_dual(&ex_thomas());
        assert!(is_flat(&b, &[]));
        assert!(is_flat(&b, &[0, 1, 2, 3, 4, 5, 6]));
        assert!(is_flat(&b, &[3]));
        assert!(!is_flat(&b, &[0, 1, 2]));
    }

    #[test]
    fn flags_from_heights() {
        let f = flag_of_subsets(&HeightVector::from_integers(&[0, 0, 0, -8, -5, -5, -5]));
        assert_eq!(f.differences(), vec![vec![3], vec![4, 5, 6], vec![0, 1, 2]]);
        let f = flag_of_subsets(&HeightVector::from_integers(&[0, 0, 0, -6, -6, -6, -8]));
        assert_eq!(f.differences(), vec![vec![6], vec![3, 4, 5], vec![0, 1, 2]]);
        let f = flag_of_subsets(&HeightVector::from_integers(&[2, 2, 2]));
        assert_eq!(f.levels, vec![vec![0, 1, 2]]);
        assert_eq!(f.describe(), "{a,b,c}");
    }

    #[test]
    fn ex_thomas_flags_are_case_c() {
        let cfg = ex_thomas();
        let b = gale_dual(&cfg);
        let f = flag(&[&[3], &[4, 5, 6], &[0, 1, 2]]);
        let case = chains_case(&cfg, &b, &f).unwrap();
        assert_eq!(case.tag, ChainsTag::C);
        assert_eq!(case.j, Some(2));
        assert_eq!(case.circuit_type, CircuitType::E);
        let f = flag(&[&[6], &[3, 4, 5], &[0, 1, 2]]);
        assert_eq!(chains_case(&cfg, &b, &f).unwrap().tag, ChainsTag::C);
    }

    #[test]
    fn worked_example_case_b() {
        let cfg = worked();
        let b = gale_dual(&cfg);
        let f = flag(&[&[6], &[4, 5], &[0, 1, 2, 3]]);
        let case = chains_case(&cfg, &b, &f).unwrap();
        assert_eq!(case.tag, ChainsTag::B);
        assert_eq!(case.circuit_type, CircuitType::C);
        let wrong = flag(&[&[4, 5], &[6], &[0, 1, 2, 3]]);
        let r = chains_case(&cfg, &b, &wrong).unwrap_err();
        assert_eq!(r.reason, RejectReason::CaseBCoplanar { index: 6 });
        assert!(!r.discrepancy);
    }

    #[test]
    fn case_b_plane_clause() {
        // (0,1,0) of the pair lies on the plane x = 0 of the circuit
        let cfg = PointConfig::new(vec![
            [0, 0, 0],
            [0, 1, 1],
            [0, 1, 2],
            [0, 2, 1],
            [1, 1, 1],
            [0, 1, 0],
            [-1, 1, 0],
        ])
        .unwrap();
        let b = gale_dual(&cfg);
        let f = flag(&[&[6], &[4, 5], &[0, 1, 2, 3]]);
        let r = chains_case(&cfg, &b, &f).unwrap_err();
        assert_eq!(r.reason, RejectReason::CaseBPlane { index: 5 });
        assert!(r.to_string().starts_with("case-b plane clause"));
    }

    #[test]
    fn sizes_and_maximality() {
        let cfg = ex_thomas();
        let b = gale_dual(&cfg);
        let r = chains_case(&cfg, &b, &flag(&[&[3, 4, 5, 6], &[0, 1, 2]])).unwrap_err();
        assert_eq!(r.reason, RejectReason::NotMaximal { levels: 2, expected: 3 });
        let r = chains_case(&cfg, &b, &flag(&[&[3], &[4], &[0, 1, 2, 5, 6]])).unwrap_err();
        assert_eq!(r.reason, RejectReason::TopNotCircuit);
    }

    #[test]
    fn enumeration_contains_known_flags() {
        let cfg = ex_thomas();
        let b = gale_dual(&cfg);
        let flags = enumerate_flags_of_flats(&cfg, &b, DEFAULT_ENUMERATION_BOUND).unwrap();
        assert!(flags.contains(&flag(&[&[3], &[4, 5, 6], &[0, 1, 2]])));
        assert!(flags.contains(&flag(&[&[6], &[3, 4, 5], &[0, 1, 2]])));
        let mut sorted = flags.clone();
        sorted.sort();
        assert_eq!(flags, sorted);
        let cfg = worked();
        let b = gale_dual(&cfg);
        let flags = enumerate_flags_of_flats(&cfg, &b, DEFAULT_ENUMERATION_BOUND).unwrap();
        assert!(flags.contains(&flag(&[&[6], &[4, 5], &[0, 1, 2, 3]])));
        for f in &flags {
            assert!(is_flag_of_flats(&b, f));
        }
    }

    #[test]
    fn every_maximal_flag_of_flats_is_accepted() {
        for cfg in [ex_thomas(), worked(), defective_eight()] {
            let b = gale_dual(&cfg);
            let all = maximal_flags_of_flats(&b, DEFAULT_ENUMERATION_BOUND).unwrap();
            assert!(!all.is_empty());
            for f in &all {
                assert_eq!(f.len(), cfg.len() - 4);
                if let Err(r) = chains_case(&cfg, &b, f) {
                    panic!("{} rejected: {r}", f.describe());
                }
            }
        }
    }

    #[test]
    fn pyramid_apex_is_a_loop() {
        let cfg = PointConfig::new(vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1], [2, 0, 0]]).unwrap();
        let b = gale_dual(&cfg);
        assert_eq!(loops(&b), vec![4]);
        assert!(maximal_flags_of_flats(&b, DEFAULT_ENUMERATION_BOUND)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn single_circuit_flags_are_singleton_chains() {
        let cfg = PointConfig::new(vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]).unwrap();
        let b = gale_dual(&cfg);
        let flags = enumerate_flags_of_flats(&cfg, &b, DEFAULT_ENUMERATION_BOUND).unwrap();
        assert_eq!(flags, vec![flag(&[&[0, 1, 2, 3, 4]])]);
    }

    #[test]
    fn bound_is_enforced() {
        let cfg = ex_thomas();
        let b = gale_dual(&cfg);
        assert_eq!(
            enumerate_flags_of_flats(&cfg, &b, 6),
            Err(MatroidError::BoundExceeded { found: 7, bound: 6 })
        );
    }

    #[test]
    fn flats_closed_under_intersection() {
        let b = gale_dual(&worked());
        let flats = enumerate_flats(&b);
        for x in &flats {
            for y in &flats {
                let inter: Vec<usize> = x.iter().copied().filter(|i| y.contains(i)).collect();
                assert!(flats.contains(&inter));
            }
        }
    }

    #[test]
    fn defective_class_of_eight_points() {
        let cfg = defective_eight();
        let f = flag(&[&[7], &[5, 6], &[3, 4], &[0, 1, 2]]);
        let b = gale_dual(&cfg);
        assert!(chains_case(&cfg, &b, &f).is_ok());
        let d = defect(&cfg, &f);
        assert_eq!(d.dim, 1);
        let expected: Vec<BigInt> = [0, 0, 0, 0, 0, -1, -1, 1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(d.witness, Some(expected));
        let other = flag(&[&[6], &[5, 7], &[3, 4], &[0, 1, 2]]);
        assert!(chains_case(&cfg, &b, &other).is_ok());
        assert!(!is_defective(&cfg, &other));
    }

    #[test]
    fn collinear_second_level_is_defective() {
        let cfg = PointConfig::new(vec![[0, 0, 0], [0, 0, 1], [0, 0, 2], [0, 1, 0], [1, 1, 0], [2, 1, 0]]).unwrap();
        let f = flag(&[&[3, 4, 5], &[0, 1, 2]]);
        let b = gale_dual(&cfg);
        assert!(chains_case(&cfg, &b, &f).is_ok());
        assert!(is_defective(&cfg, &f));
    }

    #[test]
    fn refinement_of_boundary_flag() {
        let cfg = worked();
        let b = gale_dual(&cfg);
        let coarse = flag(&[&[4, 5, 6], &[0, 1, 2, 3]]);
        let (fine, case) = accepted_refinement(&cfg, &b, &coarse).unwrap();
        assert!(coarse.is_coarsening_of(&fine));
        assert_eq!(case.tag, ChainsTag::B);
        assert_eq!(accepted_refinement(&cfg, &b, &flag(&[&[5, 6], &[0, 1, 2, 3, 4]])), None);
    }
}
