//! Brute-force singular locus: one polyhedron per maximal flag of flats.

use crate::matroid::{gale_dual, maximal_flags_of_flats, Flag, MatroidError};
use crate::polyhedron::{Piece, Polyhedron};
use crate::subdivision::{HeightVector, PointConfig};
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct OraclePiece {
    pub flag: Flag,
    pub piece: Piece,
}

fn point_row(cfg: &PointConfig, i: usize) -> Vec<Rational> {
    cfg.rational_point(i)
}

/// Points `p` for which `u + v(p)` is constant on each difference set of
/// `flag` and non-decreasing along it.
pub fn flag_polyhedron(cfg: &PointConfig, u: &HeightVector, flag: &Flag) -> Polyhedron {
    let mut poly = Polyhedron::new(3);
    let diffs = flag.differences();
    for d in &diffs {
        let m0 = point_row(cfg, d[0]);
        for &i in &d[1..] {
            let row: Vec<Rational> = point_row(cfg, i).iter().zip(&m0).map(|(a, b)| a - b).collect();
            poly.equal(row, &u.0[d[0]] - &u.0[i]);
        }
    }
    for w in diffs.windows(2) {
        let (lo, hi) = (w[0][0], w[1][0]);
        let row: Vec<Rational> = point_row(cfg, lo)
            .iter()
            .zip(&point_row(cfg, hi))
            .map(|(a, b)| a - b)
            .collect();
        poly.at_most(row, &u.0[hi] - &u.0[lo]);
    }
    poly
}

/// The singular locus as a union of closed polyhedra, sorted by flag.
pub fn singular_locus(cfg: &PointConfig, u: &HeightVector, bound: usize) -> Result<Vec<OraclePiece>, MatroidError> {
    let b = gale_dual(cfg);
    let flags = maximal_flags_of_flats(&b, bound)?;
    Ok(flags
        .into_iter()
        .filter_map(|flag| {
            let piece = flag_polyhedron(cfg, u, &flag).describe()?;
            Some(OraclePiece { flag, piece })
        })
        .collect())
}

/// Distinct isolated points among the pieces, sorted; `None` if some piece
/// has positive dimension.
pub fn isolated_points(pieces: &[OraclePiece]) -> Option<Vec<Vec<Rational>>> {
    let mut out = Vec::new();
    for p in pieces {
        if p.piece.dim > 0 {
            return None;
        }
        out.push(p.piece.vertices[0].clone());
    }
    out.sort();
    out.dedup();
    Some(out)
}
