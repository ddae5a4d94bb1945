//! Small exact polyhedra given by equations and inequalities.

use num_traits::{Signed, Zero};

use crate::linalg::{dot, primitive_integer, rank_of, sub, AffineSolution};
use crate::{RatMatrix, Rational};

/// `{x : eq_i . x = b_i, le_j . x <= c_j}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polyhedron {
    pub ambient: usize,
    pub equations: Vec<(Vec<Rational>, Rational)>,
    pub inequalities: Vec<(Vec<Rational>, Rational)>,
}

/// V-description: `conv(vertices) + cone(rays) + span(lineality)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Piece {
    pub dim: usize,
    pub vertices: Vec<Vec<Rational>>,
    pub rays: Vec<Vec<Rational>>,
    pub lineality: Vec<Vec<Rational>>,
}

impl Piece {
    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }

    pub fn is_point(&self) -> bool {
        self.dim == 0
    }
}

fn canonical_direction(v: &[Rational]) -> Vec<Rational> {
    primitive_integer(v).into_iter().map(Rational::from_integer).collect()
}

fn combine(base: &[Rational], basis: &[Vec<Rational>], coeffs: &[Rational]) -> Vec<Rational> {
    let mut out = base.to_vec();
    for (b, c) in basis.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl Polyhedron {
    pub fn new(ambient: usize) -> Self {
        Polyhedron {
            ambient,
            ..Default::default()
        }
    }

    pub fn equal(&mut self, a: Vec<Rational>, b: Rational) {
        self.equations.push((a, b));
    }

    pub fn at_most(&mut self, a: Vec<Rational>, b: Rational) {
        self.inequalities.push((a, b));
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.equations.iter().all(|(a, b)| &dot(a, x) == b) && self.inequalities.iter().all(|(a, b)| &dot(a, x) <= b)
    }

    /// Vertices, rays and lineality of the polyhedron, or `None` when empty.
    pub fn describe(&self) -> Option<Piece> {
        let n = self.ambient;
        let (x0, k_basis) = if self.equations.is_empty() {
            let id: Vec<Vec<Rational>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                Rational::from_integer(1.into())
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            (vec![Rational::zero(); n], id)
        } else {
            let m = RatMatrix::from_rows(n, self.equations.iter().map(|(a, _)| a.clone()).collect());
            let rhs: Vec<Rational> = self.equations.iter().map(|(_, b)| b.clone()).collect();
            match m.solve_affine(&rhs) {
                AffineSolution::Infeasible { .. } => return None,
                AffineSolution::Feasible { particular, kernel } => (particular, kernel),
            }
        };
        let k = k_basis.len();
        // inequalities in the parameters t of x = x0 + K t
        let c_rows: Vec<Vec<Rational>> = self
            .inequalities
            .iter()
            .map(|(a, _)| k_basis.iter().map(|col| dot(a, col)).collect())
            .collect();
        let d: Vec<Rational> = self.inequalities.iter().map(|(a, b)| b - dot(a, &x0)).collect();
        let lineality_t = if c_rows.is_empty() {
            subsets(k, 1).into_iter().map(|s| unit(k, s[0])).collect()
        } else {
            RatMatrix::from_rows(k, c_rows.clone()).kernel_basis()
        };
        let r = k - lineality_t.len();
        let range_t: Vec<Vec<Rational>> = if r == 0 {
            Vec::new()
        } else {
            let (rr, pivots) = RatMatrix::from_rows(k, c_rows.clone()).rref();
            (0..pivots.len()).map(|i| rr.row(i).to_vec()).collect()
        };
        // constraints on mu with t = R mu
        let cr: Vec<Vec<Rational>> = c_rows
            .iter()
            .map(|row| range_t.iter().map(|b| dot(row, b)).collect())
            .collect();
        let mut vertices_mu: Vec<Vec<Rational>> = Vec::new();
        if r == 0 {
            if d.iter().any(|x| x.is_negative()) {
                return None;
            }
            vertices_mu.push(Vec::new());
        } else {
            for s in subsets(cr.len(), r) {
                let m = RatMatrix::from_rows(r, s.iter().map(|&i| cr[i].clone()).collect());
                if m.rank() < r {
                    continue;
                }
                let rhs: Vec<Rational> = s.iter().map(|&i| d[i].clone()).collect();
                let Some(mu) = m.solve_affine(&rhs).unique().map(|x| x.to_vec()) else {
                    continue;
                };
                if cr.iter().zip(&d).all(|(row, bound)| &dot(row, &mu) <= bound) && !vertices_mu.contains(&mu) {
                    vertices_mu.push(mu);
                }
            }
            if vertices_mu.is_empty() {
                return None;
            }
        }
        let mut rays_mu: Vec<Vec<Rational>> = Vec::new();
        if r > 0 {
            for s in subsets(cr.len(), r - 1) {
                let m = RatMatrix::from_rows(r, s.iter().map(|&i| cr[i].clone()).collect());
                let ker = m.kernel_basis();
                if ker.len() != 1 {
                    continue;
                }
                for sign in [1i64, -1] {
                    let v: Vec<Rational> = ker[0].iter().map(|x| x * Rational::from_integer(sign.into())).collect();
                    if cr.iter().all(|row| !dot(row, &v).is_positive()) {
                        let v = canonical_direction(&v);
                        if !rays_mu.contains(&v) {
                            rays_mu.push(v);
                        }
                    }
                }
            }
        }
        let to_x = |t: &[Rational]| combine(&x0, &k_basis, t);
        let to_dir = |t: &[Rational]| combine(&vec![Rational::zero(); n], &k_basis, t);
        let mut vertices: Vec<Vec<Rational>> = vertices_mu
            .iter()
            .map(|mu| to_x(&combine(&vec![Rational::zero(); k], &range_t, mu)))
            .collect();
        vertices.sort();
        vertices.dedup();
        let mut rays: Vec<Vec<Rational>> = rays_mu
            .iter()
            .map(|mu| canonical_direction(&to_dir(&combine(&vec![Rational::zero(); k], &range_t, mu))))
            .collect();
        rays.sort();
        rays.dedup();
        let lineality: Vec<Vec<Rational>> = lineality_t.iter().map(|t| canonical_direction(&to_dir(t))).collect();
        let mut span: Vec<Vec<Rational>> = vertices.iter().skip(1).map(|v| sub(v, &vertices[0])).collect();
        span.extend(rays.iter().cloned());
        span.extend(lineality.iter().cloned());
        let dim = rank_of(n, &span);
        Some(Piece {
            dim,
            vertices,
            rays,
            lineality,
        })
    }
}

fn unit(k: usize, i: usize) -> Vec<Rational> {
    (0..k)
        .map(|j| {
            if i == j {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn unit_square() {
        let mut p = Polyhedron::new(2);
        p.at_most(v(&[-1, 0]), rat(0));
        p.at_most(v(&[0, -1]), rat(0));
        p.at_most(v(&[1, 0]), rat(1));
        p.at_most(v(&[0, 1]), rat(1));
        let piece = p.describe().unwrap();
        assert_eq!(piece.dim, 2);
        assert_eq!(piece.vertices, vec![v(&[0, 0]), v(&[0, 1]), v(&[1, 0]), v(&[1, 1])]);
        assert!(piece.is_bounded());
    }

    #[test]
    fn segment_in_space() {
        let mut p = Polyhedron::new(3);
        p.equal(v(&[0, 1, 0]), rat(0));
        p.equal(v(&[0, 0, 1]), rat(2));
        p.at_most(v(&[1, 0, 0]), rat(3));
        p.at_most(v(&[-1, 0, 0]), rat(1));
        let piece = p.describe().unwrap();
        assert_eq!(piece.dim, 1);
        assert_eq!(piece.vertices, vec![v(&[-1, 0, 2]), v(&[3, 0, 2])]);
    }

    #[test]
    fn ray_and_line() {
        let mut p = Polyhedron::new(3);
        p.equal(v(&[0, 0, 1]), rat(0));
        p.at_most(v(&[-1, 0, 0]), rat(-2));
        let piece = p.describe().unwrap();
        assert_eq!(piece.dim, 2);
        assert_eq!(piece.vertices, vec![v(&[2, 0, 0])]);
        assert_eq!(piece.rays, vec![v(&[1, 0, 0])]);
        assert_eq!(piece.lineality.len(), 1);

        let mut line = Polyhedron::new(3);
        line.equal(v(&[0, 1, 0]), rat(0));
        line.equal(v(&[0, 0, 1]), rat(0));
        let piece = line.describe().unwrap();
        assert_eq!(piece.dim, 1);
        assert!(!piece.is_bounded());
    }

    #[test]
    fn empty_systems() {
        let mut p = Polyhedron::new(1);
        p.at_most(v(&[1]), rat(0));
        p.at_most(v(&[-1]), rat(-1));
        assert_eq!(p.describe(), None);
        let mut q = Polyhedron::new(2);
        q.equal(v(&[1, 1]), rat(0));
        q.equal(v(&[2, 2]), rat(1));
        assert_eq!(q.describe(), None);
    }

    #[test]
    fn single_point_and_membership() {
        let mut p = Polyhedron::new(3);
        p.equal(v(&[1, 0, 0]), rat(1));
        p.equal(v(&[0, 1, 0]), rat(2));
        p.equal(v(&[0, 0, 1]), rat(3));
        p.at_most(v(&[1, 1, 1]), rat(6));
        let piece = p.describe().unwrap();
        assert!(piece.is_point());
        assert_eq!(piece.vertices, vec![v(&[1, 2, 3])]);
        assert!(p.contains(&v(&[1, 2, 3])));
        let mut q = Polyhedron::new(3);
        q.equal(v(&[1, 0, 0]), rat(1));
        q.at_most(v(&[1, 1, 1]), rat(0));
        q.at_most(v(&[-1, -1, -1]), rat(0));
        let piece = q.describe().unwrap();
        assert_eq!(piece.dim, 1);
        assert!(q.contains(&v(&[1, -1, 0])));
        assert!(!q.contains(&v(&[1, 0, 0])));
    }
}
