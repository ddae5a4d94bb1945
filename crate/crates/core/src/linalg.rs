//! Exact dense linear algebra over a field.
//!
//! Everything here is written against [`Field`], a thin bound over
//! `num-traits`. The library instantiates it with arbitrary-precision
//! rationals ([`crate::Rational`]); `Ratio<i64>` also works for small
//! inputs. Elimination always pivots on the first nonzero entry of a
//! column, so results are deterministic for a given input.

use std::fmt;
use std::ops::{Index, IndexMut, Neg};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Scalar bound for exact elimination. Any exact field works; floating
/// point types satisfy the bound but equality tests become meaningless.
pub trait Field: Clone + PartialEq + fmt::Debug + num_traits::Num + Neg<Output = Self> {}

impl<T> Field for T where T: Clone + PartialEq + fmt::Debug + num_traits::Num + Neg<Output = T> {}

/// A field with a total order compatible with its arithmetic.
pub trait OrderedField: Field + PartialOrd {}

impl<T> OrderedField for T where T: Field + PartialOrd {}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.rows {
            list.entry(&&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        list.finish()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Field> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged row");
            data.extend(row);
        }
        Matrix { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    /// Restriction to a subset of columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m[(r, j)] = self[(r, c)].clone();
            }
        }
        m
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "stack: column mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "mul_vec: length mismatch");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "mul: shape mismatch");
        let mut m = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self[(r, k)].clone() * other[(k, c)].clone();
                }
                m[(r, c)] = acc;
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.eliminate(self.cols, None);
        (m, pivots)
    }

    /// In-place Gauss-Jordan elimination restricted to the first
    /// `pivot_cols` columns; the remaining columns are carried along.
    /// When `track` is given, the same row operations are applied to it.
    fn eliminate(&mut self, pivot_cols: usize, mut track: Option<&mut Self>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..pivot_cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            if p != row {
                self.swap_rows(p, row);
                if let Some(t) = track.as_deref_mut() {
                    t.swap_rows(p, row);
                }
            }
            let inv = T::one() / self[(row, col)].clone();
            self.scale_row(row, &inv);
            if let Some(t) = track.as_deref_mut() {
                t.scale_row(row, &inv);
            }
            for r in 0..self.rows {
                if r != row && !self[(r, col)].is_zero() {
                    let factor = self[(r, col)].clone();
                    self.add_row_multiple(r, row, &factor);
                    if let Some(t) = track.as_deref_mut() {
                        t.add_row_multiple(r, row, &factor);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, factor: &T) {
        for c in 0..self.cols {
            let v = self[(r, c)].clone() * factor.clone();
            self[(r, c)] = v;
        }
    }

    /// row[target] -= factor * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, factor: &T) {
        for c in 0..self.cols {
            let v = self[(target, c)].clone() - factor.clone() * self[(source, c)].clone();
            self[(target, c)] = v;
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{v : M v = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    /// All solutions of `M x = b`, or a certificate that there are none.
    pub fn solve_affine(&self, b: &[T]) -> AffineSolution<T> {
        assert_eq!(b.len(), self.rows, "solve_affine: rhs length mismatch");
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, self.cols)] = b[r].clone();
        }
        let mut track = Self::identity(self.rows);
        let pivots = aug.eliminate(self.cols, Some(&mut track));
        for r in pivots.len()..self.rows {
            if !aug[(r, self.cols)].is_zero() {
                return AffineSolution::Infeasible {
                    witness: track.row(r).to_vec(),
                };
            }
        }
        let mut particular = vec![T::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            particular[p] = aug[(i, self.cols)].clone();
        }
        AffineSolution::Feasible {
            particular,
            kernel: self.kernel_basis(),
        }
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let mut m = self.clone();
        let n = self.rows;
        let mut det = T::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return T::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det = det * pivot.clone();
            for r in col + 1..n {
                if !m[(r, col)].is_zero() {
                    let factor = m[(r, col)].clone() / pivot.clone();
                    m.add_row_multiple(r, col, &factor);
                }
            }
        }
        det
    }
}

/// Result of [`Matrix::solve_affine`].
#[derive(Clone, Debug, PartialEq)]
pub enum AffineSolution<T> {
    /// `particular + span(kernel)` is the full solution set.
    Feasible { particular: Vec<T>, kernel: Vec<Vec<T>> },
    /// `witness * M = 0` while `witness . b != 0`.
    Infeasible { witness: Vec<T> },
}

impl<T: Field> AffineSolution<T> {
    /// The unique solution, if the system has exactly one.
    pub fn unique(&self) -> Option<&[T]> {
        match self {
            AffineSolution::Feasible { particular, kernel } if kernel.is_empty() => Some(particular),
            _ => None,
        }
    }
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn sub<T: Field>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn add<T: Field>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn scale<T: Field>(a: &[T], s: &T) -> Vec<T> {
    a.iter().map(|x| x.clone() * s.clone()).collect()
}

/// Rank of a list of row vectors of common length `cols`.
pub fn rank_of<T: Field>(cols: usize, rows: &[Vec<T>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_rows(cols, rows.to_vec()).rank()
}

// ---------------------------------------------------------------------------
// Rational helpers

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats as `"p"` or `"p/q"`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}")]
pub struct ParseRationalError(pub String);

/// Accepts `"p"`, `"p/q"` and optional surrounding whitespace.
/// A zero denominator is rejected.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(n, d))
}

/// Scales a rational vector to the primitive integer vector on the same
/// ray (positive multiple). The zero vector maps to zeros.
pub fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Flips the sign of `v` so that its first nonzero entry is positive.
pub fn normalize_first_positive<T: OrderedField>(v: &mut [T]) {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if *first < T::zero() {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
    }
}

pub fn to_rational_vec(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| rat(x)).collect()
}

pub fn is_negative(r: &BigRational) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn int_matrix(cols: usize, rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(cols, rows.iter().map(|r| to_rational_vec(r)).collect())
    }

    fn ex_thomas_a() -> Matrix<BigRational> {
        int_matrix(
            7,
            &[
                &[1, 1, 1, 1, 1, 1, 1],
                &[0, 0, 0, -1, 0, 1, 2],
                &[0, 0, 0, -1, 1, 0, 1],
                &[0, 1, 2, 0, 0, 0, 1],
            ],
        )
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::<BigRational>::identity(4).rank(), 4);
        assert_eq!(Matrix::<BigRational>::zeros(3, 5).rank(), 0);
        assert_eq!(ex_thomas_a().rank(), 4);
    }

    #[test]
    fn kernel_examples() {
        assert!(Matrix::<BigRational>::identity(3).kernel_basis().is_empty());

        let ones = int_matrix(3, &[&[1, 1, 1]]);
        let k = ones.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(v.iter().cloned().sum::<BigRational>().is_zero());
        }

        let a = ex_thomas_a();
        let k = a.kernel_basis();
        assert_eq!(k.len(), 3);
        for v in &k {
            assert!(a.mul_vec(v).iter().all(|x| x.is_zero()));
        }
        assert_eq!(rank_of(7, &k), 3);
    }

    #[test]
    fn solve_identity_and_infeasible() {
        let id = Matrix::<BigRational>::identity(3);
        let b = vec![frac(1, 2), rat(-3), rat(7)];
        assert_eq!(id.solve_affine(&b).unique().unwrap(), &b[..]);

        let zero = int_matrix(1, &[&[0]]);
        match zero.solve_affine(&[rat(1)]) {
            AffineSolution::Infeasible { witness } => {
                assert!(dot(&witness, &[rat(1)]) != rat(0));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_witness_annihilates_rows() {
        // x + y = 1, 2x + 2y = 3
        let m = int_matrix(2, &[&[1, 1], &[2, 2]]);
        let b = vec![rat(1), rat(3)];
        let AffineSolution::Infeasible { witness } = m.solve_affine(&b) else {
            panic!("system is inconsistent");
        };
        let wm = m.transpose().mul_vec(&witness);
        assert!(wm.iter().all(|x| x.is_zero()));
        assert!(!dot(&witness, &b).is_zero());
    }

    #[test]
    fn unit_pentatope_equal_heights_vertex_is_origin() {
        // Terms u + m.x for m in {0, e1, e2, e3, (1,1,1)}, all u equal:
        // m_i.x - m_0.x = 0.
        let pts: [[i64; 3]; 5] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]];
        let rows: Vec<Vec<BigRational>> = pts[1..].iter().map(|p| to_rational_vec(p)).collect();
        let m = Matrix::from_rows(3, rows);
        let sol = m.solve_affine(&[rat(0), rat(0), rat(0), rat(0)]);
        assert_eq!(sol.unique().unwrap(), &[rat(0), rat(0), rat(0)][..]);
    }

    #[test]
    fn det_matches_small_cases() {
        let m = int_matrix(3, &[&[1, 0, 0], &[0, 1, 0], &[3, 7, 20]]);
        assert_eq!(m.det(), rat(20));
        let m = int_matrix(2, &[&[0, 1], &[1, 0]]);
        assert_eq!(m.det(), rat(-1));
    }

    #[test]
    fn works_over_small_rationals() {
        let m: Matrix<Rational64> = Matrix::from_rows(
            3,
            vec![vec![1.into(), 2.into(), 3.into()], vec![2.into(), 4.into(), 6.into()]],
        );
        assert_eq!(m.rank(), 1);
        assert_eq!(m.kernel_basis().len(), 2);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("-8").unwrap(), rat(-8));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), frac(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&frac(-7, 2)), "-7/2");
        assert_eq!(format_rational(&rat(5)), "5");
    }

    #[test]
    fn primitive_vectors() {
        let v = vec![frac(1, 2), frac(-1, 1), frac(1, 2)];
        let p = primitive_integer(&v);
        assert_eq!(p, vec![BigInt::from(1), BigInt::from(-2), BigInt::from(1)]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix() -> impl Strategy<Value = Matrix<BigRational>> {
            (1usize..5, 1usize..6).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-3i64..=3, r * c)
                    .prop_map(move |d| Matrix::from_rows(c, d.chunks(c).map(to_rational_vec).collect()))
            })
        }

        proptest! {
            #[test]
            fn rank_nullity(m in small_matrix()) {
                let k = m.kernel_basis();
                prop_assert_eq!(m.rank() + k.len(), m.cols());
                for v in &k {
                    prop_assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
                }
                prop_assert_eq!(rank_of(m.cols(), &k), k.len());
            }

            #[test]
            fn solve_affine_is_exact(m in small_matrix(), seed in proptest::collection::vec(-3i64..=3, 6)) {
                let x: Vec<BigRational> = seed[..m.cols()].iter().map(|&v| rat(v)).collect();
                let b = m.mul_vec(&x);
                match m.solve_affine(&b) {
                    AffineSolution::Feasible { particular, kernel } => {
                        prop_assert_eq!(m.mul_vec(&particular), b);
                        prop_assert_eq!(kernel.len(), m.cols() - m.rank());
                    }
                    AffineSolution::Infeasible { .. } => prop_assert!(false, "consistent system reported infeasible"),
                }
            }
        }
    }
}
