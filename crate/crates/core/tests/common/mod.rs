#![allow(dead_code)]

use num_traits::{Signed, Zero};
use rand::Rng;
use tropsurf::lattice::{LatticePoint, Polytope, UnimodularMap};
use tropsurf::linalg::{frac, rat};
use tropsurf::{HeightVector, PointConfig, Rational};

pub fn config(points: &[[i64; 3]]) -> PointConfig {
    PointConfig::new(points.to_vec()).expect("valid configuration")
}

pub fn q(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| rat(x)).collect()
}

pub const EX_THOMAS: [[i64; 3]; 7] = [
    [0, 0, 0],
    [0, 0, 1],
    [0, 0, 2],
    [-1, -1, 0],
    [0, 1, 0],
    [1, 0, 0],
    [2, 1, 1],
];

pub fn ex_thomas() -> (PointConfig, HeightVector) {
    (
        config(&EX_THOMAS),
        HeightVector::from_integers(&[0, 0, 0, -8, -5, -5, -5]),
    )
}

/// Type-C circuit `a,b,c,d`, apexes `e` (height 1) and `f` (height 3) on
/// one side, `g` on the other.
pub const WORKED: [[i64; 3]; 7] = [
    [0, 0, 0],
    [0, 1, 1],
    [0, 1, 2],
    [0, 2, 1],
    [1, 1, 1],
    [3, 0, 2],
    [-1, 1, 0],
];

pub fn worked(ue: Rational) -> (PointConfig, HeightVector) {
    let mut u = HeightVector::from_integers(&[0, 0, 0, 0, 0, -5, -2]);
    u.0[4] = ue;
    (config(&WORKED), u)
}

pub const DEFECTIVE: [[i64; 3]; 8] = [
    [0, 0, 0],
    [0, 0, 1],
    [0, 0, 2],
    [0, 1, 0],
    [0, -1, 0],
    [1, 0, 0],
    [1, 1, 0],
    [-1, 0, 0],
];

pub const CODIM2: [[i64; 3]; 8] = [
    [0, 0, 0],
    [0, 0, 1],
    [0, 0, 2],
    [0, 1, 0],
    [1, 1, 0],
    [2, 1, 0],
    [-1, -1, 0],
    [1, 1, 1],
];

/// Inputs on a codimension-one wall covering circuit types B through E.
pub fn templates() -> Vec<(PointConfig, HeightVector)> {
    vec![
        ex_thomas(),
        worked(rat(-4)),
        worked(rat(-2)),
        worked(rat(-1)),
        (
            config(&[[0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1], [1, 0, 0], [-1, 0, 0]]),
            HeightVector::from_integers(&[0, 0, 0, 0, -2, -2]),
        ),
        (
            config(&[
                [0, 0, 0],
                [0, 0, 1],
                [0, 0, 2],
                [1, 0, 0],
                [-1, 0, 0],
                [0, 1, 0],
                [0, -1, 0],
            ]),
            HeightVector::from_integers(&[0, 0, 0, -1, -1, -3, -3]),
        ),
    ]
}

pub fn random_rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> Rational {
    frac(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

/// Product of elementary integer matrices with bounded entries.
pub fn random_unimodular<R: Rng>(rng: &mut R) -> UnimodularMap<3> {
    loop {
        let mut m = UnimodularMap::<3>::identity();
        for _ in 0..rng.gen_range(1..=5) {
            let mut lin = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
            let i = rng.gen_range(0..3);
            let j = (i + rng.gen_range(1..3)) % 3;
            match rng.gen_range(0..3) {
                0 => lin[i][j] = if rng.gen_bool(0.5) { 1 } else { -1 },
                1 => lin.swap(i, j),
                _ => lin[i][i] = -1,
            }
            let step = UnimodularMap::new(lin, [0; 3]).expect("elementary matrix");
            m = step.compose(&m);
        }
        let t = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
        let lin = m.apply(&[1, 0, 0]);
        let cols = [lin, m.apply(&[0, 1, 0]), m.apply(&[0, 0, 1])];
        if cols.iter().flatten().all(|x| x.abs() <= 3) {
            let linear = [0, 1, 2].map(|r| [0, 1, 2].map(|c| cols[c][r]));
            return UnimodularMap::new(linear, t).expect("product of elementary matrices");
        }
    }
}

fn area2(pts: &[[Rational; 2]]) -> Rational {
    let n = pts.len();
    let mut s = Rational::zero();
    for i in 0..n {
        let (p, r) = (&pts[i], &pts[(i + 1) % n]);
        s += &p[0] * &r[1] - &p[1] * &r[0];
    }
    s.abs()
}

fn cyclic_order(mut pts: Vec<[Rational; 2]>) -> Vec<[Rational; 2]> {
    let n = rat(pts.len() as i64);
    let c = [
        pts.iter().fold(Rational::zero(), |a, p| a + &p[0]) / &n,
        pts.iter().fold(Rational::zero(), |a, p| a + &p[1]) / &n,
    ];
    let rel = |p: &[Rational; 2]| [&p[0] - &c[0], &p[1] - &c[1]];
    let half = |v: &[Rational; 2]| v[1].is_negative() || (v[1].is_zero() && v[0].is_negative());
    pts.sort_by(|a, b| {
        let (va, vb) = (rel(a), rel(b));
        half(&va).cmp(&half(&vb)).then_with(|| {
            let cross = &va[0] * &vb[1] - &va[1] * &vb[0];
            Rational::zero().cmp(&cross)
        })
    });
    pts
}

/// Normalized volume of a full-dimensional lattice polytope, summed over
/// cones from its vertex barycenter to the facets.
pub fn hull_volume(points: &[LatticePoint]) -> Rational {
    let poly = Polytope::hull_of(points).expect("nonempty");
    let hull = poly.hull();
    let n = rat(poly.vertices.len() as i64);
    let c: Vec<Rational> = (0..3)
        .map(|k| poly.vertices.iter().fold(Rational::zero(), |a, v| a + rat(v[k])) / &n)
        .collect();
    let mut total = Rational::zero();
    for f in &hull.facets {
        let k = (0..3).find(|&k| !f.normal[k].is_zero()).expect("nonzero normal");
        let keep: Vec<usize> = (0..3).filter(|&x| x != k).collect();
        let proj: Vec<[Rational; 2]> = f
            .incident
            .iter()
            .map(|&i| [rat(poly.vertices[i][keep[0]]), rat(poly.vertices[i][keep[1]])])
            .collect();
        let area = area2(&cyclic_order(proj)) / rat(2);
        let h = &f.offset - f.normal.iter().zip(&c).fold(Rational::zero(), |a, (x, y)| a + x * y);
        total += rat(2) * h * area / f.normal[k].abs();
    }
    total
}
