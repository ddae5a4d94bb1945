mod common;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use tropsurf::linalg::{frac, rat};
use tropsurf::matroid::{flag_of_subsets, gale_dual, DEFAULT_ENUMERATION_BOUND};
use tropsurf::oracle::{isolated_points, singular_locus};
use tropsurf::singular::lineality_vector;
use tropsurf::{classify, HeightVector, PointConfig, RatMatrix, Rational};

/// Supports of the nonzero affine functions that vanish on a hyperplane
/// spanned by points of the configuration.
fn cocircuit_supports(cfg: &PointConfig) -> Vec<Vec<usize>> {
    let s = cfg.len();
    let mut out = Vec::new();
    for i in 0..s {
        for j in i + 1..s {
            for k in j + 1..s {
                let (a, b, c) = (cfg.rational_point(i), cfg.rational_point(j), cfg.rational_point(k));
                let rows = vec![
                    b.iter().zip(&a).map(|(x, y)| x - y).collect::<Vec<_>>(),
                    c.iter().zip(&a).map(|(x, y)| x - y).collect(),
                ];
                let ker = RatMatrix::from_rows(3, rows).kernel_basis();
                if ker.len() != 1 {
                    continue;
                }
                let n = &ker[0];
                let off = n.iter().zip(&a).fold(Rational::zero(), |acc, (x, y)| acc + x * y);
                let support: Vec<usize> = (0..s)
                    .filter(|&m| {
                        let v = n
                            .iter()
                            .zip(&cfg.rational_point(m))
                            .fold(Rational::zero(), |acc, (x, y)| acc + x * y);
                        v != off
                    })
                    .collect();
                if !out.contains(&support) {
                    out.push(support);
                }
            }
        }
    }
    out
}

/// `w` lies in the tropicalization of `ker A` when the maximum of `w` over
/// every such support is attained twice.
fn in_tropical_kernel(cfg: &PointConfig, w: &HeightVector) -> bool {
    cocircuit_supports(cfg).iter().all(|c| {
        let max = c.iter().map(|&i| &w.0[i]).max().expect("nonempty support");
        c.iter().filter(|&&i| &w.0[i] == max).count() >= 2
    })
}

fn singular_by_circuits(cfg: &PointConfig, u: &HeightVector, p: &[Rational]) -> bool {
    in_tropical_kernel(cfg, &u.add(&lineality_vector(cfg, p)))
}

#[test]
fn ex_thomas_points_satisfy_circuit_criterion() {
    let (cfg, u) = ex_thomas();
    assert!(singular_by_circuits(&cfg, &u, &q(&[0, 0, 0])));
    assert!(singular_by_circuits(&cfg, &u, &q(&[-1, -1, 0])));
    assert!(!singular_by_circuits(&cfg, &u, &q(&[1, 0, 0])));
    assert!(!singular_by_circuits(&cfg, &u, &q(&[-1, 0, 0])));
}

#[test]
fn worked_example_has_two_points_at_minus_three() {
    let (cfg, u) = worked(rat(-3));
    assert!(singular_by_circuits(&cfg, &u, &q(&[1, 0, 0])));
    assert!(singular_by_circuits(&cfg, &u, &[frac(1, 2), rat(0), rat(0)]));
    let r = classify(&cfg, &u);
    assert_eq!(r.locations(), vec![vec![frac(1, 2), rat(0), rat(0)], q(&[1, 0, 0])]);
}

#[test]
fn classify_points_pass_and_nearby_points_fail() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for ue in [rat(-1), rat(-2), rat(-3), frac(-7, 2), rat(-4), rat(-5)] {
        let (cfg, u) = worked(ue);
        let r = classify(&cfg, &u);
        for p in r.locations() {
            assert!(singular_by_circuits(&cfg, &u, &p));
            for _ in 0..5 {
                let moved: Vec<Rational> = p.iter().map(|x| x + frac(rng.gen_range(-9..=9), 7)).collect();
                if moved != p && !r.locations().contains(&moved) {
                    let pieces = singular_locus(&cfg, &u, DEFAULT_ENUMERATION_BOUND).unwrap();
                    let on_locus = pieces.iter().any(|pc| pc.piece.vertices.contains(&moved));
                    assert_eq!(singular_by_circuits(&cfg, &u, &moved), on_locus);
                }
            }
        }
    }
}

#[test]
fn flats_and_circuit_criterion_agree_on_random_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (cfg, u) in templates() {
        let b = gale_dual(&cfg);
        let pieces = singular_locus(&cfg, &u, DEFAULT_ENUMERATION_BOUND).unwrap();
        let points = isolated_points(&pieces).unwrap();
        for p in &points {
            assert!(singular_by_circuits(&cfg, &u, p));
        }
        for _ in 0..200 {
            let x: Vec<Rational> = (0..3).map(|_| random_rational(&mut rng, 12, 2)).collect();
            let w = u.add(&lineality_vector(&cfg, &x));
            let flags_ok = flag_of_subsets(&w)
                .levels
                .iter()
                .all(|l| tropsurf::matroid::is_flat(&b, l));
            assert_eq!(flags_ok, in_tropical_kernel(&cfg, &w), "{x:?}");
            assert_eq!(flags_ok, points.contains(&x));
        }
    }
}
