use super::*;
use crate::exactnum::ratio;
use crate::model::{from_walk, macmahon, LinePoint};
use num_traits::Signed;
use proptest::prelude::*;

fn ctx(a: i64, b: i64, c: i64) -> KernelContext {
    KernelContext::new(HexagonSpec::new(a, b, c).unwrap())
}

fn specs(max: i64) -> impl Iterator<Item = (i64, i64, i64)> {
    (1..=max).flat_map(move |a| {
        (1..=max).flat_map(move |b| (b..=max).map(move |c| (a, b, c)))
    })
}

/// Walk steps from `z` to `y` in `k` steps; the identity when `k = 0`.
fn steps(k: i64, z: i64, y: i64) -> ExactScalar {
    if k == 0 {
        if z == y {
            ExactScalar::one()
        } else {
            ExactScalar::zero()
        }
    } else {
        transition_count(0, k, z, y)
    }
}

#[test]
fn c_n_examples() {
    assert_eq!(ctx(1, 1, 1).c_n(0).unwrap(), ratio(1, 2));
    assert_eq!(ctx(2, 1, 1).c_n(0).unwrap(), ratio(2, 3));
    assert!(ctx(2, 1, 1).c_n(2).is_err());
    for (a, b, c) in specs(4) {
        let k = ctx(a, b, c);
        for n in 0..a {
            assert!(k.c_n(n).unwrap().is_positive());
        }
    }
}

#[test]
fn gram_single_walk() {
    assert_eq!(ctx(1, 1, 1).gram_matrix(1).unwrap(), vec![vec![int(2)]]);
    assert!(ctx(1, 1, 1).gram_matrix(0).is_err());
    assert!(ctx(1, 1, 1).gram_matrix(2).is_err());
}

#[test]
fn gram_is_diagonal_on_every_line() {
    for (a, b, c) in specs(5) {
        let k = ctx(a, b, c);
        for r in 1..b + c {
            let g = k.gram_matrix(r).unwrap();
            for n in 0..a {
                for m in 0..a {
                    let want = if n == m {
                        k.c_n(n).unwrap().recip()
                    } else {
                        ExactScalar::zero()
                    };
                    assert_eq!(g[n as usize][m as usize], want, "({a},{b},{c}) r={r} n={n} m={m}");
                }
            }
        }
    }
}

#[test]
fn psi_closed_forms_match_row_operations() {
    for (a, b, c) in specs(4) {
        let k = ctx(a, b, c);
        let shift = c - b;
        for n in 0..a {
            for z in -3..2 * a + 2 {
                assert_eq!(
                    k.psi(n, z).unwrap(),
                    k.psi_by_row_operations(n, z).unwrap(),
                    "psi ({a},{b},{c}) n={n} z={z}"
                );
                let w = shift + z;
                assert_eq!(
                    k.psi_star(n, w).unwrap(),
                    k.psi_star_by_row_operations(n, w).unwrap(),
                    "psi* ({a},{b},{c}) n={n} w={w}"
                );
            }
        }
    }
}

#[test]
fn phi_closed_forms_match_convolutions() {
    for (a, b, c) in specs(4) {
        let k = ctx(a, b, c);
        let m = b + c;
        let shift = c - b;
        for n in 0..a {
            for r in 1..m {
                let g = *k.line(r);
                for x in g.sites() {
                    let y = g.walk(x);
                    let left: ExactScalar = (-1..2 * a)
                        .map(|z| k.psi(n, z).unwrap() * steps(r - 1, z, y))
                        .sum();
                    assert_eq!(k.phi_left(n, r, y).unwrap(), left);
                    let right: ExactScalar = (shift - 1..shift + 2 * a)
                        .map(|w| k.psi_star(n, w).unwrap() * steps(m - r - 1, w, y))
                        .sum();
                    assert_eq!(k.phi_right(r, y, n).unwrap(), right);
                }
            }
        }
    }
}

#[test]
fn hahn_factorizations_match_closed_forms() {
    for (a, b, c) in specs(4) {
        let k = ctx(a, b, c);
        for n in 0..a {
            for r in 1..b + c {
                let g = *k.line(r);
                for x in g.sites() {
                    let y = g.walk(x);
                    assert_eq!(
                        k.phi_left_hahn(n, r, x).unwrap(),
                        k.phi_left(n, r, y).unwrap(),
                        "left ({a},{b},{c}) n={n} r={r} x={x}"
                    );
                    assert_eq!(
                        k.phi_right_hahn(r, x, n).unwrap(),
                        k.phi_right(r, y, n).unwrap(),
                        "right ({a},{b},{c}) n={n} r={r} x={x}"
                    );
                }
            }
        }
    }
}

#[test]
fn partition_from_gram_is_macmahon() {
    for (a, b, c) in specs(5) {
        let k = ctx(a, b, c);
        let want = macmahon(a, b, c);
        for r in [1, b, c] {
            if r >= b + c {
                continue;
            }
            assert_eq!(k.partition_via_gram(r).unwrap(), want, "({a},{b},{c}) r={r}");
        }
    }
}

#[test]
fn one_point_density_single_walk() {
    let k = ctx(1, 1, 1);
    for x in 0..=1 {
        let v = k.hahn_kernel(1, x, 1, x).unwrap();
        assert_eq!(v.exact_part, Some(ratio(1, 2)));
        assert_eq!(v.value, 0.5);
    }
}

#[test]
fn unnormalized_coefficient_fails_single_walk() {
    let k = ctx(1, 1, 1);
    let v = k
        .hahn_kernel_with(Coefficient::Unnormalized, 1, 0, 1, 0)
        .unwrap();
    assert!((v.value - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
    assert!(v.exact_part.is_none());
}

#[test]
fn two_point_product_example() {
    let spec = HexagonSpec::new(1, 1, 2).unwrap();
    let k = KernelContext::new(spec);
    let x = from_walk(&spec, 1, 1).unwrap();
    let y = from_walk(&spec, 2, 0).unwrap();
    let uv = k.hahn_kernel(1, x, 2, y).unwrap().value;
    let vu = k.hahn_kernel(2, y, 1, x).unwrap().value;
    assert!((uv * vu - 1.0 / 9.0).abs() < 1e-14);
    let g = GenericKernel::new(spec).unwrap();
    assert_eq!(
        g.eval_walk(1, 1, 2, 0).unwrap() * g.eval_walk(2, 0, 1, 1).unwrap(),
        ratio(1, 9)
    );
    let pts = [LinePoint::new(&spec, 1, x).unwrap(), LinePoint::new(&spec, 2, y).unwrap()];
    let d = corr_det(|u, v| k.eval(u, v), &pts).unwrap();
    assert!((d - 1.0 / 3.0).abs() < 1e-10);
    let e = corr_det_exact(|u, v| g.eval(u, v), &pts).unwrap();
    assert_eq!(e, ratio(1, 3));
}

#[test]
fn generic_diagonal_example() {
    let spec = HexagonSpec::new(1, 1, 1).unwrap();
    assert_eq!(generic_kernel(&spec, 1, -1, 1, -1).unwrap(), ratio(1, 2));
    assert!(generic_kernel(&spec, 0, 0, 1, -1).is_err());
}

#[test]
fn coefficient_is_one_on_diagonal() {
    for (a, b, c) in specs(4) {
        let k = ctx(a, b, c);
        for r in 1..b + c {
            for n in 0..a {
                assert_eq!(k.coefficient_sq(Coefficient::Derived, r, r, n), int(1));
            }
        }
    }
}

#[test]
fn diagonal_is_exact_and_in_unit_interval() {
    for (a, b, c) in specs(3) {
        let k = ctx(a, b, c);
        for r in 1..b + c {
            for x in k.line(r).sites() {
                let v = k.hahn_kernel(r, x, r, x).unwrap();
                let e = v.exact_part.clone().unwrap();
                assert_eq!(v.value, to_f64(&e));
                assert!(!e.is_negative() && e <= int(1));
            }
        }
    }
}

#[test]
fn matches_lgv_kernel_pointwise_on_small_specs() {
    for (a, b, c) in specs(3) {
        let spec = HexagonSpec::new(a, b, c).unwrap();
        let k = KernelContext::new(spec);
        let g = GenericKernel::new(spec).unwrap();
        let pts = crate::model::interior_points(&spec);
        for &u in &pts {
            for &v in &pts {
                let h = k.eval(u, v).unwrap();
                let e = to_f64(&g.eval(u, v).unwrap());
                assert!((h - e).abs() < 1e-12, "({a},{b},{c}) {u:?} {v:?}: {h} vs {e}");
            }
        }
    }
}

#[test]
fn out_of_range_arguments() {
    let k = ctx(2, 2, 3);
    assert!(k.hahn_kernel(0, 0, 1, 0).is_err());
    assert!(k.hahn_kernel(1, 0, 5, 0).is_err());
    let gamma = k.line(1).gamma_r;
    assert!(k.hahn_kernel(1, gamma + 1, 1, 0).is_err());
    assert!(k.hahn_kernel(1, -1, 1, 0).is_err());
    assert!(k.psi(2, 1).is_err());
    assert!(k.phi_left(0, 5, 0).is_err());
}

#[test]
fn grid_export() {
    let k = ctx(2, 2, 3);
    let pairs = [(1, 1), (1, 3), (4, 2)];
    let mut buf = Vec::new();
    let rows = write_kernel_grid_csv(&k, &pairs, &mut buf).unwrap();
    assert_eq!(rows, grid_row_count(&k, &pairs));
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,x_hahn,s,y_hahn,value"));
    assert_eq!(lines.count(), rows);
}

fn spec_and_points() -> impl Strategy<Value = (HexagonSpec, Vec<LinePoint>)> {
    (1i64..=3, 1i64..=3, 0i64..=2)
        .prop_flat_map(|(a, b, dc)| {
            let spec = HexagonSpec::new(a, b, b + dc).unwrap();
            let pts = crate::model::interior_points(&spec);
            let n = pts.len();
            (Just(spec), Just(pts), prop::collection::btree_set(0..n, 1..=3.min(n)))
        })
        .prop_map(|(spec, pts, idx)| (spec, idx.into_iter().map(|i| pts[i]).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlation_determinants_agree((spec, pts) in spec_and_points()) {
        let k = KernelContext::new(spec);
        let g = GenericKernel::new(spec).unwrap();
        let h = corr_det(|u, v| k.eval(u, v), &pts).unwrap();
        let e = to_f64(&corr_det_exact(|u, v| g.eval(u, v), &pts).unwrap());
        prop_assert!((h - e).abs() <= 1e-10 * e.abs().max(1e-300) || (h - e).abs() < 1e-13,
            "{spec} {pts:?}: {h} vs {e}");
    }

    #[test]
    fn symmetric_products_agree((spec, pts) in spec_and_points()) {
        let k = KernelContext::new(spec);
        let g = GenericKernel::new(spec).unwrap();
        let (u, v) = (pts[0], pts[pts.len() - 1]);
        let h = k.eval(u, v).unwrap() * k.eval(v, u).unwrap();
        let e = to_f64(&(g.eval(u, v).unwrap() * g.eval(v, u).unwrap()));
        prop_assert!((h - e).abs() < 1e-12);
    }
}
