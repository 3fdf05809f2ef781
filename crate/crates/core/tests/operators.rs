use num_traits::{One, Zero};
use zerostab_core::grid::{Grid, GridFamily, GridMap};
use zerostab_core::method::{bdf_constant_row, deflate_row, MethodSpec};
use zerostab_core::operators::{
    assemble_a, assemble_d, assemble_h, assemble_r, factorization_residual, forward_solve,
    inf_norm, inverse_inf_norm, inverse_inf_norm_rowwise, lower_log_norm_inf, realized_density,
    BandedLowerMatrix,
};
use zerostab_core::{Error, Rational, Scalar};

fn bdf(k: usize) -> MethodSpec {
    MethodSpec::bdf(k).unwrap()
}

fn maps() -> Vec<GridMap> {
    vec![
        GridMap::Identity,
        GridMap::ExpRamp { c: 2.0 },
        GridMap::ExpRamp { c: -1.0 },
        "sigmoid".parse().unwrap(),
    ]
}

fn table_c_row(k: usize) -> Vec<Rational> {
    deflate_row(&bdf_constant_row::<Rational>(&bdf(k)).unwrap())
        .unwrap()
        .gamma
}

#[test]
fn full_rows_of_a_sum_to_zero() {
    for k in 1..=6 {
        for map in maps() {
            let a = assemble_a(&bdf(k), &map.grid(120).unwrap()).unwrap();
            for i in k..120 {
                let s: f64 = a.band(i).iter().sum();
                assert!(s.abs() <= 1e-13 * inf_norm(&a), "k={k} {map} row {i}: {s}");
            }
        }
    }
}

#[test]
fn uniform_operators_are_table_stencils() {
    let g = Grid::uniform(5).unwrap();
    let a = assemble_a(&bdf(2), &g).unwrap();
    assert!(a.is_toeplitz());
    let r = assemble_r(&bdf(2), &g).unwrap();
    assert_eq!(r.stencil().unwrap(), &[-0.5, 1.5]);
    let r3 = assemble_r(&bdf(3), &Grid::uniform(8).unwrap()).unwrap();
    for (x, y) in r3
        .stencil()
        .unwrap()
        .iter()
        .zip([1.0 / 3.0, -7.0 / 6.0, 11.0 / 6.0])
    {
        assert!((x - y).abs() <= 1e-14);
    }
    assert_eq!(r3.bandwidth(), 2);
}

#[test]
fn d_and_h() {
    let d = assemble_d::<Rational>(3).unwrap();
    let three = Rational::from_int(3);
    assert_eq!(d.get(0, 0), three);
    assert_eq!(d.get(1, 0), -three.clone());
    assert_eq!(d.get(2, 1), -three.clone());
    assert_eq!(d.get(2, 0), Rational::zero());
    for n in [1, 10, 1000] {
        assert!(inverse_inf_norm(&assemble_d::<Rational>(n).unwrap())
            .unwrap()
            .is_one());
        assert!((inverse_inf_norm(&assemble_d::<f64>(n).unwrap()).unwrap() - 1.0).abs() <= 1e-12);
    }
    let h = assemble_h(&Grid::uniform(10).unwrap());
    assert!(h.entries.iter().all(|&x| x == 0.1));
}

#[test]
fn factorization_identity() {
    assert!(factorization_residual(&bdf(2), &Grid::uniform(50).unwrap()).unwrap() <= 1e-12);
    let g = Grid::from_map(&GridMap::ExpRamp { c: 2.0 }, 200).unwrap();
    assert!(factorization_residual(&bdf(3), &g).unwrap() <= 1e-10);
    for k in 1..=6 {
        for map in maps() {
            for n in [50, 400] {
                let res = factorization_residual(&bdf(k), &map.grid(n).unwrap()).unwrap();
                assert!(res <= 1e-12 * n as f64, "k={k} {map} N={n}: {res}");
            }
        }
    }
}

/// Both sides of the factorization formed as dense products.
fn explicit_residual(spec: &MethodSpec, grid: &Grid) -> f64 {
    let n = grid.len();
    let a = assemble_a(spec, grid).unwrap();
    let r = assemble_r(spec, grid).unwrap();
    let d = assemble_d::<f64>(n).unwrap();
    let phi = realized_density(grid);
    let h = grid.steps();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|c| {
                    let rd: f64 = (0..n).map(|m| r.get(i, m) * d.get(m, c)).sum();
                    (a.get(i, c) / h[i] - rd / phi.entries[i]).abs()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[test]
fn residual_matches_explicit_products() {
    for k in 1..=6 {
        for map in maps() {
            let g = map.grid(60).unwrap();
            let fast = factorization_residual(&bdf(k), &g).unwrap();
            let slow = explicit_residual(&bdf(k), &g);
            assert!(
                fast <= 1e-12 * 60.0 && slow <= 1e-12 * 60.0,
                "k={k} {map}: {fast} {slow}"
            );
        }
    }
}

#[test]
fn factorization_residual_is_rounding() {
    // Relative to the operator scale N, the residual does not grow with N.
    for k in [2, 3, 5] {
        let map = GridMap::ExpRamp { c: 2.0 };
        let rel: Vec<f64> = [50, 200, 800]
            .iter()
            .map(|&n| factorization_residual(&bdf(k), &map.grid(n).unwrap()).unwrap() / n as f64)
            .collect();
        for r in &rel {
            assert!(*r <= 1e-13, "k={k}: {rel:?}");
        }
        // A 16-fold larger N moves residual / N by rounding noise only.
        assert!(rel[2] <= 2.0 * rel[0], "k={k}: {rel:?}");
    }
}

#[test]
fn extraneous_inverse_norm_tends_to_one_for_bdf2() {
    let r50 = BandedLowerMatrix::toeplitz(&[-0.5, 1.5], 50).unwrap();
    let v = inverse_inf_norm(&r50).unwrap();
    assert!((0.999..=1.0).contains(&v));
    assert!(
        v < inverse_inf_norm(&BandedLowerMatrix::toeplitz(&[-0.5, 1.5], 100).unwrap()).unwrap()
            + 1e-15
    );
}

#[test]
fn toeplitz_inverse_is_toeplitz() {
    for k in 2..=6 {
        let gamma: Vec<f64> = table_c_row(k).iter().map(Scalar::to_f64_lossy).collect();
        let n = 120;
        let t = BandedLowerMatrix::toeplitz(&gamma, n).unwrap();
        let columns: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                forward_solve(&t, &e).unwrap()
            })
            .collect();
        for j in 1..n {
            for i in j..n {
                assert!((columns[j][i] - columns[0][i - j]).abs() <= 1e-13, "k={k}");
            }
            assert!(columns[j][..j].iter().all(|&x| x == 0.0));
        }
    }
}

#[test]
fn inverse_norm_routes_agree_on_graded_grids() {
    for k in 2..=4 {
        let r = assemble_r(
            &bdf(k),
            &Grid::from_map(&GridMap::ExpRamp { c: 2.0 }, 150).unwrap(),
        )
        .unwrap();
        assert!(!r.is_toeplitz());
        let a = inverse_inf_norm(&r).unwrap();
        let b = inverse_inf_norm_rowwise(&r).unwrap();
        assert!((a - b).abs() <= 1e-12 * a, "k={k}");
    }
}

#[test]
fn log_norms_of_table_operators() {
    let expect = [
        (2, Rational::one()),
        (3, Rational::from_ratio(1, 3)),
        (4, Rational::from_ratio(-7, 6)),
    ];
    for (k, m) in expect {
        let t = BandedLowerMatrix::toeplitz(&table_c_row(k), 20).unwrap();
        assert_eq!(lower_log_norm_inf(&t).unwrap(), m, "k={k}");
    }
}

#[test]
fn identity_solve_and_errors() {
    let id = BandedLowerMatrix::toeplitz(&[0.0, 0.0, 1.0], 6).unwrap();
    let rhs = vec![3.0, -1.0, 0.5, 2.0, 7.0, -4.0];
    assert_eq!(forward_solve(&id, &rhs).unwrap(), rhs);
    assert!(matches!(
        forward_solve(&id, &rhs[..3]),
        Err(Error::DimensionMismatch { .. })
    ));
    let g = Grid::uniform(2).unwrap();
    assert!(matches!(
        assemble_a(&bdf(3), &g),
        Err(Error::GridTooShort { .. })
    ));
}

#[test]
fn triplet_export_round_trip() {
    let r = assemble_r(
        &bdf(3),
        &Grid::from_map(&GridMap::ExpRamp { c: 1.0 }, 10).unwrap(),
    )
    .unwrap();
    let mut rebuilt = BandedLowerMatrix::zeros(10, 2);
    for (i, c, v) in r.triplets() {
        rebuilt.set(i, c, *v).unwrap();
    }
    for i in 0..10 {
        assert_eq!(rebuilt.band(i), r.band(i));
    }
}
