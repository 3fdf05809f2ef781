use zerostab_core::grid::{regularity, Geometric, Grid, GridFamily, GridMap};
use zerostab_core::method::MethodSpec;
use zerostab_core::sim::{
    boundedness_sweep, doubling_sequence, quadrature_convergence, quadrature_error,
    run_homogeneous, trajectory, InitPolicy, SweepVerdict,
};
use zerostab_core::stability::{perturbation_matrices, stability_threshold};

fn bdf(k: usize) -> MethodSpec {
    MethodSpec::bdf(k).unwrap()
}

fn maps() -> Vec<GridMap> {
    vec![
        GridMap::Identity,
        GridMap::ExpRamp { c: 1.0 },
        GridMap::ExpRamp { c: 2.0 },
        GridMap::ExpRamp { c: -2.0 },
        "sigmoid".parse().unwrap(),
    ]
}

#[test]
fn constant_start_is_preserved() {
    for k in 1..=6 {
        let g = Grid::from_map(&GridMap::ExpRamp { c: 1.5 }, 80).unwrap();
        let run = run_homogeneous(&bdf(k), &g, &vec![1.0; k]).unwrap();
        assert!((run.sup_y - 1.0).abs() <= 1e-12);
        assert_eq!(run.sup_u, 0.0);
    }
}

#[test]
fn bdf2_uniform_extraneous_decay() {
    let g = Grid::uniform(60).unwrap();
    let tr = trajectory(&bdf(2), &g, &[0.0, 1.0]).unwrap();
    // u_0 = N (y_1 - y_0) = 60; each step multiplies by 1/3.
    assert_eq!(tr.u[0], 60.0);
    for n in 1..60 {
        let expected = 60.0 * (1.0f64 / 3.0).powi(n as i32);
        assert!((tr.u[n] - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-290);
    }
}

#[test]
fn bdf2_constant_ratio_growth_rates() {
    for r in [0.5, 1.0, 2.0, 2.414, 2.5] {
        let g = Grid::geometric(r, 200).unwrap();
        let run = run_homogeneous(&bdf(2), &g, &[1.0, -1.0]).unwrap();
        let expected = r * r / (1.0 + 2.0 * r);
        assert!(
            (run.growth_rate - expected).abs() <= 1e-6,
            "r={r}: {}",
            run.growth_rate
        );
    }
}

#[test]
fn factored_and_direct_recursions_agree() {
    let policy = InitPolicy::default();
    for k in 1..=6 {
        for map in maps() {
            let g = map.grid(300).unwrap();
            for init in policy.inits(k) {
                let tr = trajectory(&bdf(k), &g, &init).unwrap();
                let euler = tr.integrate_u();
                let scale = tr.y.iter().fold(0.0f64, |m, y| m.max(y.abs()));
                for (a, b) in tr.y.iter().zip(&euler) {
                    assert!((a - b).abs() <= 1e-12 * scale, "k={k} {map}");
                }
            }
        }
    }
}

#[test]
fn sweeps() {
    let p = InitPolicy::default();
    let res = boundedness_sweep(
        &bdf(3),
        &GridMap::ExpRamp { c: 2.0 },
        &[100, 200, 400, 800],
        &p,
    )
    .unwrap();
    assert_eq!(res.verdict, SweepVerdict::Stable);
    let res =
        boundedness_sweep(&bdf(2), &Geometric { ratio: 2.5 }, &[50, 100, 200, 400], &p).unwrap();
    assert_eq!(res.verdict, SweepVerdict::Unstable);
    for k in 1..=6 {
        let res =
            boundedness_sweep(&bdf(k), &GridMap::Identity, &doubling_sequence(50, 3), &p).unwrap();
        assert_eq!(res.verdict, SweepVerdict::Stable, "k={k}");
    }
}

#[test]
fn certified_grids_are_bounded() {
    let p = InitPolicy::default();
    for k in [2, 3] {
        let pert = perturbation_matrices(&bdf(k)).unwrap();
        for map in maps() {
            let reg = regularity(&map, 10_000).unwrap().sup;
            let rep = stability_threshold(&bdf(k), &pert, reg).unwrap();
            let n0 = (rep.n_star + 1).max(20);
            let res = boundedness_sweep(&bdf(k), &map, &doubling_sequence(n0, 3), &p).unwrap();
            assert_eq!(res.verdict, SweepVerdict::Stable, "k={k} {map}");
        }
    }
}

#[test]
fn quadrature_exactness() {
    for k in 1..=6 {
        let g = GridMap::ExpRamp { c: 1.0 }.grid(40).unwrap();
        let e = quadrature_error(&bdf(k), &g, |_| 1.0, |t| t).unwrap();
        assert!(e <= 1e-13, "k={k}");
        // Solutions of degree k (integrands of degree k - 1) are reproduced.
        let kf = k as f64;
        let e = quadrature_error(
            &bdf(k),
            &g,
            |t| kf * t.powi(k as i32 - 1),
            |t| t.powi(k as i32),
        )
        .unwrap();
        assert!(e <= 1e-12, "k={k}: {e}");
    }
}

#[test]
fn degree_k_integrands_are_not_exact() {
    // Implicit Euler on y' = 2t has local error h^2 per step.
    let g = Grid::uniform(10).unwrap();
    let e = quadrature_error(&bdf(1), &g, |t| 2.0 * t, |t| t * t).unwrap();
    assert!((e - 0.1).abs() <= 1e-12);
}

#[test]
fn convergence_orders() {
    let map = GridMap::ExpRamp { c: 1.0 };
    for k in 1..=4 {
        let res =
            quadrature_convergence(&bdf(k), &map, f64::exp, f64::exp, &[20, 40, 80, 160]).unwrap();
        let order = res.fitted_order.unwrap();
        assert!((order - k as f64).abs() <= 0.3, "k={k}: {order}");
    }
}
