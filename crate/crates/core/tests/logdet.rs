use gmrf_krylov::krylov::QuadratureOptions;
use gmrf_krylov::logdet::{
    all_distances_from, colour_graph, coloured_hutchinson_logdet, decay_bound, dense_log,
    exact_colour_variance, hutchinson_logdet, preconditioned_logdet, ColouredProbeSet,
    DecayBoundParams, LogDetOptions,
};
use gmrf_krylov::operators::{gallery, to_dense, SparseOperator, TorusPrior};
use gmrf_krylov::precond::{build_circulant_shift, build_ict};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dense_logdet(q: &SparseOperator) -> f64 {
    let l = to_dense(q).unwrap().into_matrix().cholesky().unwrap().l();
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

fn opts(seed: u64) -> LogDetOptions {
    LogDetOptions {
        quadrature: QuadratureOptions {
            rtol: 1e-10,
            ..Default::default()
        },
        seed,
        stream: 0,
    }
}

fn random_graph(n: usize, edges: &[(usize, usize)]) -> SparseOperator {
    let mut t: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 4.0)).collect();
    for &(i, j) in edges {
        let (i, j) = (i % n, j % n);
        if i != j {
            t.push((i, j, -0.1));
            t.push((j, i, -0.1));
        }
    }
    SparseOperator::from_triplets(n, &t).unwrap()
}

/// Per-probe variance falls with the colouring distance, and every estimator
/// stays consistent with the dense determinant.
fn variance_ladder(q: &SparseOperator, rounds: usize) -> Vec<f64> {
    let exact = dense_logdet(q);
    let mut variances = Vec::new();
    let plain = hutchinson_logdet(q, rounds, &opts(3)).unwrap();
    variances.push(plain.variance);
    for p in 1..=3 {
        let c = colour_graph(q, p).unwrap();
        let e = coloured_hutchinson_logdet(q, &c, rounds, &opts(3)).unwrap();
        assert!(
            (e.estimate - exact).abs() < 4.0 * e.standard_error + 1e-8,
            "p={p}: {} vs {exact}",
            e.estimate
        );
        variances.push(e.variance);
    }
    assert!((plain.estimate - exact).abs() < 4.0 * plain.standard_error);
    variances
}

#[test]
fn colouring_distance_reduces_probe_variance() {
    let v = variance_ladder(&gallery::rw2(10).unwrap(), 200);
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    assert!(v[3] < v[0] / 100.0, "{v:?}");
}

#[test]
#[ignore = "full-size run, several minutes on one core"]
fn colouring_distance_reduces_probe_variance_rw2_30() {
    let v = variance_ladder(&gallery::rw2(30).unwrap(), 1000);
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
}

#[test]
fn empirical_variance_matches_exact_formula() {
    let q = gallery::fivepoint_dirichlet(6).unwrap();
    let qd = to_dense(&q).unwrap().into_matrix();
    for p in [1, 2] {
        let c = colour_graph(&q, p).unwrap();
        let exact = exact_colour_variance(&qd, &c).unwrap();
        let e = coloured_hutchinson_logdet(&q, &c, 4000, &opts(8)).unwrap();
        let ratio = e.variance / exact;
        assert!((0.85..1.15).contains(&ratio), "p={p}: {} vs {exact}", e.variance);
    }
    let plain = exact_colour_variance(&qd, &ColouredProbeSet::single(36)).unwrap();
    let b = dense_log(&qd).unwrap();
    let off: f64 = (0..36)
        .flat_map(|i| (0..36).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| b[(i, j)].powi(2))
        .sum();
    assert!((plain - 2.0 * off).abs() < 1e-10 * plain);
}

#[test]
fn preconditioned_estimates_with_both_families() {
    let q = TorusPrior::new(1.0, 2.0, 2).unwrap().operator(8, 8).unwrap();
    let exact = q.logdet();
    let pc = build_circulant_shift(&q, 10.0).unwrap();
    let e = preconditioned_logdet(&q, &pc, None, 300, &opts(4)).unwrap();
    assert!((e.estimate - exact).abs() < 4.0 * e.standard_error + 1e-8);

    let sq = q.to_sparse().unwrap();
    let pi = build_ict(&sq, 1e-2).unwrap();
    let c = colour_graph(&sq, 2).unwrap();
    let e = preconditioned_logdet(&sq, &pi, Some(&c), 100, &opts(4)).unwrap();
    assert!((e.estimate - exact).abs() < 4.0 * e.standard_error + 1e-8);
    assert!(e.offset != 0.0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let q = gallery::fivepoint_dirichlet(7).unwrap();
    let c = colour_graph(&q, 1).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| coloured_hutchinson_logdet(&q, &c, 30, &opts(12)).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.per_probe, b.per_probe);
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
}

#[test]
fn decay_bound_dominates_dense_log_of_tridiagonal() {
    let q = gallery::tridiagonal(60, 3.0, -1.0).unwrap();
    let qd = to_dense(&q).unwrap().into_matrix();
    let eig = qd.clone().symmetric_eigen().eigenvalues;
    let (lmin, lmax) = (eig.min(), eig.max());
    let b = dense_log(&qd).unwrap();
    let r_star = DecayBoundParams::r_star(lmin, lmax);
    for r in [0.6, 0.5 * (0.5 + r_star), 0.999 * r_star] {
        let params = DecayBoundParams::new(lmin, lmax, r).unwrap();
        let mut prev = f64::INFINITY;
        for d in 0..60 {
            let bound = decay_bound(&params, d).unwrap();
            assert!(bound < prev);
            prev = bound;
            for i in 0..60 - d {
                assert!(b[(i, i + d)].abs() <= bound + 1e-13, "R={r} d={d}");
            }
        }
    }
    assert!(DecayBoundParams::new(lmin, lmax, 0.5).is_err());
    let beyond = DecayBoundParams::new(lmin, lmax, r_star * 1.01).unwrap();
    assert!(decay_bound(&beyond, 1).is_err());
}

#[test]
fn dense_log_exponentiates_back() {
    let q = gallery::fivepoint_dirichlet(4).unwrap();
    let qd = to_dense(&q).unwrap().into_matrix();
    let l = dense_log(&qd).unwrap();
    let e = l.symmetric_eigen();
    let back = &e.eigenvectors
        * DMatrix::from_diagonal(&e.eigenvalues.map(f64::exp))
        * e.eigenvectors.transpose();
    assert!((back - qd).amax() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn colour_classes_are_distance_p_independent(
        n in 2usize..80,
        edges in prop::collection::vec((0usize..80, 0usize..80), 0..160),
        p in 1usize..4,
    ) {
        let q = random_graph(n, &edges);
        let c = colour_graph(&q, p).unwrap();
        let mut count = 0;
        for class in c.classes() {
            count += class.len();
            for &i in class {
                let dist = all_distances_from(&q, i);
                for &j in class {
                    if i != j {
                        prop_assert!(dist[j].is_none_or(|d| d > p));
                    }
                }
            }
        }
        prop_assert_eq!(count, n);
        prop_assert!(c.num_colours() <= n);
    }

    #[test]
    fn coloured_estimate_of_a_diagonal_is_exact(d in prop::collection::vec(0.1f64..10.0, 1..30)) {
        let n = d.len();
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        let q = SparseOperator::from_triplets(n, &t).unwrap();
        let c = colour_graph(&q, 1).unwrap();
        let e = coloured_hutchinson_logdet(&q, &c, 3, &opts(1)).unwrap();
        let want: f64 = d.iter().map(|v| v.ln()).sum();
        prop_assert!((e.estimate - want).abs() < 1e-9 * (1.0 + want.abs()));
    }
}
