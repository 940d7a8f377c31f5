use std::sync::Arc;

use magnonspec::lattice::{region_omega, theta, theta_inv, GapCoord, OrderedConfig, TruncationBox};
use magnonspec::operators::{cayley_laplacian, compress_potential, compress_toeplitz, IndexSet, OperatorSpec};
use magnonspec::symbols::{mu, nu_j, FiberParameter, ShiftSymbol};
use magnonspec::Complex64;
use proptest::prelude::*;

fn symbol(dim: usize) -> impl Strategy<Value = ShiftSymbol> {
    prop::collection::vec((prop::collection::vec(-3i64..=3, dim), -2.0f64..2.0, -2.0f64..2.0), 0..6).prop_map(
        move |raw| {
            let mut s = ShiftSymbol::zero(dim);
            for (p, re, im) in raw {
                s.add_entry(p, Complex64::new(re, im));
            }
            s
        },
    )
}

fn generating_set() -> impl Strategy<Value = ShiftSymbol> {
    prop::collection::btree_set((-3i64..=3, -3i64..=3), 1..5).prop_map(|half| {
        let mut pts = Vec::new();
        for (x, y) in half {
            if (x, y) != (0, 0) {
                pts.push(vec![x, y]);
                pts.push(vec![-x, -y]);
            }
        }
        pts.sort();
        pts.dedup();
        if pts.is_empty() {
            pts = vec![vec![1, 0], vec![-1, 0]];
        }
        ShiftSymbol::indicator(2, pts).unwrap()
    })
}

fn close(a: &ShiftSymbol, b: &ShiftSymbol) -> bool {
    a.sum(&b.scaled_real(-1.0)).unwrap().l1_norm() <= 1e-12 * (1.0 + a.l1_norm() + b.l1_norm())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn theta_is_additive(a in prop::collection::vec(-50i64..50, 1..6), b in prop::collection::vec(-50i64..50, 1..6)) {
        let n = a.len().min(b.len());
        let sum: Vec<i64> = a[..n].iter().zip(&b[..n]).map(|(x, y)| x + y).collect();
        let ta = magnonspec::lattice::theta_raw(&a[..n]);
        let tb = magnonspec::lattice::theta_raw(&b[..n]);
        let expected: Vec<i64> = ta.iter().zip(&tb).map(|(x, y)| x + y).collect();
        prop_assert_eq!(magnonspec::lattice::theta_raw(&sum), expected);
    }

    #[test]
    fn typed_theta_round_trip(start in -100i64..100, gaps in prop::collection::vec(1i64..20, 0..5)) {
        let mut z = vec![start];
        z.extend(gaps);
        let zeta = GapCoord::new(z).unwrap();
        let xi = theta_inv(&zeta);
        prop_assert_eq!(theta(&xi), zeta.clone());
        prop_assert_eq!(OrderedConfig::new(xi.coords().to_vec()).unwrap(), xi);
    }

    #[test]
    fn mu_and_nu_are_linear(r in symbol(3), s in symbol(3), c in -3.0f64..3.0, tau in 0.0f64..1.0, tp in 0.0f64..1.0) {
        let t = FiberParameter::new(tau);
        let combo = r.sum(&s.scaled_real(c)).unwrap();
        let lhs = mu(t, &combo).unwrap();
        let rhs = mu(t, &r).unwrap().sum(&mu(t, &s).unwrap().scaled_real(c)).unwrap();
        prop_assert!(close(&lhs, &rhs));
        let lhs = nu_j(3, tp.into(), &lhs).unwrap();
        let rhs = nu_j(3, tp.into(), &mu(t, &r).unwrap()).unwrap()
            .sum(&nu_j(3, tp.into(), &mu(t, &s).unwrap()).unwrap().scaled_real(c)).unwrap();
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn laplacian_identity_on_random_generating_sets(m in generating_set(), lo in -4i64..0, gap in 2i64..6) {
        let index = Arc::new(IndexSet::from_box(&TruncationBox::full(2, lo..=lo + 4, gap)).unwrap());
        let lap = cayley_laplacian(&m, &index).unwrap();
        let rhs = compress_toeplitz(&m, &index).unwrap()
            .plus(&compress_potential(&m.scaled_real(-1.0), &index).unwrap()).unwrap();
        prop_assert_eq!(lap.matrix.max_abs_diff(&rhs.matrix), 0.0);
    }

    #[test]
    fn matrix_free_action_matches_assembly(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let (phi, psi) = magnonspec::symbols::heisenberg_symbols(a, b, 3);
        let index = Arc::new(IndexSet::from_box(&TruncationBox::full(3, -3..=3, 4)).unwrap());
        let spec = OperatorSpec::new(phi, psi, index).unwrap();
        let dense = spec.assemble().unwrap();
        let f = magnonspec::dynamics::StateVector::random(spec.dim(), seed);
        let y = spec.apply(f.amplitudes()).unwrap();
        let z = dense.matrix.matvec(f.amplitudes());
        let err = y.iter().zip(&z).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * (1.0 + a.abs() + b.abs()) * f.norm());
    }

    #[test]
    fn omega_regions_are_nested(gaps in prop::collection::vec(1i64..30, 1..5), j in 2usize..6, n in 0i64..30) {
        let big_n = gaps.len() + 1;
        prop_assume!(j <= big_n);
        let mut z = vec![0];
        z.extend(gaps);
        let zeta = GapCoord::new(z).unwrap();
        let outer = region_omega(big_n, j, n).unwrap();
        let inner = region_omega(big_n, j, n + 1).unwrap();
        prop_assert!(!inner.contains_gap(&zeta) || outer.contains_gap(&zeta));
        prop_assert_eq!(outer.contains(&theta_inv(&zeta)), outer.contains_gap(&zeta));
    }
}
