//! Property-based invariants over random datasets and tables.

use proptest::prelude::*;

use synthval::regress::{confint, RegressionFit};
use synthval::risk::{weap_scores, KeyTargetConfig};
use synthval::tabular::{crosstab, BinPolicy, Column, ColumnKind, Dataset, Schema, VariableSpec};
use synthval::utility::{interval_overlap, roe};

fn two_var_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..60).prop_flat_map(|n| {
        (
            proptest::collection::vec(0u32..3, n),
            proptest::collection::vec(0u32..4, n),
        )
            .prop_map(|(a, b)| {
                let schema = Schema::new(
                    "p",
                    vec![
                        VariableSpec::categorical("A", &["1", "2", "3"]),
                        VariableSpec::categorical("B", &["1", "2", "3", "4"]),
                    ],
                )
                .unwrap();
                Dataset::new(schema, vec![Column::Cat(a), Column::Cat(b)]).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn crosstab_totals_match_row_count(ds in two_var_dataset()) {
        let bins = BinPolicy::default();
        for vars in [&["A"][..], &["B"][..], &["A", "B"][..]] {
            let table = crosstab(&ds, vars, &bins).unwrap();
            prop_assert_eq!(table.total(), ds.n_rows() as u64);
            prop_assert_eq!(table.cells().values().sum::<u64>(), ds.n_rows() as u64);
        }
    }

    #[test]
    fn weap_scores_are_probabilities(ds in two_var_dataset()) {
        let cfg = KeyTargetConfig::new(&["A"], "B");
        for w in weap_scores(&ds, &cfg).unwrap() {
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }

    #[test]
    fn roe_is_symmetric_and_bounded(a in two_var_dataset(), b in two_var_dataset()) {
        let bins = BinPolicy::default();
        let ta = crosstab(&a, &["A", "B"], &bins).unwrap();
        let tb = crosstab(&b, &["A", "B"], &bins).unwrap();
        let fwd = roe(&ta, &tb).unwrap();
        let rev = roe(&tb, &ta).unwrap();
        prop_assert!((0.0..=1.0).contains(&fwd.mean));
        prop_assert!((fwd.mean - rev.mean).abs() < 1e-12, "roe not symmetric");
    }

    #[test]
    fn roe_invariant_under_row_order(ds in two_var_dataset(), seed in 0u64..1000) {
        // crosstabs ignore row order, so ROE against a shuffled copy is 1
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rows: Vec<usize> = (0..ds.n_rows()).collect();
        rows.shuffle(&mut rand_chacha::ChaCha12Rng::seed_from_u64(seed));
        let cols = (0..2)
            .map(|v| {
                let Column::Cat(vals) = ds.column_at(v) else { unreachable!() };
                Column::Cat(rows.iter().map(|&r| vals[r]).collect())
            })
            .collect();
        let shuffled = Dataset::new(ds.schema().clone(), cols).unwrap();
        let bins = BinPolicy::default();
        let ta = crosstab(&ds, &["A", "B"], &bins).unwrap();
        let tb = crosstab(&shuffled, &["A", "B"], &bins).unwrap();
        let r = roe(&ta, &tb).unwrap();
        prop_assert!((r.mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_overlap_is_symmetric_and_at_most_one(
        a in -5.0f64..5.0, wa in 0.0f64..3.0,
        b in -5.0f64..5.0, wb in 0.0f64..3.0,
    ) {
        let (i1, i2) = ((a, a + wa), (b, b + wb));
        let fwd = interval_overlap(i1, i2);
        let rev = interval_overlap(i2, i1);
        prop_assert!((fwd - rev).abs() < 1e-12);
        prop_assert!(fwd <= 1.0 + 1e-12);
        prop_assert!((interval_overlap(i1, i1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn confint_midpoint_is_the_estimate(coef in -10.0f64..10.0, se in 0.0f64..5.0) {
        let fit = RegressionFit {
            kind: synthval::regress::FitKind::Linear,
            names: vec!["b".into()],
            coef: vec![coef],
            se: vec![se],
            kinds: vec![ColumnKind::Numeric],
            converged: true,
            iterations: 1,
            separation_detected: false,
            n: 10,
            p: 1,
            fitted: None,
        };
        let ci = confint(&fit, 0.95).unwrap();
        prop_assert!(((ci[0].0 + ci[0].1) / 2.0 - coef).abs() < 1e-9);
        prop_assert!(ci[0].0 <= ci[0].1);
    }
}
