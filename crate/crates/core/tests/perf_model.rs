use proptest::prelude::*;

use scorefollow::hmm::Regime;
use scorefollow::perf_model::*;

fn distribution(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

fn model_inputs() -> impl Strategy<Value = (usize, usize, usize, Vec<f64>, Vec<f64>, f64)> {
    (5usize..60, 0usize..4, 0usize..4).prop_flat_map(|(n, d1, d2)| {
        (
            Just(n),
            Just(d1),
            Just(d2),
            prop::collection::vec(0.1f64..1.0, n),
            prop::collection::vec(0.1f64..1.0, n),
            0.0f64..0.08,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transition_rows_are_stochastic((n, d1, d2, sw, rw, gb) in model_inputs()) {
        let band = BandParams::new(table3(), d1, d2).unwrap();
        let s = distribution(&sw);
        let r = distribution(&rw);
        // Keep N·γ̄·s_i ≤ 1.
        let gb = gb.min(0.9 / (n as f64 * s.iter().cloned().fold(0.0, f64::max)));
        let model = build_transition_model(n, &band, &s, &r, gb).unwrap();
        prop_assert_eq!(model.regime(), Regime::Nonnegative);
        for i in 0..n {
            let row: f64 = (0..n).map(|j| model.prob(i, j)).sum();
            prop_assert!((row - 1.0).abs() < 1e-9, "row {} sums to {}", i, row);
            prop_assert!((0..n).all(|j| model.prob(i, j) >= 0.0));
        }
    }

    #[test]
    fn output_rows_are_normalized(
        chords in prop::collection::vec(prop::collection::btree_set(40u8..90, 1..5), 1..20),
    ) {
        let chords: Vec<Chord> = chords.into_iter().map(|c| Chord::new(c).unwrap()).collect();
        let score = Score::new("p", chords).unwrap();
        let params = OutputParams::table5();
        let out = build_output_model(&score, &params).unwrap();
        for i in 0..score.len() {
            let total: f64 = (0..params.n_symbols()).map(|o| out.prob(i, o)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for &p in score.chord(i).pitches() {
                let (sym, clipped) = params.symbol(p);
                prop_assert!(!clipped);
                let share = out.prob(i, sym) * score.chord(i).len() as f64;
                prop_assert!((share - params.p_chord).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn uniform_model_has_constant_off_band_probability() {
    let n = 100;
    for d in [4, 10] {
        let band = BandParams::table3(d).unwrap();
        let gb = band.residual_mass();
        let model = uniform_model_of(n, &band, gb).unwrap();
        for i in [30, 50, 70] {
            for j in (0..n).filter(|&j| !model.in_band(i, j)) {
                assert!((model.prob(i, j) - gb / n as f64).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn no_skip_model_is_banded() {
    let band = BandParams::table3(4).unwrap();
    let model = transition_for(ModelKind::NoSkip, 50, &band, 0.0, None).unwrap();
    for i in 0..50 {
        let row: f64 = (0..50).map(|j| model.prob(i, j)).sum();
        assert!((row - 1.0).abs() < 1e-12);
        assert!((0..50).filter(|&j| !model.in_band(i, j)).all(|j| model.prob(i, j) == 0.0));
    }
}

#[test]
fn outer_model_requires_distributions() {
    let band = BandParams::table3(4).unwrap();
    assert!(transition_for(ModelKind::Outer, 50, &band, 0.02, None).is_err());
}

#[test]
fn table_four_bands() {
    let a = table3();
    assert_eq!(select_band(4, &a).unwrap(), (1, 2));
    assert_eq!(select_band(10, &a).unwrap(), (7, 2));
    assert!((BandParams::table3(4).unwrap().residual_mass() - 0.0263).abs() < 1e-4);
    assert!((BandParams::table3(10).unwrap().residual_mass() - 0.0098).abs() < 1e-4);
}

#[test]
fn model_kind_names() {
    for (name, kind) in [("outer", ModelKind::Outer), ("uniform", ModelKind::Uniform), ("noskip", ModelKind::NoSkip)] {
        assert_eq!(name.parse::<ModelKind>().unwrap(), kind);
        assert_eq!(kind.to_string(), name);
    }
    assert!("bogus".parse::<ModelKind>().is_err());
}
