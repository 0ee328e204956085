use cellbal_core::network::{
    resolve_connectivity, switch_names, verify_baseline, Netlist, Polarity, Port, TransitionCounter,
};
use cellbal_core::{select_pair, transition_count, verify_network, SwitchState};
use proptest::prelude::*;

#[test]
fn proposed_network_is_complete_up_to_32_cells() {
    for n in 2..=32 {
        let report = verify_network(n).unwrap();
        assert_eq!(report.pairs, n * (n - 1) / 2, "n={n}");
        assert!(report.passed(), "n={n}: {:?}", report.violations.first());
    }
}

#[test]
fn baseline_network_is_complete() {
    for n in 2..=12 {
        assert!(verify_baseline(n).unwrap().passed(), "n={n}");
    }
}

// Rule-based oracle for the selection procedure, written from the switching
// rules rather than from the implementation.
fn oracle_bits(k: usize, l: usize, n: usize) -> Vec<bool> {
    let mut bits = vec![false; n + 4];
    for j in [k, k - 1, l, l - 1] {
        if j >= 1 {
            bits[j - 1] = true;
        }
    }
    bits[n] = k.is_multiple_of(2);
    bits[n + 1] = l.is_multiple_of(2);
    bits[n + 2] = k == l + 1;
    bits[n + 3] = k == l + 1;
    bits
}

fn pair(n_max: usize) -> impl Strategy<Value = (usize, usize, usize)> {
    (2..=n_max)
        .prop_flat_map(|n| (Just(n), 2..=n))
        .prop_flat_map(|(n, k)| (Just(n), Just(k), 1..k))
}

fn state(n: usize) -> impl Strategy<Value = SwitchState> {
    proptest::collection::vec(any::<bool>(), n + 4).prop_map(move |b| SwitchState {
        cells: b[..n].to_vec(),
        pol1: b[n],
        pol2: b[n + 1],
        short_a: b[n + 2],
        short_b: b[n + 3],
    })
}

proptest! {
    #[test]
    fn select_pair_follows_the_rules((n, k, l) in pair(40)) {
        let s = select_pair(k, l, n).unwrap();
        prop_assert_eq!(s.to_bits(), oracle_bits(k, l, n));
        let on_cells = s.cells.iter().filter(|&&b| b).count();
        prop_assert!(on_cells <= 4);
    }

    #[test]
    fn selection_resolves_to_the_requested_cells((n, k, l) in pair(24)) {
        let net = Netlist::proposed(n).unwrap();
        let conn = resolve_connectivity(&net, &select_pair(k, l, n).unwrap().to_bits());
        prop_assert!(conn.is_clean(), "{:?}", conn.faults);
        let p1 = conn.link(Port::One).unwrap();
        let p2 = conn.link(Port::Two).unwrap();
        prop_assert_eq!((p1.cell, p1.polarity), (k, Polarity::Correct));
        prop_assert_eq!((p2.cell, p2.polarity), (l, Polarity::Correct));
    }

    #[test]
    fn transition_metric_is_hamming_distance(a in state(9), b in state(9), c in state(9)) {
        let hamming = a.to_bits().iter().zip(b.to_bits()).filter(|(x, y)| **x != *y).count() as u32;
        let ab = transition_count(&a, &b);
        prop_assert_eq!(ab.total(), hamming);
        prop_assert!(ab.max() <= 1);
        prop_assert_eq!(transition_count(&b, &a), ab.clone());
        prop_assert_eq!(transition_count(&a, &a).total(), 0);
        let via = transition_count(&a, &c).total() + transition_count(&c, &b).total();
        prop_assert!(ab.total() <= via);
    }

    #[test]
    fn counter_total_bounds_max(seq in proptest::collection::vec(state(6), 1..30)) {
        let mut counter = TransitionCounter::new(6);
        let mut prev = SwitchState::all_off(6);
        for s in &seq {
            counter.record(&prev, s);
            prev = s.clone();
        }
        prop_assert!(counter.total() >= counter.max());
        prop_assert_eq!(counter.counts().len(), switch_names(6).len());
    }
}

#[test]
fn bad_pairs_are_rejected() {
    assert!(select_pair(1, 1, 8).is_err());
    assert!(select_pair(2, 3, 8).is_err());
    assert!(select_pair(9, 1, 8).is_err());
    assert!(select_pair(1, 0, 8).is_err());
}
