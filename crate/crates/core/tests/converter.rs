use cellbal_core::{capacitor_voltages, converter_enabled, ConverterParams, PiecewiseLinear};
use proptest::prelude::*;

fn pair_and_voltages() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (2usize..=24)
        .prop_flat_map(|n| (2..=n, proptest::collection::vec(3.0f64..4.2, n)))
        .prop_flat_map(|(k, v)| (Just(k), 1..k, Just(v)))
}

fn curve() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((0.01f64..1.0, 0.5f64..1.0), 2..8).prop_map(|raw| {
        let mut x = 0.0;
        raw.into_iter()
            .map(|(dx, e)| {
                x += dx;
                (x, e)
            })
            .collect()
    })
}

// Slopes stay well below 1/p_in, so the efficiency fixed point contracts.
fn mild_curve() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((0.5f64..1.5, 0.88f64..0.94), 2..6).prop_map(|raw| {
        let mut x = 0.0;
        raw.into_iter()
            .map(|(dx, e)| {
                x += dx;
                (x, e)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn capacitor_voltages_nest((k, l, v) in pair_and_voltages()) {
        let (c1, c2) = capacitor_voltages(k, l, &v).unwrap();
        prop_assert!((c1 - c2 - (v[k - 1] + v[l - 1])).abs() < 1e-9);
        let between: f64 = (l + 1..k).map(|j| v[j - 1]).sum();
        prop_assert!((c2 - between).abs() < 1e-9);
        if k == l + 1 {
            prop_assert_eq!(c2, 0.0);
        }
    }

    #[test]
    fn efficiency_stays_within_neighbouring_points(points in curve(), u in 0.0f64..1.0) {
        let c = PiecewiseLinear::new(points.clone()).unwrap();
        let lo = points[0].0;
        let hi = points[points.len() - 1].0;
        let x = lo + u * (hi - lo);
        let y = c.eval(x);
        let i = points.iter().rposition(|p| p.0 <= x).unwrap().min(points.len() - 2);
        let (a, b) = (points[i].1, points[i + 1].1);
        prop_assert!(y >= a.min(b) - 1e-12 && y <= a.max(b) + 1e-12);
    }

    #[test]
    fn transfer_power_identity(v_src in 2.5f64..4.3, v_sink in 2.5f64..4.3, points in mild_curve(), i_eq in 0.05f64..1.0) {
        let conv = ConverterParams::new(i_eq, 2.0, points).unwrap();
        let r = conv.transfer(v_src, v_sink).unwrap();
        let p_in = v_src * r.i_src;
        let p_out = v_sink * r.i_sink;
        prop_assert!((p_in - p_out - r.p_loss).abs() < 1e-12);
        prop_assert!((r.p_loss - (1.0 - r.efficiency) * v_src * i_eq).abs() < 1e-12);
        prop_assert!((r.efficiency - conv.efficiency(p_out)).abs() < 1e-8);
        prop_assert_eq!(r.i_src, i_eq);
    }
}

#[test]
fn steep_curve_reports_non_convergence() {
    let conv = ConverterParams::new(1.0, 2.0, vec![(1.0, 1.0), (1.1, 0.5)]).unwrap();
    assert!(matches!(
        conv.transfer(2.0, 2.0),
        Err(cellbal_core::Error::NoConvergence { .. })
    ));
}

#[test]
fn reference_efficiency_points() {
    let conv = ConverterParams::reference();
    assert_eq!(conv.efficiency(2.0), 0.901);
    assert_eq!(conv.eff_curve().peak().1, 0.929);
}

#[test]
fn enable_rule_boundary() {
    assert!(!converter_enabled(&[3.60, 3.61], 0.01));
    assert!(converter_enabled(&[3.6, 3.6, 3.8], 0.01));
}
