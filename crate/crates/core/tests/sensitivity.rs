mod common;

use cityfreight_core::model::{DeliveryUnitType, DemandProfile, NetworkParams, TemperatureClass};
use cityfreight_core::scheme::{
    build_pi, presets, ClassRoute, ConsolidationConfig, FleetShare, HubConfig, Supplier,
};
use cityfreight_core::sensitivity::{
    evaluate_point, grid_points, sweep_parameter, SweepParameter, SweepSpec, SweepTarget,
};
use common::*;
use proptest::prelude::*;

fn single(weight: f64, stops: f64, params: NetworkParams) -> SweepTarget {
    SweepTarget::Single {
        vehicle: vehicle("17t", 17_000.0, 7.0, 28.0),
        demand: DemandProfile::aggregate(weight, stops),
        params,
        external_factors: table_factors(),
    }
}

fn pi_scheme() -> SweepTarget {
    let sup = |name: &str, kg: f64, stops: f64| Supplier {
        name: name.into(),
        demand: DemandProfile::from_units(vec![DeliveryUnitType::new("pallet", kg, stops)]),
        fleet: vec![FleetShare {
            vehicle: vehicle("25t", 25_000.0, 8.0, 32.0),
            share: 1.0,
            classes: None,
        }],
    };
    let scheme = build_pi(
        "pi",
        &[
            sup("a", 900.0, 36.0),
            sup("b", 300.0, 22.0),
            sup("c", 1200.0, 8.0),
        ],
        &HubConfig {
            consolidation: ConsolidationConfig {
                shuttle_vehicle: vehicle("25t", 25_000.0, 8.0, 32.0),
                shuttle_params: presets::hub_shuttle(),
                city_params: presets::hub_city(),
                city_routes: vec![ClassRoute {
                    classes: TemperatureClass::ALL.to_vec(),
                    vehicle: vehicle("17t", 17_000.0, 7.0, 28.0),
                }],
                handling_cost_per_delivery: 10.0,
            },
            hubs: 2,
            hub_shares: None,
            tours_per_hub: Some(2),
        },
        table_factors(),
    )
    .unwrap();
    SweepTarget::Scheme { scheme, layer: 1 }
}

fn spec(
    parameter: SweepParameter,
    start: f64,
    stop: f64,
    step: f64,
    target: SweepTarget,
) -> SweepSpec {
    SweepSpec {
        parameter,
        start,
        stop,
        step,
        target,
    }
}

#[test]
fn grid_includes_both_ends() {
    assert_eq!(
        grid_points(4.0, 8.0, 1.0).unwrap(),
        vec![4.0, 5.0, 6.0, 7.0, 8.0]
    );
    assert_eq!(
        grid_points(15.0, 30.0, 5.0).unwrap(),
        vec![15.0, 20.0, 25.0, 30.0]
    );
    assert_eq!(grid_points(3.0, 3.0, 1.0).unwrap(), vec![3.0]);
    assert!(grid_points(8.0, 4.0, 1.0).is_err());
    assert!(grid_points(4.0, 8.0, 0.0).is_err());
}

#[test]
fn start_equal_to_stop_gives_one_row() {
    let r = sweep_parameter(&spec(
        SweepParameter::LeadTimeH,
        6.0,
        6.0,
        0.5,
        single(20_000.0, 30.0, params(5.0, 93.0)),
    ))
    .unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.detected_threshold, None);
}

#[test]
fn speed_lowers_cost_of_capacity_bound_layer() {
    let r = sweep_parameter(&spec(
        SweepParameter::SpeedKmh,
        15.0,
        30.0,
        5.0,
        pi_scheme(),
    ))
    .unwrap();
    assert_eq!(r.rows.len(), 4);
    let layers: Vec<_> = r
        .rows
        .iter()
        .map(|row| row.outcome.layer().unwrap().clone())
        .collect();
    for w in layers.windows(2) {
        assert!(w[1].transport_cost() < w[0].transport_cost());
        assert_eq!(w[1].total_distance_km, w[0].total_distance_km);
        assert_eq!(w[1].fill_rate(), w[0].fill_rate());
        assert_eq!(w[1].tours_by_vehicle, w[0].tours_by_vehicle);
    }
    assert_eq!(r.detected_threshold, None);
}

#[test]
fn lead_time_sweep_is_flat_then_rising() {
    let target = single(
        20_000.0,
        40.0,
        NetworkParams {
            shift_duration_h: 24.0,
            ..params(10.0, 186.0)
        },
    );
    let r = sweep_parameter(&spec(SweepParameter::LeadTimeH, 0.5, 8.0, 0.5, target)).unwrap();
    let feasible: Vec<_> = r
        .rows
        .iter()
        .filter(|row| row.outcome.is_feasible())
        .collect();
    let last = feasible.last().unwrap().outcome.total().unwrap();
    let first = feasible.first().unwrap().outcome.total().unwrap();
    assert!(first.total_tours() > last.total_tours());
    assert!(first.total_distance_km > last.total_distance_km);
    assert!(first.fill_rate() < last.fill_rate());
    let threshold = r.detected_threshold.unwrap();
    assert!((0.5..=8.0).contains(&threshold));
    // rows above the threshold share the slack-end plan
    for row in r.rows.iter().filter(|row| row.value > threshold) {
        assert_eq!(
            row.outcome.total().unwrap().tours_by_vehicle,
            last.tours_by_vehicle
        );
    }
}

#[test]
fn steep_lead_time_has_an_infeasible_tail() {
    let target = single(
        5_000.0,
        10.0,
        NetworkParams {
            shift_duration_h: 24.0,
            ..params(30.0, 186.0)
        },
    );
    let r = sweep_parameter(&spec(SweepParameter::LeadTimeH, 1.0, 8.0, 0.5, target)).unwrap();
    // 2r/v = 3 h per extra tour
    let boundary = r.infeasible_below.unwrap();
    assert_eq!(boundary, 3.0);
    for row in &r.rows {
        assert_eq!(
            row.outcome.is_feasible(),
            row.value > boundary,
            "{}",
            row.value
        );
    }
    assert_eq!(r.infeasible_above, None);
}

#[test]
fn everything_infeasible_reports_boundary_only() {
    let target = single(
        5_000.0,
        10.0,
        NetworkParams {
            shift_duration_h: 24.0,
            ..params(30.0, 186.0)
        },
    );
    let r = sweep_parameter(&spec(SweepParameter::LeadTimeH, 1.0, 2.0, 0.5, target)).unwrap();
    assert!(r.rows.iter().all(|row| !row.outcome.is_feasible()));
    assert_eq!(r.detected_threshold, None);
    assert_eq!(r.infeasible_below, Some(2.0));
}

#[test]
fn out_of_range_layer_is_rejected() {
    let SweepTarget::Scheme { scheme, .. } = pi_scheme() else {
        unreachable!()
    };
    let bad = SweepTarget::Scheme { scheme, layer: 5 };
    assert!(sweep_parameter(&spec(SweepParameter::SpeedKmh, 15.0, 30.0, 5.0, bad)).is_err());
}

#[test]
fn sweep_touches_only_the_selected_layer() {
    let r = sweep_parameter(&spec(
        SweepParameter::SpeedKmh,
        15.0,
        30.0,
        5.0,
        pi_scheme(),
    ))
    .unwrap();
    let shuttle: Vec<f64> = r
        .rows
        .iter()
        .map(|row| {
            let o = &row.outcome;
            o.total().unwrap().transport_cost() - o.layer().unwrap().transport_cost()
        })
        .collect();
    assert!(shuttle.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9));
}

#[test]
fn parameter_names_round_trip() {
    for p in SweepParameter::ALL {
        assert_eq!(p.name().parse::<SweepParameter>().unwrap(), p);
    }
    assert!("warp_factor".parse::<SweepParameter>().is_err());
}

fn lead_target() -> impl Strategy<Value = SweepTarget> {
    (
        1_000.0..60_000.0f64,
        1u32..80,
        prop::sample::select(vec![5.0, 10.0, 20.0, 30.0]),
    )
        .prop_map(|(w, s, r)| {
            single(
                w,
                s as f64,
                NetworkParams {
                    shift_duration_h: 24.0,
                    ..params(r, 186.0)
                },
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lead_time_is_monotone(target in lead_target()) {
        let r = sweep_parameter(&spec(SweepParameter::LeadTimeH, 0.5, 12.0, 0.5, target)).unwrap();
        let mut seen_feasible = false;
        let mut prev: Option<(u64, f64, f64)> = None;
        for row in &r.rows {
            match row.outcome.total() {
                None => prop_assert!(!seen_feasible, "infeasible above a feasible lead time"),
                Some(k) => {
                    seen_feasible = true;
                    let cur = (k.total_tours(), k.total_distance_km, k.transport_cost());
                    if let Some(p) = prev {
                        prop_assert!(cur.0 <= p.0 && cur.1 <= p.1 && cur.2 <= p.2);
                    }
                    prev = Some(cur);
                }
            }
        }
    }

    #[test]
    fn rows_equal_standalone_points(target in lead_target(), idx in 0usize..24) {
        let s = spec(SweepParameter::LeadTimeH, 0.5, 12.0, 0.5, target.clone());
        let r = sweep_parameter(&s).unwrap();
        let row = &r.rows[idx % r.rows.len()];
        prop_assert_eq!(&evaluate_point(s.parameter, &target, row.value).unwrap(), &row.outcome);
    }

    #[test]
    fn capacity_bound_speed_sweep(w in 20_000.0..60_000.0f64, s in 1u32..20) {
        let target = single(w, s as f64, params(5.0, 93.0));
        let r = sweep_parameter(&spec(SweepParameter::SpeedKmh, 15.0, 30.0, 2.5, target)).unwrap();
        let all_capacity = r.rows.iter().all(|row| {
            row.outcome.total().is_some_and(|k| k.total_tours() as f64 == (w / 17_000.0).ceil())
        });
        prop_assume!(all_capacity);
        for pair in r.rows.windows(2) {
            let (a, b) = (pair[0].outcome.total().unwrap(), pair[1].outcome.total().unwrap());
            prop_assert!(b.transport_cost() < a.transport_cost());
            prop_assert_eq!(a.total_distance_km, b.total_distance_km);
        }
    }
}
