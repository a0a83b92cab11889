//! Property tests against independent oracles.

use proptest::prelude::*;
use statrs::distribution::{Beta, Continuous, ContinuousCDF};

use rosdyn::export::{read_trajectory_csv_from, write_trajectory_csv_to};
use rosdyn::format::{parse_instance, to_json};
use rosdyn::utility::smooth_item_utility;
use rosdyn::{
    build_cycle, build_edge_item, fundamental_identity_residual, integrate, utilities, ItemSpec, MarketInstance,
    MultiplierLimits, Settings, TieBreak, ValueSpec,
};

/// Second-price/first-price mix for one fixed-value item, written out by hand.
fn auction_oracle(values: &[f64], m: &[f64], reserve: f64, lambda: f64) -> Vec<f64> {
    let bids: Vec<f64> = values.iter().zip(m).map(|(v, m)| v * m).collect();
    let (w, &top) = bids.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let mut u = vec![0.0; values.len()];
    if top > reserve {
        let second = bids.iter().enumerate().filter(|&(k, _)| k != w).map(|(_, &b)| b).fold(reserve, f64::max);
        u[w] = values[w] - lambda * second - (1.0 - lambda) * top;
    }
    u
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Two smooth bidders, computed with statrs densities and nested Simpson rules.
fn pair_oracle(own: (u32, u32, f64), other: (u32, u32, f64), m: (f64, f64), lambda: f64) -> f64 {
    let f = Beta::new(own.0.into(), own.1.into()).unwrap();
    let g = Beta::new(other.0.into(), other.1.into()).unwrap();
    let cdf = |x: f64| g.cdf((x / (m.1 * other.2)).clamp(0.0, 1.0));
    simpson(
        |v| {
            let density = f.pdf(v / own.2) / own.2;
            let bid = m.0 * v;
            density * (v * (1.0 - m.0) * cdf(bid) + lambda * simpson(cdf, 0.0, bid, 200))
        },
        0.0,
        own.2,
        2000,
    )
}

fn value_spec() -> impl Strategy<Value = ValueSpec> {
    prop_oneof![
        (0.1f64..5.0).prop_map(ValueSpec::Fixed),
        (1u32..15, 1u32..15, 0.2f64..3.0).prop_map(|(a, b, scale)| ValueSpec::Beta { a, b, scale }),
    ]
}

fn instance() -> impl Strategy<Value = MarketInstance> {
    (2usize..6).prop_flat_map(|n| {
        let item = (prop::collection::vec(value_spec(), n), 0.0f64..1.0, 0.5f64..3.0).prop_map(move |(vals, reserve, copies)| {
            // Keep each item all-fixed or all-Beta, as validation requires.
            let beta = vals[0].is_beta();
            let vals = vals.into_iter().enumerate().filter(move |(_, v)| v.is_beta() == beta);
            let item = ItemSpec::new(vals).with_copies(copies);
            if beta {
                item
            } else {
                item.with_reserve(reserve)
            }
        });
        (
            prop::collection::vec(item, 1..5),
            0.0f64..=1.0,
            prop::option::of((1.0f64..1.5, 2.0f64..4.0)),
        )
            .prop_map(move |(items, lambda, limit)| {
                let mut inst = MarketInstance::numbered(n, items, lambda);
                if let Some((floor, ceiling)) = limit {
                    inst.limits.insert(0, MultiplierLimits { floor, ceiling });
                }
                inst
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_items_match_the_auction_oracle(
        values in prop::collection::vec(0.1f64..5.0, 2..6),
        m_raw in prop::collection::vec(0.5f64..3.0, 6),
        reserve in 0.0f64..2.0,
        lambda in 0.0f64..=1.0,
    ) {
        let n = values.len();
        let m = &m_raw[..n];
        let inst = MarketInstance::numbered(n, vec![ItemSpec::fixed(values.iter().copied().enumerate()).with_reserve(reserve)], lambda);
        let got = utilities(&inst, m).unwrap();
        let want = auction_oracle(&values, m, reserve, lambda);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn tie_rules_decide_equal_bids(v in 0.5f64..5.0, lambda in 0.0f64..=1.0) {
        // Bids are both v; bidder 0 values the item at 2v.
        let u0 = |tie| {
            let item = ItemSpec::fixed([(0, 2.0 * v), (1, v)]).with_tie_break(tie);
            utilities(&MarketInstance::numbered(2, vec![item], lambda), &[0.5, 1.0]).unwrap()[0]
        };
        prop_assert!((u0(TieBreak::Favor(0)) - v).abs() < 1e-12);
        prop_assert_eq!(u0(TieBreak::Favor(1)), 0.0);
        prop_assert!((u0(TieBreak::UniformSplit) - 0.5 * v).abs() < 1e-12);
    }

    #[test]
    fn instances_survive_json(inst in instance()) {
        prop_assume!(inst.validate().is_empty());
        let back = parse_instance(&to_json(&inst)).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn relabelling_bidders_permutes_utilities(
        specs in prop::collection::vec((1u32..12, 1u32..12, 0.3f64..2.0), 3),
        m in prop::collection::vec(1.0f64..3.0, 3),
        lambda in 0.0f64..=1.0,
    ) {
        let item = |order: [usize; 3]| {
            ItemSpec::new(order.iter().enumerate().map(|(slot, &k)| (slot, ValueSpec::Beta { a: specs[k].0, b: specs[k].1, scale: specs[k].2 })))
        };
        let cfg = Default::default();
        let base = smooth_item_utility(&item([0, 1, 2]), &m, lambda, cfg).unwrap();
        let perm = [2, 0, 1];
        let pm: Vec<f64> = perm.iter().map(|&k| m[k]).collect();
        let moved = smooth_item_utility(&item(perm), &pm, lambda, cfg).unwrap();
        for (slot, &k) in perm.iter().enumerate() {
            prop_assert!((moved[slot] - base[k]).abs() <= 1e-12, "{base:?} vs {moved:?}");
        }
    }

    #[test]
    fn own_multiplier_sign_structure(c in 1u32..10, m0 in 0.5f64..3.0, m1 in 0.5f64..3.0, lambda in 0.0f64..=1.0) {
        // Above 1 the own derivative is negative for every lambda; below 1 it is
        // positive in the second-price case.
        let h = 1e-5;
        for (i, mi) in [m0, m1].into_iter().enumerate() {
            let l = if mi > 1.05 { lambda } else { 1.0 };
            let inst = MarketInstance::numbered(2, vec![build_edge_item(0, 1, c).unwrap()], l);
            let mut lo = vec![m0, m1];
            let mut hi = vec![m0, m1];
            lo[i] -= h;
            hi[i] += h;
            let d = (utilities(&inst, &hi).unwrap()[i] - utilities(&inst, &lo).unwrap()[i]) / (2.0 * h);
            if mi > 1.05 {
                prop_assert!(d < 0.0, "bidder {i} at {mi}: {d}");
            } else if mi < 0.95 {
                prop_assert!(d > 0.0, "bidder {i} at {mi}: {d}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pair_utility_matches_statrs_oracle(
        a in 2u32..9, b in 2u32..9, c in 2u32..9, d in 2u32..9,
        s0 in 0.5f64..2.0, s1 in 0.5f64..2.0,
        m0 in 1.0f64..3.0, m1 in 1.0f64..3.0,
        lambda in 0.0f64..=1.0,
    ) {
        let item = ItemSpec::new([
            (0, ValueSpec::Beta { a, b, scale: s0 }),
            (1, ValueSpec::Beta { a: c, b: d, scale: s1 }),
        ]);
        let got = smooth_item_utility(&item, &[m0, m1], lambda, Default::default()).unwrap();
        let want0 = pair_oracle((a, b, s0), (c, d, s1), (m0, m1), lambda);
        let want1 = pair_oracle((c, d, s1), (a, b, s0), (m1, m0), lambda);
        prop_assert!((got[0] - want0).abs() <= 1e-6, "{} vs {want0}", got[0]);
        prop_assert!((got[1] - want1).abs() <= 1e-6, "{} vs {want1}", got[1]);
    }

    #[test]
    fn cycle_runs_stay_above_one_and_satisfy_the_identity(
        n in 2usize..6,
        c in 2u32..9,
        start in prop::collection::vec(1.0f64..3.0, 5),
    ) {
        let inst = build_cycle(n, c).unwrap();
        let settings = Settings::new(20.0).dt(0.01).sample_every(0.05);
        let traj = integrate(&inst, &start[..n], &settings).unwrap();
        let lo = traj.states.iter().flatten().fold(f64::INFINITY, |a, &x| a.min(x));
        prop_assert!(lo >= 1.0 - 1e-6, "{lo}");
        let r = fundamental_identity_residual(&traj).unwrap();
        prop_assert!(r.iter().all(|x| x.abs() <= 1e-3), "{r:?}");
        let again = integrate(&inst, &start[..n], &settings).unwrap();
        prop_assert_eq!(&again.states, &traj.states);

        let mut buf = Vec::new();
        write_trajectory_csv_to(&traj, &mut buf).unwrap();
        let back = read_trajectory_csv_from(buf.as_slice(), "memory").unwrap();
        prop_assert_eq!(&back.times, &traj.times);
        prop_assert_eq!(&back.states, &traj.states);
        prop_assert_eq!(&back.utilities, &traj.utilities);
    }
}
