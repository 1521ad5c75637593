use lsss_core::relocate::Method;
use lsss_core::simcloud::{self, Event, Mode, Scenario};
use proptest::prelude::*;

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

/// A threshold scenario removing disjoint prefixes of servers, with total
/// removal below `t`, then a reconstruction by every survivor.
fn scenario() -> impl Strategy<Value = Scenario> {
    (3usize..=8)
        .prop_flat_map(|n| (2..=n, Just(n)))
        .prop_flat_map(|(t, n)| {
            (
                Just(t),
                Just(n),
                prop::collection::vec((1usize..=2, method()), 0..3),
                1u64..=40,
                any::<u64>(),
            )
        })
        .prop_map(|(t, n, removals, z, seed)| {
            let mut events = vec![Event::Distribute];
            let mut next = 1;
            let mut ideal = true;
            for (k, mut method) in removals {
                if next - 1 + k >= t {
                    break;
                }
                // lc is only defined while every server holds one share.
                if method == Method::Lc && !ideal {
                    method = Method::Ps;
                }
                ideal &= method == Method::Lc;
                events.push(Event::Remove {
                    servers: (next..next + k).collect(),
                    method,
                });
                next += k;
            }
            events.push(Event::Reconstruct {
                servers: (next..=n).collect(),
                secret: z - 1,
            });
            events.push(Event::Snapshot);
            Scenario::threshold(t, n, z, seed, events)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reports_are_deterministic(s in scenario()) {
        let a = simcloud::run(&s).unwrap().to_csv();
        let b = simcloud::run(&Scenario::from_json(&s.to_json()).unwrap()).unwrap().to_csv();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn material_matches_analytic(s in scenario()) {
        let material = Scenario { mode: Mode::Material, ..s.clone() };
        prop_assert_eq!(simcloud::run(&s).unwrap(), simcloud::run(&material).unwrap());
    }

    #[test]
    fn storage_is_linear_in_z(s in scenario(), f in 2u64..=5) {
        let small = simcloud::run(&s).unwrap();
        let big = simcloud::run(&Scenario { z: s.z * f, ..s.clone() }).unwrap();
        for (a, b) in small.snapshots.iter().zip(&big.snapshots) {
            prop_assert_eq!(a.metrics.total_bits * f as u128, b.metrics.total_bits);
            prop_assert_eq!(a.metrics.rho_inverse, b.metrics.rho_inverse);
        }
    }

    #[test]
    fn lc_never_adds_storage(t in 2usize..=8, extra in 0usize..=4, m in 1usize..=7, z in 1u64..100) {
        prop_assume!(m < t);
        let n = t + extra;
        let s = Scenario::threshold(t, n, z, 1, vec![
            Event::Distribute,
            Event::Remove { servers: (1..=m).collect(), method: Method::Lc },
            Event::Snapshot,
        ]);
        let r = simcloud::run(&s).unwrap();
        prop_assert_eq!(r.snapshots[0].metrics.total_bits, ((n - m) as u128) * 16 * z as u128);
    }

    #[test]
    fn surviving_servers_recover(s in scenario()) {
        let r = simcloud::run(&s).unwrap();
        for rec in &r.reconstructions {
            prop_assert_eq!(&rec.result, &simcloud::ReconstructionResult::Recovered(rec.expected.clone()));
        }
    }
}
