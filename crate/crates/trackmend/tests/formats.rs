use proptest::prelude::*;
use trackmend::trajectory_csv::{read_trajectories, write_trajectories};
use trackmend::triplet_table::{read_triplets, write_triplets};
use trackmend::zone_xml::{parse_zone_file, serialize_zones};
use trackmend_core::synth::{generate, SynthConfig};
use trackmend_core::{GroundPoint, Zone, ZoneKind, ZoneTriplet};

fn kind() -> impl Strategy<Value = ZoneKind> {
    prop_oneof![
        Just(ZoneKind::Entry),
        Just(ZoneKind::Exit),
        Just(ZoneKind::InOut),
        Just(ZoneKind::Lost),
        Just(ZoneKind::Found),
        Just(ZoneKind::LostFound),
    ]
}

fn zone(ident: u32) -> impl Strategy<Value = Zone> {
    ("[A-Za-z0-9_ &<>'\"]{1,12}", kind(), -1e4..1e4f64, -1e4..1e4f64, 1e-3..1e3f64, 1e-3..1e3f64).prop_map(move |(name, kind, x, y, w, h)| {
        Zone::rectangle(ident, name, kind, GroundPoint::new(x, y), GroundPoint::new(x + w, y + h)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zones_survive_a_round_trip(a in zone(1), b in zone(7), c in zone(40)) {
        let zones = vec![a, b, c];
        let text = serialize_zones(&zones);
        prop_assert_eq!(parse_zone_file(&text).unwrap(), zones);
    }

    #[test]
    fn trajectories_survive_a_round_trip(seed in 0u64..1000, agents in 1usize..15, noise in 0.0..0.5f64) {
        let out = generate(&SynthConfig { agent_count: agents, noise_track_rate: noise, seed, ..SynthConfig::default() }).unwrap();
        let text = write_trajectories(&out.trajectories);
        let file = read_trajectories(&text).unwrap();
        prop_assert!(file.has_neighbor_counts);
        prop_assert_eq!(&file.trajectories, &out.trajectories);
        prop_assert_eq!(write_trajectories(&file.trajectories), text);
    }

    #[test]
    fn triplets_survive_a_round_trip(rows in prop::collection::vec((0u32..50, 0u32..50, 0u32..50, 0.0..100.0f64, 0.0..100.0f64, 1usize..500), 0..10)) {
        let triplets: Vec<ZoneTriplet> = rows
            .into_iter()
            .map(|(start_zone, lost_zone, found_zone, min_time, span, support)| ZoneTriplet { start_zone, lost_zone, found_zone, min_time, max_time: min_time + span, support })
            .collect();
        prop_assert_eq!(read_triplets(&write_triplets(&triplets)).unwrap(), triplets);
    }
}
