use proptest::prelude::*;

use tnn_core::dataio::PixelImage;
use tnn_core::encode::{encode_image, split_channels, EncoderKind, EncoderTable};
use tnn_core::gamma::{relaxed_length, GammaClock, GammaMode, GrstCause};
use tnn_core::metrics::{purity, SpikeHistogram};
use tnn_core::network::{ImageRecord, Winner};
use tnn_core::neuron::{Column, RnlNeuron, SynapseWeight};
use tnn_core::stdp::{apply_update, classify_case, update_column, RuleCase, StdpParams, UpdateGuard};
use tnn_core::{SpikeTime, SpikeVolley};

fn arb_time(period: u16) -> impl Strategy<Value = SpikeTime> {
    prop_oneof![1 => Just(SpikeTime::INF), 4 => (0..period).prop_map(SpikeTime::at)]
}

fn all_times() -> Vec<SpikeTime> {
    (0..16).map(SpikeTime::at).chain([SpikeTime::INF]).collect()
}

#[test]
fn classification_is_total_and_exclusive() {
    let mut seen = std::collections::HashMap::new();
    for x in all_times() {
        for z in all_times() {
            let case = classify_case(x, z);
            let matches = [
                x.is_finite() && z.is_finite() && x <= z,
                x.is_finite() && z.is_finite() && x > z,
                x.is_finite() && z.is_inf(),
                x.is_inf() && z.is_finite(),
                x.is_inf() && z.is_inf(),
            ];
            assert_eq!(matches.iter().filter(|&&m| m).count(), 1);
            let expected = [
                RuleCase::Capture,
                RuleCase::BackoffLate,
                RuleCase::Search,
                RuleCase::BackoffNoInput,
                RuleCase::Quiet,
            ][matches.iter().position(|&m| m).unwrap()];
            assert_eq!(case, expected, "x={x} z={z}");
            *seen.entry(case).or_insert(0) += 1;
        }
    }
    assert_eq!(seen.len(), 5);
    assert_eq!(seen.values().sum::<i32>(), 17 * 17);
}

#[test]
fn encoders_exhaustive() {
    for kind in [
        EncoderKind::Linear { period: 16 },
        EncoderKind::Log { period: 16 },
        EncoderKind::Linear { period: 8 },
        EncoderKind::Log { period: 32 },
    ] {
        let table = EncoderTable::new(kind);
        let pixels: Vec<u8> = (0..=255).collect();
        let volley = table.encode(&pixels);
        let (pos, _) = split_channels(&volley);
        assert!(pos[0].is_inf(), "{kind:?}");
        for v in 1..256 {
            assert!(pos[v].is_finite(), "{kind:?} {v}");
            assert!(pos[v] <= pos[v - 1], "{kind:?} not monotone at {v}");
        }
    }
}

proptest! {
    #[test]
    fn raising_a_weight_never_delays_the_spike(
        half in prop::collection::vec(0u8..=14, 1..=12),
        times in prop::collection::vec(arb_time(16), 12),
        pick in any::<prop::sample::Index>(),
        bump in 1u8..=14,
        threshold in 1u32..=60,
    ) {
        let n = half.len();
        let volley = SpikeVolley::new(times[..n].to_vec());
        let weights: Vec<_> = half.iter().map(|&h| SynapseWeight::from_half_units(h as u32, 7)).collect();
        let before = RnlNeuron::new(weights.clone(), threshold).unwrap().spike_time(&volley, 16).unwrap();
        let i = pick.index(n);
        let mut raised = weights;
        raised[i] = SynapseWeight::from_half_units((half[i] + bump) as u32, 7);
        let after = RnlNeuron::new(raised, threshold).unwrap().spike_time(&volley, 16).unwrap();
        prop_assert!(after <= before, "{before} -> {after}");
    }

    #[test]
    fn weights_stay_in_range(
        w_max in 1u8..=10,
        start in prop::collection::vec(0u32..=20, 6),
        cycles in prop::collection::vec(
            (prop::collection::vec(arb_time(16), 6), prop::option::of((0usize..3, 0u16..16))),
            1..40,
        ),
        u in (0u8..=4, 0u8..=4, 0u8..=4, 0u8..=2),
    ) {
        let p = StdpParams { u_capture: u.0, u_backoff: u.1, u_search: u.2, u_quiet: u.3, w_max };
        let neuron = |offset: usize| {
            let ws = (0..6).map(|i| SynapseWeight::from_half_units(start[(i + offset) % 6], w_max)).collect();
            RnlNeuron::new(ws, 5).unwrap()
        };
        let mut col = Column::new(vec![neuron(0), neuron(1), neuron(2)]);
        let mut guard = UpdateGuard::default();
        for (times, winner) in cycles {
            let volley = SpikeVolley::new(times);
            let (w, t) = match winner {
                Some((i, t)) => (Some(i), SpikeTime::at(t)),
                None => (None, SpikeTime::INF),
            };
            update_column(&mut col, &volley, w, t, &p, &mut guard).unwrap();
            prop_assert!(update_column(&mut col, &volley, w, t, &p, &mut guard).is_err());
            guard.reset();
            for n in &col.neurons {
                prop_assert!(n.weights.iter().all(|w| w.half_units() <= 2 * w_max));
            }
        }
    }

    #[test]
    fn single_update_saturates(h in 0u32..=14, x in arb_time(16), z in arb_time(16)) {
        let p = StdpParams::default();
        let w = SynapseWeight::from_half_units(h, 7);
        let case = classify_case(x, z);
        let got = apply_update(w, case, &p).half_units() as i32;
        let step = match case {
            RuleCase::Capture | RuleCase::Search => 2,
            RuleCase::BackoffLate | RuleCase::BackoffNoInput => -2,
            RuleCase::Quiet => 1,
        };
        prop_assert_eq!(got, (h as i32 + step).clamp(0, 14));
    }

    #[test]
    fn encoded_images_are_well_formed(
        pixels in prop::collection::vec(any::<u8>(), 1..=64),
        threshold in any::<u8>(),
        which in 0usize..3,
    ) {
        let kind = [
            EncoderKind::PosNeg { threshold },
            EncoderKind::Linear { period: 16 },
            EncoderKind::Log { period: 16 },
        ][which];
        let img = PixelImage::new(pixels.clone(), pixels.len(), 1).unwrap();
        let volley = encode_image(&img, kind);
        prop_assert_eq!(volley.len(), 2 * pixels.len());
        prop_assert_eq!(&volley, &encode_image(&img, kind));
        let (pos, neg) = split_channels(&volley);
        for ((&p, &n), &v) in pos.iter().zip(neg).zip(&pixels) {
            prop_assert!(p.value().is_none_or(|t| t < 16) && n.value().is_none_or(|t| t < 16));
            if which == 0 {
                prop_assert!(p.is_finite() != n.is_finite());
                prop_assert_eq!(p.is_finite(), v > threshold);
                prop_assert!(p.value().unwrap_or(0) == 0 && n.value().unwrap_or(0) == 0);
            }
        }
    }

    #[test]
    fn relaxed_cycles_never_lengthen(times in prop::collection::vec(arb_time(20), 1..=8), period in 1u16..=16) {
        let mut relaxed = GammaClock::new(period, times.len(), GammaMode::Relaxed).unwrap();
        let mut fixed = GammaClock::new(period, times.len(), GammaMode::Fixed).unwrap();
        let (len, cause) = relaxed.run_cycle(&times).unwrap();
        prop_assert_eq!(len, relaxed_length(&times, period));
        prop_assert!(len <= period);
        if times.iter().any(|t| t.value().is_none_or(|v| v >= period)) {
            prop_assert_eq!(len, period);
        }
        if cause == GrstCause::Period {
            prop_assert_eq!(len, period);
        }
        prop_assert_eq!(fixed.run_cycle(&times).unwrap(), (period, GrstCause::Period));
    }

    #[test]
    fn histogram_conserves_samples(times in prop::collection::vec(arb_time(24), 0..200)) {
        let h = SpikeHistogram::from_times(16, times.iter().copied());
        prop_assert_eq!(h.total(), times.len() as u64);
        let late = times.iter().filter(|t| t.value().is_none_or(|v| v >= 16)).count() as u64;
        prop_assert_eq!(h.inf, late);
    }

    #[test]
    fn purity_ignores_group_names(
        assignments in prop::collection::vec((prop::option::of(0usize..6), 0u8..10), 1..80),
        shift in 1usize..50,
    ) {
        let records = |offset: usize| -> Vec<ImageRecord> {
            assignments
                .iter()
                .enumerate()
                .map(|(image, (g, _))| ImageRecord {
                    epoch: 0,
                    image,
                    winner: g.map(|g| Winner {
                        column: (g * 7 + offset) % 101,
                        neuron: g + offset,
                        time: SpikeTime::at(3),
                    }),
                })
                .collect()
        };
        let labels: Vec<u8> = assignments.iter().map(|a| a.1).collect();
        let relabeled: Vec<u8> = labels.iter().map(|l| (l + 3) % 10).collect();
        let base = purity(&records(0), &labels).unwrap().purity;
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert_eq!(base, purity(&records(shift), &labels).unwrap().purity);
        prop_assert_eq!(base, purity(&records(0), &relabeled).unwrap().purity);
    }
}
