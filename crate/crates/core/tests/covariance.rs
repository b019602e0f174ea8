mod common;

use common::covariance::{random_config, random_shift, scalars, translated, Config};
use framelab::frames::frame_measure_upper;
use framelab::specmat::DEFAULT_RANK_TOL;
use framelab::{FrequencyGenerator, Spectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn dyadic_configurations_are_exactly_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let cfg = random_config(&mut rng);
        let x = random_shift(&mut rng);
        let (a, ga) = scalars(&cfg);
        let (b, gb) = scalars(&translated(&cfg, x));
        assert_eq!(ga, gb, "{:?} shifted by {x}", cfg.gen);
        assert_eq!(a.len(), b.len());
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-8, "{u} vs {v} for {:?}", cfg.gen);
        }
    }
}

#[test]
fn perturbed_sets_are_covariant_up_to_rounding() {
    let cfg = Config {
        spectrum: Spectrum::unit(),
        gen: FrequencyGenerator::Perturbed {
            base: Box::new(FrequencyGenerator::lattice(0.75, 0.0)),
            amplitude: 0.1,
            seed: 11,
        },
        centers: vec![0.0, 1.0],
        y: 0.3,
    };
    let x = 17.123;
    let a = frame_measure_upper(&cfg.spectrum, &cfg.gen, 8.0, &cfg.centers, 2.0, DEFAULT_RANK_TOL).unwrap();
    let t = translated(&cfg, x);
    let b = frame_measure_upper(&t.spectrum, &t.gen, 8.0, &t.centers, 2.0, DEFAULT_RANK_TOL).unwrap();
    assert!((a.m_plus_est - b.m_plus_est).abs() < 1e-8);
    assert!((a.b_est - b.b_est).abs() < 1e-8);
}
