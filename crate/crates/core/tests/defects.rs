use sicluster::defects::*;
use sicluster::donor::{run_protocol, Backend, DonorLattice, ProtocolKind};
use sicluster::rng::SeedStream;

#[test]
fn zero_rates_reproduce_the_noiseless_run() {
    let l = DonorLattice::new(4, 3).unwrap();
    let steps = ProtocolKind::Standard.steps();
    let seeds = SeedStream::new(77);
    let noisy = inject_noise(&l, &steps, Backend::Stabilizer, &DefectModel::default(), &TimingModel::default(), seeds).unwrap();
    let clean = run_protocol(&l, &steps, Backend::Stabilizer, &mut seeds.rng("protocol")).unwrap();
    assert!(noisy.errors.is_empty());
    assert_eq!(noisy.run.measurements, clean.measurements);
    assert_eq!(noisy.run.graph, clean.graph);
    assert_eq!(noisy.run.frame, clean.frame);
}

#[test]
fn certain_measurement_errors_invert_every_report() {
    let l = DonorLattice::new(3, 3).unwrap();
    let steps = ProtocolKind::Square.steps();
    let seeds = SeedStream::new(5);
    let dm = DefectModel { meas_flip: 1.0, ..DefectModel::default() };
    let noisy = inject_noise(&l, &steps, Backend::Stabilizer, &dm, &TimingModel::default(), seeds).unwrap();
    let clean = run_protocol(&l, &steps, Backend::Stabilizer, &mut seeds.rng("protocol")).unwrap();
    assert_eq!(noisy.run.measurements.len(), clean.measurements.len());
    for (a, b) in noisy.run.measurements.iter().zip(&clean.measurements) {
        assert_eq!(a.outcome, b.outcome.flipped());
        assert!(a.report_flipped);
    }
    assert_eq!(noisy.count(ErrorKind::MeasurementFlip), clean.measurements.len());
    // Physical state is untouched; only the inferred corrections go wrong.
    assert_eq!(noisy.run.graph, clean.graph);
}

#[test]
fn nuclear_initialization_rate_at_76_percent_polarization() {
    let p = sicluster::donor::flip_probability(0.76).unwrap();
    assert!((p - 0.12).abs() < 1e-15);
    let l = DonorLattice::new(3, 3).unwrap();
    let steps = ProtocolKind::Standard.steps();
    let dm = DefectModel { init_flip_nuclear: p, ..DefectModel::default() };
    let trials: u64 = 1000;
    let mut total = 0usize;
    for t in 0..trials {
        let r = inject_noise(&l, &steps, Backend::Stabilizer, &dm, &TimingModel::default(), SeedStream::new(1).child("trial", t)).unwrap();
        total += r.count(ErrorKind::InitNuclear);
    }
    let n = (trials as usize * l.live_count()) as f64;
    let sigma = (n * p * (1.0 - p)).sqrt();
    assert!((total as f64 - n * p).abs() < 3.0 * sigma, "{total} vs {}", n * p);
}

#[test]
fn decoherence_probability_follows_preparation_time() {
    let l = DonorLattice::new(10, 10).unwrap();
    let dm = DefectModel { t2n: 1e-4, ..DefectModel::default() };
    let r = inject_noise(&l, &ProtocolKind::Square.steps(), Backend::Stabilizer, &dm, &TimingModel::default(), SeedStream::new(2)).unwrap();
    assert!((r.elapsed - 10.1e-6).abs() < 1e-15);
    assert!((r.nuclear_error_probability - (1.0 - (-0.101f64).exp())).abs() < 1e-12);
    assert_eq!(r.count(ErrorKind::NuclearDephasing), r.errors.len());
    // Reproducible bit for bit.
    let again = inject_noise(&l, &ProtocolKind::Square.steps(), Backend::Stabilizer, &dm, &TimingModel::default(), SeedStream::new(2)).unwrap();
    assert_eq!(r.errors, again.errors);
    assert_eq!(r.run.graph, again.run.graph);
}

#[test]
fn noise_needs_the_stabilizer_backend() {
    let l = DonorLattice::new(2, 2).unwrap();
    let r = inject_noise(&l, &ProtocolKind::Standard.steps(), Backend::Statevector, &DefectModel::default(), &TimingModel::default(), SeedStream::new(0));
    assert!(matches!(r, Err(DefectError::Backend)));
}

#[test]
fn survey_extremes() {
    let l = DonorLattice::new(8, 8).unwrap();
    let r = dead_pixel_survey(&l, &DefectModel::default(), ProtocolKind::Square, SeedStream::new(1), 100).unwrap();
    assert_eq!(r.largest_component, 64);
    assert_eq!(r.success_rate, 1.0);
    assert_eq!(r.lost, 0);
    let all: Vec<[usize; 2]> = (0..8).flat_map(|j| (0..8).map(move |i| [i, j])).collect();
    let dm = DefectModel { dead: all, ..DefectModel::default() };
    let r = dead_pixel_survey(&l, &dm, ProtocolKind::Square, SeedStream::new(1), 100).unwrap();
    assert_eq!(r.largest_component, 0);
    assert_eq!(r.dead, 64);
    assert_eq!(r.carve_attempts, 0);
}

#[test]
fn survey_five_percent_dead_square_20x20() {
    let l = DonorLattice::new(20, 20).unwrap();
    let dm = DefectModel { dead_fraction: 0.05, ..DefectModel::default() };
    let r = dead_pixel_survey(&l, &dm, ProtocolKind::Square, SeedStream::new(2024), 100).unwrap();
    // Regression constants from the first run of this seed.
    assert_eq!(r.dead, 20);
    assert_eq!(r.orphaned, 0);
    assert_eq!(r.largest_component, 380);
    assert_eq!(r.carve_successes, 100);
    assert_eq!(r.success_rate, 1.0);
    assert!((r.mean_path_length - 14.94).abs() < 1e-12);
}
