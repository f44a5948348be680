use std::time::Instant;

use sicluster::donor::*;
use sicluster::rng::SeedStream;

#[test]
fn small_lattices_match_predictor_on_both_backends() {
    for lx in 1..=3 {
        for ly in 1..=3 {
            let l = DonorLattice::new(lx, ly).unwrap();
            for kind in [ProtocolKind::Standard, ProtocolKind::Square] {
                let want = predicted_edge_set(&l, kind);
                let mut corrected = Vec::new();
                for b in [Backend::Stabilizer, Backend::Statevector] {
                    let r = run_protocol(&l, &kind.steps(), b, &mut SeedStream::new(3).rng("m")).unwrap();
                    assert_eq!(r.graph.edges(), want, "{lx}x{ly} {kind:?} {b:?}");
                    corrected.push(r.corrected_graph());
                }
                assert_eq!(corrected[0], corrected[1], "{lx}x{ly} {kind:?}");
            }
        }
    }
}

#[test]
fn dead_sites_stay_isolated() {
    let l = DonorLattice::with_dead(4, 4, [(1, 1), (2, 3)]).unwrap();
    for kind in [ProtocolKind::Standard, ProtocolKind::Square] {
        let r = run_protocol(&l, &kind.steps(), Backend::Stabilizer, &mut SeedStream::new(8).rng("m")).unwrap();
        assert_eq!(r.graph.edges(), predicted_edge_set(&l, kind));
        for (i, j) in [(1, 1), (2, 3)] {
            assert_eq!(r.graph.degree(l.site_id(i, j)).unwrap(), 0);
        }
    }
}

#[test]
fn hundred_by_hundred_within_budget() {
    let l = DonorLattice::new(100, 100).unwrap();
    let t = Instant::now();
    let r = run_protocol(&l, &standard_protocol(), Backend::Stabilizer, &mut SeedStream::new(3).rng("m")).unwrap();
    let elapsed = t.elapsed();
    assert_eq!(r.graph.edges(), predicted_edge_set(&l, ProtocolKind::Standard));
    assert!(elapsed.as_secs_f64() < 60.0, "{elapsed:?}");
}

#[test]
fn statevector_cap_is_reported() {
    let l = DonorLattice::new(5, 5).unwrap();
    let err = run_protocol(&l, &standard_protocol(), Backend::Statevector, &mut SeedStream::new(1).rng("m")).unwrap_err();
    assert!(matches!(err, DonorError::BackendCap { .. }), "{err}");
}
