//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::Rng;
use sicluster::defects::*;
use sicluster::donor::*;
use sicluster::graph::GraphState;
use sicluster::mbqc::*;
use sicluster::pauli::Basis;
use sicluster::pulse::*;
use sicluster::rng::SeedStream;

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(l: &DonorLattice, kind: ProtocolKind, b: Backend, seed: u64) -> Result<(ProtocolRun, Duration), String> {
    let t = Instant::now();
    let r = run_protocol(l, &kind.steps(), b, &mut SeedStream::new(seed).rng("acceptance")).map_err(|e| e.to_string())?;
    Ok((r, t.elapsed()))
}

fn standard_topology() -> Result<String, String> {
    let mut cases = 0;
    let mut slowest = Duration::ZERO;
    for lx in 1..=11 {
        for ly in 1..=11 {
            if 2 * lx * ly > 22 {
                continue;
            }
            let l = DonorLattice::new(lx, ly).map_err(|e| e.to_string())?;
            let want = predicted_edge_set(&l, ProtocolKind::Standard);
            let mut corrected = Vec::new();
            for b in [Backend::Stabilizer, Backend::Statevector] {
                let seeds = if b == Backend::Stabilizer { 50 } else { 3 };
                for seed in 0..seeds {
                    let (r, dt) = run(&l, ProtocolKind::Standard, b, seed)?;
                    ensure(r.graph.edges() == want, || format!("{lx}x{ly} {b:?} seed {seed}: adjacency differs"))?;
                    ensure(dt < Duration::from_secs(1), || format!("{lx}x{ly} {b:?} took {dt:?}"))?;
                    slowest = slowest.max(dt);
                    if seed == 0 {
                        corrected.push(r.corrected_graph());
                    }
                    cases += 1;
                }
            }
            ensure(corrected[0] == corrected[1], || format!("{lx}x{ly}: backends disagree after frame correction"))?;
        }
    }
    let l = DonorLattice::new(2, 2).map_err(|e| e.to_string())?;
    let (r, _) = run(&l, ProtocolKind::Standard, Backend::Statevector, 7)?;
    let tri = [(0, 1), (0, 3), (1, 3)];
    ensure(tri.iter().all(|&(u, v)| r.graph.has_edge(u, v).unwrap_or(false)), || {
        "2x2: electron from (0,0) does not leave a triangle".to_string()
    })?;
    Ok(format!("{cases} runs up to 22 qubits, slowest {slowest:.2?}"))
}

/// Nearest-neighbor edges of the sub-grid with columns `i >= 1`.
fn grid_interior(lx: usize, ly: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for j in 0..ly {
        for i in 1..lx {
            let v = j * lx + i;
            if i + 1 < lx {
                e.push((v, v + 1));
            }
            if j + 1 < ly {
                e.push((v, v + lx));
            }
        }
    }
    e.sort_unstable();
    e
}

fn square_topology() -> Result<String, String> {
    for (lx, ly, backends) in [
        (3, 3, vec![Backend::Stabilizer, Backend::Statevector]),
        (6, 5, vec![Backend::Stabilizer]),
    ] {
        let l = DonorLattice::new(lx, ly).map_err(|e| e.to_string())?;
        for b in backends {
            let (r, _) = run(&l, ProtocolKind::Square, b, 3)?;
            let interior: Vec<(usize, usize)> =
                r.graph.edges().into_iter().filter(|&(u, v)| u % lx >= 1 && v % lx >= 1).collect();
            ensure(interior == grid_interior(lx, ly), || format!("{lx}x{ly} {b:?}: interior is not a square lattice"))?;
            ensure(r.graph.edges() == predicted_edge_set(&l, ProtocolKind::Square), || {
                format!("{lx}x{ly} {b:?}: adjacency differs from predictor")
            })?;
        }
    }
    Ok("3x3 on both backends, 6x5 on the tableau".into())
}

fn scale() -> Result<String, String> {
    let l = DonorLattice::new(100, 100).map_err(|e| e.to_string())?;
    let (r, dt) = run(&l, ProtocolKind::Standard, Backend::Stabilizer, 1)?;
    ensure(r.graph.edges() == predicted_edge_set(&l, ProtocolKind::Standard), || "adjacency differs".into())?;
    ensure(dt <= Duration::from_secs(10), || format!("took {dt:?}"))?;
    Ok(format!("100x100 standard in {dt:.2?}, {} edges", r.graph.edge_count()))
}

fn composite_gate() -> Result<String, String> {
    let sys = TwoSpinSystem::default();
    let mut rng = SeedStream::new(4).rng("acceptance-theta");
    let thetas: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..TWO_PI)).collect();
    let sweep = fidelity_sweep(&sys, &thetas, &[None]).map_err(|e| e.to_string())?;
    let worst = sweep.rows.iter().map(|r| (r.fidelity - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-10, || format!("instantaneous |F - 1| = {worst:e}"))?;
    let row = fidelity_sweep(&sys, &[PI], &[Some(DEFAULT_RABI)]).map_err(|e| e.to_string())?.rows[0];
    ensure((row.duration - 40e-9).abs() < 1e-18, || format!("duration {} s", row.duration))?;
    ensure((row.fidelity - 0.9853403777353136).abs() < 1e-12, || format!("finite F(π) = {}", row.fidelity))?;
    let half = fidelity_sweep(&sys, &[FRAC_PI_2], &[Some(DEFAULT_RABI)]).map_err(|e| e.to_string())?.rows[0];
    ensure((half.fidelity - 0.8629210769802949).abs() < 1e-12, || format!("finite F(π/2) = {}", half.fidelity))?;
    Ok(format!("instantaneous worst {worst:.1e}; 40 ns at 25 MHz, F(π) = {:.10}", row.fidelity))
}

fn timing_arithmetic() -> Result<String, String> {
    let tm = TimingModel::default();
    let seq = preparation_time(10_000, &tm).map_err(|e| e.to_string())?;
    let par = preparation_time(10_000, &tm.clone().with_mode(TimingMode::Parallel)).map_err(|e| e.to_string())?;
    let fom = figure_of_merit(2.5, 4e4).map_err(|e| e.to_string())?;
    ensure((0.9e-4..=1.1e-4).contains(&seq), || format!("sequential {seq:e} s"))?;
    ensure(par <= 5e-6, || format!("parallel {par:e} s"))?;
    ensure(fom == 1e5, || format!("figure of merit {fom}"))?;
    Ok(format!("sequential {seq:.4e} s, parallel {par:.2e} s, figure of merit {fom:e}"))
}

fn line(n: usize) -> GraphState {
    let e: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
    GraphState::from_edges(n, &e).expect("line")
}

fn mbqc_correctness() -> Result<String, String> {
    let wire = verify_logical(
        &line(3),
        &wire_pattern(&[0, 1, 2]).map_err(|e| e.to_string())?,
        &unitary_identity(1),
        SeedStream::new(6),
        50,
    )
    .map_err(|e| e.to_string())?;
    ensure(wire.distance < 1e-9, || format!("identity wire distance {:e}", wire.distance))?;
    let mut rng = SeedStream::new(6).rng("acceptance-angles");
    let mut worst = wire.distance;
    for k in 0..20 {
        let (a, b, c) = (rng.random_range(0.0..TWO_PI), rng.random_range(0.0..TWO_PI), rng.random_range(0.0..TWO_PI));
        let r = verify_logical(&line(5), &rotation_pattern(a, b, c), &rotation_zxz(a, b, c), SeedStream::new(100 + k), 50)
            .map_err(|e| e.to_string())?;
        ensure(r.distance < 1e-9, || format!("rotation ({a}, {b}, {c}) distance {:e}", r.distance))?;
        worst = worst.max(r.distance);
    }
    Ok(format!("wire + 20 rotations x 50 seeds, worst distance {worst:.1e}"))
}

fn noise_statistics() -> Result<String, String> {
    let pn = flip_probability(0.76).map_err(|e| e.to_string())?;
    let pe = flip_probability(0.90).map_err(|e| e.to_string())?;
    let dm = DefectModel { init_flip_nuclear: pn, init_flip_electron: pe, ..DefectModel::default() };
    let l = DonorLattice::new(3, 3).map_err(|e| e.to_string())?;
    let steps = ProtocolKind::Standard.steps();
    let trials = 1000u64;
    let (mut nuclear, mut electron) = (0usize, 0usize);
    for t in 0..trials {
        let r = inject_noise(&l, &steps, Backend::Stabilizer, &dm, &TimingModel::default(), SeedStream::new(7).child("trial", t))
            .map_err(|e| e.to_string())?;
        nuclear += r.count(ErrorKind::InitNuclear);
        electron += r.count(ErrorKind::InitElectron);
    }
    let n = (trials as usize * l.live_count()) as f64;
    let mut z = Vec::new();
    for (count, p, name) in [(nuclear, pn, "nuclear"), (electron, pe, "electron")] {
        let sigma = (n * p * (1.0 - p)).sqrt();
        let dev = (count as f64 - n * p) / sigma;
        ensure(dev.abs() < 3.0, || format!("{name} flips {count} vs mean {} ({dev:.2} sigma)", n * p))?;
        z.push(dev);
    }

    let quiet = DefectModel { t2n: f64::INFINITY, ..DefectModel::default() };
    for seed in 0..50 {
        let seeds = SeedStream::new(seed);
        let noisy = inject_noise(&l, &steps, Backend::Stabilizer, &quiet, &TimingModel::default(), seeds).map_err(|e| e.to_string())?;
        let clean = run_protocol(&l, &steps, Backend::Stabilizer, &mut seeds.rng("protocol")).map_err(|e| e.to_string())?;
        ensure(
            noisy.errors.is_empty()
                && noisy.run.measurements == clean.measurements
                && noisy.run.graph == clean.graph
                && noisy.run.frame == clean.frame,
            || format!("seed {seed}: zero-noise run differs from the noiseless run"),
        )?;
    }
    Ok(format!("flip counts at {:+.2} and {:+.2} sigma; 50 zero-noise seeds identical", z[0], z[1]))
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn property_suites() -> Result<String, String> {
    runner(200)
        .run(&common::circuit_strategy(), |(n, gates)| common::check_circuit(n, &gates).map_err(TestCaseError::fail))
        .map_err(|e| format!("Clifford circuits: {e}"))?;
    runner(100)
        .run(&(common::graph_strategy(9), proptest::collection::vec(0usize..64, 1..6)), |(g, seq)| {
            common::check_lc(&g, &seq).map_err(TestCaseError::fail)
        })
        .map_err(|e| format!("local complementation: {e}"))?;
    runner(100)
        .run(&(common::graph_strategy(9), 0usize..64, 0usize..3), |(g, v, b)| {
            let v = g.ids()[v % g.len()];
            common::check_measurement(&g, v, Basis::ALL[b]).map_err(TestCaseError::fail)
        })
        .map_err(|e| format!("graph measurement: {e}"))?;
    Ok("200 circuits, 100 LC graphs, 100 measurement triples".into())
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("protocol topology (standard)", standard_topology),
        ("protocol topology (square)", square_topology),
        ("scale", scale),
        ("composite gate", composite_gate),
        ("timing arithmetic", timing_arithmetic),
        ("MBQC correctness", mbqc_correctness),
        ("noise statistics", noise_statistics),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let dt = t.elapsed();
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}) [{dt:.2?}]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail}) [{dt:.2?}]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
