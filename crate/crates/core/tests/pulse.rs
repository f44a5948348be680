//! The secular two-spin model splits into two electron problems, one per
//! nuclear state, each a spin-1/2 in a constant field per pulse. The oracle
//! below multiplies those closed-form SU(2) rotations.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use sicluster::pulse::*;
use sicluster::rng::SeedStream;

type M2 = [[Complex64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                r[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    r
}

/// `exp(-i t (δ σz/2 + ω1 (cos φ σx + sin φ σy)/2 + c))`.
fn segment(delta: f64, omega1: f64, phi: f64, shift: f64, t: f64) -> M2 {
    let (ax, ay, az) = (omega1 * phi.cos(), omega1 * phi.sin(), delta);
    let w = (ax * ax + ay * ay + az * az).sqrt();
    let (s, co) = (w * t / 2.0).sin_cos();
    let (nx, ny, nz) = if w > 0.0 { (ax / w, ay / w, az / w) } else { (0.0, 0.0, 1.0) };
    let g = Complex64::from_polar(1.0, -shift * t);
    let i = Complex64::new(0.0, 1.0);
    [
        [g * (co - i * s * nz), g * (-i * s * Complex64::new(nx, -ny))],
        [g * (-i * s * Complex64::new(nx, ny)), g * (co + i * s * nz)],
    ]
}

/// Finite-amplitude composite gate from the per-manifold closed form.
fn oracle(sys: &TwoSpinSystem, theta: f64, omega1: f64) -> [[Complex64; 4]; 4] {
    let mut u = [[Complex64::new(0.0, 0.0); 4]; 4];
    for n in 0..2 {
        let m = if n == 0 { 0.5 } else { -0.5 };
        let delta = sys.electron_offset + sys.hyperfine * m;
        let mut block = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
        for (phi, angle) in [(0.0, FRAC_PI_2), (FRAC_PI_2, theta), (PI, FRAC_PI_2)] {
            block = mul(&segment(delta, omega1, phi, sys.nuclear_offset * m, angle / omega1), &block);
        }
        for e in 0..2 {
            for f in 0..2 {
                u[2 * e + n][2 * f + n] = block[e][f];
            }
        }
    }
    u
}

/// Brute-force maximum of `|Tr[(Ze(a) ⊗ Zn(b) CPhase(θ))† U]| / 4`.
fn oracle_fidelity(u: &[[Complex64; 4]; 4], theta: f64) -> f64 {
    let d = [u[0][0], u[1][1], u[2][2], u[3][3] * Complex64::from_polar(1.0, -theta)];
    let f = |a: f64, b: f64| {
        (d[0] + d[1] * Complex64::from_polar(1.0, -b) + d[2] * Complex64::from_polar(1.0, -a) + d[3] * Complex64::from_polar(1.0, -a - b)).norm() / 4.0
    };
    let (mut best, mut ca, mut cb) = (0.0, 0.0, 0.0);
    let mut span = 2.0 * PI;
    for _ in 0..6 {
        let (a0, b0) = (ca, cb);
        for i in 0..=200 {
            for j in 0..=200 {
                let a = a0 + span * (i as f64 / 200.0 - 0.5);
                let b = b0 + span * (j as f64 / 200.0 - 0.5);
                let v = f(a, b);
                if v > best {
                    (best, ca, cb) = (v, a, b);
                }
            }
        }
        span /= 50.0;
    }
    best
}

fn matrix_gap(sys: &TwoSpinSystem, theta: f64, omega1: f64) -> f64 {
    let u = propagator(sys, &composite_cphase(theta, CompositeMode::Finite(omega1)).unwrap()).unwrap();
    let o = oracle(sys, theta, omega1);
    (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| (u[(i, j)] - o[i][j]).norm()).fold(0.0, f64::max)
}

#[test]
fn propagator_matches_closed_form() {
    let mut rng = SeedStream::new(31).rng("pulse-oracle");
    for _ in 0..20 {
        let sys = TwoSpinSystem {
            hyperfine: TWO_PI * rng.random_range(20e6..200e6),
            electron_offset: TWO_PI * rng.random_range(-100e6..100e6),
            nuclear_offset: TWO_PI * rng.random_range(-5e6..5e6),
            ..TwoSpinSystem::default()
        };
        let theta = rng.random_range(0.0..TWO_PI);
        let omega1 = TWO_PI * rng.random_range(1e6..100e6);
        let gap = matrix_gap(&sys, theta, omega1);
        assert!(gap < 1e-10, "gap {gap} for {sys:?} θ={theta} ω1={omega1}");
    }
}

#[test]
fn instantaneous_limit_is_exact() {
    let sys = TwoSpinSystem::default();
    let mut rng = SeedStream::new(5).rng("instantaneous");
    let thetas: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..TWO_PI)).collect();
    let sweep = fidelity_sweep(&sys, &thetas, &[None]).unwrap();
    for r in &sweep.rows {
        assert!((r.fidelity - 1.0).abs() < 1e-10, "θ={} F={}", r.theta, r.fidelity);
    }
}

#[test]
fn finite_gate_regression_values() {
    let sys = TwoSpinSystem::default();
    for (theta, pinned, duration) in [(PI, 0.9853403777353136, 40e-9), (FRAC_PI_2, 0.8629210769802949, 30e-9)] {
        let row = fidelity_sweep(&sys, &[theta], &[Some(DEFAULT_RABI)]).unwrap().rows[0];
        assert!((row.fidelity - pinned).abs() < 1e-12, "θ={theta}: {}", row.fidelity);
        assert!((row.duration - duration).abs() < 1e-18);
        let brute = oracle_fidelity(&oracle(&sys, theta, DEFAULT_RABI), theta);
        assert!((brute - pinned).abs() < 1e-9, "θ={theta}: oracle {brute}");
    }
}

#[test]
fn slower_pulses_are_more_selective() {
    let sys = TwoSpinSystem::default();
    let sweep = fidelity_sweep(&sys, &[PI], &[Some(TWO_PI * 2e6), Some(TWO_PI * 10e6), Some(DEFAULT_RABI)]).unwrap();
    assert!(sweep.selectivity_trend().iter().all(|&(_, ok)| ok));
    assert!(sweep.rows[0].fidelity > 0.999, "{}", sweep.rows[0].fidelity);
}
