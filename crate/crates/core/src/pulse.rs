//! Pulse-level model of one donor's electron–nuclear pair.
//!
//! Basis index `2 e + n` with `|0⟩` = spin up for both spins. Hamiltonians
//! are written in the frame rotating at the electron and nuclear carriers.
//! With the default offset `Δe = -A/2` the carrier sits on the electron line
//! of the nuclear-up manifold; the nuclear-down line is detuned by `A`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Unitary4 = Matrix4<Complex64>;

pub const TWO_PI: f64 = 2.0 * PI;
/// Isotropic hyperfine coupling of Si:P, angular frequency.
pub const DEFAULT_HYPERFINE: f64 = TWO_PI * 120e6;
/// Electron Rabi frequency giving a 40 ns composite gate at θ = π.
pub const DEFAULT_RABI: f64 = TWO_PI * 25e6;
/// Electron Zeeman frequency at 0.35 T, used only by the non-secular model.
pub const DEFAULT_ELECTRON_ZEEMAN: f64 = TWO_PI * 9.7e9;
pub const UNITARITY_TOL: f64 = 1e-10;

/// Gauss-Legendre Magnus steps per flip-flop period in the non-secular model.
const STEPS_PER_PERIOD: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("hyperfine coupling must be positive, got {0}")]
    InvalidHyperfine(f64),
    #[error("electron Zeeman frequency must be positive, got {0}")]
    InvalidZeeman(f64),
    #[error("pulse angle must be finite and non-negative, got {0}")]
    InvalidAngle(f64),
    #[error("Rabi frequency must be positive, got {0}")]
    InvalidRabi(f64),
    #[error("delay must be finite and non-negative, got {0}")]
    InvalidDelay(f64),
    #[error("theta {0} outside [0, 2π]")]
    ThetaOutOfRange(f64),
    #[error("operator deviates from unitarity by {0:e}")]
    NotUnitary(f64),
    #[error("sweep grid is empty")]
    EmptyGrid,
}

/// Hamiltonian parameters (angular frequencies).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSpinSystem {
    pub hyperfine: f64,
    pub electron_offset: f64,
    pub nuclear_offset: f64,
    /// Keep only `A Sz Iz`; otherwise the flip-flop part of `A S·I` is kept,
    /// rotating at `electron_zeeman` in this frame.
    pub secular: bool,
    pub electron_zeeman: f64,
}

impl Default for TwoSpinSystem {
    fn default() -> Self {
        Self {
            hyperfine: DEFAULT_HYPERFINE,
            electron_offset: -DEFAULT_HYPERFINE / 2.0,
            nuclear_offset: 0.0,
            secular: true,
            electron_zeeman: DEFAULT_ELECTRON_ZEEMAN,
        }
    }
}

impl TwoSpinSystem {
    pub fn with_hyperfine(a: f64) -> Self {
        Self { hyperfine: a, electron_offset: -a / 2.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if !(self.hyperfine > 0.0 && self.hyperfine.is_finite()) {
            return Err(PulseError::InvalidHyperfine(self.hyperfine));
        }
        if !self.secular && !(self.electron_zeeman > 0.0 && self.electron_zeeman.is_finite()) {
            return Err(PulseError::InvalidZeeman(self.electron_zeeman));
        }
        Ok(())
    }

    /// Time-independent part: `Δe Sz + Δn Iz + A Sz Iz`.
    pub fn static_hamiltonian(&self) -> Unitary4 {
        let (sz, iz) = (electron(&half_pauli_z()), nuclear(&half_pauli_z()));
        sz * c(self.electron_offset) + iz * c(self.nuclear_offset) + sz * iz * c(self.hyperfine)
    }

    /// `(A/2) S+ I-`; the flip-flop term is this times `e^{iΩt}` plus its adjoint.
    fn flip_flop(&self) -> Unitary4 {
        let raise = Matrix2::new(ZERO, ONE, ZERO, ZERO);
        let lower = raise.adjoint();
        electron(&raise) * nuclear(&lower) * c(self.hyperfine / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Electron,
    Nuclear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rabi {
    Instantaneous,
    /// Angular Rabi frequency.
    Finite(f64),
}

/// Rotation about an axis in the xy-plane (`phase` 0 = x, π/2 = y).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub channel: Channel,
    pub phase: f64,
    pub angle: f64,
    pub rabi: Rabi,
    /// Instantaneous pulses only: rotate just the carrier-resonant manifold
    /// (nuclear up for electron pulses, electron up for nuclear pulses).
    pub selective: bool,
}

impl Pulse {
    pub fn instantaneous(channel: Channel, phase: f64, angle: f64, selective: bool) -> Self {
        Self { channel, phase, angle, rabi: Rabi::Instantaneous, selective }
    }

    pub fn finite(channel: Channel, phase: f64, angle: f64, omega1: f64) -> Self {
        Self { channel, phase, angle, rabi: Rabi::Finite(omega1), selective: false }
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if !(self.angle >= 0.0 && self.angle.is_finite()) {
            return Err(PulseError::InvalidAngle(self.angle));
        }
        if let Rabi::Finite(w) = self.rabi {
            if !(w > 0.0 && w.is_finite()) {
                return Err(PulseError::InvalidRabi(w));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        match self.rabi {
            Rabi::Instantaneous => 0.0,
            Rabi::Finite(w) => self.angle / w,
        }
    }

    /// Drive term `ω1 (cos φ X + sin φ Y)/2` on the addressed spin.
    fn drive(&self, omega1: f64) -> Unitary4 {
        let op = axis(self.phase) * c(omega1 / 2.0);
        match self.channel {
            Channel::Electron => electron(&op),
            Channel::Nuclear => nuclear(&op),
        }
    }

    fn rotation(&self) -> Unitary4 {
        let r = rotation2(self.phase, self.angle);
        match (self.channel, self.selective) {
            (Channel::Electron, false) => electron(&r),
            (Channel::Nuclear, false) => nuclear(&r),
            (Channel::Electron, true) => controlled(&r, false),
            (Channel::Nuclear, true) => controlled(&r, true),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceElement {
    Pulse(Pulse),
    /// Free evolution, seconds.
    Delay(f64),
}

/// Pulses and delays in time order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompositeSequence {
    elements: Vec<SequenceElement>,
}

impl CompositeSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_pulse(&mut self, p: Pulse) -> Result<(), PulseError> {
        p.validate()?;
        self.elements.push(SequenceElement::Pulse(p));
        Ok(())
    }

    pub fn push_delay(&mut self, t: f64) -> Result<(), PulseError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(PulseError::InvalidDelay(t));
        }
        self.elements.push(SequenceElement::Delay(t));
        Ok(())
    }

    pub fn elements(&self) -> &[SequenceElement] {
        &self.elements
    }

    pub fn duration(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                SequenceElement::Pulse(p) => p.duration(),
                SequenceElement::Delay(t) => *t,
            })
            .sum()
    }

    /// Same sequence with every electron pulse axis rotated by `delta`.
    pub fn with_electron_phase_shift(&self, delta: f64) -> Self {
        let elements = self
            .elements
            .iter()
            .map(|e| match *e {
                SequenceElement::Pulse(p) if p.channel == Channel::Electron => {
                    SequenceElement::Pulse(Pulse { phase: p.phase + delta, ..p })
                }
                other => other,
            })
            .collect();
        Self { elements }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeMode {
    Instantaneous,
    /// Angular Rabi frequency of every electron pulse.
    Finite(f64),
}

/// `(π/2)_x (θ)_y (π/2)_{-x}` on the electron, in time order. On the
/// resonant manifold this is `Rz(-θ)`, which with the other manifold left
/// alone is `CPhase(θ)` up to local Z rotations.
pub fn composite_cphase(theta: f64, mode: CompositeMode) -> Result<CompositeSequence, PulseError> {
    if !(0.0..=TWO_PI).contains(&theta) {
        return Err(PulseError::ThetaOutOfRange(theta));
    }
    let mut seq = CompositeSequence::new();
    for (phase, angle) in [(0.0, FRAC_PI_2), (FRAC_PI_2, theta), (PI, FRAC_PI_2)] {
        let p = match mode {
            CompositeMode::Instantaneous => Pulse::instantaneous(Channel::Electron, phase, angle, true),
            CompositeMode::Finite(w) => Pulse::finite(Channel::Electron, phase, angle, w),
        };
        seq.push_pulse(p)?;
    }
    Ok(seq)
}

/// Time-ordered propagator of `seq`. Constant segments of the secular model
/// are exponentiated exactly; the non-secular model integrates one
/// flip-flop period with fourth-order Magnus steps and raises it to the
/// number of whole periods.
pub fn propagator(sys: &TwoSpinSystem, seq: &CompositeSequence) -> Result<Unitary4, PulseError> {
    sys.validate()?;
    let h0 = sys.static_hamiltonian();
    let mut u = Unitary4::identity();
    let mut t = 0.0;
    for e in &seq.elements {
        let (h, tau) = match *e {
            SequenceElement::Pulse(p) => {
                p.validate()?;
                match p.rabi {
                    Rabi::Instantaneous => {
                        u = p.rotation() * u;
                        continue;
                    }
                    Rabi::Finite(w) => (h0 + p.drive(w), p.duration()),
                }
            }
            SequenceElement::Delay(d) => (h0, d),
        };
        let step = if sys.secular { expm_hermitian(&h, tau) } else { periodic_segment(sys, &h, t, tau) };
        u = step * u;
        t += tau;
    }
    let err = unitarity_error(&u);
    if err > UNITARITY_TOL {
        return Err(PulseError::NotUnitary(err));
    }
    Ok(u)
}

/// `diag(1, 1, 1, e^{iθ})`.
pub fn cphase_matrix(theta: f64) -> Unitary4 {
    let mut m = Unitary4::identity();
    m[(3, 3)] = Complex64::from_polar(1.0, theta);
    m
}

/// Frobenius norm of `U†U - I`.
pub fn unitarity_error(u: &Unitary4) -> f64 {
    (u.adjoint() * u - Unitary4::identity()).norm()
}

/// `max |Tr[(Ze(φe) ⊗ Zn(φn) CPhase(θ))† U]| / 4` over the local phases.
///
/// Only the diagonal of `U` enters. The optimum over `φn` is explicit
/// (moduli of the two nuclear-conditioned partial sums add), leaving a
/// one-dimensional maximization over `φe`, done by a grid scan followed by
/// golden-section refinement.
pub fn gate_fidelity(u: &Unitary4, theta: f64) -> Result<f64, PulseError> {
    let err = unitarity_error(u);
    if err > 1e-8 {
        return Err(PulseError::NotUnitary(err));
    }
    let (a, b, cc) = (u[(0, 0)], u[(1, 1)], u[(2, 2)]);
    let d = u[(3, 3)] * Complex64::from_polar(1.0, -theta);
    let g = |phi: f64| {
        let z = Complex64::from_polar(1.0, -phi);
        (a + cc * z).norm() + (b + d * z).norm()
    };
    const GRID: usize = 720;
    let h = TWO_PI / GRID as f64;
    let best = (0..GRID)
        .map(|k| k as f64 * h)
        .max_by(|x, y| g(*x).total_cmp(&g(*y)))
        .expect("non-empty grid");
    let (mut lo, mut hi) = (best - h, best + h);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = g(x1);
        }
    }
    Ok((f1.max(f2).max(g(best)) / 4.0).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    /// Angular Rabi frequency, `None` for the instantaneous limit.
    pub omega1: Option<f64>,
    pub fidelity: f64,
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelitySweep {
    pub rows: Vec<SweepRow>,
}

impl FidelitySweep {
    /// Header `theta,omega1_hz,fidelity,duration_s`; `omega1_hz` is `ω1/2π`,
    /// written `inf` for the instantaneous limit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,omega1_hz,fidelity,duration_s\n");
        for r in &self.rows {
            let w = match r.omega1 {
                // Rounded to µHz so that 2π-scaled grid values print cleanly.
                Some(w) => format!("{}", (w / TWO_PI * 1e6).round() / 1e6),
                None => "inf".to_string(),
            };
            let duration = (r.duration * 1e15).round() / 1e15;
            writeln!(out, "{},{},{},{}", r.theta, w, r.fidelity, duration).expect("writing to a String");
        }
        out
    }

    /// For each θ, whether fidelity never increases as ω1 grows over the
    /// finite grid points (the selectivity trend).
    pub fn selectivity_trend(&self) -> Vec<(f64, bool)> {
        let mut thetas: Vec<f64> = self.rows.iter().map(|r| r.theta).collect();
        thetas.dedup();
        thetas
            .into_iter()
            .map(|th| {
                let mut pts: Vec<(f64, f64)> = self
                    .rows
                    .iter()
                    .filter(|r| r.theta == th)
                    .filter_map(|r| r.omega1.map(|w| (w, r.fidelity)))
                    .collect();
                pts.sort_by(|x, y| x.0.total_cmp(&y.0));
                (th, pts.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12))
            })
            .collect()
    }
}

/// Fidelity and duration of `composite_cphase` over a grid; rows ordered by
/// θ, then by the ω1 grid as given (`None` = instantaneous).
pub fn fidelity_sweep(sys: &TwoSpinSystem, thetas: &[f64], omega1s: &[Option<f64>]) -> Result<FidelitySweep, PulseError> {
    if thetas.is_empty() || omega1s.is_empty() {
        return Err(PulseError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(thetas.len() * omega1s.len());
    for &theta in thetas {
        for &w in omega1s {
            let mode = match w {
                Some(w) => CompositeMode::Finite(w),
                None => CompositeMode::Instantaneous,
            };
            let seq = composite_cphase(theta, mode)?;
            let u = propagator(sys, &seq)?;
            rows.push(SweepRow { theta, omega1: w, fidelity: gate_fidelity(&u, theta)?, duration: seq.duration() });
        }
    }
    Ok(FidelitySweep { rows })
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn half_pauli_z() -> Matrix2<Complex64> {
    Matrix2::new(c(0.5), ZERO, ZERO, c(-0.5))
}

/// `cos φ X + sin φ Y`.
fn axis(phi: f64) -> Matrix2<Complex64> {
    Matrix2::new(ZERO, Complex64::from_polar(1.0, -phi), Complex64::from_polar(1.0, phi), ZERO)
}

/// `exp(-i angle (cos φ X + sin φ Y) / 2)`.
fn rotation2(phi: f64, angle: f64) -> Matrix2<Complex64> {
    let (s, co) = (angle / 2.0).sin_cos();
    Matrix2::identity() * c(co) - axis(phi) * Complex64::new(0.0, s)
}

fn electron(m: &Matrix2<Complex64>) -> Unitary4 {
    m.kronecker(&Matrix2::identity())
}

fn nuclear(m: &Matrix2<Complex64>) -> Unitary4 {
    Matrix2::identity().kronecker(m)
}

/// `r` on one spin when the other is up, identity otherwise.
fn controlled(r: &Matrix2<Complex64>, on_nucleus: bool) -> Unitary4 {
    let mut u = Unitary4::identity();
    for i in 0..2 {
        for j in 0..2 {
            // Control up = bit 0 of the other spin.
            let (ri, rj) = if on_nucleus { (i, j) } else { (2 * i, 2 * j) };
            u[(ri, rj)] = r[(i, j)];
        }
    }
    u
}

/// `exp(-i H t)` for Hermitian `h`.
fn expm_hermitian(h: &Unitary4, t: f64) -> Unitary4 {
    let herm = (h + h.adjoint()) * c(0.5);
    let eig = herm.symmetric_eigen();
    let v = eig.eigenvectors;
    let phases = Unitary4::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * t)));
    &v * phases * v.adjoint()
}

/// Propagator over `[t0, t0 + tau]` of `h + V e^{iΩt} + V† e^{-iΩt}`.
fn periodic_segment(sys: &TwoSpinSystem, h: &Unitary4, t0: f64, tau: f64) -> Unitary4 {
    let omega = sys.electron_zeeman;
    let period = TWO_PI / omega;
    let whole = (tau / period).floor();
    let rem = tau - whole * period;
    let v = sys.flip_flop();
    let h_at = |t: f64| {
        let e = Complex64::from_polar(1.0, omega * t);
        h + v * e + v.adjoint() * e.conj()
    };
    let magnus = |from: f64, to: f64| {
        let n = ((to - from) / period * STEPS_PER_PERIOD as f64).ceil().max(1.0) as usize;
        let dt = (to - from) / n as f64;
        let off = 3f64.sqrt() / 6.0;
        let mut u = Unitary4::identity();
        for k in 0..n {
            let t = from + k as f64 * dt;
            let (h1, h2) = (h_at(t + dt * (0.5 - off)), h_at(t + dt * (0.5 + off)));
            let comm = h2 * h1 - h1 * h2;
            let k_eff = (h1 + h2) * c(dt / 2.0) - comm * Complex64::new(0.0, 3f64.sqrt() / 12.0 * dt * dt);
            u = expm_hermitian(&k_eff, 1.0) * u;
        }
        u
    };
    let head = if rem > 0.0 { magnus(t0, t0 + rem) } else { Unitary4::identity() };
    if whole == 0.0 {
        return head;
    }
    let tail = magnus(t0 + rem, t0 + period);
    let one_period = nearest_unitary(&(tail * head));
    head * matrix_power(one_period, whole as u64)
}

/// Polar factor of `m`; removes rounding drift before raising to a large power.
fn nearest_unitary(m: &Unitary4) -> Unitary4 {
    let svd = m.svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

fn matrix_power(mut base: Unitary4, mut e: u64) -> Unitary4 {
    let mut acc = Unitary4::identity();
    while e > 0 {
        if e & 1 == 1 {
            acc = nearest_unitary(&(acc * base));
        }
        base = nearest_unitary(&(base * base));
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Unitary4, b: &Unitary4, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn empty_sequence_is_identity() {
        let u = propagator(&TwoSpinSystem { electron_offset: 0.0, ..TwoSpinSystem::default() }, &CompositeSequence::new()).unwrap();
        assert!(close(&u, &Unitary4::identity(), 1e-15));
    }

    #[test]
    fn hard_pi_pulse_is_x_on_electron() {
        let mut s = CompositeSequence::new();
        s.push_pulse(Pulse::instantaneous(Channel::Electron, 0.0, PI, false)).unwrap();
        let u = propagator(&TwoSpinSystem::default(), &s).unwrap();
        let x = Matrix2::new(ZERO, ONE, ONE, ZERO);
        assert!(close(&u, &(electron(&x) * Complex64::new(0.0, -1.0)), 1e-12));
    }

    #[test]
    fn instantaneous_composite_is_conditional_rz() {
        for theta in [0.0, FRAC_PI_2, PI, 2.5] {
            let u = propagator(&TwoSpinSystem::default(), &composite_cphase(theta, CompositeMode::Instantaneous).unwrap()).unwrap();
            // Rz(-θ) on the electron when the nucleus is up.
            let mut expect = Unitary4::identity();
            expect[(0, 0)] = Complex64::from_polar(1.0, theta / 2.0);
            expect[(2, 2)] = Complex64::from_polar(1.0, -theta / 2.0);
            assert!(close(&u, &expect, 1e-12), "theta {theta}");
            assert!((gate_fidelity(&u, theta).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_gate_duration() {
        let seq = composite_cphase(PI, CompositeMode::Finite(DEFAULT_RABI)).unwrap();
        assert!((seq.duration() - 40e-9).abs() < 1e-18);
        let u = propagator(&TwoSpinSystem::default(), &seq).unwrap();
        let f = gate_fidelity(&u, PI).unwrap();
        assert!(f < 1.0 && f > 0.5);
    }

    #[test]
    fn fidelity_rejects_non_unitary() {
        assert!(gate_fidelity(&(Unitary4::identity() * c(2.0)), 0.0).is_err());
    }

    #[test]
    fn wrong_gate_scores_below_one() {
        assert!(gate_fidelity(&Unitary4::identity(), PI).unwrap() < 0.75);
    }

    #[test]
    fn sweep_csv_shape() {
        let s = fidelity_sweep(&TwoSpinSystem::default(), &[PI], &[None, Some(DEFAULT_RABI)]).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theta,omega1_hz,fidelity,duration_s");
        assert!(lines[1].starts_with(&format!("{},inf,1,0", PI)) || lines[1].contains(",inf,0.99999999"));
        assert_eq!(lines.len(), 3);
        assert!(lines[2].contains(",25000000,"), "{csv}");
        assert!(fidelity_sweep(&TwoSpinSystem::default(), &[], &[None]).is_err());
    }
}
