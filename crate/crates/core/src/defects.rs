//! Error and resource models: dead pixels, initialization, shuttle and
//! measurement noise, nuclear decoherence, preparation time and the
//! coherence figure of merit.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::donor::{
    predicted_edge_set, run_protocol_with, Backend, DonorError, DonorLattice, NoiseHook, ProtocolKind, ProtocolRun,
    ProtocolStep, Species,
};
use crate::graph::GraphState;
use crate::mbqc::carve_wire;
use crate::rng::{SeedStream, SimRng};

#[derive(Debug, Error)]
pub enum DefectError {
    #[error("{name} must be a probability in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("qubit count must be at least 1")]
    EmptyDevice,
    #[error("noise injection runs on the stabilizer backend only")]
    Backend,
    #[error(transparent)]
    Donor(#[from] DonorError),
}

/// Fabrication defects and error rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectModel {
    /// Dead sites `[i, j]`, added to whatever the lattice already has.
    pub dead: Vec<[usize; 2]>,
    /// Extra sites killed independently with this probability.
    pub dead_fraction: f64,
    /// Reported electron outcome inverted.
    pub meas_flip: f64,
    /// Z on a moving electron, per hop.
    pub shuttle_dephasing: f64,
    pub init_flip_electron: f64,
    pub init_flip_nuclear: f64,
    /// Nuclear coherence time, s; infinite switches decoherence off.
    pub t2n: f64,
    /// Electron relaxation time, s; only used for reset-wait accounting.
    pub t1e: Option<f64>,
}

impl Default for DefectModel {
    fn default() -> Self {
        Self {
            dead: Vec::new(),
            dead_fraction: 0.0,
            meas_flip: 0.0,
            shuttle_dephasing: 0.0,
            init_flip_electron: 0.0,
            init_flip_nuclear: 0.0,
            t2n: 2.5,
            t1e: None,
        }
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<(), DefectError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(DefectError::Probability { name, value });
    }
    Ok(())
}

fn check_positive(name: &'static str, value: f64) -> Result<(), DefectError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(DefectError::NonPositive { name, value });
    }
    Ok(())
}

impl DefectModel {
    pub fn validate(&self) -> Result<(), DefectError> {
        check_probability("dead_fraction", self.dead_fraction)?;
        check_probability("meas_flip", self.meas_flip)?;
        check_probability("shuttle_dephasing", self.shuttle_dephasing)?;
        check_probability("init_flip_electron", self.init_flip_electron)?;
        check_probability("init_flip_nuclear", self.init_flip_nuclear)?;
        if !(self.t2n > 0.0) {
            return Err(DefectError::NonPositive { name: "t2n", value: self.t2n });
        }
        if let Some(t) = self.t1e {
            check_positive("t1e", t)?;
        }
        Ok(())
    }

    /// `lattice` with the listed dead sites and, if `dead_fraction > 0`,
    /// random ones drawn from the `"dead"` substream.
    pub fn apply_to(&self, lattice: &DonorLattice, seeds: SeedStream) -> Result<DonorLattice, DefectError> {
        self.validate()?;
        let mut out = lattice.clone();
        for &[i, j] in &self.dead {
            out.mark_dead(i, j)?;
        }
        if self.dead_fraction > 0.0 {
            let mut rng = seeds.rng("dead");
            for j in 0..lattice.ly() {
                for i in 0..lattice.lx() {
                    if rng.random::<f64>() < self.dead_fraction {
                        out.mark_dead(i, j)?;
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    #[default]
    Sequential,
    Parallel,
}

impl TimingMode {
    pub fn name(self) -> &'static str {
        match self {
            TimingMode::Sequential => "sequential",
            TimingMode::Parallel => "parallel",
        }
    }
}

impl std::str::FromStr for TimingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(TimingMode::Sequential),
            "parallel" => Ok(TimingMode::Parallel),
            _ => Err(format!("unknown timing mode {s:?} (expected sequential or parallel)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingModel {
    /// Hz.
    pub shuttle_rate: f64,
    /// All three controlled-phase gates together, s.
    pub cphase_total: f64,
    /// Hz.
    pub meas_rate: f64,
    pub mode: TimingMode,
    pub parallel_shift_count: u32,
    /// Number of `T1e` waits added when electrons are reused.
    pub electron_reset_waits: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            shuttle_rate: 1e6,
            cphase_total: 1e-7,
            meas_rate: 4e4,
            mode: TimingMode::Sequential,
            parallel_shift_count: 2,
            electron_reset_waits: 0.0,
        }
    }
}

impl TimingModel {
    pub fn validate(&self) -> Result<(), DefectError> {
        check_positive("shuttle_rate", self.shuttle_rate)?;
        check_positive("meas_rate", self.meas_rate)?;
        if !(self.cphase_total.is_finite() && self.cphase_total >= 0.0) {
            return Err(DefectError::NonPositive { name: "cphase_total", value: self.cphase_total });
        }
        if !(self.electron_reset_waits.is_finite() && self.electron_reset_waits >= 0.0) {
            return Err(DefectError::NonPositive { name: "electron_reset_waits", value: self.electron_reset_waits });
        }
        Ok(())
    }

    pub fn with_mode(mut self, mode: TimingMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Cluster growth time for `n` qubits: `√n` shuttle steps in sequential
/// mode, `parallel_shift_count` in parallel mode, plus the gate time.
pub fn preparation_time(n: usize, tm: &TimingModel) -> Result<f64, DefectError> {
    tm.validate()?;
    if n == 0 {
        return Err(DefectError::EmptyDevice);
    }
    let shifts = match tm.mode {
        TimingMode::Sequential => (n as f64).sqrt(),
        TimingMode::Parallel => f64::from(tm.parallel_shift_count),
    };
    Ok(shifts / tm.shuttle_rate + tm.cphase_total)
}

/// [`preparation_time`] plus the electron reset waits.
pub fn total_preparation_time(n: usize, tm: &TimingModel, dm: &DefectModel) -> Result<f64, DefectError> {
    Ok(preparation_time(n, tm)? + tm.electron_reset_waits * dm.t1e.unwrap_or(0.0))
}

/// Coherence time over measurement time.
pub fn figure_of_merit(t2n: f64, meas_rate: f64) -> Result<f64, DefectError> {
    check_positive("t2n", t2n)?;
    check_positive("meas_rate", meas_rate)?;
    Ok(t2n * meas_rate)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub n: usize,
    pub mode: TimingMode,
    pub seconds: f64,
}

pub fn timing_table(ns: &[usize], modes: &[TimingMode], tm: &TimingModel) -> Result<Vec<TimingRow>, DefectError> {
    let mut rows = Vec::new();
    for &n in ns {
        for &mode in modes {
            let seconds = preparation_time(n, &tm.clone().with_mode(mode))?;
            rows.push(TimingRow { n, mode, seconds });
        }
    }
    Ok(rows)
}

/// `N,mode,seconds`, seconds with seven significant digits.
pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut out = String::from("N,mode,seconds\n");
    for r in rows {
        writeln!(out, "{},{},{:.6e}", r.n, r.mode.name(), r.seconds).expect("write to string");
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    InitElectron,
    InitNuclear,
    ShuttleDephasing,
    MeasurementFlip,
    NuclearDephasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InjectedError {
    pub kind: ErrorKind,
    /// Site id (origin site for electron errors).
    pub site: usize,
}

/// Pauli-twirl noise source for [`run_protocol_with`]. Every query draws
/// from its own generator, so measurement draws are unaffected by the rates.
pub struct NoiseInjector {
    dm: DefectModel,
    nuclear_p: f64,
    rng: SimRng,
    pub log: Vec<InjectedError>,
}

impl NoiseInjector {
    pub fn new(dm: &DefectModel, nuclear_p: f64, rng: SimRng) -> Self {
        Self { dm: dm.clone(), nuclear_p, rng, log: Vec::new() }
    }

    fn hit(&mut self, p: f64, kind: ErrorKind, site: usize) -> bool {
        let hit = self.rng.random::<f64>() < p;
        if hit {
            self.log.push(InjectedError { kind, site });
        }
        hit
    }
}

impl NoiseHook for NoiseInjector {
    fn initialization_flip(&mut self, species: Species, site: usize) -> bool {
        match species {
            Species::Electron => self.hit(self.dm.init_flip_electron, ErrorKind::InitElectron, site),
            _ => self.hit(self.dm.init_flip_nuclear, ErrorKind::InitNuclear, site),
        }
    }

    fn shuttle_dephasing(&mut self, origin: usize) -> bool {
        self.hit(self.dm.shuttle_dephasing, ErrorKind::ShuttleDephasing, origin)
    }

    fn report_flip(&mut self, origin: usize) -> bool {
        self.hit(self.dm.meas_flip, ErrorKind::MeasurementFlip, origin)
    }

    fn nuclear_dephasing(&mut self, site: usize) -> bool {
        self.hit(self.nuclear_p, ErrorKind::NuclearDephasing, site)
    }
}

#[derive(Clone, Debug)]
pub struct NoisyRun {
    pub run: ProtocolRun,
    pub errors: Vec<InjectedError>,
    /// Preparation time used for decoherence, s.
    pub elapsed: f64,
    /// `1 − exp(−elapsed / T2n)`.
    pub nuclear_error_probability: f64,
}

impl NoisyRun {
    pub fn count(&self, kind: ErrorKind) -> usize {
        self.errors.iter().filter(|e| e.kind == kind).count()
    }
}

/// Protocol run with errors injected. Measurement draws come from the
/// `"protocol"` substream and noise from `"noise"`, so a run with all rates
/// zero reproduces the noiseless run for the same seed.
pub fn inject_noise(
    lattice: &DonorLattice,
    steps: &[ProtocolStep],
    backend: Backend,
    dm: &DefectModel,
    tm: &TimingModel,
    seeds: SeedStream,
) -> Result<NoisyRun, DefectError> {
    if backend != Backend::Stabilizer {
        return Err(DefectError::Backend);
    }
    dm.validate()?;
    let elapsed = total_preparation_time(lattice.live_count().max(1), tm, dm)?;
    let nuclear_p = 1.0 - (-elapsed / dm.t2n).exp();
    let mut noise = NoiseInjector::new(dm, nuclear_p, seeds.rng("noise"));
    let run = run_protocol_with(lattice, steps, backend, &mut seeds.rng("protocol"), &mut noise)?;
    Ok(NoisyRun { run, errors: noise.log, elapsed, nuclear_error_probability: nuclear_p })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyReport {
    pub lx: usize,
    pub ly: usize,
    pub protocol: &'static str,
    pub sites: usize,
    pub dead: usize,
    /// Live sites left without any edge.
    pub orphaned: usize,
    /// `dead + orphaned`.
    pub lost: usize,
    pub largest_component: usize,
    pub carve_attempts: usize,
    pub carve_successes: usize,
    pub success_rate: f64,
    /// Mean path length (vertices) over successful carves.
    pub mean_path_length: f64,
}

/// Topology survey of the cluster the protocol would grow on `lattice`
/// (defects from `dm` applied): vertices lost, largest connected live
/// component, and how often a wire can be carved between random live pairs.
pub fn dead_pixel_survey(
    lattice: &DonorLattice,
    dm: &DefectModel,
    kind: ProtocolKind,
    seeds: SeedStream,
    pairs: usize,
) -> Result<SurveyReport, DefectError> {
    let lattice = dm.apply_to(lattice, seeds)?;
    let n = lattice.num_sites();
    let g = GraphState::from_edges(n, &predicted_edge_set(&lattice, kind)).expect("predicted edges are in range");
    let live = lattice.live_sites();
    let dead: BTreeSet<usize> = (0..n).filter(|s| !live.contains(s)).collect();
    let orphaned = live.iter().filter(|&&s| g.degree(s).expect("site") == 0).count();
    let largest_component = if live.is_empty() {
        0
    } else {
        g.connected_components().iter().filter(|c| !dead.contains(&c[0])).map(Vec::len).max().unwrap_or(0)
    };

    let mut rng = seeds.rng("survey");
    let (mut attempts, mut successes, mut total_len) = (0, 0, 0);
    if live.len() >= 2 {
        for _ in 0..pairs {
            let ia = rng.random_range(0..live.len());
            let mut ib = rng.random_range(0..live.len() - 1);
            if ib >= ia {
                ib += 1;
            }
            attempts += 1;
            if let Ok(w) = carve_wire(&g, live[ia], live[ib], &dead) {
                successes += 1;
                total_len += w.len();
            }
        }
    }
    Ok(SurveyReport {
        lx: lattice.lx(),
        ly: lattice.ly(),
        protocol: kind.name(),
        sites: n,
        dead: dead.len(),
        orphaned,
        lost: dead.len() + orphaned,
        largest_component,
        carve_attempts: attempts,
        carve_successes: successes,
        success_rate: if attempts == 0 { 0.0 } else { successes as f64 / attempts as f64 },
        mean_path_length: if successes == 0 { 0.0 } else { total_len as f64 / successes as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preparation_times() {
        let tm = TimingModel::default();
        let seq = preparation_time(10_000, &tm).unwrap();
        assert!((seq - 1.001e-4).abs() < 1e-15);
        let par = preparation_time(10_000, &tm.clone().with_mode(TimingMode::Parallel)).unwrap();
        assert!((par - 2.1e-6).abs() < 1e-18);
        assert!((preparation_time(1, &tm).unwrap() - 1.1e-6).abs() < 1e-18);
        assert!(matches!(preparation_time(0, &tm), Err(DefectError::EmptyDevice)));
        let ratio = (seq - tm.cphase_total) / (par - tm.cphase_total);
        assert!((ratio - 50.0).abs() < 1e-9);
    }

    #[test]
    fn figure_of_merit_values() {
        assert!((figure_of_merit(2.5, 4e4).unwrap() - 1e5).abs() < 1e-9);
        assert_eq!(figure_of_merit(1.0, 1.0).unwrap(), 1.0);
        assert!((figure_of_merit(2.0, 4e4).unwrap() - 8e4).abs() < 1e-9);
        assert!(figure_of_merit(0.0, 1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = timing_table(&[1, 10_000], &[TimingMode::Sequential, TimingMode::Parallel], &TimingModel::default()).unwrap();
        assert_eq!(
            timing_csv(&rows),
            "N,mode,seconds\n1,sequential,1.100000e-6\n1,parallel,2.100000e-6\n10000,sequential,1.001000e-4\n10000,parallel,2.100000e-6\n"
        );
    }

    #[test]
    fn model_validation() {
        let dm = DefectModel { meas_flip: 1.5, ..DefectModel::default() };
        assert!(matches!(dm.validate(), Err(DefectError::Probability { name: "meas_flip", .. })));
        let dm: Result<DefectModel, _> = serde_json::from_str(r#"{"t2n": 1.0, "bogus": 2}"#);
        assert!(dm.is_err());
        let tm = TimingModel { shuttle_rate: 0.0, ..TimingModel::default() };
        assert!(preparation_time(4, &tm).is_err());
    }

    #[test]
    fn reset_waits_add_t1e() {
        let tm = TimingModel { electron_reset_waits: 5.0, ..TimingModel::default() };
        let dm = DefectModel { t1e: Some(1e-3), ..DefectModel::default() };
        let t = total_preparation_time(1, &tm, &dm).unwrap();
        assert!((t - (1.1e-6 + 5e-3)).abs() < 1e-15);
    }
}
