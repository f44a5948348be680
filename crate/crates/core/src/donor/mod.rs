//! The donor-lattice machine model: sites with nuclear spins, mobile
//! electrons, dead pixels, and scripts of global operations.
//!
//! Site `(i, j)` has id `j * lx + i` (x fastest). Output graphs use site ids
//! as vertex ids and contain every site; dead sites stay isolated.

mod frame;
mod run;

pub use frame::PauliFrame;
pub use run::{run_protocol, run_protocol_with, Backend, ElectronMeasurement, NoiseHook, Noiseless, ProtocolRun};

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphError;
use crate::pauli::{Basis, StabilizerError};
use crate::statevector::DenseError;

#[derive(Debug, Error)]
pub enum DonorError {
    #[error("lattice dimensions must be at least 1x1, got {lx}x{ly}")]
    InvalidSize { lx: usize, ly: usize },
    #[error("dead site ({0}, {1}) lies outside the lattice")]
    DeadOutOfBounds(usize, usize),
    #[error("two electrons shuttled onto site ({0}, {1})")]
    ShuttleCollision(usize, usize),
    #[error("statevector backend needs {needed} qubits, cap is {max}")]
    BackendCap { needed: usize, max: usize },
    #[error("electrons are still entangled with the nuclei at the end of the protocol")]
    ElectronsEntangled,
    #[error("steps do not match a canonical protocol script")]
    UnknownProtocol,
    #[error("polarization {0} outside (0, 1]")]
    InvalidPolarization(f64),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Electron,
    Nuclear,
    Both,
}

impl Species {
    pub fn includes_electrons(self) -> bool {
        matches!(self, Species::Electron | Species::Both)
    }

    pub fn includes_nuclei(self) -> bool {
        matches!(self, Species::Nuclear | Species::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+x")]
    PlusX,
    #[serde(rename = "-x")]
    MinusX,
    #[serde(rename = "+y")]
    PlusY,
    #[serde(rename = "-y")]
    MinusY,
}

impl Direction {
    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::PlusX => (1, 0),
            Direction::MinusX => (-1, 0),
            Direction::PlusY => (0, 1),
            Direction::MinusY => (0, -1),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::PlusX | Direction::MinusX)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::PlusX => "+x",
            Direction::MinusX => "-x",
            Direction::PlusY => "+y",
            Direction::MinusY => "-y",
        })
    }
}

/// One global operation applied to the whole lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolStep {
    /// Initialize the species to `|0⟩` (cooling or reload) and apply a global π/2 pulse.
    PrepareAllPlus(Species),
    /// CZ on every co-located electron/nucleus pair.
    GlobalCPhase,
    /// Move every electron one site.
    Shuttle(Direction),
    MeasureElectrons(Basis),
    /// Global pulse returning just-measured electrons to `|+⟩`.
    ReprepareElectronsPlus,
}

/// The two canonical scripts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Standard,
    Square,
}

impl ProtocolKind {
    pub fn steps(self) -> Vec<ProtocolStep> {
        match self {
            ProtocolKind::Standard => standard_protocol(),
            ProtocolKind::Square => square_lattice_protocol(),
        }
    }

    pub fn from_steps(steps: &[ProtocolStep]) -> Result<ProtocolKind, DonorError> {
        [ProtocolKind::Standard, ProtocolKind::Square]
            .into_iter()
            .find(|k| k.steps() == steps)
            .ok_or(DonorError::UnknownProtocol)
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Standard => "standard",
            ProtocolKind::Square => "square",
        }
    }
}

/// Triangle-union cluster: three CZ rounds separated by orthogonal shuttles,
/// then a Y measurement of every electron.
pub fn standard_protocol() -> Vec<ProtocolStep> {
    use ProtocolStep::*;
    vec![
        PrepareAllPlus(Species::Both),
        GlobalCPhase,
        Shuttle(Direction::PlusX),
        GlobalCPhase,
        Shuttle(Direction::PlusY),
        GlobalCPhase,
        MeasureElectrons(Basis::Y),
    ]
}

/// Square-lattice variant: an extra Y measurement, re-preparation and CZ
/// before the second shuttle.
pub fn square_lattice_protocol() -> Vec<ProtocolStep> {
    use ProtocolStep::*;
    vec![
        PrepareAllPlus(Species::Both),
        GlobalCPhase,
        Shuttle(Direction::PlusX),
        GlobalCPhase,
        MeasureElectrons(Basis::Y),
        ReprepareElectronsPlus,
        GlobalCPhase,
        Shuttle(Direction::PlusY),
        GlobalCPhase,
        MeasureElectrons(Basis::Y),
    ]
}

/// A lattice site as seen at the start of a protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DonorSite {
    pub coords: (usize, usize),
    /// Register index of the nuclear qubit (`None` for a dead site).
    pub nuclear_qubit: Option<usize>,
    /// Register index of the electron initially bound here.
    pub electron: Option<usize>,
    pub dead: bool,
}

/// Open-boundary `lx × ly` array of donor sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DonorLattice {
    lx: usize,
    ly: usize,
    dead: BTreeSet<(usize, usize)>,
    #[serde(default = "electrons_default")]
    electrons: bool,
}

fn electrons_default() -> bool {
    true
}

impl DonorLattice {
    pub fn new(lx: usize, ly: usize) -> Result<Self, DonorError> {
        if lx == 0 || ly == 0 {
            return Err(DonorError::InvalidSize { lx, ly });
        }
        Ok(Self { lx, ly, dead: BTreeSet::new(), electrons: true })
    }

    pub fn with_dead(lx: usize, ly: usize, dead: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, DonorError> {
        let mut l = Self::new(lx, ly)?;
        for (i, j) in dead {
            l.mark_dead(i, j)?;
        }
        Ok(l)
    }

    pub fn mark_dead(&mut self, i: usize, j: usize) -> Result<(), DonorError> {
        if i >= self.lx || j >= self.ly {
            return Err(DonorError::DeadOutOfBounds(i, j));
        }
        self.dead.insert((i, j));
        Ok(())
    }

    /// Marks each site dead independently with probability `p`.
    pub fn random_dead<R: Rng + ?Sized>(lx: usize, ly: usize, p: f64, rng: &mut R) -> Result<Self, DonorError> {
        let mut l = Self::new(lx, ly)?;
        for j in 0..ly {
            for i in 0..lx {
                if rng.random::<f64>() < p {
                    l.dead.insert((i, j));
                }
            }
        }
        Ok(l)
    }

    /// Same lattice with or without donor-bound electrons.
    pub fn with_electrons(mut self, on: bool) -> Self {
        self.electrons = on;
        self
    }

    pub fn has_electrons(&self) -> bool {
        self.electrons
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn num_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn dead_sites(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dead.iter().copied()
    }

    pub fn site_id(&self, i: usize, j: usize) -> usize {
        j * self.lx + i
    }

    pub fn coords(&self, id: usize) -> (usize, usize) {
        (id % self.lx, id / self.lx)
    }

    pub fn in_bounds(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.lx && (j as usize) < self.ly
    }

    pub fn is_dead(&self, i: usize, j: usize) -> bool {
        self.dead.contains(&(i, j))
    }

    /// In bounds and not dead.
    pub fn is_live(&self, i: isize, j: isize) -> bool {
        self.in_bounds(i, j) && !self.is_dead(i as usize, j as usize)
    }

    /// Site ids of live sites, row-major.
    pub fn live_sites(&self) -> Vec<usize> {
        (0..self.num_sites())
            .filter(|&s| {
                let (i, j) = self.coords(s);
                !self.is_dead(i, j)
            })
            .collect()
    }

    pub fn live_count(&self) -> usize {
        self.num_sites() - self.dead.len()
    }

    /// Register size: one nuclear and (if present) one electron qubit per live site.
    pub fn total_qubits(&self) -> usize {
        if self.electrons {
            2 * self.live_count()
        } else {
            self.live_count()
        }
    }

    /// Initial site table with register indices: live nuclei first
    /// (row-major), then their electrons in the same order.
    pub fn sites(&self) -> Vec<DonorSite> {
        let n_live = self.live_count();
        let mut k = 0;
        (0..self.num_sites())
            .map(|s| {
                let coords = self.coords(s);
                let dead = self.is_dead(coords.0, coords.1);
                let site = DonorSite {
                    coords,
                    nuclear_qubit: (!dead).then_some(k),
                    electron: (!dead && self.electrons).then_some(n_live + k),
                    dead,
                };
                if !dead {
                    k += 1;
                }
                site
            })
            .collect()
    }
}

/// Adjacency the canonical scripts should produce, as sorted site-id pairs.
///
/// An electron that leaves the lattice or lands on a dead site is measured
/// out in Z, which returns no edges; every surviving electron's final Y
/// measurement complements its nuclear neighborhood. Coinciding edges cancel.
pub fn predicted_edge_set(lattice: &DonorLattice, kind: ProtocolKind) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    if !lattice.has_electrons() {
        return Vec::new();
    }
    let mut toggle = |a: usize, b: usize| {
        let e = (a.min(b), a.max(b));
        if !edges.remove(&e) {
            edges.insert(e);
        }
    };
    let live = |i: usize, j: usize| lattice.is_live(i as isize, j as isize);
    let id = |i: usize, j: usize| lattice.site_id(i, j);
    for j in 0..lattice.ly() {
        for i in 0..lattice.lx() {
            if !live(i, j) || !live(i + 1, j) {
                continue;
            }
            match kind {
                ProtocolKind::Standard => {
                    if live(i + 1, j + 1) {
                        let tri = [id(i, j), id(i + 1, j), id(i + 1, j + 1)];
                        toggle(tri[0], tri[1]);
                        toggle(tri[1], tri[2]);
                        toggle(tri[0], tri[2]);
                    }
                }
                ProtocolKind::Square => {
                    toggle(id(i, j), id(i + 1, j));
                    if live(i + 1, j + 1) {
                        toggle(id(i + 1, j), id(i + 1, j + 1));
                    }
                }
            }
        }
    }
    edges.into_iter().collect()
}

/// `predicted_edge_set` for an explicit script, which must be canonical.
pub fn predicted_edge_set_for(lattice: &DonorLattice, steps: &[ProtocolStep]) -> Result<Vec<(usize, usize)>, DonorError> {
    Ok(predicted_edge_set(lattice, ProtocolKind::from_steps(steps)?))
}

/// Initialization errors from imperfect polarization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitializationReport {
    pub electron_flip_probability: f64,
    pub nuclear_flip_probability: f64,
    /// Sites whose electron starts flipped.
    pub electron_flips: Vec<usize>,
    /// Sites whose nucleus starts flipped.
    pub nuclear_flips: Vec<usize>,
}

/// Probability that a spin starts in the wrong state at polarization `p`.
pub fn flip_probability(polarization: f64) -> Result<f64, DonorError> {
    if !(polarization > 0.0 && polarization <= 1.0) {
        return Err(DonorError::InvalidPolarization(polarization));
    }
    Ok((1.0 - polarization) / 2.0)
}

/// Samples which live spins start flipped after SWAP cooling, before the
/// global π/2 pulses turn `|0⟩` into `|+⟩` (a flip there becomes a Z error).
pub fn cool_and_prepare<R: Rng + ?Sized>(
    lattice: &DonorLattice,
    electron_polarization: f64,
    nuclear_polarization: f64,
    rng: &mut R,
) -> Result<InitializationReport, DonorError> {
    let pe = flip_probability(electron_polarization)?;
    let pn = flip_probability(nuclear_polarization)?;
    let mut report = InitializationReport {
        electron_flip_probability: pe,
        nuclear_flip_probability: pn,
        electron_flips: Vec::new(),
        nuclear_flips: Vec::new(),
    };
    for s in lattice.live_sites() {
        if pn > 0.0 && rng.random::<f64>() < pn {
            report.nuclear_flips.push(s);
        }
        if pe > 0.0 && rng.random::<f64>() < pe {
            report.electron_flips.push(s);
        }
    }
    Ok(report)
}
