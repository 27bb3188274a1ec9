use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reupload::bench::StudentSpec;
use reupload::spectrum::generic_parameters;
use reupload::trainer::TrainConfig;
use reupload::{Architecture, Entanglement, ObservableSpec, ParameterSet, Result};
use serde::{Deserialize, Serialize};

/// Where circuit parameters come from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParameterSource {
    Zeros,
    /// Every scalar uniform in `[−π/2, π/2]`.
    #[default]
    Random,
    /// `α, β` away from multiples of π/4, canonical integer `ω`.
    Generic,
    /// Flat layout `ω_1 … ω_n, β, α` per slot, layer-major.
    Explicit { flat: Vec<f64> },
}

impl ParameterSource {
    pub fn realize(&self, arch: &Architecture, seed: u64) -> Result<ParameterSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Self::Zeros => Ok(ParameterSet::zeros(arch)),
            Self::Random => Ok(ParameterSet::random_default(arch, &mut rng)),
            Self::Generic => Ok(generic_parameters(arch, &mut rng)),
            Self::Explicit { flat } => ParameterSet::from_flat(arch, flat),
        }
    }
}

fn default_resolution() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub architecture: Architecture,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default)]
    pub parameters: ParameterSource,
    /// Points per axis of the uniform grid over `[0,1]^n`, ignored when `points` is set.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub seed: u64,
}

fn generic() -> ParameterSource {
    ParameterSource::Generic
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub architecture: Architecture,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default = "generic")]
    pub parameters: ParameterSource,
    /// DFT samples per input coordinate; the minimum that resolves every harmonic if absent.
    #[serde(default)]
    pub samples_per_dim: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    pub architecture: Architecture,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    /// CSV with header `x1,…,xn,f`; `--data` takes precedence.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherConfig {
    pub architecture: Architecture,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    pub realizations: usize,
    #[serde(default)]
    pub normalize: bool,
}

/// Students `(L, Q)` for every listed depth and entanglement, with the teacher's `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudentSweep {
    pub layers: Vec<usize>,
    pub qubits: usize,
    pub entanglement: Vec<Entanglement>,
}

/// `Γ` table over `L × Q` for every listed entanglement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSweep {
    pub layers: Vec<usize>,
    pub qubits: Vec<usize>,
    pub inputs: usize,
    pub entanglement: Vec<Entanglement>,
}

fn default_samples() -> usize {
    400
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub teacher: Option<TeacherConfig>,
    #[serde(default)]
    pub students: Vec<StudentSpec>,
    #[serde(default)]
    pub student_sweep: Option<StudentSweep>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub gamma_sweep: Option<GammaSweep>,
    /// Emit the first teacher realization as a prediction map at this resolution.
    #[serde(default)]
    pub map_resolution: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl BenchmarkConfig {
    pub fn all_students(&self, inputs: usize) -> Vec<StudentSpec> {
        let mut out = self.students.clone();
        if let Some(sw) = &self.student_sweep {
            for &e in &sw.entanglement {
                for &l in &sw.layers {
                    let arch = Architecture::non_entangling(l, sw.qubits, inputs).with_entanglement(e);
                    out.push(StudentSpec::new(arch));
                }
            }
        }
        out
    }
}
