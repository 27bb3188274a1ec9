//! Data re-uploading circuits: layers, entanglers, observables and the network output.
//!
//! A layer on one qubit is `R_x(2(ω·x + β)) · R_y(2α)` (standard) or
//! `R_x(2α) · R_y(2(ω·x + β))` (alternative), with the rotation matrices
//!
//! ```text
//! R_x(2φ) = [[cos φ, −i sin φ], [−i sin φ, cos φ]]
//! R_y(2α) = [[cos α, −sin α],  [sin α,  cos α]]
//! ```
//!
//! Circuits compose layers with later layers on the left, `U = 𝓛_L ⋯ 𝓛_1`,
//! and the output is read out on `U|0…0⟩`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{
    apply_pair_inplace, apply_single_inplace, conjugate_by, dagger, embed_single, kron,
    kron_all, matmul, pauli_combination, ComplexMatrix, Pauli, QuantumState, C64, I, ONE,
    UNITARY_TOL, ZERO,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    /// Data in the x-rotation, trainable angle in the y-rotation.
    #[default]
    Standard,
    /// Trainable angle in the x-rotation, data in the y-rotation.
    Alternative,
}

/// Where the fixed entangling gate is placed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    #[default]
    None,
    AllLayers,
    LastLayer,
}

/// Ordering of the nearest-neighbour gates inside one entangling block.
///
/// With `F_i = I^{⊗(i−1)} ⊗ E₂ ⊗ I^{⊗(Q−i−1)}`, `Descending` builds
/// `F_{Q−1} ⋯ F_1` (so `F_1` acts first) and `Ascending` builds `F_1 ⋯ F_{Q−1}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglerOrder {
    #[default]
    Descending,
    Ascending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    pub layers: usize,
    pub qubits: usize,
    pub inputs: usize,
    #[serde(default)]
    pub layer_kind: LayerKind,
    #[serde(default)]
    pub entanglement: Entanglement,
    #[serde(default)]
    pub entangler_order: EntanglerOrder,
}

impl Architecture {
    /// Non-entangling topology `𝒜₀(L, Q)` with the standard layer.
    pub fn non_entangling(layers: usize, qubits: usize, inputs: usize) -> Self {
        Self {
            layers,
            qubits,
            inputs,
            layer_kind: LayerKind::Standard,
            entanglement: Entanglement::None,
            entangler_order: EntanglerOrder::Descending,
        }
    }

    /// Entangling topology `𝒜₁(L, Q)`: entangler after every layer.
    pub fn entangling(layers: usize, qubits: usize, inputs: usize) -> Self {
        Self { entanglement: Entanglement::AllLayers, ..Self::non_entangling(layers, qubits, inputs) }
    }

    pub fn with_layer_kind(mut self, kind: LayerKind) -> Self {
        self.layer_kind = kind;
        self
    }

    pub fn with_entanglement(mut self, entanglement: Entanglement) -> Self {
        self.entanglement = entanglement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.qubits == 0 || self.inputs == 0 {
            return Err(Error::Architecture(format!(
                "layers, qubits and inputs must be positive (got L={}, Q={}, n={})",
                self.layers, self.qubits, self.inputs
            )));
        }
        if self.entanglement != Entanglement::None && self.qubits < 2 {
            return Err(Error::Architecture("entangling gates need at least two qubits".into()));
        }
        if self.qubits > 16 {
            return Err(Error::Architecture(format!("{} qubits exceeds the dense limit", self.qubits)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// Number of (layer, qubit) slots, `D = L·Q`.
    pub fn slots(&self) -> usize {
        self.layers * self.qubits
    }

    /// `N_p = L·Q·(n+2)`.
    pub fn num_params(&self) -> usize {
        self.slots() * (self.inputs + 2)
    }

    pub fn is_entangling(&self) -> bool {
        self.entanglement != Entanglement::None
    }

    /// Whether layer `layer` (0-based) is followed by the entangling block.
    pub fn entangles_after(&self, layer: usize) -> bool {
        match self.entanglement {
            Entanglement::None => false,
            Entanglement::AllLayers => true,
            Entanglement::LastLayer => layer + 1 == self.layers,
        }
    }

    /// `𝒜₀(L,Q)`, `𝒜₁(L,Q)` or `𝒜₁ˡᵃˢᵗ(L,Q)` in ASCII.
    pub fn label(&self) -> String {
        let tag = match self.entanglement {
            Entanglement::None => "A0",
            Entanglement::AllLayers => "A1",
            Entanglement::LastLayer => "A1last",
        };
        let star = if self.layer_kind == LayerKind::Alternative { "*" } else { "" };
        format!("{tag}{star}({},{})", self.layers, self.qubits)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Trainable parameters of one layer on one qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub omega: Vec<f64>,
    pub beta: f64,
    pub alpha: f64,
}

impl LayerParams {
    pub fn new(omega: Vec<f64>, beta: f64, alpha: f64) -> Self {
        Self { omega, beta, alpha }
    }

    pub fn zeros(inputs: usize) -> Self {
        Self { omega: vec![0.0; inputs], beta: 0.0, alpha: 0.0 }
    }

    /// `ω·x + β`.
    pub fn data_angle(&self, x: &[f64]) -> f64 {
        self.omega.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.beta
    }
}

/// All trainable parameters, stored layer-major: slot `d = l·Q + q` (0-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub layers: usize,
    pub qubits: usize,
    pub inputs: usize,
    pub slots: Vec<LayerParams>,
}

impl ParameterSet {
    pub fn zeros(arch: &Architecture) -> Self {
        Self {
            layers: arch.layers,
            qubits: arch.qubits,
            inputs: arch.inputs,
            slots: vec![LayerParams::zeros(arch.inputs); arch.slots()],
        }
    }

    /// Every scalar drawn uniformly from `[lo, hi]`.
    pub fn random<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R, lo: f64, hi: f64) -> Self {
        let flat: Vec<f64> = (0..arch.num_params()).map(|_| rng.random_range(lo..=hi)).collect();
        Self::from_flat(arch, &flat).expect("length matches by construction")
    }

    /// Every scalar uniform in `[−π/2, π/2]`.
    pub fn random_default<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Self {
        use std::f64::consts::FRAC_PI_2;
        Self::random(arch, rng, -FRAC_PI_2, FRAC_PI_2)
    }

    pub fn get(&self, layer: usize, qubit: usize) -> &LayerParams {
        &self.slots[layer * self.qubits + qubit]
    }

    pub fn get_mut(&mut self, layer: usize, qubit: usize) -> &mut LayerParams {
        &mut self.slots[layer * self.qubits + qubit]
    }

    pub fn len(&self) -> usize {
        self.slots.len() * (self.inputs + 2)
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Flat layout per slot: `ω_1 … ω_n, β, α`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for p in &self.slots {
            out.extend_from_slice(&p.omega);
            out.push(p.beta);
            out.push(p.alpha);
        }
        out
    }

    pub fn from_flat(arch: &Architecture, flat: &[f64]) -> Result<Self> {
        if flat.len() != arch.num_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters for {}, got {}",
                arch.num_params(),
                arch,
                flat.len()
            )));
        }
        let stride = arch.inputs + 2;
        let slots = flat
            .chunks_exact(stride)
            .map(|c| LayerParams::new(c[..arch.inputs].to_vec(), c[arch.inputs], c[arch.inputs + 1]))
            .collect();
        Ok(Self { layers: arch.layers, qubits: arch.qubits, inputs: arch.inputs, slots })
    }

    pub fn check(&self, arch: &Architecture) -> Result<()> {
        if self.layers != arch.layers
            || self.qubits != arch.qubits
            || self.inputs != arch.inputs
            || self.slots.len() != arch.slots()
            || self.slots.iter().any(|p| p.omega.len() != arch.inputs)
        {
            return Err(Error::Shape(format!(
                "parameter set (L={}, Q={}, n={}) does not fit {} with n={}",
                self.layers, self.qubits, self.inputs, arch, arch.inputs
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// `R_x(2φ)` or `R_y(2φ)` from the half angle `φ`.
pub fn build_rotation(axis: Axis, half_angle: f64) -> ComplexMatrix {
    let (s, c) = half_angle.sin_cos();
    match axis {
        Axis::X => ComplexMatrix::two_by_two(
            C64::new(c, 0.0),
            C64::new(0.0, -s),
            C64::new(0.0, -s),
            C64::new(c, 0.0),
        ),
        Axis::Y => ComplexMatrix::two_by_two(
            C64::new(c, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
            C64::new(c, 0.0),
        ),
    }
}

#[inline]
fn rotation_entries(axis: Axis, half_angle: f64) -> [C64; 4] {
    let (s, c) = half_angle.sin_cos();
    match axis {
        Axis::X => [C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
        Axis::Y => [C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
    }
}

fn check_inputs(p: &LayerParams, x: &[f64]) -> Result<()> {
    if p.omega.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: p.omega.len(), found: x.len() });
    }
    Ok(())
}

/// Single-qubit layer unitary.
pub fn build_layer(p: &LayerParams, x: &[f64], kind: LayerKind) -> Result<ComplexMatrix> {
    check_inputs(p, x)?;
    let phi = p.data_angle(x);
    Ok(match kind {
        LayerKind::Standard => matmul(&build_rotation(Axis::X, phi), &build_rotation(Axis::Y, p.alpha)),
        LayerKind::Alternative => {
            matmul(&build_rotation(Axis::X, p.alpha), &build_rotation(Axis::Y, phi))
        }
    })
}

/// Splits a layer into `T⁺ e^{iω·x} + T⁻ e^{−iω·x}` and returns `(T⁺, T⁻)`.
///
/// Standard kind, with `t^± = cos α ± sin α`:
///
/// ```text
/// T⁺ = ½ [[t⁻, −t⁺], [−t⁻, t⁺]] e^{iβ}      T⁻ = ½ [[t⁺, t⁻], [t⁺, t⁻]] e^{−iβ}
/// ```
///
/// Alternative kind: `R_y(2φ) = ½(I − σy)e^{iφ} + ½(I + σy)e^{−iφ}`, so
/// `T⁺ = R_x(2α)·½(I − σy)·e^{iβ}` and `T⁻ = R_x(2α)·½(I + σy)·e^{−iβ}`.
pub fn harmonic_parts(p: &LayerParams, kind: LayerKind) -> (ComplexMatrix, ComplexMatrix) {
    let plus_phase = C64::from_polar(1.0, p.beta);
    let minus_phase = plus_phase.conj();
    match kind {
        LayerKind::Standard => {
            let (s, c) = p.alpha.sin_cos();
            let tp = C64::new(0.5 * (c + s), 0.0);
            let tm = C64::new(0.5 * (c - s), 0.0);
            let plus = ComplexMatrix::two_by_two(tm, -tp, -tm, tp).scale(plus_phase);
            let minus = ComplexMatrix::two_by_two(tp, tm, tp, tm).scale(minus_phase);
            (plus, minus)
        }
        LayerKind::Alternative => {
            let rx = build_rotation(Axis::X, p.alpha);
            let half = C64::new(0.5, 0.0);
            // ½(I − σy) and ½(I + σy)
            let down = ComplexMatrix::two_by_two(half, half * I, -half * I, half);
            let up = ComplexMatrix::two_by_two(half, -half * I, half * I, half);
            (matmul(&rx, &down).scale(plus_phase), matmul(&rx, &up).scale(minus_phase))
        }
    }
}

/// `Ê₂ = (I⊗I + i σx⊗σy)/√2`.
pub fn two_qubit_entangler() -> ComplexMatrix {
    let xy = kron(&Pauli::X.matrix(), &Pauli::Y.matrix());
    let sum = &ComplexMatrix::identity(4) + &xy.scale(I);
    sum.scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
}

fn entangler_factor(i: usize, qubits: usize) -> ComplexMatrix {
    let left = ComplexMatrix::identity(1 << (i - 1));
    let right = ComplexMatrix::identity(1 << (qubits - i - 1));
    kron_all([&left, &two_qubit_entangler(), &right])
}

/// Entangling block `Ê^l` for `qubits ≥ 2`, default factor order.
pub fn build_entangler(qubits: usize) -> Result<ComplexMatrix> {
    build_entangler_ordered(qubits, EntanglerOrder::Descending)
}

pub fn build_entangler_ordered(qubits: usize, order: EntanglerOrder) -> Result<ComplexMatrix> {
    if qubits < 2 {
        return Err(Error::Architecture(format!("entangler needs Q ≥ 2, got {qubits}")));
    }
    let mut e = ComplexMatrix::identity(1 << qubits);
    for i in 1..qubits {
        let f = entangler_factor(i, qubits);
        e = match order {
            // F_i lands on the left: F_{Q−1} ⋯ F_1
            EntanglerOrder::Descending => matmul(&f, &e),
            EntanglerOrder::Ascending => matmul(&e, &f),
        };
    }
    Ok(e)
}

/// Dense unitary of the whole circuit at input `x`.
pub fn build_circuit(arch: &Architecture, theta: &ParameterSet, x: &[f64]) -> Result<ComplexMatrix> {
    arch.validate()?;
    theta.check(arch)?;
    if x.len() != arch.inputs {
        return Err(Error::DimensionMismatch { expected: arch.inputs, found: x.len() });
    }
    let entangler = if arch.is_entangling() {
        Some(build_entangler_ordered(arch.qubits, arch.entangler_order)?)
    } else {
        None
    };
    let mut u = ComplexMatrix::identity(arch.dim());
    for l in 0..arch.layers {
        let layers: Vec<ComplexMatrix> = (0..arch.qubits)
            .rev()
            .map(|q| build_layer(theta.get(l, q), x, arch.layer_kind))
            .collect::<Result<_>>()?;
        let mut step = kron_all(&layers);
        if arch.entangles_after(l) {
            step = matmul(entangler.as_ref().expect("entangler built"), &step);
        }
        u = matmul(&step, &u);
    }
    Ok(u)
}

/// How per-qubit operators are combined into the readout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Sum,
    Product,
}

/// Readout description; per-qubit lists are indexed from qubit 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    /// `Σ_q 𝓜_q`, each lifted by identities.
    LocalSum { paulis: Vec<Pauli> },
    /// `⊗_q 𝓜_q`.
    TensorProduct { paulis: Vec<Pauli> },
    /// Per-qubit `O_q = u_o I + u_x σx + u_y σy + u_z σz`, summed or multiplied.
    GeneralPerQubit { combine: Combine, coefficients: Vec<[f64; 4]> },
}

impl ObservableSpec {
    /// `σz^tot = Σ_q σz^q`.
    pub fn sigma_z_total(qubits: usize) -> Self {
        Self::LocalSum { paulis: vec![Pauli::Z; qubits] }
    }

    pub fn local_sum(pauli: Pauli, qubits: usize) -> Self {
        Self::LocalSum { paulis: vec![pauli; qubits] }
    }

    pub fn tensor(pauli: Pauli, qubits: usize) -> Self {
        Self::TensorProduct { paulis: vec![pauli; qubits] }
    }

    pub fn general(u: [f64; 4], qubits: usize, combine: Combine) -> Self {
        Self::GeneralPerQubit { combine, coefficients: vec![u; qubits] }
    }

    pub(crate) fn per_qubit(&self) -> (Combine, Vec<[f64; 4]>) {
        match self {
            Self::LocalSum { paulis } => {
                (Combine::Sum, paulis.iter().map(|p| p.coefficients()).collect())
            }
            Self::TensorProduct { paulis } => {
                (Combine::Product, paulis.iter().map(|p| p.coefficients()).collect())
            }
            Self::GeneralPerQubit { combine, coefficients } => (*combine, coefficients.clone()),
        }
    }

    pub fn qubits(&self) -> usize {
        self.per_qubit().1.len()
    }

    /// Short ASCII description, e.g. `sum(z,z)` or `prod(O,O)`.
    pub fn describe(&self) -> String {
        let names = |ps: &[Pauli]| {
            ps.iter()
                .map(|p| format!("{p:?}").to_lowercase())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Self::LocalSum { paulis } => format!("sum({})", names(paulis)),
            Self::TensorProduct { paulis } => format!("prod({})", names(paulis)),
            Self::GeneralPerQubit { combine, coefficients } => {
                let op = if *combine == Combine::Sum { "sum" } else { "prod" };
                let terms: Vec<String> = coefficients
                    .iter()
                    .map(|u| format!("O[{},{},{},{}]", u[0], u[1], u[2], u[3]))
                    .collect();
                format!("{op}({})", terms.join(","))
            }
        }
    }
}

/// A realized Hermitian readout operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
    diagonal: Option<Vec<f64>>,
    label: String,
}

impl Observable {
    /// Wraps a matrix, rejecting non-Hermitian input.
    pub fn from_matrix(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let defect = matrix.max_abs_diff(&dagger(&matrix));
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        let d = matrix.dim();
        let off_diag_zero =
            (0..d).all(|r| (0..d).all(|c| r == c || matrix.get(r, c) == ZERO));
        let diagonal = off_diag_zero.then(|| (0..d).map(|i| matrix.get(i, i).re).collect());
        Ok(Self { matrix, diagonal, label: label.into() })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `⟨ψ|M|ψ⟩`, real part only (the operator is Hermitian).
    pub fn expectation(&self, amps: &[C64]) -> f64 {
        match &self.diagonal {
            Some(d) => d.iter().zip(amps).map(|(w, a)| w * a.norm_sqr()).sum(),
            None => {
                let mv = self.matrix.apply(amps);
                amps.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
            }
        }
    }

    /// `M|ψ⟩`.
    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        match &self.diagonal {
            Some(d) => d.iter().zip(amps).map(|(w, a)| a * *w).collect(),
            None => self.matrix.apply(amps),
        }
    }
}

/// Realizes the readout operator on `qubits` qubits.
pub fn build_observable(spec: &ObservableSpec, qubits: usize) -> Result<Observable> {
    let (combine, coeffs) = spec.per_qubit();
    if coeffs.len() != qubits {
        return Err(Error::Shape(format!(
            "observable lists {} per-qubit terms for {} qubits",
            coeffs.len(),
            qubits
        )));
    }
    let locals: Vec<ComplexMatrix> = coeffs.iter().map(|&u| pauli_combination(u)).collect();
    let matrix = match combine {
        Combine::Sum => locals
            .iter()
            .enumerate()
            .fold(ComplexMatrix::zeros(1 << qubits), |acc, (q, m)| {
                &acc + &embed_single(m, q + 1, qubits)
            }),
        Combine::Product => kron_all(locals.iter().rev()),
    };
    Observable::from_matrix(matrix, spec.describe())
}

/// Effective observable `e† m e`; `e` must be unitary.
pub fn conjugate_observable(m: &ComplexMatrix, e: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: e.dim() });
    }
    let defect = e.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(conjugate_by(m, e))
}

/// Gate-level form of a circuit, used by the fast evaluator and the adjoint gradient.
#[derive(Clone, Debug)]
pub(crate) struct GateRotation {
    pub axis: Axis,
    pub bit: usize,
    pub slot: usize,
    pub data_driven: bool,
}

/// One step of the compiled circuit, in application order.
#[derive(Clone, Debug)]
pub(crate) enum Step {
    Rotation(GateRotation),
    Entangler,
}

pub(crate) fn compile(arch: &Architecture) -> Vec<Step> {
    let mut steps = Vec::with_capacity(2 * arch.slots() + arch.layers);
    for l in 0..arch.layers {
        for q in 0..arch.qubits {
            let slot = l * arch.qubits + q;
            let (first, second) = match arch.layer_kind {
                LayerKind::Standard => ((Axis::Y, false), (Axis::X, true)),
                LayerKind::Alternative => ((Axis::Y, true), (Axis::X, false)),
            };
            for (axis, data_driven) in [first, second] {
                steps.push(Step::Rotation(GateRotation { axis, bit: q, slot, data_driven }));
            }
        }
        if arch.entangles_after(l) {
            steps.push(Step::Entangler);
        }
    }
    steps
}

/// Bit pairs `(hi, lo)` of the two-qubit gates in one entangling block, in application order.
pub(crate) fn entangler_pairs(qubits: usize, order: EntanglerOrder) -> Vec<(usize, usize)> {
    // F_i covers Kronecker positions i, i+1 counted from the left, i.e. bits Q−i and Q−i−1.
    let pair = |i: usize| (qubits - i, qubits - i - 1);
    match order {
        EntanglerOrder::Descending => (1..qubits).map(pair).collect(),
        EntanglerOrder::Ascending => (1..qubits).rev().map(pair).collect(),
    }
}

pub(crate) fn entangler_entries() -> [C64; 16] {
    let mut g = [ZERO; 16];
    g.copy_from_slice(two_qubit_entangler().as_slice());
    g
}

pub(crate) fn entangler_dagger_entries() -> [C64; 16] {
    let mut g = [ZERO; 16];
    g.copy_from_slice(dagger(&two_qubit_entangler()).as_slice());
    g
}

/// Half angle fed to a rotation gate.
#[inline]
pub(crate) fn gate_half_angle(g: &GateRotation, theta: &ParameterSet, x: &[f64]) -> f64 {
    let p = &theta.slots[g.slot];
    if g.data_driven {
        p.data_angle(x)
    } else {
        p.alpha
    }
}

#[inline]
pub(crate) fn rotation_gate(axis: Axis, half_angle: f64) -> [C64; 4] {
    rotation_entries(axis, half_angle)
}

pub(crate) fn run_steps(
    steps: &[Step],
    arch: &Architecture,
    theta: &ParameterSet,
    x: &[f64],
    amps: &mut [C64],
) {
    let pairs = entangler_pairs(arch.qubits, arch.entangler_order);
    let e2 = entangler_entries();
    for step in steps {
        match step {
            Step::Rotation(g) => {
                let gate = rotation_entries(g.axis, gate_half_angle(g, theta, x));
                apply_single_inplace(amps, &gate, g.bit);
            }
            Step::Entangler => {
                for &(hi, lo) in &pairs {
                    apply_pair_inplace(amps, &e2, hi, lo);
                }
            }
        }
    }
}

/// `Û(x, θ)|0…0⟩` by gate-wise state-vector simulation.
pub fn final_state(arch: &Architecture, theta: &ParameterSet, x: &[f64]) -> Result<QuantumState> {
    arch.validate()?;
    theta.check(arch)?;
    if x.len() != arch.inputs {
        return Err(Error::DimensionMismatch { expected: arch.inputs, found: x.len() });
    }
    let mut amps = vec![ZERO; arch.dim()];
    amps[0] = ONE;
    run_steps(&compile(arch), arch, theta, x, &mut amps);
    Ok(QuantumState::from_amplitudes_unchecked(amps))
}

/// Signed readout `⟨φ(x)|𝓜|φ(x)⟩`, the signal whose Fourier series is analysed.
pub fn evaluate_signed(
    arch: &Architecture,
    theta: &ParameterSet,
    x: &[f64],
    observable: &Observable,
) -> Result<f64> {
    if observable.dim() != arch.dim() {
        return Err(Error::DimensionMismatch { expected: arch.dim(), found: observable.dim() });
    }
    let state = final_state(arch, theta, x)?;
    Ok(observable.expectation(state.amplitudes()))
}

/// Network output `F(x, θ) = |⟨φ(x)|𝓜|φ(x)⟩|`.
pub fn evaluate_output(
    arch: &Architecture,
    theta: &ParameterSet,
    x: &[f64],
    observable: &Observable,
) -> Result<f64> {
    evaluate_signed(arch, theta, x, observable).map(f64::abs)
}

/// Batch evaluator that compiles the circuit once.
#[derive(Clone, Debug)]
pub struct Evaluator<'a> {
    arch: Architecture,
    observable: &'a Observable,
    steps: Vec<Step>,
}

impl<'a> Evaluator<'a> {
    pub fn new(arch: &Architecture, observable: &'a Observable) -> Result<Self> {
        arch.validate()?;
        if observable.dim() != arch.dim() {
            return Err(Error::DimensionMismatch { expected: arch.dim(), found: observable.dim() });
        }
        Ok(Self { arch: *arch, observable, steps: compile(arch) })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn observable(&self) -> &Observable {
        self.observable
    }

    pub(crate) fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Signed expectation; shapes are assumed checked by the caller.
    pub fn signed(&self, theta: &ParameterSet, x: &[f64]) -> f64 {
        let mut amps = vec![ZERO; self.arch.dim()];
        amps[0] = ONE;
        run_steps(&self.steps, &self.arch, theta, x, &mut amps);
        self.observable.expectation(&amps)
    }

    pub fn output(&self, theta: &ParameterSet, x: &[f64]) -> f64 {
        self.signed(theta, x).abs()
    }
}
