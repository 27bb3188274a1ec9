//! Partial Fourier series of the network output and harmonic counting.
//!
//! Writing each layer as `T⁺e^{iω·x} + T⁻e^{−iω·x}`, the signed output
//! `⟨0|U†𝓜U|0⟩` becomes a sum over sign sequences `R ∈ {−2, 0, +2}^{L·Q}`:
//!
//! ```text
//! F(x) = Σ_R c_R · exp(i Σ_d R_d ω*_d · x),      c_R = ⟨0…0| A(R) |0…0⟩
//! ```
//!
//! where slot `d = l·Q + q` enumerates (layer, qubit) pairs and `A(R)` is
//! obtained by pushing `𝓜` backwards through the layers with the maps
//!
//! ```text
//! 𝓗⁰[O]  = T⁺† O T⁺ + T⁻† O T⁻
//! 𝓗⁺²[O] = T⁻† O T⁺
//! 𝓗⁻²[O] = T⁺† O T⁻
//! ```
//!
//! applied per qubit, after the entangler sandwich `E† O E` of each entangling
//! layer. The coefficients are computed here by evaluating that recursion on
//! dense matrices with concrete angles. [`numeric_spectrum`] counts the same
//! harmonics independently from a DFT of sampled outputs.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_entangler_ordered, harmonic_parts, Architecture, Combine, Evaluator, LayerKind,
    Observable, ObservableSpec, ParameterSet,
};
use crate::error::{Error, Result};
use crate::tensor::{
    conjugate_by, dagger, kron_all, matmul, pauli_combination, ComplexMatrix, C64, ZERO,
};

/// Largest `L·Q` accepted by the symbolic engine.
pub const MAX_SYMBOLIC_SLOTS: usize = 12;
/// `|c| ≤ ZERO_TOLERANCE` is treated as a vanishing coefficient.
pub const ZERO_TOLERANCE: f64 = 1e-9;
/// DFT bins below this fraction of the largest amplitude are not peaks.
pub const PEAK_THRESHOLD: f64 = 1e-6;
/// Exclusion radius around multiples of π/4 for generic angles.
pub const GENERIC_MARGIN: f64 = PI / 16.0;
/// Largest number of grid points the numeric engine will sample.
pub const MAX_GRID_POINTS: usize = 1 << 24;

/// Weights in `{−2, 0, +2}`, one per (layer, qubit) slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignSequence(Vec<i8>);

impl SignSequence {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|&&a| !matches!(a, -2 | 0 | 2)) {
            return Err(Error::Shape(format!("sign sequence entry {bad} not in {{-2, 0, 2}}")));
        }
        Ok(Self(entries))
    }

    /// Sequence with base-3 index `index`, digit `0 ↦ 0`, `1 ↦ +2`, `2 ↦ −2`, slot 0 least significant.
    pub fn from_index(mut index: usize, slots: usize) -> Self {
        let mut entries = Vec::with_capacity(slots);
        for _ in 0..slots {
            entries.push(match index % 3 {
                0 => 0,
                1 => 2,
                _ => -2,
            });
            index /= 3;
        }
        Self(entries)
    }

    pub fn index(&self) -> usize {
        self.0.iter().rev().fold(0, |acc, &a| acc * 3 + digit(a))
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|a| -a).collect())
    }

    /// `Ω = Σ_d R_d ω*_d`.
    pub fn frequency(&self, assignment: &FrequencyAssignment) -> Vec<f64> {
        let mut omega = vec![0.0; assignment.inputs()];
        for (&a, w) in self.0.iter().zip(&assignment.slots) {
            for (o, wi) in omega.iter_mut().zip(w) {
                *o += a as f64 * wi;
            }
        }
        omega
    }
}

impl std::fmt::Display for SignSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> =
            self.0.iter().map(|&a| if a == 0 { "0".into() } else { format!("{a:+}") }).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

#[inline]
fn digit(a: i8) -> usize {
    match a {
        0 => 0,
        2 => 1,
        _ => 2,
    }
}

/// Per-slot frequency vectors `ω*_d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyAssignment {
    pub slots: Vec<Vec<f64>>,
}

impl FrequencyAssignment {
    /// Integer assignment with pairwise-distinct harmonics: slot `d` drives input
    /// `d mod n` with weight `3^{⌊d/n⌋}`, so every input coordinate sees a
    /// balanced-ternary set of weights.
    pub fn canonical(arch: &Architecture) -> Self {
        let n = arch.inputs;
        let slots = (0..arch.slots())
            .map(|d| {
                let mut w = vec![0.0; n];
                w[d % n] = 3f64.powi((d / n) as i32);
                w
            })
            .collect();
        Self { slots }
    }

    pub fn from_parameters(theta: &ParameterSet) -> Self {
        Self { slots: theta.slots.iter().map(|p| p.omega.clone()).collect() }
    }

    pub fn inputs(&self) -> usize {
        self.slots.first().map_or(0, Vec::len)
    }

    /// Copy of `theta` with its `ω` replaced by this assignment.
    pub fn apply_to(&self, theta: &ParameterSet) -> ParameterSet {
        let mut out = theta.clone();
        for (p, w) in out.slots.iter_mut().zip(&self.slots) {
            p.omega = w.clone();
        }
        out
    }

    /// Largest `|Ω_i|` per input coordinate.
    pub fn max_abs_frequency(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.inputs()];
        for w in &self.slots {
            for (acc, wi) in m.iter_mut().zip(w) {
                *acc += 2.0 * wi.abs();
            }
        }
        m
    }
}

/// One term `c · e^{iΩ·x}` of the output series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub sequence: SignSequence,
    pub frequency: Vec<f64>,
    pub coefficient: C64,
}

/// One term `C_j e^{iM_j·x}` of the unitary's own series, with `X_j ∈ {±1}^{L·Q}`.
#[derive(Clone, Debug)]
pub struct UnitaryTerm {
    pub signs: Vec<i8>,
    pub frequency: Vec<f64>,
    pub coefficient: ComplexMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Symbolic,
    NumericDft,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub architecture: Architecture,
    pub observable: String,
    /// `𝓝_h = 2^{LQ}` terms in the unitary's expansion.
    pub unitary_terms: u64,
    /// `3^{LQ}` candidate output harmonics.
    pub output_bound: u64,
    /// `χ = 3^L`.
    pub chi: u64,
    /// Non-vanishing coefficients `N_h`.
    pub harmonics: usize,
    pub params: usize,
    /// `Γ = N_h / N_p`.
    pub gamma: f64,
    pub method: Method,
    /// Coefficient cut for the symbolic engine, relative peak cut for the DFT.
    pub zero_tolerance: f64,
}

impl SpectrumReport {
    fn new(arch: &Architecture, observable: &str, harmonics: usize, method: Method, tol: f64) -> Self {
        let slots = arch.slots() as u32;
        Self {
            architecture: *arch,
            observable: observable.to_string(),
            unitary_terms: 2u64.pow(slots),
            output_bound: 3u64.pow(slots),
            chi: 3u64.pow(arch.layers as u32),
            harmonics,
            params: arch.num_params(),
            gamma: harmonics as f64 / arch.num_params() as f64,
            method,
            zero_tolerance: tol,
        }
    }
}

/// Every sign sequence with its assembled frequency, ordered by [`SignSequence::index`].
pub fn enumerate_frequencies(
    arch: &Architecture,
    assignment: &FrequencyAssignment,
) -> Result<Vec<(SignSequence, Vec<f64>)>> {
    if assignment.slots.len() != arch.slots() {
        return Err(Error::Shape(format!(
            "frequency assignment has {} slots, architecture has {}",
            assignment.slots.len(),
            arch.slots()
        )));
    }
    guard(arch)?;
    let total = 3usize.pow(arch.slots() as u32);
    Ok((0..total)
        .map(|k| {
            let s = SignSequence::from_index(k, arch.slots());
            let f = s.frequency(assignment);
            (s, f)
        })
        .collect())
}

fn guard(arch: &Architecture) -> Result<()> {
    if arch.slots() > MAX_SYMBOLIC_SLOTS {
        return Err(Error::MemoryGuard { slots: arch.slots(), limit: MAX_SYMBOLIC_SLOTS });
    }
    Ok(())
}

/// Angles `α, β` uniform on `[−π/2, π/2]` away from multiples of π/4, `ω` canonical.
pub fn generic_parameters<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> ParameterSet {
    let mut theta = ParameterSet::zeros(arch);
    for p in &mut theta.slots {
        p.alpha = generic_angle(rng);
        p.beta = generic_angle(rng);
    }
    FrequencyAssignment::canonical(arch).apply_to(&theta)
}

fn generic_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
        let k = (v / FRAC_PI_4).round();
        if (v - k * FRAC_PI_4).abs() > GENERIC_MARGIN {
            return v;
        }
    }
}

fn layer_parts(arch: &Architecture, theta: &ParameterSet) -> Vec<(ComplexMatrix, ComplexMatrix)> {
    theta.slots.iter().map(|p| harmonic_parts(p, arch.layer_kind)).collect()
}

/// `c_R = ⟨0|A(R)|0⟩` for one sequence, using full Kronecker products of the
/// `T^±` factors at every layer.
pub fn symbolic_coefficient(
    arch: &Architecture,
    theta: &ParameterSet,
    observable: &Observable,
    seq: &SignSequence,
) -> Result<C64> {
    arch.validate()?;
    theta.check(arch)?;
    if seq.len() != arch.slots() {
        return Err(Error::Shape(format!(
            "sign sequence has {} entries, architecture has {} slots",
            seq.len(),
            arch.slots()
        )));
    }
    if observable.dim() != arch.dim() {
        return Err(Error::DimensionMismatch { expected: arch.dim(), found: observable.dim() });
    }
    let parts = layer_parts(arch, theta);
    let entangler = if arch.is_entangling() {
        Some(build_entangler_ordered(arch.qubits, arch.entangler_order)?)
    } else {
        None
    };
    let q_count = arch.qubits;
    let mut a = observable.matrix().clone();
    for l in (0..arch.layers).rev() {
        if arch.entangles_after(l) {
            a = conjugate_by(&a, entangler.as_ref().expect("entangler built"));
        }
        // (left, right) factor choices per qubit, qubit 1 first
        let choices: Vec<Vec<(&ComplexMatrix, &ComplexMatrix)>> = (0..q_count)
            .map(|q| {
                let (plus, minus) = &parts[l * q_count + q];
                match seq.entries()[l * q_count + q] {
                    0 => vec![(plus, plus), (minus, minus)],
                    2 => vec![(minus, plus)],
                    _ => vec![(plus, minus)],
                }
            })
            .collect();
        let mut next = ComplexMatrix::zeros(arch.dim());
        for combo in cartesian(&choices) {
            let left = kron_all(combo.iter().rev().map(|c| c.0));
            let right = kron_all(combo.iter().rev().map(|c| c.1));
            next = &next + &matmul(&dagger(&left), &matmul(&a, &right));
        }
        a = next;
    }
    Ok(a.get(0, 0))
}

fn cartesian<T: Copy>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    choices.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |&o| {
                    let mut p = prefix.clone();
                    p.push(o);
                    p
                })
            })
            .collect()
    })
}

/// `O ↦ Σ (L_k† on bit) · O · (R_k on bit)` for 2×2 pairs `(L_k, R_k)`.
fn local_sandwich(o: &ComplexMatrix, pairs: &[([C64; 4], [C64; 4])], bit: usize) -> ComplexMatrix {
    let d = o.dim();
    let m = 1usize << bit;
    let src = o.as_slice();
    let mut out = vec![ZERO; d * d];
    let mut tmp = vec![ZERO; d * d];
    for (ld, r) in pairs {
        // tmp = O · R  (R acts on column index)
        for row in 0..d {
            let base = row * d;
            for c0 in (0..d).filter(|c| c & m == 0) {
                let c1 = c0 | m;
                let (x0, x1) = (src[base + c0], src[base + c1]);
                tmp[base + c0] = x0 * r[0] + x1 * r[2];
                tmp[base + c1] = x0 * r[1] + x1 * r[3];
            }
        }
        // out += L† · tmp  (ld already holds L†)
        for r0 in (0..d).filter(|r| r & m == 0) {
            let r1 = r0 | m;
            for c in 0..d {
                let (y0, y1) = (tmp[r0 * d + c], tmp[r1 * d + c]);
                out[r0 * d + c] += ld[0] * y0 + ld[1] * y1;
                out[r1 * d + c] += ld[2] * y0 + ld[3] * y1;
            }
        }
    }
    ComplexMatrix::new(d, out)
}

/// `⟨0| Σ (L_k† on bit) O (R_k on bit) |0⟩` without forming the matrix.
fn local_sandwich_corner(o: &ComplexMatrix, pairs: &[([C64; 4], [C64; 4])], bit: usize) -> C64 {
    let m = 1usize << bit;
    let mut acc = ZERO;
    for (ld, r) in pairs {
        // row 0 of L† touches rows {0, m}; column 0 of R touches columns {0, m}
        for (i, li) in [(0, ld[0]), (m, ld[1])] {
            for (j, rj) in [(0, r[0]), (m, r[2])] {
                acc += li * o.get(i, j) * rj;
            }
        }
    }
    acc
}

fn entries(m: &ComplexMatrix) -> [C64; 4] {
    [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)]
}

/// Per-slot superoperator pairs for `a = 0, +2, −2`.
type SlotMaps = [Vec<([C64; 4], [C64; 4])>; 3];

fn slot_maps(parts: &[(ComplexMatrix, ComplexMatrix)]) -> Vec<SlotMaps> {
    parts
        .iter()
        .map(|(plus, minus)| {
            let (p, m) = (entries(plus), entries(minus));
            let (pd, md) = (entries(&dagger(plus)), entries(&dagger(minus)));
            [vec![(pd, p), (md, m)], vec![(md, p)], vec![(pd, m)]]
        })
        .collect()
}

struct Recursion<'a> {
    arch: &'a Architecture,
    maps: Vec<SlotMaps>,
    entangler: Option<ComplexMatrix>,
}

impl Recursion<'_> {
    /// Operator after processing slots `d..D` top-down, before applying slot `d−1`.
    fn enter_slot(&self, o: &ComplexMatrix, slot: usize) -> ComplexMatrix {
        let q = self.arch.qubits;
        let layer = slot / q;
        if slot % q == q - 1 && self.arch.entangles_after(layer) {
            conjugate_by(o, self.entangler.as_ref().expect("entangler built"))
        } else {
            o.clone()
        }
    }

    /// Fills `out[index]` for every completion of the slots `0..=slot`.
    fn descend(&self, o: &ComplexMatrix, slot: usize, index: usize, out: &mut Vec<(usize, C64)>) {
        let o = self.enter_slot(o, slot);
        let bit = slot % self.arch.qubits;
        let stride = 3usize.pow(slot as u32);
        for (digit, pairs) in self.maps[slot].iter().enumerate() {
            let idx = index + digit * stride;
            if slot == 0 {
                out.push((idx, local_sandwich_corner(&o, pairs, bit)));
            } else {
                let next = local_sandwich(&o, pairs, bit);
                self.descend(&next, slot - 1, idx, out);
            }
        }
    }
}

/// All `3^{LQ}` coefficients, indexed by [`SignSequence::index`].
pub fn coefficient_table(
    arch: &Architecture,
    theta: &ParameterSet,
    observable: &Observable,
) -> Result<Vec<C64>> {
    arch.validate()?;
    theta.check(arch)?;
    guard(arch)?;
    if observable.dim() != arch.dim() {
        return Err(Error::DimensionMismatch { expected: arch.dim(), found: observable.dim() });
    }
    let entangler = if arch.is_entangling() {
        Some(build_entangler_ordered(arch.qubits, arch.entangler_order)?)
    } else {
        None
    };
    let rec = Recursion { arch, maps: slot_maps(&layer_parts(arch, theta)), entangler };
    let slots = arch.slots();
    let total = 3usize.pow(slots as u32);

    // Split the outermost slots into independent subtrees.
    let split = slots.min(3);
    let mut frontier = vec![(observable.matrix().clone(), 0usize)];
    for s in (slots - split..slots).rev() {
        let stride = 3usize.pow(s as u32);
        let bit = s % arch.qubits;
        frontier = frontier
            .into_iter()
            .flat_map(|(o, index)| {
                let o = rec.enter_slot(&o, s);
                rec.maps[s]
                    .iter()
                    .enumerate()
                    .map(|(digit, pairs)| (local_sandwich(&o, pairs, bit), index + digit * stride))
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let remaining = slots - split;
    let chunks: Vec<Vec<(usize, C64)>> = frontier
        .par_iter()
        .map(|(o, index)| {
            if remaining == 0 {
                return vec![(*index, o.get(0, 0))];
            }
            let mut local = Vec::with_capacity(3usize.pow(remaining as u32));
            rec.descend(o, remaining - 1, *index, &mut local);
            local
        })
        .collect();
    let mut table = vec![ZERO; total];
    for chunk in chunks {
        for (idx, c) in chunk {
            table[idx] = c;
        }
    }
    Ok(table)
}

/// Full symbolic decomposition with its report.
pub fn symbolic_spectrum(
    arch: &Architecture,
    theta: &ParameterSet,
    observable: &Observable,
) -> Result<(SpectrumReport, Vec<HarmonicTerm>)> {
    let table = coefficient_table(arch, theta, observable)?;
    let assignment = FrequencyAssignment::from_parameters(theta);
    let terms: Vec<HarmonicTerm> = table
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let sequence = SignSequence::from_index(k, arch.slots());
            let frequency = sequence.frequency(&assignment);
            HarmonicTerm { sequence, frequency, coefficient: c }
        })
        .collect();
    let n_h = terms.iter().filter(|t| t.coefficient.norm() > ZERO_TOLERANCE).count();
    let report = SpectrumReport::new(arch, observable.label(), n_h, Method::Symbolic, ZERO_TOLERANCE);
    Ok((report, terms))
}

/// `Σ_k c_k e^{iΩ_k·x}`.
pub fn reconstruct(terms: &[HarmonicTerm], x: &[f64]) -> C64 {
    terms
        .iter()
        .map(|t| {
            let phase: f64 = t.frequency.iter().zip(x).map(|(w, xi)| w * xi).sum();
            t.coefficient * C64::from_polar(1.0, phase)
        })
        .sum()
}

/// `max_R |c(−R) − conj(c(R))|` over a full table.
pub fn conjugate_symmetry_defect(terms: &[HarmonicTerm]) -> f64 {
    let by_index: HashMap<usize, C64> =
        terms.iter().map(|t| (t.sequence.index(), t.coefficient)).collect();
    terms
        .iter()
        .map(|t| {
            let mirror = by_index.get(&t.sequence.negated().index()).copied().unwrap_or(ZERO);
            (mirror - t.coefficient.conj()).norm()
        })
        .fold(0.0, f64::max)
}

/// The `2^{LQ}` matrix-valued terms `C_j e^{iM_j·x}` of the circuit unitary.
pub fn unitary_expansion(arch: &Architecture, theta: &ParameterSet) -> Result<Vec<UnitaryTerm>> {
    arch.validate()?;
    theta.check(arch)?;
    if arch.slots() > 10 {
        return Err(Error::MemoryGuard { slots: arch.slots(), limit: 10 });
    }
    let parts = layer_parts(arch, theta);
    let entangler = if arch.is_entangling() {
        Some(build_entangler_ordered(arch.qubits, arch.entangler_order)?)
    } else {
        None
    };
    let q_count = arch.qubits;
    let slots = arch.slots();
    let mut out = Vec::with_capacity(1 << slots);
    for mask in 0..(1usize << slots) {
        let signs: Vec<i8> = (0..slots).map(|d| if mask >> d & 1 == 0 { 1 } else { -1 }).collect();
        let mut c = ComplexMatrix::identity(arch.dim());
        for l in 0..arch.layers {
            let factors: Vec<&ComplexMatrix> = (0..q_count)
                .rev()
                .map(|q| {
                    let (plus, minus) = &parts[l * q_count + q];
                    if signs[l * q_count + q] > 0 { plus } else { minus }
                })
                .collect();
            let mut b = kron_all(factors);
            if arch.entangles_after(l) {
                b = matmul(entangler.as_ref().expect("entangler built"), &b);
            }
            c = matmul(&b, &c);
        }
        let mut frequency = vec![0.0; arch.inputs];
        for (s, p) in signs.iter().zip(&theta.slots) {
            for (f, w) in frequency.iter_mut().zip(&p.omega) {
                *f += *s as f64 * w;
            }
        }
        out.push(UnitaryTerm { signs, frequency, coefficient: c });
    }
    Ok(out)
}

/// One DFT bin above the peak threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub frequency: Vec<i64>,
    pub coefficient: C64,
}

/// DFT of the sampled signed output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericSpectrum {
    pub report: SpectrumReport,
    /// Samples per input coordinate.
    pub samples: Vec<usize>,
    /// All bins as `(integer frequency vector, amplitude |c|)`, row-major over the grid.
    pub amplitudes: Vec<(Vec<i64>, f64)>,
    pub peaks: Vec<Peak>,
}

/// Smallest per-coordinate sample counts that resolve every harmonic of the canonical assignment.
pub fn required_samples(arch: &Architecture) -> Vec<usize> {
    FrequencyAssignment::canonical(arch)
        .max_abs_frequency()
        .iter()
        .map(|&m| 2 * m as usize + 1)
        .collect()
}

/// Counts harmonics by sampling the signed output of `theta`'s angles (with
/// the canonical integer frequencies) over `[0, 2π)^n` and taking a DFT.
///
/// `samples_per_dim = None` picks the minimum grid; `Some(s)` must satisfy
/// `s ≥ 2·max|Ω_i| + 1` in every coordinate.
pub fn numeric_spectrum(
    arch: &Architecture,
    theta: &ParameterSet,
    observable: &Observable,
    samples_per_dim: Option<usize>,
) -> Result<NumericSpectrum> {
    arch.validate()?;
    theta.check(arch)?;
    let required = required_samples(arch);
    let samples: Vec<usize> = match samples_per_dim {
        None => required.clone(),
        Some(s) => {
            for (dim, &r) in required.iter().enumerate() {
                if s < r {
                    return Err(Error::Nyquist { dim, given: s, required: r });
                }
            }
            vec![s; arch.inputs]
        }
    };
    let total: usize = samples.iter().product();
    if total > MAX_GRID_POINTS {
        return Err(Error::Unsupported(format!(
            "DFT grid of {total} points exceeds the limit of {MAX_GRID_POINTS}"
        )));
    }
    let theta = FrequencyAssignment::canonical(arch).apply_to(theta);
    let evaluator = Evaluator::new(arch, observable)?;

    let signal: Vec<C64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let x = grid_point(flat, &samples);
            C64::new(evaluator.signed(&theta, &x), 0.0)
        })
        .collect();
    let spectrum = fft_nd(signal, &samples);

    let norm = total as f64;
    let mut amplitudes = Vec::with_capacity(total);
    let mut max_amp: f64 = 0.0;
    for (flat, c) in spectrum.iter().enumerate() {
        let amp = c.norm() / norm;
        max_amp = max_amp.max(amp);
        amplitudes.push((bin_frequency(flat, &samples), amp));
    }
    let cut = PEAK_THRESHOLD * max_amp;
    let peaks: Vec<Peak> = spectrum
        .iter()
        .zip(&amplitudes)
        .filter(|(_, (_, a))| *a > cut)
        .map(|(c, (f, _))| Peak { frequency: f.clone(), coefficient: c / norm })
        .collect();
    let report = SpectrumReport::new(arch, observable.label(), peaks.len(), Method::NumericDft, PEAK_THRESHOLD);
    Ok(NumericSpectrum { report, samples, amplitudes, peaks })
}

/// Row-major multi-index with the last coordinate fastest.
fn unravel(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for (i, &n) in shape.iter().enumerate().rev() {
        idx[i] = flat % n;
        flat /= n;
    }
    idx
}

fn grid_point(flat: usize, samples: &[usize]) -> Vec<f64> {
    unravel(flat, samples)
        .iter()
        .zip(samples)
        .map(|(&j, &n)| 2.0 * PI * j as f64 / n as f64)
        .collect()
}

fn bin_frequency(flat: usize, samples: &[usize]) -> Vec<i64> {
    unravel(flat, samples)
        .iter()
        .zip(samples)
        .map(|(&k, &n)| if 2 * k < n + 1 { k as i64 } else { k as i64 - n as i64 })
        .collect()
}

/// Forward DFT along every axis of a row-major grid.
fn fft_nd(mut data: Vec<C64>, shape: &[usize]) -> Vec<C64> {
    let mut planner = FftPlanner::<f64>::new();
    let total = data.len();
    for (axis, &n) in shape.iter().enumerate() {
        if n == 1 {
            continue;
        }
        let fft = planner.plan_fft_forward(n);
        let stride: usize = shape[axis + 1..].iter().product();
        let mut line = vec![ZERO; n];
        for outer in 0..total / (n * stride) {
            for inner in 0..stride {
                let base = outer * n * stride + inner;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
    data
}

/// `N_h` of a non-entangling circuit from its per-qubit coefficient tables.
///
/// Without entanglers qubit `q` only sees its own slots and `𝓗^{±2}[I] = 0`,
/// `𝓗⁰[I] = I`. A local sum therefore has `c_R = Σ_q c_q(R_q)` restricted to
/// sequences that are zero off qubit `q`, and a tensor product has
/// `c_R = Π_q c_q(R_q)`. This reaches `L·Q` beyond [`MAX_SYMBOLIC_SLOTS`]
/// as long as `L` itself stays within it.
pub fn factorized_harmonic_count(
    arch: &Architecture,
    theta: &ParameterSet,
    spec: &ObservableSpec,
) -> Result<usize> {
    arch.validate()?;
    theta.check(arch)?;
    if arch.is_entangling() {
        return Err(Error::Unsupported("entangling circuits do not factorize over qubits".into()));
    }
    let (combine, coeffs) = spec.per_qubit();
    if coeffs.len() != arch.qubits {
        return Err(Error::Shape(format!(
            "observable has {} qubits, architecture {}",
            coeffs.len(),
            arch.qubits
        )));
    }
    let single = Architecture { qubits: 1, ..*arch };
    let tables = coeffs
        .iter()
        .enumerate()
        .map(|(q, &u)| {
            let mut sub = ParameterSet::zeros(&single);
            for l in 0..arch.layers {
                sub.slots[l] = theta.get(l, q).clone();
            }
            let obs = Observable::from_matrix(pauli_combination(u), "O")?;
            coefficient_table(&single, &sub, &obs)
        })
        .collect::<Result<Vec<_>>>()?;
    let nonzero = |c: &C64| c.norm() > ZERO_TOLERANCE;
    Ok(match combine {
        Combine::Sum => {
            let oscillating: usize = tables.iter().map(|t| t[1..].iter().filter(|c| nonzero(c)).count()).sum();
            let constant: C64 = tables.iter().map(|t| t[0]).sum();
            oscillating + usize::from(nonzero(&constant))
        }
        Combine::Product => tables.iter().map(|t| t.iter().filter(|c| nonzero(c)).count()).product(),
    })
}

/// `Γ = N_h / N_p`.
pub fn gamma_ratio(harmonics: usize, arch: &Architecture) -> f64 {
    harmonics as f64 / arch.num_params() as f64
}

/// Counts for a single qubit with readout `u_o I + u_x σx + u_y σy + u_z σz`:
/// `(harmonics at Ω ≠ 0, whether the constant term survives)`.
///
/// Standard layer: the trailing-zero sequences carry `I` and `σx`, the
/// trailing `±2` sequences carry `σy` and `σz`. Alternative layer: only
/// `I` survives at `Ω = 0`; `σy`, `σz` fill all trailing-`±2` sequences and
/// `σx` only those ending in two `±2` entries.
fn single_qubit_parts(layers: usize, kind: LayerKind, u: [f64; 4]) -> (usize, bool) {
    let [o, x, y, z] = u.map(|v| v != 0.0);
    let third = 3usize.pow(layers as u32 - 1);
    match kind {
        LayerKind::Standard => {
            let oscillating = if y || z { 2 * third } else { 0 };
            if x {
                (oscillating + third - 1, true)
            } else {
                (oscillating, o)
            }
        }
        LayerKind::Alternative => {
            let oscillating = if y || z {
                2 * third
            } else if x {
                if layers == 1 { 2 } else { 4 * third / 3 }
            } else {
                0
            };
            (oscillating, o)
        }
    }
}

/// `N_h(L, 1)` for a single-qubit readout, valid for generic angles.
pub fn single_qubit_harmonics(layers: usize, kind: LayerKind, u: [f64; 4]) -> usize {
    let (osc, constant) = single_qubit_parts(layers, kind, u);
    osc + usize::from(constant)
}

/// Closed-form `N_h` for non-entangling architectures.
///
/// Sums of local readouts add their per-qubit counts (sharing the constant
/// term); tensor products multiply them.
pub fn scaling_check(arch: &Architecture, spec: &ObservableSpec) -> Result<usize> {
    if arch.is_entangling() {
        return Err(Error::Unsupported(
            "no closed form for entangling architectures; use symbolic_spectrum".into(),
        ));
    }
    if spec.qubits() != arch.qubits {
        return Err(Error::Shape(format!(
            "observable has {} qubits, architecture {}",
            spec.qubits(),
            arch.qubits
        )));
    }
    let (combine, coeffs) = match spec {
        ObservableSpec::LocalSum { paulis } => {
            (Combine::Sum, paulis.iter().map(|p| p.coefficients()).collect::<Vec<_>>())
        }
        ObservableSpec::TensorProduct { paulis } => {
            (Combine::Product, paulis.iter().map(|p| p.coefficients()).collect())
        }
        ObservableSpec::GeneralPerQubit { combine, coefficients } => (*combine, coefficients.clone()),
    };
    let parts: Vec<(usize, bool)> = coeffs
        .iter()
        .map(|&u| single_qubit_parts(arch.layers, arch.layer_kind, u))
        .collect();
    Ok(match combine {
        Combine::Sum => {
            parts.iter().map(|p| p.0).sum::<usize>() + usize::from(parts.iter().any(|p| p.1))
        }
        Combine::Product => parts.iter().map(|p| p.0 + usize::from(p.1)).product(),
    })
}
