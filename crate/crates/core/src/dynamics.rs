//! Time evolution: Lindblad noise generators, master-equation integration
//! with a continuous correction term, the syndrome-class weight ODEs, and
//! discrete weak-step simulation of the protocols.

use crate::baselines::{oreshkov_ode_rhs, DeltaPolicy, WeightVector};
use crate::channels::SuperoperatorGenerator;
use crate::error::{CtqecError, Result};
use crate::linalg::{
    basis_vector, hermitian_eig, identity, tensor, CMatrix, CVector, C64,
};
use crate::protocol::{strong_correction_map, WeakProtocol};
use crate::stabilizer::StabilizerCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    BitFlip,
    Depolarizing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Physical,
    Corrected,
}

/// Independent single-qubit Poisson noise on every qubit.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// lambda, in 1/time.
    pub rate: f64,
    pub qubits: usize,
    /// Depolarizing only: when true each of X, Y, Z fires at rate lambda
    /// (the default); when false the total rate lambda is split as lambda/3
    /// per Pauli.
    pub rate_per_pauli: bool,
}

impl NoiseModel {
    pub fn bit_flip(rate: f64, qubits: usize) -> Result<Self> {
        Self::new(NoiseKind::BitFlip, rate, qubits, true)
    }

    pub fn depolarizing(rate: f64, qubits: usize) -> Result<Self> {
        Self::new(NoiseKind::Depolarizing, rate, qubits, true)
    }

    pub fn new(kind: NoiseKind, rate: f64, qubits: usize, rate_per_pauli: bool) -> Result<Self> {
        if rate < 0.0 {
            return Err(CtqecError::InvalidParameter(format!(
                "noise rate must be nonnegative, got {rate}"
            )));
        }
        Ok(NoiseModel {
            kind,
            rate,
            qubits,
            rate_per_pauli,
        })
    }

    fn pauli_rates(&self) -> Vec<(crate::pauli::Pauli, f64)> {
        use crate::pauli::Pauli;
        match self.kind {
            NoiseKind::BitFlip => vec![(Pauli::X, self.rate)],
            NoiseKind::Depolarizing => {
                let r = if self.rate_per_pauli {
                    self.rate
                } else {
                    self.rate / 3.0
                };
                vec![(Pauli::X, r), (Pauli::Y, r), (Pauli::Z, r)]
            }
        }
    }
}

/// One single-qubit operator lifted to qubit q of an n-qubit register
/// (qubit 0 is the most significant).
fn lift_single(op: &CMatrix, q: usize, n: usize) -> CMatrix {
    let left = identity(1 << q);
    let right = identity(1 << (n - q - 1));
    tensor(&tensor(&left, op), &right)
}

/// The Lindblad generator of the noise model (system Hamiltonian zero),
/// with jump operators sqrt(rate) P_q, optionally conjugated into the
/// code's corrected basis.
pub fn lindblad_generator(
    model: &NoiseModel,
    code: &StabilizerCode,
    basis: Basis,
) -> Result<SuperoperatorGenerator> {
    if model.qubits != code.n {
        return Err(CtqecError::DimensionMismatch {
            expected: code.n,
            got: model.qubits,
        });
    }
    let n = code.n;
    let mut gen = SuperoperatorGenerator::zero(1 << n);
    for (p, rate) in model.pauli_rates() {
        let amp = rate.sqrt();
        for q in 0..n {
            let mut l = lift_single(&p.matrix(), q, n).map(|z| z * amp);
            if basis == Basis::Corrected {
                l = code.to_corrected(&l)?;
            }
            gen.add_dissipator(&l);
        }
    }
    Ok(gen)
}

/// kappa (R - identity) as a generator in the corrected basis: the
/// continuous strong-correction term of the master equation.
pub fn correction_generator(n: usize, k: usize, kappa: f64) -> Result<SuperoperatorGenerator> {
    let r = strong_correction_map(n, k)?;
    let dim = 1usize << n;
    let transfer = (r.transfer_matrix() - identity(dim * dim)).map(|z| z * kappa);
    Ok(SuperoperatorGenerator { dim, transfer })
}

/// Observable samples along a trajectory.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub codeword_fidelity: Vec<f64>,
    pub correctable_overlap: Vec<f64>,
    pub weights: Option<Vec<[f64; 4]>>,
}

impl SimulationTrace {
    fn new(with_weights: bool) -> Self {
        SimulationTrace {
            times: Vec::new(),
            codeword_fidelity: Vec::new(),
            correctable_overlap: Vec::new(),
            weights: if with_weights { Some(Vec::new()) } else { None },
        }
    }

    pub fn endpoint_fidelity(&self) -> f64 {
        *self.codeword_fidelity.last().unwrap_or(&1.0)
    }

    pub fn endpoint_overlap(&self) -> f64 {
        *self.correctable_overlap.last().unwrap_or(&1.0)
    }
}

/// Codeword fidelity <psi0|rho|psi0> and correctable overlap
/// <psi0|R(rho)|psi0>, both in the corrected basis.
pub fn observables(
    code: &StabilizerCode,
    rho: &CMatrix,
    psi0: &CVector,
) -> Result<(f64, f64)> {
    let r = strong_correction_map(code.n, code.k)?;
    let fid = (psi0.adjoint() * rho * psi0)[(0, 0)].re;
    let ovl = (psi0.adjoint() * r.apply(rho) * psi0)[(0, 0)].re;
    Ok((fid, ovl))
}

/// The logical |0_L> in the corrected basis: information register |0...0>,
/// trivial syndrome.
pub fn logical_zero(code: &StabilizerCode) -> CVector {
    basis_vector(code.dim(), 0)
}

fn check_density(rho: &CMatrix, tol: f64) -> Result<()> {
    if (rho.trace().re - 1.0).abs() > tol || rho.trace().im.abs() > tol {
        return Err(CtqecError::InvalidParameter(format!(
            "initial state trace {} is not 1",
            rho.trace()
        )));
    }
    let (vals, _) = hermitian_eig(rho)?;
    if vals.iter().any(|&v| v < -1e-10) {
        return Err(CtqecError::InvalidParameter(
            "initial state is not positive semidefinite".into(),
        ));
    }
    Ok(())
}

/// Fixed-step RK4 integration of drho/dt = (gen_noise + gen_correct)(rho),
/// sampling observables every `stride` steps (and always at the endpoint).
#[allow(clippy::too_many_arguments)]
pub fn integrate_master(
    gen_noise: &SuperoperatorGenerator,
    gen_correct: &SuperoperatorGenerator,
    code: &StabilizerCode,
    rho0: &CMatrix,
    psi0: &CVector,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<SimulationTrace> {
    check_density(rho0, 1e-10)?;
    let gen = gen_noise.add(gen_correct)?;
    let steps = (t_end / dt).round().max(1.0) as usize;
    let stride = stride.max(1);

    let mut rho = rho0.clone();
    let mut trace = SimulationTrace::new(false);
    let (f0, o0) = observables(code, &rho, psi0)?;
    trace.times.push(0.0);
    trace.codeword_fidelity.push(f0);
    trace.correctable_overlap.push(o0);

    for step in 1..=steps {
        let k1 = gen.apply(&rho);
        let k2 = gen.apply(&(&rho + k1.map(|z| z * (0.5 * dt))));
        let k3 = gen.apply(&(&rho + k2.map(|z| z * (0.5 * dt))));
        let k4 = gen.apply(&(&rho + k3.map(|z| z * dt)));
        rho += (k1 + k2.map(|z| z * 2.0) + k3.map(|z| z * 2.0) + k4).map(|z| z * (dt / 6.0));

        let t = step as f64 * dt;
        let drift = (rho.trace().re - 1.0).abs() + rho.trace().im.abs();
        if drift > 1e-6 {
            return Err(CtqecError::Unstable {
                t,
                msg: format!("trace drift {drift}"),
            });
        }
        if step % stride == 0 || step == steps {
            let (vals, _) = hermitian_eig(&rho)?;
            if vals.last().copied().unwrap_or(0.0) < -1e-6 {
                return Err(CtqecError::Unstable {
                    t,
                    msg: format!("negative eigenvalue {}", vals.last().unwrap()),
                });
            }
            let (f, o) = observables(code, &rho, psi0)?;
            trace.times.push(t);
            trace.codeword_fidelity.push(f);
            trace.correctable_overlap.push(o);
        }
    }
    Ok(trace)
}

/// RK4 integration of the three-qubit syndrome-class weight ODEs.
pub fn integrate_weights(
    lambda: f64,
    kappa: f64,
    policy: DeltaPolicy,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<SimulationTrace> {
    let steps = (t_end / dt).round().max(1.0) as usize;
    let stride = stride.max(1);
    let mut w = WeightVector::initial();
    let mut trace = SimulationTrace::new(true);
    let record = |t: f64, w: &WeightVector, trace: &mut SimulationTrace| {
        trace.times.push(t);
        trace.codeword_fidelity.push(w.fidelity());
        trace.correctable_overlap.push(w.correctable_overlap());
        trace.weights.as_mut().unwrap().push(w.w);
    };
    record(0.0, &w, &mut trace);

    let add = |w: &WeightVector, rhs: &[f64; 4], h: f64| WeightVector {
        w: [
            w.w[0] + h * rhs[0],
            w.w[1] + h * rhs[1],
            w.w[2] + h * rhs[2],
            w.w[3] + h * rhs[3],
        ],
    };
    for step in 1..=steps {
        let k1 = oreshkov_ode_rhs(&w, lambda, kappa, policy)?;
        let k2 = oreshkov_ode_rhs(&add(&w, &k1, 0.5 * dt), lambda, kappa, policy)?;
        let k3 = oreshkov_ode_rhs(&add(&w, &k2, 0.5 * dt), lambda, kappa, policy)?;
        let k4 = oreshkov_ode_rhs(&add(&w, &k3, dt), lambda, kappa, policy)?;
        for j in 0..4 {
            w.w[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t = step as f64 * dt;
        let sum: f64 = w.w.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(CtqecError::Unstable {
                t,
                msg: format!("weight sum drift {}", sum - 1.0),
            });
        }
        if step % stride == 0 || step == steps {
            record(t, &w, &mut trace);
        }
    }
    Ok(trace)
}

/// Exact noise step over dt as a physical-basis channel applied in the
/// corrected basis: per-qubit Pauli channels composed with the basis
/// change, avoiding any large superoperator exponential.
pub struct NoiseStep {
    /// Per-qubit Kraus operators on one qubit.
    qubit_kraus: Vec<CMatrix>,
    /// Corrected-from-physical transform and its inverse.
    to_corrected: CMatrix,
    qubits: usize,
}

impl NoiseStep {
    pub fn build(model: &NoiseModel, code: &StabilizerCode, dt: f64) -> Result<NoiseStep> {
        if model.qubits != code.n {
            return Err(CtqecError::DimensionMismatch {
                expected: code.n,
                got: model.qubits,
            });
        }
        use crate::pauli::Pauli;
        let qubit_kraus = match model.kind {
            NoiseKind::BitFlip => {
                // rho -> (1-q) rho + q X rho X with q = (1 - e^{-2 lambda dt})/2.
                let q = (1.0 - (-2.0 * model.rate * dt).exp()) / 2.0;
                vec![
                    identity(2).map(|z| z * (1.0 - q).sqrt()),
                    Pauli::X.matrix().map(|z| z * q.sqrt()),
                ]
            }
            NoiseKind::Depolarizing => {
                // Bloch vector shrinks by e^{-4 r dt} with r the per-Pauli
                // rate; equivalent depolarizing probability p per Pauli.
                let r = if model.rate_per_pauli {
                    model.rate
                } else {
                    model.rate / 3.0
                };
                let shrink = (-4.0 * r * dt).exp();
                let p = (1.0 - shrink) / 4.0;
                vec![
                    identity(2).map(|z| z * (1.0 - 3.0 * p).sqrt()),
                    Pauli::X.matrix().map(|z| z * p.sqrt()),
                    Pauli::Y.matrix().map(|z| z * p.sqrt()),
                    Pauli::Z.matrix().map(|z| z * p.sqrt()),
                ]
            }
        };
        let to_corrected = &code.correcting_unitary * code.encoding_unitary.adjoint();
        Ok(NoiseStep {
            qubit_kraus,
            to_corrected,
            qubits: code.n,
        })
    }

    /// Apply the step to a corrected-basis state.
    pub fn apply(&self, rho_corrected: &CMatrix) -> CMatrix {
        let mut rho = self.to_corrected.adjoint() * rho_corrected * &self.to_corrected;
        for q in 0..self.qubits {
            let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
            for k in &self.qubit_kraus {
                let lifted = lift_single(k, q, self.qubits);
                out += &lifted * &rho * lifted.adjoint();
            }
            rho = out;
        }
        &self.to_corrected * rho * self.to_corrected.adjoint()
    }
}

/// Alternate exact noise steps with the protocol's composed weak channel
/// at epsilon = sqrt(kappa dt); first-order-in-dt simulation of the full
/// master equation.
#[allow(clippy::too_many_arguments)]
pub fn discrete_step_simulate(
    code: &StabilizerCode,
    model: &NoiseModel,
    kappa: f64,
    rho0: &CMatrix,
    psi0: &CVector,
    steps: usize,
    dt: f64,
    stride: usize,
) -> Result<SimulationTrace> {
    let epsilon = (kappa * dt).sqrt();
    if epsilon >= 0.3 {
        return Err(CtqecError::InvalidParameter(format!(
            "epsilon = sqrt(kappa dt) = {epsilon} exceeds the 0.3 weak-step cap"
        )));
    }
    check_density(rho0, 1e-10)?;
    let protocol = WeakProtocol::build(code.n, code.k, epsilon)?;
    let correct = protocol.effective_channel();
    let noise = NoiseStep::build(model, code, dt)?;
    let stride = stride.max(1);

    let mut rho = rho0.clone();
    let mut trace = SimulationTrace::new(false);
    let (f0, o0) = observables(code, &rho, psi0)?;
    trace.times.push(0.0);
    trace.codeword_fidelity.push(f0);
    trace.correctable_overlap.push(o0);
    for step in 1..=steps {
        rho = noise.apply(&rho);
        rho = correct.apply(&rho);
        if step % stride == 0 || step == steps {
            let (f, o) = observables(code, &rho, psi0)?;
            trace.times.push(step as f64 * dt);
            trace.codeword_fidelity.push(f);
            trace.correctable_overlap.push(o);
        }
    }
    Ok(trace)
}

/// exp(i delta H_Cj) in closed form: H_Cj is +/-(sqrt(d)/2)(|0><j| + |j><0|),
/// which squares to a projector, so the exponential is a planar rotation.
pub fn correction_unitary(d: usize, outcome: usize, delta: f64) -> CMatrix {
    let jj = outcome % d;
    let sign = if outcome < d { 1.0 } else { -1.0 };
    let sqrt_d = (d as f64).sqrt();
    let mut u = identity(d);
    if jj == 0 {
        // H = sign sqrt(d) |0><0|.
        u[(0, 0)] = C64::new(0.0, sign * delta * sqrt_d).exp();
    } else {
        let theta = delta * sqrt_d / 2.0;
        let c = C64::new(theta.cos() - 1.0, 0.0);
        let s = C64::new(0.0, sign * theta.sin());
        u[(0, 0)] += c;
        u[(jj, jj)] += c;
        u[(0, jj)] += s;
        u[(jj, 0)] += s;
    }
    u
}

/// One weak step with independently chosen correction strength: the POVM
/// at the protocol's epsilon followed by exp(i delta H_Cj) per outcome.
pub fn weak_policy_step(p: &WeakProtocol, rho: &CMatrix, delta: f64) -> Result<CMatrix> {
    let id = identity(1 << p.k);
    let d = p.syndrome_dim();
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for (j, m) in p.povm.iter().enumerate() {
        let u = correction_unitary(d, j, delta);
        let op = tensor(&id, &(u * m));
        out += &op * rho * op.adjoint();
    }
    Ok(out)
}

/// Golden-section maximization of the trivial-syndrome overlap of the
/// weak step over the correction strength delta.
///
/// The post-measurement states sigma_j = M_j rho M_j^dag are computed once;
/// each candidate delta then only needs row 0 of the closed-form correction
/// unitaries, which touch two syndrome components.
pub fn optimal_policy_delta(p: &WeakProtocol, rho: &CMatrix) -> Result<f64> {
    let d = p.syndrome_dim();
    let info = 1usize << p.k;
    let id = identity(info);
    let sigmas: Vec<CMatrix> = p
        .povm
        .iter()
        .map(|m| {
            let op = tensor(&id, m);
            &op * rho * op.adjoint()
        })
        .collect();
    let sqrt_d = (d as f64).sqrt();
    let score = |delta: f64| -> f64 {
        let mut total = 0.0;
        for (j, sigma) in sigmas.iter().enumerate() {
            let jj = j % d;
            let sign = if j < d { 1.0 } else { -1.0 };
            // Row 0 of the correction unitary: entries at syndromes 0, jj.
            let (u00, u0j) = if jj == 0 {
                (C64::new(0.0, sign * delta * sqrt_d).exp(), C64::new(0.0, 0.0))
            } else {
                let theta = delta * sqrt_d / 2.0;
                (
                    C64::new(theta.cos(), 0.0),
                    C64::new(0.0, sign * theta.sin()),
                )
            };
            for b in 0..info {
                let i0 = b * d;
                let ij = b * d + jj;
                let mut amp = u00 * sigma[(i0, i0)] * u00.conj();
                if jj != 0 {
                    amp += u00 * sigma[(i0, ij)] * u0j.conj()
                        + u0j * sigma[(ij, i0)] * u00.conj()
                        + u0j * sigma[(ij, ij)] * u0j.conj();
                }
                total += amp.re;
            }
        }
        total
    };
    let (mut a, mut b) = (0.0f64, 10.0 * p.epsilon.max(1e-6));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 {
        let c = b - phi * (b - a);
        let e = a + phi * (b - a);
        if score(c) < score(e) {
            a = c;
        } else {
            b = e;
        }
    }
    Ok(0.5 * (a + b))
}

/// Discrete weak-step simulation with a per-step correction policy,
/// usable for codes whose baseline device is too large to dilate.
#[allow(clippy::too_many_arguments)]
pub fn policy_simulate(
    code: &StabilizerCode,
    model: &NoiseModel,
    kappa: f64,
    policy: DeltaPolicy,
    rho0: &CMatrix,
    psi0: &CVector,
    steps: usize,
    dt: f64,
    stride: usize,
) -> Result<SimulationTrace> {
    let epsilon = (kappa * dt).sqrt();
    if epsilon >= 0.3 {
        return Err(CtqecError::InvalidParameter(format!(
            "epsilon = sqrt(kappa dt) = {epsilon} exceeds the 0.3 weak-step cap"
        )));
    }
    check_density(rho0, 1e-10)?;
    let protocol = WeakProtocol::build(code.n, code.k, epsilon)?;
    let noise = NoiseStep::build(model, code, dt)?;
    let stride = stride.max(1);

    let mut rho = rho0.clone();
    let mut trace = SimulationTrace::new(false);
    let (f0, o0) = observables(code, &rho, psi0)?;
    trace.times.push(0.0);
    trace.codeword_fidelity.push(f0);
    trace.correctable_overlap.push(o0);
    for step in 1..=steps {
        rho = noise.apply(&rho);
        let delta = match policy {
            DeltaPolicy::Constant => epsilon,
            DeltaPolicy::Optimal => optimal_policy_delta(&protocol, &rho)?,
        };
        rho = weak_policy_step(&protocol, &rho, delta)?;
        if step % stride == 0 || step == steps {
            let (f, o) = observables(code, &rho, psi0)?;
            trace.times.push(step as f64 * dt);
            trace.codeword_fidelity.push(f);
            trace.correctable_overlap.push(o);
        }
    }
    Ok(trace)
}

/// Analytic no-correction oracle for the three-qubit bit-flip code:
/// each qubit stays unflipped with probability p(t) = (1 + e^{-2 lambda t})/2.
pub fn bit_flip_analytic_weights(lambda: f64, t: f64) -> [f64; 4] {
    let p = (1.0 + (-2.0 * lambda * t).exp()) / 2.0;
    let q = 1.0 - p;
    [
        p * p * p,
        3.0 * p * p * q,
        3.0 * p * q * q,
        q * q * q,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::optimal_delta;
    use crate::linalg::{matrix_exp, max_norm, ExpMode};
    use crate::stabilizer::BuiltinCode;

    fn bit_flip_code() -> StabilizerCode {
        StabilizerCode::builtin(BuiltinCode::ThreeQubitBitFlip)
    }

    #[test]
    fn zero_rate_gives_zero_generator() {
        let code = bit_flip_code();
        let model = NoiseModel::bit_flip(0.0, 3).unwrap();
        let gen = lindblad_generator(&model, &code, Basis::Physical).unwrap();
        assert_eq!(max_norm(&gen.transfer), 0.0);
    }

    #[test]
    fn single_qubit_polarization_decay() {
        // d<Z>/dt = -2 lambda <Z> for a single qubit under bit flips.
        let code = StabilizerCode::build(1, 1, vec![], None).unwrap();
        let model = NoiseModel::bit_flip(0.7, 1).unwrap();
        let gen = lindblad_generator(&model, &code, Basis::Physical).unwrap();
        let z = crate::pauli::Pauli::Z.matrix();
        let rho = CMatrix::from_fn(2, 2, |r, c| {
            if r == 0 && c == 0 {
                C64::new(0.9, 0.0)
            } else if r == 1 && c == 1 {
                C64::new(0.1, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let dz = (&z * gen.apply(&rho)).trace().re;
        let expect = -2.0 * 0.7 * (&z * &rho).trace().re;
        assert!((dz - expect).abs() < 1e-12);
    }

    #[test]
    fn corrected_basis_codespace_leak_rate() {
        // Weight leaves the trivial syndrome at rate 3 lambda.
        let code = bit_flip_code();
        let model = NoiseModel::bit_flip(0.5, 3).unwrap();
        let gen = lindblad_generator(&model, &code, Basis::Corrected).unwrap();
        let psi = logical_zero(&code);
        let rho = &psi * psi.adjoint();
        let d_fid = (psi.adjoint() * gen.apply(&rho) * &psi)[(0, 0)].re;
        assert!((d_fid + 3.0 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn master_trivial_evolution() {
        let code = bit_flip_code();
        let zero = SuperoperatorGenerator::zero(8);
        let psi = logical_zero(&code);
        let rho0 = &psi * psi.adjoint();
        let trace =
            integrate_master(&zero, &zero, &code, &rho0, &psi, 1.0, 0.01, 10).unwrap();
        assert!(trace
            .codeword_fidelity
            .iter()
            .all(|&f| (f - 1.0).abs() < 1e-12));
    }

    #[test]
    fn master_matches_weight_ode_without_correction() {
        let code = bit_flip_code();
        let lambda = 1.0;
        let model = NoiseModel::bit_flip(lambda, 3).unwrap();
        let noise = lindblad_generator(&model, &code, Basis::Corrected).unwrap();
        let zero = SuperoperatorGenerator::zero(8);
        let psi = logical_zero(&code);
        let rho0 = &psi * psi.adjoint();
        let trace =
            integrate_master(&noise, &zero, &code, &rho0, &psi, 1.0, 1e-3, 100).unwrap();
        for (t, f) in trace.times.iter().zip(&trace.codeword_fidelity) {
            let w = bit_flip_analytic_weights(lambda, *t);
            assert!((f - w[0]).abs() < 1e-6, "t={t}: {f} vs {}", w[0]);
        }
        // Correctable overlap tracks w0 + w1.
        for (t, o) in trace.times.iter().zip(&trace.correctable_overlap) {
            let w = bit_flip_analytic_weights(lambda, *t);
            assert!((o - w[0] - w[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn master_fourth_order_convergence() {
        let code = bit_flip_code();
        let model = NoiseModel::bit_flip(1.0, 3).unwrap();
        let noise = lindblad_generator(&model, &code, Basis::Corrected).unwrap();
        let correct = correction_generator(3, 1, 20.0).unwrap();
        let psi = logical_zero(&code);
        let rho0 = &psi * psi.adjoint();
        let run = |dt: f64| {
            integrate_master(&noise, &correct, &code, &rho0, &psi, 0.5, dt, usize::MAX)
                .unwrap()
                .endpoint_fidelity()
        };
        let reference = run(0.0005);
        let e1 = (run(0.02) - reference).abs();
        let e2 = (run(0.01) - reference).abs();
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn weights_zero_noise_is_stationary() {
        let trace =
            integrate_weights(0.0, 50.0, DeltaPolicy::Constant, 1.0, 1e-3, 100).unwrap();
        assert!(trace.codeword_fidelity.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn weights_no_correction_matches_analytic() {
        let lambda = 1.0;
        let trace =
            integrate_weights(lambda, 0.0, DeltaPolicy::Constant, 2.0, 1e-4, 1000).unwrap();
        for (t, ws) in trace.times.iter().zip(trace.weights.as_ref().unwrap()) {
            let expect = bit_flip_analytic_weights(lambda, *t);
            for j in 0..4 {
                assert!(
                    (ws[j] - expect[j]).abs() < 1e-8,
                    "t={t} j={j}: {} vs {}",
                    ws[j],
                    expect[j]
                );
            }
        }
    }

    #[test]
    fn observables_class_values() {
        let code = bit_flip_code();
        let psi = logical_zero(&code);
        let rho0 = &psi * psi.adjoint();
        let (f, o) = observables(&code, &rho0, &psi).unwrap();
        assert!((f - 1.0).abs() < 1e-12 && (o - 1.0).abs() < 1e-12);

        // Single-error class: fidelity 0, overlap 1.
        let flips: Vec<CMatrix> = code.correctable_errors[1..]
            .iter()
            .map(|e| code.to_corrected(&e.matrix()).unwrap())
            .collect();
        let rho1 = flips
            .iter()
            .fold(CMatrix::zeros(8, 8), |acc, e| acc + e * &rho0 * e.adjoint())
            .map(|z| z / 3.0);
        let (f, o) = observables(&code, &rho1, &psi).unwrap();
        assert!(f.abs() < 1e-12 && (o - 1.0).abs() < 1e-12);

        // Two-error class: both vanish.
        let mut rho2 = CMatrix::zeros(8, 8);
        for (i, a) in flips.iter().enumerate() {
            for b in &flips[i + 1..] {
                let op = a * b;
                rho2 += &op * &rho0 * op.adjoint();
            }
        }
        let rho2 = rho2.map(|z| z / 3.0);
        let (f, o) = observables(&code, &rho2, &psi).unwrap();
        assert!(f.abs() < 1e-12 && o.abs() < 1e-12);
    }

    #[test]
    fn discrete_pure_noise_matches_master() {
        let code = bit_flip_code();
        let lambda = 1.0;
        let model = NoiseModel::bit_flip(lambda, 3).unwrap();
        let psi = logical_zero(&code);
        let rho0 = &psi * psi.adjoint();
        let trace =
            discrete_step_simulate(&code, &model, 0.0, &rho0, &psi, 200, 1e-3, 200).unwrap();
        let w = bit_flip_analytic_weights(lambda, 0.2);
        assert!((trace.endpoint_fidelity() - w[0]).abs() < 1e-8);
    }

    #[test]
    fn discrete_epsilon_cap() {
        let code = bit_flip_code();
        let model = NoiseModel::bit_flip(1.0, 3).unwrap();
        let psi = logical_zero(&code);
        let rho0 = &psi * psi.adjoint();
        assert!(
            discrete_step_simulate(&code, &model, 1000.0, &rho0, &psi, 1, 0.1, 1).is_err()
        );
    }

    #[test]
    fn discrete_approaches_master() {
        let code = bit_flip_code();
        let lambda = 1.0;
        let kappa = 100.0;
        let model = NoiseModel::bit_flip(lambda, 3).unwrap();
        let noise = lindblad_generator(&model, &code, Basis::Corrected).unwrap();
        let correct = correction_generator(3, 1, kappa).unwrap();
        let psi = logical_zero(&code);
        let rho0 = &psi * psi.adjoint();
        let t_end = 0.2;
        let master =
            integrate_master(&noise, &correct, &code, &rho0, &psi, t_end, 1e-3, usize::MAX)
                .unwrap()
                .endpoint_fidelity();
        let dt = 1e-4;
        let steps = (t_end / dt).round() as usize;
        let disc = discrete_step_simulate(&code, &model, kappa, &rho0, &psi, steps, dt, steps)
            .unwrap()
            .endpoint_fidelity();
        assert!((disc - master).abs() < 2e-3, "disc {disc} master {master}");
    }

    #[test]
    fn policy_step_constant_matches_effective_channel() {
        // delta = epsilon reduces the policy step to the composed channel.
        let code = bit_flip_code();
        let p = WeakProtocol::build(3, 1, 0.1).unwrap();
        let psi = logical_zero(&code);
        let mut rho = &psi * psi.adjoint();
        let e = code.to_corrected(&code.correctable_errors[1].matrix()).unwrap();
        rho = (&e * &rho * e.adjoint()).map(|z| z * 0.4) + rho.map(|z| z * 0.6);
        let via_policy = weak_policy_step(&p, &rho, 0.1).unwrap();
        let via_channel = p.effective_channel().apply(&rho);
        // Same POVM, but the channel uses the exact polar unitaries while
        // the policy step exponentiates the second-order generators.
        assert!(max_norm(&(via_policy - via_channel)) < 5.0 * 0.1f64.powi(3));
    }

    #[test]
    fn optimal_policy_delta_matches_weight_formula() {
        // On a weight-model state the argmax matches the closed form.
        let code = bit_flip_code();
        let p = WeakProtocol::build(3, 1, 0.1).unwrap();
        let psi = logical_zero(&code);
        let rho0 = &psi * psi.adjoint();
        let flips: Vec<CMatrix> = code.correctable_errors[1..]
            .iter()
            .map(|e| code.to_corrected(&e.matrix()).unwrap())
            .collect();
        let rho1 = flips
            .iter()
            .fold(CMatrix::zeros(8, 8), |acc, e| acc + e * &rho0 * e.adjoint())
            .map(|z| z / 3.0);
        let w = WeightVector::new([0.8, 0.2, 0.0, 0.0]).unwrap();
        let rho = rho0.map(|z| z * 0.8) + rho1.map(|z| z * 0.2);
        let numeric = optimal_policy_delta(&p, &rho).unwrap();
        let closed = optimal_delta(&w, 0.1).unwrap();
        assert!(
            (numeric - closed).abs() < 5e-3,
            "numeric {numeric} closed {closed}"
        );
    }

    #[test]
    fn correction_unitary_matches_matrix_exp() {
        let p = WeakProtocol::build(3, 1, 0.1).unwrap();
        for (j, h) in p.correction_hams.iter().enumerate() {
            for delta in [0.0, 0.07, 0.3] {
                let closed = correction_unitary(4, j, delta);
                let exact = matrix_exp(h, delta, ExpMode::Unitary).unwrap();
                assert!(max_norm(&(closed - exact)) < 1e-12, "j={j} delta={delta}");
            }
        }
    }
}
