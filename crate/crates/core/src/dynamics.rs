//! Time evolution: exact piecewise-constant unitary propagation and a
//! Lindblad master-equation solver with amplitude and phase reservoirs.
//!
//! Unitary segments use the eigendecomposition of the (time-independent)
//! Hamiltonian, so there is no step error in closed evolution. The open
//! system integrator is an adaptive Dormand-Prince 5(4) pair on the density
//! matrix with relative tolerance [`INTEG_TOL`]; Hermiticity is restored by
//! symmetrization after every accepted step, the trace is monitored, and
//! positivity is spot-checked at sample times (monitored, not enforced).
//!
//! The right-hand side is applied through a sparse representation of the
//! (banded) Hamiltonian and jump operators, which keeps one evaluation at
//! O(nnz·N + N²) instead of O(N³).

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Result, SimError};
use crate::hamiltonians::{embed_oscillator, Hamiltonian, NoiseParams};
use crate::hilbert::{
    make_create, make_destroy, number_operator, FockSpace, OscillatorOperator, SpinOscState,
};
use crate::linalg;

/// Relative tolerance of the adaptive Lindblad integrator.
pub const INTEG_TOL: f64 = 1e-8;
/// Absolute floor in the error norm.
const ATOL: f64 = 1e-12;
/// Density eigenvalues below −100·INTEG_TOL abort the run.
const POSITIVITY_FLOOR: f64 = -100.0 * INTEG_TOL;
/// Trace drift beyond this aborts the run.
const TRACE_TOL: f64 = 100.0 * INTEG_TOL;

/// Density matrix on the 2·dim composite space.
#[derive(Debug, Clone)]
pub struct SpinOscDensity {
    matrix: Array2<C64>,
    space: FockSpace,
}

impl SpinOscDensity {
    pub fn new(matrix: Array2<C64>, space: FockSpace) -> Result<Self> {
        if matrix.nrows() != 2 * space.dim() || matrix.ncols() != 2 * space.dim() {
            return Err(SimError::DimensionMismatch(format!(
                "density is {}x{}, expected {}",
                matrix.nrows(),
                matrix.ncols(),
                2 * space.dim()
            )));
        }
        let tr: C64 = matrix.diag().iter().sum();
        if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-9 {
            return Err(SimError::Validation(format!("density trace {tr} differs from 1")));
        }
        if linalg::hermiticity_defect(&matrix) > 1e-8 {
            return Err(SimError::Validation("density is not Hermitian".into()));
        }
        Ok(Self { matrix, space })
    }

    pub fn from_pure(state: &SpinOscState) -> Self {
        let n = state.amplitudes().len();
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = state.amplitudes()[i] * state.amplitudes()[j].conj();
            }
        }
        Self { matrix: m, space: state.space() }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|z| z.re).sum()
    }

    /// Probability of the spin being |↓⟩.
    pub fn p_down(&self) -> f64 {
        let n = self.space.dim();
        (0..n).map(|k| self.matrix[[k, k]].re).sum()
    }

    /// Oscillator state traced over the spin.
    pub fn oscillator_reduced(&self) -> Array2<C64> {
        let n = self.space.dim();
        let mut out = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = self.matrix[[i, j]] + self.matrix[[n + i, n + j]];
            }
        }
        out
    }

    /// Number-state populations of the reduced oscillator.
    pub fn fock_populations(&self) -> Vec<f64> {
        let n = self.space.dim();
        (0..n)
            .map(|k| self.matrix[[k, k]].re + self.matrix[[n + k, n + k]].re)
            .collect()
    }

    /// ⟨n̂⟩ of the reduced oscillator.
    pub fn mean_n(&self) -> f64 {
        self.fock_populations()
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// Oscillator coherence ⟨m|ρ_osc|n⟩ of the reduced state.
    pub fn oscillator_coherence(&self, m: usize, n: usize) -> C64 {
        let d = self.space.dim();
        self.matrix[[m, n]] + self.matrix[[d + m, d + n]]
    }

    /// Smallest eigenvalue; monitoring hook for positivity.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let vals = linalg::eigvalsh_hermitian(&self.matrix)?;
        Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
    }
}

/// An oscillator jump operator with its rate (rad/s): contributes
/// Γ(LρL† − ½{L†L, ρ}) to the master equation.
#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub op: OscillatorOperator,
    pub rate: f64,
}

impl JumpOperator {
    pub fn new(op: OscillatorOperator, rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(SimError::Validation(format!("jump rate must be >= 0, got {rate}")));
        }
        Ok(Self { op, rate })
    }
}

/// The standard reservoir set: amplitude (â†, â at Γ_A) and phase (â†â at
/// Γ_Ph). Zero-rate channels are omitted.
pub fn jump_operators(noise: &NoiseParams, space: FockSpace) -> Vec<JumpOperator> {
    let mut jumps = Vec::new();
    if noise.gamma_amp > 0.0 {
        jumps.push(JumpOperator { op: make_create(space), rate: noise.gamma_amp });
        jumps.push(JumpOperator { op: make_destroy(space), rate: noise.gamma_amp });
    }
    if noise.gamma_phase > 0.0 {
        jumps.push(JumpOperator { op: number_operator(space), rate: noise.gamma_phase });
    }
    jumps
}

/// Sampled evolution record. `p_down` holds P(↓) per sample.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: TrajectoryStates,
    pub p_down: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum TrajectoryStates {
    Pure(Vec<SpinOscState>),
    Density(Vec<SpinOscDensity>),
}

impl Trajectory {
    pub fn final_pure(&self) -> Option<&SpinOscState> {
        match &self.states {
            TrajectoryStates::Pure(v) => v.last(),
            TrajectoryStates::Density(_) => None,
        }
    }

    pub fn final_density(&self) -> Option<&SpinOscDensity> {
        match &self.states {
            TrajectoryStates::Pure(_) => None,
            TrajectoryStates::Density(v) => v.last(),
        }
    }
}

fn sample_times(duration: f64, sample_count: usize) -> Result<Vec<f64>> {
    if !(duration >= 0.0) {
        return Err(SimError::Validation(format!("duration must be >= 0, got {duration}")));
    }
    if sample_count < 2 {
        return Err(SimError::Validation("need at least 2 samples".into()));
    }
    let m = sample_count - 1;
    Ok((0..sample_count)
        .map(|k| duration * k as f64 / m as f64)
        .collect())
}

/// ψ(t) = exp(−iHt)ψ₀, sampled on a uniform grid including both endpoints.
pub fn evolve_unitary(
    h: &Hamiltonian,
    psi0: &SpinOscState,
    duration: f64,
    sample_count: usize,
) -> Result<Trajectory> {
    h.space().check_same(&psi0.space(), "evolve_unitary")?;
    let times = sample_times(duration, sample_count)?;
    let prop = linalg::HermitianExp::new(h.matrix())?;
    let mut states = Vec::with_capacity(sample_count);
    let mut p_down = Vec::with_capacity(sample_count);
    for &t in &times {
        let amps = prop.apply(psi0.amplitudes(), t);
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::Integration(format!(
                "norm drifted to {norm} at t = {t}"
            )));
        }
        let st = SpinOscState::new(amps, h.space())?;
        p_down.push(st.p_down());
        states.push(st);
    }
    Ok(Trajectory { times, states: TrajectoryStates::Pure(states), p_down })
}

/// Sparse row representation of a composite-space operator.
struct SparseOp {
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    fn from_dense(m: &Array2<C64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter_map(|j| {
                        let v = m[[i, j]];
                        (v != C64::new(0.0, 0.0)).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// out = self · rho (rho dense, standard layout).
    fn apply_left(&self, rho: &Array2<C64>, out: &mut Array2<C64>) {
        let n = rho.ncols();
        for (i, row) in self.rows.iter().enumerate() {
            let mut dst = out.row_mut(i);
            let dst = dst.as_slice_mut().expect("standard layout");
            dst.fill(C64::new(0.0, 0.0));
            for &(k, v) in row {
                let src = rho.row(k);
                let src = src.as_slice().expect("standard layout");
                for j in 0..n {
                    dst[j] += v * src[j];
                }
            }
        }
    }
}

fn dagger_into(src: &Array2<C64>, dst: &mut Array2<C64>) {
    let (r, c) = (src.nrows(), src.ncols());
    for i in 0..c {
        for j in 0..r {
            dst[[i, j]] = src[[j, i]].conj();
        }
    }
}

/// Lindblad right-hand side with preassembled sparse operators:
/// dρ/dt = −i(H_eff ρ − ρ H_eff†) + Σ Γ L ρ L†, H_eff = H − (i/2)ΣΓL†L.
struct LindbladRhs {
    h_eff: SparseOp,
    jumps: Vec<(SparseOp, f64)>,
    size: usize,
}

struct RhsScratch {
    a: Array2<C64>,
    b: Array2<C64>,
    c: Array2<C64>,
}

impl LindbladRhs {
    fn new(h: &Hamiltonian, jumps: &[JumpOperator]) -> Result<Self> {
        let space = h.space();
        let mut h_eff = h.matrix().clone();
        let mut composite_jumps = Vec::new();
        for j in jumps {
            j.op.space().check_same(&space, "jump operator")?;
            let l = embed_oscillator(j.op.matrix());
            let ldl = linalg::dagger(&l).dot(&l);
            h_eff = h_eff + ldl.mapv(|v| v * C64::new(0.0, -0.5 * j.rate));
            composite_jumps.push((SparseOp::from_dense(&l), j.rate));
        }
        Ok(Self {
            h_eff: SparseOp::from_dense(&h_eff),
            jumps: composite_jumps,
            size: 2 * space.dim(),
        })
    }

    fn scratch(&self) -> RhsScratch {
        let n = self.size;
        RhsScratch {
            a: Array2::zeros((n, n)),
            b: Array2::zeros((n, n)),
            c: Array2::zeros((n, n)),
        }
    }

    /// out = dρ/dt for Hermitian rho.
    fn eval(&self, rho: &Array2<C64>, out: &mut Array2<C64>, sc: &mut RhsScratch) {
        let n = self.size;
        // A = H_eff·ρ; the anti-commutator halves ride along in H_eff, and
        // ρ·H_eff† = (H_eff·ρ)† because ρ is Hermitian.
        self.h_eff.apply_left(rho, &mut sc.a);
        let mi = C64::new(0.0, -1.0);
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = mi * (sc.a[[i, j]] - sc.a[[j, i]].conj());
            }
        }
        for (l, rate) in &self.jumps {
            // Γ·LρL† = Γ·(L(Lρ)†)†
            l.apply_left(rho, &mut sc.a);
            dagger_into(&sc.a, &mut sc.b);
            l.apply_left(&sc.b, &mut sc.c);
            let g = *rate;
            for i in 0..n {
                for j in 0..n {
                    out[[i, j]] += sc.c[[j, i]].conj() * g;
                }
            }
        }
    }
}

/// Dormand-Prince 5(4) tableau (the RHS is autonomous, so stage times are
/// not needed).
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Integrator {
    rhs: LindbladRhs,
    k: Vec<Array2<C64>>,
    ytmp: Array2<C64>,
    scratch: RhsScratch,
    /// FSAL: k[6] of an accepted step is f(y_new) and becomes the next k[0].
    k1_valid: bool,
}

impl Integrator {
    fn new(rhs: LindbladRhs) -> Self {
        let n = rhs.size;
        let scratch = rhs.scratch();
        Self {
            rhs,
            k: (0..7).map(|_| Array2::zeros((n, n))).collect(),
            ytmp: Array2::zeros((n, n)),
            scratch,
            k1_valid: false,
        }
    }

    fn accept(&mut self) {
        self.k.swap(0, 6);
        self.k1_valid = true;
    }

    /// One trial step; fills `out` with the 5th-order result and returns the
    /// scaled error norm (≤ 1 means accept).
    ///
    /// The error is measured against the overall matrix scale: for a
    /// trace-normalized density an elementwise relative tolerance would let
    /// the near-zero entries dictate the step size.
    fn step(&mut self, y: &Array2<C64>, h: f64, out: &mut Array2<C64>) -> f64 {
        if !self.k1_valid {
            let (k0, _) = self.k.split_at_mut(1);
            self.rhs.eval(y, &mut k0[0], &mut self.scratch);
            // k[0] = f(y) stays valid for retries of the same y
            self.k1_valid = true;
        }
        let ys = y.as_slice().expect("standard layout");
        for stage in 1..7 {
            let coeffs: &[f64] = if stage < 6 { &DP_A[stage - 1] } else { &DP_B5[..6] };
            {
                let terms: Vec<(C64, &[C64])> = coeffs
                    .iter()
                    .enumerate()
                    .take(stage.min(6))
                    .filter(|(_, &a)| a != 0.0)
                    .map(|(j, &a)| (C64::new(a * h, 0.0), self.k[j].as_slice().unwrap()))
                    .collect();
                let ytmp = self.ytmp.as_slice_mut().unwrap();
                for (i, t) in ytmp.iter_mut().enumerate() {
                    let mut acc = ys[i];
                    for (f, k) in &terms {
                        acc += *f * k[i];
                    }
                    *t = acc;
                }
            }
            let (head, tail) = self.k.split_at_mut(stage);
            let _ = head;
            self.rhs.eval(&self.ytmp, &mut tail[0], &mut self.scratch);
        }
        // 5th-order solution: the stage-6 argument already equals it
        out.assign(&self.ytmp);
        // scaled norm of the 5th/4th difference
        let ymax = y.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let scale = ATOL + INTEG_TOL * ymax;
        let terms: Vec<(C64, &[C64])> = (0..7)
            .filter(|&m| DP_B5[m] - DP_B4[m] != 0.0)
            .map(|m| {
                (
                    C64::new((DP_B5[m] - DP_B4[m]) * h, 0.0),
                    self.k[m].as_slice().unwrap(),
                )
            })
            .collect();
        let len = ys.len();
        let mut acc = 0.0_f64;
        for i in 0..len {
            let mut e = C64::new(0.0, 0.0);
            for (f, k) in &terms {
                e += *f * k[i];
            }
            let r = e.norm() / scale;
            acc += r * r;
        }
        (acc / len as f64).sqrt()
    }
}

fn symmetrize(y: &mut Array2<C64>) {
    let n = y.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (y[[i, j]] + y[[j, i]].conj()) * 0.5;
            y[[i, j]] = avg;
            y[[j, i]] = avg.conj();
        }
        let d = y[[i, i]].re;
        y[[i, i]] = C64::new(d, 0.0);
    }
}

/// Integrate the Lindblad equation, invoking `observer(t, ρ)` at each sample
/// time. Lower-memory building block behind [`evolve_lindblad`]: nothing is
/// retained between samples.
pub fn evolve_lindblad_observe<F>(
    h: &Hamiltonian,
    jumps: &[JumpOperator],
    rho0: &SpinOscDensity,
    duration: f64,
    sample_count: usize,
    mut observer: F,
) -> Result<()>
where
    F: FnMut(f64, &SpinOscDensity) -> Result<()>,
{
    h.space().check_same(&rho0.space(), "evolve_lindblad")?;
    let times = sample_times(duration, sample_count)?;
    let rhs = LindbladRhs::new(h, jumps)?;
    let mut integ = Integrator::new(rhs);
    let mut y = if rho0.matrix().is_standard_layout() {
        rho0.matrix().clone()
    } else {
        Array2::from_shape_fn(rho0.matrix().dim(), |(i, j)| rho0.matrix()[[i, j]])
    };
    let mut out = y.clone();

    // initial step size from the RHS magnitude
    let mut f0 = y.clone();
    {
        let mut sc = integ.rhs.scratch();
        integ.rhs.eval(&y, &mut f0, &mut sc);
    }
    let ynorm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let fnorm = f0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut h_step = if fnorm > 0.0 && duration > 0.0 {
        (0.01 * (ynorm + ATOL) / fnorm).min(duration)
    } else {
        duration.max(f64::MIN_POSITIVE)
    };

    let positivity_stride = (sample_count / 8).max(1);
    let mut t = 0.0_f64;
    let mut steps: u64 = 0;
    const MAX_STEPS: u64 = 20_000_000;

    for (idx, &ts) in times.iter().enumerate() {
        while t < ts {
            let clipped = h_step.min(ts - t);
            let err = integ.step(&y, clipped, &mut out);
            steps += 1;
            if steps > MAX_STEPS {
                return Err(SimError::Integration(format!(
                    "step budget exhausted at t = {t:.3e} s"
                )));
            }
            let factor = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            if err <= 1.0 {
                t += clipped;
                std::mem::swap(&mut y, &mut out);
                symmetrize(&mut y);
                integ.accept();
                // grow from the nominal step, not the sample-clipped one
                h_step = h_step.max(clipped) * factor.min(5.0);
            } else {
                h_step = clipped * factor;
                if h_step < duration * 1e-14 {
                    return Err(SimError::Integration(format!(
                        "step control failed at t = {t:.3e} s (err = {err:.3e})"
                    )));
                }
            }
        }
        let snapshot = SpinOscDensity { matrix: y.clone(), space: h.space() };
        let tr = snapshot.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(SimError::Integration(format!(
                "trace drifted to {tr} at t = {ts:.3e} s"
            )));
        }
        if idx % positivity_stride == 0 || idx + 1 == times.len() {
            let min_eig = snapshot.min_eigenvalue()?;
            if min_eig < POSITIVITY_FLOOR {
                return Err(SimError::Integration(format!(
                    "density lost positivity (min eigenvalue {min_eig:.3e}) at t = {ts:.3e} s"
                )));
            }
        }
        observer(ts, &snapshot)?;
    }
    Ok(())
}

/// ρ(t) under dρ/dt = −i[H,ρ] + Σ_j Γ_j(L_jρL_j† − ½{L_j†L_j, ρ}), sampled on
/// a uniform grid including both endpoints.
pub fn evolve_lindblad(
    h: &Hamiltonian,
    jumps: &[JumpOperator],
    rho0: &SpinOscDensity,
    duration: f64,
    sample_count: usize,
) -> Result<Trajectory> {
    let mut times = Vec::with_capacity(sample_count);
    let mut states = Vec::with_capacity(sample_count);
    let mut p_down = Vec::with_capacity(sample_count);
    evolve_lindblad_observe(h, jumps, rho0, duration, sample_count, |t, rho| {
        times.push(t);
        p_down.push(rho.p_down());
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(Trajectory { times, states: TrajectoryStates::Density(states), p_down })
}

/// Incoherent spin reset: ρ → |↓⟩⟨↓| ⊗ Tr_spin(ρ). Oscillator populations and
/// coherences survive; spin-oscillator correlations do not.
pub fn spin_repump(rho: &SpinOscDensity) -> SpinOscDensity {
    let n = rho.space().dim();
    let osc = rho.oscillator_reduced();
    let mut m = Array2::<C64>::zeros((2 * n, 2 * n));
    m.slice_mut(s![..n, ..n]).assign(&osc);
    SpinOscDensity { matrix: m, space: rho.space() }
}

/// ⟨H⟩ for a pure state.
pub fn expectation_energy(h: &Hamiltonian, psi: &SpinOscState) -> f64 {
    let hv = h.matrix().dot(psi.amplitudes());
    psi.amplitudes()
        .iter()
        .zip(hv.iter())
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}
