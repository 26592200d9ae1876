//! Spin⊗oscillator Hamiltonians.
//!
//! All energies are angular frequencies (ħ = 1); matrices act on the
//! composite space with the spin index outermost (↓ block first). The
//! builders cover the Jaynes-Cummings coupling, the engineered ladder drives
//! built from a Bogoliubov-transformed lowering operator, the physical
//! bichromatic sideband drive (with optional finite-wavelength corrections to
//! all orders of the Lamb-Dicke parameter), and oscillator detuning terms in
//! both the energy and the squeezed basis.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Result, SimError};
use crate::hilbert::{
    make_destroy, number_operator, FockSpace, OscillatorOperator, SpinOscState, SqueezeParams,
    TOL,
};
use crate::linalg;

/// Rabi frequency (rad/s) and phase of one drive tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    omega: f64,
    phase: f64,
}

impl DriveParams {
    pub fn new(omega: f64, phase: f64) -> Result<Self> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(SimError::Validation(format!(
                "Rabi frequency must be finite and >= 0, got {omega}"
            )));
        }
        Ok(Self { omega, phase })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Dimensionless Lamb-Dicke parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambDicke {
    eta: f64,
}

impl LambDicke {
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 || eta >= 1.0 {
            return Err(SimError::Validation(format!(
                "Lamb-Dicke parameter must lie in [0, 1), got {eta}"
            )));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// A Hermitian matrix on the 2·dim composite space.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    matrix: Array2<C64>,
    space: FockSpace,
    label: String,
}

impl Hamiltonian {
    pub(crate) fn new(matrix: Array2<C64>, space: FockSpace, label: impl Into<String>) -> Self {
        let h = Self { matrix, space, label: label.into() };
        debug_assert!(
            linalg::hermiticity_defect(&h.matrix) < TOL,
            "non-Hermitian construction: {}",
            h.label
        );
        h
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    /// Sum of two Hamiltonians on the same space (e.g. a drive plus a
    /// detuning term).
    pub fn add(&self, other: &Hamiltonian) -> Result<Hamiltonian> {
        self.space.check_same(&other.space, "Hamiltonian sum")?;
        Ok(Hamiltonian::new(
            &self.matrix + &other.matrix,
            self.space,
            format!("{}+{}", self.label, other.label),
        ))
    }
}

/// Trap-drive detuning and reservoir rates, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub delta: f64,
    pub gamma_amp: f64,
    pub gamma_phase: f64,
}

impl NoiseParams {
    pub fn new(delta: f64, gamma_amp: f64, gamma_phase: f64) -> Result<Self> {
        if !delta.is_finite() || !gamma_amp.is_finite() || !gamma_phase.is_finite() {
            return Err(SimError::Validation("noise parameters must be finite".into()));
        }
        if gamma_amp < 0.0 || gamma_phase < 0.0 {
            return Err(SimError::Validation("reservoir rates must be >= 0".into()));
        }
        Ok(Self { delta, gamma_amp, gamma_phase })
    }

    pub fn none() -> Self {
        Self { delta: 0.0, gamma_amp: 0.0, gamma_phase: 0.0 }
    }
}

/// Static experiment metadata shared by schedule generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    /// Trap secular frequency (rad/s); metadata only, simulations run in the
    /// rotating frame.
    pub trap_frequency: f64,
    pub lamb_dicke: LambDicke,
    pub squeeze: SqueezeParams,
    pub space: FockSpace,
}

/// Which of the two engineered drives to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineeredSign {
    /// K̂†σ̂₊ + h.c. — climbs the ladder from |↓⟩.
    Plus,
    /// K̂σ̂₊ + h.c. — climbs the ladder from |↑⟩.
    Minus,
}

/// Sideband operator construction for the bichromatic drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdOrder {
    /// First-order sideband operators â, â†.
    Linear,
    /// Resonant first-sideband part of exp(iη(â+â†)) to all orders in η.
    AllOrders,
}

/// Basis in which a sideband matrix element is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SidebandBasis {
    Fock,
    Squeezed(SqueezeParams),
}

const SPIN_DIM: usize = 2;

/// kron(spin, osc) with the spin index outermost.
fn kron_spin(spin: &[[C64; 2]; 2], osc: &Array2<C64>) -> Array2<C64> {
    let n = osc.nrows();
    let mut out = Array2::<C64>::zeros((SPIN_DIM * n, SPIN_DIM * n));
    for s in 0..SPIN_DIM {
        for s2 in 0..SPIN_DIM {
            let w = spin[s][s2];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    let v = osc[[i, j]];
                    if v != C64::new(0.0, 0.0) {
                        out[[s * n + i, s2 * n + j]] = w * v;
                    }
                }
            }
        }
    }
    out
}

fn zero_spin() -> [[C64; 2]; 2] {
    [[C64::new(0.0, 0.0); 2]; 2]
}

/// σ̂₋ = |↓⟩⟨↑|.
fn sigma_minus() -> [[C64; 2]; 2] {
    let mut m = zero_spin();
    m[0][1] = C64::new(1.0, 0.0);
    m
}

/// σ̂₊ = |↑⟩⟨↓|.
fn sigma_plus() -> [[C64; 2]; 2] {
    let mut m = zero_spin();
    m[1][0] = C64::new(1.0, 0.0);
    m
}

/// Embed an oscillator operator into the composite space (identity on spin).
pub fn embed_oscillator(op: &Array2<C64>) -> Array2<C64> {
    let mut spin = zero_spin();
    spin[0][0] = C64::new(1.0, 0.0);
    spin[1][1] = C64::new(1.0, 0.0);
    kron_spin(&spin, op)
}

/// Generic exchange coupling (Ω/2)(Â σ̂₊ e^{iφ} + h.c.).
fn exchange(
    drive: DriveParams,
    coupling: &Array2<C64>,
    space: FockSpace,
    label: &str,
) -> Hamiltonian {
    let g = C64::from_polar(drive.omega / 2.0, drive.phase);
    let up = coupling * g;
    let down = linalg::dagger(&up);
    let m = kron_spin(&sigma_plus(), &up) + kron_spin(&sigma_minus(), &down);
    Hamiltonian::new(m, space, label)
}

/// Ĥ_JC = (Ω/2)(â†σ̂₋ e^{iφ} + h.c.): exchanges |↓⟩|n⟩ ↔ |↑⟩|n−1⟩ at √n·Ω.
pub fn jaynes_cummings(drive: DriveParams, space: FockSpace) -> Hamiltonian {
    // â†σ̂₋e^{iφ} + h.c. equals âσ̂₊e^{−iφ} + h.c.
    let a = make_destroy(space);
    let inverted = DriveParams { omega: drive.omega, phase: -drive.phase };
    exchange(inverted, a.matrix(), space, "jc")
}

/// Engineered ladder drive from a transformed lowering operator K.
///
/// `Minus` gives (Ω/2)(K̂σ̂₊e^{iφ} + h.c.), the Jaynes-Cummings analogue in
/// the K-ladder; `Plus` gives (Ω/2)(K̂†σ̂₊e^{iφ} + h.c.), the
/// anti-Jaynes-Cummings analogue.
pub fn engineered(
    sign: EngineeredSign,
    drive: DriveParams,
    k: &OscillatorOperator,
) -> Result<Hamiltonian> {
    let space = k.space();
    let (coupling, label) = match sign {
        EngineeredSign::Minus => (k.matrix().clone(), "engineered-"),
        EngineeredSign::Plus => (linalg::dagger(k.matrix()), "engineered+"),
    };
    Ok(exchange(drive, &coupling, space, label))
}

/// Resonant first-sideband operators of the ion-light coupling
/// exp(iη(â+â†)), normalized by iη so the η→0 limit returns (â, â†).
///
/// Returns (lowering band, raising band): the |Δn| = 1 matrix elements of the
/// full exponential, all other entries zeroed.
pub fn ld_sideband_bands(
    eta: LambDicke,
    space: FockSpace,
) -> Result<(Array2<C64>, Array2<C64>)> {
    let n = space.dim();
    let a = make_destroy(space);
    if eta.eta() == 0.0 {
        return Ok((a.matrix().clone(), linalg::dagger(a.matrix())));
    }
    let x = a.matrix() + &linalg::dagger(a.matrix());
    let gen = x.mapv(|v| v * C64::new(0.0, eta.eta()));
    let e = linalg::exp_antihermitian(&gen)?;
    let scale = C64::new(0.0, eta.eta());
    let mut lower = Array2::<C64>::zeros((n, n));
    for k in 1..n {
        lower[[k - 1, k]] = e[[k - 1, k]] / scale;
    }
    let raise = linalg::dagger(&lower);
    Ok((lower, raise))
}

/// Bichromatic red+blue sideband drive.
///
/// Linear mode: Ĥ_r + Ĥ_b with first-order sideband operators, which equals
/// the engineered `Minus` drive with Ω_− = Ω_r/cosh r, r = artanh(Ω_b/Ω_r),
/// squeeze phase φ_b − φ_r, and overall phase φ_r. AllOrders mode replaces
/// â (â†) by the resonant sideband bands of the full coupling.
pub fn bichromatic(
    omega_r: DriveParams,
    omega_b: DriveParams,
    eta: LambDicke,
    ld_order: LdOrder,
    space: FockSpace,
) -> Result<Hamiltonian> {
    if omega_b.omega() >= omega_r.omega() {
        return Err(SimError::Ratio(format!(
            "omega_b = {} must be < omega_r = {} (tanh r < 1)",
            omega_b.omega(),
            omega_r.omega()
        )));
    }
    let (lower, raise) = match ld_order {
        LdOrder::Linear => {
            let a = make_destroy(space);
            (a.matrix().clone(), linalg::dagger(a.matrix()))
        }
        LdOrder::AllOrders => ld_sideband_bands(eta, space)?,
    };
    let g_r = C64::from_polar(omega_r.omega() / 2.0, omega_r.phase());
    let g_b = C64::from_polar(omega_b.omega() / 2.0, omega_b.phase());
    let up = &lower * g_r + &raise * g_b;
    let down = linalg::dagger(&up);
    let m = kron_spin(&sigma_plus(), &up) + kron_spin(&sigma_minus(), &down);
    let label = match ld_order {
        LdOrder::Linear => "bichromatic-linear",
        LdOrder::AllOrders => "bichromatic-all-orders",
    };
    Ok(Hamiltonian::new(m, space, label))
}

/// Oscillator detuning δ·n̂ (identity on spin).
pub fn detuning_term(delta: f64, space: FockSpace) -> Hamiltonian {
    let nop = number_operator(space);
    let m = embed_oscillator(&nop.matrix().mapv(|v| v * delta));
    Hamiltonian::new(m, space, "detuning")
}

/// The detuning written in the squeezed ladder:
/// δ(K̂†K̂ cosh2r + sinh²r) − δ(sinh2r/2)(e^{−iφ}K̂² + e^{iφ}K̂†²).
///
/// Exists as a cross-check: it must reproduce [`detuning_term`] on the
/// interior block. Diagonal elements in the K-ladder grow as n·cosh2r and the
/// n↔n±2 couplings as (sinh2r/2)·√((n+1)(n+2)), which is what amplifies the
/// detuning sensitivity of high ladder states.
pub fn detuning_squeezed_form(
    delta: f64,
    zeta: SqueezeParams,
    k: &OscillatorOperator,
    space: FockSpace,
) -> Result<Hamiltonian> {
    k.space().check_same(&space, "detuning_squeezed_form")?;
    // K must be the lowering operator of this ζ (no displacement).
    let expected = crate::hilbert::engineered_lowering(zeta, C64::new(0.0, 0.0), space)?.0;
    let defect = linalg::max_abs_diff_block(k.matrix(), expected.matrix(), space.dim());
    if defect >= 1e-9 {
        return Err(SimError::Validation(format!(
            "K does not match zeta (defect {defect:.3e})"
        )));
    }
    let r2 = 2.0 * zeta.r();
    let kdag = linalg::dagger(k.matrix());
    let kdk = kdag.dot(k.matrix());
    let kk = k.matrix().dot(k.matrix());
    let kdkd = linalg::dagger(&kk);
    let phase = C64::from_polar(1.0, zeta.phi());
    let mut osc = kdk.mapv(|v| v * r2.cosh())
        - (kk.mapv(|v| v / phase) + kdkd.mapv(|v| v * phase)).mapv(|v| v * (r2.sinh() / 2.0));
    let shift = zeta.r().sinh().powi(2);
    for i in 0..space.dim() {
        osc[[i, i]] += C64::new(shift, 0.0);
    }
    let m = embed_oscillator(&osc.mapv(|v| v * delta));
    Ok(Hamiltonian::new(m, space, "detuning-squeezed-form"))
}

/// |⟨basis, n+1| E_res |basis, n⟩| of the resonant sideband coupling,
/// normalized so the η→0 limit is √(n+1).
///
/// In the squeezed basis the resonant operator is the all-orders engineered
/// lowering cosh(r)·Ē₋ + e^{iφ}sinh(r)·Ē₊ (each drive tone restricted to its
/// own resonant band, then combined), evaluated between squeezed Fock states.
pub fn sideband_matrix_element(
    basis: SidebandBasis,
    n: usize,
    eta: LambDicke,
    space: FockSpace,
) -> Result<f64> {
    if n + 1 >= space.interior() {
        return Err(SimError::Truncation(format!(
            "transition {}↔{} reaches into the guard band (dim {})",
            n,
            n + 1,
            space.dim()
        )));
    }
    let (lower, raise) = ld_sideband_bands(eta, space)?;
    match basis {
        SidebandBasis::Fock => Ok(raise[[n + 1, n]].norm()),
        SidebandBasis::Squeezed(zeta) => {
            let mu = C64::new(zeta.r().cosh(), 0.0);
            let nu = C64::from_polar(zeta.r().sinh(), zeta.phi());
            let k_ld = lower.mapv(|v| v * mu) + raise.mapv(|v| v * nu);
            let s = crate::hilbert::make_squeeze(zeta, space)?;
            let k_dag_in_basis = linalg::dagger(s.matrix())
                .dot(&linalg::dagger(&k_ld))
                .dot(s.matrix());
            Ok(k_dag_in_basis[[n + 1, n]].norm())
        }
    }
}

/// Rabi splitting of the two-level block spanned by `u` and `v`: the
/// eigenvalue gap of H projected onto span{u, v}.
pub fn transition_rabi_frequency(
    h: &Hamiltonian,
    u: &SpinOscState,
    v: &SpinOscState,
) -> Result<f64> {
    h.space().check_same(&u.space(), "transition_rabi_frequency")?;
    h.space().check_same(&v.space(), "transition_rabi_frequency")?;
    let hu = h.matrix().dot(u.amplitudes());
    let hv = h.matrix().dot(v.amplitudes());
    let braket = |x: &ndarray::Array1<C64>, y: &ndarray::Array1<C64>| -> C64 {
        x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
    };
    let huu = braket(u.amplitudes(), &hu);
    let hvv = braket(v.amplitudes(), &hv);
    let huv = braket(u.amplitudes(), &hv);
    Ok(((huu.re - hvv.re).powi(2) + 4.0 * huv.norm_sqr()).sqrt())
}
