//! Closed-form dynamics of a resonantly driven three-level Λ atom.
//!
//! The atom has one upper level `|a>` coupled to two lower levels `|b>` and
//! `|c>` by two laser fields, each exactly resonant with its transition
//! (`ν1 = ωa - ωb`, `ν2 = ωa - ωc`). With `ħ = 1`, level energies and Rabi
//! frequencies share units of rad/time.
//!
//! Basis ordering throughout: index 0 = `|a>`, 1 = `|b>`, 2 = `|c>`.
//!
//! The evolved amplitudes are known in closed form; an independent RK4
//! propagator ([`evolve_numeric`]) over the rotating-frame Hamiltonian is
//! provided to verify them.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;

/// Hilbert-space dimension of the qutrit.
pub const DIM: usize = 3;

/// Tolerance on `|‖ψ‖² - 1|` for state normalization checks.
pub const NORM_TOL: f64 = 1e-10;

/// Default tolerance used by sweeps and the CLI when testing for coherent
/// population trapping.
pub const CPT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters: both Rabi frequencies are zero")]
    InvalidParams,
    #[error("invalid parameters: Rabi frequencies must be non-negative, got {0}")]
    NegativeRabi(f64),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("integration step {dt:.3e} exceeds the limit {limit:.3e}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("state is not normalized: ‖ψ‖² = {norm_sq}")]
    NonNormalizedState { norm_sq: f64 },
}

/// The three level energies that can be estimated.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    /// Upper level `|a>`.
    A,
    /// Lower level `|b>` (the ground level).
    B,
    /// Lower level `|c>` (the intermediate level).
    C,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::A, Level::B, Level::C];

    pub fn index(self) -> usize {
        match self {
            Level::A => 0,
            Level::B => 1,
            Level::C => 2,
        }
    }

    /// Token used in configuration files and CSV headers.
    pub fn label(self) -> &'static str {
        match self {
            Level::A => "wa",
            Level::B => "wb",
            Level::C => "wc",
        }
    }

    pub fn parse(token: &str) -> Option<Level> {
        match token {
            "wa" => Some(Level::A),
            "wb" => Some(Level::B),
            "wc" => Some(Level::C),
            _ => None,
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Reduce an angle to the interval `(-π, π]`.
pub fn reduce_phase(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Full physical configuration of the driven Λ atom.
///
/// `rabi1`/`phi1` describe the field driving `|a> <-> |b>`, `rabi2`/`phi2`
/// the field driving `|a> <-> |c>`. The initial state is
/// `cos(θ/2)|b> + e^{-iψ} sin(θ/2)|c>`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaParams {
    /// Rabi frequency of the `|a>-|b>` drive (rad/time, ≥ 0).
    pub rabi1: f64,
    /// Rabi frequency of the `|a>-|c>` drive (rad/time, ≥ 0).
    pub rabi2: f64,
    /// Phase of the `|a>-|b>` drive (rad).
    pub phi1: f64,
    /// Phase of the `|a>-|c>` drive (rad).
    pub phi2: f64,
    /// Phase of the initial superposition (rad).
    pub psi: f64,
    /// Mixing angle of the initial superposition (rad).
    pub theta: f64,
    /// Level energies (rad/time, ħ = 1).
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_c: f64,
}

impl Default for LambdaParams {
    fn default() -> Self {
        Self {
            rabi1: 1.0,
            rabi2: 1.0,
            phi1: 0.0,
            phi2: 0.0,
            psi: 0.0,
            theta: PI / 2.0,
            omega_a: 1.0,
            omega_b: 0.0,
            omega_c: 0.5,
        }
    }
}

impl LambdaParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.rabi1 < 0.0 {
            return Err(ModelError::NegativeRabi(self.rabi1));
        }
        if self.rabi2 < 0.0 {
            return Err(ModelError::NegativeRabi(self.rabi2));
        }
        if self.rabi1 == 0.0 && self.rabi2 == 0.0 {
            return Err(ModelError::InvalidParams);
        }
        Ok(())
    }

    /// Generalized Rabi frequency `Ω = (Ω₁² + Ω₂²)^{1/2}`, always recomputed.
    pub fn omega(&self) -> f64 {
        self.rabi1.hypot(self.rabi2)
    }

    /// Control phase `α = φ1 - φ2 - ψ`, reduced to `(-π, π]`.
    pub fn alpha(&self) -> f64 {
        reduce_phase(self.phi1 - self.phi2 - self.psi)
    }

    /// Field frequency resonant with `|a> <-> |b>`.
    pub fn nu1(&self) -> f64 {
        self.omega_a - self.omega_b
    }

    /// Field frequency resonant with `|a> <-> |c>`.
    pub fn nu2(&self) -> f64 {
        self.omega_a - self.omega_c
    }

    pub fn energy(&self, level: Level) -> f64 {
        match level {
            Level::A => self.omega_a,
            Level::B => self.omega_b,
            Level::C => self.omega_c,
        }
    }

    /// True when the two Rabi frequencies agree to within `1e-12 Ω`.
    pub fn equal_rabi(&self) -> bool {
        (self.rabi1 - self.rabi2).abs() <= 1e-12 * self.omega()
    }

    /// Coherent-population-trapping test: equal Rabi frequencies, `θ = π/2`
    /// and `α = ±π`, each within `tol` (the Rabi comparison is relative).
    pub fn is_cpt(&self, tol: f64) -> bool {
        let alpha = self.alpha();
        (self.rabi1 - self.rabi2).abs() <= tol * self.omega()
            && (self.theta - PI / 2.0).abs() <= tol
            && ((alpha - PI).abs() <= tol || (alpha + PI).abs() <= tol)
    }
}

/// Pure qutrit state in the basis `{|a>, |b>, |c>}` at a given time.
///
/// Amplitudes carry the free phases `e^{-iω_k t}`; those phases hold the
/// information about the level energies.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    pub amplitudes: [C64; DIM],
    pub time: f64,
}

impl PureState {
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn populations(&self) -> [f64; DIM] {
        [
            self.amplitudes[0].norm_sqr(),
            self.amplitudes[1].norm_sqr(),
            self.amplitudes[2].norm_sqr(),
        ]
    }

    pub fn density_matrix(&self) -> Result<ComplexMatrix, ModelError> {
        density_matrix(self)
    }
}

/// Analytic derivative of the evolved state with respect to one level energy.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDerivative {
    pub parameter: Level,
    pub components: [C64; DIM],
}

/// Rotating-frame amplitudes `(c_a, c_b, c_c)` of the evolved state, before
/// the free phases `e^{-iω_k t}` are attached.
pub fn rotating_frame_amplitudes(params: &LambdaParams, t: f64) -> [C64; DIM] {
    let omega = params.omega();
    let omega_sq = omega * omega;
    let r1 = params.rabi1;
    let r2 = params.rabi2;
    let cos_half = (params.theta / 2.0).cos();
    let sin_half = (params.theta / 2.0).sin();
    let u = omega * t / 2.0;
    let sin_u = u.sin();
    let cos_u = u.cos();
    let sin_sq_quarter = (omega * t / 4.0).sin().powi(2);

    let phase = |x: f64| C64::new(0.0, x).exp();

    let ca = C64::new(0.0, sin_u / omega)
        * (phase(-params.phi1) * r1 * cos_half + phase(-(params.phi2 + params.psi)) * r2 * sin_half);
    let cb = ((r2 * r2 + r1 * r1 * cos_u) * cos_half
        - phase(params.phi1 - params.phi2 - params.psi)
            * (2.0 * r1 * r2 * sin_sq_quarter * sin_half))
        / omega_sq;
    let cc = (phase(-(params.phi1 - params.phi2)) * (-2.0 * r1 * r2 * sin_sq_quarter * cos_half)
        + phase(-params.psi) * ((r1 * r1 + r2 * r2 * cos_u) * sin_half))
        / omega_sq;
    [ca, cb, cc]
}

/// Evolved state of the driven atom at time `t`.
pub fn evolve(params: &LambdaParams, t: f64) -> Result<PureState, ModelError> {
    params.validate()?;
    if t < 0.0 {
        return Err(ModelError::NegativeTime(t));
    }
    let rotating = rotating_frame_amplitudes(params, t);
    let mut amplitudes = [C64::new(0.0, 0.0); DIM];
    for (k, level) in Level::ALL.iter().enumerate() {
        let free = C64::new(0.0, -params.energy(*level) * t).exp();
        amplitudes[k] = rotating[k] * free;
    }
    Ok(PureState { amplitudes, time: t })
}

/// `∂|ψ(t)>/∂ω_k`: only the component of level `k` is non-zero and equals
/// `-i t` times the corresponding amplitude of [`evolve`].
pub fn state_derivative(
    params: &LambdaParams,
    t: f64,
    parameter: Level,
) -> Result<StateDerivative, ModelError> {
    let state = evolve(params, t)?;
    let mut components = [C64::new(0.0, 0.0); DIM];
    let k = parameter.index();
    components[k] = C64::new(0.0, -t) * state.amplitudes[k];
    Ok(StateDerivative { parameter, components })
}

/// Density matrix `ρ = |ψ><ψ|` of a normalized pure state.
pub fn density_matrix(state: &PureState) -> Result<ComplexMatrix, ModelError> {
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(ModelError::NonNormalizedState { norm_sq });
    }
    Ok(ComplexMatrix::outer(&state.amplitudes))
}

/// Rotating-frame interaction Hamiltonian at exact resonance:
/// `-(1/2)(Ω₁ e^{-iφ1}|a><b| + Ω₂ e^{-iφ2}|a><c| + h.c.)`.
pub fn interaction_hamiltonian(params: &LambdaParams) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(DIM, DIM);
    let hab = C64::new(0.0, -params.phi1).exp() * (-0.5 * params.rabi1);
    let hac = C64::new(0.0, -params.phi2).exp() * (-0.5 * params.rabi2);
    h[(0, 1)] = hab;
    h[(1, 0)] = hab.conj();
    h[(0, 2)] = hac;
    h[(2, 0)] = hac.conj();
    h
}

/// Independent verification of [`evolve`]: fixed-step RK4 integration of
/// `i d|φ>/dt = H|φ>` in the rotating frame, with the free phases
/// `e^{-iω_k t}` reattached at the end.
pub fn evolve_numeric(params: &LambdaParams, t: f64, dt: f64) -> Result<PureState, ModelError> {
    params.validate()?;
    if t < 0.0 {
        return Err(ModelError::NegativeTime(t));
    }
    let limit = 1e-3 * (2.0 * PI / params.omega()).max(1.0);
    if dt <= 0.0 || dt > limit {
        return Err(ModelError::StepTooLarge { dt, limit });
    }

    let mut y = [
        C64::new(0.0, 0.0),
        C64::new((params.theta / 2.0).cos(), 0.0),
        C64::new(0.0, -params.psi).exp() * (params.theta / 2.0).sin(),
    ];

    if t > 0.0 {
        let h = interaction_hamiltonian(params);
        let rhs = |v: &[C64; DIM]| -> [C64; DIM] {
            let hv = h.apply(v);
            [-C64::i() * hv[0], -C64::i() * hv[1], -C64::i() * hv[2]]
        };
        let steps = (t / dt).ceil() as usize;
        let step = t / steps as f64;
        for _ in 0..steps {
            let k1 = rhs(&y);
            let k2 = rhs(&advanced(&y, &k1, step / 2.0));
            let k3 = rhs(&advanced(&y, &k2, step / 2.0));
            let k4 = rhs(&advanced(&y, &k3, step));
            for i in 0..DIM {
                y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (step / 6.0);
            }
        }
    }

    let mut amplitudes = [C64::new(0.0, 0.0); DIM];
    for (k, level) in Level::ALL.iter().enumerate() {
        amplitudes[k] = y[k] * C64::new(0.0, -params.energy(*level) * t).exp();
    }
    Ok(PureState { amplitudes, time: t })
}

fn advanced(y: &[C64; DIM], k: &[C64; DIM], h: f64) -> [C64; DIM] {
    [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h]
}
