//! The metrology engine: symmetric logarithmic derivatives, quantum Fisher
//! information (single-parameter and matrix form), classical Fisher
//! information for a POVM, Hilbert-Schmidt speed, Cramér-Rao variance bounds
//! and the independent-vs-simultaneous performance ratio.
//!
//! Two routes to the QFI are kept side by side and cross-checked in tests:
//!
//! * the general SLD route ([`qfi_sld`], [`qfim`]), which solves
//!   `∂ρ/∂λ = (Lρ + ρL)/2` in the eigenbasis of `ρ` and evaluates
//!   `F_ij = Tr[ρ(L_i L_j + L_j L_i)]/2`;
//! * the pure-state route ([`qfi_pure`], [`qfim_pure`]),
//!   `F_ij = 4 Re(<∂_iψ|∂_jψ> - <∂_iψ|ψ><ψ|∂_jψ>)`, which is the fast path
//!   used by sweeps and the CLI.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{
    commutator_trace, herm_eig, mat_inverse, ComplexMatrix, InverseMode, LinalgError, RealMatrix,
    RANK_TOL,
};
use crate::model::{
    density_matrix, evolve, state_derivative, LambdaParams, Level, ModelError, DIM,
};

/// Measurement outcomes with probability at or below this floor contribute
/// nothing to the classical Fisher information.
pub const PROB_FLOOR: f64 = 1e-12;

/// A QFI matrix whose off-diagonal entries are all below this threshold is
/// treated as diagonal, for which the performance ratio equals the number of
/// parameters identically.
pub const DIAGONAL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("invalid state: {reason} (value {value:.3e})")]
    InvalidState { reason: &'static str, value: f64 },
    #[error("duplicate parameter {0} in subset")]
    DuplicateParameter(Level),
    #[error("parameter subset must contain at least {required} entries, got {got}")]
    SubsetTooSmall { required: usize, got: usize },
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("QFI matrix has a zero diagonal entry for {parameter}; the independent bound is undefined")]
    ZeroDiagonal { parameter: Level },
    #[error("QFI matrix is singular (eigenvalue {eigenvalue:.3e}); null direction {null_direction:?}")]
    SingularQfim { eigenvalue: f64, null_direction: Vec<f64> },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Estimation resources: number of measurement repetitions `M`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct EstimationConfig {
    pub repetitions: u32,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self { repetitions: 1 }
    }
}

/// Symmetric logarithmic derivative for one level energy.
#[derive(Clone, Debug)]
pub struct SldOperator {
    pub parameter: Level,
    pub matrix: ComplexMatrix,
}

/// Quantum Fisher information matrix over an ordered subset of level energies.
#[derive(Clone, Debug)]
pub struct QfiMatrix {
    parameters: Vec<Level>,
    matrix: RealMatrix,
}

impl QfiMatrix {
    pub fn new(parameters: Vec<Level>, matrix: RealMatrix) -> Self {
        assert_eq!(parameters.len(), matrix.dim());
        Self { parameters, matrix }
    }

    pub fn parameters(&self) -> &[Level] {
        &self.parameters
    }

    pub fn dim(&self) -> usize {
        self.parameters.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.matrix.max_abs_off_diagonal() <= tol
    }

    pub fn determinant(&self) -> f64 {
        match self.dim() {
            1 => self.entry(0, 0),
            2 => self.entry(0, 0) * self.entry(1, 1) - self.entry(0, 1) * self.entry(1, 0),
            3 => {
                let m = &self.matrix;
                m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                    - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                    + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
            }
            _ => unreachable!("QFI matrices have dimension 1..=3"),
        }
    }
}

/// Positive operator-valued measure: PSD elements summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self, EstimationError> {
        if elements.is_empty() {
            return Err(EstimationError::InvalidPovm("no elements".into()));
        }
        let dim = elements[0].rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (x, el) in elements.iter().enumerate() {
            if el.rows() != dim || el.cols() != dim {
                return Err(EstimationError::InvalidPovm(format!(
                    "element {x} has shape {}x{}",
                    el.rows(),
                    el.cols()
                )));
            }
            let dev = el.hermiticity_deviation();
            if dev > 1e-10 {
                return Err(EstimationError::InvalidPovm(format!(
                    "element {x} is not Hermitian (deviation {dev:.3e})"
                )));
            }
            let eig = herm_eig(el)?;
            if let Some(&bad) = eig.values.iter().find(|&&v| v < -1e-12) {
                return Err(EstimationError::InvalidPovm(format!(
                    "element {x} has negative eigenvalue {bad:.3e}"
                )));
            }
            sum = sum.add(el)?;
        }
        let completeness = sum.sub(&ComplexMatrix::identity(dim))?.max_abs();
        if completeness > 1e-10 {
            return Err(EstimationError::InvalidPovm(format!(
                "elements sum to identity only within {completeness:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    /// The trivial single-element POVM `{I}`.
    pub fn identity(dim: usize) -> Self {
        Self { elements: vec![ComplexMatrix::identity(dim)] }
    }

    /// Rank-1 projective POVM from the columns of a unitary matrix.
    pub fn from_unitary_columns(u: &ComplexMatrix) -> Result<Self, EstimationError> {
        let elements = (0..u.cols())
            .map(|j| ComplexMatrix::outer(&u.column(j)))
            .collect();
        Self::new(elements)
    }

    /// Projective measurement onto the eigenbasis of the SLD for `parameter`.
    pub fn sld_eigenbasis(
        params: &LambdaParams,
        t: f64,
        parameter: Level,
    ) -> Result<Self, EstimationError> {
        let op = sld(params, t, parameter)?;
        let eig = herm_eig(&op.matrix)?;
        Self::from_unitary_columns(&eig.vectors)
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }
}

/// Low-level SLD solver: given `ρ` and `∂ρ`, returns the Hermitian `L` with
/// `L_mn = 2 (∂ρ)_mn / (p_m + p_n)` in the eigenbasis of `ρ`, entries with
/// `p_m + p_n <= rank_tol` set to zero.
pub fn solve_sld(
    rho: &ComplexMatrix,
    drho: &ComplexMatrix,
    rank_tol: f64,
) -> Result<ComplexMatrix, EstimationError> {
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
        return Err(EstimationError::InvalidState { reason: "trace of rho is not 1", value: trace.re });
    }
    let eig = herm_eig(rho)?;
    if let Some(&bad) = eig.values.iter().find(|&&v| v < -1e-12) {
        return Err(EstimationError::InvalidState {
            reason: "rho has a negative eigenvalue",
            value: bad,
        });
    }
    let trace_d = drho.trace();
    if trace_d.norm() > 1e-10 {
        return Err(EstimationError::InvalidState {
            reason: "drho is not traceless",
            value: trace_d.norm(),
        });
    }
    let dev = drho.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(EstimationError::InvalidState {
            reason: "drho is not Hermitian",
            value: dev,
        });
    }

    let n = rho.rows();
    let v = &eig.vectors;
    let d_in_basis = v.adjoint().mul(drho)?.mul(v)?;
    let mut l_in_basis = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        for k in 0..n {
            let weight = eig.values[m] + eig.values[k];
            if weight > rank_tol {
                l_in_basis[(m, k)] = d_in_basis[(m, k)] * (2.0 / weight);
            }
        }
    }
    let l = v.mul(&l_in_basis)?.mul(&v.adjoint())?;
    // Kill the residual asymmetry left by the basis round trip.
    Ok(l.add(&l.adjoint())?.scale(C64::new(0.5, 0.0)))
}

/// `∂ρ/∂ω_k = |∂ψ><ψ| + |ψ><∂ψ|` from the analytic state derivative.
pub fn density_derivative(
    params: &LambdaParams,
    t: f64,
    parameter: Level,
) -> Result<ComplexMatrix, EstimationError> {
    let state = evolve(params, t)?;
    let deriv = state_derivative(params, t, parameter)?;
    let mut out = ComplexMatrix::zeros(DIM, DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            out[(i, j)] = deriv.components[i] * state.amplitudes[j].conj()
                + state.amplitudes[i] * deriv.components[j].conj();
        }
    }
    Ok(out)
}

/// SLD of the evolved state with respect to one level energy.
pub fn sld(params: &LambdaParams, t: f64, parameter: Level) -> Result<SldOperator, EstimationError> {
    let rho = density_matrix(&evolve(params, t)?)?;
    let drho = density_derivative(params, t, parameter)?;
    let matrix = solve_sld(&rho, &drho, RANK_TOL)?;
    Ok(SldOperator { parameter, matrix })
}

/// Single-parameter QFI through the SLD route: `Tr[ρ L²]`.
pub fn qfi_sld(params: &LambdaParams, t: f64, parameter: Level) -> Result<f64, EstimationError> {
    let rho = density_matrix(&evolve(params, t)?)?;
    let op = sld(params, t, parameter)?;
    let value = rho.mul(&op.matrix)?.mul(&op.matrix)?.trace().re;
    Ok(value.max(0.0))
}

/// Single-parameter QFI through the pure-state route:
/// `4(<∂ψ|∂ψ> - |<ψ|∂ψ>|²)`.
pub fn qfi_pure(params: &LambdaParams, t: f64, parameter: Level) -> Result<f64, EstimationError> {
    let state = evolve(params, t)?;
    let deriv = state_derivative(params, t, parameter)?;
    let grad_sq: f64 = deriv.components.iter().map(|c| c.norm_sqr()).sum();
    let overlap: C64 = (0..DIM)
        .map(|k| state.amplitudes[k].conj() * deriv.components[k])
        .sum();
    Ok((4.0 * (grad_sq - overlap.norm_sqr())).max(0.0))
}

fn check_subset(subset: &[Level], required: usize) -> Result<(), EstimationError> {
    if subset.len() < required {
        return Err(EstimationError::SubsetTooSmall { required, got: subset.len() });
    }
    for (i, a) in subset.iter().enumerate() {
        if subset[i + 1..].contains(a) {
            return Err(EstimationError::DuplicateParameter(*a));
        }
    }
    Ok(())
}

/// QFI matrix through the SLD route: `F_ij = Tr[ρ(L_i L_j + L_j L_i)]/2`.
pub fn qfim(params: &LambdaParams, t: f64, subset: &[Level]) -> Result<QfiMatrix, EstimationError> {
    check_subset(subset, 1)?;
    let rho = density_matrix(&evolve(params, t)?)?;
    let slds: Vec<ComplexMatrix> = subset
        .iter()
        .map(|&p| sld(params, t, p).map(|op| op.matrix))
        .collect::<Result<_, _>>()?;
    let n = subset.len();
    let mut matrix = RealMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let anti = slds[i].mul(&slds[j])?.add(&slds[j].mul(&slds[i])?)?;
            let value = 0.5 * rho.mul(&anti)?.trace().re;
            matrix[(i, j)] = value;
            matrix[(j, i)] = value;
        }
    }
    Ok(QfiMatrix::new(subset.to_vec(), matrix))
}

/// QFI matrix through the pure-state route:
/// `F_ij = 4 Re(<∂_iψ|∂_jψ> - <∂_iψ|ψ><ψ|∂_jψ>)`.
pub fn qfim_pure(
    params: &LambdaParams,
    t: f64,
    subset: &[Level],
) -> Result<QfiMatrix, EstimationError> {
    check_subset(subset, 1)?;
    let state = evolve(params, t)?;
    let derivs: Vec<StateComponents> = subset
        .iter()
        .map(|&p| state_derivative(params, t, p).map(|d| d.components))
        .collect::<Result<_, _>>()?;
    let overlaps: Vec<C64> = derivs
        .iter()
        .map(|d| (0..DIM).map(|k| state.amplitudes[k].conj() * d[k]).sum())
        .collect();
    let n = subset.len();
    let mut matrix = RealMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let grad: C64 = (0..DIM).map(|k| derivs[i][k].conj() * derivs[j][k]).sum();
            let value = 4.0 * (grad - overlaps[i].conj() * overlaps[j]).re;
            matrix[(i, j)] = value;
            matrix[(j, i)] = value;
        }
    }
    Ok(QfiMatrix::new(subset.to_vec(), matrix))
}

type StateComponents = [C64; DIM];

/// Classical Fisher information matrix of the POVM outcome distribution,
/// with analytically differentiated probabilities.
pub fn cfim(
    params: &LambdaParams,
    t: f64,
    povm: &Povm,
    subset: &[Level],
) -> Result<RealMatrix, EstimationError> {
    check_subset(subset, 1)?;
    let rho = density_matrix(&evolve(params, t)?)?;
    let drhos: Vec<ComplexMatrix> = subset
        .iter()
        .map(|&p| density_derivative(params, t, p))
        .collect::<Result<_, _>>()?;
    let n = subset.len();
    let mut info = RealMatrix::zeros(n);
    for element in povm.elements() {
        let prob = element.mul(&rho)?.trace().re;
        if prob <= PROB_FLOOR {
            continue;
        }
        let grads: Vec<f64> = drhos
            .iter()
            .map(|d| element.mul(d).map(|m| m.trace().re))
            .collect::<Result<_, _>>()?;
        for i in 0..n {
            for j in 0..n {
                info[(i, j)] += grads[i] * grads[j] / prob;
            }
        }
    }
    Ok(info)
}

/// Hilbert-Schmidt speed `sqrt( Tr[(∂ρ/∂ω_k)²] / 2 )`.
///
/// Needs no diagonalization: for Hermitian `∂ρ` the trace equals the squared
/// Frobenius norm. For the pure states of this model `F = 4 HSS²`.
pub fn hss(params: &LambdaParams, t: f64, parameter: Level) -> Result<f64, EstimationError> {
    let drho = density_derivative(params, t, parameter)?;
    Ok(drho.frobenius_norm() / 2.0f64.sqrt())
}

/// Saturability witness: `max |Tr(ρ [L_i, L_j])|` over parameter pairs in
/// `subset`. Vanishing for all pairs guarantees that the multi-parameter
/// quantum Cramér-Rao bound is asymptotically attainable.
pub fn saturability_witness(
    params: &LambdaParams,
    t: f64,
    subset: &[Level],
) -> Result<f64, EstimationError> {
    check_subset(subset, 2)?;
    let rho = density_matrix(&evolve(params, t)?)?;
    let slds: Vec<ComplexMatrix> = subset
        .iter()
        .map(|&p| sld(params, t, p).map(|op| op.matrix))
        .collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..slds.len() {
        for j in (i + 1)..slds.len() {
            worst = worst.max(commutator_trace(&rho, &slds[i], &slds[j])?.norm());
        }
    }
    Ok(worst)
}

/// Lower bounds on estimation variances derived from a QFI matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceBounds {
    /// Total variance bound when each parameter is estimated independently:
    /// `Σ_j 1/(M F_jj)`.
    pub delta_independent: f64,
    /// Total variance bound for simultaneous estimation including the
    /// resource factor `p`: `Tr(F⁻¹)/(M p)`.
    pub delta_simultaneous: f64,
    /// Per-parameter simultaneous bounds `[F⁻¹]_jj / M`.
    pub per_parameter_simultaneous: Vec<f64>,
}

/// Variance bounds from a QFI matrix. Fails with [`EstimationError::ZeroDiagonal`]
/// when a diagonal entry vanishes and with [`EstimationError::SingularQfim`]
/// when the matrix cannot be inverted at the default rank tolerance.
pub fn variance_bounds(
    f: &QfiMatrix,
    cfg: &EstimationConfig,
) -> Result<VarianceBounds, EstimationError> {
    let m = cfg.repetitions.max(1) as f64;
    let p = f.dim();
    for (j, &parameter) in f.parameters().iter().enumerate() {
        if f.entry(j, j) <= 0.0 {
            return Err(EstimationError::ZeroDiagonal { parameter });
        }
    }
    let delta_independent = (0..p).map(|j| 1.0 / (m * f.entry(j, j))).sum();

    let inverse = match mat_inverse(f.matrix(), InverseMode::Exact, RANK_TOL) {
        Ok(inv) => inv,
        Err(LinalgError::SingularMatrix { eigenvalue, .. }) => {
            let eig = herm_eig(&f.matrix().to_complex())?;
            let null_direction = (0..p).map(|i| eig.vectors[(i, 0)].re).collect();
            return Err(EstimationError::SingularQfim { eigenvalue, null_direction });
        }
        Err(e) => return Err(e.into()),
    };
    let per_parameter_simultaneous: Vec<f64> = (0..p).map(|j| inverse[(j, j)] / m).collect();
    let delta_simultaneous = inverse.trace() / (m * p as f64);
    Ok(VarianceBounds { delta_independent, delta_simultaneous, per_parameter_simultaneous })
}

/// Performance ratio `R = Δ_i / Δ_s` comparing independent and simultaneous
/// estimation; ranges over `[0, p]` and equals `p` exactly for a diagonal QFI
/// matrix.
pub fn performance_ratio(f: &QfiMatrix, cfg: &EstimationConfig) -> Result<f64, EstimationError> {
    let p = f.dim();
    for (j, &parameter) in f.parameters().iter().enumerate() {
        if f.entry(j, j) <= 0.0 {
            return Err(EstimationError::ZeroDiagonal { parameter });
        }
    }
    if f.is_diagonal(DIAGONAL_TOL) {
        return Ok(p as f64);
    }
    let bounds = variance_bounds(f, cfg)?;
    Ok(bounds.delta_independent / bounds.delta_simultaneous)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cpt_params() -> LambdaParams {
        LambdaParams { rabi1: 1.0, rabi2: 1.0, phi1: 0.0, phi2: 0.0, psi: PI, ..Default::default() }
    }

    fn generic_params() -> LambdaParams {
        LambdaParams {
            rabi1: 0.8,
            rabi2: 1.3,
            phi1: 0.4,
            phi2: -0.6,
            psi: 0.9,
            theta: 1.2,
            ..Default::default()
        }
    }

    fn max_qfi_params() -> LambdaParams {
        // Equal Rabi drive with alpha = pi/2 and theta = pi/2.
        LambdaParams { rabi1: 1.0, rabi2: 1.0, phi1: PI / 2.0, phi2: 0.0, psi: 0.0, ..Default::default() }
    }

    #[test]
    fn sld_of_pure_state_is_twice_the_derivative() {
        let params = generic_params();
        let t = 2.4;
        let op = sld(&params, t, Level::B).unwrap();
        let drho = density_derivative(&params, t, Level::B).unwrap();
        let dev = op.matrix.sub(&drho.scale(C64::new(2.0, 0.0))).unwrap().max_abs();
        assert!(dev <= 1e-9, "L differs from 2 drho by {dev:.2e}");

        // Residual of the defining equation.
        let rho = density_matrix(&evolve(&params, t).unwrap()).unwrap();
        let lr = op.matrix.mul(&rho).unwrap();
        let rl = rho.mul(&op.matrix).unwrap();
        let residual = drho
            .sub(&lr.add(&rl).unwrap().scale(C64::new(0.5, 0.0)))
            .unwrap()
            .max_abs();
        assert!(residual <= 1e-8);
    }

    #[test]
    fn sld_of_zero_derivative_is_zero() {
        let rho = ComplexMatrix::outer(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let zero = ComplexMatrix::zeros(3, 3);
        let l = solve_sld(&rho, &zero, RANK_TOL).unwrap();
        assert!(l.max_abs() <= 1e-15);
    }

    #[test]
    fn sld_of_maximally_mixed_state_is_three_drho() {
        let rho = ComplexMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0));
        let drho = ComplexMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => C64::new(0.4, 0.0),
            (1, 1) => C64::new(-0.4, 0.0),
            (0, 1) => C64::new(0.1, 0.2),
            (1, 0) => C64::new(0.1, -0.2),
            _ => C64::new(0.0, 0.0),
        });
        let l = solve_sld(&rho, &drho, RANK_TOL).unwrap();
        let dev = l.sub(&drho.scale(C64::new(3.0, 0.0))).unwrap().max_abs();
        assert!(dev <= 1e-10);
    }

    #[test]
    fn qfi_vanishes_at_t_zero() {
        let params = generic_params();
        for level in Level::ALL {
            assert!(qfi_pure(&params, 0.0, level).unwrap() <= 1e-15);
            assert!(qfi_sld(&params, 0.0, level).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn upper_level_qfi_vanishes_at_cpt() {
        let params = cpt_params();
        for k in 1..40 {
            let t = 0.3 * k as f64;
            assert!(qfi_pure(&params, t, Level::A).unwrap() <= 1e-12);
            assert!(qfi_sld(&params, t, Level::A).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn maximized_upper_level_qfi_value() {
        // At alpha = pi/2, theta = pi/2, equal Rabi drive Omega' = 1 and
        // t Omega' = pi/sqrt(2), the closed form
        // t²/2 sin²(tΩ'/√2)(cos(√2 tΩ') + 3) evaluates to t² = π²/2.
        let params = max_qfi_params();
        let t = PI / 2.0f64.sqrt();
        let expected = t * t;
        assert!((expected - PI * PI / 2.0).abs() <= 1e-12);
        let f = qfi_pure(&params, t, Level::A).unwrap();
        assert!((f - expected).abs() <= 1e-10, "F = {f}, expected {expected}");
        let f_sld = qfi_sld(&params, t, Level::A).unwrap();
        assert!((f_sld - expected).abs() <= 1e-8);
    }

    #[test]
    fn sld_and_pure_routes_agree() {
        let params = generic_params();
        for level in Level::ALL {
            for k in 0..25 {
                let t = 0.4 * k as f64;
                let a = qfi_pure(&params, t, level).unwrap();
                let b = qfi_sld(&params, t, level).unwrap();
                assert!((a - b).abs() <= 1e-12 + 1e-8 * a.max(b), "t={t}, level {level}");
            }
        }
    }

    #[test]
    fn qfim_single_parameter_matches_qfi() {
        let params = generic_params();
        let t = 3.1;
        let m = qfim(&params, t, &[Level::A]).unwrap();
        let f = qfi_sld(&params, t, Level::A).unwrap();
        assert!((m.entry(0, 0) - f).abs() <= 1e-10);
    }

    #[test]
    fn qfim_rejects_duplicates() {
        let params = generic_params();
        assert!(matches!(
            qfim(&params, 1.0, &[Level::A, Level::A]),
            Err(EstimationError::DuplicateParameter(Level::A))
        ));
    }

    #[test]
    fn qfim_diagonal_at_cpt() {
        let params = cpt_params();
        let m = qfim_pure(&params, 2.5, &[Level::A, Level::B]).unwrap();
        assert!(m.entry(0, 1).abs() <= 1e-8);
        let m_sld = qfim(&params, 2.5, &[Level::A, Level::B]).unwrap();
        assert!(m_sld.entry(0, 1).abs() <= 1e-8);
    }

    #[test]
    fn lower_level_qfim_diagonal_at_special_time() {
        // alpha = 0, equal Rabi, t Omega' = pi/sqrt(2).
        let params = LambdaParams { rabi1: 1.0, rabi2: 1.0, ..Default::default() };
        let t = PI / 2.0f64.sqrt();
        let m = qfim_pure(&params, t, &[Level::B, Level::C]).unwrap();
        assert!(m.entry(0, 1).abs() <= 1e-8);
    }

    #[test]
    fn qfim_routes_agree_elementwise() {
        let params = generic_params();
        let t = 1.9;
        let subset = [Level::A, Level::B, Level::C];
        let a = qfim(&params, t, &subset).unwrap();
        let b = qfim_pure(&params, t, &subset).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (x, y) = (a.entry(i, j), b.entry(i, j));
                assert!((x - y).abs() <= 1e-12 + 1e-8 * x.abs().max(y.abs()));
            }
        }
    }

    #[test]
    fn trivial_povm_has_no_information() {
        let params = generic_params();
        let povm = Povm::identity(DIM);
        let info = cfim(&params, 2.0, &povm, &[Level::A, Level::B]).unwrap();
        assert!(info.max_abs() <= 1e-14);
    }

    #[test]
    fn sld_eigenbasis_povm_saturates_single_parameter_qfi() {
        let params = generic_params();
        let t = 2.2;
        for level in Level::ALL {
            let povm = Povm::sld_eigenbasis(&params, t, level).unwrap();
            let info = cfim(&params, t, &povm, &[level]).unwrap();
            let f = qfi_pure(&params, t, level).unwrap();
            assert!(
                (info[(0, 0)] - f).abs() <= 1e-6 * f.max(1.0),
                "level {level}: I = {}, F = {f}",
                info[(0, 0)]
            );
        }
    }

    #[test]
    fn povm_validation_rejects_incomplete_sets() {
        let half = ComplexMatrix::identity(3).scale(C64::new(0.5, 0.0));
        assert!(matches!(
            Povm::new(vec![half]),
            Err(EstimationError::InvalidPovm(_))
        ));
    }

    #[test]
    fn hss_vanishes_at_t_zero_and_at_cpt() {
        let params = generic_params();
        for level in Level::ALL {
            assert!(hss(&params, 0.0, level).unwrap() <= 1e-15);
        }
        let cpt = cpt_params();
        for k in 1..30 {
            let t = 0.4 * k as f64;
            assert!(hss(&cpt, t, Level::A).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn qfi_equals_four_hss_squared() {
        let params = generic_params();
        for level in Level::ALL {
            for k in 1..30 {
                let t = 0.35 * k as f64;
                let f = qfi_pure(&params, t, level).unwrap();
                let s = hss(&params, t, level).unwrap();
                assert!((f - 4.0 * s * s).abs() <= 1e-12 + 1e-8 * f, "t={t} level={level}");
            }
        }
    }

    #[test]
    fn hss_matches_finite_difference_of_rho() {
        let params = generic_params();
        let t = 2.9;
        let h = 1e-6;
        for level in Level::ALL {
            let mut plus = params.clone();
            let mut minus = params.clone();
            match level {
                Level::A => {
                    plus.omega_a += h;
                    minus.omega_a -= h;
                }
                Level::B => {
                    plus.omega_b += h;
                    minus.omega_b -= h;
                }
                Level::C => {
                    plus.omega_c += h;
                    minus.omega_c -= h;
                }
            }
            let rp = density_matrix(&evolve(&plus, t).unwrap()).unwrap();
            let rm = density_matrix(&evolve(&minus, t).unwrap()).unwrap();
            let fd = rp.sub(&rm).unwrap().scale(C64::new(1.0 / (2.0 * h), 0.0));
            let fd_hss = fd.frobenius_norm() / 2.0f64.sqrt();
            let analytic = hss(&params, t, level).unwrap();
            assert!((fd_hss - analytic).abs() <= 1e-6, "level {level}");
        }
    }

    #[test]
    fn witness_vanishes_on_and_off_cpt() {
        let pairs: [&[Level]; 3] = [&[Level::A, Level::B], &[Level::B, Level::C], &[Level::A, Level::C]];
        for params in [generic_params(), cpt_params()] {
            for subset in pairs {
                let w = saturability_witness(&params, 3.7, subset).unwrap();
                assert!(w < 1e-8, "witness {w:.2e}");
            }
        }
    }

    #[test]
    fn witness_requires_at_least_two_parameters() {
        let params = generic_params();
        assert!(matches!(
            saturability_witness(&params, 1.0, &[Level::A]),
            Err(EstimationError::SubsetTooSmall { required: 2, got: 1 })
        ));
    }

    #[test]
    fn variance_bounds_for_diagonal_qfim() {
        let f = QfiMatrix::new(vec![Level::A, Level::B], RealMatrix::diag(&[4.0, 4.0]));
        let bounds = variance_bounds(&f, &EstimationConfig::default()).unwrap();
        assert!((bounds.delta_independent - 0.5).abs() <= 1e-14);
        assert!((bounds.delta_simultaneous - 0.25).abs() <= 1e-14);
        assert!((bounds.per_parameter_simultaneous[0] - 0.25).abs() <= 1e-14);
        let r = performance_ratio(&f, &EstimationConfig::default()).unwrap();
        assert_eq!(r, 2.0);
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let f = QfiMatrix::new(vec![Level::A, Level::B], RealMatrix::diag(&[0.0, 4.0]));
        assert!(matches!(
            variance_bounds(&f, &EstimationConfig::default()),
            Err(EstimationError::ZeroDiagonal { parameter: Level::A })
        ));
    }

    #[test]
    fn trace_of_inverse_matches_closed_form_2x2() {
        let params = generic_params();
        let t = 2.3;
        let f = qfim_pure(&params, t, &[Level::A, Level::B]).unwrap();
        let bounds = variance_bounds(&f, &EstimationConfig::default()).unwrap();
        let (a, b, d) = (f.entry(0, 0), f.entry(0, 1), f.entry(1, 1));
        let det = a * d - b * b;
        let expected = (a + d) / det / 2.0;
        assert!((bounds.delta_simultaneous - expected).abs() <= 1e-10 * expected.abs());
    }

    #[test]
    fn ratio_is_two_at_cpt_for_upper_lower_pairs() {
        let params = cpt_params();
        let cfg = EstimationConfig::default();
        for subset in [[Level::A, Level::B], [Level::A, Level::C]] {
            for k in 1..20 {
                let t = 0.5 * k as f64;
                let f = qfim_pure(&params, t, &subset).unwrap();
                let r = performance_ratio(&f, &cfg).unwrap();
                assert!((r - 2.0).abs() <= 1e-8, "t={t}");
            }
        }
    }

    #[test]
    fn lower_pair_at_cpt_hits_singular_path() {
        let params = cpt_params();
        let f = qfim_pure(&params, 2.0, &[Level::B, Level::C]).unwrap();
        let err = performance_ratio(&f, &EstimationConfig::default()).unwrap_err();
        assert!(matches!(err, EstimationError::SingularQfim { .. }), "got {err:?}");
    }

    #[test]
    fn ratio_stays_within_bounds_off_cpt() {
        let params = generic_params();
        let cfg = EstimationConfig::default();
        for k in 1..40 {
            let t = 0.3 * k as f64;
            let f = qfim_pure(&params, t, &[Level::A, Level::B]).unwrap();
            match performance_ratio(&f, &cfg) {
                Ok(r) => assert!((-1e-10..=2.0 + 1e-10).contains(&r), "R = {r}"),
                Err(EstimationError::SingularQfim { .. })
                | Err(EstimationError::ZeroDiagonal { .. }) => {}
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
    }

    #[test]
    fn qfi_is_independent_of_level_energies() {
        let base = generic_params();
        let shifted = LambdaParams {
            omega_a: base.omega_a + 11.0,
            omega_b: base.omega_b - 3.0,
            omega_c: base.omega_c + 7.5,
            ..base.clone()
        };
        for level in Level::ALL {
            for k in 1..15 {
                let t = 0.6 * k as f64;
                let a = qfi_pure(&base, t, level).unwrap();
                let b = qfi_pure(&shifted, t, level).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.max(1.0));
                let ha = hss(&base, t, level).unwrap();
                let hb = hss(&shifted, t, level).unwrap();
                assert!((ha - hb).abs() <= 1e-10 * ha.max(1.0));
            }
        }
    }
}
