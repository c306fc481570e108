//! Closed-form QFI expressions for the driven Λ atom, transcribed once and
//! validated against the numeric engine.
//!
//! These formulas are the independent analytic route used by
//! [`cross_validate`]: they depend only on the drive amplitudes, the control
//! phase `α`, the mixing angle `θ` and time, never on the evolved state. The
//! `Ω²` denominators are factored once per formula to avoid cancellation.

use thiserror::Error;

use crate::estimation::{qfi_pure, qfi_sld, EstimationError};
use crate::model::{LambdaParams, Level, ModelError};

/// Identifiers for the closed-form QFI expressions.
///
/// `General` forms hold for any drive; `EqualRabi` forms require
/// `Ω₁ = Ω₂ = Ω'`; the `Max` forms are the optima quoted for special phase
/// settings (`α = π/2, θ = π/2` for `FWaMax`, coherent trapping for
/// `FWbMax`/`FWcMax`); the `Limit` forms are the strong-drive limits `t²`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ClosedFormId {
    FWaGeneral,
    FWbGeneral,
    FWcGeneral,
    FWaEqualRabi,
    FWbEqualRabi,
    FWcEqualRabi,
    FWaMax,
    FWbMax,
    FWcMax,
    FWbLimitLargeRabi2,
    FWcLimitLargeRabi1,
}

impl ClosedFormId {
    pub const ALL: [ClosedFormId; 11] = [
        ClosedFormId::FWaGeneral,
        ClosedFormId::FWbGeneral,
        ClosedFormId::FWcGeneral,
        ClosedFormId::FWaEqualRabi,
        ClosedFormId::FWbEqualRabi,
        ClosedFormId::FWcEqualRabi,
        ClosedFormId::FWaMax,
        ClosedFormId::FWbMax,
        ClosedFormId::FWcMax,
        ClosedFormId::FWbLimitLargeRabi2,
        ClosedFormId::FWcLimitLargeRabi1,
    ];
}

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("formula {id:?} requires {requirement} (violated by {deviation:.3e})")]
    DomainViolation {
        id: ClosedFormId,
        requirement: &'static str,
        deviation: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

const PHASE_DOMAIN_TOL: f64 = 1e-9;

/// Evaluate one closed-form QFI expression at the given parameter point.
pub fn eval_closed_form(
    id: ClosedFormId,
    params: &LambdaParams,
    t: f64,
) -> Result<f64, AnalyticError> {
    params.validate()?;
    if t < 0.0 {
        return Err(ModelError::NegativeTime(t).into());
    }
    use ClosedFormId::*;
    match id {
        FWaGeneral => Ok(f_wa_general(params, t)),
        FWbGeneral => Ok(f_wb_general(params, t)),
        FWcGeneral => Ok(f_wc_general(params, t)),
        FWaEqualRabi => {
            require_equal_rabi(id, params)?;
            Ok(f_wa_equal_rabi(params, t))
        }
        FWbEqualRabi => {
            require_equal_rabi(id, params)?;
            Ok(f_wb_equal_rabi(params, t))
        }
        FWcEqualRabi => {
            require_equal_rabi(id, params)?;
            Ok(f_wc_equal_rabi(params, t))
        }
        FWaMax => {
            require_equal_rabi(id, params)?;
            let alpha_dev = (params.alpha() - std::f64::consts::FRAC_PI_2).abs();
            let theta_dev = (params.theta - std::f64::consts::FRAC_PI_2).abs();
            let dev = alpha_dev.max(theta_dev);
            if dev > PHASE_DOMAIN_TOL {
                return Err(AnalyticError::DomainViolation {
                    id,
                    requirement: "alpha = pi/2 and theta = pi/2",
                    deviation: dev,
                });
            }
            Ok(f_wa_max(params.rabi1, t))
        }
        FWbMax | FWcMax => {
            if !params.is_cpt(PHASE_DOMAIN_TOL) {
                return Err(AnalyticError::DomainViolation {
                    id,
                    requirement: "coherent trapping (equal Rabi, theta = pi/2, alpha = ±pi)",
                    deviation: f64::NAN,
                });
            }
            Ok(t * t)
        }
        FWbLimitLargeRabi2 | FWcLimitLargeRabi1 => Ok(t * t),
    }
}

fn require_equal_rabi(id: ClosedFormId, params: &LambdaParams) -> Result<(), AnalyticError> {
    if params.equal_rabi() {
        Ok(())
    } else {
        Err(AnalyticError::DomainViolation {
            id,
            requirement: "equal Rabi frequencies",
            deviation: (params.rabi1 - params.rabi2).abs(),
        })
    }
}

/// General QFI for the upper level energy.
pub fn f_wa_general(params: &LambdaParams, t: f64) -> f64 {
    let (r1, r2) = (params.rabi1, params.rabi2);
    let w = r1 * r1 + r2 * r2;
    let alpha = params.alpha();
    let theta = params.theta;
    let sin_sq_half = (0.5 * t * w.sqrt()).sin().powi(2);
    let inner = (r1 * r1
        + 2.0 * alpha.cos() * theta.sin() * r1 * r2
        + r2 * r2
        + theta.cos() * (r1 * r1 - r2 * r2))
        / w;
    let deviation = sin_sq_half * inner - 1.0;
    t * t * (1.0 - deviation * deviation)
}

/// General QFI for the ground level energy.
pub fn f_wb_general(params: &LambdaParams, t: f64) -> f64 {
    let (r1, r2) = (params.rabi1, params.rabi2);
    let (a, b) = (r1 * r1, r2 * r2);
    let w = a + b;
    let alpha = params.alpha();
    let theta = params.theta;
    let half = 0.5 * t * w.sqrt();
    let quarter_sin_sq = (0.25 * t * w.sqrt()).sin().powi(2);
    let cos_half = half.cos();
    let cos_sq_half = cos_half * cos_half;
    let x = w * w
        + 4.0 * alpha.cos() * theta.sin() * quarter_sin_sq * r1 * r2 * (cos_half * a + b)
        - w * (cos_sq_half * a + b)
        - theta.cos()
            * ((-1.0 + 4.0 * cos_half) * a * b + b * b + cos_sq_half * (a * a - a * b));
    let scaled = x / (w * w);
    t * t * (1.0 - scaled * scaled)
}

/// General QFI for the intermediate level energy.
pub fn f_wc_general(params: &LambdaParams, t: f64) -> f64 {
    let (r1, r2) = (params.rabi1, params.rabi2);
    let (a, b) = (r1 * r1, r2 * r2);
    let w = a + b;
    let alpha = params.alpha();
    let theta = params.theta;
    let half = 0.5 * t * w.sqrt();
    let quarter_sin_sq = (0.25 * t * w.sqrt()).sin().powi(2);
    let cos_half = half.cos();
    let cos_sq_half = cos_half * cos_half;
    let x = w * w
        + 4.0 * alpha.cos() * theta.sin() * quarter_sin_sq * r1 * r2 * (a + cos_half * b)
        - w * (a + cos_sq_half * b)
        + theta.cos() * (4.0 * cos_half * a * b + (a - b) * (a - cos_sq_half * b));
    let scaled = x / (w * w);
    t * t * (1.0 - scaled * scaled)
}

/// Equal-Rabi QFI for the upper level; `rabi` is the common drive `Ω'`.
pub fn f_wa_equal_rabi(params: &LambdaParams, t: f64) -> f64 {
    let rabi = params.rabi1;
    let ca_st = params.alpha().cos() * params.theta.sin();
    let sin_sq = (t * rabi / 2.0f64.sqrt()).sin().powi(2);
    let cos_full = (2.0f64.sqrt() * t * rabi).cos();
    -0.5 * t * t * (1.0 + ca_st) * sin_sq * (-3.0 - cos_full + 2.0 * ca_st * sin_sq)
}

/// Equal-Rabi QFI for the ground level.
pub fn f_wb_equal_rabi(params: &LambdaParams, t: f64) -> f64 {
    equal_rabi_lower_level(params, t, 1.0)
}

/// Equal-Rabi QFI for the intermediate level.
pub fn f_wc_equal_rabi(params: &LambdaParams, t: f64) -> f64 {
    equal_rabi_lower_level(params, t, -1.0)
}

fn equal_rabi_lower_level(params: &LambdaParams, t: f64, sign: f64) -> f64 {
    let rabi = params.rabi1;
    let alpha = params.alpha();
    let theta = params.theta;
    let v = 2.0f64.sqrt() * t * rabi;
    let ca = alpha.cos();
    let st = theta.sin();
    let ca_st = ca * st;
    t * t / 128.0
        * (81.0 - (2.0 * theta).cos() * (29.0 + 36.0 * v.cos())
            - 4.0 * (2.0 * v).cos() * (1.0 + ca_st) * (1.0 + ca_st)
            - 6.0 * st * (4.0 * ca + (2.0 * alpha).cos() * st)
            + 4.0 * v.cos() * (-3.0 + 8.0 * ca_st + 2.0 * (2.0 * alpha).cos() * st * st)
            + sign * 128.0 * theta.cos() * (v / 2.0).cos() * (1.0 + ca_st) * (v / 2.0).sin().powi(2))
}

/// Maximized upper-level QFI at `α = π/2, θ = π/2` and equal Rabi drive:
/// `t²/2 · sin²(tΩ'/√2) · (cos(√2 tΩ') + 3)`.
pub fn f_wa_max(rabi: f64, t: f64) -> f64 {
    0.5 * t * t * (t * rabi / 2.0f64.sqrt()).sin().powi(2) * ((2.0f64.sqrt() * t * rabi).cos() + 3.0)
}

/// Agreement score of several QFI routes: `max |x - y| / (abs_floor + rel_tol·max(|x|,|y|))`
/// over all pairs; values at or below 1 pass.
const REL_TOL: f64 = 1e-8;
const ABS_FLOOR: f64 = 1e-12;

fn pair_score(x: f64, y: f64) -> f64 {
    (x - y).abs() / (ABS_FLOOR + REL_TOL * x.abs().max(y.abs()))
}

/// Cross-validation of one level energy over a time grid.
#[derive(Clone, Debug)]
pub struct LevelReport {
    pub level: Level,
    /// Number of QFI routes compared (3, or 4 in the equal-Rabi regime).
    pub routes: usize,
    pub max_abs_deviation: f64,
    /// Worst normalized deviation; the comparison passes at values <= 1.
    pub worst_score: f64,
    pub passed: bool,
}

/// Report of [`cross_validate`] covering all three level energies.
#[derive(Clone, Debug)]
pub struct CrossValidation {
    pub per_level: Vec<LevelReport>,
    pub passed: bool,
}

impl std::fmt::Display for CrossValidation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for report in &self.per_level {
            writeln!(
                f,
                "{}: routes={} max|dev|={:.3e} score={:.3e} {}",
                report.level,
                report.routes,
                report.max_abs_deviation,
                report.worst_score,
                if report.passed { "ok" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.passed { "ok" } else { "FAIL" })
    }
}

/// Compare, for each level energy and every grid time, the general closed
/// form, the equal-Rabi closed form (when applicable), the SLD-route QFI and
/// the pure-state-route QFI.
pub fn cross_validate(params: &LambdaParams, t_grid: &[f64]) -> Result<CrossValidation, AnalyticError> {
    params.validate()?;
    let equal = params.equal_rabi();
    let mut per_level = Vec::with_capacity(3);
    for level in Level::ALL {
        let mut max_abs: f64 = 0.0;
        let mut worst: f64 = 0.0;
        let mut routes = 3;
        for &t in t_grid {
            let mut values = vec![
                qfi_pure(params, t, level)?,
                qfi_sld(params, t, level)?,
                match level {
                    Level::A => f_wa_general(params, t),
                    Level::B => f_wb_general(params, t),
                    Level::C => f_wc_general(params, t),
                },
            ];
            if equal {
                values.push(match level {
                    Level::A => f_wa_equal_rabi(params, t),
                    Level::B => f_wb_equal_rabi(params, t),
                    Level::C => f_wc_equal_rabi(params, t),
                });
                routes = 4;
            }
            for i in 0..values.len() {
                for j in (i + 1)..values.len() {
                    max_abs = max_abs.max((values[i] - values[j]).abs());
                    worst = worst.max(pair_score(values[i], values[j]));
                }
            }
        }
        per_level.push(LevelReport {
            level,
            routes,
            max_abs_deviation: max_abs,
            worst_score: worst,
            passed: worst <= 1.0,
        });
    }
    let passed = per_level.iter().all(|r| r.passed);
    Ok(CrossValidation { per_level, passed })
}
