//! Parameter and time sweeps with deterministic CSV output.
//!
//! A sweep is described by a [`SweepSpec`]: one grid axis, a fixed parameter
//! set, and a list of quantities to evaluate at each grid point. Specs are
//! read from line-oriented `key = value` files (see [`parse_config`]) or from
//! the shipped presets in [`presets`]. The same spec always produces
//! byte-identical CSV.
//!
//! Cells whose value is genuinely undefined at a grid point (a singular QFI
//! matrix, a vanishing diagonal entry) are emitted as empty fields and
//! counted in [`SweepResult::undefined_cells`]; nothing is regularized.

use std::io::Write;

use thiserror::Error;

use crate::estimation::{
    hss, performance_ratio, qfi_pure, qfim_pure, saturability_witness, variance_bounds,
    EstimationConfig, EstimationError,
};
use crate::model::{LambdaParams, Level, ModelError, CPT_TOL};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
    #[error("evaluation failed at grid index {index} ({axis} = {value}): {source}")]
    Evaluation {
        index: usize,
        axis: &'static str,
        value: f64,
        source: EstimationError,
    },
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("series too short for extremum search: {len} < 3")]
    SeriesTooShort { len: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Parse { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    Type { line: usize, key: String, reason: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
}

/// The grid variable of a sweep.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Time,
    Alpha,
    OmegaR1,
    OmegaR2,
    Theta,
}

impl SweepAxis {
    pub fn key(self) -> &'static str {
        match self {
            SweepAxis::Time => "time",
            SweepAxis::Alpha => "alpha",
            SweepAxis::OmegaR1 => "omega_R1",
            SweepAxis::OmegaR2 => "omega_R2",
            SweepAxis::Theta => "theta",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "time" => Some(SweepAxis::Time),
            "alpha" => Some(SweepAxis::Alpha),
            "omega_R1" => Some(SweepAxis::OmegaR1),
            "omega_R2" => Some(SweepAxis::OmegaR2),
            "theta" => Some(SweepAxis::Theta),
            _ => None,
        }
    }
}

/// One requested output column group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Quantity {
    Qfi(Level),
    Hss(Level),
    Qfim(Vec<Level>),
    Ratio(Vec<Level>),
    Bounds(Vec<Level>),
    Witness(Vec<Level>),
    CptFlag,
}

fn subset_label(subset: &[Level]) -> String {
    subset.iter().map(|p| p.label()).collect::<Vec<_>>().join("+")
}

impl Quantity {
    /// Parse a token such as `qfi:wa`, `ratio:wa+wb` or `cpt_flag`.
    pub fn parse(token: &str) -> Result<Self, String> {
        let token = token.trim();
        if token == "cpt_flag" {
            return Ok(Quantity::CptFlag);
        }
        let (kind, args) = token
            .split_once(':')
            .ok_or_else(|| format!("expected `kind:params`, got `{token}`"))?;
        let parse_one = |s: &str| {
            Level::parse(s).ok_or_else(|| format!("unknown parameter `{s}` (expected wa, wb or wc)"))
        };
        let parse_subset = |s: &str, min: usize| -> Result<Vec<Level>, String> {
            let levels = s.split('+').map(parse_one).collect::<Result<Vec<_>, _>>()?;
            if levels.len() < min {
                return Err(format!("`{token}` needs at least {min} parameters"));
            }
            if levels.len() > 3 {
                return Err(format!("`{token}` names more than 3 parameters"));
            }
            for (i, a) in levels.iter().enumerate() {
                if levels[i + 1..].contains(a) {
                    return Err(format!("duplicate parameter `{a}` in `{token}`"));
                }
            }
            Ok(levels)
        };
        match kind {
            "qfi" => Ok(Quantity::Qfi(parse_one(args)?)),
            "hss" => Ok(Quantity::Hss(parse_one(args)?)),
            "qfim" => Ok(Quantity::Qfim(parse_subset(args, 1)?)),
            "ratio" => Ok(Quantity::Ratio(parse_subset(args, 1)?)),
            "bounds" => Ok(Quantity::Bounds(parse_subset(args, 1)?)),
            "witness" => Ok(Quantity::Witness(parse_subset(args, 2)?)),
            other => Err(format!("unknown quantity kind `{other}`")),
        }
    }

    pub fn token(&self) -> String {
        match self {
            Quantity::Qfi(p) => format!("qfi:{p}"),
            Quantity::Hss(p) => format!("hss:{p}"),
            Quantity::Qfim(s) => format!("qfim:{}", subset_label(s)),
            Quantity::Ratio(s) => format!("ratio:{}", subset_label(s)),
            Quantity::Bounds(s) => format!("bounds:{}", subset_label(s)),
            Quantity::Witness(s) => format!("witness:{}", subset_label(s)),
            Quantity::CptFlag => "cpt_flag".into(),
        }
    }

    fn column_names(&self) -> Vec<String> {
        match self {
            Quantity::Qfi(p) => vec![format!("F_{p}")],
            Quantity::Hss(p) => vec![format!("HSS_{p}")],
            Quantity::Qfim(s) => {
                let label = subset_label(s);
                let mut names = Vec::new();
                for i in 0..s.len() {
                    for j in i..s.len() {
                        names.push(format!("F({label})[{}][{}]", s[i], s[j]));
                    }
                }
                names.push(format!("det({label})"));
                names
            }
            Quantity::Ratio(s) => vec![format!("R({})", subset_label(s))],
            Quantity::Bounds(s) => {
                let label = subset_label(s);
                let mut names = vec![format!("Delta_i({label})"), format!("Delta_s({label})")];
                for p in s {
                    names.push(format!("Var_s({label})[{p}]"));
                }
                names
            }
            Quantity::Witness(s) => vec![format!("W({})", subset_label(s))],
            Quantity::CptFlag => vec!["cpt".into()],
        }
    }
}

/// Complete description of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub fixed: LambdaParams,
    pub repetitions: u32,
    pub quantities: Vec<Quantity>,
    /// Time at which non-time axes are evaluated.
    pub time: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.points < 2 {
            return Err(SweepError::InvalidSpec {
                field: "points",
                reason: format!("must be at least 2, got {}", self.points),
            });
        }
        if self.start >= self.stop {
            return Err(SweepError::InvalidSpec {
                field: "start/stop",
                reason: format!("need start < stop, got {} >= {}", self.start, self.stop),
            });
        }
        if self.quantities.is_empty() {
            return Err(SweepError::InvalidSpec {
                field: "quantities",
                reason: "must not be empty".into(),
            });
        }
        if self.repetitions == 0 {
            return Err(SweepError::InvalidSpec {
                field: "M",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Parameters at one grid value of the axis.
    fn params_at(&self, value: f64) -> LambdaParams {
        let mut p = self.fixed.clone();
        match self.axis {
            SweepAxis::Time => {}
            // alpha = phi1 - phi2 - psi; the grid drives phi1.
            SweepAxis::Alpha => p.phi1 = value + p.phi2 + p.psi,
            SweepAxis::OmegaR1 => p.rabi1 = value,
            SweepAxis::OmegaR2 => p.rabi2 = value,
            SweepAxis::Theta => p.theta = value,
        }
        p
    }

    fn time_at(&self, value: f64) -> f64 {
        match self.axis {
            SweepAxis::Time => value,
            _ => self.time,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.start + step * k as f64).collect()
    }
}

/// Output of [`run_sweep`]: a header, one row per grid point (empty cells for
/// undefined values) and an echo of the resolved spec.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub provenance: SweepSpec,
    pub undefined_cells: usize,
}

impl SweepResult {
    /// Index of a column by header name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// A full column as `f64`, failing on undefined cells.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows.iter().map(|row| row[idx]).collect()
    }

    /// Plain-text summary of the run (not part of the CSV).
    pub fn summary(&self) -> String {
        let spec = &self.provenance;
        let p = &spec.fixed;
        let quantities: Vec<String> = spec.quantities.iter().map(|q| q.token()).collect();
        format!(
            "sweep: axis={} start={} stop={} points={}\n\
             params: omega_R1={} omega_R2={} phi1={} phi2={} psi={} theta={} \
             omega_a={} omega_b={} omega_c={} M={} t={}\n\
             quantities: {}\n\
             rows: {}  undefined cells: {}",
            spec.axis.key(),
            spec.start,
            spec.stop,
            spec.points,
            p.rabi1,
            p.rabi2,
            p.phi1,
            p.phi2,
            p.psi,
            p.theta,
            p.omega_a,
            p.omega_b,
            p.omega_c,
            spec.repetitions,
            spec.time,
            quantities.join(","),
            self.rows.len(),
            self.undefined_cells,
        )
    }
}

fn axis_columns(spec: &SweepSpec) -> Vec<String> {
    match spec.axis {
        SweepAxis::Time => vec!["t".into(), "t_scaled".into()],
        other => vec![other.key().into()],
    }
}

/// Evaluate all requested quantities over the grid.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    spec.fixed.validate()?;

    let mut header = axis_columns(spec);
    for q in &spec.quantities {
        header.extend(q.column_names());
    }

    let cfg = EstimationConfig { repetitions: spec.repetitions };
    let mut rows = Vec::with_capacity(spec.points);
    let mut undefined = 0usize;
    for (index, value) in spec.grid().into_iter().enumerate() {
        let params = spec.params_at(value);
        let t = spec.time_at(value);
        let mut row: Vec<Option<f64>> = Vec::with_capacity(header.len());
        match spec.axis {
            SweepAxis::Time => {
                row.push(Some(t));
                // The scaled axis follows the plots: t·Ω' for an equal-Rabi
                // drive, t·Ω otherwise.
                let scale = if params.equal_rabi() { params.rabi1 } else { params.omega() };
                row.push(Some(t * scale));
            }
            _ => row.push(Some(value)),
        }
        for q in &spec.quantities {
            append_quantity(q, &params, t, &cfg, &mut row).map_err(|source| {
                SweepError::Evaluation { index, axis: spec.axis.key(), value, source }
            })?;
        }
        undefined += row.iter().filter(|c| c.is_none()).count();
        rows.push(row);
    }
    Ok(SweepResult { header, rows, provenance: spec.clone(), undefined_cells: undefined })
}

fn append_quantity(
    q: &Quantity,
    params: &LambdaParams,
    t: f64,
    cfg: &EstimationConfig,
    row: &mut Vec<Option<f64>>,
) -> Result<(), EstimationError> {
    match q {
        Quantity::Qfi(p) => row.push(Some(qfi_pure(params, t, *p)?)),
        Quantity::Hss(p) => row.push(Some(hss(params, t, *p)?)),
        Quantity::Qfim(s) => {
            let f = qfim_pure(params, t, s)?;
            for i in 0..s.len() {
                for j in i..s.len() {
                    row.push(Some(f.entry(i, j)));
                }
            }
            row.push(Some(f.determinant()));
        }
        Quantity::Ratio(s) => {
            let f = qfim_pure(params, t, s)?;
            match performance_ratio(&f, cfg) {
                Ok(r) => row.push(Some(r)),
                Err(EstimationError::ZeroDiagonal { .. })
                | Err(EstimationError::SingularQfim { .. }) => row.push(None),
                Err(e) => return Err(e),
            }
        }
        Quantity::Bounds(s) => {
            let f = qfim_pure(params, t, s)?;
            match variance_bounds(&f, cfg) {
                Ok(b) => {
                    row.push(Some(b.delta_independent));
                    row.push(Some(b.delta_simultaneous));
                    for v in b.per_parameter_simultaneous {
                        row.push(Some(v));
                    }
                }
                Err(EstimationError::ZeroDiagonal { .. })
                | Err(EstimationError::SingularQfim { .. }) => {
                    for _ in 0..(2 + s.len()) {
                        row.push(None);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Quantity::Witness(s) => row.push(Some(saturability_witness(params, t, s)?)),
        Quantity::CptFlag => row.push(Some(if params.is_cpt(CPT_TOL) { 1.0 } else { 0.0 })),
    }
    Ok(())
}

/// Write a result as CSV: comma separators, LF line endings, shortest
/// round-trip decimal numbers, empty fields for undefined cells.
pub fn emit_csv<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    let mut line = result.header.join(",");
    line.push('\n');
    out.write_all(line.as_bytes())?;
    for row in &result.rows {
        let mut first = true;
        line.clear();
        for cell in row {
            if !first {
                line.push(',');
            }
            first = false;
            if let Some(v) = cell {
                line.push_str(&format!("{v}"));
            }
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Strict interior local maxima and minima of a series. Runs of equal
/// adjacent values collapse to their leftmost index before comparison.
pub fn local_extrema(series: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut runs: Vec<(usize, f64)> = Vec::new();
    for (i, &v) in series.iter().enumerate() {
        match runs.last() {
            Some(&(_, last)) if last == v => {}
            _ => runs.push((i, v)),
        }
    }
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for w in 1..runs.len().saturating_sub(1) {
        let (idx, v) = runs[w];
        let prev = runs[w - 1].1;
        let next = runs[w + 1].1;
        if v > prev && v > next {
            maxima.push(idx);
        } else if v < prev && v < next {
            minima.push(idx);
        }
    }
    (maxima, minima)
}

/// Comparison of the local-extremum structure of two equally sampled series.
#[derive(Clone, Debug)]
pub struct ExtremaReport {
    pub matched: bool,
    pub maxima_a: Vec<usize>,
    pub maxima_b: Vec<usize>,
    pub minima_a: Vec<usize>,
    pub minima_b: Vec<usize>,
}

/// True when both series have identical sets of strict interior local maxima
/// and minima.
pub fn extrema_match(series_a: &[f64], series_b: &[f64]) -> Result<ExtremaReport, SweepError> {
    if series_a.len() != series_b.len() {
        return Err(SweepError::LengthMismatch { left: series_a.len(), right: series_b.len() });
    }
    if series_a.len() < 3 {
        return Err(SweepError::SeriesTooShort { len: series_a.len() });
    }
    let (maxima_a, minima_a) = local_extrema(series_a);
    let (maxima_b, minima_b) = local_extrema(series_b);
    let matched = maxima_a == maxima_b && minima_a == minima_b;
    Ok(ExtremaReport { matched, maxima_a, maxima_b, minima_a, minima_b })
}

/// Parse a line-oriented `key = value` configuration document into a
/// [`SweepSpec`]. `#` starts a comment; unknown keys are rejected; omitted
/// keys take the documented defaults (`theta = π/2`, `psi = phi1 = phi2 = 0`,
/// `M = 1`, `points = 200`, `t = 1`).
pub fn parse_config(text: &str) -> Result<SweepSpec, ConfigError> {
    let mut axis: Option<SweepAxis> = None;
    let mut start: Option<f64> = None;
    let mut stop: Option<f64> = None;
    let mut points: usize = 200;
    let mut time: f64 = 1.0;
    let mut params = LambdaParams::default();
    let mut repetitions: u32 = 1;
    let mut quantities: Vec<Quantity> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line, text: content.to_string() })?;
        let key = key.trim();
        let value = value.trim();
        let float = |v: &str, key: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>().map_err(|e| ConfigError::Type {
                line,
                key: key.to_string(),
                reason: e.to_string(),
            })
        };
        match key {
            "axis" => {
                axis = Some(SweepAxis::parse(value).ok_or_else(|| ConfigError::Type {
                    line,
                    key: key.into(),
                    reason: format!(
                        "unknown axis `{value}` (expected time, alpha, omega_R1, omega_R2 or theta)"
                    ),
                })?);
            }
            "start" => start = Some(float(value, key)?),
            "stop" => stop = Some(float(value, key)?),
            "points" => {
                points = value.parse::<usize>().map_err(|e| ConfigError::Type {
                    line,
                    key: key.into(),
                    reason: e.to_string(),
                })?;
            }
            "t" => time = float(value, key)?,
            "omega_R1" => params.rabi1 = float(value, key)?,
            "omega_R2" => params.rabi2 = float(value, key)?,
            "phi1" => params.phi1 = float(value, key)?,
            "phi2" => params.phi2 = float(value, key)?,
            "psi" => params.psi = float(value, key)?,
            "theta" => params.theta = float(value, key)?,
            "omega_a" => params.omega_a = float(value, key)?,
            "omega_b" => params.omega_b = float(value, key)?,
            "omega_c" => params.omega_c = float(value, key)?,
            "M" => {
                repetitions = value.parse::<u32>().map_err(|e| ConfigError::Type {
                    line,
                    key: key.into(),
                    reason: e.to_string(),
                })?;
            }
            "quantities" => {
                quantities = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(Quantity::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|reason| ConfigError::Type { line, key: key.into(), reason })?;
            }
            other => {
                return Err(ConfigError::UnknownKey { line, key: other.to_string() });
            }
        }
    }

    Ok(SweepSpec {
        axis: axis.ok_or(ConfigError::MissingKey("axis"))?,
        start: start.ok_or(ConfigError::MissingKey("start"))?,
        stop: stop.ok_or(ConfigError::MissingKey("stop"))?,
        points,
        fixed: params,
        repetitions,
        quantities: if quantities.is_empty() {
            return Err(ConfigError::MissingKey("quantities"));
        } else {
            quantities
        },
        time,
    })
}

/// Shipped sweep presets reproducing the reference curves.
pub mod presets {
    /// `(name, configuration text)` pairs, in deterministic order.
    pub const ALL: &[(&str, &str)] = &[
        ("fig2a", include_str!("../presets/fig2a.cfg")),
        ("fig2b", include_str!("../presets/fig2b.cfg")),
        ("fig3a", include_str!("../presets/fig3a.cfg")),
        ("fig3b", include_str!("../presets/fig3b.cfg")),
        ("fig4a", include_str!("../presets/fig4a.cfg")),
        ("fig4b", include_str!("../presets/fig4b.cfg")),
        ("fig5a", include_str!("../presets/fig5a.cfg")),
        ("fig5b", include_str!("../presets/fig5b.cfg")),
        ("fig5c", include_str!("../presets/fig5c.cfg")),
        ("fig6a", include_str!("../presets/fig6a.cfg")),
        ("fig6b", include_str!("../presets/fig6b.cfg")),
        ("fig7a", include_str!("../presets/fig7a.cfg")),
        ("fig7b", include_str!("../presets/fig7b.cfg")),
        ("fig8a", include_str!("../presets/fig8a.cfg")),
        ("fig8b", include_str!("../presets/fig8b.cfg")),
        ("fig9a", include_str!("../presets/fig9a.cfg")),
        ("fig9b", include_str!("../presets/fig9b.cfg")),
        ("fig10a", include_str!("../presets/fig10a.cfg")),
        ("fig10b", include_str!("../presets/fig10b.cfg")),
    ];

    pub fn get(name: &str) -> Option<&'static str> {
        ALL.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
    }

    pub fn names() -> Vec<&'static str> {
        ALL.iter().map(|(n, _)| *n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn minimal_config() -> &'static str {
        "axis = time\nstart = 0\nstop = 2\nquantities = qfi:wb\n"
    }

    #[test]
    fn minimal_document_takes_defaults() {
        let spec = parse_config(minimal_config()).unwrap();
        assert_eq!(spec.axis, SweepAxis::Time);
        assert_eq!(spec.points, 200);
        assert_eq!(spec.repetitions, 1);
        assert!((spec.fixed.theta - PI / 2.0).abs() <= 1e-15);
        assert_eq!(spec.fixed.psi, 0.0);
        assert_eq!(spec.fixed.phi1, 0.0);
        assert_eq!(spec.quantities, vec![Quantity::Qfi(Level::B)]);
    }

    #[test]
    fn theta_defaults_to_half_pi_when_omitted() {
        let spec = parse_config("axis = time\nstart = 0\nstop = 1\nquantities = hss:wa\n").unwrap();
        assert!((spec.fixed.theta - PI / 2.0).abs() <= 1e-15);
    }

    #[test]
    fn malformed_number_names_the_line() {
        let err = parse_config("axis = time\nstart = zero\nstop = 1\nquantities = qfi:wa\n")
            .unwrap_err();
        match err {
            ConfigError::Type { line, key, .. } => {
                assert_eq!(line, 2);
                assert_eq!(key, "start");
            }
            other => panic!("expected Type error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config("axis = time\nstart = 0\nstop = 1\ndetuning = 3\nquantities = qfi:wa\n")
            .unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 4, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# sweep\naxis = time # grid\n\nstart = 0\nstop = 1\nquantities = qfi:wa\n";
        assert!(parse_config(text).is_ok());
    }

    #[test]
    fn quantity_token_round_trip() {
        for token in ["qfi:wa", "hss:wc", "qfim:wa+wb", "ratio:wb+wc", "bounds:wa+wb+wc", "witness:wa+wc", "cpt_flag"] {
            let q = Quantity::parse(token).unwrap();
            assert_eq!(q.token(), token);
        }
        assert!(Quantity::parse("qfi:wd").is_err());
        assert!(Quantity::parse("witness:wa").is_err());
        assert!(Quantity::parse("ratio:wa+wa").is_err());
    }

    #[test]
    fn two_point_sweep_shape() {
        let spec = SweepSpec {
            axis: SweepAxis::Time,
            start: 0.0,
            stop: 2.0,
            points: 2,
            fixed: LambdaParams { rabi1: 1.0, rabi2: 1.0, psi: PI, ..Default::default() },
            repetitions: 1,
            quantities: vec![Quantity::Qfi(Level::B)],
            time: 0.0,
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.header, vec!["t", "t_scaled", "F_wb"]);
        assert_eq!(result.rows.len(), 2);
        let mut csv = Vec::new();
        emit_csv(&result, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,t_scaled,F_wb");
        assert_eq!(lines.next().unwrap(), "0,0,0");
        // At coherent trapping F_wb = t².
        let last = lines.next().unwrap();
        assert!(last.starts_with("2,2,"));
        let f: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
        assert!((f - 4.0).abs() <= 1e-10);
    }

    #[test]
    fn undefined_ratio_cells_are_empty() {
        // Lower-level pair at coherent trapping: singular QFI matrix.
        let spec = SweepSpec {
            axis: SweepAxis::Time,
            start: 1.0,
            stop: 2.0,
            points: 3,
            fixed: LambdaParams { rabi1: 1.0, rabi2: 1.0, psi: PI, ..Default::default() },
            repetitions: 1,
            quantities: vec![Quantity::Ratio(vec![Level::B, Level::C])],
            time: 0.0,
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.undefined_cells, 3);
        let mut csv = Vec::new();
        emit_csv(&result, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        for line in text.lines().skip(1) {
            assert!(line.ends_with(','), "expected trailing empty field in `{line}`");
        }
    }

    #[test]
    fn repeat_runs_are_byte_identical() {
        let spec = parse_config(presets::get("fig2a").unwrap()).unwrap();
        let mut first = Vec::new();
        let mut second = Vec::new();
        emit_csv(&run_sweep(&spec).unwrap(), &mut first).unwrap();
        emit_csv(&run_sweep(&spec).unwrap(), &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn cpt_time_sweep_zeroes_upper_level_qfi() {
        let spec = SweepSpec {
            axis: SweepAxis::Time,
            start: 0.0,
            stop: 12.0,
            points: 101,
            fixed: LambdaParams { rabi1: 1.0, rabi2: 1.0, psi: PI, ..Default::default() },
            repetitions: 1,
            quantities: vec![Quantity::Qfi(Level::A), Quantity::CptFlag],
            time: 0.0,
        };
        let result = run_sweep(&spec).unwrap();
        for value in result.column("F_wa").unwrap() {
            assert!(value.abs() <= 1e-10);
        }
        for flag in result.column("cpt").unwrap() {
            assert_eq!(flag, 1.0);
        }
    }

    #[test]
    fn cpt_time_sweep_ground_level_qfi_is_t_squared() {
        let spec = SweepSpec {
            axis: SweepAxis::Time,
            start: 0.0,
            stop: 4.0 * PI,
            points: 201,
            fixed: LambdaParams { rabi1: 1.0, rabi2: 1.0, psi: PI, ..Default::default() },
            repetitions: 1,
            quantities: vec![Quantity::Qfi(Level::B)],
            time: 0.0,
        };
        let result = run_sweep(&spec).unwrap();
        let ts = result.column("t").unwrap();
        let fs = result.column("F_wb").unwrap();
        for (t, f) in ts.iter().zip(fs.iter()) {
            assert!((f - t * t).abs() <= 1e-8, "t={t}");
        }
    }

    #[test]
    fn alpha_sweep_peaks_at_half_pi_and_dies_at_pi() {
        // Fixed t·Ω' = π/√2 with an equal-Rabi drive.
        let spec = SweepSpec {
            axis: SweepAxis::Alpha,
            start: 0.0,
            stop: PI,
            points: 101,
            fixed: LambdaParams { rabi1: 1.0, rabi2: 1.0, ..Default::default() },
            repetitions: 1,
            quantities: vec![Quantity::Qfi(Level::A)],
            time: PI / 2.0f64.sqrt(),
        };
        let result = run_sweep(&spec).unwrap();
        let alphas = result.column("alpha").unwrap();
        let values = result.column("F_wa").unwrap();
        let argmax = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((alphas[argmax] - PI / 2.0).abs() <= 1e-12, "argmax at {}", alphas[argmax]);
        assert!(values.last().unwrap().abs() <= 1e-10);
    }

    #[test]
    fn extrema_of_identical_and_scaled_series_match() {
        let series: Vec<f64> = (0..50).map(|k| (0.3 * k as f64).sin()).collect();
        let scaled: Vec<f64> = series.iter().map(|v| 2.0 * v).collect();
        assert!(extrema_match(&series, &series).unwrap().matched);
        assert!(extrema_match(&series, &scaled).unwrap().matched);
    }

    #[test]
    fn extrema_mismatch_and_errors() {
        let a = [0.0, 1.0, 0.0, 1.0, 0.0];
        let b = [0.0, 0.0, 1.0, 0.0, 0.0];
        assert!(!extrema_match(&a, &b).unwrap().matched);
        assert!(matches!(
            extrema_match(&a[..3], &b),
            Err(SweepError::LengthMismatch { .. })
        ));
        assert!(matches!(
            extrema_match(&a[..2], &b[..2]),
            Err(SweepError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn plateaus_collapse_to_leftmost_index() {
        let series = [0.0, 2.0, 2.0, 0.0, -1.0, -1.0, 0.5];
        let (maxima, minima) = local_extrema(&series);
        assert_eq!(maxima, vec![1]);
        assert_eq!(minima, vec![4]);
    }

    #[test]
    fn grid_refinement_keeps_extrema_verdicts() {
        for points in [1000, 2000] {
            let spec = parse_config(presets::get("fig5a").unwrap()).unwrap();
            let spec = SweepSpec { points, ..spec };
            let result = run_sweep(&spec).unwrap();
            let f = result.column("F_wa").unwrap();
            let h = result.column("HSS_wa").unwrap();
            assert!(extrema_match(&f, &h).unwrap().matched, "points = {points}");
        }
    }

    #[test]
    fn all_presets_parse_and_run() {
        for (name, text) in presets::ALL {
            let spec = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let result = run_sweep(&spec).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(result.rows.len(), spec.points, "{name}");
        }
    }

    #[test]
    fn trapping_presets_reproduce_reference_columns() {
        // fig2b: the upper-level QFI column is identically zero.
        let spec = parse_config(presets::get("fig2b").unwrap()).unwrap();
        let result = run_sweep(&spec).unwrap();
        for v in result.column("F_wa").unwrap() {
            assert!(v.abs() <= 1e-10);
        }
        // fig4b: the ground-level QFI column equals t².
        let spec = parse_config(presets::get("fig4b").unwrap()).unwrap();
        let result = run_sweep(&spec).unwrap();
        let ts = result.column("t").unwrap();
        for (t, f) in ts.iter().zip(result.column("F_wb").unwrap()) {
            assert!((f - t * t).abs() <= 1e-8);
        }
    }

    #[test]
    fn ratio_plateau_at_two_for_trapping_presets() {
        for name in ["fig7a", "fig9a"] {
            let spec = parse_config(presets::get(name).unwrap()).unwrap();
            let result = run_sweep(&spec).unwrap();
            let column = result
                .header
                .iter()
                .position(|h| h.starts_with("R("))
                .unwrap();
            for (k, row) in result.rows.iter().enumerate() {
                if k == 0 {
                    // t = 0 carries no information; the ratio is undefined.
                    assert!(row[column].is_none(), "{name}: expected empty cell at t=0");
                } else {
                    let r = row[column].unwrap();
                    assert!((r - 2.0).abs() <= 1e-8, "{name}: R = {r} at row {k}");
                }
            }
        }
    }

    #[test]
    fn lower_pair_trapping_preset_is_undefined_everywhere() {
        let spec = parse_config(presets::get("fig10a").unwrap()).unwrap();
        let result = run_sweep(&spec).unwrap();
        let column = result.header.iter().position(|h| h.starts_with("R(")).unwrap();
        for row in &result.rows {
            assert!(row[column].is_none());
        }
        assert!(result.undefined_cells >= result.rows.len());
    }
}
