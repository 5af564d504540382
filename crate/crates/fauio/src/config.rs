//! TOML configuration: plant, synthesis scalars, solver settings and scenarios.

use std::path::Path;

use serde::Deserialize;

use fauio_core::model::PlantModel;
use fauio_core::sdp::SolverSettings;
use fauio_core::sim::{self, Expr, FilterTau, Piece, ScenarioConfig, Script, VectorScript};
use fauio_core::{DMatrix, DVector};

use crate::error::{AppError, AppResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Row-major matrix literal, `[[a, b], [c, d]]`. An empty list is a matrix
/// with zero columns whose row count is taken from context.
pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub plant: PlantSection,
    #[serde(default)]
    pub synthesis: SynthesisSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "G")]
    pub g: Rows,
    #[serde(rename = "E_f")]
    pub e_f: Rows,
    #[serde(rename = "D_f")]
    pub d_f: Rows,
    #[serde(rename = "E1", default)]
    pub e1: Option<Rows>,
    #[serde(rename = "D1", default)]
    pub d1: Option<Rows>,
    #[serde(rename = "H")]
    pub h: Vec<Rows>,
    pub lipschitz_bounds: Rows,
    /// Registry name, see [`fauio_core::sim::nonlinear::REGISTRY`].
    pub nonlinearity: String,
    #[serde(default)]
    pub nonlinearity_coefficients: Option<Rows>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSection {
    pub theorem: Option<u8>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default)]
    pub grid_epsilon: Vec<f64>,
    #[serde(default)]
    pub grid_delta: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iter: u32,
    pub tol_feas: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverSettings::default();
        Self { max_iter: d.max_iter, tol_feas: d.tol_feas, tol_gap_abs: d.tol_gap_abs, tol_gap_rel: d.tol_gap_rel }
    }
}

impl SolverSection {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            max_iter: self.max_iter,
            tol_feas: self.tol_feas,
            tol_gap_abs: self.tol_gap_abs,
            tol_gap_rel: self.tol_gap_rel,
        }
    }
}

/// Overrides applied on top of a preset.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub tau_factor: Option<TauSpec>,
}

/// `"auto"` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Factor(f64),
    Word(TauWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauWord {
    Auto,
}

impl TauSpec {
    pub fn filter(self) -> FilterTau {
        match self {
            TauSpec::Factor(f) => FilterTau::Factor(f),
            TauSpec::Word(TauWord::Auto) => FilterTau::Auto,
        }
    }
}

fn matrix(field: &str, rows: &Rows, empty_rows: usize) -> AppResult<DMatrix<f64>> {
    if rows.is_empty() {
        return Ok(DMatrix::zeros(empty_rows, 0));
    }
    let cols = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(fauio_core::Error::Dimension {
            field: format!("{field} row {i}"),
            expected: (1, cols),
            found: (1, r.len()),
        }
        .into());
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), cols, &flat))
}

impl Config {
    pub fn from_str(text: &str, path: &Path) -> AppResult<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| AppError::parse(path, e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(AppError::parse(
                path,
                format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> AppResult<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Ok((Self::from_str(&text, path)?, text))
    }

    pub fn plant(&self) -> AppResult<PlantModel> {
        let p = &self.plant;
        let a = matrix("A", &p.a, 0)?;
        let n = a.nrows();
        let c = matrix("C", &p.c, 0)?;
        let rows_p = c.nrows();
        let h = p.h.iter().enumerate().map(|(i, m)| matrix(&format!("H[{i}]"), m, 0)).collect::<AppResult<Vec<_>>>()?;
        Ok(PlantModel::new(
            a,
            matrix("B", &p.b, n)?,
            c,
            matrix("G", &p.g, n)?,
            matrix("E_f", &p.e_f, n)?,
            matrix("D_f", &p.d_f, rows_p)?,
            p.e1.as_ref().map(|m| matrix("E1", m, n)).transpose()?,
            p.d1.as_ref().map(|m| matrix("D1", m, rows_p)).transpose()?,
            h,
            matrix("lipschitz_bounds", &p.lipschitz_bounds, 0)?,
        )?)
    }

    pub fn nonlinearity(&self) -> AppResult<Box<dyn fauio_core::model::Nonlinearity>> {
        let m = self.plant.h.len();
        Ok(sim::nonlinearity(&self.plant.nonlinearity, m, self.plant.nonlinearity_coefficients.clone())?)
    }

    /// A preset with the `[simulation]` overrides applied.
    pub fn preset(&self, name: &str) -> AppResult<ScenarioConfig> {
        let mut s = sim::preset(name)?;
        self.simulation.apply(&mut s);
        Ok(s)
    }
}

impl SimulationSection {
    pub fn apply(&self, s: &mut ScenarioConfig) {
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(h) = self.horizon {
            s.horizon = h;
        }
        if let Some(t) = self.tau_factor {
            s.filter = t.filter();
        }
    }
}

/// Scenario file: the script algebra in TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    pub horizon: f64,
    pub dt: f64,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub eta0: Option<Vec<f64>>,
    pub fa_hat0: Vec<f64>,
    #[serde(default)]
    pub tau_factor: Option<TauSpec>,
    pub fault_a: Vec<ScriptSpec>,
    pub fault_s: Vec<ScriptSpec>,
    #[serde(default)]
    pub disturbance: Vec<ScriptSpec>,
    #[serde(default)]
    pub input: Vec<ScriptSpec>,
}

/// One scalar component: a list of windowed pieces.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSpec {
    #[serde(default)]
    pub pieces: Vec<PieceSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub end: Option<f64>,
    pub expr: ExprSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExprSpec {
    Const {
        value: f64,
    },
    Ramp {
        slope: f64,
        #[serde(default)]
        t0: f64,
        #[serde(default)]
        offset: f64,
    },
    Sin {
        amp: f64,
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
    Cos {
        amp: f64,
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
    Sum {
        terms: Vec<ExprSpec>,
    },
}

impl ExprSpec {
    pub fn to_expr(&self) -> Expr {
        match self {
            ExprSpec::Const { value } => Expr::Const(*value),
            ExprSpec::Ramp { slope, t0, offset } => Expr::Ramp { slope: *slope, t0: *t0, offset: *offset },
            ExprSpec::Sin { amp, freq, phase } => Expr::Sin { amp: *amp, freq: *freq, phase: *phase },
            ExprSpec::Cos { amp, freq, phase } => Expr::Cos { amp: *amp, freq: *freq, phase: *phase },
            ExprSpec::Sum { terms } => Expr::Sum(terms.iter().map(|t| t.to_expr()).collect()),
        }
    }
}

fn scripts(specs: &[ScriptSpec], len: usize) -> VectorScript {
    if specs.is_empty() {
        return VectorScript::zeros(len);
    }
    VectorScript::new(
        specs
            .iter()
            .map(|s| Script {
                pieces: s
                    .pieces
                    .iter()
                    .map(|p| Piece {
                        start: p.start.unwrap_or(f64::NEG_INFINITY),
                        end: p.end.unwrap_or(f64::INFINITY),
                        expr: p.expr.to_expr(),
                    })
                    .collect(),
            })
            .collect(),
    )
}

impl ScenarioFile {
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let f: ScenarioFile = toml::from_str(&text).map_err(|e| AppError::parse(path, e.to_string()))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(AppError::parse(path, format!("schema_version {} is not supported", f.schema_version)));
        }
        Ok(f)
    }

    /// Missing disturbance or input lists become zero signals of the plant's width.
    pub fn to_scenario(&self, plant: &PlantModel) -> ScenarioConfig {
        ScenarioConfig {
            name: self.name.clone(),
            horizon: self.horizon,
            dt: self.dt,
            x0: DVector::from_vec(self.x0.clone()),
            eta0: self.eta0.clone().map(DVector::from_vec),
            fa_hat0: DVector::from_vec(self.fa_hat0.clone()),
            fault_a: scripts(&self.fault_a, plant.a1()),
            fault_s: scripts(&self.fault_s, plant.a2()),
            disturbance: scripts(&self.disturbance, plant.q1() + plant.q2()),
            input: scripts(&self.input, plant.s()),
            filter: self.tau_factor.map(TauSpec::filter).unwrap_or(FilterTau::Auto),
        }
    }
}
