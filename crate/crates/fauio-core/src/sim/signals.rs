//! Piecewise scripted signals: sums of windowed elementary expressions.

use alloc::vec::Vec;

/// Elementary time functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// `slope * (t - t0) + offset`.
    Ramp { slope: f64, t0: f64, offset: f64 },
    /// `amp * sin(freq * t + phase)`.
    Sin { amp: f64, freq: f64, phase: f64 },
    /// `amp * cos(freq * t + phase)`.
    Cos { amp: f64, freq: f64, phase: f64 },
    Sum(Vec<Expr>),
}

impl Expr {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Ramp { slope, t0, offset } => slope * (t - t0) + offset,
            Expr::Sin { amp, freq, phase } => amp * libm::sin(freq * t + phase),
            Expr::Cos { amp, freq, phase } => amp * libm::cos(freq * t + phase),
            Expr::Sum(parts) => parts.iter().map(|p| p.value(t)).sum(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Expr::Const(_) => 0.0,
            Expr::Ramp { slope, .. } => *slope,
            Expr::Sin { amp, freq, phase } => amp * freq * libm::cos(freq * t + phase),
            Expr::Cos { amp, freq, phase } => -amp * freq * libm::sin(freq * t + phase),
            Expr::Sum(parts) => parts.iter().map(|p| p.derivative(t)).sum(),
        }
    }
}

/// `expr` active on `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub expr: Expr,
}

impl Piece {
    pub fn active(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

/// Scalar signal: the sum of its active pieces, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Script {
    pub pieces: Vec<Piece>,
}

impl Script {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn always(expr: Expr) -> Self {
        Self { pieces: alloc::vec![Piece { start: f64::NEG_INFINITY, end: f64::INFINITY, expr }] }
    }

    pub fn window(start: f64, end: f64, expr: Expr) -> Self {
        Self { pieces: alloc::vec![Piece { start, end, expr }] }
    }

    /// Value at `t` using the pieces active at `select` (the integrator
    /// passes the midpoint of the current step so a step never straddles a
    /// window edge).
    pub fn value_with(&self, t: f64, select: f64) -> f64 {
        self.pieces.iter().filter(|p| p.active(select)).map(|p| p.expr.value(t)).sum()
    }

    pub fn derivative_with(&self, t: f64, select: f64) -> f64 {
        self.pieces.iter().filter(|p| p.active(select)).map(|p| p.expr.derivative(t)).sum()
    }

    pub fn value(&self, t: f64) -> f64 {
        self.value_with(t, t)
    }

    /// Bitmask of active pieces, used to detect a window edge between samples.
    pub fn active_mask(&self, select: f64) -> u64 {
        self.pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.active(select))
            .fold(0, |acc, (k, _)| acc | 1 << (k % 64))
    }

    /// Finite window edges.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| [p.start, p.end])
            .filter(|t| t.is_finite())
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        out.dedup();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }
}

/// One script per component.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorScript {
    pub components: Vec<Script>,
}

impl VectorScript {
    pub fn zeros(n: usize) -> Self {
        Self { components: alloc::vec![Script::zero(); n] }
    }

    pub fn new(components: Vec<Script>) -> Self {
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn value_into(&self, t: f64, select: f64, out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.components) {
            *o = s.value_with(t, select);
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.components.iter().flat_map(|s| s.breakpoints()).collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        out.dedup();
        out
    }

    pub fn scaled(&self, k: f64) -> Self {
        let components = self
            .components
            .iter()
            .map(|s| Script {
                pieces: s
                    .pieces
                    .iter()
                    .map(|p| Piece { start: p.start, end: p.end, expr: scale_expr(&p.expr, k) })
                    .collect(),
            })
            .collect();
        Self { components }
    }
}

fn scale_expr(e: &Expr, k: f64) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(c * k),
        Expr::Ramp { slope, t0, offset } => Expr::Ramp { slope: slope * k, t0: *t0, offset: offset * k },
        Expr::Sin { amp, freq, phase } => Expr::Sin { amp: amp * k, freq: *freq, phase: *phase },
        Expr::Cos { amp, freq, phase } => Expr::Cos { amp: amp * k, freq: *freq, phase: *phase },
        Expr::Sum(parts) => Expr::Sum(parts.iter().map(|p| scale_expr(p, k)).collect()),
    }
}
