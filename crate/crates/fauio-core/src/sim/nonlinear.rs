//! Named nonlinearities selectable from configuration.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::Nonlinearity;

/// Names accepted by [`nonlinearity`].
pub const REGISTRY: &[&str] = &["zero", "sin", "square", "affine"];

/// `g_i = 0`.
#[derive(Debug, Clone)]
pub struct Zero {
    pub m: usize,
}

/// `g_i(nu) = sin(nu_1)`.
#[derive(Debug, Clone)]
pub struct SinFirst {
    pub m: usize,
}

/// `g_i(nu) = nu_1^2`.
#[derive(Debug, Clone)]
pub struct SquareFirst {
    pub m: usize,
}

/// `g_i(nu) = sum_j c_ij nu_j`.
#[derive(Debug, Clone)]
pub struct Affine {
    pub coefficients: Vec<Vec<f64>>,
}

impl Nonlinearity for Zero {
    fn m(&self) -> usize {
        self.m
    }
    fn eval(&self, _args: &[DVector<f64>]) -> DVector<f64> {
        DVector::zeros(self.m)
    }
}

impl Nonlinearity for SinFirst {
    fn m(&self) -> usize {
        self.m
    }
    fn eval(&self, args: &[DVector<f64>]) -> DVector<f64> {
        DVector::from_fn(self.m, |i, _| libm::sin(args[i][0]))
    }
}

impl Nonlinearity for SquareFirst {
    fn m(&self) -> usize {
        self.m
    }
    fn eval(&self, args: &[DVector<f64>]) -> DVector<f64> {
        DVector::from_fn(self.m, |i, _| args[i][0] * args[i][0])
    }
}

impl Nonlinearity for Affine {
    fn m(&self) -> usize {
        self.coefficients.len()
    }
    fn eval(&self, args: &[DVector<f64>]) -> DVector<f64> {
        DVector::from_fn(self.coefficients.len(), |i, _| {
            self.coefficients[i].iter().zip(args[i].iter()).map(|(c, v)| c * v).sum()
        })
    }
}

/// Looks up a registry entry. `affine` takes its coefficients from `coefficients`.
pub fn nonlinearity(name: &str, m: usize, coefficients: Option<Vec<Vec<f64>>>) -> Result<Box<dyn Nonlinearity>> {
    match name {
        "zero" => Ok(Box::new(Zero { m })),
        "sin" => Ok(Box::new(SinFirst { m })),
        "square" => Ok(Box::new(SquareFirst { m })),
        "affine" => {
            let coefficients = coefficients.ok_or_else(|| Error::InvalidValue {
                field: "nonlinearity.coefficients".into(),
                reason: "required for `affine`".into(),
            })?;
            if coefficients.len() != m {
                return Err(Error::Dimension {
                    field: "nonlinearity.coefficients".into(),
                    expected: (m, 0),
                    found: (coefficients.len(), 0),
                });
            }
            Ok(Box::new(Affine { coefficients }))
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}
