use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{MMGraph, VertexId};

/// One real value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(g: &MMGraph<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != g.vertex_count() {
            return Err(Error::Parameter(format!(
                "field has {} values for {} vertices",
                values.len(),
                g.vertex_count()
            )));
        }
        Ok(ScalarField { values })
    }

    /// Wraps raw values without a graph at hand; the caller guarantees the
    /// length matches the graph the field is used with.
    pub fn from_vec(values: Vec<T>) -> Self {
        ScalarField { values }
    }

    pub fn from_fn(g: &MMGraph<T>, f: impl Fn(VertexId) -> T) -> Self {
        ScalarField {
            values: g.vertices().map(f).collect(),
        }
    }

    pub fn constant(g: &MMGraph<T>, c: T) -> Self {
        ScalarField {
            values: vec![c; g.vertex_count()],
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a * u + b`.
    pub fn affine(&self, a: T, b: T) -> Self {
        ScalarField {
            values: self.values.iter().map(|&v| a * v + b).collect(),
        }
    }
}

impl<T> Index<VertexId> for ScalarField<T> {
    type Output = T;

    fn index(&self, v: VertexId) -> &T {
        &self.values[v.0]
    }
}
