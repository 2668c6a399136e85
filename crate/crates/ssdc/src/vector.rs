//! Dense real vectors with a finiteness guarantee.
//!
//! Every constructor rejects NaN and infinite entries, so downstream code can
//! rely on arithmetic staying in the reals until a solver's divergence guard
//! trips. The arithmetic surface is deliberately small: the solvers only need
//! dot products, norms, and axpy-style updates.

use crate::error::{Result, SsdcError};
use std::ops::{Index, IndexMut};

/// A fixed-dimension vector of finite doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector after checking every entry is finite.
    pub fn from_vec(v: Vec<f64>) -> Result<Self> {
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(SsdcError::domain(
                "vector construction",
                format!("entry {i} is {}", v[i]),
            ));
        }
        Ok(Vector(v))
    }

    /// Builds a vector from a slice, checking finiteness.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::from_vec(v.to_vec())
    }

    pub fn zeros(d: usize) -> Self {
        Vector(vec![0.0; d])
    }

    pub fn from_fn(d: usize, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::from_vec((0..d).map(f).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Euclidean distance to another vector.
    pub fn dist(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// In-place `self += a * y`.
    pub fn add_scaled(&mut self, a: f64, y: &Self) {
        debug_assert_eq!(self.dim(), y.dim());
        for (s, v) in self.0.iter_mut().zip(&y.0) {
            *s += a * v;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in &mut self.0 {
            *s *= a;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, a: f64) -> Self {
        Vector(self.0.iter().map(|x| a * x).collect())
    }

    /// Returns an error naming `context` if any entry is non-finite.
    pub fn check_finite(&self, context: &str) -> Result<()> {
        if let Some(i) = self.0.iter().position(|x| !x.is_finite()) {
            return Err(SsdcError::domain(context, format!("entry {i} is {}", self.0[i])));
        }
        Ok(())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<'a> IntoIterator for &'a Vector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
