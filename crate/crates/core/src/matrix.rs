use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Residual edge-count label: the variable side `l`, or checks of residual
/// degree `j` (`r_j`, `1 <= j <= d-1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    VarEdges,
    CheckEdges(u32),
}

impl Label {
    /// Position in the canonical order `l, r_1, ..., r_{d-1}`.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Label::VarEdges => 0,
            Label::CheckEdges(j) => j as usize,
        }
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::VarEdges
        } else {
            Label::CheckEdges(i as u32)
        }
    }

    /// All `d` labels in canonical order.
    pub fn all(d: u32) -> impl Iterator<Item = Label> {
        (0..d as usize).map(Label::from_index)
    }

    pub fn is_valid_for(self, d: u32) -> bool {
        match self {
            Label::VarEdges => true,
            Label::CheckEdges(j) => j >= 1 && j < d,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::VarEdges => f.pad("l"),
            Label::CheckEdges(j) => f.pad(&format!("r{j}")),
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s == "l" {
            return Ok(Label::VarEdges);
        }
        s.strip_prefix('r')
            .and_then(|j| j.parse::<u32>().ok())
            .filter(|&j| j >= 1)
            .map(Label::CheckEdges)
            .ok_or_else(|| format!("bad label `{s}` (expected `l` or `r<j>`)"))
    }
}

/// Symmetric `d x d` matrix of normalized covariances indexed by [`Label`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![0.0; dim * dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn get(&self, i: Label, j: Label) -> f64 {
        self.at(i.index(), j.index())
    }

    /// Writes both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn try_get(&self, i: Label, j: Label) -> Result<f64> {
        let d = self.dim as u32;
        for l in [i, j] {
            if !l.is_valid_for(d) {
                let index = match l {
                    Label::CheckEdges(k) => k,
                    Label::VarEdges => 0,
                };
                return Err(Error::Index { index, lo: 1, hi: d - 1 });
            }
        }
        Ok(self.get(i, j))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.at(i, j) == self.at(j, i)))
    }

    /// Largest entrywise absolute difference and where it occurs.
    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> (f64, usize, usize) {
        assert_eq!(self.dim, other.dim);
        let mut best = (0.0, 0, 0);
        for i in 0..self.dim {
            for j in i..self.dim {
                let diff = (self.at(i, j) - other.at(i, j)).abs();
                if diff > best.0 || diff.is_nan() {
                    best = (diff, i, j);
                }
            }
        }
        best
    }

    /// Upper-triangle index pairs `(i, j)`, `i <= j`, in row-major order.
    pub fn upper_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..dim).flat_map(move |i| (i..dim).map(move |j| (i, j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_round_trip() {
        for l in Label::all(6) {
            let parsed: Label = l.to_string().parse().unwrap();
            assert_eq!(parsed, l);
            assert_eq!(Label::from_index(l.index()), l);
        }
        assert_eq!(Label::all(6).count(), 6);
        assert!("r0".parse::<Label>().is_err());
        assert!("x1".parse::<Label>().is_err());
    }

    #[test]
    fn set_mirrors() {
        let mut m = CovarianceMatrix::zeros(3);
        m.set(0, 2, 1.5);
        assert_eq!(m.at(2, 0), 1.5);
        assert!(m.is_symmetric());
        assert!(m.try_get(Label::CheckEdges(3), Label::VarEdges).is_err());
    }
}
