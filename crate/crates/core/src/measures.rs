//! Mixing measures over the stability index (space) and the fractional
//! order (time).
//!
//! Continuous densities are reduced to Gauss-Legendre nodes at construction,
//! so every consumer sees a finite list of `(order, weight)` pairs.

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node count used when a density is given without an explicit resolution.
pub const DEFAULT_DENSITY_NODES: usize = 32;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawMeasure {
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    density_nodes: Vec<(f64, f64)>,
}

/// Gauss-Legendre nodes and weights on `(a, b)`.
fn legendre_rule(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    if n == 1 {
        return vec![(mid, b - a)];
    }
    let rule = GaussLegendre::new(n).expect("degree >= 2");
    rule.nodes()
        .zip(rule.weights())
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

fn discretize_density(density: impl Fn(f64) -> f64, (a, b): (f64, f64), n_nodes: usize) -> Result<Vec<(f64, f64)>> {
    if n_nodes == 0 {
        return Err(Error::InvalidMeasure("n_nodes must be at least 1".into()));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    for (x, w) in legendre_rule(a, b, n_nodes) {
        let value = density(x);
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "density is {value} at node {x}; it must be finite and nonnegative"
            )));
        }
        // nodes where the density vanishes carry no mass
        if value > 0.0 {
            nodes.push((x, w * value));
        }
    }
    Ok(nodes)
}

fn check_pairs(pairs: &[(f64, f64)], what: &str, in_range: impl Fn(f64) -> bool, range: &str) -> Result<()> {
    for &(order, weight) in pairs {
        if !order.is_finite() || !in_range(order) {
            return Err(Error::InvalidMeasure(format!("{what} {order} outside {range}")));
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "weight {weight} at {what} {order} must be positive"
            )));
        }
    }
    Ok(())
}

/// Finite mixing measure over stability indices `alpha` in `(0, 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct SpectralMeasure {
    atoms: Vec<(f64, f64)>,
    density_nodes: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    fn validated(atoms: Vec<(f64, f64)>, density_nodes: Vec<(f64, f64)>) -> Result<Self> {
        let open = |a: f64| a > 0.0 && a < 2.0;
        check_pairs(&atoms, "alpha", open, "(0, 2)")?;
        check_pairs(&density_nodes, "alpha", open, "(0, 2)")?;
        let measure = Self { atoms, density_nodes };
        let mass = measure.total_mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "total mass {mass} must be finite and positive"
            )));
        }
        Ok(measure)
    }

    /// Purely atomic measure `sum_i w_i delta_{alpha_i}`.
    pub fn atomic(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidMeasure("at least one atom is required".into()));
        }
        Self::validated(pairs.to_vec(), Vec::new())
    }

    /// Point mass of unit weight at `alpha`.
    pub fn point(alpha: f64) -> Result<Self> {
        Self::atomic(&[(alpha, 1.0)])
    }

    /// Absolutely continuous measure `density(alpha) d alpha` on `support`,
    /// discretized with `n_nodes` Gauss-Legendre nodes.
    pub fn from_density(density: impl Fn(f64) -> f64, support: (f64, f64), n_nodes: usize) -> Result<Self> {
        let (a, b) = support;
        if !(a > 0.0 && a < b && b < 2.0) {
            return Err(Error::InvalidMeasure(format!(
                "support ({a}, {b}) must be an interval inside (0, 2)"
            )));
        }
        let nodes = discretize_density(density, support, n_nodes)?;
        Self::validated(Vec::new(), nodes)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density_nodes(&self) -> &[(f64, f64)] {
        &self.density_nodes
    }

    /// All weighted `(alpha, weight)` pairs, atoms first.
    pub fn components(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().chain(&self.density_nodes).copied()
    }

    pub fn total_mass(&self) -> f64 {
        self.components().map(|(_, w)| w).sum()
    }

    pub fn alpha_min(&self) -> f64 {
        self.components().map(|(a, _)| a).fold(f64::INFINITY, f64::min)
    }

    pub fn alpha_max(&self) -> f64 {
        self.components().map(|(a, _)| a).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sum of two measures.
    pub fn merged(&self, other: &SpectralMeasure) -> SpectralMeasure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut nodes = self.density_nodes.clone();
        nodes.extend_from_slice(&other.density_nodes);
        SpectralMeasure {
            atoms,
            density_nodes: nodes,
        }
    }

    /// Levy symbol as a function of `|xi|`.
    pub fn psi_radial(&self, r: f64) -> f64 {
        let r = r.abs();
        if r == 0.0 {
            return 0.0;
        }
        -self.components().map(|(a, w)| w * r.powf(a)).sum::<f64>()
    }

    /// Levy symbol `Psi(xi) = -sum_i w_i |xi|^{alpha_i}`.
    pub fn psi(&self, xi: &[f64]) -> f64 {
        self.psi_radial(norm(xi))
    }
}

impl TryFrom<RawMeasure> for SpectralMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        Self::validated(raw.atoms, raw.density_nodes)
    }
}

impl From<SpectralMeasure> for RawMeasure {
    fn from(m: SpectralMeasure) -> Self {
        RawMeasure {
            atoms: m.atoms,
            density_nodes: m.density_nodes,
        }
    }
}

/// Finite mixing measure over fractional time orders `beta` in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct TimeMeasure {
    atoms: Vec<(f64, f64)>,
    density_nodes: Vec<(f64, f64)>,
}

impl TimeMeasure {
    fn validated(atoms: Vec<(f64, f64)>, density_nodes: Vec<(f64, f64)>) -> Result<Self> {
        let half_open = |b: f64| b > 0.0 && b <= 1.0;
        check_pairs(&atoms, "beta", half_open, "(0, 1]")?;
        check_pairs(&density_nodes, "beta", half_open, "(0, 1]")?;
        let measure = Self { atoms, density_nodes };
        let mass = measure.total_mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "total mass {mass} must be finite and positive"
            )));
        }
        Ok(measure)
    }

    pub fn atomic(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidMeasure("at least one atom is required".into()));
        }
        Self::validated(pairs.to_vec(), Vec::new())
    }

    pub fn point(beta: f64) -> Result<Self> {
        Self::atomic(&[(beta, 1.0)])
    }

    pub fn from_density(density: impl Fn(f64) -> f64, support: (f64, f64), n_nodes: usize) -> Result<Self> {
        let (a, b) = support;
        if !(a > 0.0 && a < b && b <= 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "support ({a}, {b}) must be an interval inside (0, 1]"
            )));
        }
        let nodes = discretize_density(density, support, n_nodes)?;
        Self::validated(Vec::new(), nodes)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density_nodes(&self) -> &[(f64, f64)] {
        &self.density_nodes
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().chain(&self.density_nodes).copied()
    }

    pub fn total_mass(&self) -> f64 {
        self.components().map(|(_, w)| w).sum()
    }

    pub fn beta_max(&self) -> f64 {
        self.components().map(|(b, _)| b).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The single order of a one-atom measure, if that is what this is.
    pub fn as_single_order(&self) -> Option<f64> {
        match (self.atoms.as_slice(), self.density_nodes.is_empty()) {
            ([(beta, _)], true) => Some(*beta),
            _ => None,
        }
    }
}

impl TryFrom<RawMeasure> for TimeMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        Self::validated(raw.atoms, raw.density_nodes)
    }
}

impl From<TimeMeasure> for RawMeasure {
    fn from(m: TimeMeasure) -> Self {
        RawMeasure {
            atoms: m.atoms,
            density_nodes: m.density_nodes,
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
