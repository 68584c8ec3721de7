use serde::{Deserialize, Serialize};

use super::mesh::{DofMap, Mesh};

/// Where a field carries meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    P,
    Pbar,
    Q,
}

impl Support {
    pub fn covers(self, other: Support) -> bool {
        self == Support::Q || self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn of_order(m: usize) -> Self {
        if m.is_multiple_of(2) { Parity::Even } else { Parity::Odd }
    }

    pub fn sign(self) -> Option<f64> {
        match self {
            Parity::Even => Some(1.0),
            Parity::Odd => Some(-1.0),
            Parity::None => None,
        }
    }
}

/// P1 coefficients, one per degree of freedom of the owning problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub values: Vec<f64>,
    pub support: Support,
    pub parity: Parity,
}

impl Field {
    pub fn new(values: Vec<f64>, support: Support) -> Self {
        Self { values, support, parity: Parity::None }
    }

    pub fn zeros(n: usize, support: Support) -> Self {
        Self::new(vec![0.0; n], support)
    }

    /// Interpolates `f` at the representative node of each dof.
    pub fn interpolate(mesh: &Mesh, dofs: &DofMap, support: Support, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::new(dofs.dof_to_node.iter().map(|&i| f(mesh.nodes[i])).collect(), support)
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn node_values(&self, dofs: &DofMap) -> Vec<f64> {
        dofs.node_to_dof.iter().map(|&d| self.values[d]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Values of a function on the interface at the two Gauss points of every
/// boundary edge, in the order of `Mesh::boundary_edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData {
    pub values: Vec<[f64; 2]>,
}

pub(crate) const GAUSS_2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

impl EdgeData {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self { values: vec![[0.0; 2]; mesh.boundary_edges.len()] }
    }

    /// Samples `f(point, normal)` with the normal pointing into the matrix.
    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 2], [f64; 2]) -> f64) -> Self {
        let values = mesh
            .boundary_edges
            .iter()
            .map(|e| {
                let (a, b) = (mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]);
                GAUSS_2.map(|s| f([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])], e.normal))
            })
            .collect();
        Self { values }
    }
}
