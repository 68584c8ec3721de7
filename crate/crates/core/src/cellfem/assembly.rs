use sprs::{CsMat, TriMat};

use super::linalg::{add, scaled};
use super::mesh::{DofMap, Mesh, Region};
use super::problem::Domain;

/// P1 matrices over one region.
#[derive(Debug, Clone)]
pub struct RegionForms {
    /// `∫ ∇φ_j·∇φ_i`
    pub stiffness: CsMat<f64>,
    /// `∫ φ_j φ_i`
    pub mass: CsMat<f64>,
    /// `∫ (∂_x φ_j) φ_i`
    pub dx: CsMat<f64>,
    /// `∫ (∂_y φ_j) φ_i`
    pub dy: CsMat<f64>,
}

impl RegionForms {
    /// `∫ (κ·∇φ_j) φ_i`; its transpose is `∫ φ_j (κ·∇φ_i)`.
    pub fn directional(&self, kappa: [f64; 2]) -> CsMat<f64> {
        add(&scaled(&self.dx, kappa[0]), &scaled(&self.dy, kappa[1]))
    }

    fn sum(&self, other: &RegionForms) -> RegionForms {
        RegionForms {
            stiffness: add(&self.stiffness, &other.stiffness),
            mass: add(&self.mass, &other.mass),
            dx: add(&self.dx, &other.dx),
            dy: add(&self.dy, &other.dy),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Forms {
    pub p: RegionForms,
    pub pbar: RegionForms,
    pub q: RegionForms,
    /// `∫_∂P n_x φ_i ds` and `∫_∂P n_y φ_i ds` with the normal into the matrix.
    pub interface_normal: [Vec<f64>; 2],
    /// `∫_∂P φ_j φ_i ds`.
    pub interface_mass: CsMat<f64>,
}

struct Accum {
    k: TriMat<f64>,
    m: TriMat<f64>,
    dx: TriMat<f64>,
    dy: TriMat<f64>,
}

impl Accum {
    fn new(n: usize) -> Self {
        Self { k: TriMat::new((n, n)), m: TriMat::new((n, n)), dx: TriMat::new((n, n)), dy: TriMat::new((n, n)) }
    }

    fn finish(self) -> RegionForms {
        RegionForms { stiffness: self.k.to_csr(), mass: self.m.to_csr(), dx: self.dx.to_csr(), dy: self.dy.to_csr() }
    }
}

/// Gradients of the three barycentric basis functions and the area.
pub(crate) fn element_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let inv = 0.5 / area;
    let mut g = [[0.0; 2]; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        *gi = [(p[j][1] - p[k][1]) * inv, (p[k][0] - p[j][0]) * inv];
    }
    (g, area)
}

impl Forms {
    pub fn assemble(mesh: &Mesh, dofs: &DofMap) -> Self {
        let n = dofs.n_dofs();
        let mut acc_p = Accum::new(n);
        let mut acc_pbar = Accum::new(n);
        for (tri, region) in mesh.triangles.iter().zip(&mesh.regions) {
            let pts = tri.map(|v| mesh.nodes[v]);
            let (g, area) = element_gradients(pts);
            let d = tri.map(|v| dofs.node_to_dof[v]);
            let acc = match region {
                Region::P => &mut acc_p,
                Region::Pbar => &mut acc_pbar,
            };
            for i in 0..3 {
                for j in 0..3 {
                    acc.k.add_triplet(d[i], d[j], area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
                    acc.m.add_triplet(d[i], d[j], area / 12.0 * if i == j { 2.0 } else { 1.0 });
                    acc.dx.add_triplet(d[i], d[j], g[j][0] * area / 3.0);
                    acc.dy.add_triplet(d[i], d[j], g[j][1] * area / 3.0);
                }
            }
        }
        let p = acc_p.finish();
        let pbar = acc_pbar.finish();
        let q = p.sum(&pbar);

        let mut normal = [vec![0.0; n], vec![0.0; n]];
        let mut edge_mass = TriMat::new((n, n));
        for e in &mesh.boundary_edges {
            let (a, b) = (mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]);
            let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            let d = e.nodes.map(|v| dofs.node_to_dof[v]);
            for i in 0..2 {
                normal[0][d[i]] += 0.5 * len * e.normal[0];
                normal[1][d[i]] += 0.5 * len * e.normal[1];
                for j in 0..2 {
                    edge_mass.add_triplet(d[i], d[j], len / 6.0 * if i == j { 2.0 } else { 1.0 });
                }
            }
        }
        Self { p, pbar, q, interface_normal: normal, interface_mass: edge_mass.to_csr() }
    }

    pub fn region(&self, domain: Domain) -> &RegionForms {
        match domain {
            Domain::P => &self.p,
            Domain::Pbar => &self.pbar,
            Domain::Q => &self.q,
        }
    }
}
