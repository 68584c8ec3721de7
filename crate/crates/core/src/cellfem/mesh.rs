//! Structured O-grid triangulation of the unit cell.
//!
//! The cell is split into a core grid inside the inclusion, an optional ring
//! between the core and a circular interface, and an outer ring between the
//! interface and the cell boundary. Rings are indexed by a tangential index
//! `t in 0..4n` running counter-clockwise and a layer index. Coordinates are
//! computed for the first half of the tangential range and negated for the
//! second half, so the node set is closed under `y -> -y` bit for bit.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::geometry::Geometry;
use crate::error::{Error, Result};

pub const MIN_RESOLUTION: f64 = 1e-3;
pub const MAX_RESOLUTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// The plasmonic inclusion.
    P,
    /// The host matrix.
    Pbar,
}

/// Edge of the interface polygon with the unit normal pointing into the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub normal: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Two boundary nodes identified across opposite faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicPair {
    pub axis: Axis,
    /// Node on the right (x) or top (y) face.
    pub high: usize,
    /// Node on the left (x) or bottom (y) face.
    pub low: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub geometry: Geometry,
    pub resolution: f64,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub periodic_pairs: Vec<PeriodicPair>,
    /// Index of the node at `-y` for every node.
    pub antipode: Vec<usize>,
}

/// Equivalence classes of nodes under periodic identification.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub node_to_dof: Vec<usize>,
    pub dof_to_node: Vec<usize>,
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.dof_to_node.len()
    }

    pub fn identity(n_nodes: usize) -> Self {
        Self { node_to_dof: (0..n_nodes).collect(), dof_to_node: (0..n_nodes).collect() }
    }
}

/// `xi_k = (2k - n)/n` with `xi_{n-k} = -xi_k` exactly.
fn symmetric_params(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    for k in 0..=n / 2 {
        let xi = (2 * k) as f64 / n as f64 - 1.0;
        p[k] = f(xi);
        p[n - k] = -p[k];
    }
    if n.is_multiple_of(2) {
        p[n / 2] = 0.0;
    }
    p
}

fn rot90(p: [f64; 2]) -> [f64; 2] {
    [-p[1], p[0]]
}

fn neg(p: [f64; 2]) -> [f64; 2] {
    [-p[0], -p[1]]
}

fn lerp(a: [f64; 2], b: [f64; 2], w: f64) -> [f64; 2] {
    [(1.0 - w) * a[0] + w * b[0], (1.0 - w) * a[1] + w * b[1]]
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Point on a ring curve for tangential index `t`, given the first-half
/// generator. Sectors 2 and 3 are negations of sectors 0 and 1.
fn ring_point(n: usize, t: usize, first_half: &impl Fn(usize, usize) -> [f64; 2]) -> [f64; 2] {
    let sector = t / n;
    let k = t % n;
    if sector < 2 {
        first_half(sector, k)
    } else {
        neg(first_half(sector - 2, k))
    }
}

struct Builder {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<Region>,
}

impl Builder {
    fn triangle(&mut self, a: usize, b: usize, c: usize, region: Region) {
        let tri = if signed_area(self.nodes[a], self.nodes[b], self.nodes[c]) > 0.0 { [a, b, c] } else { [a, c, b] };
        self.triangles.push(tri);
        self.regions.push(region);
    }

    /// Quad with corners `a, b, c, d` in cyclic order, split along the shorter diagonal.
    fn quad(&mut self, a: usize, b: usize, c: usize, d: usize, region: Region) {
        let (pa, pb, pc, pd) = (self.nodes[a], self.nodes[b], self.nodes[c], self.nodes[d]);
        if dist2(pa, pc) <= dist2(pb, pd) {
            self.triangle(a, b, c, region);
            self.triangle(a, c, d, region);
        } else {
            self.triangle(a, b, d, region);
            self.triangle(b, c, d, region);
        }
    }

    /// Adds layers `1..=layers` between `inner` (existing node ids) and the
    /// curve `outer`, returning the ids of every layer including the inner one.
    fn ring(
        &mut self,
        inner: Vec<usize>,
        outer: &[[f64; 2]],
        layers: usize,
        region: Region,
    ) -> Vec<Vec<usize>> {
        let m = inner.len();
        let start: Vec<[f64; 2]> = inner.iter().map(|&i| self.nodes[i]).collect();
        let mut rows = vec![inner];
        for s in 1..=layers {
            let w = s as f64 / layers as f64;
            let row: Vec<usize> = (0..m)
                .map(|t| {
                    let p = if s == layers { outer[t] } else { lerp(start[t], outer[t], w) };
                    self.nodes.push(p);
                    self.nodes.len() - 1
                })
                .collect();
            rows.push(row);
        }
        for s in 0..layers {
            for t in 0..m {
                let t1 = (t + 1) % m;
                let (lo, hi) = (&rows[s], &rows[s + 1]);
                self.quad(lo[t], lo[t1], hi[t1], hi[t], region);
            }
        }
        rows
    }
}

/// Builds the mesh of `geometry` with target edge length `h`.
pub fn generate_mesh(geometry: Geometry, h: f64) -> Result<Mesh> {
    geometry.validate()?;
    if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&h) {
        return Err(Error::Domain(format!("mesh resolution {h} outside [{MIN_RESOLUTION}, {MAX_RESOLUTION}]")));
    }
    let n = (2 * (0.5 / h).ceil() as usize).max(4);

    // Tangential parameter on each side, and the core grid coordinates.
    let (core_x, core_y, side) = match geometry {
        Geometry::Circle { radius } => {
            let a_c = 0.5 * radius;
            let mut eta = symmetric_params(n, |xi| (std::f64::consts::FRAC_PI_4 * xi).tan());
            eta[0] = -1.0;
            eta[n] = 1.0;
            let c: Vec<f64> = eta.iter().map(|e| a_c * e).collect();
            (c.clone(), c, eta)
        }
        Geometry::Rectangle { a, b } => {
            let xi = symmetric_params(n, |xi| xi);
            (xi.iter().map(|v| a * v).collect(), xi.iter().map(|v| b * v).collect(), xi)
        }
    };

    let mut b = Builder { nodes: Vec::new(), triangles: Vec::new(), regions: Vec::new() };
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    for &y in &core_y {
        for &x in &core_x {
            b.nodes.push([x, y]);
        }
    }
    let n_core = b.nodes.len();
    for j in 0..n {
        for i in 0..n {
            // Consistent "/" diagonal, mapped to itself by the half turn.
            let (a, bb, c, d) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
            b.triangle(a, bb, c, Region::P);
            b.triangle(a, c, d, Region::P);
        }
    }
    let core_boundary: Vec<usize> = (0..4 * n)
        .map(|t| {
            let k = t % n;
            match t / n {
                0 => grid(n, k),
                1 => grid(n - k, n),
                2 => grid(0, n - k),
                _ => grid(k, 0),
            }
        })
        .collect();

    let cell_curve: Vec<[f64; 2]> = (0..4 * n)
        .map(|t| {
            ring_point(n, t, &|sector, k| match (geometry, sector) {
                (Geometry::Circle { .. }, 0) => [0.5, 0.5 * side[k]],
                (Geometry::Circle { .. }, _) => rot90([0.5, 0.5 * side[k]]),
                (Geometry::Rectangle { .. }, 0) => [0.5, 0.5 * side[k]],
                (Geometry::Rectangle { .. }, _) => [-0.5 * side[k], 0.5],
            })
        })
        .collect();

    let interface = match geometry {
        Geometry::Circle { radius } => {
            let theta = symmetric_params(n, |xi| std::f64::consts::FRAC_PI_4 * xi);
            let circle: Vec<[f64; 2]> = (0..4 * n)
                .map(|t| {
                    ring_point(n, t, &|sector, k| {
                        let th = theta[k];
                        // sin is odd to the last bit on the mirrored half.
                        let p = if k <= n / 2 {
                            [radius * th.cos(), radius * th.sin()]
                        } else {
                            let th = theta[n - k];
                            [radius * th.cos(), -radius * th.sin()]
                        };
                        if sector == 0 { p } else { rot90(p) }
                    })
                })
                .collect();
            let layers = ((n as f64) / std::f64::consts::PI).ceil().max(1.0) as usize;
            let rows = b.ring(core_boundary, &circle, layers, Region::P);
            rows.last().unwrap().clone()
        }
        Geometry::Rectangle { .. } => core_boundary,
    };

    let max_gap = interface
        .iter()
        .zip(&cell_curve)
        .map(|(&i, &p)| dist2(b.nodes[i], p).sqrt())
        .fold(0.0, f64::max);
    let outer_layers = ((max_gap / h).ceil() as usize).max(2);
    let outer_rows = b.ring(interface.clone(), &cell_curve, outer_layers, Region::Pbar);
    let outer = outer_rows.last().unwrap();

    let normal_of = |p: [f64; 2], q: [f64; 2], t: usize| -> [f64; 2] {
        match geometry {
            Geometry::Circle { .. } => {
                let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                let l = (m[0] * m[0] + m[1] * m[1]).sqrt();
                [m[0] / l, m[1] / l]
            }
            Geometry::Rectangle { .. } => [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]][t / n],
        }
    };
    let m4 = 4 * n;
    let boundary_edges = (0..m4)
        .map(|t| {
            let (i, j) = (interface[t], interface[(t + 1) % m4]);
            BoundaryEdge { nodes: [i, j], normal: normal_of(b.nodes[i], b.nodes[j], t) }
        })
        .collect();

    let mut periodic_pairs = Vec::with_capacity(2 * n + 2);
    for k in 0..=n {
        periodic_pairs.push(PeriodicPair { axis: Axis::X, high: outer[k % m4], low: outer[3 * n - k] });
    }
    for k in 0..=n {
        periodic_pairs.push(PeriodicPair { axis: Axis::Y, high: outer[n + k], low: outer[(m4 - k) % m4] });
    }

    let mut antipode = vec![0usize; b.nodes.len()];
    for j in 0..=n {
        for i in 0..=n {
            antipode[grid(i, j)] = grid(n - i, n - j);
        }
    }
    let mut all_rows: Vec<Vec<usize>> = Vec::new();
    // Ring nodes follow the core in creation order, 4n per layer.
    let n_ring_nodes = b.nodes.len() - n_core;
    for l in 0..n_ring_nodes / m4 {
        all_rows.push((0..m4).map(|t| n_core + l * m4 + t).collect());
    }
    for row in &all_rows {
        for t in 0..m4 {
            antipode[row[t]] = row[(t + 2 * n) % m4];
        }
    }

    Ok(Mesh {
        geometry,
        resolution: h,
        nodes: b.nodes,
        triangles: b.triangles,
        regions: b.regions,
        boundary_edges,
        periodic_pairs,
        antipode,
    })
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.triangles[e];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    /// `(θ_P, θ_Pbar)` normalized by the total triangle area.
    pub fn volume_fractions(&self) -> (f64, f64) {
        let mut area_p = 0.0;
        let mut area_pbar = 0.0;
        for (e, region) in self.regions.iter().enumerate() {
            match region {
                Region::P => area_p += self.triangle_area(e),
                Region::Pbar => area_pbar += self.triangle_area(e),
            }
        }
        let total = area_p + area_pbar;
        (area_p / total, 1.0 - area_p / total)
    }

    /// Length of the interface polygon.
    pub fn interface_length(&self) -> f64 {
        self.boundary_edges.iter().map(|e| dist2(self.nodes[e.nodes[0]], self.nodes[e.nodes[1]]).sqrt()).sum()
    }

    /// Dofs after identifying periodic partners; representatives are the
    /// smallest node index of each class.
    pub fn periodic_dofs(&self) -> DofMap {
        let n = self.n_nodes();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for pair in &self.periodic_pairs {
            let (ra, rb) = (find(&mut parent, pair.high), find(&mut parent, pair.low));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut node_to_dof = vec![usize::MAX; n];
        let mut dof_to_node = Vec::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            if node_to_dof[root] == usize::MAX {
                node_to_dof[root] = dof_to_node.len();
                dof_to_node.push(root);
            }
            node_to_dof[i] = node_to_dof[root];
        }
        DofMap { node_to_dof, dof_to_node }
    }

    /// Partner map of one face pairing; an involution on the paired nodes.
    pub fn face_partner(&self, axis: Axis) -> std::collections::HashMap<usize, usize> {
        let mut map = std::collections::HashMap::new();
        for p in self.periodic_pairs.iter().filter(|p| p.axis == axis) {
            map.insert(p.high, p.low);
            map.insert(p.low, p.high);
        }
        map
    }

    /// Per-node flags `(touches P, touches Pbar)`.
    pub fn node_regions(&self) -> (Vec<bool>, Vec<bool>) {
        let mut in_p = vec![false; self.n_nodes()];
        let mut in_pbar = vec![false; self.n_nodes()];
        for (tri, region) in self.triangles.iter().zip(&self.regions) {
            for &v in tri {
                match region {
                    Region::P => in_p[v] = true,
                    Region::Pbar => in_pbar[v] = true,
                }
            }
        }
        (in_p, in_pbar)
    }

    /// Largest `|x + x(antipode)|` over all nodes; zero for a symmetric mesh.
    pub fn symmetry_defect(&self) -> f64 {
        self.nodes
            .iter()
            .zip(&self.antipode)
            .map(|(p, &j)| (p[0] + self.nodes[j][0]).abs().max((p[1] + self.nodes[j][1]).abs()))
            .fold(0.0, f64::max)
    }

    /// Moves one node, leaving the topology alone. Used to check that a
    /// broken half-turn symmetry is detected downstream.
    pub fn perturb_node(&mut self, node: usize, offset: [f64; 2]) {
        self.nodes[node][0] += offset[0];
        self.nodes[node][1] += offset[1];
    }

    /// An interior node of the matrix close to the middle of the gap on
    /// the positive x axis.
    pub fn matrix_probe_node(&self) -> usize {
        let (in_p, _) = self.node_regions();
        let target = match self.geometry {
            Geometry::Circle { radius } => 0.5 * (radius + 0.5),
            Geometry::Rectangle { a, .. } => 0.5 * (a + 0.5),
        };
        (0..self.n_nodes())
            .filter(|&i| !in_p[i])
            .min_by(|&i, &j| {
                let di = dist2(self.nodes[i], [target, 0.03]);
                let dj = dist2(self.nodes[j], [target, 0.03]);
                di.partial_cmp(&dj).unwrap()
            })
            .expect("matrix has nodes")
    }

    /// SHA-256 over the geometry, resolution and every coordinate and index.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.geometry).unwrap_or_default());
        h.update(self.resolution.to_le_bytes());
        for p in &self.nodes {
            h.update(p[0].to_le_bytes());
            h.update(p[1].to_le_bytes());
        }
        for (t, r) in self.triangles.iter().zip(&self.regions) {
            for v in t {
                h.update((*v as u64).to_le_bytes());
            }
            h.update([matches!(r, Region::Pbar) as u8]);
        }
        for p in &self.periodic_pairs {
            h.update((p.high as u64).to_le_bytes());
            h.update((p.low as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}
