//! Versioned text formats for meshes and fields, plus JSON mesh metadata.
//!
//! ```text
//! plasmonic-mesh 1
//! nodes <N>            then N lines "x y"
//! triangles <T>        then T lines "a b c region"   (region 0 = P, 1 = Pbar)
//! interface <E>        then E lines "a b nx ny"
//! periodic <K>         then K lines "axis high low"  (axis x or y)
//! antipode <N>         then N lines "j"
//! ```
//! Floats are written with Rust's shortest round-trip representation.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::Geometry;
use super::mesh::{Axis, BoundaryEdge, Mesh, PeriodicPair, Region};
use crate::error::{Error, Result};

pub const MESH_FORMAT_VERSION: u32 = 1;
pub const FIELD_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshMetadata {
    pub format_version: u32,
    pub geometry: Geometry,
    pub resolution: f64,
    pub theta_p: f64,
    pub theta_pbar: f64,
    pub nodes: usize,
    pub triangles: usize,
    pub hash: String,
}

impl MeshMetadata {
    pub fn of(mesh: &Mesh) -> Self {
        let (theta_p, theta_pbar) = mesh.volume_fractions();
        Self {
            format_version: MESH_FORMAT_VERSION,
            geometry: mesh.geometry,
            resolution: mesh.resolution,
            theta_p,
            theta_pbar,
            nodes: mesh.n_nodes(),
            triangles: mesh.triangles.len(),
            hash: mesh.content_hash(),
        }
    }
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "plasmonic-mesh {MESH_FORMAT_VERSION}");
    let _ = writeln!(s, "geometry {}", serde_json::to_string(&mesh.geometry).unwrap_or_default());
    let _ = writeln!(s, "resolution {:?}", mesh.resolution);
    let _ = writeln!(s, "nodes {}", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
    }
    let _ = writeln!(s, "triangles {}", mesh.triangles.len());
    for (t, r) in mesh.triangles.iter().zip(&mesh.regions) {
        let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], matches!(r, Region::Pbar) as u8);
    }
    let _ = writeln!(s, "interface {}", mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let _ = writeln!(s, "{} {} {:?} {:?}", e.nodes[0], e.nodes[1], e.normal[0], e.normal[1]);
    }
    let _ = writeln!(s, "periodic {}", mesh.periodic_pairs.len());
    for p in &mesh.periodic_pairs {
        let axis = if p.axis == Axis::X { "x" } else { "y" };
        let _ = writeln!(s, "{axis} {} {}", p.high, p.low);
    }
    let _ = writeln!(s, "antipode {}", mesh.antipode.len());
    for j in &mesh.antipode {
        let _ = writeln!(s, "{j}");
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        let (i, line) = self.inner.next().ok_or_else(|| Error::Format("unexpected end of mesh file".into()))?;
        Ok((i + 1, line.split_whitespace().collect()))
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let (i, parts) = self.next()?;
        if parts.len() != 2 || parts[0] != key {
            return Err(Error::Format(format!("line {i}: expected '{key} <count>'")));
        }
        parts[1].parse().map_err(|_| Error::Format(format!("line {i}: bad count")))
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("line {line}: cannot parse '{s}'")))
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (_, head) = lines.next()?;
    if head.len() != 2 || head[0] != "plasmonic-mesh" || head[1] != MESH_FORMAT_VERSION.to_string() {
        return Err(Error::Format("not a version-1 plasmonic mesh".into()));
    }
    let (i, g) = lines.next()?;
    if g.first() != Some(&"geometry") {
        return Err(Error::Format(format!("line {i}: expected geometry")));
    }
    let geometry: Geometry = serde_json::from_str(&g[1..].join(" "))?;
    let (i, r) = lines.next()?;
    if r.len() != 2 || r[0] != "resolution" {
        return Err(Error::Format(format!("line {i}: expected resolution")));
    }
    let resolution = num(r[1], i)?;

    let n = lines.header("nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (i, p) = lines.next()?;
        if p.len() != 2 {
            return Err(Error::Format(format!("line {i}: expected 'x y'")));
        }
        nodes.push([num(p[0], i)?, num(p[1], i)?]);
    }
    let t = lines.header("triangles")?;
    let mut triangles = Vec::with_capacity(t);
    let mut regions = Vec::with_capacity(t);
    for _ in 0..t {
        let (i, p) = lines.next()?;
        if p.len() != 4 {
            return Err(Error::Format(format!("line {i}: expected 'a b c region'")));
        }
        let tri = [num(p[0], i)?, num(p[1], i)?, num(p[2], i)?];
        if tri.iter().any(|&v: &usize| v >= n) {
            return Err(Error::Format(format!("line {i}: node index out of range")));
        }
        triangles.push(tri);
        regions.push(if num::<u8>(p[3], i)? == 0 { Region::P } else { Region::Pbar });
    }
    let e = lines.header("interface")?;
    let mut boundary_edges = Vec::with_capacity(e);
    for _ in 0..e {
        let (i, p) = lines.next()?;
        if p.len() != 4 {
            return Err(Error::Format(format!("line {i}: expected 'a b nx ny'")));
        }
        boundary_edges.push(BoundaryEdge { nodes: [num(p[0], i)?, num(p[1], i)?], normal: [num(p[2], i)?, num(p[3], i)?] });
    }
    let k = lines.header("periodic")?;
    let mut periodic_pairs = Vec::with_capacity(k);
    for _ in 0..k {
        let (i, p) = lines.next()?;
        let axis = match p.first() {
            Some(&"x") => Axis::X,
            Some(&"y") => Axis::Y,
            _ => return Err(Error::Format(format!("line {i}: expected axis x or y"))),
        };
        if p.len() != 3 {
            return Err(Error::Format(format!("line {i}: expected 'axis high low'")));
        }
        periodic_pairs.push(PeriodicPair { axis, high: num(p[1], i)?, low: num(p[2], i)? });
    }
    let a = lines.header("antipode")?;
    if a != n {
        return Err(Error::Format("antipode map must cover every node".into()));
    }
    let mut antipode = Vec::with_capacity(n);
    for _ in 0..a {
        let (i, p) = lines.next()?;
        antipode.push(num(p.first().copied().unwrap_or(""), i)?);
    }
    Ok(Mesh { geometry, resolution, nodes, triangles, regions, boundary_edges, periodic_pairs, antipode })
}

/// Nodal values, one per line, after a `plasmonic-field 1 <N>` header.
pub fn write_field(node_values: &[f64]) -> String {
    let mut s = format!("plasmonic-field {FIELD_FORMAT_VERSION} {}\n", node_values.len());
    for v in node_values {
        let _ = writeln!(s, "{v:?}");
    }
    s
}

pub fn read_field(text: &str) -> Result<Vec<f64>> {
    let mut it = text.lines();
    let head: Vec<&str> = it.next().unwrap_or("").split_whitespace().collect();
    if head.len() != 3 || head[0] != "plasmonic-field" || head[1] != FIELD_FORMAT_VERSION.to_string() {
        return Err(Error::Format("not a version-1 plasmonic field".into()));
    }
    let n: usize = num(head[2], 1)?;
    let values: Vec<f64> = it.enumerate().map(|(i, l)| num(l.trim(), i + 2)).collect::<Result<_>>()?;
    if values.len() != n {
        return Err(Error::Format(format!("expected {n} values, found {}", values.len())));
    }
    Ok(values)
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<MeshMetadata> {
    std::fs::write(path, write_mesh(mesh))?;
    let meta = MeshMetadata::of(mesh);
    std::fs::write(path.with_extension("json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(meta)
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    read_mesh(&std::fs::read_to_string(path)?)
}
