//! JSON mesh files.
//!
//! ```json
//! {"vertices": [[x, y, z], ...],
//!  "faces": [{"loop": [ids], "map": {"kind": "affine", "params": {...}}, "param": [[u, v], ...]}],
//!  "cells": [{"faces": [[id, sign], ...], "material": 0}],
//!  "tags": {"essential": [ids], "natural": [ids]}}
//! ```
//!
//! Coordinates are written with the shortest decimal that round-trips, so
//! reading back a written mesh reproduces every `f64` exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mesh::{BoundaryTag, Cell, Face, PolyMesh};
use crate::{Error, Result, Vec3};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tags {
    #[serde(default)]
    essential: Vec<usize>,
    #[serde(default)]
    natural: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    vertices: Vec<[f64; 3]>,
    faces: Vec<Face>,
    cells: Vec<Cell>,
    tags: Tags,
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// Converts a `serde_path_to_error` path (`faces[3].map`) to a JSON pointer (`/faces/3/map`).
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

pub fn to_json(mesh: &PolyMesh) -> Result<String> {
    let mut tags = Tags {
        essential: Vec::new(),
        natural: Vec::new(),
    };
    for (f, t) in mesh.tags.iter().enumerate() {
        match t {
            BoundaryTag::Essential => tags.essential.push(f),
            BoundaryTag::Natural => tags.natural.push(f),
            BoundaryTag::Interior => {}
        }
    }
    let file = MeshFile {
        vertices: mesh.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
        faces: mesh.faces.clone(),
        cells: mesh.cells.clone(),
        tags,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn from_json(text: &str) -> Result<PolyMesh> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: MeshFile = serde_path_to_error::deserialize(de)
        .map_err(|e| schema(pointer_of(e.path()), e.inner().to_string()))?;

    let nv = file.vertices.len();
    let nf = file.faces.len();
    for (i, f) in file.faces.iter().enumerate() {
        if let Some(p) = f.vertex_loop.iter().position(|&v| v >= nv) {
            return Err(schema(
                format!("/faces/{i}/loop/{p}"),
                format!("face {i} references missing vertex {}", f.vertex_loop[p]),
            ));
        }
        if f.param.len() != f.vertex_loop.len() {
            return Err(schema(format!("/faces/{i}/param"), "one parameter point per loop vertex"));
        }
        if !f.edges.is_empty() && f.edges.len() != f.vertex_loop.len() {
            return Err(schema(format!("/faces/{i}/edges"), "one edge per loop vertex"));
        }
    }
    for (c, cell) in file.cells.iter().enumerate() {
        for (p, &(f, s)) in cell.faces.iter().enumerate() {
            if f >= nf {
                return Err(schema(
                    format!("/cells/{c}/faces/{p}"),
                    format!("cell {c} references missing face {f}"),
                ));
            }
            if s != 1 && s != -1 {
                return Err(schema(
                    format!("/cells/{c}/faces/{p}/1"),
                    format!("cell {c}: orientation sign must be ±1"),
                ));
            }
        }
    }
    let mut tags = vec![BoundaryTag::Interior; nf];
    for (key, list, tag) in [
        ("essential", &file.tags.essential, BoundaryTag::Essential),
        ("natural", &file.tags.natural, BoundaryTag::Natural),
    ] {
        for (p, &f) in list.iter().enumerate() {
            if f >= nf {
                return Err(schema(format!("/tags/{key}/{p}"), format!("missing face {f}")));
            }
            if tags[f] != BoundaryTag::Interior {
                return Err(schema(format!("/tags/{key}/{p}"), format!("face {f} tagged twice")));
            }
            tags[f] = tag;
        }
    }
    let cells = file
        .cells
        .into_iter()
        .map(|c| Cell::new(c.faces, c.material))
        .collect();
    PolyMesh::new(
        file.vertices.iter().map(|v| Vec3::new(v[0], v[1], v[2])).collect(),
        file.faces,
        cells,
        tags,
    )
}

pub fn write_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(mesh)?)?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    from_json(&std::fs::read_to_string(path)?)
}
