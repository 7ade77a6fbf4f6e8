//! Builds every generated mesh family, prints its size and chart kinds, and
//! writes one of them to JSON and back.

use std::collections::BTreeMap;

use curvem::mesh::io::{from_json, to_json};
use curvem::mesh::{cornerpoint_layers, curved_top_cube, extruded_annulus, unit_cube_grid, AnnulusBase, PolyMesh};

fn describe(name: &str, m: &PolyMesh) {
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &m.faces {
        *kinds.entry(f.map.kind_name()).or_default() += 1;
    }
    println!(
        "{name:<22} cells {:>5}  faces {:>6}  volume {:.12}  h {:.4}  charts {kinds:?}",
        m.n_cells(),
        m.n_faces(),
        m.volume(),
        m.mesh_size().unwrap()
    );
}

fn main() -> curvem::Result<()> {
    describe("unit cube 3^3", &unit_cube_grid(3)?);
    let top = curved_top_cube(4, 0.1)?;
    describe("curved top n=4", &top);
    describe("  flattened twin", &top.flattened()?);
    describe("annulus quad 2x6x2", &extruded_annulus(AnnulusBase::Quad, 2, 6, 2, 0.2, 1.0)?);
    describe("annulus tria 2x6x2", &extruded_annulus(AnnulusBase::Tria, 2, 6, 2, 0.2, 1.0)?);
    describe("corner-point 4x4, 2/layer", &cornerpoint_layers(4, 2, true)?);

    let text = to_json(&top)?;
    let back = from_json(&text)?;
    println!("JSON round trip: {} bytes, identical: {}", text.len(), back == top);
    Ok(())
}
