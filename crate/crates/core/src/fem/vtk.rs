//! Legacy VTK (ASCII unstructured grid) output.

use std::io::Write;

use super::mesh::Mesh;
use crate::error::{invalid, Result};

/// Local node order of a VTK_HEXAHEDRON in terms of the mesh-local
/// numbering `ax + 2ay + 4az`.
const VTK_HEX_ORDER: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];
const VTK_HEXAHEDRON: u8 = 12;

pub fn write_vtk(
    out: &mut impl Write,
    mesh: &Mesh,
    title: &str,
    point_fields: &[(&str, &[f64])],
    cell_fields: &[(&str, &[f64])],
) -> Result<()> {
    for (name, data) in point_fields {
        if data.len() != mesh.num_nodes() {
            return Err(invalid(format!("point field {name} has {} values", data.len())));
        }
    }
    for (name, data) in cell_fields {
        if data.len() != mesh.num_elements() {
            return Err(invalid(format!("cell field {name} has {} values", data.len())));
        }
    }
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.num_nodes())?;
    for c in mesh.coords() {
        writeln!(out, "{} {} {}", c[0], c[1], c[2])?;
    }
    let ne = mesh.num_elements();
    writeln!(out, "CELLS {} {}", ne, 9 * ne)?;
    for e in 0..ne {
        let nodes = mesh.element_nodes(e);
        write!(out, "8")?;
        for &a in &VTK_HEX_ORDER {
            write!(out, " {}", nodes[a])?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(out, "{VTK_HEXAHEDRON}")?;
    }
    write_scalars(out, "POINT_DATA", mesh.num_nodes(), point_fields)?;
    write_scalars(out, "CELL_DATA", ne, cell_fields)?;
    Ok(())
}

fn write_scalars(out: &mut impl Write, section: &str, n: usize, fields: &[(&str, &[f64])]) -> Result<()> {
    if fields.is_empty() {
        return Ok(());
    }
    writeln!(out, "{section} {n}")?;
    for (name, data) in fields {
        let name: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in *data {
            writeln!(out, "{v:e}")?;
        }
    }
    Ok(())
}
