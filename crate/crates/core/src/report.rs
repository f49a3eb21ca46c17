//! CSV study tables and legacy VTK dumps.

use std::fmt::Write as _;
use std::path::Path;

use crate::assembly::Discretization;
use crate::continuous::AdaptPlan;
use crate::error::{Error, Result};
use crate::mesh::{write_mesh, Triangulation};
use crate::solve::eval_fields;
use crate::study::{CycleOutcome, StudyRecord};

pub const CSV_HEADER: &str =
    "cycle,ne,ndof,err_l2_u,err_l2_sigma,energy_error,e_star,target_error,dwr,h_min,condition";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_default()
}

pub fn csv_string(record: &StudyRecord) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &record.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.10e},{:.10e},{},{},{:.10e},{}",
            r.cycle,
            r.ne,
            r.ndof,
            opt(r.err_l2_u),
            opt(r.err_l2_sigma),
            r.energy_error,
            r.e_star,
            opt(r.target_error),
            opt(r.dwr),
            r.h_min,
            opt(r.condition)
        );
    }
    s
}

pub fn write_csv(path: impl AsRef<Path>, record: &StudyRecord) -> Result<()> {
    std::fs::write(path, csv_string(record))?;
    Ok(())
}

/// Named per-element data for [`vtk_string`].
pub struct CellField<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

/// Legacy ASCII unstructured grid. Vertices are duplicated per element so the
/// discontinuous `u_h` is represented exactly at the corners.
pub fn vtk_string(
    mesh: &Triangulation,
    vertex_u: Option<&[[f64; 3]]>,
    cells: &[CellField],
) -> Result<String> {
    let ne = mesh.num_elements();
    if let Some(u) = vertex_u {
        crate::error::check_len(ne, u.len())?;
    }
    for c in cells {
        crate::error::check_len(ne, c.values.len())?;
    }
    let mut s = String::new();
    s.push_str(
        "# vtk DataFile Version 4.2\nadaptive DPG solution\nASCII\nDATASET UNSTRUCTURED_GRID\n",
    );
    let _ = writeln!(s, "POINTS {} double", 3 * ne);
    for k in 0..ne {
        for p in mesh.element_points(k) {
            let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
        }
    }
    let _ = writeln!(s, "CELLS {} {}", ne, 4 * ne);
    for k in 0..ne {
        let _ = writeln!(s, "3 {} {} {}", 3 * k, 3 * k + 1, 3 * k + 2);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        s.push_str("5\n");
    }
    if let Some(u) = vertex_u {
        let _ = writeln!(s, "POINT_DATA {}", 3 * ne);
        s.push_str("SCALARS u double 1\nLOOKUP_TABLE default\n");
        for vals in u {
            for v in vals {
                let _ = writeln!(s, "{v:.16e}");
            }
        }
    }
    if !cells.is_empty() {
        let _ = writeln!(s, "CELL_DATA {ne}");
        for c in cells {
            let _ = writeln!(s, "SCALARS {} double 1\nLOOKUP_TABLE default", c.name);
            for v in c.values {
                let _ = writeln!(s, "{v:.16e}");
            }
        }
    }
    Ok(s)
}

/// Structure of a parsed legacy VTK file.
#[derive(Debug, PartialEq)]
pub struct VtkSummary {
    pub points: usize,
    pub cells: usize,
    pub point_scalars: Vec<String>,
    pub cell_scalars: Vec<String>,
}

/// Minimal reader that checks the sections written by [`vtk_string`].
pub fn parse_vtk(text: &str) -> Result<VtkSummary> {
    let bad = |msg: String| Error::Parse {
        path: "<vtk>".into(),
        line: 0,
        msg,
    };
    let mut lines = text.lines();
    let head = lines.next().unwrap_or_default();
    if !head.starts_with("# vtk DataFile Version") {
        return Err(bad("missing VTK header".into()));
    }
    let _title = lines.next();
    if lines.next() != Some("ASCII") || lines.next() != Some("DATASET UNSTRUCTURED_GRID") {
        return Err(bad("expected ASCII unstructured grid".into()));
    }
    let toks: Vec<&str> = lines.flat_map(|l| l.split_whitespace()).collect();
    let mut i = 0;
    let num = |t: Option<&&str>| -> Result<usize> {
        t.and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("expected a count".into()))
    };
    let mut out = VtkSummary {
        points: 0,
        cells: 0,
        point_scalars: Vec::new(),
        cell_scalars: Vec::new(),
    };
    let mut section = "";
    let mut data_len = 0;
    while i < toks.len() {
        match toks[i] {
            "POINTS" => {
                out.points = num(toks.get(i + 1))?;
                i += 3;
                for _ in 0..3 * out.points {
                    toks.get(i)
                        .and_then(|v| v.parse::<f64>().ok())
                        .ok_or_else(|| bad("bad point coordinate".into()))?;
                    i += 1;
                }
            }
            "CELLS" => {
                out.cells = num(toks.get(i + 1))?;
                let size = num(toks.get(i + 2))?;
                i += 3;
                let mut read = 0;
                while read < size {
                    let n = num(toks.get(i))?;
                    for j in 1..=n {
                        if num(toks.get(i + j))? >= out.points {
                            return Err(bad("cell references missing point".into()));
                        }
                    }
                    i += n + 1;
                    read += n + 1;
                }
            }
            "CELL_TYPES" => {
                let n = num(toks.get(i + 1))?;
                if n != out.cells {
                    return Err(bad("cell type count mismatch".into()));
                }
                i += 2 + n;
            }
            "POINT_DATA" | "CELL_DATA" => {
                section = toks[i];
                data_len = num(toks.get(i + 1))?;
                let expect = if section == "POINT_DATA" {
                    out.points
                } else {
                    out.cells
                };
                if data_len != expect {
                    return Err(bad(format!("{section} size mismatch")));
                }
                i += 2;
            }
            "SCALARS" => {
                let name = toks
                    .get(i + 1)
                    .ok_or_else(|| bad("unnamed scalar".into()))?
                    .to_string();
                i += 6; // SCALARS name type 1 LOOKUP_TABLE default
                for _ in 0..data_len {
                    toks.get(i)
                        .and_then(|v| v.parse::<f64>().ok())
                        .ok_or_else(|| bad(format!("bad value in {name}")))?;
                    i += 1;
                }
                if section == "POINT_DATA" {
                    out.point_scalars.push(name);
                } else {
                    out.cell_scalars.push(name);
                }
            }
            t => return Err(bad(format!("unexpected token `{t}`"))),
        }
    }
    Ok(out)
}

/// Mesh and VTK dump for one adaptation cycle.
pub fn write_cycle(
    dir: &Path,
    cycle: usize,
    mesh: &Triangulation,
    disc: &Discretization,
    out: &CycleOutcome,
    plan: &AdaptPlan,
) -> Result<()> {
    write_mesh(mesh, dir.join(format!("mesh_{cycle:03}.mesh")))?;
    let u: Vec<[f64; 3]> = (0..mesh.num_elements())
        .map(|k| {
            let pts = mesh.element_points(k);
            // pull the corners slightly inside so the element owns them
            let c = mesh.centroid(k);
            pts.map(|p| {
                let q = [p[0] + 1e-12 * (c[0] - p[0]), p[1] + 1e-12 * (c[1] - p[1])];
                eval_fields(mesh, disc, &out.solution, k, q)[2]
            })
        })
        .collect();
    let text = vtk_string(
        mesh,
        Some(&u),
        &[
            CellField {
                name: "eta",
                values: &out.eta,
            },
            CellField {
                name: "density",
                values: &plan.density,
            },
            CellField {
                name: "aspect_ratio",
                values: &plan.aspect_ratio,
            },
        ],
    )?;
    std::fs::write(dir.join(format!("solution_{cycle:03}.vtk")), text)?;
    Ok(())
}
