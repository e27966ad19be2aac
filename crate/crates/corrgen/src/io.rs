//! File formats: point clouds (CSV and binary), path files, corridor
//! JSON, boundary meshes (Wavefront OBJ) and sweep tables.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cheby::ChebyshevPoly;
use crate::corridor::{BoundaryMesh, Corridor2D, Corridor3D};
use crate::error::{Error, Result};
use crate::opt::SweepRow;
use crate::path::{FrameStation, ParametricPath};
use crate::projection::RawCloud;

/// Magic prefix of the binary cloud format: 8 magic bytes + u64 LE count,
/// then little-endian f32 xyz triplets.
pub const CLOUD_MAGIC: &[u8; 8] = b"CRGNPCD1";

// ---------------------------------------------------------------------
// point clouds

pub fn save_cloud_csv(path: &Path, cloud: &RawCloud, planar: bool) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if planar {
        writeln!(w, "x,y")?;
        for p in &cloud.points {
            writeln!(w, "{:.8e},{:.8e}", p.x, p.y)?;
        }
    } else {
        writeln!(w, "x,y,z")?;
        for p in &cloud.points {
            writeln!(w, "{:.8e},{:.8e},{:.8e}", p.x, p.y, p.z)?;
        }
    }
    Ok(())
}

pub fn save_cloud_binary(path: &Path, cloud: &RawCloud) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CLOUD_MAGIC)?;
    w.write_all(&(cloud.len() as u64).to_le_bytes())?;
    for p in &cloud.points {
        for v in [p.x, p.y, p.z] {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Load a cloud, detecting the binary format by its magic header and
/// falling back to CSV.
pub fn load_cloud(path: &Path) -> Result<RawCloud> {
    let mut file = File::open(path)?;
    let mut head = [0u8; 8];
    let n = file.read(&mut head)?;
    if n == 8 && &head == CLOUD_MAGIC {
        return load_cloud_binary_body(&mut file);
    }
    drop(file);
    load_cloud_csv(path)
}

fn load_cloud_binary_body(file: &mut File) -> Result<RawCloud> {
    let mut count_bytes = [0u8; 8];
    file.read_exact(&mut count_bytes)?;
    let count = u64::from_le_bytes(count_bytes) as usize;
    let mut data = vec![0u8; count * 12];
    file.read_exact(&mut data)?;
    let mut points = Vec::with_capacity(count);
    for chunk in data.chunks_exact(12) {
        let x = f32::from_le_bytes(chunk[0..4].try_into().unwrap()) as f64;
        let y = f32::from_le_bytes(chunk[4..8].try_into().unwrap()) as f64;
        let z = f32::from_le_bytes(chunk[8..12].try_into().unwrap()) as f64;
        points.push(Vector3::new(x, y, z));
    }
    RawCloud::new(points)
}

fn load_cloud_csv(path: &Path) -> Result<RawCloud> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    let cols: Vec<&str> = header.trim().split(',').map(|c| c.trim()).collect();
    let planar = match cols.as_slice() {
        ["x", "y", "z"] => false,
        ["x", "y"] => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header 'x,y,z' or 'x,y', got '{header}'"),
            })
        }
    };
    let mut points = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        let expected = if planar { 2 } else { 3 };
        if fields.len() != expected {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {expected} fields, got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 3];
        for (i, f) in fields.iter().enumerate() {
            vals[i] = f.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad number '{f}': {e}"),
            })?;
            if !vals[i].is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite coordinate '{f}'"),
                });
            }
        }
        points.push(Vector3::new(vals[0], vals[1], vals[2]));
    }
    RawCloud::new(points)
}

// ---------------------------------------------------------------------
// paths

#[derive(Debug, Serialize, Deserialize)]
struct StationRecord {
    xi: f64,
    position: [f64; 3],
    rotation_rowmajor: [f64; 9],
}

#[derive(Debug, Serialize, Deserialize)]
struct PathFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    waypoints: Option<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stations: Option<Vec<StationRecord>>,
}

pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 50;

pub fn load_path(path: &Path) -> Result<ParametricPath> {
    let file: PathFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if let Some(stations) = file.stations {
        let stations = stations
            .into_iter()
            .map(|s| FrameStation {
                xi: s.xi,
                position: Vector3::from_row_slice(&s.position),
                rotation: Matrix3::from_row_slice(&s.rotation_rowmajor),
            })
            .collect();
        return ParametricPath::from_stations(stations);
    }
    if let Some(waypoints) = file.waypoints {
        let waypoints: Vec<Vector3<f64>> = waypoints
            .iter()
            .map(|w| Vector3::from_row_slice(w))
            .collect();
        return ParametricPath::from_waypoints(&waypoints, DEFAULT_SAMPLES_PER_SEGMENT);
    }
    Err(Error::InvalidInput(
        "path file needs either 'waypoints' or 'stations'".into(),
    ))
}

pub fn save_waypoints(path: &Path, waypoints: &[Vector3<f64>]) -> Result<()> {
    let file = PathFile {
        waypoints: Some(waypoints.iter().map(|w| [w.x, w.y, w.z]).collect()),
        stations: None,
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &file)?;
    Ok(())
}

pub fn save_stations(path: &Path, p: &ParametricPath) -> Result<()> {
    let file = PathFile {
        waypoints: None,
        stations: Some(
            p.stations()
                .iter()
                .map(|s| StationRecord {
                    xi: s.xi,
                    position: [s.position.x, s.position.y, s.position.z],
                    rotation_rowmajor: {
                        let mut r = [0.0; 9];
                        for i in 0..3 {
                            for j in 0..3 {
                                r[3 * i + j] = s.rotation[(i, j)];
                            }
                        }
                        r
                    },
                })
                .collect(),
        ),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &file)?;
    Ok(())
}

// ---------------------------------------------------------------------
// corridors

/// Either corridor dimensionality, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum CorridorDoc {
    Spatial(Corridor3D),
    Planar(Corridor2D),
}

#[derive(Debug, Serialize, Deserialize)]
struct CorridorFile {
    dim: u8,
    degree: usize,
    xi_range: [f64; 2],
    basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    e11: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e12: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e22: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d1: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d2: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_plus: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_minus: Option<Vec<f64>>,
}

pub fn save_corridor(path: &Path, doc: &CorridorDoc) -> Result<()> {
    let file = match doc {
        CorridorDoc::Spatial(c) => CorridorFile {
            dim: 3,
            degree: c.degree,
            xi_range: [c.domain.0, c.domain.1],
            basis: "chebyshev".into(),
            e11: Some(c.e11.coeffs.clone()),
            e12: Some(c.e12.coeffs.clone()),
            e22: Some(c.e22.coeffs.clone()),
            d1: Some(c.d1.coeffs.clone()),
            d2: Some(c.d2.coeffs.clone()),
            b_plus: None,
            b_minus: None,
        },
        CorridorDoc::Planar(c) => CorridorFile {
            dim: 2,
            degree: c.degree,
            xi_range: [c.domain.0, c.domain.1],
            basis: "chebyshev".into(),
            e11: None,
            e12: None,
            e22: None,
            d1: None,
            d2: None,
            b_plus: Some(c.b_plus.coeffs.clone()),
            b_minus: Some(c.b_minus.coeffs.clone()),
        },
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &file)?;
    Ok(())
}

pub fn load_corridor(path: &Path) -> Result<CorridorDoc> {
    let file: CorridorFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if file.basis != "chebyshev" {
        return Err(Error::InvalidInput(format!(
            "unsupported basis '{}'",
            file.basis
        )));
    }
    let domain = (file.xi_range[0], file.xi_range[1]);
    let poly = |coeffs: Option<Vec<f64>>, name: &str| -> Result<ChebyshevPoly> {
        let coeffs =
            coeffs.ok_or_else(|| Error::InvalidInput(format!("corridor file missing '{name}'")))?;
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(format!("'{name}' has no coefficients")));
        }
        Ok(ChebyshevPoly::new(coeffs, domain))
    };
    match file.dim {
        3 => Ok(CorridorDoc::Spatial(Corridor3D {
            e11: poly(file.e11, "e11")?,
            e12: poly(file.e12, "e12")?,
            e22: poly(file.e22, "e22")?,
            d1: poly(file.d1, "d1")?,
            d2: poly(file.d2, "d2")?,
            degree: file.degree,
            domain,
        })),
        2 => Ok(CorridorDoc::Planar(Corridor2D {
            b_plus: poly(file.b_plus, "b_plus")?,
            b_minus: poly(file.b_minus, "b_minus")?,
            degree: file.degree,
            domain,
        })),
        d => Err(Error::InvalidInput(format!("unsupported corridor dim {d}"))),
    }
}

// ---------------------------------------------------------------------
// meshes and sweep tables

pub fn save_mesh_obj(path: &Path, mesh: &BoundaryMesh) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in &mesh.vertices {
        writeln!(w, "v {:.8e} {:.8e} {:.8e}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

pub fn save_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "degree,formulation,volume,solve_ms,assembly_ms,constraints"
    )?;
    for r in rows {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "nan".into());
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.degree,
            r.formulation,
            fmt(r.volume),
            fmt(r.solve_ms),
            fmt(r.assembly_ms),
            r.constraints
                .map(|c| c.to_string())
                .unwrap_or_else(|| "nan".into()),
        )?;
    }
    Ok(())
}
