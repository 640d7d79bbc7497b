//! Mesh file formats: ASCII OFF for triangle surfaces and a small CSV
//! polyline format (`x,y,boundary`) for curves.
//!
//! In the CSV format a row with `boundary = 1` opens a chain that runs until
//! the next `boundary = 1` row; maximal runs of `boundary = 0` rows outside
//! any chain form closed loops. Consecutive rows are connected by segments
//! in file order.

use super::{HalfSpaceMesh, MeshError};
use crate::geom::Point;
use nalgebra::{Vector2, Vector3};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn load_off(path: &Path, tol_plane: Option<f64>) -> Result<HalfSpaceMesh<3>, MeshError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut tokens: Vec<(usize, String)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let stripped = match line.find('#') {
            Some(p) => &line[..p],
            None => &line[..],
        };
        for tok in stripped.split_whitespace() {
            tokens.push((lineno + 1, tok.to_string()));
        }
    }
    let mut cursor = 0usize;
    let mut next = |what: &str| -> Result<(usize, String), MeshError> {
        let t = tokens.get(cursor).cloned().ok_or(MeshError::Parse {
            line: tokens.last().map(|t| t.0).unwrap_or(0),
            msg: format!("unexpected end of file, expected {what}"),
        })?;
        cursor += 1;
        Ok(t)
    };

    let (line, magic) = next("OFF header")?;
    if magic != "OFF" {
        return Err(MeshError::Parse {
            line,
            msg: format!("expected OFF header, found {magic:?}"),
        });
    }
    let parse_usize = |t: (usize, String)| -> Result<usize, MeshError> {
        t.1.parse().map_err(|_| MeshError::Parse {
            line: t.0,
            msg: format!("expected integer, found {:?}", t.1),
        })
    };
    let parse_f64 = |t: (usize, String)| -> Result<f64, MeshError> {
        t.1.parse().map_err(|_| MeshError::Parse {
            line: t.0,
            msg: format!("expected number, found {:?}", t.1),
        })
    };

    let n_vertices = parse_usize(next("vertex count")?)?;
    let n_faces = parse_usize(next("face count")?)?;
    let _n_edges = parse_usize(next("edge count")?)?;

    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let x = parse_f64(next("x")?)?;
        let y = parse_f64(next("y")?)?;
        let z = parse_f64(next("z")?)?;
        vertices.push(Vector3::new(x, y, z));
    }
    let mut elements = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let arity_tok = next("face arity")?;
        let arity = parse_usize(arity_tok.clone())?;
        if arity != 3 {
            return Err(MeshError::Parse {
                line: arity_tok.0,
                msg: format!("only triangles are supported, found {arity}-gon"),
            });
        }
        let a = parse_usize(next("index")?)? as u32;
        let b = parse_usize(next("index")?)? as u32;
        let c = parse_usize(next("index")?)? as u32;
        elements.push([a, b, c]);
    }
    HalfSpaceMesh::build(vertices, elements, tol_plane)
}

pub fn save_off(mesh: &HalfSpaceMesh<3>, path: &Path) -> Result<(), MeshError> {
    let mut out = String::new();
    out.push_str("OFF\n");
    out.push_str(&format!(
        "{} {} 0\n",
        mesh.vertex_count(),
        mesh.element_count()
    ));
    for v in mesh.vertices() {
        out.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
    }
    for el in mesh.elements() {
        out.push_str(&format!("3 {} {} {}\n", el[0], el[1], el[2]));
    }
    write_atomic(path, out.as_bytes())?;
    Ok(())
}

pub fn load_csv(path: &Path, tol_plane: Option<f64>) -> Result<HalfSpaceMesh<2>, MeshError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut rows: Vec<(usize, f64, f64, bool)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            // header row
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(MeshError::Parse {
                line: lineno + 1,
                msg: format!("expected `x,y,boundary`, found {trimmed:?}"),
            });
        }
        let x: f64 = parts[0].parse().map_err(|_| MeshError::Parse {
            line: lineno + 1,
            msg: format!("bad x value {:?}", parts[0]),
        })?;
        let y: f64 = parts[1].parse().map_err(|_| MeshError::Parse {
            line: lineno + 1,
            msg: format!("bad y value {:?}", parts[1]),
        })?;
        let b: u8 = parts[2].parse().map_err(|_| MeshError::Parse {
            line: lineno + 1,
            msg: format!("bad boundary flag {:?}", parts[2]),
        })?;
        rows.push((lineno + 1, x, y, b != 0));
    }
    if rows.is_empty() {
        return Err(MeshError::Empty);
    }

    let vertices: Vec<Point<2>> = rows.iter().map(|&(_, x, y, _)| Vector2::new(x, y)).collect();
    let mut elements: Vec<[u32; 2]> = Vec::new();
    let mut i = 0usize;
    while i < rows.len() {
        if rows[i].3 {
            // Open chain: runs to the next boundary row.
            let start = i;
            let mut j = i + 1;
            while j < rows.len() && !rows[j].3 {
                j += 1;
            }
            if j >= rows.len() {
                return Err(MeshError::Parse {
                    line: rows[start].0,
                    msg: "open chain never closed by a second boundary row".into(),
                });
            }
            for k in start..j {
                elements.push([k as u32, k as u32 + 1]);
            }
            i = j + 1;
        } else {
            // Closed loop: maximal run of interior rows.
            let start = i;
            let mut j = i;
            while j < rows.len() && !rows[j].3 {
                j += 1;
            }
            if j - start < 3 {
                return Err(MeshError::Parse {
                    line: rows[start].0,
                    msg: "closed loop needs at least 3 points".into(),
                });
            }
            for k in start..j - 1 {
                elements.push([k as u32, k as u32 + 1]);
            }
            elements.push([(j - 1) as u32, start as u32]);
            i = j;
        }
    }
    HalfSpaceMesh::build(vertices, elements, tol_plane)
}

pub fn save_csv(mesh: &HalfSpaceMesh<2>, path: &Path) -> Result<(), MeshError> {
    // Rebuild the row stream chain by chain so a round trip reproduces the
    // same connectivity. Chains are emitted in stored order, then loops.
    let mut out = String::from("x,y,boundary\n");
    let mut emitted = vec![false; mesh.vertex_count()];
    for lp in mesh.boundary_loops() {
        for &v in &lp.vertices {
            let p = mesh.vertex(v);
            let flag = u8::from(mesh.is_boundary_vertex(v));
            out.push_str(&format!("{},{},{}\n", p[0], p[1], flag));
            emitted[v as usize] = true;
        }
    }
    // Closed loops: follow successors.
    let mut next_of: Vec<Option<u32>> = vec![None; mesh.vertex_count()];
    for el in mesh.elements() {
        next_of[el[0] as usize] = Some(el[1]);
    }
    for start in 0..mesh.vertex_count() as u32 {
        if emitted[start as usize] {
            continue;
        }
        let mut cur = start;
        loop {
            let p = mesh.vertex(cur);
            out.push_str(&format!("{},{},0\n", p[0], p[1]));
            emitted[cur as usize] = true;
            cur = next_of[cur as usize].expect("validated mesh");
            if cur == start {
                break;
            }
        }
    }
    write_atomic(path, out.as_bytes())?;
    Ok(())
}

/// Writes through a sibling temp file followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tent.off");
        let vertices = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.5, 0.5, 0.812345678901234),
        ];
        let elements = vec![[0u32, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        let mesh = HalfSpaceMesh::build(vertices.clone(), elements.clone(), None).unwrap();
        save_off(&mesh, &path).unwrap();
        let loaded = load_off(&path, None).unwrap();
        assert_eq!(loaded.vertex_count(), mesh.vertex_count());
        for (a, b) in loaded.vertices().iter().zip(mesh.vertices()) {
            assert_eq!(a, b);
        }
        assert_eq!(loaded.elements(), mesh.elements());
    }

    #[test]
    fn off_rejects_below_plane_with_diagnostic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.off");
        std::fs::write(
            &path,
            "OFF\n4 2 0\n0 0 -0.1\n1 0 0\n1 1 0\n0 1 1\n3 0 1 3\n3 1 2 3\n",
        )
        .unwrap();
        let err = load_off(&path, None).unwrap_err();
        assert!(err.to_string().contains("below the hyperplane"));
    }

    #[test]
    fn csv_chain_and_loop_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        // An open arc (half circle) followed by a small closed square loop
        // well above the plane.
        let mut s = String::from("x,y,boundary\n");
        let n = 16;
        for i in 0..=n {
            let t = std::f64::consts::PI * i as f64 / n as f64;
            let flag = if i == 0 || i == n { 1 } else { 0 };
            s.push_str(&format!("{},{},{}\n", t.cos(), t.sin(), flag));
        }
        for (x, y) in [(4.0, 2.0), (5.0, 2.0), (5.0, 3.0), (4.0, 3.0)] {
            s.push_str(&format!("{x},{y},0\n"));
        }
        std::fs::write(&path, s).unwrap();
        let mesh = load_csv(&path, None).unwrap();
        assert_eq!(mesh.component_count(), 2);
        assert_eq!(mesh.boundary_loops().len(), 1); // one open chain
        let out = dir.path().join("roundtrip.csv");
        save_csv(&mesh, &out).unwrap();
        let again = load_csv(&out, None).unwrap();
        assert_eq!(again.vertex_count(), mesh.vertex_count());
        assert_eq!(again.element_count(), mesh.element_count());
    }
}
