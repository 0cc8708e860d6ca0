//! Text serialization of [`PolyMesh`].
//!
//! ```text
//! polymesh 1
//! vertex <id> <x> <y>
//! cell <id> <v1> <v2> ...
//! ```
//!
//! Ids must be contiguous from zero in file order. Coordinates are written
//! with 17 significant digits so that a round trip is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::{Point, PolyMesh};
use crate::error::{Error, Result};

pub fn mesh_to_string(mesh: &PolyMesh) -> String {
    let mut s = String::from("polymesh 1\n");
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(s, "vertex {i} {:.16e} {:.16e}", p[0], p[1]).unwrap();
    }
    for (c, cell) in mesh.cells().iter().enumerate() {
        write!(s, "cell {c}").unwrap();
        for v in cell {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mesh_to_string(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text, path)
}

pub fn parse_mesh(text: &str, path: &Path) -> Result<PolyMesh> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut vertices: Vec<Point> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut header = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut tok = raw.split_whitespace();
        let kind = tok.next().unwrap();
        if !header {
            if kind != "polymesh" || tok.next() != Some("1") || tok.next().is_some() {
                return Err(err(line, "expected header `polymesh 1`".into()));
            }
            header = true;
            continue;
        }
        let id: usize = tok
            .next()
            .ok_or_else(|| err(line, format!("`{kind}` record without id")))?
            .parse()
            .map_err(|e| err(line, format!("bad id: {e}")))?;
        match kind {
            "vertex" => {
                if id != vertices.len() {
                    return Err(err(line, format!("vertex id {id}, expected {}", vertices.len())));
                }
                let mut xy = [0.0f64; 2];
                for c in &mut xy {
                    *c = tok
                        .next()
                        .ok_or_else(|| err(line, "vertex needs two coordinates".into()))?
                        .parse()
                        .map_err(|e| err(line, format!("bad coordinate: {e}")))?;
                    if !c.is_finite() {
                        return Err(err(line, "non-finite coordinate".into()));
                    }
                }
                if tok.next().is_some() {
                    return Err(err(line, "trailing tokens after vertex".into()));
                }
                vertices.push(xy);
            }
            "cell" => {
                if id != cells.len() {
                    return Err(err(line, format!("cell id {id}, expected {}", cells.len())));
                }
                let mut loop_ = Vec::new();
                for t in tok {
                    let v: usize = t.parse().map_err(|e| err(line, format!("bad vertex index: {e}")))?;
                    loop_.push(v);
                }
                if loop_.len() < 3 {
                    return Err(err(line, "cell needs at least three vertices".into()));
                }
                cells.push(loop_);
            }
            other => return Err(err(line, format!("unknown record `{other}`"))),
        }
    }
    if !header {
        return Err(err(0, "empty file".into()));
    }
    for (c, cell) in cells.iter().enumerate() {
        if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
            let line = text
                .lines()
                .position(|l| {
                    let mut t = l.split_whitespace();
                    t.next() == Some("cell") && t.next() == Some(&c.to_string())
                })
                .map_or(0, |p| p + 1);
            return Err(err(line, format!("cell {c} references missing vertex {v}")));
        }
    }
    PolyMesh::new(vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_unit_square() {
        let m = PolyMesh::unit_square();
        let s = mesh_to_string(&m);
        assert!(s.starts_with("polymesh 1\n"));
        let back = parse_mesh(&s, Path::new("mem")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn missing_vertex_reports_line() {
        let text = "polymesh 1\nvertex 0 0 0\nvertex 1 1 0\nvertex 2 1 1\ncell 0 0 1 5\n";
        match parse_mesh(text, Path::new("m.msh")) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 5);
                assert!(msg.contains("missing vertex 5"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_header_and_garbage() {
        assert!(parse_mesh("mesh 2\n", Path::new("x")).is_err());
        assert!(parse_mesh("polymesh 1\nvertex 0 a 0\n", Path::new("x")).is_err());
        assert!(parse_mesh("polymesh 1\nedge 0 1 2\n", Path::new("x")).is_err());
        assert!(parse_mesh("", Path::new("x")).is_err());
    }

    #[test]
    fn awkward_coordinates_survive() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.1 + 0.2, 1.0 / 3.0]];
        let m = PolyMesh::new(v, vec![vec![0, 1, 2]]).unwrap();
        let back = parse_mesh(&mesh_to_string(&m), Path::new("mem")).unwrap();
        assert_eq!(back, m);
    }
}
