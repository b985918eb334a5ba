//! Line-oriented ASCII mesh format.
//!
//! ```text
//! femesh 1
//! nodes N
//! x y z            (N lines)
//! tets M
//! n0 n1 n2 n3 region   (M lines)
//! facets B
//! n0 n1 n2 tag     (B lines)
//! contact tagA tagB
//! ```
//!
//! `#` starts a comment. All indices are 0-based. The `facets` section and
//! `contact` lines are optional.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Contact, FacetSpec, Mesh, MeshError, Point, Tetrahedron};

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank line with comments stripped.
    fn next_content(&mut self) -> Result<Option<(usize, String)>, MeshError> {
        for line in self.inner.by_ref() {
            self.number += 1;
            let line = line?;
            let content = match line.find('#') {
                Some(i) => &line[..i],
                None => &line[..],
            };
            let content = content.trim();
            if !content.is_empty() {
                return Ok(Some((self.number, content.to_string())));
            }
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, String), MeshError> {
        self.next_content()?
            .ok_or_else(|| MeshError::Parse { line: self.number + 1, message: format!("unexpected end of file, expected {what}") })
    }
}

fn err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { line, message: message.into() }
}

fn parse_count(line: usize, text: &str, keyword: &str) -> Result<usize, MeshError> {
    let mut it = text.split_whitespace();
    if it.next() != Some(keyword) {
        return Err(err(line, format!("expected `{keyword} <count>`")));
    }
    let n = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(line, format!("bad {keyword} count")))?;
    if it.next().is_some() {
        return Err(err(line, "trailing tokens"));
    }
    Ok(n)
}

fn fields<T: std::str::FromStr>(line: usize, text: &str, n: usize, what: &str) -> Result<Vec<T>, MeshError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != n {
        return Err(err(line, format!("{what} line needs {n} fields, found {}", parts.len())));
    }
    parts
        .iter()
        .map(|s| s.parse().map_err(|_| err(line, format!("cannot parse `{s}` in {what} line"))))
        .collect()
}

/// Parses and validates a mesh.
pub fn parse_mesh(reader: impl BufRead) -> Result<Mesh, MeshError> {
    let mut lines = Lines { inner: reader.lines(), number: 0 };
    let (ln, header) = lines.expect("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["femesh", "1"] {
        return Err(err(ln, "expected header `femesh 1`"));
    }

    let (ln, text) = lines.expect("nodes section")?;
    let n = parse_count(ln, &text, "nodes")?;
    let mut nodes: Vec<Point> = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, text) = lines.expect("node coordinates")?;
        let v: Vec<f64> = fields(ln, &text, 3, "node")?;
        nodes.push([v[0], v[1], v[2]]);
    }

    let (ln, text) = lines.expect("tets section")?;
    let m = parse_count(ln, &text, "tets")?;
    let mut tets = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, text) = lines.expect("tetrahedron")?;
        let v: Vec<usize> = fields(ln, &text, 5, "tet")?;
        let region = u32::try_from(v[4]).map_err(|_| err(ln, "region id too large"))?;
        tets.push(Tetrahedron { nodes: [v[0], v[1], v[2], v[3]], region });
    }

    let mut facets = Vec::new();
    let mut contacts = Vec::new();
    let mut seen_facets = false;
    while let Some((ln, text)) = lines.next_content()? {
        let keyword = text.split_whitespace().next().unwrap_or("");
        match keyword {
            "facets" if !seen_facets => {
                seen_facets = true;
                let b = parse_count(ln, &text, "facets")?;
                facets.reserve(b);
                for _ in 0..b {
                    let (ln, text) = lines.expect("facet")?;
                    let parts: Vec<&str> = text.split_whitespace().collect();
                    if parts.len() != 4 {
                        return Err(err(ln, format!("facet line needs 4 fields, found {}", parts.len())));
                    }
                    let mut idx = [0usize; 3];
                    for k in 0..3 {
                        idx[k] = parts[k].parse().map_err(|_| err(ln, format!("cannot parse `{}` in facet line", parts[k])))?;
                    }
                    facets.push(FacetSpec { nodes: idx, tag: parts[3].to_string() });
                }
            }
            "contact" => {
                let parts: Vec<&str> = text.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(err(ln, "expected `contact tagA tagB`"));
                }
                contacts.push(Contact { primary: parts[1].to_string(), secondary: parts[2].to_string() });
            }
            _ => return Err(err(ln, format!("unexpected `{text}`"))),
        }
    }
    Mesh::new(nodes, tets, facets, contacts)
}

pub fn read_mesh_file(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    parse_mesh(BufReader::new(File::open(path)?))
}

/// Serializes a mesh. Coordinates use the shortest round-trip decimal form,
/// so parsing the output reproduces the mesh exactly.
pub fn write_mesh(mesh: &Mesh, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "femesh 1")?;
    writeln!(w, "nodes {}", mesh.node_count())?;
    for p in mesh.nodes() {
        writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
    }
    writeln!(w, "tets {}", mesh.element_count())?;
    for t in mesh.tets() {
        writeln!(w, "{} {} {} {} {}", t.nodes[0], t.nodes[1], t.nodes[2], t.nodes[3], t.region)?;
    }
    if !mesh.facets().is_empty() {
        writeln!(w, "facets {}", mesh.facets().len())?;
        for f in mesh.facets() {
            writeln!(w, "{} {} {} {}", f.nodes[0], f.nodes[1], f.nodes[2], f.tag)?;
        }
    }
    for c in mesh.contacts() {
        writeln!(w, "contact {} {}", c.primary, c.secondary)?;
    }
    Ok(())
}

pub fn write_mesh_file(mesh: &Mesh, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mesh(mesh, &mut w)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: &str = "femesh 1\n# reference element\nnodes 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ntets 1\n0 1 2 3 0\n";

    #[test]
    fn parses_reference_tetrahedron() {
        let m = parse_mesh(UNIT.as_bytes()).unwrap();
        assert_eq!(m.node_count(), 4);
        assert_eq!(m.element_count(), 1);
        assert!((m.element_geometry(0).volume - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = "femesh 1\nnodes 2\n0 0 0\n1 0 x\n";
        match parse_mesh(bad.as_bytes()) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse_mesh("femesh 2\n".as_bytes()) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_node_is_validation_error() {
        let text = UNIT.replace("0 1 2 3 0", "0 1 2 99 0");
        assert!(matches!(parse_mesh(text.as_bytes()), Err(MeshError::DanglingNode { node: 99, .. })));
    }

    #[test]
    fn facets_and_contacts_round_trip() {
        let text = "femesh 1\nnodes 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ntets 1\n0 2 1 3 7\nfacets 1\n0 1 2 base\n";
        let m = parse_mesh(text.as_bytes()).unwrap();
        assert_eq!(m.tets()[0].nodes, [0, 1, 2, 3]);
        let mut out = Vec::new();
        write_mesh(&m, &mut out).unwrap();
        let again = parse_mesh(out.as_slice()).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.element_geometry(0).volume, m.element_geometry(0).volume);
    }
}
