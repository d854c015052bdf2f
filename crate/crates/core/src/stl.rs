//! Binary and ASCII STL serialization.
//!
//! Binary layout: 80-byte header, little-endian u32 triangle count, then
//! 50-byte records (normal, three vertices as f32 triples, u16 attribute).
//! Facet normals are recomputed from vertex winding at write time;
//! vertices are stored as f32 per the format, while everything upstream
//! computes in f64. Writing is deterministic byte for byte.

use std::io::Write;

use crate::error::{Error, Result};
use crate::mesh::{cross, norm, sub, Assembly, TriangleMesh};

/// Tag placed at the start of the 80-byte binary header.
const HEADER_TAG: &[u8] = b"reliefcast binary stl";

/// One parsed facet. Fields mirror the binary record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StlTriangle {
    pub normal: [f32; 3],
    pub vertices: [[f32; 3]; 3],
    pub attribute: u16,
}

/// A parsed or to-be-written STL file.
#[derive(Debug, Clone, PartialEq)]
pub struct StlDocument {
    /// Binary header (80 bytes) for binary files; synthesized for ASCII.
    pub header: [u8; 80],
    /// Solid name (ASCII form); binary files get the header tag.
    pub name: String,
    pub triangles: Vec<StlTriangle>,
}

impl StlDocument {
    /// Builds a document from an assembly: shells' triangles concatenated
    /// in assembly order, normals recomputed from winding.
    pub fn from_assembly(assembly: &Assembly) -> Result<Self> {
        let count: usize = assembly.triangle_count();
        if count > u32::MAX as usize {
            return Err(Error::StlTooLarge(count));
        }
        let mut header = [0u8; 80];
        header[..HEADER_TAG.len()].copy_from_slice(HEADER_TAG);
        let mut triangles = Vec::with_capacity(count);
        for shell in assembly.shells() {
            let mesh = &shell.mesh;
            for i in 0..mesh.triangle_count() {
                let [a, b, c] = mesh.triangle_points(i);
                let n = facet_normal(a, b, c);
                triangles.push(StlTriangle {
                    normal: [n[0] as f32, n[1] as f32, n[2] as f32],
                    vertices: [a, b, c].map(|v| [v[0] as f32, v[1] as f32, v[2] as f32]),
                    attribute: 0,
                });
            }
        }
        Ok(StlDocument {
            header,
            name: sanitize_name(assembly.name()),
            triangles,
        })
    }

    /// Serializes the stored records verbatim, so a document parsed from
    /// binary bytes re-serializes bit-identically.
    pub fn to_binary_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(84 + 50 * self.triangles.len());
        self.write_binary_to(&mut out)?;
        Ok(out)
    }

    pub fn write_binary_to<W: Write>(&self, mut w: W) -> Result<()> {
        let count = u32::try_from(self.triangles.len())
            .map_err(|_| Error::StlTooLarge(self.triangles.len()))?;
        let io_err = |e| Error::io("<stl stream>", e);
        w.write_all(&self.header).map_err(io_err)?;
        w.write_all(&count.to_le_bytes()).map_err(io_err)?;
        for t in &self.triangles {
            for v in std::iter::once(&t.normal).chain(t.vertices.iter()) {
                for c in v {
                    w.write_all(&c.to_le_bytes()).map_err(io_err)?;
                }
            }
            w.write_all(&t.attribute.to_le_bytes()).map_err(io_err)?;
        }
        Ok(())
    }

    pub fn to_ascii_string(&self) -> String {
        let mut out = String::new();
        self.write_ascii_to_string(&mut out);
        out
    }

    fn write_ascii_to_string(&self, out: &mut String) {
        use std::fmt::Write as _;
        let f = |v: f32| format!("{:.8e}", v);
        writeln!(out, "solid {}", self.name).expect("string write");
        for t in &self.triangles {
            writeln!(
                out,
                "  facet normal {} {} {}",
                f(t.normal[0]),
                f(t.normal[1]),
                f(t.normal[2])
            )
            .expect("string write");
            out.push_str("    outer loop\n");
            for v in &t.vertices {
                writeln!(out, "      vertex {} {} {}", f(v[0]), f(v[1]), f(v[2]))
                    .expect("string write");
            }
            out.push_str("    endloop\n");
            out.push_str("  endfacet\n");
        }
        writeln!(out, "endsolid {}", self.name).expect("string write");
    }

    /// Rebuilds an indexed mesh from the facet soup, merging vertices
    /// with identical coordinates.
    pub fn to_mesh(&self) -> Result<TriangleMesh> {
        let mut buf = crate::mesh::MeshBuffer::new();
        for t in &self.triangles {
            let [a, b, c] = t.vertices.map(|v| [v[0] as f64, v[1] as f64, v[2] as f64]);
            buf.push(a, b, c);
        }
        buf.finish("stl document has no triangles")
    }
}

/// Serializes an assembly as binary STL.
pub fn write_binary(assembly: &Assembly) -> Result<Vec<u8>> {
    StlDocument::from_assembly(assembly)?.to_binary_bytes()
}

/// Serializes an assembly as ASCII STL with nine significant digits.
pub fn write_ascii(assembly: &Assembly) -> Result<String> {
    Ok(StlDocument::from_assembly(assembly)?.to_ascii_string())
}

/// Parses an STL byte stream, auto-detecting the variant: a stream whose
/// size satisfies the binary law is binary; otherwise a leading `solid`
/// marks ASCII.
pub fn read(bytes: &[u8]) -> Result<StlDocument> {
    let looks_ascii = bytes.starts_with(b"solid");
    if looks_ascii {
        // An ASCII keyword start can still be a binary file whose header
        // happens to begin with "solid"; the size law disambiguates.
        if binary_size_matches(bytes) {
            return read_binary(bytes);
        }
        return read_ascii(bytes);
    }
    read_binary(bytes)
}

fn binary_size_matches(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
    bytes.len() == 84 + 50 * count
}

fn read_binary(bytes: &[u8]) -> Result<StlDocument> {
    if bytes.len() < 84 {
        return Err(Error::StlParse {
            unit: "byte",
            offset: bytes.len(),
            msg: format!("binary STL needs at least 84 bytes, have {}", bytes.len()),
        });
    }
    let mut header = [0u8; 80];
    header.copy_from_slice(&bytes[..80]);
    let count = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
    let expected = 84 + 50 * count;
    if bytes.len() != expected {
        return Err(Error::StlParse {
            unit: "byte",
            offset: 80,
            msg: format!(
                "size mismatch: count {count} implies {expected} bytes, file has {}",
                bytes.len()
            ),
        });
    }
    let mut triangles = Vec::with_capacity(count);
    let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    for i in 0..count {
        let base = 84 + 50 * i;
        let mut vals = [0f32; 12];
        for (k, v) in vals.iter_mut().enumerate() {
            *v = f32_at(base + 4 * k);
        }
        triangles.push(StlTriangle {
            normal: [vals[0], vals[1], vals[2]],
            vertices: [
                [vals[3], vals[4], vals[5]],
                [vals[6], vals[7], vals[8]],
                [vals[9], vals[10], vals[11]],
            ],
            attribute: u16::from_le_bytes(bytes[base + 48..base + 50].try_into().expect("2 bytes")),
        });
    }
    let name = String::from_utf8_lossy(&header)
        .trim_end_matches('\0')
        .trim()
        .to_string();
    Ok(StlDocument {
        header,
        name,
        triangles,
    })
}

fn read_ascii(bytes: &[u8]) -> Result<StlDocument> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::StlParse {
        unit: "byte",
        offset: e.valid_up_to(),
        msg: "ascii STL is not valid UTF-8".into(),
    })?;
    let mut tokens = Tokens::new(text);
    tokens.expect("solid")?;
    let name = tokens.rest_of_line();
    let mut triangles = Vec::new();
    loop {
        match tokens.next_token()? {
            "facet" => {
                tokens.expect("normal")?;
                let normal = [tokens.number()?, tokens.number()?, tokens.number()?];
                tokens.expect("outer")?;
                tokens.expect("loop")?;
                let mut vertices = [[0f32; 3]; 3];
                for v in &mut vertices {
                    tokens.expect("vertex")?;
                    *v = [tokens.number()?, tokens.number()?, tokens.number()?];
                }
                tokens.expect("endloop")?;
                tokens.expect("endfacet")?;
                triangles.push(StlTriangle {
                    normal,
                    vertices,
                    attribute: 0,
                });
            }
            "endsolid" => break,
            other => {
                return Err(Error::StlParse {
                    unit: "line",
                    offset: tokens.line,
                    msg: format!("expected 'facet' or 'endsolid', found {other:?}"),
                })
            }
        }
    }
    let mut header = [0u8; 80];
    let tag = format!("solid {name}");
    let n = tag.len().min(80);
    header[..n].copy_from_slice(&tag.as_bytes()[..n]);
    Ok(StlDocument {
        header,
        name,
        triangles,
    })
}

struct Tokens<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens { rest: text, line: 1 }
    }

    fn skip_ws(&mut self) {
        loop {
            let mut chars = self.rest.char_indices();
            match chars.next() {
                Some((_, c)) if c.is_whitespace() => {
                    if c == '\n' {
                        self.line += 1;
                    }
                    self.rest = &self.rest[c.len_utf8()..];
                }
                _ => break,
            }
        }
    }

    fn next_token(&mut self) -> Result<&'a str> {
        self.skip_ws();
        if self.rest.is_empty() {
            return Err(Error::StlParse {
                unit: "line",
                offset: self.line,
                msg: "unexpected end of file".into(),
            });
        }
        let end = self
            .rest
            .find(char::is_whitespace)
            .unwrap_or(self.rest.len());
        let tok = &self.rest[..end];
        self.rest = &self.rest[end..];
        Ok(tok)
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        let line = self.line;
        let tok = self.next_token()?;
        if tok == keyword {
            Ok(())
        } else {
            Err(Error::StlParse {
                unit: "line",
                offset: line,
                msg: format!("expected {keyword:?}, found {tok:?}"),
            })
        }
    }

    fn number(&mut self) -> Result<f32> {
        let line = self.line;
        let tok = self.next_token()?;
        tok.parse::<f64>().map(|v| v as f32).map_err(|_| {
            Error::StlParse {
                unit: "line",
                offset: line,
                msg: format!("malformed number {tok:?}"),
            }
        })
    }

    /// Consumes the remainder of the current line (the solid name).
    fn rest_of_line(&mut self) -> String {
        let end = self.rest.find('\n').unwrap_or(self.rest.len());
        let name = self.rest[..end].trim().to_string();
        self.rest = &self.rest[end..];
        name
    }
}

fn facet_normal(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [f64; 3] {
    let n = cross(sub(b, a), sub(c, a));
    let len = norm(n);
    if len <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    [n[0] / len, n[1] / len, n[2] / len]
}

fn sanitize_name(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    if cleaned.is_empty() {
        "solid".to_string()
    } else {
        cleaned
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{assemble, unit_cube};

    fn cube_assembly() -> Assembly {
        assemble("cube", vec![("cube".into(), unit_cube())]).unwrap()
    }

    #[test]
    fn cube_binary_size_obeys_the_law() {
        let bytes = write_binary(&cube_assembly()).unwrap();
        assert_eq!(bytes.len(), 84 + 50 * 12);
        assert_eq!(bytes.len(), 684);
    }

    #[test]
    fn empty_assembly_is_just_a_header() {
        let empty = assemble("empty", vec![]).unwrap();
        let bytes = write_binary(&empty).unwrap();
        assert_eq!(bytes.len(), 84);
        let doc = read(&bytes).unwrap();
        assert!(doc.triangles.is_empty());
    }

    #[test]
    fn binary_round_trip_is_bit_identical() {
        let bytes = write_binary(&cube_assembly()).unwrap();
        let doc = read(&bytes).unwrap();
        let again = doc.to_binary_bytes().unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn writes_are_deterministic() {
        let a = write_binary(&cube_assembly()).unwrap();
        let b = write_binary(&cube_assembly()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normals_agree_with_winding() {
        let doc = StlDocument::from_assembly(&cube_assembly()).unwrap();
        for t in &doc.triangles {
            let [a, b, c] = t.vertices.map(|v| [v[0] as f64, v[1] as f64, v[2] as f64]);
            let w = cross(sub(b, a), sub(c, a));
            let n = [t.normal[0] as f64, t.normal[1] as f64, t.normal[2] as f64];
            assert!(crate::mesh::dot(n, w) >= 0.0);
            let len = norm(n);
            assert!((len - 1.0).abs() < 1e-5, "normal length {len}");
        }
    }

    #[test]
    fn ascii_facet_is_seven_lines() {
        let tri = TriangleMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        // hand-build a document; a single open triangle is fine for serialization
        let doc = StlDocument {
            header: [0u8; 80],
            name: "tri".into(),
            triangles: vec![StlTriangle {
                normal: [0.0, 0.0, 1.0],
                vertices: [[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
                attribute: 0,
            }],
        };
        let text = doc.to_ascii_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines.len() - 2, 7);
        assert!(lines[0].starts_with("solid"));
        assert!(lines[8].starts_with("endsolid"));
        drop(tri);
    }

    #[test]
    fn ascii_empty_assembly() {
        let empty = assemble("empty", vec![]).unwrap();
        let text = write_ascii(&empty).unwrap();
        assert_eq!(text, "solid empty\nendsolid empty\n");
    }

    #[test]
    fn ascii_round_trip_preserves_values() {
        let asm = cube_assembly();
        let text = write_ascii(&asm).unwrap();
        let doc = read(text.as_bytes()).unwrap();
        let direct = StlDocument::from_assembly(&asm).unwrap();
        assert_eq!(doc.triangles.len(), direct.triangles.len());
        for (a, b) in doc.triangles.iter().zip(&direct.triangles) {
            assert_eq!(a.vertices, b.vertices);
            assert_eq!(a.normal, b.normal);
        }
    }

    #[test]
    fn truncated_binary_is_rejected_with_offset() {
        let mut bytes = write_binary(&cube_assembly()).unwrap();
        bytes.truncate(bytes.len() - 7);
        match read(&bytes) {
            Err(Error::StlParse { unit: "byte", .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_ascii_is_rejected_with_line() {
        let text = "solid t\n  facet normal 0 0 oops\n";
        match read(text.as_bytes()) {
            Err(Error::StlParse { unit: "line", offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn document_mesh_round_trip_validates() {
        let bytes = write_binary(&cube_assembly()).unwrap();
        let mesh = read(&bytes).unwrap().to_mesh().unwrap();
        let report = crate::metrics::validate(&mesh);
        assert!(report.is_ok(), "{}", report.summary());
        assert!((report.signed_volume - 1.0).abs() < 1e-6);
    }
}
