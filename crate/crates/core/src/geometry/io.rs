//! PLY and OBJ readers, PLY writer.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeshFormat {
    Ply,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "ply" => Some(Self::Ply),
            "obj" => Some(Self::Obj),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_extension(s).ok_or_else(|| format!("unknown mesh format '{s}'"))
    }
}

/// Parses `bytes` as the declared format.
pub fn load_mesh(bytes: &[u8], format: MeshFormat, name: &str) -> Result<Mesh, GeometryError> {
    match format {
        MeshFormat::Ply => load_ply(bytes, name),
        MeshFormat::Obj => load_obj(bytes, name),
    }
}

fn parse_err(offset: usize, message: impl Into<String>) -> GeometryError {
    GeometryError::Parse {
        offset,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn is_integer(self) -> bool {
        !matches!(self, Self::F32 | Self::F64)
    }
}

#[derive(Debug, Clone)]
enum PropKind {
    Single(Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: PropKind,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    BinaryLe,
    BinaryBe,
}

/// Pulls scalar values out of a PLY body.
trait ValueSource {
    fn next(&mut self, ty: Scalar) -> Result<f64, GeometryError>;
}

struct AsciiSource<'a> {
    text: &'a [u8],
    pos: usize,
}

impl ValueSource for AsciiSource<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64, GeometryError> {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.text.len() && !self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, "unexpected end of data"));
        }
        let token = std::str::from_utf8(&self.text[start..self.pos])
            .map_err(|_| parse_err(start, "non-UTF-8 token"))?;
        let v: f64 = token
            .parse()
            .map_err(|_| parse_err(start, format!("invalid number '{token}'")))?;
        if ty.is_integer() && v.fract() != 0.0 {
            return Err(parse_err(start, format!("expected integer, found '{token}'")));
        }
        Ok(v)
    }
}

struct BinarySource<'a> {
    data: &'a [u8],
    pos: usize,
    big_endian: bool,
}

impl BinarySource<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], GeometryError> {
        let end = self.pos + N;
        if end > self.data.len() {
            return Err(parse_err(self.pos, "unexpected end of data"));
        }
        let mut buf = [0u8; N];
        buf.copy_from_slice(&self.data[self.pos..end]);
        if self.big_endian {
            buf.reverse();
        }
        self.pos = end;
        Ok(buf)
    }
}

impl ValueSource for BinarySource<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64, GeometryError> {
        Ok(match ty {
            Scalar::I8 => i8::from_le_bytes(self.take()?) as f64,
            Scalar::U8 => u8::from_le_bytes(self.take()?) as f64,
            Scalar::I16 => i16::from_le_bytes(self.take()?) as f64,
            Scalar::U16 => u16::from_le_bytes(self.take()?) as f64,
            Scalar::I32 => i32::from_le_bytes(self.take()?) as f64,
            Scalar::U32 => u32::from_le_bytes(self.take()?) as f64,
            Scalar::F32 => f32::from_le_bytes(self.take()?) as f64,
            Scalar::F64 => f64::from_le_bytes(self.take()?),
        })
    }
}

fn parse_ply_header(bytes: &[u8]) -> Result<(Encoding, Vec<Element>, usize), GeometryError> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let Some(len) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            return Err(parse_err(pos, "header is missing end_header"));
        };
        let raw = &bytes[pos..pos + len];
        let line = std::str::from_utf8(raw)
            .map_err(|_| parse_err(pos, "header is not ASCII"))?
            .trim_end_matches('\r')
            .trim();
        let line_start = pos;
        pos += len + 1;
        if line_no == 0 {
            if line != "ply" {
                return Err(parse_err(0, "missing 'ply' magic"));
            }
            line_no += 1;
            continue;
        }
        line_no += 1;
        let mut words = line.split_whitespace();
        match words.next() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                encoding = Some(match words.next() {
                    Some("ascii") => Encoding::Ascii,
                    Some("binary_little_endian") => Encoding::BinaryLe,
                    Some("binary_big_endian") => Encoding::BinaryBe,
                    other => {
                        return Err(parse_err(
                            line_start,
                            format!("unsupported format {other:?}"),
                        ))
                    }
                });
            }
            Some("element") => {
                let name = words
                    .next()
                    .ok_or_else(|| parse_err(line_start, "element without name"))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| parse_err(line_start, "element without count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(line_start, "property before element"))?;
                let parts: Vec<&str> = words.collect();
                let bad = || parse_err(line_start, format!("malformed property '{line}'"));
                let prop = match parts.as_slice() {
                    ["list", count, item, name] => Property {
                        name: name.to_string(),
                        kind: PropKind::List {
                            count: Scalar::parse(count).ok_or_else(bad)?,
                            item: Scalar::parse(item).ok_or_else(bad)?,
                        },
                    },
                    [ty, name] => Property {
                        name: name.to_string(),
                        kind: PropKind::Single(Scalar::parse(ty).ok_or_else(bad)?),
                    },
                    _ => return Err(bad()),
                };
                element.props.push(prop);
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(parse_err(
                    line_start,
                    format!("unknown header keyword '{other}'"),
                ))
            }
        }
    }
    let encoding = encoding.ok_or_else(|| parse_err(0, "header has no format line"))?;
    Ok((encoding, elements, pos))
}

fn load_ply(bytes: &[u8], name: &str) -> Result<Mesh, GeometryError> {
    let (encoding, elements, body) = parse_ply_header(bytes)?;
    let mut source: Box<dyn ValueSource> = match encoding {
        Encoding::Ascii => Box::new(AsciiSource {
            text: bytes,
            pos: body,
        }),
        Encoding::BinaryLe | Encoding::BinaryBe => Box::new(BinarySource {
            data: bytes,
            pos: body,
            big_endian: encoding == Encoding::BinaryBe,
        }),
    };

    let mut positions = Vec::new();
    let mut colors: Vec<[f64; 3]> = Vec::new();
    let mut uvs: Vec<[f64; 2]> = Vec::new();
    let mut triangles = Vec::new();
    let mut has_color = false;
    let mut has_uv = false;

    for element in &elements {
        let slot = |n: &str| element.props.iter().position(|p| p.name == n);
        match element.name.as_str() {
            "vertex" => {
                let xyz = ["x", "y", "z"].map(slot);
                if xyz.iter().any(Option::is_none) {
                    return Err(parse_err(0, "vertex element lacks x/y/z"));
                }
                let rgb = ["red", "green", "blue"].map(slot);
                has_color = rgb.iter().all(Option::is_some);
                let uv = [
                    slot("s").or(slot("u")).or(slot("texture_u")),
                    slot("t").or(slot("v")).or(slot("texture_v")),
                ];
                has_uv = uv.iter().all(Option::is_some);
                let color_scale: Vec<f64> = element
                    .props
                    .iter()
                    .map(|p| match p.kind {
                        PropKind::Single(Scalar::U8) => 1.0 / 255.0,
                        PropKind::Single(Scalar::U16) => 1.0 / 65535.0,
                        _ => 1.0,
                    })
                    .collect();
                let mut row = vec![0.0; element.props.len()];
                for _ in 0..element.count {
                    for (k, prop) in element.props.iter().enumerate() {
                        row[k] = match prop.kind {
                            PropKind::Single(ty) => source.next(ty)?,
                            PropKind::List { count, item } => {
                                let n = source.next(count)? as usize;
                                for _ in 0..n {
                                    source.next(item)?;
                                }
                                0.0
                            }
                        };
                    }
                    positions.push(xyz.map(|i| row[i.unwrap()]));
                    if has_color {
                        colors.push(rgb.map(|i| {
                            let i = i.unwrap();
                            row[i] * color_scale[i]
                        }));
                    }
                    if has_uv {
                        uvs.push([row[uv[0].unwrap()], row[uv[1].unwrap()]]);
                    }
                }
            }
            "face" => {
                let idx = slot("vertex_indices")
                    .or(slot("vertex_index"))
                    .ok_or_else(|| parse_err(0, "face element lacks vertex_indices"))?;
                for _ in 0..element.count {
                    let mut poly: Vec<u32> = Vec::new();
                    for (k, prop) in element.props.iter().enumerate() {
                        match prop.kind {
                            PropKind::List { count, item } => {
                                let n = source.next(count)? as usize;
                                for _ in 0..n {
                                    let v = source.next(item)?;
                                    if k == idx {
                                        if v < 0.0 || v > u32::MAX as f64 {
                                            return Err(parse_err(0, "negative face index"));
                                        }
                                        poly.push(v as u32);
                                    }
                                }
                            }
                            PropKind::Single(ty) => {
                                source.next(ty)?;
                            }
                        }
                    }
                    for k in 1..poly.len().saturating_sub(1) {
                        triangles.push([poly[0], poly[k], poly[k + 1]]);
                    }
                }
            }
            _ => {
                for _ in 0..element.count {
                    for prop in &element.props {
                        match prop.kind {
                            PropKind::Single(ty) => {
                                source.next(ty)?;
                            }
                            PropKind::List { count, item } => {
                                let n = source.next(count)? as usize;
                                for _ in 0..n {
                                    source.next(item)?;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    Mesh::with_attributes(
        name,
        positions,
        has_color.then_some(colors),
        has_uv.then_some(uvs),
        triangles,
    )
}

fn load_obj(bytes: &[u8], name: &str) -> Result<Mesh, GeometryError> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(e.valid_up_to(), "OBJ is not UTF-8"))?;
    let mut positions = Vec::new();
    let mut colors = Vec::new();
    let mut texcoords: Vec<[f64; 2]> = Vec::new();
    let mut vertex_uv: Vec<Option<usize>> = Vec::new();
    let mut triangles = Vec::new();
    let mut all_colored = true;
    let mut offset = 0;

    for raw in text.split_inclusive('\n') {
        let line_start = offset;
        offset += raw.len();
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut words = line.split_whitespace();
        let Some(tag) = words.next() else { continue };
        let nums = |words: std::str::SplitWhitespace<'_>| -> Result<Vec<f64>, GeometryError> {
            words
                .map(|w| {
                    w.parse::<f64>()
                        .map_err(|_| parse_err(line_start, format!("invalid number '{w}'")))
                })
                .collect()
        };
        match tag {
            "v" => {
                let v = nums(words)?;
                match v.len() {
                    3 | 4 => all_colored = false,
                    6 | 7 => colors.push([v[3], v[4], v[5]]),
                    _ => return Err(parse_err(line_start, "vertex needs 3 or 6 numbers")),
                }
                positions.push([v[0], v[1], v[2]]);
                vertex_uv.push(None);
            }
            "vt" => {
                let v = nums(words)?;
                if v.len() < 2 {
                    return Err(parse_err(line_start, "texture coordinate needs 2 numbers"));
                }
                texcoords.push([v[0], v[1]]);
            }
            "f" => {
                let mut poly = Vec::new();
                for word in words {
                    let mut parts = word.split('/');
                    let resolve = |s: &str, len: usize| -> Result<usize, GeometryError> {
                        let i: i64 = s
                            .parse()
                            .map_err(|_| parse_err(line_start, format!("invalid index '{s}'")))?;
                        let r = if i < 0 { len as i64 + i } else { i - 1 };
                        if r < 0 || r as usize >= len {
                            return Err(parse_err(line_start, format!("index {i} out of range")));
                        }
                        Ok(r as usize)
                    };
                    let v = resolve(parts.next().unwrap_or(""), positions.len())?;
                    if let Some(t) = parts.next().filter(|s| !s.is_empty()) {
                        let t = resolve(t, texcoords.len())?;
                        vertex_uv[v].get_or_insert(t);
                    }
                    poly.push(v as u32);
                }
                if poly.len() < 3 {
                    return Err(parse_err(line_start, "face needs at least 3 vertices"));
                }
                for k in 1..poly.len() - 1 {
                    triangles.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            _ => {}
        }
    }

    let uvs = (!texcoords.is_empty() && vertex_uv.iter().all(Option::is_some))
        .then(|| vertex_uv.iter().map(|t| texcoords[t.unwrap()]).collect());
    let colors = (all_colored && !positions.is_empty()).then_some(colors);
    Mesh::with_attributes(name, positions, colors, uvs, triangles)
}

/// Serializes a mesh as binary little-endian PLY with double-precision
/// positions, 8-bit colors and float texture coordinates.
pub fn write_ply(mesh: &Mesh) -> Vec<u8> {
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    let _ = writeln!(header, "comment name {}", mesh.name);
    let _ = writeln!(header, "element vertex {}", mesh.vertex_count());
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    if mesh.colors.is_some() {
        header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    if mesh.uvs.is_some() {
        header.push_str("property float s\nproperty float t\n");
    }
    let _ = writeln!(header, "element face {}", mesh.face_count());
    header.push_str("property list uchar int vertex_indices\nend_header\n");

    let mut out = header.into_bytes();
    for i in 0..mesh.vertex_count() {
        for c in mesh.positions[i] {
            out.extend_from_slice(&c.to_le_bytes());
        }
        if let Some(colors) = &mesh.colors {
            for c in colors[i] {
                out.push((c.clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        if let Some(uvs) = &mesh.uvs {
            for c in uvs[i] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
    }
    for tri in &mesh.triangles {
        out.push(3);
        for i in tri {
            out.extend_from_slice(&(*i as i32).to_le_bytes());
        }
    }
    out
}
