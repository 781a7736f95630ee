//! Binary field files: one JSON header line, then `f64` little-endian values.
//!
//! Values are node-major in lexicographic `(i1, i2, i3)` order with channels
//! interleaved per node. Phase fields repeat that block once per slab cell.
//! Symmetric matrix tables use six channels in the order
//! `[a11, a22, a33, a12, a13, a23]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridField, VelocityGrid};
use crate::slab::{PhaseField, SlabDomain};
use crate::sym::SymMatrix3;

pub const FORMAT: &str = "kinetex-field";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub format: String,
    pub version: u32,
    #[serde(rename = "V")]
    pub half_width: f64,
    pub n: usize,
    pub channels: usize,
    /// Slab cells and length for phase fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl FieldHeader {
    pub fn new(grid: &VelocityGrid, channels: usize) -> Self {
        Self {
            format: FORMAT.to_string(),
            version: FORMAT_VERSION,
            half_width: grid.half_width(),
            n: grid.points(),
            channels,
            cells: None,
            length: None,
            t: None,
        }
    }

    pub fn grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.half_width, self.n)
    }

    fn value_count(&self) -> usize {
        self.n.pow(3) * self.channels * self.cells.unwrap_or(1)
    }
}

pub fn encode(header: &FieldHeader, values: &[f64]) -> Result<Vec<u8>> {
    if values.len() != header.value_count() {
        return Err(Error::Structure(format!(
            "header describes {} values, got {}",
            header.value_count(),
            values.len()
        )));
    }
    let json = serde_json::to_string(header).map_err(|e| Error::Data(e.to_string()))?;
    let mut out = Vec::with_capacity(json.len() + 1 + 8 * values.len());
    out.extend_from_slice(json.as_bytes());
    out.push(b'\n');
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<(FieldHeader, Vec<f64>)> {
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Parse("field file has no header line".into()))?;
    let header: FieldHeader =
        serde_json::from_slice(&bytes[..split]).map_err(|e| Error::Parse(format!("field header: {e}")))?;
    if header.format != FORMAT || header.version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported field format {} v{}",
            header.format, header.version
        )));
    }
    let body = &bytes[split + 1..];
    if body.len() != 8 * header.value_count() {
        return Err(Error::Parse(format!(
            "field body has {} bytes, header needs {}",
            body.len(),
            8 * header.value_count()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, values))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<(FieldHeader, Vec<f64>)> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn grid_field_bytes(f: &GridField) -> Result<Vec<u8>> {
    encode(&FieldHeader::new(&f.grid, 1), &f.values)
}

pub fn grid_field_from_bytes(bytes: &[u8]) -> Result<GridField> {
    let (h, values) = decode(bytes)?;
    if h.channels != 1 || h.cells.is_some() {
        return Err(Error::Structure("expected a single-channel velocity field".into()));
    }
    GridField::new(h.grid()?, values)
}

/// `V`, `n` header comment then one value per line in node order.
pub fn grid_field_csv(f: &GridField) -> String {
    let mut out = format!("# V={} n={}\n", f.grid.half_width(), f.grid.points());
    for v in &f.values {
        out.push_str(&format!("{v:e}\n"));
    }
    out
}

pub fn sym_table_bytes(grid: &VelocityGrid, table: &[SymMatrix3]) -> Result<Vec<u8>> {
    let values: Vec<f64> = table.iter().flat_map(|s| s.entries).collect();
    encode(&FieldHeader::new(grid, 6), &values)
}

pub fn sym_table_from_bytes(bytes: &[u8]) -> Result<(VelocityGrid, Vec<SymMatrix3>)> {
    let (h, values) = decode(bytes)?;
    if h.channels != 6 || h.cells.is_some() {
        return Err(Error::Structure("expected a six-channel matrix table".into()));
    }
    let table = values
        .chunks_exact(6)
        .map(|c| SymMatrix3 {
            entries: c.try_into().expect("chunk of 6"),
        })
        .collect();
    Ok((h.grid()?, table))
}

pub fn phase_field_bytes(f: &PhaseField) -> Result<Vec<u8>> {
    let mut h = FieldHeader::new(&f.grid, 1);
    h.cells = Some(f.slab.cells());
    h.length = Some(f.slab.length());
    h.t = Some(f.t);
    encode(&h, &f.values)
}

pub fn phase_field_from_bytes(bytes: &[u8]) -> Result<PhaseField> {
    let (h, values) = decode(bytes)?;
    let (Some(cells), Some(length)) = (h.cells, h.length) else {
        return Err(Error::Structure("field file has no slab description".into()));
    };
    if h.channels != 1 {
        return Err(Error::Structure("phase fields have one channel".into()));
    }
    PhaseField::new(SlabDomain::new(length, cells)?, h.grid()?, values, h.t.unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_field_roundtrip_is_bitwise() {
        let grid = VelocityGrid::new(3.0, 5).unwrap();
        let f = GridField::from_fn(grid, |v| v[0] - 0.1 * v[1] * v[2] + 1e-300);
        let bytes = grid_field_bytes(&f).unwrap();
        assert!(bytes.starts_with(b"{\"format\":\"kinetex-field\",\"version\":1,\"V\":3.0,\"n\":5,\"channels\":1}\n"));
        assert_eq!(grid_field_from_bytes(&bytes).unwrap(), f);
        assert_eq!(grid_field_csv(&f).lines().count(), 126);
    }

    #[test]
    fn sym_table_and_phase_field_roundtrip() {
        let grid = VelocityGrid::new(2.0, 3).unwrap();
        let table: Vec<SymMatrix3> = (0..grid.len())
            .map(|i| SymMatrix3::new(i as f64, 1.0, 2.0, -0.5, 0.25, 3.0))
            .collect();
        let (g, back) = sym_table_from_bytes(&sym_table_bytes(&grid, &table).unwrap()).unwrap();
        assert_eq!((g, back), (grid, table));

        let slab = SlabDomain::new(1.5, 3).unwrap();
        let mut f = PhaseField::from_fn(slab, grid, |x, v| x * v[2]);
        f.t = 0.75;
        assert_eq!(phase_field_from_bytes(&phase_field_bytes(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn rejects_truncated_and_mismatched_files() {
        let grid = VelocityGrid::new(2.0, 3).unwrap();
        let mut bytes = grid_field_bytes(&GridField::zeros(grid)).unwrap();
        bytes.pop();
        assert!(matches!(decode(&bytes), Err(Error::Parse(_))));
        assert!(matches!(decode(b"no header"), Err(Error::Parse(_))));
        let table = sym_table_bytes(&grid, &vec![SymMatrix3::identity(); grid.len()]).unwrap();
        assert!(matches!(grid_field_from_bytes(&table), Err(Error::Structure(_))));
        let h = FieldHeader::new(&grid, 1);
        assert!(matches!(encode(&h, &[0.0; 3]), Err(Error::Structure(_))));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_file(Path::new("/nonexistent/kinetex/field.bin")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/kinetex/field.bin"));
    }
}
