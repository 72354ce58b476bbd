//! File formats: VBF1 field checkpoints and diagnostics CSV. Every file is
//! written to a temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fieldcalc::{ScalarField, VectorField};

const MAGIC: &[u8; 4] = b"VBF1";

/// Write `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(Error::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

/// Raw checkpoint contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub dims: Vec<u32>,
    pub components: u32,
    /// Coordinate 2 fastest, component innermost.
    pub data: Vec<f64>,
}

impl Checkpoint {
    pub fn from_scalar(f: &ScalarField) -> Self {
        let g = f.grid();
        Self { dims: vec![g.n1 as u32, g.n2 as u32], components: 1, data: f.values().to_vec() }
    }

    pub fn from_vector(u: &VectorField) -> Self {
        let g = u.grid();
        Self {
            dims: vec![g.n1 as u32, g.n2 as u32],
            components: 2,
            data: u.values().iter().flat_map(|v| [v[0], v[1]]).collect(),
        }
    }

    fn expected_len(&self) -> usize {
        self.dims.iter().map(|d| *d as usize).product::<usize>() * self.components as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.dims.len() + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.extend_from_slice(&self.components.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes
                .get(pos..pos + n)
                .ok_or_else(|| Error::Format("truncated checkpoint".into()))?;
            pos += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(Error::Format("bad checkpoint magic".into()));
        }
        let u32_at = |s: &[u8]| u32::from_le_bytes([s[0], s[1], s[2], s[3]]);
        let rank = u32_at(take(4)?) as usize;
        if rank > 8 {
            return Err(Error::Format(format!("implausible rank {rank}")));
        }
        let dims = (0..rank).map(|_| take(4).map(u32_at)).collect::<Result<Vec<_>>>()?;
        let components = u32_at(take(4)?);
        let mut ck = Self { dims, components, data: Vec::new() };
        let n = ck.expected_len();
        let payload = take(8 * n)?;
        ck.data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        if pos != bytes.len() {
            return Err(Error::Format("trailing bytes after checkpoint payload".into()));
        }
        Ok(ck)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    fn check_grid(&self, n1: usize, n2: usize, comps: u32) -> Result<()> {
        if self.dims != [n1 as u32, n2 as u32] || self.components != comps {
            return Err(Error::Mismatch(format!(
                "checkpoint {:?}x{} does not match grid {n1}x{n2}x{comps}",
                self.dims, self.components
            )));
        }
        Ok(())
    }

    pub fn into_vector(self, grid: std::sync::Arc<crate::geometry::Grid>) -> Result<VectorField> {
        self.check_grid(grid.n1, grid.n2, 2)?;
        VectorField::new(grid, self.data.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
    }

    pub fn into_scalar(self, grid: std::sync::Arc<crate::geometry::Grid>) -> Result<ScalarField> {
        self.check_grid(grid.n1, grid.n2, 1)?;
        ScalarField::new(grid, self.data)
    }
}

/// Float with 17 significant digits; round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// A table of named numeric columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DiagnosticsRecord {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("CSV line {}: {e}", n + 2)))?;
            if row.len() != columns.len() {
                return Err(Error::Format(format!("CSV line {} has {} fields", n + 2, row.len())));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}
