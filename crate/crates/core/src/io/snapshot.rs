//! `H2SNAP1` field files.
//!
//! ```text
//! magic        8 bytes   "H2SNAP1\0"
//! nx, ny, nz   3 x u32
//! dx           f64       [m]
//! boundary     3 x u8    0 = periodic, 1 = clamp
//! precision    u8        8 = f64 payload, 4 = f32 payload
//! time_index   u32       [ms]
//! phi_g        f64
//! case_id      u32 length + UTF-8 bytes
//! attr_count   u32, then per attribute: u32 length + UTF-8 name, f64 value
//! field_count  u32, then per field: u32 length + UTF-8 name,
//!              nx*ny*nz values (x fastest)
//! ```
//!
//! Fields and attributes are written in lexicographic name order, so the
//! canonical encoding of a bundle is unique.

use std::collections::BTreeMap;
use std::path::Path;

use super::{put_string, read_bytes, write_atomic, ByteReader};
use crate::bundle::{DerivedBundle, FieldMap, SnapshotBundle, ThicknessPair};
use crate::error::{Error, Result};
use crate::field::{Boundary, GridSpec, ScalarField3D};
use crate::filter::LesParams;
use crate::thermo::ProgressDiagnostics;

pub const MAGIC: &[u8; 8] = b"H2SNAP1\0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F64,
    F32,
}

impl Precision {
    fn code(self) -> u8 {
        match self {
            Precision::F64 => 8,
            Precision::F32 => 4,
        }
    }

    fn width(self) -> usize {
        self.code() as usize
    }
}

/// Generic contents of an `H2SNAP1` file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub case_id: String,
    pub time_index: u32,
    pub phi_g: f64,
    pub grid: GridSpec,
    pub precision: Precision,
    pub attrs: BTreeMap<String, f64>,
    pub fields: FieldMap,
}

impl FieldFile {
    pub fn encode(&self) -> Result<Vec<u8>> {
        let n = self.grid.len();
        let mut out = Vec::with_capacity(64 + self.fields.len() * (n * self.precision.width() + 16));
        out.extend_from_slice(MAGIC);
        for d in self.grid.dims() {
            let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")))?;
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.extend_from_slice(&self.grid.dx().to_le_bytes());
        for b in self.grid.boundary() {
            out.push(b.code());
        }
        out.push(self.precision.code());
        out.extend_from_slice(&self.time_index.to_le_bytes());
        out.extend_from_slice(&self.phi_g.to_le_bytes());
        put_string(&mut out, &self.case_id);
        out.extend_from_slice(&(self.attrs.len() as u32).to_le_bytes());
        for (name, value) in &self.attrs {
            put_string(&mut out, name);
            out.extend_from_slice(&value.to_le_bytes());
        }
        out.extend_from_slice(&(self.fields.len() as u32).to_le_bytes());
        for (name, field) in &self.fields {
            if *field.grid() != self.grid {
                return Err(Error::Shape(format!(
                    "field `{name}` has grid {} but the file grid is {}",
                    field.grid().shape_string(),
                    self.grid.shape_string()
                )));
            }
            put_string(&mut out, name);
            match self.precision {
                Precision::F64 => {
                    for v in field.data() {
                        out.extend_from_slice(&v.to_le_bytes());
                    }
                }
                Precision::F32 => {
                    for v in field.data() {
                        out.extend_from_slice(&(*v as f32).to_le_bytes());
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let magic = r.take(MAGIC.len()).map_err(|_| Error::Format("file too short for H2SNAP1 magic".into()))?;
        if magic != MAGIC {
            return Err(Error::Format("bad magic: not an H2SNAP1 file".into()));
        }
        let dims = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
        let dx = r.f64()?;
        let mut boundary = [Boundary::Periodic; 3];
        for b in &mut boundary {
            let code = r.u8()?;
            *b = Boundary::from_code(code).ok_or_else(|| Error::Format(format!("unknown boundary code {code}")))?;
        }
        let precision = match r.u8()? {
            8 => Precision::F64,
            4 => Precision::F32,
            other => return Err(Error::Format(format!("unknown precision code {other}"))),
        };
        let grid = GridSpec::new(dims, dx, boundary)?;
        let time_index = r.u32()?;
        let phi_g = r.f64()?;
        let case_id = r.string()?;
        let n_attrs = r.u32()?;
        let mut attrs = BTreeMap::new();
        for _ in 0..n_attrs {
            let name = r.string()?;
            attrs.insert(name, r.f64()?);
        }
        let n_fields = r.u32()?;
        let mut fields = FieldMap::new();
        let n = grid.len();
        for _ in 0..n_fields {
            let name = r.string()?;
            let payload_len = n
                .checked_mul(precision.width())
                .ok_or_else(|| Error::Format("grid too large".into()))?;
            if r.remaining() < payload_len {
                return Err(Error::Truncated {
                    expected: r.position() + payload_len,
                    found: bytes.len(),
                });
            }
            let payload = r.take(payload_len)?;
            let data: Vec<f64> = match precision {
                Precision::F64 => payload
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
                Precision::F32 => payload
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                    .collect(),
            };
            let field = ScalarField3D::new(grid, data).map_err(|e| match e {
                Error::Validation { index, reason, .. } => Error::Validation {
                    field: name.clone(),
                    index,
                    reason,
                },
                e => e,
            })?;
            if fields.insert(name.clone(), field).is_some() {
                return Err(Error::Format(format!("duplicate field `{name}`")));
            }
        }
        if r.remaining() != 0 {
            return Err(Error::Format(format!("{} trailing bytes after last field", r.remaining())));
        }
        Ok(Self {
            case_id,
            time_index,
            phi_g,
            grid,
            precision,
            attrs,
            fields,
        })
    }

    pub fn single(name: &str, field: ScalarField3D, precision: Precision) -> Self {
        let grid = *field.grid();
        let mut fields = FieldMap::new();
        fields.insert(name.to_string(), field);
        Self {
            case_id: String::new(),
            time_index: 0,
            phi_g: 0.0,
            grid,
            precision,
            attrs: BTreeMap::new(),
            fields,
        }
    }

    pub fn field(&self, name: &str) -> Result<&ScalarField3D> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::Format(format!("file has no field `{name}`")))
    }
}

pub fn write_field_file(file: &FieldFile, path: &Path) -> Result<()> {
    write_atomic(path, &file.encode()?)
}

pub fn read_field_file(path: &Path) -> Result<FieldFile> {
    FieldFile::decode(&read_bytes(path)?)
}

impl From<&SnapshotBundle> for FieldFile {
    fn from(b: &SnapshotBundle) -> Self {
        Self {
            case_id: b.case_id.clone(),
            time_index: b.time_index,
            phi_g: b.phi_g,
            grid: b.grid,
            precision: Precision::F64,
            attrs: BTreeMap::new(),
            fields: b.fields.clone(),
        }
    }
}

impl TryFrom<FieldFile> for SnapshotBundle {
    type Error = Error;

    fn try_from(f: FieldFile) -> Result<Self> {
        let bundle = SnapshotBundle {
            case_id: f.case_id,
            time_index: f.time_index,
            phi_g: f.phi_g,
            grid: f.grid,
            fields: f.fields,
        };
        bundle.validate()?;
        Ok(bundle)
    }
}

pub fn write_snapshot(bundle: &SnapshotBundle, path: &Path) -> Result<()> {
    bundle.validate()?;
    write_field_file(&FieldFile::from(bundle), path)
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotBundle> {
    SnapshotBundle::try_from(read_field_file(path)?)
}

const ATTR_SIGMA: &str = "les.sigma";
const ATTR_DSF: &str = "les.dsf";
const ATTR_FINE_DX: &str = "les.fine_dx";
const ATTR_DELTA0: &str = "flame.delta0";
const ATTR_DELTA1: &str = "flame.delta1";
const ATTR_BELOW: &str = "diag.c_below_zero";
const ATTR_ABOVE: &str = "diag.c_above_one";
const ATTR_CLIPPED: &str = "diag.c_clipped";
const ATTR_EXCESS: &str = "diag.c_excess_mass";

impl From<&DerivedBundle> for FieldFile {
    fn from(b: &DerivedBundle) -> Self {
        let mut attrs = BTreeMap::new();
        attrs.insert(ATTR_SIGMA.to_string(), b.params.sigma);
        attrs.insert(ATTR_DSF.to_string(), b.params.dsf as f64);
        attrs.insert(ATTR_FINE_DX.to_string(), b.fine_dx);
        if let Some(t) = b.thickness {
            attrs.insert(ATTR_DELTA0.to_string(), t.delta0);
            attrs.insert(ATTR_DELTA1.to_string(), t.delta1);
        }
        let d = &b.progress_diagnostics;
        attrs.insert(ATTR_BELOW.to_string(), d.below_zero as f64);
        attrs.insert(ATTR_ABOVE.to_string(), d.above_one as f64);
        attrs.insert(ATTR_CLIPPED.to_string(), d.clipped as f64);
        attrs.insert(ATTR_EXCESS.to_string(), d.excess_mass);
        Self {
            case_id: b.case_id.clone(),
            time_index: b.time_index,
            phi_g: b.phi_g,
            grid: b.grid,
            precision: Precision::F64,
            attrs,
            fields: b.fields.clone(),
        }
    }
}

impl TryFrom<FieldFile> for DerivedBundle {
    type Error = Error;

    fn try_from(f: FieldFile) -> Result<Self> {
        let attr = |name: &str| {
            f.attrs
                .get(name)
                .copied()
                .ok_or_else(|| Error::Format(format!("derived file lacks attribute `{name}`")))
        };
        let params = LesParams::new(attr(ATTR_SIGMA)?, attr(ATTR_DSF)? as usize)?;
        let fine_dx = attr(ATTR_FINE_DX)?;
        let thickness = match (f.attrs.get(ATTR_DELTA0), f.attrs.get(ATTR_DELTA1)) {
            (Some(&delta0), Some(&delta1)) => Some(ThicknessPair { delta0, delta1 }),
            _ => None,
        };
        let progress_diagnostics = ProgressDiagnostics {
            below_zero: f.attrs.get(ATTR_BELOW).copied().unwrap_or(0.0) as usize,
            above_one: f.attrs.get(ATTR_ABOVE).copied().unwrap_or(0.0) as usize,
            clipped: f.attrs.get(ATTR_CLIPPED).copied().unwrap_or(0.0) as usize,
            excess_mass: f.attrs.get(ATTR_EXCESS).copied().unwrap_or(0.0),
        };
        let bundle = DerivedBundle {
            case_id: f.case_id,
            time_index: f.time_index,
            phi_g: f.phi_g,
            fine_dx,
            params,
            thickness,
            grid: f.grid,
            fields: f.fields,
            progress_diagnostics,
        };
        for name in [crate::bundle::C_TILDE, crate::bundle::PHI_TILDE, crate::bundle::OMEGA_BAR] {
            bundle.field(name)?;
        }
        if let Some(i) = bundle.omega_bar()?.data().iter().position(|&v| v < 0.0) {
            return Err(Error::validation(crate::bundle::OMEGA_BAR, i, "burning rate must be non-negative"));
        }
        Ok(bundle)
    }
}

pub fn write_derived(bundle: &DerivedBundle, path: &Path) -> Result<()> {
    write_field_file(&FieldFile::from(bundle), path)
}

pub fn read_derived(path: &Path) -> Result<DerivedBundle> {
    DerivedBundle::try_from(read_field_file(path)?)
}
