//! Named collections of fields sharing one grid: raw snapshots and the
//! emulated-LES bundles derived from them.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField3D};
use crate::filter::LesParams;
use crate::thermo::ProgressDiagnostics;

pub const RHO: &str = "rho";
pub const Y_H2: &str = "Y_H2";
pub const XI: &str = "xi";
pub const OMEGA_H2: &str = "omega_H2";

pub const RHO_BAR: &str = "rho_bar";
pub const Y_H2_TILDE: &str = "Y_H2_tilde";
pub const XI_TILDE: &str = "xi_tilde";
pub const OMEGA_BAR: &str = "omega_bar";
pub const C_TILDE: &str = "c_tilde";
pub const PHI_TILDE: &str = "phi_tilde";

pub type FieldMap = BTreeMap<String, ScalarField3D>;

/// One fully resolved solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBundle {
    pub case_id: String,
    pub time_index: u32,
    pub phi_g: f64,
    pub grid: GridSpec,
    pub fields: FieldMap,
}

impl SnapshotBundle {
    pub fn new(
        case_id: impl Into<String>,
        time_index: u32,
        phi_g: f64,
        fields: FieldMap,
    ) -> Result<Self> {
        let grid = *fields
            .get(RHO)
            .ok_or_else(|| Error::Format(format!("snapshot is missing required field `{RHO}`")))?
            .grid();
        let bundle = Self {
            case_id: case_id.into(),
            time_index,
            phi_g,
            grid,
            fields,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn field(&self, name: &str) -> Result<&ScalarField3D> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::Format(format!("snapshot is missing required field `{name}`")))
    }

    pub fn validate(&self) -> Result<()> {
        for name in [RHO, Y_H2, XI, OMEGA_H2] {
            self.field(name)?;
        }
        for (name, f) in &self.fields {
            if *f.grid() != self.grid {
                return Err(Error::Shape(format!(
                    "field `{name}` has grid {} but the snapshot grid is {}",
                    f.grid().shape_string(),
                    self.grid.shape_string()
                )));
            }
            let data = f.data();
            let bad = match name.as_str() {
                RHO => data.iter().position(|&v| v <= 0.0).map(|i| (i, "density must be positive")),
                OMEGA_H2 => data
                    .iter()
                    .position(|&v| v > 0.0)
                    .map(|i| (i, "H2 source term must be non-positive")),
                n if n == XI || n.starts_with("Y_") => data
                    .iter()
                    .position(|v| !(0.0..=1.0).contains(v))
                    .map(|i| (i, "value outside [0, 1]")),
                _ => None,
            };
            if let Some((idx, reason)) = bad {
                return Err(Error::validation(name, idx, reason));
            }
        }
        Ok(())
    }
}

/// Unfiltered and filtered laminar flame thicknesses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessPair {
    pub delta0: f64,
    pub delta1: f64,
}

impl ThicknessPair {
    pub fn ratio(&self) -> f64 {
        self.delta0 / self.delta1
    }
}

/// Emulated LES solution: filtered, Favre-averaged and downsampled fields.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedBundle {
    pub case_id: String,
    pub time_index: u32,
    pub phi_g: f64,
    /// Spacing of the source grid the filter was applied on.
    pub fine_dx: f64,
    pub params: LesParams,
    pub thickness: Option<ThicknessPair>,
    pub grid: GridSpec,
    pub fields: FieldMap,
    pub progress_diagnostics: ProgressDiagnostics,
}

impl DerivedBundle {
    pub fn field(&self, name: &str) -> Result<&ScalarField3D> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::Format(format!("derived bundle is missing field `{name}`")))
    }

    pub fn c_tilde(&self) -> Result<&ScalarField3D> {
        self.field(C_TILDE)
    }

    pub fn phi_tilde(&self) -> Result<&ScalarField3D> {
        self.field(PHI_TILDE)
    }

    pub fn omega_bar(&self) -> Result<&ScalarField3D> {
        self.field(OMEGA_BAR)
    }

    /// Resolution index of the filtered flame on the coarse grid, if the
    /// flame thicknesses are known.
    pub fn resolution_index(&self) -> Option<f64> {
        self.thickness
            .map(|t| t.delta1 / self.params.coarse_spacing(self.fine_dx) + 1.0)
    }

    pub fn with_thickness(mut self, thickness: ThicknessPair) -> Self {
        self.thickness = Some(thickness);
        self
    }
}
