//! Filtered thermochemical scalars: Bilger mixture fraction, H2-based progress
//! variable, equivalence ratio and burning rate.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::ScalarField3D;

pub const W_H: f64 = 1.008;
pub const W_O: f64 = 15.999;
pub const W_N: f64 = 14.0067;

/// Below this denominator the progress variable is pinned to zero (pure air).
pub const PURE_AIR_EPS: f64 = 1e-6;
/// Reported progress variable is clamped to this window.
pub const C_CLAMP: (f64, f64) = (-0.01, 1.01);

/// Species of the 9-species hydrogen/air set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Species {
    H2,
    H,
    O2,
    OH,
    O,
    H2O,
    HO2,
    H2O2,
    N2,
}

impl Species {
    pub const ALL: [Species; 9] = [
        Species::H2,
        Species::H,
        Species::O2,
        Species::OH,
        Species::O,
        Species::H2O,
        Species::HO2,
        Species::H2O2,
        Species::N2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Species::H2 => "H2",
            Species::H => "H",
            Species::O2 => "O2",
            Species::OH => "OH",
            Species::O => "O",
            Species::H2O => "H2O",
            Species::HO2 => "HO2",
            Species::H2O2 => "H2O2",
            Species::N2 => "N2",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Species::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownSpecies(name.to_string()))
    }

    /// Atom counts (H, O, N).
    fn atoms(self) -> (u32, u32, u32) {
        match self {
            Species::H2 => (2, 0, 0),
            Species::H => (1, 0, 0),
            Species::O2 => (0, 2, 0),
            Species::OH => (1, 1, 0),
            Species::O => (0, 1, 0),
            Species::H2O => (2, 1, 0),
            Species::HO2 => (1, 2, 0),
            Species::H2O2 => (2, 2, 0),
            Species::N2 => (0, 0, 2),
        }
    }

    pub fn molar_mass(self) -> f64 {
        let (h, o, n) = self.atoms();
        h as f64 * W_H + o as f64 * W_O + n as f64 * W_N
    }

    /// Elemental mass fractions of H and O in this species.
    pub fn elemental_fractions(self) -> (f64, f64) {
        let (h, o, _) = self.atoms();
        let w = self.molar_mass();
        (h as f64 * W_H / w, o as f64 * W_O / w)
    }
}

/// A composition given as mass fractions per species.
pub type Composition = BTreeMap<Species, f64>;

/// Element bookkeeping for the Bilger mixture fraction.
///
/// The fuel stream is pure H2; the oxidizer stream is an O2/N2 mixture whose
/// O2 mole fraction defaults to 0.21.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementTable {
    oxidizer_o2_mass_fraction: f64,
    beta_fuel: f64,
    beta_oxidizer: f64,
}

impl Default for ElementTable {
    fn default() -> Self {
        Self::with_air_o2_mole_fraction(0.21).expect("standard air is valid")
    }
}

impl ElementTable {
    pub fn with_air_o2_mole_fraction(x_o2: f64) -> Result<Self> {
        if !(x_o2 > 0.0 && x_o2 <= 1.0) {
            return Err(Error::Domain(format!(
                "O2 mole fraction must lie in (0, 1], got {x_o2}"
            )));
        }
        let w_o2 = Species::O2.molar_mass();
        let w_n2 = Species::N2.molar_mass();
        let y_o2 = x_o2 * w_o2 / (x_o2 * w_o2 + (1.0 - x_o2) * w_n2);
        Self::with_oxidizer_o2_mass_fraction(y_o2)
    }

    pub fn with_oxidizer_o2_mass_fraction(y_o2: f64) -> Result<Self> {
        if !(y_o2 > 0.0 && y_o2 <= 1.0) {
            return Err(Error::Domain(format!(
                "O2 mass fraction must lie in (0, 1], got {y_o2}"
            )));
        }
        let beta_fuel = beta_of(&Self::fuel_composition());
        let beta_oxidizer = beta_of(&oxidizer(y_o2));
        debug_assert!(beta_fuel > 0.0 && beta_oxidizer < 0.0);
        Ok(Self {
            oxidizer_o2_mass_fraction: y_o2,
            beta_fuel,
            beta_oxidizer,
        })
    }

    pub fn fuel_composition() -> Composition {
        Composition::from([(Species::H2, 1.0)])
    }

    pub fn oxidizer_composition(&self) -> Composition {
        oxidizer(self.oxidizer_o2_mass_fraction)
    }

    pub fn oxidizer_o2_mass_fraction(&self) -> f64 {
        self.oxidizer_o2_mass_fraction
    }

    pub fn beta_fuel(&self) -> f64 {
        self.beta_fuel
    }

    pub fn beta_oxidizer(&self) -> f64 {
        self.beta_oxidizer
    }

    /// Bilger mixture fraction of one composition.
    pub fn mixture_fraction(&self, composition: &Composition) -> Result<f64> {
        let total: f64 = composition.values().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::validation(
                "Y",
                0,
                format!("mass fractions sum to {total}, expected 1"),
            ));
        }
        Ok(self.xi_from_beta(beta_of(composition)))
    }

    fn xi_from_beta(&self, beta: f64) -> f64 {
        let xi = (beta - self.beta_oxidizer) / (self.beta_fuel - self.beta_oxidizer);
        if (-1e-10..0.0).contains(&xi) {
            0.0
        } else if xi > 1.0 && xi <= 1.0 + 1e-10 {
            1.0
        } else {
            xi
        }
    }

    /// Stoichiometric mixture fraction: the point where the coupling function vanishes.
    pub fn stoich_xi(&self) -> f64 {
        -self.beta_oxidizer / (self.beta_fuel - self.beta_oxidizer)
    }

    pub fn mixture_constants(&self) -> MixtureConstants {
        MixtureConstants {
            xi_stoich: self.stoich_xi(),
        }
    }

    /// Pointwise Bilger mixture fraction from named mass-fraction fields.
    ///
    /// Species absent from the map are taken as zero.
    pub fn bilger_xi(&self, fields: &BTreeMap<String, ScalarField3D>) -> Result<ScalarField3D> {
        let mut parsed = Vec::with_capacity(fields.len());
        for (name, field) in fields {
            parsed.push((Species::parse(name)?, field));
        }
        let (_, first) = parsed
            .first()
            .ok_or_else(|| Error::Degenerate("no species fields supplied".into()))?;
        let grid = *first.grid();
        for (_, f) in &parsed[1..] {
            first.check_same_grid(f)?;
        }
        let coeffs: Vec<(f64, f64)> = parsed
            .iter()
            .map(|(s, _)| s.elemental_fractions())
            .collect();

        let mut out = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let mut total = 0.0;
            let mut z_h = 0.0;
            let mut z_o = 0.0;
            for ((species, field), (zh, zo)) in parsed.iter().zip(&coeffs) {
                let y = field.data()[idx];
                if !(0.0..=1.0).contains(&y) {
                    return Err(Error::validation(
                        &format!("Y_{}", species.name()),
                        idx,
                        format!("mass fraction {y} outside [0, 1]"),
                    ));
                }
                total += y;
                z_h += y * zh;
                z_o += y * zo;
            }
            if (total - 1.0).abs() > 1e-6 {
                return Err(Error::validation(
                    "Y",
                    idx,
                    format!("mass fractions sum to {total}, expected 1"),
                ));
            }
            out.push(self.xi_from_beta(coupling(z_h, z_o)));
        }
        ScalarField3D::new(grid, out)
    }
}

fn oxidizer(y_o2: f64) -> Composition {
    Composition::from([(Species::O2, y_o2), (Species::N2, 1.0 - y_o2)])
}

fn coupling(z_h: f64, z_o: f64) -> f64 {
    z_h / (2.0 * W_H) - z_o / W_O
}

fn beta_of(composition: &Composition) -> f64 {
    let (z_h, z_o) = composition
        .iter()
        .fold((0.0, 0.0), |(zh, zo), (s, &y)| {
            let (eh, eo) = s.elemental_fractions();
            (zh + y * eh, zo + y * eo)
        });
    coupling(z_h, z_o)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureConstants {
    pub xi_stoich: f64,
}

impl Default for MixtureConstants {
    fn default() -> Self {
        ElementTable::default().mixture_constants()
    }
}

impl MixtureConstants {
    pub fn new(xi_stoich: f64) -> Result<Self> {
        if !(xi_stoich > 0.0 && xi_stoich < 1.0) {
            return Err(Error::Domain(format!(
                "stoichiometric mixture fraction must lie in (0, 1), got {xi_stoich}"
            )));
        }
        Ok(Self { xi_stoich })
    }

    /// Progress variable at a single point, before clamping.
    #[inline]
    pub fn progress(&self, y_h2: f64, xi: f64) -> f64 {
        let burnt = ((xi - self.xi_stoich) / (1.0 - self.xi_stoich)).max(0.0);
        let denom = xi - burnt;
        if denom < PURE_AIR_EPS {
            0.0
        } else {
            (xi - y_h2) / denom
        }
    }

    #[inline]
    pub fn equivalence_ratio(&self, xi: f64) -> f64 {
        xi * (1.0 - self.xi_stoich) / (self.xi_stoich * (1.0 - xi))
    }

    /// H2 mass fraction in fully burnt gas at mixture fraction `xi`.
    #[inline]
    pub fn burnt_h2(&self, xi: f64) -> f64 {
        ((xi - self.xi_stoich) / (1.0 - self.xi_stoich)).max(0.0)
    }

    pub fn xi_from_equivalence_ratio(&self, phi: f64) -> f64 {
        let r = phi * self.xi_stoich / (1.0 - self.xi_stoich);
        r / (1.0 + r)
    }
}

/// Counts of points that left [0, 1] before clamping.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProgressDiagnostics {
    pub below_zero: usize,
    pub above_one: usize,
    /// Points that also fell outside the clamp window and were clipped.
    pub clipped: usize,
    /// Sum of distances outside [0, 1], before clipping.
    pub excess_mass: f64,
}

#[derive(Debug, Clone)]
pub struct ProgressVariable {
    pub field: ScalarField3D,
    pub diagnostics: ProgressDiagnostics,
}

pub fn progress_variable(
    y_h2: &ScalarField3D,
    xi: &ScalarField3D,
    mix: &MixtureConstants,
) -> Result<ProgressVariable> {
    y_h2.check_same_grid(xi)?;
    let mut diag = ProgressDiagnostics::default();
    let data = y_h2
        .data()
        .iter()
        .zip(xi.data())
        .map(|(&y, &z)| {
            let c = mix.progress(y, z);
            if c < 0.0 {
                diag.below_zero += 1;
                diag.excess_mass += -c;
            } else if c > 1.0 {
                diag.above_one += 1;
                diag.excess_mass += c - 1.0;
            }
            let clamped = c.clamp(C_CLAMP.0, C_CLAMP.1);
            if clamped != c {
                diag.clipped += 1;
            }
            clamped
        })
        .collect();
    Ok(ProgressVariable {
        field: ScalarField3D::new(*y_h2.grid(), data)?,
        diagnostics: diag,
    })
}

pub fn equivalence_ratio(xi: &ScalarField3D, mix: &MixtureConstants) -> Result<ScalarField3D> {
    let limit = 1.0 - 1e-6;
    if let Some(idx) = xi.data().iter().position(|&v| v >= limit) {
        let (i, j, k) = xi.grid().unravel(idx);
        return Err(Error::Domain(format!(
            "mixture fraction {} at ({i}, {j}, {k}) is too close to pure fuel",
            xi.data()[idx]
        )));
    }
    xi.map(|v| mix.equivalence_ratio(v))
}

/// Burning rate from the filtered H2 source term (negated, so non-negative).
pub fn burning_rate(omega_h2: &ScalarField3D) -> Result<ScalarField3D> {
    if let Some(idx) = omega_h2.data().iter().position(|&v| v > 0.0) {
        return Err(Error::validation(
            "omega_H2",
            idx,
            format!("positive H2 source {} (production)", omega_h2.data()[idx]),
        ));
    }
    omega_h2.map(|v| -v)
}
