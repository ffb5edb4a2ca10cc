//! Whitespace-separated 1D flamelet tables.
//!
//! ```text
//! # phi = 0.4
//! x c omega rho
//! 0.0 0.0 0.0 1.2
//! ...
//! ```
//!
//! Lines starting with `#` are comments; a `# phi = <value>` comment sets the
//! flamelet equivalence ratio. Header columns may appear in any order.

use std::fmt::Write as _;
use std::path::Path;

use super::{read_bytes, write_atomic};
use crate::error::{Error, Result};
use crate::flamelet::FlameletProfile;

const COLUMNS: [&str; 4] = ["x", "c", "omega", "rho"];

fn parse_phi(comment: &str) -> Option<Result<f64>> {
    let (key, value) = comment.split_once('=')?;
    if key.trim() != "phi" {
        return None;
    }
    Some(
        value
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Format(format!("bad phi comment value {:?}", value.trim()))),
    )
}

pub fn parse_flamelet_profile(text: &str) -> Result<FlameletProfile> {
    let mut phi = None;
    let mut order: Option<[usize; 4]> = None;
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(p) = parse_phi(comment) {
                phi = Some(p?);
            }
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match order {
            None => {
                if tokens.len() != COLUMNS.len() {
                    return Err(Error::Format(format!(
                        "header must name the columns {COLUMNS:?}, found {tokens:?}"
                    )));
                }
                let mut idx = [0; 4];
                for (slot, name) in idx.iter_mut().zip(COLUMNS) {
                    *slot = tokens
                        .iter()
                        .position(|t| *t == name)
                        .ok_or_else(|| Error::Format(format!("header is missing the {name:?} column")))?;
                }
                order = Some(idx);
            }
            Some(idx) => {
                if tokens.len() != COLUMNS.len() {
                    return Err(Error::Format(format!(
                        "line {}: expected {} columns, found {}",
                        lineno + 1,
                        COLUMNS.len(),
                        tokens.len()
                    )));
                }
                for (col, &src) in cols.iter_mut().zip(&idx) {
                    let v = tokens[src].parse::<f64>().map_err(|_| {
                        Error::Format(format!("line {}: bad number {:?}", lineno + 1, tokens[src]))
                    })?;
                    col.push(v);
                }
            }
        }
    }
    if order.is_none() {
        return Err(Error::Format("flamelet table has no header line".into()));
    }
    let [x, c, omega, rho] = cols;
    FlameletProfile::new(x, c, omega, rho, phi)
}

pub fn format_flamelet_profile(profile: &FlameletProfile) -> String {
    let mut out = String::new();
    if let Some(phi) = profile.phi {
        let _ = writeln!(out, "# phi = {phi}");
    }
    out.push_str("x c omega rho\n");
    for i in 0..profile.x.len() {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            profile.x[i], profile.c[i], profile.omega[i], profile.rho[i]
        );
    }
    out
}

pub fn read_flamelet_profile(path: &Path) -> Result<FlameletProfile> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Format(format!("{} is not valid UTF-8", path.display())))?;
    parse_flamelet_profile(&text)
}

pub fn write_flamelet_profile(profile: &FlameletProfile, path: &Path) -> Result<()> {
    write_atomic(path, format_flamelet_profile(profile).as_bytes())
}
