//! Flat `key = value` case files.
//!
//! Blank lines and text after `#` are ignored. Keys and units:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `geometry` | `plate_hole`, `sent` or `dynamic_plate` | required |
//! | `loading` | `tension`, `compression`, `shear` or `traction` | per geometry |
//! | `rate` | driven edge speed, m/s | 3e-6 (tension/compression), 1e-6 (shear) |
//! | `traction` | applied edge traction, Pa | 10e6 |
//! | `target_strain` | final driven displacement over specimen height | 1e-3 (2e-3 shear) |
//! | `n_steps` | number of steps (quasi-static) | 200 |
//! | `dt` | step, s | from `target_strain` (quasi-static), 1e-5 (dynamic) |
//! | `t_end` | end time of dynamic runs, s | 4e-4 |
//! | `ell_over_dx` / `dx` | mesh resolution; `dx` in m wins if given | 3 |
//! | `width`, `height`, `notch` | dynamic plate dimensions, m | 1, 0.5, 0.5 |
//! | `stop_ratio` | stop once the reaction falls below this fraction of its peak | 0 (never) |
//! | `snapshot_stride` | steps between VTK snapshots, 0 for none | 0 |
//! | `e`, `nu`, `ft`, `fs`, `gc`, `ell`, `rho`, `c`, `kappa`, `kappa_t` | material, SI units | [`MaterialParams::default`] |
//! | `criterion`, `eps_ref`, `compressive_penalty` | strength surface | `r1`, 1, 1e6 |
//! | `beta`, `gamma`, `max_passes`, `newton_tol`, `newton_max_iter`, `stagger_tol`, `cutback_factor`, `max_cutbacks` | solver | see [`SolverConfig`] |
//!
//! Dynamic runs default to `c = 0` and `eps_ref = 1`.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::constitutive::{Criterion, MaterialParams};
use crate::error::ConfigError;
use crate::solver::SolverConfig;
use crate::tensor::ElasticModuli;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    PlateHole,
    Sent,
    DynamicPlate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loading {
    Tension,
    Compression,
    Shear,
    Traction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseConfig {
    pub geometry: Geometry,
    pub loading: Loading,
    /// m/s, signed (negative for compression)
    pub rate: f64,
    /// Pa
    pub traction: f64,
    pub material: MaterialParams,
    pub solver: SolverConfig,
    /// Target element size, m.
    pub dx: f64,
    pub plate: [f64; 3],
    pub stop_ratio: f64,
    pub snapshot_stride: usize,
}

impl CaseConfig {
    /// Specimen height used to turn a driven displacement into a strain.
    pub fn height(&self) -> f64 {
        match self.geometry {
            Geometry::DynamicPlate => self.plate[1],
            _ => 1.0,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        self.loading == Loading::Traction
    }
}

const KEYS: &[&str] = &[
    "geometry",
    "loading",
    "rate",
    "traction",
    "target_strain",
    "n_steps",
    "dt",
    "t_end",
    "ell_over_dx",
    "dx",
    "width",
    "height",
    "notch",
    "stop_ratio",
    "snapshot_stride",
    "e",
    "nu",
    "ft",
    "fs",
    "gc",
    "ell",
    "rho",
    "c",
    "kappa",
    "kappa_t",
    "criterion",
    "eps_ref",
    "compressive_penalty",
    "beta",
    "gamma",
    "max_passes",
    "newton_tol",
    "newton_max_iter",
    "stagger_tol",
    "cutback_factor",
    "max_cutbacks",
];

struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn text(&self, key: &str) -> Option<(usize, &str)> {
        self.0.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<(usize, T)>, ConfigError> {
        match self.text(key) {
            None => Ok(None),
            Some((line, v)) => {
                v.parse()
                    .map(|x| Some((line, x)))
                    .map_err(|_| ConfigError::Malformed {
                        line,
                        key: key.into(),
                        value: v.into(),
                    })
            }
        }
    }

    fn number(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.parse::<f64>(key)? {
            Some((line, v)) if !v.is_finite() => Err(ConfigError::Malformed {
                line,
                key: key.into(),
                value: v.to_string(),
            }),
            Some((_, v)) => Ok(v),
            None => Ok(default),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.number(key, default)?;
        match self.text(key) {
            Some((line, _)) if !(v > 0.0) => Err(ConfigError::Positivity {
                line,
                key: key.into(),
                value: v,
            }),
            _ => Ok(v),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.parse::<usize>(key)?.map_or(default, |(_, v)| v))
    }

    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |(l, _)| *l)
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim()))
            .filter(|(k, v)| !k.is_empty() && !v.is_empty())
            .ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.trim().to_string(),
            })?;
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, key });
        }
        if let Some((first, _)) = map.get(&key) {
            return Err(ConfigError::DuplicateKey {
                key,
                first: *first,
                second: line,
            });
        }
        map.insert(key, (line, value.to_string()));
    }
    Ok(Entries(map))
}

pub fn parse_config(text: &str) -> Result<CaseConfig, ConfigError> {
    let entries = tokenize(text)?;
    let geometry = match entries.text("geometry") {
        None => return Err(ConfigError::Missing("geometry")),
        Some((_, "plate_hole")) => Geometry::PlateHole,
        Some((_, "sent")) => Geometry::Sent,
        Some((_, "dynamic_plate")) => Geometry::DynamicPlate,
        Some((line, v)) => {
            return Err(ConfigError::Malformed {
                line,
                key: "geometry".into(),
                value: v.into(),
            })
        }
    };
    let loading = match entries.text("loading") {
        None => match geometry {
            Geometry::PlateHole => Loading::Tension,
            Geometry::Sent => Loading::Shear,
            Geometry::DynamicPlate => Loading::Traction,
        },
        Some((_, "tension")) => Loading::Tension,
        Some((_, "compression")) => Loading::Compression,
        Some((_, "shear")) => Loading::Shear,
        Some((_, "traction")) => Loading::Traction,
        Some((line, v)) => {
            return Err(ConfigError::Malformed {
                line,
                key: "loading".into(),
                value: v.into(),
            })
        }
    };
    let allowed = matches!(
        (geometry, loading),
        (Geometry::PlateHole, Loading::Tension | Loading::Compression)
            | (Geometry::Sent, Loading::Shear)
            | (Geometry::DynamicPlate, Loading::Traction)
    );
    if !allowed {
        return Err(ConfigError::Invalid(format!(
            "line {}: loading {loading:?} is not available for geometry {geometry:?}",
            entries.line("loading")
        )));
    }
    let dynamic = loading == Loading::Traction;

    let defaults = MaterialParams::default();
    let young = entries.positive("e", defaults.moduli.young)?;
    let poisson = entries.number("nu", defaults.moduli.poisson)?;
    let moduli = ElasticModuli::new(young, poisson).map_err(|e| {
        ConfigError::Invalid(format!(
            "line {}: {e}",
            entries.line("nu").max(entries.line("e"))
        ))
    })?;
    let criterion = match entries.text("criterion") {
        None => defaults.criterion,
        Some((line, v)) => Criterion::from_str(v).map_err(|_| ConfigError::Malformed {
            line,
            key: "criterion".into(),
            value: v.into(),
        })?,
    };
    let material = MaterialParams {
        moduli,
        tensile_strength: entries.positive("ft", defaults.tensile_strength)?,
        shear_strength: entries.positive("fs", defaults.shear_strength)?,
        fracture_energy: entries.positive("gc", defaults.fracture_energy)?,
        length_scale: entries.positive("ell", defaults.length_scale)?,
        density: entries.positive("rho", defaults.density)?,
        damping: entries.number("c", if dynamic { 0.0 } else { defaults.damping })?,
        residual_strength: entries.positive("kappa", defaults.residual_strength)?,
        residual_stiffness: entries.positive("kappa_t", defaults.residual_stiffness)?,
        criterion,
        reference_strain: entries.positive("eps_ref", defaults.reference_strain)?,
        compressive_penalty: entries
            .positive("compressive_penalty", defaults.compressive_penalty)?,
    };
    material
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let ratio = entries.positive("ell_over_dx", 3.0)?;
    let dx = entries.positive("dx", material.length_scale / ratio)?;
    let plate = [
        entries.positive("width", 1.0)?,
        entries.positive("height", 0.5)?,
        entries.positive("notch", 0.5)?,
    ];

    let default_rate = match loading {
        Loading::Tension => 3e-6,
        Loading::Compression => -3e-6,
        Loading::Shear => 1e-6,
        Loading::Traction => 0.0,
    };
    let rate = entries.number("rate", default_rate)?;
    let traction = entries.number("traction", 10e6)?;
    let base = SolverConfig::default();
    let (dt, n_steps) = if dynamic {
        let dt = entries.positive("dt", 1e-5)?;
        let t_end = entries.positive("t_end", 4e-4)?;
        let n = match entries.parse::<usize>("n_steps")? {
            Some((_, n)) => n,
            None => (t_end / dt).round() as usize,
        };
        (dt, n)
    } else {
        let n_steps = entries.count("n_steps", base.n_steps)?;
        let target = entries.positive(
            "target_strain",
            if loading == Loading::Shear {
                2e-3
            } else {
                1e-3
            },
        )?;
        let default_dt = if rate != 0.0 && n_steps > 0 {
            target / (rate.abs() * n_steps as f64)
        } else {
            1.0
        };
        (entries.positive("dt", default_dt)?, n_steps)
    };
    let solver = SolverConfig {
        newmark_beta: entries.positive("beta", base.newmark_beta)?,
        newmark_gamma: entries.positive("gamma", base.newmark_gamma)?,
        max_passes: entries.count("max_passes", base.max_passes)?,
        newton_tol: entries.positive("newton_tol", base.newton_tol)?,
        newton_max_iter: entries.count("newton_max_iter", base.newton_max_iter)?,
        stagger_tol: entries.positive("stagger_tol", base.stagger_tol)?,
        dt,
        n_steps,
        cutback_factor: entries.positive("cutback_factor", base.cutback_factor)?,
        max_cutbacks: entries.count("max_cutbacks", base.max_cutbacks)?,
        check_admissibility: base.check_admissibility,
    };
    solver.validate()?;
    let stop_ratio = entries.number("stop_ratio", 0.0)?;
    if !(0.0..1.0).contains(&stop_ratio) {
        return Err(ConfigError::Invalid(format!(
            "line {}: stop_ratio must lie in [0, 1), got {stop_ratio}",
            entries.line("stop_ratio")
        )));
    }
    Ok(CaseConfig {
        geometry,
        loading,
        rate,
        traction,
        material,
        solver,
        dx,
        plate,
        stop_ratio,
        snapshot_stride: entries.count("snapshot_stride", 0)?,
    })
}
