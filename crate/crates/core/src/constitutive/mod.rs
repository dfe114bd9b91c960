//! Integration-point constitutive model.
//!
//! The fracture eigenstrain `η = Σ λᵢ Gᵢ(ε)` is constrained to strain-derived
//! directions, so only the multipliers `λᵢ` have to be resolved locally. Two
//! strength criteria are provided: the non-smooth `R1` criterion (separate
//! volumetric and deviatoric facets with independent tensile and shear
//! strengths) and a smooth Drucker–Prager-like criterion that strengthens under
//! compression.

mod criteria;
mod energy;
mod return_map;

pub use criteria::{
    degradable_potential, direction_dp, directions_r1, intact_potential, projected_strength,
    ProjectedStrength, R1Directions,
};
pub use energy::pointwise_energy;
pub use return_map::{
    return_map, return_map_with, surface_excess, ReturnMapMethod, ReturnMapResult,
    ReturnMapSettings,
};

use crate::error::MaterialError;
use crate::tensor::ElasticModuli;

/// Strength criterion selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Volumetric cap plus deviatoric cylinder, two eigenstrain directions.
    R1,
    /// Smooth tension surface with a pressure-dependent cone in compression.
    DruckerPrager,
}

impl Criterion {
    /// Number of eigenstrain directions (multipliers) the criterion uses.
    pub fn direction_count(self) -> usize {
        match self {
            Criterion::R1 => 2,
            Criterion::DruckerPrager => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::R1 => "r1",
            Criterion::DruckerPrager => "dp",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "r1" => Ok(Criterion::R1),
            "dp" | "drucker-prager" | "drucker_prager" => Ok(Criterion::DruckerPrager),
            other => Err(format!("unknown criterion `{other}` (expected r1 or dp)")),
        }
    }
}

/// Material constants for the bulk, the strength surface, the phase field,
/// and the dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialParams {
    pub moduli: ElasticModuli,
    /// f_t, Pa
    pub tensile_strength: f64,
    /// f_s, Pa
    pub shear_strength: f64,
    /// G_c, J/m²
    pub fracture_energy: f64,
    /// ℓ, m
    pub length_scale: f64,
    /// ρ, kg/m³
    pub density: f64,
    /// c, 1/s
    pub damping: f64,
    /// κ: floor of the degradation function.
    pub residual_strength: f64,
    /// κ_t: surface extension per unit multiplier, relative to K.
    pub residual_stiffness: f64,
    pub criterion: Criterion,
    /// ε_ref of the Drucker–Prager-like criterion; unused by R1.
    pub reference_strain: f64,
    /// Slope of the non-degradable compressive potential, relative to f_t.
    pub compressive_penalty: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            moduli: ElasticModuli::new(200e9, 0.3).expect("valid default moduli"),
            tensile_strength: 150e6,
            shear_strength: 150e6,
            fracture_energy: 100e3,
            length_scale: 0.05,
            density: 8000.0,
            damping: 1e6,
            residual_strength: 1e-3,
            residual_stiffness: 1e-9,
            criterion: Criterion::R1,
            reference_strain: 1.0,
            compressive_penalty: 1e6,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        let positive = [
            ("tensile_strength", self.tensile_strength),
            ("shear_strength", self.shear_strength),
            ("fracture_energy", self.fracture_energy),
            ("length_scale", self.length_scale),
            ("density", self.density),
            ("compressive_penalty", self.compressive_penalty),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(MaterialError::NonPositive { name, value });
            }
        }
        if !(self.damping >= 0.0) {
            return Err(MaterialError::NonPositive {
                name: "damping",
                value: self.damping,
            });
        }
        if !(self.residual_strength > 0.0 && self.residual_strength < 1.0) {
            return Err(MaterialError::ResidualStrength(self.residual_strength));
        }
        if !(self.residual_stiffness > 0.0 && self.residual_stiffness <= 1e-2) {
            return Err(MaterialError::ResidualStiffness(self.residual_stiffness));
        }
        if self.criterion == Criterion::DruckerPrager && !(self.reference_strain > 0.0) {
            return Err(MaterialError::NonPositive {
                name: "reference_strain",
                value: self.reference_strain,
            });
        }
        Ok(())
    }

    /// `d(φ) = (1−κ)(1−φ)² + κ`, evaluated at this material's κ.
    pub fn degradation(&self, phi: f64) -> f64 {
        degradation(phi, self.residual_strength)
    }
}

/// Degradation of the strength potential, `(1−κ)(1−φ)² + κ`. φ is clamped to
/// `[0, 1]` so the result always lies in `[κ, 1]`.
pub fn degradation(phi: f64, kappa: f64) -> f64 {
    let phi = phi.clamp(0.0, 1.0);
    (1.0 - kappa) * (1.0 - phi) * (1.0 - phi) + kappa
}

/// `∂d/∂φ` (zero outside the clamped range).
pub fn degradation_slope(phi: f64, kappa: f64) -> f64 {
    if !(0.0..=1.0).contains(&phi) {
        return 0.0;
    }
    -2.0 * (1.0 - kappa) * (1.0 - phi)
}

/// Persistent per-integration-point state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IpState {
    /// Maximum crack driving force reached over committed steps, J/m³.
    pub history: f64,
    /// Last converged multipliers; an initial guess only.
    pub warm_start: [f64; 2],
}

impl IpState {
    /// Irreversible history update, `max(F_d, 𝓕)`. Called on step commit.
    pub fn update_history(&mut self, driving_force: f64) -> f64 {
        self.history = update_history(self.history, driving_force);
        self.history
    }
}

/// `max(F_d, 𝓕_old)`.
pub fn update_history(old: f64, driving_force: f64) -> f64 {
    if driving_force > old {
        driving_force
    } else {
        old
    }
}
