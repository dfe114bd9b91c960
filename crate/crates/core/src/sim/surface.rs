//! Strength-surface sampling: stresses at which the return map first
//! activates along strain rays.

use std::fmt::Write as _;

use crate::constitutive::{return_map, IpState, MaterialParams};
use crate::tensor::SymTensor6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slice {
    /// `ε₃ = 0`
    PlaneStrain,
    /// `σ₃ = 0`. The surface is reached from the elastic side, so the
    /// out-of-plane strain follows in closed form.
    PlaneStress,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    /// Ray angle in the (ε₁, ε₂) plane, rad.
    pub angle: f64,
    /// Principal stresses at activation, Pa.
    pub principal: [f64; 3],
}

/// Largest strain scale probed before a ray is declared unbounded.
const MAX_SCALE: f64 = 1.0;

fn inelastic(params: &MaterialParams, eps: &SymTensor6, phi: f64) -> bool {
    return_map(params, eps, phi, &IpState::default()).is_ok_and(|r| !r.is_elastic())
}

/// Elastic stress at the smallest `t` for which `t·direction` is no longer
/// elastic, or `None` if the ray stays elastic up to a strain of order one.
pub fn activation_along(
    params: &MaterialParams,
    direction: &SymTensor6,
    phi: f64,
) -> Option<SymTensor6> {
    let unit = *direction * (1.0 / direction.norm());
    let mut hi = 1e-6;
    while !inelastic(params, &(unit * hi), phi) {
        hi *= 2.0;
        if hi > MAX_SCALE {
            return None;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if inelastic(params, &(unit * mid), phi) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(params.moduli.stress(&(unit * (0.5 * (lo + hi)))))
}

/// Surface points for `rays` directions evenly spaced over a full turn.
pub fn sample_strength_surface(
    params: &MaterialParams,
    slice: Slice,
    rays: usize,
    phi: f64,
) -> Vec<SurfacePoint> {
    let lambda = params.moduli.lame();
    let p_wave = params.moduli.p_wave_modulus();
    (0..rays)
        .filter_map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / rays as f64;
            let (e1, e2) = (angle.cos(), angle.sin());
            let e3 = match slice {
                Slice::PlaneStrain => 0.0,
                Slice::PlaneStress => -lambda * (e1 + e2) / p_wave,
            };
            activation_along(params, &SymTensor6([e1, e2, e3, 0.0, 0.0, 0.0]), phi).map(|s| {
                SurfacePoint {
                    angle,
                    principal: [s[0], s[1], s[2]],
                }
            })
        })
        .collect()
}

/// CSV with columns `angle_rad,sigma_1_pa,sigma_2_pa,sigma_3_pa`.
pub fn surface_csv(points: &[SurfacePoint]) -> String {
    let mut s = String::from("angle_rad,sigma_1_pa,sigma_2_pa,sigma_3_pa\n");
    for p in points {
        let _ = writeln!(
            s,
            "{:.9e},{:.9e},{:.9e},{:.9e}",
            p.angle, p.principal[0], p.principal[1], p.principal[2]
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::Criterion;
    use crate::tensor::SQRT_2;

    fn params(criterion: Criterion, eps_ref: f64) -> MaterialParams {
        MaterialParams {
            criterion,
            reference_strain: eps_ref,
            ..MaterialParams::default()
        }
    }

    #[test]
    fn hydrostatic_activation_at_tensile_strength() {
        let p = params(Criterion::R1, 1.0);
        let s = activation_along(&p, &SymTensor6::identity(), 0.0).unwrap();
        assert!((s.trace() / 3.0 - p.tensile_strength).abs() <= 1e-9 * p.tensile_strength);
    }

    #[test]
    fn pure_shear_activation() {
        for c in [Criterion::R1, Criterion::DruckerPrager] {
            let p = params(c, 1.0);
            let s = activation_along(&p, &SymTensor6([0.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 0.0).unwrap();
            let tau = s[5] / SQRT_2;
            // ‖dev σ‖ = √2 τ reaches f_s
            assert!(
                (tau - p.shear_strength / SQRT_2).abs() <= 1e-9 * p.shear_strength,
                "{c:?}: {tau}"
            );
        }
    }

    #[test]
    fn dp_compressive_strength_grows_with_pressure() {
        let eps_ref = 1e-3;
        let p = params(Criterion::DruckerPrager, eps_ref);
        let dev = SymTensor6([1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        for v in [-0.05, -0.1, -0.2, -0.3] {
            let s = activation_along(&p, &(dev + SymTensor6::identity() * v), 0.0).unwrap();
            let tr_eps = s.trace() / (3.0 * p.moduli.bulk);
            let expected = p.shear_strength * (1.0 - tr_eps / eps_ref);
            assert!(
                (s.deviator().norm() - expected).abs() <= 1e-8 * expected,
                "v = {v}"
            );
        }
    }

    #[test]
    fn degraded_surface_shrinks() {
        let p = params(Criterion::R1, 1.0);
        let intact = sample_strength_surface(&p, Slice::PlaneStrain, 16, 0.0);
        let damaged = sample_strength_surface(&p, Slice::PlaneStrain, 16, 0.5);
        assert_eq!(intact.len(), 16);
        for (a, b) in intact.iter().zip(&damaged) {
            let na = a.principal.iter().map(|x| x * x).sum::<f64>();
            let nb = b.principal.iter().map(|x| x * x).sum::<f64>();
            assert!(nb < na);
        }
        for q in sample_strength_surface(&p, Slice::PlaneStress, 12, 0.0) {
            assert!(q.principal[2].abs() < 1e-6 * p.tensile_strength);
        }
        let csv = surface_csv(&intact);
        assert_eq!(csv.lines().count(), 17);
    }
}
