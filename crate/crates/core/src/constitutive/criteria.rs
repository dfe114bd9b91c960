//! Eigenstrain directions and strength potentials of the two criteria.

use super::{Criterion, MaterialParams};
use crate::error::ConstitutiveError;
use crate::tensor::{Matrix6, SymTensor6};

/// Norms below this are treated as a vanishing direction.
pub(crate) const DEGENERATE_NORM: f64 = 1e-14;

/// Eigenstrain directions of the R1 criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct R1Directions {
    /// `(1/3)·sign(tr ε)·I`, with `sign(0) = +1`.
    pub volumetric: SymTensor6,
    /// `dev ε / ‖dev ε‖`; `None` when the strain has no deviator.
    pub deviatoric: Option<SymTensor6>,
}

fn trace_sign(eps: &SymTensor6) -> f64 {
    if eps.trace() < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn unit_deviator(eps: &SymTensor6) -> Option<(SymTensor6, f64)> {
    let dev = eps.deviator();
    let n = dev.norm();
    (n >= DEGENERATE_NORM).then(|| (dev * (1.0 / n), n))
}

pub fn directions_r1(eps: &SymTensor6) -> R1Directions {
    R1Directions {
        volumetric: SymTensor6::identity() * (trace_sign(eps) / 3.0),
        deviatoric: unit_deviator(eps).map(|(g, _)| g),
    }
}

/// Single eigenstrain direction of the Drucker–Prager-like criterion:
/// `ε/‖ε‖` under non-negative volumetric strain, the unit deviator otherwise.
pub fn direction_dp(eps: &SymTensor6) -> Option<SymTensor6> {
    if eps.trace() >= 0.0 {
        let n = eps.norm();
        (n >= DEGENERATE_NORM).then(|| *eps * (1.0 / n))
    } else {
        unit_deviator(eps).map(|(g, _)| g)
    }
}

/// Projected strength split into the part scaled by the degradation function
/// and the part that never degrades.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectedStrength {
    pub degradable: f64,
    pub intact: f64,
}

impl ProjectedStrength {
    pub fn effective(&self, degradation: f64) -> f64 {
        degradation * self.degradable + self.intact
    }
}

/// `F_d(η)`, the degradable strength potential (J/m³). The strain enters
/// through the Drucker–Prager branch selection and its compressive
/// strengthening factor.
pub fn degradable_potential(params: &MaterialParams, eps: &SymTensor6, eta: &SymTensor6) -> f64 {
    let ft = params.tensile_strength;
    let fs = params.shear_strength;
    match params.criterion {
        Criterion::R1 => ft * eta.trace().max(0.0) + fs * eta.deviator().norm(),
        Criterion::DruckerPrager => {
            let tr_eps = eps.trace();
            if tr_eps >= 0.0 {
                let tr = eta.trace();
                let dev = eta.deviator().norm();
                (ft * ft * tr * tr + fs * fs * dev * dev).sqrt()
            } else {
                fs * (1.0 - tr_eps / params.reference_strain) * eta.deviator().norm()
            }
        }
    }
}

/// `F_i(η)`, the non-degradable compressive potential. Non-zero only for R1
/// under volumetric compression of the eigenstrain.
pub fn intact_potential(params: &MaterialParams, eta: &SymTensor6) -> f64 {
    match params.criterion {
        Criterion::R1 => {
            -params.compressive_penalty * params.tensile_strength * eta.trace().min(0.0)
        }
        Criterion::DruckerPrager => 0.0,
    }
}

/// Gradients `(∂F_d/∂η, ∂F_i/∂η)` at `η`. Where a potential is not
/// differentiable because part of `η` vanishes, the one-sided derivative
/// along the eigenstrain direction of the current strain is used.
fn potential_gradients(
    params: &MaterialParams,
    eps: &SymTensor6,
    eta: &SymTensor6,
) -> (SymTensor6, SymTensor6) {
    let ft = params.tensile_strength;
    let fs = params.shear_strength;
    let ident = SymTensor6::identity();
    match params.criterion {
        Criterion::R1 => {
            let tr = eta.trace();
            let compressive = if tr == 0.0 {
                eps.trace() < 0.0
            } else {
                tr < 0.0
            };
            let dev = eta.deviator();
            let dev_n = dev.norm();
            let dev_dir = if dev_n >= DEGENERATE_NORM {
                dev * (1.0 / dev_n)
            } else {
                directions_r1(eps).deviatoric.unwrap_or_default()
            };
            let volumetric = if compressive {
                SymTensor6::zero()
            } else {
                ident * ft
            };
            let d_fd = volumetric + dev_dir * fs;
            let d_fi = if compressive {
                ident * (-params.compressive_penalty * ft)
            } else {
                SymTensor6::zero()
            };
            (d_fd, d_fi)
        }
        Criterion::DruckerPrager => {
            let tr_eps = eps.trace();
            let probe = if eta.norm() >= DEGENERATE_NORM {
                *eta
            } else {
                direction_dp(eps).unwrap_or_default()
            };
            let grad = if tr_eps >= 0.0 {
                let tr = probe.trace();
                let dev = probe.deviator();
                let f = (ft * ft * tr * tr + fs * fs * dev.dot(&dev)).sqrt();
                if f > 0.0 {
                    (ident * (ft * ft * tr) + dev * (fs * fs)) * (1.0 / f)
                } else {
                    SymTensor6::zero()
                }
            } else {
                let dev = probe.deviator();
                let n = dev.norm();
                if n > 0.0 {
                    dev * (fs * (1.0 - tr_eps / params.reference_strain) / n)
                } else {
                    SymTensor6::zero()
                }
            };
            (grad, SymTensor6::zero())
        }
    }
}

fn direction_by_index(
    params: &MaterialParams,
    eps: &SymTensor6,
    index: usize,
) -> Result<Option<SymTensor6>, ConstitutiveError> {
    let count = params.criterion.direction_count();
    if index >= count {
        return Err(ConstitutiveError::DirectionIndex { index, count });
    }
    Ok(match params.criterion {
        Criterion::R1 => {
            let dirs = directions_r1(eps);
            if index == 0 {
                Some(dirs.volumetric)
            } else {
                dirs.deviatoric
            }
        }
        Criterion::DruckerPrager => direction_dp(eps),
    })
}

/// Strength projected onto eigenstrain direction `index`, i.e.
/// `Gᵢ : ∂F_d/∂η` (degradable) and `Gᵢ : ∂F_i/∂η` (intact) evaluated at
/// `η = Σ λⱼ Gⱼ(ε)`. Multipliers of unavailable directions are ignored.
pub fn projected_strength(
    params: &MaterialParams,
    eps: &SymTensor6,
    index: usize,
    multipliers: &[f64],
) -> Result<ProjectedStrength, ConstitutiveError> {
    let g = direction_by_index(params, eps, index)?
        .ok_or(ConstitutiveError::UnavailableDirection(index))?;
    let mut eta = SymTensor6::zero();
    for (j, &lambda) in multipliers
        .iter()
        .enumerate()
        .take(params.criterion.direction_count())
    {
        if let Some(gj) = direction_by_index(params, eps, j)? {
            eta += gj * lambda;
        }
    }
    let (d_fd, d_fi) = potential_gradients(params, eps, &eta);
    Ok(ProjectedStrength {
        degradable: g.dot(&d_fd),
        intact: g.dot(&d_fi),
    })
}

/// One eigenstrain direction with everything the return map and its
/// consistent tangent need: the direction, its strain Jacobian, the projected
/// strength and the strength's strain gradient.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Direction {
    pub g: SymTensor6,
    /// `∂g/∂ε` (row i, column j = ∂gᵢ/∂εⱼ)
    pub jacobian: Matrix6,
    /// projected strength before degradation
    pub strength: f64,
    /// `∂strength/∂ε`
    pub strength_gradient: SymTensor6,
    pub degradable: bool,
}

impl Direction {
    pub fn effective_strength(&self, degradation: f64) -> f64 {
        if self.degradable {
            degradation * self.strength
        } else {
            self.strength
        }
    }
}

/// `(I − g gᵀ)·Q / n`, the Jacobian of `Qε/‖Qε‖` for a projector `Q`.
fn normalization_jacobian(g: &SymTensor6, norm: f64, projector: &Matrix6) -> Matrix6 {
    (*projector - g.outer(g).matmul(projector)).scaled(1.0 / norm)
}

/// Closed-form directions for the return map. Slot `i` is `None` when the
/// direction is unavailable for this strain.
pub(crate) fn directions(params: &MaterialParams, eps: &SymTensor6) -> [Option<Direction>; 2] {
    let ft = params.tensile_strength;
    let fs = params.shear_strength;
    match params.criterion {
        Criterion::R1 => {
            let sign = trace_sign(eps);
            let volumetric = Direction {
                g: SymTensor6::identity() * (sign / 3.0),
                jacobian: Matrix6::zero(),
                strength: if sign > 0.0 {
                    ft
                } else {
                    params.compressive_penalty * ft
                },
                strength_gradient: SymTensor6::zero(),
                degradable: sign > 0.0,
            };
            let deviatoric = unit_deviator(eps).map(|(g, n)| Direction {
                g,
                jacobian: normalization_jacobian(&g, n, &Matrix6::deviatoric_projector()),
                strength: fs,
                strength_gradient: SymTensor6::zero(),
                degradable: true,
            });
            [Some(volumetric), deviatoric]
        }
        Criterion::DruckerPrager => {
            let tr_eps = eps.trace();
            let dir = if tr_eps >= 0.0 {
                let n = eps.norm();
                (n >= DEGENERATE_NORM).then(|| {
                    let g = *eps * (1.0 / n);
                    let jacobian = normalization_jacobian(&g, n, &Matrix6::identity());
                    let tr_g = g.trace();
                    let dev_g = g.deviator();
                    let s = (ft * ft * tr_g * tr_g + fs * fs * dev_g.dot(&dev_g)).sqrt();
                    let ds_dg =
                        (SymTensor6::identity() * (ft * ft * tr_g) + dev_g * (fs * fs)) * (1.0 / s);
                    Direction {
                        g,
                        jacobian,
                        strength: s,
                        strength_gradient: jacobian.apply_transpose(&ds_dg),
                        degradable: true,
                    }
                })
            } else {
                unit_deviator(eps).map(|(g, n)| Direction {
                    g,
                    jacobian: normalization_jacobian(&g, n, &Matrix6::deviatoric_projector()),
                    strength: fs * (1.0 - tr_eps / params.reference_strain),
                    strength_gradient: SymTensor6::identity() * (-fs / params.reference_strain),
                    degradable: true,
                })
            };
            [dir, None]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::SQRT_2;

    fn dp_params() -> MaterialParams {
        MaterialParams {
            criterion: Criterion::DruckerPrager,
            ..MaterialParams::default()
        }
    }

    #[test]
    fn r1_direction_examples() {
        let e = 1e-3;
        let d = directions_r1(&SymTensor6([e, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(d.volumetric, SymTensor6::identity() * (1.0 / 3.0));
        let g2 = d.deviatoric.unwrap();
        let expected = SymTensor6([2.0, -1.0, -1.0, 0.0, 0.0, 0.0]) * (1.0 / 6f64.sqrt());
        assert!((g2 - expected).norm() < 1e-15);

        let d = directions_r1(&(SymTensor6::identity() * (-e / 3.0)));
        assert_eq!(d.volumetric, SymTensor6::identity() * (-1.0 / 3.0));
        assert!(d.deviatoric.is_none());

        let shear = SymTensor6([0.0, 0.0, 0.0, 0.0, 0.0, SQRT_2 * e]);
        let d = directions_r1(&shear);
        assert_eq!(d.volumetric, SymTensor6::identity() * (1.0 / 3.0));
        assert!(
            (d.deviatoric.unwrap() - SymTensor6([0.0, 0.0, 0.0, 0.0, 0.0, 1.0])).norm() < 1e-15
        );
        assert!((d.volumetric.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dp_direction_examples() {
        let e = 1e-3;
        let g = direction_dp(&SymTensor6([e, 0.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((g - SymTensor6([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
        assert!(direction_dp(&(SymTensor6::identity() * (-e / 3.0))).is_none());
        assert!(direction_dp(&SymTensor6::zero()).is_none());
        let g = direction_dp(&SymTensor6([-2e-3, 1e-3, 0.0, 0.0, 0.0, SQRT_2 * 5e-4])).unwrap();
        assert!(g.trace().abs() < 1e-15);
        assert!((g.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projected_strength_examples() {
        let dp = dp_params();
        let uni = SymTensor6([1e-3, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let s = projected_strength(&dp, &uni, 0, &[0.0]).unwrap();
        assert!((s.degradable - 150e6 * (5.0f64 / 3.0).sqrt()).abs() < 1e-3);
        assert!((s.degradable - 193.649_167e6).abs() < 1.0);
        assert_eq!(s.intact, 0.0);

        // cross-check with a finite difference of F_d along G
        let g = direction_dp(&uni).unwrap();
        let h = 1e-6;
        let fd = (degradable_potential(&dp, &uni, &(g * (1e-3 + h)))
            - degradable_potential(&dp, &uni, &(g * (1e-3 - h))))
            / (2.0 * h);
        assert!((fd - s.degradable).abs() < 1e-6 * s.degradable);

        let r1 = MaterialParams::default();
        let eps = SymTensor6([1e-3, -2e-4, 0.0, 0.0, 0.0, 3e-4]);
        let s2 = projected_strength(&r1, &eps, 1, &[0.0, 0.0]).unwrap();
        assert!((s2.degradable - 150e6).abs() < 1e-6);
        let s1 = projected_strength(&r1, &eps, 0, &[0.0, 0.0]).unwrap();
        assert!((s1.degradable - 150e6).abs() < 1e-6);
        assert_eq!(s1.intact, 0.0);

        let comp = SymTensor6::identity() * (-1e-3);
        let s1 = projected_strength(&r1, &comp, 0, &[1e-5, 0.0]).unwrap();
        assert_eq!(s1.degradable, 0.0);
        assert!((s1.intact - 1e6 * 150e6).abs() < 1.0);
        assert!(matches!(
            projected_strength(&r1, &comp, 1, &[0.0, 0.0]),
            Err(ConstitutiveError::UnavailableDirection(1))
        ));
        assert!(projected_strength(&dp, &comp, 1, &[0.0]).is_err());
    }

    /// The closed-form directions used by the return map agree with the
    /// generic potential-gradient projection.
    #[test]
    fn closed_form_strengths_match_gradients() {
        let mut params = dp_params();
        params.reference_strain = 1e-3;
        let samples = [
            SymTensor6([1e-3, -3e-4, 0.0, 0.0, 0.0, 2e-4]),
            SymTensor6([-1e-3, 3e-4, 0.0, 0.0, 0.0, 2e-4]),
            SymTensor6([2e-4, 1e-4, 5e-5, 1e-5, -2e-5, 3e-5]),
        ];
        for crit in [Criterion::R1, Criterion::DruckerPrager] {
            params.criterion = crit;
            for eps in &samples {
                let dirs = directions(&params, eps);
                for (i, d) in dirs.iter().enumerate() {
                    if let Some(d) = d {
                        let lambdas = [3e-4, 1e-4];
                        let s = projected_strength(&params, eps, i, &lambdas).unwrap();
                        let expect = if d.degradable { s.degradable } else { s.intact };
                        assert!(
                            (d.strength - expect).abs() < 1e-6 * d.strength,
                            "{crit:?} {i}"
                        );
                    }
                }
            }
        }
    }

    /// Direction Jacobians and strength gradients against central differences.
    #[test]
    fn direction_derivatives_match_finite_differences() {
        let mut params = dp_params();
        params.reference_strain = 2e-3;
        let samples = [
            SymTensor6([1e-3, -3e-4, 0.0, 0.0, 0.0, 2e-4]),
            SymTensor6([-1e-3, 3e-4, 0.0, 0.0, 0.0, 2e-4]),
            SymTensor6([2e-4, 1e-4, 5e-5, 1e-5, -2e-5, 3e-5]),
        ];
        for crit in [Criterion::R1, Criterion::DruckerPrager] {
            params.criterion = crit;
            for eps in &samples {
                let base = directions(&params, eps);
                let h = 1e-7 * eps.norm();
                for j in 0..6 {
                    let mut ep = *eps;
                    let mut em = *eps;
                    ep[j] += h;
                    em[j] -= h;
                    let dp = directions(&params, &ep);
                    let dm = directions(&params, &em);
                    for k in 0..2 {
                        let (Some(b), Some(p), Some(m)) = (base[k], dp[k], dm[k]) else {
                            continue;
                        };
                        let dg = (p.g - m.g) * (1.0 / (2.0 * h));
                        let col = b.jacobian.column(j);
                        assert!((dg - col).norm() <= 1e-6 * col.norm().max(1.0 / eps.norm()));
                        let ds = (p.strength - m.strength) / (2.0 * h);
                        let scale = b.strength / eps.norm();
                        assert!((ds - b.strength_gradient[j]).abs() <= 1e-6 * scale);
                    }
                }
            }
        }
    }
}
