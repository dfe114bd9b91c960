use super::criteria::{degradable_potential, direction_dp, directions_r1, intact_potential};
use super::{Criterion, MaterialParams};
use crate::tensor::SymTensor6;

/// Eigenstrain `Σ λᵢ Gᵢ(ε)`; multipliers of unavailable directions are ignored.
pub(crate) fn eigenstrain(
    params: &MaterialParams,
    eps: &SymTensor6,
    multipliers: &[f64],
) -> SymTensor6 {
    let lambda = |i: usize| multipliers.get(i).copied().unwrap_or(0.0);
    match params.criterion {
        Criterion::R1 => {
            let dirs = directions_r1(eps);
            let mut eta = dirs.volumetric * lambda(0);
            if let Some(g) = dirs.deviatoric {
                eta += g * lambda(1);
            }
            eta
        }
        Criterion::DruckerPrager => direction_dp(eps).map_or(SymTensor6::zero(), |g| g * lambda(0)),
    }
}

/// Local energy density `½K tr²(ε−η) + μ‖dev(ε−η)‖² + d(φ)·F_d(η) + F_i(η)`
/// with `η = Σ λᵢ Gᵢ(ε)`, in J/m³. The return map minimizes this over `λ ≥ 0`
/// (up to the small residual-stiffness regularization).
pub fn pointwise_energy(
    params: &MaterialParams,
    eps: &SymTensor6,
    multipliers: &[f64],
    phi: f64,
) -> f64 {
    let eta = eigenstrain(params, eps, multipliers);
    // F_i sees only the volumetric multiplier: the deviatoric direction is
    // traceless, and its round-off trace would be amplified by the penalty
    let volumetric = match params.criterion {
        Criterion::R1 => {
            directions_r1(eps).volumetric * multipliers.first().copied().unwrap_or(0.0)
        }
        Criterion::DruckerPrager => eta,
    };
    let elastic = *eps - eta;
    let m = &params.moduli;
    let tr = elastic.trace();
    let dev = elastic.deviator();
    0.5 * m.bulk * tr * tr
        + m.shear * dev.dot(&dev)
        + params.degradation(phi) * degradable_potential(params, eps, &eta)
        + intact_potential(params, &volumetric)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_multipliers_give_elastic_energy() {
        let p = MaterialParams::default();
        let eps = SymTensor6([1e-3, -4e-4, 0.0, 0.0, 0.0, 2e-4]);
        let sigma = p.moduli.stress(&eps);
        let expected = 0.5 * eps.dot(&sigma);
        let e = pointwise_energy(&p, &eps, &[0.0, 0.0], 0.3);
        assert!((e - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn hydrostatic_minimum_brackets() {
        let p = MaterialParams::default();
        let e = 2e-3;
        let eps = SymTensor6::identity() * (e / 3.0);
        let k = p.moduli.bulk;
        let lambda = (k * e - p.tensile_strength) / (k * (1.0 + p.residual_stiffness));
        let at = |l: f64| pointwise_energy(&p, &eps, &[l, 0.0], 0.0);
        assert!(at(lambda) <= at(0.0));
        assert!(at(lambda) <= at(0.9 * lambda));
        assert!(at(lambda) <= at(1.1 * lambda));
    }

    #[test]
    fn compressive_penalty_enters_undegraded() {
        let p = MaterialParams::default();
        let eps = SymTensor6::identity() * (-1e-3);
        let l = 1e-9;
        let with = pointwise_energy(&p, &eps, &[l, 0.0], 1.0);
        let without = pointwise_energy(&p, &eps, &[0.0, 0.0], 1.0);
        // the penalty slope p·f_t dominates the elastic release
        assert!(with - without > 0.5 * p.compressive_penalty * p.tensile_strength * l);
    }
}
