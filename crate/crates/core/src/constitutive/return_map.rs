//! Local solve for the eigenstrain multipliers.
//!
//! On a fixed branch the residual of active direction `a` is affine in the
//! multipliers:
//!
//! `r_a = Σ_b S_ab λ_b − g_a·σ_trial + d·s_a`,  `S_ab = g_a·C·g_b + κ_t K δ_ab`,
//!
//! so the complementarity problem is a small LCP with a symmetric positive
//! definite matrix. The Schur matrix `S` is at most 2×2; the full Newton
//! matrix including the stress unknowns is never formed.

use super::criteria::{degradable_potential, directions, Direction};
use super::{IpState, MaterialParams};
use crate::error::ConstitutiveError;
use crate::tensor::{Matrix6, SymTensor6};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReturnMapMethod {
    /// Elastic trial, then activate/deactivate directions and solve the
    /// linear system of the current set until consistent.
    #[default]
    ActiveSet,
    /// Semismooth Newton iteration on `min(λ, r/S_aa) = 0`.
    Newton,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnMapSettings {
    pub method: ReturnMapMethod,
    /// Residual tolerance relative to the tensile strength.
    pub relative_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ReturnMapSettings {
    fn default() -> Self {
        ReturnMapSettings {
            method: ReturnMapMethod::ActiveSet,
            relative_tolerance: 1e-10,
            max_iterations: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnMapResult {
    pub stress: SymTensor6,
    pub multipliers: [f64; 2],
    pub eigenstrain: SymTensor6,
    /// Exact derivative of the returned stress with respect to total strain,
    /// including the strain dependence of the directions and strengths.
    pub tangent: Matrix6,
    /// `C − Σ (C gₐ)(S⁻¹)ₐᵦ(C gᵦ)ᵀ`: the tangent with directions held fixed.
    /// Symmetric positive definite; used to precondition global solves.
    pub projected_tangent: Matrix6,
    /// F_d at the converged eigenstrain, J/m³.
    pub driving_force: f64,
    pub active: [bool; 2],
    pub available: [bool; 2],
    pub iterations: usize,
}

impl ReturnMapResult {
    pub fn is_elastic(&self) -> bool {
        !self.active[0] && !self.active[1]
    }
}

/// Return map with default settings. `state.warm_start` seeds the active set
/// only; the result does not depend on it.
pub fn return_map(
    params: &MaterialParams,
    eps: &SymTensor6,
    phi: f64,
    state: &IpState,
) -> Result<ReturnMapResult, ConstitutiveError> {
    return_map_with(params, eps, phi, state, &ReturnMapSettings::default())
}

struct Local {
    dirs: [Option<Direction>; 2],
    /// `C gₐ`
    cg: [SymTensor6; 2],
    /// `S`, zero rows/columns for unavailable directions
    schur: [[f64; 2]; 2],
    /// `gₐ·σ_trial − d·sₐ`, the trial overstress
    overstress: [f64; 2],
}

impl Local {
    fn available(&self, a: usize) -> bool {
        self.dirs[a].is_some()
    }

    /// `r_a = Σ_b S_ab λ_b − overstress_a`; positive means inside the surface.
    fn residual(&self, a: usize, lambda: &[f64; 2]) -> f64 {
        self.schur[a][0] * lambda[0] + self.schur[a][1] * lambda[1] - self.overstress[a]
    }

    /// Solve `S_AA λ_A = overstress_A` for the set `active`.
    fn solve_set(&self, active: [bool; 2]) -> [f64; 2] {
        match active {
            [true, true] => {
                let [[a, b], [c, d]] = self.schur;
                let det = a * d - b * c;
                let [r0, r1] = self.overstress;
                [(d * r0 - b * r1) / det, (a * r1 - c * r0) / det]
            }
            [true, false] => [self.overstress[0] / self.schur[0][0], 0.0],
            [false, true] => [0.0, self.overstress[1] / self.schur[1][1]],
            [false, false] => [0.0, 0.0],
        }
    }
}

pub fn return_map_with(
    params: &MaterialParams,
    eps: &SymTensor6,
    phi: f64,
    state: &IpState,
    settings: &ReturnMapSettings,
) -> Result<ReturnMapResult, ConstitutiveError> {
    if !eps.is_finite() || !phi.is_finite() {
        return Err(ConstitutiveError::NonFiniteInput);
    }
    let stiffness = params.moduli.stiffness();
    let d = params.degradation(phi);
    let tol = settings.relative_tolerance * params.tensile_strength;
    let reg = params.residual_stiffness * params.moduli.bulk;

    let dirs = directions(params, eps);
    let trial = stiffness.apply(eps);
    let mut local = Local {
        dirs,
        cg: [SymTensor6::zero(); 2],
        schur: [[0.0; 2]; 2],
        overstress: [0.0; 2],
    };
    for a in 0..2 {
        if let Some(da) = &dirs[a] {
            local.cg[a] = stiffness.apply(&da.g);
            local.overstress[a] = da.g.dot(&trial) - da.effective_strength(d);
        }
    }
    for a in 0..2 {
        for b in 0..2 {
            if let (Some(da), Some(_)) = (&dirs[a], &dirs[b]) {
                local.schur[a][b] = da.g.dot(&local.cg[b]) + if a == b { reg } else { 0.0 };
            }
        }
    }

    let (lambda, iterations) = match settings.method {
        ReturnMapMethod::ActiveSet => active_set(&local, state, tol, settings.max_iterations)?,
        ReturnMapMethod::Newton => semismooth_newton(&local, state, tol, settings.max_iterations)?,
    };
    let active = [lambda[0] > 0.0, lambda[1] > 0.0];

    let mut eta = SymTensor6::zero();
    for a in 0..2 {
        if let Some(da) = &dirs[a] {
            eta += da.g * lambda[a];
        }
    }
    let stress = stiffness.apply(&(*eps - eta));
    let (tangent, projected_tangent) = tangents(&stiffness, &local, &lambda, active, &stress, d);

    Ok(ReturnMapResult {
        stress,
        multipliers: lambda,
        eigenstrain: eta,
        tangent,
        projected_tangent,
        driving_force: degradable_potential(params, eps, &eta),
        active,
        available: [dirs[0].is_some(), dirs[1].is_some()],
        iterations,
    })
}

fn active_set(
    local: &Local,
    state: &IpState,
    tol: f64,
    max_iterations: usize,
) -> Result<([f64; 2], usize), ConstitutiveError> {
    let mut set = [false; 2];
    for a in 0..2 {
        set[a] = local.available(a) && (local.overstress[a] > tol || state.warm_start[a] > 0.0);
    }
    let mut lambda = [0.0; 2];
    for iteration in 1..=max_iterations {
        lambda = local.solve_set(set);
        // drop the most negative multiplier first
        let worst = (0..2)
            .filter(|&a| set[a] && lambda[a] <= 0.0)
            .min_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
        if let Some(a) = worst {
            set[a] = false;
            continue;
        }
        let violated = (0..2)
            .filter(|&a| local.available(a) && !set[a] && local.residual(a, &lambda) < -tol)
            .min_by(|&a, &b| {
                local
                    .residual(a, &lambda)
                    .total_cmp(&local.residual(b, &lambda))
            });
        match violated {
            Some(a) => set[a] = true,
            None => return Ok((lambda, iteration)),
        }
    }
    Err(not_converged(local, &lambda, max_iterations))
}

/// Complementarity residual `min(λ_a, r_a/S_aa)` per available direction.
fn complementarity(local: &Local, lambda: &[f64; 2]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for a in 0..2 {
        if local.available(a) {
            out[a] = lambda[a].min(local.residual(a, lambda) / local.schur[a][a]);
        }
    }
    out
}

fn semismooth_newton(
    local: &Local,
    state: &IpState,
    tol: f64,
    max_iterations: usize,
) -> Result<([f64; 2], usize), ConstitutiveError> {
    let mut lambda = [0.0; 2];
    for a in 0..2 {
        if local.available(a) {
            lambda[a] = state.warm_start[a].max(0.0);
        }
    }
    for iteration in 1..=max_iterations {
        let phi = complementarity(local, &lambda);
        let scaled_ok =
            (0..2).all(|a| !local.available(a) || (phi[a] * local.schur[a][a]).abs() <= tol);
        if scaled_ok && lambda.iter().all(|&l| l >= 0.0) {
            for l in &mut lambda {
                *l = l.max(0.0);
            }
            return Ok((lambda, iteration));
        }
        // generalized Jacobian of the min function
        let mut jac = [[0.0; 2]; 2];
        for a in 0..2 {
            if !local.available(a) {
                jac[a][a] = 1.0;
                continue;
            }
            if lambda[a] <= local.residual(a, &lambda) / local.schur[a][a] {
                jac[a][a] = 1.0;
            } else {
                for b in 0..2 {
                    jac[a][b] = local.schur[a][b] / local.schur[a][a];
                }
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let step = [
            (jac[1][1] * phi[0] - jac[0][1] * phi[1]) / det,
            (jac[0][0] * phi[1] - jac[1][0] * phi[0]) / det,
        ];
        lambda[0] -= step[0];
        lambda[1] -= step[1];
    }
    Err(not_converged(local, &lambda, max_iterations))
}

fn not_converged(local: &Local, lambda: &[f64; 2], iterations: usize) -> ConstitutiveError {
    let phi = complementarity(local, lambda);
    ConstitutiveError::NotConverged {
        iterations,
        residual: (phi[0] * local.schur[0][0]).hypot(phi[1] * local.schur[1][1]),
        multipliers: *lambda,
    }
}

/// Exact and fixed-direction tangents of the returned stress.
fn tangents(
    stiffness: &Matrix6,
    local: &Local,
    lambda: &[f64; 2],
    active: [bool; 2],
    stress: &SymTensor6,
    degradation: f64,
) -> (Matrix6, Matrix6) {
    let idx: Vec<usize> = (0..2).filter(|&a| active[a]).collect();
    if idx.is_empty() {
        return (*stiffness, *stiffness);
    }
    // inverse of the active block of S
    let inv = match idx.as_slice() {
        [a] => [[1.0 / local.schur[*a][*a], 0.0], [0.0, 0.0]],
        _ => {
            let [[a, b], [c, d]] = local.schur;
            let det = a * d - b * c;
            [[d / det, -b / det], [-c / det, a / det]]
        }
    };
    let dir = |a: usize| {
        local.dirs[a]
            .as_ref()
            .expect("active direction is available")
    };

    let mut projected = *stiffness;
    for (p, &a) in idx.iter().enumerate() {
        for (q, &b) in idx.iter().enumerate() {
            projected = projected - local.cg[a].outer(&local.cg[b]).scaled(inv[p][q]);
        }
    }

    // ∂r_a/∂ε for every active direction
    let mut dr = [SymTensor6::zero(); 2];
    for (p, &a) in idx.iter().enumerate() {
        let da = dir(a);
        let mut r = -da.jacobian.apply_transpose(stress) - local.cg[a];
        for &b in &idx {
            r += dir(b).jacobian.apply_transpose(&local.cg[a]) * lambda[b];
        }
        let strength_scale = if da.degradable { degradation } else { 1.0 };
        r += da.strength_gradient * strength_scale;
        dr[p] = r;
    }
    let mut tangent = *stiffness;
    for (p, &b) in idx.iter().enumerate() {
        let mut dlambda = SymTensor6::zero();
        for q in 0..idx.len() {
            dlambda -= dr[q] * inv[p][q];
        }
        tangent = tangent
            - local.cg[b].outer(&dlambda)
            - stiffness.matmul(&dir(b).jacobian).scaled(lambda[b]);
    }
    (tangent, projected)
}

/// Largest `gₐ·σ − d·sₐ − κ_t K λₐ` over the available directions: the amount
/// by which the returned stress lies outside the regularized surface. At most
/// the solver tolerance for a converged result; `-∞` if no direction exists.
pub fn surface_excess(
    params: &MaterialParams,
    eps: &SymTensor6,
    phi: f64,
    result: &ReturnMapResult,
) -> f64 {
    let d = params.degradation(phi);
    let reg = params.residual_stiffness * params.moduli.bulk;
    directions(params, eps)
        .iter()
        .enumerate()
        .filter_map(|(a, dir)| {
            dir.as_ref().map(|da| {
                da.g.dot(&result.stress) - da.effective_strength(d) - reg * result.multipliers[a]
            })
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{pointwise_energy, Criterion};
    use crate::tensor::SQRT_2;
    use proptest::prelude::*;

    fn params(criterion: Criterion) -> MaterialParams {
        MaterialParams {
            criterion,
            ..MaterialParams::default()
        }
    }

    fn rm(p: &MaterialParams, eps: SymTensor6, phi: f64) -> ReturnMapResult {
        return_map(p, &eps, phi, &IpState::default()).unwrap()
    }

    #[test]
    fn zero_strain_is_elastic() {
        for c in [Criterion::R1, Criterion::DruckerPrager] {
            let p = params(c);
            let r = rm(&p, SymTensor6::zero(), 0.0);
            assert_eq!(r.stress, SymTensor6::zero());
            assert_eq!(r.multipliers, [0.0, 0.0]);
            assert_eq!(r.tangent, p.moduli.stiffness());
            assert_eq!(r.driving_force, 0.0);
        }
    }

    #[test]
    fn hydrostatic_tension_example() {
        let p = params(Criterion::R1);
        let e = 2e-3;
        let r = rm(&p, SymTensor6::identity() * (e / 3.0), 0.0);
        let k = p.moduli.bulk;
        let expected = (k * e - 150e6) / (k * (1.0 + 1e-9));
        assert!((r.multipliers[0] - expected).abs() < 1e-15);
        assert!((r.multipliers[0] - 1.1000e-3).abs() < 1e-7);
        assert!(r.active[0] && !r.active[1] && !r.available[1]);
        let mean = r.stress.trace() / 3.0;
        assert!((mean - 150e6).abs() < 1e-9 * k * 1e-3 + 1.0);
        assert!((r.driving_force - 150e6 * r.multipliers[0]).abs() < 1e-6);
    }

    #[test]
    fn deviatoric_example() {
        let p = params(Criterion::R1);
        let g = 1.5e-3 / SQRT_2;
        let eps = SymTensor6([g, -g, 0.0, 0.0, 0.0, 0.0]);
        assert!((eps.deviator().norm() - 1.5e-3).abs() < 1e-18);
        let r = rm(&p, eps, 0.0);
        let mu = p.moduli.shear;
        let expected = (2.0 * mu * 1.5e-3 - 150e6) / (2.0 * mu + 1e-9 * p.moduli.bulk);
        assert!((r.multipliers[1] - expected).abs() < 1e-15);
        // (230.769 − 150) MPa / 153.846 GPa
        assert!((r.multipliers[1] - 5.25e-4).abs() < 1e-9);
        assert_eq!(r.multipliers[0], 0.0);
    }

    #[test]
    fn dp_uniaxial_example() {
        let p = params(Criterion::DruckerPrager);
        let r = rm(&p, SymTensor6([1e-3, 0.0, 0.0, 0.0, 0.0, 0.0]), 0.0);
        let m = p.moduli.p_wave_modulus();
        let s = 150e6 * (5.0f64 / 3.0).sqrt();
        let expected = (m * 1e-3 - s) / (m + 1e-9 * p.moduli.bulk);
        assert!((r.multipliers[0] - expected).abs() < 1e-15);
        assert!((r.multipliers[0] - 2.8074e-4).abs() < 1e-8);
    }

    #[test]
    fn compression_keeps_non_penetration_at_full_damage() {
        let p = params(Criterion::R1);
        for e in [1e-4, 2e-3, 5e-2] {
            let r = rm(&p, SymTensor6::identity() * (-e / 3.0), 1.0);
            assert!(r.multipliers[0] <= 1e-9 * e);
            let expected = SymTensor6::identity() * (-p.moduli.bulk * e);
            assert!((r.stress - expected).norm() <= 1e-9 * expected.norm());
        }
    }

    #[test]
    fn newton_matches_active_set() {
        let newton = ReturnMapSettings {
            method: ReturnMapMethod::Newton,
            ..Default::default()
        };
        let samples = [
            SymTensor6([2e-3, 1e-3, 0.0, 0.0, 0.0, 5e-4]),
            SymTensor6([-2e-3, 1e-3, 0.0, 0.0, 0.0, 1e-3]),
            SymTensor6([1e-3, 1e-3, 0.0, 0.0, 0.0, 0.0]),
            SymTensor6([1e-4, 0.0, 0.0, 0.0, 0.0, 1e-5]),
        ];
        for c in [Criterion::R1, Criterion::DruckerPrager] {
            let mut p = params(c);
            p.reference_strain = 1e-3;
            for eps in samples {
                for phi in [0.0, 0.5, 1.0] {
                    let a = rm(&p, eps, phi);
                    let b = return_map_with(&p, &eps, phi, &IpState::default(), &newton).unwrap();
                    for i in 0..2 {
                        assert!(
                            (a.multipliers[i] - b.multipliers[i]).abs() < 1e-14,
                            "{c:?} {eps:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn warm_start_does_not_change_result() {
        let p = params(Criterion::R1);
        let eps = SymTensor6([1e-3, -5e-4, 0.0, 0.0, 0.0, 1e-4]);
        let cold = rm(&p, eps, 0.2);
        for warm in [[1.0, 0.0], [0.0, 1.0], [1e-3, 1e-3]] {
            let state = IpState {
                history: 0.0,
                warm_start: warm,
            };
            let hot = return_map(&p, &eps, 0.2, &state).unwrap();
            assert!((hot.multipliers[0] - cold.multipliers[0]).abs() < 1e-15);
            assert!((hot.multipliers[1] - cold.multipliers[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let p = params(Criterion::R1);
        let bad = SymTensor6([f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            return_map(&p, &bad, 0.0, &IpState::default()),
            Err(ConstitutiveError::NonFiniteInput)
        );
        assert!(return_map(&p, &SymTensor6::zero(), f64::INFINITY, &IpState::default()).is_err());
    }

    #[test]
    fn single_direction_tangent_matches_closed_form() {
        // with fixed directions (hydrostatic R1) the exact and closed forms agree
        let p = params(Criterion::R1);
        let r = rm(&p, SymTensor6::identity() * (2e-3 / 3.0), 0.0);
        let c = p.moduli.stiffness();
        let g = SymTensor6::identity() * (1.0 / 3.0);
        let cg = c.apply(&g);
        let denom = g.dot(&cg) + 1e-9 * p.moduli.bulk;
        let closed = c - cg.outer(&cg).scaled(1.0 / denom);
        assert!((r.tangent - closed).frobenius_norm() < 1e-12 * c.frobenius_norm());
        assert!((r.projected_tangent - closed).frobenius_norm() < 1e-12 * c.frobenius_norm());
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let mut p = params(Criterion::R1);
        p.reference_strain = 1e-3;
        let samples = [
            (SymTensor6([2e-3, 1e-3, 0.0, 0.0, 0.0, 5e-4]), 0.0),
            (SymTensor6([1e-3, -9e-4, 0.0, 0.0, 0.0, 5e-4]), 0.3),
            (SymTensor6([-2e-3, 1e-3, 0.0, 0.0, 0.0, 2e-3]), 0.9),
        ];
        for c in [Criterion::R1, Criterion::DruckerPrager] {
            p.criterion = c;
            for (eps, phi) in samples {
                let r = rm(&p, eps, phi);
                let h = 1e-7 * eps.norm().max(1e-6);
                for j in 0..6 {
                    let mut ep = eps;
                    let mut em = eps;
                    ep[j] += h;
                    em[j] -= h;
                    let fd = (rm(&p, ep, phi).stress - rm(&p, em, phi).stress) * (1.0 / (2.0 * h));
                    let col = r.tangent.column(j);
                    let err = (fd - col).norm() / r.tangent.frobenius_norm();
                    assert!(err < 1e-6, "{c:?} {eps:?} col {j}: {err:e}");
                }
            }
        }
    }

    #[test]
    fn r1_tangent_is_symmetric() {
        let p = params(Criterion::R1);
        let r = rm(&p, SymTensor6([2e-3, 1e-3, 0.0, 0.0, 0.0, 5e-4]), 0.4);
        assert!(r.active[0] && r.active[1]);
        assert!(r.tangent.max_asymmetry() < 1e-10 * r.tangent.frobenius_norm());
    }

    #[test]
    fn energy_is_lower_at_returned_multipliers() {
        let p = params(Criterion::DruckerPrager);
        let eps = SymTensor6([1e-3, 2e-4, 0.0, 0.0, 0.0, 3e-4]);
        let r = rm(&p, eps, 0.1);
        let l = r.multipliers[0];
        let e0 = pointwise_energy(&p, &eps, &[l], 0.1);
        for f in [0.0, 0.99, 1.01, 2.0] {
            assert!(e0 <= pointwise_energy(&p, &eps, &[l * f], 0.1) + 1e-9);
        }
    }

    fn strain() -> impl Strategy<Value = SymTensor6> {
        prop::array::uniform3(-3e-3..3e-3f64)
            .prop_map(|[xx, yy, xy]| SymTensor6::plane_strain(xx, yy, xy))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn results_are_admissible(eps in strain(), phi in 0.0..1.0f64, dp in any::<bool>()) {
            let mut p = params(if dp { Criterion::DruckerPrager } else { Criterion::R1 });
            p.reference_strain = 1e-3;
            let r = rm(&p, eps, phi);
            prop_assert!(r.multipliers.iter().all(|&l| l >= 0.0));
            prop_assert!(surface_excess(&p, &eps, phi, &r) <= 1e-6 * p.tensile_strength);
            let eta = crate::constitutive::energy::eigenstrain(&p, &eps, &r.multipliers);
            prop_assert!((eta - r.eigenstrain).norm() <= 1e-15 * eps.norm().max(1e-30));
            prop_assert!((r.stress - p.moduli.stress(&(eps - r.eigenstrain))).norm() <= 1e-6);
        }

        #[test]
        fn elastic_states_scale_linearly(eps in strain(), alpha in 1.0..1.5f64) {
            let p = params(Criterion::R1);
            let small = eps * 1e-3;
            let r1 = rm(&p, small, 0.0);
            let r2 = rm(&p, small * alpha, 0.0);
            prop_assume!(r1.is_elastic() && r2.is_elastic());
            prop_assert!((r2.stress - r1.stress * alpha).norm() <= 1e-12 * r2.stress.norm());
        }

        #[test]
        fn active_states_stay_on_surface(eps in strain(), alpha in 1.0..2.0f64) {
            let p = params(Criterion::R1);
            let r = rm(&p, eps * alpha, 0.0);
            prop_assume!(!r.is_elastic());
            let reg = p.residual_stiffness * p.moduli.bulk;
            let dirs = directions(&p, &(eps * alpha));
            for a in 0..2 {
                if r.active[a] {
                    let da = dirs[a].unwrap();
                    let f = da.g.dot(&r.stress) - da.effective_strength(1.0) - reg * r.multipliers[a];
                    prop_assert!(f.abs() <= 1e-6 * p.tensile_strength);
                }
            }
        }
    }
}
