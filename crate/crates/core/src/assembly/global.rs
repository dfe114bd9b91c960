use super::element::{momentum_element, phasefield_element, Dynamics, IpResult};
use super::sparse::{CscMatrix, SparsePattern};
use super::{Discretization, SystemVectors, IPS_PER_ELEMENT};
use crate::constitutive::{IpState, MaterialParams};
use crate::error::AssemblyError;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentumOptions {
    pub dynamics: Option<Dynamics>,
    /// Also assemble the matrix built from the fixed-direction tangent.
    pub projected: bool,
}

/// Global momentum residual (all dofs, external forces excluded), tangent
/// on the free dofs of `pattern`, and the per-ip constitutive results.
#[derive(Clone, Debug)]
pub struct MomentumAssembly {
    pub residual: Vec<f64>,
    pub matrix: CscMatrix,
    pub projected: Option<CscMatrix>,
    pub ips: Vec<IpResult>,
    pub inelastic_ips: usize,
}

impl MomentumAssembly {
    pub fn new(disc: &Discretization, pattern: &SparsePattern, projected: bool) -> Self {
        MomentumAssembly {
            residual: vec![0.0; disc.dofs.n_u()],
            matrix: pattern.zero_matrix(),
            projected: projected.then(|| pattern.zero_matrix()),
            ips: vec![IpResult::default(); disc.ip_count()],
            inelastic_ips: 0,
        }
    }
}

/// Element loop in mesh order; accumulation order is fixed, so repeated
/// assemblies of the same state are bitwise identical.
pub fn assemble_momentum(
    out: &mut MomentumAssembly,
    disc: &Discretization,
    pattern: &SparsePattern,
    state: &SystemVectors,
    params: &MaterialParams,
    ip_states: &[IpState],
    options: &MomentumOptions,
) -> Result<(), AssemblyError> {
    out.residual.iter_mut().for_each(|v| *v = 0.0);
    out.matrix.values.iter_mut().for_each(|v| *v = 0.0);
    if options.projected && out.projected.is_none() {
        out.projected = Some(pattern.zero_matrix());
    }
    if let Some(p) = out.projected.as_mut() {
        p.values.iter_mut().for_each(|v| *v = 0.0);
    }
    out.inelastic_ips = 0;
    for (e, geom) in disc.geometry.iter().enumerate() {
        let u_el = disc.gather_u(e, &state.u);
        let v_el = disc.gather_u(e, &state.velocity);
        let a_el = disc.gather_u(e, &state.acceleration);
        let phi_el = disc.gather_phi(e, &state.phi);
        let range = e * IPS_PER_ELEMENT..(e + 1) * IPS_PER_ELEMENT;
        let el = momentum_element(
            e,
            geom,
            &u_el,
            Some((&v_el, &a_el)),
            &phi_el,
            params,
            &ip_states[range.clone()],
            options.dynamics.as_ref(),
            options.projected,
        )?;
        for (k, &n) in disc.mesh.elements[e].iter().enumerate() {
            out.residual[2 * n] += el.residual[2 * k];
            out.residual[2 * n + 1] += el.residual[2 * k + 1];
        }
        pattern.add_element(&mut out.matrix.values, e, &el.stiffness);
        if let (Some(p), Some(pe)) = (out.projected.as_mut(), el.projected.as_ref()) {
            pattern.add_element(&mut p.values, e, pe);
        }
        out.ips[range].copy_from_slice(&el.ips);
        out.inelastic_ips += el
            .ips
            .iter()
            .filter(|r| r.multipliers.iter().any(|&l| l > 0.0))
            .count();
    }
    Ok(())
}

/// Phase-field matrix and right-hand side for the per-ip driving force
/// `history` (J/m³).
pub fn assemble_phasefield(
    disc: &Discretization,
    pattern: &SparsePattern,
    history: &[f64],
    params: &MaterialParams,
    matrix: &mut CscMatrix,
    rhs: &mut [f64],
) {
    matrix.values.iter_mut().for_each(|v| *v = 0.0);
    rhs.iter_mut().for_each(|v| *v = 0.0);
    for (e, geom) in disc.geometry.iter().enumerate() {
        let mut h = [0.0; IPS_PER_ELEMENT];
        h.copy_from_slice(&history[e * IPS_PER_ELEMENT..(e + 1) * IPS_PER_ELEMENT]);
        let (k, f) = phasefield_element(geom, &h, params);
        pattern.add_element(&mut matrix.values, e, &k);
        for (a, &n) in disc.mesh.elements[e].iter().enumerate() {
            rhs[n] += f[a];
        }
    }
}

/// Phase field interpolated to every integration point.
pub fn ip_phase_field(disc: &Discretization, phi: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(disc.ip_count());
    for (e, geom) in disc.geometry.iter().enumerate() {
        let phi_el = disc.gather_phi(e, phi);
        for g in geom {
            out.push(g.n.iter().zip(&phi_el).map(|(n, p)| n * p).sum());
        }
    }
    out
}
