use super::{strain_at_ip, ElementGeometry, IpGeometry, IPS_PER_ELEMENT};
use crate::constitutive::{return_map, IpState, MaterialParams, ReturnMapResult};
use crate::error::AssemblyError;
use crate::tensor::{Matrix6, SymTensor6, SQRT_2};

/// Mandel rows carrying plane-strain strain.
const PLANE: [usize; 3] = [0, 1, 5];

/// Newmark coefficients on the consistent mass in the effective matrix:
/// `mass = ρ/(β Δt²)`, `damping = ρ c γ/(β Δt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dynamics {
    pub mass: f64,
    pub damping: f64,
    /// `ρ` and `ρ c`, the residual coefficients of `M ü` and `M u̇`
    pub density: f64,
    pub damping_density: f64,
}

/// What the global solver keeps from a return map.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IpResult {
    pub stress: SymTensor6,
    pub multipliers: [f64; 2],
    pub eigenstrain: SymTensor6,
    pub driving_force: f64,
}

impl From<&ReturnMapResult> for IpResult {
    fn from(r: &ReturnMapResult) -> Self {
        IpResult {
            stress: r.stress,
            multipliers: r.multipliers,
            eigenstrain: r.eigenstrain,
            driving_force: r.driving_force,
        }
    }
}

pub struct MomentumElement {
    pub residual: [f64; 18],
    /// Consistent tangent plus Newmark mass/damping terms.
    pub stiffness: [[f64; 18]; 18],
    /// Same with the fixed-direction (symmetric) material tangent, when asked for.
    pub projected: Option<[[f64; 18]; 18]>,
    pub ips: [IpResult; IPS_PER_ELEMENT],
    /// Whether any integration point has an active direction.
    pub inelastic: bool,
}

/// `Bᵀ D B · dv` accumulated into `k`, using only the plane-strain rows and
/// columns of `D`.
fn add_material_stiffness(k: &mut [[f64; 18]; 18], geom: &IpGeometry, d: &Matrix6) {
    let mut dr = [[0.0; 3]; 3];
    for (a, &i) in PLANE.iter().enumerate() {
        for (b, &j) in PLANE.iter().enumerate() {
            dr[a][b] = d.0[i][j] * geom.dv;
        }
    }
    // B columns: node k x → (∂x N, 0, ∂y N/√2), y → (0, ∂y N, ∂x N/√2)
    let mut bcols = [[0.0; 3]; 18];
    for (k, g) in geom.grad.iter().enumerate() {
        bcols[2 * k] = [g[0], 0.0, g[1] / SQRT_2];
        bcols[2 * k + 1] = [0.0, g[1], g[0] / SQRT_2];
    }
    // D·B columns
    let mut db = [[0.0; 3]; 18];
    for (c, col) in bcols.iter().enumerate() {
        for a in 0..3 {
            db[c][a] = dr[a][0] * col[0] + dr[a][1] * col[1] + dr[a][2] * col[2];
        }
    }
    for (r, brow) in bcols.iter().enumerate() {
        for (c, dbc) in db.iter().enumerate() {
            k[r][c] += brow[0] * dbc[0] + brow[1] * dbc[1] + brow[2] * dbc[2];
        }
    }
}

fn add_internal_force(f: &mut [f64; 18], geom: &IpGeometry, stress: &SymTensor6) {
    let (sxx, syy, sxy) = (stress[0], stress[1], stress[5] / SQRT_2);
    for (k, g) in geom.grad.iter().enumerate() {
        f[2 * k] += (g[0] * sxx + g[1] * sxy) * geom.dv;
        f[2 * k + 1] += (g[1] * syy + g[0] * sxy) * geom.dv;
    }
}

/// Scalar consistent mass `∫ N Nᵀ dΩ` (density 1, one component).
fn scalar_mass(geom: &ElementGeometry) -> [[f64; 9]; 9] {
    let mut m = [[0.0; 9]; 9];
    for ip in geom {
        for a in 0..9 {
            let na = ip.n[a] * ip.dv;
            for b in 0..9 {
                m[a][b] += na * ip.n[b];
            }
        }
    }
    m
}

/// Consistent mass `ρ ∫ Nᵀ N dΩ` for both displacement components.
pub fn element_mass(geom: &ElementGeometry, density: f64) -> [[f64; 18]; 18] {
    let m = scalar_mass(geom);
    let mut out = [[0.0; 18]; 18];
    for a in 0..9 {
        for b in 0..9 {
            out[2 * a][2 * b] = density * m[a][b];
            out[2 * a + 1][2 * b + 1] = density * m[a][b];
        }
    }
    out
}

/// Elastic element stiffness `∫ Bᵀ C B dΩ`.
pub fn stress_divergence_matrix(geom: &ElementGeometry, stiffness: &Matrix6) -> [[f64; 18]; 18] {
    let mut k = [[0.0; 18]; 18];
    for ip in geom {
        add_material_stiffness(&mut k, ip, stiffness);
    }
    k
}

/// Residual and tangent of the momentum balance on one element.
///
/// `residual = ∫ Bᵀσ + ρ c Nᵀ N u̇ + ρ Nᵀ N ü dΩ` (tractions are added
/// globally). σ and the material tangent come from the return map with the
/// phase field interpolated to each integration point.
#[allow(clippy::too_many_arguments)]
pub fn momentum_element(
    element: usize,
    geom: &ElementGeometry,
    u_el: &[f64; 18],
    rates: Option<(&[f64; 18], &[f64; 18])>,
    phi_el: &[f64; 9],
    params: &MaterialParams,
    states: &[IpState],
    dynamics: Option<&Dynamics>,
    want_projected: bool,
) -> Result<MomentumElement, AssemblyError> {
    let mut residual = [0.0; 18];
    let mut stiffness = [[0.0; 18]; 18];
    let mut projected = want_projected.then_some([[0.0; 18]; 18]);
    let mut ips = [IpResult::default(); IPS_PER_ELEMENT];
    let mut inelastic = false;
    for (ip, g) in geom.iter().enumerate() {
        let eps = strain_at_ip(g, u_el);
        let phi: f64 = g.n.iter().zip(phi_el).map(|(n, p)| n * p).sum();
        let r = return_map(params, &eps, phi, &states[ip]).map_err(|source| {
            AssemblyError::ReturnMap {
                element,
                ip,
                source,
            }
        })?;
        inelastic |= !r.is_elastic();
        add_internal_force(&mut residual, g, &r.stress);
        add_material_stiffness(&mut stiffness, g, &r.tangent);
        if let Some(p) = projected.as_mut() {
            add_material_stiffness(p, g, &r.projected_tangent);
        }
        ips[ip] = IpResult::from(&r);
    }
    if let Some(dy) = dynamics {
        let m = scalar_mass(geom);
        let (v_el, a_el) = rates.unwrap_or((&[0.0; 18], &[0.0; 18]));
        let coeff = dy.mass + dy.damping;
        for a in 0..9 {
            for b in 0..9 {
                for c in 0..2 {
                    let (i, j) = (2 * a + c, 2 * b + c);
                    residual[i] += m[a][b] * (dy.density * a_el[j] + dy.damping_density * v_el[j]);
                    stiffness[i][j] += coeff * m[a][b];
                    if let Some(p) = projected.as_mut() {
                        p[i][j] += coeff * m[a][b];
                    }
                }
            }
        }
    }
    Ok(MomentumElement {
        residual,
        stiffness,
        projected,
        ips,
        inelastic,
    })
}

/// Phase-field element matrix and right-hand side:
/// `∫ (G_c/ℓ + 2(1−κ)𝓕) Nᵀ N + G_c ℓ ∇Nᵀ ∇N dΩ` and `∫ 2(1−κ)𝓕 Nᵀ dΩ`.
pub fn phasefield_element(
    geom: &ElementGeometry,
    history: &[f64; IPS_PER_ELEMENT],
    params: &MaterialParams,
) -> ([[f64; 9]; 9], [f64; 9]) {
    let gc = params.fracture_energy;
    let ell = params.length_scale;
    let drive = 2.0 * (1.0 - params.residual_strength);
    let mut k = [[0.0; 9]; 9];
    let mut f = [0.0; 9];
    for (ip, h) in geom.iter().zip(history) {
        let reaction = (gc / ell + drive * h) * ip.dv;
        let diffusion = gc * ell * ip.dv;
        for a in 0..9 {
            f[a] += drive * h * ip.n[a] * ip.dv;
            for b in 0..9 {
                k[a][b] += reaction * ip.n[a] * ip.n[b]
                    + diffusion * (ip.grad[a][0] * ip.grad[b][0] + ip.grad[a][1] * ip.grad[b][1]);
            }
        }
    }
    (k, f)
}
