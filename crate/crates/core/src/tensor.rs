//! Symmetric second-order tensors in Mandel notation and isotropic linear
//! elasticity.
//!
//! Components are ordered `(xx, yy, zz, √2·yz, √2·xz, √2·xy)`, so the plain
//! Euclidean inner product of two 6-vectors equals the double contraction of
//! the underlying 3×3 tensors.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::MaterialError;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Mandel vector of the second-order identity.
const IDENTITY: [f64; 6] = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0];

/// Symmetric tensor stored as a Mandel 6-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymTensor6(pub [f64; 6]);

impl SymTensor6 {
    pub const fn zero() -> Self {
        SymTensor6([0.0; 6])
    }

    pub const fn identity() -> Self {
        SymTensor6(IDENTITY)
    }

    /// Builds a tensor from its ordinary (unscaled) tensor components.
    pub fn from_tensor_components(xx: f64, yy: f64, zz: f64, yz: f64, xz: f64, xy: f64) -> Self {
        SymTensor6([xx, yy, zz, SQRT_2 * yz, SQRT_2 * xz, SQRT_2 * xy])
    }

    /// Plane-strain strain built from the in-plane tensor components.
    pub fn plane_strain(xx: f64, yy: f64, xy: f64) -> Self {
        SymTensor6([xx, yy, 0.0, 0.0, 0.0, SQRT_2 * xy])
    }

    /// Builds the Mandel vector of a symmetric 3×3 matrix (upper triangle is read).
    pub fn from_matrix3(m: &[[f64; 3]; 3]) -> Self {
        Self::from_tensor_components(m[0][0], m[1][1], m[2][2], m[1][2], m[0][2], m[0][1])
    }

    /// Reconstructs the full 3×3 tensor.
    pub fn to_matrix3(&self) -> [[f64; 3]; 3] {
        let c = &self.0;
        let yz = c[3] / SQRT_2;
        let xz = c[4] / SQRT_2;
        let xy = c[5] / SQRT_2;
        [[c[0], xy, xz], [xy, c[1], yz], [xz, yz, c[2]]]
    }

    pub fn components(&self) -> &[f64; 6] {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn deviator(&self) -> SymTensor6 {
        let p = self.trace() / 3.0;
        let c = &self.0;
        SymTensor6([c[0] - p, c[1] - p, c[2] - p, c[3], c[4], c[5]])
    }

    /// Mandel inner product, equal to the tensor double contraction.
    pub fn dot(&self, other: &SymTensor6) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// Frobenius norm of the tensor (Euclidean norm of the Mandel vector).
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Outer product `a ⊗ b` as a 6×6 matrix.
    pub fn outer(&self, other: &SymTensor6) -> Matrix6 {
        let mut m = Matrix6::zero();
        for i in 0..6 {
            for j in 0..6 {
                m.0[i][j] = self.0[i] * other.0[j];
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for SymTensor6 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for SymTensor6 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for SymTensor6 {
    type Output = SymTensor6;
    fn add(mut self, rhs: SymTensor6) -> SymTensor6 {
        self += rhs;
        self
    }
}

impl AddAssign for SymTensor6 {
    fn add_assign(&mut self, rhs: SymTensor6) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for SymTensor6 {
    type Output = SymTensor6;
    fn sub(mut self, rhs: SymTensor6) -> SymTensor6 {
        self -= rhs;
        self
    }
}

impl SubAssign for SymTensor6 {
    fn sub_assign(&mut self, rhs: SymTensor6) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
    }
}

impl Neg for SymTensor6 {
    type Output = SymTensor6;
    fn neg(self) -> SymTensor6 {
        self * -1.0
    }
}

impl Mul<f64> for SymTensor6 {
    type Output = SymTensor6;
    fn mul(mut self, s: f64) -> SymTensor6 {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl Mul<SymTensor6> for f64 {
    type Output = SymTensor6;
    fn mul(self, t: SymTensor6) -> SymTensor6 {
        t * self
    }
}

/// Dense 6×6 matrix acting on Mandel vectors (row-major).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Matrix6(pub [[f64; 6]; 6]);

impl Matrix6 {
    pub const fn zero() -> Self {
        Matrix6([[0.0; 6]; 6])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..6 {
            m.0[i][i] = 1.0;
        }
        m
    }

    /// Deviatoric projector `P = I − (1/3) 1 ⊗ 1`.
    pub fn deviatoric_projector() -> Self {
        let mut p = Self::identity();
        for i in 0..3 {
            for j in 0..3 {
                p.0[i][j] -= 1.0 / 3.0;
            }
        }
        p
    }

    pub fn apply(&self, v: &SymTensor6) -> SymTensor6 {
        let mut out = [0.0; 6];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(v.0.iter()).map(|(a, b)| a * b).sum();
        }
        SymTensor6(out)
    }

    /// `vᵀ M`, returned as a Mandel vector.
    pub fn apply_transpose(&self, v: &SymTensor6) -> SymTensor6 {
        let mut out = [0.0; 6];
        for (i, row) in self.0.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                out[j] += v.0[i] * m;
            }
        }
        SymTensor6(out)
    }

    pub fn transpose(&self) -> Matrix6 {
        let mut t = Matrix6::zero();
        for i in 0..6 {
            for j in 0..6 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix6) -> Matrix6 {
        let mut out = Matrix6::zero();
        for i in 0..6 {
            for k in 0..6 {
                let a = self.0[i][k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..6 {
                    out.0[i][j] += a * other.0[k][j];
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Matrix6 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> SymTensor6 {
        SymTensor6(std::array::from_fn(|i| self.0[i][j]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute asymmetry `|Mᵢⱼ − Mⱼᵢ|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..6 {
            for j in (i + 1)..6 {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }
}

impl Add for Matrix6 {
    type Output = Matrix6;
    fn add(mut self, rhs: Matrix6) -> Matrix6 {
        for i in 0..6 {
            for j in 0..6 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Sub for Matrix6 {
    type Output = Matrix6;
    fn sub(mut self, rhs: Matrix6) -> Matrix6 {
        for i in 0..6 {
            for j in 0..6 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

/// Isotropic elastic constants. Bulk and shear moduli are derived from
/// Young's modulus and Poisson's ratio on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticModuli {
    pub young: f64,
    pub poisson: f64,
    pub bulk: f64,
    pub shear: f64,
}

impl ElasticModuli {
    pub fn new(young: f64, poisson: f64) -> Result<Self, MaterialError> {
        if !(young > 0.0) || !young.is_finite() {
            return Err(MaterialError::NonPositive {
                name: "young",
                value: young,
            });
        }
        if !(poisson > 0.0 && poisson < 0.5) {
            return Err(MaterialError::PoissonOutOfRange(poisson));
        }
        Ok(ElasticModuli {
            young,
            poisson,
            bulk: young / (3.0 * (1.0 - 2.0 * poisson)),
            shear: young / (2.0 * (1.0 + poisson)),
        })
    }

    /// `σ = K tr(ε) I + 2μ dev(ε)`.
    pub fn stress(&self, strain: &SymTensor6) -> SymTensor6 {
        let tr = strain.trace();
        let mut s = strain.deviator() * (2.0 * self.shear);
        for i in 0..3 {
            s.0[i] += self.bulk * tr;
        }
        s
    }

    /// The constant elastic stiffness `C = 3K·(1⊗1)/3 + 2μ·P` in Mandel form.
    pub fn stiffness(&self) -> Matrix6 {
        let mut c = Matrix6::deviatoric_projector().scaled(2.0 * self.shear);
        for i in 0..3 {
            for j in 0..3 {
                c.0[i][j] += self.bulk;
            }
        }
        c
    }

    /// Lamé's first parameter.
    pub fn lame(&self) -> f64 {
        self.bulk - 2.0 * self.shear / 3.0
    }

    /// Uniaxial-strain (P-wave) modulus `K + 4μ/3`.
    pub fn p_wave_modulus(&self) -> f64 {
        self.bulk + 4.0 * self.shear / 3.0
    }
}
