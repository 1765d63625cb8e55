//! Strain energies of the solid bodies and of the third medium, and their
//! flattened derivatives.
//!
//! Arguments are flattened as `F^ = [F11, F21, F12, F22]` and
//! `gradF^[i + 2j + 4k] = dF_ij/dX_k`. Derivatives come from second-order dual
//! numbers over the scalar energy; [`fd_tensor_oracle`] re-derives them by
//! central differences in double-double precision for testing.

mod dd;
mod dual;
mod scalar;

pub use dd::DoubleDouble;
pub use dual::Dual2;
pub use scalar::Scalar;

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, SMatrix};
use serde::{Deserialize, Serialize};

/// Smallest admissible `det F` and `|tr F|` before a state counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaterialError {
    #[error("degenerate state: det F = {0:e}")]
    DegenerateJacobian(f64),
    #[error("singular rotation: tr F = {0:e}")]
    SingularRotation(f64),
    #[error("non-finite energy")]
    NonFinite,
    #[error("invalid material parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegularizationKind {
    #[serde(rename = "huhu")]
    HuHu,
    #[serde(rename = "huhu-dev")]
    HuHuDeviatoric,
    #[serde(rename = "rot-j")]
    RotationJacobian,
    #[serde(rename = "tan-rot-j")]
    TanRotationJacobian,
}

impl RegularizationKind {
    pub const ALL: [RegularizationKind; 4] = [
        RegularizationKind::HuHu,
        RegularizationKind::HuHuDeviatoric,
        RegularizationKind::RotationJacobian,
        RegularizationKind::TanRotationJacobian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegularizationKind::HuHu => "huhu",
            RegularizationKind::HuHuDeviatoric => "huhu-dev",
            RegularizationKind::RotationJacobian => "rot-j",
            RegularizationKind::TanRotationJacobian => "tan-rot-j",
        }
    }

    fn uses_rotation(self) -> bool {
        matches!(self, RegularizationKind::RotationJacobian | RegularizationKind::TanRotationJacobian)
    }
}

impl fmt::Display for RegularizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegularizationKind {
    type Err = MaterialError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegularizationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| MaterialError::InvalidParameter(format!("unknown regularization `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    #[serde(rename = "K")]
    pub bulk: f64,
    #[serde(rename = "mu")]
    pub shear: f64,
}

/// Third-medium parameters. `bulk` is kept for configuration symmetry but does
/// not enter the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    pub gamma: f64,
    pub alpha_r: f64,
    #[serde(default)]
    pub beta: f64,
    pub reg: RegularizationKind,
    #[serde(rename = "mu")]
    pub shear: f64,
    #[serde(rename = "K", default)]
    pub bulk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaterialModel {
    Body(BodyParams),
    ThirdMedium(MediumParams),
}

impl MaterialModel {
    pub fn validate(&self) -> Result<(), MaterialError> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(MaterialError::InvalidParameter(what.to_string()))
            }
        };
        match self {
            MaterialModel::Body(p) => {
                check(p.bulk > 0.0, "K must be positive")?;
                check(p.shear > 0.0, "mu must be positive")
            }
            MaterialModel::ThirdMedium(p) => {
                check(p.shear > 0.0, "mu must be positive")?;
                check(p.gamma > 0.0, "gamma must be positive")?;
                check(p.alpha_r >= 0.0, "alpha_r must be non-negative")?;
                check(p.beta >= 0.0, "beta must be non-negative")
            }
        }
    }

    /// Stress and constitutive blocks at one material point.
    pub fn tensors(&self, f: [f64; 4], grad_f: [f64; 8]) -> Result<MaterialPointState, MaterialError> {
        match self {
            MaterialModel::Body(p) => body_tensors(f, p),
            MaterialModel::ThirdMedium(p) => medium_tensors(f, grad_f, p),
        }
    }

    pub fn energy(&self, f: [f64; 4], grad_f: [f64; 8]) -> Result<f64, MaterialError> {
        let mut x = [0.0; 12];
        x[..4].copy_from_slice(&f);
        x[4..].copy_from_slice(&grad_f);
        match self {
            MaterialModel::Body(p) => p.eval(&x),
            MaterialModel::ThirdMedium(p) => p.eval(&x),
        }
    }
}

/// Flattened stresses and constitutive blocks at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialPointState {
    pub f: [f64; 4],
    pub grad_f: [f64; 8],
    pub psi: f64,
    pub p_hat: [f64; 4],
    pub t_hat: [f64; 8],
    pub d_hat: SMatrix<f64, 4, 4>,
    /// `A[r][s] = d2 psi / d gradF^_r d F^_s`.
    pub a_hat: SMatrix<f64, 8, 4>,
    pub b_hat: SMatrix<f64, 8, 8>,
}

/// A scalar energy of `[F^ (4), gradF^ (8)]`.
pub trait Energy {
    fn eval<S: Scalar>(&self, x: &[S; 12]) -> Result<S, MaterialError>;
}

fn det2<S: Scalar>(f: &[S]) -> S {
    f[0] * f[3] - f[2] * f[1]
}

fn checked_det<S: Scalar>(f: &[S]) -> Result<S, MaterialError> {
    let j = det2(f);
    if j.re() > DEGENERACY_TOL {
        Ok(j)
    } else {
        Err(MaterialError::DegenerateJacobian(j.re()))
    }
}

/// Isochoric neo-Hookean part on the plane-strain embedding: `mu/2 (J^-2/3 tr C - 3)`.
pub fn isochoric_energy<S: Scalar>(f: &[S], mu: f64) -> Result<S, MaterialError> {
    let j = checked_det(f)?;
    let tr_c = f[0] * f[0] + f[1] * f[1] + f[2] * f[2] + f[3] * f[3] + 1.0;
    Ok((j.powf(-2.0 / 3.0) * tr_c - 3.0) * (0.5 * mu))
}

/// Body energy `K/2 (ln J)^2 + isochoric` as a function of the in-plane F.
pub fn body_energy_f<S: Scalar>(f: &[S], p: &BodyParams) -> Result<S, MaterialError> {
    let j = checked_det(f)?;
    let lnj = j.ln();
    Ok(lnj * lnj * (0.5 * p.bulk) + isochoric_energy(f, p.shear)?)
}

/// Regularization energy of the given kind, times `exp(-beta det F)` when `beta > 0`.
pub fn regularization_energy<S: Scalar>(
    f: &[S],
    df: &[S],
    kind: RegularizationKind,
    beta: f64,
) -> Result<S, MaterialError> {
    let j = checked_det(f)?;
    let sum_sq = |v: &[S]| v.iter().skip(1).fold(v[0] * v[0], |acc, &x| acc + x * x);
    let psi = match kind {
        RegularizationKind::HuHu => sum_sq(df) * 0.5,
        RegularizationKind::HuHuDeviatoric => {
            let lx = df[0] + df[6];
            let ly = df[1] + df[7];
            (sum_sq(df) - (lx * lx + ly * ly) * 0.5) * 0.5
        }
        RegularizationKind::RotationJacobian | RegularizationKind::TanRotationJacobian => {
            let a = f[2] - f[1];
            let b = f[0] + f[3];
            if b.re().abs() <= DEGENERACY_TOL {
                return Err(MaterialError::SingularRotation(b.re()));
            }
            let denom = if kind == RegularizationKind::RotationJacobian { a * a + b * b } else { b * b };
            let mut acc = S::cst(0.0);
            for k in 0..2 {
                let d = &df[4 * k..4 * k + 4];
                let num = b * (d[2] - d[1]) - a * (d[0] + d[3]);
                let g_rot = num / denom;
                let g_j = f[3] * d[0] + f[0] * d[3] - f[1] * d[2] - f[2] * d[1];
                acc = acc + g_rot * g_rot + g_j * g_j;
            }
            acc * 0.5
        }
    };
    Ok(if beta > 0.0 { psi * (j * (-beta)).exp() } else { psi })
}

impl Energy for MediumParams {
    fn eval<S: Scalar>(&self, x: &[S; 12]) -> Result<S, MaterialError> {
        let (f, df) = x.split_at(4);
        let psi_m = isochoric_energy(f, self.shear)?;
        let psi_r = regularization_energy(f, df, self.reg, self.beta)?;
        Ok((psi_m + psi_r * self.alpha_r) * self.gamma)
    }
}

impl Energy for BodyParams {
    fn eval<S: Scalar>(&self, x: &[S; 12]) -> Result<S, MaterialError> {
        body_energy_f(&x[..4], self)
    }
}

fn finite(state: MaterialPointState) -> Result<MaterialPointState, MaterialError> {
    let ok = state.psi.is_finite()
        && state.p_hat.iter().chain(&state.t_hat).all(|v| v.is_finite())
        && state.d_hat.iter().chain(state.a_hat.iter()).chain(state.b_hat.iter()).all(|v| v.is_finite());
    if ok {
        Ok(state)
    } else {
        Err(MaterialError::NonFinite)
    }
}

/// All five blocks of a 12-argument energy by forward-mode AD.
pub fn ad_tensors<E: Energy>(energy: &E, f: [f64; 4], grad_f: [f64; 8]) -> Result<MaterialPointState, MaterialError> {
    let mut x = [0.0; 12];
    x[..4].copy_from_slice(&f);
    x[4..].copy_from_slice(&grad_f);
    let d = energy.eval(&Dual2::<12>::vars(x))?;
    finite(MaterialPointState {
        f,
        grad_f,
        psi: d.re,
        p_hat: std::array::from_fn(|i| d.g[i]),
        t_hat: std::array::from_fn(|i| d.g[4 + i]),
        d_hat: SMatrix::from_fn(|r, s| d.hess(r, s)),
        a_hat: SMatrix::from_fn(|r, s| d.hess(4 + r, s)),
        b_hat: SMatrix::from_fn(|r, s| d.hess(4 + r, 4 + s)),
    })
}

pub fn medium_tensors(f: [f64; 4], grad_f: [f64; 8], p: &MediumParams) -> Result<MaterialPointState, MaterialError> {
    if p.reg.uses_rotation() && (f[0] + f[3]).abs() <= DEGENERACY_TOL {
        return Err(MaterialError::SingularRotation(f[0] + f[3]));
    }
    ad_tensors(p, f, grad_f)
}

/// Body blocks; only `P^` and `D^` are non-zero.
pub fn body_tensors(f: [f64; 4], p: &BodyParams) -> Result<MaterialPointState, MaterialError> {
    let d = body_energy_f(&Dual2::<4>::vars(f), p)?;
    finite(MaterialPointState {
        f,
        grad_f: [0.0; 8],
        psi: d.re,
        p_hat: d.g,
        t_hat: [0.0; 8],
        d_hat: SMatrix::from_fn(|r, s| d.hess(r, s)),
        a_hat: SMatrix::zeros(),
        b_hat: SMatrix::zeros(),
    })
}

/// Unflattens `F^` into a 2x2 matrix.
pub fn unflatten_f(f: [f64; 4]) -> nalgebra::Matrix2<f64> {
    nalgebra::Matrix2::new(f[0], f[2], f[1], f[3])
}

pub fn flatten_f(m: &nalgebra::Matrix2<f64>) -> [f64; 4] {
    [m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]]
}

/// `gradF^` entry for `dF_ij/dX_k`.
pub fn grad_index(i: usize, j: usize, k: usize) -> usize {
    i + 2 * j + 4 * k
}

/// Plane-strain 3x3 embedding of the in-plane F.
pub fn embed_f(f: [f64; 4]) -> Matrix3<f64> {
    Matrix3::new(f[0], f[2], 0.0, f[1], f[3], 0.0, 0.0, 0.0, 1.0)
}

fn check_c(c: &Matrix3<f64>) -> Result<f64, MaterialError> {
    let det = c.determinant();
    if det > DEGENERACY_TOL {
        Ok(det)
    } else {
        Err(MaterialError::DegenerateJacobian(det.max(0.0).sqrt()))
    }
}

/// Body energy from the right Cauchy-Green tensor.
pub fn psi_body_generic<S: Scalar>(c: &[S; 9], p: &BodyParams) -> Result<S, MaterialError> {
    let det = c[0] * (c[4] * c[8] - c[5] * c[7]) - c[1] * (c[3] * c[8] - c[5] * c[6])
        + c[2] * (c[3] * c[7] - c[4] * c[6]);
    if det.re() <= DEGENERACY_TOL {
        return Err(MaterialError::DegenerateJacobian(det.re().max(0.0).sqrt()));
    }
    let lnj = det.ln() * 0.5;
    let tr = c[0] + c[4] + c[8];
    Ok(lnj * lnj * (0.5 * p.bulk) + ((det.powf(-1.0 / 3.0) * tr) - 3.0) * (0.5 * p.shear))
}

pub fn psi_body(c: &Matrix3<f64>, p: &BodyParams) -> Result<f64, MaterialError> {
    let flat: [f64; 9] = std::array::from_fn(|i| c[(i / 3, i % 3)]);
    psi_body_generic(&flat, p)
}

/// Second Piola-Kirchhoff stress, closed form.
pub fn pk2_stress(c: &Matrix3<f64>, p: &BodyParams) -> Result<Matrix3<f64>, MaterialError> {
    let det = check_c(c)?;
    let ci = c.try_inverse().ok_or(MaterialError::DegenerateJacobian(0.0))?;
    let lnj = 0.5 * det.ln();
    let j23 = det.powf(-1.0 / 3.0);
    let tr = c.trace();
    Ok(ci * (p.bulk * lnj) - ci * (p.shear / 3.0 * j23 * tr) + Matrix3::identity() * (p.shear * j23))
}

/// Material tangent `2 dS/dC` as `d[i][j][k][l]`, closed form.
pub fn constitutive_body(c: &Matrix3<f64>, p: &BodyParams) -> Result<[[[[f64; 3]; 3]; 3]; 3], MaterialError> {
    let det = check_c(c)?;
    let ci = c.try_inverse().ok_or(MaterialError::DegenerateJacobian(0.0))?;
    let lnj = 0.5 * det.ln();
    let j23 = det.powf(-1.0 / 3.0);
    let tr = c.trace();
    let id = Matrix3::<f64>::identity();
    let mut d = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let cc = ci[(i, j)] * ci[(k, l)];
                    let sym = 0.5 * (ci[(i, k)] * ci[(j, l)] + ci[(i, l)] * ci[(j, k)]);
                    d[i][j][k][l] = p.bulk * cc - 2.0 * p.bulk * lnj * sym
                        + 2.0 * p.shear / 3.0
                            * j23
                            * (-id[(i, j)] * ci[(k, l)] - ci[(i, j)] * id[(k, l)] + tr / 3.0 * cc + tr * sym);
                }
            }
        }
    }
    Ok(d)
}

/// Rotation angle `atan((F12 - F21)/(F11 + F22))`.
pub fn rotation_angle(f: [f64; 4]) -> Result<f64, MaterialError> {
    let b = f[0] + f[3];
    if b.abs() <= DEGENERACY_TOL {
        return Err(MaterialError::SingularRotation(b));
    }
    Ok(((f[2] - f[1]) / b).atan())
}

/// `(grad J)_k = det F (F^-1)_ji dF_ij/dX_k`.
pub fn grad_j(f: [f64; 4], grad_f: [f64; 8]) -> Result<[f64; 2], MaterialError> {
    let det = checked_det(&f)?;
    let inv = unflatten_f(f).try_inverse().ok_or(MaterialError::DegenerateJacobian(det))?;
    let mut out = [0.0; 2];
    for (k, o) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                *o += det * inv[(j, i)] * grad_f[grad_index(i, j, k)];
            }
        }
    }
    Ok(out)
}

/// Gradient of the rotation angle by the chain rule through F.
pub fn grad_rotation_angle(f: [f64; 4], grad_f: [f64; 8]) -> Result<[f64; 2], MaterialError> {
    rotation_angle(f)?;
    let a = f[2] - f[1];
    let b = f[0] + f[3];
    Ok(std::array::from_fn(|k| {
        let d = &grad_f[4 * k..4 * k + 4];
        (b * (d[2] - d[1]) - a * (d[0] + d[3])) / (a * a + b * b)
    }))
}

pub fn regularization(
    f: [f64; 4],
    grad_f: [f64; 8],
    kind: RegularizationKind,
    beta: f64,
) -> Result<f64, MaterialError> {
    let v = regularization_energy(&f, &grad_f, kind, beta)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MaterialError::NonFinite)
    }
}

/// Central-difference derivatives of `energy`, evaluated in double-double precision.
pub fn fd_tensor_oracle<E: Energy>(
    energy: &E,
    f: [f64; 4],
    grad_f: [f64; 8],
    step: f64,
) -> Result<MaterialPointState, MaterialError> {
    let mut x0 = [DoubleDouble::default(); 12];
    for i in 0..4 {
        x0[i] = DoubleDouble::new(f[i]);
    }
    for i in 0..8 {
        x0[4 + i] = DoubleDouble::new(grad_f[i]);
    }
    let eval = |shifts: &[(usize, f64)]| -> Result<DoubleDouble, MaterialError> {
        let mut x = x0;
        for &(i, s) in shifts {
            x[i] = x[i] + s;
        }
        let v = energy.eval(&x)?;
        if v.hi.is_finite() {
            Ok(v)
        } else {
            Err(MaterialError::NonFinite)
        }
    };
    let h = step;
    let e0 = eval(&[])?;
    let mut grad = [0.0; 12];
    let mut hess = [[0.0; 12]; 12];
    for i in 0..12 {
        let ep = eval(&[(i, h)])?;
        let em = eval(&[(i, -h)])?;
        grad[i] = ((ep - em) / (2.0 * h)).to_f64();
        hess[i][i] = ((ep - e0 * 2.0 + em) / (h * h)).to_f64();
        for j in 0..i {
            let pp = eval(&[(i, h), (j, h)])?;
            let pm = eval(&[(i, h), (j, -h)])?;
            let mp = eval(&[(i, -h), (j, h)])?;
            let mm = eval(&[(i, -h), (j, -h)])?;
            let v = ((pp - pm - mp + mm) / (4.0 * h * h)).to_f64();
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(MaterialPointState {
        f,
        grad_f,
        psi: e0.to_f64(),
        p_hat: std::array::from_fn(|i| grad[i]),
        t_hat: std::array::from_fn(|i| grad[4 + i]),
        d_hat: SMatrix::from_fn(|r, s| hess[r][s]),
        a_hat: SMatrix::from_fn(|r, s| hess[4 + r][s]),
        b_hat: SMatrix::from_fn(|r, s| hess[4 + r][4 + s]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BODY: BodyParams = BodyParams { bulk: 20.0, shear: 10.0 };

    #[test]
    fn body_energy_examples() {
        assert_eq!(psi_body(&Matrix3::identity(), &BODY).unwrap(), 0.0);
        let c = Matrix3::from_diagonal(&nalgebra::Vector3::new(4.0, 1.0, 1.0));
        let expect = 10.0 * 2f64.ln().powi(2) + 5.0 * (2f64.powf(-2.0 / 3.0) * 6.0 - 3.0);
        assert!((psi_body(&c, &BODY).unwrap() - expect).abs() < 1e-13);
        assert!((expect - 8.703346).abs() < 1e-6);
        for a in [0.3, 2.0, 7.5] {
            let c = Matrix3::from_diagonal(&nalgebra::Vector3::new(a, 1.0 / a, 1.0));
            let iso = 5.0 * ((a + 1.0 / a + 1.0) - 3.0);
            assert!((psi_body(&c, &BODY).unwrap() - iso).abs() < 1e-12);
        }
    }

    #[test]
    fn pk2_examples() {
        assert!(pk2_stress(&Matrix3::identity(), &BODY).unwrap().amax() < 1e-14);
        let c = Matrix3::from_diagonal(&nalgebra::Vector3::new(4.0, 1.0, 1.0));
        let s = pk2_stress(&c, &BODY).unwrap();
        let j23 = 2f64.powf(-2.0 / 3.0);
        let expect = 20.0 * 2f64.ln() / 4.0 - 10.0 / 12.0 * j23 * 6.0 + 10.0 * j23;
        assert!((s[(0, 0)] - expect).abs() < 1e-13);
    }

    #[test]
    fn constitutive_at_identity() {
        let d = constitutive_body(&Matrix3::identity(), &BODY).unwrap();
        assert!((d[0][0][0][0] - (20.0 + 40.0 / 3.0)).abs() < 1e-12);
        let lambda = 20.0 - 20.0 / 3.0;
        assert!((d[0][0][1][1] - lambda).abs() < 1e-12);
        assert!((d[0][1][0][1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_angle_examples() {
        assert_eq!(rotation_angle([1.0, 0.0, 0.0, 1.0]).unwrap(), 0.0);
        let (c, s) = (0.1f64.cos(), 0.1f64.sin());
        assert!((rotation_angle([c, s, -s, c]).unwrap() + 0.1).abs() < 1e-15);
        assert!((rotation_angle([1.0, 0.0, 0.2, 1.0]).unwrap() - 0.0996687).abs() < 1e-7);
        assert!(matches!(rotation_angle([1.0, 0.0, 0.0, -1.0]), Err(MaterialError::SingularRotation(_))));
    }

    #[test]
    fn grad_j_examples() {
        let mut g = [0.0; 8];
        g[grad_index(0, 0, 0)] = 0.7;
        assert_eq!(grad_j([1.0, 0.0, 0.0, 1.0], g).unwrap(), [0.7, 0.0]);
        assert_eq!(grad_j([1.2, 0.1, -0.3, 0.9], [0.0; 8]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn regularization_examples() {
        let f = [1.3, -0.2, 0.4, 0.8];
        for kind in RegularizationKind::ALL {
            assert_eq!(regularization(f, [0.0; 8], kind, 0.0).unwrap(), 0.0);
        }
        let mut g = [0.0; 8];
        g[0] = 0.6;
        assert!((regularization(f, g, RegularizationKind::HuHu, 0.0).unwrap() - 0.18).abs() < 1e-15);
        // u = (x^2 + y^2, 0): d2ux/dx2 = d2ux/dy2 = 2
        let mut g = [0.0; 8];
        g[grad_index(0, 0, 0)] = 2.0;
        g[grad_index(0, 1, 1)] = 2.0;
        assert_eq!(regularization(f, g, RegularizationKind::HuHuDeviatoric, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn huhu_blocks_are_identity() {
        let p = MediumParams {
            gamma: 1.0,
            alpha_r: 1.0,
            beta: 0.0,
            reg: RegularizationKind::HuHu,
            shear: 10.0,
            bulk: 20.0,
        };
        let g = [0.3, -0.1, 0.5, 0.2, 0.05, -0.4, 0.9, 0.7];
        let s = medium_tensors([1.1, 0.2, -0.1, 0.9], g, &p).unwrap();
        assert_eq!(s.t_hat, g);
        assert_eq!(s.b_hat, SMatrix::<f64, 8, 8>::identity());
        assert_eq!(s.a_hat, SMatrix::<f64, 8, 4>::zeros());
    }

    #[test]
    fn stationary_at_identity() {
        let p = MediumParams {
            gamma: 1e-3,
            alpha_r: 1.0,
            beta: 5.0,
            reg: RegularizationKind::RotationJacobian,
            shear: 10.0,
            bulk: 0.0,
        };
        let s = medium_tensors([1.0, 0.0, 0.0, 1.0], [0.0; 8], &p).unwrap();
        assert_eq!(s.psi, 0.0);
        assert!(s.p_hat.iter().chain(&s.t_hat).all(|v| v.abs() < 1e-16));
        let b = body_tensors([1.0, 0.0, 0.0, 1.0], &BODY).unwrap();
        assert!(b.p_hat.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn degenerate_states_are_errors() {
        let p = MediumParams {
            gamma: 1.0,
            alpha_r: 1.0,
            beta: 0.0,
            reg: RegularizationKind::TanRotationJacobian,
            shear: 1.0,
            bulk: 0.0,
        };
        assert!(matches!(medium_tensors([1.0, 0.0, 0.0, 0.0], [0.0; 8], &p), Err(MaterialError::DegenerateJacobian(_))));
        assert!(matches!(medium_tensors([1.0, 1.0, -1.0, -1.0], [0.0; 8], &p), Err(MaterialError::SingularRotation(_))));
        assert!(matches!(body_tensors([-1.0, 0.0, 0.0, 1.0], &BODY), Err(MaterialError::DegenerateJacobian(_))));
    }

    struct HalfNorm;
    impl Energy for HalfNorm {
        fn eval<S: Scalar>(&self, x: &[S; 12]) -> Result<S, MaterialError> {
            Ok((x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]) * 0.5)
        }
    }

    #[test]
    fn fd_oracle_on_quadratics() {
        let s = fd_tensor_oracle(&HalfNorm, [1.2, 0.3, -0.4, 0.8], [0.0; 8], 1e-5).unwrap();
        assert!((s.d_hat - SMatrix::<f64, 4, 4>::identity()).amax() < 1e-20);
        let p = MediumParams { gamma: 1.0, alpha_r: 1.0, beta: 0.0, reg: RegularizationKind::HuHu, shear: 0.0, bulk: 0.0 };
        // the isochoric part vanishes with mu = 0, leaving the HuHu term
        let s = fd_tensor_oracle(&p, [1.2, 0.3, -0.4, 0.8], [0.1; 8], 1e-5).unwrap();
        assert!((s.b_hat - SMatrix::<f64, 8, 8>::identity()).amax() < 1e-20);
    }

    #[test]
    fn regularization_kinds_parse() {
        for k in RegularizationKind::ALL {
            assert_eq!(k.name().parse::<RegularizationKind>().unwrap(), k);
        }
        assert!("hu".parse::<RegularizationKind>().is_err());
    }
}
