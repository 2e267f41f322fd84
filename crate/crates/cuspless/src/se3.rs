//! SE(3) primitives: rotations, rigid motions, the Euler chart, the
//! left-invariant frame and the structure constants of the motion algebra.
//!
//! Conventions are fixed once here and reused everywhere: the Euler chart is
//! `R = R_x(gamma) R_y(beta) R_z(alpha)`, and the algebra basis is ordered as
//! translations along x, y, z followed by rotations about x, y, z. At the
//! identity this matches the chart basis up to the permutation
//! `(dx, dy, dz, dgamma, dbeta, dalpha)`.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Orthonormality slack accepted by [`RotationMatrix::new`].
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

/// `|cos beta|` below which the Euler chart is treated as singular.
pub const GIMBAL_LOCK_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum Se3Error {
    /// Matrix is not a proper rotation within tolerance.
    #[error("matrix is not orthonormal with det +1 (defect {defect:.3e})")]
    NotOrthogonal { defect: f64 },
    /// Euler chart is singular at this rotation (gimbal lock).
    #[error("Euler chart singular: |cos beta| = {cos_beta:.3e}")]
    ChartSingular { cos_beta: f64 },
    /// Frame vectors are not a right-handed orthonormal triple.
    #[error("frame is not right-handed orthonormal (defect {defect:.3e})")]
    DegenerateFrame { defect: f64 },
}

/// Proper rotation matrix, orthonormal to [`ORTHONORMALITY_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    /// Validates orthonormality and orientation.
    pub fn new(m: Matrix3<f64>) -> Result<Self, Se3Error> {
        let defect = orthonormality_defect(&m);
        if defect > ORTHONORMALITY_TOL || m.determinant() < 0.0 {
            return Err(Se3Error::NotOrthogonal { defect });
        }
        Ok(Self(m))
    }

    /// Wraps columns that are orthonormal by construction. Hot sampling paths
    /// use this to skip the defect check; the debug assertion and the sweep
    /// tests keep the invariant honest.
    pub(crate) fn from_orthonormal_columns(
        c1: Vector3<f64>,
        c2: Vector3<f64>,
        c3: Vector3<f64>,
    ) -> Self {
        let m = Matrix3::from_columns(&[c1, c2, c3]);
        debug_assert!(
            orthonormality_defect(&m) <= ORTHONORMALITY_TOL && m.determinant() > 0.0,
            "columns are not an orthonormal right-handed triple"
        );
        Self(m)
    }

    /// Accepts a slightly drifted matrix and projects it back onto SO(3).
    pub fn renormalized(m: Matrix3<f64>) -> Result<Self, Se3Error> {
        let defect = orthonormality_defect(&m);
        if defect > 1e-6 || m.determinant() <= 0.0 {
            return Err(Se3Error::NotOrthogonal { defect });
        }
        Ok(Self(polar_project(&m)))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Rotation angle distance to another rotation, in radians.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let m = self.0.transpose() * other.0;
        let c = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }
}

impl std::ops::Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl std::ops::Mul<Vector3<f64>> for RotationMatrix {
    type Output = Vector3<f64>;
    fn mul(self, v: Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }
}

fn orthonormality_defect(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).abs().max()
}

/// Newton iteration for the polar factor; quadratic convergence near SO(3).
fn polar_project(m: &Matrix3<f64>) -> Matrix3<f64> {
    let mut x = *m;
    for _ in 0..4 {
        let e = x.transpose() * x - Matrix3::identity();
        if e.abs().max() < 1e-15 {
            break;
        }
        x = 0.5 * x * (3.0 * Matrix3::identity() - x.transpose() * x);
    }
    x
}

/// Rigid motion `(x, R)` acting on points as `p -> x + R p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub translation: Vector3<f64>,
    pub rotation: RotationMatrix,
}

impl RigidMotion {
    pub fn new(translation: Vector3<f64>, rotation: RotationMatrix) -> Self {
        Self { translation, rotation }
    }

    pub fn identity() -> Self {
        Self::new(Vector3::zeros(), RotationMatrix::identity())
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.translation + self.rotation * other.translation,
            self.rotation * other.rotation,
        )
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(-(rt * self.translation), rt)
    }

    pub fn apply(&self, p: Vector3<f64>) -> Vector3<f64> {
        self.translation + self.rotation * p
    }

    /// Direction the motion carries `e_z` to; the tangent of a curve whose
    /// frame is this motion.
    pub fn direction(&self) -> Vector3<f64> {
        self.rotation * Vector3::z()
    }
}

/// Euler angles for the chart `R = R_x(gamma) R_y(beta) R_z(alpha)`.
///
/// Ranges: `alpha` in `[0, 2pi)`, `beta` in `[-pi, pi)`, `gamma` in
/// `[-pi/2, pi/2)`. At gimbal lock (`|cos beta| < GIMBAL_LOCK_TOL`) the
/// extraction returns `alpha = 0` and lets `gamma` absorb the residual
/// z-rotation, which may then leave its nominal range; the round-trip through
/// [`rotation_from_euler`] is still exact to tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn rotation_from_euler(e: &EulerAngles) -> RotationMatrix {
    RotationMatrix(rot_x(e.gamma) * rot_y(e.beta) * rot_z(e.alpha))
}

/// Inverts the Euler chart.
///
/// Generic rotations pick the branch with `cos gamma >= 0`, which keeps
/// `gamma` in `[-pi/2, pi/2]` while `beta` uses its full `[-pi, pi)` range.
pub fn euler_from_rotation(r: &RotationMatrix) -> EulerAngles {
    let m = r.matrix();
    let cos_beta_mag = m[(0, 0)].hypot(m[(0, 1)]);
    if cos_beta_mag < GIMBAL_LOCK_TOL {
        // Locked: R = R_x(g) R_y(+-pi/2); row 1 holds (+-sin g, cos g, 0).
        return if m[(0, 2)] > 0.0 {
            EulerAngles {
                alpha: 0.0,
                beta: std::f64::consts::FRAC_PI_2,
                gamma: m[(1, 0)].atan2(m[(1, 1)]),
            }
        } else {
            EulerAngles {
                alpha: 0.0,
                beta: -std::f64::consts::FRAC_PI_2,
                gamma: (-m[(1, 0)]).atan2(m[(1, 1)]),
            }
        };
    }
    // Sign of cos(beta) is chosen so that cos(gamma) >= 0.
    let sigma = if m[(2, 2)] >= 0.0 { 1.0 } else { -1.0 };
    let gamma = (-m[(1, 2)] * sigma).atan2(m[(2, 2)] * sigma);
    let mut beta = m[(0, 2)].atan2(sigma * cos_beta_mag);
    if beta >= std::f64::consts::PI {
        beta -= 2.0 * std::f64::consts::PI;
    }
    let mut alpha = (-m[(0, 1)] * sigma).atan2(m[(0, 0)] * sigma);
    if alpha < 0.0 {
        alpha += 2.0 * std::f64::consts::PI;
    }
    EulerAngles { alpha, beta, gamma }
}

/// Structure constants `c^k_{ij}` of the motion algebra in the fixed basis
/// (translations x, y, z; rotations about x, y, z), defined by
/// `[A_i, A_j] = sum_k c^k_{ij} A_k`. Entries are exact small integers.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    c: [[[f64; 6]; 6]; 6],
}

impl StructureConstants {
    /// `c^k_{ij}`; indices are zero-based.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[k][i][j]
    }
}

/// Basis element as a 4x4 homogeneous matrix (rotation block, translation column).
fn basis_matrix(i: usize) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    match i {
        0 | 1 | 2 => m[i][3] = 1.0,
        3 => {
            m[1][2] = -1.0;
            m[2][1] = 1.0;
        }
        4 => {
            m[0][2] = 1.0;
            m[2][0] = -1.0;
        }
        5 => {
            m[0][1] = -1.0;
            m[1][0] = 1.0;
        }
        _ => unreachable!(),
    }
    m
}

fn mat4_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = 0.0;
            for t in 0..4 {
                acc += a[r][t] * b[t][c];
            }
            out[r][c] = acc;
        }
    }
    out
}

/// Computes the full table from 4x4 matrix commutators.
pub fn structure_constants() -> StructureConstants {
    let basis: Vec<[[f64; 4]; 4]> = (0..6).map(basis_matrix).collect();
    let mut c = [[[0.0; 6]; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            let ab = mat4_mul(&basis[i], &basis[j]);
            let ba = mat4_mul(&basis[j], &basis[i]);
            let mut m = [[0.0; 4]; 4];
            for r in 0..4 {
                for t in 0..4 {
                    m[r][t] = ab[r][t] - ba[r][t];
                }
            }
            // Translation column spans A1..A3; skew entries span A4..A6.
            c[0][i][j] = m[0][3];
            c[1][i][j] = m[1][3];
            c[2][i][j] = m[2][3];
            c[3][i][j] = m[2][1];
            c[4][i][j] = m[0][2];
            c[5][i][j] = m[1][0];
        }
    }
    StructureConstants { c }
}

/// Left-invariant frame at a pose, as six coefficient arrays over the chart
/// basis `(dx, dy, dz, dalpha, dbeta, dgamma)`.
///
/// The translational fields are the columns of the rotation matrix; the
/// rotational fields are the push-forwards of the rotations about x, y, z.
/// Fails with [`Se3Error::ChartSingular`] at gimbal lock where the chart
/// coefficients blow up.
pub fn left_invariant_frame(pose: &RigidMotion) -> Result<[[f64; 6]; 6], Se3Error> {
    let m = pose.rotation.matrix();
    let cos_beta_mag = m[(0, 0)].hypot(m[(0, 1)]);
    if cos_beta_mag < GIMBAL_LOCK_TOL {
        return Err(Se3Error::ChartSingular { cos_beta: cos_beta_mag });
    }
    let e = euler_from_rotation(&pose.rotation);
    let (sa, ca) = e.alpha.sin_cos();
    let tb = e.beta.tan();
    let sec_b = 1.0 / e.beta.cos();

    let mut f = [[0.0; 6]; 6];
    for (i, row) in f.iter_mut().enumerate().take(3) {
        row[0] = m[(0, i)];
        row[1] = m[(1, i)];
        row[2] = m[(2, i)];
    }
    // Rotation about x: -cos(a) tan(b) d/dalpha + sin(a) d/dbeta + cos(a) sec(b) d/dgamma.
    f[3][3] = -ca * tb;
    f[3][4] = sa;
    f[3][5] = ca * sec_b;
    // Rotation about y: sin(a) tan(b) d/dalpha + cos(a) d/dbeta - sin(a) sec(b) d/dgamma.
    f[4][3] = sa * tb;
    f[4][4] = ca;
    f[4][5] = -sa * sec_b;
    // Rotation about z: d/dalpha.
    f[5][3] = 1.0;
    Ok(f)
}

/// Co-frame dual to [`left_invariant_frame`]: row `i` holds the components of
/// `omega^i` on the chart co-basis, so that `<omega^i, A_j> = delta_ij`.
pub fn co_frame(pose: &RigidMotion) -> Result<[[f64; 6]; 6], Se3Error> {
    let f = left_invariant_frame(pose)?;
    let mut m = nalgebra::SMatrix::<f64, 6, 6>::zeros();
    for i in 0..6 {
        for j in 0..6 {
            // Column j of m = coefficients of A_{j+1}.
            m[(i, j)] = f[j][i];
        }
    }
    let inv = m.try_inverse().ok_or(Se3Error::ChartSingular { cos_beta: 0.0 })?;
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] = inv[(i, j)];
        }
    }
    Ok(out)
}

/// Right-handed orthonormal Frenet frame `(t, n, b)` with `b = t x n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetFrame {
    pub t: Vector3<f64>,
    pub n: Vector3<f64>,
    pub b: Vector3<f64>,
}

impl FrenetFrame {
    pub fn new(t: Vector3<f64>, n: Vector3<f64>, b: Vector3<f64>) -> Result<Self, Se3Error> {
        let defect = (t.norm() - 1.0)
            .abs()
            .max((n.norm() - 1.0).abs())
            .max(t.dot(&n).abs())
            .max((b - t.cross(&n)).norm());
        if defect > 1e-10 {
            return Err(Se3Error::DegenerateFrame { defect });
        }
        Ok(Self { t, n, b })
    }

    /// Builds the binormal from tangent and normal.
    pub fn from_tangent_normal(t: Vector3<f64>, n: Vector3<f64>) -> Result<Self, Se3Error> {
        let b = t.cross(&n);
        Self::new(t, n, b)
    }

    /// Wraps a triple that is orthonormal by construction (hot paths only).
    pub(crate) fn from_orthonormal(t: Vector3<f64>, n: Vector3<f64>, b: Vector3<f64>) -> Self {
        debug_assert!(
            (t.norm() - 1.0).abs().max(t.dot(&n).abs()).max((b - t.cross(&n)).norm()) <= 1e-10,
            "vectors are not an orthonormal right-handed triple"
        );
        Self { t, n, b }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_euler(rng: &mut ChaCha8Rng) -> EulerAngles {
        EulerAngles {
            alpha: rng.gen_range(0.0..std::f64::consts::TAU),
            beta: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            gamma: rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2),
        }
    }

    fn random_rotation(rng: &mut ChaCha8Rng) -> RotationMatrix {
        rotation_from_euler(&random_euler(rng))
    }

    #[test]
    fn euler_round_trip_reproduces_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let r = random_rotation(&mut rng);
            let e = euler_from_rotation(&r);
            let back = rotation_from_euler(&e);
            let diff = (r.matrix() - back.matrix()).abs().max();
            assert!(diff <= 1e-10, "round trip defect {diff:.3e}");
            assert!((0.0..std::f64::consts::TAU).contains(&e.alpha));
            assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&e.beta));
            assert!(e.gamma.abs() <= std::f64::consts::FRAC_PI_2 + 1e-15);
        }
    }

    #[test]
    fn euler_round_trip_at_gimbal_lock() {
        for sign in [1.0, -1.0] {
            for g in [-2.5, -0.3, 0.0, 0.8, 3.0] {
                let m = rot_x(g) * rot_y(sign * std::f64::consts::FRAC_PI_2);
                let r = RotationMatrix::new(m).unwrap();
                let e = euler_from_rotation(&r);
                assert_eq!(e.alpha, 0.0);
                let back = rotation_from_euler(&e);
                let diff = (r.matrix() - back.matrix()).abs().max();
                assert!(diff <= 1e-10, "lock round trip defect {diff:.3e}");
            }
        }
        // Near-lock composite poses with a z-rotation folded in.
        let m = rot_x(0.4) * rot_y(std::f64::consts::FRAC_PI_2 - 1e-12) * rot_z(1.3);
        let r = RotationMatrix::new(m).unwrap();
        let e = euler_from_rotation(&r);
        let diff = (r.matrix() - rotation_from_euler(&e).matrix()).abs().max();
        assert!(diff <= 1e-10);
    }

    #[test]
    fn compose_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let g = RigidMotion::new(
                Vector3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ),
                random_rotation(&mut rng),
            );
            let e = g.compose(&g.inverse());
            assert!(e.translation.norm() <= 1e-12);
            let drift = (e.rotation.matrix() - Matrix3::identity()).abs().max();
            assert!(drift <= 1e-12, "rotation drift {drift:.3e}");
        }
    }

    #[test]
    fn compose_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let g: Vec<RigidMotion> = (0..3)
                .map(|_| {
                    RigidMotion::new(
                        Vector3::new(
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        ),
                        random_rotation(&mut rng),
                    )
                })
                .collect();
            let a = g[0].compose(&g[1]).compose(&g[2]);
            let b = g[0].compose(&g[1].compose(&g[2]));
            assert!((a.translation - b.translation).norm() <= 1e-12);
            assert!((a.rotation.matrix() - b.rotation.matrix()).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_orthonormal_matrix() {
        let mut m = Matrix3::identity();
        m[(0, 1)] = 1e-6;
        assert!(matches!(RotationMatrix::new(m), Err(Se3Error::NotOrthogonal { .. })));
        let refl = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(RotationMatrix::new(refl).is_err());
    }

    #[test]
    fn renormalized_projects_small_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let r = random_rotation(&mut rng);
            let mut m = *r.matrix();
            m[(1, 2)] += 1e-8;
            let fixed = RotationMatrix::renormalized(m).unwrap();
            assert!(orthonormality_defect(fixed.matrix()) <= 1e-14);
            assert!(r.angle_to(&fixed) <= 1e-7);
        }
    }

    #[test]
    fn frame_is_identity_permutation_at_origin() {
        let f = left_invariant_frame(&RigidMotion::identity()).unwrap();
        // Chart basis order (dx, dy, dz, dalpha, dbeta, dgamma); expected images:
        // A1=dx, A2=dy, A3=dz, A4=dgamma, A5=dbeta, A6=dalpha.
        let expected_cols = [0usize, 1, 2, 5, 4, 3];
        for (i, &col) in expected_cols.iter().enumerate() {
            for j in 0..6 {
                let want = if j == col { 1.0 } else { 0.0 };
                assert!(
                    (f[i][j] - want).abs() <= 1e-14,
                    "frame[{i}][{j}] = {} want {want}",
                    f[i][j]
                );
            }
        }
    }

    #[test]
    fn frame_and_coframe_are_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let pose = RigidMotion::new(Vector3::new(0.3, -1.0, 2.0), random_rotation(&mut rng));
            if left_invariant_frame(&pose).is_err() {
                continue;
            }
            let f = left_invariant_frame(&pose).unwrap();
            let w = co_frame(&pose).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    let pair: f64 = (0..6).map(|t| w[i][t] * f[j][t]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((pair - want).abs() <= 1e-10, "<w^{i}, A_{j}> = {pair}");
                }
            }
        }
    }

    #[test]
    fn frame_rejects_gimbal_lock() {
        let pose = RigidMotion::new(
            Vector3::zeros(),
            RotationMatrix::new(rot_y(std::f64::consts::FRAC_PI_2)).unwrap(),
        );
        assert!(matches!(left_invariant_frame(&pose), Err(Se3Error::ChartSingular { .. })));
    }

    /// The translational fields commute, rotations act on translations like the
    /// cross product, and the rotational fields close among themselves.
    #[test]
    fn structure_constants_table_is_se3() {
        let sc = structure_constants();
        let mut expected = [[[0.0f64; 6]; 6]; 6];
        // [A4,A5]=A6, [A5,A6]=A4, [A6,A4]=A5.
        expected[5][3][4] = 1.0;
        expected[3][4][5] = 1.0;
        expected[4][5][3] = 1.0;
        // [rot_i, trans_j] = eps_ijk trans_k.
        let eps = |i: usize, j: usize, k: usize| -> f64 {
            match (i, j, k) {
                (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
                _ => 0.0,
            }
        };
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let v = eps(i, j, k);
                    if v != 0.0 {
                        expected[k][3 + i][j] = v;
                    }
                }
            }
        }
        // Antisymmetrize.
        for k in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    if expected[k][i][j] != 0.0 {
                        expected[k][j][i] = -expected[k][i][j];
                    }
                }
            }
        }
        for k in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    assert_eq!(sc.get(k, i, j), expected[k][i][j], "c^{k}_{{{i}{j}}} mismatch");
                }
            }
        }
        // Spot checks: [A3,A4] = A2, [A4,A5] = A6, [A5,A3] = A1.
        assert_eq!(sc.get(1, 2, 3), 1.0);
        assert_eq!(sc.get(5, 3, 4), 1.0);
        assert_eq!(sc.get(0, 4, 2), 1.0);
    }

    #[test]
    fn structure_constants_satisfy_jacobi() {
        let sc = structure_constants();
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    assert_eq!(sc.get(k, i, j), -sc.get(k, j, i));
                }
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    for m in 0..6 {
                        let mut total = 0.0;
                        for l in 0..6 {
                            total += sc.get(l, i, j) * sc.get(m, l, k)
                                + sc.get(l, j, k) * sc.get(m, l, i)
                                + sc.get(l, k, i) * sc.get(m, l, j);
                        }
                        assert_eq!(total, 0.0, "Jacobi fails at ({i},{j},{k},{m})");
                    }
                }
            }
        }
    }

    /// Push-forward check: the analytic frame columns match finite differences
    /// of curves `t -> g . exp(t A_i)` through the chart.
    #[test]
    fn frame_matches_finite_difference_pushforward() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let h = 1e-6;
        for _ in 0..20 {
            let e = random_euler(&mut rng);
            if e.beta.cos().abs() < 0.1 {
                continue;
            }
            let pose = RigidMotion::new(Vector3::new(0.1, 0.2, -0.4), rotation_from_euler(&e));
            let f = left_invariant_frame(&pose).unwrap();
            for i in 0..6 {
                let flow = |t: f64| -> [f64; 6] {
                    // exp(t A_i): translations move along e_i at identity,
                    // rotations are R_x, R_y, R_z.
                    let step = match i {
                        0 => {
                            RigidMotion::new(Vector3::new(t, 0.0, 0.0), RotationMatrix::identity())
                        }
                        1 => {
                            RigidMotion::new(Vector3::new(0.0, t, 0.0), RotationMatrix::identity())
                        }
                        2 => {
                            RigidMotion::new(Vector3::new(0.0, 0.0, t), RotationMatrix::identity())
                        }
                        3 => RigidMotion::new(
                            Vector3::zeros(),
                            RotationMatrix::new(rot_x(t)).unwrap(),
                        ),
                        4 => RigidMotion::new(
                            Vector3::zeros(),
                            RotationMatrix::new(rot_y(t)).unwrap(),
                        ),
                        _ => RigidMotion::new(
                            Vector3::zeros(),
                            RotationMatrix::new(rot_z(t)).unwrap(),
                        ),
                    };
                    let g = pose.compose(&step);
                    let eu = euler_from_rotation(&g.rotation);
                    [g.translation.x, g.translation.y, g.translation.z, eu.alpha, eu.beta, eu.gamma]
                };
                let plus = flow(h);
                let minus = flow(-h);
                for j in 0..6 {
                    let mut d = plus[j] - minus[j];
                    // alpha wraps at 2pi.
                    if j == 3 {
                        if d > std::f64::consts::PI {
                            d -= std::f64::consts::TAU;
                        }
                        if d < -std::f64::consts::PI {
                            d += std::f64::consts::TAU;
                        }
                    }
                    let fd = d / (2.0 * h);
                    assert!(
                        (fd - f[i][j]).abs() <= 1e-6 * (1.0 + fd.abs()),
                        "field {i} comp {j}: fd {fd} vs analytic {}",
                        f[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn frenet_frame_validation() {
        let t = Vector3::z();
        let n = Vector3::x();
        let f = FrenetFrame::from_tangent_normal(t, n).unwrap();
        assert!((f.b - Vector3::y()).norm() <= 1e-15);
        assert!(FrenetFrame::new(t, t, Vector3::y()).is_err());
        assert!(FrenetFrame::new(t, n, -Vector3::y()).is_err());
    }
}
