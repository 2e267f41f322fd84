//! Exponential map: momenta, its domain, symmetries and the boundary of the
//! reachable cone.
//!
//! A unit-speed cuspless geodesic is generated by an initial momentum
//! covector on the constraint sphere `beta^-2 l3^2 + l4^2 + l5^2 = 1` with
//! `l3 >= 0` and `l6 = 0`. The exponential map sends `(momentum, length)` to
//! the endpoint pose; lengths run up to the cusp arclength of the generated
//! geodesic. The reachable set from the origin is bounded by three strata:
//! endpoints of curves run to their cusp, traces of curves started at a
//! cusp, and rotations with no displacement.

use crate::geodesic::{CurveSample, GeodesicError, GeodesicInit};
use crate::se3::{RigidMotion, RotationMatrix};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rayon::prelude::*;
use thiserror::Error;

/// Largest allowed violation of the momentum constraint sphere.
pub const CONSTRAINT_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ExpMapError {
    #[error("momentum violates the constraint sphere by {residual:.3e}")]
    NotInC { residual: f64 },
    #[error("length {l} exceeds the cusp arclength {s_max}")]
    OutOfDomain { l: f64, s_max: f64 },
    #[error("matrix is not orthogonal (defect {defect:.3e})")]
    NotOrthogonal { defect: f64 },
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
}

/// Initial momentum covector of a unit-speed cuspless geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum {
    lambda: [f64; 6],
    beta: f64,
}

impl Momentum {
    /// Validates the constraint sphere: `beta^-2 l3^2 + l4^2 + l5^2 = 1`,
    /// `l3 >= 0` (no initial cusp overshoot) and `l6 = 0`.
    pub fn new(lambda: [f64; 6], beta: f64) -> Result<Self, ExpMapError> {
        if !(beta > 0.0) || lambda.iter().any(|v| !v.is_finite()) {
            return Err(ExpMapError::NotInC { residual: f64::INFINITY });
        }
        let residual =
            (lambda[2] * lambda[2] / (beta * beta) + lambda[3] * lambda[3] + lambda[4] * lambda[4]
                - 1.0)
                .abs();
        if residual > CONSTRAINT_TOL || lambda[2] < 0.0 || lambda[5] != 0.0 {
            return Err(ExpMapError::NotInC { residual: residual.max(lambda[5].abs()) });
        }
        Ok(Self { lambda, beta })
    }

    /// Momentum of the geodesic with the given initial data.
    pub fn from_init(g: &GeodesicInit) -> Self {
        let w0 = g.w0();
        let dw0 = g.dw0();
        let beta = g.beta();
        let l3 = beta * (1.0 - w0.norm_squared()).max(0.0).sqrt();
        Self { lambda: [-dw0.x, -dw0.y, l3, -w0.y, w0.x, 0.0], beta }
    }

    pub fn lambda(&self) -> [f64; 6] {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Initial data of the generated geodesic: `w0 = (l5, -l4)`,
    /// `dw0 = (-l1, -l2)`.
    pub fn to_init(&self) -> GeodesicInit {
        GeodesicInit::new(
            Vector2::new(self.lambda[4], -self.lambda[3]),
            Vector2::new(-self.lambda[0], -self.lambda[1]),
            self.beta,
        )
        .expect("constraint sphere maps into the admissible set")
    }

    /// Cusp arclength of the generated geodesic.
    pub fn s_max(&self) -> f64 {
        self.to_init().s_max()
    }

    /// Initial curvature components `(kappa_1, kappa_2)`; infinite at a cusp.
    pub fn initial_curvature(&self) -> (f64, f64) {
        let root = (1.0 - self.lambda[3] * self.lambda[3] - self.lambda[4] * self.lambda[4])
            .max(0.0)
            .sqrt();
        let div = |num: f64| {
            if root > 0.0 {
                num / root
            } else if num == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(num)
            }
        };
        (div(self.beta * self.lambda[4]), div(-self.beta * self.lambda[3]))
    }
}

/// A point of the exponential map's domain: a momentum plus a length not
/// exceeding the cusp arclength (which must be positive).
#[derive(Debug, Clone, Copy)]
pub struct ExpDomainPoint {
    momentum: Momentum,
    length: f64,
}

impl ExpDomainPoint {
    pub fn new(momentum: Momentum, length: f64) -> Result<Self, ExpMapError> {
        let s_max = momentum.s_max();
        if s_max == 0.0 || !(length >= 0.0) || length > s_max * (1.0 + 1e-12) {
            return Err(ExpMapError::OutOfDomain { l: length, s_max });
        }
        Ok(Self { momentum, length: length.min(s_max) })
    }

    pub fn momentum(&self) -> Momentum {
        self.momentum
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// The exponential map: endpoint pose of the geodesic generated by the
/// momentum, run for the given length.
pub fn exp(p: &ExpDomainPoint) -> RigidMotion {
    p.momentum.to_init().evaluate(p.length).expect("domain was validated at construction")
}

/// Conjugates a momentum by the planar orthogonal matrix `q` (rotation or
/// reflection about the vertical axis): `(l1, l2)` rotates by `q`, `l3` is
/// fixed and `(l4, l5)` rotates by `det(q) q`. Reflections flip the
/// wronskian, rotations preserve it; the cusp arclength is invariant.
pub fn symmetry_transform(m: &Momentum, q: &Matrix2<f64>) -> Result<Momentum, ExpMapError> {
    check_orthogonal_2(q)?;
    let det = q.determinant().signum();
    let l = m.lambda;
    let a = q * Vector2::new(l[0], l[1]);
    let b = det * (q * Vector2::new(l[3], l[4]));
    Momentum::new([a.x, a.y, l[2], b.x, b.y, 0.0], m.beta)
}

/// Checks equivariance of the exponential map under `q`: the transformed
/// momentum's geodesic must be the conjugated geodesic. Returns the largest
/// deviation (translation norm or rotation Frobenius distance) over a short
/// grid of arclengths up to `l`.
pub fn verify_symmetry(m: &Momentum, q: &Matrix2<f64>, l: f64) -> Result<f64, ExpMapError> {
    check_orthogonal_2(q)?;
    let m2 = symmetry_transform(m, q)?;
    let g1 = m.to_init();
    let g2 = m2.to_init();
    let qhat = Matrix3::new(q[(0, 0)], q[(0, 1)], 0.0, q[(1, 0)], q[(1, 1)], 0.0, 0.0, 0.0, 1.0);
    let mut worst = 0.0f64;
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let s = frac * l;
        let p1 = g1.evaluate(s)?;
        let p2 = g2.evaluate(s)?;
        let dx = (qhat * p1.translation - p2.translation).norm();
        let dr = (qhat * p1.rotation.matrix() * qhat.transpose() - p2.rotation.matrix()).norm();
        worst = worst.max(dx).max(dr);
    }
    Ok(worst)
}

fn check_orthogonal_2(q: &Matrix2<f64>) -> Result<(), ExpMapError> {
    let defect = (q.transpose() * q - Matrix2::identity()).abs().max();
    if defect > 1e-12 {
        return Err(ExpMapError::NotOrthogonal { defect });
    }
    Ok(())
}

/// Which stratum of the reachable-cone boundary a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClass {
    /// Endpoint of a geodesic run all the way to its cusp.
    EndCusp,
    /// Point on the trace of a geodesic started at a cusp.
    StartCusp,
}

/// One sampled point of the reachable-cone boundary: position and unit
/// tangent there.
#[derive(Debug, Clone, Copy)]
pub struct ConePoint {
    pub x1: Vector3<f64>,
    pub n1: Vector3<f64>,
    pub class: BoundaryClass,
}

/// Grid resolution for [`sample_cone_boundary`]. Angular grids are uniform
/// over the full circle so the sample set is closed under the reflection
/// symmetries of the cone.
#[derive(Debug, Clone, Copy)]
pub struct ConeGrid {
    /// Radial steps of `|w0|` in `[0, 1)` for the end-cusp stratum.
    pub r_steps: usize,
    /// Angular steps of the `w0` direction.
    pub theta_steps: usize,
    /// Radial steps of `|dw0|` in `(0, rho_max]`.
    pub rho_steps: usize,
    /// Angular steps of the `dw0` direction (end-cusp stratum).
    pub psi_steps: usize,
    pub rho_max: f64,
    /// Interior steps of the start-cusp inward angle in `(-pi/2, pi/2)`.
    pub delta_steps: usize,
    /// Arclength fractions per start-cusp curve.
    pub s_steps: usize,
    /// Horizon: end-cusp nodes with a cusp beyond this arclength are
    /// skipped, start-cusp traces are truncated to it.
    pub s_cap: f64,
}

impl Default for ConeGrid {
    fn default() -> Self {
        Self {
            r_steps: 12,
            theta_steps: 16,
            rho_steps: 8,
            psi_steps: 16,
            rho_max: 2.0,
            delta_steps: 9,
            s_steps: 10,
            s_cap: 10.0,
        }
    }
}

/// Deterministic sample of the two curved strata of the reachable-cone
/// boundary, evaluated in parallel. End-cusp samples are endpoints at the
/// cusp arclength over a polar grid of initial data (grid nodes whose cusp
/// arclength is zero or infinite are skipped); start-cusp samples run along
/// curves launched from the cusp circle with strictly inward derivative.
/// The zero-displacement stratum is the predicate
/// [`zero_displacement_admissible`], not a sample set.
pub fn sample_cone_boundary(grid: &ConeGrid, beta: f64) -> Vec<ConePoint> {
    let tau = std::f64::consts::TAU;
    let mut end_inits: Vec<GeodesicInit> = Vec::new();
    for ir in 0..grid.r_steps {
        let r = ir as f64 / grid.r_steps as f64;
        let thetas = if ir == 0 { 1 } else { grid.theta_steps };
        for it in 0..thetas {
            let th = tau * it as f64 / grid.theta_steps.max(1) as f64;
            for ip in 1..=grid.rho_steps {
                let rho = grid.rho_max * ip as f64 / grid.rho_steps as f64;
                for is in 0..grid.psi_steps {
                    let ps = tau * is as f64 / grid.psi_steps as f64;
                    let w0 = r * Vector2::new(th.cos(), th.sin());
                    let dw0 = rho * Vector2::new(ps.cos(), ps.sin());
                    if let Ok(g) = GeodesicInit::new(w0, dw0, beta) {
                        end_inits.push(g);
                    }
                }
            }
        }
    }
    let mut out: Vec<ConePoint> = end_inits
        .par_iter()
        .filter_map(|g| {
            let smax = g.s_max();
            // The cap also drops near-decay grid nodes whose cusp lies far
            // outside the region of interest.
            if smax == 0.0 || !(smax <= grid.s_cap) {
                return None;
            }
            let sample = g.sample(smax).ok()?;
            Some(ConePoint { x1: sample.x, n1: sample.tangent(), class: BoundaryClass::EndCusp })
        })
        .collect();

    let mut start_curves: Vec<GeodesicInit> = Vec::new();
    for it in 0..grid.theta_steps {
        let th = tau * it as f64 / grid.theta_steps as f64;
        for id in 0..grid.delta_steps {
            let delta = -std::f64::consts::FRAC_PI_2
                + std::f64::consts::PI * (id + 1) as f64 / (grid.delta_steps + 1) as f64;
            for ip in 1..=grid.rho_steps {
                let rho = grid.rho_max * ip as f64 / grid.rho_steps as f64;
                let w0 = Vector2::new(th.cos(), th.sin());
                let dir = th + std::f64::consts::PI + delta;
                let dw0 = rho * Vector2::new(dir.cos(), dir.sin());
                if let Ok(g) = GeodesicInit::new(w0, dw0, beta) {
                    if w0.dot(&dw0) < 0.0 {
                        start_curves.push(g);
                    }
                }
            }
        }
    }
    let start_points: Vec<ConePoint> = start_curves
        .par_iter()
        .flat_map_iter(|g| {
            let span = g.s_max().min(grid.s_cap);
            let steps = grid.s_steps;
            (1..=steps).filter_map(move |m| {
                let s = span * m as f64 / steps as f64;
                let sample = g.sample(s).ok()?;
                Some(ConePoint {
                    x1: sample.x,
                    n1: sample.tangent(),
                    class: BoundaryClass::StartCusp,
                })
            })
        })
        .collect();
    out.extend(start_points);
    out
}

/// Membership predicate of the zero-displacement stratum: a pure rotation is
/// on the closure of the reachable set iff it does not turn the tangent
/// against the start direction (`(R e_z) . e_z >= 0`).
pub fn zero_displacement_admissible(r: &RotationMatrix) -> bool {
    r.matrix()[(2, 2)] >= 0.0
}

/// Endpoint samples with their generating data, convenient for tests.
pub fn end_cusp_sample(g: &GeodesicInit) -> Result<CurveSample, ExpMapError> {
    let smax = g.s_max();
    if smax == 0.0 || !smax.is_finite() {
        return Err(ExpMapError::OutOfDomain { l: smax, s_max: smax });
    }
    Ok(g.sample(smax)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn init(w0: (f64, f64), dw0: (f64, f64), beta: f64) -> GeodesicInit {
        GeodesicInit::new(Vector2::new(w0.0, w0.1), Vector2::new(dw0.0, dw0.1), beta).unwrap()
    }

    fn random_momentum(rng: &mut ChaCha8Rng, beta: f64) -> Momentum {
        let r: f64 = rng.gen_range(0.0..0.95f64);
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        let m: f64 = rng.gen_range(0.0..2.0);
        let ps = rng.gen_range(0.0..std::f64::consts::TAU);
        Momentum::from_init(&init((r * th.cos(), r * th.sin()), (m * ps.cos(), m * ps.sin()), beta))
    }

    #[test]
    fn momentum_validation() {
        // Constraint sphere with beta = 2: l3 = 2 sqrt(1 - l4^2 - l5^2).
        let ok = Momentum::new([0.3, -0.1, 2.0 * (1.0f64 - 0.25).sqrt(), 0.5, 0.0, 0.0], 2.0);
        assert!(ok.is_ok());
        let bad = Momentum::new([0.3, -0.1, 1.8, 0.5, 0.0, 0.0], 2.0);
        assert!(matches!(bad, Err(ExpMapError::NotInC { .. })));
        let neg = Momentum::new([0.0, 0.0, -1.0, 0.0, 0.0, 0.0], 1.0);
        assert!(matches!(neg, Err(ExpMapError::NotInC { .. })));
        let l6 = Momentum::new([0.0, 0.0, 1.0, 0.0, 0.0, 0.1], 1.0);
        assert!(matches!(l6, Err(ExpMapError::NotInC { .. })));
    }

    #[test]
    fn momentum_round_trips_initial_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..30 {
            let beta = rng.gen_range(0.5..2.0);
            let g = {
                let r: f64 = rng.gen_range(0.0..0.99f64);
                let th = rng.gen_range(0.0..std::f64::consts::TAU);
                let m: f64 = rng.gen_range(0.0..2.0);
                let ps = rng.gen_range(0.0..std::f64::consts::TAU);
                init((r * th.cos(), r * th.sin()), (m * ps.cos(), m * ps.sin()), beta)
            };
            let m = Momentum::from_init(&g);
            assert!(Momentum::new(m.lambda(), beta).is_ok(), "from_init lands on the sphere");
            let back = m.to_init();
            assert_eq!(back.w0(), g.w0());
            assert_eq!(back.dw0(), g.dw0());
            assert_eq!(back.beta(), g.beta());
        }
    }

    #[test]
    fn exp_agrees_with_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..50 {
            let beta = rng.gen_range(0.5..2.0);
            let m = random_momentum(&mut rng, beta);
            let g = m.to_init();
            let smax = g.s_max();
            if smax == 0.0 {
                continue;
            }
            let l = rng.gen_range(0.0..1.0) * smax.min(8.0 / beta);
            let p = ExpDomainPoint::new(m, l).unwrap();
            let via_exp = exp(&p);
            let direct = g.evaluate(l).unwrap();
            assert!((via_exp.translation - direct.translation).norm() <= 1e-12);
            assert!((via_exp.rotation.matrix() - direct.rotation.matrix()).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn exp_domain_is_enforced() {
        let m = Momentum::from_init(&init((0.5, 0.0), (0.0, 0.0), 1.0));
        let smax = m.s_max();
        assert!(ExpDomainPoint::new(m, smax).is_ok());
        assert!(matches!(
            ExpDomainPoint::new(m, smax + 0.01),
            Err(ExpMapError::OutOfDomain { .. })
        ));
        // Point geodesics have an empty domain.
        let point = Momentum::from_init(&init((1.0, 0.0), (0.0, 0.0), 1.0));
        assert!(matches!(ExpDomainPoint::new(point, 0.0), Err(ExpMapError::OutOfDomain { .. })));
    }

    #[test]
    fn initial_curvature_matches_geodesic() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let beta = rng.gen_range(0.5..2.0);
            let m = random_momentum(&mut rng, beta);
            let g = m.to_init();
            if g.s_max() == 0.0 {
                continue;
            }
            let (k1, k2) = m.initial_curvature();
            let (kappa, _) = g.curvature_torsion(0.0).unwrap();
            assert!(((k1 * k1 + k2 * k2).sqrt() - kappa).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetry_transform_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for trial in 0..40 {
            let beta = rng.gen_range(0.5..1.5);
            let m = random_momentum(&mut rng, beta);
            let g = m.to_init();
            let smax = g.s_max();
            if smax == 0.0 {
                continue;
            }
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let (sa, ca) = ang.sin_cos();
            let q = if trial % 2 == 0 {
                Matrix2::new(ca, -sa, sa, ca)
            } else {
                Matrix2::new(ca, sa, sa, -ca)
            };
            let l = 0.9 * smax.min(6.0 / beta);
            let dev = verify_symmetry(&m, &q, l).unwrap();
            assert!(dev <= 1e-8, "symmetry deviation {dev:.3e}");
            // Cusp arclength is invariant; the wronskian flips under
            // reflections and is kept by rotations.
            let m2 = symmetry_transform(&m, &q).unwrap();
            assert!((m2.s_max() - smax).abs() <= 1e-10 * (1.0 + smax));
            let w1 = g.invariants().wronskian;
            let w2 = m2.to_init().invariants().wronskian;
            let det = q.determinant().signum();
            assert!((w2 - det * w1).abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetry_rejects_non_orthogonal() {
        let m = Momentum::from_init(&init((0.5, 0.0), (0.1, 0.2), 1.0));
        let q = Matrix2::new(1.0, 0.1, 0.0, 1.0);
        assert!(matches!(symmetry_transform(&m, &q), Err(ExpMapError::NotOrthogonal { .. })));
    }

    #[test]
    fn cone_boundary_sampling_is_deterministic_and_sane() {
        let grid = ConeGrid {
            r_steps: 4,
            theta_steps: 6,
            rho_steps: 3,
            psi_steps: 6,
            rho_max: 1.5,
            delta_steps: 3,
            s_steps: 4,
            s_cap: 6.0,
        };
        let a = sample_cone_boundary(&grid, 1.0);
        let b = sample_cone_boundary(&grid, 1.0);
        assert_eq!(a.len(), b.len());
        assert!(!a.is_empty());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.x1, q.x1);
            assert_eq!(p.n1, q.n1);
            assert_eq!(p.class, q.class);
        }
        for p in &a {
            assert!(p.x1.iter().all(|v| v.is_finite()));
            assert!((p.n1.norm() - 1.0).abs() < 1e-9);
            if p.class == BoundaryClass::StartCusp {
                assert!(p.x1.z >= -1e-10, "start-cusp trace dips to z = {}", p.x1.z);
            }
        }
        assert!(a.iter().any(|p| p.class == BoundaryClass::EndCusp));
        assert!(a.iter().any(|p| p.class == BoundaryClass::StartCusp));
    }

    #[test]
    fn zero_displacement_predicate() {
        assert!(zero_displacement_admissible(&RotationMatrix::identity()));
        // Rotation by pi about e_x sends e_z to -e_z: not admissible.
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
        assert!(!zero_displacement_admissible(&RotationMatrix::new(m).unwrap()));
        // Rotation by pi/2 about e_x is the margin: admissible.
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert!(zero_displacement_admissible(&RotationMatrix::new(m).unwrap()));
    }
}
