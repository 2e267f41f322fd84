//! Closed-form evaluation of cuspless geodesics.
//!
//! A geodesic is determined by the normalized curvature `w(s) = k/sqrt(k^2 +
//! beta^2)` (`k` the curvature vector in the rotating frame), which solves
//! `w'' = beta^2 w` and is therefore a cosh/sinh combination of the initial
//! data `(w0, dw0)`. Everything else follows: conserved quantities, the cusp
//! arclength `s_max` where `|w| = 1`, curvature/torsion profiles and the
//! spatial curve itself, which is assembled in an adapted frame out of one
//! scalar quadrature for the first component and (off the coplanar stratum) a
//! rotation angle quadrature for the remaining two.

use crate::quad;
use crate::se3::{FrenetFrame, RigidMotion, RotationMatrix};
use nalgebra::{Matrix3, Vector2, Vector3};
use thiserror::Error;

/// Absolute tolerance for the internal quadratures.
pub const QUAD_TOL: f64 = 1e-10;

/// Below this curvature the Frenet normal is ill-conditioned and rotations
/// fall back to direct integration of the frame ODE.
pub const KAPPA_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeodesicError {
    #[error("inadmissible initial data: {reason}")]
    InvalidInit { reason: &'static str },
    #[error("arclength {s} outside the cuspless range [0, {s_max}]")]
    OutOfDomain { s: f64, s_max: f64 },
    #[error("curvature is unbounded at the cusp (s = {s}, s_max = {s_max})")]
    CuspReached { s: f64, s_max: f64 },
    #[error("degenerate point geodesic")]
    Degenerate,
    #[error("{0}")]
    NotApplicable(&'static str),
}

/// Initial data of a cuspless geodesic: normalized curvature `w0` (inside the
/// closed unit disk), its derivative `dw0`, and the bending weight `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicInit {
    w0: Vector2<f64>,
    dw0: Vector2<f64>,
    beta: f64,
}

/// Conserved quantities of a geodesic.
///
/// `c` scales the spatial velocity of the adapted-frame first coordinate and
/// `wronskian` is the constant `w1 dw2 - w2 dw1`, which is also the torsion
/// numerator. `c > 0` for every non-point geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicInvariants {
    pub c: f64,
    pub wronskian: f64,
}

/// One evaluated point of a geodesic.
///
/// `frame` is absent where the curvature vanishes (the Frenet normal is
/// undefined there). `kappa` is infinite exactly at the cusp. Neighboring
/// samples of a sampled curve satisfy `|dx/ds| = 1` to finite-difference
/// accuracy.
#[derive(Debug, Clone, Copy)]
pub struct CurveSample {
    pub s: f64,
    pub x: Vector3<f64>,
    pub rotation: RotationMatrix,
    pub frame: Option<FrenetFrame>,
    pub kappa: f64,
    pub tau: f64,
}

impl CurveSample {
    /// Unit tangent, the third column of the rotation.
    pub fn tangent(&self) -> Vector3<f64> {
        *self.rotation.matrix() * Vector3::z()
    }
}

#[derive(Debug, Clone, Copy)]
enum Branch {
    /// `w identically 0`: the straight line along `e_z`.
    Straight,
    /// `s_max = 0`; only the base point itself is on the curve.
    Point,
    /// `dw0 = 0` exactly.
    ZeroDw,
    /// `dw0 != 0`, wronskian exactly zero (planar curve).
    PlanarDw { u: Vector2<f64> },
    /// Generic curve with torsion.
    General { yz0: Vector2<f64>, d0: f64 },
}

/// Precomputed per-init constants shared by all evaluation entry points.
struct Closed {
    w0: Vector2<f64>,
    dw0: Vector2<f64>,
    beta: f64,
    c: f64,
    wron: f64,
    smax: f64,
    /// Transpose of the adapted initial frame; maps adapted coordinates back.
    rt0t: Matrix3<f64>,
    xt0: Vector3<f64>,
    branch: Branch,
}

struct Assembled {
    s: f64,
    x: Vector3<f64>,
    rotation: RotationMatrix,
    frame: Option<FrenetFrame>,
    kappa: f64,
    tau: f64,
}

impl GeodesicInit {
    pub fn new(w0: Vector2<f64>, dw0: Vector2<f64>, beta: f64) -> Result<Self, GeodesicError> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(GeodesicError::InvalidInit { reason: "beta must be positive and finite" });
        }
        if !(w0.x.is_finite() && w0.y.is_finite() && dw0.x.is_finite() && dw0.y.is_finite()) {
            return Err(GeodesicError::InvalidInit { reason: "non-finite component" });
        }
        if w0.norm_squared() > 1.0 + 1e-12 {
            return Err(GeodesicError::InvalidInit { reason: "|w0| must not exceed 1" });
        }
        let init = Self { w0, dw0, beta };
        // c^2 beta^2 - |dw0|^2 = beta^2 (1 - |w0|^2) >= 0 up to roundoff.
        debug_assert!({
            let inv = init.invariants();
            let lhs = (inv.c * beta).powi(2) - dw0.norm_squared();
            let rhs = beta.powi(2) * (1.0 - w0.norm_squared());
            (lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs())
        });
        Ok(init)
    }

    pub fn w0(&self) -> Vector2<f64> {
        self.w0
    }

    pub fn dw0(&self) -> Vector2<f64> {
        self.dw0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn invariants(&self) -> GeodesicInvariants {
        let c2 = 1.0 - self.w0.norm_squared() + self.dw0.norm_squared() / self.beta.powi(2);
        // A wronskian at the roundoff floor of its two products is
        // arithmetic noise from data meant to be coplanar (for example a
        // direction and its rotation by pi); treat it as exactly zero so the
        // twisted-curve formulas never run on noise. Deliberately small
        // wronskians sit far above this scale.
        let raw = self.w0.x * self.dw0.y - self.w0.y * self.dw0.x;
        let floor =
            8.0 * f64::EPSILON * ((self.w0.x * self.dw0.y).abs() + (self.w0.y * self.dw0.x).abs());
        GeodesicInvariants {
            c: c2.max(0.0).sqrt(),
            wronskian: if raw.abs() <= floor { 0.0 } else { raw },
        }
    }

    /// Normalized curvature and its derivative at arclength `s`.
    pub fn normalized_curvature(&self, s: f64) -> (Vector2<f64>, Vector2<f64>) {
        let (sh, ch) = sinh_cosh(self.beta * s);
        (ch * self.w0 + (sh / self.beta) * self.dw0, (self.beta * sh) * self.w0 + ch * self.dw0)
    }

    /// First arclength at which `|w| = 1` and the curve ends in a cusp.
    ///
    /// Infinite exactly when `beta w0 + dw0 = 0` (that `w` decays forever).
    /// Zero for initial data already at a cusp that does not re-enter the
    /// disk. For cusp-start data (`|w0| = 1`, `w0 . dw0 < 0`) this is the
    /// return time to the cusp circle.
    pub fn s_max(&self) -> f64 {
        let denom = (self.w0 + self.dw0 / self.beta).norm_squared();
        if denom == 0.0 {
            return f64::INFINITY;
        }
        let inv = self.invariants();
        let rad = (inv.c.powi(2) - (inv.wronskian / self.beta).powi(2)).max(0.0);
        let num = 1.0 + inv.c.powi(2) + 2.0 * rad.sqrt();
        ((num / denom).ln() / (2.0 * self.beta)).max(0.0)
    }

    /// Arclength of the interior minimum of `|w|`; `+inf` flags "no interior
    /// minimum" (`|w|` strictly decreasing forever, `beta w0 + dw0 = 0`), `0`
    /// when `|w|` is nondecreasing from the start.
    pub fn s_min(&self) -> f64 {
        let sum = self.beta * self.w0 + self.dw0;
        if sum.norm_squared() == 0.0 {
            return f64::INFINITY;
        }
        if self.w0.dot(&self.dw0) > 0.0 {
            return 0.0;
        }
        let diff = self.beta * self.w0 - self.dw0;
        ((diff.norm() / sum.norm()).ln() / (2.0 * self.beta)).max(0.0)
    }

    /// Minima of `|w|` and `|dw|` over the whole (maximal) trajectory.
    pub fn min_normalized_curvature(&self) -> (f64, f64) {
        let inv = self.invariants();
        let u = 1.0 - inv.c.powi(2);
        let disc = (u.powi(2) + 4.0 * (inv.wronskian / self.beta).powi(2)).sqrt();
        let min_w = (0.5 * (disc + u)).max(0.0).sqrt();
        let min_dw = self.beta * (0.5 * (disc - u)).max(0.0).sqrt();
        (min_w, min_dw)
    }

    /// Curvature magnitude and torsion at arclength `s < s_max`.
    pub fn curvature_torsion(&self, s: f64) -> Result<(f64, f64), GeodesicError> {
        let smax = self.s_max();
        if !s.is_finite() || s < 0.0 {
            return Err(GeodesicError::OutOfDomain { s, s_max: smax });
        }
        if s >= smax {
            return Err(GeodesicError::CuspReached { s, s_max: smax });
        }
        let (w, _) = self.normalized_curvature(s);
        Ok(curvature_torsion_of(&w, self.invariants().wronskian, self.beta))
    }

    /// First adapted-frame coordinate: `(1/c) * integral of sqrt(1 - |w|^2)`.
    pub fn tilde_x(&self, s: f64) -> Result<f64, GeodesicError> {
        let smax = self.s_max();
        check_range(s, smax)?;
        let inv = self.invariants();
        if inv.c == 0.0 {
            return Err(GeodesicError::Degenerate);
        }
        let (v, _) = quad::integrate(&mut |t| self.speed_integrand(t), 0.0, s.min(smax), QUAD_TOL);
        Ok(v / inv.c)
    }

    /// In-plane rotation angle of the adapted-frame pair; strictly monotone
    /// with the sign of the wronskian and bounded by `pi` in magnitude.
    /// Only defined off the coplanar stratum.
    pub fn phi(&self, s: f64) -> Result<f64, GeodesicError> {
        let inv = self.invariants();
        if inv.wronskian == 0.0 {
            return Err(GeodesicError::NotApplicable("phi is undefined for coplanar curves"));
        }
        let smax = self.s_max();
        check_range(s, smax)?;
        let cb = inv.c * self.beta;
        let wcb2 = (inv.wronskian / cb).powi(2);
        let mut f = |t: f64| {
            let (w, _) = self.normalized_curvature(t);
            let nw2 = w.norm_squared();
            let p = (1.0 - nw2).max(0.0);
            (inv.wronskian / cb) * self.beta * p.sqrt() / (nw2 - wcb2)
        };
        let (v, _) = quad::integrate(&mut f, 0.0, s.min(smax), QUAD_TOL);
        Ok(v)
    }

    /// Pose at arclength `s` of the curve started at the origin pointing
    /// along `e_z`. The pose stays finite at `s = s_max` even though the
    /// curvature does not.
    pub fn evaluate(&self, s: f64) -> Result<RigidMotion, GeodesicError> {
        Ok(self.sample(s)?.into_pose())
    }

    /// Pose, frame, curvature and torsion at arclength `s`.
    pub fn sample(&self, s: f64) -> Result<CurveSample, GeodesicError> {
        let closed = self.closed();
        let s = check_range(s, closed.smax)?;
        if s == 0.0 {
            return Ok(closed.base_sample());
        }
        let (sh, ch) = sinh_cosh(self.beta * s);
        let xt1 = match closed.branch {
            Branch::Straight => 0.0,
            _ => self.tilde_x(s)?,
        };
        let phi = match closed.branch {
            Branch::General { .. } => self.phi(s)?,
            _ => 0.0,
        };
        let a = closed.assemble(s, ch, sh, xt1, phi);
        Ok(closed.to_sample(a))
    }

    /// Samples the curve on the uniform grid `s_i = i l / (n - 1)`.
    ///
    /// Equivalent to calling [`Self::sample`] per grid point but runs the two
    /// quadratures cumulatively panel by panel, which is what makes the
    /// closed-form path cheaper than an ODE integrator at high sample counts.
    pub fn sample_curve(&self, l: f64, n: usize) -> Result<Vec<CurveSample>, GeodesicError> {
        if n < 2 {
            return Err(GeodesicError::InvalidInit { reason: "need at least two samples" });
        }
        if !l.is_finite() || l <= 0.0 {
            return Err(GeodesicError::InvalidInit {
                reason: "arclength must be positive and finite",
            });
        }
        let closed = self.closed();
        let l = check_range(l, closed.smax)?;
        let h = l / (n - 1) as f64;
        let mut out = Vec::with_capacity(n);
        out.push(closed.base_sample());
        if matches!(closed.branch, Branch::Straight) {
            for i in 1..n {
                let s = i as f64 * h;
                let mut b = closed.base_sample();
                b.s = s;
                b.x = Vector3::new(0.0, 0.0, s);
                out.push(b);
            }
            return Ok(out);
        }

        let inv_c = 1.0 / closed.c;
        let needs_phi = matches!(closed.branch, Branch::General { .. });
        // Fixed Gauss-Legendre node offsets within a panel and the matching
        // exp factors for the recurrence e^(beta t) = E * F_k.
        let offs: [f64; 5] = {
            let g1 = quad::GL5_NODES[1];
            let g2 = quad::GL5_NODES[2];
            [0.5 * (1.0 - g2), 0.5 * (1.0 - g1), 0.5, 0.5 * (1.0 + g1), 0.5 * (1.0 + g2)]
        };
        let wts: [f64; 5] = [
            quad::GL5_WEIGHTS[2],
            quad::GL5_WEIGHTS[1],
            quad::GL5_WEIGHTS[0],
            quad::GL5_WEIGHTS[1],
            quad::GL5_WEIGHTS[2],
        ];
        let factors: [f64; 5] = std::array::from_fn(|k| (self.beta * h * offs[k]).exp());
        let inv_factors: [f64; 5] = std::array::from_fn(|k| 1.0 / factors[k]);
        let step_factor = (self.beta * h).exp();
        let cb = closed.c * self.beta;
        let wcb2 = (closed.wron / cb).powi(2);

        let mut e = 1.0f64;
        let mut xt1 = 0.0f64;
        let mut phi = 0.0f64;
        for i in 1..n {
            let s_lo = (i - 1) as f64 * h;
            let s_hi = i as f64 * h;
            let risky =
                self.beta * h > 0.02 || (closed.smax.is_finite() && s_hi > 0.995 * closed.smax);
            if risky {
                let (dx, _) =
                    quad::integrate(&mut |t| self.speed_integrand(t), s_lo, s_hi, QUAD_TOL * h / l);
                xt1 += dx;
                if needs_phi {
                    let (dp, _) = quad::integrate(
                        &mut |t| {
                            let (w, _) = self.normalized_curvature(t);
                            let nw2 = w.norm_squared();
                            (closed.wron / cb) * self.beta * (1.0 - nw2).max(0.0).sqrt()
                                / (nw2 - wcb2)
                        },
                        s_lo,
                        s_hi,
                        QUAD_TOL * h / l,
                    );
                    phi += dp;
                }
                e = (self.beta * s_hi).exp();
            } else {
                let mut acc_x = 0.0;
                let mut acc_p = 0.0;
                for k in 0..5 {
                    let ek = e * factors[k];
                    let ek_inv = (1.0 / e) * inv_factors[k];
                    let ch = 0.5 * (ek + ek_inv);
                    let sh = 0.5 * (ek - ek_inv);
                    let w = ch * self.w0 + (sh / self.beta) * self.dw0;
                    let nw2 = w.norm_squared();
                    let root = (1.0 - nw2).max(0.0).sqrt();
                    acc_x += wts[k] * root;
                    if needs_phi {
                        acc_p += wts[k] * root / (nw2 - wcb2);
                    }
                }
                xt1 += 0.5 * h * acc_x;
                if needs_phi {
                    phi += 0.5 * h * acc_p * (closed.wron / cb) * self.beta;
                }
                e *= step_factor;
                if i % 256 == 0 {
                    e = (self.beta * s_hi).exp();
                }
            }
            // After either branch `e` equals exp(beta * s_hi) up to the
            // recurrence drift, which the periodic refresh keeps near one ulp.
            let ch = 0.5 * (e + 1.0 / e);
            let sh = 0.5 * (e - 1.0 / e);
            let a = closed.assemble(s_hi, ch, sh, xt1 * inv_c, phi);
            out.push(closed.to_sample(a));
        }
        Ok(out)
    }

    fn speed_integrand(&self, t: f64) -> f64 {
        let (w, _) = self.normalized_curvature(t);
        (1.0 - w.norm_squared()).max(0.0).sqrt()
    }

    fn closed(&self) -> Closed {
        let inv = self.invariants();
        let smax = self.s_max();
        let cb = inv.c * self.beta;
        let ndw = self.dw0.norm();
        let zero_w0 = self.w0 == Vector2::zeros();
        let (branch, rt0, xt0) = if zero_w0 && ndw == 0.0 {
            (Branch::Straight, Matrix3::identity(), Vector3::zeros())
        } else if smax == 0.0 || inv.c == 0.0 {
            (Branch::Point, Matrix3::identity(), Vector3::zeros())
        } else if ndw == 0.0 {
            let rt0 = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
            let xt0 = Vector3::new(0.0, self.w0.y / cb, -self.w0.x / cb);
            (Branch::ZeroDw, rt0, xt0)
        } else {
            let lam3 = (cb.powi(2) - ndw * ndw).max(0.0).sqrt();
            let rt0 = Matrix3::new(
                -self.dw0.x / cb,
                -self.dw0.y / cb,
                lam3 / cb,
                self.dw0.y / ndw,
                -self.dw0.x / ndw,
                0.0,
                self.dw0.x * lam3 / (cb * ndw),
                self.dw0.y * lam3 / (cb * ndw),
                ndw / cb,
            );
            if inv.wronskian == 0.0 {
                let u = self.dw0 / ndw;
                let xt0 = Vector3::new(0.0, 0.0, self.w0.dot(&self.dw0) / (cb * ndw));
                (Branch::PlanarDw { u }, rt0, xt0)
            } else {
                let yz0 = Vector2::new(
                    inv.wronskian * lam3 / (cb * cb * ndw),
                    self.w0.dot(&self.dw0) / (cb * ndw),
                );
                let d0 = self.w0.norm_squared() - (inv.wronskian / cb).powi(2);
                let xt0 = Vector3::new(0.0, yz0.x, yz0.y);
                (Branch::General { yz0, d0 }, rt0, xt0)
            }
        };
        Closed {
            w0: self.w0,
            dw0: self.dw0,
            beta: self.beta,
            c: inv.c,
            wron: inv.wronskian,
            smax,
            rt0t: rt0.transpose(),
            xt0,
            branch,
        }
    }
}

fn sinh_cosh(x: f64) -> (f64, f64) {
    let e = x.exp();
    let inv = 1.0 / e;
    (0.5 * (e - inv), 0.5 * (e + inv))
}

fn curvature_torsion_of(w: &Vector2<f64>, wron: f64, beta: f64) -> (f64, f64) {
    let nw2 = w.norm_squared();
    let root = (1.0 - nw2).max(0.0).sqrt();
    let kappa = if root > 0.0 { beta * nw2.sqrt() / root } else { f64::INFINITY };
    let tau = if wron == 0.0 { 0.0 } else { wron / nw2 };
    (kappa, tau)
}

fn check_range(s: f64, smax: f64) -> Result<f64, GeodesicError> {
    if !s.is_finite() || s < 0.0 {
        return Err(GeodesicError::OutOfDomain { s, s_max: smax });
    }
    let slack = 1e-12 * smax.max(1.0);
    if smax.is_finite() && s > smax + slack {
        return Err(GeodesicError::OutOfDomain { s, s_max: smax });
    }
    Ok(s.min(smax))
}

impl Closed {
    fn base_sample(&self) -> CurveSample {
        let (kappa, tau) = curvature_torsion_of(&self.w0, self.wron, self.beta);
        let frame = if kappa >= KAPPA_FLOOR {
            let nw = self.w0.norm();
            let n = Vector3::new(self.w0.x / nw, self.w0.y / nw, 0.0);
            FrenetFrame::from_tangent_normal(Vector3::z(), n).ok()
        } else {
            None
        };
        CurveSample {
            s: 0.0,
            x: Vector3::zeros(),
            rotation: RotationMatrix::identity(),
            frame,
            kappa,
            tau,
        }
    }

    fn to_sample(&self, a: Assembled) -> CurveSample {
        CurveSample {
            s: a.s,
            x: a.x,
            rotation: a.rotation,
            frame: a.frame,
            kappa: a.kappa,
            tau: a.tau,
        }
    }

    /// Core assembly: adapted-frame coordinates -> pose.
    ///
    /// `xt1` is the cumulative first coordinate (already divided by `c`) and
    /// `phi` the cumulative rotation angle (ignored off the generic branch).
    fn assemble(&self, s: f64, ch: f64, sh: f64, xt1: f64, phi: f64) -> Assembled {
        if matches!(self.branch, Branch::Straight | Branch::Point) {
            return Assembled {
                s,
                x: Vector3::new(0.0, 0.0, s),
                rotation: RotationMatrix::identity(),
                frame: None,
                kappa: 0.0,
                tau: 0.0,
            };
        }
        let w = ch * self.w0 + (sh / self.beta) * self.dw0;
        let dw = (self.beta * sh) * self.w0 + ch * self.dw0;
        let nw2 = w.norm_squared();
        let nw = nw2.sqrt();
        let one_m = (1.0 - nw2).max(0.0);
        let sq1m = one_m.sqrt();
        let (kappa, tau) = curvature_torsion_of(&w, self.wron, self.beta);
        let cb = self.c * self.beta;

        // Adapted in-plane pair and its derivative.
        let (yz, dyz) = match self.branch {
            Branch::ZeroDw => (Vector2::new(w.y, -w.x) / cb, Vector2::new(dw.y, -dw.x) / cb),
            Branch::PlanarDw { u } => {
                (Vector2::new(0.0, w.dot(&u) / cb), Vector2::new(0.0, dw.dot(&u) / cb))
            }
            Branch::General { yz0, d0 } => {
                let d = nw2 - (self.wron / cb).powi(2);
                let scale = (d / d0).sqrt();
                let (sp, cp) = phi.sin_cos();
                let yz = scale * Vector2::new(cp * yz0.x - sp * yz0.y, sp * yz0.x + cp * yz0.y);
                let a = w.dot(&dw) / d;
                let b = (self.wron / cb) * self.beta * sq1m / d;
                (yz, Vector2::new(a * yz.x - b * yz.y, b * yz.x + a * yz.y))
            }
            Branch::Straight | Branch::Point => unreachable!(),
        };

        let xt = Vector3::new(xt1, yz.x, yz.y) - self.xt0;
        let x = self.rt0t * xt;
        let tangent = (self.rt0t * Vector3::new(sq1m / self.c, dyz.x, dyz.y)).normalize();

        let (rotation, frame) = if kappa >= KAPPA_FLOOR {
            // Frenet normal via the second derivative, normalized analytically
            // so the cusp limit stays finite.
            let n_x = -w.dot(&dw) / (cb * nw);
            let n_yz = match self.branch {
                Branch::ZeroDw => Vector2::new(w.y, -w.x) * (sq1m / (self.c * nw)),
                Branch::PlanarDw { u } => Vector2::new(0.0, w.dot(&u) * sq1m / (self.c * nw)),
                Branch::General { .. } => {
                    let d = nw2 - (self.wron / cb).powi(2);
                    let p = self.beta.powi(2) * one_m;
                    let sqp = self.beta * sq1m;
                    let wdw = w.dot(&dw);
                    let a = wdw / d;
                    let b_sqp = (self.wron / cb) * p / d;
                    let adot = ((dw.norm_squared() + self.beta.powi(2) * nw2) * d
                        - 2.0 * wdw * wdw)
                        / (d * d);
                    let term_b =
                        (self.wron / cb) * (-self.beta.powi(2) * wdw * d - 2.0 * p * wdw) / (d * d);
                    let b = (self.wron / cb) * sqp / d;
                    let coef_i = (adot + a * a - b * b) * sqp;
                    let coef_j = term_b + 2.0 * a * b_sqp;
                    Vector2::new(coef_i * yz.x - coef_j * yz.y, coef_j * yz.x + coef_i * yz.y)
                        / (self.beta.powi(2) * nw)
                }
                Branch::Straight | Branch::Point => unreachable!(),
            };
            let mut n = self.rt0t * Vector3::new(n_x, n_yz.x, n_yz.y);
            n -= tangent * n.dot(&tangent);
            let n = n.normalize();
            let b = tangent.cross(&n);
            let c1 = (w.x * n - w.y * b) / nw;
            let c2 = (w.y * n + w.x * b) / nw;
            // Gram-Schmidt above makes (c1, c2, tangent) and (t, n, b)
            // orthonormal right-handed triples by construction.
            let rotation = RotationMatrix::from_orthonormal_columns(c1, c2, tangent);
            (rotation, Some(FrenetFrame::from_orthonormal(tangent, n, b)))
        } else {
            (self.fallback_rotation(s), None)
        };

        Assembled { s, x, rotation, frame, kappa, tau }
    }

    /// Direct RK4 integration of the frame ODE; used only where the
    /// curvature is too small for the Frenet reconstruction.
    fn fallback_rotation(&self, s: f64) -> RotationMatrix {
        let n = ((s * self.beta * 256.0).ceil() as usize).max(64);
        let h = s / n as f64;
        let k_of = |t: f64| -> Matrix3<f64> {
            let (sh, ch) = sinh_cosh(self.beta * t);
            let w = ch * self.w0 + (sh / self.beta) * self.dw0;
            let root = (1.0 - w.norm_squared()).max(1e-300).sqrt();
            let k1 = self.beta * w.x / root;
            let k2 = self.beta * w.y / root;
            Matrix3::new(0.0, 0.0, k1, 0.0, 0.0, k2, -k1, -k2, 0.0)
        };
        let mut r = Matrix3::identity();
        for i in 0..n {
            let t = i as f64 * h;
            let a1 = r * k_of(t);
            let a2 = (r + 0.5 * h * a1) * k_of(t + 0.5 * h);
            let a3 = (r + 0.5 * h * a2) * k_of(t + 0.5 * h);
            let a4 = (r + h * a3) * k_of(t + h);
            r += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        }
        RotationMatrix::renormalized(r).unwrap_or_else(|_| RotationMatrix::identity())
    }
}

impl CurveSample {
    fn into_pose(self) -> RigidMotion {
        RigidMotion::new(self.x, self.rotation)
    }
}
