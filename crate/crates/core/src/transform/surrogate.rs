//! Tangent surrogates used to convexify the rate, wiretap and orthogonality
//! terms around the current iterate.

use crate::error::TransformError;
use crate::model::Position3;

use super::program::{LinExpr, VarId};

/// Affine minorant of `α²/μ` tangent at `(α_r, μ_r)`:
/// `(2α_r/μ_r)·α − (α_r/μ_r)²·μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOverLinTangent {
    pub on_alpha: f64,
    pub on_mu: f64,
}

pub fn quad_over_lin_lower_bound(alpha_r: f64, mu_r: f64) -> Result<QuadOverLinTangent, TransformError> {
    if !(mu_r > 0.0) {
        return Err(TransformError::DegenerateExpansion(format!("mu_r = {mu_r} must be > 0")));
    }
    if !(alpha_r >= 0.0) {
        return Err(TransformError::DegenerateExpansion(format!("alpha_r = {alpha_r} must be ≥ 0")));
    }
    let ratio = alpha_r / mu_r;
    Ok(QuadOverLinTangent { on_alpha: 2.0 * ratio, on_mu: -ratio * ratio })
}

impl QuadOverLinTangent {
    pub fn eval(&self, alpha: f64, mu: f64) -> f64 {
        self.on_alpha * alpha + self.on_mu * mu
    }

    pub fn expr(&self, alpha: VarId, mu: VarId) -> LinExpr {
        LinExpr::term(alpha, self.on_alpha) + LinExpr::term(mu, self.on_mu)
    }
}

/// `η·ln(1 + γθ/η)`, the concave function the wiretap surrogate majorizes.
pub fn perspective_log(theta: f64, eta: f64, gamma: f64) -> f64 {
    if eta == 0.0 {
        0.0
    } else {
        eta * (gamma * theta / eta).ln_1p()
    }
}

/// Linear majorant of `η·ln(1 + γθ/η)` tangent at `(θ_r, η_r)`.
///
/// The function is positively homogeneous, so the tangent plane passes
/// through the origin and has no constant term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyTangent {
    pub on_theta: f64,
    pub on_eta: f64,
}

pub fn secrecy_surrogate_term(theta_r: f64, eta_r: f64, gamma: f64) -> Result<SecrecyTangent, TransformError> {
    if !(eta_r > 0.0) {
        return Err(TransformError::DegenerateExpansion(format!("eta_r = {eta_r} must be > 0")));
    }
    if !(theta_r >= 0.0) {
        return Err(TransformError::DegenerateExpansion(format!("theta_r = {theta_r} must be ≥ 0")));
    }
    let snr = gamma * theta_r / eta_r;
    Ok(SecrecyTangent {
        on_theta: gamma / (1.0 + snr),
        on_eta: snr.ln_1p() - snr / (1.0 + snr),
    })
}

impl SecrecyTangent {
    pub fn eval(&self, theta: f64, eta: f64) -> f64 {
        self.on_theta * theta + self.on_eta * eta
    }

    pub fn expr(&self, theta: VarId, eta: VarId) -> LinExpr {
        LinExpr::term(theta, self.on_theta) + LinExpr::term(eta, self.on_eta)
    }
}

/// Affine minorant of `‖q − s‖²` tangent at `q_r`:
/// `‖q_r − s‖² + 2(q_r − s)ᵀ(q − q_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSqTangent {
    pub constant: f64,
    pub grad: [f64; 3],
}

pub fn theta_rhs_linearization(q_r: &Position3, s: &Position3) -> NormSqTangent {
    let r = [q_r.x - s.x, q_r.y - s.y, q_r.z - s.z];
    let grad = [2.0 * r[0], 2.0 * r[1], 2.0 * r[2]];
    let at = q_r.dist_sq(s);
    NormSqTangent {
        constant: at - (grad[0] * q_r.x + grad[1] * q_r.y + grad[2] * q_r.z),
        grad,
    }
}

impl NormSqTangent {
    pub fn eval(&self, q: &Position3) -> f64 {
        self.constant + self.grad[0] * q.x + self.grad[1] * q.y + self.grad[2] * q.z
    }

    pub fn expr(&self, q: [VarId; 3]) -> LinExpr {
        LinExpr::constant(self.constant)
            + LinExpr::term(q[0], self.grad[0])
            + LinExpr::term(q[1], self.grad[1])
            + LinExpr::term(q[2], self.grad[2])
    }
}

/// Convex majorant `½((η/ψ)² + (τψ)²)` of the bilinear term `η·τ`.
pub fn agm_bound(eta: f64, tau: f64, psi: f64) -> Result<f64, TransformError> {
    if !(psi > 0.0) {
        return Err(TransformError::DegenerateExpansion(format!("psi = {psi} must be > 0")));
    }
    Ok(0.5 * ((eta / psi).powi(2) + (tau * psi).powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_over_lin_tangency_and_slack() {
        let t = quad_over_lin_lower_bound(1.3, 0.7).unwrap();
        assert!((t.eval(1.3, 0.7) - 1.3f64.powi(2) / 0.7).abs() < 1e-15);
        let t = quad_over_lin_lower_bound(1.0, 1.0).unwrap();
        assert_eq!(t.eval(2.0, 1.0), 3.0);
        assert!(quad_over_lin_lower_bound(1.0, 0.0).is_err());
    }

    #[test]
    fn secrecy_tangent_at_expansion_point() {
        let t = secrecy_surrogate_term(2.0, 3.0, 1.5).unwrap();
        assert!((t.eval(2.0, 3.0) - perspective_log(2.0, 3.0, 1.5)).abs() < 1e-14);
        assert!(secrecy_surrogate_term(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn secrecy_tangent_zero_theta() {
        let t = secrecy_surrogate_term(0.0, 2.0, 3.0).unwrap();
        assert_eq!(t.on_eta, 0.0);
        assert_eq!(t.on_theta, 3.0);
        for &(theta, eta) in &[(1.0, 0.1), (5.0, 2.0), (0.3, 10.0)] {
            assert!(perspective_log(theta, eta, 3.0) <= t.eval(theta, eta));
        }
    }

    #[test]
    fn norm_linearization_cases() {
        let s = Position3::new(4000.0, 500.0, 0.0);
        let qr = Position3::new(100.0, -30.0, 100.0);
        assert!((theta_rhs_linearization(&qr, &s).eval(&qr) - qr.dist_sq(&s)).abs() < 1e-6);
        let degenerate = theta_rhs_linearization(&s, &s);
        assert_eq!(degenerate.eval(&Position3::new(1.0, 2.0, 3.0)), 0.0);
    }

    #[test]
    fn agm_cases() {
        assert_eq!(agm_bound(4.0, 1.0, 2.0).unwrap(), 4.0);
        assert_eq!(agm_bound(4.0, 1.0, 1.0).unwrap(), 8.5);
        assert!(agm_bound(1.0, 1.0, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quad_over_lin_is_a_tangent_minorant(ar in 0.0..10.0f64, mr in 1e-3..10.0f64, a in 0.0..10.0f64, m in 1e-3..10.0f64) {
                let t = quad_over_lin_lower_bound(ar, mr).unwrap();
                prop_assert!(t.eval(a, m) <= a * a / m + 1e-9);
                prop_assert!((t.eval(ar, mr) - ar * ar / mr).abs() <= 1e-9 * (1.0 + ar * ar / mr));
            }

            #[test]
            fn secrecy_tangent_is_a_majorant(tr in 0.0..10.0f64, er in 1e-3..10.0f64, th in 0.0..10.0f64, e in 1e-3..10.0f64) {
                let t = secrecy_surrogate_term(tr, er, 1.0).unwrap();
                prop_assert!(perspective_log(th, e, 1.0) <= t.eval(th, e) + 1e-12);
                prop_assert!((t.eval(tr, er) - perspective_log(tr, er, 1.0)).abs() <= 1e-12);
            }

            #[test]
            fn norm_tangent_is_a_minorant(
                r in proptest::array::uniform3(-5.0..5.0f64),
                q in proptest::array::uniform3(-5.0..5.0f64),
                c in proptest::array::uniform3(-5.0..5.0f64),
            ) {
                let (qr, q, s) = (Position3::new(r[0], r[1], r[2]), Position3::new(q[0], q[1], q[2]), Position3::new(c[0], c[1], c[2]));
                let t = theta_rhs_linearization(&qr, &s);
                prop_assert!(t.eval(&q) <= q.dist_sq(&s) + 1e-9);
                prop_assert!((t.eval(&qr) - qr.dist_sq(&s)).abs() <= 1e-9);
            }

            #[test]
            fn agm_majorizes_and_touches(er in 1e-3..1.0f64, tr in 1e-3..1.0f64, e in 0.0..1.0f64, t in 0.0..1.0f64) {
                let psi = (er / tr).sqrt();
                prop_assert!(agm_bound(e, t, psi).unwrap() >= e * t - 1e-12);
                prop_assert!((agm_bound(er, tr, psi).unwrap() - er * tr).abs() <= 1e-12);
            }
        }
    }
}
