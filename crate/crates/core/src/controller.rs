//! The compensator: an outer PI tracking law with a robustifying term, a
//! filtered estimate of the desired-torque rate, and an inner pseudo-control
//! loop that drives the actuator input so its output follows the desired
//! torque, with a neural network learning the inversion residual online.
//!
//! The nominal actuator inverse is unity feedforward: the commanded input
//! rate integrates the pseudo-control directly, and everything the actuator
//! distorts is left to the inner loop and the network.

use crate::error::{invalid, Error};
use crate::neuralnet::{NnWeights, TuningGains};

/// How the desired-torque-rate filter output is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Transfer `g*a*s/(s+a)`: approximates a derivative below the pole.
    /// This is what the inner loop needs, and the default.
    Derivative,
    /// Transfer `g*s/(s+a)`: unity high-frequency gain, zero DC gain.
    Washout,
}

/// Controller gains.
///
/// `kz1`, `kz2`, `kz3` size the inner-loop robustifying term; they should
/// exceed `sqrt(L)`, `1` and `c1*sqrt(L)` respectively for the stability
/// argument to apply — violations are reported as warnings, not errors, so
/// the conditions can be explored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub kp: f64,
    pub ki: f64,
    pub kb: f64,
    pub kz1: f64,
    pub kz2: f64,
    pub kz3: f64,
    /// Smoothing width for sign-type terms. Larger values are gentler on the
    /// fixed-step integrator at the cost of a softer robustifier.
    pub eps_sign: f64,
    /// Pole `a` of the desired-torque-rate filter, 1/s.
    pub filter_pole: f64,
    /// Numerator scale `g` of the filter.
    pub filter_gain: f64,
    pub filter_mode: FilterMode,
}

impl Gains {
    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [("K_p", self.kp), ("K_I", self.ki), ("K_b", self.kb)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid(
                    "gain",
                    format!("{name} must be finite and strictly positive, got {v}"),
                ));
            }
        }
        for (name, v) in [
            ("K_Z1", self.kz1),
            ("K_Z2", self.kz2),
            ("K_Z3", self.kz3),
            ("filter_gain", self.filter_gain),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(
                    "gain",
                    format!("{name} must be finite and nonnegative, got {v}"),
                ));
            }
        }
        if !self.eps_sign.is_finite() || self.eps_sign <= 0.0 {
            return Err(invalid(
                "eps_sign",
                format!("smoothing width must be strictly positive, got {}", self.eps_sign),
            ));
        }
        if !self.filter_pole.is_finite() || self.filter_pole <= 0.0 {
            return Err(invalid(
                "filter_pole",
                format!("filter pole must be strictly positive, got {}", self.filter_pole),
            ));
        }
        Ok(())
    }

    /// Soft stability conditions on the robustifier gains, checked against
    /// the configured bounds and hidden-layer width. Returns one message per
    /// violated condition.
    pub fn condition_warnings(&self, bounds: &BoundsConfig, hidden: usize) -> Vec<String> {
        let sqrt_l = (hidden as f64).sqrt();
        let mut warnings = Vec::new();
        if self.kz1 <= sqrt_l {
            warnings.push(format!(
                "K_Z1 = {} does not exceed sqrt(L) = {sqrt_l:.4}",
                self.kz1
            ));
        }
        if self.kz2 <= 1.0 {
            warnings.push(format!("K_Z2 = {} does not exceed 1", self.kz2));
        }
        if self.kz3 <= bounds.c1 * sqrt_l {
            warnings.push(format!(
                "K_Z3 = {} does not exceed c1*sqrt(L) = {:.4}",
                self.kz3,
                bounds.c1 * sqrt_l
            ));
        }
        warnings
    }
}

impl Default for Gains {
    /// Default servo gains. `eps_sign = 0.2` keeps the robustifier's
    /// boundary layer resolvable by the default 1 ms step; see the README
    /// for the trade-off.
    fn default() -> Self {
        Self {
            kp: 0.3,
            ki: 1.1,
            kb: 0.4,
            kz1: 5.2,
            kz2: 3.5,
            kz3: 5.8,
            eps_sign: 0.2,
            filter_pole: 100.0,
            filter_gain: 1.0,
            filter_mode: FilterMode::Derivative,
        }
    }
}

/// Known bounds consumed by the robustifying terms and the bound calculator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsConfig {
    /// Bound on the ideal stacked weight norm.
    pub z_bound: f64,
    /// Bound on the plant-function estimate error.
    pub f_bound: f64,
    /// Bound on the reference magnitude.
    pub ref_bound: f64,
    /// Offset constant of the network-input bound.
    pub c0: f64,
    /// Weight-norm coefficient of the network-input bound.
    pub c1: f64,
    /// Bound on the network approximation error.
    pub approx_bound: f64,
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [
            ("Z_M", self.z_bound),
            ("f_M", self.f_bound),
            ("Theta_d", self.ref_bound),
            ("c0", self.c0),
            ("c1", self.c1),
            ("eps_N", self.approx_bound),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(
                    "bound",
                    format!("{name} must be finite and nonnegative, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            z_bound: 1.0,
            f_bound: 0.0,
            ref_bound: 1.0,
            c0: 1.0,
            c1: 1.0,
            approx_bound: 0.1,
        }
    }
}

/// Mutable state owned by one compensator instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    /// Integral of the tracking error.
    pub e_int: f64,
    /// Compensator output: the only signal fed to the actuator.
    pub u: f64,
    /// Internal state of the desired-torque-rate filter.
    pub x_f: f64,
    pub weights: NnWeights,
    /// Most recent desired torque, kept for inspection.
    pub last_t_des: f64,
}

impl ControllerState {
    pub fn new(weights: NnWeights) -> Self {
        Self {
            e_int: 0.0,
            u: 0.0,
            x_f: 0.0,
            weights,
            last_t_des: 0.0,
        }
    }
}

/// Which optional parts of the loop are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopFlags {
    pub nn_enabled: bool,
    pub robustifiers_enabled: bool,
}

/// Smooth surrogate for `sign(x)`: `x / (|x| + eps)`. Odd, bounded by one in
/// magnitude, and approaches the hard sign as `eps` shrinks.
pub fn smooth_sign(x: f64, eps_sign: f64) -> f64 {
    x / (x.abs() + eps_sign)
}

/// Outer-loop robustifying torque `-(f_M + tau_M) * sign(e)`, smoothed.
/// Sized to dominate the plant-estimate error plus the disturbance.
pub fn robustifier_v1(f_bound: f64, tau_bound: f64, e: f64, eps_sign: f64) -> f64 {
    -(f_bound + tau_bound) * smooth_sign(e, eps_sign)
}

/// Desired actuator torque from the PI loop, the plant-function estimate and
/// the robustifying term: `K_p e + K_I int(e) + f_hat - v1`.
pub fn desired_torque(gains: &Gains, e: f64, e_int: f64, f_hat: f64, v1: f64) -> f64 {
    gains.kp * e + gains.ki * e_int + f_hat - v1
}

/// One evaluation of the first-order filter that estimates the rate of the
/// desired torque. Returns `(dx_f/dt, rate_estimate)` where
/// `dx_f/dt = t_des - pole * x_f`; the output is `gain * dx_f/dt` in washout
/// mode (`g*s/(s+a)`) or `gain * pole * dx_f/dt` in derivative mode
/// (`g*a*s/(s+a)`).
pub fn washout_step(
    x_f: f64,
    t_des: f64,
    pole: f64,
    gain: f64,
    mode: FilterMode,
) -> (f64, f64) {
    let dx = t_des - pole * x_f;
    let output = match mode {
        FilterMode::Washout => gain * dx,
        FilterMode::Derivative => gain * pole * dx,
    };
    (dx, output)
}

/// Assembles the network input in its fixed documented order:
/// `[e, thetadot_d, t_tilde, t, z_norm]`. The leading threshold `1` is added
/// inside the network. The order is load-bearing: the golden-run regression
/// pins it.
pub fn build_nn_input(e: f64, thetadot_d: f64, t_tilde: f64, t: f64, z_norm: f64) -> [f64; 5] {
    [e, thetadot_d, t_tilde, t, z_norm]
}

/// Inner-loop robustifying term, smoothed:
///
/// ```text
///   v2 = -K_Z1 (||Z^|| + Z_M) (T~ + |e| s(T~))
///        - K_Z2 |e| s(T~)
///        - K_Z3 (||Z^|| + Z_M)^2 s(T~)
/// ```
///
/// with `s` the smoothed sign. Every term vanishes at `(e, T~) = (0, 0)`.
pub fn robustifier_v2(
    gains: &Gains,
    z_norm_hat: f64,
    z_bound: f64,
    e: f64,
    t_tilde: f64,
) -> f64 {
    let s = smooth_sign(t_tilde, gains.eps_sign);
    let z_sum = z_norm_hat + z_bound;
    -gains.kz1 * z_sum * (t_tilde + e.abs() * s)
        - gains.kz2 * e.abs() * s
        - gains.kz3 * z_sum * z_sum * s
}

/// Pseudo-control: the commanded actuator-input rate
/// `K_b T~ + dT_des/dt - nn_output - v2`. With the unity nominal inverse
/// this value is integrated directly into the compensator output.
pub fn pseudo_control(gains: &Gains, t_tilde: f64, t_des_dot: f64, nn_output: f64, v2: f64) -> f64 {
    gains.kb * t_tilde + t_des_dot - nn_output - v2
}

/// Diagnostics computed alongside the derivatives, one record per evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerDiag {
    pub e: f64,
    pub t_des: f64,
    pub t_tilde: f64,
    pub t_des_dot: f64,
    pub v1: f64,
    pub v2: f64,
    pub phi_hat: f64,
    pub nn_output: f64,
    pub z_norm: f64,
}

/// Time derivatives of the compensator state plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerDerivs {
    pub d_e_int: f64,
    pub d_u: f64,
    pub d_x_f: f64,
    pub d_v_hat: Vec<f64>,
    pub d_w_hat: Vec<f64>,
    pub diag: ControllerDiag,
}

/// Full compensator wiring for one derivative evaluation.
///
/// Computes the tracking error `e = thetadot_d - omega`, the desired torque,
/// the actuator tracking error `t_tilde = t_des - measured_t`, the filtered
/// desired-torque rate, the network output over the assembled input, the
/// robustifying term, the pseudo-control, and the weight derivatives.
/// Disabled parts contribute exactly zero and freeze their state.
#[allow(clippy::too_many_arguments)]
pub fn controller_derivatives(
    state: &ControllerState,
    gains: &Gains,
    bounds: &BoundsConfig,
    tuning: &TuningGains,
    flags: LoopFlags,
    thetadot_d: f64,
    omega: f64,
    f_hat: f64,
    tau_bound: f64,
    measured_t: f64,
) -> ControllerDerivs {
    let e = thetadot_d - omega;
    let v1 = if flags.robustifiers_enabled {
        robustifier_v1(bounds.f_bound, tau_bound, e, gains.eps_sign)
    } else {
        0.0
    };
    let t_des = desired_torque(gains, e, state.e_int, f_hat, v1);
    let t_tilde = t_des - measured_t;
    let (d_x_f, t_des_dot) =
        washout_step(state.x_f, t_des, gains.filter_pole, gains.filter_gain, gains.filter_mode);
    let z_norm = state.weights.frobenius_norm();
    let x_nn = build_nn_input(e, thetadot_d, t_tilde, measured_t, z_norm);
    let nn_output = if flags.nn_enabled {
        state.weights.forward(&x_nn)
    } else {
        0.0
    };
    let v2 = if flags.robustifiers_enabled {
        robustifier_v2(gains, z_norm, bounds.z_bound, e, t_tilde)
    } else {
        0.0
    };
    let phi_hat = pseudo_control(gains, t_tilde, t_des_dot, nn_output, v2);
    let (d_v_hat, d_w_hat) = if flags.nn_enabled {
        state.weights.weight_derivatives(tuning, &x_nn, t_tilde)
    } else {
        (
            vec![0.0; state.weights.v_hat().len()],
            vec![0.0; state.weights.w_hat().len()],
        )
    };
    ControllerDerivs {
        d_e_int: e,
        d_u: phi_hat,
        d_x_f,
        d_v_hat,
        d_w_hat,
        diag: ControllerDiag {
            e,
            t_des,
            t_tilde,
            t_des_dot,
            v1,
            v2,
            phi_hat,
            nn_output,
            z_norm,
        },
    }
}

/// Steady-state bounds delivered by the stability analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalBounds {
    /// Ultimate bound on the actuator tracking error.
    pub t_tilde: f64,
    /// Ultimate bound on the weight-estimate error norm.
    pub z_tilde: f64,
}

/// Evaluates the closed-form ultimate bounds:
///
/// ```text
///   C0 = eps_N + 2 Z_M sqrt(L)
///   C1 = sqrt(L) (c0 + Theta_d)
///   R  = (Z_M k + C1) / (2k)
///   T~ bound = (k R^2 + C0) / K_b
///   Z~ bound = R + sqrt(R^2 + C0 / k)
/// ```
///
/// The error bound scales inversely with `K_b`, which is the tunable knob.
pub fn theoretical_bounds(
    gains: &Gains,
    bounds: &BoundsConfig,
    tuning: &TuningGains,
    hidden: usize,
) -> Result<TheoreticalBounds, Error> {
    let k = tuning.leakage();
    if !(k > 0.0) {
        return Err(invalid("k", "leakage must be strictly positive"));
    }
    if !(gains.kb > 0.0) {
        return Err(invalid("K_b", "backstepping gain must be strictly positive"));
    }
    let sqrt_l = (hidden as f64).sqrt();
    let c0 = bounds.approx_bound + 2.0 * bounds.z_bound * sqrt_l;
    let c1 = sqrt_l * (bounds.c0 + bounds.ref_bound);
    let r = (bounds.z_bound * k + c1) / (2.0 * k);
    Ok(TheoreticalBounds {
        t_tilde: (k * r * r + c0) / gains.kb,
        z_tilde: r + (r * r + c0 / k).sqrt(),
    })
}
