//! Velocity dynamics of the driven mechanical system: inertia, viscous
//! damping, optional Coulomb friction, and an optional bounded disturbance.
//!
//! Friction is the deliberately "unknown" part of the model: the controller's
//! fixed estimate of the plant function omits it, so the estimate error stays
//! within the declared friction level.

use crate::error::{invalid, Error};

/// Friction model acting on the velocity state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Friction {
    None,
    /// Constant-magnitude torque opposing motion; zero at rest.
    Coulomb { level: f64 },
}

/// External disturbance torque as a function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Disturbance {
    None,
    Constant { level: f64 },
    Sinusoid { amplitude: f64, frequency_hz: f64 },
}

/// Physical parameters of the velocity loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    inertia: f64,
    damping: f64,
    friction: Friction,
    disturbance: Disturbance,
    /// Declared bound on the disturbance magnitude.
    tau_max: f64,
}

impl PlantParams {
    pub fn new(
        inertia: f64,
        damping: f64,
        friction: Friction,
        disturbance: Disturbance,
        tau_max: f64,
    ) -> Result<Self, Error> {
        if !inertia.is_finite() || inertia <= 0.0 {
            return Err(invalid("M", format!("inertia must be positive, got {inertia}")));
        }
        if !damping.is_finite() || damping < 0.0 {
            return Err(invalid(
                "B",
                format!("damping must be nonnegative, got {damping}"),
            ));
        }
        if !tau_max.is_finite() || tau_max < 0.0 {
            return Err(invalid(
                "tau_M",
                format!("disturbance bound must be nonnegative, got {tau_max}"),
            ));
        }
        if let Friction::Coulomb { level } = friction {
            if !level.is_finite() || level < 0.0 {
                return Err(invalid(
                    "friction_level",
                    format!("Coulomb level must be nonnegative, got {level}"),
                ));
            }
        }
        let peak = match disturbance {
            Disturbance::None => 0.0,
            Disturbance::Constant { level } => level.abs(),
            Disturbance::Sinusoid { amplitude, frequency_hz } => {
                if !frequency_hz.is_finite() || frequency_hz < 0.0 {
                    return Err(invalid(
                        "disturbance_freq",
                        format!("frequency must be nonnegative, got {frequency_hz}"),
                    ));
                }
                amplitude.abs()
            }
        };
        if !peak.is_finite() {
            return Err(invalid("disturbance", "disturbance level must be finite"));
        }
        if peak > tau_max {
            return Err(invalid(
                "tau_M",
                format!("declared disturbance peak {peak} exceeds the bound tau_M = {tau_max}"),
            ));
        }
        Ok(Self {
            inertia,
            damping,
            friction,
            disturbance,
            tau_max,
        })
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }
    pub fn damping(&self) -> f64 {
        self.damping
    }
    pub fn friction(&self) -> Friction {
        self.friction
    }
    pub fn disturbance(&self) -> Disturbance {
        self.disturbance
    }
    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// Friction torque at velocity `omega`. Coulomb friction opposes motion
    /// and vanishes at rest.
    pub fn friction_torque(&self, omega: f64) -> f64 {
        match self.friction {
            Friction::None => 0.0,
            Friction::Coulomb { level } => {
                if omega > 0.0 {
                    level
                } else if omega < 0.0 {
                    -level
                } else {
                    0.0
                }
            }
        }
    }

    /// Disturbance torque at time `t`; magnitude never exceeds `tau_max`.
    pub fn disturbance_torque(&self, t: f64) -> f64 {
        let d = match self.disturbance {
            Disturbance::None => 0.0,
            Disturbance::Constant { level } => level,
            Disturbance::Sinusoid { amplitude, frequency_hz } => {
                amplitude * (2.0 * std::f64::consts::PI * frequency_hz * t).sin()
            }
        };
        debug_assert!(d.abs() <= self.tau_max + 1e-12);
        d
    }

    /// Velocity rate under applied torque `torque` at time `t`:
    /// `(T - B*omega - T_f(omega) - T_d(t)) / M`.
    pub fn derivative(&self, omega: f64, torque: f64, t: f64) -> f64 {
        (torque - self.damping * omega - self.friction_torque(omega) - self.disturbance_torque(t))
            / self.inertia
    }

    /// The true plant function along the reference:
    /// `M*thetaddot_d + B*thetadot_d + T_f(omega)`.
    pub fn f_true(&self, thetadot_d: f64, thetaddot_d: f64, omega: f64) -> f64 {
        self.inertia * thetaddot_d + self.damping * thetadot_d + self.friction_torque(omega)
    }

    /// The controller's fixed estimate: friction omitted, so the estimate
    /// error is exactly the friction torque and is bounded by its level.
    pub fn f_estimate(&self, thetadot_d: f64, thetaddot_d: f64) -> f64 {
        self.inertia * thetaddot_d + self.damping * thetadot_d
    }

    /// Bound on `|f_true - f_estimate|`: the Coulomb level, or zero.
    pub fn friction_bound(&self) -> f64 {
        match self.friction {
            Friction::None => 0.0,
            Friction::Coulomb { level } => level,
        }
    }
}

impl Default for PlantParams {
    /// Default servo drive: light inertia, heavy damping, no friction or
    /// disturbance.
    fn default() -> Self {
        Self::new(0.015, 0.951, Friction::None, Disturbance::None, 0.0).unwrap()
    }
}

/// Velocity state of the plant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub omega: f64,
}
