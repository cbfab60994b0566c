//! Static multi-segment piecewise-linear actuator map, its exact inverse, and
//! the feedforward-plus-residual decomposition used by the compensator.
//!
//! The map has four regions: an inner and an outer gain on each side of zero,
//! switching at one breakpoint per side. Positive slopes make it a bijection,
//! so an exact inverse exists. Deadzone-like and two-segment maps are special
//! cases reached by parameter choice.

use crate::error::{invalid, Error};

/// Parameters of the four-region piecewise-linear map.
///
/// Region layout (input `u`, output `T`):
///
/// ```text
///   u < break_neg              T = slope_neg_outer*(u - break_neg) + slope_neg_inner*break_neg
///   break_neg <= u < 0         T = slope_neg_inner*u
///   0 <= u <= break_pos        T = slope_pos_inner*u
///   u > break_pos              T = slope_pos_outer*(u - break_pos) + slope_pos_inner*break_pos
/// ```
///
/// All four slopes must be strictly positive and `break_neg < 0 < break_pos`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwlParams {
    slope_pos_inner: f64,
    slope_pos_outer: f64,
    slope_neg_inner: f64,
    slope_neg_outer: f64,
    break_pos: f64,
    break_neg: f64,
    // Output-side thresholds where the inverse switches regions, cached at
    // construction: threshold_pos = slope_pos_inner*break_pos, and likewise
    // on the negative side.
    threshold_pos: f64,
    threshold_neg: f64,
}

impl PwlParams {
    /// Builds a validated parameter set.
    ///
    /// Arguments follow the config key order `m_r1, m_r2, m_l1, m_l2, u_r, u_l`.
    pub fn new(
        slope_pos_inner: f64,
        slope_pos_outer: f64,
        slope_neg_inner: f64,
        slope_neg_outer: f64,
        break_pos: f64,
        break_neg: f64,
    ) -> Result<Self, Error> {
        let slopes = [
            ("m_r1", slope_pos_inner),
            ("m_r2", slope_pos_outer),
            ("m_l1", slope_neg_inner),
            ("m_l2", slope_neg_outer),
        ];
        for (name, s) in slopes {
            if !s.is_finite() || s <= 0.0 {
                return Err(invalid(
                    "pwl slope",
                    format!("{name} must be finite and strictly positive, got {s}"),
                ));
            }
        }
        if !break_pos.is_finite() || break_pos <= 0.0 {
            return Err(invalid(
                "u_r",
                format!("positive breakpoint must satisfy u_r > 0, got {break_pos}"),
            ));
        }
        if !break_neg.is_finite() || break_neg >= 0.0 {
            return Err(invalid(
                "u_l",
                format!("negative breakpoint must satisfy u_l < 0, got {break_neg}"),
            ));
        }
        Ok(Self {
            slope_pos_inner,
            slope_pos_outer,
            slope_neg_inner,
            slope_neg_outer,
            break_pos,
            break_neg,
            threshold_pos: slope_pos_inner * break_pos,
            threshold_neg: slope_neg_inner * break_neg,
        })
    }

    /// The identity map: all slopes one. Breakpoints are then immaterial.
    pub fn identity() -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0, 1.0, -1.0).unwrap()
    }

    pub fn slope_pos_inner(&self) -> f64 {
        self.slope_pos_inner
    }
    pub fn slope_pos_outer(&self) -> f64 {
        self.slope_pos_outer
    }
    pub fn slope_neg_inner(&self) -> f64 {
        self.slope_neg_inner
    }
    pub fn slope_neg_outer(&self) -> f64 {
        self.slope_neg_outer
    }
    pub fn break_pos(&self) -> f64 {
        self.break_pos
    }
    pub fn break_neg(&self) -> f64 {
        self.break_neg
    }

    /// Output value at the positive breakpoint.
    pub fn threshold_pos(&self) -> f64 {
        self.threshold_pos
    }

    /// Output value at the negative breakpoint.
    pub fn threshold_neg(&self) -> f64 {
        self.threshold_neg
    }

    /// Evaluates the map at input `u`. Total on the reals; the origin maps to
    /// zero and the map is continuous at every region boundary.
    pub fn evaluate(&self, u: f64) -> f64 {
        if u > self.break_pos {
            self.slope_pos_outer * (u - self.break_pos) + self.threshold_pos
        } else if u >= 0.0 {
            self.slope_pos_inner * u
        } else if u >= self.break_neg {
            self.slope_neg_inner * u
        } else {
            self.slope_neg_outer * (u - self.break_neg) + self.threshold_neg
        }
    }

    /// Exact inverse: returns `u` with `evaluate(u) = T` up to rounding.
    /// Positive slopes make the map a bijection, so this is total.
    pub fn invert_exact(&self, t: f64) -> f64 {
        if t > self.threshold_pos {
            (t - self.threshold_pos) / self.slope_pos_outer + self.break_pos
        } else if t >= 0.0 {
            t / self.slope_pos_inner
        } else if t >= self.threshold_neg {
            t / self.slope_neg_inner
        } else {
            (t - self.threshold_neg) / self.slope_neg_outer + self.break_neg
        }
    }

    /// Splits the exact inverse into a unity feedforward term and a residual:
    /// `direct = T`, `residual = invert_exact(T) - T`. Their sum is the exact
    /// inverse; the compensator feeds `direct` through and learns `residual`.
    pub fn inverse_decomposition(&self, t: f64) -> (f64, f64) {
        (t, self.invert_exact(t) - t)
    }

    /// Slope of the active region at input `u`. At a region boundary the
    /// right-hand (limit from above) slope is returned.
    pub fn local_slope(&self, u: f64) -> f64 {
        if u < self.break_neg {
            self.slope_neg_outer
        } else if u < 0.0 {
            self.slope_neg_inner
        } else if u < self.break_pos {
            self.slope_pos_inner
        } else {
            self.slope_pos_outer
        }
    }
}

impl Default for PwlParams {
    /// Default servo actuator map used throughout the built-in scenarios.
    fn default() -> Self {
        Self::new(1.0, 2.0, 0.7, 0.5, 0.7, -0.6).unwrap()
    }
}
