//! Three-layer feedforward network with a tanh hidden layer, plus the
//! gradient-like online tuning law that adapts its weights from the actuator
//! tracking error.
//!
//! Thresholds are carried by augmenting the input and hidden vectors with a
//! leading `1`, so the input weight matrix has `n + 1` rows and the output
//! weight matrix `hidden + 1` rows. The hidden-to-output threshold row is
//! adapted together with the rest (the tuning law acts on the augmented
//! hidden vector); leaving it out would freeze the output offset at its
//! initial value forever.

use crate::error::{invalid, Error};

/// Prefixes a `1` to carry threshold weights: `[1, x_1, ..., x_n]`.
pub fn augment(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(1.0);
    out.extend_from_slice(x);
    out
}

/// Gains of the weight tuning law. Both learning-rate matrices are scalar
/// multiples of the identity; `leakage` is the small decay factor that keeps
/// the weights bounded without persistent excitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningGains {
    s_scale: f64,
    q_scale: f64,
    leakage: f64,
}

impl TuningGains {
    pub fn new(s_scale: f64, q_scale: f64, leakage: f64) -> Result<Self, Error> {
        for (name, v) in [("S_scale", s_scale), ("Q_scale", q_scale), ("k", leakage)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid(
                    "tuning gain",
                    format!("{name} must be finite and strictly positive, got {v}"),
                ));
            }
        }
        Ok(Self {
            s_scale,
            q_scale,
            leakage,
        })
    }

    pub fn s_scale(&self) -> f64 {
        self.s_scale
    }
    pub fn q_scale(&self) -> f64 {
        self.q_scale
    }
    pub fn leakage(&self) -> f64 {
        self.leakage
    }
}

impl Default for TuningGains {
    fn default() -> Self {
        Self::new(8.0, 9.0, 0.002).unwrap()
    }
}

/// Weight matrices of the network, stored row-major.
///
/// `v_hat` is `(n + 1) x hidden` (input-to-hidden, threshold row first);
/// `w_hat` is `(hidden + 1) x outputs` (hidden-to-output, threshold row
/// first).
#[derive(Debug, Clone, PartialEq)]
pub struct NnWeights {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    v_hat: Vec<f64>,
    w_hat: Vec<f64>,
}

/// SplitMix64 step. A fixed, self-contained generator keeps weight
/// initialization bit-identical across platforms and toolchain updates,
/// which the golden-file tests rely on.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform sample on [-1, 1) from one generator step.
fn uniform_pm1(state: &mut u64) -> f64 {
    // 53 high bits give a uniform double in [0, 1)
    let unit = (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * unit - 1.0
}

impl NnWeights {
    fn check_dims(inputs: usize, hidden: usize, outputs: usize) -> Result<(), Error> {
        if inputs == 0 || hidden == 0 || outputs == 0 {
            return Err(invalid(
                "nn dims",
                format!("all dimensions must be >= 1, got n={inputs}, L={hidden}, m={outputs}"),
            ));
        }
        Ok(())
    }

    /// All-zero weights.
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> Result<Self, Error> {
        Self::check_dims(inputs, hidden, outputs)?;
        Ok(Self {
            inputs,
            hidden,
            outputs,
            v_hat: vec![0.0; (inputs + 1) * hidden],
            w_hat: vec![0.0; (hidden + 1) * outputs],
        })
    }

    /// Standard initialization: input weights drawn uniformly from [-1, 1]
    /// with a seeded deterministic generator, output weights zero. Zero
    /// output weights mean the network contributes nothing until tuning
    /// starts, leaving only the linear loop acting at startup.
    pub fn init(inputs: usize, hidden: usize, outputs: usize, seed: u64) -> Result<Self, Error> {
        let mut w = Self::zeros(inputs, hidden, outputs)?;
        let mut state = seed;
        for entry in w.v_hat.iter_mut() {
            *entry = uniform_pm1(&mut state);
        }
        Ok(w)
    }

    /// Builds from explicit row-major entries, validating shape and finiteness.
    pub fn from_parts(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        v_hat: Vec<f64>,
        w_hat: Vec<f64>,
    ) -> Result<Self, Error> {
        Self::check_dims(inputs, hidden, outputs)?;
        if v_hat.len() != (inputs + 1) * hidden {
            return Err(invalid(
                "V_hat",
                format!(
                    "expected {} entries, got {}",
                    (inputs + 1) * hidden,
                    v_hat.len()
                ),
            ));
        }
        if w_hat.len() != (hidden + 1) * outputs {
            return Err(invalid(
                "W_hat",
                format!(
                    "expected {} entries, got {}",
                    (hidden + 1) * outputs,
                    w_hat.len()
                ),
            ));
        }
        if v_hat.iter().chain(w_hat.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("nn weights", "all entries must be finite"));
        }
        Ok(Self {
            inputs,
            hidden,
            outputs,
            v_hat,
            w_hat,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }
    pub fn hidden(&self) -> usize {
        self.hidden
    }
    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Row-major `(n + 1) x hidden` input weights, threshold row first.
    pub fn v_hat(&self) -> &[f64] {
        &self.v_hat
    }

    /// Row-major `(hidden + 1) x outputs` output weights, threshold row first.
    pub fn w_hat(&self) -> &[f64] {
        &self.w_hat
    }

    /// Hidden-layer output: tanh applied componentwise to `V_hat^T * [1; x]`.
    pub fn hidden_activation(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.inputs, "input dimension mismatch");
        let cols = self.hidden;
        let mut act = vec![0.0; cols];
        for (k, a) in act.iter_mut().enumerate() {
            // threshold row plus weighted inputs
            let mut z = self.v_hat[k];
            for (j, xj) in x.iter().enumerate() {
                z += self.v_hat[(j + 1) * cols + k] * xj;
            }
            *a = z.tanh();
        }
        act
    }

    /// Scalar network output `W_hat^T * [1; sigma]` for single-output nets.
    pub fn forward(&self, x: &[f64]) -> f64 {
        assert_eq!(self.outputs, 1, "forward is defined for single-output nets");
        let sigma = self.hidden_activation(x);
        let mut y = self.w_hat[0];
        for (k, s) in sigma.iter().enumerate() {
            y += self.w_hat[k + 1] * s;
        }
        y
    }

    /// Frobenius norm of the stacked weight matrix: square root of the sum
    /// of squares of every entry of both matrices.
    pub fn frobenius_norm(&self) -> f64 {
        self.v_hat
            .iter()
            .chain(self.w_hat.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Tuning-law derivatives `(dV_hat/dt, dW_hat/dt)` driven by the actuator
    /// tracking error `t_tilde`, returned row-major in the same layout as the
    /// weights:
    ///
    /// ```text
    ///   dV/dt = -Q |T~| [1; x] sigma^T  - k Q |T~| V
    ///   dW/dt = -S [1; sigma] T~        - k S |T~| W
    /// ```
    ///
    /// Every term carries `t_tilde`, so a perfectly tracked actuator freezes
    /// the weights.
    pub fn weight_derivatives(
        &self,
        gains: &TuningGains,
        x_nn: &[f64],
        t_tilde: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(x_nn.len(), self.inputs, "input dimension mismatch");
        let sigma = self.hidden_activation(x_nn);
        let x_aug = augment(x_nn);
        let abs_t = t_tilde.abs();
        let q = gains.q_scale;
        let s = gains.s_scale;
        let k = gains.leakage;
        let cols = self.hidden;

        let mut dv = vec![0.0; self.v_hat.len()];
        for (row, xi) in x_aug.iter().enumerate() {
            for (col, sig) in sigma.iter().enumerate() {
                let idx = row * cols + col;
                dv[idx] = -q * abs_t * xi * sig - k * q * abs_t * self.v_hat[idx];
            }
        }

        let sigma_aug = augment(&sigma);
        let mut dw = vec![0.0; self.w_hat.len()];
        for (row, sig) in sigma_aug.iter().enumerate() {
            for col in 0..self.outputs {
                let idx = row * self.outputs + col;
                dw[idx] = -s * sig * t_tilde - k * s * abs_t * self.w_hat[idx];
            }
        }
        (dv, dw)
    }

    /// Returns `self + h * (dv, dw)`, the update step used by the integrator.
    pub fn axpy(&self, dv: &[f64], dw: &[f64], h: f64) -> Self {
        debug_assert_eq!(dv.len(), self.v_hat.len());
        debug_assert_eq!(dw.len(), self.w_hat.len());
        let mut out = self.clone();
        for (o, d) in out.v_hat.iter_mut().zip(dv) {
            *o += h * d;
        }
        for (o, d) in out.w_hat.iter_mut().zip(dw) {
            *o += h * d;
        }
        out
    }

    /// Writes a snapshot as CSV: one row per entry, `matrix,rows,cols,row,col,value`,
    /// input weights first, then output weights, row-major.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "matrix,rows,cols,row,col,value")?;
        let vc = self.hidden;
        for row in 0..=self.inputs {
            for col in 0..vc {
                writeln!(
                    out,
                    "V_hat,{},{},{},{},{:.16e}",
                    self.inputs + 1,
                    vc,
                    row,
                    col,
                    self.v_hat[row * vc + col]
                )?;
            }
        }
        for row in 0..=self.hidden {
            for col in 0..self.outputs {
                writeln!(
                    out,
                    "W_hat,{},{},{},{},{:.16e}",
                    self.hidden + 1,
                    self.outputs,
                    row,
                    col,
                    self.w_hat[row * self.outputs + col]
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent double-loop evaluation of the forward pass, written against
    // the scalar sum formula rather than the matrix layout.
    fn forward_oracle(w: &NnWeights, x: &[f64]) -> f64 {
        let n = w.inputs();
        let l = w.hidden();
        let v = w.v_hat();
        let wh = w.w_hat();
        let mut y = wh[0]; // output threshold
        for k in 0..l {
            let mut z = v[k]; // hidden threshold v_k0
            for (j, xj) in x.iter().enumerate().take(n) {
                z += v[(j + 1) * l + k] * xj;
            }
            y += wh[k + 1] * z.tanh();
        }
        y
    }

    fn lcg(state: &mut u64) -> f64 {
        // quick-and-dirty test-vector generator, distinct from splitmix64
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn augment_prefixes_one() {
        assert_eq!(augment(&[]), vec![1.0]);
        assert_eq!(augment(&[2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            augment(&[0.0; 5]),
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn hidden_activation_hand_cases() {
        // zero weights -> tanh(0) = 0
        let w = NnWeights::zeros(3, 4, 1).unwrap();
        assert!(w.hidden_activation(&[1.0, -2.0, 0.5]).iter().all(|&a| a == 0.0));

        // single column [0, 1]^T: zero threshold, unit input weight
        let w = NnWeights::from_parts(1, 1, 1, vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let act = w.hidden_activation(&[0.5]);
        assert!((act[0] - 0.5f64.tanh()).abs() < 1e-15);
        assert!((act[0] - 0.4621171573).abs() < 1e-9);

        // threshold-only column [1, 0]^T ignores the input
        let w = NnWeights::from_parts(1, 1, 1, vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        for x in [-3.0, 0.0, 7.5] {
            let act = w.hidden_activation(&[x]);
            assert!((act[0] - 1.0f64.tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_hand_cases() {
        let w = NnWeights::init(5, 8, 1, 7).unwrap();
        // zero output weights -> zero output regardless of input
        assert_eq!(w.forward(&[0.3, -1.0, 2.0, 0.0, 4.0]), 0.0);

        let w = NnWeights::from_parts(1, 1, 1, vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        let y = w.forward(&[0.5]);
        assert!((y - 2.0 * 0.5f64.tanh()).abs() < 1e-15);
        assert!((y - 0.9242343146).abs() < 1e-9);
    }

    #[test]
    fn forward_matches_double_loop_oracle() {
        let mut state = 0x1234u64;
        for _ in 0..100 {
            let mut v = vec![0.0; 6 * 8];
            let mut wh = vec![0.0; 9];
            for e in v.iter_mut() {
                *e = lcg(&mut state);
            }
            for e in wh.iter_mut() {
                *e = lcg(&mut state);
            }
            let w = NnWeights::from_parts(5, 8, 1, v, wh).unwrap();
            let x: Vec<f64> = (0..5).map(|_| 3.0 * lcg(&mut state)).collect();
            let diff = (w.forward(&x) - forward_oracle(&w, &x)).abs();
            assert!(diff < 1e-12, "oracle mismatch {diff}");
        }
    }

    #[test]
    fn frobenius_norm_cases() {
        assert_eq!(NnWeights::zeros(2, 2, 1).unwrap().frobenius_norm(), 0.0);

        let mut w = NnWeights::zeros(1, 1, 1).unwrap();
        w.v_hat[0] = 3.0;
        assert_eq!(w.frobenius_norm(), 3.0);

        // two unit V entries and three unit W entries -> sqrt(5)
        let w = NnWeights::from_parts(
            1,
            2,
            1,
            vec![1.0, 1.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap();
        assert!((w.frobenius_norm() - 5.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn derivatives_vanish_without_error() {
        let w = NnWeights::init(5, 8, 1, 3).unwrap();
        let gains = TuningGains::default();
        let (dv, dw) = w.weight_derivatives(&gains, &[0.1, 0.2, 0.3, 0.4, 0.5], 0.0);
        assert!(dv.iter().all(|&d| d == 0.0));
        assert!(dw.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn derivatives_zero_weights_zero_input() {
        // tanh(0) = 0 kills every non-threshold term; only the output
        // threshold row is pushed, by -S * 1 * T~.
        let w = NnWeights::zeros(5, 8, 1).unwrap();
        let gains = TuningGains::new(8.0, 9.0, 0.002).unwrap();
        let (dv, dw) = w.weight_derivatives(&gains, &[0.0; 5], 1.0);
        assert!(dv.iter().all(|&d| d == 0.0));
        assert_eq!(dw[0], -8.0);
        assert!(dw[1..].iter().all(|&d| d == 0.0));
    }

    #[test]
    fn derivatives_match_elementwise_oracle() {
        let mut state = 0x9876u64;
        for _ in 0..100 {
            let mut v = vec![0.0; 6 * 8];
            let mut wh = vec![0.0; 9];
            for e in v.iter_mut() {
                *e = lcg(&mut state);
            }
            for e in wh.iter_mut() {
                *e = lcg(&mut state);
            }
            let w = NnWeights::from_parts(5, 8, 1, v.clone(), wh.clone()).unwrap();
            let x: Vec<f64> = (0..5).map(|_| 2.0 * lcg(&mut state)).collect();
            let t_tilde = 3.0 * lcg(&mut state);
            let gains = TuningGains::new(8.0, 9.0, 0.002).unwrap();
            let (dv, dw) = w.weight_derivatives(&gains, &x, t_tilde);

            // element-by-element re-derivation
            let sigma: Vec<f64> = (0..8)
                .map(|k| {
                    let mut z = v[k];
                    for j in 0..5 {
                        z += v[(j + 1) * 8 + k] * x[j];
                    }
                    z.tanh()
                })
                .collect();
            let xa = [
                1.0, x[0], x[1], x[2], x[3], x[4],
            ];
            for row in 0..6 {
                for col in 0..8 {
                    let expected = -9.0 * t_tilde.abs() * xa[row] * sigma[col]
                        - 0.002 * 9.0 * t_tilde.abs() * v[row * 8 + col];
                    assert!((dv[row * 8 + col] - expected).abs() < 1e-12);
                }
            }
            for row in 0..9 {
                let sig = if row == 0 { 1.0 } else { sigma[row - 1] };
                let expected = -8.0 * sig * t_tilde - 0.002 * 8.0 * t_tilde.abs() * wh[row];
                assert!((dw[row] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_scale_linearly_in_gains() {
        let w = NnWeights::init(5, 8, 1, 11).unwrap();
        let x = [0.3, -0.7, 1.1, 0.05, -2.0];
        let g1 = TuningGains::new(8.0, 9.0, 0.002).unwrap();
        let g2 = TuningGains::new(16.0, 18.0, 0.002).unwrap();
        let (dv1, dw1) = w.weight_derivatives(&g1, &x, 0.4);
        let (dv2, dw2) = w.weight_derivatives(&g2, &x, 0.4);
        for (a, b) in dv1.iter().zip(&dv2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
        for (a, b) in dw1.iter().zip(&dw2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn output_derivative_splits_into_odd_drive_and_even_leakage() {
        let w = NnWeights::init(5, 8, 1, 19).unwrap();
        let mut w = w;
        // make W_hat nonzero so the leakage term is visible
        for e in w.w_hat.iter_mut() {
            *e = 0.25;
        }
        let gains = TuningGains::new(8.0, 9.0, 0.01).unwrap();
        let x = [0.2, -0.4, 0.6, -0.8, 1.0];
        let t = 0.7;
        let (_, dw_pos) = w.weight_derivatives(&gains, &x, t);
        let (_, dw_neg) = w.weight_derivatives(&gains, &x, -t);

        let sigma_aug = augment(&w.hidden_activation(&x));
        for (i, (&p, &m)) in dw_pos.iter().zip(&dw_neg).enumerate() {
            let drive = -gains.s_scale() * sigma_aug[i] * t;
            let leak = -gains.leakage() * gains.s_scale() * t.abs() * w.w_hat[i];
            // dW(T~) = drive + leak, dW(-T~) = -drive + leak
            assert!((p - (drive + leak)).abs() < 1e-12);
            assert!((m - (-drive + leak)).abs() < 1e-12);
        }
    }

    #[test]
    fn init_is_deterministic_and_in_range() {
        let a = NnWeights::init(5, 8, 1, 42).unwrap();
        let b = NnWeights::init(5, 8, 1, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.w_hat().iter().all(|&w| w == 0.0));
        assert!(a.v_hat().iter().all(|&v| (-1.0..=1.0).contains(&v)));

        let c = NnWeights::init(5, 8, 1, 43).unwrap();
        assert_ne!(a.v_hat(), c.v_hat());
    }

    #[test]
    fn csv_snapshot_has_expected_shape() {
        let w = NnWeights::init(2, 3, 1, 5).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "matrix,rows,cols,row,col,value");
        // 3*3 V entries + 4*1 W entries
        assert_eq!(lines.len(), 1 + 9 + 4);
        assert!(lines[1].starts_with("V_hat,3,3,0,0,"));
        assert!(lines[10].starts_with("W_hat,4,1,0,0,"));
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(NnWeights::zeros(0, 8, 1).is_err());
        assert!(NnWeights::from_parts(1, 1, 1, vec![0.0; 3], vec![0.0; 2]).is_err());
        assert!(NnWeights::from_parts(1, 1, 1, vec![0.0, f64::NAN], vec![0.0; 2]).is_err());
        assert!(TuningGains::new(0.0, 9.0, 0.002).is_err());
        assert!(TuningGains::new(8.0, -1.0, 0.002).is_err());
        assert!(TuningGains::new(8.0, 9.0, 0.0).is_err());
    }
}
