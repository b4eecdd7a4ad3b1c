//! The radial operator shared by the barrier functions and the iteration:
//!
//! ```text
//! Q(t)   = H(t)^{-1} ∫_0^t H(s) g(s) ds,        H(s) = s^{N-1} exp(∫_0^s h)
//! out(r) = ∫_0^r Q(t)^{1/(p-1)} dt
//! ```
//!
//! `Q` is accumulated panel by panel in ratio form (`H(s)/H(t)` never
//! overflows), with `s^{N-1}` integrated exactly against the linear
//! interpolant of `exp(∫h) g`. The outer integral is the plain trapezoid.
//! `Q(0) = 0`, the limit of the `0/0` quotient at the origin.

use crate::quadrature::cumulative_trapezoid;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("negative inner integral {value:?} at r = {r:?} (source term is not nonnegative)")]
    NegativeFlux { r: f64, value: f64 },
    #[error("non-finite value at r = {r:?}")]
    NonFinite { r: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialKernel {
    nodes: Vec<f64>,
    /// `∫_0^{r_i} h`.
    log_weight: Vec<f64>,
    power: usize,
    decay: Vec<f64>,
    w_prev: Vec<f64>,
    w_curr: Vec<f64>,
}

impl RadialKernel {
    /// `nodes` start at 0 and increase; `h_values` are the gradient
    /// coefficient at the nodes; `dimension` is `N`.
    pub fn new(nodes: &[f64], h_values: &[f64], dimension: usize) -> Self {
        assert!(dimension >= 1);
        assert_eq!(nodes.len(), h_values.len());
        assert_eq!(nodes[0], 0.0);
        let power = dimension - 1;
        let log_weight = cumulative_trapezoid(nodes, h_values);
        let binom = binomials(power);

        let m = nodes.len();
        let mut decay = vec![0.0; m];
        let mut w_prev = vec![0.0; m];
        let mut w_curr = vec![0.0; m];
        for i in 1..m {
            let (a, b) = (nodes[i - 1], nodes[i]);
            let h = b - a;
            let alpha = a / b;
            let eta = h / b;
            let damp = (log_weight[i - 1] - log_weight[i]).exp();
            let mut left = 0.0;
            let mut right = 0.0;
            for (k, c) in binom.iter().enumerate() {
                let term = c * alpha.powi((power - k) as i32) * eta.powi(k as i32);
                let kf = k as f64;
                left += term / ((kf + 1.0) * (kf + 2.0));
                right += term / (kf + 2.0);
            }
            decay[i] = alpha.powi(power as i32) * damp;
            w_prev[i] = h * left * damp;
            w_curr[i] = h * right;
        }
        Self {
            nodes: nodes.to_vec(),
            log_weight,
            power,
            decay,
            w_prev,
            w_curr,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `∫_0^r h` at the nodes.
    pub fn log_weight(&self) -> &[f64] {
        &self.log_weight
    }

    /// `H(r_i) = r_i^{N-1} exp(∫_0^{r_i} h)`.
    pub fn weight(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.log_weight)
            .map(|(r, l)| r.powi(self.power as i32) * l.exp())
            .collect()
    }

    /// `Q(r_i) = H(r_i)^{-1} ∫_0^{r_i} H g`.
    pub fn flux(&self, source: &[f64]) -> Vec<f64> {
        debug_assert_eq!(source.len(), self.nodes.len());
        let mut q = vec![0.0; source.len()];
        for i in 1..source.len() {
            q[i] = self.decay[i] * q[i - 1] + self.w_prev[i] * source[i - 1] + self.w_curr[i] * source[i];
        }
        q
    }

    /// `Q^{1/(p-1)}` at the nodes: the derivative of the outer integral.
    pub fn slope(&self, source: &[f64], p: f64) -> Result<Vec<f64>, KernelError> {
        let exponent = 1.0 / (p - 1.0);
        self.flux(source)
            .into_iter()
            .zip(&self.nodes)
            .map(|(q, &r)| {
                if q < 0.0 {
                    return Err(KernelError::NegativeFlux { r, value: q });
                }
                let v = if q == 0.0 { 0.0 } else { q.powf(exponent) };
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(KernelError::NonFinite { r })
                }
            })
            .collect()
    }

    /// `∫_0^{r_i} Q^{1/(p-1)}` at the nodes.
    pub fn apply(&self, source: &[f64], p: f64) -> Result<Vec<f64>, KernelError> {
        let slope = self.slope(source, p)?;
        Ok(cumulative_trapezoid(&self.nodes, &slope))
    }
}

fn binomials(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for k in 1..=n {
        let prev = row[k - 1];
        row.push(prev * (n + 1 - k) as f64 / k as f64);
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(r: f64, m: usize) -> Vec<f64> {
        (0..=m).map(|i| r * i as f64 / m as f64).collect()
    }

    #[test]
    fn flux_is_exact_for_constant_source() {
        // h = 0, g = 1: Q(t) = t / N.
        for n in [3usize, 4, 7] {
            let nodes = uniform(2.0, 50);
            let k = RadialKernel::new(&nodes, &vec![0.0; nodes.len()], n);
            let q = k.flux(&vec![1.0; nodes.len()]);
            for (r, q) in nodes.iter().zip(&q) {
                assert!((q - r / n as f64).abs() < 1e-14, "N={n} r={r} q={q}");
            }
        }
    }

    #[test]
    fn flux_is_exact_for_linear_source_on_nonuniform_nodes() {
        // h = 0, g = s, N = 3: Q(t) = t^2 / 4.
        let nodes = vec![0.0, 0.1, 0.15, 0.4, 1.0, 1.05, 3.0];
        let k = RadialKernel::new(&nodes, &vec![0.0; nodes.len()], 3);
        let q = k.flux(&nodes);
        for (r, q) in nodes.iter().zip(&q) {
            assert!((q - r * r / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn weight_matches_closed_form() {
        let nodes = uniform(3.0, 300);
        let k = RadialKernel::new(&nodes, &vec![1.0; nodes.len()], 3);
        for (r, w) in nodes.iter().zip(k.weight()) {
            assert!((w - r * r * r.exp()).abs() <= 1e-12 * w.max(1.0));
        }
    }

    #[test]
    fn large_gradient_weight_does_not_overflow() {
        // exp(∫h) reaches e^400 at the horizon.
        let nodes = uniform(400.0, 8000);
        let k = RadialKernel::new(&nodes, &vec![1.0; nodes.len()], 3);
        let q = k.flux(&vec![1.0; nodes.len()]);
        assert!(q.iter().all(|v| v.is_finite()));
        // Q(t) -> 1 when h = g = 1.
        assert!((q[q.len() - 1] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn negative_source_is_rejected() {
        let nodes = uniform(1.0, 10);
        let k = RadialKernel::new(&nodes, &vec![0.0; nodes.len()], 3);
        assert!(matches!(
            k.apply(&vec![-1.0; nodes.len()], 2.0),
            Err(KernelError::NegativeFlux { .. })
        ));
    }

    #[test]
    fn binomial_rows() {
        assert_eq!(binomials(0), vec![1.0]);
        assert_eq!(binomials(4), vec![1.0, 4.0, 6.0, 4.0, 1.0]);
    }
}
