use serde::{Deserialize, Serialize};

/// Learnable time encoding: element 0 is `ω_0 τ + φ_0`, elements `1..=k`
/// are `sin(ω_i τ + φ_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Time2Vec {
    pub omega: Vec<f64>,
    pub phi: Vec<f64>,
}

impl Time2Vec {
    /// `k` periodic elements, frequencies seeded alternately with daily and
    /// weekly harmonics, phases zero. The linear frequency is `1/scale`.
    pub fn seeded(k: usize, scale: f64) -> Self {
        let day = 2.0 * std::f64::consts::PI / 24.0;
        let week = 2.0 * std::f64::consts::PI / 168.0;
        let mut omega = vec![1.0 / scale.max(1.0)];
        for i in 1..=k {
            let harmonic = i.div_ceil(2) as f64;
            omega.push(if i % 2 == 1 { day * harmonic } else { week * harmonic });
        }
        Self {
            phi: vec![0.0; k + 1],
            omega,
        }
    }

    /// Number of periodic elements.
    pub fn k(&self) -> usize {
        self.omega.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn forward(&self, tau: f64) -> Vec<f64> {
        time2vec_forward(tau, &self.omega, &self.phi)
    }
}

pub fn time2vec_forward(tau: f64, omega: &[f64], phi: &[f64]) -> Vec<f64> {
    omega
        .iter()
        .zip(phi)
        .enumerate()
        .map(|(i, (w, p))| {
            let arg = w * tau + p;
            if i == 0 {
                arg
            } else {
                arg.sin()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_only_when_k_is_zero() {
        let t = Time2Vec {
            omega: vec![0.5],
            phi: vec![1.0],
        };
        assert_eq!(t.forward(4.0), vec![3.0]);
        assert_eq!(t.k(), 0);
    }

    #[test]
    fn daily_sine_peaks_at_six() {
        let out = time2vec_forward(6.0, &[1.0, 2.0 * PI / 24.0], &[0.0, 0.0]);
        assert!((out[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_elements_repeat() {
        let t = Time2Vec::seeded(4, 48.0);
        for (i, w) in t.omega.iter().enumerate().skip(1) {
            let a = t.forward(3.7)[i];
            let b = t.forward(3.7 + 2.0 * PI / w)[i];
            assert!((a - b).abs() < 1e-9);
        }
    }
}
