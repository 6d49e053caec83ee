//! Seeded stand-in for a human subject, used to close the loop in tests and
//! batch simulations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{Procedure, MIN_STIMULUS_M};
use super::session::{Action, Judgment, Response, SessionState};
use super::EngineError;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Observer whose perceived magnification is `true_m`. It calls a test moon
/// "larger" with probability `Φ((stimulus − true_m)/σ)`; with `σ = 0` that is
/// a hard threshold at `true_m`.
#[derive(Clone, Debug)]
pub struct SimulatedObserver {
    true_m: f64,
    sigma: f64,
    rng: ChaCha8Rng,
}

impl SimulatedObserver {
    pub fn new(true_m: f64, noise_sigma: f64, seed: u64) -> Result<Self, EngineError> {
        if !(true_m > 0.0) || !true_m.is_finite() {
            return Err(EngineError::InvalidObserver(format!(
                "true_m must be positive, got {true_m}"
            )));
        }
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(EngineError::InvalidObserver(format!(
                "noise sigma must be non-negative, got {noise_sigma}"
            )));
        }
        Ok(Self {
            true_m,
            sigma: noise_sigma,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn true_m(&self) -> f64 {
        self.true_m
    }

    pub fn p_larger(&self, stimulus_m: f64) -> f64 {
        if self.sigma == 0.0 {
            if stimulus_m > self.true_m {
                1.0
            } else {
                0.0
            }
        } else {
            normal_cdf((stimulus_m - self.true_m) / self.sigma)
        }
    }

    pub fn judge(&mut self, stimulus_m: f64) -> Judgment {
        let p = self.p_larger(stimulus_m);
        let larger = if self.sigma == 0.0 {
            p == 1.0
        } else {
            self.rng.random::<f64>() < p
        };
        if larger {
            Judgment::Larger
        } else {
            Judgment::Smaller
        }
    }

    /// Final slider setting for a method-of-adjustment session.
    pub fn adjust(&mut self) -> f64 {
        let noise = if self.sigma == 0.0 {
            0.0
        } else {
            Normal::new(0.0, self.sigma)
                .expect("sigma validated")
                .sample(&mut self.rng)
        };
        (self.true_m + noise).max(MIN_STIMULUS_M)
    }

    /// Response to `trial_index`, shown at `stimulus_m`, in `procedure`.
    pub fn respond(&mut self, procedure: Procedure, trial_index: u64, stimulus_m: f64) -> Response {
        let action = match procedure {
            Procedure::Staircase1Up1Down => Action::Judgment(self.judge(stimulus_m)),
            Procedure::MethodOfAdjustment => Action::FinalM(self.adjust()),
        };
        Response {
            trial_index,
            action,
            latency_ms: 0,
        }
    }
}

/// Hard cap on closed-loop trials, in case a configuration never converges.
pub const MAX_SIMULATED_TRIALS: usize = 10_000;

/// Drive `state` to completion with `observer` and return the PSE.
pub fn run_closed_loop(state: &mut SessionState, observer: &mut SimulatedObserver) -> Result<f64, EngineError> {
    let procedure = state.config().procedure;
    while !state.is_complete() {
        if state.trials().len() >= MAX_SIMULATED_TRIALS {
            return Err(EngineError::TrialLimit(MAX_SIMULATED_TRIALS));
        }
        let trial = state.next_stimulus()?;
        state.record_response(observer.respond(procedure, trial.index, trial.stimulus_m))?;
    }
    state.estimate_pse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SessionConfig;

    #[test]
    fn cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.96) - 0.9750021048517795).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-12);
    }

    #[test]
    fn noiseless_threshold() {
        let mut o = SimulatedObserver::new(1.25, 0.0, 1).unwrap();
        for _ in 0..20 {
            assert_eq!(o.judge(1.3), Judgment::Larger);
            assert_eq!(o.judge(1.2), Judgment::Smaller);
        }
    }

    #[test]
    fn seeded_observer_is_reproducible() {
        let mut a = SimulatedObserver::new(1.25, 0.05, 9).unwrap();
        let mut b = SimulatedObserver::new(1.25, 0.05, 9).unwrap();
        let xs: Vec<_> = (0..50).map(|i| a.judge(1.2 + i as f64 * 0.002)).collect();
        let ys: Vec<_> = (0..50).map(|i| b.judge(1.2 + i as f64 * 0.002)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn response_frequency_tracks_cdf() {
        let mut o = SimulatedObserver::new(1.0, 0.1, 5).unwrap();
        let n = 20_000;
        let larger = (0..n).filter(|_| o.judge(1.1) == Judgment::Larger).count();
        let freq = larger as f64 / n as f64;
        assert!((freq - normal_cdf(1.0)).abs() < 0.01, "{freq}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SimulatedObserver::new(0.0, 0.1, 0).is_err());
        assert!(SimulatedObserver::new(1.0, -0.1, 0).is_err());
    }

    #[test]
    fn adjustment_loop() {
        let mut s = SessionState::new(SessionConfig::adjustment(1.0)).unwrap();
        let mut o = SimulatedObserver::new(1.3, 0.0, 0).unwrap();
        assert_eq!(run_closed_loop(&mut s, &mut o).unwrap(), 1.3);
        assert_eq!(s.trials().len(), 1);
    }
}
