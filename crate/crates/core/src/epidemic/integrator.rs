//! Classic fourth-order Runge-Kutta with step-doubling error control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// First-order system `y' = f(t, y)`.
pub trait OdeSystem<T> {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[T], dy: &mut [T]);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Spacing of recorded states.
    pub output_dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// First trial step; defaults to `max_step`.
    pub initial_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            output_dt: 1.0,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 1.0,
            min_step: 1e-10,
            initial_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.output_dt) {
            return Err(Error::config("output_dt must be positive"));
        }
        if !pos(self.rel_tol) || !pos(self.abs_tol) {
            return Err(Error::config("tolerances must be positive"));
        }
        if !pos(self.min_step) || !pos(self.max_step) || self.min_step > self.max_step {
            return Err(Error::config("need 0 < min_step <= max_step"));
        }
        if let Some(h) = self.initial_step {
            if !pos(h) {
                return Err(Error::config("initial_step must be positive"));
            }
        }
        Ok(())
    }
}

/// Scratch buffers for one RK4 step.
struct Rk4Work<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Real> Rk4Work<T> {
    fn new(dim: usize) -> Self {
        Rk4Work {
            k1: vec![T::zero(); dim],
            k2: vec![T::zero(); dim],
            k3: vec![T::zero(); dim],
            k4: vec![T::zero(); dim],
            tmp: vec![T::zero(); dim],
        }
    }

    /// One RK4 step from `(t, y)` with slope `k1` already in `self.k1`.
    fn step_with_k1<S: OdeSystem<T>>(&mut self, sys: &S, t: f64, y: &[T], h: f64, out: &mut [T]) {
        let hh = T::of(h);
        let half = T::of(0.5 * h);
        for (tmp, (&y, &k)) in self.tmp.iter_mut().zip(y.iter().zip(&self.k1)) {
            *tmp = y + half * k;
        }
        sys.rhs(t + 0.5 * h, &self.tmp, &mut self.k2);
        for (tmp, (&y, &k)) in self.tmp.iter_mut().zip(y.iter().zip(&self.k2)) {
            *tmp = y + half * k;
        }
        sys.rhs(t + 0.5 * h, &self.tmp, &mut self.k3);
        for (tmp, (&y, &k)) in self.tmp.iter_mut().zip(y.iter().zip(&self.k3)) {
            *tmp = y + hh * k;
        }
        sys.rhs(t + h, &self.tmp, &mut self.k4);
        let sixth = T::of(h / 6.0);
        let two = T::of(2.0);
        for (i, o) in out.iter_mut().enumerate() {
            *o = y[i] + sixth * (self.k1[i] + two * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

/// Fixed-step RK4 from `t0` to `t1`; the last step is shortened to land on `t1`.
pub fn rk4_fixed<T: Real, S: OdeSystem<T>>(sys: &S, y0: &[T], t0: f64, t1: f64, h: f64) -> Vec<T> {
    let mut work = Rk4Work::new(sys.dim());
    let mut y = y0.to_vec();
    let mut next = vec![T::zero(); y.len()];
    let steps = ((t1 - t0) / h).round().max(1.0) as usize;
    let dt = (t1 - t0) / steps as f64;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        sys.rhs(t, &y, &mut work.k1);
        work.step_with_k1(sys, t, &y, dt, &mut next);
        std::mem::swap(&mut y, &mut next);
    }
    y
}

/// Outcome of a successful [`AdaptiveRk4::advance`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Adaptive RK4 stepper. The suggested next step survives across calls to
/// [`advance`](Self::advance), so stopping at a boundary and resuming is
/// identical to integrating straight through that boundary.
#[derive(Debug, Clone)]
pub struct AdaptiveRk4 {
    cfg: IntegratorConfig,
    h_next: f64,
    stats: StepStats,
}

/// Values in `[-NEG_CLAMP, 0)` are roundoff and clamp to 0; anything more
/// negative is an integrity failure.
pub const NEG_CLAMP: f64 = 1e-9;

impl AdaptiveRk4 {
    pub fn new(cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let h_next = cfg.initial_step.unwrap_or(cfg.max_step).min(cfg.max_step);
        Ok(AdaptiveRk4 {
            cfg,
            h_next,
            stats: StepStats::default(),
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Integrate `y` from `t` to exactly `t_end`, never stepping past it.
    /// With `clamp_negative`, each accepted state is checked against
    /// [`NEG_CLAMP`].
    pub fn advance<T: Real, S: OdeSystem<T>>(
        &mut self,
        sys: &S,
        t: &mut f64,
        y: &mut Vec<T>,
        t_end: f64,
        clamp_negative: bool,
    ) -> Result<()> {
        let dim = sys.dim();
        let mut work = Rk4Work::new(dim);
        let mut full = vec![T::zero(); dim];
        let mut mid = vec![T::zero(); dim];
        let mut fine = vec![T::zero(); dim];
        let mut k1 = vec![T::zero(); dim];
        let (rel, abs) = (T::of(self.cfg.rel_tol), T::of(self.cfg.abs_tol));
        let fifteen = T::of(15.0);
        while *t < t_end {
            let remaining = t_end - *t;
            let clipped = self.h_next >= remaining;
            let h = if clipped { remaining } else { self.h_next };

            sys.rhs(*t, y, &mut k1);
            work.k1.copy_from_slice(&k1);
            work.step_with_k1(sys, *t, y, h, &mut full);
            work.k1.copy_from_slice(&k1);
            work.step_with_k1(sys, *t, y, 0.5 * h, &mut mid);
            sys.rhs(*t + 0.5 * h, &mid, &mut work.k1);
            work.step_with_k1(sys, *t + 0.5 * h, &mid, 0.5 * h, &mut fine);

            let mut err = T::zero();
            for i in 0..dim {
                let scale = abs + rel * y[i].abs().max(fine[i].abs());
                let e = (fine[i] - full[i]).abs() / (fifteen * scale);
                if e > err {
                    err = e;
                }
            }
            let err = err.as_f64();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };

            if err <= 1.0 {
                if clamp_negative {
                    for (i, v) in fine.iter_mut().enumerate() {
                        if *v < T::zero() {
                            if v.as_f64() >= -NEG_CLAMP {
                                *v = T::zero();
                            } else {
                                return Err(Error::Integrity {
                                    t: *t + h,
                                    index: i,
                                    value: v.as_f64(),
                                });
                            }
                        }
                    }
                }
                std::mem::swap(y, &mut fine);
                *t = if clipped { t_end } else { *t + h };
                self.stats.accepted += 1;
                let proposal = h * factor;
                self.h_next = if clipped {
                    if factor >= 1.0 {
                        self.h_next
                    } else {
                        self.h_next.min(proposal)
                    }
                } else {
                    proposal.min(self.cfg.max_step)
                };
            } else {
                self.stats.rejected += 1;
                let proposal = h * factor;
                if proposal < self.cfg.min_step {
                    return Err(Error::Stiffness {
                        t: *t,
                        step: proposal,
                        min_step: self.cfg.min_step,
                        max_abs_state: y.iter().fold(0.0, |m, v| m.max(v.as_f64().abs())),
                    });
                }
                self.h_next = proposal;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);
    impl OdeSystem<f64> for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -self.0 * y[0];
        }
    }

    struct Oscillator;
    impl OdeSystem<f64> for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn adaptive_tracks_exponential_decay() {
        let mut rk = AdaptiveRk4::new(IntegratorConfig::default()).unwrap();
        let (mut t, mut y) = (0.0, vec![1.0]);
        rk.advance(&Decay(0.3), &mut t, &mut y, 20.0, true).unwrap();
        assert_eq!(t, 20.0);
        let rel = (y[0] - (-6.0f64).exp()).abs() / (-6.0f64).exp();
        assert!(rel < 2e-6, "relative error {rel}");
    }

    #[test]
    fn segmented_equals_straight_through() {
        let cfg = IntegratorConfig { max_step: 0.7, ..IntegratorConfig::default() };
        let mut a = AdaptiveRk4::new(cfg.clone()).unwrap();
        let (mut ta, mut ya) = (0.0, vec![1.0, 0.0]);
        for k in 1..=10 {
            a.advance(&Oscillator, &mut ta, &mut ya, k as f64, false).unwrap();
        }
        let mut b = AdaptiveRk4::new(cfg).unwrap();
        let (mut tb, mut yb) = (0.0, vec![1.0, 0.0]);
        for k in 1..=5 {
            b.advance(&Oscillator, &mut tb, &mut yb, k as f64, false).unwrap();
        }
        let mut c = b.clone();
        let (mut tc, mut yc) = (tb, yb.clone());
        for k in 6..=10 {
            c.advance(&Oscillator, &mut tc, &mut yc, k as f64, false).unwrap();
        }
        assert_eq!(ya, yc);
    }

    #[test]
    fn fixed_step_is_fourth_order() {
        let exact = (-2.0f64).exp();
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| (rk4_fixed(&Decay(1.0), &[1.0], 0.0, 2.0, h)[0] - exact).abs())
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((3.8..4.2).contains(&order), "order {order}");
        }
    }

    #[test]
    fn underflow_reports_stiffness() {
        let cfg = IntegratorConfig { min_step: 0.5, max_step: 1.0, rel_tol: 1e-14, abs_tol: 1e-16, ..Default::default() };
        let mut rk = AdaptiveRk4::new(cfg).unwrap();
        let (mut t, mut y) = (0.0, vec![1.0]);
        let err = rk.advance(&Decay(50.0), &mut t, &mut y, 5.0, false).unwrap_err();
        assert!(matches!(err, Error::Stiffness { .. }));
    }

    #[test]
    fn negative_state_is_integrity_error() {
        struct Drain;
        impl OdeSystem<f64> for Drain {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _t: f64, _y: &[f64], dy: &mut [f64]) {
                dy[0] = -1.0;
            }
        }
        let mut rk = AdaptiveRk4::new(IntegratorConfig::default()).unwrap();
        let (mut t, mut y) = (0.0, vec![0.5]);
        let err = rk.advance(&Drain, &mut t, &mut y, 2.0, true).unwrap_err();
        assert!(matches!(err, Error::Integrity { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig { rel_tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(IntegratorConfig { min_step: 2.0, max_step: 1.0, ..Default::default() }.validate().is_err());
        assert!(IntegratorConfig::default().validate().is_ok());
    }
}
