//! Analytic TCP Reno steady-state throughput.
//!
//! Used as the feasible service rate of a link: the smaller of the
//! receiver-window limit and the loss/timeout-limited rate for a given
//! packet loss probability.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TcpError {
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("packet loss probability must lie in [0, 1], got {0}")]
    LossProbabilityOutOfRange(f64),
}

/// Link parameters of the throughput model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TcpParams {
    w_max: f64,
    rtt: f64,
    t0: f64,
    b: u32,
    p: f64,
}

impl TcpParams {
    /// `w_max` maximum receiver window (packets), `rtt` round-trip time
    /// (seconds), `t0` timeout period (seconds), `b` packets acknowledged
    /// per ACK, `p` packet loss probability. `p = 0` is accepted and means
    /// a loss-free link.
    pub fn new(w_max: f64, rtt: f64, t0: f64, b: u32, p: f64) -> Result<Self, TcpError> {
        if !w_max.is_finite() || w_max <= 0.0 {
            return Err(TcpError::NonPositive("w_max"));
        }
        if !rtt.is_finite() || rtt <= 0.0 {
            return Err(TcpError::NonPositive("rtt"));
        }
        if !t0.is_finite() || t0 <= 0.0 {
            return Err(TcpError::NonPositive("t0"));
        }
        if b == 0 {
            return Err(TcpError::NonPositive("b"));
        }
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(TcpError::LossProbabilityOutOfRange(p));
        }
        Ok(Self {
            w_max,
            rtt,
            t0,
            b,
            p,
        })
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn rtt(&self) -> f64 {
        self.rtt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Steady-state throughput in packets/second.
///
/// On a loss-free link the rate saturates the receiver window at
/// `w_max / rtt`; otherwise it is the minimum of that limit and the
/// loss/timeout term, which shrinks as `p` grows.
pub fn feasible_rate(params: &TcpParams) -> f64 {
    let window_limit = params.w_max / params.rtt;
    if params.p == 0.0 {
        return window_limit;
    }
    let p = params.p;
    let b = f64::from(params.b);
    let retransmit = params.rtt * (2.0 * b * p / 3.0).sqrt();
    let timeout =
        params.t0 * (3.0 * (3.0 * b * p / 8.0).sqrt()).min(1.0) * p * (1.0 + 32.0 * p * p);
    window_limit.min((retransmit + timeout).recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loss_free_link_is_window_limited() {
        let params = TcpParams::new(6.0, 0.1, 1.0, 2, 0.0).unwrap();
        assert_eq!(feasible_rate(&params), 60.0);
        // Vanishing loss converges to the same limit.
        let params = TcpParams::new(6.0, 0.1, 1.0, 2, 1e-12).unwrap();
        assert_eq!(feasible_rate(&params), 60.0);
    }

    #[test]
    fn matches_golden_loss_term() {
        // Independently evaluated at 50-digit precision.
        let params = TcpParams::new(1e9, 0.1, 1.0, 1, 0.01).unwrap();
        let expected = 99.92044442381531;
        let got = feasible_rate(&params);
        assert!(
            ((got - expected) / expected).abs() < 1e-9,
            "got {got}, expected {expected}"
        );
    }

    #[test]
    fn total_loss_is_dominated_by_timeouts() {
        let params = TcpParams::new(6.0, 0.1, 1.0, 1, 1.0).unwrap();
        let got = feasible_rate(&params);
        // Direct evaluation of the loss term at p = 1: the timeout factor
        // saturates at min(1, 3*sqrt(3/8)) = 1.
        let expected = 1.0 / (0.1 * (2.0f64 / 3.0).sqrt() + 1.0 * 1.0 * 1.0 * 33.0);
        assert!((got - expected).abs() < 1e-15);
        assert!(got < 60.0 / 100.0);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(TcpParams::new(0.0, 0.1, 1.0, 1, 0.5).is_err());
        assert!(TcpParams::new(6.0, 0.0, 1.0, 1, 0.5).is_err());
        assert!(TcpParams::new(6.0, 0.1, 0.0, 1, 0.5).is_err());
        assert!(TcpParams::new(6.0, 0.1, 1.0, 0, 0.5).is_err());
        assert_eq!(
            TcpParams::new(6.0, 0.1, 1.0, 1, 1.5),
            Err(TcpError::LossProbabilityOutOfRange(1.5))
        );
        assert!(TcpParams::new(6.0, 0.1, 1.0, 1, -0.1).is_err());
    }

    #[test]
    fn non_increasing_in_loss_probability() {
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let p = 1e-6 + (1.0 - 1e-6) * i as f64 / 1000.0;
            let rate = feasible_rate(&TcpParams::new(100.0, 0.05, 0.5, 2, p).unwrap());
            assert!(rate <= prev + 1e-12, "rate increased at p={p}");
            prev = rate;
        }
    }

    proptest! {
        #[test]
        fn bounded_by_window_limit(
            w_max in 1e-3..1e6f64,
            rtt in 1e-3..10.0f64,
            t0 in 1e-3..10.0f64,
            b in 1u32..8,
            p in 0.0..=1.0f64,
        ) {
            let params = TcpParams::new(w_max, rtt, t0, b, p).unwrap();
            prop_assert!(feasible_rate(&params) <= w_max / rtt);
        }

        #[test]
        fn monotone_in_window_and_rtt(
            w_max in 1e-3..1e6f64,
            rtt in 1e-3..10.0f64,
            t0 in 1e-3..10.0f64,
            b in 1u32..8,
            p in 0.0..=1.0f64,
            bump in 1e-3..10.0f64,
        ) {
            let base = feasible_rate(&TcpParams::new(w_max, rtt, t0, b, p).unwrap());
            let wider = feasible_rate(&TcpParams::new(w_max + bump, rtt, t0, b, p).unwrap());
            let slower = feasible_rate(&TcpParams::new(w_max, rtt + bump, t0, b, p).unwrap());
            prop_assert!(wider >= base);
            prop_assert!(slower <= base);
        }
    }
}
