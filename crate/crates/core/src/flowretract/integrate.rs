//! Adaptive Dormand-Prince 5(4) integration of autonomous systems with a
//! single terminal event.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeControls {
    /// Local error tolerance, used as both absolute and relative tolerance.
    pub tol: f64,
    /// Width of the time bracket to which an event is refined.
    pub event_tol: f64,
    pub max_steps: usize,
    /// Integration stops without an event at this time.
    pub t_max: f64,
    pub h0: f64,
}

impl Default for OdeControls {
    fn default() -> Self {
        OdeControls { tol: 1e-10, event_tol: 1e-12, max_steps: 100_000, t_max: 1e3, h0: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeRun {
    /// Accepted states, starting with the initial one.
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    /// Whether the run ended on the event rather than at `t_max`.
    pub event: bool,
    pub steps: usize,
}

impl OdeRun {
    pub fn last(&self) -> (f64, &[f64]) {
        (*self.ts.last().unwrap(), self.ys.last().unwrap())
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One Dormand-Prince step; returns the fifth-order state and the scaled
/// error estimate.
fn step<F>(rhs: &F, y: &[f64], h: f64, tol: f64) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let mut ys = y.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..n {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k.push(rhs(&ys)?);
    }
    let mut y5 = y.to_vec();
    let mut err: f64 = 0.0;
    for i in 0..n {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = tol * (1.0 + y[i].abs().max(y5[i].abs()));
        err = err.max((h * (d5 - d4)).abs() / scale);
    }
    Ok((y5, err))
}

/// Integrates `y' = rhs(y)` from `y0` until `event(y)` first becomes
/// `<= 0` or `t_max` is reached. The event time is refined by bisection of
/// the last step; the returned final state is on the `<= 0` side.
pub fn integrate<F, G>(rhs: F, y0: &[f64], controls: &OdeControls, event: G) -> Result<OdeRun>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    G: Fn(&[f64]) -> f64,
{
    let mut run = OdeRun { ts: vec![0.0], ys: vec![y0.to_vec()], event: false, steps: 0 };
    if event(y0) <= 0.0 {
        run.event = true;
        return Ok(run);
    }
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut h = controls.h0.min(controls.t_max);
    while run.steps < controls.max_steps {
        run.steps += 1;
        let h_try = h.min(controls.t_max - t);
        // A stage that fails (typically by leaving the domain) rejects the
        // step; the error surfaces only once the step size underflows.
        let (y_new, err) = match step(&rhs, &y, h_try, controls.tol) {
            Ok(v) => v,
            Err(e) => {
                h = h_try * 0.25;
                if h < 1e-15 {
                    return Err(e);
                }
                continue;
            }
        };
        if !(err <= 1.0) {
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h = h_try * factor;
            if h < 1e-15 {
                return Err(Error::Flow(format!("step size underflow at t = {t}")));
            }
            continue;
        }
        if event(&y_new) <= 0.0 {
            let (mut lo, mut hi) = (0.0, h_try);
            let mut y_hi = y_new;
            while hi - lo > controls.event_tol {
                let mid = 0.5 * (lo + hi);
                let (y_mid, _) = step(&rhs, &y, mid, controls.tol)?;
                if event(&y_mid) <= 0.0 {
                    hi = mid;
                    y_hi = y_mid;
                } else {
                    lo = mid;
                }
            }
            run.ts.push(t + hi);
            run.ys.push(y_hi);
            run.event = true;
            return Ok(run);
        }
        t += h_try;
        y = y_new;
        run.ts.push(t);
        run.ys.push(y.clone());
        if t >= controls.t_max {
            return Ok(run);
        }
        let factor = if err > 0.0 { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h = h_try * factor;
    }
    Err(Error::Flow(format!("step budget of {} exhausted at t = {t}", controls.max_steps)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_accurate() {
        let ctl = OdeControls { t_max: 2.0, ..Default::default() };
        let run = integrate(|y| Ok(vec![-y[0]]), &[1.0], &ctl, |_| 1.0).unwrap();
        let (t, y) = run.last();
        assert_eq!(t, 2.0);
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn event_time_is_refined() {
        // x' = -1 from 0.7 hits zero at t = 0.7.
        let run = integrate(|_| Ok(vec![-1.0]), &[0.7], &OdeControls::default(), |y| y[0]).unwrap();
        assert!(run.event);
        let (t, y) = run.last();
        assert!((t - 0.7).abs() < 2e-12, "{t}");
        assert!(y[0] <= 0.0 && y[0] > -2e-12);
    }

    #[test]
    fn step_budget_is_enforced() {
        let ctl = OdeControls { max_steps: 5, t_max: 1e9, h0: 1e-6, ..Default::default() };
        assert!(matches!(integrate(|_| Ok(vec![1.0]), &[0.0], &ctl, |_| 1.0), Err(Error::Flow(_))));
    }

    #[test]
    fn rhs_errors_propagate() {
        let r = integrate(|_| Err(Error::Flow("left the chart".into())), &[1.0], &OdeControls::default(), |y| y[0]);
        assert!(r.is_err());
    }
}
