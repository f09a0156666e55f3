//! Dormand–Prince 5(4) pair for autonomous systems, with per-step error control.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { rtol: 1e-9, atol: 1e-9, max_step: f64::INFINITY, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Reached `t_end`.
    Finished,
    /// The step callback asked to stop.
    Stopped,
    /// The right-hand side produced a non-finite value.
    NonFinite,
    /// Step budget exhausted.
    StepLimit,
    /// Step size underflow.
    StepFailure,
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
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `y' = f(y)` from `t0` towards `t_end`, calling `on_step(t, y)`
/// after every accepted step.
pub fn integrate<F, S>(f: F, y0: &[f64], t0: f64, t_end: f64, ctl: &StepControl, mut on_step: S) -> Outcome
where
    F: Fn(&[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> Control,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    f(&y, &mut k[0]);
    if !finite(&k[0]) {
        return Outcome::NonFinite;
    }
    let scale = |y: &[f64]| y.iter().map(|v| ctl.atol + ctl.rtol * v.abs()).collect::<Vec<_>>();
    let rms = |v: &[f64], s: &[f64]| (v.iter().zip(s).map(|(a, b)| (a / b).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d0 = rms(&y, &scale(&y));
    let d1 = rms(&k[0], &scale(&y));
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { (0.01 * d0 / d1).max(1e-8) };
    h = h.min(ctl.max_step).min(t_end - t);
    let mut steps = 0;
    while t < t_end {
        if steps >= ctl.max_steps {
            return Outcome::StepLimit;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Outcome::StepFailure;
        }
        let last = h >= t_end - t;
        if last {
            h = t_end - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h * A[s][j] * k[j][i];
                }
                tmp[i] = acc;
            }
            f(&tmp, &mut k[s]);
            if !finite(&k[s]) {
                return Outcome::NonFinite;
            }
        }
        let mut err = 0.0;
        for i in 0..n {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += h * B[s] * k[s][i];
                lo += h * B_LOW[s] * k[s][i];
            }
            y_new[i] = hi;
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(hi.abs());
            err += ((hi - lo) / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        steps += 1;
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            // First-same-as-last: stage 7 is f at the new point.
            k.swap(0, 6);
            if on_step(t, &y) == Control::Stop {
                return Outcome::Stopped;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(ctl.max_step);
    }
    Outcome::Finished
}
