//! Dormand-Prince 5(4) with FSAL and PI step-size control.

use super::OracleError;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
pub(crate) const OVERFLOW_LIMIT: f64 = 1e300;

pub(crate) type Rhs<const N: usize> = dyn Fn(f64, &[f64; N]) -> [f64; N] + Send + Sync;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

pub(crate) struct Stepper<'a, const N: usize> {
    rhs: &'a Rhs<N>,
    pub t: f64,
    pub y: [f64; N],
    k1: [f64; N],
    h: f64,
    err_prev: f64,
    rtol: f64,
    atol: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl<'a, const N: usize> Stepper<'a, N> {
    pub fn new(rhs: &'a Rhs<N>, t: f64, y: [f64; N], h0: f64, rtol: f64, atol: f64) -> Self {
        let k1 = rhs(t, &y);
        Self {
            rhs,
            t,
            y,
            k1,
            h: h0,
            err_prev: 1e-4,
            rtol,
            atol,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Integrates until `t == target` exactly.
    pub fn advance_to(&mut self, target: f64) -> Result<(), OracleError> {
        while self.t < target {
            let remaining = target - self.t;
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            if h <= 1e-14 * self.t.abs().max(1.0) && !clipped {
                return Err(OracleError::StepUnderflow { t: self.t });
            }

            let (y_new, k7, err) = self.attempt(h);
            if err <= 1.0 {
                if y_new
                    .iter()
                    .any(|v| !v.is_finite() || v.abs() > OVERFLOW_LIMIT)
                {
                    return Err(OracleError::Overflow { t: self.t + h });
                }
                self.t = if clipped { target } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                self.accepted += 1;
                let err = err.max(1e-10);
                let factor = (SAFETY * err.powf(-ALPHA) * self.err_prev.powf(BETA))
                    .clamp(MIN_FACTOR, MAX_FACTOR);
                self.err_prev = err.max(1e-4);
                let proposed = h * factor;
                self.h = if clipped {
                    self.h.max(proposed)
                } else {
                    proposed
                };
            } else {
                self.rejected += 1;
                let factor = (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
                self.h = h * factor;
            }
        }
        Ok(())
    }

    fn attempt(&self, h: f64) -> ([f64; N], [f64; N], f64) {
        let f = self.rhs;
        let (t, y, k1) = (self.t, &self.y, &self.k1);
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                y,
                h,
                &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            y,
            h,
            &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + h, &y_new);

        let mut sum = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            sum += (e / scale).powi(2);
        }
        (y_new, k7, (sum / N as f64).sqrt())
    }
}
