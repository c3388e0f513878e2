//! Special functions in log space.
//!
//! Every Ginibre eigenvalue is a regularized incomplete gamma value
//! `P(n + 1, R²)` with `n` possibly in the thousands, so everything here
//! can hand back natural logarithms instead of linear values. The split
//! between the power series (for `x < a + 1`) and the Lentz continued
//! fraction (otherwise) keeps the *smaller* of `P` and `Q` accurate to a
//! few ulps relative; the larger one is recovered through `ln_1p`/`expm1`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

const MAX_ITER: usize = 100_000;
const FPMIN: f64 = 1e-300;

/// Number of factorials summed exactly before switching to Stirling.
const EXACT_FACTORIALS: usize = 256;

/// A nonzero (or zero) number stored as `ln|x|` plus a phase angle.
///
/// Magnitudes far outside `[e^-700, e^700]` stay representable; a zero is
/// `ln_magnitude == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_magnitude: f64,
    /// Phase in radians. Real negatives carry `PI`.
    pub phase: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln_magnitude: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: LogValue = LogValue {
        ln_magnitude: 0.0,
        phase: 0.0,
    };

    pub fn new(ln_magnitude: f64, phase: f64) -> Self {
        LogValue {
            ln_magnitude,
            phase,
        }
    }

    pub fn from_real(x: f64) -> Self {
        LogValue {
            ln_magnitude: x.abs().ln(),
            phase: if x < 0.0 { PI } else { 0.0 },
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return LogValue::ZERO;
        }
        LogValue {
            ln_magnitude: z.norm().ln(),
            phase: z.arg(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_magnitude == f64::NEG_INFINITY
    }

    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.ln_magnitude.exp(), self.phase)
    }

    /// Real part of the linear value.
    pub fn to_real(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.ln_magnitude.exp() * self.phase.cos()
    }

    pub fn conj(self) -> Self {
        LogValue {
            ln_magnitude: self.ln_magnitude,
            phase: -self.phase,
        }
    }

    pub fn powi(self, n: u32) -> Self {
        if n == 0 {
            return LogValue::ONE;
        }
        LogValue {
            ln_magnitude: self.ln_magnitude * n as f64,
            phase: self.phase * n as f64,
        }
    }

    pub fn sqrt(self) -> Self {
        LogValue {
            ln_magnitude: 0.5 * self.ln_magnitude,
            phase: 0.5 * self.phase,
        }
    }
}

impl std::ops::Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        LogValue {
            ln_magnitude: self.ln_magnitude + rhs.ln_magnitude,
            phase: self.phase + rhs.phase,
        }
    }
}

impl std::ops::Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        LogValue {
            ln_magnitude: self.ln_magnitude - rhs.ln_magnitude,
            phase: self.phase - rhs.phase,
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`; `-inf` when they are equal.
pub fn ln_sub_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b || a.is_nan());
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp_m1()).ln()
}

fn factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(EXACT_FACTORIALS + 1);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..=EXACT_FACTORIALS {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// Stirling series for `ln Γ(x)`, accurate to ~1e-15 relative for `x >= 15`.
fn ln_gamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// `ln(n!)`.
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) <= EXACT_FACTORIALS {
        factorial_table()[n as usize]
    } else {
        ln_gamma_stirling(n as f64 + 1.0)
    }
}

/// `ln Γ(a)` for real `a > 0`.
pub fn ln_gamma(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("ln_gamma requires a finite a > 0, got {a}"));
    }
    if a.fract() == 0.0 && a <= (EXACT_FACTORIALS + 1) as f64 {
        return Ok(log_factorial(a as u64 - 1));
    }
    // Shift up with the recurrence until Stirling is accurate.
    let mut x = a;
    let mut shift = 0.0;
    while x < 15.0 {
        shift += x.ln();
        x += 1.0;
    }
    Ok(ln_gamma_stirling(x) - shift)
}

/// Natural logs of the regularized incomplete gamma pair `P(a, x)` and
/// `Q(a, x) = 1 - P(a, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncompleteGamma {
    pub ln_lower: f64,
    pub ln_upper: f64,
}

impl IncompleteGamma {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("incomplete gamma requires finite a > 0, got {a}"));
    }
    if !(x >= 0.0) {
        return domain(format!("incomplete gamma requires x >= 0, got {x}"));
    }
    Ok(())
}

/// Both regularized incomplete gamma functions, in log space.
pub fn incomplete_gamma(a: f64, x: f64) -> Result<IncompleteGamma> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(IncompleteGamma {
            ln_lower: f64::NEG_INFINITY,
            ln_upper: 0.0,
        });
    }
    if x == f64::INFINITY {
        return Ok(IncompleteGamma {
            ln_lower: 0.0,
            ln_upper: f64::NEG_INFINITY,
        });
    }
    let ln_prefactor = a * x.ln() - x - ln_gamma(a)?;
    if x < a + 1.0 {
        let ln_lower = ln_prefactor + lower_series(a, x)?.ln();
        Ok(IncompleteGamma {
            ln_lower,
            ln_upper: (-ln_lower.exp()).ln_1p(),
        })
    } else {
        let ln_upper = ln_prefactor + upper_continued_fraction(a, x)?.ln();
        Ok(IncompleteGamma {
            ln_lower: (-ln_upper.exp_m1()).ln(),
            ln_upper,
        })
    }
}

/// `Σ x^n / (a (a+1) ... (a+n))`, so that `P = e^{-x} x^a / Γ(a) * sum`.
fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON * 0.5 {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma series",
        iterations: MAX_ITER,
    })
}

/// Modified Lentz evaluation of the continued fraction for `Q`.
fn upper_continued_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON * 0.5 {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma continued fraction",
        iterations: MAX_ITER,
    })
}

/// `P(a, x) = γ(a, x) / Γ(a)`.
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(incomplete_gamma(a, x)?.lower())
}

/// `Q(a, x) = Γ(a, x) / Γ(a)`.
pub fn regularized_upper_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(incomplete_gamma(a, x)?.upper())
}

/// `Σ ln(1 - t_i)`; every term must lie in `[0, 1)`.
pub fn log_product_one_minus<I>(terms: I) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    let mut acc = 0.0;
    for t in terms {
        if !(0.0..1.0).contains(&t) {
            return domain(format!("log_product_one_minus term {t} outside [0, 1)"));
        }
        acc += (-t).ln_1p();
    }
    Ok(acc)
}
