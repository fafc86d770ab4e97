//! Scalar q-calculus primitives.
//!
//! Everything is built on the q-bracket [t]_q = (1 - q^t)/(1 - q) for a
//! fixed deformation 0 <= q < 1: bracket products (the q-Pochhammer
//! k-symbol), finite and infinite shifted products (x+y)_{b}^n, real-exponent
//! shifted powers, the E-type q-exponential, the q-derivative and the
//! Jackson q-integral. Infinite sums and products truncate under a shared
//! [`SeriesControl`] policy; truncation failure is reported, never silent.

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Largest deformation parameter the series evaluators accept. Beyond this
/// the truncation caps dominate the budget and operations report
/// non-convergence instead of silently losing accuracy.
pub const MAX_DEFORMATION: f64 = 1.0 - 1e-6;

/// Validated pair (q, k): deformation q in [0,1) and shape k > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QParams {
    q: f64,
    k: f64,
}

impl QParams {
    pub fn new(q: f64, k: f64) -> Result<Self> {
        check_q(q)?;
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::invalid(format!("k must be finite and > 0, got {k}")));
        }
        Ok(QParams { q, k })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// q^k, the base of every base-q^k product in the Gamma_{q,k} family.
    pub fn q_pow_k(&self) -> f64 {
        self.q.powf(self.k)
    }

    /// [k]_q.
    pub fn bracket_k(&self) -> f64 {
        q_bracket_unchecked(self.k, self.q)
    }
}

/// Truncation policy shared by all series and product evaluators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesControl {
    rtol: f64,
    consecutive: usize,
    max_terms: usize,
}

impl SeriesControl {
    pub const DEFAULT_RTOL: f64 = 1e-14;
    pub const DEFAULT_CONSECUTIVE: usize = 3;
    pub const DEFAULT_MAX_TERMS: usize = 100_000;

    pub fn new(rtol: f64, consecutive: usize, max_terms: usize) -> Result<Self> {
        if !rtol.is_finite() || rtol <= 0.0 {
            return Err(Error::invalid(format!("rtol must be > 0, got {rtol}")));
        }
        if consecutive < 1 {
            return Err(Error::invalid("consecutive must be >= 1"));
        }
        if max_terms < consecutive {
            return Err(Error::invalid(format!(
                "max_terms ({max_terms}) must be >= consecutive ({consecutive})"
            )));
        }
        Ok(SeriesControl {
            rtol,
            consecutive,
            max_terms,
        })
    }

    pub fn rtol(&self) -> f64 {
        self.rtol
    }

    pub fn consecutive(&self) -> usize {
        self.consecutive
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rtol: Self::DEFAULT_RTOL,
            consecutive: Self::DEFAULT_CONSECUTIVE,
            max_terms: Self::DEFAULT_MAX_TERMS,
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() || !(0.0..1.0).contains(&q) {
        return Err(Error::invalid(format!("q must lie in [0, 1), got {q}")));
    }
    Ok(())
}

/// Rejects deformations so close to 1 that the truncation caps dominate.
fn check_series_base(base: f64, ctl: &SeriesControl) -> Result<()> {
    check_q(base)?;
    if base > MAX_DEFORMATION {
        return Err(Error::no_convergence(
            ctl.max_terms,
            format!("deformation {base} exceeds the supported maximum {MAX_DEFORMATION}"),
        ));
    }
    Ok(())
}

#[inline]
fn q_bracket_unchecked(t: f64, q: f64) -> f64 {
    if q == 0.0 {
        // 0^0 = 1 makes [0]_0 = 0; positive t gives 1.
        return 1.0 - 0f64.powf(t);
    }
    (1.0 - q.powf(t)) / (1.0 - q)
}

/// The q-bracket [t]_q = (1 - q^t)/(1 - q).
pub fn q_bracket(t: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    if !t.is_finite() {
        return Err(Error::invalid(format!("t must be finite, got {t}")));
    }
    Ok(q_bracket_unchecked(t, q))
}

/// q-Pochhammer k-symbol [t]_{n,k} = prod_{j=0}^{n-1} [t + j k]_q.
pub fn q_pochhammer_k(t: f64, n: u32, params: &QParams) -> f64 {
    let mut prod = 1.0;
    for j in 0..n {
        prod *= q_bracket_unchecked(t + f64::from(j) * params.k, params.q);
    }
    prod
}

/// Classical Pochhammer k-symbol (t)_{n,k} = prod_{j=0}^{n-1} (t + j k);
/// the q -> 1 reference for [`q_pochhammer_k`].
pub fn classical_pochhammer_k(t: f64, n: u32, k: f64) -> f64 {
    let mut prod = 1.0;
    for j in 0..n {
        prod *= t + f64::from(j) * k;
    }
    prod
}

/// Number of factors in a shifted product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductOrder {
    Finite(u32),
    Infinite,
}

/// Shifted product (x + y)_{base}^n = prod_{j=0}^{n-1} (x + base^j y).
///
/// The infinite form truncates once |base^j y| < rtol |x| holds for
/// `consecutive` successive j, i.e. once every remaining factor deviates
/// from x by less than rtol relatively; it is intended for the normalized
/// x = 1 products used throughout the crate.
pub fn q_shifted_product(
    x: f64,
    y: f64,
    order: ProductOrder,
    base: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::invalid("x and y must be finite"));
    }
    match order {
        ProductOrder::Finite(n) => {
            check_q(base)?;
            let mut prod = 1.0;
            let mut p = 1.0;
            for _ in 0..n {
                prod *= x + p * y;
                p *= base;
            }
            Ok(prod)
        }
        ProductOrder::Infinite => {
            check_series_base(base, ctl)?;
            if x == 0.0 {
                return Err(Error::domain("infinite q-shifted product requires x != 0"));
            }
            let threshold = ctl.rtol * x.abs();
            let mut prod = 1.0;
            let mut p = 1.0;
            let mut small = 0;
            for _ in 0..ctl.max_terms {
                prod *= x + p * y;
                if (p * y).abs() < threshold {
                    small += 1;
                    if small >= ctl.consecutive {
                        return Ok(prod);
                    }
                } else {
                    small = 0;
                }
                p *= base;
            }
            Err(Error::no_convergence(
                ctl.max_terms,
                "infinite q-shifted product did not stabilize",
            ))
        }
    }
}

/// Real-exponent shifted power (1 + x)_{base}^e =
/// (1 + x)_{base}^infinity / (1 + base^e x)_{base}^infinity.
///
/// Evaluated as a single product of factor ratios
/// prod_j (1 + base^j x)/(1 + base^{j+e} x); each ratio is O(1), so the
/// value survives deformations close to 1 where the two infinite products
/// individually underflow.
pub fn q_shifted_power(x: f64, exponent: f64, base: f64, ctl: &SeriesControl) -> Result<f64> {
    if !x.is_finite() || !exponent.is_finite() {
        return Err(Error::invalid("x and exponent must be finite"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    check_series_base(base, ctl)?;
    if base == 0.0 {
        // Only the j = 0 ratio differs from 1.
        let den = 1.0 + 0f64.powf(exponent) * x;
        if den == 0.0 {
            return Err(Error::domain("vanishing factor in denominator product"));
        }
        return Ok((1.0 + x) / den);
    }
    let shift = base.powf(exponent);
    if !shift.is_finite() {
        return Err(Error::invalid(format!(
            "base^exponent overflows ({base}^{exponent})"
        )));
    }
    let scale = x.abs() * (1.0 + shift);
    let mut prod = 1.0;
    let mut p = 1.0;
    let mut small = 0;
    for _ in 0..ctl.max_terms {
        let num = 1.0 + p * x;
        let den = 1.0 + p * shift * x;
        if den == 0.0 {
            return Err(Error::domain("vanishing factor in denominator product"));
        }
        prod *= num / den;
        if p * scale < ctl.rtol {
            small += 1;
            if small >= ctl.consecutive {
                return Ok(prod);
            }
        } else {
            small = 0;
        }
        p *= base;
        if p == 0.0 {
            return Ok(prod);
        }
    }
    Err(Error::no_convergence(
        ctl.max_terms,
        "q-shifted power did not stabilize",
    ))
}

/// The E-type q-exponential E_base^x = sum_n base^{n(n-1)/2} x^n / [n]_base!.
///
/// The base^{n(n-1)/2} factor forces superexponential term decay for any
/// base < 1, so the series converges for every real x.
pub fn q_exponential_e(x: f64, base: f64, ctl: &SeriesControl) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid("x must be finite"));
    }
    check_series_base(base, ctl)?;
    let mut sum = 0.0f64;
    let mut comp = 0.0; // Kahan compensation
    let mut term = 1.0f64;
    let mut base_pow = 1.0; // base^n
    let mut small = 0;
    for n in 0..ctl.max_terms {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if sum != 0.0 && term.abs() <= ctl.rtol * sum.abs() {
            small += 1;
            if small >= ctl.consecutive {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        let next_bracket = q_bracket_unchecked((n + 1) as f64, base);
        term *= base_pow * x / next_bracket;
        base_pow *= base;
        if term == 0.0 {
            // Every later term is an exact zero (base or x vanished).
            return Ok(sum);
        }
    }
    Err(Error::no_convergence(
        ctl.max_terms,
        "q-exponential series did not stabilize",
    ))
}

/// q-derivative (f(qx) - f(x)) / ((q - 1) x); undefined at x = 0.
pub fn q_derivative<F: Fn(f64) -> f64>(f: F, x: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    if !x.is_finite() || x == 0.0 {
        return Err(Error::domain("q-derivative is undefined at x = 0"));
    }
    Ok((f(q * x) - f(x)) / ((q - 1.0) * x))
}

/// Jackson q-integral from a to b:
/// (1-q) b sum_n q^n f(q^n b) - (1-q) a sum_n q^n f(q^n a).
///
/// Each lattice sum truncates once `consecutive` successive terms
/// contribute less than rtol relative to the running sum.
pub fn jackson_integral<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    q: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_series_base(q, ctl)?;
    if !a.is_finite() || !b.is_finite() || a < 0.0 || a >= b {
        return Err(Error::invalid(format!(
            "jackson integral requires 0 <= a < b, got a={a}, b={b}"
        )));
    }
    let sum_b = jackson_lattice_sum(&f, b, q, ctl)?;
    let sum_a = if a == 0.0 {
        0.0
    } else {
        jackson_lattice_sum(&f, a, q, ctl)?
    };
    Ok((1.0 - q) * (b * sum_b - a * sum_a))
}

fn jackson_lattice_sum<F: Fn(f64) -> f64>(
    f: &F,
    endpoint: f64,
    q: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut qn = 1.0;
    let mut small = 0;
    for _ in 0..ctl.max_terms {
        let term = qn * f(qn * endpoint);
        if !term.is_finite() {
            return Err(Error::domain(
                "integrand is not finite on the Jackson lattice",
            ));
        }
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        // A zero running sum carries no scale information: the integrand may
        // underflow on the leading lattice points and peak much later, so
        // relative smallness only counts once the sum is nonzero.
        if sum != 0.0 && term.abs() <= ctl.rtol * sum.abs() {
            small += 1;
            if small >= ctl.consecutive {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        qn *= q;
        if qn == 0.0 {
            // Every remaining lattice point contributes exactly 0.
            return Ok(sum);
        }
    }
    Err(Error::no_convergence(
        ctl.max_terms,
        "Jackson lattice sum did not stabilize",
    ))
}

/// Relative rounding unit of the double-double accumulator, with headroom.
const DD_EPS: f64 = 1e-31;

/// Compensated evaluation of the alternating base-Q series
///
/// ```text
/// sum_n (-1)^n Q^{n(n+1)/2} u^n / ( [n]_Q! * (1 - Q^n T) )
/// ```
///
/// with the damping factor (1 - Q^n T) present only when `damp = Some(T)`.
/// This shape covers the Gamma_{q,k} series (u = 1/(1-q^k), T = q^t), the
/// k-gamma CDF series (u = x^k/[k]_q, T = q^t) and the density kernel
/// (u = x^k/[k]_q, no damping); in all of them Q = q^k.
///
/// Terms grow like u^n before the Q^{n(n+1)/2} factor wins, so the sum can
/// cancel catastrophically as Q -> 1. The accumulator tracks the total
/// term magnitude and reports non-convergence when the requested tolerance
/// is unreachable even at double-double precision, instead of returning a
/// value dominated by rounding noise.
pub(crate) fn alternating_qk_series(
    u: f64,
    big_q: f64,
    damp: Option<f64>,
    ctl: &SeriesControl,
) -> Result<f64> {
    debug_assert!(u >= 0.0 && u.is_finite());
    check_series_base(big_q, ctl)?;
    if let Some(t) = damp {
        debug_assert!((0.0..1.0).contains(&t));
    }
    let q = Dd::from_f64(big_q);
    let one_minus_q = Dd::one_minus(q);
    let u_dd = Dd::from_f64(u);
    let damp_dd = damp.map(Dd::from_f64);

    let mut sum = Dd::ZERO;
    let mut abs_sum = 0.0f64;
    let mut q_pow = Dd::ONE; // Q^n
                             // (-1)^n Q^{n(n+1)/2} u^n / [n]_Q!, advanced by its term ratio so it
                             // never overflows through separate u^n and [n]_Q! accumulators.
    let mut term_raw = Dd::ONE;
    let mut small = 0;
    let finalize = |sum: Dd, abs_sum: f64| -> Result<f64> {
        let value = sum.to_f64();
        if abs_sum * DD_EPS > ctl.rtol * value.abs() {
            return Err(Error::no_convergence(
                ctl.max_terms,
                format!(
                    "alternating series cancellation (|terms| ~ {abs_sum:.3e}, \
                     sum ~ {value:.3e}) exceeds working precision for rtol {:.1e}",
                    ctl.rtol
                ),
            ));
        }
        Ok(value)
    };
    for _ in 0..ctl.max_terms {
        let term = match damp_dd {
            Some(t) => term_raw.div(Dd::one_minus(q_pow.mul(t))),
            None => term_raw,
        };
        if !term.to_f64().is_finite() {
            return Err(Error::no_convergence(
                ctl.max_terms,
                "alternating series terms exceed the representable range",
            ));
        }
        sum = sum.add(term);
        abs_sum += term.abs();
        if term.abs() == 0.0 {
            // The n = 0 term is at least 1, so a zero term means the powers
            // vanished for good (Q = 0, u = 0, or terminal underflow).
            return finalize(sum, abs_sum);
        }
        if sum.abs() > 0.0 && term.abs() <= ctl.rtol * sum.abs() {
            small += 1;
            if small >= ctl.consecutive {
                return finalize(sum, abs_sum);
            }
        } else {
            small = 0;
        }
        // Advance n -> n+1: ratio -Q^{n+1} u / [n+1]_Q.
        q_pow = q_pow.mul(q);
        let next_bracket = Dd::one_minus(q_pow).div(one_minus_q);
        term_raw = term_raw.mul(q_pow).mul(u_dd).div(next_bracket).neg();
    }
    Err(Error::no_convergence(
        ctl.max_terms,
        "alternating q-series did not stabilize",
    ))
}
