//! The q-deformed gamma and beta special functions.
//!
//! Gamma_{q,k} is pinned down by Gamma_{q,k}(t+k) = [t]_q Gamma_{q,k}(t) and
//! Gamma_{q,k}(k) = 1. Four representations are implemented and used as
//! mutual oracles:
//!
//! * closed form      (1-q^k)_{q^k}^{t/k-1} / (1-q)^{t/k-1}   (the reference)
//! * infinite product (1-q)^{1-t/k} (1-q^k)_{q^k}^inf / (1-q^t)_{q^k}^inf
//! * series           (1-q)^{1-t/k} sum_n q^{kn(n+1)/2} / ((1-q^{kn+t}) (q^k-1)^n [n]_{q^k}!)
//! * q-integral       int_0^{[k]_q^{1/k}/(1-q^k)^{1/k}} x^{t-1} E_{q^k}^{-q^k x^k/[k]_q} d_q x
//!
//! B_{q,k}(t,s) = Gamma Gamma / Gamma likewise carries a closed form and an
//! integral representation. The alternating series runs on compensated
//! arithmetic and declines (non-convergence) when cancellation exceeds
//! working precision rather than returning noise.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::qcore::{
    alternating_qk_series, jackson_integral, q_shifted_power, q_shifted_product, ProductOrder,
    QParams, SeriesControl,
};

/// Which representation of Gamma_{q,k} to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaMethod {
    ClosedForm,
    InfiniteProduct,
    Series,
    QIntegral,
}

/// Which representation of B_{q,k} to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaMethod {
    GammaRatio,
    ClosedForm,
    QIntegral,
}

fn check_shape(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::domain(format!(
            "{name} must be finite and > 0, got {v}"
        )));
    }
    Ok(())
}

/// Upper endpoint [k]_q^{1/k} / (1-q^k)^{1/k} of the k-gamma support.
pub(crate) fn gamma_support_upper(params: &QParams) -> f64 {
    let qk = params.q_pow_k();
    (params.bracket_k() / (1.0 - qk)).powf(1.0 / params.k())
}

/// Upper endpoint [k]_q^{1/k} of the k-beta support.
pub(crate) fn beta_support_upper(params: &QParams) -> f64 {
    params.bracket_k().powf(1.0 / params.k())
}

/// E_{q^k}^{-q^k x^k / [k]_q} evaluated through the product form
/// E_Q^z = (1 + (1-Q) z)_Q^infinity. Every factor lies in (0, 1] on the
/// k-gamma support, so the value is positive and carries no cancellation.
pub(crate) fn exp_kernel_product(x: f64, params: &QParams, ctl: &SeriesControl) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0);
    }
    let qk = params.q_pow_k();
    let z = -qk * x.powf(params.k()) / params.bracket_k();
    q_shifted_product(1.0, (1.0 - qk) * z, ProductOrder::Infinite, qk, ctl)
}

/// The same kernel through its displayed alternating series
/// sum_n (-1)^n q^{kn(n+1)/2} x^{kn} / ([k]_q^n [n]_{q^k}!); cross-validates
/// [`exp_kernel_product`] and declines under hopeless cancellation.
pub(crate) fn exp_kernel_series(x: f64, params: &QParams, ctl: &SeriesControl) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0);
    }
    let u = x.powf(params.k()) / params.bracket_k();
    alternating_qk_series(u, params.q_pow_k(), None, ctl)
}

/// Jackson integration of a fallible integrand: the first integrand error
/// is captured and reported instead of the generic lattice failure.
pub(crate) fn jackson_with_kernel<F: Fn(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    q: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    let captured: RefCell<Option<Error>> = RefCell::new(None);
    let outcome = jackson_integral(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                captured.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        q,
        ctl,
    );
    match (outcome, captured.into_inner()) {
        (Err(_), Some(inner)) => Err(inner),
        (other, _) => other,
    }
}

/// Gamma_{q,k}(t) for t > 0 by the chosen representation.
pub fn gamma_qk(t: f64, params: &QParams, method: GammaMethod, ctl: &SeriesControl) -> Result<f64> {
    check_shape("t", t)?;
    let q = params.q();
    let k = params.k();
    let qk = params.q_pow_k();
    match method {
        GammaMethod::ClosedForm => {
            let e = t / k - 1.0;
            let num = q_shifted_power(-qk, e, qk, ctl)?;
            Ok(num / (1.0 - q).powf(e))
        }
        GammaMethod::InfiniteProduct => {
            let num = q_shifted_product(1.0, -qk, ProductOrder::Infinite, qk, ctl)?;
            let den = q_shifted_product(1.0, -q.powf(t), ProductOrder::Infinite, qk, ctl)?;
            if den == 0.0 || !num.is_finite() || !den.is_finite() {
                return Err(Error::domain(
                    "infinite-product representation underflowed; use the closed form",
                ));
            }
            Ok((1.0 - q).powf(1.0 - t / k) * num / den)
        }
        GammaMethod::Series => {
            let sum = alternating_qk_series(1.0 / (1.0 - qk), qk, Some(q.powf(t)), ctl)?;
            Ok((1.0 - q).powf(1.0 - t / k) * sum)
        }
        GammaMethod::QIntegral => {
            let b = gamma_support_upper(params);
            let params = *params;
            let ctl2 = *ctl;
            jackson_with_kernel(
                |x| Ok(x.powf(t - 1.0) * exp_kernel_product(x, &params, &ctl2)?),
                0.0,
                b,
                q,
                ctl,
            )
        }
    }
}

/// The plain q-gamma (k = 1 ancestor of Gamma_{q,k}), evaluated through its
/// own infinite-product representation
/// Gamma_q(t) = (1-q)^{1-t} (q; q)_inf / (q^t; q)_inf,
/// a code path independent of [`gamma_qk`] so the k = 1 reduction is a real
/// cross-check.
pub fn gamma_q(t: f64, q: f64, ctl: &SeriesControl) -> Result<f64> {
    check_shape("t", t)?;
    let num = q_shifted_product(1.0, -q, ProductOrder::Infinite, q, ctl)?;
    let den = q_shifted_product(1.0, -q.powf(t), ProductOrder::Infinite, q, ctl)?;
    if den == 0.0 || !num.is_finite() || !den.is_finite() {
        return Err(Error::domain(
            "q-gamma product representation underflowed for q this close to 1",
        ));
    }
    Ok((1.0 - q).powf(1.0 - t) * num / den)
}

/// Both sides of the base-change identity
/// Gamma_{q,k}(t) = [k]_q^{t/k - 1} Gamma_{q^k}(t/k),
/// computed independently (left via the closed form, right via [`gamma_q`]
/// at deformation q^k).
pub fn gamma_qk_lemma_check(t: f64, params: &QParams, ctl: &SeriesControl) -> Result<(f64, f64)> {
    let lhs = gamma_qk(t, params, GammaMethod::ClosedForm, ctl)?;
    let k = params.k();
    let rhs = params.bracket_k().powf(t / k - 1.0) * gamma_q(t / k, params.q_pow_k(), ctl)?;
    Ok((lhs, rhs))
}

/// Both sides of the shifted-power summation identity
/// (1-q^k)_{q^k}^{t/k - 1} = sum_n q^{kn(n+1)/2} / ((1-q^{kn+t}) (q^k-1)^n [n]_{q^k}!),
/// left via products, right via the compensated series. The exponent
/// t/k - 1 is what the Gamma series and the closed form force together:
/// equating (1-q)^{1-t/k} * sum with (1-q^k)_{q^k}^{t/k-1}/(1-q)^{t/k-1}
/// leaves exactly this relation (easily spot-checked: at t = k the sum
/// evaluates to 1, the empty shifted power, not to 1 - q^k).
pub fn pochhammer_identity_corollary(
    t: f64,
    params: &QParams,
    ctl: &SeriesControl,
) -> Result<(f64, f64)> {
    check_shape("t", t)?;
    let q = params.q();
    let qk = params.q_pow_k();
    let lhs = q_shifted_power(-qk, t / params.k() - 1.0, qk, ctl)?;
    let rhs = alternating_qk_series(1.0 / (1.0 - qk), qk, Some(q.powf(t)), ctl)?;
    Ok((lhs, rhs))
}

/// The shifted-power factor (1 - q^k x^k / [k]_q)_{q^k}^{s/k - 1} of the
/// k-beta density and integral.
pub(crate) fn beta_shifted_factor(
    x: f64,
    s: f64,
    params: &QParams,
    ctl: &SeriesControl,
) -> Result<f64> {
    let qk = params.q_pow_k();
    let arg = -qk * x.powf(params.k()) / params.bracket_k();
    q_shifted_power(arg, s / params.k() - 1.0, qk, ctl)
}

/// B_{q,k}(t, s) for t, s > 0 by the chosen representation.
pub fn beta_qk(
    t: f64,
    s: f64,
    params: &QParams,
    method: BetaMethod,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_shape("t", t)?;
    check_shape("s", s)?;
    let q = params.q();
    let k = params.k();
    match method {
        BetaMethod::GammaRatio => {
            let gt = gamma_qk(t, params, GammaMethod::ClosedForm, ctl)?;
            let gs = gamma_qk(s, params, GammaMethod::ClosedForm, ctl)?;
            let gts = gamma_qk(t + s, params, GammaMethod::ClosedForm, ctl)?;
            Ok(gt * gs / gts)
        }
        BetaMethod::ClosedForm => {
            let qk = params.q_pow_k();
            let num = q_shifted_power(-qk, s / k - 1.0, qk, ctl)?;
            let den = q_shifted_power(-q.powf(t), s / k, qk, ctl)?;
            Ok((1.0 - q) * num / den)
        }
        BetaMethod::QIntegral => {
            let upper = beta_support_upper(params);
            let params2 = *params;
            let ctl2 = *ctl;
            let integral = jackson_with_kernel(
                |x| Ok(x.powf(t - 1.0) * beta_shifted_factor(x, s, &params2, &ctl2)?),
                0.0,
                upper,
                q,
                ctl,
            )?;
            Ok(params.bracket_k().powf(-t / k) * integral)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::q_bracket;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    fn params(q: f64, k: f64) -> QParams {
        QParams::new(q, k).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        let scale = a.abs().max(b.abs()).max(1e-300);
        assert!(
            (a - b).abs() / scale <= tol,
            "{a} vs {b} (rel {})",
            (a - b).abs() / scale
        );
    }

    #[test]
    fn gamma_normalization_and_q0() {
        for &k in &[0.5, 1.0, 2.0, 3.7, 5.0] {
            for &q in &[0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
                let v = gamma_qk(k, &params(q, k), GammaMethod::ClosedForm, &ctl()).unwrap();
                assert_close(v, 1.0, 1e-13);
            }
            for &t in &[0.1, 0.5, 1.0, 2.3, 7.0] {
                let v = gamma_qk(t, &params(0.0, k), GammaMethod::ClosedForm, &ctl()).unwrap();
                assert_eq!(v, 1.0);
            }
        }
    }

    #[test]
    fn gamma_functional_equation_full_q_grid() {
        for &q in &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99] {
            for &k in &[0.5, 1.0, 2.0, 3.7, 5.0] {
                for &t in &[0.1, 0.5, 1.0, 2.3, 7.0] {
                    let p = params(q, k);
                    let lhs = gamma_qk(t + k, &p, GammaMethod::ClosedForm, &ctl()).unwrap();
                    let rhs = q_bracket(t, q).unwrap()
                        * gamma_qk(t, &p, GammaMethod::ClosedForm, &ctl()).unwrap();
                    assert_close(lhs, rhs, 1e-11);
                }
            }
        }
    }

    #[test]
    fn gamma_at_multiples_of_k() {
        // Gamma(2k) = [k]_q.
        let p = params(0.5, 2.0);
        let v = gamma_qk(4.0, &p, GammaMethod::ClosedForm, &ctl()).unwrap();
        assert_close(v, p.bracket_k(), 1e-13);
        // Gamma(nk) = prod_{j=1}^{n-1} [jk]_q: n=4, k=2, q=0.5 gives
        // [2][4][6] = 2835/512.
        let v = gamma_qk(8.0, &p, GammaMethod::ClosedForm, &ctl()).unwrap();
        assert_close(v, 5.537109375, 1e-13);
    }

    #[test]
    fn gamma_method_agreement_moderate() {
        for &q in &[0.0, 0.2, 0.5, 0.8] {
            for &k in &[0.5, 1.0, 2.0, 3.7] {
                for &t in &[0.1, 0.5, 1.0, 2.3, 7.0] {
                    let p = params(q, k);
                    let closed = gamma_qk(t, &p, GammaMethod::ClosedForm, &ctl()).unwrap();
                    let product = gamma_qk(t, &p, GammaMethod::InfiniteProduct, &ctl()).unwrap();
                    let series = gamma_qk(t, &p, GammaMethod::Series, &ctl()).unwrap();
                    let integral = gamma_qk(t, &p, GammaMethod::QIntegral, &ctl()).unwrap();
                    assert_close(closed, product, 1e-10);
                    assert_close(closed, series, 1e-10);
                    assert_close(closed, integral, 1e-7);
                }
            }
        }
    }

    #[test]
    fn gamma_series_declines_when_hopeless() {
        // q^k ~ 0.99: term growth ~ 100^n swamps double-double precision.
        let p = params(0.99, 1.0);
        let r = gamma_qk(0.1, &p, GammaMethod::Series, &ctl());
        assert!(matches!(r, Err(Error::NonConvergence { .. })), "{r:?}");
    }

    #[test]
    fn gamma_q_examples() {
        assert_close(gamma_q(1.0, 0.37, &ctl()).unwrap(), 1.0, 1e-13);
        // Gamma_q(3) = [1]_q [2]_q = 1.5 at q = 0.5.
        assert_close(gamma_q(3.0, 0.5, &ctl()).unwrap(), 1.5, 1e-13);
        for &t in &[0.2, 1.0, 4.7] {
            assert_eq!(gamma_q(t, 0.0, &ctl()).unwrap(), 1.0);
        }
        assert!(gamma_q(0.0, 0.5, &ctl()).is_err());
        assert!(gamma_q(-1.0, 0.5, &ctl()).is_err());
    }

    #[test]
    fn k1_reduction() {
        for &q in &[0.0, 0.1, 0.5, 0.9, 0.99] {
            for &t in &[0.1, 0.5, 1.0, 2.3, 7.0] {
                let via_k = gamma_qk(t, &params(q, 1.0), GammaMethod::ClosedForm, &ctl()).unwrap();
                let direct = gamma_q(t, q, &ctl()).unwrap();
                assert_close(via_k, direct, 1e-12);
            }
        }
        // The k = 1 support endpoint matches the q-gamma integration limit.
        let p = params(0.4, 1.0);
        assert_close(gamma_support_upper(&p), 1.0 / (1.0 - 0.4), 1e-15);
    }

    #[test]
    fn lemma_check_examples() {
        // t = k: both sides 1.
        let (l, r) = gamma_qk_lemma_check(2.0, &params(0.5, 2.0), &ctl()).unwrap();
        assert_close(l, 1.0, 1e-13);
        assert_close(r, 1.0, 1e-13);
        // t = 2k: both sides [k]_q.
        let (l, r) = gamma_qk_lemma_check(4.0, &params(0.5, 2.0), &ctl()).unwrap();
        assert_close(l, 1.5, 1e-12);
        assert_close(r, 1.5, 1e-12);
        // Non-integer everything.
        let (l, r) = gamma_qk_lemma_check(1.7, &params(0.3, 3.0), &ctl()).unwrap();
        assert_close(l, r, 1e-10);
    }

    #[test]
    fn corollary_examples() {
        let (l, r) = pochhammer_identity_corollary(1.3, &params(0.0, 2.0), &ctl()).unwrap();
        assert_eq!((l, r), (1.0, 1.0));
        let p = params(0.6, 2.0);
        // t = k: the shifted power is empty and the sum telescopes to 1.
        let (l, r) = pochhammer_identity_corollary(2.0, &p, &ctl()).unwrap();
        assert_eq!(l, 1.0);
        assert_close(l, r, 1e-10);
        // t = 2k: single factor 1 - q^k.
        let (l, r) = pochhammer_identity_corollary(4.0, &p, &ctl()).unwrap();
        assert_close(l, 1.0 - 0.36, 1e-12);
        assert_close(l, r, 1e-10);
        let (l, r) = pochhammer_identity_corollary(2.5, &p, &ctl()).unwrap();
        assert_close(l, r, 1e-10);
    }

    #[test]
    fn beta_examples() {
        // B_{0,k} = 1 exactly.
        for &k in &[1.0, 3.0] {
            for &(t, s) in &[(0.5, 0.5), (1.0, 2.0), (2.3, 0.7)] {
                for method in [
                    BetaMethod::GammaRatio,
                    BetaMethod::ClosedForm,
                    BetaMethod::QIntegral,
                ] {
                    let v = beta_qk(t, s, &params(0.0, k), method, &ctl()).unwrap();
                    assert_close(v, 1.0, 1e-13);
                }
            }
        }
        // B(k, k) = 1/[k]_q.
        for &q in &[0.2, 0.5, 0.8] {
            for &k in &[0.5, 1.0, 2.0] {
                let p = params(q, k);
                let v = beta_qk(k, k, &p, BetaMethod::GammaRatio, &ctl()).unwrap();
                assert_close(v, 1.0 / p.bracket_k(), 1e-12);
            }
        }
    }

    #[test]
    fn beta_method_agreement_and_symmetry() {
        for &q in &[0.2, 0.5, 0.8] {
            for &k in &[1.0, 2.0, 3.0] {
                for &(t, s) in &[(0.5, 0.5), (1.0, 2.3), (2.0, 0.7)] {
                    let p = params(q, k);
                    let ratio = beta_qk(t, s, &p, BetaMethod::GammaRatio, &ctl()).unwrap();
                    let closed = beta_qk(t, s, &p, BetaMethod::ClosedForm, &ctl()).unwrap();
                    let integral = beta_qk(t, s, &p, BetaMethod::QIntegral, &ctl()).unwrap();
                    assert_close(ratio, closed, 1e-10);
                    assert_close(ratio, integral, 1e-8);
                    let swapped = beta_qk(s, t, &p, BetaMethod::GammaRatio, &ctl()).unwrap();
                    assert_close(ratio, swapped, 1e-11);
                }
            }
        }
    }

    #[test]
    fn kernel_product_vs_series() {
        for &q in &[0.0, 0.3, 0.6, 0.9] {
            for &k in &[1.0, 3.0] {
                let p = params(q, k);
                let b = gamma_support_upper(&p);
                for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let x = frac * b;
                    let prod = exp_kernel_product(x, &p, &ctl()).unwrap();
                    let series = exp_kernel_series(x, &p, &ctl()).unwrap();
                    assert_close(prod, series, 1e-12);
                    assert!(prod > 0.0);
                }
            }
        }
    }

    #[test]
    fn degenerate_q0_integral_path() {
        // At q = 0 the support endpoint collapses to 1 and the d_0 rule
        // turns the integral into b*f(b) = 1, consistent with Gamma = 1.
        let p = params(0.0, 3.0);
        assert_eq!(gamma_support_upper(&p), 1.0);
        let v = gamma_qk(2.3, &p, GammaMethod::QIntegral, &ctl()).unwrap();
        assert_close(v, 1.0, 1e-14);
        let v = beta_qk(0.5, 0.5, &params(0.0, 3.0), BetaMethod::QIntegral, &ctl()).unwrap();
        assert_close(v, 1.0, 1e-14);
    }

    #[test]
    fn domain_rejection() {
        let p = params(0.5, 2.0);
        assert!(gamma_qk(0.0, &p, GammaMethod::ClosedForm, &ctl()).is_err());
        assert!(gamma_qk(-1.0, &p, GammaMethod::Series, &ctl()).is_err());
        assert!(beta_qk(0.0, 1.0, &p, BetaMethod::ClosedForm, &ctl()).is_err());
        assert!(beta_qk(1.0, -0.5, &p, BetaMethod::GammaRatio, &ctl()).is_err());
    }
}
