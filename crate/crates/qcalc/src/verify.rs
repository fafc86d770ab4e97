//! Identity-verification suites with machine-readable reports.
//!
//! Each suite turns one family of identities into concrete numeric cases
//! (lhs, rhs, relative error, tolerance). The anchor string on every case
//! names the identity being checked, so a report is self-describing.

use serde::Serialize;

use crate::error::Result;
use crate::qcore::{
    classical_pochhammer_k, jackson_integral, q_bracket, q_derivative, q_exponential_e,
    q_pochhammer_k, q_shifted_power, q_shifted_product, ProductOrder, QParams, SeriesControl,
};
use crate::qdist::{CdfMethod, KBetaDist, KGammaDist};
use crate::qpoly::QPolynomial;
use crate::qspecial::{
    beta_qk, gamma_q, gamma_qk, gamma_qk_lemma_check, pochhammer_identity_corollary, BetaMethod,
    GammaMethod,
};
use crate::qtrees::{
    compose, decompose, enumerate, weighted_cardinality, GraftingSequence, TreeShapeParams,
    DEFAULT_ENUMERATION_BUDGET,
};

/// Deformation grid shared by the gamma/beta/moment suites.
pub const GRID_Q: [f64; 5] = [0.0, 0.1, 0.5, 0.9, 0.99];
/// Shape grid shared by the gamma/beta/moment suites.
pub const GRID_K: [f64; 5] = [0.5, 1.0, 2.0, 3.7, 5.0];
/// Argument grid shared by the gamma/beta/moment suites.
pub const GRID_T: [f64; 5] = [0.1, 0.5, 1.0, 2.3, 7.0];

/// A verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    QCore,
    Trees,
    Gamma,
    Beta,
    Moments,
}

impl Suite {
    pub fn from_name(name: &str) -> Option<Suite> {
        match name {
            "all" => Some(Suite::All),
            "qcore" => Some(Suite::QCore),
            "trees" => Some(Suite::Trees),
            "gamma" => Some(Suite::Gamma),
            "beta" => Some(Suite::Beta),
            "moments" => Some(Suite::Moments),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::QCore => "qcore",
            Suite::Trees => "trees",
            Suite::Gamma => "gamma",
            Suite::Beta => "beta",
            Suite::Moments => "moments",
        }
    }
}

/// One verified identity instance.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyCase {
    pub id: String,
    pub anchor: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
    /// True when the case failed because an evaluation did not converge
    /// (drives the CLI exit code); not part of the report wire format.
    #[serde(skip)]
    pub nonconvergent: bool,
}

/// A suite run: passes iff every case passes.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub cases: Vec<VerifyCase>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failed(&self) -> impl Iterator<Item = &VerifyCase> {
        self.cases.iter().filter(|c| !c.pass)
    }
}

fn rel_err(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    if !lhs.is_finite() || !rhs.is_finite() {
        return f64::INFINITY;
    }
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300)
}

struct CaseBuilder {
    cases: Vec<VerifyCase>,
    tol_floor: Option<f64>,
}

impl CaseBuilder {
    fn new(tol_floor: Option<f64>) -> Self {
        CaseBuilder {
            cases: Vec::new(),
            tol_floor,
        }
    }

    fn effective_tol(&self, tol: f64) -> f64 {
        // An explicit tolerance only loosens: cases keep their own bound
        // when it is already coarser than the requested one.
        match self.tol_floor {
            Some(floor) => tol.max(floor),
            None => tol,
        }
    }

    fn cmp(&mut self, id: &str, anchor: &str, params: String, lhs: f64, rhs: f64, tol: f64) {
        let tol = self.effective_tol(tol);
        let err = rel_err(lhs, rhs);
        self.cases.push(VerifyCase {
            id: id.to_string(),
            anchor: anchor.to_string(),
            params,
            lhs,
            rhs,
            rel_err: err,
            tol,
            pass: err <= tol,
            nonconvergent: false,
        });
    }

    /// Runs a fallible comparison; an error becomes a failing case with the
    /// reason appended to the parameter string.
    fn try_cmp(
        &mut self,
        id: &str,
        anchor: &str,
        params: String,
        tol: f64,
        f: impl FnOnce() -> Result<(f64, f64)>,
    ) {
        match f() {
            Ok((lhs, rhs)) => self.cmp(id, anchor, params, lhs, rhs, tol),
            Err(e) => {
                let nonconvergent = matches!(e, crate::error::Error::NonConvergence { .. });
                self.cases.push(VerifyCase {
                    id: id.to_string(),
                    anchor: anchor.to_string(),
                    params: format!("{params}; error={e}"),
                    lhs: f64::NAN,
                    rhs: f64::NAN,
                    rel_err: f64::INFINITY,
                    tol: self.effective_tol(tol),
                    pass: false,
                    nonconvergent,
                });
            }
        }
    }

    /// Exact polynomial comparison: tolerance 0, witnessed by the values at
    /// q = 1 (the raw counts).
    fn exact_poly(
        &mut self,
        id: &str,
        anchor: &str,
        params: String,
        lhs: &QPolynomial,
        rhs: &QPolynomial,
    ) {
        let equal = lhs == rhs;
        self.cases.push(VerifyCase {
            id: id.to_string(),
            anchor: anchor.to_string(),
            params,
            lhs: lhs.eval(1.0),
            rhs: rhs.eval(1.0),
            rel_err: if equal { 0.0 } else { f64::INFINITY },
            tol: 0.0,
            pass: equal,
            nonconvergent: false,
        });
    }

    fn finish(self, suite: Suite) -> VerifyReport {
        let pass = self.cases.iter().all(|c| c.pass);
        VerifyReport {
            suite: suite.name().to_string(),
            cases: self.cases,
            pass,
        }
    }
}

/// Runs a suite. `tol_floor`, when given, loosens every case tolerance to
/// at least that value (it never tightens below a case's own bound).
pub fn run_suite(suite: Suite, tol_floor: Option<f64>) -> VerifyReport {
    let mut b = CaseBuilder::new(tol_floor);
    match suite {
        Suite::All => {
            qcore_cases(&mut b);
            trees_cases(&mut b);
            gamma_cases(&mut b);
            beta_cases(&mut b);
            moments_cases(&mut b);
        }
        Suite::QCore => qcore_cases(&mut b),
        Suite::Trees => trees_cases(&mut b),
        Suite::Gamma => gamma_cases(&mut b),
        Suite::Beta => beta_cases(&mut b),
        Suite::Moments => moments_cases(&mut b),
    }
    b.finish(suite)
}

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

fn qcore_cases(b: &mut CaseBuilder) {
    let f = |x: f64| 2.0 * x * x * x + x;
    let g = |x: f64| x * x + 3.0;

    // Product rule for the q-derivative.
    for &x in &[0.7, 1.3] {
        for &q in &[0.2, 0.5, 0.8] {
            b.try_cmp(
                "qcore-product-rule",
                "d_q(fg) = d_q f * g + f(q.) * d_q g",
                format!("f=2x^3+x g=x^2+3 x={x} q={q}"),
                1e-12,
                || {
                    let lhs = q_derivative(|y| f(y) * g(y), x, q)?;
                    let rhs = q_derivative(f, x, q)? * g(x) + f(q * x) * q_derivative(g, x, q)?;
                    Ok((lhs, rhs))
                },
            );
        }
    }

    // Chain rule for power arguments.
    let inner_f = |u: f64| u * u + 1.0;
    let a_coef = 1.5;
    for pow in 1..=3i32 {
        for &x in &[0.8, 1.2] {
            for &q in &[0.3, 0.7] {
                b.try_cmp(
                    "qcore-chain-rule",
                    "d_q f(a x^b) = a [b]_q x^{b-1} (d_{q^b} f)(a x^b)",
                    format!("f=u^2+1 a={a_coef} b={pow} x={x} q={q}"),
                    1e-12,
                    || {
                        let lhs = q_derivative(|y| inner_f(a_coef * y.powi(pow)), x, q)?;
                        let rhs = a_coef
                            * q_bracket(f64::from(pow), q)?
                            * x.powi(pow - 1)
                            * q_derivative(inner_f, a_coef * x.powi(pow), q.powi(pow))?;
                        Ok((lhs, rhs))
                    },
                );
            }
        }
    }

    // Integration by parts.
    let tight = SeriesControl::new(1e-13, 3, 100_000).expect("valid control");
    for &q in &[0.2, 0.5, 0.8] {
        let (lo, hi) = (0.25, 1.0);
        b.try_cmp(
            "qcore-integration-by-parts",
            "f(b)g(b) - f(a)g(a) = int d_q f * g d_q x + int f(q.) * d_q g d_q x",
            format!("f=2x^3+x g=x^2+3 a={lo} b={hi} q={q}"),
            1e-10,
            || {
                let boundary = f(hi) * g(hi) - f(lo) * g(lo);
                let first = jackson_integral(
                    |x| q_derivative(f, x, q).unwrap_or(f64::NAN) * g(x),
                    lo,
                    hi,
                    q,
                    &tight,
                )?;
                let second = jackson_integral(
                    |x| f(q * x) * q_derivative(g, x, q).unwrap_or(f64::NAN),
                    lo,
                    hi,
                    q,
                    &tight,
                )?;
                Ok((boundary, first + second))
            },
        );
    }

    // Power rule under Jackson integration.
    for &s in &[-0.5, 0.0, 1.0, 2.0, 3.7] {
        for &upper in &[0.5, 1.0, 2.0] {
            for &q in &[0.2, 0.5, 0.8] {
                b.try_cmp(
                    "qcore-power-rule",
                    "int_0^b x^s d_q x = b^{s+1}/[s+1]_q",
                    format!("s={s} b={upper} q={q}"),
                    1e-12,
                    || {
                        let lhs = jackson_integral(|x| x.powf(s), 0.0, upper, q, &ctl())?;
                        let rhs = upper.powf(s + 1.0) / q_bracket(s + 1.0, q)?;
                        Ok((lhs, rhs))
                    },
                );
            }
        }
    }

    // Classical limit of the bracket product.
    for t in 1..=3u32 {
        for k in 1..=3u32 {
            for n in 1..=5u32 {
                b.try_cmp(
                    "qcore-classical-limit",
                    "[t]_{n,k} -> (t)_{n,k} as q -> 1",
                    format!("t={t} k={k} n={n} q=0.999"),
                    2e-2,
                    || {
                        let p = QParams::new(0.999, f64::from(k))?;
                        let lhs = q_pochhammer_k(f64::from(t), n, &p);
                        let rhs = classical_pochhammer_k(f64::from(t), n, f64::from(k));
                        Ok((lhs, rhs))
                    },
                );
            }
        }
    }

    // Integer exponents telescope to the finite product.
    for n in 1..=5u32 {
        for &x in &[-0.3, 0.4] {
            for &base in &[0.2, 0.6] {
                b.try_cmp(
                    "qcore-power-telescoping",
                    "(1+x)_b^n = prod_{j<n} (1 + b^j x)",
                    format!("n={n} x={x} base={base}"),
                    1e-12,
                    || {
                        let lhs = q_shifted_power(x, f64::from(n), base, &ctl())?;
                        let rhs = q_shifted_product(1.0, x, ProductOrder::Finite(n), base, &ctl())?;
                        Ok((lhs, rhs))
                    },
                );
            }
        }
    }

    // Real-exponent additivity.
    for &(s, t) in &[(0.5, 1.7), (1.2, 0.3), (2.0, 2.5)] {
        let (x, base) = (-0.3, 0.5);
        b.try_cmp(
            "qcore-power-additivity",
            "(1+x)_b^{s+t} = (1+x)_b^s (1 + b^s x)_b^t",
            format!("s={s} t={t} x={x} base={base}"),
            1e-12,
            || {
                let lhs = q_shifted_power(x, s + t, base, &ctl())?;
                let rhs = q_shifted_power(x, s, base, &ctl())?
                    * q_shifted_power(base.powf(s) * x, t, base, &ctl())?;
                Ok((lhs, rhs))
            },
        );
    }

    // E-series against its product form.
    for &x in &[-1.0, 0.5, 2.0] {
        for &base in &[0.0, 0.3, 0.7, 0.95] {
            b.try_cmp(
                "qcore-exponential-product-form",
                "E_q^x = (1 + (1-q)x)_q^inf",
                format!("x={x} q={base}"),
                1e-12,
                || {
                    let lhs = q_exponential_e(x, base, &ctl())?;
                    let rhs = q_shifted_product(
                        1.0,
                        (1.0 - base) * x,
                        ProductOrder::Infinite,
                        base,
                        &ctl(),
                    )?;
                    Ok((lhs, rhs))
                },
            );
        }
    }

    // Jackson integral base cases.
    b.try_cmp(
        "qcore-jackson-q0",
        "int_a^b f d_0 x = b f(b) - a f(a)",
        "f=x^2+1 a=0.3 b=1.2 q=0".to_string(),
        1e-13,
        || {
            let h = |x: f64| x * x + 1.0;
            let lhs = jackson_integral(h, 0.3, 1.2, 0.0, &ctl())?;
            Ok((lhs, 1.2 * h(1.2) - 0.3 * h(0.3)))
        },
    );
    for &q in &[0.2, 0.5, 0.9] {
        b.try_cmp(
            "qcore-jackson-constant",
            "int_0^1 1 d_q x = 1",
            format!("q={q}"),
            1e-12,
            || Ok((jackson_integral(|_| 1.0, 0.0, 1.0, q, &ctl())?, 1.0)),
        );
        b.try_cmp(
            "qcore-jackson-linear",
            "int_0^1 x d_q x = 1/[2]_q",
            format!("q={q}"),
            1e-12,
            || {
                let lhs = jackson_integral(|x| x, 0.0, 1.0, q, &ctl())?;
                Ok((lhs, 1.0 / q_bracket(2.0, q)?))
            },
        );
    }
}

fn trees_cases(b: &mut CaseBuilder) {
    for t in 1..=3u32 {
        for k in 1..=3u32 {
            for n in 0..=5u32 {
                let shape = TreeShapeParams::new(t, n, k).expect("valid shape");
                let params = format!("t={t} n={n} k={k}");

                // Weighted cardinality theorem, exact.
                let mut enumerated = QPolynomial::zero();
                let mut roundtrip_failures = 0u32;
                for item in enumerate(&shape, DEFAULT_ENUMERATION_BUDGET).expect("within budget") {
                    enumerated = &enumerated + &item.weight();
                    let back = decompose(&item.tree, &shape).expect("composed trees are valid");
                    if back != item.sequence {
                        roundtrip_failures += 1;
                    }
                }
                let closed = weighted_cardinality(&shape);
                b.exact_poly(
                    "trees-weighted-cardinality",
                    "|T(t,n,k), w| = prod_{j<n} [t+jk]_q",
                    params.clone(),
                    &enumerated,
                    &closed,
                );

                // Bijection round trip, exhaustive.
                b.cmp(
                    "trees-bijection-roundtrip",
                    "decompose(compose(s)) = s",
                    params.clone(),
                    f64::from(roundtrip_failures),
                    0.0,
                    0.0,
                );

                // Unweighted count against the classical product.
                b.cmp(
                    "trees-unweighted-count",
                    "|T(t,n,k)| = (t)_{n,k}",
                    params,
                    closed.eval(1.0),
                    classical_pochhammer_k(f64::from(t), n, f64::from(k)),
                    0.0,
                );
            }
        }
    }

    // Worked ten-leaf example: code (1,3,6,7), weight q^13.
    let shape = TreeShapeParams::new(2, 4, 2).expect("valid shape");
    let code = GraftingSequence::new(vec![1, 3, 6, 7], &shape).expect("valid code");
    let tree = compose(&code, &shape).expect("composable");
    let back = decompose(&tree, &shape).expect("decomposable");
    b.cmp(
        "trees-worked-example-code",
        "decompose(example tree) = (1,3,6,7)",
        "t=2 n=4 k=2".to_string(),
        f64::from(u32::from(back.indices() != [1, 3, 6, 7])),
        0.0,
        0.0,
    );
    b.exact_poly(
        "trees-worked-example-weight",
        "w(example tree) = q^13",
        "t=2 n=4 k=2 seq=1,3,6,7".to_string(),
        &crate::qtrees::weight(&code),
        &QPolynomial::monomial(13),
    );
}

fn gamma_cases(b: &mut CaseBuilder) {
    for &q in &GRID_Q {
        for &k in &GRID_K {
            let p = match QParams::new(q, k) {
                Ok(p) => p,
                Err(_) => continue,
            };

            // Normalization Gamma(k) = 1.
            b.try_cmp(
                "gamma-normalization",
                "Gamma_{q,k}(k) = 1",
                format!("q={q} k={k}"),
                1e-13,
                || Ok((gamma_qk(k, &p, GammaMethod::ClosedForm, &ctl())?, 1.0)),
            );

            for &t in &GRID_T {
                let params = format!("q={q} k={k} t={t}");

                // Functional equation.
                b.try_cmp(
                    "gamma-functional-equation",
                    "Gamma_{q,k}(t+k) = [t]_q Gamma_{q,k}(t)",
                    params.clone(),
                    1e-11,
                    || {
                        let lhs = gamma_qk(t + k, &p, GammaMethod::ClosedForm, &ctl())?;
                        let rhs =
                            q_bracket(t, q)? * gamma_qk(t, &p, GammaMethod::ClosedForm, &ctl())?;
                        Ok((lhs, rhs))
                    },
                );

                let closed = gamma_qk(t, &p, GammaMethod::ClosedForm, &ctl());

                // Method agreement: infinite product.
                b.try_cmp(
                    "gamma-agreement-product",
                    "closed form = infinite product",
                    params.clone(),
                    1e-10,
                    || {
                        Ok((
                            closed.clone()?,
                            gamma_qk(t, &p, GammaMethod::InfiniteProduct, &ctl())?,
                        ))
                    },
                );

                // Method agreement: series. The alternating series declines
                // (non-convergence) where cancellation exceeds working
                // precision — only evaluable points become cases; the
                // decline path is asserted separately in the test suites.
                if let Ok(series) = gamma_qk(t, &p, GammaMethod::Series, &ctl()) {
                    b.try_cmp(
                        "gamma-agreement-series",
                        "closed form = series",
                        params.clone(),
                        1e-10,
                        || Ok((closed.clone()?, series)),
                    );
                }

                // Method agreement: Jackson integral.
                b.try_cmp(
                    "gamma-agreement-integral",
                    "closed form = q-integral",
                    params.clone(),
                    1e-7,
                    || {
                        Ok((
                            closed.clone()?,
                            gamma_qk(t, &p, GammaMethod::QIntegral, &ctl())?,
                        ))
                    },
                );

                // Base-change identity.
                b.try_cmp(
                    "gamma-base-change",
                    "Gamma_{q,k}(t) = [k]_q^{t/k-1} Gamma_{q^k}(t/k)",
                    params.clone(),
                    1e-10,
                    || gamma_qk_lemma_check(t, &p, &ctl()),
                );

                // Shifted-power summation identity (series side declines
                // under hopeless cancellation, as above).
                match pochhammer_identity_corollary(t, &p, &ctl()) {
                    Ok((lhs, rhs)) => b.cmp(
                        "gamma-pochhammer-sum",
                        "(1-q^k)_{q^k}^{t/k-1} = sum_n q^{kn(n+1)/2}/((1-q^{kn+t})(q^k-1)^n [n]_{q^k}!)",
                        params.clone(),
                        lhs,
                        rhs,
                        1e-10,
                    ),
                    Err(crate::error::Error::NonConvergence { .. }) => {}
                    Err(e) => b.cmp(
                        "gamma-pochhammer-sum",
                        "(1-q^k)_{q^k}^{t/k-1} = sum_n ...",
                        format!("{params}; error={e}"),
                        f64::NAN,
                        f64::NAN,
                        1e-10,
                    ),
                }
            }
        }
    }

    // Density kernel: displayed alternating series against the product form.
    for &q in &[0.0, 0.3, 0.6, 0.9] {
        for &k in &[1.0, 3.0] {
            b.try_cmp(
                "gamma-kernel-series-vs-product",
                "E_{q^k}^{-q^k x^k/[k]_q}: alternating series = product form",
                format!("q={q} k={k}; max over 5 support points"),
                1e-12,
                || {
                    let p = QParams::new(q, k)?;
                    let upper = KGammaDist::new(p, 1.0)?.upper();
                    let mut worst = (1.0, 1.0);
                    let mut worst_err = -1.0;
                    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
                        let x = frac * upper;
                        let series = crate::qspecial::exp_kernel_series(x, &p, &ctl())?;
                        let product = crate::qspecial::exp_kernel_product(x, &p, &ctl())?;
                        if rel_err(series, product) > worst_err {
                            worst_err = rel_err(series, product);
                            worst = (series, product);
                        }
                    }
                    Ok(worst)
                },
            );
        }
    }

    // k = 1 reduction to the plain q-gamma.
    for &q in &GRID_Q {
        for &t in &GRID_T {
            b.try_cmp(
                "gamma-k1-reduction",
                "Gamma_{q,1}(t) = Gamma_q(t)",
                format!("q={q} t={t}"),
                1e-12,
                || {
                    let p = QParams::new(q, 1.0)?;
                    let lhs = gamma_qk(t, &p, GammaMethod::ClosedForm, &ctl())?;
                    Ok((lhs, gamma_q(t, q, &ctl())?))
                },
            );
        }
    }

    // Classical limit of gamma ratios at q = 0.999.
    for t in 1..=3u32 {
        for k in 1..=3u32 {
            for n in 1..=5u32 {
                b.try_cmp(
                    "gamma-classical-limit",
                    "Gamma_{q,k}(t+nk)/Gamma_{q,k}(t) -> (t)_{n,k} as q -> 1",
                    format!("t={t} k={k} n={n} q=0.999"),
                    2e-2,
                    || {
                        let p = QParams::new(0.999, f64::from(k))?;
                        let top = gamma_qk(
                            f64::from(t) + f64::from(n) * f64::from(k),
                            &p,
                            GammaMethod::ClosedForm,
                            &ctl(),
                        )?;
                        let bottom = gamma_qk(f64::from(t), &p, GammaMethod::ClosedForm, &ctl())?;
                        Ok((
                            top / bottom,
                            classical_pochhammer_k(f64::from(t), n, f64::from(k)),
                        ))
                    },
                );
            }
        }
    }
}

const BETA_PAIRS: [(f64, f64); 3] = [(0.5, 0.5), (1.0, 2.3), (2.3, 0.7)];

fn beta_cases(b: &mut CaseBuilder) {
    // B_{0,k} = 1 in every representation.
    for &k in &[1.0, 3.0] {
        for &(t, s) in &BETA_PAIRS {
            for (method, name) in [
                (BetaMethod::GammaRatio, "ratio"),
                (BetaMethod::ClosedForm, "closed"),
                (BetaMethod::QIntegral, "integral"),
            ] {
                b.try_cmp(
                    "beta-q0-is-one",
                    "B_{0,k}(t,s) = 1",
                    format!("k={k} t={t} s={s} method={name}"),
                    1e-13,
                    || {
                        let p = QParams::new(0.0, k)?;
                        Ok((beta_qk(t, s, &p, method, &ctl())?, 1.0))
                    },
                );
            }
        }
    }

    // Symmetry through the gamma-ratio route.
    for &q in &[0.2, 0.5, 0.8, 0.99] {
        for &k in &[0.5, 1.0, 2.0, 5.0] {
            for &(t, s) in &BETA_PAIRS {
                b.try_cmp(
                    "beta-symmetry",
                    "B_{q,k}(t,s) = B_{q,k}(s,t)",
                    format!("q={q} k={k} t={t} s={s}"),
                    1e-11,
                    || {
                        let p = QParams::new(q, k)?;
                        Ok((
                            beta_qk(t, s, &p, BetaMethod::GammaRatio, &ctl())?,
                            beta_qk(s, t, &p, BetaMethod::GammaRatio, &ctl())?,
                        ))
                    },
                );
            }
        }
    }

    // Three-representation agreement.
    for &q in &[0.2, 0.5, 0.8, 0.99] {
        for &k in &[1.0, 2.0, 3.7] {
            for &(t, s) in &BETA_PAIRS {
                let params = format!("q={q} k={k} t={t} s={s}");
                b.try_cmp(
                    "beta-agreement-closed",
                    "Gamma ratio = closed form",
                    params.clone(),
                    1e-8,
                    || {
                        let p = QParams::new(q, k)?;
                        Ok((
                            beta_qk(t, s, &p, BetaMethod::GammaRatio, &ctl())?,
                            beta_qk(t, s, &p, BetaMethod::ClosedForm, &ctl())?,
                        ))
                    },
                );
                b.try_cmp(
                    "beta-agreement-integral",
                    "closed form = q-integral",
                    params,
                    1e-8,
                    || {
                        let p = QParams::new(q, k)?;
                        Ok((
                            beta_qk(t, s, &p, BetaMethod::ClosedForm, &ctl())?,
                            beta_qk(t, s, &p, BetaMethod::QIntegral, &ctl())?,
                        ))
                    },
                );
            }
        }
    }

    // B(k, k) = 1/[k]_q.
    for &q in &[0.2, 0.5, 0.8, 0.99] {
        for &k in &[0.5, 1.0, 2.0, 5.0] {
            b.try_cmp(
                "beta-diagonal",
                "B_{q,k}(k,k) = 1/[k]_q",
                format!("q={q} k={k}"),
                1e-12,
                || {
                    let p = QParams::new(q, k)?;
                    Ok((
                        beta_qk(k, k, &p, BetaMethod::GammaRatio, &ctl())?,
                        1.0 / p.bracket_k(),
                    ))
                },
            );
        }
    }
}

fn moments_cases(b: &mut CaseBuilder) {
    // Three-way moment identity: tree polynomial at q = bracket product =
    // Jackson moment.
    for t in 1..=3u32 {
        for k in 1..=3u32 {
            for n in 0..=4u32 {
                let shape = TreeShapeParams::new(t, n, k).expect("valid shape");
                let poly = weighted_cardinality(&shape);
                for &q in &[0.2, 0.5, 0.8] {
                    let params = format!("t={t} n={n} k={k} q={q}");
                    b.try_cmp(
                        "moments-tree-polynomial",
                        "|T(t,n,k), w|(q) = [t]_{n,k}",
                        params.clone(),
                        1e-12,
                        || {
                            let p = QParams::new(q, f64::from(k))?;
                            Ok((poly.eval(q), q_pochhammer_k(f64::from(t), n, &p)))
                        },
                    );
                    b.try_cmp(
                        "moments-jackson-integral",
                        "[t]_{n,k} = (1/Gamma_{q,k}(t)) int x^{t+nk-1} E_{q^k}^{-q^k x^k/[k]_q} d_q x",
                        params,
                        1e-7,
                        || {
                            let p = QParams::new(q, f64::from(k))?;
                            let dist = KGammaDist::new(p, f64::from(t))?;
                            Ok((
                                q_pochhammer_k(f64::from(t), n, &p),
                                dist.moment(n, &ctl())?,
                            ))
                        },
                    );
                }
            }
        }
    }

    // CDF normalization across the parameter grid; the series route only
    // where its cancellation allows (it declines otherwise).
    for &q in &GRID_Q {
        for &k in &GRID_K {
            for &t in &GRID_T {
                let params = format!("q={q} k={k} t={t}");
                b.try_cmp(
                    "moments-gamma-cdf-normalization-jackson",
                    "F(b) = 1 (Jackson route)",
                    params.clone(),
                    1e-8,
                    || {
                        let p = QParams::new(q, k)?;
                        let dist = KGammaDist::new(p, t)?;
                        Ok((dist.cdf(dist.upper(), CdfMethod::Jackson, &ctl())?, 1.0))
                    },
                );
                let series_value = (|| -> Result<f64> {
                    let p = QParams::new(q, k)?;
                    let dist = KGammaDist::new(p, t)?;
                    dist.cdf(dist.upper(), CdfMethod::Series, &ctl())
                })();
                match series_value {
                    Ok(v) => b.cmp(
                        "moments-gamma-cdf-normalization-series",
                        "F(b) = 1 (series route)",
                        params,
                        v,
                        1.0,
                        1e-8,
                    ),
                    Err(crate::error::Error::NonConvergence { .. }) => {}
                    Err(e) => b.cmp(
                        "moments-gamma-cdf-normalization-series",
                        "F(b) = 1 (series route)",
                        format!("{params}; error={e}"),
                        f64::NAN,
                        1.0,
                        1e-8,
                    ),
                }
            }
        }
    }
    for &q in &[0.2, 0.5, 0.8, 0.99] {
        for &k in &[0.5, 2.0, 5.0] {
            for &(t, s) in &BETA_PAIRS {
                let params = format!("q={q} k={k} t={t} s={s}");
                for (method, name) in [
                    (CdfMethod::Series, "series"),
                    (CdfMethod::Jackson, "jackson"),
                ] {
                    b.try_cmp(
                        "moments-beta-cdf-normalization",
                        "F(endpoint) = 1",
                        format!("{params} method={name}"),
                        1e-8,
                        || {
                            let p = QParams::new(q, k)?;
                            let dist = KBetaDist::new(p, t, s)?;
                            Ok((dist.cdf(dist.upper(), method, &ctl())?, 1.0))
                        },
                    );
                }
            }
        }
    }

    // Series vs Jackson CDF agreement at 20 interior points per distribution.
    for &q in &[0.2, 0.5, 0.8] {
        for &k in &[1.0, 2.0, 3.0] {
            for &t in &[0.5, 1.0, 2.3] {
                b.try_cmp(
                    "moments-gamma-cdf-agreement",
                    "series CDF = Jackson CDF",
                    format!("q={q} k={k} t={t}; max over 20 interior points"),
                    1e-9,
                    || {
                        let p = QParams::new(q, k)?;
                        let dist = KGammaDist::new(p, t)?;
                        let mut worst = (0.0, 0.0);
                        let mut worst_err = -1.0;
                        for i in 1..=20 {
                            let x = dist.upper() * f64::from(i) / 21.0;
                            let s = dist.cdf(x, CdfMethod::Series, &ctl())?;
                            let j = dist.cdf(x, CdfMethod::Jackson, &ctl())?;
                            if rel_err(s, j) > worst_err {
                                worst_err = rel_err(s, j);
                                worst = (s, j);
                            }
                        }
                        Ok(worst)
                    },
                );
                b.try_cmp(
                    "moments-beta-cdf-agreement",
                    "series CDF = Jackson CDF",
                    format!("q={q} k={k} t={t} s=1.3; max over 20 interior points"),
                    1e-9,
                    || {
                        let p = QParams::new(q, k)?;
                        let dist = KBetaDist::new(p, t, 1.3)?;
                        let mut worst = (0.0, 0.0);
                        let mut worst_err = -1.0;
                        for i in 1..=20 {
                            let x = dist.upper() * f64::from(i) / 21.0;
                            let s = dist.cdf(x, CdfMethod::Series, &ctl())?;
                            let j = dist.cdf(x, CdfMethod::Jackson, &ctl())?;
                            if rel_err(s, j) > worst_err {
                                worst_err = rel_err(s, j);
                                worst = (s, j);
                            }
                        }
                        Ok(worst)
                    },
                );
            }
        }
    }

    // Lattice realization: total mass, prefix-sum consistency, nonnegativity.
    for &q in &[0.2, 0.5, 0.8] {
        for &(t, k) in &[(1.0, 2.0), (2.3, 1.0)] {
            let params = format!("q={q} k={k} t={t} tail_tol=1e-9");
            b.try_cmp(
                "moments-lattice-total-mass",
                "sum of lattice masses = 1",
                params.clone(),
                1e-8,
                || {
                    let p = QParams::new(q, k)?;
                    let m = KGammaDist::new(p, t)?.lattice_measure(1e-9, &ctl())?;
                    Ok((m.total_mass(), 1.0))
                },
            );
            // The lattice is truncated at tail_tol, so the suffix sums match
            // the analytic CDF to tail_tol absolutely (both are
            // probabilities); relative agreement is meaningless at the deep
            // lattice points where the CDF itself is ~tail_tol.
            let consistency = (|| -> Result<(f64, f64, f64)> {
                let p = QParams::new(q, k)?;
                let dist = KGammaDist::new(p, t)?;
                let m = dist.lattice_measure(1e-9, &ctl())?;
                let cdfs = m.cdf_at_support();
                let mut worst = (0.0, 0.0);
                let mut worst_dev = -1.0;
                for (&x, &c) in m.support().iter().zip(cdfs.iter()) {
                    let analytic = dist.cdf(x, CdfMethod::Series, &ctl())?;
                    if (analytic - c).abs() > worst_dev {
                        worst_dev = (analytic - c).abs();
                        worst = (analytic, c);
                    }
                }
                Ok((worst.0, worst.1, worst_dev))
            })();
            match consistency {
                Ok((lhs, rhs, dev)) => {
                    let tol = b.effective_tol(1e-9);
                    b.cases.push(VerifyCase {
                        id: "moments-lattice-cdf-consistency".to_string(),
                        anchor: "CDF(x_m) = suffix mass sum".to_string(),
                        params: format!("{params}; absolute deviation"),
                        lhs,
                        rhs,
                        rel_err: dev,
                        tol,
                        pass: dev <= tol,
                        nonconvergent: false,
                    });
                }
                Err(e) => b.cmp(
                    "moments-lattice-cdf-consistency",
                    "CDF(x_m) = suffix mass sum",
                    format!("{params}; error={e}"),
                    f64::NAN,
                    f64::NAN,
                    1e-9,
                ),
            }
            b.try_cmp(
                "moments-lattice-nonnegative",
                "density >= 0 at every lattice point",
                params,
                0.0,
                || {
                    let p = QParams::new(q, k)?;
                    let m = KGammaDist::new(p, t)?.lattice_measure(1e-9, &ctl())?;
                    let min = m.masses().iter().cloned().fold(f64::INFINITY, f64::min);
                    Ok((f64::from(u32::from(min < 0.0)), 0.0))
                },
            );
        }
    }

    // Seeded sampler checks: moment recovery and Kolmogorov-Smirnov fit.
    let outcome = (|| -> Result<(f64, f64, f64, f64)> {
        let p = QParams::new(0.5, 2.0)?;
        let dist = KGammaDist::new(p, 1.0)?;
        let measure = dist.lattice_measure(1e-9, &ctl())?;
        let draws = measure.sample(100_000, 12_345);
        let n = draws.len() as f64;
        let powered: Vec<f64> = draws.iter().map(|x| x.powf(2.0)).collect();
        let mean = powered.iter().sum::<f64>() / n;
        let var = powered.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let expect = q_bracket(1.0, 0.5)?;
        // Kolmogorov-Smirnov distance against the lattice CDF, evaluated
        // at every atom from both sides (the CDF is a step function).
        let mut sorted = draws;
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
        let cdfs = measure.cdf_at_support();
        let mut ks: f64 = 0.0;
        for (m, &x) in measure.support().iter().enumerate() {
            let analytic = cdfs[m];
            let analytic_below = if m + 1 < cdfs.len() { cdfs[m + 1] } else { 0.0 };
            let emp_at = sorted.partition_point(|&d| d <= x) as f64 / n;
            let emp_below = sorted.partition_point(|&d| d < x) as f64 / n;
            ks = ks.max((emp_at - analytic).abs());
            ks = ks.max((emp_below - analytic_below).abs());
        }
        Ok((mean, expect, se, ks))
    })();
    match outcome {
        Ok((mean, expect, se, ks)) => {
            b.cmp(
                "moments-sampler-mean",
                "empirical E[X^k] = [t]_q (t=1, k=2, q=0.5)",
                format!("draws=100000 seed=12345 se={se:.3e}; tol = 3 standard errors"),
                mean,
                expect,
                3.0 * se / expect.abs(),
            );
            let ks_tol = b.effective_tol(0.01);
            b.cases.push(VerifyCase {
                id: "moments-sampler-ks".to_string(),
                anchor: "KS(empirical, lattice CDF) < 0.01".to_string(),
                params: "t=1 k=2 q=0.5 draws=100000 seed=12345; absolute distance".to_string(),
                lhs: ks,
                rhs: 0.0,
                rel_err: ks,
                tol: ks_tol,
                pass: ks <= ks_tol,
                nonconvergent: false,
            });
        }
        Err(e) => b.cmp(
            "moments-sampler-mean",
            "empirical E[X^k] = [t]_q (t=1, k=2, q=0.5)",
            format!("error={e}"),
            f64::NAN,
            f64::NAN,
            0.0,
        ),
    }
}
