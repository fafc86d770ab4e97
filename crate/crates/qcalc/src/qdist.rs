//! The k-gamma and k-beta q-distributions.
//!
//! A q-density on [0, b] is a nonnegative function whose Jackson q-integral
//! over the interval is 1; the underlying measure is discrete, supported on
//! the geometric lattice {q^m b} with masses (1-q) b q^m f(q^m b). Both
//! distributions here arise from the special functions: the k-gamma density
//! x^{t-1} E_{q^k}^{-q^k x^k/[k]_q} / Gamma_{q,k}(t) has Jackson moments
//! recovering the q-Pochhammer k-symbol, and the k-beta density plays the
//! same role for B_{q,k}.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{alternating_qk_series, QParams, SeriesControl};
use crate::qspecial::{
    beta_qk, beta_shifted_factor, beta_support_upper, exp_kernel_product, gamma_qk,
    gamma_support_upper, jackson_with_kernel, BetaMethod, GammaMethod,
};

/// How to evaluate a cumulative distribution: the closed series or direct
/// Jackson integration of the density. The two must agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdfMethod {
    Series,
    Jackson,
}

/// Safety factor on the analytic geometric tail bound used to truncate
/// lattice measures.
const TAIL_SAFETY: f64 = 10.0;

/// k-gamma q-distribution with shape t on [0, [k]_q^{1/k}/(1-q^k)^{1/k}].
#[derive(Clone, Copy, Debug)]
pub struct KGammaDist {
    params: QParams,
    t: f64,
    upper: f64,
}

impl KGammaDist {
    pub fn new(params: QParams, t: f64) -> Result<Self> {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::domain(format!("shape t must be > 0, got {t}")));
        }
        let upper = gamma_support_upper(&params);
        Ok(KGammaDist { params, t, upper })
    }

    pub fn params(&self) -> &QParams {
        &self.params
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Upper endpoint of the support.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    fn check_support(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x < 0.0 || x > self.upper {
            return Err(Error::domain(format!(
                "x = {x} outside the support [0, {}]",
                self.upper
            )));
        }
        if x == 0.0 && self.t < 1.0 {
            return Err(Error::domain("density diverges at x = 0 for shape t < 1"));
        }
        Ok(())
    }

    /// Density x^{t-1} E_{q^k}^{-q^k x^k/[k]_q} / Gamma_{q,k}(t).
    pub fn density(&self, x: f64, ctl: &SeriesControl) -> Result<f64> {
        self.check_support(x)?;
        let kernel = exp_kernel_product(x, &self.params, ctl)?;
        if kernel < 0.0 {
            return Err(Error::domain(format!(
                "density kernel negative ({kernel:.3e}) at x = {x}: numerical tolerance violated"
            )));
        }
        let norm = gamma_qk(self.t, &self.params, GammaMethod::ClosedForm, ctl)?;
        Ok(x.powf(self.t - 1.0) * kernel / norm)
    }

    /// Cumulative distribution at x, by the closed series
    /// (1-q) x^t / Gamma_{q,k}(t) * sum_n (-1)^n q^{kn(n+1)/2} x^{kn} /
    /// ([k]_q^n [n]_{q^k}! (1-q^{kn+t}))
    /// or by Jackson integration of the density over [0, x].
    pub fn cdf(&self, x: f64, method: CdfMethod, ctl: &SeriesControl) -> Result<f64> {
        if !x.is_finite() || x < 0.0 || x > self.upper {
            return Err(Error::domain(format!(
                "x = {x} outside the support [0, {}]",
                self.upper
            )));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let q = self.params.q();
        let norm = gamma_qk(self.t, &self.params, GammaMethod::ClosedForm, ctl)?;
        match method {
            CdfMethod::Series => {
                let u = x.powf(self.params.k()) / self.params.bracket_k();
                let sum =
                    alternating_qk_series(u, self.params.q_pow_k(), Some(q.powf(self.t)), ctl)?;
                Ok((1.0 - q) * x.powf(self.t) * sum / norm)
            }
            CdfMethod::Jackson => {
                let params = self.params;
                let t = self.t;
                let ctl2 = *ctl;
                let integral = jackson_with_kernel(
                    |s| Ok(s.powf(t - 1.0) * exp_kernel_product(s, &params, &ctl2)?),
                    0.0,
                    x,
                    q,
                    ctl,
                )?;
                Ok(integral / norm)
            }
        }
    }

    /// Moment of order nk: (1/Gamma_{q,k}(t)) int x^{t+nk-1} E d_q x, which
    /// the moment identity pins to [t]_{n,k}.
    pub fn moment(&self, n: u32, ctl: &SeriesControl) -> Result<f64> {
        let order = self.t + f64::from(n) * self.params.k();
        let norm = gamma_qk(self.t, &self.params, GammaMethod::ClosedForm, ctl)?;
        let params = self.params;
        let ctl2 = *ctl;
        let integral = jackson_with_kernel(
            |x| Ok(x.powf(order - 1.0) * exp_kernel_product(x, &params, &ctl2)?),
            0.0,
            self.upper,
            self.params.q(),
            ctl,
        )?;
        Ok(integral / norm)
    }

    /// Materializes the distribution as an explicit discrete measure on the
    /// lattice {q^m b}, truncated once the analytic geometric tail bound
    /// drops below `tail_tol`.
    pub fn lattice_measure(&self, tail_tol: f64, ctl: &SeriesControl) -> Result<LatticeMeasure> {
        let dist = *self;
        let ctl2 = *ctl;
        build_lattice(
            self.upper,
            self.t,
            self.params.q(),
            tail_tol,
            |x| dist.density(x, &ctl2),
            // kernel -> 1 as x -> 0, so the density core tends to 1/Gamma.
            1.0 / gamma_qk(self.t, &self.params, GammaMethod::ClosedForm, ctl)?,
        )
    }
}

/// k-beta q-distribution with shapes (t, s) on [0, [k]_q^{1/k}].
#[derive(Clone, Copy, Debug)]
pub struct KBetaDist {
    params: QParams,
    t: f64,
    s: f64,
    upper: f64,
}

impl KBetaDist {
    pub fn new(params: QParams, t: f64, s: f64) -> Result<Self> {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::domain(format!("shape t must be > 0, got {t}")));
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::domain(format!("shape s must be > 0, got {s}")));
        }
        let upper = beta_support_upper(&params);
        Ok(KBetaDist {
            params,
            t,
            s,
            upper,
        })
    }

    pub fn params(&self) -> &QParams {
        &self.params
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    fn normalizer(&self, ctl: &SeriesControl) -> Result<f64> {
        let b = beta_qk(self.t, self.s, &self.params, BetaMethod::ClosedForm, ctl)?;
        Ok(b * self.params.bracket_k().powf(self.t / self.params.k()))
    }

    /// Density x^{t-1} (1 - q^k x^k/[k]_q)_{q^k}^{s/k-1} / (B_{q,k}(t,s) [k]_q^{t/k}).
    pub fn density(&self, x: f64, ctl: &SeriesControl) -> Result<f64> {
        if !x.is_finite() || x < 0.0 || x > self.upper {
            return Err(Error::domain(format!(
                "x = {x} outside the support [0, {}]",
                self.upper
            )));
        }
        if x == 0.0 && self.t < 1.0 {
            return Err(Error::domain("density diverges at x = 0 for shape t < 1"));
        }
        let factor = beta_shifted_factor(x, self.s, &self.params, ctl)?;
        if factor < 0.0 {
            return Err(Error::domain(format!(
                "density factor negative ({factor:.3e}) at x = {x}: numerical tolerance violated"
            )));
        }
        Ok(x.powf(self.t - 1.0) * factor / self.normalizer(ctl)?)
    }

    /// Cumulative distribution at x, by the closed series
    /// (1-q) x^t / (B_{q,k}(t,s) [k]_q^{t/k}) *
    /// sum_n q^{nt} (1 - q^{k(n+1)} x^k/[k]_q)_{q^k}^{s/k-1}
    /// or by Jackson integration of the density.
    pub fn cdf(&self, x: f64, method: CdfMethod, ctl: &SeriesControl) -> Result<f64> {
        if !x.is_finite() || x < 0.0 || x > self.upper {
            return Err(Error::domain(format!(
                "x = {x} outside the support [0, {}]",
                self.upper
            )));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let q = self.params.q();
        let norm = self.normalizer(ctl)?;
        match method {
            CdfMethod::Series => {
                // Term n is q^{nt} (1 - q^{k(n+1)} x^k/[k]_q)_{q^k}^{s/k-1};
                // the shifted-power factor is the density factor at q^n x.
                let mut sum = 0.0;
                let mut q_pow_nt = 1.0; // q^{nt}
                let mut q_pow_n = 1.0; // q^n
                let q_t = q.powf(self.t);
                let mut small = 0;
                let mut converged = false;
                for _ in 0..ctl.max_terms() {
                    let term =
                        q_pow_nt * beta_shifted_factor(q_pow_n * x, self.s, &self.params, ctl)?;
                    sum += term;
                    if term.abs() <= ctl.rtol() * sum.abs() {
                        small += 1;
                        if small >= ctl.consecutive() {
                            converged = true;
                            break;
                        }
                    } else {
                        small = 0;
                    }
                    q_pow_nt *= q_t;
                    q_pow_n *= q;
                    if q_pow_nt == 0.0 {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(Error::no_convergence(
                        ctl.max_terms(),
                        "k-beta CDF series did not stabilize",
                    ));
                }
                Ok((1.0 - q) * x.powf(self.t) * sum / norm)
            }
            CdfMethod::Jackson => {
                let dist = *self;
                let ctl2 = *ctl;
                let integral = jackson_with_kernel(
                    |u| {
                        Ok(u.powf(dist.t - 1.0)
                            * beta_shifted_factor(u, dist.s, &dist.params, &ctl2)?)
                    },
                    0.0,
                    x,
                    q,
                    ctl,
                )?;
                Ok(integral / norm)
            }
        }
    }

    /// Discrete lattice realization, as for the k-gamma distribution.
    pub fn lattice_measure(&self, tail_tol: f64, ctl: &SeriesControl) -> Result<LatticeMeasure> {
        let dist = *self;
        let ctl2 = *ctl;
        // The shifted-power factor tends to 1 as x -> 0, so the density core
        // tends to 1/(B [k]^{t/k}); its other extreme sits at the endpoint.
        let core_at_zero = 1.0 / self.normalizer(ctl)?;
        build_lattice(
            self.upper,
            self.t,
            self.params.q(),
            tail_tol,
            |x| dist.density(x, &ctl2),
            core_at_zero,
        )
    }
}

/// Discrete measure on the descending lattice {q^m b}: the realization of a
/// q-density that the Jackson integral actually sums.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeMeasure {
    support: Vec<f64>,
    masses: Vec<f64>,
    tail_tol: f64,
}

impl LatticeMeasure {
    /// Support points x_m = q^m b, descending.
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Point masses p_m = (1-q) b q^m density(x_m).
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// CDF evaluated at each support point: entry m is the total mass at or
    /// below x_m, i.e. the suffix sum of masses from m on.
    pub fn cdf_at_support(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.masses.len()];
        let mut acc = 0.0;
        for m in (0..self.masses.len()).rev() {
            acc += self.masses[m];
            out[m] = acc;
        }
        out
    }

    /// `count` i.i.d. draws by inverse CDF over the truncated support.
    /// Deterministic for a fixed seed.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Cumulative masses over ascending support (smallest atom first).
        let mut cumulative = Vec::with_capacity(self.masses.len());
        let mut acc = 0.0;
        for m in (0..self.masses.len()).rev() {
            acc += self.masses[m];
            cumulative.push(acc);
        }
        let total = acc;
        let mut draws = Vec::with_capacity(count);
        for _ in 0..count {
            let u: f64 = rng.random::<f64>() * total;
            let pos = cumulative.partition_point(|&c| c <= u);
            let pos = pos.min(cumulative.len() - 1);
            // cumulative index i corresponds to support index len-1-i.
            draws.push(self.support[self.support.len() - 1 - pos]);
        }
        draws
    }
}

fn build_lattice(
    b: f64,
    t: f64,
    q: f64,
    tail_tol: f64,
    density: impl Fn(f64) -> Result<f64>,
    core_at_zero: f64,
) -> Result<LatticeMeasure> {
    if !(tail_tol > 0.0 && tail_tol <= 1e-3) {
        return Err(Error::invalid(format!(
            "tail_tol must lie in (0, 1e-3], got {tail_tol}"
        )));
    }
    let mut support = Vec::new();
    let mut masses = Vec::new();
    let q_pow_t = q.powf(t);
    let mut qm = 1.0;
    let mut qmt = 1.0; // q^{mt}
    let mut sup_core = core_at_zero;
    let max_points = 1_000_000;
    for _ in 0..max_points {
        let x = qm * b;
        let d = density(x)?;
        if d < 0.0 {
            return Err(Error::domain(format!(
                "negative mass at lattice point x = {x}: numerical tolerance violated"
            )));
        }
        let mass = (1.0 - q) * b * qm * d;
        support.push(x);
        masses.push(mass);
        // Density core d * (x/b)^{1-t}; both kernels are monotone in x, so
        // the maximum of the observed cores and the x -> 0 limit bounds the
        // remaining ones.
        let core = d * (x / b).powf(1.0 - t);
        if core.is_finite() {
            sup_core = sup_core.max(core);
        }
        qmt *= q_pow_t;
        qm *= q;
        let tail_bound = TAIL_SAFETY * (1.0 - q) * b.powf(t) * sup_core * qmt / (1.0 - q_pow_t);
        if tail_bound < tail_tol || qm == 0.0 {
            break;
        }
    }
    let measure = LatticeMeasure {
        support,
        masses,
        tail_tol,
    };
    let total = measure.total_mass();
    if !(total >= 1.0 - tail_tol && total <= 1.0 + 1e-9) {
        return Err(Error::domain(format!(
            "lattice masses sum to {total}, outside [1 - {tail_tol}, 1 + 1e-9]"
        )));
    }
    Ok(measure)
}
