//! Exact polynomials in q with non-negative integer coefficients.
//!
//! This is the value domain of q-weighted-set cardinalities: counting a
//! weighted set yields an element of N[q], not an integer. Coefficients are
//! arbitrary-precision ([`BigUint`]), since the tree counts behind them grow
//! factorially. Addition and multiplication stay inside N[q]; there is no
//! subtraction or division.

use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Polynomial sum_i c_i q^i with c_i >= 0, kept in canonical form
/// (no trailing zero coefficients; zero is the empty sequence).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QPolynomial {
    coeffs: Vec<BigUint>,
}

impl QPolynomial {
    pub fn zero() -> Self {
        QPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPolynomial::monomial(0)
    }

    /// The monomial q^exponent.
    pub fn monomial(exponent: usize) -> Self {
        let mut coeffs = vec![BigUint::ZERO; exponent + 1];
        coeffs[exponent] = BigUint::from(1u8);
        QPolynomial { coeffs }
    }

    /// Builds from coefficients indexed by power of q, trimming trailing zeros.
    pub fn from_coeffs(coeffs: Vec<BigUint>) -> Self {
        let mut p = QPolynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_u64_coeffs(coeffs: &[u64]) -> Self {
        QPolynomial::from_coeffs(coeffs.iter().map(|&c| BigUint::from(c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == BigUint::ZERO) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation. Intended for q in [0, 1]; q = 1 recovers the
    /// coefficient sum (the classical limit).
    pub fn eval(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * q + biguint_to_f64(c);
        }
        acc
    }

    /// Exact value at q = 1.
    pub fn coefficient_sum(&self) -> BigUint {
        let mut sum = BigUint::ZERO;
        for c in &self.coeffs {
            sum += c;
        }
        sum
    }

    /// Decimal-string form of each coefficient, index = power of q; the
    /// machine-readable JSON shape.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

fn biguint_to_f64(c: &BigUint) -> f64 {
    // BigUint -> f64 via u64 when it fits, otherwise through the decimal
    // string (desk-scale coefficients never take this path).
    u64::try_from(c).map_or_else(
        |_| c.to_string().parse().unwrap_or(f64::INFINITY),
        |v| v as f64,
    )
}

impl Add for &QPolynomial {
    type Output = QPolynomial;

    fn add(self, other: &QPolynomial) -> QPolynomial {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (i, c) in short.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        QPolynomial::from_coeffs(coeffs)
    }
}

impl Mul for &QPolynomial {
    type Output = QPolynomial;

    fn mul(self, other: &QPolynomial) -> QPolynomial {
        if self.is_zero() || other.is_zero() {
            return QPolynomial::zero();
        }
        let mut coeffs = vec![BigUint::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == BigUint::ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        QPolynomial::from_coeffs(coeffs)
    }
}

/// The bracket polynomial [t]_q = 1 + q + ... + q^{t-1}; rejects t = 0.
pub fn q_bracket_poly(t: u32) -> Result<QPolynomial> {
    if t == 0 {
        return Err(Error::invalid("bracket polynomial requires t >= 1"));
    }
    Ok(QPolynomial::from_coeffs(vec![
        BigUint::from(1u8);
        t as usize
    ]))
}

impl fmt::Display for QPolynomial {
    /// Renders as "c0 + c1*q + c2*q^2 + ...", skipping zero terms and
    /// unit coefficients: `1 + 2*q + 2*q^2 + q^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let one = BigUint::from(1u8);
        let mut first = true;
        for (power, c) in self.coeffs.iter().enumerate() {
            if *c == BigUint::ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (power, *c == one) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{c}*q")?,
                (_, true) => write!(f, "q^{power}")?,
                (_, false) => write!(f, "{c}*q^{power}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for QPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeff_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let mut coeffs = Vec::with_capacity(strings.len());
        for s in &strings {
            coeffs.push(
                s.parse::<BigUint>()
                    .map_err(|e| D::Error::custom(format!("bad coefficient {s:?}: {e}")))?,
            );
        }
        Ok(QPolynomial::from_coeffs(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(cs: &[u64]) -> QPolynomial {
        QPolynomial::from_u64_coeffs(cs)
    }

    #[test]
    fn add_examples() {
        assert_eq!(&poly(&[1, 1]) + &poly(&[0, 1, 1]), poly(&[1, 2, 1]));
        let p = poly(&[3, 0, 7]);
        assert_eq!(&p + &QPolynomial::zero(), p);
        let q13 = QPolynomial::monomial(13);
        let sum = &q13 + &q13;
        assert_eq!(sum.coeffs()[13], BigUint::from(2u8));
        assert_eq!(sum.degree(), Some(13));
    }

    #[test]
    fn mul_examples() {
        // (1+q)(1+q+q^2) = 1 + 2q + 2q^2 + q^3, by hand convolution.
        assert_eq!(&poly(&[1, 1]) * &poly(&[1, 1, 1]), poly(&[1, 2, 2, 1]));
        let p = poly(&[2, 5]);
        assert_eq!(&p * &QPolynomial::one(), p);
        assert_eq!(&p * &QPolynomial::zero(), QPolynomial::zero());
    }

    #[test]
    fn bracket_poly() {
        assert_eq!(q_bracket_poly(1).unwrap(), QPolynomial::one());
        assert_eq!(q_bracket_poly(3).unwrap(), poly(&[1, 1, 1]));
        assert!(q_bracket_poly(0).is_err());
        // Evaluation matches the closed form.
        let p = q_bracket_poly(5).unwrap();
        let closed = crate::qcore::q_bracket(5.0, 0.5).unwrap();
        assert!((p.eval(0.5) - closed).abs() < 1e-15);
        // At q = 1 the bracket polynomial evaluates to t exactly.
        assert_eq!(p.eval(1.0), 5.0);
        assert_eq!(p.coefficient_sum(), BigUint::from(5u8));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly(&[1, 1, 1]).eval(0.0), 1.0);
        assert_eq!(poly(&[1, 1, 1]).eval(1.0), 3.0);
        let q13 = QPolynomial::monomial(13);
        assert!((q13.eval(0.6) - 0.6f64.powi(13)).abs() < 1e-16);
        assert_eq!(QPolynomial::zero().eval(0.7), 0.0);
    }

    #[test]
    fn display_forms() {
        assert_eq!(poly(&[1, 2, 2, 1]).to_string(), "1 + 2*q + 2*q^2 + q^3");
        assert_eq!(QPolynomial::monomial(13).to_string(), "q^13");
        assert_eq!(QPolynomial::zero().to_string(), "0");
        assert_eq!(poly(&[0, 1]).to_string(), "q");
        assert_eq!(poly(&[5]).to_string(), "5");
        assert_eq!(poly(&[0, 0, 3]).to_string(), "3*q^2");
    }

    #[test]
    fn canonical_form() {
        let p = QPolynomial::from_u64_coeffs(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(QPolynomial::from_u64_coeffs(&[0, 0]), QPolynomial::zero());
        assert_eq!(QPolynomial::zero().degree(), None);
    }

    #[test]
    fn json_round_trip() {
        let p = poly(&[1, 0, 3]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"["1","0","3"]"#);
        let back: QPolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    fn arb_poly() -> impl Strategy<Value = QPolynomial> {
        proptest::collection::vec(0u64..50, 0..6).prop_map(|cs| QPolynomial::from_u64_coeffs(&cs))
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn eval_is_ring_homomorphism(a in arb_poly(), b in arb_poly(), q in 0.0f64..1.0) {
            let prod = (&a * &b).eval(q);
            let split = a.eval(q) * b.eval(q);
            let scale = prod.abs().max(split.abs()).max(1.0);
            prop_assert!((prod - split).abs() / scale < 1e-12);
        }
    }
}
