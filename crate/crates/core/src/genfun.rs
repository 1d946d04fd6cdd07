//! Exact truncated bivariate power series over BigInt coefficients, used to
//! verify the closed form of Σ τ₁₂(p^{a+b}) xᵃ yᵇ and the structural pattern
//! behind the ζ-product factorization of the τ₁ₖ double series.

use crate::arith::small_tau;
use crate::error::{domain, Result};
use num_bigint::BigInt;

/// Truncated bivariate series: exact coefficients on the full
/// `(T+1) × (T+1)` grid, `coeff(a, b) = [xᵃ yᵇ]`.
///
/// Products and unit-series inverses are exact at every grid index because a
/// convolution at `(a, b)` only reads indices dominated by `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPoly {
    order: usize,
    coeffs: Vec<BigInt>,
}

impl BiPoly {
    pub fn zero(order: usize) -> Self {
        BiPoly { order, coeffs: vec![BigInt::ZERO; (order + 1) * (order + 1)] }
    }

    pub fn one(order: usize) -> Self {
        let mut p = Self::zero(order);
        p.coeffs[0] = BigInt::from(1);
        p
    }

    /// Builds a series from a coefficient rule.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut p = Self::zero(order);
        for a in 0..=order {
            for b in 0..=order {
                p.coeffs[a * (order + 1) + b] = f(a, b);
            }
        }
        p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, a: usize, b: usize) -> &BigInt {
        &self.coeffs[a * (self.order + 1) + b]
    }

    /// Adds `c · xᵃyᵇ`; monomials beyond the truncation order are dropped,
    /// matching series semantics.
    pub fn with_monomial(mut self, a: usize, b: usize, c: i64) -> Self {
        if a <= self.order && b <= self.order {
            self.coeffs[a * (self.order + 1) + b] += BigInt::from(c);
        }
        self
    }

    /// `1 − xⁱyʲ` at the given order.
    pub fn one_minus_monomial(order: usize, i: usize, j: usize) -> Self {
        Self::one(order).with_monomial(i, j, -1)
    }

    pub fn add(&self, rhs: &BiPoly) -> BiPoly {
        assert_eq!(self.order, rhs.order);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        BiPoly { order: self.order, coeffs }
    }

    pub fn sub(&self, rhs: &BiPoly) -> BiPoly {
        assert_eq!(self.order, rhs.order);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        BiPoly { order: self.order, coeffs }
    }

    /// Truncated product.
    pub fn mul(&self, rhs: &BiPoly) -> BiPoly {
        assert_eq!(self.order, rhs.order);
        let t = self.order;
        let mut out = BiPoly::zero(t);
        for i in 0..=t {
            for j in 0..=t {
                let c = self.coeff(i, j);
                if c.sign() == num_bigint::Sign::NoSign {
                    continue;
                }
                for k in 0..=(t - i) {
                    for l in 0..=(t - j) {
                        let r = rhs.coeff(k, l);
                        if r.sign() != num_bigint::Sign::NoSign {
                            out.coeffs[(i + k) * (t + 1) + (j + l)] += c * r;
                        }
                    }
                }
            }
        }
        out
    }

    /// Inverse series; defined only when the constant term is ±1.
    pub fn inverse(&self) -> Result<BiPoly> {
        let t = self.order;
        let c0 = self.coeff(0, 0).clone();
        if c0 != BigInt::from(1) && c0 != BigInt::from(-1) {
            return Err(domain(format!(
                "series with constant term {c0} is not invertible over the integers"
            )));
        }
        let mut inv = BiPoly::zero(t);
        for a in 0..=t {
            for b in 0..=t {
                let mut acc = if a == 0 && b == 0 { BigInt::from(1) } else { BigInt::ZERO };
                for i in 0..=a {
                    for j in 0..=b {
                        if i == 0 && j == 0 {
                            continue;
                        }
                        let s = self.coeff(i, j);
                        if s.sign() != num_bigint::Sign::NoSign {
                            acc -= s * inv.coeff(a - i, b - j);
                        }
                    }
                }
                inv.coeffs[a * (t + 1) + b] = acc * &c0;
            }
        }
        Ok(inv)
    }

    /// First index where the two series differ, scanning anti-diagonals in
    /// ascending total degree and larger x-power first within a degree.
    pub fn first_difference(&self, rhs: &BiPoly) -> Option<(usize, usize)> {
        assert_eq!(self.order, rhs.order);
        let t = self.order;
        for s in 0..=(2 * t) {
            for a in (s.saturating_sub(t)..=s.min(t)).rev() {
                let b = s - a;
                if self.coeff(a, b) != rhs.coeff(a, b) {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

/// Which per-prime-power value family a direct series is built from. The
/// coefficient at `(a, b)` depends only on the exponent `a + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// τ₁ₖ(p^c) = ⌊c/k⌋ + 1; `Tau1k(2)` is the headline τ₁₂ series and
    /// `Tau1k(1)` degenerates to τ with coefficient a + b + 1.
    Tau1k(u32),
    /// τ^(e)(p^c) = τ(c).
    TauE,
}

fn prime_power_value(kind: SeriesKind, c: usize) -> Result<u64> {
    match kind {
        SeriesKind::Tau1k(0) => Err(domain("series kind tau1k needs k >= 1")),
        SeriesKind::Tau1k(k) => Ok((c as u64) / (k as u64) + 1),
        SeriesKind::TauE => Ok(small_tau(c as u32)),
    }
}

/// The double series Σ_{a,b} f(p^{a+b}) xᵃ yᵇ truncated at the given order.
pub fn direct_series(kind: SeriesKind, order: usize) -> Result<BiPoly> {
    prime_power_value(kind, 0)?;
    Ok(BiPoly::from_fn(order, |a, b| {
        BigInt::from(prime_power_value(kind, a + b).unwrap())
    }))
}

/// Multiplies `numer` by the inverse series of every factor `1 − xⁱyʲ`.
pub fn expand_rational(numer: &BiPoly, factors: &[(usize, usize)]) -> Result<BiPoly> {
    let t = numer.order();
    let mut out = numer.clone();
    for &(i, j) in factors {
        if i == 0 && j == 0 {
            return Err(domain("denominator factor (1 - x^0 y^0) vanishes"));
        }
        out = out.mul(&BiPoly::one_minus_monomial(t, i, j).inverse()?);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ClosedFormReport {
    pub pass: bool,
    pub first_mismatch: Option<(usize, usize)>,
}

/// Verifies both closed forms of the τ₁₂ generating function against the
/// direct series, coefficient-exactly to the given order:
///
///   (1 + xy − x²y − xy²) / ((1−x)(1−x²)(1−y)(1−y²))
///   (1 − x²y − xy² − x²y² + x³y² + x²y³) / ((1−x)(1−x²)(1−y)(1−y²)(1−xy))
pub fn check_tau12_closed_form(order: usize) -> Result<ClosedFormReport> {
    if order < 2 {
        return Err(domain("closed-form check needs order >= 2"));
    }
    let direct = direct_series(SeriesKind::Tau1k(2), order)?;

    let numer1 = BiPoly::one(order)
        .with_monomial(1, 1, 1)
        .with_monomial(2, 1, -1)
        .with_monomial(1, 2, -1);
    let form1 = expand_rational(&numer1, &[(1, 0), (2, 0), (0, 1), (0, 2)])?;

    let numer2 = BiPoly::one(order)
        .with_monomial(2, 1, -1)
        .with_monomial(1, 2, -1)
        .with_monomial(2, 2, -1)
        .with_monomial(3, 2, 1)
        .with_monomial(2, 3, 1);
    let form2 = expand_rational(&numer2, &[(1, 0), (2, 0), (0, 1), (0, 2), (1, 1)])?;

    let mismatch = form1
        .first_difference(&direct)
        .or_else(|| form2.first_difference(&direct));
    Ok(ClosedFormReport { pass: mismatch.is_none(), first_mismatch: mismatch })
}

#[derive(Debug, Clone)]
pub struct GPatternReport {
    pub pass: bool,
    pub first_violation: Option<(usize, usize)>,
}

/// Checks the banded coefficient pattern of g = (1−x)(1−y)·Σ τ₁ₖ(p^{a+b})xᵃyᵇ
/// on 1 ≤ a+b ≤ min(k+1, 2k−1):
///
///   0 for a+b < k,  1 for a+b = k,  0 for a+b = k+1 with ab = 0,
///   −1 for a+b = k+1 with ab > 0.
///
/// The pattern is the consequence of τ₁ₖ(p^a) being 1 below exponent k and 2
/// on exponents k..2k, so its two degree-(k+1) cases only apply for k ≥ 2;
/// at k = 1 the checked band stops at a+b = 1 (g(2,0) = 1 and g(1,1) = 0
/// there, visibly off the table). The constant term g(0,0) = 1 and indices
/// above the band are outside the pattern and deliberately unconstrained.
pub fn check_tau1k_g_pattern(k: u32, order: usize) -> Result<GPatternReport> {
    if k == 0 {
        return Err(domain("g-pattern check needs k >= 1"));
    }
    if order < k as usize + 2 {
        return Err(domain(format!("g-pattern check needs order >= {}", k + 2)));
    }
    let f = direct_series(SeriesKind::Tau1k(k), order)?;
    let g = f
        .mul(&BiPoly::one_minus_monomial(order, 1, 0))
        .mul(&BiPoly::one_minus_monomial(order, 0, 1));
    let k = k as usize;
    let band_top = (k + 1).min(2 * k - 1);
    for s in 1..=band_top {
        for a in (0..=s.min(order)).rev() {
            let b = s - a;
            if b > order {
                continue;
            }
            let expected: i64 = if s < k {
                0
            } else if s == k {
                1
            } else if a == 0 || b == 0 {
                0
            } else {
                -1
            };
            if *g.coeff(a, b) != BigInt::from(expected) {
                return Ok(GPatternReport { pass: false, first_violation: Some((a, b)) });
            }
        }
    }
    Ok(GPatternReport { pass: true, first_violation: None })
}

#[derive(Debug, Clone)]
pub struct HDegreeReport {
    pub pass: bool,
    /// Minimal total degree of a nonzero coefficient of h − 1, or None when
    /// h ≡ 1 to the checked order (the k = 1 case).
    pub min_degree: Option<usize>,
}

/// Computes the correction series
///
///   h = f · (1−x)(1−y) · Π_{l=0..k} (1 − xˡ y^{k−l}) / Π_{l=1..k} (1 − xˡ y^{k+1−l})
///
/// for f = Σ τ₁ₖ(p^{a+b})xᵃyᵇ and asserts h(0,0) = 1 with every other nonzero
/// coefficient at total degree ≥ k+2 (degree claims restricted to a+b ≤ order).
pub fn check_tau1k_h_degree(k: u32, order: usize) -> Result<HDegreeReport> {
    if k == 0 {
        return Err(domain("h-degree check needs k >= 1"));
    }
    if order < k as usize + 4 {
        return Err(domain(format!(
            "order {order} too small to certify the degree bound; need >= {}",
            k + 4
        )));
    }
    let ku = k as usize;
    let mut h = direct_series(SeriesKind::Tau1k(k), order)?
        .mul(&BiPoly::one_minus_monomial(order, 1, 0))
        .mul(&BiPoly::one_minus_monomial(order, 0, 1));
    for l in 0..=ku {
        h = h.mul(&BiPoly::one_minus_monomial(order, l, ku - l));
    }
    for l in 1..=ku {
        h = h.mul(&BiPoly::one_minus_monomial(order, l, ku + 1 - l).inverse()?);
    }

    if *h.coeff(0, 0) != BigInt::from(1) {
        return Ok(HDegreeReport { pass: false, min_degree: Some(0) });
    }
    let mut min_degree = None;
    for a in 0..=order {
        for b in 0..=order {
            if a + b == 0 || a + b > order {
                continue;
            }
            if h.coeff(a, b).sign() != num_bigint::Sign::NoSign {
                min_degree = Some(min_degree.map_or(a + b, |m: usize| m.min(a + b)));
            }
        }
    }
    let pass = min_degree.is_none_or(|m| m >= ku + 2);
    Ok(HDegreeReport { pass, min_degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn geometric_series() {
        let g = expand_rational(&BiPoly::one(6), &[(1, 0)]).unwrap();
        for a in 0..=6 {
            for b in 0..=6 {
                assert_eq!(*g.coeff(a, b), int(if b == 0 { 1 } else { 0 }));
            }
        }
    }

    #[test]
    fn tau_series_closed_form() {
        // (1 - xy) / ((1-x)^2 (1-y)^2) has coefficients a + b + 1
        let numer = BiPoly::one(8).with_monomial(1, 1, -1);
        let f = expand_rational(&numer, &[(1, 0), (1, 0), (0, 1), (0, 1)]).unwrap();
        for a in 0..=8 {
            for b in 0..=8 {
                assert_eq!(*f.coeff(a, b), int((a + b + 1) as i64));
            }
        }
        assert_eq!(f, direct_series(SeriesKind::Tau1k(1), 8).unwrap());
    }

    #[test]
    fn direct_series_values() {
        let d = direct_series(SeriesKind::Tau1k(2), 6).unwrap();
        assert_eq!(*d.coeff(0, 0), int(1));
        assert_eq!(*d.coeff(1, 1), int(2));
        let t = direct_series(SeriesKind::Tau1k(1), 6).unwrap();
        assert_eq!(*t.coeff(2, 1), int(4));
        let e = direct_series(SeriesKind::TauE, 6).unwrap();
        assert_eq!(*e.coeff(2, 3), int(2)); // tau(5) = 2
        assert!(direct_series(SeriesKind::Tau1k(0), 4).is_err());
    }

    #[test]
    fn anti_diagonal_constancy() {
        for kind in [SeriesKind::Tau1k(2), SeriesKind::Tau1k(3), SeriesKind::TauE] {
            let d = direct_series(kind, 9).unwrap();
            for s in 0..=9 {
                for a in 0..=s {
                    assert_eq!(d.coeff(a, s - a), d.coeff(0, s));
                }
            }
        }
    }

    #[test]
    fn closed_form_small_orders() {
        for t in 2..=30 {
            let r = check_tau12_closed_form(t).unwrap();
            assert!(r.pass, "mismatch {:?} at order {t}", r.first_mismatch);
        }
        assert!(check_tau12_closed_form(1).is_err());
    }

    #[test]
    fn perturbed_numerator_fails_at_2_1() {
        // numerator 1 + xy instead of 1 + xy - x^2 y - x y^2
        let direct = direct_series(SeriesKind::Tau1k(2), 6).unwrap();
        let bad = expand_rational(
            &BiPoly::one(6).with_monomial(1, 1, 1),
            &[(1, 0), (2, 0), (0, 1), (0, 2)],
        )
        .unwrap();
        assert_eq!(bad.first_difference(&direct), Some((2, 1)));
    }

    #[test]
    fn g_pattern_small_k() {
        for k in 1..=6 {
            let r = check_tau1k_g_pattern(k, k as usize + 4).unwrap();
            assert!(r.pass, "k={k} violation {:?}", r.first_violation);
        }
        assert!(check_tau1k_g_pattern(0, 8).is_err());
        // constant-term edge case: g(0,0) = 1 stays outside the pattern
        let f = direct_series(SeriesKind::Tau1k(1), 4).unwrap();
        let g = f
            .mul(&BiPoly::one_minus_monomial(4, 1, 0))
            .mul(&BiPoly::one_minus_monomial(4, 0, 1));
        assert_eq!(*g.coeff(0, 0), int(1));
        assert!(check_tau1k_g_pattern(1, 4).unwrap().pass);
        // for k = 1 the degree-2 cases of the table genuinely break: the
        // premise (value 2 on exponents k..2k) no longer covers exponent k+1
        assert_eq!(*g.coeff(2, 0), int(1)); // table would say 0
        assert_eq!(*g.coeff(1, 1), int(0)); // table would say -1
    }

    #[test]
    fn h_degree_reports() {
        let r1 = check_tau1k_h_degree(1, 8).unwrap();
        assert!(r1.pass);
        assert_eq!(r1.min_degree, None); // h == 1 exactly

        let r2 = check_tau1k_h_degree(2, 8).unwrap();
        assert!(r2.pass);
        assert_eq!(r2.min_degree, Some(4));

        let r3 = check_tau1k_h_degree(3, 10).unwrap();
        assert!(r3.pass);
        assert!(r3.min_degree.unwrap() >= 5);

        assert!(check_tau1k_h_degree(3, 6).is_err()); // truncation too small
    }

    #[test]
    fn inverse_requires_unit_constant() {
        assert!(BiPoly::zero(3).inverse().is_err());
        let two = BiPoly::one(3).with_monomial(0, 0, 1);
        assert!(two.inverse().is_err());
        assert!(expand_rational(&BiPoly::one(3), &[(0, 0)]).is_err());
    }

    #[test]
    fn remultiplication_recovers_numerator() {
        let numer = BiPoly::one(7)
            .with_monomial(1, 1, 1)
            .with_monomial(2, 1, -1)
            .with_monomial(1, 2, -1);
        let factors = [(1, 0), (2, 0), (0, 1), (0, 2)];
        let mut back = expand_rational(&numer, &factors).unwrap();
        for &(i, j) in &factors {
            back = back.mul(&BiPoly::one_minus_monomial(7, i, j));
        }
        assert_eq!(back, numer);
    }

    fn small_poly(order: usize) -> impl Strategy<Value = BiPoly> {
        proptest::collection::vec(-3i64..=3, (order + 1) * (order + 1)).prop_map(move |v| {
            let mut p = BiPoly::zero(order);
            for (i, c) in v.into_iter().enumerate() {
                p.coeffs[i] = int(c);
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mul_associative(a in small_poly(4), b in small_poly(4), c in small_poly(4)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn mul_commutative_and_distributive(a in small_poly(4), b in small_poly(4), c in small_poly(4)) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn inverse_is_two_sided(mut a in small_poly(4)) {
            a.coeffs[0] = int(1);
            let inv = a.inverse().unwrap();
            prop_assert_eq!(a.mul(&inv), BiPoly::one(4));
            prop_assert_eq!(inv.mul(&a), BiPoly::one(4));
        }
    }
}
