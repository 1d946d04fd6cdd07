//! Real-argument ζ via Euler–Maclaurin, Euler products for the pair-sum
//! main-term constants C1 and C2 (three routes each), and the main-term
//! evaluators used by the sweeps.

// negated float comparisons here are deliberate: NaN must land on the error path
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use crate::arith::{mu_log_sum, mu_log_tail_bound, primes_up_to};
use crate::error::{domain, Result};
use crate::genfun::SeriesKind;

/// B_{2k}/(2k)! for k = 1..4.
const B_OVER_FACT: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
/// |B_10|/10!, used for the truncation bound.
const B10_OVER_FACT: f64 = 2.08767569878681e-8;

fn zeta_em(s: f64, n: usize) -> f64 {
    let mut sum = 0.0f64;
    for j in (1..n).rev() {
        sum += (j as f64).powf(-s);
    }
    let nf = n as f64;
    let mut value = sum + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    let mut poch = s; // s(s+1)...(s+2k-2), grown two factors per term
    let mut npow = nf.powf(-s - 1.0);
    for (k, c) in B_OVER_FACT.iter().enumerate() {
        value += c * poch * npow;
        let m = s + 2.0 * k as f64;
        poch *= (m + 1.0) * (m + 2.0);
        npow /= nf * nf;
    }
    value
}

fn zeta_em_bound(s: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mut poch = 1.0f64;
    for i in 0..9 {
        poch *= (s + i as f64).abs();
    }
    B10_OVER_FACT * poch * nf.powf(-s - 9.0)
}

/// ζ(s) for real s > 0, |s − 1| > 1e−6, to absolute accuracy `tol` (≥ 1e−13).
///
/// Euler–Maclaurin with Bernoulli corrections through B₈; the cut starts at
/// max(100, ⌈10/|s−1|⌉) and doubles until the B₁₀ remainder bound clears the
/// tolerance.
pub fn zeta_real(s: f64, tol: f64) -> Result<f64> {
    if !(tol >= 1e-13) {
        return Err(domain(format!("zeta tolerance {tol} below the 1e-13 floor")));
    }
    if s <= 0.0 || (s - 1.0).abs() <= 1e-6 {
        return Err(domain(format!("zeta_real argument {s} outside (0, inf) \\ {{1}}")));
    }
    let mut n = (100.0f64).max((10.0 / (s - 1.0).abs()).ceil()) as usize;
    loop {
        if zeta_em_bound(s, n) < tol {
            return Ok(zeta_em(s, n));
        }
        n *= 2;
    }
}

/// ζ(s) at an explicit Euler–Maclaurin cut; the re-evaluation oracle used by
/// the stability checks.
pub fn zeta_real_at(s: f64, cut: usize) -> Result<f64> {
    if s <= 0.0 || (s - 1.0).abs() <= 1e-6 {
        return Err(domain(format!("zeta_real argument {s} outside (0, inf) \\ {{1}}")));
    }
    if cut < 2 {
        return Err(domain("euler-maclaurin cut must be >= 2"));
    }
    Ok(zeta_em(s, cut))
}

fn gamma_at(n: usize) -> f64 {
    let nf = n as f64;
    let mut h = 0.0f64;
    let mut comp = 0.0f64;
    for j in (1..=n).rev() {
        let y = 1.0 / j as f64 - comp;
        let t = h + y;
        comp = (t - h) - y;
        h = t;
    }
    let n2 = nf * nf;
    h - nf.ln() - 0.5 / nf + 1.0 / (12.0 * n2) - 1.0 / (120.0 * n2 * n2)
        + 1.0 / (252.0 * n2 * n2 * n2)
}

/// The Euler–Mascheroni constant to ~1e−13 absolute accuracy.
pub fn euler_gamma() -> f64 {
    gamma_at(2048)
}

/// Closed-form local factor (1 + xy − x²y − xy²)/((1−x)(1−x²)(1−y)(1−y²))
/// at x = p^{−z}, y = p^{−w}.
pub fn local_factor(p: u64, z: f64, w: f64) -> Result<f64> {
    if p < 2 {
        return Err(domain("local factor needs a prime p >= 2"));
    }
    let lp = (p as f64).ln();
    let x = (-z * lp).exp();
    let y = (-w * lp).exp();
    if !(x < 1.0) || !(y < 1.0) {
        return Err(domain(format!("local factor diverges: p^-z={x}, p^-w={y}")));
    }
    let numer = 1.0 + x * y - x * x * y - x * y * y;
    let denom = (1.0 - x) * (1.0 - x * x) * (1.0 - y) * (1.0 - y * y);
    Ok(numer / denom)
}

/// Direct-summation oracle for a local factor: Σ_{a,b} f(p^{a+b}) p^{−az−bw}
/// summed until the anti-diagonal terms are negligible.
pub fn local_series(kind: SeriesKind, p: u64, z: f64, w: f64) -> Result<f64> {
    let lp = (p as f64).ln();
    let x = (-z * lp).exp();
    let y = (-w * lp).exp();
    if !(x < 1.0) || !(y < 1.0) {
        return Err(domain("local series diverges"));
    }
    let value = |c: usize| -> f64 {
        match kind {
            SeriesKind::Tau1k(k) => (c as u64 / k as u64 + 1) as f64,
            SeriesKind::TauE => crate::arith::small_tau(c as u32) as f64,
        }
    };
    let m = x.max(y);
    let mut total = 0.0f64;
    let mut xa = vec![1.0f64];
    for c in 0..1000usize {
        // sum over a+b = c
        let mut diag = 0.0;
        let mut yb = 1.0;
        for a in (0..=c).rev() {
            diag += xa[a] * yb;
            yb *= y;
        }
        total += value(c) * diag;
        let bound = value(c + 1) * (c as f64 + 2.0) * m.powi(c as i32 + 1);
        if c > 4 && bound < 1e-18 * total.abs() {
            break;
        }
        xa.push(xa[c] * x);
    }
    Ok(total)
}

/// How an Euler-product constant was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    RawProduct,
    ZetaAccelerated,
    ResidueForm,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::RawProduct => "raw_product",
            Method::ZetaAccelerated => "zeta_accelerated",
            Method::ResidueForm => "residue_form",
        }
    }
}

/// A computed real constant with its prime cutoff and a heuristic
/// (integral-comparison) bound on the dropped prime tail.
#[derive(Debug, Clone)]
pub struct ConstantResult {
    pub name: String,
    pub method: Method,
    pub prime_cutoff: u64,
    pub value: f64,
    pub tail_bound: f64,
}

impl ConstantResult {
    /// `name,method,P,value (17 significant digits),tail_bound`
    pub fn line(&self) -> String {
        format!(
            "{},{},{},{:.16e},{:.3e}",
            self.name,
            self.method.label(),
            self.prime_cutoff,
            self.value,
            self.tail_bound
        )
    }

    /// Two results for the same constant must agree within the sum of their
    /// tail bounds plus a small float slack.
    pub fn agrees_with(&self, other: &ConstantResult) -> bool {
        (self.value - other.value).abs() <= self.tail_bound + other.tail_bound + 1e-9
    }
}

fn zeta(s: f64) -> f64 {
    zeta_real(s, 1e-13).expect("zeta at a fixed interior point")
}

/// C1 = res_{z=w=1} of the τ₁₂ double series kernel, as a prime product.
///
/// raw: Π (1−p⁻¹)²·f(p⁻¹,p⁻¹), locals 1 + 3p⁻² + O(p⁻³);
/// zeta_accelerated: ζ(2)³·Π (1−p⁻²)³(1−p⁻¹)²·f, locals 1 − 2p⁻³ + O(p⁻⁴);
/// residue_form: π⁶/216 times the same product (ζ(2)³ written as π⁶/216).
pub fn euler_c1(p_limit: u64, method: Method) -> ConstantResult {
    let primes = primes_up_to(p_limit);
    let pf = p_limit.max(2) as f64;
    let (value, tail_bound) = match method {
        Method::RawProduct => {
            let mut prod = 1.0f64;
            for &p in &primes {
                let u = 1.0 / p as f64;
                prod *= (1.0 - u) * (1.0 - u) * local_factor(p, 1.0, 1.0).unwrap();
            }
            (prod, prod.abs() * 3.0 / pf)
        }
        Method::ZetaAccelerated | Method::ResidueForm => {
            let mut prod = 1.0f64;
            for &p in &primes {
                let u = 1.0 / p as f64;
                let v = 1.0 - u * u;
                prod *= v * v * v * (1.0 - u) * (1.0 - u) * local_factor(p, 1.0, 1.0).unwrap();
            }
            let pref = if method == Method::ResidueForm {
                std::f64::consts::PI.powi(6) / 216.0
            } else {
                let z2 = zeta(2.0);
                z2 * z2 * z2
            };
            let value = pref * prod;
            (value, value.abs() / (pf * pf))
        }
    };
    ConstantResult { name: "C1".into(), method, prime_cutoff: p_limit, value, tail_bound }
}

/// C2 = 2·res_{z=1, w=1/2}, as a prime product.
///
/// raw: 2ζ(½)·Π (1−p⁻¹)²(1−p^{−1/2})·f(p⁻¹,p^{−1/2}), locals
/// 1 + p^{−3/2} + O(p^{−5/2}) — slow convergence;
/// zeta_accelerated: 2ζ(½)ζ(3/2)·Π (1−p^{−3/2})·(same locals), now
/// 1 − p^{−5/2} + O(p⁻³);
/// residue_form: (π²/3)ζ(½)ζ(3/2)·Π of the G(1,½) locals
/// (1−p⁻¹)²(1−p^{−1/2})(1−p⁻²)(1−p^{−3/2})·f.
pub fn euler_c2(p_limit: u64, method: Method) -> ConstantResult {
    let primes = primes_up_to(p_limit);
    let pf = p_limit.max(2) as f64;
    let (value, tail_bound) = match method {
        Method::RawProduct => {
            let mut prod = 1.0f64;
            for &p in &primes {
                let u = 1.0 / p as f64;
                let r = (p as f64).sqrt().recip();
                prod *= (1.0 - u) * (1.0 - u) * (1.0 - r) * local_factor(p, 1.0, 0.5).unwrap();
            }
            let value = 2.0 * zeta(0.5) * prod;
            (value, value.abs() * 2.0 / pf.sqrt())
        }
        Method::ZetaAccelerated => {
            let mut prod = 1.0f64;
            for &p in &primes {
                let u = 1.0 / p as f64;
                let r = (p as f64).sqrt().recip();
                prod *= (1.0 - u * r)
                    * (1.0 - u)
                    * (1.0 - u)
                    * (1.0 - r)
                    * local_factor(p, 1.0, 0.5).unwrap();
            }
            let value = 2.0 * zeta(0.5) * zeta(1.5) * prod;
            (value, value.abs() / (pf * pf.sqrt()))
        }
        Method::ResidueForm => {
            let mut prod = 1.0f64;
            for &p in &primes {
                let u = 1.0 / p as f64;
                let r = (p as f64).sqrt().recip();
                prod *= (1.0 - u)
                    * (1.0 - u)
                    * (1.0 - r)
                    * (1.0 - u * u)
                    * (1.0 - u * r)
                    * local_factor(p, 1.0, 0.5).unwrap();
            }
            let value = std::f64::consts::PI.powi(2) / 3.0 * zeta(0.5) * zeta(1.5) * prod;
            (value, value.abs() * (1.0 / pf + 1.0 / (pf * pf.sqrt())))
        }
    };
    ConstantResult { name: "C2".into(), method, prime_cutoff: p_limit, value, tail_bound }
}

/// Partial Euler product Π_{p ≤ P} f(p^{−z}, p^{−w}) for the double Dirichlet
/// series; converges to F(z, w) for z, w > 1.
pub fn euler_product_f(z: f64, w: f64, p_limit: u64) -> Result<f64> {
    if z <= 1.0 || w <= 1.0 {
        return Err(domain(format!("euler product needs z, w > 1; got ({z}, {w})")));
    }
    let mut prod = 1.0f64;
    for p in primes_up_to(p_limit) {
        prod *= local_factor(p, z, w)?;
    }
    Ok(prod)
}

/// One-time bundle of every constant the sweeps need: γ, ζ values, the three
/// Möbius log-sums A_j at a configured cutoff, and C1/C2 at a configured
/// prime cutoff (zeta-accelerated).
#[derive(Debug, Clone)]
pub struct Constants {
    pub gamma: f64,
    pub zeta2: f64,
    pub zeta_half: f64,
    pub c1: ConstantResult,
    pub c2: ConstantResult,
    /// A_j = Σ_{l ≤ mu_limit} μ(l) logʲ(l)/l² for j = 0, 1, 2.
    pub a: [f64; 3],
    pub a_tail: [f64; 3],
    pub prime_cutoff: u64,
    pub mu_limit: u64,
}

impl Constants {
    pub const DEFAULT_PRIME_CUTOFF: u64 = 1_000_000;
    pub const DEFAULT_MU_LIMIT: u64 = 10_000_000;

    pub fn new(prime_cutoff: u64, mu_limit: u64) -> Result<Constants> {
        let a = [
            mu_log_sum(0, mu_limit)?,
            mu_log_sum(1, mu_limit)?,
            mu_log_sum(2, mu_limit)?,
        ];
        Ok(Constants {
            gamma: euler_gamma(),
            zeta2: zeta_real(2.0, 1e-13)?,
            zeta_half: zeta_real(0.5, 1e-13)?,
            c1: euler_c1(prime_cutoff, Method::ZetaAccelerated),
            c2: euler_c2(prime_cutoff, Method::ZetaAccelerated),
            a,
            a_tail: [
                mu_log_tail_bound(0, mu_limit),
                mu_log_tail_bound(1, mu_limit),
                mu_log_tail_bound(2, mu_limit),
            ],
            prime_cutoff,
            mu_limit,
        })
    }

    pub fn with_defaults() -> Constants {
        Self::new(Self::DEFAULT_PRIME_CUTOFF, Self::DEFAULT_MU_LIMIT)
            .expect("default constants")
    }

    /// Main term of Σ_{m,n≤x} τ(mn):
    /// x²·[A₀(log²x + 2(2γ−1)log x + (2γ−1)²) − A₁(2 log x + 2(2γ−1)) + A₂].
    pub fn main_term_tau(&self, x: f64) -> f64 {
        let l = x.ln();
        let c = 2.0 * self.gamma - 1.0;
        x * x
            * (self.a[0] * (l * l + 2.0 * c * l + c * c) - self.a[1] * (2.0 * l + 2.0 * c)
                + self.a[2])
    }

    /// Main term of Σ_{m,n≤x} τ₁₂(mn): C1·x² + C2·x^{3/2}.
    pub fn main_term_tau12(&self, x: f64) -> f64 {
        self.c1.value * x * x + self.c2.value * x * x.sqrt()
    }

    /// Main term of the single sum Σ_{n≤x} τ₁₂(n): ζ(2)·x + ζ(½)·√x.
    pub fn main_term_tau12_single(&self, x: f64) -> f64 {
        self.zeta2 * x + self.zeta_half * x.sqrt()
    }
}
