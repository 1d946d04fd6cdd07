//! Exact pair sums S_f(x) = Σ_{m,n≤x} f(mn) by three algorithms, single-sum
//! summatory functions, residual sweeps against the analytic main terms, and
//! log–log exponent fits.

use crate::analytic::Constants;
use crate::arith::{spf_u32, SieveKind, DEFAULT_BRUTE_LIMIT};
use crate::error::{domain, resource, Error, Result};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

const M_CHUNK: u64 = 1024;
const D_CHUNK: u64 = 4096;
const DIRICHLET_CHUNK: u64 = 256;

/// Which point function the pair sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairFn {
    Tau,
    Tau12,
    /// k ≥ 3 after normalization; k = 1 and k = 2 fold into Tau and Tau12.
    Tau1k(u32),
    TauE,
}

impl PairFn {
    /// Folds τ₁₁ into τ and τ₁₂ into the named variant.
    pub fn normalized(self) -> Result<PairFn> {
        match self {
            PairFn::Tau1k(0) => Err(domain("tau1k needs k >= 1")),
            PairFn::Tau1k(1) => Ok(PairFn::Tau),
            PairFn::Tau1k(2) => Ok(PairFn::Tau12),
            other => Ok(other),
        }
    }

    /// Point value from a merged prime-exponent list.
    fn value_of_exponent(self, e: u32) -> u64 {
        match self {
            PairFn::Tau => (e + 1) as u64,
            PairFn::Tau12 => (e / 2 + 1) as u64,
            PairFn::Tau1k(k) => (e / k + 1) as u64,
            PairFn::TauE => crate::arith::small_tau(e),
        }
    }
}

impl fmt::Display for PairFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairFn::Tau => write!(f, "tau"),
            PairFn::Tau12 => write!(f, "tau12"),
            PairFn::Tau1k(k) => write!(f, "tau1k:{k}"),
            PairFn::TauE => write!(f, "taue"),
        }
    }
}

impl FromStr for PairFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<PairFn> {
        match s {
            "tau" => Ok(PairFn::Tau),
            "tau12" => Ok(PairFn::Tau12),
            "taue" => Ok(PairFn::TauE),
            _ => {
                if let Some(k) = s.strip_prefix("tau1k:") {
                    let k: u32 = k
                        .parse()
                        .map_err(|_| domain(format!("bad tau1k parameter in '{s}'")))?;
                    PairFn::Tau1k(k).normalized()
                } else {
                    Err(domain(format!("unknown function '{s}'")))
                }
            }
        }
    }
}

/// Pair-sum algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMethod {
    Auto,
    Brute,
    BrFast,
    Counting,
}

impl fmt::Display for PairMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PairMethod::Auto => "auto",
            PairMethod::Brute => "brute",
            PairMethod::BrFast => "br_fast",
            PairMethod::Counting => "counting",
        };
        write!(f, "{s}")
    }
}

impl FromStr for PairMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<PairMethod> {
        match s {
            "auto" => Ok(PairMethod::Auto),
            "brute" => Ok(PairMethod::Brute),
            "br_fast" => Ok(PairMethod::BrFast),
            "counting" => Ok(PairMethod::Counting),
            _ => Err(domain(format!("unknown method '{s}'"))),
        }
    }
}

/// One exact pair-sum evaluation.
#[derive(Debug, Clone)]
pub struct PairSumRecord {
    pub func: PairFn,
    pub method: PairMethod,
    pub x: u64,
    pub value: u64,
    pub elapsed: Duration,
}

/// Compact per-integer factorizations for the brute loops.
struct FactorLists {
    primes: Vec<u32>,
    exps: Vec<u32>,
    offsets: Vec<u32>,
}

impl FactorLists {
    fn build(limit: u64) -> FactorLists {
        let spf = spf_u32((limit + 1) as usize);
        let mut primes = Vec::new();
        let mut exps = Vec::new();
        let mut offsets = Vec::with_capacity(limit as usize + 2);
        offsets.push(0);
        for n in 0..=limit {
            let mut m = n as u32;
            while m > 1 {
                let p = spf[m as usize];
                let mut e = 0u32;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                primes.push(p);
                exps.push(e);
            }
            offsets.push(primes.len() as u32);
        }
        FactorLists { primes, exps, offsets }
    }

    fn slices(&self, n: u64) -> (&[u32], &[u32]) {
        let lo = self.offsets[n as usize] as usize;
        let hi = self.offsets[n as usize + 1] as usize;
        (&self.primes[lo..hi], &self.exps[lo..hi])
    }

    /// f(m·n) from the two factorizations, for multiplicative f defined by
    /// its prime-power values.
    fn product_value(&self, m: u64, n: u64, func: PairFn) -> u64 {
        let (pa, ea) = self.slices(m);
        let (pb, eb) = self.slices(n);
        let (mut i, mut j) = (0usize, 0usize);
        let mut v = 1u64;
        while i < pa.len() && j < pb.len() {
            match pa[i].cmp(&pb[j]) {
                std::cmp::Ordering::Less => {
                    v *= func.value_of_exponent(ea[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    v *= func.value_of_exponent(eb[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    v *= func.value_of_exponent(ea[i] + eb[j]);
                    i += 1;
                    j += 1;
                }
            }
        }
        while i < pa.len() {
            v *= func.value_of_exponent(ea[i]);
            i += 1;
        }
        while j < pb.len() {
            v *= func.value_of_exponent(eb[j]);
            j += 1;
        }
        v
    }
}

/// Definitional double loop over m ≤ n with doubling; the oracle every other
/// method is checked against. Exact for every supported function.
pub fn pairsum_brute(x: u64, func: PairFn, limit: u64) -> Result<PairSumRecord> {
    let func = func.normalized()?;
    if x < 1 {
        return Err(domain("pair sums need x >= 1"));
    }
    if x > limit {
        return Err(resource(format!("brute pair sum at x={x} exceeds the limit {limit}")));
    }
    let start = Instant::now();
    let lists = FactorLists::build(x);
    let n_chunks = x.div_ceil(M_CHUNK);
    let partials: Vec<u128> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let m_lo = ci * M_CHUNK + 1;
            let m_hi = ((ci + 1) * M_CHUNK).min(x);
            let mut acc = 0u128;
            for m in m_lo..=m_hi {
                acc += lists.product_value(m, m, func) as u128;
                let mut row = 0u128;
                for n in (m + 1)..=x {
                    row += lists.product_value(m, n, func) as u128;
                }
                acc += 2 * row;
            }
            acc
        })
        .collect();
    let total: u128 = partials.iter().sum();
    let value = u64::try_from(total).map_err(|_| Error::Overflow("pairsum_brute"))?;
    Ok(PairSumRecord { func, method: PairMethod::Brute, x, value, elapsed: start.elapsed() })
}

/// D(y) = Σ_{n≤y} τ(n) by the Dirichlet hyperbola: 2·Σ_{d≤√y} ⌊y/d⌋ − ⌊√y⌋².
pub fn divisor_summatory(y: u64) -> Result<u64> {
    if y < 1 {
        return Err(domain("divisor_summatory needs y >= 1"));
    }
    let r = y.isqrt();
    let mut acc: u128 = 0;
    for d in 1..=r {
        acc += (y / d) as u128;
    }
    let total = 2 * acc - (r as u128) * (r as u128);
    u64::try_from(total).map_err(|_| Error::Overflow("divisor_summatory"))
}

/// S_τ(x) = Σ_{l≤x} μ(l)·D(⌊x/l⌋)², exact, with ⌊x/l⌋-block grouping: D(q)²
/// is evaluated once per block while μ accumulates across it.
pub fn pairsum_tau_fast(x: u64) -> Result<PairSumRecord> {
    if x < 1 {
        return Err(domain("pair sums need x >= 1"));
    }
    let start = Instant::now();
    let mut total: i128 = 0;
    let mut block_mu: i64 = 0;
    let mut cur_q: u64 = x;
    let mut cur_d2: i128 = {
        let d = divisor_summatory(x)? as i128;
        d * d
    };
    let seg = crate::arith::SEGMENT_LEN as u64;
    let mut lo = 1u64;
    while lo <= x {
        let hi = (lo + seg).min(x + 1);
        let table = crate::arith::sieve_multfn(SieveKind::Mobius, lo, hi)?;
        for (i, &mu) in table.values.iter().enumerate() {
            let l = lo + i as u64;
            let q = x / l;
            if q != cur_q {
                total += block_mu as i128 * cur_d2;
                block_mu = 0;
                cur_q = q;
                let d = divisor_summatory(q)? as i128;
                cur_d2 = d * d;
            }
            block_mu += mu;
        }
        lo = hi;
    }
    total += block_mu as i128 * cur_d2;
    let value = u64::try_from(total).map_err(|_| Error::Overflow("pairsum_tau_fast"))?;
    Ok(PairSumRecord { func: PairFn::Tau, method: PairMethod::BrFast, x, value, elapsed: start.elapsed() })
}

/// Enumerates divisors g of d² (exponent vectors over the primes of d) and
/// accumulates Σ_g cnt(g)·⌊x/(d²/g)⌋ where cnt(g) = #{m ≤ x : gcd(d², m) = g}
/// by inclusion–exclusion over the primes still unsaturated in g.
fn count_pairs_for_d(x: u64, d2: u64, ps: &[u64], es2: &[u32]) -> u128 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        x: u64,
        d2: u64,
        ps: &[u64],
        es2: &[u32],
        idx: usize,
        g: u64,
        active: &mut [u64; 16],
        n_active: usize,
        total: &mut u128,
    ) {
        if g > x {
            return;
        }
        if idx == ps.len() {
            let q = d2 / g;
            if q > x {
                return;
            }
            let xq = x / q;
            let xg = x / g;
            let mut cnt: i64 = 0;
            for mask in 0u32..(1 << n_active) {
                let mut e = 1u64;
                for (i, &p) in active[..n_active].iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        e *= p;
                    }
                }
                let t = (xg / e) as i64;
                cnt += if mask.count_ones() % 2 == 0 { t } else { -t };
            }
            debug_assert!(cnt >= 0, "coprime count went negative for g={g}");
            *total += cnt as u128 * xq as u128;
            return;
        }
        let p = ps[idx];
        let emax = es2[idx];
        let mut pe = 1u64;
        for j in 0..=emax {
            if j == emax {
                rec(x, d2, ps, es2, idx + 1, g * pe, active, n_active, total);
            } else {
                active[n_active] = p;
                rec(x, d2, ps, es2, idx + 1, g * pe, active, n_active + 1, total);
            }
            if j < emax {
                pe *= p;
            }
        }
    }

    let mut total = 0u128;
    let mut active = [0u64; 16];
    rec(x, d2, ps, es2, 0, 1, &mut active, 0, &mut total);
    total
}

/// S_{τ₁₂}(x) by square-divisor counting: τ₁₂(N) = #{d : d² | N}, so
/// S(x) = Σ_{d≤x} #{(m,n) ≤ x : d² | mn}. Exact and far below the O(x²)
/// brute cost; d-ranges run in parallel with a fixed partition.
pub fn pairsum_tau12_counting(x: u64) -> Result<PairSumRecord> {
    if x < 1 {
        return Err(domain("pair sums need x >= 1"));
    }
    let start = Instant::now();
    let spf = spf_u32((x + 1) as usize);
    let n_chunks = x.div_ceil(D_CHUNK);
    let partials: Vec<u128> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let d_lo = ci * D_CHUNK + 1;
            let d_hi = ((ci + 1) * D_CHUNK).min(x);
            let mut acc = 0u128;
            let mut ps = [0u64; 16];
            let mut es = [0u32; 16];
            for d in d_lo..=d_hi {
                let mut m = d as u32;
                let mut np = 0usize;
                while m > 1 {
                    let p = spf[m as usize];
                    let mut e = 0u32;
                    while m % p == 0 {
                        m /= p;
                        e += 1;
                    }
                    ps[np] = p as u64;
                    es[np] = 2 * e;
                    np += 1;
                }
                acc += count_pairs_for_d(x, d * d, &ps[..np], &es[..np]);
            }
            acc
        })
        .collect();
    let total: u128 = partials.iter().sum();
    let value = u64::try_from(total).map_err(|_| Error::Overflow("pairsum_tau12_counting"))?;
    Ok(PairSumRecord { func: PairFn::Tau12, method: PairMethod::Counting, x, value, elapsed: start.elapsed() })
}

/// Dispatch; `auto` resolves to the fastest method defined for the function.
pub fn pairsum(x: u64, func: PairFn, method: PairMethod, brute_limit: u64) -> Result<PairSumRecord> {
    let func = func.normalized()?;
    let resolved = match (func, method) {
        (_, PairMethod::Brute) => PairMethod::Brute,
        (PairFn::Tau, PairMethod::BrFast | PairMethod::Auto) => PairMethod::BrFast,
        (PairFn::Tau12, PairMethod::Counting | PairMethod::Auto) => PairMethod::Counting,
        (PairFn::Tau1k(_) | PairFn::TauE, PairMethod::Auto) => PairMethod::Brute,
        (f, m) => return Err(domain(format!("method {m} not applicable to {f}"))),
    };
    match resolved {
        PairMethod::Brute => pairsum_brute(x, func, brute_limit),
        PairMethod::BrFast => pairsum_tau_fast(x),
        PairMethod::Counting => pairsum_tau12_counting(x),
        PairMethod::Auto => unreachable!(),
    }
}

/// Σ_{n≤x} τ₁₂(n), computed both as the closed floor sum Σ_{b²≤x} ⌊x/b²⌋ and
/// by totalling the additive sieve, with the two compared before returning.
pub fn summatory_tau12(x: u64) -> Result<u64> {
    if x < 1 {
        return Err(domain("summatory_tau12 needs x >= 1"));
    }
    let mut floor_sum: u64 = 0;
    let mut b = 1u64;
    while b * b <= x {
        floor_sum += x / (b * b);
        b += 1;
    }

    let seg = crate::arith::SEGMENT_LEN as u64;
    let n_segments = x.div_ceil(seg);
    let partials: Vec<u128> = (0..n_segments)
        .into_par_iter()
        .map(|si| {
            let lo = 1 + si * seg;
            let hi = (lo + seg).min(x + 1);
            let t = crate::arith::sieve_multfn(SieveKind::Tau1k(2), lo, hi)
                .expect("segment range is valid");
            t.values.iter().map(|&v| v as u128).sum()
        })
        .collect();
    let sieve_sum: u128 = partials.iter().sum();
    assert_eq!(
        sieve_sum, floor_sum as u128,
        "additive sieve and floor sum disagree at x={x}"
    );
    Ok(floor_sum)
}

/// Partial double Dirichlet sum Σ_{m,n≤X} τ₁₂(mn)·m^{−z}·n^{−w}.
///
/// Terms accumulate per fixed m-chunk and chunks combine in ascending order,
/// so the float result does not depend on the worker count.
pub fn dirichlet_partial(z: f64, w: f64, xmax: u64) -> Result<f64> {
    if z <= 1.0 || w <= 1.0 {
        return Err(domain(format!("dirichlet_partial needs z, w > 1; got ({z}, {w})")));
    }
    if xmax < 1 {
        return Err(domain("dirichlet_partial needs X >= 1"));
    }
    let lists = FactorLists::build(xmax);
    let pw_z: Vec<f64> = (0..=xmax).map(|n| (n.max(1) as f64).powf(-z)).collect();
    let pw_w: Vec<f64> = (0..=xmax).map(|n| (n.max(1) as f64).powf(-w)).collect();
    let n_chunks = xmax.div_ceil(DIRICHLET_CHUNK);
    let partials: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let m_lo = ci * DIRICHLET_CHUNK + 1;
            let m_hi = ((ci + 1) * DIRICHLET_CHUNK).min(xmax);
            let mut acc = 0.0f64;
            for m in m_lo..=m_hi {
                let mut row = 0.0f64;
                for n in 1..=xmax {
                    row += lists.product_value(m, n, PairFn::Tau12) as f64 * pw_w[n as usize];
                }
                acc += pw_z[m as usize] * row;
            }
            acc
        })
        .collect();
    Ok(partials.iter().sum())
}

/// Ordinary least squares of log|r| against log x.
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits log|r| = slope·log x + intercept over the points with r ≠ 0.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, r)| r != 0.0)
        .map(|&(x, r)| (x.ln(), r.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(domain("exponent fit needs at least two nonzero residuals"));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return Err(domain("exponent fit needs at least two distinct x"));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(FitResult { slope, intercept, r_squared })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub x: u64,
    pub value: u64,
    pub main_term: Option<f64>,
    pub residual: Option<f64>,
    pub residual_norm: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fit: Option<FitResult>,
}

/// 17-significant-digit rendering for every real in the CSV.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl SweepResult {
    /// Fixed schema: `x,value,main_term,residual,residual_norm`; value as the
    /// exact decimal integer, reals with 17 significant digits, absent main
    /// terms leave their cells empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value,main_term,residual,residual_norm\n");
        for row in &self.rows {
            let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.x,
                row.value,
                opt(row.main_term),
                opt(row.residual),
                opt(row.residual_norm)
            ));
        }
        out
    }
}

/// value − main in two exact pieces, avoiding the cancellation of forming
/// the f64 of a ~3x² integer first.
fn residual_exact(value: u64, main: f64) -> f64 {
    let rounded = main.round();
    (value as i128 - rounded as i128) as f64 + (rounded - main)
}

fn main_term_for(func: PairFn, x: u64, consts: &Constants) -> Option<f64> {
    match func {
        PairFn::Tau => Some(consts.main_term_tau(x as f64)),
        PairFn::Tau12 | PairFn::TauE => Some(consts.main_term_tau12(x as f64)),
        PairFn::Tau1k(_) => None,
    }
}

fn build_rows(values: Vec<(u64, u64)>, func: Option<PairFn>, consts: &Constants, single: bool) -> SweepResult {
    let rows: Vec<SweepRow> = values
        .into_iter()
        .map(|(x, value)| {
            let main_term = if single {
                Some(consts.main_term_tau12_single(x as f64))
            } else {
                main_term_for(func.unwrap(), x, consts)
            };
            let residual = main_term.map(|m| residual_exact(value, m));
            let residual_norm = residual.map(|r| r / (x as f64).powf(10.0 / 7.0));
            SweepRow { x, value, main_term, residual, residual_norm }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.residual.map(|res| (r.x as f64, res)))
        .filter(|&(_, r)| r != 0.0)
        .collect();
    let fit = if pts.len() >= 4 { fit_exponent(&pts).ok() } else { None };
    SweepResult { rows, fit }
}

/// Runs the pair sum over an ascending grid and attaches main terms,
/// residuals and the fitted exponent. The brute limit is raised to the grid
/// maximum: an explicit grid is taken as consent to pay for it.
pub fn sweep(func: PairFn, grid: &[u64], method: PairMethod, consts: &Constants) -> Result<SweepResult> {
    let func = func.normalized()?;
    if grid.is_empty() {
        return Err(domain("sweep needs a non-empty grid"));
    }
    let mut grid: Vec<u64> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let limit = *grid.last().unwrap();
    let values: Vec<(u64, u64)> = grid
        .par_iter()
        .map(|&x| pairsum(x, func, method, limit.max(DEFAULT_BRUTE_LIMIT)).map(|r| (x, r.value)))
        .collect::<Result<_>>()?;
    Ok(build_rows(values, Some(func), consts, false))
}

/// Residual sweep for the single sum Σ_{n≤x} τ₁₂(n) against ζ(2)x + ζ(½)√x.
pub fn gk_sweep(grid: &[u64], consts: &Constants) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(domain("sweep needs a non-empty grid"));
    }
    let mut grid: Vec<u64> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let values: Vec<(u64, u64)> = grid
        .par_iter()
        .map(|&x| summatory_tau12(x).map(|v| (x, v)))
        .collect::<Result<_>>()?;
    Ok(build_rows(values, None, consts, true))
}

/// Smallest x where Σ τ^(e)(mn) and Σ τ₁₂(mn) part ways, by incrementally
/// extending both pair sums one column at a time.
pub fn first_taue_divergence(xmax: u64) -> Result<Option<u64>> {
    if xmax < 1 {
        return Err(domain("need xmax >= 1"));
    }
    let lists = FactorLists::build(xmax);
    let mut s_e: u128 = 0;
    let mut s_12: u128 = 0;
    for x in 1..=xmax {
        let mut row_e = 0u128;
        let mut row_12 = 0u128;
        for m in 1..x {
            row_e += lists.product_value(m, x, PairFn::TauE) as u128;
            row_12 += lists.product_value(m, x, PairFn::Tau12) as u128;
        }
        s_e += 2 * row_e + lists.product_value(x, x, PairFn::TauE) as u128;
        s_12 += 2 * row_12 + lists.product_value(x, x, PairFn::Tau12) as u128;
        if s_e != s_12 {
            return Ok(Some(x));
        }
    }
    Ok(None)
}
