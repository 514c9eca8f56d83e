//! Log-space evaluation of the counting and second-moment quantities for
//! universal d-arrays.
//!
//! Exponents of order `k^d` make direct evaluation hopeless (`q^{k^d}` has
//! ten thousand binary digits already at `d = 2, k = 100`), so every
//! quantity here is carried as a natural logarithm.

use std::f64::consts::{E, PI};
use std::ops::{Add, Div, Mul};

use num_bigint::BigUint;
use num_traits::One;
use statrs::function::gamma::ln_gamma;

use crate::output::Json;
use crate::{Error, Result};

/// Above this size factorial and binomial logarithms switch from exact
/// summation to log-gamma.
const LOG_SUM_LIMIT: u128 = 1_000_000;

/// A non-negative real stored as its natural logarithm; zero is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogValue(ln)
    }

    pub fn from_value(x: f64) -> Self {
        assert!(x >= 0.0, "LogValue holds non-negative reals");
        LogValue(x.ln())
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn log2(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    /// The represented value; may overflow to `inf` or underflow to 0.
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powi(self, exponent: u32) -> Self {
        if self.is_zero() {
            return if exponent == 0 {
                LogValue::ONE
            } else {
                LogValue::ZERO
            };
        }
        LogValue(self.0 * f64::from(exponent))
    }

    /// Log-sum-exp over an iterator.
    pub fn sum<I: IntoIterator<Item = LogValue>>(items: I) -> Self {
        let items: Vec<f64> = items.into_iter().map(|v| v.0).collect();
        let max = items.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return LogValue::ZERO;
        }
        if max == f64::INFINITY {
            return LogValue(f64::INFINITY);
        }
        LogValue(max + items.iter().map(|x| (x - max).exp()).sum::<f64>().ln())
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return LogValue::ZERO;
        }
        LogValue(self.0 + rhs.0)
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.is_zero(), "division by zero");
        if self.is_zero() {
            return LogValue::ZERO;
        }
        LogValue(self.0 - rhs.0)
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        LogValue::sum([self, rhs])
    }
}

/// `ln m!`.
pub fn log_factorial(m: u128) -> f64 {
    if m <= LOG_SUM_LIMIT {
        (2..=m as u64).map(|j| (j as f64).ln()).sum()
    } else {
        ln_gamma(m as f64 + 1.0)
    }
}

/// `ln C(n, k)`.
pub fn log_binomial(n: u128, k: u128) -> Result<LogValue> {
    if k > n {
        return Err(Error::Domain(format!("binomial({n}, {k}) needs k <= n")));
    }
    let small = k.min(n - k);
    if small == 0 {
        return Ok(LogValue::ONE);
    }
    let ln = if n <= LOG_SUM_LIMIT {
        let base = (n - small) as f64;
        (1..=small as u64)
            .map(|j| ((base + j as f64) / j as f64).ln())
            .sum()
    } else if small <= LOG_SUM_LIMIT {
        // ln(n (n-1) ... (n-small+1)) - ln small!, without cancellation.
        let nf = n as f64;
        let falling: f64 = (0..small as u64)
            .map(|j| (-(j as f64) / nf).ln_1p())
            .sum::<f64>()
            + small as f64 * nf.ln();
        falling - log_factorial(small)
    } else {
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    };
    Ok(LogValue(ln))
}

/// `H(x) = -x log2 x - (1-x) log2 (1-x)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "entropy argument {x} outside [0, 1]"
        )));
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(x) + term(1.0 - x))
}

/// The counting lower bound `(k/e) q^{k^{d-1}/d}` on the minimal order of a
/// k-universal d-array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdLowerBound {
    pub value: LogValue,
    /// For `d = 1` the bound is far below the true value `qk`.
    pub not_tight: bool,
}

impl FdLowerBound {
    /// Smallest integer order allowed by the bound.
    pub fn min_order(&self) -> f64 {
        self.value.value().ceil()
    }
}

pub fn lower_bound_fd(d: u32, q: u32, k: u64) -> Result<FdLowerBound> {
    check_dqk(d, q, k)?;
    let exponent = (k as f64).powi(d as i32 - 1) / f64::from(d);
    let ln = (k as f64 / E).ln() + exponent * f64::from(q).ln();
    Ok(FdLowerBound {
        value: LogValue(ln),
        not_tight: d == 1,
    })
}

fn check_dqk(d: u32, q: u32, k: u64) -> Result<()> {
    if d == 0 || q == 0 || k == 0 {
        return Err(Error::Domain(format!(
            "need d, q, k >= 1 (got d={d}, q={q}, k={k})"
        )));
    }
    Ok(())
}

/// Smallest `n >= k` with `C(n, k)^d >= q^{k^d}`, computed exactly. No
/// order-`n` array below this can be k-universal.
pub fn counting_floor(d: u32, q: u32, k: u64) -> Result<u64> {
    check_dqk(d, q, k)?;
    let cells = k
        .checked_pow(d)
        .filter(|&c| c <= 1 << 20)
        .ok_or_else(|| Error::InstanceTooLarge(format!("k^d = {k}^{d} cells")))?;
    let target = BigUint::from(q).pow(cells as u32);
    let mut n = k;
    loop {
        let binom = exact_binomial(n, k);
        if binom.pow(d) >= target {
            return Ok(n);
        }
        n += 1;
    }
}

pub(crate) fn exact_binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 1..=k {
        acc = acc * BigUint::from(n - k + j) / BigUint::from(j);
    }
    acc
}

/// `ln mu = d ln C(n, k) - k^d ln q`: the expected number of copies of a
/// fixed order-k array in a uniform order-n array.
pub fn expected_copies_mu(d: u32, q: u32, k: u64, n: u128) -> Result<LogValue> {
    check_dqk(d, q, k)?;
    if n < u128::from(k) {
        return Err(Error::Domain(format!("mu needs n >= k (n={n}, k={k})")));
    }
    let cells = (k as f64).powi(d as i32);
    Ok(LogValue(
        f64::from(d) * log_binomial(n, u128::from(k))?.ln() - cells * f64::from(q).ln(),
    ))
}

/// `ln Lambda_i = ln [C(n,k) C(k,i) C(n-k,k-i)]`, the number of ordered
/// pairs of k-subsets of `[n]` meeting in exactly `i` elements.
pub fn lambda_i(n: u128, k: u128, i: u128) -> Result<LogValue> {
    if i > k || k > n || k - i > n - k {
        return Err(Error::Domain(format!(
            "Lambda needs 0 <= i <= k <= n and k-i <= n-k (n={n}, k={k}, i={i})"
        )));
    }
    Ok(log_binomial(n, k)? * log_binomial(k, i)? * log_binomial(n - k, k - i)?)
}

fn check_ld(d: u32, q: u32, k: u64, epsilon: f64) -> Result<()> {
    check_dqk(d, q, k)?;
    if epsilon.is_nan() || epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// `ln L_d(i)` where
/// `L_d(i) = q^{(i^d/d)(1 - (k/i)^{d-1})} C(k,i) ((1+eps)k/e)^{k-i} / (k-i)!`.
pub fn log_ld(d: u32, q: u32, k: u64, epsilon: f64, i: u64) -> Result<LogValue> {
    check_ld(d, q, k, epsilon)?;
    if i == 0 || i > k {
        return Err(Error::Domain(format!(
            "L_d needs 1 <= i <= k (i={i}, k={k})"
        )));
    }
    let (fi, fk, fd) = (i as f64, k as f64, f64::from(d));
    // (i^d/d)(1 - (k/i)^{d-1}) = i (i^{d-1} - k^{d-1}) / d, exactly 0 at i = k
    let q_exponent = fi * (fi.powi(d as i32 - 1) - fk.powi(d as i32 - 1)) / fd;
    let missing = k - i;
    let ln = q_exponent * f64::from(q).ln() - log_factorial(u128::from(missing))
        + log_binomial(u128::from(k), u128::from(i))?.ln()
        + missing as f64 * ((1.0 + epsilon) * fk / E).ln();
    Ok(LogValue(ln))
}

/// `ln( (sum_{i=1}^k L_d(i))^d - L_d(k)^d )`: the product bound on
/// `Delta_i / mu` summed over every overlap profile except full overlap.
pub fn delta_over_mu_bound(d: u32, q: u32, k: u64, epsilon: f64) -> Result<LogValue> {
    check_ld(d, q, k, epsilon)?;
    let partial = (1..k)
        .map(|i| log_ld(d, q, k, epsilon, i))
        .collect::<Result<Vec<_>>>()?;
    // L_d(k) = 1, so the bound is (1 + R)^d - 1 with R = sum_{i<k} L_d(i).
    let r = LogValue::sum(partial);
    Ok(one_plus_pow_minus_one(r, d))
}

/// `ln((1 + R)^d - 1)` for `R` given in log space.
fn one_plus_pow_minus_one(r: LogValue, d: u32) -> LogValue {
    if r.is_zero() {
        return LogValue::ZERO;
    }
    if d == 1 {
        return r;
    }
    let lr = r.ln();
    let fd = f64::from(d);
    if lr < -700.0 {
        // (1+R)^d - 1 = dR (1 + O(R)) and R is below f64 resolution of 1.
        LogValue(fd.ln() + lr)
    } else if lr > 700.0 {
        let log1p_r = lr + (-lr).exp().ln_1p();
        LogValue(fd * log1p_r + (-(-fd * log1p_r).exp()).ln_1p())
    } else {
        LogValue((fd * lr.exp().ln_1p()).exp_m1().ln())
    }
}

/// All second-moment quantities at the critical order
/// `n = ceil((1+eps)(k/e) q^{k^{d-1}/d})`. Reports, never asserts.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentReport {
    pub d: u32,
    pub q: u32,
    pub k: u64,
    pub epsilon: f64,
    pub n: u128,
    pub log_mu: LogValue,
    /// `ln(16 ln q k^{2d})`, the threshold `mu` is expected to exceed for
    /// large `k`.
    pub log_mu_threshold: LogValue,
    /// `ln max_{1 <= i < k} L_d(i) k^d`; `-inf` when `k = 1`.
    pub log_max_ld_times_kd: LogValue,
    pub argmax_i: Option<u64>,
    pub log_delta_over_mu_bound: LogValue,
    /// `epsilon <= ln(q)/8`, the regime where the decay estimate is proved.
    pub epsilon_in_proved_regime: bool,
}

impl SecondMomentReport {
    pub fn mu_exceeds_threshold(&self) -> bool {
        self.log_mu.ln() >= self.log_mu_threshold.ln()
    }

    pub fn max_ld_times_kd(&self) -> f64 {
        self.log_max_ld_times_kd.value()
    }

    pub fn to_json(&self, base2: bool) -> Json {
        let scale = |v: LogValue| if base2 { v.log2() } else { v.ln() };
        Json::object()
            .field("d", self.d)
            .field("q", self.q)
            .field("k", self.k)
            .field("epsilon", self.epsilon)
            .field("n", self.n)
            .field("log_base", if base2 { "2" } else { "e" })
            .field("log_mu", scale(self.log_mu))
            .field("log_mu_threshold", scale(self.log_mu_threshold))
            .field("mu_exceeds_threshold", self.mu_exceeds_threshold())
            .field("log_max_ld_times_kd", scale(self.log_max_ld_times_kd))
            .field("argmax_i", self.argmax_i)
            .field(
                "log_delta_over_mu_bound",
                scale(self.log_delta_over_mu_bound),
            )
            .field("epsilon_in_proved_regime", self.epsilon_in_proved_regime)
            .build()
    }
}

/// `ceil((1+eps)(k/e) q^{k^{d-1}/d})`.
pub fn critical_order(d: u32, q: u32, k: u64, epsilon: f64) -> Result<u128> {
    check_ld(d, q, k, epsilon)?;
    let ln = (1.0 + epsilon).ln() + lower_bound_fd(d, q, k)?.value.ln();
    let n = ln.exp().ceil();
    if !n.is_finite() || n >= u128::MAX as f64 {
        return Err(Error::InstanceTooLarge(format!(
            "critical order e^{ln:.3} exceeds 128-bit range"
        )));
    }
    Ok((n as u128).max(u128::from(k)))
}

pub fn second_moment_report(d: u32, q: u32, k: u64, epsilon: f64) -> Result<SecondMomentReport> {
    if d < 2 || q < 2 {
        return Err(Error::Domain(format!(
            "report needs d, q >= 2 (d={d}, q={q})"
        )));
    }
    let n = critical_order(d, q, k, epsilon)?;
    let log_mu = expected_copies_mu(d, q, k, n)?;
    let ln_q = f64::from(q).ln();
    let log_kd = f64::from(d) * (k as f64).ln();
    let log_mu_threshold = LogValue((16.0 * ln_q).ln() + 2.0 * log_kd);
    let mut best: Option<(u64, LogValue)> = None;
    for i in 1..k {
        let v = log_ld(d, q, k, epsilon, i)?;
        if best.is_none_or(|(_, b)| v.ln() > b.ln()) {
            best = Some((i, v));
        }
    }
    let log_max_ld_times_kd = best.map_or(LogValue::ZERO, |(_, v)| LogValue(v.ln() + log_kd));
    Ok(SecondMomentReport {
        d,
        q,
        k,
        epsilon,
        n,
        log_mu,
        log_mu_threshold,
        log_max_ld_times_kd,
        argmax_i: best.map(|(i, _)| i),
        log_delta_over_mu_bound: delta_over_mu_bound(d, q, k, epsilon)?,
        epsilon_in_proved_regime: epsilon <= ln_q / 8.0,
    })
}

/// `ln((2 pi k)^{-1/2} (e n / k)^k)`, the Stirling form of `ln C(n, k)` for
/// `k = o(sqrt n)`.
pub fn stirling_log_binomial(n: f64, k: f64) -> f64 {
    -0.5 * (2.0 * PI * k).ln() + k * (E * n / k).ln()
}
