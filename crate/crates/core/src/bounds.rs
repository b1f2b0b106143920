//! Closed-form calculators: the density threshold, the good-edge clique
//! bound, the insertion-probability thresholds, expected uv-clique counts in
//! the block and two-ball models, and the Janson-inequality quantities for
//! Erdos-Renyi cliques.
//!
//! Binomial coefficients and probability powers are accumulated in log space
//! so the calculators survive N up to 1e4 and k up to 64 without overflow;
//! results carry both the log-value and the value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on enumeration work in the expectation calculators.
pub const ENUMERATION_TERM_CAP: u64 = 100_000_000;

fn default_c() -> f64 {
    1.0
}

/// Model parameters for the threshold calculators. The constants c1, c2, c3
/// exist in the analysis but are never made explicit, so they are
/// user-supplied knobs defaulting to 1; thresholds computed from them are
/// qualitative guides, not certified cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u64,
    pub s: f64,
    pub rho: f64,
    pub p: f64,
    pub q: f64,
    /// Target clique size K.
    pub k: u64,
    #[serde(default = "default_c")]
    pub c1: f64,
    #[serde(default = "default_c")]
    pub c2: f64,
    #[serde(default = "default_c")]
    pub c3: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter("n must be >= 2".into()));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::InvalidParameter("s must lie in (0, 1]".into()));
        }
        if self.rho < 1.0 {
            return Err(Error::InvalidParameter("rho must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidParameter("p, q must lie in [0, 1]".into()));
        }
        if self.k < 2 {
            return Err(Error::InvalidParameter("K must be >= 2".into()));
        }
        if self.c1 <= 0.0 || self.c2 <= 0.0 || self.c3 <= 0.0 {
            return Err(Error::InvalidParameter("c1, c2, c3 must be positive".into()));
        }
        Ok(())
    }
}

/// The density threshold `13 ln n / n`.
pub fn assumption_a_s_min(n: u64) -> f64 {
    crate::space::assumption_a_s_min(n as usize)
}

/// Lower bound on good-edge clique numbers under deletion:
/// `(2/3) log_{1/(1-p)}(sn)`. Degenerate at p = 0 (insertion-only good edges
/// obey the sn/4 bound instead) and at p = 1.
pub fn tau_good_edge_bound(p: f64, s: f64, n: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tau bound needs 0 < p < 1, got {p}"
        )));
    }
    let sn = s * n as f64;
    if !(sn > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tau bound needs sn > 1, got {sn}"
        )));
    }
    Ok((2.0 / 3.0) * sn.ln() / (1.0 / (1.0 - p)).ln())
}

/// The p = 0 counterpart: good edges carry cliques of size at least sn/4.
pub fn tau_good_edge_bound_insertion_only(s: f64, n: u64) -> f64 {
    s * n as f64 / 4.0
}

/// Insertion threshold `min{c1, c2 * (1/n)^(c3/K) * K/(sn)}`; the combined
/// variant scales the denominator by sqrt(1-p).
pub fn q_threshold(params: &ModelParams, combined: bool) -> Result<f64> {
    params.validate()?;
    if combined && params.p >= 1.0 {
        return Err(Error::InvalidParameter(
            "combined threshold needs p < 1".into(),
        ));
    }
    let n = params.n as f64;
    let k = params.k as f64;
    let sn = params.s * n;
    let mut bound = params.c2 * (1.0 / n).powf(params.c3 / k) * k / sn;
    if combined {
        bound /= (1.0 - params.p).sqrt();
    }
    Ok(bound.min(params.c1))
}

/// ln C(n, k); negative infinity when k > n.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = 0.0;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

#[inline]
fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// `exponent * ln(base)` with the convention that a zero exponent
/// contributes nothing even when the base is zero.
#[inline]
fn pow_term(exponent: u64, ln_base: f64) -> f64 {
    if exponent == 0 {
        0.0
    } else {
        exponent as f64 * ln_base
    }
}

/// A quantity computed in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub ln_value: f64,
    pub value: f64,
    /// Number of enumeration terms behind the value.
    pub terms: u64,
}

impl Expectation {
    fn zero() -> Self {
        Expectation {
            ln_value: f64::NEG_INFINITY,
            value: 0.0,
            terms: 0,
        }
    }
}

/// Streaming log-sum-exp accumulator.
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn add(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term > self.max {
            self.sum = self.sum * (self.max - ln_term).exp() + 1.0;
            self.max = ln_term;
        } else {
            self.sum += (ln_term - self.max).exp();
        }
    }

    fn ln_value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Clique block sizes with k extra vertices beyond the edge endpoints:
/// the block model for uv-clique counting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockProfile {
    pub block_sizes: Vec<u64>,
    pub k: u64,
    pub q: f64,
    #[serde(default)]
    pub p: f64,
}

impl BlockProfile {
    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() {
            return Err(Error::InvalidParameter("need at least one block".into()));
        }
        if !(0.0..=1.0).contains(&self.q) || !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter("p, q must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Expected number of uv-cliques of size k+2 in the block model:
/// `q^{2k} * sum over compositions x of k into the blocks of
/// prod C(N_i, x_i) * q^{(k^2 - sum x_i^2)/2} * (1-p)^{sum C(x_i, 2)}`.
/// Exact enumeration over bounded compositions; 0 when k exceeds the total
/// block capacity.
pub fn expected_uv_cliques(profile: &BlockProfile) -> Result<Expectation> {
    profile.validate()?;
    let k = profile.k;
    if k == 0 {
        return Ok(Expectation {
            ln_value: 0.0,
            value: 1.0,
            terms: 1,
        });
    }
    let total: u64 = profile.block_sizes.iter().sum();
    if k > total {
        return Ok(Expectation::zero());
    }
    let ln_q = profile.q.ln();
    let ln_1mp = (1.0 - profile.p).ln();
    // suffix capacities for pruning
    let m = profile.block_sizes.len();
    let mut suffix = vec![0u64; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] + profile.block_sizes[i];
    }

    struct Enumerator<'a> {
        sizes: &'a [u64],
        suffix: &'a [u64],
        k: u64,
        ln_q: f64,
        ln_1mp: f64,
        acc: LogSum,
        terms: u64,
    }

    impl Enumerator<'_> {
        fn run(
            &mut self,
            block: usize,
            rem: u64,
            ln_coef: f64,
            sum_sq: u64,
            sum_pairs: u64,
        ) -> Result<()> {
            if block == self.sizes.len() {
                debug_assert_eq!(rem, 0);
                self.terms += 1;
                if self.terms > ENUMERATION_TERM_CAP {
                    return Err(Error::WorkCapExceeded {
                        cap: ENUMERATION_TERM_CAP,
                    });
                }
                let k = self.k;
                let cross = (k * k - sum_sq) / 2;
                let ln_term = ln_coef
                    + pow_term(2 * k + cross, self.ln_q)
                    + pow_term(sum_pairs, self.ln_1mp);
                self.acc.add(ln_term);
                return Ok(());
            }
            let cap_rest = self.suffix[block + 1];
            let lo = rem.saturating_sub(cap_rest);
            let hi = rem.min(self.sizes[block]);
            for x in lo..=hi {
                self.run(
                    block + 1,
                    rem - x,
                    ln_coef + ln_binomial(self.sizes[block], x),
                    sum_sq + x * x,
                    sum_pairs + choose2(x),
                )?;
            }
            Ok(())
        }
    }

    let mut e = Enumerator {
        sizes: &profile.block_sizes,
        suffix: &suffix,
        k,
        ln_q,
        ln_1mp,
        acc: LogSum::new(),
        terms: 0,
    };
    e.run(0, k, 0.0, 0, 0)?;
    let ln_value = e.acc.ln_value();
    Ok(Expectation {
        ln_value,
        value: ln_value.exp(),
        terms: e.terms,
    })
}

/// Expected uv-clique count of size k~+2 in the two-ball model:
/// `sum_{x1+x2=k~} C(Nu-1,x1) C(Nv-1,x2) q^{(x1+1)(x2+1)-1}
///  (1-p)^{C(x1+1,2)+C(x2+1,2)}`.
pub fn expected_uv_cliques_two_balls(
    nu: u64,
    nv: u64,
    k_tilde: u64,
    q: f64,
    p: f64,
) -> Result<Expectation> {
    if nu < 1 || nv < 1 {
        return Err(Error::InvalidParameter("Nu, Nv must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter("p, q must lie in [0, 1]".into()));
    }
    if k_tilde > (nu - 1) + (nv - 1) {
        return Ok(Expectation::zero());
    }
    let ln_q = q.ln();
    let ln_1mp = (1.0 - p).ln();
    let mut acc = LogSum::new();
    let mut terms = 0u64;
    let lo = k_tilde.saturating_sub(nv - 1);
    let hi = k_tilde.min(nu - 1);
    for x1 in lo..=hi {
        let x2 = k_tilde - x1;
        terms += 1;
        let ln_term = ln_binomial(nu - 1, x1)
            + ln_binomial(nv - 1, x2)
            + pow_term((x1 + 1) * (x2 + 1) - 1, ln_q)
            + pow_term(choose2(x1 + 1) + choose2(x2 + 1), ln_1mp);
        acc.add(ln_term);
    }
    let ln_value = acc.ln_value();
    Ok(Expectation {
        ln_value,
        value: ln_value.exp(),
        terms,
    })
}

/// First/second-moment quantities for k-cliques in G(N, p_bar): the expected
/// clique count zeta, the dependency sum Delta* = sum over overlapping
/// k-sets of P[B_j | B_i], and Delta = zeta * Delta*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErCliqueParams {
    pub n_vertices: u64,
    pub p_bar: f64,
    pub k: u64,
    pub zeta: f64,
    pub ln_zeta: f64,
    pub delta_star: f64,
    pub delta: f64,
}

/// Quantities at the canonical target size `k = floor(log_{1/p_bar} N)`.
pub fn er_clique_quantities(n: u64, p_bar: f64) -> Result<ErCliqueParams> {
    if n < 2 {
        return Err(Error::InvalidParameter("N must be >= 2".into()));
    }
    if !(p_bar > 0.0 && p_bar < 1.0) {
        return Err(Error::InvalidParameter("p_bar must lie in (0, 1)".into()));
    }
    // nudge before flooring so exact powers are not lost to rounding
    let k = ((n as f64).ln() / (1.0 / p_bar).ln() + 1e-9).floor() as u64;
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "target clique size k = {k} < 2 (p_bar too small for N = {n})"
        )));
    }
    er_clique_quantities_with_k(n, p_bar, k)
}

/// Same quantities at a caller-chosen clique size k.
pub fn er_clique_quantities_with_k(n: u64, p_bar: f64, k: u64) -> Result<ErCliqueParams> {
    if n < 2 {
        return Err(Error::InvalidParameter("N must be >= 2".into()));
    }
    if !(p_bar > 0.0 && p_bar < 1.0) {
        return Err(Error::InvalidParameter("p_bar must lie in (0, 1)".into()));
    }
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must lie in [2, N], got {k}"
        )));
    }
    let ln_p = p_bar.ln();
    let ln_zeta = ln_binomial(n, k) + pow_term(choose2(k), ln_p);
    let mut acc = LogSum::new();
    for l in 2..k {
        acc.add(
            ln_binomial(k, l)
                + pow_term(choose2(k) - choose2(l), ln_p)
                + ln_binomial(n - k, k - l),
        );
    }
    let delta_star = acc.ln_value().exp();
    let zeta = ln_zeta.exp();
    Ok(ErCliqueParams {
        n_vertices: n,
        p_bar,
        k,
        zeta,
        ln_zeta,
        delta_star,
        delta: zeta * delta_star,
    })
}

/// The two tail bounds `e^{-zeta + Delta/2}` and (when Delta >= zeta)
/// `e^{-zeta^2 / (2 Delta)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JansonBounds {
    pub plain: f64,
    /// None when Delta < zeta (the extended bound does not apply).
    pub extended: Option<f64>,
}

pub fn janson_bounds(zeta: f64, delta: f64) -> Result<JansonBounds> {
    if !(zeta > 0.0) {
        return Err(Error::InvalidParameter("zeta must be positive".into()));
    }
    if delta < 0.0 {
        return Err(Error::InvalidParameter("Delta must be nonnegative".into()));
    }
    let plain = (-zeta + delta / 2.0).exp();
    let extended = if delta >= zeta {
        Some((-zeta * zeta / (2.0 * delta)).exp())
    } else {
        None
    };
    Ok(JansonBounds { plain, extended })
}
