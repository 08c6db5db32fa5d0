//! Explicit estimates: the high-occupation bound, the `T₃` overestimate, the
//! tail functions `g` and `h`, and the `Aᵝ/Bᵝ/B₀/Eᵝ` decomposition of `T₁`.
//!
//! Every check returns a [`BoundReport`]; a failing inequality is data, not
//! an error.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use dashu_ratio::RBig;
use num_complex::Complex64;
use serde::Serialize;

use crate::dissection::{box_limits, compute_cap, split_t, build_chunks, evaluate_tree, WeightProfile, DEFAULT_NODE_CAP};
use crate::error::{Error, Result};
use crate::model::{enumerate_occupations, CouplingSequence, ModelParams, Occupation};
use crate::numeric::{float_to_f64, ln_abs_rational, pow_rational, rational_to_f64, to_float, CompensatedSum, DEFAULT_PRECISION};
use crate::partition::TermTable;
use crate::special::ln_gamma;

/// One instance of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: lhs <= rhs,
            seed: None,
            detail: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// Accepts `lhs` exceeding `rhs` by up to `rel` of their magnitude, for
    /// sides that are both summed in floating point.
    pub fn with_tolerance(mut self, rel: f64) -> Self {
        self.holds = self.lhs <= self.rhs + rel * self.lhs.abs().max(self.rhs.abs());
        self
    }
}

/// `ln Γ(x + 1)` for real `x ≥ 0`.
pub fn ln_factorial(x: f64) -> f64 {
    ln_gamma(Complex64::new(x + 1.0, 0.0)).re
}

/// `Q(α) = Π ((pr)ⁱN)^{αᵢ}/αᵢ!`, returned as `(Q, ln Q)`.
pub fn eval_q(alpha: &Occupation, p: f64, r: f64, n: f64) -> (f64, f64) {
    let ln_q: f64 = alpha
        .iter()
        .map(|(i, a)| a as f64 * (i as f64 * (p * r).ln() + n.ln()) - ln_factorial(a as f64))
        .sum();
    (ln_q.exp(), ln_q)
}

/// `Q(α)` in exact arithmetic.
pub fn eval_q_exact(alpha: &Occupation, params: &ModelParams) -> RBig {
    let pr = params.p() * params.r();
    let n = RBig::from(params.n());
    alpha.iter().fold(RBig::ONE, |acc, (i, a)| {
        let base = pow_rational(&pr, i) * &n;
        let mut term = RBig::ONE;
        for k in 1..=a {
            term = term * &base / RBig::from(k);
        }
        acc * term
    })
}

/// `|Π (Jᵢ pⁱ N)^{αᵢ}/αᵢ!| ≤ Q(α)`, exactly.
pub fn domination_holds(alpha: &Occupation, params: &ModelParams, couplings: &CouplingSequence) -> bool {
    let table = TermTable::new(params, couplings);
    let term = alpha.iter().fold(RBig::ONE, |acc, (i, a)| acc * table.term(i, a));
    let abs = if term < RBig::ZERO { -term } else { term };
    abs <= eval_q_exact(alpha, params)
}

/// How the stationarity condition ties `xᵢ = qⁱ` to `m̃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintForm {
    /// `Σ qⁱ = m̃`.
    Literal,
    /// `Σ i·qⁱ = m̃`, the weight constraint the maximisation actually carries.
    Weighted,
}

/// Maximiser of `f(x) = Σ [i xᵢ ln(pr) − xᵢ ln xᵢ + xᵢ]` on the slice
/// defined by `m̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupationBound {
    pub m_tilde: f64,
    pub p: f64,
    pub r: f64,
    /// `None` for the untruncated index range.
    pub imax: Option<u32>,
    pub form: ConstraintForm,
    /// Root of the constraint equation.
    pub q_root: f64,
    /// `max(q_root, pr)` for the weighted form; the maximiser is `xᵢ = qⁱ`.
    pub q: f64,
    /// `λ` with `q = pr·e^{−λ}`.
    pub lambda: f64,
    pub f_max: f64,
    pub constraint_residual: f64,
}

impl OccupationBound {
    /// `F = N·f_max`.
    pub fn big_f(&self, n: f64) -> f64 {
        n * self.f_max
    }

    /// `−N m̃ |ln(p/√m̃)|`.
    pub fn big_f_asymptotic(&self, n: f64) -> f64 {
        -n * self.m_tilde * (self.p / self.m_tilde.sqrt()).ln().abs()
    }

    /// `f(x)` for an arbitrary nonnegative vector on indices `2..`.
    pub fn objective(&self, x: &BTreeMap<u32, f64>) -> f64 {
        objective(self.p * self.r, x)
    }

    /// `Σ i·xᵢ` (weighted) or `Σ xᵢ` (literal) at the maximiser.
    fn constraint_sum(form: ConstraintForm, q: f64, imax: Option<u32>) -> f64 {
        match (form, imax) {
            (ConstraintForm::Literal, None) => q * q / (1.0 - q),
            (ConstraintForm::Weighted, None) => q * q * (2.0 - q) / ((1.0 - q) * (1.0 - q)),
            (form, Some(top)) => (2..=top)
                .map(|i| {
                    let w = if form == ConstraintForm::Weighted { i as f64 } else { 1.0 };
                    w * q.powi(i as i32)
                })
                .sum(),
        }
    }
}

fn objective(pr: f64, x: &BTreeMap<u32, f64>) -> f64 {
    x.iter()
        .map(|(&i, &xi)| {
            let entropy = if xi > 0.0 { xi * xi.ln() } else { 0.0 };
            i as f64 * xi * pr.ln() - entropy + xi
        })
        .sum()
}

/// Solves the Lagrange conditions for the high-occupation bound.
pub fn occupation_bound(
    m_tilde: f64,
    p: f64,
    r: f64,
    imax: Option<u32>,
    form: ConstraintForm,
) -> Result<OccupationBound> {
    if !(m_tilde > 0.0 && m_tilde.is_finite()) {
        return Err(Error::NoRoot { m_tilde });
    }
    let pr = p * r;
    if !(pr > 0.0 && pr < 1.0) {
        return Err(Error::InvalidParams(format!("occupation bound needs 0 < pr < 1, got {pr}")));
    }
    let sum = |q: f64| OccupationBound::constraint_sum(form, q, imax);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if imax.is_some() {
        while sum(hi) < m_tilde {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::NoRoot { m_tilde });
            }
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sum(mid) < m_tilde {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q_root = if (sum(lo) - m_tilde).abs() <= (sum(hi) - m_tilde).abs() { lo } else { hi };
    let q = match form {
        ConstraintForm::Literal => q_root,
        ConstraintForm::Weighted => q_root.max(pr),
    };
    let f_max = match imax {
        None => {
            let plain = q * q / (1.0 - q);
            let weighted = q * q * (2.0 - q) / ((1.0 - q) * (1.0 - q));
            plain - weighted * (q / pr).ln()
        }
        Some(top) => {
            let x: BTreeMap<u32, f64> = (2..=top).map(|i| (i, q.powi(i as i32))).collect();
            objective(pr, &x)
        }
    };
    Ok(OccupationBound {
        m_tilde,
        p,
        r,
        imax,
        form,
        q_root,
        q,
        lambda: (pr / q).ln(),
        f_max,
        constraint_residual: (sum(q_root) - m_tilde).abs(),
    })
}

/// `(1 + c a^{1/2}) e^a` with `c = 1/Γ(3/2)`.
pub fn half_power_bound(a: f64) -> f64 {
    (1.0 + half_power_constant() * a.sqrt()) * a.exp()
}

/// `c = 1/Γ(3/2) = 2/√π`.
pub fn half_power_constant() -> f64 {
    2.0 / PI.sqrt()
}

/// `Σ_{k≥0} a^{k/2}/Γ(k/2 + 1)`.
pub fn half_power_series(a: f64) -> f64 {
    let mut sum = CompensatedSum::new();
    let mut k = 0u32;
    loop {
        let half = k as f64 / 2.0;
        let term = if a == 0.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            (half * a.ln() - ln_factorial(half)).exp()
        };
        sum.add(term);
        if half > a && term < 1e-18 * sum.value() {
            return sum.value();
        }
        k += 1;
    }
}

pub fn half_power_check(a: f64) -> BoundReport {
    BoundReport::new("half-power-series", half_power_series(a), half_power_bound(a))
        .with_detail(format!("a = {a}"))
}

/// `T₃` against its product overestimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct T3Estimate {
    pub t3: f64,
    /// `Σ Q(α)` over `Σ i·αᵢ ≥ pN/4`.
    pub q_sum: f64,
    /// Largest `Π aᵢ^{αᵢ/2}/(αᵢ/2)!` over the admissible heavy occupations.
    pub a_observed: f64,
    /// `exp(N f_max)` at half the weight threshold.
    pub a_bound: f64,
    /// `exp(F_asym)` at `m̃ = p/4`, for comparison only.
    pub a_asymptotic: f64,
    pub b: f64,
    pub reports: Vec<BoundReport>,
}

/// Checks `|T₃| ≤ Σ Q ≤ A·B` on an exactly enumerable instance.
///
/// `A` is bounded through the Lagrange maximiser with `yᵢ = αᵢ/2`, whose
/// weight constraint is `Σ i·yᵢ ≥ pN/8`.
pub fn t3_overestimate(params: &ModelParams, couplings: &CouplingSequence) -> Result<T3Estimate> {
    let tree = build_chunks(params, couplings, DEFAULT_NODE_CAP)?;
    let values = evaluate_tree(&tree, params, couplings);
    let t3_exact = split_t(&tree, &values).t3;
    let t3_exact = if t3_exact < RBig::ZERO { -t3_exact } else { t3_exact };
    let t3 = rational_to_f64(&t3_exact);
    let (p, r, n) = (params.p_f64(), params.r_f64(), params.n() as f64);
    let pr = p * r;
    let threshold = params.half_budget();
    let mut q_exact = RBig::ZERO;
    let mut a_observed = 0.0f64;
    for alpha in enumerate_occupations(&params.indices(), params.budget()) {
        if RBig::from(alpha.weight()) < threshold {
            continue;
        }
        q_exact += eval_q_exact(&alpha, params);
        let ln_half: f64 = alpha
            .iter()
            .map(|(i, a)| {
                let y = a as f64 / 2.0;
                y * (i as f64 * pr.ln() + n.ln()) - ln_factorial(y)
            })
            .sum();
        a_observed = a_observed.max(ln_half.exp());
    }
    let a_bound = occupation_bound(p / 8.0, p, r, Some(params.imax()), ConstraintForm::Weighted)?;
    let a_value = a_bound.big_f(n).exp();
    let a_asym = OccupationBound { m_tilde: p / 4.0, ..a_bound }.big_f_asymptotic(n).exp();
    let b: f64 = params.indices().iter().map(|&i| half_power_bound(pr.powi(i as i32) * n)).product();
    let q_sum = rational_to_f64(&q_exact);
    let mut below_q = BoundReport::new("t3-below-q-sum", t3, q_sum);
    below_q.holds = t3_exact <= q_exact;
    let reports = vec![
        below_q,
        BoundReport::new("a-below-lagrange", a_observed, a_value),
        BoundReport::new("t3-below-ab", t3, a_value * b),
    ];
    Ok(T3Estimate { t3, q_sum, a_observed, a_bound: a_value, a_asymptotic: a_asym, b, reports })
}

/// `g(a, n) = e^{|a|} Σ_{i>n} |a|ⁱ/i!`.
pub fn tail_g(a: f64, n: u64) -> f64 {
    let x = a.abs();
    if x == 0.0 {
        return 0.0;
    }
    let first = n + 1;
    let mut term = (first as f64 * x.ln() - ln_factorial(first as f64)).exp();
    let mut sum = CompensatedSum::new();
    let mut i = first;
    loop {
        sum.add(term);
        i += 1;
        term *= x / i as f64;
        if (i as f64) > x && term <= 1e-18 * sum.value() {
            break;
        }
    }
    sum.value() * x.exp()
}

/// `Π(1 + xᵢ) − 1 ≤ e Σ xᵢ` for `xᵢ ≥ 0`, `Σ xᵢ ≤ 1`.
pub fn product_inequality_check(x: &[f64]) -> Result<BoundReport> {
    let total: f64 = x.iter().sum();
    if x.iter().any(|&v| v < 0.0) || total > 1.0 {
        return Err(Error::PreconditionViolated(format!(
            "product inequality needs nonnegative entries summing to at most 1, got sum {total}"
        )));
    }
    let lhs = x.iter().map(|&v| 1.0 + v).product::<f64>() - 1.0;
    Ok(BoundReport::new("product-inequality", lhs, E * total))
}

/// One level-zero boxed chunk seen through the `T₁` decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelZeroTerm {
    pub t: BTreeMap<u32, u64>,
    pub reserved: u64,
    pub box_limits: BTreeMap<u32, u64>,
    pub a_beta: RBig,
    pub b_beta: RBig,
    /// `Bᵝ − B₀`.
    pub e_beta: f64,
    /// `gᵢ = g(Jᵢ pⁱ N, m₀(i))` for `i ∈ N`.
    pub g: BTreeMap<u32, f64>,
}

/// `Aᵝ = Π_{i∈P} (Jᵢ pⁱ N)^{tᵢ}/tᵢ!`.
pub fn a_beta(t: &BTreeMap<u32, u64>, couplings: &CouplingSequence, params: &ModelParams) -> RBig {
    let table = TermTable::new(params, couplings);
    t.iter().fold(RBig::ONE, |acc, (&i, &ti)| acc * table.term(i, ti))
}

/// `B₀ = Π_{i∈N} e^{Jᵢ pⁱ N}`.
pub fn b0(couplings: &CouplingSequence, params: &ModelParams) -> f64 {
    negative_exponent(couplings, params).exp()
}

fn negative_exponent(couplings: &CouplingSequence, params: &ModelParams) -> f64 {
    couplings
        .negative(&params.indices())
        .iter()
        .map(|&i| couplings.get_f64(i) * rational_to_f64(&params.scale(i)))
        .sum()
}

/// `Bᵝ = Π_{i∈N} Σ_{α ≤ m₀(i)} (Jᵢ pⁱ N)^α/α!`.
pub fn b_beta(box_limits: &BTreeMap<u32, u64>, couplings: &CouplingSequence, params: &ModelParams) -> RBig {
    let table = TermTable::new(params, couplings);
    box_limits.iter().fold(RBig::ONE, |acc, (&i, &m)| acc * table.prefix(i, m))
}

/// Every `β = t` on `P` with `R₀ < pN/4`, with its box and factors.
pub fn level_zero_terms(params: &ModelParams, couplings: &CouplingSequence) -> Result<Vec<LevelZeroTerm>> {
    let indices = params.indices();
    let positive = couplings.positive(&indices);
    let negative = couplings.negative(&indices);
    let profile = WeightProfile::new(&indices, params.eps());
    let table = TermTable::new(params, couplings);
    let exponent = negative
        .iter()
        .fold(RBig::ZERO, |acc, &i| acc + couplings.get(i) * params.scale(i));
    let base = to_float(&exponent, DEFAULT_PRECISION).exp();
    let budget = params.budget();
    let mut out = Vec::new();
    for t in enumerate_occupations(&positive, budget) {
        let reserved = t.weight();
        if params.reaches_half_budget(reserved) {
            continue;
        }
        let limits = if negative.is_empty() {
            BTreeMap::new()
        } else {
            let remaining = budget - reserved;
            box_limits(compute_cap(&negative, &profile, remaining)?, &profile, &negative, remaining)
        };
        let t_map: BTreeMap<u32, u64> = positive.iter().map(|&i| (i, t.get(i))).collect();
        let a = t_map.iter().fold(RBig::ONE, |acc, (&i, &ti)| acc * table.term(i, ti));
        let b = limits.iter().fold(RBig::ONE, |acc, (&i, &m)| acc * table.prefix(i, m));
        let g = limits
            .iter()
            .map(|(&i, &m)| (i, tail_g(couplings.get_f64(i) * rational_to_f64(&params.scale(i)), m)))
            .collect();
        out.push(LevelZeroTerm {
            e_beta: float_to_f64(&(to_float(&b, DEFAULT_PRECISION) - &base)),
            t: t_map,
            reserved,
            box_limits: limits,
            a_beta: a,
            b_beta: b,
            g,
        });
    }
    Ok(out)
}

/// The `Eᵝ` chain on one instance: the sup split, the exponential bound on
/// `ΣAᵝ`, the tail bound on `|Eᵝ|` (tight and loose), the product
/// inequality, and the final bound on `|Σ AᵝEᵝ|` when `sup Σ gᵢ ≤ 1`.
pub fn e_beta_chain(params: &ModelParams, couplings: &CouplingSequence) -> Result<Vec<BoundReport>> {
    let terms = level_zero_terms(params, couplings)?;
    let indices = params.indices();
    let scale = |i: u32| couplings.get_f64(i) * rational_to_f64(&params.scale(i));
    let positive_exp: f64 = couplings.positive(&indices).iter().map(|&i| scale(i)).sum();
    let negative_exp = negative_exponent(couplings, params);
    let abs_exp: f64 = indices.iter().map(|&i| scale(i).abs()).sum();

    let a_sum: f64 = terms.iter().map(|t| rational_to_f64(&t.a_beta)).sum();
    let ae_sum: f64 = terms.iter().map(|t| rational_to_f64(&t.a_beta) * t.e_beta).sum();
    let sup_e = terms.iter().map(|t| t.e_beta.abs()).fold(0.0, f64::max);
    let a_exact = terms.iter().fold(RBig::ZERO, |acc, t| acc + &t.a_beta);
    let positive_exact = couplings
        .positive(&indices)
        .iter()
        .fold(RBig::ZERO, |acc, &i| acc + couplings.get(i) * params.scale(i));
    let mut a_sum_report = BoundReport::new("a-sum-exponential", a_sum, positive_exp.exp());
    a_sum_report.holds =
        to_float(&a_exact, DEFAULT_PRECISION) <= to_float(&positive_exact, DEFAULT_PRECISION).exp();
    let mut reports = vec![
        BoundReport::new("sup-split", ae_sum.abs(), a_sum * sup_e).with_tolerance(1e-12),
        a_sum_report,
    ];

    let mut worst_tight: Option<BoundReport> = None;
    let mut worst_loose: Option<BoundReport> = None;
    let mut sup_g = 0.0f64;
    for term in &terms {
        let prod = term.g.values().map(|g| g.ln_1p()).sum::<f64>().exp_m1();
        let lhs = term.e_beta.abs();
        let tight = BoundReport::new("e-beta-tail", lhs, negative_exp.exp() * prod);
        let loose = BoundReport::new("e-beta-tail-abs", lhs, abs_exp.exp() * prod);
        if worst_tight.as_ref().is_none_or(|w| tight.margin < w.margin) {
            worst_tight = Some(tight);
        }
        if worst_loose.as_ref().is_none_or(|w| loose.margin < w.margin) {
            worst_loose = Some(loose);
        }
        sup_g = sup_g.max(term.g.values().sum());
        let x: Vec<f64> = term.g.values().copied().collect();
        if x.iter().sum::<f64>() <= 1.0 {
            reports.push(product_inequality_check(&x)?);
        }
    }
    reports.extend(worst_tight);
    reports.extend(worst_loose);
    if sup_g <= 1.0 {
        let rhs = (positive_exp + negative_exp).exp() * E * sup_g;
        reports.push(BoundReport::new("ae-sum-final", ae_sum.abs(), rhs).with_tolerance(1e-12));
    }
    Ok(reports)
}

/// Largest term of `ΣAᵝ` against the full sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargestTerm {
    pub n: u64,
    pub ln_b0: f64,
    pub ln_sum: f64,
    pub ln_max: f64,
    /// `(ln ΣAᵝ − ln max Aᵝ)/N`.
    pub gap: f64,
    pub argmax: BTreeMap<u32, u64>,
    pub report: BoundReport,
}

pub fn largest_term_approx(params: &ModelParams, couplings: &CouplingSequence) -> Result<LargestTerm> {
    let table = TermTable::new(params, couplings);
    let positive = couplings.positive(&params.indices());
    let mut sum = RBig::ZERO;
    let mut best = RBig::ZERO;
    let mut argmax = BTreeMap::new();
    for t in enumerate_occupations(&positive, params.budget()) {
        if params.reaches_half_budget(t.weight()) {
            continue;
        }
        let value = t.iter().fold(RBig::ONE, |acc, (i, ti)| acc * table.term(i, ti));
        if value > best {
            best = value.clone();
            argmax = positive.iter().map(|&i| (i, t.get(i))).collect();
        }
        sum += value;
    }
    let n = params.n();
    let ln_b0 = negative_exponent(couplings, params);
    let ln_sum = ln_abs_rational(&sum);
    let ln_max = ln_abs_rational(&best);
    Ok(LargestTerm {
        n,
        ln_b0,
        ln_sum,
        ln_max,
        gap: (ln_sum - ln_max) / n as f64,
        argmax,
        report: BoundReport::new("largest-term", ln_b0 + ln_max, ln_b0 + ln_sum),
    })
}

/// `ln h(a, n)` with `h = aⁿ e^{−a}/n!`, `n` real.
pub fn ln_h(a: f64, n: f64) -> f64 {
    n * a.ln() - a - ln_factorial(n)
}

/// `ln h(a, n) ≤ −n ln(n/a) + n − a`.
pub fn h_bound(a: f64, n: f64) -> Result<BoundReport> {
    if !(a > 0.0 && n >= 1.0) {
        return Err(Error::InvalidParams(format!("h bound needs a > 0 and n ≥ 1, got a = {a}, n = {n}")));
    }
    Ok(BoundReport::new("h-stirling", ln_h(a, n), -n * (n / a).ln() + n - a)
        .with_detail(format!("a = {a}, n = {n}")))
}

/// `ln h(r²p²N, γpN)` over an `N`-scan, with the fitted decay rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HScan {
    pub p: f64,
    pub r: f64,
    pub gamma: f64,
    pub n: Vec<u64>,
    pub ln_h: Vec<f64>,
    /// `−slope` of the least-squares line through `(N, ln h)`.
    pub rate: f64,
    /// `p(γ ln(γ/(r²p)) − γ + r²p)`, the rate implied by the Stirling bound.
    pub bound_rate: f64,
    pub monotone: bool,
}

pub fn h_scan(p: f64, r: f64, gamma: f64, grid: &[u64]) -> HScan {
    let ln_values: Vec<f64> = grid
        .iter()
        .map(|&n| ln_h(r * r * p * p * n as f64, gamma * p * n as f64))
        .collect();
    let xs: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let (slope, _) = least_squares(&xs, &ln_values);
    let u = gamma / (r * r * p);
    HScan {
        p,
        r,
        gamma,
        n: grid.to_vec(),
        monotone: ln_values.windows(2).all(|w| w[1] < w[0]),
        ln_h: ln_values,
        rate: -slope,
        bound_rate: p * (gamma * u.ln() - gamma + r * r * p),
    }
}

/// Slope and intercept of the least-squares line.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `n ln(n/e) + 1 ≤ ln n!` for `1 ≤ n ≤ n_max`; reports the smallest margin.
pub fn stirling_chain(n_max: u64) -> BoundReport {
    let mut ln_fact = CompensatedSum::new();
    let mut worst = BoundReport::new("stirling-chain", 0.0, 0.0);
    for n in 1..=n_max {
        ln_fact.add((n as f64).ln());
        let nf = n as f64;
        let report = BoundReport::new("stirling-chain", nf * (nf.ln() - 1.0) + 1.0, ln_fact.value());
        if n == 1 || report.margin < worst.margin {
            worst = report.with_detail(format!("n = {n}"));
        }
    }
    worst
}
