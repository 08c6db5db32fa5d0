//! Exact evaluators for `Z`, the dressed sum `Z*`, the entropy factors
//! `H`/`H̃`/`β̃`, the factorised product and the target series.

use std::collections::BTreeMap;

use dashu_ratio::RBig;

use crate::error::{Error, Result};
use crate::model::{CouplingSequence, ModelParams};
use crate::numeric::{pow_rational, to_float, Float};

/// Default cap on enumerated terms.
pub const DEFAULT_TERM_CAP: u64 = 10_000_000;

/// A partition-function value with its enumeration bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionValue<T> {
    pub value: T,
    /// Number of admissible occupations summed.
    pub term_count: u64,
    /// The budget `floor(pN/2)` the sum was restricted to.
    pub budget_used: u64,
}

/// Activity `Jᵢ pⁱ N`.
pub fn activity(params: &ModelParams, couplings: &CouplingSequence, i: u32) -> RBig {
    couplings.get(i) * params.scale(i)
}

/// Per-index tables of `aᵢ^α / α!` and their prefix sums, for
/// `α ≤ floor(budget / i)`.
#[derive(Debug, Clone)]
pub struct TermTable {
    activities: BTreeMap<u32, RBig>,
    terms: BTreeMap<u32, Vec<RBig>>,
    prefix: BTreeMap<u32, Vec<RBig>>,
}

impl TermTable {
    pub fn new(params: &ModelParams, couplings: &CouplingSequence) -> Self {
        let budget = params.budget();
        let mut activities = BTreeMap::new();
        let mut terms = BTreeMap::new();
        let mut prefix = BTreeMap::new();
        for i in params.indices() {
            let a = activity(params, couplings, i);
            let max_alpha = budget / i as u64;
            let mut row = Vec::with_capacity(max_alpha as usize + 1);
            let mut sums = Vec::with_capacity(max_alpha as usize + 1);
            let mut term = RBig::ONE;
            let mut running = RBig::ZERO;
            for alpha in 0..=max_alpha {
                if alpha > 0 {
                    term = term * &a / RBig::from(alpha);
                }
                running = &running + &term;
                row.push(term.clone());
                sums.push(running.clone());
            }
            activities.insert(i, a);
            terms.insert(i, row);
            prefix.insert(i, sums);
        }
        Self { activities, terms, prefix }
    }

    pub fn activity(&self, i: u32) -> &RBig {
        &self.activities[&i]
    }

    /// `aᵢ^α / α!`.
    pub fn term(&self, i: u32, alpha: u64) -> &RBig {
        &self.terms[&i][alpha as usize]
    }

    /// `Σ_{α ≤ m} aᵢ^α / α!`, with `m` clipped to the table length.
    pub fn prefix(&self, i: u32, m: u64) -> &RBig {
        let row = &self.prefix[&i];
        &row[(m as usize).min(row.len() - 1)]
    }

    pub fn max_alpha(&self, i: u32) -> u64 {
        self.terms[&i].len() as u64 - 1
    }

    /// Coefficients `c_w`, `w = 0..=max_weight`, of the weight generating
    /// polynomial of `Π_{i ∈ indices} Σ_{αᵢ ≤ windowᵢ} aᵢ^αᵢ/αᵢ! x^{iαᵢ}`.
    pub fn weight_polynomial(
        &self,
        indices: &[u32],
        window: Option<&BTreeMap<u32, u64>>,
        max_weight: u64,
    ) -> Vec<RBig> {
        let len = max_weight as usize + 1;
        let mut poly = vec![RBig::ZERO; len];
        poly[0] = RBig::ONE;
        for &i in indices {
            let step = i as usize;
            let mut limit = self.max_alpha(i);
            if let Some(w) = window.and_then(|w| w.get(&i)) {
                limit = limit.min(*w);
            }
            let mut next = vec![RBig::ZERO; len];
            for (w, coeff) in poly.iter().enumerate() {
                if *coeff == RBig::ZERO {
                    continue;
                }
                let mut alpha = 0u64;
                let mut target = w;
                while alpha <= limit && target < len {
                    next[target] = &next[target] + coeff * self.term(i, alpha);
                    alpha += 1;
                    target += step;
                }
            }
            poly = next;
        }
        poly
    }
}

/// `Z = Σ_α Π (Jᵢ pⁱ N)^αᵢ / αᵢ!` over `Σ i·αᵢ ≤ floor(pN/2)`, exactly.
pub fn eval_z(
    params: &ModelParams,
    couplings: &CouplingSequence,
    term_cap: u64,
) -> Result<PartitionValue<RBig>> {
    eval_z_ordered(params, couplings, &params.indices(), term_cap)
}

/// [`eval_z`] with an explicit index visiting order.
pub fn eval_z_ordered(
    params: &ModelParams,
    couplings: &CouplingSequence,
    order: &[u32],
    term_cap: u64,
) -> Result<PartitionValue<RBig>> {
    let table = TermTable::new(params, couplings);
    let by_weight = enumerate_by_weight(&table, order, params.budget(), term_cap)?;
    let value = by_weight.coefficients.iter().fold(RBig::ZERO, |acc, c| acc + c);
    Ok(PartitionValue { value, term_count: by_weight.terms, budget_used: params.budget() })
}

struct WeightedSum {
    coefficients: Vec<RBig>,
    terms: u64,
}

/// Depth-first enumeration of all admissible occupations, accumulating the
/// exact term of each into its weight bucket.
fn enumerate_by_weight(
    table: &TermTable,
    order: &[u32],
    budget: u64,
    term_cap: u64,
) -> Result<WeightedSum> {
    fn visit(
        table: &TermTable,
        order: &[u32],
        remaining: u64,
        weight: u64,
        product: &RBig,
        out: &mut WeightedSum,
        cap: u64,
    ) -> Result<()> {
        let Some((&i, rest)) = order.split_first() else {
            out.terms += 1;
            if out.terms > cap {
                return Err(Error::BudgetOverflow { cap });
            }
            let slot = &mut out.coefficients[weight as usize];
            *slot = &*slot + product;
            return Ok(());
        };
        let step = i as u64;
        for alpha in 0..=remaining / step {
            let next = product * table.term(i, alpha);
            visit(table, rest, remaining - alpha * step, weight + alpha * step, &next, out, cap)?;
        }
        Ok(())
    }

    let mut out = WeightedSum { coefficients: vec![RBig::ZERO; budget as usize + 1], terms: 0 };
    visit(table, order, budget, 0, &RBig::ONE, &mut out, term_cap)?;
    Ok(out)
}

/// Weight coefficients `c_w` of `Z` for `w ≤ budget`, by polynomial
/// multiplication instead of enumeration. `Z = Σ c_w`.
pub fn weight_coefficients(params: &ModelParams, couplings: &CouplingSequence) -> Vec<RBig> {
    let table = TermTable::new(params, couplings);
    table.weight_polynomial(&params.indices(), None, params.budget())
}

/// `Z` through [`weight_coefficients`]; independent of the enumerator.
pub fn eval_z_by_weight(params: &ModelParams, couplings: &CouplingSequence) -> RBig {
    weight_coefficients(params, couplings)
        .iter()
        .fold(RBig::ZERO, |acc, c| acc + c)
}

/// `Σ_{i=2}^{imax} pⁱ Jᵢ`.
pub fn target_series(params: &ModelParams, couplings: &CouplingSequence) -> f64 {
    target_series_exact(params, couplings).to_f64().value()
}

pub fn target_series_exact(params: &ModelParams, couplings: &CouplingSequence) -> RBig {
    params
        .indices()
        .into_iter()
        .fold(RBig::ZERO, |acc, i| acc + couplings.get(i) * pow_rational(params.p(), i))
}

/// `Π_i Σ_{αᵢ ≤ floor(budget/i)} (Jᵢ pⁱ N)^αᵢ / αᵢ!`: the constraint
/// dropped between indices but each factor cut at its own bounding box.
pub fn factorized_z(params: &ModelParams, couplings: &CouplingSequence) -> RBig {
    let table = TermTable::new(params, couplings);
    params
        .indices()
        .into_iter()
        .fold(RBig::ONE, |acc, i| acc * table.prefix(i, table.max_alpha(i)))
}

/// `H(p, j)` and `H̃(p, j) = H(p, j) − j ln p`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EntropyFactor {
    pub p: f64,
    pub j: f64,
    pub h: f64,
    pub h_tilde: f64,
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `H(p, j) = j ln p + (1−2j) ln(1−2j) + j − (p/2)(1−2j/p) ln(1−2j/p)`,
/// with `0·ln 0 = 0`.
pub fn eval_h(p: f64, j: f64) -> Result<EntropyFactor> {
    if !(p > 0.0 && p < 1.0) || !(0.0..=p / 2.0).contains(&j) || 2.0 * j >= 1.0 {
        return Err(Error::DomainError { p, j });
    }
    let h_tilde = xlnx(1.0 - 2.0 * j) + j - 0.5 * p * xlnx(1.0 - 2.0 * j / p);
    Ok(EntropyFactor { p, j, h: j * p.ln() + h_tilde, h_tilde })
}

fn xlnx_precise(x: &RBig, precision: usize) -> Float {
    if *x == RBig::ZERO {
        Float::ZERO
    } else {
        let xf = to_float(x, precision);
        xf.clone() * xf.ln()
    }
}

fn check_dimer_fraction(p: &RBig, j: &RBig) -> Result<()> {
    let half = RBig::from_parts(1.into(), 2u8.into());
    if *j < RBig::ZERO || *j > p * &half || *j >= half {
        return Err(Error::DomainError { p: p.to_f64().value(), j: j.to_f64().value() });
    }
    Ok(())
}

/// `H̃(p, j)` at `precision` bits for exact `p` and `j`.
pub fn h_tilde_precise(p: &RBig, j: &RBig, precision: usize) -> Result<Float> {
    check_dimer_fraction(p, j)?;
    let two = RBig::from(2u8);
    let one_minus_2j = RBig::ONE - &two * j;
    let one_minus_2j_p = RBig::ONE - &two * j / p;
    let first = xlnx_precise(&one_minus_2j, precision);
    let last = to_float(&(p / &two), precision) * xlnx_precise(&one_minus_2j_p, precision);
    Ok(first + to_float(j, precision) - last)
}

/// `H(p, j)` at `precision` bits, computed directly rather than as `j ln p + H̃`.
pub fn h_precise(p: &RBig, j: &RBig, precision: usize) -> Result<Float> {
    check_dimer_fraction(p, j)?;
    let two = RBig::from(2u8);
    let pf = to_float(p, precision);
    let jf = to_float(j, precision);
    let a = to_float(&(RBig::ONE - &two * j), precision);
    let b = to_float(&(RBig::ONE - &two * j / p), precision);
    let xlnx = |x: Float| if x == Float::ZERO { Float::ZERO } else { x.clone() * x.ln() };
    let half_p = pf.clone() / to_float(&two, precision);
    Ok(jf.clone() * pf.ln() + xlnx(a) + jf - half_p * xlnx(b))
}

/// `β̃(N, w) = exp(N·H̃(p, w/N))`.
pub fn beta_tilde(params: &ModelParams, weight: u64, precision: usize) -> Result<Float> {
    let n = RBig::from(params.n());
    let j = RBig::from(weight) / &n;
    let h = h_tilde_precise(params.p(), &j, precision)?;
    Ok((to_float(&n, precision) * h).exp())
}

/// `β(N, w) = exp(N·H(p, w/N))`.
pub fn beta(params: &ModelParams, weight: u64, precision: usize) -> Result<Float> {
    let n = RBig::from(params.n());
    let j = RBig::from(weight) / &n;
    let h = h_precise(params.p(), &j, precision)?;
    Ok((to_float(&n, precision) * h).exp())
}

/// Weighting applied to each term of the dressed sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dressing {
    /// `β̃(N, Σ i·αᵢ)`: the genuine `Z*`.
    Entropy,
    /// `β̃ ≡ 1`, reducing `Z*` to `Z`.
    Unit,
}

/// `Z* = Σ_α β̃(N, Σ i·αᵢ) Π (J̄ᵢ pⁱ N)^αᵢ / αᵢ!` over the admissible α.
pub fn eval_zstar(
    params: &ModelParams,
    couplings: &CouplingSequence,
    precision: usize,
    term_cap: u64,
) -> Result<PartitionValue<Float>> {
    eval_zstar_with(params, couplings, precision, term_cap, Dressing::Entropy)
}

pub fn eval_zstar_with(
    params: &ModelParams,
    couplings: &CouplingSequence,
    precision: usize,
    term_cap: u64,
    dressing: Dressing,
) -> Result<PartitionValue<Float>> {
    let table = TermTable::new(params, couplings);
    let by_weight = enumerate_by_weight(&table, &params.indices(), params.budget(), term_cap)?;
    let value = contract_with_dressing(params, &by_weight.coefficients, 0, precision, dressing)?;
    Ok(PartitionValue { value, term_count: by_weight.terms, budget_used: params.budget() })
}

/// `Σ_w c_w · β̃(N, offset + w)`.
pub fn contract_with_dressing(
    params: &ModelParams,
    coefficients: &[RBig],
    offset: u64,
    precision: usize,
    dressing: Dressing,
) -> Result<Float> {
    let mut total = Float::ZERO.with_precision(precision).value();
    for (w, c) in coefficients.iter().enumerate() {
        if *c == RBig::ZERO {
            continue;
        }
        let term = to_float(c, precision);
        total += match dressing {
            Dressing::Unit => term,
            Dressing::Entropy => term * beta_tilde(params, offset + w as u64, precision)?,
        };
    }
    Ok(total)
}

/// `Z*` through the weight coefficients rather than term enumeration.
pub fn eval_zstar_by_weight(
    params: &ModelParams,
    couplings: &CouplingSequence,
    precision: usize,
) -> Result<Float> {
    let coefficients = weight_coefficients(params, couplings);
    contract_with_dressing(params, &coefficients, 0, precision, Dressing::Entropy)
}

/// Couplings that may vary with `N`, emulating `J̄ᵢ = J̄ᵢ(N)`. The entry with
/// the largest key `≤ N` applies; below every key the base sequence does.
#[derive(Debug, Clone)]
pub struct CouplingSchedule {
    base: CouplingSequence,
    by_n: BTreeMap<u64, CouplingSequence>,
}

impl CouplingSchedule {
    pub fn constant(base: CouplingSequence) -> Self {
        Self { base, by_n: BTreeMap::new() }
    }

    pub fn insert(&mut self, n: u64, couplings: CouplingSequence) {
        self.by_n.insert(n, couplings);
    }

    pub fn at(&self, n: u64) -> &CouplingSequence {
        self.by_n.range(..=n).next_back().map(|(_, c)| c).unwrap_or(&self.base)
    }
}
