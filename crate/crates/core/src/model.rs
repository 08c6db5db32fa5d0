//! Instance parameters, coupling sequences and the constrained
//! multi-index enumeration every other module builds on.

use std::collections::BTreeMap;

use dashu_int::IBig;
use dashu_ratio::RBig;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{pow_rational, rational_to_f64};

/// Default index cutoff.
pub const DEFAULT_IMAX: u32 = 8;
/// Default exponent in the box weights `Uᵢ = i^-(2+ε)`.
pub const DEFAULT_EPS: f64 = 1.0;

/// One problem instance: system size `N`, density `p`, growth radius `r`,
/// index cutoff and box-weight exponent.
///
/// `p` and `r` are exact rationals so that `pⁱN` and the growth
/// certificate are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    n: u64,
    p: RBig,
    r: RBig,
    imax: u32,
    eps: f64,
}

impl ModelParams {
    pub fn new(n: u64, p: RBig, r: RBig, imax: u32, eps: f64) -> Result<Self> {
        if !(p > RBig::ZERO && p < RBig::ONE) {
            return Err(Error::InvalidParams(format!("p = {p} must lie in (0, 1)")));
        }
        if r <= RBig::ZERO {
            return Err(Error::InvalidParams(format!("r = {r} must be positive")));
        }
        if imax < 2 {
            return Err(Error::InvalidParams(format!("imax = {imax} must be at least 2")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParams(format!("eps = {eps} must be positive")));
        }
        let params = Self { n, p, r, imax, eps };
        if n < 4 || params.budget() < 2 {
            return Err(Error::InvalidParams(format!(
                "need N >= 4 and pN/2 >= 2 (N = {n}, p = {})",
                params.p
            )));
        }
        Ok(params)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> &RBig {
        &self.p
    }

    pub fn r(&self) -> &RBig {
        &self.r
    }

    pub fn imax(&self) -> u32 {
        self.imax
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn p_f64(&self) -> f64 {
        rational_to_f64(&self.p)
    }

    pub fn r_f64(&self) -> f64 {
        rational_to_f64(&self.r)
    }

    /// Index set `{2, …, imax}`.
    pub fn indices(&self) -> Vec<u32> {
        (2..=self.imax).collect()
    }

    /// `floor(pN/2)`: the largest admissible `Σ i·αᵢ`.
    pub fn budget(&self) -> u64 {
        let scaled = RBig::from(self.n) * &self.p / RBig::from(2u8);
        let floor: IBig = scaled.floor();
        u64::try_from(floor).expect("budget fits in u64")
    }

    /// `M̃ = pN/4`, kept exact.
    pub fn half_budget(&self) -> RBig {
        RBig::from(self.n) * &self.p / RBig::from(4u8)
    }

    /// Whether a reserved weight `R` reaches the free-chunk threshold `R ≥ M̃`.
    pub fn reaches_half_budget(&self, reserved: u64) -> bool {
        RBig::from(reserved) >= self.half_budget()
    }

    /// `pⁱN`, exact.
    pub fn scale(&self, i: u32) -> RBig {
        pow_rational(&self.p, i) * RBig::from(self.n)
    }

    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(n, self.p.clone(), self.r.clone(), self.imax, self.eps)
    }

    pub fn with_imax(&self, imax: u32) -> Result<Self> {
        Self::new(self.n, self.p.clone(), self.r.clone(), imax, self.eps)
    }
}

/// Validated couplings `Jᵢ` (or `J̄ᵢ`) with `|Jᵢ| ≤ rⁱ`. Missing indices
/// are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSequence {
    values: BTreeMap<u32, RBig>,
    r: RBig,
}

impl CouplingSequence {
    pub fn get(&self, i: u32) -> RBig {
        self.values.get(&i).cloned().unwrap_or(RBig::ZERO)
    }

    pub fn get_f64(&self, i: u32) -> f64 {
        self.values.get(&i).map(rational_to_f64).unwrap_or(0.0)
    }

    pub fn r(&self) -> &RBig {
        &self.r
    }

    pub fn values(&self) -> &BTreeMap<u32, RBig> {
        &self.values
    }

    /// `P`: indices in `indices` with `Jᵢ ≥ 0`.
    pub fn positive(&self, indices: &[u32]) -> Vec<u32> {
        indices.iter().copied().filter(|&i| self.get(i) >= RBig::ZERO).collect()
    }

    /// `N`: indices in `indices` with `Jᵢ < 0`.
    pub fn negative(&self, indices: &[u32]) -> Vec<u32> {
        indices.iter().copied().filter(|&i| self.get(i) < RBig::ZERO).collect()
    }

    /// `Jᵢ = rⁱ` for `i = 2..=imax`.
    pub fn saturated(r: &RBig, imax: u32) -> Self {
        let values = (2..=imax).map(|i| (i, pow_rational(r, i))).collect();
        Self { values, r: r.clone() }
    }

    /// `Jᵢ = (-1)ⁱ rⁱ` for `i = 2..=imax`.
    pub fn alternating(r: &RBig, imax: u32) -> Self {
        let values = (2..=imax)
            .map(|i| {
                let v = pow_rational(r, i);
                (i, if i % 2 == 0 { v } else { -v })
            })
            .collect();
        Self { values, r: r.clone() }
    }

    pub fn zero(r: &RBig) -> Self {
        Self { values: BTreeMap::new(), r: r.clone() }
    }
}

/// Checks `|Jᵢ| ≤ rⁱ` exactly for every supplied index.
pub fn validate_couplings(values: BTreeMap<u32, RBig>, r: RBig) -> Result<CouplingSequence> {
    if r <= RBig::ZERO {
        return Err(Error::InvalidParams(format!("r = {r} must be positive")));
    }
    for (&i, v) in &values {
        if i < 2 {
            return Err(Error::InvalidParams(format!("coupling index {i} must be >= 2")));
        }
        let bound = pow_rational(&r, i);
        let abs = if *v < RBig::ZERO { -v.clone() } else { v.clone() };
        if abs > bound {
            return Err(Error::GrowthViolation {
                index: i,
                value: v.to_string(),
                bound: bound.to_string(),
            });
        }
    }
    Ok(CouplingSequence { values, r })
}

/// A multi-index `α = (α₂, α₃, …)`; absent entries are zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Occupation {
    alpha: BTreeMap<u32, u64>,
}

impl Occupation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u64)>) -> Self {
        let alpha = pairs.into_iter().filter(|&(_, a)| a > 0).collect();
        Self { alpha }
    }

    pub fn get(&self, i: u32) -> u64 {
        self.alpha.get(&i).copied().unwrap_or(0)
    }

    pub fn set(&mut self, i: u32, value: u64) {
        if value == 0 {
            self.alpha.remove(&i);
        } else {
            self.alpha.insert(i, value);
        }
    }

    /// Nonzero entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.alpha.iter().map(|(&i, &a)| (i, a))
    }

    pub fn weight(&self) -> u64 {
        occupation_weight(self)
    }

    pub fn is_admissible(&self, budget: u64) -> bool {
        self.weight() <= budget
    }
}

/// `Σ i·αᵢ`.
pub fn occupation_weight(alpha: &Occupation) -> u64 {
    alpha.iter().map(|(i, a)| i as u64 * a).sum()
}

/// Streams every occupation supported on `indices` with `Σ i·αᵢ ≤ budget`,
/// exactly once. The first index varies fastest.
pub fn enumerate_occupations(indices: &[u32], budget: u64) -> OccupationIter {
    OccupationIter::new(indices.to_vec(), budget)
}

/// Odometer over the admissible simplex. Cloning an iterator restarts work
/// from the same position, so a stream can be handed to another worker.
#[derive(Debug, Clone)]
pub struct OccupationIter {
    indices: Vec<u32>,
    budget: u64,
    current: Vec<u64>,
    weight: u64,
    done: bool,
}

impl OccupationIter {
    fn new(indices: Vec<u32>, budget: u64) -> Self {
        let current = vec![0; indices.len()];
        Self { indices, budget, current, weight: 0, done: false }
    }

    fn advance(&mut self) {
        for pos in 0..self.indices.len() {
            let step = self.indices[pos] as u64;
            if self.weight + step <= self.budget {
                self.current[pos] += 1;
                self.weight += step;
                return;
            }
            self.weight -= step * self.current[pos];
            self.current[pos] = 0;
        }
        self.done = true;
    }
}

impl Iterator for OccupationIter {
    type Item = Occupation;

    fn next(&mut self) -> Option<Occupation> {
        if self.done {
            return None;
        }
        let item = Occupation::from_pairs(
            self.indices.iter().copied().zip(self.current.iter().copied()),
        );
        self.advance();
        Some(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::parse_rational;

    fn q(s: &str) -> RBig {
        parse_rational(s).unwrap()
    }

    #[test]
    fn growth_boundary_is_valid() {
        let r = q("0.9");
        let seq = CouplingSequence::saturated(&r, 8);
        let seq = validate_couplings(seq.values().clone(), r).unwrap();
        let idx: Vec<u32> = (2..=8).collect();
        assert_eq!(seq.positive(&idx), idx);
        assert!(seq.negative(&idx).is_empty());
    }

    #[test]
    fn zero_couplings_have_empty_negative_set() {
        let values = (2..=5).map(|i| (i, RBig::ZERO)).collect();
        let seq = validate_couplings(values, RBig::ONE).unwrap();
        assert!(seq.negative(&[2, 3, 4, 5]).is_empty());
    }

    #[test]
    fn growth_violation_reports_index() {
        let values = BTreeMap::from([(2, q("1.01")), (3, q("0.5"))]);
        match validate_couplings(values, RBig::ONE) {
            Err(Error::GrowthViolation { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected GrowthViolation, got {other:?}"),
        }
    }

    #[test]
    fn params_reject_degenerate_instances() {
        assert!(ModelParams::new(8, q("1/2"), RBig::ONE, 4, 1.0).is_ok());
        assert!(ModelParams::new(3, q("1/2"), RBig::ONE, 4, 1.0).is_err());
        assert!(ModelParams::new(6, q("1/2"), RBig::ONE, 4, 1.0).is_err());
        assert!(ModelParams::new(8, q("1"), RBig::ONE, 4, 1.0).is_err());
        assert!(ModelParams::new(8, q("1/2"), RBig::ONE, 1, 1.0).is_err());
        assert!(ModelParams::new(8, q("1/2"), RBig::ONE, 4, 0.0).is_err());
    }

    #[test]
    fn budget_and_half_budget() {
        let p = ModelParams::new(48, q("1/4"), RBig::ONE, 4, 1.0).unwrap();
        assert_eq!(p.budget(), 6);
        assert_eq!(p.half_budget(), RBig::from(3));
        assert!(p.reaches_half_budget(3));
        assert!(!p.reaches_half_budget(2));
        let p = ModelParams::new(200, q("0.05"), RBig::ONE, 8, 1.0).unwrap();
        assert_eq!(p.budget(), 5);
        assert_eq!(p.half_budget(), q("5/2"));
    }

    #[test]
    fn empty_index_set_yields_one_occupation() {
        let all: Vec<_> = enumerate_occupations(&[], 10).collect();
        assert_eq!(all, vec![Occupation::new()]);
    }

    #[test]
    fn small_enumerations_match_hand_lists() {
        let got: Vec<(u64, u64)> = enumerate_occupations(&[2, 3], 2)
            .map(|a| (a.get(2), a.get(3)))
            .collect();
        assert_eq!(got, vec![(0, 0), (1, 0)]);
        let got: Vec<(u64, u64)> = enumerate_occupations(&[2, 3], 6)
            .map(|a| (a.get(2), a.get(3)))
            .collect();
        assert_eq!(got, vec![(0, 0), (1, 0), (2, 0), (3, 0), (0, 1), (1, 1), (0, 2)]);
    }

    #[test]
    fn weights() {
        assert_eq!(occupation_weight(&Occupation::new()), 0);
        assert_eq!(occupation_weight(&Occupation::from_pairs([(2, 3)])), 6);
        assert_eq!(occupation_weight(&Occupation::from_pairs([(2, 1), (5, 2)])), 12);
    }
}
