//! Contour-integral representation of truncated alternating sums.
//!
//! For `a > 0` the kernel `π/sin(πz) · a^z/Γ(z+1)` has simple poles exactly at
//! `z = 0, 1, 2, …` with residues `(−a)^α/α!`; the poles of `π/sin πz` at the
//! negative integers are cancelled by the zeros of `1/Γ(z+1)`. Hence
//!
//! ```text
//! Σ_{α=0}^{n} (−a)^α f(α)/α! = (1/2πi) ∮ π/sin(πz) · a^z/Γ(z+1) · f(z) dz
//! ```
//!
//! for any counterclockwise contour enclosing `0..=n` and no other
//! nonnegative integer. The same kernel equals `−a^z Γ(−z)`, which is the form
//! used on the vertical lines, where the left line may be moved freely to
//! the left and crossing a pole on the right removes exactly its residue.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::special::{digamma, gamma, recip_gamma, trigamma};

/// Minimum distance between a quadrature node and a pole.
pub const DEFAULT_POLE_GUARD: f64 = 0.1;
/// Relative agreement required between successive quadrature refinements.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-13;
/// Bound on the neglected tails of the vertical lines.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

const MAX_HEIGHT: f64 = 300.0;
const MAX_ROMBERG_LEVEL: usize = 20;
const MAX_HALVINGS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContourShape {
    HuggingRectangle,
    ShiftedRectangle,
    VerticalLines,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSpec {
    pub shape: ContourShape,
    pub left_anchor: f64,
    pub right_anchor: f64,
    /// Rectangle half height, or the starting truncation height for vertical lines.
    pub half_height: f64,
    /// Initial quadrature step (vertical lines and multi-dimensional grids).
    pub step: f64,
    pub tolerance: f64,
    pub tail_tolerance: f64,
    pub pole_guard: f64,
}

impl ContourSpec {
    /// Rectangle through `−1/2` and `n + 1/2`, height `±1`.
    pub fn hugging(n: u64) -> Self {
        Self {
            shape: ContourShape::HuggingRectangle,
            left_anchor: -0.5,
            right_anchor: n as f64 + 0.5,
            half_height: 1.0,
            step: 0.5,
            tolerance: DEFAULT_QUADRATURE_TOL,
            tail_tolerance: DEFAULT_TAIL_TOL,
            pole_guard: DEFAULT_POLE_GUARD,
        }
    }

    /// Hugging rectangle whose left side sits at `−1/2 + shift`.
    pub fn shifted_rectangle(n: u64, shift: i64) -> Self {
        Self {
            shape: ContourShape::ShiftedRectangle,
            left_anchor: -0.5 + shift as f64,
            ..Self::hugging(n)
        }
    }

    /// Two vertical lines at `−1/2 + shift` and `n + 1/2`.
    pub fn vertical(n: u64, shift: i64) -> Self {
        Self {
            shape: ContourShape::VerticalLines,
            left_anchor: -0.5 + shift as f64,
            half_height: 8.0,
            ..Self::hugging(n)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for anchor in [self.left_anchor, self.right_anchor] {
            let distance = (anchor - anchor.round()).abs();
            if distance < self.pole_guard {
                return Err(Error::PoleProximity { distance, guard: self.pole_guard });
            }
        }
        if self.left_anchor >= self.right_anchor {
            return Err(Error::InvalidParams(format!(
                "left anchor {} is not left of right anchor {}",
                self.left_anchor, self.right_anchor
            )));
        }
        if self.half_height < self.pole_guard || self.step <= 0.0 || self.tolerance <= 0.0 {
            return Err(Error::InvalidParams("contour height, step and tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// The weight functions `f` of the identity grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    One,
    Linear,
    Square,
    Exp10,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] =
        [TestFunction::One, TestFunction::Linear, TestFunction::Square, TestFunction::Exp10];

    pub fn eval(self, z: Complex64) -> Complex64 {
        match self {
            TestFunction::One => Complex64::new(1.0, 0.0),
            TestFunction::Linear => z,
            TestFunction::Square => z * z,
            TestFunction::Exp10 => (z / 10.0).exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::One => "1",
            TestFunction::Linear => "z",
            TestFunction::Square => "z^2",
            TestFunction::Exp10 => "exp(z/10)",
        }
    }
}

/// `Σ_{α=0}^{n} (−a)^α f(α)/α!`.
pub fn alternating_sum(a: f64, n: u64, f: impl Fn(Complex64) -> Complex64) -> f64 {
    let mut sum = CompensatedSum::new();
    let mut power = 1.0;
    for alpha in 0..=n {
        if alpha > 0 {
            power *= -a / alpha as f64;
        }
        sum.add(power * f(Complex64::new(alpha as f64, 0.0)).re);
    }
    sum.value()
}

/// Residue of the kernel times `f` at the pole `z = α`.
pub fn residue(a: f64, alpha: u64, f: impl Fn(Complex64) -> Complex64) -> f64 {
    let mut power = 1.0;
    for k in 1..=alpha {
        power *= -a / k as f64;
    }
    power * f(Complex64::new(alpha as f64, 0.0)).re
}

fn check_activity(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("contour activity must be positive, got {a}")))
    }
}

fn pole_distance(z: Complex64) -> f64 {
    let k = z.re.round().max(0.0);
    (z - k).norm()
}

/// `π/sin(πz) · a^z / Γ(z+1)`.
pub fn kernel_direct(z: Complex64, a: f64) -> Complex64 {
    PI / (PI * z).sin() * (z * a.ln()).exp() * recip_gamma(z + 1.0)
}

/// `−a^z Γ(−z)`.
pub fn kernel_reflected(z: Complex64, a: f64) -> Complex64 {
    -(z * a.ln()).exp() * gamma(-z)
}

fn guard_all(z: &[Complex64], guard: f64) -> Result<()> {
    for &zi in z {
        let distance = pole_distance(zi);
        if distance < guard {
            return Err(Error::PoleProximity { distance, guard });
        }
    }
    Ok(())
}

fn check_dims(z: &[Complex64], a: &[f64]) -> Result<()> {
    if z.len() != a.len() || z.is_empty() {
        return Err(Error::InvalidParams("z and a must have the same nonzero length".into()));
    }
    a.iter().try_for_each(|&ai| check_activity(ai))
}

/// `Π (−aᵢ^{zᵢ} Γ(−zᵢ)) · β`.
pub fn integrand_g(z: &[Complex64], a: &[f64], beta: Complex64, guard: f64) -> Result<Complex64> {
    check_dims(z, a)?;
    guard_all(z, guard)?;
    Ok(z.iter().zip(a).fold(beta, |acc, (&zi, &ai)| acc * kernel_reflected(zi, ai)))
}

/// `Π (π/sin πzᵢ) aᵢ^{zᵢ}/Γ(zᵢ+1) · β`, the unreflected form.
pub fn integrand_direct(z: &[Complex64], a: &[f64], beta: Complex64, guard: f64) -> Result<Complex64> {
    check_dims(z, a)?;
    guard_all(z, guard)?;
    Ok(z.iter().zip(a).fold(beta, |acc, (&zi, &ai)| acc * kernel_direct(zi, ai)))
}

/// Romberg integration of `g` over `[0, 1]`.
fn romberg(g: impl Fn(f64) -> Complex64, tolerance: f64) -> Result<Complex64> {
    let mut previous = vec![0.5 * (g(0.0) + g(1.0))];
    let mut magnitude = 0.5 * (g(0.0).norm() + g(1.0).norm());
    let mut change = f64::INFINITY;
    for level in 1..=MAX_ROMBERG_LEVEL {
        let count = 1usize << (level - 1);
        let h = 1.0 / (2 * count) as f64;
        let mut fresh = Complex64::new(0.0, 0.0);
        let mut fresh_abs = 0.0;
        for k in 0..count {
            let v = g((2 * k + 1) as f64 * h);
            fresh += v;
            fresh_abs += v.norm();
        }
        magnitude = 0.5 * magnitude + h * fresh_abs;
        let mut row = vec![0.5 * previous[0] + h * fresh];
        let mut factor = 1.0;
        for j in 1..=level.min(8) {
            factor *= 4.0;
            let extrapolated = row[j - 1] + (row[j - 1] - previous[j - 1]) / (factor - 1.0);
            row.push(extrapolated);
            if j == previous.len() {
                break;
            }
        }
        let best = *row.last().unwrap();
        change = (best - *previous.last().unwrap()).norm();
        if level >= 4 && change <= tolerance * magnitude.max(best.norm()).max(f64::MIN_POSITIVE) {
            return Ok(best);
        }
        previous = row;
    }
    Err(Error::QuadratureNonConvergence { change, tolerance })
}

/// `(1/2πi) ∮ g dz` over the rectangle of `spec`, counterclockwise.
pub fn rectangle_integral(g: impl Fn(Complex64) -> Complex64, spec: &ContourSpec) -> Result<Complex64> {
    spec.validate()?;
    let h = spec.half_height;
    let corners = [
        Complex64::new(spec.left_anchor, -h),
        Complex64::new(spec.right_anchor, -h),
        Complex64::new(spec.right_anchor, h),
        Complex64::new(spec.left_anchor, h),
    ];
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        let start = corners[k];
        let delta = corners[(k + 1) % 4] - start;
        total += romberg(|t| g(start + delta * t) * delta, spec.tolerance)?;
    }
    Ok(total / Complex64::new(0.0, 2.0 * PI))
}

/// Right side of the sum-to-contour identity.
pub fn contour_identity_rhs(
    a: f64,
    n: u64,
    f: impl Fn(Complex64) -> Complex64,
    spec: &ContourSpec,
) -> Result<f64> {
    check_activity(a)?;
    match spec.shape {
        ContourShape::VerticalLines => {
            let shift = (spec.left_anchor + 0.5).round();
            Ok(vertical_contour_eval(a, n, shift, f, spec)?.value.re)
        }
        _ => {
            Ok(rectangle_integral(|z| kernel_direct(z, a) * f(z), spec)?.re)
        }
    }
}

/// A root of `ψ(w) = ln a`, the stationary point of `a^{−w} Γ(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub a: f64,
    pub w_star: f64,
    pub z_star: f64,
    pub asymptotic: f64,
    pub residual: f64,
}

/// Solves `ψ(w) = ln a` on `(a, a + 1)`.
///
/// For `x > 0`, `ψ(x) < ln x` and `ψ(x + 1) > ln(x + 1/2)`, so the bracket
/// straddles the root for every `a > 0`.
pub fn stationary_point(a: f64) -> Result<StationaryPoint> {
    check_activity(a)?;
    let target = a.ln();
    let phi = |w: f64| digamma(w) - target;
    let (mut lo, mut hi) = (a, a + 1.0);
    if phi(lo) > 0.0 || phi(hi) < 0.0 {
        return Err(Error::NoRoot { m_tilde: a });
    }
    let mut w = 0.5 * (lo + hi);
    for _ in 0..200 {
        let value = phi(w);
        if value == 0.0 {
            break;
        }
        if value < 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let newton = w - value / trigamma(w);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - w).abs() <= 4.0 * f64::EPSILON * w {
            w = next;
            break;
        }
        w = next;
    }
    Ok(StationaryPoint { a, w_star: w, z_star: -w, asymptotic: a + 1.0, residual: phi(w).abs() })
}

/// Result of a vertical-line evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerticalValue {
    #[serde(serialize_with = "serialize_complex")]
    pub value: Complex64,
    pub shift: i64,
    pub height: f64,
    pub step: f64,
    pub tail_estimate: f64,
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Bound on `∫_{|y|>H}` of a line integrand, from its local decay rate at `±H`.
fn tail_estimate(line: &impl Fn(f64) -> Complex64, height: f64) -> Option<f64> {
    let mut total = 0.0;
    for sign in [-1.0, 1.0] {
        let outer = line(sign * height).norm();
        let inner = line(sign * (height - 1.0)).norm();
        if outer == 0.0 {
            continue;
        }
        let rate = (inner / outer).ln();
        if rate.is_nan() || rate <= 0.25 {
            return None;
        }
        total += outer / rate;
    }
    Some(total)
}

/// Trapezoid rule on `[−H, H]` with step halving until two successive
/// values agree.
fn trapezoid_line(
    line: &impl Fn(f64) -> Complex64,
    height: f64,
    initial_step: f64,
    tolerance: f64,
) -> Result<(Complex64, f64)> {
    let mut count = (2.0 * height / initial_step).ceil().max(2.0) as usize;
    let mut step = 2.0 * height / count as f64;
    let mut sum = 0.5 * (line(-height) + line(height));
    for k in 1..count {
        sum += line(-height + k as f64 * step);
    }
    let mut value = sum * step;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        let mut fresh = Complex64::new(0.0, 0.0);
        for k in 0..count {
            fresh += line(-height + (k as f64 + 0.5) * step);
        }
        sum += fresh;
        count *= 2;
        step *= 0.5;
        let next = sum * step;
        change = (next - value).norm();
        value = next;
        if change <= tolerance * value.norm().max(1.0) {
            return Ok((value, step));
        }
    }
    Err(Error::QuadratureNonConvergence { change, tolerance })
}

fn truncation_height(line: &impl Fn(f64) -> Complex64, spec: &ContourSpec) -> Result<(f64, f64)> {
    let peak = (0..=20).map(|k| line(k as f64 * 0.25).norm()).fold(0.0, f64::max);
    let mut height = spec.half_height.max(2.0);
    loop {
        if let Some(tail) = tail_estimate(line, height) {
            if tail <= spec.tail_tolerance * peak.max(1.0) {
                return Ok((height, tail));
            }
        }
        if height >= MAX_HEIGHT {
            let estimate = tail_estimate(line, height).unwrap_or(f64::INFINITY);
            return Err(Error::TailNotNegligible { height, estimate });
        }
        height = (height * 1.5).min(MAX_HEIGHT);
    }
}

/// The identity integral taken over the lines `Re z = −1/2 + floor(z0)`
/// (downward) and `Re z = n + 1/2` (upward).
///
/// With `floor(z0) ≤ 0` this equals the full alternating sum; with
/// `floor(z0) = k > 0` the poles `0..k` lie outside and their residues drop out.
pub fn vertical_contour_eval(
    a: f64,
    n: u64,
    z0: f64,
    f: impl Fn(Complex64) -> Complex64,
    spec: &ContourSpec,
) -> Result<VerticalValue> {
    check_activity(a)?;
    let shift = z0.floor() as i64;
    let lines = ContourSpec {
        shape: ContourShape::VerticalLines,
        left_anchor: -0.5 + shift as f64,
        right_anchor: n as f64 + 0.5,
        ..spec.clone()
    };
    lines.validate()?;
    let (x_left, x_right) = (lines.left_anchor, lines.right_anchor);
    let line = |y: f64| {
        let right = Complex64::new(x_right, y);
        let left = Complex64::new(x_left, y);
        kernel_reflected(right, a) * f(right) - kernel_reflected(left, a) * f(left)
    };
    let (height, tail) = truncation_height(&line, &lines)?;
    let (integral, step) = trapezoid_line(&line, height, lines.step, lines.tolerance)?;
    Ok(VerticalValue { value: integral / (2.0 * PI), shift, height, step, tail_estimate: tail / (2.0 * PI) })
}

/// Sum of the residues removed by moving the left line past `0..shift`.
pub fn crossed_residues(a: f64, shift: i64, f: impl Fn(Complex64) -> Complex64) -> f64 {
    (0..shift.max(0) as u64).map(|alpha| residue(a, alpha, &f)).sum()
}

/// Vertical-line evaluation in `s ≤ 3` variables with a joint factor `β(z)`.
///
/// Each variable gets its own pair of lines; the integrand is summed on the
/// tensor trapezoid grid over all `2^s` line combinations.
pub fn vertical_contour_eval_multi(
    a: &[f64],
    n: &[u64],
    shifts: &[i64],
    beta: &dyn Fn(&[Complex64]) -> Complex64,
    spec: &ContourSpec,
) -> Result<Complex64> {
    let s = a.len();
    if s == 0 || s > 3 || n.len() != s || shifts.len() != s {
        return Err(Error::InvalidParams(format!("multi-dimensional contours need 1 ≤ s ≤ 3, got {s}")));
    }
    a.iter().try_for_each(|&ai| check_activity(ai))?;
    let mut axes = Vec::with_capacity(s);
    for d in 0..s {
        let lines = ContourSpec {
            shape: ContourShape::VerticalLines,
            left_anchor: -0.5 + shifts[d] as f64,
            right_anchor: n[d] as f64 + 0.5,
            ..spec.clone()
        };
        lines.validate()?;
        let (xl, xr, ad) = (lines.left_anchor, lines.right_anchor, a[d]);
        let line = move |y: f64| {
            kernel_reflected(Complex64::new(xr, y), ad) - kernel_reflected(Complex64::new(xl, y), ad)
        };
        let (height, _) = truncation_height(&line, &lines)?;
        axes.push((xl, xr, height));
    }

    let evaluate = |step: f64| -> Complex64 {
        let nodes: Vec<Vec<(f64, [Complex64; 2])>> = axes
            .iter()
            .zip(a)
            .map(|(&(xl, xr, height), &ad)| {
                let count = (2.0 * height / step).ceil() as usize;
                let h = 2.0 * height / count as f64;
                (0..=count)
                    .map(|k| {
                        let y = -height + k as f64 * h;
                        let weight = if k == 0 || k == count { 0.5 * h } else { h };
                        let right = Complex64::new(xr, y);
                        let left = Complex64::new(xl, y);
                        (y, [kernel_reflected(right, ad) * weight, -kernel_reflected(left, ad) * weight])
                    })
                    .collect()
            })
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        let mut index = vec![0usize; s];
        let mut z = vec![Complex64::new(0.0, 0.0); s];
        loop {
            for side_mask in 0..(1usize << s) {
                let mut product = Complex64::new(1.0, 0.0);
                for d in 0..s {
                    let side = (side_mask >> d) & 1;
                    let (y, factors) = nodes[d][index[d]];
                    let x = if side == 0 { axes[d].1 } else { axes[d].0 };
                    z[d] = Complex64::new(x, y);
                    product *= factors[side];
                }
                total += product * beta(&z);
            }
            let mut d = 0;
            loop {
                if d == s {
                    return total / (2.0 * PI).powi(s as i32);
                }
                index[d] += 1;
                if index[d] < nodes[d].len() {
                    break;
                }
                index[d] = 0;
                d += 1;
            }
        }
    };

    let mut step = spec.step.max(0.1);
    let mut value = evaluate(step);
    let mut change = f64::INFINITY;
    for _ in 0..4 {
        step *= 0.5;
        let next = evaluate(step);
        change = (next - value).norm();
        value = next;
        if change <= spec.tolerance.max(1e-12) * value.norm().max(1.0) {
            return Ok(value);
        }
    }
    Err(Error::QuadratureNonConvergence { change, tolerance: spec.tolerance })
}

fn x_ln_x(x: Complex64) -> Complex64 {
    if x == Complex64::new(0.0, 0.0) {
        x
    } else {
        x * x.ln()
    }
}

/// `H̃(p, j)` continued to complex `j` with principal logarithms.
pub fn h_tilde_complex(p: f64, j: Complex64) -> Complex64 {
    x_ln_x(1.0 - 2.0 * j) + j - 0.5 * p * x_ln_x(1.0 - 2.0 * j / p)
}

/// `β̃ = exp(N·H̃(p, j))` at complex `j`.
pub fn beta_tilde_complex(p: f64, n: f64, j: Complex64) -> Complex64 {
    (n * h_tilde_complex(p, j)).exp()
}

/// `β̃` along a chunk: `j = (fixed + Σ zᵢ dᵢ)/N`.
pub fn dressed_beta(p: f64, n: f64, fixed_weight: f64, d: Vec<u32>) -> impl Fn(&[Complex64]) -> Complex64 {
    move |z: &[Complex64]| {
        let weight = z.iter().zip(&d).fold(Complex64::new(fixed_weight, 0.0), |acc, (&zi, &di)| acc + zi * di as f64);
        beta_tilde_complex(p, n, weight / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: fn(Complex64) -> Complex64 = |_| Complex64::new(1.0, 0.0);

    #[test]
    fn alternating_sum_examples() {
        assert_eq!(alternating_sum(3.7, 0, ONE), 1.0);
        assert!((alternating_sum(1.0, 2, ONE) - 0.5).abs() < 1e-15);
        let direct: f64 = (0..=3u32)
            .map(|k| (-2.0f64).powi(k as i32) * k as f64 / [1.0, 1.0, 2.0, 6.0][k as usize])
            .sum();
        assert!((alternating_sum(2.0, 3, |z| z) - direct).abs() < 1e-14);
    }

    #[test]
    fn single_residue() {
        let v = contour_identity_rhs(2.5, 0, ONE, &ContourSpec::hugging(0)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_matches_sum() {
        let v = contour_identity_rhs(1.0, 2, ONE, &ContourSpec::hugging(2)).unwrap();
        assert!((v - 0.5).abs() < 1e-10);
        let exact = alternating_sum(5.0, 10, |z| z * z);
        let v = contour_identity_rhs(5.0, 10, |z| z * z, &ContourSpec::hugging(10)).unwrap();
        assert!((v - exact).abs() <= 1e-10 * exact.abs().max(1e-2));
    }

    #[test]
    fn reflected_value_at_minus_half() {
        let g = integrand_g(&[Complex64::new(-0.5, 0.0)], &[1.0], Complex64::new(1.0, 0.0), DEFAULT_POLE_GUARD).unwrap();
        assert!((g - Complex64::new(-PI.sqrt(), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn pole_guard_rejects_near_integers() {
        let z = [Complex64::new(2.05, 0.0)];
        assert!(matches!(
            integrand_g(&z, &[1.0], Complex64::new(1.0, 0.0), DEFAULT_POLE_GUARD),
            Err(Error::PoleProximity { .. })
        ));
        // Negative integers are not poles of the kernel.
        let z = [Complex64::new(-2.0, 0.0)];
        assert!(integrand_g(&z, &[1.0], Complex64::new(1.0, 0.0), DEFAULT_POLE_GUARD).is_ok());
    }

    #[test]
    fn both_kernel_forms_agree() {
        for &(x, y, a) in &[(0.3, 0.2, 1.0), (-3.5, 2.0, 5.0), (7.4, -1.3, 0.5), (2.5, 10.0, 20.0)] {
            let z = [Complex64::new(x, y)];
            let beta = Complex64::new(0.7, -0.2);
            let g = integrand_g(&z, &[a], beta, DEFAULT_POLE_GUARD).unwrap();
            let d = integrand_direct(&z, &[a], beta, DEFAULT_POLE_GUARD).unwrap();
            assert!((g - d).norm() <= 1e-12 * g.norm(), "{x} {y} {a}");
        }
    }

    #[test]
    fn stationary_point_at_one() {
        let sp = stationary_point(1.0).unwrap();
        assert!((sp.w_star - 1.461_632_144_968_362).abs() < 1e-12);
        assert!(sp.residual < 1e-12);
        for &a in &[0.5, 5.0, 10.0, 100.0] {
            let sp = stationary_point(a).unwrap();
            assert!(sp.residual <= 1e-12, "{a}");
            assert!(sp.w_star > a && sp.w_star < a + 1.0);
        }
        let sp = stationary_point(10.0).unwrap();
        assert!((sp.w_star - sp.asymptotic).abs() <= 1.0);
    }

    #[test]
    fn stationary_point_agrees_with_reference_digamma() {
        for &a in &[0.5, 2.0, 37.0] {
            let w = stationary_point(a).unwrap().w_star;
            assert!((statrs::function::gamma::digamma(w) - a.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn vertical_lines_match_rectangle() {
        let hug = contour_identity_rhs(1.0, 3, ONE, &ContourSpec::hugging(3)).unwrap();
        let vert = vertical_contour_eval(1.0, 3, 0.0, ONE, &ContourSpec::vertical(3, 0)).unwrap();
        assert!((vert.value.re - hug).abs() < 1e-8);
        assert!(vert.value.im.abs() < 1e-8);
    }

    #[test]
    fn moving_left_crosses_nothing() {
        let exact = alternating_sum(4.0, 6, ONE);
        let sp = stationary_point(4.0).unwrap();
        let v = vertical_contour_eval(4.0, 6, sp.z_star, ONE, &ContourSpec::vertical(6, 0)).unwrap();
        assert_eq!(v.shift, -5);
        assert!((v.value.re - exact).abs() < 1e-8);
    }

    #[test]
    fn moving_right_drops_residues() {
        let full = alternating_sum(2.0, 5, |z| z * z);
        let v = vertical_contour_eval(2.0, 5, 2.3, |z| z * z, &ContourSpec::vertical(5, 0)).unwrap();
        let crossed = crossed_residues(2.0, 2, |z| z * z);
        assert!((v.value.re - (full - crossed)).abs() < 1e-8);
    }

    #[test]
    fn complex_entropy_matches_real() {
        let (p, j) = (0.3, 0.07);
        let real = crate::partition::eval_h(p, j).unwrap().h_tilde;
        assert!((h_tilde_complex(p, Complex64::new(j, 0.0)).re - real).abs() < 1e-14);
        assert_eq!(h_tilde_complex(p, Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn complex_entropy_is_holomorphic() {
        let (p, j) = (0.3, Complex64::new(0.05, 0.02));
        let h = 1e-6;
        let dx = (h_tilde_complex(p, j + h) - h_tilde_complex(p, j - h)) / (2.0 * h);
        let dy = (h_tilde_complex(p, j + Complex64::new(0.0, h)) - h_tilde_complex(p, j - Complex64::new(0.0, h)))
            / Complex64::new(0.0, 2.0 * h);
        assert!((dx - dy).norm() < 1e-8);
    }

    #[test]
    fn identity_grid() {
        for &a in &[0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            for n in 0..=10 {
                for f in TestFunction::ALL {
                    let exact = alternating_sum(a, n, |z| f.eval(z));
                    let v = contour_identity_rhs(a, n, |z| f.eval(z), &ContourSpec::hugging(n)).unwrap();
                    let err = (v - exact).abs();
                    assert!(err <= (1e-10 * exact.abs()).max(1e-12), "a={a} n={n} f={} err={err:e}", f.name());
                }
            }
        }
    }

    #[test]
    fn two_dimensional_product_factorizes() {
        let unit = |_: &[Complex64]| Complex64::new(1.0, 0.0);
        let spec = ContourSpec::vertical(0, 0);
        let joint = vertical_contour_eval_multi(&[1.0, 2.0], &[2, 3], &[0, 0], &unit, &spec).unwrap();
        let x = vertical_contour_eval(1.0, 2, 0.0, ONE, &ContourSpec::vertical(2, 0)).unwrap().value;
        let y = vertical_contour_eval(2.0, 3, 0.0, ONE, &ContourSpec::vertical(3, 0)).unwrap().value;
        assert!((joint - x * y).norm() < 1e-8, "{joint} vs {}", x * y);
    }

    #[test]
    fn dressed_line_integral_matches_residue_sum() {
        // j = 3z/N stays well inside (0, p/2) at every pole 0..=4.
        let (p, n_sys, a) = (0.4, 200.0, 1.5);
        let beta = dressed_beta(p, n_sys, 0.0, vec![3]);
        let exact: f64 = (0..=4u64)
            .map(|alpha| residue(a, alpha, |z| beta(&[z])))
            .sum();
        let v = vertical_contour_eval(a, 4, 0.0, |z| beta(&[z]), &ContourSpec::vertical(4, 0)).unwrap();
        assert!((v.value.re - exact).abs() < 1e-8 * exact.abs().max(1.0));
    }
}
