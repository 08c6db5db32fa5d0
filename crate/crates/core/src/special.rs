//! Gamma-family special functions used by the contour machinery.

use std::f64::consts::PI;

use num_complex::Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for `Re z ≥ 1/2` (Lanczos, g = 7).
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut series = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// Distance from `z` to the nearest pole `0, −1, −2, …` of `Γ`.
pub fn gamma_pole_distance(z: Complex64) -> f64 {
    let k = z.re.round().min(0.0);
    (z - k).norm()
}

/// `ln Γ(z)` (some branch; exponentiates to `Γ(z)`).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return ln_gamma_right(z);
    }
    let shift = (0.5 - z.re).ceil() as usize;
    let mut correction = Complex64::new(0.0, 0.0);
    for j in 0..shift {
        correction += (z + j as f64).ln();
    }
    ln_gamma_right(z + shift as f64) - correction
}

/// `Γ(z)` via upward recurrence to the Lanczos region; no reflection.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return ln_gamma_right(z).exp();
    }
    let shift = (0.5 - z.re).ceil() as usize;
    let mut denom = Complex64::new(1.0, 0.0);
    for j in 0..shift {
        denom *= z + j as f64;
    }
    ln_gamma_right(z + shift as f64).exp() / denom
}

/// `1/Γ(z)`, entire; exact zeros at the poles of `Γ`.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.re >= 0.5 {
        return (-ln_gamma_right(z)).exp();
    }
    let shift = (0.5 - z.re).ceil() as usize;
    let mut num = Complex64::new(1.0, 0.0);
    for j in 0..shift {
        num *= z + j as f64;
    }
    num * (-ln_gamma_right(z + shift as f64)).exp()
}

/// `ψ(x)` for `x > 0`: recurrence up to `x ≥ 10`, then the asymptotic series.
pub fn digamma(mut x: f64) -> f64 {
    assert!(x > 0.0, "digamma is only used on the positive axis");
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    acc + x.ln() - 0.5 / x - series
}

/// `ψ'(x)` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv * inv2
            * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
    acc + series
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_at_integers_and_half_integers() {
        let mut fact = 1.0;
        for n in 1..15 {
            let g = gamma(c(n as f64, 0.0));
            assert!((g.re / fact - 1.0).abs() < 1e-13, "n = {n}");
            fact *= n as f64;
        }
        let g = gamma(c(-0.5, 0.0));
        assert!((g.re + 2.0 * PI.sqrt()).abs() < 1e-13);
        let g = gamma(c(0.5, 0.0));
        assert!((g.re - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reflection_identity_off_axis() {
        for &(x, y) in &[(0.3, 0.7), (-2.4, 1.1), (5.5, -3.0), (-7.5, 0.25)] {
            let z = c(x, y);
            let lhs = gamma(z) * gamma(1.0 - z);
            let rhs = PI / (PI * z).sin();
            assert!((lhs - rhs).norm() / rhs.norm() < 1e-12, "{z}");
        }
    }

    #[test]
    fn recip_gamma_zeros() {
        assert_eq!(recip_gamma(c(-3.0, 0.0)).norm(), 0.0);
        assert!((recip_gamma(c(4.0, 0.0)).re - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-14, "{}", digamma(1.0) + euler);
        assert!((digamma(0.5) + euler + 2.0 * 2f64.ln()).abs() < 1e-14);
        for &x in &[0.3, 1.7, 4.2, 12.5, 150.0] {
            let reference = statrs::function::gamma::digamma(x);
            assert!((digamma(x) - reference).abs() < 1e-12 * reference.abs().max(1.0), "{x}");
            let fd = (digamma(x + 1e-5) - digamma(x - 1e-5)) / 2e-5;
            assert!((trigamma(x) - fd).abs() < 1e-6 * fd.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn pole_distance() {
        assert!((gamma_pole_distance(c(-1.5, 0.0)) - 0.5).abs() < 1e-15);
        assert!((gamma_pole_distance(c(2.0, 0.0)) - 2.0).abs() < 1e-15);
        assert!((gamma_pole_distance(c(-3.0, 0.1)) - 0.1).abs() < 1e-15);
    }
}
