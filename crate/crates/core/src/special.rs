//! Gamma-function family and small numerical helpers shared by the closed forms.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
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

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    acc
}

/// `sin(pi * x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x.fract() == 0.0 {
        return 0.0;
    }
    // reduce to [-1, 1] before scaling by pi
    let r = x - 2.0 * (x / 2.0).round();
    (PI * r).sin()
}

/// The gamma function. Poles return `f64::NAN`.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    if x.fract() == 0.0 && x <= 30.0 {
        return (1..x as u32).map(f64::from).product();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// `ln |Gamma(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return (PI / sin_pi(x).abs()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// `1 / Gamma(x)`, which is entire: zero at the poles of gamma.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        return 0.0;
    }
    if x < 0.5 {
        // 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
        let s = sin_pi(x);
        if 1.0 - x < 171.0 {
            return s * gamma(1.0 - x) / PI;
        }
        return s * (ln_gamma(1.0 - x) - PI.ln()).exp();
    }
    if x > 171.0 {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma(x)
}

/// `x_+^p`: zero for `x <= 0`, evaluated as `exp(p ln x)` otherwise.
#[inline]
pub fn pow_plus(x: f64, p: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (p * x.ln()).exp()
    }
}

/// Generalized binomial coefficient `C(a, k)`.
pub fn binomial(a: f64, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (a - i as f64) / (i as f64 + 1.0);
    }
    c
}
