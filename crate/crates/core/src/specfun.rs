//! Bessel and Struve functions of order 0 and 1, and the sideband-area
//! kernel χ(θ) built from them.
//!
//! * `J₀, J₁` come from Miller's backward recurrence normalized with
//!   `J₀ + 2ΣJ₂ₖ = 1`; above |x| = 1000 the Hankel asymptotic form is used.
//! * `Y₀` uses the Neumann series over the same even-order J values.
//! * `H₀, H₁` use their power series up to [`STRUVE_SERIES_MAX`] and the
//!   Poisson-type integral representation (composite Gauss–Legendre) above.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::QuadratureError;
use crate::quadrature::{self, Rule};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest argument evaluated with the Struve power series. At x = 12 the
/// largest series term is ≈ 6·10³, so cancellation costs about four digits;
/// the series and the integral form agree to ~1e-13 there (checked in tests).
pub const STRUVE_SERIES_MAX: f64 = 12.0;

const ASYMPTOTIC_MIN: f64 = 1000.0;

/// Bessel function of the first kind Jₙ(x) for n ∈ {0, 1}.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    match order {
        0 => bessel_j0(x),
        1 => bessel_j1(x),
        _ => panic!("only orders 0 and 1 are supported, got {order}"),
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 1.0;
    }
    if ax > ASYMPTOTIC_MIN {
        return hankel_asymptotic(0, ax).0;
    }
    miller_sequence(ax, 1)[0]
}

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 0.0;
    }
    let v = if ax > ASYMPTOTIC_MIN {
        hankel_asymptotic(1, ax).0
    } else {
        miller_sequence(ax, 1)[1]
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Bessel function of the second kind Y₀(x), x > 0.
pub fn bessel_y0(x: f64) -> f64 {
    if x <= 0.0 {
        return if x == 0.0 { f64::NEG_INFINITY } else { f64::NAN };
    }
    if x > ASYMPTOTIC_MIN {
        return hankel_asymptotic(0, x).1;
    }
    let j = miller_sequence(x, 1);
    let mut sum = 0.0;
    let mut k = 1;
    while 2 * k < j.len() {
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        sum += sign * j[2 * k] / k as f64;
        k += 1;
    }
    FRAC_2_PI * ((0.5 * x).ln() + EULER_GAMMA) * j[0] - 2.0 * FRAC_2_PI * sum
}

/// Jₖ(x) for k = 0..=N with N large enough that the tail is negligible.
/// The returned vector always holds at least `min_len + 1` entries.
fn miller_sequence(x: f64, min_len: usize) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let start = {
        let n = x.ceil() as usize + min_len + 40 + (6.0 * x.sqrt()).ceil() as usize;
        n + (n % 2)
    };
    let mut j = vec![0.0; start + 2];
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    j[start] = cur;
    let inv_x = 1.0 / x;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 * inv_x * cur - next;
        next = cur;
        cur = prev;
        j[k - 1] = cur;
        if cur.abs() > 1e250 {
            for v in &mut j[k - 1..=start] {
                *v *= 1e-250;
            }
            cur *= 1e-250;
            next *= 1e-250;
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    let scale = 1.0 / norm;
    j.iter_mut().for_each(|v| *v *= scale);
    j
}

/// (Jₙ(x), Yₙ(x)) from the Hankel expansion, for large x only.
fn hankel_asymptotic(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (order * order) as f64;
    let z = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    for k in 1..12 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * z);
        if k % 2 == 1 {
            // k = 1, 3, 5 … contribute to Q with alternating signs
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * term;
        } else {
            let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
            p += sign * term;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    let amp = (FRAC_2_PI / x).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// Struve function Hₙ(x) for n ∈ {0, 1} and x ≥ 0.
pub fn struve_h(order: u32, x: f64) -> f64 {
    match order {
        0 => struve_h0(x),
        1 => struve_h1(x),
        _ => panic!("only orders 0 and 1 are supported, got {order}"),
    }
}

pub fn struve_h0(x: f64) -> f64 {
    if x < 0.0 {
        return -struve_h0(-x);
    }
    if x <= STRUVE_SERIES_MAX {
        struve_h0_series(x)
    } else {
        struve_h0_integral(x)
    }
}

pub fn struve_h1(x: f64) -> f64 {
    if x < 0.0 {
        return struve_h1(-x);
    }
    if x <= STRUVE_SERIES_MAX {
        struve_h1_series(x)
    } else {
        struve_h1_integral(x)
    }
}

/// H₀(x) = (2/π) Σ (−1)ᵏ x^{2k+1} / ((2k+1)!!)²
pub fn struve_h0_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = term;
    for k in 0..200 {
        let d = (2 * k + 3) as f64;
        term *= -x2 / (d * d);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_PI * sum
}

/// H₁(x) = (2/π) Σ (−1)ᵏ x^{2k+2} / ((2k+1)!! (2k+3)!!)
pub fn struve_h1_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x2 / 3.0;
    let mut sum = term;
    for k in 0..200 {
        term *= -x2 / (((2 * k + 3) * (2 * k + 5)) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_PI * sum
}

fn panel_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| quadrature::gauss_legendre(16))
}

/// ∫₀^{π/2} g(τ) dτ on panels over which x·cos τ changes by at most π.
fn oscillatory_quarter_period<G: Fn(f64) -> f64>(x: f64, g: G) -> f64 {
    let panels = (x / 2.0).ceil() as usize + 4;
    let width = FRAC_PI_2 / panels as f64;
    let rule = panel_rule();
    (0..panels)
        .map(|i| {
            let a = i as f64 * width;
            quadrature::fixed_legendre(rule, &g, a, a + width)
        })
        .sum()
}

/// H₀(x) = (2/π) ∫₀^{π/2} sin(x cos τ) dτ
pub fn struve_h0_integral(x: f64) -> f64 {
    FRAC_2_PI * oscillatory_quarter_period(x, |t| (x * t.cos()).sin())
}

/// H₁(x) = (2x/π) ∫₀^{π/2} sin(x cos τ) sin²τ dτ
pub fn struve_h1_integral(x: f64) -> f64 {
    FRAC_2_PI
        * x
        * oscillatory_quarter_period(x, |t| {
            let s = t.sin();
            (x * t.cos()).sin() * s * s
        })
}

/// How χ was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    ClosedForm,
    Quadrature,
}

/// One evaluation of the sideband-area kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEvaluation {
    pub theta: f64,
    pub chi: f64,
    pub method: KernelMethod,
}

impl KernelEvaluation {
    pub fn closed_form(theta: f64) -> Self {
        Self {
            theta,
            chi: chi(theta),
            method: KernelMethod::ClosedForm,
        }
    }

    pub fn quadrature(theta: f64) -> Result<Self, QuadratureError> {
        Ok(Self {
            theta,
            chi: chi_quadrature(theta)?,
            method: KernelMethod::Quadrature,
        })
    }
}

/// Saturation kernel of the sideband area,
/// χ(θ) = (π/2) J₁(θ) H₀(θ) + J₀(θ) (1 − (π/2) H₁(θ)).
///
/// χ is even, χ(0) = 1 and χ(θ) = 1 − θ²/12 + O(θ⁴).
pub fn chi(theta: f64) -> f64 {
    let t = theta.abs();
    if t == 0.0 {
        return 1.0;
    }
    FRAC_PI_2 * bessel_j1(t) * struve_h0(t) + bessel_j0(t) * (1.0 - FRAC_PI_2 * struve_h1(t))
}

/// χ(θ) from its integral definition
/// `(4/πθ) ∫₁^∞ sin²(θu/2) / (u √(u²−1)) du`.
///
/// The endpoint singularity is removed with u = cosh s on [1, 2]; the
/// oscillatory middle section is integrated period by period; the tail
/// beyond U (θU ≥ 400) is summed analytically from the asymptotic
/// integration-by-parts series.
pub fn chi_quadrature(theta: f64) -> Result<f64, QuadratureError> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(QuadratureError::Domain(format!(
            "χ quadrature needs θ > 0, got {theta}"
        )));
    }
    let abs_tol = 1e-12 * theta.min(1.0);
    let rel_tol = 1e-12;

    let head = quadrature::integrate(
        |s: f64| {
            let c = s.cosh();
            let h = (0.5 * theta * c).sin();
            h * h / c
        },
        0.0,
        2.0_f64.acosh(),
        abs_tol,
        rel_tol,
    )?;

    let period = 2.0 * PI / theta;
    let upper = (400.0 / theta).max(50.0);
    let mut breaks = vec![2.0];
    let mut b = 2.0_f64;
    while b < upper {
        b = (b + b.min(period)).min(upper);
        breaks.push(b);
    }
    let body = quadrature::integrate_pieces(
        |u: f64| {
            let h = (0.5 * theta * u).sin();
            h * h / (u * (u * u - 1.0).sqrt())
        },
        &breaks,
        abs_tol,
        rel_tol,
    )?;

    let tail = 0.5 * ((1.0 / upper).asin() - cosine_tail(theta, upper));
    let integral = head.value + body.value + tail;
    Ok(4.0 / (PI * theta) * integral)
}

/// ∫_U^∞ cos(θu) / (u√(u²−1)) du for θU ≫ 1.
///
/// With f(u) = Σⱼ cⱼ u^{−(2+2j)} (binomial expansion of (1−u⁻²)^{−1/2})
/// repeated integration by parts gives
/// `∫_U^∞ f e^{iθu} du = −e^{iθU} Σₖ (−1)ᵏ f⁽ᵏ⁾(U) / (iθ)^{k+1}`.
fn cosine_tail(theta: f64, upper: f64) -> f64 {
    const J_TERMS: usize = 8;
    const K_TERMS: usize = 12;
    let mut coeff = [0.0; J_TERMS];
    coeff[0] = 1.0;
    for j in 1..J_TERMS {
        coeff[j] = coeff[j - 1] * (2 * j - 1) as f64 / (2 * j) as f64;
    }
    // (−1)^k f^(k)(U) = Σ_j c_j (p)_k U^{−p−k}, with (p)_k the rising factorial.
    let deriv = |k: usize| -> f64 {
        (0..J_TERMS)
            .map(|j| {
                let p = (2 + 2 * j) as f64;
                let rising: f64 = (0..k).map(|i| p + i as f64).product();
                coeff[j] * rising * upper.powf(-p - k as f64)
            })
            .sum()
    };
    // 1/(iθ)^{k+1} = (−i)^{k+1} / θ^{k+1}
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 0..K_TERMS {
        let mag = deriv(k) / theta.powi(k as i32 + 1);
        match (k + 1) % 4 {
            0 => re += mag,
            1 => im -= mag,
            2 => re -= mag,
            _ => im += mag,
        }
    }
    // −e^{iθU}·(re + i im), real part
    let (s, c) = (theta * upper).sin_cos();
    -(c * re - s * im)
}
