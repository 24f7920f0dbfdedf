//! Numerical integration: Gauss–Legendre and Gauss–Hermite rules and an
//! adaptive Gauss–Kronrod (7/15) integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::QuadratureError;

/// Nodes and weights of a fixed quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// n-point Gauss–Hermite rule for ∫ f(x) e^{−x²} dx, nodes ascending.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n > 0, "Gauss–Hermite rule needs at least one node");
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^(−1/4)
    let nf = n as f64;
    let m = n.div_ceil(2);
    // Seed from the eigenvalues of the Jacobi matrix, then polish with Newton
    // on the normalized Hermite recurrence.
    let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (0.5 * i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut seeds: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    seeds.sort_by(|a, b| b.total_cmp(a));
    // Positive roots, largest first.
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = seeds[i];
        let mut pp = 0.0;
        for _ in 0..50 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z1.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / (pp * pp);
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..m {
        nodes.push(-x[i]);
        weights.push(w[i]);
    }
    let start = if n % 2 == 1 { m - 1 } else { m };
    for i in (0..start).rev() {
        nodes.push(x[i]);
        weights.push(w[i]);
    }
    if n % 2 == 1 {
        // middle node is exactly zero by symmetry
        nodes[m - 1] = 0.0;
    }
    Rule { nodes, weights }
}

/// Shared Gauss–Hermite rule with the given node count (200 and 400 are
/// cached, other sizes are built on demand).
pub fn cached_gauss_hermite(n: usize) -> std::borrow::Cow<'static, Rule> {
    static GH200: OnceLock<Rule> = OnceLock::new();
    static GH400: OnceLock<Rule> = OnceLock::new();
    match n {
        200 => std::borrow::Cow::Borrowed(GH200.get_or_init(|| gauss_hermite(200))),
        400 => std::borrow::Cow::Borrowed(GH400.get_or_init(|| gauss_hermite(400))),
        _ => std::borrow::Cow::Owned(gauss_hermite(n)),
    }
}

/// Applies a Legendre rule to [a, b].
pub fn fixed_legendre<F: Fn(f64) -> f64>(rule: &Rule, f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

// Kronrod 15-point abscissae and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss–Kronrod panel: (Kronrod estimate, |Kronrod − Gauss|).
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_PANELS: usize = 4000;

/// Globally adaptive Gauss–Kronrod integration of `f` over [a, b].
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral, QuadratureError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadratureError::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let (value, error) = gauss_kronrod_15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= MAX_PANELS {
            return Err(QuadratureError::NotConverged {
                estimate: total_err,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            heap.push(worst);
            return Err(QuadratureError::NotConverged {
                estimate: total_err,
                tolerance: tol,
            });
        }
        let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of the running totals.
    let panels = heap.len();
    let (value, error) = heap
        .into_iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Integral {
        value,
        error,
        panels,
    })
}

/// Integrates piecewise over consecutive breakpoints, summing values and
/// error estimates. Each piece gets its share of the absolute tolerance.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral, QuadratureError> {
    let pieces = breakpoints.len().saturating_sub(1).max(1);
    let per_piece = abs_tol / pieces as f64;
    let mut out = Integral {
        value: 0.0,
        error: 0.0,
        panels: 0,
    };
    for w in breakpoints.windows(2) {
        let r = integrate(&f, w[0], w[1], per_piece, rel_tol)?;
        out.value += r.value;
        out.error += r.error;
        out.panels += r.panels;
    }
    Ok(out)
}
