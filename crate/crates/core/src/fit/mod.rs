//! Nonlinear least squares and the spectrum, crossing and area analyses
//! built on it.

mod areas;
mod crossing;
mod lorentzian;

pub use areas::{area_model, fit_area_model, AreaPoint};
pub use crossing::{crossing_model, fit_avoided_crossing, CrossingGuess, CrossingPoint};
pub use lorentzian::{
    background_level, extract_area_raw, fit_lorentzian_doublet, find_peaks, lorentzian, DoubletConstraints,
    LorentzianModel, LorentzianPeak,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::FitError;

/// Domain of a fit parameter, enforced by reparametrization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Free,
    /// p = exp(u)
    Positive,
    /// p = a + (b − a)(1 + sin u)/2
    Interval(f64, f64),
}

impl Bound {
    fn to_external(self, u: f64) -> f64 {
        match self {
            Bound::Free => u,
            Bound::Positive => u.exp(),
            Bound::Interval(a, b) => a + (b - a) * 0.5 * (1.0 + u.sin()),
        }
    }

    fn to_internal(self, p: f64) -> f64 {
        match self {
            Bound::Free => p,
            Bound::Positive => p.ln(),
            Bound::Interval(a, b) => (2.0 * (p - a) / (b - a) - 1.0).clamp(-1.0, 1.0).asin(),
        }
    }

    /// dp/du
    fn derivative(self, u: f64) -> f64 {
        match self {
            Bound::Free => 1.0,
            Bound::Positive => u.exp(),
            Bound::Interval(a, b) => 0.5 * (b - a) * u.cos(),
        }
    }

    fn admits(self, p: f64) -> bool {
        match self {
            Bound::Free => p.is_finite(),
            Bound::Positive => p > 0.0 && p.is_finite(),
            Bound::Interval(a, b) => (a..=b).contains(&p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub fixed: bool,
}

impl ParamSpec {
    pub fn new(name: &str, value: f64, bound: Bound) -> Self {
        Self {
            name: name.to_string(),
            value,
            bound,
            fixed: false,
        }
    }

    pub fn fixed(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            bound: Bound::Free,
            fixed: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Tolerance on the scaled gradient (cosine between residual and
    /// Jacobian columns).
    pub gtol: f64,
    /// Tolerance on the relative step.
    pub xtol: f64,
    pub initial_lambda: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gtol: 1e-10,
            xtol: 1e-10,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWarning {
    /// JᵀJ is numerically singular at the optimum; errors are undefined.
    SingularJacobian,
    /// The fitted coupling angle is compatible with zero.
    DegenerateCrossing,
    /// Two fitted peaks overlap within their widths.
    MergedPeaks,
    /// The data do not straddle the fitted crossing power.
    InsufficientSpan,
    /// Iteration limit reached before convergence.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    /// Linearized standard errors; 0 for fixed parameters, NaN when the
    /// covariance is singular.
    pub stderr: Vec<f64>,
    pub fixed: Vec<bool>,
    /// √(Σ r²) at the optimum.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_data: usize,
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.params[i])
    }

    pub fn error_of(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.stderr[i])
    }

    /// Parameter by name; panics when absent.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no fit parameter named `{name}`"))
    }

    pub fn has_warning(&self, w: FitWarning) -> bool {
        self.warnings.contains(&w)
    }

    fn warn(&mut self, w: FitWarning) {
        if !self.has_warning(w) {
            self.warnings.push(w);
        }
    }
}

struct Problem<'a, F> {
    model: &'a F,
    specs: &'a [ParamSpec],
    free: Vec<usize>,
    n_data: usize,
}

impl<F: Fn(&[f64]) -> Vec<f64>> Problem<'_, F> {
    fn external(&self, u: &DVector<f64>) -> Vec<f64> {
        let mut p: Vec<f64> = self.specs.iter().map(|s| s.value).collect();
        for (k, &i) in self.free.iter().enumerate() {
            p[i] = self.specs[i].bound.to_external(u[k]);
        }
        p
    }

    fn residuals(&self, u: &DVector<f64>) -> Result<DVector<f64>, FitError> {
        let r = (self.model)(&self.external(u));
        if r.len() != self.n_data {
            return Err(FitError::ResidualCount {
                expected: self.n_data,
                got: r.len(),
            });
        }
        Ok(DVector::from_vec(r))
    }

    fn jacobian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>, FitError> {
        let mut jac = DMatrix::zeros(self.n_data, u.len());
        for k in 0..u.len() {
            let h = 1e-6 * u[k].abs().max(1e-3);
            let mut up = u.clone();
            let mut down = u.clone();
            up[k] += h;
            down[k] -= h;
            let col = (self.residuals(&up)? - self.residuals(&down)?) / (2.0 * h);
            jac.set_column(k, &col);
        }
        Ok(jac)
    }
}

fn cost(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

/// Largest |cos| between the residual vector and a Jacobian column.
fn scaled_gradient(jac: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rn = r.norm();
    if rn == 0.0 {
        return 0.0;
    }
    let g = jac.transpose() * r;
    (0..jac.ncols())
        .map(|k| {
            let cn = jac.column(k).norm();
            if cn == 0.0 {
                0.0
            } else {
                g[k].abs() / (cn * rn)
            }
        })
        .fold(0.0, f64::max)
}

/// Levenberg–Marquardt minimization of Σ rᵢ² where `model` maps the full
/// parameter vector (in `specs` order) to `n_data` residuals.
pub fn least_squares_fit<F>(model: F, n_data: usize, specs: &[ParamSpec], opts: &FitOptions) -> Result<FitResult, FitError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    for s in specs {
        if !s.fixed && !s.bound.admits(s.value) {
            return Err(FitError::InvalidGuess {
                name: s.name.clone(),
                reason: format!("{} violates {:?}", s.value, s.bound),
            });
        }
        if !s.value.is_finite() {
            return Err(FitError::InvalidGuess {
                name: s.name.clone(),
                reason: "not finite".into(),
            });
        }
    }
    let free: Vec<usize> = (0..specs.len()).filter(|&i| !specs[i].fixed).collect();
    if n_data <= free.len() {
        return Err(FitError::TooFewData {
            data: n_data,
            params: free.len(),
        });
    }
    let problem = Problem {
        model: &model,
        specs,
        free: free.clone(),
        n_data,
    };
    let mut u = DVector::from_iterator(free.len(), free.iter().map(|&i| specs[i].bound.to_internal(specs[i].value)));
    let mut r = problem.residuals(&u)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let mut c = cost(&r);
    let c_start = c;
    // residuals shrunk to roundoff relative to the start count as an exact fit
    let collapsed = |c: f64| c <= 1e-26 * c_start;
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = problem.jacobian(&u)?;

    while iterations < opts.max_iterations {
        iterations += 1;
        if scaled_gradient(&jac, &r) <= opts.gtol || collapsed(c) {
            converged = true;
            break;
        }
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * &r;
        let diag_floor = 1e-12 * a.diagonal().max().max(1e-300);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for k in 0..damped.nrows() {
                damped[(k, k)] += lambda * a[(k, k)].max(diag_floor);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let trial = &u + &step;
            let rt = match problem.residuals(&trial) {
                Ok(v) if v.iter().all(|x| x.is_finite()) => v,
                Ok(_) => {
                    lambda *= 4.0;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let ct = cost(&rt);
            if ct < c {
                let small_step = step.norm() <= opts.xtol * (u.norm() + opts.xtol);
                let stalled = c - ct <= 1e-15 * c;
                u = trial;
                r = rt;
                c = ct;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                jac = problem.jacobian(&u)?;
                if small_step || (stalled && scaled_gradient(&jac, &r) <= opts.gtol.sqrt()) {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = scaled_gradient(&jac, &r) <= opts.gtol.sqrt() || collapsed(c);
            break;
        }
    }

    let params = problem.external(&u);
    let dof = (n_data - free.len()) as f64;
    let s2 = 2.0 * c / dof;
    let mut stderr = vec![0.0; specs.len()];
    let mut result = FitResult {
        names: specs.iter().map(|s| s.name.clone()).collect(),
        params,
        stderr: Vec::new(),
        fixed: specs.iter().map(|s| s.fixed).collect(),
        residual_norm: (2.0 * c).sqrt(),
        iterations,
        converged,
        n_data,
        warnings: Vec::new(),
    };
    if !free.is_empty() {
        let sv = jac.clone().svd(false, false).singular_values;
        let (smax, smin) = (sv.max(), sv.min());
        let singular = !(smin > 1e-10 * smax);
        let cov = (jac.transpose() * &jac).try_inverse();
        match cov {
            Some(cov) if !singular => {
                for (k, &i) in free.iter().enumerate() {
                    let d = specs[i].bound.derivative(u[k]);
                    stderr[i] = (s2 * cov[(k, k)]).max(0.0).sqrt() * d.abs();
                }
            }
            _ => {
                for &i in &free {
                    stderr[i] = f64::NAN;
                }
                result.warn(FitWarning::SingularJacobian);
            }
        }
    }
    result.stderr = stderr;
    if !converged && iterations >= opts.max_iterations {
        result.warn(FitWarning::MaxIterations);
    }
    Ok(result)
}

/// Runs [`least_squares_fit`] from several starting points and keeps the
/// lowest residual.
pub(crate) fn best_of<F>(model: &F, n_data: usize, starts: &[Vec<ParamSpec>], opts: &FitOptions) -> Result<FitResult, FitError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut best: Option<FitResult> = None;
    let mut last_err = None;
    for specs in starts {
        match least_squares_fit(model, n_data, specs, opts) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.residual_norm < b.residual_norm) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(FitError::InvalidInput("no starting point".into())))
}
