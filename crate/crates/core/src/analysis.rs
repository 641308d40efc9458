//! Quadrature oracles, convergence metrics, goodness-of-fit testing, and
//! the figure data series.
//!
//! Everything here is deliberately independent of the closed forms it
//! checks: moments come from Gauss-Legendre quadrature of the density,
//! the cdf cross-check integrates the pdf directly, and the KS machinery
//! only ever sees sample values and a cdf callback. A formula is never
//! tested against itself.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use crate::distribution::{maxwellian_pdf_dimensionless, FiniteNDistribution};
use crate::error::{Error, Result};

/// Starting Gauss-Legendre order for the adaptive ladder.
const GL_MIN_ORDER: usize = 512;
/// Hard cap; failing to stabilize by here is a convergence error.
const GL_MAX_ORDER: usize = 8192;
/// Successive doubled estimates must agree this closely.
const GL_LADDER_TOL: f64 = 1e-12;
/// Fixed order for the distance metrics, whose integrands have corners
/// (|·| crossings, support edges) that would stall the 1e-12 ladder.
const METRIC_ORDER: usize = 4096;
/// Metrics integrate over |v̄| <= 8; the Gaussian mass beyond is < 1e-14.
const METRIC_WINDOW: f64 = 8.0;

/// Nodes and weights of one quadrature rule.
type NodeTable = Arc<(Vec<f64>, Vec<f64>)>;

/// Legendre nodes and weights on [-1, 1], cached per order.
fn legendre_nodes(order: usize) -> NodeTable {
    static CACHE: OnceLock<Mutex<HashMap<usize, NodeTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("node cache lock poisoned");
    map.entry(order)
        .or_insert_with(|| Arc::new(compute_legendre_nodes(order)))
        .clone()
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let deriv = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, deriv)
}

/// Newton iteration from the Chebyshev-like initial guesses; the roots
/// are symmetric, so only half are solved for.
fn compute_legendre_nodes(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            deriv = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order Gauss-Legendre estimate of ∫_a^b f, compensated sum.
fn gl_fixed(f: &dyn Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let pair = legendre_nodes(order);
    let (nodes, weights) = (&pair.0, &pair.1);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let term = w * f(mid + half * x);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    half * (sum + comp)
}

/// Doubling ladder: start at 512 nodes, accept once two successive
/// estimates differ by less than 1e-12, give up past 8192.
fn gl_ladder(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let mut prev = f64::NAN;
    let mut order = GL_MIN_ORDER;
    loop {
        let estimate = gl_fixed(f, a, b, order);
        if (estimate - prev).abs() <= GL_LADDER_TOL * estimate.abs().max(1.0) {
            return Ok(estimate);
        }
        if order >= GL_MAX_ORDER {
            return Err(Error::Convergence(format!(
                "integral did not stabilize to {GL_LADDER_TOL:e} within {GL_MAX_ORDER} nodes"
            )));
        }
        prev = estimate;
        order *= 2;
    }
}

/// ln cos φ without cancellation: cos φ = 1 − 2 sin²(φ/2), so the log is
/// accurate to full relative precision even where cos φ ≈ 1 and the
/// exponent (N−2)·ln cos φ multiplies any error by a million.
fn ln_cos(phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    (-2.0 * s * s).ln_1p()
}

/// ∫ |v|^p F(v) dv by substituting v = √Ē sin φ.
///
/// The substitution turns the integrand into
/// C · Ē^{(p+1)/2} · |sin φ|^p · cos^{N−2} φ, smooth on (−π/2, π/2) for
/// every N >= 2: the Jacobian soaks up the N = 2 endpoint singularity.
/// Folding to [0, π/2] and doubling removes the |sin|^p corner at 0.
pub fn quad_pdf_integral(dist: &FiniteNDistribution, p: u32) -> Result<f64> {
    if p > 4 {
        return Err(Error::Domain(format!(
            "moment order must be in 0..=4, got {p}"
        )));
    }
    let params = dist.params();
    let n = params.n_molecules() as f64;
    let pf = p as f64;
    let log_scale = dist.log_norm() + 0.5 * (pf + 1.0) * params.energy_scale().ln();
    let half = gl_ladder(
        &|phi: f64| (log_scale + pf * phi.sin().ln() + (n - 2.0) * ln_cos(phi)).exp(),
        0.0,
        FRAC_PI_2,
    )?;
    Ok(2.0 * half)
}

/// P(V <= v) by direct quadrature of the pdf, same substitution.
///
/// This is the independent oracle for the incomplete-beta closed form.
pub fn cdf_by_quadrature(dist: &FiniteNDistribution, v: f64) -> Result<f64> {
    if v.is_nan() {
        return Err(Error::Domain("cdf requires non-NaN v".into()));
    }
    let params = dist.params();
    let radius = params.support_radius();
    if v <= -radius {
        return Ok(0.0);
    }
    if v >= radius {
        return Ok(1.0);
    }
    let n = params.n_molecules() as f64;
    let log_scale = dist.log_norm() + 0.5 * params.energy_scale().ln();
    let phi_v = (v / radius).asin();
    let mass = gl_ladder(
        &|phi: f64| (log_scale + (n - 2.0) * ln_cos(phi)).exp(),
        -FRAC_PI_2,
        phi_v,
    )?;
    Ok(mass.clamp(0.0, 1.0))
}

/// Evenly spaced evaluation grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || min >= max {
            return Err(Error::InvalidParam(format!(
                "grid needs finite min < max, got {min}..{max}"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidParam(format!(
                "grid needs at least 2 points, got {points}"
            )));
        }
        Ok(Self { min, max, points })
    }

    pub fn linspace(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == last {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// Distance of each finite-N law from the Gaussian limit, in reduced
/// units, over a shared grid.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub n_values: Vec<u64>,
    pub grid: Vec<f64>,
    pub finite_pdf: Vec<Vec<f64>>,
    pub maxwell_pdf: Vec<f64>,
    pub sup_norm: Vec<f64>,
    pub total_variation: Vec<f64>,
    pub kl_divergence: Vec<f64>,
}

/// Sup-norm on the grid plus integral metrics for one pair of densities.
///
/// `radius` bounds the support of `pdf_a`; the integrals substitute
/// v = radius·sin φ so the Jacobian cancels any endpoint singularity of
/// `pdf_a` (the N = 2 case). Integration is truncated to |v| <= 8 where
/// the neglected Gaussian mass is below 1e-14. `pdf_b` must be positive
/// on the window. Fixed-order rule: the total-variation integrand has
/// corners wherever the densities cross, so the high-precision ladder
/// does not apply; 4096 nodes give far more accuracy than the metric
/// consumers need.
fn density_metrics(
    radius: f64,
    grid: &[f64],
    pdf_a: &dyn Fn(f64) -> f64,
    pdf_b: &dyn Fn(f64) -> f64,
) -> (f64, f64, f64) {
    let mut sup: f64 = 0.0;
    for &v in grid {
        sup = sup.max((pdf_a(v) - pdf_b(v)).abs());
    }
    let phi_max = if radius <= METRIC_WINDOW {
        FRAC_PI_2
    } else {
        (METRIC_WINDOW / radius).asin()
    };
    let tv_inside = gl_fixed(
        &|phi: f64| {
            let v = radius * phi.sin();
            (pdf_a(v) - pdf_b(v)).abs() * radius * phi.cos()
        },
        -phi_max,
        phi_max,
        METRIC_ORDER,
    );
    // outside the support of pdf_a only pdf_b contributes to TV
    let tv_outside = if radius < METRIC_WINDOW {
        2.0 * gl_fixed(pdf_b, radius, METRIC_WINDOW, 256)
    } else {
        0.0
    };
    let kl = gl_fixed(
        &|phi: f64| {
            let v = radius * phi.sin();
            let fa = pdf_a(v);
            if fa == 0.0 {
                return 0.0;
            }
            fa * (fa.ln() - pdf_b(v).ln()) * radius * phi.cos()
        },
        -phi_max,
        phi_max,
        METRIC_ORDER,
    );
    (sup, 0.5 * (tv_inside + tv_outside), kl)
}

/// Compare each F̄_N against F̄_M: sup-norm on the grid, total variation,
/// and KL(F̄_N ‖ F̄_M). The KL direction matters: the reverse is infinite
/// because F̄_N has bounded support.
pub fn convergence_report(n_values: &[u64], grid_spec: &GridSpec) -> Result<ConvergenceReport> {
    if n_values.is_empty() {
        return Err(Error::InvalidParam("need at least one N value".into()));
    }
    if grid_spec.min > -4.0 || grid_spec.max < 4.0 {
        return Err(Error::InvalidParam(format!(
            "grid must cover [-4, 4], got [{}, {}]",
            grid_spec.min, grid_spec.max
        )));
    }
    let grid = grid_spec.linspace();
    let maxwell_pdf: Vec<f64> = grid
        .iter()
        .map(|&v| maxwellian_pdf_dimensionless(v))
        .collect();
    let mut finite_pdf = Vec::with_capacity(n_values.len());
    let mut sup_norm = Vec::with_capacity(n_values.len());
    let mut total_variation = Vec::with_capacity(n_values.len());
    let mut kl_divergence = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let dist = FiniteNDistribution::dimensionless(n)?;
        let row: Vec<f64> = grid.iter().map(|&v| dist.pdf_unchecked(v)).collect();
        let (sup, tv, kl) = density_metrics(
            dist.params().support_radius(),
            &grid,
            &|v| dist.pdf_unchecked(v),
            &maxwellian_pdf_dimensionless,
        );
        finite_pdf.push(row);
        sup_norm.push(sup);
        total_variation.push(tv);
        kl_divergence.push(kl);
    }
    Ok(ConvergenceReport {
        n_values: n_values.to_vec(),
        grid,
        finite_pdf,
        maxwell_pdf,
        sup_norm,
        total_variation,
        kl_divergence,
    })
}

/// One-sample Kolmogorov-Smirnov outcome.
#[derive(Debug, Clone, Copy)]
pub struct GofResult {
    pub statistic: f64,
    pub p_value: f64,
    pub sample_count: usize,
}

/// Survival function Q(λ) = P(K > λ) of the Kolmogorov distribution.
///
/// Two series: the theta-transformed one converges fast for small λ, the
/// alternating one for large λ; 1.18 is the classical crossover.
pub(crate) fn kolmogorov_complement(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let t = PI * PI / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for j in 0..32 {
            let m = (2 * j + 1) as f64;
            let term = (-m * m * t).exp();
            sum += term;
            if term < 1e-18 {
                break;
            }
        }
        let cdf = (2.0 * PI).sqrt() / lambda * sum;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=32 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += sign * term;
            sign = -sign;
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// One-sample KS test of `values` against the hypothesized `cdf`.
///
/// D is the exact sup distance between the empirical step function and
/// the cdf; the p-value is the asymptotic Q(√n·D), which is why fewer
/// than 100 samples are rejected.
pub fn ks_test(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<GofResult> {
    if values.len() < 100 {
        return Err(Error::Domain(format!(
            "KS needs at least 100 samples for the asymptotic p-value, got {}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut statistic: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        statistic = statistic.max(above.max(below));
    }
    Ok(GofResult {
        statistic,
        p_value: kolmogorov_complement(n.sqrt() * statistic),
        sample_count: sorted.len(),
    })
}

/// Reduced-unit density table for several N plus the Gaussian column.
#[derive(Debug, Clone)]
pub struct Figure1Table {
    pub n_values: Vec<u64>,
    pub vbar: Vec<f64>,
    /// finite[i][j] = F̄_{n_values[i]}(vbar[j])
    pub finite: Vec<Vec<f64>>,
    pub maxwell: Vec<f64>,
}

/// Density table on the symmetric grid of integer multiples of `step`
/// inside [−√N_max, √N_max]. Building the grid from integer indices
/// keeps it exactly symmetric and makes v̄ = 0 an exact row.
pub fn figure1_series(n_values: &[u64], step: f64) -> Result<Figure1Table> {
    if n_values.is_empty() {
        return Err(Error::InvalidParam("need at least one N value".into()));
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "grid step must be finite and > 0, got {step}"
        )));
    }
    let n_max = *n_values.iter().max().expect("non-empty");
    let radius = (n_max as f64).sqrt();
    let j_max = (radius / step).floor() as i64;
    let vbar: Vec<f64> = (-j_max..=j_max).map(|j| j as f64 * step).collect();
    let dists = n_values
        .iter()
        .map(|&n| FiniteNDistribution::dimensionless(n))
        .collect::<Result<Vec<_>>>()?;
    let finite = dists
        .iter()
        .map(|d| vbar.iter().map(|&v| d.pdf_unchecked(v)).collect())
        .collect();
    let maxwell = vbar
        .iter()
        .map(|&v| maxwellian_pdf_dimensionless(v))
        .collect();
    Ok(Figure1Table {
        n_values: n_values.to_vec(),
        vbar,
        finite,
        maxwell,
    })
}

/// (N, γ(N)) for N = 1..=n_max: the mean-speed excess over the Gaussian
/// limit, strictly decreasing toward 1.
pub fn figure2_series(n_max: u64) -> Result<Vec<(u64, f64)>> {
    if n_max < 1 {
        return Err(Error::InvalidParam("n_max must be >= 1".into()));
    }
    (1..=n_max)
        .map(|n| Ok((n, crate::specialfn::gamma_factor(n)?)))
        .collect()
}
