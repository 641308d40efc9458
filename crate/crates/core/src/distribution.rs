//! The finite-N marginal velocity law and its Gaussian limit.
//!
//! For N molecules of mass m at temperature T sharing the fixed kinetic
//! energy NkT/2, the single-molecule velocity density is
//!
//! ```text
//! F(v) = C · (1 − m v² / (N k T))^{(N−3)/2},   C = Γ(N/2) √m / (Γ((N−1)/2) √(πNkT))
//! ```
//!
//! supported on v² ≤ Ē = NkT/m. The exponent makes N = 3 exactly uniform,
//! N = 2 integrably singular at the support edge, and the N → ∞ limit the
//! Maxwellian Gaussian with variance kT/m. All evaluation is done in log
//! space so counts up to 1e9 stay finite.

use crate::error::{Error, Result};
use crate::specialfn::{gamma_factor, reg_inc_beta, GammaRatio};

/// Physical parameters of the gas: molecule count, mass, Boltzmann
/// constant, and temperature. Immutable once validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    n_molecules: u64,
    mass: f64,
    boltzmann: f64,
    temperature: f64,
}

impl GasParams {
    pub fn new(n_molecules: u64, mass: f64, boltzmann: f64, temperature: f64) -> Result<Self> {
        if n_molecules < 2 {
            return Err(Error::InvalidParam(format!(
                "n_molecules must be >= 2 (one molecule has a deterministic speed, \
                 not a distribution), got {n_molecules}"
            )));
        }
        for (name, value) in [
            ("mass", mass),
            ("boltzmann", boltzmann),
            ("temperature", temperature),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        Ok(Self {
            n_molecules,
            mass,
            boltzmann,
            temperature,
        })
    }

    /// Reduced-unit parameters m = k = T = 1.
    pub fn dimensionless(n_molecules: u64) -> Result<Self> {
        Self::new(n_molecules, 1.0, 1.0, 1.0)
    }

    pub fn n_molecules(&self) -> u64 {
        self.n_molecules
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn boltzmann(&self) -> f64 {
        self.boltzmann
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Ē = NkT/m, the squared radius of the velocity shell.
    pub fn energy_scale(&self) -> f64 {
        self.n_molecules as f64 * self.boltzmann * self.temperature / self.mass
    }

    /// Total kinetic energy NkT/2 (one spatial dimension).
    pub fn total_energy(&self) -> f64 {
        self.n_molecules as f64 * self.boltzmann * self.temperature / 2.0
    }

    /// kT/m, the velocity variance shared by the finite-N law and its limit.
    pub fn thermal_variance(&self) -> f64 {
        self.boltzmann * self.temperature / self.mass
    }

    /// √Ē, the largest speed any single molecule can carry.
    pub fn support_radius(&self) -> f64 {
        self.energy_scale().sqrt()
    }
}

/// Single-molecule velocity distribution of the N-molecule energy shell.
#[derive(Debug, Clone, Copy)]
pub struct FiniteNDistribution {
    params: GasParams,
    log_norm: f64,
}

impl FiniteNDistribution {
    pub fn new(params: GasParams) -> Result<Self> {
        let n = params.n_molecules() as f64;
        // C = Γ(N/2)/Γ((N−1)/2) · 1/√(π Ē), kept as a log.
        let ratio = GammaRatio::half_step((n - 1.0) / 2.0)?;
        let log_norm =
            ratio.log_value() - 0.5 * (std::f64::consts::PI * params.energy_scale()).ln();
        Ok(Self { params, log_norm })
    }

    /// Reduced-unit distribution with m = k = T = 1.
    pub fn dimensionless(n_molecules: u64) -> Result<Self> {
        Self::new(GasParams::dimensionless(n_molecules)?)
    }

    pub fn params(&self) -> &GasParams {
        self.params_ref()
    }

    fn params_ref(&self) -> &GasParams {
        &self.params
    }

    /// Natural log of the normalization constant C.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Probability density at velocity v.
    ///
    /// Zero outside the support; on the boundary |v| = √Ē the density is 0
    /// for N >= 4, the constant C for N = 3, and +∞ for N = 2 (integrable
    /// endpoint singularity).
    pub fn pdf(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("pdf requires finite v, got {v}")));
        }
        Ok(self.pdf_unchecked(v))
    }

    /// Density evaluation without the argument check; v must be finite.
    pub(crate) fn pdf_unchecked(&self, v: f64) -> f64 {
        let n = self.params.n_molecules();
        let u = v * v / self.params.energy_scale();
        if u > 1.0 {
            return 0.0;
        }
        if u == 1.0 {
            return match n {
                2 => f64::INFINITY,
                3 => self.log_norm.exp(),
                _ => 0.0,
            };
        }
        let exponent = (n as f64 - 3.0) / 2.0;
        (self.log_norm + exponent * (-u).ln_1p()).exp()
    }

    /// Cumulative distribution P(V <= v).
    ///
    /// Closed form via the regularized incomplete beta function: for
    /// 0 <= v <= √Ē the upper half is ½ + ½·I_{v²/Ē}(½, (N−1)/2); odd
    /// symmetry covers v < 0 and the value clamps to 0/1 outside support.
    pub fn cdf(&self, v: f64) -> Result<f64> {
        if v.is_nan() {
            return Err(Error::Domain("cdf requires non-NaN v".into()));
        }
        let u = v * v / self.params.energy_scale();
        if u >= 1.0 {
            return Ok(if v > 0.0 { 1.0 } else { 0.0 });
        }
        let n = self.params.n_molecules() as f64;
        let half_tail = reg_inc_beta(0.5, (n - 1.0) / 2.0, u)? / 2.0;
        Ok(if v >= 0.0 {
            0.5 + half_tail
        } else {
            0.5 - half_tail
        })
    }

    /// E(v²) = kT/m, independent of N.
    pub fn expected_v2(&self) -> f64 {
        self.params.thermal_variance()
    }

    /// E(|v|) = γ(N) · √(2kT/(πm)); the γ(N) factor is why small-N gases
    /// have a faster mean speed than the Gaussian limit predicts.
    pub fn expected_speed(&self) -> f64 {
        let maxwell_speed = (2.0 * self.params.thermal_variance() / std::f64::consts::PI).sqrt();
        gamma_factor(self.params.n_molecules()).expect("params guarantee N >= 2") * maxwell_speed
    }
}

/// Dimensionless finite-N density F̄_N(v̄), the m = k = T = 1 form with
/// support |v̄| <= √N.
pub fn pdf_dimensionless(n_molecules: u64, vbar: f64) -> Result<f64> {
    FiniteNDistribution::dimensionless(n_molecules)?.pdf(vbar)
}

/// Gaussian velocity law with variance kT/m: the N → ∞ limit.
#[derive(Debug, Clone, Copy)]
pub struct MaxwellianDistribution {
    mass: f64,
    boltzmann: f64,
    temperature: f64,
}

impl MaxwellianDistribution {
    pub fn new(mass: f64, boltzmann: f64, temperature: f64) -> Result<Self> {
        for (name, value) in [
            ("mass", mass),
            ("boltzmann", boltzmann),
            ("temperature", temperature),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        Ok(Self {
            mass,
            boltzmann,
            temperature,
        })
    }

    pub fn from_params(params: &GasParams) -> Self {
        Self {
            mass: params.mass(),
            boltzmann: params.boltzmann(),
            temperature: params.temperature(),
        }
    }

    pub fn variance(&self) -> f64 {
        self.boltzmann * self.temperature / self.mass
    }

    pub fn pdf(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("pdf requires finite v, got {v}")));
        }
        let var = self.variance();
        Ok((-v * v / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
    }

    /// (E(v²), E(|v|)) = (kT/m, √(2kT/(πm))).
    pub fn moments(&self) -> (f64, f64) {
        let var = self.variance();
        (var, (2.0 * var / std::f64::consts::PI).sqrt())
    }
}

/// Dimensionless Maxwellian F̄_M(v̄) = e^{−v̄²/2} / √(2π).
pub fn maxwellian_pdf_dimensionless(vbar: f64) -> f64 {
    (-0.5 * vbar * vbar).exp() / (2.0 * std::f64::consts::PI).sqrt()
}
