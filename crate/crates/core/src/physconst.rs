//! Physical constants (cgs), mode parameterization and Planck natural units.
//!
//! Everything downstream of [`ModeContext`] is dimensionless: energies are in
//! units of the quantum `hν`, entropies in units of `k_B`. Constants only
//! enter when a context is built from a physical frequency and temperature,
//! and again at the radiometry boundary.

use crate::error::{invalid, Result};
use crate::scalar::{lit, Real};

/// The four universal constants, cgs units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<F> {
    /// Quantum of action [erg·s].
    pub h: F,
    /// Boltzmann constant [erg/K].
    pub k_b: F,
    /// Speed of light [cm/s].
    pub c: F,
    /// Newton's gravitational constant [cm³·g⁻¹·s⁻²].
    pub g: F,
}

impl<F: Real> Default for PhysicalConstants<F> {
    fn default() -> Self {
        Self {
            h: lit(6.626e-27),
            k_b: lit(1.380649e-16),
            c: lit(2.99792458e10),
            g: lit(6.674e-8),
        }
    }
}

impl<F: Real> PhysicalConstants<F> {
    /// Builds a constant set, rejecting non-positive or non-finite values.
    pub fn new(h: F, k_b: F, c: F, g: F) -> Result<Self> {
        let consts = Self { h, k_b, c, g };
        consts.validate()?;
        Ok(consts)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("h", self.h), ("k_B", self.k_b), ("c", self.c), ("G", self.g)] {
            if !(v > F::zero() && v.is_finite()) {
                return invalid(format!("constant {name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }

    /// Reduced quantum of action `h / 2π`.
    pub fn hbar(&self) -> F {
        self.h / F::TAU()
    }
}

/// Shared parameterization of every law: `β = hν/kT` and `b = e^(−β)`.
///
/// A context is either physical (built from `ν` and `T`, so `ε₀ = hν` and
/// `kT` are known) or dimensionless (built from `β` or `b` alone).
/// `T = 0` is admitted and represented by `β = +∞`, `b = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeContext<F> {
    nu: Option<F>,
    temperature: Option<F>,
    epsilon0: Option<F>,
    beta: F,
    b: F,
}

impl<F: Real> ModeContext<F> {
    /// Physical context for a mode of frequency `nu` [Hz] at temperature `temperature` [K].
    pub fn new(nu: F, temperature: F, constants: &PhysicalConstants<F>) -> Result<Self> {
        constants.validate()?;
        if !(nu > F::zero() && nu.is_finite()) {
            return invalid(format!("frequency must be positive and finite, got {nu}"));
        }
        if !(temperature >= F::zero() && temperature.is_finite()) {
            return invalid(format!("temperature must be non-negative and finite, got {temperature}"));
        }
        let epsilon0 = constants.h * nu;
        let (beta, b) = if temperature == F::zero() {
            (F::infinity(), F::zero())
        } else {
            let beta = epsilon0 / (constants.k_b * temperature);
            (beta, (-beta).exp())
        };
        Ok(Self {
            nu: Some(nu),
            temperature: Some(temperature),
            epsilon0: Some(epsilon0),
            beta,
            b,
        })
    }

    /// Dimensionless context from `β > 0`; `β = +∞` is the vacuum.
    pub fn from_beta(beta: F) -> Result<Self> {
        if beta.is_nan() || beta <= F::zero() {
            return invalid(format!("beta must be positive, got {beta}"));
        }
        Ok(Self {
            nu: None,
            temperature: None,
            epsilon0: None,
            beta,
            b: (-beta).exp(),
        })
    }

    /// Dimensionless context from the geometric ratio `0 ≤ b < 1`.
    pub fn from_ratio(b: F) -> Result<Self> {
        if !(b >= F::zero() && b < F::one()) {
            return invalid(format!("ratio b must lie in [0, 1), got {b}"));
        }
        let beta = if b == F::zero() { F::infinity() } else { -b.ln() };
        Ok(Self {
            nu: None,
            temperature: None,
            epsilon0: None,
            beta,
            b,
        })
    }

    /// Same frequency, different temperature. Only meaningful for physical contexts.
    pub fn with_temperature(&self, temperature: F, constants: &PhysicalConstants<F>) -> Result<Self> {
        match self.nu {
            Some(nu) => Self::new(nu, temperature, constants),
            None => invalid("context has no physical frequency"),
        }
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    pub fn b(&self) -> F {
        self.b
    }

    pub fn nu(&self) -> Option<F> {
        self.nu
    }

    pub fn temperature(&self) -> Option<F> {
        self.temperature
    }

    /// The energy quantum `ε₀ = hν` [erg], when the context is physical.
    pub fn epsilon0(&self) -> Option<F> {
        self.epsilon0
    }

    /// `kT` [erg], when the context is physical and `T > 0`.
    pub fn thermal_energy(&self) -> Option<F> {
        match (self.epsilon0, self.beta.is_finite()) {
            (Some(e0), true) => Some(e0 / self.beta),
            _ => None,
        }
    }

    /// True when `T = 0` (`β = +∞`).
    pub fn is_vacuum(&self) -> bool {
        self.beta.is_infinite()
    }

    /// `1 − b`, evaluated as `−expm1(−β)` so it keeps full precision for small β.
    pub fn one_minus_b(&self) -> F {
        if self.beta.is_infinite() {
            F::one()
        } else {
            -(-self.beta).exp_m1()
        }
    }
}

/// See [`ModeContext::new`].
pub fn make_mode_context<F: Real>(
    nu: F,
    temperature: F,
    constants: &PhysicalConstants<F>,
) -> Result<ModeContext<F>> {
    ModeContext::new(nu, temperature, constants)
}

/// Spectral mode density `Z_ν = 8πν²/c³` [modes·cm⁻³·Hz⁻¹].
pub fn mode_density<F: Real>(nu: F, constants: &PhysicalConstants<F>) -> F {
    let eight_pi: F = lit::<F>(8.0) * F::PI();
    eight_pi * nu * nu / constants.c.powi(3)
}

/// Planck's natural units of length, time, mass and temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalUnits<F> {
    /// Planck length [cm].
    pub l_p: F,
    /// Planck time [s].
    pub t_p: F,
    /// Planck mass [g].
    pub m_p: F,
    /// Planck temperature [K].
    pub t_temp_p: F,
}

/// Natural units built from `ħ`, `G`, `c` and `k_B`.
///
/// The length is formed as `√(ħG) / c^{3/2}` so the intermediate stays inside
/// the `f32` exponent range.
pub fn natural_units<F: Real>(constants: &PhysicalConstants<F>) -> NaturalUnits<F> {
    let hbar = constants.hbar();
    let c = constants.c;
    let l_p = (hbar * constants.g).sqrt() / (c * c.sqrt());
    let t_p = l_p / c;
    let m_p = (hbar * c / constants.g).sqrt();
    let t_temp_p = m_p * c * c / constants.k_b;
    NaturalUnits { l_p, t_p, m_p, t_temp_p }
}
