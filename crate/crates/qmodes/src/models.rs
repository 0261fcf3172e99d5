//! The four physical models and their reduction to time-independent
//! interaction-picture generator coefficients.
//!
//! Each model's original Hamiltonian carries an explicitly time-dependent
//! coupling phase. Splitting off a diagonal free part cancels that phase
//! exactly, leaving a constant interaction Hamiltonian that is a linear
//! combination of one group's generators plus (for the three-mode model) a
//! conserved charge and a scalar. The full evolution factorizes as
//! `U(t) = U_0(t) U_I(t)` with `U_0` diagonal in the number basis.
//!
//! hbar = 1 throughout; frequencies and couplings in radians per unit time.

use num_complex::Complex64 as C64;

use crate::algebra::{self, GenName, Group};
use crate::error::{Error, Result};
use crate::smallmat::CMat;

/// Parameters of one of the four supported models.
///
/// Mode ordering conventions: two-mode models use (a, b); Raman uses
/// (v, s, a); the three-mode converter chain uses (a, b, c).
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Off-resonant two-mode frequency converter: coupling `k (a† b + h.c.)`
    /// rotating at the effective detuning `delta`.
    FrequencyConverter {
        omega_a: f64,
        omega_b: f64,
        k: f64,
        delta: f64,
    },
    /// Off-resonant parametric amplifier: pair coupling `k (a† b† + h.c.)`.
    ParametricAmplifier {
        omega_a: f64,
        omega_b: f64,
        k: f64,
        delta: f64,
    },
    /// Raman scattering between vibration (v), Stokes (s) and anti-Stokes
    /// (a) modes: pair creation `g_s (a_s† a_v† + h.c.)` and conversion
    /// `g_a (a_a† a_v + h.c.)` with detunings `k_s`, `k_a`.
    Raman {
        omega_v: f64,
        omega_s: f64,
        omega_a: f64,
        g_s: f64,
        g_a: f64,
        k_s: f64,
        k_a: f64,
    },
    /// Three-mode chain of converter-type couplings with constant
    /// coefficients (g1, g2, g3).
    Su3 { g1: f64, g2: f64, g3: f64 },
}

impl ModelSpec {
    pub fn group(&self) -> Group {
        match self {
            ModelSpec::FrequencyConverter { .. } => Group::Su2,
            ModelSpec::ParametricAmplifier { .. } => Group::Su11,
            ModelSpec::Raman { .. } => Group::Su21,
            ModelSpec::Su3 { .. } => Group::Su3,
        }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            ModelSpec::FrequencyConverter { .. } | ModelSpec::ParametricAmplifier { .. } => 2,
            ModelSpec::Raman { .. } | ModelSpec::Su3 { .. } => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let params: Vec<f64> = match *self {
            ModelSpec::FrequencyConverter {
                omega_a,
                omega_b,
                k,
                delta,
            }
            | ModelSpec::ParametricAmplifier {
                omega_a,
                omega_b,
                k,
                delta,
            } => vec![omega_a, omega_b, k, delta],
            ModelSpec::Raman {
                omega_v,
                omega_s,
                omega_a,
                g_s,
                g_a,
                k_s,
                k_a,
            } => vec![omega_v, omega_s, omega_a, g_s, g_a, k_s, k_a],
            ModelSpec::Su3 { g1, g2, g3 } => vec![g1, g2, g3],
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidModel(
                "non-finite model parameter".into(),
            ));
        }
        Ok(())
    }
}

/// Time-independent interaction form: the evolution operator is
///
/// `U_I(t) = exp( t * ( sum_g rates[g] G_g + charge_rate Q + phase_rate ) )`
///
/// where `Q` is the conserved occupation combination (zero except for
/// Raman, where `Q = n_v + n_a - n_s`), and `U_0(t)` is diagonal with
/// per-mode frequencies `free_modes`.
#[derive(Debug, Clone)]
pub struct InteractionForm {
    pub group: Group,
    /// Generator coefficients per unit time (the printed `W`/`V` variables
    /// divided by t).
    pub rates: Vec<(GenName, C64)>,
    /// Coefficient (per unit time) of the conserved charge Q.
    pub charge_rate: C64,
    /// Scalar exponent rate from the constant parts of the diagonal
    /// generators; contributes a global phase only.
    pub phase_rate: C64,
    /// Per-mode frequencies of the diagonal free Hamiltonian H_0.
    pub free_modes: Vec<f64>,
}

impl InteractionForm {
    /// The representation matrix of the exponent at time `t`:
    /// `t * sum_g rates[g] rho(G_g)` (charge and scalar parts excluded;
    /// both are diagonal phases in the number basis).
    pub fn rep_exponent(&self, t: f64) -> Result<CMat> {
        let set = algebra::generators(self.group);
        let scaled: Vec<(GenName, C64)> = self
            .rates
            .iter()
            .map(|&(g, c)| (g, c * t))
            .collect();
        algebra::assemble(&scaled, set)
    }
}

/// Reduce a model to its time-independent interaction coefficients.
pub fn reduce(spec: &ModelSpec) -> Result<InteractionForm> {
    spec.validate()?;
    use GenName::*;
    let mi = C64::new(0.0, -1.0);
    Ok(match *spec {
        ModelSpec::FrequencyConverter {
            omega_a,
            omega_b,
            k,
            delta,
        } => InteractionForm {
            group: Group::Su2,
            rates: vec![(J3, mi * delta), (JPlus, mi * k), (JMinus, mi * k)],
            charge_rate: C64::new(0.0, 0.0),
            phase_rate: C64::new(0.0, 0.0),
            free_modes: vec![omega_a - delta / 2.0, omega_b + delta / 2.0],
        },
        ModelSpec::ParametricAmplifier {
            omega_a,
            omega_b,
            k,
            delta,
        } => InteractionForm {
            group: Group::Su11,
            rates: vec![(K3, mi * delta), (KPlus, mi * k), (KMinus, mi * k)],
            charge_rate: C64::new(0.0, 0.0),
            // K3 = (n_a + n_b + 1)/2 carries a constant 1/2; the physical
            // diagonal is delta (n_a + n_b)/2, so a scalar -delta/2 is
            // split off: exp(-it H_I) = e^{it delta/2} exp(-it(delta K3 + ...)).
            phase_rate: C64::new(0.0, delta / 2.0),
            free_modes: vec![omega_a - delta / 2.0, omega_b - delta / 2.0],
        },
        ModelSpec::Raman {
            omega_v,
            omega_s,
            omega_a,
            g_s,
            g_a,
            k_s,
            k_a,
        } => {
            // k_s n_s + k_a n_a decomposes over the diagonal operators
            // F = (n_v + n_s + 1)/2, K = (n_a + n_s + 1)/2 and the charge
            // Q = n_v + n_a - n_s as alpha F + beta K + gamma Q + delta0.
            let alpha = 2.0 * (k_s - k_a) / 3.0;
            let beta = 2.0 * (k_s + 2.0 * k_a) / 3.0;
            let gamma = (k_a - k_s) / 3.0;
            let delta0 = -(2.0 * k_s + k_a) / 3.0;
            InteractionForm {
                group: Group::Su21,
                rates: vec![
                    (F, mi * alpha),
                    (K, mi * beta),
                    (D, mi * (-g_s)),
                    (E, mi * (-g_s)),
                    (A, mi * (-g_a)),
                    (B, mi * (-g_a)),
                ],
                charge_rate: mi * gamma,
                phase_rate: mi * delta0,
                free_modes: vec![omega_v, omega_s - k_s, omega_a - k_a],
            }
        }
        ModelSpec::Su3 { g1, g2, g3 } => {
            // Constant Hermitian H = i[g1(A-B) + g3(D-E) + g2(G-J)]; the
            // exponent -itH is real antisymmetric in the representation:
            // rows/cols ordered so entry (1,2)=g1 t, (1,3)=g3 t, (2,3)=g2 t.
            let one = C64::new(1.0, 0.0);
            InteractionForm {
                group: Group::Su3,
                rates: vec![
                    (A, one * g1),
                    (B, -one * g1),
                    (D, one * g3),
                    (E, -one * g3),
                    (G, one * g2),
                    (J, -one * g2),
                ],
                charge_rate: C64::new(0.0, 0.0),
                phase_rate: C64::new(0.0, 0.0),
                free_modes: vec![0.0, 0.0, 0.0],
            }
        }
    })
}

/// Modulus of a matrix element of the free factor `U_0(t)` (and, for Raman,
/// of the charge phase) between number states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreePhaseModulus {
    pub modulus: f64,
    /// False when the requested element is off-diagonal (the free factor is
    /// diagonal in the number basis, so the element is identically zero).
    pub diagonal: bool,
}

pub fn free_phase_modulus(
    spec: &ModelSpec,
    bra: &[usize],
    ket: &[usize],
    _t: f64,
) -> Result<FreePhaseModulus> {
    if bra.len() != spec.n_modes() || ket.len() != spec.n_modes() {
        return Err(Error::InvalidInput(format!(
            "state arity {} / {} does not match {}-mode model",
            bra.len(),
            ket.len(),
            spec.n_modes()
        )));
    }
    if bra == ket {
        Ok(FreePhaseModulus {
            modulus: 1.0,
            diagonal: true,
        })
    } else {
        Ok(FreePhaseModulus {
            modulus: 0.0,
            diagonal: false,
        })
    }
}
