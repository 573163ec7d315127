//! Closed-form collective dressed energies.
//!
//! For `N` atoms, `n` photons, coupling `g` and pair-exchange strength `C`,
//!
//! ```text
//! E(+/-) = N/2 * [ C (N-1) n  +/-  sqrt(4 n g^2 + C^2 n^2 (N-1)^2) ]
//! ```
//!
//! together with the large-`N` limits `E+ ~ C n N^2`, `E- ~ -g^2/C`, and the
//! stair steps `E(N+1) - E(N)`. The branch whose magnitude grows is always
//! evaluated directly; the other one comes from the exact product
//! `E+ * E- = -N^2 n g^2`, so the `-g^2/C` plateau keeps full precision at
//! large `N`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DressedError {
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("upper-branch N^2 asymptote needs corr > 0, got {0}")]
    NonPositiveCorrelation(f64),
    #[error("asymptotic form needs a nonzero corr")]
    ZeroCorrelation,
    #[error("{0}")]
    Domain(String),
}

/// Sign choice in the closed form; not the sign of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Upper,
    Lower,
}

impl FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "upper" | "+" => Ok(Branch::Upper),
            "lower" | "-" => Ok(Branch::Lower),
            other => Err(format!("unknown branch '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedPair {
    pub e_plus: f64,
    pub e_minus: f64,
}

impl DressedPair {
    pub fn get(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Upper => self.e_plus,
            Branch::Lower => self.e_minus,
        }
    }

    pub fn splitting(&self) -> f64 {
        self.e_plus - self.e_minus
    }
}

/// Closed-form pair for integer atom and photon numbers.
pub fn closed_form_pair(atoms: usize, photons: usize, coupling: f64, corr: f64) -> DressedPair {
    debug_assert!(atoms >= 1);
    closed_form_pair_real(atoms as f64, photons as f64, coupling, corr)
}

/// Same formula with real-valued `N` and `n`. Only meaningful as a smooth
/// interpolation between integer points.
pub fn closed_form_pair_real(atoms: f64, photons: f64, coupling: f64, corr: f64) -> DressedPair {
    let drift = corr * ((atoms - 1.0) * photons);
    let root = discriminant_root(photons, coupling, drift);
    let product = (atoms * atoms * photons) * (coupling * coupling);

    let (e_plus, e_minus) = if drift == 0.0 {
        let e = atoms * (0.5 * root);
        (e, -e)
    } else if drift > 0.0 {
        let big = atoms * (0.5 * (drift + root));
        (big, -product / big)
    } else {
        let big = atoms * (0.5 * (drift - root));
        (-product / big, big)
    };
    DressedPair { e_plus: e_plus + 0.0, e_minus: e_minus + 0.0 }
}

// sqrt(4 n g^2 + drift^2) without intermediate overflow
fn discriminant_root(photons: f64, coupling: f64, drift: f64) -> f64 {
    (2.0 * (coupling.abs() * photons.sqrt())).hypot(drift)
}

/// `C n N^2`, the leading growth of the upper branch for `C > 0`.
pub fn asymptotic_upper(atoms: usize, photons: usize, corr: f64) -> Result<f64, DressedError> {
    if !corr.is_finite() {
        return Err(DressedError::NonFinite("corr"));
    }
    if corr <= 0.0 {
        return Err(DressedError::NonPositiveCorrelation(corr));
    }
    if atoms < 2 || photons < 1 {
        return Err(DressedError::Domain(format!(
            "N^2 asymptote needs N >= 2 and n >= 1, got N={atoms}, n={photons}"
        )));
    }
    let n2 = atoms as f64 * atoms as f64;
    Ok(corr * photons as f64 * n2)
}

/// `-g^2 / C`, the limit of the plateau branch.
pub fn asymptotic_lower(coupling: f64, corr: f64) -> Result<f64, DressedError> {
    if !coupling.is_finite() {
        return Err(DressedError::NonFinite("coupling"));
    }
    if !corr.is_finite() {
        return Err(DressedError::NonFinite("corr"));
    }
    if corr == 0.0 {
        return Err(DressedError::ZeroCorrelation);
    }
    Ok(-(coupling * coupling) / corr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StairStep {
    /// `E(N+1) - E(N)` from the closed form.
    pub exact: f64,
    /// Leading large-`N` step, absent when `corr = 0` or `n = 0`.
    pub asymptotic: Option<f64>,
}

pub fn stair_step(branch: Branch, atoms: usize, photons: usize, coupling: f64, corr: f64) -> StairStep {
    let here = closed_form_pair(atoms, photons, coupling, corr).get(branch);
    let next = closed_form_pair(atoms + 1, photons, coupling, corr).get(branch);
    StairStep {
        exact: next - here,
        asymptotic: asymptotic_step(branch, atoms, photons, coupling, corr).ok(),
    }
}

/// Leading-order step: `2 C n N` on the branch that grows like `N^2`
/// (upper for `C > 0`, lower for `C < 0`) and `g^2 / (C N^2)` on the
/// branch that saturates.
pub fn asymptotic_step(
    branch: Branch,
    atoms: usize,
    photons: usize,
    coupling: f64,
    corr: f64,
) -> Result<f64, DressedError> {
    if !coupling.is_finite() {
        return Err(DressedError::NonFinite("coupling"));
    }
    if !corr.is_finite() {
        return Err(DressedError::NonFinite("corr"));
    }
    if corr == 0.0 {
        return Err(DressedError::ZeroCorrelation);
    }
    if atoms < 1 || photons < 1 {
        return Err(DressedError::Domain(format!(
            "asymptotic step needs N >= 1 and n >= 1, got N={atoms}, n={photons}"
        )));
    }
    let growing = if corr > 0.0 { Branch::Upper } else { Branch::Lower };
    let big_n = atoms as f64;
    Ok(if branch == growing {
        2.0 * corr * photons as f64 * big_n
    } else {
        coupling * coupling / (corr * big_n * big_n)
    })
}

/// Dressed transition frequency per atom, `(E+ - E-) / N`.
pub fn per_atom_frequency(atoms: usize, photons: usize, coupling: f64, corr: f64) -> f64 {
    let drift = corr * ((atoms as f64 - 1.0) * photons as f64);
    discriminant_root(photons as f64, coupling, drift)
}
