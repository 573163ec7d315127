//! Matrix assembly for the resonant atom-cavity Hamiltonian
//!
//! ```text
//! H = sum_i g (sigma_i a^dag + sigma_i^dag a)  +  C sum_{i != j} a^dag sigma_i sigma_j^dag a
//! ```
//!
//! with `sigma_i = |g><e|` lowering atom `i`. The second term moves one
//! excitation from atom `i` to atom `j` with strength `C * n` when the mode
//! holds `n` photons. Both terms conserve `a^dag a + sum_i sigma_i^dag sigma_i`,
//! so matrices are assembled one excitation block at a time. All elements
//! are real in the canonical basis.

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{enumerate_block, BasisState, BlockBasis, HilbertError, SpaceKind};
use crate::matrix::{CsrMatrix, DenseMatrix, HermitianMatrix, Storage};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
}

/// How the pair sum over `i != j` is counted.
///
/// `Ordered` visits both `(i, j)` and `(j, i)` at full strength. `Unordered`
/// counts each atom pair once, which halves the exchange amplitude.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairConvention {
    #[default]
    Ordered,
    Unordered,
}

impl PairConvention {
    pub fn weight(self) -> f64 {
        match self {
            PairConvention::Ordered => 1.0,
            PairConvention::Unordered => 0.5,
        }
    }
}

impl FromStr for PairConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ordered" => Ok(PairConvention::Ordered),
            "unordered" => Ok(PairConvention::Unordered),
            other => Err(format!("unknown pair convention '{other}'")),
        }
    }
}

/// Physical parameters of one block. Energies are in units of `coupling`
/// when `coupling = 1` (the default everywhere in the CLI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub atoms: usize,
    pub excitations: usize,
    pub coupling: f64,
    pub corr: f64,
    #[serde(default)]
    pub pairs: PairConvention,
}

impl ModelParams {
    pub fn new(atoms: usize, excitations: usize, coupling: f64, corr: f64) -> Self {
        Self {
            atoms,
            excitations,
            coupling,
            corr,
            pairs: PairConvention::Ordered,
        }
    }

    pub fn with_pairs(mut self, pairs: PairConvention) -> Self {
        self.pairs = pairs;
        self
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if !self.coupling.is_finite() {
            return Err(HamiltonianError::NonFinite { name: "coupling", value: self.coupling });
        }
        if !self.corr.is_finite() {
            return Err(HamiltonianError::NonFinite { name: "corr", value: self.corr });
        }
        Ok(())
    }

    fn exchange(&self) -> f64 {
        self.corr * self.pairs.weight()
    }
}

pub fn build(params: &ModelParams, kind: SpaceKind) -> Result<HermitianMatrix, HamiltonianError> {
    match kind {
        SpaceKind::Full => build_full(params),
        SpaceKind::Symmetric => build_symmetric(params),
    }
}

/// Sparse Hamiltonian on the full product-space block.
pub fn build_full(params: &ModelParams) -> Result<HermitianMatrix, HamiltonianError> {
    params.validate()?;
    let basis = Arc::new(enumerate_block(SpaceKind::Full, params.atoms, params.excitations)?);
    let states = basis.full_states().expect("full block");
    let g = params.coupling;
    let exchange = params.exchange();
    let mut triplets = Vec::new();

    for (col, s) in states.iter().enumerate() {
        let n = s.photons;
        if n == 0 {
            // neither sigma^dag a nor a^dag sigma sigma^dag a survives
            continue;
        }
        let ground: Vec<usize> = (0..params.atoms).filter(|&i| !s.is_excited(i)).collect();
        let excited: Vec<usize> = (0..params.atoms).filter(|&i| s.is_excited(i)).collect();

        // sigma_i^dag a, plus its adjoint sigma_i a^dag on the same pair
        let amp = g * (n as f64).sqrt();
        for &i in &ground {
            let up = BasisState { atoms: s.atoms | 1 << i, photons: n - 1 };
            let row = basis.index_of(&up).expect("raised state lies in the block");
            triplets.push((row, col, amp));
            triplets.push((col, row, amp));
        }

        // a^dag sigma_i sigma_j^dag a: excitation hops i -> j, photon number unchanged
        let hop = exchange * n as f64;
        for &i in &excited {
            for &j in &ground {
                let moved = BasisState { atoms: s.atoms ^ (1 << i) ^ (1 << j), photons: n };
                let row = basis.index_of(&moved).expect("hopped state lies in the block");
                triplets.push((row, col, hop));
            }
        }
    }

    let csr = CsrMatrix::from_triplets(basis.dim(), triplets);
    Ok(HermitianMatrix::new(Storage::Sparse(csr), basis))
}

/// Dense Hamiltonian on the Dicke-symmetric block.
///
/// On `|k; n>` the exchange term is diagonal with value `C n k (N - k)`,
/// and the coupling joins `|k; n>` to `|k+1; n-1>` with `g sqrt(n (k+1) (N-k))`.
pub fn build_symmetric(params: &ModelParams) -> Result<HermitianMatrix, HamiltonianError> {
    params.validate()?;
    let basis = Arc::new(enumerate_block(SpaceKind::Symmetric, params.atoms, params.excitations)?);
    let states = basis.symmetric_states().expect("symmetric block");
    let atoms = params.atoms as f64;
    let g = params.coupling;
    let exchange = params.exchange();
    let mut m = DenseMatrix::zeros(basis.dim());

    for (idx, s) in states.iter().enumerate() {
        let k = s.excited as f64;
        let n = s.photons as f64;
        m[(idx, idx)] = exchange * (n * k * (atoms - k));
        if s.photons > 0 && s.excited < params.atoms {
            let amp = g * (n * (k + 1.0) * (atoms - k)).sqrt();
            m[(idx + 1, idx)] = amp;
            m[(idx, idx + 1)] = amp;
        }
    }
    // exact zeros for -0.0 produced by negative C times zero
    for i in 0..m.dim() {
        m[(i, i)] += 0.0;
    }
    Ok(HermitianMatrix::new(Storage::Dense(m), basis))
}

/// The total-excitation operator `a^dag a + sum_i sigma_i^dag sigma_i` on a
/// block, evaluated from each ket. Equals `M * I` on any well-formed block.
pub fn apply_total_excitation(basis: &Arc<BlockBasis>) -> HermitianMatrix {
    let diag: Vec<f64> = (0..basis.dim()).map(|i| basis.excitation_of(i) as f64).collect();
    let storage = match basis.kind() {
        SpaceKind::Full => Storage::Sparse(CsrMatrix::from_triplets(
            diag.len(),
            diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect(),
        )),
        SpaceKind::Symmetric => Storage::Dense(DenseMatrix::from_diagonal(&diag)),
    };
    HermitianMatrix::new(storage, Arc::clone(basis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &HermitianMatrix) -> Vec<Vec<f64>> {
        let d = m.to_dense();
        (0..d.dim()).map(|i| d.row(i).to_vec()).collect()
    }

    #[test]
    fn single_atom_is_jaynes_cummings_pair() {
        let m = build_full(&ModelParams::new(1, 1, 1.0, 0.7)).unwrap();
        assert_eq!(m.basis().label(0), "|g;1>");
        assert_eq!(m.basis().label(1), "|e;0>");
        assert_eq!(dense(&m), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = build_symmetric(&ModelParams::new(1, 1, 1.0, 0.7)).unwrap();
        assert_eq!(dense(&s), dense(&m));
    }

    #[test]
    fn two_atoms_one_excitation() {
        let m = build_full(&ModelParams::new(2, 1, 1.0, 0.5)).unwrap();
        assert_eq!(
            dense(&m),
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]
        );
        let s = build_symmetric(&ModelParams::new(2, 1, 1.0, 0.5)).unwrap();
        let r2 = 2f64.sqrt();
        assert_eq!(dense(&s), vec![vec![0.0, r2], vec![r2, 0.0]]);
    }

    #[test]
    fn two_atoms_two_excitations_symmetric() {
        let s = build_symmetric(&ModelParams::new(2, 2, 1.0, 0.3)).unwrap();
        let r2 = 2f64.sqrt();
        assert_eq!(
            dense(&s),
            vec![vec![0.0, 2.0, 0.0], vec![2.0, 0.3, r2], vec![0.0, r2, 0.0]]
        );
    }

    #[test]
    fn two_atoms_two_excitations_full_exchange_block() {
        // basis |gg;2>, |eg;1>, |ge;1>, |ee;0>; exchange couples |eg;1> <-> |ge;1> with C*1
        let m = build_full(&ModelParams::new(2, 2, 1.0, 0.3)).unwrap();
        let r2 = 2f64.sqrt();
        assert_eq!(
            dense(&m),
            vec![
                vec![0.0, r2, r2, 0.0],
                vec![r2, 0.0, 0.3, 1.0],
                vec![r2, 0.3, 0.0, 1.0],
                vec![0.0, 1.0, 1.0, 0.0],
            ]
        );
    }

    #[test]
    fn unordered_pairs_halve_exchange() {
        let p = ModelParams::new(2, 2, 1.0, 0.3).with_pairs(PairConvention::Unordered);
        let s = build_symmetric(&p).unwrap();
        assert_eq!(s.get(1, 1), 0.15);
        let f = build_full(&p).unwrap();
        assert_eq!(f.get(1, 2), 0.15);
    }

    #[test]
    fn total_excitation_is_block_label() {
        let b = Arc::new(enumerate_block(SpaceKind::Full, 2, 2).unwrap());
        assert_eq!(dense(&apply_total_excitation(&b)), dense_diag(&[2.0; 4]));
        let b = Arc::new(enumerate_block(SpaceKind::Symmetric, 3, 1).unwrap());
        assert_eq!(dense(&apply_total_excitation(&b)), dense_diag(&[1.0, 1.0]));
        let b = Arc::new(enumerate_block(SpaceKind::Full, 1, 0).unwrap());
        assert_eq!(dense(&apply_total_excitation(&b)), dense_diag(&[0.0]));
    }

    fn dense_diag(d: &[f64]) -> Vec<Vec<f64>> {
        let m = DenseMatrix::from_diagonal(d);
        (0..m.dim()).map(|i| m.row(i).to_vec()).collect()
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            build_full(&ModelParams::new(2, 1, f64::NAN, 0.0)),
            Err(HamiltonianError::NonFinite { name: "coupling", .. })
        ));
        assert!(matches!(
            build_symmetric(&ModelParams::new(2, 1, 1.0, f64::INFINITY)),
            Err(HamiltonianError::NonFinite { name: "corr", .. })
        ));
        assert!(matches!(
            build_full(&ModelParams::new(0, 1, 1.0, 0.0)),
            Err(HamiltonianError::Hilbert(HilbertError::NoAtoms))
        ));
    }

    #[test]
    fn exchange_vanishes_without_photons_or_partners() {
        let m = build_full(&ModelParams::new(3, 3, 0.0, 1.3)).unwrap();
        let states = m.basis().full_states().unwrap();
        let d = m.to_dense();
        for (j, s) in states.iter().enumerate() {
            if s.photons == 0 || s.atoms == 0 {
                assert!(d.column(j).iter().all(|&v| v == 0.0), "V acts on {}", m.basis().label(j));
            }
        }
    }
}
