//! Basis enumeration for N two-level atoms plus one cavity mode.
//!
//! Both terms of the Hamiltonian conserve the total excitation number
//! `M = photons + excited atoms`, so every computation works on one finite
//! block at a time and no Fock-space cutoff is ever needed. Two spaces are
//! supported: the full product space, where each atom is tracked by one bit
//! of a configuration word, and the permutation-symmetric (Dicke) sector,
//! where only the number of excited atoms is tracked.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest atom register representable in the full product space.
pub const MAX_FULL_ATOMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HilbertError {
    #[error("atom count must be at least 1")]
    NoAtoms,
    #[error("full-space basis supports at most {MAX_FULL_ATOMS} atoms, got {0}")]
    TooManyAtoms(usize),
    #[error("block dimension for N={atoms}, M={excitations} overflows the index range")]
    DimensionOverflow { atoms: usize, excitations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Full,
    Symmetric,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Full => f.write_str("full"),
            SpaceKind::Symmetric => f.write_str("symmetric"),
        }
    }
}

/// Product-space ket: bit `i` of `atoms` set means atom `i` is excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub atoms: u64,
    pub photons: usize,
}

impl BasisState {
    pub fn excited_count(&self) -> usize {
        self.atoms.count_ones() as usize
    }

    pub fn excitation(&self) -> usize {
        self.excited_count() + self.photons
    }

    pub fn is_excited(&self, atom: usize) -> bool {
        self.atoms >> atom & 1 == 1
    }

    /// Ket label such as `|egg;1>`, atom 0 leftmost.
    pub fn label(&self, atoms: usize) -> String {
        let word: String = (0..atoms)
            .map(|i| if self.is_excited(i) { 'e' } else { 'g' })
            .collect();
        format!("|{word};{}>", self.photons)
    }
}

/// Normalized Dicke state with `excited` excitations, tensored with a Fock state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymState {
    pub excited: usize,
    pub photons: usize,
}

impl SymState {
    pub fn excitation(&self) -> usize {
        self.excited + self.photons
    }

    pub fn label(&self) -> String {
        format!("|k={};{}>", self.excited, self.photons)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockStates {
    Full(Vec<BasisState>),
    Symmetric(Vec<SymState>),
}

/// One conserved-excitation block, in deterministic order: ascending number
/// of excited atoms, then ascending configuration word.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBasis {
    atoms: usize,
    excitations: usize,
    states: BlockStates,
    // first ordinal of each excited-atom shell; full space only
    shell_offsets: Vec<usize>,
}

impl BlockBasis {
    pub fn kind(&self) -> SpaceKind {
        match self.states {
            BlockStates::Full(_) => SpaceKind::Full,
            BlockStates::Symmetric(_) => SpaceKind::Symmetric,
        }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn excitations(&self) -> usize {
        self.excitations
    }

    pub fn dim(&self) -> usize {
        match &self.states {
            BlockStates::Full(s) => s.len(),
            BlockStates::Symmetric(s) => s.len(),
        }
    }

    pub fn states(&self) -> &BlockStates {
        &self.states
    }

    pub fn full_states(&self) -> Option<&[BasisState]> {
        match &self.states {
            BlockStates::Full(s) => Some(s),
            BlockStates::Symmetric(_) => None,
        }
    }

    pub fn symmetric_states(&self) -> Option<&[SymState]> {
        match &self.states {
            BlockStates::Symmetric(s) => Some(s),
            BlockStates::Full(_) => None,
        }
    }

    /// Total excitation of the state at `index`, recomputed from the ket.
    pub fn excitation_of(&self, index: usize) -> usize {
        match &self.states {
            BlockStates::Full(s) => s[index].excitation(),
            BlockStates::Symmetric(s) => s[index].excitation(),
        }
    }

    pub fn label(&self, index: usize) -> String {
        match &self.states {
            BlockStates::Full(s) => s[index].label(self.atoms),
            BlockStates::Symmetric(s) => s[index].label(),
        }
    }

    /// Ordinal of a product-space ket, computed from its combinatorial rank.
    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        if self.kind() != SpaceKind::Full
            || state.excitation() != self.excitations
            || (self.atoms < 64 && state.atoms >> self.atoms != 0)
        {
            return None;
        }
        let k = state.excited_count();
        Some(self.shell_offsets[k] + colex_rank(state.atoms))
    }

    pub fn index_of_symmetric(&self, state: &SymState) -> Option<usize> {
        if self.kind() != SpaceKind::Symmetric
            || state.excitation() != self.excitations
            || state.excited > self.atoms
        {
            return None;
        }
        Some(state.excited)
    }
}

fn pascal() -> &'static [[u64; MAX_FULL_ATOMS + 1]; MAX_FULL_ATOMS + 1] {
    static TABLE: OnceLock<[[u64; MAX_FULL_ATOMS + 1]; MAX_FULL_ATOMS + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0u64; MAX_FULL_ATOMS + 1]; MAX_FULL_ATOMS + 1];
        for n in 0..=MAX_FULL_ATOMS {
            t[n][0] = 1;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            }
        }
        t
    })
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        0
    } else {
        pascal()[n][k]
    }
}

/// Position of `word` among all words of equal popcount in ascending order.
fn colex_rank(word: u64) -> usize {
    let mut rank = 0u64;
    let mut rest = word;
    let mut j = 1;
    while rest != 0 {
        let bit = rest.trailing_zeros() as usize;
        rank += binomial(bit, j);
        j += 1;
        rest &= rest - 1;
    }
    rank as usize
}

fn check_atoms(kind: SpaceKind, atoms: usize) -> Result<(), HilbertError> {
    if atoms == 0 {
        return Err(HilbertError::NoAtoms);
    }
    if kind == SpaceKind::Full && atoms > MAX_FULL_ATOMS {
        return Err(HilbertError::TooManyAtoms(atoms));
    }
    Ok(())
}

/// Number of kets in block `(kind, atoms, excitations)` without building it.
pub fn block_dimension(kind: SpaceKind, atoms: usize, excitations: usize) -> Result<usize, HilbertError> {
    check_atoms(kind, atoms)?;
    let overflow = HilbertError::DimensionOverflow { atoms, excitations };
    let top = excitations.min(atoms);
    match kind {
        SpaceKind::Symmetric => top.checked_add(1).ok_or(overflow),
        SpaceKind::Full => {
            let mut total: usize = 0;
            for k in 0..=top {
                let c = usize::try_from(binomial(atoms, k)).map_err(|_| overflow.clone())?;
                total = total.checked_add(c).ok_or_else(|| overflow.clone())?;
            }
            Ok(total)
        }
    }
}

/// Enumerates every ket with total excitation `excitations`.
pub fn enumerate_block(kind: SpaceKind, atoms: usize, excitations: usize) -> Result<BlockBasis, HilbertError> {
    let dim = block_dimension(kind, atoms, excitations)?;
    let overflow = || HilbertError::DimensionOverflow { atoms, excitations };
    let top = excitations.min(atoms);
    match kind {
        SpaceKind::Symmetric => {
            let mut states = Vec::new();
            states.try_reserve_exact(dim).map_err(|_| overflow())?;
            states.extend((0..=top).map(|k| SymState { excited: k, photons: excitations - k }));
            Ok(BlockBasis {
                atoms,
                excitations,
                states: BlockStates::Symmetric(states),
                shell_offsets: Vec::new(),
            })
        }
        SpaceKind::Full => {
            let mut states = Vec::new();
            states.try_reserve_exact(dim).map_err(|_| overflow())?;
            let mut shell_offsets = Vec::with_capacity(top + 1);
            for k in 0..=top {
                shell_offsets.push(states.len());
                let photons = excitations - k;
                states.extend(FixedWeightWords::new(atoms, k).map(|atoms| BasisState { atoms, photons }));
            }
            debug_assert_eq!(states.len(), dim);
            Ok(BlockBasis {
                atoms,
                excitations,
                states: BlockStates::Full(states),
                shell_offsets,
            })
        }
    }
}

/// All `width`-bit words with exactly `weight` bits set, ascending (Gosper's hack).
struct FixedWeightWords {
    next: Option<u128>,
    limit: u128,
}

impl FixedWeightWords {
    fn new(width: usize, weight: usize) -> Self {
        let limit = 1u128 << width;
        let first = (1u128 << weight) - 1;
        Self {
            next: (weight <= width).then_some(first),
            limit,
        }
    }
}

impl Iterator for FixedWeightWords {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            let succ = (((ripple ^ cur) >> 2) / low) | ripple;
            (succ < self.limit).then_some(succ)
        };
        Some(cur as u64)
    }
}
