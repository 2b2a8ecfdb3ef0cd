//! Truncated internal bases: orbital harmonics `|l, m_l⟩` for `l ≤ l_max`,
//! tensored with a spin factor and, optionally, a four-valued Dirac index.
//!
//! Flat ordering is `l` ascending, then `m_l` ascending, then spin index, then
//! Dirac index, so the Dirac index runs fastest. Operators on the full space
//! are therefore `orbital ⊗ spin ⊗ dirac` Kronecker products in that order.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// A non-negative integer or half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    twice: u32,
}

impl HalfInt {
    pub const fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    pub const fn integer(n: u32) -> Self {
        Self { twice: 2 * n }
    }

    pub const fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// `s(s+1)`, the Casimir eigenvalue of the multiplet.
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }

    /// `2s + 1`.
    pub fn multiplet_dim(self) -> usize {
        self.twice as usize + 1
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    pub l_max: u32,
    pub spin_dim: usize,
    pub dirac_factor: bool,
}

impl BasisSpec {
    pub fn new(l_max: u32, spin_dim: usize, dirac_factor: bool) -> Result<Self> {
        if spin_dim == 0 {
            return Err(Error::InvalidBasis("spin_dim must be at least 1".into()));
        }
        Ok(Self {
            l_max,
            spin_dim,
            dirac_factor,
        })
    }

    /// Orbital harmonics only.
    pub fn orbital(l_max: u32) -> Self {
        Self {
            l_max,
            spin_dim: 1,
            dirac_factor: false,
        }
    }

    /// A bare `dim`-dimensional factor (`l_max = 0`); used for spin matrices
    /// and small ad-hoc operators.
    pub fn bare(dim: usize) -> Self {
        assert!(dim > 0, "bare basis needs a positive dimension");
        Self {
            l_max: 0,
            spin_dim: dim,
            dirac_factor: false,
        }
    }

    pub fn orbital_dim(&self) -> usize {
        let n = self.l_max as usize + 1;
        n * n
    }

    pub fn dirac_dim(&self) -> usize {
        if self.dirac_factor {
            4
        } else {
            1
        }
    }

    /// Dimension of the factor without the Dirac index.
    pub fn internal_dim(&self) -> usize {
        self.orbital_dim() * self.spin_dim
    }

    pub fn dim(&self) -> usize {
        self.internal_dim() * self.dirac_dim()
    }

    /// The same basis with the Dirac factor switched on or off.
    pub fn with_dirac(self, dirac_factor: bool) -> Self {
        Self {
            dirac_factor,
            ..self
        }
    }

    /// Spin of the `S_ab` representation: `(spin_dim - 1) / 2`.
    pub fn intrinsic_spin(&self) -> HalfInt {
        HalfInt::from_twice(self.spin_dim as u32 - 1)
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l_max={} spin_dim={}", self.l_max, self.spin_dim)?;
        if self.dirac_factor {
            write!(f, " +dirac")?;
        }
        Ok(())
    }
}

/// Identifies the space an operator acts on. Binary operations require equal tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisTag {
    Full(BasisSpec),
    /// Range of a projector inside `parent`.
    Subspace { parent: BasisSpec, rank: usize },
}

impl BasisTag {
    pub fn dim(&self) -> usize {
        match self {
            BasisTag::Full(spec) => spec.dim(),
            BasisTag::Subspace { rank, .. } => *rank,
        }
    }
}

impl From<BasisSpec> for BasisTag {
    fn from(spec: BasisSpec) -> Self {
        BasisTag::Full(spec)
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisTag::Full(spec) => write!(f, "[{spec}]"),
            BasisTag::Subspace { parent, rank } => write!(f, "[rank-{rank} subspace of {parent}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub l: u32,
    pub m_l: i32,
    pub spin_index: usize,
    pub dirac_index: Option<usize>,
}

/// Bijective enumeration of a [`BasisSpec`].
#[derive(Clone, Debug)]
pub struct BasisIndexMap {
    spec: BasisSpec,
    states: Vec<BasisState>,
}

impl BasisIndexMap {
    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, index: usize) -> Option<&BasisState> {
        self.states.get(index)
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        let spec = &self.spec;
        if state.l > spec.l_max
            || state.m_l.unsigned_abs() > state.l
            || state.spin_index >= spec.spin_dim
        {
            return None;
        }
        let dirac = match (spec.dirac_factor, state.dirac_index) {
            (true, Some(d)) if d < 4 => d,
            (false, None) => 0,
            _ => return None,
        };
        let l = state.l as usize;
        let orbital = l * l + (state.m_l + state.l as i32) as usize;
        Some((orbital * spec.spin_dim + state.spin_index) * spec.dirac_dim() + dirac)
    }
}

pub fn build_basis(spec: BasisSpec) -> BasisIndexMap {
    let mut states = Vec::with_capacity(spec.dim());
    for l in 0..=spec.l_max {
        let l_signed = l as i32;
        for m_l in -l_signed..=l_signed {
            for spin_index in 0..spec.spin_dim {
                if spec.dirac_factor {
                    for d in 0..4 {
                        states.push(BasisState {
                            l,
                            m_l,
                            spin_index,
                            dirac_index: Some(d),
                        });
                    }
                } else {
                    states.push(BasisState {
                        l,
                        m_l,
                        spin_index,
                        dirac_index: None,
                    });
                }
            }
        }
    }
    BasisIndexMap { spec, states }
}

/// Total-`j` multiplet content of the non-Dirac factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JBlockTable {
    blocks: BTreeMap<HalfInt, usize>,
    spin: HalfInt,
    dirac_copies: usize,
}

impl JBlockTable {
    /// `(j, copies)` in ascending `j`.
    pub fn blocks(&self) -> impl Iterator<Item = (HalfInt, usize)> + '_ {
        self.blocks.iter().map(|(j, c)| (*j, *c))
    }

    pub fn copies(&self, j: HalfInt) -> usize {
        self.blocks.get(&j).copied().unwrap_or(0)
    }

    pub fn contains(&self, j: HalfInt) -> bool {
        self.blocks.contains_key(&j)
    }

    pub fn spins(&self) -> Vec<HalfInt> {
        self.blocks.keys().copied().collect()
    }

    /// Multiplicity of the `j(j+1)` eigenvalue on the non-Dirac factor.
    pub fn multiplicity(&self, j: HalfInt) -> usize {
        self.copies(j) * j.multiplet_dim()
    }

    /// Extra factor (4 or 1) carried by the Dirac index, reported separately.
    pub fn dirac_copies(&self) -> usize {
        self.dirac_copies
    }

    /// Number of copies `j` would have with no orbital cutoff.
    pub fn untruncated_copies(&self, j: HalfInt) -> usize {
        j.twice().min(self.spin.twice()) as usize + 1
    }

    /// Top level of the truncated basis, or any level that lost copies to the cutoff.
    pub fn is_edge(&self, j: HalfInt) -> bool {
        let top = self.blocks.keys().next_back().copied();
        Some(j) == top || self.copies(j) < self.untruncated_copies(j)
    }

    pub fn total_dim(&self) -> usize {
        self.blocks().map(|(j, c)| c * j.multiplet_dim()).sum()
    }
}

/// Clebsch–Gordan counting: each orbital `l` couples with the intrinsic spin
/// `s` to `j = |l - s|, …, l + s`.
pub fn couple_to_total_j(spec: BasisSpec) -> JBlockTable {
    let two_s = spec.intrinsic_spin().twice() as i64;
    let mut blocks = BTreeMap::new();
    for l in 0..=spec.l_max {
        let two_l = 2 * l as i64;
        let mut two_j = (two_l - two_s).abs();
        while two_j <= two_l + two_s {
            *blocks.entry(HalfInt::from_twice(two_j as u32)).or_insert(0) += 1;
            two_j += 2;
        }
    }
    JBlockTable {
        blocks,
        spin: spec.intrinsic_spin(),
        dirac_copies: spec.dirac_dim(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(build_basis(BasisSpec::orbital(0)).dim(), 1);
        assert_eq!(build_basis(BasisSpec::orbital(2)).dim(), 9);
        assert_eq!(build_basis(BasisSpec::new(1, 2, false).unwrap()).dim(), 8);
        assert_eq!(build_basis(BasisSpec::new(1, 2, true).unwrap()).dim(), 32);
    }

    #[test]
    fn rejects_zero_spin_dim() {
        assert!(BasisSpec::new(1, 0, false).is_err());
    }

    #[test]
    fn ordering_is_l_then_m_then_spin_then_dirac() {
        let basis = build_basis(BasisSpec::new(1, 2, true).unwrap());
        let s = basis.states();
        assert_eq!(
            s[0],
            BasisState { l: 0, m_l: 0, spin_index: 0, dirac_index: Some(0) }
        );
        assert_eq!(s[3].dirac_index, Some(3));
        assert_eq!(s[4].spin_index, 1);
        assert_eq!((s[8].l, s[8].m_l), (1, -1));
        assert_eq!((s[31].l, s[31].m_l, s[31].spin_index), (1, 1, 1));
    }

    #[test]
    fn index_of_rejects_out_of_range() {
        let basis = build_basis(BasisSpec::orbital(1));
        let bad = BasisState { l: 1, m_l: 2, spin_index: 0, dirac_index: None };
        assert_eq!(basis.index_of(&bad), None);
        let dirac = BasisState { l: 0, m_l: 0, spin_index: 0, dirac_index: Some(0) };
        assert_eq!(basis.index_of(&dirac), None);
    }

    #[test]
    fn j_blocks_fermion_lmax1() {
        let t = couple_to_total_j(BasisSpec::new(1, 2, false).unwrap());
        let blocks: Vec<_> = t.blocks().collect();
        assert_eq!(
            blocks,
            vec![(HalfInt::from_twice(1), 2), (HalfInt::from_twice(3), 1)]
        );
        assert_eq!(t.total_dim(), 8);
        assert!(!t.is_edge(HalfInt::from_twice(1)));
        assert!(t.is_edge(HalfInt::from_twice(3)));
    }

    #[test]
    fn j_blocks_boson_and_pure_spin() {
        let t = couple_to_total_j(BasisSpec::orbital(2));
        let blocks: Vec<_> = t.blocks().collect();
        assert_eq!(
            blocks,
            vec![(HalfInt::integer(0), 1), (HalfInt::integer(1), 1), (HalfInt::integer(2), 1)]
        );
        assert!(t.is_edge(HalfInt::integer(2)));
        assert!(!t.is_edge(HalfInt::integer(1)));

        let t = couple_to_total_j(BasisSpec::new(0, 2, false).unwrap());
        assert_eq!(t.blocks().collect::<Vec<_>>(), vec![(HalfInt::from_twice(1), 1)]);
    }

    #[test]
    fn spin_one_cutoff_loses_copies_below_top() {
        // s = 1, l <= 2: j = 2 gets copies from l = 1, 2 only (l = 3 missing).
        let t = couple_to_total_j(BasisSpec::new(2, 3, false).unwrap());
        assert_eq!(t.copies(HalfInt::integer(2)), 2);
        assert!(t.is_edge(HalfInt::integer(2)));
        assert!(t.is_edge(HalfInt::integer(3)));
        assert!(!t.is_edge(HalfInt::integer(1)));
    }

    #[test]
    fn half_int_display() {
        assert_eq!(HalfInt::from_twice(3).to_string(), "3/2");
        assert_eq!(HalfInt::integer(2).to_string(), "2");
        assert_eq!(HalfInt::from_twice(5).casimir(), 8.75);
    }

    proptest! {
        #[test]
        fn enumeration_round_trip(l_max in 0u32..6, spin_dim in 1usize..4, dirac in any::<bool>()) {
            let basis = build_basis(BasisSpec::new(l_max, spin_dim, dirac).unwrap());
            prop_assert_eq!(basis.dim(), basis.spec().dim());
            for (i, s) in basis.states().iter().enumerate() {
                prop_assert_eq!(basis.index_of(s), Some(i));
            }
        }

        #[test]
        fn j_table_accounts_for_every_state(l_max in 0u32..8, spin_dim in 1usize..5) {
            let spec = BasisSpec::new(l_max, spin_dim, false).unwrap();
            let t = couple_to_total_j(spec);
            prop_assert_eq!(t.total_dim(), spec.internal_dim());
            prop_assert!(t.blocks().all(|(_, c)| c >= 1));
        }
    }
}
