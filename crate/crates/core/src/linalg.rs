//! Dense complex linear algebra on the eight-state atom ⊗ mode-1 ⊗ mode-2 space.
//!
//! Index `k` (zero based) corresponds to the basis vector `V{k+1}`:
//!
//! | index | state        |
//! |-------|--------------|
//! | 0     | `|e,0,0̄⟩`    |
//! | 1     | `|g,1,1̄⟩`    |
//! | 2     | `|e,1,1̄⟩`    |
//! | 3     | `|g,0,0̄⟩`    |
//! | 4     | `|e,1,0̄⟩`    |
//! | 5     | `|g,0,1̄⟩`    |
//! | 6     | `|e,0,1̄⟩`    |
//! | 7     | `|g,1,0̄⟩`    |

use std::fmt;
use std::ops::{Index, Mul};

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

pub const DIM: usize = 8;

pub type C64 = Complex64;
pub type Matrix8 = SMatrix<C64, DIM, DIM>;
pub type Vector8 = SVector<C64, DIM>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Ground,
    Excited,
}

/// Occupation label of a basis vector: atomic level and photon numbers of both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub atom: Atom,
    pub photons_m1: u8,
    pub photons_m2: u8,
}

impl BasisLabel {
    pub const fn new(atom: Atom, photons_m1: u8, photons_m2: u8) -> Self {
        Self {
            atom,
            photons_m1,
            photons_m2,
        }
    }

    /// Labels in basis order, `ALL[k]` is `V{k+1}`.
    pub const ALL: [BasisLabel; DIM] = [
        BasisLabel::new(Atom::Excited, 0, 0),
        BasisLabel::new(Atom::Ground, 1, 1),
        BasisLabel::new(Atom::Excited, 1, 1),
        BasisLabel::new(Atom::Ground, 0, 0),
        BasisLabel::new(Atom::Excited, 1, 0),
        BasisLabel::new(Atom::Ground, 0, 1),
        BasisLabel::new(Atom::Excited, 0, 1),
        BasisLabel::new(Atom::Ground, 1, 0),
    ];

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Zero-based position in the basis, `None` for photon numbers above one.
    pub fn index(&self) -> Option<usize> {
        Self::ALL.iter().position(|l| l == self)
    }

    /// Total number of excitations (atom excitation plus photons).
    pub fn excitations(&self) -> u8 {
        let atom = match self.atom {
            Atom::Excited => 1,
            Atom::Ground => 0,
        };
        atom + self.photons_m1 + self.photons_m2
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.atom {
            Atom::Excited => 'e',
            Atom::Ground => 'g',
        };
        write!(f, "|{},{},{}>", a, self.photons_m1, self.photons_m2)
    }
}

/// Basis indices, zero based.
pub mod basis {
    pub const V1: usize = 0;
    pub const V2: usize = 1;
    pub const V3: usize = 2;
    pub const V4: usize = 3;
    pub const V5: usize = 4;
    pub const V6: usize = 5;
    pub const V7: usize = 6;
    pub const V8: usize = 7;
}

/// Probability amplitudes over the eight basis states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(Vector8);

impl StateVector {
    pub fn new(amplitudes: [C64; DIM]) -> Self {
        Self(Vector8::from(amplitudes))
    }

    /// Unit vector on basis index `k`.
    pub fn basis(k: usize) -> Self {
        let mut v = Vector8::zeros();
        v[k] = C64::new(1.0, 0.0);
        Self(v)
    }

    /// The experiment's initial state `|e,0,0̄⟩`.
    pub fn initial() -> Self {
        Self::basis(basis::V1)
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.0[k]
    }

    pub fn amplitudes(&self) -> [C64; DIM] {
        let mut out = [C64::new(0.0, 0.0); DIM];
        out.copy_from_slice(self.0.as_slice());
        out
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[k].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn as_vector(&self) -> &Vector8 {
        &self.0
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for StateVector {
    type Output = C64;

    fn index(&self, k: usize) -> &C64 {
        &self.0[k]
    }
}

/// Evolution matrix `U_ij = ⟨V_i|U|V_j⟩` on the eight-state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator(Matrix8);

impl Propagator {
    pub fn identity() -> Self {
        Self(Matrix8::identity())
    }

    pub fn from_matrix(m: Matrix8) -> Self {
        Self(m)
    }

    pub fn from_fn(f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(Matrix8::from_fn(f))
    }

    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn apply(&self, s: &StateVector) -> StateVector {
        StateVector(self.0 * s.0)
    }

    /// `self` after `earlier`: the product `self · earlier`.
    pub fn after(&self, earlier: &Propagator) -> Propagator {
        Propagator(self.0 * earlier.0)
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.0.adjoint() * self.0 - Matrix8::identity();
        d.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Propagator) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Propagator {
    type Output = C64;

    fn index(&self, ij: (usize, usize)) -> &C64 {
        &self.0[ij]
    }
}

impl Mul for Propagator {
    type Output = Propagator;

    fn mul(self, rhs: Propagator) -> Propagator {
        self.after(&rhs)
    }
}

impl Mul<StateVector> for Propagator {
    type Output = StateVector;

    fn mul(self, rhs: StateVector) -> StateVector {
        self.apply(&rhs)
    }
}

pub fn apply(u: &Propagator, s: &StateVector) -> StateVector {
    u.apply(s)
}

/// `u_later · u_earlier`.
pub fn compose(u_later: &Propagator, u_earlier: &Propagator) -> Propagator {
    u_later.after(u_earlier)
}

/// Composes factors given in chronological order (earliest first).
pub fn compose_chronological<'a>(factors: impl IntoIterator<Item = &'a Propagator>) -> Propagator {
    factors
        .into_iter()
        .fold(Propagator::identity(), |acc, u| u.after(&acc))
}

pub fn unitarity_defect(u: &Propagator) -> f64 {
    u.unitarity_defect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_labels_are_bijective() {
        for (k, label) in BasisLabel::ALL.iter().enumerate() {
            assert_eq!(label.index(), Some(k));
            assert_eq!(BasisLabel::from_index(k), Some(*label));
        }
        let mut seen = std::collections::HashSet::new();
        for label in BasisLabel::ALL {
            assert!(seen.insert(label));
        }
        assert_eq!(BasisLabel::new(Atom::Ground, 2, 0).index(), None);
    }

    #[test]
    fn basis_order_matches_table() {
        assert_eq!(
            BasisLabel::ALL[basis::V1],
            BasisLabel::new(Atom::Excited, 0, 0)
        );
        assert_eq!(
            BasisLabel::ALL[basis::V6],
            BasisLabel::new(Atom::Ground, 0, 1)
        );
        assert_eq!(
            BasisLabel::ALL[basis::V8],
            BasisLabel::new(Atom::Ground, 1, 0)
        );
        assert_eq!(BasisLabel::ALL[basis::V8].to_string(), "|g,1,0>");
    }

    #[test]
    fn identity_apply_is_noop() {
        let s = StateVector::new([
            c(0.5, 0.0),
            c(0.0, 0.5),
            c(0.5, 0.0),
            c(0.0, 0.0),
            c(0.0, -0.5),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]);
        assert_eq!(Propagator::identity().apply(&s), s);
    }

    #[test]
    fn permutation_moves_basis_vector() {
        let mut p = Propagator::identity();
        p.set_entry(0, 0, c(0.0, 0.0));
        p.set_entry(7, 7, c(0.0, 0.0));
        p.set_entry(0, 7, c(1.0, 0.0));
        p.set_entry(7, 0, c(1.0, 0.0));
        assert_eq!(apply(&p, &StateVector::basis(0)), StateVector::basis(7));
        assert_eq!(unitarity_defect(&p), 0.0);
    }

    #[test]
    fn defect_detects_doubled_entry() {
        assert_eq!(unitarity_defect(&Propagator::identity()), 0.0);
        let mut p = Propagator::identity();
        p.set_entry(3, 3, c(2.0, 0.0));
        assert!(unitarity_defect(&p) > 0.0);
    }

    #[test]
    fn compose_with_identity_and_inverse() {
        let u = random_unitary(&[0.3, -1.2, 0.7, 2.2, 0.1, -0.4, 1.1, 0.9, -2.0, 0.5]);
        assert_eq!(compose(&Propagator::identity(), &u), u);
        assert!(compose(&u.adjoint(), &u).max_abs_diff(&Propagator::identity()) < 1e-10);
    }

    #[test]
    fn chronological_composition_order() {
        let a = random_unitary(&[0.1, 0.2, 0.3]);
        let b = random_unitary(&[1.1, -0.2, 0.8]);
        let direct = compose(&b, &a);
        assert!(compose_chronological([&a, &b]).max_abs_diff(&direct) < 1e-15);
    }

    /// Product of Givens-like rotations between neighbouring indices; unitary by construction.
    fn random_unitary(angles: &[f64]) -> Propagator {
        let mut u = Propagator::identity();
        for (n, &theta) in angles.iter().enumerate() {
            let i = n % DIM;
            let j = (n * 3 + 1) % DIM;
            if i == j {
                continue;
            }
            let phase = C64::from_polar(1.0, theta * 0.7 + n as f64);
            let mut g = Propagator::identity();
            g.set_entry(i, i, c(theta.cos(), 0.0));
            g.set_entry(j, j, c(theta.cos(), 0.0));
            g.set_entry(i, j, -phase.conj() * theta.sin());
            g.set_entry(j, i, phase * theta.sin());
            u = g * u;
        }
        u
    }

    proptest! {
        #[test]
        fn apply_preserves_norm(angles in prop::collection::vec(-3.2f64..3.2, 1..24),
                                amps in prop::collection::vec(-1.0f64..1.0, 16)) {
            let u = random_unitary(&angles);
            let mut raw = [c(0.0, 0.0); DIM];
            for k in 0..DIM {
                raw[k] = c(amps[2 * k], amps[2 * k + 1]);
            }
            let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let s = StateVector::new(raw.map(|z| z / norm));
            prop_assert!((u.apply(&s).norm_sqr() - 1.0).abs() < 1e-10);
            prop_assert!(u.unitarity_defect() < 1e-10);
        }

        #[test]
        fn compose_is_associative(a in prop::collection::vec(-3.2f64..3.2, 1..16),
                                  b in prop::collection::vec(-3.2f64..3.2, 1..16),
                                  d in prop::collection::vec(-3.2f64..3.2, 1..16)) {
            let (a, b, d) = (random_unitary(&a), random_unitary(&b), random_unitary(&d));
            let left = compose(&compose(&a, &b), &d);
            let right = compose(&a, &compose(&b, &d));
            prop_assert!(left.max_abs_diff(&right) < 1e-12);
        }
    }
}
