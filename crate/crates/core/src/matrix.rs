//! The central matrix type: square matrices with unimodular entries.
//!
//! Entries are stored as phases (one real per entry), so unimodularity is
//! structural rather than numerical. Rectangular (re, im) form is produced on
//! demand for Gram computations and interchange.

use crate::error::{Error, Result};
use crate::unit::{canon_phase, circle_distance, UnitComplex};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Numerical thresholds used across the library.
///
/// `entry` bounds the allowed deviation from unimodularity when ingesting
/// rectangular data, `gram` bounds `|HH* - nI|` in the Hadamard test, `lambda`
/// is the bucketing width of the invariant set, and `equiv` is the entrywise
/// match threshold of the equivalence search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub entry: f64,
    pub gram: f64,
    pub lambda: f64,
    pub equiv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            entry: 1e-10,
            gram: 1e-9,
            lambda: 1e-7,
            equiv: 1e-8,
        }
    }
}

impl Tolerances {
    /// Checks that all thresholds are strictly positive and `lambda >= entry`.
    pub fn validated(self) -> Result<Self> {
        if !(self.entry > 0.0 && self.gram > 0.0 && self.lambda > 0.0 && self.equiv > 0.0) {
            return Err(Error::InvalidTolerances(
                "all tolerances must be strictly positive".into(),
            ));
        }
        if self.lambda < self.entry {
            return Err(Error::InvalidTolerances(format!(
                "lambda tolerance {} must be >= entry tolerance {}",
                self.lambda, self.entry
            )));
        }
        Ok(self)
    }
}

/// An n×n complex matrix with unimodular entries, stored as phases in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CHMatrix {
    n: usize,
    phases: Vec<f64>,
    dephased: bool,
}

impl CHMatrix {
    /// Build from a row-major vector of phases (radians).
    pub fn from_phases(n: usize, phases: Vec<f64>) -> Result<Self> {
        if n == 0 || phases.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} phases for order {}, got {}",
                n * n,
                n,
                phases.len()
            )));
        }
        let phases: Vec<f64> = phases.into_iter().map(canon_phase).collect();
        let mut m = CHMatrix {
            n,
            phases,
            dephased: false,
        };
        m.dephased = m.first_row_col_trivial(Tolerances::default().entry);
        Ok(m)
    }

    /// Build from a row-major grid of phases expressed in turns.
    pub fn from_turns(n: usize, turns: &[f64]) -> Result<Self> {
        Self::from_phases(n, turns.iter().map(|t| t * TAU).collect())
    }

    fn first_row_col_trivial(&self, tol: f64) -> bool {
        (0..self.n).all(|j| circle_distance(self.phase(0, j), 0.0) <= tol)
            && (0..self.n).all(|i| circle_distance(self.phase(i, 0), 0.0) <= tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_dephased(&self) -> bool {
        self.dephased
    }

    pub fn phase(&self, i: usize, j: usize) -> f64 {
        self.phases[i * self.n + j]
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn unit(&self, i: usize, j: usize) -> UnitComplex {
        UnitComplex::from_phase(self.phase(i, j))
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phase(i, j))
    }

    /// Row-major rectangular form.
    pub fn entries(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, p))
            .collect()
    }

    /// Phases in turns, row-major.
    pub fn turns(&self) -> Vec<f64> {
        self.phases.iter().map(|&p| p / TAU).collect()
    }

    /// `max_{i,j} |(HH*)_{ij} - n δ_{ij}|`.
    pub fn gram_residual(&self) -> f64 {
        gram_residual_entries(self.n, &self.entries())
    }

    /// Unimodular entries and pairwise-orthogonal rows, within tolerance.
    pub fn is_hadamard(&self, tol: &Tolerances) -> bool {
        // unimodularity holds by construction; the Gram test carries the content
        self.gram_residual() <= tol.gram
    }

    /// Normalize so the first row and column are all ones.
    ///
    /// Returns `(H', d1, d2)` with `H' = D1 H D2`, where `D1 = diag(e^{i d1})`
    /// divides row i by `h_{i0}` and `D2 = diag(e^{i d2})` divides column j by
    /// the updated `h_{0j}`. Idempotent on dephased input.
    pub fn dephase(&self) -> (CHMatrix, Vec<f64>, Vec<f64>) {
        let n = self.n;
        let d1: Vec<f64> = (0..n).map(|i| canon_phase(-self.phase(i, 0))).collect();
        let d2: Vec<f64> = (0..n)
            .map(|j| canon_phase(self.phase(0, 0) - self.phase(0, j)))
            .collect();
        let mut phases = Vec::with_capacity(n * n);
        for (i, &row_phase) in d1.iter().enumerate() {
            for (j, &col_phase) in d2.iter().enumerate() {
                phases.push(canon_phase(self.phase(i, j) + row_phase + col_phase));
            }
        }
        // the pivot row and column are exactly zero after cancellation; force
        // them in case of rounding at the 2π boundary
        let mut out = CHMatrix {
            n,
            phases,
            dephased: true,
        };
        for j in 0..n {
            out.phases[j] = 0.0;
        }
        for i in 0..n {
            out.phases[i * n] = 0.0;
        }
        (out, d1, d2)
    }

    pub fn conjugate(&self) -> CHMatrix {
        CHMatrix {
            n: self.n,
            phases: self.phases.iter().map(|&p| canon_phase(-p)).collect(),
            dephased: self.dephased,
        }
    }

    pub fn transpose(&self) -> CHMatrix {
        let n = self.n;
        let mut phases = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                phases[j * n + i] = self.phase(i, j);
            }
        }
        CHMatrix {
            n,
            phases,
            dephased: self.dephased,
        }
    }

    pub fn adjoint(&self) -> CHMatrix {
        self.transpose().conjugate()
    }

    /// Largest entrywise distance `max_{i,j} |h_{ij} - g_{ij}|`.
    pub fn max_entry_distance(&self, other: &CHMatrix) -> f64 {
        assert_eq!(self.n, other.n, "order mismatch");
        self.phases
            .iter()
            .zip(other.phases.iter())
            .map(|(&a, &b)| {
                // |e^{ia} - e^{ib}| = 2 |sin((a-b)/2)|
                2.0 * ((a - b) / 2.0).sin().abs()
            })
            .fold(0.0, f64::max)
    }

    /// Conjugate permutation `P H P^T` (same permutation on rows and columns).
    /// Preserves symmetry; preserves dephasing when `perm[0] == 0`.
    pub fn permuted_symmetrically(&self, perm: &[usize]) -> CHMatrix {
        let n = self.n;
        assert_eq!(perm.len(), n);
        let mut phases = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                phases[i * n + j] = self.phase(perm[i], perm[j]);
            }
        }
        let mut m = CHMatrix {
            n,
            phases,
            dephased: false,
        };
        m.dephased = m.first_row_col_trivial(Tolerances::default().entry);
        m
    }
}

/// Gram residual of an arbitrary rectangular matrix (not necessarily
/// unimodular): `max_{i,j} |(HH*)_{ij} - n δ_{ij}|`.
pub fn gram_residual_entries(n: usize, entries: &[Complex64]) -> f64 {
    assert_eq!(entries.len(), n * n);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut ip = Complex64::new(0.0, 0.0);
            for k in 0..n {
                ip += entries[i * n + k] * entries[j * n + k].conj();
            }
            let target = if i == j { n as f64 } else { 0.0 };
            worst = worst.max((ip - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use proptest::prelude::*;

    #[test]
    fn default_tolerances_valid() {
        Tolerances::default().validated().unwrap();
        assert!(Tolerances {
            entry: -1.0,
            ..Tolerances::default()
        }
        .validated()
        .is_err());
        assert!(Tolerances {
            lambda: 1e-12,
            ..Tolerances::default()
        }
        .validated()
        .is_err());
    }

    #[test]
    fn fourier_is_hadamard_all_ones_is_not() {
        let tol = Tolerances::default();
        assert!(catalogue::fourier(6).is_hadamard(&tol));
        let ones = CHMatrix::from_phases(6, vec![0.0; 36]).unwrap();
        assert!(!ones.is_hadamard(&tol));
        assert!(catalogue::tao_s6().is_hadamard(&tol));
    }

    #[test]
    fn gram_residual_oracle_values() {
        assert!(catalogue::fourier(6).gram_residual() <= 1e-14);
        // rectangular path: the 6x6 identity has residual |1 - 6| = 5
        let mut id = vec![Complex64::new(0.0, 0.0); 36];
        for i in 0..6 {
            id[i * 6 + i] = Complex64::new(1.0, 0.0);
        }
        assert_eq!(gram_residual_entries(6, &id), 5.0);
    }

    #[test]
    fn dephase_identity_on_dephased() {
        let s6 = catalogue::tao_s6();
        let (d, d1, d2) = s6.dephase();
        assert_eq!(d, s6);
        assert!(d1.iter().all(|&p| p == 0.0));
        assert!(d2.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn dephase_undoes_row_scaling() {
        let f6 = catalogue::fourier(6);
        let mut phases = f6.phases().to_vec();
        for j in 0..6 {
            phases[6 + j] += TAU / 4.0; // scale row 2 (index 1) by i
        }
        let scrambled = CHMatrix::from_phases(6, phases).unwrap();
        assert!(!scrambled.is_dephased());
        let (recovered, _, _) = scrambled.dephase();
        assert!(recovered.max_entry_distance(&f6) < 1e-12);
        assert!(recovered.is_dephased());
    }

    #[test]
    fn s6_symmetric_f6_adjoint_unitary() {
        let s6 = catalogue::tao_s6();
        assert_eq!(s6.transpose(), s6);
        let f6 = catalogue::fourier(6);
        let fe = f6.entries();
        let ae = f6.adjoint().entries();
        // (F6* F6)_{ij} = sum_k conj(F_{ki}) F_{kj} = 6 delta_ij
        for i in 0..6 {
            for j in 0..6 {
                let mut ip = Complex64::new(0.0, 0.0);
                for k in 0..6 {
                    ip += ae[i * 6 + k] * fe[k * 6 + j];
                }
                let target = if i == j { 6.0 } else { 0.0 };
                assert!((ip - target).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn symmetric_permutation_moves_the_diagonal() {
        let d6 = catalogue::dita_d6();
        let p = d6.permuted_symmetrically(&[0, 1, 2, 3, 5, 4]);
        assert_eq!(p.transpose(), p);
        assert!(p.is_dephased());
        assert_eq!(p.phase(4, 4), d6.phase(5, 5));
        assert_eq!(p.phase(2, 4), d6.phase(2, 5));
        assert_eq!(
            p.permuted_symmetrically(&[0, 1, 2, 3, 5, 4]),
            d6
        );
    }

    #[test]
    fn hadamard_preserved_by_transforms() {
        let tol = Tolerances::default();
        for m in [
            catalogue::fourier(6),
            catalogue::tao_s6(),
            catalogue::dita_d6(),
            catalogue::bjorck_c6(),
            catalogue::m6_discrete(),
        ] {
            assert!(m.is_hadamard(&tol));
            assert!(m.transpose().is_hadamard(&tol));
            assert!(m.conjugate().is_hadamard(&tol));
            assert!(m.adjoint().is_hadamard(&tol));
            let (d, _, _) = m.dephase();
            assert!(d.is_hadamard(&tol));
        }
    }

    proptest! {
        #[test]
        fn conjugate_involutive(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let phases: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..TAU)).collect();
            let m = CHMatrix::from_phases(4, phases).unwrap();
            prop_assert!(m.conjugate().conjugate().max_entry_distance(&m) < 1e-13);
            prop_assert!(m.transpose().transpose() == m);
        }
    }
}
