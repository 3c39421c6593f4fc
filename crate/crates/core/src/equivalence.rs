//! The Haagerup invariant set, equivalence certificates, and exact
//! equivalence decision by exhaustive search over permutation pairs.

use crate::error::{Error, Result};
use crate::matrix::{CHMatrix, Tolerances};
use crate::unit::{canon_phase, circle_distance, UnitComplex};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// The invariant set of a matrix: all phases of
/// `h_{ij} · conj(h_{kj}) · h_{kl} · conj(h_{il})`, bucketed within the
/// lambda tolerance. Contains phase 0 (take `i = k`, `j = l`) and is closed
/// under phase negation (swapping `i` and `k` conjugates the product), so it
/// never distinguishes a matrix from its entrywise conjugate.
#[derive(Debug, Clone)]
pub struct LambdaSet {
    phases: Vec<f64>,
    source_order: usize,
}

impl LambdaSet {
    fn from_raw_phases(mut raw: Vec<f64>, source_order: usize, tol: f64) -> Self {
        raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // single-linkage clusters along the sorted circle
        let mut clusters: Vec<Vec<f64>> = Vec::new();
        for &p in &raw {
            match clusters.last_mut() {
                Some(cl) if p - *cl.last().unwrap() <= tol => cl.push(p),
                _ => clusters.push(vec![p]),
            }
        }
        // wraparound: the last cluster may continue into the first
        if clusters.len() > 1 {
            let first_start = clusters[0][0];
            let last_end = *clusters.last().unwrap().last().unwrap();
            if first_start + TAU - last_end <= tol {
                let mut tail = clusters.pop().unwrap();
                for p in tail.iter_mut() {
                    *p -= TAU;
                }
                tail.extend_from_slice(&clusters[0]);
                clusters[0] = tail;
            }
        }
        let mut phases: Vec<f64> = clusters
            .iter()
            .map(|cl| canon_phase(cl.iter().sum::<f64>() / cl.len() as f64))
            .collect();
        phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
        phases.dedup();
        LambdaSet {
            phases,
            source_order,
        }
    }

    /// Sorted representative phases in `[0, 2π)`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn source_order(&self) -> usize {
        self.source_order
    }

    /// Smallest circular distance from `phase` to any representative.
    pub fn min_distance(&self, phase: f64) -> f64 {
        self.phases
            .iter()
            .map(|&p| circle_distance(p, phase))
            .fold(f64::INFINITY, f64::min)
    }
}

/// All `n⁴` Haagerup products of `H`, bucketed within `tol.lambda`.
pub fn lambda_set(h: &CHMatrix, tol: &Tolerances) -> LambdaSet {
    let n = h.n();
    let mut raw = Vec::with_capacity(n * n * n * n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    raw.push(canon_phase(
                        h.phase(i, j) - h.phase(k, j) + h.phase(k, l) - h.phase(i, l),
                    ));
                }
            }
        }
    }
    LambdaSet::from_raw_phases(raw, n, tol.lambda)
}

/// Diagnostic variant restricted to ordered index pairs `i < k`, `j < l`.
///
/// Unlike [`lambda_set`] this is NOT invariant under equivalence (permuting
/// rows or columns can replace a product by its conjugate), so it must not be
/// used to decide anything; it exists to reproduce membership computations
/// that enumerate each unordered quadruple once.
pub fn lambda_set_ordered(h: &CHMatrix, tol: &Tolerances) -> LambdaSet {
    let n = h.n();
    let mut raw = Vec::new();
    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..n {
                for l in (j + 1)..n {
                    raw.push(canon_phase(
                        h.phase(i, j) - h.phase(k, j) + h.phase(k, l) - h.phase(i, l),
                    ));
                }
            }
        }
    }
    LambdaSet::from_raw_phases(raw, n, tol.lambda)
}

/// Membership of a unimodular value, at the lambda tolerance.
pub fn lambda_contains(l: &LambdaSet, z: UnitComplex, tol: &Tolerances) -> bool {
    l.min_distance(z.phase()) <= tol.lambda
}

/// Symmetric fuzzy set equality: every phase of each set lies within
/// `tol.lambda` of some phase of the other.
pub fn lambda_equal(l1: &LambdaSet, l2: &LambdaSet, tol: &Tolerances) -> bool {
    l1.phases.iter().all(|&p| l2.min_distance(p) <= tol.lambda)
        && l2.phases.iter().all(|&p| l1.min_distance(p) <= tol.lambda)
}

/// A phase present in one set and absent from the other.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaEvidence {
    pub phase_turns: f64,
    /// 1 or 2: which argument of [`lambda_separation`] contains the phase.
    pub present_in: u8,
    pub distance_to_other: f64,
}

/// Evidence separating two invariant sets, if any.
pub fn lambda_separation(l1: &LambdaSet, l2: &LambdaSet, tol: &Tolerances) -> Option<LambdaEvidence> {
    for &p in &l1.phases {
        let d = l2.min_distance(p);
        if d > tol.lambda {
            return Some(LambdaEvidence {
                phase_turns: p / TAU,
                present_in: 1,
                distance_to_other: d,
            });
        }
    }
    for &p in &l2.phases {
        let d = l1.min_distance(p);
        if d > tol.lambda {
            return Some(LambdaEvidence {
                phase_turns: p / TAU,
                present_in: 2,
                distance_to_other: d,
            });
        }
    }
    None
}

/// Witness of `H1 = D1 P1 H2 P2 D2`: permutations as index vectors
/// (`(P1 H)_{i·} = H_{p1[i]·}`, `(H P2)_{·j} = H_{·p2[j]}`) and diagonal
/// phases in radians.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceCertificate {
    pub p1: Vec<usize>,
    pub d1: Vec<f64>,
    pub p2: Vec<usize>,
    pub d2: Vec<f64>,
}

impl EquivalenceCertificate {
    pub fn identity(n: usize) -> Self {
        EquivalenceCertificate {
            p1: (0..n).collect(),
            d1: vec![0.0; n],
            p2: (0..n).collect(),
            d2: vec![0.0; n],
        }
    }

    /// Uniformly random permutations and diagonal phases.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mut p1: Vec<usize> = (0..n).collect();
        let mut p2: Vec<usize> = (0..n).collect();
        p1.shuffle(rng);
        p2.shuffle(rng);
        EquivalenceCertificate {
            p1,
            d1: (0..n).map(|_| rng.gen_range(0.0..TAU)).collect(),
            p2,
            d2: (0..n).map(|_| rng.gen_range(0.0..TAU)).collect(),
        }
    }

    /// Compute `D1 P1 H P2 D2`.
    pub fn apply(&self, h: &CHMatrix) -> CHMatrix {
        let n = h.n();
        assert_eq!(self.p1.len(), n, "certificate order mismatch");
        let mut phases = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                phases.push(self.d1[i] + h.phase(self.p1[i], self.p2[j]) + self.d2[j]);
            }
        }
        CHMatrix::from_phases(n, phases).expect("square grid")
    }
}

/// Budget for the factorial search. Orders 7 and 8 must be enabled
/// explicitly; anything larger is out of range.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceOptions {
    pub max_order: usize,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        EquivalenceOptions { max_order: 6 }
    }
}

impl EquivalenceOptions {
    pub fn with_max_order(max_order: usize) -> Self {
        EquivalenceOptions {
            max_order: max_order.min(8),
        }
    }
}

fn value_moments(entries: &[Complex64]) -> [Complex64; 3] {
    let mut m = [Complex64::new(0.0, 0.0); 3];
    for z in entries {
        let mut p = *z;
        for mk in m.iter_mut() {
            *mk += p;
            p *= z;
        }
    }
    m
}

struct Search<'a> {
    n: usize,
    h1: &'a CHMatrix,
    h2: &'a CHMatrix,
    target: Vec<Complex64>,
    tol: f64,
}

impl<'a> Search<'a> {
    /// Dephased form of `P1 H2 P2` depends only on which row and column land
    /// first: entry `(i, j)` becomes
    /// `h_{p1[i], p2[j]} h_{r,c} / (h_{p1[i], c} h_{r, p2[j]})` with
    /// `r = p1[0]`, `c = p2[0]`. Grids of those core values are precomputed
    /// per pivot pair and the remaining rows/columns are matched by
    /// backtracking in lexicographic order, so the first certificate found is
    /// the lexicographically smallest `(P1, P2)`.
    fn run(&self) -> Option<EquivalenceCertificate> {
        let n = self.n;
        let tmom = value_moments(&self.target);
        for r in 0..n {
            let mut grids: Vec<Vec<Complex64>> = Vec::with_capacity(n);
            let mut viable = vec![false; n];
            #[allow(clippy::needless_range_loop)]
            for c in 0..n {
                let mut g = vec![Complex64::new(0.0, 0.0); n * n];
                for i in 0..n {
                    for j in 0..n {
                        g[i * n + j] = Complex64::from_polar(
                            1.0,
                            self.h2.phase(i, j) + self.h2.phase(r, c)
                                - self.h2.phase(i, c)
                                - self.h2.phase(r, j),
                        );
                    }
                }
                // a complete entrywise match within tol forces the value
                // multisets to agree, which bounds the moment sums:
                // |Σ z^k - Σ w^k| <= n² k tol
                let gmom = value_moments(&g);
                viable[c] = (0..3).all(|k| {
                    (gmom[k] - tmom[k]).norm()
                        <= (n * n) as f64 * (k + 1) as f64 * self.tol + 1e-9
                });
                grids.push(g);
            }
            if !viable.iter().any(|&v| v) {
                continue;
            }
            let mut p1 = vec![r; n];
            let mut used = vec![false; n];
            used[r] = true;
            if let Some(cert) = self.assign_rows(1, &mut p1, &mut used, r, &grids, &viable) {
                return Some(cert);
            }
        }
        None
    }

    fn assign_rows(
        &self,
        depth: usize,
        p1: &mut Vec<usize>,
        used: &mut Vec<bool>,
        r: usize,
        grids: &[Vec<Complex64>],
        viable: &[bool],
    ) -> Option<EquivalenceCertificate> {
        let n = self.n;
        if depth == n {
            for (c, grid) in grids.iter().enumerate() {
                if !viable[c] {
                    continue;
                }
                let mut p2 = vec![c; n];
                let mut used_c = vec![false; n];
                used_c[c] = true;
                if self.assign_cols(1, p1, &mut p2, &mut used_c, grid) {
                    let cert = self.build_certificate(p1, &p2, r, c);
                    if cert.apply(self.h2).max_entry_distance(self.h1) <= self.tol {
                        return Some(cert);
                    }
                }
            }
            return None;
        }
        for i in 0..n {
            if used[i] {
                continue;
            }
            used[i] = true;
            p1[depth] = i;
            if let Some(cert) = self.assign_rows(depth + 1, p1, used, r, grids, viable) {
                return Some(cert);
            }
            used[i] = false;
        }
        None
    }

    fn assign_cols(
        &self,
        depth: usize,
        p1: &[usize],
        p2: &mut Vec<usize>,
        used: &mut Vec<bool>,
        grid: &[Complex64],
    ) -> bool {
        let n = self.n;
        if depth == n {
            return true;
        }
        'candidates: for j in 0..n {
            if used[j] {
                continue;
            }
            for t in 1..n {
                if (grid[p1[t] * n + j] - self.target[t * n + depth]).norm() > self.tol {
                    continue 'candidates;
                }
            }
            used[j] = true;
            p2[depth] = j;
            if self.assign_cols(depth + 1, p1, p2, used, grid) {
                return true;
            }
            used[j] = false;
        }
        false
    }

    fn build_certificate(
        &self,
        p1: &[usize],
        p2: &[usize],
        r: usize,
        c: usize,
    ) -> EquivalenceCertificate {
        let n = self.n;
        let d1: Vec<f64> = (0..n)
            .map(|i| canon_phase(self.h1.phase(i, 0) - self.h2.phase(p1[i], c)))
            .collect();
        let d2: Vec<f64> = (0..n)
            .map(|j| {
                canon_phase(
                    self.h2.phase(r, c) - self.h2.phase(r, p2[j]) + self.h1.phase(0, j)
                        - self.h1.phase(0, 0),
                )
            })
            .collect();
        EquivalenceCertificate {
            p1: p1.to_vec(),
            d1,
            p2: p2.to_vec(),
            d2,
        }
    }
}

/// Decide whether `H1 = D1 P1 H2 P2 D2` has a solution within `tol.equiv`,
/// returning the first certificate in lexicographic `(P1, P2)` order.
/// Certificates are verified by application before being returned.
pub fn are_equivalent(
    h1: &CHMatrix,
    h2: &CHMatrix,
    tol: &Tolerances,
    opts: &EquivalenceOptions,
) -> Result<Option<EquivalenceCertificate>> {
    if h1.n() != h2.n() {
        return Err(Error::DimensionMismatch(format!(
            "orders {} and {} differ",
            h1.n(),
            h2.n()
        )));
    }
    let n = h1.n();
    let max = opts.max_order.min(8);
    if n > max {
        return Err(Error::OrderTooLarge { n, max });
    }
    let (t_deph, _, _) = h1.dephase();
    let search = Search {
        n,
        h1,
        h2,
        target: t_deph.entries(),
        tol: tol.equiv,
    };
    Ok(search.run())
}

/// Whether `H` is equivalent to its entrywise conjugate. A matrix equivalent
/// to a self-adjoint one always is, so a `false` answer rules out membership
/// in any self-adjoint family.
pub fn conjugate_equivalent(
    h: &CHMatrix,
    tol: &Tolerances,
    opts: &EquivalenceOptions,
) -> Result<bool> {
    Ok(are_equivalent(h, &h.conjugate(), tol, opts)?.is_some())
}
