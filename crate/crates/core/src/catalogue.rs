//! Exact constructors for the named order-6 matrices, the one-parameter
//! family connecting the Fourier and Diţă matrices, the block tensor
//! construction, and data-file ingestion for affine families.

use crate::error::{Error, Result};
use crate::matrix::{CHMatrix, Tolerances};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Fourier matrix: entry `(j, k) = e^{2πi jk/n}`, 0-indexed. Dephased.
pub fn fourier(n: usize) -> CHMatrix {
    assert!(n >= 1);
    let mut turns = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            turns.push(((j * k) % n) as f64 / n as f64);
        }
    }
    CHMatrix::from_turns(n, &turns).expect("square grid")
}

/// The symmetric order-6 matrix over cube roots of unity, equivalent to Tao's
/// matrix. Phases in thirds of a turn.
pub fn tao_s6() -> CHMatrix {
    const T: [[u8; 6]; 6] = [
        [0, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 2, 2],
        [0, 1, 0, 2, 1, 2],
        [0, 1, 2, 0, 2, 1],
        [0, 2, 1, 2, 0, 1],
        [0, 2, 2, 1, 1, 0],
    ];
    let turns: Vec<f64> = T.iter().flatten().map(|&k| k as f64 / 3.0).collect();
    CHMatrix::from_turns(6, &turns).expect("square grid")
}

/// The order-6 matrix over fourth roots of unity reached as the limit of the
/// one-parameter family; the canonical representative of the Diţă matrix
/// class here. Phases in quarter turns.
pub fn dita_d6() -> CHMatrix {
    // 0 = 1, 1 = i, 2 = -1, 3 = -i
    const T: [[u8; 6]; 6] = [
        [0, 0, 0, 0, 0, 0],
        [0, 2, 3, 3, 1, 1],
        [0, 3, 2, 1, 2, 0],
        [0, 3, 1, 2, 0, 2],
        [0, 1, 2, 0, 3, 2],
        [0, 1, 0, 2, 2, 3],
    ];
    let turns: Vec<f64> = T.iter().flatten().map(|&k| k as f64 / 4.0).collect();
    CHMatrix::from_turns(6, &turns).expect("square grid")
}

/// Permuted version of Björck's cyclic matrix. Entries are powers of
/// `d = (1-√3)/2 + i·sqrt(√3/2)` (unimodular), their conjugates and negatives.
pub fn bjorck_c6() -> CHMatrix {
    let d_re = (1.0 - 3.0f64.sqrt()) / 2.0;
    let d_im = (3.0f64.sqrt() / 2.0).sqrt();
    let th = Complex64::new(d_re, d_im).arg();
    let half = PI;
    // phase = a*θ + b*π encodes ±d^a (negative conjugate powers use a < 0)
    let table: [[(i8, u8); 6]; 6] = [
        [(0, 0), (0, 0), (0, 0), (0, 0), (0, 0), (0, 0)],
        [(0, 0), (0, 1), (2, 0), (1, 1), (1, 0), (2, 1)],
        [(0, 0), (2, 0), (0, 0), (3, 1), (-1, 1), (2, 0)],
        [(0, 0), (1, 1), (3, 1), (3, 1), (1, 1), (4, 0)],
        [(0, 0), (1, 0), (-1, 1), (1, 1), (-1, 0), (0, 1)],
        [(0, 0), (2, 1), (2, 0), (4, 0), (0, 1), (4, 1)],
    ];
    let phases: Vec<f64> = table
        .iter()
        .flatten()
        .map(|&(a, b)| a as f64 * th + b as f64 * half)
        .collect();
    CHMatrix::from_phases(6, phases).expect("square grid")
}

struct BlockEntries {
    x: Complex64,
    d: Complex64,
    a: Complex64,
    b: Complex64,
    c: Complex64,
    p: Complex64,
    q: Complex64,
}

/// Assemble the symmetric dephased block layout shared by the discrete matrix
/// and the family:
///
/// ```text
/// 1  1  1  1  1  1
/// 1 -1  x  x -x -x
/// 1  x  d  a  b  c
/// 1  x  a  d  c  b
/// 1 -x  b  c  p  q
/// 1 -x  c  b  q  p
/// ```
fn block_matrix(e: &BlockEntries) -> CHMatrix {
    let tx = e.x.arg();
    let (td, ta, tb, tc, tp, tq) = (
        e.d.arg(),
        e.a.arg(),
        e.b.arg(),
        e.c.arg(),
        e.p.arg(),
        e.q.arg(),
    );
    let mx = tx + PI; // -x
    let phases = vec![
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
        0.0, PI, tx, tx, mx, mx, //
        0.0, tx, td, ta, tb, tc, //
        0.0, tx, ta, td, tc, tb, //
        0.0, mx, tb, tc, tp, tq, //
        0.0, mx, tc, tb, tq, tp,
    ];
    CHMatrix::from_phases(6, phases).expect("square grid")
}

fn m6_closed_forms(conjugate_branch: bool) -> BlockEntries {
    let s = 13.0f64.sqrt();
    let flip = if conjugate_branch { -1.0 } else { 1.0 };
    let x = Complex64::new((1.0 - s) / 3.0, flip * (-5.0 + 2.0 * s).sqrt() / 3.0);
    let a = Complex64::new(-(7.0 - s) / 9.0, -flip * (19.0 + 14.0 * s).sqrt() / 9.0);
    let inner = (-2446.0 + 730.0 * s).sqrt();
    let b = Complex64::new(
        (-14.0 + 2.0 * s - (-58.0 + 34.0 * s).sqrt()) / 18.0,
        -flip * (134.0 + 22.0 * s - 8.0 * inner).sqrt() / 18.0,
    );
    let c = Complex64::new(
        (-14.0 + 2.0 * s + (-58.0 + 34.0 * s).sqrt()) / 18.0,
        flip * (134.0 + 22.0 * s + 8.0 * inner).sqrt() / 18.0,
    );
    let p = Complex64::new(3.0 - s, -flip * (-21.0 + 6.0 * s).sqrt());
    let q = Complex64::new((-19.0 + 4.0 * s) / 9.0, flip * 2.0 * (-122.0 + 38.0 * s).sqrt() / 9.0);
    BlockEntries {
        x,
        d: Complex64::new(1.0, 0.0),
        a,
        b,
        c,
        p,
        q,
    }
}

/// The discrete symmetric matrix with second row `(1, -1, x, x, -x, -x)` and
/// unit diagonal block, evaluated from its closed forms. `x` is the branch
/// with positive imaginary part.
pub fn m6_discrete() -> CHMatrix {
    block_matrix(&m6_closed_forms(false))
}

/// The other closed-form branch (`x` with negative imaginary part); equal to
/// the entrywise conjugate of [`m6_discrete`].
pub fn m6_discrete_conjugate() -> CHMatrix {
    block_matrix(&m6_closed_forms(true))
}

/// Parameter value at which the family reproduces the discrete matrix.
pub fn m6_discrete_parameter() -> f64 {
    ((1.0 - 13.0f64.sqrt()) / 3.0).acos()
}

pub const DEFAULT_SINGULAR_EPS: f64 = 1e-6;

/// One-parameter symmetric family `t -> M(e^{it})` with default singular-point
/// guard. See [`m6_family_with_eps`].
pub fn m6_family(t: f64) -> Result<CHMatrix> {
    m6_family_with_eps(t, DEFAULT_SINGULAR_EPS)
}

/// The non-affine one-parameter family of symmetric dephased Hadamard
/// matrices, parameterized by `x = e^{it}`.
///
/// The block entries solve the row-sum and orthogonality constraints:
/// with `A = x²-2x-1`, `B = 1+x²`, `P = x²+2x-1`,
///
/// ```text
/// a, d = A/4 ∓ i A sqrt(16-|A|²) / (4|A|)
/// b, c = -B/4 ∓ i B sqrt(16-|B|²) / (4|B|)
/// p, q = P/4 ± i P sqrt(16-|P|²) / (4|P|)
/// ```
///
/// `B` vanishes at `x = ±i` (t = π/2, 3π/2), where the `b, c` pair degenerates;
/// parameters within `eps_sing` of those points are rejected. At `t = 0` the
/// matrix is equivalent to the Fourier matrix; approaching `t = 3π/2` it tends
/// to the Diţă matrix class (see [`dita_d6`]).
pub fn m6_family_with_eps(t: f64, eps_sing: f64) -> Result<CHMatrix> {
    let dist = crate::unit::circle_distance(t, PI / 2.0).min(crate::unit::circle_distance(t, 1.5 * PI));
    if dist <= eps_sing {
        return Err(Error::SingularParameter { t, eps: eps_sing });
    }
    let x = Complex64::from_polar(1.0, t);
    // ∓/± branch pair for a four-entry sum S: (S/4) ∓ i S sqrt(16-|S|²)/(4|S|),
    // radicand clamped at zero against rounding near the singular points
    let pair = |s: Complex64| -> (Complex64, Complex64) {
        let m = s.norm();
        let root = (16.0 - m * m).max(0.0).sqrt();
        let swing = Complex64::i() * s * root / (4.0 * m);
        (s / 4.0 - swing, s / 4.0 + swing)
    };
    let (a, d) = pair(x * x - 2.0 * x - 1.0);
    let (c, b) = pair(-(1.0 + x * x));
    let (q, p) = pair(x * x + 2.0 * x - 1.0);
    Ok(block_matrix(&BlockEntries { x, d, a, b, c, p, q }))
}

/// Block tensor construction: from `K` (m×m), `H` (n×n) and m-1 diagonal
/// phase vectors of length n, build the mn×mn matrix with blocks
/// `B_{ij} = K_{ij} · D_j · H`, `D_0 = I`. Hadamard for every phase choice
/// when `K` and `H` are.
pub fn dita_construction(
    k: &CHMatrix,
    h: &CHMatrix,
    phases: &[Vec<f64>],
) -> Result<CHMatrix> {
    let m = k.n();
    let n = h.n();
    if phases.len() != m - 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected {} phase vectors, got {}",
            m - 1,
            phases.len()
        )));
    }
    if let Some(v) = phases.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "phase vectors must have length {}, got {}",
            n,
            v.len()
        )));
    }
    let nn = m * n;
    let mut out = vec![0.0; nn * nn];
    for i in 0..m {
        for s in 0..n {
            for j in 0..m {
                let dj = if j == 0 { 0.0 } else { phases[j - 1][s] };
                for t in 0..n {
                    out[(n * i + s) * nn + (n * j + t)] = k.phase(i, j) + dj + h.phase(s, t);
                }
            }
        }
    }
    CHMatrix::from_phases(nn, out)
}

/// On-disk description of an affine family: a base matrix (phases in turns)
/// and one 0/1 exponent-pattern mask per parameter. The family is
/// `H(p) = base ∘ exp(i Σ_k p_k · mask_k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineFamilyData {
    pub name: String,
    pub base_phases_turns: Vec<Vec<f64>>,
    pub masks: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct ExcludedPoint {
    pub coords: Vec<f64>,
    pub radius: f64,
}

/// Valid parameter region: per-parameter ranges minus excluded balls.
#[derive(Debug, Clone, Default)]
pub struct ParameterDomain {
    pub ranges: Vec<(f64, f64)>,
    pub excluded: Vec<ExcludedPoint>,
}

type FamilyConstructor = Box<dyn Fn(&[f64]) -> Result<CHMatrix> + Send + Sync>;

/// A named parametric family with a validated constructor.
pub struct FamilyDescriptor {
    pub name: String,
    pub arity: usize,
    pub domain: ParameterDomain,
    constructor: FamilyConstructor,
}

impl FamilyDescriptor {
    pub fn construct(&self, params: &[f64]) -> Result<CHMatrix> {
        if params.len() != self.arity {
            return Err(Error::DimensionMismatch(format!(
                "family {} takes {} parameters, got {}",
                self.name,
                self.arity,
                params.len()
            )));
        }
        (self.constructor)(params)
    }
}

impl std::fmt::Debug for FamilyDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FamilyDescriptor")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish()
    }
}

/// Descriptor for the one-parameter family, with the two singular parameter
/// values excluded.
pub fn m6_family_descriptor() -> FamilyDescriptor {
    FamilyDescriptor {
        name: "m6".into(),
        arity: 1,
        domain: ParameterDomain {
            ranges: vec![(0.0, TAU)],
            excluded: vec![
                ExcludedPoint {
                    coords: vec![PI / 2.0],
                    radius: DEFAULT_SINGULAR_EPS,
                },
                ExcludedPoint {
                    coords: vec![1.5 * PI],
                    radius: DEFAULT_SINGULAR_EPS,
                },
            ],
        },
        constructor: Box::new(|p| m6_family(p[0])),
    }
}

const AFFINE_VALIDATION_SAMPLES: usize = 16;
const AFFINE_VALIDATION_SEED: u64 = 0x48414441_4c414221;

/// Validate an affine family description and wrap it as a constructor.
///
/// Validation realizes the family at the zero vector and at
/// `AFFINE_VALIDATION_SAMPLES - 1` deterministic random parameter vectors and
/// requires every gram residual to stay within `tol.gram`.
pub fn load_affine_family(data: &AffineFamilyData, tol: &Tolerances) -> Result<FamilyDescriptor> {
    let n = data.base_phases_turns.len();
    if n == 0 || data.base_phases_turns.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(
            "base matrix must be a square grid".into(),
        ));
    }
    for (k, mask) in data.masks.iter().enumerate() {
        if mask.len() != n || mask.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "mask {} does not match the {n}×{n} base",
                k
            )));
        }
    }
    let base: Vec<f64> = data
        .base_phases_turns
        .iter()
        .flatten()
        .map(|t| t * TAU)
        .collect();
    let masks: Vec<Vec<f64>> = data
        .masks
        .iter()
        .map(|m| m.iter().flatten().copied().collect())
        .collect();
    let arity = masks.len();
    let build = move |params: &[f64]| -> Result<CHMatrix> {
        let mut phases = base.clone();
        for (k, mask) in masks.iter().enumerate() {
            for (ph, &m) in phases.iter_mut().zip(mask.iter()) {
                *ph += params[k] * m;
            }
        }
        CHMatrix::from_phases(n, phases)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(AFFINE_VALIDATION_SEED);
    let mut samples = vec![vec![0.0; arity]];
    while samples.len() < AFFINE_VALIDATION_SAMPLES {
        samples.push((0..arity).map(|_| rng.gen_range(0.0..TAU)).collect());
    }
    for params in &samples {
        let residual = build(params)?.gram_residual();
        if residual > tol.gram {
            return Err(Error::ValidationFailed {
                params: params.clone(),
                residual,
            });
        }
    }

    Ok(FamilyDescriptor {
        name: data.name.clone(),
        arity,
        domain: ParameterDomain {
            ranges: vec![(0.0, TAU); arity],
            excluded: vec![],
        },
        constructor: Box::new(build),
    })
}

/// The named reference matrices, in the order used for class matching.
pub fn named_catalogue() -> Vec<(&'static str, CHMatrix)> {
    vec![
        ("S6", tao_s6()),
        ("D6", dita_d6()),
        ("F6", fourier(6)),
        ("C6", bjorck_c6()),
        ("M6", m6_discrete()),
    ]
}
