//! Numerical classification of dephased symmetric order-6 matrices under
//! diagonal restrictions: multi-start damped Gauss-Newton on the phase torus,
//! followed by deduplication of converged solutions into equivalence classes.

use crate::catalogue::named_catalogue;
use crate::equivalence::{are_equivalent, lambda_equal, lambda_set, EquivalenceOptions, LambdaSet};
use crate::error::{Error, Result};
use crate::io::{matrix_to_phases_json, MatrixJson};
use crate::matrix::{CHMatrix, Tolerances};
use crate::unit::canon_phase;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

pub const ORDER: usize = 6;
const ROW_PAIRS: usize = ORDER * (ORDER - 1) / 2; // 15
pub const RESIDUAL_LEN: usize = 2 * ROW_PAIRS; // 30 real numbers

/// One diagonal slot of the ansatz: pinned to ±1 or a free phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagSlot {
    Plus,
    Minus,
    Free,
}

#[derive(Debug, Clone, Copy)]
enum EntrySpec {
    Fixed(f64),
    Param { index: usize, offset: f64 },
}

/// A dephased symmetric matrix shape: first row and column pinned to 1,
/// `h_{ij} = h_{ji}` by construction, diagonal slots per pattern, remaining
/// upper-triangle entries parameterized by free phases.
#[derive(Debug, Clone)]
pub struct SymmetricAnsatz {
    label: String,
    // upper triangle including the diagonal, rows/cols 1..=5, scan order
    // (1,1), (1,2), ..., (1,5), (2,2), ..., (5,5)
    specs: Vec<(usize, usize, EntrySpec)>,
    n_params: usize,
    // first defining slot of each parameter, for extraction
    param_slots: Vec<(usize, usize, f64)>,
}

impl SymmetricAnsatz {
    /// All off-diagonal entries free, diagonal per `pattern`. `pattern[0]`
    /// must be `Plus` (the matrix is dephased).
    pub fn from_diag_pattern(pattern: &[DiagSlot; ORDER]) -> Result<Self> {
        if pattern[0] != DiagSlot::Plus {
            return Err(Error::InvalidInput(
                "a dephased matrix has +1 in the leading diagonal slot".into(),
            ));
        }
        let mut specs = Vec::new();
        let mut param_slots = Vec::new();
        let mut params = 0;
        #[allow(clippy::needless_range_loop)]
        for i in 1..ORDER {
            for j in i..ORDER {
                let spec = if i == j {
                    match pattern[i] {
                        DiagSlot::Plus => EntrySpec::Fixed(0.0),
                        DiagSlot::Minus => EntrySpec::Fixed(PI),
                        DiagSlot::Free => {
                            param_slots.push((i, j, 0.0));
                            params += 1;
                            EntrySpec::Param {
                                index: params - 1,
                                offset: 0.0,
                            }
                        }
                    }
                } else {
                    param_slots.push((i, j, 0.0));
                    params += 1;
                    EntrySpec::Param {
                        index: params - 1,
                        offset: 0.0,
                    }
                };
                specs.push((i, j, spec));
            }
        }
        Ok(SymmetricAnsatz {
            label: pattern_label(pattern),
            specs,
            n_params: params,
            param_slots,
        })
    }

    /// Diagonal `(1, -1, 1, 1, free, free)` with the second row tied to a
    /// single phase: `(1, -1, x, x, -x, -x)`. Solutions of this shape are the
    /// discrete block matrix and its conjugate, up to equivalence.
    pub fn m6_second_row() -> Self {
        let mut specs = Vec::new();
        let mut param_slots = Vec::new();
        // parameter 0 is x
        param_slots.push((1, 2, 0.0));
        let mut params = 1;
        for i in 1..ORDER {
            for j in i..ORDER {
                let spec = if i == 1 {
                    match j {
                        1 => EntrySpec::Fixed(PI),
                        2 | 3 => EntrySpec::Param {
                            index: 0,
                            offset: 0.0,
                        },
                        _ => EntrySpec::Param {
                            index: 0,
                            offset: PI,
                        },
                    }
                } else if i == j && i < 4 {
                    EntrySpec::Fixed(0.0)
                } else {
                    param_slots.push((i, j, 0.0));
                    params += 1;
                    EntrySpec::Param {
                        index: params - 1,
                        offset: 0.0,
                    }
                };
                specs.push((i, j, spec));
            }
        }
        SymmetricAnsatz {
            label: "1,-1,1,1,free,free;second-row-tied".into(),
            specs,
            n_params: params,
            param_slots,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Build the matrix for a phase vector.
    pub fn realize(&self, theta: &[f64]) -> CHMatrix {
        assert_eq!(theta.len(), self.n_params, "phase vector length mismatch");
        let mut phases = vec![0.0; ORDER * ORDER];
        for &(i, j, spec) in &self.specs {
            let p = match spec {
                EntrySpec::Fixed(p) => p,
                EntrySpec::Param { index, offset } => theta[index] + offset,
            };
            phases[i * ORDER + j] = p;
            phases[j * ORDER + i] = p;
        }
        CHMatrix::from_phases(ORDER, phases).expect("square grid")
    }

    /// Recover the phase vector realizing `m`, when `m` fits the shape.
    pub fn parameters_from_matrix(&self, m: &CHMatrix) -> Vec<f64> {
        self.param_slots
            .iter()
            .map(|&(i, j, offset)| canon_phase(m.phase(i, j) - offset))
            .collect()
    }

    /// The 30 orthogonality defects: real and imaginary parts of
    /// `<r_i, r_j>` for `i < j`. Zero exactly when the matrix is Hadamard.
    pub fn residual(&self, theta: &[f64]) -> Vec<f64> {
        let h = self.realize(theta);
        let e = h.entries();
        let mut out = Vec::with_capacity(RESIDUAL_LEN);
        for i in 0..ORDER {
            for j in (i + 1)..ORDER {
                let mut ip = num_complex::Complex64::new(0.0, 0.0);
                for k in 0..ORDER {
                    ip += e[i * ORDER + k] * e[j * ORDER + k].conj();
                }
                out.push(ip.re);
                out.push(ip.im);
            }
        }
        out
    }

    /// Analytic Jacobian of [`Self::residual`], row-major `30 × n_params`.
    /// Entry derivatives are `i·e^{iθ}` times parameter incidence.
    pub fn jacobian(&self, theta: &[f64]) -> Vec<f64> {
        let h = self.realize(theta);
        let e = h.entries();
        // parameter index of each entry, or usize::MAX
        let mut dep = vec![usize::MAX; ORDER * ORDER];
        for &(i, j, spec) in &self.specs {
            if let EntrySpec::Param { index, .. } = spec {
                dep[i * ORDER + j] = index;
                dep[j * ORDER + i] = index;
            }
        }
        let m = self.n_params;
        let mut jac = vec![0.0; RESIDUAL_LEN * m];
        let mut row = 0;
        for i in 0..ORDER {
            for j in (i + 1)..ORDER {
                for k in 0..ORDER {
                    // d<r_i, r_j>/dθ_q = Σ_k i h_ik conj(h_jk) (dep_ik - dep_jk)
                    let term = num_complex::Complex64::i() * e[i * ORDER + k] * e[j * ORDER + k].conj();
                    let qi = dep[i * ORDER + k];
                    if qi != usize::MAX {
                        jac[row * m + qi] += term.re;
                        jac[(row + 1) * m + qi] += term.im;
                    }
                    let qj = dep[j * ORDER + k];
                    if qj != usize::MAX {
                        jac[row * m + qj] -= term.re;
                        jac[(row + 1) * m + qj] -= term.im;
                    }
                }
                row += 2;
            }
        }
        jac
    }
}

fn pattern_label(pattern: &[DiagSlot; ORDER]) -> String {
    pattern
        .iter()
        .map(|s| match s {
            DiagSlot::Plus => "1",
            DiagSlot::Minus => "-1",
            DiagSlot::Free => "free",
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Parse a comma-separated diagonal pattern: tokens `1`, `-1`, `free`.
pub fn parse_diag_pattern(s: &str) -> Result<[DiagSlot; ORDER]> {
    let tokens: Vec<&str> = s.split(',').map(str::trim).collect();
    if tokens.len() != ORDER {
        return Err(Error::InvalidInput(format!(
            "diagonal pattern needs {ORDER} slots, got {}",
            tokens.len()
        )));
    }
    let mut out = [DiagSlot::Plus; ORDER];
    for (k, t) in tokens.iter().enumerate() {
        out[k] = match *t {
            "1" | "+1" => DiagSlot::Plus,
            "-1" => DiagSlot::Minus,
            "free" => DiagSlot::Free,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown diagonal token '{other}'"
                )))
            }
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub seeds: usize,
    pub rng_seed: u64,
    /// Convergence threshold on the residual 2-norm.
    pub tol_solution: f64,
    pub max_iterations: usize,
    pub tolerances: Tolerances,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seeds: 2000,
            rng_seed: 42,
            tol_solution: 1e-9,
            max_iterations: 150,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergedSolution {
    pub phases: Vec<f64>,
    pub residual: f64,
    pub class: usize,
}

#[derive(Debug, Clone)]
pub struct SolutionClass {
    pub representative: CHMatrix,
    pub matched_catalogue: Option<String>,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct SolutionReport {
    pub pattern: String,
    pub seeds_run: usize,
    pub converged: usize,
    pub best_residual: f64,
    pub classes: Vec<SolutionClass>,
    pub solutions: Vec<ConvergedSolution>,
}

#[derive(Serialize)]
struct ClassJson {
    representative_matrix: MatrixJson,
    matched_catalogue_name: Option<String>,
    size: usize,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    pattern: &'a str,
    seeds_run: usize,
    converged: usize,
    best_residual: f64,
    classes: Vec<ClassJson>,
}

impl SolutionReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ReportJson {
            pattern: &self.pattern,
            seeds_run: self.seeds_run,
            converged: self.converged,
            best_residual: self.best_residual,
            classes: self
                .classes
                .iter()
                .map(|c| ClassJson {
                    representative_matrix: matrix_to_phases_json(&c.representative),
                    matched_catalogue_name: c.matched_catalogue.clone(),
                    size: c.size,
                })
                .collect(),
        })
        .expect("serializable")
    }
}

/// Damped Gauss-Newton from one starting point. Returns the final phase
/// vector, residual 2-norm and iteration count.
fn optimize(
    ansatz: &SymmetricAnsatz,
    mut theta: Vec<f64>,
    tol_solution: f64,
    max_iterations: usize,
) -> (Vec<f64>, f64) {
    let m = ansatz.n_params();
    let mut r = ansatz.residual(&theta);
    let mut cost = norm2(&r);
    let mut damping = 1e-3;
    let mut iterations = 0;
    while cost > tol_solution && iterations < max_iterations {
        iterations += 1;
        let jac = ansatz.jacobian(&theta);
        let (a, g) = normal_equations(&jac, &r, m);
        let mut accepted = false;
        for _ in 0..12 {
            let mut lhs = a.clone();
            for q in 0..m {
                lhs[q * m + q] += damping;
            }
            let mut step: Vec<f64> = g.iter().map(|v| -v).collect();
            if !solve_spd(&mut lhs, &mut step, m) {
                damping *= 10.0;
                continue;
            }
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
            let tr = ansatz.residual(&trial);
            let tc = norm2(&tr);
            if tc < cost {
                theta = trial;
                r = tr;
                cost = tc;
                damping = (damping / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            damping *= 10.0;
            if damping > 1e9 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    if cost <= tol_solution {
        // undamped polish steps sharpen converged points to machine precision
        for _ in 0..4 {
            let jac = ansatz.jacobian(&theta);
            let (a, g) = normal_equations(&jac, &r, m);
            let mut lhs = a;
            for q in 0..m {
                lhs[q * m + q] += 1e-14;
            }
            let mut step: Vec<f64> = g.iter().map(|v| -v).collect();
            if !solve_spd(&mut lhs, &mut step, m) {
                break;
            }
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
            let tr = ansatz.residual(&trial);
            let tc = norm2(&tr);
            if tc < cost {
                theta = trial;
                r = tr;
                cost = tc;
            } else {
                break;
            }
        }
    }
    (theta.into_iter().map(canon_phase).collect(), cost)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normal_equations(jac: &[f64], r: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let rows = r.len();
    let mut a = vec![0.0; m * m];
    let mut g = vec![0.0; m];
    for row in 0..rows {
        let jr = &jac[row * m..(row + 1) * m];
        for (q, &jq) in jr.iter().enumerate() {
            g[q] += jq * r[row];
            for (s, &js) in jr.iter().enumerate().skip(q) {
                a[q * m + s] += jq * js;
            }
        }
    }
    for q in 0..m {
        for s in 0..q {
            a[q * m + s] = a[s * m + q];
        }
    }
    (a, g)
}

/// In-place Cholesky solve of a symmetric positive definite system.
fn solve_spd(a: &mut [f64], b: &mut [f64], m: usize) -> bool {
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                a[i * m + i] = s.sqrt();
            } else {
                a[i * m + j] = s / a[j * m + j];
            }
        }
    }
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * m + k] * b[k];
        }
        b[i] = s / a[i * m + i];
    }
    for i in (0..m).rev() {
        let mut s = b[i];
        for k in (i + 1)..m {
            s -= a[k * m + i] * b[k];
        }
        b[i] = s / a[i * m + i];
    }
    true
}

/// Multi-start solve: random phase seeds, parallel optimization, then
/// deduplication of converged solutions by invariant-set filtering followed
/// by the exact equivalence search, and matching of class representatives
/// against the named catalogue. The report is independent of scheduling.
pub fn solve(ansatz: &SymmetricAnsatz, opts: &SolveOptions) -> SolutionReport {
    let m = ansatz.n_params();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let starts: Vec<Vec<f64>> = (0..opts.seeds)
        .map(|_| (0..m).map(|_| rng.gen_range(0.0..TAU)).collect())
        .collect();

    let results: Vec<(Vec<f64>, f64)> = starts
        .into_par_iter()
        .map(|theta0| optimize(ansatz, theta0, opts.tol_solution, opts.max_iterations))
        .collect();

    let best_residual = results
        .iter()
        .map(|(_, c)| *c)
        .fold(f64::INFINITY, f64::min);

    let mut converged: Vec<(Vec<f64>, f64)> = results
        .into_iter()
        .filter(|(_, c)| *c <= opts.tol_solution)
        .collect();
    // deterministic labeling order: by residual, then by phase vector
    converged.sort_by(|x, y| {
        x.1.partial_cmp(&y.1)
            .unwrap()
            .then_with(|| x.0.partial_cmp(&y.0).unwrap())
    });

    let tol = &opts.tolerances;
    let equiv_opts = EquivalenceOptions::default();
    let mut classes: Vec<(CHMatrix, LambdaSet, usize)> = Vec::new();
    let mut solutions = Vec::with_capacity(converged.len());
    for (phases, residual) in converged {
        let matrix = ansatz.realize(&phases);
        let lambda = lambda_set(&matrix, tol);
        let mut assigned = None;
        for (idx, (rep, rep_lambda, size)) in classes.iter_mut().enumerate() {
            if !lambda_equal(rep_lambda, &lambda, tol) {
                continue;
            }
            let same = matrix.max_entry_distance(rep) <= tol.equiv
                || are_equivalent(rep, &matrix, tol, &equiv_opts)
                    .expect("order 6 search")
                    .is_some();
            if same {
                *size += 1;
                assigned = Some(idx);
                break;
            }
        }
        let class = match assigned {
            Some(idx) => idx,
            None => {
                classes.push((matrix.clone(), lambda, 1));
                classes.len() - 1
            }
        };
        solutions.push(ConvergedSolution {
            phases,
            residual,
            class,
        });
    }

    let catalogue = named_catalogue();
    let classes: Vec<SolutionClass> = classes
        .into_iter()
        .map(|(rep, _, size)| {
            let matched = catalogue
                .iter()
                .find(|(_, cm)| {
                    are_equivalent(cm, &rep, tol, &equiv_opts)
                        .expect("order 6 search")
                        .is_some()
                })
                .map(|(name, _)| name.to_string());
            SolutionClass {
                representative: rep,
                matched_catalogue: matched,
                size,
            }
        })
        .collect();

    SolutionReport {
        pattern: ansatz.label().to_string(),
        seeds_run: opts.seeds,
        converged: solutions.len(),
        best_residual,
        classes,
        solutions,
    }
}

/// Aggregated classification over the real-diagonal patterns: the two
/// canonical shapes `(1,1,1,1,·,·)` and `(1,-1,-1,-1,·,·)` plus
/// `(1,-1,1,1,·,·)` and `(1,-1,-1,1,·,·)`, each with all four ±1 subcases of
/// the last two slots.
pub fn classify_real_diagonal(seeds_per_pattern: usize, rng_seed: u64, tol: &Tolerances) -> ClassifyReport {
    use DiagSlot::{Minus as M, Plus as P};
    let bases = [[P, P, P, P], [P, M, M, M], [P, M, P, P], [P, M, M, P]];
    let subcases = [[P, P], [P, M], [M, P], [M, M]];
    let mut runs = Vec::new();
    let mut run_index = 0u64;
    for base in &bases {
        for sub in &subcases {
            let pattern = [base[0], base[1], base[2], base[3], sub[0], sub[1]];
            let ansatz = SymmetricAnsatz::from_diag_pattern(&pattern).expect("leading slot is +1");
            let opts = SolveOptions {
                seeds: seeds_per_pattern,
                rng_seed: rng_seed ^ run_index.wrapping_mul(0x9E37_79B9_7F4A_7C15),
                tolerances: *tol,
                ..SolveOptions::default()
            };
            runs.push(solve(&ansatz, &opts));
            run_index += 1;
        }
    }
    ClassifyReport { runs }
}

#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub runs: Vec<SolutionReport>,
}

impl ClassifyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "runs": self.runs.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}
