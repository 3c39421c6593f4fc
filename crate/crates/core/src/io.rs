//! JSON interchange for matrices.
//!
//! Two on-disk forms are accepted: rectangular entries
//! `{"n": 6, "entries": [[{"re": .., "im": ..}, ..], ..]}` and the phase form
//! `{"n": 6, "phases_turns": [[t, ..], ..]}` with phases in turns
//! (1 turn = 2π). Writers emit the phase form by default; it is exact for
//! catalogue matrices whose phases are rational turns.

use crate::error::{Error, Result};
use crate::matrix::{gram_residual_entries, CHMatrix, Tolerances};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Phases {
        n: usize,
        phases_turns: Vec<Vec<f64>>,
    },
    Rect {
        n: usize,
        entries: Vec<Vec<ComplexJson>>,
    },
}

fn check_grid<T>(n: usize, grid: &[Vec<T>]) -> Result<()> {
    if n == 0 || grid.len() != n || grid.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "expected an {n}×{n} grid"
        )));
    }
    Ok(())
}

/// A rectangular complex matrix as read from disk, before unimodularity is
/// enforced. Lets `verify` report on inputs that are not unimodular at all.
#[derive(Debug, Clone)]
pub struct RawMatrix {
    pub n: usize,
    pub entries: Vec<Complex64>,
}

impl RawMatrix {
    pub fn gram_residual(&self) -> f64 {
        gram_residual_entries(self.n, &self.entries)
    }

    pub fn max_unimodularity_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Convert to the phase representation, rejecting entries that are not
    /// unimodular within `tol.entry`.
    pub fn to_matrix(&self, tol: &Tolerances) -> Result<CHMatrix> {
        let mut phases = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let z = self.entries[i * self.n + j];
                let m = z.norm();
                if m < tol.entry {
                    return Err(Error::ZeroEntry {
                        row: i,
                        col: j,
                        modulus: m,
                    });
                }
                if (m - 1.0).abs() > tol.entry {
                    return Err(Error::NonUnimodular {
                        row: i,
                        col: j,
                        modulus: m,
                        tol: tol.entry,
                    });
                }
                phases.push(z.arg());
            }
        }
        CHMatrix::from_phases(self.n, phases)
    }
}

pub fn raw_from_json(json: &MatrixJson) -> Result<RawMatrix> {
    match json {
        MatrixJson::Rect { n, entries } => {
            check_grid(*n, entries)?;
            Ok(RawMatrix {
                n: *n,
                entries: entries
                    .iter()
                    .flatten()
                    .map(|c| Complex64::new(c.re, c.im))
                    .collect(),
            })
        }
        MatrixJson::Phases { n, phases_turns } => {
            check_grid(*n, phases_turns)?;
            let m = CHMatrix::from_turns(*n, &phases_turns.concat())?;
            Ok(RawMatrix {
                n: *n,
                entries: m.entries(),
            })
        }
    }
}

pub fn raw_from_str(s: &str) -> Result<RawMatrix> {
    let json: MatrixJson = serde_json::from_str(s)?;
    raw_from_json(&json)
}

pub fn matrix_from_json(json: &MatrixJson, tol: &Tolerances) -> Result<CHMatrix> {
    match json {
        MatrixJson::Phases { n, phases_turns } => {
            check_grid(*n, phases_turns)?;
            CHMatrix::from_turns(*n, &phases_turns.concat())
        }
        MatrixJson::Rect { .. } => raw_from_json(json)?.to_matrix(tol),
    }
}

pub fn matrix_from_str(s: &str, tol: &Tolerances) -> Result<CHMatrix> {
    let json: MatrixJson = serde_json::from_str(s)?;
    matrix_from_json(&json, tol)
}

pub fn matrix_to_phases_json(m: &CHMatrix) -> MatrixJson {
    let n = m.n();
    let turns = m.turns();
    MatrixJson::Phases {
        n,
        phases_turns: (0..n).map(|i| turns[i * n..(i + 1) * n].to_vec()).collect(),
    }
}

pub fn matrix_to_rect_json(m: &CHMatrix) -> MatrixJson {
    let n = m.n();
    let entries = m.entries();
    MatrixJson::Rect {
        n,
        entries: (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = entries[i * n + j];
                        ComplexJson { re: z.re, im: z.im }
                    })
                    .collect()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;

    #[test]
    fn both_forms_round_trip() {
        let tol = Tolerances::default();
        let s6 = catalogue::tao_s6();
        let ph = serde_json::to_string(&matrix_to_phases_json(&s6)).unwrap();
        let rc = serde_json::to_string(&matrix_to_rect_json(&s6)).unwrap();
        let from_ph = matrix_from_str(&ph, &tol).unwrap();
        let from_rc = matrix_from_str(&rc, &tol).unwrap();
        assert!(from_ph.max_entry_distance(&s6) < 1e-12);
        assert!(from_rc.max_entry_distance(&s6) < 1e-12);
    }

    #[test]
    fn rect_rejects_zero_and_non_unimodular() {
        let tol = Tolerances::default();
        let mut entries = [ComplexJson { re: 1.0, im: 0.0 }; 4];
        entries[3] = ComplexJson { re: 0.0, im: 0.0 };
        let json = MatrixJson::Rect {
            n: 2,
            entries: vec![entries[0..2].to_vec(), entries[2..4].to_vec()],
        };
        assert!(matches!(
            matrix_from_json(&json, &tol),
            Err(Error::ZeroEntry { row: 1, col: 1, .. })
        ));
        let json = MatrixJson::Rect {
            n: 2,
            entries: vec![
                vec![ComplexJson { re: 1.0, im: 0.0 }, ComplexJson { re: 2.0, im: 0.0 }],
                vec![ComplexJson { re: 1.0, im: 0.0 }, ComplexJson { re: 1.0, im: 0.0 }],
            ],
        };
        assert!(matches!(
            matrix_from_json(&json, &tol),
            Err(Error::NonUnimodular { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn malformed_grid_is_rejected() {
        let json = MatrixJson::Phases {
            n: 3,
            phases_turns: vec![vec![0.0; 3], vec![0.0; 2], vec![0.0; 3]],
        };
        assert!(matches!(
            matrix_from_json(&json, &Tolerances::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
