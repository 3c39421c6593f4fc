//! Two-entry row completion and the Haagerup product reality test.
//!
//! In a dephased Hadamard matrix every row past the first sums to zero. Given
//! four entries of a six-entry row, the remaining two unimodular entries are
//! pinned by `x5 + x6 = -2Σ` with `Σ = (x1+x2+x3+x4)/2`, except in the
//! degenerate case `Σ = 0` where the pair is any `(w, -w)`.

use crate::error::{Error, Result};
use crate::matrix::Tolerances;
use crate::unit::UnitComplex;
use num_complex::Complex64;

/// The two determined values, or the degenerate one-parameter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompletionPair {
    /// `(plus, minus)`: the `+` square-root branch first.
    Determined(UnitComplex, UnitComplex),
    /// `Σ = 0`: any pair `(w, -w)` completes the row.
    Degenerate,
}

#[derive(Debug, Clone, Copy)]
pub struct RowCompletion {
    pub sigma: Complex64,
    pub pair: CompletionPair,
}

/// Complete a row of six unimodular entries from its first four.
///
/// For `0 < |Σ| <= 1` the two completions are
/// `-Σ ± i (Σ/|Σ|) sqrt(1 - |Σ|²)`, returned `+` branch first. `|Σ|` within
/// `tol.entry` of zero is treated as degenerate, and `|Σ|` slightly above 1
/// from rounding is clamped before the square root.
pub fn complete_row(inputs: [UnitComplex; 4], tol: &Tolerances) -> Result<RowCompletion> {
    let sigma = inputs.iter().map(|u| u.value()).sum::<Complex64>() / 2.0;
    let r = sigma.norm();
    if r <= tol.entry {
        return Ok(RowCompletion {
            sigma,
            pair: CompletionPair::Degenerate,
        });
    }
    if r > 1.0 + tol.entry {
        return Err(Error::NoCompletion { sigma_abs: r });
    }
    let root = (1.0 - (r.min(1.0)).powi(2)).max(0.0).sqrt();
    let dir = sigma / r;
    let plus = -sigma + Complex64::i() * dir * root;
    let minus = -sigma - Complex64::i() * dir * root;
    Ok(RowCompletion {
        sigma,
        pair: CompletionPair::Determined(
            UnitComplex::from_complex(plus),
            UnitComplex::from_complex(minus),
        ),
    })
}

/// `(u+v)(s̄+t̄)(ūs+v̄t)` — real for any four unimodular inputs.
pub fn haagerup_product(u: UnitComplex, v: UnitComplex, s: UnitComplex, t: UnitComplex) -> Complex64 {
    let (u, v, s, t) = (u.value(), v.value(), s.value(), t.value());
    (u + v) * (s.conj() + t.conj()) * (u.conj() * s + v.conj() * t)
}
