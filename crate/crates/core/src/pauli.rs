//! Pauli matrices and Pauli-string sums.
//!
//! Operators can be written as text, e.g. `"0.785398 * ZZ"` or
//! `"1.2*XI - 0.3 * IZ + ZZ"`. The leftmost letter acts on the first
//! (outermost) tensor factor.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, I, ONE, ZERO};

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
}

pub fn pauli(letter: char) -> Result<ComplexMatrix> {
    match letter.to_ascii_uppercase() {
        'I' => Ok(identity2()),
        'X' => Ok(sigma_x()),
        'Y' => Ok(sigma_y()),
        'Z' => Ok(sigma_z()),
        other => Err(Error::Parse(format!("unknown Pauli letter '{other}'"))),
    }
}

/// Tensor product of single-qubit Paulis, e.g. `"XIZ"`.
pub fn pauli_string(word: &str) -> Result<ComplexMatrix> {
    let mut letters = word.chars();
    let first = letters
        .next()
        .ok_or_else(|| Error::Parse("empty Pauli string".into()))?;
    letters.try_fold(pauli(first)?, |acc, ch| Ok(acc.kron(&pauli(ch)?)))
}

/// Single-qubit Pauli `letter` acting on qubit `q` of an `n`-qubit register.
pub fn single_site(letter: char, q: usize, n: usize) -> Result<ComplexMatrix> {
    if q >= n {
        return Err(Error::Dimension(format!("qubit {q} out of range for {n} qubits")));
    }
    let word: String = (0..n).map(|k| if k == q { letter } else { 'I' }).collect();
    pauli_string(&word)
}

/// Parses a real-weighted sum of Pauli strings.
///
/// Terms are `[coeff *] WORD` separated by `+` or `-`. All words must have
/// the same length.
pub fn parse_pauli_sum(expr: &str) -> Result<ComplexMatrix> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty operator expression".into()));
    }

    // Split into signed terms, keeping exponent signs ("1e-3") attached.
    let mut terms: Vec<(f64, String)> = Vec::new();
    let mut current = String::new();
    let mut sign = 1.0;
    let bytes: Vec<char> = compact.chars().collect();
    for (idx, &ch) in bytes.iter().enumerate() {
        let in_exponent = idx > 0 && matches!(bytes[idx - 1], 'e' | 'E') && {
            let before = &bytes[..idx - 1];
            before.last().is_some_and(|c| c.is_ascii_digit() || *c == '.')
        };
        if (ch == '+' || ch == '-') && !in_exponent {
            if !current.is_empty() {
                terms.push((sign, std::mem::take(&mut current)));
            }
            sign = if ch == '-' { -1.0 } else { 1.0 };
        } else {
            current.push(ch);
        }
    }
    if current.is_empty() {
        return Err(Error::Parse(format!("dangling operator in '{expr}'")));
    }
    terms.push((sign, current));

    let mut total: Option<ComplexMatrix> = None;
    for (sign, term) in terms {
        let (coeff, word) = match term.split_once('*') {
            Some((c, w)) => {
                let value: f64 = c
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient '{c}' in '{expr}'")))?;
                (value, w)
            }
            None => (1.0, term.as_str()),
        };
        if !coeff.is_finite() {
            return Err(Error::Parse(format!("non-finite coefficient in '{expr}'")));
        }
        let op = pauli_string(word)?.scale(C64::new(sign * coeff, 0.0));
        total = Some(match total {
            None => op,
            Some(acc) => acc
                .try_add(&op)
                .map_err(|_| Error::Parse(format!("mixed Pauli-string lengths in '{expr}'")))?,
        });
    }
    Ok(total.expect("at least one term"))
}

/// Bloch coordinates `(Tr ρσ_x, Tr ρσ_y, Tr ρσ_z)` of a 2×2 operator.
pub fn bloch_vector(rho: &ComplexMatrix) -> Result<[f64; 3]> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::Dimension("Bloch vector needs a 2x2 matrix".into()));
    }
    let t = |p: ComplexMatrix| (&p * rho).trace().re;
    Ok([t(sigma_x()), t(sigma_y()), t(sigma_z())])
}
