//! Sparse binary parity-check matrices, the alist file format and a few
//! built-in codes.
//!
//! Column indices are 0-based in memory and 1-based in alist files.

use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("matrix has no rows")]
    NoRows,
    #[error("matrix has no columns")]
    NoColumns,
    #[error("row {row} has length {len}, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("row {0} is all-zero")]
    EmptyRow(usize),
    #[error("entry ({row}, {col}) is {value}, expected 0 or 1")]
    NonBinary { row: usize, col: usize, value: u8 },
    #[error("row {row} references column {col}, but n = {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("row {row} lists column {col} more than once")]
    DuplicateIndex { row: usize, col: usize },
    #[error("alist: unexpected end of input while reading {0}")]
    Truncated(&'static str),
    #[error("alist: cannot parse token {token:?} as an integer")]
    BadToken { token: String },
    #[error("alist: {0}")]
    Inconsistent(String),
    #[error("unknown built-in code {0:?}")]
    UnknownCode(String),
    #[error("cannot draw a row of degree {degree} from {n} columns")]
    DegreeTooLarge { degree: usize, n: usize },
}

/// Binary m×n matrix stored as one sorted support set per row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
}

/// Row and column weights of a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    pub check_degrees: Vec<usize>,
    pub variable_degrees: Vec<usize>,
}

impl DegreeProfile {
    pub fn max_check_degree(&self) -> usize {
        self.check_degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn max_variable_degree(&self) -> usize {
        self.variable_degrees.iter().copied().max().unwrap_or(0)
    }
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-row supports. Each support is sorted; duplicates
    /// are rejected rather than cancelled.
    pub fn from_supports(n: usize, rows: Vec<Vec<usize>>) -> Result<Self, CodeError> {
        if n == 0 {
            return Err(CodeError::NoColumns);
        }
        if rows.is_empty() {
            return Err(CodeError::NoRows);
        }
        let mut sorted = Vec::with_capacity(rows.len());
        for (j, mut row) in rows.into_iter().enumerate() {
            if row.is_empty() {
                return Err(CodeError::EmptyRow(j));
            }
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(CodeError::DuplicateIndex { row: j, col: w[0] });
                }
            }
            if let Some(&col) = row.last().filter(|&&c| c >= n) {
                return Err(CodeError::IndexOutOfRange { row: j, col, n });
            }
            sorted.push(row);
        }
        Ok(Self { n, rows: sorted })
    }

    pub fn from_dense<R: AsRef<[u8]>>(dense: &[R]) -> Result<Self, CodeError> {
        let first = dense.first().ok_or(CodeError::NoRows)?;
        let n = first.as_ref().len();
        if n == 0 {
            return Err(CodeError::NoColumns);
        }
        let mut rows = Vec::with_capacity(dense.len());
        for (j, row) in dense.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(CodeError::RaggedRow { row: j, len: row.len(), expected: n });
            }
            let mut support = Vec::new();
            for (i, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => support.push(i),
                    value => return Err(CodeError::NonBinary { row: j, col: i, value }),
                }
            }
            if support.is_empty() {
                return Err(CodeError::EmptyRow(j));
            }
            rows.push(support);
        }
        Ok(Self { n, rows })
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; self.n];
                for &i in row {
                    dense[i] = 1;
                }
                dense
            })
            .collect()
    }

    /// Number of columns (variable nodes).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rows (check nodes).
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[usize] {
        &self.rows[j]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Check indices adjacent to each column.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n];
        for (j, row) in self.rows.iter().enumerate() {
            for &i in row {
                cols[i].push(j);
            }
        }
        cols
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let mut variable_degrees = vec![0; self.n];
        for row in &self.rows {
            for &i in row {
                variable_degrees[i] += 1;
            }
        }
        DegreeProfile {
            check_degrees: self.rows.iter().map(Vec::len).collect(),
            variable_degrees,
        }
    }

    /// H·x over GF(2), one bit per check. Nonzero entries of `x` count as 1.
    pub fn syndrome(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.n, "word length must equal n");
        self.rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &i| acc ^ (x[i] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, x: &[u8]) -> bool {
        x.len() == self.n && self.syndrome(x).iter().all(|&s| s == 0)
    }

    /// Random matrix whose row degrees are drawn uniformly from `degrees`
    /// (inclusive) and whose supports are uniform subsets of the columns.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        m: usize,
        degrees: std::ops::RangeInclusive<usize>,
        rng: &mut R,
    ) -> Result<Self, CodeError> {
        let max = *degrees.end();
        if max > n {
            return Err(CodeError::DegreeTooLarge { degree: max, n });
        }
        let rows = (0..m)
            .map(|_| {
                let d = rng.random_range(degrees.clone());
                index::sample(rng, n, d).into_vec()
            })
            .collect();
        Self::from_supports(n, rows)
    }

    pub fn parse_alist(text: &str) -> Result<Self, CodeError> {
        parse_alist(text)
    }

    pub fn write_alist(&self) -> String {
        write_alist(self)
    }
}

struct Tokens<'a> {
    inner: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn next_usize(&mut self, what: &'static str) -> Result<usize, CodeError> {
        let tok = self.inner.next().ok_or(CodeError::Truncated(what))?;
        tok.parse()
            .map_err(|_| CodeError::BadToken { token: tok.to_string() })
    }

    /// Next nonzero entry, skipping padding zeros.
    fn next_index(&mut self, what: &'static str) -> Result<usize, CodeError> {
        loop {
            let v = self.next_usize(what)?;
            if v != 0 {
                return Ok(v);
            }
        }
    }
}

/// Reads a matrix in alist format. Padding zeros anywhere in the adjacency
/// lists are ignored; the two adjacency halves must describe the same matrix.
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix, CodeError> {
    let mut t = Tokens { inner: text.split_ascii_whitespace() };
    let n = t.next_usize("dimensions")?;
    let m = t.next_usize("dimensions")?;
    if n == 0 {
        return Err(CodeError::NoColumns);
    }
    if m == 0 {
        return Err(CodeError::NoRows);
    }
    let max_var = t.next_usize("maximum degrees")?;
    let max_check = t.next_usize("maximum degrees")?;
    let var_deg = (0..n)
        .map(|_| t.next_usize("variable degrees"))
        .collect::<Result<Vec<_>, _>>()?;
    let check_deg = (0..m)
        .map(|_| t.next_usize("check degrees"))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(i) = var_deg.iter().position(|&d| d > max_var) {
        return Err(CodeError::Inconsistent(format!(
            "variable {} has degree {} above declared maximum {max_var}",
            i + 1,
            var_deg[i]
        )));
    }
    if let Some(j) = check_deg.iter().position(|&d| d > max_check) {
        return Err(CodeError::Inconsistent(format!(
            "check {} has degree {} above declared maximum {max_check}",
            j + 1,
            check_deg[j]
        )));
    }

    let mut var_adj = Vec::with_capacity(n);
    for (i, &d) in var_deg.iter().enumerate() {
        let mut checks = Vec::with_capacity(d);
        for _ in 0..d {
            let c = t.next_index("variable adjacency")?;
            if c > m {
                return Err(CodeError::Inconsistent(format!(
                    "variable {} references check {c}, but m = {m}",
                    i + 1
                )));
            }
            checks.push(c - 1);
        }
        var_adj.push(checks);
    }

    let mut rows = Vec::with_capacity(m);
    for (j, &d) in check_deg.iter().enumerate() {
        let mut support = Vec::with_capacity(d);
        for _ in 0..d {
            let v = t.next_index("check adjacency")?;
            if v > n {
                return Err(CodeError::IndexOutOfRange { row: j, col: v - 1, n });
            }
            support.push(v - 1);
        }
        rows.push(support);
    }
    if let Some(tok) = t.inner.find(|tok| tok.parse::<usize>() != Ok(0)) {
        return Err(CodeError::Inconsistent(format!("trailing data starting at {tok:?}")));
    }

    let h = ParityCheckMatrix::from_supports(n, rows)?;
    let cols = h.columns();
    for (i, mut checks) in var_adj.into_iter().enumerate() {
        checks.sort_unstable();
        if checks != cols[i] {
            return Err(CodeError::Inconsistent(format!(
                "adjacency of variable {} disagrees between variable and check lists",
                i + 1
            )));
        }
    }
    Ok(h)
}

/// Writes the alist form of `h`. Lists are unpadded except that an isolated
/// column is written as a single `0`.
pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let profile = h.degree_profile();
    let cols = h.columns();
    let mut out = String::new();
    let join = |xs: &mut dyn Iterator<Item = usize>| {
        xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    writeln!(out, "{} {}", h.n(), h.m()).unwrap();
    writeln!(out, "{} {}", profile.max_variable_degree(), profile.max_check_degree()).unwrap();
    writeln!(out, "{}", join(&mut profile.variable_degrees.iter().copied())).unwrap();
    writeln!(out, "{}", join(&mut profile.check_degrees.iter().copied())).unwrap();
    for col in &cols {
        if col.is_empty() {
            out.push_str("0\n");
        } else {
            writeln!(out, "{}", join(&mut col.iter().map(|j| j + 1))).unwrap();
        }
    }
    for row in h.rows() {
        writeln!(out, "{}", join(&mut row.iter().map(|i| i + 1))).unwrap();
    }
    out
}

/// Names accepted by [`builtin_code`].
pub const BUILTIN_CODES: &[&str] = &["paper-example", "hamming-7-4", "ldpc-3-6-n12", "ldpc-3-6-n48"];

/// Built-in test codes.
///
/// * `paper-example`: the 2×4 matrix `[[1,1,1,0],[0,1,1,1]]`.
/// * `hamming-7-4`: the (7,4) Hamming code.
/// * `ldpc-3-6-n12`, `ldpc-3-6-n48`: quasi-cyclic (3,6)-regular codes built
///   from 3×6 blocks of circulant permutation matrices.
pub fn builtin_code(name: &str) -> Result<ParityCheckMatrix, CodeError> {
    let h = match name {
        "paper-example" => ParityCheckMatrix::from_dense(&[[1, 1, 1, 0], [0, 1, 1, 1]]),
        "hamming-7-4" => ParityCheckMatrix::from_dense(&[
            [1, 0, 1, 0, 1, 0, 1],
            [0, 1, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ]),
        "ldpc-3-6-n12" => Ok(quasi_cyclic_3_6(2, &[[0, 0, 0, 0, 0, 0], [0, 1, 0, 1, 0, 1], [1, 0, 1, 1, 0, 0]])),
        "ldpc-3-6-n48" => Ok(quasi_cyclic_3_6(8, &[[0, 0, 0, 0, 0, 0], [0, 1, 2, 3, 5, 7], [0, 3, 6, 1, 7, 4]])),
        other => return Err(CodeError::UnknownCode(other.to_string())),
    };
    Ok(h.expect("built-in codes are valid"))
}

fn quasi_cyclic_3_6(z: usize, shifts: &[[usize; 6]; 3]) -> ParityCheckMatrix {
    let mut rows = Vec::with_capacity(3 * z);
    for block_row in shifts {
        for r in 0..z {
            let row = block_row
                .iter()
                .enumerate()
                .map(|(b, &s)| b * z + (r + s) % z)
                .collect();
            rows.push(row);
        }
    }
    ParityCheckMatrix::from_supports(6 * z, rows).expect("circulant blocks are valid")
}
