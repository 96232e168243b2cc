//! Dense GF(2) linear algebra over packed 64-bit words: rank, nullspace and
//! codeword enumeration.

use crate::codes::ParityCheckMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }
}

/// Reduced row echelon form of `h`, returned as (rows, pivot columns).
fn rref(h: &ParityCheckMatrix) -> (Vec<BitVec>, Vec<usize>) {
    let n = h.n();
    let mut rows: Vec<BitVec> = h
        .rows()
        .iter()
        .map(|support| {
            let mut v = BitVec::zeros(n);
            for &i in support {
                v.set(i, true);
            }
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(h: &ParityCheckMatrix) -> usize {
    rref(h).1.len()
}

/// Basis of {x : H·x = 0}, one vector per free column in increasing order.
pub fn nullspace_basis(h: &ParityCheckMatrix) -> Vec<BitVec> {
    let n = h.n();
    let (rows, pivots) = rref(h);
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..n)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = BitVec::zeros(n);
            v.set(free, true);
            for (row, &p) in rows.iter().zip(&pivots) {
                if row.get(free) {
                    v.set(p, true);
                }
            }
            v
        })
        .collect()
}

/// Calls `visit` once for every codeword of `h`, walking the nullspace in Gray
/// code order so that consecutive codewords differ by one basis vector.
pub fn for_each_codeword(h: &ParityCheckMatrix, mut visit: impl FnMut(&BitVec)) {
    let basis = nullspace_basis(h);
    let k = basis.len();
    assert!(k < 64, "nullspace dimension {k} too large to enumerate");
    let mut word = BitVec::zeros(h.n());
    visit(&word);
    for step in 1u64..(1u64 << k) {
        word.xor_assign(&basis[step.trailing_zeros() as usize]);
        visit(&word);
    }
}

/// All codewords of `h`, sorted lexicographically.
pub fn codewords(h: &ParityCheckMatrix) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for_each_codeword(h, |w| out.push(w.to_bytes()));
    out.sort();
    out
}
