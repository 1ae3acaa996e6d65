//! Packed GF(2) vectors, prime fields, and dense matrices over either.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0} is not an odd prime below 2^62")]
    InvalidModulus(u64),
    #[error("matrix is {rows}x{cols}, not square")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("field mismatch")]
    FieldMismatch,
    #[error("entry {value} out of range for field of order {order}")]
    EntryOutOfRange { value: u64, order: u64 },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Fixed-length vector over {0,1}, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Bit `i` of the result is bit `i` of `value`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len >= 64 {
                u64::MAX
            } else {
                (1u64 << len) - 1
            };
            v.words[0] = value & mask;
        }
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(wi * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector, GfError> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<(), GfError> {
        if self.len != other.len {
            return Err(GfError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        xor_words(&mut self.words, &other.words);
        Ok(())
    }

    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize, GfError> {
        if self.len != other.len {
            return Err(GfError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn to_elements(&self) -> Vec<u64> {
        (0..self.len).map(|i| u64::from(self.get(i))).collect()
    }

    pub fn from_elements(elems: &[u64]) -> Self {
        let mut v = Self::zeros(elems.len());
        for (i, &e) in elems.iter().enumerate() {
            if e & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }
}

pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a ^= b;
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl std::str::FromStr for BitVector {
    type Err = GfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(GfError::Parse(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitVector::from_bits(&bits))
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; these bases are exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// GF(q) for an odd prime `q < 2^62`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self, GfError> {
        if !(3..1 << 62).contains(&q) || !is_prime(q) {
            return Err(GfError::InvalidModulus(q));
        }
        Ok(PrimeField { q })
    }

    pub fn modulus(self) -> u64 {
        self.q
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.q)
    }

    pub fn pow(self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.q)
    }

    pub fn inv(self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.q) {
            None
        } else {
            Some(self.pow(a, self.q - 2))
        }
    }

    pub fn reduce(self, a: u64) -> u64 {
        a % self.q
    }
}

/// The coefficient field: GF(2) or an odd prime field. Elements are `u64`
/// residues in `[0, order)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Gf2,
    Prime(PrimeField),
}

impl Field {
    /// GF(2) for `q = 2`, otherwise the prime field of order `q`.
    pub fn from_order(q: u64) -> Result<Self, GfError> {
        if q == 2 {
            Ok(Field::Gf2)
        } else {
            PrimeField::new(q).map(Field::Prime)
        }
    }

    pub fn order(self) -> u64 {
        match self {
            Field::Gf2 => 2,
            Field::Prime(p) => p.q,
        }
    }

    pub fn is_gf2(self) -> bool {
        matches!(self, Field::Gf2)
    }

    pub fn contains(self, a: u64) -> bool {
        a < self.order()
    }

    pub fn reduce(self, a: u64) -> u64 {
        a % self.order()
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        match self {
            Field::Gf2 => a ^ b,
            Field::Prime(p) => p.add(a, b),
        }
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        match self {
            Field::Gf2 => a ^ b,
            Field::Prime(p) => p.sub(a, b),
        }
    }

    pub fn neg(self, a: u64) -> u64 {
        match self {
            Field::Gf2 => a,
            Field::Prime(p) => p.neg(a),
        }
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        match self {
            Field::Gf2 => a & b,
            Field::Prime(p) => p.mul(a, b),
        }
    }

    pub fn inv(self, a: u64) -> Option<u64> {
        match self {
            Field::Gf2 => (a == 1).then_some(1),
            Field::Prime(p) => p.inv(a),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Gf2 => write!(f, "GF(2)"),
            Field::Prime(p) => write!(f, "GF({})", p.q),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FieldRepr {
    Name(String),
    Prime { prime: u64 },
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Field::Gf2 => FieldRepr::Name("gf2".into()),
            Field::Prime(p) => FieldRepr::Prime { prime: p.q },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match FieldRepr::deserialize(d)? {
            FieldRepr::Name(name) if name == "gf2" => Ok(Field::Gf2),
            FieldRepr::Name(name) => {
                Err(serde::de::Error::custom(format!("unknown field {name:?}")))
            }
            FieldRepr::Prime { prime } => PrimeField::new(prime)
                .map(Field::Prime)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// Dense row-major matrix over a tagged field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<u64>>) -> Result<Self, GfError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(GfError::DimensionMismatch(
                "matrix dimensions must be positive".into(),
            ));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(GfError::DimensionMismatch("ragged rows".into()));
            }
            for v in row {
                if !field.contains(v) {
                    return Err(GfError::EntryOutOfRange {
                        value: v,
                        order: field.order(),
                    });
                }
                data.push(v);
            }
        }
        Ok(Matrix {
            field,
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        debug_assert!(self.field.contains(v));
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, GfError> {
        if self.field != rhs.field {
            return Err(GfError::FieldMismatch);
        }
        if self.cols != rhs.rows {
            return Err(GfError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, f.add(cur, f.mul(a, rhs.get(k, j))));
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, x: &[u64]) -> Result<Vec<u64>, GfError> {
        if x.len() != self.rows {
            return Err(GfError::LengthMismatch {
                left: x.len(),
                right: self.rows,
            });
        }
        let f = self.field;
        let mut out = vec![0u64; self.cols];
        for (i, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = f.add(*o, f.mul(a, self.get(i, j)));
            }
        }
        Ok(out)
    }

    fn packed_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|i| BitVector::from_elements(self.row(i)).words)
            .collect()
    }

    pub fn det(&self) -> Result<u64, GfError> {
        if self.rows != self.cols {
            return Err(GfError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        match self.field {
            Field::Gf2 => {
                let mut rows = self.packed_rows();
                for col in 0..n {
                    let (w, b) = (col / 64, col % 64);
                    let Some(p) = (col..n).find(|&r| (rows[r][w] >> b) & 1 == 1) else {
                        return Ok(0);
                    };
                    rows.swap(col, p);
                    let pivot = rows[col].clone();
                    for row in rows.iter_mut().skip(col + 1) {
                        if (row[w] >> b) & 1 == 1 {
                            xor_words(row, &pivot);
                        }
                    }
                }
                Ok(1)
            }
            Field::Prime(f) => {
                let mut a = self.data.clone();
                let mut det = 1u64;
                for col in 0..n {
                    let Some(p) = (col..n).find(|&r| a[r * n + col] != 0) else {
                        return Ok(0);
                    };
                    if p != col {
                        for j in 0..n {
                            a.swap(col * n + j, p * n + j);
                        }
                        det = f.neg(det);
                    }
                    let pv = a[col * n + col];
                    det = f.mul(det, pv);
                    let inv = f.inv(pv).expect("nonzero pivot");
                    for r in col + 1..n {
                        let factor = f.mul(a[r * n + col], inv);
                        if factor == 0 {
                            continue;
                        }
                        for j in col..n {
                            let t = f.mul(factor, a[col * n + j]);
                            a[r * n + j] = f.sub(a[r * n + j], t);
                        }
                    }
                }
                Ok(det)
            }
        }
    }

    pub fn rank(&self) -> usize {
        let (nr, nc) = (self.rows, self.cols);
        match self.field {
            Field::Gf2 => {
                let mut rows = self.packed_rows();
                let mut rank = 0;
                for col in 0..nc {
                    let (w, b) = (col / 64, col % 64);
                    let Some(p) = (rank..nr).find(|&r| (rows[r][w] >> b) & 1 == 1) else {
                        continue;
                    };
                    rows.swap(rank, p);
                    let pivot = rows[rank].clone();
                    for (r, row) in rows.iter_mut().enumerate() {
                        if r != rank && (row[w] >> b) & 1 == 1 {
                            xor_words(row, &pivot);
                        }
                    }
                    rank += 1;
                    if rank == nr {
                        break;
                    }
                }
                rank
            }
            Field::Prime(f) => {
                let mut a = self.data.clone();
                let mut rank = 0;
                for col in 0..nc {
                    let Some(p) = (rank..nr).find(|&r| a[r * nc + col] != 0) else {
                        continue;
                    };
                    for j in 0..nc {
                        a.swap(rank * nc + j, p * nc + j);
                    }
                    let inv = f.inv(a[rank * nc + col]).expect("nonzero pivot");
                    for r in 0..nr {
                        if r == rank {
                            continue;
                        }
                        let factor = f.mul(a[r * nc + col], inv);
                        if factor == 0 {
                            continue;
                        }
                        for j in col..nc {
                            let t = f.mul(factor, a[rank * nc + j]);
                            a[r * nc + j] = f.sub(a[r * nc + j], t);
                        }
                    }
                    rank += 1;
                    if rank == nr {
                        break;
                    }
                }
                rank
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    field: Field,
    rows: Vec<Vec<u64>>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            field: self.field,
            rows: self.to_rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        Matrix::from_rows(repr.field, repr.rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u64) -> Field {
        Field::from_order(q).unwrap()
    }

    #[test]
    fn det_examples() {
        assert_eq!(Matrix::identity(gf(5), 3).det().unwrap(), 1);
        let ones = Matrix::from_rows(Field::Gf2, vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(ones.det().unwrap(), 0);
        let m = Matrix::from_rows(gf(5), vec![vec![1, 1], vec![1, 2]]).unwrap();
        assert_eq!(m.det().unwrap(), 1);
        let rect = Matrix::zeros(gf(5), 2, 3);
        assert_eq!(rect.det(), Err(GfError::NonSquare { rows: 2, cols: 3 }));
    }

    #[test]
    fn det_sign_under_swap() {
        let m = Matrix::from_rows(gf(7), vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(m.det().unwrap(), 6);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::zeros(gf(3), 2, 3).rank(), 0);
        assert_eq!(Matrix::identity(Field::Gf2, 3).rank(), 3);
        let m = Matrix::from_rows(gf(7), vec![vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn bitvector_examples() {
        let z: BitVector = "0000".parse().unwrap();
        assert_eq!(z.weight(), 0);
        let a: BitVector = "1010".parse().unwrap();
        let b: BitVector = "0110".parse().unwrap();
        assert_eq!(a.hamming_distance(&b).unwrap(), 2);
        let s: BitVector = "0101".parse().unwrap();
        assert_eq!(s.support(), vec![1, 3]);
        let short = BitVector::zeros(3);
        assert_eq!(
            a.hamming_distance(&short),
            Err(GfError::LengthMismatch { left: 4, right: 3 })
        );
    }

    #[test]
    fn bitvector_wide() {
        let v = BitVector::from_support(130, &[0, 64, 129]);
        assert_eq!(v.weight(), 3);
        assert_eq!(v.support(), vec![0, 64, 129]);
        assert_eq!(v.xor(&v).unwrap().weight(), 0);
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        let sieve: Vec<u64> = (0..60u64)
            .filter(|&n| n >= 2 && (2..n).all(|d| n % d != 0))
            .collect();
        assert_eq!(small, sieve);
        assert!(is_prime(1_000_003));
        assert!(is_prime(10_007));
        assert!(!is_prime(1_000_001));
        assert!(PrimeField::new(2).is_err());
        assert!(PrimeField::new(9).is_err());
        assert!(PrimeField::new((1 << 61) - 1).is_ok());
    }

    #[test]
    fn field_json_round_trip() {
        for f in [Field::Gf2, gf(11)] {
            let s = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<Field>(&s).unwrap(), f);
        }
        assert_eq!(serde_json::to_string(&Field::Gf2).unwrap(), "\"gf2\"");
        assert_eq!(serde_json::to_string(&gf(5)).unwrap(), "{\"prime\":5}");
        assert!(serde_json::from_str::<Field>("{\"prime\":4}").is_err());
    }

    fn random_matrix(rng: &mut ChaCha8Rng, field: Field, r: usize, c: usize) -> Matrix {
        let rows = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(0..field.order())).collect())
            .collect();
        Matrix::from_rows(field, rows).unwrap()
    }

    // Left nullspace size by brute force; rank = rows - log_q(size).
    fn brute_rank(m: &Matrix) -> usize {
        let q = m.field().order();
        let r = m.rows();
        let total = q.pow(r as u32);
        let mut null = 0u64;
        for code in 0..total {
            let mut x = vec![0u64; r];
            let mut c = code;
            for xi in x.iter_mut() {
                *xi = c % q;
                c /= q;
            }
            if m.left_mul_vec(&x).unwrap().iter().all(|&v| v == 0) {
                null += 1;
            }
        }
        let mut dim = 0;
        let mut n = null;
        while n > 1 {
            n /= q;
            dim += 1;
        }
        r - dim
    }

    #[test]
    fn rank_matches_nullspace_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [2u64, 3] {
            for _ in 0..60 {
                let m = random_matrix(&mut rng, gf(q), 4, 6);
                assert_eq!(m.rank(), brute_rank(&m));
                let t = m.transpose();
                assert_eq!(t.rank(), m.rank());
            }
        }
    }

    #[test]
    fn det_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in [2u64, 3, 7, 10_007] {
            for n in 1..5 {
                let a = random_matrix(&mut rng, gf(q), n, n);
                let b = random_matrix(&mut rng, gf(q), n, n);
                let f = gf(q);
                let lhs = a.mul(&b).unwrap().det().unwrap();
                assert_eq!(lhs, f.mul(a.det().unwrap(), b.det().unwrap()));
                assert_eq!(a.det().unwrap() != 0, a.rank() == n);
            }
        }
    }

    proptest! {
        #[test]
        fn field_axioms(a in 0u64..1_000_003, b in 0u64..1_000_003, c in 0u64..1_000_003) {
            let f = PrimeField::new(1_000_003).unwrap();
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            prop_assert_eq!(f.add(a, f.neg(a)), 0);
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
        }

        #[test]
        fn hamming_metric(x in any::<u64>(), y in any::<u64>(), z in any::<u64>(), len in 1usize..64) {
            let (x, y, z) = (BitVector::from_u64(len, x), BitVector::from_u64(len, y), BitVector::from_u64(len, z));
            let dxy = x.hamming_distance(&y).unwrap();
            prop_assert_eq!(dxy, y.hamming_distance(&x).unwrap());
            prop_assert!(dxy <= x.hamming_distance(&z).unwrap() + z.hamming_distance(&y).unwrap());
            prop_assert_eq!(dxy, x.xor(&y).unwrap().weight());
            prop_assert_eq!(x.xor(&x).unwrap().weight(), 0);
            prop_assert_eq!(x.support().len(), x.weight());
        }
    }
}
