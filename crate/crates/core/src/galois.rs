//! Prime-field arithmetic and dense linear algebra over `F_p`.
//!
//! Moduli that fit in a `u64` use native arithmetic with `u128`
//! intermediates; larger moduli (the 160-bit pairing group order) fall back
//! to arbitrary-precision integers. Both share the [`Field`] / [`Fe`]
//! interface, so callers never branch on the representation.
//!
//! All eliminations scan columns left to right and pick the first nonzero
//! entry as pivot, which makes every derived object (echelon forms, solution
//! vectors, invertible submatrices) reproducible.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, PartialEq, Eq, Hash)]
enum Modulus {
    Native(u64),
    Wide(BigUint),
}

/// A prime field `F_p`. Cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Field(Arc<Modulus>);

/// A canonical field element in `[0, p)`.
///
/// Elements do not carry their modulus; arithmetic goes through the
/// [`Field`] they were created by.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe(Repr);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Native(u64),
    Wide(BigUint),
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Native(v) => write!(f, "{v}"),
            Repr::Wide(v) => write!(f, "{v}"),
        }
    }
}

impl Fe {
    pub fn to_biguint(&self) -> BigUint {
        match &self.0 {
            Repr::Native(v) => BigUint::from(*v),
            Repr::Wide(v) => v.clone(),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match &self.0 {
            Repr::Native(v) => Some(*v),
            Repr::Wide(v) => v.to_u64(),
        }
    }

    /// Little-endian bytes of the canonical value.
    pub fn to_bytes_le(&self) -> Vec<u8> {
        self.to_biguint().to_bytes_le()
    }
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn is_prime_u64(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < (1 << 32) {
        let mut d = 2u64;
        while d * d <= p {
            if p.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        return true;
    }
    // Miller-Rabin with these bases is exact for every 64-bit integer.
    let mut d = p - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'bases: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, p);
        if x == 1 || x == p - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, p);
            if x == p - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn is_probable_prime(p: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *p < two {
        return false;
    }
    for &q in &SMALL_PRIMES {
        let q = BigUint::from(q);
        if *p == q {
            return true;
        }
        if (p % &q).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let pm1 = p - &one;
    let mut d = pm1.clone();
    let mut s = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        s += 1;
    }
    let extra = [41u64, 43, 47, 53, 59, 61, 67, 71];
    'bases: for &a in SMALL_PRIMES.iter().chain(extra.iter()) {
        let mut x = BigUint::from(a).modpow(&d, p);
        if x == one || x == pm1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % p;
            if x == pm1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

impl Field {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p.to_string()));
        }
        Ok(Field(Arc::new(Modulus::Native(p))))
    }

    /// Builds a field from an arbitrary-precision modulus. Moduli that fit in
    /// a `u64` get the native representation; larger ones are accepted after
    /// a Miller-Rabin test.
    pub fn from_biguint(p: BigUint) -> Result<Self> {
        if let Some(small) = p.to_u64() {
            return Self::new(small);
        }
        if !is_probable_prime(&p) {
            return Err(Error::NotPrime(p.to_string()));
        }
        Ok(Field(Arc::new(Modulus::Wide(p))))
    }

    pub fn from_decimal(s: &str) -> Result<Self> {
        let p = BigUint::parse_bytes(s.trim().as_bytes(), 10)
            .ok_or_else(|| Error::invalid(format!("modulus `{s}` is not a decimal integer")))?;
        Self::from_biguint(p)
    }

    pub fn modulus(&self) -> BigUint {
        match &*self.0 {
            Modulus::Native(p) => BigUint::from(*p),
            Modulus::Wide(p) => p.clone(),
        }
    }

    pub fn modulus_u64(&self) -> Option<u64> {
        match &*self.0 {
            Modulus::Native(p) => Some(*p),
            Modulus::Wide(_) => None,
        }
    }

    pub fn bits(&self) -> u64 {
        self.modulus().bits()
    }

    pub fn zero(&self) -> Fe {
        match &*self.0 {
            Modulus::Native(_) => Fe(Repr::Native(0)),
            Modulus::Wide(_) => Fe(Repr::Wide(BigUint::zero())),
        }
    }

    pub fn one(&self) -> Fe {
        self.elem(1)
    }

    /// Reduces `v` mod p.
    pub fn elem(&self, v: u64) -> Fe {
        match &*self.0 {
            Modulus::Native(p) => Fe(Repr::Native(v % p)),
            Modulus::Wide(p) => Fe(Repr::Wide(BigUint::from(v) % p)),
        }
    }

    pub fn elem_big(&self, v: &BigUint) -> Fe {
        match &*self.0 {
            Modulus::Native(p) => Fe(Repr::Native((v % p).to_u64().expect("reduced below u64"))),
            Modulus::Wide(p) => Fe(Repr::Wide(v % p)),
        }
    }

    pub fn from_i64(&self, v: i64) -> Fe {
        let e = self.elem(v.unsigned_abs());
        if v < 0 {
            self.neg(&e)
        } else {
            e
        }
    }

    /// Parses a canonical decimal element; values `>= p` are rejected.
    pub fn parse_elem(&self, s: &str) -> Result<Fe> {
        let v = BigUint::parse_bytes(s.trim().as_bytes(), 10)
            .ok_or_else(|| Error::invalid(format!("`{s}` is not a decimal field element")))?;
        if v >= self.modulus() {
            return Err(Error::invalid(format!(
                "element {v} is not below the modulus {}",
                self.modulus()
            )));
        }
        Ok(self.elem_big(&v))
    }

    pub fn is_zero(&self, a: &Fe) -> bool {
        match &a.0 {
            Repr::Native(v) => *v == 0,
            Repr::Wide(v) => v.is_zero(),
        }
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        match (&*self.0, &a.0, &b.0) {
            (Modulus::Native(p), Repr::Native(x), Repr::Native(y)) => {
                Fe(Repr::Native(((*x as u128 + *y as u128) % *p as u128) as u64))
            }
            (Modulus::Wide(p), Repr::Wide(x), Repr::Wide(y)) => Fe(Repr::Wide((x + y) % p)),
            _ => panic!("field element used with a foreign field"),
        }
    }

    pub fn neg(&self, a: &Fe) -> Fe {
        match (&*self.0, &a.0) {
            (Modulus::Native(p), Repr::Native(x)) => Fe(Repr::Native(if *x == 0 { 0 } else { p - x })),
            (Modulus::Wide(p), Repr::Wide(x)) => {
                Fe(Repr::Wide(if x.is_zero() { BigUint::zero() } else { p - x }))
            }
            _ => panic!("field element used with a foreign field"),
        }
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        match (&*self.0, &a.0, &b.0) {
            (Modulus::Native(p), Repr::Native(x), Repr::Native(y)) => Fe(Repr::Native(mul_mod(*x, *y, *p))),
            (Modulus::Wide(p), Repr::Wide(x), Repr::Wide(y)) => Fe(Repr::Wide(x * y % p)),
            _ => panic!("field element used with a foreign field"),
        }
    }

    pub fn pow(&self, a: &Fe, exp: &BigUint) -> Fe {
        match (&*self.0, &a.0) {
            (Modulus::Native(p), Repr::Native(_)) => {
                let e = (exp % BigUint::from(*p - 1)).to_u64().unwrap_or(0);
                // a^0 must stay 1 even when exp is a nonzero multiple of p-1
                // and a = 0.
                if exp.is_zero() {
                    return self.one();
                }
                let e = if e == 0 { p - 1 } else { e };
                Fe(Repr::Native(pow_mod(a.to_u64().unwrap(), e, *p)))
            }
            (Modulus::Wide(p), Repr::Wide(x)) => Fe(Repr::Wide(x.modpow(exp, p))),
            _ => panic!("field element used with a foreign field"),
        }
    }

    pub fn pow_u64(&self, a: &Fe, exp: u64) -> Fe {
        self.pow(a, &BigUint::from(exp))
    }

    pub fn inv(&self, a: &Fe) -> Option<Fe> {
        if self.is_zero(a) {
            return None;
        }
        let e = self.modulus() - BigUint::from(2u32);
        Some(self.pow(a, &e))
    }

    pub fn div(&self, a: &Fe, b: &Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    /// Uniform sample from `F_p`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        match &*self.0 {
            Modulus::Native(p) => Fe(Repr::Native(rng.gen_range(0..*p))),
            Modulus::Wide(p) => Fe(Repr::Wide(rng.gen_biguint_below(p))),
        }
    }

    /// Inner product of two equal-length vectors.
    pub fn dot(&self, a: &[Fe], b: &[Fe]) -> Fe {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(self.zero(), |acc, (x, y)| self.add(&acc, &self.mul(x, y)))
    }

    pub fn elems(&self, vals: &[u64]) -> Vec<Fe> {
        vals.iter().map(|&v| self.elem(v)).collect()
    }
}

/// Dense row-major matrix over a prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<Fe>,
}

/// Result of [`FieldMatrix::find_invertible_submatrix`]: row set `W`,
/// column set `K` and the inverse of `U = M[W, K]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvertibleSubmatrix {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub inverse: FieldMatrix,
}

impl FieldMatrix {
    pub fn new(field: &Field, rows: usize, cols: usize, entries: Vec<Fe>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            entries: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &Field, size: usize) -> Self {
        let mut m = Self::zeros(field, size, size);
        for i in 0..size {
            m.set(i, i, field.one());
        }
        m
    }

    /// Builds a matrix from explicit rows of width `cols`.
    pub fn from_rows(field: &Field, cols: usize, rows: Vec<Vec<Fe>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Self::new(field, n, cols, entries)
    }

    /// Convenience constructor from small integers, reduced mod p.
    pub fn from_u64_rows(field: &Field, rows: &[&[u64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(field, cols, rows.iter().map(|r| field.elems(r)).collect())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Fe] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &Fe {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fe] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Fe>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn to_u64_rows(&self) -> Option<Vec<Vec<u64>>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(Fe::to_u64).collect())
            .collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> FieldMatrix {
        let mut entries = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            entries.extend_from_slice(self.row(r));
        }
        FieldMatrix {
            field: self.field.clone(),
            rows: idx.len(),
            cols: self.cols,
            entries,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> FieldMatrix {
        let mut entries = Vec::with_capacity(idx.len() * self.rows);
        for r in 0..self.rows {
            for &c in idx {
                entries.push(self.get(r, c).clone());
            }
        }
        FieldMatrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: idx.len(),
            entries,
        }
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        FieldMatrix {
            field: self.field.clone(),
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns on {}",
                other.cols, self.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self::new(&self.field, self.rows + other.rows, self.cols, entries)
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), &f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// `M · x`.
    pub fn mul_vec(&self, x: &[Fe]) -> Result<Vec<Fe>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), x)).collect())
    }

    /// `x^T · M`.
    pub fn vec_mul(&self, x: &[Fe]) -> Result<Vec<Fe>> {
        if x.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} rows",
                x.len(),
                self.rows
            )));
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.cols];
        for (r, coeff) in x.iter().enumerate() {
            if f.is_zero(coeff) {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o = f.add(o, &f.mul(coeff, self.get(r, c)));
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// `row[target] -= factor * row[source]`
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: &Fe) {
        let f = self.field.clone();
        for c in 0..self.cols {
            let v = f.sub(self.get(target, c), &f.mul(factor, self.get(source, c)));
            self.set(target, c, v);
        }
    }

    fn scale_row(&mut self, r: usize, factor: &Fe) {
        let f = self.field.clone();
        for c in 0..self.cols {
            let v = f.mul(self.get(r, c), factor);
            self.set(r, c, v);
        }
    }

    /// Reduced row echelon form, pivoting only in the first `pivot_cols`
    /// columns. Returns the reduced matrix and its pivot columns.
    pub fn rref_limited(&self, pivot_cols: usize) -> (FieldMatrix, Vec<usize>) {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..pivot_cols.min(self.cols) {
            if lead == m.rows {
                break;
            }
            let Some(p) = (lead..m.rows).find(|&r| !f.is_zero(m.get(r, c))) else {
                continue;
            };
            m.swap_rows(lead, p);
            let inv = f.inv(m.get(lead, c)).expect("pivot is nonzero");
            m.scale_row(lead, &inv);
            for r in 0..m.rows {
                if r != lead && !f.is_zero(m.get(r, c)) {
                    let factor = m.get(r, c).clone();
                    m.sub_row_multiple(r, lead, &factor);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        (m, pivots)
    }

    pub fn rref(&self) -> (FieldMatrix, Vec<usize>) {
        self.rref_limited(self.cols)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn inverse(&self) -> Option<FieldMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let f = &self.field;
        let mut aug = Self::zeros(f, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, f.one());
        }
        let (red, pivots) = aug.rref_limited(n);
        if pivots.len() != n {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Some(red.select_cols(&cols))
    }

    /// Finds `alpha` with `alpha^T · self = target^T`, or `None` when the
    /// target lies outside the row span. Free variables are set to zero.
    pub fn solve_in_span(&self, target: &[Fe]) -> Result<Option<Vec<Fe>>> {
        if target.len() != self.cols {
            return Err(Error::Dimension(format!(
                "target of length {} for {} columns",
                target.len(),
                self.cols
            )));
        }
        let f = &self.field;
        // Columns of the system are the rows of self, plus the target.
        let mut aug = Self::zeros(f, self.cols, self.rows + 1);
        for (c, t) in target.iter().enumerate() {
            for r in 0..self.rows {
                aug.set(c, r, self.get(r, c).clone());
            }
            aug.set(c, self.rows, t.clone());
        }
        let (red, pivots) = aug.rref_limited(self.rows);
        for r in pivots.len()..red.rows {
            if !f.is_zero(red.get(r, self.rows)) {
                return Ok(None);
            }
        }
        let mut alpha = vec![f.zero(); self.rows];
        for (r, &c) in pivots.iter().enumerate() {
            alpha[c] = red.get(r, self.rows).clone();
        }
        Ok(Some(alpha))
    }

    /// True iff `target` lies in the row span.
    pub fn spans(&self, target: &[Fe]) -> Result<bool> {
        Ok(self.solve_in_span(target)?.is_some())
    }

    /// Finds row set `W` and column set `K` (avoiding `excluded_col`) with
    /// `|W| = |K| = rank(self)` such that `U = self[W, K]` is invertible.
    ///
    /// `K` is the first basis of the column space met scanning allowed
    /// columns in ascending order; `W` holds the rows used as pivots. Both
    /// are returned sorted ascending and `U` is indexed in that order.
    pub fn find_invertible_submatrix(&self, excluded_col: usize) -> Result<InvertibleSubmatrix> {
        let f = self.field.clone();
        let allowed: Vec<usize> = (0..self.cols).filter(|&c| c != excluded_col).collect();
        let mut work = self.select_cols(&allowed);
        let mut origin: Vec<usize> = (0..self.rows).collect();
        let mut w = Vec::new();
        let mut k = Vec::new();
        let mut lead = 0;
        for (wc, &col) in allowed.iter().enumerate() {
            if lead == work.rows {
                break;
            }
            let Some(p) = (lead..work.rows).find(|&r| !f.is_zero(work.get(r, wc))) else {
                continue;
            };
            work.swap_rows(lead, p);
            origin.swap(lead, p);
            let inv = f.inv(work.get(lead, wc)).expect("pivot is nonzero");
            for r in lead + 1..work.rows {
                if !f.is_zero(work.get(r, wc)) {
                    let factor = f.mul(work.get(r, wc), &inv);
                    work.sub_row_multiple(r, lead, &factor);
                }
            }
            w.push(origin[lead]);
            k.push(col);
            lead += 1;
        }
        if k.len() != self.rank() {
            return Err(Error::NotUnauthorizedConsistent);
        }
        w.sort_unstable();
        let u = self.select_rows(&w).select_cols(&k);
        let inverse = u
            .inverse()
            .ok_or_else(|| Error::Internal("pivot submatrix is singular".into()))?;
        Ok(InvertibleSubmatrix {
            rows: w,
            cols: k,
            inverse,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> Field {
        Field::new(p).unwrap()
    }

    #[test]
    fn primality() {
        assert!(Field::new(2).is_ok());
        assert!(Field::new(65521).is_ok());
        assert!(Field::new(65535).is_err());
        assert!(Field::new(1).is_err());
        assert!(Field::new(18446744073709551557).is_ok());
        assert!(Field::new(18446744073709551555).is_err());
        let p160 = "730750818665451621361119245571504901405976559617";
        assert!(Field::from_decimal(p160).is_ok());
        let composite = BigUint::parse_bytes(p160.as_bytes(), 10).unwrap() * BigUint::from(3u32);
        assert!(Field::from_biguint(composite).is_err());
    }

    #[test]
    fn arithmetic_small_and_wide() {
        for field in [
            f(7),
            Field::from_decimal("730750818665451621361119245571504901405976559617").unwrap(),
        ] {
            let a = field.elem(5);
            let b = field.elem(4);
            assert_eq!(field.sub(&field.add(&a, &b), &b), a);
            let ai = field.inv(&a).unwrap();
            assert_eq!(field.mul(&a, &ai), field.one());
            assert_eq!(field.inv(&field.zero()), None);
            assert_eq!(field.add(&field.from_i64(-3), &field.elem(3)), field.zero());
            assert_eq!(field.pow_u64(&field.zero(), 0), field.one());
        }
    }

    #[test]
    fn parse_elem_rejects_out_of_range() {
        let field = f(7);
        assert_eq!(field.parse_elem("6").unwrap(), field.elem(6));
        assert!(field.parse_elem("7").is_err());
        assert!(field.parse_elem("x").is_err());
    }

    #[test]
    fn rank_examples() {
        let f5 = f(5);
        assert_eq!(FieldMatrix::identity(&f5, 3).rank(), 3);
        let f2 = f(2);
        let m = FieldMatrix::from_u64_rows(&f2, &[&[0, 1, 1], &[0, 1, 1], &[0, 1, 0]]).unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(FieldMatrix::zeros(&f(3), 2, 4).rank(), 0);
        assert_eq!(FieldMatrix::zeros(&f(3), 0, 4).rank(), 0);
    }

    #[test]
    fn solve_in_span_examples() {
        let f7 = f(7);
        let id = FieldMatrix::identity(&f7, 2);
        assert_eq!(
            id.solve_in_span(&f7.elems(&[1, 0])).unwrap(),
            Some(f7.elems(&[1, 0]))
        );

        let f2 = f(2);
        let rows = FieldMatrix::from_u64_rows(&f2, &[&[1, 0, 1], &[0, 1, 1], &[0, 1, 0]]).unwrap();
        assert_eq!(
            rows.solve_in_span(&f2.elems(&[1, 0, 0])).unwrap(),
            Some(f2.elems(&[1, 1, 1]))
        );

        let single = FieldMatrix::from_u64_rows(&f2, &[&[0, 1, 1]]).unwrap();
        assert_eq!(single.solve_in_span(&f2.elems(&[1, 0, 0])).unwrap(), None);

        assert!(matches!(
            single.solve_in_span(&f2.elems(&[1, 0])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn solve_in_span_free_variables_are_zero() {
        let f7 = f(7);
        let rows = FieldMatrix::from_u64_rows(&f7, &[&[1, 0], &[1, 0], &[0, 1]]).unwrap();
        assert_eq!(
            rows.solve_in_span(&f7.elems(&[3, 2])).unwrap(),
            Some(f7.elems(&[3, 0, 2]))
        );
    }

    #[test]
    fn invertible_submatrix_examples() {
        let f2 = f(2);
        let single = FieldMatrix::from_u64_rows(&f2, &[&[0, 1, 0]]).unwrap();
        let s = single.find_invertible_submatrix(0).unwrap();
        assert_eq!(s.rows, vec![0]);
        assert_eq!(s.cols, vec![1]);
        assert_eq!(s.inverse, FieldMatrix::from_u64_rows(&f2, &[&[1]]).unwrap());

        let two = FieldMatrix::from_u64_rows(&f2, &[&[0, 1, 1], &[0, 1, 0]]).unwrap();
        let s = two.find_invertible_submatrix(0).unwrap();
        assert_eq!(s.rows, vec![0, 1]);
        assert_eq!(s.cols, vec![1, 2]);
        assert_eq!(
            s.inverse,
            FieldMatrix::from_u64_rows(&f2, &[&[0, 1], &[1, 1]]).unwrap()
        );

        let f5 = f(5);
        let authorized = FieldMatrix::from_u64_rows(&f5, &[&[1, 0, 0]]).unwrap();
        assert_eq!(
            authorized.find_invertible_submatrix(0),
            Err(Error::NotUnauthorizedConsistent)
        );
    }

    #[test]
    fn invertible_submatrix_with_dependent_rows() {
        let f7 = f(7);
        let m = FieldMatrix::from_u64_rows(&f7, &[&[0, 2, 4], &[0, 1, 2], &[0, 0, 3]]).unwrap();
        let s = m.find_invertible_submatrix(0).unwrap();
        assert_eq!(s.rows.len(), 2);
        let u = m.select_rows(&s.rows).select_cols(&s.cols);
        assert_eq!(u.mul(&s.inverse).unwrap(), FieldMatrix::identity(&f7, 2));
    }

    fn arb_matrix(p: u64, max_rows: usize, max_cols: usize) -> impl Strategy<Value = FieldMatrix> {
        (0..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0..p, r * c).prop_map(move |vals| {
                let field = Field::new(p).unwrap();
                FieldMatrix::new(&field, r, c, field.elems(&vals)).unwrap()
            })
        })
    }

    /// Enumerates every coefficient vector over the field.
    fn brute_force_in_span(m: &FieldMatrix, target: &[Fe]) -> bool {
        let p = m.field().modulus_u64().unwrap();
        let field = m.field();
        let total = p.pow(m.rows() as u32);
        (0..total).any(|mut code| {
            let alpha: Vec<Fe> = (0..m.rows())
                .map(|_| {
                    let d = code % p;
                    code /= p;
                    field.elem(d)
                })
                .collect();
            m.vec_mul(&alpha).unwrap() == target
        })
    }

    proptest! {
        #[test]
        fn solve_in_span_is_sound_and_complete(
            p in prop::sample::select(vec![2u64, 3]),
            seed in any::<u64>(),
            rows in 0usize..=4,
            cols in 1usize..=4,
        ) {
            let field = Field::new(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entries = (0..rows * cols).map(|_| field.sample(&mut rng)).collect();
            let m = FieldMatrix::new(&field, rows, cols, entries).unwrap();
            let target: Vec<Fe> = (0..cols).map(|_| field.sample(&mut rng)).collect();
            let got = m.solve_in_span(&target).unwrap();
            if let Some(alpha) = &got {
                prop_assert_eq!(m.vec_mul(alpha).unwrap(), target.clone());
            }
            prop_assert_eq!(got.is_some(), brute_force_in_span(&m, &target));
        }

        #[test]
        fn echelon_form_preserves_row_span(m in arb_matrix(5, 5, 5), seed in any::<u64>()) {
            let (e, pivots) = m.rref();
            prop_assert_eq!(pivots.len(), m.rank());
            let field = m.field().clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..4 {
                let coeffs: Vec<Fe> = (0..m.rows()).map(|_| field.sample(&mut rng)).collect();
                let v = m.vec_mul(&coeffs).unwrap();
                prop_assert!(e.spans(&v).unwrap());
                let coeffs: Vec<Fe> = (0..e.rows()).map(|_| field.sample(&mut rng)).collect();
                let v = e.vec_mul(&coeffs).unwrap();
                prop_assert!(m.spans(&v).unwrap());
            }
        }

        #[test]
        fn invertible_submatrix_reassembles_to_identity(m in arb_matrix(7, 4, 5)) {
            if let Ok(s) = m.find_invertible_submatrix(0) {
                prop_assert_eq!(s.rows.len(), m.rank());
                prop_assert!(!s.cols.contains(&0));
                let u = m.select_rows(&s.rows).select_cols(&s.cols);
                let id = FieldMatrix::identity(m.field(), s.rows.len());
                prop_assert_eq!(u.mul(&s.inverse).unwrap(), id.clone());
                prop_assert_eq!(s.inverse.mul(&u).unwrap(), id);
            } else {
                // Failure only when column 0 is needed for full rank.
                let rest: Vec<usize> = (1..m.cols()).collect();
                prop_assert!(m.select_cols(&rest).rank() < m.rank());
            }
        }
    }
}
