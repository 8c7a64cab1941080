use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense complex matrix stored in row-major order.
///
/// This is the carrier for every operator in the crate: density matrices,
/// projectors, POVM effects, unitaries and Kraus maps.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Which factor of a bipartite system `A ⊗ B` to trace out.
///
/// Subsystem `A` occupies the most-significant index block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from real entries in row-major order.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diag(&c)
    }

    /// Column vector `|v⟩` as an `n × 1` matrix.
    pub fn column(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        let mut data = Vec::with_capacity(a.len() * b.len());
        for &x in a {
            for &y in b {
                data.push(x * y.conj());
            }
        }
        Self {
            rows: a.len(),
            cols: b.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub(crate) fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn trace(&self) -> Result<Complex64> {
        let n = self.ensure_square()?;
        Ok((0..n).map(|i| self.data[i * n + i]).sum())
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `⟨u|A|v⟩`.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
        let av = self.apply(v)?;
        if u.len() != av.len() {
            return Err(Error::DimensionMismatch {
                expected: av.len(),
                found: u.len(),
            });
        }
        Ok(u.iter().zip(&av).map(|(a, b)| a.conj() * b).sum())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max deviation of `A` from `A†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        let mut out = self.clone();
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = (self.get(r, c) + self.get(c, r).conj()) * 0.5;
            }
        }
        out
    }

    /// Row `r` as a vector.
    pub fn row(&self, r: usize) -> Vec<Complex64> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    /// Column `c` as a vector.
    pub fn col(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Sub-block of rows `r0..r0+h` and columns `c0..c0+w`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        let mut out = Self::zeros(h, w);
        for r in 0..h {
            for c in 0..w {
                out.data[r * w + c] = self.get(r0 + r, c0 + c);
            }
        }
        out
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a.get(ar, ac);
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                let row = ar * b.rows + br;
                for bc in 0..b.cols {
                    out.data[row * cols + ac * b.cols + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, leftmost first.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

pub fn trace(a: &ComplexMatrix) -> Result<Complex64> {
    a.trace()
}

/// Partial trace of an operator on `A ⊗ B` with dimensions `dims = (dA, dB)`.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: (usize, usize),
    over: Subsystem,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let n = rho.ensure_square()?;
    if da * db != n {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: n,
        });
    }
    match over {
        Subsystem::A => {
            let mut out = ComplexMatrix::zeros(db, db);
            for j in 0..db {
                for jp in 0..db {
                    let s: Complex64 = (0..da).map(|i| rho.get(i * db + j, i * db + jp)).sum();
                    out.set(j, jp, s);
                }
            }
            Ok(out)
        }
        Subsystem::B => {
            let mut out = ComplexMatrix::zeros(da, da);
            for i in 0..da {
                for ip in 0..da {
                    let s: Complex64 = (0..db).map(|j| rho.get(i * db + j, ip * db + j)).sum();
                    out.set(i, ip, s);
                }
            }
            Ok(out)
        }
    }
}

/// Returns `log2(dim)` when `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::BadDimension { dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Lifts a `2^k × 2^k` operator acting on `targets` to the full `n_total`-qubit register.
///
/// `targets[0]` is the most-significant qubit of the operator's local index;
/// qubit 0 of the register is the most-significant bit of the global index.
pub fn embed_operator(
    op: &ComplexMatrix,
    targets: &[usize],
    n_total: usize,
) -> Result<ComplexMatrix> {
    let k = targets.len();
    if op.rows() != 1 << k || op.cols() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            found: op.rows(),
        });
    }
    check_targets(targets, n_total)?;
    let dim = 1usize << n_total;
    let shifts: Vec<usize> = targets.iter().map(|&t| n_total - 1 - t).collect();
    let target_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let scatter = |local: usize| -> usize {
        shifts
            .iter()
            .enumerate()
            .filter(|(j, _)| (local >> (k - 1 - j)) & 1 == 1)
            .map(|(_, &s)| 1usize << s)
            .sum()
    };
    let offsets: Vec<usize> = (0..1usize << k).map(scatter).collect();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for base in (0..dim).filter(|b| b & target_mask == 0) {
        for (lr, &orow) in offsets.iter().enumerate() {
            for (lc, &ocol) in offsets.iter().enumerate() {
                let v = op.get(lr, lc);
                if v != ZERO {
                    out.set(base | orow, base | ocol, v);
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn check_targets(targets: &[usize], n_total: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n_total {
            return Err(Error::BadTarget {
                reason: format!("qubit {t} out of range for {n_total} qubits"),
            });
        }
        if targets[..i].contains(&t) {
            return Err(Error::BadTarget {
                reason: format!("qubit {t} listed twice"),
            });
        }
    }
    Ok(())
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.checked_mul(rhs)
            .expect("matrix product with incompatible shapes")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix sum with different shapes")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.checked_sub(rhs)
            .expect("matrix difference with different shapes")
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Serde adapter writing a complex number as `[re, im]`.
///
/// Deserialization also accepts a bare real number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexJson(pub Complex64);

impl Serialize for ComplexJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.0.re)?;
        seq.serialize_element(&self.0.im)?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ComplexJson;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a two-element array [re, im]")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(ComplexJson(Complex64::new(v, 0.0)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(ComplexJson(Complex64::new(v as f64, 0.0)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(ComplexJson(Complex64::new(v as f64, 0.0)))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
                let re: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(ComplexJson(Complex64::new(re, im)))
            }
        }
        d.deserialize_any(V)
    }
}

/// Serialized as a list of rows, each a list of `[re, im]` pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for r in 0..self.rows {
            let row: Vec<ComplexJson> = (0..self.cols).map(|c| ComplexJson(self.get(r, c))).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<ComplexJson>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|c| c.0).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_zz_signs_basis_states() {
        let zz = kron(&pauli_z(), &pauli_z());
        let e00 = [ONE, ZERO, ZERO, ZERO];
        let e01 = [ZERO, ONE, ZERO, ZERO];
        assert_eq!(zz.apply(&e00).unwrap(), e00.to_vec());
        assert_eq!(
            zz.apply(&e01).unwrap(),
            e01.iter().map(|&x| -x).collect::<Vec<_>>()
        );
    }

    #[test]
    fn kron_projector_identity_trace() {
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let m = kron(&p0, &ComplexMatrix::identity(2));
        assert_eq!(m.trace().unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn dagger_shapes_and_conjugates() {
        let a = ComplexMatrix::new(
            3,
            2,
            vec![c(1.0, 2.0), c(0.5, -1.0), c(3.0, 0.0), c(0.0, 1.0), c(-2.0, 0.25), c(1.5, 1.5)],
        )
        .unwrap();
        let d = a.dagger();
        assert_eq!((d.rows(), d.cols()), (2, 3));
        for r in 0..3 {
            for col in 0..2 {
                assert_eq!(d.get(col, r), a.get(r, col).conj());
            }
        }
        assert_eq!(d.dagger(), a);
    }

    #[test]
    fn dagger_of_y_is_y() {
        let y = ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).unwrap();
        assert_eq!(y.dagger(), y);
        assert_eq!(ComplexMatrix::identity(3).dagger(), ComplexMatrix::identity(3));
    }

    #[test]
    fn trace_values() {
        assert_eq!(ComplexMatrix::identity(4).trace().unwrap(), c(4.0, 0.0));
        assert_eq!(kron(&pauli_z(), &pauli_z()).trace().unwrap(), ZERO);
        let v = [c(0.6, 0.0), c(0.0, 0.8)];
        let t = ComplexMatrix::outer(&v, &v).trace().unwrap();
        assert!((t - ONE).norm() < 1e-15);
        assert!(matches!(
            ComplexMatrix::zeros(2, 3).trace(),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let e00 = [ONE, ZERO, ZERO, ZERO];
        let rho = ComplexMatrix::outer(&e00, &e00);
        let out = partial_trace(&rho, (2, 2), Subsystem::A).unwrap();
        assert_eq!(out, ComplexMatrix::diag_real(&[1.0, 0.0]));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [c(h, 0.0), ZERO, ZERO, c(h, 0.0)];
        let rho = ComplexMatrix::outer(&phi, &phi);
        for over in [Subsystem::A, Subsystem::B] {
            let out = partial_trace(&rho, (2, 2), over).unwrap();
            assert!(out.max_abs_diff(&ComplexMatrix::diag_real(&[0.5, 0.5])) < 1e-15);
        }
        assert!(matches!(
            partial_trace(&rho, (2, 3), Subsystem::A),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_unequal_dims() {
        // |1⟩⟨1| ⊗ diag(0.2, 0.3, 0.5)
        let a = ComplexMatrix::diag_real(&[0.0, 1.0]);
        let b = ComplexMatrix::diag_real(&[0.2, 0.3, 0.5]);
        let ab = kron(&a, &b);
        assert!(partial_trace(&ab, (2, 3), Subsystem::A).unwrap().max_abs_diff(&b) < 1e-15);
        assert!(partial_trace(&ab, (2, 3), Subsystem::B).unwrap().max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn embed_matches_kron_for_adjacent_targets() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let i2 = ComplexMatrix::identity(2);
        let e = embed_operator(&x, &[1], 3).unwrap();
        assert_eq!(e, kron_all([&i2, &x, &i2]));
        let xz = kron(&x, &pauli_z());
        let e = embed_operator(&xz, &[0, 1], 3).unwrap();
        assert_eq!(e, kron(&xz, &i2));
        // swapped target order permutes the factors
        let e = embed_operator(&xz, &[2, 0], 3).unwrap();
        assert_eq!(e, kron_all([&pauli_z(), &i2, &x]));
    }

    #[test]
    fn embed_rejects_bad_targets() {
        let x = ComplexMatrix::identity(2);
        assert!(matches!(embed_operator(&x, &[3], 3), Err(Error::BadTarget { .. })));
        let xx = ComplexMatrix::identity(4);
        assert!(matches!(embed_operator(&xx, &[1, 1], 3), Err(Error::BadTarget { .. })));
    }

    #[test]
    fn json_roundtrip_uses_pairs() {
        let m = ComplexMatrix::new(1, 2, vec![c(1.0, -0.5), c(0.0, 2.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[1.0,-0.5],[0.0,2.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let real: ComplexMatrix = serde_json::from_str("[[1, 0], [0, -1]]").unwrap();
        assert_eq!(real, pauli_z());
    }
}
