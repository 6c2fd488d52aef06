//! Exact integer and rational arithmetic plus the integer linear algebra the
//! rest of the crate is built on.
//!
//! Normal form conventions:
//!
//! * Row Hermite normal form: `U * M = H` with `U` unimodular. Pivots are
//!   strictly positive, each pivot lies strictly right of the pivot above it,
//!   entries above a pivot are reduced into `[0, pivot)`, and zero rows sit at
//!   the bottom.
//! * Smith invariants are returned as the positive diagonal entries
//!   `d_1 | d_2 | ... | d_rank`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;
pub type IntVec = Vec<Int>;
pub type RatVec = Vec<Rat>;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

pub fn ivec(v: &[i64]) -> IntVec {
    v.iter().map(|&x| Int::from(x)).collect()
}

/// Parses `"p/q"` or `"p"`. Decimal notation is rejected.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::DomainError(format!("not an exact rational: {s:?}"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: Int = num.parse().map_err(|_| bad())?;
    let d: Int = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::DomainError(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(n, d))
}

/// `"p/q"`, or `"p"` when the denominator is 1.
pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

/// Serializes a rational as the string `p/q`.
pub fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn ser_rats<S: serde::Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

/// Serializes integers as JSON numbers when they fit in `i64`, else as strings.
pub fn ser_ints<S: serde::Serializer>(v: &[Int], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        match i64::try_from(x) {
            Ok(n) => seq.serialize_element(&n)?,
            Err(_) => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

pub fn vec_gcd(v: &[Int]) -> Int {
    v.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

pub fn is_primitive(v: &[Int]) -> bool {
    vec_gcd(v).is_one()
}

/// Divides out the content of `v`.
pub fn primitive(v: &[Int]) -> Result<IntVec> {
    let g = vec_gcd(v);
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / &g).collect())
}

pub fn is_zero_vec(v: &[Int]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_rat(m: &[Rat], v: &[Int]) -> Rat {
    m.iter()
        .zip(v)
        .fold(Rat::zero(), |acc, (x, y)| acc + x * rat_int(y))
}

pub fn vec_add(a: &[Int], b: &[Int]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_neg(a: &[Int]) -> IntVec {
    a.iter().map(|x| -x).collect()
}

pub fn vec_scale(k: &Int, a: &[Int]) -> IntVec {
    a.iter().map(|x| k * x).collect()
}

pub fn to_rat_vec(v: &[Int]) -> RatVec {
    v.iter().map(rat_int).collect()
}

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        write!(f, "IntMat{rows:?}")
    }
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Int::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` fixes the width when `rows` is empty.
    pub fn from_rows(rows: &[IntVec], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().cloned());
        }
        Ok(IntMat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<IntVec> = rows.iter().map(|r| ivec(r)).collect();
        Self::from_rows(&rows, cols).expect("ragged matrix literal")
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[IntVec], rows: usize) -> Result<Self> {
        Ok(Self::from_rows(cols, rows)?.transpose())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<IntVec> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> IntVec {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> Result<IntMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let s: Int = (0..self.cols)
                    .map(|k| self.get(i, k) * other.get(k, j))
                    .sum();
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Int]) -> Result<IntVec> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Keeps the rows listed in `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> IntMat {
        let rows: Vec<IntVec> = idx.iter().map(|&i| self.row(i).to_vec()).collect();
        IntMat::from_rows(&rows, self.cols).expect("row width is fixed")
    }

    pub fn select_cols(&self, idx: &[usize]) -> IntMat {
        self.transpose().select_rows(idx).transpose()
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> Result<Int> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Int::one());
        }
        let mut a = self.to_rows();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(p) => {
                        a.swap(k, p);
                        sign = -sign;
                    }
                    None => return Ok(Int::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMat::identity(self.rows) && self.rows == self.cols
    }
}

fn row_axpy(rows: &mut [IntVec], target: usize, src: usize, k: &Int) {
    if k.is_zero() {
        return;
    }
    let s = rows[src].clone();
    for (t, x) in rows[target].iter_mut().zip(&s) {
        *t -= k * x;
    }
}

/// Row Hermite normal form: returns `(H, U)` with `U * M = H`, `|det U| = 1`.
pub fn hermite_normal_form(m: &IntMat) -> (IntMat, IntMat) {
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut h = m.to_rows();
    let mut u = IntMat::identity(nr).to_rows();
    let mut pivot_row = 0;
    for col in 0..nc {
        if pivot_row >= nr {
            break;
        }
        loop {
            let best = (pivot_row..nr)
                .filter(|&i| !h[i][col].is_zero())
                .min_by(|&a, &b| h[a][col].abs().cmp(&h[b][col].abs()));
            let Some(p) = best else { break };
            h.swap(pivot_row, p);
            u.swap(pivot_row, p);
            let mut done = true;
            for i in pivot_row + 1..nr {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = h[i][col].div_floor(&h[pivot_row][col]);
                row_axpy(&mut h, i, pivot_row, &q);
                row_axpy(&mut u, i, pivot_row, &q);
                if !h[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[pivot_row][col].is_zero() {
            continue;
        }
        if h[pivot_row][col].is_negative() {
            for x in h[pivot_row].iter_mut() {
                *x = -x.clone();
            }
            for x in u[pivot_row].iter_mut() {
                *x = -x.clone();
            }
        }
        for i in 0..pivot_row {
            let q = h[i][col].div_floor(&h[pivot_row][col]);
            row_axpy(&mut h, i, pivot_row, &q);
            row_axpy(&mut u, i, pivot_row, &q);
        }
        pivot_row += 1;
    }
    (
        IntMat::from_rows(&h, nc).expect("shape preserved"),
        IntMat::from_rows(&u, nr).expect("shape preserved"),
    )
}

/// Number of nonzero rows of a row Hermite form.
fn hnf_rank(h: &IntMat) -> usize {
    (0..h.nrows())
        .filter(|&i| !is_zero_vec(h.row(i)))
        .count()
}

/// Basis of the saturated lattice `{v in Z^n : M v = 0}`, returned in row
/// Hermite normal form so the basis is canonical.
pub fn kernel_basis(m: &IntMat) -> Vec<IntVec> {
    let (h, u) = hermite_normal_form(&m.transpose());
    let r = hnf_rank(&h);
    let n = m.ncols();
    if r == n {
        return Vec::new();
    }
    let ker = u.select_rows(&(r..n).collect::<Vec<_>>());
    let (hk, _) = hermite_normal_form(&ker);
    hk.to_rows()
        .into_iter()
        .filter(|row| !is_zero_vec(row))
        .collect()
}

/// Unimodular matrix whose first row is the primitive vector `v`.
pub fn complete_to_basis(v: &[Int]) -> Result<IntMat> {
    let coords = QuotientCoordinates::new(v)?;
    let mut rows = vec![v.to_vec()];
    rows.extend(coords.section.transpose().to_rows());
    IntMat::from_rows(&rows, v.len())
}

/// Coordinates on `N / Z v` for a primitive `v`.
///
/// `projection` is `(n-1) x n` with kernel `Z v`; `section` is `n x (n-1)`
/// with `projection * section = I`.
#[derive(Clone, Debug)]
pub struct QuotientCoordinates {
    pub projection: IntMat,
    pub section: IntMat,
}

impl QuotientCoordinates {
    pub fn new(v: &[Int]) -> Result<Self> {
        if !is_primitive(v) {
            return Err(Error::NotPrimitive(v.iter().map(|x| x.to_string()).collect()));
        }
        let n = v.len();
        let col = IntMat::from_columns(&[v.to_vec()], n)?;
        // U v = e_1 because the content of v is 1.
        let (_, u) = hermite_normal_form(&col);
        let inv = unimodular_inverse(&u)?;
        let rest: Vec<usize> = (1..n).collect();
        Ok(QuotientCoordinates {
            projection: u.select_rows(&rest),
            section: inv.select_cols(&rest),
        })
    }
}

/// Inverse of a unimodular integer matrix.
pub fn unimodular_inverse(u: &IntMat) -> Result<IntMat> {
    let n = u.nrows();
    let inv = rat_inverse(&int_rows_to_rat(&u.to_rows()))
        .ok_or_else(|| Error::DomainError("matrix is singular".into()))?;
    let mut out = IntMat::zeros(n, n);
    for (i, row) in inv.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_integer() {
                return Err(Error::DomainError("matrix is not unimodular".into()));
            }
            out.set(i, j, x.to_integer());
        }
    }
    Ok(out)
}

/// Invariant factors of `M` (positive, each dividing the next).
pub fn smith_invariants(m: &IntMat) -> Vec<Int> {
    let mut a = m.to_rows();
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut out = Vec::new();
    let mut t = 0;
    while t < nr.min(nc) {
        let pivot = (t..nr)
            .flat_map(|i| (t..nc).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j].is_zero())
            .min_by(|&(i, j), &(k, l)| a[i][j].abs().cmp(&a[k][l].abs()));
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..nr {
            let q = a[i][t].div_floor(&a[t][t]);
            row_axpy(&mut a, i, t, &q);
            if !a[i][t].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..nc {
            let q = a[t][j].div_floor(&a[t][t]);
            for row in a.iter_mut() {
                let s = row[t].clone();
                row[j] -= &q * s;
            }
            if !a[t][j].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        let p = a[t][t].clone();
        let bad = (t + 1..nr).find(|&i| (t + 1..nc).any(|j| !(&a[i][j] % &p).is_zero()));
        if let Some(i) = bad {
            let src = a[i].clone();
            for (x, y) in a[t].iter_mut().zip(src) {
                *x += y;
            }
            continue;
        }
        out.push(p.abs());
        t += 1;
    }
    out
}

pub fn int_rows_to_rat(rows: &[IntVec]) -> Vec<RatVec> {
    rows.iter().map(|r| to_rat_vec(r)).collect()
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(a: &mut [RatVec], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let k = a[i][c].clone();
                let src = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&src) {
                    *x -= &k * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `A x = b` exactly; free variables are set to zero.
pub fn solve_rat(a: &[RatVec], b: &[Rat], ncols: usize) -> Option<RatVec> {
    let mut aug: Vec<RatVec> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, ncols);
    for row in aug.iter().skip(pivots.len()) {
        if !row[ncols].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rat::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][ncols].clone();
    }
    Some(x)
}

pub fn rat_rank(rows: &[RatVec], ncols: usize) -> usize {
    let mut a = rows.to_vec();
    rref(&mut a, ncols).len()
}

pub fn int_rank(rows: &[IntVec], ncols: usize) -> usize {
    rat_rank(&int_rows_to_rat(rows), ncols)
}

pub fn rat_inverse(a: &[RatVec]) -> Option<Vec<RatVec>> {
    let n = a.len();
    let mut aug: Vec<RatVec> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if pivots.len() < n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Integer coordinates of `v` in the basis `rows`, if they exist.
pub fn integer_coordinates(rows: &[IntVec], v: &[Int]) -> Option<IntVec> {
    let ncols = rows.len();
    let dim = v.len();
    let a: Vec<RatVec> = (0..dim)
        .map(|i| rows.iter().map(|r| rat_int(&r[i])).collect())
        .collect();
    let x = solve_rat(&a, &to_rat_vec(v), ncols)?;
    if x.iter().all(|c| c.is_integer()) {
        Some(x.iter().map(|c| c.to_integer()).collect())
    } else {
        None
    }
}
