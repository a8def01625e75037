//! Exact dense linear algebra over the prime fields GF(2) and GF(3).
//!
//! Vectors are bit-packed. Over GF(2) a vector is a single bit plane; over
//! GF(3) an entry is stored in two planes, `1 -> (lo=1, hi=0)` and
//! `2 -> (lo=0, hi=1)`, so addition can be done word-parallel.
//!
//! Every subspace is kept in reduced row-echelon form, which makes bases
//! canonical: the same subspace always has the same basis, independent of
//! the order in which spanning vectors were supplied.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GflaError {
    #[error("unsupported characteristic {0}; only 2 and 3 are implemented")]
    UnsupportedPrime(u8),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subspace is not contained in the enclosing space")]
    NotSubspace,
    #[error("vector does not lie in the direct sum")]
    NotInSum,
    #[error("the two subspaces intersect nontrivially")]
    NotDirect,
}

pub type Result<T> = std::result::Result<T, GflaError>;

pub fn check_prime(p: u8) -> Result<()> {
    match p {
        2 | 3 => Ok(()),
        _ => Err(GflaError::UnsupportedPrime(p)),
    }
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

/// A vector over GF(p), p in {2, 3}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpVector {
    p: u8,
    len: usize,
    lo: Vec<u64>,
    // Empty when p == 2.
    hi: Vec<u64>,
}

impl FpVector {
    pub fn zero(p: u8, len: usize) -> Self {
        debug_assert!(p == 2 || p == 3);
        let w = words_for(len);
        FpVector {
            p,
            len,
            lo: vec![0; w],
            hi: if p == 3 { vec![0; w] } else { Vec::new() },
        }
    }

    /// Builds a vector from residues; entries are reduced mod `p`.
    pub fn from_entries(p: u8, entries: &[u8]) -> Result<Self> {
        check_prime(p)?;
        let mut v = FpVector::zero(p, entries.len());
        for (i, &e) in entries.iter().enumerate() {
            v.set(i, e % p);
        }
        Ok(v)
    }

    /// The `i`th unit vector.
    pub fn unit(p: u8, len: usize, i: usize) -> Self {
        let mut v = FpVector::zero(p, len);
        v.set(i, 1);
        v
    }

    #[inline]
    pub fn p(&self) -> u8 {
        self.p
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        let (w, b) = (i / 64, i % 64);
        let l = ((self.lo[w] >> b) & 1) as u8;
        if self.p == 2 {
            l
        } else {
            l | ((((self.hi[w] >> b) & 1) as u8) << 1)
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: u8) {
        debug_assert!(i < self.len);
        let value = value % self.p;
        let (w, b) = (i / 64, i % 64);
        let m = 1u64 << b;
        self.lo[w] &= !m;
        if self.p == 3 {
            self.hi[w] &= !m;
            if value == 2 {
                self.hi[w] |= m;
                return;
            }
        }
        if value == 1 {
            self.lo[w] |= m;
        }
    }

    /// Adds `value` to entry `i`.
    #[inline]
    pub fn add_at(&mut self, i: usize, value: u8) {
        let cur = self.get(i);
        self.set(i, (cur + value % self.p) % self.p);
    }

    pub fn entries(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.lo.iter().all(|&w| w == 0) && self.hi.iter().all(|&w| w == 0)
    }

    #[inline]
    fn nonzero_word(&self, w: usize) -> u64 {
        if self.p == 2 {
            self.lo[w]
        } else {
            self.lo[w] | self.hi[w]
        }
    }

    /// Indices of nonzero entries, increasing.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lo.len()).flat_map(move |w| {
            let mut bits = self.nonzero_word(w);
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        (0..self.lo.len()).find_map(|w| {
            let bits = self.nonzero_word(w);
            (bits != 0).then(|| w * 64 + bits.trailing_zeros() as usize)
        })
    }

    pub fn weight(&self) -> usize {
        (0..self.lo.len())
            .map(|w| self.nonzero_word(w).count_ones() as usize)
            .sum()
    }

    fn check_compatible(&self, other: &FpVector) {
        assert_eq!(self.p, other.p, "mixed characteristics");
        assert_eq!(self.len, other.len, "length mismatch");
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &FpVector) {
        self.check_compatible(other);
        if self.p == 2 {
            for (a, b) in self.lo.iter_mut().zip(&other.lo) {
                *a ^= *b;
            }
        } else {
            for w in 0..self.lo.len() {
                let (a1, a2) = (self.lo[w], self.hi[w]);
                let (b1, b2) = (other.lo[w], other.hi[w]);
                let t = (a1 | b2) ^ (a2 | b1);
                self.lo[w] = (a2 | b2) ^ t;
                self.hi[w] = (a1 | b1) ^ t;
            }
        }
    }

    /// `self -= other`.
    pub fn sub_assign(&mut self, other: &FpVector) {
        self.check_compatible(other);
        if self.p == 2 {
            self.add_assign(other);
        } else {
            for w in 0..self.lo.len() {
                let (a1, a2) = (self.lo[w], self.hi[w]);
                // -b swaps the planes.
                let (b1, b2) = (other.hi[w], other.lo[w]);
                let t = (a1 | b2) ^ (a2 | b1);
                self.lo[w] = (a2 | b2) ^ t;
                self.hi[w] = (a1 | b1) ^ t;
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: u8, other: &FpVector) {
        match c % self.p {
            0 => {}
            1 => self.add_assign(other),
            _ => self.sub_assign(other), // c == 2 == -1 in GF(3)
        }
    }

    /// `self *= c`.
    pub fn scale(&mut self, c: u8) {
        match c % self.p {
            0 => {
                self.lo.iter_mut().for_each(|w| *w = 0);
                self.hi.iter_mut().for_each(|w| *w = 0);
            }
            1 => {}
            _ => std::mem::swap(&mut self.lo, &mut self.hi),
        }
    }

    pub fn neg(&self) -> FpVector {
        let mut v = self.clone();
        if v.p == 3 {
            std::mem::swap(&mut v.lo, &mut v.hi);
        }
        v
    }

    pub fn sum(&self, other: &FpVector) -> FpVector {
        let mut v = self.clone();
        v.add_assign(other);
        v
    }

    pub fn difference(&self, other: &FpVector) -> FpVector {
        let mut v = self.clone();
        v.sub_assign(other);
        v
    }

    pub fn dot(&self, other: &FpVector) -> u8 {
        self.check_compatible(other);
        let s: usize = self
            .support()
            .map(|i| (self.get(i) * other.get(i)) as usize)
            .sum();
        (s % self.p as usize) as u8
    }
}

impl fmt::Debug for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}[", self.p)?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i))?;
        }
        write!(f, "]")
    }
}

impl PartialOrd for FpVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on the entry sequence.
impl Ord for FpVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.p
            .cmp(&other.p)
            .then(self.len.cmp(&other.len))
            .then_with(|| {
                for i in 0..self.len {
                    match self.get(i).cmp(&other.get(i)) {
                        Ordering::Equal => {}
                        o => return o,
                    }
                }
                Ordering::Equal
            })
    }
}

/// A dense row-major matrix over GF(p).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    p: u8,
    cols: usize,
    rows: Vec<FpVector>,
}

impl FpMatrix {
    pub fn zero(p: u8, rows: usize, cols: usize) -> Result<Self> {
        check_prime(p)?;
        Ok(FpMatrix {
            p,
            cols,
            rows: vec![FpVector::zero(p, cols); rows],
        })
    }

    pub fn identity(p: u8, size: usize) -> Result<Self> {
        let mut m = FpMatrix::zero(p, size, size)?;
        for i in 0..size {
            m.rows[i].set(i, 1);
        }
        Ok(m)
    }

    pub fn from_rows(p: u8, cols: usize, rows: Vec<FpVector>) -> Result<Self> {
        check_prime(p)?;
        for r in &rows {
            if r.p() != p {
                return Err(GflaError::UnsupportedPrime(r.p()));
            }
            if r.len() != cols {
                return Err(GflaError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Ok(FpMatrix { p, cols, rows })
    }

    pub fn from_entries(p: u8, entries: &[Vec<u8>]) -> Result<Self> {
        let cols = entries.first().map_or(0, Vec::len);
        let rows = entries
            .iter()
            .map(|r| FpVector::from_entries(p, r))
            .collect::<Result<Vec<_>>>()?;
        FpMatrix::from_rows(p, cols, rows)
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[FpVector] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.rows[r].set(c, v)
    }

    pub fn mul_vec(&self, v: &FpVector) -> FpVector {
        let mut out = FpVector::zero(self.p, self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            out.set(i, r.dot(v));
        }
        out
    }
}

/// Incremental reduced row-echelon form.
///
/// Rows are inserted one at a time; dependent rows are discarded as soon as
/// they reduce to zero, so the full constraint matrix never has to exist in
/// memory.
#[derive(Clone, Debug)]
pub struct EchelonBuilder {
    p: u8,
    cols: usize,
    rows: Vec<FpVector>,
    pivot_of_row: Vec<usize>,
    row_of_pivot: Vec<u32>,
    pivot_mask: Vec<u64>,
}

const NO_ROW: u32 = u32::MAX;

impl EchelonBuilder {
    pub fn new(p: u8, cols: usize) -> Result<Self> {
        check_prime(p)?;
        Ok(EchelonBuilder {
            p,
            cols,
            rows: Vec::new(),
            pivot_of_row: Vec::new(),
            row_of_pivot: vec![NO_ROW; cols],
            pivot_mask: vec![0; words_for(cols)],
        })
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Reduces `v` modulo the current row space, in place.
    pub fn reduce(&self, v: &mut FpVector) {
        debug_assert_eq!(v.len(), self.cols);
        for w in 0..self.pivot_mask.len() {
            let mut hits = v.nonzero_word(w) & self.pivot_mask[w];
            // Subtracting a pivot row only touches non-pivot columns and the
            // pivot itself, so a single pass over the initial hits suffices.
            while hits != 0 {
                let col = w * 64 + hits.trailing_zeros() as usize;
                hits &= hits - 1;
                let c = v.get(col);
                if c != 0 {
                    let r = self.row_of_pivot[col] as usize;
                    v.add_scaled(self.p - c, &self.rows[r]);
                }
            }
        }
    }

    /// Inserts a row; returns whether it increased the rank.
    pub fn insert(&mut self, mut v: FpVector) -> bool {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        self.reduce(&mut v);
        let Some(lead) = v.first_nonzero() else {
            return false;
        };
        if v.get(lead) != 1 {
            v.scale(v.get(lead)); // inverse of 2 in GF(3) is 2
        }
        for row in self.rows.iter_mut() {
            let c = row.get(lead);
            if c != 0 {
                row.add_scaled(self.p - c, &v);
            }
        }
        self.row_of_pivot[lead] = self.rows.len() as u32;
        self.pivot_mask[lead / 64] |= 1 << (lead % 64);
        self.pivot_of_row.push(lead);
        self.rows.push(v);
        true
    }

    pub fn is_in_span(&self, v: &FpVector) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    pub fn into_subspace(self) -> Subspace {
        let mut pairs: Vec<(usize, FpVector)> =
            self.pivot_of_row.into_iter().zip(self.rows).collect();
        pairs.sort_by_key(|(c, _)| *c);
        let (pivots, basis) = pairs.into_iter().unzip();
        Subspace {
            p: self.p,
            ambient: self.cols,
            pivots,
            basis,
        }
    }
}

/// A subspace of GF(p)^ambient with a reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    p: u8,
    ambient: usize,
    pivots: Vec<usize>,
    basis: Vec<FpVector>,
}

impl Subspace {
    pub fn zero(p: u8, ambient: usize) -> Result<Self> {
        Ok(EchelonBuilder::new(p, ambient)?.into_subspace())
    }

    pub fn full(p: u8, ambient: usize) -> Result<Self> {
        let mut b = EchelonBuilder::new(p, ambient)?;
        for i in 0..ambient {
            b.insert(FpVector::unit(p, ambient, i));
        }
        Ok(b.into_subspace())
    }

    /// Span of the given vectors.
    pub fn span<I: IntoIterator<Item = FpVector>>(p: u8, ambient: usize, vectors: I) -> Result<Self> {
        let mut b = EchelonBuilder::new(p, ambient)?;
        for v in vectors {
            if v.len() != ambient {
                return Err(GflaError::DimensionMismatch {
                    expected: ambient,
                    found: v.len(),
                });
            }
            b.insert(v);
        }
        Ok(b.into_subspace())
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FpVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Number of vectors, if it fits in a `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        (self.p as u128).checked_pow(self.dim() as u32)
    }

    fn builder(&self) -> EchelonBuilder {
        let mut b = EchelonBuilder::new(self.p, self.ambient).expect("checked prime");
        for (c, v) in self.pivots.iter().zip(&self.basis) {
            b.row_of_pivot[*c] = b.rows.len() as u32;
            b.pivot_mask[c / 64] |= 1 << (c % 64);
            b.pivot_of_row.push(*c);
            b.rows.push(v.clone());
        }
        b
    }

    /// Coordinates of `v` in the echelon basis, or `None` if `v` is outside.
    pub fn coordinates(&self, v: &FpVector) -> Option<Vec<u8>> {
        let coords: Vec<u8> = self.pivots.iter().map(|&c| v.get(c)).collect();
        (self.combine(&coords) == *v).then_some(coords)
    }

    /// The linear combination of basis vectors with the given coefficients.
    pub fn combine(&self, coords: &[u8]) -> FpVector {
        assert_eq!(coords.len(), self.dim());
        let mut v = FpVector::zero(self.p, self.ambient);
        for (c, b) in coords.iter().zip(&self.basis) {
            v.add_scaled(*c, b);
        }
        v
    }

    pub fn contains(&self, v: &FpVector) -> bool {
        v.len() == self.ambient && self.coordinates(v).is_some()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis.iter().all(|v| other.contains(v))
    }
}

/// Basis of `{v : Mv = 0}`.
pub fn nullspace(m: &FpMatrix) -> Subspace {
    nullspace_of_rows(m.p, m.cols, m.rows.iter().cloned()).expect("validated matrix")
}

/// Nullspace of a matrix supplied as a stream of rows.
pub fn nullspace_of_rows<I: IntoIterator<Item = FpVector>>(p: u8, cols: usize, rows: I) -> Result<Subspace> {
    let mut b = EchelonBuilder::new(p, cols)?;
    for r in rows {
        b.insert(r);
    }
    Ok(nullspace_of_echelon(b))
}

/// Nullspace of the row space accumulated in `b`.
pub fn nullspace_of_echelon(b: EchelonBuilder) -> Subspace {
    let p = b.p;
    let cols = b.cols;
    let rowspace = b.into_subspace();
    let mut is_pivot = vec![false; cols];
    for &c in &rowspace.pivots {
        is_pivot[c] = true;
    }
    let mut out = EchelonBuilder::new(p, cols).expect("checked prime");
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = FpVector::unit(p, cols, free);
        for (c, row) in rowspace.pivots.iter().zip(&rowspace.basis) {
            let e = row.get(free);
            if e != 0 {
                v.set(*c, p - e);
            }
        }
        out.insert(v);
    }
    out.into_subspace()
}

pub fn rank(m: &FpMatrix) -> usize {
    let mut b = EchelonBuilder::new(m.p, m.cols).expect("validated matrix");
    for r in &m.rows {
        b.insert(r.clone());
    }
    b.rank()
}

/// A complement `C` of `sub` inside `whole`, obtained by greedily extending
/// the echelon basis of `sub` with basis vectors of `whole`.
pub fn complement(sub: &Subspace, whole: &Subspace) -> Result<Subspace> {
    if sub.p != whole.p || sub.ambient != whole.ambient || !sub.is_subspace_of(whole) {
        return Err(GflaError::NotSubspace);
    }
    let mut acc = sub.builder();
    let mut chosen = Vec::new();
    for w in &whole.basis {
        if acc.insert(w.clone()) {
            chosen.push(w.clone());
        }
    }
    Subspace::span(whole.p, whole.ambient, chosen)
}

/// Splits vectors of `A ⊕ B` into their two components.
///
/// Construction row-reduces the concatenated bases while tracking the
/// combination that produced each echelon row; splitting is then a single
/// reduction.
#[derive(Clone, Debug)]
pub struct SumDecomposer {
    a: Subspace,
    b: Subspace,
    // Echelon rows of A ⊕ B (sorted by pivot) and, for each, its coordinates
    // in the concatenated basis [A | B].
    pivots: Vec<usize>,
    rows: Vec<FpVector>,
    tags: Vec<FpVector>,
}

impl SumDecomposer {
    pub fn new(a: &Subspace, b: &Subspace) -> Result<Self> {
        if a.p != b.p || a.ambient != b.ambient {
            return Err(GflaError::DimensionMismatch {
                expected: a.ambient,
                found: b.ambient,
            });
        }
        let p = a.p;
        let total = a.dim() + b.dim();
        let mut rows: Vec<FpVector> = Vec::new();
        let mut tags: Vec<FpVector> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        for (k, v) in a.basis.iter().chain(&b.basis).enumerate() {
            let mut v = v.clone();
            let mut t = FpVector::unit(p, total, k);
            for i in 0..rows.len() {
                let c = v.get(pivots[i]);
                if c != 0 {
                    v.add_scaled(p - c, &rows[i]);
                    t.add_scaled(p - c, &tags[i]);
                }
            }
            let Some(lead) = v.first_nonzero() else {
                return Err(GflaError::NotDirect);
            };
            let s = v.get(lead);
            if s != 1 {
                v.scale(s);
                t.scale(s);
            }
            for i in 0..rows.len() {
                let c = rows[i].get(lead);
                if c != 0 {
                    rows[i].add_scaled(p - c, &v);
                    let tv = t.clone();
                    tags[i].add_scaled(p - c, &tv);
                }
            }
            rows.push(v);
            tags.push(t);
            pivots.push(lead);
        }
        Ok(SumDecomposer {
            a: a.clone(),
            b: b.clone(),
            pivots,
            rows,
            tags,
        })
    }

    /// Coordinates of `v` in the concatenated basis `[A | B]`.
    pub fn coefficients(&self, v: &FpVector) -> Result<FpVector> {
        let p = self.a.p;
        let mut rem = v.clone();
        let mut coeff = FpVector::zero(p, self.a.dim() + self.b.dim());
        for i in 0..self.rows.len() {
            let c = rem.get(self.pivots[i]);
            if c != 0 {
                rem.add_scaled(p - c, &self.rows[i]);
                coeff.add_scaled(c, &self.tags[i]);
            }
        }
        if rem.is_zero() {
            Ok(coeff)
        } else {
            Err(GflaError::NotInSum)
        }
    }

    /// Coordinates of the `B`-component of `v` in `B`'s basis.
    pub fn b_coordinates(&self, v: &FpVector) -> Result<Vec<u8>> {
        let coeff = self.coefficients(v)?;
        let da = self.a.dim();
        Ok((0..self.b.dim()).map(|i| coeff.get(da + i)).collect())
    }

    pub fn split(&self, v: &FpVector) -> Result<(FpVector, FpVector)> {
        let coeff = self.coefficients(v)?;
        let da = self.a.dim();
        let ca: Vec<u8> = (0..da).map(|i| coeff.get(i)).collect();
        let a = self.a.combine(&ca);
        let b = v.difference(&a);
        Ok((a, b))
    }
}

/// The unique `(a, b)` with `a ∈ A`, `b ∈ B`, `v = a + b`.
pub fn decompose(v: &FpVector, a: &Subspace, b: &Subspace) -> Result<(FpVector, FpVector)> {
    SumDecomposer::new(a, b)?.split(v)
}

/// Accumulates affine equations `row · x = rhs` and returns one solution.
#[derive(Clone, Debug)]
pub struct AffineSystem {
    unknowns: usize,
    echelon: EchelonBuilder,
}

impl AffineSystem {
    pub fn new(p: u8, unknowns: usize) -> Result<Self> {
        Ok(AffineSystem {
            unknowns,
            echelon: EchelonBuilder::new(p, unknowns + 1)?,
        })
    }

    /// Adds the equation `sum(coeff_i * x_i) = rhs` given as sparse terms.
    pub fn add_equation(&mut self, terms: &[(usize, u8)], rhs: u8) {
        let p = self.echelon.p;
        let mut v = FpVector::zero(p, self.unknowns + 1);
        for &(i, c) in terms {
            v.add_at(i, c);
        }
        v.set(self.unknowns, rhs % p);
        self.echelon.insert(v);
    }

    /// A particular solution with all free variables zero, or `None` if the
    /// system is inconsistent.
    pub fn solve(self) -> Option<FpVector> {
        let n = self.unknowns;
        let p = self.echelon.p;
        let space = self.echelon.into_subspace();
        let mut x = FpVector::zero(p, n);
        for (c, row) in space.pivots.iter().zip(&space.basis) {
            if *c == n {
                return None;
            }
            x.set(*c, row.get(n));
        }
        Some(x)
    }
}
