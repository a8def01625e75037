//! Finite loops as multiplication tables.
//!
//! Elements are stored 0-based internally, with element `0` the neutral
//! element. The textual formats and the Python bindings use the 1-based
//! convention (`1` neutral); conversion happens at those boundaries only.

use std::fmt;

use thiserror::Error;

/// 0-based element index.
pub type Elem = usize;

/// Largest supported order; subsets are fixed-size bitsets.
pub const MAX_ORDER: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoopError {
    #[error("table is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("empty table")]
    Empty,
    #[error("order {0} exceeds the supported maximum of {MAX_ORDER}")]
    TooLarge(usize),
    #[error("entry {value} at ({row}, {col}) is outside 1..={n}")]
    OutOfRange { row: usize, col: usize, value: usize, n: usize },
    #[error("{kind} {index} is not a permutation")]
    NotQuasigroup { kind: &'static str, index: usize },
    #[error("element 1 is not neutral")]
    NoNeutral,
    #[error("subset is not a normal subloop")]
    NotNormal,
    #[error("element {0} does not have a well-defined order (not power-associative)")]
    NotPowerAssociative(usize),
    #[error("permutation is invalid or does not fix the identity")]
    BadPermutation,
}

/// A fixed-capacity bitset over the elements of a loop.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ElemSet {
    bits: [u64; MAX_ORDER / 64],
}

impl ElemSet {
    pub fn new() -> Self {
        ElemSet::default()
    }

    pub fn full(n: usize) -> Self {
        let mut s = ElemSet::new();
        for x in 0..n {
            s.insert(x);
        }
        s
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        (self.bits[x >> 6] >> (x & 63)) & 1 == 1
    }

    /// Returns whether `x` was newly inserted.
    #[inline]
    pub fn insert(&mut self, x: Elem) -> bool {
        let before = self.contains(x);
        self.bits[x >> 6] |= 1 << (x & 63);
        !before
    }

    #[inline]
    pub fn remove(&mut self, x: Elem) {
        self.bits[x >> 6] &= !(1 << (x & 63));
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.bits.len()).flat_map(move |w| {
            let mut b = self.bits[w];
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let i = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(w * 64 + i)
                }
            })
        })
    }

    pub fn is_subset(&self, other: &ElemSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

impl FromIterator<Elem> for ElemSet {
    fn from_iter<I: IntoIterator<Item = Elem>>(iter: I) -> Self {
        let mut s = ElemSet::new();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A subloop, given by its member set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SubloopSet {
    members: ElemSet,
}

impl SubloopSet {
    pub fn members(&self) -> &ElemSet {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.members.contains(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        self.members.iter()
    }
}

/// A validated finite loop.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LoopTable {
    n: usize,
    mul: Vec<u16>,
    // ldiv[x * n + y] = x \ y, rdiv[x * n + y] = y / x
    ldiv: Vec<u16>,
    rdiv: Vec<u16>,
}

impl fmt::Debug for LoopTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LoopTable(n={})", self.n)?;
        for x in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|y| (self.mul(x, y) + 1).to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Validates a 1-based table (element `1` neutral).
pub fn validate_loop(rows: &[Vec<usize>]) -> Result<LoopTable, LoopError> {
    let n = rows.len();
    if n == 0 {
        return Err(LoopError::Empty);
    }
    let mut flat = Vec::with_capacity(n * n);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(LoopError::NotSquare { row: r + 1, len: row.len(), n });
        }
        for (c, &v) in row.iter().enumerate() {
            if v == 0 || v > n {
                return Err(LoopError::OutOfRange { row: r + 1, col: c + 1, value: v, n });
            }
            flat.push(v - 1);
        }
    }
    LoopTable::from_zero_based(n, flat)
}

impl LoopTable {
    /// Builds a loop from a row-major 0-based table, validating it.
    pub fn from_zero_based(n: usize, table: Vec<usize>) -> Result<Self, LoopError> {
        if n == 0 {
            return Err(LoopError::Empty);
        }
        if n > MAX_ORDER {
            return Err(LoopError::TooLarge(n));
        }
        if table.len() != n * n {
            return Err(LoopError::NotSquare { row: table.len() / n.max(1), len: table.len(), n });
        }
        let mut ldiv = vec![u16::MAX; n * n];
        let mut rdiv = vec![u16::MAX; n * n];
        for x in 0..n {
            for y in 0..n {
                let v = table[x * n + y];
                if v >= n {
                    return Err(LoopError::OutOfRange { row: x + 1, col: y + 1, value: v + 1, n });
                }
                // row x is a permutation iff every x\v is defined exactly once
                if ldiv[x * n + v] != u16::MAX {
                    return Err(LoopError::NotQuasigroup { kind: "row", index: x + 1 });
                }
                ldiv[x * n + v] = y as u16;
                if rdiv[y * n + v] != u16::MAX {
                    return Err(LoopError::NotQuasigroup { kind: "column", index: y + 1 });
                }
                rdiv[y * n + v] = x as u16;
            }
        }
        for x in 0..n {
            if table[x] != x || table[x * n] != x {
                return Err(LoopError::NoNeutral);
            }
        }
        Ok(LoopTable {
            n,
            mul: table.into_iter().map(|v| v as u16).collect(),
            ldiv,
            rdiv,
        })
    }

    /// Builds a loop from a closure `(x, y) -> xy` on 0-based elements.
    pub fn from_fn<F: FnMut(Elem, Elem) -> Elem>(n: usize, mut f: F) -> Result<Self, LoopError> {
        let mut t = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                t.push(f(x, y));
            }
        }
        LoopTable::from_zero_based(n, t)
    }

    /// The cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Self {
        LoopTable::from_fn(n, |x, y| (x + y) % n).expect("cyclic group")
    }

    /// The trivial loop.
    pub fn trivial() -> Self {
        LoopTable::cyclic(1)
    }

    /// The elementary abelian group of order `p^d`, elements encoded in base `p`.
    pub fn elementary_abelian(p: usize, d: u32) -> Self {
        let n = p.pow(d);
        LoopTable::from_fn(n, |x, y| {
            let (mut a, mut b, mut out, mut scale) = (x, y, 0, 1);
            for _ in 0..d {
                out += ((a % p + b % p) % p) * scale;
                a /= p;
                b /= p;
                scale *= p;
            }
            out
        })
        .expect("elementary abelian group")
    }

    /// Direct product; `(a, b)` is encoded as `a * |other| + b`.
    pub fn direct_product(&self, other: &LoopTable) -> Self {
        let m = other.n;
        LoopTable::from_fn(self.n * m, |x, y| {
            self.mul(x / m, y / m) * m + other.mul(x % m, y % m)
        })
        .expect("direct product of loops")
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        self.mul[x * self.n + y] as usize
    }

    /// `x \ y`, the unique `z` with `xz = y`.
    #[inline]
    pub fn ldiv(&self, x: Elem, y: Elem) -> Elem {
        self.ldiv[x * self.n + y] as usize
    }

    /// `y / x`, the unique `z` with `zx = y`.
    #[inline]
    pub fn rdiv(&self, y: Elem, x: Elem) -> Elem {
        self.rdiv[x * self.n + y] as usize
    }

    /// Right inverse `x \ 1`; equals the left inverse in Moufang loops.
    #[inline]
    pub fn inverse(&self, x: Elem) -> Elem {
        self.ldiv(x, 0)
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.n
    }

    /// Rows as 1-based indices.
    pub fn rows_one_based(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|x| (0..self.n).map(|y| self.mul(x, y) + 1).collect())
            .collect()
    }

    pub fn table_zero_based(&self) -> Vec<usize> {
        self.mul.iter().map(|&v| v as usize).collect()
    }

    /// Relabels elements: `perm[old] = new`. `perm` must fix `0`.
    pub fn relabel(&self, perm: &[Elem]) -> Result<LoopTable, LoopError> {
        let n = self.n;
        if perm.len() != n || perm[0] != 0 || perm.iter().copied().collect::<ElemSet>().len() != n
            || perm.iter().any(|&v| v >= n)
        {
            return Err(LoopError::BadPermutation);
        }
        let mut t = vec![0; n * n];
        for x in 0..n {
            for y in 0..n {
                t[perm[x] * n + perm[y]] = perm[self.mul(x, y)];
            }
        }
        LoopTable::from_zero_based(n, t)
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.n).all(|x| (x + 1..self.n).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    pub fn is_associative(&self) -> bool {
        let n = self.n;
        for x in 1..n {
            for y in 1..n {
                let xy = self.mul(x, y);
                for z in 1..n {
                    if self.mul(xy, z) != self.mul(x, self.mul(y, z)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Checks `(xy)(zx) = x((yz)x)` for all triples.
    pub fn is_moufang(&self) -> bool {
        let n = self.n;
        for x in 1..n {
            for y in 1..n {
                let xy = self.mul(x, y);
                for z in 1..n {
                    let lhs = self.mul(xy, self.mul(z, x));
                    let rhs = self.mul(x, self.mul(self.mul(y, z), x));
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether `z` commutes and associates with everything.
    pub fn is_central(&self, z: Elem) -> bool {
        let n = self.n;
        for x in 0..n {
            if self.mul(z, x) != self.mul(x, z) {
                return false;
            }
        }
        for x in 0..n {
            let zx = self.mul(z, x);
            let xz = self.mul(x, z);
            for y in 0..n {
                let xy = self.mul(x, y);
                if self.mul(z, xy) != self.mul(zx, y)
                    || self.mul(x, self.mul(z, y)) != self.mul(xz, y)
                    || self.mul(x, self.mul(y, z)) != self.mul(xy, z)
                {
                    return false;
                }
            }
        }
        true
    }

    pub fn center(&self) -> SubloopSet {
        SubloopSet {
            members: (0..self.n).filter(|&z| self.is_central(z)).collect(),
        }
    }

    /// Smallest subloop containing `seed` and the identity.
    ///
    /// In a finite loop a multiplicatively closed subset is automatically
    /// closed under both divisions, so a product worklist suffices.
    pub fn subloop_closure<I: IntoIterator<Item = Elem>>(&self, seed: I) -> SubloopSet {
        let mut set = ElemSet::new();
        set.insert(0);
        let mut list = vec![0];
        let new: Vec<Elem> = seed.into_iter().collect();
        self.close_into(&mut set, &mut list, &new);
        SubloopSet { members: set }
    }

    /// Extends the closed set (`set`, `list`) by `new` elements and closes
    /// it again. Appends newly reached elements to `list` in discovery order.
    pub fn close_into(&self, set: &mut ElemSet, list: &mut Vec<Elem>, new: &[Elem]) {
        let mut head = list.len();
        for &x in new {
            if set.insert(x) {
                list.push(x);
            }
        }
        while head < list.len() {
            let u = list[head];
            head += 1;
            let mut i = 0;
            while i < list.len() {
                let s = list[i];
                i += 1;
                for w in [self.mul(u, s), self.mul(s, u)] {
                    if set.insert(w) {
                        list.push(w);
                    }
                }
            }
        }
    }

    /// Whether some set of at most `k` elements generates the loop.
    pub fn generated_by_at_most(&self, k: usize) -> bool {
        if self.n == 1 {
            return true;
        }
        let mut set = ElemSet::new();
        set.insert(0);
        self.search_generators(set, vec![0], 1, k)
    }

    // Increasing tuples whose elements each lie outside the subloop generated
    // by their predecessors; every minimum-size generating set has this form.
    fn search_generators(&self, set: ElemSet, list: Vec<Elem>, from: Elem, k: usize) -> bool {
        if list.len() == self.n {
            return true;
        }
        if k == 0 {
            return false;
        }
        for x in from..self.n {
            if set.contains(x) {
                continue;
            }
            let mut s = set;
            let mut l = list.clone();
            self.close_into(&mut s, &mut l, &[x]);
            if l.len() == self.n || self.search_generators(s, l, x + 1, k - 1) {
                return true;
            }
        }
        false
    }

    /// Greedy irredundant generating set: repeatedly adds the least element
    /// outside the current closure.
    pub fn greedy_generators(&self) -> Vec<Elem> {
        let mut set = ElemSet::new();
        set.insert(0);
        let mut list = vec![0];
        let mut gens = Vec::new();
        while list.len() < self.n {
            let x = (0..self.n).find(|&x| !set.contains(x)).expect("proper subloop");
            gens.push(x);
            self.close_into(&mut set, &mut list, &[x]);
        }
        gens
    }

    /// Size of a smallest generating set.
    pub fn min_generators(&self) -> usize {
        let mut best = self.greedy_generators().len();
        while best > 0 && self.generated_by_at_most(best - 1) {
            best -= 1;
        }
        best
    }

    /// Invariance of `s` under the inner mappings
    /// `R_{xy}^{-1} R_y R_x`, `L_{yx}^{-1} L_y L_x` and `L_x^{-1} R_x`.
    pub fn is_normal(&self, s: &SubloopSet) -> bool {
        let n = self.n;
        let members: Vec<Elem> = s.iter().collect();
        for x in 0..n {
            for &m in &members {
                if !s.contains(self.ldiv(x, self.mul(m, x))) {
                    return false;
                }
            }
            for y in 0..n {
                let xy = self.mul(x, y);
                let yx = self.mul(y, x);
                for &m in &members {
                    let r = self.rdiv(self.mul(self.mul(m, x), y), xy);
                    let l = self.ldiv(yx, self.mul(y, self.mul(x, m)));
                    if !s.contains(r) || !s.contains(l) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether `set` is closed under multiplication (hence a subloop).
    pub fn as_subloop(&self, set: &ElemSet) -> Option<SubloopSet> {
        if !set.contains(0) {
            return None;
        }
        let m: Vec<Elem> = set.iter().collect();
        for &a in &m {
            for &b in &m {
                if !set.contains(self.mul(a, b)) {
                    return None;
                }
            }
        }
        Some(SubloopSet { members: *set })
    }

    /// The quotient `Q/S` and the map element -> coset. Cosets are numbered
    /// by their least member, so the coset of the identity is `0`.
    pub fn quotient_loop(&self, s: &SubloopSet) -> Result<(LoopTable, Vec<Elem>), LoopError> {
        if !self.is_normal(s) {
            return Err(LoopError::NotNormal);
        }
        let n = self.n;
        let mut coset = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for x in 0..n {
            if coset[x] != usize::MAX {
                continue;
            }
            let id = reps.len();
            reps.push(x);
            for m in s.iter() {
                coset[self.mul(x, m)] = id;
            }
        }
        let k = reps.len();
        let q = LoopTable::from_fn(k, |a, b| coset[self.mul(reps[a], reps[b])])?;
        Ok((q, coset))
    }

    /// Order of every element, computed by repeated multiplication from both
    /// sides; fails if the two disagree.
    pub fn element_orders(&self) -> Result<Vec<usize>, LoopError> {
        (0..self.n).map(|x| self.element_order(x)).collect()
    }

    pub fn element_order(&self, x: Elem) -> Result<usize, LoopError> {
        let (mut left, mut right) = (x, x);
        let mut k = 1;
        while left != 0 {
            left = self.mul(left, x);
            right = self.mul(x, right);
            k += 1;
            if left != right || k > self.n {
                return Err(LoopError::NotPowerAssociative(x + 1));
            }
        }
        Ok(k)
    }

    /// Whether the loop is an elementary abelian `p`-group.
    pub fn is_elementary_abelian(&self, p: usize) -> bool {
        let mut m = self.n;
        while m > 1 && m.is_multiple_of(p) {
            m /= p;
        }
        m == 1
            && self.is_commutative()
            && self.is_associative()
            && (1..self.n).all(|x| self.element_order(x) == Ok(p))
    }
}
