//! Cocycles, Moufang cocycles and coboundaries of a loop with values in GF(p).
//!
//! A cocycle `f: K × K → GF(p)` is stored as a vector of length `|K|²`,
//! entry `(x, y)` at position `x·|K| + y` (0-based elements).

use thiserror::Error;

use crate::gfla::{self, EchelonBuilder, FpVector, GflaError, Subspace};
use crate::loopcore::{Elem, LoopError, LoopTable, SubloopSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CocycleError {
    #[error("tau(1) must be 0")]
    TauNotNormalized,
    #[error("cocycle is not normalized: f(1,x) or f(x,1) is nonzero")]
    NotNormalized,
    #[error("cocycle length {found} does not match |K|^2 = {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("a coboundary failed the Moufang cocycle system")]
    CoboundaryNotInMcoc,
    #[error("subloop is not central")]
    NotCentral,
    #[error("central subloop must be cyclic of prime order 2 or 3, found order {0}")]
    WrongOrder(usize),
    #[error(transparent)]
    Linear(#[from] GflaError),
    #[error(transparent)]
    Loop(#[from] LoopError),
}

pub type Result<T> = std::result::Result<T, CocycleError>;

/// Default number of Moufang equations generated per elimination block.
pub const DEFAULT_BLOCK: usize = 4096;

/// The fixed bijection `K × K → {0, …, |K|²−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairIndexer {
    n: usize,
}

impl PairIndexer {
    pub fn new(n: usize) -> Self {
        PairIndexer { n }
    }

    #[inline]
    pub fn index(&self, x: Elem, y: Elem) -> usize {
        x * self.n + y
    }

    #[inline]
    pub fn pair(&self, i: usize) -> (Elem, Elem) {
        (i / self.n, i % self.n)
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// A normalized cocycle `K × K → GF(p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cocycle {
    n: usize,
    values: FpVector,
}

impl Cocycle {
    pub fn zero(p: u8, n: usize) -> Self {
        Cocycle { n, values: FpVector::zero(p, n * n) }
    }

    /// Wraps a vector, checking `f(1,x) = f(x,1) = 0`.
    pub fn from_vector(n: usize, values: FpVector) -> Result<Self> {
        if values.len() != n * n {
            return Err(CocycleError::WrongLength { expected: n * n, found: values.len() });
        }
        if (0..n).any(|x| values.get(x) != 0 || values.get(x * n) != 0) {
            return Err(CocycleError::NotNormalized);
        }
        Ok(Cocycle { n, values })
    }

    pub fn from_fn<F: FnMut(Elem, Elem) -> u8>(p: u8, n: usize, mut f: F) -> Result<Self> {
        gfla::check_prime(p)?;
        let mut v = FpVector::zero(p, n * n);
        for x in 0..n {
            for y in 0..n {
                v.set(x * n + y, f(x, y) % p);
            }
        }
        Cocycle::from_vector(n, v)
    }

    #[inline]
    pub fn get(&self, x: Elem, y: Elem) -> u8 {
        self.values.get(x * self.n + y)
    }

    pub fn p(&self) -> u8 {
        self.values.p()
    }

    pub fn base_order(&self) -> usize {
        self.n
    }

    pub fn vector(&self) -> &FpVector {
        &self.values
    }

    pub fn into_vector(self) -> FpVector {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_zero()
    }

    pub fn sum(&self, other: &Cocycle) -> Cocycle {
        Cocycle { n: self.n, values: self.values.sum(&other.values) }
    }

    pub fn difference(&self, other: &Cocycle) -> Cocycle {
        Cocycle { n: self.n, values: self.values.difference(&other.values) }
    }
}

/// The coboundary `δτ(x,y) = τ(xy) − τ(x) − τ(y)`.
pub fn coboundary_of(k: &LoopTable, p: u8, tau: &[u8]) -> Result<Cocycle> {
    gfla::check_prime(p)?;
    let n = k.order();
    if tau.len() != n {
        return Err(CocycleError::WrongLength { expected: n, found: tau.len() });
    }
    if !tau[0].is_multiple_of(p) {
        return Err(CocycleError::TauNotNormalized);
    }
    Cocycle::from_fn(p, n, |x, y| {
        let v = tau[k.mul(x, y)] as i32 - tau[x] as i32 - tau[y] as i32;
        v.rem_euclid(p as i32) as u8
    })
}

/// Span of `{δτ_x : x ≠ 1}` where `τ_x` is the indicator of `x`.
pub fn coboundary_space(k: &LoopTable, p: u8) -> Result<Subspace> {
    let n = k.order();
    let mut b = EchelonBuilder::new(p, n * n)?;
    let mut tau = vec![0u8; n];
    for x in 1..n {
        tau[x] = 1;
        b.insert(coboundary_of(k, p, &tau)?.into_vector());
        tau[x] = 0;
    }
    Ok(b.into_subspace())
}

fn sparse_row(p: u8, len: usize, terms: &[(usize, u8)]) -> FpVector {
    let mut v = FpVector::zero(p, len);
    for &(i, c) in terms {
        v.add_at(i, c);
    }
    v
}

fn normalization_rows(p: u8, n: usize) -> impl Iterator<Item = FpVector> {
    let len = n * n;
    (0..n).flat_map(move |x| [FpVector::unit(p, len, x), FpVector::unit(p, len, x * n)])
}

/// Solves the normalization equations together with one equation per
/// triple `(x, y, z)`, fed to the eliminator in blocks of `block` rows.
fn solve_triple_system<F>(k: &LoopTable, p: u8, block: usize, mut row: F) -> Result<Subspace>
where
    F: FnMut(Elem, Elem, Elem, &mut Vec<(usize, u8)>),
{
    let n = k.order();
    let len = n * n;
    let mut b = EchelonBuilder::new(p, len)?;
    for r in normalization_rows(p, n) {
        b.insert(r);
    }
    let block = block.max(1);
    let mut pending: Vec<FpVector> = Vec::with_capacity(block.min(n * n * n));
    let mut terms = Vec::with_capacity(6);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                terms.clear();
                row(x, y, z, &mut terms);
                pending.push(sparse_row(p, len, &terms));
                if pending.len() == block {
                    for r in pending.drain(..) {
                        b.insert(r);
                    }
                }
            }
        }
    }
    for r in pending {
        b.insert(r);
    }
    Ok(gfla::nullspace_of_echelon(b))
}

/// The Moufang cocycles of `K`: normalized `f` with
/// `f(xy,zx) + f(x,y) + f(z,x) = f(x,(yz)x) + f(yz,x) + f(y,z)`.
pub fn moufang_cocycle_space(k: &LoopTable, p: u8) -> Result<Subspace> {
    moufang_cocycle_space_blocked(k, p, DEFAULT_BLOCK)
}

pub fn moufang_cocycle_space_blocked(k: &LoopTable, p: u8, block: usize) -> Result<Subspace> {
    let ix = PairIndexer::new(k.order());
    let m = p - 1;
    solve_triple_system(k, p, block, |x, y, z, t| {
        let xy = k.mul(x, y);
        let zx = k.mul(z, x);
        let yz = k.mul(y, z);
        let yzx = k.mul(yz, x);
        t.extend_from_slice(&[
            (ix.index(xy, zx), 1),
            (ix.index(x, y), 1),
            (ix.index(z, x), 1),
            (ix.index(x, yzx), m),
            (ix.index(yz, x), m),
            (ix.index(y, z), m),
        ]);
    })
}

/// Group cocycles: `f(xy,z) + f(x,y) = f(x,yz) + f(y,z)`.
pub fn group_cocycle_space(k: &LoopTable, p: u8) -> Result<Subspace> {
    let ix = PairIndexer::new(k.order());
    let m = p - 1;
    solve_triple_system(k, p, DEFAULT_BLOCK, |x, y, z, t| {
        t.extend_from_slice(&[
            (ix.index(k.mul(x, y), z), 1),
            (ix.index(x, y), 1),
            (ix.index(x, k.mul(y, z)), m),
            (ix.index(y, z), m),
        ]);
    })
}

pub fn is_group_cocycle(k: &LoopTable, f: &Cocycle) -> bool {
    let n = k.order();
    let p = f.p();
    (0..n).all(|x| {
        (0..n).all(|y| {
            let xy = k.mul(x, y);
            (0..n).all(|z| {
                (f.get(xy, z) + f.get(x, y)) % p == (f.get(x, k.mul(y, z)) + f.get(y, z)) % p
            })
        })
    })
}

/// Direct check of the Moufang cocycle identity.
pub fn is_moufang_cocycle(k: &LoopTable, f: &Cocycle) -> bool {
    let n = k.order();
    let p = f.p();
    (0..n).all(|x| {
        (0..n).all(|y| {
            let xy = k.mul(x, y);
            (0..n).all(|z| {
                let yz = k.mul(y, z);
                let lhs = f.get(xy, k.mul(z, x)) + f.get(x, y) + f.get(z, x);
                let rhs = f.get(x, k.mul(yz, x)) + f.get(yz, x) + f.get(y, z);
                lhs % p == rhs % p
            })
        })
    })
}

/// Moufang cocycles, coboundaries, and a fixed complement of the latter.
#[derive(Clone, Debug)]
pub struct CocycleSpaces {
    pub p: u8,
    pub n: usize,
    pub mcoc: Subspace,
    pub cob: Subspace,
    pub comp: Subspace,
}

impl CocycleSpaces {
    /// Cocycle of `comp` with the given coordinates.
    pub fn comp_cocycle(&self, coords: &[u8]) -> Cocycle {
        Cocycle { n: self.n, values: self.comp.combine(coords) }
    }
}

pub fn build_spaces(k: &LoopTable, p: u8) -> Result<CocycleSpaces> {
    let mcoc = moufang_cocycle_space(k, p)?;
    let cob = coboundary_space(k, p)?;
    if !cob.is_subspace_of(&mcoc) {
        return Err(CocycleError::CoboundaryNotInMcoc);
    }
    let comp = gfla::complement(&cob, &mcoc)?;
    Ok(CocycleSpaces { p, n: k.order(), mcoc, cob, comp })
}

/// Recovers `K = Q/Z` and a cocycle `f` with `E(K, GF(p), f) ≅ Q`.
///
/// `Z` is identified with GF(p) through its least non-identity element `z`
/// (`z^a ↦ a`); the section picks the least element of every coset.
pub fn cocycle_from_extension(q: &LoopTable, z: &SubloopSet) -> Result<(LoopTable, Cocycle)> {
    let p = z.len();
    if p != 2 && p != 3 {
        return Err(CocycleError::WrongOrder(p));
    }
    if !q.order().is_multiple_of(p) || q.as_subloop(z.members()).is_none() {
        return Err(CocycleError::WrongOrder(p));
    }
    if !z.iter().all(|e| q.is_central(e)) {
        return Err(CocycleError::NotCentral);
    }
    let gen = z.iter().find(|&e| e != 0).expect("order > 1");
    let mut log = vec![u8::MAX; q.order()];
    let mut pow = 0;
    for a in 0..p {
        log[pow] = a as u8;
        pow = q.mul(pow, gen);
    }
    let (k, coset) = q.quotient_loop(z)?;
    let n = k.order();
    let mut section = vec![usize::MAX; n];
    for x in 0..q.order() {
        if section[coset[x]] == usize::MAX {
            section[coset[x]] = x;
        }
    }
    let f = Cocycle::from_fn(p as u8, n, |x, y| {
        let prod = q.mul(section[x], section[y]);
        let a = q.ldiv(section[k.mul(x, y)], prod);
        log[a]
    })?;
    Ok((k, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extend::{central_extension, ExtensionSpec};
    use crate::loopcore::tests::{dihedral, quaternion};

    #[test]
    fn coboundary_basics() {
        let k = LoopTable::cyclic(4);
        assert!(coboundary_of(&k, 2, &[0; 4]).unwrap().is_zero());
        // homomorphism C4 -> GF(2): x mod 2
        assert!(coboundary_of(&k, 2, &[0, 1, 0, 1]).unwrap().is_zero());
        assert_eq!(coboundary_of(&k, 2, &[1, 0, 0, 0]), Err(CocycleError::TauNotNormalized));
        let d = coboundary_of(&k, 2, &[0, 0, 1, 0]).unwrap();
        assert!(coboundary_space(&k, 2).unwrap().contains(d.vector()));
    }

    #[test]
    fn coboundary_dimension_cyclic_p() {
        // d = 1 for a cyclic group of order p
        for p in [2u8, 3] {
            let k = LoopTable::cyclic(p as usize);
            assert_eq!(coboundary_space(&k, p).unwrap().dim(), p as usize - 2);
        }
    }

    #[test]
    fn small_dimensions_respect_bounds() {
        for k in [LoopTable::elementary_abelian(2, 3), dihedral(4), quaternion(), LoopTable::cyclic(8)] {
            let s = build_spaces(&k, 2).unwrap();
            let n = k.order();
            assert!(s.mcoc.dim() <= n * n - 2 * n + 1);
            assert_eq!(s.cob.dim(), n - 1 - k.min_generators());
            assert_eq!(s.cob.dim() + s.comp.dim(), s.mcoc.dim());
            for v in s.mcoc.basis() {
                let f = Cocycle::from_vector(n, v.clone()).unwrap();
                assert!(is_moufang_cocycle(&k, &f));
            }
        }
    }

    #[test]
    fn blocking_does_not_change_the_space() {
        let k = quaternion();
        let a = moufang_cocycle_space_blocked(&k, 2, 1).unwrap();
        let b = moufang_cocycle_space_blocked(&k, 2, 100_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn group_cocycles_contain_coboundaries() {
        let k = dihedral(4);
        let g = group_cocycle_space(&k, 2).unwrap();
        let cob = coboundary_space(&k, 2).unwrap();
        assert!(cob.is_subspace_of(&g));
        assert!(is_group_cocycle(&k, &Cocycle::zero(2, 8)));
        for v in cob.basis() {
            assert!(is_group_cocycle(&k, &Cocycle::from_vector(8, v.clone()).unwrap()));
        }
    }

    #[test]
    fn extraction_round_trip_exact() {
        let k = dihedral(4);
        let s = build_spaces(&k, 2).unwrap();
        for v in s.mcoc.basis().iter().take(5) {
            let g = Cocycle::from_vector(8, v.clone()).unwrap();
            let q = central_extension(&ExtensionSpec::new(k.clone(), 2, g.clone()).unwrap()).unwrap();
            let fiber = q.subloop_closure([1]);
            let (k2, f) = cocycle_from_extension(&q, &fiber).unwrap();
            assert_eq!(k2, k);
            assert_eq!(f, g);
        }
    }

    #[test]
    fn extraction_from_direct_product_is_coboundary() {
        let k = quaternion();
        let q = k.direct_product(&LoopTable::cyclic(2));
        // Z = {(1,0),(1,1)} = {0, 1}
        let z = q.subloop_closure([1]);
        let (k2, f) = cocycle_from_extension(&q, &z).unwrap();
        assert_eq!(k2, k);
        assert!(coboundary_space(&k, 2).unwrap().contains(f.vector()));
    }

    #[test]
    fn extraction_errors() {
        let d8 = dihedral(4);
        // a reflection subgroup is not central
        let refl = d8.subloop_closure([4]);
        assert_eq!(cocycle_from_extension(&d8, &refl).unwrap_err(), CocycleError::NotCentral);
        let big = d8.subloop_closure([1]);
        assert_eq!(cocycle_from_extension(&d8, &big).unwrap_err(), CocycleError::WrongOrder(4));
    }
}
