//! Central extensions `E(K, GF(p), f)` as explicit tables.

use thiserror::Error;

use crate::cocycles::{self, Cocycle, CocycleError};
use crate::gfla::{self, GflaError, Subspace};
use crate::loopcore::{LoopError, LoopTable, SubloopSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtendError {
    #[error("cocycle is defined on a loop of order {found}, base has order {expected}")]
    BaseMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Linear(#[from] GflaError),
    #[error(transparent)]
    Loop(#[from] LoopError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionSpec {
    pub base: LoopTable,
    pub p: u8,
    pub f: Cocycle,
}

impl ExtensionSpec {
    pub fn new(base: LoopTable, p: u8, f: Cocycle) -> Result<Self, ExtendError> {
        gfla::check_prime(p)?;
        if f.base_order() != base.order() {
            return Err(ExtendError::BaseMismatch { expected: base.order(), found: f.base_order() });
        }
        if f.p() != p {
            return Err(GflaError::UnsupportedPrime(f.p()).into());
        }
        // re-check normalization; Cocycle guarantees it, but specs can be
        // assembled from deserialized parts
        Cocycle::from_vector(base.order(), f.vector().clone())?;
        Ok(ExtensionSpec { base, p, f })
    }
}

/// Index of `(x, a)` in the extension: `x·p + a` (0-based), so `(1, 0)` is
/// the identity and the central fiber is `{0, …, p−1}`.
#[inline]
pub fn pair_index(p: usize, x: usize, a: usize) -> usize {
    x * p + a
}

/// The loop on `K × GF(p)` with `(x,a)(y,b) = (xy, a + b + f(x,y))`.
pub fn central_extension(spec: &ExtensionSpec) -> Result<LoopTable, ExtendError> {
    let k = &spec.base;
    let p = spec.p as usize;
    let n = k.order();
    let mut t = Vec::with_capacity(n * n * p * p);
    for x in 0..n {
        for a in 0..p {
            for y in 0..n {
                let xy = k.mul(x, y);
                let fxy = spec.f.get(x, y) as usize;
                for b in 0..p {
                    t.push(pair_index(p, xy, (a + b + fxy) % p));
                }
            }
        }
    }
    Ok(LoopTable::from_zero_based(n * p, t)?)
}

/// The central fiber `{(1, a)}` of an extension by GF(p).
pub fn fiber(q: &LoopTable, p: u8) -> SubloopSet {
    q.subloop_closure(0..p as usize)
}

/// Whether `g − f` is a coboundary, which makes the two extensions isomorphic.
pub fn equivalent_extension_check(k: &LoopTable, p: u8, f: &Cocycle, g: &Cocycle) -> Result<bool, ExtendError> {
    let cob = cocycles::coboundary_space(k, p)?;
    Ok(equivalent_modulo(&cob, f, g))
}

pub fn equivalent_modulo(cob: &Subspace, f: &Cocycle, g: &Cocycle) -> bool {
    cob.contains(g.difference(f).vector())
}

/// A base is prunable when it is generated by at most two elements; every
/// central extension of such a Moufang loop is then a group.
pub fn is_prunable_base(k: &LoopTable) -> bool {
    k.generated_by_at_most(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::{build_spaces, coboundary_of, group_cocycle_space, is_group_cocycle};
    use crate::loopcore::tests::{dihedral, quaternion};

    #[test]
    fn zero_cocycle_gives_direct_product() {
        let k = dihedral(4);
        let e = central_extension(&ExtensionSpec::new(k.clone(), 2, Cocycle::zero(2, 8)).unwrap()).unwrap();
        assert_eq!(e, k.direct_product(&LoopTable::cyclic(2)));
        let e3 = central_extension(&ExtensionSpec::new(LoopTable::cyclic(3), 3, Cocycle::zero(3, 3)).unwrap()).unwrap();
        assert_eq!(e3, LoopTable::cyclic(3).direct_product(&LoopTable::cyclic(3)));
    }

    #[test]
    fn moufang_cocycles_give_moufang_loops() {
        let k = LoopTable::elementary_abelian(2, 3);
        let s = build_spaces(&k, 2).unwrap();
        let mut any_nonassoc = false;
        for v in s.comp.basis() {
            let f = Cocycle::from_vector(8, v.clone()).unwrap();
            let q = central_extension(&ExtensionSpec::new(k.clone(), 2, f).unwrap()).unwrap();
            assert!(q.is_moufang());
            any_nonassoc |= !q.is_associative();
            let z = fiber(&q, 2);
            assert!(z.iter().all(|e| q.is_central(e)));
            assert_eq!(q.quotient_loop(&z).unwrap().0, k);
        }
        assert!(any_nonassoc, "EA(8) has nonassociative code-loop extensions of order 16");
    }

    #[test]
    fn non_moufang_cocycle_breaks_moufang() {
        let k = LoopTable::elementary_abelian(2, 2);
        let s = build_spaces(&k, 2).unwrap();
        let mut found = 0;
        for bits in 0u32..(1 << 9) {
            // free entries are the pairs (x, y) with x, y != 0
            let f = Cocycle::from_fn(2, 4, |x, y| {
                if x == 0 || y == 0 { 0 } else { ((bits >> ((x - 1) * 3 + (y - 1))) & 1) as u8 }
            })
            .unwrap();
            let q = central_extension(&ExtensionSpec::new(k.clone(), 2, f.clone()).unwrap()).unwrap();
            assert_eq!(q.is_moufang(), s.mcoc.contains(f.vector()));
            found += usize::from(!s.mcoc.contains(f.vector()));
        }
        assert!(found > 0);
    }

    #[test]
    fn group_cocycles_give_groups() {
        let k = quaternion();
        let g = group_cocycle_space(&k, 2).unwrap();
        for v in g.basis() {
            let f = Cocycle::from_vector(8, v.clone()).unwrap();
            assert!(is_group_cocycle(&k, &f));
            let q = central_extension(&ExtensionSpec::new(k.clone(), 2, f).unwrap()).unwrap();
            assert!(q.is_associative());
        }
    }

    #[test]
    fn equivalence_by_coboundary() {
        let k = dihedral(4);
        let s = build_spaces(&k, 2).unwrap();
        let f = s.comp_cocycle(&vec![1; s.comp.dim()]);
        assert!(equivalent_extension_check(&k, 2, &f, &f).unwrap());
        let mut tau = vec![0u8; 8];
        tau[3] = 1;
        let g = f.sum(&coboundary_of(&k, 2, &tau).unwrap());
        assert!(equivalent_extension_check(&k, 2, &f, &g).unwrap());
        if s.comp.dim() > 0 {
            assert!(!equivalent_extension_check(&k, 2, &f, &Cocycle::zero(2, 8)).unwrap());
        }
    }

    #[test]
    fn prunable_bases() {
        assert!(is_prunable_base(&LoopTable::cyclic(32)));
        assert!(!is_prunable_base(&LoopTable::elementary_abelian(2, 5)));
        assert!(is_prunable_base(&dihedral(4)));
    }

    #[test]
    fn base_mismatch() {
        let err = ExtensionSpec::new(LoopTable::cyclic(4), 2, Cocycle::zero(2, 3)).unwrap_err();
        assert_eq!(err, ExtendError::BaseMismatch { expected: 4, found: 3 });
    }
}
