//! Isomorphism, automorphisms and isotopy of loops, and the reduction of
//! cocycle representatives under the automorphism group.
//!
//! Every search runs on a *plan*: a generating sequence `g₁, …, g_d` of the
//! source loop together with, for each prefix, the list of products that
//! close `⟨g₁, …, g_i⟩`. A candidate map is fixed by the images of the
//! generators; the products extend it level by level and every new element
//! is checked against the whole subloop built so far, so wrong branches die
//! as soon as they leave a consistent partial homomorphism.
//!
//! Elements are coloured by iterated refinement of cheap local invariants.
//! Colours are label-independent, so they both feed the fingerprint and
//! restrict generator images.

use std::collections::VecDeque;

use thiserror::Error;

use crate::cocycles::{Cocycle, CocycleSpaces};
use crate::gfla::{GflaError, SumDecomposer};
use crate::loopcore::{Elem, ElemSet, LoopTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutIsoError {
    #[error("complement has {size} elements, above the enumeration budget {budget}")]
    ExplodedBudget { size: u128, budget: u128 },
    #[error("automorphism group does not belong to a loop of order {0}")]
    WrongLoop(usize),
    #[error(transparent)]
    Linear(#[from] GflaError),
}

/// A permutation of the elements, `perm[x]` the image of `x`.
pub type Perm = Vec<Elem>;

#[inline]
fn fmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn combine(h: u64, v: u64) -> u64 {
    fmix(h.rotate_left(7) ^ v.wrapping_add(0x9e37_79b9_7f4a_7c15))
}

/// Isomorphism invariants of a loop. Equal for isomorphic loops.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    pub order: usize,
    pub commutative: bool,
    pub associative: bool,
    pub center_size: usize,
    /// Sorted element orders; `0` marks an element without a well-defined order.
    pub element_orders: Vec<usize>,
    /// Sorted sizes of the one-generated subloops.
    pub cyclic_sizes: Vec<usize>,
    /// Sorted per-element counts of non-commuting partners.
    pub commutator_counts: Vec<usize>,
    /// Sorted per-element counts of non-associating triples with the element
    /// in first, second and third position.
    pub associator_counts: Vec<(usize, usize, usize)>,
    /// Sorted refined element colours.
    pub colors: Vec<u64>,
}

struct ElementData {
    colors: Vec<u64>,
    fingerprint: Fingerprint,
}

fn refine(q: &LoopTable, mut colors: Vec<u64>) -> Vec<u64> {
    let n = q.order();
    let classes = |c: &[u64]| {
        let mut v = c.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let mut count = classes(&colors);
    let mut buf = Vec::with_capacity(n);
    loop {
        let mut next = vec![0u64; n];
        for x in 0..n {
            buf.clear();
            for y in 0..n {
                buf.push(combine(
                    combine(colors[y], colors[q.mul(x, y)]),
                    colors[q.mul(y, x)],
                ));
            }
            buf.sort_unstable();
            next[x] = buf.iter().fold(combine(colors[x], 0x51), |h, &v| combine(h, v));
        }
        let c = classes(&next);
        colors = next;
        if c == count {
            return colors;
        }
        count = c;
    }
}

fn analyze_elements(q: &LoopTable) -> ElementData {
    let n = q.order();
    let orders: Vec<usize> = (0..n).map(|x| q.element_order(x).unwrap_or(0)).collect();
    let center = q.center();
    let cyclic: Vec<usize> = (0..n).map(|x| q.subloop_closure([x]).len()).collect();
    let comm: Vec<usize> = (0..n)
        .map(|x| (0..n).filter(|&y| q.mul(x, y) != q.mul(y, x)).count())
        .collect();
    let mut assoc = vec![(0usize, 0usize, 0usize); n];
    for x in 1..n {
        for y in 1..n {
            let xy = q.mul(x, y);
            for z in 1..n {
                if q.mul(xy, z) != q.mul(x, q.mul(y, z)) {
                    assoc[x].0 += 1;
                    assoc[y].1 += 1;
                    assoc[z].2 += 1;
                }
            }
        }
    }
    let initial: Vec<u64> = (0..n)
        .map(|x| {
            let mut h = combine(orders[x] as u64, cyclic[x] as u64);
            h = combine(h, center.contains(x) as u64);
            h = combine(h, comm[x] as u64);
            h = combine(h, assoc[x].0 as u64);
            h = combine(h, assoc[x].1 as u64);
            h = combine(h, assoc[x].2 as u64);
            combine(h, (x == 0) as u64)
        })
        .collect();
    let colors = refine(q, initial);

    let sorted = |mut v: Vec<usize>| {
        v.sort_unstable();
        v
    };
    let mut assoc_sorted = assoc.clone();
    assoc_sorted.sort_unstable();
    let mut color_sorted = colors.clone();
    color_sorted.sort_unstable();
    let associative = assoc.iter().all(|a| a.0 == 0);
    let fingerprint = Fingerprint {
        order: n,
        commutative: comm.iter().all(|&c| c == 0),
        associative,
        center_size: center.len(),
        element_orders: sorted(orders),
        cyclic_sizes: sorted(cyclic),
        commutator_counts: sorted(comm),
        associator_counts: assoc_sorted,
        colors: color_sorted,
    };
    ElementData { colors, fingerprint }
}

pub fn fingerprint(q: &LoopTable) -> Fingerprint {
    analyze_elements(q).fingerprint
}

/// A generating sequence with the product derivations that close each prefix.
#[derive(Clone, Debug)]
struct SearchPlan {
    gens: Vec<Elem>,
    // steps[i]: (z, a, b) with z = a·b, appended while closing level i
    steps: Vec<Vec<(Elem, Elem, Elem)>>,
    // members[i]: elements of ⟨g₀..g_i⟩ in discovery order
    members: Vec<Vec<Elem>>,
}

impl SearchPlan {
    fn new(q: &LoopTable, colors: &[u64]) -> Self {
        let n = q.order();
        let mut set = ElemSet::new();
        set.insert(0);
        let mut list = vec![0];
        let mut plan = SearchPlan { gens: Vec::new(), steps: Vec::new(), members: Vec::new() };
        while list.len() < n {
            // Prefer the colour class with fewest elements outside the
            // current closure; among those, the element whose closure grows most.
            let mut class_size = std::collections::HashMap::new();
            for x in (0..n).filter(|&x| !set.contains(x)) {
                *class_size.entry(colors[x]).or_insert(0usize) += 1;
            }
            let mut best: Option<((usize, usize, u64, usize), Elem)> = None;
            for x in (0..n).filter(|&x| !set.contains(x)) {
                let mut s = set;
                let mut l = list.clone();
                q.close_into(&mut s, &mut l, &[x]);
                let key = (class_size[&colors[x]], n - l.len(), colors[x], x);
                if best.as_ref().is_none_or(|(k, _)| key < *k) {
                    best = Some((key, x));
                }
            }
            let g = best.expect("element outside closure").1;
            let mut steps = Vec::new();
            set.insert(g);
            list.push(g);
            let mut head = list.len() - 1;
            while head < list.len() {
                let u = list[head];
                head += 1;
                let mut i = 0;
                while i < list.len() {
                    let s = list[i];
                    i += 1;
                    for (w, a, b) in [(q.mul(u, s), u, s), (q.mul(s, u), s, u)] {
                        if set.insert(w) {
                            list.push(w);
                            steps.push((w, a, b));
                        }
                    }
                }
            }
            plan.gens.push(g);
            plan.steps.push(steps);
            plan.members.push(list.clone());
        }
        plan
    }
}

/// A loop with its precomputed invariants and search plan.
#[derive(Clone, Debug)]
pub struct AnalyzedLoop {
    table: LoopTable,
    colors: Vec<u64>,
    fingerprint: Fingerprint,
    plan: SearchPlan,
}

impl AnalyzedLoop {
    pub fn new(table: LoopTable) -> Self {
        let data = analyze_elements(&table);
        let plan = SearchPlan::new(&table, &data.colors);
        AnalyzedLoop { table, colors: data.colors, fingerprint: data.fingerprint, plan }
    }

    pub fn table(&self) -> &LoopTable {
        &self.table
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    pub fn into_table(self) -> LoopTable {
        self.table
    }

    /// An isomorphism `self → other`, if one exists.
    pub fn isomorphism_to(&self, other: &AnalyzedLoop) -> Option<Perm> {
        if self.fingerprint != other.fingerprint {
            return None;
        }
        let m = Matcher { src: self, dst: other };
        let n = self.table.order();
        let mut map = vec![usize::MAX; n];
        map[0] = 0;
        let mut used = ElemSet::new();
        used.insert(0);
        let phi = m.search(0, &mut map, &mut used, None)?;
        debug_assert!(is_isomorphism(&self.table, &other.table, &phi));
        Some(phi)
    }
}

struct Matcher<'a> {
    src: &'a AnalyzedLoop,
    dst: &'a AnalyzedLoop,
}

impl Matcher<'_> {
    /// Extends `map` (defined on the members of levels `< level`) by sending
    /// the `level`th generator to `image`, following the derivations and
    /// checking the homomorphism property against everything mapped so far.
    /// Returns the number of newly mapped elements or `None` on conflict;
    /// on conflict `map`/`used` are restored.
    fn assign_level(&self, level: usize, image: Elem, map: &mut [Elem], used: &mut ElemSet) -> Option<usize> {
        let plan = &self.src.plan;
        let (q1, q2) = (&self.src.table, &self.dst.table);
        let g = plan.gens[level];
        let prev_len = if level == 0 { 1 } else { plan.members[level - 1].len() };
        let members = &plan.members[level];
        let undo = |map: &mut [Elem], used: &mut ElemSet, upto: usize| {
            for &z in &members[prev_len..prev_len + upto] {
                used.remove(map[z]);
                map[z] = usize::MAX;
            }
        };
        if used.contains(image) || self.dst.colors[image] != self.src.colors[g] {
            return None;
        }
        map[g] = image;
        used.insert(image);
        let mut count = 1;
        for &(z, a, b) in &plan.steps[level] {
            let w = q2.mul(map[a], map[b]);
            if used.contains(w) || self.dst.colors[w] != self.src.colors[z] {
                undo(map, used, count);
                return None;
            }
            map[z] = w;
            used.insert(w);
            count += 1;
        }
        for &z in &members[prev_len..] {
            let mz = map[z];
            for &y in members.iter() {
                let my = map[y];
                if map[q1.mul(z, y)] != q2.mul(mz, my) || map[q1.mul(y, z)] != q2.mul(my, mz) {
                    undo(map, used, count);
                    return None;
                }
            }
        }
        Some(count)
    }

    fn search(&self, level: usize, map: &mut [Elem], used: &mut ElemSet, forced: Option<Elem>) -> Option<Perm> {
        let plan = &self.src.plan;
        if level == plan.gens.len() {
            return Some(map.to_vec());
        }
        let g = plan.gens[level];
        let want = self.src.colors[g];
        let n = self.dst.table.order();
        let candidates: Vec<Elem> = match forced {
            Some(c) => vec![c],
            None => (0..n).filter(|&c| self.dst.colors[c] == want && !used.contains(c)).collect(),
        };
        let prev_len = if level == 0 { 1 } else { plan.members[level - 1].len() };
        for c in candidates {
            let Some(count) = self.assign_level(level, c, map, used) else {
                continue;
            };
            if let Some(phi) = self.search(level + 1, map, used, None) {
                return Some(phi);
            }
            for &z in &plan.members[level][prev_len..prev_len + count] {
                used.remove(map[z]);
                map[z] = usize::MAX;
            }
        }
        None
    }
}

pub fn is_isomorphism(q1: &LoopTable, q2: &LoopTable, phi: &[Elem]) -> bool {
    let n = q1.order();
    n == q2.order()
        && phi.len() == n
        && phi.iter().copied().collect::<ElemSet>().len() == n
        && (0..n).all(|x| (0..n).all(|y| phi[q1.mul(x, y)] == q2.mul(phi[x], phi[y])))
}

/// An explicit isomorphism `q1 → q2`, or `None` if the loops are not isomorphic.
pub fn are_isomorphic(q1: &LoopTable, q2: &LoopTable) -> Option<Perm> {
    if q1.order() != q2.order() {
        return None;
    }
    AnalyzedLoop::new(q1.clone()).isomorphism_to(&AnalyzedLoop::new(q2.clone()))
}

/// A generating set of `Aut(Q)` and the group order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutGroup {
    n: usize,
    generators: Vec<Perm>,
    order: u128,
}

impl AutGroup {
    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// All elements, if there are at most `limit` of them.
    pub fn elements(&self, limit: u128) -> Option<Vec<Perm>> {
        if self.order > limit {
            return None;
        }
        let id: Perm = (0..self.n).collect();
        let mut seen = std::collections::HashSet::new();
        seen.insert(id.clone());
        let mut out = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(a) = queue.pop_front() {
            for g in &self.generators {
                let b: Perm = a.iter().map(|&x| g[x]).collect();
                if seen.insert(b.clone()) {
                    out.push(b.clone());
                    queue.push_back(b);
                }
            }
        }
        debug_assert_eq!(out.len() as u128, self.order);
        Some(out)
    }
}

fn orbit(start: Elem, gens: &[&Perm]) -> ElemSet {
    let mut set = ElemSet::new();
    set.insert(start);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for g in gens {
            if set.insert(g[x]) {
                stack.push(g[x]);
            }
        }
    }
    set
}

/// Generators of `Aut(Q)` with the group order.
///
/// Works down the stabilizer chain of the plan's generating sequence: at
/// level `i` the pointwise stabilizer of `g₁..g_{i−1}` is known from the
/// deeper levels, and each colour-compatible image of `g_i` outside the
/// current orbit is either reached by a new automorphism (added as a
/// generator) or ruled out together with its whole known orbit. The order
/// is the product of the orbit lengths.
pub fn automorphism_group(q: &LoopTable) -> AutGroup {
    let a = AnalyzedLoop::new(q.clone());
    let n = q.order();
    let plan = &a.plan;
    let d = plan.gens.len();
    let m = Matcher { src: &a, dst: &a };
    let mut by_level: Vec<Vec<Perm>> = vec![Vec::new(); d];
    let mut order: u128 = 1;
    for i in (0..d).rev() {
        let g = plan.gens[i];
        let fixed: Vec<Elem> = if i == 0 { vec![0] } else { plan.members[i - 1].clone() };
        let fixed_set: ElemSet = fixed.iter().copied().collect();
        let known = |lv: &Vec<Vec<Perm>>| -> Vec<Perm> { lv[i..].iter().flatten().cloned().collect() };
        let mut gens = known(&by_level);
        let mut orb = orbit(g, &gens.iter().collect::<Vec<_>>());
        let mut failed = ElemSet::new();
        for c in 0..n {
            if a.colors[c] != a.colors[g] || fixed_set.contains(c) || orb.contains(c) || failed.contains(c) {
                continue;
            }
            let mut map = vec![usize::MAX; n];
            for &x in &fixed {
                map[x] = x;
            }
            let mut used = fixed_set;
            match m.search(i, &mut map, &mut used, Some(c)) {
                Some(alpha) => {
                    by_level[i].push(alpha);
                    gens = known(&by_level);
                    orb = orbit(g, &gens.iter().collect::<Vec<_>>());
                }
                None => {
                    let lost = orbit(c, &gens.iter().collect::<Vec<_>>());
                    for x in lost.iter() {
                        failed.insert(x);
                    }
                }
            }
        }
        order *= orb.len() as u128;
    }
    let generators = by_level.into_iter().flatten().collect();
    AutGroup { n, generators, order }
}

/// `f^α(x, y) = f(α(x), α(y))`.
pub fn act_on_cocycle(f: &Cocycle, alpha: &[Elem]) -> Cocycle {
    let n = f.base_order();
    Cocycle::from_fn(f.p(), n, |x, y| f.get(alpha[x], alpha[y])).expect("automorphisms fix the identity")
}

/// Representatives of the `Aut(K)`-orbits on Moufang cocycles modulo
/// coboundaries, as elements of the complement.
///
/// Follows the reduction: take the least remaining element `f` of the
/// complement, keep it, and remove the complement part of every image
/// `f^α`. The images are generated by closing under the generators of
/// `Aut(K)`; the induced action on the complement is linear, so each
/// generator is applied as a matrix on coordinates. Coordinates are
/// ordered lexicographically, first coordinate most significant.
pub fn representative_cocycles(
    k: &LoopTable,
    spaces: &CocycleSpaces,
    aut: &AutGroup,
    budget: u128,
) -> Result<Vec<Cocycle>, AutIsoError> {
    if aut.degree() != k.order() {
        return Err(AutIsoError::WrongLoop(aut.degree()));
    }
    let p = spaces.p as usize;
    let c = spaces.comp.dim();
    let size = (p as u128).checked_pow(c as u32).unwrap_or(u128::MAX);
    if size > budget {
        return Err(AutIsoError::ExplodedBudget { size, budget });
    }
    let size = size as usize;
    let dec = SumDecomposer::new(&spaces.cob, &spaces.comp)?;
    let n = k.order();
    // matrices[g][j] = coordinates of the comp-part of (b_j)^α
    let mut matrices: Vec<Vec<Vec<u8>>> = Vec::new();
    for alpha in aut.generators() {
        let mut cols = Vec::with_capacity(c);
        for b in spaces.comp.basis() {
            let f = Cocycle::from_vector(n, b.clone()).expect("complement vectors are cocycles");
            cols.push(dec.b_coordinates(act_on_cocycle(&f, alpha).vector())?);
        }
        matrices.push(cols);
    }
    let weight: Vec<usize> = (0..c).map(|i| p.pow((c - 1 - i) as u32)).collect();
    let decode = |mut idx: usize| -> Vec<u8> {
        let mut v = vec![0u8; c];
        for i in (0..c).rev() {
            v[i] = (idx % p) as u8;
            idx /= p;
        }
        v
    };
    let apply = |m: &Vec<Vec<u8>>, v: &[u8]| -> usize {
        let mut out = vec![0usize; c];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0 {
                for i in 0..c {
                    out[i] += vj as usize * m[j][i] as usize;
                }
            }
        }
        out.iter().zip(&weight).map(|(&o, &w)| (o % p) * w).sum()
    };
    let mut removed = vec![false; size];
    let mut reps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..size {
        if removed[start] {
            continue;
        }
        reps.push(start);
        removed[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let v = decode(idx);
            for m in &matrices {
                let img = apply(m, &v);
                if !removed[img] {
                    removed[img] = true;
                    stack.push(img);
                }
            }
        }
    }
    Ok(reps.into_iter().map(|idx| spaces.comp_cocycle(&decode(idx))).collect())
}

/// Principal isotope `x∘y = (x/b)(a\y)`, relabelled so that its identity
/// `ab` becomes element `0`.
pub fn principal_isotope(q: &LoopTable, a: Elem, b: Elem) -> LoopTable {
    let n = q.order();
    let e = q.mul(a, b);
    let mut perm: Vec<Elem> = (0..n).collect();
    perm.swap(0, e);
    let mut t = vec![0; n * n];
    for x in 0..n {
        for y in 0..n {
            let v = q.mul(q.rdiv(x, b), q.ldiv(a, y));
            t[perm[x] * n + perm[y]] = perm[v];
        }
    }
    LoopTable::from_zero_based(n, t).expect("principal isotopes of loops are loops")
}

fn quick_invariant(q: &LoopTable) -> (Vec<usize>, Vec<usize>) {
    let n = q.order();
    let mut orders: Vec<usize> = (0..n).map(|x| q.element_order(x).unwrap_or(0)).collect();
    orders.sort_unstable();
    let mut comm: Vec<usize> = (0..n)
        .map(|x| (0..n).filter(|&y| q.mul(x, y) != q.mul(y, x)).count())
        .collect();
    comm.sort_unstable();
    (orders, comm)
}

/// Whether some principal isotope of `q1` is isomorphic to `q2`.
pub fn are_isotopic(q1: &LoopTable, q2: &LoopTable) -> bool {
    let n = q1.order();
    if n != q2.order() {
        return false;
    }
    let target = AnalyzedLoop::new(q2.clone());
    let target_quick = quick_invariant(q2);
    for a in 0..n {
        for b in 0..n {
            let iso = principal_isotope(q1, a, b);
            if quick_invariant(&iso) != target_quick {
                continue;
            }
            if AnalyzedLoop::new(iso).isomorphism_to(&target).is_some() {
                return true;
            }
        }
    }
    false
}
