//! Code loops: Moufang 2-loops that are central extensions of an elementary
//! abelian 2-group `V = GF(2)^d` by GF(2).
//!
//! A code loop is determined by its squaring map `P`, commutator map `C` and
//! associator map `A`, viewed as forms on `V`. They are related by
//! polarization (`C = P₂`, `A = P₃`), so everything is fixed by the values
//! of `P`, `C`, `A` on a basis: a [`PolarTriple`].
//!
//! Vectors of `V` are bitmasks; bit `i` is the coordinate of `e_{i+1}`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cocycles::{Cocycle, CocycleError};
use crate::extend::{self, ExtendError, ExtensionSpec};
use crate::gfla::{AffineSystem, FpVector, GflaError};
use crate::loopcore::{LoopError, LoopTable, SubloopSet};

/// Largest `d` for which the extension `2^(d+1)` fits in a loop table.
pub const MAX_DIM: usize = 7;
/// Largest `d` accepted by the orbit sweep.
pub const MAX_SWEEP_DIM: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeLoopError {
    #[error("dimension {0} is out of range")]
    Dimension(usize),
    #[error("boolean map has {found} values, expected {expected}")]
    TableLength { expected: usize, found: usize },
    #[error("boolean map does not vanish at 0")]
    NonzeroAtOrigin,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("no cocycle realizes the triple")]
    Unrealizable,
    #[error("realized loop does not reproduce the triple")]
    RealizationMismatch,
    #[error("not a code loop: {0}")]
    NotCodeLoop(&'static str),
    #[error("bad triple: {0}")]
    Parse(String),
    #[error(transparent)]
    Linear(#[from] GflaError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error(transparent)]
    Loop(#[from] LoopError),
}

type Result<T> = std::result::Result<T, CodeLoopError>;

fn check_dim(d: usize, max: usize) -> Result<()> {
    if d == 0 || d > max {
        return Err(CodeLoopError::Dimension(d));
    }
    Ok(())
}

#[inline]
fn bit(x: usize, i: usize) -> u8 {
    ((x >> i) & 1) as u8
}

/// A map `α: GF(2)^d → GF(2)` with `α(0) = 0`, stored as its value table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BooleanMap {
    d: usize,
    values: Vec<u8>,
}

impl BooleanMap {
    pub fn new(d: usize, values: Vec<u8>) -> Result<Self> {
        check_dim(d, MAX_DIM)?;
        if values.len() != 1 << d {
            return Err(CodeLoopError::TableLength { expected: 1 << d, found: values.len() });
        }
        if values[0] != 0 {
            return Err(CodeLoopError::NonzeroAtOrigin);
        }
        Ok(BooleanMap { d, values: values.into_iter().map(|v| v & 1).collect() })
    }

    pub fn from_fn<F: FnMut(usize) -> u8>(d: usize, f: F) -> Result<Self> {
        check_dim(d, MAX_DIM)?;
        BooleanMap::new(d, (0..1usize << d).map(f).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn eval(&self, x: usize) -> u8 {
        self.values[x]
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// `α ∘ L` where `L(x) = Σ x_i rows[i]`.
    pub fn precompose(&self, rows: &[usize]) -> BooleanMap {
        let values = (0..1usize << self.d).map(|x| self.values[apply_rows(rows, x)]).collect();
        BooleanMap { d: self.d, values }
    }
}

/// `Σ x_i rows[i]`.
#[inline]
pub fn apply_rows(rows: &[usize], x: usize) -> usize {
    rows.iter().enumerate().filter(|&(i, _)| bit(x, i) == 1).fold(0, |acc, (_, &r)| acc ^ r)
}

/// The `n`th derived form of `α` evaluated at `args` by the alternating sum
/// over all subsets of the arguments. Over GF(2) the signs disappear.
pub fn derived_form_direct(alpha: &BooleanMap, args: &[usize]) -> u8 {
    let n = args.len();
    let mut total = 0u8;
    for subset in 1usize..(1 << n) {
        let s = (0..n).filter(|&i| bit(subset, i) == 1).fold(0, |acc, i| acc ^ args[i]);
        total ^= alpha.eval(s);
    }
    total
}

/// The `n`th derived form of `α`, evaluated through the recurrence
/// `α_n(u, v, w…) = α_{n−1}(u+v, w…) − α_{n−1}(u, w…) − α_{n−1}(v, w…)`.
#[derive(Clone, Debug)]
pub struct DerivedForm<'a> {
    alpha: &'a BooleanMap,
    n: usize,
}

pub fn derived_form(alpha: &BooleanMap, n: usize) -> DerivedForm<'_> {
    DerivedForm { alpha, n }
}

impl DerivedForm<'_> {
    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn eval(&self, args: &[usize]) -> u8 {
        assert_eq!(args.len(), self.n, "derived form arity");
        Self::rec(self.alpha, args)
    }

    fn rec(alpha: &BooleanMap, args: &[usize]) -> u8 {
        match args {
            [] => 0,
            [u] => alpha.eval(*u),
            [u, v, rest @ ..] => {
                let mut buf = Vec::with_capacity(rest.len() + 1);
                let mut term = |first: usize| {
                    buf.clear();
                    buf.push(first);
                    buf.extend_from_slice(rest);
                    Self::rec(alpha, &buf)
                };
                term(u ^ v) ^ term(*u) ^ term(*v)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        let d = self.alpha.dim();
        let mut args = vec![0usize; self.n];
        // The form is multilinear once it is the top nonzero one; in general
        // check all argument tuples.
        fn go(f: &DerivedForm, args: &mut Vec<usize>, k: usize, d: usize) -> bool {
            if k == args.len() {
                return f.eval(args) == 0;
            }
            for x in 1..(1usize << d) {
                args[k] = x;
                if !go(f, args, k + 1, d) {
                    return false;
                }
            }
            true
        }
        go(self, &mut args, 0, d)
    }
}

/// Möbius transform of a value table: coefficient `c[S]` of the monomial
/// `Π_{i∈S} x_i` in the algebraic normal form.
fn anf(values: &[u8]) -> Vec<u8> {
    let mut c = values.to_vec();
    let n = c.len();
    let mut h = 1;
    while h < n {
        for x in 0..n {
            if x & h != 0 {
                c[x] ^= c[x ^ h];
            }
        }
        h <<= 1;
    }
    c
}

/// The largest `n` with `α_n ≠ 0`; the zero map has degree 0.
///
/// Over GF(2), `α_n(e_{i₁}, …, e_{i_n})` for distinct indices is the
/// coefficient of `x_{i₁}⋯x_{i_n}` in the algebraic normal form, so the
/// degree is the largest monomial size.
pub fn combinatorial_degree(alpha: &BooleanMap) -> usize {
    anf(alpha.values())
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == 1)
        .map(|(s, _)| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// `P(e_i)`, `C(e_i, e_j)` for `i < j` and `A(e_i, e_j, e_k)` for `i < j < k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolarTriple {
    d: usize,
    p: Vec<u8>,
    c: Vec<u8>,
    a: Vec<u8>,
}

fn pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |i| (i + 1..d).map(move |j| (i, j)))
}

fn triples(d: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..d).flat_map(move |i| (i + 1..d).flat_map(move |j| (j + 1..d).map(move |k| (i, j, k))))
}

fn pair_count(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

fn triple_count(d: usize) -> usize {
    d * d.saturating_sub(1) * d.saturating_sub(2) / 6
}

impl PolarTriple {
    pub fn new(d: usize, p: Vec<u8>, c: Vec<u8>, a: Vec<u8>) -> Result<Self> {
        check_dim(d, MAX_DIM)?;
        if p.len() != d || c.len() != pair_count(d) || a.len() != triple_count(d) {
            return Err(CodeLoopError::Parse(format!("block lengths do not match d={d}")));
        }
        if p.iter().chain(&c).chain(&a).any(|&b| b > 1) {
            return Err(CodeLoopError::Parse("bits must be 0 or 1".into()));
        }
        Ok(PolarTriple { d, p, c, a })
    }

    pub fn zero(d: usize) -> Result<Self> {
        check_dim(d, MAX_DIM)?;
        Ok(PolarTriple { d, p: vec![0; d], c: vec![0; pair_count(d)], a: vec![0; triple_count(d)] })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn bit_len(&self) -> usize {
        self.d + pair_count(self.d) + triple_count(self.d)
    }

    /// Bits in packing order; the first bit is the most significant.
    pub fn pack(&self) -> u64 {
        self.p.iter().chain(&self.c).chain(&self.a).fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn unpack(d: usize, bits: u64) -> Result<Self> {
        check_dim(d, MAX_DIM)?;
        let len = d + pair_count(d) + triple_count(d);
        if len < 64 && bits >> len != 0 {
            return Err(CodeLoopError::Parse(format!("more than {len} bits")));
        }
        let all: Vec<u8> = (0..len).rev().map(|i| ((bits >> i) & 1) as u8).collect();
        let (p, rest) = all.split_at(d);
        let (c, a) = rest.split_at(pair_count(d));
        Ok(PolarTriple { d, p: p.to_vec(), c: c.to_vec(), a: a.to_vec() })
    }

    pub fn p_basis(&self, i: usize) -> u8 {
        self.p[i]
    }

    /// `C(e_i, e_j)`, symmetric, zero on the diagonal.
    pub fn c_basis(&self, i: usize, j: usize) -> u8 {
        if i == j {
            return 0;
        }
        let (i, j) = (i.min(j), i.max(j));
        self.c[i * (2 * self.d - i - 1) / 2 + (j - i - 1)]
    }

    /// `A(e_i, e_j, e_k)`, symmetric, zero when two indices agree.
    pub fn a_basis(&self, i: usize, j: usize, k: usize) -> u8 {
        let mut s = [i, j, k];
        s.sort_unstable();
        if s[0] == s[1] || s[1] == s[2] {
            return 0;
        }
        let idx = triples(self.d).position(|t| t == (s[0], s[1], s[2])).expect("index in range");
        self.a[idx]
    }

    pub fn has_associator(&self) -> bool {
        self.a.contains(&1)
    }

    /// `A(x, y, z) = Σ_{i,j,k} x_i y_j z_k A(e_i, e_j, e_k)`.
    pub fn eval_a(&self, x: usize, y: usize, z: usize) -> u8 {
        let d = self.d;
        let mut s = 0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    s ^= bit(x, i) & bit(y, j) & bit(z, k) & self.a_basis(i, j, k);
                }
            }
        }
        s
    }

    /// `C(x, y) = Σ x_i y_j C(e_i,e_j) + Σ_k Σ_{i<j} x_i x_j y_k A(e_i,e_j,e_k)
    /// + Σ_i Σ_{j<k} x_i y_j y_k A(e_i,e_j,e_k)`.
    pub fn eval_c(&self, x: usize, y: usize) -> u8 {
        let d = self.d;
        let mut s = 0;
        for i in 0..d {
            for j in 0..d {
                s ^= bit(x, i) & bit(y, j) & self.c_basis(i, j);
            }
        }
        for (i, j) in pairs(d) {
            for k in 0..d {
                s ^= bit(x, i) & bit(x, j) & bit(y, k) & self.a_basis(i, j, k);
                s ^= bit(x, k) & bit(y, i) & bit(y, j) & self.a_basis(k, i, j);
            }
        }
        s
    }

    /// `P(x) = Σ x_i P(e_i) + Σ_{i<j} x_i x_j C(e_i,e_j) + Σ_{i<j<k} x_i x_j x_k A(e_i,e_j,e_k)`.
    pub fn eval_p(&self, x: usize) -> u8 {
        let mut s = 0;
        for i in 0..self.d {
            s ^= bit(x, i) & self.p[i];
        }
        for (i, j) in pairs(self.d) {
            s ^= bit(x, i) & bit(x, j) & self.c_basis(i, j);
        }
        for (i, j, k) in triples(self.d) {
            s ^= bit(x, i) & bit(x, j) & bit(x, k) & self.a_basis(i, j, k);
        }
        s
    }

    pub fn to_boolean_map(&self) -> BooleanMap {
        BooleanMap { d: self.d, values: (0..1usize << self.d).map(|x| self.eval_p(x)).collect() }
    }

    /// Reads the triple off a map of combinatorial degree at most 3.
    pub fn from_boolean_map(alpha: &BooleanMap) -> Result<Self> {
        if combinatorial_degree(alpha) > 3 {
            return Err(CodeLoopError::NotCodeLoop("squaring map has degree above 3"));
        }
        let d = alpha.dim();
        let p = (0..d).map(|i| alpha.eval(1 << i)).collect();
        let c = pairs(d).map(|(i, j)| derived_form_direct(alpha, &[1 << i, 1 << j])).collect();
        let a = triples(d).map(|(i, j, k)| derived_form_direct(alpha, &[1 << i, 1 << j, 1 << k])).collect();
        Ok(PolarTriple { d, p, c, a })
    }
}

impl fmt::Display for PolarTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |v: &[u8]| v.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect::<String>();
        write!(f, "d={} P={} C={} A={}", self.d, s(&self.p), s(&self.c), s(&self.a))
    }
}

impl FromStr for PolarTriple {
    type Err = CodeLoopError;

    fn from_str(line: &str) -> Result<Self> {
        let mut d = None;
        let (mut p, mut c, mut a) = (None, None, None);
        for field in line.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| CodeLoopError::Parse(format!("expected key=value, got {field:?}")))?;
            let bits = || -> Result<Vec<u8>> {
                value
                    .chars()
                    .map(|ch| match ch {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(CodeLoopError::Parse(format!("bad bit {ch:?} in {key}"))),
                    })
                    .collect()
            };
            match key {
                "d" => d = Some(value.parse::<usize>().map_err(|e| CodeLoopError::Parse(e.to_string()))?),
                "P" => p = Some(bits()?),
                "C" => c = Some(bits()?),
                "A" => a = Some(bits()?),
                _ => return Err(CodeLoopError::Parse(format!("unknown field {key:?}"))),
            }
        }
        let missing = |name: &str| CodeLoopError::Parse(format!("missing {name}"));
        PolarTriple::new(
            d.ok_or_else(|| missing("d"))?,
            p.ok_or_else(|| missing("P"))?,
            c.ok_or_else(|| missing("C"))?,
            a.ok_or_else(|| missing("A"))?,
        )
    }
}

/// Rank of a `d × d` matrix given by row bitmasks.
fn rank_rows(rows: &[usize]) -> usize {
    let mut basis: Vec<usize> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// `(P^M, C^M, A^M)`: the triple evaluated at the rows of `M`, where
/// `rows[i]` is the bitmask of row `i` (`m_{iu}` is bit `u`). Equivalently
/// `P^M(x) = P(Σ x_i rows[i])`.
pub fn transform_triple(t: &PolarTriple, rows: &[usize]) -> Result<PolarTriple> {
    let d = t.d;
    if rows.len() != d || rows.iter().any(|&r| r >> d != 0) {
        return Err(CodeLoopError::Parse("matrix shape does not match the triple".into()));
    }
    if rank_rows(rows) != d {
        return Err(CodeLoopError::SingularMatrix);
    }
    let p = (0..d).map(|i| t.eval_p(rows[i])).collect();
    let c = pairs(d).map(|(i, j)| t.eval_c(rows[i], rows[j])).collect();
    let a = triples(d).map(|(i, j, k)| t.eval_a(rows[i], rows[j], rows[k])).collect();
    Ok(PolarTriple { d, p, c, a })
}

/// Row bitmasks of the two generators of `GL(d, 2)`: the transvection
/// `e₁ ↦ e₁ + e₂` and the cyclic permutation `e_i ↦ e_{i+1}`.
pub fn gl_generators(d: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![1]];
    }
    let mut transvection: Vec<usize> = (0..d).map(|i| 1 << i).collect();
    transvection[0] = 0b11;
    let cycle: Vec<usize> = (0..d).map(|i| 1 << ((i + 1) % d)).collect();
    vec![transvection, cycle]
}

/// The action of a matrix on packed triples is GF(2)-linear; store it as
/// lookup tables over 8-bit chunks of the packed index.
struct PackedAction {
    tables: Vec<Vec<u32>>,
}

impl PackedAction {
    fn new(d: usize, rows: &[usize]) -> Result<Self> {
        let len = d + pair_count(d) + triple_count(d);
        let columns: Vec<u32> = (0..len)
            .map(|b| {
                let t = PolarTriple::unpack(d, 1u64 << b)?;
                Ok(transform_triple(&t, rows)?.pack() as u32)
            })
            .collect::<Result<_>>()?;
        let tables = columns
            .chunks(8)
            .map(|chunk| {
                (0..1usize << chunk.len())
                    .map(|m| (0..chunk.len()).filter(|&i| bit(m, i) == 1).fold(0u32, |acc, i| acc ^ chunk[i]))
                    .collect()
            })
            .collect();
        Ok(PackedAction { tables })
    }

    #[inline]
    fn apply(&self, v: u32) -> u32 {
        self.tables
            .iter()
            .enumerate()
            .fold(0, |acc, (i, t)| acc ^ t[((v >> (8 * i)) & ((t.len() - 1) as u32)) as usize])
    }
}

/// One representative, the least in packing order, of each `GL(d, 2)`-orbit
/// of triples with nonzero associator form.
pub fn triple_orbit_representatives(d: usize) -> Result<Vec<PolarTriple>> {
    sweep(d, true)
}

/// Like [`triple_orbit_representatives`], but over all triples, so the
/// associative code loops (groups) are included.
pub fn all_triple_orbit_representatives(d: usize) -> Result<Vec<PolarTriple>> {
    sweep(d, false)
}

fn sweep(d: usize, require_associator: bool) -> Result<Vec<PolarTriple>> {
    check_dim(d, MAX_SWEEP_DIM)?;
    let len = d + pair_count(d) + triple_count(d);
    let a_mask: u32 = (1u32 << triple_count(d)) - 1;
    let actions: Vec<PackedAction> =
        gl_generators(d).iter().map(|g| PackedAction::new(d, g)).collect::<Result<_>>()?;
    let size = 1usize << len;
    let mut marked = vec![0u64; size.div_ceil(64)];
    let is_marked = |m: &[u64], v: u32| m[v as usize >> 6] >> (v & 63) & 1 == 1;
    let mut reps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..size as u32 {
        if (require_associator && start & a_mask == 0) || is_marked(&marked, start) {
            continue;
        }
        reps.push(PolarTriple::unpack(d, start as u64)?);
        marked[start as usize >> 6] |= 1 << (start & 63);
        stack.push(start);
        while let Some(v) = stack.pop() {
            for act in &actions {
                let w = act.apply(v);
                if !is_marked(&marked, w) {
                    marked[w as usize >> 6] |= 1 << (w & 63);
                    stack.push(w);
                }
            }
        }
    }
    Ok(reps)
}

/// Solves for a normalized cocycle `f` on `V` with `f(x,x) = P(x)`,
/// `f(x,y) + f(y,x) = C(x,y)` and
/// `f(x,y) + f(x+y,z) + f(y,z) + f(x,y+z) = A(x,y,z)`.
pub fn code_cocycle(t: &PolarTriple) -> Result<Cocycle> {
    let n = 1usize << t.d;
    let var = |x: usize, y: usize| x * n + y;
    let mut sys = AffineSystem::new(2, n * n)?;
    for x in 0..n {
        sys.add_equation(&[(var(0, x), 1)], 0);
        sys.add_equation(&[(var(x, 0), 1)], 0);
    }
    for x in 1..n {
        sys.add_equation(&[(var(x, x), 1)], t.eval_p(x));
        for y in x + 1..n {
            sys.add_equation(&[(var(x, y), 1), (var(y, x), 1)], t.eval_c(x, y));
        }
    }
    let mut terms = Vec::with_capacity(4);
    for x in 1..n {
        for y in 1..n {
            for z in 1..n {
                terms.clear();
                terms.extend([(var(x, y), 1), (var(x ^ y, z), 1), (var(y, z), 1), (var(x, y ^ z), 1)]);
                sys.add_equation(&terms, t.eval_a(x, y, z));
            }
        }
    }
    let solution = sys.solve().ok_or(CodeLoopError::Unrealizable)?;
    Ok(Cocycle::from_vector(n, FpVector::from_entries(2, &solution.entries())?)?)
}

/// The code loop `E(V, GF(2), f)` of a triple, checked to be Moufang and to
/// give back the same triple on the standard basis.
pub fn realize_code_loop(t: &PolarTriple) -> Result<LoopTable> {
    let f = code_cocycle(t)?;
    let base = LoopTable::elementary_abelian(2, t.d as u32);
    let q = extend::central_extension(&ExtensionSpec::new(base, 2, f)?)?;
    if !q.is_moufang() {
        return Err(CodeLoopError::RealizationMismatch);
    }
    let fiber = extend::fiber(&q, 2);
    let basis: Vec<usize> = (0..t.d).map(|i| extend::pair_index(2, 1 << i, 0)).collect();
    if triple_on_basis(&q, &fiber, &basis)? != *t {
        return Err(CodeLoopError::RealizationMismatch);
    }
    Ok(q)
}

fn triple_on_basis(q: &LoopTable, z: &SubloopSet, basis: &[usize]) -> Result<PolarTriple> {
    let d = basis.len();
    let bit_of = |v: usize| -> Result<u8> {
        if v == 0 {
            Ok(0)
        } else if z.contains(v) {
            Ok(1)
        } else {
            Err(CodeLoopError::NotCodeLoop("derived element outside the central subloop"))
        }
    };
    let comm = |x: usize, y: usize| q.ldiv(q.mul(y, x), q.mul(x, y));
    let assoc = |x: usize, y: usize, w: usize| q.ldiv(q.mul(x, q.mul(y, w)), q.mul(q.mul(x, y), w));
    let p = basis.iter().map(|&x| bit_of(q.mul(x, x))).collect::<Result<_>>()?;
    let c = pairs(d).map(|(i, j)| bit_of(comm(basis[i], basis[j]))).collect::<Result<_>>()?;
    let a = triples(d).map(|(i, j, k)| bit_of(assoc(basis[i], basis[j], basis[k]))).collect::<Result<_>>()?;
    Ok(PolarTriple { d, p, c, a })
}

/// The triple of a code loop `Q` with respect to a central subloop `Z` of
/// order 2 with elementary abelian quotient. The basis of `V = Q/Z` is
/// chosen greedily in element order; its preimages are the least coset
/// members.
pub fn triple_of_loop(q: &LoopTable, z: &SubloopSet) -> Result<PolarTriple> {
    if z.len() != 2 {
        return Err(CodeLoopError::NotCodeLoop("central subloop must have order 2"));
    }
    if !z.iter().all(|x| q.is_central(x)) {
        return Err(CodeLoopError::NotCodeLoop("subloop is not central"));
    }
    let (quot, coset) = q.quotient_loop(z)?;
    if !quot.is_elementary_abelian(2) {
        return Err(CodeLoopError::NotCodeLoop("quotient is not elementary abelian"));
    }
    let mut span = vec![0usize];
    let mut basis = Vec::new();
    for x in 1..quot.order() {
        if span.contains(&x) {
            continue;
        }
        basis.push(x);
        let more: Vec<usize> = span.iter().map(|&s| quot.mul(s, x)).collect();
        span.extend(more);
    }
    let d = basis.len();
    check_dim(d, MAX_DIM)?;
    let preimages: Vec<usize> =
        basis.iter().map(|&b| (0..q.order()).find(|&x| coset[x] == b).expect("coset is nonempty")).collect();
    triple_on_basis(q, z, &preimages)
}

/// Central subloops of order 2 of `q`.
pub fn central_involutions(q: &LoopTable) -> Vec<usize> {
    q.center().iter().filter(|&x| x != 0 && q.mul(x, x) == 0).collect()
}

/// Whether every central subloop of order 2 has an elementary abelian
/// quotient, i.e. `q` is a central extension of no other loop by GF(2).
pub fn only_elementary_abelian_quotients(q: &LoopTable) -> Result<bool> {
    for z in central_involutions(q) {
        let (quot, _) = q.quotient_loop(&q.subloop_closure([z]))?;
        if !quot.is_elementary_abelian(2) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autiso::are_isomorphic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_triple(rng: &mut ChaCha8Rng, d: usize) -> PolarTriple {
        let len = d + pair_count(d) + triple_count(d);
        PolarTriple::unpack(d, rng.gen::<u64>() & ((1u64 << len) - 1)).unwrap()
    }

    fn random_invertible(rng: &mut ChaCha8Rng, d: usize) -> Vec<usize> {
        loop {
            let rows: Vec<usize> = (0..d).map(|_| rng.gen_range(0..1usize << d)).collect();
            if rank_rows(&rows) == d {
                return rows;
            }
        }
    }

    fn inverse(rows: &[usize]) -> Vec<usize> {
        let d = rows.len();
        (0..d)
            .map(|i| (0..1usize << d).find(|&x| apply_rows(rows, x) == 1 << i).unwrap())
            .collect()
    }

    #[test]
    fn derived_form_examples() {
        let zero = BooleanMap::from_fn(3, |_| 0).unwrap();
        for n in 2..=4 {
            assert!(derived_form(&zero, n).is_zero());
        }
        let quad = BooleanMap::from_fn(2, |x| bit(x, 0) & bit(x, 1)).unwrap();
        assert_eq!(derived_form(&quad, 2).eval(&[1, 2]), 1);
        assert!(derived_form(&quad, 3).is_zero());
        let cubic = BooleanMap::from_fn(3, |x| bit(x, 0) & bit(x, 1) & bit(x, 2)).unwrap();
        assert_eq!(derived_form(&cubic, 3).eval(&[1, 2, 4]), 1);
        assert!(derived_form(&cubic, 4).is_zero());
        assert_eq!(combinatorial_degree(&zero), 0);
        assert_eq!(combinatorial_degree(&BooleanMap::from_fn(3, |x| bit(x, 1)).unwrap()), 1);
        assert_eq!(combinatorial_degree(&cubic), 3);
    }

    #[test]
    fn recurrence_matches_subset_sum_and_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let d = rng.gen_range(1..=4);
            let alpha = BooleanMap::from_fn(d, |x| if x == 0 { 0 } else { rng.gen_range(0..2) }).unwrap();
            let mut brute_degree = 0;
            for n in 1..=d + 1 {
                let form = derived_form(&alpha, n);
                let mut args = vec![0usize; n];
                let mut nonzero = false;
                for code in 0..(1usize << (d * n)) {
                    for (i, a) in args.iter_mut().enumerate() {
                        *a = (code >> (i * d)) & ((1 << d) - 1);
                    }
                    let v = derived_form_direct(&alpha, &args);
                    assert_eq!(v, form.eval(&args));
                    nonzero |= v == 1;
                    if args.contains(&0) {
                        assert_eq!(v, 0);
                    }
                    if n > 1 {
                        let mut swapped = args.clone();
                        swapped.swap(0, n - 1);
                        assert_eq!(v, derived_form_direct(&alpha, &swapped));
                    }
                }
                if nonzero {
                    brute_degree = n;
                }
                if n > 4 || (1usize << (d * n)) > 1 << 14 {
                    break;
                }
            }
            assert_eq!(combinatorial_degree(&alpha), brute_degree);
        }
    }

    /// Reconstruction from basis values by induction on the norm: split a
    /// vector with two or more coordinates into two smaller ones and use the
    /// recurrence for the next derived form.
    fn reconstruct(t: &PolarTriple) -> (Vec<u8>, Vec<Vec<u8>>) {
        let d = t.d;
        let n = 1usize << d;
        let lowest = |x: usize| x & x.wrapping_neg();
        let a3 = |x: usize, y: usize, z: usize| {
            let mut s = 0;
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        s ^= bit(x, i) & bit(y, j) & bit(z, k) & t.a_basis(i, j, k);
                    }
                }
            }
            s
        };
        let mut c = vec![vec![0u8; n]; n];
        for x in 1..n {
            for y in 1..n {
                // induct on x first, then on y
                c[x][y] = if x.count_ones() > 1 {
                    let (u, v) = (lowest(x), x ^ lowest(x));
                    a3(u, v, y) ^ c[u][y] ^ c[v][y]
                } else if y.count_ones() > 1 {
                    let (u, v) = (lowest(y), y ^ lowest(y));
                    a3(u, v, x) ^ c[x][u] ^ c[x][v]
                } else {
                    t.c_basis(x.trailing_zeros() as usize, y.trailing_zeros() as usize)
                };
            }
        }
        let mut p = vec![0u8; n];
        for x in 1..n {
            p[x] = if x.count_ones() > 1 {
                let (u, v) = (lowest(x), x ^ lowest(x));
                c[u][v] ^ p[u] ^ p[v]
            } else {
                t.p_basis(x.trailing_zeros() as usize)
            };
        }
        (p, c)
    }

    #[test]
    fn evaluation_matches_reconstruction() {
        let zero = PolarTriple::zero(4).unwrap();
        assert!((0..16).all(|x| zero.eval_p(x) == 0 && (0..16).all(|y| zero.eval_c(x, y) == 0)));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..40 {
            let d = rng.gen_range(1..=5);
            let t = random_triple(&mut rng, d);
            let (p, c) = reconstruct(&t);
            let alpha = BooleanMap::new(d, p.clone()).unwrap();
            let n = 1 << d;
            for x in 0..n {
                assert_eq!(t.eval_p(x), p[x]);
                for y in 0..n {
                    assert_eq!(t.eval_c(x, y), c[x][y]);
                    assert_eq!(t.eval_c(x, y), derived_form_direct(&alpha, &[x, y]));
                    assert_eq!(t.eval_c(x, y), t.eval_p(x ^ y) ^ t.eval_p(x) ^ t.eval_p(y));
                    assert_eq!(t.eval_a(x, x, y), 0);
                    let z = rng.gen_range(0..n);
                    assert_eq!(t.eval_a(x, y, z), derived_form_direct(&alpha, &[x, y, z]));
                }
            }
            assert_eq!(PolarTriple::from_boolean_map(&alpha).unwrap(), t);
        }
    }

    #[test]
    fn transform_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let d = rng.gen_range(1..=5);
            let t = random_triple(&mut rng, d);
            let id: Vec<usize> = (0..d).map(|i| 1 << i).collect();
            assert_eq!(transform_triple(&t, &id).unwrap(), t);
            let m = random_invertible(&mut rng, d);
            let tm = transform_triple(&t, &m).unwrap();
            assert_eq!(transform_triple(&tm, &inverse(&m)).unwrap(), t);
            // rebuild the table, precompose, re-extract
            let (p, _) = reconstruct(&t);
            let alpha = BooleanMap::new(d, p).unwrap().precompose(&m);
            assert_eq!(PolarTriple::from_boolean_map(&alpha).unwrap(), tm);
        }
        let t = PolarTriple::zero(3).unwrap();
        assert_eq!(transform_triple(&t, &[1, 2, 3]), Err(CodeLoopError::SingularMatrix));
    }

    #[test]
    fn packing_and_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = rng.gen_range(1..=6);
            let t = random_triple(&mut rng, d);
            assert_eq!(PolarTriple::unpack(d, t.pack()).unwrap(), t);
            assert_eq!(t.to_string().parse::<PolarTriple>().unwrap(), t);
        }
        let t: PolarTriple = "d=3 P=101 C=011 A=1".parse().unwrap();
        assert_eq!(t.pack(), 0b1010111);
        assert_eq!(t.c_basis(1, 2), 1);
        assert_eq!(t.c_basis(0, 1), 0);
        assert!("d=3 P=10 C=011 A=1".parse::<PolarTriple>().is_err());
        assert!("d=3 P=102 C=011 A=1".parse::<PolarTriple>().is_err());
        assert!("d=3 C=011 A=1".parse::<PolarTriple>().is_err());
    }

    fn group_order(d: usize) -> usize {
        let gens = gl_generators(d);
        let key = |rows: &[usize]| rows.iter().fold(0usize, |acc, &r| (acc << d) | r);
        let id: Vec<usize> = (0..d).map(|i| 1 << i).collect();
        let mut seen = std::collections::HashSet::from([key(&id)]);
        let mut stack = vec![id];
        while let Some(m) = stack.pop() {
            for g in &gens {
                // product g·m: row i of g combined with rows of m
                let prod: Vec<usize> = g.iter().map(|&r| apply_rows(&m, r)).collect();
                if seen.insert(key(&prod)) {
                    stack.push(prod);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn generators_generate_gl() {
        assert_eq!(group_order(2), 6);
        assert_eq!(group_order(3), 168);
        assert_eq!(group_order(4), 20160);
    }

    fn all_gl(d: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for code in 0..(1usize << (d * d)) {
            let rows: Vec<usize> = (0..d).map(|i| (code >> (i * d)) & ((1 << d) - 1)).collect();
            if rank_rows(&rows) == d {
                out.push(rows);
            }
        }
        out
    }

    fn orbit_minima(d: usize) -> Vec<u64> {
        let group = all_gl(d);
        let len = d + pair_count(d) + triple_count(d);
        let a_mask = (1u64 << triple_count(d)) - 1;
        let actions: Vec<PackedAction> = group.iter().map(|g| PackedAction::new(d, g).unwrap()).collect();
        let mut minima: Vec<u64> = (0..1u64 << len)
            .filter(|v| v & a_mask != 0)
            .map(|v| actions.iter().map(|a| a.apply(v as u32) as u64).min().unwrap())
            .collect();
        minima.sort_unstable();
        minima.dedup();
        minima
    }

    #[test]
    fn orbit_sweep_small_dimensions() {
        assert!(triple_orbit_representatives(2).unwrap().is_empty());
        for d in [3, 4] {
            let reps: Vec<u64> = triple_orbit_representatives(d).unwrap().iter().map(|t| t.pack()).collect();
            assert_eq!(reps, orbit_minima(d), "d = {d}");
        }
        assert_eq!(triple_orbit_representatives(6), Err(CodeLoopError::Dimension(6)));
        // quadratic forms on GF(2)^2 up to GL: 0, x₁, x₁x₂, x₁+x₂+x₁x₂
        assert_eq!(all_triple_orbit_representatives(2).unwrap().len(), 4);
    }

    #[test]
    fn realization_small() {
        let z = realize_code_loop(&PolarTriple::zero(3).unwrap()).unwrap();
        assert!(z.is_elementary_abelian(2));
        assert_eq!(z.order(), 16);
        for t in triple_orbit_representatives(3).unwrap() {
            let q = realize_code_loop(&t).unwrap();
            assert!(q.is_moufang());
            assert!(!q.is_associative());
            let fiber = extend::fiber(&q, 2);
            assert!(fiber.iter().all(|x| q.is_central(x)));
            // C = P₂ and A = P₃ on the whole space
            let alpha = t.to_boolean_map();
            for x in 0..8usize {
                for y in 0..8usize {
                    let (qx, qy) = (2 * x, 2 * y);
                    let comm = q.ldiv(q.mul(qy, qx), q.mul(qx, qy));
                    assert_eq!(comm as u8, derived_form_direct(&alpha, &[x, y]));
                }
            }
        }
    }

    #[test]
    fn triple_of_loop_round_trip() {
        let e = LoopTable::elementary_abelian(2, 4);
        let z = e.subloop_closure([5]);
        assert_eq!(triple_of_loop(&e, &z).unwrap(), PolarTriple::zero(3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let t = random_triple(&mut rng, 3);
            let q = realize_code_loop(&t).unwrap();
            let back = triple_of_loop(&q, &extend::fiber(&q, 2)).unwrap();
            let equivalent = all_gl(3).iter().any(|m| transform_triple(&back, m).unwrap() == t);
            assert!(equivalent);
        }
        let d8 = crate::loopcore::tests::dihedral(4);
        assert!(triple_of_loop(&d8, &d8.subloop_closure([1])).is_err());
    }

    #[test]
    fn isomorphism_iff_equivalence_d4() {
        let reps = triple_orbit_representatives(4).unwrap();
        let loops: Vec<LoopTable> = reps.iter().map(|t| realize_code_loop(t).unwrap()).collect();
        for i in 0..loops.len() {
            for j in i + 1..loops.len() {
                assert!(are_isomorphic(&loops[i], &loops[j]).is_none(), "{} vs {}", reps[i], reps[j]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in reps.iter().take(6) {
            let m = random_invertible(&mut rng, 4);
            let q = realize_code_loop(&transform_triple(t, &m).unwrap()).unwrap();
            let idx = loops.iter().position(|l| are_isomorphic(l, &q).is_some());
            assert_eq!(idx.map(|i| &reps[i]), Some(t));
        }
    }
}
