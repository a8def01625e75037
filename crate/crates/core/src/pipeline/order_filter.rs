//! Which orders admit a nonassociative Moufang loop, as far as the known
//! arithmetic criteria decide it.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    AllAssociative,
    NonassociativeExists,
    Unknown,
}

/// Prime factorization as `(prime, exponent)` pairs, primes increasing.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Orders `2m`, `m > 1` odd: all Moufang loops are associative exactly when
/// every exponent of `m` is at most 2, no prime factor is `1` modulo
/// another, and squares of the prime factors with exponent 2 are not `1`
/// modulo any prime factor.
fn twice_odd(m: u64) -> Verdict {
    let f = factorize(m);
    let ok = f.iter().all(|&(_, a)| a <= 2)
        && f.iter().all(|&(pi, _)| f.iter().all(|&(pj, _)| pj % pi != 1))
        && f.iter().all(|&(pi, _)| f.iter().filter(|&&(_, a)| a == 2).all(|&(pj, _)| (pj * pj) % pi != 1));
    if ok {
        Verdict::AllAssociative
    } else {
        Verdict::NonassociativeExists
    }
}

fn direct(n: u64) -> Verdict {
    use Verdict::*;
    if n == 1 {
        return AllAssociative;
    }
    let f = factorize(n);
    let (p, alpha) = f[0];
    if p == 2 {
        let m = n / 2;
        return if m % 2 == 1 {
            if m == 1 {
                AllAssociative
            } else {
                twice_odd(m)
            }
        } else if m == 2 || m == 4 {
            // orders 4 and 8
            AllAssociative
        } else {
            // a nonabelian group of order m exists (dihedral), so its
            // doubling is a nonassociative Moufang loop of order 2m
            NonassociativeExists
        };
    }
    let rest_ok = f[1..].iter().all(|&(_, a)| a <= 2);
    if rest_ok && (alpha <= 3 || (p >= 5 && alpha <= 4)) {
        return AllAssociative;
    }
    if f.len() == 2 && alpha == 1 && f[1].1 == 3 {
        let q = f[1].0;
        return if q % p == 1 { NonassociativeExists } else { AllAssociative };
    }
    if f.len() == 1 && (alpha == 5 || (p == 3 && alpha == 4)) {
        return NonassociativeExists;
    }
    Unknown
}

/// Decides existence of a nonassociative Moufang loop of order `n` from the
/// classical criteria; a multiple of an order with a nonassociative loop
/// inherits one by a direct product with a cyclic group.
pub fn order_filter(n: u64) -> Verdict {
    assert!(n >= 1, "order must be positive");
    match direct(n) {
        Verdict::Unknown => {
            let divisor_hit = (2..n)
                .filter(|d| n.is_multiple_of(*d))
                .any(|d| direct(d) == Verdict::NonassociativeExists);
            if divisor_hit {
                Verdict::NonassociativeExists
            } else {
                Verdict::Unknown
            }
        }
        v => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorization() {
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(675), vec![(3, 3), (5, 2)]);
        assert_eq!(factorize(97), vec![(97, 1)]);
    }

    #[test]
    fn known_orders() {
        assert_eq!(order_filter(30), Verdict::AllAssociative);
        assert_eq!(order_filter(42), Verdict::NonassociativeExists);
        assert_eq!(order_filter(675), Verdict::AllAssociative);
        assert_eq!(order_filter(16), Verdict::NonassociativeExists);
        assert_eq!(order_filter(8), Verdict::AllAssociative);
        assert_eq!(order_filter(81), Verdict::NonassociativeExists);
        assert_eq!(order_filter(625), Verdict::AllAssociative);
        assert_eq!(order_filter(3125), Verdict::NonassociativeExists);
        // p q³ with q ≡ 1 mod p
        assert_eq!(order_filter(3 * 343), Verdict::NonassociativeExists);
        assert_eq!(order_filter(135), Verdict::AllAssociative);
        // 3⁴·5 contains 81
        assert_eq!(order_filter(405), Verdict::NonassociativeExists);
    }
}
