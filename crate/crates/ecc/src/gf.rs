//! Finite fields GF(p^m) with table-driven arithmetic.
//!
//! Elements are integers in `0..q` whose base-p digits are the polynomial
//! coefficients, little-endian: the element `c0 + c1*x + ... + c_{m-1}*x^{m-1}`
//! is encoded as `c0 + c1*p + ... + c_{m-1}*p^{m-1}`. For p = 2 this is the
//! usual bit-vector encoding. Multiplication and inversion go through exp/log
//! tables built once at construction; addition is digit-wise mod p (XOR when
//! p = 2).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Field element, valid range `0..q` of the owning [`Field`].
pub type Sym = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("{q} is not a prime power")]
    NotPrimePower { q: u32 },
    #[error("inverse of zero in GF({q})")]
    ZeroInverse { q: u32 },
    #[error("GF({q}) contains no element of multiplicative order {n}")]
    OrderUnavailable { n: u32, q: u32 },
}

/// Serializable description of a field: order, characteristic, extension
/// degree, modulus polynomial (little-endian coefficients, empty for prime
/// fields) and the chosen primitive element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub q: u32,
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
    pub alpha: Sym,
}

/// A concrete field with lookup tables. Immutable after construction; safe to
/// share across threads.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    /// exp[i] = alpha^i for i in 0..2(q-1), doubled to skip a reduction in mul.
    exp: Vec<Sym>,
    /// log[a] for a in 1..q; log[0] is a sentinel and never read.
    log: Vec<u32>,
}

/// Moduli fixed by convention so encodings stay stable across runs.
const CANONICAL_MODULI: &[(u32, &[u32])] = &[
    (16, &[1, 1, 0, 0, 1]),             // x^4 + x + 1
    (256, &[1, 0, 1, 1, 1, 0, 0, 0, 1]), // x^8 + x^4 + x^3 + x^2 + 1
    (1024, &[1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1]), // x^10 + x^3 + 1
];

impl Field {
    /// Builds GF(q). Fails unless q = p^m for a prime p.
    pub fn new(q: u32) -> Result<Field, GfError> {
        let (p, m) = prime_power(q).ok_or(GfError::NotPrimePower { q })?;
        let modulus = if m == 1 {
            Vec::new()
        } else if let Some((_, coeffs)) = CANONICAL_MODULI.iter().find(|(cq, _)| *cq == q) {
            coeffs.to_vec()
        } else {
            smallest_irreducible(p, m)
        };
        Self::with_modulus_unchecked(q, p, m, modulus)
    }

    /// Builds GF(p^m) with an explicit modulus (little-endian, degree m,
    /// leading coefficient 1). The modulus must be irreducible over GF(p).
    pub fn with_modulus(q: u32, modulus: Vec<u32>) -> Result<Field, GfError> {
        let (p, m) = prime_power(q).ok_or(GfError::NotPrimePower { q })?;
        assert!(m >= 2, "explicit modulus only applies to extension fields");
        assert_eq!(modulus.len() as u32, m + 1, "modulus degree must equal m");
        assert!(is_irreducible(&modulus, p), "modulus must be irreducible");
        Self::with_modulus_unchecked(q, p, m, modulus)
    }

    fn with_modulus_unchecked(q: u32, p: u32, m: u32, modulus: Vec<u32>) -> Result<Field, GfError> {
        let ctx = SlowCtx { q, p, m, modulus: &modulus };
        let alpha = (1..q)
            .find(|&a| ctx.order_is_max(a))
            .expect("every finite field has a primitive element");
        let qm1 = (q - 1) as usize;
        let mut exp = vec![0; 2 * qm1.max(1)];
        let mut log = vec![u32::MAX; q as usize];
        let mut acc: Sym = 1;
        for i in 0..qm1 {
            exp[i] = acc;
            exp[i + qm1] = acc;
            log[acc as usize] = i as u32;
            acc = ctx.mul(acc, alpha);
        }
        debug_assert_eq!(acc, 1, "alpha must have order q-1");
        if qm1 == 0 {
            // GF(2): the unit group is trivial.
            exp = vec![1, 1];
            log[1] = 0;
        }
        Ok(Field { spec: FieldSpec { q, p, m, modulus, alpha }, exp, log })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn q(&self) -> u32 {
        self.spec.q
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    pub fn alpha(&self) -> Sym {
        self.spec.alpha
    }

    pub fn add(&self, a: Sym, b: Sym) -> Sym {
        let p = self.spec.p;
        if p == 2 {
            return a ^ b;
        }
        if self.spec.m == 1 {
            return (a + b) % p;
        }
        let mut out = 0;
        let mut shift = 1;
        let (mut x, mut y) = (a, b);
        while x != 0 || y != 0 {
            out += ((x + y) % p) * shift;
            x /= p;
            y /= p;
            shift *= p;
        }
        out
    }

    pub fn neg(&self, a: Sym) -> Sym {
        let p = self.spec.p;
        if p == 2 {
            return a;
        }
        if self.spec.m == 1 {
            return (p - a) % p;
        }
        let mut out = 0;
        let mut shift = 1;
        let mut x = a;
        while x != 0 {
            out += ((p - x % p) % p) * shift;
            x /= p;
            shift *= p;
        }
        out
    }

    pub fn sub(&self, a: Sym, b: Sym) -> Sym {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Sym, b: Sym) -> Sym {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Sym) -> Result<Sym, GfError> {
        if a == 0 {
            return Err(GfError::ZeroInverse { q: self.spec.q });
        }
        let qm1 = self.spec.q - 1;
        if qm1 == 0 {
            return Ok(1);
        }
        Ok(self.exp[((qm1 - self.log[a as usize]) % qm1) as usize])
    }

    pub fn div(&self, a: Sym, b: Sym) -> Result<Sym, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^k with k possibly negative; 0^0 = 1, 0^negative is an error.
    pub fn pow(&self, a: Sym, k: i64) -> Result<Sym, GfError> {
        if a == 0 {
            return match k.cmp(&0) {
                std::cmp::Ordering::Greater => Ok(0),
                std::cmp::Ordering::Equal => Ok(1),
                std::cmp::Ordering::Less => Err(GfError::ZeroInverse { q: self.spec.q }),
            };
        }
        let qm1 = (self.spec.q - 1) as i64;
        if qm1 == 0 {
            return Ok(1);
        }
        let e = k.rem_euclid(qm1) as u32;
        Ok(self.exp[((self.log[a as usize] as u64 * e as u64) % qm1 as u64) as usize])
    }

    /// Primitive n-th root of unity alpha^((q-1)/n); exists iff n divides q-1.
    pub fn root_of_unity(&self, n: u32) -> Result<Sym, GfError> {
        let qm1 = self.spec.q - 1;
        if n == 0 || qm1 % n != 0 {
            return Err(GfError::OrderUnavailable { n, q: self.spec.q });
        }
        if qm1 == 0 {
            return Ok(1);
        }
        Ok(self.exp[(qm1 / n) as usize])
    }

    /// The field element n * 1 (n ones summed), i.e. n reduced mod p embedded
    /// as a constant. Nonzero whenever gcd(n, p) = 1.
    pub fn embed_int(&self, n: u64) -> Sym {
        (n % self.spec.p as u64) as Sym
    }

    /// Discrete log base alpha; None for 0.
    pub fn dlog(&self, a: Sym) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.log[a as usize])
        }
    }
}

/// Returns (p, m) with q = p^m, p prime, or None.
fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 0;
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            p = d;
            break;
        }
        d += 1;
    }
    if p == 0 {
        return Some((q, 1)); // q itself is prime
    }
    let mut rest = q;
    let mut m = 0;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    if rest == 1 {
        Some((p, m))
    } else {
        None
    }
}

/// Schoolbook polynomial arithmetic over GF(p), used only during table
/// construction and irreducibility checks. Polynomials are little-endian
/// coefficient vectors.
struct SlowCtx<'a> {
    q: u32,
    p: u32,
    m: u32,
    modulus: &'a [u32],
}

impl SlowCtx<'_> {
    fn digits(&self, mut a: Sym) -> Vec<u32> {
        let mut d = vec![0; self.m as usize];
        for slot in d.iter_mut() {
            *slot = a % self.p;
            a /= self.p;
        }
        d
    }

    fn encode(&self, d: &[u32]) -> Sym {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn mul(&self, a: Sym, b: Sym) -> Sym {
        if self.m == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as Sym;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * self.m as usize];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] += (x as u64) * (y as u64);
            }
        }
        // Reduce degree by degree using x^m = -(modulus minus leading term).
        for i in (self.m as usize..prod.len()).rev() {
            let c = prod[i] % self.p as u64;
            prod[i] = 0;
            if c == 0 {
                continue;
            }
            for j in 0..self.m as usize {
                let mj = self.modulus[j] as u64;
                if mj != 0 {
                    let sub = (c * mj) % self.p as u64;
                    prod[i - self.m as usize + j] += self.p as u64 - sub;
                }
            }
        }
        let d: Vec<u32> = prod[..self.m as usize]
            .iter()
            .map(|&c| (c % self.p as u64) as u32)
            .collect();
        self.encode(&d)
    }

    fn pow(&self, mut a: Sym, mut e: u32) -> Sym {
        let mut r: Sym = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    fn order_is_max(&self, a: Sym) -> bool {
        let qm1 = self.q - 1;
        if qm1 == 0 {
            return a == 1;
        }
        if self.pow(a, qm1) != 1 {
            return false;
        }
        for r in prime_factors(qm1) {
            if self.pow(a, qm1 / r) == 1 {
                return false;
            }
        }
        true
    }
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d as u64 * d as u64 <= n as u64 {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Lexicographically smallest (by integer encoding of the low coefficients)
/// monic irreducible polynomial of degree m over GF(p).
fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    let span = (p as u64).pow(m);
    for k in 0..span {
        let mut coeffs: Vec<u32> = Vec::with_capacity(m as usize + 1);
        let mut rest = k;
        for _ in 0..m {
            coeffs.push((rest % p as u64) as u32);
            rest /= p as u64;
        }
        coeffs.push(1);
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials of every degree exist");
}

/// Rabin's test: f of degree m is irreducible over GF(p) iff x^(p^m) = x
/// (mod f) and gcd(x^(p^(m/r)) - x, f) = 1 for every prime r dividing m.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let m = (f.len() - 1) as u32;
    let x = vec![0, 1];
    let frob = |k: u32| -> Vec<u32> {
        // x^(p^k) mod f by repeated p-th powering
        let mut cur = x.clone();
        for _ in 0..k {
            cur = poly_powmod(&cur, p as u64, f, p);
        }
        cur
    };
    let xqm = frob(m);
    if poly_sub(&xqm, &x, p).iter().any(|&c| c != 0) {
        return false;
    }
    for r in prime_factors(m) {
        let g = poly_sub(&frob(m / r), &x, p);
        if poly_gcd(&g, f, p).len() > 1 {
            return false;
        }
    }
    true
}

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out = vec![0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *slot = (x + p - y) % p;
    }
    poly_trim(out)
}

fn poly_mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] += x as u64 * y as u64;
        }
    }
    let mut prod: Vec<u32> = prod.iter().map(|&c| (c % p as u64) as u32).collect();
    let m = f.len() - 1;
    for i in (m..prod.len()).rev() {
        let c = prod[i];
        prod[i] = 0;
        if c == 0 {
            continue;
        }
        for j in 0..m {
            if f[j] != 0 {
                let sub = (c as u64 * f[j] as u64 % p as u64) as u32;
                prod[i - m + j] = (prod[i - m + j] + p - sub) % p;
            }
        }
    }
    prod.truncate(m);
    poly_trim(prod)
}

fn poly_powmod(a: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
    let mut base = a.to_vec();
    let mut r = vec![1];
    while e > 0 {
        if e & 1 == 1 {
            r = poly_mulmod(&r, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    r
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let (mut a, mut b) = (poly_trim(a.to_vec()), poly_trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    while r.len() > db {
        let c = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        let shift = r.len() - 1 - db;
        if c != 0 {
            for j in 0..=db {
                let sub = (c as u64 * b[j] as u64 % p as u64) as u32;
                r[shift + j] = (r[shift + j] + p - sub) % p;
            }
        }
        r.pop();
        r = poly_trim(r);
        if r.len() <= db {
            break;
        }
    }
    poly_trim(r)
}

/// Modular inverse in GF(p) by extended Euclid; also the table-free oracle
/// the unit tests compare against.
pub fn mod_inv(a: u32, p: u32) -> u32 {
    let (mut t, mut new_t): (i64, i64) = (0, 1);
    let (mut r, mut new_r): (i64, i64) = (p as i64, (a % p) as i64);
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    assert_eq!(r, 1, "not invertible");
    t.rem_euclid(p as i64) as u32
}
