//! Exact coefficients: rationals and the composite ring Q[t, s]/(Phi_k(t), s^2 - k).
//!
//! `t` is a primitive k-th root of unity and `s` a square root of k. When k is a
//! perfect square, `s` is collapsed to the integer root at construction, so the
//! ring is the cyclotomic field itself. Every value is kept reduced, which makes
//! structural equality coincide with ring equality.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;
/// Small exact rationals used for exponents.
pub type Q = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

pub fn q_to_rat(x: Q) -> Rat {
    rat(*x.numer(), *x.denom())
}

/// Generalized binomial coefficient C(r, j) for rational r.
pub fn binomial(r: Q, j: u32) -> Rat {
    let r = q_to_rat(r);
    let mut acc = Rat::one();
    for i in 0..j {
        acc = acc * (&r - Rat::from_integer(BigInt::from(i))) / Rat::from_integer(BigInt::from(i + 1));
    }
    acc
}

pub fn render_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        Some(Rat::from_integer(s.parse().ok()?))
    }
}

#[derive(Debug)]
struct RingInfo {
    /// Degree of Phi_k.
    deg: usize,
    /// Monic Phi_k, low to high, leading 1 included.
    phi: Vec<i64>,
    /// Integer square root of k if k is a perfect square.
    sqrt: Option<i64>,
}

impl RingInfo {
    fn dim(&self) -> usize {
        if self.sqrt.is_some() {
            self.deg
        } else {
            2 * self.deg
        }
    }
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // both low-to-high, den monic
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    if rem.len() <= dn {
        return vec![0];
    }
    let mut quot = vec![0i64; rem.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

fn cyclotomic(k: u32) -> Vec<i64> {
    let mut p = vec![0i64; k as usize + 1];
    p[0] = -1;
    p[k as usize] = 1;
    for d in 1..k {
        if k % d == 0 {
            p = poly_div_exact(&p, &cyclotomic(d));
        }
    }
    p
}

fn ring(k: u32) -> &'static RingInfo {
    static CACHE: OnceLock<Mutex<HashMap<u32, &'static RingInfo>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("ring cache poisoned");
    guard.entry(k).or_insert_with(|| {
        assert!(k >= 1, "cycle length must be positive");
        let phi = cyclotomic(k);
        let r = (k as f64).sqrt().round() as i64;
        let sqrt = (r * r == k as i64).then_some(r);
        Box::leak(Box::new(RingInfo { deg: phi.len() - 1, phi, sqrt }))
    })
}

/// Element of Q[t, s]/(Phi_k(t), s^2 - k) in canonical reduced form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    k: u32,
    /// Coefficient of s^e t^m at index e * deg + m.
    c: Vec<Rat>,
}

impl Scalar {
    pub fn zero(k: u32) -> Self {
        Scalar { k, c: vec![Rat::zero(); ring(k).dim()] }
    }

    pub fn one(k: u32) -> Self {
        Self::from_rat(k, Rat::one())
    }

    pub fn from_rat(k: u32, r: Rat) -> Self {
        let mut z = Self::zero(k);
        z.c[0] = r;
        z
    }

    pub fn from_int(k: u32, n: i64) -> Self {
        Self::from_rat(k, Rat::from_integer(BigInt::from(n)))
    }

    pub fn from_q(k: u32, x: Q) -> Self {
        Self::from_rat(k, q_to_rat(x))
    }

    /// The square root of k.
    pub fn s(k: u32) -> Self {
        let info = ring(k);
        match info.sqrt {
            Some(r) => Self::from_int(k, r),
            None => {
                let mut z = Self::zero(k);
                z.c[info.deg] = Rat::one();
                z
            }
        }
    }

    /// The primitive root of unity raised to an arbitrary integer power.
    pub fn t_pow(k: u32, m: i64) -> Self {
        let info = ring(k);
        let m = m.rem_euclid(k as i64) as usize;
        let mut poly = vec![Rat::zero(); m.max(info.deg) + 1];
        poly[m] = Rat::one();
        let mut z = Self::zero(k);
        let red = reduce_poly(info, poly);
        z.c[..info.deg].clone_from_slice(&red);
        z
    }

    pub fn t(k: u32) -> Self {
        Self::t_pow(k, 1)
    }

    /// s^e for any integer e (s^2 = k).
    pub fn s_pow(k: u32, e: i64) -> Self {
        let half = e.div_euclid(2);
        let odd = e.rem_euclid(2) == 1;
        let base = if half >= 0 {
            Rat::from_integer(BigInt::from(k).pow(half as u32))
        } else {
            Rat::one() / Rat::from_integer(BigInt::from(k).pow((-half) as u32))
        };
        let mut out = Self::from_rat(k, base);
        if odd {
            out = out.mul(&Self::s(k)).expect("same ring");
        }
        out
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    /// Returns the rational value if this element lies in Q.
    pub fn as_rat(&self) -> Option<&Rat> {
        self.c[1..].iter().all(Zero::is_zero).then_some(&self.c[0])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(Error::RingMismatch { left: self.k, right: other.k });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Scalar { k: self.k, c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() })
    }

    pub fn add_in_place(&mut self, other: &Self) -> Result<()> {
        self.check(other)?;
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            if !b.is_zero() {
                *a += b;
            }
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Scalar { k: self.k, c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect() })
    }

    pub fn neg(&self) -> Self {
        Scalar { k: self.k, c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        Scalar { k: self.k, c: self.c.iter().map(|a| a * r).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let info = ring(self.k);
        let d = info.deg;
        if let (Some(a), Some(b)) = (self.as_rat(), other.as_rat()) {
            return Ok(Self::from_rat(self.k, a * b));
        }
        let parts = if info.sqrt.is_some() { 1 } else { 2 };
        let conv = |x: &[Rat], y: &[Rat]| -> Vec<Rat> {
            let mut out = vec![Rat::zero(); 2 * d - 1];
            for (i, a) in x.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in y.iter().enumerate() {
                    if !b.is_zero() {
                        out[i + j] += a * b;
                    }
                }
            }
            out
        };
        let mut z = Self::zero(self.k);
        if parts == 1 {
            let p = conv(&self.c, &other.c);
            z.c = reduce_poly(info, p);
        } else {
            let (a0, a1) = self.c.split_at(d);
            let (b0, b1) = other.c.split_at(d);
            let kk = Rat::from_integer(BigInt::from(self.k));
            let mut even = conv(a0, b0);
            for (e, x) in even.iter_mut().zip(conv(a1, b1)) {
                *e += x * &kk;
            }
            let mut odd = conv(a0, b1);
            for (o, x) in odd.iter_mut().zip(conv(a1, b0)) {
                *o += x;
            }
            z.c[..d].clone_from_slice(&reduce_poly(info, even));
            z.c[d..].clone_from_slice(&reduce_poly(info, odd));
        }
        Ok(z)
    }

    /// Inverse of a monomial unit q * s^e * t^m. Anything else is rejected.
    pub fn invert(&self) -> Result<Self> {
        let k = self.k;
        if self.is_zero() {
            return Err(Error::NotAUnit(self.to_string()));
        }
        for e in 0..2i64 {
            for m in 0..k as i64 {
                // self = r * s^e * t^m  <=>  self * s^-e * t^-m is rational
                let probe = self
                    .mul(&Self::s_pow(k, -e))?
                    .mul(&Self::t_pow(k, -m))?;
                if let Some(r) = probe.as_rat() {
                    if r.is_zero() {
                        continue;
                    }
                    let inv = Self::from_rat(k, r.recip());
                    return inv.mul(&Self::s_pow(k, -e))?.mul(&Self::t_pow(k, -m));
                }
            }
        }
        Err(Error::NotAUnit(self.to_string()))
    }

    /// Integer power; negative powers require a monomial unit.
    pub fn pow(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.invert()? } else { self.clone() };
        let mut acc = Self::one(self.k);
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Canonical text form, e.g. `1/2 + 3*s*t - t^2`.
    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn parse(k: u32, input: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse { input: input.to_string(), reason: reason.to_string() };
        let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty"));
        }
        let mut acc = Self::zero(k);
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
                terms.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
            } else if (ch == '+' || ch == '-') && i == 0 {
                neg = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        terms.push((neg, cur));
        for (neg, body) in terms {
            if body.is_empty() {
                return Err(err("dangling sign"));
            }
            let mut term = Self::one(k);
            for factor in body.split('*') {
                let f = if factor == "s" {
                    Self::s(k)
                } else if factor == "t" {
                    Self::t(k)
                } else if let Some(e) = factor.strip_prefix("t^") {
                    Self::t_pow(k, e.parse().map_err(|_| err("bad exponent"))?)
                } else if let Some(e) = factor.strip_prefix("s^") {
                    Self::s_pow(k, e.parse().map_err(|_| err("bad exponent"))?)
                } else {
                    Self::from_rat(k, parse_rat(factor).ok_or_else(|| err("bad rational"))?)
                };
                term = term.mul(&f)?;
            }
            if neg {
                term = term.neg();
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

fn reduce_poly(info: &RingInfo, mut p: Vec<Rat>) -> Vec<Rat> {
    let d = info.deg;
    while p.len() > d {
        let top = p.pop().expect("non-empty");
        if top.is_zero() {
            continue;
        }
        let shift = p.len() - d;
        for (j, cj) in info.phi[..d].iter().enumerate() {
            if *cj != 0 {
                p[shift + j] -= &top * Rat::from_integer(BigInt::from(*cj));
            }
        }
    }
    p.resize(d, Rat::zero());
    p
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let info = ring(self.k);
        let d = info.deg;
        let mut out = String::new();
        for (idx, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (e, m) = (idx / d, idx % d);
            let mut factors = Vec::new();
            if e == 1 {
                factors.push("s".to_string());
            }
            match m {
                0 => {}
                1 => factors.push("t".to_string()),
                _ => factors.push(format!("t^{m}")),
            }
            let mag = c.abs();
            let body = if factors.is_empty() {
                render_rat(&mag)
            } else if mag.is_one() {
                factors.join("*")
            } else {
                format!("{}*{}", render_rat(&mag), factors.join("*"))
            };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar[k={}]({})", self.k, self)
    }
}

/// Reduces a rational exponent to an `i64` if integral.
pub fn q_as_int(x: Q) -> Option<i64> {
    x.is_integer().then(|| x.to_integer())
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defining_relations() {
        for k in 1..=9u32 {
            let s = Scalar::s(k);
            assert_eq!(s.mul(&s).unwrap(), Scalar::from_int(k, k as i64));
            let t = Scalar::t(k);
            assert_eq!(t.mul(&Scalar::t_pow(k, k as i64 - 1)).unwrap(), Scalar::one(k));
            assert_eq!(Scalar::t_pow(k, k as i64), Scalar::one(k));
        }
    }

    #[test]
    fn cyclotomic_sum_vanishes_for_three() {
        let k = 3;
        let sum = Scalar::one(k).add(&Scalar::t(k)).unwrap().add(&Scalar::t_pow(k, 2)).unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(2), vec![1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic(8), vec![1, 0, 0, 0, 1]);
    }

    #[test]
    fn perfect_square_collapses() {
        assert_eq!(Scalar::s(4), Scalar::from_int(4, 2));
        assert_eq!(Scalar::s(9).as_rat(), Some(&rat(3, 1)));
        assert_eq!(Scalar::s(1), Scalar::one(1));
    }

    #[test]
    fn inversion() {
        assert_eq!(Scalar::from_int(3, 2).invert().unwrap(), Scalar::from_rat(3, rat(1, 2)));
        let s = Scalar::s(3);
        assert_eq!(s.invert().unwrap(), s.scale_rat(&rat(1, 3)));
        let u = Scalar::t_pow(3, 2).mul(&s).unwrap().scale_rat(&rat(-5, 7));
        assert!(u.mul(&u.invert().unwrap()).unwrap().is_one());
        assert!(matches!(Scalar::zero(3).invert(), Err(Error::NotAUnit(_))));
        let two_terms = Scalar::one(5).add(&Scalar::s(5)).unwrap();
        assert!(matches!(two_terms.invert(), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn ring_mismatch() {
        assert_eq!(
            Scalar::one(3).add(&Scalar::one(5)),
            Err(Error::RingMismatch { left: 3, right: 5 })
        );
    }

    #[test]
    fn render_and_parse() {
        let k = 5;
        let x = Scalar::parse(k, "1/2 + 3*s*t^2 - t").unwrap();
        let again = Scalar::parse(k, &x.render()).unwrap();
        assert_eq!(x, again);
        assert_eq!(Scalar::parse(3, "t^3").unwrap(), Scalar::one(3));
        assert_eq!(Scalar::zero(3).render(), "0");
        assert_eq!(Scalar::s(3).scale_rat(&rat(-1, 3)).render(), "-1/3*s");
        assert!(Scalar::parse(3, "1/0").is_err());
    }

    #[test]
    fn eta_projection_identity() {
        for k in 1..=8u32 {
            for p in 0..(2 * k as i64) {
                let mut sum = Scalar::zero(k);
                for i in 0..k as i64 {
                    sum = sum.add(&Scalar::t_pow(k, i * p)).unwrap();
                }
                let avg = sum.scale_rat(&rat(1, k as i64));
                if p % k as i64 == 0 {
                    assert!(avg.is_one());
                } else {
                    assert!(avg.is_zero(), "k={k} p={p}");
                }
            }
        }
    }

    fn arb_scalar(k: u32) -> impl Strategy<Value = Scalar> {
        let dim = ring(k).dim();
        proptest::collection::vec((-6i64..=6, 1i64..=4), dim).prop_map(move |cs| {
            let mut z = Scalar::zero(k);
            for (slot, (n, d)) in z.c.iter_mut().zip(cs) {
                *slot = rat(n, d);
            }
            z
        })
    }

    fn arb_triple() -> impl Strategy<Value = (Scalar, Scalar, Scalar)> {
        (1u32..=7).prop_flat_map(|k| (arb_scalar(k), arb_scalar(k), arb_scalar(k)))
    }

    proptest! {
        #[test]
        fn ring_axioms((a, b, c) in arb_triple()) {
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        }

        #[test]
        fn text_roundtrip((a, _, _) in arb_triple()) {
            prop_assert_eq!(Scalar::parse(a.k(), &a.render()).unwrap(), a);
        }

        #[test]
        fn prime_domain_on_monomial_products(m1 in 0i64..5, m2 in 0i64..5, e1 in 0i64..2, e2 in 0i64..2, n in 1i64..9) {
            for k in [3u32, 5, 7] {
                let x = Scalar::t_pow(k, m1).mul(&Scalar::s_pow(k, e1)).unwrap().scale_rat(&rat(n, 1));
                let y = Scalar::t_pow(k, m2).mul(&Scalar::s_pow(k, e2)).unwrap();
                prop_assert!(!x.mul(&y).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn generalized_binomials() {
        assert_eq!(binomial(q(1, 2), 2), rat(-1, 8));
        assert_eq!(binomial(q(1, 2), 3), rat(1, 16));
        assert_eq!(binomial(q(-1, 1), 4), rat(1, 1));
        assert_eq!(binomial(q(5, 1), 6), rat(0, 1));
    }
}
