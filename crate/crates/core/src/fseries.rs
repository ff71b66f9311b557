//! Sparse multivariate formal Laurent series with rational exponents and one
//! Grassmann variable `phi` (phi^2 = 0).
//!
//! Every series is finite. Infinite objects (delta functions, binomial tails,
//! exponentials) are truncated when they are built and the truncation is noted
//! in `meta`; everything after that is exact.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Debug};

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::{binomial, lcm, q, Scalar, Q};
use crate::report::CheckReport;

/// Coefficient types a series can carry.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync {
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn scale(&self, s: &Scalar) -> Self;
    fn neg(&self) -> Self;
    fn render(&self) -> String;
    /// The cycle length of the scalar ring this coefficient lives over.
    fn ring(&self) -> u32;
}

impl Coeff for Scalar {
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        self.add_in_place(other).expect("coefficients from one ring");
    }
    fn scale(&self, s: &Scalar) -> Self {
        s.mul(self).expect("coefficients from one ring")
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn ring(&self) -> u32 {
        self.k()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    /// Exponents of this variable lie in (1/den)Z.
    pub den: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub e: Vec<Q>,
    pub phi: bool,
}

#[derive(Clone)]
pub struct Series<C> {
    vars: Vec<Var>,
    terms: BTreeMap<Mono, C>,
    meta: String,
}

impl<C: Coeff> PartialEq for Series<C> {
    fn eq(&self, other: &Self) -> bool {
        let vars = union_vars(&self.vars, &other.vars);
        self.aligned(&vars).terms == other.aligned(&vars).terms
    }
}

impl<C: Coeff> Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

fn union_vars(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut map: BTreeMap<&str, i64> = BTreeMap::new();
    for v in a.iter().chain(b) {
        let d = map.entry(&v.name).or_insert(1);
        *d = lcm(*d, v.den);
    }
    map.into_iter().map(|(name, den)| Var { name: name.to_string(), den }).collect()
}

fn render_q(x: Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("({}/{})", x.numer(), x.denom())
    }
}

impl<C: Coeff> Default for Series<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> Series<C> {
    pub fn zero() -> Self {
        Series { vars: Vec::new(), terms: BTreeMap::new(), meta: String::new() }
    }

    /// A single term `c * prod name^e * phi^phi`.
    pub fn term(exps: &[(&str, Q)], phi: bool, c: C) -> Self {
        let mut s = Self::zero();
        s.push(exps, phi, c);
        s
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = meta.into();
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Exponent of `name` in a monomial of this series.
    pub fn exponent(&self, m: &Mono, name: &str) -> Q {
        self.index(name).map_or_else(Q::zero, |i| m.e[i])
    }

    /// Named view of a monomial.
    pub fn named(&self, m: &Mono) -> Vec<(String, Q)> {
        self.vars.iter().zip(&m.e).filter(|(_, e)| !e.is_zero()).map(|(v, e)| (v.name.clone(), *e)).collect()
    }

    /// Widens the declared lattice of `name` to include (1/den)Z.
    pub fn declare(mut self, name: &str, den: i64) -> Self {
        let vars = union_vars(&self.vars, &[Var { name: name.to_string(), den }]);
        self = self.aligned(&vars);
        self
    }

    pub fn lattice(&self, name: &str) -> Option<i64> {
        self.index(name).map(|i| self.vars[i].den)
    }

    fn aligned(&self, vars: &[Var]) -> Self {
        if vars == self.vars.as_slice() {
            return self.clone();
        }
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w.name == v.name).expect("superset of variables"))
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = vec![Q::zero(); vars.len()];
                for (i, &j) in map.iter().enumerate() {
                    e[j] = m.e[i];
                }
                (Mono { e, phi: m.phi }, c.clone())
            })
            .collect();
        Series { vars: vars.to_vec(), terms, meta: self.meta.clone() }
    }

    fn add_mono(&mut self, m: Mono, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Adds `c * monomial` into this series.
    pub fn push(&mut self, exps: &[(&str, Q)], phi: bool, c: C) {
        let extra: Vec<Var> = exps
            .iter()
            .map(|(n, e)| Var { name: n.to_string(), den: *e.denom() })
            .collect();
        let vars = union_vars(&self.vars, &extra);
        if vars != self.vars {
            *self = self.aligned(&vars);
        }
        let mut e = vec![Q::zero(); self.vars.len()];
        for (n, x) in exps {
            let i = self.index(n).expect("declared above");
            e[i] += *x;
        }
        self.add_mono(Mono { e, phi }, c);
    }

    pub fn add(&self, other: &Self) -> Self {
        let vars = union_vars(&self.vars, &other.vars);
        let mut out = self.aligned(&vars);
        for (m, c) in other.aligned(&vars).terms {
            out.add_mono(m, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Series {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Series { vars: self.vars.clone(), terms: BTreeMap::new(), meta: self.meta.clone() };
        for (m, c) in &self.terms {
            out.add_mono(m.clone(), c.scale(s));
        }
        out
    }

    /// `s * self`, dropping any product term whose exponent of a capped
    /// variable exceeds its cap.
    pub fn mul_by_capped(&self, s: &Series<Scalar>, caps: &[(&str, Q)]) -> Self {
        let vars = union_vars(&self.vars, &s.vars);
        let a = s.aligned(&vars);
        let b = self.aligned(&vars);
        let caps: Vec<(usize, Q)> = caps
            .iter()
            .filter_map(|(n, cap)| vars.iter().position(|v| v.name == *n).map(|i| (i, *cap)))
            .collect();
        let mut out = Series { vars: vars.clone(), terms: BTreeMap::new(), meta: join_meta(&s.meta, &self.meta) };
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                if ma.phi && mb.phi {
                    continue;
                }
                let e: Vec<Q> = ma.e.iter().zip(&mb.e).map(|(x, y)| x + y).collect();
                if caps.iter().any(|(i, cap)| e[*i] > *cap) {
                    continue;
                }
                out.add_mono(Mono { e, phi: ma.phi || mb.phi }, cb.scale(ca));
            }
        }
        out
    }

    pub fn mul_by(&self, s: &Series<Scalar>) -> Self {
        self.mul_by_capped(s, &[])
    }

    pub fn filter(&self, keep: impl Fn(&Self, &Mono) -> bool) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| keep(self, m)).map(|(m, c)| (m.clone(), c.clone())).collect();
        Series { vars: self.vars.clone(), terms, meta: self.meta.clone() }
    }

    /// Keeps exponents of `name` inside the (optional) bounds.
    pub fn truncate(&self, name: &str, lo: Option<Q>, hi: Option<Q>) -> Self {
        let out = self.filter(|s, m| {
            let e = s.exponent(m, name);
            lo.is_none_or(|l| e >= l) && hi.is_none_or(|h| e <= h)
        });
        let note = format!("{name} in [{}, {}]", lo.map_or("-inf".into(), render_q), hi.map_or("inf".into(), render_q));
        out.with_meta(join_meta(&self.meta, &format!("truncated {note}")))
    }

    pub fn restrict(&self, w: &Window) -> Self {
        self.filter(|s, m| w.contains(s, m))
    }

    /// Coefficient of `name^e`, as a series in the remaining variables.
    pub fn coefficient(&self, name: &str, e: Q) -> Self {
        let Some(i) = self.index(name) else {
            return if e.is_zero() { self.clone() } else { Self::zero() };
        };
        let mut vars = self.vars.clone();
        vars.remove(i);
        let mut out = Series { vars, terms: BTreeMap::new(), meta: self.meta.clone() };
        for (m, c) in &self.terms {
            if m.e[i] == e {
                let mut ee = m.e.clone();
                ee.remove(i);
                out.add_mono(Mono { e: ee, phi: m.phi }, c.clone());
            }
        }
        out
    }

    pub fn residue(&self, name: &str) -> Self {
        self.coefficient(name, -Q::one())
    }

    /// Coefficient of a full monomial (variables not listed have exponent 0).
    pub fn coeff_at(&self, exps: &[(&str, Q)], phi: bool) -> Option<C> {
        let mut e = vec![Q::zero(); self.vars.len()];
        for (n, x) in exps {
            match self.index(n) {
                Some(i) => e[i] += *x,
                None if x.is_zero() => {}
                None => return None,
            }
        }
        self.terms.get(&Mono { e, phi }).cloned()
    }

    /// The part of the series with the given phi-degree, phi removed.
    pub fn phi_component(&self, phi: bool) -> Self {
        let mut out = Series { vars: self.vars.clone(), terms: BTreeMap::new(), meta: self.meta.clone() };
        for (m, c) in &self.terms {
            if m.phi == phi {
                out.add_mono(Mono { e: m.e.clone(), phi: false }, c.clone());
            }
        }
        out
    }

    /// Multiplies by phi (annihilating phi-odd terms).
    pub fn times_phi(&self) -> Self {
        let mut out = Series { vars: self.vars.clone(), terms: BTreeMap::new(), meta: self.meta.clone() };
        for (m, c) in &self.terms {
            if !m.phi {
                out.add_mono(Mono { e: m.e.clone(), phi: true }, c.clone());
            }
        }
        out
    }

    pub fn derivative(&self, name: &str) -> Self {
        let Some(i) = self.index(name) else {
            return Self::zero();
        };
        let mut out = Series { vars: self.vars.clone(), terms: BTreeMap::new(), meta: self.meta.clone() };
        for (m, c) in &self.terms {
            let e = m.e[i];
            if e.is_zero() {
                continue;
            }
            let mut mm = m.clone();
            mm.e[i] -= Q::one();
            let k = c.ring();
            out.add_mono(mm, c.scale(&Scalar::from_q(k, e)));
        }
        out
    }

    /// Applies `e -> f(e)` to every exponent of `name`; `den` is the new lattice.
    pub fn map_exponent(&self, name: &str, den: i64, f: impl Fn(Q) -> Q) -> Self {
        let Some(i) = self.index(name) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        vars[i].den = den;
        let mut out = Series { vars, terms: BTreeMap::new(), meta: self.meta.clone() };
        for (m, c) in &self.terms {
            let mut mm = m.clone();
            mm.e[i] = f(m.e[i]);
            out.add_mono(mm, c.clone());
        }
        out
    }

    /// Principal-branch substitution `name -> name^c`, so that (x^k)^(1/k) = x.
    pub fn power_substitute(&self, name: &str, c: Q) -> Self {
        let den = self.lattice(name).unwrap_or(1);
        let new_den = lcm(den * c.numer().abs(), *c.denom()) / c.numer().abs().max(1);
        self.map_exponent(name, new_den.max(1), |e| e * c)
            .with_meta(join_meta(&self.meta, &format!("{name} -> {name}^{}", render_q(c))))
    }

    /// The branch substitution `name^(1/k) -> eta^j name^(1/k)`: the coefficient
    /// of name^e picks up eta^(j k e).
    pub fn eta_substitute(&self, name: &str, j: i64, k: u32) -> Result<Self> {
        let Some(i) = self.index(name) else {
            return Ok(self.clone());
        };
        let mut out = Series { vars: self.vars.clone(), terms: BTreeMap::new(), meta: self.meta.clone() };
        for (m, c) in &self.terms {
            let ke = m.e[i] * Q::from_integer(k as i64);
            if !ke.is_integer() {
                return Err(Error::OffLattice { var: name.to_string(), exponent: render_q(m.e[i]), k });
            }
            let factor = Scalar::t_pow(c.ring(), j * ke.to_integer());
            out.add_mono(m.clone(), c.scale(&factor));
        }
        Ok(out)
    }

    pub fn rename(&self, from: &str, to: &str) -> Self {
        let Some(i) = self.index(from) else {
            return self.clone();
        };
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut exps: Vec<(&str, Q)> = Vec::new();
            for (j, v) in self.vars.iter().enumerate() {
                exps.push((if j == i { to } else { v.name.as_str() }, m.e[j]));
            }
            out.push(&exps, m.phi, c.clone());
        }
        out.with_meta(self.meta.clone())
    }

    /// Verifies that every exponent of `name` lies in (1/den)Z.
    pub fn check_lattice(&self, name: &str, den: i64, k: u32) -> Result<()> {
        if let Some(i) = self.index(name) {
            for m in self.terms.keys() {
                if !(m.e[i] * Q::from_integer(den)).is_integer() {
                    return Err(Error::OffLattice { var: name.to_string(), exponent: render_q(m.e[i]), k });
                }
            }
        }
        Ok(())
    }

    pub fn exponents(&self, name: &str) -> BTreeSet<Q> {
        self.terms.keys().map(|m| self.exponent(m, name)).collect()
    }

    pub fn render_mono(&self, m: &Mono) -> String {
        let mut parts: Vec<String> = self
            .named(m)
            .into_iter()
            .map(|(n, e)| if e.is_one() { n } else { format!("{n}^{}", render_q(e)) })
            .collect();
        if m.phi {
            parts.push("phi".into());
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, c)| format!("({})*{}", c.render(), self.render_mono(m)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Canonical JSON: terms in sorted exponent order.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let exps: serde_json::Map<String, Value> = self
                    .named(m)
                    .into_iter()
                    .map(|(n, e)| (n, Value::String(render_q(e).trim_matches(['(', ')']).to_string())))
                    .collect();
                json!({"exp": exps, "phi": m.phi, "coeff": c.render()})
            })
            .collect();
        json!({
            "vars": self.vars.iter().map(|v| json!({"name": v.name, "den": v.den})).collect::<Vec<_>>(),
            "terms": terms,
            "meta": self.meta,
        })
    }
}

fn join_meta(a: &str, b: &str) -> String {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.to_string(),
        (_, true) => a.to_string(),
        _ if a == b => a.to_string(),
        _ => format!("{a}; {b}"),
    }
}

impl Series<Scalar> {
    pub fn constant(c: Scalar) -> Self {
        Self::term(&[], false, c)
    }

    pub fn one(k: u32) -> Self {
        Self::constant(Scalar::one(k))
    }

    /// The monomial `name^e` with coefficient 1.
    pub fn monomial(k: u32, exps: &[(&str, Q)]) -> Self {
        Self::term(exps, false, Scalar::one(k))
    }

    pub fn phi(k: u32) -> Self {
        Self::term(&[], true, Scalar::one(k))
    }

    pub fn mul(&self, other: &Self) -> Self {
        other.mul_by(self)
    }

    pub fn mul_capped(&self, other: &Self, caps: &[(&str, Q)]) -> Self {
        other.mul_by_capped(self, caps)
    }

    pub fn pow_capped(&self, n: u32, k: u32, caps: &[(&str, Q)]) -> Self {
        let mut acc = Self::one(k);
        for _ in 0..n {
            acc = acc.mul_capped(self, caps);
        }
        acc
    }

    /// sum_{j=0}^{order} C(r, j) u^j.
    pub fn one_plus_pow(u: &Self, r: Q, order: u32, k: u32, caps: &[(&str, Q)]) -> Self {
        let mut out = Self::zero();
        let mut power = Self::one(k);
        for j in 0..=order {
            let c = binomial(r, j);
            if !c.is_zero() {
                out = out.add(&power.scale(&Scalar::from_rat(k, c)));
            }
            if j < order {
                power = power.mul_capped(u, caps);
                if power.is_zero() {
                    break;
                }
            }
        }
        out.with_meta(format!("binomial series truncated at order {order}"))
    }

    /// Single-term series raised to a rational power; the coefficient must be
    /// 1 unless the power is an integer.
    pub fn monomial_pow(&self, r: Q) -> Result<Self> {
        if self.terms.len() != 1 {
            return Err(Error::CompositionDomain(format!("not a monomial: {}", self.render())));
        }
        let (m, c) = self.terms.iter().next().expect("one term");
        if m.phi {
            return Err(Error::CompositionDomain("power of an odd monomial".into()));
        }
        let coeff = if c.is_one() {
            c.clone()
        } else if r.is_integer() {
            c.pow(r.to_integer())?
        } else {
            return Err(Error::NotInvertible(format!("{c} to the power {}", render_q(r))));
        };
        let mut vars = self.vars.clone();
        for (v, e) in vars.iter_mut().zip(&m.e) {
            v.den = lcm(v.den, *(e * r).denom());
        }
        let mut out = Series { vars, terms: BTreeMap::new(), meta: String::new() };
        out.add_mono(Mono { e: m.e.iter().map(|e| e * r).collect(), phi: false }, coeff);
        Ok(out)
    }

    /// Formal composition: replaces `var` by `repl`.
    ///
    /// Nonnegative integer powers are computed exactly. Other powers write
    /// `repl = lead * (1 + u)` where `lead` is the term of lowest exponent in
    /// `expand_in`, and expand `(1 + u)^e` to `order`.
    pub fn substitute(&self, var: &str, repl: &Self, expand_in: &str, order: u32, caps: &[(&str, Q)]) -> Result<Self> {
        let k = self.ring_k().or_else(|| repl.ring_k()).unwrap_or(1);
        let Some(i) = self.index(var) else {
            return Ok(self.clone());
        };
        let mut rest_vars = self.vars.clone();
        rest_vars.remove(i);
        let mut lead_tail: Option<(Self, Self)> = None;
        let mut cache: HashMap<Q, Self> = HashMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.e[i];
            let mut rest_e = m.e.clone();
            rest_e.remove(i);
            let mut rest = Series { vars: rest_vars.clone(), terms: BTreeMap::new(), meta: String::new() };
            rest.add_mono(Mono { e: rest_e, phi: m.phi }, c.clone());
            if !cache.contains_key(&e) {
                let p = if e.is_integer() && !e.is_negative() {
                    repl.pow_capped(e.to_integer() as u32, k, caps)
                } else {
                    if lead_tail.is_none() {
                        lead_tail = Some(split_lead(repl, expand_in)?);
                    }
                    let (lead, u) = lead_tail.as_ref().expect("set above");
                    let lead_e = lead.monomial_pow(e)?;
                    let (lm, _) = lead_e.terms.iter().next().expect("one term");
                    let shifted: Vec<(&str, Q)> = caps.iter().map(|(n, c)| (*n, *c - lead_e.exponent(lm, n))).collect();
                    lead_e.mul_capped(&Self::one_plus_pow(u, e, order, k, &shifted), caps)
                };
                cache.insert(e, p);
            }
            out = out.add(&rest.mul_capped(&cache[&e], caps));
        }
        Ok(out.with_meta(format!("{var} substituted, order {order} in {expand_in}")))
    }

    fn ring_k(&self) -> Option<u32> {
        self.terms.values().next().map(Scalar::k)
    }
}

/// Splits `s` as `lead * (1 + u)` with `u` of positive order in `var`.
fn split_lead(s: &Series<Scalar>, var: &str) -> Result<(Series<Scalar>, Series<Scalar>)> {
    let min = s
        .terms
        .keys()
        .map(|m| s.exponent(m, var))
        .min()
        .ok_or_else(|| Error::CompositionDomain("substituting the zero series".into()))?;
    let lead = s.filter(|ss, m| ss.exponent(m, var) == min);
    if lead.len() != 1 {
        return Err(Error::CompositionDomain(format!("leading part in {var} is not a monomial: {}", lead.render())));
    }
    let inv = lead.monomial_pow(-Q::one())?;
    let k = lead.ring_k().unwrap_or(1);
    let u = s.sub(&lead).mul(&inv);
    if u.terms.keys().any(|m| u.exponent(m, var) <= Q::zero()) {
        return Err(Error::CompositionDomain(format!("tail is not of positive order in {var}")));
    }
    let _ = k;
    Ok((lead, u))
}

/// (v1 + v2)^r expanded in nonnegative powers of v2, where v1 is a monomial.
pub fn binom_expand(k: u32, v1: &Series<Scalar>, v2: &Series<Scalar>, r: Q, order: u32) -> Result<Series<Scalar>> {
    let lead = v1.monomial_pow(r)?;
    let u = v2.mul(&v1.monomial_pow(-Q::one())?);
    Ok(lead
        .mul(&Series::one_plus_pow(&u, r, order, k, &[]))
        .with_meta(format!("binomial expansion to order {order}")))
}

/// (a + sign*b)^r for two plain variables, expanded in b.
pub fn binom_vars(k: u32, a: &str, sign: i64, b: &str, r: Q, order: u32) -> Series<Scalar> {
    let mut out = Series::zero();
    for j in 0..=order {
        let c = binomial(r, j);
        if c.is_zero() {
            continue;
        }
        let sg = if sign < 0 && j % 2 == 1 { -c } else { c };
        out.push(&[(a, r - Q::from_integer(j as i64)), (b, Q::from_integer(j as i64))], false, Scalar::from_rat(k, sg));
    }
    out.with_meta(format!("({a} {} {b})^{} to order {order} in {b}", if sign < 0 { "-" } else { "+" }, render_q(r)))
}

/// Per-variable closed exponent boxes; variables not listed are unconstrained.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Window {
    ranges: BTreeMap<String, (Q, Q)>,
}

impl Window {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, lo: Q, hi: Q) -> Self {
        assert!(lo <= hi, "empty window for {name}");
        self.ranges.insert(name.to_string(), (lo, hi));
        self
    }

    pub fn with_int(self, name: &str, lo: i64, hi: i64) -> Self {
        self.with(name, Q::from_integer(lo), Q::from_integer(hi))
    }

    pub fn contains<C: Coeff>(&self, s: &Series<C>, m: &Mono) -> bool {
        self.ranges.iter().all(|(n, (lo, hi))| {
            let e = s.exponent(m, n);
            *lo <= e && e <= *hi
        })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ranges
            .iter()
            .map(|(n, (lo, hi))| format!("{n}:[{},{}]", render_q(*lo), render_q(*hi)))
            .collect();
        if parts.is_empty() {
            f.write_str("all")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Compares two series coefficient-wise inside a window.
pub fn assert_equal_on_window<C: Coeff>(identity: &str, a: &Series<C>, b: &Series<C>, w: &Window) -> CheckReport {
    let mut report = CheckReport::new(identity, w.to_string());
    let ra = a.restrict(w);
    let rb = b.restrict(w);
    let vars = union_vars(&ra.vars, &rb.vars);
    let ra = ra.aligned(&vars);
    let rb = rb.aligned(&vars);
    let keys: BTreeSet<&Mono> = ra.terms.keys().chain(rb.terms.keys()).collect();
    report.compared = keys.len();
    for m in keys {
        let (x, y) = (ra.terms.get(m), rb.terms.get(m));
        if x != y {
            let show = |c: Option<&C>| c.map_or("0".to_string(), Coeff::render);
            report.fail(format!("{}: {} vs {}", ra.render_mono(m), show(x), show(y)));
            break;
        }
    }
    report
}

/// Description of a truncated delta function
/// `den^-1 * sum_m eta^(eta*m) * ((lead + sign*other) / (den_sign*den))^(m/root + shift)`.
#[derive(Clone, Debug)]
pub struct DeltaArg<'a> {
    pub lead: &'a str,
    pub other: &'a str,
    pub sign: i64,
    pub den: &'a str,
    pub den_sign: i64,
    pub root: i64,
    pub shift: Q,
    pub eta: i64,
}

impl<'a> DeltaArg<'a> {
    pub fn new(lead: &'a str, sign: i64, other: &'a str, den: &'a str) -> Self {
        DeltaArg { lead, other, sign, den, den_sign: 1, root: 1, shift: Q::zero(), eta: 0 }
    }
}

/// The delta function of `arg` with m in `range`, each binomial truncated at `order`.
pub fn delta_truncated(k: u32, arg: &DeltaArg, range: (i64, i64), order: u32) -> Series<Scalar> {
    let mut out = Series::zero();
    for m in range.0..=range.1 {
        let e = q(m, arg.root) + arg.shift;
        let mut c = Scalar::t_pow(k, arg.eta * m);
        if arg.den_sign < 0 {
            assert!(e.is_integer(), "negated denominator needs integral exponents");
            if e.to_integer() % 2 != 0 {
                c = c.neg();
            }
        }
        let body = binom_vars(k, arg.lead, arg.sign, arg.other, e, order);
        let pre = Series::term(&[(arg.den, -e - Q::one())], false, c);
        out = out.add(&body.mul(&pre));
    }
    out.with_meta(format!("delta over m in [{}, {}], binomial order {order}", range.0, range.1))
}

/// x2^-1 ((x1-x0)/x2)^r delta((x1-x0)/x2) = x1^-1 ((x2+x0)/x1)^-r delta((x2+x0)/x1).
pub fn check_delta_substitution(k: u32, r: Q, n: i64, order: u32) -> CheckReport {
    let mut shifted = DeltaArg::new("x1", -1, "x0", "x2");
    shifted.shift = Q::zero();
    let base = delta_truncated(k, &shifted, (-n, n), order);
    let factor = binom_vars(k, "x1", -1, "x0", r, order).mul(&Series::monomial(k, &[("x2", -r)]));
    let lhs = base.mul(&factor).truncate("x0", None, Some(Q::from_integer(order as i64)));
    let mut rhs_arg = DeltaArg::new("x2", 1, "x0", "x1");
    rhs_arg.shift = -r;
    let rhs = delta_truncated(k, &rhs_arg, (-n, n), order);
    let m = Q::from_integer(order as i64);
    let nn = Q::from_integer(n);
    let w = Window::new().with("x0", Q::zero(), m).with("x1", r - nn, r + nn - m);
    assert_equal_on_window("delta substitution", &lhs, &rhs, &w)
}

/// sum_p ((x1-x0)/x2)^(p/k) x2^-1 delta((x1-x0)/x2) = x2^-1 delta((x1-x0)^(1/k)/x2^(1/k)).
pub fn check_delta_roots(k: u32, r: Q, n: i64, order: u32) -> CheckReport {
    let kk = k as i64;
    let base = delta_truncated(k, &DeltaArg::new("x1", -1, "x0", "x2"), (-n, n), order);
    let mut lhs = Series::zero();
    for p in 0..kk {
        let e = q(p, kk) + r;
        let factor = binom_vars(k, "x1", -1, "x0", e, order).mul(&Series::monomial(k, &[("x2", -e)]));
        lhs = lhs.add(&base.mul(&factor));
    }
    let lhs = lhs.truncate("x0", None, Some(Q::from_integer(order as i64)));
    let mut arg = DeltaArg::new("x1", -1, "x0", "x2");
    arg.root = kk;
    arg.shift = r;
    let rhs = delta_truncated(k, &arg, (-kk * n, kk * n + kk - 1), order);
    let w = Window::new().with("x0", Q::zero(), Q::from_integer(order as i64));
    assert_equal_on_window("delta roots", &lhs, &rhs, &w)
}

/// x2^-1 delta((x1-x0)^(1/k)/x2^(1/k)) = x1^-1 delta((x2+x0)^(1/k)/x1^(1/k)),
/// optionally multiplied through by ((x1-x0)/x2)^r.
pub fn check_delta_root_substitution(k: u32, r: Q, n: i64, order: u32) -> CheckReport {
    let kk = k as i64;
    let big = kk * n;
    let mut left = DeltaArg::new("x1", -1, "x0", "x2");
    left.root = kk;
    left.shift = r;
    let mut right = DeltaArg::new("x2", 1, "x0", "x1");
    right.root = kk;
    right.shift = -r;
    let lhs = delta_truncated(k, &left, (-big, big), order);
    let rhs = delta_truncated(k, &right, (-big, big), order);
    let m = Q::from_integer(order as i64);
    let nn = Q::from_integer(n);
    let w = Window::new().with("x0", Q::zero(), m).with("x1", r - nn, r + nn - m);
    assert_equal_on_window("delta root substitution", &lhs, &rhs, &w)
}

/// x0^-1 delta((x1-x2)/x0) - x0^-1 delta((x2-x1)/(-x0)) = x2^-1 delta((x1-x0)/x2).
pub fn check_three_term(k: u32, n: i64, order: u32) -> CheckReport {
    let t1 = delta_truncated(k, &DeltaArg::new("x1", -1, "x2", "x0"), (-n, n), order);
    let mut a2 = DeltaArg::new("x2", -1, "x1", "x0");
    a2.den_sign = -1;
    let t2 = delta_truncated(k, &a2, (-n, n), order);
    let rhs = delta_truncated(k, &DeltaArg::new("x1", -1, "x0", "x2"), (-n, n), order);
    let lhs = t1.sub(&t2);
    let a = (order as i64).min(n / 2);
    let i = (order as i64).min(n - a);
    let w = Window::new().with_int("x0", -i, i).with_int("x1", -a, a).with_int("x2", -a, a);
    assert_equal_on_window("three-term delta", &lhs, &rhs, &w)
}

/// All delta identities for one (k, r).
pub fn delta_suite(k: u32, r: Q, n: i64, order: u32) -> Vec<CheckReport> {
    vec![
        check_delta_substitution(k, r, n, order),
        check_delta_roots(k, r, n, order),
        check_delta_root_substitution(k, r, n, order),
        check_three_term(k, n, order),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use proptest::prelude::*;

    fn x(e: Q) -> Series<Scalar> {
        Series::monomial(3, &[("x", e)])
    }

    #[test]
    fn half_powers_multiply() {
        assert_eq!(x(q(1, 2)).mul(&x(q(1, 2))), x(q(1, 1)));
    }

    #[test]
    fn grassmann_square_vanishes() {
        let p = Series::phi(3);
        assert!(p.mul(&p).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let one = Series::one(3);
        let a = one.add(&x(q(1, 1)));
        let b = one.sub(&x(q(1, 1)));
        assert_eq!(a.mul(&b), one.sub(&x(q(2, 1))));
    }

    #[test]
    fn binomial_examples() {
        let k = 1;
        let sq = binom_vars(k, "x1", -1, "x2", q(2, 1), 5);
        let mut want = Series::zero();
        want.push(&[("x1", q(2, 1))], false, Scalar::one(k));
        want.push(&[("x1", q(1, 1)), ("x2", q(1, 1))], false, Scalar::from_int(k, -2));
        want.push(&[("x2", q(2, 1))], false, Scalar::one(k));
        assert_eq!(sq, want);

        let half = Series::one_plus_pow(&Series::monomial(k, &[("u", q(1, 1))]), q(1, 2), 3, k, &[]);
        let mut want = Series::one(k);
        for (j, c) in [(1, rat(1, 2)), (2, rat(-1, 8)), (3, rat(1, 16))] {
            want.push(&[("u", q(j, 1))], false, Scalar::from_rat(k, c));
        }
        assert_eq!(half, want);

        let third = binom_vars(k, "x2", 1, "x0", q(-1, 3), 2);
        let mut want = Series::zero();
        want.push(&[("x2", q(-1, 3))], false, Scalar::one(k));
        want.push(&[("x2", q(-4, 3)), ("x0", q(1, 1))], false, Scalar::from_rat(k, rat(-1, 3)));
        want.push(&[("x2", q(-7, 3)), ("x0", q(2, 1))], false, Scalar::from_rat(k, rat(2, 9)));
        assert_eq!(third, want);
    }

    #[test]
    fn residues() {
        let s = x(q(-1, 1)).add(&Series::constant(Scalar::from_int(3, 2))).add(&x(q(1, 1)));
        assert_eq!(s.residue("x"), Series::one(3));
        let t = Series::monomial(3, &[("x", q(-1, 1)), ("y", q(2, 1))]);
        assert_eq!(t.residue("x"), Series::monomial(3, &[("y", q(2, 1))]));
    }

    #[test]
    fn substitutions() {
        let s = x(q(2, 1));
        assert_eq!(s.power_substitute("x", q(1, 3)), x(q(2, 3)));
        assert_eq!(x(q(1, 1)).power_substitute("x", q(3, 1)).power_substitute("x", q(1, 3)), x(q(1, 1)));
        let twisted = x(q(1, 3)).eta_substitute("x", 1, 3).unwrap();
        assert_eq!(twisted, Series::term(&[("x", q(1, 3))], false, Scalar::t(3)));
        assert!(x(q(1, 2)).eta_substitute("x", 1, 3).is_err());
    }

    #[test]
    fn composition_with_inverse() {
        // f(x) = x + x^2, f^{-1}(x) = x - x^2 + 2x^3 - 5x^4 + ...
        let k = 1;
        let mut f = Series::monomial(k, &[("x", q(1, 1))]);
        f.push(&[("x", q(2, 1))], false, Scalar::one(k));
        let mut g = Series::zero();
        for (e, c) in [(1, 1), (2, -1), (3, 2), (4, -5), (5, 14)] {
            g.push(&[("x", q(e, 1))], false, Scalar::from_int(k, c));
        }
        let cap = [("x", q(5, 1))];
        let fg = f.substitute("x", &g, "x", 5, &cap).unwrap();
        assert_eq!(fg, Series::monomial(k, &[("x", q(1, 1))]));
        let s = Series::monomial(k, &[("x", q(-2, 1))]).add(&Series::monomial(k, &[("x", q(3, 1))]));
        let back = s
            .substitute("x", &f, "x", 8, &[("x", q(4, 1))])
            .unwrap()
            .substitute("x", &g, "x", 8, &[("x", q(4, 1))])
            .unwrap();
        let w = Window::new().with_int("x", -2, 1);
        assert!(assert_equal_on_window("roundtrip", &back, &s, &w).passed());
    }

    #[test]
    fn window_ignores_tail() {
        let a = x(q(1, 1));
        let b = a.add(&x(q(5, 1)));
        let w = Window::new().with_int("x", 0, 4);
        assert!(assert_equal_on_window("tail", &a, &b, &w).passed());
        let w = Window::new().with_int("x", 0, 5);
        let r = assert_equal_on_window("tail", &a, &b, &w);
        assert!(!r.passed());
        assert!(r.first_mismatch.unwrap().starts_with("x^5"));
    }

    #[test]
    fn delta_plain_truncation() {
        let d = delta_truncated(1, &DeltaArg::new("x1", 1, "x0", "x2"), (-3, 3), 0);
        assert_eq!(d.len(), 7);
        assert!(d.coeff_at(&[("x1", q(2, 1)), ("x2", q(-3, 1))], false).unwrap().is_one());
    }

    #[test]
    fn delta_identities() {
        for k in [1u32, 2, 3, 5] {
            for r in [q(0, 1), q(1, 2), q(1, 3)] {
                for rep in delta_suite(k, r, 4, 2) {
                    assert!(rep.passed(), "k={k} r={r} {:?}", rep);
                    assert!(rep.compared > 0);
                }
            }
        }
    }

    fn arb_series() -> impl Strategy<Value = Series<Scalar>> {
        proptest::collection::vec((-3i64..=3, 1i64..=3, any::<bool>(), -4i64..=4), 0..5).prop_map(|ts| {
            let mut s = Series::zero();
            for (n, d, phi, c) in ts {
                s.push(&[("x", q(n, d))], phi, Scalar::from_int(2, c));
            }
            s
        })
    }

    proptest! {
        #[test]
        fn supercommutative(a in arb_series(), b in arb_series()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn distributive(a in arb_series(), b in arb_series(), c in arb_series()) {
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }
}
