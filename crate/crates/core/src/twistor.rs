//! The operator Delta_k, the fields Ybar(u, x) = Y_M(Delta_k(x) u, x^{1/k}) on
//! the free fermion module M = V, the (1 2 ... k)-twisted modes built from
//! them, and the checks that tie the construction together.
//!
//! Throughout, M is the adjoint module, so every vector (of M or of V) is a
//! single-slot `FermionVector`; vectors of the tensor power carry k slots.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use num_traits::{One, Zero};
use serde_json::json;

use crate::changeofvars::compute_a;
use crate::error::{Error, Result};
use crate::exactnum::{binomial, q, rat, Q, Rat, Scalar};
use crate::fermion::{self, omega, psi, weight2, FermionVector, State};
use crate::fseries::{assert_equal_on_window, binom_vars, Coeff, Series, Window};
use crate::report::{CheckReport, Status};

/// Number of a_j computed up front; enough for vectors of weight below this.
const A_ORDER: usize = 10;

/// Central charge of one free fermion.
fn c_fer() -> Rat {
    rat(fermion::CENTRAL_CHARGE.0, fermion::CENTRAL_CHARGE.1)
}

fn qk(k: u32) -> Q {
    Q::from_integer(k as i64)
}

fn floor_q(x: Q) -> i64 {
    x.floor().to_integer()
}

/// Largest doubled weight among the terms of a single-slot vector.
pub fn max_weight2(v: &FermionVector) -> i64 {
    v.terms().map(|(t, _)| t.iter().map(|s| weight2(s)).sum::<i64>()).max().unwrap_or(0)
}

fn parity_of(v: &FermionVector) -> u8 {
    v.parity().unwrap_or(0)
}

/// Highest twisted mode of a weight-p field that can act nontrivially on w:
/// p - 1 + wt(w)/k.
pub fn twisted_top(u_w2: i64, w: &FermionVector, k: u32) -> Q {
    q(u_w2, 2) - Q::one() + q(max_weight2(w), 2 * k as i64)
}

/// One summand u(j) x^{exponent} of Delta_k(x) u (or of its inverse).
#[derive(Clone, Debug)]
pub struct Component {
    pub drop: i64,
    pub exponent: Q,
    pub vector: FermionVector,
}

/// Delta_k(x) = exp(sum_j a_j x^{-j/k} L(j)) k^{-L(0)} x^{(1/k - 1) L(0)} on V.
pub struct DeltaOp {
    k: u32,
    a: Vec<Rat>,
    cache: Mutex<HashMap<(bool, String), Vec<Component>>>,
}

impl DeltaOp {
    pub fn new(k: u32) -> Self {
        let a = compute_a(k, A_ORDER).into_iter().map(|c| c.as_rat().expect("rational").clone()).collect();
        Self::with_coefficients(k, a)
    }

    /// A Delta operator with a prescribed a_j table (a[0] = a_1).
    pub fn with_coefficients(k: u32, a: Vec<Rat>) -> Self {
        DeltaOp { k, a, cache: Mutex::new(HashMap::new()) }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn a(&self) -> &[Rat] {
        &self.a
    }

    /// exp(sign * sum_j a_j y^j L(j)) u, keyed by the power of y.
    fn exp_l(&self, u: &FermionVector, sign: i64) -> BTreeMap<i64, FermionVector> {
        let mut total: BTreeMap<i64, FermionVector> = BTreeMap::new();
        let mut cur: BTreeMap<i64, FermionVector> = [(0, u.clone())].into_iter().collect();
        let mut n = 0i64;
        while !cur.is_empty() {
            for (d, v) in &cur {
                total.entry(*d).or_insert_with(|| FermionVector::zero(self.k)).add_assign(v);
            }
            n += 1;
            let mut next: BTreeMap<i64, FermionVector> = BTreeMap::new();
            for (d, v) in &cur {
                let w2 = max_weight2(v);
                for j in 1..=(w2 / 2) {
                    let aj = self.a.get(j as usize - 1).cloned().expect("a_j table too short");
                    if aj.is_zero() {
                        continue;
                    }
                    let lv = fermion::virasoro(j, v);
                    if lv.is_empty() {
                        continue;
                    }
                    let c = aj * rat(sign, n);
                    next.entry(d + j).or_insert_with(|| FermionVector::zero(self.k)).add_assign(&lv.scaled_rat(&c));
                }
            }
            next.retain(|_, v| !v.is_empty());
            cur = next;
        }
        total.retain(|_, v| !v.is_empty());
        total
    }

    /// The summands u(j) x^{p/k - p - j/k} of Delta_k(x) u, per homogeneous part.
    pub fn components(&self, u: &FermionVector) -> Vec<Component> {
        self.cached(u, false)
    }

    /// The summands of Delta_k(x)^{-1} u.
    pub fn inverse_components(&self, u: &FermionVector) -> Vec<Component> {
        self.cached(u, true)
    }

    fn cached(&self, u: &FermionVector, inverse: bool) -> Vec<Component> {
        let key = (inverse, u.render());
        if let Some(hit) = self.cache.lock().expect("delta cache").get(&key) {
            return hit.clone();
        }
        let k = self.k;
        let kq = qk(k);
        let mut out = Vec::new();
        for ((w2, _), part) in u.homogeneous_parts() {
            let p = q(w2, 2);
            if !inverse {
                let pre = Scalar::s_pow(k, -w2);
                for (j, v) in self.exp_l(&part, 1) {
                    let exponent = p / kq - p - q(j, 1) / kq;
                    out.push(Component { drop: j, exponent, vector: v.scaled(&pre) });
                }
            } else {
                for (j, v) in self.exp_l(&part, -1) {
                    let pj = p - q(j, 1);
                    let pre = Scalar::s_pow(k, w2 - 2 * j);
                    let exponent = -q(j, 1) / kq - (Q::one() / kq - Q::one()) * pj;
                    out.push(Component { drop: j, exponent, vector: v.scaled(&pre) });
                }
            }
        }
        self.cache.lock().expect("delta cache").insert(key, out.clone());
        out
    }

    fn as_series(parts: &[Component]) -> Series<FermionVector> {
        let mut s = Series::zero();
        for c in parts {
            s.push(&[("x", c.exponent)], false, c.vector.clone());
        }
        s
    }

    /// Delta_k(x) u (or its inverse) as a series in x.
    pub fn apply(&self, u: &FermionVector, invert: bool) -> Series<FermionVector> {
        let parts = if invert { self.inverse_components(u) } else { self.components(u) };
        Self::as_series(&parts).declare("x", 2 * self.k as i64)
    }

    /// Applies the operator (or its inverse) to every coefficient of a series in x.
    pub fn apply_series(&self, s: &Series<FermionVector>, invert: bool) -> Series<FermionVector> {
        let mut out = Series::zero();
        for (m, c) in s.iter() {
            let e = s.exponent(m, "x");
            let img = self.apply(c, invert);
            for (pm, pv) in img.iter() {
                out.push(&[("x", e + img.exponent(pm, "x"))], false, pv.clone());
            }
        }
        out
    }
}

/// Delta_k(x) u or its inverse with a freshly computed a_j table.
pub fn delta_apply(k: u32, u: &FermionVector, invert: bool) -> Series<FermionVector> {
    DeltaOp::new(k).apply(u, invert)
}

/// The coefficient of x^{-m-1} in Ybar(u, x) w, from the mode formula
/// sum_j u(j)_{(1-k)p - j - 1 + km + k}. No parity restriction on k.
pub fn ybar_mode(delta: &DeltaOp, u: &FermionVector, m: Q, w: &FermionVector) -> FermionVector {
    let k = delta.k();
    let kq = qk(k);
    let mut out = FermionVector::zero(k);
    for c in delta.components(u) {
        // x^{e - (n+1)/k} = x^{-m-1}  <=>  n = k(e + m + 1) - 1
        let n = kq * (c.exponent + m + Q::one()) - Q::one();
        if !n.is_integer() {
            continue;
        }
        out.add_assign(&fermion::mode(&c.vector, n.to_integer(), w));
    }
    out
}

/// Ybar(u, x) w = Y_M(Delta_k(x) u, x^{1/k}) w, computed by substituting
/// x^{1/k} into the module field, for modes m in [mlo, mhi].
pub fn ybar(delta: &DeltaOp, u: &FermionVector, w: &FermionVector, mlo: Q, mhi: Q) -> Series<FermionVector> {
    let k = delta.k();
    let kq = qk(k);
    let mut out = Series::zero().declare("x", 2 * k as i64);
    for c in delta.components(u) {
        let top = fermion::mode_bound(max_weight2(&c.vector), max_weight2(w));
        let field = fermion::vertex_op(&c.vector, w, top - 4 * k as i64 * (mhi - mlo + Q::one()).ceil().to_integer() - 8, top);
        // Y_M(v, y) with y = x^{1/k}, times x^{e}
        let sub = field.power_substitute("x", Q::one() / kq);
        for (mono, v) in sub.iter() {
            let e = sub.exponent(mono, "x") + c.exponent;
            let m = -e - Q::one();
            if m >= mlo && m <= mhi {
                out.push(&[("x", e)], false, v.clone());
            }
        }
    }
    out.with_meta(format!("modes in [{mlo}, {mhi}]"))
}

/// (u^1)^g_m w via the mode formula; refuses even k.
pub fn twisted_mode(delta: &DeltaOp, u: &FermionVector, m: Q, w: &FermionVector) -> Result<FermionVector> {
    if delta.k() % 2 == 0 {
        return Err(obstruction_error(delta.k()));
    }
    Ok(ybar_mode(delta, u, m, w))
}

fn obstruction_error(k: u32) -> Error {
    Error::Obstruction {
        k,
        detail: "odd fields carry exponents in 1/(2k) + (1/k)Z; see the obstruction certificate".into(),
    }
}

/// Y_g(u^{j+1}, x): the branch x^{1/k} -> eta^j x^{1/k} of Ybar(u, x).
pub fn other_slots(delta: &DeltaOp, u: &FermionVector, j: i64, w: &FermionVector, mlo: Q, mhi: Q) -> Result<Series<FermionVector>> {
    if delta.k() % 2 == 0 {
        return Err(obstruction_error(delta.k()));
    }
    ybar(delta, u, w, mlo, mhi).eta_substitute("x", j, delta.k())
}

/// The weak g-twisted module T_g^k(M) on M = V, for odd k.
pub struct TwistedModule {
    delta: DeltaOp,
}

impl TwistedModule {
    pub fn new(k: u32) -> Result<Self> {
        Self::with_delta(DeltaOp::new(k))
    }

    pub fn with_delta(delta: DeltaOp) -> Result<Self> {
        if delta.k() % 2 == 0 {
            return Err(obstruction_error(delta.k()));
        }
        Ok(TwistedModule { delta })
    }

    pub fn k(&self) -> u32 {
        self.delta.k()
    }

    pub fn delta(&self) -> &DeltaOp {
        &self.delta
    }

    /// (u^1)^g_m w for a vector u of V.
    pub fn generator_mode(&self, u: &FermionVector, m: Q, w: &FermionVector) -> FermionVector {
        ybar_mode(&self.delta, u, m, w)
    }

    /// (u^{slot+1})^g_m w = eta^{-slot k m} (u^1)^g_m w.
    pub fn slot_mode(&self, slot: usize, u: &FermionVector, m: Q, w: &FermionVector) -> FermionVector {
        let k = self.k();
        let km = (qk(k) * m).to_integer();
        let base = self.generator_mode(u, m, w);
        if slot == 0 || base.is_empty() {
            return base;
        }
        base.scaled(&Scalar::t_pow(k, -(slot as i64) * km))
    }

    /// Y_g(u, x) modes for u in the tensor power, spanned by vectors with at
    /// most two non-vacuum slots.
    pub fn mode(&self, u: &FermionVector, m: Q, w: &FermionVector) -> Result<FermionVector> {
        let k = self.k();
        if !(qk(k) * m).is_integer() {
            return Ok(FermionVector::zero(k));
        }
        let mut out = FermionVector::zero(k);
        for (tuple, c) in u.terms() {
            let live: Vec<usize> = (0..tuple.len()).filter(|&i| !tuple[i].is_empty()).collect();
            let part = match live.len() {
                0 => {
                    if m == -Q::one() {
                        w.clone()
                    } else {
                        continue;
                    }
                }
                1 => self.slot_mode(live[0], &FermionVector::single(k, tuple[live[0]].clone()), m, w),
                2 => self.pair_mode(&tuple[live[0]], live[0], &tuple[live[1]], live[1], m, w),
                _ => {
                    return Err(Error::Precondition(format!(
                        "twisted field of a vector with {} non-vacuum slots",
                        live.len()
                    )))
                }
            };
            out.add_assign(&part.scaled(c));
        }
        Ok(out)
    }

    /// Modes of Y_g(a^{ls} (x) b^{rs}) with ls < rs, from the -1 product
    /// in the twisted Borcherds identity, one eigencomponent of a^{ls} at a time.
    fn pair_mode(&self, left: &State, ls: usize, right: &State, rs: usize, qm: Q, w: &FermionVector) -> FermionVector {
        let k = self.k();
        let kk = k as i64;
        let a = FermionVector::single(k, left.clone());
        let b = FermionVector::single(k, right.clone());
        let (aw2, bw2) = (weight2(left), weight2(right));
        let eps = if fermion::parity(left) * fermion::parity(right) == 1 { -1 } else { 1 };
        let top_a = twisted_top(aw2, w, k);
        let top_b = twisted_top(bw2, w, k);
        let mut out = FermionVector::zero(k);
        for r in 0..kk {
            let s = q(r, kk);
            let beta = qm - s;
            // sum_l u_{s-1-l} v_{beta+l} w
            let mut l = 0i64;
            while beta + q(l, 1) <= top_b {
                let inner = self.slot_mode(rs, &b, beta + q(l, 1), w);
                if !inner.is_empty() {
                    out.add_assign(&self.slot_mode(ls, &a, s - q(1 + l, 1), &inner));
                }
                l += 1;
            }
            // + eps sum_l v_{beta-1-l} u_{s+l} w
            let mut l = 0i64;
            while s + q(l, 1) <= top_a {
                let inner = self.slot_mode(ls, &a, s + q(l, 1), w);
                if !inner.is_empty() {
                    let t = self.slot_mode(rs, &b, beta - q(1 + l, 1), &inner);
                    out.add_assign(&t.scaled_rat(&rat(eps, 1)));
                }
                l += 1;
            }
            // - sum_{l>=1} C(s, l) Y_g(u_{l-1} v)_{q-l} w, with u_p v = (1/k) eta^{-(ls-rs) r} (a_p b)^{rs}
            let eta = Scalar::t_pow(k, -((ls as i64) - (rs as i64)) * r).scale_rat(&rat(1, kk));
            let pmax = fermion::mode_bound(aw2, bw2);
            for l in 1..=(pmax + 1).max(0) {
                let c = binomial(s, l as u32);
                if c.is_zero() {
                    continue;
                }
                let ab = fermion::mode(&a, l - 1, &b);
                if ab.is_empty() {
                    continue;
                }
                let t = self.slot_mode(rs, &ab, qm - q(l, 1), w);
                out.add_assign(&t.scaled(&eta.scale_rat(&(-c))));
            }
        }
        out
    }

    /// L^g(n) = sum_j (omega^j)^g_{n+1}.
    pub fn lg(&self, n: i64, w: &FermionVector) -> FermionVector {
        let om = omega(self.k());
        let mut out = FermionVector::zero(self.k());
        for j in 0..self.k() as usize {
            out.add_assign(&self.slot_mode(j, &om, q(n + 1, 1), w));
        }
        out
    }

    /// Eigenvalue of L^g(0) on a basis state of M-weight w2/2.
    pub fn expected_lg0(&self, w2: i64) -> Rat {
        let k = self.k() as i64;
        rat(w2, 2 * k) + rat(k * k - 1, 24 * k) * c_fer()
    }

    /// u_n w recovered from the twisted modes: the U_g^k field
    /// Y_M(u, x) = Y_g((Delta_k(x^k)^{-1} u)^1, x^k).
    pub fn untwisted_mode(&self, u: &FermionVector, n: i64, w: &FermionVector) -> Result<FermionVector> {
        let k = self.k();
        let kq = qk(k);
        let mut out = FermionVector::zero(k);
        for c in self.delta.inverse_components(u) {
            // x^{k e - k(m+1)} = x^{-n-1}
            let ke = kq * c.exponent;
            if !ke.is_integer() {
                return Err(obstruction_error(k));
            }
            let m = c.exponent - Q::one() + q(n + 1, 1) / kq;
            out.add_assign(&self.generator_mode(&c.vector, m, w));
        }
        Ok(out)
    }

    /// (u^1)^g_m w rebuilt from the untwisted modes: T applied after U.
    pub fn retwisted_mode(&self, u: &FermionVector, m: Q, w: &FermionVector) -> Result<FermionVector> {
        let k = self.k();
        let kq = qk(k);
        let mut out = FermionVector::zero(k);
        for c in self.delta.components(u) {
            let n = kq * (c.exponent + m + Q::one()) - Q::one();
            if n.is_integer() {
                out.add_assign(&self.untwisted_mode(&c.vector, n.to_integer(), w)?);
            }
        }
        Ok(out)
    }
}

/// The U_g^k field Y_M(u, x) w for modes n in [lo, hi]; refuses even k.
pub fn untwist(tm: &TwistedModule, u: &FermionVector, w: &FermionVector, lo: i64, hi: i64) -> Result<Series<FermionVector>> {
    let mut out = Series::zero();
    for n in lo..=hi {
        let v = tm.untwisted_mode(u, n, w)?;
        if !v.is_empty() {
            out.push(&[("x", q(-n - 1, 1))], false, v);
        }
    }
    Ok(out)
}

/// For even k, U_g^k would need half-integral powers of x: returns the
/// offending exponent of the inverse Delta on u, if any.
pub fn untwist_exponent_witness(k: u32, u: &FermionVector) -> Option<Q> {
    let kq = qk(k);
    DeltaOp::new(k).inverse_components(u).into_iter().map(|c| c.exponent * kq).find(|e| !e.is_integer())
}

fn mode_list(lo: Q, hi: Q, k: u32) -> Vec<Q> {
    let step = Q::new(1, k as i64);
    let mut out = Vec::new();
    let mut m = (lo * qk(k)).ceil() / qk(k);
    while m <= hi {
        out.push(m);
        m += step;
    }
    out
}

/// Delta(z) Y(u, z0) Delta(z)^{-1} v against Y(Delta(z + z0) u, (z + z0)^{1/k} - z^{1/k}) v,
/// compared for z0-exponents up to `z0_max`.
pub fn conjugation_check(k: u32, u: &FermionVector, v: &FermionVector, z0_max: i64) -> CheckReport {
    let delta = DeltaOp::new(k);
    let kk = k as i64;
    let kq = qk(k);
    let window = Window::new().with("z0", q(-1000, 1), q(z0_max, 1));
    let report_name = format!("Delta conjugation of Y (k={k}, u={}, v={})", u.render(), v.render());

    // left side
    let mut lhs: Series<FermionVector> = Series::zero();
    for ci in delta.inverse_components(v) {
        let top = fermion::mode_bound(max_weight2(u), max_weight2(&ci.vector));
        for n in (-z0_max - 1)..=top {
            let y = fermion::mode(u, n, &ci.vector);
            if y.is_empty() {
                continue;
            }
            for co in delta.components(&y) {
                lhs.push(&[("z", ci.exponent + co.exponent), ("z0", q(-n - 1, 1))], false, co.vector);
            }
        }
    }

    // right side
    let cap = q(z0_max, 1);
    let caps = [("z0", cap)];
    let xlead = Series::term(&[("z", Q::one() / kq - Q::one()), ("z0", Q::one())], false, Scalar::from_rat(k, rat(1, kk)));
    let order = (2 * z0_max + 2 * max_weight2(u) + 8) as u32;
    let x_full = binom_vars(k, "z", 1, "z0", Q::one() / kq, order + 1).sub(&Series::monomial(k, &[("z", Q::one() / kq)]));
    let lead_inv = xlead.monomial_pow(-Q::one()).expect("monomial");
    let x_rel = x_full.mul(&lead_inv).sub(&Series::one(k));
    let mut rhs: Series<FermionVector> = Series::zero();
    for cu in delta.components(u) {
        let zz = binom_vars(k, "z", 1, "z0", cu.exponent, order);
        let top = fermion::mode_bound(max_weight2(&cu.vector), max_weight2(v));
        for n in (-z0_max - 1)..=top {
            let y = fermion::mode(&cu.vector, n, v);
            if y.is_empty() {
                continue;
            }
            let e = q(-n - 1, 1);
            let rel_cap = cap - e;
            if rel_cap < Q::zero() {
                continue;
            }
            let xpow = xlead
                .monomial_pow(e)
                .expect("monomial")
                .mul(&Series::one_plus_pow(&x_rel, e, order, k, &[("z0", rel_cap)]));
            let factor = zz.mul_capped(&xpow, &caps);
            rhs = rhs.add(&Series::term(&[], false, y).mul_by_capped(&factor, &caps));
        }
    }
    let mut r = assert_equal_on_window(&report_name, &lhs, &rhs, &window);
    r.window = format!("z0 <= {z0_max}, all z");
    r
}

/// [Ybar(u)_a, Ybar(v)_b] w against (1/k) sum_i C(a,i) Ybar(u_i v)_{a+b-i} w when
/// k(a + gamma) is an integer (zero otherwise), gamma = |u|(1-k)/(2k) when
/// `with_factor` and 0 otherwise.
pub fn supercommutator_check(
    k: u32,
    u: &FermionVector,
    v: &FermionVector,
    targets: &[FermionVector],
    span: i64,
    with_factor: bool,
) -> CheckReport {
    let delta = DeltaOp::new(k);
    let kk = k as i64;
    let kq = qk(k);
    let (pu, pv) = (parity_of(u), parity_of(v));
    let eps = if pu * pv == 1 { -1 } else { 1 };
    let gamma = if with_factor { q(pu as i64 * (1 - kk), 2 * kk) } else { Q::zero() };
    let label = if with_factor { "Ybar supercommutator" } else { "Ybar supercommutator without the fractional factor" };
    let mut report = CheckReport::new(
        format!("{label} (k={k}, u={}, v={})", u.render(), v.render()),
        format!("a, b within {span} of the top modes, step 1/(2k)"),
    );
    let uv: Vec<(i64, FermionVector)> = (0..=fermion::mode_bound(max_weight2(u), max_weight2(v)))
        .map(|i| (i, fermion::mode(u, i, v)))
        .filter(|(_, x)| !x.is_empty())
        .collect();
    let step = Q::new(1, 2 * kk);
    for w in targets {
        let ta = twisted_top(max_weight2(u), w, k);
        let tb = twisted_top(max_weight2(v), w, k);
        let alist: Vec<Q> = (0..=(2 * kk * span + 2 * kk)).map(|d| ta + Q::one() - step * q(d, 1)).collect();
        let blist: Vec<Q> = (0..=(2 * kk * span + 2 * kk)).map(|d| tb + Q::one() - step * q(d, 1)).collect();
        for &a in &alist {
            for &b in &blist {
                let lhs = ybar_mode(&delta, u, a, &ybar_mode(&delta, v, b, w))
                    .sub(&ybar_mode(&delta, v, b, &ybar_mode(&delta, u, a, w)).scaled_rat(&rat(eps, 1)));
                let mut rhs = FermionVector::zero(k);
                if (kq * (a + gamma)).is_integer() {
                    for (i, x) in &uv {
                        let c = binomial(a, *i as u32) * rat(1, kk);
                        rhs.add_assign(&ybar_mode(&delta, x, a + b - q(*i, 1), w).scaled_rat(&c));
                    }
                }
                report.compared += 1;
                if lhs != rhs {
                    report.fail(format!("a={a} b={b} on {}: {} vs {}", w.render(), lhs.render(), rhs.render()));
                    return report;
                }
            }
        }
    }
    report
}

/// Largest i worth summing before every term of a mode sum vanishes.
fn reach(top: Q, start: Q) -> i64 {
    floor_q(top - start).max(-1)
}

/// The twisted Jacobi identity for Y_g(u^{su+1}) and Y_g(v^{sv+1}) on w,
/// coefficient of x0^{-n-1} x1^{-a-1} x2^{-b-1}:
/// sum_i (-1)^i C(n,i) [U_{a+n-i} V_{b+i} - eps (-1)^n V_{b+n-i} U_{a+i}] w
///   = (1/k) sum_j eta^{-jka} sum_i C(a,i) Y_g((g^j U)_{n+i} V)_{a+b-i} w.
pub fn twisted_jacobi_coefficient(
    tm: &TwistedModule,
    uu: &FermionVector,
    vv: &FermionVector,
    w: &FermionVector,
    a: Q,
    n: i64,
    b: Q,
) -> Result<(FermionVector, FermionVector)> {
    let k = tm.k();
    let kk = k as i64;
    let (pu, pv) = (uu.parity().unwrap_or(0), vv.parity().unwrap_or(0));
    let eps = if pu * pv == 1 { -1 } else { 1 };
    let (uw2, vw2) = (uu.weight2().unwrap_or(0), vv.weight2().unwrap_or(0));
    let (top_u, top_v) = (twisted_top(uw2, w, k), twisted_top(vw2, w, k));
    let mut lhs = FermionVector::zero(k);
    let imax = reach(top_v, b).max(reach(top_u, a));
    for i in 0..=imax {
        let c = binomial(q(n, 1), i as u32) * rat(if i % 2 == 0 { 1 } else { -1 }, 1);
        if c.is_zero() {
            continue;
        }
        let qi = q(i, 1);
        let first = tm.mode(uu, a + q(n, 1) - qi, &tm.mode(vv, b + qi, w)?)?;
        let second = tm.mode(vv, b + q(n, 1) - qi, &tm.mode(uu, a + qi, w)?)?;
        let sign = if (n.rem_euclid(2) == 0) == (eps == 1) { 1 } else { -1 };
        lhs.add_assign(&first.sub(&second.scaled_rat(&rat(sign, 1))).scaled_rat(&c));
    }
    let mut rhs = FermionVector::zero(k);
    let ka = (qk(k) * a).to_integer();
    let imax = fermion::mode_bound(uw2, vw2) - n;
    for j in 0..kk {
        let gu = fermion::g_action(uu, j);
        let eta = Scalar::t_pow(k, -j * ka);
        for i in 0..=imax.max(-1) {
            let c = binomial(a, i as u32);
            if c.is_zero() {
                continue;
            }
            let prod = fermion::tensor_mode(&gu, n + i, vv);
            if prod.is_empty() {
                continue;
            }
            let t = tm.mode(&prod, a + b - q(i, 1), w)?;
            rhs.add_assign(&t.scaled(&eta.scale_rat(&(c * rat(1, kk)))));
        }
    }
    Ok((lhs, rhs))
}

/// The eigenvector form: for U in the eta^r eigenspace and a in r/k + Z,
/// the right side is sum_i C(a,i) Y_g(U_{n+i} V)_{a+b-i} w.
pub fn twisted_jacobi_eigen_coefficient(
    tm: &TwistedModule,
    uu: &FermionVector,
    vv: &FermionVector,
    w: &FermionVector,
    a: Q,
    n: i64,
    b: Q,
) -> Result<(FermionVector, FermionVector)> {
    let k = tm.k();
    let (pu, pv) = (uu.parity().unwrap_or(0), vv.parity().unwrap_or(0));
    let eps = if pu * pv == 1 { -1 } else { 1 };
    let (uw2, vw2) = (uu.weight2().unwrap_or(0), vv.weight2().unwrap_or(0));
    let (top_u, top_v) = (twisted_top(uw2, w, k), twisted_top(vw2, w, k));
    let mut lhs = FermionVector::zero(k);
    for i in 0..=reach(top_v, b).max(reach(top_u, a)) {
        let c = binomial(q(n, 1), i as u32) * rat(if i % 2 == 0 { 1 } else { -1 }, 1);
        if c.is_zero() {
            continue;
        }
        let qi = q(i, 1);
        let first = tm.mode(uu, a + q(n, 1) - qi, &tm.mode(vv, b + qi, w)?)?;
        let second = tm.mode(vv, b + q(n, 1) - qi, &tm.mode(uu, a + qi, w)?)?;
        let sign = if (n.rem_euclid(2) == 0) == (eps == 1) { 1 } else { -1 };
        lhs.add_assign(&first.sub(&second.scaled_rat(&rat(sign, 1))).scaled_rat(&c));
    }
    let mut rhs = FermionVector::zero(k);
    for i in 0..=(fermion::mode_bound(uw2, vw2) - n).max(-1) {
        let c = binomial(a, i as u32);
        if c.is_zero() {
            continue;
        }
        let prod = fermion::tensor_mode(uu, n + i, vv);
        if !prod.is_empty() {
            rhs.add_assign(&tm.mode(&prod, a + b - q(i, 1), w)?.scaled_rat(&c));
        }
    }
    Ok((lhs, rhs))
}

/// Both forms of the twisted Jacobi identity for u in slot `su` and v in
/// slot `sv` (0-based), over a, b within `span` of the top modes and |n| <= `nspan`.
pub fn twisted_jacobi_check(
    tm: &TwistedModule,
    u: &FermionVector,
    su: usize,
    v: &FermionVector,
    sv: usize,
    targets: &[FermionVector],
    span: i64,
    nspan: i64,
) -> Result<CheckReport> {
    let k = tm.k();
    let kk = k as usize;
    let uu = FermionVector::in_slot(k, kk, su, u);
    let vv = FermionVector::in_slot(k, kk, sv, v);
    let mut report = CheckReport::new(
        format!("twisted Jacobi identity (k={k}, u={} in slot {}, v={} in slot {})", u.render(), su + 1, v.render(), sv + 1),
        format!("a, b within {span} of the top modes, |n| <= {nspan}"),
    );
    let step = Q::new(1, kk as i64);
    for w in targets {
        let ta = twisted_top(max_weight2(u), w, k);
        let tb = twisted_top(max_weight2(v), w, k);
        let count = (span + 1) * kk as i64;
        let alist: Vec<Q> = (0..count).map(|d| (ta * qk(k)).floor() / qk(k) + step - step * q(d, 1)).collect();
        let blist: Vec<Q> = (0..count).map(|d| (tb * qk(k)).floor() / qk(k) + step - step * q(d, 1)).collect();
        for &a in &alist {
            for &b in &blist {
                for n in -nspan..=nspan {
                    let (l, r) = twisted_jacobi_coefficient(tm, &uu, &vv, w, a, n, b)?;
                    report.compared += 1;
                    if l != r {
                        report.fail(format!("a={a} n={n} b={b} on {}: {} vs {}", w.render(), l.render(), r.render()));
                        return Ok(report);
                    }
                    // eigenvector form for the component of U in the class of a
                    let cls = (qk(k) * a).to_integer().rem_euclid(kk as i64);
                    let ur = fermion::eigenprojection(&uu, cls);
                    let (l, r) = twisted_jacobi_eigen_coefficient(tm, &ur, &vv, w, a, n, b)?;
                    report.compared += 1;
                    if l != r {
                        report.fail(format!("eigenvector form r={cls} a={a} n={n} b={b} on {}", w.render()));
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Ybar(L(-1)u, x) = d/dx Ybar(u, x), compared coefficient-wise on w.
pub fn lminus1_check(k: u32, u: &FermionVector, targets: &[FermionVector], span: i64) -> CheckReport {
    let delta = DeltaOp::new(k);
    let du = fermion::virasoro(-1, u);
    let mut parts = Vec::new();
    for w in targets {
        let top = twisted_top(max_weight2(u) + 2, w, k);
        let (lo, hi) = (top - q(span, 1), top + Q::one());
        let lhs = ybar(&delta, &du, w, lo, hi);
        let rhs = ybar(&delta, u, w, lo - Q::one(), hi).derivative("x");
        let win = Window::new().with("x", -hi - Q::one(), -lo - Q::one());
        parts.push(assert_equal_on_window("Ybar L(-1) derivative", &lhs, &rhs, &win));
    }
    CheckReport::combine(format!("Ybar L(-1) derivative (k={k}, u={})", u.render()), format!("{span} modes below the top"), &parts)
}

/// Ybar(omega, x) = x^{2(1/k-1)}/k^2 Y(omega, x^{1/k}) + (k^2-1)c/(24k^2) x^{-2}.
pub fn omega_closed_form_check(k: u32, targets: &[FermionVector], span: i64) -> CheckReport {
    let delta = DeltaOp::new(k);
    let kk = k as i64;
    let kq = qk(k);
    let om = omega(k);
    let mut parts = Vec::new();
    for w in targets {
        let top = twisted_top(4, w, k);
        let (lo, hi) = (top - q(span, 1), top + Q::one());
        let lhs = ybar(&delta, &om, w, lo, hi);
        let ntop = fermion::mode_bound(4, max_weight2(w));
        let field = fermion::vertex_op(&om, w, ntop - kk * (span + 2), ntop).power_substitute("x", Q::one() / kq);
        let pre = Series::term(&[("x", q(2, 1) / kq - q(2, 1))], false, Scalar::from_rat(k, rat(1, kk * kk)));
        let central = rat(kk * kk - 1, 24 * kk * kk) * c_fer();
        let mut rhs = field.mul_by(&pre);
        rhs.push(&[("x", q(-2, 1))], false, w.scaled_rat(&central));
        let win = Window::new().with("x", -hi - Q::one(), -lo - Q::one());
        parts.push(assert_equal_on_window("Ybar(omega) closed form", &lhs, &rhs, &win));
    }
    CheckReport::combine(format!("Ybar(omega) closed form with central term (k={k})"), format!("{span} modes below the top"), &parts)
}

/// Tabulated (u^1)^g_m against the coefficients of the series Ybar(u, x),
/// for |m| <= mmax.
pub fn mode_formula_check(k: u32, gens: &[FermionVector], targets: &[FermionVector], mmax: i64) -> CheckReport {
    let delta = DeltaOp::new(k);
    let mut report = CheckReport::new(format!("twisted mode formula against Ybar coefficients (k={k})"), format!("|m| <= {mmax}"));
    let (lo, hi) = (q(-mmax, 1), q(mmax, 1));
    for u in gens {
        for w in targets {
            let series = ybar(&delta, u, w, lo, hi);
            for m in mode_list(lo, hi, k) {
                let from_series = series.coeff_at(&[("x", -m - Q::one())], false).unwrap_or_else(|| FermionVector::zero(k));
                let tab = match twisted_mode(&delta, u, m, w) {
                    Ok(x) => x,
                    Err(e) => {
                        report.fail(e.to_string());
                        return report;
                    }
                };
                report.compared += 1;
                if from_series != tab {
                    report.fail(format!("u={} m={m} on {}", u.render(), w.render()));
                    return report;
                }
            }
            // nothing off the (1/k) lattice for odd k
            if k % 2 == 1 && series.check_lattice("x", k as i64, k).is_err() {
                report.fail(format!("off-lattice exponent in Ybar({})", u.render()));
                return report;
            }
        }
    }
    report
}

/// Grading shifts, parity and L^g(0) on the basis through `cutoff_w2`.
pub fn grading_check(tm: &TwistedModule, cutoff_w2: i64, mspan: i64) -> CheckReport {
    let k = tm.k();
    let basis: Vec<FermionVector> = fermion::basis(cutoff_w2).into_iter().map(|s| FermionVector::single(k, s)).collect();
    let mut report = CheckReport::new(
        format!("twisted grading and L^g(0) = L(0)/k + (k^2-1)c/(24k) (k={k})"),
        format!("basis states of weight <= {}/2", cutoff_w2),
    );
    for w in &basis {
        let w2 = max_weight2(w);
        let lg0 = tm.lg(0, w);
        report.compared += 1;
        if lg0 != w.scaled_rat(&tm.expected_lg0(w2)) {
            report.fail(format!("L^g(0) on {}: {}", w.render(), lg0.render()));
            return report;
        }
        for u in [psi(k), omega(k)] {
            let p2 = max_weight2(&u);
            let top = twisted_top(p2, w, k);
            for m in mode_list(top - q(mspan, 1), top + Q::one(), k) {
                let out = tm.generator_mode(&u, m, w);
                if out.is_empty() {
                    continue;
                }
                report.compared += 1;
                let want_w2 = w2 + (qk(k) * (q(p2, 1) - q(2, 1) * m - q(2, 1))).to_integer();
                let want_par = (fermion::parity(&w.terms().next().expect("basis").0[0]) + parity_of(&u)) % 2;
                if out.weight2() != Some(want_w2) || out.parity() != Some(want_par) {
                    report.fail(format!("u={} m={m} on {}: weight {:?}, parity {:?}", u.render(), w.render(), out.weight2(), out.parity()));
                    return report;
                }
            }
        }
    }
    report
}

/// Desk-scale irreducibility proxy: no coordinate subspace spanned by basis
/// states through the cutoff is invariant under the generator modes.
pub fn irreducibility_proxy(tm: &TwistedModule, cutoff_w2: i64) -> CheckReport {
    let k = tm.k();
    let states = fermion::basis(cutoff_w2);
    let index: BTreeMap<State, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let mut edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); states.len()];
    let p = psi(k);
    for (i, s) in states.iter().enumerate() {
        let w = FermionVector::single(k, s.clone());
        let top = twisted_top(1, &w, k);
        for m in mode_list(q(-cutoff_w2, 1), top, k) {
            for (t, _) in tm.generator_mode(&p, m, &w).terms() {
                if let Some(&j) = index.get(&t[0]) {
                    edges[i].insert(j);
                }
            }
        }
    }
    let mut report = CheckReport::new(
        format!("irreducibility proxy: orbit closure under generator modes (k={k})"),
        format!("coordinate subspaces through weight {}/2", cutoff_w2),
    );
    for start in 0..states.len() {
        let mut seen = vec![false; states.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for &j in &edges[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        report.compared += 1;
        if seen.iter().any(|x| !x) {
            report.fail(format!("closure of {} is proper", fermion::render_state(&states[start])));
            break;
        }
    }
    report.with_detail(json!({"note": "proxy for irreducibility, not a proof"}))
}

/// U after T and T after U reproduce the original modes on the basis.
pub fn roundtrip_check(tm: &TwistedModule, cutoff_w2: i64, span: i64) -> Result<CheckReport> {
    let k = tm.k();
    let basis: Vec<FermionVector> = fermion::basis(cutoff_w2).into_iter().map(|s| FermionVector::single(k, s)).collect();
    let gens: Vec<FermionVector> = vec![psi(k), omega(k), FermionVector::single(k, vec![-2])];
    let mut report = CheckReport::new(format!("untwist/twist roundtrip (k={k})"), format!("basis through weight {}/2, {span} modes below the top", cutoff_w2));
    for u in &gens {
        for w in &basis {
            let top = fermion::mode_bound(max_weight2(u), max_weight2(w));
            for n in (top - span)..=(top + 1) {
                report.compared += 1;
                if tm.untwisted_mode(u, n, w)? != fermion::mode(u, n, w) {
                    report.fail(format!("U(T): u={} n={n} on {}", u.render(), w.render()));
                    return Ok(report);
                }
            }
            let ttop = twisted_top(max_weight2(u), w, k);
            for m in mode_list(ttop - q(span, 1), ttop + Q::one(), k) {
                report.compared += 1;
                if tm.retwisted_mode(u, m, w)? != tm.generator_mode(u, m, w) {
                    report.fail(format!("T(U): u={} m={m} on {}", u.render(), w.render()));
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// The slot fields: j = k returns j = 0, and each slot is the eta^{-1}
/// branch of the next one.
pub fn slot_consistency_check(k: u32, u: &FermionVector, w: &FermionVector, span: i64) -> Result<CheckReport> {
    let delta = DeltaOp::new(k);
    let top = twisted_top(max_weight2(u), w, k);
    let (lo, hi) = (top - q(span, 1), top + Q::one());
    let base = other_slots(&delta, u, 0, w, lo, hi)?;
    let mut report = CheckReport::new(format!("slot fields by branch substitution (k={k}, u={})", u.render()), format!("modes in [{lo}, {hi}]"));
    report.compared += 1;
    if other_slots(&delta, u, k as i64, w, lo, hi)? != base {
        report.fail("j = k differs from j = 0");
    }
    for j in 1..k as i64 {
        let next = other_slots(&delta, u, j, w, lo, hi)?;
        let back = next.eta_substitute("x", -1, k)?;
        report.compared += 1;
        if back != other_slots(&delta, u, j - 1, w, lo, hi)? {
            report.fail(format!("eta^-1 branch of slot {} is not slot {}", j + 1, j));
        }
        // modes agree with the module's slot operators
        let tm = TwistedModule::with_delta(DeltaOp::new(k))?;
        for m in mode_list(lo, hi, k) {
            let c = next.coeff_at(&[("x", -m - Q::one())], false).unwrap_or_else(|| FermionVector::zero(k));
            report.compared += 1;
            if c != tm.slot_mode(j as usize, u, m, w) {
                report.fail(format!("slot {} mode {m}", j + 1));
            }
        }
    }
    Ok(report)
}

/// Exponent coset of Ybar(u, x) modulo (1/k)Z, as (representative, certificate).
pub fn obstruction_report(k: u32, u: &FermionVector, targets: &[FermionVector]) -> CheckReport {
    let delta = DeltaOp::new(k);
    let kq = qk(k);
    let mut cosets: BTreeSet<Q> = BTreeSet::new();
    let mut sample: Vec<String> = Vec::new();
    for w in targets {
        let top = twisted_top(max_weight2(u), w, k);
        let s = ybar(&delta, u, w, top - q(3, 1), top + Q::one());
        for e in s.exponents("x") {
            let r = e - (e * kq).floor() / kq;
            cosets.insert(r);
            if sample.len() < 6 {
                sample.push(e.to_string());
            }
        }
    }
    let odd = parity_of(u) == 1;
    let expected = if odd && k % 2 == 0 { q(1, 2 * k as i64) } else { Q::zero() };
    let coset_str = |r: Q| if r.is_zero() { format!("(1/{k})Z") } else { format!("{r} + (1/{k})Z") };
    let mut report = CheckReport::new(format!("even-k obstruction certificate (k={k}, u={})", u.render()), "top 3 modes on the targets");
    report.compared = cosets.len();
    if cosets.len() != 1 || cosets.first() != Some(&expected) {
        report.fail(format!("cosets {:?}, expected {}", cosets.iter().map(|c| c.to_string()).collect::<Vec<_>>(), coset_str(expected)));
    } else if !expected.is_zero() {
        report.status = Status::ExpectedObstruction;
    }
    let refused = TwistedModule::new(k).is_err();
    let untwist_witness = untwist_exponent_witness(k, u).map(|e| e.to_string());
    report.with_detail(json!({
        "k": k,
        "u": u.render(),
        "coset": cosets.first().map(|&c| coset_str(c)),
        "sample_exponents": sample,
        "construction_refused": refused,
        "untwist_half_integral_exponent": untwist_witness,
    }))
}

/// Mode table of (u^1)^g_m on the cutoff basis, as JSON rows.
pub fn mode_table(tm: &TwistedModule, u: &FermionVector, m: Q, cutoff_w2: i64) -> serde_json::Value {
    let k = tm.k();
    let mut rows = Vec::new();
    for s in fermion::basis(cutoff_w2) {
        let w = FermionVector::single(k, s.clone());
        let out = tm.generator_mode(u, m, &w);
        for (t, c) in out.terms() {
            rows.push(json!({"from": fermion::render_state(&s), "to": fermion::render_state(&t[0]), "coeff": c.to_string()}));
        }
    }
    json!({"u": u.render(), "m": m.to_string(), "k": k, "entries": rows})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(k: u32, s: &[i64]) -> FermionVector {
        FermionVector::single(k, s.to_vec())
    }

    fn low_states(k: u32, w2: i64) -> Vec<FermionVector> {
        fermion::basis(w2).into_iter().map(|s| FermionVector::single(k, s)).collect()
    }

    #[test]
    fn delta_on_psi() {
        let d3 = delta_apply(3, &psi(3), false);
        let want = Series::term(&[("x", q(-1, 3))], false, psi(3).scaled(&Scalar::s_pow(3, -1)));
        assert_eq!(d3, want);
        let d2 = delta_apply(2, &psi(2), false);
        let want = Series::term(&[("x", q(-1, 4))], false, psi(2).scaled(&Scalar::s_pow(2, -1)));
        assert_eq!(d2, want);
        // k = 1 is the identity
        for s in fermion::basis(6) {
            let v = st(1, &s);
            assert_eq!(delta_apply(1, &v, false), Series::term(&[], false, v.clone()));
        }
    }

    #[test]
    fn delta_inverse_roundtrip() {
        for k in [2u32, 3, 5] {
            let d = DeltaOp::new(k);
            for s in fermion::basis(8) {
                let v = st(k, &s);
                let back = d.apply_series(&d.apply(&v, true), false);
                assert_eq!(back, Series::term(&[], false, v.clone()), "k={k} {}", v.render());
                let back = d.apply_series(&d.apply(&v, false), true);
                assert_eq!(back, Series::term(&[], false, v));
            }
        }
    }

    #[test]
    fn delta_components_parity_and_weight() {
        let d = DeltaOp::new(3);
        for s in fermion::basis(8) {
            let v = st(3, &s);
            for c in d.components(&v) {
                assert_eq!(c.vector.weight2(), Some(weight2(&s) - 2 * c.drop));
                assert_eq!(c.vector.parity(), Some(fermion::parity(&s)));
            }
        }
    }

    #[test]
    fn twisted_mode_examples() {
        let d = DeltaOp::new(3);
        let m = twisted_mode(&d, &psi(3), q(-1, 3), &psi(3)).unwrap();
        assert_eq!(m, FermionVector::vacuum(3, 1).scaled(&Scalar::s_pow(3, -1)));
        // off the support
        assert!(twisted_mode(&d, &psi(3), q(1, 2), &psi(3)).unwrap().is_empty());
        assert!(matches!(twisted_mode(&DeltaOp::new(2), &psi(2), q(0, 1), &psi(2)), Err(Error::Obstruction { .. })));
        // k = 1 gives the untwisted modes
        let d1 = DeltaOp::new(1);
        for s in fermion::basis(4) {
            for n in -3..3 {
                let w = st(1, &s);
                assert_eq!(twisted_mode(&d1, &omega(1), q(n, 1), &w).unwrap(), fermion::mode(&omega(1), n, &w));
            }
        }
    }

    #[test]
    fn omega_closed_form() {
        for k in [1u32, 2, 3, 5] {
            let r = omega_closed_form_check(k, &low_states(k, 4), 3);
            assert!(r.passed(), "{r:?}");
        }
        // vacuum coefficient at x^-2 for k = 3 is 1/54
        let d = DeltaOp::new(3);
        let vac = FermionVector::vacuum(3, 1);
        let s = ybar(&d, &omega(3), &vac, q(-3, 1), q(2, 1));
        assert_eq!(s.coeff_at(&[("x", q(-2, 1))], false).unwrap(), vac.scaled_rat(&rat(1, 54)));
    }

    #[test]
    fn supercommutator_k3_and_k2_witness() {
        let targets = low_states(3, 3);
        assert!(supercommutator_check(3, &psi(3), &psi(3), &targets, 1, true).passed());
        assert!(supercommutator_check(3, &psi(3), &psi(3), &targets, 1, false).passed());
        let t2 = low_states(2, 3);
        assert!(supercommutator_check(2, &psi(2), &psi(2), &t2, 1, true).passed());
        assert!(!supercommutator_check(2, &psi(2), &psi(2), &t2, 1, false).passed());
        assert!(supercommutator_check(1, &omega(1), &psi(1), &low_states(1, 3), 1, true).passed());
    }

    #[test]
    fn derivative_property() {
        for k in [1u32, 3] {
            for u in [psi(k), omega(k), FermionVector::vacuum(k, 1)] {
                let r = lminus1_check(k, &u, &low_states(k, 3), 3);
                assert!(r.passed(), "{r:?}");
            }
        }
    }

    #[test]
    fn conjugation_small() {
        for k in [1u32, 3] {
            for u in [psi(k), omega(k)] {
                for v in [psi(k), omega(k)] {
                    let r = conjugation_check(k, &u, &v, 2);
                    assert!(r.passed(), "{r:?}");
                }
            }
        }
    }

    #[test]
    fn mode_formula_matches_series() {
        let r = mode_formula_check(3, &[psi(3), omega(3)], &low_states(3, 3), 2);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn grading_k3() {
        let tm = TwistedModule::new(3).unwrap();
        let r = grading_check(&tm, 6, 3);
        assert!(r.passed(), "{r:?}");
        assert!(irreducibility_proxy(&tm, 6).passed());
    }

    #[test]
    fn jacobi_k3_generators() {
        let tm = TwistedModule::new(3).unwrap();
        let targets = low_states(3, 1);
        for (su, sv) in [(0usize, 0usize), (0, 1)] {
            let r = twisted_jacobi_check(&tm, &psi(3), su, &psi(3), sv, &targets, 0, 1).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn slots_consistent() {
        let r = slot_consistency_check(3, &psi(3), &psi(3), 2).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn roundtrip_small() {
        for k in [1u32, 3] {
            let tm = TwistedModule::new(k).unwrap();
            let r = roundtrip_check(&tm, 4, 2).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn even_refusal() {
        assert!(TwistedModule::new(2).is_err());
        let r = obstruction_report(2, &psi(2), &low_states(2, 3));
        assert_eq!(r.status, Status::ExpectedObstruction, "{r:?}");
        assert_eq!(r.detail["coset"], "1/4 + (1/2)Z");
        let r = obstruction_report(4, &psi(4), &low_states(4, 3));
        assert_eq!(r.detail["coset"], "1/8 + (1/4)Z");
        let r = obstruction_report(2, &omega(2), &low_states(2, 3));
        assert_eq!(r.status, Status::Pass);
        assert!(untwist_exponent_witness(2, &psi(2)).is_some());
        assert!(untwist_exponent_witness(3, &psi(3)).is_none());
    }
}
