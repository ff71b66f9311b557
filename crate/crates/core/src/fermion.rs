//! The Neveu-Schwarz free fermion vertex operator superalgebra (c = 1/2) and
//! its tensor powers.
//!
//! Modes use integer indexing, Y(v, x) = sum_n v_n x^{-n-1}, so the generator
//! modes satisfy {psi_a, psi_b} = delta_{a+b,-1}. A basis state is a strictly
//! increasing list of negative integers: `[-2, -1]` is psi_{-2} psi_{-1} |0>,
//! which carries the physics labels psi(-3/2) psi(-1/2). Weights are stored
//! doubled so they stay integral.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::exactnum::{binomial, q, rat, Rat, Scalar};
use crate::fseries::{Coeff, Series};
use crate::report::CheckReport;

pub type State = Vec<i64>;
type RVec = BTreeMap<State, Rat>;

pub const CENTRAL_CHARGE: (i64, i64) = (1, 2);

/// Twice the conformal weight.
pub fn weight2(s: &[i64]) -> i64 {
    s.iter().map(|n| -2 * n - 1).sum()
}

pub fn parity(s: &[i64]) -> u8 {
    (s.len() % 2) as u8
}

pub fn render_state(s: &[i64]) -> String {
    let mut out: String = s.iter().map(|n| format!("psi({}/2)", 2 * n + 1)).collect();
    out.push_str("|0>");
    out
}

/// All basis states with doubled weight at most `max_w2`, by weight then modes.
pub fn basis(max_w2: i64) -> Vec<State> {
    fn go(next: i64, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<State>) {
        out.push(cur.iter().rev().copied().collect());
        let mut n = next;
        loop {
            let w = -2 * n - 1;
            if w > budget {
                break;
            }
            cur.push(n);
            go(n - 1, budget - w, cur, out);
            cur.pop();
            n -= 1;
        }
    }
    let mut out = Vec::new();
    go(-1, max_w2, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| weight2(a).cmp(&weight2(b)).then_with(|| a.cmp(b)));
    out
}

/// Dimensions of V_{w/2} for doubled weights w = 0..=max_w2.
pub fn graded_dims(max_w2: i64) -> Vec<usize> {
    let mut dims = vec![0; max_w2 as usize + 1];
    for s in basis(max_w2) {
        dims[weight2(&s) as usize] += 1;
    }
    dims
}

/// psi_a on a basis state: the resulting state and sign, or None.
fn clifford_basis(a: i64, w: &[i64]) -> Option<(State, bool)> {
    if a < 0 {
        match w.binary_search(&a) {
            Ok(_) => None,
            Err(pos) => {
                let mut out = w.to_vec();
                out.insert(pos, a);
                Some((out, pos % 2 == 1))
            }
        }
    } else {
        let target = -1 - a;
        let pos = w.iter().position(|&b| b == target)?;
        let mut out = w.to_vec();
        out.remove(pos);
        Some((out, pos % 2 == 1))
    }
}

fn radd(target: &mut RVec, src: &RVec, c: &Rat) {
    if c.is_zero() {
        return;
    }
    for (s, x) in src {
        let e = target.entry(s.clone()).or_insert_with(Rat::zero);
        *e += x * c;
        if e.is_zero() {
            target.remove(s);
        }
    }
}

fn rclifford(a: i64, v: &RVec) -> RVec {
    let mut out = RVec::new();
    for (s, c) in v {
        if let Some((t, neg)) = clifford_basis(a, s) {
            let e = out.entry(t.clone()).or_insert_with(Rat::zero);
            if neg {
                *e -= c;
            } else {
                *e += c;
            }
            if e.is_zero() {
                out.remove(&t);
            }
        }
    }
    out
}

type ModeKey = (State, i64, State);

fn mode_cache() -> &'static Mutex<HashMap<ModeKey, Arc<RVec>>> {
    static CACHE: OnceLock<Mutex<HashMap<ModeKey, Arc<RVec>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn rmode(v: &[i64], n: i64, w: &RVec) -> RVec {
    let mut out = RVec::new();
    for (s, c) in w {
        radd(&mut out, &mode_basis(v, n, s), c);
    }
    out
}

/// v_n w for basis states v and w.
fn mode_basis(v: &[i64], n: i64, w: &[i64]) -> Arc<RVec> {
    let key = (v.to_vec(), n, w.to_vec());
    if let Some(hit) = mode_cache().lock().expect("mode cache").get(&key) {
        return hit.clone();
    }
    let unit: RVec = [(w.to_vec(), Rat::one())].into_iter().collect();
    let out = if weight2(v) + weight2(w) - 2 * n - 2 < 0 {
        RVec::new()
    } else if v.is_empty() {
        if n == -1 {
            unit
        } else {
            RVec::new()
        }
    } else if v == [-1] {
        rclifford(n, &unit)
    } else {
        // (psi_m b)_n = sum_i (-1)^i C(m,i) (psi_{m-i} b_{n+i} + (-1)^{m+1+|b|} b_{m+n-i} psi_i)
        let m = v[0];
        let b = &v[1..];
        let (wb, ww) = (weight2(b), weight2(w));
        let mut acc = RVec::new();
        let first_max = (wb + ww) / 2 - n - 1;
        for i in 0..=first_max.max(-1) {
            let c = binomial(q(m, 1), i as u32) * rat(if i % 2 == 0 { 1 } else { -1 }, 1);
            if c.is_zero() {
                continue;
            }
            let inner = rmode(b, n + i, &unit);
            if inner.is_empty() {
                continue;
            }
            radd(&mut acc, &rclifford(m - i, &inner), &c);
        }
        let sign = if (m + 1 + parity(b) as i64) % 2 == 0 { 1 } else { -1 };
        let second_max = (ww - 1).div_euclid(2);
        for i in 0..=second_max.max(-1) {
            let c = binomial(q(m, 1), i as u32) * rat(if i % 2 == 0 { sign } else { -sign }, 1);
            if c.is_zero() {
                continue;
            }
            let inner = rclifford(i, &unit);
            if inner.is_empty() {
                continue;
            }
            radd(&mut acc, &rmode(b, m + n - i, &inner), &c);
        }
        acc
    };
    let out = Arc::new(out);
    mode_cache().lock().expect("mode cache").insert(key, out.clone());
    out
}

/// Finite linear combination of tensor basis states with coefficients in the
/// cyclotomic ring of order `k`. A vector of V itself has one slot.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FermionVector {
    k: u32,
    terms: BTreeMap<Vec<State>, Scalar>,
}

impl FermionVector {
    pub fn zero(k: u32) -> Self {
        FermionVector { k, terms: BTreeMap::new() }
    }

    pub fn basis_vector(k: u32, slots: Vec<State>) -> Self {
        let mut v = Self::zero(k);
        v.terms.insert(slots, Scalar::one(k));
        v
    }

    pub fn single(k: u32, s: State) -> Self {
        Self::basis_vector(k, vec![s])
    }

    pub fn vacuum(k: u32, slots: usize) -> Self {
        Self::basis_vector(k, vec![Vec::new(); slots])
    }

    /// `s` placed in slot `j` (0-based) of a `slots`-fold tensor, vacuum elsewhere.
    pub fn in_slot(k: u32, slots: usize, j: usize, v: &FermionVector) -> Self {
        let mut out = Self::zero(k);
        for (t, c) in &v.terms {
            assert_eq!(t.len(), 1, "embedding needs a single-slot vector");
            let mut tup = vec![Vec::new(); slots];
            tup[j] = t[0].clone();
            out.add_term(tup, c.clone());
        }
        out
    }

    pub fn ring(&self) -> u32 {
        self.k
    }

    pub fn slots(&self) -> Option<usize> {
        self.terms.keys().next().map(Vec::len)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<State>, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, t: Vec<State>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_in_place(&c).expect("one ring");
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&Coeff::neg(other))
    }

    pub fn scaled(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(self.k);
        for (t, c) in &self.terms {
            out.add_term(t.clone(), c.mul(s).expect("one ring"));
        }
        out
    }

    pub fn scaled_rat(&self, r: &Rat) -> Self {
        self.scaled(&Scalar::from_rat(self.k, r.clone()))
    }

    /// Doubled weight, if homogeneous.
    pub fn weight2(&self) -> Option<i64> {
        let mut ws = self.terms.keys().map(|t| t.iter().map(|s| weight2(s)).sum::<i64>());
        let first = ws.next()?;
        ws.all(|w| w == first).then_some(first)
    }

    /// Parity, if homogeneous.
    pub fn parity(&self) -> Option<u8> {
        let mut ps = self.terms.keys().map(|t| t.iter().map(|s| parity(s)).sum::<u8>() % 2);
        let first = ps.next()?;
        ps.all(|p| p == first).then_some(first)
    }

    /// Splits into parts of fixed (doubled weight, parity).
    pub fn homogeneous_parts(&self) -> BTreeMap<(i64, u8), FermionVector> {
        let mut out: BTreeMap<(i64, u8), FermionVector> = BTreeMap::new();
        for (t, c) in &self.terms {
            let w: i64 = t.iter().map(|s| weight2(s)).sum();
            let p = t.iter().map(|s| parity(s)).sum::<u8>() % 2;
            out.entry((w, p)).or_insert_with(|| Self::zero(self.k)).add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn coeff(&self, t: &[State]) -> Scalar {
        self.terms.get(t).cloned().unwrap_or_else(|| Scalar::zero(self.k))
    }

    /// The coefficients in another ring; only rational coefficients can move.
    pub fn with_ring(&self, k: u32) -> Self {
        let mut out = Self::zero(k);
        for (t, c) in &self.terms {
            let r = c.as_rat().expect("rational coefficients");
            out.add_term(t.clone(), Scalar::from_rat(k, r.clone()));
        }
        out
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(t, c)| {
                let body: Vec<String> = t.iter().map(|s| render_state(s)).collect();
                format!("({c}) {}", body.join(" (x) "))
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn from_rvec_in_slot(k: u32, tuple: &[State], slot: usize, r: &RVec, c: &Scalar, negate: bool) -> Self {
        let mut out = Self::zero(k);
        for (s, x) in r {
            let mut t = tuple.to_vec();
            t[slot] = s.clone();
            let mut coef = c.scale_rat(x);
            if negate {
                coef = coef.neg();
            }
            out.add_term(t, coef);
        }
        out
    }
}

impl Coeff for FermionVector {
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_assign(&mut self, other: &Self) {
        for (t, c) in &other.terms {
            self.add_term(t.clone(), c.clone());
        }
    }
    fn scale(&self, s: &Scalar) -> Self {
        self.scaled(s)
    }
    fn neg(&self) -> Self {
        FermionVector { k: self.k, terms: self.terms.iter().map(|(t, c)| (t.clone(), c.neg())).collect() }
    }
    fn render(&self) -> String {
        FermionVector::render(self)
    }
    fn ring(&self) -> u32 {
        self.k
    }
}

pub fn psi(k: u32) -> FermionVector {
    FermionVector::single(k, vec![-1])
}

/// omega = 1/2 psi_{-2} psi_{-1} |0>.
pub fn omega(k: u32) -> FermionVector {
    FermionVector::single(k, vec![-2, -1]).scaled_rat(&rat(1, 2))
}

fn slot_sign(tuple: &[State], slot: usize, op_parity: u8) -> bool {
    if op_parity == 0 {
        return false;
    }
    tuple[..slot].iter().map(|s| parity(s) as usize).sum::<usize>() % 2 == 1
}

/// The generator mode psi_a applied in `slot`.
pub fn clifford_apply(a: i64, slot: usize, w: &FermionVector) -> FermionVector {
    let mut out = FermionVector::zero(w.k);
    for (t, c) in &w.terms {
        if let Some((s, neg)) = clifford_basis(a, &t[slot]) {
            let mut tt = t.clone();
            tt[slot] = s;
            let negate = neg ^ slot_sign(t, slot, 1);
            out.add_term(tt, if negate { c.neg() } else { c.clone() });
        }
    }
    out
}

/// v_n acting on `slot` of `w`, for a single-slot vector v.
pub fn mode_on_slot(v: &FermionVector, n: i64, slot: usize, w: &FermionVector) -> FermionVector {
    let mut out = FermionVector::zero(w.k);
    for (vt, vc) in &v.terms {
        let vs = &vt[0];
        let p = parity(vs);
        for (t, c) in &w.terms {
            let r = mode_basis(vs, n, &t[slot]);
            if r.is_empty() {
                continue;
            }
            let coef = vc.mul(c).expect("one ring");
            out.add_assign(&FermionVector::from_rvec_in_slot(w.k, t, slot, &r, &coef, slot_sign(t, slot, p)));
        }
    }
    out
}

/// v_n w for a single-slot v and single-slot w.
pub fn mode(v: &FermionVector, n: i64, w: &FermionVector) -> FermionVector {
    mode_on_slot(v, n, 0, w)
}

/// Largest mode index that can act nontrivially: v_n w = 0 for n > bound.
pub fn mode_bound(v_w2: i64, w_w2: i64) -> i64 {
    (v_w2 + w_w2).div_euclid(2) - 1
}

/// (u_1 (x) ... (x) u_k)_n w with the Koszul sign of the tensor product.
pub fn tensor_mode(u: &FermionVector, n: i64, w: &FermionVector) -> FermionVector {
    let mut out = FermionVector::zero(w.k);
    for (ut, uc) in &u.terms {
        for (wt, wc) in &w.terms {
            let slots = ut.len();
            let bounds: Vec<i64> = (0..slots).map(|j| mode_bound(weight2(&ut[j]), weight2(&wt[j]))).collect();
            let total = n - slots as i64 + 1;
            let mut sign = false;
            let mut wpar = 0usize;
            for j in 0..slots {
                if parity(&ut[j]) == 1 && wpar % 2 == 1 {
                    sign = !sign;
                }
                wpar += parity(&wt[j]) as usize;
            }
            let coef = uc.mul(wc).expect("one ring");
            let coef = if sign { coef.neg() } else { coef };
            // enumerate n_1..n_k with sum = total, n_j <= bound_j
            fn rec(
                j: usize,
                remaining: i64,
                ut: &[State],
                wt: &[State],
                bounds: &[i64],
                suffix: &[i64],
                cur: &mut Vec<State>,
                coef: Rat,
                out: &mut Vec<(Vec<State>, Rat)>,
            ) {
                if j == ut.len() {
                    if remaining == 0 {
                        out.push((cur.clone(), coef));
                    }
                    return;
                }
                let lo = remaining - suffix[j + 1];
                let hi = bounds[j];
                if j + 1 == ut.len() {
                    if remaining > hi {
                        return;
                    }
                    let r = mode_basis(&ut[j], remaining, &wt[j]);
                    for (s, x) in r.iter() {
                        cur.push(s.clone());
                        rec(j + 1, 0, ut, wt, bounds, suffix, cur, &coef * x, out);
                        cur.pop();
                    }
                    return;
                }
                for nj in lo..=hi {
                    let r = mode_basis(&ut[j], nj, &wt[j]);
                    for (s, x) in r.iter() {
                        cur.push(s.clone());
                        rec(j + 1, remaining - nj, ut, wt, bounds, suffix, cur, &coef * x, out);
                        cur.pop();
                    }
                }
            }
            let mut suffix = vec![0i64; slots + 1];
            for j in (0..slots).rev() {
                suffix[j] = suffix[j + 1] + bounds[j];
            }
            let mut partial = Vec::new();
            rec(0, total, ut, wt, &bounds, &suffix, &mut Vec::new(), Rat::one(), &mut partial);
            for (t, x) in partial {
                out.add_term(t, coef.scale_rat(&x));
            }
        }
    }
    out
}

/// Y(u, x) w restricted to modes n in [lo, hi], as a series in `x`.
pub fn vertex_op(u: &FermionVector, w: &FermionVector, lo: i64, hi: i64) -> Series<FermionVector> {
    let mut out = Series::zero();
    for n in lo..=hi {
        let r = tensor_mode(u, n, w);
        if !r.is_empty() {
            out.push(&[("x", q(-n - 1, 1))], false, r);
        }
    }
    out.with_meta(format!("modes {lo}..={hi}"))
}

/// L(n) on all slots: the modes of sum_j omega^j.
pub fn virasoro(n: i64, w: &FermionVector) -> FermionVector {
    let Some(slots) = w.slots() else {
        return w.clone();
    };
    let om = omega(w.k);
    let mut out = FermionVector::zero(w.k);
    for j in 0..slots {
        out.add_assign(&mode_on_slot(&om, n + 1, j, w));
    }
    out
}

/// Signed permutation of tensor slots: input slot i goes to output slot perm[i].
pub fn permute(perm: &[usize], w: &FermionVector) -> FermionVector {
    let mut out = FermionVector::zero(w.k);
    for (t, c) in &w.terms {
        let mut tt = vec![Vec::new(); t.len()];
        let mut sign = false;
        for i in 0..t.len() {
            tt[perm[i]] = t[i].clone();
            for j in i + 1..t.len() {
                if perm[i] > perm[j] && parity(&t[i]) == 1 && parity(&t[j]) == 1 {
                    sign = !sign;
                }
            }
        }
        out.add_term(tt, if sign { c.neg() } else { c.clone() });
    }
    out
}

/// The cycle g: v_1 (x) v_2 (x) ... (x) v_k -> (sign) v_2 (x) ... (x) v_k (x) v_1, applied `power` times.
pub fn g_action(w: &FermionVector, power: i64) -> FermionVector {
    let Some(k) = w.slots() else {
        return w.clone();
    };
    let perm: Vec<usize> = (0..k).map(|i| (i + k - 1) % k).collect();
    let mut out = w.clone();
    for _ in 0..power.rem_euclid(k as i64) {
        out = permute(&perm, &out);
    }
    out
}

/// (1/k) sum_i eta^{-ij} g^i w: the eta^j-eigencomponent of w.
pub fn eigenprojection(w: &FermionVector, j: i64) -> FermionVector {
    let Some(slots) = w.slots() else {
        return w.clone();
    };
    let k = w.k;
    let mut out = FermionVector::zero(k);
    for i in 0..slots as i64 {
        out.add_assign(&g_action(w, i).scaled(&Scalar::t_pow(k, -i * j)));
    }
    out.scaled_rat(&rat(1, slots as i64))
}

/// Modes n for which u_n w can be nonzero, from the top down to `depth` below.
fn mode_range(u: &FermionVector, w: &FermionVector, depth: i64) -> (i64, i64) {
    let (uw, ww) = (u.weight2().unwrap_or(0), w.weight2().unwrap_or(0));
    let hi = mode_bound(uw, ww);
    (hi - depth, hi)
}

/// The untwisted Jacobi identity in Borcherds form, coefficient of
/// x0^{-l-1} x1^{-m-1} x2^{-n-1}, applied to w.
pub fn jacobi_coefficient(
    u: &FermionVector,
    v: &FermionVector,
    w: &FermionVector,
    l: i64,
    m: i64,
    n: i64,
) -> (FermionVector, FermionVector) {
    let k = w.k;
    let (pu, pv) = (u.parity().unwrap_or(0), v.parity().unwrap_or(0));
    let (wu, wv, ww) = (u.weight2().unwrap_or(0), v.weight2().unwrap_or(0), w.weight2().unwrap_or(0));
    let sign = if (l + (pu * pv) as i64) % 2 == 0 { 1 } else { -1 };
    let mut lhs = FermionVector::zero(k);
    // u_{m+l-i} v_{n+i} w vanishes once n+i passes the bound for v on w
    let imax1 = mode_bound(wv, ww) - n;
    let imax2 = mode_bound(wu, ww) - m;
    let imax = imax1.max(imax2).max(if l >= 0 { l } else { 0 });
    for i in 0..=imax.max(0) {
        let c = binomial(q(l, 1), i as u32) * rat(if i % 2 == 0 { 1 } else { -1 }, 1);
        if c.is_zero() {
            continue;
        }
        let a = tensor_mode(u, m + l - i, &tensor_mode(v, n + i, w));
        let b = tensor_mode(v, n + l - i, &tensor_mode(u, m + i, w));
        lhs.add_assign(&a.sub(&b.scaled_rat(&rat(sign, 1))).scaled_rat(&c));
    }
    let mut rhs = FermionVector::zero(k);
    let imax = mode_bound(wu, wv) - l;
    for i in 0..=imax.max(-1) {
        let c = binomial(q(m, 1), i as u32);
        if c.is_zero() {
            continue;
        }
        let uv = tensor_mode(u, l + i, v);
        rhs.add_assign(&tensor_mode(&uv, m + n - i, w).scaled_rat(&c));
    }
    (lhs, rhs)
}

pub fn jacobi_check(u: &FermionVector, v: &FermionVector, w: &FermionVector, range: i64) -> CheckReport {
    let mut report = CheckReport::new("Jacobi identity", format!("l, m, n within {range} of the top modes"));
    let (_, mtop) = mode_range(u, w, 0);
    let (_, ntop) = mode_range(v, w, 0);
    for l in -range..=range {
        for m in (mtop - range)..=(mtop + 1) {
            for n in (ntop - range)..=(ntop + 1) {
                let (a, b) = jacobi_coefficient(u, v, w, l, m, n);
                report.compared += 1;
                if a != b {
                    report.fail(format!("l={l} m={m} n={n}: {} vs {}", a.render(), b.render()));
                    return report;
                }
            }
        }
    }
    report
}

/// u_n v = (-1)^{|u||v|} sum_j (-1)^{n+j+1} L(-1)^j/j! v_{n+j} u.
pub fn skew_check(u: &FermionVector, v: &FermionVector, depth: i64) -> CheckReport {
    let mut report = CheckReport::new("skew symmetry", format!("top {depth} modes"));
    let (pu, pv) = (u.parity().unwrap_or(0), v.parity().unwrap_or(0));
    let (lo, hi) = mode_range(u, v, depth);
    let vtop = mode_bound(v.weight2().unwrap_or(0), u.weight2().unwrap_or(0));
    for n in lo..=hi + 1 {
        let lhs = tensor_mode(u, n, v);
        let mut rhs = FermionVector::zero(v.k);
        for j in 0..=(vtop - n).max(-1) {
            let mut t = tensor_mode(v, n + j, u);
            let mut fact = Rat::one();
            for i in 1..=j {
                t = virasoro(-1, &t);
                fact *= Rat::from_integer(i.into());
            }
            let s = if (n + j + 1 + (pu * pv) as i64) % 2 == 0 { Rat::one() } else { -Rat::one() };
            rhs.add_assign(&t.scaled_rat(&(s / fact)));
        }
        report.compared += 1;
        if lhs != rhs {
            report.fail(format!("n={n}: {} vs {}", lhs.render(), rhs.render()));
            break;
        }
    }
    report
}

/// (L(-1)v)_n = -n v_{n-1}.
pub fn lminus1_check(v: &FermionVector, w: &FermionVector, depth: i64) -> CheckReport {
    let mut report = CheckReport::new("L(-1) derivative", format!("top {depth} modes"));
    let dv = virasoro(-1, v);
    let (lo, hi) = mode_range(&dv, w, depth);
    for n in lo..=hi + 1 {
        let lhs = tensor_mode(&dv, n, w);
        let rhs = tensor_mode(v, n - 1, w).scaled_rat(&rat(-n, 1));
        report.compared += 1;
        if lhs != rhs {
            report.fail(format!("n={n}"));
            break;
        }
    }
    report
}

/// [L(m), L(n)] = (m-n) L(m+n) + (m^3-m)/12 delta_{m+n,0} c on the given states.
pub fn virasoro_bracket_check(states: &[FermionVector], range: i64) -> CheckReport {
    let mut report = CheckReport::new("Virasoro relations", format!("|m|,|n| <= {range}"));
    for w in states {
        let slots = w.slots().unwrap_or(1) as i64;
        let c = rat(CENTRAL_CHARGE.0 * slots, CENTRAL_CHARGE.1);
        for m in -range..=range {
            for n in -range..=range {
                let lhs = virasoro(m, &virasoro(n, w)).sub(&virasoro(n, &virasoro(m, w)));
                let mut rhs = virasoro(m + n, w).scaled_rat(&rat(m - n, 1));
                if m + n == 0 {
                    rhs.add_assign(&w.scaled_rat(&(rat(m * m * m - m, 12) * &c)));
                }
                report.compared += 1;
                if lhs != rhs {
                    report.fail(format!("m={m} n={n} on {}", w.render()));
                    return report;
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(k: u32, s: &[i64]) -> FermionVector {
        FermionVector::single(k, s.to_vec())
    }

    #[test]
    fn clifford_examples() {
        let k = 1;
        let vac = FermionVector::vacuum(k, 1);
        assert_eq!(clifford_apply(0, 0, &psi(k)), vac);
        assert_eq!(clifford_apply(-1, 0, &vac), psi(k));
        assert!(clifford_apply(0, 0, &vac).is_empty());
        // psi_{-1} psi_{-2}|0> = -psi_{-2} psi_{-1}|0>
        assert_eq!(clifford_apply(-1, 0, &st(k, &[-2])), st(k, &[-2, -1]).scaled_rat(&rat(-1, 1)));
    }

    #[test]
    fn rendering() {
        assert_eq!(render_state(&[-4, -1]), "psi(-7/2)psi(-1/2)|0>");
        assert_eq!(render_state(&[]), "|0>");
    }

    #[test]
    fn graded_dimensions() {
        assert_eq!(graded_dims(8), vec![1, 1, 0, 1, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn vacuum_and_creation() {
        let k = 1;
        let vac = FermionVector::vacuum(k, 1);
        for s in basis(6) {
            let w = st(k, &s);
            assert_eq!(mode(&vac, -1, &w), w);
            assert!(mode(&vac, 0, &w).is_empty());
            // v_{-1} 1 = v
            assert_eq!(mode(&w, -1, &vac), w);
            assert!(mode(&w, 0, &vac).is_empty());
        }
        assert_eq!(mode(&psi(k), 0, &psi(k)), vac);
    }

    #[test]
    fn conformal_weights() {
        let k = 1;
        for s in basis(8) {
            let w = st(k, &s);
            assert_eq!(virasoro(0, &w), w.scaled_rat(&rat(weight2(&s), 2)));
        }
        // L(-1) psi = psi_{-2}|0>
        assert_eq!(virasoro(-1, &psi(k)), st(k, &[-2]));
    }

    #[test]
    fn virasoro_relations() {
        let states: Vec<FermionVector> = basis(8).into_iter().map(|s| st(1, &s)).collect();
        let r = virasoro_bracket_check(&states, 3);
        assert!(r.passed(), "{r:?}");
    }

    fn test_set(k: u32) -> Vec<FermionVector> {
        vec![psi(k), omega(k), st(k, &[-2])]
    }

    #[test]
    fn jacobi_on_fermion() {
        let k = 1;
        for u in test_set(k) {
            for v in test_set(k) {
                for s in basis(6) {
                    let w = st(k, &s);
                    let r = jacobi_check(&u, &v, &w, 2);
                    assert!(r.passed(), "{} {} {}: {r:?}", u.render(), v.render(), w.render());
                }
            }
        }
    }

    #[test]
    fn skew_and_derivative() {
        let k = 1;
        for u in test_set(k) {
            for v in test_set(k) {
                assert!(skew_check(&u, &v, 4).passed());
            }
            for s in basis(6) {
                assert!(lminus1_check(&u, &st(k, &s), 4).passed());
            }
        }
    }

    #[test]
    fn weight_and_parity_bookkeeping() {
        let k = 1;
        for v in basis(5) {
            for w in basis(5) {
                for n in -3..3 {
                    let r = mode(&st(k, &v), n, &st(k, &w));
                    if let Some(w2) = r.weight2() {
                        assert_eq!(w2, weight2(&v) + weight2(&w) - 2 * n - 2);
                        assert_eq!(r.parity(), Some((parity(&v) + parity(&w)) % 2));
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_signs() {
        let k = 1;
        let pp = FermionVector::basis_vector(k, vec![vec![-1], vec![-1]]);
        // (1 2) on psi (x) psi
        assert_eq!(permute(&[1, 0], &pp), pp.scaled_rat(&rat(-1, 1)));
        // psi^1 acting: even second slot, no sign
        let u1 = FermionVector::in_slot(k, 2, 0, &psi(k));
        let w = FermionVector::basis_vector(k, vec![vec![-1], vec![]]);
        assert_eq!(tensor_mode(&u1, 0, &w), FermionVector::vacuum(k, 2));
        // psi^2 on psi (x) psi picks up the sign from passing slot 1
        let u2 = FermionVector::in_slot(k, 2, 1, &psi(k));
        let want = FermionVector::basis_vector(k, vec![vec![-1], vec![]]).scaled_rat(&rat(-1, 1));
        assert_eq!(tensor_mode(&u2, 0, &pp), want);
    }

    #[test]
    fn tensor_grading() {
        let k = 1;
        for a in basis(4) {
            for b in basis(4) {
                let w = FermionVector::basis_vector(k, vec![a.clone(), b.clone()]);
                let w2 = weight2(&a) + weight2(&b);
                assert_eq!(virasoro(0, &w), w.scaled_rat(&rat(w2, 2)));
            }
        }
    }

    #[test]
    fn cycle_action() {
        let k = 3;
        let v2 = FermionVector::in_slot(k, 3, 1, &psi(k));
        assert_eq!(g_action(&v2, 1), FermionVector::in_slot(k, 3, 0, &psi(k)));
        let w = FermionVector::basis_vector(k, vec![vec![-1], vec![-2, -1], vec![-1]]);
        assert_eq!(g_action(&w, 3), w);
        let mut total = FermionVector::zero(k);
        for j in 0..3 {
            let p = eigenprojection(&w, j);
            assert_eq!(g_action(&p, 1), p.scaled(&Scalar::t_pow(k, j)));
            total.add_assign(&p);
        }
        assert_eq!(total, w);
    }

    #[test]
    fn symmetric_projection() {
        let k = 3;
        let mut w = FermionVector::zero(k);
        for j in 0..3 {
            w.add_assign(&FermionVector::in_slot(k, 3, j, &psi(k)));
        }
        assert_eq!(eigenprojection(&w, 0), w);
        assert!(eigenprojection(&w, 1).is_empty());
        assert!(eigenprojection(&w, 2).is_empty());
    }
}
