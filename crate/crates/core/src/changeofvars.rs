//! Change-of-variables calculus: the exponential solver for power series
//! vanishing at zero, the coefficients a_j, the transition function f and its
//! inverse, the Theta series and the superconformal representation identities
//! on C[x, x^-1][phi].

use std::fmt::Debug;

use num_traits::{One, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exactnum::{binomial, q, rat, Scalar, Q};
use crate::fseries::{assert_equal_on_window, binom_expand, binom_vars, Series, Window};
use crate::report::CheckReport;

/// Coefficient rings the exponential solver runs over.
pub trait SolveRing: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: Q) -> Self;
    fn inverse(&self) -> Result<Self>;
    fn is_zero(&self) -> bool;
}

impl SolveRing for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero(self.k())
    }
    fn add(&self, other: &Self) -> Self {
        Scalar::add(self, other).expect("one ring")
    }
    fn sub(&self, other: &Self) -> Self {
        Scalar::sub(self, other).expect("one ring")
    }
    fn mul(&self, other: &Self) -> Self {
        Scalar::mul(self, other).expect("one ring")
    }
    fn scale(&self, c: Q) -> Self {
        self.scale_rat(&rat(*c.numer(), *c.denom()))
    }
    fn inverse(&self) -> Result<Self> {
        self.invert()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

/// Series truncated above a fixed exponent of one variable.
#[derive(Clone, PartialEq, Debug)]
pub struct TruncSeries {
    pub s: Series<Scalar>,
    pub var: &'static str,
    pub cap: Q,
    pub k: u32,
}

impl TruncSeries {
    pub fn new(s: Series<Scalar>, var: &'static str, cap: Q, k: u32) -> Self {
        let s = s.truncate(var, None, Some(cap));
        TruncSeries { s, var, cap, k }
    }

    fn wrap(&self, s: Series<Scalar>) -> Self {
        TruncSeries { s, var: self.var, cap: self.cap, k: self.k }
    }
}

impl SolveRing for TruncSeries {
    fn zero_like(&self) -> Self {
        self.wrap(Series::zero())
    }
    fn add(&self, other: &Self) -> Self {
        self.wrap(self.s.add(&other.s))
    }
    fn sub(&self, other: &Self) -> Self {
        self.wrap(self.s.sub(&other.s))
    }
    fn mul(&self, other: &Self) -> Self {
        self.wrap(self.s.mul_capped(&other.s, &[(self.var, self.cap)]))
    }
    fn scale(&self, c: Q) -> Self {
        self.wrap(self.s.scale(&Scalar::from_q(self.k, c)))
    }
    /// Inverse of `lead * (1 + u)` with `u` of positive order in the truncation variable.
    fn inverse(&self) -> Result<Self> {
        let lead = self.s.filter(|s, m| s.exponent(m, self.var).is_zero());
        let lead_inv = lead.monomial_pow(-Q::one()).map_err(|_| Error::NotInvertible(self.s.render()))?;
        let u = self.s.sub(&lead).mul(&lead_inv);
        let order = self.cap.ceil().to_integer().max(0) as u32;
        let caps = [(self.var, self.cap)];
        Ok(self.wrap(Series::one_plus_pow(&u, -Q::one(), order, self.k, &caps).mul_capped(&lead_inv, &caps)))
    }
    fn is_zero(&self) -> bool {
        self.s.is_zero()
    }
}

/// `a0` and A_1..A_N with exp(sum A_j x^{j+1} d/dx) a0^{x d/dx} x = f.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpCoeffs<R> {
    pub a0: R,
    pub a: Vec<R>,
}

/// Coefficients of exp(sum_j A_j x^{j+1} d/dx)(a0 x) through x^deg, by degree.
pub fn exp_flow<R: SolveRing>(a: &[R], a0: &R, deg: usize) -> Vec<R> {
    let zero = a0.zero_like();
    let mut sum = vec![zero.clone(); deg + 1];
    if deg >= 1 {
        sum[1] = a0.clone();
    }
    let mut term = sum.clone();
    for n in 1..=deg {
        let mut next = vec![zero.clone(); deg + 1];
        let mut any = false;
        for (m, c) in term.iter().enumerate() {
            if c.is_zero() || m == 0 {
                continue;
            }
            for (j, aj) in a.iter().enumerate() {
                let target = m + j + 1;
                if target > deg || aj.is_zero() {
                    continue;
                }
                let add = aj.mul(c).scale(q(m as i64, n as i64));
                next[target] = next[target].add(&add);
                any = true;
            }
        }
        if !any {
            break;
        }
        for (s, t) in sum.iter_mut().zip(&next) {
            *s = s.add(t);
        }
        term = next;
    }
    sum
}

/// Solves for a0 and A_1..A_order given f = sum_j f[j] x^{j+1}.
pub fn huang_solve<R: SolveRing>(f: &[R], order: usize) -> Result<ExpCoeffs<R>> {
    let a0 = f.first().ok_or_else(|| Error::Precondition("empty series".into()))?.clone();
    if a0.is_zero() {
        return Err(Error::NotInvertible("leading coefficient is zero".into()));
    }
    let inv = a0.inverse()?;
    let zero = a0.zero_like();
    let mut a: Vec<R> = Vec::with_capacity(order);
    for n in 1..=order {
        a.push(zero.clone());
        let current = exp_flow(&a, &a0, n + 1);
        let target = f.get(n).cloned().unwrap_or_else(|| zero.clone());
        a[n - 1] = target.sub(&current[n + 1]).mul(&inv);
    }
    Ok(ExpCoeffs { a0, a })
}

/// The a_j, j = 1..order, for the cycle length k.
pub fn compute_a(k: u32, order: usize) -> Vec<Scalar> {
    let kk = k as i64;
    let f: Vec<Scalar> = (0..=order)
        .map(|j| Scalar::from_rat(k, binomial(q(kk, 1), j as u32 + 1) * rat(1, kk)))
        .collect();
    let sol = huang_solve(&f, order).expect("leading coefficient is 1");
    sol.a.into_iter().map(|c| c.neg()).collect()
}

fn zq(k: u32, e: Q) -> Series<Scalar> {
    Series::monomial(k, &[("z", e)])
}

/// (1 + x)^k/k - 1/k.
fn cycle_polynomial(k: u32) -> Series<Scalar> {
    let kk = k as i64;
    let mut out = Series::zero();
    for i in 1..=kk {
        out.push(&[("x", q(i, 1))], false, Scalar::from_rat(k, binomial(q(kk, 1), i as u32) * rat(1, kk)));
    }
    out
}

/// f(x) = (z^{1/k}/k)(1 + x)^k - z^{1/k}/k.
pub fn f_series(k: u32) -> Series<Scalar> {
    cycle_polynomial(k).mul(&zq(k, q(1, k as i64)))
}

/// (1 + k z^{-1/k} x)^{1/k} - 1 through x^order.
pub fn f_inverse_binomial(k: u32, order: u32) -> Series<Scalar> {
    let kk = k as i64;
    let u = Series::term(&[("x", q(1, 1)), ("z", q(-1, kk))], false, Scalar::from_int(k, kk));
    Series::one_plus_pow(&u, q(1, kk), order, k, &[]).sub(&Series::one(k))
}

/// z^{-1/k} exp(sum a_j z^{-j/k} x^{j+1} d/dx) x through x^order.
pub fn f_inverse_flow(k: u32, order: usize) -> Series<Scalar> {
    let kk = k as i64;
    let a = compute_a(k, order);
    let big = q(order as i64 + 1, 1);
    let coeffs: Vec<TruncSeries> = a
        .iter()
        .enumerate()
        .map(|(i, aj)| TruncSeries::new(zq(k, q(-(i as i64 + 1), kk)).scale(aj), "x", big, k))
        .collect();
    let one = TruncSeries::new(Series::one(k), "x", big, k);
    let flow = exp_flow(&coeffs, &one, order);
    let mut out = Series::zero();
    for (deg, c) in flow.iter().enumerate() {
        let mono = Series::monomial(k, &[("x", q(deg as i64, 1)), ("z", q(-1, kk))]);
        out = out.add(&c.s.mul(&mono));
    }
    out
}

/// f o f^{-1} = id and the two routes to f^{-1} agree, through x^order.
pub fn inverse_check(k: u32, order: u32) -> CheckReport {
    let cap = q(order as i64, 1);
    let w = Window::new().with("x", Q::zero(), cap);
    let binom = f_inverse_binomial(k, order);
    let flow = f_inverse_flow(k, order as usize);
    let routes = assert_equal_on_window("inverse: flow vs binomial", &flow, &binom, &w);
    let composed = f_series(k)
        .substitute("x", &binom, "x", order, &[("x", cap)])
        .expect("polynomial in x");
    let ident = assert_equal_on_window("f(f^-1(x)) = x", &composed, &Series::monomial(k, &[("x", q(1, 1))]), &w);
    CheckReport::combine(format!("compositional inverse k={k}"), w.to_string(), &[routes, ident])
}

/// Applies exp(sum A_j (x^{j+1} d/dx + (j+1)/2 phi x^j d/dphi)) to `s`, through x^cap.
fn super_flow(k: u32, a: &[Scalar], s: &Series<Scalar>, cap: i64) -> Result<Series<Scalar>> {
    let caps = [("x", q(cap, 1))];
    let field = |v: &Series<Scalar>| -> Series<Scalar> {
        let mut out = Series::zero();
        for (i, aj) in a.iter().enumerate() {
            let j = i as i64 + 1;
            let shift = Series::term(&[("x", q(j + 1, 1))], false, aj.clone());
            out = out.add(&v.derivative("x").mul_capped(&shift, &caps));
            let odd = v.phi_component(true).times_phi();
            let half = Series::term(&[("x", q(j, 1))], false, aj.scale_rat(&rat(j + 1, 2)));
            out = out.add(&odd.mul_capped(&half, &caps));
        }
        out
    };
    let mut sum = s.truncate("x", None, Some(q(cap, 1)));
    let mut term = sum.clone();
    for n in 1..=(cap as usize + 2) {
        term = field(&term).scale(&Scalar::from_rat(k, rat(1, n as i64)));
        if term.is_zero() {
            return Ok(sum);
        }
        sum = sum.add(&term);
    }
    Err(Error::NonTerminating(cap as usize + 2))
}

/// The even and odd parts of the superconformal series built from (a0^{1/2}, A_j).
pub fn super_transform(k: u32, a0_sqrt: &Scalar, a: &[Scalar], order: i64) -> Result<(Series<Scalar>, Series<Scalar>)> {
    let a0 = a0_sqrt.mul(a0_sqrt)?;
    let x = Series::term(&[("x", q(1, 1))], false, a0);
    let phi = Series::term(&[], true, a0_sqrt.clone());
    let even = super_flow(k, a, &x, order + 1)?;
    let odd = super_flow(k, a, &phi, order)?.phi_component(true);
    Ok((even, odd))
}

/// For f = (1+x)^k/k - 1/k: the even component reproduces f and the odd
/// component squares to f'.
pub fn super_f_check(k: u32, order: i64) -> Result<CheckReport> {
    let huang: Vec<Scalar> = compute_a(k, order as usize).into_iter().map(|a| a.neg()).collect();
    let (even, odd) = super_transform(k, &Scalar::one(k), &huang, order)?;
    let f = cycle_polynomial(k);
    let w_even = Window::new().with("x", Q::zero(), q(order + 1, 1));
    let w_odd = Window::new().with("x", Q::zero(), q(order, 1));
    let r1 = assert_equal_on_window("even component equals f", &even, &f, &w_even);
    let sq = odd.mul(&odd);
    let r2 = assert_equal_on_window("odd component squared equals f'", &sq, &f.derivative("x"), &w_odd);
    let constant = odd.coeff_at(&[], false).is_some_and(|c| c.is_one());
    let mut out = CheckReport::combine(format!("superconformal series k={k}"), w_even.to_string(), &[r1, r2]);
    if !constant {
        out.fail("odd component does not start at a0^(1/2)");
    }
    Ok(out)
}

/// Theta_1..Theta_N and exp(Theta_0) as series in x and z.
#[derive(Clone, Debug)]
pub struct ThetaSeries {
    pub k: u32,
    pub x_order: u32,
    pub c0: Series<Scalar>,
    pub exp_theta0: Series<Scalar>,
    pub theta: Vec<Series<Scalar>>,
}

/// Convention used for Theta_0.
pub const THETA0_CONVENTION: &str =
    "exp(Theta_0) is the square root of a0 with constant term 1, so exp(-Theta_0 2L_0(w,rho)) rho = exp(Theta_0) rho";

/// Solves f(z^{-1/k} w + f^{-1}(x)) - x = exp(sum Theta_j w^{j+1} d/dw) exp(2 Theta_0 w d/dw) w
/// with coefficients in x-series truncated at `x_order`.
pub fn theta_extract(k: u32, n: usize, x_order: u32) -> Result<ThetaSeries> {
    let kk = k as i64;
    let cap = q(x_order as i64, 1);
    let caps = [("x", cap)];
    let g = f_inverse_binomial(k, x_order);
    let one_plus_g = Series::one(k).add(&g);
    // F(w) = (z^{1/k}/k) sum_{i>=1} C(k,i) (1+g)^{k-i} z^{-i/k} w^i
    let mut coeffs = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let i = j as i64 + 1;
        let c = binomial(q(kk, 1), i as u32) * rat(1, kk);
        let s = if c.is_zero() {
            Series::zero()
        } else {
            one_plus_g
                .pow_capped((kk - i) as u32, k, &caps)
                .mul(&zq(k, q(1 - i, kk)))
                .scale(&Scalar::from_rat(k, c))
        };
        coeffs.push(TruncSeries::new(s, "x", cap, k));
    }
    let sol = huang_solve(&coeffs, n)?;
    let c0 = sol.a0.s.clone();
    let u = c0.sub(&Series::one(k));
    if u.iter().any(|(m, _)| u.exponent(m, "x") <= Q::zero()) {
        return Err(Error::NotInvertible(format!("a0 does not start at 1: {}", c0.render())));
    }
    let exp_theta0 = Series::one_plus_pow(&u, q(1, 2), x_order, k, &caps);
    Ok(ThetaSeries { k, x_order, c0, exp_theta0, theta: sol.a.into_iter().map(|t| t.s).collect() })
}

/// Replaces x by (1/k) z^{1/k - 1} z0.
pub fn at_theta_point(k: u32, s: &Series<Scalar>) -> Series<Scalar> {
    let kk = k as i64;
    let repl = Series::term(&[("z", q(1, kk) - Q::one()), ("z0", Q::one())], false, Scalar::from_rat(k, rat(1, kk)));
    s.substitute("x", &repl, "z0", 0, &[]).expect("polynomial in x")
}

/// Theta_j and exp(Theta_0) at x = (1/k) z^{1/k-1} z0 against their closed forms.
pub fn theta_verify(k: u32, n: usize, x_order: u32) -> Result<CheckReport> {
    let kk = k as i64;
    let th = theta_extract(k, n, x_order)?;
    let a = compute_a(k, n);
    let w = Window::new().with("z0", Q::zero(), q(x_order as i64, 1));
    let mut parts = Vec::new();
    for (i, t) in th.theta.iter().enumerate() {
        let j = i as i64 + 1;
        let closed = binom_vars(k, "z", 1, "z0", q(-j, kk), x_order).scale(&a[i].neg());
        parts.push(assert_equal_on_window(&format!("Theta_{j}"), &at_theta_point(k, t), &closed, &w));
    }
    let e = q(kk - 1, 2 * kk);
    let closed0 = binom_vars(k, "z", 1, "z0", e, x_order).mul(&zq(k, -e));
    parts.push(assert_equal_on_window("exp(Theta_0)", &at_theta_point(k, &th.exp_theta0), &closed0, &w));
    let sq = th.exp_theta0.mul_capped(&th.exp_theta0, &[("x", q(x_order as i64, 1))]);
    parts.push(assert_equal_on_window(
        "exp(Theta_0)^2 = a0",
        &sq,
        &th.c0,
        &Window::new().with("x", Q::zero(), q(x_order as i64, 1)),
    ));
    let report = CheckReport::combine(format!("Theta closed forms k={k}"), w.to_string(), &parts);
    Ok(report.with_detail(json!({ "theta0_convention": THETA0_CONVENTION, "j_max": n })))
}

/// Images of x and phi under the superconformal operator with parameter z, or its inverse.
fn rep_images(k: u32, inverse: bool, order: u32) -> (Series<Scalar>, Series<Scalar>) {
    let kk = k as i64;
    let s = Scalar::s(k);
    let x = Series::monomial(k, &[("x", Q::one())]);
    if !inverse {
        let dx = binom_expand(k, &zq(k, q(1, kk)), &x, q(kk, 1), k)
            .expect("monomial base")
            .sub(&zq(k, Q::one()));
        let dphi = binom_expand(k, &zq(k, q(1, kk)), &x, q(kk - 1, 2), order)
            .expect("monomial base")
            .scale(&s);
        (dx, dphi)
    } else {
        // one extra term so that ix / (leading term) is exact through x^order
        let ix = binom_vars(k, "z", 1, "x", q(1, kk), order + 1).sub(&zq(k, q(1, kk)));
        let iphi = binom_vars(k, "z", 1, "x", q(1 - kk, 2 * kk), order).scale(&s.scale_rat(&rat(1, kk)));
        (ix, iphi)
    }
}

/// Applies the operator (as an automorphism) to phi^eps x^n.
pub fn rep_apply(k: u32, n: i64, phi: bool, inverse: bool, order: u32) -> Series<Scalar> {
    let (dx, dphi) = rep_images(k, inverse, order);
    let caps = [("x", q(n + order as i64 + 1, 1))];
    let xn = Series::monomial(k, &[("x", q(n, 1))])
        .substitute("x", &dx, "x", order, &caps)
        .expect("leading term is a monomial unit");
    if phi {
        xn.mul_capped(&dphi, &caps).times_phi()
    } else {
        xn
    }
}

/// Both operator identities on x^n and phi x^n for |n| <= nmax.
pub fn rep_identity_check(k: u32, nmax: i64, order: u32) -> CheckReport {
    let kk = k as i64;
    let mut parts = Vec::new();
    for n in -nmax..=nmax {
        for phi in [false, true] {
            let w = Window::new().with("x", q(-1000, 1), q(n + order as i64 - 1, 1));
            let base = |m: i64, inv: bool| rep_apply(k, m, phi, inv, order);
            let d = base(n, false);
            let dprime = base(n - 1, false).scale(&Scalar::from_int(k, n));
            let lhs = dprime.neg().add(&d.derivative("x").mul(&Series::term(
                &[("z", q(1, kk) - Q::one())],
                false,
                Scalar::from_rat(k, rat(1, kk)),
            )));
            let rhs = d.derivative("z");
            let label = format!("first identity on {}x^{n}", if phi { "phi " } else { "" });
            parts.push(assert_equal_on_window(&label, &lhs, &rhs, &w));

            let inv = base(n, true);
            let invp = base(n - 1, true).scale(&Scalar::from_int(k, n));
            let pre = Series::term(&[("z", Q::one() - q(1, kk))], false, Scalar::from_int(k, kk));
            let lhs = invp.neg().add(&inv.derivative("x").mul(&pre));
            let rhs = inv.derivative("z").mul(&pre);
            let label = format!("second identity on {}x^{n}", if phi { "phi " } else { "" });
            parts.push(assert_equal_on_window(&label, &lhs, &rhs, &w));
        }
    }
    CheckReport::combine(format!("representation identities k={k}"), format!("|n|<={nmax}, order {order}"), &parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(k: u32, n: i64, d: i64) -> Scalar {
        Scalar::from_rat(k, rat(n, d))
    }

    #[test]
    fn solver_trivial_cases() {
        let k = 1;
        let id = huang_solve(&[sc(k, 1, 1)], 4).unwrap();
        assert!(id.a.iter().all(|a| a.is_zero()));
        let dil = huang_solve(&[sc(k, 2, 1)], 4).unwrap();
        assert_eq!(dil.a0, sc(k, 2, 1));
        assert!(dil.a.iter().all(|a| a.is_zero()));
        assert!(matches!(huang_solve(&[Scalar::zero(k)], 2), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn solver_on_cubic() {
        // (1+x)^3/3 - 1/3 = x + x^2 + x^3/3
        let k = 3;
        let sol = huang_solve(&[sc(k, 1, 1), sc(k, 1, 1), sc(k, 1, 3)], 2).unwrap();
        assert_eq!(sol.a, vec![sc(k, 1, 1), sc(k, -2, 3)]);
    }

    #[test]
    fn quoted_coefficients() {
        for k in 1..=8u32 {
            let kk = k as i64;
            let a = compute_a(k, 3);
            assert_eq!(a[0], sc(k, 1 - kk, 2));
            assert_eq!(a[1], sc(k, kk * kk - 1, 12));
        }
        assert!(compute_a(1, 6).iter().all(|a| a.is_zero()));
    }

    #[test]
    fn third_coefficient_matches_quartic_term() {
        // [x^4] of exp(sum A_j x^{j+1} d/dx) x is A_3 + 5/2 A_1 A_2 + A_1^3, and it must
        // vanish for the cubic (1+x)^3/3 - 1/3.
        let a = compute_a(3, 3);
        let (a1, a2, a3) = (a[0].neg(), a[1].neg(), a[2].neg());
        let cube = a1.mul(&a1).unwrap().mul(&a1).unwrap();
        let mixed = a1.mul(&a2).unwrap().scale_rat(&rat(5, 2));
        assert!(a3.add(&mixed).unwrap().add(&cube).unwrap().is_zero());
        assert_eq!(a[2], sc(3, -2, 3));
    }

    #[test]
    fn perturbation_breaks_the_match() {
        let k = 5;
        let f: Vec<Scalar> = (0..=5u32).map(|j| Scalar::from_rat(k, binomial(q(5, 1), j + 1) * rat(1, 5))).collect();
        let sol = huang_solve(&f, 5).unwrap();
        let good = exp_flow(&sol.a, &sol.a0, 6);
        for (j, fj) in f.iter().enumerate() {
            assert_eq!(&good[j + 1], fj);
        }
        for j in 0..5 {
            let mut a = sol.a.clone();
            a[j] = a[j].add(&Scalar::one(k)).unwrap();
            let bad = exp_flow(&a, &sol.a0, 6);
            assert_ne!(bad[j + 2], f[j + 1], "perturbing A_{}", j + 1);
            for d in 0..j + 2 {
                assert_eq!(bad[d], good[d]);
            }
        }
    }

    #[test]
    fn inverse_examples() {
        let k = 1;
        assert_eq!(f_series(k), Series::monomial(k, &[("x", q(1, 1)), ("z", q(1, 1))]));
        assert_eq!(f_inverse_binomial(k, 5), Series::monomial(k, &[("x", q(1, 1)), ("z", q(-1, 1))]));
        let g = f_inverse_binomial(2, 3);
        let mut want = Series::zero();
        for (i, c) in [(1, rat(1, 1)), (2, rat(-1, 2)), (3, rat(1, 2))] {
            want.push(&[("x", q(i, 1)), ("z", q(-i, 2))], false, Scalar::from_rat(2, c));
        }
        assert_eq!(g, want);
        for k in [1, 2, 3, 5] {
            assert!(inverse_check(k, 10).passed(), "k={k}");
        }
    }

    #[test]
    fn super_series() {
        for k in [1, 2, 3, 5] {
            let r = super_f_check(k, 6).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn theta_linear_case() {
        let th = theta_extract(1, 3, 3).unwrap();
        assert!(th.theta.iter().all(|t| t.is_zero()));
        assert_eq!(th.exp_theta0, Series::one(1));
    }

    #[test]
    fn theta_closed_forms() {
        for k in [1, 2, 3, 5] {
            let r = theta_verify(k, 4, 4).unwrap();
            assert!(r.passed(), "k={k}: {r:?}");
        }
    }

    #[test]
    fn rep_closed_form_k2() {
        let d = rep_apply(2, 1, false, false, 3);
        let mut want = Series::zero();
        want.push(&[("x", q(1, 1)), ("z", q(1, 2))], false, Scalar::from_int(2, 2));
        want.push(&[("x", q(2, 1))], false, Scalar::one(2));
        assert_eq!(d, want);
    }

    #[test]
    fn rep_inverse_roundtrip() {
        let k = 3;
        // D^{-1}(D x) = x through the truncation order
        let (dx, _) = rep_images(k, false, 6);
        let (ix, _) = rep_images(k, true, 6);
        let back = dx.substitute("x", &ix, "x", 6, &[("x", q(6, 1))]).unwrap();
        let w = Window::new().with("x", Q::zero(), q(6, 1));
        assert!(assert_equal_on_window("inverse", &back, &Series::monomial(k, &[("x", q(1, 1))]), &w).passed());
    }

    #[test]
    fn rep_identities() {
        for k in 1..=5 {
            let r = rep_identity_check(k, 6, 4);
            assert!(r.passed(), "k={k}: {r:?}");
        }
    }
}
