//! Thue–Mahler systems for y even.
//!
//! With `ξ = (C₁x + q^k√−c)/2 = (C₁x − q^k)/2 + q^k w` the ideal `(ξ)` is
//! `𝔅 𝔄^p` with `𝔅 = 𝔮 𝔭₂^(p−2)`. For the class representative `𝔟` with
//! `𝔄𝔟 = (β)` principal, `ξ = γ β^p` where `γ` generates `𝔅 𝔟^(−p)`. The
//! representative is `𝔭₂^i` when a power of `𝔭₂` lies in the right class and
//! a reduced-form ideal otherwise. Writing `γ = num/den` and
//! `num (U + Vw)^p = R + I w` gives `den q^k = I(U, V)` and `den C₁ x = 2R + I`.
//!
//! Only the canonical `𝔭₂` is used. The conjugate factorisation is the same
//! system with `x` replaced by `−x`, so solutions are recovered with a sign.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::BivariateIntPoly;
use super::descent_c;
use crate::arith::{exact_root, is_prime};
use crate::curvedb::Parity;
use crate::error::{invalid, precondition, Error, Result};
use crate::quadfield::{c1_ideal, class_group, reduced_forms, QuadField, QuadIdeal, QuadInt};

/// `a q^k = F(U, V)` together with `b x = G(U, V)` for recovering `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TMProblem {
    pub c1: u64,
    pub q: u64,
    pub parity: Parity,
    pub p: u64,
    pub c: u64,
    pub h: u64,
    /// Integral class representative `𝔟`.
    pub class_rep: QuadIdeal,
    /// `i` when `𝔟 = 𝔭₂^i`.
    pub p2_power: Option<u64>,
    pub gamma_num: QuadInt,
    pub gamma_den: BigInt,
    pub f: BivariateIntPoly,
    pub a: BigInt,
    /// Common factor removed from the raw `(F, a)`.
    pub f_scale: BigInt,
    pub g: BivariateIntPoly,
    pub b: BigInt,
    pub g_scale: BigInt,
    /// `d` for a record of the non-coprime descent: `(U, V) = d (U', V')`.
    pub descent: BigInt,
}

/// A solution read back from `(U, V)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recovered {
    pub k: u64,
    pub alpha: u64,
    /// Signed: the conjugate prime above 2 shows up as negative `x`.
    pub x: BigInt,
    pub y: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReverseEngineered {
    pub u: BigInt,
    pub v: BigInt,
    pub x_signed: BigInt,
}

/// `(A, B)` with `(U + V w)^p = A + B w`.
fn beta_power(field: &QuadField, p: u64) -> (BivariateIntPoly, BivariateIntPoly) {
    let t = BigInt::from(field.w_trace());
    let n = BigInt::from(field.w_norm_term());
    let (u, v) = (BivariateIntPoly::u(), BivariateIntPoly::v());
    let mut a = BivariateIntPoly::from_i64(&[1]).expect("constant");
    let mut b = BivariateIntPoly::zero(0);
    for _ in 0..p {
        let bv = b.mul(&v);
        let na = a.mul(&u).add(&bv.scale(&n)).expect("same degree");
        let nb = a.mul(&v).add(&b.mul(&u)).and_then(|s| s.add(&bv.scale(&t))).expect("same degree");
        a = na;
        b = nb;
    }
    (a, b)
}

fn remove_common(poly: BivariateIntPoly, k: BigInt) -> (BivariateIntPoly, BigInt, BigInt) {
    let g = poly.content().gcd(&k);
    if g.is_zero() || g.is_one() {
        return (poly, k, BigInt::one());
    }
    (poly.div_exact(&g).expect("content"), k / &g, g)
}

/// Builds the y-even system for `(C₁, q)` with the given parity of α.
pub fn yeven_system(c1: u64, q: u64, parity: Parity, p: u64) -> Result<TMProblem> {
    if p < 3 || !is_prime(p) {
        return invalid(format!("p = {p} must be an odd prime"));
    }
    let c = descent_c(c1, q, parity);
    let field = QuadField::new(c)?;
    if field.w_trace() != 1 {
        return precondition(format!("-{c} is not 1 mod 4"));
    }
    let h = class_group(field).h;
    if h.is_multiple_of(p) {
        return precondition(format!("p = {p} divides the class number {h}"));
    }
    let p2 = field.p2()?;
    let big_b = field.ideal_mul(&c1_ideal(field, c1)?, &field.ideal_pow(&p2, p - 2));
    let mut reps: Vec<(Option<u64>, QuadIdeal)> = Vec::new();
    let mut acc = field.unit_ideal();
    for i in 0..h {
        reps.push((Some(i), acc.clone()));
        acc = field.ideal_mul(&acc, &p2);
    }
    reps.extend(reduced_forms(field.disc()).iter().map(|f| (None, field.form_ideal(f))));
    let (p2_power, class_rep, num) = reps
        .into_iter()
        .find_map(|(i, rep)| {
            let cand = field.ideal_mul(&big_b, &field.ideal_pow(&field.ideal_conj(&rep), p));
            field.is_principal_with_generator(&cand).map(|g| (i, rep, g))
        })
        .ok_or_else(|| Error::Computation("no class representative found".into()))?;
    // γ = num / N(𝔟)^p, in lowest terms
    let den = num_traits::pow(class_rep.norm(), p as usize);
    let common = num.content().gcd(&den);
    let gamma_num = QuadInt { a: &num.a / &common, b: &num.b / &common };
    let gamma_den = den / common;

    let (pa, pb) = beta_power(&field, p);
    let t = BigInt::from(field.w_trace());
    let n = BigInt::from(field.w_norm_term());
    let (na, nb) = (&gamma_num.a, &gamma_num.b);
    let real = pa.scale(na).add(&pb.scale(&(nb * &n)))?;
    let imag = pb.scale(na).add(&pa.scale(nb))?.add(&pb.scale(&(nb * &t)))?;
    let g_raw = real.scale(&BigInt::from(2)).add(&imag)?;
    let (f, a, f_scale) = remove_common(imag, gamma_den.clone());
    let (g, b, g_scale) = remove_common(g_raw, &gamma_den * c1);
    Ok(TMProblem {
        c1,
        q,
        parity,
        p,
        c,
        h,
        class_rep,
        p2_power,
        gamma_num,
        gamma_den,
        f,
        a,
        f_scale,
        g,
        b,
        g_scale,
        descent: BigInt::one(),
    })
}

impl TMProblem {
    pub fn field(&self) -> QuadField {
        QuadField::new(self.c).expect("validated at construction")
    }

    /// Records for `(U, V) = d (U', V')` with `d^p | a`, `d > 1`.
    pub fn descent_expansion(&self) -> Vec<TMProblem> {
        let mut out = Vec::new();
        let a = self.a.abs();
        let mut d = BigInt::from(2);
        loop {
            let dp = num_traits::pow(d.clone(), self.p as usize);
            if dp > a {
                break;
            }
            if (&a % &dp).is_zero() {
                let mut rec = self.clone();
                rec.a = &self.a / &dp;
                rec.descent = d.clone();
                out.push(rec);
            }
            d += 1;
        }
        out
    }

    /// Reads a solution back from `(U, V)`; `None` if the pair does not
    /// satisfy the system or gives no valid exponent.
    pub fn recover(&self, u: &BigInt, v: &BigInt) -> Option<Recovered> {
        let lhs = self.f.eval(u, v);
        let (quot, rem) = lhs.div_rem(&self.a);
        if !rem.is_zero() || !quot.is_positive() {
            return None;
        }
        let qb = BigInt::from(self.q);
        let mut k = 0u64;
        let mut rest = quot;
        while (&rest % &qb).is_zero() {
            rest /= &qb;
            k += 1;
        }
        if !rest.is_one() {
            return None;
        }
        let alpha = match self.parity {
            Parity::Odd => 2 * k + 1,
            Parity::Even if k > 0 => 2 * k,
            Parity::Even => return None,
        };
        let dp = num_traits::pow(self.descent.clone(), self.p as usize);
        let (x, rem) = (self.g.eval(u, v) * dp).div_rem(&self.b);
        if !rem.is_zero() {
            return None;
        }
        let rhs = BigInt::from(self.c1) * &x * &x + num_traits::pow(qb, alpha as usize);
        let (y, exact) = exact_root(&rhs, self.p as u32);
        exact.then_some(Recovered { k, alpha, x, y })
    }

    /// Solver-neutral record with integers as decimal strings.
    pub fn to_record(&self) -> TMRecord {
        let dec = |p: &BivariateIntPoly| p.coeffs().iter().map(|c| c.to_string()).collect();
        TMRecord {
            c1: self.c1,
            q: self.q,
            alpha_parity: self.parity,
            p: self.p,
            field_c: self.c,
            class_number: self.h,
            class_rep: [self.class_rep.content.to_string(), self.class_rep.a.to_string(), self.class_rep.b.to_string()],
            p2_power: self.p2_power,
            gamma: [self.gamma_num.a.to_string(), self.gamma_num.b.to_string(), self.gamma_den.to_string()],
            degree: self.f.degree(),
            f: dec(&self.f),
            a: self.a.to_string(),
            f_scale: self.f_scale.to_string(),
            g: dec(&self.g),
            b: self.b.to_string(),
            g_scale: self.g_scale.to_string(),
            primes: vec![self.q],
            descent: self.descent.to_string(),
        }
    }

    pub fn from_record(rec: &TMRecord) -> Result<Self> {
        let int = |s: &str| -> Result<BigInt> {
            s.parse::<BigInt>().map_err(|_| Error::InvalidArgument(format!("not an integer: {s:?}")))
        };
        let poly = |v: &[String]| -> Result<BivariateIntPoly> {
            BivariateIntPoly::new(v.iter().map(|s| int(s)).collect::<Result<_>>()?)
        };
        let f = poly(&rec.f)?;
        if f.degree() != rec.degree {
            return invalid("degree does not match the coefficient list");
        }
        let a = int(&rec.a)?;
        if a.is_zero() {
            return invalid("a must be nonzero");
        }
        Ok(TMProblem {
            c1: rec.c1,
            q: rec.q,
            parity: rec.alpha_parity,
            p: rec.p,
            c: rec.field_c,
            h: rec.class_number,
            class_rep: QuadIdeal {
                content: int(&rec.class_rep[0])?,
                a: int(&rec.class_rep[1])?,
                b: int(&rec.class_rep[2])?,
            },
            p2_power: rec.p2_power,
            gamma_num: QuadInt { a: int(&rec.gamma[0])?, b: int(&rec.gamma[1])? },
            gamma_den: int(&rec.gamma[2])?,
            f,
            a,
            f_scale: int(&rec.f_scale)?,
            g: poly(&rec.g)?,
            b: int(&rec.b)?,
            g_scale: int(&rec.g_scale)?,
            descent: int(&rec.descent)?,
        })
    }
}

/// Interchange form of a [`TMProblem`]. Coefficient lists run from `U^d` to `V^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TMRecord {
    pub c1: u64,
    pub q: u64,
    pub alpha_parity: Parity,
    pub p: u64,
    pub field_c: u64,
    pub class_number: u64,
    /// `[content, a, b]` of the representative ideal `content·(a, (−b + √D)/2)`.
    pub class_rep: [String; 3],
    pub p2_power: Option<u64>,
    /// `[num_a, num_b, den]` for `γ = (num_a + num_b w) / den`.
    pub gamma: [String; 3],
    pub degree: u32,
    pub f: Vec<String>,
    pub a: String,
    pub f_scale: String,
    pub g: Vec<String>,
    pub b: String,
    pub g_scale: String,
    pub primes: Vec<u64>,
    pub descent: String,
}

/// Finds `β = U + Vw` with `ξ = γ β^p` for a known solution, trying both
/// signs of `x`. Requires `y` even.
pub fn reverse_engineer(tm: &TMProblem, x: &BigInt, y: &BigInt, alpha: u64) -> Result<Option<ReverseEngineered>> {
    if y.is_odd() {
        return invalid("y must be even");
    }
    if Parity::of(alpha) != tm.parity {
        return invalid("parity of alpha does not match the system");
    }
    let field = tm.field();
    let qk = num_traits::pow(BigInt::from(tm.q), (alpha / 2) as usize);
    let norm = (y / 2) * tm.class_rep.norm();
    let betas = field.elements_of_norm(&norm);
    for xs in [x.clone(), -x] {
        let twice = BigInt::from(tm.c1) * &xs - &qk;
        if twice.is_odd() {
            continue;
        }
        let xi = QuadInt { a: twice / 2, b: qk.clone() };
        let target = xi.scale(&tm.gamma_den);
        for beta in &betas {
            let rhs = field.mul(&tm.gamma_num, &field.pow(beta, tm.p));
            if rhs == target {
                return Ok(Some(ReverseEngineered { u: beta.a.clone(), v: beta.b.clone(), x_signed: xs }));
            }
        }
    }
    Ok(None)
}
