//! Imaginary quadratic fields `Q(sqrt(-c))`.
//!
//! Elements are written `a + b*w` with `w = (1 + sqrt(-c))/2` when
//! `-c = 1 (mod 4)` and `w = sqrt(-c)` otherwise, so `w^2 = t*w + n` with
//! `t` the trace of `w` and `n = (disc - t)/4`.
//!
//! An integral ideal is `m * (a Z + (-b + sqrt(disc))/2 Z)` with content `m`;
//! the primitive part corresponds to the binary quadratic form `(a, b, c)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, factor_u64, is_prime, PrimeField};
use crate::error::{invalid, precondition, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadField {
    c: u64,
    disc: i64,
}

impl QuadField {
    pub fn new(c: u64) -> Result<Self> {
        if !arith::is_squarefree(c) {
            return invalid(format!("c = {c} must be a squarefree positive integer"));
        }
        let disc = if c % 4 == 3 { -(c as i64) } else { -4 * c as i64 };
        Ok(QuadField { c, disc })
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    /// Trace of `w`.
    pub fn w_trace(&self) -> i64 {
        self.disc.rem_euclid(2)
    }

    /// Constant `n` in `w^2 = t*w + n`.
    pub fn w_norm_term(&self) -> i64 {
        (self.disc - self.w_trace()) / 4
    }

    pub fn one(&self) -> QuadInt {
        QuadInt::new(1, 0)
    }

    pub fn mul(&self, x: &QuadInt, y: &QuadInt) -> QuadInt {
        let t = BigInt::from(self.w_trace());
        let n = BigInt::from(self.w_norm_term());
        let bb = &x.b * &y.b;
        QuadInt {
            a: &x.a * &y.a + &bb * n,
            b: &x.a * &y.b + &x.b * &y.a + bb * t,
        }
    }

    pub fn pow(&self, x: &QuadInt, mut e: u64) -> QuadInt {
        let mut acc = self.one();
        let mut base = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn conj(&self, x: &QuadInt) -> QuadInt {
        QuadInt { a: &x.a + &x.b * self.w_trace(), b: -&x.b }
    }

    pub fn norm(&self, x: &QuadInt) -> BigInt {
        &x.a * &x.a + &x.a * &x.b * self.w_trace() - &x.b * &x.b * self.w_norm_term()
    }

    /// Writes `x` as `(r + s*sqrt(-c)) / 2`, returning `(r, s)`.
    pub fn sqrt_parts(&self, x: &QuadInt) -> (BigInt, BigInt) {
        if self.w_trace() == 1 {
            (&x.a * 2 + &x.b, x.b.clone())
        } else {
            (&x.a * 2, &x.b * 2)
        }
    }

    /// Image of `w` under the map `O_K -> F_l` sending `sqrt(-c)` to `root`.
    pub fn w_mod(&self, field: &PrimeField, root: u64) -> u64 {
        if self.w_trace() == 1 {
            let half = field.inv(2).expect("odd modulus");
            field.mul(field.add(1, root), half)
        } else {
            root
        }
    }

    pub fn reduce_mod(&self, x: &QuadInt, field: &PrimeField, w_image: u64) -> u64 {
        let l = field.modulus();
        field.add(arith::reduce_big(&x.a, l), field.mul(arith::reduce_big(&x.b, l), w_image))
    }

    pub fn unit_ideal(&self) -> QuadIdeal {
        QuadIdeal { content: BigInt::one(), a: BigInt::one(), b: BigInt::from(self.w_trace()) }
    }

    fn ideal_from_hnf(&self, big_a: &BigInt, big_b: &BigInt, big_c: &BigInt) -> QuadIdeal {
        let m = big_c.clone();
        debug_assert!((big_a % &m).is_zero() && (big_b % &m).is_zero());
        let a = big_a / &m;
        let bb = big_b / &m;
        let t = self.w_trace();
        // second generator bb + w = (-b + sqrt(disc))/2 gives b = -2bb - t
        let b: BigInt = -(bb * BigInt::from(2)) - BigInt::from(t);
        QuadIdeal::normalised(m, a, b)
    }

    /// Principal ideal generated by a nonzero element.
    pub fn principal_ideal(&self, x: &QuadInt) -> QuadIdeal {
        let n = BigInt::from(self.w_norm_term());
        let t = BigInt::from(self.w_trace());
        let rows = [
            (x.a.clone(), x.b.clone()),
            (&x.b * n, &x.a + &x.b * t),
        ];
        let (a, b, c) = hnf2(&rows);
        self.ideal_from_hnf(&a, &b, &c)
    }

    pub fn ideal_basis(&self, i: &QuadIdeal) -> [QuadInt; 2] {
        let t = self.w_trace();
        let second = QuadInt { a: -(&i.b + t) / 2 * &i.content, b: i.content.clone() };
        [QuadInt { a: &i.a * &i.content, b: BigInt::zero() }, second]
    }

    pub fn ideal_mul(&self, x: &QuadIdeal, y: &QuadIdeal) -> QuadIdeal {
        let bx = self.ideal_basis(x);
        let by = self.ideal_basis(y);
        let mut rows = Vec::with_capacity(4);
        for u in &bx {
            for v in &by {
                let p = self.mul(u, v);
                rows.push((p.a, p.b));
            }
        }
        let (a, b, c) = hnf2(&rows);
        self.ideal_from_hnf(&a, &b, &c)
    }

    pub fn ideal_pow(&self, x: &QuadIdeal, e: u64) -> QuadIdeal {
        let mut acc = self.unit_ideal();
        for _ in 0..e {
            acc = self.ideal_mul(&acc, x);
        }
        acc
    }

    pub fn ideal_conj(&self, x: &QuadIdeal) -> QuadIdeal {
        QuadIdeal::normalised(x.content.clone(), x.a.clone(), -&x.b)
    }

    pub fn contains(&self, i: &QuadIdeal, x: &QuadInt) -> bool {
        let m = &i.content;
        if !(&x.a % m).is_zero() || !(&x.b % m).is_zero() {
            return false;
        }
        let (xa, xb) = (&x.a / m, &x.b / m);
        let t = self.w_trace();
        // x/m = u*a + v*(-(b+t)/2 + w) with v = xb
        let shift: BigInt = (&i.b + BigInt::from(t)) / 2;
        let u: BigInt = xa + xb * shift;
        (u % &i.a).is_zero()
    }

    /// All elements of the given norm.
    pub fn elements_of_norm(&self, norm: &BigInt) -> Vec<QuadInt> {
        let mut out = Vec::new();
        if norm.is_zero() {
            return out;
        }
        let d = BigInt::from(-self.disc);
        let t = self.w_trace();
        let four_n = norm * 4;
        let ymax: BigInt = Roots::sqrt(&(&four_n / &d));
        let mut y = -ymax.clone();
        while y <= ymax {
            let rest: BigInt = &four_n - &d * &y * &y;
            if !rest.is_negative() {
                let s: BigInt = Roots::sqrt(&rest);
                if &s * &s == rest {
                    let mut roots = vec![s.clone()];
                    if !s.is_zero() {
                        roots.push(-s.clone());
                    }
                    for r in roots {
                        let twice = r - &y * t;
                        if twice.is_even() {
                            out.push(QuadInt { a: twice / 2, b: y.clone() });
                        }
                    }
                }
            }
            y += 1;
        }
        out
    }

    fn sub_mul(&self, x: &QuadInt, y: &QuadInt, m: &BigInt) -> QuadInt {
        QuadInt { a: &x.a - &y.a * m, b: &x.b - &y.b * m }
    }

    /// Shortest nonzero element of the ideal lattice under the norm form.
    fn shortest_element(&self, ideal: &QuadIdeal) -> QuadInt {
        let [mut v1, mut v2] = self.ideal_basis(ideal);
        let mut n1 = self.norm(&v1);
        let mut n2 = self.norm(&v2);
        loop {
            if n2 < n1 {
                std::mem::swap(&mut v1, &mut v2);
                std::mem::swap(&mut n1, &mut n2);
            }
            // 2<v1, v2> = N(v1 + v2) - N(v1) - N(v2)
            let sum = QuadInt { a: &v1.a + &v2.a, b: &v1.b + &v2.b };
            let twice_dot = self.norm(&sum) - &n1 - &n2;
            let two_n1: BigInt = &n1 * 2;
            let mu = (&twice_dot + &n1).div_floor(&two_n1);
            if mu.is_zero() {
                return v1;
            }
            v2 = self.sub_mul(&v2, &v1, &mu);
            n2 = self.norm(&v2);
        }
    }

    /// A generator of `ideal` if it is principal, normalised to a
    /// non-negative `sqrt(-c)` part (ties: non-negative rational part).
    /// Found by lattice reduction: a generator is a shortest element.
    pub fn is_principal_with_generator(&self, ideal: &QuadIdeal) -> Option<QuadInt> {
        let s = self.shortest_element(ideal);
        if self.norm(&s) != ideal.norm() {
            return None;
        }
        // all unit multiples; w is a unit only for c = 1, 3
        let mut gens = vec![s.clone(), s.neg()];
        if self.c <= 3 {
            let w = QuadInt::new(0, 1);
            let mut g = s;
            for _ in 0..6 {
                g = self.mul(&g, &w);
                gens.push(g.clone());
                gens.push(g.neg());
            }
        }
        gens.retain(|g| g.b.is_positive() || (g.b.is_zero() && !g.a.is_negative()));
        gens.sort_by(|x, y| (&x.b, &x.a).cmp(&(&y.b, &y.a)));
        gens.into_iter().next()
    }

    /// Class of the ideal as a reduced form.
    pub fn ideal_class(&self, i: &QuadIdeal) -> Form {
        if let (Some(a), Some(b)) = (i.a.to_i64(), i.b.to_i64()) {
            return Form::new(a, b, self.disc).reduced();
        }
        // large primitive part: with s shortest in i, i*(conj s) = N(i) * conj(J)
        // where (s) = iJ and J has small norm
        let s = self.shortest_element(i);
        let prod = self.ideal_mul(i, &self.principal_ideal(&self.conj(&s)));
        Form::new(prod.a.to_i64().expect("small cofactor"), prod.b.to_i64().expect("small cofactor"), self.disc).reduced()
    }

    pub fn is_principal(&self, i: &QuadIdeal) -> bool {
        self.is_principal_with_generator(i).is_some()
    }

    /// The primitive ideal attached to a form of the field's discriminant.
    pub fn form_ideal(&self, f: &Form) -> QuadIdeal {
        QuadIdeal::normalised(BigInt::one(), BigInt::from(f.a), BigInt::from(f.b))
    }

    pub fn split_prime(&self, r: u64) -> Result<PrimeSplitting> {
        if !is_prime(r) {
            return invalid(format!("{r} is not prime"));
        }
        let d = self.disc;
        let t = self.w_trace();
        let symbol = if r == 2 {
            if d % 2 == 0 {
                0
            } else if d.rem_euclid(8) == 1 {
                1
            } else {
                -1
            }
        } else {
            arith::jacobi_u64(arith::reduce_i64(d, r), r)
        };
        if symbol == -1 {
            let ideal = QuadIdeal { content: BigInt::from(r), a: BigInt::one(), b: BigInt::from(t) };
            return Ok(PrimeSplitting::Inert(ideal));
        }
        // b with b = d (mod 2) and b^2 = d (mod 4r)
        let four_r = 4 * r as i64;
        let root = if r == 2 {
            (0..4i64).find(|b| (b * b - d).rem_euclid(8) == 0 && (b - d).rem_euclid(2) == 0).unwrap()
        } else {
            let f = PrimeField::new(r)?;
            let s = f.sqrt(arith::reduce_i64(d, r)).expect("residue") as i64;
            if (s - d).rem_euclid(2) == 0 { s } else { s + r as i64 }
        };
        debug_assert_eq!((root * root - d).rem_euclid(four_r), 0);
        let make = |b: i64| QuadIdeal::normalised(BigInt::one(), BigInt::from(r), BigInt::from(b));
        if symbol == 0 {
            Ok(PrimeSplitting::Ramified(make(root)))
        } else {
            let (p1, p2) = (make(root), make(-root));
            let (first, second) = if p1.hnf_offset(t) <= p2.hnf_offset(t) { (p1, p2) } else { (p2, p1) };
            Ok(PrimeSplitting::Split(first, second))
        }
    }

    /// The canonical prime above 2 (requires 2 to split).
    pub fn p2(&self) -> Result<QuadIdeal> {
        match self.split_prime(2)? {
            PrimeSplitting::Split(p, _) => Ok(p),
            _ => precondition(format!("2 does not split in Q(sqrt(-{}))", self.c)),
        }
    }

    /// Order of the class of `i` in the class group.
    pub fn class_order(&self, i: &QuadIdeal) -> u64 {
        let f = self.ideal_class(i);
        let mut acc = f;
        let mut k = 1;
        while !acc.is_identity() {
            acc = acc.compose(&f).reduced();
            k += 1;
        }
        k
    }

    /// Generator of `(content) * p^e` for a prime `p` of class order `order`
    /// whose `order`-th power is generated by `gen_order`; the exponent may be
    /// negative. Returned as (numerator, denominator).
    fn prime_power_generator(
        &self,
        gen_order: &QuadInt,
        order: u64,
        norm_p: u64,
        e: i64,
    ) -> (QuadInt, BigInt) {
        debug_assert_eq!(e.rem_euclid(order as i64), 0);
        let qe = e / order as i64;
        if qe >= 0 {
            (self.pow(gen_order, qe as u64), BigInt::one())
        } else {
            let k = qe.unsigned_abs();
            let num = self.pow(&self.conj(gen_order), k);
            let den = num_traits::pow(BigInt::from(norm_p), (order * k) as usize);
            (num, den)
        }
    }
}

impl fmt::Display for QuadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt(-{}))", self.c)
    }
}

/// Hermite normal form `(A, B, C)` of the lattice spanned by `rows`:
/// basis `{(A, 0), (B, C)}` with `C > 0`, `0 <= B < A`.
fn hnf2(rows: &[(BigInt, BigInt)]) -> (BigInt, BigInt, BigInt) {
    let mut big_a = BigInt::zero();
    let mut row: Option<(BigInt, BigInt)> = None;
    for (x, y) in rows {
        if y.is_zero() {
            big_a = big_a.gcd(x);
            continue;
        }
        match row.take() {
            None => {
                row = Some(if y.is_negative() { (-x, -y) } else { (x.clone(), y.clone()) });
            }
            Some((bx, by)) => {
                let eg = by.extended_gcd(y);
                let g = eg.gcd.clone();
                let new = (&eg.x * &bx + &eg.y * x, g.clone());
                let left = (y / &g) * &bx - (&by / &g) * x;
                big_a = big_a.gcd(&left);
                row = Some(if new.1.is_negative() { (-new.0, -new.1) } else { new });
            }
        }
    }
    let (bx, by) = row.expect("rank-2 lattice");
    let bx = if big_a.is_zero() { bx } else { bx.mod_floor(&big_a) };
    (big_a, bx, by)
}

/// `a + b*w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadInt {
    pub a: BigInt,
    pub b: BigInt,
}

impl QuadInt {
    pub fn new(a: i64, b: i64) -> Self {
        QuadInt { a: a.into(), b: b.into() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn scale(&self, k: &BigInt) -> QuadInt {
        QuadInt { a: &self.a * k, b: &self.b * k }
    }

    pub fn neg(&self) -> QuadInt {
        QuadInt { a: -&self.a, b: -&self.b }
    }

    pub fn content(&self) -> BigInt {
        self.a.gcd(&self.b)
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_negative() {
            write!(f, "{} - {}*w", self.a, -&self.b)
        } else {
            write!(f, "{} + {}*w", self.a, self.b)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadIdeal {
    pub content: BigInt,
    pub a: BigInt,
    pub b: BigInt,
}

impl QuadIdeal {
    fn normalised(content: BigInt, a: BigInt, b: BigInt) -> Self {
        let two_a = &a * 2;
        let mut b = b.mod_floor(&two_a);
        if b > a {
            b -= &two_a;
        }
        QuadIdeal { content, a, b }
    }

    pub fn norm(&self) -> BigInt {
        &self.content * &self.content * &self.a
    }

    /// Constant term of the second HNF generator of the primitive part.
    fn hnf_offset(&self, t: i64) -> BigInt {
        let off: BigInt = -(&self.b + BigInt::from(t)) / 2;
        off.mod_floor(&self.a)
    }
}

impl fmt::Display for QuadIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.content.is_one() {
            write!(f, "({}, (-{} + sqrt(D))/2)", self.a, self.b)
        } else {
            write!(f, "{}*({}, (-{} + sqrt(D))/2)", self.content, self.a, self.b)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeSplitting {
    Split(QuadIdeal, QuadIdeal),
    Inert(QuadIdeal),
    Ramified(QuadIdeal),
}

impl PrimeSplitting {
    /// (residual degree f, ramification index D).
    pub fn degrees(&self) -> (u32, u32) {
        match self {
            PrimeSplitting::Split(..) => (1, 1),
            PrimeSplitting::Inert(_) => (2, 1),
            PrimeSplitting::Ramified(_) => (1, 2),
        }
    }

    /// The canonical prime above `r`.
    pub fn first(&self) -> &QuadIdeal {
        match self {
            PrimeSplitting::Split(p, _) | PrimeSplitting::Inert(p) | PrimeSplitting::Ramified(p) => p,
        }
    }
}

/// Positive definite binary quadratic form `a x^2 + b xy + c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Form {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Form {
    pub fn new(a: i64, b: i64, disc: i64) -> Form {
        let num = b as i128 * b as i128 - disc as i128;
        debug_assert_eq!(num % (4 * a as i128), 0);
        Form { a, b, c: (num / (4 * a as i128)) as i64 }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn identity(disc: i64) -> Form {
        Form::new(1, disc.rem_euclid(2), disc)
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    pub fn reduced(self) -> Form {
        let d = self.disc() as i128;
        let (mut a, mut b) = (self.a as i128, self.b as i128);
        let c = loop {
            let two_a = 2 * a;
            let mut r = b.rem_euclid(two_a);
            if r > a {
                r -= two_a;
            }
            b = r;
            let c = (b * b - d) / (4 * a);
            if a > c {
                (a, b) = (c, -b);
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            break c;
        };
        Form { a: a as i64, b: b as i64, c: c as i64 }
    }

    /// Gauss composition (Cohen, Algorithm 5.4.7), unreduced.
    pub fn compose(&self, other: &Form) -> Form {
        let (mut f1, mut f2) = (*self, *other);
        if f1.a > f2.a {
            std::mem::swap(&mut f1, &mut f2);
        }
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0, a1)
        } else {
            let (g, u, _) = ext_gcd(a2, a1);
            (u, g)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0, -1, d)
        } else {
            let (g, u, v) = ext_gcd(s, d);
            (u, -v, g)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let disc = b1 * b1 - 4 * a1 * f1.c as i128;
        let c3 = (b3 * b3 - disc) / (4 * a3);
        Form { a: a3 as i64, b: b3 as i64, c: c3 as i64 }
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// All reduced primitive forms of discriminant `disc`.
pub fn reduced_forms(disc: i64) -> Vec<Form> {
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -disc {
        for b in -a + 1..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = Form { a, b, c };
            if c >= a && f.is_reduced() && a.gcd(&b).gcd(&c) == 1 {
                out.push(f);
            }
        }
        a += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distinguished {
    pub s: u64,
    pub delta: QuadInt,
    pub beta_num: QuadInt,
    pub beta_den: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroupData {
    pub field: QuadField,
    pub h: u64,
    pub reduced_forms: Vec<Form>,
    /// Order of the class of the prime above 2, when 2 splits.
    pub p2_order: Option<u64>,
    pub p2_is_generator: bool,
    pub distinguished: Option<Distinguished>,
}

pub fn class_group(field: QuadField) -> ClassGroupData {
    let forms = reduced_forms(field.disc);
    let h = forms.len() as u64;
    let (p2_order, distinguished) = match field.p2() {
        Ok(p2) => (Some(field.class_order(&p2)), p2_distinguished_elements(field).ok()),
        Err(_) => (None, None),
    };
    ClassGroupData {
        field,
        h,
        reduced_forms: forms,
        p2_order,
        p2_is_generator: p2_order == Some(h),
        distinguished,
    }
}

/// `s` least with `p2^(2s)` principal, its generator `delta`, and
/// `beta = delta / conj(delta)`.
pub fn p2_distinguished_elements(field: QuadField) -> Result<Distinguished> {
    let p2 = field.p2()?;
    let order = field.class_order(&p2);
    let s = if order.is_multiple_of(2) { order / 2 } else { order };
    let ideal = field.ideal_pow(&p2, 2 * s);
    let delta = field.is_principal_with_generator(&ideal).expect("principal power");
    let sq = field.mul(&delta, &delta);
    let den = field.norm(&delta);
    let g = sq.content().gcd(&den);
    Ok(Distinguished {
        s,
        beta_num: QuadInt { a: &sq.a / &g, b: &sq.b / &g },
        beta_den: den / g,
        delta,
    })
}

/// The ideal `q` of the descent: product over primes `r | c1` of the
/// canonical prime above `r`.
pub fn c1_ideal(field: QuadField, c1: u64) -> Result<QuadIdeal> {
    let mut acc = field.unit_ideal();
    for (r, _) in factor_u64(c1) {
        let pr = field.split_prime(r)?;
        acc = field.ideal_mul(&acc, pr.first());
    }
    Ok(acc)
}

/// Generators attached to the prime above 2 and the `c1`-part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBase {
    pub field: QuadField,
    pub h: u64,
    /// least `j` with `q p2^j` principal
    pub j: u64,
    /// generator of `q p2^j`
    pub omega: QuadInt,
    /// generator of `p2^h`
    pub delta: QuadInt,
}

impl FactorBase {
    pub fn new(field: QuadField, c1: u64) -> Result<Self> {
        let cg = class_group(field);
        if !cg.p2_is_generator {
            return precondition(format!("the prime above 2 does not generate the class group of {field}"));
        }
        let h = cg.h;
        let p2 = field.p2()?;
        let q = c1_ideal(field, c1)?;
        let mut ideal = q;
        let mut found = None;
        for j in 0..h {
            if field.is_principal(&ideal) {
                found = Some((j, field.is_principal_with_generator(&ideal).expect("principal")));
                break;
            }
            ideal = field.ideal_mul(&ideal, &p2);
        }
        let (j, omega) = found.expect("p2 generates");
        let delta = field
            .is_principal_with_generator(&field.ideal_pow(&p2, h))
            .expect("p2^h principal");
        Ok(FactorBase { field, h, j, omega, delta })
    }

    /// Generator of `q * p2^e` for `e = j (mod h)`, as (numerator, denominator).
    pub fn q_p2_power_generator(&self, e: i64) -> Option<(QuadInt, BigInt)> {
        let shift = e - self.j as i64;
        if shift.rem_euclid(self.h as i64) != 0 {
            return None;
        }
        let (num, den) = self.field.prime_power_generator(&self.delta, self.h, 2, shift);
        Some((self.field.mul(&self.omega, &num), den))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementFactorisation {
    pub j: u64,
    pub i: u64,
    pub n_star: i64,
    pub omega: QuadInt,
    pub delta: QuadInt,
}

/// Indices and generators used by the large-exponent sieve.
pub fn element_factorisation_data(field: QuadField, c1: u64, p: u64) -> Result<ElementFactorisation> {
    let fb = FactorBase::new(field, c1)?;
    let h = fb.h;
    if p.is_multiple_of(h) && h > 1 {
        return precondition(format!("p = {p} divides the class number {h}"));
    }
    let target = (-2 - fb.j as i64).rem_euclid(h as i64) as u64;
    let i = (0..h).find(|&i| (p % h) * i % h == target).expect("p invertible mod h");
    let num = -2 - fb.j as i64 - (p as i64) * i as i64;
    Ok(ElementFactorisation { j: fb.j, i, n_star: num / h as i64, omega: fb.omega, delta: fb.delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_class_number(disc: i64) -> usize {
        let mut count = 0;
        for a in (1..).take_while(|a| a * a <= -disc) {
            for b in -a..=a {
                let num = b * b - disc;
                if num % (4 * a) != 0 {
                    continue;
                }
                let c = num / (4 * a);
                if c < a || a.gcd(&b).gcd(&c) != 1 {
                    continue;
                }
                if (b.abs() == a || a == c) && b < 0 {
                    continue;
                }
                count += 1;
            }
        }
        count
    }

    #[test]
    fn class_numbers() {
        for (c, h) in [(7, 1), (23, 3), (1, 1), (15, 2), (5, 2), (47, 5), (71, 7), (143, 10)] {
            let f = QuadField::new(c).unwrap();
            assert_eq!(class_group(f).h, h, "c = {c}");
        }
        for c in (1..400u64).filter(|&c| arith::is_squarefree(c)) {
            let f = QuadField::new(c).unwrap();
            assert_eq!(class_group(f).h as usize, brute_class_number(f.disc()), "c = {c}");
        }
        assert!(QuadField::new(12).is_err());
    }

    #[test]
    fn splitting_examples() {
        let f7 = QuadField::new(7).unwrap();
        assert!(matches!(f7.split_prime(2).unwrap(), PrimeSplitting::Split(..)));
        let r = f7.split_prime(7).unwrap();
        assert!(matches!(r, PrimeSplitting::Ramified(_)));
        assert_eq!(r.degrees(), (1, 2));
        // -5 = 1 (mod 3) is a square, so 3 splits in Q(sqrt(-5)); 11 is inert
        let f5 = QuadField::new(5).unwrap();
        assert!(matches!(f5.split_prime(3).unwrap(), PrimeSplitting::Split(..)));
        let s = f5.split_prime(11).unwrap();
        assert!(matches!(s, PrimeSplitting::Inert(_)));
        assert_eq!(s.first().norm(), BigInt::from(121));
    }

    #[test]
    fn principal_generators() {
        let f = QuadField::new(23).unwrap();
        let p2 = f.p2().unwrap();
        assert!(f.is_principal_with_generator(&p2).is_none());
        let cube = f.ideal_pow(&p2, 3);
        let g = f.is_principal_with_generator(&cube).unwrap();
        assert_eq!(f.norm(&g), BigInt::from(8));
        assert_eq!(f.principal_ideal(&g), cube);
        assert_eq!(f.is_principal_with_generator(&f.unit_ideal()), Some(f.one()));
    }

    fn enumerated_generator(f: &QuadField, i: &QuadIdeal) -> Option<QuadInt> {
        let mut gens: Vec<QuadInt> = f
            .elements_of_norm(&i.norm())
            .into_iter()
            .filter(|g| f.contains(i, g))
            .filter(|g| g.b.is_positive() || (g.b.is_zero() && !g.a.is_negative()))
            .collect();
        gens.sort_by(|x, y| (&x.b, &x.a).cmp(&(&y.b, &y.a)));
        gens.into_iter().next()
    }

    #[test]
    fn reduction_generator_matches_enumeration() {
        for c in [1u64, 3, 5, 7, 15, 23, 47, 119, 255] {
            let f = QuadField::new(c).unwrap();
            let forms = reduced_forms(f.disc());
            let ideals: Vec<QuadIdeal> = forms.iter().map(|x| f.form_ideal(x)).collect();
            for x in &ideals {
                for y in &ideals {
                    let mut prod = f.ideal_mul(x, y);
                    for _ in 0..3 {
                        assert_eq!(f.is_principal_with_generator(&prod), enumerated_generator(&f, &prod), "c={c} {prod}");
                        prod = f.ideal_mul(&prod, y);
                    }
                }
            }
        }
    }

    #[test]
    fn large_ideals() {
        let f = QuadField::new(7).unwrap();
        let big = f.ideal_pow(&f.p2().unwrap(), 90);
        let g = f.is_principal_with_generator(&big).unwrap();
        assert_eq!(f.norm(&g), BigInt::one() << 90);
        let f = QuadField::new(23).unwrap();
        let p2 = f.p2().unwrap();
        for e in [91u64, 92, 93] {
            let big = f.ideal_pow(&p2, e);
            assert_eq!(f.ideal_class(&big), f.ideal_class(&f.ideal_pow(&p2, e % 3)));
            assert_eq!(f.is_principal(&big), e % 3 == 0);
        }
    }

    #[test]
    fn distinguished_elements() {
        let f = QuadField::new(7).unwrap();
        let d = p2_distinguished_elements(f).unwrap();
        assert_eq!(d.s, 1);
        assert_eq!(f.norm(&d.delta), BigInt::from(4));
        let f = QuadField::new(23).unwrap();
        let d = p2_distinguished_elements(f).unwrap();
        assert_eq!(d.s, 3);
        assert_eq!(f.norm(&d.delta), BigInt::from(64));
        let nb = f.norm(&d.beta_num);
        assert_eq!(nb, &d.beta_den * &d.beta_den);
    }

    #[test]
    fn factorisation_indices() {
        let f = QuadField::new(7).unwrap();
        let e = element_factorisation_data(f, 1, 13).unwrap();
        assert_eq!((e.j, e.i, e.n_star), (0, 0, -2));
        let f = QuadField::new(23).unwrap();
        let e = element_factorisation_data(f, 1, 13).unwrap();
        assert_eq!((e.j, e.i, e.n_star), (0, 1, (-2 - 13) / 3));
        assert!(element_factorisation_data(f, 1, 3).is_err());
    }

    #[test]
    fn composition_matches_ideal_product() {
        for c in [23u64, 47, 71, 143, 159, 215, 255, 399, 437] {
            let f = QuadField::new(c).unwrap();
            let forms = reduced_forms(f.disc());
            for x in &forms {
                for y in &forms {
                    let ix = QuadIdeal::normalised(BigInt::one(), x.a.into(), x.b.into());
                    let iy = QuadIdeal::normalised(BigInt::one(), y.a.into(), y.b.into());
                    let prod = f.ideal_mul(&ix, &iy);
                    assert_eq!(f.ideal_class(&prod), x.compose(y).reduced(), "c={c} {x:?} {y:?}");
                }
            }
        }
    }
}
