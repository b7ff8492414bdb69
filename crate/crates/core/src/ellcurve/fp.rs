//! Curves over prime fields: character-sum traces, affine group law and
//! baby-step giant-step point counting.

use std::collections::HashMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};

use super::CurveQ;
use crate::arith::{jacobi_u64, reduce_big, PrimeField, Residue};
use crate::error::{precondition, Error, Result};

/// Largest ℓ for which [`CurveFp::trace_of_frobenius`] sums characters.
pub const CHAR_SUM_LIMIT: u64 = 10_000_000;

/// Above this ℓ, [`CurveFp::trace_fast`] switches to point counting by BSGS.
pub const BSGS_THRESHOLD: u64 = 1 << 12;

/// Quadratic character table of 𝔽_ℓ.
#[derive(Clone, Debug)]
pub struct SquareTable {
    modulus: u64,
    chi: Vec<i8>,
}

impl SquareTable {
    pub fn new(field: PrimeField) -> Self {
        let l = field.modulus();
        assert!(l <= 1 << 32, "square table too large");
        let mut chi = vec![-1i8; l as usize];
        chi[0] = 0;
        if l == 2 {
            chi[1] = 1;
        }
        for x in 1..=(l - 1) / 2 {
            chi[((x * x) % l) as usize] = 1;
        }
        SquareTable { modulus: l, chi }
    }

    #[inline]
    pub fn chi(&self, v: u64) -> i8 {
        self.chi[v as usize]
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Weierstrass curve over 𝔽_ℓ; may be singular until checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveFp {
    field: PrimeField,
    a: [u64; 5],
}

impl CurveFp {
    /// A curve with good reduction; singular models are rejected.
    pub fn new(field: PrimeField, a: [u64; 5]) -> Result<Self> {
        let e = Self::reduction(field, a);
        if e.is_singular() {
            return Err(Error::Singular);
        }
        Ok(e)
    }

    /// Any Weierstrass equation, singular or not.
    pub fn reduction(field: PrimeField, a: [u64; 5]) -> Self {
        let l = field.modulus();
        CurveFp { field, a: a.map(|c| c % l) }
    }

    pub fn from_residues(a: [Residue; 5]) -> Result<Self> {
        Self::new(a[0].field, a.map(|r| r.value))
    }

    /// Reduction of a rational model; fails if a denominator vanishes mod ℓ.
    pub fn reduce(e: &CurveQ, field: PrimeField) -> Result<Self> {
        let l = field.modulus();
        let mut a = [0u64; 5];
        for (out, c) in a.iter_mut().zip(e.a_invariants()) {
            *out = reduce_rational(c, field)
                .ok_or_else(|| Error::Precondition(format!("coefficient {c} has denominator divisible by {l}")))?;
        }
        Ok(Self::reduction(field, a))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn a_invariants(&self) -> [u64; 5] {
        self.a
    }

    pub fn a_residues(&self) -> [Residue; 5] {
        self.a.map(|v| Residue { value: v, field: self.field })
    }

    pub fn b_invariants(&self) -> [u64; 4] {
        let f = &self.field;
        let [a1, a2, a3, a4, a6] = self.a;
        let b2 = f.add(f.mul(a1, a1), f.mul(4 % f.modulus(), a2));
        let b4 = f.add(f.mul(a1, a3), f.mul(2 % f.modulus(), a4));
        let b6 = f.add(f.mul(a3, a3), f.mul(4 % f.modulus(), a6));
        let b8 = {
            let t1 = f.mul(f.mul(a1, a1), a6);
            let t2 = f.mul(f.mul(4 % f.modulus(), a2), a6);
            let t3 = f.mul(f.mul(a1, a3), a4);
            let t4 = f.mul(a2, f.mul(a3, a3));
            let t5 = f.mul(a4, a4);
            f.sub(f.add(f.add(t1, t2), t4), f.add(t3, t5))
        };
        [b2, b4, b6, b8]
    }

    pub fn discriminant(&self) -> u64 {
        let f = &self.field;
        let [b2, b4, b6, b8] = self.b_invariants();
        let k = |v: u64| v % f.modulus();
        let t1 = f.mul(f.mul(b2, b2), b8);
        let t2 = f.mul(k(8), f.mul(f.mul(b4, b4), b4));
        let t3 = f.mul(k(27), f.mul(b6, b6));
        let t4 = f.mul(k(9), f.mul(f.mul(b2, b4), b6));
        f.sub(t4, f.add(f.add(t1, t2), t3))
    }

    pub fn is_singular(&self) -> bool {
        self.discriminant() == 0
    }

    fn ensure_good(&self) -> Result<()> {
        if self.is_singular() {
            Err(Error::Singular)
        } else {
            Ok(())
        }
    }

    /// Completes the square: y² = x³ + (b2/4)x² + (b4/2)x + b6/4. Needs ℓ odd.
    pub fn cubic_model(&self) -> Result<CubicModel> {
        let l = self.field.modulus();
        if l == 2 {
            return precondition("completing the square needs odd characteristic");
        }
        let f = &self.field;
        let [b2, b4, b6, _] = self.b_invariants();
        let i2 = f.inv(2).unwrap();
        let i4 = f.inv(4).unwrap();
        Ok(CubicModel { field: self.field, a: f.mul(b2, i4), b: f.mul(b4, i2), c: f.mul(b6, i4) })
    }

    /// Point count by exhaustion over 𝔽_ℓ²; only sensible for tiny ℓ.
    pub fn count_points_naive(&self) -> u64 {
        let l = self.field.modulus();
        let f = &self.field;
        let [a1, a2, a3, a4, a6] = self.a;
        let mut n = 1;
        for x in 0..l {
            for y in 0..l {
                let lhs = f.add(f.mul(y, y), f.add(f.mul(f.mul(a1, x), y), f.mul(a3, y)));
                let x2 = f.mul(x, x);
                let rhs = f.add(f.add(f.mul(x2, x), f.mul(a2, x2)), f.add(f.mul(a4, x), a6));
                if lhs == rhs {
                    n += 1;
                }
            }
        }
        n
    }

    /// a_ℓ = ℓ + 1 − #E(𝔽_ℓ), by character sums for ℓ up to
    /// [`CHAR_SUM_LIMIT`] and by BSGS beyond.
    pub fn trace_of_frobenius(&self) -> Result<i64> {
        self.ensure_good()?;
        let l = self.field.modulus();
        if l <= 3 {
            return Ok(l as i64 + 1 - self.count_points_naive() as i64);
        }
        if l <= CHAR_SUM_LIMIT {
            Ok(self.cubic_model()?.trace_char_sum(None))
        } else {
            self.trace_bsgs()
        }
    }

    /// Same value as [`Self::trace_of_frobenius`], switching to BSGS early.
    pub fn trace_fast(&self) -> Result<i64> {
        self.ensure_good()?;
        let l = self.field.modulus();
        if l <= BSGS_THRESHOLD {
            self.trace_of_frobenius()
        } else {
            self.trace_bsgs()
        }
    }

    /// Trace by Mestre's baby-step giant-step method on E and its twist.
    pub fn trace_bsgs(&self) -> Result<i64> {
        self.ensure_good()?;
        let l = self.field.modulus();
        if l <= 3 {
            return self.trace_of_frobenius();
        }
        let cm = self.cubic_model()?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6d65_7374 ^ l);
        let n = cm.count_points_bsgs(&mut rng)?;
        Ok(l as i64 + 1 - n as i64)
    }

    /// Whether all three 2-torsion points are rational. Requires at least one
    /// rational 2-torsion point, in which case the answer is whether Δ is a
    /// square.
    pub fn has_full_two_torsion(&self) -> Result<bool> {
        self.ensure_good()?;
        let cm = self.cubic_model()?;
        if cm.two_torsion_count() == 0 {
            return precondition("curve has no rational 2-torsion point");
        }
        Ok(jacobi_u64(self.discriminant(), self.field.modulus()) == 1)
    }
}

/// Reduces a rational number mod ℓ, or `None` if its denominator vanishes.
pub fn reduce_rational(c: &BigRational, field: PrimeField) -> Option<u64> {
    let l = field.modulus();
    let num = reduce_big(c.numer(), l);
    let den = field.inv(reduce_big(c.denom(), l))?;
    Some(field.mul(num, den))
}

/// The model y² = x³ + a·x² + b·x + c over 𝔽_ℓ, ℓ odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CubicModel {
    pub field: PrimeField,
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine(u64, u64),
}

impl CubicModel {
    pub fn new(field: PrimeField, a: u64, b: u64, c: u64) -> Self {
        let l = field.modulus();
        CubicModel { field, a: a % l, b: b % l, c: c % l }
    }

    #[inline]
    pub fn rhs(&self, x: u64) -> u64 {
        let f = &self.field;
        let t = f.add(f.mul(f.add(x, self.a), x), self.b);
        f.add(f.mul(t, x), self.c)
    }

    /// Discriminant of the cubic; zero means singular.
    pub fn cubic_discriminant(&self) -> u64 {
        let f = &self.field;
        let (a, b, c) = (self.a, self.b, self.c);
        let k = |v: u64| v % f.modulus();
        let t1 = f.mul(f.mul(a, a), f.mul(b, b));
        let t2 = f.mul(k(4), f.mul(f.mul(b, b), b));
        let t3 = f.mul(k(4), f.mul(f.mul(f.mul(a, a), a), c));
        let t4 = f.mul(k(27), f.mul(c, c));
        let t5 = f.mul(k(18), f.mul(f.mul(a, b), c));
        f.sub(f.add(t1, t5), f.add(f.add(t2, t3), t4))
    }

    /// Quadratic twist by `d` (a non-residue gives the nontrivial twist).
    pub fn twist(&self, d: u64) -> Self {
        let f = &self.field;
        let d2 = f.mul(d, d);
        CubicModel { field: self.field, a: f.mul(d, self.a), b: f.mul(d2, self.b), c: f.mul(f.mul(d2, d), self.c) }
    }

    /// −Σ χ(x³ + ax² + bx + c), evaluated with finite differences.
    pub fn trace_char_sum(&self, table: Option<&SquareTable>) -> i64 {
        let f = &self.field;
        let l = f.modulus();
        let mut v = self.c;
        // Forward differences of the cubic at x = 0.
        let mut d1 = f.add(f.add(1, self.a), self.b);
        let mut d2 = f.add(6 % l, f.mul(2 % l, self.a));
        let d3 = 6 % l;
        let mut sum: i64 = 0;
        for _ in 0..l {
            sum += match table {
                Some(t) => t.chi(v) as i64,
                None => jacobi_u64(v, l) as i64,
            };
            v = f.add(v, d1);
            d1 = f.add(d1, d2);
            d2 = f.add(d2, d3);
        }
        -sum
    }

    /// Number of rational roots of the cubic, via gcd(x^ℓ − x, f).
    pub fn two_torsion_count(&self) -> usize {
        let f = self.field;
        let l = f.modulus();
        // Arithmetic in 𝔽_ℓ[x]/(x³ + ax² + bx + c), elements as [c0, c1, c2].
        let mulred = |u: [u64; 3], w: [u64; 3]| -> [u64; 3] {
            let mut prod = [0u64; 5];
            for i in 0..3 {
                for j in 0..3 {
                    prod[i + j] = f.add(prod[i + j], f.mul(u[i], w[j]));
                }
            }
            for k in (3..5).rev() {
                let top = prod[k];
                prod[k] = 0;
                prod[k - 1] = f.sub(prod[k - 1], f.mul(top, self.a));
                prod[k - 2] = f.sub(prod[k - 2], f.mul(top, self.b));
                prod[k - 3] = f.sub(prod[k - 3], f.mul(top, self.c));
            }
            [prod[0], prod[1], prod[2]]
        };
        let mut result = [1, 0, 0];
        let mut base = [0, 1, 0];
        let mut e = l;
        while e > 0 {
            if e & 1 == 1 {
                result = mulred(result, base);
            }
            base = mulred(base, base);
            e >>= 1;
        }
        // g = x^ℓ − x mod f.
        let g = vec![result[0], f.sub(result[1], 1), result[2]];
        let fpoly = vec![self.c, self.b, self.a, 1];
        poly_gcd_degree(fpoly, g, f)
    }

    pub fn is_on_curve(&self, p: Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine(x, y) => self.field.mul(y, y) == self.rhs(x),
        }
    }

    pub fn neg(&self, p: Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x, self.field.neg(y)),
        }
    }

    pub fn add(&self, p: Point, q: Point) -> Point {
        let f = &self.field;
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q,
            (_, Point::Infinity) => return p,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if f.add(y1, y2) == 0 {
                return Point::Infinity;
            }
            let num = f.add(f.add(f.mul(3, f.mul(x1, x1)), f.mul(f.add(self.a, self.a), x1)), self.b);
            f.mul(num, f.inv(f.add(y1, y1)).unwrap())
        } else {
            f.mul(f.sub(y2, y1), f.inv(f.sub(x2, x1)).unwrap())
        };
        let x3 = f.sub(f.sub(f.sub(f.mul(lambda, lambda), self.a), x1), x2);
        let y3 = f.sub(f.mul(lambda, f.sub(x1, x3)), y1);
        Point::Affine(x3, y3)
    }

    pub fn mul(&self, p: Point, mut k: u64) -> Point {
        let mut acc = Point::Infinity;
        let mut base = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Point {
        let l = self.field.modulus();
        loop {
            let x = rng.gen_range(0..l);
            let v = self.rhs(x);
            if v == 0 {
                return Point::Affine(x, 0);
            }
            if let Some(y) = self.field.sqrt(v) {
                let y = if rng.gen::<bool>() { y } else { self.field.neg(y) };
                return Point::Affine(x, y);
            }
        }
    }

    /// The integers N in [lo, hi] with N·P = O.
    pub fn annihilators_in(&self, p: Point, lo: u64, hi: u64) -> Vec<u64> {
        if p == Point::Infinity {
            return (lo..=hi).collect();
        }
        let width = hi - lo;
        let m = ((width as f64).sqrt() as u64) + 1;
        let mut baby: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
        let mut jp = Point::Infinity;
        for j in 1..=m {
            jp = self.add(jp, p);
            match jp {
                Point::Affine(x, y) => baby.entry(x).or_default().push((j, y)),
                // order j: the annihilators are its multiples
                Point::Infinity => return (lo.div_ceil(j) * j..=hi).step_by(j as usize).collect(),
            }
        }
        let giant = self.mul(p, m);
        let mut r = self.mul(p, lo);
        let mut out = Vec::new();
        let mut n0 = lo;
        while n0 <= hi + m {
            match r {
                Point::Infinity => out.push(n0),
                Point::Affine(x, y) => {
                    if let Some(list) = baby.get(&x) {
                        for &(j, yj) in list {
                            // R = jP gives (n0 − j)P = O; R = −jP gives (n0 + j)P = O.
                            if yj == y && n0 >= j {
                                out.push(n0 - j);
                            }
                            if self.field.add(yj, y) == 0 {
                                out.push(n0 + j);
                            }
                        }
                    }
                }
            }
            r = self.add(r, giant);
            n0 += m;
        }
        out.retain(|&n| n >= lo && n <= hi);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Hasse interval [ℓ + 1 − ⌊2√ℓ⌋, ℓ + 1 + ⌊2√ℓ⌋].
    pub fn hasse_interval(&self) -> (u64, u64) {
        let l = self.field.modulus();
        let mut s = (4.0 * l as f64).sqrt() as u64;
        while s * s > 4 * l {
            s -= 1;
        }
        while (s + 1) * (s + 1) <= 4 * l {
            s += 1;
        }
        (l + 1 - s, l + 1 + s)
    }

    /// #E(𝔽_ℓ), intersecting candidate orders from random points on the
    /// curve and on its quadratic twist until one remains.
    pub fn count_points_bsgs<R: Rng>(&self, rng: &mut R) -> Result<u64> {
        let f = self.field;
        let l = f.modulus();
        if self.cubic_discriminant() == 0 {
            return Err(Error::Singular);
        }
        if l < 7 {
            return Ok((l as i64 + 1 - self.trace_char_sum(None)) as u64);
        }
        let nonres = (2..l).find(|&d| f.legendre(d) == -1).unwrap();
        let twist = self.twist(nonres);
        let (lo, hi) = self.hasse_interval();
        let mut cands: Option<Vec<u64>> = None;
        for round in 0..200 {
            let set: Vec<u64> = if round % 2 == 0 {
                let p = self.random_point(rng);
                self.annihilators_in(p, lo, hi)
            } else {
                let p = twist.random_point(rng);
                let mut v: Vec<u64> = twist
                    .annihilators_in(p, 2 * l + 2 - hi, 2 * l + 2 - lo)
                    .into_iter()
                    .map(|n| 2 * l + 2 - n)
                    .collect();
                v.sort_unstable();
                v
            };
            if set.len() > 64 {
                continue;
            }
            let next: Vec<u64> = match cands {
                None => set,
                Some(c) => c.into_iter().filter(|n| set.binary_search(n).is_ok()).collect(),
            };
            match next.len() {
                0 => return Err(Error::Computation(format!("no consistent group order mod {l}"))),
                1 => return Ok(next[0]),
                _ => cands = Some(next),
            }
        }
        Err(Error::Computation(format!("point counting mod {l} did not converge")))
    }
}

/// Degree of gcd(u, v) in 𝔽_ℓ[x]; coefficient vectors are little-endian.
fn poly_gcd_degree(mut u: Vec<u64>, mut v: Vec<u64>, f: PrimeField) -> usize {
    let trim = |p: &mut Vec<u64>| {
        while p.last() == Some(&0) {
            p.pop();
        }
    };
    trim(&mut u);
    trim(&mut v);
    while !v.is_empty() {
        // u mod v
        let lead_inv = f.inv(*v.last().unwrap()).unwrap();
        while u.len() >= v.len() {
            let shift = u.len() - v.len();
            let coef = f.mul(*u.last().unwrap(), lead_inv);
            for (i, &c) in v.iter().enumerate() {
                u[i + shift] = f.sub(u[i + shift], f.mul(coef, c));
            }
            trim(&mut u);
            if u.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut u, &mut v);
    }
    u.len().saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest};
    use rand_chacha::ChaCha8Rng;

    fn field(l: u64) -> PrimeField {
        PrimeField::new(l).unwrap()
    }

    #[test]
    fn small_traces() {
        let e = CurveFp::new(field(5), [0, 0, 0, 1, 0]).unwrap();
        assert_eq!(e.trace_of_frobenius().unwrap(), 2);
        assert_eq!(e.count_points_naive(), 4);
        let e14 = CurveQ::from_ints([1, 0, 1, 4, -6]).unwrap();
        let e = CurveFp::reduce(&e14, field(3)).unwrap();
        assert_eq!(e.trace_of_frobenius().unwrap(), -2);
        assert_eq!(CurveFp::new(field(7), [0, 0, 0, 0, 0]), Err(Error::Singular));
    }

    #[test]
    fn two_torsion_examples() {
        // y² = x(x+1)(x+2) = x³ + 3x² + 2x
        let e = CurveFp::new(field(7), [0, 3, 0, 2, 0]).unwrap();
        assert!(e.has_full_two_torsion().unwrap());
        // y² = x³ + x² + x
        let e = CurveFp::new(field(5), [0, 1, 0, 1, 0]).unwrap();
        assert!(!e.has_full_two_torsion().unwrap());
        // x³ + 3 has no roots mod 7.
        let e = CurveFp::new(field(7), [0, 0, 0, 0, 3]).unwrap();
        assert_eq!(e.cubic_model().unwrap().two_torsion_count(), 0);
        assert!(e.has_full_two_torsion().is_err());
    }

    #[test]
    fn full_two_torsion_matches_root_count() {
        for l in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
            let f = field(l);
            for a2 in 0..l.min(12) {
                for a4 in 0..l.min(12) {
                    for a6 in 0..l.min(6) {
                        let Ok(e) = CurveFp::new(f, [0, a2, 0, a4, a6]) else { continue };
                        let roots = (0..l).filter(|&x| e.cubic_model().unwrap().rhs(x) == 0).count();
                        assert_eq!(e.cubic_model().unwrap().two_torsion_count(), roots);
                        if roots > 0 {
                            assert_eq!(e.has_full_two_torsion().unwrap(), roots == 3);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bsgs_matches_char_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for l in [10007u64, 65537, 1_000_003] {
            let f = field(l);
            for _ in 0..5 {
                let a = [0u64; 5].map(|_| rng.gen_range(0..l));
                let Ok(e) = CurveFp::new(f, a) else { continue };
                assert_eq!(e.trace_bsgs().unwrap(), e.trace_of_frobenius().unwrap());
            }
        }
    }

    #[test]
    fn bsgs_on_two_torsion_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for l in [5987u64, 4099, 7919] {
            let f = field(l);
            for _ in 0..1500 {
                let a = rng.gen_range(0..l);
                let b = rng.gen_range(1..l);
                let cm = CubicModel::new(f, a, b, 0);
                if cm.cubic_discriminant() == 0 { continue; }
                let mut r2 = ChaCha8Rng::seed_from_u64(rng.gen());
                match cm.count_points_bsgs(&mut r2) {
                    Ok(n) => assert_eq!(n as i64, l as i64 + 1 - cm.trace_char_sum(None), "l={l} a={a} b={b}"),
                    Err(e) => panic!("l={l} a={a} b={b}: {e} true={}", l as i64 + 1 - cm.trace_char_sum(None)),
                }
            }
        }
    }

    #[test]
    fn bsgs_large_prime() {
        let l = 2_147_483_647u64;
        let e = CurveFp::new(field(l), [1, 2, 3, 4, 5]).unwrap();
        let a = e.trace_of_frobenius().unwrap();
        assert!((a as f64).abs() < 2.0 * (l as f64).sqrt());
        let cm = e.cubic_model().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = (l as i64 + 1 - a) as u64;
        for _ in 0..5 {
            let p = cm.random_point(&mut rng);
            assert_eq!(cm.mul(p, n), Point::Infinity);
        }
    }

    #[test]
    fn group_law() {
        let cm = CurveFp::new(field(101), [1, 2, 3, 4, 5]).unwrap().cubic_model().unwrap();
        let n = (102 - cm.trace_char_sum(None)) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = cm.random_point(&mut rng);
            let q = cm.random_point(&mut rng);
            assert!(cm.is_on_curve(cm.add(p, q)));
            assert_eq!(cm.add(p, q), cm.add(q, p));
            assert_eq!(cm.mul(p, n), Point::Infinity);
            assert_eq!(cm.add(p, cm.neg(p)), Point::Infinity);
        }
    }

    proptest! {
        #[test]
        fn hasse_and_twist(l_idx in 0usize..12, a in prop::array::uniform5(0u64..1000)) {
            let primes = [5u64, 7, 11, 13, 101, 211, 499, 997, 1009, 2003, 4001, 7919];
            let l = primes[l_idx];
            let f = field(l);
            if let Ok(e) = CurveFp::new(f, a) {
                let t = e.trace_of_frobenius().unwrap();
                prop_assert!(((t * t) as u64) < 4 * l);
                let cm = e.cubic_model().unwrap();
                let d = (2..l).find(|&d| f.legendre(d) == -1).unwrap();
                prop_assert_eq!(cm.twist(d).trace_char_sum(None), -t);
                let table = SquareTable::new(f);
                prop_assert_eq!(cm.trace_char_sum(Some(&table)), t);
                if l < 30 {
                    prop_assert_eq!(t, l as i64 + 1 - e.count_points_naive() as i64);
                }
            }
        }
    }
}
