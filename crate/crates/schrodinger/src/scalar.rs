//! Exact arithmetic over the tower Q(i)(s) with the single relation s^2 = zdot.
//!
//! Every coefficient in the library is a [`Scalar`]: an element
//! `c0 + c1*i + c2*s + c3*i*s` with arbitrary-precision rational parts.
//! When `zdot` happens to be a perfect square in Q(i) the tower collapses and
//! `s` is replaced by a concrete root, so downstream linear algebra always
//! runs over a field.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// A Gaussian rational `re + im*i`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Qi {
    pub re: BigRational,
    pub im: BigRational,
}

impl Qi {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Qi { re, im }
    }

    pub fn zero() -> Self {
        Qi::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Qi::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        Qi::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Qi::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Qi::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, other: &Qi) -> Qi {
        Qi::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn sub(&self, other: &Qi) -> Qi {
        Qi::new(&self.re - &other.re, &self.im - &other.im)
    }

    pub fn neg(&self) -> Qi {
        Qi::new(-self.re.clone(), -self.im.clone())
    }

    pub fn mul(&self, other: &Qi) -> Qi {
        Qi::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    /// Norm `re^2 + im^2` (a nonnegative rational).
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Qi, Error> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Qi::new(&self.re / &n, -&self.im / &n))
    }

    /// A square root in Q(i), if one exists.
    pub fn sqrt(&self) -> Option<Qi> {
        if self.is_zero() {
            return Some(Qi::zero());
        }
        if self.im.is_zero() {
            let p = &self.re;
            return if p.is_negative() {
                rational_sqrt(&-p.clone()).map(|r| Qi::new(BigRational::zero(), r))
            } else {
                rational_sqrt(p).map(|r| Qi::new(r, BigRational::zero()))
            };
        }
        // (x + yi)^2 = p + qi needs x^2 = (p + N)/2 with N = |p + qi|.
        let norm_sqrt = rational_sqrt(&self.norm())?;
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let x2 = (&self.re + &norm_sqrt) * &half;
        let x = rational_sqrt(&x2)?;
        if x.is_zero() {
            return None;
        }
        let y = &self.im / (&x * BigRational::from_integer(BigInt::from(2)));
        Some(Qi::new(x, y))
    }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer();
    let den = r.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

impl fmt::Display for Qi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Scalar::from_qi(self.clone()))
    }
}

/// The quadratic layer: `s^2 = zdot`, with `root` present exactly when `zdot`
/// is a perfect square in Q(i) (then every `s` is folded to `root`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tower {
    zdot: Qi,
    root: Option<Qi>,
}

impl Tower {
    /// Build the tower from the central charge `zdot`.
    pub fn from_zdot(zdot: Qi) -> Arc<Tower> {
        let root = zdot.sqrt();
        Arc::new(Tower { zdot, root })
    }

    /// Build the tower from an explicit branch `s`; then `zdot = s^2`.
    pub fn from_s(s: Qi) -> Arc<Tower> {
        let zdot = s.mul(&s);
        Arc::new(Tower { zdot, root: Some(s) })
    }

    pub fn zdot(&self) -> &Qi {
        &self.zdot
    }

    pub fn root(&self) -> Option<&Qi> {
        self.root.as_ref()
    }
}

/// An element `a + b*s` of Q(i)[s]/(s^2 - zdot), normal form with s-degree <= 1.
///
/// The tower pointer is dropped whenever the s-part vanishes, so plain
/// rational constants mix freely with scalars from any run.
#[derive(Clone, Debug)]
pub struct Scalar {
    a: Qi,
    b: Qi,
    tower: Option<Arc<Tower>>,
}

impl Scalar {
    fn normalize(mut self) -> Self {
        if let Some(t) = &self.tower {
            if let Some(r) = t.root() {
                if !self.b.is_zero() {
                    self.a = self.a.add(&self.b.mul(r));
                    self.b = Qi::zero();
                }
            }
        }
        if self.b.is_zero() {
            self.tower = None;
        }
        self
    }

    pub fn from_qi(a: Qi) -> Self {
        Scalar { a, b: Qi::zero(), tower: None }
    }

    pub fn zero() -> Self {
        Scalar::from_qi(Qi::zero())
    }

    pub fn one() -> Self {
        Scalar::from_qi(Qi::one())
    }

    pub fn i() -> Self {
        Scalar::from_qi(Qi::i())
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::from_qi(Qi::from_int(v))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::from_qi(Qi::from_ratio(num, den))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::from_qi(Qi::new(r, BigRational::zero()))
    }

    /// The generator `s` of the tower (folded to the concrete root if any).
    pub fn s(tower: &Arc<Tower>) -> Self {
        Scalar { a: Qi::zero(), b: Qi::one(), tower: Some(tower.clone()) }
            .normalize()
    }

    /// The central charge `zdot = s^2` as a scalar.
    pub fn zdot(tower: &Arc<Tower>) -> Self {
        Scalar::from_qi(tower.zdot().clone())
    }

    pub fn parts(&self) -> (&Qi, &Qi) {
        (&self.a, &self.b)
    }

    /// The four rational coordinates `(c0, c1, c2, c3)`.
    pub fn coords(&self) -> [BigRational; 4] {
        [
            self.a.re.clone(),
            self.a.im.clone(),
            self.b.re.clone(),
            self.b.im.clone(),
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.b.is_zero() && self.a == Qi::one()
    }

    /// The Q(i) part, failing when an s-component is present.
    pub fn as_qi(&self) -> Result<&Qi, Error> {
        if self.b.is_zero() {
            Ok(&self.a)
        } else {
            Err(Error::NotRational(self.to_string()))
        }
    }

    fn merged_tower(&self, other: &Scalar) -> Option<Arc<Tower>> {
        match (&self.tower, &other.tower) {
            (None, None) => None,
            (Some(t), None) | (None, Some(t)) => Some(t.clone()),
            (Some(t1), Some(t2)) => {
                assert!(
                    t1.zdot() == t2.zdot(),
                    "scalars from different towers: s^2={} vs s^2={}",
                    t1.zdot(),
                    t2.zdot()
                );
                Some(t1.clone())
            }
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        Scalar {
            a: self.a.add(&other.a),
            b: self.b.add(&other.b),
            tower: self.merged_tower(other),
        }
        .normalize()
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        Scalar { a: self.a.neg(), b: self.b.neg(), tower: self.tower.clone() }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let tower = self.merged_tower(other);
        // (a1 + b1 s)(a2 + b2 s) = a1 a2 + b1 b2 zdot + (a1 b2 + b1 a2) s
        let mut a = self.a.mul(&other.a);
        let cross = self.b.mul(&other.b);
        if !cross.is_zero() {
            let t = tower.as_ref().expect("s-part without tower");
            a = a.add(&cross.mul(t.zdot()));
        }
        let b = self.a.mul(&other.b).add(&self.b.mul(&other.a));
        Scalar { a, b, tower }.normalize()
    }

    pub fn inv(&self) -> Result<Scalar, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.b.is_zero() {
            return Ok(Scalar::from_qi(self.a.inv()?));
        }
        let tower = self.tower.as_ref().expect("s-part without tower");
        // (a + bs)^(-1) = (a - bs) / (a^2 - b^2 zdot)
        let denom = self.a.mul(&self.a).sub(&self.b.mul(&self.b).mul(tower.zdot()));
        if denom.is_zero() {
            // Only possible when zdot is a square; but then the s-part has
            // already been folded away. Flag rather than divide wrongly.
            return Err(Error::NotInvertible(self.to_string()));
        }
        let d = denom.inv()?;
        Ok(Scalar {
            a: self.a.mul(&d),
            b: self.b.neg().mul(&d),
            tower: Some(tower.clone()),
        }
        .normalize())
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, Error> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, exp: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    /// Scale by a small rational, a common case in structure constants.
    pub fn scale_int(&self, k: i64) -> Scalar {
        self.mul(&Scalar::from_int(k))
    }

    /// Falling factorial `x(x-1)...(x-j+1)`.
    pub fn falling(&self, j: u32) -> Scalar {
        let mut acc = Scalar::one();
        for step in 0..j {
            acc = acc.mul(&self.sub(&Scalar::from_int(step as i64)));
        }
        acc
    }

    /// Generalized binomial `binom(x, j) = x(x-1)...(x-j+1)/j!`.
    pub fn binom(&self, j: u32) -> Scalar {
        let mut fact = BigRational::one();
        for step in 1..=j {
            fact *= BigRational::from_integer(BigInt::from(step));
        }
        self.falling(j)
            .mul(&Scalar::from_rational(fact.recip()))
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}

impl Eq for Scalar {}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    /// Textual form `c0 + c1*I + c2*S + c3*I*S` with exact fractions.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords = self.coords();
        let names = ["", "I", "S", "I*S"];
        let mut first = true;
        for (c, name) in coords.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = if name.is_empty() {
                fmt_rational(&mag)
            } else if mag.is_one() {
                name.to_string()
            } else {
                format!("{}*{}", fmt_rational(&mag), name)
            };
            if first {
                if c.is_negative() {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Parse a scalar in the textual form `c0 + c1*I + c2*S + c3*I*S`.
///
/// Terms may appear in any order; bare `I`, `S`, `I*S`, `S*I` are accepted,
/// as are fractions `p/q`. A tower is required only when an `S` term occurs.
pub fn parse_scalar(input: &str, tower: Option<&Arc<Tower>>) -> Result<Scalar, Error> {
    let text = input.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty scalar".into()));
    }
    let mut coords = [
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    ];
    for (sign, term) in split_signed_terms(text)? {
        let mut coeff = BigRational::from_integer(BigInt::from(sign));
        let mut has_i = false;
        let mut has_s = false;
        let mut saw_number = false;
        for factor in term.split('*') {
            let factor = factor.trim();
            match factor {
                "I" | "i" => {
                    if has_i {
                        return Err(Error::Parse(format!("repeated I in '{}'", term)));
                    }
                    has_i = true;
                }
                "S" | "s" => {
                    if has_s {
                        return Err(Error::Parse(format!("repeated S in '{}'", term)));
                    }
                    has_s = true;
                }
                _ => {
                    if saw_number {
                        return Err(Error::Parse(format!("two numbers in '{}'", term)));
                    }
                    coeff *= parse_rational(factor)?;
                    saw_number = true;
                }
            }
        }
        let slot = match (has_i, has_s) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        };
        coords[slot] += coeff;
    }
    let a = Qi::new(coords[0].clone(), coords[1].clone());
    let b = Qi::new(coords[2].clone(), coords[3].clone());
    if b.is_zero() {
        return Ok(Scalar::from_qi(a));
    }
    let tower = tower.ok_or_else(|| {
        Error::Parse(format!("'{}' uses S but no tower (--s/--zdot) was given", input))
    })?;
    Ok(Scalar { a, b, tower: Some(tower.clone()) }.normalize())
}

fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n = BigInt::from_str(num)
        .map_err(|_| Error::Parse(format!("bad number '{}'", text)))?;
    let d = BigInt::from_str(den)
        .map_err(|_| Error::Parse(format!("bad number '{}'", text)))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in '{}'", text)));
    }
    Ok(BigRational::new(n, d))
}

/// Split "a + b - c" into sign/term pairs at top level.
pub(crate) fn split_signed_terms(text: &str) -> Result<Vec<(i64, String)>, Error> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut sign = 1i64;
    let mut expecting_term = true;
    for ch in text.chars() {
        match ch {
            '+' | '-' if !expecting_term => {
                out.push((sign, current.trim().to_string()));
                current = String::new();
                sign = if ch == '-' { -1 } else { 1 };
                expecting_term = true;
            }
            '-' if expecting_term && current.trim().is_empty() => {
                sign = -sign;
            }
            '+' if expecting_term && current.trim().is_empty() => {}
            _ => {
                if !ch.is_whitespace() {
                    expecting_term = false;
                }
                current.push(ch);
            }
        }
    }
    if current.trim().is_empty() {
        return Err(Error::Parse(format!("dangling sign in '{}'", text)));
    }
    out.push((sign, current.trim().to_string()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower2() -> Arc<Tower> {
        Tower::from_zdot(Qi::from_int(2))
    }

    #[test]
    fn defining_relation() {
        let t = tower2();
        let s = Scalar::s(&t);
        assert_eq!(s.mul(&s), Scalar::from_int(2));
    }

    #[test]
    fn difference_of_squares() {
        // (1 + s)(1 - s) with zdot = 2 is -1.
        let t = tower2();
        let s = Scalar::s(&t);
        let one = Scalar::one();
        assert_eq!(one.add(&s).mul(&one.sub(&s)), Scalar::from_int(-1));
    }

    #[test]
    fn inverse_of_i() {
        assert_eq!(Scalar::i().inv().unwrap(), Scalar::i().neg());
    }

    #[test]
    fn perfect_square_collapses() {
        let t = Tower::from_zdot(Qi::from_int(4));
        let s = Scalar::s(&t);
        assert_eq!(s, Scalar::from_int(2));
        let t = Tower::from_zdot(Qi::new(
            BigRational::zero(),
            BigRational::from_integer(BigInt::from(2)),
        ));
        // sqrt(2i) = 1 + i
        let s = Scalar::s(&t);
        assert_eq!(s, Scalar::one().add(&Scalar::i()));
    }

    #[test]
    fn explicit_branch() {
        let t = Tower::from_s(Qi::from_int(-3));
        assert_eq!(*t.zdot(), Qi::from_int(9));
        assert_eq!(Scalar::s(&t), Scalar::from_int(-3));
    }

    #[test]
    fn division_by_zero_flagged() {
        assert!(matches!(Scalar::zero().inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn inversion_in_tower() {
        let t = tower2();
        let x = Scalar::one().add(&Scalar::s(&t).mul(&Scalar::i()));
        let inv = x.inv().unwrap();
        assert_eq!(x.mul(&inv), Scalar::one());
    }

    #[test]
    fn display_round_trip() {
        let t = tower2();
        let x = Scalar::from_ratio(-1, 2)
            .add(&Scalar::i().scale_int(3))
            .add(&Scalar::s(&t).mul(&Scalar::from_ratio(5, 7)));
        let text = x.to_string();
        assert_eq!(text, "-1/2 + 3*I + 5/7*S");
        assert_eq!(parse_scalar(&text, Some(&t)).unwrap(), x);
    }

    #[test]
    fn binom_generalized() {
        let half = Scalar::from_ratio(1, 2);
        // binom(1/2, 2) = (1/2)(-1/2)/2 = -1/8
        assert_eq!(half.binom(2), Scalar::from_ratio(-1, 8));
        assert_eq!(half.binom(0), Scalar::one());
    }

    #[test]
    fn field_axioms_random() {
        // zdot = 2 is not a square in Q(i): the tower is a genuine field.
        use rand::{Rng, SeedableRng};
        let t = tower2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let random = |rng: &mut rand_chacha::ChaCha8Rng| {
            let coord = |rng: &mut rand_chacha::ChaCha8Rng| {
                BigRational::new(
                    BigInt::from(rng.gen_range(-6i64..=6)),
                    BigInt::from(rng.gen_range(1i64..=4)),
                )
            };
            Scalar {
                a: Qi::new(coord(rng), coord(rng)),
                b: Qi::new(coord(rng), coord(rng)),
                tower: Some(t.clone()),
            }
            .normalize()
        };
        for _ in 0..10_000 {
            let (x, y, z) = (random(&mut rng), random(&mut rng), random(&mut rng));
            assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
            assert_eq!(x.add(&y), y.add(&x));
            if !x.is_zero() {
                assert_eq!(x.mul(&x.inv().unwrap()), Scalar::one());
            }
        }
    }
}
