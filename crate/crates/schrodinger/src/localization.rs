//! Localization at f and the twist gamma_b.
//!
//! Elements of the localized enveloping algebra are kept in the normal form
//! `sum c * f^k * m` with k an integer and m an f-free PBW monomial; f is
//! Ore at negative powers through `u f^-1 = sum_j f^-(j+1) (ad f)^j(u)`,
//! a finite sum because ad f is locally nilpotent.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::lie::Generator;
use crate::linalg::Matrix;
use crate::modules::{Provenance, WeightModule};
use crate::pbw::{PBWMonomial, UEAElement};
use crate::scalar::Scalar;

/// An element of the localization U[f^-1], in f-left normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalizedElement {
    n: usize,
    terms: BTreeMap<(i64, PBWMonomial), Scalar>,
}

impl LocalizedElement {
    pub fn zero(n: usize) -> Self {
        LocalizedElement { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::f_power(0, n)
    }

    /// The monomial f^k, any integer k.
    pub fn f_power(k: i64, n: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((k, PBWMonomial::one(n)), Scalar::one());
        LocalizedElement { n, terms }
    }

    pub fn generator(g: Generator, n: usize) -> Result<Self, Error> {
        Ok(Self::from_uea(&UEAElement::generator(g, n)?))
    }

    /// Embed an enveloping algebra element, splitting off the f factor of
    /// each PBW monomial (s commutes with f, so the split is exact).
    pub fn from_uea(u: &UEAElement) -> Self {
        let n = u.n();
        let mut out = LocalizedElement::zero(n);
        for (m, c) in u.terms() {
            let k = m.exp_of(Generator::F, n) as i64;
            let stripped = m.clone().with_exp(Generator::F, n, 0);
            out.add_term(k, stripped, c.clone());
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(i64, PBWMonomial), Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: i64, m: PBWMonomial, c: Scalar) {
        debug_assert_eq!(m.exp_of(Generator::F, self.n), 0);
        let entry = self.terms.entry((k, m)).or_insert_with(Scalar::zero);
        *entry = entry.add(&c);
        if self
            .terms
            .values()
            .any(|c| c.is_zero())
        {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &LocalizedElement) -> LocalizedElement {
        let mut out = self.clone();
        for ((k, m), c) in &other.terms {
            out.add_term(*k, m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &LocalizedElement) -> LocalizedElement {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> LocalizedElement {
        if c.is_zero() {
            return LocalizedElement::zero(self.n);
        }
        LocalizedElement {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.mul(c)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &LocalizedElement) -> Result<LocalizedElement, Error> {
        if self.n != other.n {
            return Err(Error::RankMismatch { expected: self.n, got: other.n });
        }
        let n = self.n;
        let mut out = LocalizedElement::zero(n);
        for ((a, m1), c1) in &self.terms {
            let u1 = UEAElement::from_term(m1.clone(), Scalar::one(), n);
            for ((b, m2), c2) in &other.terms {
                let c = c1.mul(c2);
                let u2 = UEAElement::from_term(m2.clone(), Scalar::one(), n);
                for (k, w) in cross(&u1, *b, n)? {
                    // w is f-free; w * m2 may reintroduce f powers
                    let prod = w.mul(&u2)?;
                    for (mono, coeff) in prod.terms() {
                        let kf = mono.exp_of(Generator::F, n) as i64;
                        let stripped = mono.clone().with_exp(Generator::F, n, 0);
                        out.add_term(a + k + kf, stripped, coeff.mul(&c));
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for LocalizedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((k, m), c) in self.terms.iter().rev() {
            let text = c.to_string();
            let (neg, body) = match text.strip_prefix('-') {
                Some(stripped) if !stripped.contains('+') && !stripped.contains('-') => {
                    (true, stripped.to_string())
                }
                _ => (false, text),
            };
            let wrapped = if body.contains('+') || body.contains('-') {
                format!("({})", body)
            } else {
                body
            };
            let mut mono = String::new();
            if *k != 0 {
                mono.push_str(&if *k == 1 { "f".into() } else { format!("f^{}", k) });
            }
            let rest = m.display(self.n);
            if rest != "1" {
                if !mono.is_empty() {
                    mono.push(' ');
                }
                mono.push_str(&rest);
            }
            if mono.is_empty() {
                mono.push('1');
            }
            let piece = if mono == "1" {
                wrapped
            } else if wrapped == "1" {
                mono
            } else {
                format!("{}*{}", wrapped, mono)
            };
            if first {
                write!(f, "{}{}", if neg { "-" } else { "" }, piece)?;
                first = false;
            } else {
                write!(f, " {} {}", if neg { "-" } else { "+" }, piece)?;
            }
        }
        Ok(())
    }
}

/// ad f as a derivation of the enveloping algebra.
pub fn ad_f(u: &UEAElement) -> UEAElement {
    let n = u.n();
    let f = UEAElement::generator(Generator::F, n).expect("f exists for all n");
    f.mul(u).expect("same rank").sub(&u.mul(&f).expect("same rank"))
}

/// Rewrite `u * f^b` as `sum_k f^k * u_k` with every u_k f-free.
fn cross(u: &UEAElement, b: i64, n: usize) -> Result<Vec<(i64, UEAElement)>, Error> {
    if b >= 0 {
        let mut w = u.clone();
        if b > 0 {
            let fb = UEAElement::from_term(
                PBWMonomial::one(n).with_exp(Generator::F, n, b as u32),
                Scalar::one(),
                n,
            );
            w = w.mul(&fb)?;
        }
        let mut grouped: BTreeMap<i64, UEAElement> = BTreeMap::new();
        for (mono, c) in w.terms() {
            let k = mono.exp_of(Generator::F, n) as i64;
            let stripped = mono.clone().with_exp(Generator::F, n, 0);
            grouped
                .entry(k)
                .or_insert_with(|| UEAElement::zero(n))
                .add_term(stripped, c.clone());
        }
        return Ok(grouped.into_iter().filter(|(_, u)| !u.is_zero()).collect());
    }
    // u f^-1 = sum_j f^-(j+1) (ad f)^j(u), then recurse on f^(b+1)
    let mut out: BTreeMap<i64, UEAElement> = BTreeMap::new();
    let mut v = u.clone();
    let mut j = 0i64;
    while !v.is_zero() {
        for (k, w) in cross(&v, b + 1, n)? {
            let shifted = k - (j + 1);
            let entry = out.entry(shifted).or_insert_with(|| UEAElement::zero(n));
            *entry = entry.add(&w);
        }
        v = ad_f(&v);
        j += 1;
        if j > 4 * (u.degree() as i64 + 2) {
            return Err(Error::Truncation("ad f failed to nilpotate".into()));
        }
    }
    Ok(out.into_iter().filter(|(_, u)| !u.is_zero()).collect())
}

/// The twist gamma_b on the enveloping algebra:
/// `gamma_b(u) = sum_j binom(b, j) (ad f)^j(u) f^-j`.
pub fn gamma_uea(u: &UEAElement, b: &Scalar) -> Result<LocalizedElement, Error> {
    let n = u.n();
    let mut out = LocalizedElement::zero(n);
    let mut v = u.clone();
    let mut j = 0u32;
    loop {
        if v.is_zero() {
            break;
        }
        let coeff = b.binom(j);
        if !coeff.is_zero() {
            let term = LocalizedElement::from_uea(&v)
                .mul(&LocalizedElement::f_power(-(j as i64), n))?
                .scale(&coeff);
            out = out.add(&term);
        }
        v = ad_f(&v);
        j += 1;
        if j > 4 * (u.degree() + 2) {
            return Err(Error::Truncation("ad f failed to nilpotate".into()));
        }
    }
    Ok(out)
}

/// gamma_b on a single generator.
pub fn gamma_gen(g: Generator, b: &Scalar, n: usize) -> Result<LocalizedElement, Error> {
    gamma_uea(&UEAElement::generator(g, n)?, b)
}

/// gamma_b extended multiplicatively to the localization; gamma_b(f) = f, so
/// negative powers pass through untouched.
pub fn gamma(elem: &LocalizedElement, b: &Scalar) -> Result<LocalizedElement, Error> {
    let n = elem.n();
    let mut out = LocalizedElement::zero(n);
    for ((k, m), c) in elem.terms() {
        let mut acc = LocalizedElement::f_power(*k, n);
        for (g, e) in m.letters(n) {
            let img = gamma_gen(g, b, n)?;
            for _ in 0..e {
                acc = acc.mul(&img)?;
            }
        }
        out = out.add(&acc.scale(c));
    }
    Ok(out)
}

#[derive(Serialize, Debug, Clone)]
pub struct GammaCheck {
    pub name: String,
    pub pass: bool,
    pub detail: Option<String>,
}

#[derive(Serialize, Debug, Clone)]
pub struct GammaReport {
    pub n: usize,
    pub b: String,
    pub b_prime: String,
    pub checks: Vec<GammaCheck>,
    pub pass: bool,
}

/// Structural checks for the twist: closed forms on generators, the algebra
/// map property on sampled pairs, the cocycle rule, conjugation at integer
/// parameters, and the Cartan shift.
pub fn gamma_properties_check(
    n: usize,
    b: &Scalar,
    b_prime: &Scalar,
) -> Result<GammaReport, Error> {
    let mut checks = Vec::new();
    let basis = Generator::basis(n);

    // (ad f)^3 kills every generator
    {
        let mut pass = true;
        for &g in &basis {
            let mut v = UEAElement::generator(g, n)?;
            for _ in 0..3 {
                v = ad_f(&v);
            }
            pass &= v.is_zero();
        }
        checks.push(GammaCheck { name: "ad_f_cubed_zero".into(), pass, detail: None });
    }

    // closed forms: gamma_b(e) f = e f + b(1 - b) - b h, gamma_b(x_i) f = x_i f + b y_i,
    // gamma_b(h) = h + 2b, fixed f, y, z, s
    {
        let mut pass = true;
        let mut detail = None;
        let f_loc = LocalizedElement::generator(Generator::F, n)?;
        let e = UEAElement::generator(Generator::E, n)?;
        let h = UEAElement::generator(Generator::H, n)?;
        let lhs = gamma_uea(&e, b)?.mul(&f_loc)?;
        let expected = LocalizedElement::from_uea(
            &e.mul(&UEAElement::generator(Generator::F, n)?)?
                .add(&UEAElement::one(n).scale(&b.mul(&Scalar::one().sub(b))))
                .sub(&h.scale(b)),
        );
        if lhs != expected {
            pass = false;
            detail = Some(format!("gamma_b(e) f = {}", lhs));
        }
        for i in 1..=n {
            let x = UEAElement::generator(Generator::X(i), n)?;
            let y = UEAElement::generator(Generator::Y(i), n)?;
            let lhs = gamma_uea(&x, b)?.mul(&f_loc)?;
            let expected = LocalizedElement::from_uea(
                &x.mul(&UEAElement::generator(Generator::F, n)?)?.add(&y.scale(b)),
            );
            if lhs != expected {
                pass = false;
                detail.get_or_insert(format!("gamma_b(x_{}) f = {}", i, lhs));
            }
        }
        let gh = gamma_uea(&h, b)?;
        let expected =
            LocalizedElement::from_uea(&h.add(&UEAElement::one(n).scale(&b.scale_int(2))));
        pass &= gh == expected;
        for &g in &basis {
            let fixed = matches!(
                g,
                Generator::F | Generator::Y(_) | Generator::Z | Generator::S(_, _)
            );
            if fixed {
                let img = gamma_gen(g, b, n)?;
                pass &= img == LocalizedElement::generator(g, n)?;
            }
        }
        checks.push(GammaCheck { name: "closed_forms".into(), pass, detail });
    }

    // algebra map: gamma_b(uv) = gamma_b(u) gamma_b(v) on all generator pairs
    {
        let mut pass = true;
        let mut detail = None;
        for &a in &basis {
            for &c in &basis {
                let u = UEAElement::generator(a, n)?;
                let v = UEAElement::generator(c, n)?;
                let lhs = gamma_uea(&u.mul(&v)?, b)?;
                let rhs = gamma_uea(&u, b)?.mul(&gamma_uea(&v, b)?)?;
                if lhs != rhs {
                    pass = false;
                    detail.get_or_insert(format!("fails on {} * {}", a, c));
                }
            }
        }
        checks.push(GammaCheck { name: "algebra_map".into(), pass, detail });
    }

    // cocycle: gamma_b . gamma_b' = gamma_(b + b') on generators
    {
        let mut pass = true;
        for &g in &basis {
            let inner = gamma_gen(g, b_prime, n)?;
            let lhs = gamma(&inner, b)?;
            let rhs = gamma_gen(g, &b.add(b_prime), n)?;
            pass &= lhs == rhs;
        }
        checks.push(GammaCheck { name: "cocycle".into(), pass, detail: None });
    }

    // integer parameter: gamma_m(u) = f^m u f^-m
    {
        let mut pass = true;
        for m in [1i64, 2, -1] {
            for &g in &basis {
                let u = LocalizedElement::generator(g, n)?;
                let lhs = gamma(&u, &Scalar::from_int(m))?;
                let rhs = LocalizedElement::f_power(m, n)
                    .mul(&u)?
                    .mul(&LocalizedElement::f_power(-m, n))?;
                pass &= lhs == rhs;
            }
        }
        checks.push(GammaCheck { name: "integer_conjugation".into(), pass, detail: None });
    }

    // Cartan shift: gamma_b(h) - gamma_b'(h) = 2(b - b')
    {
        let h = UEAElement::generator(Generator::H, n)?;
        let diff = gamma_uea(&h, b)?.sub(&gamma_uea(&h, b_prime)?);
        let expected = LocalizedElement::one(n).scale(&b.sub(b_prime).scale_int(2));
        checks.push(GammaCheck {
            name: "cartan_shift".into(),
            pass: diff == expected,
            detail: None,
        });
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(GammaReport {
        n,
        b: b.to_string(),
        b_prime: b_prime.to_string(),
        checks,
        pass,
    })
}

/// Matrix of a localized element at one offset of a module, when every
/// needed action (including inverses of f) is available in the window.
pub fn matrix_of_localized(
    m: &WeightModule,
    elem: &LocalizedElement,
    offset: i64,
) -> Result<Matrix, Error> {
    let n = m.n();
    let shift = localized_shift(elem, n).ok_or_else(|| {
        Error::InvalidArgument("element does not shift weights uniformly".into())
    })?;
    let target = offset + shift;
    let rows = m.dim(target);
    let cols = m.dim(offset);
    let mut acc = Matrix::zeros(rows, cols);
    for ((k, mono), c) in elem.terms() {
        let mut cur = Matrix::identity(cols);
        let mut at = offset;
        let mut letters: Vec<(Generator, u32)> = mono.letters(n).collect();
        letters.reverse(); // rightmost factor acts first
        for (g, e) in letters {
            for _ in 0..e {
                let mat = m.action(g, at).ok_or_else(|| {
                    Error::Truncation(format!("action of {} unknown at offset {}", g, at))
                })?;
                cur = mat.mul(&cur);
                at += g.weight_shift();
            }
        }
        if *k >= 0 {
            for _ in 0..*k {
                let mat = m.action(Generator::F, at).ok_or_else(|| {
                    Error::Truncation(format!("f unknown at offset {}", at))
                })?;
                cur = mat.mul(&cur);
                at -= 2;
            }
        } else {
            for _ in 0..(-k) {
                // f^-1 maps offset at -> at + 2; invert the f block there
                let mat = m.action(Generator::F, at + 2).ok_or_else(|| {
                    Error::Truncation(format!("f unknown at offset {}", at + 2))
                })?;
                cur = mat.inverse()?.mul(&cur);
                at += 2;
            }
        }
        if at != target {
            return Err(Error::InvalidArgument("inconsistent weight shifts".into()));
        }
        acc = acc.add(&cur.scale(c));
    }
    Ok(acc)
}

fn localized_shift(elem: &LocalizedElement, n: usize) -> Option<i64> {
    let mut shift = None;
    for (k, mono) in elem.terms().keys() {
        let mut s = -2 * k;
        for (g, e) in mono.letters(n) {
            s += g.weight_shift() * e as i64;
        }
        match shift {
            None => shift = Some(s),
            Some(prev) if prev != s => return None,
            _ => {}
        }
    }
    shift
}

/// Twist a module with invertible f by gamma_b: same spaces, generator g
/// acts through gamma_b(g). The Cartan shift moves every weight by 2b.
pub fn twist_module(m: &WeightModule, b: &Scalar) -> Result<WeightModule, Error> {
    let n = m.n();
    let mut actions: BTreeMap<Generator, BTreeMap<i64, Matrix>> = BTreeMap::new();
    for g in Generator::basis(n) {
        let img = gamma_gen(g, b, n)?;
        let mut per = BTreeMap::new();
        for &d in &m.offsets() {
            match matrix_of_localized(m, &img, d) {
                Ok(mat) => {
                    per.insert(d, mat);
                }
                Err(Error::Truncation(_)) => {} // window edge, leave unknown
                Err(e) => return Err(e),
            }
        }
        actions.insert(g, per);
    }
    let dims: BTreeMap<i64, usize> = m.offsets().iter().map(|&d| (d, m.dim(d))).collect();
    Ok(WeightModule::from_parts(
        n,
        m.zdot().clone(),
        m.base_weight().add(&b.scale_int(2)),
        dims,
        actions,
        Provenance::Localized,
        false,
        false,
    ))
}
