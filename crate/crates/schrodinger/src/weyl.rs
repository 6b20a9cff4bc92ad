//! The rank-n Weyl algebra of polynomial differential operators, the
//! realization maps theta (into the Weyl algebra) and phi (into
//! U(so_n + sl_2) tensor the Weyl algebra), and the three rank-one weight
//! modules used by the classification.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::Error;
use crate::lie::{bracket_gens, Generator, LieElement};
use crate::linalg::SparseEchelon;
use crate::pbw::{PBWMonomial, UEAElement};
use crate::scalar::{Scalar, Tower};

/// Normal-ordered monomial `t^a d^b` (all t's before all derivatives).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct WeylMonomial {
    pub t: Vec<u32>,
    pub d: Vec<u32>,
}

impl WeylMonomial {
    pub fn one(n: usize) -> Self {
        WeylMonomial { t: vec![0; n], d: vec![0; n] }
    }

    pub fn is_one(&self) -> bool {
        self.t.iter().all(|&e| e == 0) && self.d.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u32 {
        self.t.iter().sum::<u32>() + self.d.iter().sum::<u32>()
    }

    pub fn display(&self, _n: usize) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, &e) in self.t.iter().enumerate() {
            if e == 1 {
                parts.push(format!("t({})", i + 1));
            } else if e > 1 {
                parts.push(format!("t({})^{}", i + 1, e));
            }
        }
        for (i, &e) in self.d.iter().enumerate() {
            if e == 1 {
                parts.push(format!("d({})", i + 1));
            } else if e > 1 {
                parts.push(format!("d({})^{}", i + 1, e));
            }
        }
        parts.join(" ")
    }
}

/// Element of the Weyl algebra, normal ordered with the relation
/// `[d_i, t_j] = delta_ij` applied eagerly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylOperator {
    n: usize,
    terms: BTreeMap<WeylMonomial, Scalar>,
}

impl WeylOperator {
    pub fn zero(n: usize) -> Self {
        WeylOperator { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        WeylOperator::from_term(WeylMonomial::one(n), Scalar::one(), n)
    }

    pub fn from_term(m: WeylMonomial, c: Scalar, n: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        WeylOperator { n, terms }
    }

    pub fn t(i: usize, n: usize) -> Self {
        let mut m = WeylMonomial::one(n);
        m.t[i - 1] = 1;
        WeylOperator::from_term(m, Scalar::one(), n)
    }

    pub fn d(i: usize, n: usize) -> Self {
        let mut m = WeylMonomial::one(n);
        m.d[i - 1] = 1;
        WeylOperator::from_term(m, Scalar::one(), n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<WeylMonomial, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: WeylMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Scalar::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &WeylOperator) -> WeylOperator {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &WeylOperator) -> WeylOperator {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> WeylOperator {
        let mut out = WeylOperator::zero(self.n);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.mul(c));
        }
        out
    }

    /// Associative normal-ordered product.
    pub fn mul(&self, other: &WeylOperator) -> Result<WeylOperator, Error> {
        if self.n != other.n {
            return Err(Error::RankMismatch { expected: self.n, got: other.n });
        }
        let mut out = WeylOperator::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let base = c1.mul(c2);
                // d^{b1} t^{a2} = sum_k k! C(b1,k) C(a2,k) t^{a2-k} d^{b1-k},
                // variable by variable
                let mut partial: Vec<(WeylMonomial, Scalar)> =
                    vec![(WeylMonomial::one(self.n), base)];
                for i in 0..self.n {
                    let b1 = m1.d[i];
                    let a2 = m2.t[i];
                    let mut next = Vec::new();
                    for k in 0..=b1.min(a2) {
                        let coeff = contraction_coeff(b1, a2, k);
                        for (mono, c) in &partial {
                            let mut m = mono.clone();
                            m.t[i] = m1.t[i] + a2 - k;
                            m.d[i] = b1 - k + m2.d[i];
                            next.push((m, c.mul(&Scalar::from_rational(coeff.clone()))));
                        }
                    }
                    partial = next;
                }
                for (m, c) in partial {
                    out.add_term(m, c);
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &WeylOperator) -> Result<WeylOperator, Error> {
        Ok(self.mul(other)?.sub(&other.mul(self)?))
    }

    pub fn pow(&self, e: u32) -> Result<WeylOperator, Error> {
        let mut acc = WeylOperator::one(self.n);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

/// `k! * C(b, k) * C(a, k)` as a rational.
fn contraction_coeff(b: u32, a: u32, k: u32) -> BigRational {
    let mut num = BigRational::one();
    for j in 0..k {
        num *= BigRational::from_integer(BigInt::from(b - j));
        num *= BigRational::from_integer(BigInt::from(a - j));
    }
    let mut fact = BigRational::one();
    for j in 1..=k {
        fact *= BigRational::from_integer(BigInt::from(j));
    }
    num / fact
}

impl fmt::Display for WeylOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
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
            let mono = m.display(self.n);
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

/// Image of a single generator under the differential-operator realization.
///
/// `z` maps to the central charge times the identity operator, realizing the
/// quotient by `z - zdot`.
pub fn theta_gen(g: Generator, tower: &Arc<Tower>, n: usize) -> WeylOperator {
    let s = Scalar::s(tower);
    match g {
        Generator::X(i) => WeylOperator::d(i, n).scale(&s),
        Generator::Y(i) => WeylOperator::t(i, n).scale(&s),
        Generator::E => {
            let mut out = WeylOperator::zero(n);
            for k in 1..=n {
                let mut m = WeylMonomial::one(n);
                m.d[k - 1] = 2;
                out.add_term(m, Scalar::from_ratio(1, 2));
            }
            out
        }
        Generator::F => {
            let mut out = WeylOperator::zero(n);
            for k in 1..=n {
                let mut m = WeylMonomial::one(n);
                m.t[k - 1] = 2;
                out.add_term(m, Scalar::from_ratio(-1, 2));
            }
            out
        }
        Generator::H => {
            // -1/2 sum (d_k t_k + t_k d_k) = -sum t_k d_k - n/2
            let mut out = WeylOperator::zero(n);
            for k in 1..=n {
                let mut m = WeylMonomial::one(n);
                m.t[k - 1] = 1;
                m.d[k - 1] = 1;
                out.add_term(m, Scalar::from_int(-1));
            }
            out.add_term(
                WeylMonomial::one(n),
                Scalar::from_ratio(-(n as i64), 2),
            );
            out
        }
        Generator::S(i, j) => {
            let mut out = WeylOperator::zero(n);
            let mut m = WeylMonomial::one(n);
            m.t[i - 1] = 1;
            m.d[j - 1] = 1;
            out.add_term(m, Scalar::one());
            let mut m = WeylMonomial::one(n);
            m.t[j - 1] = 1;
            m.d[i - 1] = 1;
            out.add_term(m, Scalar::from_int(-1));
            out
        }
        Generator::Z => WeylOperator::one(n).scale(&Scalar::zdot(tower)),
    }
}

/// Linear extension of the realization to z-free Lie elements.
pub fn theta(elem: &LieElement, tower: &Arc<Tower>) -> Result<WeylOperator, Error> {
    if elem.terms().contains_key(&Generator::Z) {
        return Err(Error::UnreducedCentral);
    }
    Ok(theta_central(elem, tower))
}

/// Like [`theta`] but with `z` mapped to `zdot * 1`, i.e. the map on the
/// central quotient.
pub fn theta_central(elem: &LieElement, tower: &Arc<Tower>) -> WeylOperator {
    let n = elem.n();
    let mut out = WeylOperator::zero(n);
    for (g, c) in elem.terms() {
        out = out.add(&theta_gen(*g, tower, n).scale(c));
    }
    out
}

/// Element of U(so_n + sl_2) tensor the Weyl algebra. Left factors are PBW
/// monomials in the s_ij, f, h, e slots only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorAlgebraElement {
    n: usize,
    terms: BTreeMap<(PBWMonomial, WeylMonomial), Scalar>,
}

impl TensorAlgebraElement {
    pub fn zero(n: usize) -> Self {
        TensorAlgebraElement { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        TensorAlgebraElement::from_term(
            PBWMonomial::one(n),
            WeylMonomial::one(n),
            Scalar::one(),
            n,
        )
    }

    pub fn from_term(u: PBWMonomial, w: WeylMonomial, c: Scalar, n: usize) -> Self {
        assert!(left_factor_ok(&u, n), "left tensor factor contains Heisenberg part");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((u, w), c);
        }
        TensorAlgebraElement { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(PBWMonomial, WeylMonomial), Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, u: PBWMonomial, w: WeylMonomial, c: Scalar) {
        debug_assert!(left_factor_ok(&u, self.n));
        if c.is_zero() {
            return;
        }
        let key = (u, w);
        let entry = self.terms.entry(key.clone()).or_insert_with(Scalar::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &TensorAlgebraElement) -> TensorAlgebraElement {
        let mut out = self.clone();
        for ((u, w), c) in &other.terms {
            out.add_term(u.clone(), w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TensorAlgebraElement) -> TensorAlgebraElement {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> TensorAlgebraElement {
        let mut out = TensorAlgebraElement::zero(self.n);
        for ((u, w), v) in &self.terms {
            out.add_term(u.clone(), w.clone(), v.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &TensorAlgebraElement) -> Result<TensorAlgebraElement, Error> {
        if self.n != other.n {
            return Err(Error::RankMismatch { expected: self.n, got: other.n });
        }
        let mut out = TensorAlgebraElement::zero(self.n);
        for ((u1, w1), c1) in &self.terms {
            for ((u2, w2), c2) in &other.terms {
                let left = UEAElement::from_term(u1.clone(), Scalar::one(), self.n)
                    .mul(&UEAElement::from_term(u2.clone(), Scalar::one(), self.n))?;
                let right = WeylOperator::from_term(w1.clone(), Scalar::one(), self.n)
                    .mul(&WeylOperator::from_term(w2.clone(), Scalar::one(), self.n))?;
                let c = c1.mul(c2);
                for (u, cu) in left.terms() {
                    for (w, cw) in right.terms() {
                        out.add_term(u.clone(), w.clone(), c.mul(cu).mul(cw));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(
        &self,
        other: &TensorAlgebraElement,
    ) -> Result<TensorAlgebraElement, Error> {
        Ok(self.mul(other)?.sub(&other.mul(self)?))
    }
}

fn left_factor_ok(u: &PBWMonomial, n: usize) -> bool {
    (0..n)
        .all(|i| u.exp_of(Generator::Y(i + 1), n) == 0 && u.exp_of(Generator::X(i + 1), n) == 0)
        && u.exp_of(Generator::Z, n) == 0
}

/// Image of a generator under the tensor-algebra realization:
/// Heisenberg generators act only through the Weyl factor, the reductive
/// generators diagonally.
pub fn phi_gen(g: Generator, tower: &Arc<Tower>, n: usize) -> TensorAlgebraElement {
    let mut out = TensorAlgebraElement::zero(n);
    match g {
        Generator::X(_) | Generator::Y(_) | Generator::Z => {
            for (w, c) in theta_gen(g, tower, n).terms() {
                out.add_term(PBWMonomial::one(n), w.clone(), c.clone());
            }
        }
        _ => {
            out.add_term(PBWMonomial::generator(g, n), WeylMonomial::one(n), Scalar::one());
            for (w, c) in theta_gen(g, tower, n).terms() {
                out.add_term(PBWMonomial::one(n), w.clone(), c.clone());
            }
        }
    }
    out
}

/// Linear extension to z-free Lie elements.
pub fn phi(elem: &LieElement, tower: &Arc<Tower>) -> Result<TensorAlgebraElement, Error> {
    if elem.terms().contains_key(&Generator::Z) {
        return Err(Error::UnreducedCentral);
    }
    Ok(phi_central(elem, tower))
}

/// Like [`phi`] with `z` mapped to `zdot * (1 tensor 1)`.
pub fn phi_central(elem: &LieElement, tower: &Arc<Tower>) -> TensorAlgebraElement {
    let n = elem.n();
    let mut out = TensorAlgebraElement::zero(n);
    for (g, c) in elem.terms() {
        out = out.add(&phi_gen(*g, tower, n).scale(c));
    }
    out
}

/// Multiplicative extension of phi to a PBW monomial (z exponent must be 0).
pub fn phi_monomial(
    m: &PBWMonomial,
    tower: &Arc<Tower>,
    n: usize,
) -> Result<TensorAlgebraElement, Error> {
    if m.exp_of(Generator::Z, n) != 0 {
        return Err(Error::UnreducedCentral);
    }
    let mut acc = TensorAlgebraElement::one(n);
    for (g, e) in m.letters(n) {
        let img = phi_gen(g, tower, n);
        for _ in 0..e {
            acc = acc.mul(&img)?;
        }
    }
    Ok(acc)
}

#[derive(Serialize, Debug, Clone)]
pub struct HomomorphismReport {
    pub n: usize,
    pub zdot: String,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

impl HomomorphismReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check theta([a,b]) = [theta(a), theta(b)] on every basis pair.
pub fn theta_homomorphism_check(n: usize, tower: &Arc<Tower>) -> HomomorphismReport {
    let basis = Generator::basis(n);
    let mut failures = Vec::new();
    let mut pairs = 0;
    for &a in &basis {
        for &b in &basis {
            pairs += 1;
            let mut bracket = LieElement::zero(n);
            for (g, k) in bracket_gens(a, b) {
                bracket.add_term(g, Scalar::from_int(k));
            }
            let lhs = theta_central(&bracket, tower);
            let rhs = theta_gen(a, tower, n)
                .commutator(&theta_gen(b, tower, n))
                .expect("same rank");
            if lhs != rhs {
                failures.push(format!("theta breaks on [{}, {}]", a, b));
            }
        }
    }
    HomomorphismReport {
        n,
        zdot: Scalar::zdot(tower).to_string(),
        pairs_checked: pairs,
        failures,
    }
}

/// Check phi([a,b]) = [phi(a), phi(b)] on every basis pair.
pub fn phi_homomorphism_check(n: usize, tower: &Arc<Tower>) -> HomomorphismReport {
    let basis = Generator::basis(n);
    let mut failures = Vec::new();
    let mut pairs = 0;
    for &a in &basis {
        for &b in &basis {
            pairs += 1;
            let mut bracket = LieElement::zero(n);
            for (g, k) in bracket_gens(a, b) {
                bracket.add_term(g, Scalar::from_int(k));
            }
            let lhs = phi_central(&bracket, tower);
            let rhs = phi_gen(a, tower, n)
                .commutator(&phi_gen(b, tower, n))
                .expect("same rank");
            if lhs != rhs {
                failures.push(format!("phi breaks on [{}, {}]", a, b));
            }
        }
    }
    HomomorphismReport {
        n,
        zdot: Scalar::zdot(tower).to_string(),
        pairs_checked: pairs,
        failures,
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct InjectivityReport {
    pub n: usize,
    pub max_degree: u32,
    pub monomial_count: usize,
    pub rank: usize,
    pub pass: bool,
}

/// Exact-rank check that phi maps the PBW monomials of bounded degree to
/// linearly independent tensors.
pub fn phi_injectivity_check(
    max_degree: u32,
    n: usize,
    tower: &Arc<Tower>,
) -> Result<InjectivityReport, Error> {
    let monomials = crate::pbw::monomials_up_to(n, max_degree, false);
    let mut echelon: SparseEchelon<(PBWMonomial, WeylMonomial)> = SparseEchelon::new();
    for m in &monomials {
        let img = phi_monomial(m, tower, n)?;
        echelon.insert(img.terms().clone());
    }
    let rank = echelon.rank();
    Ok(InjectivityReport {
        n,
        max_degree,
        monomial_count: monomials.len(),
        rank,
        pass: rank == monomials.len(),
    })
}

/// Which rank-one (or polynomial) module a vector lives in.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum PolyKind {
    /// C[t_1..t_n], exponents >= 0.
    Poly,
    /// t^lambda C[t^{+-1}] for lambda not an integer; rank one only.
    /// Exponents are integer offsets against lambda, within [-window, window].
    TwistedLaurent { lambda: Scalar, window: i64 },
    /// C[t^{+-1}] / C[t]; rank one only; representatives have exponents in
    /// [-window, -1].
    LaurentQuotient { window: i64 },
}

impl PolyKind {
    pub fn rank_ok(&self, n: usize) -> bool {
        match self {
            PolyKind::Poly => true,
            _ => n == 1,
        }
    }
}

/// Vector in a polynomial / twisted Laurent / Laurent quotient module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyModuleVector {
    pub kind: PolyKind,
    pub n: usize,
    /// exponent vector -> coefficient; semantics of the exponent depend on kind
    pub terms: BTreeMap<Vec<i64>, Scalar>,
}

impl PolyModuleVector {
    pub fn zero(kind: PolyKind, n: usize) -> Result<Self, Error> {
        if !kind.rank_ok(n) {
            return Err(Error::KindMismatch(format!(
                "Laurent kinds require n=1, got n={}",
                n
            )));
        }
        if let PolyKind::TwistedLaurent { lambda, .. } = &kind {
            if is_integer(lambda) {
                return Err(Error::InvalidArgument(
                    "twisted Laurent shift must not be an integer".into(),
                ));
            }
        }
        Ok(PolyModuleVector { kind, n, terms: BTreeMap::new() })
    }

    pub fn monomial(kind: PolyKind, exps: Vec<i64>, n: usize) -> Result<Self, Error> {
        let mut v = PolyModuleVector::zero(kind, n)?;
        v.check_exps(&exps)?;
        v.terms.insert(exps, Scalar::one());
        Ok(v)
    }

    fn check_exps(&self, exps: &[i64]) -> Result<(), Error> {
        if exps.len() != self.n {
            return Err(Error::RankMismatch { expected: self.n, got: exps.len() });
        }
        match &self.kind {
            PolyKind::Poly => {
                if exps.iter().any(|&e| e < 0) {
                    return Err(Error::InvalidArgument(
                        "polynomial module needs nonnegative exponents".into(),
                    ));
                }
            }
            PolyKind::TwistedLaurent { window, .. } => {
                if exps[0].abs() > *window {
                    return Err(Error::Truncation(format!(
                        "offset {} outside window [-{}, {}]",
                        exps[0], window, window
                    )));
                }
            }
            PolyKind::LaurentQuotient { window } => {
                if exps[0] >= 0 || exps[0] < -window {
                    return Err(Error::Truncation(format!(
                        "representative exponent {} outside [-{}, -1]",
                        exps[0], window
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn add_term(&mut self, exps: Vec<i64>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps.clone()).or_insert_with(Scalar::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PolyModuleVector) -> Result<PolyModuleVector, Error> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch("adding vectors of different kinds".into()));
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> PolyModuleVector {
        let mut out = self.clone();
        out.terms.clear();
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.mul(c));
        }
        out
    }

    /// The scalar exponent of variable `i` for a stored offset: the actual
    /// power of t_i, which carries the lambda shift for twisted modules.
    fn exponent_scalar(&self, offset: i64, _i: usize) -> Scalar {
        match &self.kind {
            PolyKind::TwistedLaurent { lambda, .. } => {
                lambda.add(&Scalar::from_int(offset))
            }
            _ => Scalar::from_int(offset),
        }
    }
}

fn is_integer(s: &Scalar) -> bool {
    match s.as_qi() {
        Ok(qi) => qi.im.is_zero() && qi.re.denom().is_one(),
        Err(_) => false,
    }
}

/// Apply a Weyl operator to a module vector. Overflowing the truncation
/// window of a Laurent kind is an error, never a silent drop; the quotient
/// kind re-projects nonnegative exponents to zero.
pub fn act(op: &WeylOperator, v: &PolyModuleVector) -> Result<PolyModuleVector, Error> {
    if op.n() != v.n {
        return Err(Error::RankMismatch { expected: v.n, got: op.n() });
    }
    let mut out = PolyModuleVector::zero(v.kind.clone(), v.n)?;
    for (mono, c_op) in op.terms() {
        for (exps, c_v) in &v.terms {
            let mut coeff = c_op.mul(c_v);
            let mut new_exps = Vec::with_capacity(v.n);
            #[allow(clippy::needless_range_loop)] // i indexes three parallel arrays
            for i in 0..v.n {
                let b = mono.d[i];
                let a = mono.t[i] as i64;
                let mu = v.exponent_scalar(exps[i], i);
                coeff = coeff.mul(&mu.falling(b));
                new_exps.push(exps[i] - b as i64 + a);
            }
            if coeff.is_zero() {
                continue;
            }
            match &v.kind {
                PolyKind::Poly => {
                    debug_assert!(new_exps.iter().all(|&e| e >= 0));
                    out.add_term(new_exps, coeff);
                }
                PolyKind::TwistedLaurent { window, .. } => {
                    if new_exps[0].abs() > *window {
                        return Err(Error::Truncation(format!(
                            "offset {} leaves window [-{}, {}]",
                            new_exps[0], window, window
                        )));
                    }
                    out.add_term(new_exps, coeff);
                }
                PolyKind::LaurentQuotient { window } => {
                    if new_exps[0] >= 0 {
                        continue; // projected away in the quotient
                    }
                    if new_exps[0] < -window {
                        return Err(Error::Truncation(format!(
                            "exponent {} leaves window [-{}, -1]",
                            new_exps[0], window
                        )));
                    }
                    out.add_term(new_exps, coeff);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Serialize, Debug, Clone)]
pub struct CyclicityReport {
    pub kind: String,
    pub window: i64,
    pub basis_dim: usize,
    pub min_orbit_dim: usize,
    pub cyclic: bool,
}

/// Check that each rank-one weight module is cyclic from every basis vector
/// within the truncation window: the orbit under t and d spans everything.
pub fn d1_cyclicity_check(kind: &PolyKind, window: i64) -> Result<CyclicityReport, Error> {
    let n = 1;
    let offsets: Vec<i64> = match kind {
        PolyKind::Poly => (0..=window).collect(),
        PolyKind::TwistedLaurent { .. } => (-window..=window).collect(),
        PolyKind::LaurentQuotient { .. } => (-window..=-1).collect(),
    };
    let index_of = |e: i64| offsets.iter().position(|&o| o == e);
    let dim = offsets.len();
    let to_dense = |v: &PolyModuleVector| -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); dim];
        for (exps, c) in &v.terms {
            out[index_of(exps[0]).expect("offset in window")] = c.clone();
        }
        out
    };
    let t_op = WeylOperator::t(1, n);
    let d_op = WeylOperator::d(1, n);
    let mut min_orbit = dim;
    for &start in &offsets {
        let v0 = PolyModuleVector::monomial(kind.clone(), vec![start], n)?;
        let mut tracker = crate::linalg::SpanTracker::new();
        tracker.insert(to_dense(&v0));
        let mut frontier = vec![v0];
        while let Some(v) = frontier.pop() {
            for op in [&t_op, &d_op] {
                // moves that would leave the window are skipped, not counted
                let Ok(img) = act(op, &v) else { continue };
                if img.is_zero() {
                    continue;
                }
                // the plain polynomial module has no hard window; stay inside
                // the tracked exponent range
                if img.terms.keys().any(|e| index_of(e[0]).is_none()) {
                    continue;
                }
                if tracker.insert(to_dense(&img)) {
                    frontier.push(img);
                }
            }
        }
        min_orbit = min_orbit.min(tracker.dim());
    }
    Ok(CyclicityReport {
        kind: match kind {
            PolyKind::Poly => "poly".into(),
            PolyKind::TwistedLaurent { lambda, .. } => format!("twisted-laurent({})", lambda),
            PolyKind::LaurentQuotient { .. } => "laurent-quotient".into(),
        },
        window,
        basis_dim: dim,
        min_orbit_dim: min_orbit,
        cyclic: min_orbit == dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Qi;

    fn tower1() -> Arc<Tower> {
        Tower::from_zdot(Qi::from_int(1))
    }

    #[test]
    fn defining_relation() {
        let n = 1;
        let d1 = WeylOperator::d(1, n);
        let t1 = WeylOperator::t(1, n);
        // d t = t d + 1
        let prod = d1.mul(&t1).unwrap();
        assert_eq!(prod.to_string(), "t(1) d(1) + 1");
    }

    #[test]
    fn double_contraction() {
        let n = 1;
        let d2 = WeylOperator::d(1, n).pow(2).unwrap();
        let t2 = WeylOperator::t(1, n).pow(2).unwrap();
        assert_eq!(d2.mul(&t2).unwrap().to_string(), "t(1)^2 d(1)^2 + 4*t(1) d(1) + 2");
    }

    #[test]
    fn commuting_variables() {
        let n = 2;
        let t1 = WeylOperator::t(1, n);
        let t2 = WeylOperator::t(2, n);
        assert_eq!(t1.mul(&t2).unwrap(), t2.mul(&t1).unwrap());
    }

    #[test]
    fn theta_images() {
        let n = 2;
        let t = tower1();
        let h = theta_gen(Generator::H, &t, n);
        assert_eq!(h.to_string(), "-t(1) d(1) - t(2) d(2) - 1");
        let s12 = theta_gen(Generator::S(1, 2), &t, n);
        assert_eq!(s12.to_string(), "t(1) d(2) - t(2) d(1)");
    }

    #[test]
    fn heisenberg_relation_in_weyl() {
        for zdot in [1i64, 4, 2] {
            let t = Tower::from_zdot(Qi::from_int(zdot));
            let n = 1;
            let x = theta_gen(Generator::X(1), &t, n);
            let y = theta_gen(Generator::Y(1), &t, n);
            let comm = x.commutator(&y).unwrap();
            assert_eq!(comm, WeylOperator::one(n).scale(&Scalar::from_int(zdot)));
        }
    }

    #[test]
    fn theta_homomorphism_all_pairs() {
        for n in 1..=3 {
            for zdot in [1i64, 4, 2] {
                let t = Tower::from_zdot(Qi::from_int(zdot));
                let report = theta_homomorphism_check(n, &t);
                assert!(report.passed(), "n={} zdot={}: {:?}", n, zdot, report.failures);
            }
        }
    }

    #[test]
    fn phi_generator_images() {
        let n = 1;
        let t = tower1();
        let x = phi_gen(Generator::X(1), &t, n);
        // 1 tensor s d_1
        assert_eq!(x.terms().len(), 1);
        let ((u, w), c) = x.terms().iter().next().unwrap();
        assert!(u.is_one());
        assert_eq!(w.d, vec![1]);
        assert_eq!(*c, Scalar::one());

        let e = phi_gen(Generator::E, &t, n);
        // e tensor 1 + 1 tensor (1/2) d^2
        assert_eq!(e.terms().len(), 2);
    }

    #[test]
    fn phi_homomorphism_and_factorization() {
        let n = 2;
        let t = tower1();
        let report = phi_homomorphism_check(n, &t);
        assert!(report.passed(), "{:?}", report.failures);
        // phi(g) - 1 tensor theta(g) has only identity on the Weyl side
        for g in [Generator::E, Generator::F, Generator::H, Generator::S(1, 2)] {
            let img = phi_gen(g, &t, n);
            let mut pure = TensorAlgebraElement::zero(n);
            for (w, c) in theta_gen(g, &t, n).terms() {
                pure.add_term(PBWMonomial::one(n), w.clone(), c.clone());
            }
            let diff = img.sub(&pure);
            for (_, w) in diff.terms().keys() {
                assert!(w.is_one(), "{}: stray Weyl part {:?}", g, w);
            }
        }
    }

    #[test]
    fn phi_bracket_ef_expands() {
        // phi(e)phi(f) - phi(f)phi(e) = h tensor 1 + 1 tensor theta(h)
        let n = 2;
        let t = tower1();
        let lhs = phi_gen(Generator::E, &t, n)
            .commutator(&phi_gen(Generator::F, &t, n))
            .unwrap();
        let rhs = phi_gen(Generator::H, &t, n);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn injectivity_small() {
        let t = tower1();
        let report = phi_injectivity_check(2, 1, &t).unwrap();
        assert!(report.pass);
        assert_eq!(report.rank, report.monomial_count);
        let report0 = phi_injectivity_check(0, 1, &t).unwrap();
        assert_eq!(report0.rank, 1);
    }

    #[test]
    fn act_on_polynomials() {
        let n = 1;
        let d1 = WeylOperator::d(1, n);
        let v = PolyModuleVector::monomial(PolyKind::Poly, vec![3], n).unwrap();
        let out = act(&d1, &v).unwrap();
        assert_eq!(out.terms.get(&vec![2]).unwrap(), &Scalar::from_int(3));
    }

    #[test]
    fn act_on_twisted_laurent() {
        let n = 1;
        let lambda = Scalar::from_ratio(1, 2);
        let kind = PolyKind::TwistedLaurent { lambda: lambda.clone(), window: 12 };
        // t d on t^{lambda+2} -> (lambda+2) t^{lambda+2}
        let td = WeylOperator::t(1, n).mul(&WeylOperator::d(1, n)).unwrap();
        let v = PolyModuleVector::monomial(kind, vec![2], n).unwrap();
        let out = act(&td, &v).unwrap();
        assert_eq!(out.terms.get(&vec![2]).unwrap(), &lambda.add(&Scalar::from_int(2)));
    }

    #[test]
    fn act_on_quotient() {
        let n = 1;
        let kind = PolyKind::LaurentQuotient { window: 12 };
        let d1 = WeylOperator::d(1, n);
        let v = PolyModuleVector::monomial(kind.clone(), vec![-1], n).unwrap();
        let out = act(&d1, &v).unwrap();
        assert_eq!(out.terms.get(&vec![-2]).unwrap(), &Scalar::from_int(-1));
        // t sends t^{-1} to the class of 1, which is zero in the quotient
        let t1 = WeylOperator::t(1, n);
        assert!(act(&t1, &v).unwrap().is_zero());
    }

    #[test]
    fn truncation_is_loud() {
        let n = 1;
        let kind = PolyKind::TwistedLaurent { lambda: Scalar::from_ratio(1, 2), window: 2 };
        let v = PolyModuleVector::monomial(kind, vec![2], n).unwrap();
        let t1 = WeylOperator::t(1, n);
        assert!(matches!(act(&t1, &v), Err(Error::Truncation(_))));
    }

    #[test]
    fn integer_twist_rejected() {
        let kind = PolyKind::TwistedLaurent { lambda: Scalar::from_int(2), window: 4 };
        assert!(PolyModuleVector::zero(kind, 1).is_err());
    }

    #[test]
    fn module_axiom_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 1;
        let kind = PolyKind::TwistedLaurent { lambda: Scalar::from_ratio(1, 3), window: 30 };
        for _ in 0..50 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut m = WeylMonomial::one(n);
                m.t[0] = rng.gen_range(0..3);
                m.d[0] = rng.gen_range(0..3);
                WeylOperator::from_term(m, Scalar::from_int(rng.gen_range(-3..=3)), n)
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let v = PolyModuleVector::monomial(kind.clone(), vec![rng.gen_range(-3..=3)], n)
                .unwrap();
            let lhs = act(&a.mul(&b).unwrap(), &v).unwrap();
            let rhs = act(&a, &act(&b, &v).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn h_eigenvalue_on_poly_monomials() {
        // theta(h) has eigenvalue -(k + n/2) on a total-degree-k monomial
        for n in 1..=3usize {
            let t = tower1();
            let h = theta_gen(Generator::H, &t, n);
            for k in 0..=10i64 {
                let mut exps = vec![0i64; n];
                exps[0] = k.min(4);
                let rest = k - exps[0];
                if n > 1 {
                    exps[1] = rest.min(6);
                    if n > 2 {
                        exps[2] = rest - exps[1];
                    } else if rest > exps[1] {
                        exps[0] += rest - exps[1];
                    }
                } else {
                    exps[0] = k;
                }
                let total: i64 = exps.iter().sum();
                if total != k {
                    continue;
                }
                let v = PolyModuleVector::monomial(PolyKind::Poly, exps, n).unwrap();
                let out = act(&h, &v).unwrap();
                let expected = v.scale(
                    &Scalar::from_int(-k).sub(&Scalar::from_ratio(n as i64, 2)),
                );
                assert_eq!(out, expected, "n={} k={}", n, k);
            }
        }
    }

    #[test]
    fn rank_one_modules_cyclic() {
        let window = 8;
        for kind in [
            PolyKind::Poly,
            PolyKind::TwistedLaurent { lambda: Scalar::from_ratio(1, 2), window },
            PolyKind::LaurentQuotient { window },
        ] {
            let report = d1_cyclicity_check(&kind, window).unwrap();
            assert!(report.cyclic, "{:?}", report);
        }
    }
}
