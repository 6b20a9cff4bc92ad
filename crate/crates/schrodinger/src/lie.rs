//! The Schrodinger Lie algebra: canonical basis, structure-constant bracket,
//! the matrix realization inside gl_{2n} + Heisenberg vector + central channel
//! (used as an independent oracle), the triangular decomposition, and the
//! twist automorphism tau.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Error;
use crate::linalg::Matrix;
use crate::scalar::{parse_scalar, split_signed_terms, Scalar, Tower};

/// Basis generator of the algebra for a fixed rank `n`.
///
/// Rotation generators are stored with `i < j`; `s(j,i)` normalizes to
/// `-s(i,j)` and `s(i,i)` is rejected. Indices are 1-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Generator {
    S(usize, usize),
    F,
    H,
    E,
    Y(usize),
    X(usize),
    Z,
}

impl Generator {
    /// Normalized rotation generator: returns `(S(min,max), sign)`.
    pub fn s_signed(i: usize, j: usize) -> Result<(Generator, i64), Error> {
        if i == j {
            return Err(Error::InvalidArgument(format!("s({},{}) is zero", i, j)));
        }
        if i < j {
            Ok((Generator::S(i, j), 1))
        } else {
            Ok((Generator::S(j, i), -1))
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), Error> {
        let ok = match self {
            Generator::S(i, j) => *i >= 1 && *i < *j && *j <= n,
            Generator::X(i) | Generator::Y(i) => *i >= 1 && *i <= n,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{} out of range for n={}", self, n)))
        }
    }

    /// All basis generators for rank `n`, in PBW order.
    pub fn basis(n: usize) -> Vec<Generator> {
        let mut out = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                out.push(Generator::S(i, j));
            }
        }
        out.push(Generator::F);
        out.push(Generator::H);
        out.push(Generator::E);
        for i in 1..=n {
            out.push(Generator::Y(i));
        }
        for i in 1..=n {
            out.push(Generator::X(i));
        }
        out.push(Generator::Z);
        out
    }

    /// Position of the generator in the fixed PBW order
    /// (all s_ij lexicographic, then f, h, e, then y's, then x's, then z).
    pub fn pbw_index(&self, n: usize) -> usize {
        let ns = n * (n - 1) / 2;
        match self {
            Generator::S(i, j) => {
                // lexicographic position of (i,j), i<j, 1-based
                let before = (i - 1) * n - (i - 1) * i / 2;
                before + (j - i - 1)
            }
            Generator::F => ns,
            Generator::H => ns + 1,
            Generator::E => ns + 2,
            Generator::Y(i) => ns + 3 + (i - 1),
            Generator::X(i) => ns + 3 + n + (i - 1),
            Generator::Z => ns + 3 + 2 * n,
        }
    }

    pub fn count(n: usize) -> usize {
        n * (n - 1) / 2 + 3 + 2 * n + 1
    }

    /// Inverse of [`Generator::pbw_index`].
    pub fn from_pbw_index(idx: usize, n: usize) -> Generator {
        let ns = n * (n - 1) / 2;
        if idx < ns {
            let mut k = idx;
            for i in 1..=n {
                let row = n - i;
                if k < row {
                    return Generator::S(i, i + 1 + k);
                }
                k -= row;
            }
            unreachable!()
        } else if idx == ns {
            Generator::F
        } else if idx == ns + 1 {
            Generator::H
        } else if idx == ns + 2 {
            Generator::E
        } else if idx < ns + 3 + n {
            Generator::Y(idx - ns - 3 + 1)
        } else if idx < ns + 3 + 2 * n {
            Generator::X(idx - ns - 3 - n + 1)
        } else {
            Generator::Z
        }
    }

    /// Shift of the h-weight under the adjoint/module action.
    pub fn weight_shift(&self) -> i64 {
        match self {
            Generator::E => 2,
            Generator::F => -2,
            Generator::X(_) => 1,
            Generator::Y(_) => -1,
            _ => 0,
        }
    }

    /// Membership in the triangular decomposition.
    pub fn is_raising(&self) -> bool {
        matches!(self, Generator::E | Generator::X(_))
    }

    pub fn is_lowering(&self) -> bool {
        matches!(self, Generator::F | Generator::Y(_))
    }

    pub fn is_cartan_part(&self) -> bool {
        matches!(self, Generator::H | Generator::Z | Generator::S(_, _))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::H => write!(f, "h"),
            Generator::E => write!(f, "e"),
            Generator::F => write!(f, "f"),
            Generator::Z => write!(f, "z"),
            Generator::X(i) => write!(f, "x({})", i),
            Generator::Y(i) => write!(f, "y({})", i),
            Generator::S(i, j) => write!(f, "s({},{})", i, j),
        }
    }
}

/// Structure constants: `[a, b]` as a list of `(generator, integer coefficient)`.
pub fn bracket_gens(a: Generator, b: Generator) -> Vec<(Generator, i64)> {
    use Generator::*;
    let mut out: Vec<(Generator, i64)> = Vec::new();
    let mut push = |g: Generator, c: i64| {
        if c != 0 {
            out.push((g, c));
        }
    };
    match (a, b) {
        (H, E) => push(E, 2),
        (E, H) => push(E, -2),
        (H, F) => push(F, -2),
        (F, H) => push(F, 2),
        (E, F) => push(H, 1),
        (F, E) => push(H, -1),
        (X(i), Y(j)) => push(Z, if i == j { 1 } else { 0 }),
        (Y(j), X(i)) => push(Z, if i == j { -1 } else { 0 }),
        (H, X(i)) => push(X(i), 1),
        (X(i), H) => push(X(i), -1),
        (H, Y(i)) => push(Y(i), -1),
        (Y(i), H) => push(Y(i), 1),
        (E, Y(i)) => push(X(i), 1),
        (Y(i), E) => push(X(i), -1),
        (F, X(i)) => push(Y(i), 1),
        (X(i), F) => push(Y(i), -1),
        (S(k, l), X(i)) => {
            // [s_kl, x_i] = delta_li x_k - delta_ki x_l
            if l == i {
                push(X(k), 1);
            }
            if k == i {
                push(X(l), -1);
            }
        }
        (X(i), S(k, l)) => {
            if l == i {
                push(X(k), -1);
            }
            if k == i {
                push(X(l), 1);
            }
        }
        (S(k, l), Y(i)) => {
            if l == i {
                push(Y(k), 1);
            }
            if k == i {
                push(Y(l), -1);
            }
        }
        (Y(i), S(k, l)) => {
            if l == i {
                push(Y(k), -1);
            }
            if k == i {
                push(Y(l), 1);
            }
        }
        (S(i, j), S(k, l)) => {
            // [s_ij, s_kl] = d_kj s_il + d_il s_jk + d_lj s_ki + d_ki s_lj
            let mut term = |p: usize, q: usize, c: i64| {
                if p != q && c != 0 {
                    let (g, sign) = Generator::s_signed(p, q).unwrap();
                    push(g, c * sign);
                }
            };
            if k == j {
                term(i, l, 1);
            }
            if i == l {
                term(j, k, 1);
            }
            if l == j {
                term(k, i, 1);
            }
            if k == i {
                term(l, j, 1);
            }
        }
        _ => {}
    }
    // merge duplicate generators (s_ij brackets can repeat a key)
    let mut merged: BTreeMap<Generator, i64> = BTreeMap::new();
    for (g, c) in out {
        *merged.entry(g).or_insert(0) += c;
    }
    merged.into_iter().filter(|(_, c)| *c != 0).collect()
}

/// A finitely supported linear combination of basis generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieElement {
    n: usize,
    terms: BTreeMap<Generator, Scalar>,
}

impl LieElement {
    pub fn zero(n: usize) -> Self {
        LieElement { n, terms: BTreeMap::new() }
    }

    pub fn generator(g: Generator, n: usize) -> Result<Self, Error> {
        g.validate(n)?;
        let mut e = LieElement::zero(n);
        e.add_term(g, Scalar::one());
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Generator, Scalar> {
        &self.terms
    }

    pub fn add_term(&mut self, g: Generator, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(g).or_insert_with(Scalar::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&g);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(*g, c.clone());
        }
        out
    }

    pub fn neg(&self) -> LieElement {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn scale(&self, c: &Scalar) -> LieElement {
        let mut out = LieElement::zero(self.n);
        for (g, v) in &self.terms {
            out.add_term(*g, v.mul(c));
        }
        out
    }

    /// Bilinear extension of the structure-constant table.
    pub fn bracket(&self, other: &LieElement) -> Result<LieElement, Error> {
        if self.n != other.n {
            return Err(Error::RankMismatch { expected: self.n, got: other.n });
        }
        let mut out = LieElement::zero(self.n);
        for (ga, ca) in &self.terms {
            for (gb, cb) in &other.terms {
                let c = ca.mul(cb);
                for (g, k) in bracket_gens(*ga, *gb) {
                    out.add_term(g, c.scale_int(k));
                }
            }
        }
        Ok(out)
    }

    /// The twist automorphism: e -> -f, f -> -e, h -> -h, x_i -> -y_i,
    /// y_i -> x_i, s_ij -> s_ij, z -> z.
    pub fn tau(&self) -> LieElement {
        let mut out = LieElement::zero(self.n);
        for (g, c) in &self.terms {
            let (img, sign) = tau_gen(*g);
            out.add_term(img, c.scale_int(sign));
        }
        out
    }
}

/// tau on a single generator, as `(image, sign)`.
pub fn tau_gen(g: Generator) -> (Generator, i64) {
    use Generator::*;
    match g {
        E => (F, -1),
        F => (E, -1),
        H => (H, -1),
        X(i) => (Y(i), -1),
        Y(i) => (X(i), 1),
        S(i, j) => (S(i, j), 1),
        Z => (Z, 1),
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, c) in &self.terms {
            let text = c.to_string();
            let (neg, body) = if let Some(stripped) = text.strip_prefix('-') {
                (true, stripped.to_string())
            } else {
                (false, text)
            };
            let needs_parens = body.contains('+') || body.contains('-');
            let coeff = if body == "1" {
                String::new()
            } else if needs_parens {
                format!("({})*", if neg { format!("-{}", body) } else { body.clone() })
            } else {
                format!("{}*", body)
            };
            let show_neg = neg && !needs_parens;
            if first {
                write!(f, "{}{}{}", if show_neg { "-" } else { "" }, coeff, g)?;
                first = false;
            } else if show_neg {
                write!(f, " - {}{}", coeff, g)?;
            } else {
                write!(f, " + {}{}", coeff, g)?;
            }
        }
        Ok(())
    }
}

/// Parse a sum of scalar-times-generator-word terms, e.g.
/// `"2*e - 3*x(1) + s(1,2)"` or `"e*f^2 - 1/2*h"`.
pub fn parse_words(
    input: &str,
    n: usize,
    tower: Option<&Arc<Tower>>,
) -> Result<Vec<(Scalar, Vec<Generator>)>, Error> {
    let mut out = Vec::new();
    for (sign, term) in split_signed_terms(input)? {
        let mut coeff = Scalar::from_int(sign);
        let mut word = Vec::new();
        for factor in term.split('*') {
            let factor = factor.trim();
            if factor.is_empty() {
                return Err(Error::Parse(format!("empty factor in '{}'", term)));
            }
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => {
                    let exp: u32 = e.trim().parse().map_err(|_| {
                        Error::Parse(format!("bad exponent in '{}'", factor))
                    })?;
                    (b.trim(), exp)
                }
                None => (factor, 1),
            };
            if let Some((g, sign)) = parse_generator(base)? {
                g.validate(n)?;
                if sign < 0 {
                    coeff = coeff.neg();
                }
                for _ in 0..exp {
                    word.push(g);
                }
            } else {
                let c = parse_scalar(base, tower)?;
                coeff = coeff.mul(&c.pow(exp));
            }
        }
        out.push((coeff, word));
    }
    Ok(out)
}

/// Parse a purely linear expression into a [`LieElement`].
pub fn parse_lie_element(
    input: &str,
    n: usize,
    tower: Option<&Arc<Tower>>,
) -> Result<LieElement, Error> {
    let mut out = LieElement::zero(n);
    for (coeff, word) in parse_words(input, n, tower)? {
        match word.len() {
            0 => {
                return Err(Error::Parse(format!(
                    "'{}': constant term is not a Lie algebra element",
                    input
                )))
            }
            1 => out.add_term(word[0], coeff),
            _ => {
                return Err(Error::Parse(format!(
                    "'{}': products of generators are not Lie algebra elements",
                    input
                )))
            }
        }
    }
    Ok(out)
}

/// Try to read a generator token: `h e f z x(1) y(2) s(1,2)`.
/// Returns `Ok(None)` when the token is not generator-shaped.
fn parse_generator(token: &str) -> Result<Option<(Generator, i64)>, Error> {
    let token = token.trim();
    match token {
        "h" => return Ok(Some((Generator::H, 1))),
        "e" => return Ok(Some((Generator::E, 1))),
        "f" => return Ok(Some((Generator::F, 1))),
        "z" => return Ok(Some((Generator::Z, 1))),
        _ => {}
    }
    let Some(rest) = token
        .strip_prefix('x')
        .map(|r| ('x', r))
        .or_else(|| token.strip_prefix('y').map(|r| ('y', r)))
        .or_else(|| token.strip_prefix("s(").map(|r| ('s', r)))
    else {
        return Ok(None);
    };
    match rest {
        ('x', r) | ('y', r) => {
            let inner = r
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("bad generator '{}'", token)))?;
            let i: usize = inner
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index in '{}'", token)))?;
            Ok(Some(if rest.0 == 'x' {
                (Generator::X(i), 1)
            } else {
                (Generator::Y(i), 1)
            }))
        }
        ('s', r) => {
            let inner = r
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("bad generator '{}'", token)))?;
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad generator '{}'", token)))?;
            let i: usize = a
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index in '{}'", token)))?;
            let j: usize = b
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index in '{}'", token)))?;
            let (g, sign) = Generator::s_signed(i, j)?;
            Ok(Some((g, sign)))
        }
        _ => unreachable!(),
    }
}

/// Element of gl_{2n} + C^{2n} + Cz, the ambient space of the matrix oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleElement {
    pub mat: Matrix,
    pub vec: Vec<Scalar>,
    pub z: Scalar,
}

/// The matrix realization of the algebra: sl_2 and so_n as block matrices in
/// gl_{2n}, the Heisenberg part as vectors in C^{2n}, z as a separate channel.
pub struct MatrixRealization {
    n: usize,
}

impl MatrixRealization {
    pub fn new(n: usize) -> Self {
        MatrixRealization { n }
    }

    pub fn image(&self, g: Generator) -> OracleElement {
        let n = self.n;
        let dim = 2 * n;
        let mut mat = Matrix::zeros(dim, dim);
        let mut vec = vec![Scalar::zero(); dim];
        let mut z = Scalar::zero();
        match g {
            Generator::H => {
                for k in 0..n {
                    mat.set(k, k, Scalar::one());
                    mat.set(n + k, n + k, Scalar::from_int(-1));
                }
            }
            Generator::E => {
                for k in 0..n {
                    mat.set(k, n + k, Scalar::one());
                }
            }
            Generator::F => {
                for k in 0..n {
                    mat.set(n + k, k, Scalar::one());
                }
            }
            Generator::S(i, j) => {
                let (i, j) = (i - 1, j - 1);
                for block in [0, n] {
                    mat.set(block + i, block + j, Scalar::one());
                    mat.set(block + j, block + i, Scalar::from_int(-1));
                }
            }
            Generator::X(k) => vec[k - 1] = Scalar::one(),
            Generator::Y(k) => vec[n + k - 1] = Scalar::one(),
            Generator::Z => z = Scalar::one(),
        }
        OracleElement { mat, vec, z }
    }

    pub fn image_of(&self, elem: &LieElement) -> OracleElement {
        let dim = 2 * self.n;
        let mut acc = OracleElement {
            mat: Matrix::zeros(dim, dim),
            vec: vec![Scalar::zero(); dim],
            z: Scalar::zero(),
        };
        for (g, c) in elem.terms() {
            let img = self.image(*g);
            acc.mat = acc.mat.add(&img.mat.scale(c));
            for (slot, v) in acc.vec.iter_mut().zip(&img.vec) {
                *slot = slot.add(&v.mul(c));
            }
            acc.z = acc.z.add(&img.z.mul(c));
        }
        acc
    }

    /// Bracket in the ambient space: matrix commutator, matrix action on the
    /// vector part, and the symplectic form feeding the z channel.
    pub fn bracket(&self, a: &OracleElement, b: &OracleElement) -> OracleElement {
        let n = self.n;
        let mat = a.mat.mul(&b.mat).sub(&b.mat.mul(&a.mat));
        let av = a.mat.apply(&b.vec);
        let bv = b.mat.apply(&a.vec);
        let vec: Vec<Scalar> = av.iter().zip(&bv).map(|(x, y)| x.sub(y)).collect();
        let mut z = Scalar::zero();
        for k in 0..n {
            z = z.add(&a.vec[k].mul(&b.vec[n + k]));
            z = z.sub(&a.vec[n + k].mul(&b.vec[k]));
        }
        OracleElement { mat, vec, z }
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct Violation {
    pub kind: String,
    pub generators: Vec<String>,
    pub detail: String,
}

#[derive(Serialize, Debug, Clone)]
pub struct StructureReport {
    pub n: usize,
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub violations: Vec<Violation>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Optional fault injection for testing the checker itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of `[e, f]`.
    FlipEF,
}

fn faulty_bracket(a: Generator, b: Generator, fault: Option<Fault>) -> Vec<(Generator, i64)> {
    let table = bracket_gens(a, b);
    match (fault, a, b) {
        (Some(Fault::FlipEF), Generator::E, Generator::F)
        | (Some(Fault::FlipEF), Generator::F, Generator::E) => {
            table.into_iter().map(|(g, c)| (g, -c)).collect()
        }
        _ => table,
    }
}

/// Check (i) the Jacobi identity on all basis triples and (ii) agreement of
/// the structure-constant bracket with the matrix-oracle commutator on all
/// basis pairs.
pub fn verify_structure(n: usize) -> StructureReport {
    verify_structure_with_fault(n, None)
}

pub fn verify_structure_with_fault(n: usize, fault: Option<Fault>) -> StructureReport {
    let basis = Generator::basis(n);
    let oracle = MatrixRealization::new(n);
    let mut violations = Vec::new();

    let bracket_elem = |a: Generator, b: Generator| -> LieElement {
        let mut out = LieElement::zero(n);
        for (g, c) in faulty_bracket(a, b, fault) {
            out.add_term(g, Scalar::from_int(c));
        }
        out
    };

    let mut pairs = 0;
    for &a in &basis {
        for &b in &basis {
            pairs += 1;
            let structural = bracket_elem(a, b);
            let expected = oracle.image_of(&structural);
            let got = oracle.bracket(&oracle.image(a), &oracle.image(b));
            if expected != got {
                violations.push(Violation {
                    kind: "oracle-mismatch".into(),
                    generators: vec![a.to_string(), b.to_string()],
                    detail: format!(
                        "structure table gives [{} , {}] = {} but the matrix commutator disagrees",
                        a, b, structural
                    ),
                });
            }
        }
    }

    let mut triples = 0;
    for &a in &basis {
        for &b in &basis {
            for &c in &basis {
                triples += 1;
                let mut jac = LieElement::zero(n);
                for (inner, inner_elem) in [
                    (a, bracket_elem(b, c)),
                    (b, bracket_elem(c, a)),
                    (c, bracket_elem(a, b)),
                ] {
                    for (g, coeff) in inner_elem.terms() {
                        for (out_g, k) in faulty_bracket(inner, *g, fault) {
                            jac.add_term(out_g, coeff.scale_int(k));
                        }
                    }
                }
                if !jac.is_zero() {
                    violations.push(Violation {
                        kind: "jacobi".into(),
                        generators: vec![a.to_string(), b.to_string(), c.to_string()],
                        detail: format!("jacobi sum is {}", jac),
                    });
                }
            }
        }
    }

    StructureReport { n, pairs_checked: pairs, triples_checked: triples, violations }
}
