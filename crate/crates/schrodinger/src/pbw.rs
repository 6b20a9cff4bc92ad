//! The enveloping algebra with PBW normal ordering.
//!
//! Monomials live in the fixed order: all s_ij (lexicographic), then f, h, e,
//! then y_1..y_n, then x_1..x_n, then z. Straightening uses the single swap
//! rule `g*h = h*g + [g,h]` with a memo table per rank; coefficients produced
//! by straightening are rational, so cached entries are tower-free and safe
//! to reuse under any central charge.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Error;
use crate::lie::{bracket_gens, Generator};
use crate::scalar::Scalar;

/// Exponent vector over the fixed generator order for some rank `n`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct PBWMonomial {
    exps: Vec<u32>,
}

impl PBWMonomial {
    pub fn one(n: usize) -> Self {
        PBWMonomial { exps: vec![0; Generator::count(n)] }
    }

    pub fn generator(g: Generator, n: usize) -> Self {
        let mut m = PBWMonomial::one(n);
        m.exps[g.pbw_index(n)] = 1;
        m
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn exp(&self, idx: usize) -> u32 {
        self.exps[idx]
    }

    pub fn exp_of(&self, g: Generator, n: usize) -> u32 {
        self.exps[g.pbw_index(n)]
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    fn first_index(&self) -> Option<usize> {
        self.exps.iter().position(|&e| e > 0)
    }

    fn last_index(&self) -> Option<usize> {
        self.exps.iter().rposition(|&e| e > 0)
    }

    fn bumped(&self, idx: usize) -> PBWMonomial {
        let mut m = self.clone();
        m.exps[idx] += 1;
        m
    }

    fn decremented(&self, idx: usize) -> PBWMonomial {
        let mut m = self.clone();
        debug_assert!(m.exps[idx] > 0);
        m.exps[idx] -= 1;
        m
    }

    pub fn with_exp(mut self, g: Generator, n: usize, e: u32) -> Self {
        self.exps[g.pbw_index(n)] = e;
        self
    }

    /// Graded (symmetric-algebra) product: exponent-wise sum.
    pub fn graded_mul(&self, other: &PBWMonomial) -> PBWMonomial {
        PBWMonomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Letters in PBW order with multiplicities.
    pub fn letters(&self, n: usize) -> impl Iterator<Item = (Generator, u32)> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(move |(i, &e)| (Generator::from_pbw_index(i, n), e))
    }

    pub fn display(&self, n: usize) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (g, e) in self.letters(n) {
            if e == 1 {
                parts.push(g.to_string());
            } else {
                parts.push(format!("{}^{}", g, e));
            }
        }
        parts.join(" ")
    }
}

type Terms = BTreeMap<PBWMonomial, Scalar>;

fn add_term(acc: &mut Terms, m: PBWMonomial, c: Scalar) {
    if c.is_zero() {
        return;
    }
    let entry = acc.entry(m).or_insert_with(Scalar::zero);
    *entry = entry.add(&c);
    if entry.is_zero() {
        // re-fetch to remove; key clone avoided by retain below is overkill
        acc.retain(|_, v| !v.is_zero());
    }
}

/// Per-rank straightening engine with a synchronized memo table.
pub struct Straightener {
    n: usize,
    degree_bound: u32,
    memo: Mutex<HashMap<(usize, PBWMonomial), Arc<Terms>>>,
}

static REGISTRY: OnceLock<Mutex<HashMap<usize, Arc<Straightener>>>> = OnceLock::new();

impl Straightener {
    /// Shared instance for rank `n` (memo reused across the process).
    pub fn shared(n: usize) -> Arc<Straightener> {
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = reg.lock().unwrap();
        map.entry(n)
            .or_insert_with(|| {
                Arc::new(Straightener {
                    n,
                    degree_bound: 12,
                    memo: Mutex::new(HashMap::new()),
                })
            })
            .clone()
    }

    /// `g * m`, normal ordered. The workhorse of the crate.
    pub fn gen_times_mono(&self, g: Generator, m: &PBWMonomial) -> Arc<Terms> {
        let n = self.n;
        let gidx = g.pbw_index(n);
        // z is central: prepend is wrong positionally, but bump is exact
        if matches!(g, Generator::Z) {
            let mut out = Terms::new();
            out.insert(m.bumped(gidx), Scalar::one());
            return Arc::new(out);
        }
        match m.first_index() {
            None => {
                let mut out = Terms::new();
                out.insert(m.bumped(gidx), Scalar::one());
                return Arc::new(out);
            }
            Some(h) if gidx <= h => {
                let mut out = Terms::new();
                out.insert(m.bumped(gidx), Scalar::one());
                return Arc::new(out);
            }
            _ => {}
        }
        let key = (gidx, m.clone());
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let h_idx = m.first_index().unwrap();
        let h_gen = Generator::from_pbw_index(h_idx, n);
        let m1 = m.decremented(h_idx);
        let mut acc = Terms::new();
        // g*m = h*(g*m1) + [g,h]*m1
        let inner = self.gen_times_mono(g, &m1);
        for (mono, c) in inner.iter() {
            for (mono2, c2) in self.gen_times_mono(h_gen, mono).iter() {
                add_term(&mut acc, mono2.clone(), c.mul(c2));
            }
        }
        for (bg, k) in bracket_gens(g, h_gen) {
            for (mono2, c2) in self.gen_times_mono(bg, &m1).iter() {
                add_term(&mut acc, mono2.clone(), c2.scale_int(k));
            }
        }
        let result = Arc::new(acc);
        if m.degree() < self.degree_bound {
            self.memo
                .lock()
                .unwrap()
                .insert(key, result.clone());
        }
        result
    }

    /// `m1 * terms`, normal ordered: peel letters of `m1` from the right.
    fn mono_times_terms(&self, m1: &PBWMonomial, terms: &Terms) -> Terms {
        match m1.last_index() {
            None => terms.clone(),
            Some(idx) => {
                let g = Generator::from_pbw_index(idx, self.n);
                let mut acc = Terms::new();
                for (mono, c) in terms {
                    for (mono2, c2) in self.gen_times_mono(g, mono).iter() {
                        add_term(&mut acc, mono2.clone(), c.mul(c2));
                    }
                }
                self.mono_times_terms(&m1.decremented(idx), &acc)
            }
        }
    }
}

/// A normal-ordered element of the enveloping algebra, optionally reduced
/// modulo `z - zdot`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UEAElement {
    n: usize,
    reduced: Option<Scalar>,
    terms: Terms,
}

impl UEAElement {
    pub fn zero(n: usize) -> Self {
        UEAElement { n, reduced: None, terms: Terms::new() }
    }

    pub fn one(n: usize) -> Self {
        UEAElement::from_term(PBWMonomial::one(n), Scalar::one(), n)
    }

    pub fn from_term(m: PBWMonomial, c: Scalar, n: usize) -> Self {
        let mut terms = Terms::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        UEAElement { n, reduced: None, terms }
    }

    pub fn generator(g: Generator, n: usize) -> Result<Self, Error> {
        g.validate(n)?;
        Ok(UEAElement::from_term(PBWMonomial::generator(g, n), Scalar::one(), n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn reduction(&self) -> Option<&Scalar> {
        self.reduced.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: PBWMonomial, c: Scalar) {
        add_term(&mut self.terms, m, c);
    }

    pub fn add(&self, other: &UEAElement) -> UEAElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &UEAElement) -> UEAElement {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> UEAElement {
        let mut out = UEAElement::zero(self.n);
        out.reduced = self.reduced.clone();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.mul(c));
        }
        out
    }

    /// Associative product; both operands must share rank and reduction status.
    pub fn mul(&self, other: &UEAElement) -> Result<UEAElement, Error> {
        if self.n != other.n {
            return Err(Error::RankMismatch { expected: self.n, got: other.n });
        }
        if self.reduced != other.reduced {
            return Err(Error::ReductionMismatch(format!(
                "{:?} vs {:?}",
                self.reduced.as_ref().map(|s| s.to_string()),
                other.reduced.as_ref().map(|s| s.to_string())
            )));
        }
        let st = Straightener::shared(self.n);
        let mut out = UEAElement::zero(self.n);
        out.reduced = self.reduced.clone();
        for (m1, c1) in &self.terms {
            let product = st.mono_times_terms(m1, &other.terms);
            for (m, c) in product {
                out.add_term(m, c.mul(c1));
            }
        }
        if out.reduced.is_some() {
            out = out.substitute_z();
        }
        Ok(out)
    }

    /// Replace every z by the stored central charge (internal; assumes reduced).
    fn substitute_z(mut self) -> UEAElement {
        let zdot = self.reduced.clone().expect("reduced element");
        let z_idx = Generator::Z.pbw_index(self.n);
        let mut terms = Terms::new();
        for (m, c) in std::mem::take(&mut self.terms) {
            let k = m.exp(z_idx);
            if k == 0 {
                add_term(&mut terms, m, c);
            } else {
                let mut m2 = m.clone();
                for _ in 0..k {
                    m2 = m2.decremented(z_idx);
                }
                add_term(&mut terms, m2, c.mul(&zdot.pow(k)));
            }
        }
        self.terms = terms;
        self
    }

    /// Pass to the quotient by `z - zdot`.
    pub fn reduce_central(&self, zdot: &Scalar) -> Result<UEAElement, Error> {
        if self.reduced.is_some() {
            return Err(Error::ReductionMismatch("already reduced".into()));
        }
        let mut out = self.clone();
        out.reduced = Some(zdot.clone());
        Ok(out.substitute_z())
    }
}

impl fmt::Display for UEAElement {
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

/// All PBW monomials of total degree at most `max_degree`, optionally with a
/// z slot.
pub fn monomials_up_to(n: usize, max_degree: u32, include_z: bool) -> Vec<PBWMonomial> {
    let count = Generator::count(n);
    let slots = if include_z { count } else { count - 1 };
    let mut out = Vec::new();
    let mut current = PBWMonomial::one(n);
    fn rec(
        slot: usize,
        slots: usize,
        remaining: u32,
        current: &mut PBWMonomial,
        out: &mut Vec<PBWMonomial>,
    ) {
        if slot == slots {
            out.push(current.clone());
            return;
        }
        for e in 0..=remaining {
            current.exps[slot] = e;
            rec(slot + 1, slots, remaining - e, current, out);
        }
        current.exps[slot] = 0;
    }
    rec(0, slots, max_degree, &mut current, &mut out);
    out
}

/// Normal-order a linear combination of generator words.
pub fn normal_order(words: &[(Scalar, Vec<Generator>)], n: usize) -> UEAElement {
    let st = Straightener::shared(n);
    let mut out = UEAElement::zero(n);
    for (coeff, word) in words {
        let mut terms = Terms::new();
        terms.insert(PBWMonomial::one(n), Scalar::one());
        for g in word.iter().rev() {
            let mut next = Terms::new();
            for (mono, c) in &terms {
                for (m2, c2) in st.gen_times_mono(*g, mono).iter() {
                    add_term(&mut next, m2.clone(), c.mul(c2));
                }
            }
            terms = next;
        }
        for (m, c) in terms {
            out.add_term(m, c.mul(coeff));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::parse_words;

    fn no(expr: &str, n: usize) -> UEAElement {
        normal_order(&parse_words(expr, n, None).unwrap(), n)
    }

    #[test]
    fn single_bracket_examples() {
        assert_eq!(no("x(1)*y(1)", 1).to_string(), "y(1) x(1) + z");
        assert_eq!(no("e*f", 1).to_string(), "f e + h");
        assert_eq!(no("f*e", 1).to_string(), "f e");
    }

    #[test]
    fn repeated_straightening() {
        // e f^2 = f^2 e + 2 f h - 2 f
        assert_eq!(no("e*f^2", 1), no("f^2*e + 2*f*h - 2*f", 1));
    }

    #[test]
    fn idempotent_on_ordered() {
        let a = no("s(1,2)^2*f^3*h*e*y(1)*x(2)", 2);
        assert_eq!(a.terms().len(), 1);
        let again = normal_order(
            &[(Scalar::one(), vec![])],
            2,
        );
        assert!(!again.is_zero());
        // normal ordering an already-ordered monomial returns it unchanged
        let (m, c) = a.terms().iter().next().unwrap();
        assert_eq!(m.display(2), "s(1,2)^2 f^3 h e y(1) x(2)");
        assert!(c.is_one());
    }

    #[test]
    fn commutator_lifts_bracket() {
        // normal_order(a b) - normal_order(b a) = normal_order([a,b]) on all pairs
        for n in 1..=2 {
            for a in Generator::basis(n) {
                for b in Generator::basis(n) {
                    let ab = no(&format!("{}*{}", a, b), n);
                    let ba = no(&format!("{}*{}", b, a), n);
                    let mut rhs = UEAElement::zero(n);
                    for (g, k) in bracket_gens(a, b) {
                        rhs.add_term(PBWMonomial::generator(g, n), Scalar::from_int(k));
                    }
                    assert_eq!(ab.sub(&ba), rhs, "pair ({}, {})", a, b);
                }
            }
        }
    }

    #[test]
    fn associativity_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3usize {
            let basis = Generator::basis(n);
            let random_word = |rng: &mut rand_chacha::ChaCha8Rng| {
                let len = rng.gen_range(1..=3);
                let word: Vec<Generator> =
                    (0..len).map(|_| basis[rng.gen_range(0..basis.len())]).collect();
                normal_order(&[(Scalar::one(), word)], n)
            };
            let rounds = if n == 3 { 100 } else { 200 };
            for _ in 0..rounds {
                let a = random_word(&mut rng);
                let b = random_word(&mut rng);
                let c = random_word(&mut rng);
                let left = a.mul(&b).unwrap().mul(&c).unwrap();
                let right = a.mul(&b.mul(&c).unwrap()).unwrap();
                assert_eq!(left, right);
            }
        }
    }

    #[test]
    fn associativity_mixed_example() {
        let n = 1;
        let ef = no("e*f", n);
        let x = no("x(1)", n);
        let e = no("e", n);
        let f = no("f", n);
        assert_eq!(ef.mul(&x).unwrap(), e.mul(&f.mul(&x).unwrap()).unwrap());
    }

    #[test]
    fn degree_filtration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 2;
        let basis = Generator::basis(n);
        for _ in 0..100 {
            let word_a: Vec<Generator> =
                (0..rng.gen_range(1..=3)).map(|_| basis[rng.gen_range(0..basis.len())]).collect();
            let word_b: Vec<Generator> =
                (0..rng.gen_range(1..=3)).map(|_| basis[rng.gen_range(0..basis.len())]).collect();
            let a = normal_order(&[(Scalar::one(), word_a.clone())], n);
            let b = normal_order(&[(Scalar::one(), word_b.clone())], n);
            let prod = a.mul(&b).unwrap();
            let top = (word_a.len() + word_b.len()) as u32;
            assert!(prod.degree() <= top);
            // top graded term agrees with the symmetric-algebra product
            let mut sym = PBWMonomial::one(n);
            for g in word_a.iter().chain(&word_b) {
                sym = sym.graded_mul(&PBWMonomial::generator(*g, n));
            }
            let coeff = prod.terms().get(&sym);
            assert!(coeff.is_some_and(|c| c.is_one()), "missing top term");
            for m in prod.terms().keys() {
                assert!(m.degree() <= top);
            }
        }
    }

    #[test]
    fn central_reduction() {
        let n = 1;
        let one = Scalar::one();
        let z = no("z", n);
        assert_eq!(z.reduce_central(&one).unwrap(), {
            let mut u = UEAElement::one(n);
            u.reduced = Some(one.clone());
            u
        });
        // x1 y1 = y1 x1 + z; with zdot = 1 the z becomes 1
        let xy = no("x(1)*y(1)", n).reduce_central(&one).unwrap();
        let expected = no("y(1)*x(1) + 1*z", n); // placeholder shape check below
        assert_eq!(xy.terms().len(), 2);
        assert!(xy.terms().contains_key(&PBWMonomial::one(n)));
        drop(expected);
        // h is z-free
        let h = no("h", n).reduce_central(&one).unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.to_string(), "h");
        // double reduction rejected
        assert!(h.reduce_central(&one).is_err());
    }

    #[test]
    fn mixed_reduction_rejected() {
        let n = 1;
        let a = no("e", n);
        let b = no("f", n).reduce_central(&Scalar::one()).unwrap();
        assert!(a.mul(&b).is_err());
    }
}
