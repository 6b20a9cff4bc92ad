//! Truncated weight modules: input so_n representations, sl_2 highest weight
//! and dense modules, Verma modules over the full algebra, tensor modules
//! through the Weyl realization, singular vectors, simple quotients, the
//! dense rank-one family, and the Harish-Chandra classifier.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Error;
use crate::lie::{bracket_gens, tau_gen, Generator};
use crate::linalg::{Matrix, SpanTracker};
use crate::scalar::{Scalar, Tower};
use crate::weyl::{act as weyl_act, theta_gen, PolyKind, PolyModuleVector, WeylOperator};

/// A finite dimensional so_n-module given by exact matrices for the s_ij.
#[derive(Clone, Debug)]
pub struct SoModule {
    n: usize,
    dim: usize,
    name: String,
    actions: BTreeMap<(usize, usize), Matrix>,
}

impl SoModule {
    /// One-dimensional module with every s_ij acting as zero.
    pub fn trivial(n: usize) -> SoModule {
        let mut actions = BTreeMap::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                actions.insert((i, j), Matrix::zeros(1, 1));
            }
        }
        SoModule { n, dim: 1, name: "trivial".into(), actions }
    }

    /// The natural n-dimensional module: s_ij acts as e_ij - e_ji.
    pub fn natural(n: usize) -> SoModule {
        let mut actions = BTreeMap::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                let mut m = Matrix::zeros(n, n);
                m.set(i - 1, j - 1, Scalar::one());
                m.set(j - 1, i - 1, Scalar::from_int(-1));
                actions.insert((i, j), m);
            }
        }
        SoModule { n, dim: n, name: "natural".into(), actions }
    }

    /// For n = 2 the natural module splits over Q(i) into the two eigenlines
    /// of s_12; this is the line where s_12 acts by `sign * i`.
    pub fn so2_eigenline(sign: i64) -> SoModule {
        let mut m = Matrix::zeros(1, 1);
        m.set(0, 0, Scalar::i().scale_int(sign.signum()));
        let mut actions = BTreeMap::new();
        actions.insert((1, 2), m);
        SoModule {
            n: 2,
            dim: 1,
            name: format!("so2-line({})", if sign >= 0 { "+" } else { "-" }),
            actions,
        }
    }

    /// User-supplied matrices; the so_n relations are checked up front.
    pub fn user(n: usize, actions: BTreeMap<(usize, usize), Matrix>, name: &str) -> Result<SoModule, Error> {
        let dim = actions
            .values()
            .next()
            .map(|m| m.rows())
            .unwrap_or(1);
        for ((i, j), m) in &actions {
            if *i >= *j || *j > n {
                return Err(Error::InvalidArgument(format!("bad index pair ({}, {})", i, j)));
            }
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::InvalidArgument("matrices of unequal size".into()));
            }
        }
        let module = SoModule { n, dim, name: name.into(), actions };
        module.check_relations()?;
        Ok(module)
    }

    fn check_relations(&self) -> Result<(), Error> {
        for i in 1..=self.n {
            for j in (i + 1)..=self.n {
                for k in 1..=self.n {
                    for l in (k + 1)..=self.n {
                        let a = self.action(i, j);
                        let b = self.action(k, l);
                        let comm = a.mul(&b).sub(&b.mul(&a));
                        let mut expected = Matrix::zeros(self.dim, self.dim);
                        for (g, c) in bracket_gens(Generator::S(i, j), Generator::S(k, l)) {
                            if let Generator::S(p, q) = g {
                                expected = expected.add(&self.action(p, q).scale(&Scalar::from_int(c)));
                            }
                        }
                        if comm != expected {
                            return Err(Error::InvalidArgument(format!(
                                "so_n relations fail on [s({},{}), s({},{})]",
                                i, j, k, l
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Action matrix of s_ij, with the sign convention s_ji = -s_ij.
    pub fn action(&self, i: usize, j: usize) -> Matrix {
        if i < j {
            self.actions[&(i, j)].clone()
        } else {
            self.actions[&(j, i)].neg()
        }
    }

    /// Schur check: the commutant of the action is exactly the scalars.
    pub fn is_irreducible(&self) -> bool {
        // unknowns: X in dim x dim; constraints X A = A X for all generators
        let d = self.dim;
        let mut rows = Vec::new();
        for a in self.actions.values() {
            // (XA - AX)_{pq} = sum_r X_{pr} A_{rq} - A_{pr} X_{rq}
            for p in 0..d {
                for q in 0..d {
                    let mut row = vec![Scalar::zero(); d * d];
                    for r in 0..d {
                        let idx = p * d + r;
                        row[idx] = row[idx].add(a.get(r, q));
                        let idx = r * d + q;
                        row[idx] = row[idx].sub(a.get(p, r));
                    }
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            return d == 1;
        }
        let m = Matrix::from_rows(rows);
        m.kernel().len() == 1
    }
}

/// Kind of a truncated weight sl_2-module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sl2Kind {
    Verma,
    Simple,
    Dense,
}

/// Result of applying a generator to an sl_2 basis vector.
#[allow(clippy::large_enum_variant)]
pub enum Sl2Image {
    /// Genuinely zero in the module.
    Zero,
    /// Leaves the tracked truncation window.
    Out,
    Term(usize, Scalar),
}

/// Truncated weight sl_2-module with explicit one-dimensional weight spaces.
///
/// Verma/Simple have basis f^k w_lambda, k = 0..len; Dense has a window of
/// weight vectors indexed left to right with e acting by 1 and f by the
/// Casimir-determined coefficient.
#[derive(Clone, Debug)]
pub struct Sl2WeightModule {
    pub kind: Sl2Kind,
    lambda: Scalar,
    casimir: Option<Scalar>,
    len: usize,
}

impl Sl2WeightModule {
    pub fn verma(lambda: Scalar, depth: usize) -> Sl2WeightModule {
        Sl2WeightModule { kind: Sl2Kind::Verma, lambda, casimir: None, len: depth + 1 }
    }

    /// The irreducible highest weight module: finite dimensional when the
    /// highest weight is a nonnegative integer, otherwise the full Verma.
    pub fn simple(lambda: Scalar, depth: usize) -> Sl2WeightModule {
        let len = match integer_value(&lambda) {
            Some(m) if m >= 0 => ((m as usize) + 1).min(depth + 1),
            _ => depth + 1,
        };
        Sl2WeightModule { kind: Sl2Kind::Simple, lambda, casimir: None, len }
    }

    /// Dense window module: index k has weight `lambda + 2k - 2*(len/2)`
    /// recentred so index 0 is the left edge; `ef` eigenvalue is determined
    /// by the Casimir parameter.
    pub fn dense(lambda: Scalar, casimir: Scalar, half_window: usize) -> Sl2WeightModule {
        Sl2WeightModule {
            kind: Sl2Kind::Dense,
            lambda,
            casimir: Some(casimir),
            len: 2 * half_window + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn highest_weight(&self) -> &Scalar {
        &self.lambda
    }

    pub fn weight(&self, idx: usize) -> Scalar {
        match self.kind {
            Sl2Kind::Verma | Sl2Kind::Simple => {
                self.lambda.sub(&Scalar::from_int(2 * idx as i64))
            }
            Sl2Kind::Dense => {
                let center = (self.len / 2) as i64;
                self.lambda.add(&Scalar::from_int(2 * (idx as i64 - center)))
            }
        }
    }

    pub fn apply_e(&self, idx: usize) -> Sl2Image {
        match self.kind {
            Sl2Kind::Verma | Sl2Kind::Simple => {
                if idx == 0 {
                    Sl2Image::Zero
                } else {
                    // e f^k = k (lambda - k + 1) f^{k-1} on the highest weight line
                    let k = Scalar::from_int(idx as i64);
                    let coeff = k.mul(
                        &self.lambda.sub(&Scalar::from_int(idx as i64 - 1)),
                    );
                    Sl2Image::Term(idx - 1, coeff)
                }
            }
            Sl2Kind::Dense => {
                if idx + 1 >= self.len {
                    Sl2Image::Out
                } else {
                    Sl2Image::Term(idx + 1, Scalar::one())
                }
            }
        }
    }

    pub fn apply_f(&self, idx: usize) -> Sl2Image {
        match self.kind {
            Sl2Kind::Verma | Sl2Kind::Simple => {
                if idx + 1 < self.len {
                    Sl2Image::Term(idx + 1, Scalar::one())
                } else if self.kind == Sl2Kind::Simple
                    && integer_value(&self.lambda).is_some_and(|m| m >= 0 && self.len == m as usize + 1)
                {
                    Sl2Image::Zero
                } else {
                    Sl2Image::Out
                }
            }
            Sl2Kind::Dense => {
                if idx == 0 {
                    Sl2Image::Out
                } else {
                    // [e, f] = h forces ef - fe = weight; with e acting by 1
                    // the f coefficient at weight mu is c - mu(mu-2)/4
                    let mu = self.weight(idx);
                    let coeff = self
                        .casimir
                        .clone()
                        .expect("dense module has casimir")
                        .sub(&mu.mul(&mu.sub(&Scalar::from_int(2))).mul(&Scalar::from_ratio(1, 4)));
                    Sl2Image::Term(idx - 1, coeff)
                }
            }
        }
    }
}

fn integer_value(s: &Scalar) -> Option<i64> {
    use num_traits::{One, ToPrimitive, Zero};
    let qi = s.as_qi().ok()?;
    if !qi.im.is_zero() || !qi.re.denom().is_one() {
        return None;
    }
    qi.re.numer().to_i64()
}

/// Where a module came from, which also records what is exactly known about
/// its support boundaries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Verma,
    Tensor,
    Polynomial,
    Dense,
    Quotient,
    Localized,
    TauTwist,
}

/// An h-graded module truncated to a finite window of weights.
///
/// Weight at integer offset `d` is `base_weight + d`. The action of a
/// generator at offset `d` is a matrix into offset `d + shift`; a matrix is
/// stored only where the target space is exactly known (tracked, or beyond a
/// genuinely bounded edge, where it has zero rows).
#[derive(Clone, Debug)]
pub struct WeightModule {
    n: usize,
    zdot: Scalar,
    base_weight: Scalar,
    dims: BTreeMap<i64, usize>,
    actions: BTreeMap<Generator, BTreeMap<i64, Matrix>>,
    provenance: Provenance,
    bounded_above: bool,
    bounded_below: bool,
}

impl WeightModule {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        n: usize,
        zdot: Scalar,
        base_weight: Scalar,
        dims: BTreeMap<i64, usize>,
        actions: BTreeMap<Generator, BTreeMap<i64, Matrix>>,
        provenance: Provenance,
        bounded_above: bool,
        bounded_below: bool,
    ) -> WeightModule {
        WeightModule {
            n,
            zdot,
            base_weight,
            dims,
            actions,
            provenance,
            bounded_above,
            bounded_below,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zdot(&self) -> &Scalar {
        &self.zdot
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn bounded_above(&self) -> bool {
        self.bounded_above
    }

    pub fn bounded_below(&self) -> bool {
        self.bounded_below
    }

    pub fn offsets(&self) -> Vec<i64> {
        self.dims.keys().copied().collect()
    }

    pub fn top_offset(&self) -> Option<i64> {
        self.dims.iter().rev().find(|(_, &d)| d > 0).map(|(&o, _)| o)
    }

    pub fn dim(&self, offset: i64) -> usize {
        self.dims.get(&offset).copied().unwrap_or(0)
    }

    pub fn weight(&self, offset: i64) -> Scalar {
        self.base_weight.add(&Scalar::from_int(offset))
    }

    pub fn base_weight(&self) -> &Scalar {
        &self.base_weight
    }

    /// Support: tracked offsets with a nonzero weight space.
    pub fn support(&self) -> Vec<i64> {
        self.dims
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&o, _)| o)
            .collect()
    }

    pub fn action(&self, g: Generator, offset: i64) -> Option<&Matrix> {
        self.actions.get(&g).and_then(|per| per.get(&offset))
    }

    /// Matrix of an arbitrary Lie element at an offset (all terms of the
    /// element must shift the weight equally, e.g. a single generator with
    /// Cartan corrections is not allowed).
    pub fn action_of(&self, terms: &[(Generator, Scalar)], offset: i64) -> Option<Matrix> {
        let shift = terms.first()?.0.weight_shift();
        if terms.iter().any(|(g, _)| g.weight_shift() != shift) {
            return None;
        }
        let target = self.dim(offset + shift);
        let mut acc = Matrix::zeros(target, self.dim(offset));
        for (g, c) in terms {
            let m = self.action(*g, offset)?;
            acc = acc.add(&m.scale(c));
        }
        Some(acc)
    }

    /// The master invariant: action([a, b]) equals the commutator of the
    /// action matrices wherever everything needed is tracked. Returns the
    /// list of violations.
    pub fn bracket_fidelity_failures(&self) -> Vec<String> {
        let mut failures = Vec::new();
        let basis = Generator::basis(self.n);
        for &a in &basis {
            for &b in &basis {
                let sa = a.weight_shift();
                let sb = b.weight_shift();
                for &d in self.dims.keys() {
                    let (Some(b_at), Some(a_after)) =
                        (self.action(b, d), self.action(a, d + sb))
                    else {
                        continue;
                    };
                    let (Some(a_at), Some(b_after)) =
                        (self.action(a, d), self.action(b, d + sa))
                    else {
                        continue;
                    };
                    let comm = a_after.mul(b_at).sub(&b_after.mul(a_at));
                    let mut expected = Matrix::zeros(self.dim(d + sa + sb), self.dim(d));
                    let mut known = true;
                    for (g, c) in bracket_gens(a, b) {
                        match self.action(g, d) {
                            Some(m) => {
                                expected = expected.add(&m.scale(&Scalar::from_int(c)))
                            }
                            None => known = false,
                        }
                    }
                    if known && comm != expected {
                        failures.push(format!(
                            "bracket fidelity fails for [{}, {}] at offset {}",
                            a, b, d
                        ));
                    }
                }
            }
        }
        failures
    }

    /// h acts diagonally with the labeled weight; z acts by the central charge.
    pub fn grading_failures(&self) -> Vec<String> {
        let mut failures = Vec::new();
        for (&d, &dim) in &self.dims {
            if let Some(h) = self.action(Generator::H, d) {
                let expected = Matrix::identity(dim).scale(&self.weight(d));
                if *h != expected {
                    failures.push(format!("h not diagonal with weight at offset {}", d));
                }
            }
            if let Some(z) = self.action(Generator::Z, d) {
                let expected = Matrix::identity(dim).scale(&self.zdot);
                if *z != expected {
                    failures.push(format!("z not central-scalar at offset {}", d));
                }
            }
        }
        failures
    }
}

/// Internal: build a weight module from an indexed basis and a generator
/// application rule.
struct ModuleBuilder<S: Ord + Clone> {
    n: usize,
    zdot: Scalar,
    base_weight: Scalar,
    states: BTreeMap<i64, Vec<S>>,
    provenance: Provenance,
    bounded_above: bool,
    bounded_below: bool,
}

impl<S: Ord + Clone + std::fmt::Debug> ModuleBuilder<S> {
    fn build<F>(self, mut apply: F) -> WeightModule
    where
        F: FnMut(Generator, &S) -> Vec<(S, Scalar)>,
    {
        let index: BTreeMap<i64, BTreeMap<&S, usize>> = self
            .states
            .iter()
            .map(|(&d, v)| (d, v.iter().enumerate().map(|(i, s)| (s, i)).collect()))
            .collect();
        let dims: BTreeMap<i64, usize> =
            self.states.iter().map(|(&d, v)| (d, v.len())).collect();
        let min_offset = dims.keys().next().copied().unwrap_or(0);
        let max_offset = dims.keys().next_back().copied().unwrap_or(0);
        let mut actions: BTreeMap<Generator, BTreeMap<i64, Matrix>> = BTreeMap::new();
        for g in Generator::basis(self.n) {
            let shift = g.weight_shift();
            let mut per = BTreeMap::new();
            for (&d, states) in &self.states {
                let target = d + shift;
                let beyond_bound = (target > max_offset && self.bounded_above)
                    || (target < min_offset && self.bounded_below);
                let target_dim = if dims.contains_key(&target) {
                    dims[&target]
                } else if beyond_bound {
                    0
                } else {
                    continue; // truncation edge: action unknown here
                };
                let mut m = Matrix::zeros(target_dim, states.len());
                for (col, s) in states.iter().enumerate() {
                    for (img, c) in apply(g, s) {
                        if c.is_zero() {
                            continue;
                        }
                        if target_dim == 0 {
                            panic!(
                                "builder: {} produced a nonzero image outside a bounded edge",
                                g
                            );
                        }
                        let row = *index[&target]
                            .get(&img)
                            .unwrap_or_else(|| panic!("builder: image state {:?} not tracked", img));
                        m.add_assign_at(row, col, &c);
                    }
                }
                per.insert(d, m);
            }
            actions.insert(g, per);
        }
        WeightModule {
            n: self.n,
            zdot: self.zdot,
            base_weight: self.base_weight,
            dims,
            actions,
            provenance: self.provenance,
            bounded_above: self.bounded_above,
            bounded_below: self.bounded_below,
        }
    }
}

/// Basis state of a Verma module: f^m y_1^{r_1}..y_n^{r_n} applied to the
/// V-vector with the given index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct VermaState {
    m: u32,
    r: Vec<u32>,
    v: usize,
}

impl VermaState {
    fn level(&self) -> u32 {
        2 * self.m + self.r.iter().sum::<u32>()
    }
}

/// The Verma module induced from `V` at highest weight `lambda` and central
/// charge `zdot`, truncated `depth` levels below the top.
pub fn verma(v_mod: &SoModule, lambda: &Scalar, zdot: &Scalar, depth: u32) -> WeightModule {
    let n = v_mod.n();
    let mut states: BTreeMap<i64, Vec<VermaState>> = BTreeMap::new();
    for k in 0..=depth {
        let mut level_states = Vec::new();
        for m in 0..=(k / 2) {
            for r in compositions(k - 2 * m, n) {
                for v in 0..v_mod.dim() {
                    level_states.push(VermaState { m, r: r.clone(), v });
                }
            }
        }
        level_states.sort();
        states.insert(-(k as i64), level_states);
    }
    let builder = ModuleBuilder {
        n,
        zdot: zdot.clone(),
        base_weight: lambda.clone(),
        states,
        provenance: Provenance::Verma,
        bounded_above: true,
        bounded_below: false,
    };
    builder.build(|g, s| verma_apply(g, s, v_mod, lambda, zdot))
}

/// Weak compositions of `total` into `parts` nonnegative integers.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Straighten `g * (f^m y^r (x) v)` against the highest weight relations.
fn verma_apply(
    g: Generator,
    s: &VermaState,
    v_mod: &SoModule,
    lambda: &Scalar,
    zdot: &Scalar,
) -> Vec<(VermaState, Scalar)> {
    // Fast paths: lowering operators and centre act freely / by scalars.
    match g {
        Generator::F => {
            return vec![(VermaState { m: s.m + 1, r: s.r.clone(), v: s.v }, Scalar::one())]
        }
        Generator::Y(i) => {
            let mut r = s.r.clone();
            r[i - 1] += 1;
            return vec![(VermaState { m: s.m, r, v: s.v }, Scalar::one())];
        }
        Generator::Z => return vec![(s.clone(), zdot.clone())],
        Generator::H => {
            let weight = lambda.sub(&Scalar::from_int(s.level() as i64));
            return vec![(s.clone(), weight)];
        }
        _ => {}
    }
    // Peel the leftmost lowering factor u of the state: g u w = u (g w) + [g, u] w.
    if s.m > 0 {
        let inner = VermaState { m: s.m - 1, r: s.r.clone(), v: s.v };
        let mut out: BTreeMap<VermaState, Scalar> = BTreeMap::new();
        for (st, c) in verma_apply(g, &inner, v_mod, lambda, zdot) {
            merge(&mut out, VermaState { m: st.m + 1, ..st }, c);
        }
        for (bg, k) in bracket_gens(g, Generator::F) {
            for (st, c) in verma_apply(bg, &inner, v_mod, lambda, zdot) {
                merge(&mut out, st, c.scale_int(k));
            }
        }
        return out.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    }
    if let Some(i) = s.r.iter().position(|&e| e > 0) {
        let mut r = s.r.clone();
        r[i] -= 1;
        let inner = VermaState { m: 0, r, v: s.v };
        let mut out: BTreeMap<VermaState, Scalar> = BTreeMap::new();
        for (st, c) in verma_apply(g, &inner, v_mod, lambda, zdot) {
            let mut r2 = st.r.clone();
            r2[i] += 1;
            merge(&mut out, VermaState { m: st.m, r: r2, v: st.v }, c);
        }
        for (bg, k) in bracket_gens(g, Generator::Y(i + 1)) {
            for (st, c) in verma_apply(bg, &inner, v_mod, lambda, zdot) {
                merge(&mut out, st, c.scale_int(k));
            }
        }
        return out.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    }
    // Base case: the highest weight line, a pure V-vector.
    match g {
        Generator::E | Generator::X(_) => vec![],
        Generator::S(i, j) => {
            let mat = v_mod.action(i, j);
            let mut out = Vec::new();
            for w in 0..v_mod.dim() {
                let c = mat.get(w, s.v).clone();
                if !c.is_zero() {
                    out.push((VermaState { m: 0, r: s.r.clone(), v: w }, c));
                }
            }
            out
        }
        _ => unreachable!("handled above"),
    }
}

fn merge(acc: &mut BTreeMap<VermaState, Scalar>, s: VermaState, c: Scalar) {
    let entry = acc.entry(s).or_insert_with(Scalar::zero);
    *entry = entry.add(&c);
}

/// Basis state of a tensor module `V (x) N (x) L`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct TensorState {
    v: usize,
    sl2: usize,
    exps: Vec<i64>,
}

/// The tensor module `V (x) N (x) C[t_1..t_n]` truncated `depth` levels
/// below its top weight. The Heisenberg part acts only through the Weyl
/// factor; e, f, h, s_ij act diagonally across the factors.
pub fn tensor_module(
    v_mod: &SoModule,
    n_mod: &Sl2WeightModule,
    tower: &Arc<Tower>,
    depth: u32,
) -> WeightModule {
    let n = v_mod.n();
    let half = Scalar::from_ratio(n as i64, 2);
    let base = n_mod.highest_weight().sub(&half);
    let mut states: BTreeMap<i64, Vec<TensorState>> = BTreeMap::new();
    for k in 0..=depth {
        let mut level = Vec::new();
        for i in 0..=(k / 2) as usize {
            if i >= n_mod.len() {
                continue;
            }
            for a in compositions(k - 2 * i as u32, n) {
                let exps: Vec<i64> = a.iter().map(|&e| e as i64).collect();
                for v in 0..v_mod.dim() {
                    level.push(TensorState { v, sl2: i, exps: exps.clone() });
                }
            }
        }
        level.sort();
        states.insert(-(k as i64), level);
    }
    let builder = ModuleBuilder {
        n,
        zdot: Scalar::zdot(tower),
        base_weight: base,
        states,
        provenance: Provenance::Tensor,
        bounded_above: true,
        bounded_below: false,
    };
    builder.build(|g, s| tensor_apply(g, s, v_mod, n_mod, tower, &PolyKind::Poly))
}

fn tensor_apply(
    g: Generator,
    s: &TensorState,
    v_mod: &SoModule,
    n_mod: &Sl2WeightModule,
    tower: &Arc<Tower>,
    kind: &PolyKind,
) -> Vec<(TensorState, Scalar)> {
    let n = v_mod.n();
    let mut out: Vec<(TensorState, Scalar)> = Vec::new();
    let weyl_part = |op: &WeylOperator, out: &mut Vec<(TensorState, Scalar)>, sl2: usize, v: usize| {
        let vec = PolyModuleVector {
            kind: kind.clone(),
            n,
            terms: {
                let mut t = BTreeMap::new();
                t.insert(s.exps.clone(), Scalar::one());
                t
            },
        };
        let img = weyl_act(op, &vec).expect("Weyl window wide enough for tracked states");
        for (exps, c) in img.terms {
            out.push((TensorState { v, sl2, exps }, c));
        }
    };
    match g {
        Generator::X(_) | Generator::Y(_) | Generator::Z => {
            weyl_part(&theta_gen(g, tower, n), &mut out, s.sl2, s.v);
        }
        Generator::E | Generator::F | Generator::H => {
            let image = match g {
                Generator::E => n_mod.apply_e(s.sl2),
                Generator::F => n_mod.apply_f(s.sl2),
                Generator::H => Sl2Image::Term(s.sl2, n_mod.weight(s.sl2)),
                _ => unreachable!(),
            };
            match image {
                Sl2Image::Zero => {}
                Sl2Image::Out => {
                    panic!("sl_2 factor left its window at a tracked target offset")
                }
                Sl2Image::Term(idx, c) => {
                    out.push((TensorState { v: s.v, sl2: idx, exps: s.exps.clone() }, c));
                }
            }
            weyl_part(&theta_gen(g, tower, n), &mut out, s.sl2, s.v);
        }
        Generator::S(i, j) => {
            let mat = v_mod.action(i, j);
            for w in 0..v_mod.dim() {
                let c = mat.get(w, s.v).clone();
                if !c.is_zero() {
                    out.push((TensorState { v: w, sl2: s.sl2, exps: s.exps.clone() }, c));
                }
            }
            weyl_part(&theta_gen(g, tower, n), &mut out, s.sl2, s.v);
        }
    }
    out
}

/// The polynomial module C[t_1..t_n] viewed as a module through the
/// differential-operator realization: the canonical irreducible highest
/// weight module at highest weight -n/2.
pub fn polynomial_module(n: usize, tower: &Arc<Tower>, depth: u32) -> WeightModule {
    let mut states: BTreeMap<i64, Vec<Vec<i64>>> = BTreeMap::new();
    for k in 0..=depth {
        let mut level: Vec<Vec<i64>> = compositions(k, n)
            .into_iter()
            .map(|a| a.into_iter().map(|e| e as i64).collect())
            .collect();
        level.sort();
        states.insert(-(k as i64), level);
    }
    let builder = ModuleBuilder {
        n,
        zdot: Scalar::zdot(tower),
        base_weight: Scalar::from_ratio(-(n as i64), 2),
        states,
        provenance: Provenance::Polynomial,
        bounded_above: true,
        bounded_below: false,
    };
    builder.build(|g, exps| {
        let vec = PolyModuleVector {
            kind: PolyKind::Poly,
            n,
            terms: {
                let mut t = BTreeMap::new();
                t.insert(exps.clone(), Scalar::one());
                t
            },
        };
        let img = weyl_act(&theta_gen(g, tower, n), &vec).expect("poly action total");
        img.terms.into_iter().collect()
    })
}

/// The dense rank-one family `L_sl2(k) (x) t^lambda C[t, t^-1]`:
/// every weight space has dimension k+1 and e, f act injectively.
///
/// `half_window` tracked offsets on each side of the center.
pub fn dense_module(
    k: u32,
    lambda1: &Scalar,
    tower: &Arc<Tower>,
    half_window: i64,
) -> Result<WeightModule, Error> {
    let n = 1;
    if integer_value(lambda1).is_some() {
        return Err(Error::InvalidArgument(
            "dense module needs a non-integer Laurent shift".into(),
        ));
    }
    let sl2 = Sl2WeightModule::simple(Scalar::from_int(k as i64), k as usize);
    let l_window = half_window + 2 * k as i64 + 4;
    let kind = PolyKind::TwistedLaurent { lambda: lambda1.clone(), window: l_window };
    // h-weight of w_{k-2i} (x) t^{lambda+j} is (k - 2i) - (lambda + j) - 1/2;
    // offset d against base k - lambda - 1/2 is -(2i + j)
    let base = Scalar::from_int(k as i64)
        .sub(lambda1)
        .sub(&Scalar::from_ratio(1, 2));
    let mut states: BTreeMap<i64, Vec<TensorState>> = BTreeMap::new();
    for d in -half_window..=half_window {
        let mut level = Vec::new();
        for i in 0..=(k as usize) {
            let j = -d - 2 * i as i64;
            level.push(TensorState { v: 0, sl2: i, exps: vec![j] });
        }
        level.sort();
        states.insert(d, level);
    }
    let v_mod = SoModule::trivial(n);
    let builder = ModuleBuilder {
        n,
        zdot: Scalar::zdot(tower),
        base_weight: base,
        states,
        provenance: Provenance::Dense,
        bounded_above: false,
        bounded_below: false,
    };
    Ok(builder.build(|g, s| tensor_apply(g, s, &v_mod, &sl2, tower, &kind)))
}

/// Exact singular vectors at one offset: the joint kernel of e and all x_i.
pub fn singular_vectors(m: &WeightModule, offset: i64) -> Result<Vec<Vec<Scalar>>, Error> {
    if !m.dims.contains_key(&offset) {
        return Err(Error::InvalidArgument(format!("offset {} not tracked", offset)));
    }
    let dim = m.dim(offset);
    if dim == 0 {
        return Ok(vec![]);
    }
    let mut blocks: Vec<Matrix> = Vec::new();
    let mut raising: Vec<Generator> = vec![Generator::E];
    for i in 1..=m.n() {
        raising.push(Generator::X(i));
    }
    for g in raising {
        let mat = m.action(g, offset).ok_or_else(|| {
            Error::Truncation(format!("action of {} unknown at offset {}", g, offset))
        })?;
        blocks.push(mat.clone());
    }
    let refs: Vec<&Matrix> = blocks.iter().collect();
    let stacked = Matrix::vstack(&refs);
    Ok(stacked.kernel())
}

/// Spans of a submodule, per offset.
type SubSpans = BTreeMap<i64, SpanTracker>;

fn close_under_action(m: &WeightModule, spans: &mut SubSpans) {
    let basis = Generator::basis(m.n());
    loop {
        let mut grew = false;
        let offsets: Vec<i64> = spans.keys().copied().collect();
        for d in offsets {
            let vecs: Vec<Vec<Scalar>> =
                spans[&d].basis().map(|r| r.to_vec()).collect();
            for g in &basis {
                let Some(mat) = m.action(*g, d) else { continue };
                if mat.rows() == 0 {
                    continue;
                }
                let target = d + g.weight_shift();
                for v in &vecs {
                    let img = mat.apply(v);
                    if img.iter().all(|c| c.is_zero()) {
                        continue;
                    }
                    let tracker = spans.entry(target).or_default();
                    if tracker.insert(img) {
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
}

/// Quotient of a module by the submodule spanned per-offset by `spans`.
fn quotient(m: &WeightModule, spans: &SubSpans) -> WeightModule {
    // free coordinates per offset = complement of the pivot columns
    let mut free: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (&d, &dim) in &m.dims {
        let pivots: Vec<usize> = spans.get(&d).map(|t| t.pivots()).unwrap_or_default();
        let f: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
        free.insert(d, f);
    }
    let project = |d: i64, v: Vec<Scalar>| -> Vec<Scalar> {
        let reduced = match spans.get(&d) {
            Some(t) => t.reduce(v),
            None => v,
        };
        free[&d].iter().map(|&c| reduced[c].clone()).collect()
    };
    let mut actions: BTreeMap<Generator, BTreeMap<i64, Matrix>> = BTreeMap::new();
    for (g, per) in &m.actions {
        let mut out_per = BTreeMap::new();
        for (&d, mat) in per {
            let target = d + g.weight_shift();
            let rows = free.get(&target).map(|f| f.len()).unwrap_or(0);
            let cols = free[&d].len();
            let mut q = Matrix::zeros(rows, cols);
            for (col, &src) in free[&d].iter().enumerate() {
                let mut unit = vec![Scalar::zero(); m.dim(d)];
                unit[src] = Scalar::one();
                let img = mat.apply(&unit);
                if rows == 0 {
                    continue;
                }
                let proj = project(target, img);
                for (row, val) in proj.into_iter().enumerate() {
                    q.set(row, col, val);
                }
            }
            out_per.insert(d, q);
        }
        actions.insert(*g, out_per);
    }
    WeightModule {
        n: m.n,
        zdot: m.zdot.clone(),
        base_weight: m.base_weight.clone(),
        dims: free.iter().map(|(&d, f)| (d, f.len())).collect(),
        actions,
        provenance: Provenance::Quotient,
        bounded_above: m.bounded_above,
        bounded_below: m.bounded_below,
    }
}

/// The simple quotient at truncation: repeatedly quotient by the submodule
/// generated by singular vectors strictly below the top weight, until none
/// remain within the window.
pub fn simple_quotient(m: &WeightModule) -> Result<WeightModule, Error> {
    let mut current = m.clone();
    loop {
        let Some(top) = current.top_offset() else { return Ok(current) };
        let mut spans: SubSpans = BTreeMap::new();
        let mut found = false;
        for &d in current.dims.keys() {
            if d >= top {
                continue;
            }
            for v in singular_vectors(&current, d)? {
                spans.entry(d).or_default().insert(v);
                found = true;
            }
        }
        if !found {
            return Ok(current);
        }
        close_under_action(&current, &mut spans);
        current = quotient(&current, &spans);
    }
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct CharacterRow {
    pub level: u32,
    pub verma_dim: usize,
    pub tensor_dim: usize,
    pub equal: bool,
}

#[derive(Serialize, Debug, Clone)]
pub struct FactorizationReport {
    pub n: usize,
    pub v_name: String,
    pub lambda: String,
    pub zdot: String,
    pub depth: u32,
    pub rows: Vec<CharacterRow>,
    pub dims_match: bool,
    pub psi_intertwines: bool,
    pub first_failure: Option<String>,
}

impl FactorizationReport {
    pub fn passed(&self) -> bool {
        self.dims_match && self.psi_intertwines
    }
}

/// Mechanize the Verma factorization: equality of characters level by level
/// and the explicit intertwiner sending the generator to
/// `v (x) w_top (x) 1`, extended along lowering words.
pub fn verify_verma_factorization(
    v_mod: &SoModule,
    lambda: &Scalar,
    tower: &Arc<Tower>,
    depth: u32,
) -> Result<FactorizationReport, Error> {
    let zdot = Scalar::zdot(tower);
    if zdot.is_zero() {
        return Err(Error::InvalidArgument(
            "factorization needs a nonzero central charge".into(),
        ));
    }
    let n = v_mod.n();
    let m = verma(v_mod, lambda, &zdot, depth);
    let sl2_top = lambda.add(&Scalar::from_ratio(n as i64, 2));
    let n_mod = Sl2WeightModule::verma(sl2_top.clone(), depth as usize);
    let t = tensor_module(v_mod, &n_mod, tower, depth);

    let mut rows = Vec::new();
    let mut dims_match = true;
    for k in 0..=depth {
        let d = -(k as i64);
        let row = CharacterRow {
            level: k,
            verma_dim: m.dim(d),
            tensor_dim: t.dim(d),
            equal: m.dim(d) == t.dim(d),
        };
        dims_match &= row.equal;
        rows.push(row);
    }

    // psi on basis states: apply the same lowering word in the tensor module.
    // psi matrices per offset, starting from the top V-line.
    let mut psi: BTreeMap<i64, Matrix> = BTreeMap::new();
    let mut first_failure = None;
    let mut psi_ok = dims_match;
    if dims_match {
        // top: identity up to basis matching; states at level 0 are the V basis
        psi.insert(0, Matrix::identity(m.dim(0)));
        // build downward: each state f^m y^r (x) v at level k arises from a
        // state at level k-1 by one more lowering generator
        for k in 1..=depth {
            let d = -(k as i64);
            let states = &m.dims[&d];
            let mut mat = Matrix::zeros(t.dim(d), *states);
            // recover each basis state from its predecessor
            let level_states = verma_states_at(v_mod, k);
            for (col, st) in level_states.iter().enumerate() {
                let (g, pred) = predecessor(st);
                let pred_col = verma_states_at(v_mod, k - pred_level_drop(&g))
                    .iter()
                    .position(|s| *s == pred)
                    .expect("predecessor tracked");
                let pred_offset = d + g.weight_shift().abs();
                let prev = &psi[&pred_offset];
                let mut unit = vec![Scalar::zero(); prev.cols()];
                unit[pred_col] = Scalar::one();
                let in_t = prev.apply(&unit);
                let act = t
                    .action(g, pred_offset)
                    .expect("lowering action tracked in tensor module");
                let img = act.apply(&in_t);
                for (row, val) in img.into_iter().enumerate() {
                    mat.set(row, col, val);
                }
            }
            psi.insert(d, mat);
        }
        // intertwining: psi . g = g . psi wherever tracked on both sides
        'outer: for g in Generator::basis(n) {
            let shift = g.weight_shift();
            for k in 0..=depth {
                let d = -(k as i64);
                let target = d + shift;
                if !m.dims.contains_key(&target) && !(target > 0 && m.bounded_above) {
                    continue;
                }
                let (Some(gm), Some(gt)) = (m.action(g, d), t.action(g, d)) else {
                    continue;
                };
                let psi_d = &psi[&d];
                let psi_target = if m.dims.contains_key(&target) {
                    psi[&target].clone()
                } else {
                    Matrix::zeros(0, 0)
                };
                let lhs = psi_target.mul(gm);
                let rhs = gt.mul(psi_d);
                if lhs != rhs {
                    psi_ok = false;
                    first_failure =
                        Some(format!("psi does not intertwine {} at offset {}", g, d));
                    break 'outer;
                }
            }
        }
    } else {
        psi_ok = false;
        first_failure = rows
            .iter()
            .find(|r| !r.equal)
            .map(|r| format!("dimension mismatch at level {}", r.level));
    }

    Ok(FactorizationReport {
        n,
        v_name: v_mod.name().to_string(),
        lambda: lambda.to_string(),
        zdot: zdot.to_string(),
        depth,
        rows,
        dims_match,
        psi_intertwines: psi_ok,
        first_failure,
    })
}

fn verma_states_at(v_mod: &SoModule, k: u32) -> Vec<VermaState> {
    let n = v_mod.n();
    let mut out = Vec::new();
    for m in 0..=(k / 2) {
        for r in compositions(k - 2 * m, n) {
            for v in 0..v_mod.dim() {
                out.push(VermaState { m, r: r.clone(), v });
            }
        }
    }
    out.sort();
    out
}

/// One lowering generator whose application reaches this state from a
/// shallower one.
fn predecessor(s: &VermaState) -> (Generator, VermaState) {
    if s.m > 0 {
        (Generator::F, VermaState { m: s.m - 1, r: s.r.clone(), v: s.v })
    } else {
        let i = s.r.iter().position(|&e| e > 0).expect("non-top state");
        let mut r = s.r.clone();
        r[i] -= 1;
        (Generator::Y(i + 1), VermaState { m: 0, r, v: s.v })
    }
}

fn pred_level_drop(g: &Generator) -> u32 {
    match g {
        Generator::F => 2,
        Generator::Y(_) => 1,
        _ => unreachable!(),
    }
}

/// Closed-form character of the Verma module at level k.
pub fn verma_character(dim_v: usize, n: usize, k: u32) -> usize {
    let mut total = 0usize;
    for m in 0..=(k / 2) {
        total += multiset_count(n, (k - 2 * m) as usize);
    }
    dim_v * total
}

fn multiset_count(n: usize, r: usize) -> usize {
    // C(r + n - 1, n - 1)
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..(n - 1) {
        num *= r + 1 + i;
        den *= i + 1;
    }
    num / den
}

/// Observed behavior of a generator's action within a truncation window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Behavior {
    LocallyNilpotent,
    Injective,
    Mixed,
}

/// Decide how a generator acts from the exact matrices within the window.
/// Bounded support edges give genuine local nilpotency; otherwise injectivity
/// is checked on the interior. `Mixed` can only arise from truncation
/// artifacts.
pub fn nilpotency_probe(m: &WeightModule, g: Generator) -> Behavior {
    let shift = g.weight_shift();
    if shift > 0 && m.bounded_above() {
        return Behavior::LocallyNilpotent;
    }
    if shift < 0 && m.bounded_below() {
        return Behavior::LocallyNilpotent;
    }
    let mut any = false;
    let mut all_injective = true;
    let mut all_zero = true;
    for &d in m.dims.keys() {
        let Some(mat) = m.action(g, d) else { continue };
        if m.dim(d) == 0 || !m.dims.contains_key(&(d + shift)) {
            continue;
        }
        any = true;
        if !mat.is_injective() {
            all_injective = false;
        }
        if !mat.is_zero() {
            all_zero = false;
        }
    }
    if !any {
        return Behavior::Mixed;
    }
    if all_injective {
        Behavior::Injective
    } else if all_zero {
        Behavior::LocallyNilpotent
    } else {
        Behavior::Mixed
    }
}

/// The classification label for an irreducible Harish-Chandra module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ClassLabel {
    /// zdot = 0: the Heisenberg part acts by zero and the module is an
    /// irreducible tensor of a finite dimensional so_n-module and a weight
    /// sl_2-module.
    TensorOfFiniteSoAndSl2,
    /// zdot != 0, e locally nilpotent: highest weight family
    /// V (x) L_sl2(lambda) (x) C[t_1..t_n].
    HighestWeight,
    /// zdot != 0, f locally nilpotent: tau-twist of the highest weight family.
    LowestWeightTwist,
    /// zdot != 0, both injective, n = 1: the dense rank-one family
    /// L_sl2(k) (x) t^lambda C[t, t^-1].
    Dense,
    /// zdot != 0, both injective, n > 1: excluded (weight spaces would be
    /// infinite dimensional).
    Impossible,
}

/// The trichotomy: decide the family from the central charge and the probed
/// behavior of e and f.
pub fn classify(
    zdot_is_zero: bool,
    e_behavior: Behavior,
    f_behavior: Behavior,
    n: usize,
) -> Result<ClassLabel, Error> {
    if e_behavior == Behavior::Mixed || f_behavior == Behavior::Mixed {
        return Err(Error::InvalidArgument(
            "mixed behavior signals a truncation artifact, not a module class".into(),
        ));
    }
    if zdot_is_zero {
        return Ok(ClassLabel::TensorOfFiniteSoAndSl2);
    }
    match (e_behavior, f_behavior) {
        (Behavior::LocallyNilpotent, Behavior::LocallyNilpotent) => Err(Error::InvalidArgument(
            "e and f both locally nilpotent is inconsistent with a nonzero central charge".into(),
        )),
        (Behavior::LocallyNilpotent, _) => Ok(ClassLabel::HighestWeight),
        (_, Behavior::LocallyNilpotent) => Ok(ClassLabel::LowestWeightTwist),
        (Behavior::Injective, Behavior::Injective) => {
            if n == 1 {
                Ok(ClassLabel::Dense)
            } else {
                Ok(ClassLabel::Impossible)
            }
        }
        _ => unreachable!(),
    }
}

/// Twist a module by the automorphism tau: same spaces, generator g acts as
/// tau(g); the support reflects through zero.
pub fn twist_by_tau(m: &WeightModule) -> WeightModule {
    let mut dims = BTreeMap::new();
    for (&d, &dim) in &m.dims {
        dims.insert(-d, dim);
    }
    let mut actions: BTreeMap<Generator, BTreeMap<i64, Matrix>> = BTreeMap::new();
    for g in Generator::basis(m.n()) {
        let (img, sign) = tau_gen(g);
        let mut per = BTreeMap::new();
        if let Some(old) = m.actions.get(&img) {
            for (&d, mat) in old {
                let mat = if sign < 0 { mat.neg() } else { mat.clone() };
                per.insert(-d, mat);
            }
        }
        actions.insert(g, per);
    }
    WeightModule {
        n: m.n,
        zdot: m.zdot.clone(),
        base_weight: m.base_weight.neg(),
        dims,
        actions,
        provenance: Provenance::TauTwist,
        bounded_above: m.bounded_below,
        bounded_below: m.bounded_above,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Qi;

    fn tower(zdot: i64) -> Arc<Tower> {
        Tower::from_zdot(Qi::from_int(zdot))
    }

    fn tower_q(num: i64, den: i64) -> Arc<Tower> {
        Tower::from_zdot(Qi::from_ratio(num, den))
    }

    #[test]
    fn so_module_constructors() {
        let triv = SoModule::trivial(3);
        assert_eq!(triv.dim(), 1);
        for i in 1..=3 {
            for j in (i + 1)..=3 {
                assert!(triv.action(i, j).is_zero());
            }
        }
        assert!(triv.is_irreducible());

        let nat = SoModule::natural(3);
        assert_eq!(nat.dim(), 3);
        assert!(nat.check_relations().is_ok());
        // [s12, s23] = s13 on matrices
        let a = nat.action(1, 2);
        let b = nat.action(2, 3);
        assert_eq!(a.mul(&b).sub(&b.mul(&a)), nat.action(1, 3));
        assert!(nat.is_irreducible());

        // n = 2: natural splits into the two eigenlines of s12
        let nat2 = SoModule::natural(2);
        assert!(!nat2.is_irreducible());
        for sign in [1, -1] {
            let line = SoModule::so2_eigenline(sign);
            assert_eq!(line.dim(), 1);
            assert!(line.is_irreducible());
        }
    }

    #[test]
    fn user_module_relations_checked() {
        // corrupt natural action: scale one generator
        let nat = SoModule::natural(3);
        let mut actions = BTreeMap::new();
        for i in 1..=3 {
            for j in (i + 1)..=3 {
                actions.insert((i, j), nat.action(i, j));
            }
        }
        actions.insert((1, 2), nat.action(1, 2).scale(&Scalar::from_int(2)));
        assert!(SoModule::user(3, actions, "broken").is_err());
    }

    #[test]
    fn sl2_verma_relations() {
        let lambda = Scalar::from_ratio(3, 2);
        let m = Sl2WeightModule::verma(lambda.clone(), 6);
        for idx in 0..m.len() {
            // [e, f] = h on every tracked line where both sides are known
            let ef = match m.apply_f(idx) {
                Sl2Image::Term(j, cf) => match m.apply_e(j) {
                    Sl2Image::Term(k, ce) => {
                        assert_eq!(k, idx);
                        cf.mul(&ce)
                    }
                    Sl2Image::Zero => Scalar::zero(),
                    Sl2Image::Out => continue,
                },
                Sl2Image::Zero => Scalar::zero(),
                Sl2Image::Out => continue,
            };
            let fe = match m.apply_e(idx) {
                Sl2Image::Term(j, ce) => match m.apply_f(j) {
                    Sl2Image::Term(k, cf) => {
                        assert_eq!(k, idx);
                        ce.mul(&cf)
                    }
                    Sl2Image::Zero => Scalar::zero(),
                    Sl2Image::Out => continue,
                },
                Sl2Image::Zero => Scalar::zero(),
                Sl2Image::Out => continue,
            };
            assert_eq!(ef.sub(&fe), m.weight(idx), "idx {}", idx);
        }
    }

    #[test]
    fn sl2_simple_finite() {
        let m = Sl2WeightModule::simple(Scalar::from_int(2), 10);
        assert_eq!(m.len(), 3);
        assert!(matches!(m.apply_f(2), Sl2Image::Zero));
    }

    #[test]
    fn verma_dimensions() {
        // n=1, trivial V: dim at level k is floor(k/2) + 1
        let t = tower(1);
        let m = verma(&SoModule::trivial(1), &Scalar::from_ratio(-1, 2), &Scalar::zdot(&t), 8);
        for k in 0..=8u32 {
            assert_eq!(m.dim(-(k as i64)), (k / 2 + 1) as usize, "level {}", k);
        }
        // n=2, natural V: level 2 has dim 2 * 4 = 8
        let m2 = verma(&SoModule::natural(2), &Scalar::from_int(3), &Scalar::from_int(2), 4);
        assert_eq!(m2.dim(0), 2);
        assert_eq!(m2.dim(-2), 8);
        // closed form agrees
        for k in 0..=4u32 {
            assert_eq!(m2.dim(-(k as i64)), verma_character(2, 2, k));
        }
    }

    #[test]
    fn verma_master_invariant() {
        let t = tower(1);
        let m = verma(&SoModule::natural(2), &Scalar::from_int(1), &Scalar::zdot(&t), 5);
        assert!(m.bracket_fidelity_failures().is_empty());
        assert!(m.grading_failures().is_empty());
    }

    #[test]
    fn tensor_module_basics() {
        let t = tower(1);
        let n_mod = Sl2WeightModule::verma(Scalar::from_ratio(1, 2), 6);
        let m = tensor_module(&SoModule::trivial(1), &n_mod, &t, 6);
        // top weight is mu - n/2
        assert_eq!(m.weight(0), Scalar::zero());
        assert!(m.bracket_fidelity_failures().is_empty());
        assert!(m.grading_failures().is_empty());
        // x_1 kills the top line (d annihilates constants)
        let x = m.action(Generator::X(1), 0).unwrap();
        assert!(x.is_zero());
        // the whole raising part kills the top line
        assert_eq!(singular_vectors(&m, 0).unwrap().len(), m.dim(0));
    }

    #[test]
    fn factorization_small() {
        let t = tower(1);
        let report =
            verify_verma_factorization(&SoModule::trivial(1), &Scalar::from_ratio(-1, 2), &t, 8)
                .unwrap();
        assert!(report.passed(), "{:?}", report.first_failure);

        let t2 = tower(2);
        let report2 =
            verify_verma_factorization(&SoModule::natural(2), &Scalar::from_int(3), &t2, 6)
                .unwrap();
        assert!(report2.passed(), "{:?}", report2.first_failure);
    }

    #[test]
    fn factorization_n3_polynomial_character() {
        let t = tower(1);
        let lambda = Scalar::from_ratio(-3, 2);
        let report =
            verify_verma_factorization(&SoModule::trivial(3), &lambda, &t, 6).unwrap();
        assert!(report.passed());
        // the simple quotient at lambda = -n/2 has the polynomial character
        let m = verma(&SoModule::trivial(3), &lambda, &Scalar::one(), 6);
        let l = simple_quotient(&m).unwrap();
        for k in 0..=6u32 {
            let expected = multiset_count(3, k as usize); // binom(k+2, 2)
            assert_eq!(l.dim(-(k as i64)), expected, "level {}", k);
        }
        // and matches the direct polynomial module
        let poly = polynomial_module(3, &t, 6);
        for k in 0..=6u32 {
            assert_eq!(l.dim(-(k as i64)), poly.dim(-(k as i64)));
        }
    }

    #[test]
    fn polynomial_module_is_simple_within_window() {
        let t = tower(1);
        let m = polynomial_module(2, &t, 5);
        assert!(m.bracket_fidelity_failures().is_empty());
        let top = m.top_offset().unwrap();
        for &d in m.dims.keys() {
            if d == top {
                continue;
            }
            assert!(singular_vectors(&m, d).unwrap().is_empty(), "offset {}", d);
        }
    }

    #[test]
    fn singular_vector_at_integer_point() {
        // lambda + n/2 = m in Z_+ puts the first singular vector at
        // h-weight lambda - 2(m+1)
        for m_int in 0..=2i64 {
            let lambda = Scalar::from_int(m_int).sub(&Scalar::from_ratio(1, 2));
            let depth = (2 * m_int + 4) as u32;
            let module = verma(&SoModule::trivial(1), &lambda, &Scalar::one(), depth);
            for k in 1..=depth {
                let found = singular_vectors(&module, -(k as i64)).unwrap();
                if k as i64 == 2 * (m_int + 1) {
                    assert!(!found.is_empty(), "missing singular vector, m={}", m_int);
                } else {
                    assert!(found.is_empty(), "spurious singular vector at level {}", k);
                }
            }
        }
        // non-integer point: no singular vectors below the top
        let module = verma(
            &SoModule::trivial(1),
            &Scalar::from_ratio(1, 3),
            &Scalar::one(),
            10,
        );
        for k in 1..=10u32 {
            assert!(singular_vectors(&module, -(k as i64)).unwrap().is_empty());
        }
    }

    #[test]
    fn simple_quotient_at_critical_point() {
        // n=1, lambda = -1/2 (so lambda + n/2 = 0), zdot = 1: the quotient
        // carries the character of L_sl2(0) (x) C[t], all levels dim 1
        let t = tower(1);
        let m = verma(&SoModule::trivial(1), &Scalar::from_ratio(-1, 2), &Scalar::one(), 8);
        let l = simple_quotient(&m).unwrap();
        for k in 0..=8i64 {
            assert_eq!(l.dim(-k), 1, "level {}", k);
        }
        // compare against the tensor side of the simple factorization
        let n_mod = Sl2WeightModule::simple(Scalar::zero(), 8);
        let tens = tensor_module(&SoModule::trivial(1), &n_mod, &t, 8);
        for k in 0..=8i64 {
            assert_eq!(l.dim(-k), tens.dim(-k));
        }
    }

    #[test]
    fn generic_verma_is_simple() {
        let m = verma(
            &SoModule::trivial(2),
            &Scalar::from_ratio(1, 3),
            &Scalar::one(),
            6,
        );
        let l = simple_quotient(&m).unwrap();
        for k in 0..=6i64 {
            assert_eq!(l.dim(-k), m.dim(-k));
        }
    }

    #[test]
    fn zero_charge_kills_heisenberg() {
        for n in 1..=3usize {
            let m = verma(&SoModule::trivial(n), &Scalar::from_int(1), &Scalar::zero(), 8);
            let l = simple_quotient(&m).unwrap();
            for i in 1..=n {
                for &d in l.dims.keys() {
                    if let Some(mat) = l.action(Generator::X(i), d) {
                        assert!(mat.is_zero(), "x({}) nonzero at offset {}", i, d);
                    }
                    if let Some(mat) = l.action(Generator::Y(i), d) {
                        assert!(mat.is_zero(), "y({}) nonzero at offset {}", i, d);
                    }
                }
            }
        }
    }

    #[test]
    fn dense_module_family() {
        let t = tower(1);
        let half = Scalar::from_ratio(1, 2);
        for k in 0..=2u32 {
            let m = dense_module(k, &half, &t, 6).unwrap();
            for &d in m.dims.keys() {
                assert_eq!(m.dim(d), (k + 1) as usize);
            }
            assert!(m.bracket_fidelity_failures().is_empty());
            assert!(m.grading_failures().is_empty());
            // e and f injective on the interior
            assert_eq!(nilpotency_probe(&m, Generator::E), Behavior::Injective);
            assert_eq!(nilpotency_probe(&m, Generator::F), Behavior::Injective);
        }
        // integer shift rejected
        assert!(dense_module(0, &Scalar::from_int(1), &t, 6).is_err());
    }

    #[test]
    fn nilpotency_probe_cases() {
        let t = tower(1);
        let m = verma(&SoModule::trivial(1), &Scalar::from_ratio(1, 3), &Scalar::one(), 6);
        assert_eq!(nilpotency_probe(&m, Generator::E), Behavior::LocallyNilpotent);
        assert_eq!(nilpotency_probe(&m, Generator::X(1)), Behavior::LocallyNilpotent);
        let d = dense_module(0, &Scalar::from_ratio(1, 2), &t, 6).unwrap();
        assert_eq!(nilpotency_probe(&d, Generator::F), Behavior::Injective);
    }

    #[test]
    fn classify_families() {
        assert_eq!(
            classify(false, Behavior::LocallyNilpotent, Behavior::Injective, 2).unwrap(),
            ClassLabel::HighestWeight
        );
        assert_eq!(
            classify(true, Behavior::Injective, Behavior::Injective, 3).unwrap(),
            ClassLabel::TensorOfFiniteSoAndSl2
        );
        assert_eq!(
            classify(false, Behavior::Injective, Behavior::Injective, 2).unwrap(),
            ClassLabel::Impossible
        );
        assert_eq!(
            classify(false, Behavior::Injective, Behavior::Injective, 1).unwrap(),
            ClassLabel::Dense
        );
        assert_eq!(
            classify(false, Behavior::Injective, Behavior::LocallyNilpotent, 1).unwrap(),
            ClassLabel::LowestWeightTwist
        );
        assert!(classify(false, Behavior::Mixed, Behavior::Injective, 1).is_err());
        assert!(classify(
            false,
            Behavior::LocallyNilpotent,
            Behavior::LocallyNilpotent,
            1
        )
        .is_err());
    }

    #[test]
    fn tau_twist_reflects() {
        let m = verma(&SoModule::trivial(1), &Scalar::from_ratio(1, 3), &Scalar::one(), 6);
        let tw = twist_by_tau(&m);
        // support negates
        assert_eq!(tw.base_weight(), &m.base_weight().neg());
        assert!(tw.bounded_below() && !tw.bounded_above());
        // f and y now act locally nilpotently
        assert_eq!(nilpotency_probe(&tw, Generator::F), Behavior::LocallyNilpotent);
        assert_eq!(nilpotency_probe(&tw, Generator::Y(1)), Behavior::LocallyNilpotent);
        // the twist is still a module
        assert!(tw.bracket_fidelity_failures().is_empty());
        assert!(tw.grading_failures().is_empty());
        // double twist: same actions as the original with x, y negated
        let tw2 = twist_by_tau(&tw);
        for g in Generator::basis(1) {
            for &d in m.dims.keys() {
                let (Some(a), Some(b)) = (m.action(g, d), tw2.action(g, d)) else {
                    continue;
                };
                let expected = match g {
                    Generator::X(_) | Generator::Y(_) => a.neg(),
                    _ => a.clone(),
                };
                assert_eq!(*b, expected, "{} at {}", g, d);
            }
        }
    }

    #[test]
    fn character_identity_sweep() {
        // equation-level character identity over several shapes and lambdas
        let cases: Vec<(usize, SoModule)> = vec![
            (1, SoModule::trivial(1)),
            (2, SoModule::trivial(2)),
            (2, SoModule::natural(2)),
        ];
        let t = tower_q(1, 1);
        for (n, v) in cases {
            for lam in [Scalar::from_ratio(-1, 2), Scalar::from_int(2)] {
                let m = verma(&v, &lam, &Scalar::one(), 6);
                let sl2 = Sl2WeightModule::verma(
                    lam.add(&Scalar::from_ratio(n as i64, 2)),
                    6,
                );
                let tens = tensor_module(&v, &sl2, &t, 6);
                for k in 0..=6i64 {
                    assert_eq!(m.dim(-k), tens.dim(-k), "n={} k={}", n, k);
                    assert_eq!(m.dim(-k), verma_character(v.dim(), n, k as u32));
                }
            }
        }
    }
}
