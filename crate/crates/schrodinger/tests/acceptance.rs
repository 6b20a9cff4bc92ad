//! Acceptance gate: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::sync::Arc;
use std::time::Instant;

use schrodinger::lie::{verify_structure, Generator};
use schrodinger::localization::{gamma_gen, gamma_properties_check, matrix_of_localized};
use schrodinger::modules::{
    classify, dense_module, nilpotency_probe, simple_quotient, singular_vectors, tensor_module,
    twist_by_tau, verma, verma_character, Behavior, ClassLabel, Sl2WeightModule, SoModule,
    verify_verma_factorization,
};
use schrodinger::scalar::{Qi, Scalar, Tower};
use schrodinger::weyl::{
    d1_cyclicity_check, phi_homomorphism_check, phi_injectivity_check, theta_homomorphism_check,
    PolyKind,
};

fn tower(zdot: i64) -> Arc<Tower> {
    Tower::from_zdot(Qi::from_int(zdot))
}

fn report(idx: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {} {}: {}",
        if pass { "PASS" } else { "FAIL" },
        idx,
        name,
        detail
    );
    assert!(pass, "criterion {} {} failed: {}", idx, name, detail);
}

#[test]
fn criterion_1_structure_constants() {
    let start = Instant::now();
    let mut violations = 0usize;
    let mut pairs = 0usize;
    let mut triples = 0usize;
    for n in 1..=3 {
        let r = verify_structure(n);
        violations += r.violations.len();
        pairs += r.pairs_checked;
        triples += r.triples_checked;
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && elapsed.as_secs() < 5;
    report(
        1,
        "structure-constants",
        pass,
        &format!(
            "n=1..3, {} bracket pairs vs matrix oracle, {} Jacobi triples, {} violations in {:.2?}",
            pairs, triples, violations, elapsed
        ),
    );
}

#[test]
fn criterion_2_weyl_realization_homomorphism() {
    let mut failures = 0usize;
    let mut pairs = 0usize;
    for n in 1..=3 {
        for zdot in [1i64, 4, 2] {
            let r = theta_homomorphism_check(n, &tower(zdot));
            failures += r.failures.len();
            pairs += r.pairs_checked;
        }
    }
    report(
        2,
        "theta-homomorphism",
        failures == 0,
        &format!(
            "n=1..3 x central charge in {{1, 4, 2}}, {} generator pairs, {} failures",
            pairs, failures
        ),
    );
}

#[test]
fn criterion_3_tensor_factorization_injectivity() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for n in 1..=2 {
        let t = tower(2);
        let hom = phi_homomorphism_check(n, &t);
        ok &= hom.passed();
        let inj = phi_injectivity_check(4, n, &t).expect("injectivity check runs");
        ok &= inj.pass;
        detail.push_str(&format!(
            "n={}: hom {} pairs, rank {}/{}; ",
            n, hom.pairs_checked, inj.rank, inj.monomial_count
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs() < 60;
    detail.push_str(&format!("{:.2?}", elapsed));
    report(3, "phi-homomorphism-and-injectivity", ok, &detail);
}

#[test]
fn criterion_4_verma_tensor_characters() {
    // dimension identity up to level 10 (basis enumeration only) plus the
    // explicit intertwiner at a smaller depth with full matrices
    let mut ok = true;
    let mut detail = String::new();
    let shapes: Vec<SoModule> = vec![
        SoModule::trivial(1),
        SoModule::trivial(2),
        SoModule::natural(2),
        SoModule::trivial(3),
    ];
    let t = tower(1);
    for v in &shapes {
        let n = v.n();
        for lam in [
            Scalar::from_ratio(-1, 2),
            Scalar::from_int(2),
            Scalar::from_ratio(1, 3),
        ] {
            let m = verma(v, &lam, &Scalar::one(), 10);
            let sl2 = Sl2WeightModule::verma(lam.add(&Scalar::from_ratio(n as i64, 2)), 10);
            let tens = tensor_module(v, &sl2, &t, 10);
            for k in 0..=10i64 {
                let closed = verma_character(v.dim(), n, k as u32);
                if m.dim(-k) != closed || tens.dim(-k) != closed {
                    ok = false;
                    detail = format!("character mismatch n={} level {}", n, k);
                }
            }
        }
    }
    let mut psi_cases = 0usize;
    for (v, lam, depth) in [
        (SoModule::trivial(1), Scalar::from_ratio(-1, 2), 8u32),
        (SoModule::trivial(2), Scalar::from_int(2), 6),
        (SoModule::natural(2), Scalar::from_ratio(1, 3), 6),
        (SoModule::trivial(3), Scalar::from_int(1), 5),
    ] {
        let r = verify_verma_factorization(&v, &lam, &t, depth).expect("factorization runs");
        psi_cases += 1;
        if !r.passed() {
            ok = false;
            detail = format!("intertwiner fails: {:?}", r.first_failure);
        }
    }
    if detail.is_empty() {
        detail = format!(
            "4 shapes x 3 weights, characters to level 10; {} intertwiners verified",
            psi_cases
        );
    }
    report(4, "verma-tensor-characters", ok, &detail);
}

#[test]
fn criterion_5_singular_weight_ladder() {
    // n = 1: with mu = lambda + 1/2 a nonnegative integer m, the first
    // singular vector sits exactly at h-weight lambda - 2(m + 1); at
    // non-integer or negative mu there is none
    let mut ok = true;
    let mut detail = String::new();
    for mu in [
        Scalar::from_ratio(-3, 2),
        Scalar::from_int(-1),
        Scalar::zero(),
        Scalar::from_int(1),
        Scalar::from_int(2),
        Scalar::from_ratio(5, 2),
        Scalar::from_int(3),
    ] {
        let lam = mu.sub(&Scalar::from_ratio(1, 2));
        let m_int: Option<i64> = match mu.as_qi() {
            Ok(qi) if qi.is_rational() && num_traits::One::is_one(qi.re.denom()) => {
                num_traits::ToPrimitive::to_i64(qi.re.numer())
            }
            _ => None,
        };
        let depth = match m_int {
            Some(m) if m >= 0 => (2 * m + 4) as u32,
            _ => 6,
        };
        let module = verma(&SoModule::trivial(1), &lam, &Scalar::one(), depth);
        for k in 1..=depth as i64 {
            let sing = singular_vectors(&module, -k).expect("tracked offset");
            let expected = matches!(m_int, Some(m) if m >= 0 && k == 2 * (m + 1));
            if sing.is_empty() == expected {
                ok = false;
                detail = format!("mu = {}, level {}: expected {}", mu, k, expected);
            }
        }
    }
    if detail.is_empty() {
        detail = "7 values of lambda + n/2 swept, singular levels exactly as predicted".into();
    }
    report(5, "singular-weight-ladder", ok, &detail);
}

#[test]
fn criterion_6_zero_charge_quotient() {
    let mut ok = true;
    let mut detail = String::new();
    for n in 1..=3usize {
        let m = verma(&SoModule::trivial(n), &Scalar::from_int(1), &Scalar::zero(), 8);
        let l = simple_quotient(&m).expect("quotient runs");
        for i in 1..=n {
            for g in [Generator::X(i), Generator::Y(i)] {
                for &d in &l.offsets() {
                    if let Some(mat) = l.action(g, d) {
                        if !mat.is_zero() {
                            ok = false;
                            detail = format!("n={}: {} nonzero at offset {}", n, g, d);
                        }
                    }
                }
            }
        }
    }
    if detail.is_empty() {
        detail = "n=1..3, depth 8: Heisenberg part acts by zero on the simple quotient".into();
    }
    report(6, "zero-charge-quotient", ok, &detail);
}

#[test]
fn criterion_7_localization_twist() {
    let mut ok = true;
    let mut detail = String::new();
    for n in 1..=2usize {
        let r = gamma_properties_check(n, &Scalar::from_ratio(1, 3), &Scalar::from_ratio(-2, 5))
            .expect("gamma checks run");
        if !r.pass {
            ok = false;
            detail = format!("n={}: {:?}", n, r.checks);
        }
    }
    // annihilation: on the k=0 dense module the twisted raising operator
    // gamma_b(e) kills f v exactly at the rational roots of the quadratic
    let t = tower(1);
    let m = dense_module(0, &Scalar::from_ratio(1, 2), &t, 8).expect("dense module");
    let f0 = m.action(Generator::F, 0).expect("f tracked").clone();
    let fv = f0.apply(&[Scalar::one()]);
    for (b, expect_zero) in [
        (Scalar::from_ratio(3, 4), true),
        (Scalar::from_ratio(5, 4), true),
        (Scalar::from_ratio(1, 3), false),
    ] {
        let ge = gamma_gen(Generator::E, &b, 1).expect("gamma of e");
        let mat = matrix_of_localized(&m, &ge, -2).expect("window wide enough");
        let img = mat.apply(&fv);
        if img.iter().all(|c| c.is_zero()) != expect_zero {
            ok = false;
            detail = format!("gamma_{}(e) f v annihilation mismatch", b);
        }
    }
    if detail.is_empty() {
        detail =
            "algebra map, cocycle, integer conjugation; gamma_b(e) f v = 0 at b = 3/4, 5/4".into();
    }
    report(7, "localization-twist", ok, &detail);
}

#[test]
fn criterion_8_dense_family() {
    let mut ok = true;
    let mut detail = String::new();
    let t = tower(1);
    for k in 0..=2u32 {
        let m = dense_module(k, &Scalar::from_ratio(1, 2), &t, 6).expect("dense module");
        for &d in &m.offsets() {
            if m.dim(d) != (k + 1) as usize {
                ok = false;
                detail = format!("k={}: dim {} at offset {}", k, m.dim(d), d);
            }
        }
        if !m.bracket_fidelity_failures().is_empty() {
            ok = false;
            detail = format!("k={}: bracket fidelity fails", k);
        }
        for g in [Generator::E, Generator::F] {
            if nilpotency_probe(&m, g) != Behavior::Injective {
                ok = false;
                detail = format!("k={}: {} not injective", k, g);
            }
        }
    }
    // classifier endpoint checks on the observed behaviors
    let hw = verma(&SoModule::trivial(1), &Scalar::from_ratio(1, 3), &Scalar::one(), 6);
    let tw = twist_by_tau(&hw);
    let cases = [
        (
            false,
            nilpotency_probe(&hw, Generator::E),
            nilpotency_probe(&hw, Generator::F),
            1,
            ClassLabel::HighestWeight,
        ),
        (
            false,
            nilpotency_probe(&tw, Generator::E),
            nilpotency_probe(&tw, Generator::F),
            1,
            ClassLabel::LowestWeightTwist,
        ),
        (false, Behavior::Injective, Behavior::Injective, 1, ClassLabel::Dense),
        (false, Behavior::Injective, Behavior::Injective, 2, ClassLabel::Impossible),
        (true, Behavior::Injective, Behavior::Injective, 1, ClassLabel::TensorOfFiniteSoAndSl2),
    ];
    for (z, e, f, n, label) in cases {
        match classify(z, e, f, n) {
            Ok(l) if l == label => {}
            other => {
                ok = false;
                detail = format!("classifier: expected {:?}, got {:?}", label, other);
            }
        }
    }
    if detail.is_empty() {
        detail = "k=0..2: uniform dim k+1 over 13 weights, e and f injective; trichotomy labels".into();
    }
    report(8, "dense-family-and-classifier", ok, &detail);
}

#[test]
fn criterion_9_rank_one_cyclicity() {
    let mut ok = true;
    let mut detail = String::new();
    let kinds: Vec<(PolyKind, &str)> = vec![
        (PolyKind::Poly, "polynomials"),
        (
            PolyKind::TwistedLaurent { lambda: Scalar::from_ratio(1, 2), window: 8 },
            "twisted Laurent",
        ),
        (PolyKind::LaurentQuotient { window: 8 }, "Laurent quotient"),
    ];
    for (kind, name) in kinds {
        let r = d1_cyclicity_check(&kind, 8).expect("cyclicity check runs");
        if !r.cyclic {
            ok = false;
            detail = format!("{} not cyclic: orbit {}/{}", name, r.min_orbit_dim, r.basis_dim);
        }
    }
    if detail.is_empty() {
        detail = "every basis vector generates each rank-one t,d module within the window".into();
    }
    report(9, "rank-one-cyclicity", ok, &detail);
}
