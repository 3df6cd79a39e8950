//! Acceptance criteria at the pinned fixtures. Each test writes one
//! `[pass]`/`[fail]` line to stderr, past the test harness capture.

use std::io::Write;
use std::sync::OnceLock;

use poisson_nav::harness::validate::{run_check, Fixtures};

fn fixtures() -> &'static Fixtures {
    static FX: OnceLock<Fixtures> = OnceLock::new();
    FX.get_or_init(Fixtures::bundled)
}

fn criterion(number: usize, name: &str) {
    let r = run_check(name, fixtures()).unwrap_or_else(|e| panic!("criterion {number} ({name}) errored: {e}"));
    let line = format!("criterion {number:>2} {}", r.line());
    let _ = writeln!(std::io::stderr().lock(), "{line}");
    assert!(r.passed, "{line}");
}

#[test]
fn c01_rho_closed_form_reproduction() {
    criterion(1, "rho");
}

#[test]
fn c02_scaling_relations() {
    criterion(2, "scaling");
}

#[test]
fn c03_sampler_marginals() {
    criterion(3, "sampler");
}

#[test]
fn c04_dual_sampler_equivalence() {
    criterion(4, "dual");
}

#[test]
fn c05_renewal_degeneracy() {
    criterion(5, "renewal");
}

#[test]
fn c06_tau_tail() {
    criterion(6, "tau_tail");
}

#[test]
fn c07_coupling_sandwich() {
    criterion(7, "sandwich");
}

#[test]
fn c08_narrow_cone() {
    criterion(8, "narrow_cone");
}

#[test]
fn c09_markov_majorant() {
    criterion(9, "majorant");
}

#[test]
fn c10_rate_function_numerics() {
    criterion(10, "rate");
}

#[test]
fn c11_clt_consistency() {
    criterion(11, "clt");
}

#[test]
fn c12_dependent_optimizer() {
    criterion(12, "dependent");
}

#[test]
fn c13_kprime_concentration() {
    criterion(13, "kprime");
}
