//! The acceptance suite behind `hofa selftest`.
//!
//! Every criterion draws its instances from its own seeded stream, runs the
//! library, and rechecks the result with a direct computation written here.
//! Tables hold only deterministic data; wall-clock time goes to the console.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use hofa_core::additive::{
    additive_quadruple_count, energy4_count, energy_cs_holds, find_regular_radius, planted_chi_family,
};
use hofa_core::brackets::{
    elementary_quadratic, is_periodic_phase, periodicity_report, vdc_expand, BracketTerm, Phase,
    SignReading,
};
use hofa_core::equidist::{
    mean_correlation, random_generic, random_planted_isotropic, run_dichotomy, verify_dichotomy, Branch,
};
use hofa_core::fourier::{
    expand_bilinear, expand_box_product, expand_frac_product, expand_trivial, BilinearTerm, FourierExpansion, Phase2,
};
use hofa_core::gowers::{dual_d, gowers_norm, lambda, lambda1, u2_direct, FnZN, IntPoly};
use hofa_core::linalg;
use hofa_core::nilmani::{nilsequence_phase, ElemNilmanifold, PolySeq};
use hofa_core::ratmod::{int, rat, to_f64, ExactPolynomial, ExactRational};
use hofa_core::rbpl::{self, random_affine_case, random_planted, RbplOutcome, WCondition};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Thresholds;
use crate::table::{write_text, Cell, Format, Table, TableError};

pub struct SuiteConfig {
    pub seed: u64,
    pub thresholds: Thresholds,
}

#[derive(Clone, Copy, Debug)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub limit: Option<Duration>,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, name: "bracket/nilmanifold correspondence", limit: Some(Duration::from_secs(60)) },
    Criterion { id: 2, name: "periodicity lemma", limit: None },
    Criterion { id: 3, name: "van der Corput identity", limit: None },
    Criterion { id: 4, name: "Fourier complexity certificates", limit: None },
    Criterion { id: 5, name: "RBPL solver", limit: Some(Duration::from_secs(300)) },
    Criterion { id: 6, name: "affine corollary", limit: None },
    Criterion { id: 7, name: "equidistribution dichotomy", limit: None },
    Criterion { id: 8, name: "Gowers norms", limit: None },
    Criterion { id: 9, name: "dual function identity", limit: None },
    Criterion { id: 10, name: "energy Cauchy-Schwarz", limit: None },
    Criterion { id: 11, name: "additive quadruple bound", limit: Some(Duration::from_secs(120)) },
    Criterion { id: 12, name: "regular Bohr radius", limit: None },
];

pub struct CriterionResult {
    pub criterion: Criterion,
    /// All checks held, ignoring the time limit.
    pub checks: bool,
    pub detail: String,
    pub table: Table,
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn in_time(&self) -> bool {
        self.criterion.limit.is_none_or(|l| self.elapsed <= l)
    }

    pub fn pass(&self) -> bool {
        self.checks && self.in_time()
    }

    pub fn line(&self) -> String {
        let limit = match self.criterion.limit {
            Some(l) if !self.in_time() => format!(", over the {}s limit", l.as_secs()),
            _ => String::new(),
        };
        format!(
            "criterion {:>2} {}: {} ({}; {:.1}s{})",
            self.criterion.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.criterion.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            limit
        )
    }
}

fn stream(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn run_criterion(id: u32, cfg: &SuiteConfig) -> Option<CriterionResult> {
    let criterion = *CRITERIA.iter().find(|c| c.id == id)?;
    let t0 = Instant::now();
    let (checks, detail, table) = match id {
        1 => c01_correspondence(cfg),
        2 => c02_periodicity(cfg),
        3 => c03_vdc(cfg),
        4 => c04_fourier(cfg),
        5 => c05_rbpl(cfg),
        6 => c06_affine(cfg),
        7 => c07_equidist(cfg),
        8 => c08_gowers(cfg),
        9 => c09_dual(cfg),
        10 => c10_energy(cfg),
        11 => c11_quadruples(cfg),
        12 => c12_bohr(cfg),
        _ => unreachable!(),
    };
    Some(CriterionResult { criterion, checks, detail, table, elapsed: t0.elapsed() })
}

pub fn run_suite(cfg: &SuiteConfig, only: Option<&[u32]>) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|c| only.is_none_or(|o| o.contains(&c.id)))
        .filter_map(|c| run_criterion(c.id, cfg))
        .collect()
}

/// One row per criterion; the time limit is not part of it.
pub fn summary_table(results: &[CriterionResult]) -> Table {
    let mut t = Table::new(&["criterion", "name", "checks_pass", "detail"]);
    for r in results {
        t.push(vec![(r.criterion.id as usize).into(), r.criterion.name.into(), r.checks.into(), r.detail.clone().into()]);
    }
    t
}

pub fn write_tree(results: &[CriterionResult], dir: &Path, format: Format) -> Result<(), TableError> {
    let ext = format.extension();
    for r in results {
        let p = dir.join(format!("criterion_{:02}.{ext}", r.criterion.id));
        write_text(&r.table.render(format)?, Some(&p))?;
    }
    write_text(&summary_table(results).render(format)?, Some(&dir.join(format!("summary.{ext}"))))
}

// ---------------------------------------------------------------------------
// direct evaluators

/// Nearest integer with ties rounded down, so that `x - [x]` lies in `(-1/2, 1/2]`.
fn round_q(x: &ExactRational) -> BigInt {
    (x - rat(1, 2)).ceil().to_integer()
}

fn sfrac(x: &ExactRational) -> ExactRational {
    x - ExactRational::from_integer(round_q(x))
}

fn is_int(x: &ExactRational) -> bool {
    x.is_integer()
}

/// `alpha n [beta n]`
fn n_bracket(alpha: &ExactRational, beta: &ExactRational, n: i64) -> ExactRational {
    let nq = int(n);
    alpha * &nq * ExactRational::from_integer(round_q(&(beta * &nq)))
}

/// `-sum alpha_i n [beta_i n] + P(n)`
fn quadratic_phase(g: &PolySeq, n: i64) -> ExactRational {
    let nq = int(n);
    let p: ExactRational = g.p.coeffs().iter().rev().fold(ExactRational::zero(), |acc, c| acc * &nq + c);
    g.alpha.iter().zip(&g.beta).fold(p, |acc, (a, b)| acc - n_bracket(a, b, n))
}

fn direct_periodic(g: &PolySeq, n: u64) -> bool {
    let nn = n as i64;
    (0..nn).all(|x| is_int(&(quadratic_phase(g, x + nn) - quadratic_phase(g, x))))
}

fn unit(x: &ExactRational) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * to_f64(x))
}

fn fmt_q(v: &[ExactRational]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn fmt_i(v: &[Vec<i64>]) -> String {
    v.iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("; ")
}

fn random_fn<R: Rng>(rng: &mut R, n: usize) -> FnZN {
    FnZN::new(
        (0..n)
            .map(|_| Complex64::from_polar(rng.gen_range(0.0..=1.0), std::f64::consts::TAU * rng.gen_range(0.0..1.0)))
            .collect(),
    )
}

fn random_subset<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(density)).collect()
}

// ---------------------------------------------------------------------------
// 1, 2: correspondence and periodicity

fn c01_instances(cfg: &SuiteConfig) -> Vec<(u64, usize, ElemNilmanifold, PolySeq)> {
    let mut rng = stream(cfg.seed, 1);
    let mut out = Vec::new();
    for n in [7u64, 31, 101] {
        for i in 0..200 {
            let d = rng.gen_range(1..=3);
            let (m, g) = random_generic(&mut rng, d, n);
            out.push((n, i, m, g));
        }
    }
    out
}

fn c01_correspondence(cfg: &SuiteConfig) -> (bool, String, Table) {
    let inst = c01_instances(cfg);
    let rows: Vec<(bool, bool)> = inst
        .par_iter()
        .map(|(n, _, m, g)| {
            let e = elementary_quadratic(&g.alpha, &g.beta, &g.p, SignReading::GlobalMinus);
            let same = (0..*n as i64).all(|x| nilsequence_phase(m, g, x) == e.eval_mod1(x));
            (same, direct_periodic(g, *n))
        })
        .collect();
    let mut t = Table::new(&["N", "index", "d", "alpha", "beta", "P", "periodic", "phases_equal"]);
    for ((n, i, _, g), (same, per)) in inst.iter().zip(&rows) {
        t.push(vec![
            (*n).into(),
            (*i).into(),
            g.d().into(),
            fmt_q(&g.alpha).into(),
            fmt_q(&g.beta).into(),
            fmt_q(g.p.coeffs()).into(),
            (*per).into(),
            (*same).into(),
        ]);
    }
    let ok = rows.iter().filter(|r| r.0 && r.1).count();
    (ok == rows.len(), format!("{ok}/{} periodic instances with equal phases", rows.len()), t)
}

fn c02_periodicity(cfg: &SuiteConfig) -> (bool, String, Table) {
    let inst = c01_instances(cfg);
    let mut t = Table::new(&["kind", "N", "index", "alpha", "beta", "P", "expected_periodic", "reported_periodic", "denominators_ok", "literal_p2_den_2n"]);
    let mut good = 0;
    let rows: Vec<(bool, bool, bool, bool)> = inst
        .par_iter()
        .map(|(n, _, _, g)| {
            let nq = int(*n as i64);
            let phases = g.alpha.iter().chain(&g.beta).all(|x| is_int(&(x * &nq)));
            let corr: ExactRational = g.alpha.iter().zip(&g.beta).map(|(a, b)| a * b).sum::<ExactRational>() / int(2);
            let reduced = is_int(&((g.p.coeff(2) - corr) * int(2) * &nq));
            let literal = is_int(&(g.p.coeff(2) * int(2) * &nq));
            let e = elementary_quadratic(&g.alpha, &g.beta, &g.p, SignReading::GlobalMinus);
            let rep = periodicity_report(&e, *n);
            let lib = rep
                .denominators
                .as_ref()
                .is_some_and(|d| d.phases_denominator_n && d.reduced_quadratic_denominator_2n);
            (rep.periodic, phases && reduced, lib, literal)
        })
        .collect();
    for ((n, i, _, g), (per, direct, lib, literal)) in inst.iter().zip(&rows) {
        let ok = *per && *direct && *lib;
        good += ok as usize;
        t.push(vec![
            "periodic".into(),
            (*n).into(),
            (*i).into(),
            fmt_q(&g.alpha).into(),
            fmt_q(&g.beta).into(),
            fmt_q(g.p.coeffs()).into(),
            true.into(),
            (*per).into(),
            (*direct && *lib).into(),
            (*literal).into(),
        ]);
    }
    // non-conforming: perturb a periodic instance until the direct check fails
    let mut rng = stream(cfg.seed, 2);
    let mut rejected = 0;
    for i in 0..50 {
        let n = [7u64, 31, 101][i % 3];
        let nn = n as i64;
        let g = loop {
            let d = rng.gen_range(1..=3);
            let (_, g) = random_generic(&mut rng, d, n);
            let mut g = g;
            let mut p = g.p.coeffs().to_vec();
            p.resize(3, ExactRational::zero());
            match i % 5 {
                0 => g.alpha[0] += rat(rng.gen_range(1..nn), nn * nn),
                1 => g.beta[0] += rat(1, 2 * nn),
                2 => p[2] += rat(1, 4),
                3 => p[1] += rat(1, 2 * nn),
                _ => p[2] += rat(1, 2 * nn * nn),
            }
            g.p = ExactPolynomial::new(p);
            if !direct_periodic(&g, n) {
                break g;
            }
        };
        let e = elementary_quadratic(&g.alpha, &g.beta, &g.p, SignReading::GlobalMinus);
        let per = is_periodic_phase(&e, n);
        rejected += !per as usize;
        t.push(vec![
            format!("perturbed_{}", i % 5).into(),
            n.into(),
            i.into(),
            fmt_q(&g.alpha).into(),
            fmt_q(&g.beta).into(),
            fmt_q(g.p.coeffs()).into(),
            false.into(),
            per.into(),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
        ]);
    }
    (
        good == inst.len() && rejected == 50,
        format!("{good}/{} conforming, {rejected}/50 non-conforming rejected", inst.len()),
        t,
    )
}

// ---------------------------------------------------------------------------
// 3: van der Corput

fn c03_vdc(cfg: &SuiteConfig) -> (bool, String, Table) {
    let mut rng = stream(cfg.seed, 3);
    let n = 31i64;
    let inst: Vec<(ExactRational, ExactRational, i64)> = (0..1000)
        .map(|_| (rat(rng.gen_range(-n..n), n), rat(rng.gen_range(-n..n), n), rng.gen_range(-n + 1..n)))
        .collect();
    let rows: Vec<(bool, bool)> = inst
        .par_iter()
        .map(|(a, b, h)| {
            let v = vdc_expand(a, b, *h);
            let shape = v.top.terms.iter().all(|t| matches!(t, BracketTerm::Poly { p } if p.degree() <= 1))
                && v.lower.iter().all(BracketTerm::is_lower_order);
            let exact = (0..n).all(|x| {
                let direct = n_bracket(a, b, x + h) - n_bracket(a, b, x);
                let lib = v.top.eval_exact(x) + v.lower.iter().map(|t| t.eval(x)).sum::<ExactRational>();
                is_int(&(direct - lib))
            });
            (exact, shape)
        })
        .collect();
    let mut t = Table::new(&["index", "alpha", "beta", "h", "identity_holds", "lower_order"]);
    for (i, ((a, b, h), (e, s))) in inst.iter().zip(&rows).enumerate() {
        t.push(vec![i.into(), a.into(), b.into(), (*h).into(), (*e).into(), (*s).into()]);
    }
    let ok = rows.iter().filter(|r| r.0 && r.1).count();
    (ok == 1000, format!("{ok}/1000 exact at N = 31"), t)
}

// ---------------------------------------------------------------------------
// 4: Fourier complexity

struct FourierRow {
    lemma: &'static str,
    index: usize,
    terms: usize,
    error: Option<f64>,
    periodic: bool,
    note: String,
}

fn measured_error(exp: &FourierExpansion, target: impl Fn(i64, i64) -> Complex64 + Sync) -> f64 {
    let (n, h) = (exp.n as i64, exp.h as i64);
    // frequencies as numerators over N and H
    let terms: Vec<(Complex64, i64, i64)> = exp
        .terms
        .iter()
        .map(|t| {
            let a = (&t.freq_n * int(n)).to_integer().to_i64().expect("frequency on the N grid");
            let b = (&t.freq_h * int(h)).to_integer().to_i64().expect("frequency on the H grid");
            (t.coeff, a, b)
        })
        .collect();
    let approx = |x: i64, y: i64| -> Complex64 {
        terms
            .iter()
            .map(|&(c, a, b)| {
                let u = (a * x).rem_euclid(n) as f64 / n as f64 + (b * y).rem_euclid(h) as f64 / h as f64;
                c * Complex64::from_polar(1.0, std::f64::consts::TAU * u)
            })
            .sum()
    };
    let s: f64 = (0..n)
        .into_par_iter()
        .map(|x| (0..h).map(|y| (target(x, y) - approx(x, y)).norm()).sum::<f64>())
        .sum();
    s / (n * h) as f64
}

fn denominators_divide(exp: &FourierExpansion) -> bool {
    let (n, h) = (int(exp.n as i64), int(exp.h as i64));
    exp.terms.iter().all(|t| is_int(&(&t.freq_n * &n)) && is_int(&(&t.freq_h * &h)))
}

fn c04_fourier(cfg: &SuiteConfig) -> (bool, String, Table) {
    let mut rng = stream(cfg.seed, 4);
    let fc = &cfg.thresholds.fourier;
    let n = 31i64;
    let delta = 0.05;
    let q = |rng: &mut ChaCha8Rng| rat(rng.gen_range(0..n), n);
    let mut rows = Vec::new();
    for i in 0..50 {
        let d = rng.gen_range(1..=2);
        let a: Vec<ExactRational> = (0..d).map(|_| rat(rng.gen_range(-2 * n..=2 * n), n)).collect();
        let al: Vec<ExactRational> = (0..d).map(|_| q(&mut rng)).collect();
        let row = match expand_trivial(&a, &al, n as u64, delta, fc) {
            Ok(exp) => {
                let err = measured_error(&exp, |x, _| {
                    unit(&a.iter().zip(&al).map(|(ai, li)| ai * sfrac(&(li * int(x)))).sum())
                });
                FourierRow { lemma: "trivial", index: i, terms: exp.terms.len(), error: Some(err), periodic: denominators_divide(&exp), note: format!("a = {}, alpha = {}", fmt_q(&a), fmt_q(&al)) }
            }
            Err(e) => FourierRow { lemma: "trivial", index: i, terms: 0, error: None, periodic: false, note: e.to_string() },
        };
        rows.push(row);
    }
    for i in 0..50 {
        let terms: Vec<BracketTerm> = (0..rng.gen_range(1..=2))
            .map(|_| BracketTerm::FracProd {
                a: int(rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 }),
                p1: Phase::new(q(&mut rng), q(&mut rng)),
                p2: Phase::new(q(&mut rng), q(&mut rng)),
            })
            .collect();
        let row = match expand_frac_product(&terms, n as u64, delta, fc) {
            Ok(exp) => {
                let err = measured_error(&exp, |x, _| {
                    let xq = int(x);
                    unit(
                        &terms
                            .iter()
                            .map(|t| match t {
                                BracketTerm::FracProd { a, p1, p2 } => {
                                    a * sfrac(&(&p1.slope * &xq + &p1.offset)) * sfrac(&(&p2.slope * &xq + &p2.offset))
                                }
                                _ => unreachable!(),
                            })
                            .sum(),
                    )
                });
                FourierRow { lemma: "frac_product", index: i, terms: exp.terms.len(), error: Some(err), periodic: denominators_divide(&exp), note: format!("{} terms", terms.len()) }
            }
            Err(e) => FourierRow { lemma: "frac_product", index: i, terms: 0, error: None, periodic: false, note: e.to_string() },
        };
        rows.push(row);
    }
    let p2 = |rng: &mut ChaCha8Rng| Phase2::new(q(rng), q(rng), rat(rng.gen_range(0..n * n), n * n));
    let eval2 = |p: &Phase2, x: i64, y: i64| sfrac(&(&p.slope_n * int(x) + &p.slope_h * int(y) + &p.offset));
    for i in 0..50 {
        let terms: Vec<BilinearTerm> = (0..rng.gen_range(1..=2))
            .map(|_| BilinearTerm { a: int(rng.gen_range(1..=2)), p1: p2(&mut rng), p2: p2(&mut rng) })
            .collect();
        let row = match expand_bilinear(&terms, n as u64, n as u64, delta, fc) {
            Ok(exp) => {
                let err = measured_error(&exp, |x, y| {
                    unit(&terms.iter().map(|t| &t.a * eval2(&t.p1, x, y) * eval2(&t.p2, x, y)).sum())
                });
                FourierRow { lemma: "bilinear", index: i, terms: exp.terms.len(), error: Some(err), periodic: denominators_divide(&exp), note: format!("{} terms", terms.len()) }
            }
            Err(e) => FourierRow { lemma: "bilinear", index: i, terms: 0, error: None, periodic: false, note: e.to_string() },
        };
        rows.push(row);
    }
    for i in 0..50 {
        let factors: Vec<(Phase2, Phase2)> = (0..rng.gen_range(1..=2)).map(|_| (p2(&mut rng), p2(&mut rng))).collect();
        let row = match expand_box_product(&factors, n as u64, n as u64, delta, fc) {
            Ok(exp) => {
                let s: f64 = (0..n)
                    .into_par_iter()
                    .map(|x| {
                        (0..n)
                            .map(|y| {
                                let target = unit(&factors.iter().map(|(p, q)| eval2(p, x, y) * eval2(q, x, y)).sum());
                                (target - exp.eval(x, y)).norm()
                            })
                            .sum::<f64>()
                    })
                    .sum();
                let grid = exp.coeffs.iter().all(|&(a, b, c)| (2.0 * a).fract() == 0.0 && (2.0 * b).fract() == 0.0 && c.norm() <= 1.0 + 1e-12);
                FourierRow { lemma: "box_product", index: i, terms: exp.coeffs.len(), error: Some(s / (n * n) as f64), periodic: grid, note: format!("{} factors", factors.len()) }
            }
            Err(e) => FourierRow { lemma: "box_product", index: i, terms: 0, error: None, periodic: false, note: e.to_string() },
        };
        rows.push(row);
    }
    let mut t = Table::new(&["lemma", "index", "terms", "measured_l1_error", "frequencies_ok", "note"]);
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for r in &rows {
        let pass = r.error.is_some_and(|e| e <= delta) && r.periodic;
        ok += pass as usize;
        worst = worst.max(r.error.unwrap_or(f64::INFINITY));
        t.push(vec![
            r.lemma.into(),
            r.index.into(),
            r.terms.into(),
            r.error.map_or(Cell::Text("error".into()), Cell::Float),
            r.periodic.into(),
            r.note.clone().into(),
        ]);
    }
    (ok == rows.len(), format!("{ok}/{} within delta = 0.05, worst {worst:.4}", rows.len()), t)
}

// ---------------------------------------------------------------------------
// 5, 6: RBPL

fn same_span(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let r = linalg::rank_int(a);
    let joint: Vec<Vec<i64>> = a.iter().chain(b).cloned().collect();
    r == linalg::rank_int(b) && r == linalg::rank_int(&joint)
}

/// Independence, orthogonality and exact annihilation, from scratch.
fn direct_certificate_check(
    a: &[ExactRational],
    alpha: &[ExactRational],
    w: &[Vec<i64>],
    eta: &[Vec<i64>],
    cond: &WCondition,
) -> bool {
    let d = a.len();
    let all: Vec<Vec<i64>> = w.iter().chain(eta).cloned().collect();
    let dot = |v: &[i64], x: &[ExactRational]| v.iter().zip(x).map(|(c, y)| int(*c) * y).sum::<ExactRational>();
    all.len() == d
        && linalg::rank_int(&all) == d
        && w.iter().all(|wi| eta.iter().all(|e| wi.iter().zip(e).map(|(x, y)| x * y).sum::<i64>() == 0))
        && eta.iter().all(|e| is_int(&dot(e, alpha)))
        && w.iter().all(|wi| {
            let x = dot(wi, a);
            match cond {
                WCondition::Abs(b) => x.abs() <= *b,
                WCondition::Mod1 => is_int(&x),
            }
        })
}

fn c05_rbpl(cfg: &SuiteConfig) -> (bool, String, Table) {
    let mut rng = stream(cfg.seed, 5);
    let rc = &cfg.thresholds.rbpl;
    let ns = [31u64, 53, 101, 211];
    let inst: Vec<_> = (0..100)
        .map(|i| {
            let d = 1 + i % 4;
            let n = ns[(i / 4) % 4];
            let noisy = (i / 16) % 2 == 1;
            let p = random_planted(&mut rng, d, n, noisy).expect("planted instance");
            (i, d, n, noisy, p)
        })
        .collect();
    let rows: Vec<Vec<Cell>> = inst
        .par_iter()
        .map(|(i, d, n, noisy, p)| {
            let ins = &p.instance;
            let mut row: Vec<Cell> = vec![(*i).into(), (*d).into(), (*n).into(), (*noisy).into(), ins.h.len().into()];
            match rbpl::solve(ins, rc) {
                Ok(RbplOutcome::Certificate { cert, steps }) => {
                    let rep = rbpl::verify(&ins.a, &ins.alpha, &cert);
                    let direct = direct_certificate_check(&ins.a, &ins.alpha, &cert.w, &cert.eta, &cert.condition);
                    let brute = if *d <= 3 && *n <= 53 {
                        let thr = &rc.w_slack * &ins.k / int(*n as i64);
                        match rbpl::brute_force(&ins.a, &ins.alpha, &thr, cert.height()) {
                            Some(b) => Cell::Bool(same_span(&b.eta, &cert.eta)),
                            None => Cell::Bool(false),
                        }
                    } else {
                        Cell::Text("skipped".into())
                    };
                    row.extend([
                        "certificate".into(),
                        steps.len().into(),
                        cert.r().into(),
                        fmt_i(&cert.eta).into(),
                        cert.height().into(),
                        (rep.pass && direct).into(),
                        brute,
                    ]);
                }
                Ok(RbplOutcome::Degenerate(r)) => {
                    row.extend(["degenerate".into(), 0usize.into(), 0usize.into(), r.reason.into(), 0i64.into(), false.into(), false.into()])
                }
                Err(e) => row.extend(["error".into(), 0usize.into(), 0usize.into(), e.to_string().into(), 0i64.into(), false.into(), false.into()]),
            }
            row
        })
        .collect();
    let mut t = Table::new(&["index", "d", "N", "noisy", "good_set", "outcome", "steps", "r", "eta", "height", "verified", "brute_force_same_span"]);
    let (mut ver, mut bf, mut bf_total) = (0, 0, 0);
    for r in rows {
        ver += matches!(r[10], Cell::Bool(true)) as usize;
        if !matches!(r[11], Cell::Text(_)) {
            bf_total += 1;
            bf += matches!(r[11], Cell::Bool(true)) as usize;
        }
        t.push(r);
    }
    (ver == 100 && bf == bf_total, format!("{ver}/100 verified, {bf}/{bf_total} match brute force"), t)
}

fn c06_affine(cfg: &SuiteConfig) -> (bool, String, Table) {
    let mut rng = stream(cfg.seed, 6);
    let mut t = Table::new(&["index", "d", "N", "branch", "input_verified", "output_r", "output_eta", "output_verified"]);
    let mut ok = 0;
    let mut branches = [0usize; 2];
    for i in 0..100 {
        let d = 1 + i % 3;
        let n = [31u64, 53, 101][(i / 3) % 3];
        let nu = i % 2 == 0;
        let case = random_affine_case(&mut rng, d, n, nu).expect("affine case");
        let mut a1 = case.a.clone();
        a1.push(int(1));
        let mut al1 = case.alpha.clone();
        al1.push(case.beta.clone());
        let input_ok = rbpl::verify(&a1, &al1, &case.cert).pass;
        let nu_seen = case.cert.eta.iter().any(|e| e[d] != 0);
        branches[nu_seen as usize] += 1;
        let (r, eta, out_ok) = match rbpl::extend_affine(&case.cert, &case.a, &case.alpha, &case.beta) {
            Ok(c) => {
                let pass = rbpl::verify(&case.a, &case.alpha, &c).pass
                    && direct_certificate_check(&case.a, &case.alpha, &c.w, &c.eta, &WCondition::Mod1);
                (c.r(), fmt_i(&c.eta), pass)
            }
            Err(e) => (0, e.to_string(), false),
        };
        ok += (input_ok && out_ok) as usize;
        t.push(vec![
            i.into(),
            d.into(),
            n.into(),
            (if nu_seen { "nu_nonzero" } else { "nu_zero" }).into(),
            input_ok.into(),
            r.into(),
            eta.into(),
            out_ok.into(),
        ]);
    }
    (
        ok == 100 && branches.iter().all(|&b| b > 0),
        format!("{ok}/100 verified ({} nu nonzero, {} all nu zero)", branches[1], branches[0]),
        t,
    )
}

// ---------------------------------------------------------------------------
// 7: equidistribution

/// Modulus of the generic negative control; see the README.
pub const GENERIC_N: u64 = 1009;

fn c07_equidist(cfg: &SuiteConfig) -> (bool, String, Table) {
    let mut rng = stream(cfg.seed, 7);
    let delta = 0.1;
    let ec = &cfg.thresholds.equidist;
    let planted: Vec<_> = (0..25)
        .map(|i| {
            let d = 1 + i % 3;
            let n = [101u64, 211][i % 2];
            (i, d, n, random_planted_isotropic(&mut rng, d, n, delta))
        })
        .collect();
    let generic: Vec<_> = (0..25)
        .map(|i| {
            let d = 1 + i % 3;
            (i, d, random_generic(&mut rng, d, GENERIC_N))
        })
        .collect();
    let prow: Vec<Vec<Cell>> = planted
        .par_iter()
        .map(|(i, d, n, p)| {
            let mut row: Vec<Cell> = vec!["planted".into(), (*i).into(), (*d).into(), (*n).into(), p.mean.into()];
            match run_dichotomy(&p.m, &p.g, *n, delta, ec) {
                Ok(res) => match &res.branch {
                    Branch::Certificate { w, eta } => {
                        let rep = verify_dichotomy(&p.m, &p.g, &res);
                        let contains_psi =
                            eta.iter().all(|e| e.iter().zip(&p.v).map(|(x, y)| x * y).sum::<i64>() == 0);
                        row.extend([
                            "certificate".into(),
                            w.len().into(),
                            fmt_i(w).into(),
                            rep.isotropic.into(),
                            (rep.pass && rep.isotropic).into(),
                            contains_psi.into(),
                        ]);
                    }
                    Branch::SmallN { reason } => {
                        row.extend(["small_n".into(), 0usize.into(), reason.clone().into(), false.into(), false.into(), false.into()])
                    }
                },
                Err(e) => row.extend(["error".into(), 0usize.into(), e.to_string().into(), false.into(), false.into(), false.into()]),
            }
            row
        })
        .collect();
    let grow: Vec<Vec<Cell>> = generic
        .par_iter()
        .map(|(i, d, (m, g))| {
            let mean = mean_correlation(m, g, GENERIC_N).unwrap_or(f64::INFINITY);
            vec![
                "generic".into(),
                (*i).into(),
                (*d).into(),
                GENERIC_N.into(),
                mean.into(),
                (if mean < delta { "below_delta" } else { "above_delta" }).into(),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
                (mean < delta).into(),
                Cell::Text(String::new()),
            ]
        })
        .collect();
    let mut t = Table::new(&["kind", "index", "d", "N", "mean_correlation", "outcome", "r", "w", "isotropic", "pass", "kernel_contains_psi"]);
    let (mut p_ok, mut g_ok) = (0, 0);
    for r in prow {
        p_ok += matches!(r[9], Cell::Bool(true)) as usize;
        t.push(r);
    }
    for r in grow {
        g_ok += matches!(r[9], Cell::Bool(true)) as usize;
        t.push(r);
    }
    (p_ok == 25 && g_ok == 25, format!("{p_ok}/25 planted certified isotropic, {g_ok}/25 generic below delta"), t)
}

// ---------------------------------------------------------------------------
// 8, 9: Gowers norms and counting operators

fn c08_gowers(cfg: &SuiteConfig) -> (bool, String, Table) {
    let tol = &cfg.thresholds.gowers;
    let mut rng = stream(cfg.seed, 8);
    let fs: Vec<FnZN> = (0..100)
        .map(|_| {
            let n = rng.gen_range(8..=64);
            random_fn(&mut rng, n)
        })
        .collect();
    let sets: Vec<Vec<usize>> = (0..50)
        .map(|_| {
            let rho = rng.gen_range(0.1..0.9);
            random_subset(&mut rng, 61, rho)
        })
        .collect();
    let frows: Vec<(usize, [f64; 4], f64)> = fs
        .par_iter()
        .map(|f| {
            let u = [1, 2, 3, 4].map(|s| gowers_norm(f, s).expect("order in range"));
            (f.n, u, u2_direct(f))
        })
        .collect();
    let mut t = Table::new(&["kind", "index", "N", "u1", "u2", "u3", "u4", "u2_direct_or_lambda1", "pass"]);
    let (mut dual_ok, mut mono_ok, mut id_ok) = (0, 0, 0);
    for (i, (n, u, direct)) in frows.iter().enumerate() {
        let agree = (u[1] - direct).abs() <= tol.norm_rel * direct.max(1e-300);
        let mono = u.windows(2).all(|w| w[0] <= w[1] + tol.norm_rel * w[1].max(1.0));
        dual_ok += agree as usize;
        mono_ok += mono as usize;
        t.push(vec![
            "random_f".into(),
            i.into(),
            (*n).into(),
            u[0].into(),
            u[1].into(),
            u[2].into(),
            u[3].into(),
            (*direct).into(),
            (agree && mono).into(),
        ]);
    }
    let srows: Vec<(f64, f64)> = sets
        .par_iter()
        .map(|a| {
            let f = FnZN::indicator(61, a);
            let l = lambda1(&f, &f, &f, &f).expect("same modulus");
            (gowers_norm(&f, 2).expect("order 2").powi(4), l.norm())
        })
        .collect();
    for (i, (u4, l)) in srows.iter().enumerate() {
        let ok = (u4 - l).abs() <= tol.identity_abs;
        id_ok += ok as usize;
        let nan = f64::NAN;
        t.push(vec!["indicator".into(), i.into(), 61usize.into(), nan.into(), u4.powf(0.25).into(), nan.into(), nan.into(), (*l).into(), ok.into()]);
    }
    (
        dual_ok == 100 && mono_ok == 100 && id_ok == 50,
        format!("U2 routes {dual_ok}/100, monotone {mono_ok}/100, lambda1 identity {id_ok}/50"),
        t,
    )
}

fn c09_dual(cfg: &SuiteConfig) -> (bool, String, Table) {
    let tol = cfg.thresholds.gowers.identity_abs;
    let mut rng = stream(cfg.seed, 9);
    let n = 31;
    let triples: Vec<[FnZN; 3]> = (0..100).map(|_| [random_fn(&mut rng, n), random_fn(&mut rng, n), random_fn(&mut rng, n)]).collect();
    let pairs = [("y,2y", IntPoly(vec![0, 1]), IntPoly(vec![0, 2])), ("y^2,y", IntPoly(vec![0, 0, 1]), IntPoly(vec![0, 1]))];
    let mut t = Table::new(&["index", "P,Q", "mean_sq", "lambda_re", "lambda_im", "abs_diff", "pass"]);
    let mut ok = 0;
    for (label, pp, qq) in &pairs {
        let rows: Vec<(f64, Complex64)> = triples
            .par_iter()
            .map(|[f, g, k]| {
                let dd = dual_d(f, g, k, pp, qq).expect("same modulus");
                // the dual function by its defining average
                let direct = FnZN::from_fn(n, |x| {
                    let x = x as i64;
                    (0..n as i64)
                        .map(|y| {
                            let (p, q) = (pp.eval_mod(y, n as i64), qq.eval_mod(y, n as i64));
                            f.at(x - p - q) * g.at(x - q) * k.at(x - p)
                        })
                        .sum::<Complex64>()
                        / n as f64
                });
                let agree = dd.values.iter().zip(&direct.values).all(|(a, b)| (a - b).norm() <= tol);
                let lhs = dd.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
                let rhs = lambda(&f.conj(), &g.conj(), &k.conj(), &dd, pp, qq).expect("valid");
                (if agree { lhs } else { f64::NAN }, rhs)
            })
            .collect();
        for (i, (lhs, rhs)) in rows.iter().enumerate() {
            let diff = (Complex64::new(*lhs, 0.0) - rhs).norm();
            let pass = diff <= tol;
            ok += pass as usize;
            t.push(vec![i.into(), (*label).into(), (*lhs).into(), rhs.re.into(), rhs.im.into(), diff.into(), pass.into()]);
        }
    }
    (ok == 200, format!("{ok}/200 within {tol:e}"), t)
}

// ---------------------------------------------------------------------------
// 10, 11, 12: additive combinatorics

/// `#{(x, y) in A x B : x + y = s}` for every `s`.
fn sumset_counts(a: &[usize], b: &[usize], n: usize) -> Vec<u128> {
    let mut r = vec![0u128; n];
    for &x in a {
        for &y in b {
            r[(x + y) % n] += 1;
        }
    }
    r
}

fn c10_energy(cfg: &SuiteConfig) -> (bool, String, Table) {
    let mut rng = stream(cfg.seed, 10);
    let n = 101;
    let quads: Vec<[Vec<usize>; 4]> = (0..1000)
        .map(|_| std::array::from_fn(|_| {
            let rho = rng.gen_range(0.02..0.6);
            random_subset(&mut rng, n, rho)
        }))
        .collect();
    let rows: Vec<(u128, Vec<u128>, bool, bool)> = quads
        .par_iter()
        .map(|s| {
            // a1 - a3 = a2 - a4, i.e. a1 + a4 = a2 + a3
            let lhs: u128 = sumset_counts(&s[0], &s[3], n).iter().zip(sumset_counts(&s[1], &s[2], n)).map(|(x, y)| x * y).sum();
            let e: Vec<u128> = s.iter().map(|a| sumset_counts(a, a, n).iter().map(|c| c * c).sum()).collect();
            let holds = BigInt::from(lhs).pow(4) <= e.iter().map(|&x| BigInt::from(x)).product::<BigInt>();
            let lib = energy_cs_holds([&s[0], &s[1], &s[2], &s[3]], n) && energy4_count(&s[0], &s[1], &s[2], &s[3], n) == lhs;
            (lhs, e, holds, lib)
        })
        .collect();
    let mut t = Table::new(&["index", "sizes", "e4_count", "energy_counts", "holds", "library_agrees"]);
    let mut ok = 0;
    for (i, (q, (lhs, e, holds, lib))) in quads.iter().zip(&rows).enumerate() {
        ok += (*holds && *lib) as usize;
        let sizes = q.iter().map(|a| a.len().to_string()).collect::<Vec<_>>().join(" ");
        let es = e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        t.push(vec![i.into(), sizes.into(), lhs.to_string().into(), es.into(), (*holds).into(), (*lib).into()]);
    }
    (ok == 1000, format!("{ok}/1000 exact comparisons hold"), t)
}

fn c11_quadruples(cfg: &SuiteConfig) -> (bool, String, Table) {
    let mut rng = stream(cfg.seed, 11);
    let qc = &cfg.thresholds.quadruples;
    let delta = rat(1, 2);
    let shapes = [(0.5, 0.0), (0.5, 0.05), (0.3, 0.1), (0.8, 0.02), (0.15, 0.05)];
    let mut t = Table::new(&["N", "index", "density", "noise", "H", "measured_delta", "hypothesis", "total_quadruples", "count", "bound", "pass"]);
    let mut ok = 0;
    let mut total_runs = 0;
    for n in [31usize, 61] {
        for (i, &(density, noise)) in shapes.iter().enumerate() {
            total_runs += 1;
            let p = planted_chi_family(&mut rng, n, density, noise);
            let in_h: Vec<bool> = (0..n).map(|h| p.h_set.contains(&h)).collect();
            let mut total = 0u64;
            for &h1 in &p.h_set {
                for &h2 in &p.h_set {
                    for &h3 in &p.h_set {
                        total += in_h[(h1 + h2 + n - h3) % n] as u64;
                    }
                }
            }
            let eta = rat(p.h_set.len() as i64, n as i64);
            let bound = eta.pow(8) * delta.pow(4) * int(n as i64).pow(3) / int(2);
            let chi: HashMap<usize, FnZN> = p.chi.clone();
            let (md, hyp, count, pass) = match additive_quadruple_count(&p.h_set, &chi, &delta, Some((&p.f1, &p.f2)), n, qc) {
                Ok(r) => {
                    let pass = r.hypothesis_verified == Some(true)
                        && r.threshold_pass == Some(true)
                        && r.total_quadruples == total
                        && r.count <= total
                        && int(r.count as i64) >= bound;
                    (r.measured_delta.unwrap_or(f64::NAN), r.hypothesis_verified == Some(true), r.count, pass)
                }
                Err(_) => (f64::NAN, false, 0, false),
            };
            ok += pass as usize;
            t.push(vec![
                n.into(),
                i.into(),
                density.into(),
                noise.into(),
                p.h_set.len().into(),
                md.into(),
                hyp.into(),
                total.into(),
                count.into(),
                bound.into(),
                pass.into(),
            ]);
        }
    }
    (ok == total_runs, format!("{ok}/{total_runs} planted families meet the bound"), t)
}

fn dist_z(x: &ExactRational) -> ExactRational {
    sfrac(x).abs()
}

fn c12_bohr(cfg: &SuiteConfig) -> (bool, String, Table) {
    let mut rng = stream(cfg.seed, 12);
    let rc = &cfg.thresholds.bohr;
    let mut t = Table::new(&["index", "N", "S", "rho", "rho_prime", "in_range", "grid_points", "regular"]);
    let mut ok = 0;
    for i in 0..20 {
        let n = [101u64, 509][i % 2];
        let nn = n as i64;
        let k = rng.gen_range(1..=4);
        let s: Vec<ExactRational> = (0..k).map(|_| rat(rng.gen_range(1..nn), nn)).collect();
        let rho = rat(rng.gen_range(50..=500), 1000);
        // largest distance over S, per x
        let far: Vec<ExactRational> = (0..nn)
            .map(|x| s.iter().map(|a| dist_z(&(a * int(x)))).max().unwrap_or_else(ExactRational::zero))
            .collect();
        let size = |r: &ExactRational| far.iter().filter(|d| *d < r).count() as i64;
        let (rp, in_range, regular) = match find_regular_radius(&s, &rho, n, rc) {
            Ok(rp) => {
                let in_range = rp >= &rho / int(2) && rp <= rho;
                let b = int(size(&rp));
                let c = int(100 * k as i64);
                let mut eps = rat(1, 100 * k as i64);
                let mut regular = true;
                for _ in 0..rc.grid_points {
                    let lo = &b * (ExactRational::one() - &c * &eps);
                    let hi = &b * (ExactRational::one() + &c * &eps);
                    let grown = int(size(&(&rp * (ExactRational::one() + &eps))));
                    let shrunk = int(size(&(&rp * (ExactRational::one() - &eps))));
                    regular &= lo <= grown && grown <= hi && shrunk >= lo;
                    eps *= rat(2, 3);
                }
                (Cell::Frac(rp), in_range, regular)
            }
            Err(e) => (Cell::Text(e.to_string()), false, false),
        };
        ok += (in_range && regular) as usize;
        t.push(vec![i.into(), n.into(), fmt_q(&s).into(), rho.into(), rp, in_range.into(), rc.grid_points.into(), regular.into()]);
    }
    (ok == 20, format!("{ok}/20 regular radii in [rho/2, rho]"), t)
}

/// Parses `1,3,5-7` into criterion ids.
pub fn parse_only(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("bad criterion list entry {part:?}");
        if let Some((a, b)) = part.split_once('-') {
            let (a, b): (u32, u32) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if let Some(x) = out.iter().find(|&&x| !(1..=12).contains(&x)) {
        return Err(format!("no criterion {x}"));
    }
    Ok(out)
}
