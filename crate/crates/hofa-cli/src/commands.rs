//! Argument parsing and the subcommands of `hofa`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hofa_core::additive::{
    additive_quadruple_count, bohr_build, energy, energy4, energy_cs_holds, find_regular_radius, planted_chi_family,
};
use hofa_core::brackets::BracketTerm;
use hofa_core::equidist::{random_planted_isotropic, run_dichotomy, Branch};
use hofa_core::fourier::{
    dft_expansion, expand_bilinear, expand_box_product, expand_frac_product, expand_trivial, BilinearTerm,
    FourierExpansion, Phase2,
};
use hofa_core::gowers::{dual_d, gowers_norm, lambda, lambda1, FnZN, IntPoly};
use hofa_core::nilmani::{ElemNilmanifold, PolySeq};
use hofa_core::ratmod::{is_prime, parse_rational, ExactRational};
use hofa_core::rbpl::{self, random_planted, Certificate, RbplInstance};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::suite::{self, SuiteConfig};
use crate::table::{emit_table, fmt_float, write_text, Cell, Format, Table, TableError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Output(#[from] TableError),
    /// A verification or test did not pass.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "hofa", version, about = "Exact experiments with bracket polynomials, nilsequences and Gowers norms")]
pub struct Cli {
    /// Key-value (TOML) experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file, or output directory for `equidist run` and `selftest`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; falls back to HOFA_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gowers uniformity norms.
    #[command(subcommand)]
    Gowers(GowersCmd),
    /// Counting operators.
    #[command(subcommand)]
    Count(CountCmd),
    /// The bracket-polynomial solver.
    #[command(subcommand)]
    Rbpl(RbplCmd),
    /// The equidistribution dichotomy.
    #[command(subcommand)]
    Equidist(EquidistCmd),
    /// Fourier expansions.
    #[command(subcommand)]
    Fourier(FourierCmd),
    /// Bohr sets.
    #[command(subcommand)]
    Bohr(BohrCmd),
    /// Additive energies of one, two or four sets.
    Energy(EnergyArgs),
    /// Additive-quadruple statistics on a planted family.
    Quadruples(QuadArgs),
    /// Runs the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Subcommand)]
pub enum GowersCmd {
    /// Norm of a function read from JSON.
    Norm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        s: usize,
    },
    /// U^1..U^4 of random one-bounded functions.
    Random {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Debug, Args)]
pub struct CountInputs {
    /// JSON function; repeat up to four times, the last one fills the rest.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Indicator of a set, e.g. `0,1`, used for every slot.
    #[arg(long, conflicts_with = "input")]
    set: Option<String>,
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum CountCmd {
    /// E_{x,y} f(x) g(x+P(y)) k(x+Q(y)) p(x+P(y)+Q(y)).
    Lambda {
        #[command(flatten)]
        inputs: CountInputs,
        /// Coefficients of P from the constant term up.
        #[arg(long, default_value = "0,1")]
        p: String,
        #[arg(long, default_value = "0,2")]
        q: String,
    },
    /// E_{x,y,z} f(x) g(x+y) k(x+z) p(x+y+z).
    Lambda1 {
        #[command(flatten)]
        inputs: CountInputs,
    },
    /// The dual function D(f, g, k).
    Dual {
        #[command(flatten)]
        inputs: CountInputs,
        #[arg(long, default_value = "0,1")]
        p: String,
        #[arg(long, default_value = "0,2")]
        q: String,
    },
    /// |Lambda - Lambda^1| on half-interval indicators for primes up to `max_n`.
    Compare {
        #[arg(long, default_value_t = 61)]
        max_n: u64,
        #[arg(long, default_value = "0,1")]
        p: String,
        #[arg(long, default_value = "0,0,1")]
        q: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum RbplCmd {
    /// Solves an instance and prints the certificate.
    Solve {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Checks a certificate against an instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Exhaustive search in a box.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        height: i64,
    },
    /// Writes a random planted instance.
    Planted {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        noisy: bool,
    },
}

/// `F(g(n) Gamma)` on the nilmanifold `m`.
#[derive(Debug, Serialize, Deserialize)]
pub struct EquidistInstance {
    pub m: ElemNilmanifold,
    pub g: PolySeq,
}

#[derive(Debug, Subcommand)]
pub enum EquidistCmd {
    /// Runs the dichotomy; writes `certificate.json` and `per_h.csv` under `--out`.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Writes a random planted isotropic instance.
    Planted {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<u64>,
    },
}

/// Input of `fourier expand`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FourierInstance {
    Trivial {
        n: u64,
        #[serde(with = "hofa_core::ratmod::serde_q::vec")]
        a: Vec<ExactRational>,
        #[serde(with = "hofa_core::ratmod::serde_q::vec")]
        alpha: Vec<ExactRational>,
    },
    FracProduct {
        n: u64,
        terms: Vec<BracketTerm>,
    },
    Bilinear {
        n: u64,
        h: u64,
        terms: Vec<BilinearTerm>,
    },
    BoxProduct {
        n: u64,
        h: u64,
        factors: Vec<(Phase2, Phase2)>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FourierCmd {
    /// Expands an instance and writes its terms.
    Expand {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Normalised DFT of a function read from JSON.
    Dft {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct BohrArgs {
    /// Frequencies, e.g. `1/7,2/7`.
    #[arg(long, default_value = "")]
    s: String,
    #[arg(long)]
    rho: String,
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum BohrCmd {
    /// Lists the members of B(S, rho).
    Build(BohrArgs),
    /// Finds a regular radius in [rho/2, rho].
    Regular(BohrArgs),
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    /// A set such as `0,1,5`; give it one, two or four times.
    #[arg(long, required = true)]
    set: Vec<String>,
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value = "1/2")]
    delta: String,
    /// Also writes one row per quadruple.
    #[arg(long)]
    per_quadruple: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Criteria to run, e.g. `1,3,5-7`.
    #[arg(long)]
    only: Option<String>,
}

struct Ctx {
    cfg: ExperimentConfig,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed)
    }

    fn n(&self, n: Option<u64>) -> Result<u64, CliError> {
        let n = n.unwrap_or(self.cfg.n);
        if is_prime(n) {
            Ok(n)
        } else {
            Err(CliError::Usage(format!("N = {n} is not prime")))
        }
    }

    fn emit(&self, t: &Table) -> Result<(), CliError> {
        Ok(emit_table(t, self.format, self.out.as_deref())?)
    }

    fn emit_json<T: Serialize>(&self, v: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(v).map_err(TableError::from)?;
        s.push('\n');
        Ok(write_text(&s, self.out.as_deref())?)
    }
}

/// Sets the global worker count from `--threads` or `HOFA_THREADS`.
pub fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("HOFA_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| usage(format!("HOFA_THREADS = {v:?} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(usage("thread count must be positive"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let ctx = Ctx { cfg, out: cli.out, format: cli.format };
    match cli.command {
        Command::Gowers(c) => gowers(&ctx, c),
        Command::Count(c) => count(&ctx, c),
        Command::Rbpl(c) => rbpl_cmd(&ctx, c),
        Command::Equidist(c) => equidist(&ctx, c),
        Command::Fourier(c) => fourier(&ctx, c),
        Command::Bohr(c) => bohr(&ctx, c),
        Command::Energy(a) => energy_cmd(&ctx, a),
        Command::Quadruples(a) => quadruples(&ctx, a),
        Command::Selftest(a) => selftest(&ctx, a),
    }
}

// ---------------------------------------------------------------------------
// input helpers

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// A function on `Z/NZ` as a JSON list of reals or `[re, im]` pairs, or as
/// `{"n": .., "values": [[re, im], ..]}`.
pub fn parse_fn(text: &str) -> Result<FnZN, String> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Value {
        Real(f64),
        Pair([f64; 2]),
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Input {
        List(Vec<Value>),
        Full(FnZN),
    }
    let f = match serde_json::from_str::<Input>(text).map_err(|e| e.to_string())? {
        Input::List(v) => FnZN::new(
            v.into_iter()
                .map(|x| match x {
                    Value::Real(r) => Complex64::new(r, 0.0),
                    Value::Pair([re, im]) => Complex64::new(re, im),
                })
                .collect(),
        ),
        Input::Full(f) => f,
    };
    if f.values.is_empty() || f.values.len() != f.n {
        return Err("function needs N >= 1 values".into());
    }
    Ok(f)
}

/// A bare certificate or the output of `rbpl solve`.
fn read_certificate(path: &Path) -> Result<Certificate, CliError> {
    let v: serde_json::Value = read_json(path)?;
    let v = match v.get("Certificate") {
        Some(outcome) => outcome.get("cert").cloned().unwrap_or(serde_json::Value::Null),
        None if v.get("Degenerate").is_some() => {
            return Err(usage(format!("{}: solver reported a degenerate instance", path.display())))
        }
        None => v,
    };
    serde_json::from_value(v).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_fn(path: &Path) -> Result<FnZN, CliError> {
    parse_fn(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| usage(format!("bad list entry {x:?}"))))
        .collect()
}

fn parse_q_list(s: &str) -> Result<Vec<ExactRational>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| parse_rational(x).map_err(usage))
        .collect()
}

fn int_poly(s: &str) -> Result<IntPoly, CliError> {
    let p = IntPoly(parse_list(s)?);
    if !p.vanishes_at_zero() {
        return Err(usage("polynomials must vanish at 0"));
    }
    Ok(p)
}

fn four_fns(ctx: &Ctx, inputs: &CountInputs) -> Result<Vec<FnZN>, CliError> {
    let fs: Vec<FnZN> = if let Some(s) = &inputs.set {
        let n = ctx.n(inputs.n)? as usize;
        let set: Vec<usize> = parse_list(s)?;
        vec![FnZN::indicator(n, &set)]
    } else {
        inputs.input.iter().map(|p| read_fn(p)).collect::<Result<_, _>>()?
    };
    if fs.is_empty() || fs.len() > 4 {
        return Err(usage("give one to four --input files or a --set"));
    }
    let last = fs.last().expect("nonempty").clone();
    let mut fs = fs;
    fs.resize(4, last);
    Ok(fs)
}

fn complex_row(t: &mut Table, label: Cell, z: Complex64) {
    t.push(vec![label, z.re.into(), z.im.into(), z.norm().into()]);
}

// ---------------------------------------------------------------------------
// subcommands

fn gowers(ctx: &Ctx, c: GowersCmd) -> Result<(), CliError> {
    match c {
        GowersCmd::Norm { input, s } => {
            let f = read_fn(&input)?;
            let v = gowers_norm(&f, s).map_err(usage)?;
            if ctx.out.is_some() {
                let mut t = Table::new(&["N", "s", "norm"]);
                t.push(vec![f.n.into(), s.into(), v.into()]);
                ctx.emit(&t)
            } else {
                println!("{}", fmt_float(v));
                Ok(())
            }
        }
        GowersCmd::Random { n, count } => {
            let n = ctx.n(n)? as usize;
            let mut rng = ctx.rng();
            let mut t = Table::new(&["index", "N", "u1", "u2", "u3", "u4"]);
            for i in 0..count {
                let f = FnZN::new(
                    (0..n)
                        .map(|_| {
                            use rand::Rng;
                            Complex64::from_polar(rng.gen_range(0.0..=1.0), std::f64::consts::TAU * rng.gen_range(0.0..1.0))
                        })
                        .collect(),
                );
                let mut row: Vec<Cell> = vec![i.into(), n.into()];
                for s in 1..=4 {
                    row.push(gowers_norm(&f, s).map_err(usage)?.into());
                }
                t.push(row);
            }
            ctx.emit(&t)
        }
    }
}

fn count(ctx: &Ctx, c: CountCmd) -> Result<(), CliError> {
    match c {
        CountCmd::Lambda { inputs, p, q } => {
            let f = four_fns(ctx, &inputs)?;
            let v = lambda(&f[0], &f[1], &f[2], &f[3], &int_poly(&p)?, &int_poly(&q)?).map_err(usage)?;
            let mut t = Table::new(&["quantity", "re", "im", "abs"]);
            complex_row(&mut t, "lambda".into(), v);
            ctx.emit(&t)
        }
        CountCmd::Lambda1 { inputs } => {
            let f = four_fns(ctx, &inputs)?;
            let v = lambda1(&f[0], &f[1], &f[2], &f[3]).map_err(usage)?;
            let mut t = Table::new(&["quantity", "re", "im", "abs"]);
            complex_row(&mut t, "lambda1".into(), v);
            ctx.emit(&t)
        }
        CountCmd::Dual { inputs, p, q } => {
            let f = four_fns(ctx, &inputs)?;
            let dd = dual_d(&f[0], &f[1], &f[2], &int_poly(&p)?, &int_poly(&q)?).map_err(usage)?;
            let mut t = Table::new(&["x", "re", "im", "abs"]);
            for (x, z) in dd.values.iter().enumerate() {
                complex_row(&mut t, x.into(), *z);
            }
            ctx.emit(&t)
        }
        CountCmd::Compare { max_n, p, q } => {
            let (pp, qq) = (int_poly(&p)?, int_poly(&q)?);
            let mut t = Table::new(&["N", "lambda", "lambda1", "abs_diff"]);
            for n in (5..=max_n).filter(|&n| is_prime(n)) {
                let n = n as usize;
                let set: Vec<usize> = (0..n.div_ceil(2)).collect();
                let f = FnZN::indicator(n, &set);
                let l = lambda(&f, &f, &f, &f, &pp, &qq).map_err(usage)?;
                let l1 = lambda1(&f, &f, &f, &f).map_err(usage)?;
                t.push(vec![n.into(), l.re.into(), l1.re.into(), (l - l1).norm().into()]);
            }
            ctx.emit(&t)
        }
    }
}

fn rbpl_cmd(ctx: &Ctx, c: RbplCmd) -> Result<(), CliError> {
    let rc = &ctx.cfg.thresholds.rbpl;
    match c {
        RbplCmd::Solve { instance } => {
            let inst: RbplInstance = read_json(&instance)?;
            let inst = RbplInstance::new(inst.n, inst.a, inst.alpha, inst.beta, inst.k, inst.h).map_err(usage)?;
            let out = rbpl::solve(&inst, rc).map_err(usage)?;
            ctx.emit_json(&out)
        }
        RbplCmd::Verify { instance, certificate } => {
            let inst: RbplInstance = read_json(&instance)?;
            let cert = read_certificate(&certificate)?;
            let rep = rbpl::verify(&inst.a, &inst.alpha, &cert);
            ctx.emit_json(&rep)?;
            if rep.pass {
                Ok(())
            } else {
                Err(CliError::Failed(format!("certificate rejected: {}", rep.violations.join("; "))))
            }
        }
        RbplCmd::Oracle { instance, height } => {
            let inst: RbplInstance = read_json(&instance)?;
            let thr = &rc.w_slack * &inst.k / ExactRational::from_integer(inst.n.into());
            ctx.emit_json(&rbpl::brute_force(&inst.a, &inst.alpha, &thr, height))
        }
        RbplCmd::Planted { d, n, noisy } => {
            let n = ctx.n(n)?;
            let p = random_planted(&mut ctx.rng(), d.unwrap_or(ctx.cfg.d), n, noisy).map_err(usage)?;
            ctx.emit_json(&p.instance)
        }
    }
}

fn equidist(ctx: &Ctx, c: EquidistCmd) -> Result<(), CliError> {
    match c {
        EquidistCmd::Run { instance, delta, n } => {
            let inst: EquidistInstance = read_json(&instance)?;
            let n = ctx.n(n)?;
            let delta = delta.unwrap_or(ctx.cfg.delta);
            let res = run_dichotomy(&inst.m, &inst.g, n, delta, &ctx.cfg.thresholds.equidist).map_err(usage)?;
            let mut per_h = Table::new(&["h", "correlation", "good", "slope"]);
            if let Some(d) = &res.diagnostics {
                for r in &d.per_h {
                    per_h.push(vec![r.h.into(), r.correlation.into(), r.good.into(), r.slope.into()]);
                }
            }
            let dir = ctx.out.clone().or_else(|| ctx.cfg.output_dir.clone());
            match dir {
                Some(dir) => {
                    let mut s = serde_json::to_string_pretty(&res).map_err(TableError::from)?;
                    s.push('\n');
                    write_text(&s, Some(&dir.join("certificate.json")))?;
                    emit_table(&per_h, ctx.format, Some(&dir.join(format!("per_h.{}", ctx.format.extension()))))?;
                }
                None => {
                    let summary = serde_json::json!({ "n": res.n, "branch": res.branch, "r": res.r() });
                    println!("{}", serde_json::to_string_pretty(&summary).map_err(TableError::from)?);
                }
            }
            match res.branch {
                Branch::Certificate { .. } | Branch::SmallN { .. } => Ok(()),
            }
        }
        EquidistCmd::Planted { d, n } => {
            let n = ctx.n(n)?;
            let p = random_planted_isotropic(&mut ctx.rng(), d.unwrap_or(ctx.cfg.d), n, ctx.cfg.delta);
            ctx.emit_json(&EquidistInstance { m: p.m, g: p.g })
        }
    }
}

fn expansion_table(e: &FourierExpansion) -> Table {
    let mut t = Table::new(&["coeff_re", "coeff_im", "freq_n", "freq_h"]);
    for term in &e.terms {
        t.push(vec![term.coeff.re.into(), term.coeff.im.into(), (&term.freq_n).into(), (&term.freq_h).into()]);
    }
    t
}

fn fourier(ctx: &Ctx, c: FourierCmd) -> Result<(), CliError> {
    let fc = &ctx.cfg.thresholds.fourier;
    match c {
        FourierCmd::Expand { instance, delta } => {
            let delta = delta.unwrap_or(0.05);
            let inst: FourierInstance = read_json(&instance)?;
            let t = match inst {
                FourierInstance::Trivial { n, a, alpha } => expansion_table(&expand_trivial(&a, &alpha, n, delta, fc).map_err(usage)?),
                FourierInstance::FracProduct { n, terms } => {
                    expansion_table(&expand_frac_product(&terms, n, delta, fc).map_err(usage)?)
                }
                FourierInstance::Bilinear { n, h, terms } => {
                    expansion_table(&expand_bilinear(&terms, n, h, delta, fc).map_err(usage)?)
                }
                FourierInstance::BoxProduct { n, h, factors } => {
                    let e = expand_box_product(&factors, n, h, delta, fc).map_err(usage)?;
                    let mut t = Table::new(&["alpha", "beta", "coeff_re", "coeff_im"]);
                    for (a, b, z) in &e.coeffs {
                        t.push(vec![(*a).into(), (*b).into(), z.re.into(), z.im.into()]);
                    }
                    t
                }
            };
            ctx.emit(&t)
        }
        FourierCmd::Dft { input } => ctx.emit(&expansion_table(&dft_expansion(&read_fn(&input)?))),
    }
}

fn bohr(ctx: &Ctx, c: BohrCmd) -> Result<(), CliError> {
    match c {
        BohrCmd::Build(a) => {
            let n = ctx.n(a.n)?;
            let s = parse_q_list(&a.s)?;
            let rho = parse_rational(&a.rho).map_err(usage)?;
            let b = bohr_build(&s, &rho, n).map_err(usage)?;
            let mut t = Table::new(&["x"]);
            for &x in &b.members {
                t.push(vec![x.into()]);
            }
            ctx.emit(&t)
        }
        BohrCmd::Regular(a) => {
            let n = ctx.n(a.n)?;
            let s = parse_q_list(&a.s)?;
            let rho = parse_rational(&a.rho).map_err(usage)?;
            let rp = find_regular_radius(&s, &rho, n, &ctx.cfg.thresholds.bohr)
                .map_err(|e| CliError::Failed(e.to_string()))?;
            let size = bohr_build(&s, &rp, n).map_err(usage)?.len();
            let mut t = Table::new(&["rho", "rho_prime", "size"]);
            t.push(vec![rho.into(), rp.into(), size.into()]);
            ctx.emit(&t)
        }
    }
}

fn energy_cmd(ctx: &Ctx, a: EnergyArgs) -> Result<(), CliError> {
    let n = ctx.n(a.n)? as usize;
    let sets: Vec<Vec<usize>> = a.set.iter().map(|s| parse_list(s)).collect::<Result<_, _>>()?;
    let mut t = Table::new(&["quantity", "value"]);
    match sets.as_slice() {
        [x] => t.push(vec!["E(A)".into(), energy(x, x, n).into()]),
        [x, y] => t.push(vec!["E(A,B)".into(), energy(x, y, n).into()]),
        [a1, a2, a3, a4] => {
            t.push(vec!["E(A1,A2,A3,A4)".into(), energy4(a1, a2, a3, a4, n).into()]);
            for (i, s) in sets.iter().enumerate() {
                t.push(vec![format!("E(A{})", i + 1).into(), energy(s, s, n).into()]);
            }
            t.push(vec!["cauchy_schwarz".into(), energy_cs_holds([a1, a2, a3, a4], n).into()]);
        }
        _ => return Err(usage("give --set once, twice or four times")),
    }
    ctx.emit(&t)
}

fn quadruples(ctx: &Ctx, a: QuadArgs) -> Result<(), CliError> {
    let n = ctx.n(a.n)? as usize;
    if n == 2 {
        return Err(usage("the planted family needs odd N"));
    }
    let delta = parse_rational(&a.delta).map_err(usage)?;
    let p = planted_chi_family(&mut ctx.rng(), n, a.density, a.noise);
    let rep = additive_quadruple_count(&p.h_set, &p.chi, &delta, Some((&p.f1, &p.f2)), n, &ctx.cfg.thresholds.quadruples)
        .map_err(usage)?;
    let mut t = Table::new(&["N", "H", "measured_delta", "hypothesis", "total_quadruples", "count", "bound", "threshold_pass"]);
    t.push(vec![
        n.into(),
        p.h_set.len().into(),
        rep.measured_delta.unwrap_or(f64::NAN).into(),
        (rep.hypothesis_verified == Some(true)).into(),
        rep.total_quadruples.into(),
        rep.count.into(),
        rep.bound.clone().into(),
        (rep.threshold_pass == Some(true)).into(),
    ]);
    ctx.emit(&t)?;
    if a.per_quadruple {
        let path = ctx
            .out
            .as_ref()
            .map(|o| o.with_file_name(format!("quadruples_per_quadruple.{}", ctx.format.extension())));
        emit_table(&per_quadruple(&p.h_set, &p.chi, n), ctx.format, path.as_deref())?;
    }
    Ok(())
}

fn per_quadruple(hs: &[usize], chi: &HashMap<usize, FnZN>, n: usize) -> Table {
    let in_h: Vec<bool> = (0..n).map(|h| hs.contains(&h)).collect();
    let mut t = Table::new(&["h1", "h2", "h3", "h4", "correlation"]);
    for &h1 in hs {
        for &h2 in hs {
            for &h3 in hs {
                let h4 = (h1 + h2 + n - h3) % n;
                if !in_h[h4] {
                    continue;
                }
                let s = (h1 + n - h4) as i64;
                let (c1, c2, c3, c4) = (&chi[&h1], &chi[&h2], &chi[&h3], &chi[&h4]);
                let z: Complex64 = (0..n as i64)
                    .map(|x| c1.at(x) * c2.at(x + s) * (c3.at(x) * c4.at(x + s)).conj())
                    .sum::<Complex64>()
                    / n as f64;
                t.push(vec![h1.into(), h2.into(), h3.into(), h4.into(), z.norm().into()]);
            }
        }
    }
    t
}

fn selftest(ctx: &Ctx, a: SelftestArgs) -> Result<(), CliError> {
    let only = a.only.as_deref().map(suite::parse_only).transpose().map_err(usage)?;
    let scfg = SuiteConfig { seed: ctx.cfg.seed, thresholds: ctx.cfg.thresholds.clone() };
    let mut results = Vec::new();
    for c in suite::CRITERIA.iter().filter(|c| only.as_ref().is_none_or(|o| o.contains(&c.id))) {
        let r = suite::run_criterion(c.id, &scfg).expect("known criterion");
        println!("{}", r.line());
        results.push(r);
    }
    if let Some(dir) = ctx.out.clone().or_else(|| ctx.cfg.output_dir.clone()) {
        suite::write_tree(&results, &dir, ctx.format)?;
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.pass()).map(|r| r.criterion.id.to_string()).collect();
    if failed.is_empty() {
        println!("all {} criteria passed", results.len());
        Ok(())
    } else {
        Err(CliError::Failed(format!("criteria failed: {}", failed.join(", "))))
    }
}
