//! End-to-end checks and their reports.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd_u64};
use crate::brandt::{self, eichler_order, eigenform_for, ideal_classes_with, petersson_norm, IdealClassSet};
use crate::characters::{
    fe_sign_twist, gauss_sum_check, search_auxiliary_char, CharProfile, QuadDirichletChar,
};
use crate::ellcurve::{twist_tamagawa_analysis, EllipticCurveQ, Reduction, TwistTamagawaReport};
use crate::lfun::{self, LValue};
use crate::modsym::{self, algebraic_twisted_lvalue, atkin_lehner_sign, find_eigenform, modular_degree, ModSymSpace};
use crate::quadfield::{search_delta, DeltaConstraints, HeckeQuadChar, RealQuadField, Splitting};
use crate::squareclass::{recognize_rational, recognize_rational_square, square_class_eq, squarefree_part, Rational};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail dominates, then inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    fn of(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    /// A rational in lowest terms, as `p` or `p/q`.
    Exact { value: String },
    Numeric { value: f64, error: f64 },
    SquareClass { rep: i128 },
    Text { value: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub quantity: Quantity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

/// Whether the Manin constant of the optimal curve is taken to be 1 as known or as an assumption.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manin {
    #[default]
    One,
    Assume,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub manin: Manin,
    pub period: String,
    pub normalization: String,
}

impl Conventions {
    pub fn new(manin: Manin) -> Self {
        Conventions {
            manin,
            period: "Omega+ = real period times number of real components; Omega- = generator of the \
                     anti-invariant period lattice divided by i"
                .into(),
            normalization: "L(1,E,chi) = L^alg Omega^{chi(-1)} / sqrt(c_chi), with L^alg <= 0 for odd chi; \
                            x = 2 w sqrt(D_F) sqrt(N c_delta) L(1,E/F,delta) / (Omega^w)^2"
                .into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub check: String,
    pub inputs: BTreeMap<String, String>,
    pub values: Vec<Entry>,
    pub lines: Vec<CheckLine>,
    pub verdict: Verdict,
    pub conventions: Conventions,
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn new(check: &str, manin: Manin) -> Self {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            check: check.into(),
            inputs: BTreeMap::new(),
            values: Vec::new(),
            lines: Vec::new(),
            verdict: Verdict::Pass,
            conventions: Conventions::new(manin),
            notes: Vec::new(),
        }
    }

    fn input(&mut self, k: &str, v: impl ToString) {
        self.inputs.insert(k.into(), v.to_string());
    }

    fn push(&mut self, name: impl Into<String>, quantity: Quantity) {
        self.values.push(Entry { name: name.into(), quantity });
    }

    fn exact(&mut self, name: impl Into<String>, r: Rational) {
        self.push(name, Quantity::Exact { value: r.to_string() });
    }

    fn numeric(&mut self, name: impl Into<String>, value: f64, error: f64) {
        self.push(name, Quantity::Numeric { value, error });
    }

    fn lvalue(&mut self, name: impl Into<String>, v: &LValue) {
        self.numeric(name, v.value, v.error);
    }

    fn line(&mut self, name: impl Into<String>, verdict: Verdict, detail: impl Into<String>) {
        self.verdict = self.verdict.and(verdict);
        self.lines.push(CheckLine { name: name.into(), verdict, detail: detail.into() });
    }

    /// Value of a named entry.
    pub fn value(&self, name: &str) -> Option<&Quantity> {
        self.values.iter().find(|e| e.name == name).map(|e| &e.quantity)
    }
}

/// Cache of ideal class sets keyed by `(Q, M)` and modular symbol spaces keyed by `N`.
pub trait Store {
    fn load(&mut self, q: u64, m: u64) -> Option<IdealClassSet>;
    fn save(&mut self, set: &IdealClassSet);
    fn load_space(&mut self, _n: u64) -> Option<ModSymSpace> {
        None
    }
    fn save_space(&mut self, _space: &ModSymSpace) {}
}

#[derive(Clone, Debug, Default)]
pub struct MemoryStore {
    sets: BTreeMap<(u64, u64), IdealClassSet>,
    spaces: BTreeMap<u64, ModSymSpace>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

impl Store for MemoryStore {
    fn load(&mut self, q: u64, m: u64) -> Option<IdealClassSet> {
        self.sets.get(&(q, m)).cloned()
    }

    fn save(&mut self, set: &IdealClassSet) {
        self.sets.insert((set.disc, set.level), set.clone());
    }

    fn load_space(&mut self, n: u64) -> Option<ModSymSpace> {
        self.spaces.get(&n).cloned()
    }

    fn save_space(&mut self, space: &ModSymSpace) {
        self.spaces.insert(space.level(), space.clone());
    }
}

/// Modular symbols of level `n`, through `store`.
pub fn modsym_space(store: &mut dyn Store, n: u64, level_bound: u64) -> Result<ModSymSpace> {
    if let Some(s) = store.load_space(n) {
        if s.level() == n {
            return Ok(s);
        }
    }
    let s = modsym::build_space_with(n, level_bound, None)?;
    store.save_space(&s);
    Ok(s)
}

/// Ideal classes of the Eichler order of level `m` in the algebra of discriminant `q`, through `store`.
pub fn class_set(store: &mut dyn Store, q: u64, m: u64, bound: u64) -> Result<IdealClassSet> {
    if let Some(s) = store.load(q, m) {
        if s.format_version == brandt::FORMAT_VERSION && s.disc == q && s.level == m {
            return Ok(s);
        }
    }
    let s = ideal_classes_with(&eichler_order(q, m)?, bound)?;
    store.save(&s);
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub manin: Manin,
    /// Bound on `|D|` for Dirichlet character searches.
    pub char_bound: u64,
    /// Bound on `|x|, |y|` for `beta = x + y w`.
    pub delta_height: i64,
    /// Number of characters `delta` the pipeline tests.
    pub deltas: usize,
    /// Height bound for the square root in square recognition.
    pub height_bound: u64,
    /// Relative tolerance in square recognition.
    pub tolerance: f64,
    /// Required number of correct digits of the degree-4 L-value.
    pub precision: u32,
    pub level_bound: u64,
    pub class_bound: u64,
    /// Largest conductor of a degree-4 L-series the pipeline evaluates.
    pub max_conductor: u64,
    /// Fixed first character; searched for when absent.
    pub chi1: Option<i64>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            manin: Manin::One,
            char_bound: 500,
            delta_height: 50,
            deltas: 2,
            height_bound: 10_000,
            tolerance: 1e-6,
            precision: 8,
            level_bound: modsym::DEFAULT_LEVEL_BOUND,
            class_bound: brandt::DEFAULT_BOUND,
            max_conductor: 10_000_000_000,
            chi1: None,
        }
    }
}

pub fn curve_text(e: &EllipticCurveQ) -> String {
    format!("[{},{},{},{},{}]", e.a[0], e.a[1], e.a[2], e.a[3], e.a[4])
}

pub fn delta_text(d: &HeckeQuadChar) -> String {
    format!("Q(sqrt {}), beta = {} + {} w", d.field.disc(), d.beta.x, d.beta.y)
}

/// Validates `Q`: a squarefree product of an odd number of primes with `Q || N`.
fn admissible_q(n: u64, q: u64) -> Result<u64> {
    let fail = |s: String| Err(Error::QPartNotAdmissible(s));
    if q < 2 || n % q != 0 {
        return fail(format!("{q} does not divide the conductor {n}"));
    }
    let m = n / q;
    if gcd_u64(m, q) != 1 || !arith::is_squarefree(q) {
        return fail(format!("{q} is not an exact squarefree divisor of {n}"));
    }
    if arith::prime_divisors(q).len() % 2 == 0 {
        return fail(format!("{q} has an even number of prime factors"));
    }
    Ok(m)
}

/// Number of components of the special fiber at a multiplicative prime.
fn components(e: &EllipticCurveQ, p: u64) -> Result<u32> {
    let ld = e.local_data(p);
    assert!(ld.satisfies_ogg());
    match ld.reduction {
        Reduction::Split | Reduction::NonSplit => Ok(ld.ord_disc),
        _ => Err(Error::NotMultiplicative(p)),
    }
}

pub fn check_degree_class(e: &EllipticCurveQ, q: u64) -> Result<VerificationReport> {
    check_degree_class_with(e, q, &Config::default(), &mut MemoryStore::new())
}

/// `deg = (prod cbar_q) <phi, phi>` in `Q^x / (Q^x)^2`, with the modular degree from
/// modular symbols, `cbar_q` from Tate's algorithm and `<phi, phi>` from Brandt matrices.
pub fn check_degree_class_with(e: &EllipticCurveQ, q: u64, cfg: &Config, store: &mut dyn Store) -> Result<VerificationReport> {
    let e = e.minimal_model()?;
    let n = e.conductor()?;
    let m = admissible_q(n, q)?;
    let mut r = VerificationReport::new("degree_class", cfg.manin);
    r.input("curve", curve_text(&e));
    r.input("Q", q);
    r.input("M", m);

    let space = modsym_space(store, n, cfg.level_bound)?;
    let f = find_eigenform(&space, &e)?;
    let deg = modular_degree(&space, &f)?;
    r.exact("deg", Rational::from_integer(deg as i128));

    let mut cbar: i128 = 1;
    for p in arith::prime_divisors(q) {
        let c = components(&e, p)?;
        r.exact(format!("cbar_{p}"), Rational::from_integer(c as i128));
        cbar *= c as i128;
    }
    r.exact("cbar", Rational::from_integer(cbar));

    let set = class_set(store, q, m, cfg.class_bound)?;
    let phi = eigenform_for(&set, &e)?;
    let norm = petersson_norm(&phi)?;
    r.exact("class_number", Rational::from_integer(set.len() as i128));
    r.exact("petersson_norm", norm);
    r.exact("phi_pairing_with_one", phi.constant_pairing());

    let lhs = Rational::from_integer(deg as i128);
    let rhs = Rational::from_integer(cbar) * norm;
    r.push("square_class_deg", Quantity::SquareClass { rep: squarefree_part(lhs)?.rep() });
    r.push("square_class_rhs", Quantity::SquareClass { rep: squarefree_part(rhs)?.rep() });
    let ok = square_class_eq(lhs, rhs)?;
    r.line("deg = cbar <phi,phi> mod squares", Verdict::of(ok), format!("{deg} vs {cbar} * {norm}"));
    if cfg.manin == Manin::Assume {
        r.notes.push("modular degree is that of the optimal curve in the isogeny class".into());
    }
    Ok(r)
}

/// `deg(h') cbar_p(E') = deg(h) cbar_p(E)` modulo squares, for an isogeny of the given degree.
pub fn check_isogeny_invariance(
    e_opt: &EllipticCurveQ,
    e_other: &EllipticCurveQ,
    isogeny_degree: u64,
    p: u64,
) -> Result<VerificationReport> {
    let (a, b) = (e_opt.minimal_model()?, e_other.minimal_model()?);
    let mut r = VerificationReport::new("isogeny_invariance", Manin::One);
    r.input("curve", curve_text(&a));
    r.input("other", curve_text(&b));
    r.input("isogeny_degree", isogeny_degree);
    r.input("p", p);
    let (ca, cb) = (components(&a, p)?, components(&b, p)?);
    r.exact("cbar_opt", Rational::from_integer(ca as i128));
    r.exact("cbar_other", Rational::from_integer(cb as i128));
    let lhs = Rational::from_integer(ca as i128);
    let rhs = Rational::from_integer(isogeny_degree as i128 * cb as i128);
    let ok = square_class_eq(lhs, rhs)?;
    r.line("cbar(E) = deg * cbar(E') mod squares", Verdict::of(ok), format!("{ca} vs {isogeny_degree} * {cb}"));
    Ok(r)
}

fn require(cond: bool, what: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::HypothesisViolated(what.into()))
    }
}

/// Exact conductor-discriminant identities and Gauss sums for a triple of characters,
/// and the relative identities for `delta`, `delta1` when given.
pub fn check_identity_suite(
    chi1: &QuadDirichletChar,
    chi2: &QuadDirichletChar,
    chi3: &QuadDirichletChar,
    deltas: Option<(&HeckeQuadChar, &HeckeQuadChar)>,
) -> Result<VerificationReport> {
    let (c1, c2, c3) = (chi1.conductor(), chi2.conductor(), chi3.conductor());
    require(gcd_u64(c1, c2) == 1, format!("conductors of chi1 and chi2 share a factor: {c1}, {c2}"))?;
    require(gcd_u64(c3, c1 * c2) == 1, format!("conductor of chi3 not prime to c1 c2: {c3}"))?;
    require(chi1.parity() == chi2.parity(), "chi1(-1) != chi2(-1)")?;
    require(chi3.parity() == -chi1.parity(), "chi3(-1) != -chi1(-1)")?;
    require(!(chi1.is_trivial() && chi2.is_trivial()), "chi1 and chi2 both trivial")?;

    let mut r = VerificationReport::new("identity_suite", Manin::One);
    r.input("chi1", chi1.disc());
    r.input("chi2", chi2.disc());
    r.input("chi3", chi3.disc());

    let df = chi1.product(chi2);
    let dl = chi1.product(chi3);
    let dlt = chi2.product(chi3);
    r.line("D_F = c1 c2", Verdict::of(df.disc() > 0 && df.conductor() == c1 * c2), format!("{} vs {c1} * {c2}", df.disc()));
    r.line("D_L = c1 c3", Verdict::of(dl.disc() < 0 && dl.conductor() == c1 * c3), format!("{} vs {c1} * {c3}", dl.disc()));
    r.line("D_L~ = c2 c3", Verdict::of(dlt.disc() < 0 && dlt.conductor() == c2 * c3), format!("{} vs {c2} * {c3}", dlt.disc()));

    for (name, chi) in [("chi1", chi1), ("chi2", chi2), ("chi3", chi3), ("chi1 chi2", &df)] {
        if chi.is_trivial() {
            continue;
        }
        let g = gauss_sum_check(chi)?;
        let tau2 = g.numeric * g.numeric;
        let want = chi.parity() as f64 * chi.conductor() as f64;
        let err = libm::hypot(tau2.re - want, tau2.im);
        r.numeric(format!("tau({name})^2"), tau2.re, err);
        r.line(format!("tau({name})^2 = chi(-1) c"), Verdict::of(err < 1e-8 * chi.conductor() as f64), format!("|tau^2 - ({want})| = {err:.2e}"));
    }

    if let Some((delta, delta1)) = deltas {
        let f = delta.field;
        require(f == delta1.field, "delta and delta1 live on different fields")?;
        require(f.disc() == df.disc(), format!("field discriminant {} is not D1 D2 = {}", f.disc(), df.disc()))?;
        require(gcd_u64(delta.conductor_norm, delta1.conductor_norm) == 1, "delta1 ramifies at a prime dividing c_delta")?;
        require(delta1.arch_signs == [-delta.arch_signs[0], -delta.arch_signs[1]], "delta1 must have the opposite archimedean signs")?;
        r.input("delta", delta_text(delta));
        r.input("delta1", delta_text(delta1));
        let genus = HeckeQuadChar::genus(f, chi1.disc())?;
        r.line("N c_chi_F = 1", Verdict::of(genus.conductor_norm == 1), format!("{}", genus.conductor_norm));
        let kt = delta.product(delta1)?;
        r.line(
            "N c_delta N c_delta1 = N D_K~/F",
            Verdict::of(kt.conductor_norm == delta.conductor_norm * delta1.conductor_norm),
            format!("{} * {} vs {}", delta.conductor_norm, delta1.conductor_norm, kt.conductor_norm),
        );
        let k = genus.product(delta1)?;
        r.line(
            "N D_K/F = N c_delta1",
            Verdict::of(k.conductor_norm == delta1.conductor_norm),
            format!("{} vs {}", k.conductor_norm, delta1.conductor_norm),
        );
        // tau(delta) = i^m sqrt(N c), m = number of real places where delta(-1) = -1
        let m = delta.arch_signs.iter().filter(|&&s| s == -1).count();
        let w = chi1.parity();
        let i_m = if m == 0 { 1 } else if m == 2 { -1 } else { 0 };
        r.line("i^m_delta = w", Verdict::of(i_m == w), format!("m = {m}, w = {w}"));
    }
    Ok(r)
}

/// The setup data shared by [`check_square_value`] and the pipeline.
struct Setup {
    e: EllipticCurveQ,
    n: u64,
    m: u64,
    q: u64,
    w: i8,
}

fn setup_from_chars(e: &EllipticCurveQ, chi1: &QuadDirichletChar, chi2: &QuadDirichletChar) -> Result<Setup> {
    let invalid = |s: String| Err(Error::SetupInvalid(s));
    let e = e.minimal_model()?;
    let n = e.conductor()?;
    let (c1, c2) = (chi1.conductor(), chi2.conductor());
    if gcd_u64(c1 * c2, n) != 1 {
        return invalid("character conductors must be prime to N".into());
    }
    if gcd_u64(c1, c2) != 1 {
        return invalid("chi1 and chi2 have a common conductor prime".into());
    }
    if chi1.parity() != chi2.parity() {
        return invalid("chi1(-1) != chi2(-1)".into());
    }
    let mut q = 1;
    for (l, k) in arith::factor(n as u128)? {
        let (a, b) = (chi1.value(l as i64), chi2.value(l as i64));
        if a == -b {
            if k != 1 {
                return invalid(format!("chi1({l}) = -chi2({l}) but {l}^{k} divides N"));
            }
            q *= l;
        }
    }
    let m = admissible_q(n, q).map_err(|err| Error::SetupInvalid(format!("{err}")))?;
    Ok(Setup { e, n, m, q, w: chi1.parity() })
}

/// The `Q` singled out by `(chi1, chi2)`: the primes of `N` where they disagree.
pub fn q_part_of(e: &EllipticCurveQ, chi1: &QuadDirichletChar, chi2: &QuadDirichletChar) -> Result<u64> {
    Ok(setup_from_chars(&e.minimal_model()?, chi1, chi2)?.q)
}

fn twist_value(e: &EllipticCurveQ, chi: &QuadDirichletChar, order: u8) -> Result<LValue> {
    lfun::lvalue(&lfun::lseries_twist(e, chi)?, order)
}

/// `L'(1, E/F, chi_F) != 0`: one twist has sign -1 with nonzero derivative, the other a nonzero value.
fn certify_derivative(s: &Setup, chi1: &QuadDirichletChar, chi2: &QuadDirichletChar, r: &mut VerificationReport) -> Result<bool> {
    let mut ok = true;
    let mut signs = Vec::new();
    for (name, chi) in [("chi1", chi1), ("chi2", chi2)] {
        let spec = lfun::lseries_twist(&s.e, chi)?;
        let v0 = lfun::lvalue(&spec, 0)?;
        signs.push(v0.sign);
        let order = if v0.sign == -1 { 1 } else { 0 };
        let v = if order == 1 { lfun::lvalue(&spec, 1)? } else { v0 };
        let label = if order == 1 { format!("L'(1,E,{name})") } else { format!("L(1,E,{name})") };
        r.lvalue(label, &v);
        ok &= libm::fabs(v.value) > v.error + 1e-8;
    }
    Ok(ok && signs[0] == -signs[1])
}

/// Numeric check that `2 D_F^(1/2) N(c_delta) L(1, E/F, delta) / (tau(delta) (Omega^w)^2)`
/// is a rational square.
pub fn check_square_value(
    e: &EllipticCurveQ,
    chi1: &QuadDirichletChar,
    chi2: &QuadDirichletChar,
    delta: &HeckeQuadChar,
    height_bound: u64,
) -> Result<VerificationReport> {
    let cfg = Config { height_bound, ..Config::default() };
    check_square_value_with(e, chi1, chi2, delta, &cfg)
}

pub fn check_square_value_with(
    e: &EllipticCurveQ,
    chi1: &QuadDirichletChar,
    chi2: &QuadDirichletChar,
    delta: &HeckeQuadChar,
    cfg: &Config,
) -> Result<VerificationReport> {
    let s = setup_from_chars(e, chi1, chi2)?;
    let mut r = VerificationReport::new("square_value", cfg.manin);
    r.input("curve", curve_text(&s.e));
    r.input("chi1", chi1.disc());
    r.input("chi2", chi2.disc());
    r.input("delta", delta_text(delta));
    r.input("Q", s.q);
    r.input("M", s.m);
    check_delta(&s, chi1, delta, &mut r)?;
    if !certify_derivative(&s, chi1, chi2, &mut r)? {
        return Err(Error::SetupInvalid("L'(1,E/F,chi_F) != 0 could not be certified".into()));
    }

    let f = delta.field;
    let spec = lfun::lseries_ef_delta(&s.e, &f, delta)?;
    let (fit, residual) = lfun::check_fe_consistency(&spec)?;
    r.numeric("functional_equation_residual", residual, 0.0);
    r.exact("root_number", Rational::from_integer(fit as i128));
    let l = lfun::lvalue(&spec, 0)?;
    r.lvalue("L(1,E/F,delta)", &l);

    if libm::fabs(l.value) <= l.error {
        r.exact("x", Rational::from_integer(0));
        r.exact("root", Rational::from_integer(0));
        r.line("x is a rational square", Verdict::Pass, "L(1,E/F,delta) vanishes; x = 0");
        return Ok(r);
    }
    let rel = l.error / libm::fabs(l.value);
    if rel > libm::pow(10.0, -(cfg.precision as f64)) {
        return Err(Error::Inconclusive(format!("L-value known only to relative error {rel:.1e}")));
    }
    let p = s.e.periods()?;
    let omega = if s.w == 1 { p.omega_plus } else { p.omega_minus };
    let x = 2.0 * s.w as f64 * libm::sqrt(f.disc() as f64) * libm::sqrt(delta.conductor_norm as f64) * l.value
        / (omega * omega);
    let xerr = libm::fabs(x) * (rel + 1e-14);
    r.numeric("Omega^w", omega, omega * 1e-14);
    r.numeric("x", x, xerr);
    if x < 0.0 {
        r.notes.push("x is negative; the square test uses |x|".into());
    }
    let hb2 = height_bound_squared(cfg.height_bound);
    let Some(xr) = recognize_rational(libm::fabs(x), hb2, cfg.tolerance) else {
        return Err(Error::Inconclusive(format!("|x| = {} not recognized as a rational of height <= {hb2}", libm::fabs(x))));
    };
    r.exact("|x|", xr);
    match recognize_rational_square(libm::fabs(x), cfg.height_bound, cfg.tolerance) {
        Some(root) => {
            r.exact("root", root);
            r.line("x is a rational square", Verdict::Pass, format!("|x| = ({root})^2"));
        }
        None => {
            let sc = squarefree_part(xr)?.rep();
            r.push("square_class_x", Quantity::SquareClass { rep: sc });
            if sc != 1 {
                r.line("x is a rational square", Verdict::Fail, format!("|x| = {xr} has square class {sc}"));
            } else {
                return Err(Error::Inconclusive(format!("root of |x| = {xr} exceeds the height bound")));
            }
        }
    }
    Ok(r)
}

fn height_bound_squared(h: u64) -> u64 {
    h.saturating_mul(h)
}

/// Conditions (a)-(c) on `delta` and its coprimality to `N`.
fn check_delta(s: &Setup, chi1: &QuadDirichletChar, delta: &HeckeQuadChar, r: &mut VerificationReport) -> Result<()> {
    let invalid = |x: String| Err(Error::SetupInvalid(x));
    let f = delta.field;
    if gcd_u64(delta.conductor_norm, s.n) != 1 {
        return invalid("delta ramifies at a prime dividing N".into());
    }
    if delta.arch_signs != [s.w, s.w] {
        return invalid(format!("(a): delta_v(-1) != w = {}", s.w));
    }
    for l in arith::prime_divisors(s.m) {
        for pr in f.primes_above(l) {
            if pr.splitting != Splitting::Split {
                return invalid(format!("{l} divides M but does not split in F"));
            }
            if delta.value(&pr) != chi1.value(l as i64) {
                return invalid(format!("(b) fails at a prime over {l}"));
            }
        }
    }
    for q in arith::prime_divisors(s.q) {
        let pr = f.splitting_type(q);
        if pr.splitting != Splitting::Inert {
            return invalid(format!("{q} divides Q but is not inert in F"));
        }
        if delta.value(&pr) != -1 {
            return invalid(format!("(c) fails at {q} O_F"));
        }
    }
    if gcd_u64(delta.conductor_norm, f.disc() as u64) != 1 {
        r.notes.push("delta ramifies at a prime dividing D_F".into());
    }
    r.exact("N(c_delta)", Rational::from_integer(delta.conductor_norm as i128));
    r.exact("D_F", Rational::from_integer(f.disc() as i128));
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistEntry {
    pub delta: String,
    pub report: TwistTamagawaReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub curve: String,
    pub q: u64,
    pub characters: BTreeMap<String, i64>,
    pub deltas: Vec<String>,
    pub reports: Vec<VerificationReport>,
    pub twist_tamagawa: Vec<TwistEntry>,
    pub errors: Vec<String>,
    pub verdict: Verdict,
}

impl ReportBundle {
    pub fn new(curve: String, q: u64) -> Self {
        ReportBundle {
            schema_version: SCHEMA_VERSION,
            curve,
            q,
            characters: BTreeMap::new(),
            deltas: Vec::new(),
            reports: Vec::new(),
            twist_tamagawa: Vec::new(),
            errors: Vec::new(),
            verdict: Verdict::Pass,
        }
    }

    pub fn push(&mut self, r: VerificationReport) {
        self.verdict = self.verdict.and(r.verdict);
        self.reports.push(r);
    }

    /// Records a failed step; search and precision failures count as inconclusive.
    pub fn error(&mut self, what: &str, err: &Error) {
        self.verdict = self.verdict.and(match err {
            Error::Inconclusive(_) | Error::SearchExhausted(_) => Verdict::Inconclusive,
            _ => Verdict::Fail,
        });
        self.errors.push(format!("{what}: {err}"));
    }
}

/// A pipeline run stopped by a search bound, with everything computed so far.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineFailure {
    pub error: Error,
    pub partial: ReportBundle,
}

/// Searches `chi1`, `chi2`, `chi3`, `delta`, `delta1` for `E` and `Q`, then runs every check.
pub fn run_pipeline(
    e: &EllipticCurveQ,
    q: u64,
    cfg: &Config,
    store: &mut dyn Store,
) -> core::result::Result<ReportBundle, PipelineFailure> {
    let mut b = ReportBundle::new(String::new(), q);
    match pipeline_steps(e, q, cfg, store, &mut b) {
        Ok(()) => Ok(b),
        Err(error) => {
            b.error("pipeline", &error);
            Err(PipelineFailure { error, partial: b })
        }
    }
}


fn delta_constraints(e: &EllipticCurveQ, chi1: &QuadDirichletChar, chi2: &QuadDirichletChar) -> Result<(Setup, RealQuadField, DeltaConstraints)> {
    let s = setup_from_chars(e, chi1, chi2)?;
    let field = RealQuadField::new(chi1.product(chi2).disc())?;
    let mut cons = DeltaConstraints { arch: s.w, coprime_to: s.n * field.disc() as u64, ..Default::default() };
    for l in arith::prime_divisors(s.m) {
        cons.split_values.insert(l, chi1.value(l as i64));
    }
    for l in arith::prime_divisors(s.q) {
        cons.inert_values.insert(l, -1);
    }
    Ok((s, field, cons))
}

/// Up to `cfg.deltas` characters `delta` satisfying (a)-(c), unramified at `N D_F`, of
/// height at most `cfg.delta_height`, with `L(1/2, E_F, delta)` certified nonzero.
pub fn search_deltas(
    e: &EllipticCurveQ,
    chi1: &QuadDirichletChar,
    chi2: &QuadDirichletChar,
    cfg: &Config,
) -> Result<Vec<HeckeQuadChar>> {
    let e = e.minimal_model()?;
    let (s, field, cons) = delta_constraints(&e, chi1, chi2)?;
    let mut deltas = Vec::new();
    for d in search_delta(&field, &cons, cfg.delta_height) {
        let cond = (s.n as u128 * d.conductor_norm as u128 * field.disc() as u128).pow(2);
        if deltas.len() >= cfg.deltas || cond > cfg.max_conductor as u128 {
            break;
        }
        let spec = lfun::lseries_ef_delta(&e, &field, &d)?;
        if lfun::certify_nonvanishing(&spec, 0, 1e-8)? {
            deltas.push(d);
        }
    }
    Ok(deltas)
}

/// A `delta1` with archimedean signs opposite to `delta`, the same values at `N`,
/// unramified at `N c_delta`.
pub fn search_delta1(
    e: &EllipticCurveQ,
    chi1: &QuadDirichletChar,
    chi2: &QuadDirichletChar,
    delta: &HeckeQuadChar,
    cfg: &Config,
) -> Result<Option<HeckeQuadChar>> {
    let e = e.minimal_model()?;
    let (s, field, mut cons) = delta_constraints(&e, chi1, chi2)?;
    cons.arch = -s.w;
    cons.coprime_to = s.n * delta.conductor_norm;
    Ok(search_delta(&field, &cons, cfg.delta_height).into_iter().next())
}

/// `chi1` (from `cfg.chi1` or searched: odd twist with nonzero derivative), then `chi2`
/// satisfying the modified Heegner hypothesis for `Q` with `L(1, E, chi2) != 0`, preferring
/// odd `D_F`.
pub fn search_pair(
    e: &EllipticCurveQ,
    q: u64,
    cfg: &Config,
    store: &mut dyn Store,
) -> Result<[QuadDirichletChar; 2]> {
    let e = e.minimal_model()?;
    let n = e.conductor()?;
    admissible_q(n, q)?;
    let space = modsym_space(store, n, cfg.level_bound)?;
    let f = find_eigenform(&space, &e)?;
    let wn = atkin_lehner_sign(&space, &f, n)?;
    let nonzero = |chi: &QuadDirichletChar| -> Result<bool> {
        Ok(algebraic_twisted_lvalue(&space, &f, chi)? != num_rational::BigRational::from_integer(0.into()))
    };

    // chi1: odd functional equation and nonzero derivative
    let chi1 = match cfg.chi1 {
        Some(d) => {
            let c = QuadDirichletChar::new(d)?;
            if gcd_u64(c.conductor(), n) != 1 || fe_sign_twist(n, wn, &c)? != -1 {
                return Err(Error::SetupInvalid(format!("chi1 = {d} needs chi1(-N) = w_N and conductor prime to N")));
            }
            c
        }
        None => {
            let mut found = None;
            for c in crate::characters::fundamental_discriminants(cfg.char_bound) {
                if gcd_u64(c.conductor(), n) != 1 || fe_sign_twist(n, wn, &c)? != -1 {
                    continue;
                }
                let d = twist_value(&e, &c, 1)?;
                if libm::fabs(d.value) > d.error + 1e-8 {
                    found = Some(c);
                    break;
                }
            }
            found.ok_or_else(|| Error::SearchExhausted(format!("no chi1 with |D| <= {}", cfg.char_bound)))?
        }
    };

    // chi2: modified Heegner hypothesis and L(1, E, chi2) != 0; odd D_F preferred
    let mut profile = CharProfile::new(chi1.parity());
    for l in arith::prime_divisors(n) {
        let v = chi1.value(l as i64);
        profile.require(l, if q % l == 0 { -v } else { v })?;
    }
    profile.coprime(n).coprime(chi1.conductor());
    let mut chi2 = None;
    for c in search_auxiliary_char(&profile, cfg.char_bound) {
        if c.is_trivial() && chi1.is_trivial() {
            continue;
        }
        if !nonzero(&c)? {
            continue;
        }
        let odd = chi1.product(&c).disc() % 2 != 0;
        if chi2.is_none() {
            chi2 = Some(c);
        }
        if odd {
            chi2 = Some(c);
            break;
        }
    }
    let chi2 = chi2.ok_or_else(|| Error::SearchExhausted(format!("no chi2 with |D| <= {}", cfg.char_bound)))?;

    Ok([chi1, chi2])
}

/// `chi3` of parity opposite to `chi1`, agreeing with `chi1` on `N`, prime to `c_chi2`,
/// with `L(1, E, chi3) != 0`.
pub fn search_chi3(
    e: &EllipticCurveQ,
    chi1: &QuadDirichletChar,
    chi2: &QuadDirichletChar,
    cfg: &Config,
    store: &mut dyn Store,
) -> Result<QuadDirichletChar> {
    let e = e.minimal_model()?;
    let n = e.conductor()?;
    let space = modsym_space(store, n, cfg.level_bound)?;
    let f = find_eigenform(&space, &e)?;
    let nonzero = |chi: &QuadDirichletChar| -> Result<bool> {
        Ok(algebraic_twisted_lvalue(&space, &f, chi)? != num_rational::BigRational::from_integer(0.into()))
    };

    // chi3: opposite parity, agrees with chi1 at every prime of N, L(1, E, chi3) != 0
    let mut p3 = CharProfile::new(-chi1.parity());
    for l in arith::prime_divisors(n) {
        p3.require(l, chi1.value(l as i64))?;
    }
    p3.coprime(n).coprime(chi1.conductor()).coprime(chi2.conductor());
    let mut chi3 = None;
    for c in search_auxiliary_char(&p3, cfg.char_bound) {
        if nonzero(&c)? {
            chi3 = Some(c);
            break;
        }
    }
    let chi3 = chi3.ok_or_else(|| Error::SearchExhausted(format!("no chi3 with |D| <= {}", cfg.char_bound)))?;
    Ok(chi3)
}

/// [`search_pair`] followed by [`search_chi3`].
pub fn search_characters(
    e: &EllipticCurveQ,
    q: u64,
    cfg: &Config,
    store: &mut dyn Store,
) -> Result<[QuadDirichletChar; 3]> {
    let [chi1, chi2] = search_pair(e, q, cfg, store)?;
    let chi3 = search_chi3(e, &chi1, &chi2, cfg, store)?;
    Ok([chi1, chi2, chi3])
}

fn pipeline_steps(e: &EllipticCurveQ, q: u64, cfg: &Config, store: &mut dyn Store, b: &mut ReportBundle) -> Result<()> {
    let e = e.minimal_model()?;
    let n = e.conductor()?;
    b.curve = curve_text(&e);
    let m = admissible_q(n, q)?;
    let [chi1, chi2, chi3] = search_characters(&e, q, cfg, store)?;
    for (k, c) in [("chi1", chi1), ("chi2", chi2), ("chi3", chi3)] {
        b.characters.insert(k.into(), c.disc());
    }

    let field = RealQuadField::new(chi1.product(&chi2).disc())?;
    b.characters.insert("D_F".into(), field.disc());
    let s = setup_from_chars(&e, &chi1, &chi2)?;
    debug_assert_eq!((s.m, s.q), (m, q));

    match check_degree_class_with(&e, q, cfg, store) {
        Ok(r) => b.push(r),
        Err(err) => b.error("degree_class", &err),
    }

    let deltas = search_deltas(&e, &chi1, &chi2, cfg)?;
    let delta1 = deltas.first().and_then(|d| search_delta1(&e, &chi1, &chi2, d, cfg).ok().flatten());
    match (deltas.first(), delta1.as_ref()) {
        (Some(d), Some(d1)) => match check_identity_suite(&chi1, &chi2, &chi3, Some((d, d1))) {
            Ok(r) => b.push(r),
            Err(err) => b.error("identity_suite", &err),
        },
        _ => match check_identity_suite(&chi1, &chi2, &chi3, None) {
            Ok(r) => b.push(r),
            Err(err) => b.error("identity_suite", &err),
        },
    }

    for d in &deltas {
        b.deltas.push(delta_text(d));
        match check_square_value_with(&e, &chi1, &chi2, d, cfg) {
            Ok(r) => b.push(r),
            Err(err) => b.error(&format!("square_value for {}", delta_text(d)), &err),
        }
        if field.disc() % 2 != 0 {
            match twist_tamagawa_analysis(&e, &field, d, m, q) {
                Ok(t) => b.twist_tamagawa.push(TwistEntry { delta: delta_text(d), report: t }),
                Err(err) => b.error("twist_tamagawa", &err),
            }
        }
    }
    if deltas.len() < cfg.deltas {
        return Err(Error::SearchExhausted(format!(
            "found {} of {} characters delta with height <= {}",
            deltas.len(),
            cfg.deltas,
            cfg.delta_height
        )));
    }
    if delta1.is_none() {
        return Err(Error::SearchExhausted(format!("no delta1 with height <= {}", cfg.delta_height)));
    }
    Ok(())
}
