//! The bound `δ(r, ε)`, the sequence `u_{k,q}`, the extremal family of
//! fibrations over `A¹` and per-instance verification of the bounds.

use std::collections::BTreeMap;

use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;

use crate::arith::{is_zero_vec, rat_int, vec_add, Int, IntMat, IntVec, Rat};
use crate::cone;
use crate::divisor::{is_ample_over, is_q_cartier, log_discrepancy_function, rel_trivial_witness, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::fibration::{
    average_boundary, discriminant_divisor, discriminant_on_subdivision, pullback_divisor,
    pullback_multiplicities, relative_mld, validate_morphism, ToricMorphism,
};
use crate::singularity::{closed_cone_min, mld_at_cone, MldValue, Minimum};

fn check_params(r: u32, eps: &Rat) -> Result<()> {
    if r < 1 {
        return Err(Error::DomainError("r must be at least 1".into()));
    }
    if !eps.is_positive() || *eps > Rat::one() {
        return Err(Error::DomainError(format!("eps = {eps} is outside (0, 1]")));
    }
    Ok(())
}

/// `ε^{2^r} / (2^{2^r - 1} · Π_{i=1}^{r} i^{2^i})`.
pub fn delta(r: u32, eps: &Rat) -> Result<Rat> {
    check_params(r, eps)?;
    if r > 16 {
        return Err(Error::DomainError(format!("r = {r} is too large")));
    }
    let two_r = 1u32 << r;
    let mut den = Pow::pow(Int::from(2), two_r - 1);
    for i in 1..=r {
        den *= Pow::pow(Int::from(i), 1u32 << i);
    }
    Ok(Pow::pow(eps.clone(), two_r) / rat_int(&den))
}

/// `u_{1,q} = q`, `u_{k+1,q} = u_{k,q}(u_{k,q} + 1)`.
pub fn u_sequence(k: u32, q: u64) -> Result<Int> {
    if k < 1 || q < 1 {
        return Err(Error::DomainError("u_{k,q} needs k >= 1 and q >= 1".into()));
    }
    let mut u = Int::from(q);
    for _ in 1..k {
        let next = &u + 1u32;
        u *= next;
    }
    Ok(u)
}

/// How the fiber rays `v_1..v_r` are laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FamilyReading {
    /// `v_i = (1 + u_i) e_i - q e`.
    #[default]
    PerCoordinate,
    /// `v_i = (1 + u_i) e_1 - q e`; only valid for `r = 1`.
    FirstCoordinate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    pub r: u32,
    pub q: u64,
    pub x: Fan,
    pub z: Fan,
    pub f: ToricMorphism,
    /// Index of the ray over the origin of `A¹`.
    pub distinguished: usize,
}

fn construction(msg: impl Into<String>) -> Error {
    Error::ConstructionInvariantFailure(msg.into())
}

pub fn example_family(r: u32, q: u64) -> Result<FamilyInstance> {
    example_family_with(r, q, FamilyReading::PerCoordinate)
}

pub fn example_family_with(r: u32, q: u64, reading: FamilyReading) -> Result<FamilyInstance> {
    if r < 1 || q < 1 {
        return Err(Error::DomainError("the family needs r >= 1 and q >= 1".into()));
    }
    if r > 6 {
        return Err(Error::DomainError(format!("r = {r} is too large")));
    }
    let n = r as usize + 1;
    let qi = Int::from(q);
    let mut rays: Vec<IntVec> = Vec::with_capacity(n + 1);
    for i in 1..=r as usize {
        let mut v: IntVec = (0..n).map(|j| if j < n - 1 { -qi.clone() } else { Int::zero() }).collect();
        let slot = match reading {
            FamilyReading::PerCoordinate => i - 1,
            FamilyReading::FirstCoordinate => 0,
        };
        v[slot] += Int::one() + u_sequence(i as u32, q)?;
        rays.push(v);
    }
    rays.push((0..n).map(|j| if j < n - 1 { -Int::one() } else { Int::zero() }).collect());
    let mut last: IntVec = (0..n).map(|j| if j < n - 1 { -qi.clone() } else { Int::zero() }).collect();
    last[n - 1] = u_sequence(r + 1, q)? - 1u32;
    rays.push(last);

    let distinguished = n;
    let mut cones = Vec::new();
    for skip in (0..n).rev() {
        let mut c: Vec<usize> = (0..n).filter(|&j| j != skip).collect();
        c.push(distinguished);
        cones.push(c);
    }
    let literal_note = if reading == FamilyReading::FirstCoordinate && r >= 2 {
        " (with every v_i along e_1 the fiber rays lie in a half-space, so the fiber fan cannot be complete)"
    } else {
        ""
    };
    let x = Fan::new(n, rays, cones).map_err(|e| construction(format!("{e}{literal_note}")))?;
    let z = Fan::from_i64(1, &[&[1]], &[&[0]])?;
    let mut row = vec![Int::zero(); n];
    row[n - 1] = Int::one();
    let f = ToricMorphism::new(IntMat::from_rows(&[row], n)?, x.clone(), z.clone())
        .map_err(|e| construction(format!("{e}{literal_note}")))?;
    let diag = validate_morphism(&f)?;
    if !diag.proper_contraction() || diag.relative_dimension != r as usize {
        return Err(construction(format!(
            "projection is not a proper contraction of relative dimension {r}: {diag:?}{literal_note}"
        )));
    }
    Ok(FamilyInstance {
        r,
        q,
        x,
        z,
        f,
        distinguished,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, holds: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            holds,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    HypothesisFailed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub hypotheses: Vec<Check>,
    pub claims: Vec<Check>,
    pub measured: BTreeMap<String, String>,
    pub outcome: Outcome,
}

impl VerificationReport {
    fn new(theorem: &str) -> VerificationReport {
        VerificationReport {
            theorem: theorem.into(),
            hypotheses: Vec::new(),
            claims: Vec::new(),
            measured: BTreeMap::new(),
            outcome: Outcome::HypothesisFailed,
        }
    }

    fn hypothesis(&mut self, name: &str, holds: bool, detail: impl Into<String>) -> bool {
        self.hypotheses.push(Check::new(name, holds, detail));
        holds
    }

    fn claim(&mut self, name: &str, holds: bool, detail: impl Into<String>) {
        self.claims.push(Check::new(name, holds, detail));
    }

    fn measure(&mut self, key: &str, value: impl ToString) {
        self.measured.insert(key.into(), value.to_string());
    }

    fn finish(mut self) -> VerificationReport {
        self.outcome = if !self.hypotheses.iter().all(|c| c.holds) {
            Outcome::HypothesisFailed
        } else if self.claims.iter().all(|c| c.holds) {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

fn fmt_vec(v: &[Int]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Shared gate: proper contraction, then relative mld over `tau_z` at least `eps`.
fn gate_relative_mld(
    rep: &mut VerificationReport,
    f: &ToricMorphism,
    b: &ToricDivisor,
    tau_z: &[usize],
    eps: &Rat,
) -> Result<bool> {
    let diag = validate_morphism(f)?;
    if !rep.hypothesis("proper contraction", diag.proper_contraction(), format!("{diag:?}")) {
        return Ok(false);
    }
    let rel = relative_mld(f, b, tau_z)?;
    rep.measure("relative_mld", &rel.value);
    if let Some(w) = &rel.witness {
        rep.measure("relative_mld_witness", fmt_vec(w));
    }
    Ok(rep.hypothesis(
        "relative mld >= eps",
        rel.value.at_least(eps),
        format!("{} vs {eps}", rel.value),
    ))
}

/// Multiplicities of fibers over the point of `tau_z` and the singularities
/// of the base at that point, against `δ(r, ε)`.
pub fn verify_fano_contraction_theorem(
    f: &ToricMorphism,
    b: &ToricDivisor,
    tau_z: &[usize],
    eps: &Rat,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("fano-contraction");
    let r = f.relative_dimension() as u32;
    b.check(f.source())?;
    if !rep.hypothesis("relative dimension >= 1", r >= 1, format!("r = {r}")) {
        return Ok(rep.finish());
    }
    let d = delta(r, eps)?;
    rep.measure("r", r);
    rep.measure("eps", eps);
    rep.measure("delta", &d);
    if !gate_relative_mld(&mut rep, f, b, tau_z, eps)? {
        return Ok(rep.finish());
    }
    let trivial = rel_trivial_witness(f, b)?.is_some();
    let anti_ample = b.is_zero() && is_ample_over(f, &ToricDivisor::boundary(f.source()))?;
    rep.hypothesis(
        "K_X + B trivial over Z, or B = 0 with -K_X ample over Z",
        trivial || anti_ample,
        format!("relatively trivial: {trivial}; anti-canonical ample: {anti_ample}"),
    );
    if !rep.hypotheses.iter().all(|h| h.holds) {
        return Ok(rep.finish());
    }

    let inverse = d.recip();
    rep.measure("inverse_delta", &inverse);
    if tau_z.len() == 1 {
        let mults = pullback_multiplicities(f, tau_z[0])?;
        let list: Vec<String> = mults.iter().map(|(i, c)| format!("{i}:{c}")).collect();
        rep.measure("multiplicities", list.join(" "));
        for (i, c) in mults {
            rep.claim(
                "multiplicity <= 1/delta",
                rat_int(&c) <= inverse,
                format!("ray {i}: {c} vs {inverse}"),
            );
        }
    }
    let z = f.target();
    if is_q_cartier(z, &ToricDivisor::boundary(z))?.is_some() {
        let m = mld_at_cone(z, &ToricDivisor::zero(z), tau_z)?;
        rep.measure("base_mld", &m.value);
        rep.claim("base mld >= delta", m.value.at_least(&d), format!("{} vs {d}", m.value));
    }
    Ok(rep.finish())
}

/// The base pair induced by the averaged boundary `Γ^α`, `α = 1/r!`, has
/// mld at least `δ(r, ε)` at the point of `tau_z`, also at exceptional toric
/// valuations given by `probes`.
pub fn verify_adjunction_theorem(
    f: &ToricMorphism,
    b: &ToricDivisor,
    tau_z: &[usize],
    eps: &Rat,
    probes: &[IntVec],
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("adjunction");
    let r = f.relative_dimension() as u32;
    b.check(f.source())?;
    if !rep.hypothesis("relative dimension >= 1", r >= 1, format!("r = {r}")) {
        return Ok(rep.finish());
    }
    let d = delta(r, eps)?;
    rep.measure("delta", &d);
    let trivial = rel_trivial_witness(f, b)?.is_some();
    if !rep.hypothesis("K_X + B trivial over Z", trivial, "") {
        return Ok(rep.finish());
    }
    if !gate_relative_mld(&mut rep, f, b, tau_z, eps)? {
        return Ok(rep.finish());
    }
    let factorial: Int = (1..=r).map(Int::from).product();
    let alpha = Rat::new(Int::one(), factorial);
    rep.measure("alpha", &alpha);
    let gamma = average_boundary(b, f.source(), &alpha)?;
    let disc = discriminant_divisor(f, &gamma)?;
    let coeffs: Vec<String> = disc.divisor.coeffs().iter().map(|c| c.to_string()).collect();
    rep.measure("discriminant", coeffs.join(" "));
    let z = f.target();
    let m = mld_at_cone(z, &disc.divisor, tau_z)?;
    rep.measure("base_mld", &m.value);
    rep.claim("base mld >= delta", m.value.at_least(&d), format!("{} vs {d}", m.value));

    let mut tau = tau_z.to_vec();
    tau.sort_unstable();
    let a_base = log_discrepancy_function(z, &disc.divisor)?;
    for p in probes {
        let label = fmt_vec(p);
        if p.len() != z.rank() || is_zero_vec(p) {
            return Err(Error::DimensionMismatch {
                expected: z.rank(),
                found: p.len(),
            });
        }
        let located = z.locate(p)?.map(|l| l.cone);
        if located.as_ref() != Some(&tau) {
            rep.measure(&format!("probe {label}"), "center differs from z");
            continue;
        }
        let (_, sub) = discriminant_on_subdivision(f, &gamma, p)?;
        let t_p = sub.thresholds.last().cloned().unwrap_or_else(Rat::zero);
        let a_p = a_base.eval(p)?;
        rep.measure(&format!("probe {label} threshold"), &t_p);
        rep.measure(&format!("probe {label} base discrepancy"), &a_p);
        rep.claim(
            "exceptional base discrepancy >= delta",
            t_p >= d,
            format!("{label}: {t_p} vs {d}"),
        );
    }
    Ok(rep.finish())
}

/// `(X, B + δ f^* z̄)` is lc over the open set of the ray `tau_z`.
pub fn verify_lc_complement_theorem(
    f: &ToricMorphism,
    b_toric: &ToricDivisor,
    b_plus: &ToricDivisor,
    tau_z: &[usize],
    eps: &Rat,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("lc-complement");
    let r = f.relative_dimension() as u32;
    b_toric.check(f.source())?;
    b_plus.check(f.source())?;
    if !rep.hypothesis("relative dimension >= 1", r >= 1, format!("r = {r}")) {
        return Ok(rep.finish());
    }
    if !rep.hypothesis("z is a divisor", tau_z.len() == 1, format!("{tau_z:?}")) {
        return Ok(rep.finish());
    }
    if !rep.hypothesis("B <= B+", b_toric.le(b_plus), "") {
        return Ok(rep.finish());
    }
    let trivial = rel_trivial_witness(f, b_plus)?.is_some();
    if !rep.hypothesis("K_X + B+ trivial over Z", trivial, "") {
        return Ok(rep.finish());
    }
    if !gate_relative_mld(&mut rep, f, b_plus, tau_z, eps)? {
        return Ok(rep.finish());
    }
    let d = delta(r, eps)?;
    rep.measure("delta", &d);
    let fiber = pullback_divisor(f, tau_z[0])?;
    let pair = b_toric.add(&fiber.scale(&d));
    let coeffs: Vec<String> = pair.coeffs().iter().map(|c| c.to_string()).collect();
    rep.measure("boundary", coeffs.join(" "));

    let x = f.source();
    let a = log_discrepancy_function(x, &pair)?;
    // Source cones over the affine chart of the ray: those mapping into it.
    let mut over: Vec<Vec<usize>> = Vec::new();
    for c in x.all_cones()? {
        if !c.is_empty() && f.maps_into(&c, tau_z)? {
            over.push(c);
        }
    }
    let snapshot = over.clone();
    over.retain(|c| !snapshot.iter().any(|d| d.len() > c.len() && c.iter().all(|i| d.contains(i))));
    let mut acc = Minimum::default();
    for c in &over {
        let sum = c.iter().fold(vec![Int::zero(); x.rank()], |s, &i| vec_add(&s, x.ray(i)));
        let host = a.cone_containing(&sum)?.ok_or(Error::OutsideSupport)?;
        let gens = x.generators(c);
        for simplex in cone::triangulate(&gens, x.rank())? {
            let sg: Vec<IntVec> = simplex.iter().map(|&i| gens[i].clone()).collect();
            closed_cone_min(&sg, a.functional(host), x.rank(), &mut acc, None)?;
        }
    }
    let value = acc.best.as_ref().map(|(v, _)| v.clone());
    match value {
        Some(v) => {
            rep.measure("min_log_discrepancy_over_z", &v);
            rep.claim("lc over a neighbourhood of z", v >= MldValue::Finite(Rat::zero()), format!("{v}"));
        }
        None => rep.claim("lc over a neighbourhood of z", true, "no source cone over z"),
    }
    Ok(rep.finish())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TightnessRow {
    pub q: u64,
    #[serde(serialize_with = "ser_int")]
    pub multiplicity: Int,
    #[serde(serialize_with = "crate::arith::ser_rat")]
    pub inverse_delta: Rat,
    #[serde(serialize_with = "crate::arith::ser_rat")]
    pub ratio: Rat,
}

fn ser_int<S: serde::Serializer>(x: &Int, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Fiber multiplicity of the family member `(r, q)` against `1/δ(r, 1/q)`.
pub fn tightness_scan(r: u32, qs: &[u64]) -> Result<Vec<TightnessRow>> {
    let mut qs = qs.to_vec();
    qs.sort_unstable();
    qs.dedup();
    let mut rows = Vec::with_capacity(qs.len());
    for q in qs {
        if q < 2 {
            return Err(Error::DomainError(format!("q = {q} must be at least 2")));
        }
        let m = u_sequence(r + 1, q)? - 1u32;
        let inst = example_family(r, q)?;
        let mults = pullback_multiplicities(&inst.f, 0)?;
        if mults != vec![(inst.distinguished, m.clone())] {
            return Err(construction(format!("multiplicity mismatch for q = {q}: {mults:?}")));
        }
        let d = delta(r, &Rat::new(Int::one(), Int::from(q)))?;
        rows.push(TightnessRow {
            q,
            ratio: rat_int(&m) * &d,
            multiplicity: m,
            inverse_delta: d.recip(),
        });
    }
    Ok(rows)
}

pub fn tightness_csv(rows: &[TightnessRow]) -> String {
    let mut out = String::from("q,multiplicity,inverse_delta,ratio\n");
    for row in rows {
        out.push_str(&format!("{},{},{},{}\n", row.q, row.multiplicity, row.inverse_delta, row.ratio));
    }
    out
}
