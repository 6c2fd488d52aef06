//! Minimal log discrepancies of toric pairs.
//!
//! Every lattice point `x` of a simplicial cone with generators `g_i` is
//! uniquely `p + Σ n_i g_i` with `p` a lattice point of the half-open
//! parallelepiped and `n_i >= 0`. When `A(g_i) >= 0` for all `i`, minima of
//! the linear function `A` are therefore attained at parallelepiped points,
//! possibly shifted by the generators whose coefficient must stay positive.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::arith::{dot_rat, is_zero_vec, primitive, vec_add, Int, IntVec, Rat, RatVec};
use crate::cone;
use crate::divisor::{log_discrepancy_function, PlFunction, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::Fan;

/// A minimum that may be unbounded below. `MinusInfinity` sorts first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MldValue {
    MinusInfinity,
    Finite(Rat),
}

impl MldValue {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            MldValue::Finite(r) => Some(r),
            MldValue::MinusInfinity => None,
        }
    }

    pub fn at_least(&self, bound: &Rat) -> bool {
        matches!(self, MldValue::Finite(v) if v >= bound)
    }
}

impl fmt::Display for MldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MldValue::MinusInfinity => write!(f, "-inf"),
            MldValue::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for MldValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MldReport {
    pub value: MldValue,
    /// A lattice point attaining the value, or along which `A` decreases
    /// without bound.
    pub witness: Option<IntVec>,
    pub enumerated: usize,
}

/// Running minimum over candidate points.
#[derive(Default)]
pub(crate) struct Minimum {
    pub best: Option<(MldValue, IntVec)>,
    pub enumerated: usize,
}

impl Minimum {
    pub fn offer(&mut self, value: MldValue, witness: IntVec) {
        // Ties keep the first point in enumeration order.
        let better = match &self.best {
            None => true,
            Some((b, _)) => value < *b,
        };
        if better {
            self.best = Some((value, witness));
        }
    }

    pub fn below(&self, threshold: Option<&Rat>) -> bool {
        match (&self.best, threshold) {
            (Some((MldValue::MinusInfinity, _)), _) => true,
            (Some((MldValue::Finite(v), _)), Some(t)) => v < t,
            _ => false,
        }
    }

    pub fn into_report(self) -> Result<MldReport> {
        let (value, witness) = self.best.ok_or(Error::EmptySupport)?;
        Ok(MldReport {
            value,
            witness: Some(witness),
            enumerated: self.enumerated,
        })
    }
}

/// Minimum of `functional` over the nonzero lattice points of the closed
/// simplicial cone `gens`.
pub(crate) fn closed_cone_min(
    gens: &[IntVec],
    functional: &[Rat],
    dim: usize,
    acc: &mut Minimum,
    threshold: Option<&Rat>,
) -> Result<()> {
    for g in gens {
        let a = dot_rat(functional, g);
        if a.is_negative() {
            acc.offer(MldValue::MinusInfinity, g.clone());
            return Ok(());
        }
        acc.offer(MldValue::Finite(a), g.clone());
    }
    for p in cone::box_points(gens, dim)? {
        acc.enumerated += 1;
        if p.is_origin() {
            continue;
        }
        acc.offer(MldValue::Finite(dot_rat(functional, &p.point)), p.point);
        if acc.below(threshold) {
            return Ok(());
        }
    }
    Ok(())
}

/// Minimum of `functional` over the lattice points of the relative interior
/// of the simplicial cone `gens` (which must be nonempty).
pub(crate) fn relint_min(gens: &[IntVec], functional: &[Rat], dim: usize, acc: &mut Minimum) -> Result<()> {
    if let Some(g) = gens.iter().find(|g| dot_rat(functional, g).is_negative()) {
        let sum = gens.iter().fold(vec![Int::zero(); dim], |s, h| vec_add(&s, h));
        acc.offer(MldValue::MinusInfinity, vec_add(&sum, g));
        return Ok(());
    }
    for p in cone::box_points(gens, dim)? {
        acc.enumerated += 1;
        let mut x = p.point.clone();
        for (g, t) in gens.iter().zip(&p.numerators) {
            if t.is_zero() {
                x = vec_add(&x, g);
            }
        }
        let value = dot_rat(functional, &x);
        // Nonnegative A: a primitive multiple does no worse.
        let x = if value.is_zero() { primitive(&x)? } else { x };
        acc.offer(MldValue::Finite(value), x);
    }
    Ok(())
}

/// Faces of the pulling triangulation of `gens`, as local index sets.
pub(crate) fn triangulation_faces(gens: &[IntVec], dim: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = BTreeSet::new();
    for simplex in cone::triangulate(gens, dim)? {
        let k = simplex.len();
        for mask in 1u64..(1 << k) {
            out.insert(
                (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| simplex[i])
                    .collect::<Vec<_>>(),
            );
        }
    }
    Ok(out.into_iter().collect())
}

pub fn log_discrepancy(fan: &Fan, b: &ToricDivisor, v: &[Int]) -> Result<Rat> {
    if is_zero_vec(v) {
        return Err(Error::ZeroVector);
    }
    log_discrepancy_function(fan, b)?.eval(v)
}

pub fn global_mld(fan: &Fan, b: &ToricDivisor) -> Result<MldReport> {
    let a = log_discrepancy_function(fan, b)?;
    global_mld_with(&a, None)
}

/// Global minimum of `a`; stops early once a value below `threshold` is seen.
pub fn global_mld_with(a: &PlFunction, threshold: Option<&Rat>) -> Result<MldReport> {
    let fan = a.fan();
    let mut acc = Minimum::default();
    for (c, idx) in fan.max_cones().iter().enumerate() {
        let gens = fan.generators(idx);
        for simplex in cone::triangulate(&gens, fan.rank())? {
            let sg: Vec<IntVec> = simplex.iter().map(|&i| gens[i].clone()).collect();
            closed_cone_min(&sg, a.functional(c), fan.rank(), &mut acc, threshold)?;
            if acc.below(threshold) {
                return acc.into_report();
            }
        }
    }
    acc.into_report()
}

/// Minimum of `A` over the lattice points in the relative interior of the
/// cone spanned by the rays `tau`.
pub fn mld_at_cone(fan: &Fan, b: &ToricDivisor, tau: &[usize]) -> Result<MldReport> {
    let a = log_discrepancy_function(fan, b)?;
    mld_at_cone_with(&a, tau)
}

pub fn mld_at_cone_with(a: &PlFunction, tau: &[usize]) -> Result<MldReport> {
    let fan = a.fan();
    if tau.is_empty() || tau.iter().any(|&i| i >= fan.rays().len()) || !fan.is_cone(tau)? {
        return Err(Error::NotACone(tau.to_vec()));
    }
    let gens = fan.generators(tau);
    let host = a
        .cone_containing(&gens.iter().fold(vec![Int::zero(); fan.rank()], |s, g| vec_add(&s, g)))?
        .ok_or(Error::OutsideSupport)?;
    let functional: RatVec = a.functional(host).clone();
    let mut acc = Minimum::default();
    for face in triangulation_faces(&gens, fan.rank())? {
        let fg: Vec<IntVec> = face.iter().map(|&i| gens[i].clone()).collect();
        let sum = fg.iter().fold(vec![Int::zero(); fan.rank()], |s, g| vec_add(&s, g));
        if cone::minimal_face(&gens, &sum)?.len() != gens.len() {
            continue;
        }
        relint_min(&fg, &functional, fan.rank(), &mut acc)?;
    }
    acc.into_report()
}

/// `mld >= eps`, stopping at the first witness below `eps`.
pub fn is_eps_lc(fan: &Fan, b: &ToricDivisor, eps: &Rat) -> Result<bool> {
    let a = log_discrepancy_function(fan, b)?;
    Ok(global_mld_with(&a, Some(eps))?.value.at_least(eps))
}
