//! Rational polyhedral fans stored through their maximal cones.
//!
//! Ray order is the order given at construction: divisors, PL functions and
//! the relation vector of a fiber fan are all indexed by it. Each cone's
//! index list is kept sorted. Faces are computed on demand.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::arith::{
    is_primitive, is_zero_vec, primitive, rat_int, Int, IntMat, IntVec, QuotientCoordinates,
    Rat, RatVec,
};
use crate::cone;
use num_traits::Zero;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    WrongDimension { ray: usize, len: usize },
    ZeroRay(usize),
    NonPrimitiveRay(usize),
    DuplicateRay(usize, usize),
    NoCones,
    IndexOutOfRange { cone: usize, index: usize },
    RepeatedIndex { cone: usize },
    NotPointed(usize),
    NotExtremal { cone: usize, ray: usize },
    UnusedRay(usize),
    NonMaximalCone { cone: usize, inside: usize },
    BadIntersection(usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongDimension { ray, len } => write!(f, "ray {ray} has length {len}"),
            Violation::ZeroRay(i) => write!(f, "ray {i} is zero"),
            Violation::NonPrimitiveRay(i) => write!(f, "ray {i} is not primitive"),
            Violation::DuplicateRay(i, j) => write!(f, "rays {i} and {j} coincide"),
            Violation::NoCones => write!(f, "fan has no cones"),
            Violation::IndexOutOfRange { cone, index } => {
                write!(f, "cone {cone} refers to missing ray {index}")
            }
            Violation::RepeatedIndex { cone } => write!(f, "cone {cone} repeats a ray"),
            Violation::NotPointed(c) => write!(f, "cone {c} contains a line"),
            Violation::NotExtremal { cone, ray } => {
                write!(f, "ray {ray} is not an extremal ray of cone {cone}")
            }
            Violation::UnusedRay(i) => write!(f, "ray {i} lies in no cone"),
            Violation::NonMaximalCone { cone, inside } => {
                write!(f, "cone {cone} is a face of cone {inside}")
            }
            Violation::BadIntersection(a, b) => {
                write!(f, "cones {a} and {b} do not meet in a common face")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    rank: usize,
    rays: Vec<IntVec>,
    max_cones: Vec<Vec<usize>>,
}

/// A cone of a fan: ray indices plus the generator matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeRef {
    pub rays: Vec<usize>,
    pub generators: Vec<IntVec>,
    pub simplicial: bool,
}

/// Result of point location.
#[derive(Clone, Debug, PartialEq)]
pub struct Location {
    /// Rays of the smallest cone whose relative interior contains the point.
    pub cone: Vec<usize>,
    /// Coefficients over `cone`'s generators; `None` for non-simplicial cones.
    pub coefficients: Option<RatVec>,
}

impl Fan {
    /// Builds and validates a fan.
    pub fn new(rank: usize, rays: Vec<IntVec>, max_cones: Vec<Vec<usize>>) -> Result<Fan> {
        let fan = Fan::new_unchecked(rank, rays, max_cones);
        let v = fan.validate()?;
        if v.is_empty() {
            Ok(fan)
        } else {
            Err(Error::InvalidFan(v))
        }
    }

    /// Builds a fan without validating it; index lists are still sorted.
    pub fn new_unchecked(rank: usize, rays: Vec<IntVec>, max_cones: Vec<Vec<usize>>) -> Fan {
        let max_cones = max_cones
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        Fan {
            rank,
            rays,
            max_cones,
        }
    }

    pub fn from_i64(rank: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Result<Fan> {
        Fan::new(
            rank,
            rays.iter().map(|r| crate::arith::ivec(r)).collect(),
            cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &IntVec {
        &self.rays[i]
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn generators(&self, idx: &[usize]) -> Vec<IntVec> {
        idx.iter().map(|&i| self.rays[i].clone()).collect()
    }

    pub fn cone(&self, idx: &[usize]) -> ConeRef {
        let generators = self.generators(idx);
        let simplicial = cone::is_independent(&generators, self.rank);
        ConeRef {
            rays: idx.to_vec(),
            generators,
            simplicial,
        }
    }

    pub fn max_cone(&self, c: usize) -> ConeRef {
        self.cone(&self.max_cones[c])
    }

    pub fn cone_dim(&self, idx: &[usize]) -> usize {
        cone::rank(&self.generators(idx), self.rank)
    }

    pub fn is_simplicial(&self) -> bool {
        self.max_cones
            .iter()
            .all(|c| cone::is_independent(&self.generators(c), self.rank))
    }

    pub fn ray_index(&self, v: &[Int]) -> Option<usize> {
        self.rays.iter().position(|r| r.as_slice() == v)
    }

    /// Faces of maximal cone `c` as sorted global index sets.
    pub fn faces_of(&self, c: usize) -> Result<Vec<Vec<usize>>> {
        let idx = &self.max_cones[c];
        Ok(cone::faces(&self.generators(idx), self.rank)?
            .into_iter()
            .map(|s| s.iter().map(|&i| idx[i]).collect())
            .collect())
    }

    pub fn facets_of(&self, c: usize) -> Result<Vec<Vec<usize>>> {
        let idx = &self.max_cones[c];
        Ok(cone::facets(&self.generators(idx), self.rank)?
            .into_iter()
            .map(|s| s.iter().map(|&i| idx[i]).collect())
            .collect())
    }

    /// Every cone of the fan, including the zero cone, as sorted index sets.
    pub fn all_cones(&self) -> Result<Vec<Vec<usize>>> {
        let mut set = BTreeSet::new();
        for c in 0..self.max_cones.len() {
            set.extend(self.faces_of(c)?);
        }
        Ok(set.into_iter().collect())
    }

    /// Whether `idx` (sorted or not) spans a cone of the fan.
    pub fn is_cone(&self, idx: &[usize]) -> Result<bool> {
        let mut want = idx.to_vec();
        want.sort_unstable();
        for (c, cone) in self.max_cones.iter().enumerate() {
            if want.iter().all(|i| cone.contains(i)) && self.faces_of(c)?.contains(&want) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Checks primitivity, distinctness, pointedness, extremality and
    /// pairwise face intersection.
    pub fn validate(&self) -> Result<Vec<Violation>> {
        let mut out = Vec::new();
        let n = self.rank;
        for (i, r) in self.rays.iter().enumerate() {
            if r.len() != n {
                out.push(Violation::WrongDimension { ray: i, len: r.len() });
            } else if is_zero_vec(r) {
                out.push(Violation::ZeroRay(i));
            } else if !is_primitive(r) {
                out.push(Violation::NonPrimitiveRay(i));
            }
        }
        for i in 0..self.rays.len() {
            for j in i + 1..self.rays.len() {
                if self.rays[i] == self.rays[j] {
                    out.push(Violation::DuplicateRay(i, j));
                }
            }
        }
        if self.max_cones.is_empty() {
            out.push(Violation::NoCones);
        }
        for (c, idx) in self.max_cones.iter().enumerate() {
            if let Some(&bad) = idx.iter().find(|&&i| i >= self.rays.len()) {
                out.push(Violation::IndexOutOfRange { cone: c, index: bad });
            }
            if idx.windows(2).any(|w| w[0] == w[1]) {
                out.push(Violation::RepeatedIndex { cone: c });
            }
        }
        if !out.is_empty() {
            return Ok(out);
        }
        let used: BTreeSet<usize> = self.max_cones.iter().flatten().copied().collect();
        out.extend(
            (0..self.rays.len())
                .filter(|i| !used.contains(i))
                .map(Violation::UnusedRay),
        );
        let mut pointed = vec![true; self.max_cones.len()];
        for (c, idx) in self.max_cones.iter().enumerate() {
            let gens = self.generators(idx);
            if !cone::is_pointed(&gens, n)? {
                out.push(Violation::NotPointed(c));
                pointed[c] = false;
                continue;
            }
            if cone::is_independent(&gens, n) {
                continue;
            }
            for (k, &ray) in idx.iter().enumerate() {
                let others: Vec<IntVec> = gens
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, g)| g.clone())
                    .collect();
                if cone::contains(&others, &gens[k])?.is_some() {
                    out.push(Violation::NotExtremal { cone: c, ray });
                }
            }
        }
        for a in 0..self.max_cones.len() {
            for b in a + 1..self.max_cones.len() {
                if !(pointed[a] && pointed[b]) {
                    continue;
                }
                let (ca, cb) = (&self.max_cones[a], &self.max_cones[b]);
                if ca.iter().all(|i| cb.contains(i)) {
                    out.push(Violation::NonMaximalCone { cone: a, inside: b });
                    continue;
                }
                if cb.iter().all(|i| ca.contains(i)) {
                    out.push(Violation::NonMaximalCone { cone: b, inside: a });
                    continue;
                }
                if !cone::meet_in_common_face(&self.generators(ca), &self.generators(cb), n)? {
                    out.push(Violation::BadIntersection(a, b));
                }
            }
        }
        Ok(out)
    }

    /// Smallest cone whose relative interior contains `v`, or `None` when
    /// `v` is outside the support.
    pub fn locate(&self, v: &[Int]) -> Result<Option<Location>> {
        if v.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: v.len(),
            });
        }
        if is_zero_vec(v) {
            return Ok(Some(Location {
                cone: Vec::new(),
                coefficients: Some(Vec::new()),
            }));
        }
        for idx in &self.max_cones {
            let gens = self.generators(idx);
            if cone::contains(&gens, v)?.is_none() {
                continue;
            }
            let local = cone::minimal_face(&gens, v)?;
            let face: Vec<usize> = local.iter().map(|&i| idx[i]).collect();
            let fgens = self.generators(&face);
            let coefficients = if cone::is_independent(&fgens, self.rank) {
                cone::contains(&fgens, v)?
            } else {
                None
            };
            return Ok(Some(Location {
                cone: face,
                coefficients,
            }));
        }
        Ok(None)
    }

    /// Coefficients of `v` over its locating cone; errors on non-simplicial cones.
    pub fn barycentric(&self, v: &[Int]) -> Result<Option<(Vec<usize>, RatVec)>> {
        match self.locate(v)? {
            None => Ok(None),
            Some(Location {
                cone,
                coefficients: Some(c),
            }) => Ok(Some((cone, c))),
            Some(Location { cone, .. }) => Err(Error::NonSimplicialCone(cone)),
        }
    }

    pub fn in_support(&self, v: &[Int]) -> Result<bool> {
        Ok(self.locate(v)?.is_some())
    }

    /// Pairs of maximal cones sharing a facet, with the shared facet.
    pub fn walls(&self) -> Result<Vec<(usize, usize, Vec<usize>)>> {
        let mut by_facet: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for c in 0..self.max_cones.len() {
            if self.cone_dim(&self.max_cones[c]) != self.rank {
                continue;
            }
            for f in self.facets_of(c)? {
                by_facet.entry(f).or_default().push(c);
            }
        }
        Ok(by_facet
            .into_iter()
            .filter(|(_, cs)| cs.len() == 2)
            .map(|(f, cs)| (cs[0], cs[1], f))
            .collect())
    }

    /// Support equals the whole space: every maximal cone is full
    /// dimensional, every facet is shared by exactly two maximal cones and the
    /// wall graph is connected.
    pub fn is_complete(&self) -> Result<bool> {
        if self.max_cones.is_empty() {
            return Ok(false);
        }
        let mut by_facet: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for c in 0..self.max_cones.len() {
            if self.cone_dim(&self.max_cones[c]) != self.rank {
                return Ok(false);
            }
            for f in self.facets_of(c)? {
                by_facet.entry(f).or_default().push(c);
            }
        }
        if by_facet.values().any(|cs| cs.len() != 2) {
            return Ok(false);
        }
        let mut adj = vec![Vec::new(); self.max_cones.len()];
        for cs in by_facet.values() {
            adj[cs[0]].push(cs[1]);
            adj[cs[1]].push(cs[0]);
        }
        let mut seen = vec![false; self.max_cones.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(c) = queue.pop_front() {
            for &d in &adj[c] {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        Ok(seen.into_iter().all(|s| s))
    }

    /// Star subdivision at the primitive vector `v`. The new ray, if any, is
    /// appended after the existing ones.
    pub fn star_subdivision(&self, v: &[Int]) -> Result<Fan> {
        if !is_primitive(v) {
            return Err(Error::NotPrimitive(v.iter().map(|x| x.to_string()).collect()));
        }
        if self.locate(v)?.is_none() {
            return Err(Error::OutsideSupport);
        }
        if self.ray_index(v).is_some() {
            return Ok(self.clone());
        }
        let new_index = self.rays.len();
        let mut cones = Vec::new();
        for idx in &self.max_cones {
            let gens = self.generators(idx);
            let Some(coeffs) = cone::contains(&gens, v)? else {
                cones.push(idx.clone());
                continue;
            };
            if !cone::is_independent(&gens, self.rank) {
                return Err(Error::NonSimplicialCone(idx.clone()));
            }
            for (k, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut new_cone: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &r)| r)
                    .collect();
                new_cone.push(new_index);
                cones.push(new_cone);
            }
        }
        let mut rays = self.rays.clone();
        rays.push(v.to_vec());
        Fan::new(self.rank, rays, cone::dedup_sets(cones))
    }

    /// Quotient fan in `N / Z v` for the ray `ray`: images of the maximal
    /// cones containing it. Returns the projection matrix with the fan.
    pub fn quotient_fan(&self, ray: usize) -> Result<(QuotientCoordinates, Fan)> {
        if ray >= self.rays.len() {
            return Err(Error::NotARay(ray));
        }
        let coords = QuotientCoordinates::new(&self.rays[ray])?;
        let p = &coords.projection;
        let mut rays: Vec<IntVec> = Vec::new();
        let mut cones = Vec::new();
        for idx in self.max_cones.iter().filter(|c| c.contains(&ray)) {
            let mut image = Vec::new();
            for &g in idx.iter().filter(|&&g| g != ray) {
                let w = primitive(&p.mul_vec(&self.rays[g])?)?;
                let k = match rays.iter().position(|r| *r == w) {
                    Some(k) => k,
                    None => {
                        rays.push(w);
                        rays.len() - 1
                    }
                };
                if !image.contains(&k) {
                    image.push(k);
                }
            }
            // Drop generators that are not extremal in the image cone.
            let gens: Vec<IntVec> = image.iter().map(|&k| rays[k].clone()).collect();
            let mut keep = Vec::new();
            for (j, &k) in image.iter().enumerate() {
                let others: Vec<IntVec> = gens
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, g)| g.clone())
                    .collect();
                if others.is_empty() || cone::contains(&others, &gens[j])?.is_none() {
                    keep.push(k);
                }
            }
            keep.sort_unstable();
            cones.push(keep);
        }
        if cones.is_empty() {
            return Err(Error::NotARay(ray));
        }
        let fan = Fan::new_unchecked(self.rank - 1, rays, cone::dedup_sets(cones));
        let v = fan.validate()?;
        if !v.is_empty() {
            return Err(Error::QuotientNotAFan(v));
        }
        Ok((coords, fan))
    }

    /// Canonical copy: rays sorted lexicographically, cones re-indexed and sorted.
    pub fn canonical(&self) -> Fan {
        let mut order: Vec<usize> = (0..self.rays.len()).collect();
        order.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        let mut new_of = vec![0; self.rays.len()];
        for (new, &old) in order.iter().enumerate() {
            new_of[old] = new;
        }
        let rays = order.iter().map(|&i| self.rays[i].clone()).collect();
        let mut cones: Vec<Vec<usize>> = self
            .max_cones
            .iter()
            .map(|c| {
                let mut c: Vec<usize> = c.iter().map(|&i| new_of[i]).collect();
                c.sort_unstable();
                c
            })
            .collect();
        cones.sort();
        Fan::new_unchecked(self.rank, rays, cones)
    }

    /// Product with another fan: rays of `self` padded, then rays of `other`.
    pub fn product(&self, other: &Fan) -> Result<Fan> {
        let n = self.rank + other.rank;
        let mut rays = Vec::new();
        for r in &self.rays {
            let mut v = r.clone();
            v.extend(std::iter::repeat_n(Int::from(0), other.rank));
            rays.push(v);
        }
        for r in &other.rays {
            let mut v = vec![Int::from(0); self.rank];
            v.extend(r.iter().cloned());
            rays.push(v);
        }
        let off = self.rays.len();
        let mut cones = Vec::new();
        for a in &self.max_cones {
            for b in &other.max_cones {
                let mut c = a.clone();
                c.extend(b.iter().map(|&i| i + off));
                cones.push(c);
            }
        }
        Fan::new(n, rays, cones)
    }

    /// Applies an integer matrix to every ray; used for unimodular changes
    /// of coordinates.
    pub fn transform(&self, u: &IntMat) -> Result<Fan> {
        let rays = self
            .rays
            .iter()
            .map(|r| u.mul_vec(r))
            .collect::<Result<Vec<_>>>()?;
        Fan::new(u.nrows(), rays, self.max_cones.clone())
    }
}

/// `-v` for a primitive vector, as rationals; small helper for callers that
/// reason with functionals.
pub fn rat_point(v: &[Int]) -> Vec<Rat> {
    v.iter().map(rat_int).collect()
}
