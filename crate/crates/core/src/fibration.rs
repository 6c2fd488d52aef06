//! Toric morphisms, their fibers and the toric canonical bundle formula.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{
    integer_coordinates, kernel_basis, primitive, rat_int, smith_invariants, to_rat_vec, vec_add,
    Int, IntMat, IntVec, Rat,
};
use crate::cone;
use crate::divisor::{log_discrepancy_function, rel_trivial_witness, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::lp::{solve_min, ConeLp, LpStatus};
use crate::singularity::{relint_min, triangulation_faces, MldValue, Minimum};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricMorphism {
    matrix: IntMat,
    source: Fan,
    target: Fan,
}

impl ToricMorphism {
    /// Checks dimensions and that every source cone maps into a target cone.
    pub fn new(matrix: IntMat, source: Fan, target: Fan) -> Result<ToricMorphism> {
        let f = ToricMorphism::new_unchecked(matrix, source, target)?;
        for c in 0..f.source.max_cones().len() {
            if f.image_cone(c)?.is_none() {
                return Err(Error::IncompatibleMorphism { cone: c });
            }
        }
        Ok(f)
    }

    /// Checks dimensions only.
    pub fn new_unchecked(matrix: IntMat, source: Fan, target: Fan) -> Result<ToricMorphism> {
        if matrix.ncols() != source.rank() {
            return Err(Error::DimensionMismatch {
                expected: source.rank(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() != target.rank() {
            return Err(Error::DimensionMismatch {
                expected: target.rank(),
                found: matrix.nrows(),
            });
        }
        Ok(ToricMorphism {
            matrix,
            source,
            target,
        })
    }

    pub fn identity(fan: &Fan) -> ToricMorphism {
        ToricMorphism {
            matrix: IntMat::identity(fan.rank()),
            source: fan.clone(),
            target: fan.clone(),
        }
    }

    pub fn matrix(&self) -> &IntMat {
        &self.matrix
    }

    pub fn source(&self) -> &Fan {
        &self.source
    }

    pub fn target(&self) -> &Fan {
        &self.target
    }

    pub fn relative_dimension(&self) -> usize {
        self.source.rank().saturating_sub(self.target.rank())
    }

    pub fn apply(&self, v: &[Int]) -> Result<IntVec> {
        self.matrix.mul_vec(v)
    }

    fn images(&self, idx: &[usize]) -> Result<Vec<IntVec>> {
        idx.iter().map(|&i| self.apply(self.source.ray(i))).collect()
    }

    /// A maximal target cone containing the image of source cone `c`.
    pub fn image_cone(&self, c: usize) -> Result<Option<usize>> {
        self.image_cone_of(&self.source.max_cones()[c])
    }

    /// A maximal target cone containing the image of the rays `idx`.
    pub fn image_cone_of(&self, idx: &[usize]) -> Result<Option<usize>> {
        let imgs = self.images(idx)?;
        'tau: for (t, tau) in self.target.max_cones().iter().enumerate() {
            let tg = self.target.generators(tau);
            for w in &imgs {
                if cone::contains(&tg, w)?.is_none() {
                    continue 'tau;
                }
            }
            return Ok(Some(t));
        }
        Ok(None)
    }

    /// Whether the rays `idx` all map into the target cone `tau`.
    pub fn maps_into(&self, idx: &[usize], tau: &[usize]) -> Result<bool> {
        let tg = self.target.generators(tau);
        for w in self.images(idx)? {
            if cone::contains(&tg, &w)?.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Real surjectivity of the lattice map.
    pub fn is_dominant(&self) -> bool {
        crate::arith::int_rank(&self.matrix.to_rows(), self.matrix.ncols()) == self.target.rank()
    }

    /// Surjectivity of the lattice map `N_X -> N_Z`.
    pub fn is_lattice_surjective(&self) -> bool {
        let inv = smith_invariants(&self.matrix);
        inv.len() == self.target.rank() && inv.iter().all(One::is_one)
    }

    pub fn compose(&self, after: &ToricMorphism) -> Result<ToricMorphism> {
        ToricMorphism::new(
            after.matrix.mul(&self.matrix)?,
            self.source.clone(),
            after.target.clone(),
        )
    }

    /// Whether `phi^{-1}(tau)` is covered by the source cones mapping into
    /// `tau`: the top-dimensional such cones must form a pseudomanifold whose
    /// unshared facets all lie over the boundary of `tau`.
    fn covers_preimage(&self, tau: &[usize], all_cones: &[Vec<usize>]) -> Result<bool> {
        let tg = self.target.generators(tau);
        let tau_dim = cone::rank(&tg, self.target.rank());
        let kernel_dim = self.source.rank() - self.target.rank();
        let top = kernel_dim + tau_dim;
        let mut facet_count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut any = false;
        for idx in all_cones {
            if self.source.cone_dim(idx) != top || !self.maps_into(idx, tau)? {
                continue;
            }
            any = true;
            let gens = self.source.generators(idx);
            for f in cone::facets(&gens, self.source.rank())? {
                let global: Vec<usize> = f.iter().map(|&i| idx[i]).collect();
                *facet_count.entry(global).or_default() += 1;
            }
        }
        if !any {
            return Ok(false);
        }
        for (facet, count) in facet_count {
            if count == 2 {
                continue;
            }
            if count > 2 || tg.is_empty() {
                return Ok(false);
            }
            let sum = self
                .images(&facet)?
                .iter()
                .fold(vec![Int::zero(); self.target.rank()], |s, w| vec_add(&s, w));
            let face: Vec<IntVec> = cone::minimal_face(&tg, &sum)?
                .into_iter()
                .map(|i| tg[i].clone())
                .collect();
            if cone::rank(&face, self.target.rank()) == tau_dim {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorphismDiagnostics {
    pub compatible: bool,
    pub dominant: bool,
    pub is_contraction: bool,
    pub is_proper: bool,
    pub relative_dimension: usize,
}

impl MorphismDiagnostics {
    pub fn proper_contraction(&self) -> bool {
        self.compatible && self.is_contraction && self.is_proper
    }
}

pub fn validate_morphism(f: &ToricMorphism) -> Result<MorphismDiagnostics> {
    let mut compatible = true;
    for c in 0..f.source.max_cones().len() {
        if f.image_cone(c)?.is_none() {
            compatible = false;
        }
    }
    let dominant = f.is_dominant();
    let mut is_proper = compatible && dominant;
    if is_proper {
        let all = f.source.all_cones()?;
        for tau in f.target.max_cones() {
            if !f.covers_preimage(tau, &all)? {
                is_proper = false;
                break;
            }
        }
    }
    Ok(MorphismDiagnostics {
        compatible,
        dominant,
        is_contraction: f.is_lattice_surjective(),
        is_proper,
        relative_dimension: f.relative_dimension(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberFan {
    /// Basis of the saturated kernel lattice, in source coordinates.
    pub basis: Vec<IntVec>,
    /// The fan of source cones lying in the kernel, in kernel coordinates.
    pub fan: Fan,
    /// Source ray index of each fiber ray.
    pub source_rays: Vec<usize>,
}

impl FiberFan {
    /// Embeds a kernel-coordinate vector into the source lattice.
    pub fn embed(&self, coords: &[Int]) -> IntVec {
        let n = self.basis.first().map_or(0, Vec::len);
        let mut out = vec![Int::zero(); n];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (o, x) in out.iter_mut().zip(b) {
                *o += c * x;
            }
        }
        out
    }
}

pub fn generic_fiber_fan(f: &ToricMorphism) -> Result<FiberFan> {
    let basis = kernel_basis(&f.matrix);
    let x = &f.source;
    let in_kernel: Vec<bool> = x
        .rays()
        .iter()
        .map(|r| f.apply(r).map(|w| w.iter().all(Zero::is_zero)))
        .collect::<Result<_>>()?;
    let mut cones: Vec<Vec<usize>> = x
        .all_cones()?
        .into_iter()
        .filter(|c| c.iter().all(|&i| in_kernel[i]))
        .collect();
    let snapshot = cones.clone();
    cones.retain(|c| {
        !snapshot
            .iter()
            .any(|d| d.len() > c.len() && c.iter().all(|i| d.contains(i)))
    });
    let source_rays: Vec<usize> = (0..x.rays().len()).filter(|&i| in_kernel[i]).collect();
    let rays = source_rays
        .iter()
        .map(|&i| {
            integer_coordinates(&basis, x.ray(i)).ok_or_else(|| {
                Error::ConstructionInvariantFailure("kernel ray outside kernel lattice".into())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let local: Vec<Vec<usize>> = cones
        .iter()
        .map(|c| {
            c.iter()
                .map(|i| source_rays.iter().position(|j| j == i).expect("kernel ray"))
                .collect()
        })
        .collect();
    let fan = Fan::new(basis.len(), rays, local)?;
    Ok(FiberFan {
        basis,
        fan,
        source_rays,
    })
}

/// Source rays `v` with `phi(v) = c * w` for a positive integer `c`.
pub fn pullback_multiplicities(f: &ToricMorphism, w: usize) -> Result<Vec<(usize, Int)>> {
    if w >= f.target.rays().len() {
        return Err(Error::NotARay(w));
    }
    let wv = f.target.ray(w);
    let j = wv.iter().position(|x| !x.is_zero()).expect("rays are nonzero");
    let mut out = Vec::new();
    for (i, r) in f.source.rays().iter().enumerate() {
        let img = f.apply(r)?;
        let c = &img[j] / &wv[j];
        if c.is_positive() && img.iter().zip(wv).all(|(a, b)| *a == &c * b) {
            out.push((i, c));
        }
    }
    Ok(out)
}

/// Largest `t` with `(X, B + t f^*D_p)` lc over the generic point of the
/// divisor of the primitive base vector `p`: the minimum of `A` on
/// `phi^{-1}(p) ∩ |Σ_X|`.
pub fn lc_threshold_at(f: &ToricMorphism, b: &ToricDivisor, p: &[Int]) -> Result<Rat> {
    let a = log_discrepancy_function(&f.source, b)?;
    let mut best: Option<Rat> = None;
    for (c, idx) in f.source.max_cones().iter().enumerate() {
        let imgs = f.images(idx)?;
        if cone::contains(&imgs, p)?.is_none() {
            continue;
        }
        let lp = ConeLp {
            generators: f.source.generators(idx),
            equalities: f.matrix.clone(),
            rhs: to_rat_vec(p),
            objective: a.functional(c).clone(),
        };
        match solve_min(&lp)? {
            LpStatus::Optimal { value, .. } => {
                if best.as_ref().is_none_or(|b| value < *b) {
                    best = Some(value);
                }
            }
            LpStatus::Unbounded { .. } => return Err(Error::NotLogCanonicalOverBase),
            LpStatus::Infeasible => {}
        }
    }
    best.ok_or(Error::NoCone)
}

pub fn lc_threshold_over(f: &ToricMorphism, b: &ToricDivisor, w: usize) -> Result<Rat> {
    if w >= f.target.rays().len() {
        return Err(Error::NotARay(w));
    }
    lc_threshold_at(f, b, f.target.ray(w))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscriminantResult {
    pub divisor: ToricDivisor,
    #[serde(serialize_with = "crate::arith::ser_rats")]
    pub thresholds: Vec<Rat>,
    /// The moduli part is taken to be zero for toric data.
    pub moduli_is_zero: bool,
}

pub fn discriminant_divisor(f: &ToricMorphism, b: &ToricDivisor) -> Result<DiscriminantResult> {
    if rel_trivial_witness(f, b)?.is_none() {
        return Err(Error::NotRelTrivial);
    }
    let thresholds = (0..f.target.rays().len())
        .map(|w| lc_threshold_over(f, b, w))
        .collect::<Result<Vec<_>>>()?;
    let divisor = ToricDivisor::new(thresholds.iter().map(|t| Rat::one() - t).collect());
    Ok(DiscriminantResult {
        divisor,
        thresholds,
        moduli_is_zero: true,
    })
}

/// Discriminant on the star subdivision of the base at `p`: the base fan
/// with its divisor, the new ray being last when `p` is not already a ray.
pub fn discriminant_on_subdivision(
    f: &ToricMorphism,
    b: &ToricDivisor,
    p: &[Int],
) -> Result<(Fan, DiscriminantResult)> {
    if rel_trivial_witness(f, b)?.is_none() {
        return Err(Error::NotRelTrivial);
    }
    let z2 = f.target.star_subdivision(p)?;
    let thresholds = z2
        .rays()
        .iter()
        .map(|w| lc_threshold_at(f, b, w))
        .collect::<Result<Vec<_>>>()?;
    let divisor = ToricDivisor::new(thresholds.iter().map(|t| Rat::one() - t).collect());
    Ok((
        z2,
        DiscriminantResult {
            divisor,
            thresholds,
            moduli_is_zero: true,
        },
    ))
}

/// `alpha * B + (1 - alpha) * Δ`.
pub fn average_boundary(b: &ToricDivisor, fan: &Fan, alpha: &Rat) -> Result<ToricDivisor> {
    b.check(fan)?;
    if alpha.is_negative() || *alpha > Rat::one() {
        return Err(Error::DomainError(format!("alpha = {alpha} is outside [0, 1]")));
    }
    Ok(b.affine_combination(&ToricDivisor::boundary(fan), alpha))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelMld {
    pub value: MldValue,
    pub witness: Option<IntVec>,
    pub enumerated: usize,
}

/// Minimum of `A` over the lattice points of `|Σ_X|` mapping into the
/// relative interior of the target cone `tau_z`.
pub fn relative_mld(f: &ToricMorphism, b: &ToricDivisor, tau_z: &[usize]) -> Result<RelMld> {
    let z = &f.target;
    let mut tau: Vec<usize> = tau_z.to_vec();
    tau.sort_unstable();
    if tau.is_empty() || tau.iter().any(|&i| i >= z.rays().len()) || !z.is_cone(&tau)? {
        return Err(Error::NotACone(tau));
    }
    let a = log_discrepancy_function(&f.source, b)?;
    let x = &f.source;
    let n = x.rank();
    let mut acc = Minimum::default();
    for (c, idx) in x.max_cones().iter().enumerate() {
        let gens = x.generators(idx);
        for face in triangulation_faces(&gens, n)? {
            let fg: Vec<IntVec> = face.iter().map(|&i| gens[i].clone()).collect();
            let sum = fg.iter().fold(vec![Int::zero(); n], |s, g| vec_add(&s, g));
            let located = z.locate(&f.apply(&sum)?)?;
            if located.map(|l| l.cone) != Some(tau.clone()) {
                continue;
            }
            relint_min(&fg, a.functional(c), n, &mut acc)?;
        }
    }
    match acc.best {
        None => Err(Error::NoCone),
        Some((value, witness)) => {
            let witness = match &value {
                MldValue::Finite(v) if v.is_zero() => primitive(&witness)?,
                _ => witness,
            };
            Ok(RelMld {
                value,
                witness: Some(witness),
                enumerated: acc.enumerated,
            })
        }
    }
}

/// `ord_v(f^* D_w)` pulled back to source divisor coefficients.
pub fn pullback_divisor(f: &ToricMorphism, w: usize) -> Result<ToricDivisor> {
    let mut coeffs = vec![Rat::zero(); f.source.rays().len()];
    for (i, c) in pullback_multiplicities(f, w)? {
        coeffs[i] = rat_int(&c);
    }
    Ok(ToricDivisor::new(coeffs))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn a1() -> Fan {
        Fan::from_i64(1, &[&[1]], &[&[0]]).unwrap()
    }

    pub fn p1() -> Fan {
        Fan::from_i64(1, &[&[1], &[-1]], &[&[0], &[1]]).unwrap()
    }

    /// The r = 1, q = 2 family member projecting to A¹.
    pub fn family_1_2_map() -> ToricMorphism {
        ToricMorphism::new(
            IntMat::from_i64(&[&[0, 1]]),
            crate::fan::fixtures::family_1_2(),
            a1(),
        )
        .unwrap()
    }

    pub fn family_2_2_map() -> ToricMorphism {
        ToricMorphism::new(
            IntMat::from_i64(&[&[0, 0, 1]]),
            crate::fan::fixtures::family_2_2(),
            a1(),
        )
        .unwrap()
    }

    /// P¹ × A¹ → A¹, rays (1,0), (-1,0), (0,1).
    pub fn p1_a1() -> ToricMorphism {
        ToricMorphism::new(IntMat::from_i64(&[&[0, 1]]), p1().product(&a1()).unwrap(), a1()).unwrap()
    }
}
