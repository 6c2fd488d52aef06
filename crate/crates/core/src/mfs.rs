//! Toric Mori fiber spaces: the positive relation among fiber rays, the
//! extremal log discrepancies it determines, and the factorization through
//! a star subdivision followed by a quotient.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::arith::{kernel_basis, primitive, rat_int, vec_neg, Int, IntMat, IntVec, Rat};
use crate::divisor::{is_ample_over, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::fibration::{generic_fiber_fan, validate_morphism, ToricMorphism};
use crate::singularity::log_discrepancy;

/// Positive primitive integer relation `Σ q_i v_i = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QVector {
    #[serde(serialize_with = "crate::arith::ser_ints")]
    pub q: Vec<Int>,
}

pub fn q_vector(fan: &Fan) -> Result<QVector> {
    let n = fan.rank();
    if fan.rays().len() != n + 1 {
        return Err(Error::WrongRayCount {
            expected: n + 1,
            found: fan.rays().len(),
        });
    }
    if !fan.is_complete()? {
        return Err(Error::NotComplete);
    }
    let columns = IntMat::from_columns(fan.rays(), n)?;
    let kernel = kernel_basis(&columns);
    if kernel.len() != 1 {
        return Err(Error::NoPositiveRelation);
    }
    let mut q = primitive(&kernel[0])?;
    if q[0].is_negative() {
        q = vec_neg(&q);
    }
    if !q.iter().all(Signed::is_positive) {
        return Err(Error::NoPositiveRelation);
    }
    let check = columns.mul_vec(&q)?;
    if !check.iter().all(Zero::is_zero) {
        return Err(Error::ConstructionInvariantFailure("relation does not vanish".into()));
    }
    Ok(QVector { q })
}

/// `a_i = (Σ_{j≠i} q_j) / q_i`.
pub fn extremal_log_discrepancies(fan: &Fan) -> Result<Vec<Rat>> {
    let q = q_vector(fan)?.q;
    let total: Int = q.iter().sum();
    Ok(q.iter().map(|qi| Rat::new(&total - qi, qi.clone())).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationResult {
    pub w: Fan,
    pub y: Fan,
    /// Index of the extracted ray in `w`.
    pub e_ray_index: usize,
    pub e_ray: IntVec,
    pub a_e: Rat,
    /// Index of the distinguished fiber ray in the generic fiber fan.
    pub e: usize,
    pub q: QVector,
    pub pi: ToricMorphism,
    pub g: ToricMorphism,
    pub h: ToricMorphism,
}

fn diagram(msg: impl Into<String>) -> Error {
    Error::DiagramCheck(msg.into())
}

pub fn factor_mfs(f: &ToricMorphism) -> Result<FactorizationResult> {
    let x = f.source();
    let r = f.relative_dimension();
    if r <= 1 {
        return Err(Error::RelativeDimensionTooSmall(r));
    }
    let diag = validate_morphism(f)?;
    if !diag.proper_contraction() {
        return Err(Error::NotProperContraction(format!("{diag:?}")));
    }
    if !x.is_simplicial() {
        return Err(Error::NotMfsShape("source fan is not simplicial".into()));
    }
    let fiber = generic_fiber_fan(f)?;
    let q = q_vector(&fiber.fan).map_err(|e| Error::NotMfsShape(format!("generic fiber: {e}")))?;
    if !is_ample_over(f, &ToricDivisor::boundary(x))? {
        return Err(Error::NotRelativelyAmple);
    }

    // First index among the maximal relation coefficients.
    let e = (0..q.q.len())
        .rev()
        .max_by(|&a, &b| q.q[a].cmp(&q.q[b]))
        .expect("nonempty relation");
    let v_e = x.ray(fiber.source_rays[e]).clone();
    let e_ray = vec_neg(&v_e);

    let w = x.star_subdivision(&e_ray)?;
    let e_ray_index = w.ray_index(&e_ray).expect("subdivision adds the ray");
    let (coords, y) = w.quotient_fan(e_ray_index)?;
    let h_matrix = f.matrix().mul(&coords.section)?;
    if h_matrix.mul(&coords.projection)? != *f.matrix() {
        return Err(diagram("f does not factor through the quotient"));
    }

    let pi = ToricMorphism::new(IntMat::identity(x.rank()), w.clone(), x.clone())?;
    let g = ToricMorphism::new(coords.projection.clone(), w.clone(), y.clone())?;
    let h = ToricMorphism::new(h_matrix, y.clone(), f.target().clone())?;
    for (name, m) in [("pi", &pi), ("g", &g), ("h", &h)] {
        if !validate_morphism(m)?.proper_contraction() {
            return Err(diagram(format!("{name} is not a proper contraction")));
        }
    }
    if h.matrix().mul(g.matrix())? != f.matrix().mul(pi.matrix())? {
        return Err(diagram("h ∘ g differs from f ∘ pi"));
    }
    if !(y.rank() + 1 == x.rank() && y.rank() > f.target().rank()) {
        return Err(diagram("unexpected rank of the intermediate base"));
    }
    let total: Int = q.q.iter().sum();
    let a_e = Rat::new(&total - &q.q[e], q.q[e].clone());
    if a_e > rat_int(&Int::from(r)) {
        return Err(diagram(format!("a_E = {a_e} exceeds {r}")));
    }
    let direct = log_discrepancy(x, &ToricDivisor::zero(x), &e_ray)?;
    if direct != a_e {
        return Err(diagram(format!("a_E = {a_e} but A(E) = {direct}")));
    }
    Ok(FactorizationResult {
        w,
        y,
        e_ray_index,
        e_ray,
        a_e,
        e,
        q,
        pi,
        g,
        h,
    })
}
