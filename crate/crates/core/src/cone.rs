//! Polyhedral cones given by finite generator lists: membership, faces,
//! separation, triangulation and fundamental-parallelepiped enumeration.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{
    dot_rat, hermite_normal_form, int_rank, int_rows_to_rat, integer_coordinates, kernel_basis,
    rat_int, solve_rat, to_rat_vec, Int, IntMat, IntVec, Rat, RatVec,
};
use crate::error::Result;
use crate::lp::{feasible_point, solve_standard, StandardLp, StandardOutcome};

pub fn rank(gens: &[IntVec], dim: usize) -> usize {
    int_rank(gens, dim)
}

pub fn is_independent(gens: &[IntVec], dim: usize) -> bool {
    rank(gens, dim) == gens.len()
}

fn columns_system(gens: &[IntVec], dim: usize) -> Vec<RatVec> {
    (0..dim)
        .map(|i| gens.iter().map(|g| rat_int(&g[i])).collect())
        .collect()
}

/// Nonnegative coefficients expressing `v` over `gens`, if `v` lies in the cone.
pub fn contains(gens: &[IntVec], v: &[Int]) -> Result<Option<RatVec>> {
    let dim = v.len();
    if gens.is_empty() {
        return Ok(v.iter().all(Zero::is_zero).then(Vec::new));
    }
    let a = columns_system(gens, dim);
    if is_independent(gens, dim) {
        return Ok(solve_rat(&a, &to_rat_vec(v), gens.len())
            .filter(|x| x.iter().all(|c| !c.is_negative())));
    }
    let lp = StandardLp {
        a,
        b: to_rat_vec(v),
        c: vec![Rat::zero(); gens.len()],
    };
    Ok(match solve_standard(&lp)? {
        StandardOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    })
}

/// True when no nontrivial nonnegative combination of `gens` vanishes.
pub fn is_pointed(gens: &[IntVec], dim: usize) -> Result<bool> {
    if gens.is_empty() || is_independent(gens, dim) {
        return Ok(true);
    }
    let mut a = columns_system(gens, dim);
    a.push(vec![Rat::one(); gens.len()]);
    let mut b = vec![Rat::zero(); dim];
    b.push(Rat::one());
    let lp = StandardLp {
        a,
        b,
        c: vec![Rat::zero(); gens.len()],
    };
    Ok(matches!(solve_standard(&lp)?, StandardOutcome::Infeasible))
}

/// Local indices of the generators spanning the smallest face containing `v`.
/// `v` must lie in the cone.
pub fn minimal_face(gens: &[IntVec], v: &[Int]) -> Result<Vec<usize>> {
    let dim = v.len();
    if v.iter().all(Zero::is_zero) {
        return Ok(Vec::new());
    }
    if is_independent(gens, dim) {
        let coeffs = contains(gens, v)?.unwrap_or_default();
        return Ok((0..coeffs.len()).filter(|&i| coeffs[i].is_positive()).collect());
    }
    // g_i is in the face iff some representation of v uses it; lambda_i is
    // bounded by the pointed cone, so maximize it.
    let mut out = Vec::new();
    for i in 0..gens.len() {
        let c: RatVec = (0..gens.len())
            .map(|j| if j == i { -Rat::one() } else { Rat::zero() })
            .collect();
        let lp = StandardLp {
            a: columns_system(gens, dim),
            b: to_rat_vec(v),
            c,
        };
        match solve_standard(&lp)? {
            StandardOutcome::Optimal { value, .. } if value.is_negative() => out.push(i),
            StandardOutcome::Unbounded { .. } => out.push(i),
            _ => {}
        }
    }
    Ok(out)
}

/// Whether `subset` is exactly the generator set of a face.
pub fn is_face(gens: &[IntVec], dim: usize, subset: &[usize]) -> Result<bool> {
    let eq: Vec<(RatVec, Rat)> = subset
        .iter()
        .map(|&i| (to_rat_vec(&gens[i]), Rat::zero()))
        .collect();
    let ineq: Vec<(RatVec, Rat)> = (0..gens.len())
        .filter(|i| !subset.contains(i))
        .map(|i| (to_rat_vec(&gens[i]), Rat::one()))
        .collect();
    Ok(feasible_point(dim, &eq, &ineq)?.is_some())
}

/// All faces as sorted local index sets, including the empty face.
pub fn faces(gens: &[IntVec], dim: usize) -> Result<Vec<Vec<usize>>> {
    let k = gens.len();
    let subsets = (0u64..(1 << k)).map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>());
    if is_independent(gens, dim) {
        return Ok(subsets.collect());
    }
    let mut out = Vec::new();
    for s in subsets {
        if is_face(gens, dim, &s)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// Faces of dimension `dim(cone) - 1`.
pub fn facets(gens: &[IntVec], dim: usize) -> Result<Vec<Vec<usize>>> {
    let d = rank(gens, dim);
    if d == 0 {
        return Ok(Vec::new());
    }
    let sel = |s: &[usize]| -> Vec<IntVec> { s.iter().map(|&i| gens[i].clone()).collect() };
    Ok(faces(gens, dim)?
        .into_iter()
        .filter(|s| rank(&sel(s), dim) + 1 == d)
        .collect())
}

/// Whether `sigma` and `tau` meet in a common face of both, decided through
/// a separating functional that is `>= 0` on `sigma`, `<= 0` on `tau` and
/// vanishes exactly on the generators lying in the other cone.
pub fn meet_in_common_face(sigma: &[IntVec], tau: &[IntVec], dim: usize) -> Result<bool> {
    let mut in_tau = Vec::new();
    for g in sigma {
        in_tau.push(contains(tau, g)?.is_some());
    }
    let mut in_sigma = Vec::new();
    for h in tau {
        in_sigma.push(contains(sigma, h)?.is_some());
    }
    let mut eq = Vec::new();
    let mut ineq = Vec::new();
    for (g, &inside) in sigma.iter().zip(&in_tau) {
        if inside {
            eq.push((to_rat_vec(g), Rat::zero()));
        } else {
            ineq.push((to_rat_vec(g), Rat::one()));
        }
    }
    for (h, &inside) in tau.iter().zip(&in_sigma) {
        let neg: RatVec = h.iter().map(|x| -rat_int(x)).collect();
        if inside {
            eq.push((neg, Rat::zero()));
        } else {
            ineq.push((neg, Rat::one()));
        }
    }
    Ok(feasible_point(dim, &eq, &ineq)?.is_some())
}

fn lex_min(gens: &[IntVec], idx: &[usize]) -> usize {
    *idx.iter().min_by(|&&a, &&b| gens[a].cmp(&gens[b])).expect("nonempty")
}

/// Pulling triangulation from the lexicographically smallest generator.
/// Returns local index sets of simplicial cones covering the cone.
pub fn triangulate(gens: &[IntVec], dim: usize) -> Result<Vec<Vec<usize>>> {
    let all: Vec<usize> = (0..gens.len()).collect();
    triangulate_subset(gens, dim, &all)
}

fn triangulate_subset(gens: &[IntVec], dim: usize, idx: &[usize]) -> Result<Vec<Vec<usize>>> {
    let sub: Vec<IntVec> = idx.iter().map(|&i| gens[i].clone()).collect();
    if is_independent(&sub, dim) {
        return Ok(vec![idx.to_vec()]);
    }
    let apex_local = lex_min(&sub, &(0..sub.len()).collect::<Vec<_>>());
    let mut out = Vec::new();
    for facet in facets(&sub, dim)? {
        if facet.contains(&apex_local) {
            continue;
        }
        let facet_global: Vec<usize> = facet.iter().map(|&i| idx[i]).collect();
        for mut simplex in triangulate_subset(gens, dim, &facet_global)? {
            simplex.push(idx[apex_local]);
            simplex.sort_unstable();
            out.push(simplex);
        }
    }
    Ok(out)
}

/// A nonzero-or-zero lattice point of the half-open parallelepiped
/// `{ sum t_i g_i : 0 <= t_i < 1 }` of linearly independent generators.
#[derive(Clone, Debug)]
pub struct BoxPoint {
    pub point: IntVec,
    /// Numerators of `t_i` over the common denominator `denominator`.
    pub numerators: Vec<Int>,
    pub denominator: Int,
}

impl BoxPoint {
    pub fn is_origin(&self) -> bool {
        self.numerators.iter().all(Zero::is_zero)
    }
}

/// All lattice points of the fundamental parallelepiped of `gens`, one per
/// coset of the sublattice they generate inside `N ∩ span(gens)`.
pub fn box_points(gens: &[IntVec], dim: usize) -> Result<Vec<BoxPoint>> {
    let k = gens.len();
    if k == 0 {
        return Ok(vec![BoxPoint {
            point: vec![Int::zero(); dim],
            numerators: vec![],
            denominator: Int::one(),
        }]);
    }
    // Saturated lattice N ∩ span(gens), then generator coordinates in it.
    let gmat = IntMat::from_rows(gens, dim)?;
    let ortho = kernel_basis(&gmat);
    let span_basis = kernel_basis(&IntMat::from_rows(&ortho, dim)?);
    let coords: Vec<IntVec> = gens
        .iter()
        .map(|g| integer_coordinates(&span_basis, g).expect("generator lies in its span"))
        .collect();
    let cmat = IntMat::from_rows(&coords, k)?;
    let (h, _) = hermite_normal_form(&cmat);
    let radices: Vec<Int> = (0..k).map(|i| h.get(i, i).clone()).collect();
    let inv = crate::arith::rat_inverse(&int_rows_to_rat(&coords)).expect("independent");
    let det = cmat.det()?.abs();
    let det_rat = rat_int(&det);
    // adj-like integer matrix: det * C^{-1}
    let scaled: Vec<IntVec> = inv
        .iter()
        .map(|row| row.iter().map(|x| (x * &det_rat).to_integer()).collect())
        .collect();

    let mut out = Vec::new();
    let mut y = vec![Int::zero(); k];
    loop {
        // t = y C^{-1}; numerators s_i = (y * det C^{-1})_i mod det
        let numerators: Vec<Int> = (0..k)
            .map(|i| {
                let s: Int = (0..k).map(|j| &y[j] * &scaled[j][i]).sum();
                s.mod_floor(&det)
            })
            .collect();
        let point: IntVec = (0..dim)
            .map(|c| {
                let s: Int = (0..k).map(|i| &numerators[i] * &gens[i][c]).sum();
                s / &det
            })
            .collect();
        out.push(BoxPoint {
            point,
            numerators,
            denominator: det.clone(),
        });
        // Mixed-radix increment over 0 <= y_i < h_ii.
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(out);
            }
            y[pos] += 1;
            if y[pos] < radices[pos] {
                break;
            }
            y[pos] = Int::zero();
            pos += 1;
        }
    }
}

/// Value of a linear functional on an integer vector.
pub fn eval(functional: &[Rat], v: &[Int]) -> Rat {
    dot_rat(functional, v)
}

pub fn dedup_sets(sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut seen = BTreeSet::new();
    sets.into_iter().filter(|s| seen.insert(s.clone())).collect()
}
