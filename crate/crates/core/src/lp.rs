//! Exact rational linear programming.
//!
//! The kernel is a dense two-phase tableau simplex with Bland's rule. Every
//! optimal answer carries a dual certificate that is checked before it is
//! returned.

use num_traits::{One, Signed, Zero};

use crate::arith::{dot_rat, rat_int, solve_rat, IntMat, IntVec, Rat, RatVec};
use crate::error::{Error, Result};

/// `min c.x  s.t.  A x = b, x >= 0`.
#[derive(Clone, Debug)]
pub struct StandardLp {
    pub a: Vec<RatVec>,
    pub b: RatVec,
    pub c: RatVec,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StandardOutcome {
    Optimal { x: RatVec, value: Rat, dual: RatVec },
    Infeasible,
    /// `direction >= 0`, `A direction = 0`, `c.direction < 0`.
    Unbounded { direction: RatVec },
}

struct Tableau {
    rows: Vec<RatVec>,
    rhs: RatVec,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let inv = self.rows[r][col].recip();
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        self.rhs[r] *= &inv;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let k = self.rows[i][col].clone();
            let src = self.rows[r].clone();
            for (x, y) in self.rows[i].iter_mut().zip(&src) {
                *x -= &k * y;
            }
            let rr = self.rhs[r].clone();
            self.rhs[i] -= &k * rr;
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations on `cost` over the columns `< ncols`.
    /// Returns the entering column on unboundedness.
    fn run(&mut self, cost: &[Rat], ncols: usize) -> Option<usize> {
        loop {
            let entering = (0..ncols).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = self
                    .basis
                    .iter()
                    .enumerate()
                    .fold(cost[j].clone(), |acc, (i, &bi)| acc - &cost[bi] * &self.rows[i][j]);
                reduced.is_negative()
            });
            let j = entering?;
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.rows[i][j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Some(j),
                Some((r, _)) => self.pivot(r, j),
            }
        }
    }
}

pub fn solve_standard(lp: &StandardLp) -> Result<StandardOutcome> {
    let m = lp.a.len();
    let n = lp.c.len();
    if lp.b.len() != m || lp.a.iter().any(|r| r.len() != n) {
        return Err(Error::MalformedProgram(format!(
            "{} constraint rows, {} right-hand sides, {} variables",
            m,
            lp.b.len(),
            n
        )));
    }
    // Phase one: artificial variables n..n+m with b made nonnegative.
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let flip = lp.b[i].is_negative();
        let mut row: RatVec = lp.a[i]
            .iter()
            .map(|x| if flip { -x.clone() } else { x.clone() })
            .collect();
        row.extend((0..m).map(|k| if k == i { Rat::one() } else { Rat::zero() }));
        rows.push(row);
        rhs.push(if flip { -lp.b[i].clone() } else { lp.b[i].clone() });
    }
    let mut tab = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
    };
    let phase1: RatVec = (0..n + m)
        .map(|j| if j >= n { Rat::one() } else { Rat::zero() })
        .collect();
    tab.run(&phase1, n + m);
    let infeasibility: Rat = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(&b, _)| b >= n)
        .map(|(_, v)| v.clone())
        .sum();
    if infeasibility.is_positive() {
        return Ok(StandardOutcome::Infeasible);
    }
    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n {
            match (0..n).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.rows.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut cost = lp.c.clone();
    cost.extend((0..m).map(|_| Rat::zero()));
    if let Some(j) = tab.run(&cost, n) {
        let mut direction = vec![Rat::zero(); n];
        direction[j] = Rat::one();
        for (r, &b) in tab.basis.iter().enumerate() {
            direction[b] = -tab.rows[r][j].clone();
        }
        return Ok(StandardOutcome::Unbounded { direction });
    }
    let mut x = vec![Rat::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        x[b] = tab.rhs[r].clone();
    }
    let value: Rat = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
    let dual = dual_certificate(lp, &tab.basis, &value)?;
    Ok(StandardOutcome::Optimal { x, value, dual })
}

/// Solves `B^T y = c_B` and checks `A^T y <= c`, `b.y = value`.
fn dual_certificate(lp: &StandardLp, basis: &[usize], value: &Rat) -> Result<RatVec> {
    let m = lp.a.len();
    let sys: Vec<RatVec> = basis
        .iter()
        .map(|&j| (0..m).map(|i| lp.a[i][j].clone()).collect())
        .collect();
    let cb: RatVec = basis.iter().map(|&j| lp.c[j].clone()).collect();
    let y = solve_rat(&sys, &cb, m)
        .ok_or_else(|| Error::MalformedProgram("basis system has no dual solution".into()))?;
    let feasible = (0..lp.c.len()).all(|j| {
        let col: Rat = (0..m).map(|i| &lp.a[i][j] * &y[i]).sum();
        col <= lp.c[j]
    });
    let obj: Rat = y.iter().zip(&lp.b).map(|(a, b)| a * b).sum();
    if !feasible || obj != *value {
        return Err(Error::MalformedProgram("dual certificate check failed".into()));
    }
    Ok(y)
}

/// Finds a point of `{ m : E m = e, G m >= g }` with free variables.
pub fn feasible_point(
    dim: usize,
    equalities: &[(RatVec, Rat)],
    inequalities: &[(RatVec, Rat)],
) -> Result<Option<RatVec>> {
    // m = p - q with p, q >= 0; one surplus variable per inequality.
    let k = inequalities.len();
    let nvars = 2 * dim + k;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let split = |coeffs: &RatVec| -> RatVec {
        let mut row: RatVec = coeffs.clone();
        row.extend(coeffs.iter().map(|x| -x.clone()));
        row
    };
    for (coeffs, rhs) in equalities {
        let mut row = split(coeffs);
        row.extend((0..k).map(|_| Rat::zero()));
        a.push(row);
        b.push(rhs.clone());
    }
    for (idx, (coeffs, rhs)) in inequalities.iter().enumerate() {
        let mut row = split(coeffs);
        row.extend((0..k).map(|s| if s == idx { -Rat::one() } else { Rat::zero() }));
        a.push(row);
        b.push(rhs.clone());
    }
    let lp = StandardLp {
        a,
        b,
        c: vec![Rat::zero(); nvars],
    };
    match solve_standard(&lp)? {
        StandardOutcome::Optimal { x, .. } => {
            Ok(Some((0..dim).map(|i| &x[i] - &x[dim + i]).collect()))
        }
        StandardOutcome::Infeasible => Ok(None),
        StandardOutcome::Unbounded { .. } => unreachable!("zero objective is bounded"),
    }
}

/// `min <c, x>` over `x = G lambda, lambda >= 0, A x = b`.
#[derive(Clone, Debug)]
pub struct ConeLp {
    pub generators: Vec<IntVec>,
    pub equalities: IntMat,
    pub rhs: RatVec,
    pub objective: RatVec,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpStatus {
    Optimal {
        value: Rat,
        point: RatVec,
        multipliers: RatVec,
        dual: RatVec,
    },
    Infeasible,
    /// Recession direction of the feasible set along which the objective
    /// decreases.
    Unbounded { direction: RatVec },
}

impl ConeLp {
    fn check(&self) -> Result<usize> {
        let n = self.objective.len();
        if let Some(g) = self.generators.iter().find(|g| g.len() != n) {
            return Err(Error::MalformedProgram(format!(
                "generator of length {} in ambient dimension {n}",
                g.len()
            )));
        }
        if self.generators.iter().any(|g| g.iter().all(Zero::is_zero)) {
            return Err(Error::MalformedProgram("zero generator".into()));
        }
        if self.equalities.ncols() != n && self.equalities.nrows() > 0 {
            return Err(Error::MalformedProgram(format!(
                "equality matrix has {} columns, ambient dimension {n}",
                self.equalities.ncols()
            )));
        }
        if self.equalities.nrows() != self.rhs.len() {
            return Err(Error::MalformedProgram(format!(
                "{} equalities but {} right-hand sides",
                self.equalities.nrows(),
                self.rhs.len()
            )));
        }
        Ok(n)
    }

    fn embed(&self, lambda: &[Rat]) -> RatVec {
        let n = self.objective.len();
        (0..n)
            .map(|i| {
                self.generators
                    .iter()
                    .zip(lambda)
                    .map(|(g, l)| rat_int(&g[i]) * l)
                    .sum()
            })
            .collect()
    }
}

pub fn solve_min(p: &ConeLp) -> Result<LpStatus> {
    p.check()?;
    let a: Vec<RatVec> = (0..p.equalities.nrows())
        .map(|i| {
            let row = p.equalities.row(i);
            p.generators.iter().map(|g| rat_int(&crate::arith::dot(row, g))).collect()
        })
        .collect();
    let c: RatVec = p.generators.iter().map(|g| dot_rat(&p.objective, g)).collect();
    let lp = StandardLp {
        a,
        b: p.rhs.clone(),
        c,
    };
    Ok(match solve_standard(&lp)? {
        StandardOutcome::Optimal { x, value, dual } => LpStatus::Optimal {
            point: p.embed(&x),
            value,
            multipliers: x,
            dual,
        },
        StandardOutcome::Infeasible => LpStatus::Infeasible,
        StandardOutcome::Unbounded { direction } => LpStatus::Unbounded {
            direction: p.embed(&direction),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ivec, rat};

    /// Optimal value by enumerating basic feasible solutions; `None` means
    /// infeasible, `Some(None)` unbounded.
    fn brute_force(lp: &StandardLp) -> Option<Option<Rat>> {
        let m = lp.a.len();
        let n = lp.c.len();
        let mut best: Option<Rat> = None;
        let mut any = false;
        for mask in 0u32..(1 << n) {
            let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            let sys: Vec<RatVec> = (0..m)
                .map(|i| cols.iter().map(|&j| lp.a[i][j].clone()).collect())
                .collect();
            if crate::arith::rat_rank(&sys, cols.len()) != cols.len() {
                continue;
            }
            let Some(sol) = solve_rat(&sys, &lp.b, cols.len()) else { continue };
            if sol.iter().any(|x| x.is_negative()) {
                continue;
            }
            any = true;
            let v: Rat = cols.iter().zip(&sol).map(|(&j, x)| &lp.c[j] * x).sum();
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        if !any {
            return None;
        }
        // Extreme rays of {d >= 0, A d = 0, sum d = 1}.
        let mut aug = lp.a.clone();
        aug.push(vec![Rat::one(); n]);
        let mut rhs = vec![Rat::zero(); m];
        rhs.push(Rat::one());
        for mask in 1u32..(1 << n) {
            let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            let sys: Vec<RatVec> = aug
                .iter()
                .map(|r| cols.iter().map(|&j| r[j].clone()).collect())
                .collect();
            if crate::arith::rat_rank(&sys, cols.len()) != cols.len() {
                continue;
            }
            let Some(d) = solve_rat(&sys, &rhs, cols.len()) else { continue };
            if d.iter().any(|x| x.is_negative()) {
                continue;
            }
            let v: Rat = cols.iter().zip(&d).map(|(&j, x)| &lp.c[j] * x).sum();
            if v.is_negative() {
                return Some(None);
            }
        }
        Some(best)
    }

    #[test]
    fn minimize_over_half_line() {
        let p = ConeLp {
            generators: vec![ivec(&[1])],
            equalities: IntMat::zeros(0, 1),
            rhs: vec![],
            objective: vec![rat(1, 1)],
        };
        match solve_min(&p).unwrap() {
            LpStatus::Optimal { value, point, .. } => {
                assert_eq!(value, rat(0, 1));
                assert_eq!(point, vec![rat(0, 1)]);
            }
            other => panic!("{other:?}"),
        }
        let q = ConeLp {
            objective: vec![rat(-1, 1)],
            ..p
        };
        assert!(matches!(solve_min(&q).unwrap(), LpStatus::Unbounded { .. }));
    }

    #[test]
    fn minimizing_ray_is_the_steep_generator() {
        let p = ConeLp {
            generators: vec![ivec(&[1, 0]), ivec(&[-2, 5])],
            equalities: IntMat::from_i64(&[&[0, 1]]),
            rhs: vec![rat(1, 1)],
            objective: vec![rat(1, 1), rat(3, 5)],
        };
        match solve_min(&p).unwrap() {
            LpStatus::Optimal { value, point, .. } => {
                assert_eq!(value, rat(1, 5));
                assert_eq!(point, vec![rat(-2, 5), rat(1, 1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_malformed() {
        let p = ConeLp {
            generators: vec![ivec(&[1, 0])],
            equalities: IntMat::from_i64(&[&[0, 1]]),
            rhs: vec![rat(1, 1)],
            objective: vec![rat(1, 1), rat(0, 1)],
        };
        assert_eq!(solve_min(&p).unwrap(), LpStatus::Infeasible);
        let bad = ConeLp {
            rhs: vec![],
            ..p
        };
        assert!(matches!(solve_min(&bad), Err(Error::MalformedProgram(_))));
    }

    #[test]
    fn unbounded_direction_is_a_recession_direction() {
        let p = ConeLp {
            generators: vec![ivec(&[1, 1]), ivec(&[-1, 1]), ivec(&[1, 0])],
            equalities: IntMat::from_i64(&[&[0, 1]]),
            rhs: vec![rat(1, 1)],
            objective: vec![rat(-1, 1), rat(0, 1)],
        };
        match solve_min(&p).unwrap() {
            LpStatus::Unbounded { direction } => {
                assert!(direction[1].is_zero());
                assert!(direction[0].is_positive());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = StandardLp {
            a: vec![
                vec![rat(1, 1), rat(1, 1), rat(0, 1)],
                vec![rat(2, 1), rat(2, 1), rat(0, 1)],
                vec![rat(0, 1), rat(1, 1), rat(1, 1)],
            ],
            b: vec![rat(1, 1), rat(2, 1), rat(1, 1)],
            c: vec![rat(1, 1), rat(2, 1), rat(-1, 1)],
        };
        match solve_standard(&lp).unwrap() {
            StandardOutcome::Optimal { value, .. } => assert_eq!(value, rat(0, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_variable_feasibility() {
        // m1 >= 1, -m1 >= 1 is empty; m1 + m2 = 0, m1 >= 1 is not.
        let ineq = vec![
            (vec![rat(1, 1), rat(0, 1)], rat(1, 1)),
            (vec![rat(-1, 1), rat(0, 1)], rat(1, 1)),
        ];
        assert!(feasible_point(2, &[], &ineq).unwrap().is_none());
        let eq = vec![(vec![rat(1, 1), rat(1, 1)], rat(0, 1))];
        let p = feasible_point(2, &eq, &ineq[..1]).unwrap().unwrap();
        assert!(&p[0] + &p[1] == rat(0, 1) && p[0] >= rat(1, 1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn program() -> impl Strategy<Value = StandardLp> {
            (0usize..3, 1usize..7).prop_flat_map(|(m, n)| {
                (
                    proptest::collection::vec(-3i64..4, m * n),
                    proptest::collection::vec(-3i64..4, m),
                    proptest::collection::vec(-3i64..4, n),
                )
                    .prop_map(move |(a, b, c)| StandardLp {
                        a: a.chunks(n.max(1))
                            .take(m)
                            .map(|r| r.iter().map(|&x| rat(x, 1)).collect())
                            .collect(),
                        b: b.iter().map(|&x| rat(x, 1)).collect(),
                        c: c.iter().map(|&x| rat(x, 1)).collect(),
                    })
            })
        }

        proptest! {
            #[test]
            fn agrees_with_vertex_enumeration(lp in program()) {
                let got = solve_standard(&lp).unwrap();
                let want = brute_force(&lp);
                match (got, want) {
                    (StandardOutcome::Infeasible, None) => {}
                    (StandardOutcome::Unbounded { direction }, Some(None)) => {
                        prop_assert!(direction.iter().all(|d| !d.is_negative()));
                        let cd: Rat = direction.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
                        prop_assert!(cd.is_negative());
                    }
                    (StandardOutcome::Optimal { value, x, .. }, Some(Some(v))) => {
                        prop_assert_eq!(value, v);
                        prop_assert!(x.iter().all(|d| !d.is_negative()));
                    }
                    (g, w) => prop_assert!(false, "simplex {:?} vs brute force {:?}", g, w),
                }
            }

            #[test]
            fn scaling_rhs_scales_value(lp in program(), s in 1i64..5) {
                if let StandardOutcome::Optimal { value, .. } = solve_standard(&lp).unwrap() {
                    let scaled = StandardLp {
                        b: lp.b.iter().map(|x| x * rat(s, 1)).collect(),
                        ..lp.clone()
                    };
                    match solve_standard(&scaled).unwrap() {
                        StandardOutcome::Optimal { value: v2, .. } => prop_assert_eq!(v2, value * rat(s, 1)),
                        other => prop_assert!(false, "{:?}", other),
                    }
                }
            }
        }
    }
}
