//! Torus-invariant divisors and piecewise-linear functions on fans.
//!
//! Discrepancy data is always measured against the toric boundary: the
//! log-discrepancy function of `(X, B)` takes the value `1 - b_i` on the
//! `i`-th ray generator.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{dot_rat, rat_int, solve_rat, to_rat_vec, Int, Rat, RatVec};
use crate::cone;
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::fibration::ToricMorphism;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ToricDivisor {
    #[serde(serialize_with = "crate::arith::ser_rats")]
    coeffs: Vec<Rat>,
}

impl ToricDivisor {
    pub fn new(coeffs: Vec<Rat>) -> ToricDivisor {
        ToricDivisor { coeffs }
    }

    /// Checks the coefficient count against `fan`.
    pub fn for_fan(coeffs: Vec<Rat>, fan: &Fan) -> Result<ToricDivisor> {
        let d = ToricDivisor { coeffs };
        d.check(fan)?;
        Ok(d)
    }

    pub fn zero(fan: &Fan) -> ToricDivisor {
        ToricDivisor {
            coeffs: vec![Rat::zero(); fan.rays().len()],
        }
    }

    /// The toric boundary: every coefficient equal to one.
    pub fn boundary(fan: &Fan) -> ToricDivisor {
        ToricDivisor {
            coeffs: vec![Rat::one(); fan.rays().len()],
        }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Rat {
        &self.coeffs[i]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn check(&self, fan: &Fan) -> Result<()> {
        if self.coeffs.len() != fan.rays().len() {
            return Err(Error::LengthMismatch {
                expected: fan.rays().len(),
                found: self.coeffs.len(),
            });
        }
        Ok(())
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn affine_combination(&self, other: &ToricDivisor, alpha: &Rat) -> ToricDivisor {
        let beta = Rat::one() - alpha;
        ToricDivisor {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| alpha * a + &beta * b)
                .collect(),
        }
    }

    pub fn add(&self, other: &ToricDivisor) -> ToricDivisor {
        ToricDivisor {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, k: &Rat) -> ToricDivisor {
        ToricDivisor {
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
        }
    }

    /// Coefficient-wise `self <= other`.
    pub fn le(&self, other: &ToricDivisor) -> bool {
        self.coeffs.len() == other.coeffs.len()
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a <= b)
    }

    pub fn is_boundary(&self) -> bool {
        self.coeffs.iter().all(One::is_one)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

/// A function that is linear on each maximal cone, stored as one functional
/// per maximal cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlFunction {
    fan: Fan,
    functionals: Vec<RatVec>,
}

impl PlFunction {
    /// The PL function with prescribed values at the ray generators, or
    /// `Err(cone)` naming the first maximal cone where no functional fits.
    pub fn from_ray_values(fan: &Fan, values: &[Rat]) -> std::result::Result<PlFunction, usize> {
        let n = fan.rank();
        let mut functionals = Vec::with_capacity(fan.max_cones().len());
        for (c, idx) in fan.max_cones().iter().enumerate() {
            let rows: Vec<RatVec> = idx.iter().map(|&i| to_rat_vec(fan.ray(i))).collect();
            let rhs: Vec<Rat> = idx.iter().map(|&i| values[i].clone()).collect();
            match solve_rat(&rows, &rhs, n) {
                Some(m) => functionals.push(m),
                None => return Err(c),
            }
        }
        Ok(PlFunction {
            fan: fan.clone(),
            functionals,
        })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn functional(&self, cone: usize) -> &RatVec {
        &self.functionals[cone]
    }

    pub fn functionals(&self) -> &[RatVec] {
        &self.functionals
    }

    /// Index of a maximal cone containing `v`.
    pub fn cone_containing(&self, v: &[Int]) -> Result<Option<usize>> {
        for (c, idx) in self.fan.max_cones().iter().enumerate() {
            if cone::contains(&self.fan.generators(idx), v)?.is_some() {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    pub fn eval(&self, v: &[Int]) -> Result<Rat> {
        if v.len() != self.fan.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.fan.rank(),
                found: v.len(),
            });
        }
        match self.cone_containing(v)? {
            Some(c) => Ok(dot_rat(&self.functionals[c], v)),
            None => Err(Error::OutsideSupport),
        }
    }

    /// Value at a rational point of the support.
    pub fn eval_rat(&self, v: &[Rat]) -> Result<Rat> {
        let den = v
            .iter()
            .fold(Int::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
        let scaled: Vec<Int> = v.iter().map(|x| (x * rat_int(&den)).to_integer()).collect();
        Ok(self.eval(&scaled)? / rat_int(&den))
    }

    /// Values at each ray generator.
    pub fn ray_values(&self) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.fan.rays().len()];
        for (c, idx) in self.fan.max_cones().iter().enumerate() {
            for &i in idx {
                out[i] = dot_rat(&self.functionals[c], self.fan.ray(i));
            }
        }
        out
    }
}

/// The function `A` with `A(v_i) = 1 - b_i`, linear on every maximal cone.
pub fn log_discrepancy_function(fan: &Fan, b: &ToricDivisor) -> Result<PlFunction> {
    b.check(fan)?;
    let values: Vec<Rat> = b.coeffs().iter().map(|c| Rat::one() - c).collect();
    PlFunction::from_ray_values(fan, &values).map_err(|cone| Error::NotQCartier { cone })
}

/// The support function `psi` of `D`, with `psi(v_i) = -d_i`, when `D` is
/// Q-Cartier.
pub fn is_q_cartier(fan: &Fan, d: &ToricDivisor) -> Result<Option<PlFunction>> {
    d.check(fan)?;
    let values: Vec<Rat> = d.coeffs().iter().map(|c| -c.clone()).collect();
    Ok(PlFunction::from_ray_values(fan, &values).ok())
}

/// Data exhibiting `A = <m, .> + l o phi` on the source support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelTrivialWitness {
    pub m: RatVec,
    /// One functional per maximal cone of the target fan.
    pub ell: Vec<RatVec>,
}

/// Decides whether `K_X + B` is R-linearly trivial over the base.
pub fn rel_trivial_witness(f: &ToricMorphism, b: &ToricDivisor) -> Result<Option<RelTrivialWitness>> {
    let x = f.source();
    let z = f.target();
    let a = log_discrepancy_function(x, b)?;
    let (nx, nz) = (x.rank(), z.rank());
    let ntau = z.max_cones().len();
    let nvars = nx + nz * ntau;
    let mut rows: Vec<RatVec> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();

    for (c, idx) in x.max_cones().iter().enumerate() {
        let tau = f
            .image_cone(c)?
            .ok_or(Error::IncompatibleMorphism { cone: c })?;
        for &i in idx {
            let g = x.ray(i);
            let img = f.apply(g)?;
            let mut row = vec![Rat::zero(); nvars];
            for (k, gk) in g.iter().enumerate() {
                row[k] = rat_int(gk);
            }
            for (k, ik) in img.iter().enumerate() {
                row[nx + tau * nz + k] = rat_int(ik);
            }
            rows.push(row);
            rhs.push(dot_rat(a.functional(c), g));
        }
    }
    // Agreement of the base functionals on shared rays.
    for s in 0..ntau {
        for t in s + 1..ntau {
            for &w in z.max_cones()[s].iter().filter(|w| z.max_cones()[t].contains(w)) {
                let mut row = vec![Rat::zero(); nvars];
                for (k, wk) in z.ray(w).iter().enumerate() {
                    row[nx + s * nz + k] = rat_int(wk);
                    row[nx + t * nz + k] = -rat_int(wk);
                }
                rows.push(row);
                rhs.push(Rat::zero());
            }
        }
    }
    let Some(sol) = solve_rat(&rows, &rhs, nvars) else {
        return Ok(None);
    };
    Ok(Some(RelTrivialWitness {
        m: sol[..nx].to_vec(),
        ell: (0..ntau)
            .map(|t| sol[nx + t * nz..nx + (t + 1) * nz].to_vec())
            .collect(),
    }))
}

/// Wall-crossing test: across every wall of the source fan, the functional
/// of one side exceeds `psi_D` at the generators of the other side lying off
/// the wall.
pub fn is_ample_over(f: &ToricMorphism, d: &ToricDivisor) -> Result<bool> {
    let x = f.source();
    let psi = is_q_cartier(x, d)?.ok_or(Error::NotQCartier { cone: 0 })?;
    if psi.functionals().len() != x.max_cones().len() {
        return Err(Error::NotQCartier { cone: 0 });
    }
    let walls = x.walls()?;
    if walls.is_empty() {
        // Strictness holds vacuously only for a single cone.
        return Ok(x.max_cones().len() == 1);
    }
    let values = psi.ray_values();
    for (s, t, wall) in walls {
        for (a, b) in [(s, t), (t, s)] {
            for &i in x.max_cones()[b].iter().filter(|i| !wall.contains(i)) {
                if dot_rat(psi.functional(a), x.ray(i)) <= values[i] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
