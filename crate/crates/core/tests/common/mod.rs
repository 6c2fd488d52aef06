//! Shared helpers for integration tests: a brute-force mld oracle on small
//! machine-integer rationals and a seeded generator of random simplicial fans.

#![allow(dead_code)]

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use toric_mld::arith::{Int, IntVec, Rat};
use toric_mld::divisor::ToricDivisor;
use toric_mld::fan::Fan;

/// Reduced fraction with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Q {
    pub n: i128,
    pub d: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Q {
    pub fn new(n: i128, d: i128) -> Q {
        assert!(d != 0);
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Q { n: s * n / g, d: s * d / g }
    }
    pub fn int(n: i128) -> Q {
        Q { n, d: 1 }
    }
    pub fn zero() -> Q {
        Q::int(0)
    }
    pub fn is_zero(self) -> bool {
        self.n == 0
    }
    pub fn add(self, o: Q) -> Q {
        Q::new(self.n * o.d + o.n * self.d, self.d * o.d)
    }
    pub fn sub(self, o: Q) -> Q {
        Q::new(self.n * o.d - o.n * self.d, self.d * o.d)
    }
    pub fn mul(self, o: Q) -> Q {
        Q::new(self.n * o.n, self.d * o.d)
    }
    pub fn div(self, o: Q) -> Q {
        Q::new(self.n * o.d, self.d * o.n)
    }
    pub fn lt(self, o: Q) -> bool {
        self.n * o.d < o.n * self.d
    }
    pub fn from_rat(r: &Rat) -> Q {
        Q::new(r.numer().to_i128().unwrap(), r.denom().to_i128().unwrap())
    }
    pub fn to_rat(self) -> Rat {
        Rat::new(Int::from(self.n), Int::from(self.d))
    }
}

fn small(v: &[Int]) -> Vec<i128> {
    v.iter().map(|x| x.to_i128().unwrap()).collect()
}

/// Solves `Σ λ_j g_j = v` by elimination; `None` when inconsistent.
fn coefficients(gens: &[Vec<i128>], v: &[i128]) -> Option<Vec<Q>> {
    let n = v.len();
    let k = gens.len();
    let mut m: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut row: Vec<Q> = gens.iter().map(|g| Q::int(g[i])).collect();
            row.push(Q::int(v[i]));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let piv = m[r][c];
        for x in m[r].iter_mut() {
            *x = x.div(piv);
        }
        for i in 0..n {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                let pivot_row = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(pivot_row) {
                    *x = x.sub(f.mul(p));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if (r..n).any(|i| !m[i][k].is_zero()) {
        return None;
    }
    let mut out = vec![Q::zero(); k];
    for (row, &c) in pivots.iter().enumerate() {
        out[c] = m[row][k];
    }
    Some(out)
}

/// Log discrepancy of `v` computed from scratch; `None` outside the support.
pub fn oracle_a(fan: &Fan, b: &ToricDivisor, v: &[i128]) -> Option<Q> {
    for cone in fan.max_cones() {
        let gens: Vec<Vec<i128>> = cone.iter().map(|&i| small(fan.ray(i))).collect();
        if let Some(lambda) = coefficients(&gens, v) {
            if lambda.iter().all(|l| !l.lt(Q::zero())) {
                let mut a = Q::zero();
                for (l, &i) in lambda.iter().zip(cone) {
                    a = a.add(l.mul(Q::int(1).sub(Q::from_rat(b.coeff(i)))));
                }
                return Some(a);
            }
        }
    }
    None
}

/// Radius of a box certain to contain a minimizer when all ray values are
/// nonnegative: every lattice point of a simplicial cone is a parallelepiped
/// point plus a nonnegative integer combination of generators.
pub fn certified_radius(fan: &Fan) -> i128 {
    fan.max_cones()
        .iter()
        .map(|c| {
            c.iter()
                .map(|&i| small(fan.ray(i)).iter().map(|x| x.abs()).max().unwrap_or(0))
                .sum::<i128>()
        })
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Minimum of the log discrepancy over all nonzero lattice points of the
/// support inside the certified box.
pub fn ball_oracle(fan: &Fan, b: &ToricDivisor) -> Q {
    let n = fan.rank();
    let r = certified_radius(fan);
    let mut best: Option<Q> = None;
    let mut v = vec![-r; n];
    loop {
        if v.iter().any(|&x| x != 0) {
            if let Some(a) = oracle_a(fan, b, &v) {
                if best.is_none_or(|b| a.lt(b)) {
                    best = Some(a);
                }
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best.expect("support has nonzero lattice points");
            }
            if v[i] < r {
                v[i] += 1;
                break;
            }
            v[i] = -r;
            i += 1;
        }
    }
}

fn random_primitive(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> IntVec {
    loop {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
        let g = v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
        if g == 1 {
            return v.into_iter().map(Int::from).collect();
        }
    }
}

fn projective_space(n: usize) -> Fan {
    let mut rays: Vec<IntVec> = (0..n)
        .map(|i| (0..n).map(|j| Int::from((i == j) as i64)).collect())
        .collect();
    rays.push(vec![Int::from(-1); n]);
    let cones = (0..=n).map(|skip| (0..=n).filter(|&j| j != skip).collect()).collect();
    Fan::new(n, rays, cones).unwrap()
}

/// A random simplicial fan of rank 1..=3: a random simplicial cone or a
/// projective space, refined by a few random star subdivisions.
pub fn random_fan(rng: &mut ChaCha8Rng) -> Fan {
    let n = rng.gen_range(1..=3usize);
    let mut fan = loop {
        if rng.gen_bool(0.3) {
            break projective_space(n);
        }
        let k = rng.gen_range(1..=n);
        let rays: Vec<IntVec> = (0..k).map(|_| random_primitive(rng, n, 3)).collect();
        if let Ok(f) = Fan::new(n, rays, vec![(0..k).collect()]) {
            if f.is_simplicial() {
                break f;
            }
        }
    };
    let subdivisions = rng.gen_range(0..=3);
    let mut done = 0;
    let mut attempts = 0;
    while done < subdivisions && attempts < 50 {
        attempts += 1;
        let v = random_primitive(rng, n, 2);
        if fan.ray_index(&v).is_some() || !fan.in_support(&v).unwrap() {
            continue;
        }
        fan = fan.star_subdivision(&v).unwrap();
        done += 1;
    }
    fan
}

/// Coefficients `k/d` with `d <= 4`, uniformly in `[0, 1]`.
pub fn random_boundary(rng: &mut ChaCha8Rng, fan: &Fan) -> ToricDivisor {
    ToricDivisor::new(
        (0..fan.rays().len())
            .map(|_| {
                let d = rng.gen_range(1..=4i64);
                Rat::new(Int::from(rng.gen_range(0..=d)), Int::from(d))
            })
            .collect(),
    )
}
