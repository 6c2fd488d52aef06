mod common;

use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toric_mld::arith::{
    dot, hermite_normal_form, int_rank, is_primitive, kernel_basis, primitive, smith_invariants,
    unimodular_inverse, vec_gcd, vec_scale, Int, IntMat, IntVec, Rat,
};
use toric_mld::bounds::{delta, example_family, u_sequence};
use toric_mld::divisor::ToricDivisor;
use toric_mld::fan::Fan;
use toric_mld::fibration::{lc_threshold_over, ToricMorphism};
use toric_mld::json::{fan_value, parse_input, Document};
use toric_mld::lp::{solve_standard, StandardLp, StandardOutcome};
use toric_mld::singularity::{global_mld, log_discrepancy, mld_at_cone, MldValue};

use common::{random_boundary, random_fan};

fn ints(v: &[i64]) -> IntVec {
    v.iter().map(|&x| Int::from(x)).collect()
}

fn rats(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| Rat::from_integer(Int::from(x))).collect()
}

fn seeded_fan(seed: u64) -> (Fan, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_fan(&mut rng), rng)
}

/// Integer points of `[-r, r]^n`.
fn grid(n: usize, r: i64) -> Vec<IntVec> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| (-r..=r).map(move |x| [p.clone(), vec![x]].concat()))
            .collect();
    }
    out.into_iter().map(|p| ints(&p)).collect()
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = IntMat> {
    prop::collection::vec(-6i64..=6, rows * cols).prop_map(move |v| {
        let rows: Vec<IntVec> = v.chunks(cols).map(ints).collect();
        IntMat::from_rows(&rows, cols).unwrap()
    })
}

fn is_row_echelon(h: &IntMat) -> bool {
    let mut last: Option<usize> = None;
    let mut zero_seen = false;
    for i in 0..h.nrows() {
        match h.row(i).iter().position(|x| !x.is_zero()) {
            None => zero_seen = true,
            Some(p) => {
                if zero_seen || last.is_some_and(|l| p <= l) || h.get(i, p).is_negative() {
                    return false;
                }
                for k in 0..i {
                    let above = h.get(k, p);
                    if above.is_negative() || above >= h.get(i, p) {
                        return false;
                    }
                }
                last = Some(p);
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hnf_is_unimodular_echelon(m in (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| matrix(r, c))) {
        let (h, u) = hermite_normal_form(&m);
        prop_assert_eq!(u.det().unwrap().abs(), Int::one());
        prop_assert_eq!(u.mul(&m).unwrap(), h.clone());
        prop_assert!(is_row_echelon(&h), "{:?}", h);
        let inv = unimodular_inverse(&u).unwrap();
        prop_assert!(inv.mul(&u).unwrap().is_identity());
    }

    #[test]
    fn kernel_is_saturated(m in (1usize..=3, 1usize..=5).prop_flat_map(|(r, c)| matrix(r, c))) {
        let kernel = kernel_basis(&m);
        let rank = int_rank(&m.to_rows(), m.ncols());
        prop_assert_eq!(kernel.len(), m.ncols() - rank);
        for k in &kernel {
            prop_assert!(m.mul_vec(k).unwrap().iter().all(Zero::is_zero));
        }
        if !kernel.is_empty() {
            let km = IntMat::from_rows(&kernel, m.ncols()).unwrap();
            prop_assert!(smith_invariants(&km).iter().all(One::is_one));
        }
    }

    #[test]
    fn primitive_divides_out_gcd(v in prop::collection::vec(-50i64..=50, 1..=4)) {
        let v = ints(&v);
        if v.iter().all(Zero::is_zero) {
            prop_assert!(primitive(&v).is_err());
        } else {
            let p = primitive(&v).unwrap();
            prop_assert!(is_primitive(&p));
            prop_assert_eq!(vec_scale(&vec_gcd(&v), &p), v);
        }
    }

    #[test]
    fn lp_matches_vertex_enumeration(
        a in prop::collection::vec(-3i64..=3, 8),
        b in prop::collection::vec(-3i64..=3, 2),
        c in prop::collection::vec(-3i64..=3, 4),
        k in 1i64..=5,
    ) {
        let cols: Vec<IntVec> = (0..4).map(|j| ints(&[a[j], a[4 + j]])).collect();
        prop_assume!(int_rank(&cols, 2) == 2);
        let lp = StandardLp { a: vec![rats(&a[..4]), rats(&a[4..])], b: rats(&b), c: rats(&c) };
        // Basic feasible solutions over every nonsingular column pair.
        let mut best: Option<Rat> = None;
        for i in 0..4 {
            for j in i + 1..4 {
                let det = Int::from(a[i] * a[4 + j] - a[j] * a[4 + i]);
                if det.is_zero() {
                    continue;
                }
                let d = Rat::from_integer(det);
                let xi = Rat::from_integer(Int::from(b[0] * a[4 + j] - a[j] * b[1])) / &d;
                let xj = Rat::from_integer(Int::from(a[i] * b[1] - b[0] * a[4 + i])) / &d;
                if xi.is_negative() || xj.is_negative() {
                    continue;
                }
                let value = &xi * Rat::from_integer(Int::from(c[i])) + &xj * Rat::from_integer(Int::from(c[j]));
                if best.as_ref().is_none_or(|b| value < *b) {
                    best = Some(value);
                }
            }
        }
        match solve_standard(&lp).unwrap() {
            StandardOutcome::Optimal { x, value, dual } => {
                prop_assert_eq!(Some(value.clone()), best);
                prop_assert!(x.iter().all(|xi| !xi.is_negative()));
                let by: Rat = dual.iter().zip(&lp.b).map(|(y, b)| y * b).sum();
                prop_assert_eq!(&by, &value);
                for j in 0..4 {
                    let col: Rat = dual.iter().zip(&lp.a).map(|(y, row)| y * &row[j]).sum();
                    prop_assert!(col <= lp.c[j]);
                }
                let scaled = StandardLp { c: lp.c.iter().map(|x| x * Rat::from_integer(Int::from(k))).collect(), ..lp.clone() };
                match solve_standard(&scaled).unwrap() {
                    StandardOutcome::Optimal { value: v2, .. } => prop_assert_eq!(v2, value * Rat::from_integer(Int::from(k))),
                    other => prop_assert!(false, "{:?}", other),
                }
            }
            StandardOutcome::Infeasible => prop_assert!(best.is_none()),
            StandardOutcome::Unbounded { direction } => {
                prop_assert!(best.is_some());
                prop_assert!(direction.iter().all(|d| !d.is_negative()));
                for row in &lp.a {
                    prop_assert!(row.iter().zip(&direction).map(|(a, d)| a * d).sum::<Rat>().is_zero());
                }
                prop_assert!(lp.c.iter().zip(&direction).map(|(c, d)| c * d).sum::<Rat>().is_negative());
            }
        }
    }

    #[test]
    fn star_subdivision_keeps_support(seed in any::<u64>(), v in prop::collection::vec(-2i64..=2, 3)) {
        let (fan, _) = seeded_fan(seed);
        let v = ints(&v[..fan.rank()]);
        prop_assume!(is_primitive(&v) && fan.ray_index(&v).is_none() && fan.in_support(&v).unwrap());
        let sub = fan.star_subdivision(&v).unwrap();
        prop_assert!(sub.validate().unwrap().is_empty());
        prop_assert!(sub.is_simplicial());
        prop_assert_eq!(sub.rays().len(), fan.rays().len() + 1);
        prop_assert_eq!(sub.ray_index(&v), Some(fan.rays().len()));
        prop_assert_eq!(sub.is_complete().unwrap(), fan.is_complete().unwrap());
        for p in grid(fan.rank(), 1).into_iter().chain([vec_scale(&Int::from(2), &v)]) {
            prop_assert_eq!(sub.in_support(&p).unwrap(), fan.in_support(&p).unwrap());
        }
    }

    #[test]
    fn boundary_log_discrepancy_vanishes(seed in any::<u64>()) {
        let (fan, _) = seeded_fan(seed);
        let delta_b = ToricDivisor::boundary(&fan);
        for p in grid(fan.rank(), 2) {
            if p.iter().all(Zero::is_zero) || !fan.in_support(&p).unwrap() {
                continue;
            }
            prop_assert!(log_discrepancy(&fan, &delta_b, &p).unwrap().is_zero());
        }
    }

    #[test]
    fn log_discrepancy_is_homogeneous(seed in any::<u64>(), k in 2i64..=5) {
        let (fan, mut rng) = seeded_fan(seed);
        let b = random_boundary(&mut rng, &fan);
        for p in grid(fan.rank(), 2) {
            if p.iter().all(Zero::is_zero) || !fan.in_support(&p).unwrap() {
                continue;
            }
            let k = Int::from(k);
            let scaled = log_discrepancy(&fan, &b, &vec_scale(&k, &p)).unwrap();
            prop_assert_eq!(scaled, log_discrepancy(&fan, &b, &p).unwrap() * Rat::from_integer(k));
        }
    }

    #[test]
    fn mld_is_antitone_in_boundary(seed in any::<u64>()) {
        let (fan, mut rng) = seeded_fan(seed);
        let small = random_boundary(&mut rng, &fan);
        let large = ToricDivisor::new(
            small.coeffs().iter().map(|c| (c + Rat::one()) / Rat::from_integer(Int::from(2))).collect(),
        );
        prop_assert!(small.le(&large));
        let lo = global_mld(&fan, &large).unwrap().value;
        let hi = global_mld(&fan, &small).unwrap().value;
        prop_assert!(lo <= hi, "{} > {}", lo, hi);
    }

    #[test]
    fn mld_at_cone_bounds_global(seed in any::<u64>()) {
        let (fan, mut rng) = seeded_fan(seed);
        let b = random_boundary(&mut rng, &fan);
        let global = global_mld(&fan, &b).unwrap().value;
        for cone in fan.all_cones().unwrap() {
            if cone.is_empty() {
                continue;
            }
            let local = mld_at_cone(&fan, &b, &cone).unwrap().value;
            prop_assert!(local >= global, "cone {:?}: {} < {}", cone, local, global);
        }
    }

    #[test]
    fn delta_monotone_and_composes(r in 1u32..=3, s in 1u32..=2, n in 1i64..=6, d in 1i64..=6) {
        prop_assume!(n <= d);
        let eps = Rat::new(Int::from(n), Int::from(d));
        let smaller = &eps / Rat::from_integer(Int::from(2));
        let de = delta(r, &eps).unwrap();
        prop_assert!(de > Rat::zero() && de <= eps);
        prop_assert!(delta(r, &smaller).unwrap() < de);
        prop_assert!(delta(r + 1, &eps).unwrap() < de);
        prop_assert!(delta(s + r, &eps).unwrap() <= delta(r, &delta(s, &eps).unwrap()).unwrap());
    }

    #[test]
    fn u_sequence_growth(k in 1u32..=4, q in 1u64..=20) {
        let u = u_sequence(k, q).unwrap();
        let next = u_sequence(k + 1, q).unwrap();
        prop_assert_eq!(&next, &(&u * (&u + 1u32)));
        let e = 1u32 << (k - 1);
        prop_assert!(Int::from(q).pow(e) <= u);
        prop_assert!(u <= Int::from(2 * q).pow(e));
    }

    #[test]
    fn fan_json_round_trip(seed in any::<u64>()) {
        let (fan, _) = seeded_fan(seed);
        let text = fan_value(&fan).to_string();
        prop_assert_eq!(parse_input(&text).unwrap(), Document::Fan(fan.clone()));
        let canon = fan.canonical();
        prop_assert_eq!(parse_input(&fan_value(&canon).to_string()).unwrap(), Document::Fan(canon));
    }

    #[test]
    fn lct_is_unimodular_invariant(
        r in 1u32..=2,
        q in 1u64..=3,
        ops in prop::collection::vec((0usize..3, 0usize..3, -2i64..=2), 1..6),
    ) {
        let inst = example_family(r, q).unwrap();
        let n = inst.x.rank();
        let mut u = IntMat::identity(n);
        for (i, j, k) in ops {
            let (i, j) = (i % n, j % n);
            if i == j {
                continue;
            }
            let mut e = IntMat::identity(n);
            e.set(i, j, Int::from(k));
            u = e.mul(&u).unwrap();
        }
        let x2 = inst.x.transform(&u).unwrap();
        let m2 = inst.f.matrix().mul(&unimodular_inverse(&u).unwrap()).unwrap();
        let f2 = ToricMorphism::new(m2, x2, inst.z.clone()).unwrap();
        for b in [ToricDivisor::zero(&inst.x), ToricDivisor::boundary(&inst.x)] {
            prop_assert_eq!(
                lc_threshold_over(&f2, &b, 0).unwrap(),
                lc_threshold_over(&inst.f, &b, 0).unwrap()
            );
        }
    }
}

#[test]
fn global_mld_is_attained_at_its_witness() {
    for seed in 0..40u64 {
        let (fan, mut rng) = seeded_fan(seed);
        let b = random_boundary(&mut rng, &fan);
        let rep = global_mld(&fan, &b).unwrap();
        let w = rep.witness.unwrap();
        match rep.value {
            MldValue::Finite(v) => assert_eq!(log_discrepancy(&fan, &b, &w).unwrap(), v),
            MldValue::MinusInfinity => panic!("boundary coefficients are at most 1"),
        }
        assert!(!w.iter().all(Zero::is_zero));
    }
}

#[test]
fn dot_pairs_with_kernel() {
    let m = IntMat::from_i64(&[&[1, 2, 3], &[4, 5, 6]]);
    let k = kernel_basis(&m);
    assert_eq!(k.len(), 1);
    assert!(k[0].iter().fold(Int::zero(), |g, x| g.gcd(x)).is_one());
    assert!(dot(m.row(0), &k[0]).is_zero());
}
