use toric_mld::arith::{Int, IntMat, Rat};
use toric_mld::bounds::example_family;
use toric_mld::divisor::{is_ample_over, rel_trivial_witness, ToricDivisor};
use toric_mld::error::Error;
use toric_mld::fan::Fan;
use toric_mld::fibration::{
    average_boundary, discriminant_divisor, lc_threshold_at, pullback_multiplicities, relative_mld,
    validate_morphism, ToricMorphism,
};
use toric_mld::mfs::factor_mfs;
use toric_mld::singularity::MldValue;

fn r(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

fn a1() -> Fan {
    Fan::from_i64(1, &[&[1]], &[&[0]]).unwrap()
}

fn p1() -> Fan {
    Fan::from_i64(1, &[&[1], &[-1]], &[&[0], &[1]]).unwrap()
}

/// `P¹ × P¹ × A¹ → P¹ × A¹ → A¹`, forgetting the first coordinate and then the second.
fn tower() -> (ToricMorphism, ToricMorphism) {
    let y = p1().product(&a1()).unwrap();
    let x = p1().product(&y).unwrap();
    let first = ToricMorphism::new(IntMat::from_i64(&[&[0, 1, 0], &[0, 0, 1]]), x, y.clone()).unwrap();
    let second = ToricMorphism::new(IntMat::from_i64(&[&[0, 1]]), y, a1()).unwrap();
    (first, second)
}

#[test]
fn composition_tower() {
    let (first, second) = tower();
    let composite = first.compose(&second).unwrap();
    assert_eq!(composite.matrix(), &IntMat::from_i64(&[&[0, 0, 1]]));
    for f in [&first, &second, &composite] {
        let d = validate_morphism(f).unwrap();
        assert!(d.proper_contraction(), "{d:?}");
    }
    assert_eq!(composite.relative_dimension(), 2);

    let delta_x = ToricDivisor::boundary(first.source());
    let delta_y = ToricDivisor::boundary(second.source());
    assert_eq!(discriminant_divisor(&first, &delta_x).unwrap().divisor, delta_y);
    assert_eq!(
        discriminant_divisor(&second, &delta_y).unwrap().divisor,
        ToricDivisor::boundary(&a1())
    );
    assert_eq!(
        discriminant_divisor(&composite, &delta_x).unwrap().divisor,
        ToricDivisor::boundary(&a1())
    );

    let zero = ToricDivisor::zero(first.source());
    let rel = relative_mld(&composite, &zero, &[0]).unwrap();
    assert_eq!(rel.value, MldValue::Finite(r(1, 1)));
    assert_eq!(rel.witness.unwrap(), vec![Int::from(0), Int::from(0), Int::from(1)]);

    // The generic fiber P¹ × P¹ has Picard rank two.
    assert!(is_ample_over(&composite, &ToricDivisor::boundary(composite.source())).unwrap());
    assert!(matches!(factor_mfs(&composite), Err(Error::NotMfsShape(_))));
}

#[test]
fn averaging_on_family() {
    let f = example_family(1, 2).unwrap().f;
    let b = ToricDivisor::new(vec![r(1, 1), r(1, 1), r(0, 1)]);
    assert!(rel_trivial_witness(&f, &b).unwrap().is_some());
    assert_eq!(discriminant_divisor(&f, &b).unwrap().divisor.coeffs(), &[r(4, 5)]);
    for (alpha, expected) in [(r(1, 2), r(9, 10)), (r(1, 3), r(14, 15))] {
        let avg = average_boundary(&b, f.source(), &alpha).unwrap();
        assert_eq!(avg.coeffs(), &[r(1, 1), r(1, 1), &Rat::from_integer(Int::from(1)) - &alpha]);
        let d = discriminant_divisor(&f, &avg).unwrap();
        assert_eq!(d.divisor.coeffs(), std::slice::from_ref(&expected));
        let bound = &alpha * r(4, 5) + (r(1, 1) - &alpha);
        assert!(expected <= bound);
    }
    assert!(matches!(average_boundary(&b, f.source(), &r(3, 2)), Err(Error::DomainError(_))));
}

#[test]
fn family_multiplicities() {
    let cases: [(u32, u64, i64); 6] = [(1, 1, 1), (1, 2, 5), (1, 3, 11), (2, 1, 5), (2, 2, 41), (2, 3, 155)];
    for (rr, q, m) in cases {
        let inst = example_family(rr, q).unwrap();
        assert_eq!(pullback_multiplicities(&inst.f, 0).unwrap(), vec![(inst.distinguished, Int::from(m))]);
        let zero = ToricDivisor::zero(&inst.x);
        assert_eq!(lc_threshold_at(&inst.f, &zero, &[Int::from(1)]).unwrap(), r(1, m));
    }
}

#[test]
fn non_trivial_boundary_has_no_discriminant() {
    let f = example_family(1, 2).unwrap().f;
    let zero = ToricDivisor::zero(f.source());
    assert_eq!(discriminant_divisor(&f, &zero), Err(Error::NotRelTrivial));
}
