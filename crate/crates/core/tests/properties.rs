//! Property tests over random exact data: random connections, torsions and
//! one-forms on homogeneous frames of dimension 2, 4 and 6.

use acgeom_core::almost_complex::{
    classical_nijenhuis, complexify, compute_g, connection_family, g_identity_residuals, kn_connection, nijenhuis,
    nijenhuis_from_derivative, AlmostComplexStructure,
};
use acgeom_core::connection::Connection;
use acgeom_core::families::{iwasawa, kodaira_thurston};
use acgeom_core::field::hermitian_split;
use acgeom_core::forms::{exterior_derivative, hodge_star, wedge};
use acgeom_core::hermitian::{metric_torsion_to_difference, HermitianData};
use acgeom_core::projective::{projective_a, ProjectiveScene};
use acgeom_core::scalar::parse_scalar;
use acgeom_core::{Field, FrameComplex, Matrix, Rational, Scalar, Tensor};
use proptest::prelude::*;

type Q = Rational;

fn q(n: i64) -> Q {
    Q::from_i64(n)
}

/// `(frame, J, metric)` for the index `k` of a fixed list of geometries.
fn geometry(k: usize) -> (FrameComplex<Q>, Field<Q>, Field<Q>) {
    let flat = |n: usize| {
        let g = Field::constant(Tensor::from_fn(n, 0, 2, |i| if i[0] == i[1] { q(1) } else { q(0) }));
        (FrameComplex::abelian(n), Field::constant(AlmostComplexStructure::<Q>::standard(n)), g)
    };
    match k % 5 {
        0 => flat(2),
        1 => flat(4),
        2 => flat(6),
        3 => {
            let f = kodaira_thurston::<Q>().unwrap();
            (f.frame, f.j, f.g)
        }
        _ => {
            let f = iwasawa::<Q>().unwrap();
            (f.frame, f.j, f.g)
        }
    }
}

fn tensor(n: usize, upper: usize, lower: usize, raw: &[i8]) -> Tensor<Q> {
    let mut it = raw.iter().cycle();
    Tensor::from_fn(n, upper, lower, |_| Q::from_ratio(*it.next().unwrap() as i64, 2))
}

fn raw() -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(-4i8..=4, 7..60)
}

fn symmetric(t: &Tensor<Q>) -> Tensor<Q> {
    t.add(&t.swap_lower(0, 1)).unwrap()
}

fn zero(f: &Field<Q>, fc: &FrameComplex<Q>) -> bool {
    fc.negligible(f, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn complexified_connection_preserves_j(k in 0usize..5, r in raw()) {
        let (fc, j, _) = geometry(k);
        let n = fc.dim();
        let conn = Connection::symmetric_frame(&fc).add_difference(&Field::constant(tensor(n, 1, 2, &r))).unwrap();
        let g = compute_g(&conn, &j).unwrap();
        let cg = complexify(&conn, &g).unwrap();
        prop_assert!(zero(&cg.covariant_derivative(&j).unwrap(), &fc));
        for t in [-2, 1, 3] {
            let member = connection_family(&cg, &g, q(t)).unwrap();
            prop_assert!(zero(&member.covariant_derivative(&j).unwrap(), &fc));
        }
        prop_assert_eq!(g_identity_residuals(&g, &j, &fc).unwrap(), [0.0; 3]);
    }

    #[test]
    fn nijenhuis_is_independent_of_the_torsion_free_connection(k in 0usize..5, r1 in raw(), r2 in raw()) {
        let (fc, j, _) = geometry(k);
        let n = fc.dim();
        let base = Connection::symmetric_frame(&fc);
        let c1 = base.add_difference(&Field::constant(symmetric(&tensor(n, 1, 2, &r1)))).unwrap();
        let c2 = base.add_difference(&Field::constant(symmetric(&tensor(n, 1, 2, &r2)))).unwrap();
        let n1 = nijenhuis(&c1, &j).unwrap();
        prop_assert!(zero(&n1.sub(&nijenhuis(&c2, &j).unwrap()).unwrap(), &fc));
        prop_assert!(zero(&n1.sub(&nijenhuis_from_derivative(&c1, &j).unwrap()).unwrap(), &fc));
        prop_assert!(zero(&n1.scale(q(4)).sub(&classical_nijenhuis(&j, &fc)).unwrap(), &fc));
        // antisymmetric and anti-Hermitian
        prop_assert!(zero(&n1.add(&n1.swap_lower(0, 1)).unwrap(), &fc));
        prop_assert!(zero(&hermitian_split(&n1, &j, (1, 2)).unwrap().plus, &fc));
    }

    #[test]
    fn kn_torsion_is_the_nijenhuis_tensor(k in 0usize..5, r in raw()) {
        let (fc, j, _) = geometry(k);
        let n = fc.dim();
        let conn = Connection::symmetric_frame(&fc).add_difference(&Field::constant(symmetric(&tensor(n, 1, 2, &r)))).unwrap();
        let tor = kn_connection(&conn, &j).unwrap().torsion();
        prop_assert!(zero(&tor.sub(&nijenhuis(&conn, &j).unwrap()).unwrap(), &fc));
    }

    #[test]
    fn hermitian_split_is_a_decomposition(k in 0usize..5, r in raw()) {
        let (fc, j, _) = geometry(k);
        let t = Field::constant(tensor(fc.dim(), 1, 2, &r));
        let s = hermitian_split(&t, &j, (1, 2)).unwrap();
        prop_assert!(zero(&s.plus.add(&s.minus).unwrap().sub(&t).unwrap(), &fc));
        let jj = |f: &Field<Q>| f.act(&j, 1).unwrap().act(&j, 2).unwrap();
        prop_assert!(zero(&jj(&s.plus).sub(&s.plus).unwrap(), &fc));
        prop_assert!(zero(&jj(&s.minus).add(&s.minus).unwrap(), &fc));
    }

    #[test]
    fn metric_connection_with_prescribed_torsion(k in 0usize..5, r in raw()) {
        let (fc, j, g) = geometry(k);
        let n = fc.dim();
        let raw_t = tensor(n, 1, 2, &r);
        let t = Field::constant(raw_t.sub(&raw_t.swap_lower(0, 1)).unwrap());
        let hd = HermitianData::new(g.clone(), j, &fc).unwrap();
        let conn = hd.levi_civita().add_difference(&metric_torsion_to_difference(&t, &g, &fc).unwrap()).unwrap();
        prop_assert!(zero(&conn.covariant_derivative(&g).unwrap(), &fc));
        prop_assert!(zero(&conn.torsion().sub(&t).unwrap(), &fc));
    }

    #[test]
    fn projective_changes_compose_and_shift_a(k in 0usize..5, r1 in raw(), r2 in raw()) {
        let (fc, j, _) = geometry(k);
        let n = fc.dim();
        let u1 = Field::constant(tensor(n, 0, 1, &r1));
        let u2 = Field::constant(tensor(n, 0, 1, &r2));
        let rep = Connection::symmetric_frame(&fc);
        let twice = rep.projective_change(&u1).unwrap().projective_change(&u2).unwrap();
        let once = rep.projective_change(&u1.add(&u2).unwrap()).unwrap();
        prop_assert!(zero(&twice.difference(&once).unwrap(), &fc));
        let a0 = projective_a(&rep, &j).unwrap();
        let a1 = projective_a(&rep.projective_change(&u1).unwrap(), &j).unwrap();
        prop_assert!(zero(&a1.sub(&a0).unwrap().sub(&u1).unwrap(), &fc));
        let p0 = ProjectiveScene::new(&rep, &j).unwrap();
        let p1 = ProjectiveScene::new(&rep.projective_change(&u1).unwrap(), &j).unwrap();
        prop_assert!(zero(&p0.p_connection().difference(p1.p_connection()).unwrap(), &fc));
    }

    #[test]
    fn exterior_derivative_squares_to_zero(k in 0usize..5, r in raw()) {
        let (fc, _, _) = geometry(k);
        let n = fc.dim();
        if n < 4 {
            return Ok(());
        }
        let one = Field::constant(tensor(n, 0, 1, &r));
        let two = exterior_derivative(&one, &fc).unwrap();
        prop_assert!(zero(&exterior_derivative(&two, &fc).unwrap(), &fc));
        // graded antisymmetry of the wedge on one-forms
        let other = Field::constant(tensor(n, 0, 1, &r[1..]));
        let w = wedge(&one, &other).unwrap().add(&wedge(&other, &one).unwrap()).unwrap();
        prop_assert!(zero(&w, &fc));
    }

    #[test]
    fn hodge_star_is_an_involution_on_two_forms_in_dimension_four(r in raw(), diag in prop::collection::vec(1i64..5, 4)) {
        let fc = FrameComplex::<Q>::abelian(4);
        let g = Field::constant(Tensor::from_fn(4, 0, 2, |i| if i[0] == i[1] { q(diag[i[0]] * diag[i[0]]) } else { q(0) }));
        let raw_t = tensor(4, 0, 2, &r);
        let alpha = Field::constant(raw_t.sub(&raw_t.swap_lower(0, 1)).unwrap());
        let twice = hodge_star(&hodge_star(&alpha, &g, &fc).unwrap(), &g, &fc).unwrap();
        prop_assert!(zero(&twice.sub(&alpha).unwrap(), &fc));
    }

    #[test]
    fn conjugated_structures_square_to_minus_one(r in prop::collection::vec(-3i64..=3, 16)) {
        let p = Matrix::from_fn(4, 4, |a, b| q(r[4 * a + b]) + if a == b { q(7) } else { q(0) });
        let Ok(pinv) = p.inverse(0.0) else { return Ok(()); };
        let j0 = Matrix::from_tensor(&AlmostComplexStructure::<Q>::standard(4));
        let j = p.mul(&j0).mul(&pinv);
        let sq = j.mul(&j);
        for a in 0..4 {
            for b in 0..4 {
                prop_assert_eq!(sq.get(a, b).clone(), if a == b { q(-1) } else { q(0) });
            }
        }
    }

    #[test]
    fn rational_display_round_trips(num in -1000i64..1000, den in 1i64..500) {
        let v = Q::from_ratio(num, den);
        prop_assert_eq!(parse_scalar::<Q>(&v.to_string()), Some(v));
    }

    #[test]
    fn swap_lower_is_an_involution(r in raw()) {
        let t = tensor(3, 1, 2, &r);
        prop_assert_eq!(t.swap_lower(0, 1).swap_lower(0, 1), t.clone());
        let sym = t.sym(&[1, 2]).unwrap();
        let alt = t.alt(&[1, 2]).unwrap();
        prop_assert_eq!(sym.add(&alt).unwrap(), t);
    }
}
