use std::sync::Arc;

use convexion_core::category::{extract_functor, grothendieck, is_discrete_fibration, is_natural_isomorphism, unit_isomorphism, FiniteCategory, SetFunctor};
use convexion_core::distribution::{convex_combine, Distribution};
use convexion_core::finprob::{info_loss, ProbMorphism, ProbObject};
use convexion_core::join::{join_eq, join_mix, join_point, Join};
use convexion_core::presented::{EqualityStatus, Presentation};
use convexion_core::prop::{qconv_compose, Matrix, QConvOp};
use convexion_core::semiring::{q, Rational};
use convexion_core::simplicial::{
    bundle_tensor, check_simplicial_distribution, mu_product, random_distribution, search_twisting_functions,
    twisted_product, SimplicialAbelianGroup, TruncatedSimplicialSet,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn weights(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0i64..6, n).prop_map(|raw| {
        let total: i64 = raw.iter().sum();
        if total == 0 {
            let mut w = vec![q(0, 1); raw.len()];
            w[0] = q(1, 1);
            w
        } else {
            raw.into_iter().map(|k| q(k, total)).collect()
        }
    })
}

fn dist_over(gens: Vec<String>) -> impl Strategy<Value = Distribution> {
    let n = gens.len();
    weights(n).prop_map(move |w| Distribution::new(gens.clone().into_iter().zip(w)).unwrap())
}

fn gens(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("g{i}")).collect()
}

fn presentation_samples() -> impl Strategy<Value = (Vec<String>, [Distribution; 4])> {
    (1usize..=4).prop_flat_map(|n| {
        let d = || dist_over(gens(n));
        (Just(gens(n)), [d(), d(), d(), d()])
    })
}

fn convex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(weights(cols), rows).prop_map(move |e| Matrix::new(rows, cols, e).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flatten_is_associative(ws in prop::collection::vec(weights(3), 3), outer in weights(3)) {
        let inner: Vec<Distribution<usize>> = ws.into_iter().map(|w| Distribution::new((0..3).zip(w)).unwrap()).collect();
        let middle: Vec<Distribution<Distribution<usize>>> = (0..3)
            .map(|i| Distribution::new([(inner[i].clone(), q(1, 2)), (inner[(i + 1) % 3].clone(), q(1, 2))]).unwrap())
            .collect();
        let ppp = Distribution::new(middle.into_iter().zip(outer)).unwrap();
        prop_assert_eq!(ppp.flatten().flatten(), ppp.map(|pp| pp.flatten()).flatten());
    }

    #[test]
    fn eq_verdicts_carry_valid_witnesses(ds in presentation_samples()) {
        let (g, [lhs, rhs, a, b]) = ds;
        let pres = Presentation::new(g, vec![(lhs.clone(), rhs.clone())]).unwrap();
        let p = convex_combine(&[q(1, 2), q(1, 2)], &[lhs.clone(), a]).unwrap();
        let verdict = pres.decide(&p, &b, 2).unwrap();
        prop_assert!(verdict.validate(&pres, &p, &b));
        prop_assert!(pres.decide(&lhs, &rhs, 1).unwrap().is_equal());
    }

    #[test]
    fn join_mixing_is_associative(a in 1i64..4, b in 1i64..4, px in dist_over(gens(2)), py in dist_over(gens(3))) {
        let x = Arc::new(Presentation::free(gens(2)).unwrap());
        let y = Arc::new(Presentation::free(gens(3)).unwrap());
        let join = Join::binary(x.clone(), y.clone()).unwrap();
        let u = join_point(&join, q(1, 3), Some(x.element(px).unwrap()), Some(y.element(py.clone()).unwrap())).unwrap();
        let v = join_point(&join, q(0, 1), None, Some(y.element(py).unwrap())).unwrap();
        let (a, b) = (q(a, 4), q(b, 4));
        let one = q(1, 1);
        let inner = join_mix(&[b.clone(), &one - &b], &[u.clone(), v.clone()]).unwrap();
        let nested = join_mix(&[a.clone(), &one - &a], &[inner, u.clone()]).unwrap();
        let flat = join_mix(&[&a * &b + (&one - &a), &a * (&one - &b)], &[u, v]).unwrap();
        prop_assert_eq!(join_eq(&nested, &flat, 2).unwrap(), EqualityStatus::Equal);
    }

    #[test]
    fn convex_matrices_compose_associatively(a in convex_matrix(2, 3), b in convex_matrix(3, 2), c in convex_matrix(2, 2)) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(left.is_convex());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn qconv_composition_is_associative(a in weights(2), b in weights(2), c in weights(3)) {
        let (a, b, c) = (QConvOp::new(a).unwrap(), QConvOp::new(b).unwrap(), QConvOp::new(c).unwrap());
        let unit = QConvOp::unit();
        let left = qconv_compose(&qconv_compose(&a, &[b.clone(), unit.clone()]).unwrap(), &[c.clone(), unit.clone(), unit.clone()]).unwrap();
        let right = qconv_compose(&a, &[qconv_compose(&b, &[c, unit.clone()]).unwrap(), unit]).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn random_path_functors_round_trip(sizes in prop::collection::vec(1usize..=3, 3), choices in prop::collection::vec(0usize..3, 6)) {
        let edges = [(0, 1), (1, 2)];
        let cat = Arc::new(FiniteCategory::path_category(3, &edges).unwrap());
        let sets: std::collections::BTreeMap<String, Vec<String>> =
            (0..3).map(|i| (i.to_string(), (0..sizes[i]).map(|k| format!("s{i}_{k}")).collect())).collect();
        let edge_maps: Vec<std::collections::BTreeMap<String, String>> = edges
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| {
                sets[&a.to_string()]
                    .iter()
                    .enumerate()
                    .map(|(k, x)| (x.clone(), sets[&b.to_string()][choices[e * 3 + k] % sizes[b]].clone()))
                    .collect()
            })
            .collect();
        let f = SetFunctor::on_paths(&cat, sets, &edge_maps).unwrap();
        let p = grothendieck(&f).unwrap();
        prop_assert!(is_discrete_fibration(&p));
        let back = extract_functor(&p).unwrap();
        prop_assert!(is_natural_isomorphism(&f, &back, &unit_isomorphism(&f)));
    }

    #[test]
    fn information_loss_is_additive(w in weights(4), first in prop::collection::vec(0usize..3, 4), second in prop::collection::vec(0usize..2, 3)) {
        let src = ProbObject::new(w).unwrap();
        let a = ProbMorphism::onto_pushforward(src, first, 3).unwrap();
        let b = ProbMorphism::onto_pushforward(a.target().clone(), second, 2).unwrap();
        let ba = b.after(&a).unwrap();
        prop_assert!((info_loss(&ba) - info_loss(&a) - info_loss(&b)).abs() < 1e-9);
        prop_assert!(info_loss(&a) >= -1e-12);
    }

    #[test]
    fn mu_preserves_simplicial_distributions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = Arc::new(SimplicialAbelianGroup::constant(2, 2).unwrap());
        let x = Arc::new(TruncatedSimplicialSet::classifying(2, 2).unwrap());
        let twists = search_twisting_functions(&k, &x, Some(&mut rng), 2);
        let e = Arc::new(twisted_product(&k, &twists[0], &x).unwrap());
        let f = Arc::new(twisted_product(&k, &twists[twists.len() - 1], &x).unwrap());
        let t = bundle_tensor(&e, &f).unwrap();
        let (p, r) = (random_distribution(&e, &mut rng).unwrap(), random_distribution(&f, &mut rng).unwrap());
        prop_assert!(check_simplicial_distribution(&mu_product(&p, &r, &t).unwrap(), &t).passed());
    }
}
