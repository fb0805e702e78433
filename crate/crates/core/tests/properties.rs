use std::collections::BTreeSet;

use el_disunify::parse::{parse_term, render_term};
use el_disunify::term::{
    dissubsumption_witness, equivalent, subsumes, atom_subsumes, Atom, Concept, Substitution, Symbol,
};
use proptest::prelude::*;

fn vars() -> BTreeSet<Symbol> {
    ["X", "Y"].iter().map(|x| Symbol::new(x)).collect()
}

fn name() -> impl Strategy<Value = Atom> {
    prop_oneof![
        Just(Atom::constant("A")),
        Just(Atom::constant("B")),
        Just(Atom::constant("C")),
        Just(Atom::var("X")),
        Just(Atom::var("Y")),
    ]
}

fn ground_name() -> impl Strategy<Value = Atom> {
    prop_oneof![Just(Atom::constant("A")), Just(Atom::constant("B"))]
}

fn term_from(leaf: impl Strategy<Value = Atom> + 'static) -> impl Strategy<Value = Concept> {
    let atom = leaf.prop_recursive(3, 24, 3, |inner| {
        (
            prop_oneof![Just("r"), Just("s")],
            prop::collection::vec(inner, 0..3),
        )
            .prop_map(|(r, atoms)| Atom::exists(r, Concept::conj(atoms)))
    });
    prop::collection::vec(atom, 0..4).prop_map(Concept::conj)
}

fn term() -> impl Strategy<Value = Concept> {
    term_from(name())
}

fn ground_term() -> impl Strategy<Value = Concept> {
    term_from(ground_name())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_parse_round_trip(c in term()) {
        let text = render_term(&c);
        let back = parse_term(&text, &vars()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(render_term(&back), text);
    }

    #[test]
    fn size_of_existential(c in term()) {
        prop_assert_eq!(Concept::exists("r", c.clone()).size(), 1 + c.size());
        prop_assert_eq!(Concept::exists("r", c.clone()).role_depth(), 1 + c.role_depth());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn reflexive_and_projective(c in term(), d in term()) {
        prop_assert!(subsumes(&c, &c));
        prop_assert!(subsumes(&c.and(&d), &c));
        prop_assert!(subsumes(&c.and(&d), &d));
        prop_assert!(subsumes(&c, &Concept::top()));
    }

    #[test]
    fn transitive(c in term(), d in term(), e in term()) {
        // Build chains that actually hold as well as random triples.
        let d2 = d.and(&e);
        let c2 = c.and(&d2);
        prop_assert!(subsumes(&c2, &d2) && subsumes(&d2, &e) && subsumes(&c2, &e));
        if subsumes(&c, &d) && subsumes(&d, &e) {
            prop_assert!(subsumes(&c, &e));
        }
    }

    #[test]
    fn existential_monotone(c in term(), d in term()) {
        let cd = c.and(&d);
        prop_assert!(subsumes(&Concept::exists("r", cd.clone()), &Concept::exists("r", c.clone())));
        prop_assert_eq!(
            subsumes(&Concept::exists("s", c.clone()), &Concept::exists("s", d.clone())),
            subsumes(&c, &d)
        );
        prop_assert!(!subsumes(&Concept::exists("r", c.clone()), &Concept::exists("s", c.clone())));
    }

    #[test]
    fn witness_characterises_dissubsumption(c in term(), d in term()) {
        match dissubsumption_witness(&c, &d) {
            None => prop_assert!(subsumes(&c, &d)),
            Some(w) => {
                prop_assert!(!subsumes(&c, &d));
                prop_assert!(d.atoms().contains(w));
                prop_assert!(c.atoms().iter().all(|c1| !atom_subsumes(c1, w)));
            }
        }
    }

    #[test]
    fn substitution_preserves_subsumption(c in term(), d in term(), x in ground_term(), y in ground_term()) {
        let sigma: Substitution = [(Symbol::new("X"), x), (Symbol::new("Y"), y)].into_iter().collect();
        let (sc, sd) = (sigma.apply(&c).unwrap(), sigma.apply(&d).unwrap());
        prop_assert!(sc.is_ground() && sd.is_ground());
        if subsumes(&c, &d) {
            prop_assert!(subsumes(&sc, &sd));
        }
        prop_assert!(equivalent(&sigma.apply(&c.and(&d)).unwrap(), &sc.and(&sd)));
    }
}
