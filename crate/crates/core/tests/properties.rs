mod common;

use common::*;
use mood1d::stencil::stencil_size;
use mood1d::{CpdMap, FieldVector, Mesh};
use proptest::prelude::*;

fn cpd_map(n: std::ops::Range<usize>) -> impl Strategy<Value = CpdMap> {
    n.prop_flat_map(|n| prop::collection::vec(prop::sample::select(vec![0usize, 1, 2, 5]), n)).prop_map(CpdMap::new)
}

proptest! {
    #[test]
    fn reconstruction_is_conservative(
        phi in prop::collection::vec(-1.0f64..1.0, 12..40),
        d in prop::sample::select(vec![1usize, 2, 3, 4, 5]),
        pick in 0.0f64..1.0,
        adaptive in any::<bool>(),
        degrees in prop::collection::vec(0usize..=5, 40),
    ) {
        let n = phi.len();
        let i = 1 + ((pick * n as f64) as usize).min(n - 1);
        let cpd = CpdMap::new(degrees[..n].to_vec());
        let s = stencil_for(i, d, n, adaptive.then_some(&cpd));
        let defect = conservation_defect(&phi, d, i, &s);
        prop_assert!(defect <= CONSERVATION_TOL, "defect {defect:e}");
    }

    #[test]
    fn reconstruction_reproduces_polynomials(
        d in prop::sample::select(vec![1usize, 2, 5]),
        coeffs in prop::collection::vec(-1.0f64..1.0, 6),
        n in 12usize..60,
        pick in 0.0f64..1.0,
        adaptive in any::<bool>(),
        degrees in prop::collection::vec(0usize..=5, 60),
    ) {
        let i = 1 + ((pick * n as f64) as usize).min(n - 1);
        let cpd = CpdMap::new(degrees[..n].to_vec());
        let s = stencil_for(i, d, n, adaptive.then_some(&cpd));
        let defect = exactness_defect(&coeffs[..=d], n, i, &s);
        prop_assert!(defect <= EXACTNESS_TOL, "defect {defect:e}");
    }

    #[test]
    fn numerical_fluxes_are_consistent(
        phi in -3.0f64..3.0,
        x in 0.0f64..1.0,
        rho in 0.1f64..10.0,
        u in -3.0f64..3.0,
        p in 0.1f64..10.0,
    ) {
        prop_assert_eq!(flux_consistency(phi, x, [rho, u, p]), Ok(()));
    }

    #[test]
    fn euler_primitive_roundtrip(rho in 0.5f64..2.0, u in -1.0f64..1.0, p in 0.5f64..2.0) {
        let defect = roundtrip_defect([rho, u, p]);
        prop_assert!(defect <= ROUNDTRIP_TOL, "defect {defect:e}");
    }

    #[test]
    fn adaptive_stencils_are_well_formed(cpd in cpd_map(7..50), d in prop::sample::select(vec![1usize, 2, 5])) {
        prop_assert_eq!(adaptive_stencil_violation(&cpd, stencil_size(d)), None);
    }

    #[test]
    fn decrement_reaches_a_fixed_point(
        values in prop::collection::vec(-1.0f64..1.0, 8..40),
        degrees in prop::collection::vec(prop::sample::select(vec![0usize, 1, 2, 5]), 40),
    ) {
        let n = values.len();
        let candidate = FieldVector::from_components(vec![values]);
        let applications = decrement_fixed_point(&candidate, &CpdMap::new(degrees[..n].to_vec()));
        prop_assert!(applications.is_ok(), "{applications:?}");
    }

    #[test]
    fn residual_sum_telescopes(
        n in 12usize..50,
        which in 0usize..3,
        noise in prop::collection::vec(-1e-2f64..1e-2, 150),
        degrees in prop::collection::vec(prop::sample::select(vec![0usize, 1, 2, 5]), 50),
    ) {
        let (problem, field) = &telescoping_problems()[which];
        let (a, b) = problem.domain();
        let mut phi = field(&Mesh::new(a, b, n).unwrap());
        for (v, e) in phi.as_mut_slice().iter_mut().zip(&noise) {
            *v *= 1.0 + e;
        }
        let defect = telescoping_defect(&**problem, &phi, &CpdMap::new(degrees[..n].to_vec()));
        prop_assert!(defect <= TELESCOPING_TOL, "defect {defect:e}");
    }
}
