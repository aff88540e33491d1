use std::f64::consts::PI;

use frw_dirac::linalg::re;
use frw_dirac::time_dynamics::{
    compare_wkb_ode, smeared_normalization_check, OdeOptions, ScaleFunction, SmearConfig, WkbSolution,
};

#[test]
fn wkb_error_bounded_by_integrated_indicator() {
    let c2 = re((2.0 * PI).powf(-0.5));
    for lambda in [1.5, 5.5] {
        for ms in [10.0, 100.0] {
            let sf = ScaleFunction::cycloid(ms).unwrap();
            let taus: Vec<f64> = (0..=60).map(|i| 0.5 * PI + PI * f64::from(i) / 60.0).collect();
            let wkb = WkbSolution::new(lambda, 1.0, &sf, re(0.0), c2, PI);
            let cmp = compare_wkb_ode(&wkb, &taus, OdeOptions::with_tol(1e-11)).unwrap();
            let ratio = cmp.sup_error / cmp.integrated_indicator;
            println!("lambda={lambda} mS={ms}: sup={:.3e} int={:.3e} ratio={ratio:.3}", cmp.sup_error, cmp.integrated_indicator);
            assert!(ratio <= 5.0);
            assert!(cmp.norm_drift < 1e-8);
        }
    }
}

#[test]
fn smeared_normalization_matches_saddle_point() {
    let c2 = re((2.0 * PI).powf(-0.5));
    for sf in [ScaleFunction::cycloid(200.0).unwrap(), ScaleFunction::constant(200.0).unwrap()] {
        let r = smeared_normalization_check(1.5, &sf, 1.0, 0.05, PI, re(0.0), c2, SmearConfig::default()).unwrap();
        println!("{sf:?}: {r:?}");
        assert!(r.converged);
        assert!((r.numeric / r.predicted - 1.0).abs() <= 0.05);
    }
}

#[test]
fn mixed_frequency_terms_are_suppressed() {
    let a = re(0.5 * PI.powf(-0.5));
    let sf = ScaleFunction::cycloid(200.0).unwrap();
    let r = smeared_normalization_check(1.5, &sf, 1.0, 0.05, PI, a, a, SmearConfig::default()).unwrap();
    let same = 2.0 * PI * a.norm_sqr();
    println!("{r:?}");
    assert!(r.cross_term.abs() <= 1e-2 * same);
}
