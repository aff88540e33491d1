use frw_dirac::fermionic_projector::{fitted_order, limit_comparison, WindowConfig};

#[test]
fn minkowski_limit_error_scales_with_curvature() {
    let m = 1.0;
    let s_list = [20.0, 40.0, 80.0, 160.0];
    let rows = limit_comparison(m, 0.0, 2.0 / m, &s_list, WindowConfig::default()).unwrap();
    assert!(rows.windows(2).all(|w| w[1].rel_error < 1.1 * w[0].rel_error));
    assert!(rows.last().unwrap().rel_error <= 0.05);
    // the deviation is a curvature effect of size (r/S)^2
    let order = fitted_order(&rows);
    assert!((order - 2.0).abs() < 0.1, "order {order}");
    let near = limit_comparison(m, 0.0, 1.0, &s_list, WindowConfig::default()).unwrap();
    for (a, b) in rows.iter().zip(&near) {
        assert!((a.rel_error / b.rel_error - 4.0).abs() < 0.5);
    }
}

#[test]
fn limit_rejects_points_beyond_the_antipode() {
    assert!(limit_comparison(1.0, 0.0, 10.0, &[3.0], WindowConfig::default()).is_err());
}
