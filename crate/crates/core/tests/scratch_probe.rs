use gibbs_scope_core::bifurcation::*;
use gibbs_scope_core::kernel::*;

#[test]
fn probe_epsilon_star_meanfield() {
    let grid = QuadratureGrid::default_grid();
    let spec = HeatKernelSpec::new(1.0, KernelConvention::FourierQt).unwrap();
    let start = std::time::Instant::now();
    match epsilon_star(5.0, 0.16, &spec, (0.3, 0.4), 1e-10, &grid) {
        Ok(r) => println!(
            "eps*={:.10} width={:.2e} iters={} diff={:.3e} lower={:.6}@{:.6} upper={:.6}@{:.6} elapsed={:?}",
            r.epsilon,
            r.bracket_width,
            r.iterations,
            r.depth_difference,
            r.lower_basin.location,
            r.lower_basin.depth,
            r.upper_basin.location,
            r.upper_basin.depth,
            start.elapsed()
        ),
        Err(e) => println!("error: {e}"),
    }
    // alternate convention sensitivity
    let spec_pt = HeatKernelSpec::new(1.0, KernelConvention::WrappedPt).unwrap();
    match epsilon_star(5.0, 0.16, &spec_pt, (0.2, 0.6), 1e-10, &grid) {
        Ok(r) => println!("wrapped-pt eps*={:.10}", r.epsilon),
        Err(e) => println!("wrapped-pt error: {e}"),
    }
}

#[test]
fn probe_basin_sides() {
    let grid = QuadratureGrid::default_grid();
    let spec = HeatKernelSpec::new(1.0, KernelConvention::FourierQt).unwrap();
    for eps in [0.3, 0.33, 0.3348, 0.34, 0.4] {
        let side = global_basin_side(5.0, 0.16, eps, &spec, &grid);
        println!("eps={eps}: global side {side:?}");
    }
}
