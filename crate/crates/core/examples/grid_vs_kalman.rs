//! Cross-check of the grid filter against the closed-form Gaussian filter
//! of the static model.

use filterlab::filters::{kalman_static, run_grid_filter};
use filterlab::measures::GridSpec;
use filterlab::models::{simulate_path, StaticGaussianModel};

fn main() -> filterlab::Result<()> {
    let model = StaticGaussianModel::new(0.0, 1.0, 1.0)?;
    let spec = model.spec()?;
    let path = simulate_path(&spec, 100, 7)?;
    let grid = GridSpec::new(-10.0, 0.005, 4001)?;

    let steps = run_grid_filter(&spec, &path.observations, spec.prior(), &grid)?;
    let exact = kalman_static(&model, model.alpha, &path.observations_1d())?;

    let (mut dm, mut dv) = (0.0f64, 0.0f64);
    for (g, k) in steps.iter().zip(&exact) {
        let (m, v) = g.filter.moments();
        dm = dm.max((m - k.z).abs());
        dv = dv.max((v - k.v).abs());
    }
    let last = exact.last().unwrap();
    println!("final filter: N({:.5}, {:.6}), true X0 = {:.5}", last.z, last.v, path.states[0][0]);
    println!("max |mean error| = {dm:.2e}, max |variance error| = {dv:.2e}");
    Ok(())
}
