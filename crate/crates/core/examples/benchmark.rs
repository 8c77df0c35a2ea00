// All four methods on one synthetic scenario, with ADE and static regret.

use orl::bench::{self, Method, MethodSettings};
use orl::datagen::{generate, standard_expert_mix, DynamicsKind, SyntheticScenario};
use orl::rls::ProjectionSettings;

pub fn run_example() -> orl::Result<()> {
    let horizon = 2000;
    let scenario = SyntheticScenario::new(
        2,
        2,
        horizon,
        DynamicsKind::NonlinearSine,
        0.5,
        standard_expert_mix(2, horizon, 3),
        11,
    );
    let data = generate(&scenario)?;
    let settings = MethodSettings {
        p: 2,
        k: 5,
        lambda: 1e-3,
        gammas: vec![0.8; 3],
        epsilon: 1.0,
        bound: 5.0,
        projection: ProjectionSettings::default(),
        residual_bound: None,
    };
    let streams = bench::residual_streams(&data.trajectory, &data.offline, settings.p, settings.k)?;
    let comparator = bench::hindsight_static_comparator(&streams, settings.bound)?;
    println!("{:16} {:>12} {:>10} {:>10} {:>12}", "method", "cumloss", "ade_sq", "ade_l2", "regret");
    for method in Method::ALL {
        let trace = bench::run_method(method, &data.trajectory, &data.offline, &settings)?;
        let r = bench::summarize(&trace, &comparator)?;
        println!(
            "{:16} {:12.1} {:10.4} {:10.4} {:12.1}",
            method.name(),
            r.cumloss,
            r.ade_sq,
            r.ade_l2,
            r.regret_static
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> orl::Result<()> {
    run_example()
}
