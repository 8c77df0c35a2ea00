// Three offline experts, corrected online and combined by exponential weights.

use orl::datagen::{generate, DynamicsKind, ExpertCorruption, SyntheticScenario};
use orl::ensemble::{EnsembleConfig, ExpertEnsemble};
use orl::rls::RlsParams;

pub fn run_example() -> orl::Result<()> {
    let horizon = 1000;
    let experts = vec![
        ExpertCorruption::exact_then_drifting(horizon / 2, vec![0.3, 0.3]),
        ExpertCorruption::biased(vec![1.0, 1.0]),
        ExpertCorruption::noisy(1.0),
    ];
    let scenario = SyntheticScenario::new(2, 2, horizon, DynamicsKind::DriftingLinear, 0.5, experts, 3);
    let data = generate(&scenario)?;

    let config = EnsembleConfig {
        lambda: 1e-2,
        k: 1,
        p: 2,
        learners: Some(vec![RlsParams::new(2, 2, 0.8, 1.0, 3.0); 3]),
        residual_bound: None,
    };
    let mut ensemble = ExpertEnsemble::new(3, 2, config)?;
    let records = ensemble.run(&data.trajectory, &data.offline)?;

    let mut totals = [0.0; 3];
    let mut aggregate = 0.0;
    for r in &records {
        aggregate += r.loss;
        for (tot, l) in totals.iter_mut().zip(&r.expert_losses) {
            *tot += l;
        }
        if r.t % 200 == 0 {
            println!("t={:4} weights {:.3?}", r.t, r.weights);
        }
    }
    println!("corrected expert losses {totals:.1?}");
    println!("ensemble loss {aggregate:.1}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> orl::Result<()> {
    run_example()
}
