// Corrects one biased, drifting offline predictor with a single residual learner.

use orl::datagen::{generate, DynamicsKind, ExpertCorruption, SyntheticScenario};
use orl::residual::{corrected_prediction, residual, squared_loss, ResidualWindow};
use orl::rls::{RlsLearner, RlsParams};

pub fn run_example() -> orl::Result<()> {
    let mut expert = ExpertCorruption::biased(vec![2.0, -1.0]);
    expert.drift_onset = Some(200);
    expert.drift_rate = Some(vec![0.05, 0.02]);
    let scenario = SyntheticScenario::new(2, 2, 600, DynamicsKind::StaticLinear, 0.3, vec![expert], 42);
    let data = generate(&scenario)?;

    let (n, p) = (2, 2);
    let mut learner = RlsLearner::new(RlsParams::new(n, p, 0.95, 1.0, 3.0), None)?;
    let mut window = ResidualWindow::new(n, p)?;
    let (mut raw, mut corrected) = (0.0, 0.0);
    for t in 0..600 {
        let z = window.regressor();
        let truth = data.trajectory.get(t).expect("horizon covered");
        let offline = data.offline.get(0, t).expect("grid complete");
        if t > 0 {
            let prediction = corrected_prediction(&learner.predict(&z)?, offline)?;
            raw += squared_loss(truth, offline)?;
            corrected += squared_loss(truth, &prediction)?;
        }
        let e = residual(truth, offline)?;
        if t > 0 {
            learner.update(&e, &z)?;
        }
        window.push(e)?;
    }
    println!("offline only:  cumulative loss {raw:.1}");
    println!("with residual: cumulative loss {corrected:.1}");
    println!("learned predictor:{}", learner.predictor());
    Ok(())
}

#[allow(dead_code)]
fn main() -> orl::Result<()> {
    run_example()
}
