// k-step-ahead prediction: truth for a forecast arrives k steps later, so k
// learners take turns on the residue classes t mod k.

use nalgebra::DVector;
use orl::residual::RegressorVector;
use orl::rls::{KStepLearnerBank, RlsParams};

pub fn run_example() -> orl::Result<()> {
    let k = 4;
    let mut bank = KStepLearnerBank::new(k, RlsParams::new(1, 1, 1.0, 1e-3, 5.0))?;

    // e_t = 10·0.9^t: the k-step relation e_t = 0.9^k · e_{t-k} is exactly linear
    let e = |t: i64| DVector::from_element(1, 10.0 * 0.9f64.powi(t as i32));
    let z = |t: i64| RegressorVector::new(e(t));
    for t in 0..40i64 {
        if t >= k as i64 {
            bank.update_at(t, &e(t), &z(t - k as i64))?;
        }
        let forecast = bank.predict_at(t, &z(t))?;
        if t % 8 == 0 {
            println!(
                "t={t:2} learner {} predicts e_{}={:.5} (true {:.5})",
                bank.learner_index(t),
                t + k as i64,
                forecast[0],
                e(t + k as i64)[0]
            );
        }
    }
    for (j, learner) in bank.learners().iter().enumerate() {
        println!("learner {j}: {} updates, M = {:.5}", learner.steps_seen(), learner.predictor()[(0, 0)]);
    }
    println!("target coefficient 0.9^{k} = {:.5}", 0.9f64.powi(k as i32));
    Ok(())
}

#[allow(dead_code)]
fn main() -> orl::Result<()> {
    run_example()
}
