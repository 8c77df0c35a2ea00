// Learning rate and forgetting factor from problem constants.

use nalgebra::DMatrix;
use orl::tuning::{path_length, TuningInputs};

pub fn run_example() -> orl::Result<()> {
    for (horizon, budget) in [(100, 0.0), (10_000, 0.0), (10_000, 50.0)] {
        let report = TuningInputs {
            residual_bound: 1.0,
            norm_bound: 1.0,
            horizon,
            path_length: budget,
            experts: 20,
        }
        .report()?;
        println!(
            "T={horizon:6} V_T={budget:5}: lambda_max={} gamma={:.6} ln N/alpha={:.3}",
            report.lambda_max, report.gamma, report.expert_term
        );
    }

    // a comparator that switches once has path length equal to the jump
    let a = DMatrix::from_row_slice(1, 2, &[0.0, 0.5]);
    let b = DMatrix::from_row_slice(1, 2, &[0.0, 0.8]);
    let sequence: Vec<_> = (0..100).map(|t| if t < 50 { a.clone() } else { b.clone() }).collect();
    println!("path length of a single switch: {:.3}", path_length(&sequence)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> orl::Result<()> {
    run_example()
}
