// Projection onto the spectral-norm ball in a precision-weighted metric.

use nalgebra::DMatrix;
use orl::rls::{project, project_with, spectral_norm, weighted_distance_sq, ProjectionMethod, ProjectionSettings};

pub fn run_example() -> orl::Result<()> {
    let m_star = DMatrix::from_row_slice(2, 3, &[2.0, 0.5, -1.0, 0.3, 1.5, 0.2]);
    let weight = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0]);
    let bound = 1.0;

    let weighted = project(&m_star, &weight, bound);
    let scaling = ProjectionSettings {
        method: ProjectionMethod::Scaling,
        ..ProjectionSettings::default()
    };
    let scaled = project_with(&m_star, &weight, bound, &scaling);
    println!("‖M*‖ = {:.4}", spectral_norm(&m_star));
    for (name, m) in [("weighted", &weighted), ("scaling", &scaled)] {
        println!(
            "{name:8}: ‖M‖ = {:.6}, weighted distance² = {:.6}",
            spectral_norm(m),
            weighted_distance_sq(m, &m_star, &weight)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> orl::Result<()> {
    run_example()
}
