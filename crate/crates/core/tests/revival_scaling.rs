use num_complex::Complex64;
use talbot_core::dispersive::dispersive_coefficients;
use talbot_core::fock::{build_hamiltonian, TruncationSpec};
use talbot_core::propagation::{coherent_state, position_series, time_grid};
use talbot_core::spectral::diagonalize;
use talbot_core::talbot::{detect_revival, fit_inverse_lambda, RevivalThresholds};

fn first_revival(lambda: f64) -> f64 {
    let h = build_hamiltonian(TruncationSpec::new(128).unwrap(), lambda).unwrap();
    let d = diagonalize(&h, lambda).unwrap();
    let psi = coherent_state(Complex64::new(0.0, 4.0), 128).unwrap();
    let t = time_grid(0.0, 600.0, 0.05).unwrap();
    let s = position_series(&d, &psi, &t).unwrap();
    let k = dispersive_coefficients(lambda).unwrap();
    let r = detect_revival(&s, &k, RevivalThresholds::default()).unwrap();
    r.first_revival().expect("a revival within [0, 600]")
}

#[test]
fn first_revival_scales_inversely_with_lambda() {
    let lambdas = [0.01, 0.02, 0.04];
    let times: Vec<f64> = lambdas.iter().map(|&l| first_revival(l)).collect();
    let (c, worst) = fit_inverse_lambda(&lambdas, &times).unwrap();
    assert!(
        worst <= 0.20,
        "T = c/lambda fit: c = {c:.3}, revivals {times:?}, worst relative residual {worst:.3}"
    );
}
