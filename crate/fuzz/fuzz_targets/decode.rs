#![no_main]

//! Layout: byte 0 picks `m`, byte 1 picks `N`, byte 2 the exponent, byte 3
//! the noise level; the rest fills `Phi` and `y` as small signed integers.

use libfuzzer_sys::fuzz_target;
use lpcs::solver::{decode, residual_lp, SolverConfig};
use lpcs::{Error, PExponent, RecoveryProblem, SenseMatrix};

fuzz_target!(|data: &[u8]| {
    if data.len() < 4 {
        return;
    }
    let m = 1 + (data[0] % 4) as usize;
    let n = 1 + (data[1] % 6) as usize;
    let p = match data[2] % 4 {
        0 => PExponent::ONE,
        1 => PExponent::TWO,
        2 => PExponent::Finite(3.0),
        _ => PExponent::Infinity,
    };
    let eps = (data[3] % 8) as f64 / 4.0;
    let mut vals = data[4..].iter().map(|b| (*b as i8) as f64 / 16.0).chain(std::iter::repeat(0.0));
    let phi_data: Vec<f64> = vals.by_ref().take(m * n).collect();
    let y: Vec<f64> = vals.take(m).collect();
    let phi = SenseMatrix::new(m, n, phi_data).unwrap();
    let problem = RecoveryProblem::new(phi, y, eps, p).unwrap();
    let cfg = SolverConfig {
        max_iterations: 2000,
        ..SolverConfig::default()
    };
    match decode(&problem, &cfg) {
        Ok(r) => {
            assert!(r.objective.is_finite());
            let res = residual_lp(&problem, &r.solution).unwrap();
            assert!(!r.converged || res <= eps + 1e-6 * (1.0 + eps));
        }
        Err(Error::Infeasible { min_residual, .. }) => assert!(min_residual > eps),
        Err(e) => panic!("unexpected error {e}"),
    }
});
