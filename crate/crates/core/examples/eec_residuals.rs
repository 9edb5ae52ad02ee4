//! The six equilibrium conditions evaluated on Hermite pairs `(h_n, h_m)`.
//! Diagonal pairs satisfy all of them; mismatched pairs break the balances.

use odho::eec::{evaluate_eec, EecState, OscillatorConfig};
use odho::grid::make_grid;
use odho::spectrum::hermite_state;

fn main() -> odho::Result<()> {
    let grid = make_grid(8.0, 4097)?;
    let config = OscillatorConfig::new(1.0)?;
    println!("{:>6}  {:>11}  {:>11}  {:>9}  {:>9}  {:>9}  {:>9}", "pair", "balance_q", "balance_l", "norm_F", "norm_psi", "decay", "decay_T");
    for (n, m) in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (1, 0), (2, 0)] {
        let state = EecState::new(hermite_state(n, 1.0, &grid)?, hermite_state(m, 1.0, &grid)?, config)?;
        let r = evaluate_eec(&state);
        println!(
            "({n}, {m})  {:>11.3e}  {:>11.3e}  {:>9.1e}  {:>9.1e}  {:>9.1e}  {:>9.1e}",
            r.balance_q, r.balance_l, r.norm_f_defect, r.norm_psi_defect, r.decay_psi, r.decay_transform
        );
    }
    Ok(())
}
