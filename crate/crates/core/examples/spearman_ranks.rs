//! Fractional ranks and rank correlation, including ties and a constant sample.

use regunc::{rank_vector, spearman_rho, Error};

fn main() -> regunc::Result<()> {
    let u = [0.2, 1.2, 0.9, 0.5, 0.1];
    println!("ranks of {u:?} = {:?}", rank_vector(&u)?.as_slice());

    let tied = [3.0, 1.0, 3.0, 2.0];
    println!("ranks of {tied:?} = {:?}", rank_vector(&tied)?.as_slice());

    let e = [0.4, 2.0, 1.1, 0.6, 0.3];
    println!("rho(u, e) = {}", spearman_rho(&u, &e)?);
    let e: Vec<f64> = e.iter().map(|v: &f64| v.ln()).collect();
    println!("rho(u, ln e) = {}", spearman_rho(&u, &e)?);

    match spearman_rho(&u, &[1.0; 5]) {
        Err(Error::Degenerate(msg)) => println!("constant error sample: {msg}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
