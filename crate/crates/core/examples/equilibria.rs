//! Rest states, linearizations and admissibility for the four ionic models.

use bidomain_periodic::ionic::{equilibria, linearize, stability_condition, IonicModelSpec};

fn main() -> bidomain_periodic::Result<()> {
    let models = [
        IonicModelSpec::fitzhugh_nagumo(0.1, 1.0, 0.05, 1.0)?,
        IonicModelSpec::aliev_panfilov(0.1, 0.5, 8.0, 1.0)?,
        IonicModelSpec::rogers_mcculloch(0.1, 1.0, 0.01, 1.0, 1.0)?,
        IonicModelSpec::allen_cahn(),
    ];
    for model in &models {
        let set = equilibria(model)?;
        println!("{} (stability condition {})", model.variant.short_name(), stability_condition(model)?.holds);
        for p in &set.points {
            let lin = linearize(model, p);
            println!(
                "  u{} = {:>9.5}  w = {:>9}  alpha {:>9.4} beta {:>7.4} gamma {:>7.4} delta {:>7.4}  admissible {}",
                p.index,
                p.u_star,
                p.w_star.map(|w| format!("{w:.5}")).unwrap_or_else(|| "-".into()),
                lin.alpha,
                lin.beta,
                lin.gamma,
                lin.delta,
                lin.admissible
            );
        }
        if let Some(note) = &set.omitted {
            println!("  omitted: {note}");
        }
    }
    Ok(())
}
