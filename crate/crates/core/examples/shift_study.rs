//! Source-only vs adapted target accuracy on the synthetic scenarios.
//!
//! Usage: `shift_study [family] [per_class] [seeds...]`

use moistkit::adapt::TrainConfig;
use moistkit::experiment::shift_experiment;
use moistkit::synth::Shift;
use moistkit::Family;

fn main() -> moistkit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family: Family = args.first().map_or(Ok(Family::Haralick), |s| s.parse())?;
    let per_class = args.get(1).map_or(50, |s| s.parse().expect("per_class"));
    let seeds: Vec<u64> = if args.len() > 2 {
        args[2..].iter().map(|s| s.parse().expect("seed")).collect()
    } else {
        vec![1, 2, 3]
    };
    println!("shift   seed  sourceCV  sourceOnly  adapted   gain");
    for shift in Shift::ALL {
        for &seed in &seeds {
            let lambda = std::env::var("LAMBDA").map_or(0.5, |s| s.parse().expect("LAMBDA"));
            let cfg = TrainConfig { seed, lambda, ..TrainConfig::default() };
            let o = shift_experiment(shift, per_class, family, &cfg)?;
            println!(
                "{:<7} {:>4}  {:>8.3}  {:>10.3}  {:>7.3}  {:>+6.3}",
                shift.as_str(),
                seed,
                o.source_cv_accuracy,
                o.source_only_accuracy,
                o.adapted_accuracy,
                o.gain()
            );
        }
    }
    Ok(())
}
