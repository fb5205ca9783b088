use ftselect::{select_approx, Comparator, Constants, GroundTruth, NoisyOracle, TopLevelConfig};

fn main() -> ftselect::Result<()> {
    let truth = GroundTruth::new(100_000, 30_000, 0.15, 7)?;
    let mut oracle = NoisyOracle::new(&truth, 0.25, 7)?;
    let cfg = TopLevelConfig::new(0.1)?;
    let out = select_approx(&mut oracle, &truth.population(), truth.working_k(), 0.15, &cfg, Constants::scaled(0.01)?)?;
    println!(
        "rank {} relevant {} calls {} rounds {}",
        truth.rank(out.element).unwrap(),
        truth.is_relevant(out.element),
        oracle.calls(),
        out.rounds
    );
    Ok(())
}
