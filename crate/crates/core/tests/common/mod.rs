use proptest::test_runner::{Config, RngSeed};

/// Fixed-seed configuration so that every run explores the same cases.
pub fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x7ace), failure_persistence: None, ..Config::default() }
}
