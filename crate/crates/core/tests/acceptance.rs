use std::io::Write;

use cwc::acceptance::{run, Options};

#[test]
fn all_criteria() {
    let outcomes = run(&Options { seed: 2024, ..Options::default() });
    // Straight to the stderr handle so the lines show even when output is captured.
    let mut err = std::io::stderr().lock();
    for o in &outcomes {
        writeln!(err, "{o}").unwrap();
    }
    assert_eq!(outcomes.len(), 12);
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
