//! One line per acceptance criterion. Run with `--nocapture` to see the lines
//! of a passing run; a failing run prints them with the failure.

use nilpw::checks::run_all;

#[test]
fn acceptance_criteria() {
    let results = run_all(8);
    println!();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
