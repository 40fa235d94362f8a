//! Build a report straight from a confusion matrix and show both
//! zero-division policies.

use fwlog::metrics::{ClassificationReport, ConfusionMatrix, ZeroDivision};

pub fn run_example() -> fwlog::Result<(ClassificationReport, ClassificationReport)> {
    // Nothing is ever predicted as reset-both.
    let cm = ConfusionMatrix::new([[50, 1, 0, 0], [2, 30, 3, 0], [0, 4, 20, 0], [1, 0, 0, 0]]);
    let one = ClassificationReport::from_confusion(&cm, ZeroDivision::One);
    let zero = ClassificationReport::from_confusion(&cm, ZeroDivision::Zero);
    println!("zero_division = one\n{}", one.render_text());
    println!("zero_division = zero\n{}", zero.render_text());
    println!("confusion matrix\n{}", cm.to_csv());
    println!("{}", one.render_json()?);
    Ok((one, zero))
}

fn main() -> fwlog::Result<()> {
    run_example().map(|_| ())
}
