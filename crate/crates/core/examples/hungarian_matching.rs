// Maximum-weight matchings and bijections with forbidden cells.

use std::error::Error;

use treedist::matching::{
    exhaustive_bijection, exhaustive_matching, max_weight_bijection, max_weight_matching, WeightMatrix,
};

pub fn run() -> Result<(), Box<dyn Error>> {
    let w = WeightMatrix::from_rows(vec![
        vec![Some(7), None, Some(3)],
        vec![Some(2), Some(9), None],
        vec![None, Some(4), Some(6)],
        vec![Some(5), Some(1), Some(8)],
    ]);
    println!("{w:?}");

    let m = max_weight_matching(&w);
    println!("matching value {} via {:?}", m.value, m.pairs);
    assert_eq!(m.value, exhaustive_matching(&w));

    // Every row must be used; the fourth row has no partner left.
    println!("bijection on 4x3: {:?}", max_weight_bijection(&w).map(|b| b.value));

    let square = WeightMatrix::from_weights(&[vec![1, 2], vec![3, 4]]);
    let b = max_weight_bijection(&square).expect("a square matrix without forbidden cells has a bijection");
    println!("bijection on [[1,2],[3,4]]: value {} via {:?}", b.value, b.pairs);
    assert_eq!(Some(b.value), exhaustive_bijection(&square));

    let mut blocked = WeightMatrix::new(2, 2);
    blocked.set(0, 0, 5);
    blocked.forbid(0, 1);
    blocked.set(1, 0, 5);
    blocked.forbid(1, 1);
    println!("bijection with a dead column: {:?}", max_weight_bijection(&blocked).map(|b| b.value));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
