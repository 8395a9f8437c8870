// Label-dependent costs with a scale, exact rational output, and metric
// validation.

use std::error::Error;

use treedist::cost::validate_metric;
use treedist::{distance, parse_bracket, CostFunction, DistanceClass, Method, SolverConfig};

const COSTS: &str = "\
scale 2
default-sub 2
default-del 2
default-ins 2
# vowels are cheap to swap
sub a e 1
sub e a 1
del x 3
ins x 3
";

pub fn run() -> Result<(), Box<dyn Error>> {
    let cost = CostFunction::parse(COSTS)?;
    let t1 = parse_bracket("r(a,b(x),c)")?;
    let t2 = parse_bracket("r(e,b,c(x))")?;
    let alphabet: Vec<_> = t1.labels().iter().chain(t2.labels()).cloned().collect();
    let violations = validate_metric(&cost, &alphabet);
    println!("metric violations: {violations:?}");
    assert!(violations.is_empty());

    for class in DistanceClass::ALL {
        let r = distance(&t1, &t2, &cost, class, Method::Dp, &SolverConfig::default())?;
        println!("{class:>6}: {} (scaled {})", cost.render(r.distance), r.distance);
    }

    let broken = CostFunction::parse("scale 1\nsub a b 5\n")?;
    let ab: Vec<_> = ["a", "b"].iter().map(|s| treedist::Label::new(s)).collect::<Result<_, _>>()?;
    for v in validate_metric(&broken, &ab) {
        println!("rejected: {v}");
    }
    let clamped = broken.allow_nonmetric();
    let r = distance(
        &parse_bracket("a")?,
        &parse_bracket("b")?,
        &clamped,
        DistanceClass::Edit,
        Method::Dp,
        &SolverConfig::default(),
    )?;
    println!("clamped a -> b: {}", clamped.render(r.distance));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
