// Bracket and CSLOGS input, canonical rendering, isomorphism checks.

use std::error::Error;

use treedist::tree::{canonical_code, parse_cslogs_line, structurally_isomorphic};
use treedist::{parse_bracket, render_bracket};

pub fn run() -> Result<(), Box<dyn Error>> {
    let t = parse_bracket("html(body(div(p,ul(li,li)),footer),head(title))")?;
    println!("{} nodes, {} leaves, height {}", t.len(), t.leaves().count(), t.height(t.root()));
    for x in t.nodes() {
        let pad = "  ".repeat(t.depth(x));
        println!("{pad}{} (pre {}, post {})", t.label(x), t.pre_order(x), t.post_order(x));
    }

    // Children are unordered: both spellings render the same way.
    let a = parse_bracket("r(b(y,x),a)")?;
    let b = parse_bracket("r(a,b(x,y))")?;
    println!("{} == {}", render_bracket(&a), render_bracket(&b));
    assert_eq!(render_bracket(&a), render_bracket(&b));
    assert_eq!(canonical_code(&a, a.root()), canonical_code(&b, b.root()));

    // Shape only, labels ignored.
    let c = parse_bracket("q(w,w(w,w))")?;
    println!("same shape as {c}: {}", structurally_isomorphic(&a, a.root(), &c, c.root()));

    let quoted = parse_bracket("'a b'(c,'it''s')")?;
    println!("quoted labels round-trip: {}", render_bracket(&quoted));

    let log = parse_cslogs_line("1 2 -1 3 4 -1 -1", 1)?.expect("record is not blank");
    println!("CSLOGS record -> {}", render_bracket(&log));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
