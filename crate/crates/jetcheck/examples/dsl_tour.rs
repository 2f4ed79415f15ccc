//! Tour of the `.jet` text format: parsing, the shape of diagnostics,
//! printing back to text, and the parse/serialize round trip. Run with
//! `cargo run --example dsl_tour`.

use jetcheck::{expr_to_string, parse, parse_expr, serialize};

fn main() {
    // A file is a sequence of system / map / certificate declarations.
    let text = "
# A system, its copy under a shear, and the change of coordinates.
system Plant {
  states: p, v, u;
  controls: v, u;
  equations:
    D(p) = v + u^2;
  domain: u != 0;
}

system Sheared {
  states: q, w, s;
  controls: w, s;
  equations:
    D(q) = w + s^2 - s;
}

map Shear : Plant -> Sheared order 0 {
  q = p;
  w = v + u;
  s = u;
}
";
    let file = parse(text).expect("well-formed input");
    println!("parsed {} declarations; printed back:\n", file.decls.len());
    let printed = serialize(&file);
    println!("{printed}");
    assert_eq!(parse(&printed).unwrap(), file, "round trip is exact");

    // Expressions carry exact rational constants and derivative notation.
    for input in ["1/2*x - 0.25", "D(x, 3) - D3(x)", "-(a + b)/c^2"] {
        let e = parse_expr(input).expect("well-formed expression");
        println!("{input:24} parses to {}", expr_to_string(&e));
    }

    // Diagnostics point at the offending token and list what would parse.
    for bad in [
        "system S { states: x1 }",
        "system S { states: x1; controls: ; equations: D(x1) = x2^1.5; }",
        "map M : A -> B order -1 { }",
    ] {
        let err = parse(bad).unwrap_err();
        println!("{bad}\n  -> {err}");
    }
}
