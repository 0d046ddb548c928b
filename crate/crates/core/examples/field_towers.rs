//! Arithmetic, valuations and square tests in a few towers.
use quadlink::dsl::{parse_element, parse_field};
use quadlink::fields;

fn main() -> quadlink::Result<()> {
    for (field, elems) in [
        ("GF(9)", vec!["g", "g^2", "g+1"]),
        ("GF(3)((t))", vec!["1+t", "2*t^3", "(1+t)^2/t"]),
        ("GF(5)((t))((u))", vec!["t*u", "2+u", "3*t^2*u^-1"]),
        ("GF(3)(X)", vec!["X^2+2*X+1", "X/(X+1)"]),
    ] {
        let k = parse_field(field)?;
        println!("{k}");
        for src in elems {
            let a = parse_element(&k, src)?;
            let square = fields::is_square(&k, &a)?;
            match fields::valuation(&k, &a) {
                Ok(v) if v.rank() > 0 => println!("  {:<16} v = {:?}  square: {square}", k.display(&a), v.0),
                _ => println!("  {:<16} square: {square}", k.display(&a)),
            }
        }
    }
    let k = parse_field("GF(7)((t))")?;
    let a = parse_element(&k, "3+t")?;
    let b = k.inv(&a)?;
    println!("(3+t)^-1 = {}", k.display(&b));
    println!("check: {}", k.display(&k.mul(&a, &b)));
    Ok(())
}
