//! Residues of quadratic Pfister forms over Laurent towers.
use quadlink::dsl::{parse_field, parse_quadratic_symbol};
use quadlink::pfister::pfister_residues;
use quadlink::valuation::{springer_decompose, ValuationCtx};

fn main() -> quadlink::Result<()> {
    for (field, rank, symbol) in [
        ("GF(3)((t))", 1, "<<t; 1]]"),
        ("GF(5)((t))", 1, "<<2, t; 3]]"),
        ("GF(3)((t))((u))", 2, "<<t, u; 1]]"),
    ] {
        let k = parse_field(field)?;
        let ctx = ValuationCtx::new(&k, rank)?;
        let s = parse_quadratic_symbol(&k, symbol)?;
        match pfister_residues(&s, &ctx) {
            Ok(r) => println!("{field} {}:\n{}", s.display(), serde_json::to_string(&r.to_json()).unwrap()),
            Err(e) => println!("{field} {}: {e}", s.display()),
        }
        let dec = springer_decompose(&s.expand(), &ctx)?;
        let parts: Vec<String> = dec.parts.iter().map(|p| p.display()).collect();
        println!("  residue parts of the expansion: {}", parts.join(" | "));
    }
    Ok(())
}
