//! Deciding linkage of two Pfister forms and checking a common-slot certificate.
use quadlink::dsl::{parse_field, parse_quadratic_symbol};
use quadlink::linkage::{find_certificate, is_linked_pair, CertificateBudget};

fn main() -> quadlink::Result<()> {
    for (field, p1, p2) in [
        ("GF(3)((t))", "<<t; 1]]", "<<t+2; 1]]"),
        ("GF(5)(X)", "<<X; 3]]", "<<X+1; 3]]"),
        ("GF(3)((t))((u))", "<<t, u; 1]]", "<<u, t*u; 1]]"),
    ] {
        let k = parse_field(field)?;
        let q1 = parse_quadratic_symbol(&k, p1)?;
        let q2 = parse_quadratic_symbol(&k, p2)?;
        println!("{field}: {} and {}", q1.display(), q2.display());
        println!("  linked: {}", is_linked_pair(&q1, &q2)?);
        match find_certificate(&q1, &q2, &CertificateBudget::default()) {
            Ok(Some(c)) => {
                println!("  certificate {}", c.to_json());
                println!("  verifies: {}", c.verify(&q1, &q2)?);
            }
            Ok(None) => println!("  no certificate"),
            Err(e) => println!("  {e}"),
        }
    }
    Ok(())
}
