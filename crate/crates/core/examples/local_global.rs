//! Hilbert symbols and the local-global rule over GF(q)(X), with explicit witnesses.
use quadlink::dsl::{parse_element, parse_field, parse_form};
use quadlink::localglobal::{find_isotropic_vector, hilbert_symbol_at, isotropy_report, Place};
use quadlink::qforms::WittOptions;

fn main() -> quadlink::Result<()> {
    let k = parse_field("GF(3)(X)")?;
    let a = parse_element(&k, "X")?;
    let b = parse_element(&k, "X+1")?;
    for place in [Place::Finite(vec![0, 1]), Place::Finite(vec![1, 1]), Place::Infinity] {
        println!("(X, X+1) at {place}: {}", hilbert_symbol_at(&k, &a, &b, &place)?);
    }
    for form in ["diag[1, 1, X]", "diag[1, X, -X-1]", "diag[1, X, X^2+1, 2*X+2]", "diag[X, X+1, X+2, 1, 2]"] {
        let q = parse_form(&k, form)?;
        let report = isotropy_report(&q)?;
        println!("{}: isotropic {} by {}", q.display(), report.isotropic, report.rule);
        for v in &report.places {
            println!("  {:<12} isotropic {}", v.place, v.isotropic);
        }
        if report.isotropic {
            if let Some(x) = find_isotropic_vector(&q, &WittOptions::default(), 0)? {
                let shown: Vec<String> = x.iter().map(|c| k.display(c)).collect();
                println!("  witness ({}) -> {}", shown.join(", "), k.display(&q.evaluate(&x)));
            }
        }
    }
    Ok(())
}
