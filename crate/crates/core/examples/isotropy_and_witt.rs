//! Isotropy, Witt decomposition and isometry of diagonal forms.
use quadlink::dsl::{parse_field, parse_form};
use quadlink::qforms::{is_isotropic, isometric, witt_decompose};

fn main() -> quadlink::Result<()> {
    let cases = [
        ("GF(5)", "diag[1, 1]"),
        ("GF(3)", "diag[1, 1]"),
        ("GF(3)((t))", "diag[1, 1, t, t]"),
        ("GF(3)((t))", "diag[1, -1, t, 2*t, 1+t]"),
        ("GF(3)((t))((u))", "diag[1, t, u, t*u]"),
        ("GF(5)(X)", "diag[1, X, -X-1]"),
        ("GF(3)(X)", "diag[1, 1, X, X^2+1]"),
    ];
    for (field, form) in cases {
        let k = parse_field(field)?;
        let q = parse_form(&k, form)?;
        let w = witt_decompose(&q)?;
        println!(
            "{field:<16} {:<28} isotropic: {:<5} index {} kernel {}",
            q.display(),
            is_isotropic(&q)?,
            w.witt_index,
            w.anisotropic_kernel.display()
        );
    }
    let k = parse_field("GF(3)((t))")?;
    let q1 = parse_form(&k, "diag[1, t]")?;
    let q2 = parse_form(&k, "diag[1+t, t+t^2]")?;
    println!("{} ~ {}: {}", q1.display(), q2.display(), isometric(&q1, &q2)?);
    Ok(())
}
