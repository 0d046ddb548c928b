//! Residue forms with respect to rank-1 and rank-2 valuations, and Hensel lifting.
use quadlink::dsl::{parse_field, parse_form};
use quadlink::fields::Element;
use quadlink::valuation::{hensel_lift_isotropic, springer_decompose, ValuationCtx};

fn main() -> quadlink::Result<()> {
    let k = parse_field("GF(3)((t))((u))")?;
    let q = parse_form(&k, "diag[1, 2*t, u, 1+t, t*u]")?;
    for rank in [1, 2] {
        let ctx = ValuationCtx::new(&k, rank)?;
        let dec = springer_decompose(&q, &ctx)?;
        println!("{} at rank {rank}:", q.display());
        println!("{}", serde_json::to_string_pretty(&dec.to_json(&k)).unwrap());
    }

    let k = parse_field("GF(5)((t))")?;
    let q = parse_form(&k, "diag[1, 1+t, 2+t^2]")?;
    let ctx = ValuationCtx::outermost(&k)?;
    // 1 + 1*2^2 = 0 in GF(5)
    let witness = vec![Element::Scalar(1), Element::Scalar(2), Element::Scalar(0)];
    let lift = hensel_lift_isotropic(&q, &ctx, &witness, 8)?;
    let shown: Vec<String> = lift.vector.iter().map(|x| k.display(x)).collect();
    println!("lift of (1, 2, 0) for {}: ({})", q.display(), shown.join(", "));
    println!("exact: {}, q(x) = {}", lift.exact, k.display(&q.evaluate(&lift.vector)));
    Ok(())
}
