//! Moving a unit into the last slot of a bilinear Pfister symbol, with a replayable trace.
use quadlink::dsl::{parse_bilinear_symbol, parse_field, parse_quadratic_symbol};
use quadlink::pfister::{good_slot_presentation, normalize_last_slot};
use quadlink::qforms::isometric;
use quadlink::valuation::ValuationCtx;

fn main() -> quadlink::Result<()> {
    for (field, symbol) in [
        ("GF(3)((t))", "<<t, 2*t>>"),
        ("GF(5)((t))", "<<t, 2*t, t^3>>"),
        ("GF(3)((t))((u))", "<<t, u, t*u*(1+t)>>"),
    ] {
        let k = parse_field(field)?;
        let ctx = ValuationCtx::composed(&k)?;
        let s = parse_bilinear_symbol(&k, symbol)?;
        let (out, trace) = normalize_last_slot(&s, &ctx)?;
        println!("{field}: {} -> {}", s.display(), out.display());
        for step in &trace.steps {
            println!("  {}", step.rule.describe(&k));
        }
        println!("  isometric: {}, replay agrees: {}", isometric(&s.expand(), &out.expand())?, trace.replay(&s)? == out);
    }
    let k = parse_field("GF(3)((t))")?;
    let ctx = ValuationCtx::outermost(&k)?;
    let s = parse_quadratic_symbol(&k, "<<t, 1+t; t]]")?;
    let good = good_slot_presentation(&s, Some(&ctx))?;
    println!("{} -> {}", s.display(), good.display());
    Ok(())
}
