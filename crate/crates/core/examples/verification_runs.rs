//! Seeded verification runs; the reports are deterministic for a fixed seed.
use quadlink::dsl::parse_field;
use quadlink::linkage::{check_top_d_linked, verify_higher_local_d1, verify_lifting_equivalence, verify_residue_transfer};
use quadlink::qforms::WittOptions;

fn main() -> quadlink::Result<()> {
    let seed = 7;
    let k = parse_field("GF(3)((t))")?;
    let reports = [
        verify_residue_transfer(&k, 1, 1, 50, seed)?,
        verify_lifting_equivalence(&k, 2, 1, 50, seed)?,
        check_top_d_linked(&parse_field("GF(5)((t))((u))")?, 3, 50, seed),
        verify_higher_local_d1(3, 20, seed, &WittOptions::default())?,
    ];
    for r in &reports {
        println!("{} [{}]", r.summary(), if r.passed() { "PASS" } else { "FAIL" });
        println!("  {:?}", r.stats);
    }
    Ok(())
}
