//! Analyzes the maximal-rank 5-web and integrates its abelian relations.

use jetpde::{analyze_web, wc_family, Rat, RatWebAnalysis, WebOptions};
use num_traits::Zero;

fn main() -> jetpde::Result<()> {
    let web = wc_family(2, &Rat::zero(), None)?;
    let out: RatWebAnalysis = analyze_web(&web, &WebOptions::default())?;
    assert_eq!(out.damiano_bound, 6);
    assert!(out.flatness.flat);
    let sections = out.connection.integrate_flat_sections(3)?;
    assert_eq!(sections.len(), 6); // six independent abelian-relation jets
    println!(
        "rank bound {} attained: {} flat sections integrated",
        out.damiano_bound,
        sections.len()
    );
    Ok(())
}
