//! Inspect how the context-conditioned router spreads tokens over experts.

use contextst::experiments::transfer_config;
use contextst::model::Forecaster;
use contextst::synthetic::SineDomain;
use contextst::train::RoutingCounts;

fn main() -> contextst::Result<()> {
    let cfg = transfer_config();
    let data = SineDomain::domain_a(200, 3).generate()?;
    let anchors = cfg.source_anchors(&data)?;
    let model = Forecaster::new(cfg.model.clone(), 1)?;
    let series = &data.variables[0].values;

    let mut counts = RoutingCounts::new(cfg.model.experts, cfg.model.top_r);
    for start in (0..100).step_by(10) {
        let trace = model.predict(&series[start..start + cfg.model.lookback], &anchors.variables[0], &anchors.global)?;
        counts.add_trace(&trace);
        if start == 0 {
            let table = &trace.routes[0][0];
            for (t, sel) in table.selected.iter().enumerate() {
                println!("token {t}: experts {sel:?} with weights {:.3}", table.gates.row(t));
            }
        }
    }
    let stats = counts.stats().expect("routed model");
    println!("F = {:.3?}", stats.f);
    println!("P = {:.3?}", stats.p);
    println!("load-balance loss {:.4} over {} tokens (1 is perfectly balanced)", stats.l_load, stats.tokens);
    Ok(())
}
