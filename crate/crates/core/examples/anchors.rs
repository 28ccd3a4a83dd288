//! Build offline context anchors for a dataset, save them and map them into
//! model space.

use contextst::context::{align, load_anchors, offline_anchors, HashEmbedder};
use contextst::model::Forecaster;
use contextst::synthetic::SineDomain;

fn main() -> contextst::Result<()> {
    let data = SineDomain::domain_a(500, 1).generate()?;
    let anchors = offline_anchors(&data, "synthetic oscillation", &HashEmbedder::new(16))?;
    let path = std::env::temp_dir().join("sine-a.anchors.json");
    anchors.write(&path)?;
    println!("wrote {} ({} variables, dim {})", path.display(), anchors.variables.len(), anchors.dim);

    let (_, bound) = load_anchors(&path, &data)?;
    let model = Forecaster::new(contextst::experiments::transfer_config().model, 0)?;
    for (name, anchor) in data.variable_names().iter().zip(&bound.variables) {
        let token = align(anchor, &model.params.align, model.config.activation)?;
        let head: Vec<String> = token.iter().take(4).map(|v| format!("{v:+.3}")).collect();
        println!("{name:<10} -> token [{} ...]", head.join(", "));
    }
    Ok(())
}
