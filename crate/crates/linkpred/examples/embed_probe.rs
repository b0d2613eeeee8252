//! Times the embedding stage on a synthetic preferential-attachment graph.
//! Usage: embed_probe <vertices> [dim]

use std::time::Instant;

use linkpred::predictors::embed;
use linkpred::spectral::EigenOptions;
use linkpred::synth;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(25_000);
    let dim: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(8);
    let g = synth::preferential_attachment(n, 10, 7);
    eprintln!("graph: {} vertices, {} edges", g.vertex_count(), g.edge_count());
    let t0 = Instant::now();
    let emb = embed(&g, dim, &EigenOptions::default()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    eprintln!(
        "embed: dim {} in {:.2} s, eigenvalues {:?}",
        emb.dim(),
        secs,
        emb.eigenvalues()
    );
}
