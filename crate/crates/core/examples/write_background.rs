//! Regenerates `data/background.txt` from the default background settings.

use std::collections::BTreeSet;

use seednmf::synth::{default_spec, generate_background, BackgroundSpec};

fn main() -> anyhow::Result<()> {
    let exclude: BTreeSet<String> = default_spec().all_words().into_iter().collect();
    let corpus = generate_background(&BackgroundSpec::default(), &exclude)?;
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/background.txt");
    std::fs::write(path, corpus.to_text())?;
    println!("wrote {} documents to {path}", corpus.len());
    Ok(())
}
