//! Channel files and programmatic use of the command-line analyses.

use qichan::catalog::{example, ExampleId};
use qichan::cli::{channel_from_json, channel_to_json, run, AnalysisRequest, Command, Format};
use qichan::prelude::*;

fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let bundle = example(ExampleId::Teleport)?;
    let text = channel_to_json(&bundle.channel);
    let back = channel_from_json("<memory>", text.as_bytes())?;
    let exact = back.elements().iter().zip(bundle.channel.elements()).all(|(a, b)| a == b);
    println!("{} bytes of JSON, round trip exact: {exact}", text.len());

    let dir = std::env::temp_dir().join("qichan-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("teleport.json");
    std::fs::write(&path, &text)?;

    let req = AnalysisRequest {
        command: Command::Preserved { channel: path },
        tol: Tolerance::default(),
        seed: 0,
        samples: 16,
        out: None,
        format: Format::Json,
    };
    let outcome = run(&req)?;
    println!("exit code {}, digest {}", outcome.exit_code, &outcome.report.inputs_digest[..16]);
    println!("{}", serde_json::to_string_pretty(&outcome.report.results["block_dims"])?);
    Ok(())
}
