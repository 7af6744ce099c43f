//! Summary curves of a clustered sequence and pointwise envelopes from the
//! generating model, written as SVG next to a CSV of the bands.
//!
//! Run with `cargo run --release --example summaries_envelopes [out_dir]`.

use std::path::PathBuf;

use sspp::io::{band_csv, write_string};
use sspp::svg::bands_panel_svg;
use sspp::{
    envelopes, simulate, EnvelopeConfig, ModelParams, Result, SimulationConfig, StatisticKind,
    Window,
};

fn main() -> Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("sspp_envelopes"));
    std::fs::create_dir_all(&out)?;

    let window = Window::square(30.0)?;
    let params = ModelParams::new(0.65, 2.60, window)?;
    let data = simulate(&SimulationConfig::new(params, 118, 7))?;

    let config = EnvelopeConfig {
        replicates: 199,
        seed: 11,
        ..EnvelopeConfig::default()
    };
    let bands = envelopes(&data, &params, &StatisticKind::ALL, &config)?;
    for band in &bands {
        println!(
            "{:<18} inside {:>5.1}% of {} indices",
            band.kind.name(),
            100.0 * band.inside_fraction(),
            band.outside.len()
        );
        write_string(
            out.join(format!("envelope_{}.csv", band.kind.name())),
            &band_csv(band),
        )?;
    }
    write_string(out.join("envelopes.svg"), &bands_panel_svg(&bands))?;
    println!("wrote bands to {}", out.display());
    Ok(())
}
