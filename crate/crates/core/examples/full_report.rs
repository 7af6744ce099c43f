//! End-to-end pipeline through the command-line layer: simulate a plot with
//! stem diameters, save it as CSV and run the `report` command on it.
//!
//! Run with `cargo run --release --example full_report [out_dir]`.

use std::path::PathBuf;

use clap::Parser;
use rand::Rng;
use sspp::cli::{run, Cli, Manifest};
use sspp::rng::replicate_rng;
use sspp::{simulate, ModelParams, Result, SimulationConfig, Window};

fn main() -> Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("sspp_report"));
    std::fs::create_dir_all(&out)?;

    let window = Window::square(25.0)?;
    let seq = simulate(&SimulationConfig::new(
        ModelParams::new(0.17, 2.18, window)?,
        120,
        4,
    ))?;
    let mut rng = replicate_rng(4, 1);
    let mut dbh: Vec<f64> = (0..seq.len())
        .map(|_| (rng.random_range(410..2315) as f64) / 100.0)
        .collect();
    dbh.sort_by(|a, b| b.total_cmp(a));
    let mut csv = String::from("x,y,dbh\n");
    for (p, d) in seq.points().iter().zip(&dbh) {
        csv.push_str(&format!("{},{},{}\n", p.x, p.y, d));
    }
    let input = out.join("plot.csv");
    std::fs::write(&input, csv)?;

    let report_dir = out.join("report");
    let cli = Cli::parse_from([
        "sspp",
        "report",
        "--input",
        input.to_str().unwrap(),
        "--window",
        "0,0,25,25",
        "--out",
        report_dir.to_str().unwrap(),
        "--bootstrap",
        "20",
        "--replicates",
        "99",
        "--n-sim",
        "199",
        "--seed",
        "4",
    ]);
    run(&cli)?;

    let manifest: Manifest =
        serde_json::from_str(&std::fs::read_to_string(report_dir.join("manifest.json"))?)?;
    println!(
        "theta_hat = {:.3}  CI {:?}",
        manifest.theta_hat, manifest.theta_ci
    );
    println!("r_hat     = {:.3}  CI {:?}", manifest.r_hat, manifest.r_ci);
    println!("CSR p     = {:.3}", manifest.p_csr);
    println!(
        "files in {}: {}",
        report_dir.display(),
        manifest.files.join(", ")
    );
    Ok(())
}
