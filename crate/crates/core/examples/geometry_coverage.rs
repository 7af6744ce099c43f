//! Raster coverage of disc unions against closed-form areas.
//!
//! Run with `cargo run --release --example geometry_coverage`.

use std::f64::consts::PI;

use sspp::geometry::union_disc_area;
use sspp::{CoverageRaster, Point, Result, Window};

/// Area of the union of two equal discs whose centers are `d` apart.
fn two_disc_union(r: f64, d: f64) -> f64 {
    let lens = if d >= 2.0 * r {
        0.0
    } else {
        2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt()
    };
    2.0 * PI * r * r - lens
}

fn main() -> Result<()> {
    let window = Window::unit();
    let r = 0.1;
    println!("single disc, r = {r}");
    for cells_per_radius in [5.0, 10.0, 25.0, 50.0, 100.0] {
        let h = r / cells_per_radius;
        let area = union_disc_area(&[Point::new(0.5, 0.5)], r, window, h)?;
        let rel = (area - PI * r * r).abs() / (PI * r * r);
        println!("  h = r/{cells_per_radius:<5} area = {area:.6}  relative error = {rel:.2e}");
    }

    println!("two discs, r = {r}, h = r/100");
    let h = r / 100.0;
    for d in [0.0, 0.05, 0.1, 0.15, 0.2] {
        let mut raster = CoverageRaster::new(window, h)?;
        raster.add_disc(Point::new(0.4, 0.5), r)?;
        let second = raster.add_disc(Point::new(0.4 + d, 0.5), r)?;
        let exact = two_disc_union(r, d);
        println!(
            "  d = {d:.2}  union = {:.6}  exact = {exact:.6}  new-area share = {:.4} (exact {:.4})",
            raster.covered_area(),
            second.delta_area / second.disc_area,
            (exact - PI * r * r) / (PI * r * r)
        );
    }

    let corner = union_disc_area(&[Point::new(0.0, 0.0)], r, window, h)?;
    println!(
        "disc centered on a corner: {corner:.6} (exact quarter {:.6})",
        PI * r * r / 4.0
    );
    Ok(())
}
