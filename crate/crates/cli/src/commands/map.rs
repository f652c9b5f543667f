//! `rfmap map`: build a power map from a JSON-lines record file.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use rfmap_core::interpolation::triangulate;
use rfmap_core::pointprocess::Region;
use rfmap_core::powermap::{
    build_map, fuse_records, read_records_jsonl, PeriodogramRecord, PowerMap, QuerySpec,
};

use super::{parse_grid, parse_region4};
use crate::error::CliResult;
use crate::manifest::Manifest;
use crate::proj::{ProjKind, Projection};

#[derive(Debug, Args)]
pub struct MapArgs {
    /// JSON-lines record file
    #[arg(long)]
    pub records: PathBuf,

    #[arg(long)]
    pub f_lo_hz: f64,

    #[arg(long)]
    pub f_hi_hz: f64,

    /// Window start, UTC seconds
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,

    /// Window end, UTC seconds (default: effectively unbounded)
    #[arg(long, default_value_t = 1e18)]
    pub t_end: f64,

    /// Region as X0:X1:Y0:Y1 — km for --proj planar, lon/lat degrees for
    /// --proj equirect
    #[arg(long)]
    pub region: String,

    /// Mesh resolution: N or NXxNY
    #[arg(long, default_value = "101")]
    pub grid: String,

    /// How record lon/lat map to planar km
    #[arg(long, value_enum, default_value_t = ProjKind::Planar)]
    pub proj: ProjKind,

    /// Co-location merge radius, meters
    #[arg(long, default_value_t = 1.0)]
    pub merge_radius_m: f64,

    /// Value reduction for co-located records: mean, median, max
    #[arg(long, default_value = "mean")]
    pub fusion: String,

    /// Also write a nearest-site-filled PGM preview
    #[arg(long)]
    pub fill: bool,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: MapArgs) -> CliResult<()> {
    let [r0, r1, r2, r3] = parse_region4(&args.region)?;
    let (projection, region) = match args.proj {
        ProjKind::Planar => (Projection::Planar, Region::new(r0, r1, r2, r3)?),
        ProjKind::Equirect => {
            // region given as LON0:LON1:LAT0:LAT1 degrees
            let (lon0_deg, lat0_deg) = (0.5 * (r0 + r1), 0.5 * (r2 + r3));
            let p = Projection::Equirect { lat0_deg, lon0_deg };
            let (x_min, y_min) = p.to_km(r2, r0);
            let (x_max, y_max) = p.to_km(r3, r1);
            (p, Region::new(x_min, x_max, y_min, y_max)?)
        }
    };
    let (nx, ny) = parse_grid(&args.grid)?;
    let query = QuerySpec {
        f_lo_hz: args.f_lo_hz,
        f_hi_hz: args.f_hi_hz,
        t_start: args.t_start,
        t_end: args.t_end,
        region,
        grid_nx: nx,
        grid_ny: ny,
        merge_radius_km: args.merge_radius_m / 1000.0,
        fusion_mode: args.fusion.parse()?,
    };
    query.validate()?;

    let wire = read_records_jsonl(&args.records)?;
    let n_read = wire.len();
    let records: Vec<PeriodogramRecord> = wire
        .into_iter()
        .map(|w| w.into_record(|lat, lon| projection.to_km(lat, lon)))
        .collect();
    let fused = fuse_records(&records, &query)?;
    println!(
        "{} records read, {} dropped ({} off-band, {} off-window, {} off-region), {} fused sites",
        n_read,
        fused.dropped.total(),
        fused.dropped.out_of_band,
        fused.dropped.out_of_window,
        fused.dropped.out_of_region,
        fused.triples.len()
    );

    let map = build_map(&fused.triples, &query)?;
    fs::create_dir_all(&args.out)?;
    let mut manifest = Manifest::new("map", json!({ "query": query, "records": n_read }));

    let mut csv = Vec::new();
    map.write_csv(&mut csv)?;
    fs::write(args.out.join("recon.csv"), csv)?;
    let mut pgm = Vec::new();
    map.write_pgm(&mut pgm)?;
    fs::write(args.out.join("recon.pgm"), pgm)?;
    fs::write(
        args.out.join("recon.json"),
        serde_json::to_string_pretty(&map.sidecar_json(None))?,
    )?;
    fs::write(
        args.out.join("triangulation.json"),
        serde_json::to_string_pretty(&triangulate(&fused.triples)?)?,
    )?;
    for name in ["recon.csv", "recon.pgm", "recon.json", "triangulation.json"] {
        manifest.add_artifact(&args.out, name)?;
    }
    if args.fill {
        let mut pgm = Vec::new();
        nearest_filled(&map).write_pgm(&mut pgm)?;
        fs::write(args.out.join("recon_filled.pgm"), pgm)?;
        manifest.add_artifact(&args.out, "recon_filled.pgm")?;
    }

    manifest.set_results(json!({
        "fused_sites": fused.triples.len(),
        "dropped": fused.dropped,
        "unmasked_nodes": map.grid.unmasked_count(),
    }));
    manifest.write(&args.out)?;
    println!(
        "map over {} unmasked nodes; artifacts in {}",
        map.grid.unmasked_count(),
        args.out.display()
    );
    Ok(())
}

/// Display variant with outside-hull nodes filled from the nearest site.
fn nearest_filled(map: &PowerMap) -> PowerMap {
    let mut filled = map.clone();
    for idx in 0..filled.grid.values.len() {
        if !filled.grid.mask[idx] {
            let (x, y) = filled.grid.spec.node(idx);
            let nearest = map
                .sites
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 - x).powi(2) + (a.1 - y).powi(2);
                    let db = (b.0 - x).powi(2) + (b.1 - y).powi(2);
                    da.partial_cmp(&db).unwrap()
                })
                .expect("maps carry at least 3 sites");
            filled.grid.values[idx] = nearest.2;
            filled.grid.mask[idx] = true;
        }
    }
    filled
}
