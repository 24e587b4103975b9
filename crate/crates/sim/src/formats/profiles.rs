//! Profile tables as `id,r,nominal_psnr_db,description` lines.
//! Blank lines, `#` comments and an `id,...` header line are skipped.

use std::fs;
use std::path::Path;

use gvif_core::gsm::{CoderProfile, ProfileTable};

use crate::error::{format_err, io_err, Result};

pub fn parse(text: &str) -> Result<ProfileTable> {
    let mut profiles = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("id,") {
            continue;
        }
        let mut parts = line.splitn(4, ',');
        let mut next = |name: &str| {
            parts
                .next()
                .map(str::trim)
                .ok_or_else(|| format_err("profile table", format!("line {}: missing {name}", n + 1)))
        };
        let id = next("id")?;
        let r = next("r")?;
        let psnr = next("nominal_psnr_db")?;
        let description = next("description").unwrap_or("").to_string();
        let bad = |what: &str, v: &str| format_err("profile table", format!("line {}: bad {what} {v:?}", n + 1));
        profiles.push(CoderProfile {
            id: id.parse().map_err(|_| bad("id", id))?,
            shrink_ratio: r.parse().map_err(|_| bad("r", r))?,
            nominal_psnr_db: psnr.parse().map_err(|_| bad("psnr", psnr))?,
            description,
        });
    }
    Ok(ProfileTable::new(profiles)?)
}

pub fn render(table: &ProfileTable) -> String {
    let mut out = String::from("id,r,nominal_psnr_db,description\n");
    for p in table.profiles() {
        out.push_str(&format!("{},{},{},{}\n", p.id, p.shrink_ratio, p.nominal_psnr_db, p.description));
    }
    out
}

pub fn read(path: &Path) -> Result<ProfileTable> {
    parse(&fs::read_to_string(path).map_err(io_err(path))?)
}

pub fn write(path: &Path, table: &ProfileTable) -> Result<()> {
    fs::write(path, render(table)).map_err(io_err(path))
}
