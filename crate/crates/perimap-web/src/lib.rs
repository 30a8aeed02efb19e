//! Browser bindings for the perimap census engine.
//!
//! Three operations back the demo page: a single-cell census with its orbit
//! histogram, a density curve over a list of cutoffs, and a small conformance
//! summary. Each returns a JSON string; failures come back as
//! `{"error": "..."}` so the page can render them without an exception
//! boundary. Everything is deterministic and synchronous — the inputs are
//! capped so a call stays comfortably inside a frame budget.

use perimap::dynamics::{CensusEngine, Family, Limits, MapSpec};
use perimap::ffield::make_field;
use perimap::stats::{
    self, conformance_matrix, density_estimate, Convention, DensityPredicate, SweepSpec,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Keeps interactive calls snappy: at most a quarter-million field elements
/// per census and modest sweep grids.
fn demo_limits() -> Limits {
    Limits {
        max_q: 250_000,
        max_poly_degree: 4096,
    }
}

fn err_json(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn parse_family(family: &str) -> Result<Family, String> {
    match family {
        "pl" => Ok(Family::PrimePower),
        "pm1l" => Ok(Family::PMinusOnePower),
        other => Err(format!("unknown family {other:?}; use pl or pm1l")),
    }
}

fn census_impl(family: &str, p: u64, ell: u32, n: usize, c: i64) -> Result<String, String> {
    let family = parse_family(family)?;
    let m = match family {
        Family::PrimePower => MapSpec::prime_power(p, ell, c),
        Family::PMinusOnePower => MapSpec::p_minus_one_power(p, ell, c),
        Family::RawExponent => unreachable!(),
    }
    .map_err(|e| e.to_string())?;
    let ctx = make_field(p, n).map_err(|e| e.to_string())?;
    let engine = CensusEngine::new(&ctx, &demo_limits()).map_err(|e| e.to_string())?;
    let census = engine.census(&m).map_err(|e| e.to_string())?;
    let orbits = engine.orbit_census(&m).map_err(|e| e.to_string())?;
    Ok(json!({
        "family": family.label(),
        "p": p,
        "ell": ell,
        "n": n,
        "c": c,
        "degree": m.degree_int(),
        "census": census,
        "orbit": {
            "histogram": orbits.cycle_length_histogram,
            "tail_points": orbits.tail_point_count,
        },
    })
    .to_string())
}

/// Census of one (field, map) cell plus its full cycle-length histogram.
#[wasm_bindgen]
pub fn census_json(family: &str, p: u32, ell: u32, n: u32, c: i32) -> String {
    match census_impl(family, p as u64, ell, n as usize, c as i64) {
        Ok(body) => body,
        Err(msg) => err_json(msg),
    }
}

fn density_impl(predicate: &str, family: &str, cutoffs: &str) -> Result<String, String> {
    let family = parse_family(family)?;
    let predicate = DensityPredicate::parse(predicate)
        .ok_or_else(|| format!("unknown predicate {predicate:?}"))?;
    let mut points = Vec::new();
    for part in cutoffs.split(',') {
        let cutoff: u64 = part
            .trim()
            .parse()
            .map_err(|_| format!("bad cutoff {part:?}"))?;
        if cutoff > 200_000 {
            return Err(format!("cutoff {cutoff} is above the demo cap of 200000"));
        }
        let spec = SweepSpec {
            family,
            ell: 1,
            convention: Convention::Div2Sub,
            cutoff,
            coeff_filter: None,
        };
        let est = density_estimate(&spec, predicate).map_err(|e| e.to_string())?;
        points.push(json!({
            "cutoff": cutoff,
            "hits": est.hits,
            "total": est.total,
            "value": est.hits as f64 / est.total as f64,
            "condition": est.condition,
        }));
    }
    Ok(json!({ "family": family.label(), "points": points }).to_string())
}

/// Density of a coefficient condition at each cutoff in a comma-separated
/// list; exact hit/total pairs plus a float for plotting.
#[wasm_bindgen]
pub fn density_json(predicate: &str, family: &str, cutoffs: &str) -> String {
    match density_impl(predicate, family, cutoffs) {
        Ok(body) => body,
        Err(msg) => err_json(msg),
    }
}

fn conformance_impl(pmax: u64, ellmax: u32, nmax: usize) -> Result<String, String> {
    if pmax > 31 || ellmax > 3 || nmax > 3 {
        return Err("demo grid is capped at pmax 31, ellmax 3, nmax 3".into());
    }
    let p_set: Vec<u64> = stats::primes_up_to(pmax)
        .into_iter()
        .filter(|&p| p >= 3)
        .collect();
    let ell_set: Vec<u32> = (1..=ellmax).collect();
    let n_set: Vec<usize> = (1..=nmax).collect();
    let cells = conformance_matrix(&p_set, &ell_set, &n_set, None, &demo_limits(), 1)
        .map_err(|e| e.to_string())?;
    let summary = stats::summarize(&cells);
    let rows: Vec<_> = summary
        .iter()
        .map(|row| {
            json!({
                "branch": row.branch,
                "convention": row.convention.label(),
                "cells": row.cells,
                "matches": row.matches,
                "rate": row.matches as f64 / row.cells as f64,
            })
        })
        .collect();
    Ok(json!({ "cells": cells.len(), "summary": rows }).to_string())
}

/// Match-rate summary of claims vs. oracle over a small parameter grid.
#[wasm_bindgen]
pub fn conformance_json(pmax: u32, ellmax: u32, nmax: u32) -> String {
    match conformance_impl(pmax as u64, ellmax, nmax as usize) {
        Ok(body) => body,
        Err(msg) => err_json(msg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_json_round_trips() {
        let body = census_json("pl", 3, 1, 2, 0);
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["census"]["fixed_full"], 3);
        assert_eq!(v["census"]["div2_full"], 9);
        assert_eq!(v["census"]["exact2_full"], 6);
        assert_eq!(v["orbit"]["histogram"]["2"], 6);
    }

    #[test]
    fn errors_are_reported_in_band() {
        let v: serde_json::Value = serde_json::from_str(&census_json("pl", 4, 1, 1, 0)).unwrap();
        assert!(v["error"].as_str().unwrap().contains("prime"));
        let v: serde_json::Value =
            serde_json::from_str(&density_json("bogus", "pl", "10")).unwrap();
        assert!(v["error"].as_str().unwrap().contains("predicate"));
    }

    #[test]
    fn density_json_matches_known_point() {
        let v: serde_json::Value =
            serde_json::from_str(&density_json("n-equals-p", "pl", "10,100")).unwrap();
        assert_eq!(v["points"][0]["hits"], 6);
        assert_eq!(v["points"][0]["total"], 30);
    }

    #[test]
    fn conformance_json_summarizes() {
        let v: serde_json::Value = serde_json::from_str(&conformance_json(7, 1, 1)).unwrap();
        assert!(v["cells"].as_u64().unwrap() > 0);
        let rows = v["summary"].as_array().unwrap();
        assert!(rows
            .iter()
            .any(|r| r["branch"] == "pm1l/zero" && r["rate"] == 1.0));
    }
}
