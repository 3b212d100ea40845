//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string. The logic lives in plain functions so
//! it can be tested without a browser.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use senile_walks::stats::{estimate_msd_curve, Process, RunConfig};
use senile_walks::{
    generate_walk_until, senile_from_timechange, ReinforcementSpec, StreamFactory, TimeIndex,
    WalkConstants, WalkKind,
};

/// Keeps a single call well under a second in the browser.
const MAX_HORIZON: u64 = 100_000;
const MAX_WORK: u64 = 20_000_000;

fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}

fn parse(model: &str, dimension: usize, f: &str) -> Result<(WalkKind, ReinforcementSpec), String> {
    let kind: WalkKind = model.parse().map_err(|e| format!("{e}"))?;
    let spec = ReinforcementSpec::parse(dimension, f).map_err(|e| e.to_string())?;
    Ok((kind, spec))
}

pub fn time_law_summary_json(dimension: usize, f: &str) -> Result<String, String> {
    let spec = ReinforcementSpec::parse(dimension, f).map_err(|e| e.to_string())?;
    let law = spec.time_law().map_err(|e| e.to_string())?;
    let mut kinds = serde_json::Map::new();
    for kind in [WalkKind::Persistent, WalkKind::Reinforced] {
        let entry = if kind == WalkKind::Reinforced && dimension == 1 && spec.always_odd() {
            json!({ "regime": "excluded: d = 1 and P(T odd) = 1" })
        } else {
            match WalkConstants::new(kind, &law) {
                Ok(c) => json!({
                    "regime": if c.mean_time.is_finite() { "diffusive" } else { "subdiffusive" },
                    "diffusion_constant": c.diffusion_constant,
                    "senile_diffusion_constant": c.senile_diffusion_constant(),
                }),
                Err(e) => json!({ "regime": format!("not diffusive: {e}") }),
            }
        };
        kinds.insert(kind.name().to_string(), entry);
    }
    Ok(json!({
        "mean": number(law.mean.as_f64()),
        "second_moment": number(law.second_moment.as_f64()),
        "p_odd": law.p_odd,
        "pmf": (1..=20).map(|k| spec.pmf(k)).collect::<Vec<_>>(),
        "walks": kinds,
    })
    .to_string())
}

/// One senile path `S_0..S_horizon` with its renewal times.
pub fn simulate_senile_json(
    model: &str,
    dimension: usize,
    f: &str,
    horizon: u64,
    seed: u32,
) -> Result<String, String> {
    let (kind, spec) = parse(model, dimension, f)?;
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(format!("horizon must be between 1 and {MAX_HORIZON}"));
    }
    let mut rng = StreamFactory::new(seed.into(), "web/simulate").stream(0);
    let walk = generate_walk_until(kind, &spec, horizon, &mut rng).map_err(|e| e.to_string())?;
    let senile = senile_from_timechange(&walk, horizon).map_err(|e| e.to_string())?;
    let index = TimeIndex::from_path(&walk);
    let renewals: Vec<u64> = index.partial_sums().iter().copied().filter(|&t| t <= horizon).collect();
    let positions: Vec<&[i64]> = (0..=horizon).map(|n| senile.position(n)).collect();
    Ok(json!({ "positions": positions, "renewals": renewals }).to_string())
}

/// Monte Carlo `E|S_n|^2 / n` on a doubling grid up to `max_n`.
pub fn msd_curve_json(
    model: &str,
    dimension: usize,
    f: &str,
    paths: u64,
    max_n: u64,
    seed: u32,
) -> Result<String, String> {
    let (kind, spec) = parse(model, dimension, f)?;
    if paths < 2 || max_n == 0 || paths.saturating_mul(max_n) > MAX_WORK {
        return Err(format!("need at least 2 paths and paths x max n at most {MAX_WORK}"));
    }
    let grid: Vec<u64> = std::iter::successors(Some(1u64), |n| Some(n * 2))
        .take_while(|&n| n <= max_n)
        .collect();
    let config = RunConfig::new(seed.into(), paths);
    let reports = estimate_msd_curve(kind, Process::Senile, &spec, &grid, &config)
        .map_err(|e| e.to_string())?;
    let points: Vec<Value> = grid
        .iter()
        .zip(&reports)
        .map(|(n, r)| {
            json!({
                "n": n,
                "estimate": r.estimate,
                "std_error": r.std_error,
                "reference": r.reference,
                "warning": r.warning,
            })
        })
        .collect();
    Ok(Value::Array(points).to_string())
}

#[wasm_bindgen]
pub fn time_law_summary(dimension: usize, f: &str) -> Result<String, JsError> {
    time_law_summary_json(dimension, f).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate_senile(
    model: &str,
    dimension: usize,
    f: &str,
    horizon: u32,
    seed: u32,
) -> Result<String, JsError> {
    simulate_senile_json(model, dimension, f, horizon.into(), seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn msd_curve(
    model: &str,
    dimension: usize,
    f: &str,
    paths: u32,
    max_n: u32,
    seed: u32,
) -> Result<String, JsError> {
    msd_curve_json(model, dimension, f, paths.into(), max_n.into(), seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parsed(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn summary_of_geometric_time() {
        let v = parsed(&time_law_summary_json(1, "const:0").unwrap());
        assert!((v["mean"].as_f64().unwrap() - 2.0).abs() < 1e-10);
        assert!((v["p_odd"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-10);
        assert_eq!(v["walks"]["reinforced"]["regime"], "diffusive");
        assert_eq!(v["pmf"][0], 0.5);
    }

    #[test]
    fn summary_reports_heavy_tails_and_exclusions() {
        let v = parsed(&time_law_summary_json(1, "affine:1,0").unwrap());
        assert_eq!(v["mean"], "inf");
        let v = parsed(&time_law_summary_json(1, "const:-1").unwrap());
        assert!(v["walks"]["reinforced"]["regime"].as_str().unwrap().starts_with("excluded"));
        assert!(time_law_summary_json(0, "const:0").is_err());
        assert!(time_law_summary_json(2, "nonsense").is_err());
    }

    #[test]
    fn simulated_path_is_reproducible() {
        let a = simulate_senile_json("reinforced", 2, "const:1", 500, 9).unwrap();
        assert_eq!(a, simulate_senile_json("reinforced", 2, "const:1", 500, 9).unwrap());
        let v = parsed(&a);
        let positions = v["positions"].as_array().unwrap();
        assert_eq!(positions.len(), 501);
        assert_eq!(positions[0], json!([0, 0]));
        for w in positions.windows(2) {
            let dist: i64 = (0..2).map(|i| (w[1][i].as_i64().unwrap() - w[0][i].as_i64().unwrap()).abs()).sum();
            assert_eq!(dist, 1);
        }
        let renewals = v["renewals"].as_array().unwrap();
        assert!(renewals.iter().all(|t| t.as_u64().unwrap() <= 500));
    }

    #[test]
    fn simulation_rejects_bad_input() {
        assert!(simulate_senile_json("reinforced", 1, "const:-1", 10, 1).is_err());
        assert!(simulate_senile_json("persistent", 1, "const:0", 0, 1).is_err());
        assert!(simulate_senile_json("persistent", 1, "const:0", MAX_HORIZON + 1, 1).is_err());
        assert!(simulate_senile_json("sideways", 1, "const:0", 10, 1).is_err());
    }

    #[test]
    fn msd_curve_tracks_the_limit() {
        let v = parsed(&msd_curve_json("persistent", 2, "const:0", 4000, 256, 3).unwrap());
        let points = v.as_array().unwrap();
        assert_eq!(points.len(), 9);
        let last = &points[8];
        let (est, se, reference) = (
            last["estimate"].as_f64().unwrap(),
            last["std_error"].as_f64().unwrap(),
            last["reference"].as_f64().unwrap(),
        );
        // finite-n bias of order 1/n on top of sampling noise
        assert!((est - reference).abs() < 3.0 * se + 0.1, "{est} vs {reference}");
    }

    #[test]
    fn msd_curve_warns_without_a_limit() {
        let v = parsed(&msd_curve_json("reinforced", 1, "affine:1,0", 200, 1024, 3).unwrap());
        let last = &v.as_array().unwrap()[10];
        assert!(last["reference"].is_null());
        assert!(last["warning"].is_string());
        assert!(msd_curve_json("persistent", 1, "const:0", 1, 10, 1).is_err());
        assert!(msd_curve_json("persistent", 1, "const:0", MAX_WORK, 2, 1).is_err());
    }
}
