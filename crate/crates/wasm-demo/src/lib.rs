//! Three interactive views over the core library, exported to JavaScript.

use eqc_core::device::{parse_profile, DeviceProfile, LatencyModel};
use eqc_core::fidelity::p_correct;
use eqc_core::noise::{run_noisy, CalibrationSnapshot};
use eqc_core::sampling::rng_for;
use eqc_core::sim::Bindings;
use eqc_core::transpiler::{transpile, CouplingMap};
use eqc_core::vqa::{ghz_circuit, ideal_energy, maxcut_hamiltonian, qaoa_circuit, vqe_ansatz, Graph};
use eqc_core::{Error, Result};

type JsResult<T> = std::result::Result<T, JsError>;
use wasm_bindgen::prelude::*;

const PROFILES: [&str; 10] = [
    include_str!("../../../fleets/ibmq10/ibm_lagos.json"),
    include_str!("../../../fleets/ibmq10/ibmq_belem.json"),
    include_str!("../../../fleets/ibmq10/ibmq_bogota.json"),
    include_str!("../../../fleets/ibmq10/ibmq_casablanca.json"),
    include_str!("../../../fleets/ibmq10/ibmq_lima.json"),
    include_str!("../../../fleets/ibmq10/ibmq_manila.json"),
    include_str!("../../../fleets/ibmq10/ibmq_quito.json"),
    include_str!("../../../fleets/ibmq10/ibmq_santiago.json"),
    include_str!("../../../fleets/ibmq10/ibmq_toronto.json"),
    include_str!("../../../fleets/ibmq10/ibmq_x2.json"),
];

pub fn bundled_profiles() -> Result<Vec<DeviceProfile>> {
    PROFILES.iter().map(|t| parse_profile(t)).collect()
}

fn profile(name: &str) -> Result<DeviceProfile> {
    bundled_profiles()?
        .into_iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("no bundled device {name:?}")))
}

/// P_Correct of a bundled circuit sampled at `points` instants across one
/// calibration period, with the device's drift rate scaled by `rate_scale`.
pub fn p_correct_curve(device: &str, circuit: &str, rate_scale: f64, points: usize) -> Result<Vec<f64>> {
    let mut d = profile(device)?;
    if !(rate_scale >= 0.0) {
        return Err(Error::InvalidArgument("rate scale must be >= 0".into()));
    }
    d.drift.rate_per_hour *= rate_scale;
    let c = match circuit {
        "ghz5" => ghz_circuit(5)?,
        "vqe4" => vqe_ansatz(4)?,
        "qaoa4" => qaoa_circuit(&Graph::ring(4))?,
        _ => return Err(Error::InvalidArgument(format!("unknown circuit {circuit:?}"))),
    };
    let tc = transpile(&c, &d)?;
    let n = points.max(2);
    (0..n)
        .map(|k| {
            let t = d.calibration_period_s * k as f64 / n as f64;
            p_correct(&tc, &d.current_calibration(t))
        })
        .collect()
}

/// Ideal ring-of-`nodes` MaxCut energy on a `grid`×`grid` mesh of (β, α) over
/// [-π, π)², row-major with β along rows.
pub fn qaoa_landscape(nodes: usize, grid: usize) -> Result<Vec<f64>> {
    let g = Graph::ring(nodes);
    let c = qaoa_circuit(&g)?;
    let h = maxcut_hamiltonian(&g)?;
    let step = 2.0 * std::f64::consts::PI / grid as f64;
    let mut out = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            let beta = -std::f64::consts::PI + i as f64 * step;
            let alpha = -std::f64::consts::PI + j as f64 * step;
            out.push(ideal_energy(&c, &h, &[beta, alpha])?);
        }
    }
    Ok(out)
}

/// Counts for every n-bit outcome of GHZ(n) on a line device with uniform rates.
pub fn ghz_histogram(n: usize, gamma: f64, beta: f64, omega: f64, shots: u64, seed: u64) -> Result<Vec<f64>> {
    let calib = CalibrationSnapshot::uniform(n, gamma, beta, omega, 100.0, 80.0);
    let d = DeviceProfile::uniform("demo", CouplingMap::line(n), calib, LatencyModel::zero())?;
    let tc = transpile(&ghz_circuit(n)?, &d)?;
    let counts = run_noisy(&tc, &Bindings::new(&[]), &d.base_calibration, shots, &mut rng_for(seed, 0))?;
    Ok((0..1u64 << n).map(|i| counts.get_index(i) as f64).collect())
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = deviceNames)]
pub fn device_names() -> JsResult<Vec<String>> {
    Ok(bundled_profiles().map_err(js)?.into_iter().map(|d| d.name).collect())
}

#[wasm_bindgen(js_name = pCorrectCurve)]
pub fn p_correct_curve_js(device: &str, circuit: &str, rate_scale: f64, points: usize) -> JsResult<Vec<f64>> {
    p_correct_curve(device, circuit, rate_scale, points).map_err(js)
}

#[wasm_bindgen(js_name = qaoaLandscape)]
pub fn qaoa_landscape_js(nodes: usize, grid: usize) -> JsResult<Vec<f64>> {
    qaoa_landscape(nodes, grid).map_err(js)
}

#[wasm_bindgen(js_name = ghzHistogram)]
pub fn ghz_histogram_js(n: usize, gamma: f64, beta: f64, omega: f64, shots: u32, seed: u32) -> JsResult<Vec<f64>> {
    ghz_histogram(n, gamma, beta, omega, shots as u64, seed as u64).map_err(js)
}
