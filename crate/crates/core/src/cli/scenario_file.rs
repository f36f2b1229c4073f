use std::path::Path;

use serde::Deserialize;

use crate::error::LoadError;
use crate::model::{validate_scenario, EveRegion, Position3, Scenario};

/// Name accepted in place of a path for the bundled scenario.
pub const BUILTIN_SCENARIO: &str = "default_mission";

pub const DEFAULT_MISSION_TOML: &str = include_str!("../../fixtures/default_mission.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    nodes: Nodes,
    uav: Uav,
    link: Link,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Nodes {
    alice_km: [f64; 3],
    bob_km: [f64; 3],
    eve_center_km: [f64; 3],
    eve_radius_km: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Uav {
    start_km: [f64; 3],
    end_km: [f64; 3],
    altitude_km: f64,
    flight_time_s: f64,
    slot_duration_s: f64,
    max_speed_mps: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Link {
    bandwidth_mhz: f64,
    ref_gain_db: f64,
    noise_psd_dbm_per_hz: f64,
    p_alice_dbm: f64,
    p_uav_dbm: f64,
    eve_qos_mbps: f64,
}

const KM: f64 = 1000.0;

fn km(p: [f64; 3]) -> Position3 {
    Position3::new(p[0] * KM, p[1] * KM, p[2] * KM)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Mbit/s to nat/s.
pub fn mbps_to_nats(mbps: f64) -> f64 {
    mbps * 1e6 * std::f64::consts::LN_2
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// Parse scenario text without checking the scenario invariants.
pub fn parse_scenario(text: &str) -> Result<Scenario, LoadError> {
    let f: File = toml::from_str(text).map_err(|e| LoadError::Parse(e.to_string().trim_end().to_string()))?;
    let ratio = f.uav.flight_time_s / f.uav.slot_duration_s;
    let n_slots = if ratio.is_finite() && ratio >= 0.0 { ratio.round() as usize } else { 0 };
    Ok(Scenario {
        alice_pos: km(f.nodes.alice_km),
        bob_pos: km(f.nodes.bob_km),
        eve: EveRegion { center: km(f.nodes.eve_center_km), radius: f.nodes.eve_radius_km * KM },
        uav_start: km(f.uav.start_km),
        uav_end: km(f.uav.end_km),
        altitude_m: f.uav.altitude_km * KM,
        flight_duration_s: f.uav.flight_time_s,
        slot_duration_s: f.uav.slot_duration_s,
        n_slots,
        max_speed_mps: f.uav.max_speed_mps,
        bandwidth_hz: f.link.bandwidth_mhz * 1e6,
        ref_gain: db_to_linear(f.link.ref_gain_db),
        noise_psd: dbm_to_watts(f.link.noise_psd_dbm_per_hz),
        p_alice_max: dbm_to_watts(f.link.p_alice_dbm),
        p_uav_max: dbm_to_watts(f.link.p_uav_dbm),
        eve_qos_target: mbps_to_nats(f.link.eve_qos_mbps),
    })
}

/// Read a scenario from `path` (or the bundled one by name) without
/// checking its invariants.
pub fn read_scenario(path: &Path) -> Result<Scenario, LoadError> {
    if path.as_os_str() == BUILTIN_SCENARIO && !path.exists() {
        return parse_scenario(DEFAULT_MISSION_TOML);
    }
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text)
}

/// Read and validate a scenario.
pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let s = read_scenario(path)?;
    let v = validate_scenario(&s);
    if !v.is_empty() {
        return Err(LoadError::Invalid(v.iter().map(|v| v.to_string()).collect()));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_mission() {
        let s = load_scenario(Path::new(BUILTIN_SCENARIO)).unwrap();
        assert_eq!(s.p_alice_max, 1.0);
        assert!((s.p_uav_max - 0.501187233627272).abs() < 1e-12);
        assert_eq!(s.bandwidth_hz, 1e7);
        assert_eq!(s.n_slots, 45);
        assert_eq!(s.max_step_m(), 200.0);
        assert_eq!(s.altitude_m, 100.0);
        assert_eq!(s.eve.radius, 300.0);
        assert!((s.ref_gain - 1e-5).abs() < 1e-20);
        assert!((s.noise_psd - 1e-18).abs() < 1e-32);
    }

    #[test]
    fn rate_conversion() {
        let s = parse_scenario(DEFAULT_MISSION_TOML).unwrap();
        assert_eq!(s.eve_qos_target, 1e8 * std::f64::consts::LN_2);
        assert!((nats_to_bits(s.eve_qos_target) - 1e8).abs() < 1e-6);
    }

    #[test]
    fn missing_key_is_named() {
        let text = DEFAULT_MISSION_TOML.replace("slot_duration_s = 10.0\n", "");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("slot_duration_s"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = DEFAULT_MISSION_TOML.replace("max_speed_mps", "max_speed_kmh");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("max_speed_kmh"), "{err}");
    }

    #[test]
    fn violations_refuse_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("slow.toml");
        std::fs::write(&p, DEFAULT_MISSION_TOML.replace("max_speed_mps = 20.0", "max_speed_mps = 10.0")).unwrap();
        match load_scenario(&p) {
            Err(LoadError::Invalid(v)) => assert!(v.iter().any(|x| x.contains("N·D"))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_scenario(Path::new("/nonexistent/x.toml")), Err(LoadError::Io { .. })));
    }
}
