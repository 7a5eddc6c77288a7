//! Scenario files bundled with the binary.

use crate::scenario::Scenario;

pub const SHIPPED: &[(&str, &str)] = &[
    ("static_adiabatic", include_str!("../scenarios/static_adiabatic.json")),
    ("static_damped", include_str!("../scenarios/static_damped.json")),
    ("chirped_constant", include_str!("../scenarios/chirped_constant.json")),
    (
        "gaussian_chirped_damped",
        include_str!("../scenarios/gaussian_chirped_damped.json"),
    ),
    ("sech_damped", include_str!("../scenarios/sech_damped.json")),
    ("gaussian_undamped", include_str!("../scenarios/gaussian_undamped.json")),
    ("slow_gaussian", include_str!("../scenarios/slow_gaussian.json")),
    ("pi_pulse", include_str!("../scenarios/pi_pulse.json")),
    ("decay", include_str!("../scenarios/decay.json")),
];

/// Scenarios without a field, which have no dressed states.
pub const FIELD_FREE: &[&str] = &["decay"];

pub fn shipped(name: &str) -> Option<Scenario> {
    SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::from_json(text).expect("shipped scenario is valid"))
}

pub fn all() -> Vec<Scenario> {
    SHIPPED
        .iter()
        .map(|(_, text)| Scenario::from_json(text).expect("shipped scenario is valid"))
        .collect()
}

/// Shipped scenarios that support dressed-state evaluation.
pub fn dressed() -> Vec<Scenario> {
    all()
        .into_iter()
        .filter(|s| !FIELD_FREE.contains(&s.name.as_str()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_shipped_scenario_loads_under_its_own_name() {
        for (name, _) in SHIPPED {
            assert_eq!(shipped(name).unwrap().name, *name);
        }
    }
}
