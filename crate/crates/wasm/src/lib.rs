//! Browser entry points for the demo page in `www/`.
//!
//! Each export returns JSON text; the page parses it and draws the result.

use alignmarket::dialogue::{quantal_gap, quantal_response};
use alignmarket::hull::hoeffding_committee_size;
use alignmarket::persuasion::oblivious_joint_evaluation;
use alignmarket::{first_best, fixtures, Error, Result, SignalingScheme};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Quantal choice probabilities and the welfare gap on `steps` evenly spaced
/// rationality levels in `(0, lambda_max]`.
pub fn quantal_curve_json(beliefs: &[f64], lambda_max: f64, steps: usize) -> Result<String> {
    if beliefs.is_empty() || beliefs.iter().any(|b| !b.is_finite()) {
        return Err(Error::Domain("beliefs must be a nonempty list of numbers".into()));
    }
    if !(lambda_max.is_finite() && lambda_max > 0.0) || steps == 0 || steps > 10_000 {
        return Err(Error::Domain("need lambda_max > 0 and 1..=10000 steps".into()));
    }
    let lambdas: Vec<f64> = (1..=steps).map(|s| lambda_max * s as f64 / steps as f64).collect();
    let probabilities: Vec<Vec<f64>> = lambdas.iter().map(|&l| quantal_response(beliefs, l)).collect();
    let gaps: Vec<f64> = lambdas.iter().map(|&l| quantal_gap(beliefs, l)).collect();
    let bounds: Vec<f64> = lambdas.iter().map(|&l| (beliefs.len() as f64).ln() / l).collect();
    Ok(json!({ "lambdas": lambdas, "probabilities": probabilities, "gaps": gaps, "bounds": bounds }).to_string())
}

/// The courtroom example with an adjustable prior and defense scheme.
///
/// The prosecutor always says "guilty"; the defense says "guilty" with
/// probability `defense_leak` in the guilty state and "innocent" otherwise.
pub fn courtroom_json(prior_guilty: f64, defense_leak: f64) -> Result<String> {
    if !(0.0..=1.0).contains(&prior_guilty) || !(0.0..=1.0).contains(&defense_leak) {
        return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
    }
    let inst = fixtures::appendix_b().with_prior(vec![prior_guilty, 1.0 - prior_guilty])?;
    let prosecutor = SignalingScheme::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]])?;
    let defense = SignalingScheme::new(vec![vec![defense_leak, 1.0 - defense_leak], vec![0.0, 1.0]])?;
    let out = oblivious_joint_evaluation(&inst, &[prosecutor, defense])?;
    Ok(json!({
        "alice_utility": out.alice_utility,
        "first_best": first_best(&inst),
        "prosecutor_utility": out.bob_utilities[0],
        "defense_utility": out.bob_utilities[1],
    })
    .to_string())
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn quantal_curve(beliefs: Vec<f64>, lambda_max: f64, steps: usize) -> std::result::Result<String, JsError> {
    quantal_curve_json(&beliefs, lambda_max, steps).map_err(js)
}

#[wasm_bindgen]
pub fn courtroom(prior_guilty: f64, defense_leak: f64) -> std::result::Result<String, JsError> {
    courtroom_json(prior_guilty, defense_leak).map_err(js)
}

/// Committee size that aligns a uniform average of random agents.
#[wasm_bindgen]
pub fn hoeffding(actions: usize, states: usize, epsilon: f64, delta: f64) -> std::result::Result<usize, JsError> {
    hoeffding_committee_size(actions, states, epsilon, delta).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn courtroom_reproduces_the_example() {
        let v: Value = serde_json::from_str(&courtroom_json(2.0 / 3.0, 0.5).unwrap()).unwrap();
        assert!((v["alice_utility"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(v["first_best"].as_f64().unwrap(), 2.0);
        // a fully revealing defense gives Alice the first best
        let v: Value = serde_json::from_str(&courtroom_json(2.0 / 3.0, 1.0).unwrap()).unwrap();
        assert!((v["alice_utility"].as_f64().unwrap() - 2.0).abs() < 1e-12);
        assert!(courtroom_json(1.5, 0.5).is_err());
    }

    #[test]
    fn quantal_curve_stays_under_the_bound() {
        let v: Value = serde_json::from_str(&quantal_curve_json(&[1.0, 0.0], 9f64.ln(), 4).unwrap()).unwrap();
        let gaps = v["gaps"].as_array().unwrap();
        let bounds = v["bounds"].as_array().unwrap();
        assert_eq!(gaps.len(), 4);
        assert!((gaps[3].as_f64().unwrap() - 0.1).abs() < 1e-12);
        for (g, b) in gaps.iter().zip(bounds) {
            assert!(g.as_f64().unwrap() <= b.as_f64().unwrap());
        }
        assert!(quantal_curve_json(&[], 1.0, 4).is_err());
        assert!(quantal_curve_json(&[0.5], 0.0, 4).is_err());
    }

    #[test]
    fn hoeffding_size() {
        assert_eq!(hoeffding_committee_size(3, 3, 0.1, 0.05).unwrap(), 295);
    }
}
