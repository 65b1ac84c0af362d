use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chebyrace::general::{
    check_bias_criterion, check_constant_coefficient_race, check_limitation, variance_bounds, Orientation, RaceSpec,
    RaceSpecFile,
};
use clap::Args;
use serde_json::{json, Value};

use super::{emit_report, positive, Failure, INPUT};
use crate::output::Format;

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("race").required(true).args(["spec", "nr_r"])))]
pub struct CriteriaArgs {
    /// JSON file `{"q": .., "classes": [..], "weights": [..]}`; weights are
    /// integers or strings "p/q".
    spec: Option<PathBuf>,

    /// Use the non-residue versus residue race mod this q.
    #[arg(long)]
    nr_r: Option<u64>,

    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,

    /// Constant in the bias criterion.
    #[arg(long, default_value_t = 1.0)]
    c: f64,

    #[arg(long, default_value_t = 1.0)]
    k1: f64,

    #[arg(long, default_value_t = 1.0)]
    k2: f64,

    /// Also test the race of KN non-residues against KR residues with
    /// constant weights, given as KN:KR.
    #[arg(long, value_parser = parse_pair)]
    constant: Option<(u64, u64)>,
}

fn parse_pair(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected KN:KR, got {s}"))?;
    let n = a.trim().parse().map_err(|_| format!("bad count {a}"))?;
    let r = b.trim().parse().map_err(|_| format!("bad count {b}"))?;
    Ok((n, r))
}

/// Parses a spec file, naming the offending field and line on failure.
pub fn parse_spec(text: &str) -> Result<RaceSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: RaceSpecFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        Failure {
            code: INPUT,
            message: format!(
                "line {}, column {}, field `{}`: {}",
                inner.line(),
                inner.column(),
                e.path(),
                inner
            ),
        }
    })?;
    Ok(RaceSpec::try_from(file)?)
}

pub fn run(args: &CriteriaArgs, format: Format, out: Option<&Path>) -> Result<()> {
    let epsilon = positive("epsilon", args.epsilon)?;
    let c = positive("c", args.c)?;
    let spec = match (&args.spec, args.nr_r) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_spec(&text).with_context(|| format!("in {}", path.display()))?
        }
        (_, Some(q)) => RaceSpec::nr_r(q)?,
        _ => unreachable!("clap requires one source"),
    };
    if spec.orientation == Orientation::Symmetric && args.constant.is_none() {
        bail!(Failure {
            code: INPUT,
            message: "the residue weights cancel: the race is symmetric, with density 1/2".into(),
        });
    }
    let mut body = json!({
        "race": {
            "q": spec.q,
            "classes": spec.k(),
            "non_residue_classes": spec.k_n(),
            "residue_classes": spec.k_r,
            "orientation": spec.orientation,
            "mean": spec.mean(),
        },
        "epsilon": epsilon,
        "c": c,
        "k1": args.k1,
        "k2": args.k2,
        "variance_bounds": variance_bounds(&spec),
    });
    if spec.orientation != Orientation::Symmetric {
        body["bias_criterion"] = serde_json::to_value(check_bias_criterion(&spec, epsilon, c)?)?;
        body["limitation"] = serde_json::to_value(check_limitation(&spec, args.k1, args.k2)?)?;
    }
    if let Some((k_n, k_r)) = args.constant {
        let v = check_constant_coefficient_race(spec.q, k_n, k_r, epsilon)?;
        let mut val = serde_json::to_value(&v)?;
        if let Value::Object(o) = &mut val {
            o.remove("spec");
        }
        body["constant_race"] = val;
    }
    emit_report("criteria", body, format, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_errors_name_the_field() {
        let err = parse_spec("{\n  \"q\": 15,\n  \"classes\": [1, 2],\n  \"weights\": [1, true]\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weights[1]"), "{msg}");
        assert!(msg.contains("line 4"), "{msg}");
        let err = parse_spec("{\"q\": 15, \"classes\": [1, 2], \"weights\": [1, -1], \"extra\": 0}").unwrap_err();
        assert!(err.to_string().contains("extra"));
    }

    #[test]
    fn spec_accepts_fractions() {
        let spec = parse_spec(r#"{"q": 15, "classes": [2, 1, 4], "weights": ["1/2", "1/2", -1]}"#).unwrap();
        assert_eq!(spec.k(), 3);
    }

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("6:6"), Ok((6, 6)));
        assert!(parse_pair("6").is_err());
    }
}
