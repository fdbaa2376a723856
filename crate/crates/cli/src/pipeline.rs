//! The `run` pipeline: build → validate → surgery → MC → reports and renders.

use std::path::{Path, PathBuf};

use anyhow::Result;
use sembed::constructions::ConstructionSpec;
use sembed::embedding::io::{embedding_to_json, render_svg, SvgOptions};
use sembed::embedding::{
    exp_fat_check, lip_scale, ExpFatReport, LipReport, SEmbedding, ValidationReport,
};
use sembed::fk::{batches_to_csv, run_experiment, McConfig};
use sembed::surgery::{render_weld_svg, weld_square_district, WeldParams};
use sembed::{schema, Error};
use serde::{Deserialize, Serialize};

use crate::{build_embedding, fk_overlay, load, load_embedding, write, OK, VALIDATION};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    #[serde(default)]
    pub properness: bool,
    #[serde(default)]
    pub lip: Option<LipCheck>,
    #[serde(default)]
    pub exp_fat: Option<ExpFatCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipCheck {
    pub kappa: f64,
    /// Lip(κ, δ) is required at this δ; at the domain diameter when absent.
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpFatCheck {
    pub delta: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub failures: Vec<String>,
    pub validation: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lip: Option<LipReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exp_fat: Option<ExpFatReport>,
}

pub fn run_checks(e: &SEmbedding, checks: &Checks) -> CheckReport {
    let validation = e.validate();
    let mut failures = Vec::new();
    if checks.properness && !validation.passes() {
        failures.push(format!(
            "validation: alternating sum {:e}, support residual {:e}, θ round trip {:e}, proper {}",
            validation.alternating_sum,
            validation.support_residual,
            validation.theta_roundtrip,
            validation.proper
        ));
    }
    let lip = checks.lip.as_ref().map(|c| {
        let r = lip_scale(e, c.kappa);
        let bound = c.delta.unwrap_or(r.diameter);
        if r.scale > bound || r.fails_everywhere() {
            let pair = r
                .pair
                .map(|(u, v)| format!(" by pair ({u}, {v})"))
                .unwrap_or_default();
            failures.push(format!(
                "lip: Lip({}, {bound}) violated{pair}; {}",
                c.kappa,
                r.describe()
            ));
        }
        r
    });
    let exp_fat = checks.exp_fat.as_ref().map(|c| {
        let r = exp_fat_check(e, c.delta, c.rho);
        if !r.pass {
            failures.push(format!(
                "exp_fat: thin component of diameter {} ≥ ρ = {}",
                r.max_thin_diameter, c.rho
            ));
        }
        r
    });
    CheckReport {
        pass: failures.is_empty(),
        failures,
        validation,
        lip,
        exp_fat,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurgeryStep {
    pub params: WeldParams,
    /// Quads of the region to weld into; all quads when empty.
    #[serde(default)]
    pub region: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderStep {
    #[serde(default)]
    pub q_heat: bool,
    #[serde(default)]
    pub fk_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub construction: Option<ConstructionSpec>,
    /// Embedding JSON, relative to the config file.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub boost: Option<f64>,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub surgery: Option<SurgeryStep>,
    #[serde(default)]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub render: Option<RenderStep>,
    /// Output directory, relative to the config file.
    pub output: PathBuf,
}

pub fn run(path: &Path) -> Result<u8> {
    let cfg: ExperimentConfig = load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let out = base.join(&cfg.output);
    let e = match (&cfg.construction, &cfg.input) {
        (Some(spec), None) => {
            let (e, graph) = build_embedding(spec, cfg.boost)?;
            if let Some(g) = graph {
                write(&out.join("graph.json"), &g)?;
            }
            e
        }
        (None, Some(input)) => {
            let e = load_embedding(&base.join(input))?;
            match cfg.boost {
                Some(t) => e.boost(t)?,
                None => e,
            }
        }
        _ => {
            return Err(Error::schema(
                "construction",
                "exactly one of `construction` and `input` is required",
            )
            .into())
        }
    };
    write(&out.join("config.json"), &schema::to_string(&cfg))?;
    write(&out.join("embedding.json"), &embedding_to_json(&e))?;

    let report = run_checks(&e, &cfg.checks);
    write(&out.join("validation.json"), &schema::to_string(&report))?;
    let mut code = if report.pass { OK } else { VALIDATION };

    if let Some(step) = &cfg.surgery {
        let w = weld_square_district(&e, &step.region, &step.params)?;
        write(&out.join("weld.json"), &schema::to_string(&w))?;
        write(&out.join("welded.json"), &embedding_to_json(&w.embedding))?;
        write(&out.join("weld.svg"), &render_weld_svg(&e, &w))?;
        if !(w.proper && w.lip_ok) {
            code = VALIDATION;
        }
    }
    if let Some(mc) = &cfg.mc {
        let r = run_experiment(mc)?;
        write(&out.join("mc.json"), &schema::to_string(&r))?;
        write(&out.join("mc_batches.csv"), &batches_to_csv(&r))?;
    }
    if let Some(r) = &cfg.render {
        let overlay = match r.fk_seed {
            Some(seed) => fk_overlay(&e, seed)?,
            None => Vec::new(),
        };
        let svg = render_svg(
            &e,
            &SvgOptions {
                q_heat: r.q_heat,
                overlay,
                ..Default::default()
            },
        );
        write(&out.join("embedding.svg"), &svg)?;
    }
    Ok(code)
}
