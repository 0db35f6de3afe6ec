//! Subcommand implementations. Each returns its rows; [`crate::run`] writes
//! them.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stabapprox::{
    adc, bloch_image, build_mixture, chi_to_kraus, hs_distance, kraus_to_chi, pol_xy, random_chi_batch, solve,
    solve_batch_with, validate_cptp, ApproximationProblem, Chi, ConstraintKind, Kraus, ModelKind, StateDomain,
};

use crate::args::{expand_models, ApproxArgs, BlochArgs, RandomArgs, SweepArgs, TargetArgs, TargetKind};
use crate::error::CliError;
use crate::record::{round_sig, RunRecord, TargetInfo};

/// A resolved target channel.
#[derive(Debug, Clone)]
pub struct Target {
    pub info: TargetInfo,
    pub chi: Chi,
    pub kraus: Option<Kraus>,
}

impl Target {
    pub fn from_kraus(mut info: TargetInfo, kraus: Kraus) -> Result<Self, CliError> {
        let chi = kraus_to_chi(&kraus)?;
        info.distance_to_identity = Some(hs_distance(&chi, &Chi::identity()));
        Ok(Self {
            info,
            chi,
            kraus: Some(kraus),
        })
    }

    pub fn from_chi(mut info: TargetInfo, chi: Chi) -> Self {
        info.distance_to_identity = Some(hs_distance(&chi, &Chi::identity()));
        Self { info, chi, kraus: None }
    }

    pub fn problem(&self, model: ModelKind, constraint: ConstraintKind) -> Result<ApproximationProblem, CliError> {
        let p = match &self.kraus {
            Some(k) => ApproximationProblem::from_kraus(k.clone(), model, constraint)?,
            None => ApproximationProblem::from_chi(self.chi.clone(), model, constraint)?,
        };
        Ok(p)
    }

    pub fn kraus_form(&self) -> Result<Kraus, CliError> {
        match &self.kraus {
            Some(k) => Ok(k.clone()),
            None => Ok(chi_to_kraus(&self.chi)?),
        }
    }
}

fn angle(value: f64, degrees: bool) -> f64 {
    if degrees {
        value.to_radians()
    } else {
        value
    }
}

fn required(value: Option<f64>, flag: &str, target: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--target {target} needs --{flag}")))
}

pub fn adc_target(gamma: f64) -> Result<Target, CliError> {
    let info = TargetInfo {
        kind: "adc".into(),
        gamma: Some(gamma),
        ..TargetInfo::default()
    };
    Target::from_kraus(info, adc(gamma)?)
}

pub fn pol_target(phi: f64, p: f64) -> Result<Target, CliError> {
    let info = TargetInfo {
        kind: "pol".into(),
        phi: Some(phi),
        p: Some(p),
        ..TargetInfo::default()
    };
    Target::from_kraus(info, pol_xy(phi, p)?)
}

/// One process-matrix entry in a JSON file: a real number, `[re, im]` or
/// `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Pair([f64; 2]),
    Object { re: f64, im: f64 },
}

/// Reads 16 row-major entries in the (I, X, Y, Z) basis.
pub fn read_chi_file(path: &Path) -> Result<Chi, CliError> {
    let text = fs::read_to_string(path)?;
    let entries: Vec<Entry> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let values = entries
        .into_iter()
        .map(|e| match e {
            Entry::Real(re) => num_complex::Complex::new(re, 0.0),
            Entry::Pair([re, im]) | Entry::Object { re, im } => num_complex::Complex::new(re, im),
        })
        .collect();
    Chi::from_row_major(values).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn resolve_target(args: &TargetArgs) -> Result<Target, CliError> {
    match args.target {
        TargetKind::Adc => adc_target(required(args.gamma, "gamma", "adc")?),
        TargetKind::Pol => {
            let phi = angle(required(args.phi, "phi", "pol")?, args.degrees);
            pol_target(phi, required(args.p, "p", "pol")?)
        }
        TargetKind::File => {
            let path = args
                .file
                .as_ref()
                .ok_or_else(|| CliError::Usage("--target file needs --file".into()))?;
            let chi = read_chi_file(path)?;
            let report = validate_cptp(&chi);
            if !report.is_valid() {
                return Err(CliError::Usage(format!("{} is not a CPTP process matrix", path.display())));
            }
            let info = TargetInfo {
                kind: "file".into(),
                ..TargetInfo::default()
            };
            Ok(Target::from_chi(info, chi))
        }
    }
}

/// Solves one target against one model; solver failures become rows with
/// no distance and `converged = false`.
pub fn solve_record(
    target: &Target,
    model: ModelKind,
    constraint: ConstraintKind,
    domain: StateDomain,
) -> Result<RunRecord, CliError> {
    let problem = target.problem(model, constraint)?.with_domain(domain);
    Ok(match solve(&problem) {
        Ok(result) => RunRecord::from_result(&target.info, &result),
        Err(e) => {
            eprintln!("{} {} {}: {e}", target.info.kind, model, constraint);
            RunRecord::new(&target.info, model.name(), constraint.name())
        }
    })
}

fn check_models(models: &[ModelKind]) -> Result<(), CliError> {
    if models.is_empty() {
        return Err(CliError::Usage("no models selected".into()));
    }
    Ok(())
}

pub fn approx(args: &ApproxArgs) -> Result<Vec<RunRecord>, CliError> {
    let target = resolve_target(&args.target)?;
    let models = expand_models(&args.solve.model);
    check_models(&models)?;
    models
        .iter()
        .map(|&m| solve_record(&target, m, args.solve.constraint.into(), args.solve.states.into()))
        .collect()
}

/// `steps` evenly spaced points from `min` to `max`, endpoints included.
pub fn grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    if min.is_nan() || max.is_nan() || min >= max {
        return Err(CliError::Usage(format!("--min ({min}) must be below --max ({max})")));
    }
    let span = max - min;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                min + span * i as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

pub fn sweep(args: &SweepArgs) -> Result<Vec<RunRecord>, CliError> {
    let models = expand_models(&args.solve.model);
    check_models(&models)?;
    let t = &args.target;
    let targets: Vec<Target> = match t.target {
        TargetKind::Adc => {
            let points = grid(args.min.unwrap_or(0.0), args.max.unwrap_or(1.0), args.steps)?;
            points.into_iter().map(adc_target).collect::<Result<_, _>>()?
        }
        TargetKind::Pol => {
            let p = required(t.p, "p", "pol")?;
            let min = args.min.map_or(0.0, |v| angle(v, t.degrees));
            let max = args.max.map_or(FRAC_PI_2, |v| angle(v, t.degrees));
            let points = grid(min, max, args.steps)?;
            points.into_iter().map(|phi| pol_target(phi, p)).collect::<Result<_, _>>()?
        }
        TargetKind::File => return Err(CliError::Usage("sweep needs --target adc or pol".into())),
    };
    let jobs: Vec<(&Target, ModelKind)> = targets
        .iter()
        .flat_map(|t| models.iter().map(move |&m| (t, m)))
        .collect();
    jobs.into_par_iter()
        .map(|(t, m)| solve_record(t, m, args.solve.constraint.into(), args.solve.states.into()))
        .collect()
}

pub fn random(args: &RandomArgs) -> Result<Vec<RunRecord>, CliError> {
    let seed = args
        .seed
        .ok_or_else(|| CliError::Usage("random needs --seed".into()))?;
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let models = expand_models(&args.solve.model);
    check_models(&models)?;
    let chis = random_chi_batch(seed, args.count)?;
    let constraint: ConstraintKind = args.solve.constraint.into();
    let domain: StateDomain = args.solve.states.into();
    let infos: Vec<TargetInfo> = chis
        .iter()
        .enumerate()
        .map(|(i, chi)| TargetInfo {
            kind: "random".into(),
            seed: Some(seed),
            channel_index: Some(i),
            distance_to_identity: Some(hs_distance(chi, &Chi::identity())),
            ..TargetInfo::default()
        })
        .collect();
    let items = solve_batch_with(&chis, &models, constraint, domain);
    Ok(items
        .into_iter()
        .map(|item| {
            let info = &infos[item.target_index];
            match item.result {
                Ok(r) => RunRecord::from_result(info, &r),
                Err(e) => {
                    eprintln!("random channel {} {}: {e}", item.target_index, item.model);
                    RunRecord::new(info, item.model.name(), constraint.name())
                }
            }
        })
        .collect())
}

/// One point of a Bloch-sphere cross-section in the y = 0 plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochRow {
    pub theta: f64,
    pub x_in: f64,
    pub z_in: f64,
    pub x_target: f64,
    pub z_target: f64,
    pub x_model: f64,
    pub z_model: f64,
}

/// Images of `(sin θ, 0, cos θ)`, `θ = 2πk/points`, under both channels.
pub fn bloch_section(target: &Kraus, model: &Kraus, points: usize) -> Result<Vec<BlochRow>, CliError> {
    if points < 8 {
        return Err(CliError::Usage(format!("--points must be at least 8, got {points}")));
    }
    (0..points)
        .map(|k| {
            let theta = TAU * k as f64 / points as f64;
            let r_in = [theta.sin(), 0.0, theta.cos()];
            let t = bloch_image(target, r_in)?;
            let m = bloch_image(model, r_in)?;
            Ok(BlochRow {
                theta: round_sig(theta),
                x_in: round_sig(r_in[0]),
                z_in: round_sig(r_in[2]),
                x_target: round_sig(t[0]),
                z_target: round_sig(t[2]),
                x_model: round_sig(m[0]),
                z_model: round_sig(m[2]),
            })
        })
        .collect()
}

pub fn bloch(args: &BlochArgs) -> Result<Vec<BlochRow>, CliError> {
    let target = resolve_target(&args.target)?;
    let models = expand_models(&[args.model]);
    if models.len() != 1 {
        return Err(CliError::Usage("bloch-section takes a single model".into()));
    }
    let problem = target
        .problem(models[0], args.constraint.into())?
        .with_domain(args.states.into());
    let result = solve(&problem)?;
    bloch_section(&target.kraus_form()?, &build_mixture(&result.params)?, args.points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub constraint: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub valid: bool,
    pub violations: Vec<ViolationRecord>,
}

pub fn validate(path: &Path) -> Result<ValidationRecord, CliError> {
    let chi = read_chi_file(path)?;
    let report = validate_cptp(&chi);
    Ok(ValidationRecord {
        valid: report.is_valid(),
        violations: report
            .violations
            .iter()
            .map(|v| ViolationRecord {
                constraint: v.constraint.to_string(),
                magnitude: round_sig(v.magnitude),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = grid(0.05, 0.95, 19).unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[18], 0.95);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(grid(1.0, 0.0, 5).is_err());
        assert!(grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn bloch_section_of_identity_model() {
        let rows = bloch_section(&adc(0.25).unwrap(), &Kraus::identity(), 8).unwrap();
        for r in &rows {
            assert!((r.x_model - r.x_in).abs() < 1e-12 && (r.z_model - r.z_in).abs() < 1e-12);
        }
        // θ = π maps |1⟩ to (0, 2γ − 1)
        assert!(rows[4].x_target.abs() < 1e-12);
        assert!((rows[4].z_target + 0.5).abs() < 1e-12);
        assert!(bloch_section(&Kraus::identity(), &Kraus::identity(), 7).is_err());
    }
}
