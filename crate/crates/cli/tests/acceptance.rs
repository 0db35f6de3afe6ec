//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use clap::Parser;
use stabapprox::*;
use stabapprox_cli::args::{Cli, Command as Sub};
use stabapprox_cli::commands;
use stabapprox_cli::record::summarize;

type Outcome = Result<String, String>;

struct Suite {
    failed: Vec<String>,
}

impl Suite {
    fn run(&mut self, id: &str, title: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {id}: {title} ({detail}; {secs:.1} s)"),
            Err(detail) => {
                println!("[FAIL] criterion {id}: {title} ({detail}; {secs:.1} s)");
                self.failed.push(id.to_string());
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn gamma_grid() -> Vec<f64> {
    (1..=19).map(|k| 0.05 * k as f64).collect()
}

fn phi_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 * PI / 40.0).collect()
}

fn solve_kraus(target: Kraus, model: ModelKind, constraint: ConstraintKind) -> Result<ApproximationResult, String> {
    let problem = ApproximationProblem::from_kraus(target, model, constraint).map_err(|e| e.to_string())?;
    solve(&problem).map_err(|e| e.to_string())
}

fn adc_solve(gamma: f64, model: ModelKind, constraint: ConstraintKind) -> Result<ApproximationResult, String> {
    solve_kraus(adc(gamma).map_err(|e| e.to_string())?, model, constraint)
}

fn pol_solve(phi: f64, p: f64, model: ModelKind, constraint: ConstraintKind) -> Result<ApproximationResult, String> {
    solve_kraus(pol_xy(phi, p).map_err(|e| e.to_string())?, model, constraint)
}

fn d_pauli(g: f64) -> f64 {
    g * g / 8.0
}

fn d_meas(g: f64) -> f64 {
    (g - 1.0) * (g + 2.0 * (1.0 - g).sqrt() - 2.0) / 8.0
}

fn p_meas(g: f64) -> f64 {
    0.5 * (1.0 + g - (1.0 - g).sqrt())
}

fn d_pauli_worst(g: f64) -> f64 {
    let s = (1.0 - g).sqrt();
    (2.0 * g * g - 3.0 * g + 2.0 + 2.0 * g * s - 2.0 * s) / 4.0
}

fn pol_d_pauli(phi: f64, p: f64) -> f64 {
    0.25 * p * p * (2.0 * phi).sin().powi(2)
}

fn pol_d_clifford(phi: f64, p: f64) -> f64 {
    3.0 / 28.0 * p * p * ((2.0 * phi).sin() + (2.0 * phi).cos() - 1.0).powi(2)
}

const ALL_CONSTRAINTS: [ConstraintKind; 2] = ConstraintKind::ALL;

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for g in gamma_grid() {
        let r = adc_solve(g, ModelKind::Pc, ConstraintKind::AverageFidelity)?;
        let err = (r.distance - d_pauli(g)).abs();
        worst = worst.max(err);
        ensure(err < 1e-6, || format!("gamma {g}: {} vs {}", r.distance, d_pauli(g)))?;
    }
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("max |err| {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for g in gamma_grid() {
        let pc = adc_solve(g, ModelKind::Pc, ConstraintKind::AverageFidelity)?;
        let cc = adc_solve(g, ModelKind::Cc, ConstraintKind::AverageFidelity)?;
        let err = (pc.distance - cc.distance).abs();
        worst = worst.max(err);
        ensure(err < 1e-7, || format!("gamma {g}: PC {} CC {}", pc.distance, cc.distance))?;
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!("max |PC - CC| {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let t0 = Generator::Translation(TranslationLabel(Eigenstate::Zero));
    let (mut worst_d, mut worst_p) = (0.0f64, 0.0f64);
    for g in gamma_grid() {
        for model in [ModelKind::Pmc, ModelKind::Cmc] {
            let r = adc_solve(g, model, ConstraintKind::AverageFidelity)?;
            let err = (r.distance - d_meas(g)).abs();
            worst_d = worst_d.max(err);
            ensure(err < 1e-6, || format!("{model} gamma {g}: {} vs {}", r.distance, d_meas(g)))?;
            let labels: Vec<Generator> = r.support.iter().map(|s| s.0).collect();
            ensure(labels == [t0], || format!("{model} gamma {g}: support {labels:?}"))?;
            let perr = (r.support[0].1 - p_meas(g)).abs();
            worst_p = worst_p.max(perr);
            ensure(perr < 1e-4, || format!("{model} gamma {g}: p_m {} vs {}", r.support[0].1, p_meas(g)))?;
        }
    }
    Ok(format!("max |err| distance {worst_d:.2e}, p_m {worst_p:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for g in gamma_grid() {
        for model in ModelKind::ALL {
            let r = adc_solve(g, model, ConstraintKind::WorstFidelity)?;
            let expected = if model.has_translations() { 2.0 * d_meas(g) } else { d_pauli_worst(g) };
            let err = (r.distance - expected).abs();
            worst = worst.max(err);
            ensure(err < 1e-4, || format!("{model} gamma {g}: {} vs {expected}", r.distance))?;
            ensure(r.f_model <= r.f_target + FIDELITY_SLACK, || format!("{model} gamma {g}: constraint violated"))?;
        }
    }
    Ok(format!("max |err| {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let p = 0.1;
    let x = Generator::Clifford(CliffordLabel::Pauli(Axis::X));
    let hxy = Generator::Clifford(CliffordLabel::HadamardLike(Axis::X, Axis::Y, Sign::Plus));
    let (mut worst_d, mut worst_p, mut worst_period) = (0.0f64, 0.0f64, 0.0f64);
    for phi in phi_grid() {
        let pc = pol_solve(phi, p, ModelKind::Pc, ConstraintKind::AverageFidelity)?;
        let cc = pol_solve(phi, p, ModelKind::Cc, ConstraintKind::AverageFidelity)?;
        let e1 = (pc.distance - pol_d_pauli(phi, p)).abs();
        let e2 = (cc.distance - pol_d_clifford(phi, p)).abs();
        worst_d = worst_d.max(e1).max(e2);
        ensure(e1 < 1e-6, || format!("PC phi {phi}: {} vs {}", pc.distance, pol_d_pauli(phi, p)))?;
        ensure(e2 < 1e-6, || format!("CC phi {phi}: {} vs {}", cc.distance, pol_d_clifford(phi, p)))?;

        let (c, s) = ((2.0 * phi).cos(), (2.0 * phi).sin());
        let p1 = p / 7.0 * (3.0 + 4.0 * c - 3.0 * s);
        let p2 = p / 7.0 * (3.0 - 3.0 * c + 4.0 * s);
        let labels: Vec<Generator> = cc.support.iter().map(|s| s.0).collect();
        ensure(labels.len() == 2 && labels.contains(&x) && labels.contains(&hxy), || {
            format!("CC phi {phi}: support {labels:?}")
        })?;
        let pe = (cc.prob_of(x) - p1).abs().max((cc.prob_of(hxy) - p2).abs());
        worst_p = worst_p.max(pe);
        ensure(pe < 1e-4, || format!("CC phi {phi}: probabilities off by {pe:e}"))?;

        // one quarter period later the distance repeats, and matches the
        // formula evaluated at the translated angle
        let shifted = pol_solve(phi + PI / 4.0, p, ModelKind::Cc, ConstraintKind::AverageFidelity)?;
        let translated = pol_d_clifford(phi + PI / 4.0 - PI / 4.0, p);
        let pe = (shifted.distance - cc.distance).abs().max((shifted.distance - translated).abs());
        worst_period = worst_period.max(pe);
        ensure(pe < 1e-6, || format!("phi {phi}: shifted {} vs {}", shifted.distance, cc.distance))?;
    }
    let ratio = pol_solve(PI / 8.0, p, ModelKind::Pc, ConstraintKind::AverageFidelity)?.distance
        / pol_solve(PI / 8.0, p, ModelKind::Cc, ConstraintKind::AverageFidelity)?.distance;
    ensure((ratio - 6.80).abs() <= 0.05, || format!("ratio at pi/8 {ratio}"))?;
    Ok(format!(
        "max |err| distance {worst_d:.2e}, probs {worst_p:.2e}, period {worst_period:.2e}; ratio {ratio:.3}"
    ))
}

fn criterion_6() -> Outcome {
    let p = 0.1;
    let (mut worst_eq, mut worst_c) = (0.0f64, 0.0f64);
    for phi in phi_grid() {
        let mut by: Vec<[f64; 4]> = Vec::new();
        for constraint in ALL_CONSTRAINTS {
            let mut d = [0.0; 4];
            for (i, model) in ModelKind::ALL.into_iter().enumerate() {
                d[i] = pol_solve(phi, p, model, constraint)?.distance;
            }
            let e = (d[1] - d[0]).abs().max((d[3] - d[2]).abs());
            worst_eq = worst_eq.max(e);
            ensure(e < 1e-7, || format!("{constraint} phi {phi}: {d:?}"))?;
            by.push(d);
        }
        for (model, (avg, worst)) in ModelKind::ALL.iter().zip(by[0].iter().zip(&by[1])) {
            let e = (avg - worst).abs();
            worst_c = worst_c.max(e);
            ensure(e < 1e-6, || format!("{model} phi {phi}: avg {avg} worst {worst}"))?;
        }
    }
    Ok(format!("max |PMC-PC|,|CMC-CC| {worst_eq:.2e}; max |avg-worst| {worst_c:.2e}"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let cli = Cli::try_parse_from(["stabapprox", "random", "--count", "2000", "--seed", "2024", "--model", "all"])
        .map_err(|e| e.to_string())?;
    let Sub::Random(args) = &cli.command else {
        return Err("parsed the wrong subcommand".into());
    };
    let records = commands::random(args).map_err(|e| e.to_string())?;
    ensure(records.iter().all(|r| r.distance.is_some()), || "some solves failed".into())?;
    let summary = summarize(&records);
    let get = |m: &str| summary.get(m).cloned().ok_or(format!("no summary for {m}"));
    let (pc, pmc, cc, cmc) = (get("pc")?, get("pmc")?, get("cc")?, get("cmc")?);
    ensure(pc.count == 2000 && cmc.count == 2000, || "wrong counts".into())?;
    ensure(pc.mean > pmc.mean && cc.mean > cmc.mean && pc.mean > cc.mean, || {
        format!("mean ordering: pc {} pmc {} cc {} cmc {}", pc.mean, pmc.mean, cc.mean, cmc.mean)
    })?;
    ensure(cmc.frac_below_1e_3 >= 0.35, || format!("cmc fraction below 1e-3: {}", cmc.frac_below_1e_3))?;
    for (name, s) in [("pc", &pc), ("pmc", &pmc), ("cc", &cc)] {
        ensure(s.frac_below_1e_3 <= 0.12, || format!("{name} fraction below 1e-3: {}", s.frac_below_1e_3))?;
    }
    for (name, s, paper) in [("pc", &pc, 0.043), ("pmc", &pmc, 0.029), ("cc", &cc, 0.015), ("cmc", &cmc, 0.0027)] {
        let ratio = s.mean / paper;
        ensure((0.5..=2.0).contains(&ratio), || format!("{name} mean {} vs {paper}", s.mean))?;
    }
    within_time(start, Duration::from_secs(30 * 60))?;
    Ok(format!(
        "means pc {:.4} pmc {:.4} cc {:.4} cmc {:.4}; frac<1e-3 pc {:.3} pmc {:.3} cc {:.3} cmc {:.3}",
        pc.mean,
        pmc.mean,
        cc.mean,
        cmc.mean,
        pc.frac_below_1e_3,
        pmc.frac_below_1e_3,
        cc.frac_below_1e_3,
        cmc.frac_below_1e_3
    ))
}

/// Dense-grid oracle for the worst-case integrand: Cartesian grid over the
/// ball (or polar grid over the sphere) followed by a shrinking pattern search.
fn grid_oracle(ch: &Kraus, domain: StateDomain) -> f64 {
    let integrand = |r: [f64; 3]| -> f64 {
        let rho = DensityMatrix::from_bloch(r).unwrap().to_matrix();
        ch.ops().iter().map(|k| (k * &rho).trace().norm_sqr()).sum()
    };
    let to_point = |c: [f64; 3]| -> [f64; 3] {
        match domain {
            StateDomain::Pure => [c[0].sin() * c[1].cos(), c[0].sin() * c[1].sin(), c[0].cos()],
            StateDomain::Mixed => {
                let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                if n > 1.0 {
                    c.map(|v| v / n)
                } else {
                    c
                }
            }
        }
    };
    let mut candidates: Vec<[f64; 3]> = Vec::new();
    match domain {
        StateDomain::Pure => {
            for i in 0..=100 {
                for j in 0..200 {
                    candidates.push([PI * i as f64 / 100.0, PI * j as f64 / 100.0, 0.0]);
                }
            }
        }
        StateDomain::Mixed => {
            let n = 30;
            for i in 0..=n {
                for j in 0..=n {
                    for k in 0..=n {
                        let c = [i, j, k].map(|t| -1.0 + 2.0 * t as f64 / n as f64);
                        if c.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                            candidates.push(c);
                        }
                    }
                }
            }
        }
    }
    let (mut best_v, mut best_c) = (f64::INFINITY, [0.0; 3]);
    for c in candidates {
        let v = integrand(to_point(c));
        if v < best_v {
            best_v = v;
            best_c = c;
        }
    }
    let mut step = 0.05;
    while step > 1e-10 {
        let mut improved = false;
        for axis in 0..3 {
            for dir in [-1.0, 1.0] {
                let mut c = best_c;
                c[axis] += dir * step;
                let v = integrand(to_point(c));
                if v < best_v {
                    best_v = v;
                    best_c = c;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best_v
}

fn criterion_8() -> Outcome {
    // generated channels are CPTP
    let randoms = random_chi_batch(2024, 2000).map_err(|e| e.to_string())?;
    ensure(randoms.iter().all(|c| validate_cptp(c).is_valid()), || "random channel failed validation".into())?;
    for g in gamma_grid() {
        ensure(validate_cptp(&kraus_to_chi(&adc(g).unwrap()).unwrap()).is_valid(), || format!("adc {g}"))?;
    }
    for phi in phi_grid() {
        ensure(validate_cptp(&kraus_to_chi(&pol_xy(phi, 0.1).unwrap()).unwrap()).is_valid(), || format!("pol {phi}"))?;
    }
    let generators = enumerate_generators(ModelKind::Cmc);
    for g in &generators {
        ensure(validate_cptp(&g.chi::<f64>()).is_valid(), || format!("generator {g}"))?;
    }

    // closure of the Clifford set
    let cliffords: Vec<Matrix> = CliffordLabel::all().iter().map(|l| l.matrix()).collect();
    ensure(cliffords.len() == 24, || format!("{} Cliffords", cliffords.len()))?;
    for a in &cliffords {
        for b in &cliffords {
            let prod = a * b;
            ensure(cliffords.iter().any(|c| c.eq_up_to_phase(&prod, 1e-12)), || "product outside the set".into())?;
        }
    }

    // χ action agrees with Kraus action on probe states
    let mut worst_action = 0.0f64;
    for g in &generators {
        let ch = g.channel::<f64>();
        let chi = g.chi::<f64>();
        for probe in Density::probes() {
            let by_kraus = apply_channel(&ch, &probe);
            let by_chi = chi.apply(&probe.to_matrix());
            let diff = (&by_kraus - &by_chi).max_abs();
            worst_action = worst_action.max(diff);
            ensure(diff < 1e-10, || format!("{g}: action differs by {diff:e}"))?;
        }
    }

    // hierarchy monotonicity on 200 random targets, both constraints
    let targets = random_chi_batch(77, 200).map_err(|e| e.to_string())?;
    let mut worst_mono = f64::NEG_INFINITY;
    for constraint in ALL_CONSTRAINTS {
        let items = solve_batch(&targets, &ModelKind::ALL, constraint);
        for (t, chunk) in items.chunks(4).enumerate() {
            let mut d = [0.0; 4];
            for (k, item) in chunk.iter().enumerate() {
                d[k] = item.result.as_ref().map_err(|e| format!("target {t}: {e}"))?.distance;
            }
            let (pc, pmc, cc, cmc) = (d[0], d[1], d[2], d[3]);
            let excess = [cmc - cc, cmc - pmc, cc - pc, pmc - pc].into_iter().fold(f64::NEG_INFINITY, f64::max);
            worst_mono = worst_mono.max(excess);
            ensure(excess <= 1e-7, || format!("{constraint} target {t}: {d:?}"))?;
        }
    }

    // worst-case fidelity of damping against the grid oracle
    let mut worst_fid = 0.0f64;
    for g in [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95] {
        let ch = adc(g).unwrap();
        for domain in StateDomain::ALL {
            let w = worst_fidelity_in(&Matrix::identity(2), &ch, domain).map_err(|e| e.to_string())?.value;
            let oracle = grid_oracle(&ch, domain);
            let err = (w - (1.0 - g)).abs().max((w - oracle).abs());
            worst_fid = worst_fid.max(err);
            ensure(err < 1e-6, || format!("{domain} gamma {g}: {w} vs oracle {oracle}"))?;
        }
    }
    Ok(format!(
        "action {worst_action:.1e}, hierarchy excess {worst_mono:.1e}, worst fidelity {worst_fid:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_stabapprox"))
            .args(["random", "--count", "200", "--seed", "99", "--model", "all"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success() && b.status.success(), || "random command failed".into())?;
    ensure(a.stdout == b.stdout, || "outputs differ".into())?;
    let rows = a.stdout.iter().filter(|&&c| c == b'\n').count();
    Ok(format!("{} bytes, {} lines identical", a.stdout.len(), rows))
}

fn main() {
    let mut suite = Suite { failed: Vec::new() };
    suite.run("1", "ADC / PC / average matches gamma^2/8", criterion_1);
    suite.run("2", "ADC / CC / average equals PC", criterion_2);
    suite.run("3", "ADC / PMC, CMC / average distance and support", criterion_3);
    suite.run("4", "ADC worst-case distances", criterion_4);
    suite.run("5", "Pol / PC and CC distances, support, ratio, period", criterion_5);
    suite.run("6", "Pol equalities across models and constraints", criterion_6);
    suite.run("7", "random batch statistics (2000 channels)", criterion_7);
    suite.run("8", "property suite", criterion_8);
    suite.run("9", "determinism of random CSV output", criterion_9);
    if suite.failed.is_empty() {
        println!("acceptance: all 9 criteria passed");
    } else {
        println!("acceptance: failed criteria {}", suite.failed.join(", "));
        std::process::exit(1);
    }
}
