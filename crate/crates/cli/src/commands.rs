use crate::*;
use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use sle_core::aggregate::{theta_moment_scan, verify_lengthbias as verify, ScanOptions};
use sle_core::content::{natural_length as content_length, natural_reparam, Ladder};
use sle_core::curvespace::io::{load_slc1, save_slc1};
use sle_core::green::{green_config, Configuration, GreenParams};
use sle_core::harness::{
    escape_slope, ingest_traces, lengthbias_options, twosided_oracle_comparison, write_trace, Budgets, ExperimentConfig,
    Suite, TraceSidecar,
};
use sle_core::loewner::sample_chordal_path;
use sle_core::measures::io::save_ensemble;
use sle_core::twosided::{default_stop_radius, escape_stat_weighted, sample_twosided as twosided, TwoSidedOptions};
use std::path::Path;

fn point((x, y): (f64, f64)) -> Complex64 {
    Complex64::new(x, y)
}

fn configuration(domain: DomainArg, kappa: f64) -> Result<Configuration> {
    Ok(match domain {
        DomainArg::Halfplane => Configuration::halfplane(kappa, 0.0, None)?,
        DomainArg::Disk => Configuration::disk(kappa, Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0))?,
        DomainArg::TwoSlit => Configuration::two_slit(kappa)?,
    })
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn sample_chordal(a: SampleChordal) -> Result<bool> {
    create_dir(&a.out)?;
    for k in 0..a.n as u64 {
        let (curve, _) = sample_chordal_path(a.kappa, a.tmax, a.dt, a.seed, k)?;
        let meta = TraceSidecar { dt: Some(a.dt), ..TraceSidecar::new(a.kappa, a.seed, k) };
        write_trace(&a.out, &format!("trace-{k:05}"), &curve, &meta)?;
    }
    eprintln!("wrote {} traces to {}", a.n, a.out.display());
    Ok(true)
}

pub fn sample_twosided(a: SampleTwosided) -> Result<bool> {
    let cfg = configuration(a.domain, a.kappa)?;
    let zeta = point(a.zeta);
    let stop = match a.stop {
        Some(s) => s,
        None => default_stop_radius(&cfg, zeta)?,
    };
    let opts = TwoSidedOptions { natural: !a.capacity, ..TwoSidedOptions::new(a.h) };
    create_dir(&a.out)?;
    let mut failed = 0;
    for k in 0..a.n as u64 {
        match twosided(&cfg, zeta, stop, &opts, a.seed, k) {
            Ok(s) => {
                let mut meta = TraceSidecar { h: Some(a.h), ..TraceSidecar::new(a.kappa, a.seed, k) };
                if opts.natural {
                    meta = meta.natural();
                }
                write_trace(&a.out, &format!("trace-{k:05}"), &s.curve, &meta)?;
            }
            Err(e) => {
                log::warn!("sample {k}: {e}");
                failed += 1;
            }
        }
    }
    eprintln!("wrote {} traces to {} ({failed} rejected)", a.n - failed, a.out.display());
    Ok(true)
}

pub fn oracle_2sr(a: Oracle2sr) -> Result<bool> {
    let r = twosided_oracle_comparison(a.kappa, a.n, a.h, a.seed)?;
    if let Some(path) = &a.ensemble {
        save_ensemble(path, &r.twosided)?;
    }
    print_json(&r)?;
    Ok(true)
}

pub fn natural_length(a: NaturalLength) -> Result<bool> {
    let curve = load_slc1(&a.input)?;
    let p = GreenParams::new(a.kappa)?;
    let ladder = if a.eps.is_empty() { Ladder::default() } else { Ladder::Explicit(a.eps.clone()) };
    let est = content_length(&curve, &p, &ladder)?;
    if let Some(path) = &a.reparam {
        save_slc1(path, &natural_reparam(&curve, &p, &ladder)?)?;
    }
    print_json(&est)?;
    Ok(true)
}

pub fn green(a: Green) -> Result<bool> {
    let cfg = match a.domain {
        DomainArg::Halfplane => Configuration::halfplane(a.kappa, a.from, a.to)?,
        d => configuration(d, a.kappa)?,
    };
    let p = GreenParams::new(a.kappa)?.with_constant(a.c_kappa)?;
    let g = green_config(&cfg, point(a.zeta), &p)?;
    print_json(&serde_json::json!({ "kappa": a.kappa, "zeta": [a.zeta.0, a.zeta.1], "c_kappa": a.c_kappa, "green": g }))?;
    Ok(true)
}

pub fn escape_stats(a: EscapeStats) -> Result<bool> {
    let ingest = ingest_traces(&a.input)?;
    if ingest.ensemble.is_empty() {
        bail!("no readable traces in {}", a.input.display());
    }
    let rows = escape_stat_weighted(ingest.ensemble.curves(), ingest.ensemble.weights(), &a.radii);
    let (slope, stderr) = escape_slope(&rows).unwrap_or((f64::NAN, f64::NAN));
    let skipped: Vec<_> = ingest.failures.iter().map(|(p, e)| serde_json::json!({ "file": p, "error": e })).collect();
    print_json(&serde_json::json!({
        "kappa": ingest.kappa,
        "traces": ingest.ensemble.len(),
        "rows": rows,
        "slope": slope,
        "slope_stderr": stderr,
        "skipped": skipped,
    }))?;
    Ok(true)
}

pub fn theta_scan(a: ThetaScan) -> Result<bool> {
    let cfg = configuration(DomainArg::Disk, a.kappa)?;
    let mut opts = ScanOptions::new(point(a.zeta), a.diameters, a.n, a.seed);
    opts.h = a.h;
    print_json(&theta_moment_scan(&cfg, &opts)?)?;
    Ok(true)
}

pub fn verify_lengthbias(a: VerifyLengthbias) -> Result<bool> {
    let cfg = configuration(DomainArg::Disk, a.kappa)?;
    let mut opts = lengthbias_options(a.n, a.h, a.seed)?;
    opts.mesh_fractions = a.mesh;
    opts.time_budget_secs = a.time_budget;
    let r = verify(&cfg, &opts)?;
    create_dir(&a.out)?;
    write_json(&a.out.join("lengthbias.json"), &r)?;
    let csv = std::fs::File::create(a.out.join("lengthbias.csv"))?;
    r.write_csv(csv)?;
    std::fs::write(a.out.join("lengthbias.gp"), r.gnuplot_script("lengthbias.csv", "lengthbias.png"))?;
    println!(
        "final distance {:.4}, mass ratio {:.4}, trend {}, {}",
        r.final_distance,
        r.final_mass_ratio,
        if r.trend_ok { "ok" } else { "broken" },
        if r.complete { "complete" } else { "incomplete" }
    );
    Ok(true)
}

pub fn run_suite(a: RunSuite) -> Result<bool> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            if a.suite.is_empty() {
                bail!("give an experiment file with --config or suites with --suite");
            }
            let out = a.output_dir.clone().unwrap_or_else(|| "reports".into());
            ExperimentConfig::new(Vec::new(), a.seed, out)
        }
    };
    if !a.suite.is_empty() {
        cfg.suites = a
            .suite
            .iter()
            .map(|s| serde_json::from_value::<Suite>(serde_json::Value::String(s.clone())).with_context(|| format!("unknown suite {s:?}")))
            .collect::<Result<_>>()?;
    }
    if let Some(dir) = a.output_dir {
        cfg.output_dir = dir;
    }
    if a.full {
        cfg.budgets = Budgets::full();
    }
    let reports = sle_core::harness::run_suite(&cfg)?;
    let mut all = true;
    for r in &reports {
        println!("{:<17} {}  {}", r.suite.name(), if r.passed { "PASS" } else { "FAIL" }, r.summary);
        all &= r.passed;
    }
    eprintln!("reports in {}", cfg.resolved_output_dir().display());
    Ok(all)
}
