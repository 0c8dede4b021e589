use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ncs_sched::cycles::{
    check_prop3, check_prop4, check_t_contractive, find_t_factors, transition_counts, Cycle, TFactors, DEFAULT_T_MAX,
};
use ncs_sched::design::design as run_design;
use ncs_sched::matops::spectral_radius;
use ncs_sched::reproduce::{self, Outcome};
use ncs_sched::scheduler::{build_policy, round_robin, SchedulingPolicy};
use ncs_sched::simulator::{
    classify_gas, envelope_check, monodromy, simulate as run_simulation, verify_certificates, GasVerdict, Trace,
    CERTIFICATE_TOL, ENVELOPE_TOL,
};

use crate::artifact::DesignArtifact;
use crate::config::{read_cycle_file, RunConfig};
use crate::error::{input, CliError};

/// Seeds used by `reproduce` unless overridden.
pub const FIVE_PLANT_SEED: u64 = 2024;
pub const SCALE_SEED: u64 = 7;
pub const SCALE_CAPACITY: usize = 10;
const DEFAULT_SCALE_SIZES: [usize; 2] = [100, 200];
const FULL_SCALE_SIZES: [usize; 3] = [500, 700, 1000];

/// Peak-norm shrink factor between the first and last period used by `simulate`.
const GAS_DECAY: f64 = 0.5;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write { path: path.into(), source })
}

fn out_path(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })?;
    Ok(dir.join(name))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn load_cycle(cfg: &RunConfig, cycle: Option<&Path>) -> Result<(Cycle, Option<TFactors>), CliError> {
    match cycle {
        Some(p) => read_cycle_file(p, cfg.num_plants()),
        None => cfg.cycle(),
    }
}

pub fn design(config: &Path, cycle: Option<&Path>, t_max: Option<u64>, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let ncs = cfg.ncs()?;
    let (cycle, _) = load_cycle(&cfg, cycle)?;
    let opts = cfg.design_options(t_max);
    eprintln!(
        "designing for cycle {cycle} (n = {}), grid h_s = {}, h_u = {}, kappa_min = {:e}, lmi_tol = {:e}, T_max = {}",
        cycle.len(),
        opts.grid.h_s,
        opts.grid.h_u,
        opts.grid.kappa_min,
        opts.grid.lmi_tol,
        opts.t_max
    );
    let result = run_design(&ncs, &cycle, &opts)?;
    let artifact = DesignArtifact::from_result(&result, &opts.grid, opts.t_max);
    let mut summary = String::new();
    writeln!(summary, "T-factors {:?} (period {})", artifact.t_factors, artifact.period).unwrap();
    writeln!(summary, "Ξ = {}", fmt_vec(&artifact.xi)).unwrap();
    writeln!(summary, "margins = {}", fmt_vec(&artifact.margins)).unwrap();
    for c in &artifact.certificates {
        writeln!(
            summary,
            "plant {}: λs = {:.6}, λu = {:.6}, μsu = {:.6}, μus = {:.6}",
            c.plant, c.lambda_s, c.lambda_u, c.mu_su, c.mu_us
        )
        .unwrap();
    }
    match out {
        Some(dir) => {
            let path = out_path(dir, "design.json")?;
            write_file(&path, &artifact.to_json())?;
            print!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            eprint!("{summary}");
            print!("{}", artifact.to_json());
        }
    }
    Ok(())
}

pub fn schedule(design: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let artifact = DesignArtifact::load(design)?;
    let (cycle, t) = artifact.cycle()?;
    let scalars = artifact.scalars()?;
    let report = check_t_contractive(&cycle, &t, &scalars).map_err(input)?;
    if !report.contractive {
        return Err(CliError::NotContractive(format!("plants {:?} have Ξ ≥ 0", report.failing_plants())));
    }
    let policy = build_policy(&cycle, &t).map_err(input)?;
    let text = policy.to_text();
    match out {
        Some(dir) => {
            let path = out_path(dir, "policy.txt")?;
            write_file(&path, &text)?;
            println!("wrote {} (period {})", path.display(), policy.period());
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub struct SimulateArgs<'a> {
    pub config: &'a Path,
    pub policy: Option<&'a Path>,
    pub round_robin: bool,
    pub design: Option<&'a Path>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<&'a Path>,
}

fn write_trace(path: &Path, trace: &Trace<f64>) -> Result<(), CliError> {
    let werr = |e: csv::Error| CliError::Write { path: path.into(), source: std::io::Error::other(e) };
    let mut w = csv::Writer::from_path(path).map_err(werr)?;
    let states = trace.states.as_ref().expect("simulate records states");
    let d = states.first().and_then(|s| s.first()).map_or(0, Vec::len);
    let mut header = vec!["t".to_string(), "plant".to_string(), "norm".to_string()];
    header.extend((1..=d).map(|k| format!("x{k}")));
    w.write_record(&header).map_err(werr)?;
    for t in 0..=trace.horizon {
        for (i, plant_states) in states.iter().enumerate() {
            let mut row = vec![t.to_string(), (i + 1).to_string(), format!("{:e}", trace.norms[i][t])];
            row.extend(plant_states[t].iter().map(|x| format!("{x:e}")));
            w.write_record(&row).map_err(werr)?;
        }
    }
    w.flush().map_err(|source| CliError::Write { path: path.into(), source })
}

pub fn simulate(args: SimulateArgs<'_>) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config)?;
    let ncs = cfg.ncs()?;
    let policy = if args.round_robin {
        round_robin(&cfg.round_robin_groups()?, cfg.simulation.round_robin_dwell).map_err(input)?
    } else {
        let path = args.policy.expect("clap requires --policy without --round-robin");
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        SchedulingPolicy::from_text(&text).map_err(|e| CliError::Config { path: path.into(), message: e.to_string() })?
    };
    let certs = args.design.map(|p| DesignArtifact::load(p)?.certificates()).transpose()?;
    let horizon = args.horizon.unwrap_or(cfg.simulation.horizon);
    let runs = cfg.initial_states(args.seed)?;
    let n = ncs.num_plants();
    let window = policy.period() as usize;

    let mut report = String::new();
    let source = if args.round_robin { "round robin".to_string() } else { format!("policy {}", args.policy.unwrap().display()) };
    writeln!(report, "{source}: period {}, horizon {horizon}, {} runs", policy.period(), runs.len()).unwrap();
    writeln!(
        report,
        "tolerances: certificate {CERTIFICATE_TOL:e} relative, envelope {ENVELOPE_TOL:e} relative, GAS window {window} with decay {GAS_DECAY}"
    )
    .unwrap();

    let mut counts = vec![[0usize; 3]; n];
    let mut worst_growth = vec![0.0f64; n];
    let (mut cert_violations, mut env_violations, mut worst_ratio) = (0usize, 0usize, 0.0f64);
    let mut short_horizon = false;
    for (r, x0) in runs.iter().enumerate() {
        let trace = run_simulation(&ncs, &policy, x0, horizon, true).map_err(input)?;
        match classify_gas(&trace, window, GAS_DECAY) {
            Ok(verdicts) => {
                for (i, v) in verdicts.iter().enumerate() {
                    let k = match v {
                        GasVerdict::Converging => 0,
                        GasVerdict::Diverging => 1,
                        GasVerdict::Inconclusive => 2,
                    };
                    counts[i][k] += 1;
                }
            }
            Err(_) => short_horizon = true,
        }
        for (i, ns) in trace.norms.iter().enumerate() {
            if ns[0] > 0.0 {
                worst_growth[i] = worst_growth[i].max(ns[ns.len() - 1] / ns[0]);
            }
        }
        if let Some(certs) = &certs {
            let c = verify_certificates(certs, &trace, CERTIFICATE_TOL).map_err(input)?;
            cert_violations += c.violations.len();
            worst_ratio = worst_ratio.max(c.worst_ratio);
            let e = envelope_check(certs, &policy, &trace, ENVELOPE_TOL).map_err(input)?;
            env_violations += e.plants.iter().map(|p| p.violations).sum::<usize>();
        }
        if let Some(dir) = args.out {
            write_trace(&out_path(dir, &format!("trace_{r:03}.csv"))?, &trace)?;
        }
    }

    let mut diverging = 0;
    for i in 0..n {
        let rho = monodromy(&ncs, &policy, i + 1).ok().and_then(|m| spectral_radius(&m).ok());
        let rho = rho.map_or("n/a".to_string(), |r| format!("{r:.6}"));
        let verdict = if short_horizon {
            "horizon shorter than two periods, not classified".to_string()
        } else {
            format!("converging {}, diverging {}, inconclusive {}", counts[i][0], counts[i][1], counts[i][2])
        };
        diverging += counts[i][1];
        writeln!(
            report,
            "plant {}: {verdict}; largest ‖x(T)‖/‖x(0)‖ = {:.4e}; one-period ρ = {rho}",
            i + 1,
            worst_growth[i]
        )
        .unwrap();
    }
    if certs.is_some() {
        writeln!(
            report,
            "certificate violations {cert_violations} (worst ratio {worst_ratio:.6}), envelope violations {env_violations}"
        )
        .unwrap();
    }
    print!("{report}");
    if let Some(dir) = args.out {
        write_file(&out_path(dir, "report.txt")?, &report)?;
    }
    if cert_violations + env_violations > 0 {
        return Err(CliError::Verification(format!(
            "{cert_violations} certificate and {env_violations} envelope violations"
        )));
    }
    if diverging > 0 {
        return Err(CliError::Verification(format!("{diverging} plant runs classified diverging")));
    }
    Ok(())
}

pub fn check_cycle(config: Option<&Path>, cycle: Option<&Path>, design: Option<&Path>, t_max: Option<u64>) -> Result<(), CliError> {
    let cfg = config.map(RunConfig::load).transpose()?;
    let artifact = design.map(DesignArtifact::load).transpose()?;
    let (n, m) = match (&cfg, &artifact) {
        (Some(c), _) => (c.num_plants(), c.capacity),
        (None, Some(a)) => (a.num_plants, a.capacity),
        (None, None) => unreachable!("clap requires --config or --design"),
    };
    let scalars = match (&artifact, &cfg) {
        (Some(a), _) => a.scalars()?,
        (None, Some(c)) => c
            .certificate_scalars()
            .ok_or_else(|| CliError::Input("no certificate scalars: pass --design or add `scalars` to the config".into()))??,
        (None, None) => unreachable!(),
    };
    if scalars.len() != n {
        return Err(CliError::Input(format!("{} certificate rows for {n} plants", scalars.len())));
    }
    let (cycle, given_t) = match (cycle, &cfg, &artifact) {
        (Some(p), _, _) => read_cycle_file(p, n)?,
        (None, Some(c), _) if c.cycle.is_some() => c.cycle()?,
        (None, _, Some(a)) => {
            let (c, t) = a.cycle()?;
            (c, Some(t))
        }
        _ => return Err(CliError::Input("no cycle: pass --cycle or add a [cycle] section".into())),
    };
    if cycle.num_plants() != n || cycle.capacity() != m {
        return Err(CliError::Input(format!("cycle {cycle} does not match N = {n}, M = {m}")));
    }
    println!("cycle {cycle} (n = {})", cycle.len());
    for i in 1..=n {
        let tc = transition_counts(&cycle, i);
        println!("plant {i}: stable at {} vertices, {} s→u and {} u→s switches", cycle.modes(i).iter().filter(|m| **m == ncs_sched::graph::Mode::Stable).count(), tc.su, tc.us);
    }
    if m == 1 {
        let r = check_prop3(&scalars, n).map_err(input)?;
        println!("rotation condition |ln λs| − (N−1)|ln λu| = {} ({})", fmt_vec(&r.values), if r.passed { "holds" } else { "fails" });
    }
    if 2 * m >= n {
        let r = check_prop4(&scalars, n, m).map_err(input)?;
        println!("two-vertex condition |ln λs| − |ln λu| = {} ({})", fmt_vec(&r.values), if r.passed { "holds" } else { "fails" });
    }
    let t_max = t_max.or(cfg.as_ref().map(|c| c.design.t_max)).unwrap_or(DEFAULT_T_MAX);
    let t = match given_t {
        Some(t) => t,
        None => match find_t_factors(&cycle, &scalars, t_max) {
            Some(t) => {
                println!("searched T-factors up to T_max = {t_max}");
                t
            }
            None => {
                return Err(CliError::NotContractive(format!(
                    "no T-factors up to T_max = {t_max}; the search does not conclude about their non-existence"
                )))
            }
        },
    };
    let report = check_t_contractive(&cycle, &t, &scalars).map_err(input)?;
    println!("T-factors {:?}", t.as_slice());
    println!("Ξ = {}", fmt_vec(&report.xi));
    println!("margins = {}", fmt_vec(&report.margins));
    if report.contractive {
        println!("T-contractive");
        Ok(())
    } else {
        Err(CliError::NotContractive(format!("plants {:?} have Ξ ≥ 0", report.failing_plants())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    FivePlant,
    Scale,
    Examples,
}

fn print_outcome(o: &Outcome) {
    println!("{o}");
    for d in &o.details {
        println!("    {d}");
    }
}

pub fn reproduce(suite: Suite, sizes: &[usize], full_scale: bool, seed: Option<u64>) -> Result<(), CliError> {
    let outcomes = match suite {
        Suite::FivePlant => reproduce::five_plant(seed.unwrap_or(FIVE_PLANT_SEED)),
        Suite::Examples => reproduce::examples(),
        Suite::Scale => {
            let mut ns: Vec<usize> = if sizes.is_empty() { DEFAULT_SCALE_SIZES.to_vec() } else { sizes.to_vec() };
            if full_scale {
                ns.extend(FULL_SCALE_SIZES);
            }
            if let Some(&bad) = ns.iter().find(|&&n| n <= SCALE_CAPACITY) {
                return Err(CliError::Input(format!("--n {bad} must exceed M = {SCALE_CAPACITY}")));
            }
            vec![reproduce::scale_check(&ns, SCALE_CAPACITY, seed.unwrap_or(SCALE_SEED))]
        }
    };
    for o in &outcomes {
        print_outcome(o);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} criteria failed")));
    }
    Ok(())
}
