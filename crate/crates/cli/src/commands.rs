use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use swnoon_core::budget::{sweep_error_vs_shift, RabiBrackets};
use swnoon_core::experiment::{feasibility_report, EnsembleSpec, FeasibilityTargets};
use swnoon_core::fringe::{
    estimate_displacement, expected_signal, fringe_scan, simulate_counts_at, CountSample,
};
use swnoon_core::pulse::{
    build_generation_sequence, build_readout_sequence, noon_arm_weights, run, ProtocolEvent,
};
use swnoon_core::state::{CollectiveState, ModeLabel};
use swnoon_core::wave::PulseWaveVectors;

use crate::config::{resolve_waves, ConfigFile, List, Vec3};
use crate::error::CliError;
use crate::format::g12;
use crate::{Cli, Command, EstimateArgs, FeasibilityArgs, FringeArgs, GenerateArgs, SweepArgs, WaveArgs};

pub const SWEEP_HEADER: &str = "order,lifetime_us,delta_e_mhz,p_success,e_total";

struct Globals {
    config: ConfigFile,
    seed: u64,
    out: Option<PathBuf>,
}

pub(crate) fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let seed = config.resolve(cli.seed, "seed", 0)?;
    let out = match cli.out {
        Some(p) => Some(p),
        None => config.get::<PathBuf>("out")?,
    };
    let g = Globals { config, seed, out };
    match cli.command {
        Command::Generate(a) => generate(&g, a),
        Command::Fringe(a) => fringe(&g, a),
        Command::ErrorSweep(a) => error_sweep(&g, a),
        Command::Estimate(a) => estimate(&g, a),
        Command::Feasibility(a) => feasibility(&g, a),
    }
}

fn waves(g: &Globals, w: WaveArgs) -> Result<PulseWaveVectors, CliError> {
    let waves = resolve_waves(&g.config, [w.k_gr_a, w.k_ra_sa, w.k_gr_b, w.k_rb_sb])?;
    if !waves.is_finite() {
        return Err(CliError::Usage("wave vectors must be finite".into()));
    }
    Ok(waves)
}

fn order(g: &Globals, flag: Option<u32>) -> Result<u32, CliError> {
    let order = g.config.resolve(flag, "order", 20)?;
    if order == 0 {
        return Err(CliError::Usage("invalid order 0: the NOON order must be at least 1".into()));
    }
    Ok(order)
}

/// Writes `text` to `--out` or standard output.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn generate(g: &Globals, a: GenerateArgs) -> Result<(), CliError> {
    let order = order(g, a.order)?;
    let events = build_generation_sequence(order)?;
    let pulses = events.iter().filter(|e| e.pulse().is_some()).count();
    if a.pulses {
        println!("{pulses}");
        return Ok(());
    }
    let waves = waves(g, a.waves)?;
    let state = run(&events, &CollectiveState::vacuum(), &waves)?.state;

    let mut report = String::new();
    writeln!(report, "order = {order}").unwrap();
    writeln!(report, "pulses = {pulses}").unwrap();
    writeln!(report, "branches = {}", state.len()).unwrap();
    writeln!(report, "{:<44} {:>15} {:>15} {:>10}", "branch", "re", "im", "weight").unwrap();
    for (cfg, amp) in state.branches() {
        writeln!(report, "{:<44} {:>15} {:>15} {:>10}", cfg.to_string(), g12(amp.re), g12(amp.im), g12(amp.norm_sqr()))
            .unwrap();
    }
    let (wa, wb) = noon_arm_weights(&state, order);
    writeln!(report, "noon_overlap = {}", g12(state.overlap(&CollectiveState::noon(order)).norm())).unwrap();
    writeln!(report, "noon_subspace_weight = {}", g12(wa + wb)).unwrap();

    let dx = g.config.resolve(a.displacement, "displacement", Vec3([0.0; 3]))?.0;
    if dx != [0.0; 3] {
        let mut readout = vec![ProtocolEvent::Displace(dx)];
        readout.extend(build_readout_sequence(order)?);
        let p = run(&readout, &state, &waves)?.detection_probability.unwrap_or(0.0);
        writeln!(report, "readout_probability = {}", g12(p)).unwrap();
    }
    print!("{report}");

    if let Some(path) = &g.out {
        let mut csv = String::from("occ_sa,occ_sb,occ_ra,occ_rb,k_gr_a,k_ra_sa,k_gr_b,k_rb_sb,amp_re,amp_im,weight\n");
        for (cfg, amp) in state.branches() {
            let occ = ModeLabel::ALL.map(|m| cfg.occupation(m).to_string()).join(",");
            let k = cfg.total_k().0.map(|c| c.to_string()).join(",");
            writeln!(csv, "{occ},{k},{},{},{}", g12(amp.re), g12(amp.im), g12(amp.norm_sqr())).unwrap();
        }
        emit(Some(path), &csv)?;
    }
    Ok(())
}

fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.map(|x| x / n))
}

fn scan_direction(g: &Globals, flag: Option<Vec3>, waves: &PulseWaveVectors) -> Result<([f64; 3], f64), CliError> {
    let flag = match flag {
        Some(v) => Some(v),
        None => g.config.get("direction")?,
    };
    let dir = match flag {
        Some(Vec3(d)) => unit(d).ok_or_else(|| CliError::Usage("direction must be a nonzero vector".into()))?,
        None => unit(waves.delta_k().to_array())
            .ok_or_else(|| CliError::Usage("Δk vanishes for these wave vectors; pass --direction".into()))?,
    };
    let projection = waves.delta_k().dot(&dir);
    if projection.abs() < 1e-12 {
        return Err(CliError::Usage("Δk has no component along the scan direction".into()));
    }
    Ok((dir, projection))
}

fn fringe(g: &Globals, a: FringeArgs) -> Result<(), CliError> {
    let order = order(g, a.order)?;
    let waves = waves(g, a.waves)?;
    let min = g.config.resolve(a.min, "min", -0.1)?;
    let max = g.config.resolve(a.max, "max", 0.1)?;
    let steps = g.config.resolve(a.steps, "steps", 101usize)?;
    let shots = g.config.resolve(a.shots, "shots", 0u64)?;
    let offset = g.config.resolve(a.offset, "offset", 0.0)?;
    if steps < 2 {
        return Err(CliError::Usage(format!("steps must be at least 2, got {steps}")));
    }
    if !(min.is_finite() && max.is_finite() && max > min) || !offset.is_finite() {
        return Err(CliError::Usage(format!("bad scan range [{min}, {max}]")));
    }
    let (dir, dk) = scan_direction(g, a.direction, &waves)?;

    let settings: Vec<f64> = (0..steps)
        .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
        .collect();
    let shifted: Vec<f64> = settings.iter().map(|x| x - offset).collect();
    let scan = fringe_scan(order, dir, &shifted, &waves)?;

    let mut csv = String::from(if shots > 0 {
        "displacement_um,probability,counts,expected_sin2\n"
    } else {
        "displacement_um,probability,expected_sin2\n"
    });
    for (i, (x, r)) in settings.iter().zip(&scan).enumerate() {
        let p = r.detection_probability;
        let expected = expected_signal(order, dk, x - offset);
        if shots > 0 {
            let counts = simulate_counts_at(p, shots, g.seed, i as u64)?;
            writeln!(csv, "{},{},{counts},{}", g12(*x), g12(p), g12(expected)).unwrap();
        } else {
            writeln!(csv, "{},{},{}", g12(*x), g12(p), g12(expected)).unwrap();
        }
    }
    emit(g.out.as_deref(), &csv)
}

fn plot_script(csv_name: &str) -> String {
    format!(
        r#"# E(l) versus blockade shift, one panel per Rydberg lifetime.
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
series = defaultdict(list)
with open(path) as f:
    for row in csv.DictReader(f):
        key = (float(row["lifetime_us"]), int(row["order"]))
        series[key].append((float(row["delta_e_mhz"]), float(row["e_total"])))

lifetimes = sorted({{tau for tau, _ in series}})
fig, axes = plt.subplots(1, len(lifetimes), figsize=(5 * len(lifetimes), 4), sharey=True, squeeze=False)
for ax, tau in zip(axes[0], lifetimes):
    for (t, order), points in sorted(series.items()):
        if t != tau:
            continue
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=f"l = {{order}}")
    ax.set_title(f"tau = {{tau:g}} us")
    ax.set_xlabel("Delta_e (MHz)")
    ax.set_yscale("log")
    ax.legend()
axes[0][0].set_ylabel("E(l)")
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"#
    )
}

fn positive_all(name: &str, values: &[f64]) -> Result<(), CliError> {
    match values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        Some(bad) => Err(CliError::Usage(format!("{name}: {bad} must be positive"))),
        None => Ok(()),
    }
}

fn error_sweep(g: &Globals, a: SweepArgs) -> Result<(), CliError> {
    let orders = g.config.resolve(a.orders, "orders", List(vec![5, 10, 15, 20]))?.0;
    let shifts = g
        .config
        .resolve(a.shifts, "shifts", List(vec![20.0, 50.0, 100.0, 200.0, 300.0, 400.0]))?
        .0;
    let lifetimes = g.config.resolve(a.lifetimes, "lifetimes", List(vec![300.0, 400.0]))?.0;
    let atoms = g.config.resolve(a.atoms, "atoms", 400.0)?;
    if orders.contains(&0) {
        return Err(CliError::Usage("orders must be at least 1".into()));
    }
    positive_all("shifts", &shifts)?;
    positive_all("lifetimes", &lifetimes)?;

    let rows = sweep_error_vs_shift(&orders, &shifts, &lifetimes, atoms, &RabiBrackets::default())?;
    let mut csv = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{}",
            r.order,
            g12(r.lifetime_us),
            g12(r.delta_e_mhz),
            g12(r.p_success),
            g12(r.e_total)
        )
        .unwrap();
    }
    emit(g.out.as_deref(), &csv)?;

    let plot = a.plot.or_else(|| g.out.as_ref().map(|p| p.with_extension("plot.py")));
    if let Some(path) = plot {
        let name = g
            .out
            .as_ref()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "error_sweep.csv".into());
        fs::write(&path, plot_script(&name))
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn read_counts(path: &Path, default_shots: Option<u64>) -> Result<Vec<CountSample>, CliError> {
    let bad = |line: u64, msg: String| CliError::Usage(format!("{}:{line}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| bad(e.position().map_or(1, |p| p.line()), e.to_string()))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(bad(1, "empty file".into()));
    }
    let column = |names: &[&str]| headers.iter().position(|h| names.contains(&h));
    let x_col = column(&["displacement_um"]).ok_or_else(|| bad(1, "missing column displacement_um".into()))?;
    let c_col = column(&["count", "counts"]).ok_or_else(|| bad(1, "missing column count".into()))?;
    let s_col = column(&["shots"]);
    if s_col.is_none() && default_shots.is_none() {
        return Err(bad(1, "missing column shots (or pass --shots)".into()));
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let setting: f64 = field(x_col)
            .parse()
            .map_err(|_| bad(line, format!("bad displacement `{}`", field(x_col))))?;
        let count: u64 = field(c_col)
            .parse()
            .map_err(|_| bad(line, format!("bad count `{}`", field(c_col))))?;
        let shots: u64 = match s_col {
            Some(i) => field(i).parse().map_err(|_| bad(line, format!("bad shots `{}`", field(i))))?,
            None => default_shots.expect("checked above"),
        };
        if !setting.is_finite() {
            return Err(bad(line, "displacement must be finite".into()));
        }
        if shots == 0 || count > shots {
            return Err(bad(line, format!("need 0 ≤ count ≤ shots and shots > 0, got {count}/{shots}")));
        }
        samples.push(CountSample { setting, shots, count });
    }
    if samples.is_empty() {
        return Err(bad(1, "no data rows".into()));
    }
    Ok(samples)
}

fn estimate(g: &Globals, a: EstimateArgs) -> Result<(), CliError> {
    let order = order(g, a.order)?;
    let waves = waves(g, a.waves)?;
    let (_, dk) = scan_direction(g, a.direction, &waves)?;
    let default_shots = match a.shots {
        Some(s) => Some(s),
        None => g.config.get("shots")?,
    };
    let samples = read_counts(&a.input, default_shots)?;
    let fit = estimate_displacement(&samples, order, dk)?;

    let mut report = String::new();
    writeln!(report, "order = {order}").unwrap();
    writeln!(report, "settings = {}", samples.len()).unwrap();
    writeln!(report, "estimate_um = {}", g12(fit.estimate)).unwrap();
    writeln!(report, "stderr_um = {}", g12(fit.stderr)).unwrap();
    writeln!(report, "period_um = {}", g12(fit.period)).unwrap();
    if fit.ambiguous {
        writeln!(
            report,
            "warning: settings span at least one fringe period; the offset is only known modulo {} um",
            g12(fit.period)
        )
        .unwrap();
    }
    emit(g.out.as_deref(), &report)
}

fn feasibility(g: &Globals, a: FeasibilityArgs) -> Result<(), CliError> {
    let n: u32 = g.config.require(a.n, "n")?;
    let radius: f64 = g.config.require(a.radius_um, "radius_um")?;
    let density: f64 = g.config.require(a.density_cm3, "density_cm3")?;
    let defaults = FeasibilityTargets::default();
    let targets = FeasibilityTargets {
        shift_mhz: g.config.resolve(a.target_shift_mhz, "target_shift_mhz", defaults.shift_mhz)?,
        shift_tolerance: g.config.resolve(a.shift_tolerance, "shift_tolerance", defaults.shift_tolerance)?,
        protocol_error: g.config.resolve(a.target_error, "target_error", defaults.protocol_error)?,
        order: order(g, a.order)?,
        lifetime_us: g.config.resolve(a.lifetime_us, "lifetime_us", defaults.lifetime_us)?,
    };
    let spec = EnsembleSpec::new(radius, density, n)?;
    let r = feasibility_report(&spec, &targets)?;
    let verdict = |ok: bool| if ok { "pass" } else { "fail" };

    let mut report = String::new();
    writeln!(report, "n = {n}").unwrap();
    writeln!(report, "radius_um = {}", g12(radius)).unwrap();
    writeln!(report, "density_cm3 = {}", g12(density)).unwrap();
    writeln!(report, "min_pair_shift_mhz = {}", g12(r.shift.magnitude_mhz)).unwrap();
    writeln!(
        report,
        "shift_check = {} (target {} MHz, tolerance {}, margin {} MHz)",
        verdict(r.shift_ok),
        g12(targets.shift_mhz),
        g12(targets.shift_tolerance),
        g12(r.shift_margin_mhz)
    )
    .unwrap();
    writeln!(report, "atom_number = {}", g12(r.atom_number)).unwrap();
    writeln!(report, "order = {}", targets.order).unwrap();
    writeln!(report, "e_protocol = {}", g12(r.budget.e_protocol)).unwrap();
    writeln!(report, "e_atom_number = {}", g12(r.budget.e_atom_number)).unwrap();
    writeln!(report, "fidelity = {}", g12(r.budget.fidelity)).unwrap();
    writeln!(
        report,
        "error_check = {} (target {}, margin {})",
        verdict(r.error_ok),
        g12(targets.protocol_error),
        g12(r.error_margin)
    )
    .unwrap();
    for w in &r.budget.boundary_warnings {
        writeln!(report, "note: {w}").unwrap();
    }
    if !r.shift.in_range {
        writeln!(report, "warning: n = {n} is outside the range of the shift fit").unwrap();
    }
    writeln!(report, "result = {}", if r.pass() { "PASS" } else { "FAIL" }).unwrap();
    emit(g.out.as_deref(), &report)
}
