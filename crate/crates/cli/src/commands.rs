use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ormac::analysis::{
    conditional_entropy_limit, cost_bounds_ar, cost_bounds_mt, entropy_limit,
    exact_conditional_entropy, exact_entropy, feasibility_mt, nats_to_bits, rate_region_point,
    sumrate_threshold,
};
use ormac::bloom::{occupancy_bound, weight_pmf};
use ormac::harness::{persist, run_sweep, run_trials_with, Execution, Summary, SweepRow};
use ormac::schemes::{Mode, Scenario};
use ormac::{Error, Result};

use crate::config::SweepFile;
use crate::{BoundsArgs, EntropyArgs, ScenarioFlags, SimulateArgs, SweepArgs, WeightDistArgs};

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::Io { path: PathBuf::from("<stdout>"), source: e })
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(crate::OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ormac-out"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    }
    fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn rate_unit(nats: bool) -> (&'static str, f64) {
    if nats {
        ("nats/c.u.", std::f64::consts::LN_2)
    } else {
        ("bits/c.u.", 1.0)
    }
}

pub fn bounds(a: &BoundsArgs, out: &mut dyn Write) -> Result<()> {
    let ar = cost_bounds_ar(a.beta)?;
    let mt = cost_bounds_mt(a.beta, a.gamma)?;
    let threshold = sumrate_threshold(a.kappa, a.eps)?;
    let (unit, scale) = rate_unit(a.nats);
    let mut s = String::new();
    let _ = writeln!(s, "beta = {}, gamma = {}", a.beta, a.gamma);
    let _ = writeln!(s, "activity recognition cost   Omega_a in [{:.4}, {:.4}]", ar.lower, ar.upper);
    let _ = writeln!(s, "message transmission cost   Omega_m in [{:.4}, {:.4}]", mt.lower, mt.upper);
    let _ = writeln!(
        s,
        "sum-rate threshold (kappa = {:.4}, eps = {})   {:.4} {unit}",
        a.kappa,
        a.eps,
        nats_to_bits(threshold) * scale
    );
    if let (Some(k1), Some(k2)) = (a.kappa1, a.kappa2) {
        for (name, k) in [("kappa1", k1), ("kappa2", k2)] {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Domain { name, value: k, domain: "(0, inf)" });
            }
        }
        let verdict = if feasibility_mt(k1, k2, a.beta, a.gamma) { "feasible" } else { "infeasible" };
        let _ = writeln!(s, "two-phase (kappa1 = {k1:.4}, kappa2 = {k2:.4})   {verdict}");
    }
    if let Some(r) = &a.region {
        if r.len() != 2 {
            return Err(Error::Parameter(format!(
                "--region takes two densities, got {}",
                r.len()
            )));
        }
        let b = rate_region_point(r[0], r[1])?;
        let _ = writeln!(
            s,
            "two-user rates (kappa = {:.4}, {:.4})   R1 <= {:.4}, R2 <= {:.4}, R1 + R2 <= {:.4} {unit}",
            r[0],
            r[1],
            b.user1 * scale,
            b.user2 * scale,
            b.sum * scale
        );
    }
    emit(out, &s)
}

pub fn weight_dist(a: &WeightDistArgs, out: &mut dyn Write) -> Result<()> {
    let pmf = weight_pmf(a.len, a.hashes)?;
    let (csv, note) = match a.eps {
        None => (pmf.to_csv(), None),
        Some(eps) => {
            let b = occupancy_bound(a.len, a.hashes.max(1), eps)?;
            let l = a.len as f64;
            let outside = |w: usize| ((l - w as f64) - b.zero_fraction * l).abs() > eps * l;
            let mut csv = String::from("w,probability,outside_band\n");
            let mut mass = 0.0;
            for (w, p) in pmf.iter() {
                let o = outside(w);
                if o {
                    mass += p;
                }
                let _ = writeln!(csv, "{w},{p},{}", o as u8);
            }
            let note = format!(
                "mass outside |zeros - {:.4} L| <= {eps} L: {mass:.6e}; bound {:.6e}\n",
                b.zero_fraction, b.clamped
            );
            (csv, Some(note))
        }
    };
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            emit(out, &format!("wrote {}\n", path.display()))?;
            if let Some(n) = note {
                emit(out, &n)?;
            }
        }
        None => {
            emit(out, &csv)?;
            if let Some(n) = note {
                eprint!("{n}");
            }
        }
    }
    Ok(())
}

pub fn entropy(a: &EntropyArgs, out: &mut dyn Write) -> Result<()> {
    let (unit, scale) = rate_unit(a.nats);
    let unit = unit.replace("/c.u.", "");
    let l = a.len as f64;
    let mut s = String::new();
    if a.len == 0 {
        return Err(Error::Parameter("L must be at least 1".into()));
    }
    let h = exact_entropy(a.len, a.hashes)?;
    let k = a.hashes as f64 / l;
    let _ = writeln!(s, "H(x), x ~ BF({}, {})   {:.6} {unit} ({:.6} per use)", a.len, a.hashes, h * scale, h * scale / l);
    if a.hashes > 0 {
        let _ = writeln!(s, "limit per use at kappa = {k:.4}   {:.6}", entropy_limit(k)? * scale);
    }
    if let Some(k2) = a.hashes2 {
        let hc = exact_conditional_entropy(a.len, a.hashes, k2)?;
        let _ = writeln!(
            s,
            "H(x1 OR x2 | x1), x2 ~ BF({}, {k2})   {:.6} {unit} ({:.6} per use)",
            a.len,
            hc * scale,
            hc * scale / l
        );
        if a.hashes > 0 && k2 > 0 {
            let lim = conditional_entropy_limit(k, k2 as f64 / l)?;
            let _ = writeln!(s, "limit per use   {:.6}", lim * scale);
        }
    }
    emit(out, &s)
}

fn apply_flags(base: Scenario, f: &ScenarioFlags) -> Scenario {
    let mut s = base;
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = f.$field { s.$field = v; } )* };
    }
    macro_rules! set_opt {
        ($($field:ident),*) => { $( if f.$field.is_some() { s.$field = f.$field; } )* };
    }
    set!(users, beta, gamma, omega_a, kappa, kappa1, kappa2);
    set_opt!(messages, len, hashes, rate, active_count, active_mean);
    s
}

fn resolve_seed(seed: Option<u64>, out: &mut dyn Write) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None => {
            let s = rand::random::<u64>();
            emit(out, &format!("seed = {s} (generated)\n"))?;
            Ok(s)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"))
}

fn summary_text(s: &Summary) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "mode = {}", s.mode);
    let _ = writeln!(t, "trials = {}", s.trials);
    let _ = writeln!(t, "failures = {}", s.failures);
    let _ = writeln!(t, "error_rate = {:.6}", s.error_rate);
    let _ = writeln!(t, "ci95 = [{:.6}, {:.6}]", s.ci_low, s.ci_high);
    let a = s.analytic_active.map_or("-".into(), |a| a.to_string());
    let _ = writeln!(t, "exact_error (a = {a}) = {}", opt(s.exact_error));
    let _ = writeln!(t, "bound_error (a = {a}) = {}", opt(s.bound_error));
    let c = &s.causes;
    let _ = writeln!(
        t,
        "causes: phase1-miss {}, active-false-message {}, inactive-false-accept {}, ambiguity {}",
        c.phase1_miss, c.active_false_message, c.inactive_false_accept, c.ambiguity
    );
    let _ = writeln!(t, "mean_active = {:.3}", s.mean_active);
    if let (Some(m), Some(x)) = (s.mean_candidate_ratio, s.max_candidate_ratio) {
        let _ = writeln!(t, "candidate_ratio mean = {m:.4}, max = {x:.4}");
    }
    let _ = writeln!(t, "encode_hashes_per_active = {:.4}", s.encode_hashes_per_active);
    let _ = writeln!(t, "decode_hashes_per_user = {:.4}", s.decode_hashes_per_user);
    t
}

fn execution(serial: bool) -> Execution {
    if serial {
        Execution::Serial
    } else {
        Execution::Parallel
    }
}

pub fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mut scenario = apply_flags(Scenario::default(), &a.scenario);
    scenario.validate(a.mode)?;
    if a.trials == 0 {
        return Err(Error::Parameter("--trials must be at least 1".into()));
    }
    scenario.seed = resolve_seed(a.seed, out)?;
    let run = run_trials_with(&scenario, a.mode, a.trials, execution(a.serial))?;
    let paths = persist(&out_dir(&a.out), &format!("simulate-{}", a.mode), &scenario, &run)?;
    let mut t = summary_text(&run.summary);
    let _ = writeln!(t, "seed = {}", scenario.seed);
    let _ = writeln!(t, "fingerprint = {}", run.fingerprint);
    let _ = writeln!(t, "records = {}", paths.records.display());
    let _ = writeln!(t, "summary = {}", paths.summary.display());
    emit(out, &t)
}

fn table_header() -> &'static str {
    "axis,value,trials,error_rate,ci_low,ci_high,exact_error,bound_error,mean_candidate_ratio,feasibility\n"
}

fn table_row(r: &SweepRow) -> String {
    let s = &r.output.summary;
    let cell = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        r.axis,
        r.value,
        s.trials,
        s.error_rate,
        s.ci_low,
        s.ci_high,
        cell(s.exact_error),
        cell(s.bound_error),
        cell(s.mean_candidate_ratio),
        r.feasibility_label()
    )
}

pub fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| Error::Io { path: a.config.clone(), source: e })?;
    let file = SweepFile::parse(&text, &a.config)?;
    let mode = a
        .mode
        .or(file.mode)
        .ok_or_else(|| Error::Parameter("no mode given in the config or with --mode".into()))?;
    let trials = a
        .trials
        .or(file.trials)
        .ok_or_else(|| Error::Parameter("no trial count given in the config or with --trials".into()))?;
    if trials == 0 {
        return Err(Error::Parameter("trial count must be at least 1".into()));
    }
    let axes = file.axes()?;
    let mut base = file.scenario.clone();
    // Validate every point before any computation or output.
    for (axis, values) in &axes {
        for &v in values {
            axis.apply(&base, v)?.validate(mode)?;
        }
        if *axis == ormac::harness::Axis::Len && mode != Mode::Mac {
            return Err(Error::Parameter("the L axis applies to fixed-population mode only".into()));
        }
    }
    base.seed = resolve_seed(a.seed.or(file.seed), out)?;

    let dir = out_dir(&a.out);
    let mut table = String::from(table_header());
    for (axis, values) in &axes {
        let rows = run_sweep(&base, *axis, values, mode, trials, execution(a.serial))?;
        for (i, r) in rows.iter().enumerate() {
            persist(&dir, &format!("sweep-{}-{i}", axis), &r.scenario, &r.output)?;
            table.push_str(&table_row(r));
        }
    }
    let table_path = dir.join("sweep-table.csv");
    if !axes.is_empty() {
        write_file(&table_path, &table)?;
    }
    let mut t = format!("mode = {mode}, trials = {trials}, seed = {}\n", base.seed);
    t.push_str(&table);
    if !axes.is_empty() {
        let _ = writeln!(t, "table = {}", table_path.display());
    }
    emit(out, &t)
}
