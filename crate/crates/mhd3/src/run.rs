//! Run orchestration: stepping to a horizon, ledger accumulation, CSV/JSON
//! emission, checkpointing with deterministic resume, and amplitude
//! bisection against the regularity monitor.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::checkpoint::{checkpoint_load, checkpoint_save};
use crate::config::ScenarioSpec;
use crate::diagnostics::{
    audit_energy, bootstrap_check, global_regularity_monitor, grad_l2_sq, smallness_check,
    BootstrapReport, BudgetReport, DiagnosticsLedger, SmallnessReport, Verdict,
};
use crate::init::generate_initial_data;
use crate::solver::{cfl_dt, step_with_dt, State};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    HorizonReached,
    NanFault,
    VacuumFault,
    UserStop,
}

#[derive(Debug)]
pub struct RunResult {
    pub final_state: State,
    pub ledger: DiagnosticsLedger,
    pub termination: Termination,
    pub fault_time: Option<f64>,
    pub steps: u64,
    pub wall_seconds: f64,
    pub smallness: SmallnessReport,
    pub bootstrap: BootstrapReport,
    pub verdict: Verdict,
    /// Relative drift of `int rho dx` over the run (semi-Lagrangian transport
    /// conserves the range, not the integral).
    pub rho_mass_drift: f64,
    /// Largest single-step `c_v int rho max(-theta, 0)` removed by clipping.
    pub max_clipped_thermal_mass: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions<'a> {
    pub out_dir: Option<&'a Path>,
    pub resume: Option<&'a Path>,
}

const CSV_HEADER: &str = "time,kinetic,magnetic,thermal,viscous_diss,ohmic_diss,res36,res313,serrin_int,gradu4_int,Hq_sup,Hq_int,E_sup,rho_min,rho_max,theta_min";

fn csv_row(b: &BudgetReport, ledger: &DiagnosticsLedger) -> String {
    format!(
        "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
        b.time,
        b.kinetic,
        b.magnetic,
        b.thermal,
        b.viscous_dissipation,
        b.ohmic_dissipation,
        b.identity_residual_36,
        b.identity_residual_313,
        ledger.serrin_integral,
        ledger.gradu4_integral,
        ledger.hq_sup,
        ledger.hq_integral,
        ledger.e_sup,
        ledger.rho_min,
        ledger.rho_max,
        ledger.theta_min
    )
}

/// Accumulator columns of one CSV row, for deterministic resume.
fn parse_accumulators(row: &str) -> Result<(f64, [f64; 8])> {
    let cols: Vec<&str> = row.split(',').collect();
    if cols.len() != 16 {
        return Err(Error::Checkpoint(format!(
            "malformed timeseries row with {} columns",
            cols.len()
        )));
    }
    let get = |i: usize| -> Result<f64> {
        cols[i]
            .parse::<f64>()
            .map_err(|e| Error::Checkpoint(format!("bad number in column {i}: {e}")))
    };
    Ok((
        get(0)?,
        [
            get(8)?,
            get(9)?,
            get(10)?,
            get(11)?,
            get(12)?,
            get(13)?,
            get(14)?,
            get(15)?,
        ],
    ))
}

struct Emitter {
    path: Option<PathBuf>,
    buffer: String,
}

impl Emitter {
    fn new(out_dir: Option<&Path>, resume_rows: Option<&str>) -> Result<Self> {
        let mut buffer = String::new();
        match resume_rows {
            Some(rows) => buffer.push_str(rows),
            None => {
                buffer.push_str(CSV_HEADER);
                buffer.push('\n');
            }
        }
        Ok(Self {
            path: out_dir.map(|d| d.join("timeseries.csv")),
            buffer,
        })
    }

    fn push(&mut self, row: &str) {
        self.buffer.push_str(row);
        self.buffer.push('\n');
    }

    fn flush(&self) -> Result<()> {
        if let Some(path) = &self.path {
            let mut f = fs::File::create(path)?;
            f.write_all(self.buffer.as_bytes())?;
        }
        Ok(())
    }
}

pub fn run_scenario(spec: &ScenarioSpec, opts: &RunOptions) -> Result<RunResult> {
    spec.validate()?;
    let start = Instant::now();
    let constants = spec.physical_constants()?;
    let serrin = spec.serrin_config()?;

    if let Some(dir) = opts.out_dir {
        fs::create_dir_all(dir)?;
    }

    // starting state: fresh initial data or a checkpoint
    let (mut state, mut ledger, resume_rows) = match opts.resume {
        None => (generate_initial_data(spec)?, DiagnosticsLedger::new(), None),
        Some(ckpt) => {
            let (state, ck_constants) = checkpoint_load(ckpt)?;
            if ck_constants != constants {
                return Err(Error::Checkpoint(
                    "checkpoint constants disagree with the scenario".into(),
                ));
            }
            if state.grid().n() != spec.n {
                return Err(Error::Checkpoint(format!(
                    "checkpoint grid n = {} does not match scenario n = {}",
                    state.grid().n(),
                    spec.n
                )));
            }
            // restore the running accumulators from the emitted series
            let mut rows_kept = None;
            let mut ledger = DiagnosticsLedger::new();
            if let Some(dir) = opts.out_dir {
                let csv_path = dir.join("timeseries.csv");
                if csv_path.exists() {
                    let text = fs::read_to_string(&csv_path)?;
                    let mut kept = String::new();
                    let mut found = None;
                    for (i, line) in text.lines().enumerate() {
                        if i == 0 {
                            kept.push_str(line);
                            kept.push('\n');
                            continue;
                        }
                        let (t, acc) = parse_accumulators(line)?;
                        kept.push_str(line);
                        kept.push('\n');
                        if t.to_bits() == state.time.to_bits() {
                            found = Some(acc);
                            break;
                        }
                    }
                    if let Some(acc) = found {
                        ledger = DiagnosticsLedger::with_accumulators(
                            acc[0], acc[1], acc[2], acc[3], acc[4], acc[5], acc[6], acc[7],
                        );
                        rows_kept = Some(kept);
                    }
                }
            }
            (state, ledger, rows_kept)
        }
    };

    let scheme = spec.scheme_config(state.rho.max());
    let smallness = smallness_check(&state, &constants, spec.m_calibration)?;
    let gu0 = grad_l2_sq(&state.u);
    let gh0 = grad_l2_sq(&state.h);
    let bootstrap = bootstrap_check(
        spec.m_calibration,
        smallness.c0,
        gu0,
        gh0,
        constants.mu,
        constants.nu,
    )?;

    let mut emitter = Emitter::new(opts.out_dir, resume_rows.as_deref())?;
    ledger.observe(&state, &constants, &serrin, spec.q)?;
    let rho_mass0 = state.rho.integral();

    let mut termination = Termination::HorizonReached;
    let mut fault_time = None;
    let mut steps: u64 = 0;
    let mut max_clip = 0.0_f64;

    if opts.resume.is_none() {
        let b0 = BudgetReport {
            time: state.time,
            kinetic: crate::diagnostics::kinetic_energy(&state),
            magnetic: crate::diagnostics::magnetic_energy(&state),
            thermal: crate::diagnostics::thermal_energy(&state, &constants),
            viscous_dissipation: constants.mu * grad_l2_sq(&state.u),
            ohmic_dissipation: constants.nu * grad_l2_sq(&state.h),
            identity_residual_36: 0.0,
            identity_residual_313: 0.0,
        };
        ledger.push_budget(b0);
        emitter.push(&csv_row(ledger.budgets.last().unwrap(), &ledger));
    }

    let cadence = spec.output_cadence;
    // tick index is integral so fresh and resumed runs compute bit-identical
    // tick times
    let mut tick: u64 = (state.time / cadence).round() as u64 + 1;

    while state.time < spec.horizon - 1e-12 {
        let next_row_time = tick as f64 * cadence;
        let mut dt = cfl_dt(&state, &scheme, &constants);
        dt = dt.min(spec.horizon - state.time);
        // land exactly on the cadence tick when it is next
        if state.time + dt > next_row_time - 1e-12 {
            dt = (next_row_time - state.time).min(dt);
        }
        let prev = state.clone();
        match step_with_dt(&state, dt, &scheme, &constants) {
            Ok((next, report)) => {
                max_clip = max_clip.max(report.clipped_thermal_mass);
                state = next;
            }
            Err(Error::NanFault { time, .. }) => {
                termination = Termination::NanFault;
                fault_time = Some(time);
                break;
            }
            Err(Error::VacuumFault { time }) => {
                termination = Termination::VacuumFault;
                fault_time = Some(time);
                break;
            }
            Err(other) => return Err(other),
        }
        steps += 1;
        ledger.observe(&state, &constants, &serrin, spec.q)?;

        let at_row = state.time + 1e-12 >= tick as f64 * cadence
            || state.time >= spec.horizon - 1e-12;
        if at_row {
            let audit = audit_energy(&prev, &state, state.time - prev.time, &constants)?;
            ledger.push_budget(audit);
            emitter.push(&csv_row(ledger.budgets.last().unwrap(), &ledger));
            while tick as f64 * cadence <= state.time + 1e-12 {
                tick += 1;
            }
            if spec.checkpoint_interval > 0 && (tick - 1) % spec.checkpoint_interval == 0 {
                if let Some(dir) = opts.out_dir {
                    let path = dir.join(format!("state_{:06}.mhd3", tick - 1));
                    checkpoint_save(&state, &constants, &path)?;
                }
            }
        }
    }

    emitter.flush()?;
    if let Some(dir) = opts.out_dir {
        checkpoint_save(&state, &constants, &dir.join("state_final.mhd3"))?;
    }

    let verdict = global_regularity_monitor(&ledger, smallness.g0, smallness.c0, constants.mu);
    let rho_mass_drift = if rho_mass0 != 0.0 {
        (state.rho.integral() - rho_mass0).abs() / rho_mass0
    } else {
        0.0
    };

    let result = RunResult {
        final_state: state,
        ledger,
        termination,
        fault_time,
        steps,
        wall_seconds: start.elapsed().as_secs_f64(),
        smallness,
        bootstrap,
        verdict,
        rho_mass_drift,
        max_clipped_thermal_mass: max_clip,
    };

    if let Some(dir) = opts.out_dir {
        write_summary(&result, spec, &dir.join("summary.json"))?;
    }
    Ok(result)
}

#[derive(Serialize)]
struct Summary<'a> {
    termination: Termination,
    fault_time: Option<f64>,
    final_time: f64,
    steps: u64,
    wall_seconds: f64,
    smallness: &'a SmallnessReport,
    bootstrap: &'a BootstrapReport,
    verdict: &'a Verdict,
    e_sup: f64,
    serrin_integral: f64,
    gradu4_integral: f64,
    hq_sup: f64,
    hq_integral: f64,
    rho_min: f64,
    rho_max: f64,
    theta_min: f64,
    rho_mass_drift: f64,
    max_clipped_thermal_mass: f64,
    serrin_alert: bool,
    spec: &'a ScenarioSpec,
}

fn write_summary(result: &RunResult, spec: &ScenarioSpec, path: &Path) -> Result<()> {
    let s = Summary {
        termination: result.termination,
        fault_time: result.fault_time,
        final_time: result.final_state.time,
        steps: result.steps,
        wall_seconds: result.wall_seconds,
        smallness: &result.smallness,
        bootstrap: &result.bootstrap,
        verdict: &result.verdict,
        e_sup: result.ledger.e_sup,
        serrin_integral: result.ledger.serrin_integral,
        gradu4_integral: result.ledger.gradu4_integral,
        hq_sup: result.ledger.hq_sup,
        hq_integral: result.ledger.hq_integral,
        rho_min: result.ledger.rho_min,
        rho_max: result.ledger.rho_max,
        theta_min: result.ledger.theta_min,
        rho_mass_drift: result.rho_mass_drift,
        max_clipped_thermal_mass: result.max_clipped_thermal_mass,
        serrin_alert: result.ledger.serrin_alert,
        spec,
    };
    let json = serde_json::to_string_pretty(&s)
        .map_err(|e| Error::Config(format!("summary serialization: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

/// Amplitude-scaled copy of a scenario: `u0, H0 -> c u0, c H0`.
pub fn scaled_spec(spec: &ScenarioSpec, c: f64) -> ScenarioSpec {
    let mut s = spec.clone();
    s.amplitudes.u *= c;
    s.amplitudes.h *= c;
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct BisectReport {
    pub lo: f64,
    pub hi: f64,
    /// Verdicts observed at the endpoints (`true` = within theory).
    pub lo_within: bool,
    pub hi_within: bool,
    /// Critical amplitude scale, when the endpoint verdicts differ.
    pub critical_scale: Option<f64>,
    /// Smallness product at the critical scale.
    pub critical_product: Option<f64>,
    pub bisection_steps: usize,
    /// Scales probed for verdict monotonicity, with their verdicts.
    pub monotonicity_probes: Vec<(f64, bool)>,
    pub monotone: bool,
}

fn within_theory(spec: &ScenarioSpec, c: f64) -> Result<(bool, f64)> {
    let s = scaled_spec(spec, c);
    let result = run_scenario(&s, &RunOptions::default())?;
    Ok((
        result.verdict == Verdict::WithinTheory && result.termination == Termination::HorizonReached,
        result.smallness.product,
    ))
}

/// Locate the amplitude scale where the monitor verdict flips.
pub fn bisect_threshold(
    spec: &ScenarioSpec,
    lo: f64,
    hi: f64,
    trials: usize,
) -> Result<BisectReport> {
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "bisection range must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    let (lo_within, _) = within_theory(spec, lo)?;
    let (hi_within, _) = within_theory(spec, hi)?;

    let mut probes = Vec::new();
    let k = trials.max(2);
    for i in 0..k {
        let c = lo + (hi - lo) * i as f64 / (k - 1) as f64;
        let (w, _) = within_theory(spec, c)?;
        probes.push((c, w));
    }
    // within-theory must not reappear above a failure
    let monotone = probes.windows(2).all(|w| w[0].1 || !w[1].1);

    if lo_within == hi_within {
        return Ok(BisectReport {
            lo,
            hi,
            lo_within,
            hi_within,
            critical_scale: None,
            critical_product: None,
            bisection_steps: 0,
            monotonicity_probes: probes,
            monotone,
        });
    }

    let (mut a, mut b) = (lo, hi);
    let mut steps = 0;
    let mut critical_product = None;
    while steps < 12 && (b - a) > 0.02 * b.max(1e-12) {
        let mid = 0.5 * (a + b);
        let (w, product) = within_theory(spec, mid)?;
        if w == lo_within {
            a = mid;
        } else {
            b = mid;
            critical_product = Some(product);
        }
        steps += 1;
    }
    if critical_product.is_none() {
        let (_, product) = within_theory(spec, b)?;
        critical_product = Some(product);
    }
    Ok(BisectReport {
        lo,
        hi,
        lo_within,
        hi_within,
        critical_scale: Some(0.5 * (a + b)),
        critical_product,
        bisection_steps: steps,
        monotonicity_probes: probes,
        monotone,
    })
}
