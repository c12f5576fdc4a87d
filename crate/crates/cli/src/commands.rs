//! One function per subcommand, each producing a [`Table`].

use rayon::prelude::*;
use thermoq_core::bath::{self, SensorParams};
use thermoq_core::dynamics::{MeterSpec, MeterState};
use thermoq_core::optimize::{self, find_t_max, InitialStateOptions, T_MAX_GRID};
use thermoq_core::{qfi, spectrum};

use crate::config::{Psi0, RunConfig, Subcommand, MAP_SLICES};
use crate::output::{Cell, PlotSpec, Table};
use crate::CliError;

use Cell::{Float as F, Int as I};

pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.subcommand {
        Subcommand::Sensor => cmd_sensor(cfg),
        Subcommand::Compare => cmd_compare(cfg),
        Subcommand::MeterMap => cmd_meter_map(cfg),
        Subcommand::Tmax => cmd_tmax(cfg),
        Subcommand::Optimize => cmd_optimize(cfg),
        Subcommand::Scaling => cmd_scaling(cfg),
        Subcommand::Spectrum => cmd_spectrum(cfg),
    }
}

fn params(cfg: &RunConfig, tau: f64) -> Result<SensorParams, CliError> {
    Ok(SensorParams::new(cfg.sensor_omega, cfg.gamma, tau)?)
}

fn pairs<A: Copy + Send + Sync, B: Copy + Send + Sync>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

/// Row-parallel evaluation; output keeps grid order.
fn par_rows<T, F>(points: &[T], f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Cell>, CliError> + Sync + Send,
{
    points.par_iter().map(f).collect()
}

fn optimizer_options(cfg: &RunConfig) -> InitialStateOptions {
    InitialStateOptions {
        seed: cfg.seed,
        ..Default::default()
    }
}

/// Meter QFI for the configured preparation.
fn meter_value(cfg: &RunConfig, p: &SensorParams, meter: &MeterSpec, t: f64) -> Result<f64, CliError> {
    let psi = match &cfg.psi0 {
        Psi0::Equal => MeterState::equal(meter.n()),
        Psi0::Amplitudes(c) => MeterState::new(c.clone())?,
        Psi0::Optimize => {
            let (_, report) = optimize::optimize_initial_state_with(p, meter, t, optimizer_options(cfg))?;
            return Ok(report.value);
        }
    };
    Ok(qfi::meter_qfi(p, meter, &psi, t)?.value)
}

fn initial_state(cfg: &RunConfig, p: &SensorParams, meter: &MeterSpec, t: f64) -> Result<MeterState, CliError> {
    Ok(match &cfg.psi0 {
        Psi0::Equal => MeterState::equal(meter.n()),
        Psi0::Amplitudes(c) => MeterState::new(c.clone())?,
        Psi0::Optimize => optimize::optimize_initial_state_with(p, meter, t, optimizer_options(cfg))?.0,
    })
}

fn peak_objective(cfg: &RunConfig, meter: &MeterSpec, t: f64, tau: f64) -> thermoq_core::Result<f64> {
    let p = SensorParams::new(cfg.sensor_omega, cfg.gamma, tau)?;
    meter_value(cfg, &p, meter, t).map_err(|e| match e {
        CliError::Numerical(e) => e,
        other => thermoq_core::Error::NonFinite(other.to_string()),
    })
}

fn tau_range(cfg: &RunConfig) -> (f64, f64) {
    let taus = &cfg.grid.taus;
    (taus[0], taus[taus.len() - 1])
}

pub fn cmd_sensor(cfg: &RunConfig) -> Result<Table, CliError> {
    let points = pairs(&cfg.grid.taus, &cfg.grid.times);
    let rows = par_rows(&points, |&(tau, t)| {
        let p = params(cfg, tau)?;
        Ok(vec![
            F(tau),
            F(t),
            F(bath::excited_population(&p, t)?),
            F(bath::sensor_qfi(&p, t)?),
            F(bath::steady_sensor_qfi(&p)),
        ])
    })?;
    Ok(Table {
        headers: vec!["tau", "t", "p_e", "qfi_sensor", "qfi_steady"],
        rows,
        plot: Some(PlotSpec {
            title: "Sensor QFI".into(),
            x: "tau",
            ys: vec!["qfi_sensor"],
            group: Some("t"),
            groups: None,
            log_x: true,
            log_y: false,
        }),
    })
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<Table, CliError> {
    let meter = MeterSpec::spin_x(cfg.grid.ns[0], cfg.grid.omegas[0])?;
    let points = pairs(&cfg.grid.taus, &cfg.grid.times);
    let rows = par_rows(&points, |&(tau, t)| {
        let p = params(cfg, tau)?;
        let psi = initial_state(cfg, &p, &meter, t)?;
        Ok(vec![
            F(tau),
            F(t),
            F(qfi::joint_qfi(&p, &meter, &psi, t)?.value),
            F(bath::sensor_qfi(&p, t)?),
            F(qfi::meter_qfi(&p, &meter, &psi, t)?.value),
        ])
    })?;
    Ok(Table {
        headers: vec!["tau", "t", "qfi_full", "qfi_sensor", "qfi_meter"],
        rows,
        plot: Some(PlotSpec {
            title: "Full, sensor and meter QFI".into(),
            x: "tau",
            ys: vec!["qfi_full", "qfi_sensor", "qfi_meter"],
            group: Some("t"),
            groups: None,
            log_x: true,
            log_y: false,
        }),
    })
}

pub fn cmd_meter_map(cfg: &RunConfig) -> Result<Table, CliError> {
    let meter = MeterSpec::spin_x(cfg.grid.ns[0], cfg.grid.omegas[0])?;
    let points = pairs(&cfg.grid.taus, &cfg.grid.times);
    let rows = par_rows(&points, |&(tau, t)| {
        let p = params(cfg, tau)?;
        Ok(vec![F(tau), F(t), F(meter_value(cfg, &p, &meter, t)?)])
    })?;
    Ok(Table {
        headers: vec!["tau", "t", "qfi_meter"],
        rows,
        plot: Some(PlotSpec {
            title: "Meter QFI at fixed times".into(),
            x: "tau",
            ys: vec!["qfi_meter"],
            group: Some("t"),
            groups: Some(MAP_SLICES.to_vec()),
            log_x: true,
            log_y: false,
        }),
    })
}

pub fn cmd_tmax(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.grid.ns[0];
    let range = tau_range(cfg);
    let points = pairs(&cfg.grid.omegas, &cfg.grid.times);
    let rows = par_rows(&points, |&(omega, t)| {
        let meter = MeterSpec::spin_x(n, omega)?;
        let best = find_t_max(
            |tau| peak_objective(cfg, &meter, t, tau),
            range,
            T_MAX_GRID,
        )?;
        Ok(vec![F(omega), F(t), F(best.tau), F(best.value)])
    })?;
    Ok(Table {
        headers: vec!["omega", "t", "tau_max", "qfi_at_max"],
        rows,
        plot: Some(PlotSpec {
            title: "Optimal temperature".into(),
            x: "t",
            ys: vec!["tau_max"],
            group: Some("omega"),
            groups: None,
            log_x: true,
            log_y: false,
        }),
    })
}

pub fn cmd_optimize(cfg: &RunConfig) -> Result<Table, CliError> {
    let meter = MeterSpec::spin_x(cfg.grid.ns[0], cfg.grid.omegas[0])?;
    let equal = MeterState::equal(meter.n());
    let taus = &cfg.grid.taus;
    let times = &cfg.grid.times;
    let points = pairs(times, taus);
    let results: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&(t, tau)| {
            let p = params(cfg, tau)?;
            let (state, report) = optimize::optimize_initial_state_with(&p, &meter, t, optimizer_options(cfg))?;
            Ok((optimize::bures_distance_pure(&state, &equal)?, report.value))
        })
        .collect::<Result<_, CliError>>()?;

    let mut rows = Vec::with_capacity(points.len());
    for (k, &t) in times.iter().enumerate() {
        let block = &results[k * taus.len()..(k + 1) * taus.len()];
        // first index wins ties
        let mut white = 0;
        let mut peak = 0;
        for (i, &(d, q)) in block.iter().enumerate() {
            if d < block[white].0 {
                white = i;
            }
            if q > block[peak].1 {
                peak = i;
            }
        }
        for (i, &tau) in taus.iter().enumerate() {
            rows.push(vec![
                F(tau),
                F(t),
                F(block[i].0),
                I((i == white) as i64),
                I((i == peak) as i64),
            ]);
        }
    }
    rows.sort_by(|a, b| a[0].as_f64().total_cmp(&b[0].as_f64()).then(a[1].as_f64().total_cmp(&b[1].as_f64())));
    Ok(Table {
        headers: vec!["tau", "t", "bures_to_equal", "tau_white_line_flag", "tau_max_flag"],
        rows,
        plot: Some(PlotSpec {
            title: "Bures distance of the optimal preparation from the equal superposition".into(),
            x: "tau",
            ys: vec!["bures_to_equal"],
            group: Some("t"),
            groups: None,
            log_x: true,
            log_y: false,
        }),
    })
}

pub fn cmd_scaling(cfg: &RunConfig) -> Result<Table, CliError> {
    let omega = cfg.grid.omegas[0];
    let range = tau_range(cfg);
    let mut dims: Vec<usize> = cfg.grid.ns.iter().flat_map(|&n| [n, n + 1]).collect();
    dims.sort_unstable();
    dims.dedup();
    let points = pairs(&cfg.grid.times, &dims);
    let peaks: Vec<f64> = points
        .par_iter()
        .map(|&(t, n)| {
            let meter = MeterSpec::spin_x(n, omega)?;
            let best = find_t_max(
                |tau| peak_objective(cfg, &meter, t, tau),
                range,
                T_MAX_GRID,
            )?;
            Ok(best.value)
        })
        .collect::<Result<_, CliError>>()?;
    let peak = |t_idx: usize, n: usize| {
        let k = dims.iter().position(|&d| d == n).expect("dimension in list");
        peaks[t_idx * dims.len() + k]
    };
    let mut rows = Vec::new();
    for &n in &cfg.grid.ns {
        for (ti, &t) in cfg.grid.times.iter().enumerate() {
            let here = peak(ti, n);
            let next = peak(ti, n + 1);
            rows.push(vec![I(n as i64), F(t), F(here), F((next - here) / here)]);
        }
    }
    Ok(Table {
        headers: vec!["n", "t", "qfi_at_tmax", "r"],
        rows,
        plot: Some(PlotSpec {
            title: "Peak meter QFI versus dimension".into(),
            x: "n",
            ys: vec!["qfi_at_tmax"],
            group: Some("t"),
            groups: None,
            log_x: false,
            log_y: false,
        }),
    })
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = params(cfg, cfg.grid.taus[0])?;
    let n = cfg.grid.ns[0];
    let rows = par_rows(&cfg.grid.omegas, |&omega| {
        let liou = spectrum::build_superoperator(&p, &MeterSpec::spin_x(n, omega)?);
        let slow = spectrum::slow_spectrum(&liou, 4)?.eigenvalues;
        let (l1, l2) = spectrum::coherence_eigenvalues_closed_form(&p, omega);
        let mut row = vec![F(omega)];
        row.extend(slow.iter().map(|z| F(z.re)));
        row.extend(slow.iter().map(|z| F(z.im)));
        row.extend([F(l1.re), F(l2.re), F(l1.im), F(l2.im)]);
        Ok(row)
    })?;
    Ok(Table {
        headers: vec![
            "omega",
            "re_lambda_1",
            "re_lambda_2",
            "re_lambda_3",
            "re_lambda_4",
            "im_lambda_1",
            "im_lambda_2",
            "im_lambda_3",
            "im_lambda_4",
            "re_closed_1",
            "re_closed_2",
            "im_closed_1",
            "im_closed_2",
        ],
        rows,
        plot: Some(PlotSpec {
            title: "Slowest Liouvillian eigenvalues".into(),
            x: "omega",
            ys: vec!["re_lambda_1", "re_lambda_2", "re_lambda_3", "re_lambda_4"],
            group: None,
            groups: None,
            log_x: false,
            log_y: false,
        }),
    })
}
