//! The five subcommands. Each writes its outputs under the configured
//! directory and returns `Err` carrying the exit code on failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use vortibc::elliptic::check_solonnikov;
use vortibc::euler_inviscid::{solve_euler, sweep_mu, SweepConfig, SweepReport};
use vortibc::fieldcalc::{identity_convergence, l2, FieldHistory, ScalarField, VectorField};
use vortibc::fixedpoint::{picard_solve, verify_incompressibility, NsProblem};
use vortibc::geometry::{build_grid, DomainKind, Grid};
use vortibc::io::{fmt_f64, write_atomic, Checkpoint, DiagnosticsRecord};
use vortibc::scenarios::{random_smooth_field, InitialCondition};
use vortibc::stokes::{default_dt, solve_stokes, stokes_energy_report, StokesRun};

use crate::config::RunConfig;
use crate::error::CliError;

pub const SOLONNIKOV_SAMPLES: u64 = 50;
pub const SOLONNIKOV_LIMIT: f64 = 1.05;
pub const MIN_ORDER: f64 = 1.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Stokes,
    Ns,
    Euler,
    Sweep,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub resolution: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some((n1, n2)) = self.resolution {
            cfg.n1 = n1;
            cfg.n2 = n2;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

/// Parse `n1,n2`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected n1,n2")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v}: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Worker cap from `VORTIBC_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("VORTIBC_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(CliError::Config(format!("VORTIBC_THREADS must be a positive integer, got `{v}`"))),
            Ok(n) => Ok(Some(n)),
        },
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let threads = threads_from_env()?;
    vortibc::par::with_threads(threads, || match cmd {
        Command::Verify => cmd_verify(cfg),
        Command::Stokes => cmd_stokes(cfg),
        Command::Ns => cmd_ns(cfg),
        Command::Euler => cmd_euler(cfg),
        Command::Sweep => cmd_sweep(cfg, threads),
    })
}

fn grid(cfg: &RunConfig, n1: usize, n2: usize) -> Result<Arc<Grid>, CliError> {
    Ok(build_grid(cfg.domain, n1, n2)?)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out_dir.display())))?;
    Ok(&cfg.out_dir)
}

/// Snapshot indices to checkpoint: every `stride`-th plus the last.
fn checkpoint_steps(len: usize, stride: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = if stride == 0 { Vec::new() } else { (0..len).step_by(stride).collect() };
    if len > 0 && steps.last() != Some(&(len - 1)) {
        steps.push(len - 1);
    }
    steps
}

fn write_vectors(dir: &Path, prefix: &str, h: &FieldHistory<VectorField>, stride: usize) -> Result<(), CliError> {
    for n in checkpoint_steps(h.len(), stride) {
        Checkpoint::from_vector(h.get(n)).write(&dir.join(format!("{prefix}_{n:06}.vbf")))?;
    }
    Ok(())
}

fn write_scalars(dir: &Path, prefix: &str, h: &FieldHistory<ScalarField>, stride: usize) -> Result<(), CliError> {
    for n in checkpoint_steps(h.len(), stride) {
        Checkpoint::from_scalar(h.get(n)).write(&dir.join(format!("{prefix}_{n:06}.vbf")))?;
    }
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let grids = [1, 2, 4]
        .iter()
        .map(|m| grid(cfg, m * cfg.n1, m * cfg.n2))
        .collect::<Result<Vec<_>, _>>()?;
    if cfg.domain.kind == DomainKind::Torus {
        println!("torus: no boundary, boundary identities skipped");
    }
    let rows = identity_convergence(&grids)?;
    let mut names = vec!["n1", "n2"];
    names.extend(rows.iter().map(|r| r.name));
    let mut table = DiagnosticsRecord::new(&names);
    for (i, g) in grids.iter().enumerate() {
        let mut row = vec![g.n1 as f64, g.n2 as f64];
        row.extend(rows.iter().map(|r| r.residuals[i]));
        table.push(row);
    }
    table.write(&dir.join("identities.csv"))?;
    println!("{:<24} {:>12} {:>12} {:>12} {:>7} {:>7}", "check", "res(n)", "res(2n)", "res(4n)", "order", "");
    let mut first_failure = None;
    for r in &rows {
        let ok = r.passes(MIN_ORDER);
        let order = r.orders.last().copied().unwrap_or(f64::NAN);
        println!(
            "{:<24} {:>12.4e} {:>12.4e} {:>12.4e} {:>7.3} {:>7}",
            r.name,
            r.residuals[0],
            r.residuals[1],
            r.residuals[2],
            order,
            if ok { "pass" } else { "FAIL" }
        );
        if !ok && first_failure.is_none() {
            first_failure = Some(format!("{} (order {order:.3})", r.name));
        }
    }
    let g = &grids[0];
    let seeds: Vec<u64> = (0..SOLONNIKOV_SAMPLES).map(|i| cfg.seed.wrapping_add(i)).collect();
    let ratios = vortibc::par::map_items(&seeds, |s| check_solonnikov(&random_smooth_field(g, *s)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut sol = DiagnosticsRecord::new(&["seed", "ratio"]);
    for (s, r) in seeds.iter().zip(&ratios) {
        sol.push(vec![*s as f64, *r]);
    }
    sol.write(&dir.join("solonnikov.csv"))?;
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let ok = worst <= SOLONNIKOV_LIMIT;
    println!("{:<24} max ratio {worst:.6} over {} fields {:>7}", "solonnikov", ratios.len(), if ok { "pass" } else { "FAIL" });
    if !ok && first_failure.is_none() {
        first_failure = Some(format!("solonnikov (ratio {worst:.4})"));
    }
    match first_failure {
        Some(name) => Err(CliError::VerifyFailed(name)),
        None => Ok(()),
    }
}

pub fn cmd_stokes(cfg: &RunConfig) -> Result<(), CliError> {
    let g = grid(cfg, cfg.n1, cfg.n2)?;
    let dir = out_dir(cfg)?;
    let u0 = cfg.initial.velocity(&g)?;
    let a = cfg.boundary.series(&g, &cfg.initial)?;
    let run = StokesRun { dt: cfg.dt, scheme: cfg.scheme, ..StokesRun::new(u0, a.clone(), cfg.mu, cfg.t_final) };
    let sol = solve_stokes(&run)?;
    let mut diag = DiagnosticsRecord::new(&["t", "l2", "div_l2", "normal_max", "vorticity_err"]);
    for s in &sol.steps {
        diag.push(vec![s.t, s.l2, s.div_l2, s.normal_max, s.vorticity_err]);
    }
    diag.write(&dir.join("stokes.csv"))?;
    if sol.w.len() >= 3 {
        let e = stokes_energy_report(&sol.w, &a, cfg.mu)?;
        let mut rec = DiagnosticsRecord::new(&["t", "g_sq", "h_sq", "g_residual", "h_residual"]);
        for n in 0..e.t.len() {
            rec.push(vec![e.t[n], e.g_sq[n], e.h_sq[n], e.g_residual[n], e.h_residual[n]]);
        }
        rec.write(&dir.join("energy.csv"))?;
    }
    write_vectors(dir, "w", &sol.w, cfg.stride)?;
    write_scalars(dir, "q", &sol.q, cfg.stride)?;
    let last = sol.steps.last().expect("at least one step");
    println!(
        "stokes: {} steps, dt {}, |w(T)| {:.6e}, max div {:.3e}, max |w.nu| {:.3e}",
        sol.steps.len() - 1,
        fmt_f64(sol.dt),
        last.l2,
        sol.max_divergence(),
        sol.max_normal()
    );
    Ok(())
}

pub fn cmd_ns(cfg: &RunConfig) -> Result<(), CliError> {
    let g = grid(cfg, cfg.n1, cfg.n2)?;
    let dir = out_dir(cfg)?;
    let u0 = cfg.initial.velocity(&g)?;
    let a = cfg.boundary.series(&g, &cfg.initial)?;
    let prob = NsProblem { dt: cfg.dt, scheme: cfg.scheme, ..NsProblem::new(u0.clone(), a, cfg.mu, cfg.t_final) };
    let sol = picard_solve(&prob, &cfg.picard)?;
    let mut trace = DiagnosticsRecord::new(&["iter", "delta", "ratio"]);
    for it in &sol.trace {
        trace.push(vec![it.iter as f64, it.delta, it.ratio]);
    }
    trace.write(&dir.join("picard.csv"))?;
    let div = verify_incompressibility(&sol);
    let mut diag = DiagnosticsRecord::new(&["t", "u_l2", "v_l2", "w_l2", "div_v", "div_u"]);
    for n in 0..sol.u.len() {
        diag.push(vec![
            sol.u.time(n),
            l2(sol.u.get(n)),
            l2(sol.v.get(n)),
            l2(sol.w.get(n)),
            div.div_v[n],
            div.div_u[n],
        ]);
    }
    diag.write(&dir.join("ns.csv"))?;
    write_vectors(dir, "u", &sol.u, cfg.stride)?;
    write_vectors(dir, "v", &sol.v, cfg.stride)?;
    write_scalars(dir, "p", &sol.p, cfg.stride)?;
    let u_end = sol.u.last().expect("non-empty history");
    println!(
        "ns: {} Picard iterations, |u(T)| {:.6e}, max div v {:.3e}",
        sol.trace.len(),
        l2(u_end),
        div.max_div_v()
    );
    if let InitialCondition::TaylorGreen { .. } = cfg.initial {
        let mut err = 0.0f64;
        for (n, u) in sol.u.iter().enumerate() {
            let exact = u0.scale((-2.0 * cfg.mu * sol.u.time(n)).exp());
            let norm = l2(&exact);
            if norm > 0.0 {
                err = err.max(l2(&u.sub(&exact)) / norm);
            }
        }
        println!("ns: max relative L2 error against the analytic decay {err:.4e}");
    }
    Ok(())
}

pub fn cmd_euler(cfg: &RunConfig) -> Result<(), CliError> {
    let g = grid(cfg, cfg.n1, cfg.n2)?;
    let dir = out_dir(cfg)?;
    let u0 = cfg.initial.velocity(&g)?;
    let dt = cfg.dt.unwrap_or_else(|| default_dt(&g, cfg.t_final));
    let sol = solve_euler(&u0, cfg.t_final, dt)?;
    let ncomp = sol.circulation.first().map_or(0, Vec::len);
    let names: Vec<String> = ["t", "l2", "omega_l2"]
        .iter()
        .map(|s| s.to_string())
        .chain((0..ncomp).map(|c| format!("circulation_{c}")))
        .collect();
    let mut diag = DiagnosticsRecord::new(&names.iter().map(String::as_str).collect::<Vec<_>>());
    for n in 0..sol.u.len() {
        let mut row = vec![sol.u.time(n), l2(sol.u.get(n)), l2(sol.omega.get(n))];
        row.extend(&sol.circulation[n]);
        diag.push(row);
    }
    diag.write(&dir.join("euler.csv"))?;
    write_vectors(dir, "u", &sol.u, cfg.stride)?;
    write_scalars(dir, "omega", &sol.omega, cfg.stride)?;
    println!(
        "euler: |u(T)| {:.6e}, |u(T) - u0| {:.3e}, circulation drift {:.3e}",
        l2(sol.u.last().expect("non-empty")),
        l2(&sol.u.last().expect("non-empty").sub(&u0)),
        sol.circulation_drift()
    );
    Ok(())
}

/// Sweep table text: `mu,e_sup,e_grad,noise_floor,converged`.
pub fn sweep_csv(r: &SweepReport) -> String {
    let mut s = String::from("mu,e_sup,e_grad,noise_floor,converged\n");
    for row in &r.rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(row.mu),
            fmt_f64(row.e_sup),
            fmt_f64(row.e_grad),
            fmt_f64(row.noise_floor),
            row.converged
        ));
    }
    s
}

pub fn sweep_summary(r: &SweepReport) -> String {
    let slope = match r.slope {
        Some(s) => fmt_f64(s),
        None => "n/a".into(),
    };
    let ratio = r.e_grad_ratio.map_or("n/a".into(), fmt_f64);
    let mut s = format!("slope = {slope}\ne_grad_ratio = {ratio}\n");
    if r.below_noise_floor {
        s.push_str("note = noise floor: some e_sup below 10(h^2 + dt)\n");
    }
    for (mu, e) in &r.failures {
        s.push_str(&format!("failed = {} {e}\n", fmt_f64(*mu)));
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig, threads: Option<usize>) -> Result<(), CliError> {
    let g = grid(cfg, cfg.n1, cfg.n2)?;
    let dir = out_dir(cfg)?;
    let u0 = cfg.initial.velocity(&g)?;
    let a = cfg.boundary.series(&g, &cfg.initial)?;
    let sc = SweepConfig {
        mu_list: cfg.mu_list.clone(),
        u0,
        a,
        t_final: cfg.t_final,
        dt: cfg.dt.unwrap_or_else(|| default_dt(&g, cfg.t_final)),
        scheme: cfg.scheme,
        picard: cfg.picard,
        threads,
    };
    let report = sweep_mu(&sc)?;
    write_atomic(&dir.join("sweep.csv"), sweep_csv(&report).as_bytes())?;
    let summary = sweep_summary(&report);
    write_atomic(&dir.join("sweep_summary.txt"), summary.as_bytes())?;
    for row in &report.rows {
        info!("{row:?}");
        println!(
            "mu {:<10} e_sup {:<12.5e} e_grad {:<12.5e} floor {:.3e} {}",
            row.mu,
            row.e_sup,
            row.e_grad,
            row.noise_floor,
            if row.converged { "ok" } else { "FAILED" }
        );
    }
    print!("{summary}");
    report.check()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_schedule() {
        assert_eq!(checkpoint_steps(5, 0), vec![4]);
        assert_eq!(checkpoint_steps(5, 2), vec![0, 2, 4]);
        assert_eq!(checkpoint_steps(6, 2), vec![0, 2, 4, 5]);
        assert!(checkpoint_steps(0, 3).is_empty());
    }

    #[test]
    fn resolution_flag() {
        assert_eq!(parse_resolution("32, 64"), Ok((32, 64)));
        assert!(parse_resolution("32").is_err());
        assert!(parse_resolution("a,b").is_err());
    }
}
