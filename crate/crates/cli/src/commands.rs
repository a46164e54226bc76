//! The four commands. Each renders its output in memory first, so the bytes
//! written are a pure function of the configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use pqbbh::analysis::{
    convergence_table, generalized_bound_check, lipschitz_bound_report, operator_surface,
    rate_bound_check, CorpusFunction, LipschitzReport,
};
use pqbbh::bivariate::{moment_closed, test_function, BivariateOperator, MomentIndex};
use pqbbh::suite::run_verify;

use crate::config::{Command, RunConfig};

/// Relative tolerance for closed-form against direct moments.
pub const MOMENT_TOLERANCE: f64 = 1e-10;

/// What a command produced, before anything touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub main: String,
    pub companion: Option<String>,
    /// Number of property violations found; nonzero maps to exit code 1.
    pub violations: usize,
    pub summary: String,
}

/// Shortest decimal that reads back to the same double.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
    prefix: String,
}

impl CsvTable {
    fn new(config: &RunConfig, header: &[&str]) -> anyhow::Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(CsvTable {
            writer,
            prefix: format!("# config {}\n", config.echo()),
        })
    }

    fn row<I, S>(&mut self, fields: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    fn finish(self, trailer: &str) -> anyhow::Result<String> {
        let body = String::from_utf8(self.writer.into_inner().context("flushing CSV buffer")?)?;
        Ok(format!("{}{}{}", self.prefix, body, trailer))
    }
}

pub fn render(config: &RunConfig) -> anyhow::Result<Artifact> {
    match config.command {
        Command::Verify => verify(config),
        Command::Moments => moments(config),
        Command::Converge => converge(config),
        Command::Rate => rate(config),
    }
}

fn verify(config: &RunConfig) -> anyhow::Result<Artifact> {
    let report = run_verify(&config.suite)?;
    let failures = report.total_failures();
    let mut summary = String::new();
    for r in report.exact.iter() {
        summary.push_str(&format!(
            "exact {:<18} trials {:>4}  failures {}\n",
            r.identity, r.trials, r.failures
        ));
    }
    for r in report.float.iter() {
        summary.push_str(&format!(
            "float {:<18} trials {:>4}  failures {}  max residual {:e}\n",
            r.identity, r.trials, r.failures, r.max_residual
        ));
    }
    Ok(Artifact {
        main: serde_json::to_string_pretty(&report)? + "\n",
        companion: None,
        violations: failures,
        summary,
    })
}

fn moments(config: &RunConfig) -> anyhow::Result<Artifact> {
    let spec = config.spec()?;
    let op = BivariateOperator::new(spec);
    let grid = &config.grid;
    let surfaces = MomentIndex::ALL
        .iter()
        .map(|m| {
            let (i, j) = m.pair();
            operator_surface(&op, |u, v| test_function(i, j, u, v), grid)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = CsvTable::new(
        config,
        &["x", "y", "moment", "closed", "direct", "abs_diff"],
    )?;
    let mut violations = 0;
    let mut worst = 0.0_f64;
    for (i, &x) in grid.x().iter().enumerate() {
        for (j, &y) in grid.x().iter().enumerate() {
            for (m, surface) in MomentIndex::ALL.iter().zip(&surfaces) {
                let closed = moment_closed(&spec, *m, x, y);
                let direct = surface[grid.index(i, j)];
                let diff = (closed - direct).abs();
                if diff.is_nan() || diff > MOMENT_TOLERANCE * closed.abs().max(1.0) {
                    violations += 1;
                }
                worst = worst.max(diff);
                table.row([
                    num(x),
                    num(y),
                    m.id().to_string(),
                    num(closed),
                    num(direct),
                    num(diff),
                ])?;
            }
        }
    }
    let summary = format!(
        "moments: {} rows, max |closed - direct| = {worst:e}, {violations} above tolerance\n",
        grid.len() * grid.len() * 5
    );
    Ok(Artifact {
        main: table.finish("")?,
        companion: None,
        violations,
        summary,
    })
}

fn converge(config: &RunConfig) -> anyhow::Result<Artifact> {
    let table = convergence_table(
        &config.schedule,
        &config.n_list,
        &config.functions,
        &config.grid,
        config.surfaces,
    )?;
    let mut main = CsvTable::new(config, &["n", "p_n", "q_n", "function", "sup_error"])?;
    let mut companion = config
        .surfaces
        .then(|| CsvTable::new(config, &["n", "function", "x", "y", "error"]))
        .transpose()?;
    let unity = CorpusFunction::Monomial { i: 0, j: 0 };
    let mut violations = 0;
    for row in &table.rows {
        main.row([
            row.n.to_string(),
            num(row.p),
            num(row.q),
            row.function.to_string(),
            num(row.sup_error),
        ])?;
        if row.function == unity && row.sup_error > 1e-12 {
            violations += 1;
        }
        if let (Some(out), Some(surface)) = (companion.as_mut(), row.surface.as_ref()) {
            let xs = config.grid.x();
            for (idx, err) in surface.iter().enumerate() {
                let (x, y) = (xs[idx / xs.len()], xs[idx % xs.len()]);
                out.row([
                    row.n.to_string(),
                    row.function.to_string(),
                    num(x),
                    num(y),
                    num(*err),
                ])?;
            }
        }
    }
    let mut summary = String::new();
    for f in &config.functions {
        let column: Vec<String> = table
            .column(*f)
            .iter()
            .map(|e| format!("{e:.3e}"))
            .collect();
        summary.push_str(&format!("{f:<14} {}\n", column.join("  ")));
    }
    Ok(Artifact {
        main: main.finish("")?,
        companion: companion.map(|c| c.finish("")).transpose()?,
        violations,
        summary,
    })
}

fn rate(config: &RunConfig) -> anyhow::Result<Artifact> {
    let gspec = config.generalized_spec()?;
    let op = BivariateOperator::generalized(&gspec)?;
    let grid = &config.grid;
    let header = [
        "function",
        "x",
        "y",
        "t_x",
        "t_y",
        "lhs",
        "delta1",
        "delta2",
        "bound",
        "slack",
        "literal_bound",
        "grid_bound",
        "d_x",
        "d_y",
        "lipschitz_bound",
        "lipschitz_slack",
    ];
    let mut table = CsvTable::new(config, &header)?;
    let mut trailer = String::new();
    let mut summary = String::new();
    let mut violations = 0;
    let (m, alpha) = match &config.lipschitz {
        Some(l) => (l.m, (l.alpha1, l.alpha2)),
        None => (1.0, (1.0, 1.0)),
    };
    for &f in &config.functions {
        let report = rate_bound_check(f, &op, grid)?;
        let lip: Option<LipschitzReport> = config
            .lipschitz
            .as_ref()
            .map(|l| lipschitz_bound_report(f, l, &op, grid))
            .transpose()?;
        let generalized = generalized_bound_check(f, &gspec, m, alpha, grid)?;
        for (k, p) in report.points.iter().enumerate() {
            let lp = lip.as_ref().map(|l| &l.points[k]);
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            table.row([
                f.to_string(),
                num(p.x),
                num(p.y),
                num(p.t_x),
                num(p.t_y),
                num(p.lhs),
                num(p.delta1),
                num(p.delta2),
                num(p.bound),
                num(p.slack),
                num(p.literal_bound),
                num(p.grid_bound),
                opt(lp.map(|l| l.dist_x)),
                opt(lp.map(|l| l.dist_y)),
                opt(lp.map(|l| l.bound)),
                opt(lp.map(|l| l.slack)),
            ])?;
        }
        violations += report.violations + lip.as_ref().map_or(0, |l| l.violations);
        let c = generalized.components;
        let mut line = format!(
            "# summary function={f} max_violation={} violations={} literal_violations={}",
            num(report.max_violation),
            report.violations,
            report.literal_violations
        );
        if let Some(l) = &lip {
            line.push_str(&format!(
                " lipschitz_max_violation={} lipschitz_violations={} lipschitz_class_member={}",
                num(l.max_violation),
                l.violations,
                l.membership.holds()
            ));
        }
        line.push_str(&format!(
            " shift_component={} scale_component={} moment_component={} sup_error={} component_bound={}\n",
            num(c.shift),
            num(c.scale),
            num(c.moment),
            num(generalized.sup_error),
            num(generalized.bound)
        ));
        summary.push_str(line.trim_start_matches("# summary "));
        trailer.push_str(&line);
    }
    Ok(Artifact {
        main: table.finish(&trailer)?,
        companion: None,
        violations,
        summary,
    })
}

/// `<out>` with its extension replaced by `surfaces.csv`.
pub fn companion_path(out: &Path) -> PathBuf {
    out.with_extension("surfaces.csv")
}

/// Writes the artifact to the configured destination.
pub fn write(config: &RunConfig, artifact: &Artifact) -> anyhow::Result<()> {
    match &config.out {
        Some(path) => {
            fs::write(path, &artifact.main)
                .with_context(|| format!("writing {}", path.display()))?;
            if let Some(companion) = &artifact.companion {
                let path = companion_path(path);
                fs::write(&path, companion)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        None => print!("{}", artifact.main),
    }
    Ok(())
}
