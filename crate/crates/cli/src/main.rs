use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dgwave::study::{
    emit_csv, emit_plot_data, rows_from_errors, run_single, run_study, RunReport, StudyError,
    StudyPlan,
};

/// Space-time DG solver for the damped nonlinear wave equation.
#[derive(Parser, Debug)]
#[command(name = "dgwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the manufactured problem once and report the final-time error.
    Solve {
        /// Temporal degree.
        #[arg(long, default_value_t = 2)]
        q: usize,
        /// Spatial degree (defaults to q).
        #[arg(long)]
        p: Option<usize>,
        /// Mesh size; the time step is h².
        #[arg(long, default_value_t = 0.25)]
        h: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the convergence table over several degrees and mesh sizes.
    Study {
        /// Temporal (= spatial) degrees.
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
        q: Vec<usize>,
        /// Mesh sizes, coarse to fine.
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.2, 0.125, 0.0625])]
        h: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Final time.
    #[arg(long = "T", default_value_t = 1.0)]
    final_time: f64,
    #[arg(long, default_value_t = 1e-10)]
    picard_tol: f64,
    #[arg(long, default_value_t = 30)]
    picard_max: usize,
    /// CSV file for the `q,h,k,error,rate` table.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV file for the `q,inv_k,error` plot series.
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

impl Common {
    fn plan(&self, degrees: Vec<usize>, h_values: Vec<f64>) -> StudyPlan {
        StudyPlan {
            gamma: self.gamma,
            final_time: self.final_time,
            h_values,
            degrees,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
        }
    }
}

fn print_report(q: usize, h: f64, report: &RunReport) {
    let unconverged = report.converged.iter().filter(|c| !**c).count();
    println!(
        "q={q} h={h} error={:.5e} slabs={} max_picard={} max_residual={:.2e} unconverged={unconverged}",
        report.error,
        report.iterations.len(),
        report.max_iterations(),
        report.max_residual(),
    );
    if unconverged > 0 {
        eprintln!("warning: {unconverged} slab(s) stopped at the Picard iteration cap");
    }
}

fn run(cli: Cli) -> Result<(), StudyError> {
    let (rows, common) = match cli.command {
        Command::Solve { q, p, h, common } => {
            let plan = common.plan(vec![q], vec![h]);
            plan.validate()?;
            let mut cfg = plan.config(q, h)?;
            if let Some(p) = p {
                cfg.space_degree = p;
                cfg.load_quad_points = 2 * p + 3;
            }
            let report = run_single(&cfg)?;
            print_report(q, h, &report);
            println!("picard_iterations={:?}", report.iterations);
            (rows_from_errors(&[(q, h)], &[report.error]), common)
        }
        Command::Study { q, h, common } => {
            let plan = common.plan(q, h);
            let result = run_study(&plan)?;
            for ((q, h), report) in plan.cases().into_iter().zip(&result.reports) {
                print_report(q, h, report);
            }
            (result.rows, common)
        }
    };
    for r in &rows {
        let rate = r
            .rate
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>2} {:>9.5e} {:>9.5e} {:>12.5e} {rate:>8}",
            r.q, r.h, r.k, r.error
        );
    }
    if let Some(path) = &common.out {
        emit_csv(&rows, path)?;
    }
    if let Some(path) = &common.plot_out {
        emit_plot_data(&rows, path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                StudyError::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
