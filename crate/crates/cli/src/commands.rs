use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use gmrf_krylov::krylov::{
    lanczos_bound_history, ConvergenceReport, LambdaMinSource, QuadratureOptions,
    Reorthogonalization, SamplerOptions,
};
use gmrf_krylov::lgcp::{
    bin_points, mh_chain, simulate_lgcp, ChainConfig, LatticeCounts, LgcpModel, PointPattern,
    Proposer, SmmalaOptions, TorusLattice,
};
use gmrf_krylov::logdet::{
    colour_graph, coloured_hutchinson_logdet, hutchinson_logdet, preconditioned_logdet,
    LogDetOptions,
};
use gmrf_krylov::operators::grid_csv::{read_grid, write_grid};
use gmrf_krylov::operators::{CountingOperator, DiagonalOperator, SumOperator};
use gmrf_krylov::precond::{
    build_circulant_shift, build_ict, preconditioned_sample, sample_with_inner_operator,
    PreconditionedOperator,
};

use crate::operator::{build_preconditioner, Operator};
use crate::{BenchArgs, Global, LgcpArgs, LogdetArgs, ProposerKind, SampleArgs, SimulateArgs};

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_report(dir: &Path, name: &str, report: &ConvergenceReport) -> Result<()> {
    let mut out = create(dir, name)?;
    report.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(dir, name)?))
}

pub fn sample(g: &Global, a: &SampleArgs) -> Result<()> {
    ensure!(a.samples > 0, "--samples must be positive");
    let op = Operator::build(&a.operator, &a.prior.prior()?)?;
    let p = build_preconditioner(a.precond.precond, &op, a.precond.alpha, a.precond.drop_tol)?;
    let n = op.as_op().dim();

    let mut draws = Vec::with_capacity(a.samples);
    let mut summary = csv_writer(&g.out_dir, "sample_summary.csv")?;
    summary.write_record(["sample", "iterations", "final_bound", "converged", "seconds"])?;
    let mut failed = 0;
    for k in 0..a.samples {
        let opts = SamplerOptions {
            max_iter: g.maxit,
            tol: g.tol,
            reorth: a.reorth.mode(),
            lambda_min: LambdaMinSource::Ritz,
            seed: g.seed,
            stream: k as u64,
            check_stride: 1,
        };
        let start = Instant::now();
        let s = preconditioned_sample(op.as_op(), p.as_ref(), None, &opts)?;
        let secs = start.elapsed().as_secs_f64();
        let r = &s.report;
        if k == 0 {
            write_report(&g.out_dir, "report.csv", r)?;
        }
        summary.write_record([
            k.to_string(),
            r.iterations.to_string(),
            format!("{:e}", r.final_bound().unwrap_or(0.0)),
            r.converged.to_string(),
            format!("{secs:.6}"),
        ])?;
        if !r.converged {
            failed += 1;
        }
        draws.push(s.x);
    }
    summary.flush()?;

    let mut out = csv_writer(&g.out_dir, "sample.csv")?;
    let mut header = vec!["index".to_string()];
    header.extend((0..a.samples).map(|k| format!("sample_{k}")));
    out.write_record(&header)?;
    for i in 0..n {
        let mut row = vec![i.to_string()];
        row.extend(draws.iter().map(|x| format!("{:e}", x[i])));
        out.write_record(&row)?;
    }
    out.flush()?;
    println!(
        "{} sample(s) of {} (n = {n}, precond {:?}) written to {}",
        a.samples,
        a.operator,
        a.precond.precond,
        g.out_dir.display()
    );
    if failed > 0 {
        bail!("{failed} of {} samples did not reach tol {:e} in {} iterations", a.samples, g.tol, g.maxit);
    }
    Ok(())
}

struct BenchRow {
    case: String,
    method: &'static str,
    iterations: usize,
    converged: bool,
    seconds: f64,
    matvecs: usize,
    ffts: usize,
}

fn write_bench(g: &Global, rows: &[BenchRow], key: &str) -> Result<()> {
    let mut out = csv_writer(&g.out_dir, "bench.csv")?;
    out.write_record([key, "method", "iterations", "seconds", "matvecs", "ffts"])?;
    for r in rows {
        let its = if r.converged { r.iterations.to_string() } else { "-".into() };
        out.write_record([
            r.case.clone(),
            r.method.to_string(),
            its.clone(),
            format!("{:.6}", r.seconds),
            r.matvecs.to_string(),
            r.ffts.to_string(),
        ])?;
        println!("{:>10} {:>16} {:>8}", r.case, r.method, its);
    }
    out.flush()?;
    Ok(())
}

pub fn bench_precond(g: &Global, a: &BenchArgs) -> Result<()> {
    if !a.drop_tols.is_empty() {
        return ict_sweep(g, a);
    }
    ensure!(!a.grids.is_empty(), "no grid sizes given");
    let prior = a.prior.prior()?;
    let base = SamplerOptions {
        max_iter: g.maxit,
        tol: g.tol,
        reorth: Reorthogonalization::None,
        seed: g.seed,
        ..Default::default()
    };
    let mut rows = Vec::new();
    for &n in &a.grids {
        let lattice = TorusLattice::new(n)?;
        let area = lattice.cell_area();
        let field = lattice.field(|s, t| {
            a.mu + (2.0 * std::f64::consts::PI * s).sin() * (2.0 * std::f64::consts::PI * t).cos()
        });
        let h: Vec<f64> = field.iter().map(|x| area * x.exp()).collect();
        let q = prior.operator(n, n)?;

        let p = build_circulant_shift(&q, a.alpha)?;
        let inner = CountingOperator::new(p.fused_with_diagonal(&h)?);
        let start = Instant::now();
        let s = sample_with_inner_operator(
            &inner,
            &p,
            None,
            &SamplerOptions {
                lambda_min: LambdaMinSource::Given(p.inner_lower_bound()),
                ..base
            },
        )?;
        rows.push(BenchRow {
            case: format!("{n}x{n}"),
            method: "circulant-shift",
            iterations: s.report.iterations,
            converged: s.report.converged,
            seconds: start.elapsed().as_secs_f64(),
            matvecs: inner.applies(),
            ffts: inner.ffts() + 2,
        });
        write_report(&g.out_dir, &format!("report_{n}_circulant.csv"), &s.report)?;

        let lmin = q.lambda_min();
        let sum = CountingOperator::new(SumOperator::pair(
            Arc::new(q),
            Arc::new(DiagonalOperator::new(h)?),
        )?);
        let start = Instant::now();
        let r = lanczos_bound_history(
            &sum,
            None,
            &SamplerOptions {
                lambda_min: LambdaMinSource::Given(lmin),
                ..base
            },
        )?;
        rows.push(BenchRow {
            case: format!("{n}x{n}"),
            method: "none",
            iterations: r.iterations,
            converged: r.converged,
            seconds: start.elapsed().as_secs_f64(),
            matvecs: sum.applies(),
            ffts: sum.ffts(),
        });
        write_report(&g.out_dir, &format!("report_{n}_none.csv"), &r)?;
    }
    write_bench(g, &rows, "grid")
}

fn ict_sweep(g: &Global, a: &BenchArgs) -> Result<()> {
    let op = Operator::build(&a.operator, &a.prior.prior()?)?;
    let sq = op.sparse()?;
    let opts = SamplerOptions {
        max_iter: g.maxit,
        tol: g.tol,
        reorth: Reorthogonalization::Full,
        seed: g.seed,
        ..Default::default()
    };
    let mut rows = Vec::new();
    let mut fill = csv_writer(&g.out_dir, "ict_fill.csv")?;
    fill.write_record(["drop_tol", "nnz", "dropped", "shift"])?;

    let counted = CountingOperator::new(op.as_op());
    let start = Instant::now();
    let r = lanczos_bound_history(&counted, None, &opts)?;
    rows.push(BenchRow {
        case: "-".into(),
        method: "none",
        iterations: r.iterations,
        converged: r.converged,
        seconds: start.elapsed().as_secs_f64(),
        matvecs: counted.applies(),
        ffts: 0,
    });
    write_report(&g.out_dir, "report_none.csv", &r)?;

    for &tol in &a.drop_tols {
        let start = Instant::now();
        let p = build_ict(&sq, tol).with_context(|| format!("drop tolerance {tol:e}"))?;
        let rec = p.fill_record();
        fill.write_record([
            format!("{tol:e}"),
            rec.nnz.to_string(),
            rec.dropped.to_string(),
            format!("{:e}", rec.shift),
        ])?;
        let inner = CountingOperator::new(PreconditionedOperator::new(op.as_op(), &p)?);
        let r = lanczos_bound_history(&inner, None, &opts)?;
        rows.push(BenchRow {
            case: format!("{tol:e}"),
            method: "ict",
            iterations: r.iterations,
            converged: r.converged,
            seconds: start.elapsed().as_secs_f64(),
            matvecs: inner.applies(),
            ffts: 0,
        });
        write_report(&g.out_dir, &format!("report_ict_{tol:e}.csv"), &r)?;
    }
    fill.flush()?;
    write_bench(g, &rows, "drop_tol")
}

pub fn logdet(g: &Global, a: &LogdetArgs) -> Result<()> {
    let op = Operator::build(&a.operator, &a.prior.prior()?)?;
    let colouring = match a.colour_power {
        0 => None,
        p => Some(colour_graph(&op.sparse()?, p)?),
    };
    let opts = LogDetOptions {
        quadrature: QuadratureOptions {
            rtol: g.tol,
            max_iter: g.maxit,
            ..Default::default()
        },
        seed: g.seed,
        stream: 0,
    };
    let start = Instant::now();
    let est = match (a.precond.precond, &colouring) {
        (crate::operator::PrecondKind::None, None) => hutchinson_logdet(op.as_op(), a.probes, &opts)?,
        (crate::operator::PrecondKind::None, Some(c)) => {
            coloured_hutchinson_logdet(op.as_op(), c, a.probes, &opts)?
        }
        (kind, c) => {
            let p = build_preconditioner(kind, &op, a.precond.alpha, a.precond.drop_tol)?;
            preconditioned_logdet(op.as_op(), p.as_ref(), c.as_ref(), a.probes, &opts)?
        }
    };
    let secs = start.elapsed().as_secs_f64();

    let mut out = csv_writer(&g.out_dir, "logdet_probes.csv")?;
    out.write_record(["probe", "value"])?;
    for (k, v) in est.per_probe.iter().enumerate() {
        out.write_record([k.to_string(), format!("{v:e}")])?;
    }
    out.flush()?;

    let colours = colouring.as_ref().map_or(1, |c| c.num_colours());
    let summary = format!(
        "operator = {}\nestimate = {:.12e}\nstandard_error = {:.6e}\nvariance = {:.6e}\nprobes = {}\ncolour_power = {}\ncolours = {colours}\noffset = {:.12e}\nunconverged = {}\nseconds = {secs:.3}\n",
        a.operator, est.estimate, est.standard_error, est.variance, est.probes, a.colour_power,
        est.offset, est.unconverged,
    );
    std::fs::write(g.out_dir.join("logdet_summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn load_counts(a: &LgcpArgs) -> Result<(TorusLattice, LatticeCounts)> {
    match (&a.points, &a.counts) {
        (Some(path), None) => {
            let lattice = TorusLattice::new(a.grid)?;
            let pattern = PointPattern::read_csv(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Ok((lattice, bin_points(&pattern, &lattice)))
        }
        (None, Some(path)) => {
            let (n1, n2, v) =
                read_grid(path).with_context(|| format!("reading {}", path.display()))?;
            ensure!(n1 == n2, "count grid must be square, got {n1}x{n2}");
            let counts = v
                .iter()
                .map(|&c| {
                    if c >= 0.0 && c.fract() == 0.0 {
                        Ok(c as u64)
                    } else {
                        bail!("count {c} is not a non-negative integer")
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((TorusLattice::new(n1)?, LatticeCounts::new(counts)))
        }
        _ => bail!("give exactly one of --points or --counts"),
    }
}

pub fn lgcp_mcmc(g: &Global, a: &LgcpArgs) -> Result<()> {
    let (lattice, counts) = load_counts(a)?;
    let mu = a.mu.unwrap_or_else(|| (counts.total().max(1) as f64).ln());
    let prior = a.prior.prior()?;
    let model = LgcpModel::on_lattice(lattice, &prior, &counts, mu)?;
    let proposer = match a.proposer {
        ProposerKind::Rw => Proposer::RandomWalk,
        ProposerKind::Mala => Proposer::Mala,
        ProposerKind::Smmala => Proposer::Smmala(SmmalaOptions {
            alpha: a.alpha,
            sampler_tol: g.tol,
            max_iter: g.maxit,
            ..Default::default()
        }),
    };
    let config = ChainConfig {
        proposer,
        iterations: a.iters,
        warmup: a.warmup,
        delta: a.delta,
        target_acceptance: a.target_acceptance,
        seed: g.seed,
        stream: 0,
        thin: a.thin,
        initial: None,
    };
    let start = Instant::now();
    let out = mh_chain(&model, &config)?;
    let secs = start.elapsed().as_secs_f64();

    let mut w = csv_writer(&g.out_dir, "chain.csv")?;
    w.write_record(["iteration", "accepted", "log_posterior", "inner_iterations", "delta", "flag"])?;
    for r in &out.records {
        w.write_record([
            r.iteration.to_string(),
            u8::from(r.accepted).to_string(),
            format!("{:.12e}", r.log_posterior),
            r.inner_iterations.to_string(),
            format!("{:e}", r.delta),
            r.flag.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    if a.thin > 0 {
        let mut w = csv_writer(&g.out_dir, "states.csv")?;
        let mut header = vec!["iteration".to_string()];
        header.extend((0..model.dim()).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (k, s) in out.samples.iter().enumerate() {
            let mut row = vec![(a.warmup + (k + 1) * a.thin).to_string()];
            row.extend(s.iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    let n = lattice.side();
    write_grid(g.out_dir.join("posterior_mean.csv"), n, n, &out.posterior_mean)?;

    let flagged = out.records.iter().filter(|r| r.flag.is_some()).count();
    println!("proposer = {}", proposer.name());
    println!("cells = {}", model.dim());
    println!("points = {}", counts.total());
    println!("mu = {mu:.6}");
    println!("acceptance_rate = {:.4}", out.acceptance_rate);
    println!("warmup_acceptance_rate = {:.4}", out.warmup_acceptance_rate);
    println!("delta = {:.6e}", out.delta);
    println!("flagged = {flagged}");
    println!("inexact = {}", out.inexact);
    println!("seconds = {secs:.3}");
    Ok(())
}

pub fn simulate(g: &Global, a: &SimulateArgs) -> Result<()> {
    let lattice = TorusLattice::new(a.grid)?;
    let q = a.prior.prior()?.operator(a.grid, a.grid)?;
    let sim = simulate_lgcp(&lattice, &q, a.mu, g.seed)?;
    sim.pattern.write_csv(g.out_dir.join("points.csv"))?;
    write_grid(g.out_dir.join("field.csv"), a.grid, a.grid, &sim.x)?;
    write_grid(g.out_dir.join("counts.csv"), a.grid, a.grid, &sim.counts.as_f64())?;
    println!("points = {}", sim.pattern.len());
    println!("cells = {}", lattice.cells());
    Ok(())
}
