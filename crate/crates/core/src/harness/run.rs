use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ProblemConfig, StreamSource};
use super::generate::generate;
use super::report::{Report, Row, Summary};
use super::stream::{parse_bits, parse_edges, parse_points, Stream};
use crate::clustering::{ClusterSource, ClusterWindow, JlProjection, JL_CONST};
use crate::diversity::{DivSource, DivWindow};
use crate::error::{Error, Result};
use crate::framework::{SlidingSketch, WindowedEstimate};
use crate::geometry::Point;
use crate::kcover::{KCoverWindow, RecoverMode};
use crate::oracles::{opt_cluster_candidates, opt_div, opt_kcover, WindowView};
use crate::reference::{bit_window, BitProblem, BitSpec};

/// Reads and parses a stream file in the format the problem expects.
pub fn load_stream(problem: &ProblemConfig, text: &str) -> Result<Stream> {
    Ok(match problem {
        ProblemConfig::Toy { .. } => Stream::Bits(parse_bits(text)?),
        ProblemConfig::Kcover { params } => Stream::Edges(parse_edges(text, params.n, params.m)?),
        ProblemConfig::Diversity { params } => Stream::Points(parse_points(text, params.d, params.delta)?),
        ProblemConfig::Cluster { params, .. } => Stream::Points(parse_points(text, params.d, params.delta)?),
    })
}

/// Too-large instances have no oracle value.
fn oracle_value(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::TooLarge(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

struct Answer {
    estimate: Option<f64>,
    level: Option<usize>,
    guess: Option<f64>,
}

impl Answer {
    fn from_ladder<T>(est: &WindowedEstimate<T>, value: impl Fn(&T) -> f64) -> Self {
        match est {
            WindowedEstimate::Ok { level, guess, output } => {
                Answer { estimate: Some(value(output)), level: Some(*level), guess: Some(*guess) }
            }
            WindowedEstimate::Fail => Answer { estimate: None, level: None, guess: None },
        }
    }
}

enum Runner {
    Toy(SlidingSketch<BitSpec>),
    Kcover(Box<KCoverWindow>),
    Diversity(Box<DivWindow>),
    Cluster(Box<ClusterWindow>),
}

fn prepare(config: &ExperimentConfig, stream: Stream, seed: u64) -> Result<(Runner, Stream)> {
    let w = config.window;
    Ok(match &config.problem {
        ProblemConfig::Toy { kind, params } => (Runner::Toy(bit_window(*kind, params, w, seed)?), stream),
        ProblemConfig::Kcover { params } => (Runner::Kcover(Box::new(KCoverWindow::new(params.clone(), w, seed)?)), stream),
        ProblemConfig::Diversity { params } => (Runner::Diversity(Box::new(DivWindow::new(params.clone())?)), stream),
        ProblemConfig::Cluster { params, jl_eps } => {
            let mut params = params.clone();
            let stream = match (jl_eps, stream) {
                (Some(e), Stream::Points(pts)) => {
                    let map = JlProjection::new(params.d, params.delta, params.k, *e, JL_CONST, seed)?;
                    params.d = map.out_dim();
                    params.delta = map.out_delta();
                    Stream::Points(pts.iter().map(|x| map.quantize(x)).collect())
                }
                (_, s) => s,
            };
            (Runner::Cluster(Box::new(ClusterWindow::new(params, seed)?)), stream)
        }
    })
}

fn points(stream: &Stream) -> &[Point] {
    match stream {
        Stream::Points(p) => p,
        _ => &[],
    }
}

fn run_trial(config: &ExperimentConfig, stream: Stream, seed: u64) -> Result<Vec<Row>> {
    let started = Instant::now();
    let (mut runner, stream) = prepare(config, stream, seed)?;
    let (w, step, len) = (config.window, config.checkpoint_step(), stream.len() as u64);
    let mut rows = Vec::new();
    for i in 0..len as usize {
        match (&mut runner, &stream) {
            (Runner::Toy(s), Stream::Bits(b)) => s.ingest(b[i]),
            (Runner::Kcover(s), Stream::Edges(e)) => s.ingest(e[i]),
            (Runner::Diversity(s), Stream::Points(p)) => s.ingest(p[i].clone()),
            (Runner::Cluster(s), Stream::Points(p)) => s.ingest(p[i].clone()),
            _ => return Err(Error::InvalidParam("stream kind does not match the problem".into())),
        }
        let now = i as u64 + 1;
        if now % step != 0 && now != len {
            continue;
        }
        let (answer, space, oracle, success) = query(config, &runner, &stream, now)?;
        rows.push(Row {
            seed,
            checkpoint: now,
            window_start: (now + 1).saturating_sub(w).max(1),
            estimate: answer.estimate,
            oracle,
            success,
            space,
            level: answer.level,
            guess: answer.guess,
            wall_ms: config.timings.then(|| started.elapsed().as_secs_f64() * 1e3),
        });
    }
    Ok(rows)
}

type Checked = (Answer, f64, Option<f64>, Option<bool>);

fn query(config: &ExperimentConfig, runner: &Runner, stream: &Stream, now: u64) -> Result<Checked> {
    let w = config.window;
    let within = |e: Option<f64>, o: Option<f64>, lo: f64, hi: f64| match (e, o) {
        (Some(e), Some(o)) => Some(e >= lo * o - 1e-9 && e <= hi * o + 1e-9),
        (None, Some(_)) => Some(false),
        _ => None,
    };
    Ok(match (runner, &config.problem) {
        (Runner::Toy(s), ProblemConfig::Toy { kind, params }) => {
            let answer = Answer::from_ladder(&s.query(w), |v| *v);
            let oracle = config.oracle.then(|| {
                let Stream::Bits(b) = stream else { unreachable!("checked on ingest") };
                let win = WindowView::new(b, now, w).items;
                let ones = win.iter().filter(|&&x| x == 1).count() as f64;
                match kind {
                    BitProblem::Ones => ones,
                    BitProblem::Median => ones.min(win.len() as f64 - ones),
                }
            });
            let ok = within(answer.estimate, oracle, 1.0 - params.eps, 1.0 + params.eps);
            (answer, s.space_budget(), oracle, ok)
        }
        (Runner::Kcover(s), ProblemConfig::Kcover { params }) => {
            let answer = Answer::from_ladder(&s.query(w), |c| c.estimate);
            let oracle = if config.oracle {
                let Stream::Edges(e) = stream else { unreachable!("checked on ingest") };
                oracle_value(opt_kcover(&WindowView::new(e, now, w).items, params.n, params.k).map(|v| v as f64))?
            } else {
                None
            };
            let lo = match params.mode {
                RecoverMode::Exact => 1.0 - 3.0 * params.eps,
                RecoverMode::Greedy => 1.0 - (-1f64).exp() - 3.0 * params.eps,
            };
            let ok = within(answer.estimate, oracle, lo, 1.0 + params.eps);
            (answer, s.sketch.space_budget(), oracle, ok)
        }
        (Runner::Diversity(s), ProblemConfig::Diversity { params }) => {
            let a = s.query(w)?;
            let level = match a.source {
                DivSource::Ladder { level, guess } => (Some(level), Some(guess)),
                _ => (None, None),
            };
            let answer = Answer { estimate: a.solution.as_ref().map(|s| s.value), level: level.0, guess: level.1 };
            let oracle = if config.oracle {
                oracle_value(opt_div(&WindowView::new(points(stream), now, w).items, &params.objective))?
            } else {
                None
            };
            let ok = within(answer.estimate, oracle, 1.0 - params.eps, 1.0);
            (answer, s.sketch.space_budget(), oracle, ok)
        }
        (Runner::Cluster(s), ProblemConfig::Cluster { .. }) => {
            let a = s.query(w)?;
            let level = match a.source {
                ClusterSource::Ladder { level, guess } => (Some(level), Some(guess)),
                _ => (None, None),
            };
            let answer = Answer { estimate: a.estimate, level: level.0, guess: level.1 };
            let prm = &s.params;
            let oracle = if config.oracle {
                let win = WindowView::new(points(stream), now, w).items;
                let cands: Vec<Point> = win.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
                oracle_value(opt_cluster_candidates(&win, prm.k, prm.p, &cands))?
            } else {
                None
            };
            let ok = within(answer.estimate, oracle, 0.0, 1.0 + prm.eps);
            (answer, s.sketch.space_budget(), oracle, ok)
        }
        _ => unreachable!("runner built from the same config"),
    })
}

/// Replays the stream for every seed in parallel and collects rows in seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let file_stream = match &config.stream {
        StreamSource::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Some(load_stream(&config.problem, &text)?)
        }
        StreamSource::Generate { .. } => None,
    };
    let trials: Vec<Vec<Row>> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let stream = match (&file_stream, &config.stream) {
                (Some(s), _) => s.clone(),
                (None, StreamSource::Generate { spec }) => generate(spec, seed)?,
                (None, StreamSource::File { .. }) => unreachable!("file loaded above"),
            };
            run_trial(config, stream, seed)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = trials.into_iter().flatten().collect();
    let summary = Summary::from_rows(&rows, config.profile_name());
    let json = serde_json::to_string(config).map_err(|e| Error::InvalidParam(format!("config does not serialize: {e}")))?;
    Ok(Report { config: json, timings: config.timings, rows, summary })
}

/// Parses a config from JSON or from the first line of a rendered report.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let json = text.lines().next().and_then(|l| l.strip_prefix("# config ")).unwrap_or(text);
    serde_json::from_str(json).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
}
