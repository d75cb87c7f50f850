use std::fmt::Write as _;

/// One checkpoint query of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub seed: u64,
    pub checkpoint: u64,
    pub window_start: u64,
    /// `None` when every ladder level failed.
    pub estimate: Option<f64>,
    pub oracle: Option<f64>,
    pub success: Option<bool>,
    /// Total space budget of all ladder levels, in abstract units.
    pub space: f64,
    /// Answering ladder level; empty for tracker answers and failures.
    pub level: Option<usize>,
    pub guess: Option<f64>,
    pub wall_ms: Option<f64>,
}

impl Row {
    pub fn ratio(&self) -> Option<f64> {
        let (e, o) = (self.estimate?, self.oracle?);
        Some(if o == 0.0 {
            if e == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            e / o
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub queries: usize,
    pub fails: usize,
    pub checked: usize,
    pub successes: usize,
    /// min, q05, median, q95, max of finite ratios.
    pub ratio_quantiles: Option<[f64; 5]>,
    pub space_mean: f64,
    pub space_max: f64,
    pub profile: Option<&'static str>,
}

impl Summary {
    pub fn success_rate(&self) -> Option<f64> {
        (self.checked > 0).then(|| self.successes as f64 / self.checked as f64)
    }

    pub fn from_rows(rows: &[Row], profile: Option<&'static str>) -> Self {
        let mut ratios: Vec<f64> = rows.iter().filter_map(Row::ratio).filter(|r| r.is_finite()).collect();
        ratios.sort_by(f64::total_cmp);
        let q = |f: f64| ratios[((f * ratios.len() as f64).ceil() as usize).clamp(1, ratios.len()) - 1];
        let spaces = rows.iter().map(|r| r.space);
        Summary {
            queries: rows.len(),
            fails: rows.iter().filter(|r| r.estimate.is_none()).count(),
            checked: rows.iter().filter(|r| r.success.is_some()).count(),
            successes: rows.iter().filter(|r| r.success == Some(true)).count(),
            ratio_quantiles: (!ratios.is_empty()).then(|| [ratios[0], q(0.05), q(0.5), q(0.95), ratios[ratios.len() - 1]]),
            space_mean: if rows.is_empty() { 0.0 } else { spaces.clone().sum::<f64>() / rows.len() as f64 },
            space_max: spaces.fold(0.0, f64::max),
            profile,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// The resolved configuration as one JSON line.
    pub config: String,
    pub timings: bool,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "inf".to_string()
    }
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

impl Report {
    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols = vec!["seed", "checkpoint", "window_start", "estimate", "oracle", "ratio", "success", "space", "level", "guess"];
        if self.timings {
            cols.push("wall_ms");
        }
        cols
    }

    /// Config line, header, one tab-separated row per query, a blank line and the summary.
    pub fn render(&self) -> String {
        let mut out = format!("# config {}\n{}\n", self.config, self.columns().join("\t"));
        for r in &self.rows {
            let mut fields = vec![
                r.seed.to_string(),
                r.checkpoint.to_string(),
                r.window_start.to_string(),
                opt(r.estimate, num),
                opt(r.oracle, num),
                opt(r.ratio(), num),
                opt(r.success, |b| u8::from(b).to_string()),
                num(r.space),
                opt(r.level, |l| l.to_string()),
                opt(r.guess, num),
            ];
            if self.timings {
                fields.push(opt(r.wall_ms, |t| format!("{t:.3}")));
            }
            writeln!(out, "{}", fields.join("\t")).expect("string write");
        }
        let s = &self.summary;
        out.push('\n');
        writeln!(out, "# summary").expect("string write");
        let mut line = |k: &str, v: String| writeln!(out, "{k}\t{v}").expect("string write");
        line("queries", s.queries.to_string());
        line("fails", s.fails.to_string());
        line("checked", s.checked.to_string());
        line("success_rate", opt(s.success_rate(), num));
        let names = ["ratio_min", "ratio_q05", "ratio_median", "ratio_q95", "ratio_max"];
        for (i, n) in names.iter().enumerate() {
            line(n, opt(s.ratio_quantiles, |q| num(q[i])));
        }
        line("space_mean", num(s.space_mean));
        line("space_max", num(s.space_max));
        if let Some(p) = s.profile {
            line("profile", p.to_string());
        }
        out
    }
}
