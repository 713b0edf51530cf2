//! On-disk formats: per-round CSV, whitespace-separated plot data with a
//! metadata sidecar, and a minimal SVG rendering of regret curves.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::runner::{AggregateCurves, RoundRecord};
use crate::policies::{PolicyKind, PolicyTag};
use crate::sampling::NoiseKind;

pub const CSV_HEADER: &str =
    "replication,round,policy,chosen_arm,optimal_arm,reward,regret,cum_regret";

/// Reals are written with 17 significant digits, which round-trips every
/// `f64` exactly.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the CSV header and one row per record. `preamble` lines are
/// emitted first, each prefixed with `# `.
pub fn write_csv<'a, W: Write>(
    w: &mut W,
    preamble: &[String],
    records: impl IntoIterator<Item = &'a RoundRecord>,
) -> io::Result<()> {
    for line in preamble {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.replication,
            r.round,
            r.policy,
            r.chosen_arm,
            r.optimal_arm,
            real(r.reward),
            real(r.regret),
            real(r.cum_regret)
        )?;
    }
    Ok(())
}

pub fn write_csv_file<'a>(
    path: &Path,
    preamble: &[String],
    records: impl IntoIterator<Item = &'a RoundRecord>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, preamble, records)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Parses what [`write_csv`] produces. Lines starting with `#` are skipped.
pub fn read_csv<R: BufRead>(reader: R, source: &str) -> Result<Vec<RoundRecord>> {
    let mut records = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in reader.lines().enumerate() {
        let loc = || format!("{source}:{}", lineno + 1);
        let line = line.map_err(|e| Error::parse(loc(), e.to_string()))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line != CSV_HEADER {
                return Err(Error::parse(loc(), format!("unexpected header `{line}`")));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::parse(
                loc(),
                format!("expected 8 fields, found {}", f.len()),
            ));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(loc(), format!("bad integer `{s}`")))
        };
        let flt = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(loc(), format!("bad number `{s}`")))
        };
        records.push(RoundRecord {
            replication: int(f[0])?,
            round: int(f[1])?,
            policy: f[2]
                .parse::<PolicyTag>()
                .map_err(|e| Error::parse(loc(), e.to_string()))?,
            chosen_arm: int(f[3])?,
            optimal_arm: int(f[4])?,
            reward: flt(f[5])?,
            regret: flt(f[6])?,
            cum_regret: flt(f[7])?,
        });
    }
    if !header_seen {
        return Err(Error::parse(source, "missing CSV header"));
    }
    Ok(records)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<RoundRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(file), &path.display().to_string())
}

/// Rebuilds mean curves from stored records. Policies keep their order of
/// first appearance; round-0 rows are ignored.
pub fn aggregate_records(records: &[RoundRecord]) -> Result<AggregateCurves> {
    let mut policies: Vec<PolicyTag> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    for r in records {
        if !policies.contains(&r.policy) {
            policies.push(r.policy);
        }
        if !reps.contains(&r.replication) {
            reps.push(r.replication);
        }
    }
    reps.sort_unstable();
    let mut curves = vec![vec![Vec::new(); policies.len()]; reps.len()];
    for r in records.iter().filter(|r| r.round > 0) {
        let ri = reps.binary_search(&r.replication).expect("collected above");
        let pi = policies
            .iter()
            .position(|&p| p == r.policy)
            .expect("collected above");
        let curve = &mut curves[ri][pi];
        if r.round != curve.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "replication {} policy {}: round {} out of sequence",
                r.replication, r.policy, r.round
            )));
        }
        curve.push(r.cum_regret);
    }
    AggregateCurves::from_curves(policies, &curves)
}

/// Whitespace-separated table: `round` then one mean cumulative-regret
/// column per policy, preceded by a `#` header line naming the columns.
pub fn plot_data(aggregate: &AggregateCurves) -> String {
    let mut out = String::from("# round");
    for p in &aggregate.policies {
        let _ = write!(out, " {p}");
    }
    out.push('\n');
    for t in 0..aggregate.horizon() {
        let _ = write!(out, "{}", t + 1);
        for curve in &aggregate.mean_cum_regret {
            let _ = write!(out, " {}", real(curve[t]));
        }
        out.push('\n');
    }
    out
}

/// Path of the metadata sidecar written next to a plot data file.
pub fn sidecar_path(plot_path: &Path) -> PathBuf {
    plot_path.with_extension("meta")
}

/// Config text followed by `#` provenance comments. The comments are ignored
/// when the sidecar is parsed back as a config.
pub fn metadata_text(config: &ExperimentConfig, policies: &[PolicyKind]) -> String {
    let mut out = config.to_text();
    for line in provenance_lines(config, policies) {
        let _ = writeln!(out, "# {line}");
    }
    out
}

pub fn provenance_lines(config: &ExperimentConfig, policies: &[PolicyKind]) -> Vec<String> {
    let mut lines = vec![
        format!("master_seed {}", config.master_seed),
        "seed derivation: splitmix64 mix of (master_seed, replication, label); labels env, <policy>, <policy>/reward".to_string(),
        "contexts shared by all policies each round; reward noise drawn independently per policy".to_string(),
        match config.noise_kind() {
            NoiseKind::TruncatedNormal { bound } => format!("noise truncated_normal bound={bound}"),
            kind => format!("noise {kind}"),
        },
    ];
    for kind in policies {
        lines.push(match *kind {
            PolicyKind::MvtsDn { u, v } => {
                format!("policy {} u={u} v={v} rho={}", kind.tag(), config.rho)
            }
            PolicyKind::TsA { v } => format!("policy {} v={v}", kind.tag()),
            _ => format!("policy {} rho={}", kind.tag(), config.rho),
        });
    }
    lines
}

/// Writes plot data to `path` and the metadata sidecar next to it.
pub fn emit_plot_data(
    aggregate: &AggregateCurves,
    config: &ExperimentConfig,
    policies: &[PolicyKind],
    path: &Path,
) -> Result<()> {
    std::fs::write(path, plot_data(aggregate)).map_err(|e| Error::io(path, e))?;
    let meta = sidecar_path(path);
    std::fs::write(&meta, metadata_text(config, policies)).map_err(|e| Error::io(&meta, e))
}

/// Line chart of the mean cumulative-regret curves.
pub fn render_svg(aggregate: &AggregateCurves, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let horizon = aggregate.horizon().max(1);
    let y_max = aggregate
        .mean_cum_regret
        .iter()
        .flatten()
        .copied()
        .fold(0.0, f64::max)
        .max(1e-12);
    let sx = |t: usize| PAD + (W - 2.0 * PAD) * t as f64 / horizon as f64;
    let sy = |v: f64| H - PAD - (H - 2.0 * PAD) * v / y_max;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{y_max:.1}</text>"#,
        PAD - 6.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">round {horizon}</text>"#,
        W - PAD,
        H - PAD + 16.0
    );
    // At most ~500 vertices per curve.
    let step = (horizon / 500).max(1);
    for (i, (policy, curve)) in aggregate
        .policies
        .iter()
        .zip(&aggregate.mean_cum_regret)
        .enumerate()
    {
        let color = COLORS[i % COLORS.len()];
        let mut d = format!("M{:.2} {:.2}", sx(0), sy(0.0));
        for t in (step - 1..curve.len())
            .step_by(step)
            .chain(std::iter::once(curve.len() - 1))
        {
            let _ = write!(d, " L{:.2} {:.2}", sx(t + 1), sy(curve[t]));
        }
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}" font-family="sans-serif" font-size="12">{policy}</text>"#,
            PAD + 10.0,
            PAD + 16.0 * (i as f64 + 1.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
