//! CSV and text output for reports, batches and animat snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::animat::{Animat, Role};
use crate::batch::BatchSummary;
use crate::behavior::{Behavior, CANONICAL_BEHAVIORS};
use crate::config::parse_selection;
use crate::error::{Error, Result};
use crate::learning::QUEUE_LENGTH;
use crate::neural::{InputLayout, Network, SelectionMode, STATUS_LABELS};
use crate::signaling::Signal;
use crate::trial::{Obituary, TribeSummary, TrialReport};

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Generalist => "generalist",
        Role::Spotter => "spotter",
        Role::Fetcher => "fetcher",
    }
}

fn selection_name(m: SelectionMode) -> &'static str {
    match m {
        SelectionMode::Probabilistic => "ps",
        SelectionMode::WinnerTakesAll => "wta",
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Samples as `time,tribe,score,adf,sdf,towers`.
pub fn timeseries_csv(report: &TrialReport) -> String {
    let mut out = String::from("time,tribe,score,adf,sdf,towers,random_start\n");
    for s in &report.samples {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{},{}",
            s.time, s.tribe, s.score, s.adf, s.sdf, s.towers_completed, s.random_start as u8
        );
    }
    out
}

const SUMMARY_HEADER: &str = "seed,tribe,authority,obedience,selection,memory,random_policy,mean_score,normalized_score,\
mean_adf,mean_sdf,final_score,towers,enabled_signals,signal_mask,winner,solo_time,duration\n";

fn summary_rows(out: &mut String, r: &TrialReport) {
    for t in &r.tribes {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},{},{}",
            r.seed,
            t.tribe,
            t.authority.code(),
            t.obedience,
            selection_name(t.selection),
            t.memory as u8,
            t.random_policy as u8,
            t.mean_score,
            t.normalized_score,
            t.mean_adf,
            t.mean_sdf,
            t.final_score,
            t.towers_completed,
            t.enabled_signals,
            t.signal_mask,
            opt(r.winner),
            opt(r.solo_time),
            r.duration
        );
    }
}

/// One row per tribe per trial.
pub fn summary_csv<'a>(reports: impl IntoIterator<Item = &'a TrialReport>) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    for r in reports {
        summary_rows(&mut out, r);
    }
    out
}

pub fn obituaries_csv(obituaries: &[Obituary]) -> String {
    let mut out = String::from(
        "id,tribe,role,birth,death,health,decisions,bricks_stacked,combats_won,combats_lost,trainings,commands_received,commands_obeyed\n",
    );
    for o in obituaries {
        let s = &o.stats;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            o.id.0,
            o.tribe,
            role_name(o.role),
            o.birth,
            o.death,
            o.health,
            o.decisions,
            s.bricks_stacked,
            s.combats_won,
            s.combats_lost,
            s.trainings,
            s.commands_received,
            s.commands_obeyed
        );
    }
    out
}

/// Counts of dead animats per score bucket of width `bucket`.
pub fn score_histogram_csv(obituaries: &[Obituary], bucket: i64) -> String {
    let bucket = bucket.max(1);
    let mut counts = std::collections::BTreeMap::new();
    for o in obituaries {
        *counts.entry(o.health.div_euclid(bucket)).or_insert(0u64) += 1;
    }
    let mut out = String::from("low,high,count\n");
    for (b, n) in counts {
        let _ = writeln!(out, "{},{},{}", b * bucket, (b + 1) * bucket, n);
    }
    out
}

/// Batch totals followed by the per-signal table.
pub fn batch_csv(summary: &BatchSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trials,failures,wins0,wins1,ties,mean_normalized0,mean_normalized1,mean_score0,mean_score1");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{:.3},{:.3},{:.3},{:.3}",
        summary.trials,
        summary.failures,
        summary.wins[0],
        summary.wins[1],
        summary.ties,
        summary.mean_normalized[0],
        summary.mean_normalized[1],
        summary.mean_score[0],
        summary.mean_score[1]
    );
    out.push('\n');
    out.push_str("signal,label,enabled_tribes,relative_score,r,p\n");
    for c in &summary.correlations {
        let f = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:.6}"));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.signal,
            c.label,
            c.enabled_tribes,
            f(c.relative_score),
            f(c.r),
            f(c.p)
        );
    }
    out
}

fn field<T: std::str::FromStr>(cols: &[&str], k: usize, line: usize) -> Result<T> {
    cols.get(k)
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Config {
            line,
            message: format!("column {} is missing or malformed", k + 1),
        })
}

fn optional<T: std::str::FromStr>(cols: &[&str], k: usize, line: usize) -> Result<Option<T>> {
    match cols.get(k).map(|v| v.trim()) {
        None | Some("") => Ok(None),
        Some(_) => field(cols, k, line).map(Some),
    }
}

/// Reads rows written by [`summary_csv`] back into per-trial reports. Only
/// the summary fields are restored; samples and obituaries stay empty. A
/// row for tribe 0 starts a new trial.
pub fn read_summary_csv(text: &str) -> Result<Vec<TrialReport>> {
    let mut reports: Vec<TrialReport> = Vec::new();
    for (n, row) in text.lines().enumerate() {
        let line = n + 1;
        if n == 0 || row.trim().is_empty() {
            if n == 0 && !row.starts_with("seed,tribe,") {
                return Err(Error::Config {
                    line,
                    message: "not a summary file".into(),
                });
            }
            continue;
        }
        let c: Vec<&str> = row.split(',').collect();
        let tribe: usize = field(&c, 1, line)?;
        let summary = TribeSummary {
            tribe,
            authority: c[2].parse()?,
            obedience: field(&c, 3, line)?,
            selection: parse_selection(c.get(4).copied().unwrap_or(""))?,
            memory: field::<u8>(&c, 5, line)? == 1,
            random_policy: field::<u8>(&c, 6, line)? == 1,
            mean_score: field(&c, 7, line)?,
            normalized_score: field(&c, 8, line)?,
            mean_adf: field(&c, 9, line)?,
            mean_sdf: field(&c, 10, line)?,
            final_score: field(&c, 11, line)?,
            towers_completed: field(&c, 12, line)?,
            enabled_signals: field(&c, 13, line)?,
            signal_mask: c.get(14).copied().unwrap_or("").to_string(),
        };
        if tribe == 0 || reports.is_empty() {
            reports.push(TrialReport {
                seed: field(&c, 0, line)?,
                duration: field(&c, 17, line)?,
                tribes: Vec::new(),
                winner: optional(&c, 15, line)?,
                solo_time: optional(&c, 16, line)?,
                samples: Vec::new(),
                obituaries: Vec::new(),
                counters: Default::default(),
            });
        }
        reports.last_mut().expect("pushed above").tribes.push(summary);
    }
    Ok(reports)
}

fn argmax_one_hot(v: &[f64], width: usize) -> Option<usize> {
    v.iter().take(width).position(|&x| x == 1.0)
}

fn cell(v: f64) -> String {
    if v == 0.0 || v == 1.0 {
        format!("{}", v as u8)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').to_string()
    }
}

/// The animat's last hundred decisions, newest first: queue index, chosen
/// behavior, chosen signal, behavior seen on the signal target (when that
/// input group exists), last heard signal, then the status inputs.
pub fn queue_dump(animat: &Animat, layout: &InputLayout) -> String {
    let mut out = String::from("#\tL.Action\tL.Signal\tL.Seen\tHeard");
    for (label, _) in STATUS_LABELS {
        out.push('\t');
        out.push_str(label);
    }
    out.push('\n');
    let h = &animat.history;
    let tc = animat.knowledge.think_count;
    let rows = (tc as usize).min(QUEUE_LENGTH);
    for k in 0..rows {
        let slot = (tc as usize + QUEUE_LENGTH * 2 - k) % QUEUE_LENGTH;
        let action = argmax_one_hot(&h.action_outputs[slot], CANONICAL_BEHAVIORS.max(layout.behavior_width))
            .and_then(Behavior::from_index)
            .map_or_else(String::new, |b| b.abbreviation());
        let signal = argmax_one_hot(&h.signal_outputs[slot], layout.signal_width)
            .and_then(Signal::from_index)
            .map_or_else(String::new, |s| s.abbreviation());
        let seen = if layout.observe_target_state {
            let off = layout.target_state_offset();
            argmax_one_hot(&h.action_inputs[slot][off..], layout.behavior_width)
                .and_then(Behavior::from_index)
                .map_or_else(String::new, |b| b.abbreviation())
        } else {
            String::new()
        };
        let heard = h.heard[slot].map_or_else(String::new, |s| s.abbreviation());
        let _ = write!(out, "{slot}\t{action}\t{signal}\t{seen}\t{heard}");
        for (_, i) in STATUS_LABELS {
            out.push('\t');
            out.push_str(&cell(h.action_inputs[slot].get(i).copied().unwrap_or(0.0)));
        }
        out.push('\n');
    }
    out
}

/// Every connection weight as `layer,from,to,weight`.
pub fn weights_csv(net: &Network) -> String {
    let mut out = String::from("layer,from,to,weight\n");
    for i in 0..net.n_in() {
        for j in 0..net.n_hidden() {
            let _ = writeln!(out, "ih,{i},{j},{}", net.weight_ih(i, j));
        }
    }
    for j in 0..net.n_hidden() {
        for k in 0..net.n_out() {
            let _ = writeln!(out, "ho,{j},{k},{}", net.weight_ho(j, k));
        }
    }
    out
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Writes the standard set of files for one trial into `dir`.
pub fn write_report(dir: &Path, report: &TrialReport) -> Result<()> {
    write_file(&dir.join("timeseries.csv"), &timeseries_csv(report))?;
    write_file(&dir.join("summary.csv"), &summary_csv([report]))?;
    write_file(&dir.join("obituaries.csv"), &obituaries_csv(&report.obituaries))?;
    write_file(&dir.join("score_histogram.csv"), &score_histogram_csv(&report.obituaries, 10))?;
    Ok(())
}
