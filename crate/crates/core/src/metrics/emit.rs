//! CSV and JSON writers. Column layouts are stable; floating-point values use
//! Rust's shortest round-trip formatting and absent values are empty fields.
//!
//! File names follow `<scenario>.<scheme>.<seed>.<report>.<ext>`, with `all`
//! standing in for aggregated schemes or seeds.

use std::fmt::Display;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CapexSweep, CdfTable, ComparisonRow, SummaryReport};
use crate::engine::RunResult;
use crate::model::QosClass;
use crate::oracle::GapRecord;

pub fn file_name(scenario: &str, scheme: &str, seed: &str, report: &str, ext: &str) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    c
                } else {
                    '_'
                }
            })
            .collect()
    };
    format!(
        "{}.{}.{}.{}.{}",
        clean(scenario),
        clean(scheme),
        clean(seed),
        report,
        ext
    )
}

pub fn output_path(
    dir: &Path,
    scenario: &str,
    scheme: &str,
    seed: &str,
    report: &str,
    ext: &str,
) -> PathBuf {
    dir.join(file_name(scenario, scheme, seed, report, ext))
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_json<T: Serialize>(w: &mut impl Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
    writeln!(w)
}

/// `upf,qos,count,mean_ms,std_ms` (UPFs 1-based).
pub fn write_upf_delay_csv(w: &mut impl Write, s: &SummaryReport) -> io::Result<()> {
    writeln!(w, "upf,qos,count,mean_ms,std_ms")?;
    for (i, per) in s.upf_delay.iter().enumerate() {
        for (q, st) in per.iter() {
            writeln!(w, "{},{},{},{},{}", i + 1, q, st.count, st.mean, st.std)?;
        }
    }
    Ok(())
}

/// `mec,count,mean_ms,std_ms,peak_queue`.
pub fn write_mec_delay_csv(w: &mut impl Write, s: &SummaryReport) -> io::Result<()> {
    writeln!(w, "mec,count,mean_ms,std_ms,peak_queue")?;
    for (j, st) in s.mec_delay.iter().enumerate() {
        let peak = s.peak_mec_queue.get(j).copied().unwrap_or(0);
        writeln!(w, "{},{},{},{},{}", j + 1, st.count, st.mean, st.std, peak)?;
    }
    Ok(())
}

/// `delay_ms,cumulative_probability`.
pub fn write_cdf_csv(w: &mut impl Write, cdf: &CdfTable) -> io::Result<()> {
    writeln!(w, "delay_ms,cumulative_probability")?;
    for (v, p) in cdf.values.iter().zip(&cdf.probabilities) {
        writeln!(w, "{v},{p}")?;
    }
    Ok(())
}

/// One row per epoch with end-of-epoch queue lengths:
/// `epoch,arrivals,admitted,dropped,completed,in_transit,upf<i>_<qos>...,mec<j>...`.
pub fn write_trace_csv(w: &mut impl Write, run: &RunResult) -> io::Result<()> {
    let mut header = String::from("epoch,arrivals,admitted,dropped,completed,in_transit");
    for i in 1..=run.num_upfs {
        for q in QosClass::ALL {
            header.push_str(&format!(",upf{i}_{q}"));
        }
    }
    for j in 1..=run.num_mecs {
        header.push_str(&format!(",mec{j}"));
    }
    writeln!(w, "{header}")?;
    for row in &run.series {
        write!(
            w,
            "{},{},{},{},{},{}",
            row.epoch, row.arrivals, row.admitted, row.dropped, row.completed, row.in_transit
        )?;
        for per in &row.upf_queue {
            for (_, v) in per.iter() {
                write!(w, ",{v}")?;
            }
        }
        for v in &row.mec_queue {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Per-request event log with measured and projected delay components.
pub fn write_requests_csv(w: &mut impl Write, run: &RunResult) -> io::Result<()> {
    writeln!(
        w,
        "id,qos,origin_upf,arrival_epoch,assigned_upf,assigned_mec,status,finish_epoch,\
d_upf,d_net,d_mec,d_e2e,proj_d_upf,proj_d_net,proj_d_mec,proj_d_e2e"
    )?;
    for r in &run.requests {
        let m = r.measured;
        let p = r.projected;
        writeln!(
            w,
            "{},{},{},{},{},{},{:?},{},{},{},{},{},{},{},{},{}",
            r.id,
            r.qos,
            r.origin_upf + 1,
            r.arrival_epoch,
            opt(r.assigned_upf.map(|i| i + 1)),
            opt(r.assigned_mec.map(|j| j + 1)),
            r.status,
            opt(r.finish_epoch),
            m.d_upf,
            m.d_net,
            m.d_mec,
            m.d_e2e,
            p.d_upf,
            p.d_net,
            p.d_mec,
            p.d_e2e
        )?;
    }
    Ok(())
}

pub const COMPARISON_HEADER: &str =
    "scheme,seeds,upf_mean_ms,upf_std_ms,net_mean_ms,mec_mean_ms,mec_std_ms,\
e2e_mean_ms,e2e_p80_ms,e2e_p999_ms,e2e_max_ms,peak_queue,pct_urllc_under_threshold,\
pct_embb_under_threshold,dropped";

pub fn write_comparison_csv(w: &mut impl Write, rows: &[ComparisonRow]) -> io::Result<()> {
    writeln!(w, "{COMPARISON_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.seeds,
            r.upf_mean,
            r.upf_std,
            r.net_mean,
            r.mec_mean,
            r.mec_std,
            r.e2e_mean,
            r.e2e_p80,
            r.e2e_p999,
            r.e2e_max,
            r.peak_queue,
            opt(r.pct_urllc_under_threshold),
            opt(r.pct_embb_under_threshold),
            r.dropped
        )?;
    }
    Ok(())
}

pub const GAP_HEADER: &str = "instance,num_upfs,batch,optimum,heuristic,ratio,same_assignment";

pub fn write_gap_csv(w: &mut impl Write, records: &[GapRecord]) -> io::Result<()> {
    writeln!(w, "{GAP_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.instance, r.num_upfs, r.batch, r.optimum, r.heuristic, r.ratio, r.same_assignment
        )?;
    }
    Ok(())
}

/// `num_pairs,scheme,seeds,<qos>_pct...,<qos>_completed...,<qos>_dropped...`.
pub fn write_capex_points_csv(w: &mut impl Write, sweep: &CapexSweep) -> io::Result<()> {
    write!(w, "num_pairs,scheme,seeds")?;
    for suffix in ["pct", "completed", "dropped"] {
        for q in QosClass::ALL {
            write!(w, ",{q}_{suffix}")?;
        }
    }
    writeln!(w)?;
    for p in &sweep.points {
        write!(w, "{},{},{}", p.num_pairs, p.scheme, p.seeds)?;
        for (_, v) in p.pct_under_threshold.iter() {
            write!(w, ",{}", opt(*v))?;
        }
        for (_, v) in p.completed.iter() {
            write!(w, ",{v}")?;
        }
        for (_, v) in p.dropped.iter() {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_capex_rows_csv(w: &mut impl Write, sweep: &CapexSweep) -> io::Result<()> {
    writeln!(
        w,
        "num_pairs,qos,baseline_pct,mecia_pct,connectivity_gain,matching_pairs,capex_savings"
    )?;
    for r in &sweep.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.num_pairs,
            r.qos,
            r.baseline_pct,
            r.mecia_pct,
            opt(r.connectivity_gain),
            opt(r.matching_pairs),
            opt(r.capex_savings)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::build_cdf;

    #[test]
    fn file_names_are_sanitized() {
        assert_eq!(
            file_name("table1", "baseline", "7", "summary", "json"),
            "table1.baseline.7.summary.json"
        );
        assert_eq!(
            file_name("a b/c", "x", "all", "cdf", "csv"),
            "a_b_c.x.all.cdf.csv"
        );
    }

    #[test]
    fn cdf_csv_layout() {
        let mut buf = Vec::new();
        write_cdf_csv(&mut buf, &build_cdf(&[1.0, 1.0, 3.0])).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "delay_ms,cumulative_probability\n1,0.6666666666666666\n3,1\n"
        );
    }

    #[test]
    fn empty_gap_csv_has_header() {
        let mut buf = Vec::new();
        write_gap_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{GAP_HEADER}\n"));
    }
}
