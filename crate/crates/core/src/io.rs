//! File formats: sweep CSV, analytic curves, calibration table, verdict
//! document and a minimal SVG line plot.
//!
//! Every file starts with `#` provenance lines. Floats are written in the
//! shortest representation that round-trips, so identical results give
//! identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use thiserror::Error;

use crate::classify::{Calibration, LabeledCurve, VerdictReport};
use crate::config::RunConfig;
use crate::model::field_ratio;
use crate::spectrum::SweepResult;

pub const SWEEP_HEADER: [&str; 9] = [
    "phi_rad",
    "eta",
    "b_over_bc",
    "delta_e_mev",
    "delta_e_over_delta0",
    "eps1_mev",
    "eps2_mev",
    "eps3_mev",
    "eps4_mev",
];
pub const CURVE_HEADER: [&str; 4] = ["phi_rad", "e_minus_mev", "e_plus_mev", "delta_e_mev"];
pub const CALIBRATION_HEADER: [&str; 3] = ["eta", "transmission", "rms_residual_mev"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected CSV header '{found}'; expected '{}'", SWEEP_HEADER.join(","))]
    Header { found: String },
    #[error("record {record}: {message}")]
    Record { record: usize, message: String },
}

/// `#` lines identifying the tool, command and full configuration.
pub fn provenance(command: &str, config: &RunConfig, timestamp: Option<u64>) -> Vec<String> {
    let mut lines = vec![
        format!("# mjspec {}", env!("CARGO_PKG_VERSION")),
        format!("# command = {command}"),
    ];
    // where the files go is not part of what they contain
    lines.extend(
        config
            .entries()
            .into_iter()
            .filter(|(k, _)| *k != "output_dir")
            .map(|(k, v)| format!("# {k} = {v}")),
    );
    if let Some(t) = timestamp {
        lines.push(format!("# timestamp = {t}"));
    }
    lines
}

fn write_preamble<W: Write>(w: &mut W, provenance: &[String]) -> std::io::Result<()> {
    for line in provenance {
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Writes one row per node, ordered by (b, eta, phi).
pub fn write_sweep_csv<W: Write>(mut w: W, result: &SweepResult, provenance: &[String]) -> Result<(), IoError> {
    write_preamble(&mut w, provenance)?;
    let params = &result.provenance.params;
    let bc = params.critical_field();
    let mut order: Vec<usize> = (0..result.points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&result.points[i], &result.points[j]);
        a.zeeman_b
            .total_cmp(&b.zeeman_b)
            .then(a.eta.total_cmp(&b.eta))
            .then(a.phi.total_cmp(&b.phi))
    });
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for i in order {
        let p = &result.points[i];
        let mut row = vec![
            p.phi.to_string(),
            p.eta.to_string(),
            field_ratio(p.zeeman_b, bc).to_string(),
            p.delta_e.to_string(),
            (p.delta_e / params.delta0).to_string(),
        ];
        row.extend((0..4).map(|k| p.quasiparticle_energies.get(k).map(f64::to_string).unwrap_or_default()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn field(rec: &csv::StringRecord, idx: usize, record: usize) -> Result<f64, IoError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.trim().parse::<f64>().map_err(|_| IoError::Record {
        record,
        message: format!("column {} is not a number: '{raw}'", SWEEP_HEADER[idx]),
    })
}

/// Reads a sweep CSV back into one curve per (b, eta), in file order.
pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<LabeledCurve>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(IoError::Header {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut curves: Vec<LabeledCurve> = Vec::new();
    let mut index: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let record = i + 1;
        let (phi, eta, b, de) = (
            field(&rec, 0, record)?,
            field(&rec, 1, record)?,
            field(&rec, 2, record)?,
            field(&rec, 3, record)?,
        );
        let slot = *index.entry((b.to_bits(), eta.to_bits())).or_insert_with(|| {
            curves.push(LabeledCurve {
                b_over_bc: b,
                eta,
                curve: Vec::new(),
            });
            curves.len() - 1
        });
        curves[slot].curve.push((phi, de));
    }
    Ok(curves)
}

/// Curve file of an analytic model: `E₋`, `E₊` and their span.
pub fn write_curve_csv<W: Write>(mut w: W, points: &[(f64, f64, f64)], provenance: &[String]) -> Result<(), IoError> {
    write_preamble(&mut w, provenance)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CURVE_HEADER)?;
    for &(phi, lo, hi) in points {
        out.write_record([phi.to_string(), lo.to_string(), hi.to_string(), (hi - lo).to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_calibration<W: Write>(mut w: W, cal: &Calibration, provenance: &[String]) -> Result<(), IoError> {
    write_preamble(&mut w, provenance)?;
    for warning in &cal.warnings {
        writeln!(w, "# warning: {warning}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CALIBRATION_HEADER)?;
    for e in &cal.entries {
        out.write_record([e.eta.to_string(), e.transmission.to_string(), e.rms_residual.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Key-value verdict document, one classification per line.
pub fn verdict_document(report: &VerdictReport, provenance: &[String]) -> String {
    let mut s = String::new();
    for line in provenance {
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s, "verdict = {}", report.verdict);
    let _ = writeln!(s, "s_topo = {}", report.thresholds.s_topo);
    let _ = writeln!(s, "s_triv = {}", report.thresholds.s_triv);
    for (b, sens) in report.sensitivities() {
        let _ = writeln!(s, "sensitivity b_over_bc={b} value={sens}");
    }
    for c in &report.nodes {
        let _ = writeln!(
            s,
            "node b_over_bc={} eta={} extremum={} phase={} delta_e_at_pi_mev={} sensitivity={}",
            c.b_over_bc, c.eta, c.extremum_label, c.phase_label, c.delta_e_at_pi, c.sensitivity
        );
    }
    s
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#ff7f0e", "#9467bd", "#2ca02c", "#17becf"];

/// Self-contained SVG line plot over fixed axes `x_range` × `y_range`.
pub fn line_plot_svg(
    title: &str,
    series: &[(String, Vec<(f64, f64)>)],
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let sx = |x: f64| m + (x - x_range.0) / (x_range.1 - x_range.0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y_range.0) / (y_range.1 - y_range.0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{title}</text>"#, w / 2.0, m / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{m}" y="{}">{:.3}</text><text x="{}" y="{}" text-anchor="end">{:.3}</text>"#,
        h - m + 16.0,
        x_range.0,
        w - m,
        h - m + 16.0,
        x_range.1
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text><text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
        m - 4.0,
        h - m,
        y_range.0,
        m - 4.0,
        m + 10.0,
        y_range.1
    );
    for (i, (label, pts)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = m + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{colour}" text-anchor="end">{label}</text>"#,
            w - m - 6.0
        );
    }
    s.push_str("</svg>\n");
    s
}
