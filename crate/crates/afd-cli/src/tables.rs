//! Comma-separated output tables. Numbers carry 17 significant digits so
//! identical runs diff byte-for-byte and values round-trip exactly.

use afd_core::diagnose::EvaluationReport;
use afd_core::inputdesign::{CandidatePhase, DesignRecord};
use afd_core::schedule::InputSchedule;
use std::fmt::Write as _;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn schedule_csv(schedule: &InputSchedule) -> String {
    let dim = schedule.input_dim();
    let mut out = String::from("t_start");
    for i in 0..dim {
        write!(out, ",u{}", i + 1).unwrap();
    }
    out.push('\n');
    for (t, u) in schedule.breakpoints().iter().zip(schedule.values()) {
        out.push_str(&fmt_f64(*t));
        for v in u {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses a schedule back from its CSV form.
pub fn schedule_from_csv(text: &str) -> Result<InputSchedule, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("schedule file is empty")?;
    if !header.starts_with("t_start") {
        return Err("schedule file must start with a `t_start,u1,...` header".into());
    }
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let t: f64 = fields
            .next()
            .ok_or_else(|| format!("line {}: missing t_start", ln + 2))?
            .trim()
            .parse()
            .map_err(|e| format!("line {}: bad t_start: {e}", ln + 2))?;
        let u: Vec<f64> = fields
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("line {}: bad input value: {e}", ln + 2))?;
        breakpoints.push(t);
        values.push(u);
    }
    InputSchedule::new(breakpoints, values).map_err(|e| e.to_string())
}

pub fn design_ledger_csv(record: &DesignRecord) -> String {
    let mut out = String::from("interval,t0,t1,phase,candidate,feasible,chosen,worst_case_area");
    let dim = record
        .intervals
        .first()
        .map(|r| r.chosen_input.len())
        .unwrap_or(0);
    let mut header_inputs = String::new();
    for i in 0..dim {
        write!(header_inputs, ",u{}", i + 1).unwrap();
    }
    out.push_str(&header_inputs);
    out.push('\n');
    for rec in &record.intervals {
        for (c_idx, c) in rec.candidates.iter().enumerate() {
            let phase = match c.phase {
                CandidatePhase::Grid => "grid",
                CandidatePhase::Refine => "refine",
            };
            let chosen = c.input == rec.chosen_input;
            write!(
                out,
                "{},{},{},{},{},{},{},{}",
                rec.index,
                fmt_f64(rec.t0),
                fmt_f64(rec.t1),
                phase,
                c_idx,
                c.feasible,
                chosen,
                fmt_f64(c.area)
            )
            .unwrap();
            for v in &c.input {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
    }
    out
}

pub fn fitted_pdfs_csv(record: &DesignRecord) -> String {
    let mut out = String::from("interval,t_end,model,family,mu,sigma\n");
    for rec in &record.intervals {
        for (m, pdf) in rec.nominal_pdfs.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                rec.index,
                fmt_f64(rec.t1),
                m,
                pdf.family,
                fmt_f64(pdf.mu),
                fmt_f64(pdf.sigma)
            )
            .unwrap();
        }
    }
    out
}

pub fn roi_csv(record: &DesignRecord) -> String {
    let mut out =
        String::from("interval,model,radius,mu_lo,mu_hi,sigma_lo,sigma_hi,corners_feasible\n");
    for rec in &record.intervals {
        for roi in &rec.rois {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                rec.index,
                roi.model_index,
                fmt_f64(roi.radius),
                fmt_f64(roi.mu_interval.0),
                fmt_f64(roi.mu_interval.1),
                fmt_f64(roi.sigma_interval.0),
                fmt_f64(roi.sigma_interval.1),
                roi.corners_feasible
            )
            .unwrap();
        }
    }
    out
}

pub fn worst_case_csv(record: &DesignRecord) -> String {
    let mut out = String::from(
        "interval,model,mu_star,sigma_star,lambda_mu,s_mu,lambda_sigma,s_sigma,objective,kkt_residual,certified\n",
    );
    for rec in &record.intervals {
        let wc = &rec.worst_case;
        for (m, (mu, sigma)) in wc.moments.iter().enumerate() {
            let k = &wc.multipliers[m];
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                rec.index,
                m,
                fmt_f64(*mu),
                fmt_f64(*sigma),
                fmt_f64(k.lambda_mu),
                fmt_f64(k.s_mu),
                fmt_f64(k.lambda_sigma),
                fmt_f64(k.s_sigma),
                fmt_f64(wc.objective),
                fmt_f64(wc.kkt_residual),
                wc.certified
            )
            .unwrap();
        }
    }
    out
}

pub fn evaluation_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("t");
    for (i, j) in &report.pair_indices {
        write!(out, ",area_{i}_{j}").unwrap();
    }
    out.push_str(",total_area,observation,decision");
    for m in 0..report.likelihoods[0].len() {
        write!(out, ",likelihood_{m}").unwrap();
    }
    out.push('\n');
    for (k, &t) in report.times.iter().enumerate() {
        out.push_str(&fmt_f64(t));
        for a in &report.pair_areas[k] {
            out.push(',');
            out.push_str(&fmt_f64(*a));
        }
        out.push(',');
        out.push_str(&fmt_f64(report.total_areas[k]));
        out.push(',');
        out.push_str(&fmt_f64(report.observations[k]));
        write!(out, ",{}", report.decisions[k]).unwrap();
        for l in &report.likelihoods[k] {
            out.push(',');
            out.push_str(&fmt_f64(*l));
        }
        out.push('\n');
    }
    out
}

pub fn eval_pdfs_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("t,model,family,mu,sigma\n");
    for (k, &t) in report.times.iter().enumerate() {
        for (m, pdf) in report.pdfs[k].iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(t),
                m,
                pdf.family,
                fmt_f64(pdf.mu),
                fmt_f64(pdf.sigma)
            )
            .unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_csv_round_trips_exactly() {
        let s = InputSchedule::new(
            vec![0.0, 100.0, 200.0],
            vec![
                vec![1e-4, 0.0],
                vec![0.3333333333333333, 1.0 / 7.0],
                vec![f64::MIN_POSITIVE, 0.75],
            ],
        )
        .unwrap();
        let text = schedule_csv(&s);
        let back = schedule_from_csv(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn schedule_csv_rejects_garbage() {
        assert!(schedule_from_csv("").is_err());
        assert!(schedule_from_csv("nope\n1,2\n").is_err());
        assert!(schedule_from_csv("t_start,u1\nx,2\n").is_err());
    }
}
