use std::fmt::Write;

use super::{CvReport, EvalReport, Evaluation, TimingReport, TransferTable};

/// Four decimal places, ties rounded to even on the exact binary value.
pub fn fmt4(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    // 1100 digits always hold the full expansion of an f64
    let exact = format!("{:.1100}", x.abs());
    let (int, frac) = exact.split_once('.').expect("fixed-point output has a dot");
    let (keep, rest) = frac.split_at(4);
    let first = rest.as_bytes()[0];
    let tail_nonzero = rest[1..].bytes().any(|b| b != b'0');
    let last_odd = (keep.as_bytes()[3] - b'0') % 2 == 1;
    let round_up = first > b'5' || (first == b'5' && (tail_nonzero || last_odd));

    let mut digits: Vec<u8> = int.bytes().chain(keep.bytes()).collect();
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 4;
    let body = format!(
        "{}.{}",
        std::str::from_utf8(&digits[..split]).expect("ascii"),
        std::str::from_utf8(&digits[split..]).expect("ascii")
    );
    if x.is_sign_negative() && digits.iter().any(|&d| d != b'0') {
        format!("-{body}")
    } else {
        body
    }
}

/// Aligned table: first column left-aligned, the rest right-aligned.
fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let cols = headers.len();
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (c, cell) in row.iter().enumerate() {
            width[c] = width[c].max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (c, cell) in cells.iter().enumerate() {
            let pad = width[c] - cell.chars().count();
            if c == 0 {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    let rule: usize = width.iter().sum::<usize>() + 2 * (cols - 1);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

/// Per-class table plus macro/weighted summary lines.
pub fn render_report(title: &str, report: &EvalReport) -> String {
    let rows: Vec<Vec<String>> = report
        .per_class
        .iter()
        .filter(|c| c.support > 0 || c.precision > 0.0)
        .map(|c| {
            vec![
                c.label.clone(),
                fmt4(c.precision),
                fmt4(c.recall),
                fmt4(c.f1),
                c.support.to_string(),
            ]
        })
        .collect();
    let mut out = format!("{title}\n");
    out.push_str(&table(&["label", "precision", "recall", "F", "support"], &rows));
    let _ = writeln!(out, "macro F     {}", fmt4(report.macro_f));
    let _ = writeln!(out, "weighted F  {}", fmt4(report.weighted_f));
    let _ = writeln!(out, "accuracy    {}", fmt4(report.accuracy));
    let _ = writeln!(out, "utterances  {}", report.count);
    out
}

pub fn render_evaluation(e: &Evaluation) -> String {
    let mut out = render_report("Categories", &e.category);
    out.push('\n');
    out.push_str(&render_report("Dialogue acts", &e.act));
    let _ = writeln!(out, "\nincoherence rate  {}", fmt4(e.incoherence_rate));
    out
}

pub fn render_cv(r: &CvReport) -> String {
    let mut out = format!(
        "{}-fold cross-validation ({}, seed {}, data {})\n",
        r.k,
        r.structure.report_name(),
        r.seed,
        r.dataset_fingerprint
    );
    let rows: Vec<Vec<String>> = r
        .folds
        .iter()
        .map(|f| {
            vec![
                f.fold.to_string(),
                f.train_dialogues.to_string(),
                f.held_out.len().to_string(),
                f.evaluation.count.to_string(),
                fmt4(f.evaluation.category.macro_f),
                fmt4(f.evaluation.act.macro_f),
            ]
        })
        .collect();
    out.push_str(&table(
        &["fold", "train", "test", "utterances", "category F", "act F"],
        &rows,
    ));
    out.push_str("\nPooled\n");
    out.push_str(&render_evaluation(&r.pooled));
    out
}

/// Train domains as rows, test domains as columns.
pub fn render_transfer(t: &TransferTable) -> String {
    let mut headers = vec!["train \\ test"];
    headers.extend(t.domains.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = t
        .domains
        .iter()
        .zip(&t.macro_f)
        .map(|(name, row)| {
            let mut cells = vec![name.clone()];
            cells.extend(row.iter().map(|v| v.map_or_else(|| "--".to_string(), fmt4)));
            cells
        })
        .collect();
    let mut out = String::from("Macro F (dialogue acts)\n");
    out.push_str(&table(&headers, &rows));
    out
}

pub fn render_timings(reports: &[TimingReport]) -> String {
    let mut headers = vec![""];
    headers.extend(reports.iter().map(|r| r.name.as_str()));
    let mut seconds = vec!["training seconds".to_string()];
    seconds.extend(reports.iter().map(|r| fmt4(r.train_seconds)));
    let mut models = vec!["binary SVMs".to_string()];
    models.extend(reports.iter().map(|r| r.binary_models.to_string()));
    let mut out = table(&headers, &[seconds, models]);
    let find = |name: &str| reports.iter().find(|r| r.name == name);
    if let (Some(ovo), Some(bin)) = (find("HierOvO"), find("HierBinary")) {
        if bin.train_seconds > 0.0 {
            let _ = writeln!(out, "HierOvO / HierBinary  {}", fmt4(ovo.train_seconds / bin.train_seconds));
        }
    }
    if let Some(r) = reports.first() {
        let _ = writeln!(out, "data  {}", r.dataset_fingerprint);
    }
    out
}
