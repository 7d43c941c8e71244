use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Display multiplier for chamfer distances in tables.
pub const CD_DISPLAY_SCALE: f64 = 1e5;

/// Scores for one prediction / ground-truth pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub sample_id: String,
    /// Absent when either sketch was empty.
    pub cd: Option<f64>,
    #[serde(with = "inf_as_string")]
    pub psnr: f64,
    pub ssim: f64,
    #[serde(default)]
    pub tags: Vec<String>,
    /// Why a metric is missing, if one is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

/// Means over one group of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    /// Tag name, or `"all"`.
    pub group: String,
    pub count: usize,
    pub mean_cd: Option<f64>,
    /// Rows contributing to `mean_cd`.
    pub cd_count: usize,
    pub mean_psnr: Option<f64>,
    /// Rows with infinite PSNR, left out of `mean_psnr`.
    pub inf_psnr_count: usize,
    pub mean_ssim: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Rows sorted by `sample_id`.
    pub rows: Vec<MetricRow>,
    /// `"all"` first, then tags in lexical order.
    pub aggregates: Vec<AggregateRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> (Option<f64>, usize) {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        (None, 0)
    } else {
        (Some(sum / n as f64), n)
    }
}

fn summarize(group: &str, rows: &[&MetricRow]) -> AggregateRow {
    let (mean_cd, cd_count) = mean(rows.iter().filter_map(|r| r.cd));
    let (mean_psnr, _) = mean(rows.iter().map(|r| r.psnr).filter(|p| p.is_finite()));
    let (mean_ssim, _) = mean(rows.iter().map(|r| r.ssim));
    AggregateRow {
        group: group.to_string(),
        count: rows.len(),
        mean_cd,
        cd_count,
        mean_psnr,
        inf_psnr_count: rows.iter().filter(|r| r.psnr.is_infinite()).count(),
        mean_ssim,
    }
}

/// Overall and per-tag means. Row order does not affect the result.
pub fn aggregate(rows: &[MetricRow]) -> MetricReport {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    let mut by_tag: BTreeMap<&str, Vec<&MetricRow>> = BTreeMap::new();
    for r in &rows {
        for t in &r.tags {
            by_tag.entry(t.as_str()).or_default().push(r);
        }
    }
    let all: Vec<&MetricRow> = rows.iter().collect();
    let mut aggregates = vec![summarize("all", &all)];
    aggregates.extend(by_tag.iter().map(|(t, members)| summarize(t, members)));
    MetricReport { rows, aggregates }
}

/// Attaches tags from `sample_id -> tags` to each row.
pub fn apply_tags(rows: &mut [MetricRow], tags: &BTreeMap<String, Vec<String>>) {
    for r in rows {
        if let Some(t) = tags.get(&r.sample_id) {
            for tag in t {
                if !r.tags.contains(tag) {
                    r.tags.push(tag.clone());
                }
            }
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line<'a> {
    Row(&'a MetricRow),
    Aggregate(&'a AggregateRow),
}

fn fmt_opt(v: Option<f64>, scale: f64, prec: usize) -> String {
    match v {
        Some(v) => format!("{:.*}", prec, v * scale),
        None => "-".to_string(),
    }
}

impl MetricReport {
    /// One JSON object per line: every row, then every aggregate.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(&Line::Row(r)).expect("rows serialize"));
            out.push('\n');
        }
        for a in &self.aggregates {
            out.push_str(
                &serde_json::to_string(&Line::Aggregate(a)).expect("aggregates serialize"),
            );
            out.push('\n');
        }
        out
    }

    /// Aligned text table; CD is shown multiplied by [`CD_DISPLAY_SCALE`].
    pub fn to_table(&self) -> String {
        let mut lines = vec![[
            "sample".to_string(),
            "CD(x1e5)".to_string(),
            "PSNR".to_string(),
            "SSIM".to_string(),
            "tags".to_string(),
        ]];
        for r in &self.rows {
            let psnr = if r.psnr.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.3}", r.psnr)
            };
            lines.push([
                r.sample_id.clone(),
                fmt_opt(r.cd, CD_DISPLAY_SCALE, 3),
                psnr,
                format!("{:.4}", r.ssim),
                r.tags.join(","),
            ]);
        }
        let mut summary = vec![[
            "group".to_string(),
            "n".to_string(),
            "CD(x1e5)".to_string(),
            "PSNR".to_string(),
            "SSIM".to_string(),
        ]];
        for a in &self.aggregates {
            summary.push([
                a.group.clone(),
                a.count.to_string(),
                fmt_opt(a.mean_cd, CD_DISPLAY_SCALE, 3),
                fmt_opt(a.mean_psnr, 1.0, 3),
                fmt_opt(a.mean_ssim, 1.0, 4),
            ]);
        }
        let mut out = String::new();
        render(&mut out, &lines);
        out.push('\n');
        render(&mut out, &summary);
        out
    }
}

fn render(out: &mut String, table: &[[String; 5]]) {
    let mut widths = [0usize; 5];
    for row in table {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    for row in table {
        let mut line = String::new();
        for (i, (cell, w)) in row.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(line, "{cell:<w$}");
            } else {
                let _ = write!(line, "  {cell:>w$}");
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

mod inf_as_string {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!(
                "expected number or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, cd: Option<f64>, psnr: f64, ssim: f64, tags: &[&str]) -> MetricRow {
        MetricRow {
            sample_id: id.into(),
            cd,
            psnr,
            ssim,
            tags: tags.iter().map(|t| t.to_string()).collect(),
            flag: None,
        }
    }

    #[test]
    fn single_row() {
        let r = row("a", Some(4e-5), 30.0, 0.9, &[]);
        let rep = aggregate(std::slice::from_ref(&r));
        let all = &rep.aggregates[0];
        assert_eq!(all.mean_cd, Some(4e-5));
        assert_eq!(all.mean_psnr, Some(30.0));
        assert_eq!(all.mean_ssim, Some(0.9));
        assert_eq!(all.count, 1);
    }

    #[test]
    fn cd_mean_and_display() {
        let rows = [
            row("a", Some(2e-5), 30.0, 0.9, &[]),
            row("b", Some(4e-5), 30.0, 0.9, &[]),
        ];
        let rep = aggregate(&rows);
        assert!((rep.aggregates[0].mean_cd.unwrap() - 3e-5).abs() < 1e-18);
        let table = rep.to_table();
        assert!(
            table
                .lines()
                .any(|l| l.starts_with("all") && l.contains("3.000")),
            "{table}"
        );
    }

    #[test]
    fn infinite_psnr_is_counted_separately() {
        let rows = [
            row("a", Some(1e-5), f64::INFINITY, 1.0, &[]),
            row("b", Some(3e-5), 24.0, 0.8, &[]),
        ];
        let all = &aggregate(&rows).aggregates[0];
        assert_eq!(all.mean_psnr, Some(24.0));
        assert_eq!(all.inf_psnr_count, 1);
        assert!(aggregate(&rows).to_jsonl().contains("\"psnr\":\"inf\""));
    }

    #[test]
    fn tag_partition_weighted_mean() {
        let rows = [
            row("a", Some(1e-5), 28.0, 0.91, &["eastern"]),
            row("b", Some(5e-5), 29.5, 0.95, &["eastern"]),
            row("c", Some(2e-5), 31.0, 0.93, &["western"]),
            row("d", None, 27.0, 0.90, &["western"]),
            row("e", Some(7e-5), 30.0, 0.97, &["western"]),
        ];
        let rep = aggregate(&rows);
        let get = |g: &str| rep.aggregates.iter().find(|a| a.group == g).unwrap();
        let (all, e, w) = (get("all"), get("eastern"), get("western"));
        let weighted = |f: fn(&AggregateRow) -> (Option<f64>, usize)| {
            let (a, na) = f(e);
            let (b, nb) = f(w);
            (a.unwrap() * na as f64 + b.unwrap() * nb as f64) / (na + nb) as f64
        };
        assert!((all.mean_cd.unwrap() - weighted(|a| (a.mean_cd, a.cd_count))).abs() < 1e-9);
        assert!((all.mean_psnr.unwrap() - weighted(|a| (a.mean_psnr, a.count))).abs() < 1e-9);
        assert!((all.mean_ssim.unwrap() - weighted(|a| (a.mean_ssim, a.count))).abs() < 1e-9);
    }

    #[test]
    fn permutation_invariant() {
        let rows = vec![
            row("x", Some(3e-5), 22.0, 0.7, &["t"]),
            row("y", Some(1e-5), 35.0, 0.99, &["t", "u"]),
            row("z", None, f64::INFINITY, 1.0, &["u"]),
        ];
        let mut rev = rows.clone();
        rev.reverse();
        assert_eq!(aggregate(&rows), aggregate(&rev));
    }

    #[test]
    fn row_json_round_trip() {
        let r = row("s", None, f64::INFINITY, 0.5, &["a"]);
        let text = serde_json::to_string(&r).unwrap();
        let back: MetricRow = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
