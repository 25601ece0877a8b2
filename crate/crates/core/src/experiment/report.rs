use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::model::WorkloadKind;

use super::{Cell, ExperimentError, Method, Metric, Output, Problem, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format {other:?} (expected csv or text)")),
        }
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "problem",
    "kind",
    "R_or_B",
    "p",
    "X",
    "method",
    "metric",
    "mean",
    "n",
    "timeout_flag",
];

pub fn render_csv(table: &ResultTable) -> Result<String, ExperimentError> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(CSV_HEADER)?;
    for row in &table.rows {
        out.write_record([
            table.problem.as_str().to_owned(),
            table.kind.as_str().to_owned(),
            row.cell.limit.to_string(),
            row.cell.cores.to_string(),
            row.cell.pool_factor.map(|x| x.to_string()).unwrap_or_default(),
            row.method.as_str().to_owned(),
            row.metric.as_str().to_owned(),
            format!("{:.2}", row.mean),
            row.n.to_string(),
            row.timeout.to_string(),
        ])?;
    }
    let bytes = out.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Integers print bare, everything else with two decimals.
fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn cell_text(table: &ResultTable, cell: Cell, method: Method) -> Option<String> {
    let value = |m| table.get(cell, method, m);
    let (first, second, suffix) = match (table.problem, method) {
        (Problem::Pbc, Method::UpperBound) => (value(Metric::Reward)?, None, ""),
        (Problem::Pbc, _) => (value(Metric::Reward)?, value(Metric::PercentOfBound), "%"),
        (Problem::Obs, _) => {
            let primary = match table.kind {
                WorkloadKind::Homogeneous => Metric::Rounds,
                WorkloadKind::Heterogeneous => Metric::Makespan,
            };
            (value(primary)?, value(Metric::Speedup), "")
        }
    };
    let mut s = num(first.mean);
    if let Some(second) = second {
        write!(s, "/{}{suffix}", num(second.mean)).unwrap();
    }
    if first.timeout {
        s.push('*');
    }
    Some(s)
}

/// One matrix per method and pool factor: rows are limits, columns core
/// counts, cells `value/speedup` (blocks) or `reward/percent` (pools).
pub fn render_text(table: &ResultTable) -> String {
    let limit_name = match table.kind {
        WorkloadKind::Homogeneous => "R",
        WorkloadKind::Heterogeneous => "B",
    };
    let cells: BTreeSet<Cell> = table.rows.iter().map(|r| r.cell).collect();
    let methods: BTreeSet<Method> = table.rows.iter().map(|r| r.method).collect();
    let factors: BTreeSet<Option<u64>> = cells.iter().map(|c| c.pool_factor).collect();
    let limits: BTreeSet<u64> = cells.iter().map(|c| c.limit).collect();
    let cores: BTreeSet<usize> = cells.iter().map(|c| c.cores).collect();

    let mut out = String::new();
    writeln!(out, "{} {}", table.problem.as_str().to_uppercase(), table.kind.as_str()).unwrap();
    for &method in &methods {
        for &factor in &factors {
            out.push('\n');
            match factor {
                Some(x) => writeln!(out, "{} (X={x})", method.as_str()).unwrap(),
                None => writeln!(out, "{}", method.as_str()).unwrap(),
            }
            let mut grid = vec![std::iter::once(limit_name.to_owned())
                .chain(cores.iter().map(|p| format!("p={p}")))
                .collect::<Vec<_>>()];
            for &limit in &limits {
                let mut line = vec![limit.to_string()];
                for &p in &cores {
                    let cell = Cell { limit, cores: p, pool_factor: factor };
                    line.push(cell_text(table, cell, method).unwrap_or_else(|| "-".to_owned()));
                }
                grid.push(line);
            }
            let widths: Vec<usize> = (0..grid[0].len())
                .map(|c| grid.iter().map(|l| l[c].len()).max().unwrap_or(0))
                .collect();
            for line in grid {
                let padded: Vec<String> = line
                    .iter()
                    .zip(&widths)
                    .map(|(s, &w)| format!("{s:>w$}"))
                    .collect();
                writeln!(out, "{}", padded.join("  ").trim_end()).unwrap();
            }
        }
    }
    if table.rows.iter().any(|r| r.timeout) {
        writeln!(out, "\n* exact search hit the time limit; the incumbent is shown").unwrap();
    }
    if !table.skipped.is_empty() {
        writeln!(out, "\nskipped:").unwrap();
        for s in &table.skipped {
            let x = s.cell.pool_factor.map(|x| format!(" X={x}")).unwrap_or_default();
            writeln!(
                out,
                "  {} {limit_name}={} p={}{x}: {}",
                s.method.as_str(),
                s.cell.limit,
                s.cell.cores,
                s.reason
            )
            .unwrap();
        }
    }
    out
}

pub fn render(table: &ResultTable, format: Format) -> Result<String, ExperimentError> {
    match format {
        Format::Csv => render_csv(table),
        Format::Text => Ok(render_text(table)),
    }
}

/// Writes whichever outputs the config names.
pub fn write_outputs(table: &ResultTable, output: &Output) -> Result<(), ExperimentError> {
    let targets = [(&output.csv, Format::Csv), (&output.text, Format::Text)];
    for (path, format) in targets {
        if let Some(path) = path {
            write_file(path, &render(table, format)?)?;
        }
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{Row, Skipped};

    fn row(limit: u64, cores: usize, metric: Metric, mean: f64) -> Row {
        Row {
            cell: Cell { limit, cores, pool_factor: None },
            method: Method::Gh,
            metric,
            mean,
            n: 5,
            timeout: false,
        }
    }

    fn table(rows: Vec<Row>) -> ResultTable {
        ResultTable {
            problem: Problem::Obs,
            kind: WorkloadKind::Homogeneous,
            rows,
            skipped: vec![],
        }
    }

    #[test]
    fn one_row_csv() {
        let csv = render_csv(&table(vec![row(10, 2, Metric::Rounds, 10.0)])).unwrap();
        assert_eq!(
            csv,
            "problem,kind,R_or_B,p,X,method,metric,mean,n,timeout_flag\n\
             obs,homogeneous,10,2,,gh,rounds,10.00,5,false\n"
        );
    }

    #[test]
    fn three_by_three_matrix() {
        let mut rows = Vec::new();
        for r in [10, 30, 100] {
            for p in [2, 4, 8] {
                rows.push(row(r, p, Metric::Rounds, r as f64));
                rows.push(row(r, p, Metric::Speedup, p as f64));
            }
        }
        let text = render_text(&table(rows));
        let expected = "\
OBS homogeneous

gh
  R    p=2    p=4    p=8
 10   10/2   10/4   10/8
 30   30/2   30/4   30/8
100  100/2  100/4  100/8
";
        assert_eq!(text, expected);
    }

    #[test]
    fn timeouts_and_skips_are_marked() {
        let mut t = table(vec![
            Row { timeout: true, ..row(3, 2, Metric::Rounds, 3.5) },
            row(3, 2, Metric::Speedup, 1.25),
        ]);
        t.skipped.push(Skipped {
            cell: Cell { limit: 3, cores: 2, pool_factor: None },
            method: Method::Exact,
            reason: "too big".into(),
        });
        let text = render_text(&t);
        assert!(text.contains("3.50/1.25*"), "{text}");
        assert!(text.contains("exact R=3 p=2: too big"), "{text}");
    }

    #[test]
    fn outputs_land_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let output = Output {
            csv: Some(dir.path().join("a/out.csv")),
            text: Some(dir.path().join("out.txt")),
        };
        let t = table(vec![row(10, 2, Metric::Rounds, 10.0)]);
        write_outputs(&t, &output).unwrap();
        let first = fs::read(dir.path().join("a/out.csv")).unwrap();
        write_outputs(&t, &output).unwrap();
        assert_eq!(first, fs::read(dir.path().join("a/out.csv")).unwrap());
        assert!(dir.path().join("out.txt").exists());
        assert_eq!("csv".parse::<Format>(), Ok(Format::Csv));
        assert!("xml".parse::<Format>().is_err());
    }
}
