use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use truncspec::eig::Spectrum;
use truncspec::verify::{BranchFit, SweepReport};

use crate::config::Format;
use crate::CliError;

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Output directory plus the formats to emit.
pub struct Sink {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Sink {
    pub fn new(dir: PathBuf, formats: Vec<Format>) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
        Ok(Sink { dir, formats })
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf, CliError> {
        let dir = self.dir.join(name);
        fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
        Ok(dir)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        Ok(path)
    }

    pub fn text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        Ok(path)
    }
}

pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    writer.write_record(header).map_err(|e| io(path, e))?;
    for row in rows {
        writer.write_record(row).map_err(|e| io(path, e))?;
    }
    writer.flush().map_err(|e| io(path, e))
}

pub fn rows_to_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory write")).expect("csv is utf-8")
}

pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        v.to_string()
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub const SPECTRUM_HEADER: [&str; 10] =
    ["parameter", "re_lambda", "im_lambda", "re_fine", "im_fine", "re_coarse", "im_coarse", "residual", "condition", "trusted"];

pub fn spectrum_rows(parameter: f64, spectrum: &Spectrum, trusted_only: bool) -> Vec<Vec<String>> {
    spectrum
        .entries
        .iter()
        .filter(|e| e.trusted || !trusted_only)
        .map(|e| {
            vec![
                num(parameter),
                num(e.lambda_re.re),
                num(e.lambda_re.im),
                num(e.lambda.re),
                num(e.lambda.im),
                num(e.lambda_coarse.re),
                num(e.lambda_coarse.im),
                num(e.residual),
                num(e.condition),
                e.trusted.to_string(),
            ]
        })
        .collect()
}

pub const FIT_HEADER: [&str; 7] = ["branch", "k", "slope", "intercept", "r2", "points", "predicted_exponent"];

pub fn fit_rows(fits: &[BranchFit]) -> Vec<Vec<String>> {
    fits.iter()
        .map(|f| {
            vec![
                f.branch.clone(),
                f.k.to_string(),
                opt(f.slope),
                opt(f.intercept),
                opt(f.r2),
                f.points.to_string(),
                opt(f.predicted_exponent),
            ]
        })
        .collect()
}

pub fn write_report(sink: &Sink, stem: &str, report: &SweepReport) -> Result<(), CliError> {
    if sink.wants(Format::Json) {
        sink.json(&format!("{stem}.json"), report)?;
    }
    if sink.wants(Format::Csv) {
        let path = sink.path(&format!("{stem}.csv"));
        let file = fs::File::create(&path).map_err(|e| io(&path, e))?;
        report.write_csv(file).map_err(|e| io(&path, e))?;
        write_rows(&sink.path(&format!("{stem}_fits.csv")), &FIT_HEADER, &fit_rows(&report.fits))?;
    }
    Ok(())
}

/// A gnuplot script drawing computed eigenvalues as points and predictions
/// as curves in the complex plane, one pair per branch file.
pub fn gnuplot_script(files: &[(String, String)]) -> String {
    let mut script = String::from(
        "set datafile separator ','\nset datafile missing 'NaN'\nset key outside\nset xlabel 'Re'\nset ylabel 'Im'\nplot \\\n",
    );
    let parts: Vec<String> = files
        .iter()
        .flat_map(|(label, file)| {
            [
                format!("  '{file}' using 2:3 with points pt 7 ps 0.5 title '{label}'"),
                format!("  '{file}' using 4:5 with lines notitle"),
            ]
        })
        .collect();
    script.push_str(&parts.join(", \\\n"));
    script.push('\n');
    script
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_values_are_nan() {
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(-1.5), "-1.5");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn gnuplot_pairs_points_with_curves() {
        let script = gnuplot_script(&[("k1".into(), "branches/k1.csv".into()), ("k2".into(), "branches/k2.csv".into())]);
        assert_eq!(script.matches("using 2:3").count(), 2);
        assert_eq!(script.matches("using 4:5").count(), 2);
        assert!(script.trim_end().ends_with("notitle"));
    }

    #[test]
    fn csv_quotes_only_when_needed() {
        let text = rows_to_string(&["a", "b"], &[vec!["1".into(), "x,y".into()]]);
        assert_eq!(text, "a,b\n1,\"x,y\"\n");
    }
}
