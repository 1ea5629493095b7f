//! File emission helpers: atomic writes, plot-data CSVs and the aligned
//! comparison table.

use std::path::Path;

use daglms_core::design::{ContourPoint, FrequencyResponse};
use daglms_core::metrics::fmt_f64;
use daglms_core::{Error, Result};

/// Write a file via a temporary sibling and rename, so partially written
/// outputs never appear under the final name.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Numeric(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

pub fn bode_csv(resp: &FrequencyResponse) -> String {
    let mut out = String::from("omega_rad,mag_db,phase_deg,real_part\n");
    for k in 0..resp.omega.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(resp.omega[k]),
            fmt_f64(resp.magnitude_db[k]),
            fmt_f64(resp.phase_deg[k]),
            fmt_f64(resp.real_part[k]),
        ));
    }
    out
}

pub fn contour_csv(points: &[ContourPoint]) -> String {
    let mut out = String::from("c1,c2,boundary_id\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(p.c1),
            fmt_f64(p.c2),
            p.boundary_id
        ));
    }
    out
}

/// One row of the sweep comparison.
pub struct ComparisonRow {
    pub label: String,
    pub convergence_time: Option<usize>,
    pub sum_mse: Option<f64>,
    pub j_d: Option<f64>,
    pub j_eps: Option<f64>,
    pub terminal_attenuation_db: Option<f64>,
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out =
        String::from("label,convergence_time,sum_mse,j_d,j_eps,terminal_attenuation_db\n");
    for r in rows {
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_f = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.label,
            opt_u(r.convergence_time),
            opt_f(r.sum_mse),
            opt_f(r.j_d),
            opt_f(r.j_eps),
            opt_f(r.terminal_attenuation_db),
        ));
    }
    out
}

/// Human-readable aligned table of the same rows.
pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let headers = ["label", "conv_time", "sum_mse", "j_d", "j_eps", "atten_db"];
    let mut cells: Vec<[String; 6]> = Vec::with_capacity(rows.len());
    for r in rows {
        let num = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        cells.push([
            r.label.clone(),
            r.convergence_time
                .map(|x| x.to_string())
                .unwrap_or_else(|| "-".into()),
            num(r.sum_mse),
            num(r.j_d),
            num(r.j_eps),
            r.terminal_attenuation_db
                .map(|x| format!("{x:.2}"))
                .unwrap_or_else(|| "-".into()),
        ]);
    }
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for (w, h) in widths.iter().zip(headers) {
        out.push_str(&format!("{h:<w$}  "));
    }
    out.push('\n');
    for row in &cells {
        for (w, cell) in widths.iter().zip(row) {
            out.push_str(&format!("{cell:<w$}  "));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = std::env::temp_dir().join(format!("daglms-out-{}", std::process::id()));
        let path = dir.join("x.csv");
        atomic_write(&path, b"a,b\n").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"a,b\n");
        assert!(!dir.join("x.csv.tmp").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn table_alignment() {
        let rows = vec![
            ComparisonRow {
                label: "gradient".into(),
                convergence_time: Some(123),
                sum_mse: Some(1.5),
                j_d: None,
                j_eps: None,
                terminal_attenuation_db: None,
            },
            ComparisonRow {
                label: "x".into(),
                convergence_time: None,
                sum_mse: Some(0.25),
                j_d: Some(3.0),
                j_eps: Some(2.0),
                terminal_attenuation_db: Some(31.25),
            },
        ];
        let table = comparison_table(&rows);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("label"));
        assert!(lines[1].contains("123"));
        assert!(lines[2].contains("31.25"));
    }
}
