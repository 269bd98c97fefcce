use std::f64::consts::PI;

use hopf_core::ansatz::sigma2_profile;
use hopf_core::energy::{closed_form_sigma2_energy, reduced_sigma2_energy};
use hopf_core::quad::Quadrature;
use hopf_core::Charge;
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::ScanTask;
use crate::format::{g17, Table};
use crate::io::Output;
use crate::{Outcome, Result};

/// One row of the charge table. Failed rows carry NaN energies and the error text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub k: i64,
    pub l: i64,
    pub q: i64,
    pub e_closed: f64,
    pub e_quadrature: f64,
    pub bound: f64,
    pub ratio: f64,
    pub error: String,
}

fn row(k: i64, l: i64, radius: f64, quad: &Quadrature) -> ScanRow {
    let bound = 16.0 * PI * PI * (k * l) as f64 / radius;
    let energy = Charge::new(k, l).and_then(|c| {
        let e = reduced_sigma2_energy(&sigma2_profile(c), c, radius, quad)?;
        Ok((closed_form_sigma2_energy(c, radius), e))
    });
    let (e_closed, e_quadrature, error) = match energy {
        Ok((a, b)) => (a, b, String::new()),
        Err(e) => (f64::NAN, f64::NAN, e.to_string()),
    };
    ScanRow {
        k,
        l,
        q: k * l,
        e_closed,
        e_quadrature,
        bound,
        ratio: e_quadrature / bound,
        error,
    }
}

/// Rows for `1 ≤ ℓ ≤ k ≤ k_max`, ordered by `k` then `ℓ` whatever the thread count.
pub fn scan_rows(k_max: i64, radius: f64, quad: &Quadrature, threads: usize) -> Result<Vec<ScanRow>> {
    let pairs: Vec<(i64, i64)> = (1..=k_max).flat_map(|k| (1..=k).map(move |l| (k, l))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(|| pairs.par_iter().map(|&(k, l)| row(k, l, radius, quad)).collect()))
}

fn table(rows: &[ScanRow]) -> Table {
    let mut t = Table::new(&["k", "l", "Q", "e_closed", "e_quadrature", "bound", "ratio", "error"]);
    for r in rows {
        t.rows.push(vec![
            r.k.to_string(),
            r.l.to_string(),
            r.q.to_string(),
            g17(r.e_closed),
            g17(r.e_quadrature),
            g17(r.bound),
            g17(r.ratio),
            r.error.clone(),
        ]);
    }
    t
}

pub fn run(task: &ScanTask, out: &Output) -> Result<Outcome> {
    let rows = scan_rows(task.k_max, task.radius, &task.quad, task.threads)?;
    let t = table(&rows);
    out.csv("scan.csv", &t)?;
    if out.json {
        out.summary(&rows)?;
    } else {
        out.table(&t)?;
    }
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", rows.len());
        return Ok(Outcome::Failure);
    }
    Ok(Outcome::Success)
}
