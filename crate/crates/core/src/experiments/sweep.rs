use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::FieldSpec;
use crate::functionals::{poincare_quotient, FracParams};
use crate::geometry::{Domain, DomainSpec};
use crate::mc::McConfig;
use crate::thresholds::{
    beta_john_b_sup, beta_john_p1_b_max, holder_b_max, holder_b_sharp, john_b_max, john_p1_b_max, mushroom_q_max,
    SideCondition, ThresholdReport,
};

/// Cartesian parameter grid; any empty axis makes the grid empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub domains: Vec<DomainSpec>,
    pub fields: Vec<FieldSpec>,
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub tau: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            domains: vec![DomainSpec::unit_cube(2)],
            fields: vec![FieldSpec::Coordinate { axis: 0 }],
            s: vec![0.5],
            p: vec![2.0],
            q: vec![2.0],
            a: vec![0.0],
            b: vec![0.0],
            tau: 0.5,
        }
    }
}

/// One CSV row. Thresholds that do not apply to the domain are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub domain: String,
    pub field: String,
    pub n: usize,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub quotient: Option<f64>,
    pub std_error: Option<f64>,
    pub flags: String,
    pub john_b_max: Option<f64>,
    pub john_p1_b_max: Option<f64>,
    pub beta_john_b_sup: Option<f64>,
    pub beta_john_p1_b_max: Option<f64>,
    pub mushroom_q_max: Option<f64>,
    pub holder_b_max: Option<f64>,
    pub holder_b_sharp: Option<f64>,
    pub side_conditions: String,
    pub error: String,
}

impl SweepRow {
    pub const HEADER: [&'static str; 20] = [
        "domain",
        "field",
        "n",
        "s",
        "p",
        "q",
        "a",
        "b",
        "quotient",
        "std_error",
        "flags",
        "john_b_max",
        "john_p1_b_max",
        "beta_john_b_sup",
        "beta_john_p1_b_max",
        "mushroom_q_max",
        "holder_b_max",
        "holder_b_sharp",
        "side_conditions",
        "error",
    ];
}

#[derive(Default)]
struct Thresholds {
    values: [Option<f64>; 7],
    sides: Vec<String>,
}

impl Thresholds {
    fn record(&mut self, slot: usize, report: Result<ThresholdReport<f64>>) {
        if let Ok(r) = report {
            self.values[slot] = r.value;
            self.sides.extend(r.side_conditions.iter().map(|c: &SideCondition| {
                format!("{}:{}:{}", r.theorem, c.name, if c.satisfied { "ok" } else { "fail" })
            }));
        }
    }
}

fn thresholds(spec: &DomainSpec, n: usize, params: &FracParams) -> Thresholds {
    let FracParams { s, p, q, a, b, .. } = *params;
    let mut t = Thresholds::default();
    match spec {
        DomainSpec::UnitCube { .. } | DomainSpec::Ball { .. } => {
            if p > 1.0 {
                t.record(0, john_b_max(n, p, q, a, s));
            } else {
                t.record(1, john_p1_b_max(n, q, a, s));
            }
        }
        DomainSpec::Mushroom { beta, .. } => {
            if p > 1.0 {
                t.record(2, beta_john_b_sup(n, p, q, a, s, *beta));
            } else {
                t.record(3, beta_john_p1_b_max(n, q, a, s, *beta));
            }
            t.record(4, mushroom_q_max(n, a, p, b, s, *beta));
        }
        DomainSpec::Cusp { alpha, .. } => {
            t.record(5, holder_b_max(n, p, q, *alpha, s));
            t.record(6, holder_b_sharp(n, p, q, *alpha, s));
        }
    }
    t
}

/// Evaluates the quotient and the applicable thresholds on every grid
/// point, in grid order. Cell `k` uses the sub-seed `"cell/k"`; a failing
/// cell is recorded in its row and the sweep continues.
pub fn sweep(grid: &SweepGrid, mc: &McConfig) -> Result<Vec<SweepRow>> {
    mc.validate()?;
    let mut rows = Vec::new();
    let mut index = 0usize;
    for spec in &grid.domains {
        let domain = Domain::new(spec.clone());
        for field_spec in &grid.fields {
            for &s in &grid.s {
                for &p in &grid.p {
                    for &q in &grid.q {
                        for &a in &grid.a {
                            for &b in &grid.b {
                                let params = FracParams::new(s, p, q, a, b).with_tau(grid.tau);
                                let cell_mc = mc.child(&format!("cell/{index}"));
                                index += 1;
                                rows.push(cell(spec, &domain, field_spec, &params, &cell_mc));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn cell(
    spec: &DomainSpec,
    domain: &Result<Domain>,
    field_spec: &FieldSpec,
    params: &FracParams,
    mc: &McConfig,
) -> SweepRow {
    let n = spec.dim();
    let t = thresholds(spec, n, params);
    let mut row = SweepRow {
        domain: spec.label(),
        field: field_spec.label(),
        n,
        s: params.s,
        p: params.p,
        q: params.q,
        a: params.a,
        b: params.b,
        quotient: None,
        std_error: None,
        flags: String::new(),
        john_b_max: t.values[0],
        john_p1_b_max: t.values[1],
        beta_john_b_sup: t.values[2],
        beta_john_p1_b_max: t.values[3],
        mushroom_q_max: t.values[4],
        holder_b_max: t.values[5],
        holder_b_sharp: t.values[6],
        side_conditions: t.sides.join(";"),
        error: String::new(),
    };
    let result = domain
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|d| {
            let f = field_spec.resolve(d).map_err(|e| e.to_string())?;
            poincare_quotient(&f, d, params, mc).map_err(|e| e.to_string())
        });
    match result {
        Ok(quot) => {
            row.quotient = Some(quot.value.value);
            row.std_error = Some(quot.value.std_error);
            let mut flags = Vec::new();
            if quot.value.flags.divergent {
                flags.push("divergent".to_string());
            }
            if quot.value.flags.clamped_fraction > 0.0 {
                flags.push(format!("clamped={}", quot.value.flags.clamped_fraction));
            }
            row.flags = flags.join(";");
        }
        Err(e) => row.error = e,
    }
    row
}

/// Runs [`sweep`] and writes the rows as CSV with a header, returning the
/// number of data rows.
pub fn sweep_to_writer<W: Write>(grid: &SweepGrid, mc: &McConfig, out: W) -> Result<usize> {
    let rows = sweep(grid, mc)?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(SweepRow::HEADER)?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_writes_only_the_header() {
        let grid = SweepGrid {
            s: Vec::new(),
            ..SweepGrid::default()
        };
        let mut buf = Vec::new();
        assert_eq!(sweep_to_writer(&grid, &McConfig::new(100, 1), &mut buf).unwrap(), 0);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("domain,field,n,s,"));
    }

    #[test]
    fn failures_stay_in_their_row() {
        let grid = SweepGrid {
            fields: vec![FieldSpec::Constant { value: 1.0 }, FieldSpec::Coordinate { axis: 0 }],
            ..SweepGrid::default()
        };
        let rows = sweep(&grid, &McConfig::new(2000, 1)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].quotient.is_none() && !rows[0].error.is_empty());
        assert!(rows[1].quotient.is_some() && rows[1].error.is_empty());
        assert_eq!(rows[1].john_b_max, Some(1.0));
    }
}
