//! Curve labels from CSV tables with columns `label,a1,a2,a3,a4,a6,conductor`.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lsq_core::ellcurve::EllipticCurveQ;
use serde::Deserialize;

const BUNDLED: &str = include_str!("../data/curves.csv");

#[derive(Debug, Deserialize)]
struct Row {
    label: String,
    a1: i64,
    a2: i64,
    a3: i64,
    a4: i64,
    a6: i64,
    conductor: u64,
}

#[derive(Clone, Debug, Default)]
pub struct CurveTable {
    rows: BTreeMap<String, ([i64; 5], u64)>,
}

impl CurveTable {
    /// The table shipped with the binary.
    pub fn bundled() -> Self {
        let mut t = CurveTable::default();
        t.ingest(BUNDLED.as_bytes()).expect("bundled table parses");
        t
    }

    /// Adds rows from CSV, replacing labels already present.
    pub fn ingest(&mut self, r: impl Read) -> Result<usize> {
        let mut n = 0;
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: Row = row?;
            self.rows.insert(row.label, ([row.a1, row.a2, row.a3, row.a4, row.a6], row.conductor));
            n += 1;
        }
        Ok(n)
    }

    pub fn ingest_file(&mut self, path: &Path) -> Result<usize> {
        let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        self.ingest(f).with_context(|| format!("reading {}", path.display()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    /// Looks up a label; the stored conductor must agree with the computed one.
    pub fn get(&self, label: &str) -> Result<EllipticCurveQ> {
        let (a, n) = self.rows.get(label).ok_or_else(|| anyhow!("unknown curve label {label}"))?;
        let e = EllipticCurveQ::from_i64(*a)?;
        let computed = e.conductor()?;
        if computed != *n {
            bail!("table lists conductor {n} for {label}, computed {computed}");
        }
        Ok(e)
    }

    /// `a1,a2,a3,a4,a6` (brackets optional) or a label.
    pub fn parse(&self, s: &str) -> Result<EllipticCurveQ> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        if !t.contains(',') {
            return self.get(t);
        }
        let a: Vec<i128> = t
            .split(',')
            .map(|x| x.trim().parse::<i128>().with_context(|| format!("bad coefficient {x:?}")))
            .collect::<Result<_>>()?;
        let a: [i128; 5] = a.try_into().map_err(|_| anyhow!("expected five coefficients a1,a2,a3,a4,a6"))?;
        Ok(EllipticCurveQ::new(a)?)
    }
}
