use serde::{Deserialize, Serialize};

use super::{check_likert, MetricsError};

pub const L2_ITEMS: usize = 9;

/// +1 for items where higher is better, −1 for the reverse-coded ones.
pub const L2_SIGNS: [f64; L2_ITEMS] = [1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PasRow {
    pub enc: f64,
    pub list: f64,
    pub care: f64,
    pub app: f64,
}

impl PasRow {
    pub fn new(enc: f64, list: f64, care: f64, app: f64) -> Result<Self, MetricsError> {
        let row = Self { enc, list, care, app };
        row.validate()?;
        Ok(row)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        check_likert("ENC", self.enc)?;
        check_likert("LIST", self.list)?;
        check_likert("CARE", self.care)?;
        check_likert("APP", self.app)
    }

    pub fn items(&self) -> [f64; 4] {
        [self.enc, self.list, self.care, self.app]
    }
}

/// Perceived anthropomorphic support: the mean of the four items.
pub fn pas(row: &PasRow) -> f64 {
    row.items().iter().sum::<f64>() / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct L2Row {
    pub items: [f64; L2_ITEMS],
}

impl L2Row {
    pub fn new(items: [f64; L2_ITEMS]) -> Result<Self, MetricsError> {
        let row = Self { items };
        row.validate()?;
        Ok(row)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        for (i, v) in self.items.iter().enumerate() {
            check_likert(&format!("L2_{}", i + 1), *v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Delta {
    pub per_item: [f64; L2_ITEMS],
    pub total: f64,
}

/// Signed total over per-item changes, reverse-coded items subtracted.
pub fn l2_total(per_item: &[f64; L2_ITEMS]) -> f64 {
    per_item.iter().zip(L2_SIGNS).map(|(d, s)| d * s).sum()
}

pub fn delta_l2(pre: &L2Row, post: &L2Row) -> L2Delta {
    let mut per_item = [0.0; L2_ITEMS];
    for (k, d) in per_item.iter_mut().enumerate() {
        *d = post.items[k] - pre.items[k];
    }
    L2Delta {
        per_item,
        total: l2_total(&per_item),
    }
}
