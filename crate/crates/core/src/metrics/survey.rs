use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{check_likert, delta_l2, l2_total, pas, L2Row, MetricsError, PasRow, L2_ITEMS};
use crate::empathy::EmpathyMode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quality {
    pub qual: f64,
    pub conf: f64,
    #[serde(rename = "use")]
    pub usefulness: f64,
}

/// One participant's paired pre- and post-survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub participant_id: String,
    pub condition: EmpathyMode,
    pub pre: L2Row,
    pub post: L2Row,
    pub pas: PasRow,
    pub quality: Quality,
    pub empathy_trigger_count: u32,
}

impl SurveyRecord {
    /// A named scalar for correlation tables.
    pub fn measure(&self, name: &str) -> Option<f64> {
        let d = delta_l2(&self.pre, &self.post);
        Some(match name {
            "ENC" => self.pas.enc,
            "LIST" => self.pas.list,
            "CARE" => self.pas.care,
            "APP" => self.pas.app,
            "PAS" => pas(&self.pas),
            "QUAL" => self.quality.qual,
            "CONF" => self.quality.conf,
            "USE" => self.quality.usefulness,
            "L2_TOTAL" => d.total,
            "TRIGGERS" => self.empathy_trigger_count as f64,
            other => {
                let k: usize = other.strip_prefix("DL2_")?.parse().ok()?;
                *d.per_item.get(k.checked_sub(1)?)?
            }
        })
    }
}

pub const MEASURES: &[&str] = &["ENC", "LIST", "CARE", "APP", "PAS", "QUAL", "CONF", "USE", "L2_TOTAL"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurveyPhase {
    Pre,
    Post,
}

/// One CSV line as written; blank cells are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurveyCsvRow {
    pub participant_id: String,
    pub condition: String,
    pub phase: String,
    #[serde(rename = "L2_1")]
    pub l2_1: Option<f64>,
    #[serde(rename = "L2_2")]
    pub l2_2: Option<f64>,
    #[serde(rename = "L2_3")]
    pub l2_3: Option<f64>,
    #[serde(rename = "L2_4")]
    pub l2_4: Option<f64>,
    #[serde(rename = "L2_5")]
    pub l2_5: Option<f64>,
    #[serde(rename = "L2_6")]
    pub l2_6: Option<f64>,
    #[serde(rename = "L2_7")]
    pub l2_7: Option<f64>,
    #[serde(rename = "L2_8")]
    pub l2_8: Option<f64>,
    #[serde(rename = "L2_9")]
    pub l2_9: Option<f64>,
    #[serde(rename = "ENC")]
    pub enc: Option<f64>,
    #[serde(rename = "LIST")]
    pub list: Option<f64>,
    #[serde(rename = "CARE")]
    pub care: Option<f64>,
    #[serde(rename = "APP")]
    pub app: Option<f64>,
    #[serde(rename = "QUAL")]
    pub qual: Option<f64>,
    #[serde(rename = "CONF")]
    pub conf: Option<f64>,
    #[serde(rename = "USE")]
    pub usefulness: Option<f64>,
    pub empathy_triggers: Option<u32>,
}

impl SurveyCsvRow {
    fn l2(&self) -> [Option<f64>; L2_ITEMS] {
        [
            self.l2_1, self.l2_2, self.l2_3, self.l2_4, self.l2_5, self.l2_6, self.l2_7, self.l2_8, self.l2_9,
        ]
    }

    fn pre(participant_id: &str, condition: EmpathyMode, l2: &L2Row) -> Self {
        let i = l2.items;
        Self {
            participant_id: participant_id.to_string(),
            condition: condition.as_str().to_string(),
            phase: "pre".into(),
            l2_1: Some(i[0]),
            l2_2: Some(i[1]),
            l2_3: Some(i[2]),
            l2_4: Some(i[3]),
            l2_5: Some(i[4]),
            l2_6: Some(i[5]),
            l2_7: Some(i[6]),
            l2_8: Some(i[7]),
            l2_9: Some(i[8]),
            ..Self::default()
        }
    }
}

fn required(v: Option<f64>, participant: &str, phase: &str, item: &str) -> Result<f64, MetricsError> {
    let v = v.ok_or_else(|| MetricsError::MissingItem {
        participant: participant.to_string(),
        phase: phase.to_string(),
        item: item.to_string(),
    })?;
    check_likert(item, v)?;
    Ok(v)
}

fn l2_row(row: &SurveyCsvRow) -> Result<L2Row, MetricsError> {
    let mut items = [0.0; L2_ITEMS];
    for (k, v) in row.l2().into_iter().enumerate() {
        items[k] = required(v, &row.participant_id, &row.phase, &format!("L2_{}", k + 1))?;
    }
    Ok(L2Row { items })
}

fn parse_condition(s: &str) -> Result<EmpathyMode, MetricsError> {
    s.trim()
        .to_lowercase()
        .parse()
        .map_err(|_| MetricsError::UnknownCondition(s.to_string()))
}

/// Reads the survey CSV and pairs each participant's pre and post rows.
pub fn read_surveys(reader: impl Read) -> Result<Vec<SurveyRecord>, MetricsError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut pre: BTreeMap<String, (EmpathyMode, L2Row)> = BTreeMap::new();
    let mut post: BTreeMap<String, SurveyCsvRow> = BTreeMap::new();
    let mut order = Vec::new();
    for row in csv.deserialize::<SurveyCsvRow>() {
        let row = row.map_err(|e| MetricsError::Csv(e.to_string()))?;
        let id = row.participant_id.clone();
        if id.is_empty() {
            return Err(MetricsError::Csv("empty participant_id".into()));
        }
        let condition = parse_condition(&row.condition)?;
        let duplicate = || MetricsError::DuplicatePhase {
            participant: id.clone(),
            phase: row.phase.clone(),
        };
        match row.phase.to_lowercase().as_str() {
            "pre" => {
                if pre.insert(id.clone(), (condition, l2_row(&row)?)).is_some() {
                    return Err(duplicate());
                }
            }
            "post" => {
                if post.contains_key(&id) {
                    return Err(duplicate());
                }
                post.insert(id.clone(), row);
            }
            other => return Err(MetricsError::Csv(format!("unknown phase {other:?}"))),
        }
        if !order.contains(&id) {
            order.push(id);
        }
    }
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let missing = |phase: &str| MetricsError::MissingPhase {
            participant: id.clone(),
            phase: phase.to_string(),
        };
        let (condition, pre_l2) = pre.remove(&id).ok_or_else(|| missing("pre"))?;
        let row = post.remove(&id).ok_or_else(|| missing("post"))?;
        if parse_condition(&row.condition)? != condition {
            return Err(MetricsError::ConditionMismatch(id));
        }
        let req = |v, item| required(v, &id, "post", item);
        out.push(SurveyRecord {
            participant_id: id.clone(),
            condition,
            pre: pre_l2,
            post: l2_row(&row)?,
            pas: PasRow {
                enc: req(row.enc, "ENC")?,
                list: req(row.list, "LIST")?,
                care: req(row.care, "CARE")?,
                app: req(row.app, "APP")?,
            },
            quality: Quality {
                qual: req(row.qual, "QUAL")?,
                conf: req(row.conf, "CONF")?,
                usefulness: req(row.usefulness, "USE")?,
            },
            empathy_trigger_count: row.empathy_triggers.ok_or_else(|| MetricsError::MissingItem {
                participant: id.clone(),
                phase: "post".into(),
                item: "empathy_triggers".into(),
            })?,
        });
    }
    Ok(out)
}

/// Writes records back in the same two-rows-per-participant layout.
pub fn write_surveys(writer: impl Write, records: &[SurveyRecord]) -> Result<(), MetricsError> {
    let mut csv = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| MetricsError::Csv(e.to_string());
    for r in records {
        csv.serialize(SurveyCsvRow::pre(&r.participant_id, r.condition, &r.pre)).map_err(err)?;
        let mut post = SurveyCsvRow::pre(&r.participant_id, r.condition, &r.post);
        post.phase = "post".into();
        post.enc = Some(r.pas.enc);
        post.list = Some(r.pas.list);
        post.care = Some(r.pas.care);
        post.app = Some(r.pas.app);
        post.qual = Some(r.quality.qual);
        post.conf = Some(r.quality.conf);
        post.usefulness = Some(r.quality.usefulness);
        post.empathy_triggers = Some(r.empathy_trigger_count);
        csv.serialize(post).map_err(err)?;
    }
    csv.flush().map_err(|e| MetricsError::Csv(e.to_string()))
}

/// Moves participants who never received empathetic feedback to `None`.
pub fn reassign_conditions(records: &[SurveyRecord]) -> Vec<SurveyRecord> {
    records
        .iter()
        .cloned()
        .map(|mut r| {
            if r.condition != EmpathyMode::None && r.empathy_trigger_count == 0 {
                r.condition = EmpathyMode::None;
            }
            r
        })
        .collect()
}

pub fn group_sizes(records: &[SurveyRecord]) -> BTreeMap<EmpathyMode, usize> {
    let mut out: BTreeMap<EmpathyMode, usize> = EmpathyMode::ALL.iter().map(|m| (*m, 0)).collect();
    for r in records {
        *out.entry(r.condition).or_default() += 1;
    }
    out
}

/// Per-condition means as reported in study tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: EmpathyMode,
    pub n: usize,
    pub pas_items: [f64; 4],
    pub pas: f64,
    pub l2_delta: [f64; L2_ITEMS],
    pub l2_total: f64,
}

pub fn summarize(records: &[SurveyRecord]) -> Vec<ConditionSummary> {
    EmpathyMode::ALL
        .iter()
        .filter_map(|&condition| {
            let group: Vec<&SurveyRecord> = records.iter().filter(|r| r.condition == condition).collect();
            if group.is_empty() {
                return None;
            }
            let n = group.len() as f64;
            let mut pas_items = [0.0; 4];
            let mut l2_delta = [0.0; L2_ITEMS];
            for r in &group {
                for (acc, v) in pas_items.iter_mut().zip(r.pas.items()) {
                    *acc += v / n;
                }
                for (acc, v) in l2_delta.iter_mut().zip(delta_l2(&r.pre, &r.post).per_item) {
                    *acc += v / n;
                }
            }
            Some(ConditionSummary {
                condition,
                n: group.len(),
                pas_items,
                pas: pas_items.iter().sum::<f64>() / 4.0,
                l2_delta,
                l2_total: l2_total(&l2_delta),
            })
        })
        .collect()
}
