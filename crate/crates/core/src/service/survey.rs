use serde::{Deserialize, Serialize};

use crate::metrics::{check_likert, L2Row, MetricsError, PasRow, Quality, SurveyPhase, L2_ITEMS};

/// Survey answers as posted by a client; post-surveys need every field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyAnswers {
    pub l2: Vec<f64>,
    #[serde(default)]
    pub enc: Option<f64>,
    #[serde(default)]
    pub list: Option<f64>,
    #[serde(default)]
    pub care: Option<f64>,
    #[serde(default)]
    pub app: Option<f64>,
    #[serde(default)]
    pub qual: Option<f64>,
    #[serde(default)]
    pub conf: Option<f64>,
    #[serde(default, rename = "use")]
    pub usefulness: Option<f64>,
}

/// A validated survey as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySubmission {
    pub phase: SurveyPhase,
    pub l2: L2Row,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pas: Option<PasRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<Quality>,
}

fn need(v: Option<f64>, item: &str) -> Result<f64, MetricsError> {
    let v = v.ok_or_else(|| MetricsError::MissingItem {
        participant: String::new(),
        phase: "post".into(),
        item: item.into(),
    })?;
    check_likert(item, v)?;
    Ok(v)
}

impl SurveyAnswers {
    pub fn validate(&self, phase: SurveyPhase) -> Result<SurveySubmission, MetricsError> {
        let items: [f64; L2_ITEMS] = self.l2.as_slice().try_into().map_err(|_| MetricsError::MissingItem {
            participant: String::new(),
            phase: format!("{phase:?}").to_lowercase(),
            item: format!("L2 ({} of {L2_ITEMS} items)", self.l2.len()),
        })?;
        let l2 = L2Row::new(items)?;
        let (pas, quality) = match phase {
            SurveyPhase::Pre => {
                for (item, v) in [("ENC", self.enc), ("LIST", self.list), ("CARE", self.care), ("APP", self.app)] {
                    if let Some(v) = v {
                        check_likert(item, v)?;
                    }
                }
                (None, None)
            }
            SurveyPhase::Post => (
                Some(PasRow {
                    enc: need(self.enc, "ENC")?,
                    list: need(self.list, "LIST")?,
                    care: need(self.care, "CARE")?,
                    app: need(self.app, "APP")?,
                }),
                Some(Quality {
                    qual: need(self.qual, "QUAL")?,
                    conf: need(self.conf, "CONF")?,
                    usefulness: need(self.usefulness, "USE")?,
                }),
            ),
        };
        Ok(SurveySubmission { phase, l2, pas, quality })
    }
}
