use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Ps,
    Ia,
}

/// A preference query over two outcomes in value space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Query {
    Ps { a_value: Vec<f64>, b_value: Vec<f64> },
    Ia { a_value: Vec<f64>, b_value: Vec<f64>, dim: usize },
}

impl Query {
    pub fn kind(&self) -> QueryKind {
        match self {
            Query::Ps { .. } => QueryKind::Ps,
            Query::Ia { .. } => QueryKind::Ia,
        }
    }

    pub fn values(&self) -> (&[f64], &[f64]) {
        match self {
            Query::Ps { a_value, b_value } | Query::Ia { a_value, b_value, .. } => (a_value, b_value),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Query::Ps { .. } => None,
            Query::Ia { dim, .. } => Some(*dim),
        }
    }
}

/// A query together with the response it received.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Observation {
    /// `prefers_a` is the binary response `y`.
    Ps {
        a_value: Vec<f64>,
        b_value: Vec<f64>,
        prefers_a: bool,
    },
    /// `delta` is the reported adjustment of objective `dim` of B, in value units.
    Ia {
        a_value: Vec<f64>,
        b_value: Vec<f64>,
        dim: usize,
        delta: f64,
    },
}

impl Observation {
    pub fn kind(&self) -> QueryKind {
        match self {
            Observation::Ps { .. } => QueryKind::Ps,
            Observation::Ia { .. } => QueryKind::Ia,
        }
    }

    pub fn ps(query: &Query, prefers_a: bool) -> Option<Self> {
        match query {
            Query::Ps { a_value, b_value } => Some(Observation::Ps {
                a_value: a_value.clone(),
                b_value: b_value.clone(),
                prefers_a,
            }),
            Query::Ia { .. } => None,
        }
    }

    pub fn ia(query: &Query, delta: f64) -> Option<Self> {
        match query {
            Query::Ia { a_value, b_value, dim } => Some(Observation::Ia {
                a_value: a_value.clone(),
                b_value: b_value.clone(),
                dim: *dim,
                delta,
            }),
            Query::Ps { .. } => None,
        }
    }
}

/// An applied observation and the cost paid for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub observation: Observation,
    pub cost_paid: f64,
}
