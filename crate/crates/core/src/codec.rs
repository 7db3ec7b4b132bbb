//! Serde helpers for maps keyed by abstract states. On the wire these are
//! lists of `[encoded_state, value]` pairs.

pub mod state_map {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::abstraction::AbstractState;

    pub fn serialize<V, S>(map: &BTreeMap<AbstractState, V>, ser: S) -> Result<S::Ok, S::Error>
    where
        V: Serialize,
        S: Serializer,
    {
        ser.collect_seq(map.iter().map(|(k, v)| (k.encode(), v)))
    }

    pub fn deserialize<'de, V, D>(de: D) -> Result<BTreeMap<AbstractState, V>, D::Error>
    where
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        let pairs: Vec<(u64, V)> = Vec::deserialize(de)?;
        pairs
            .into_iter()
            .map(|(code, v)| {
                AbstractState::decode(code)
                    .map(|s| (s, v))
                    .ok_or_else(|| D::Error::custom(format!("invalid state code {code}")))
            })
            .collect()
    }
}
