//! Strict parameter sets for model construction.
//!
//! Model factories read their parameters through a [`ParamReader`] and then
//! call [`finish`](ParamReader::finish), which rejects any key the factory
//! did not consume. Typos in configuration files fail loudly instead of
//! silently falling back to defaults.

use std::collections::{BTreeMap, BTreeSet};

use crate::models::ModelError;
use crate::world::TagValue;

/// Parameter set handed to model factories.
pub type Params = BTreeMap<String, TagValue>;

pub struct ParamReader<'a> {
    params: &'a Params,
    used: BTreeSet<&'a str>,
}

impl<'a> ParamReader<'a> {
    pub fn new(params: &'a Params) -> Self {
        ParamReader {
            params,
            used: BTreeSet::new(),
        }
    }

    fn take(&mut self, key: &str) -> Option<&'a TagValue> {
        let (k, v) = self.params.get_key_value(key)?;
        self.used.insert(k.as_str());
        Some(v)
    }

    pub fn real(&mut self, key: &str) -> Result<Option<f64>, ModelError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .as_real()
                .map(Some)
                .ok_or_else(|| ModelError::InvalidParameter {
                    key: key.to_string(),
                    reason: format!("expected a number, got {}", v.type_name()),
                }),
        }
    }

    pub fn real_or(&mut self, key: &str, default: f64) -> Result<f64, ModelError> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    pub fn require_real(&mut self, key: &str) -> Result<f64, ModelError> {
        self.real(key)?.ok_or_else(|| ModelError::InvalidParameter {
            key: key.to_string(),
            reason: "required parameter is missing".to_string(),
        })
    }

    pub fn int(&mut self, key: &str) -> Result<Option<i64>, ModelError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .as_int()
                .map(Some)
                .ok_or_else(|| ModelError::InvalidParameter {
                    key: key.to_string(),
                    reason: format!("expected an integer, got {}", v.type_name()),
                }),
        }
    }

    pub fn int_or(&mut self, key: &str, default: i64) -> Result<i64, ModelError> {
        Ok(self.int(key)?.unwrap_or(default))
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> Result<String, ModelError> {
        match self.take(key) {
            None => Ok(default.to_string()),
            Some(v) => v
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| ModelError::InvalidParameter {
                    key: key.to_string(),
                    reason: format!("expected a string, got {}", v.type_name()),
                }),
        }
    }

    /// Errors on the first parameter key no reader call consumed.
    pub fn finish(self) -> Result<(), ModelError> {
        for key in self.params.keys() {
            if !self.used.contains(key.as_str()) {
                return Err(ModelError::UnknownParameter(key.clone()));
            }
        }
        Ok(())
    }
}
