//! Per-subcommand parameter sets. Each set has a resolved form with defaults
//! and a flag form whose fields are all optional; values are layered as
//! defaults < `--config` file < command-line flags.

use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::failure::Failure;

/// Declares `$cfg` (resolved, serde defaults) and `$args` (clap flags, all
/// `Option`) from one field list.
macro_rules! params {
    (
        $(#[$cfg_meta:meta])*
        $cfg:ident / $args:ident {
            $( $(#[$field_meta:meta])* $field:ident : $ty:ty = $default:expr ),* $(,)?
        }
    ) => {
        $(#[$cfg_meta])*
        #[derive(Debug, Clone, PartialEq, ::serde::Serialize, ::serde::Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $cfg {
            $( pub $field: $ty, )*
        }

        impl Default for $cfg {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }

        #[derive(Debug, Clone, Default, ::clap::Args, ::serde::Serialize)]
        pub struct $args {
            $(
                $(#[$field_meta])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<<$ty as $crate::config::Flag>::Arg>,
            )*
        }
    };
}
pub(crate) use params;

/// Command-line value type of a parameter; optional parameters take the
/// inner type as a flag.
pub trait Flag {
    type Arg;
}

macro_rules! plain_flag {
    ($($t:ty),*) => { $( impl Flag for $t { type Arg = $t; } )* };
}

plain_flag!(f64, u32, u64, usize, bool, String, List);

impl<T: Flag> Flag for Option<T> {
    type Arg = T::Arg;
}

/// Comma-separated list of numbers on the command line, a JSON array in
/// config files.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
            .collect::<Result<_, _>>()
            .map(List)
    }
}

fn as_object(v: Value, origin: &str) -> Result<Map<String, Value>, Failure> {
    match v {
        Value::Object(m) => Ok(m),
        Value::Null => Ok(Map::new()),
        other => Err(Failure::config(format!("{origin}: expected a JSON object, got {other}"))),
    }
}

/// Resolves a parameter set from an optional JSON file and the flags.
pub fn resolve<C, A>(file: Option<&Path>, flags: &A) -> Result<C, Failure>
where
    C: DeserializeOwned + Serialize + Default,
    A: Serialize,
{
    let mut merged = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            as_object(v, &path.display().to_string())?
        }
        None => Map::new(),
    };
    let flags = serde_json::to_value(flags).map_err(|e| Failure::config(e.to_string()))?;
    for (k, v) in as_object(flags, "flags")? {
        merged.insert(k, v);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    params! {
        Demo / DemoArgs {
            a: f64 = 1.0,
            b: u32 = 2,
            list: Option<List> = None,
        }
    }

    #[test]
    fn layering_order() {
        let none = DemoArgs::default();
        let c: Demo = resolve(None, &none).unwrap();
        assert_eq!(c, Demo::default());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"a": 5.0, "b": 7}"#).unwrap();
        let flags = DemoArgs {
            b: Some(9),
            ..Default::default()
        };
        let c: Demo = resolve(Some(&path), &flags).unwrap();
        assert_eq!((c.a, c.b, c.list), (5.0, 9, None));

        let flags = DemoArgs {
            list: Some("1, 2.5".parse().unwrap()),
            ..Default::default()
        };
        let c: Demo = resolve(Some(&path), &flags).unwrap();
        assert_eq!(c.list, Some(List(vec![1.0, 2.5])));
        assert!("1,x".parse::<List>().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"c": 1}"#).unwrap();
        let err = resolve::<Demo, _>(Some(&path), &DemoArgs::default()).unwrap_err();
        assert_eq!(err.module, "config");
        std::fs::write(&path, "[1, 2]").unwrap();
        assert!(resolve::<Demo, _>(Some(&path), &DemoArgs::default()).is_err());
    }
}
