//! Built-in example models.
//!
//! | name | field | function | notes |
//! |------|-------|----------|-------|
//! | `xy` | real | `x*y` | two lines crossing, general sign |
//! | `xy_complex` | complex | `z1*z2` | with a stratification of the central fibre |
//! | `x2y2` | real | `x^2*y^2` | nonnegative |
//! | `z2z3` | complex | `z1^2*z2^3` | |
//! | `z6` | complex | `z^6` | one variable |
//! | `a1` | real | resolution of `x^2 + y^2` | the exceptional circle is one-sided |
//! | `cusp` | complex | resolution of `x^2 + y^3` | three blow-ups |
//! | `cusp_real` | real | the same charts over the reals | |

use crate::error::{Error, Result};
use crate::ncmodel::{load_model, NCModel};

const DOCUMENTS: &[(&str, &str)] = &[
    ("a1", include_str!("../models/a1.json")),
    ("cusp", include_str!("../models/cusp.json")),
    ("cusp_real", include_str!("../models/cusp_real.json")),
    ("x2y2", include_str!("../models/x2y2.json")),
    ("xy", include_str!("../models/xy.json")),
    ("xy_complex", include_str!("../models/xy_complex.json")),
    ("z2z3", include_str!("../models/z2z3.json")),
    ("z6", include_str!("../models/z6.json")),
];

pub fn names() -> Vec<&'static str> {
    DOCUMENTS.iter().map(|(n, _)| *n).collect()
}

/// The JSON document of a built-in model.
pub fn document(name: &str) -> Result<&'static str> {
    DOCUMENTS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, d)| *d)
        .ok_or_else(|| Error::Config(format!("no built-in model named {name}; known: {}", names().join(", "))))
}

pub fn load(name: &str) -> Result<NCModel> {
    load_model(document(name)?)
}

pub fn all() -> Vec<NCModel> {
    names().into_iter().map(|n| load(n).expect("built-in models are valid")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncmodel::{check_normal_crossings, save_model};

    #[test]
    fn documents_are_normalized() {
        for (name, doc) in DOCUMENTS {
            let m = load_model(doc).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&save_model(&m), doc, "{name} is not in normalized form");
        }
    }

    #[test]
    fn catalog_passes_the_normal_crossings_check() {
        for m in all() {
            let d = check_normal_crossings(&m);
            assert!(d.is_empty(), "{}: {:?}", m.name, d);
        }
    }
}
