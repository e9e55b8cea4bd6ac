//! Function-spec configuration: the JSON file schema and named presets.
//!
//! Schema (coefficients ascending, each `[re, im]`):
//!
//! ```json
//! {"form":"integral","P":[[re,im],...],"Q":[[re,im],...],"c":[re,im]}
//! {"form":"expsum","P":[...],"Q":[...],"Pt":[...],"Qt":[...]}
//! ```

use serde::Deserialize;
use thiserror::Error;

use crate::function::FunctionSpec;
use crate::logcx::Complex64;
use crate::poly::Polynomial;

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("unknown preset {0:?} (expected rees-exp, hemke-cubic, sinh-cubic)")]
    UnknownPreset(String),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    form: String,
    #[serde(rename = "P")]
    p: Vec<[f64; 2]>,
    #[serde(rename = "Q")]
    q: Vec<[f64; 2]>,
    c: Option<[f64; 2]>,
    #[serde(rename = "Pt")]
    pt: Option<Vec<[f64; 2]>>,
    #[serde(rename = "Qt")]
    qt: Option<Vec<[f64; 2]>>,
}

fn poly(v: &[[f64; 2]]) -> Polynomial {
    Polynomial::new(v.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
}

/// Parse a function spec from its JSON representation. Unknown keys are
/// rejected.
pub fn parse_spec_json(text: &str) -> Result<FunctionSpec, PresetError> {
    let file: SpecFile = serde_json::from_str(text)?;
    match file.form.as_str() {
        "integral" => {
            let c = file
                .c
                .ok_or_else(|| PresetError::Invalid("integral form requires \"c\"".into()))?;
            if file.pt.is_some() || file.qt.is_some() {
                return Err(PresetError::Invalid(
                    "integral form does not take Pt/Qt".into(),
                ));
            }
            Ok(FunctionSpec::Integral {
                p: poly(&file.p),
                q: poly(&file.q),
                c: Complex64::new(c[0], c[1]),
            })
        }
        "expsum" => {
            let pt = file
                .pt
                .ok_or_else(|| PresetError::Invalid("expsum form requires \"Pt\"".into()))?;
            let qt = file
                .qt
                .ok_or_else(|| PresetError::Invalid("expsum form requires \"Qt\"".into()))?;
            if file.c.is_some() {
                return Err(PresetError::Invalid("expsum form does not take c".into()));
            }
            Ok(FunctionSpec::ExpSum {
                p: poly(&file.p),
                q: poly(&file.q),
                pt: poly(&pt),
                qt: poly(&qt),
            })
        }
        other => Err(PresetError::Invalid(format!(
            "unknown form {other:?} (expected \"integral\" or \"expsum\")"
        ))),
    }
}

/// Parameters of the cubic-exponential example `exp(z³ + a z + b)`:
/// `a = (27π²/16)^{1/3}` and `b = ln √(a/3)`, chosen so both critical
/// points `±i√(a/3)` are superattracting fixed points.
pub fn cubic_example_constants() -> (f64, f64) {
    let a = (27.0 * std::f64::consts::PI.powi(2) / 16.0).cbrt();
    let b = (a / 3.0).sqrt().ln();
    (a, b)
}

/// Named presets.
///
/// * `rees-exp` — `λ·e^z` encoded as `P = λ`, `Q = z`, `c = λ` (`λ`
///   defaults to 1).
/// * `hemke-cubic` — `exp(z³ + a z + b)` with the constants from
///   [`cubic_example_constants`], encoded with `P = Q′`, `c = e^b`.
/// * `sinh-cubic` — `exp(z³) − exp(−z³)`.
pub fn preset(name: &str, lambda: Option<Complex64>) -> Result<FunctionSpec, PresetError> {
    match name {
        "rees-exp" => {
            let l = lambda.unwrap_or(Complex64::new(1.0, 0.0));
            if l.norm() == 0.0 {
                return Err(PresetError::Invalid("lambda must be nonzero".into()));
            }
            Ok(FunctionSpec::Integral {
                p: Polynomial::new(vec![l]),
                q: Polynomial::from_real(&[0.0, 1.0]),
                c: l,
            })
        }
        "hemke-cubic" => {
            let (a, b) = cubic_example_constants();
            Ok(FunctionSpec::Integral {
                p: Polynomial::from_real(&[a, 0.0, 3.0]),
                q: Polynomial::from_real(&[b, a, 0.0, 1.0]),
                c: Complex64::new((a / 3.0).sqrt(), 0.0),
            })
        }
        "sinh-cubic" => Ok(FunctionSpec::ExpSum {
            p: Polynomial::from_real(&[1.0]),
            q: Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0]),
            pt: Polynomial::from_real(&[-1.0]),
            qt: Polynomial::from_real(&[0.0, 0.0, 0.0, -1.0]),
        }),
        other => Err(PresetError::UnknownPreset(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants_match_closed_forms() {
        let (a, b) = cubic_example_constants();
        assert_relative_eq!(a, 2.5537664411075661, epsilon = 1e-15);
        assert_relative_eq!(b, -0.08052149175683015, epsilon = 1e-15);
        assert_relative_eq!(a.powi(3), 27.0 * std::f64::consts::PI.powi(2) / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn parse_integral_roundtrip() {
        let spec = parse_spec_json(
            r#"{"form":"integral","P":[[1,0]],"Q":[[0,0],[1,0]],"c":[1,0]}"#,
        )
        .unwrap();
        let FunctionSpec::Integral { p, q, c } = spec else {
            panic!()
        };
        assert_eq!(p.degree(), Some(0));
        assert_eq!(q.degree(), Some(1));
        assert_eq!(c, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn parse_expsum() {
        let spec = parse_spec_json(
            r#"{"form":"expsum","P":[[1,0]],"Q":[[0,0],[0,0],[0,0],[1,0]],
                "Pt":[[-1,0]],"Qt":[[0,0],[0,0],[0,0],[-1,0]]}"#,
        )
        .unwrap();
        assert!(matches!(spec, FunctionSpec::ExpSum { .. }));
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        let r = parse_spec_json(
            r#"{"form":"integral","P":[[1,0]],"Q":[[0,0],[1,0]],"c":[1,0],"extra":3}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(matches!(
            preset("quartic", None),
            Err(PresetError::UnknownPreset(_))
        ));
    }

    #[test]
    fn presets_validate() {
        for name in ["rees-exp", "hemke-cubic", "sinh-cubic"] {
            preset(name, None).unwrap().validate().unwrap();
        }
    }
}
