//! JSON configuration documents.
//!
//! The document is a flat object whose field names mirror the modulator
//! parameters one-to-one: scalar counts (`n`, `m_prime`, `p`, `k`), the
//! subchannel routing `e1`, guard lengths `n_zp1`/`n_cp1`/`n_cs1`/`n_zs1`
//! (suffix 2 and 3 for the later tiers), per-stage fields `m1`, `l1`,
//! `q1`, `h1`, `n_c1`, `o1`, `a1`, `b_conj1`, `b_cas1` (suffix 2 for the
//! second stage), the window `w`, the multiplexers `e2`/`e3` as row-major
//! 0/1 arrays with explicit column counts, the transpose flag `b_tran`,
//! and the output combiner `e4`.
//!
//! Filter taps and window samples are real numbers in the document; the
//! engine accepts complex coefficients, but every shipped configuration is
//! real and the format stays portable this way. Guard lengths and flags
//! may be omitted and default to zero/false; `o1`-style offset vectors
//! default to all zeros. Unknown fields are rejected.

use std::fmt;

use mcmod_core::config::{
    ExtensionSpec, ModulatorConfig, StageSpec, StreamCombiner, validate,
};
use mcmod_core::mat::Mat01;
use mcmod_core::Complex64;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of document parsing.
#[derive(Debug)]
pub enum ConfigDocError {
    /// Malformed JSON or an unknown/missing field.
    Json(serde_json::Error),
    /// A field-level consistency problem caught before full validation.
    Field(String),
    /// The assembled configuration failed validation; the message lists
    /// one diagnostic per violation.
    Validation(String),
}

impl fmt::Display for ConfigDocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigDocError::Json(e) => write!(f, "configuration document: {e}"),
            ConfigDocError::Field(msg) => write!(f, "configuration document: {msg}"),
            ConfigDocError::Validation(msg) => write!(f, "configuration invalid: {msg}"),
        }
    }
}

impl std::error::Error for ConfigDocError {}

// ---------------------------------------------------------------------------
// Document model
// ---------------------------------------------------------------------------

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

/// Flat JSON document mirroring `ModulatorConfig` field for field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub n: usize,
    pub m_prime: usize,
    pub p: usize,
    pub k: usize,
    /// Data subchannel m feeds filter bank branch e1[m].
    pub e1: Vec<usize>,

    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_zp1: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_cp1: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_cs1: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_zs1: usize,

    pub m1: usize,
    pub l1: usize,
    pub q1: usize,
    pub h1: Vec<f64>,
    pub n_c1: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o1: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub b_conj1: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub b_cas1: bool,

    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_zp2: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_cp2: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_cs2: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_zs2: usize,

    /// Window samples; empty means no windowing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub w: Vec<f64>,

    /// Row-major 0/1 entries of the subchannel multiplexer (m1 rows).
    pub e2: Vec<u8>,
    pub e2_cols: usize,

    #[serde(default, skip_serializing_if = "is_false")]
    pub b_tran: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e3: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e3_rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e3_cols: Option<usize>,

    pub m2: usize,
    pub l2: usize,
    pub q2: usize,
    pub h2: Vec<f64>,
    pub n_c2: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o2: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub b_conj2: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub b_cas2: bool,

    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_zp3: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_cp3: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_cs3: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub n_zs3: usize,

    /// Output combiner: "identity", "sum_streams", or "explicit" with the
    /// mask in `e4_rows`/`e4_cols`/`e4_bits`.
    pub e4: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e4_rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e4_cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e4_bits: Option<Vec<u8>>,
}

// ---------------------------------------------------------------------------
// Document -> config
// ---------------------------------------------------------------------------

fn real_taps(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn offsets(given: &Option<Vec<usize>>, p: usize, name: &str) -> Result<Vec<usize>, ConfigDocError> {
    match given {
        None => Ok(vec![0; p]),
        Some(v) => {
            if v.len() != p {
                return Err(ConfigDocError::Field(format!(
                    "{name} must list one offset per stream ({p}), got {}",
                    v.len()
                )));
            }
            Ok(v.clone())
        }
    }
}

fn mask_from_bits(
    name: &str,
    rows: usize,
    cols: usize,
    bits: &[u8],
) -> Result<Mat01, ConfigDocError> {
    if let Some(bad) = bits.iter().find(|&&b| b > 1) {
        return Err(ConfigDocError::Field(format!(
            "{name} entries must be 0 or 1, found {bad}"
        )));
    }
    Mat01::from_flat(rows, cols, bits).ok_or_else(|| {
        ConfigDocError::Field(format!(
            "{name} must carry {rows}x{cols} = {} bits, got {}",
            rows * cols,
            bits.len()
        ))
    })
}

impl ConfigDoc {
    /// Assembles and validates the modulator configuration.
    pub fn to_config(&self) -> Result<ModulatorConfig, ConfigDocError> {
        for (stage, q) in [(1, self.q1), (2, self.q2)] {
            if q == 0 {
                return Err(ConfigDocError::Field(format!(
                    "stage {stage}: downsampling factor must be ≥ 1"
                )));
            }
        }

        let e3 = match (&self.e3, self.e3_rows, self.e3_cols) {
            (None, None, None) => None,
            (Some(bits), Some(rows), Some(cols)) => {
                Some(mask_from_bits("e3", rows, cols, bits)?)
            }
            _ => {
                return Err(ConfigDocError::Field(
                    "e3, e3_rows, and e3_cols must be given together".into(),
                ))
            }
        };

        let e4 = match self.e4.as_str() {
            "identity" | "sum_streams" => {
                if self.e4_bits.is_some() || self.e4_rows.is_some() || self.e4_cols.is_some() {
                    return Err(ConfigDocError::Field(format!(
                        "e4_bits/e4_rows/e4_cols are only meaningful with e4 = \"explicit\", not \"{}\"",
                        self.e4
                    )));
                }
                if self.e4 == "identity" {
                    StreamCombiner::Identity
                } else {
                    StreamCombiner::SumStreams
                }
            }
            "explicit" => match (&self.e4_bits, self.e4_rows, self.e4_cols) {
                (Some(bits), Some(rows), Some(cols)) => {
                    StreamCombiner::Explicit(mask_from_bits("e4_bits", rows, cols, bits)?)
                }
                _ => {
                    return Err(ConfigDocError::Field(
                        "e4 = \"explicit\" requires e4_bits, e4_rows, and e4_cols".into(),
                    ))
                }
            },
            other => {
                return Err(ConfigDocError::Field(format!(
                    "e4 must be \"identity\", \"sum_streams\", or \"explicit\", got \"{other}\""
                )))
            }
        };

        let cfg = ModulatorConfig {
            n: self.n,
            m_prime: self.m_prime,
            p: self.p,
            e: self.e1.clone(),
            tier1: ExtensionSpec {
                n_zp: self.n_zp1,
                n_cp: self.n_cp1,
                n_cs: self.n_cs1,
                n_zs: self.n_zs1,
            },
            stage1: StageSpec {
                m: self.m1,
                l: self.l1,
                q: self.q1,
                h: real_taps(&self.h1),
                n_c: self.n_c1,
                o: offsets(&self.o1, self.p, "o1")?,
                a: offsets(&self.a1, self.p, "a1")?,
                b_conj: self.b_conj1,
                b_cas: self.b_cas1,
            },
            tier2: ExtensionSpec {
                n_zp: self.n_zp2,
                n_cp: self.n_cp2,
                n_cs: self.n_cs2,
                n_zs: self.n_zs2,
            },
            window: real_taps(&self.w),
            e2: mask_from_bits("e2", self.m1, self.e2_cols, &self.e2)?,
            e3,
            b_tran: self.b_tran,
            stage2: StageSpec {
                m: self.m2,
                l: self.l2,
                q: self.q2,
                h: real_taps(&self.h2),
                n_c: self.n_c2,
                o: offsets(&self.o2, self.p, "o2")?,
                a: offsets(&self.a2, self.p, "a2")?,
                b_conj: self.b_conj2,
                b_cas: self.b_cas2,
            },
            tier3: ExtensionSpec {
                n_zp: self.n_zp3,
                n_cp: self.n_cp3,
                n_cs: self.n_cs3,
                n_zs: self.n_zs3,
            },
            k: self.k,
            e4,
        };

        validate(&cfg).map_err(|e| ConfigDocError::Validation(e.to_string()))?;
        Ok(cfg)
    }
}

/// Parses a JSON document into a validated configuration.
pub fn parse_config(text: &str) -> Result<ModulatorConfig, ConfigDocError> {
    let doc: ConfigDoc = serde_json::from_str(text).map_err(ConfigDocError::Json)?;
    doc.to_config()
}

// ---------------------------------------------------------------------------
// Config -> document
// ---------------------------------------------------------------------------

fn real_only(values: &[Complex64], what: &str) -> Result<Vec<f64>, ConfigDocError> {
    for v in values {
        if v.im != 0.0 {
            return Err(ConfigDocError::Field(format!(
                "{what} has a complex entry; the document format carries real coefficients only"
            )));
        }
    }
    Ok(values.iter().map(|v| v.re).collect())
}

fn mask_bits(mask: &Mat01) -> Vec<u8> {
    let mut bits = Vec::with_capacity(mask.rows() * mask.cols());
    for i in 0..mask.rows() {
        for j in 0..mask.cols() {
            bits.push(mask.entry(i, j) as u8);
        }
    }
    bits
}

/// Renders a configuration as a document. Fails if filter taps or window
/// samples are complex, which the document format does not carry.
pub fn to_doc(cfg: &ModulatorConfig) -> Result<ConfigDoc, ConfigDocError> {
    let (e4, e4_rows, e4_cols, e4_bits) = match &cfg.e4 {
        StreamCombiner::Identity => ("identity".to_string(), None, None, None),
        StreamCombiner::SumStreams => ("sum_streams".to_string(), None, None, None),
        StreamCombiner::Explicit(mask) => (
            "explicit".to_string(),
            Some(mask.rows()),
            Some(mask.cols()),
            Some(mask_bits(mask)),
        ),
    };
    Ok(ConfigDoc {
        n: cfg.n,
        m_prime: cfg.m_prime,
        p: cfg.p,
        k: cfg.k,
        e1: cfg.e.clone(),
        n_zp1: cfg.tier1.n_zp,
        n_cp1: cfg.tier1.n_cp,
        n_cs1: cfg.tier1.n_cs,
        n_zs1: cfg.tier1.n_zs,
        m1: cfg.stage1.m,
        l1: cfg.stage1.l,
        q1: cfg.stage1.q,
        h1: real_only(&cfg.stage1.h, "h1")?,
        n_c1: cfg.stage1.n_c,
        o1: Some(cfg.stage1.o.clone()),
        a1: Some(cfg.stage1.a.clone()),
        b_conj1: cfg.stage1.b_conj,
        b_cas1: cfg.stage1.b_cas,
        n_zp2: cfg.tier2.n_zp,
        n_cp2: cfg.tier2.n_cp,
        n_cs2: cfg.tier2.n_cs,
        n_zs2: cfg.tier2.n_zs,
        w: real_only(&cfg.window, "w")?,
        e2: mask_bits(&cfg.e2),
        e2_cols: cfg.e2.cols(),
        b_tran: cfg.b_tran,
        e3: cfg.e3.as_ref().map(mask_bits),
        e3_rows: cfg.e3.as_ref().map(Mat01::rows),
        e3_cols: cfg.e3.as_ref().map(Mat01::cols),
        m2: cfg.stage2.m,
        l2: cfg.stage2.l,
        q2: cfg.stage2.q,
        h2: real_only(&cfg.stage2.h, "h2")?,
        n_c2: cfg.stage2.n_c,
        o2: Some(cfg.stage2.o.clone()),
        a2: Some(cfg.stage2.a.clone()),
        b_conj2: cfg.stage2.b_conj,
        b_cas2: cfg.stage2.b_cas,
        n_zp3: cfg.tier3.n_zp,
        n_cp3: cfg.tier3.n_cp,
        n_cs3: cfg.tier3.n_cs,
        n_zs3: cfg.tier3.n_zs,
        e4,
        e4_rows,
        e4_cols,
        e4_bits,
    })
}

/// Renders a configuration as pretty-printed JSON.
pub fn to_json(cfg: &ModulatorConfig) -> Result<String, ConfigDocError> {
    let doc = to_doc(cfg)?;
    Ok(serde_json::to_string_pretty(&doc).expect("document serializes") + "\n")
}

// ---------------------------------------------------------------------------
// Prototype filter files
// ---------------------------------------------------------------------------

/// Parses a prototype filter file: one real coefficient per line. Blank
/// lines and lines starting with `#` are ignored.
pub fn parse_prototype(text: &str) -> Result<Vec<f64>, ConfigDocError> {
    let mut taps = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| {
            ConfigDocError::Field(format!(
                "prototype file line {}: expected one real number, got \"{line}\"",
                idx + 1
            ))
        })?;
        taps.push(value);
    }
    if taps.is_empty() {
        return Err(ConfigDocError::Field(
            "prototype file contains no coefficients".into(),
        ));
    }
    Ok(taps)
}

/// Renders prototype coefficients in the one-number-per-line file format,
/// with a comment line naming the tap count.
pub fn prototype_to_text(taps: &[f64]) -> String {
    let mut out = format!("# prototype filter, {} taps, one coefficient per line\n", taps.len());
    for t in taps {
        out.push_str(&format!("{t:?}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use mcmod_core::presets::{preset_fbmc_oqam, preset_ofdm, preset_scfdma, default_prototype};

    fn shipped(name: &str) -> String {
        let path = format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"))
    }

    #[test]
    fn test_round_trip_through_document_preserves_presets() {
        for preset in [
            preset_ofdm(),
            preset_scfdma(),
            preset_fbmc_oqam(&default_prototype(32)),
        ] {
            let json = to_json(&preset.config).unwrap();
            let back = parse_config(&json).unwrap();
            assert_eq!(back, preset.config, "{} drifted through the document", preset.name);
        }
    }

    #[test]
    fn test_shipped_documents_equal_the_presets() {
        assert_eq!(parse_config(&shipped("cp-ofdm.json")).unwrap(), preset_ofdm().config);
        assert_eq!(parse_config(&shipped("sc-fdma.json")).unwrap(), preset_scfdma().config);
        assert_eq!(
            parse_config(&shipped("fbmc-oqam.json")).unwrap(),
            preset_fbmc_oqam(&default_prototype(32)).config
        );
    }

    #[test]
    fn test_zero_downsampling_factor_is_rejected_with_clear_wording() {
        let mut doc = to_doc(&preset_ofdm().config).unwrap();
        doc.q1 = 0;
        let text = serde_json::to_string(&doc).unwrap();
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(
            err.contains("downsampling factor must be ≥ 1"),
            "unexpected wording: {err}"
        );
    }

    #[test]
    fn test_unknown_field_is_rejected() {
        let json = to_json(&preset_ofdm().config).unwrap();
        let with_extra = json.replacen('{', "{\n  \"surprise\": 1,", 1);
        let err = parse_config(&with_extra).unwrap_err().to_string();
        assert!(err.contains("surprise"), "unexpected diagnostic: {err}");
    }

    #[test]
    fn test_transpose_without_redistribution_mask_fails_validation() {
        let mut doc = to_doc(&preset_scfdma().config).unwrap();
        doc.e3 = None;
        doc.e3_rows = None;
        doc.e3_cols = None;
        let text = serde_json::to_string(&doc).unwrap();
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, ConfigDocError::Validation(_)), "got: {err}");
    }

    #[test]
    fn test_partial_e3_fields_are_rejected() {
        let mut doc = to_doc(&preset_scfdma().config).unwrap();
        doc.e3_rows = None;
        let text = serde_json::to_string(&doc).unwrap();
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("given together"), "got: {err}");
    }

    #[test]
    fn test_omitted_offsets_default_to_zero() {
        let mut doc = to_doc(&preset_ofdm().config).unwrap();
        doc.o1 = None;
        doc.a1 = None;
        doc.o2 = None;
        doc.a2 = None;
        let text = serde_json::to_string(&doc).unwrap();
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg, preset_ofdm().config);
    }

    #[test]
    fn test_prototype_file_round_trip() {
        let taps = default_prototype(32);
        let text = prototype_to_text(&taps);
        let back = parse_prototype(&text).unwrap();
        assert_eq!(back, taps);
        assert!(parse_prototype("# only a comment\n").is_err());
        assert!(parse_prototype("1.0\nnot-a-number\n").is_err());
        assert_eq!(parse_prototype("  1.5 \n\n# c\n-2.0\n").unwrap(), vec![1.5, -2.0]);
    }

    #[test]
    fn test_shipped_prototype_file_matches_the_default() {
        assert_eq!(
            parse_prototype(&shipped("prototype-m32.txt")).unwrap(),
            default_prototype(32)
        );
    }

    // Regenerates the shipped documents from the presets. Run explicitly
    // after changing a preset:
    //     cargo test -p mcmod-tools regenerate_shipped -- --ignored
    #[test]
    #[ignore = "writes the shipped configuration documents"]
    fn regenerate_shipped_documents() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        std::fs::create_dir_all(&dir).unwrap();
        for preset in [
            preset_ofdm(),
            preset_scfdma(),
            preset_fbmc_oqam(&default_prototype(32)),
        ] {
            let path = dir.join(format!("{}.json", preset.name));
            std::fs::write(&path, to_json(&preset.config).unwrap()).unwrap();
        }
        std::fs::write(
            dir.join("prototype-m32.txt"),
            prototype_to_text(&default_prototype(32)),
        )
        .unwrap();
    }

    #[test]
    fn test_bad_mask_entries_are_rejected() {
        let mut doc = to_doc(&preset_ofdm().config).unwrap();
        doc.e2[0] = 2;
        let text = serde_json::to_string(&doc).unwrap();
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("0 or 1"), "got: {err}");

        let mut doc = to_doc(&preset_ofdm().config).unwrap();
        doc.e2.pop();
        let text = serde_json::to_string(&doc).unwrap();
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("bits"), "got: {err}");
    }
}
