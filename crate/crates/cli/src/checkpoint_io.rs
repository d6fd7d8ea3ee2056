//! Checkpoint file format: a text header (format version, architecture,
//! schedule parameters, scaler statistics, EMA constant) followed by all
//! live parameter arrays and then all shadow arrays as little-endian 64-bit
//! reals in declaration order. Loading validates the header and array sizes
//! and rebuilds the schedule from its stored parameters.

use crate::error::CliError;
use chfgen_core::data::{FeatureMode, StandardScaler};
use chfgen_core::diffusion::{Checkpoint, ModelKind, ScheduleParams};
use chfgen_core::net::{Activation, EmaShadow, NoisePredictor};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

const MAGIC: &str = "chfgen checkpoint v1";

fn float_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_float_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Checkpoint(format!("bad float in {what}: `{p}`")))
        })
        .collect()
}

pub fn save(ckpt: &Checkpoint, path: &Path, manifest_hash: Option<&str>) -> Result<(), CliError> {
    let mut header = String::new();
    header.push_str(MAGIC);
    header.push('\n');
    let mut line = |k: &str, v: String| {
        header.push_str(k);
        header.push(' ');
        header.push_str(&v);
        header.push('\n');
    };
    if let Some(hash) = manifest_hash {
        line("manifest_hash", hash.to_string());
    }
    line("kind", ckpt.kind.as_str().to_string());
    line("feature_mode", ckpt.feature_mode.as_str().to_string());
    line("data_dim", ckpt.model.data_dim().to_string());
    line("cond_dim", ckpt.model.cond_dim().to_string());
    line("embed_width", ckpt.model.embed_width().to_string());
    line(
        "hidden",
        ckpt.model
            .hidden_widths()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    line("activation", ckpt.model.activation_name().to_string());
    line("t_steps", ckpt.schedule_params.t_steps.to_string());
    line("beta_min", format!("{}", ckpt.schedule_params.beta_min));
    line("beta_max", format!("{}", ckpt.schedule_params.beta_max));
    line("slope", format!("{}", ckpt.schedule_params.slope));
    line("ema_mu", format!("{}", ckpt.ema_mu));
    line("sample_with_ema", ckpt.sample_with_ema.to_string());
    line("columns", ckpt.columns.join(","));
    line("data_scaler_mean", float_list(&ckpt.data_scaler.mean));
    line("data_scaler_std", float_list(&ckpt.data_scaler.std));
    if let Some(cs) = &ckpt.cond_scaler {
        line("cond_scaler_mean", float_list(&cs.mean));
        line("cond_scaler_std", float_list(&cs.std));
    }
    line("param_count", ckpt.model.param_count().to_string());
    header.push_str("---\n");

    let mut bytes = header.into_bytes();
    for arrays in [
        ckpt.model.param_arrays(),
        ckpt.shadow.model().param_arrays(),
    ] {
        for array in arrays {
            for &v in array {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(&bytes).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> Result<Checkpoint, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let sep = b"\n---\n";
    let split_at = bytes
        .windows(sep.len())
        .position(|w| w == sep)
        .ok_or_else(|| CliError::Checkpoint("missing header/body separator".to_string()))?;
    let header = std::str::from_utf8(&bytes[..split_at])
        .map_err(|_| CliError::Checkpoint("header is not UTF-8".to_string()))?;
    let body = &bytes[split_at + sep.len()..];

    let mut lines = header.lines();
    let magic = lines.next().unwrap_or("");
    if magic != MAGIC {
        return Err(CliError::Checkpoint(format!(
            "unsupported format `{magic}` (expected `{MAGIC}`)"
        )));
    }
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for l in lines {
        if let Some((k, v)) = l.split_once(' ') {
            fields.insert(k, v);
        }
    }
    let get = |k: &str| -> Result<&str, CliError> {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| CliError::Checkpoint(format!("missing header field `{k}`")))
    };
    let parse_usize = |k: &str| -> Result<usize, CliError> {
        get(k)?
            .trim()
            .parse()
            .map_err(|_| CliError::Checkpoint(format!("bad integer in `{k}`")))
    };
    let parse_f64 = |k: &str| -> Result<f64, CliError> {
        get(k)?
            .trim()
            .parse()
            .map_err(|_| CliError::Checkpoint(format!("bad float in `{k}`")))
    };

    let kind_raw = get("kind")?;
    let kind = ModelKind::parse(kind_raw)
        .ok_or_else(|| CliError::Checkpoint(format!("unknown kind `{kind_raw}`")))?;
    let mode_raw = get("feature_mode")?;
    let feature_mode = FeatureMode::parse(mode_raw)
        .ok_or_else(|| CliError::Checkpoint(format!("unknown feature_mode `{mode_raw}`")))?;
    let data_dim = parse_usize("data_dim")?;
    let cond_dim = parse_usize("cond_dim")?;
    let embed_width = parse_usize("embed_width")?;
    let hidden: Vec<usize> = get("hidden")?
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Checkpoint("bad hidden width".to_string()))
        })
        .collect::<Result<_, _>>()?;
    if Activation::parse(get("activation")?).is_none() {
        return Err(CliError::Checkpoint(format!(
            "unknown activation `{}`",
            get("activation")?
        )));
    }
    let schedule_params = ScheduleParams {
        t_steps: parse_usize("t_steps")?,
        beta_min: parse_f64("beta_min")?,
        beta_max: parse_f64("beta_max")?,
        slope: parse_f64("slope")?,
    };
    let schedule = schedule_params
        .realize()
        .map_err(|e| CliError::Checkpoint(format!("stored schedule is invalid: {e}")))?;
    let ema_mu = parse_f64("ema_mu")?;
    let sample_with_ema = match get("sample_with_ema")? {
        "true" => true,
        "false" => false,
        other => {
            return Err(CliError::Checkpoint(format!(
                "bad sample_with_ema `{other}`"
            )))
        }
    };
    let columns: Vec<String> = get("columns")?.split(',').map(str::to_string).collect();
    let data_scaler = StandardScaler {
        mean: parse_float_list(get("data_scaler_mean")?, "data_scaler_mean")?,
        std: parse_float_list(get("data_scaler_std")?, "data_scaler_std")?,
    };
    if data_scaler.mean.len() != data_dim || data_scaler.std.len() != data_dim {
        return Err(CliError::Checkpoint(
            "data scaler width disagrees with data_dim".to_string(),
        ));
    }
    let cond_scaler = if cond_dim > 0 {
        let cs = StandardScaler {
            mean: parse_float_list(get("cond_scaler_mean")?, "cond_scaler_mean")?,
            std: parse_float_list(get("cond_scaler_std")?, "cond_scaler_std")?,
        };
        if cs.mean.len() != cond_dim || cs.std.len() != cond_dim {
            return Err(CliError::Checkpoint(
                "condition scaler width disagrees with cond_dim".to_string(),
            ));
        }
        Some(cs)
    } else {
        None
    };
    let expected_columns = match kind {
        ModelKind::Dm => data_dim,
        ModelKind::Cdm => cond_dim + data_dim,
    };
    if columns.len() != expected_columns {
        return Err(CliError::Checkpoint(
            "column list disagrees with dimensions".to_string(),
        ));
    }

    let mut model = NoisePredictor::init(0, data_dim, cond_dim, &hidden, embed_width)
        .map_err(|e| CliError::Checkpoint(format!("stored architecture is invalid: {e}")))?;
    let param_count = parse_usize("param_count")?;
    if param_count != model.param_count() {
        return Err(CliError::Checkpoint(format!(
            "param_count {param_count} disagrees with architecture ({})",
            model.param_count()
        )));
    }
    let expected_bytes = 2 * param_count * 8;
    if body.len() != expected_bytes {
        return Err(CliError::Checkpoint(format!(
            "parameter payload is {} bytes, expected {expected_bytes}",
            body.len()
        )));
    }
    let mut offset = 0usize;
    let mut read_into = |model: &mut NoisePredictor| {
        for array in model.param_arrays_mut() {
            for v in array.iter_mut() {
                let mut raw = [0u8; 8];
                raw.copy_from_slice(&body[offset..offset + 8]);
                *v = f64::from_le_bytes(raw);
                offset += 8;
            }
        }
    };
    read_into(&mut model);
    let mut shadow_model = model.clone();
    read_into(&mut shadow_model);

    let mut shadow = EmaShadow::new(&model, ema_mu)
        .map_err(|e| CliError::Checkpoint(format!("stored EMA constant is invalid: {e}")))?;
    shadow.set_model(shadow_model);

    Ok(Checkpoint {
        kind,
        feature_mode,
        model,
        shadow,
        schedule_params,
        schedule,
        data_scaler,
        cond_scaler,
        columns,
        ema_mu,
        sample_with_ema,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chfgen_core::matrix::Matrix;

    fn tiny_checkpoint() -> Checkpoint {
        let model = NoisePredictor::init(3, 1, 2, &[4], 4).unwrap();
        let mut shadow = EmaShadow::new(&model, 0.9).unwrap();
        let mut moved = model.clone();
        for arr in moved.param_arrays_mut() {
            for v in arr.iter_mut() {
                *v += 0.25;
            }
        }
        shadow.update(&moved);
        let schedule_params = ScheduleParams {
            t_steps: 10,
            beta_min: 1e-5,
            beta_max: 1e-2,
            slope: 6.0,
        };
        Checkpoint {
            kind: ModelKind::Cdm,
            feature_mode: FeatureMode::HsubMode,
            model: moved,
            shadow,
            schedule: schedule_params.realize().unwrap(),
            schedule_params,
            data_scaler: StandardScaler {
                mean: vec![1500.0],
                std: vec![800.0],
            },
            cond_scaler: Some(StandardScaler {
                mean: vec![10_000.0, 2000.0],
                std: vec![4000.0, 900.0],
            }),
            columns: vec!["P".into(), "G".into(), "CHF".into()],
            ema_mu: 0.9,
            sample_with_ema: true,
        }
    }

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("chfgen-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let ckpt = tiny_checkpoint();
        let path = tmp("roundtrip.ckpt");
        save(&ckpt, &path, Some("deadbeef")).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded, ckpt);
        // Sampling uses the restored checkpoint identically.
        let conds = Matrix::from_vec(2, 2, vec![9000.0, 1800.0, 12_000.0, 2600.0]);
        let a = chfgen_core::diffusion::sample_cdm(&ckpt, &conds, 5).unwrap();
        let b = chfgen_core::diffusion::sample_cdm(&loaded, &conds, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupted_t_steps_is_a_load_error() {
        let ckpt = tiny_checkpoint();
        let path = tmp("bad-t.ckpt");
        save(&ckpt, &path, Some("deadbeef")).unwrap();
        let text = std::fs::read(&path).unwrap();
        let swapped = String::from_utf8_lossy(&text).replace("t_steps 10", "t_steps 1");
        std::fs::write(&path, swapped.as_bytes()).unwrap();
        let err = load(&path).unwrap_err();
        assert_eq!(err.code(), "E_CHECKPOINT");
    }

    #[test]
    fn truncated_payload_is_a_load_error() {
        let ckpt = tiny_checkpoint();
        let path = tmp("short.ckpt");
        save(&ckpt, &path, Some("deadbeef")).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8);
        std::fs::write(&path, &bytes).unwrap();
        let err = load(&path).unwrap_err();
        assert_eq!(err.code(), "E_CHECKPOINT");
        assert!(err.render().starts_with("E_CHECKPOINT:"));
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let path = tmp("magic.ckpt");
        std::fs::write(&path, b"something else\n---\n").unwrap();
        assert!(load(&path).is_err());
    }
}
