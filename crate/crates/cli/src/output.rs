//! Comma-separated result tables with a `#` header block, and snapshots.
//!
//! Every file starts with the effective config between `# --- config ---`
//! and `# --- end config ---`; [`extract_config`] recovers it so a run can be
//! repeated from its own output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use springchain::model::{AngleProfile, ChainState, Spin};
use springchain::sweep::SweepRecord;
use springchain::vec3::Vec3;

use crate::config::ExperimentConfig;
use crate::CliError;

const CONFIG_BEGIN: &str = "# --- config ---";
const CONFIG_END: &str = "# --- end config ---";

pub fn header(title: &str, cfg: &ExperimentConfig) -> String {
    let mut s = format!("# springchain {title}\n# fingerprint = {}\n{CONFIG_BEGIN}\n", cfg.fingerprint());
    for line in cfg.to_toml().lines() {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str(CONFIG_END);
    s.push('\n');
    s
}

/// The config echoed into an output file's header.
pub fn extract_config(text: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| *l != CONFIG_BEGIN);
    lines.next()?;
    let mut out = String::new();
    for l in lines {
        if l == CONFIG_END {
            return Some(out);
        }
        out.push_str(l.strip_prefix("# ").or_else(|| l.strip_prefix('#'))?);
        out.push('\n');
    }
    None
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn sweep_columns(n: usize) -> String {
    let mut s = String::from("theta_a_deg,torque,alpha_deg,chirality,equilibration_time,steps");
    for i in 1..=n {
        let _ = write!(s, ",theta_{i}_deg");
    }
    s
}

pub fn sweep_row(r: &SweepRecord) -> String {
    let mut s = format!(
        "{},{},{},{},{},{}",
        r.theta_a.to_degrees(),
        r.torque,
        r.mag_angle.to_degrees(),
        r.chirality,
        r.equilibration_time,
        r.steps
    );
    for t in &r.profile.theta {
        let _ = write!(s, ",{}", t.to_degrees());
    }
    s
}

/// Sweep table: one row per record, columns from [`sweep_columns`].
/// Non-converged records are listed in a trailing comment.
pub fn format_sweep(title: &str, cfg: &ExperimentConfig, n_layers: usize, records: &[SweepRecord]) -> String {
    let mut s = header(title, cfg);
    s.push_str("# units: degrees, erg/cm^2 (torque), reduced time\n");
    s.push_str(&sweep_columns(n_layers));
    s.push('\n');
    for r in records {
        s.push_str(&sweep_row(r));
        s.push('\n');
    }
    s.push_str(&non_converged_note(records));
    s
}

pub fn non_converged_note(records: &[SweepRecord]) -> String {
    let bad: Vec<String> = records
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("{}", r.theta_a.to_degrees()))
        .collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!("# not converged at theta_a_deg: {}\n", bad.join(" "))
    }
}

pub fn write_sweep(path: &Path, title: &str, cfg: &ExperimentConfig, n_layers: usize, records: &[SweepRecord]) -> Result<(), CliError> {
    write_file(path, &format_sweep(title, cfg, n_layers, records))
}

/// Per-layer table of one equilibrium.
pub fn format_profile(cfg: &ExperimentConfig, profile: &AngleProfile, state: &ChainState) -> String {
    let mut s = header("profile", cfg);
    s.push_str("layer,theta_deg,phi_deg,mx,my,mz\n");
    for (i, ((t, p), sp)) in profile.theta.iter().zip(&profile.phi).zip(&state.spins).enumerate() {
        let v = sp.vec();
        let _ = writeln!(s, "{},{},{},{},{},{}", i + 1, t.to_degrees(), p.to_degrees(), v.x, v.y, v.z);
    }
    s
}

pub fn write_profile(path: &Path, cfg: &ExperimentConfig, profile: &AngleProfile, state: &ChainState) -> Result<(), CliError> {
    write_file(path, &format_profile(cfg, profile, state))
}

/// A chain state together with the conditions it was relaxed under.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub fingerprint: String,
    /// Oersted.
    pub h_a: f64,
    /// Radians.
    pub theta_a: f64,
    pub residual: f64,
    pub state: ChainState,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Snapshot {
    pub fn to_text(&self) -> String {
        let mut s = String::from("# springchain snapshot\n");
        let _ = writeln!(s, "# fingerprint = {}", self.fingerprint);
        let _ = writeln!(s, "# H_a = {}", num(self.h_a));
        let _ = writeln!(s, "# theta_a = {}", num(self.theta_a));
        let _ = writeln!(s, "# time = {}", num(self.state.time));
        let _ = writeln!(s, "# residual = {}", num(self.residual));
        s.push_str("layer,mx,my,mz\n");
        for (i, sp) in self.state.spins.iter().enumerate() {
            let v = sp.vec();
            let _ = writeln!(s, "{},{},{},{}", i + 1, num(v.x), num(v.y), num(v.z));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Snapshot, CliError> {
        let bad = |what: &str| CliError::Config(format!("snapshot: {what}"));
        let mut meta = std::collections::HashMap::new();
        let mut spins = Vec::new();
        let mut seen_columns = false;
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                if let Some((k, v)) = rest.split_once(" = ") {
                    meta.insert(k.to_string(), v.to_string());
                }
                continue;
            }
            if !seen_columns {
                if line != "layer,mx,my,mz" {
                    return Err(bad("missing column line"));
                }
                seen_columns = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(&format!("malformed row `{line}`")));
            }
            let p = |x: &str| x.parse::<f64>().map_err(|_| bad(&format!("bad number `{x}`")));
            let v = Vec3::new(p(f[1])?, p(f[2])?, p(f[3])?);
            spins.push(Spin::restore(v).map_err(|e| bad(&format!("layer {}: {e}", f[0])))?);
        }
        let get = |k: &str| -> Result<f64, CliError> {
            meta.get(k)
                .ok_or_else(|| bad(&format!("missing `{k}`")))?
                .parse::<f64>()
                .map_err(|_| bad(&format!("bad `{k}`")))
        };
        let mut state = ChainState::new(spins);
        state.time = get("time")?;
        Ok(Snapshot {
            fingerprint: meta.get("fingerprint").cloned().ok_or_else(|| bad("missing `fingerprint`"))?,
            h_a: get("H_a")?,
            theta_a: get("theta_a")?,
            residual: get("residual")?,
            state,
        })
    }
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<(), CliError> {
    write_file(path, &snap.to_text())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, CliError> {
    Snapshot::from_text(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg() -> ExperimentConfig {
        parse_config("[stack]\nn_hard = 2\nn_soft = 2\n[experiment]\nkind = \"sweep\"\nH_a = 4800\n").unwrap()
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let text = format_sweep("sweep", &cfg(), 4, &[]);
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec![sweep_columns(4).as_str()]);
        assert_eq!(sweep_columns(4).split(',').count(), 6 + 4);
    }

    #[test]
    fn header_carries_a_reparsable_config() {
        let c = cfg();
        let text = format_sweep("sweep", &c, 4, &[]);
        let echoed = extract_config(&text).unwrap();
        assert_eq!(parse_config(&echoed).unwrap(), c);
    }

    #[test]
    fn snapshot_text_round_trips_exactly() {
        let spins = vec![
            Spin::from_angles(0.1, 0.0),
            Spin::from_angles(1.0 / 3.0, 1e-7),
            Spin::from_angles(-2.9, -0.2),
        ];
        let mut state = ChainState::new(spins);
        state.time = 0.1 + 0.2;
        let snap = Snapshot {
            fingerprint: "abc".into(),
            h_a: 4800.0,
            theta_a: 301.55f64.to_radians(),
            residual: 3.3e-9,
            state,
        };
        let text = snap.to_text();
        let back = Snapshot::from_text(&text).unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn snapshot_rejects_garbage() {
        assert!(Snapshot::from_text("layer,mx,my,mz\n1,2,0,0\n").is_err());
        assert!(Snapshot::from_text("nonsense\n").is_err());
    }
}
