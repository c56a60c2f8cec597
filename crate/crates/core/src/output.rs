//! Run artifacts: timeseries CSV, extremes JSON, Monte Carlo histograms and
//! a manifest that is enough to regenerate all of them.
//!
//! Timeseries columns, in order:
//! `t_s, z_km, d_p_km, d_m_km, phi_Tm_rad, G_Tp_dB, G_Rp_dB, G_Tm_dB,
//! G_Rm_dB, P_Hl_W, P_Hp_W, P_Hm_W, vis_fso, vis_lsp, vis_mal`.
//! Gains are in dBi, powers in watts. Power fields are empty outside the
//! common window. Numbers carry 9 significant digits; flags are 0 or 1.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::chain::{
    extremes, max_end_to_end, mc_in_windows, path_lengths, ChainSample, EndToEnd, Extreme,
    ExtremeCase, ExtremeReport, LinkWindows, McRun, McTarget, Scenario,
};
use crate::config;
use crate::error::Result;
use crate::pointing::McStats;
use crate::rf::to_db;

pub const TIMESERIES_HEADER: [&str; 15] = [
    "t_s",
    "z_km",
    "d_p_km",
    "d_m_km",
    "phi_Tm_rad",
    "G_Tp_dB",
    "G_Rp_dB",
    "G_Tm_dB",
    "G_Rm_dB",
    "P_Hl_W",
    "P_Hp_W",
    "P_Hm_W",
    "vis_fso",
    "vis_lsp",
    "vis_mal",
];

/// The Monte Carlo runs written by [`write_run_artifacts`]: each extreme
/// instant paired with the quantity it matters for.
pub const REFERENCE_MC_RUNS: [(ExtremeCase, McTarget); 6] = [
    (ExtremeCase::ZMin, McTarget::Llo),
    (ExtremeCase::ZMax, McTarget::Llo),
    (ExtremeCase::DpMin, McTarget::Lsp),
    (ExtremeCase::DpMax, McTarget::Lsp),
    (ExtremeCase::GtmMax, McTarget::Malapert),
    (ExtremeCase::GtmMin, McTarget::Malapert),
];

/// Formats like C's `%.9g`.
pub fn sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn opt(p: Option<f64>) -> String {
    p.map(sig9).unwrap_or_default()
}

pub fn timeseries_record(s: &ChainSample) -> [String; 15] {
    [
        sig9(s.t),
        sig9(s.z),
        sig9(s.d_p),
        sig9(s.d_m),
        sig9(s.phi_tm),
        sig9(to_db(s.g_tp)),
        sig9(to_db(s.g_rp)),
        sig9(to_db(s.g_tm)),
        sig9(to_db(s.g_rm)),
        opt(s.p_hl),
        opt(s.p_hp),
        opt(s.p_hm),
        flag(s.vis_fso).into(),
        flag(s.vis_lsp).into(),
        flag(s.vis_mal).into(),
    ]
}

pub fn write_timeseries_to<W: Write>(samples: &[ChainSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMESERIES_HEADER)?;
    for s in samples {
        w.write_record(timeseries_record(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timeseries(samples: &[ChainSample], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_timeseries_to(samples, std::io::BufWriter::new(file))
}

pub fn write_histogram(stats: &McStats, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_center", "density"])?;
    for b in &stats.histogram {
        w.write_record([sig9(b.center), sig9(b.density)])?;
    }
    w.flush()?;
    Ok(())
}

/// [`Extreme`] with the gain value also given in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainExtreme {
    pub t: f64,
    pub gain_db: f64,
    pub p_hl: f64,
    pub p_hp: f64,
    pub p_hm: f64,
}

impl From<Extreme> for GainExtreme {
    fn from(e: Extreme) -> Self {
        GainExtreme {
            t: e.t,
            gain_db: to_db(e.value),
            p_hl: e.p_hl,
            p_hp: e.p_hp,
            p_hm: e.p_hm,
        }
    }
}

/// Extremes JSON body. Ranges in km, powers in W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremesDocument {
    pub contact: bool,
    pub windows: LinkWindows,
    pub z_min: Option<Extreme>,
    pub z_max: Option<Extreme>,
    pub d_p_min: Option<Extreme>,
    pub d_p_max: Option<Extreme>,
    pub g_tm_min: Option<GainExtreme>,
    pub g_tm_max: Option<GainExtreme>,
    pub p_hl_min: Option<Extreme>,
    pub p_hl_max: Option<Extreme>,
    pub p_hp_max: Option<Extreme>,
    pub p_hm_max: Option<Extreme>,
    pub end_to_end_primary: Option<EndToEnd>,
    pub end_to_end_secondary: Option<EndToEnd>,
    pub near_field_samples: usize,
}

impl ExtremesDocument {
    pub fn new(windows: &LinkWindows, samples: &[ChainSample], near_field_samples: usize) -> Self {
        let r: Option<ExtremeReport> = extremes(samples);
        let e2e = max_end_to_end(&path_lengths(samples));
        ExtremesDocument {
            contact: r.is_some(),
            windows: windows.clone(),
            z_min: r.map(|r| r.z_min),
            z_max: r.map(|r| r.z_max),
            d_p_min: r.map(|r| r.d_p_min),
            d_p_max: r.map(|r| r.d_p_max),
            g_tm_min: r.map(|r| r.g_tm_min.into()),
            g_tm_max: r.map(|r| r.g_tm_max.into()),
            p_hl_min: r.map(|r| r.p_hl_min),
            p_hl_max: r.map(|r| r.p_hl_max),
            p_hp_max: r.map(|r| r.p_hp_max),
            p_hm_max: r.map(|r| r.p_hm_max),
            end_to_end_primary: e2e.map(|e| e.0),
            end_to_end_secondary: e2e.map(|e| e.1),
            near_field_samples,
        }
    }

    /// Plain-text table for terminals.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let common: f64 = self.windows.common.iter().map(|w| w.duration()).sum();
        out.push_str(&format!("common window        {:>10.1} s\n", common));
        if !self.contact {
            out.push_str("no contact: the three links are never visible together\n");
            return out;
        }
        let row = |name: &str, e: &Option<Extreme>, unit: &str| -> String {
            let e = e.expect("contact");
            format!(
                "{name:<20} {:>14} {unit:<3} t = {:>7.0} s  P_Hl = {:>12} W  P_Hp = {:>12} W  P_Hm = {:>12} W\n",
                sig9(e.value),
                e.t,
                sig9(e.p_hl),
                sig9(e.p_hp),
                sig9(e.p_hm)
            )
        };
        let grow = |name: &str, e: &Option<GainExtreme>| -> String {
            let e = e.expect("contact");
            format!(
                "{name:<20} {:>14} dB  t = {:>7.0} s  P_Hl = {:>12} W  P_Hp = {:>12} W  P_Hm = {:>12} W\n",
                sig9(e.gain_db),
                e.t,
                sig9(e.p_hl),
                sig9(e.p_hp),
                sig9(e.p_hm)
            )
        };
        out.push_str(&row("z min", &self.z_min, "km"));
        out.push_str(&row("z max", &self.z_max, "km"));
        out.push_str(&row("d_p min", &self.d_p_min, "km"));
        out.push_str(&row("d_p max", &self.d_p_max, "km"));
        out.push_str(&grow("G_Tm min", &self.g_tm_min));
        out.push_str(&grow("G_Tm max", &self.g_tm_max));
        out.push_str(&row("P_Hl min", &self.p_hl_min, "W"));
        out.push_str(&row("P_Hl max", &self.p_hl_max, "W"));
        out.push_str(&row("P_Hp max", &self.p_hp_max, "W"));
        out.push_str(&row("P_Hm max", &self.p_hm_max, "W"));
        for (name, e) in [
            ("z + d_p max", &self.end_to_end_primary),
            ("z + d_m max", &self.end_to_end_secondary),
        ] {
            let e = e.expect("contact");
            out.push_str(&format!(
                "{name:<20} {:>14} km  t = {:>7.0} s  delay = {} ms\n",
                sig9(e.length_km),
                e.t,
                sig9(e.light_delay_s * 1e3)
            ));
        }
        if self.near_field_samples > 0 {
            out.push_str(&format!(
                "warning: {} samples inside the RF near field\n",
                self.near_field_samples
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub case: ExtremeCase,
    pub target: McTarget,
    pub t: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub aligned: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

/// Everything needed to regenerate a run: the full configuration text, and
/// whether Monte Carlo runs were included. File digests let a rerun be
/// checked byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: String,
    pub monte_carlo: bool,
    pub runs: Vec<McRecord>,
    pub files: Vec<FileDigest>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        config::from_str(&self.config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArtifactOptions {
    /// Include the reference Monte Carlo runs and their histograms.
    pub monte_carlo: bool,
}

impl Default for ArtifactOptions {
    fn default() -> Self {
        ArtifactOptions { monte_carlo: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub extremes: ExtremesDocument,
    pub mc_runs: Vec<McRun>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs the chain and writes `timeseries.csv`, `extremes.json`, one
/// `mc_<case>_<target>.csv` histogram per reference run, and
/// `manifest.json` into `out_dir`.
pub fn write_run_artifacts(
    scenario: &Scenario,
    out_dir: impl AsRef<Path>,
    opts: ArtifactOptions,
) -> Result<RunArtifacts> {
    let dir = out_dir.as_ref().to_path_buf();
    std::fs::create_dir_all(&dir)?;
    let config_text = config::to_toml(scenario)?;

    let ts = crate::chain::run_timeseries(scenario)?;
    let mut files = Vec::new();
    let mut record = |name: &str| -> Result<()> {
        let bytes = std::fs::read(dir.join(name))?;
        files.push(FileDigest {
            name: name.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    };

    write_timeseries(&ts.samples, dir.join("timeseries.csv"))?;
    record("timeseries.csv")?;

    let doc = ExtremesDocument::new(&ts.windows, &ts.samples, ts.near_field_samples);
    std::fs::write(
        dir.join("extremes.json"),
        serde_json::to_string_pretty(&doc)? + "\n",
    )?;
    record("extremes.json")?;

    let mut runs = Vec::new();
    let mut mc_runs = Vec::new();
    if opts.monte_carlo {
        if let Some(report) = extremes(&ts.samples) {
            let cfg = scenario.monte_carlo.config();
            for (case, target) in REFERENCE_MC_RUNS {
                let t = report.get(case).t;
                log::info!(
                    "Monte Carlo {case}/{target} at t = {t} s, n = {}",
                    cfg.n_samples
                );
                let run = mc_in_windows(scenario, &ts.windows, t, &cfg, target)?;
                let name = format!("mc_{case}_{target}.csv");
                write_histogram(&run.stats, dir.join(&name))?;
                record(&name)?;
                runs.push(McRecord {
                    case,
                    target,
                    t,
                    n_samples: cfg.n_samples,
                    seed: cfg.seed,
                    aligned: run.aligned,
                    mean: run.stats.mean,
                    std_dev: run.stats.std_dev,
                    min: run.stats.min,
                    max: run.stats.max,
                    histogram: name,
                });
                mc_runs.push(run);
            }
        }
    }

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: scenario.monte_carlo.seed,
        config_sha256: sha256_hex(config_text.as_bytes()),
        config: config_text,
        monte_carlo: opts.monte_carlo,
        runs,
        files,
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(RunArtifacts {
        dir,
        manifest,
        extremes: doc,
        mc_runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_matches_printf() {
        // expected strings from printf("%.9g")
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (331940.123456, "331940.123"),
            (1.0 / 3.0, "0.333333333"),
            (999999999.5, "1e+09"),
            (61.8872087498785, "61.8872087"),
            (-39.92, "-39.92"),
            (6.606e-8, "6.606e-08"),
        ];
        for (x, want) in cases {
            assert_eq!(sig9(x), want, "{x}");
        }
    }

    #[test]
    fn empty_timeseries_is_header_only() {
        let mut buf = Vec::new();
        write_timeseries_to(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            TIMESERIES_HEADER.join(",") + "\n"
        );
    }
}
