//! Line-oriented `key = value` run configuration.
//!
//! ```text
//! # cesium D2, far blue coupling
//! coupling_detuning = 812
//! grid_start = -1500
//! ```
//!
//! Keys left out take the preset values. Unknown keys are errors. Values are
//! written with the shortest representation that parses back to the same
//! bits, so writing and re-reading a configuration is lossless.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{
    cesium_d2_preset, default_probe, validate, AtomSpec, EnsembleSpec, FieldSpec, ScanGrid,
    ValidConfig,
};
use crate::num::Real;

pub const KEYS: [&str; 15] = [
    "gamma31",
    "gamma32",
    "gamma12",
    "doppler_fwhm",
    "p1_init",
    "p2_init",
    "probe_rabi",
    "probe_linewidth",
    "coupling_rabi",
    "coupling_detuning",
    "coupling_linewidth",
    "grid_start",
    "grid_stop",
    "grid_n",
    "od0",
];

/// Optical depth giving ~52 % peak absorption for the preset without
/// coupling (normalized peak absorption ≈ 0.00692).
pub const DEFAULT_OD0: f64 = 106.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig<T> {
    pub atom: AtomSpec<T>,
    pub ensemble: EnsembleSpec<T>,
    pub probe: FieldSpec<T>,
    pub coupling: FieldSpec<T>,
    pub grid_start: T,
    pub grid_stop: T,
    pub grid_n: usize,
    /// Optical depth at unit normalized absorption.
    pub od0: T,
}

impl<T: Real> Default for RunConfig<T> {
    fn default() -> Self {
        let (atom, ensemble, coupling) = cesium_d2_preset();
        Self {
            atom,
            ensemble,
            probe: default_probe(),
            coupling,
            grid_start: T::lit(-1500.0),
            grid_stop: T::lit(1500.0),
            grid_n: 3001,
            od0: T::lit(DEFAULT_OD0),
        }
    }
}

fn parse_num<T: Real>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("`{key}`: cannot parse `{value}` as a number"))
}

fn parse_opt<T: Real>(key: &str, value: &str) -> std::result::Result<Option<T>, String> {
    if value.eq_ignore_ascii_case("none") || value.is_empty() {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

impl<T: Real> RunConfig<T> {
    /// Parses a configuration file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|message| Error::Config {
                    line: idx + 1,
                    message,
                })?;
        }
        Ok(cfg)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "gamma31" => self.atom.gamma31 = parse_num(key, value)?,
            "gamma32" => self.atom.gamma32 = parse_num(key, value)?,
            "gamma12" => self.atom.gamma12 = parse_num(key, value)?,
            "doppler_fwhm" => self.ensemble.doppler_fwhm = parse_num(key, value)?,
            "p1_init" => self.ensemble.p1_init = parse_num(key, value)?,
            "p2_init" => self.ensemble.p2_init = parse_num(key, value)?,
            "probe_rabi" => self.probe.rabi = parse_num(key, value)?,
            "probe_linewidth" => self.probe.linewidth = parse_opt(key, value)?,
            "coupling_rabi" => self.coupling.rabi = parse_num(key, value)?,
            "coupling_detuning" => self.coupling.detuning = parse_num(key, value)?,
            "coupling_linewidth" => self.coupling.linewidth = parse_opt(key, value)?,
            "grid_start" => self.grid_start = parse_num(key, value)?,
            "grid_stop" => self.grid_stop = parse_num(key, value)?,
            "grid_n" => {
                self.grid_n = value
                    .parse()
                    .map_err(|_| format!("`grid_n`: cannot parse `{value}` as a count"))?
            }
            "od0" => self.od0 = parse_num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order; later ones win.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o.split_once('=').ok_or_else(|| Error::Config {
                line: 0,
                message: format!("override `{o}` is not `key=value`"),
            })?;
            self.set(k.trim(), v.trim())
                .map_err(|message| Error::Config { line: 0, message })?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<ScanGrid<T>> {
        ScanGrid::new(self.grid_start, self.grid_stop, self.grid_n)
    }

    pub fn validated(&self) -> Result<ValidConfig<T>> {
        let cfg = validate(self.atom, self.ensemble, self.probe, self.coupling)?;
        self.grid()?;
        if !(self.od0 >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "od0 must be >= 0, got {}",
                self.od0
            )));
        }
        Ok(cfg)
    }

    /// Value of `key` as written to a config file; `None` for unset optionals.
    pub fn get(&self, key: &str) -> Option<String> {
        let s = |x: T| Some(x.to_string());
        match key {
            "gamma31" => s(self.atom.gamma31),
            "gamma32" => s(self.atom.gamma32),
            "gamma12" => s(self.atom.gamma12),
            "doppler_fwhm" => s(self.ensemble.doppler_fwhm),
            "p1_init" => s(self.ensemble.p1_init),
            "p2_init" => s(self.ensemble.p2_init),
            "probe_rabi" => s(self.probe.rabi),
            "probe_linewidth" => self.probe.linewidth.map(|x| x.to_string()),
            "coupling_rabi" => s(self.coupling.rabi),
            "coupling_detuning" => s(self.coupling.detuning),
            "coupling_linewidth" => self.coupling.linewidth.map(|x| x.to_string()),
            "grid_start" => s(self.grid_start),
            "grid_stop" => s(self.grid_stop),
            "grid_n" => Some(self.grid_n.to_string()),
            "od0" => s(self.od0),
            _ => None,
        }
    }

    /// Every key with its value, `prefix` prepended to each line.
    pub fn write_with_prefix(&self, prefix: &str) -> String {
        let mut out = String::new();
        for key in KEYS {
            match self.get(key) {
                Some(v) => writeln!(out, "{prefix}{key} = {v}").unwrap(),
                None => writeln!(out, "{prefix}{key} = none").unwrap(),
            }
        }
        out
    }

    pub fn to_config_string(&self) -> String {
        self.write_with_prefix("")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::<f64>::default();
        let back = RunConfig::<f64>::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg =
            RunConfig::<f64>::parse("# header\n\n  coupling_detuning = 812 \n#x=1\n").unwrap();
        assert_eq!(cfg.coupling.detuning, 812.0);
    }

    #[test]
    fn unknown_key_is_error() {
        let err = RunConfig::<f64>::parse("gamma31 = 1\nfoo = 2\n").unwrap_err();
        assert_eq!(
            err,
            Error::Config {
                line: 2,
                message: "unknown key `foo`".into()
            }
        );
    }

    #[test]
    fn malformed_lines() {
        assert!(RunConfig::<f64>::parse("gamma31 1").is_err());
        assert!(RunConfig::<f64>::parse("gamma31 = abc").is_err());
        assert!(RunConfig::<f64>::parse("grid_n = 2.5").is_err());
    }

    #[test]
    fn linewidths_optional() {
        let cfg =
            RunConfig::<f64>::parse("probe_linewidth = 2\ncoupling_linewidth = none").unwrap();
        assert_eq!(cfg.probe.linewidth, Some(2.0));
        assert_eq!(cfg.coupling.linewidth, None);
        let v = cfg.validated().unwrap();
        assert_eq!(v.combined_linewidth(), Some(2.0));
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = RunConfig::<f64>::parse("coupling_detuning = 100").unwrap();
        cfg.apply_overrides(&["coupling_detuning=812", "od0 = 3"])
            .unwrap();
        assert_eq!(cfg.coupling.detuning, 812.0);
        assert_eq!(cfg.od0, 3.0);
        assert!(cfg.apply_overrides(&["nonsense"]).is_err());
    }

    #[test]
    fn invalid_grid_rejected_on_validation() {
        let cfg = RunConfig::<f64>::parse("grid_start = 10\ngrid_stop = 0").unwrap();
        assert!(cfg.validated().is_err());
    }

    #[test]
    fn every_key_is_settable() {
        let mut cfg = RunConfig::<f64>::default();
        for k in KEYS {
            cfg.set(k, if k == "grid_n" { "11" } else { "1" }).unwrap();
        }
    }

    proptest! {
        #[test]
        fn arbitrary_values_round_trip_bitwise(
            g31 in 0.0f64..10.0, g12 in 0.0f64..1.0, d in 1.0f64..2000.0,
            p1 in 0.0f64..1.0, dc in -3000.0f64..3000.0, lw in proptest::option::of(0.0f64..5.0),
            n in 2usize..100000, od in 0.0f64..1000.0,
        ) {
            let mut cfg = RunConfig::<f64>::default();
            cfg.atom.gamma31 = g31;
            cfg.atom.gamma12 = g12;
            cfg.ensemble.doppler_fwhm = d;
            cfg.ensemble.p1_init = p1;
            cfg.ensemble.p2_init = 1.0 - p1;
            cfg.coupling.detuning = dc;
            cfg.probe.linewidth = lw;
            cfg.grid_n = n;
            cfg.od0 = od;
            let back = RunConfig::<f64>::parse(&cfg.to_config_string()).unwrap();
            prop_assert_eq!(back.atom.gamma31.to_bits(), g31.to_bits());
            prop_assert_eq!(back.ensemble.p2_init.to_bits(), (1.0 - p1).to_bits());
            prop_assert_eq!(back.coupling.detuning.to_bits(), dc.to_bits());
            prop_assert_eq!(back, cfg);
        }
    }
}
