use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::ConfigError;

/// Runtime parameters of the tile service.
///
/// Read from a `key=value` file; blank lines and `#` comments are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct ServiceConfig {
    pub workers: usize,
    /// Row-parallel threads used for each tile.
    pub threads_per_worker: usize,
    pub result_ttl: Duration,
    pub result_capacity: usize,
    /// Pending tasks beyond this are refused with 503.
    pub queue_capacity: usize,
    /// When off, every request that is not in flight renders anew.
    pub cache_enabled: bool,
    pub listen: IpAddr,
    pub port: u16,
    pub pattern_dir: Option<PathBuf>,
    /// Catalog directory; datasets stay in memory when unset.
    pub data_dir: Option<PathBuf>,
    pub max_upload_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            workers: 4,
            threads_per_worker: 1,
            result_ttl: Duration::from_secs(300),
            result_capacity: 4096,
            queue_capacity: 4096,
            cache_enabled: true,
            listen: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            pattern_dir: None,
            data_dir: None,
            max_upload_bytes: 512 << 20,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "on" | "yes" => Ok(true),
        "0" | "false" | "off" | "no" => Ok(false),
        _ => Err(ConfigError::Value { key: key.into(), value: v.into() }),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::Value { key: key.into(), value: v.into() })
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = ServiceConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax(n + 1))?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "workers" => self.workers = parse_num(key, v)?,
            "threads_per_worker" => self.threads_per_worker = parse_num(key, v)?,
            "result_ttl" => {
                let secs: f64 = parse_num(key, v)?;
                self.result_ttl = Duration::try_from_secs_f64(secs)
                    .map_err(|_| ConfigError::Value { key: key.into(), value: v.into() })?;
            }
            "result_capacity" => self.result_capacity = parse_num(key, v)?,
            "queue_capacity" => self.queue_capacity = parse_num(key, v)?,
            "cache" => self.cache_enabled = parse_bool(key, v)?,
            "listen" => self.listen = parse_num(key, v)?,
            "port" => self.port = parse_num(key, v)?,
            "pattern_dir" => self.pattern_dir = Some(PathBuf::from(v)),
            "data_dir" => self.data_dir = Some(PathBuf::from(v)),
            "max_upload_mb" => self.max_upload_bytes = parse_num::<usize>(key, v)? << 20,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("workers", self.workers),
            ("threads_per_worker", self.threads_per_worker),
            ("result_capacity", self.result_capacity),
            ("queue_capacity", self.queue_capacity),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(ConfigError::Value { key: key.into(), value: "0".into() });
            }
        }
        Ok(())
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.listen, self.port)
    }
}
