use serde::Serialize;

use crate::args::{Cli, Command};

/// Everything that determines an output, embedded in every JSON and SVG document.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunConfig {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub poly: String,
    pub bits: u32,
    pub level: usize,
    pub max_den: Option<u64>,
    pub window: Option<(f64, f64)>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub extra: Vec<(String, String)>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let g = &cli.global;
        let mut c = RunConfig {
            tool: "betatile",
            version: env!("CARGO_PKG_VERSION"),
            command: String::new(),
            poly: g.poly.clone(),
            bits: g.bits,
            level: g.level,
            max_den: None,
            window: None,
            seed: None,
            samples: None,
            extra: Vec::new(),
        };
        match &cli.command {
            Command::Analyze { max_den } => {
                c.command = "analyze".into();
                c.max_den = Some(*max_den);
            }
            Command::Parry => c.command = "parry".into(),
            Command::Tiles(t) => {
                c.command = "tiles".into();
                c.window = t.window;
                c.extra = vec![
                    ("x".into(), t.x.clone()),
                    ("kind".into(), format!("{:?}", t.kind).to_lowercase()),
                    ("target".into(), format!("{:?}", t.target).to_lowercase()),
                    ("addr_depth".into(), t.addr_depth.unwrap_or(g.level).to_string()),
                    ("patch_depth".into(), t.patch_depth.to_string()),
                    ("translates".into(), t.translates.to_string()),
                ];
            }
            Command::BoundaryGraph => c.command = "boundary-graph".into(),
            Command::Gamma { method, max_den } => {
                c.command = "gamma".into();
                c.max_den = Some(*max_den);
                c.extra = vec![("method".into(), format!("{method:?}").to_lowercase())];
            }
            Command::Purper { x, y_depth, n_cap } => {
                c.command = "purper".into();
                c.extra = vec![
                    ("x".into(), x.clone().unwrap_or_default()),
                    ("y_depth".into(), y_depth.to_string()),
                    ("n_cap".into(), n_cap.to_string()),
                ];
            }
            Command::Natext { samples, window, seed } => {
                c.command = "natext".into();
                c.samples = Some(*samples);
                c.window = Some(*window);
                c.seed = Some(*seed);
            }
        }
        c
    }

    /// One-line JSON used as the reproducibility header.
    pub fn header(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
