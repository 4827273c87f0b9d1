use std::process::ExitCode;

use clap::Parser;

use betatile_cli::commands::error_json;
use betatile_cli::{run, Cli, RunConfig};

fn write(path: &std::path::Path, body: &str) -> std::io::Result<()> {
    std::fs::write(path, body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = RunConfig::from_cli(&cli);
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&error_json(&config, &e)).unwrap_or_default());
            return ExitCode::from(1);
        }
    };
    let body = serde_json::to_string_pretty(&out.json).expect("report serializes") + "\n";
    let g = &cli.global;
    let res = (|| -> std::io::Result<()> {
        match &g.json {
            Some(p) => write(p, &body)?,
            None => print!("{body}"),
        }
        if let (Some(p), Some(s)) = (&g.svg, &out.svg) {
            write(p, s)?;
        }
        if let (Some(p), Some(s)) = (&g.dot, &out.dot) {
            write(p, s)?;
        }
        Ok(())
    })();
    if let Err(e) = res {
        let e = betatile::Error::Io(e.to_string());
        eprintln!("{}", serde_json::to_string_pretty(&error_json(&config, &e)).unwrap_or_default());
        return ExitCode::from(1);
    }
    ExitCode::from(out.exit_code as u8)
}
