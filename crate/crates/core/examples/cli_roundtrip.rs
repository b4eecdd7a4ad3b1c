//! Driving the command layer from a config document: solve, verify the
//! stored solution, then break one value and verify again.

use std::path::PathBuf;

use plap_radial::cli::{cmd_solve, cmd_verify, CommonArgs, VerifyArgs};

const CONFIG: &str = r#"{
  "problem": {"N": 3, "p": [2], "a": ["1"], "f": ["u1"]},
  "grid": {"R": 5, "M": 1000},
  "beta": 1
}"#;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("plap-radial-roundtrip-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("sinh.json");
    std::fs::write(&config, CONFIG)?;
    let common = CommonArgs {
        config,
        out: Some(dir.join("out")),
    };

    let solved = cmd_solve(&common)?;
    println!("solve  exit {}: {}", solved.code, solved.lines.join("; "));

    let verify = VerifyArgs {
        common: common.clone(),
        solution: None,
    };
    let checked = cmd_verify(&verify)?;
    println!("verify exit {}: {}", checked.code, checked.lines[0]);

    let csv: PathBuf = dir.join("out").join("solution_1.csv");
    let text = std::fs::read_to_string(&csv)?;
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cells: Vec<String> = lines[500].split(',').map(str::to_string).collect();
    cells[1] = format!("{:?}", cells[1].parse::<f64>()? + 0.1);
    lines[500] = cells.join(",");
    let broken = dir.join("broken.csv");
    std::fs::write(&broken, lines.join("\n") + "\n")?;
    let rejected = cmd_verify(&VerifyArgs {
        common,
        solution: Some(broken),
    })?;
    println!("perturbed exit {}: {}", rejected.code, rejected.lines[1]);

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
