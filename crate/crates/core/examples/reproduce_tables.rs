//! Regenerate the order 2-5 tables for the circle/line system through the
//! command-line entry point, then print the first rows of each.
//!
//! cargo run --example reproduce_tables -- [out-dir]

use invseries::cli::{run, table_file_name};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("invseries-tables"));
    std::fs::create_dir_all(&dir).expect("create output directory");
    let args = [
        "invseries",
        "tables",
        "--out-dir",
        dir.to_str().expect("utf-8 path"),
    ];
    let code = run(args, &mut std::io::stdout(), &mut std::io::stderr());
    if code != 0 {
        std::process::exit(code);
    }
    for k in 2..=5 {
        let text = std::fs::read_to_string(dir.join(table_file_name(k))).expect("table file");
        println!();
        for line in text.lines().take(9) {
            let cells: Vec<&str> = line.split('|').map(str::trim).collect();
            if cells.len() > 4 {
                println!("{:>4}  {:<55} {}", cells[1], cells[2], cells[4]);
            } else if !line.is_empty() {
                println!("{line}");
            }
        }
    }
}
