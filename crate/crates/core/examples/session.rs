//! Drives the subcommands through the library, with a level cache in a
//! temporary directory.

use superakns::cli::{derive, verify, Format, SessionConfig, VerifyTarget};

fn main() {
    let dir = std::env::temp_dir().join("superakns-session-example");
    let config = SessionConfig {
        n_max: 3,
        format: Format::Json,
        cache_dir: Some(dir.clone()),
        ..SessionConfig::default()
    };
    for _ in 0..2 {
        let out = derive(&config).unwrap();
        println!("derive: exit {} {:?}", out.exit_code(), out.notes);
    }
    let out = verify(&config, VerifyTarget::ZeroCurvature, 2).unwrap();
    println!(
        "{}",
        out.render(&SessionConfig {
            format: Format::Text,
            ..config
        })
        .unwrap()
    );
    let _ = std::fs::remove_dir_all(dir);
}
