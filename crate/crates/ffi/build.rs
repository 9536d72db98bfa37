use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml is readable");

    let header = crate_dir.join("include").join("adia_check.h");
    std::fs::create_dir_all(header.parent().unwrap()).unwrap();
    cbindgen::generate_with_config(&crate_dir, config)
        .expect("header generation")
        .write_to_file(&header);
}
