fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("SAFEPLAN_H".to_string()),
        cpp_compat: true,
        documentation: true,
        ..cbindgen::Config::default()
    };

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("failed to generate C header")
        .write_to_file(format!("{crate_dir}/include/safeplan.h"));

    println!("cargo:rerun-if-changed=src/lib.rs");
}
