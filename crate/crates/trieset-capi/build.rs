fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    match cbindgen::generate(&crate_dir) {
        // Only touches the file when the content changed, so incremental
        // builds stay quiet. The result is committed; a read-only checkout
        // just keeps the committed copy.
        Ok(bindings) => {
            bindings.write_to_file(format!("{crate_dir}/include/trieset.h"));
        }
        Err(e) => println!("cargo:warning=header generation skipped: {e}"),
    }
}
