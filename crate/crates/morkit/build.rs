fn main() {
    // LAPACK/BLAS routines come from the system OpenBLAS.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
