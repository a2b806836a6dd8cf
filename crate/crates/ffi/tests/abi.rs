use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use gwldp_ffi::*;

const PRODUCT: &str = r#"{
    "types": ["a", "b"],
    "root": {"a": 0.5, "b": 0.5},
    "law": {"kary": 2},
    "pair": {"a": {"a": 0.7, "b": 0.3}, "b": {"a": 0.4, "b": 0.6}}
}"#;

fn last_error() -> String {
    unsafe { CStr::from_ptr(gwldp_last_error()) }.to_string_lossy().into_owned()
}

fn model(json: &str) -> Result<*mut GwldpModel, (GwldpStatus, String)> {
    let text = CString::new(json).unwrap();
    let mut handle = ptr::null_mut();
    match unsafe { gwldp_model_from_json(text.as_ptr(), &mut handle) } {
        GwldpStatus::Ok => Ok(handle),
        s => {
            assert!(handle.is_null());
            Err((s, last_error()))
        }
    }
}

#[test]
fn model_lifecycle_and_queries() {
    let m = model(PRODUCT).unwrap();
    let mut k = 0usize;
    let mut rho = 0.0;
    unsafe {
        assert_eq!(gwldp_model_num_types(m, &mut k), GwldpStatus::Ok);
        assert_eq!(gwldp_model_rho(m, &mut rho), GwldpStatus::Ok);
        gwldp_model_free(m);
        gwldp_model_free(ptr::null_mut());
    }
    assert_eq!(k, 2);
    assert!((rho - 1.0).abs() < 1e-12);
    assert_eq!(last_error(), "");
}

#[test]
fn size_law_is_catalan() {
    let m = model(PRODUCT).unwrap();
    let mut buf = [0.0f64; 7];
    unsafe {
        assert_eq!(gwldp_size_law(m, 7, buf.as_mut_ptr(), buf.len()), GwldpStatus::Ok);
        assert_eq!(gwldp_size_law(m, 8, buf.as_mut_ptr(), buf.len()), GwldpStatus::BufferTooSmall);
        gwldp_model_free(m);
    }
    let expected = [0.5, 0.0, 0.125, 0.0, 2.0 / 32.0, 0.0, 5.0 / 128.0];
    for (lp, p) in buf.iter().zip(expected) {
        assert!((lp.exp() - p).abs() < 1e-15);
    }
}

#[test]
fn rates_through_the_boundary() {
    let m = model(PRODUCT).unwrap();
    let mut r = f64::NAN;
    unsafe {
        // Binary Cramér rate at the mean is zero.
        assert_eq!(gwldp_cramer_rate(m, 1.0, &mut r), GwldpStatus::Ok);
        assert!(r.abs() < 1e-12);
        // Stationary edge measure is the zero of the pair rate.
        let pi = [4.0 / 7.0, 3.0 / 7.0];
        let mass = [pi[0] * 0.7, pi[0] * 0.3, pi[1] * 0.4, pi[1] * 0.6];
        assert_eq!(gwldp_pair_rate(m, mass.as_ptr(), 4, &mut r), GwldpStatus::Ok);
        assert!(r.abs() < 1e-10);
        // Every edge a -> b: no vertex of type a is a child, yet a parents all.
        let off = [0.0, 1.0, 0.0, 0.0];
        assert_eq!(gwldp_pair_rate(m, off.as_ptr(), 4, &mut r), GwldpStatus::Ok);
        assert!(r.is_infinite());
        assert_eq!(gwldp_pair_rate(m, mass.as_ptr(), 3, &mut r), GwldpStatus::InvalidArgument);
        assert!(last_error().contains("expected 4"));
        gwldp_model_free(m);
    }
}

#[test]
fn sampling_is_seeded() {
    let m = model(PRODUCT).unwrap();
    let draw = |seed| unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(gwldp_sample_tree(m, 9, seed, &mut s), GwldpStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_string();
        gwldp_string_free(s);
        text
    };
    let a = draw(5);
    assert_eq!(a, draw(5));
    assert_eq!(a.matches(['a', 'b']).count(), 9);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(gwldp_sample_tree(m, 8, 1, &mut s), GwldpStatus::NullConditioning);
        assert!(s.is_null());
        gwldp_model_free(m);
    }
}

#[test]
fn error_codes() {
    let (s, msg) = model("{").unwrap_err();
    assert_eq!(s, GwldpStatus::Config);
    assert!(!msg.is_empty());
    let (s, msg) = model(&PRODUCT.replace("\"kary\": 2", "\"kary\": 2, \"extra\": 1")).unwrap_err();
    assert_eq!(s, GwldpStatus::Config);
    assert!(msg.contains("law.extra"), "{msg}");
    // Pair-kernel rows must be probability vectors.
    let (s, _) = model(&PRODUCT.replace("\"b\": 0.3}", "\"b\": 0.5}")).unwrap_err();
    assert_eq!(s, GwldpStatus::InvalidModel);
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(gwldp_model_from_json(ptr::null(), &mut out), GwldpStatus::NullPointer);
        let mut rho = 0.0;
        assert_eq!(gwldp_model_rho(ptr::null(), &mut rho), GwldpStatus::NullPointer);
    }
    let bad = [0x7bu8, 0xff, 0];
    let mut out = ptr::null_mut();
    let status = unsafe { gwldp_model_from_json(bad.as_ptr().cast(), &mut out) };
    assert_eq!(status, GwldpStatus::InvalidUtf8);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(header.join("gwldp.h").exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"gwldp.h\"\nint main(void) { GwldpModel *m = 0; double r; \
         return gwldp_model_rho(m, &r) == GWLDP_STATUS_NULL_POINTER ? 0 : 1; }\n",
    )
    .unwrap();
    let Ok(status) = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header)
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler available; header syntax not checked");
        return;
    };
    assert!(status.success());
}
