use nugs_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    let p = nugs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn round_trip_through_handles() {
    unsafe {
        let mut samples = ptr::null_mut();
        assert_eq!(
            nugs_samples_generate(NugsScheme::Jittered, 64, 20.0, 0.2, 3, &mut samples),
            NugsStatus::Ok
        );
        let n = nugs_samples_len(samples);
        assert_eq!(n, 64);

        let mut w = vec![0.0; n];
        assert_eq!(nugs_samples_weights(samples, w.as_mut_ptr(), n), NugsStatus::Ok);
        assert!((w.iter().sum::<f64>() - 40.0).abs() < 1e-12);

        let mut space = ptr::null_mut();
        let desc = CString::new("legendre:4").unwrap();
        assert_eq!(nugs_space_parse(desc.as_ptr(), &mut space), NugsStatus::Ok);
        assert_eq!(nugs_space_dimension(space), 5);

        let mut c = 0.0;
        assert_eq!(nugs_stability_constant(space, samples, &mut c), NugsStatus::Ok);
        assert!(c.is_finite() && c >= 1.0);

        // x^2 lies in the space, so the fit reproduces it
        let f = CString::new(r#"{"kind": "piecewise_poly_coeffs", "breaks": [0, 1], "coeffs": [[0, 0, 1]]}"#).unwrap();
        let mut values = vec![NugsComplex { re: 0.0, im: 0.0 }; n];
        assert_eq!(
            nugs_transform_function(f.as_ptr(), samples, values.as_mut_ptr(), n),
            NugsStatus::Ok
        );

        let mut rec = ptr::null_mut();
        assert_eq!(
            nugs_reconstruct(space, samples, values.as_ptr(), ptr::null(), n, &mut rec),
            NugsStatus::Ok
        );
        assert_eq!(nugs_reconstruction_len(rec), 5);
        let mut residual = 1.0;
        assert_eq!(nugs_reconstruction_residual(rec, &mut residual), NugsStatus::Ok);
        assert!(residual < 1e-9, "residual {residual}");

        let xs = [0.1, 0.5, 0.9];
        let mut ys = [NugsComplex { re: 0.0, im: 0.0 }; 3];
        assert_eq!(
            nugs_reconstruction_evaluate(rec, space, xs.as_ptr(), ys.as_mut_ptr(), 3),
            NugsStatus::Ok
        );
        for (x, y) in xs.iter().zip(&ys) {
            assert!((y.re - x * x).abs() < 1e-9 && y.im.abs() < 1e-9, "{x}: {y:?}");
        }

        nugs_reconstruction_free(rec);
        nugs_space_free(space);
        nugs_samples_free(samples);
    }
}

#[test]
fn explicit_weights_match_default() {
    unsafe {
        let pts = [-3.0, -1.5, 0.0, 1.0, 2.5];
        let mut samples = ptr::null_mut();
        assert_eq!(nugs_samples_new(pts.as_ptr(), 5, 3.0, &mut samples), NugsStatus::Ok);
        let mut w = [0.0; 5];
        nugs_samples_weights(samples, w.as_mut_ptr(), 5);
        let mut space = ptr::null_mut();
        let desc = CString::new("pconst:2").unwrap();
        nugs_space_parse(desc.as_ptr(), &mut space);
        let values: Vec<NugsComplex> = pts
            .iter()
            .map(|&p| NugsComplex {
                re: 1.0 / (1.0 + p * p),
                im: 0.3 * p,
            })
            .collect();

        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            nugs_reconstruct(space, samples, values.as_ptr(), ptr::null(), 5, &mut a),
            NugsStatus::Ok
        );
        assert_eq!(
            nugs_reconstruct(space, samples, values.as_ptr(), w.as_ptr(), 5, &mut b),
            NugsStatus::Ok
        );
        let mut ca = [NugsComplex { re: 0.0, im: 0.0 }; 2];
        let mut cb = ca;
        nugs_reconstruction_coefficients(a, ca.as_mut_ptr(), 2);
        nugs_reconstruction_coefficients(b, cb.as_mut_ptr(), 2);
        assert_eq!(ca, cb);
        nugs_reconstruction_free(a);
        nugs_reconstruction_free(b);
        nugs_space_free(space);
        nugs_samples_free(samples);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut space = ptr::null_mut();
        let bad = CString::new("hexagon:3").unwrap();
        assert_eq!(nugs_space_parse(bad.as_ptr(), &mut space), NugsStatus::InvalidInput);
        assert!(space.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(nugs_space_parse(ptr::null(), &mut space), NugsStatus::NullPointer);
        assert!(last_error().contains("descriptor"));

        // three samples cannot determine eight coefficients
        let pts = [-1.0, 0.0, 1.0];
        let mut samples = ptr::null_mut();
        nugs_samples_new(pts.as_ptr(), 3, 2.0, &mut samples);
        let desc = CString::new("legendre:7").unwrap();
        nugs_space_parse(desc.as_ptr(), &mut space);
        let values = [NugsComplex { re: 1.0, im: 0.0 }; 3];
        let mut rec = ptr::null_mut();
        assert_eq!(
            nugs_reconstruct(space, samples, values.as_ptr(), ptr::null(), 3, &mut rec),
            NugsStatus::Unstable
        );
        assert!(rec.is_null());

        let mut out = [0.0; 2];
        assert_eq!(
            nugs_samples_points(samples, out.as_mut_ptr(), 2),
            NugsStatus::InvalidInput
        );

        let neg = [1.0, -1.0, 1.0];
        assert_eq!(
            nugs_reconstruct(space, samples, values.as_ptr(), neg.as_ptr(), 3, &mut rec),
            NugsStatus::InvalidInput
        );

        nugs_space_free(space);
        nugs_samples_free(samples);
        nugs_samples_free(ptr::null_mut());
        assert_eq!(nugs_samples_len(ptr::null()), 0);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/nugs.h")).unwrap();
    for name in [
        "NugsStatus",
        "NUGS_STATUS_UNSTABLE",
        "typedef struct NugsSamples NugsSamples",
        "nugs_samples_generate",
        "nugs_reconstruct(",
        "nugs_reconstruction_free",
        "nugs_last_error",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(nugs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/nugs.h");
    match std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler, header syntax not checked"),
    }
}
