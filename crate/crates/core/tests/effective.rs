use std::sync::OnceLock;

use plasmonic::bounds::{certificate, CertifyOptions, ConvergenceCertificate};
use plasmonic::cascade::{run_cascade, SeriesSolution};
use plasmonic::cellfem::{generate_mesh, CellProblem, Geometry};
use plasmonic::effective::{
    dispersion_branch, effective_properties, effective_properties_at, physical_scales, relative_error_report,
    write_csv, CSV_HEADER,
};
use plasmonic::Error;

struct Setup {
    problem: CellProblem,
    series: SeriesSolution,
    cert: ConvergenceCertificate,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let problem = CellProblem::new(generate_mesh(Geometry::circle(0.4).unwrap(), 0.03).unwrap()).unwrap();
        let series = run_cascade(&problem, [1.0, 0.0], 6).unwrap();
        let cert = certificate(&problem, &series, &CertifyOptions::default()).unwrap();
        Setup { problem, series, cert }
    })
}

#[test]
fn quasistatic_limit() {
    let s = setup();
    let p = effective_properties(&s.problem, &s.series, &s.cert, 0.0).unwrap();
    assert!((p.n2_eff - 1.0 / s.series.xi2[0]).abs() < 1e-14);
    assert_eq!(p.n2_qs, p.n2_eff);
    // ψ_0 = 1 in the matrix, so B/H at η = 0 is ⟨ψ_0⟩.
    assert!((p.mu_eff - p.mu_qs).abs() < 1e-14);
    assert!((p.eps_qs - p.n2_qs / p.mu_qs).abs() < 1e-14);
    assert!(p.mu_qs > 0.0 && p.mu_qs < 1.0);
    assert_eq!(p.mu_imag, 0.0);
}

#[test]
fn branch_inside_certificate() {
    let s = setup();
    let r = s.cert.radius;
    let etas: Vec<f64> = (0..=5).map(|k| 0.19 * k as f64 * r).collect();
    let pts = dispersion_branch(&s.problem, &s.series, &s.cert, &etas).unwrap();
    assert_eq!(pts[0].eps_p, f64::NEG_INFINITY);
    for p in &pts {
        assert!((p.alpha - 4.0 * s.cert.j * p.eta).abs() < 1e-15);
        assert!(p.alpha < 1.0 && p.tail_bound >= 0.0);
        assert!((p.n2_eff * p.xi2_eta - 1.0).abs() < 1e-14);
        let four = (s.series.xi2[4] * p.eta.powi(4)).abs() + (s.series.xi2[6] * p.eta.powi(6)).abs();
        assert!((p.xi2_eta - p.xi2_two_term).abs() <= four * (1.0 + 1e-12) + 1e-15);
        if p.eta > 0.0 {
            // Below the plasma frequency the inclusion permittivity is negative.
            assert!(p.eps_p < 0.0);
            assert!((1.0 - p.eps_p) * p.eta * p.eta * p.xi2_eta - 1.0 < 1e-12);
        }
    }
    let props = effective_properties(&s.problem, &s.series, &s.cert, 0.9 * r).unwrap();
    assert!(props.mu_imag < 1e-12 * props.mu_eff.abs());
    assert!(matches!(
        dispersion_branch(&s.problem, &s.series, &s.cert, &[1.5 * r]),
        Err(Error::OutsideCertificate { .. })
    ));
}

#[test]
fn reference_point_rules() {
    let s = setup();
    assert!(matches!(
        effective_properties_at(&s.problem, &s.series, &s.cert, 0.0, [0.0, 0.0]),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        effective_properties_at(&s.problem, &s.series, &s.cert, 0.0, [0.7, 0.0]),
        Err(Error::Config(_))
    ));
    let side = effective_properties_at(&s.problem, &s.series, &s.cert, 0.0, [0.5, 0.0]).unwrap();
    assert!((side.mu_eff - side.mu_qs).abs() < 1e-14);
}

#[test]
fn csv_output_parses() {
    let s = setup();
    let etas = [0.0, 0.5 * s.cert.radius];
    let pts = dispersion_branch(&s.problem, &s.series, &s.cert, &etas).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &pts).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER.to_vec());
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let xi: f64 = rows[1][2].parse().unwrap();
    assert_eq!(xi, pts[1].xi2_eta);
}

#[test]
fn relative_errors_and_scales() {
    let s = setup();
    let rows = relative_error_report(&s.series, &s.cert, &[0.1, 0.2, 0.3]).unwrap();
    assert!(rows.windows(2).all(|w| w[1].r1h_measured > w[0].r1h_measured && w[1].r1xi_measured > w[0].r1xi_measured));
    assert!(rows.iter().all(|r| r.r1h_published > 0.0 && r.r1xi_published > 0.0));
    let sc = physical_scales(s.cert.radius, 1e-7).unwrap();
    assert!((sc.k_max - s.cert.radius * 1e7).abs() < 1e-6);
    assert!((sc.omega_p - 2.997_924_58e15).abs() < 1e6);
    assert!(matches!(physical_scales(-1.0, 1e-7), Err(Error::Domain(_))));
}
