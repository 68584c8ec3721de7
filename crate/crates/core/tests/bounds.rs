use std::sync::OnceLock;

use plasmonic::bounds::{
    base_case_j1, catalan_audit, certificate, extension_constant, extension_constant_with, induction_j2,
    series_hash, tail_bound_h, tail_bound_xi, BetaSource, CatalanCoefficients, CertifyOptions,
    ConvergenceCertificate, GeometryConstants,
};
use plasmonic::cascade::{run_cascade, SeriesSolution};
use plasmonic::catalan::CatalanTable;
use plasmonic::cellfem::{generate_mesh, CellProblem, Geometry, OuterBoundary};
use plasmonic::reference::published;
use plasmonic::Error;

struct Certified {
    problem: CellProblem,
    series: SeriesSolution,
    cert: ConvergenceCertificate,
}

fn certified() -> &'static Certified {
    static C: OnceLock<Certified> = OnceLock::new();
    C.get_or_init(|| {
        let problem = CellProblem::new(generate_mesh(Geometry::circle(0.3).unwrap(), 0.03).unwrap()).unwrap();
        let series = run_cascade(&problem, [1.0, 0.0], 6).unwrap();
        let cert = certificate(&problem, &series, &CertifyOptions::default()).unwrap();
        Certified { problem, series, cert }
    })
}

#[test]
fn extension_constant_matches_table_below_the_largest_radius() {
    for r in [0.1, 0.2, 0.3, 0.4] {
        let e = extension_constant(&Geometry::circle(r).unwrap()).unwrap();
        assert!((e.a - published(r).unwrap().a).abs() < 0.02, "r = {r}: {}", e.a);
    }
}

#[test]
fn extension_constant_properties() {
    let mut last = 1.0;
    for k in 1..=9 {
        let r = 0.05 * k as f64;
        let e = extension_constant(&Geometry::circle(r).unwrap()).unwrap();
        assert!(e.a > last, "A must grow with r");
        last = e.a;
        assert!(e.stable_under_doubling);
        assert!(e.hermitian_defect_weighted < 1e-12);
        // The printed coefficients differ by the Wronskian, exactly A.
        assert!((e.hermitian_defect_printed - e.a).abs() < 1e-9 * e.a);
        let wider = extension_constant_with(&Geometry::circle(r).unwrap(), 96).unwrap();
        assert!((wider.a - e.a).abs() < 1e-12 * e.a);
    }
    assert!(matches!(
        extension_constant(&Geometry::rectangle(0.2, 0.3).unwrap()),
        Err(Error::UnsupportedShape(_))
    ));
    assert!(matches!(extension_constant_with(&Geometry::circle(0.2).unwrap(), 150), Err(Error::Config(_))));
}

#[test]
fn induction_threshold_is_tight() {
    let c = certified();
    let cat = CatalanCoefficients::from_table(CatalanTable::shared()).unwrap();
    let j2 = induction_j2(&c.cert.constants, &cat).unwrap();
    assert_eq!(j2, c.cert.j2);
    assert!(c.cert.constants.polynomials(j2, &cat).iter().all(|&v| v <= 1.0));
    let below = c.cert.constants.polynomials(j2 * (1.0 - 1e-4), &cat);
    assert!(below.iter().any(|&v| v > 1.0), "{below:?}");
    // Larger constants need a larger J.
    let mut harder = c.cert.constants;
    harder.a *= 2.0;
    assert!(induction_j2(&harder, &cat).unwrap() > j2);
}

#[test]
fn impossible_constants_name_the_binding_polynomial() {
    let c = certified();
    let cat = CatalanCoefficients::from_table(CatalanTable::shared()).unwrap();
    let mut k = c.cert.constants;
    k.beta = 1e9;
    match induction_j2(&k, &cat) {
        Err(Error::Certification { binding, .. }) => assert!(["Q*", "R*", "S*"].contains(&binding.as_str())),
        other => panic!("{other:?}"),
    }
}

#[test]
fn certificate_is_consistent() {
    let c = certified();
    let cert = &c.cert;
    assert_eq!(cert.j, cert.j1.max(cert.j2));
    assert!((cert.radius * 4.0 * cert.j - 1.0).abs() < 1e-15);
    assert!(cert.audit_holds());
    assert!(cert.base_case_checks.iter().all(|e| e.holds));
    assert_eq!(cert.audit.len(), c.series.order + 1);
    assert!(cert.qstar <= 1.0 && cert.rstar <= 1.0 && cert.sstar <= 1.0);
    assert_eq!(cert.mesh_hash, c.problem.mesh.content_hash());
    assert_eq!(cert.series_hash, series_hash(&c.series));
    let k = &cert.constants;
    assert_eq!(k.beta, k.pbar0.max(k.p0).max(k.xi2_0_abs));
    assert!(k.omega > 1.0);
    let json = serde_json::to_string(cert).unwrap();
    let back: ConvergenceCertificate = serde_json::from_str(&json).unwrap();
    assert_eq!(&back, cert);
}

#[test]
fn certificate_options() {
    let c = certified();
    let area = CertifyOptions { beta_source: BetaSource::AreaBound, ..CertifyOptions::default() };
    let a = certificate(&c.problem, &c.series, &area).unwrap();
    assert!((a.constants.p0 - c.problem.volume_fractions().0.sqrt()).abs() < 1e-15);
    let neumann = CertifyOptions { outer: OuterBoundary::Neumann, ..CertifyOptions::default() };
    let n = certificate(&c.problem, &c.series, &neumann).unwrap();
    assert!(n.constants.omega > c.cert.constants.omega);
    assert!(n.j2 >= c.cert.j2);
    let mut short = c.series.clone();
    short.order = 2;
    assert!(matches!(certificate(&c.problem, &short, &CertifyOptions::default()), Err(Error::Config(_))));
}

#[test]
fn audit_detects_violations() {
    let c = certified();
    let mut s = c.series.clone();
    s.norms_p[3] = 1e6;
    let audit = catalan_audit(&s, c.cert.constants.beta, c.cert.j).unwrap();
    assert!(!audit[3].holds && audit[2].holds);
    let xi_abs: Vec<f64> = s.xi2.iter().map(|x| x.abs()).collect();
    let j1 = base_case_j1(&s.norms_pbar, &s.norms_p, &xi_abs, c.cert.constants.beta, 1.0).unwrap();
    assert!(j1 > c.cert.j1);
    assert!(base_case_j1(&s.norms_pbar[..3], &s.norms_p, &xi_abs, 1.0, 1.0).is_err());
}

#[test]
fn geometry_constants_from_series() {
    let c = certified();
    let k = GeometryConstants::new(1.5, 1.03, c.problem.volume_fractions(), &c.series, BetaSource::Measured).unwrap();
    assert_eq!(k.p0, c.series.norms_p[0]);
    assert_eq!(k.xi2_2_abs, c.series.xi2[2].abs());
    assert_eq!(k.p2, c.series.norms_p[2]);
}

#[test]
fn tail_bounds() {
    let beta = 0.8;
    let mut last = -1.0;
    for k in 0..20 {
        let a = 0.05 * k as f64;
        let t = tail_bound_xi(2, a, beta).unwrap();
        assert!(t > last || (t == 0.0 && last <= 0.0));
        last = t;
        assert!(tail_bound_h(2, a, 1.0, beta).unwrap() >= 0.0);
    }
    assert_eq!(tail_bound_h(0, 0.5, 2.0, 1.0).unwrap(), 4.0);
    assert!(matches!(tail_bound_xi(1, 1.0, beta), Err(Error::Domain(_))));
}
