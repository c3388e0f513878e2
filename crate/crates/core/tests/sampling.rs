use ginibre::hkpv::{sample_projection_dpp, SamplerConfig};
use ginibre::kernels::{BasisSubset, PlanePoint};
use ginibre::quadrature::DiskRule;
use ginibre::rng::stream;
use ginibre::stats::ks_two_sample;

const CELL: f64 = 0.4;

fn in_cell(z: PlanePoint, c: PlanePoint) -> bool {
    (z.re - c.re).powi(2) + (z.im - c.im).powi(2) <= CELL * CELL
}

/// `∫_{D(a)} ∫_{D(b)} det[K(z_i, z_j)]` for the conditioned kernel.
fn cell_mass(basis: &BasisSubset, a: PlanePoint, b: PlanePoint) -> f64 {
    let rule = DiskRule::new(CELL, 8, 2, 24);
    rule.integrate(|x1, y1| {
        let z1 = PlanePoint::new(a.re + x1, a.im + y1);
        let k11 = basis.kernel(z1, z1).re;
        rule.integrate(|x2, y2| {
            let z2 = PlanePoint::new(b.re + x2, b.im + y2);
            k11 * basis.kernel(z2, z2).re - basis.kernel(z1, z2).norm_sqr()
        })
    })
}

#[test]
fn two_point_law_at_n2() {
    let basis = BasisSubset::conditioned(2).unwrap();
    let config = SamplerConfig::default();
    let pairs = [
        (PlanePoint::new(0.6, 0.0), PlanePoint::new(-0.6, 0.0)),
        (PlanePoint::new(0.0, 0.0), PlanePoint::new(0.0, 0.9)),
    ];
    let draws = 1_000_000u64;
    let mut hits = [0u64; 2];
    for id in 0..draws {
        let pts = sample_projection_dpp(&basis, &config, &mut stream(77, id))
            .unwrap()
            .points;
        assert_eq!(pts.len(), 2);
        for (h, &(a, b)) in hits.iter_mut().zip(&pairs) {
            if (in_cell(pts[0], a) && in_cell(pts[1], b))
                || (in_cell(pts[1], a) && in_cell(pts[0], b))
            {
                *h += 1;
            }
        }
    }
    let expected: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| cell_mass(&basis, a, b))
        .collect();
    for (h, e) in hits.iter().zip(&expected) {
        let freq = *h as f64 / draws as f64;
        assert!(
            (freq / e - 1.0).abs() < 0.05,
            "cell frequency {freq} vs {e}"
        );
    }
    let ratio = (hits[0] as f64 / hits[1] as f64) / (expected[0] / expected[1]);
    assert!((ratio - 1.0).abs() < 0.05, "ratio off by {ratio}");
}

#[test]
fn first_and_last_points_share_a_law() {
    let basis = BasisSubset::conditioned(5).unwrap();
    let config = SamplerConfig::default();
    let runs = 4000u64;
    let radius = |id: u64, last: bool| {
        let pts = sample_projection_dpp(&basis, &config, &mut stream(78, id))
            .unwrap()
            .points;
        let z = if last { pts[pts.len() - 1] } else { pts[0] };
        z.norm_sqr().sqrt()
    };
    let first: Vec<f64> = (0..runs).map(|id| radius(id, false)).collect();
    let last: Vec<f64> = (runs..2 * runs).map(|id| radius(id, true)).collect();
    assert!(ks_two_sample(&first, &last).unwrap().p_value > 0.01);
}
