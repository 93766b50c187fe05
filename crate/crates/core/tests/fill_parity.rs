use pixdrive_core::index::{build_polygon_indexes, PolygonRings};
use pixdrive_core::oracle::{oracle_point_in_polygon, scanline_near_vertex};
use pixdrive_core::render::point_in_polygon_sibf;
use pixdrive_core::synth::{random_polygons, rng};
use pixdrive_core::{BoundingBox, QueryStats, WorldPoint};
use rand::Rng;

fn ring(pts: &[(f64, f64)]) -> Vec<WorldPoint> {
    let mut r: Vec<WorldPoint> = pts.iter().map(|&(x, y)| WorldPoint::new(x, y)).collect();
    r.push(r[0]);
    r
}

fn inside(rings: &[Vec<WorldPoint>], p: (f64, f64)) -> bool {
    let (edges, mbrs) = build_polygon_indexes(&[PolygonRings { id: 0, rings: rings.to_vec() }]).unwrap();
    point_in_polygon_sibf(&WorldPoint::new(p.0, p.1), &edges, &mbrs, &mut QueryStats::default())
}

#[test]
fn random_polygons_match_even_odd() {
    let extent = BoundingBox::new(-1e5, -1e5, 1e5, 1e5);
    let polys = random_polygons(1_000, 2e4, 0.3, &extent, 77);
    assert!(polys.iter().filter(|p| p.len() > 1).count() >= 100);
    let mut r = rng(78);
    let mut checked = 0;
    for rings in &polys {
        let (edges, mbrs) = build_polygon_indexes(&[PolygonRings { id: 0, rings: rings.clone() }]).unwrap();
        let b = BoundingBox::from_points(rings.iter().flatten().copied()).buffered(1e3);
        for _ in 0..100 {
            let p = WorldPoint::new(r.gen_range(b.min_x..b.max_x), r.gen_range(b.min_y..b.max_y));
            if scanline_near_vertex(p.y, rings, 1e-9) {
                continue;
            }
            let got = point_in_polygon_sibf(&p, &edges, &mbrs, &mut QueryStats::default());
            assert_eq!(got, oracle_point_in_polygon(&p, rings), "{p:?}");
            checked += 1;
        }
    }
    assert!(checked > 99_000);
}

#[test]
fn probes_on_vertex_scanlines_match_even_odd() {
    // every probe's scan line passes exactly through a vertex
    let extent = BoundingBox::new(-1e5, -1e5, 1e5, 1e5);
    let mut r = rng(79);
    for rings in random_polygons(200, 2e4, 0.3, &extent, 80) {
        let (edges, mbrs) = build_polygon_indexes(&[PolygonRings { id: 0, rings: rings.clone() }]).unwrap();
        let b = BoundingBox::from_points(rings.iter().flatten().copied());
        for v in rings.iter().flatten() {
            let p = WorldPoint::new(r.gen_range(b.min_x - 10.0..b.max_x + 10.0), v.y);
            if rings.iter().flatten().any(|w| w.y == p.y && w.x == p.x) {
                continue;
            }
            let got = point_in_polygon_sibf(&p, &edges, &mbrs, &mut QueryStats::default());
            assert_eq!(got, oracle_point_in_polygon(&p, &rings));
        }
    }
}

#[test]
fn monotone_vertex_counts_once() {
    // The vertex (0,2) joins an edge coming up from (−1,0) and one continuing
    // up to (−1,4): a ray along y = 2 passes through a monotone vertex and
    // must count exactly one crossing on that side.
    let r = ring(&[(-1.0, 0.0), (4.0, 0.0), (4.0, 4.0), (-1.0, 4.0), (0.0, 2.0)]);
    for x in [0.5, 1.0, 2.0, 3.5] {
        assert!(inside(std::slice::from_ref(&r), (x, 2.0)), "x={x}");
    }
    assert!(!inside(std::slice::from_ref(&r), (-0.5, 2.0)));
    assert!(!inside(&[r], (4.5, 2.0)));
}

#[test]
fn reversal_vertex_is_parity_neutral() {
    // An inward spike whose tip (2,2) is a local maximum and a notch whose
    // bottom (2,2) is a local minimum: a ray along y = 2 through either tip
    // keeps its parity.
    let spike_up = ring(&[(0.0, 0.0), (1.0, 0.0), (2.0, 2.0), (3.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]);
    let notch_down = ring(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (3.0, 4.0), (2.0, 2.0), (1.0, 4.0), (0.0, 4.0)]);
    for r in [spike_up, notch_down] {
        let rings = [r];
        assert!(inside(&rings, (0.5, 2.0)));
        assert!(inside(&rings, (3.5, 2.0)));
        assert!(!inside(&rings, (-1.0, 2.0)));
        assert!(!inside(&rings, (5.0, 2.0)));
        for x in [0.5, 3.5, -1.0, 5.0] {
            let p = WorldPoint::new(x, 2.0);
            assert_eq!(inside(&rings, (x, 2.0)), oracle_point_in_polygon(&p, &rings));
        }
    }
}

#[test]
fn triangle_apex_and_interior() {
    let t = ring(&[(0.0, 0.0), (2.0, 0.0), (1.0, 2.0)]);
    let rings = [t];
    assert!(!inside(&rings, (0.5, 2.0)));
    assert!(inside(&rings, (1.0, 1.0)));
}

#[test]
fn holes_and_level_edges() {
    let outer = ring(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]);
    let hole = ring(&[(1.0, 1.0), (1.0, 3.0), (3.0, 3.0), (3.0, 1.0)]);
    let rings = [outer, hole];
    assert!(!inside(&rings, (2.0, 2.0)));
    assert!(inside(&rings, (0.5, 2.0)));
    // scan lines along level edges
    assert!(inside(&rings, (0.5, 1.0)));
    assert!(inside(&rings, (3.5, 3.0)));
    assert!(!inside(&rings, (2.0, 4.0 + 1e-9)));
}
