use pixdrive_core::synth::rng;
use pixdrive_core::tile::{pixel_center, pixel_containing, resolution, tile_bounds, world_bounds, MAX_ZOOM, TILE_SIZE};
use pixdrive_core::{PixelAddress, TileKey, WorldPoint};
use rand::Rng;

#[test]
fn halving_law() {
    for z in 1..=MAX_ZOOM {
        assert_eq!(resolution::<f64>(z).unwrap(), resolution::<f64>(z - 1).unwrap() / 2.0);
    }
    assert!(resolution::<f64>(MAX_ZOOM + 1).is_err());
}

#[test]
fn tiles_partition_the_world() {
    let world = world_bounds::<f64>();
    for z in 0..=8u32 {
        let n = 1u32 << z;
        let mut area = 0.0;
        for x in 0..n {
            for y in 0..n {
                let b = tile_bounds(&TileKey::new(z, x, y).unwrap());
                area += b.area();
                if x + 1 < n {
                    assert_eq!(b.max_x, tile_bounds(&TileKey::new(z, x + 1, y).unwrap()).min_x);
                }
                if y + 1 < n {
                    assert_eq!(b.min_y, tile_bounds(&TileKey::new(z, x, y + 1).unwrap()).max_y);
                }
            }
        }
        assert!((area - world.area()).abs() <= world.area() * 1e-12, "z={z}");
        assert_eq!(tile_bounds(&TileKey::new(z, 0, 0).unwrap()).min_x, world.min_x);
        assert_eq!(tile_bounds(&TileKey::new(z, 0, 0).unwrap()).max_y, world.max_y);
        assert_eq!(tile_bounds(&TileKey::new(z, n - 1, n - 1).unwrap()).max_x, world.max_x);
        assert_eq!(tile_bounds(&TileKey::new(z, n - 1, n - 1).unwrap()).min_y, world.min_y);
    }
}

#[test]
fn pixel_round_trip_and_adjacency() {
    let mut r = rng(2024);
    for _ in 0..10_000 {
        let z = r.gen_range(0..=MAX_ZOOM);
        let n = 1u32 << z;
        let tile = TileKey::new(z, r.gen_range(0..n), r.gen_range(0..n)).unwrap();
        let px = PixelAddress::new(tile, r.gen_range(0..TILE_SIZE), r.gen_range(0..TILE_SIZE)).unwrap();
        let c: WorldPoint = pixel_center(&px);
        assert_eq!(pixel_containing(&c, z).unwrap(), px);
        let rz = resolution::<f64>(z).unwrap();
        if px.i + 1 < TILE_SIZE {
            let right: WorldPoint = pixel_center(&PixelAddress::new(tile, px.i + 1, px.j).unwrap());
            assert!((right.x - c.x - rz).abs() <= 1e-9 * rz.max(1.0) + 1e-6, "z={z}");
            assert_eq!(right.y, c.y);
        }
    }
}
