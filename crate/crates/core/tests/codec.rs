use proptest::prelude::*;

use swarmmap::ib_comm::{decode_map, encode_map, grid_side_for_budget, reconstruction_bce, Message, OccupancyImage};
use swarmmap::world::{generate_maze, Cell, MazeGrid};

fn occupancy(maze: &MazeGrid) -> OccupancyImage {
    let side = maze.side();
    let values = (0..side * side)
        .map(|i| {
            if maze.is_free(&Cell::new(i / side, i % side)) {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    OccupancyImage::new(side, side, values).unwrap()
}

fn round_trip_bce(target: &OccupancyImage, budget: usize) -> f64 {
    let msg = encode_map(target, budget).unwrap();
    reconstruction_bce(target, &decode_map(&msg, target.rows())).unwrap()
}

#[test]
fn more_bits_reconstruct_mazes_better() {
    let mut better = 0;
    for seed in 0..200 {
        let target = occupancy(&generate_maze(seed, 29).unwrap());
        if round_trip_bce(&target, 128) <= round_trip_bce(&target, 4) {
            better += 1;
        }
    }
    assert!(better >= 180, "128 bits beat 4 bits on only {better}/200 mazes");
}

#[test]
fn wire_round_trip_preserves_messages() {
    for seed in 0..20 {
        let target = occupancy(&generate_maze(seed, 15).unwrap());
        for budget in [4, 16, 64, 128, 225] {
            let msg = encode_map(&target, budget).unwrap().with_origin((3, 5), seed as u32);
            let back = Message::from_bytes(&msg.to_bytes()).unwrap();
            assert_eq!(back, msg);
            assert!(back.payload_bits() <= budget);
        }
    }
}

proptest! {
    #[test]
    fn payload_never_exceeds_budget(
        side in 1usize..40,
        budget in 1usize..4096,
        fill in proptest::collection::vec(0.0f64..=1.0, 1600),
    ) {
        let image = OccupancyImage::new(side, side, fill[..side * side].to_vec()).unwrap();
        let msg = encode_map(&image, budget).unwrap();
        let k = grid_side_for_budget(budget);
        prop_assert_eq!(msg.payload_bits(), k * k * msg.bits_per_cell() as usize);
        prop_assert!(msg.payload_bits() <= budget);
        let decoded = decode_map(&msg, side);
        prop_assert!(decoded.values().iter().all(|v| *v == 0.0 || *v == 1.0));
    }
}
