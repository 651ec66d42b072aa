//! The action grid, one kinematic step, collision tests and the reward
//! terms for a two-vehicle scene.

use lanefree::env::PlanningState;
use lanefree::mcts::{reward_field, reward_speed, reward_total, RewardParams};
use lanefree::traffic::{
    action_from_index, field_influence, rect_overlap, step_kinematics, VehicleState, NUM_ACTIONS,
};

fn main() -> lanefree::Result<()> {
    for i in 0..NUM_ACTIONS {
        let a = action_from_index(i)?;
        print!("{i}:({},{}) ", a.ax, a.ay);
    }
    println!();

    let ego = VehicleState::new(0, 50.0, 5.0, 28.0, 30.0);
    let next = step_kinematics(&ego, action_from_index(13)?, 0.25);
    println!(
        "after (a_x=2, a_y=1) for 0.25 s: p=({:.5}, {:.5}) v=({:.3}, {:.3})",
        next.px, next.py, next.vx, next.vy
    );

    let leader = VehicleState::new(1, 58.0, 5.5, 25.0, 25.0);
    let params = RewardParams::default();
    println!("overlap: {}", rect_overlap(&ego, &leader));
    println!("field influence: {:.5}", field_influence(&ego, &leader, &params.field));
    let s = PlanningState::root(ego, vec![leader]);
    println!("field reward: {:.5}", reward_field(&s, &params.field));
    println!("speed reward: {:.5}", reward_speed(ego.vx, ego.desired_speed, params.epsilon));
    println!("total reward: {:.5}", reward_total(&s, false, &params)?);
    Ok(())
}
