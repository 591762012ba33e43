use super::*;
use crate::rng::stream;

fn obs(x: usize, y: usize, o_emp: i8) -> StateObservation {
    StateObservation { x, y, o_emp }
}

#[test]
fn encoding_layout() {
    assert_eq!(encode_state(obs(0, 0, 0), 8, 8).unwrap(), 0);
    assert_eq!(encode_state(obs(0, 0, -1), 8, 8).unwrap(), 64);
    assert_eq!(encode_state(obs(7, 7, -1), 8, 8).unwrap(), 127);
    assert!(encode_state(obs(8, 0, 0), 8, 8).is_err());
    assert!(encode_state(obs(0, 0, 1), 8, 8).is_err());
}

#[test]
fn vote_is_argmax() {
    let mut rng = stream(0, "t", 0);
    assert_eq!(vote(&[12, 30, 8, 5], &mut rng), 1);
}

#[test]
fn tied_vote_is_uniform() {
    let mut rng = stream(1, "t", 0);
    let mut hist = [0usize; 4];
    for _ in 0..10_000 {
        hist[vote(&[3, 3, 3, 3], &mut rng)] += 1;
    }
    for h in hist {
        assert!((h as f64 / 10_000.0 - 0.25).abs() < 0.02, "{hist:?}");
    }
}

#[test]
fn untrained_groups_are_silent_and_saturated_groups_fire() {
    let mut net = DecisionNetwork::new(DecisionParams::default(), 8, 8).unwrap();
    assert_eq!(net.vote_counts(obs(1, 4, 0)).unwrap(), [0, 0, 0, 0]);
    let s = net.state_index(obs(1, 4, 0)).unwrap();
    let g = net.params.group_size;
    for w in &mut net.w_dm.row_mut(s)[2 * g..3 * g] {
        *w = 5.0;
    }
    for w in &mut net.w_dm.row_mut(s)[0..g] {
        *w = 2.5;
    }
    let c = net.vote_counts(obs(1, 4, 0)).unwrap();
    assert!(c[2] > c[0] && c[0] > 0 && c[1] == 0 && c[3] == 0, "{c:?}");
    assert_eq!(net.greedy_action(obs(1, 4, 0)).unwrap(), Action::Left);
}

#[test]
fn execution_deposit_is_net_causal() {
    let net = DecisionNetwork::new(DecisionParams::default(), 4, 4).unwrap();
    let dw = net.execution_stdp();
    assert!(dw > 0.0, "{dw}");
}

#[test]
fn trace_credit_and_reward() {
    let mut net = DecisionNetwork::new(DecisionParams::default(), 4, 4).unwrap();
    let mut rng = stream(2, "t", 0);
    let before = net.w_dm.clone();
    let sel = net.select_action(obs(1, 1, 0), 0.0, &mut rng).unwrap();
    let s = net.state_index(obs(1, 1, 0)).unwrap();
    let g = net.params.group_size;
    let k = sel.action.index();
    let e = net.trace.get(s, k * g);
    assert!((e - net.execution_stdp()).abs() < 1e-12);
    assert_eq!(net.trace.get(s, ((k + 1) % 4) * g), 0.0);

    net.learn_step(&MoralReward::new(0.0, 0.0)).unwrap();
    assert_eq!(net.w_dm, before);

    net.learn_step(&MoralReward::new(-1.0, 0.0)).unwrap();
    let lr = net.params.learning_rate;
    let expect = (before.get(s, k * g) - lr * e).clamp(0.0, 5.0);
    assert!((net.w_dm.get(s, k * g) - expect).abs() < 1e-12);

    net.reset_episode();
    assert!(net.trace.is_zero());
}

#[test]
fn moral_reward_identity() {
    let r = MoralReward::new(-1.0, 27.0);
    assert_eq!(r.r_moral, 26.0);
}

#[test]
fn epsilon_anneals_linearly() {
    let p = DecisionParams::default();
    assert_eq!(p.epsilon(0), 0.3);
    assert!((p.epsilon(500) - 0.155).abs() < 1e-12);
    assert_eq!(p.epsilon(1000), 0.01);
    assert_eq!(p.epsilon(5000), 0.01);
}

#[test]
fn policy_map_has_every_state() {
    let net = DecisionNetwork::new(DecisionParams::default(), 3, 2).unwrap();
    let csv = net.policy_map_csv();
    assert_eq!(csv.lines().count(), 1 + 12);
}
