use proptest::prelude::*;
use singescape::tables::{emit_sweep_csv, SweepRow};
use singescape::{emit_csv, emit_robot_description, parse_robot_description, parse_trajectory_csv};
use singescape_core::trajectory::TrajectorySample;
use singescape_core::{Classification, DhJoint, JointKind, RobotModel};

fn angle() -> impl Strategy<Value = f64> {
    prop_oneof![(-180i32..=180).prop_map(|d| (d as f64).to_radians()), -10.0..10.0f64,]
}

fn joint() -> impl Strategy<Value = DhJoint> {
    (any::<bool>(), angle(), -5.0..5.0f64, -5.0..5.0f64, angle()).prop_map(|(rev, alpha, a, d, theta_offset)| DhJoint {
        kind: if rev { JointKind::Revolute } else { JointKind::Prismatic },
        alpha,
        a,
        d,
        theta_offset,
    })
}

fn model() -> impl Strategy<Value = RobotModel> {
    (
        "[a-z][a-z0-9-]{0,12}",
        prop_oneof![Just(3usize), Just(6)],
        prop::collection::vec(joint(), 1..9),
    )
        .prop_map(|(name, task_dim, joints)| RobotModel::new(name, task_dim, joints).unwrap())
}

proptest! {
    #[test]
    fn robot_description_round_trip(m in model()) {
        let text = emit_robot_description(&m);
        prop_assert_eq!(parse_robot_description(&text).unwrap(), m);
    }

    #[test]
    fn trajectory_csv_round_trip(
        rows in prop::collection::vec(prop::collection::vec(-1e6..1e6f64, 7), 0..20)
    ) {
        let trace: Vec<TrajectorySample> = rows
            .iter()
            .map(|r| TrajectorySample {
                t: r[0].abs(),
                q: r[1..3].to_vec(),
                qdot: r[3..5].to_vec(),
                x_dot: vec![],
                d_dot: r[5],
                sigma_min: r[6].abs(),
                sigma_max: 1.0,
            })
            .collect();
        let text = emit_csv(&trace, 2);
        let parsed = parse_trajectory_csv(&text).unwrap();
        prop_assert_eq!(parsed.len(), trace.len());
        for (p, s) in parsed.iter().zip(&trace) {
            prop_assert!((p.t - s.t).abs() <= 1e-12 * s.t.abs().max(1.0));
            prop_assert_eq!(&p.q, &s.q);
            prop_assert_eq!(&p.qdot, &s.qdot);
            prop_assert_eq!(p.ddot, s.d_dot);
            prop_assert_eq!(p.sigma_min, s.sigma_min);
        }
        prop_assert_eq!(emit_csv(&trace, 2), text);
    }
}

#[test]
fn malformed_csv_is_rejected() {
    assert!(parse_trajectory_csv("t,q1\n0,1\n").is_err());
    assert!(parse_trajectory_csv("t,q1,qd1,ddot,sigma_min\n0,1,x,0,0\n").is_err());
}

#[test]
fn sweep_rows_print_class_names() {
    let row = SweepRow {
        a2: 1.0,
        d4: 1.0,
        epsilon: -1,
        a: 0.0,
        h: 0.0,
        class: Classification::NoFeasiblePath,
        a_pipeline: 0.0,
    };
    let text = emit_sweep_csv(&[row]);
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(5), Some("NoFeasiblePath"));
}
