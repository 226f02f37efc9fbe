use btiso::corpus::{generate_body, BodyKind};
use btiso_core::covers::{validate_cover, IndexSet};
use btiso_core::inequalities::{audit_local_bt, check_local_bt};

#[test]
fn probe_audit() {
    let file = generate_body(BodyKind::RandomHull, 4, 0xacce_0006, 8).unwrap();
    let mut body = file.to_body().unwrap();
    let sigma = IndexSet::from_elems(4, &[1, 2, 3]).unwrap();
    let parts = [
        IndexSet::from_elems(4, &[1]).unwrap(),
        IndexSet::from_elems(4, &[2]).unwrap(),
        IndexSet::from_elems(4, &[3]).unwrap(),
    ];
    let cover = validate_cover(sigma, &parts).unwrap();
    let direct = check_local_bt(&mut body, &cover, 1e-7).unwrap();
    println!("direct: lhs={} rhs={} slack={}", direct.lhs_log, direct.rhs_log, direct.slack_log);
    let rep = audit_local_bt(&mut body, &cover, 50_000, 42).unwrap();
    for (k, s) in rep.steps.iter().enumerate() {
        println!("step {k}: lhs={:.6} rhs={:.6} slack={:+.6} se={:.2e} holds={}", s.lhs_log, s.rhs_log, s.slack_log, s.std_error, s.holds);
    }
    for (k, s) in rep.moment_parts.iter().enumerate() {
        println!("moment part {k}: slack={:+.6} se={:.2e} holds={}", s.slack_log, s.std_error, s.holds);
    }
    for (k, s) in rep.fibration_parts.iter().enumerate() {
        println!("fibration {k}: slack={:+.6} se={:.2e} holds={}", s.slack_log, s.std_error, s.holds);
    }
    println!("sum={:.6} total={:.6} gap={:.3e} tol={:.3e} holds={}", rep.sum_slack_log, rep.total_slack_log, rep.telescope_gap, rep.telescope_tol, rep.holds);
}
