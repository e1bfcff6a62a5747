use ceqss::compiler::{compile_plan, program_cost};
use ceqss::encoder::{accessed_qudits, encode_symbolic};
use ceqss::error::Error;
use ceqss::params::derive_params;
use ceqss::recovery::{
    accessed_determines_secret, combinations, cost_table, execute, plan_recovery, recover,
};

// Inverse of the k=3 Vandermonde matrix over F_7, worked out by hand.
#[test]
fn k3_vandermonde_inverse() {
    let p = derive_params(3, None).unwrap();
    let inv = p.v.inverse().unwrap();
    assert!(p.v.mul(&inv).unwrap().is_identity());
    // Row 0 of V^-1 recovers the constant term: sum over u of prod_{w!=u} w/(w-u).
    let f = p.v.field();
    for u in 0..5u64 {
        let x = u + 1;
        let mut num = 1;
        let mut den = 1;
        for w in 1..=5u64 {
            if w != x {
                num = f.mul(num, w);
                den = f.mul(den, f.sub(w, x));
            }
        }
        assert_eq!(inv.get(0, u as usize), f.mul(num, f.inv(den).unwrap()));
    }
}

#[test]
fn compiled_netlist_matches_block_execution() {
    let p = derive_params(3, None).unwrap();
    for d in 3..=5 {
        for parties in combinations(p.n, d) {
            let Ok(plan) = plan_recovery(&p, &parties) else {
                continue;
            };
            let blocks = execute(&plan, encode_symbolic(&p)).unwrap().state;
            let mut gates = encode_symbolic(&p);
            compile_plan(&plan).unwrap().apply_symbolic(&mut gates).unwrap();
            assert_eq!(gates, blocks, "{parties:?}");
        }
    }
}

#[test]
fn plans_stay_on_downloaded_qudits() {
    for k in 2..=4 {
        let p = derive_params(k, None).unwrap();
        for d in k..=p.n {
            for parties in combinations(p.n, d) {
                let Ok(plan) = plan_recovery(&p, &parties) else {
                    continue;
                };
                assert!(plan.is_legal());
                let acc = accessed_qudits(&p, &parties).unwrap();
                assert_eq!(plan.accessed.len(), acc.len());
                assert_eq!(plan.accessed.len(), p.qudits_downloaded(d).unwrap());
                for step in &plan.steps {
                    assert!(step.qudits.iter().all(|q| acc.contains(q)));
                }
                let prog = compile_plan(&plan).unwrap();
                assert!(prog.gates.iter().flat_map(|g| g.qudits()).all(|q| acc.contains(&q)));
            }
        }
    }
}

#[test]
fn singular_plans_are_information_failures() {
    for k in 2..=4 {
        let p = derive_params(k, None).unwrap();
        for d in k..=p.n {
            for parties in combinations(p.n, d) {
                let buildable = plan_recovery(&p, &parties).is_ok();
                let informative = accessed_determines_secret(&p, &parties).unwrap();
                assert_eq!(buildable, informative, "k={k} {parties:?}");
                if buildable {
                    assert!(recover(&p, &parties).is_ok(), "k={k} {parties:?}");
                }
            }
        }
    }
}

#[test]
fn known_singular_subset_is_reported() {
    let p = derive_params(3, None).unwrap();
    match plan_recovery(&p, &[2, 3, 4, 5]) {
        Err(Error::InvariantViolation(msg)) => assert!(msg.contains("singular")),
        other => panic!("unexpected {other:?}"),
    }
    assert!(recover(&derive_params(3, Some(17)).unwrap(), &[2, 3, 4, 5]).is_ok());
}

#[test]
fn cost_table_rows() {
    let p = derive_params(3, None).unwrap();
    let rows: Vec<_> = cost_table(&p)
        .iter()
        .map(|r| (r.d, r.qudits_downloaded, r.per_secret_qudit.to_string(), r.baseline))
        .collect();
    assert_eq!(
        rows,
        vec![(5, 10, "5/3".into(), 3), (4, 12, "2".into(), 3), (3, 18, "3".into(), 3)]
    );
}

#[test]
fn netlist_size_is_bounded_per_block() {
    let p = derive_params(3, None).unwrap();
    let plan = plan_recovery(&p, &[1, 2, 3, 4, 5]).unwrap();
    let prog = compile_plan(&plan).unwrap();
    let bound: usize = plan.steps.iter().map(|s| s.qudits.len().pow(2) + s.qudits.len()).sum();
    let cost = program_cost(&prog);
    assert!(cost.gate_count <= bound);
    assert!(cost.depth <= cost.gate_count);
}
