#[test]
fn dbg_feas() {
    use c2ext_core::selection::*;
    let cons = vec![AffineConstraint::hyperplane(vec![0.0,1.0],0.0), AffineConstraint::hyperplane(vec![0.0,1.0],1.0)];
    let edges = vec![GraphEdge { a: 0, b: 1, w: 2.0 }];
    let r = lipschitz_selection(2, &cons, &edges, SelectionMode::FeasibilityAt(0.4));
    match r { Ok(s) => { println!("OK?! seminorm={} values={:?}", s.seminorm, s.values); panic!() }, Err(e) => println!("err: {e}") }
}
