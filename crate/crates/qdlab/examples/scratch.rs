use qdlab::*;
use qdlab::cartan::Weight;
use qdlab::dirac::*;
use qdlab::linalg::rc;
fn main() {
    let w = |c: &[i64]| Weight(c.to_vec());
    let ctx = Context::new(CartanData::new(LieType::A1));
    let grid = qdlab::config::make_grid(0.5, 2.0, 5).unwrap();
    let lambdas: Vec<Weight> = (0..=8).map(|m| w(&[m])).collect();
    let closure = qdlab::twist::closure_weights(&ctx, &lambdas).unwrap();
    let fam = qdlab::iso_family::build_family(&ctx, &grid, &closure).unwrap();
    let cliff = qdlab::spin::build_clifford(&ctx).unwrap();
    let tf = qdlab::twist::build_twist_field(&ctx, &fam, &lambdas).unwrap();
    let mut c_mat = qdlab::linalg::zeros(2, 2);
    c_mat[(0, 1)] = rc(1.0);
    for (qi, &q) in grid.iter().enumerate() {
        let gns_s = TruncatedGNS::new(&ctx, q, 4, Some(&cliff)).unwrap();
        let gns_f = TruncatedGNS::new(&ctx, q, 4, None).unwrap();
        let resid = commutator_identity_check(
            &ctx, &gns_s, &gns_f, &tf, &fam, &cliff, qi, &w(&[1]), &c_mat,
            &[w(&[1]), w(&[2]), w(&[3]), w(&[4])],
        ).unwrap();
        println!("q={q:.4}: identity residual {resid:.3e}");
    }
}
