use ddplace_core::matrix::Matrix;
use ddplace_core::sdp::*;

fn main() {
    let m = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let mut p = SdpProblem::new(3, vec![1.0, 0.0, 1.0]);
    let mc = m.clone();
    p.blocks.push(LmiBlock::from_affine(3, move |y| {
        Matrix::from_rows(&[vec![y[0], y[1]], vec![y[1], y[2]]])
            .unwrap()
            .sub(&mc)
    }));
    let mut opts = SdpOptions::default();
    opts.verbose = true;
    let sol = solve(&p, &opts);
    println!("status {:?} y {:?} obj {} iters {}", sol.status, sol.y, sol.objective_value, sol.iterations);
}
