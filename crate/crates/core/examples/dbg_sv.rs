use ddplace_core::analysis::compare_gains;
use ddplace_core::data::{build_data_matrices, simulate_rollout, ExcitationConfig, SystemModel};
use ddplace_core::matrix::Matrix;
use ddplace_core::region::LmiRegion;
use ddplace_core::synthesis::{design, DesignSource, SynthesisSpec};

fn sv_system() -> SystemModel {
    SystemModel {
        a: Matrix::from_rows(&[
            vec![-0.5, 1.4, 0.4],
            vec![-0.9, 0.3, -1.5],
            vec![1.1, 1.0, -0.4],
        ])
        .unwrap(),
        b1: Matrix::identity(3),
        b2: Matrix::from_rows(&[vec![0.1, -0.3], vec![-0.1, -0.7], vec![0.7, -1.0]]).unwrap(),
        c1: Matrix::identity(3),
        d11: Matrix::from_fn(3, 3, |_, _| 1.0),
        d12: Matrix::from_fn(3, 2, |_, _| 1.0),
        q_x: Matrix::identity(3),
        r: Matrix::identity(2),
    }
}

fn main() {
    let sys = sv_system();
    let spec = SynthesisSpec::mixed_identity_weights(
        3,
        2,
        3,
        3,
        LmiRegion::conic_alpha(2.0).unwrap(),
    );
    let t0 = std::time::Instant::now();
    let model = design(&spec, DesignSource::Model(&sys)).unwrap();
    println!("model: {:.1?} gamma={:?}", t0.elapsed(), model.gamma);
    println!("K_mod:\n{}", model.gain);
    for p in &model.verification.poles {
        println!("  pole {} + {}i  {:?}", p.re, p.im, p.membership);
    }

    let cfg = ExcitationConfig {
        samples: 15,
        delta: 0.1,
        u_bound: 0.5,
        w_ball_radius: 0.05,
        seed: 1,
    };
    let x0 = ddplace_core::data::default_initial_state(&cfg, 3);
    let traj = simulate_rollout(&sys, &cfg, &x0).unwrap();
    let dm = build_data_matrices(&traj, &sys.b1).unwrap();
    let t0 = std::time::Instant::now();
    let data = design(&spec, DesignSource::Data(&dm)).unwrap();
    println!("data: {:.1?} gamma={:?} iters={}", t0.elapsed(), data.gamma, data.solver.iterations);
    println!("K_data:\n{}", data.gain);
    for p in &data.verification.poles {
        println!("  pole {} + {}i  {:?} margin={:.3e}", p.re, p.im, p.membership, p.margin);
    }
    println!(
        "||K_data - K_mod|| = {:.3e}",
        compare_gains(&data.gain, &model.gain).unwrap()
    );
    println!(
        "hinf = {:?} h2 = {:?}",
        data.verification.hinf_norm, data.verification.h2_norm
    );

    // ablation
    let mut спес = spec.clone();
    спес.pole_constraint = false;
    let ab = design(&спес, DesignSource::Data(&dm)).unwrap();
    println!("ablation poles:");
    for p in &ab.verification.poles {
        println!("  {} + {}i  {:?}", p.re, p.im, p.membership);
    }
}
