//! Trajectory CSV format: header `t,x1..xn,dx1..dxn,u1..um,w1..wd`, one row
//! per sample, 17 significant digits so values round-trip exactly.

use crate::data::{DataError, Trajectory};
use crate::matrix::Matrix;

pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let n = traj.states.rows();
    let m = traj.inputs.rows();
    let d = traj.disturbances.rows();
    let mut out = String::from("t");
    for i in 0..n {
        out.push_str(&format!(",x{}", i + 1));
    }
    for i in 0..n {
        out.push_str(&format!(",dx{}", i + 1));
    }
    for i in 0..m {
        out.push_str(&format!(",u{}", i + 1));
    }
    for i in 0..d {
        out.push_str(&format!(",w{}", i + 1));
    }
    out.push('\n');
    for k in 0..traj.len() {
        out.push_str(&format!("{:.16e}", traj.times[k]));
        for i in 0..n {
            out.push_str(&format!(",{:.16e}", traj.states[(i, k)]));
        }
        for i in 0..n {
            out.push_str(&format!(",{:.16e}", traj.derivatives[(i, k)]));
        }
        for i in 0..m {
            out.push_str(&format!(",{:.16e}", traj.inputs[(i, k)]));
        }
        for i in 0..d {
            out.push_str(&format!(",{:.16e}", traj.disturbances[(i, k)]));
        }
        out.push('\n');
    }
    out
}

fn count_prefixed(headers: &[&str], prefix: &str) -> usize {
    headers
        .iter()
        .filter(|h| {
            h.strip_prefix(prefix)
                .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
        })
        .count()
}

pub fn trajectory_from_csv(text: &str) -> Result<Trajectory, DataError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| DataError::Parse("empty file".to_string()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"t") {
        return Err(DataError::Parse(format!(
            "first header column must be 't', got '{}'",
            cols.first().unwrap_or(&"")
        )));
    }
    let n = count_prefixed(&cols, "x");
    let n_dx = count_prefixed(&cols, "dx");
    let m = count_prefixed(&cols, "u");
    let d = count_prefixed(&cols, "w");
    if n == 0 || n != n_dx {
        return Err(DataError::Parse(format!(
            "state/derivative column mismatch: {n} x columns vs {n_dx} dx columns"
        )));
    }
    let expected = 1 + 2 * n + m + d;
    if cols.len() != expected {
        return Err(DataError::Parse(format!(
            "expected {expected} columns from header layout, found {}",
            cols.len()
        )));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != expected {
            return Err(DataError::Parse(format!(
                "row {} has {} fields, expected {expected}",
                lineno + 2,
                fields.len()
            )));
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let parsed = parsed.map_err(|e| {
            DataError::Parse(format!("row {}: {}", lineno + 2, e))
        })?;
        if parsed.iter().any(|v| !v.is_finite()) {
            return Err(DataError::Parse(format!(
                "row {} contains a non-finite value",
                lineno + 2
            )));
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(DataError::Parse("no samples".to_string()));
    }
    let t = rows.len();
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let delta = if t >= 2 { times[1] - times[0] } else { 0.0 };
    let states = Matrix::from_fn(n, t, |i, k| rows[k][1 + i]);
    let derivatives = Matrix::from_fn(n, t, |i, k| rows[k][1 + n + i]);
    let inputs = Matrix::from_fn(m, t, |i, k| rows[k][1 + 2 * n + i]);
    let disturbances = Matrix::from_fn(d, t, |i, k| rows[k][1 + 2 * n + m + i]);
    Ok(Trajectory {
        times,
        states,
        derivatives,
        inputs,
        disturbances,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{simulate_rollout, ExcitationConfig, SystemModel};

    #[test]
    fn round_trip_preserves_samples() {
        let sys = SystemModel {
            a: Matrix::from_rows(&[vec![-0.2, 1.0], vec![-1.0, -0.2]]).unwrap(),
            b1: Matrix::identity(2),
            b2: Matrix::from_rows(&[vec![1.0], vec![0.5]]).unwrap(),
            c1: Matrix::identity(2),
            d11: Matrix::zeros(2, 2),
            d12: Matrix::zeros(2, 1),
            q_x: Matrix::identity(2),
            r: Matrix::identity(1),
        };
        let cfg = ExcitationConfig {
            samples: 9,
            delta: 0.05,
            u_bound: 0.5,
            w_ball_radius: 0.02,
            seed: 77,
        };
        let traj = simulate_rollout(&sys, &cfg, &[1.0, 0.0]).unwrap();
        let text = trajectory_to_csv(&traj);
        let back = trajectory_from_csv(&text).unwrap();
        assert_eq!(back.len(), traj.len());
        assert_eq!(back.states, traj.states);
        assert_eq!(back.derivatives, traj.derivatives);
        assert_eq!(back.inputs, traj.inputs);
        assert_eq!(back.disturbances, traj.disturbances);
    }

    #[test]
    fn header_is_validated() {
        assert!(trajectory_from_csv("a,b,c\n1,2,3\n").is_err());
        assert!(trajectory_from_csv("t,x1,dx1,u1\n0.0,1.0,2.0\n").is_err());
        assert!(trajectory_from_csv("").is_err());
    }
}
