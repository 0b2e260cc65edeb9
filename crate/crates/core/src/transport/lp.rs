//! Exact W₁ by the transportation simplex (northwest-corner start, MODI pricing).

use std::collections::VecDeque;

use crate::algebra::Measure;
use crate::error::{Error, Result};
use crate::groupoid::TruncatedGroupoid;

pub const DEFAULT_CYLINDER_CAP: usize = 512;
const PRICING_TOLERANCE: f64 = 1e-13;

/// Minimum-cost transport between `supply` and `demand` (equal totals).
pub fn transportation_simplex(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Ok(0.0);
    }
    let mut x = vec![vec![0.0f64; n]; m];
    let mut basic = vec![vec![false; n]; m];
    let (mut s, mut d) = (supply.to_vec(), demand.to_vec());
    let (mut i, mut j) = (0, 0);
    while i < m && j < n {
        let q = s[i].min(d[j]);
        x[i][j] = q;
        basic[i][j] = true;
        s[i] -= q;
        d[j] -= q;
        if (s[i] <= d[j] && i + 1 < m) || j + 1 == n {
            i += 1;
        } else {
            j += 1;
        }
    }

    let max_iterations = 50 * (m + n) * (m + n) + 1000;
    for _ in 0..max_iterations {
        // Potentials u_i + v_j = c_ij on the basis tree.
        let mut u = vec![f64::NAN; m];
        let mut v = vec![f64::NAN; n];
        u[0] = 0.0;
        let mut queue = VecDeque::from([(true, 0usize)]);
        while let Some((is_row, k)) = queue.pop_front() {
            if is_row {
                for jj in 0..n {
                    if basic[k][jj] && v[jj].is_nan() {
                        v[jj] = cost[k][jj] - u[k];
                        queue.push_back((false, jj));
                    }
                }
            } else {
                for ii in 0..m {
                    if basic[ii][k] && u[ii].is_nan() {
                        u[ii] = cost[ii][k] - v[k];
                        queue.push_back((true, ii));
                    }
                }
            }
        }
        let mut enter = None;
        let mut best = -PRICING_TOLERANCE;
        for ii in 0..m {
            for jj in 0..n {
                if !basic[ii][jj] {
                    let r = cost[ii][jj] - u[ii] - v[jj];
                    if r < best {
                        best = r;
                        enter = Some((ii, jj));
                    }
                }
            }
        }
        let Some((ei, ej)) = enter else {
            let total = (0..m)
                .flat_map(|ii| (0..n).map(move |jj| (ii, jj)))
                .map(|(ii, jj)| x[ii][jj] * cost[ii][jj])
                .sum();
            return Ok(total);
        };
        let cycle = basis_path(&basic, ei, ej);
        // cycle alternates +, −, +, ... starting at the entering cell.
        let (leave, theta) = cycle
            .iter()
            .skip(1)
            .step_by(2)
            .map(|&(a, b)| ((a, b), x[a][b]))
            .fold(((usize::MAX, usize::MAX), f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
        for (k, &(a, b)) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                x[a][b] += theta;
            } else {
                x[a][b] -= theta;
            }
        }
        basic[ei][ej] = true;
        basic[leave.0][leave.1] = false;
        x[leave.0][leave.1] = 0.0;
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
    })
}

/// Cells of the cycle closed by (ei, ej): the entering cell, then the basis path
/// from column ej back to row ei.
fn basis_path(basic: &[Vec<bool>], ei: usize, ej: usize) -> Vec<(usize, usize)> {
    let (m, n) = (basic.len(), basic[0].len());
    // Nodes 0..m are rows, m..m+n columns.
    let mut parent = vec![usize::MAX; m + n];
    let mut queue = VecDeque::from([m + ej]);
    parent[m + ej] = m + ej;
    while let Some(node) = queue.pop_front() {
        if node == ei {
            break;
        }
        let neighbours: Vec<usize> = if node < m {
            (0..n).filter(|&j| basic[node][j]).map(|j| m + j).collect()
        } else {
            (0..m).filter(|&i| basic[i][node - m]).collect()
        };
        for nb in neighbours {
            if parent[nb] == usize::MAX {
                parent[nb] = node;
                queue.push_back(nb);
            }
        }
    }
    let mut cells = vec![(ei, ej)];
    let mut node = ei;
    while node != m + ej {
        let p = parent[node];
        let cell = if node < m { (node, p - m) } else { (p, node - m) };
        cells.push(cell);
        node = p;
    }
    cells
}

/// W₁ between two measures on depth-D cylinders under the ultrametric.
pub fn wasserstein_lp(g: &TruncatedGroupoid, a: &Measure, b: &Measure, cap: usize) -> Result<f64> {
    if a.resolution() != g.resolution() || b.resolution() != g.resolution() {
        return Err(Error::Resolution(format!(
            "measures at resolutions {} and {} on a resolution-{} groupoid",
            a.resolution(),
            b.resolution(),
            g.resolution()
        )));
    }
    if g.num_paths() > cap {
        return Err(Error::SizeCap(format!(
            "{} cylinders exceed the LP cap of {cap}",
            g.num_paths()
        )));
    }
    let rows: Vec<usize> = (0..g.num_paths()).filter(|&p| a.weights()[p] > 0.0).collect();
    let cols: Vec<usize> = (0..g.num_paths()).filter(|&p| b.weights()[p] > 0.0).collect();
    let supply: Vec<f64> = rows.iter().map(|&p| a.weights()[p]).collect();
    let mut demand: Vec<f64> = cols.iter().map(|&p| b.weights()[p]).collect();
    let imbalance = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    if let Some(last) = demand.last_mut() {
        *last += imbalance;
    }
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&p| cols.iter().map(|&q| g.ultra_distance(p, q)).collect())
        .collect();
    transportation_simplex(&supply, &demand, &cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::UnitUltrametric;

    #[test]
    fn small_transport_problems() {
        let cost = vec![vec![4.0, 6.0, 8.0], vec![5.0, 8.0, 7.0], vec![6.0, 4.0, 6.0]];
        let v = transportation_simplex(&[10.0, 15.0, 20.0], &[12.0, 18.0, 15.0], &cost).unwrap();
        // Optimum of this instance from an independent LP solve.
        assert!((v - 225.0).abs() < 1e-9, "{v}");
        assert_eq!(transportation_simplex(&[1.0], &[1.0], &[vec![3.0]]).unwrap(), 3.0);
    }

    #[test]
    fn car_examples_and_cap() {
        let g = TruncatedGroupoid::new(BrattelDiagram::car(1), 1, UnitUltrametric::default()).unwrap();
        let a = Measure::point(&g, 0);
        let b = Measure::point(&g, 1);
        assert_eq!(wasserstein_lp(&g, &a, &b, DEFAULT_CYLINDER_CAP).unwrap(), 0.5);
        assert_eq!(wasserstein_lp(&g, &a, &a, DEFAULT_CYLINDER_CAP).unwrap(), 0.0);
        let h = Measure::new(&g, vec![0.5, 0.5]).unwrap();
        assert_eq!(wasserstein_lp(&g, &a, &h, DEFAULT_CYLINDER_CAP).unwrap(), 0.25);
        assert!(matches!(wasserstein_lp(&g, &a, &b, 1), Err(Error::SizeCap(_))));
    }
}
