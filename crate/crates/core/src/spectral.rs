//! Spectral quantities of the random walk matrix W = M/k on regular graphs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::topology::Topology;

/// Largest node count accepted for dense eigensolving.
pub const SPECTRAL_SIZE_GUARD: u64 = 4096;

/// Eigensolver convergence tolerance.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

fn walk_matrix_eigenvalues(topology: &Topology) -> Result<Vec<f64>> {
    let nodes = topology.nodes();
    if nodes > SPECTRAL_SIZE_GUARD {
        return Err(Error::SizeGuard {
            nodes,
            guard: SPECTRAL_SIZE_GUARD,
        });
    }
    let Some(k) = topology.regular_degree() else {
        let stats = topology.graph_stats();
        return Err(Error::IrregularGraph {
            min: stats.min_degree,
            max: stats.max_degree,
        });
    };
    let n = nodes as usize;
    let mut w = DMatrix::<f64>::zeros(n, n);
    let inv_k = 1.0 / k as f64;
    let mut nbrs = Vec::new();
    for v in 0..nodes {
        topology.neighbors_into(v, &mut nbrs);
        for &u in &nbrs {
            w[(v as usize, u as usize)] = inv_k;
        }
    }
    let eig = nalgebra::SymmetricEigen::try_new(w, EIGEN_TOLERANCE, 0)
        .ok_or(Error::EigensolveFailed)?;
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eigenvalues)
}

/// lambda = max{|lambda_2|, |lambda_A|} of W, the quantity controlling the
/// expander re-collision bound lambda^m + 2/A and the burn-in length.
///
/// Requires a regular graph with at most [`SPECTRAL_SIZE_GUARD`] nodes.
pub fn spectral_lambda(topology: &Topology) -> Result<f64> {
    let eigenvalues = walk_matrix_eigenvalues(topology)?;
    let second = eigenvalues[1];
    let last = eigenvalues[eigenvalues.len() - 1];
    Ok(second.abs().max(last.abs()))
}

/// Sign-ignoring variant: the largest non-principal eigenvalue, clamped at 0.
/// On bipartite graphs such as the hypercube this drops the -1 branch, giving
/// 1 - 2/k for the k-dimensional hypercube.
pub fn spectral_lambda_positive(topology: &Topology) -> Result<f64> {
    let eigenvalues = walk_matrix_eigenvalues(topology)?;
    Ok(eigenvalues[1].max(0.0))
}

/// lambda of the lazy walk (I + W)/2, which is (1 + lambda_2)/2 since all
/// lazy eigenvalues are nonnegative shifts of W's.
pub fn spectral_lambda_lazy(topology: &Topology) -> Result<f64> {
    let eigenvalues = walk_matrix_eigenvalues(topology)?;
    Ok((1.0 + eigenvalues[1]) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{complete, Topology};

    #[test]
    fn complete_graph_lambda_is_one_over_a_minus_one() {
        for a in [3u64, 5, 17] {
            let t = complete(a).unwrap();
            let lambda = spectral_lambda(&t).unwrap();
            let expected = 1.0 / (a as f64 - 1.0);
            assert!(
                (lambda - expected).abs() < 1e-8,
                "K_{a}: {lambda} vs {expected}"
            );
        }
    }

    #[test]
    fn cycle_c4_is_bipartite_with_lambda_one() {
        let t = Topology::ring(4).unwrap();
        let lambda = spectral_lambda(&t).unwrap();
        assert!((lambda - 1.0).abs() < 1e-9);
        // Positive-spectrum variant drops the -1 branch: eigenvalues of C_4
        // are cos(2 pi j / 4) = {1, 0, -1, 0}.
        let pos = spectral_lambda_positive(&t).unwrap();
        assert!(pos.abs() < 1e-9);
    }

    #[test]
    fn hypercube_lambda_variants() {
        for k in [3u32, 5] {
            let t = Topology::hypercube(k).unwrap();
            let lambda = spectral_lambda(&t).unwrap();
            assert!((lambda - 1.0).abs() < 1e-9, "k={k}: {lambda}");
            let pos = spectral_lambda_positive(&t).unwrap();
            let expected = 1.0 - 2.0 / k as f64;
            assert!((pos - expected).abs() < 1e-9, "k={k}: {pos} vs {expected}");
        }
    }

    #[test]
    fn lazy_lambda_shifts_spectrum() {
        let t = Topology::torus(&[4, 4, 4]).unwrap();
        // lambda_2 of the 3-D torus side 4: (2 + cos(pi/2)) / 3 = 2/3.
        let lazy = spectral_lambda_lazy(&t).unwrap();
        assert!((lazy - 5.0 / 6.0).abs() < 1e-9, "{lazy}");
    }

    #[test]
    fn guards_and_irregularity() {
        let star = crate::topology::star(3).unwrap();
        assert!(matches!(
            spectral_lambda(&star),
            Err(Error::IrregularGraph { min: 1, max: 3 })
        ));
    }
}
