#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace advkit::dpp {

// Class space extracted from a classifier's final layer: one column per class,
// columns act as class centers for diversity measurement.
struct ClassSpace {
    Eigen::MatrixXd weights;     // D x K
    std::vector<int> class_ids;  // length K, distinct

    int num_classes() const { return static_cast<int>(class_ids.size()); }
    void validate() const;
    int index_of(int class_id) const;  // invalid_input if unknown
};

struct KernelMatrix {
    Eigen::MatrixXd entries;  // K x K, symmetric, unit diagonal, PSD
    double bandwidth = 0.0;
};

struct EigenSystem {
    Eigen::VectorXd values;   // ascending, clamped at 0
    Eigen::MatrixXd vectors;  // orthonormal columns, same order
};

struct ClassPartition {
    std::vector<std::vector<int>> subsets;  // class ids, disjoint cover
    int subset_size = 0;
};

// Median pairwise distance of the weight columns; the default bandwidth.
// Falls back to 1.0 when all columns coincide.
double median_bandwidth(const ClassSpace& space);

// entries[i][j] = exp(-||d_i - d_j||^2 / (2 sigma^2))
KernelMatrix build_rbf_kernel(const ClassSpace& space, double bandwidth);

EigenSystem eigendecompose(const KernelMatrix& kernel);

// e[n][j] over the first n eigenvalues, 0 <= n <= N, 0 <= j <= k, via the
// stable two-index recurrence e[n][j] = e[n-1][j] + lambda_n e[n-1][j-1].
std::vector<std::vector<double>> elementary_symmetric_table(const std::vector<double>& eigenvalues, int k);

// Phase I: index subset J with |J| = k, P(J) proportional to prod_{n in J} lambda_n.
// Indices are returned ascending.
std::vector<int> sample_eigenvector_subset(const EigenSystem& eig, int k, Rng& rng);

// Phase I + II: a size-k class-id subset with P(S) proportional to det(L_S).
std::vector<int> sample_kdpp(const KernelMatrix& kernel, const std::vector<int>& class_ids, int k, Rng& rng);

// Repeated k-DPP rounds on the kernel restricted to not-yet-assigned classes;
// a remainder smaller than k becomes the final subset.
ClassPartition hierarchical_partition(const ClassSpace& space, int k, Rng& rng, double bandwidth = 0.0);

// Greedy maximal-cosine-similarity baseline subset ("close" conditions).
std::vector<int> closest_subset(const ClassSpace& space, int k);

// Mean pairwise cosine similarity of the subset's weight columns; singleton -> 0.
double subset_diversity_score(const std::vector<int>& subset, const ClassSpace& space);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

void validate_partition(const ClassPartition& p, const std::vector<int>& expected_ids);

}  // namespace advkit::dpp
