#include "dpp/kdpp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace advkit::dpp {

void ClassSpace::validate() const {
    const int k = num_classes();
    require(k >= 1, ErrorCode::invalid_input, "class space needs at least one class");
    require(weights.cols() == k, ErrorCode::invalid_input, "weights column count must equal class count");
    require(weights.rows() >= 1, ErrorCode::invalid_input, "weights must have at least one row");
    require(weights.allFinite(), ErrorCode::invalid_input, "class-space weights contain non-finite values");
    std::set<int> uniq(class_ids.begin(), class_ids.end());
    require(static_cast<int>(uniq.size()) == k, ErrorCode::invalid_input, "class ids must be distinct");
}

int ClassSpace::index_of(int class_id) const {
    for (int i = 0; i < num_classes(); ++i)
        if (class_ids[i] == class_id) return i;
    fail_input("unknown class id " + std::to_string(class_id));
}

double median_bandwidth(const ClassSpace& space) {
    space.validate();
    const int k = space.num_classes();
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) dists.push_back((space.weights.col(i) - space.weights.col(j)).norm());
    if (dists.empty()) return 1.0;
    std::sort(dists.begin(), dists.end());
    const std::size_t n = dists.size();
    const double med = (n % 2 == 1) ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
    return med > 0.0 ? med : 1.0;
}

KernelMatrix build_rbf_kernel(const ClassSpace& space, double bandwidth) {
    space.validate();
    require(bandwidth > 0.0, ErrorCode::invalid_parameter, "rbf bandwidth must be positive");
    const int k = space.num_classes();
    KernelMatrix out;
    out.bandwidth = bandwidth;
    out.entries.resize(k, k);
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    for (int i = 0; i < k; ++i) {
        out.entries(i, i) = 1.0;
        for (int j = i + 1; j < k; ++j) {
            const double d2 = (space.weights.col(i) - space.weights.col(j)).squaredNorm();
            const double v = std::exp(-d2 * inv);
            out.entries(i, j) = v;
            out.entries(j, i) = v;
        }
    }
    return out;
}

EigenSystem eigendecompose(const KernelMatrix& kernel) {
    require(kernel.entries.rows() == kernel.entries.cols(), ErrorCode::invalid_input, "kernel must be square");
    require((kernel.entries - kernel.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-9,
            ErrorCode::invalid_input, "kernel must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kernel.entries);
    require(solver.info() == Eigen::Success, ErrorCode::numeric, "eigendecomposition failed");
    EigenSystem sys;
    sys.values = solver.eigenvalues();
    sys.vectors = solver.eigenvectors();
    // L is PSD analytically; clamp the numerical negatives.
    for (int i = 0; i < sys.values.size(); ++i) {
        require(sys.values[i] >= -1e-8, ErrorCode::numeric, "kernel eigenvalue below PSD tolerance");
        if (sys.values[i] < 0.0) sys.values[i] = 0.0;
    }
    return sys;
}

std::vector<std::vector<double>> elementary_symmetric_table(const std::vector<double>& eigenvalues, int k) {
    const int n = static_cast<int>(eigenvalues.size());
    require(k >= 0, ErrorCode::invalid_parameter, "k must be non-negative");
    require(k <= n, ErrorCode::invalid_parameter, "k exceeds the number of eigenvalues");
    for (double v : eigenvalues)
        require(v >= 0.0 && std::isfinite(v), ErrorCode::invalid_input, "eigenvalues must be finite and non-negative");
    std::vector<std::vector<double>> e(static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(k) + 1, 0.0));
    for (int i = 0; i <= n; ++i) e[i][0] = 1.0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= k; ++j) e[i][j] = e[i - 1][j] + eigenvalues[static_cast<std::size_t>(i) - 1] * e[i - 1][j - 1];
    return e;
}

namespace {

int count_positive(const Eigen::VectorXd& values) {
    const double tol = values.size() ? values.maxCoeff() * 1e-12 : 0.0;
    int c = 0;
    for (int i = 0; i < values.size(); ++i)
        if (values[i] > tol) ++c;
    return c;
}

int categorical_draw(const Eigen::VectorXd& probs, Rng& rng) {
    const double total = probs.sum();
    require(total > 0.0 && std::isfinite(total), ErrorCode::spectral, "degenerate selection distribution");
    double u = rng.uniform() * total;
    for (int i = 0; i < probs.size(); ++i) {
        u -= probs[i];
        if (u < 0.0) return i;
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace

std::vector<int> sample_eigenvector_subset(const EigenSystem& eig, int k, Rng& rng) {
    const int n = static_cast<int>(eig.values.size());
    require(k >= 0 && k <= n, ErrorCode::invalid_parameter, "k out of range for eigen system");
    if (k == 0) return {};
    require(count_positive(eig.values) >= k, ErrorCode::spectral,
            "fewer strictly positive eigenvalues than the requested subset size");
    std::vector<double> lambda(eig.values.data(), eig.values.data() + n);
    const auto e = elementary_symmetric_table(lambda, k);
    std::vector<int> selected;
    selected.reserve(static_cast<std::size_t>(k));
    int remaining = k;
    for (int i = n; i >= 1 && remaining > 0; --i) {
        const double denom = e[static_cast<std::size_t>(i)][static_cast<std::size_t>(remaining)];
        double accept = 1.0;
        if (denom > 0.0) accept = lambda[static_cast<std::size_t>(i) - 1] * e[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(remaining) - 1] / denom;
        if (rng.uniform() < accept) {
            selected.push_back(i - 1);
            --remaining;
        }
    }
    require(remaining == 0, ErrorCode::spectral, "phase I failed to select k eigenvectors");
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<int> sample_kdpp(const KernelMatrix& kernel, const std::vector<int>& class_ids, int k, Rng& rng) {
    const int n = static_cast<int>(class_ids.size());
    require(kernel.entries.rows() == n, ErrorCode::invalid_input, "kernel size must match id count");
    require(k >= 0 && k <= n, ErrorCode::invalid_parameter, "k out of range for kernel");
    if (k == 0) return {};
    const EigenSystem eig = eigendecompose(kernel);
    const std::vector<int> J = sample_eigenvector_subset(eig, k, rng);

    Eigen::MatrixXd v(n, k);
    for (int c = 0; c < k; ++c) v.col(c) = eig.vectors.col(J[static_cast<std::size_t>(c)]);

    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(k));
    while (static_cast<int>(picked.size()) < k) {
        require(v.cols() > 0, ErrorCode::spectral, "phase II ran out of basis vectors before k picks");
        // P(i) = (1/|V|) sum_v (v^T e_i)^2 = squared row norm / |V|
        Eigen::VectorXd probs = v.rowwise().squaredNorm() / static_cast<double>(v.cols());
        const int item = categorical_draw(probs, rng);
        picked.push_back(item);
        if (v.cols() == 1) {
            v.resize(n, 0);
            break;
        }
        // Eliminate coordinate `item`: subtract a multiple of the column with the
        // largest component there, drop that column, then re-orthonormalize the
        // rest by modified Gram-Schmidt.
        int pivot = 0;
        for (int c = 1; c < v.cols(); ++c)
            if (std::abs(v(item, c)) > std::abs(v(item, pivot))) pivot = c;
        require(std::abs(v(item, pivot)) > 0.0, ErrorCode::spectral, "phase II pivot is zero");
        Eigen::MatrixXd next(n, v.cols() - 1);
        int out = 0;
        for (int c = 0; c < v.cols(); ++c) {
            if (c == pivot) continue;
            next.col(out++) = v.col(c) - v.col(pivot) * (v(item, c) / v(item, pivot));
        }
        for (int c = 0; c < next.cols(); ++c) {
            for (int prev = 0; prev < c; ++prev) next.col(c) -= next.col(prev).dot(next.col(c)) * next.col(prev);
            const double norm = next.col(c).norm();
            require(norm > 1e-12, ErrorCode::spectral, "Gram-Schmidt collapse in phase II");
            next.col(c) /= norm;
        }
        v = std::move(next);
    }
    std::vector<int> ids;
    ids.reserve(picked.size());
    for (int idx : picked) ids.push_back(class_ids[static_cast<std::size_t>(idx)]);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ClassPartition hierarchical_partition(const ClassSpace& space, int k, Rng& rng, double bandwidth) {
    space.validate();
    const int n = space.num_classes();
    require(k >= 1 && k <= n, ErrorCode::invalid_parameter, "subset size k out of range");
    const double bw = bandwidth > 0.0 ? bandwidth : median_bandwidth(space);
    const KernelMatrix kernel = build_rbf_kernel(space, bw);

    std::vector<int> remaining(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) remaining[static_cast<std::size_t>(i)] = i;

    ClassPartition part;
    part.subset_size = k;
    while (static_cast<int>(remaining.size()) >= k) {
        const int m = static_cast<int>(remaining.size());
        KernelMatrix sliced;
        sliced.bandwidth = bw;
        sliced.entries.resize(m, m);
        std::vector<int> ids(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            ids[static_cast<std::size_t>(i)] = space.class_ids[static_cast<std::size_t>(remaining[static_cast<std::size_t>(i)])];
            for (int j = 0; j < m; ++j)
                sliced.entries(i, j) = kernel.entries(remaining[static_cast<std::size_t>(i)], remaining[static_cast<std::size_t>(j)]);
        }
        std::vector<int> subset = sample_kdpp(sliced, ids, k, rng);
        part.subsets.push_back(subset);
        std::vector<int> keep;
        keep.reserve(remaining.size() - subset.size());
        for (int idx : remaining) {
            const int cid = space.class_ids[static_cast<std::size_t>(idx)];
            if (!std::binary_search(subset.begin(), subset.end(), cid)) keep.push_back(idx);
        }
        remaining = std::move(keep);
    }
    if (!remaining.empty()) {
        std::vector<int> tail;
        tail.reserve(remaining.size());
        for (int idx : remaining) tail.push_back(space.class_ids[static_cast<std::size_t>(idx)]);
        std::sort(tail.begin(), tail.end());
        part.subsets.push_back(std::move(tail));
    }
    validate_partition(part, space.class_ids);
    return part;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double denom = a.norm() * b.norm();
    if (denom < 1e-30) return 0.0;
    return a.dot(b) / denom;
}

std::vector<int> closest_subset(const ClassSpace& space, int k) {
    space.validate();
    const int n = space.num_classes();
    require(k >= 1 && k <= n, ErrorCode::invalid_parameter, "subset size k out of range");
    if (k == 1) {
        int id = *std::min_element(space.class_ids.begin(), space.class_ids.end());
        return {id};
    }
    Eigen::MatrixXd cos(n, n);
    for (int i = 0; i < n; ++i) {
        cos(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double c = cosine_similarity(space.weights.col(i), space.weights.col(j));
            cos(i, j) = c;
            cos(j, i) = c;
        }
    }
    // Seed with the most similar pair; ties resolve to the lowest indices by scan order.
    int bi = 0, bj = 1;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (cos(i, j) > cos(bi, bj)) {
                bi = i;
                bj = j;
            }
    std::vector<int> sel = {bi, bj};
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    used[static_cast<std::size_t>(bi)] = used[static_cast<std::size_t>(bj)] = true;
    while (static_cast<int>(sel.size()) < k) {
        int best = -1;
        double best_score = -2.0;
        for (int c = 0; c < n; ++c) {
            if (used[static_cast<std::size_t>(c)]) continue;
            double mean = 0.0;
            for (int s : sel) mean += cos(c, s);
            mean /= static_cast<double>(sel.size());
            if (mean > best_score) {
                best_score = mean;
                best = c;
            }
        }
        sel.push_back(best);
        used[static_cast<std::size_t>(best)] = true;
    }
    std::vector<int> ids;
    ids.reserve(sel.size());
    for (int idx : sel) ids.push_back(space.class_ids[static_cast<std::size_t>(idx)]);
    std::sort(ids.begin(), ids.end());
    return ids;
}

double subset_diversity_score(const std::vector<int>& subset, const ClassSpace& space) {
    space.validate();
    require(!subset.empty(), ErrorCode::invalid_input, "subset must be non-empty");
    std::vector<int> cols;
    cols.reserve(subset.size());
    for (int id : subset) cols.push_back(space.index_of(id));
    if (cols.size() == 1) return 0.0;
    double total = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (std::size_t j = i + 1; j < cols.size(); ++j) {
            total += cosine_similarity(space.weights.col(cols[i]), space.weights.col(cols[j]));
            ++pairs;
        }
    return total / static_cast<double>(pairs);
}

void validate_partition(const ClassPartition& p, const std::vector<int>& expected_ids) {
    std::vector<int> seen;
    for (const auto& s : p.subsets) seen.insert(seen.end(), s.begin(), s.end());
    std::vector<int> expect = expected_ids;
    std::sort(seen.begin(), seen.end());
    std::sort(expect.begin(), expect.end());
    require(std::adjacent_find(seen.begin(), seen.end()) == seen.end(), ErrorCode::internal,
            "partition subsets are not disjoint");
    require(seen == expect, ErrorCode::internal, "partition does not cover the class ids");
}

}  // namespace advkit::dpp
