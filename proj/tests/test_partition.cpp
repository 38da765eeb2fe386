#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <vector>

#include "dpp/kdpp.hpp"
#include "dpp/partition_io.hpp"

using namespace advkit;
using namespace advkit::dpp;

namespace {

ClassSpace make_space(const Eigen::MatrixXd& weights) {
    ClassSpace s;
    s.weights = weights;
    s.class_ids.resize(static_cast<std::size_t>(weights.cols()));
    for (int i = 0; i < weights.cols(); ++i) s.class_ids[static_cast<std::size_t>(i)] = i;
    return s;
}

ClassSpace random_space(int dim, int k, unsigned seed) {
    Rng rng(seed);
    Eigen::MatrixXd w(dim, k);
    for (int c = 0; c < k; ++c)
        for (int d = 0; d < dim; ++d) w(d, c) = rng.normal();
    return make_space(w);
}

// Exhaustive elementary symmetric polynomial over subsets (oracle).
double brute_esp(const std::vector<double>& lambda, int j) {
    const int n = static_cast<int>(lambda.size());
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != j) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) prod *= lambda[static_cast<std::size_t>(i)];
        total += prod;
    }
    return total;
}

double subset_det(const Eigen::MatrixXd& kernel, const std::vector<int>& subset) {
    const int m = static_cast<int>(subset.size());
    Eigen::MatrixXd sub(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sub(i, j) = kernel(subset[static_cast<std::size_t>(i)], subset[static_cast<std::size_t>(j)]);
    return sub.determinant();
}

}  // namespace

TEST_CASE("elementary symmetric table matches exhaustive enumeration") {
    Rng rng(11);
    for (int n : {1, 3, 7, 12}) {
        std::vector<double> lambda;
        for (int i = 0; i < n; ++i) lambda.push_back(rng.uniform(0.01, 3.0));
        auto table = elementary_symmetric_table(lambda, n);
        for (int j = 0; j <= n; ++j) {
            const double oracle = brute_esp(lambda, j);
            CHECK(table[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)] ==
                  doctest::Approx(oracle).epsilon(1e-9));
        }
    }
}

TEST_CASE("elementary symmetric table edges") {
    auto table = elementary_symmetric_table({2.0, 5.0}, 2);
    CHECK(table[0][0] == 1.0);
    CHECK(table[2][0] == 1.0);
    CHECK(table[2][1] == doctest::Approx(7.0));
    CHECK(table[2][2] == doctest::Approx(10.0));
}

TEST_CASE("rbf kernel has unit diagonal and known off-diagonal values") {
    Eigen::MatrixXd w(2, 3);
    w << 0.0, 1.0, 0.0,  //
        0.0, 0.0, 0.0;
    auto kernel = build_rbf_kernel(make_space(w), 1.0);
    CHECK(kernel.entries(0, 0) == doctest::Approx(1.0));
    CHECK(kernel.entries(1, 1) == doctest::Approx(1.0));
    // distance 1, bandwidth 1 -> exp(-1/2)
    CHECK(kernel.entries(0, 1) == doctest::Approx(0.6065306597).epsilon(1e-9));
    CHECK(kernel.entries(1, 0) == doctest::Approx(kernel.entries(0, 1)));
    // coincident columns -> similarity 1
    CHECK(kernel.entries(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("median bandwidth over pairwise column distances") {
    Eigen::MatrixXd w(1, 3);
    w << 0.0, 1.0, 3.0;  // distances 1, 2, 3
    CHECK(median_bandwidth(make_space(w)) == doctest::Approx(2.0));

    Eigen::MatrixXd w4(1, 4);
    w4 << 0.0, 1.0, 2.0, 4.0;  // distances 1,2,4,1,3,2 -> median (2+2)/2
    CHECK(median_bandwidth(make_space(w4)) == doctest::Approx(2.0));
}

TEST_CASE("eigendecomposition is orthonormal and reconstructs the kernel") {
    auto space = random_space(4, 6, 21);
    auto kernel = build_rbf_kernel(space, median_bandwidth(space));
    auto eig = eigendecompose(kernel);
    Eigen::MatrixXd vtv = eig.vectors.transpose() * eig.vectors;
    CHECK((vtv - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::MatrixXd recon = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((recon - kernel.entries).cwiseAbs().maxCoeff() < 1e-9);
    for (int i = 1; i < eig.values.size(); ++i) CHECK(eig.values(i) >= eig.values(i - 1));
    CHECK(eig.values.minCoeff() >= 0.0);
}

TEST_CASE("eigenvector selection matches lambda-weighted subset marginals") {
    // lambda = (1,2,3,4), k = 2: P(n in J) = sum over pairs containing n of
    // the pair products, divided by e_2 = 35 -> 9/35, 16/35, 21/35, 24/35.
    EigenSystem eig;
    eig.values = Eigen::Vector4d(1.0, 2.0, 3.0, 4.0);
    eig.vectors = Eigen::MatrixXd::Identity(4, 4);
    const int draws = 100000;
    Rng rng(5);
    std::vector<int> hits(4, 0);
    for (int t = 0; t < draws; ++t) {
        auto j = sample_eigenvector_subset(eig, 2, rng);
        REQUIRE(j.size() == 2);
        for (int n : j) ++hits[static_cast<std::size_t>(n)];
    }
    const double expected[4] = {9.0 / 35.0, 16.0 / 35.0, 21.0 / 35.0, 24.0 / 35.0};
    for (int n = 0; n < 4; ++n) {
        const double freq = static_cast<double>(hits[static_cast<std::size_t>(n)]) / draws;
        CHECK(std::abs(freq - expected[n]) < 0.01);
    }
}

TEST_CASE("identity kernel with k = 1 samples items uniformly") {
    KernelMatrix kernel;
    kernel.entries = Eigen::MatrixXd::Identity(5, 5);
    kernel.bandwidth = 1.0;
    std::vector<int> ids = {0, 1, 2, 3, 4};
    Rng rng(9);
    const int draws = 100000;
    std::vector<int> hits(5, 0);
    for (int t = 0; t < draws; ++t) {
        auto s = sample_kdpp(kernel, ids, 1, rng);
        REQUIRE(s.size() == 1);
        ++hits[static_cast<std::size_t>(s[0])];
    }
    for (int i = 0; i < 5; ++i)
        CHECK(std::abs(static_cast<double>(hits[static_cast<std::size_t>(i)]) / draws - 0.2) < 0.01);
}

TEST_CASE("sampled subsets follow the determinant law") {
    auto space = random_space(3, 5, 33);
    auto kernel = build_rbf_kernel(space, median_bandwidth(space));

    // Oracle: P(S) = det(L_S) / sum over size-2 subsets.
    std::map<std::pair<int, int>, double> oracle;
    double z = 0.0;
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) {
            const double d = subset_det(kernel.entries, {a, b});
            oracle[{a, b}] = d;
            z += d;
        }
    for (auto& [key, val] : oracle) val /= z;

    Rng rng(17);
    const int draws = 200000;
    std::map<std::pair<int, int>, int> hits;
    for (int t = 0; t < draws; ++t) {
        auto s = sample_kdpp(kernel, space.class_ids, 2, rng);
        REQUIRE(s.size() == 2);
        ++hits[{s[0], s[1]}];
    }
    for (auto& [key, prob] : oracle) {
        const double freq = static_cast<double>(hits[key]) / draws;
        CHECK(std::abs(freq - prob) < 0.01);
    }
}

TEST_CASE("coincident classes are never sampled together") {
    Eigen::MatrixXd w(2, 6);
    w << 0.0, 0.0, 1.0, 2.0, 3.0, 4.0,  //
        0.0, 0.0, 1.0, 0.0, 2.0, 1.0;   // columns 0 and 1 coincide
    auto space = make_space(w);
    auto kernel = build_rbf_kernel(space, 1.0);
    Rng rng(3);
    for (int t = 0; t < 2000; ++t) {
        auto s = sample_kdpp(kernel, space.class_ids, 2, rng);
        CHECK(!(s[0] == 0 && s[1] == 1));
    }
}

TEST_CASE("hierarchical partition covers all classes in disjoint fixed-size subsets") {
    auto space = random_space(4, 6, 41);
    Rng rng(1);
    auto part = hierarchical_partition(space, 2, rng);
    CHECK(part.subsets.size() == 3);
    std::set<int> seen;
    for (auto& s : part.subsets) {
        CHECK(s.size() == 2);
        for (int id : s) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == 6);
}

TEST_CASE("remainder classes form a final smaller subset") {
    auto space = random_space(3, 5, 43);
    Rng rng(2);
    auto part = hierarchical_partition(space, 2, rng);
    REQUIRE(part.subsets.size() == 3);
    CHECK(part.subsets[0].size() == 2);
    CHECK(part.subsets[1].size() == 2);
    CHECK(part.subsets[2].size() == 1);
    validate_partition(part, space.class_ids);
}

TEST_CASE("partition degenerate sizes") {
    auto space = random_space(3, 4, 47);
    Rng rng(4);
    auto whole = hierarchical_partition(space, 4, rng);
    REQUIRE(whole.subsets.size() == 1);
    CHECK(whole.subsets[0] == std::vector<int>({0, 1, 2, 3}));

    auto singletons = hierarchical_partition(space, 1, rng);
    CHECK(singletons.subsets.size() == 4);
}

TEST_CASE("first partition round follows the determinant law") {
    auto space = random_space(3, 4, 53);
    auto kernel = build_rbf_kernel(space, median_bandwidth(space));
    std::map<std::pair<int, int>, double> oracle;
    double z = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            const double d = subset_det(kernel.entries, {a, b});
            oracle[{a, b}] = d;
            z += d;
        }
    for (auto& [key, val] : oracle) val /= z;

    Rng rng(29);
    const int draws = 50000;
    std::map<std::pair<int, int>, int> hits;
    for (int t = 0; t < draws; ++t) {
        auto part = hierarchical_partition(space, 2, rng);
        ++hits[{part.subsets[0][0], part.subsets[0][1]}];
    }
    for (auto& [key, prob] : oracle) {
        const double freq = static_cast<double>(hits[key]) / draws;
        CHECK(std::abs(freq - prob) < 0.015);
    }
}

TEST_CASE("same seed reproduces the partition, different seed moves it") {
    auto space = random_space(8, 20, 61);
    Rng a(123), b(123), c(124);
    auto pa = hierarchical_partition(space, 4, a);
    auto pb = hierarchical_partition(space, 4, b);
    auto pc = hierarchical_partition(space, 4, c);
    CHECK(pa.subsets == pb.subsets);
    CHECK(pa.subsets != pc.subsets);  // holds for these specific seeds
}

TEST_CASE("closest subset prefers a planted tight cluster") {
    // Three well-separated directions; the first three columns huddle together.
    Eigen::MatrixXd w(2, 9);
    w << 1.00, 0.99, 0.98, -1.0, -0.99, -0.97, 0.01, 0.02, -0.01,  //
        0.02, 0.01, 0.03, 0.02, -0.02, 0.01, 1.0, 0.99, 1.01;
    auto space = make_space(w);
    auto close = closest_subset(space, 3);
    std::set<int> got(close.begin(), close.end());
    bool cluster_a = got == std::set<int>({0, 1, 2});
    bool cluster_b = got == std::set<int>({3, 4, 5});
    bool cluster_c = got == std::set<int>({6, 7, 8});
    CHECK((cluster_a || cluster_b || cluster_c));
    CHECK(close.size() == 3);

    auto everything = closest_subset(space, 9);
    CHECK(everything.size() == 9);
}

TEST_CASE("diversity score: duplicates score one, orthogonal columns zero") {
    Eigen::MatrixXd w(2, 3);
    w << 1.0, 1.0, 0.0,  //
        0.0, 0.0, 1.0;
    auto space = make_space(w);
    CHECK(subset_diversity_score({0, 1}, space) == doctest::Approx(1.0));
    CHECK(subset_diversity_score({0, 2}, space) == doctest::Approx(0.0));
    CHECK(subset_diversity_score({1}, space) == doctest::Approx(0.0));
    // {0,1,2}: pairs (0,1)=1, (0,2)=0, (1,2)=0 -> mean 1/3
    CHECK(subset_diversity_score({0, 1, 2}, space) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("diverse sampling scores lower similarity than the closest baseline") {
    auto space = random_space(6, 24, 71);
    Rng rng(7);
    auto part = hierarchical_partition(space, 4, rng);
    auto close = closest_subset(space, 4);
    const double close_score = subset_diversity_score(close, space);
    double mean_diverse = 0.0;
    for (auto& s : part.subsets) mean_diverse += subset_diversity_score(s, space);
    mean_diverse /= static_cast<double>(part.subsets.size());
    CHECK(mean_diverse < close_score);
}

TEST_CASE("partition io round trip") {
    auto space = random_space(4, 10, 77);
    Rng rng(15);
    PartitionDocument doc;
    doc.partition = hierarchical_partition(space, 3, rng);
    doc.seed = 15;
    doc.bandwidth = median_bandwidth(space);
    doc.bandwidth_auto = true;
    doc.num_classes = 10;

    const std::string path = "partition_roundtrip.json";
    save_partition(doc, path);
    auto loaded = load_partition(path);
    CHECK(loaded.partition.subsets == doc.partition.subsets);
    CHECK(loaded.partition.subset_size == doc.partition.subset_size);
    CHECK(loaded.seed == doc.seed);
    CHECK(loaded.bandwidth == doctest::Approx(doc.bandwidth));
    CHECK(loaded.bandwidth_auto == doc.bandwidth_auto);
    CHECK(loaded.num_classes == doc.num_classes);
    std::remove(path.c_str());
}

TEST_CASE("invalid inputs are rejected with typed errors") {
    auto space = random_space(3, 5, 81);
    Rng rng(1);

    CHECK_THROWS_AS((void)build_rbf_kernel(space, 0.0), Error);
    CHECK_THROWS_AS((void)build_rbf_kernel(space, -1.0), Error);
    CHECK_THROWS_AS((void)hierarchical_partition(space, 0, rng), Error);
    CHECK_THROWS_AS((void)hierarchical_partition(space, 6, rng), Error);
    CHECK_THROWS_AS((void)closest_subset(space, 0), Error);
    CHECK_THROWS_AS((void)subset_diversity_score({0, 99}, space), Error);

    auto bad = space;
    bad.weights(0, 0) = std::nan("");
    CHECK_THROWS_AS(bad.validate(), Error);

    auto dup = space;
    dup.class_ids[1] = dup.class_ids[0];
    CHECK_THROWS_AS(dup.validate(), Error);

    // Rank-deficient kernel cannot supply k positive eigenvalues.
    Eigen::MatrixXd w(2, 4);
    w << 1.0, 1.0, 1.0, 1.0,  //
        2.0, 2.0, 2.0, 2.0;   // all columns coincide -> rank-1 kernel
    auto flat = make_space(w);
    auto kernel = build_rbf_kernel(flat, 1.0);
    CHECK_THROWS_AS((void)sample_kdpp(kernel, flat.class_ids, 3, rng), Error);

    try {
        (void)hierarchical_partition(space, 9, rng);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_parameter);
    }
}

TEST_CASE("load rejects malformed partition files") {
    const std::string path = "partition_bad.json";
    {
        FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("{\"format\":\"something-else\",\"version\":1}", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS((void)load_partition(path), Error);
    std::remove(path.c_str());
    CHECK_THROWS_AS((void)load_partition("does_not_exist.json"), Error);
}
