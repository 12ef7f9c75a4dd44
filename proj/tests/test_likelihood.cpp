#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "phylo/likelihood.hpp"
#include "phylo/priors.hpp"
#include "phylo/rand.hpp"
#include "phylo/sites.hpp"

using namespace phylo;

namespace {

std::vector<uint8_t> pattern_of_index(size_t idx, int n, int h) {
  std::vector<uint8_t> p(n);
  for (int r = n - 1; r >= 0; --r) {
    p[r] = static_cast<uint8_t>(idx % h);
    idx /= h;
  }
  return p;
}

RootedView two_leaf_view(double a, double b) {
  // root 2 with leaves 0, 1
  return RootedView::from_parents({2, 2, -1}, {a, b, 0.0}, 2);
}

}  // namespace

TEST_CASE("two-leaf closed form") {
  const auto m = MutationModel::binary_symmetric(0.1);
  const auto view = two_leaf_view(1.0, 1.0);
  const std::vector<uint8_t> same = {0, 0};
  const double expected = 0.25 * (1.0 + std::exp(-0.4));
  CHECK(site_likelihood(view, m, same) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(site_likelihood_brute_force(view, m, same) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.417580).epsilon(1e-6));
}

TEST_CASE("zero-length tree pins every node to the root allele") {
  const auto m = MutationModel::binary_symmetric(0.3);
  const auto view =
      RootedView::from_parents({3, 3, 4, 4, -1}, {0.0, 0.0, 0.0, 0.0, 0.0}, 3);
  CHECK(site_likelihood(view, m, std::vector<uint8_t>{1, 1, 1}) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(site_likelihood(view, m, std::vector<uint8_t>{1, 0, 1}) ==
        doctest::Approx(0.0));
}

TEST_CASE("pattern table sums to one") {
  Rng rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + rng.uniform_int(4);  // up to 5 leaves
    const auto t = sample(KingmanPrior{n}, rng);
    const auto view = RootedView::from_ranked(t);
    const auto m = MutationModel::binary_symmetric(0.2);
    double total = 0.0;
    for (size_t idx = 0; idx < (size_t(1) << n); ++idx)
      total += site_likelihood(view, m, pattern_of_index(idx, n, 2));
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("pruning equals brute force on randomized instances") {
  Rng rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + rng.uniform_int(5);  // up to 6 leaves
    const bool binary = rng.uniform_int(2) == 0;
    const auto m = binary ? MutationModel::binary_symmetric(0.05 + rng.uniform())
                          : MutationModel::jukes_cantor(0.05 + 0.3 * rng.uniform());
    const auto t = sample(KingmanPrior{n}, rng);
    const auto view = RootedView::from_ranked(t);
    std::vector<uint8_t> pattern(n);
    for (auto& a : pattern) a = static_cast<uint8_t>(rng.uniform_int(m.size()));
    const double fast = site_likelihood(view, m, pattern);
    const double slow = site_likelihood_brute_force(view, m, pattern);
    CHECK(std::abs(fast - slow) <= 1e-12 * std::max(fast, slow));
  }
}

TEST_CASE("pruning equals brute force on unrooted trees") {
  Rng rng(47);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 4 + rng.uniform_int(3);
    const auto m = MutationModel::binary_symmetric(0.3);
    const auto t = sample(UniformPrior{n, 1.0}, rng);
    const auto view = RootedView::from_unrooted(t, t.n);
    std::vector<uint8_t> pattern(n);
    for (auto& a : pattern) a = static_cast<uint8_t>(rng.uniform_int(2));
    const double fast = site_likelihood(view, m, pattern);
    const double slow = site_likelihood_brute_force(view, m, pattern);
    CHECK(std::abs(fast - slow) <= 1e-12 * std::max(fast, slow));
  }
}

TEST_CASE("log likelihood: empty data and repeated columns") {
  Rng rng(53);
  const auto t = sample(KingmanPrior{4}, rng);
  const auto m = MutationModel::binary_symmetric(0.2);
  const auto view = RootedView::from_ranked(t);

  SiteMatrix empty;
  empty.leaf_labels = {"1", "2", "3", "4"};
  empty.k = 0;
  CHECK(log_likelihood(view, m, empty) == 0.0);

  SiteMatrix two;
  two.leaf_labels = {"1", "2", "3", "4"};
  two.k = 2;
  two.alleles = {0, 0, 1, 1, 0, 0, 1, 1};  // identical columns
  const double single =
      std::log(site_likelihood(view, m, std::vector<uint8_t>{0, 1, 0, 1}));
  CHECK(log_likelihood(view, m, two) == doctest::Approx(2.0 * single).epsilon(1e-13));
}

TEST_CASE("log likelihood equals the brute-force sum") {
  Rng rng(59);
  const auto t = sample(KingmanPrior{5}, rng);
  const auto m = MutationModel::binary_symmetric(0.15);
  const auto view = RootedView::from_ranked(t);
  const auto data = simulate_sites(t, m, 100, 903);
  double slow = 0.0;
  for (int s = 0; s < data.k; ++s) {
    std::vector<uint8_t> pattern(5);
    for (int r = 0; r < 5; ++r) pattern[r] = data.at(r, s);
    slow += std::log(site_likelihood_brute_force(view, m, pattern));
  }
  CHECK(log_likelihood(view, m, data) == doctest::Approx(slow).epsilon(1e-8));
}

TEST_CASE("likelihood is invariant under site permutations") {
  Rng rng(61);
  const auto t = sample(KingmanPrior{4}, rng);
  const auto m = MutationModel::binary_symmetric(0.25);
  const auto view = RootedView::from_ranked(t);
  auto data = simulate_sites(t, m, 50, 13);
  const double before = log_likelihood(view, m, data);
  SiteMatrix reversed = data;
  for (int r = 0; r < data.rows(); ++r)
    for (int s = 0; s < data.k; ++s)
      reversed.at(r, s) = data.at(r, data.k - 1 - s);
  CHECK(log_likelihood(view, m, reversed) == doctest::Approx(before).epsilon(1e-13));
}

TEST_CASE("root placement does not change the likelihood of reversible models") {
  Rng rng(67);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 4 + rng.uniform_int(3);  // up to 6
    const auto t = sample(UniformPrior{n, 1.0}, rng);
    const auto m = MutationModel::binary_symmetric(0.4);
    std::vector<uint8_t> pattern(n);
    for (auto& a : pattern) a = static_cast<uint8_t>(rng.uniform_int(2));
    CHECK(root_invariance_max_deviation(t, m, pattern) < 1e-12);
  }
}

TEST_CASE("root invariance check refuses non-reversible models") {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3, 3);
  q(0, 1) = q(1, 2) = q(2, 0) = 1.0;
  q.diagonal().setConstant(-1.0);
  const auto m = MutationModel::create("abc", q, Eigen::VectorXd::Constant(3, 1.0 / 3.0));
  Rng rng(71);
  const auto t = sample(UniformPrior{4, 1.0}, rng);
  CHECK_THROWS(root_invariance_max_deviation(t, m, std::vector<uint8_t>{0, 1, 2, 0}));
}

TEST_CASE("match probability decreases toward one half as branches grow") {
  const auto m = MutationModel::binary_symmetric(0.2);
  double last = 1.0;
  for (double total : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
    const auto view = two_leaf_view(total / 2, total / 2);
    const double match =
        site_likelihood(view, m, std::vector<uint8_t>{0, 0}) +
        site_likelihood(view, m, std::vector<uint8_t>{1, 1});
    CHECK(match < last);
    CHECK(match > 0.5);
    last = match;
  }
}

TEST_CASE("brute force enumeration guard") {
  // a caterpillar with 14 leaves has 13 internal nodes; 4^13 > 10^7
  std::vector<int> parent(27, -1);
  std::vector<double> len(27, 0.1);
  parent[0] = 14;
  parent[1] = 14;
  for (int i = 2; i <= 13; ++i) parent[i] = 13 + i;
  for (int i = 14; i < 26; ++i) parent[i] = i + 1;
  const auto view = RootedView::from_parents(parent, len, 14);
  const auto m = MutationModel::jukes_cantor(0.2);
  std::vector<uint8_t> pattern(14, 0);
  CHECK_THROWS_AS(site_likelihood_brute_force(view, m, pattern),
                  std::domain_error);
}
