#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phylo/experiments.hpp"
#include "phylo/sites.hpp"

using namespace phylo;

namespace {

GridSpec tiny_spec() {
  GridSpec spec;
  spec.kind = PriorKind::kingman;
  spec.leaf_counts = {4, 5};
  spec.mutation_rates = {0.2};
  spec.site_counts = {1, 8, 64};
  spec.replicates = 2;
  spec.master_seed = 77;
  spec.chain.iterations = 4000;
  spec.chain.burn_in = 1000;
  spec.chain.thinning = 10;
  spec.report_mode = TopologyMode::rooted_unranked;
  spec.workers = 2;
  return spec;
}

}  // namespace

TEST_CASE("grid spec JSON round-trips") {
  const auto spec = tiny_spec();
  const auto back = GridSpec::from_json(spec.to_json());
  CHECK(back.leaf_counts == spec.leaf_counts);
  CHECK(back.site_counts == spec.site_counts);
  CHECK(back.replicates == spec.replicates);
  CHECK(back.master_seed == spec.master_seed);
  CHECK(back.chain.iterations == spec.chain.iterations);
  CHECK(back.chain.weights.topology ==
        doctest::Approx(spec.chain.weights.topology));
  CHECK(to_string(back.report_mode) == to_string(spec.report_mode));
}

TEST_CASE("grid spec validation") {
  auto spec = tiny_spec();
  spec.site_counts = {8, 8};
  CHECK_THROWS(spec.validate());
  spec = tiny_spec();
  spec.leaf_counts = {};
  CHECK_THROWS(spec.validate());
  spec = tiny_spec();
  spec.kind = PriorKind::uniform;  // report mode must be unrooted
  CHECK_THROWS(spec.validate());
  spec.report_mode = TopologyMode::unrooted;
  spec.validate();
}

TEST_CASE("prepared data is coupled across leaf counts and prefix-nested") {
  const auto spec = tiny_spec();
  const auto prepared = prepare_grid_data(spec);
  REQUIRE(prepared.ranked_trees.size() == 2);
  for (int rep = 0; rep < spec.replicates; ++rep) {
    const auto& small = prepared.data.at({4, 0, rep});
    const auto& large = prepared.data.at({5, 0, rep});
    CHECK(small.k == 64);
    CHECK(large.rows() == 5);
    const auto projected = project_rows(large, small.leaf_labels);
    CHECK(projected.alleles == small.alleles);
    // prefix nesting: smaller-k data sets are leading columns by construction
    const auto p8 = large.prefix(8);
    for (int r = 0; r < 5; ++r)
      for (int s = 0; s < 8; ++s) CHECK(p8.at(r, s) == large.at(r, s));
  }
}

TEST_CASE("grid rows are complete, bounded and deterministic") {
  const auto spec = tiny_spec();
  const auto rows = run_grid(spec);
  CHECK(rows.size() == 2u * 1u * 3u * 2u);
  for (const auto& r : rows) {
    CHECK_FALSE(r.failed);
    CHECK(r.posterior_support >= 0.0);
    CHECK(r.posterior_support <= 1.0);
    CHECK(r.ess >= 1.0);
    CHECK(r.wall_time_s >= 0.0);
  }
  auto serial = spec;
  serial.workers = 1;
  const auto rows2 = run_grid(serial);
  auto strip_time = [](std::vector<ResultRow> rs) {
    for (auto& r : rs) r.wall_time_s = 0.0;
    return results_csv(rs);
  };
  CHECK(strip_time(rows) == strip_time(rows2));
}

TEST_CASE("csv round trip keeps every field") {
  const auto spec = tiny_spec();
  const auto rows = run_grid(spec);
  const auto parsed = parse_results_csv(results_csv(rows));
  REQUIRE(parsed.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].prior == rows[i].prior);
    CHECK(parsed[i].n == rows[i].n);
    CHECK(parsed[i].mu == rows[i].mu);
    CHECK(parsed[i].k == rows[i].k);
    CHECK(parsed[i].replicate == rows[i].replicate);
    CHECK(parsed[i].posterior_support == rows[i].posterior_support);
    CHECK(parsed[i].seed == rows[i].seed);
  }
}

TEST_CASE("aggregation: single replicate mean is the replicate") {
  std::vector<ResultRow> rows;
  ResultRow r;
  r.prior = "kingman";
  r.n = 4;
  r.mu = 0.1;
  r.k = 10;
  r.replicate = 0;
  r.posterior_support = 0.42;
  rows.push_back(r);
  const auto curves = aggregate(rows);
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].mean_support == doctest::Approx(0.42));
  CHECK(curves[0].min_support == doctest::Approx(0.42));
  CHECK(curves[0].max_support == doctest::Approx(0.42));
  CHECK(curves[0].replicates == 1);
}

TEST_CASE("threshold crossings bracket the first exceedance") {
  std::vector<CurvePoint> curves;
  auto add = [&](long k, double mean) {
    CurvePoint p;
    p.prior = "kingman";
    p.n = 4;
    p.mu = 0.1;
    p.k = k;
    p.mean_support = mean;
    curves.push_back(p);
  };
  add(1, 0.1);
  add(10, 0.4);
  add(100, 0.7);
  add(1000, 0.95);
  auto crossings = threshold_crossings(curves, 0.5);
  REQUIRE(crossings.size() == 1);
  CHECK(crossings[0].crossed);
  CHECK(crossings[0].k_below == 10);
  CHECK(crossings[0].k_above == 100);

  // constant at one: crossing at the first k
  curves.clear();
  add(1, 1.0);
  add(10, 1.0);
  crossings = threshold_crossings(curves, 0.5);
  CHECK(crossings[0].crossed);
  CHECK(crossings[0].k_below == 0);
  CHECK(crossings[0].k_above == 1);

  // constant below the level: never crossed
  curves.clear();
  add(1, 0.05);
  add(10, 0.06);
  crossings = threshold_crossings(curves, 0.5);
  CHECK_FALSE(crossings[0].crossed);

  const auto csv = crossings_csv(crossings);
  CHECK(csv.find("prior,n,mu,crossed,k_below,k_above") == 0);
}

TEST_CASE("aggregate and curve csv walk through a real grid") {
  const auto spec = tiny_spec();
  const auto rows = run_grid(spec);
  const auto curves = aggregate(rows);
  CHECK(curves.size() == 6);  // 2 leaf counts x 3 site counts
  for (const auto& p : curves) {
    CHECK(p.replicates == 2);
    CHECK(p.min_support <= p.mean_support);
    CHECK(p.mean_support <= p.max_support);
  }
  const auto csv = curves_csv(curves);
  CHECK(csv.find("prior,n,mu,k,replicates,mean_support") == 0);
}
