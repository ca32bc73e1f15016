#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "doctest.h"
#include "mexlab/harness/tree_corpus.hpp"
#include "mexlab/models/predict.hpp"
#include "mexlab/oracle/oracle.hpp"

using namespace mexlab;

TEST_CASE("round half to even") {
  CHECK(round_decimals(0.125, 2) == doctest::Approx(0.12));
  CHECK(round_decimals(0.135, 2) == doctest::Approx(0.14));
  CHECK(round_decimals(2.5, 0) == 2.0);
  CHECK(round_decimals(3.5, 0) == 4.0);
  CHECK(round_decimals(0.123456, 4) == doctest::Approx(0.1235));
}

TEST_CASE("rounded probabilities keep the unrounded label") {
  // Scores chosen so that p = [0.12345, 0.87655].
  const double p1 = 0.87655;
  BinaryLR m{{0.0}, std::log(p1 / (1 - p1))};
  ModelOracle o(m, FeatureSpace::box(1), DisclosurePolicy::probabilities(3));
  auto r = o.query(Point{0.0});
  REQUIRE(r.probs);
  CHECK((*r.probs)[0] == doctest::Approx(0.123).epsilon(1e-12));
  CHECK((*r.probs)[1] == doctest::Approx(0.877).epsilon(1e-12));
  CHECK(r.label == 1);

  // A near-tie where rounding collapses both entries: label still from the raw argmax.
  BinaryLR tie{{0.0}, 1e-6};
  ModelOracle t(tie, FeatureSpace::box(1), DisclosurePolicy::probabilities(2));
  auto rt = t.query(Point{0.0});
  CHECK((*rt.probs)[0] == (*rt.probs)[1]);
  CHECK(rt.label == 1);
}

TEST_CASE("labels-only policy hides probabilities") {
  BinaryLR m{{1.0, 1.0}, 0.0};
  ModelOracle o(m, FeatureSpace::box(2), DisclosurePolicy::labels_only());
  auto r = o.query(Point{0.5, 0.5});
  CHECK(r.label == 1);
  CHECK_FALSE(r.probs);
  CHECK_FALSE(r.confidence);
}

TEST_CASE("input validation") {
  BinaryLR m{{1.0, 1.0}, 0.0};
  ModelOracle o(m, FeatureSpace::box(2), DisclosurePolicy::probabilities());
  CHECK_THROWS_AS(o.query(Point{0.5}), std::invalid_argument);
  CHECK_THROWS_AS(o.query(Point{0.5, 2.0}), std::out_of_range);
  PartialQuery q = PartialQuery::missing(2);
  q.set(0, 0.1);
  CHECK_THROWS_AS(o.query(q), std::invalid_argument);
  // Rejected queries are not charged.
  CHECK(o.queries() == 0);
  DisclosurePolicy bad = DisclosurePolicy::probabilities(-1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("tree oracle halts at the first missing split") {
  const ExampleTree ex = size_color_tree();
  ModelOracle o(ex.tree, ex.space, DisclosurePolicy::tree_service());
  PartialQuery q = PartialQuery::missing(2);
  q.set(0, 50);
  auto r = o.query(q);
  CHECK(r.halted_at == HaltKind::Internal);
  CHECK(node_id(r) == NodeId{static_cast<double>(ex.tree.nodes[0].label), ex.tree.nodes[0].confidence});
  REQUIRE(r.fields);
  CHECK(*r.fields == std::vector<std::size_t>{0, 1});

  auto leaf = o.query(Point{50, kRed});
  CHECK(leaf.halted_at == HaltKind::Leaf);
  CHECK(*leaf.confidence == ex.tree.nodes[ex.leaf[2]].confidence);
  CHECK(*leaf.fields == std::vector<std::size_t>{0, 1});

  PartialQuery yellow = PartialQuery::missing(2);
  yellow.set(1, kYellow);
  auto ry = o.query(yellow);
  CHECK(ry.halted_at == HaltKind::Leaf);
  CHECK(*ry.fields == std::vector<std::size_t>{1});
}

TEST_CASE("the ledger counts concurrent queries exactly") {
  BinaryLR m{{1.0}, 0.0};
  ModelOracle o(m, FeatureSpace::box(1), DisclosurePolicy::probabilities());
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&o, t] {
      for (int i = 0; i < 250; ++i) o.query(Point{(t * 250 + i) / 1000.0});
    });
  }
  for (auto& w : workers) w.join();
  CHECK(o.queries() == 1000);
  CHECK(o.ledger().count("default") == 1000);
}

TEST_CASE("transcripts replay bit for bit") {
  const ExampleTree ex = size_color_tree();
  ModelOracle o(ex.tree, ex.space, DisclosurePolicy::tree_service());
  std::ostringstream log;
  o.record_to(&log);
  std::vector<PartialQuery> qs{PartialQuery::complete(Point{12.5, kBlue}), PartialQuery::missing(2),
                               PartialQuery::complete(Point{99, kOrange})};
  std::vector<OracleResponse> live;
  for (const auto& q : qs) live.push_back(o.query(q));
  std::istringstream in(log.str());
  ReplayOracle replay(in, ex.space, 2, DisclosurePolicy::tree_service());
  CHECK(replay.recorded() == 3);
  for (std::size_t i = 0; i < qs.size(); ++i) CHECK(replay.query(qs[i]) == live[i]);
  CHECK_THROWS(replay.query(Point{13, kBlue}));
}
