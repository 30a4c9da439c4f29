#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "manif/bezier.hpp"
#include "manif/distance.hpp"
#include "manif/losses.hpp"
#include "manif/train.hpp"
#include "manif/unlearn.hpp"
#include "helpers.hpp"

using namespace manif;
using testutil::central_fd;
using testutil::rel_l2_error;

namespace {

EncoderSpec identity2() {
  EncoderSpec s;
  s.layers = {2, 2};
  s.activations = {Activation::identity};
  return s;
}

// parameters of identity2 realizing f(x) = x
const ParamVector kId2 = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0};

}  // namespace

TEST_CASE("distances reproduce hand values") {
  Vec a = {0.0, 0.0}, b = {3.0, 4.0};
  CHECK(dist(a, b, Metric::euclidean) == Catch::Approx(5.0));
  CHECK(dist(a, b, Metric::squared_euclidean) == Catch::Approx(25.0));
  CHECK(dist({1.0, 0.0}, {0.0, 1.0}, Metric::cosine) == Catch::Approx(1.0));
  CHECK(dist({2.0, 0.0}, {5.0, 0.0}, Metric::cosine) ==
        Catch::Approx(0.0).margin(1e-12));
  CHECK(dist({1.0, 0.0}, {-2.0, 0.0}, Metric::cosine) == Catch::Approx(2.0));
  CHECK_THROWS_AS(dist({0.0, 0.0}, {1.0, 0.0}, Metric::cosine), NumericError);
  CHECK_THROWS_AS(dist({1.0}, {1.0, 2.0}, Metric::euclidean), DimensionError);
}

TEST_CASE("distance gradients match finite differences") {
  Rng rng(44);
  for (Metric m : {Metric::euclidean, Metric::squared_euclidean, Metric::cosine}) {
    for (int trial = 0; trial < 5; ++trial) {
      Vec a(3), b(3);
      for (double& v : a) v = rng.uniform(0.2, 1.5);
      for (double& v : b) v = rng.uniform(-1.5, -0.2);
      Vec grad = dist_grad(a, b, m);
      auto f = [&](const ParamVector& p) { return dist(p, b, m); };
      Vec fd = central_fd(f, a, 1e-6);
      CHECK(rel_l2_error(grad, fd) < 1e-5);
    }
  }
}

TEST_CASE("triplet hinge on precomputed scalars") {
  CHECK(triplet_term(0.1, 1.0, 0.5) == 0.0);
  CHECK(triplet_term(1.0, 0.2, 0.1) == Catch::Approx(0.9));
  CHECK(triplet_term(1.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("adaptive margin clamps the distance gap at zero") {
  EncoderSpec s = identity2();
  Vec x = {0.0, 0.0};
  CHECK(adaptive_margin(s, kId2, x, {2.0, 0.0}, {0.5, 0.0},
                        Metric::euclidean) == Catch::Approx(1.5));
  CHECK(adaptive_margin(s, kId2, x, {0.7, 0.0}, {0.7, 0.0},
                        Metric::euclidean) == 0.0);
  CHECK(adaptive_margin(s, kId2, x, {0.3, 0.0}, {0.5, 0.0},
                        Metric::euclidean) == 0.0);
}

TEST_CASE("bezier point interpolates the quadratic curve") {
  BezierPath path;
  path.theta_u = {0.0, 0.0};
  path.theta_o = {1.0, 1.0};
  path.w = {0.0, 1.0};
  ParamVector mid = bezier_point(path, 0.5);
  CHECK(mid[0] == Catch::Approx(0.25));
  CHECK(mid[1] == Catch::Approx(0.75));
  CHECK_THROWS_AS(bezier_point(path, -0.01), ConfigError);
  CHECK_THROWS_AS(bezier_point(path, 1.01), ConfigError);
}

TEST_CASE("bezier endpoints are bit-identical to the stored parameters") {
  BezierPath path;
  path.theta_u = {0.1, -0.3, 1e-300};
  path.theta_o = {0.7, 0.2, -1e-300};
  path.w = {123.456, -0.0, 3.14};
  ParamVector p0 = bezier_point(path, 0.0);
  ParamVector p1 = bezier_point(path, 1.0);
  CHECK(std::memcmp(p0.data(), path.theta_u.data(),
                    p0.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(p1.data(), path.theta_o.data(),
                    p1.size() * sizeof(double)) == 0);
}

TEST_CASE("midpoint control point degenerates to the straight line") {
  BezierPath path;
  path.theta_u = {1.0, -2.0};
  path.theta_o = {3.0, 6.0};
  path.w = {2.0, 2.0};  // (theta_u + theta_o) / 2
  for (double t : {0.1, 0.25, 0.5, 0.9}) {
    ParamVector p = bezier_point(path, t);
    CHECK(p[0] == Catch::Approx((1.0 - t) * 1.0 + t * 3.0));
    CHECK(p[1] == Catch::Approx((1.0 - t) * -2.0 + t * 6.0));
  }
}

TEST_CASE("control point optimization follows the chain-rule step") {
  BezierPath path;
  path.theta_u = {0.0};
  path.theta_o = {2.0};
  path.w = {0.4};
  auto objective = [](const ParamVector& theta) {
    double g = 2.0 * (theta[0] - 1.0);
    return std::pair<double, ParamVector>{(theta[0] - 1.0) * (theta[0] - 1.0),
                                          ParamVector{g}};
  };

  SECTION("zero steps leave w untouched and report zero loss") {
    Rng rng(1);
    double mean = -1.0;
    BezierPath out = optimize_control_point(path, objective, 0, 0.1, rng, &mean);
    CHECK(out.w == path.w);
    CHECK(mean == 0.0);
  }
  SECTION("one step matches the predicted update") {
    Rng probe(77);
    double t = probe.uniform();
    double theta_t = (1.0 - t) * (1.0 - t) * 0.0 +
                     2.0 * t * (1.0 - t) * 0.4 + t * t * 2.0;
    double expect = 0.4 - 0.1 * 2.0 * t * (1.0 - t) * 2.0 * (theta_t - 1.0);
    Rng rng(77);
    BezierPath out = optimize_control_point(path, objective, 1, 0.1, rng);
    CHECK(out.w[0] == Catch::Approx(expect).epsilon(1e-14));
    CHECK(out.theta_u == path.theta_u);
    CHECK(out.theta_o == path.theta_o);
  }
  SECTION("training lowers the midpoint objective") {
    double before = objective(bezier_point(path, 0.5)).first;
    Rng rng(5);
    BezierPath out = optimize_control_point(path, objective, 100, 0.5, rng);
    double after = objective(bezier_point(out, 0.5)).first;
    CHECK(after < before / 5.0);
  }
  SECTION("non-finite objective raises") {
    Rng rng(2);
    auto bad = [](const ParamVector& theta) {
      return std::pair<double, ParamVector>{
          std::numeric_limits<double>::quiet_NaN(), ParamVector{0.0}};
      (void)theta;
    };
    CHECK_THROWS_AS(optimize_control_point(path, bad, 1, 0.1, rng),
                    NumericError);
  }
}

TEST_CASE("control point minibatch training validates its inputs") {
  Dataset d = gen_gaussian_clusters(2, 10, 2, 0.2, 3);
  EncoderSpec s = identity2();
  BezierPath path;
  path.theta_u = kId2;
  path.theta_o = kId2;
  path.w = kId2;
  Rng rng(1);
  std::map<int, Vec> targets;
  SECTION("missing distill target") {
    CHECK_THROWS_AS(
        train_control_point(s, path, d, {0, 1}, targets,
                            PathLoss::representation_distill, 2, 2, 0.1, rng),
        ConfigError);
  }
  SECTION("cross entropy requires a head") {
    CHECK_THROWS_AS(train_control_point(s, path, d, {0, 1}, targets,
                                        PathLoss::cross_entropy, 2, 2, 0.1, rng),
                    ConfigError);
  }
  SECTION("endpoints survive training unchanged") {
    for (int i : {0, 1, 2, 3}) targets.emplace(i, d.inputs[i]);
    BezierPath moved = path;
    moved.theta_u = {0.9, 0.0, 0.0, 0.9, 0.1, 0.1};
    BezierPath out = train_control_point(
        s, moved, d, {0, 1, 2, 3}, targets,
        PathLoss::representation_distill, 6, 2, 0.1, rng);
    CHECK(out.theta_u == moved.theta_u);
    CHECK(out.theta_o == moved.theta_o);
    CHECK(out.w != moved.w);
  }
}

TEST_CASE("logit drift bound combines endpoint and control distances") {
  BezierPath path;
  path.theta_o = {0.0, 0.0};
  path.theta_u = {2.0, 0.0};  // |theta_u - theta_o| = 2
  path.w = {1.0, 0.0};        // |w - theta_o| = 1
  CHECK(logit_drift_bound(path, 0.5, 3.0) == Catch::Approx(3.0));
  CHECK(logit_drift_bound(path, 0.0, 3.0) == Catch::Approx(6.0));
  CHECK(logit_drift_bound(path, 1.0, 3.0) == Catch::Approx(0.0));
  CHECK_THROWS_AS(logit_drift_bound(path, 1.5, 3.0), ConfigError);
  CHECK_THROWS_AS(logit_drift_bound(path, 0.5, -1.0), ConfigError);
}

TEST_CASE("lipschitz estimate is exact for a scalar identity map") {
  EncoderSpec s;
  s.layers = {1, 1};
  s.activations = {Activation::identity};
  ParamVector p = {1.0, 0.0};
  Rng rng(6);
  SECTION("unit probe gives slope one") {
    std::vector<Vec> probes = {{1.0}};
    double est = estimate_lipschitz(s, p, probes, 1e-3, 20, rng);
    CHECK(est == Catch::Approx(1.0).epsilon(1e-9));
  }
  SECTION("zero probe gives slope zero for a bias-free net") {
    std::vector<Vec> probes = {{0.0}};
    double est = estimate_lipschitz(s, p, probes, 1e-3, 20, rng);
    CHECK(est == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("argument validation") {
    std::vector<Vec> probes = {{1.0}};
    CHECK_THROWS_AS(estimate_lipschitz(s, p, std::span<const Vec>(), 1e-3, 5, rng),
                    ConfigError);
    CHECK_THROWS_AS(estimate_lipschitz(s, p, probes, 0.0, 5, rng), ConfigError);
    CHECK_THROWS_AS(estimate_lipschitz(s, p, probes, 1e-3, 0, rng), ConfigError);
  }
}

TEST_CASE("triplet loss evaluates the batch-sum hinge") {
  Dataset d;
  d.inputs = {{0.0, 0.0}, {1.0, 1.0}};
  d.labels = {0, 0};
  d.class_count = 1;
  EncoderSpec s = identity2();
  std::map<int, Vec> reps = {{0, {2.0, 0.0}}, {1, {1.0, 1.0}}};
  std::map<int, Vec> targets = {{0, {0.5, 0.0}}, {1, {3.0, 1.0}}};
  std::map<int, double> margins = {{0, 0.1}, {1, 0.1}};

  // sample 0: d_c = 0.5, d_z = 2.0  -> hinge 0
  // sample 1: d_c = 2.0, d_z = 0.0  -> hinge 2.1
  double v = triplet_loss(s, kId2, d, {0, 1}, reps, Metric::euclidean, margins,
                          targets);
  CHECK(v == Catch::Approx(2.1));

  SECTION("gradient path returns the same value") {
    ParamVector g;
    double v2 = triplet_loss(s, kId2, d, {0, 1}, reps, Metric::euclidean,
                             margins, targets, &g);
    CHECK(v2 == Catch::Approx(v));
    REQUIRE(g.size() == kId2.size());
  }
  SECTION("inactive hinge yields a zero gradient") {
    ParamVector g;
    triplet_loss(s, kId2, d, {0}, reps, Metric::euclidean, margins, targets, &g);
    for (double x : g) CHECK(x == 0.0);
  }
  SECTION("missing bookkeeping raises") {
    std::map<int, double> partial = {{0, 0.1}};
    CHECK_THROWS_AS(triplet_loss(s, kId2, d, {0, 1}, reps, Metric::euclidean,
                                 partial, targets),
                    ConfigError);
  }
}

TEST_CASE("triplet gradient matches finite differences") {
  Rng rng(71);
  EncoderSpec s;
  s.layers = {2, 5, 3};
  s.activations = {Activation::tanh, Activation::tanh};
  ParamVector p = init_params(s, rng);
  Dataset d;
  d.class_count = 1;
  for (int i = 0; i < 4; ++i) {
    d.inputs.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    d.labels.push_back(0);
  }
  std::map<int, Vec> reps, targets;
  std::map<int, double> margins;
  std::vector<int> samples = {0, 1, 2, 3};
  for (int i : samples) {
    Vec z(3), c(3);
    for (double& v : z) v = rng.uniform(-1.0, 1.0);
    for (double& v : c) v = rng.uniform(-1.0, 1.0);
    reps.emplace(i, z);
    targets.emplace(i, c);
    margins.emplace(i, 1.0);  // generous margin keeps every hinge active
  }
  for (Metric m : {Metric::euclidean, Metric::squared_euclidean}) {
    ParamVector grad;
    triplet_loss(s, p, d, samples, reps, m, margins, targets, &grad);
    auto f = [&](const ParamVector& q) {
      return triplet_loss(s, q, d, samples, reps, m, margins, targets);
    };
    ParamVector fd = central_fd(f, p);
    CHECK(rel_l2_error(grad, fd) < 1e-4);
  }
}

namespace {

struct SmcFixture {
  Dataset data;
  EncoderSpec spec;
  ParamVector theta_o;
  UnlearnSplit split;

  SmcFixture() {
    data = gen_gaussian_clusters(3, 30, 2, 0.2, 91);
    spec.layers = {2, 8, 3};
    spec.activations = {Activation::tanh, Activation::identity};
    TrainConfig tc;
    tc.epochs = 40;
    tc.lr = 0.1;
    tc.batch_size = 16;
    tc.seed = 4;
    tc.loss = LossKind::representation_mse;
    // unsupervised objective keeps the fixture headless; quality of
    // training is irrelevant here, only a fixed reference parameter set
    spec.head = false;
    tc.loss = LossKind::cross_entropy;
    spec.head = true;
    theta_o = train(spec, data, tc);
    split = make_split(data, 9, 4, spec, theta_o, 17);
  }
};

}  // namespace

TEST_CASE("unlearning with zero epochs returns theta_o bit-for-bit") {
  SmcFixture fx;
  UnlearnConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 1;
  UnlearnReport r = manif_smc_unlearn(fx.spec, fx.theta_o, fx.data, fx.split, cfg);
  REQUIRE(r.theta_u.size() == fx.theta_o.size());
  CHECK(std::memcmp(r.theta_u.data(), fx.theta_o.data(),
                    r.theta_u.size() * sizeof(double)) == 0);
  CHECK(r.triplet_trace.empty());
}

TEST_CASE("unlearning is deterministic in the seed") {
  SmcFixture fx;
  UnlearnConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 3;
  UnlearnReport a = manif_smc_unlearn(fx.spec, fx.theta_o, fx.data, fx.split, cfg);
  UnlearnReport b = manif_smc_unlearn(fx.spec, fx.theta_o, fx.data, fx.split, cfg);
  CHECK(a.theta_u == b.theta_u);
  CHECK(a.triplet_trace == b.triplet_trace);
  CHECK(a.path_trace == b.path_trace);
  cfg.seed = 4;
  UnlearnReport c = manif_smc_unlearn(fx.spec, fx.theta_o, fx.data, fx.split, cfg);
  CHECK(a.theta_u != c.theta_u);
}

TEST_CASE("unlearning traces span the configured epochs") {
  SmcFixture fx;
  UnlearnConfig cfg;
  cfg.epochs = 7;
  cfg.seed = 9;
  UnlearnReport r = manif_smc_unlearn(fx.spec, fx.theta_o, fx.data, fx.split, cfg);
  CHECK(r.triplet_trace.size() == 7);
  CHECK(r.path_trace.size() == 7);
  CHECK(r.margin_trace.size() == 7);
  CHECK(r.rt_seconds > 0.0);
}

TEST_CASE("fixed-margin mode skips the curve and pins the margin") {
  SmcFixture fx;
  UnlearnConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 12;
  cfg.margin_mode = MarginMode::fixed;
  cfg.fixed_margin = 0.01;
  UnlearnReport r = manif_smc_unlearn(fx.spec, fx.theta_o, fx.data, fx.split, cfg);
  for (double p : r.path_trace) CHECK(p == 0.0);
  for (double m : r.margin_trace) CHECK(m == Catch::Approx(0.01));
}

TEST_CASE("unlearning pushes erased samples toward their neighbor centroids") {
  SmcFixture fx;
  UnlearnConfig cfg;
  cfg.epochs = 25;
  cfg.lr = 0.05;
  cfg.seed = 6;
  UnlearnReport r = manif_smc_unlearn(fx.spec, fx.theta_o, fx.data, fx.split, cfg);

  PushPull before = push_pull_objectives(fx.spec, fx.theta_o, fx.data, fx.split);
  PushPull after = push_pull_objectives(fx.spec, r.theta_u, fx.data, fx.split);
  // under theta_o every cached representation coincides with the live one
  CHECK(before.push == Catch::Approx(0.0).margin(1e-18));
  CHECK(after.push > 0.0);

  int closer = 0;
  for (int e : fx.split.erased) {
    Vec f = forward(fx.spec, r.theta_u, fx.data.inputs[e]).representation;
    Vec c = centroid_of_indices(fx.spec, r.theta_u, fx.data,
                                fx.split.neighbor_sets.at(e));
    if (dist(f, c, Metric::euclidean) <
        dist(f, fx.split.original_reps.at(e), Metric::euclidean))
      ++closer;
  }
  CHECK(closer > static_cast<int>(fx.split.erased.size()) / 2);
}
