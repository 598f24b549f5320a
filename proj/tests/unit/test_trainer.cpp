#include <gtest/gtest.h>

#include <sstream>

#include "ranspinn/trainer/adam.hpp"
#include "ranspinn/trainer/engine.hpp"
#include "ranspinn/trainer/train.hpp"
#include "test_util.hpp"

using namespace ranspinn;
using namespace ranspinn::trainer;
using physics::Field;

namespace {

const net::LayerSizes kSmall = {3, 6, 6, 1};

net::NetworkEnsemble random_ensemble(std::uint64_t seed, const net::InputNormalization& norm = {}) {
    std::array<net::DenseNet, 5> nets;
    for (int f = 0; f < 5; ++f) nets[f] = testutil::random_net(kSmall, mix_seed(seed, f), 0.6);
    return net::NetworkEnsemble(nets, norm);
}

net::DenseNet linear_net(double wx, double wy, double b) { return net::DenseNet({3, 1}, {wx, wy, 0.0, b}); }

// Smooth targets with positive k and eps on [0, 1]^2, plus boundary targets on the edges.
TrainingData smooth_data(std::size_t n_int, std::uint64_t seed, double re = 50.0) {
    TrainingData d;
    Rng rng(seed);
    for (std::size_t i = 0; i < n_int; ++i) {
        InteriorPoint p;
        p.x = rng.uniform(0, 1);
        p.y = rng.uniform(0, 1);
        p.re = re;
        p.truth = {1.0 - 0.2 * p.y, 0.1 * p.x, 0.5 - 0.5 * p.x, 0.02 + 0.01 * p.x, 0.01 + 0.005 * p.y};
        p.src = {0.0, 0.01 * p.x, -0.02, 0.001, 0.002};
        d.interior.push_back(p);
    }
    for (int i = 0; i < 12; ++i) {
        const double t = i / 11.0;
        d.boundary.push_back({0.0, t, re, 1.0, 0.0, std::nullopt});
        d.boundary.push_back({1.0, t, re, std::nullopt, std::nullopt, 0.0});
    }
    d.reynolds.push_back(re);
    return d;
}

TrainConfig short_config(std::size_t epochs) {
    TrainConfig c = TrainConfig::with_epochs(epochs);
    c.batch_size = 0;
    c.chunk_size = 16;
    return c;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::string history_text(const TrainResult& r) {
    std::ostringstream out;
    write_loss_history(out, r.history);
    return out.str();
}

}  // namespace

TEST(Schedule, PhaseOf) {
    TrainConfig c;
    c.warmstart_end = 100;
    c.eps_pde_start = 200;
    c.epochs = 300;
    EXPECT_EQ(phase_of(0, c), Phase::WarmStart);
    EXPECT_EQ(phase_of(99, c), Phase::WarmStart);
    EXPECT_EQ(phase_of(100, c), Phase::PdeNoEps);
    EXPECT_EQ(phase_of(199, c), Phase::PdeNoEps);
    EXPECT_EQ(phase_of(200, c), Phase::Full);
    EXPECT_EQ(phase_of(299, c), Phase::Full);
}

TEST(Schedule, FractionsOfEpochs) {
    const auto c = TrainConfig::with_epochs(1000);
    EXPECT_EQ(c.warmstart_end, 200u);
    EXPECT_EQ(c.eps_pde_start, 400u);
}

TEST(Schedule, Validation) {
    TrainConfig c = TrainConfig::with_epochs(10);
    EXPECT_NO_THROW(c.validate());
    c.eps_pde_start = c.warmstart_end;
    EXPECT_THROW(c.validate(), ValidationError);
    c = TrainConfig::with_epochs(10);
    c.lr0 = 0.0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = TrainConfig::with_epochs(10);
    c.decay = 1.5;
    EXPECT_THROW(c.validate(), ValidationError);
    EXPECT_THROW(lambda_policy_from_string("often"), ValidationError);
}

TEST(LearningRate, Schedule) {
    TrainConfig c;
    c.decay_interval = 7;
    EXPECT_EQ(learning_rate(0, c), 0.001);
    EXPECT_EQ(learning_rate(6, c), 0.001);
    EXPECT_DOUBLE_EQ(learning_rate(7, c), 0.00095);
    EXPECT_DOUBLE_EQ(learning_rate(14, c), 0.001 * 0.95 * 0.95);
    c.decay_interval = kNoDecay;
    for (std::size_t s : {0ul, 1ul, 1000ul, 123456789ul}) EXPECT_EQ(learning_rate(s, c), 0.001);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    std::vector<double> p = {0.5};
    const std::vector<double> g = {1.0};
    AdamMoments m(1);
    adam_step(p, g, m, 0, 0.001);
    EXPECT_NEAR(p[0], 0.5 - 0.001 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, MatchesClosedFormOverSteps) {
    // Constant gradient g: m_hat = g and v_hat = g^2 exactly, so every step is lr g / (|g| + eps).
    std::vector<double> p = {0.0, 0.0};
    const std::vector<double> g = {2.0, -0.5};
    AdamMoments m(2);
    for (std::size_t s = 0; s < 20; ++s) adam_step(p, g, m, s, 0.01);
    EXPECT_NEAR(p[0], -20 * 0.01 * 2.0 / (2.0 + 1e-8), 1e-12);
    EXPECT_NEAR(p[1], 20 * 0.01 * 0.5 / (0.5 + 1e-8), 1e-12);
}

TEST(Adam, SizeMismatchThrows) {
    std::vector<double> p = {0.0, 0.0};
    const std::vector<double> g = {1.0};
    AdamMoments m(2);
    EXPECT_THROW(adam_step(p, g, m, 0, 0.1), ValidationError);
}

TEST(DataLoss, ExactPredictionIsZero) {
    const auto ens = random_ensemble(1);
    std::vector<InteriorPoint> pts;
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        InteriorPoint p;
        p.x = rng.uniform(-1, 1);
        p.y = rng.uniform(-1, 1);
        for (Field f : physics::kAllFields) p.truth[physics::index_of(f)] = ens.predict(f, p.x, p.y, p.re);
        pts.push_back(p);
    }
    // eps is compared in log space, so exp then log leaves roundoff
    for (double l : data_loss(ens, pts)) EXPECT_LT(l, 1e-28);
}

TEST(DataLoss, SinglePointExamples) {
    std::array<net::DenseNet, 5> nets = {linear_net(0, 0, 1.0), linear_net(0, 0, 0), linear_net(0, 0, 0),
                                         linear_net(0, 0, 0), linear_net(0, 0, std::log(3.0))};
    const net::NetworkEnsemble ens(nets, {});
    InteriorPoint p;
    p.truth = {0.0, 0.0, 0.0, std::log(2.0), 3.0 / std::exp(1.0)};
    const auto l = data_loss(ens, std::span<const InteriorPoint>(&p, 1));
    EXPECT_EQ(l[0], 1.0);
    EXPECT_EQ(l[1], 0.0);
    EXPECT_NEAR(l[3], 0.0, 1e-30);
    EXPECT_NEAR(l[4], 1.0, 1e-10);
    p.truth[4] = -1.0;
    EXPECT_THROW(data_loss(ens, std::span<const InteriorPoint>(&p, 1)), ValidationError);
}

TEST(PdeLoss, WarmStartIsZero) {
    const auto data = smooth_data(30, 3);
    const auto l = pde_loss(random_ensemble(4), data.interior, Phase::WarmStart);
    for (double v : l) EXPECT_EQ(v, 0.0);
}

TEST(PdeLoss, ContinuityResidualTwo) {
    // u = 2x, v = 0, p = 0 at the origin: continuity residual 2, momentum residual 0.
    std::array<net::DenseNet, 5> nets = {linear_net(2, 0, 0), linear_net(0, 0, 0), linear_net(0, 0, 0),
                                         linear_net(0, 0, 0), linear_net(0, 0, 0)};
    const net::NetworkEnsemble ens(nets, {});
    InteriorPoint p;
    p.re = 10.0;
    const auto l = pde_loss(ens, std::span<const InteriorPoint>(&p, 1), Phase::Full);
    EXPECT_EQ(l[1], 4.0);
    EXPECT_EQ(l[0], 0.0);
}

TEST(PdeLoss, ManufacturedSourcesCancel) {
    // Sources set to the network's own residuals make the ensemble an exact solution.
    const auto ens = random_ensemble(5);
    auto data = smooth_data(50, 6);
    const physics::ModelConstants c;
    for (auto& p : data.interior) {
        const auto r = physics::residuals(net::ensemble_predict(ens, p.x, p.y, p.re), c);
        p.src = {r.cont, r.mom_x, r.mom_y, r.k, r.eps};
    }
    for (double v : pde_loss(ens, data.interior, Phase::Full)) EXPECT_LT(v, 1e-12);
}

TEST(PdeLoss, PooledMomentumAndLogEps) {
    const auto ens = random_ensemble(7);
    const auto data = smooth_data(25, 8);
    const physics::ModelConstants c;
    double mom = 0.0, eps = 0.0;
    for (const auto& p : data.interior) {
        const auto r = physics::residuals(net::ensemble_predict(ens, p.x, p.y, p.re), c, p.src);
        mom += r.mom_x * r.mom_x + r.mom_y * r.mom_y;
        eps += std::log1p(r.eps * r.eps);
    }
    const auto l = pde_loss(ens, data.interior, Phase::Full);
    EXPECT_TRUE(testutil::close_rel(l[0], mom / (2.0 * 25), 1e-12));
    EXPECT_TRUE(testutil::close_rel(l[3], eps / 25, 1e-12));
}

TEST(Weights, Inverses) {
    const auto l = inverse_weights({2.0, 0.5, 1.0, 4.0});
    EXPECT_EQ(l, (std::array<double, 4>{0.5, 2.0, 1.0, 0.25}));
    EXPECT_EQ(inverse_weights({0.0, 1.0, 1.0, 1.0})[0], 1e12);
}

TEST(Weights, CalibratedTermsAreUnity) {
    const auto ens = random_ensemble(9);
    const auto data = smooth_data(40, 10);
    const auto lambda = calibrate_weights(ens, data.interior);
    const auto l = pde_loss(ens, data.interior, Phase::Full);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(lambda[i] * l[i], 1.0, 1e-14);
}

TEST(Weights, EffectivePerPhase) {
    const std::array<double, 4> lam = {1, 2, 3, 4};
    EXPECT_EQ(effective_weights(Phase::WarmStart, lam), (std::array<double, 4>{0, 0, 0, 0}));
    EXPECT_EQ(effective_weights(Phase::PdeNoEps, lam), (std::array<double, 4>{1, 2, 3, 0}));
    EXPECT_EQ(effective_weights(Phase::Full, lam), lam);
}

TEST(Engine, LossesMatchScalarReference) {
    const auto data = smooth_data(70, 11);
    const auto ens = random_ensemble(12, data.normalization());
    const GradientEngine engine(data, {}, 1, 16);
    const auto idx = iota_indices(data.interior.size());
    const std::array<double, 4> lam = {0.7, 1.3, 2.0, 0.4};
    const auto e = engine.evaluate(ens, idx, Phase::Full, lam, false);
    const auto d = data_loss(ens, data.interior);
    const auto p = pde_loss(ens, data.interior, Phase::Full);
    for (int i = 0; i < 5; ++i) EXPECT_TRUE(testutil::close_rel(e.loss.data[i], d[i], 1e-10, 1e-12)) << i;
    for (int i = 0; i < 4; ++i) EXPECT_TRUE(testutil::close_rel(e.loss.pde[i], p[i], 1e-10, 1e-12)) << i;
    double bc = 0.0;
    std::size_t targets = 0;
    for (const auto& b : data.boundary) {
        const double u = ens.predict(Field::U, b.x, b.y, b.re), v = ens.predict(Field::V, b.x, b.y, b.re),
                     pr = ens.predict(Field::P, b.x, b.y, b.re);
        if (b.u) bc += (u - *b.u) * (u - *b.u), ++targets;
        if (b.v) bc += (v - *b.v) * (v - *b.v), ++targets;
        if (b.p) bc += (pr - *b.p) * (pr - *b.p), ++targets;
    }
    EXPECT_TRUE(testutil::close_rel(e.loss.bc, bc / targets, 1e-10));
    EXPECT_EQ(e.loss.lambda, lam);
}

TEST(Engine, GradientMatchesFiniteDifferences) {
    const auto data = smooth_data(20, 13);
    auto ens = random_ensemble(14, data.normalization());
    const GradientEngine engine(data, {}, 1, 8);
    const auto idx = iota_indices(data.interior.size());
    const std::array<double, 4> lam = {0.7, 1.3, 2.0, 0.4};
    for (Phase phase : {Phase::WarmStart, Phase::Full}) {
        const auto e = engine.evaluate(ens, idx, phase, lam, true);
        Rng rng(15);
        for (int f = 0; f < 5; ++f) {
            auto params = ens.nets()[f].params();
            for (int trial = 0; trial < 8; ++trial) {
                const std::size_t i = rng.below(params.size());
                const double h = 1e-6, keep = params[i];
                params[i] = keep + h;
                const double up = engine.evaluate(ens, idx, phase, lam, false).loss.total;
                params[i] = keep - h;
                const double dn = engine.evaluate(ens, idx, phase, lam, false).loss.total;
                params[i] = keep;
                const double fd = (up - dn) / (2 * h);
                EXPECT_TRUE(testutil::close_rel(e.grad[f][i], fd, 1e-5, 1e-4))
                    << "field " << f << " param " << i << ": " << e.grad[f][i] << " vs " << fd;
            }
        }
    }
}

TEST(Engine, IndependentOfThreadCount) {
    const auto data = smooth_data(300, 16);
    const auto ens = random_ensemble(17, data.normalization());
    const auto idx = iota_indices(data.interior.size());
    const std::array<double, 4> lam = {0.7, 1.3, 2.0, 0.4};
    const auto a = GradientEngine(data, {}, 1, 32).evaluate(ens, idx, Phase::Full, lam, true);
    for (unsigned t : {2u, 3u, 8u}) {
        const auto b = GradientEngine(data, {}, t, 32).evaluate(ens, idx, Phase::Full, lam, true);
        EXPECT_EQ(a.loss.total, b.loss.total);
        EXPECT_EQ(a.loss.pde, b.loss.pde);
        EXPECT_EQ(a.grad, b.grad);
    }
}

TEST(Train, ZeroEpochsReturnsInput) {
    const auto data = smooth_data(10, 18);
    const auto ens = random_ensemble(19);
    TrainConfig c;
    c.epochs = 0;
    const auto r = train(c, data, ens);
    EXPECT_TRUE(r.history.empty());
    for (int f = 0; f < 5; ++f)
        EXPECT_TRUE(std::equal(r.ensemble.nets()[f].params().begin(), r.ensemble.nets()[f].params().end(),
                               ens.nets()[f].params().begin()));
}

TEST(Train, WarmStartUpdatesAreIndependent) {
    // the u data loss of every warm-start epoch depends only on the u net's own trajectory
    const auto data = smooth_data(60, 20);
    TrainConfig c = short_config(40);
    c.batch_size = 16;
    c.warmstart_end = 30;
    c.eps_pde_start = 35;
    auto a = random_ensemble(21, data.normalization());
    auto b = a;
    for (int f = 1; f < 5; ++f)
        for (double& p : b.nets()[f].params()) p = 0.0;
    const auto ra = train(c, data, a);
    const auto rb = train(c, data, b);
    ASSERT_EQ(ra.history.size(), 40u);
    ASSERT_EQ(rb.history.size(), 40u);
    for (std::size_t e = 0; e < c.warmstart_end; ++e) EXPECT_EQ(ra.history[e].loss.data[0], rb.history[e].loss.data[0]) << e;
    EXPECT_NE(ra.history[0].loss.data[0], ra.history[c.warmstart_end - 1].loss.data[0]);
}

TEST(Train, HistoryInvariants) {
    const auto data = smooth_data(80, 22);
    TrainConfig c = short_config(25);
    c.batch_size = 32;
    const auto r = train(c, data, random_ensemble(23, data.normalization()));
    ASSERT_EQ(r.status, TrainStatus::Completed);
    ASSERT_EQ(r.history.size(), 25u);
    for (const auto& rec : r.history) {
        EXPECT_EQ(rec.phase, phase_of(rec.epoch, c));
        if (rec.epoch < c.warmstart_end) {
            for (double p : rec.loss.pde) EXPECT_EQ(p, 0.0);
            for (double l : rec.loss.lambda) EXPECT_EQ(l, 0.0);
        } else if (rec.epoch < c.eps_pde_start) {
            EXPECT_EQ(rec.loss.lambda[3], 0.0);
            EXPECT_GT(rec.loss.lambda[0], 0.0);
        }
        double total = rec.loss.bc;
        for (double d : rec.loss.data) total += d;
        for (int i = 0; i < 4; ++i) total += rec.loss.lambda[i] * rec.loss.pde[i];
        EXPECT_NEAR(rec.loss.total, total, 1e-14 * std::abs(total));
    }
    ASSERT_EQ(r.calibrations.size(), 2u);
    EXPECT_EQ(r.calibrations[0].epoch, c.warmstart_end);
    EXPECT_EQ(r.calibrations[1].epoch, c.eps_pde_start);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.calibrations[0].lambda[i] * r.calibrations[0].losses[i], 1.0, 1e-14);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(r.calibrations[1].lambda[i], r.calibrations[0].lambda[i]);
    EXPECT_NEAR(r.calibrations[1].lambda[3] * r.calibrations[1].losses[3], 1.0, 1e-14);
    EXPECT_EQ(r.lambda, r.calibrations[1].lambda);
}

TEST(Train, UnitLambdaPolicy) {
    const auto data = smooth_data(40, 24);
    TrainConfig c = short_config(10);
    c.lambda_policy = LambdaPolicy::Unit;
    const auto r = train(c, data, random_ensemble(25, data.normalization()));
    EXPECT_TRUE(r.calibrations.empty());
    EXPECT_EQ(r.history.back().loss.lambda, (std::array<double, 4>{1, 1, 1, 1}));
}

TEST(Train, ReproducibleAcrossRunsAndThreads) {
    const auto data = smooth_data(120, 26);
    TrainConfig c = short_config(15);
    c.batch_size = 50;
    const auto ens = random_ensemble(27, data.normalization());
    const auto a = train(c, data, ens);
    const auto b = train(c, data, ens);
    c.threads = 3;
    const auto t = train(c, data, ens);
    EXPECT_EQ(history_text(a), history_text(b));
    EXPECT_EQ(history_text(a), history_text(t));
    for (int f = 0; f < 5; ++f) {
        const auto pa = a.ensemble.nets()[f].params(), pt = t.ensemble.nets()[f].params();
        EXPECT_TRUE(std::equal(pa.begin(), pa.end(), pt.begin()));
    }
}

TEST(Train, SeedChangesMinibatchOrder) {
    const auto data = smooth_data(120, 28);
    TrainConfig c = short_config(5);
    c.batch_size = 50;
    const auto ens = random_ensemble(29, data.normalization());
    const auto a = train(c, data, ens);
    c.seed = 1;
    const auto b = train(c, data, ens);
    EXPECT_NE(history_text(a), history_text(b));
}

TEST(Train, LearningRateRecordedPerEpoch) {
    const auto data = smooth_data(100, 30);
    TrainConfig c = short_config(10);
    c.batch_size = 25;  // four steps per epoch
    c.decay_interval = 8;
    const auto r = train(c, data, random_ensemble(31, data.normalization()));
    for (const auto& rec : r.history) EXPECT_DOUBLE_EQ(rec.lr, learning_rate(rec.epoch * 4, c));
}

TEST(Train, WarmStartDecreasesLinearTargetLoss) {
    TrainingData d;
    Rng rng(32);
    for (int i = 0; i < 64; ++i) {
        InteriorPoint p;
        p.x = rng.uniform(0, 1);
        p.y = rng.uniform(0, 1);
        p.re = 10.0;
        p.truth = {0.5 + p.x, p.y - 0.3, 1.0 - p.x - p.y, 0.1 + 0.05 * p.x, 0.2 + 0.1 * p.y};
        d.interior.push_back(p);
    }
    d.reynolds.push_back(10.0);
    TrainConfig c = short_config(60);
    c.warmstart_end = 55;
    c.eps_pde_start = 58;
    c.lr0 = 1e-2;
    const auto r = train(c, d, random_ensemble(33, d.normalization()));
    ASSERT_EQ(r.history.size(), 60u);
    auto data_sum = [&](std::size_t e) {
        double s = 0.0;
        for (double v : r.history[e].loss.data) s += v;
        return s;
    };
    double first = 0.0, last = 0.0;
    for (std::size_t e = 0; e < 10; ++e) first += data_sum(e);
    for (std::size_t e = 40; e < 50; ++e) last += data_sum(e);
    EXPECT_LT(last, 0.5 * first);
    // least-squares slope of the data loss over the window
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t e = 0; e < 50; ++e) {
        sx += e, sy += data_sum(e), sxx += double(e) * e, sxy += e * data_sum(e);
    }
    EXPECT_LT((50 * sxy - sx * sy) / (50 * sxx - sx * sx), 0.0);
}

TEST(Train, DivergenceKeepsLastFiniteEnsemble) {
    const auto data = smooth_data(20, 34);
    TrainConfig c = short_config(10);
    c.lr0 = 1e300;
    const auto start = random_ensemble(35, data.normalization());
    const auto r = train(c, data, start);
    EXPECT_EQ(r.status, TrainStatus::Diverged);
    EXPECT_FALSE(r.message.empty());
    EXPECT_LT(r.epochs_completed, 10u);
    EXPECT_EQ(r.history.size(), r.epochs_completed);
    for (const auto& n : r.ensemble.nets())
        for (double p : n.params()) EXPECT_TRUE(std::isfinite(p));
}

TEST(Train, RejectsEmptyInterior) {
    TrainingData d;
    EXPECT_THROW(train(short_config(5), d, random_ensemble(36)), ValidationError);
}
