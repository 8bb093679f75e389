#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cursiveseg/error.hpp"
#include "cursiveseg/mlp.hpp"

using namespace cseg;

namespace {

double loss(const MlpModel& m, const std::vector<double>& x, double t) {
    const double y = forward(m, x);
    return 0.5 * (y - t) * (y - t);
}

MlpModel zero_model(std::size_t in, std::size_t hidden) {
    MlpModel m = init_model(in, hidden, 0);
    for (auto* v : {&m.weights_ih, &m.bias_h, &m.weights_ho, &m.bias_o}) std::fill(v->begin(), v->end(), 0.0);
    return m;
}

std::vector<LabeledPoint> xor_points() {
    std::vector<LabeledPoint> pts;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            pts.push_back({{double(a), double(b)}, (a ^ b) ? PointLabel::Correct : PointLabel::Incorrect, {}});
    return pts;
}

}  // namespace

TEST_CASE("init_model") {
    const auto a = init_model(261, 28, 7);
    CHECK(a == init_model(261, 28, 7));
    CHECK(a.weights_ih != init_model(261, 28, 8).weights_ih);
    CHECK(a.weights_ih.size() == 261 * 28);
    for (const auto* v : {&a.weights_ih, &a.bias_h, &a.weights_ho, &a.bias_o})
        for (double w : *v) {
            CHECK(w >= -0.5);
            CHECK(w <= 0.5);
        }
    CHECK_THROWS_AS(init_model(0, 3, 1), ContractError);
}

TEST_CASE("forward") {
    CHECK(forward(zero_model(3, 2), std::vector<double>{1, -4, 9}) == 0.5);

    // 2-2-1 by hand: h0 = s(0.1*1 + 0.3*2 + 0.1) = s(0.8), h1 = s(-0.2*1 + 0.4*2 - 0.1) = s(0.5)
    MlpModel m = zero_model(2, 2);
    m.weights_ih = {0.1, -0.2, 0.3, 0.4};
    m.bias_h = {0.1, -0.1};
    m.weights_ho = {0.5, -0.6};
    m.bias_o = {0.2};
    const double h0 = 1 / (1 + std::exp(-0.8)), h1 = 1 / (1 + std::exp(-0.5));
    const double expected = 1 / (1 + std::exp(-(0.5 * h0 - 0.6 * h1 + 0.2)));
    CHECK(forward(m, std::vector<double>{1, 2}) == doctest::Approx(expected).epsilon(1e-15));

    const auto r = init_model(5, 3, 2);
    for (double big : {-1e6, -50.0, 0.0, 50.0, 1e6}) {
        const double y = forward(r, std::vector<double>(5, big));
        CHECK(y > 0.0);
        CHECK(y < 1.0);
    }
    CHECK_THROWS_AS(forward(r, std::vector<double>(4, 0.0)), ContractError);
}

TEST_CASE("gradient matches central differences") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-5;
    for (int net = 0; net < 10; ++net) {
        MlpModel m = init_model(5, 3, 100 + net);
        std::vector<double> x(5);
        for (auto& v : x) v = u(rng);
        const double t = net % 2;
        const Gradient g = compute_gradient(m, x, t);
        const std::vector<std::pair<std::vector<double>*, const std::vector<double>*>> blocks = {
            {&m.weights_ih, &g.weights_ih}, {&m.bias_h, &g.bias_h}, {&m.weights_ho, &g.weights_ho},
            {&m.bias_o, &g.bias_o}};
        for (auto [params, grads] : blocks) {
            REQUIRE(params->size() == grads->size());
            for (std::size_t i = 0; i < params->size(); ++i) {
                const double keep = (*params)[i];
                (*params)[i] = keep + h;
                const double up = loss(m, x, t);
                (*params)[i] = keep - h;
                const double down = loss(m, x, t);
                (*params)[i] = keep;
                const double numeric = (up - down) / (2 * h);
                CHECK(std::abs((*grads)[i] - numeric) / std::max(1.0, std::abs(numeric)) < 1e-4);
            }
        }
    }
}

TEST_CASE("single step on a 1-1-1 net") {
    MlpModel m = zero_model(1, 1);
    m.weights_ih = {0.4};
    m.bias_h = {-0.1};
    m.weights_ho = {0.7};
    m.bias_o = {0.05};
    const double x = 0.8, t = 1.0, eta = 0.25;

    // Hand derivation for E = 1/2 (y - t)^2 with sigmoid units.
    const double hid = 1 / (1 + std::exp(-(0.4 * x - 0.1)));
    const double y = 1 / (1 + std::exp(-(0.7 * hid + 0.05)));
    const double delta_o = (y - t) * y * (1 - y);
    const double delta_h = delta_o * 0.7 * hid * (1 - hid);

    TrainingConfig cfg;
    cfg.learning_rate = eta;
    cfg.momentum = 0.0;
    cfg.epochs = 1;
    cfg.shuffle = false;
    const auto r = train(m, std::vector<LabeledPoint>{{{x}, PointLabel::Correct, {}}}, cfg);
    CHECK(r.model.weights_ho[0] - 0.7 == doctest::Approx(-eta * delta_o * hid).epsilon(1e-12));
    CHECK(r.model.bias_o[0] - 0.05 == doctest::Approx(-eta * delta_o).epsilon(1e-12));
    CHECK(r.model.weights_ih[0] - 0.4 == doctest::Approx(-eta * delta_h * x).epsilon(1e-12));
    CHECK(r.model.bias_h[0] + 0.1 == doctest::Approx(-eta * delta_h).epsilon(1e-12));
    REQUIRE(r.loss_history.size() == 1);
    CHECK(r.loss_history[0] == doctest::Approx((y - t) * (y - t)));
}

TEST_CASE("momentum carries the previous step") {
    MlpModel m = init_model(2, 2, 3);
    TrainingConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.momentum = 0.3;
    cfg.epochs = 1;
    cfg.shuffle = false;
    const std::vector<LabeledPoint> pts{{{1.0, 0.0}, PointLabel::Correct, {}}, {{0.0, 1.0}, PointLabel::Incorrect, {}}};

    // Oracle: two explicit updates v = -eta g + alpha v.
    MlpModel ref = m;
    const Gradient g1 = compute_gradient(ref, pts[0].features, 1.0);
    const double v1 = -0.5 * g1.bias_o[0];
    ref.bias_o[0] += v1;
    for (std::size_t i = 0; i < ref.weights_ih.size(); ++i) ref.weights_ih[i] -= 0.5 * g1.weights_ih[i];
    for (std::size_t i = 0; i < ref.bias_h.size(); ++i) ref.bias_h[i] -= 0.5 * g1.bias_h[i];
    for (std::size_t i = 0; i < ref.weights_ho.size(); ++i) ref.weights_ho[i] -= 0.5 * g1.weights_ho[i];
    const Gradient g2 = compute_gradient(ref, pts[1].features, 0.0);
    const double expected = ref.bias_o[0] + (-0.5 * g2.bias_o[0] + 0.3 * v1);

    const auto r = train(m, pts, cfg);
    CHECK(r.model.bias_o[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("XOR converges and classifies") {
    TrainingConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.momentum = 0.3;
    cfg.epochs = 20000;
    cfg.seed = 4;
    const auto pts = xor_points();
    const auto r = train(init_model(2, 4, 4), pts, cfg);
    CHECK(mean_squared_error(r.model, pts) < 0.05);
    for (const auto& p : pts) CHECK(classify_point(r.model, p.features).label == p.label);
    for (double l : r.loss_history) CHECK(std::isfinite(l));
}

TEST_CASE("training is deterministic") {
    TrainingConfig cfg;
    cfg.epochs = 50;
    cfg.seed = 17;
    const auto pts = xor_points();
    const auto a = train(init_model(2, 3, 1), pts, cfg);
    const auto b = train(init_model(2, 3, 1), pts, cfg);
    CHECK(a.model == b.model);
    CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("small steps on one sample lower its loss monotonically") {
    TrainingConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.momentum = 0.0;
    cfg.epochs = 200;
    cfg.shuffle = false;
    const std::vector<LabeledPoint> pts{{{0.3, -0.7, 1.0}, PointLabel::Correct, {}}};
    const auto r = train(init_model(3, 4, 12), pts, cfg);
    for (std::size_t e = 1; e < r.loss_history.size(); ++e) CHECK(r.loss_history[e] < r.loss_history[e - 1]);
}

TEST_CASE("training input validation") {
    CHECK_THROWS_AS(train(init_model(2, 2, 1), std::vector<LabeledPoint>{}, TrainingConfig{}), InputError);
    TrainingConfig bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.learning_rate = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // A non-finite loss is a hard failure, not a silent NaN model.
    TrainingConfig short_run;
    short_run.epochs = 3;
    const std::vector<LabeledPoint> pts{{{std::numeric_limits<double>::infinity()}, PointLabel::Correct, {}}};
    CHECK_THROWS_AS(train(init_model(1, 1, 1), pts, short_run), ContractError);
}

TEST_CASE("classify_point thresholds") {
    const auto z = zero_model(4, 2);
    const std::vector<double> x(4, 1.0);
    CHECK(classify_point(z, x).label == PointLabel::Correct);
    CHECK(classify_point(z, x).confidence == 0.5);
    const auto r = init_model(4, 2, 9);
    CHECK(classify_point(r, x, 0.0).label == PointLabel::Correct);
    CHECK(classify_point(r, x, 1.01).label == PointLabel::Incorrect);
}

TEST_CASE("model file round trip and corruption") {
    auto m = init_model(261, 5, 3, WindowConfig{});
    const auto bytes = save_model(m);
    CHECK(load_model(bytes) == m);
    CHECK(save_model(load_model(bytes)) == bytes);

    const auto plain = init_model(3, 2, 1);
    CHECK(load_model(save_model(plain)) == plain);

    auto truncated = bytes;
    truncated.resize(bytes.size() - 1);
    CHECK_THROWS_AS(load_model(truncated), DecodeError);
    CHECK_THROWS_AS(load_model(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10)), DecodeError);

    auto wrong_inputs = bytes;
    wrong_inputs[12] ^= 1;  // input size no longer matches the window
    CHECK_THROWS_AS(load_model(wrong_inputs), DecodeError);

    auto wrong_hidden = bytes;
    wrong_hidden[16] ^= 1;  // payload too short for the declared hidden layer
    CHECK_THROWS_AS(load_model(wrong_hidden), DecodeError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(load_model(bad_magic), DecodeError);

    auto bad_version = bytes;
    bad_version[8] = 9;
    CHECK_THROWS_AS(load_model(bad_version), DecodeError);

    auto extra = bytes;
    extra.push_back(0);
    CHECK_THROWS_AS(load_model(extra), DecodeError);
}
