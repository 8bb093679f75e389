#include "cursiveseg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "byteio.hpp"
#include "cursiveseg/error.hpp"

namespace cseg {

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double uniform_unit(std::mt19937_64& rng) {
    // 53 random mantissa bits -> [0, 1); spelled out so the stream does not
    // depend on the standard library's distribution implementation.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_input(const MlpModel& model, std::span<const double> features) {
    if (features.size() != model.input_size) {
        std::ostringstream os;
        os << "feature length " << features.size() << " does not match model input size "
           << model.input_size;
        throw ContractError(os.str());
    }
}

// Writes hidden activations into `hidden` and returns the output activation.
double forward_into(const MlpModel& m, std::span<const double> x, std::vector<double>& hidden) {
    const std::size_t nh = m.hidden_size;
    hidden.assign(m.bias_h.begin(), m.bias_h.end());
    for (std::size_t i = 0; i < m.input_size; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* w = m.weights_ih.data() + i * nh;
        for (std::size_t j = 0; j < nh; ++j) hidden[j] += w[j] * xi;
    }
    double z = m.bias_o[0];
    for (std::size_t j = 0; j < nh; ++j) {
        hidden[j] = sigmoid(hidden[j]);
        z += m.weights_ho[j] * hidden[j];
    }
    return sigmoid(z);
}

void backprop_into(const MlpModel& m, std::span<const double> x, double y,
                   const std::vector<double>& hidden, double target, Gradient& g) {
    const std::size_t nh = m.hidden_size;
    const double delta_o = (y - target) * y * (1.0 - y);
    g.bias_o[0] = delta_o;
    for (std::size_t j = 0; j < nh; ++j) {
        g.weights_ho[j] = delta_o * hidden[j];
        g.bias_h[j] = delta_o * m.weights_ho[j] * hidden[j] * (1.0 - hidden[j]);
    }
    for (std::size_t i = 0; i < m.input_size; ++i) {
        double* gw = g.weights_ih.data() + i * nh;
        const double xi = x[i];
        for (std::size_t j = 0; j < nh; ++j) gw[j] = g.bias_h[j] * xi;
    }
}

Gradient zero_gradient(const MlpModel& m) {
    return {std::vector<double>(m.weights_ih.size(), 0.0), std::vector<double>(m.bias_h.size(), 0.0),
            std::vector<double>(m.weights_ho.size(), 0.0), std::vector<double>(m.bias_o.size(), 0.0)};
}

void momentum_step(std::vector<double>& w, std::vector<double>& velocity, const std::vector<double>& g,
                   double lr, double momentum) {
    for (std::size_t k = 0; k < w.size(); ++k) {
        velocity[k] = -lr * g[k] + momentum * velocity[k];
        w[k] += velocity[k];
    }
}

constexpr char kModelMagic[] = "CSEGMLP";  // 7 chars + NUL = 8 bytes

}  // namespace

void MlpModel::validate() const {
    if (input_size == 0 || hidden_size == 0) throw ContractError("model: sizes must be >= 1");
    if (output_size != 1) throw ContractError("model: exactly one output unit is supported");
    if (weights_ih.size() != input_size * hidden_size || bias_h.size() != hidden_size ||
        weights_ho.size() != hidden_size || bias_o.size() != 1) {
        throw ContractError("model: weight array sizes inconsistent with declared dimensions");
    }
    if (window) {
        window->validate();
        if (static_cast<std::size_t>(window->input_size()) != input_size) {
            throw ContractError("model: window config does not match input size");
        }
    }
    if (!all_finite(weights_ih) || !all_finite(bias_h) || !all_finite(weights_ho) || !all_finite(bias_o)) {
        throw ContractError("model: non-finite weight");
    }
}

MlpModel init_model(std::size_t input_size, std::size_t hidden_size, std::uint64_t seed,
                    std::optional<WindowConfig> window) {
    if (input_size == 0 || hidden_size == 0) throw ContractError("init_model: sizes must be >= 1");
    MlpModel m;
    m.input_size = input_size;
    m.hidden_size = hidden_size;
    m.window = window;
    std::mt19937_64 rng(seed);
    const auto fill = [&](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (auto& w : v) w = uniform_unit(rng) - 0.5;
    };
    fill(m.weights_ih, input_size * hidden_size);
    fill(m.bias_h, hidden_size);
    fill(m.weights_ho, hidden_size);
    fill(m.bias_o, 1);
    m.validate();
    return m;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double forward(const MlpModel& model, std::span<const double> features) {
    check_input(model, features);
    std::vector<double> hidden;
    return forward_into(model, features, hidden);
}

Gradient compute_gradient(const MlpModel& model, std::span<const double> features, double target) {
    check_input(model, features);
    std::vector<double> hidden;
    const double y = forward_into(model, features, hidden);
    Gradient g = zero_gradient(model);
    backprop_into(model, features, y, hidden, target, g);
    return g;
}

void TrainingConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
}

TrainResult train(MlpModel model, std::span<const LabeledPoint> points, const TrainingConfig& cfg) {
    cfg.validate();
    model.validate();
    if (points.empty()) throw InputError("train: empty training set");

    TrainResult result;
    std::size_t positives = 0;
    for (const auto& p : points) {
        check_input(model, p.features);
        if (p.label == PointLabel::Correct) ++positives;
    }
    if (positives == 0) result.warnings.push_back("training set has no correct-labelled points");
    if (positives == points.size()) result.warnings.push_back("training set has no incorrect-labelled points");

    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(cfg.seed);

    Gradient g = zero_gradient(model);
    Gradient velocity = zero_gradient(model);
    std::vector<double> hidden;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[rng() % i]);
            }
        }
        double sum_sq = 0.0;
        for (std::size_t idx : order) {
            const auto& p = points[idx];
            const double target = p.label == PointLabel::Correct ? 1.0 : 0.0;
            const double y = forward_into(model, p.features, hidden);
            sum_sq += (y - target) * (y - target);
            backprop_into(model, p.features, y, hidden, target, g);
            momentum_step(model.weights_ih, velocity.weights_ih, g.weights_ih, cfg.learning_rate, cfg.momentum);
            momentum_step(model.bias_h, velocity.bias_h, g.bias_h, cfg.learning_rate, cfg.momentum);
            momentum_step(model.weights_ho, velocity.weights_ho, g.weights_ho, cfg.learning_rate, cfg.momentum);
            momentum_step(model.bias_o, velocity.bias_o, g.bias_o, cfg.learning_rate, cfg.momentum);
        }
        const double mse = sum_sq / static_cast<double>(points.size());
        if (!std::isfinite(mse)) {
            std::ostringstream os;
            os << "train: non-finite loss at epoch " << epoch + 1 << "; lower the learning rate";
            throw ContractError(os.str());
        }
        result.loss_history.push_back(mse);
    }
    result.model = std::move(model);
    return result;
}

double mean_squared_error(const MlpModel& model, std::span<const LabeledPoint> points) {
    if (points.empty()) return 0.0;
    double sum_sq = 0.0;
    for (const auto& p : points) {
        const double t = p.label == PointLabel::Correct ? 1.0 : 0.0;
        const double y = forward(model, p.features);
        sum_sq += (y - t) * (y - t);
    }
    return sum_sq / static_cast<double>(points.size());
}

PointVerdict classify_point(const MlpModel& model, std::span<const double> features,
                            double decision_threshold) {
    const double y = forward(model, features);
    return {y >= decision_threshold ? PointLabel::Correct : PointLabel::Incorrect, y};
}

std::vector<std::uint8_t> save_model(const MlpModel& model) {
    model.validate();
    detail::ByteWriter w;
    w.bytes(std::string_view(kModelMagic, sizeof(kModelMagic)));
    w.uint<std::uint32_t>(kModelFormatVersion);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(model.input_size));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(model.hidden_size));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(model.output_size));
    w.uint<std::uint32_t>(model.window ? static_cast<std::uint32_t>(model.window->window_width) : 0);
    w.uint<std::uint32_t>(model.window ? static_cast<std::uint32_t>(model.window->normalized_height) : 0);
    for (const auto* v : {&model.weights_ih, &model.bias_h, &model.weights_ho, &model.bias_o}) {
        for (double x : *v) w.f64(x);
    }
    return w.take();
}

MlpModel load_model(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "model file");
    r.expect_magic(std::string_view(kModelMagic, sizeof(kModelMagic)));
    const auto version = r.uint<std::uint32_t>("version");
    if (version != kModelFormatVersion) {
        r.fail("version", "unsupported format version " + std::to_string(version));
    }
    MlpModel m;
    m.input_size = r.uint<std::uint32_t>("input_size");
    m.hidden_size = r.uint<std::uint32_t>("hidden_size");
    m.output_size = r.uint<std::uint32_t>("output_size");
    const auto ww = r.uint<std::uint32_t>("window_width");
    const auto nh = r.uint<std::uint32_t>("normalized_height");
    if (m.input_size == 0 || m.hidden_size == 0 || m.output_size != 1) {
        r.fail("dims", "inconsistent declared dimensions");
    }
    if ((ww == 0) != (nh == 0)) r.fail("window", "window width and height must both be set or both be 0");
    if (ww != 0) {
        if (static_cast<std::uint64_t>(ww) * nh != m.input_size) {
            r.fail("window", "window config does not match input size");
        }
        m.window = WindowConfig{static_cast<int>(ww), static_cast<int>(nh)};
    }
    const std::uint64_t n_params = static_cast<std::uint64_t>(m.input_size) * m.hidden_size +
                                   2 * static_cast<std::uint64_t>(m.hidden_size) + 1;
    if (n_params * 8 != r.remaining()) {
        r.fail("weights", "payload size " + std::to_string(r.remaining()) + " does not match declared dims (" +
                              std::to_string(n_params * 8) + " bytes expected)");
    }
    const auto read_vec = [&](std::vector<double>& v, std::size_t n, const char* field) {
        v.resize(n);
        for (auto& x : v) x = r.f64(field);
    };
    read_vec(m.weights_ih, m.input_size * m.hidden_size, "weights_ih");
    read_vec(m.bias_h, m.hidden_size, "bias_h");
    read_vec(m.weights_ho, m.hidden_size, "weights_ho");
    read_vec(m.bias_o, 1, "bias_o");
    try {
        m.validate();
    } catch (const ContractError& e) {
        throw DecodeError(std::string("model file: ") + e.what());
    }
    return m;
}

}  // namespace cseg
