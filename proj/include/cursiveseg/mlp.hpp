#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cursiveseg/features.hpp"

namespace cseg {

inline constexpr int kDefaultHiddenUnits = 28;

// One-hidden-layer perceptron with a single sigmoid output.
//
// Parameter layout:
//   weights_ih[i * hidden_size + j]  input i -> hidden j
//   bias_h[j]
//   weights_ho[j]                    hidden j -> output
//   bias_o[0]
struct MlpModel {
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    std::size_t output_size = 1;
    std::vector<double> weights_ih;
    std::vector<double> bias_h;
    std::vector<double> weights_ho;
    std::vector<double> bias_o;
    // Window the inputs were extracted with; absent for generic nets.
    std::optional<WindowConfig> window;

    // Throws ContractError on inconsistent dimensions or non-finite weights.
    void validate() const;

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// Uniform weights in [-0.5, 0.5] from a seeded 64-bit Mersenne Twister;
// identical arguments give a bit-identical model.
MlpModel init_model(std::size_t input_size, std::size_t hidden_size, std::uint64_t seed,
                    std::optional<WindowConfig> window = std::nullopt);

double sigmoid(double z);

double forward(const MlpModel& model, std::span<const double> features);

// dE/dparameter for E = 1/2 (y - target)^2, laid out like MlpModel.
struct Gradient {
    std::vector<double> weights_ih;
    std::vector<double> bias_h;
    std::vector<double> weights_ho;
    std::vector<double> bias_o;
};

Gradient compute_gradient(const MlpModel& model, std::span<const double> features, double target);

enum class PointLabel : std::uint8_t { Incorrect = 0, Correct = 1 };

struct PointSource {
    std::string word_id;
    int column = 0;
};

struct LabeledPoint {
    FeatureVector features;
    PointLabel label = PointLabel::Incorrect;
    PointSource source;
};

struct TrainingConfig {
    double learning_rate = 0.1;
    double momentum = 0.3;
    int epochs = 315;
    std::uint64_t seed = 1;
    bool shuffle = true;

    void validate() const;
};

struct TrainResult {
    MlpModel model;
    // Mean of (y - t)^2 over each epoch, measured before each sample's update.
    std::vector<double> loss_history;
    std::vector<std::string> warnings;
};

// Online backpropagation with momentum:
//   dw <- -learning_rate * dE/dw + momentum * dw_prev
TrainResult train(MlpModel model, std::span<const LabeledPoint> points, const TrainingConfig& cfg);

double mean_squared_error(const MlpModel& model, std::span<const LabeledPoint> points);

struct PointVerdict {
    PointLabel label = PointLabel::Incorrect;
    double confidence = 0.0;
};

// Correct iff the activation is >= decision_threshold.
PointVerdict classify_point(const MlpModel& model, std::span<const double> features,
                            double decision_threshold = 0.5);

// Versioned little-endian container:
//   "CSEGMLP\0" | u32 version | u32 input | u32 hidden | u32 output
//   | u32 window_width | u32 normalized_height   (both 0 when no window)
//   | f64 weights_ih[input*hidden] | f64 bias_h[hidden] | f64 weights_ho[hidden] | f64 bias_o[1]
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> save_model(const MlpModel& model);
MlpModel load_model(std::span<const std::uint8_t> bytes);

}  // namespace cseg
