#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "l3guard/errors.hpp"
#include "l3guard/rng.hpp"
#include "l3guard/window.hpp"

namespace l3guard {

/// Raised when a message name has no vocabulary entry. The baseline has no
/// out-of-vocabulary bucket, so this is where hypoglyphed input stops it.
class EncodingError : public Error {
public:
    EncodingError(std::uint64_t seq, std::string name);

    std::uint64_t seq() const noexcept { return seq_; }
    const std::string& name() const noexcept { return name_; }
    const std::string& codepoints() const noexcept { return codepoints_; }

private:
    std::uint64_t seq_;
    std::string name_;
    std::string codepoints_;
};

class Vocabulary {
public:
    Vocabulary() = default;

    /// Lexicographic index assignment over the distinct names in training.
    static Vocabulary build(std::span<const MessageView> training);
    static Vocabulary from_names(std::vector<std::string> names);

    std::optional<std::size_t> find(const std::string& name) const;
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Per-message identity feature: 1 when the message's TMSI was already seen
// earlier in the stream under a different ue_id.
class TmsiReuseTracker {
public:
    bool observe(const MessageView& m);
    bool flag(std::uint64_t seq) const;

private:
    std::unordered_map<std::uint32_t, std::unordered_set<std::uint32_t>> ues_by_tmsi_;
    std::unordered_map<std::uint64_t, bool> flags_;
};

/// Width of one message block: one-hot name plus the reuse flag.
inline std::size_t block_width(const Vocabulary& v) { return v.size() + 1; }
inline std::size_t input_dim(const Vocabulary& v, int w) { return static_cast<std::size_t>(w) * block_width(v); }

/// Oldest-first blocks for context then latest, left-padded with zero blocks
/// when the window is shorter than w. Every message in the window must have
/// been observed by the tracker.
Eigen::VectorXd encode_window(const DetectionWindow& window, const Vocabulary& vocab,
                              const TmsiReuseTracker& reuse);

// input -> ceil(in/2) -> ceil(in/4) -> ceil(in/2) -> input, tanh on the hidden
// layers and a linear output.
class DenseAutoencoder {
public:
    struct Layer {
        Eigen::MatrixXd weight; // out x in
        Eigen::VectorXd bias;
    };

    DenseAutoencoder() = default;
    DenseAutoencoder(std::size_t input_dim, Rng& rng);
    explicit DenseAutoencoder(std::vector<Layer> layers);

    std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
    const std::vector<Layer>& layers() const { return layers_; }

    Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& inputs) const;

    /// Weighted mean over columns of each column's mean squared error.
    double loss(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& weights) const;
    double loss_and_gradient(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& weights,
                             std::vector<Layer>& grads) const;

    void step(const std::vector<Layer>& grads, double learning_rate);

    std::vector<double> flat_parameters() const;
    void set_flat_parameters(std::span<const double> params);

private:
    std::vector<Layer> layers_;
};

struct AeHyperparameters {
    int epochs = 3000;
    double learning_rate = 0.5;
    double threshold_percentile = 99.0;
    std::uint64_t seed = 7;
};

struct AeVerdict {
    double error = 0.0;
    bool anomalous = false;
};

struct AeModel {
    static constexpr int kFormatVersion = 1;

    int window_size = 1;
    Vocabulary vocab;
    DenseAutoencoder network;
    double threshold = 0.0;
    double initial_loss = 0.0;
    double final_loss = 0.0;

    /// Mean squared reconstruction error of an encoded window.
    double error(const Eigen::VectorXd& encoded) const;
    AeVerdict score(const DetectionWindow& window, const TmsiReuseTracker& reuse) const;

    void save(const std::filesystem::path& path) const;
    static AeModel load(const std::filesystem::path& path);
};

/// Training windows come from the normal-only stream: attacks are removed and
/// then the first `count` messages are kept.
std::vector<MessageView> normal_training_prefix(std::span<const Layer3Message> dataset, std::size_t count = 700);

AeModel train_autoencoder(std::span<const MessageView> training_stream, int window_size,
                          const AeHyperparameters& hp);

/// Nearest-rank percentile (p in [0, 100]) of values.
double percentile(std::vector<double> values, double p);

} // namespace l3guard
