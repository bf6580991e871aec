#include "l3guard/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "l3guard/utf8.hpp"

namespace l3guard {

EncodingError::EncodingError(std::uint64_t seq, std::string name)
    : Error("cannot encode message seq " + std::to_string(seq) + ": name '" + name
            + "' is not in the vocabulary (" + utf8::describe_codepoints(name) + ")"),
      seq_(seq), name_(std::move(name)), codepoints_(utf8::describe_codepoints(name_))
{
}

Vocabulary Vocabulary::from_names(std::vector<std::string> names)
{
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    Vocabulary v;
    v.names_ = std::move(names);
    for (std::size_t i = 0; i < v.names_.size(); ++i)
        v.index_.emplace(v.names_[i], i);
    return v;
}

Vocabulary Vocabulary::build(std::span<const MessageView> training)
{
    std::vector<std::string> names;
    for (const auto& m : training) {
        if (!utf8::is_ascii(m.name))
            throw EncodingError(m.seq, m.name);
        names.push_back(m.name);
    }
    return from_names(std::move(names));
}

std::optional<std::size_t> Vocabulary::find(const std::string& name) const
{
    auto it = index_.find(name);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

bool TmsiReuseTracker::observe(const MessageView& m)
{
    if (auto it = flags_.find(m.seq); it != flags_.end())
        return it->second;
    auto& ues = ues_by_tmsi_[m.tmsi.value];
    const bool reused = std::any_of(ues.begin(), ues.end(), [&](auto ue) { return ue != m.ue_id; });
    ues.insert(m.ue_id);
    flags_.emplace(m.seq, reused);
    return reused;
}

bool TmsiReuseTracker::flag(std::uint64_t seq) const
{
    auto it = flags_.find(seq);
    if (it == flags_.end())
        throw NotFoundError("tmsi reuse flag requested for unobserved seq " + std::to_string(seq));
    return it->second;
}

Eigen::VectorXd encode_window(const DetectionWindow& window, const Vocabulary& vocab,
                              const TmsiReuseTracker& reuse)
{
    const auto width = block_width(vocab);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(input_dim(vocab, window.window_size));
    const std::size_t filled = window.context.size() + 1;
    std::size_t slot = static_cast<std::size_t>(window.window_size) - filled;
    auto put = [&](const MessageView& m) {
        auto idx = vocab.find(m.name);
        if (!idx)
            throw EncodingError(m.seq, m.name);
        x(slot * width + *idx) = 1.0;
        x(slot * width + vocab.size()) = reuse.flag(m.seq) ? 1.0 : 0.0;
        ++slot;
    };
    for (const auto& m : window.context)
        put(m);
    put(window.latest);
    return x;
}

namespace {

std::size_t half_up(std::size_t n, std::size_t d) { return (n + d - 1) / d; }

DenseAutoencoder::Layer random_layer(std::size_t in, std::size_t out, Rng& rng)
{
    DenseAutoencoder::Layer l{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            l.weight(r, c) = rng.uniform(-0.1, 0.1);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r)
        l.bias(r) = rng.uniform(-0.1, 0.1);
    return l;
}

} // namespace

DenseAutoencoder::DenseAutoencoder(std::size_t input_dim, Rng& rng)
{
    const auto hidden = half_up(input_dim, 2);
    const auto bottleneck = half_up(input_dim, 4);
    layers_.push_back(random_layer(input_dim, hidden, rng));
    layers_.push_back(random_layer(hidden, bottleneck, rng));
    layers_.push_back(random_layer(bottleneck, hidden, rng));
    layers_.push_back(random_layer(hidden, input_dim, rng));
}

DenseAutoencoder::DenseAutoencoder(std::vector<Layer> layers) : layers_(std::move(layers))
{
    for (std::size_t i = 1; i < layers_.size(); ++i)
        if (layers_[i].weight.cols() != layers_[i - 1].weight.rows())
            throw ConfigError("autoencoder layer shapes do not chain");
}

Eigen::MatrixXd DenseAutoencoder::reconstruct(const Eigen::MatrixXd& inputs) const
{
    Eigen::MatrixXd a = inputs;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Eigen::MatrixXd z = (layers_[i].weight * a).colwise() + layers_[i].bias;
        a = (i + 1 < layers_.size()) ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
    return a;
}

double DenseAutoencoder::loss(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& weights) const
{
    const Eigen::MatrixXd diff = reconstruct(inputs) - inputs;
    const Eigen::VectorXd per_column = diff.array().square().colwise().mean();
    return per_column.dot(weights) / weights.sum();
}

double DenseAutoencoder::loss_and_gradient(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& weights,
                                           std::vector<Layer>& grads) const
{
    const auto n_layers = layers_.size();
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(n_layers + 1);
    acts.push_back(inputs);
    for (std::size_t i = 0; i < n_layers; ++i) {
        Eigen::MatrixXd z = (layers_[i].weight * acts.back()).colwise() + layers_[i].bias;
        acts.push_back(i + 1 < n_layers ? Eigen::MatrixXd(z.array().tanh()) : z);
    }

    const double d = static_cast<double>(inputs.rows());
    const double total_weight = weights.sum();
    const Eigen::MatrixXd diff = acts.back() - inputs;
    const double loss = diff.array().square().colwise().mean().matrix().dot(weights) / total_weight;

    // dL/d(output) for L = sum_c w_c * mean_r diff^2 / W
    Eigen::MatrixXd delta = diff * (2.0 / (d * total_weight));
    delta = delta * weights.asDiagonal();

    grads.resize(n_layers);
    for (std::size_t i = n_layers; i-- > 0;) {
        grads[i].weight = delta * acts[i].transpose();
        grads[i].bias = delta.rowwise().sum();
        if (i > 0) {
            delta = layers_[i].weight.transpose() * delta;
            delta = (delta.array() * (1.0 - acts[i].array().square())).matrix();
        }
    }
    return loss;
}

void DenseAutoencoder::step(const std::vector<Layer>& grads, double learning_rate)
{
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].weight -= learning_rate * grads[i].weight;
        layers_[i].bias -= learning_rate * grads[i].bias;
    }
}

std::vector<double> DenseAutoencoder::flat_parameters() const
{
    std::vector<double> out;
    for (const auto& l : layers_) {
        out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
        out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
    }
    return out;
}

void DenseAutoencoder::set_flat_parameters(std::span<const double> params)
{
    std::size_t k = 0;
    for (auto& l : layers_) {
        for (Eigen::Index i = 0; i < l.weight.size(); ++i)
            l.weight.data()[i] = params[k++];
        for (Eigen::Index i = 0; i < l.bias.size(); ++i)
            l.bias.data()[i] = params[k++];
    }
    if (k != params.size())
        throw ConfigError("parameter vector length mismatch");
}

double AeModel::error(const Eigen::VectorXd& encoded) const
{
    const Eigen::VectorXd recon = network.reconstruct(encoded);
    return (recon - encoded).squaredNorm() / static_cast<double>(encoded.size());
}

AeVerdict AeModel::score(const DetectionWindow& window, const TmsiReuseTracker& reuse) const
{
    if (window.window_size != window_size)
        throw ConfigError("window of size " + std::to_string(window.window_size) + " scored by model for w="
                          + std::to_string(window_size));
    const auto e = error(encode_window(window, vocab, reuse));
    return {e, e > threshold};
}

double percentile(std::vector<double> values, double p)
{
    if (values.empty())
        throw EmptyEvaluation("percentile of an empty set");
    std::sort(values.begin(), values.end());
    // nearest-rank: smallest value with at least p% of the data at or below it
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

std::vector<MessageView> normal_training_prefix(std::span<const Layer3Message> dataset, std::size_t count)
{
    std::vector<MessageView> out;
    for (const auto& m : dataset) {
        if (out.size() == count)
            break;
        if (m.label == Label::Normal)
            out.push_back(view_of(m));
    }
    return out;
}

AeModel train_autoencoder(std::span<const MessageView> training_stream, int window_size,
                          const AeHyperparameters& hp)
{
    check_window_size(window_size);
    if (training_stream.empty())
        throw ConfigError("empty training stream");

    AeModel model;
    model.window_size = window_size;
    model.vocab = Vocabulary::build(training_stream);

    TmsiReuseTracker reuse;
    WindowStreamer streamer(window_size);
    std::vector<Eigen::VectorXd> encoded;
    encoded.reserve(training_stream.size());
    for (const auto& m : training_stream) {
        reuse.observe(m);
        encoded.push_back(encode_window(streamer.push(m), model.vocab, reuse));
    }

    // Full-batch loss over all windows equals the multiplicity-weighted loss
    // over the distinct ones; the benign stream repeats heavily.
    std::map<std::vector<double>, double> distinct;
    for (const auto& x : encoded)
        distinct[std::vector<double>(x.data(), x.data() + x.size())] += 1.0;
    const auto dim = static_cast<Eigen::Index>(input_dim(model.vocab, window_size));
    Eigen::MatrixXd batch(dim, static_cast<Eigen::Index>(distinct.size()));
    Eigen::VectorXd weights(static_cast<Eigen::Index>(distinct.size()));
    Eigen::Index col = 0;
    for (const auto& [x, count] : distinct) {
        batch.col(col) = Eigen::Map<const Eigen::VectorXd>(x.data(), dim);
        weights(col) = count;
        ++col;
    }

    Rng rng(hp.seed ^ static_cast<std::uint64_t>(window_size));
    model.network = DenseAutoencoder(static_cast<std::size_t>(dim), rng);
    std::vector<DenseAutoencoder::Layer> grads;
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        const double loss = model.network.loss_and_gradient(batch, weights, grads);
        if (!std::isfinite(loss))
            throw TrainingDivergence("non-finite reconstruction loss at epoch " + std::to_string(epoch));
        if (epoch == 0)
            model.initial_loss = loss;
        model.network.step(grads, hp.learning_rate);
    }
    model.final_loss = model.network.loss(batch, weights);
    if (!std::isfinite(model.final_loss))
        throw TrainingDivergence("non-finite reconstruction loss after training");

    std::vector<double> errors;
    errors.reserve(encoded.size());
    for (const auto& x : encoded)
        errors.push_back(model.error(x));
    model.threshold = percentile(std::move(errors), hp.threshold_percentile);
    return model;
}

namespace {

void write_hex(std::ostream& out, double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    out << buf;
}

double read_hex(std::istream& in, std::size_t& line)
{
    std::string tok;
    if (!(in >> tok))
        throw ParseError(line, "unexpected end of model file");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        throw ParseError(line, "bad number '" + tok + "'");
    return v;
}

} // namespace

void AeModel::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << "l3guard-ae " << kFormatVersion << '\n';
    out << "window_size " << window_size << '\n';
    out << "vocab " << vocab.size() << '\n';
    for (const auto& n : vocab.names())
        out << n << '\n';
    out << "threshold ";
    write_hex(out, threshold);
    out << "\nloss ";
    write_hex(out, initial_loss);
    out << ' ';
    write_hex(out, final_loss);
    out << "\nlayers " << network.layers().size() << '\n';
    for (const auto& l : network.layers()) {
        out << l.weight.rows() << ' ' << l.weight.cols() << '\n';
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
                write_hex(out, l.weight(r, c));
                out << ' ';
            }
            write_hex(out, l.bias(r));
            out << '\n';
        }
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

AeModel AeModel::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::size_t line = 1;
    auto expect = [&](const std::string& key) {
        std::string tok;
        if (!(in >> tok) || tok != key)
            throw ParseError(line, "expected '" + key + "'");
    };
    AeModel m;
    int version = 0;
    expect("l3guard-ae");
    in >> version;
    if (version != kFormatVersion)
        throw ParseError(line, "unsupported model format version " + std::to_string(version));
    expect("window_size");
    in >> m.window_size;
    ++line;
    check_window_size(m.window_size);
    std::size_t n_vocab = 0;
    expect("vocab");
    in >> n_vocab;
    ++line;
    std::vector<std::string> names(n_vocab);
    for (auto& n : names) {
        in >> n;
        ++line;
    }
    m.vocab = Vocabulary::from_names(names);
    if (m.vocab.size() != n_vocab)
        throw ParseError(line, "duplicate vocabulary entries");
    expect("threshold");
    m.threshold = read_hex(in, line);
    ++line;
    expect("loss");
    m.initial_loss = read_hex(in, line);
    m.final_loss = read_hex(in, line);
    ++line;
    std::size_t n_layers = 0;
    expect("layers");
    in >> n_layers;
    std::vector<DenseAutoencoder::Layer> layers;
    for (std::size_t i = 0; i < n_layers; ++i) {
        Eigen::Index rows = 0, cols = 0;
        ++line;
        if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
            throw ParseError(line, "bad layer shape");
        DenseAutoencoder::Layer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        for (Eigen::Index r = 0; r < rows; ++r) {
            ++line;
            for (Eigen::Index c = 0; c < cols; ++c)
                l.weight(r, c) = read_hex(in, line);
            l.bias(r) = read_hex(in, line);
        }
        layers.push_back(std::move(l));
    }
    m.network = DenseAutoencoder(std::move(layers));
    if (m.network.input_dim() != input_dim(m.vocab, m.window_size))
        throw ConfigError("model input dimension does not match w * (|V| + 1)");
    return m;
}

} // namespace l3guard
